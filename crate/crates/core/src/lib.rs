//! Budget-constrained functional dependencies.
//!
//! An atom `A |p B` says that whoever knows the attributes `A` can learn `B`
//! after buying extra attributes worth at most `p`. This crate parses
//! boolean formulas over such atoms, decides entailment between atoms with
//! proof objects, decides satisfiability and validity of formulas, evaluates
//! formulas on explicit informational models, and turns a falsifying
//! hypergraph into a falsifying informational model.
//!
//! ```
//! use budgetfd::entailment::{entails, EntailmentAnswer, PremiseSet};
//! use budgetfd::proofs::check_proof;
//! use budgetfd::{Atom, AttributeUniverse};
//!
//! let u = AttributeUniverse::parse_decl("a, b, c")?;
//! let premises = PremiseSet::parse("{a} |1 {b}\n{b} |2 {c}", &u)?;
//! let goal = Atom::parse("{a} |3 {c}", &u)?;
//! match entails(&premises, &goal)? {
//!     EntailmentAnswer::Proved { proof, .. } => assert!(check_proof(&proof, &premises).is_ok()),
//!     EntailmentAnswer::Refuted(_) => unreachable!(),
//! }
//! # Ok::<(), budgetfd::Error>(())
//! ```

pub mod budget;
pub mod entailment;
pub mod error;
pub mod formula;
pub mod gf2;
pub mod hypergraph;
pub mod infomodel;
pub mod proofs;
pub mod synth;

pub use budget::{Budget, ExtendedBudget};
pub use entailment::{
    canonical_hypergraph, decide_satisfiable, decide_valid, entails, hyper_satisfies, min_budget,
    min_budget_bruteforce, EntailmentAnswer, MinBudget, PremiseSet, SatAnswer, ValidityAnswer,
};
pub use error::{Error, Result};
pub use formula::{parse_formula, Assignment, Atom, AttrSet, AttributeUniverse, Formula};
pub use hypergraph::{ClosureTrace, Cut, EdgeSet, Hypergraph};
pub use infomodel::{InfoModel, InformationalModel};
pub use proofs::{build_proof, check_proof, Proof};
pub use synth::{counterexample_for, materialize_acyclic, synthesize_model, LinearModel, PathModel};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/formulas.md")]
    mod formulas {}
    #[doc = include_str!("../../../book/src/entailment.md")]
    mod entailment {}
    #[doc = include_str!("../../../book/src/validity.md")]
    mod validity {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/counterexamples.md")]
    mod counterexamples {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
