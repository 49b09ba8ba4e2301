//! `budgetfd` command-line front end.
//!
//! Exit codes: 0 affirmative, 1 negative (certificate emitted), 2 usage or
//! parse error, 3 cap exceeded.

mod input;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use budgetfd::entailment::{verify_refutation, Refutation, Witness, DEFAULT_ATOM_CAP, DEFAULT_EDGE_CAP};
use budgetfd::infomodel::{self, mine_dependencies, DEFAULT_AFFORDABLE_CAP};
use budgetfd::proofs::ProofJson;
use budgetfd::synth::{CounterexampleOptions, CounterexamplePackage, DEFAULT_COORDINATE_CAP};
use budgetfd::{
    canonical_hypergraph, check_proof, counterexample_for, decide_satisfiable, decide_valid, entails, hyper_satisfies,
    min_budget, Atom, AttributeUniverse, Budget, EntailmentAnswer, Formula, Hypergraph, InfoModel, InformationalModel,
    MinBudget, PremiseSet, Proof, SatAnswer, ValidityAnswer,
};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "budgetfd", version, about = "Budget-constrained functional dependencies")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Attribute universe, e.g. `a,b,c`; must match any `attrs:` header.
    #[arg(long, global = true)]
    attrs: Option<String>,
    /// Seed for sampled equation checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Path depth for counterexample checks (default 2(|V|+|E|)+2).
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Maximum distinct atoms for satisfiability and validity.
    #[arg(long, global = true, default_value_t = DEFAULT_ATOM_CAP, value_parser = positive)]
    cap_atoms: usize,
    /// Maximum edges for exhaustive certificate rechecks.
    #[arg(long, global = true, default_value_t = DEFAULT_EDGE_CAP, value_parser = positive)]
    cap_edges: usize,
}

fn positive(s: &str) -> std::result::Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Args)]
struct FormulaInput {
    /// File holding one formula (optional `attrs:` header).
    #[arg(long)]
    formula: Option<PathBuf>,
    /// Inline formula text.
    #[arg(long, conflicts_with = "formula")]
    expr: Option<String>,
}

#[derive(Args)]
struct ModelInput {
    /// Model as JSON: `{"attributes":[{"name","cost"}],"tuples":[[..]]}`.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Model as CSV with a header row of attribute names.
    #[arg(long, conflicts_with = "model", requires = "costs")]
    csv: Option<PathBuf>,
    /// `name=cost` lines for a CSV model; `inf` marks an unpurchasable column.
    #[arg(long, requires = "csv")]
    costs: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether the premises entail an atom.
    Prove {
        #[arg(long)]
        premises: PathBuf,
        #[arg(long)]
        goal: String,
        /// Write the proof as JSON.
        #[arg(long)]
        emit_proof: Option<PathBuf>,
    },
    /// Cheapest premise purchase taking one set to another.
    MinBudget {
        #[arg(long)]
        premises: PathBuf,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
    },
    /// Decide satisfiability of a formula.
    Sat {
        #[command(flatten)]
        input: FormulaInput,
    },
    /// Decide validity of a formula.
    Valid {
        #[command(flatten)]
        input: FormulaInput,
        /// Write the full counterexample package as JSON.
        #[arg(long)]
        emit_counter: Option<PathBuf>,
        /// Also build an explicit model when the counterexample is acyclic.
        #[arg(long)]
        materialize: bool,
    },
    /// Evaluate a formula on an explicit model.
    CheckModel {
        #[command(flatten)]
        model: ModelInput,
        #[command(flatten)]
        input: FormulaInput,
    },
    /// Check a proof against a premise file.
    CheckProof {
        #[arg(long)]
        premises: PathBuf,
        #[arg(long)]
        proof: PathBuf,
        /// Also require the proof to conclude this atom.
        #[arg(long)]
        goal: Option<String>,
    },
    /// Build and verify an informational model falsifying a formula.
    Counterexample {
        #[command(flatten)]
        input: FormulaInput,
        /// Falsifying hypergraph as JSON; found by the validity check if absent.
        #[arg(long)]
        hypergraph: Option<PathBuf>,
        /// Also build an explicit model when the hypergraph is acyclic.
        #[arg(long)]
        materialize: bool,
    },
    /// Mine minimal single-attribute dependencies from a model.
    Mine {
        #[command(flatten)]
        model: ModelInput,
        /// Largest budget considered; defaults to the total finite cost.
        #[arg(long)]
        budget_cap: Option<String>,
        #[arg(long, default_value_t = 2)]
        max_lhs: usize,
    },
}

/// What a successful run reports before choosing its exit code.
struct Report {
    affirmative: bool,
    text: String,
    json: Value,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(r) => {
            if cli.global.json {
                println!("{}", serde_json::to_string_pretty(&r.json).expect("json"));
            } else {
                print!("{}", r.text);
            }
            ExitCode::from(if r.affirmative { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            let cap = e.chain().any(|c| {
                c.downcast_ref::<budgetfd::Error>()
                    .is_some_and(budgetfd::Error::is_cap_exceeded)
            });
            ExitCode::from(if cap { 3 } else { 2 })
        }
    }
}

fn run(cli: &Cli) -> Result<Report> {
    let g = &cli.global;
    let attrs = g.attrs.as_deref();
    match &cli.command {
        Command::Prove {
            premises,
            goal,
            emit_proof,
        } => prove(g, premises, goal, emit_proof.as_deref()),
        Command::MinBudget { premises, from, to } => min_budget_cmd(attrs, premises, from, to),
        Command::Sat { input } => {
            let (u, f) = input::load_formula(input.formula.as_deref(), input.expr.as_deref(), attrs)?;
            sat(g, &u, &f)
        }
        Command::Valid {
            input,
            emit_counter,
            materialize,
        } => {
            let (u, f) = input::load_formula(input.formula.as_deref(), input.expr.as_deref(), attrs)?;
            valid(g, &u, &f, emit_counter.as_deref(), *materialize)
        }
        Command::CheckModel { model, input } => {
            let m = input::load_model(
                model.model.as_deref(),
                model.csv.as_deref(),
                model.costs.as_deref(),
                attrs,
            )?;
            let (_, f) = input::load_formula(
                input.formula.as_deref(),
                input.expr.as_deref(),
                Some(&decl(m.universe())),
            )?;
            check_model(&m, &f)
        }
        Command::CheckProof { premises, proof, goal } => check_proof_cmd(attrs, premises, proof, goal.as_deref()),
        Command::Counterexample {
            input,
            hypergraph,
            materialize,
        } => {
            let (u, f) = input::load_formula(input.formula.as_deref(), input.expr.as_deref(), attrs)?;
            counterexample(g, &u, &f, hypergraph.as_deref(), *materialize)
        }
        Command::Mine {
            model,
            budget_cap,
            max_lhs,
        } => {
            let m = input::load_model(
                model.model.as_deref(),
                model.csv.as_deref(),
                model.costs.as_deref(),
                attrs,
            )?;
            mine(&m, budget_cap.as_deref(), *max_lhs)
        }
    }
}

fn decl(u: &AttributeUniverse) -> String {
    u.names().join(",")
}

fn premise_labels(p: &PremiseSet, edges: impl Iterator<Item = usize>) -> Vec<String> {
    edges.map(|e| p.atoms()[e].display(p.universe()).to_string()).collect()
}

fn prove(g: &Global, path: &Path, goal: &str, emit: Option<&Path>) -> Result<Report> {
    let p = input::load_premises(path, g.attrs.as_deref())?;
    let u = p.universe();
    let goal = Atom::parse(goal, u)?;
    let goal_text = goal.display(u).to_string();
    match entails(&p, &goal)? {
        EntailmentAnswer::Proved { proof, witness, cost } => {
            check_proof(&proof, &p).map_err(|e| anyhow!("internal: emitted proof fails its check {e}"))?;
            if proof.conclusion() != &goal {
                bail!("internal: proof concludes the wrong atom");
            }
            let proof_json = serde_json::to_value(proof.to_json(u))?;
            if let Some(out) = emit {
                write_json(out, &proof_json)?;
            }
            let used = premise_labels(&p, witness.iter());
            let mut text = format!("proved {goal_text} (cost {cost}, {} proof nodes)\n", proof.size());
            for t in &used {
                text.push_str(&format!("  uses {t}\n"));
            }
            Ok(Report {
                affirmative: true,
                text,
                json: json!({
                    "goal": goal_text,
                    "entailed": true,
                    "cost": cost,
                    "premises_used": used,
                    "proof": proof_json,
                }),
            })
        }
        EntailmentAnswer::Refuted(r) => {
            let h = canonical_hypergraph(&p);
            verify_refutation(&h, &goal, &r, g.cap_edges)
                .map_err(|e| anyhow!("internal: refutation fails its check: {e}"))?;
            Ok(refutation_report(&p, &goal_text, &r))
        }
    }
}

fn refutation_report(p: &PremiseSet, goal: &str, r: &Refutation) -> Report {
    let u = p.universe();
    let mut text = format!("not entailed: {goal} (minimum budget {})\n", r.min_budget);
    let blocking: Vec<Value> = r
        .blocking
        .iter()
        .map(|bc| {
            let purchase = premise_labels(p, bc.purchase.iter());
            text.push_str(&format!(
                "  buying [{}] reaches only {}\n",
                purchase.join("; "),
                u.format_set(&bc.cut.left)
            ));
            json!({"purchase": purchase, "reached": u.format_set(&bc.cut.left), "unreached": u.format_set(&bc.cut.right)})
        })
        .collect();
    Report {
        affirmative: false,
        text,
        json: json!({
            "goal": goal,
            "entailed": false,
            "min_budget": r.min_budget.cost(),
            "blocking": blocking,
        }),
    }
}

fn min_budget_cmd(attrs: Option<&str>, path: &Path, from: &str, to: &str) -> Result<Report> {
    let p = input::load_premises(path, attrs)?;
    let u = p.universe();
    let (a, b) = (u.parse_set(from)?, u.parse_set(to)?);
    let h = canonical_hypergraph(&p);
    let best = min_budget(&h, &a, &b);
    if let MinBudget::Reachable { cost, edges } = &best {
        if !b.is_subset(&h.closure(&a, edges)) || &h.weight(edges) != cost {
            bail!("internal: minimum-budget witness fails its check");
        }
    }
    let used = best.edges().map(|f| premise_labels(&p, f.iter()));
    let mut text = format!("{best}\n");
    for t in used.iter().flatten() {
        text.push_str(&format!("  uses {t}\n"));
    }
    Ok(Report {
        affirmative: best.cost().is_some(),
        text,
        json: json!({
            "from": u.format_set(&a),
            "to": u.format_set(&b),
            "min_budget": best.cost(),
            "premises_used": used,
        }),
    })
}

fn witness_json(w: &Witness) -> Value {
    let u = w.premises.universe();
    json!({
        "assignment": w.assignment.iter().map(|(t, v)| json!({"atom": t.display(u).to_string(), "value": v})).collect::<Vec<_>>(),
        "hypergraph": w.hypergraph.to_json(),
    })
}

fn witness_text(w: &Witness) -> String {
    let u = w.premises.universe();
    let mut s = String::from("assignment:\n");
    for (t, v) in w.assignment.iter() {
        s.push_str(&format!("  {} = {v}\n", t.display(u)));
    }
    s.push_str("hypergraph:\n");
    let h = &w.hypergraph;
    for e in h.edges() {
        s.push_str(&format!(
            "  {}: {} -> {} weight {}\n",
            h.edge_label(e.id),
            u.format_set(&e.tails),
            u.format_set(&e.heads),
            e.weight
        ));
    }
    s
}

fn sat(g: &Global, u: &AttributeUniverse, f: &Formula) -> Result<Report> {
    match decide_satisfiable(f, u, g.cap_atoms)? {
        SatAnswer::Satisfiable(w) => {
            if !hyper_satisfies(&w.hypergraph, f) {
                bail!("internal: witness hypergraph does not satisfy the formula");
            }
            Ok(Report {
                affirmative: true,
                text: format!("satisfiable\n{}", witness_text(&w)),
                json: json!({"satisfiable": true, "witness": witness_json(&w)}),
            })
        }
        SatAnswer::Unsatisfiable => Ok(Report {
            affirmative: false,
            text: format!(
                "unsatisfiable ({} atoms, every realizable assignment falsifies it)\n",
                f.atoms().len()
            ),
            json: json!({"satisfiable": false, "atoms": f.atoms().len()}),
        }),
    }
}

fn counter_options(g: &Global, materialize: bool) -> CounterexampleOptions {
    CounterexampleOptions {
        depth: g.depth,
        seed: g.seed,
        materialize,
        coordinate_cap: DEFAULT_COORDINATE_CAP,
        ..Default::default()
    }
}

fn build_package(g: &Global, h: &Hypergraph, f: &Formula, materialize: bool) -> Result<CounterexamplePackage> {
    let pkg = counterexample_for(h, f, &counter_options(g, materialize))?;
    if !pkg.verified() {
        bail!("internal: counterexample package fails its checks");
    }
    Ok(pkg)
}

fn valid(g: &Global, u: &AttributeUniverse, f: &Formula, emit: Option<&Path>, materialize: bool) -> Result<Report> {
    match decide_valid(f, u, g.cap_atoms)? {
        ValidityAnswer::Valid => Ok(Report {
            affirmative: true,
            text: "valid\n".into(),
            json: json!({"valid": true}),
        }),
        ValidityAnswer::Invalid(w) => {
            if hyper_satisfies(&w.hypergraph, f) {
                bail!("internal: counterexample hypergraph satisfies the formula");
            }
            if let Some(out) = emit {
                let pkg = build_package(g, &w.hypergraph, f, materialize)?;
                write_json(out, &pkg.to_json())?;
            }
            Ok(Report {
                affirmative: false,
                text: format!("invalid\n{}", witness_text(&w)),
                json: json!({"valid": false, "counterexample": witness_json(&w)}),
            })
        }
    }
}

fn counterexample(
    g: &Global,
    u: &AttributeUniverse,
    f: &Formula,
    path: Option<&Path>,
    materialize: bool,
) -> Result<Report> {
    let h = match path {
        Some(p) => {
            let h = Hypergraph::parse_json(&input::read(p)?)?;
            if h.vertices().names() != u.names() {
                bail!(
                    "universe mismatch: hypergraph vertices [{}] vs formula [{}]",
                    decl(h.vertices()),
                    decl(u)
                );
            }
            h
        }
        None => match decide_valid(f, u, g.cap_atoms)? {
            ValidityAnswer::Invalid(w) => w.hypergraph,
            ValidityAnswer::Valid => {
                return Ok(Report {
                    affirmative: false,
                    text: "valid: no counterexample exists\n".into(),
                    json: json!({"valid": true}),
                })
            }
        },
    };
    if hyper_satisfies(&h, f) {
        return Ok(Report {
            affirmative: false,
            text: "the formula holds in this hypergraph\n".into(),
            json: json!({"falsified": false}),
        });
    }
    let pkg = build_package(g, &h, f, materialize)?;
    let mut text = format!("counterexample verified (path depth {})\n", pkg.depth);
    for r in &pkg.atoms {
        let cert = match &r.certificate {
            budgetfd::synth::AtomCertificate::Holds { proof } => format!("true, proof with {} nodes", proof.size()),
            budgetfd::synth::AtomCertificate::Fails { witnesses, truncated } => format!(
                "false, {} flip witness(es){}",
                witnesses.len(),
                if *truncated { ", purchase list truncated" } else { "" }
            ),
        };
        text.push_str(&format!("  {}: {cert}\n", r.atom.display(u)));
    }
    match &pkg.materialized {
        Some(m) => text.push_str(&format!(
            "  explicit linear model: {} coordinates, dimension {}, formula {}\n",
            m.model.coordinate_count(),
            m.model.dimension(),
            m.formula_value
        )),
        None if materialize => text.push_str("  no explicit model (cyclic hypergraph or too many coordinates)\n"),
        None => {}
    }
    Ok(Report {
        affirmative: true,
        text,
        json: pkg.to_json(),
    })
}

fn check_model(m: &InfoModel, f: &Formula) -> Result<Report> {
    let u = m.universe();
    let total: Budget = m.costs().iter().filter_map(|c| c.finite().cloned()).sum();
    let mut text = String::new();
    let mut atoms = Vec::new();
    for t in f.atoms() {
        let value = m.eval_atom(&t)?;
        // independent search for the cheapest purchase, as a recheck
        let cheapest = infomodel::min_witness(m, &t.lhs, &t.rhs, &total, DEFAULT_AFFORDABLE_CAP)?;
        if value != cheapest.as_ref().is_some_and(|(p, _)| *p <= t.budget) {
            bail!("internal: evaluation and minimum purchase disagree on {}", t.display(u));
        }
        let shown = t.display(u).to_string();
        match &cheapest {
            Some((p, c)) => text.push_str(&format!(
                "  {shown} = {value} (cheapest purchase {} at {p})\n",
                u.format_set(c)
            )),
            None => text.push_str(&format!("  {shown} = {value} (no purchase suffices)\n")),
        }
        atoms.push(json!({
            "atom": shown,
            "value": value,
            "min_budget": cheapest.as_ref().map(|(p, _)| p),
            "purchase": cheapest.as_ref().map(|(_, c)| u.format_set(c)),
        }));
    }
    let holds = m.eval_formula(f)?;
    Ok(Report {
        affirmative: holds,
        text: format!("{}\n{text}", if holds { "holds" } else { "fails" }),
        json: json!({"holds": holds, "atoms": atoms}),
    })
}

fn check_proof_cmd(attrs: Option<&str>, premises: &Path, proof: &Path, goal: Option<&str>) -> Result<Report> {
    let p = input::load_premises(premises, attrs)?;
    let u = p.universe();
    let pj: ProofJson = serde_json::from_str(&input::read(proof)?)
        .with_context(|| format!("malformed proof in {}", proof.display()))?;
    let pr = Proof::from_json(&pj, u)?;
    let concludes = pr.conclusion().display(u).to_string();
    let mut result = check_proof(&pr, &p).map_err(|e| e.to_string());
    if let (Ok(()), Some(goal)) = (&result, goal) {
        let goal = Atom::parse(goal, u)?;
        if pr.conclusion() != &goal {
            result = Err(format!("proof concludes {concludes}, not {}", goal.display(u)));
        }
    }
    Ok(match result {
        Ok(()) => Report {
            affirmative: true,
            text: format!("proof accepted: {concludes} ({} nodes)\n", pr.size()),
            json: json!({"valid": true, "concludes": concludes, "nodes": pr.size()}),
        },
        Err(reason) => Report {
            affirmative: false,
            text: format!("proof rejected {reason}\n"),
            json: json!({"valid": false, "concludes": concludes, "reason": reason}),
        },
    })
}

fn mine(m: &InfoModel, cap: Option<&str>, max_lhs: usize) -> Result<Report> {
    let u = m.universe();
    let cap = match cap {
        Some(s) => Budget::parse(s)?,
        None => m.costs().iter().filter_map(|c| c.finite().cloned()).sum(),
    };
    let found = mine_dependencies(m, &cap, max_lhs, DEFAULT_AFFORDABLE_CAP)?;
    let mut text = String::new();
    let deps: Vec<Value> = found
        .iter()
        .map(|d| {
            let atom = d.atom.display(u).to_string();
            let purchase = u.format_set(&d.purchase);
            text.push_str(&format!("{atom}  (buy {purchase})\n"));
            json!({"atom": atom, "purchase": purchase})
        })
        .collect();
    Ok(Report {
        affirmative: true,
        text,
        json: json!({"budget_cap": cap, "max_lhs": max_lhs, "dependencies": deps}),
    })
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    fs::write(path, s).with_context(|| format!("cannot write {}", path.display()))
}
