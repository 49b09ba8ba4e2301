//! Reading inputs: `attrs:` headers, universes, premises, formulas, models.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use budgetfd::{parse_formula, AttributeUniverse, Formula, InfoModel, InformationalModel, PremiseSet};

/// Splits an optional `attrs: a,b,c` header (the first non-blank,
/// non-comment line) from the rest of the text.
pub fn split_header(text: &str) -> (Option<&str>, &str) {
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            offset += line.len();
            continue;
        }
        if let Some(decl) = trimmed.strip_prefix("attrs:") {
            return (Some(decl), &text[offset + line.len()..]);
        }
        break;
    }
    (None, text)
}

/// The universe from a file header and/or `--attrs`. Both may be given only
/// if they list the same names in the same order.
pub fn resolve_universe(header: Option<&str>, flag: Option<&str>, what: &str) -> Result<AttributeUniverse> {
    let parse = |s: &str| AttributeUniverse::parse_decl(s).map_err(anyhow::Error::from);
    match (header.map(parse).transpose()?, flag.map(parse).transpose()?) {
        (Some(h), Some(f)) if h.names() != f.names() => bail!(
            "universe mismatch: {what} declares [{}] but --attrs is [{}]",
            h.names().join(","),
            f.names().join(",")
        ),
        (Some(u), _) | (None, Some(u)) => Ok(u),
        (None, None) => bail!("no universe for {what}: add an `attrs:` header or pass --attrs"),
    }
}

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

pub fn load_premises(path: &Path, attrs: Option<&str>) -> Result<PremiseSet> {
    let text = read(path)?;
    let (header, body) = split_header(&text);
    let u = resolve_universe(header, attrs, &path.display().to_string())?;
    Ok(PremiseSet::parse(body, &u)?)
}

/// A formula from a file (with optional header) or an inline expression.
pub fn load_formula(
    file: Option<&Path>,
    expr: Option<&str>,
    attrs: Option<&str>,
) -> Result<(AttributeUniverse, Formula)> {
    let (text, name) = match (file, expr) {
        (Some(p), None) => (read(p)?, p.display().to_string()),
        (None, Some(e)) => (e.to_string(), "--expr".to_string()),
        _ => bail!("give exactly one of --formula FILE or --expr TEXT"),
    };
    let (header, body) = split_header(&text);
    let u = resolve_universe(header, attrs, &name)?;
    let body: String = body
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .collect::<Vec<_>>()
        .join(" ");
    let f = parse_formula(&body, &u)?;
    Ok((u, f))
}

/// An explicit model from JSON, or from CSV plus a `name=cost` file.
pub fn load_model(
    json: Option<&Path>,
    csv: Option<&Path>,
    costs: Option<&Path>,
    attrs: Option<&str>,
) -> Result<InfoModel> {
    let m = match (json, csv, costs) {
        (Some(p), None, None) => InfoModel::parse_json(&read(p)?)?,
        (None, Some(c), Some(k)) => {
            let data = fs::File::open(c).with_context(|| format!("cannot read {}", c.display()))?;
            InfoModel::from_csv(data, &read(k)?)?
        }
        _ => bail!("give either --model FILE.json or both --csv FILE and --costs FILE"),
    };
    if let Some(decl) = attrs {
        let u = AttributeUniverse::parse_decl(decl)?;
        if u.names() != m.universe().names() {
            bail!(
                "universe mismatch: model has [{}] but --attrs is [{}]",
                m.universe().names().join(","),
                u.names().join(",")
            );
        }
    }
    Ok(m)
}
