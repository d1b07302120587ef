//! Distribution files: JSON `{"values":[...],"masses":[...]}` or CSV with a
//! `value,mass` header.

use std::fs;
use std::path::Path;

use super::DiscreteDistribution;
use crate::error::{Error, Result};

pub fn from_json_str(s: &str) -> Result<DiscreteDistribution> {
    serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
}

pub fn to_json_string(f: &DiscreteDistribution) -> String {
    serde_json::to_string_pretty(f).expect("distribution serialises")
}

/// Formats with exactly 17 significant digits.
pub fn fmt_sig17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn from_csv_str(s: &str) -> Result<DiscreteDistribution> {
    let mut lines = s.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols != ["value", "mass"] {
        return Err(Error::Parse(format!(
            "expected header `value,mass`, got `{header}`"
        )));
    }
    let mut values = Vec::new();
    let mut masses = Vec::new();
    for (k, line) in lines.enumerate() {
        let mut parts = line.split(',').map(str::trim);
        let (Some(v), Some(m), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::Parse(format!("row {}: expected two columns", k + 1)));
        };
        let parse = |x: &str| {
            x.parse::<f64>()
                .map_err(|e| Error::Parse(format!("row {}: `{x}`: {e}", k + 1)))
        };
        values.push(parse(v)?);
        masses.push(parse(m)?);
    }
    DiscreteDistribution::new(values, masses)
}

pub fn to_csv_string(f: &DiscreteDistribution) -> String {
    let mut out = String::from("value,mass\n");
    for (v, m) in f.values().iter().zip(f.masses()) {
        out.push_str(&fmt_sig17(*v));
        out.push(',');
        out.push_str(&fmt_sig17(*m));
        out.push('\n');
    }
    out
}

fn is_csv(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Loads a distribution; `.csv` files are read as CSV, everything else as JSON.
///
/// I/O failures are reported as parse errors. Semantic problems (masses not
/// summing to one, unsorted support) surface as `InvalidDistribution`.
pub fn load(path: &Path) -> Result<DiscreteDistribution> {
    let text = fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    if is_csv(path) {
        return from_csv_str(&text);
    }
    let raw: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let values = number_array(&raw, "values")?;
    let masses = number_array(&raw, "masses")?;
    DiscreteDistribution::new(values, masses)
}

fn number_array(raw: &serde_json::Value, key: &str) -> Result<Vec<f64>> {
    raw.get(key)
        .and_then(|v| v.as_array())
        .ok_or_else(|| Error::Parse(format!("missing array field `{key}`")))?
        .iter()
        .map(|x| {
            x.as_f64()
                .ok_or_else(|| Error::Parse(format!("non-numeric entry in `{key}`")))
        })
        .collect()
}

pub fn save(path: &Path, f: &DiscreteDistribution) -> Result<()> {
    let body = if is_csv(path) {
        to_csv_string(f)
    } else {
        to_json_string(f) + "\n"
    };
    fs::write(path, body).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}
