//! Newline-delimited JSON reports and their aggregation.
//!
//! Numbers are written in shortest round-trip scientific notation; non-finite
//! values become `null`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64 as C64;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::identities::{Draw, IdentityReport};

pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:e}")
    } else {
        "null".into()
    }
}

fn complex(z: C64) -> String {
    format!("[{},{}]", num(z.re), num(z.im))
}

fn complex_list(v: &[C64]) -> String {
    let items: Vec<String> = v.iter().map(|&z| complex(z)).collect();
    format!("[{}]", items.join(","))
}

fn string(s: &str) -> String {
    serde_json::to_string(s).expect("strings serialize")
}

/// The draw as a compact JSON object.
pub fn draw_json(d: &Draw, trial: u64, error: Option<&str>) -> String {
    let mut s = String::from("{");
    let _ = write!(
        s,
        "\"trial\":{trial},\"p\":{},\"q\":{},\"n\":{},\"m\":{},\"t\":{}",
        complex(d.base.p()),
        complex(d.base.q()),
        d.n,
        d.m,
        complex_list(&d.t)
    );
    if !d.u.is_empty() {
        let _ = write!(s, ",\"u\":{}", complex_list(&d.u));
    }
    if !d.aux.is_empty() {
        let _ = write!(s, ",\"aux\":{}", complex_list(&d.aux));
    }
    if !d.a.is_empty() {
        let a: Vec<String> = d.a.iter().map(|&x| num(x)).collect();
        let _ = write!(s, ",\"a\":[{}]", a.join(","));
    }
    if let Some(e) = error {
        let _ = write!(s, ",\"error\":{}", string(e));
    }
    s.push('}');
    s
}

/// One report line (without the trailing newline).
pub fn report_line(r: &IdentityReport) -> String {
    format!(
        "{{\"name\":{},\"residual\":{},\"scale\":{},\"tol\":{},\"pass\":{},\"params_echo\":{},\"nodes_used\":{},\"seed\":{}}}",
        string(&r.name),
        num(r.residual),
        num(r.scale),
        num(r.tol),
        r.pass,
        r.params_echo,
        r.nodes_used,
        r.seed
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub name: String,
    pub trials: usize,
    pub passed: usize,
    /// NaN when any trial produced no residual.
    pub max_residual: f64,
    pub median_nodes: usize,
}

impl Summary {
    pub fn pass_rate(&self) -> f64 {
        self.passed as f64 / self.trials as f64
    }
}

struct Row {
    residual: f64,
    pass: bool,
    nodes: usize,
}

fn parse_row(line: &str) -> Result<(String, Row)> {
    let v: Value = serde_json::from_str(line).map_err(|e| Error::InvalidInput(format!("bad report line: {e}")))?;
    let name = v["name"].as_str().ok_or_else(|| Error::InvalidInput("report line without name".into()))?;
    Ok((
        name.to_string(),
        Row {
            residual: v["residual"].as_f64().unwrap_or(f64::NAN),
            pass: v["pass"].as_bool().unwrap_or(false),
            nodes: v["nodes_used"].as_u64().unwrap_or(0) as usize,
        },
    ))
}

/// Aggregates report lines by report name.
pub fn summarize<'a>(lines: impl IntoIterator<Item = &'a str>) -> Result<Vec<Summary>> {
    let mut groups: BTreeMap<String, Vec<Row>> = BTreeMap::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let (name, row) = parse_row(line)?;
        groups.entry(name).or_default().push(row);
    }
    Ok(groups
        .into_iter()
        .map(|(name, rows)| {
            let mut nodes: Vec<usize> = rows.iter().map(|r| r.nodes).collect();
            nodes.sort_unstable();
            let max_residual =
                rows.iter()
                    .map(|r| r.residual)
                    .fold(0.0, |a: f64, r| if r.is_nan() || a.is_nan() { f64::NAN } else { a.max(r) });
            Summary {
                trials: rows.len(),
                passed: rows.iter().filter(|r| r.pass).count(),
                max_residual,
                median_nodes: nodes[nodes.len() / 2],
                name,
            }
        })
        .collect())
}

/// Aggregates every regular file in `dir` (sorted by file name).
pub fn summarize_dir(dir: &Path) -> Result<Vec<Summary>> {
    let io = |e: std::io::Error| Error::InvalidInput(format!("{}: {e}", dir.display()));
    let mut files: Vec<_> =
        std::fs::read_dir(dir).map_err(io)?.filter_map(|e| e.ok()).map(|e| e.path()).filter(|p| p.is_file()).collect();
    files.sort();
    let mut text = String::new();
    for f in files {
        text.push_str(&std::fs::read_to_string(&f).map_err(io)?);
        text.push('\n');
    }
    summarize(text.lines())
}

pub fn summary_table(rows: &[Summary]) -> String {
    let mut s = format!(
        "{:<48} {:>6} {:>9} {:>13} {:>12}\n",
        "identity", "trials", "pass_rate", "max_residual", "median_nodes"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:<48} {:>6} {:>9.3} {:>13.3e} {:>12}",
            r.name,
            r.trials,
            r.pass_rate(),
            r.max_residual,
            r.median_nodes
        );
    }
    s
}
