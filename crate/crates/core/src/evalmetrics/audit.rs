//! Consistency audit of published metric tables: recompute every derivable
//! average and compare values reported for the same row in several tables.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::aggregate;

const BUILTIN: [(&str, &str); 3] = [
    ("table1.txt", include_str!("../../data/tables/table1.txt")),
    ("table2.txt", include_str!("../../data/tables/table2.txt")),
    ("table4.txt", include_str!("../../data/tables/table4.txt")),
];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{file} line {line}: {message}")]
pub struct FixtureError {
    pub file: String,
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublishedTable {
    pub name: String,
    /// Largest |recomputed - published| still attributed to rounding.
    pub tolerance: f64,
    pub columns: Vec<String>,
    pub averages: Vec<(String, Vec<String>)>,
    /// Row label -> canonical label used for cross-table comparison.
    pub aliases: BTreeMap<String, String>,
    /// Cells are `columns` followed by the averages, in order.
    pub rows: Vec<(String, Vec<Option<f64>>)>,
    pub notes: Vec<String>,
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect()
}

impl PublishedTable {
    pub fn parse(text: &str, file: &str) -> Result<PublishedTable, FixtureError> {
        let mut t = PublishedTable {
            name: String::new(),
            tolerance: f64::NAN,
            columns: Vec::new(),
            averages: Vec::new(),
            aliases: BTreeMap::new(),
            rows: Vec::new(),
            notes: Vec::new(),
        };
        for (i, raw) in text.lines().enumerate() {
            let err = |message: String| FixtureError {
                file: file.to_string(),
                line: i + 1,
                message,
            };
            let l = raw.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            let (key, value) = l
                .split_once(':')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| err(format!("expected 'key: value', got '{l}'")))?;
            match key {
                "table" => t.name = value.to_string(),
                "tolerance" => {
                    t.tolerance = value
                        .parse()
                        .ok()
                        .filter(|x: &f64| x.is_finite() && *x >= 0.0)
                        .ok_or_else(|| err(format!("bad tolerance '{value}'")))?
                }
                "columns" => t.columns = split_list(value),
                "average" => {
                    let (name, members) = value
                        .split_once('=')
                        .ok_or_else(|| err("average needs 'name = members'".into()))?;
                    let members = split_list(members);
                    if let Some(m) = members.iter().find(|m| !t.columns.contains(m)) {
                        return Err(err(format!("average member '{m}' is not a column")));
                    }
                    t.averages.push((name.trim().to_string(), members));
                }
                "alias" => {
                    let (from, to) = value
                        .split_once('=')
                        .ok_or_else(|| err("alias needs 'label = canonical'".into()))?;
                    t.aliases.insert(from.trim().to_string(), to.trim().to_string());
                }
                "row" => {
                    let mut cells = value.split('|').map(str::trim);
                    let label = cells.next().unwrap_or("").to_string();
                    let values = cells
                        .map(|c| match c {
                            "--" | "-" => Ok(None),
                            c => c.parse::<f64>().map(Some).map_err(|_| err(format!("bad cell '{c}'"))),
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    let want = t.columns.len() + t.averages.len();
                    if values.len() != want {
                        return Err(err(format!("row '{label}' has {} cells, expected {want}", values.len())));
                    }
                    t.rows.push((label, values));
                }
                "note" => t.notes.push(value.to_string()),
                _ => return Err(err(format!("unknown key '{key}'"))),
            }
        }
        let err = |message: &str| FixtureError {
            file: file.to_string(),
            line: 0,
            message: message.to_string(),
        };
        if t.name.is_empty() {
            return Err(err("missing 'table'"));
        }
        if t.tolerance.is_nan() {
            return Err(err("missing 'tolerance'"));
        }
        Ok(t)
    }

    pub fn canonical<'a>(&'a self, label: &'a str) -> &'a str {
        self.aliases.get(label).map(String::as_str).unwrap_or(label)
    }

    /// Named cells of a row, data columns and averages alike.
    fn cells<'a>(&'a self, values: &'a [Option<f64>]) -> impl Iterator<Item = (&'a str, Option<f64>)> {
        self.columns
            .iter()
            .chain(self.averages.iter().map(|(n, _)| n))
            .map(String::as_str)
            .zip(values.iter().copied())
    }
}

pub fn builtin_fixtures() -> Vec<PublishedTable> {
    BUILTIN
        .iter()
        .map(|(f, t)| PublishedTable::parse(t, f).expect("shipped fixture parses"))
        .collect()
}

/// Every `*.txt` in `dir`, in file-name order.
pub fn load_fixture_dir(dir: &Path) -> Result<Vec<PublishedTable>, FixtureError> {
    let io = |e: std::io::Error| FixtureError {
        file: dir.display().to_string(),
        line: 0,
        message: e.to_string(),
    };
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|x| x.to_str()) == Some("txt"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p).map_err(io)?;
            PublishedTable::parse(&text, &p.display().to_string())
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditStatus {
    Match,
    Mismatch,
    /// Published blank or nothing to average.
    NotDerivable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub table: String,
    pub row: String,
    pub average: String,
    pub published: Option<f64>,
    pub recomputed: Option<f64>,
    pub delta: Option<f64>,
    pub status: AuditStatus,
    /// Members left out because the row has no value for them.
    pub missing: Vec<String>,
    /// For mismatches: substitutions from other tables that would reconcile it.
    pub reconciled_by: Vec<String>,
}

/// One row/column reported with different values in different tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub row: String,
    pub column: String,
    pub values: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub entries: Vec<AuditEntry>,
    pub cross: Vec<CrossCheck>,
    pub notes: Vec<(String, String)>,
}

impl AuditReport {
    pub fn mismatches(&self) -> impl Iterator<Item = &AuditEntry> {
        self.entries.iter().filter(|e| e.status == AuditStatus::Mismatch)
    }

    pub fn find(&self, table: &str, row: &str, average: &str) -> Option<&AuditEntry> {
        self.entries
            .iter()
            .find(|e| e.table == table && e.row == row && e.average == average)
    }

    pub fn render_text(&self, all: bool) -> String {
        let mut s = String::new();
        let fmt = |x: Option<f64>| x.map(|v| format!("{v:.6}")).unwrap_or_else(|| "--".into());
        for e in &self.entries {
            if !all && e.status != AuditStatus::Mismatch {
                continue;
            }
            let tag = match e.status {
                AuditStatus::Match => "ok",
                AuditStatus::Mismatch => "MISMATCH",
                AuditStatus::NotDerivable => "n/a",
            };
            let _ = write!(
                s,
                "{tag:<8} {} | {} | {}: published {} recomputed {} delta {}",
                e.table,
                e.row,
                e.average,
                fmt(e.published),
                fmt(e.recomputed),
                e.delta.map(|d| format!("{d:+.6}")).unwrap_or_else(|| "--".into())
            );
            if !e.missing.is_empty() {
                let _ = write!(s, " (without {})", e.missing.join(", "));
            }
            for r in &e.reconciled_by {
                let _ = write!(s, "; reconciles with {r}");
            }
            s.push('\n');
        }
        for c in &self.cross {
            let vals: Vec<String> = c.values.iter().map(|(t, v)| format!("{t} {v}")).collect();
            let _ = writeln!(s, "CROSS    {} | {}: {}", c.row, c.column, vals.join(" vs "));
        }
        for (t, n) in &self.notes {
            let _ = writeln!(s, "NOTE     {t}: {n}");
        }
        let m = self.mismatches().count();
        let _ = writeln!(
            s,
            "{} averages checked, {m} mismatches, {} cross-table discrepancies",
            self.entries.iter().filter(|e| e.status != AuditStatus::NotDerivable).count(),
            self.cross.len()
        );
        s
    }
}

fn mean_of(table: &PublishedTable, values: &[Option<f64>], members: &[String]) -> (Option<f64>, Vec<String>) {
    let named: BTreeMap<String, Option<f64>> = table
        .cells(values)
        .filter(|(n, _)| members.iter().any(|m| m == n))
        .map(|(n, v)| (n.to_string(), v))
        .collect();
    let t = aggregate(&named, &[("g".to_string(), members.to_vec())]);
    (t.averages["g"], t.missing.get("g").cloned().unwrap_or_default())
}

/// Recomputes averages and cross-checks shared rows. Published numbers are
/// reported, never altered.
pub fn audit_tables(tables: &[PublishedTable]) -> AuditReport {
    // canonical row -> column -> [(table, value)]
    let mut seen: BTreeMap<(String, String), Vec<(String, f64)>> = BTreeMap::new();
    let mut order: HashMap<(String, String), usize> = HashMap::new();
    for t in tables {
        for (label, values) in &t.rows {
            for (col, v) in t.cells(values) {
                if let Some(v) = v {
                    let key = (t.canonical(label).to_string(), col.to_string());
                    let n = order.len();
                    order.entry(key.clone()).or_insert(n);
                    seen.entry(key).or_default().push((t.name.clone(), v));
                }
            }
        }
    }

    let mut entries = Vec::new();
    for t in tables {
        let ncols = t.columns.len();
        for (label, values) in &t.rows {
            for (k, (avg, members)) in t.averages.iter().enumerate() {
                let published = values[ncols + k];
                let (recomputed, missing) = mean_of(t, values, members);
                let (delta, status) = match (published, recomputed) {
                    (Some(p), Some(r)) => {
                        let d = r - p;
                        let ok = d.abs() <= t.tolerance;
                        (Some(d), if ok { AuditStatus::Match } else { AuditStatus::Mismatch })
                    }
                    _ => (None, AuditStatus::NotDerivable),
                };
                let mut reconciled_by = Vec::new();
                if status == AuditStatus::Mismatch {
                    let p = published.unwrap();
                    for (mi, col) in t.columns.iter().enumerate() {
                        if !members.contains(col) {
                            continue;
                        }
                        let key = (t.canonical(label).to_string(), col.clone());
                        for (other, v) in seen.get(&key).into_iter().flatten() {
                            if *other == t.name || Some(*v) == values[mi] {
                                continue;
                            }
                            let mut alt = values.clone();
                            alt[mi] = Some(*v);
                            if let (Some(r), _) = mean_of(t, &alt, members) {
                                if (r - p).abs() <= t.tolerance {
                                    reconciled_by.push(format!("{other} {col} = {v} (mean {r:.6})"));
                                }
                            }
                        }
                    }
                }
                entries.push(AuditEntry {
                    table: t.name.clone(),
                    row: label.clone(),
                    average: avg.clone(),
                    published,
                    recomputed,
                    delta,
                    status,
                    missing,
                    reconciled_by,
                });
            }
        }
    }

    let mut cross: Vec<(usize, CrossCheck)> = seen
        .into_iter()
        .filter(|(_, vs)| vs.iter().any(|(_, v)| (v - vs[0].1).abs() > 1e-12))
        .map(|(key, values)| {
            (
                order[&key],
                CrossCheck {
                    row: key.0,
                    column: key.1,
                    values,
                },
            )
        })
        .collect();
    cross.sort_by_key(|(i, _)| *i);

    AuditReport {
        entries,
        cross: cross.into_iter().map(|(_, c)| c).collect(),
        notes: tables
            .iter()
            .flat_map(|t| t.notes.iter().map(move |n| (t.name.clone(), n.clone())))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_parse() {
        let t = builtin_fixtures();
        assert_eq!(t.len(), 3);
        assert_eq!(t[0].rows.len(), 14);
        assert_eq!(t[2].columns.len(), 3);
        assert!(PublishedTable::parse("table: x\ntolerance: 0.1\ncolumns: a\nrow: r | 1 | 2\n", "f").is_err());
        assert!(PublishedTable::parse("columns: a\n", "f").is_err());
        let e = PublishedTable::parse("table: x\ntolerance: 1\ncolumns: a\naverage: m = b\n", "f").unwrap_err();
        assert_eq!(e.line, 4);
    }

    #[test]
    fn unit_table() {
        let t = PublishedTable::parse(
            "table: t\ntolerance: 0.0006\ncolumns: a, b\naverage: m = a, b\nrow: r1 | 1.0 | 2.0 | 1.5\nrow: r2 | 1.0 | -- | 1.0\nrow: r3 | 1.0 | 2.0 | 1.6\n",
            "t",
        )
        .unwrap();
        let rep = audit_tables(&[t]);
        assert_eq!(rep.entries[0].status, AuditStatus::Match);
        assert_eq!(rep.entries[1].missing, vec!["b".to_string()]);
        assert_eq!(rep.entries[1].status, AuditStatus::Match);
        assert_eq!(rep.entries[2].status, AuditStatus::Mismatch);
        assert!(rep.cross.is_empty());
    }
}
