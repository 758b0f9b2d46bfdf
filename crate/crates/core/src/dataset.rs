//! CSV ingestion of labelled molecule datasets and seeded subset sampling.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::molgraph::parse_smiles;
use crate::retrieval::LabeledMolecule;

/// Accepts 1/0, true/false and yes/no in any case.
pub fn parse_label(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" => Some(true),
        "0" | "false" | "no" => Some(false),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnNames {
    pub smiles: String,
    pub label: String,
}

impl Default for ColumnNames {
    fn default() -> Self {
        ColumnNames {
            smiles: "smiles".into(),
            label: "label".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipCounts {
    pub bad_label: usize,
    pub bad_smiles: usize,
    pub short_row: usize,
}

impl SkipCounts {
    pub fn total(&self) -> usize {
        self.bad_label + self.bad_smiles + self.short_row
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    pub rows: usize,
    pub skipped: SkipCounts,
    /// Hex SHA-256 of the source bytes.
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetTable {
    pub rows: Vec<LabeledMolecule>,
    pub provenance: Provenance,
}

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing column '{0}'")]
    MissingColumn(String),
    #[error("no usable rows in {0}")]
    NoRows(String),
    #[error("asked for {wanted} rows, only {available} available")]
    Insufficient { wanted: usize, available: usize },
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Parses CSV bytes. Header names match case-insensitively. Rows with an
/// unrecognised label or an unparseable SMILES are skipped and counted.
pub fn ingest_bytes(bytes: &[u8], source: &str, task: &str, cols: &ColumnNames) -> Result<DatasetTable, DatasetError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(bytes);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(name))
            .ok_or_else(|| DatasetError::MissingColumn(name.to_string()))
    };
    let (si, li) = (find(&cols.smiles)?, find(&cols.label)?);
    let mut rows = Vec::new();
    let mut skipped = SkipCounts::default();
    for rec in rdr.records() {
        let rec = rec?;
        let (Some(s), Some(l)) = (rec.get(si), rec.get(li)) else {
            skipped.short_row += 1;
            continue;
        };
        let Some(label) = parse_label(l) else {
            skipped.bad_label += 1;
            continue;
        };
        let s = s.trim();
        if parse_smiles(s).is_err() {
            skipped.bad_smiles += 1;
            continue;
        }
        rows.push(LabeledMolecule {
            smiles: s.to_string(),
            label,
            task: task.to_string(),
        });
    }
    if rows.is_empty() {
        return Err(DatasetError::NoRows(source.to_string()));
    }
    Ok(DatasetTable {
        provenance: Provenance {
            source: source.to_string(),
            rows: rows.len(),
            skipped,
            sha256: hex(&Sha256::digest(bytes)),
        },
        rows,
    })
}

pub fn ingest_dataset(path: &Path, task: &str, cols: &ColumnNames) -> Result<DatasetTable, DatasetError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|source| DatasetError::Io {
            path: path.display().to_string(),
            source,
        })?;
    ingest_bytes(&bytes, &path.display().to_string(), task, cols)
}

/// Splits `n` as evenly as possible over tasks with the given capacities;
/// leftover from small tasks goes to the others, earlier tasks first.
pub fn stratified_quotas(capacities: &[usize], n: usize) -> Option<Vec<usize>> {
    if capacities.iter().sum::<usize>() < n {
        return None;
    }
    let mut quota = vec![0; capacities.len()];
    let mut left = n;
    while left > 0 {
        let open: Vec<usize> = (0..capacities.len()).filter(|&i| quota[i] < capacities[i]).collect();
        let share = (left / open.len()).max(1);
        for &i in &open {
            let take = share.min(capacities[i] - quota[i]).min(left);
            quota[i] += take;
            left -= take;
            if left == 0 {
                break;
            }
        }
    }
    Some(quota)
}

/// Seeded sample without replacement, stratified by task. Output keeps task
/// first-appearance order and source order within a task.
pub fn sample_training_subset(tables: &[DatasetTable], n: usize, seed: u64) -> Result<DatasetTable, DatasetError> {
    let mut order: Vec<&str> = Vec::new();
    let mut by_task: HashMap<&str, Vec<&LabeledMolecule>> = HashMap::new();
    for row in tables.iter().flat_map(|t| &t.rows) {
        by_task
            .entry(&row.task)
            .or_insert_with(|| {
                order.push(&row.task);
                Vec::new()
            })
            .push(row);
    }
    let caps: Vec<usize> = order.iter().map(|t| by_task[t].len()).collect();
    let available = caps.iter().sum();
    let quotas = stratified_quotas(&caps, n).ok_or(DatasetError::Insufficient { wanted: n, available })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    let mut hasher = Sha256::new();
    for (task, q) in order.iter().zip(quotas) {
        let pool = &by_task[task];
        let mut picked = rand::seq::index::sample(&mut rng, pool.len(), q).into_vec();
        picked.sort_unstable();
        for i in picked {
            let r = pool[i].clone();
            hasher.update(format!("{}\t{}\t{}\n", r.task, r.smiles, r.label));
            rows.push(r);
        }
    }
    let sources: Vec<&str> = tables.iter().map(|t| t.provenance.source.as_str()).collect();
    Ok(DatasetTable {
        provenance: Provenance {
            source: format!("subset(n={n}, seed={seed}) of {}", sources.join(", ")),
            rows: rows.len(),
            skipped: SkipCounts::default(),
            sha256: hex(&hasher.finalize()),
        },
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels() {
        for (s, v) in [("1", true), ("0", false), ("True", true), ("no", false), (" YES ", true)] {
            assert_eq!(parse_label(s), Some(v));
        }
        assert_eq!(parse_label("2"), None);
        assert_eq!(parse_label(""), None);
    }

    #[test]
    fn ingest_normalises_and_skips() {
        let csv = b"smiles,label\nCCO,1\nc1ccccc1,0\nCN,1\nCC,2\nC1CC,1\n";
        let t = ingest_bytes(csv, "mem", "bace", &ColumnNames::default()).unwrap();
        let labels: Vec<bool> = t.rows.iter().map(|r| r.label).collect();
        assert_eq!(labels, [true, false, true]);
        assert_eq!(t.provenance.skipped, SkipCounts { bad_label: 1, bad_smiles: 1, short_row: 0 });
        assert_eq!(t, ingest_bytes(csv, "mem", "bace", &ColumnNames::default()).unwrap());
        assert_eq!(t.provenance.sha256.len(), 64);
        assert!(matches!(
            ingest_bytes(b"mol,Class\nC,1\n", "m", "x", &ColumnNames::default()),
            Err(DatasetError::MissingColumn(_))
        ));
        assert!(matches!(
            ingest_bytes(b"smiles,label\nC,7\n", "m", "x", &ColumnNames::default()),
            Err(DatasetError::NoRows(_))
        ));
    }

    #[test]
    fn quotas() {
        assert_eq!(stratified_quotas(&[10, 10], 4), Some(vec![2, 2]));
        assert_eq!(stratified_quotas(&[1513, 2039, 1427, 41127], 4000), Some(vec![1000; 4]));
        assert_eq!(stratified_quotas(&[1, 10], 6), Some(vec![1, 5]));
        assert_eq!(stratified_quotas(&[3, 3, 3], 4), Some(vec![2, 1, 1]));
        assert_eq!(stratified_quotas(&[1], 2), None);
    }
}
