//! Persistent few-shot example store with Tanimoto top-k retrieval.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use serde::{Deserialize, Serialize};

use crate::descriptors::{morgan_fingerprint, tanimoto, Fingerprint, HASH_VERSION};
use crate::molgraph::{aromatize, is_isomorphic, parse_smiles, MoleculeGraph};

pub const DEFAULT_K: usize = 5;
const MAGIC: &[u8; 4] = b"CRXS";
const FORMAT_VERSION: u16 = 1;

#[derive(Debug, thiserror::Error)]
pub enum RetrievalError {
    #[error("no usable rows to build a store from")]
    EmptyDataset,
    #[error("unknown task {0:?}")]
    UnknownTask(String),
    #[error("k must be at least 1")]
    ZeroK,
    #[error("store format: {0}")]
    Format(String),
    #[error("store was written with fingerprint hash version {found}, this build uses {expected}")]
    HashVersion { found: u32, expected: u32 },
    #[error(transparent)]
    Fingerprint(#[from] crate::descriptors::DescriptorError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// One labelled molecule offered to the store builder.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledMolecule {
    pub smiles: String,
    pub label: bool,
    pub task: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExampleRecord {
    pub ordinal: u32,
    pub smiles: String,
    pub label: bool,
    pub task: String,
    pub fingerprint: Fingerprint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoreParams {
    pub radius: u32,
    pub width: usize,
    pub hash_version: u32,
}

impl Default for StoreParams {
    fn default() -> Self {
        StoreParams {
            radius: crate::descriptors::DEFAULT_RADIUS,
            width: crate::descriptors::DEFAULT_WIDTH,
            hash_version: HASH_VERSION,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExampleStore {
    params: StoreParams,
    records: Vec<ExampleRecord>,
    task_index: BTreeMap<String, Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BuildReport {
    pub stored: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Neighbor<'a> {
    pub record: &'a ExampleRecord,
    pub similarity: f64,
}

/// Fingerprint every parseable row, in input order. Unparseable rows are
/// skipped and counted.
pub fn build_store(
    rows: &[LabeledMolecule],
    radius: u32,
    width: usize,
) -> Result<(ExampleStore, BuildReport), RetrievalError> {
    let mut records = Vec::with_capacity(rows.len());
    let mut skipped = 0;
    for row in rows {
        let graph = match parse_smiles(&row.smiles) {
            Ok(g) => g,
            Err(e) => {
                log::warn!("skipping {:?}: {e}", row.smiles);
                skipped += 1;
                continue;
            }
        };
        records.push(ExampleRecord {
            ordinal: records.len() as u32,
            smiles: row.smiles.clone(),
            label: row.label,
            task: row.task.clone(),
            fingerprint: morgan_fingerprint(&graph, radius, width)?,
        });
    }
    if records.is_empty() {
        return Err(RetrievalError::EmptyDataset);
    }
    if skipped > 0 {
        log::info!("store build skipped {skipped} unparseable rows");
    }
    let params = StoreParams {
        radius,
        width,
        hash_version: HASH_VERSION,
    };
    let store = ExampleStore::from_records(params, records);
    let report = BuildReport {
        stored: store.records.len(),
        skipped,
    };
    Ok((store, report))
}

impl ExampleStore {
    fn from_records(params: StoreParams, records: Vec<ExampleRecord>) -> ExampleStore {
        let mut task_index: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, r) in records.iter().enumerate() {
            task_index.entry(r.task.clone()).or_default().push(i);
        }
        ExampleStore {
            params,
            records,
            task_index,
        }
    }

    pub fn params(&self) -> StoreParams {
        self.params
    }

    pub fn records(&self) -> &[ExampleRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn tasks(&self) -> impl Iterator<Item = &str> {
        self.task_index.keys().map(String::as_str)
    }

    pub fn task_records(&self, task: &str) -> Result<impl Iterator<Item = &ExampleRecord>, RetrievalError> {
        let idx = self
            .task_index
            .get(task)
            .ok_or_else(|| RetrievalError::UnknownTask(task.to_string()))?;
        Ok(idx.iter().map(|&i| &self.records[i]))
    }

    /// The `k` most similar records of `task`, by descending Tanimoto and then
    /// ascending ordinal. Records whose molecule is isomorphic to the query
    /// are left out.
    pub fn top_k(&self, query: &MoleculeGraph, k: usize, task: &str) -> Result<Vec<Neighbor<'_>>, RetrievalError> {
        if k == 0 {
            return Err(RetrievalError::ZeroK);
        }
        let qfp = morgan_fingerprint(query, self.params.radius, self.params.width)?;
        let query_norm = aromatize(query);
        let mut scored = Vec::new();
        for record in self.task_records(task)? {
            // isomorphic molecules always share a fingerprint, so only equal
            // fingerprints need the graph check
            if record.fingerprint == qfp && self.is_same_molecule(record, &query_norm) {
                continue;
            }
            let similarity = tanimoto(&qfp, &record.fingerprint)?;
            scored.push(Neighbor { record, similarity });
        }
        scored.sort_by(|a, b| {
            b.similarity
                .total_cmp(&a.similarity)
                .then(a.record.ordinal.cmp(&b.record.ordinal))
        });
        scored.truncate(k);
        Ok(scored)
    }

    fn is_same_molecule(&self, record: &ExampleRecord, query: &MoleculeGraph) -> bool {
        match parse_smiles(&record.smiles) {
            Ok(g) => is_isomorphic(&aromatize(&g), query),
            Err(_) => false,
        }
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<(), RetrievalError> {
        w.write_all(MAGIC)?;
        w.write_u16::<LittleEndian>(FORMAT_VERSION)?;
        w.write_u32::<LittleEndian>(self.params.hash_version)?;
        w.write_u32::<LittleEndian>(self.params.radius)?;
        w.write_u32::<LittleEndian>(self.params.width as u32)?;
        w.write_u32::<LittleEndian>(self.records.len() as u32)?;
        for r in &self.records {
            w.write_u32::<LittleEndian>(r.ordinal)?;
            w.write_u8(r.label as u8)?;
            w.write_u16::<LittleEndian>(r.task.len() as u16)?;
            w.write_all(r.task.as_bytes())?;
            w.write_u32::<LittleEndian>(r.smiles.len() as u32)?;
            w.write_all(r.smiles.as_bytes())?;
            for &word in r.fingerprint.words() {
                w.write_u64::<LittleEndian>(word)?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<ExampleStore, RetrievalError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(RetrievalError::Format("bad magic".into()));
        }
        let version = r.read_u16::<LittleEndian>()?;
        if version != FORMAT_VERSION {
            return Err(RetrievalError::Format(format!("unsupported format version {version}")));
        }
        let hash_version = r.read_u32::<LittleEndian>()?;
        if hash_version != HASH_VERSION {
            return Err(RetrievalError::HashVersion {
                found: hash_version,
                expected: HASH_VERSION,
            });
        }
        let radius = r.read_u32::<LittleEndian>()?;
        let width = r.read_u32::<LittleEndian>()? as usize;
        let count = r.read_u32::<LittleEndian>()? as usize;
        let words = width / 64;
        let mut records = Vec::with_capacity(count.min(1 << 20));
        for _ in 0..count {
            let ordinal = r.read_u32::<LittleEndian>()?;
            let label = match r.read_u8()? {
                0 => false,
                1 => true,
                b => return Err(RetrievalError::Format(format!("bad label byte {b}"))),
            };
            let task = read_string(r, r_len16)?;
            let smiles = read_string(r, r_len32)?;
            let mut ws = Vec::with_capacity(words);
            for _ in 0..words {
                ws.push(r.read_u64::<LittleEndian>()?);
            }
            records.push(ExampleRecord {
                ordinal,
                smiles,
                label,
                task,
                fingerprint: Fingerprint::from_words(width, radius, ws)?,
            });
        }
        let params = StoreParams {
            radius,
            width,
            hash_version,
        };
        Ok(ExampleStore::from_records(params, records))
    }

    pub fn save(&self, path: &Path) -> Result<(), RetrievalError> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<ExampleStore, RetrievalError> {
        ExampleStore::read_from(&mut BufReader::new(File::open(path)?))
    }
}

fn r_len16<R: Read>(r: &mut R) -> io::Result<usize> {
    r.read_u16::<LittleEndian>().map(usize::from)
}

fn r_len32<R: Read>(r: &mut R) -> io::Result<usize> {
    r.read_u32::<LittleEndian>().map(|v| v as usize)
}

fn read_string<R: Read>(r: &mut R, len: fn(&mut R) -> io::Result<usize>) -> Result<String, RetrievalError> {
    let n = len(r)?;
    let mut buf = vec![0u8; n];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|_| RetrievalError::Format("string is not UTF-8".into()))
}
