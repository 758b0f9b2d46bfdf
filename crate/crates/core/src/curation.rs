//! Rejection sampling of teacher trajectories and SFT export.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::reward::parse_response;
use crate::{ENGINE_VERSION, PROTOCOL_VERSION};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TeacherTrajectory {
    pub prompt_id: String,
    pub teacher_id: String,
    pub response_text: String,
    pub label: bool,
    /// Prompt the teacher answered; carried through to the SFT record.
    #[serde(default)]
    pub prompt_text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SftRecord {
    #[serde(rename = "prompt")]
    pub prompt_text: String,
    #[serde(rename = "response")]
    pub response_text: String,
    pub prompt_id: String,
    pub teacher_id: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectionReport {
    pub accepted: usize,
    pub format: usize,
    pub wrong_answer: usize,
    /// Empty prompt or teacher id.
    pub invalid: usize,
}

impl RejectionReport {
    pub fn rejected(&self) -> usize {
        self.format + self.wrong_answer + self.invalid
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rejection {
    Invalid,
    Format,
    WrongAnswer,
}

/// Why a trajectory would be rejected, if it would.
pub fn rejection_reason(t: &TeacherTrajectory) -> Option<Rejection> {
    if t.prompt_id.is_empty() || t.teacher_id.is_empty() {
        return Some(Rejection::Invalid);
    }
    let p = parse_response(&t.response_text);
    if !p.format_ok {
        Some(Rejection::Format)
    } else if p.answer != Some(t.label) {
        Some(Rejection::WrongAnswer)
    } else {
        None
    }
}

/// Keeps well-formed trajectories whose answer matches the label.
pub fn rejection_filter(trajectories: Vec<TeacherTrajectory>) -> (Vec<TeacherTrajectory>, RejectionReport) {
    let mut report = RejectionReport::default();
    let mut accepted = Vec::new();
    for t in trajectories {
        match rejection_reason(&t) {
            None => {
                report.accepted += 1;
                accepted.push(t);
            }
            Some(Rejection::Invalid) => report.invalid += 1,
            Some(Rejection::Format) => report.format += 1,
            Some(Rejection::WrongAnswer) => report.wrong_answer += 1,
        }
    }
    (accepted, report)
}

/// One uniformly chosen trajectory per prompt id. Prompt ids are visited in
/// order of first appearance and share one seeded generator.
pub fn select_one_per_instance(accepted: &[TeacherTrajectory], seed: u64) -> Vec<SftRecord> {
    let mut order: Vec<&str> = Vec::new();
    let mut groups: HashMap<&str, Vec<&TeacherTrajectory>> = HashMap::new();
    for t in accepted {
        groups
            .entry(&t.prompt_id)
            .or_insert_with(|| {
                order.push(&t.prompt_id);
                Vec::new()
            })
            .push(t);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order
        .into_iter()
        .map(|id| {
            let g = &groups[id];
            let t = g[rng.gen_range(0..g.len())];
            SftRecord {
                prompt_text: t.prompt_text.clone(),
                response_text: t.response_text.clone(),
                prompt_id: t.prompt_id.clone(),
                teacher_id: t.teacher_id.clone(),
            }
        })
        .collect()
}

/// First line of an export file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportHeader {
    pub protocol_version: u32,
    pub engine_version: String,
    pub seed: u64,
    pub records: usize,
    pub report: RejectionReport,
}

impl ExportHeader {
    pub fn new(seed: u64, records: usize, report: RejectionReport) -> ExportHeader {
        ExportHeader {
            protocol_version: PROTOCOL_VERSION,
            engine_version: ENGINE_VERSION.to_string(),
            seed,
            records,
            report,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CurationError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

/// Header line, then one JSON record per line. Returns the record count,
/// which excludes the header.
pub fn write_sft<W: Write>(records: &[SftRecord], header: &ExportHeader, mut w: W) -> std::io::Result<usize> {
    serde_json::to_writer(&mut w, header)?;
    w.write_all(b"\n")?;
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(records.len())
}

pub fn export_sft(records: &[SftRecord], header: &ExportHeader, path: &Path) -> Result<usize, CurationError> {
    let io = |source| CurationError::Io {
        path: path.display().to_string(),
        source,
    };
    let f = File::create(path).map_err(io)?;
    write_sft(records, header, BufWriter::new(f)).map_err(io)
}

pub fn read_sft<R: BufRead>(r: R) -> Result<(ExportHeader, Vec<SftRecord>), CurationError> {
    let mut header = None;
    let mut records = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|source| CurationError::Io {
            path: "<reader>".into(),
            source,
        })?;
        let bad = |e: serde_json::Error| CurationError::Format {
            line: line_no,
            message: e.to_string(),
        };
        if i == 0 {
            header = Some(serde_json::from_str(&line).map_err(bad)?);
        } else if !line.trim().is_empty() {
            records.push(serde_json::from_str(&line).map_err(bad)?);
        }
    }
    let header = header.ok_or(CurationError::Format {
        line: 1,
        message: "missing header line".into(),
    })?;
    Ok((header, records))
}

pub fn import_sft(path: &Path) -> Result<(ExportHeader, Vec<SftRecord>), CurationError> {
    let f = File::open(path).map_err(|source| CurationError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_sft(BufReader::new(f))
}

/// Reads trajectories as JSON Lines; blank lines are skipped.
pub fn read_trajectories<R: BufRead>(r: R) -> Result<Vec<TeacherTrajectory>, CurationError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|source| CurationError::Io {
            path: "<reader>".into(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| CurationError::Format {
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}
