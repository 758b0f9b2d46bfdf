//! ROC-AUC, score conversion and table aggregation.

mod audit;

pub use audit::{
    audit_tables, builtin_fixtures, load_fixture_dir, AuditEntry, AuditStatus, AuditReport, CrossCheck, FixtureError, PublishedTable,
};

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::dataset::parse_label;
use crate::reward::parse_answer;
use crate::scalar::Scalar;

/// Score given to a missing answer.
pub const ABSENT_SCORE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ScoredPrediction<T> {
    pub id: String,
    pub score: T,
    pub label: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricError {
    #[error("AUC undefined: {positives} positives, {negatives} negatives")]
    SingleClass { positives: usize, negatives: usize },
    #[error("prediction '{0}' has a non-finite score")]
    NonFinite(String),
    #[error("predictions line {line}: {message}")]
    Input { line: usize, message: String },
}

/// Exact Mann-Whitney AUC: (2·wins + ties) / (2·P·N).
///
/// Sorting groups tied scores, so the count is exact for any input size.
pub fn roc_auc_exact<T: Scalar>(preds: &[ScoredPrediction<T>]) -> Result<Ratio<u128>, MetricError> {
    if let Some(p) = preds.iter().find(|p| !p.score.is_finite()) {
        return Err(MetricError::NonFinite(p.id.clone()));
    }
    let positives = preds.iter().filter(|p| p.label).count();
    let negatives = preds.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(MetricError::SingleClass { positives, negatives });
    }
    let mut sorted: Vec<(T, bool)> = preds.iter().map(|p| (p.score, p.label)).collect();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
    let (mut half_units, mut neg_below) = (0u128, 0u128);
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        let (mut pos, mut neg) = (0u128, 0u128);
        while j < sorted.len() && sorted[j].0 == sorted[i].0 {
            if sorted[j].1 {
                pos += 1;
            } else {
                neg += 1;
            }
            j += 1;
        }
        half_units += 2 * pos * neg_below + pos * neg;
        neg_below += neg;
        i = j;
    }
    Ok(Ratio::new(half_units, 2 * positives as u128 * negatives as u128))
}

pub fn ratio_value<T: Scalar>(r: &Ratio<u128>) -> T {
    T::from_u128(*r.numer()).expect("fits") / T::from_u128(*r.denom()).expect("fits")
}

pub fn roc_auc<T: Scalar>(preds: &[ScoredPrediction<T>]) -> Result<T, MetricError> {
    roc_auc_exact(preds).map(|r| ratio_value(&r))
}

/// One answer maps to 1 / 0 / `absent`; several samples map to the
/// fraction answering True; no samples at all maps to `absent`.
pub fn sample_score<T: Scalar>(samples: &[Option<bool>], absent: T) -> T {
    match samples {
        [] => absent,
        [one] => match one {
            Some(true) => T::one(),
            Some(false) => T::zero(),
            None => absent,
        },
        many => {
            let yes = many.iter().filter(|a| **a == Some(true)).count();
            T::from_usize(yes).expect("fits") / T::from_usize(many.len()).expect("fits")
        }
    }
}

/// Pairs each (id, label) with the score of its sampled answers.
pub fn binary_scores<T: Scalar>(items: &[(String, bool)], answers: &[Vec<Option<bool>>], absent: T) -> Vec<ScoredPrediction<T>> {
    items
        .iter()
        .zip(answers)
        .map(|((id, label), samples)| ScoredPrediction {
            id: id.clone(),
            score: sample_score(samples, absent),
            label: *label,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MetricsTable<T> {
    pub values: BTreeMap<String, Option<T>>,
    pub averages: BTreeMap<String, Option<T>>,
    /// Group members with no value, per group.
    pub missing: BTreeMap<String, Vec<String>>,
}

/// Mean over the present values of each group. Values are summed in name
/// order so the result does not depend on listing order.
pub fn aggregate<T: Scalar>(values: &BTreeMap<String, Option<T>>, groups: &[(String, Vec<String>)]) -> MetricsTable<T> {
    let mut averages = BTreeMap::new();
    let mut missing = BTreeMap::new();
    for (group, members) in groups {
        let members: BTreeSet<&String> = members.iter().collect();
        let present: Vec<T> = members.iter().filter_map(|m| values.get(*m).copied().flatten()).collect();
        let absent: Vec<String> = members
            .iter()
            .filter(|m| values.get(**m).copied().flatten().is_none())
            .map(|m| m.to_string())
            .collect();
        let avg = (!present.is_empty()).then(|| {
            present.iter().fold(T::zero(), |a, &x| a + x) / T::from_usize(present.len()).expect("fits")
        });
        averages.insert(group.clone(), avg);
        if !absent.is_empty() {
            missing.insert(group.clone(), absent);
        }
    }
    MetricsTable {
        values: values.clone(),
        averages,
        missing,
    }
}

/// Reads `id,score,label` or `id,answer,label` CSV. Answers go through
/// the response-answer parser; anything else scores `absent`.
pub fn read_predictions<T: Scalar, R: Read>(r: R, absent: T) -> Result<Vec<ScoredPrediction<T>>, MetricError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let err = |line: usize, message: String| MetricError::Input { line, message };
    let headers = rdr.headers().map_err(|e| err(1, e.to_string()))?.clone();
    let col = |n: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(n));
    let id = col("id").ok_or_else(|| err(1, "missing 'id' column".into()))?;
    let label = col("label").ok_or_else(|| err(1, "missing 'label' column".into()))?;
    let (score, answer) = (col("score"), col("answer"));
    if score.is_none() && answer.is_none() {
        return Err(err(1, "need a 'score' or 'answer' column".into()));
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| err(line, e.to_string()))?;
        let get = |c: usize| rec.get(c).unwrap_or("");
        let lab = parse_label(get(label)).ok_or_else(|| err(line, format!("bad label '{}'", get(label))))?;
        let s = match score {
            Some(c) => {
                let v: f64 = get(c).parse().map_err(|_| err(line, format!("bad score '{}'", get(c))))?;
                T::lit(v)
            }
            None => sample_score(&[parse_answer(get(answer.unwrap()))], absent),
        };
        out.push(ScoredPrediction {
            id: get(id).to_string(),
            score: s,
            label: lab,
        });
    }
    Ok(out)
}
