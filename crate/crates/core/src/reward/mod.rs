//! Rule-based reward: answer and format checks, reasoning checks, and
//! chemistry checks against computed properties, combined with three weights.

mod config;
mod parse;
pub mod text;

pub use config::{Claim, CmpOp, ConfigError, Field, Predicate, RewardConfig, CONFIG_VERSION};
pub use parse::{parse_answer, parse_response, ParsedResponse};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::descriptors::{descriptor_report_with, CrippenTable, DescriptorReport};
use crate::molgraph::{parse_smiles, SmilesError};
use crate::patterns::{builtin_library, extract_features, FeatureSet, Library};
use crate::scalar::Scalar;

use text::{sentences, tokenize, Phrase};

/// Stabiliser in the structure-coverage denominator.
pub const STRUCT_EPSILON: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RewardWeights<T> {
    pub lambda1: T,
    pub lambda2: T,
    pub lambda3: T,
}

impl<T: Scalar> Default for RewardWeights<T> {
    fn default() -> Self {
        RewardWeights {
            lambda1: T::lit(1.0),
            lambda2: T::lit(0.25),
            lambda3: T::lit(0.25),
        }
    }
}

impl<T: Scalar> RewardWeights<T> {
    pub fn validate(&self) -> Result<(), RewardError> {
        for (name, v) in [("lambda1", self.lambda1), ("lambda2", self.lambda2), ("lambda3", self.lambda3)] {
            if !v.is_finite() || v < T::zero() {
                return Err(RewardError::Weights(format!("{name} = {v} is not finite and non-negative")));
            }
        }
        Ok(())
    }

    /// Upper bound on the total when every component is 1.
    pub fn max_total(&self) -> T {
        T::lit(2.0) * (self.lambda1 + self.lambda2 + self.lambda3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RewardBreakdown<T> {
    pub r_ans: T,
    pub r_fmt: T,
    pub r_cons: T,
    pub r_comp: T,
    pub r_prin: T,
    pub r_struct: T,
    pub r_total: T,
}

/// λ1(r_ans + r_fmt) + λ2(r_cons + r_comp) + λ3(r_prin + r_struct), in
/// exactly this evaluation order.
pub fn combine<T: Scalar>(w: &RewardWeights<T>, c: [T; 6]) -> T {
    w.lambda1 * (c[0] + c[1]) + w.lambda2 * (c[2] + c[3]) + w.lambda3 * (c[4] + c[5])
}

impl<T: Scalar> RewardBreakdown<T> {
    pub fn from_components(w: &RewardWeights<T>, c: [T; 6]) -> RewardBreakdown<T> {
        RewardBreakdown {
            r_ans: c[0],
            r_fmt: c[1],
            r_cons: c[2],
            r_comp: c[3],
            r_prin: c[4],
            r_struct: c[5],
            r_total: combine(w, c),
        }
    }

    pub fn components(&self) -> [T; 6] {
        [self.r_ans, self.r_fmt, self.r_cons, self.r_comp, self.r_prin, self.r_struct]
    }

    pub fn recompute_total(&self, w: &RewardWeights<T>) -> T {
        combine(w, self.components())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RewardError {
    #[error("molecule does not parse: {0}")]
    Molecule(#[from] SmilesError),
    #[error("weights: {0}")]
    Weights(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RewardRequest<T> {
    pub molecule: String,
    pub label: bool,
    pub response_text: String,
    pub fewshot: Vec<(String, bool)>,
    pub weights: RewardWeights<T>,
}

fn indicator<T: Scalar>(b: bool) -> T {
    if b {
        T::one()
    } else {
        T::zero()
    }
}

fn ratio<T: Scalar>(num: usize, den: usize) -> T {
    T::from_usize(num).expect("count fits") / T::from_usize(den).expect("count fits")
}

pub fn answer_reward<T: Scalar>(parsed: &ParsedResponse, label: bool) -> T {
    indicator(parsed.answer == Some(label))
}

pub fn format_reward<T: Scalar>(text: &str) -> T {
    indicator(parse_response(text).format_ok)
}

/// Counts lexicon hits in the conclusion window, longest phrase first and
/// without overlap. Returns (affirmative, negative).
pub fn polarity_counts<T: Scalar>(think: &str, config: &RewardConfig<T>) -> (usize, usize) {
    let s = sentences(think);
    let window = &s[s.len().saturating_sub(config.conclusion_sentences)..];
    let tokens = tokenize(&window.join(" "));
    let (mut aff, mut neg) = (0, 0);
    let mut i = 0;
    while i < tokens.len() {
        let best = config
            .affirmative
            .iter()
            .map(|p| (p, true))
            .chain(config.negative.iter().map(|p| (p, false)))
            .filter(|(p, _)| p.matches_at(&tokens, i))
            .max_by_key(|(p, positive)| (p.len(), !positive));
        match best {
            Some((p, positive)) => {
                if positive {
                    aff += 1;
                } else {
                    neg += 1;
                }
                i += p.len();
            }
            None => i += 1,
        }
    }
    (aff, neg)
}

/// 1 when the conclusion's dominant polarity agrees with the answer. The
/// conclusion reads affirmative only with strictly more affirmative hits;
/// no hits at all scores 0.
pub fn consistency_reward<T: Scalar>(think: &str, answer: Option<bool>, config: &RewardConfig<T>) -> T {
    let Some(answer) = answer else {
        return T::zero();
    };
    let (aff, neg) = polarity_counts(think, config);
    if aff + neg == 0 {
        return T::zero();
    }
    indicator((aff > neg) == answer)
}

fn quotes_smiles(think: &str, smiles: &str, min: usize) -> bool {
    if min == 0 || smiles.len() < min {
        return false;
    }
    (0..=smiles.len() - min)
        .filter(|&i| smiles.is_char_boundary(i) && smiles.is_char_boundary(i + min))
        .any(|i| think.contains(&smiles[i..i + min]))
}

/// 1 when the reasoning quotes a few-shot SMILES fragment, or names an
/// example alongside a label word.
pub fn comparative_reward<T: Scalar>(think: &str, fewshot: &[(String, bool)], config: &RewardConfig<T>) -> T {
    if fewshot.is_empty() {
        return T::zero();
    }
    if fewshot.iter().any(|(s, _)| quotes_smiles(think, s, config.substring_min)) {
        return T::one();
    }
    let tokens = tokenize(think);
    let any = |ps: &[Phrase]| ps.iter().any(|p| p.occurs_in(&tokens));
    indicator(any(&config.example_phrases) && any(&config.label_words))
}

/// Claims found in the reasoning, each with the polarity it was stated in
/// (false when negated) and whether the descriptors bear it out.
pub fn extract_claims<'c, T: Scalar>(
    think: &str,
    report: &DescriptorReport,
    config: &'c RewardConfig<T>,
) -> Vec<(&'c Claim, bool, bool)> {
    let sents: Vec<Vec<String>> = sentences(think).into_iter().map(tokenize).collect();
    let mut out = Vec::new();
    for claim in &config.claims {
        let hit = sents.iter().find_map(|toks| {
            claim
                .triggers
                .iter()
                .filter_map(|t| t.first_match(toks))
                .min()
                .map(|pos| (toks, pos))
        });
        let Some((toks, pos)) = hit else {
            continue;
        };
        let from = pos.saturating_sub(config.negation_window);
        let negated = (from..pos).any(|i| {
            config
                .negation_cues
                .iter()
                .any(|c| c.matches_at(toks, i) && i + c.len() <= pos)
        });
        let asserted = !negated;
        out.push((claim, asserted, claim.predicate.holds(report) == asserted));
    }
    out
}

/// Verified claims over extracted claims; 0 when nothing is claimed.
pub fn principle_reward<T: Scalar>(think: &str, report: &DescriptorReport, config: &RewardConfig<T>) -> T {
    let claims = extract_claims(think, report, config);
    if claims.is_empty() {
        return T::zero();
    }
    ratio(claims.iter().filter(|c| c.2).count(), claims.len())
}

/// |S_actual ∩ S_pred| / (|S_actual| + 1e-5).
pub fn structure_score<T: Scalar>(actual: &BTreeSet<String>, predicted: &BTreeSet<String>) -> T {
    let hit = actual.intersection(predicted).count();
    T::from_usize(hit).expect("count fits") / (T::from_usize(actual.len()).expect("count fits") + T::lit(STRUCT_EPSILON))
}

/// Feature names whose synonyms occur in the reasoning, limited to `universe`.
pub fn mentioned_features<T: Scalar>(
    think: &str,
    universe: &BTreeSet<String>,
    config: &RewardConfig<T>,
) -> BTreeSet<String> {
    let tokens = tokenize(think);
    config
        .synonyms
        .iter()
        .filter(|(name, ps)| universe.contains(*name) && ps.iter().any(|p| p.occurs_in(&tokens)))
        .map(|(name, _)| name.clone())
        .collect()
}

pub fn structure_reward<T: Scalar>(
    think: &str,
    s_actual: &FeatureSet,
    universe: &BTreeSet<String>,
    config: &RewardConfig<T>,
) -> T {
    let actual: BTreeSet<String> = s_actual.names().map(str::to_string).collect();
    structure_score(&actual, &mentioned_features(think, universe, config))
}

/// Loaded configuration and chemistry tables; immutable and shareable
/// across threads.
#[derive(Debug, Clone)]
pub struct RewardEngine<T: Scalar> {
    config: RewardConfig<T>,
    library: Library,
    universe: BTreeSet<String>,
    table: CrippenTable,
}

impl<T: Scalar> RewardEngine<T> {
    pub fn new(config: RewardConfig<T>, library: Library, table: CrippenTable) -> RewardEngine<T> {
        let universe = library.feature_names();
        RewardEngine {
            config,
            library,
            universe,
            table,
        }
    }

    pub fn builtin() -> RewardEngine<T> {
        RewardEngine::new(RewardConfig::builtin(), builtin_library(), CrippenTable::builtin().clone())
    }

    pub fn config(&self) -> &RewardConfig<T> {
        &self.config
    }

    pub fn library(&self) -> &Library {
        &self.library
    }

    pub fn table(&self) -> &CrippenTable {
        &self.table
    }

    /// Request carrying the configured default weights.
    pub fn request(&self, molecule: &str, label: bool, response_text: &str, fewshot: Vec<(String, bool)>) -> RewardRequest<T> {
        RewardRequest {
            molecule: molecule.to_string(),
            label,
            response_text: response_text.to_string(),
            fewshot,
            weights: self.config.weights,
        }
    }

    /// Breakdown plus the parsed response it was computed from.
    pub fn evaluate_detailed(&self, req: &RewardRequest<T>) -> Result<(RewardBreakdown<T>, ParsedResponse), RewardError> {
        req.weights.validate()?;
        let graph = parse_smiles(&req.molecule)?;
        let parsed = parse_response(&req.response_text);
        let features = extract_features(&graph, &self.library);
        let report = descriptor_report_with(&graph, &self.table);
        let c = &self.config;
        let components = [
            answer_reward(&parsed, req.label),
            indicator(parsed.format_ok),
            consistency_reward(&parsed.think, parsed.answer, c),
            comparative_reward(&parsed.think, &req.fewshot, c),
            principle_reward(&parsed.think, &report, c),
            structure_reward(&parsed.think, &features, &self.universe, c),
        ];
        Ok((RewardBreakdown::from_components(&req.weights, components), parsed))
    }

    pub fn evaluate(&self, req: &RewardRequest<T>) -> Result<RewardBreakdown<T>, RewardError> {
        self.evaluate_detailed(req).map(|(b, _)| b)
    }
}

pub fn total_reward<T: Scalar>(req: &RewardRequest<T>, engine: &RewardEngine<T>) -> Result<RewardBreakdown<T>, RewardError> {
    engine.evaluate(req)
}
