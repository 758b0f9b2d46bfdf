use std::collections::BTreeMap;
use std::fmt::{self, Write};
use std::path::Path;

use crate::descriptors::{lipinski_report, DescriptorReport};
use crate::scalar::Scalar;

use super::text::Phrase;
use super::RewardWeights;

const BUILTIN: &str = include_str!("../../data/reward.conf");
pub const CONFIG_VERSION: u32 = 1;
const INCOMPLETE: &str = "shipped reward config is incomplete";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("reward config line {line}: {message}")]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    LogP,
    MolWeight,
    Hbd,
    Hba,
    AromaticRings,
    AliphaticRings,
    Stereocenters,
    HeavyAtoms,
}

impl Field {
    const ALL: [(Field, &'static str); 8] = [
        (Field::LogP, "logp"),
        (Field::MolWeight, "mol_weight"),
        (Field::Hbd, "hbd"),
        (Field::Hba, "hba"),
        (Field::AromaticRings, "aromatic_rings"),
        (Field::AliphaticRings, "aliphatic_rings"),
        (Field::Stereocenters, "stereocenters"),
        (Field::HeavyAtoms, "heavy_atoms"),
    ];

    fn name(self) -> &'static str {
        Field::ALL.iter().find(|(f, _)| *f == self).unwrap().1
    }

    fn value(self, r: &DescriptorReport) -> f64 {
        match self {
            Field::LogP => r.logp,
            Field::MolWeight => r.mol_weight,
            Field::Hbd => r.hbd as f64,
            Field::Hba => r.hba as f64,
            Field::AromaticRings => r.aromatic_rings as f64,
            Field::AliphaticRings => r.aliphatic_rings as f64,
            Field::Stereocenters => r.stereocenters as f64,
            Field::HeavyAtoms => r.heavy_atoms as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Ge,
    Le,
    Gt,
    Lt,
}

impl CmpOp {
    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Ge => ">=",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Lt => "<",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Predicate {
    Compare { field: Field, op: CmpOp, value: f64 },
    /// Holds when the molecule passes all four rule-of-five checks.
    Lipinski,
}

impl Predicate {
    pub fn holds(&self, r: &DescriptorReport) -> bool {
        match *self {
            Predicate::Compare { field, op, value } => {
                let x = field.value(r);
                match op {
                    CmpOp::Ge => x >= value,
                    CmpOp::Le => x <= value,
                    CmpOp::Gt => x > value,
                    CmpOp::Lt => x < value,
                }
            }
            Predicate::Lipinski => lipinski_report(r).pass,
        }
    }

    fn parse(s: &str) -> Result<Predicate, String> {
        let s = s.trim();
        if s == "lipinski" {
            return Ok(Predicate::Lipinski);
        }
        let parts: Vec<&str> = s.split_whitespace().collect();
        let [field, op, value] = parts.as_slice() else {
            return Err(format!("predicate '{s}' is not '<field> <op> <number>'"));
        };
        let field = Field::ALL
            .iter()
            .find(|(_, n)| n == field)
            .map(|(f, _)| *f)
            .ok_or_else(|| format!("unknown descriptor field '{field}'"))?;
        let op = [CmpOp::Ge, CmpOp::Le, CmpOp::Gt, CmpOp::Lt]
            .into_iter()
            .find(|o| o.symbol() == *op)
            .ok_or_else(|| format!("unknown comparison '{op}'"))?;
        let value: f64 = value.parse().map_err(|_| format!("bad threshold '{value}'"))?;
        if !value.is_finite() {
            return Err(format!("bad threshold '{value}'"));
        }
        Ok(Predicate::Compare { field, op, value })
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::Compare { field, op, value } => write!(f, "{} {} {}", field.name(), op.symbol(), value),
            Predicate::Lipinski => f.write_str("lipinski"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Claim {
    pub name: String,
    pub triggers: Vec<Phrase>,
    pub predicate: Predicate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RewardConfig<T: Scalar> {
    pub weights: RewardWeights<T>,
    pub conclusion_sentences: usize,
    pub affirmative: Vec<Phrase>,
    pub negative: Vec<Phrase>,
    pub substring_min: usize,
    pub example_phrases: Vec<Phrase>,
    pub label_words: Vec<Phrase>,
    pub negation_window: usize,
    pub negation_cues: Vec<Phrase>,
    pub claims: Vec<Claim>,
    pub synonyms: BTreeMap<String, Vec<Phrase>>,
}

fn phrase_list(v: &str) -> Vec<Phrase> {
    v.split(',').filter_map(Phrase::new).collect()
}

fn join(ps: &[Phrase]) -> String {
    ps.iter().map(|p| p.text.as_str()).collect::<Vec<_>>().join(", ")
}

#[derive(Default)]
struct Partial<T> {
    lambda: [Option<T>; 3],
    conclusion_sentences: Option<usize>,
    affirmative: Option<Vec<Phrase>>,
    negative: Option<Vec<Phrase>>,
    substring_min: Option<usize>,
    example_phrases: Option<Vec<Phrase>>,
    label_words: Option<Vec<Phrase>>,
    negation_window: Option<usize>,
    negation_cues: Option<Vec<Phrase>>,
    claims: Vec<Claim>,
    synonyms: BTreeMap<String, Vec<Phrase>>,
}

fn parse_partial<T: Scalar>(text: &str) -> Result<Partial<T>, ConfigError> {
    let mut p = Partial::<T>::default();
    let mut seen = std::collections::HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| ConfigError { line, message };
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let (key, value) = l
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| err(format!("expected 'key = value', got '{l}'")))?;
        if !seen.insert(key.to_string()) {
            return Err(err(format!("duplicate key '{key}'")));
        }
        let count = |v: &str| v.parse::<usize>().map_err(|_| err(format!("'{key}' needs a count, got '{v}'")));
        match key {
            "version" => {
                if value != CONFIG_VERSION.to_string() {
                    return Err(err(format!("unsupported config version {value}")));
                }
            }
            "lambda1" | "lambda2" | "lambda3" => {
                let x: f64 = value.parse().map_err(|_| err(format!("bad weight '{value}'")))?;
                if !x.is_finite() || x < 0.0 {
                    return Err(err(format!("{key} must be finite and non-negative")));
                }
                let idx = key.as_bytes()[6] - b'1';
                p.lambda[idx as usize] = Some(T::lit(x));
            }
            "conclusion_sentences" => p.conclusion_sentences = Some(count(value)?),
            "substring_min" => p.substring_min = Some(count(value)?),
            "negation_window" => p.negation_window = Some(count(value)?),
            "affirmative" => p.affirmative = Some(phrase_list(value)),
            "negative" => p.negative = Some(phrase_list(value)),
            "example_phrases" => p.example_phrases = Some(phrase_list(value)),
            "label_words" => p.label_words = Some(phrase_list(value)),
            "negation_cues" => p.negation_cues = Some(phrase_list(value)),
            _ => {
                if let Some(name) = key.strip_prefix("claim.") {
                    let (triggers, pred) = value
                        .split_once("=>")
                        .ok_or_else(|| err("claim needs 'triggers => predicate'".into()))?;
                    let triggers = phrase_list(triggers);
                    if triggers.is_empty() {
                        return Err(err(format!("claim '{name}' has no triggers")));
                    }
                    p.claims.push(Claim {
                        name: name.to_string(),
                        triggers,
                        predicate: Predicate::parse(pred).map_err(err)?,
                    });
                } else if let Some(name) = key.strip_prefix("synonym.") {
                    p.synonyms.insert(name.to_string(), phrase_list(value));
                } else {
                    return Err(err(format!("unknown key '{key}'")));
                }
            }
        }
    }
    Ok(p)
}

impl<T: Scalar> RewardConfig<T> {
    /// The shipped defaults.
    pub fn builtin() -> RewardConfig<T> {
        let p = parse_partial::<T>(BUILTIN).expect("shipped reward config parses");
        RewardConfig {
            weights: RewardWeights {
                lambda1: p.lambda[0].expect(INCOMPLETE),
                lambda2: p.lambda[1].expect(INCOMPLETE),
                lambda3: p.lambda[2].expect(INCOMPLETE),
            },
            conclusion_sentences: p.conclusion_sentences.expect(INCOMPLETE),
            affirmative: p.affirmative.expect(INCOMPLETE),
            negative: p.negative.expect(INCOMPLETE),
            substring_min: p.substring_min.expect(INCOMPLETE),
            example_phrases: p.example_phrases.expect(INCOMPLETE),
            label_words: p.label_words.expect(INCOMPLETE),
            negation_window: p.negation_window.expect(INCOMPLETE),
            negation_cues: p.negation_cues.expect(INCOMPLETE),
            claims: p.claims,
            synonyms: p.synonyms,
        }
    }

    /// Overlays `text` on the shipped defaults. A `claim.` or `synonym.`
    /// key replaces the entry of the same name or adds a new one.
    pub fn parse(text: &str) -> Result<RewardConfig<T>, ConfigError> {
        let p = parse_partial::<T>(text)?;
        let mut c = RewardConfig::builtin();
        let [l1, l2, l3] = p.lambda;
        c.weights.lambda1 = l1.unwrap_or(c.weights.lambda1);
        c.weights.lambda2 = l2.unwrap_or(c.weights.lambda2);
        c.weights.lambda3 = l3.unwrap_or(c.weights.lambda3);
        macro_rules! take {
            ($($f:ident),*) => {$( if let Some(v) = p.$f { c.$f = v; } )*};
        }
        take!(
            conclusion_sentences,
            affirmative,
            negative,
            substring_min,
            example_phrases,
            label_words,
            negation_window,
            negation_cues
        );
        for claim in p.claims {
            match c.claims.iter_mut().find(|x| x.name == claim.name) {
                Some(slot) => *slot = claim,
                None => c.claims.push(claim),
            }
        }
        c.synonyms.extend(p.synonyms);
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<RewardConfig<T>, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            line: 0,
            message: format!("{}: {e}", path.display()),
        })?;
        RewardConfig::parse(&text)
    }

    /// Complete config in the file format; parsing the dump reproduces it.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "version = {CONFIG_VERSION}");
        let _ = writeln!(s, "lambda1 = {}", self.weights.lambda1);
        let _ = writeln!(s, "lambda2 = {}", self.weights.lambda2);
        let _ = writeln!(s, "lambda3 = {}", self.weights.lambda3);
        let _ = writeln!(s, "conclusion_sentences = {}", self.conclusion_sentences);
        let _ = writeln!(s, "affirmative = {}", join(&self.affirmative));
        let _ = writeln!(s, "negative = {}", join(&self.negative));
        let _ = writeln!(s, "substring_min = {}", self.substring_min);
        let _ = writeln!(s, "example_phrases = {}", join(&self.example_phrases));
        let _ = writeln!(s, "label_words = {}", join(&self.label_words));
        let _ = writeln!(s, "negation_window = {}", self.negation_window);
        let _ = writeln!(s, "negation_cues = {}", join(&self.negation_cues));
        for c in &self.claims {
            let _ = writeln!(s, "claim.{} = {} => {}", c.name, join(&c.triggers), c.predicate);
        }
        for (name, ps) in &self.synonyms {
            let _ = writeln!(s, "synonym.{name} = {}", join(ps));
        }
        s
    }
}

impl<T: Scalar> Default for RewardConfig<T> {
    fn default() -> Self {
        RewardConfig::builtin()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_defaults() {
        let c = RewardConfig::<f64>::builtin();
        assert_eq!(
            (c.weights.lambda1, c.weights.lambda2, c.weights.lambda3),
            (1.0, 0.25, 0.25)
        );
        assert_eq!(c.conclusion_sentences, 3);
        assert_eq!(c.substring_min, 8);
        assert_eq!(c.claims.len(), 8);
        let names = crate::patterns::builtin_library().feature_names();
        assert_eq!(c.synonyms.keys().cloned().collect::<std::collections::BTreeSet<_>>(), names);
    }

    #[test]
    fn dump_round_trips() {
        let c = RewardConfig::<f64>::builtin();
        assert_eq!(RewardConfig::<f64>::parse(&c.dump()).unwrap(), c);
        let c32 = RewardConfig::<f32>::builtin();
        assert_eq!(RewardConfig::<f32>::parse(&c32.dump()).unwrap(), c32);
    }

    #[test]
    fn overlay_and_errors() {
        let c = RewardConfig::<f64>::parse("lambda2 = 0.5\nclaim.hydrophobic = greasy => logp > 3\n").unwrap();
        assert_eq!(c.weights.lambda2, 0.5);
        assert_eq!(c.claims.len(), 8);
        assert_eq!(c.claims[0].triggers[0].text, "greasy");
        let e = RewardConfig::<f64>::parse("\nlambda1 = -1\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(RewardConfig::<f64>::parse("colour = red").is_err());
        assert!(RewardConfig::<f64>::parse("claim.x = y => tpsa > 3").is_err());
        assert!(RewardConfig::<f64>::parse("lambda1 = 1\nlambda1 = 2").is_err());
        assert!(RewardConfig::<f64>::parse("version = 2").is_err());
    }
}
