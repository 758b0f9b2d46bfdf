use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

const QUESTION_SLOT: &str = "<QUESTION>";
const RESPONSE_SLOT: &str = "<RESPONSE>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JudgeDimension {
    LogicalSoundness,
    AccuracyInsight,
    Conciseness,
}

impl JudgeDimension {
    pub const ALL: [JudgeDimension; 3] = [
        JudgeDimension::LogicalSoundness,
        JudgeDimension::AccuracyInsight,
        JudgeDimension::Conciseness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            JudgeDimension::LogicalSoundness => "logical_soundness",
            JudgeDimension::AccuracyInsight => "accuracy_insight",
            JudgeDimension::Conciseness => "conciseness",
        }
    }

    pub fn template(self) -> &'static str {
        match self {
            JudgeDimension::LogicalSoundness => include_str!("../../data/judge/logical_soundness.txt"),
            JudgeDimension::AccuracyInsight => include_str!("../../data/judge/accuracy_insight.txt"),
            JudgeDimension::Conciseness => include_str!("../../data/judge/conciseness.txt"),
        }
    }
}

impl fmt::Display for JudgeDimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown judge dimension '{0}'")]
pub struct UnknownDimension(pub String);

impl FromStr for JudgeDimension {
    type Err = UnknownDimension;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        JudgeDimension::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| UnknownDimension(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgePromptSpec {
    pub dimension: JudgeDimension,
    pub question_text: String,
    pub response_text: String,
}

/// Fills the dimension's rubric. The slots are located in the template
/// first and the texts spliced in afterwards, so nothing inside the
/// question or response is ever treated as a slot.
pub fn build_judge_prompt(spec: &JudgePromptSpec) -> String {
    let t = spec.dimension.template();
    let (head, rest) = t.split_once(QUESTION_SLOT).expect("template has question slot");
    let (mid, tail) = rest.split_once(RESPONSE_SLOT).expect("template has response slot");
    let mut out = String::with_capacity(t.len() + spec.question_text.len() + spec.response_text.len());
    out.push_str(head);
    out.push_str(&spec.question_text);
    out.push_str(mid);
    out.push_str(&spec.response_text);
    out.push_str(tail);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prompt(d: JudgeDimension, q: &str, r: &str) -> String {
        build_judge_prompt(&JudgePromptSpec {
            dimension: d,
            question_text: q.into(),
            response_text: r.into(),
        })
    }

    #[test]
    fn rubric_content() {
        let c = prompt(JudgeDimension::Conciseness, "q", "r");
        assert!(c.contains("straight to the point"));
        assert!(c.contains("10: Extremely concise"));
        assert!(c.contains("0-1: "));
        let l = prompt(JudgeDimension::LogicalSoundness, "q", "r");
        assert!(l.contains("from 0 to 10"));
        assert!(l.contains("not on whether the final answer is correct"));
        for d in JudgeDimension::ALL {
            let p = prompt(d, "q", "r");
            assert!(p.contains("professional reasoning-evaluation expert"));
            assert!(p.trim_end().ends_with("Output Format: [integer score]"));
            assert!(p.contains("single integer score"));
        }
    }

    #[test]
    fn braces_and_slots_pass_through() {
        let q = "Is {smiles} active? {{x}} <RESPONSE>";
        let r = "<think>{0}</think><answer>True</answer> <QUESTION>";
        let p = prompt(JudgeDimension::AccuracyInsight, q, r);
        assert!(p.contains(q) && p.contains(r));
        assert_eq!(p.matches("<QUESTION>").count(), 1);
    }

    #[test]
    fn names_round_trip() {
        for d in JudgeDimension::ALL {
            assert_eq!(d.name().parse::<JudgeDimension>().unwrap(), d);
        }
        assert!("fluency".parse::<JudgeDimension>().is_err());
    }
}
