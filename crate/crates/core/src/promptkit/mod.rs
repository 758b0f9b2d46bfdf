//! Prompt assembly, judge prompts and a minimal SVG depiction.

mod depict;
mod judge;

pub use depict::{depict_svg, BOND_LENGTH};
pub use judge::{build_judge_prompt, JudgeDimension, JudgePromptSpec, UnknownDimension};

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub const ROLE_TEXT: &str = include_str!("../../data/prompt/role.txt");
pub const FORMATTING_TEXT: &str = include_str!("../../data/prompt/formatting.txt");
pub const EXAMPLE_TEXT: &str = include_str!("../../data/prompt/example.txt");

pub const THINK_TAG: &str = "<think>";
pub const ANSWER_TAG: &str = "<answer>";

/// Separator between SMILES and label in few-shot rows.
pub const FEWSHOT_ARROW: &str = " → ";

const ROLE: &str = "[Role]";
const TASK: &str = "[Task]";
const FORMATTING: &str = "[Formatting]";
const EXAMPLE: &str = "[Example]";
const FEWSHOT: &str = "[Few-shot]";
const MOLECULE: &str = "[Molecule]";
const IMAGE_PREFIX: &str = "[Image: ";

const HEADERS: [&str; 6] = [ROLE, TASK, FORMATTING, EXAMPLE, FEWSHOT, MOLECULE];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptSpec {
    pub role_text: String,
    pub task_text: String,
    pub formatting_text: String,
    pub fewshot: Vec<(String, bool)>,
    pub molecule_smiles: String,
    pub image_path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("{0} few-shot rows exceed k = {1}")]
    TooManyExamples(usize, usize),
    #[error("formatting text lacks the {0} tag")]
    MissingTag(&'static str),
    #[error("prompt text: {0}")]
    Malformed(String),
    #[error("unknown task '{0}'")]
    UnknownTask(String),
    #[error("task catalog: {0}")]
    Io(String),
}

impl PromptSpec {
    /// Spec with the stock role and formatting texts.
    pub fn standard(task_text: &str, fewshot: Vec<(String, bool)>, molecule_smiles: &str) -> PromptSpec {
        PromptSpec {
            role_text: ROLE_TEXT.trim().to_string(),
            task_text: task_text.trim().to_string(),
            formatting_text: FORMATTING_TEXT.trim().to_string(),
            fewshot,
            molecule_smiles: molecule_smiles.to_string(),
            image_path: None,
        }
    }

    pub fn validate(&self, k: usize) -> Result<(), PromptError> {
        if self.fewshot.len() > k {
            return Err(PromptError::TooManyExamples(self.fewshot.len(), k));
        }
        for tag in [THINK_TAG, ANSWER_TAG] {
            if !self.formatting_text.contains(tag) {
                return Err(PromptError::MissingTag(tag));
            }
        }
        Ok(())
    }
}

pub fn label_word(label: bool) -> &'static str {
    if label {
        "True"
    } else {
        "False"
    }
}

/// Renders the sections in fixed order. The few-shot section is left out
/// when there are no examples.
pub fn build_prompt(spec: &PromptSpec) -> String {
    let mut out = String::new();
    let mut section = |header: &str, body: &str| {
        if !out.is_empty() {
            out.push('\n');
        }
        out.push_str(header);
        out.push('\n');
        out.push_str(body);
        if !body.ends_with('\n') {
            out.push('\n');
        }
    };
    section(ROLE, &spec.role_text);
    section(TASK, &spec.task_text);
    section(FORMATTING, &spec.formatting_text);
    section(EXAMPLE, EXAMPLE_TEXT);
    if !spec.fewshot.is_empty() {
        let rows: Vec<String> = spec
            .fewshot
            .iter()
            .map(|(s, l)| format!("{s}{FEWSHOT_ARROW}{}", label_word(*l)))
            .collect();
        section(FEWSHOT, &rows.join("\n"));
    }
    let mut molecule = spec.molecule_smiles.clone();
    if let Some(path) = &spec.image_path {
        molecule.push('\n');
        molecule.push_str(IMAGE_PREFIX);
        molecule.push_str(path);
        molecule.push(']');
    }
    section(MOLECULE, &molecule);
    out
}

/// Inverse of [`build_prompt`].
pub fn split_prompt(text: &str) -> Result<PromptSpec, PromptError> {
    let mut sections: Vec<(&str, Vec<&str>)> = Vec::new();
    for line in text.lines() {
        if let Some(h) = HEADERS.iter().find(|h| **h == line) {
            sections.push((h, Vec::new()));
        } else if let Some((_, body)) = sections.last_mut() {
            body.push(line);
        } else if !line.is_empty() {
            return Err(PromptError::Malformed("text before first section".into()));
        }
    }
    let order: Vec<&str> = sections.iter().map(|(h, _)| *h).collect();
    let expected: Vec<&str> = HEADERS
        .iter()
        .copied()
        .filter(|h| *h != FEWSHOT || order.contains(&FEWSHOT))
        .collect();
    if order != expected {
        return Err(PromptError::Malformed(format!("section order {order:?}")));
    }
    let body = |h: &str| -> String {
        let lines = &sections.iter().find(|(x, _)| *x == h).unwrap().1;
        // a blank separator line precedes every header after the first
        let mut lines: &[&str] = lines;
        if h != MOLECULE && lines.last() == Some(&"") {
            lines = &lines[..lines.len() - 1];
        }
        lines.join("\n")
    };
    let mut fewshot = Vec::new();
    if order.contains(&FEWSHOT) {
        for row in body(FEWSHOT).lines() {
            let (s, l) = row
                .rsplit_once(FEWSHOT_ARROW)
                .ok_or_else(|| PromptError::Malformed(format!("few-shot row '{row}'")))?;
            let label = match l {
                "True" => true,
                "False" => false,
                _ => return Err(PromptError::Malformed(format!("few-shot label '{l}'"))),
            };
            fewshot.push((s.to_string(), label));
        }
    }
    let molecule = body(MOLECULE);
    let mut lines = molecule.lines();
    let molecule_smiles = lines.next().unwrap_or("").to_string();
    let image_path = match lines.next() {
        Some(l) => Some(
            l.strip_prefix(IMAGE_PREFIX)
                .and_then(|p| p.strip_suffix(']'))
                .ok_or_else(|| PromptError::Malformed(format!("image line '{l}'")))?
                .to_string(),
        ),
        None => None,
    };
    Ok(PromptSpec {
        role_text: body(ROLE),
        task_text: body(TASK),
        formatting_text: body(FORMATTING),
        fewshot,
        molecule_smiles,
        image_path,
    })
}

const BUILTIN_TASKS: [(&str, &str); 8] = [
    ("bace", include_str!("../../data/tasks/bace.txt")),
    ("bbbp", include_str!("../../data/tasks/bbbp.txt")),
    ("sider", include_str!("../../data/tasks/sider.txt")),
    ("hiv", include_str!("../../data/tasks/hiv.txt")),
    ("bioavailability", include_str!("../../data/tasks/bioavailability.txt")),
    ("cyp2c9_v", include_str!("../../data/tasks/cyp2c9_v.txt")),
    ("cyp2d6_v", include_str!("../../data/tasks/cyp2d6_v.txt")),
    ("ames", include_str!("../../data/tasks/ames.txt")),
];

/// Task descriptions keyed by lower-case dataset id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskCatalog {
    tasks: BTreeMap<String, String>,
}

impl TaskCatalog {
    pub fn builtin() -> TaskCatalog {
        TaskCatalog {
            tasks: BUILTIN_TASKS
                .iter()
                .map(|(k, v)| (k.to_string(), v.trim().to_string()))
                .collect(),
        }
    }

    /// Every `<id>.txt` in `dir`.
    pub fn from_dir(dir: &Path) -> Result<TaskCatalog, PromptError> {
        let io = |e: std::io::Error| PromptError::Io(format!("{}: {e}", dir.display()));
        let mut tasks = BTreeMap::new();
        for entry in std::fs::read_dir(dir).map_err(io)? {
            let path = entry.map_err(io)?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("txt") {
                continue;
            }
            let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else {
                continue;
            };
            let text = std::fs::read_to_string(&path).map_err(io)?;
            tasks.insert(stem.to_ascii_lowercase(), text.trim().to_string());
        }
        Ok(TaskCatalog { tasks })
    }

    pub fn get(&self, task: &str) -> Result<&str, PromptError> {
        self.tasks
            .get(&task.to_ascii_lowercase())
            .map(String::as_str)
            .ok_or_else(|| PromptError::UnknownTask(task.to_string()))
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.tasks.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }
}

impl fmt::Display for TaskCatalog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.tasks {
            writeln!(f, "{k}: {}", v.lines().next().unwrap_or(""))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(rows: &[(&str, bool)]) -> PromptSpec {
        PromptSpec::standard(
            TaskCatalog::builtin().get("BACE").unwrap(),
            rows.iter().map(|(s, l)| (s.to_string(), *l)).collect(),
            "CCO",
        )
    }

    #[test]
    fn two_rows_in_order() {
        let p = build_prompt(&spec(&[("c1ccccc1O", true), ("CCN", false)]));
        let a = p.find("c1ccccc1O → True").unwrap();
        let b = p.find("CCN → False").unwrap();
        assert!(a < b);
        assert!(p.contains("<think>") && p.contains("<answer>True/False</answer>"));
    }

    #[test]
    fn empty_fewshot_omitted() {
        let p = build_prompt(&spec(&[]));
        assert!(!p.contains("[Few-shot]"));
        assert_eq!(split_prompt(&p).unwrap(), spec(&[]));
    }

    #[test]
    fn section_order() {
        let p = build_prompt(&spec(&[("C", true)]));
        let pos: Vec<usize> = HEADERS.iter().map(|h| p.find(h).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn image_round_trip() {
        let mut s = spec(&[("CC", false)]);
        s.image_path = Some("out/mol_3.svg".into());
        let p = build_prompt(&s);
        assert!(p.contains("[Image: out/mol_3.svg]"));
        assert_eq!(split_prompt(&p).unwrap(), s);
    }

    #[test]
    fn validate_rules() {
        let s = spec(&[("C", true), ("N", false)]);
        assert!(s.validate(5).is_ok());
        assert_eq!(s.validate(1), Err(PromptError::TooManyExamples(2, 1)));
        let mut s = spec(&[]);
        s.formatting_text = "answer please".into();
        assert_eq!(s.validate(5), Err(PromptError::MissingTag(THINK_TAG)));
    }

    #[test]
    fn catalog_has_all_tasks() {
        let c = TaskCatalog::builtin();
        assert_eq!(c.len(), 8);
        for id in ["BACE", "BBBP", "SIDER", "HIV", "Bioavailability", "CYP2C9_V", "CYP2D6_V", "AMES"] {
            assert!(c.get(id).unwrap().ends_with("output \"True\" or \"False\"."), "{id}");
        }
        assert!(c.get("tox21").is_err());
    }
}
