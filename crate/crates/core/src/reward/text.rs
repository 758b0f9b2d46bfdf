//! Word-level phrase matching shared by the text-derived components.

/// Endings the last word of a phrase may carry in the text.
const SUFFIXES: [&str; 4] = ["", "s", "es", "ity"];

/// Lower-cased alphanumeric runs.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// A phrase pre-split into words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Phrase {
    pub text: String,
    words: Vec<String>,
}

impl Phrase {
    pub fn new(text: &str) -> Option<Phrase> {
        let words = tokenize(text);
        (!words.is_empty()).then(|| Phrase {
            text: text.trim().to_string(),
            words,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Whether the phrase occurs at token position `at`.
    pub fn matches_at(&self, tokens: &[String], at: usize) -> bool {
        let n = self.words.len();
        if at + n > tokens.len() {
            return false;
        }
        let (last, init) = self.words.split_last().expect("non-empty");
        init.iter().zip(&tokens[at..]).all(|(w, t)| w == t)
            && tokens[at + n - 1]
                .strip_prefix(last.as_str())
                .is_some_and(|rest| SUFFIXES.contains(&rest))
    }

    pub fn first_match(&self, tokens: &[String]) -> Option<usize> {
        (0..tokens.len()).find(|&i| self.matches_at(tokens, i))
    }

    pub fn occurs_in(&self, tokens: &[String]) -> bool {
        self.first_match(tokens).is_some()
    }
}

/// Splits on sentence-ending punctuation followed by whitespace, and on
/// newlines. Decimal points ("3.5") do not split.
pub fn sentences(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let bytes = text.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        let end = match b {
            b'\n' => Some(i),
            b'.' | b'!' | b'?' => {
                let next = bytes.get(i + 1);
                (next.is_none() || next.is_some_and(|c| c.is_ascii_whitespace())).then_some(i + 1)
            }
            _ => None,
        };
        if let Some(end) = end {
            let s = text[start..end].trim();
            if !s.is_empty() {
                out.push(s);
            }
            start = i + 1;
        }
    }
    let s = text[start..].trim();
    if !s.is_empty() {
        out.push(s);
    }
    out
}
