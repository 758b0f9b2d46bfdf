use serde::{Deserialize, Serialize};

const THINK_OPEN: &str = "<think>";
const THINK_CLOSE: &str = "</think>";
const ANSWER_OPEN: &str = "<answer>";
const ANSWER_CLOSE: &str = "</answer>";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedResponse {
    pub think: String,
    pub answer: Option<bool>,
    pub format_ok: bool,
}

/// Byte range of the content of the first `open ... close` block.
fn first_block(text: &str, open: &str, close: &str) -> Option<(usize, usize)> {
    let start = text.find(open)? + open.len();
    let end = start + text[start..].find(close)?;
    Some((start, end))
}

pub fn parse_answer(s: &str) -> Option<bool> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("true") {
        Some(true)
    } else if s.eq_ignore_ascii_case("false") {
        Some(false)
    } else {
        None
    }
}

/// Splits a response into reasoning and prediction. Never fails; anything
/// off-template just clears `format_ok`.
pub fn parse_response(text: &str) -> ParsedResponse {
    let think_block = first_block(text, THINK_OPEN, THINK_CLOSE);
    let answer_block = first_block(text, ANSWER_OPEN, ANSWER_CLOSE);
    let think = think_block.map(|(s, e)| text[s..e].to_string()).unwrap_or_default();
    let answer = answer_block.and_then(|(s, e)| parse_answer(&text[s..e]));

    let once = |tag: &str| text.matches(tag).count() == 1;
    let format_ok = match (think_block, answer_block) {
        (Some((_, think_end)), Some((answer_start, answer_end))) => {
            once(THINK_OPEN)
                && once(THINK_CLOSE)
                && once(ANSWER_OPEN)
                && once(ANSWER_CLOSE)
                && think_end + THINK_CLOSE.len() <= answer_start - ANSWER_OPEN.len()
                && answer.is_some()
                && text[answer_end + ANSWER_CLOSE.len()..].trim().is_empty()
        }
        _ => false,
    };
    ParsedResponse { think, answer, format_ok }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn template_case() {
        let p = parse_response("<think>x</think><answer>True</answer>");
        assert_eq!(p, ParsedResponse { think: "x".into(), answer: Some(true), format_ok: true });
        let p = parse_response("\n<think>a\nb</think>\n\n<answer> false </answer>\n");
        assert_eq!((p.answer, p.format_ok), (Some(false), true));
    }

    #[test]
    fn malformed_cases() {
        let p = parse_response("<think>x</think>");
        assert_eq!((p.answer, p.format_ok), (None, false));
        let p = parse_response("<think>a</think><answer>maybe</answer>");
        assert_eq!((p.answer, p.format_ok), (None, false));
        assert!(!parse_response("<answer>True</answer><think>x</think>").format_ok);
        assert!(!parse_response("<think>x</think><answer>True</answer><answer>True</answer>").format_ok);
        assert!(!parse_response("<think>x</think><answer>True</answer> so yes").format_ok);
        assert!(!parse_response("<think>x<answer>True</answer></think>").format_ok);
        assert!(!parse_response("<think><think>x</think><answer>True</answer>").format_ok);
        assert_eq!(parse_response(""), ParsedResponse { think: String::new(), answer: None, format_ok: false });
    }

    #[test]
    fn answer_without_think_still_read() {
        let p = parse_response("<answer>True</answer>");
        assert_eq!((p.answer, p.format_ok), (Some(true), false));
    }
}
