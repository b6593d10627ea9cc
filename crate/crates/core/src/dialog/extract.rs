use serde::{Deserialize, Serialize};

pub const EMPTY_RESULT_FEEDBACK: &str =
    "Maybe you want to think again about your answer. Your SPARQL query returns an empty result when executed.";

const FENCE: &str = "```";

/// Query text taken from an answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExtractedQuery {
    pub code: String,
    /// Whether the answer contained a complete fenced code block.
    pub well_formed: bool,
}

/// Returns the content of the first fenced block, without its info string.
/// Answers without a complete block come back trimmed and not well formed.
pub fn extract_fenced_block(answer: &str) -> ExtractedQuery {
    let unfenced = || ExtractedQuery {
        code: answer.trim().to_owned(),
        well_formed: false,
    };
    let Some(open) = answer.find(FENCE) else {
        return unfenced();
    };
    let after = &answer[open + FENCE.len()..];
    let body_start = match (after.find('\n'), after.find(FENCE)) {
        // Fence closes on the opening line: no info string.
        (Some(nl), Some(close)) if close < nl => 0,
        (None, Some(_)) => 0,
        (Some(nl), _) => nl + 1,
        (None, None) => return unfenced(),
    };
    let body = &after[body_start..];
    match body.find(FENCE) {
        Some(close) => ExtractedQuery {
            code: body[..close].trim().to_owned(),
            well_formed: true,
        },
        None => ExtractedQuery {
            code: body.trim().to_owned(),
            well_formed: false,
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "message", rename_all = "camelCase")]
pub enum FeedbackKind {
    /// Carries the validator's message unchanged.
    SyntaxError(String),
    EmptyResult,
}

pub fn make_feedback(kind: &FeedbackKind, offending_query: &str) -> String {
    match kind {
        FeedbackKind::SyntaxError(error) => format!(
            "Please try to correct your answer. Your SPARQL query has syntax errors: {error}\n\nSPARQL given:\n```sparql\n{offending_query}\n```"
        ),
        FeedbackKind::EmptyResult => EMPTY_RESULT_FEEDBACK.to_owned(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fenced_with_info_string() {
        let e = extract_fenced_block("```sparql\nSELECT ?x WHERE {?x ?p ?o}\n```");
        assert_eq!(e.code, "SELECT ?x WHERE {?x ?p ?o}");
        assert!(e.well_formed);
    }

    #[test]
    fn unfenced_identity() {
        let e = extract_fenced_block("  SELECT ?x WHERE {?x ?p ?o}\n");
        assert_eq!(e.code, "SELECT ?x WHERE {?x ?p ?o}");
        assert!(!e.well_formed);
    }

    #[test]
    fn first_of_two_blocks() {
        let text = "Here:\n```sparql\nSELECT ?a WHERE {?a ?b ?c}\n```\nor\n```\nSELECT ?z WHERE {?z ?y ?x}\n```\n";
        let e = extract_fenced_block(text);
        assert_eq!(e.code, "SELECT ?a WHERE {?a ?b ?c}");
        assert!(e.well_formed);
    }

    #[test]
    fn inline_and_unclosed_fences() {
        let e = extract_fenced_block("```SELECT ?x {}```");
        assert_eq!(e.code, "SELECT ?x {}");
        assert!(e.well_formed);
        let e = extract_fenced_block("```sparql\nSELECT ?x {}\n");
        assert_eq!(e.code, "SELECT ?x {}");
        assert!(!e.well_formed);
    }

    #[test]
    fn syntax_feedback_template() {
        let text = make_feedback(&FeedbackKind::SyntaxError("Expected '}'".into()), "SELECT ?x {");
        assert!(
            text.starts_with("Please try to correct your answer. Your SPARQL query has syntax errors: Expected '}'")
        );
        assert!(text.ends_with("SPARQL given:\n```sparql\nSELECT ?x {\n```"));
    }

    #[test]
    fn empty_feedback_is_fixed() {
        assert_eq!(
            make_feedback(&FeedbackKind::EmptyResult, "ignored"),
            "Maybe you want to think again about your answer. Your SPARQL query returns an empty result when executed."
        );
    }
}
