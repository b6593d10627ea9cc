//! SELECT query validation and a lightweight lexer over SPARQL text.
//!
//! The lexer is only used for things the grammar parser does not expose:
//! finding prefixes that are used but not declared, and collecting the IRIs a
//! query mentions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use spargebra::SparqlParser;

use super::graph::RDF_TYPE;

/// A query that passed the SELECT grammar check.
#[derive(Clone)]
pub struct ParsedQuery {
    text: String,
    query: spargebra::Query,
    injected: Vec<String>,
}

impl fmt::Debug for ParsedQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParsedQuery")
            .field("text", &self.text)
            .field("injected", &self.injected)
            .finish()
    }
}

impl ParsedQuery {
    /// Query text including any injected `PREFIX` declarations.
    pub fn text(&self) -> &str {
        &self.text
    }

    /// Prefix labels that were prepended from the configured map.
    pub fn injected_prefixes(&self) -> &[String] {
        &self.injected
    }

    pub(crate) fn algebra(&self) -> &spargebra::Query {
        &self.query
    }
}

/// Human-readable grammar failure, suitable for feeding back to a model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxError {
    pub message: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for SyntaxError {}

impl SyntaxError {
    fn new(message: impl Into<String>) -> Self {
        SyntaxError {
            message: message.into(),
        }
    }
}

/// Checks that `query_text` is a grammatical SPARQL SELECT query once the
/// configured prefixes it uses but does not declare are prepended.
pub fn validate_select(query_text: &str, prefix_map: &BTreeMap<String, String>) -> Result<ParsedQuery, SyntaxError> {
    let tokens = lex(query_text);
    let usage = prefix_usage(&tokens);
    let mut injected = Vec::new();
    let mut header = String::new();
    for prefix in usage.used.difference(&usage.declared) {
        match prefix_map.get(prefix) {
            Some(ns) => {
                header.push_str(&format!("PREFIX {prefix}: <{ns}>\n"));
                injected.push(prefix.clone());
            }
            None => return Err(SyntaxError::new(format!("Unknown namespace prefix : {prefix}"))),
        }
    }
    let text = format!("{header}{query_text}");
    let query = SparqlParser::new()
        .parse_query(&text)
        .map_err(|e| SyntaxError::new(shift_line_numbers(&e.to_string(), injected.len())))?;
    match query {
        spargebra::Query::Select { .. } => Ok(ParsedQuery { text, query, injected }),
        spargebra::Query::Ask { .. } => Err(SyntaxError::new("Expected a SELECT query but found an ASK query")),
        spargebra::Query::Construct { .. } => {
            Err(SyntaxError::new("Expected a SELECT query but found a CONSTRUCT query"))
        }
        spargebra::Query::Describe { .. } => {
            Err(SyntaxError::new("Expected a SELECT query but found a DESCRIBE query"))
        }
    }
}

/// Error positions refer to the text the model wrote, not to the injected header.
fn shift_line_numbers(message: &str, header_lines: usize) -> String {
    if header_lines == 0 {
        return message.to_owned();
    }
    if let Some(rest) = message.strip_prefix("error at ") {
        if let Some((line, tail)) = rest.split_once(':') {
            if let Ok(line) = line.parse::<usize>() {
                if line > header_lines {
                    return format!("error at {}:{tail}", line - header_lines);
                }
            }
        }
    }
    message.to_owned()
}

/// Absolute IRIs mentioned in the query body, after prefix expansion.
///
/// IRIs that only occur in `PREFIX` declarations are not included; the
/// keyword `a` counts as `rdf:type`. The query must already validate.
pub fn extract_query_iris(
    query_text: &str,
    prefix_map: &BTreeMap<String, String>,
) -> Result<BTreeSet<String>, SyntaxError> {
    validate_select(query_text, prefix_map)?;
    let tokens = lex(query_text);
    let usage = prefix_usage(&tokens);
    let mut namespaces = prefix_map.clone();
    namespaces.extend(usage.declarations.iter().map(|(k, v)| (k.clone(), v.clone())));

    let mut out = BTreeSet::new();
    for (i, token) in tokens.iter().enumerate() {
        if usage.declaration_tokens.contains(&i) {
            continue;
        }
        match token {
            Token::Iri(raw) => out.insert(resolve(usage.base.as_deref(), &unescape_iri(raw))),
            Token::PrefixedName { prefix, local } => match namespaces.get(prefix) {
                Some(ns) => out.insert(resolve(usage.base.as_deref(), &format!("{ns}{local}"))),
                None => false,
            },
            Token::Word(w) if w == "a" => out.insert(RDF_TYPE.to_owned()),
            _ => false,
        };
    }
    Ok(out)
}

fn resolve(base: Option<&str>, iri: &str) -> String {
    if oxiri::Iri::parse(iri).is_ok() {
        return iri.to_owned();
    }
    base.and_then(|b| oxiri::Iri::parse(b).ok())
        .and_then(|b| b.resolve(iri).ok())
        .map(|i| i.into_inner())
        .unwrap_or_else(|| iri.to_owned())
}

fn unescape_iri(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut chars = raw.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '\\' && matches!(chars.peek(), Some('u') | Some('U')) {
            let long = chars.next() == Some('U');
            let digits: String = chars.by_ref().take(if long { 8 } else { 4 }).collect();
            if let Some(decoded) = u32::from_str_radix(&digits, 16).ok().and_then(char::from_u32) {
                out.push(decoded);
                continue;
            }
            out.push('\\');
            out.push(if long { 'U' } else { 'u' });
            out.push_str(&digits);
        } else {
            out.push(c);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Token {
    Iri(String),
    PrefixedName { prefix: String, local: String },
    Word(String),
    Variable(String),
    Literal,
    BlankNode,
    Punct(char),
}

struct PrefixUsage {
    used: BTreeSet<String>,
    declared: BTreeSet<String>,
    declarations: BTreeMap<String, String>,
    declaration_tokens: BTreeSet<usize>,
    base: Option<String>,
}

fn prefix_usage(tokens: &[Token]) -> PrefixUsage {
    let mut usage = PrefixUsage {
        used: BTreeSet::new(),
        declared: BTreeSet::new(),
        declarations: BTreeMap::new(),
        declaration_tokens: BTreeSet::new(),
        base: None,
    };
    let mut i = 0;
    while i < tokens.len() {
        match &tokens[i] {
            Token::Word(w) if w.eq_ignore_ascii_case("prefix") => {
                if let (Some(Token::PrefixedName { prefix, local }), Some(Token::Iri(ns))) =
                    (tokens.get(i + 1), tokens.get(i + 2))
                {
                    if local.is_empty() {
                        usage.declared.insert(prefix.clone());
                        usage.declarations.insert(prefix.clone(), unescape_iri(ns));
                        usage.declaration_tokens.extend([i, i + 1, i + 2]);
                        i += 3;
                        continue;
                    }
                }
            }
            Token::Word(w) if w.eq_ignore_ascii_case("base") => {
                if let Some(Token::Iri(base)) = tokens.get(i + 1) {
                    usage.base = Some(unescape_iri(base));
                    usage.declaration_tokens.extend([i, i + 1]);
                    i += 2;
                    continue;
                }
            }
            Token::PrefixedName { prefix, .. } => {
                usage.used.insert(prefix.clone());
            }
            _ => {}
        }
        i += 1;
    }
    usage
}

fn is_pn_chars_base(c: char) -> bool {
    c.is_ascii_alphabetic()
        || matches!(c,
            '\u{00C0}'..='\u{00D6}' | '\u{00D8}'..='\u{00F6}' | '\u{00F8}'..='\u{02FF}'
            | '\u{0370}'..='\u{037D}' | '\u{037F}'..='\u{1FFF}' | '\u{200C}'..='\u{200D}'
            | '\u{2070}'..='\u{218F}' | '\u{2C00}'..='\u{2FEF}' | '\u{3001}'..='\u{D7FF}'
            | '\u{F900}'..='\u{FDCF}' | '\u{FDF0}'..='\u{FFFD}' | '\u{10000}'..='\u{EFFFF}')
}

fn is_pn_chars_u(c: char) -> bool {
    is_pn_chars_base(c) || c == '_'
}

fn is_pn_chars(c: char) -> bool {
    is_pn_chars_u(c)
        || c == '-'
        || c.is_ascii_digit()
        || matches!(c, '\u{00B7}' | '\u{0300}'..='\u{036F}' | '\u{203F}'..='\u{2040}')
}

fn is_iri_char(c: char) -> bool {
    !matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\') && c > ' '
}

/// Tokenizes SPARQL text. Unrecognized characters become `Punct`; the
/// lexer never fails, the grammar parser is the authority on validity.
pub(crate) fn lex(text: &str) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
        } else if c == '"' || c == '\'' {
            i = skip_string(&chars, i);
            tokens.push(Token::Literal);
        } else if c == '<' {
            let mut j = i + 1;
            // IRIREF permits `\u` escapes; anything else means the less-than operator.
            while j < chars.len()
                && (is_iri_char(chars[j]) || (chars[j] == '\\' && matches!(chars.get(j + 1), Some('u' | 'U'))))
            {
                j += 1;
            }
            if j < chars.len() && chars[j] == '>' {
                tokens.push(Token::Iri(chars[i + 1..j].iter().collect()));
                i = j + 1;
            } else {
                tokens.push(Token::Punct('<'));
                i += 1;
            }
        } else if (c == '?' || c == '$')
            && chars
                .get(i + 1)
                .is_some_and(|&n| is_pn_chars_u(n) || n.is_ascii_digit())
        {
            let mut j = i + 1;
            while j < chars.len()
                && (is_pn_chars_u(chars[j])
                    || chars[j].is_ascii_digit()
                    || matches!(chars[j], '\u{00B7}' | '\u{0300}'..='\u{036F}' | '\u{203F}'..='\u{2040}'))
            {
                j += 1;
            }
            tokens.push(Token::Variable(chars[i + 1..j].iter().collect()));
            i = j;
        } else if c == '_' && chars.get(i + 1) == Some(&':') {
            let (_, end) = read_local(&chars, i + 2);
            tokens.push(Token::BlankNode);
            i = end;
        } else if c == ':' {
            let (local, end) = read_local(&chars, i + 1);
            tokens.push(Token::PrefixedName {
                prefix: String::new(),
                local,
            });
            i = end;
        } else if is_pn_chars_base(c) {
            let mut j = i + 1;
            while j < chars.len() && (is_pn_chars(chars[j]) || chars[j] == '.') {
                j += 1;
            }
            // PN_PREFIX cannot end with '.'
            while chars[j - 1] == '.' {
                j -= 1;
            }
            let word: String = chars[i..j].iter().collect();
            if chars.get(j) == Some(&':') {
                let (local, end) = read_local(&chars, j + 1);
                tokens.push(Token::PrefixedName { prefix: word, local });
                i = end;
            } else {
                // Keywords and function names never contain '-' or '.'.
                let keyword_end = chars[i..j]
                    .iter()
                    .position(|&ch| ch == '-' || ch == '.')
                    .map_or(j, |p| i + p);
                tokens.push(Token::Word(chars[i..keyword_end].iter().collect()));
                i = keyword_end;
            }
        } else {
            tokens.push(Token::Punct(c));
            i += 1;
        }
    }
    tokens
}

fn skip_string(chars: &[char], start: usize) -> usize {
    let quote = chars[start];
    let long = chars.get(start + 1) == Some(&quote) && chars.get(start + 2) == Some(&quote);
    let mut i = if long { start + 3 } else { start + 1 };
    while i < chars.len() {
        let c = chars[i];
        if c == '\\' {
            i += 2;
            continue;
        }
        if long {
            if c == quote && chars.get(i + 1) == Some(&quote) && chars.get(i + 2) == Some(&quote) {
                return i + 3;
            }
        } else if c == quote || c == '\n' {
            return i + 1;
        }
        i += 1;
    }
    chars.len()
}

/// Reads a PN_LOCAL starting at `start`, returning the unescaped local name
/// and the index after it.
fn read_local(chars: &[char], start: usize) -> (String, usize) {
    let mut local = String::new();
    let mut i = start;
    let mut last_good = (String::new(), start);
    let mut first = true;
    while i < chars.len() {
        let c = chars[i];
        let accepted = if c == '\\' && i + 1 < chars.len() && "_~.-!$&'()*+,;=/?#@%".contains(chars[i + 1]) {
            local.push(chars[i + 1]);
            i += 2;
            true
        } else if c == '%'
            && i + 2 < chars.len()
            && chars[i + 1].is_ascii_hexdigit()
            && chars[i + 2].is_ascii_hexdigit()
        {
            local.extend(&chars[i..i + 3]);
            i += 3;
            true
        } else if is_pn_chars_u(c) || c == ':' || c.is_ascii_digit() || (!first && (is_pn_chars(c) || c == '.')) {
            local.push(c);
            i += 1;
            true
        } else {
            false
        };
        if !accepted {
            break;
        }
        first = false;
        if c != '.' {
            last_good = (local.clone(), i);
        }
    }
    last_good
}
