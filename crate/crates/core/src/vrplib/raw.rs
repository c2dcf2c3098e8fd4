use indexmap::IndexMap;

use super::ParseError;

pub const NODE_COORD_SECTION: &str = "NODE_COORD_SECTION";
pub const DEMAND_SECTION: &str = "DEMAND_SECTION";
pub const DEPOT_SECTION: &str = "DEPOT_SECTION";
pub const TIME_WINDOW_SECTION: &str = "TIME_WINDOW_SECTION";
pub const SERVICE_TIME_SECTION: &str = "SERVICE_TIME_SECTION";
pub const STATION_SECTION: &str = "STATION_SECTION";
pub const EDGE_WEIGHT_SECTION: &str = "EDGE_WEIGHT_SECTION";

pub const KNOWN_SECTIONS: [&str; 7] = [
    NODE_COORD_SECTION,
    DEMAND_SECTION,
    DEPOT_SECTION,
    TIME_WINDOW_SECTION,
    SERVICE_TIME_SECTION,
    STATION_SECTION,
    EDGE_WEIGHT_SECTION,
];

/// One data row of a section, with the 1-based line it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub line: usize,
    pub tokens: Vec<String>,
}

/// A `KEY : value` header line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Field {
    pub line: usize,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Entry {
    Keyword(String),
    Section(String),
}

/// Token-level view of a VRPLIB file. Keywords and section names are
/// normalized (uppercase, underscores); values and rows are untouched.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawInstance {
    pub keyword_values: IndexMap<String, Field>,
    pub sections: IndexMap<String, Vec<Row>>,
    pub source_order: Vec<Entry>,
}

/// Uppercase and unify spaces/underscores: `"distance limit"` and
/// `"DISTANCE_LIMIT"` both become `"DISTANCE_LIMIT"`.
pub fn normalize_key(key: &str) -> String {
    key.split(|c: char| c.is_whitespace() || c == '_')
        .filter(|p| !p.is_empty())
        .map(|p| p.to_ascii_uppercase())
        .collect::<Vec<_>>()
        .join("_")
}

fn looks_like_header(key: &str) -> bool {
    !key.is_empty()
        && key
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c.is_whitespace())
        && key.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
}

impl RawInstance {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut raw = RawInstance::default();
        let mut current: Option<String> = None;
        // token count gathered so far in EDGE_WEIGHT_SECTION
        let mut edge_tokens = 0usize;

        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if normalize_key(trimmed) == "EOF" {
                break;
            }

            let (head, rest) = match trimmed.find(':') {
                Some(pos) => (trimmed[..pos].trim(), Some(trimmed[pos + 1..].trim())),
                None => (trimmed, None),
            };

            if looks_like_header(head) {
                let key = normalize_key(head);
                if key.ends_with("_SECTION") {
                    raw.sections.entry(key.clone()).or_default();
                    raw.source_order.push(Entry::Section(key.clone()));
                    edge_tokens = 0;
                    if let Some(rest) = rest.filter(|r| !r.is_empty()) {
                        push_row(&mut raw, &key, lineno, rest, &mut edge_tokens);
                    }
                    current = Some(key);
                    continue;
                }
                if let Some(value) = rest {
                    current = None;
                    raw.source_order.push(Entry::Keyword(key.clone()));
                    raw.keyword_values.insert(
                        key,
                        Field {
                            line: lineno,
                            value: value.to_string(),
                        },
                    );
                    continue;
                }
            }

            let Some(section) = current.clone() else {
                return Err(ParseError::UnexpectedLine {
                    line: lineno,
                    content: trimmed.to_string(),
                });
            };

            if trimmed == "-1" {
                let terminates = if section == EDGE_WEIGHT_SECTION {
                    let dim = raw
                        .keyword_values
                        .get("DIMENSION")
                        .and_then(|f| f.value.trim().parse::<usize>().ok());
                    dim.is_some_and(|n| edge_tokens >= n * n)
                } else {
                    true
                };
                if terminates {
                    current = None;
                    continue;
                }
            }
            push_row(&mut raw, &section, lineno, trimmed, &mut edge_tokens);
        }
        Ok(raw)
    }

    pub fn keyword(&self, key: &str) -> Option<&Field> {
        self.keyword_values.get(key)
    }

    pub fn section(&self, name: &str) -> Option<&[Row]> {
        self.sections.get(name).map(Vec::as_slice)
    }

    pub fn unknown_sections(&self) -> impl Iterator<Item = &str> {
        self.sections
            .keys()
            .map(String::as_str)
            .filter(|k| !KNOWN_SECTIONS.contains(k))
    }
}

fn push_row(raw: &mut RawInstance, section: &str, line: usize, text: &str, edge_tokens: &mut usize) {
    let tokens: Vec<String> = text.split_whitespace().map(str::to_string).collect();
    if section == EDGE_WEIGHT_SECTION {
        *edge_tokens += tokens.len();
    }
    raw.sections
        .entry(section.to_string())
        .or_default()
        .push(Row { line, tokens });
}
