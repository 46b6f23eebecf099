//! Lenient parsing of tuple lists out of free-form model completions.
//!
//! Models wrap the list in prose, code fences, Python or JSON syntax, and mix
//! bracket and quote styles. The parser scans for innermost bracket groups and
//! treats each one that looks like a tuple (has a comma or a quoted element)
//! as a candidate. Prose in parentheses without commas or quotes is ignored.

use serde::Serialize;

use super::tuple::FactTuple;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParseWarning {
    /// A tuple-like group without exactly two elements; skipped.
    WrongArity { arity: usize, elements: Vec<String> },
    /// A two-element group with an empty field; skipped.
    EmptyField { elements: Vec<String> },
    /// Kept, but a field has more than one word.
    MultiWord {
        subject: String,
        description: String,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParsedTuples {
    pub tuples: Vec<FactTuple>,
    pub warnings: Vec<ParseWarning>,
}

#[derive(Default)]
struct Group {
    open: char,
    elements: Vec<(String, bool)>,
    buf: String,
    // the current element came from a quoted string; trailing text is ignored
    buf_quoted: bool,
    has_comma: bool,
    has_child: bool,
}

impl Group {
    fn new(open: char) -> Self {
        Group {
            open,
            ..Default::default()
        }
    }

    fn finish_element(&mut self, at_comma: bool) {
        let text = std::mem::take(&mut self.buf);
        let quoted = std::mem::replace(&mut self.buf_quoted, false);
        let trimmed = text.trim();
        if quoted || !trimmed.is_empty() || at_comma {
            let value = if quoted { text } else { trimmed.to_string() };
            self.elements.push((value, quoted));
        }
    }
}

struct Candidate {
    elements: Vec<String>,
    quoted: bool,
}

fn is_quote(c: char) -> bool {
    matches!(
        c,
        '\'' | '"' | '\u{2018}' | '\u{2019}' | '\u{201c}' | '\u{201d}'
    )
}

fn is_closer(c: char) -> bool {
    matches!(c, ']' | ')')
}

/// Finds the end of a quoted string starting at `start` (the opening quote).
/// The closing quote must be followed, after optional whitespace, by a comma,
/// a closing bracket, or the end of input; this lets apostrophes appear inside
/// single-quoted strings. Returns the unescaped content and the index just
/// past the closing quote.
fn scan_quoted(chars: &[char], start: usize) -> Option<(String, usize)> {
    let open = chars[start];
    let mut content = String::new();
    let mut i = start + 1;
    while i < chars.len() {
        let c = chars[i];
        if c == '\\' && i + 1 < chars.len() {
            content.push(chars[i + 1]);
            i += 2;
            continue;
        }
        let closes = c == open
            || (open == '\u{2018}' && c == '\u{2019}')
            || (open == '\u{201c}' && c == '\u{201d}');
        if closes {
            let next = chars[i + 1..].iter().find(|c| !c.is_whitespace());
            if matches!(next, None | Some(',') | Some(']') | Some(')')) {
                return Some((content, i + 1));
            }
        }
        content.push(c);
        i += 1;
    }
    None
}

/// Extracts every well-formed two-element tuple from a model completion.
///
/// Returns an empty list for a bare `[]`. Fails only when no list or tuple
/// structure appears anywhere in `raw`.
pub fn parse_tuple_list(raw: &str) -> Result<ParsedTuples> {
    let chars: Vec<char> = raw.chars().collect();
    let mut stack: Vec<Group> = Vec::new();
    let mut candidates: Vec<Candidate> = Vec::new();
    let mut saw_empty_list = false;

    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            '[' | '(' => {
                if let Some(parent) = stack.last_mut() {
                    parent.has_child = true;
                    parent.buf.clear();
                    parent.buf_quoted = false;
                }
                stack.push(Group::new(c));
            }
            c if is_closer(c) => {
                if let Some(mut group) = stack.pop() {
                    group.finish_element(false);
                    if !group.has_child {
                        let quoted = group.elements.iter().any(|(_, q)| *q);
                        if group.elements.is_empty() {
                            saw_empty_list |= group.open == '[';
                        } else if group.has_comma || quoted {
                            candidates.push(Candidate {
                                quoted: group.elements.iter().all(|(_, q)| *q),
                                elements: group.elements.into_iter().map(|(e, _)| e).collect(),
                            });
                        }
                    }
                }
            }
            ',' => {
                if let Some(group) = stack.last_mut() {
                    group.has_comma = true;
                    group.finish_element(true);
                }
            }
            c if is_quote(c) => {
                if let Some(group) = stack.last_mut() {
                    if !group.buf_quoted && group.buf.trim().is_empty() {
                        if let Some((content, next)) = scan_quoted(&chars, i) {
                            group.buf = content;
                            group.buf_quoted = true;
                            i = next;
                            continue;
                        }
                    }
                    if !group.buf_quoted {
                        group.buf.push(c);
                    }
                }
            }
            _ => {
                if let Some(group) = stack.last_mut() {
                    if !group.buf_quoted {
                        group.buf.push(c);
                    }
                }
            }
        }
        i += 1;
    }

    if candidates.is_empty() && !saw_empty_list {
        return Err(Error::Parse {
            raw: raw.to_string(),
        });
    }

    // Once any fully quoted tuple is present, unquoted groups are prose.
    let any_quoted = candidates.iter().any(|c| c.quoted);
    let mut out = ParsedTuples::default();
    for cand in candidates.into_iter().filter(|c| c.quoted || !any_quoted) {
        if cand.elements.len() != 2 {
            out.warnings.push(ParseWarning::WrongArity {
                arity: cand.elements.len(),
                elements: cand.elements,
            });
            continue;
        }
        match FactTuple::new(&cand.elements[0], &cand.elements[1]) {
            Ok(t) => {
                if t.is_multi_word() {
                    out.warnings.push(ParseWarning::MultiWord {
                        subject: t.subject().to_string(),
                        description: t.description().to_string(),
                    });
                }
                out.tuples.push(t);
            }
            Err(_) => out.warnings.push(ParseWarning::EmptyField {
                elements: cand.elements,
            }),
        }
    }
    Ok(out)
}
