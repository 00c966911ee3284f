//! Sectioned text format shared by edge-list, scenario and config files.
//!
//! A file is a sequence of lines. `#` starts a comment that runs to the end
//! of the line. A line of the form `[name]` opens a new section; lines
//! before the first header belong to an unnamed leading section. Blank
//! lines are dropped.

/// One non-blank, comment-stripped line together with its 1-based position
/// in the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Line {
    pub number: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    /// Lower-cased header name; `None` for the leading headerless block.
    pub name: Option<String>,
    pub header_line: usize,
    pub lines: Vec<Line>,
}

impl Section {
    pub fn is(&self, name: &str) -> bool {
        self.name.as_deref() == Some(name)
    }
}

/// Splits `text` into sections. Never fails; interpreting the lines is up
/// to the caller.
pub fn parse(text: &str) -> Vec<Section> {
    let mut out = vec![Section {
        name: None,
        header_line: 0,
        lines: Vec::new(),
    }];
    for (idx, raw) in text.lines().enumerate() {
        let number = idx + 1;
        let body = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if body.is_empty() {
            continue;
        }
        if body.starts_with('[') && body.ends_with(']') {
            out.push(Section {
                name: Some(body[1..body.len() - 1].trim().to_ascii_lowercase()),
                header_line: number,
                lines: Vec::new(),
            });
            continue;
        }
        out.last_mut().expect("always one section").lines.push(Line {
            number,
            text: body.to_string(),
        });
    }
    if out[0].lines.is_empty() {
        out.remove(0);
    }
    out
}

/// Splits `key=value` (either side trimmed). Returns `None` when there is
/// no `=`.
pub fn key_value(text: &str) -> Option<(&str, &str)> {
    let (k, v) = text.split_once('=')?;
    Some((k.trim(), v.trim()))
}
