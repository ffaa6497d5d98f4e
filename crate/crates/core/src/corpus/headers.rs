use std::sync::OnceLock;

const DEFAULT_HEADERS: &str = include_str!("../../data/headers.txt");

pub const BHC_HEADER: &str = "brief hospital course";
pub const DI_HEADER: &str = "discharge instructions";

/// Known section headers, matched case-insensitively at the start of a line.
///
/// A line is a header line when, after leading whitespace, it begins with a
/// known header followed by either a colon or the end of the line. Text
/// after the colon belongs to the section body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeaderSet {
    // Lowercase, longest first so "discharge instructions" beats "discharge".
    headers: Vec<String>,
}

/// A header recognized on one line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeaderMatch<'a> {
    /// Canonical (lowercase) header name.
    pub name: &'a str,
    /// Byte length of the header text as written, including any colon.
    pub header_len: usize,
    /// Byte offset of the leading whitespace trimmed from the line.
    pub indent: usize,
}

impl Default for HeaderSet {
    fn default() -> Self {
        Self::from_list(DEFAULT_HEADERS)
    }
}

impl HeaderSet {
    /// One header per line; blank lines and `#` comments are skipped. The
    /// two target headers are always included.
    pub fn from_list(list: &str) -> Self {
        let mut headers: Vec<String> = list
            .lines()
            .map(|l| l.trim().trim_end_matches(':').trim().to_lowercase())
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect();
        headers.push(BHC_HEADER.to_string());
        headers.push(DI_HEADER.to_string());
        headers.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        headers.dedup();
        HeaderSet { headers }
    }

    pub fn shared() -> &'static HeaderSet {
        static SET: OnceLock<HeaderSet> = OnceLock::new();
        SET.get_or_init(HeaderSet::default)
    }

    pub fn len(&self) -> usize {
        self.headers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.headers.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.headers.iter().map(String::as_str)
    }

    /// Recognizes a header at the start of `line` (no trailing newline).
    pub fn match_line<'a>(&'a self, line: &str) -> Option<HeaderMatch<'a>> {
        let trimmed = line.trim_start();
        let indent = line.len() - trimmed.len();
        self.headers.iter().find_map(|h| {
            let n = h.len();
            if trimmed.len() < n || !trimmed.is_char_boundary(n) || !trimmed[..n].eq_ignore_ascii_case(h) {
                return None;
            }
            let rest = &trimmed[n..];
            let header_len = if rest.trim().is_empty() {
                n + (rest.len() - rest.trim_start().len())
            } else {
                let after_ws = rest.trim_start();
                if !after_ws.starts_with(':') {
                    return None;
                }
                n + (rest.len() - after_ws.len()) + 1
            };
            Some(HeaderMatch {
                name: h.as_str(),
                header_len,
                indent,
            })
        })
    }
}

/// A header line located in a document.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeaderLine<'a> {
    pub name: &'a str,
    /// Byte offset where the line starts.
    pub line_start: usize,
    /// Byte offset right after the header text (and colon).
    pub content_start: usize,
}

/// All header lines of `text`, in document order.
pub fn find_header_lines<'a>(text: &str, headers: &'a HeaderSet) -> Vec<HeaderLine<'a>> {
    let mut out = Vec::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let body = line.trim_end_matches(['\n', '\r']);
        if let Some(m) = headers.match_line(body) {
            out.push(HeaderLine {
                name: m.name,
                line_start: offset,
                content_start: offset + m.indent + m.header_len,
            });
        }
        offset += line.len();
    }
    out
}
