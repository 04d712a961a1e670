//! Stack-trace and embedded-image removal for incident text.
//!
//! Tickets routinely carry pasted stack traces and Base64-encoded screenshots
//! that drown the useful prose. Cleaning is line-oriented: a line is dropped
//! when it is essentially a bare function-call frame, and image payloads are
//! excised wherever they appear. Everything else is preserved byte-for-byte.

use alloc::string::String;
use alloc::vec::Vec;

use crate::incident::Incident;

/// Counters from one cleaning pass. Character counts are Unicode scalar
/// values, summed over both cleaned fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub struct CleanReport {
    pub stack_lines_removed: usize,
    pub images_removed: usize,
    pub chars_before: usize,
    pub chars_after: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == '$'
}

fn is_ident_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '$'
}

/// Locate the first qualified call in `line`: a dotted identifier of at least
/// two segments immediately followed by a parenthesized section. Returns the
/// byte span from the identifier start through the closing parenthesis.
fn find_qualified_call(line: &str) -> Option<(usize, usize)> {
    let bytes: Vec<(usize, char)> = line.char_indices().collect();
    let mut i = 0;
    while i < bytes.len() {
        let (start_byte, c) = bytes[i];
        let prev_is_ident = i > 0 && {
            let p = bytes[i - 1].1;
            is_ident_continue(p) || p == '.'
        };
        if !is_ident_start(c) || prev_is_ident {
            i += 1;
            continue;
        }
        // Consume dot-separated identifier segments.
        let mut segments = 1;
        let mut j = i;
        while j + 1 < bytes.len() && is_ident_continue(bytes[j + 1].1) {
            j += 1;
        }
        while j + 2 < bytes.len() && bytes[j + 1].1 == '.' && is_ident_start(bytes[j + 2].1) {
            segments += 1;
            j += 2;
            while j + 1 < bytes.len() && is_ident_continue(bytes[j + 1].1) {
                j += 1;
            }
        }
        if segments >= 2 && j + 1 < bytes.len() && bytes[j + 1].1 == '(' {
            let open = j + 1;
            if let Some(close) = bytes[open..].iter().position(|&(_, ch)| ch == ')') {
                let close_idx = open + close;
                let end_byte = bytes[close_idx].0 + ')'.len_utf8();
                return Some((start_byte, end_byte));
            }
        }
        i = j + 1;
    }
    None
}

/// True when the trimmed line is an (optionally `at `-prefixed) qualified
/// function call with at most three other whitespace-separated words, e.g.
/// `at com.foo.Bar.run(Bar.java:42)` or `ABCStagingWriter.execute() failed`.
/// Prose that merely mentions a call keeps enough surrounding words to stay.
pub fn is_stack_frame_line(line: &str) -> bool {
    let trimmed = line.trim();
    let rest = trimmed.strip_prefix("at ").unwrap_or(trimmed);
    match find_qualified_call(rest) {
        None => false,
        Some((start, end)) => {
            let extra_words = rest[..start]
                .split_whitespace()
                .count()
                .saturating_add(rest[end..].split_whitespace().count());
            extra_words <= 3
        }
    }
}

fn normalize_newlines(text: &str) -> String {
    text.replace("\r\n", "\n")
}

/// Delete every stack-frame line; all other lines pass through unchanged.
/// `\r\n` is normalized to `\n` before classification.
pub fn strip_stack_traces(text: &str) -> (String, usize) {
    let normalized = normalize_newlines(text);
    let mut kept: Vec<&str> = Vec::new();
    let mut removed = 0;
    for line in normalized.split('\n') {
        if is_stack_frame_line(line) {
            removed += 1;
        } else {
            kept.push(line);
        }
    }
    (kept.join("\n"), removed)
}

fn is_base64_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '+' || c == '/' || c == '='
}

/// Minimum run length that counts as an inline Base64 payload. Prose never
/// produces 512 contiguous alphabet characters without whitespace.
pub const BASE64_RUN_THRESHOLD: usize = 512;

/// Remove `<img ...>` tags (quote-aware, case-insensitive) and any maximal
/// run of at least [`BASE64_RUN_THRESHOLD`] Base64-alphabet characters.
/// Returns the cleaned text and the number of images removed.
pub fn strip_embedded_images(text: &str) -> (String, usize) {
    let (without_tags, tag_count) = strip_img_tags(text);
    let (without_blobs, blob_count) = strip_base64_runs(&without_tags);
    (without_blobs, tag_count + blob_count)
}

/// Byte offset of the next `<img` opener (case-insensitive), requiring a
/// tag-name boundary so `<imgx>` is left alone.
fn find_img_start(text: &str) -> Option<usize> {
    let bytes = text.as_bytes();
    (0..bytes.len().saturating_sub(4)).find(|&i| {
        bytes[i] == b'<'
            && bytes[i + 1].eq_ignore_ascii_case(&b'i')
            && bytes[i + 2].eq_ignore_ascii_case(&b'm')
            && bytes[i + 3].eq_ignore_ascii_case(&b'g')
            && (bytes[i + 4].is_ascii_whitespace() || bytes[i + 4] == b'>' || bytes[i + 4] == b'/')
    })
}

fn strip_img_tags(text: &str) -> (String, usize) {
    let mut out = String::with_capacity(text.len());
    let mut removed = 0;
    let mut rest = text;
    loop {
        let Some(start) = find_img_start(rest) else {
            out.push_str(rest);
            break;
        };
        out.push_str(&rest[..start]);
        match tag_end(&rest[start..]) {
            Some(len) => {
                removed += 1;
                rest = &rest[start + len..];
            }
            None => {
                // Unterminated tag: keep the text rather than eat the tail.
                out.push_str(&rest[start..]);
                break;
            }
        }
    }
    (out, removed)
}

/// Byte length of a tag starting at `<`, honoring quoted attribute values
/// (a `>` inside quotes does not close the tag).
fn tag_end(tag: &str) -> Option<usize> {
    let mut quote: Option<char> = None;
    for (pos, c) in tag.char_indices() {
        match quote {
            Some(q) if c == q => quote = None,
            Some(_) => {}
            None => match c {
                '"' | '\'' => quote = Some(c),
                '>' => return Some(pos + 1),
                _ => {}
            },
        }
    }
    None
}

fn strip_base64_runs(text: &str) -> (String, usize) {
    let mut out = String::with_capacity(text.len());
    let mut run = String::new();
    let mut removed = 0;
    for c in text.chars() {
        if is_base64_char(c) {
            run.push(c);
        } else {
            if run.chars().count() >= BASE64_RUN_THRESHOLD {
                removed += 1;
            } else {
                out.push_str(&run);
            }
            run.clear();
            out.push(c);
        }
    }
    if run.chars().count() >= BASE64_RUN_THRESHOLD {
        removed += 1;
    } else {
        out.push_str(&run);
    }
    (out, removed)
}

fn clean_text(text: &str) -> (String, usize, usize) {
    let (without_frames, frames) = strip_stack_traces(text);
    let (cleaned, images) = strip_embedded_images(&without_frames);
    (cleaned, frames, images)
}

/// Run both strippers over the raw summary and root cause, populating the
/// `*_clean` fields. Raw fields are left untouched.
pub fn clean_incident(incident: &Incident) -> (Incident, CleanReport) {
    let (summary_clean, summary_frames, summary_images) = clean_text(&incident.summary_raw);
    let (root_cause_clean, rc_frames, rc_images) = clean_text(&incident.root_cause_raw);
    let report = CleanReport {
        stack_lines_removed: summary_frames + rc_frames,
        images_removed: summary_images + rc_images,
        chars_before: incident.summary_raw.chars().count()
            + incident.root_cause_raw.chars().count(),
        chars_after: summary_clean.chars().count() + root_cause_clean.chars().count(),
    };
    let mut cleaned = incident.clone();
    cleaned.summary_clean = Some(summary_clean);
    cleaned.root_cause_clean = Some(root_cause_clean);
    (cleaned, report)
}
