//! Minimal RFC 4180 CSV reading and writing.
//!
//! All CSV produced by this crate goes through [`push_record`] so quoting and
//! line endings (`\n`) are uniform and byte-deterministic.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("unterminated quoted field starting near byte {0}")]
    UnterminatedQuote(usize),
    #[error("stray quote inside unquoted field near byte {0}")]
    StrayQuote(usize),
}

/// Quote a field if it contains a comma, double quote, CR, or LF.
pub fn escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') || field.contains('\r') {
        let mut out = String::with_capacity(field.len() + 2);
        out.push('"');
        for ch in field.chars() {
            if ch == '"' {
                out.push('"');
            }
            out.push(ch);
        }
        out.push('"');
        out
    } else {
        field.to_string()
    }
}

/// Append one record (escaped, comma separated, `\n` terminated).
pub fn push_record<S: AsRef<str>>(out: &mut String, fields: &[S]) {
    for (i, f) in fields.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&escape(f.as_ref()));
    }
    out.push('\n');
}

/// Render an optional value as its display form or the empty string.
pub fn opt_field<T: std::fmt::Display>(v: &Option<T>) -> String {
    match v {
        Some(x) => x.to_string(),
        None => String::new(),
    }
}

/// Parse CSV text into records. Handles quoted fields, escaped quotes, and
/// embedded newlines; both `\n` and `\r\n` record separators are accepted.
pub fn parse(text: &str) -> Result<Vec<Vec<String>>, CsvError> {
    let mut records = Vec::new();
    let mut record: Vec<String> = Vec::new();
    let mut field = String::new();
    let mut chars = text.char_indices().peekable();
    // Tracks whether the current field has consumed any characters; used to
    // distinguish a quoted field from a quote in the middle of a bare field.
    let mut field_started = false;
    let mut in_quotes = false;
    let mut quote_start = 0usize;

    while let Some((pos, ch)) = chars.next() {
        if in_quotes {
            if ch == '"' {
                match chars.peek() {
                    Some(&(_, '"')) => {
                        field.push('"');
                        chars.next();
                    }
                    _ => in_quotes = false,
                }
            } else {
                field.push(ch);
            }
            continue;
        }
        match ch {
            '"' if !field_started => {
                in_quotes = true;
                field_started = true;
                quote_start = pos;
            }
            '"' => return Err(CsvError::StrayQuote(pos)),
            ',' => {
                record.push(std::mem::take(&mut field));
                field_started = false;
            }
            '\r' => {
                if let Some(&(_, '\n')) = chars.peek() {
                    chars.next();
                }
                record.push(std::mem::take(&mut field));
                records.push(std::mem::take(&mut record));
                field_started = false;
            }
            '\n' => {
                record.push(std::mem::take(&mut field));
                records.push(std::mem::take(&mut record));
                field_started = false;
            }
            _ => {
                field.push(ch);
                field_started = true;
            }
        }
    }
    if in_quotes {
        return Err(CsvError::UnterminatedQuote(quote_start));
    }
    if field_started || !field.is_empty() || !record.is_empty() {
        record.push(field);
        records.push(record);
    }
    Ok(records)
}
