//! ASCII page encoding.
//!
//! Each page is written as one line per parameter value, then for each
//! array a line of dimension sizes followed by its elements, then a line
//! holding the row count and one line per row. Floats are printed with the
//! shortest digits that read back to the same bits, so the text form is
//! lossless apart from NaN payloads.
//!
//! On input, blank lines and lines whose first token starts with `!` are
//! skipped, and non-canonical spellings (`1e2`, `+5`, unquoted strings) are
//! accepted.

use std::io::Write;
use std::num::IntErrorKind;

use crate::error::{ParseDiagnostic, Result, SddsError};
use crate::model::{element_count, ArrayInstance, DataType, Page, Schema, Value};

/// Canonical text token for a value.
pub fn format_value(value: &Value) -> String {
    match value {
        Value::Short(v) => v.to_string(),
        Value::Long(v) => v.to_string(),
        Value::Long64(v) => v.to_string(),
        Value::Float(v) => format_float(*v),
        Value::Double(v) => format_float(*v),
        Value::Str(s) => format_string(s),
        Value::Char(b) => format_char(*b),
    }
}

fn format_float<F: std::fmt::Debug + Into<f64> + Copy>(v: F) -> String {
    let wide: f64 = v.into();
    if wide.is_nan() {
        "nan".to_string()
    } else if wide.is_infinite() {
        if wide > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        // Debug prints the shortest round-trip digits and always keeps a
        // decimal point or exponent.
        format!("{v:?}")
    }
}

fn format_string(s: &str) -> String {
    let plain = !s.is_empty()
        && !s
            .chars()
            .any(|c| c.is_whitespace() || c.is_control() || matches!(c, '"' | '\\' | '!'));
    if plain {
        return s.to_string();
    }
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c if c.is_ascii_control() => out.push_str(&format!("\\x{:02x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn format_char(b: u8) -> String {
    match b {
        b'"' => "\"\\\"\"".to_string(),
        b'\\' => "\"\\\\\"".to_string(),
        0x20..=0x7e => format!("\"{}\"", char::from(b)),
        _ => format!("\"\\x{b:02x}\""),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Token {
    bytes: Vec<u8>,
    quoted: bool,
    column: usize,
}

fn hex_digit(b: u8) -> Option<u8> {
    char::from(b).to_digit(16).map(|d| d as u8)
}

/// Splits one physical line into tokens, stopping at a `!` comment.
/// Errors carry the 1-based byte column.
fn tokenize_line(line: &[u8]) -> Result<Vec<Token>, (usize, String)> {
    let mut tokens = Vec::new();
    let mut i = 0;
    loop {
        while i < line.len() && line[i].is_ascii_whitespace() {
            i += 1;
        }
        if i == line.len() || line[i] == b'!' {
            return Ok(tokens);
        }
        let column = i + 1;
        if line[i] == b'"' {
            i += 1;
            let mut bytes = Vec::new();
            loop {
                match line.get(i) {
                    None => return Err((column, "unterminated quote".to_string())),
                    Some(b'"') => {
                        i += 1;
                        break;
                    }
                    Some(b'\\') => {
                        let esc = i + 1;
                        match line.get(esc) {
                            Some(b'"') => bytes.push(b'"'),
                            Some(b'\\') => bytes.push(b'\\'),
                            Some(b'n') => bytes.push(b'\n'),
                            Some(b't') => bytes.push(b'\t'),
                            Some(b'x') => {
                                let hi = line.get(esc + 1).copied().and_then(hex_digit);
                                let lo = line.get(esc + 2).copied().and_then(hex_digit);
                                match (hi, lo) {
                                    (Some(hi), Some(lo)) => bytes.push(hi << 4 | lo),
                                    _ => return Err((i + 1, "bad \\x escape".to_string())),
                                }
                                i = esc + 3;
                                continue;
                            }
                            Some(&other) => {
                                return Err((
                                    i + 1,
                                    format!("bad escape '\\{}'", char::from(other).escape_default()),
                                ))
                            }
                            None => return Err((column, "unterminated quote".to_string())),
                        }
                        i = esc + 1;
                    }
                    Some(&b) => {
                        bytes.push(b);
                        i += 1;
                    }
                }
            }
            if i < line.len() && !line[i].is_ascii_whitespace() {
                return Err((i + 1, "expected whitespace after closing quote".to_string()));
            }
            tokens.push(Token {
                bytes,
                quoted: true,
                column,
            });
        } else {
            let start = i;
            while i < line.len() && !line[i].is_ascii_whitespace() {
                i += 1;
            }
            tokens.push(Token {
                bytes: line[start..i].to_vec(),
                quoted: false,
                column,
            });
        }
    }
}

fn parse_token(token: &Token, data_type: DataType) -> Result<Value, String> {
    if data_type.is_numeric() {
        let text = std::str::from_utf8(&token.bytes)
            .ok()
            .filter(|_| !token.quoted)
            .ok_or_else(|| format!("malformed number for {data_type}"))?;
        return parse_number(text, data_type);
    }
    match data_type {
        DataType::Character => match token.bytes.as_slice() {
            [b] => Ok(Value::Char(*b)),
            other => Err(format!(
                "character value must be exactly one byte, got {}",
                other.len()
            )),
        },
        _ => String::from_utf8(token.bytes.clone())
            .map(Value::Str)
            .map_err(|_| "invalid UTF-8 in string".to_string()),
    }
}

fn parse_number(text: &str, data_type: DataType) -> Result<Value, String> {
    fn int_err(text: &str, data_type: DataType, e: std::num::ParseIntError) -> String {
        match e.kind() {
            IntErrorKind::PosOverflow | IntErrorKind::NegOverflow => {
                format!("overflow: '{text}' does not fit in {data_type}")
            }
            _ => format!("malformed number '{text}' for {data_type}"),
        }
    }
    let float_err = |_| format!("malformed number '{text}' for {data_type}");
    Ok(match data_type {
        DataType::Short => Value::Short(text.parse().map_err(|e| int_err(text, data_type, e))?),
        DataType::Long => Value::Long(text.parse().map_err(|e| int_err(text, data_type, e))?),
        DataType::Long64 => Value::Long64(text.parse().map_err(|e| int_err(text, data_type, e))?),
        DataType::Float => {
            let v: f32 = text.parse().map_err(float_err)?;
            Value::Float(if v.is_nan() { f32::NAN } else { v })
        }
        DataType::Double => {
            let v: f64 = text.parse().map_err(float_err)?;
            Value::Double(if v.is_nan() { f64::NAN } else { v })
        }
        DataType::String | DataType::Character => unreachable!("numeric types only"),
    })
}

/// Parses one token as written in a data line (quoted or bare).
pub fn parse_value(token: &str, data_type: DataType) -> Result<Value, String> {
    let mut tokens = tokenize_line(token.as_bytes()).map_err(|(_, msg)| msg)?;
    if tokens.len() != 1 {
        return Err(format!("expected one token, found {}", tokens.len()));
    }
    parse_token(&tokens.remove(0), data_type)
}

/// Line-oriented cursor over ASCII page data.
#[derive(Debug, Clone)]
pub struct AsciiReader<'a> {
    data: &'a [u8],
    pos: usize,
    line: usize,
}

impl<'a> AsciiReader<'a> {
    /// `first_line` is the file line number of `data[0]`.
    pub fn new(data: &'a [u8], first_line: usize) -> Self {
        AsciiReader {
            data,
            pos: 0,
            line: first_line.max(1),
        }
    }

    /// Line number of the next line to be read.
    pub fn line(&self) -> usize {
        self.line
    }

    fn next_physical(&mut self) -> Option<(usize, &'a [u8])> {
        if self.pos >= self.data.len() {
            return None;
        }
        let rest = &self.data[self.pos..];
        let (mut line, advance) = match rest.iter().position(|&b| b == b'\n') {
            Some(n) => (&rest[..n], n + 1),
            None => (rest, rest.len()),
        };
        if let [head @ .., b'\r'] = line {
            line = head;
        }
        self.pos += advance;
        let number = self.line;
        self.line += 1;
        Some((number, line))
    }

    /// Tokens of the next line that holds any, skipping blanks and comments.
    fn next_tokens(&mut self) -> Result<Option<(usize, Vec<Token>)>, ParseDiagnostic> {
        while let Some((number, line)) = self.next_physical() {
            let tokens = tokenize_line(line).map_err(|(col, msg)| ParseDiagnostic::new(number, col, msg))?;
            if !tokens.is_empty() {
                return Ok(Some((number, tokens)));
            }
        }
        Ok(None)
    }

    fn eof(&self, what: &str) -> ParseDiagnostic {
        ParseDiagnostic::new(self.line, 1, format!("unexpected end of data: {what}"))
    }
}

fn value_at(line: usize, token: &Token, data_type: DataType, what: &str) -> Result<Value, ParseDiagnostic> {
    parse_token(token, data_type)
        .map_err(|msg| ParseDiagnostic::new(line, token.column, format!("{what}: {msg}")))
}

fn plural(n: usize) -> &'static str {
    if n == 1 {
        "value"
    } else {
        "values"
    }
}

/// Reads the next page, or `None` on a clean end of data at a page boundary.
pub fn read_page_ascii(
    reader: &mut AsciiReader<'_>,
    schema: &Schema,
) -> Result<Option<Page>, ParseDiagnostic> {
    let mut started = false;

    let mut parameter_values = Vec::with_capacity(schema.parameters.len());
    for def in &schema.parameters {
        let Some((line, tokens)) = reader.next_tokens()? else {
            if started {
                return Err(reader.eof(&format!("expected parameter '{}'", def.name)));
            }
            return Ok(None);
        };
        started = true;
        let what = format!("parameter '{}'", def.name);
        if tokens.len() != 1 {
            return Err(ParseDiagnostic::new(
                line,
                1,
                format!("{what}: expected 1 value, got {}", tokens.len()),
            ));
        }
        parameter_values.push(value_at(line, &tokens[0], def.data_type, &what)?);
    }

    let mut array_values = Vec::with_capacity(schema.arrays.len());
    for def in &schema.arrays {
        let name = def.name();
        let Some((line, tokens)) = reader.next_tokens()? else {
            if started {
                return Err(reader.eof(&format!("expected dimensions of array '{name}'")));
            }
            return Ok(None);
        };
        started = true;
        if tokens.len() != def.dim_count {
            return Err(ParseDiagnostic::new(
                line,
                1,
                format!(
                    "array '{name}': expected {} dimension(s), got {}",
                    def.dim_count,
                    tokens.len()
                ),
            ));
        }
        let mut dims = Vec::with_capacity(def.dim_count);
        for token in &tokens {
            match value_at(line, token, DataType::Long, &format!("array '{name}' dimension"))? {
                Value::Long(d) if d >= 0 => dims.push(d),
                _ => {
                    return Err(ParseDiagnostic::new(
                        line,
                        token.column,
                        format!("array '{name}': negative dimension"),
                    ))
                }
            }
        }
        let count = element_count(&dims)
            .ok_or_else(|| ParseDiagnostic::new(line, 1, format!("array '{name}': dimensions overflow")))?;
        let mut elements = Vec::with_capacity(count.min(4096));
        while elements.len() < count {
            let Some((line, tokens)) = reader.next_tokens()? else {
                return Err(reader.eof(&format!(
                    "array '{name}' has {} of {count} elements",
                    elements.len()
                )));
            };
            if elements.len() + tokens.len() > count {
                return Err(ParseDiagnostic::new(
                    line,
                    1,
                    format!("array '{name}': more than {count} elements"),
                ));
            }
            for token in &tokens {
                elements.push(value_at(
                    line,
                    token,
                    def.base.data_type,
                    &format!("array '{name}'"),
                )?);
            }
        }
        array_values.push(ArrayInstance { dims, elements });
    }

    let Some((line, tokens)) = reader.next_tokens()? else {
        if started {
            return Err(reader.eof("expected row count"));
        }
        return Ok(None);
    };
    if tokens.len() != 1 {
        return Err(ParseDiagnostic::new(
            line,
            1,
            format!("row count: expected 1 value, got {}", tokens.len()),
        ));
    }
    let row_count = match value_at(line, &tokens[0], DataType::Long, "row count")? {
        Value::Long(n) if n >= 0 => n,
        _ => {
            return Err(ParseDiagnostic::new(
                line,
                tokens[0].column,
                "row count: negative",
            ))
        }
    };
    let rows = row_count as usize;

    let ncols = schema.columns.len();
    let mut column_data: Vec<Vec<Value>> = (0..ncols).map(|_| Vec::with_capacity(rows.min(4096))).collect();
    if ncols > 0 {
        for row in 1..=rows {
            let Some((line, tokens)) = reader.next_tokens()? else {
                return Err(reader.eof(&format!("expected row {row} of {rows}")));
            };
            if tokens.len() != ncols {
                return Err(ParseDiagnostic::new(
                    line,
                    1,
                    format!(
                        "row {row}: expected {ncols} {}, got {}",
                        plural(ncols),
                        tokens.len()
                    ),
                ));
            }
            for ((def, token), data) in schema.columns.iter().zip(&tokens).zip(&mut column_data) {
                data.push(value_at(
                    line,
                    token,
                    def.data_type,
                    &format!("column '{}'", def.name),
                )?);
            }
        }
    }

    Ok(Some(Page {
        parameter_values,
        array_values,
        column_data,
        row_count,
    }))
}

/// Appends the canonical text of a page to `out`.
pub fn encode_page_ascii(schema: &Schema, page: &Page, out: &mut String) -> Result<()> {
    if let Some(first) = page.validate(schema).into_iter().next() {
        return Err(SddsError::InvalidPage {
            page: 0,
            diagnostic: first,
        });
    }
    for value in &page.parameter_values {
        out.push_str(&format_value(value));
        out.push('\n');
    }
    for inst in &page.array_values {
        push_joined(out, inst.dims.iter().map(|d| d.to_string()));
        // One line per innermost-dimension run.
        let width = inst.dims.last().copied().unwrap_or(0).max(1) as usize;
        for chunk in inst.elements.chunks(width) {
            push_joined(out, chunk.iter().map(format_value));
        }
    }
    out.push_str(&page.row_count.to_string());
    out.push('\n');
    if !page.column_data.is_empty() {
        for row in 0..page.rows() {
            push_joined(out, page.column_data.iter().map(|c| format_value(&c[row])));
        }
    }
    Ok(())
}

fn push_joined(out: &mut String, items: impl Iterator<Item = String>) {
    for (i, item) in items.enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&item);
    }
    out.push('\n');
}

/// Writes one page in canonical ASCII form, returning the byte count.
pub fn write_page_ascii<W: Write>(out: &mut W, schema: &Schema, page: &Page) -> Result<usize> {
    let mut text = String::new();
    encode_page_ascii(schema, page, &mut text)?;
    out.write_all(text.as_bytes())?;
    Ok(text.len())
}
