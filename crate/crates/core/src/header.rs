//! The ASCII header: an `SDDS1` magic line followed by namelist-style
//! `&kind key=value, ... &end` commands, the last of which is `&data`.
//!
//! ```text
//! SDDS1
//! &parameter name=t, type=double, units=s, &end
//! &column name=x, type=long, &end
//! &data mode=binary, endian=big, &end
//! ```
//!
//! Parsing is strict: unknown command kinds, unknown keys, duplicate keys
//! and malformed tokens are all rejected with a line/column diagnostic.
//! Emission is canonical, so a schema always serializes to the same bytes.

use std::fmt;

use crate::error::{ParseDiagnostic, Result, SddsError};
use crate::model::{
    is_valid_name, ArrayDef, Category, DataMode, DataType, Endian, FieldDef, Schema, MAX_ARRAY_DIMS,
};

pub const MAGIC: &str = "SDDS1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Description,
    Parameter,
    Array,
    Column,
    Data,
}

impl CommandKind {
    fn from_word(word: &str) -> Option<Self> {
        Some(match word {
            "description" => CommandKind::Description,
            "parameter" => CommandKind::Parameter,
            "array" => CommandKind::Array,
            "column" => CommandKind::Column,
            "data" => CommandKind::Data,
            _ => return None,
        })
    }

    pub fn word(self) -> &'static str {
        match self {
            CommandKind::Description => "description",
            CommandKind::Parameter => "parameter",
            CommandKind::Array => "array",
            CommandKind::Column => "column",
            CommandKind::Data => "data",
        }
    }

    fn allowed_keys(self) -> &'static [&'static str] {
        match self {
            CommandKind::Description => &["text", "contents"],
            CommandKind::Parameter | CommandKind::Column => &["name", "type", "units", "description"],
            CommandKind::Array => &["name", "type", "units", "description", "dimensions"],
            CommandKind::Data => &["mode", "endian"],
        }
    }
}

impl fmt::Display for CommandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "&{}", self.word())
    }
}

/// One parsed `&kind ... &end` command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Command {
    pub kind: CommandKind,
    pub fields: Vec<(String, String)>,
    pub line: usize,
    /// Source position (line, column) of each key, parallel to `fields`.
    pub key_positions: Vec<(usize, usize)>,
}

impl Command {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    fn position_of(&self, key: &str) -> (usize, usize) {
        self.fields
            .iter()
            .position(|(k, _)| k == key)
            .map(|i| self.key_positions[i])
            .unwrap_or((self.line, 1))
    }
}

struct Scanner<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Scanner<'a> {
    fn new(src: &'a [u8], line: usize) -> Self {
        Scanner {
            src,
            pos: 0,
            line,
            col: 1,
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn diag(&self, message: impl Into<String>) -> ParseDiagnostic {
        ParseDiagnostic::new(self.line, self.col, message)
    }

    fn bump(&mut self) -> Result<Option<u8>, ParseDiagnostic> {
        let Some(b) = self.peek() else {
            return Ok(None);
        };
        if b >= 0x80 {
            return Err(self.diag(format!("non-ASCII byte 0x{b:02x} in header")));
        }
        if (b < 0x20 && !matches!(b, b'\t' | b'\n' | b'\r')) || b == 0x7f {
            return Err(self.diag(format!("control byte 0x{b:02x} in header")));
        }
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Ok(Some(b))
    }

    fn skip_ws(&mut self) -> Result<(), ParseDiagnostic> {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\r' | b'\n')) {
            self.bump()?;
        }
        Ok(())
    }

    fn skip_ws_and_comments(&mut self) -> Result<(), ParseDiagnostic> {
        loop {
            self.skip_ws()?;
            if self.peek() != Some(b'!') {
                return Ok(());
            }
            while !matches!(self.peek(), None | Some(b'\n')) {
                self.bump()?;
            }
        }
    }

    fn word(&mut self) -> Result<String, ParseDiagnostic> {
        let mut out = String::new();
        if let Some(b) = self.peek() {
            if b.is_ascii_alphabetic() || b == b'_' {
                while let Some(b) = self.peek() {
                    if !(b.is_ascii_alphanumeric() || b == b'_') {
                        break;
                    }
                    self.bump()?;
                    out.push(char::from(b));
                }
            }
        }
        Ok(out)
    }

    fn describe_next(&self) -> String {
        match self.peek() {
            None => "end of input".to_string(),
            Some(b) if b.is_ascii_graphic() => format!("'{}'", char::from(b)),
            Some(b) => format!("byte 0x{b:02x}"),
        }
    }

    fn value(&mut self, key: &str) -> Result<String, ParseDiagnostic> {
        if self.peek() == Some(b'"') {
            let (line, col) = (self.line, self.col);
            self.bump()?;
            let mut out = String::new();
            loop {
                match self.bump()? {
                    None => return Err(ParseDiagnostic::new(line, col, "unterminated quote")),
                    Some(b'"') => return Ok(out),
                    Some(b'\\') => {
                        let (el, ec) = (self.line, self.col.saturating_sub(1));
                        match self.bump()? {
                            Some(b'"') => out.push('"'),
                            Some(b'\\') => out.push('\\'),
                            Some(b'n') => out.push('\n'),
                            Some(b't') => out.push('\t'),
                            None => return Err(ParseDiagnostic::new(line, col, "unterminated quote")),
                            Some(other) => {
                                return Err(ParseDiagnostic::new(
                                    el,
                                    ec,
                                    format!("bad escape '\\{}'", char::from(other).escape_default()),
                                ))
                            }
                        }
                    }
                    Some(b) => out.push(char::from(b)),
                }
            }
        }
        let mut out = String::new();
        while let Some(b) = self.peek() {
            if b.is_ascii_whitespace() || matches!(b, b',' | b'"' | b'&') {
                break;
            }
            self.bump()?;
            out.push(char::from(b));
        }
        if out.is_empty() {
            return Err(self.diag(format!(
                "missing value for key '{key}', found {}",
                self.describe_next()
            )));
        }
        Ok(out)
    }

    /// Parses one command; the scanner must sit on its `&`.
    fn command(&mut self) -> Result<Command, ParseDiagnostic> {
        let (line, col) = (self.line, self.col);
        if self.bump()? != Some(b'&') {
            return Err(ParseDiagnostic::new(line, col, "expected '&'"));
        }
        self.skip_ws()?;
        let word = self.word()?;
        let kind = match CommandKind::from_word(&word) {
            Some(kind) => kind,
            None if word.is_empty() => {
                return Err(self.diag(format!("expected command kind, found {}", self.describe_next())))
            }
            None if word == "end" => return Err(ParseDiagnostic::new(line, col, "'&end' without a command")),
            None => {
                return Err(ParseDiagnostic::new(
                    line,
                    col,
                    format!("unknown command kind '&{word}'"),
                ))
            }
        };
        let mut cmd = Command {
            kind,
            fields: Vec::new(),
            line,
            key_positions: Vec::new(),
        };
        let mut after_field = false;
        loop {
            self.skip_ws()?;
            match self.peek() {
                None => return Err(self.diag(format!("missing &end for {kind} command on line {line}"))),
                Some(b'&') => {
                    let (al, ac) = (self.line, self.col);
                    self.bump()?;
                    self.skip_ws()?;
                    let word = self.word()?;
                    if word == "end" {
                        return Ok(cmd);
                    }
                    return Err(ParseDiagnostic::new(
                        al,
                        ac,
                        format!("missing &end for {kind} command on line {line}"),
                    ));
                }
                Some(b',') if after_field => {
                    self.bump()?;
                    after_field = false;
                }
                Some(b) if b.is_ascii_alphabetic() || b == b'_' => {
                    let (kl, kc) = (self.line, self.col);
                    let key = self.word()?;
                    if cmd.fields.iter().any(|(k, _)| *k == key) {
                        return Err(ParseDiagnostic::new(kl, kc, format!("duplicate key '{key}'")));
                    }
                    self.skip_ws()?;
                    if self.peek() != Some(b'=') {
                        return Err(self.diag(format!(
                            "expected '=' after key '{key}', found {}",
                            self.describe_next()
                        )));
                    }
                    self.bump()?;
                    self.skip_ws()?;
                    let value = self.value(&key)?;
                    cmd.fields.push((key, value));
                    cmd.key_positions.push((kl, kc));
                    after_field = true;
                }
                Some(_) => {
                    return Err(self.diag(format!("unexpected {}", self.describe_next())));
                }
            }
        }
    }
}

/// Tokenizes a single `&kind ... &end` command found on `line`.
pub fn parse_command(text: &str, line: usize) -> Result<Command, ParseDiagnostic> {
    let mut sc = Scanner::new(text.as_bytes(), line);
    sc.skip_ws()?;
    let cmd = sc.command()?;
    sc.skip_ws()?;
    if sc.peek().is_some() {
        return Err(sc.diag(format!("unexpected {} after &end", sc.describe_next())));
    }
    Ok(cmd)
}

#[derive(Default)]
struct SchemaBuilder {
    schema: Schema,
    seen_description: bool,
}

impl SchemaBuilder {
    fn apply(&mut self, cmd: &Command) -> Result<(), ParseDiagnostic> {
        for ((key, _), &(l, c)) in cmd.fields.iter().zip(&cmd.key_positions) {
            if !cmd.kind.allowed_keys().contains(&key.as_str()) {
                return Err(ParseDiagnostic::new(
                    l,
                    c,
                    format!("unknown field key '{key}' for {}", cmd.kind),
                ));
            }
        }
        let at = |key: &str, msg: String| {
            let (l, c) = cmd.position_of(key);
            ParseDiagnostic::new(l, c, msg)
        };
        let required = |key: &str| {
            cmd.get(key).ok_or_else(|| {
                ParseDiagnostic::new(
                    cmd.line,
                    1,
                    format!("missing required field '{key}' in {}", cmd.kind),
                )
            })
        };
        match cmd.kind {
            CommandKind::Description => {
                if self.seen_description {
                    return Err(ParseDiagnostic::new(
                        cmd.line,
                        1,
                        "duplicate &description command",
                    ));
                }
                self.seen_description = true;
                self.schema.description_text = cmd.get("text").map(str::to_owned);
                self.schema.description_contents = cmd.get("contents").map(str::to_owned);
            }
            CommandKind::Parameter | CommandKind::Array | CommandKind::Column => {
                let name = required("name")?;
                let type_token = required("type")?;
                if !is_valid_name(name) {
                    return Err(at("name", format!("bad name '{name}'")));
                }
                let data_type: DataType = type_token.parse().map_err(|e| at("type", e))?;
                let def = FieldDef {
                    name: name.to_owned(),
                    data_type,
                    units: cmd.get("units").map(str::to_owned),
                    description: cmd.get("description").map(str::to_owned),
                };
                let category = match cmd.kind {
                    CommandKind::Parameter => Category::Parameter,
                    CommandKind::Array => Category::Array,
                    _ => Category::Column,
                };
                if self.schema.find_field(category, name).is_some() {
                    return Err(at("name", format!("duplicate {category} name '{name}'")));
                }
                match category {
                    Category::Parameter => self.schema.parameters.push(def),
                    Category::Column => self.schema.columns.push(def),
                    Category::Array => {
                        let dim_count = match cmd.get("dimensions") {
                            None => 1,
                            Some(text) => text
                                .parse::<usize>()
                                .ok()
                                .filter(|d| (1..=MAX_ARRAY_DIMS).contains(d))
                                .ok_or_else(|| {
                                    at(
                                        "dimensions",
                                        format!(
                                            "array '{name}' dim_count out of range: '{text}' (expected 1..={MAX_ARRAY_DIMS})"
                                        ),
                                    )
                                })?,
                        };
                        self.schema.arrays.push(ArrayDef::new(def, dim_count));
                    }
                }
            }
            CommandKind::Data => {
                self.schema.mode = required("mode")?.parse().map_err(|e| at("mode", e))?;
                if let Some(endian) = cmd.get("endian") {
                    self.schema.endian = endian.parse().map_err(|e| at("endian", e))?;
                }
            }
        }
        Ok(())
    }
}

/// Parses a header, returning its schema and the offset of the first data
/// byte (just past the newline ending the `&data` line).
pub fn parse_header(input: &[u8]) -> Result<(Schema, usize), ParseDiagnostic> {
    let start = if input.starts_with(b"SDDS1\n") {
        6
    } else if input.starts_with(b"SDDS1\r\n") {
        7
    } else if input.starts_with(b"SDDS") {
        return Err(ParseDiagnostic::new(1, 1, "unsupported version magic"));
    } else {
        return Err(ParseDiagnostic::new(1, 1, "missing SDDS1 magic"));
    };
    let mut sc = Scanner::new(input, 2);
    sc.pos = start;
    let mut builder = SchemaBuilder::default();
    loop {
        sc.skip_ws_and_comments()?;
        match sc.peek() {
            None => return Err(sc.diag("missing &data command")),
            Some(b'&') => {}
            Some(_) => {
                return Err(sc.diag(format!(
                    "expected '&' to start a command, found {}",
                    sc.describe_next()
                )))
            }
        }
        let cmd = sc.command()?;
        builder.apply(&cmd)?;
        if cmd.kind == CommandKind::Data {
            break;
        }
    }
    while matches!(sc.peek(), Some(b' ' | b'\t')) {
        sc.bump()?;
    }
    if sc.peek() == Some(b'\r') && input.get(sc.pos + 1) == Some(&b'\n') {
        sc.pos += 1;
    }
    match sc.peek() {
        None => {}
        Some(b'\n') => sc.pos += 1,
        Some(_) => {
            return Err(sc.diag(format!(
                "&data must be the final command, found {}",
                sc.describe_next()
            )))
        }
    }
    let schema = builder.schema;
    if let Some(first) = schema.validate().into_iter().next() {
        return Err(ParseDiagnostic::new(sc.line, 1, first.message));
    }
    Ok((schema, sc.pos))
}

fn needs_quotes(text: &str) -> bool {
    text.is_empty()
        || text
            .bytes()
            .any(|b| !b.is_ascii_graphic() || matches!(b, b',' | b'"' | b'&' | b'\\' | b'!'))
}

fn push_value(out: &mut String, text: &str) {
    if !needs_quotes(text) {
        out.push_str(text);
        return;
    }
    out.push('"');
    for ch in text.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            _ => out.push(ch),
        }
    }
    out.push('"');
}

fn push_command(out: &mut String, kind: CommandKind, fields: &[(&str, &str)]) {
    out.push('&');
    out.push_str(kind.word());
    for (key, value) in fields {
        out.push(' ');
        out.push_str(key);
        out.push('=');
        push_value(out, value);
        out.push(',');
    }
    out.push_str(" &end\n");
}

fn field_command(out: &mut String, kind: CommandKind, def: &FieldDef, dims: Option<&str>) {
    let mut fields = vec![("name", def.name.as_str()), ("type", def.data_type.token())];
    if let Some(units) = &def.units {
        fields.push(("units", units));
    }
    if let Some(description) = &def.description {
        fields.push(("description", description));
    }
    if let Some(dims) = dims {
        fields.push(("dimensions", dims));
    }
    push_command(out, kind, &fields);
}

/// Canonical header bytes for a valid schema.
pub fn emit_header(schema: &Schema) -> Result<Vec<u8>> {
    if let Some(first) = schema.validate().into_iter().next() {
        return Err(SddsError::InvalidSchema(first));
    }
    let mut out = String::from("SDDS1\n");
    let mut desc = Vec::new();
    if let Some(text) = &schema.description_text {
        desc.push(("text", text.as_str()));
    }
    if let Some(contents) = &schema.description_contents {
        desc.push(("contents", contents.as_str()));
    }
    if !desc.is_empty() {
        push_command(&mut out, CommandKind::Description, &desc);
    }
    for def in &schema.parameters {
        field_command(&mut out, CommandKind::Parameter, def, None);
    }
    for array in &schema.arrays {
        let dims = array.dim_count.to_string();
        field_command(&mut out, CommandKind::Array, &array.base, Some(&dims));
    }
    for def in &schema.columns {
        field_command(&mut out, CommandKind::Column, def, None);
    }
    let mut data = vec![("mode", schema.mode.token())];
    if schema.mode == DataMode::Binary || schema.endian != Endian::Little {
        data.push(("endian", schema.endian.token()));
    }
    push_command(&mut out, CommandKind::Data, &data);
    Ok(out.into_bytes())
}
