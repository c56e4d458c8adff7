//! The in-memory data model: types, schema, pages and datasets, plus the
//! validity rules every codec relies on.

use std::fmt;
use std::str::FromStr;

/// Largest number of dimensions an array definition may declare.
pub const MAX_ARRAY_DIMS: usize = 8;

/// One of the seven storable element types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DataType {
    Short,
    Long,
    Long64,
    Float,
    Double,
    String,
    Character,
}

impl DataType {
    pub const ALL: [DataType; 7] = [
        DataType::Short,
        DataType::Long,
        DataType::Long64,
        DataType::Float,
        DataType::Double,
        DataType::String,
        DataType::Character,
    ];

    /// Encoded width in bytes, `None` for the variable-length string type.
    pub fn binary_width(self) -> Option<usize> {
        match self {
            DataType::Short => Some(2),
            DataType::Long => Some(4),
            DataType::Long64 => Some(8),
            DataType::Float => Some(4),
            DataType::Double => Some(8),
            DataType::Character => Some(1),
            DataType::String => None,
        }
    }

    /// Smallest number of bytes one encoded value can occupy.
    pub fn min_binary_width(self) -> usize {
        self.binary_width().unwrap_or(4)
    }

    pub fn is_numeric(self) -> bool {
        !matches!(self, DataType::String | DataType::Character)
    }

    pub fn is_integer(self) -> bool {
        matches!(self, DataType::Short | DataType::Long | DataType::Long64)
    }

    pub fn token(self) -> &'static str {
        match self {
            DataType::Short => "short",
            DataType::Long => "long",
            DataType::Long64 => "long64",
            DataType::Float => "float",
            DataType::Double => "double",
            DataType::String => "string",
            DataType::Character => "character",
        }
    }
}

impl fmt::Display for DataType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for DataType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DataType::ALL
            .into_iter()
            .find(|t| t.token() == s)
            .ok_or_else(|| format!("bad type token '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum DataMode {
    #[default]
    Ascii,
    Binary,
}

impl DataMode {
    pub fn token(self) -> &'static str {
        match self {
            DataMode::Ascii => "ascii",
            DataMode::Binary => "binary",
        }
    }
}

impl fmt::Display for DataMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for DataMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ascii" => Ok(DataMode::Ascii),
            "binary" => Ok(DataMode::Binary),
            _ => Err(format!("bad mode token '{s}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Endian {
    #[default]
    Little,
    Big,
}

impl Endian {
    pub fn token(self) -> &'static str {
        match self {
            Endian::Little => "little",
            Endian::Big => "big",
        }
    }
}

impl fmt::Display for Endian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Endian {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "little" => Ok(Endian::Little),
            "big" => Ok(Endian::Big),
            _ => Err(format!("bad endian token '{s}'")),
        }
    }
}

/// A single typed scalar.
///
/// Equality is bitwise for the floating-point variants: `-0.0 != 0.0` and a
/// NaN equals another NaN only when the payloads match. Use
/// [`Value::eq_canonical_nan`] when every NaN should compare equal.
#[derive(Debug, Clone)]
pub enum Value {
    Short(i16),
    Long(i32),
    Long64(i64),
    Float(f32),
    Double(f64),
    Str(String),
    Char(u8),
}

impl Value {
    pub fn data_type(&self) -> DataType {
        match self {
            Value::Short(_) => DataType::Short,
            Value::Long(_) => DataType::Long,
            Value::Long64(_) => DataType::Long64,
            Value::Float(_) => DataType::Float,
            Value::Double(_) => DataType::Double,
            Value::Str(_) => DataType::String,
            Value::Char(_) => DataType::Character,
        }
    }

    /// Numeric value widened to binary64, `None` for text types.
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Value::Short(v) => Some(f64::from(v)),
            Value::Long(v) => Some(f64::from(v)),
            Value::Long64(v) => Some(v as f64),
            Value::Float(v) => Some(f64::from(v)),
            Value::Double(v) => Some(v),
            Value::Str(_) | Value::Char(_) => None,
        }
    }

    /// Like `==`, but any two NaNs of the same type compare equal.
    pub fn eq_canonical_nan(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Float(a), Value::Float(b)) if a.is_nan() && b.is_nan() => true,
            (Value::Double(a), Value::Double(b)) if a.is_nan() && b.is_nan() => true,
            _ => self == other,
        }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Short(a), Value::Short(b)) => a == b,
            (Value::Long(a), Value::Long(b)) => a == b,
            (Value::Long64(a), Value::Long64(b)) => a == b,
            (Value::Float(a), Value::Float(b)) => a.to_bits() == b.to_bits(),
            (Value::Double(a), Value::Double(b)) => a.to_bits() == b.to_bits(),
            (Value::Str(a), Value::Str(b)) => a == b,
            (Value::Char(a), Value::Char(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Value {}

/// A named, typed parameter or column definition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDef {
    pub name: String,
    pub data_type: DataType,
    pub units: Option<String>,
    pub description: Option<String>,
}

impl FieldDef {
    pub fn new(name: impl Into<String>, data_type: DataType) -> Self {
        FieldDef {
            name: name.into(),
            data_type,
            units: None,
            description: None,
        }
    }

    pub fn with_units(mut self, units: impl Into<String>) -> Self {
        self.units = Some(units.into());
        self
    }

    pub fn with_description(mut self, description: impl Into<String>) -> Self {
        self.description = Some(description.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrayDef {
    pub base: FieldDef,
    pub dim_count: usize,
}

impl ArrayDef {
    pub fn new(base: FieldDef, dim_count: usize) -> Self {
        ArrayDef { base, dim_count }
    }

    pub fn name(&self) -> &str {
        &self.base.name
    }
}

/// The self-description carried by every file header.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Schema {
    pub description_text: Option<String>,
    pub description_contents: Option<String>,
    pub parameters: Vec<FieldDef>,
    pub arrays: Vec<ArrayDef>,
    pub columns: Vec<FieldDef>,
    pub mode: DataMode,
    pub endian: Endian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Category {
    Parameter,
    Array,
    Column,
}

impl Category {
    pub fn label(self) -> &'static str {
        match self {
            Category::Parameter => "parameter",
            Category::Array => "array",
            Category::Column => "column",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One validation finding. An empty list of these means "valid".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub message: String,
}

impl Diagnostic {
    pub(crate) fn new(message: impl Into<String>) -> Self {
        Diagnostic {
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// `[A-Za-z_][A-Za-z0-9_.:]*`
pub fn is_valid_name(name: &str) -> bool {
    let mut bytes = name.bytes();
    match bytes.next() {
        Some(b) if b.is_ascii_alphabetic() || b == b'_' => {}
        _ => return false,
    }
    bytes.all(|b| b.is_ascii_alphanumeric() || matches!(b, b'_' | b'.' | b':'))
}

// Header text must stay printable ASCII; newline and tab have escapes.
fn is_header_safe(text: &str) -> bool {
    text.bytes()
        .all(|b| (0x20..0x7f).contains(&b) || b == b'\n' || b == b'\t')
}

impl Schema {
    pub fn new(mode: DataMode, endian: Endian) -> Self {
        Schema {
            mode,
            endian,
            ..Schema::default()
        }
    }

    pub fn with_parameter(mut self, def: FieldDef) -> Self {
        self.parameters.push(def);
        self
    }

    pub fn with_array(mut self, def: ArrayDef) -> Self {
        self.arrays.push(def);
        self
    }

    pub fn with_column(mut self, def: FieldDef) -> Self {
        self.columns.push(def);
        self
    }

    /// Index of the definition named exactly `name` within `category`.
    pub fn find_field(&self, category: Category, name: &str) -> Option<usize> {
        match category {
            Category::Parameter => self.parameters.iter().position(|d| d.name == name),
            Category::Array => self.arrays.iter().position(|d| d.base.name == name),
            Category::Column => self.columns.iter().position(|d| d.name == name),
        }
    }

    /// Every rule violation in the schema, in declaration order.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        for (label, text) in [
            ("description text", &self.description_text),
            ("description contents", &self.description_contents),
        ] {
            if let Some(text) = text {
                if !is_header_safe(text) {
                    out.push(Diagnostic::new(format!(
                        "{label} contains characters that cannot appear in a header"
                    )));
                }
            }
        }
        check_fields(Category::Parameter, self.parameters.iter(), &mut out);
        check_fields(Category::Array, self.arrays.iter().map(|a| &a.base), &mut out);
        for array in &self.arrays {
            if !(1..=MAX_ARRAY_DIMS).contains(&array.dim_count) {
                out.push(Diagnostic::new(format!(
                    "array '{}' dim_count out of range: {} (expected 1..={MAX_ARRAY_DIMS})",
                    array.base.name, array.dim_count
                )));
            }
        }
        check_fields(Category::Column, self.columns.iter(), &mut out);
        out
    }
}

fn check_fields<'a>(category: Category, defs: impl Iterator<Item = &'a FieldDef>, out: &mut Vec<Diagnostic>) {
    let mut seen: Vec<&str> = Vec::new();
    for def in defs {
        if !is_valid_name(&def.name) {
            out.push(Diagnostic::new(format!(
                "bad {category} name '{}'",
                def.name.escape_debug()
            )));
        }
        if seen.contains(&def.name.as_str()) {
            out.push(Diagnostic::new(format!(
                "duplicate {category} name '{}'",
                def.name
            )));
        } else {
            seen.push(&def.name);
        }
        for (label, text) in [("units", &def.units), ("description", &def.description)] {
            if let Some(text) = text {
                if !is_header_safe(text) {
                    out.push(Diagnostic::new(format!(
                        "{category} '{}' {label} contains characters that cannot appear in a header",
                        def.name
                    )));
                }
            }
        }
    }
}

/// The per-page contents of one array: its shape and row-major elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrayInstance {
    pub dims: Vec<i32>,
    pub elements: Vec<Value>,
}

impl ArrayInstance {
    pub fn new(dims: Vec<i32>, elements: Vec<Value>) -> Self {
        ArrayInstance { dims, elements }
    }

    /// Product of the dimensions, `None` when a dimension is negative or the
    /// product overflows.
    pub fn expected_len(&self) -> Option<usize> {
        element_count(&self.dims)
    }
}

pub(crate) fn element_count(dims: &[i32]) -> Option<usize> {
    dims.iter().try_fold(1usize, |acc, &d| {
        usize::try_from(d).ok().and_then(|d| acc.checked_mul(d))
    })
}

/// One record of a schema.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Page {
    pub parameter_values: Vec<Value>,
    pub array_values: Vec<ArrayInstance>,
    pub column_data: Vec<Vec<Value>>,
    pub row_count: i32,
}

impl Page {
    pub fn rows(&self) -> usize {
        usize::try_from(self.row_count).unwrap_or(0)
    }

    /// Every way this page fails to conform to `schema`.
    ///
    /// Never panics, whatever the shape of the page.
    pub fn validate(&self, schema: &Schema) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        if self.row_count < 0 {
            out.push(Diagnostic::new(format!("negative row_count {}", self.row_count)));
        }
        if self.parameter_values.len() != schema.parameters.len() {
            out.push(Diagnostic::new(format!(
                "page has {} parameter values, schema declares {}",
                self.parameter_values.len(),
                schema.parameters.len()
            )));
        }
        for (def, value) in schema.parameters.iter().zip(&self.parameter_values) {
            if value.data_type() != def.data_type {
                out.push(Diagnostic::new(format!(
                    "parameter '{}' holds {} value, expected {}",
                    def.name,
                    value.data_type(),
                    def.data_type
                )));
            }
        }
        if self.array_values.len() != schema.arrays.len() {
            out.push(Diagnostic::new(format!(
                "page has {} array values, schema declares {}",
                self.array_values.len(),
                schema.arrays.len()
            )));
        }
        for (def, inst) in schema.arrays.iter().zip(&self.array_values) {
            let name = def.name();
            if inst.dims.len() != def.dim_count {
                out.push(Diagnostic::new(format!(
                    "array '{name}' has {} dimensions, expected {}",
                    inst.dims.len(),
                    def.dim_count
                )));
            }
            match inst.expected_len() {
                None => out.push(Diagnostic::new(format!(
                    "array '{name}' has invalid dimensions {:?}",
                    inst.dims
                ))),
                Some(n) if n != inst.elements.len() => out.push(Diagnostic::new(format!(
                    "array '{name}' has {} elements, expected {n}",
                    inst.elements.len()
                ))),
                Some(_) => {}
            }
            if let Some(bad) = inst.elements.iter().find(|v| v.data_type() != def.base.data_type) {
                out.push(Diagnostic::new(format!(
                    "array '{name}' holds {} element, expected {}",
                    bad.data_type(),
                    def.base.data_type
                )));
            }
        }
        if self.column_data.len() != schema.columns.len() {
            out.push(Diagnostic::new(format!(
                "page has {} column vectors, schema declares {}",
                self.column_data.len(),
                schema.columns.len()
            )));
        }
        for (def, data) in schema.columns.iter().zip(&self.column_data) {
            if i64::try_from(data.len()).ok() != Some(i64::from(self.row_count)) {
                out.push(Diagnostic::new(format!(
                    "column '{}' length {} != row_count {}",
                    def.name,
                    data.len(),
                    self.row_count
                )));
            }
            if let Some(bad) = data.iter().find(|v| v.data_type() != def.data_type) {
                out.push(Diagnostic::new(format!(
                    "column '{}' holds {} value, expected {}",
                    def.name,
                    bad.data_type(),
                    def.data_type
                )));
            }
        }
        out
    }

    /// Like `==` but NaNs compare equal regardless of payload.
    pub fn eq_canonical_nan(&self, other: &Page) -> bool {
        fn all(a: &[Value], b: &[Value]) -> bool {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.eq_canonical_nan(y))
        }
        self.row_count == other.row_count
            && all(&self.parameter_values, &other.parameter_values)
            && self.array_values.len() == other.array_values.len()
            && self
                .array_values
                .iter()
                .zip(&other.array_values)
                .all(|(a, b)| a.dims == b.dims && all(&a.elements, &b.elements))
            && self.column_data.len() == other.column_data.len()
            && self
                .column_data
                .iter()
                .zip(&other.column_data)
                .all(|(a, b)| all(a, b))
    }
}

/// A schema and its ordered pages. Zero pages is a valid dataset.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Dataset {
    pub schema: Schema,
    pub pages: Vec<Page>,
}

impl Dataset {
    pub fn new(schema: Schema) -> Self {
        Dataset {
            schema,
            pages: Vec::new(),
        }
    }

    /// Schema diagnostics, then per-page diagnostics prefixed by page number.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = self.schema.validate();
        if !out.is_empty() {
            return out;
        }
        for (i, page) in self.pages.iter().enumerate() {
            out.extend(
                page.validate(&self.schema)
                    .into_iter()
                    .map(|d| Diagnostic::new(format!("page {}: {}", i + 1, d.message))),
            );
        }
        out
    }

    /// Field-identical to `other` with every NaN treated as equal.
    pub fn eq_canonical_nan(&self, other: &Dataset) -> bool {
        self.schema == other.schema
            && self.pages.len() == other.pages.len()
            && self
                .pages
                .iter()
                .zip(&other.pages)
                .all(|(a, b)| a.eq_canonical_nan(b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy() -> Schema {
        Schema::default()
            .with_column(FieldDef::new("x", DataType::Double))
            .with_column(FieldDef::new("y", DataType::Double))
    }

    #[test]
    fn well_formed_schema_has_no_diagnostics() {
        assert!(xy().validate().is_empty());
    }

    #[test]
    fn duplicate_parameter_is_reported_once() {
        let s = Schema::default()
            .with_parameter(FieldDef::new("t", DataType::Double))
            .with_parameter(FieldDef::new("t", DataType::Long));
        let d = s.validate();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].message, "duplicate parameter name 't'");
    }

    #[test]
    fn cross_category_duplicates_are_allowed() {
        let s = Schema::default()
            .with_parameter(FieldDef::new("t", DataType::Double))
            .with_column(FieldDef::new("t", DataType::Double));
        assert!(s.validate().is_empty());
    }

    #[test]
    fn array_dim_count_bounds() {
        for (dims, bad) in [(0, true), (1, false), (8, false), (9, true)] {
            let s = Schema::default().with_array(ArrayDef::new(FieldDef::new("a", DataType::Long), dims));
            let d = s.validate();
            assert_eq!(d.len(), usize::from(bad), "dims={dims}");
            if bad {
                assert!(d[0].message.contains("dim_count out of range"));
            }
        }
    }

    #[test]
    fn identifier_alphabet() {
        for ok in ["x", "_a", "S:BPM.x1", "A_b9"] {
            assert!(is_valid_name(ok), "{ok}");
        }
        for bad in ["", "1x", ".a", "a b", "a-b", "é"] {
            assert!(!is_valid_name(bad), "{bad}");
        }
    }

    #[test]
    fn non_ascii_units_rejected() {
        let s = Schema::default().with_column(FieldDef::new("x", DataType::Double).with_units("µm"));
        assert_eq!(s.validate().len(), 1);
    }

    #[test]
    fn empty_page_is_valid() {
        let page = Page::default();
        assert!(page.validate(&Schema::default()).is_empty());
    }

    #[test]
    fn short_column_vector() {
        let s = Schema::default().with_column(FieldDef::new("x", DataType::Double));
        let page = Page {
            column_data: vec![vec![Value::Double(1.0); 3]],
            row_count: 4,
            ..Page::default()
        };
        let d = page.validate(&s);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].message, "column 'x' length 3 != row_count 4");
    }

    #[test]
    fn array_element_count_mismatch() {
        let s = Schema::default().with_array(ArrayDef::new(FieldDef::new("a", DataType::Long), 2));
        let page = Page {
            array_values: vec![ArrayInstance::new(vec![2, 3], vec![Value::Long(0); 5])],
            ..Page::default()
        };
        let d = page.validate(&s);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].message, "array 'a' has 5 elements, expected 6");
    }

    #[test]
    fn validate_page_is_total_on_garbage() {
        let s = xy().with_parameter(FieldDef::new("p", DataType::Long));
        let page = Page {
            parameter_values: vec![Value::Str("no".into()), Value::Char(1)],
            array_values: vec![ArrayInstance::new(vec![-1, i32::MAX, i32::MAX], vec![])],
            column_data: vec![vec![Value::Long(1)]],
            row_count: -3,
        };
        assert!(!page.validate(&s).is_empty());
    }

    #[test]
    fn find_field_is_exact() {
        let s = xy().with_parameter(FieldDef::new("x", DataType::Long));
        assert_eq!(s.find_field(Category::Column, "y"), Some(1));
        assert_eq!(s.find_field(Category::Column, "z"), None);
        assert_eq!(s.find_field(Category::Parameter, "X"), None);
        assert_eq!(s.find_field(Category::Parameter, "x"), Some(0));
    }

    #[test]
    fn float_equality_is_bitwise() {
        assert_ne!(Value::Double(0.0), Value::Double(-0.0));
        assert_eq!(Value::Double(f64::NAN), Value::Double(f64::NAN));
        let odd = f64::from_bits(0x7ff8_0000_0000_0001);
        assert_ne!(Value::Double(odd), Value::Double(f64::NAN));
        assert!(Value::Double(odd).eq_canonical_nan(&Value::Double(f64::NAN)));
        assert_ne!(Value::Long(1), Value::Long64(1));
    }
}
