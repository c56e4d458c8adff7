//! Self-describing data sets.
//!
//! A file starts with an ASCII header that declares every parameter
//! (per-page scalar), array (per-page multi-dimensional block) and column
//! (per-page vector), followed by zero or more pages of data in either a
//! readable ASCII form or a binary form whose byte order is declared in the
//! header. Readers on any platform decode binary files by honoring that
//! declaration.
//!
//! ```
//! use sdds::{DataMode, DataType, Dataset, Endian, FieldDef, Page, Schema, Value};
//!
//! let schema = Schema::new(DataMode::Binary, Endian::Big)
//!     .with_column(FieldDef::new("x", DataType::Double).with_units("m"));
//! let mut data = Dataset::new(schema);
//! data.pages.push(Page {
//!     column_data: vec![vec![Value::Double(0.5), Value::Double(1.5)]],
//!     row_count: 2,
//!     ..Page::default()
//! });
//!
//! let bytes = data.to_bytes()?;
//! assert_eq!(Dataset::from_bytes(&bytes)?, data);
//! # Ok::<(), sdds::SddsError>(())
//! ```

pub mod ascii;
pub mod binary;
pub mod error;
pub mod expr;
pub mod header;
pub mod io;
pub mod model;
pub mod plot;

pub use error::{DecodeError, ParseDiagnostic, Result, SddsError};
pub use io::{encode_dataset, read_dataset, read_file, write_dataset, write_file, DatasetReader};
pub use model::{
    ArrayDef, ArrayInstance, Category, DataMode, DataType, Dataset, Diagnostic, Endian, FieldDef, Page,
    Schema, Value,
};

pub fn validate_schema(schema: &Schema) -> Vec<Diagnostic> {
    schema.validate()
}

pub fn validate_page(schema: &Schema, page: &Page) -> Vec<Diagnostic> {
    page.validate(schema)
}

pub fn find_field(schema: &Schema, category: Category, name: &str) -> Option<usize> {
    schema.find_field(category, name)
}

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
struct ReadmeDoctests;
