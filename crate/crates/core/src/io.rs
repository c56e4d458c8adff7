//! Whole-file reading and writing.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::ascii::{encode_page_ascii, read_page_ascii, AsciiReader};
use crate::binary::{encode_page_binary, read_page_binary, BinaryCursor};
use crate::error::{Result, SddsError};
use crate::header::{emit_header, parse_header};
use crate::model::{ArrayInstance, DataMode, Dataset, Diagnostic, Endian, Page, Schema, Value};

enum Body<'a> {
    Ascii(AsciiReader<'a>),
    Binary(BinaryCursor<'a>),
}

/// Page-at-a-time reader over an in-memory file image.
pub struct DatasetReader<'a> {
    schema: Schema,
    body: Body<'a>,
    done: bool,
}

impl<'a> DatasetReader<'a> {
    pub fn new(input: &'a [u8]) -> Result<Self> {
        let (schema, start) = parse_header(input).map_err(SddsError::Header)?;
        let data = &input[start..];
        let body = match schema.mode {
            DataMode::Ascii => {
                let first_line = 1 + input[..start].iter().filter(|&&b| b == b'\n').count();
                Body::Ascii(AsciiReader::new(data, first_line))
            }
            DataMode::Binary => Body::Binary(BinaryCursor::with_base(data, schema.endian, start as u64)),
        };
        Ok(DatasetReader {
            schema,
            body,
            done: false,
        })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    /// The next page, `None` once the data ends cleanly.
    pub fn next_page(&mut self) -> Result<Option<Page>> {
        if self.done {
            return Ok(None);
        }
        let page = match &mut self.body {
            Body::Ascii(r) => read_page_ascii(r, &self.schema).map_err(SddsError::Ascii),
            Body::Binary(c) => read_page_binary(c, &self.schema).map_err(SddsError::Binary),
        };
        if !matches!(page, Ok(Some(_))) {
            self.done = true;
        }
        page
    }

    pub fn into_dataset(mut self) -> Result<Dataset> {
        let mut pages = Vec::new();
        while let Some(page) = self.next_page()? {
            pages.push(page);
        }
        Ok(Dataset {
            schema: self.schema,
            pages,
        })
    }
}

/// Parses a complete file image.
pub fn read_dataset(input: &[u8]) -> Result<Dataset> {
    DatasetReader::new(input)?.into_dataset()
}

pub fn read_file(path: impl AsRef<Path>) -> Result<Dataset> {
    read_dataset(&fs::read(path)?)
}

/// Canonical bytes of `dataset` in the mode and byte order its schema declares.
pub fn encode_dataset(dataset: &Dataset) -> Result<Vec<u8>> {
    let schema = &dataset.schema;
    let mut out = emit_header(schema)?;
    let number = |i: usize| {
        move |e| match e {
            SddsError::InvalidPage { diagnostic, .. } => SddsError::InvalidPage {
                page: i + 1,
                diagnostic,
            },
            other => other,
        }
    };
    match schema.mode {
        DataMode::Ascii => {
            let mut text = String::new();
            for (i, page) in dataset.pages.iter().enumerate() {
                encode_page_ascii(schema, page, &mut text).map_err(number(i))?;
            }
            out.extend_from_slice(text.as_bytes());
        }
        DataMode::Binary => {
            for (i, page) in dataset.pages.iter().enumerate() {
                encode_page_binary(schema, page, &mut out).map_err(number(i))?;
            }
        }
    }
    Ok(out)
}

/// Writes the canonical encoding, returning the byte count.
pub fn write_dataset<W: Write>(out: &mut W, dataset: &Dataset) -> Result<usize> {
    let bytes = encode_dataset(dataset)?;
    out.write_all(&bytes)?;
    Ok(bytes.len())
}

pub fn write_file(path: impl AsRef<Path>, dataset: &Dataset) -> Result<()> {
    fs::write(path, encode_dataset(dataset)?)?;
    Ok(())
}

impl Dataset {
    /// The same data re-targeted to another mode and byte order.
    pub fn with_format(mut self, mode: DataMode, endian: Endian) -> Dataset {
        self.schema.mode = mode;
        self.schema.endian = endian;
        self
    }

    pub fn from_bytes(input: &[u8]) -> Result<Dataset> {
        read_dataset(input)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        encode_dataset(self)
    }

    /// Appends a page assembled from flat per-field vectors.
    ///
    /// The row count is the common length of the column vectors. Values
    /// must already carry their declared types; the first offending field
    /// (and row, for columns) is named in the error.
    pub fn push_page(
        &mut self,
        parameters: Vec<Value>,
        arrays: Vec<ArrayInstance>,
        columns: Vec<Vec<Value>>,
    ) -> Result<()> {
        let page = self.pages.len() + 1;
        let fail = |message: String| SddsError::InvalidPage {
            page,
            diagnostic: Diagnostic::new(message),
        };
        let rows = columns.first().map_or(0, Vec::len);
        for (def, data) in self.schema.columns.iter().zip(&columns) {
            if data.len() != rows {
                return Err(fail(format!(
                    "column '{}' has {} values, expected {rows}",
                    def.name,
                    data.len()
                )));
            }
            if let Some(row) = data.iter().position(|v| v.data_type() != def.data_type) {
                return Err(fail(format!(
                    "column '{}' row {row}: {} value, expected {}",
                    def.name,
                    data[row].data_type(),
                    def.data_type
                )));
            }
        }
        let row_count = i32::try_from(rows).map_err(|_| fail(format!("{rows} rows exceed int32")))?;
        let page_data = Page {
            parameter_values: parameters,
            array_values: arrays,
            column_data: columns,
            row_count,
        };
        if let Some(d) = page_data.validate(&self.schema).into_iter().next() {
            return Err(fail(d.message));
        }
        self.pages.push(page_data);
        Ok(())
    }
}
