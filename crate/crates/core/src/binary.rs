//! Binary page encoding.
//!
//! A page is laid out as:
//!
//! ```text
//! i32 row_count
//! parameter values, in declaration order
//! for each array: dim_count x i32 sizes, then product(sizes) elements (row-major)
//! row_count rows, each holding one value per column in declaration order
//! ```
//!
//! Every fixed-width value uses the byte order declared in the header.
//! Strings are an i32 byte length followed by that many UTF-8 bytes. There
//! is no padding anywhere.

use std::io::Write;

use crate::error::{DecodeError, Result, SddsError};
use crate::model::{element_count, ArrayInstance, DataType, Endian, Page, Schema, Value};

/// Read position over a byte slice holding page data.
///
/// `base` is the absolute file offset of `data[0]`, so errors can report
/// offsets into the original file.
#[derive(Debug, Clone)]
pub struct BinaryCursor<'a> {
    data: &'a [u8],
    pos: usize,
    base: u64,
    endian: Endian,
}

impl<'a> BinaryCursor<'a> {
    pub fn new(data: &'a [u8], endian: Endian) -> Self {
        Self::with_base(data, endian, 0)
    }

    pub fn with_base(data: &'a [u8], endian: Endian, base: u64) -> Self {
        BinaryCursor {
            data,
            pos: 0,
            base,
            endian,
        }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn offset(&self) -> u64 {
        self.base + self.pos as u64
    }

    pub fn remaining(&self) -> usize {
        self.data.len() - self.pos
    }

    pub fn is_at_end(&self) -> bool {
        self.pos == self.data.len()
    }

    fn error(&self, message: impl Into<String>) -> DecodeError {
        DecodeError::new(self.offset(), message)
    }

    fn take<const N: usize>(&mut self) -> Result<[u8; N], DecodeError> {
        let bytes = self
            .data
            .get(self.pos..self.pos + N)
            .ok_or_else(|| self.error("truncated page"))?;
        self.pos += N;
        Ok(bytes.try_into().expect("slice length checked"))
    }

    pub fn read_i32(&mut self) -> Result<i32, DecodeError> {
        let b = self.take::<4>()?;
        Ok(match self.endian {
            Endian::Little => i32::from_le_bytes(b),
            Endian::Big => i32::from_be_bytes(b),
        })
    }

    /// Decodes one value of `data_type` at the cursor.
    pub fn read_value(&mut self, data_type: DataType) -> Result<Value, DecodeError> {
        macro_rules! fixed {
            ($t:ty, $variant:ident) => {{
                let b = self.take::<{ std::mem::size_of::<$t>() }>()?;
                Value::$variant(match self.endian {
                    Endian::Little => <$t>::from_le_bytes(b),
                    Endian::Big => <$t>::from_be_bytes(b),
                })
            }};
        }
        Ok(match data_type {
            DataType::Short => fixed!(i16, Short),
            DataType::Long => fixed!(i32, Long),
            DataType::Long64 => fixed!(i64, Long64),
            DataType::Float => fixed!(f32, Float),
            DataType::Double => fixed!(f64, Double),
            DataType::Character => Value::Char(self.take::<1>()?[0]),
            DataType::String => {
                let at = self.offset();
                let len = self.read_i32()?;
                let len = usize::try_from(len)
                    .map_err(|_| DecodeError::new(at, format!("negative string length {len}")))?;
                if len > self.remaining() {
                    // Reported at the length prefix of the cut-off string.
                    return Err(DecodeError::new(at, "truncated page"));
                }
                let bytes = &self.data[self.pos..self.pos + len];
                let text = std::str::from_utf8(bytes).map_err(|_| self.error("invalid UTF-8 in string"))?;
                self.pos += len;
                Value::Str(text.to_owned())
            }
        })
    }
}

/// Decodes a single value from the front of `bytes`.
pub fn decode_value(bytes: &[u8], data_type: DataType, endian: Endian) -> Result<Value, DecodeError> {
    BinaryCursor::new(bytes, endian).read_value(data_type)
}

/// Appends the encoding of `value` to `out`.
pub fn encode_value_into(value: &Value, endian: Endian, out: &mut Vec<u8>) -> Result<()> {
    macro_rules! put {
        ($v:expr) => {
            match endian {
                Endian::Little => out.extend_from_slice(&$v.to_le_bytes()),
                Endian::Big => out.extend_from_slice(&$v.to_be_bytes()),
            }
        };
    }
    match value {
        Value::Short(v) => put!(v),
        Value::Long(v) => put!(v),
        Value::Long64(v) => put!(v),
        Value::Float(v) => put!(v),
        Value::Double(v) => put!(v),
        Value::Char(v) => out.push(*v),
        Value::Str(s) => {
            let len = i32::try_from(s.len())
                .map_err(|_| SddsError::Encode(format!("string of {} bytes exceeds i32 length", s.len())))?;
            put!(len);
            out.extend_from_slice(s.as_bytes());
        }
    }
    Ok(())
}

pub fn encode_value(value: &Value, endian: Endian) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    encode_value_into(value, endian, &mut out)?;
    Ok(out)
}

/// Reads the next page, or `None` when the cursor sits exactly at the end
/// of the data.
pub fn read_page_binary(cursor: &mut BinaryCursor<'_>, schema: &Schema) -> Result<Option<Page>, DecodeError> {
    if cursor.is_at_end() {
        return Ok(None);
    }
    let at = cursor.offset();
    let row_count = cursor.read_i32()?;
    let rows = usize::try_from(row_count)
        .map_err(|_| DecodeError::new(at, format!("negative row_count {row_count}")))?;

    let parameter_values = schema
        .parameters
        .iter()
        .map(|def| cursor.read_value(def.data_type))
        .collect::<Result<Vec<_>, _>>()?;

    let mut array_values = Vec::with_capacity(schema.arrays.len());
    for def in &schema.arrays {
        let at = cursor.offset();
        let dims = (0..def.dim_count)
            .map(|_| cursor.read_i32())
            .collect::<Result<Vec<_>, _>>()?;
        let count = element_count(&dims).ok_or_else(|| {
            DecodeError::new(
                at,
                format!("array '{}' has invalid dimensions {dims:?}", def.name()),
            )
        })?;
        // Each element needs at least one byte, so this bounds allocation.
        let min = count.saturating_mul(def.base.data_type.min_binary_width());
        if min > cursor.remaining() {
            return Err(cursor.error("truncated page"));
        }
        let elements = (0..count)
            .map(|_| cursor.read_value(def.base.data_type))
            .collect::<Result<Vec<_>, _>>()?;
        array_values.push(ArrayInstance { dims, elements });
    }

    let mut column_data: Vec<Vec<Value>> = Vec::with_capacity(schema.columns.len());
    if !schema.columns.is_empty() {
        let row_width: usize = schema
            .columns
            .iter()
            .map(|c| c.data_type.min_binary_width())
            .sum();
        if rows.saturating_mul(row_width) > cursor.remaining() {
            // Find the exact failure point for the report.
            let mut probe = cursor.clone();
            for _ in 0..rows {
                for def in &schema.columns {
                    probe.read_value(def.data_type)?;
                }
            }
            return Err(probe.error("truncated page"));
        }
        column_data = schema.columns.iter().map(|_| Vec::with_capacity(rows)).collect();
        for _ in 0..rows {
            for (def, data) in schema.columns.iter().zip(column_data.iter_mut()) {
                data.push(cursor.read_value(def.data_type)?);
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

/// Encodes a page; the caller guarantees it conforms to `schema`.
pub fn encode_page_binary(schema: &Schema, page: &Page, out: &mut Vec<u8>) -> Result<()> {
    let endian = schema.endian;
    if let Some(first) = page.validate(schema).into_iter().next() {
        return Err(SddsError::InvalidPage {
            page: 0,
            diagnostic: first,
        });
    }
    encode_value_into(&Value::Long(page.row_count), endian, out)?;
    for value in &page.parameter_values {
        encode_value_into(value, endian, out)?;
    }
    for inst in &page.array_values {
        for &d in &inst.dims {
            encode_value_into(&Value::Long(d), endian, out)?;
        }
        for value in &inst.elements {
            encode_value_into(value, endian, out)?;
        }
    }
    for row in 0..page.rows() {
        for data in &page.column_data {
            encode_value_into(&data[row], endian, out)?;
        }
    }
    Ok(())
}

/// Writes one page in `schema.endian` byte order, returning the byte count.
pub fn write_page_binary<W: Write>(out: &mut W, schema: &Schema, page: &Page) -> Result<usize> {
    let mut buf = Vec::new();
    encode_page_binary(schema, page, &mut buf)?;
    out.write_all(&buf)?;
    Ok(buf.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ArrayDef, FieldDef};

    #[test]
    fn decode_examples() {
        assert_eq!(
            decode_value(&[2, 1, 0, 0], DataType::Long, Endian::Little).unwrap(),
            Value::Long(258)
        );
        assert_eq!(
            decode_value(&[0, 0, 1, 2], DataType::Long, Endian::Big).unwrap(),
            Value::Long(258)
        );
        assert_eq!(
            decode_value(&[3, 0, 0, 0, b'a', b'b', b'c'], DataType::String, Endian::Little).unwrap(),
            Value::Str("abc".into())
        );
    }

    #[test]
    fn encode_examples() {
        assert_eq!(
            encode_value(&Value::Long(258), Endian::Little).unwrap(),
            [2, 1, 0, 0]
        );
        assert_eq!(
            encode_value(&Value::Double(1.0), Endian::Little).unwrap(),
            [0, 0, 0, 0, 0, 0, 0xF0, 0x3F]
        );
        assert_eq!(encode_value(&Value::Char(65), Endian::Big).unwrap(), [0x41]);
        assert_eq!(
            encode_value(&Value::Short(-2), Endian::Big).unwrap(),
            [0xff, 0xfe]
        );
    }

    #[test]
    fn decode_errors() {
        let e = decode_value(&[1, 0], DataType::Long, Endian::Little).unwrap_err();
        assert!(e.message.contains("truncated"));
        let e = decode_value(&[0xff, 0xff, 0xff, 0xff], DataType::String, Endian::Little).unwrap_err();
        assert!(e.message.contains("negative string length"));
        let e = decode_value(&[9, 0, 0, 0, b'a'], DataType::String, Endian::Little).unwrap_err();
        assert_eq!(e.to_string(), "truncated page at offset 0");
        let e = decode_value(&[2, 0, 0, 0, 0xc3, 0x28], DataType::String, Endian::Little).unwrap_err();
        assert!(e.message.contains("UTF-8"));
        assert!(decode_value(&[], DataType::Character, Endian::Little).is_err());
    }

    #[test]
    fn nan_payload_survives() {
        let odd = f64::from_bits(0x7ff4_dead_beef_0001);
        for endian in [Endian::Little, Endian::Big] {
            let bytes = encode_value(&Value::Double(odd), endian).unwrap();
            let Value::Double(back) = decode_value(&bytes, DataType::Double, endian).unwrap() else {
                panic!()
            };
            assert_eq!(back.to_bits(), odd.to_bits());
        }
    }

    fn long_schema() -> Schema {
        Schema::new(crate::DataMode::Binary, Endian::Little).with_column(FieldDef::new("x", DataType::Long))
    }

    #[test]
    fn reads_two_rows() {
        let bytes = [2, 0, 0, 0, 7, 0, 0, 0, 9, 0, 0, 0];
        let mut cur = BinaryCursor::new(&bytes, Endian::Little);
        let page = read_page_binary(&mut cur, &long_schema()).unwrap().unwrap();
        assert_eq!(page.row_count, 2);
        assert_eq!(page.column_data, vec![vec![Value::Long(7), Value::Long(9)]]);
        assert!(read_page_binary(&mut cur, &long_schema()).unwrap().is_none());
    }

    #[test]
    fn empty_page_without_fields() {
        let schema = Schema::new(crate::DataMode::Binary, Endian::Little);
        let mut cur = BinaryCursor::new(&[0, 0, 0, 0], Endian::Little);
        let page = read_page_binary(&mut cur, &schema).unwrap().unwrap();
        assert_eq!(page, Page::default());

        let mut out = Vec::new();
        assert_eq!(write_page_binary(&mut out, &schema, &page).unwrap(), 4);
    }

    #[test]
    fn truncation_is_not_end_of_data() {
        let bytes = [1, 0, 0, 0];
        let mut cur = BinaryCursor::with_base(&bytes, Endian::Little, 100);
        let e = read_page_binary(&mut cur, &long_schema()).unwrap_err();
        assert_eq!(e.to_string(), "truncated page at offset 104");

        let mut cur = BinaryCursor::new(&[1, 0], Endian::Little);
        assert!(read_page_binary(&mut cur, &long_schema()).is_err());
    }

    #[test]
    fn huge_row_count_without_data_fails_fast() {
        let bytes = [0xff, 0xff, 0xff, 0x7f, 1, 0, 0, 0];
        let mut cur = BinaryCursor::new(&bytes, Endian::Little);
        let e = read_page_binary(&mut cur, &long_schema()).unwrap_err();
        assert_eq!(e.offset, 8);
    }

    #[test]
    fn negative_row_count() {
        let mut cur = BinaryCursor::new(&[0xff, 0xff, 0xff, 0xff], Endian::Little);
        let e = read_page_binary(&mut cur, &long_schema()).unwrap_err();
        assert!(e.message.contains("negative row_count -1"));
    }

    #[test]
    fn write_single_row() {
        let page = Page {
            column_data: vec![vec![Value::Long(258)]],
            row_count: 1,
            ..Page::default()
        };
        let mut out = Vec::new();
        write_page_binary(&mut out, &long_schema(), &page).unwrap();
        assert_eq!(out, [1, 0, 0, 0, 2, 1, 0, 0]);
    }

    #[test]
    fn write_rejects_mismatch() {
        let page = Page {
            column_data: vec![vec![Value::Double(1.0)]],
            row_count: 1,
            ..Page::default()
        };
        assert!(write_page_binary(&mut Vec::new(), &long_schema(), &page).is_err());
    }

    #[test]
    fn array_layout_big_endian() {
        let schema = Schema::new(crate::DataMode::Binary, Endian::Big)
            .with_array(ArrayDef::new(FieldDef::new("a", DataType::Short), 2));
        let page = Page {
            array_values: vec![ArrayInstance::new(
                vec![1, 2],
                vec![Value::Short(1), Value::Short(2)],
            )],
            ..Page::default()
        };
        let mut out = Vec::new();
        write_page_binary(&mut out, &schema, &page).unwrap();
        assert_eq!(out, [0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 2, 0, 1, 0, 2]);
        let mut cur = BinaryCursor::new(&out, Endian::Big);
        assert_eq!(read_page_binary(&mut cur, &schema).unwrap().unwrap(), page);
    }
}
