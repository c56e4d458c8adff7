#![no_main]

use libfuzzer_sys::fuzz_target;
use sdds::expr::{compile, parse_expr};
use sdds::{DataType, FieldDef, Page, Schema, Value};

fuzz_target!(|source: &str| {
    let Ok(expr) = parse_expr(source) else {
        return;
    };
    let schema = Schema::default()
        .with_parameter(FieldDef::new("p", DataType::Long))
        .with_column(FieldDef::new("x", DataType::Double))
        .with_column(FieldDef::new("n", DataType::Short))
        .with_column(FieldDef::new("s", DataType::String))
        .with_column(FieldDef::new("c", DataType::Character));
    let Ok(compiled) = compile(&expr, &schema) else {
        return;
    };
    let page = Page {
        parameter_values: vec![Value::Long(7)],
        column_data: vec![
            vec![Value::Double(1.5), Value::Double(f64::NAN)],
            vec![Value::Short(-3), Value::Short(0)],
            vec![Value::Str("a".into()), Value::Str(String::new())],
            vec![Value::Char(b'z'), Value::Char(0)],
        ],
        row_count: 2,
        ..Page::default()
    };
    for row in 0..2 {
        let _ = compiled.eval(&page, row);
    }
});
