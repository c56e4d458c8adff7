#![no_main]

use libfuzzer_sys::fuzz_target;
use sdds::ascii::{format_value, parse_value};
use sdds::DataType;

fuzz_target!(|data: &[u8]| {
    let Some((&selector, rest)) = data.split_first() else {
        return;
    };
    let Ok(token) = std::str::from_utf8(rest) else {
        return;
    };
    let data_type = DataType::ALL[usize::from(selector) % DataType::ALL.len()];
    if let Ok(value) = parse_value(token, data_type) {
        let again = parse_value(&format_value(&value), data_type).expect("reparse formatted value");
        assert!(again.eq_canonical_nan(&value), "{value:?} became {again:?}");
    }
});
