#![no_main]

use libfuzzer_sys::fuzz_target;
use sdds::header::{emit_header, parse_header};

fuzz_target!(|data: &[u8]| {
    match parse_header(data) {
        Ok((schema, start)) => {
            assert!(start <= data.len());
            assert!(schema.validate().is_empty(), "accepted an invalid schema");
            // Whatever parses must survive canonical emission.
            let text = emit_header(&schema).expect("emit parsed schema");
            let (again, end) = parse_header(&text).expect("reparse emitted header");
            assert_eq!(end, text.len());
            assert_eq!(again, schema);
        }
        Err(d) => assert!(d.line >= 1 && d.column >= 1),
    }
});
