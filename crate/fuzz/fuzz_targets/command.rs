#![no_main]

use libfuzzer_sys::fuzz_target;
use sdds::header::parse_command;

fuzz_target!(|text: &str| {
    if let Err(d) = parse_command(text, 1) {
        // Commands may span lines; positions count from the given line.
        assert!(d.line >= 1 && d.column >= 1);
    }
});
