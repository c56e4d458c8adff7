#![no_main]

use libfuzzer_sys::fuzz_target;
use sdds::read_dataset;

fuzz_target!(|data: &[u8]| {
    let Ok(dataset) = read_dataset(data) else {
        return;
    };
    // Anything readable writes back and reads to the same values.
    let bytes = dataset.to_bytes().expect("write what was read");
    let again = read_dataset(&bytes).expect("read what was written");
    assert!(again.eq_canonical_nan(&dataset));
});
