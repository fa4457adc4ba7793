#![no_main]

use coherent_core::tracking::{parse_paths_csv, write_paths_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = parse_paths_csv(text) {
        let again = parse_paths_csv(&write_paths_csv(&p, None)).expect("written paths reparse");
        assert_eq!(again.ranks(), p.ranks());
    }
});
