#![no_main]

use coherent_core::ulam::{parse_ulam, write_ulam};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok((m, hash)) = parse_ulam(text) {
        let text = write_ulam(&m, hash.as_deref());
        let (again, h) = parse_ulam(&text).expect("written matrix reparses");
        assert_eq!(write_ulam(&again, h.as_deref()), text);
    }
});
