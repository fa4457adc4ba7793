#![no_main]

use coherent_core::cocycle::{parse_window_svd, write_window_svd};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok((w, hash)) = parse_window_svd(text) {
        let text = write_window_svd(&w, hash.as_deref());
        let (again, h) = parse_window_svd(&text).expect("written SVD reparses");
        assert_eq!(write_window_svd(&again, h.as_deref()), text);
    }
});
