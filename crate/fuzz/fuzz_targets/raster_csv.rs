#![no_main]

use coherent_core::diagnostics::parse_raster_csv;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(r) = parse_raster_csv(text) {
        let again = parse_raster_csv(&r.to_csv()).expect("written raster reparses");
        assert_eq!(again.to_csv(), r.to_csv());
        let _ = r.to_pgm(1.0, None);
    }
});
