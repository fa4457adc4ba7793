#![no_main]

use coherent_core::fields::GriddedField;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(g) = GriddedField::parse(text) {
        let again = GriddedField::parse(&g.to_text()).expect("written field reparses");
        assert_eq!(again.to_text(), g.to_text());
        let (lon, lat, t) = (g.lon_axis(), g.lat_axis(), g.time_axis());
        let _ = g.wind(t.start, lon.start, lat.start);
    }
});
