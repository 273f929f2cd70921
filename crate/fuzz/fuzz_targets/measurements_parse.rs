#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(rows) = dipole_phase::scenario::parse_measurements(text) {
            for r in rows {
                assert!(r.sigma_rad > 0.0);
            }
        }
    }
});
