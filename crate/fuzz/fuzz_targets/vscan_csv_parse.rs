#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(table) = dipole_phase::scenario::parse_vscan_csv(text) {
            assert_eq!(table.speeds.len(), table.phases.len());
        }
    }
});
