#![no_main]

use libfuzzer_sys::fuzz_target;

// Parsing and building a scenario must reject bad input with an error, never a panic.
fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = dipole_phase::scenario::Scenario::from_str_named(text, "fuzz");
    }
});
