#![no_main]

use libfuzzer_sys::fuzz_target;
use ssqw_core::io::{state_from_csv, state_to_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(state) = state_from_csv(text) {
        let again = state_from_csv(&state_to_csv(&state)).expect("written state parses");
        assert_eq!(again.values(), state.values());
    }
});
