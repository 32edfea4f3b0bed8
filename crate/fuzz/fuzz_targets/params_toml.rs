#![no_main]

use libfuzzer_sys::fuzz_target;
use ssqw_core::io::{parse_params_toml, params_to_toml};
use ssqw_core::ValidationMode;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(params) = parse_params_toml(text) {
        let again = parse_params_toml(&params_to_toml(&params)).expect("written parameters parse");
        assert_eq!(again, params);
        let _ = params.validate(ValidationMode::StrongShift);
    }
});
