#![no_main]

use libfuzzer_sys::fuzz_target;
use mcaw_core::schema::{generate_synthetic, validate, SynthSpec};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = SynthSpec::from_toml_str(text) {
        if spec.n_rows <= 10_000 {
            let raw = generate_synthetic(&spec).expect("valid spec generates");
            assert!(validate(&raw).is_empty());
        }
    }
});
