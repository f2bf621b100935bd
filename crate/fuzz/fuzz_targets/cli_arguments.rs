#![no_main]

use libfuzzer_sys::fuzz_target;
use mcaw_core::pipeline::{parse_axes, parse_breaks, FilterClause};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(f) = text.parse::<FilterClause>() {
        assert!(!f.variable.is_empty());
    }
    if let Ok(axes) = parse_axes(text) {
        assert!(axes.iter().all(|&a| a >= 1));
    }
    let _ = parse_breaks(text);
});
