#![no_main]

use libfuzzer_sys::fuzz_target;
use mcaw_core::pipeline::AnalysisOptions;

fuzz_target!(|data: &[u8]| {
    if let Ok(options) = serde_json::from_slice::<AnalysisOptions>(data) {
        let _ = options.fit_options();
        let text = serde_json::to_string(&options).expect("serialize");
        let back: AnalysisOptions = serde_json::from_str(&text).expect("reparse");
        assert_eq!(back, options);
    }
});
