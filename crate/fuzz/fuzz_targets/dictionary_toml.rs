#![no_main]

use libfuzzer_sys::fuzz_target;
use mcaw_core::schema::DataDictionary;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(dict) = DataDictionary::from_toml_str(text) {
        let again = DataDictionary::from_toml_str(&dict.to_toml_string()).expect("reparse");
        assert_eq!(again, dict);
    }
});
