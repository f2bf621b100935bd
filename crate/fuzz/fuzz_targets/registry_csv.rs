#![no_main]

use libfuzzer_sys::fuzz_target;
use mcaw_core::schema::{parse_csv_reader, validate, ColumnKind, ColumnSpec, DataDictionary, DateFormat};

fuzz_target!(|data: &[u8]| {
    let dict = DataDictionary::new(vec![
        ColumnSpec::new("grupo", ColumnKind::Categorical).with_allowed(["A", "B"]),
        ColumnSpec::new("edad", ColumnKind::Integer).with_range(Some(0), Some(130)),
        ColumnSpec::new("fecha", ColumnKind::Date).with_date_format(DateFormat::DayFirst),
        ColumnSpec::new("id", ColumnKind::Identifier),
    ])
    .expect("dictionary");
    if let Ok(raw) = parse_csv_reader(data, &dict) {
        let _ = validate(&raw);
        let text = raw.to_csv_string();
        let back = parse_csv_reader(text.as_bytes(), &dict).expect("round trip");
        assert_eq!(back, raw);
    }
});
