#![no_main]

use libfuzzer_sys::fuzz_target;
use lintsampler::batch::{parse_csv, write_csv_points};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok((k, points)) = parse_csv(text) else {
        return;
    };
    let mut out = Vec::new();
    write_csv_points(&mut out, k, &points, true).unwrap();
    let (k2, again) = parse_csv(std::str::from_utf8(&out).unwrap()).unwrap();
    assert_eq!(k, k2);
    assert_eq!(points, again);
});
