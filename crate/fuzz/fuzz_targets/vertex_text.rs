#![no_main]

use libfuzzer_sys::fuzz_target;
use lintsampler::vertex_file::{ingest_bytes, parse_text, VertexFormat};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(values) = parse_text(text) {
            assert!(values.iter().all(|v| v.is_finite() && *v >= 0.0));
        }
    }
    let _ = ingest_bytes(vec![vec![0.0, 1.0, 3.0]], data, VertexFormat::Text);
});
