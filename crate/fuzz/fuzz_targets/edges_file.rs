#![no_main]

use libfuzzer_sys::fuzz_target;
use lintsampler::axes::parse_edges_text;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(edges) = parse_edges_text(text) {
        for e in &edges {
            assert!(e.len() >= 2);
            assert!(e.windows(2).all(|w| w[0] < w[1]));
        }
    }
});
