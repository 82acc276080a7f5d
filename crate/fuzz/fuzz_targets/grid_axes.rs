#![no_main]

use libfuzzer_sys::fuzz_target;
use lintsampler::axes::{parse_domain, parse_grid_axes};
use lintsampler::builtin::parse_param;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(axes) = parse_grid_axes(text) {
        for e in &axes {
            assert!(e.windows(2).all(|w| w[0] < w[1]));
        }
    }
    if let Ok((lo, hi)) = parse_domain(text) {
        assert!(lo.iter().zip(&hi).all(|(a, b)| a < b));
    }
    let _ = parse_param(text);
});
