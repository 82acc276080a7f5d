#![no_main]

use libfuzzer_sys::fuzz_target;
use lintsampler::batch::{decode_raw, raw_preamble};

fuzz_target!(|data: &[u8]| {
    let Ok((k, points)) = decode_raw(data) else {
        return;
    };
    assert_eq!(points.len() % k, 0);
    let mut again = raw_preamble(k, (points.len() / k) as u64);
    for v in &points {
        again.extend_from_slice(&v.to_le_bytes());
    }
    assert_eq!(again, data);
});
