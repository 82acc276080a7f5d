#![no_main]

use libfuzzer_sys::fuzz_target;
use lintsampler::structure::DensityStructure;
use lintsampler::vertex_file::{decode_raw, encode_raw, ingest_bytes, VertexFormat};

fuzz_target!(|data: &[u8]| {
    let Ok((counts, values)) = decode_raw(data) else {
        return;
    };
    assert_eq!(counts.iter().product::<usize>(), values.len());
    let edges: Vec<Vec<f64>> = counts.iter().map(|&n| (0..n).map(|i| i as f64).collect()).collect();
    if let Ok(grid) = ingest_bytes(edges.clone(), data, VertexFormat::Raw) {
        // Re-encoding must reproduce a grid with the same digest.
        let again = ingest_bytes(edges, &encode_raw(&grid), VertexFormat::Raw).unwrap();
        assert_eq!(grid.fingerprint(), again.fingerprint());
    }
});
