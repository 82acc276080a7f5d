#![no_main]

use libfuzzer_sys::fuzz_target;
use lintsampler::tree::parse_dump;
use lintsampler::DensityTree;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(leaves) = parse_dump(text) else {
        return;
    };
    if let Ok(tree) = DensityTree::from_leaves(leaves) {
        let dump = tree.dump_string();
        let reparsed = DensityTree::from_leaves(parse_dump(&dump).unwrap()).unwrap();
        assert_eq!(reparsed.dump_string(), dump);
    }
});
