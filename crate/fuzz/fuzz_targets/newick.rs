#![no_main]

use libfuzzer_sys::fuzz_target;
use parsikern::io::{parse_newick, parse_newick_many, write_newick};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(tree) = parse_newick(text) {
        let written = write_newick(&tree);
        let again = parse_newick(&written).expect("canonical output parses");
        assert!(tree.is_isomorphic(&again));
        assert_eq!(written, write_newick(&again));
    }
    let _ = parse_newick_many(text);
});
