#![no_main]

use libfuzzer_sys::fuzz_target;
use parsikern::bounds::verify_certificate;
use parsikern::io::{parse_newick, read_certificate, write_certificate};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(doc) = read_certificate(text) else { return };
    let again = read_certificate(&write_certificate(&doc)).expect("written certificates parse");
    assert_eq!(doc.quartets, again.quartets);
    assert_eq!(doc.character, again.character);
    if let (Ok(t1), Ok(t2)) = (parse_newick(&doc.t1.newick), parse_newick(&doc.t2.newick)) {
        let _ = verify_certificate(&t1, &t2, &doc);
    }
});
