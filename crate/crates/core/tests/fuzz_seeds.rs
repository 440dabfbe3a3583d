use std::fs;
use std::path::PathBuf;

use parsikern::bounds::verify_certificate;
use parsikern::io::{parse_character_table, parse_newick, read_certificate, write_certificate, write_newick};

fn seeds(target: &str) -> Vec<Vec<u8>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut paths: Vec<PathBuf> = fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    paths.sort();
    assert!(!paths.is_empty(), "no seeds in {}", dir.display());
    paths.into_iter().map(|p| fs::read(p).unwrap()).collect()
}

#[test]
fn newick_seeds_round_trip() {
    for data in seeds("newick") {
        let text = String::from_utf8(data).unwrap();
        let first = text.lines().next().unwrap();
        let tree = parse_newick(first).unwrap();
        let again = parse_newick(&write_newick(&tree)).unwrap();
        assert!(tree.is_isomorphic(&again));
    }
}

#[test]
fn character_table_seeds_respect_declared_states() {
    let mut rejected = 0;
    for data in seeds("character_table") {
        let declared = (data[0] != 0).then_some(usize::from(data[0] % 8));
        match parse_character_table(std::str::from_utf8(&data[1..]).unwrap(), declared) {
            Ok(table) => assert!(declared.is_none_or(|t| table.alphabet().len() <= t)),
            Err(_) => rejected += 1,
        }
    }
    assert_eq!(rejected, 1);
}

#[test]
fn certificate_seeds_verify() {
    for data in seeds("certificate") {
        let doc = read_certificate(std::str::from_utf8(&data).unwrap()).unwrap();
        assert_eq!(read_certificate(&write_certificate(&doc)).unwrap(), doc);
        let t1 = parse_newick(&doc.t1.newick).unwrap();
        let t2 = parse_newick(&doc.t2.newick).unwrap();
        assert!(verify_certificate(&t1, &t2, &doc).unwrap().accepted());
    }
}
