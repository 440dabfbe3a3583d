//! Lower-bound certificates as JSON documents.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::treecore::Tree;

pub const CERTIFICATE_VERSION: &str = "certificate_v1";

/// Which input tree plays `T1`, the tree whose legs the quartets use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LegTree {
    T1,
    T2,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeRecord {
    /// Canonical Newick.
    pub newick: String,
    /// Hex SHA-256 of `newick`.
    pub sha256: String,
}

impl TreeRecord {
    pub fn new(tree: &Tree) -> Self {
        let newick = tree.canonical_newick();
        TreeRecord { sha256: sha256_hex(&newick), newick }
    }
}

pub fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// A selected quartet with its resolution in each input tree, as `"a,b|c,d"`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuartetRecord {
    pub taxa: [String; 4],
    pub t1: String,
    pub t2: String,
}

/// An agreement forest given by the splits of the cut edges of the leg tree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpperBound {
    pub tree: LegTree,
    /// For each cut edge, the taxa on the side without the smallest taxon.
    pub splits: Vec<Vec<String>>,
    pub value: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool_version: String,
    pub seed: Option<u64>,
    /// `|Q'|` of the greedy selection in the chosen orientation.
    pub greedy_quartets: u64,
    pub incompatible_quartets: u64,
    #[serde(default)]
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateDocument {
    pub version: String,
    pub t1: TreeRecord,
    pub t2: TreeRecord,
    pub leg_tree: LegTree,
    pub quartets: Vec<QuartetRecord>,
    /// Two-state character over the quartets' taxa.
    pub character: BTreeMap<String, u8>,
    pub beta: u64,
    pub delta: u64,
    pub claimed_bound: u64,
    pub upper_bound: UpperBound,
    pub metadata: Metadata,
}

#[derive(Deserialize)]
struct Incoming {
    #[serde(flatten)]
    document: CertificateDocument,
    #[serde(flatten)]
    extra: BTreeMap<String, serde_json::Value>,
}

/// Pretty-printed JSON with a trailing newline; field order is fixed.
pub fn write_certificate(doc: &CertificateDocument) -> String {
    let mut out = serde_json::to_string_pretty(doc).expect("certificate serializes");
    out.push('\n');
    out
}

/// Reads a certificate. Unknown top-level fields are dropped and recorded in
/// `metadata.notes`.
pub fn read_certificate(text: &str) -> Result<CertificateDocument> {
    let incoming: Incoming = serde_json::from_str(text).map_err(|e| Error::Certificate(e.to_string()))?;
    let mut doc = incoming.document;
    if doc.version != CERTIFICATE_VERSION {
        return Err(Error::Certificate(format!(
            "unsupported version {:?}, expected {CERTIFICATE_VERSION:?}",
            doc.version
        )));
    }
    for key in incoming.extra.keys() {
        doc.metadata.notes.push(format!("ignored unknown field {key:?}"));
    }
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::newick::parse_newick;

    fn sample() -> CertificateDocument {
        let a = parse_newick("((a,b),(c,d));").unwrap();
        let b = parse_newick("((a,c),(b,d));").unwrap();
        CertificateDocument {
            version: CERTIFICATE_VERSION.into(),
            t1: TreeRecord::new(&a),
            t2: TreeRecord::new(&b),
            leg_tree: LegTree::T1,
            quartets: vec![QuartetRecord {
                taxa: ["a", "b", "c", "d"].map(String::from),
                t1: "a,b|c,d".into(),
                t2: "a,c|b,d".into(),
            }],
            character: [("a", 0), ("b", 1), ("c", 0), ("d", 1)].into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            beta: 2,
            delta: 1,
            claimed_bound: 1,
            upper_bound: UpperBound { tree: LegTree::T1, splits: vec![vec!["b".into()]], value: 1 },
            metadata: Metadata {
                tool_version: "0.1.0".into(),
                seed: None,
                greedy_quartets: 1,
                incompatible_quartets: 1,
                notes: Vec::new(),
            },
        }
    }

    #[test]
    fn round_trip_is_lossless_and_stable() {
        let doc = sample();
        let text = write_certificate(&doc);
        let back = read_certificate(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(write_certificate(&back), text);
        assert!(text.find("\"version\"").unwrap() < text.find("\"claimed_bound\"").unwrap());
    }

    #[test]
    fn tree_hash_is_of_canonical_newick() {
        let r = TreeRecord::new(&parse_newick("((d,c),(b,a));").unwrap());
        assert_eq!(r.newick, "((a,b),(c,d));");
        assert_eq!(r.sha256, sha256_hex("((a,b),(c,d));"));
        assert_eq!(r.sha256.len(), 64);
    }

    #[test]
    fn negative_bound_is_rejected() {
        let text = write_certificate(&sample()).replace("\"claimed_bound\": 1", "\"claimed_bound\": -1");
        assert!(matches!(read_certificate(&text), Err(Error::Certificate(_))));
    }

    #[test]
    fn wrong_version_is_rejected() {
        let text = write_certificate(&sample()).replace(CERTIFICATE_VERSION, "certificate_v0");
        assert!(read_certificate(&text).is_err());
    }

    #[test]
    fn unknown_fields_are_noted() {
        let mut value: serde_json::Value = serde_json::from_str(&write_certificate(&sample())).unwrap();
        value["future_field"] = serde_json::json!({"x": 1});
        let doc = read_certificate(&value.to_string()).unwrap();
        assert_eq!(doc.metadata.notes, ["ignored unknown field \"future_field\""]);
        let mut plain = doc.clone();
        plain.metadata.notes.clear();
        assert_eq!(plain, sample());
    }

    #[test]
    fn missing_field_is_a_schema_error() {
        let mut value: serde_json::Value = serde_json::from_str(&write_certificate(&sample())).unwrap();
        value.as_object_mut().unwrap().remove("quartets");
        assert!(read_certificate(&value.to_string()).is_err());
    }
}
