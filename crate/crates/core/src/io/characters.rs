//! Character tables: one `taxon<TAB>state` row per line, no header.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::fitch::Character;
use crate::treecore::Taxon;

/// Rows of a character table with its inferred state alphabet.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CharacterTable {
    rows: BTreeMap<Taxon, String>,
    alphabet: Vec<String>,
    declared: Option<usize>,
}

impl CharacterTable {
    pub fn rows(&self) -> &BTreeMap<Taxon, String> {
        &self.rows
    }

    /// Distinct state tokens, sorted.
    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    /// Declared number of states; `None` means unbounded.
    pub fn declared(&self) -> Option<usize> {
        self.declared
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// The character mapping each taxon to the index of its token in the
    /// alphabet.
    pub fn to_character(&self) -> Result<Character> {
        let assignment = self
            .rows
            .iter()
            .map(|(taxon, token)| {
                let state = self.alphabet.binary_search(token).expect("token is in the alphabet");
                (taxon.clone(), state)
            })
            .collect();
        Character::new(assignment, self.declared)
    }
}

/// Parses a table; `declared` bounds the number of distinct tokens.
pub fn parse_character_table(text: &str, declared: Option<usize>) -> Result<CharacterTable> {
    if declared == Some(0) {
        return Err(Error::Precondition("the declared number of states must be positive".into()));
    }
    let mut rows = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| Error::CharacterTable { line, message };
        let row = raw.strip_suffix('\r').unwrap_or(raw);
        if row.trim().is_empty() {
            continue;
        }
        let mut fields = row.split('\t');
        let (Some(name), Some(state), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(err("expected exactly two tab-separated fields".into()));
        };
        let state = state.trim();
        if state.is_empty() {
            return Err(err("empty state token".into()));
        }
        let taxon = Taxon::new(name.trim()).map_err(|e| err(e.to_string()))?;
        if rows.insert(taxon.clone(), state.to_string()).is_some() {
            return Err(err(format!("duplicate taxon {taxon}")));
        }
    }
    let alphabet: Vec<String> = rows.values().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    if let Some(t) = declared {
        if alphabet.len() > t {
            return Err(Error::Precondition(format!(
                "{} distinct states exceed the declared {t}",
                alphabet.len()
            )));
        }
    }
    Ok(CharacterTable { rows, alphabet, declared })
}

/// Writes a table with integer state tokens, sorted by taxon.
pub fn write_character(f: &Character) -> String {
    f.assignment().iter().map(|(taxon, s)| format!("{taxon}\t{s}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_state_table() {
        let t = parse_character_table("a\t0\nb\t0\nc\t1\nd\t1", None).unwrap();
        assert_eq!(t.alphabet(), ["0", "1"]);
        let f = t.to_character().unwrap();
        assert_eq!(f.distinct_states(), 2);
        assert_eq!(f.state("c"), Some(1));
    }

    #[test]
    fn declared_bound_is_enforced() {
        assert!(parse_character_table("a\tx\nb\ty\nc\tz\n", Some(2)).is_err());
        assert!(parse_character_table("a\tx\nb\ty\nc\tz\n", Some(3)).is_ok());
        assert!(parse_character_table("", Some(0)).is_err());
    }

    #[test]
    fn empty_file_is_empty_table() {
        let t = parse_character_table("", None).unwrap();
        assert!(t.is_empty());
        assert!(t.to_character().unwrap().assignment().is_empty());
    }

    #[test]
    fn malformed_rows() {
        assert!(matches!(
            parse_character_table("a\t0\na\t1\n", None),
            Err(Error::CharacterTable { line: 2, .. })
        ));
        assert!(matches!(parse_character_table("a\t\n", None), Err(Error::CharacterTable { line: 1, .. })));
        assert!(matches!(parse_character_table("a 0\n", None), Err(Error::CharacterTable { line: 1, .. })));
        assert!(matches!(parse_character_table("\na\t0\t1\n", None), Err(Error::CharacterTable { line: 2, .. })));
    }

    #[test]
    fn write_then_parse() {
        let t = parse_character_table("b\tG\r\na\tA\n\nc\tG\n", Some(4)).unwrap();
        let f = t.to_character().unwrap();
        let back = parse_character_table(&write_character(&f), Some(4)).unwrap().to_character().unwrap();
        assert_eq!(back, f);
    }
}
