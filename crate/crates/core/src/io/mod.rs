//! Text formats: Newick trees, character tables and certificates.

pub mod certificate;
pub mod characters;
pub mod newick;

pub use certificate::{read_certificate, write_certificate, CertificateDocument};
pub use characters::{parse_character_table, write_character, CharacterTable};
pub use newick::{parse_newick, parse_newick_many, write_newick};
