use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid taxon name {0:?}")]
    InvalidTaxon(String),

    #[error("duplicate taxon {0:?}")]
    DuplicateTaxon(String),

    #[error("unknown taxon {0:?}")]
    UnknownTaxon(String),

    #[error("empty taxon set")]
    EmptyTaxonSet,

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("the two trees are not on the same taxon set")]
    LeafSetMismatch,

    #[error("edge ({0}, {1}) is not an edge of the tree")]
    NoSuchEdge(usize, usize),

    #[error("newick syntax error at byte {offset}: {message}")]
    Newick { offset: usize, message: String },

    #[error("character table line {line}: {message}")]
    CharacterTable { line: usize, message: String },

    #[error("certificate: {0}")]
    Certificate(String),

    #[error("character does not assign a state to taxon {0:?}")]
    UncoveredLeaf(String),

    #[error("extension covers {got} vertices, tree has {expected}")]
    IncompleteExtension { expected: usize, got: usize },

    #[error("at most 64 states are supported, got {0}")]
    TooManyStates(usize),

    #[error("instance too large for {oracle}: size {size} exceeds cap {cap}")]
    TooLarge {
        oracle: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("quartet {0:?} is not resolved in the tree")]
    UnresolvedQuartet([String; 4]),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("internal consistency failure: {0}")]
    Internal(String),
}
