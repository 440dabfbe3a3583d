//! Tree representation and the structural operations on it: restriction,
//! quartets, cherries and chains, sides of induced subtrees, and TBR moves.

mod chains;
mod quartet;
mod sides;
mod tbr;
mod tree;

pub use chains::{common_chains, common_cherries, Chain};
pub use quartet::{Quartet, QuartetTopology, TopologyOracle};
pub use sides::{sides_and_pendants, Pendant, SideDecomposition};
pub use tbr::tbr_move;
pub use tree::{path_edges, Edge, InducedSubtree, TaxonId, Taxon, Tree, VertexId};
