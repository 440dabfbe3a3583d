use serde::{Deserialize, Serialize};

use super::tree::{Rooted, TaxonId, Tree, VertexId};
use crate::error::{Error, Result};

/// Four distinct taxa, kept in increasing order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Quartet([TaxonId; 4]);

impl Quartet {
    pub fn new(mut ids: [TaxonId; 4]) -> Result<Self> {
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Precondition(format!("quartet {ids:?} repeats a taxon")));
        }
        Ok(Quartet(ids))
    }

    pub fn from_names<S: AsRef<str>>(tree: &Tree, names: &[S; 4]) -> Result<Self> {
        let ids = tree.taxon_ids(names)?;
        Quartet::new([ids[0], ids[1], ids[2], ids[3]])
    }

    pub fn taxa(&self) -> [TaxonId; 4] {
        self.0
    }

    pub fn contains(&self, t: TaxonId) -> bool {
        self.0.contains(&t)
    }

    pub fn names(&self, tree: &Tree) -> [String; 4] {
        self.0.map(|t| tree.taxon(t).to_string())
    }
}

/// One of the three resolutions of a quartet `{a,b,c,d}` with `a<b<c<d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum QuartetTopology {
    AbCd,
    AcBd,
    AdBc,
}

impl QuartetTopology {
    pub const ALL: [QuartetTopology; 3] = [QuartetTopology::AbCd, QuartetTopology::AcBd, QuartetTopology::AdBc];

    /// The two cherries; the first contains the smallest taxon.
    pub fn split(self, q: Quartet) -> ([TaxonId; 2], [TaxonId; 2]) {
        let [a, b, c, d] = q.0;
        match self {
            QuartetTopology::AbCd => ([a, b], [c, d]),
            QuartetTopology::AcBd => ([a, c], [b, d]),
            QuartetTopology::AdBc => ([a, d], [b, c]),
        }
    }

    /// The resolution in which `x` and `y` form a cherry.
    pub fn with_cherry(q: Quartet, x: TaxonId, y: TaxonId) -> Result<Self> {
        QuartetTopology::ALL
            .into_iter()
            .find(|top| {
                let (p, r) = top.split(q);
                let is = |s: [TaxonId; 2]| (s[0] == x && s[1] == y) || (s[0] == y && s[1] == x);
                is(p) || is(r)
            })
            .ok_or_else(|| Error::Precondition(format!("{x} and {y} are not two taxa of {q:?}")))
    }

    /// The taxon paired with `x`.
    pub fn partner(self, q: Quartet, x: TaxonId) -> TaxonId {
        let (p, r) = self.split(q);
        for s in [p, r] {
            if s[0] == x {
                return s[1];
            }
            if s[1] == x {
                return s[0];
            }
        }
        panic!("taxon {x} is not part of {q:?}")
    }

    /// `"a,b|c,d"` using the tree's taxon names.
    pub fn display(self, q: Quartet, tree: &Tree) -> String {
        let (p, r) = self.split(q);
        let n = |t: TaxonId| tree.taxon(t).as_str();
        format!("{},{}|{},{}", n(p[0]), n(p[1]), n(r[0]), n(r[1]))
    }

    /// Parses `"a,b|c,d"` against a tree's taxa.
    pub fn parse(text: &str, tree: &Tree) -> Result<(Quartet, Self)> {
        let bad = || Error::Precondition(format!("malformed quartet topology {text:?}"));
        let (left, right) = text.split_once('|').ok_or_else(bad)?;
        let (a, b) = left.split_once(',').ok_or_else(bad)?;
        let (c, d) = right.split_once(',').ok_or_else(bad)?;
        let ids = tree.taxon_ids(&[a, b, c, d])?;
        let q = Quartet::new([ids[0], ids[1], ids[2], ids[3]])?;
        Ok((q, QuartetTopology::with_cherry(q, ids[0], ids[1])?))
    }
}

/// Answers many quartet-topology queries on one tree.
pub struct TopologyOracle<'a> {
    tree: &'a Tree,
    rooted: Rooted,
}

impl<'a> TopologyOracle<'a> {
    pub fn new(tree: &'a Tree) -> Self {
        TopologyOracle { tree, rooted: tree.rooted_at(0) }
    }

    pub fn tree(&self) -> &Tree {
        self.tree
    }

    pub fn path(&self, u: VertexId, v: VertexId) -> Vec<VertexId> {
        self.rooted.path(u, v)
    }

    pub fn leaf_path(&self, x: TaxonId, y: TaxonId) -> Vec<VertexId> {
        self.rooted.path(self.tree.leaf(x), self.tree.leaf(y))
    }

    /// The resolution whose two cherry paths are vertex-disjoint.
    pub fn topology(&self, q: Quartet) -> Result<QuartetTopology> {
        if let Some(&t) = q.0.iter().find(|&&t| t >= self.tree.num_leaves()) {
            return Err(Error::UnknownTaxon(format!("#{t}")));
        }
        let mut found = None;
        for top in QuartetTopology::ALL {
            let (p, r) = top.split(q);
            let first = self.leaf_path(p[0], p[1]);
            let second = self.leaf_path(r[0], r[1]);
            if first.iter().all(|v| !second.contains(v)) {
                if found.is_some() {
                    return Err(Error::Internal("quartet has two disjoint resolutions".into()));
                }
                found = Some(top);
            }
        }
        found.ok_or_else(|| Error::UnresolvedQuartet(q.names(self.tree)))
    }
}

impl Tree {
    pub fn quartet_topology(&self, q: Quartet) -> Result<QuartetTopology> {
        TopologyOracle::new(self).topology(q)
    }
}
