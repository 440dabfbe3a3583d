//! Exact oracles at desk scale: `d_MP^t` by character enumeration,
//! incompatible quartets, agreement-forest checks, and `d_TBR` by partition
//! enumeration and by a branch-and-bound hitting set over quartet legs.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitch::Scorer;
use crate::partition::{blocks, prefixes, RestrictedGrowth};
use crate::treecore::{path_edges, Edge, Quartet, QuartetTopology, TaxonId, Tree};

/// Size limits of the exhaustive oracles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    /// Largest `n` for [`dmp_exact`] with `t <= 3`.
    pub dmp_small_t: usize,
    /// Largest `n` for [`dmp_exact`] with `t > 3` or unbounded.
    pub dmp_large_t: usize,
    pub partition: usize,
    pub hitting_set: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { dmp_small_t: 10, dmp_large_t: 9, partition: 8, hitting_set: 16 }
    }
}

/// Number of states allowed in `d_MP^t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StateBound {
    Finite(usize),
    Unbounded,
}

impl StateBound {
    /// The effective number of blocks on `n` taxa.
    pub fn blocks(self, n: usize) -> usize {
        match self {
            StateBound::Finite(t) => t.min(n),
            StateBound::Unbounded => n,
        }
    }
}

impl fmt::Display for StateBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateBound::Finite(t) => write!(f, "{t}"),
            StateBound::Unbounded => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for StateBound {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inf" | "unbounded" => Ok(StateBound::Unbounded),
            _ => match s.parse::<usize>() {
                Ok(t) if t >= 1 => Ok(StateBound::Finite(t)),
                _ => Err(Error::Precondition(format!("invalid state bound {s:?}"))),
            },
        }
    }
}

fn too_large(oracle: &'static str, size: usize, cap: usize) -> Result<()> {
    if size > cap {
        Err(Error::TooLarge { oracle, size, cap })
    } else {
        Ok(())
    }
}

/// `d_MP^t` with the default caps.
pub fn dmp_exact(t1: &Tree, t2: &Tree, t: StateBound) -> Result<usize> {
    dmp_exact_with_cap(t1, t2, t, None)
}

/// `d_MP^t`: the largest `|l_f(T1) - l_f(T2)|` over all characters with at
/// most `t` states, enumerated as set partitions of the taxa. `cap`
/// overrides the default size limit.
pub fn dmp_exact_with_cap(t1: &Tree, t2: &Tree, t: StateBound, cap: Option<usize>) -> Result<usize> {
    t1.check_same_taxa(t2)?;
    let n = t1.num_leaves();
    let k = t.blocks(n);
    let defaults = Caps::default();
    let cap = cap.unwrap_or(if matches!(t, StateBound::Finite(x) if x <= 3) {
        defaults.dmp_small_t
    } else {
        defaults.dmp_large_t
    });
    too_large("dmp_exact", n, cap)?;
    if n <= 3 || k <= 1 {
        return Ok(0);
    }
    let best = prefixes(n, k, 4)
        .into_par_iter()
        .map(|prefix| {
            let mut s1 = Scorer::new(t1);
            let mut s2 = Scorer::new(t2);
            let mut rgs = RestrictedGrowth::with_prefix(n, k, &prefix);
            let mut best = 0;
            while let Some(states) = rgs.advance() {
                best = best.max(s1.score(states).abs_diff(s2.score(states)));
            }
            best
        })
        .max()
        .unwrap_or(0);
    Ok(best)
}

/// An incompatible quartet with its resolution in each tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AnnotatedQuartet {
    pub quartet: Quartet,
    pub t1: QuartetTopology,
    pub t2: QuartetTopology,
}

/// Leaf-to-leaf distances, answering quartet queries by the four-point
/// condition.
pub(crate) struct LeafDistances {
    n: usize,
    d: Vec<u32>,
}

impl LeafDistances {
    pub(crate) fn new(tree: &Tree) -> Self {
        let n = tree.num_leaves();
        let mut d = vec![0u32; n * n];
        let mut dist = vec![u32::MAX; tree.num_vertices()];
        let mut stack = Vec::new();
        for a in 0..n {
            dist.iter_mut().for_each(|x| *x = u32::MAX);
            dist[tree.leaf(a)] = 0;
            stack.push(tree.leaf(a));
            while let Some(x) = stack.pop() {
                for &y in tree.neighbours(x) {
                    if dist[y] == u32::MAX {
                        dist[y] = dist[x] + 1;
                        stack.push(y);
                    }
                }
            }
            for b in 0..n {
                d[a * n + b] = dist[tree.leaf(b)];
            }
        }
        LeafDistances { n, d }
    }

    fn at(&self, a: TaxonId, b: TaxonId) -> u32 {
        self.d[a * self.n + b]
    }

    /// The resolution with the strictly smallest pair-sum, if any.
    pub(crate) fn topology(&self, q: Quartet) -> Option<QuartetTopology> {
        let mut sums: Vec<(u32, QuartetTopology)> = QuartetTopology::ALL
            .into_iter()
            .map(|top| {
                let (p, r) = top.split(q);
                (self.at(p[0], p[1]) + self.at(r[0], r[1]), top)
            })
            .collect();
        sums.sort();
        (sums[0].0 < sums[1].0).then_some(sums[0].1)
    }
}

/// All 4-subsets whose resolutions differ, in increasing order.
pub fn incompatible_quartets(t1: &Tree, t2: &Tree) -> Result<Vec<AnnotatedQuartet>> {
    t1.check_same_taxa(t2)?;
    let n = t1.num_leaves();
    let (d1, d2) = (LeafDistances::new(t1), LeafDistances::new(t2));
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    let q = Quartet::new([a, b, c, d])?;
                    let names = || q.names(t1);
                    let x = d1.topology(q).ok_or_else(|| Error::UnresolvedQuartet(names()))?;
                    let y = d2.topology(q).ok_or_else(|| Error::UnresolvedQuartet(names()))?;
                    if x != y {
                        out.push(AnnotatedQuartet { quartet: q, t1: x, t2: y });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// The edges of the two legs of `q` in `tree` under `top`.
pub fn leg_edges(tree: &Tree, q: Quartet, top: QuartetTopology) -> Vec<Edge> {
    let (p, r) = top.split(q);
    let mut out: Vec<Edge> = Vec::new();
    for pair in [p, r] {
        let path = tree.path(tree.leaf(pair[0]), tree.leaf(pair[1]));
        out.extend(path_edges(&path));
    }
    out.sort_unstable();
    out
}

/// The first agreement-forest condition that fails.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AfViolation {
    /// `T1|X_i` and `T2|X_i` differ.
    Topology { block: usize },
    /// `T1(X_i)` and `T1(X_j)` share an edge.
    OverlapT1 { blocks: (usize, usize) },
    /// `T2(X_i)` and `T2(X_j)` share an edge.
    OverlapT2 { blocks: (usize, usize) },
}

impl fmt::Display for AfViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AfViolation::Topology { block } => write!(f, "block {block} induces different topologies"),
            AfViolation::OverlapT1 { blocks: (i, j) } => write!(f, "blocks {i} and {j} share an edge of T1"),
            AfViolation::OverlapT2 { blocks: (i, j) } => write!(f, "blocks {i} and {j} share an edge of T2"),
        }
    }
}

fn check_partition(n: usize, partition: &[Vec<TaxonId>]) -> Result<()> {
    let mut seen = vec![false; n];
    for block in partition {
        if block.is_empty() {
            return Err(Error::Precondition("empty block in partition".into()));
        }
        for &x in block {
            if x >= n || std::mem::replace(&mut seen[x], true) {
                return Err(Error::Precondition(format!("taxon #{x} is out of range or repeated")));
            }
        }
    }
    if let Some(x) = seen.iter().position(|&s| !s) {
        return Err(Error::Precondition(format!("taxon #{x} is not covered by the partition")));
    }
    Ok(())
}

fn induced_edges(tree: &Tree, block: &[TaxonId]) -> Result<Vec<bool>> {
    let mask = tree.induced_mask(block)?;
    Ok(tree.edges().iter().map(|e| mask[e.u()] && mask[e.v()]).collect())
}

/// Checks the agreement-forest conditions for `partition` (blocks of taxon
/// ids), reporting the first violation (blocks in the given order).
pub fn is_agreement_forest(t1: &Tree, t2: &Tree, partition: &[Vec<TaxonId>]) -> Result<Option<AfViolation>> {
    t1.check_same_taxa(t2)?;
    check_partition(t1.num_leaves(), partition)?;
    for (i, block) in partition.iter().enumerate() {
        if !t1.restrict(block)?.is_isomorphic(&t2.restrict(block)?) {
            return Ok(Some(AfViolation::Topology { block: i }));
        }
    }
    for (tree, second) in [(t1, false), (t2, true)] {
        let sets: Vec<Vec<bool>> = partition.iter().map(|b| induced_edges(tree, b)).collect::<Result<_>>()?;
        for i in 0..sets.len() {
            for j in i + 1..sets.len() {
                if sets[i].iter().zip(&sets[j]).any(|(&x, &y)| x && y) {
                    let blocks = (i, j);
                    return Ok(Some(if second {
                        AfViolation::OverlapT2 { blocks }
                    } else {
                        AfViolation::OverlapT1 { blocks }
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// Memoised agreement-forest test over taxon subsets encoded as bit masks
/// (at most 64 taxa, at most 64 edges per tree).
pub struct AfChecker<'a> {
    t1: &'a Tree,
    t2: &'a Tree,
    memo: HashMap<u64, (bool, u64, u64)>,
}

impl<'a> AfChecker<'a> {
    pub fn new(t1: &'a Tree, t2: &'a Tree) -> Result<Self> {
        t1.check_same_taxa(t2)?;
        if t1.num_leaves() > 33 {
            return Err(Error::TooLarge { oracle: "agreement-forest checker", size: t1.num_leaves(), cap: 33 });
        }
        Ok(AfChecker { t1, t2, memo: HashMap::new() })
    }

    fn block(&mut self, mask: u64) -> (bool, u64, u64) {
        if let Some(&hit) = self.memo.get(&mask) {
            return hit;
        }
        let ids: Vec<TaxonId> = (0..64).filter(|&i| mask >> i & 1 == 1).collect();
        let edge_bits = |tree: &Tree| -> u64 {
            induced_edges(tree, &ids)
                .expect("ids are valid taxa")
                .iter()
                .enumerate()
                .fold(0u64, |acc, (i, &b)| acc | (u64::from(b) << i))
        };
        let same = ids.len() <= 3
            || self.t1.restrict(&ids).expect("valid").canonical_newick()
                == self.t2.restrict(&ids).expect("valid").canonical_newick();
        let entry = (same, edge_bits(self.t1), edge_bits(self.t2));
        self.memo.insert(mask, entry);
        entry
    }

    /// Whether the blocks (bit masks covering every taxon exactly once) form
    /// an agreement forest.
    pub fn check(&mut self, block_masks: &[u64]) -> bool {
        let mut used1 = 0u64;
        let mut used2 = 0u64;
        for &m in block_masks {
            let (same, e1, e2) = self.block(m);
            if !same || used1 & e1 != 0 || used2 & e2 != 0 {
                return false;
            }
            used1 |= e1;
            used2 |= e2;
        }
        true
    }
}

fn to_masks(partition: &[Vec<TaxonId>]) -> Vec<u64> {
    partition.iter().map(|b| b.iter().fold(0u64, |m, &x| m | 1 << x)).collect()
}

/// `d_TBR` as the smallest agreement forest minus one, by enumerating
/// partitions in increasing number of blocks.
pub fn dtbr_partition_oracle(t1: &Tree, t2: &Tree) -> Result<usize> {
    dtbr_partition_oracle_with_cap(t1, t2, Caps::default().partition)
}

pub fn dtbr_partition_oracle_with_cap(t1: &Tree, t2: &Tree, cap: usize) -> Result<usize> {
    t1.check_same_taxa(t2)?;
    let n = t1.num_leaves();
    too_large("dtbr_partition_oracle", n, cap)?;
    if n <= 3 {
        return Ok(0);
    }
    let mut checker = AfChecker::new(t1, t2)?;
    for k in 1..=n {
        for rgs in RestrictedGrowth::new(n, k) {
            if rgs.iter().max() != Some(&(k - 1)) {
                continue;
            }
            if checker.check(&to_masks(&blocks(&rgs))) {
                return Ok(k - 1);
            }
        }
    }
    Err(Error::Internal("the all-singleton partition is always an agreement forest".into()))
}

/// Connected components of `T1` minus `edges`, as taxon blocks sorted by
/// their smallest taxon; components without leaves are dropped.
pub fn cut_to_partition(t1: &Tree, edges: &[Edge]) -> Vec<Vec<TaxonId>> {
    let mut out: Vec<Vec<TaxonId>> = Vec::new();
    let mut seen = vec![false; t1.num_vertices()];
    for start in 0..t1.num_vertices() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let mut block = Vec::new();
        while let Some(x) = stack.pop() {
            if let Some(t) = t1.label(x) {
                block.push(t);
            }
            for &y in t1.neighbours(x) {
                if !seen[y] && !edges.contains(&Edge::new(x, y)) {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        if !block.is_empty() {
            block.sort_unstable();
            out.push(block);
        }
    }
    out.sort();
    out
}

/// A minimum edge set of `T1` meeting the legs of every incompatible quartet.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HittingSet {
    pub edges: Vec<Edge>,
}

/// `d_TBR` as a minimum hitting set of quartet legs with the default cap.
pub fn dtbr_hitting_set(t1: &Tree, t2: &Tree) -> Result<(usize, HittingSet)> {
    dtbr_hitting_set_with_cap(t1, t2, Caps::default().hitting_set)
}

pub fn dtbr_hitting_set_with_cap(t1: &Tree, t2: &Tree, cap: usize) -> Result<(usize, HittingSet)> {
    t1.check_same_taxa(t2)?;
    too_large("dtbr_hitting_set", t1.num_leaves(), cap)?;
    if t1.edges().len() > 64 {
        return Err(Error::TooLarge { oracle: "dtbr_hitting_set", size: t1.num_leaves(), cap: 33 });
    }
    let legs: Vec<u64> = incompatible_quartets(t1, t2)?
        .iter()
        .map(|aq| {
            leg_edges(t1, aq.quartet, aq.t1)
                .iter()
                .fold(0u64, |m, &e| m | 1 << t1.edge_index(e).expect("leg edges are tree edges"))
        })
        .collect();
    let initial = greedy_cover(&legs);
    let mut search = HittingSearch { legs, best: initial, best_count: initial.count_ones() };
    search.branch(0, 0);
    let edges: Vec<Edge> = (0..t1.edges().len()).filter(|&i| search.best >> i & 1 == 1).map(|i| t1.edges()[i]).collect();
    Ok((edges.len(), HittingSet { edges }))
}

/// Repeatedly takes the edge meeting the most unhit legs.
fn greedy_cover(legs: &[u64]) -> u64 {
    let mut chosen = 0u64;
    loop {
        let unhit: Vec<u64> = legs.iter().copied().filter(|&l| l & chosen == 0).collect();
        if unhit.is_empty() {
            return chosen;
        }
        let best = (0..64).max_by_key(|&i| (unhit.iter().filter(|&&l| l >> i & 1 == 1).count(), std::cmp::Reverse(i))).unwrap();
        chosen |= 1 << best;
    }
}

struct HittingSearch {
    legs: Vec<u64>,
    best: u64,
    best_count: u32,
}

impl HittingSearch {
    fn branch(&mut self, chosen: u64, excluded: u64) {
        let count = chosen.count_ones();
        let mut unhit: Vec<u64> = self
            .legs
            .iter()
            .filter(|&&l| l & chosen == 0)
            .map(|&l| l & !excluded)
            .collect();
        if unhit.is_empty() {
            if count < self.best_count {
                self.best_count = count;
                self.best = chosen;
            }
            return;
        }
        if unhit.contains(&0) {
            return;
        }
        unhit.sort_by_key(|l| (l.count_ones(), *l));
        // leg-disjoint packing: each packed quartet needs its own edge
        let mut used = 0u64;
        let mut packed = 0;
        for &l in &unhit {
            if l & used == 0 {
                used |= l;
                packed += 1;
            }
        }
        if count + packed >= self.best_count {
            return;
        }
        let pivot = unhit[0];
        let mut skip = 0u64;
        let mut rest = pivot;
        while rest != 0 {
            let bit = rest & rest.wrapping_neg();
            rest &= rest - 1;
            self.branch(chosen | bit, excluded | skip);
            skip |= bit;
        }
    }
}
