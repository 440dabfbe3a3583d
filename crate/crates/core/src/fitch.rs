//! Fitch–Hartigan small parsimony: candidate sets, scores, optimal
//! extensions, parsimonious extensions from induced subtrees, and an
//! exhaustive oracle.
//!
//! Trees may contain degree-2 vertices; such a vertex copies the set of its
//! single child, so `T(Y)` can be scored without suppression.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::treecore::{Edge, Taxon, TaxonId, Tree, VertexId};

/// Largest supported number of states (candidate sets are `u64` bit sets).
pub const MAX_STATES: usize = 64;

/// A character: a state index for every taxon, with an optional bound `t`
/// on the number of states (`None` means unbounded).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Character {
    assignment: BTreeMap<Taxon, usize>,
    num_states: Option<usize>,
}

impl Character {
    pub fn new(assignment: BTreeMap<Taxon, usize>, num_states: Option<usize>) -> Result<Self> {
        if let Some(t) = num_states {
            if t == 0 || t > MAX_STATES {
                return Err(Error::TooManyStates(t));
            }
        }
        if let Some((taxon, &s)) = assignment.iter().find(|(_, &s)| s >= num_states.unwrap_or(MAX_STATES)) {
            if s >= MAX_STATES {
                return Err(Error::TooManyStates(s + 1));
            }
            return Err(Error::Precondition(format!(
                "state {s} of taxon {taxon} exceeds the declared {} states",
                num_states.unwrap_or(MAX_STATES)
            )));
        }
        Ok(Character { assignment, num_states })
    }

    /// Builds a character from per-taxon states of `tree` (indexed by taxon id).
    pub fn from_states(tree: &Tree, states: &[usize], num_states: Option<usize>) -> Result<Self> {
        if states.len() != tree.num_leaves() {
            return Err(Error::Precondition(format!(
                "{} states for {} taxa",
                states.len(),
                tree.num_leaves()
            )));
        }
        let assignment = tree.taxa().iter().cloned().zip(states.iter().copied()).collect();
        Character::new(assignment, num_states)
    }

    pub fn assignment(&self) -> &BTreeMap<Taxon, usize> {
        &self.assignment
    }

    pub fn num_states(&self) -> Option<usize> {
        self.num_states
    }

    pub fn state(&self, taxon: &str) -> Option<usize> {
        self.assignment.iter().find(|(t, _)| t.as_str() == taxon).map(|(_, &s)| s)
    }

    /// Number of distinct states actually used.
    pub fn distinct_states(&self) -> usize {
        let mut used: Vec<usize> = self.assignment.values().copied().collect();
        used.sort_unstable();
        used.dedup();
        used.len()
    }

    /// States of the taxa of `tree`, indexed by taxon id.
    pub fn states_for(&self, tree: &Tree) -> Result<Vec<usize>> {
        tree.taxa()
            .iter()
            .map(|t| self.assignment.get(t).copied().ok_or_else(|| Error::UncoveredLeaf(t.to_string())))
            .collect()
    }

    /// The character restricted to the taxa of `tree`.
    pub fn restricted_to(&self, tree: &Tree) -> Result<Character> {
        let states = self.states_for(tree)?;
        Character::from_states(tree, &states, self.num_states)
    }
}

/// A state for every vertex of a specific tree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extension(pub Vec<usize>);

impl Extension {
    pub fn states(&self) -> &[usize] {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VertexKind {
    Leaf,
    Union,
    Intersection,
}

/// Candidate sets of the bottom-up phase on the tree rooted at a vertex
/// subdividing `root_edge`. The root is stored last, at index
/// `tree.num_vertices()`; a single-vertex tree has no root edge and no extra
/// vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FitchMap {
    pub candidate_sets: Vec<u64>,
    pub kind: Vec<VertexKind>,
    pub root_edge: Option<Edge>,
    /// Parent of every vertex in the rooted subdivision (`None` at the root).
    pub parent: Vec<Option<VertexId>>,
    /// Vertices in top-down order.
    order: Vec<VertexId>,
}

impl FitchMap {
    /// The parsimony score: the number of union vertices.
    pub fn score(&self) -> usize {
        self.kind.iter().filter(|&&k| k == VertexKind::Union).count()
    }
}

/// Default root edge: the edge at the leaf of the smallest taxon.
pub fn default_root_edge(tree: &Tree) -> Option<Edge> {
    let a = tree.leaf(0);
    tree.neighbours(a).first().map(|&p| Edge::new(a, p))
}

fn leaf_states(tree: &Tree, f: &Character) -> Result<Vec<usize>> {
    let states = f.states_for(tree)?;
    if let Some(&s) = states.iter().find(|&&s| s >= MAX_STATES) {
        return Err(Error::TooManyStates(s + 1));
    }
    Ok(states)
}

/// Bottom-up phase rooted on `root_edge`.
pub fn fitch_map(tree: &Tree, f: &Character, root_edge: Option<Edge>) -> Result<FitchMap> {
    let states = leaf_states(tree, f)?;
    fitch_map_states(tree, &states, root_edge)
}

pub(crate) fn fitch_map_states(tree: &Tree, states: &[usize], root_edge: Option<Edge>) -> Result<FitchMap> {
    let n = tree.num_vertices();
    if n == 1 {
        let t = tree.label(0).expect("single vertex is a leaf");
        return Ok(FitchMap {
            candidate_sets: vec![1u64 << states[t]],
            kind: vec![VertexKind::Leaf],
            root_edge: None,
            parent: vec![None],
            order: vec![0],
        });
    }
    let root_edge = match root_edge {
        Some(e) if tree.has_edge(e) => e,
        Some(e) => return Err(Error::NoSuchEdge(e.u(), e.v())),
        None => default_root_edge(tree).expect("multi-vertex tree has an edge"),
    };
    let root = n;
    let mut parent = vec![None; n + 1];
    let mut order = vec![root];
    let mut queue = VecDeque::new();
    for x in [root_edge.u(), root_edge.v()] {
        parent[x] = Some(root);
        queue.push_back(x);
    }
    while let Some(x) = queue.pop_front() {
        order.push(x);
        let px = parent[x];
        for &y in tree.neighbours(x) {
            if Some(y) != px && !(root_edge == Edge::new(x, y)) {
                parent[y] = Some(x);
                queue.push_back(y);
            }
        }
    }

    let mut sets = vec![0u64; n + 1];
    let mut kind = vec![VertexKind::Intersection; n + 1];
    let mut children: Vec<Vec<VertexId>> = vec![Vec::new(); n + 1];
    for v in 0..n {
        children[parent[v].expect("every non-root vertex has a parent")].push(v);
    }
    for &v in order.iter().rev() {
        if v < n {
            if let Some(t) = tree.label(v) {
                sets[v] = 1u64 << states[t];
                kind[v] = VertexKind::Leaf;
                continue;
            }
        }
        let mut inter = u64::MAX;
        let mut union = 0u64;
        for &c in &children[v] {
            inter &= sets[c];
            union |= sets[c];
        }
        if inter != 0 {
            sets[v] = inter;
        } else {
            sets[v] = union;
            kind[v] = VertexKind::Union;
        }
    }
    Ok(FitchMap { candidate_sets: sets, kind, root_edge: Some(root_edge), parent, order })
}

/// `l_f(T)`.
pub fn parsimony_score(tree: &Tree, f: &Character) -> Result<usize> {
    Ok(fitch_map(tree, f, None)?.score())
}

/// Allocation-free repeated scoring of one tree, for enumeration oracles.
pub(crate) struct Scorer {
    /// Internal vertices in bottom-up order with their children (in the
    /// rooted subdivision, the root being index `n`).
    internal: Vec<(usize, Vec<usize>)>,
    leaf_of_taxon: Vec<usize>,
    sets: Vec<u64>,
}

impl Scorer {
    pub(crate) fn new(tree: &Tree) -> Self {
        let map = fitch_map_states(tree, &vec![0; tree.num_leaves()], None).expect("default root edge exists");
        let mut children = vec![Vec::new(); map.parent.len()];
        for (v, p) in map.parent.iter().enumerate() {
            if let Some(p) = p {
                children[*p].push(v);
            }
        }
        let internal = map
            .order
            .iter()
            .rev()
            .filter(|&&v| map.kind[v] != VertexKind::Leaf)
            .map(|&v| (v, children[v].clone()))
            .collect();
        Scorer {
            internal,
            leaf_of_taxon: (0..tree.num_leaves()).map(|t| tree.leaf(t)).collect(),
            sets: vec![0; map.parent.len()],
        }
    }

    /// `l_f` for per-taxon states (each below [`MAX_STATES`]).
    pub(crate) fn score(&mut self, states: &[usize]) -> usize {
        for (t, &v) in self.leaf_of_taxon.iter().enumerate() {
            self.sets[v] = 1u64 << states[t];
        }
        let mut unions = 0;
        for (v, kids) in &self.internal {
            let mut inter = u64::MAX;
            let mut union = 0;
            for &c in kids {
                inter &= self.sets[c];
                union |= self.sets[c];
            }
            self.sets[*v] = if inter != 0 {
                inter
            } else {
                unions += 1;
                union
            };
        }
        unions
    }
}

/// A Fitch extension: top-down choice keeping the parent's state when it is
/// a candidate, otherwise the smallest candidate. The subdividing root is
/// dropped from the result.
pub fn fitch_extension(tree: &Tree, f: &Character, root_edge: Option<Edge>) -> Result<Extension> {
    let map = fitch_map(tree, f, root_edge)?;
    Ok(extension_from_map(tree, &map))
}

pub(crate) fn extension_from_map(tree: &Tree, map: &FitchMap) -> Extension {
    let n = tree.num_vertices();
    let mut state = vec![0usize; map.candidate_sets.len()];
    for &v in &map.order {
        let set = map.candidate_sets[v];
        state[v] = match map.parent[v] {
            Some(p) if set & (1u64 << state[p]) != 0 => state[p],
            _ => set.trailing_zeros() as usize,
        };
    }
    state.truncate(n);
    Extension(state)
}

/// Number of edges whose endpoints carry different states.
pub fn mutation_count(tree: &Tree, ext: &Extension) -> Result<usize> {
    if ext.0.len() != tree.num_vertices() {
        return Err(Error::IncompleteExtension { expected: tree.num_vertices(), got: ext.0.len() });
    }
    Ok(tree.edges().iter().filter(|e| ext.0[e.u()] != ext.0[e.v()]).count())
}

/// Extends `fbar`, given on the vertices of `T(Y)` (numbered as in
/// [`Tree::induced_subtree`]), to all of `tree`: every other vertex takes the
/// state of its nearest vertex of `T(Y)`.
pub fn parsimonious_extension(tree: &Tree, y: &[TaxonId], fbar: &Extension) -> Result<Extension> {
    let sub = tree.induced_subtree(y)?;
    if fbar.0.len() != sub.tree.num_vertices() {
        return Err(Error::IncompleteExtension { expected: sub.tree.num_vertices(), got: fbar.0.len() });
    }
    let mut values = vec![None; tree.num_vertices()];
    for (local, &host) in sub.host_vertex.iter().enumerate() {
        values[host] = Some(fbar.0[local]);
    }
    Ok(Extension(spread_from_mask(tree, values)))
}

/// Fills unset vertices with the value of the nearest set vertex. The set
/// vertices must form a connected subtree.
pub(crate) fn spread_from_mask<T: Copy>(tree: &Tree, mut values: Vec<Option<T>>) -> Vec<T> {
    let mut queue: VecDeque<VertexId> = (0..tree.num_vertices()).filter(|&v| values[v].is_some()).collect();
    while let Some(x) = queue.pop_front() {
        for &y in tree.neighbours(x) {
            if values[y].is_none() {
                values[y] = values[x];
                queue.push_back(y);
            }
        }
    }
    values.into_iter().map(|v| v.expect("the tree is connected")).collect()
}

/// Limits of the exhaustive parsimony oracle.
#[derive(Clone, Copy, Debug)]
pub struct BruteForceCaps {
    pub max_internal: usize,
    pub max_states: usize,
}

impl Default for BruteForceCaps {
    fn default() -> Self {
        BruteForceCaps { max_internal: 12, max_states: 4 }
    }
}

/// `l_f(T)` by trying every assignment of leaf states to internal vertices.
pub fn brute_force_parsimony_oracle(tree: &Tree, f: &Character, caps: BruteForceCaps) -> Result<usize> {
    let states = f.states_for(tree)?;
    let internal: Vec<VertexId> = (0..tree.num_vertices()).filter(|&v| !tree.is_leaf(v)).collect();
    if internal.len() > caps.max_internal {
        return Err(Error::TooLarge { oracle: "brute-force parsimony", size: internal.len(), cap: caps.max_internal });
    }
    let mut alphabet = states.clone();
    alphabet.sort_unstable();
    alphabet.dedup();
    if alphabet.len() > caps.max_states {
        return Err(Error::TooLarge { oracle: "brute-force parsimony", size: alphabet.len(), cap: caps.max_states });
    }
    let mut ext: Vec<usize> = (0..tree.num_vertices())
        .map(|v| tree.label(v).map_or(alphabet[0], |t| states[t]))
        .collect();
    let mut digits = vec![0usize; internal.len()];
    let mut best = usize::MAX;
    loop {
        for (i, &v) in internal.iter().enumerate() {
            ext[v] = alphabet[digits[i]];
        }
        let cost = tree.edges().iter().filter(|e| ext[e.u()] != ext[e.v()]).count();
        best = best.min(cost);
        let mut i = 0;
        while i < digits.len() {
            digits[i] += 1;
            if digits[i] < alphabet.len() {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
        if i == digits.len() {
            return Ok(best);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{random_character, random_tree};
    use crate::io::newick::parse_newick;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn t(s: &str) -> Tree {
        parse_newick(s).unwrap()
    }

    fn ch(tree: &Tree, states: &[usize]) -> Character {
        Character::from_states(tree, states, None).unwrap()
    }

    fn backbone(tree: &Tree) -> Edge {
        *tree.edges().iter().find(|e| !tree.is_leaf(e.u()) && !tree.is_leaf(e.v())).unwrap()
    }

    #[test]
    fn constant_character() {
        let tree = t("((a,b),((c,d),e));");
        let f = ch(&tree, &[1; 5]);
        let map = fitch_map(&tree, &f, None).unwrap();
        for v in 0..tree.num_vertices() {
            if !tree.is_leaf(v) {
                assert_eq!(map.kind[v], VertexKind::Intersection);
                assert_eq!(map.candidate_sets[v], 0b10);
            }
        }
        assert_eq!(map.score(), 0);
        let ext = fitch_extension(&tree, &f, None).unwrap();
        assert!(ext.0.iter().all(|&s| s == 1));
        assert_eq!(mutation_count(&tree, &ext).unwrap(), 0);
    }

    #[test]
    fn alternating_quartet_rooted_on_backbone() {
        let tree = t("((a,b),(c,d));");
        let f = ch(&tree, &[0, 1, 0, 1]);
        let map = fitch_map(&tree, &f, Some(backbone(&tree))).unwrap();
        let parent_of = |x: TaxonId| tree.parent(x).unwrap();
        for x in [0, 2] {
            assert_eq!(map.kind[parent_of(x)], VertexKind::Union);
            assert_eq!(map.candidate_sets[parent_of(x)], 0b11);
        }
        assert_eq!(map.kind[tree.num_vertices()], VertexKind::Intersection);
        assert_eq!(map.score(), 2);
    }

    #[test]
    fn same_character_on_other_quartet() {
        let tree = t("((a,c),(b,d));");
        let f = ch(&tree, &[0, 1, 0, 1]);
        let map = fitch_map(&tree, &f, Some(backbone(&tree))).unwrap();
        assert_eq!(map.kind[tree.parent(0).unwrap()], VertexKind::Intersection);
        assert_eq!(map.candidate_sets[tree.parent(0).unwrap()], 0b01);
        assert_eq!(map.candidate_sets[tree.parent(1).unwrap()], 0b10);
        assert_eq!(map.kind[tree.num_vertices()], VertexKind::Union);
        assert_eq!(map.score(), 1);
    }

    #[test]
    fn scores_and_extensions_match_oracle_on_quartets() {
        let ab = t("((a,b),(c,d));");
        let ac = t("((a,c),(b,d));");
        let f = ch(&ab, &[0, 1, 0, 1]);
        assert_eq!(parsimony_score(&ab, &f).unwrap(), 2);
        assert_eq!(parsimony_score(&ac, &f).unwrap(), 1);
        assert_eq!(brute_force_parsimony_oracle(&ab, &f, BruteForceCaps::default()).unwrap(), 2);
        let ext = fitch_extension(&ab, &f, None).unwrap();
        assert_eq!(mutation_count(&ab, &ext).unwrap(), 2);
        let g = ch(&ab, &[0, 0, 1, 1]);
        assert_eq!(brute_force_parsimony_oracle(&ab, &g, BruteForceCaps::default()).unwrap(), 1);
    }

    #[test]
    fn uncovered_leaf_and_bad_edge() {
        let tree = t("((a,b),(c,d));");
        let other = t("((a,b),(c,e));");
        let f = ch(&other, &[0, 0, 1, 1]);
        assert!(matches!(parsimony_score(&tree, &f), Err(Error::UncoveredLeaf(_))));
        let g = ch(&tree, &[0, 0, 1, 1]);
        let not_an_edge = Edge::new(tree.leaf(0), tree.leaf(1));
        assert!(matches!(fitch_map(&tree, &g, Some(not_an_edge)), Err(Error::NoSuchEdge(..))));
    }

    #[test]
    fn too_many_states() {
        assert!(matches!(Character::new(BTreeMap::new(), Some(65)), Err(Error::TooManyStates(65))));
    }

    #[test]
    fn mutation_count_on_alternating_path() {
        let tree = t("(a,(b,(c,d)));");
        let sub = tree.induced_subtree(&[0, 3]).unwrap();
        let path = sub.tree.path(sub.tree.leaf(0), sub.tree.leaf(1));
        let mut states = vec![0; sub.tree.num_vertices()];
        for (i, &v) in path.iter().enumerate() {
            states[v] = i % 2;
        }
        assert_eq!(mutation_count(&sub.tree, &Extension(states)).unwrap(), path.len() - 1);
        assert!(mutation_count(&tree, &Extension(vec![0])).is_err());
    }

    #[test]
    fn parsimonious_extension_preserves_mutations() {
        let tree = t("(((((a,b),c),d),e),f);");
        let y = tree.taxon_ids(&["a", "c", "d", "f"]).unwrap();
        let sub = tree.induced_subtree(&y).unwrap();
        let m = sub.tree.num_vertices();
        for bits in 0u32..(1 << m) {
            let fbar = Extension((0..m).map(|i| ((bits >> i) & 1) as usize).collect());
            let ext = parsimonious_extension(&tree, &y, &fbar).unwrap();
            assert_eq!(mutation_count(&tree, &ext).unwrap(), mutation_count(&sub.tree, &fbar).unwrap());
        }
        let all: Vec<TaxonId> = (0..6).collect();
        let full = tree.induced_subtree(&all).unwrap();
        let fbar = Extension((0..full.tree.num_vertices()).collect());
        let ext = parsimonious_extension(&tree, &all, &fbar).unwrap();
        for (local, &host) in full.host_vertex.iter().enumerate() {
            assert_eq!(ext.0[host], fbar.0[local]);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn fitch_agrees_with_oracle_and_is_root_independent(seed in any::<u64>(), n in 2usize..8, k in 1usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let tree = random_tree(n, &mut rng).unwrap();
            let f = random_character(&tree, k, &mut rng).unwrap();
            let score = parsimony_score(&tree, &f).unwrap();
            prop_assert_eq!(score, brute_force_parsimony_oracle(&tree, &f, BruteForceCaps::default()).unwrap());
            for &e in tree.edges() {
                let map = fitch_map(&tree, &f, Some(e)).unwrap();
                prop_assert_eq!(map.score(), score);
                let ext = extension_from_map(&tree, &map);
                prop_assert_eq!(mutation_count(&tree, &ext).unwrap(), score);
                for x in 0..n {
                    prop_assert_eq!(ext.0[tree.leaf(x)], f.states_for(&tree).unwrap()[x]);
                }
            }
        }

        #[test]
        fn scorer_matches_fitch_map(seed in any::<u64>(), n in 1usize..12) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let tree = random_tree(n, &mut rng).unwrap();
            let f = random_character(&tree, 5, &mut rng).unwrap();
            let states = f.states_for(&tree).unwrap();
            prop_assert_eq!(Scorer::new(&tree).score(&states), parsimony_score(&tree, &f).unwrap());
        }

        #[test]
        fn renaming_states_keeps_score(seed in any::<u64>(), n in 2usize..10) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let tree = random_tree(n, &mut rng).unwrap();
            let f = random_character(&tree, 4, &mut rng).unwrap();
            let states = f.states_for(&tree).unwrap();
            let renamed: Vec<usize> = states.iter().map(|&s| [3, 0, 2, 1][s]).collect();
            let g = Character::from_states(&tree, &renamed, None).unwrap();
            prop_assert_eq!(parsimony_score(&tree, &f).unwrap(), parsimony_score(&tree, &g).unwrap());
        }

        #[test]
        fn induced_subtree_and_restriction_score_alike(seed in any::<u64>(), n in 2usize..12, mask in any::<u16>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let tree = random_tree(n, &mut rng).unwrap();
            let mut y: Vec<TaxonId> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
            if y.is_empty() {
                y.push(0);
            }
            let f = random_character(&tree, 3, &mut rng).unwrap();
            let sub = tree.induced_subtree(&y).unwrap().tree;
            let restricted = tree.restrict(&y).unwrap();
            let fy = f.restricted_to(&sub).unwrap();
            let on_sub = parsimony_score(&sub, &fy).unwrap();
            prop_assert_eq!(on_sub, parsimony_score(&restricted, &fy).unwrap());
            prop_assert!(on_sub <= parsimony_score(&tree, &f).unwrap());
        }
    }
}
