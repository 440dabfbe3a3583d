//! Two-state witness characters from a set of `T1`-leg-disjoint incompatible
//! quartets.
//!
//! A subset `Q_sel` is built together with a 2-colouring of `T2(X')`, where
//! `X'` is the union of the selected quartets' leaves. `beta` counts the legs
//! of selected quartets whose ends differ in colour (a lower bound on the
//! score in `T1`), `delta` the mutation edges of the colouring (an upper
//! bound on the score in `T2`). Every step raises `beta - delta` by at least
//! one while adding at most three quartets.

use std::collections::BTreeMap;

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use super::greedy::joint;
use crate::error::{Error, Result};
use crate::exact::AnnotatedQuartet;
use crate::treecore::{sides_and_pendants, Edge, SideDecomposition, TaxonId, TopologyOracle, Tree, VertexId};

/// One application of a construction step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessStep {
    pub case: String,
    pub added: usize,
    pub gain: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    /// `Q_sel`, with taxon ids of the input trees.
    pub quartets: Vec<AnnotatedQuartet>,
    /// Colour of every taxon of `X'`.
    pub colours: BTreeMap<TaxonId, u8>,
    pub beta: usize,
    pub delta: usize,
    pub steps: Vec<WitnessStep>,
}

impl Witness {
    /// `beta - delta`, a lower bound on `d_MP^2(T1, T2)`.
    pub fn bound(&self) -> usize {
        self.beta - self.delta
    }
}

/// A quartet in the ids of `T2|_Y`.
struct Local {
    taxa: [TaxonId; 4],
    legs: [[TaxonId; 2]; 2],
    cherries: [[TaxonId; 2]; 2],
}

impl Local {
    fn partner(&self, x: TaxonId) -> TaxonId {
        let [p, r] = self.legs;
        if p[0] == x {
            p[1]
        } else if p[1] == x {
            p[0]
        } else if r[0] == x {
            r[1]
        } else {
            r[0]
        }
    }
}

struct Builder<'a> {
    tree: &'a Tree,
    quartets: Vec<Local>,
    selected: Vec<usize>,
    taken: Vec<bool>,
    mask: Vec<bool>,
    colour: Vec<u8>,
    steps: Vec<WitnessStep>,
}

impl Builder<'_> {
    fn colour_of(&self, x: TaxonId) -> u8 {
        self.colour[self.tree.leaf(x)]
    }

    fn beta_with(&self, q: &Local, colour: &[u8]) -> usize {
        q.legs.iter().filter(|l| colour[self.tree.leaf(l[0])] != colour[self.tree.leaf(l[1])]).count()
    }

    fn beta(&self) -> usize {
        self.selected.iter().map(|&i| self.beta_with(&self.quartets[i], &self.colour)).sum()
    }

    fn delta(&self) -> usize {
        self.tree
            .edges()
            .iter()
            .filter(|e| self.mask[e.u()] && self.mask[e.v()] && self.colour[e.u()] != self.colour[e.v()])
            .count()
    }

    fn value(&self) -> isize {
        self.beta() as isize - self.delta() as isize
    }

    fn leaves(&self) -> Vec<TaxonId> {
        let mut out: Vec<TaxonId> = self.selected.iter().flat_map(|&i| self.quartets[i].taxa).collect();
        out.sort_unstable();
        out
    }

    /// The parsimonious extension of the current colouring to every vertex.
    fn extended(&self) -> Vec<u8> {
        let values = (0..self.tree.num_vertices()).map(|v| self.mask[v].then_some(self.colour[v])).collect();
        crate::fitch::spread_from_mask(self.tree, values)
    }

    /// Selects `qs`, growing the mask and colouring it by the parsimonious
    /// extension.
    fn add(&mut self, qs: &[usize]) -> Result<()> {
        let ext = self.extended();
        for &i in qs {
            self.taken[i] = true;
            self.selected.push(i);
        }
        self.mask = self.tree.induced_mask(&self.leaves())?;
        self.colour = ext;
        Ok(())
    }

    fn flip(&mut self, v: VertexId) {
        self.colour[v] ^= 1;
    }

    fn unselected(&self) -> Vec<usize> {
        (0..self.quartets.len()).filter(|&i| !self.taken[i]).collect()
    }

    /// Runs `step`, then checks the gain and the number of added quartets.
    fn apply(&mut self, case: &str, step: impl FnOnce(&mut Self) -> Result<()>) -> Result<()> {
        let (before, count) = (self.value(), self.selected.len());
        step(self)?;
        let (after, added) = (self.value(), self.selected.len() - count);
        if after <= before || added == 0 || added > 3 {
            return Err(Error::Internal(format!(
                "{case} changed beta - delta from {before} to {after} while adding {added} quartets"
            )));
        }
        debug!("{case}: +{added} quartets, bound {before} -> {after}");
        self.steps.push(WitnessStep { case: case.to_string(), added, gain: (after - before) as usize });
        Ok(())
    }

    fn phase_one(&mut self) -> Result<()> {
        let mut used = vec![false; self.tree.num_vertices()];
        let oracle = TopologyOracle::new(self.tree);
        let mut deleted = Vec::new();
        for i in 0..self.quartets.len() {
            let m = self.tree.induced_mask(&self.quartets[i].taxa)?;
            if (0..m.len()).any(|v| m[v] && used[v]) {
                continue;
            }
            (0..m.len()).filter(|&v| m[v]).for_each(|v| used[v] = true);
            let [p, r] = self.quartets[i].cherries;
            let u1 = joint(&oracle, p[0], p[1], r[0]);
            let u2 = joint(&oracle, r[0], r[1], p[0]);
            let backbone = oracle.path(u1, u2);
            deleted.push(Edge::new(backbone[0], backbone[1]));
            self.taken[i] = true;
            self.selected.push(i);
        }
        let leaves = self.leaves();
        self.mask = self.tree.induced_mask(&leaves)?;
        let start = self.tree.leaf(leaves[0]);
        let mut seen = vec![false; self.tree.num_vertices()];
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            for &y in self.tree.neighbours(x) {
                if self.mask[y] && !seen[y] {
                    seen[y] = true;
                    self.colour[y] = self.colour[x] ^ u8::from(deleted.contains(&Edge::new(x, y)));
                    stack.push(y);
                }
            }
        }
        let k = self.selected.len();
        if self.beta() != 2 * k || self.delta() != k {
            return Err(Error::Internal(format!(
                "initial colouring has beta {} and delta {} for {k} quartets",
                self.beta(),
                self.delta()
            )));
        }
        self.steps.push(WitnessStep { case: "disjoint".into(), added: k, gain: k });
        Ok(())
    }

    /// Tries one step of the second phase; `false` when none applies.
    fn phase_two_step(&mut self) -> Result<bool> {
        let open = self.unselected();
        if open.is_empty() {
            return Ok(false);
        }
        let ext = self.extended();
        if let Some(&i) = open.iter().find(|&&i| self.beta_with(&self.quartets[i], &ext) > 0) {
            self.apply("case 1", |b| b.add(&[i]))?;
            return Ok(true);
        }

        let dec = sides_and_pendants(self.tree, &self.leaves())?;
        for &i in &open {
            for p in &dec.pendants {
                let inside = |x: &TaxonId| p.leaves.binary_search(x).is_ok();
                if self.quartets[i].taxa.iter().filter(|x| inside(x)).count() < 2 {
                    continue;
                }
                let pair = *self.quartets[i]
                    .cherries
                    .iter()
                    .find(|c| c.iter().all(inside))
                    .ok_or_else(|| Error::Internal("no cherry of the quartet lies in the pendant subtree".into()))?;
                self.apply("case 2", |b| {
                    b.add(&[i])?;
                    for v in b.tree.path(b.tree.leaf(pair[0]), b.tree.leaf(pair[1])) {
                        b.flip(v);
                    }
                    Ok(())
                })?;
                return Ok(true);
            }
        }

        for p in &dec.pendants {
            let owners: Vec<usize> = open
                .iter()
                .copied()
                .filter(|&i| self.quartets[i].taxa.iter().any(|x| p.leaves.binary_search(x).is_ok()))
                .take(2)
                .collect();
            if owners.len() < 2 {
                continue;
            }
            let (attachment, root) = (p.attachment, p.root);
            self.apply("case 3", |b| {
                b.add(&owners)?;
                let mut stack = vec![root];
                let mut seen = vec![false; b.tree.num_vertices()];
                seen[root] = true;
                seen[attachment] = true;
                while let Some(x) = stack.pop() {
                    if b.mask[x] {
                        b.flip(x);
                    }
                    for &y in b.tree.neighbours(x) {
                        if !seen[y] {
                            seen[y] = true;
                            stack.push(y);
                        }
                    }
                }
                Ok(())
            })?;
            return Ok(true);
        }

        if dec.pendants.iter().any(|p| p.leaves.len() != 1) {
            warn!("a pendant subtree holds several leaves but no step applies; stopping");
            return Ok(false);
        }
        if self.normalise_sides(&dec)? {
            return Ok(true);
        }
        self.side_step(&dec, &open)
    }

    /// Makes the interior of every side monochromatic without increasing
    /// `delta`; reports whether any colour changed.
    fn normalise_sides(&mut self, dec: &SideDecomposition) -> Result<bool> {
        let before = self.delta();
        let mut changed = false;
        for side in dec.sides.iter().filter(|s| s.len() > 2) {
            let interior = &side[1..side.len() - 1];
            let ones = interior.iter().filter(|&&v| self.colour[v] == 1).count();
            let mut c = match (2 * ones).cmp(&interior.len()) {
                std::cmp::Ordering::Greater => 1,
                std::cmp::Ordering::Less => 0,
                std::cmp::Ordering::Equal => self.colour[side[0]],
            };
            let mutations = |c: u8| {
                usize::from(self.colour[side[0]] != c) + usize::from(self.colour[*side.last().unwrap()] != c)
            };
            let old = side.windows(2).filter(|w| self.colour[w[0]] != self.colour[w[1]]).count();
            if mutations(c) > old {
                c ^= 1;
            }
            for &v in interior {
                if self.colour[v] != c {
                    self.colour[v] = c;
                    changed = true;
                }
            }
        }
        if self.delta() > before {
            return Err(Error::Internal("making sides monochromatic increased delta".into()));
        }
        Ok(changed)
    }

    fn side_step(&mut self, dec: &SideDecomposition, open: &[usize]) -> Result<bool> {
        let mut position: BTreeMap<TaxonId, (usize, usize)> = BTreeMap::new();
        let mut at: BTreeMap<VertexId, (usize, usize)> = BTreeMap::new();
        for (s, side) in dec.sides.iter().enumerate() {
            for (i, &v) in side.iter().enumerate().take(side.len() - 1).skip(1) {
                at.insert(v, (s, i));
            }
        }
        for p in &dec.pendants {
            let place = *at
                .get(&p.attachment)
                .ok_or_else(|| Error::Internal("a pendant leaf hangs off a branching vertex".into()))?;
            position.insert(p.leaves[0], place);
        }
        let on = |x: TaxonId, s: usize| position.get(&x).is_some_and(|&(t, _)| t == s);
        let pos = |x: TaxonId| position[&x].1;

        for s in 0..dec.sides.len() {
            let qs: Vec<usize> = open
                .iter()
                .copied()
                .filter(|&i| self.quartets[i].taxa.iter().any(|&x| on(x, s) && !on(self.quartets[i].partner(x), s)))
                .take(3)
                .collect();
            if qs.len() < 3 {
                continue;
            }
            let side = dec.sides[s].clone();
            let leaves: Vec<TaxonId> =
                qs.iter().flat_map(|&i| self.quartets[i].taxa).filter(|&x| on(x, s)).collect();
            self.apply("case 4.1", |b| {
                b.add(&qs)?;
                for &v in &side[1..side.len() - 1] {
                    b.flip(v);
                }
                for &x in &leaves {
                    b.flip(b.tree.leaf(x));
                }
                Ok(())
            })?;
            return Ok(true);
        }

        let whole = |i: usize, s: usize| self.quartets[i].taxa.iter().all(|&x| on(x, s));
        let ends = |i: usize| {
            let mut xs = self.quartets[i].taxa;
            xs.sort_by_key(|&x| pos(x));
            xs
        };
        for s in 0..dec.sides.len() {
            let Some(&q1) = open.iter().find(|&&i| whole(i, s)) else {
                continue;
            };
            let Some((q2, x)) = open.iter().filter(|&&i| i != q1).find_map(|&i| {
                let q = &self.quartets[i];
                q.taxa.iter().find(|&&x| on(x, s) && !on(q.partner(x), s)).map(|&x| (i, x))
            }) else {
                continue;
            };
            let order = ends(q1);
            let candidates: Vec<TaxonId> = [q1, q2]
                .iter()
                .flat_map(|&i| self.quartets[i].taxa)
                .filter(|&y| on(y, s))
                .collect();
            let chosen: Vec<TaxonId> = if pos(x) > pos(order[1]) {
                candidates.into_iter().filter(|&y| pos(y) > pos(order[1])).collect()
            } else {
                candidates.into_iter().filter(|&y| pos(y) < pos(order[2])).collect()
            };
            let side = dec.sides[s].clone();
            self.apply("case 4.2", |b| b.flip_on_side(&[q1, q2], &side, &chosen, pos))?;
            return Ok(true);
        }

        for s in 0..dec.sides.len() {
            let full: Vec<usize> = open.iter().copied().filter(|&i| whole(i, s)).take(2).collect();
            if full.len() < 2 {
                continue;
            }
            let (mut o1, mut o2) = (ends(full[0]), ends(full[1]));
            let chosen: Vec<TaxonId> = if pos(o1[1]).max(pos(o2[1])) < pos(o1[2]).min(pos(o2[2])) {
                vec![o1[0], o1[1], o2[0], o2[1]]
            } else {
                if pos(o1[2]) > pos(o2[1]) {
                    std::mem::swap(&mut o1, &mut o2);
                }
                let ([a1, c1, b1, d1], [a2, c2, b2, d2]) = (o1, o2);
                if pos(b1) >= pos(c2) {
                    return Err(Error::Internal("two quartets on a side interleave unexpectedly".into()));
                }
                if pos(a2) < pos(b1) {
                    vec![b1, d1, c2, b2, d2]
                } else if pos(d1) > pos(c2) {
                    vec![a1, c1, b1, a2, c2]
                } else {
                    vec![b1, d1, a2, c2]
                }
            };
            let side = dec.sides[s].clone();
            self.apply("case 4.3", |b| b.flip_on_side(&full, &side, &chosen, pos))?;
            return Ok(true);
        }
        Ok(false)
    }

    /// Adds `qs`, then flips the leaves `chosen` and the side vertices
    /// spanned by them.
    fn flip_on_side(
        &mut self,
        qs: &[usize],
        side: &[VertexId],
        chosen: &[TaxonId],
        pos: impl Fn(TaxonId) -> usize,
    ) -> Result<()> {
        self.add(qs)?;
        let lo = chosen.iter().map(|&x| pos(x)).min().expect("non-empty");
        let hi = chosen.iter().map(|&x| pos(x)).max().expect("non-empty");
        for &v in &side[lo..=hi] {
            self.flip(v);
        }
        for &x in chosen {
            self.flip(self.tree.leaf(x));
        }
        Ok(())
    }
}

/// Builds a witness from pairwise `T1`-leg-disjoint incompatible quartets.
pub fn witness_character(t1: &Tree, t2: &Tree, quartets: &[AnnotatedQuartet]) -> Result<Witness> {
    t1.check_same_taxa(t2)?;
    let mut qs = quartets.to_vec();
    qs.sort();
    qs.dedup();
    if qs.is_empty() {
        return Ok(Witness { quartets: Vec::new(), colours: BTreeMap::new(), beta: 0, delta: 0, steps: Vec::new() });
    }
    let mut legs_seen: Vec<Edge> = Vec::new();
    for aq in &qs {
        if t1.quartet_topology(aq.quartet)? != aq.t1 || t2.quartet_topology(aq.quartet)? != aq.t2 || aq.t1 == aq.t2 {
            return Err(Error::Precondition(format!(
                "quartet {} is not an incompatible quartet with the given resolutions",
                aq.t1.display(aq.quartet, t1)
            )));
        }
        for e in crate::exact::leg_edges(t1, aq.quartet, aq.t1) {
            if legs_seen.contains(&e) {
                return Err(Error::Precondition("quartets are not leg-disjoint in T1".into()));
            }
            legs_seen.push(e);
        }
    }

    let mut y: Vec<TaxonId> = qs.iter().flat_map(|aq| aq.quartet.taxa()).collect();
    y.sort_unstable();
    let tree = t2.restrict(&y)?;
    let local: BTreeMap<TaxonId, TaxonId> =
        y.iter().map(|&x| Ok((x, tree.taxon_id(t2.taxon(x).as_str()).ok_or(Error::Internal("lost taxon".into()))?))).collect::<Result<_>>()?;
    let global: BTreeMap<TaxonId, TaxonId> = local.iter().map(|(&g, &l)| (l, g)).collect();
    let map = |s: [TaxonId; 2]| s.map(|x| local[&x]);
    let locals = qs
        .iter()
        .map(|aq| {
            let (p, r) = aq.t1.split(aq.quartet);
            let (u, w) = aq.t2.split(aq.quartet);
            Local { taxa: aq.quartet.taxa().map(|x| local[&x]), legs: [map(p), map(r)], cherries: [map(u), map(w)] }
        })
        .collect();

    let n = qs.len();
    let mut b = Builder {
        tree: &tree,
        quartets: locals,
        selected: Vec::new(),
        taken: vec![false; n],
        mask: vec![false; tree.num_vertices()],
        colour: vec![0; tree.num_vertices()],
        steps: Vec::new(),
    };
    b.phase_one()?;
    while b.phase_two_step()? {}

    let k = b.selected.len();
    if 9 * k < n {
        return Err(Error::Internal(format!("selected {k} of {n} quartets, fewer than a ninth")));
    }
    let (beta, delta) = (b.beta(), b.delta());
    if beta < delta || 3 * (beta - delta) < k {
        return Err(Error::Internal(format!("bound {beta} - {delta} is below a third of {k} quartets")));
    }
    let mut selected: Vec<AnnotatedQuartet> = b.selected.iter().map(|&i| qs[i]).collect();
    selected.sort();
    let colours = b.leaves().into_iter().map(|x| (global[&x], b.colour_of(x))).collect();
    Ok(Witness { quartets: selected, colours, beta, delta, steps: b.steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::greedy::greedy_leg_disjoint;
    use crate::fitch::{parsimony_score, Character};
    use crate::generate::gen_random_pair;
    use crate::io::newick::parse_newick;
    use proptest::prelude::*;

    fn check(t1: &Tree, t2: &Tree, w: &Witness) {
        let xs: Vec<TaxonId> = w.colours.keys().copied().collect();
        if xs.is_empty() {
            return;
        }
        let (r1, r2) = (t1.restrict(&xs).unwrap(), t2.restrict(&xs).unwrap());
        let assignment = w.colours.iter().map(|(&x, &c)| (t1.taxon(x).clone(), c as usize)).collect();
        let f = Character::new(assignment, Some(2)).unwrap();
        let (l1, l2) = (parsimony_score(&r1, &f).unwrap(), parsimony_score(&r2, &f).unwrap());
        assert!(l1 >= w.beta, "l1 {l1} < beta {}", w.beta);
        assert!(l2 <= w.delta, "l2 {l2} > delta {}", w.delta);
        assert!(l1 - l2 >= w.bound());
    }

    #[test]
    fn single_conflicting_quartet() {
        let a = parse_newick("((a,b),(c,d));").unwrap();
        let b = parse_newick("((a,c),(b,d));").unwrap();
        let g = greedy_leg_disjoint(&a, &b).unwrap();
        let w = witness_character(&a, &b, &g.quartets).unwrap();
        assert_eq!((w.beta, w.delta, w.bound()), (2, 1, 1));
        assert_eq!(w.colours[&0], w.colours[&2]);
        assert_ne!(w.colours[&0], w.colours[&1]);
        check(&a, &b, &w);
    }

    #[test]
    fn rejects_overlapping_legs() {
        let a = parse_newick("((a,b),((c,d),e));").unwrap();
        let b = parse_newick("((a,c),((b,e),d));").unwrap();
        let q = crate::exact::incompatible_quartets(&a, &b).unwrap();
        let err = witness_character(&a, &b, &q);
        assert!(matches!(err, Err(Error::Precondition(_))));
    }

    #[test]
    fn empty_input_gives_zero() {
        let a = parse_newick("((a,b),(c,d));").unwrap();
        let w = witness_character(&a, &a, &[]).unwrap();
        assert_eq!(w.bound(), 0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn witness_is_sound(seed in any::<u64>(), n in 4usize..25, r in 1usize..6) {
            let (a, b) = gen_random_pair(n, r, seed).unwrap();
            let g = greedy_leg_disjoint(&a, &b).unwrap();
            let w = witness_character(&a, &b, &g.quartets).unwrap();
            prop_assert!(9 * w.quartets.len() >= g.quartets.len());
            prop_assert!(3 * w.bound() >= w.quartets.len());
            prop_assert_eq!(w.steps.iter().map(|s| s.added).sum::<usize>(), w.quartets.len());
            check(&a, &b, &w);
        }
    }
}
