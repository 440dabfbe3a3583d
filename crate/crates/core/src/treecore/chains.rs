use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::tree::{TaxonId, Tree, VertexId};
use crate::error::Result;

/// A common chain `<x1, ..., xk>` of two trees.
///
/// `pendant_first` holds when `x1` and `x2` share a parent in both trees,
/// `pendant_last` likewise for `x(k-1)` and `xk`. The leaf order is canonical:
/// pendant end pairs are sorted and the lexicographically smaller of the two
/// orientations is kept.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Chain {
    pub leaves: Vec<TaxonId>,
    pub pendant_first: bool,
    pub pendant_last: bool,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.leaves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaves.is_empty()
    }
}

/// All pairs `(x, y)` with `x < y` that are cherries of both trees.
pub fn common_cherries(t1: &Tree, t2: &Tree) -> Result<Vec<(TaxonId, TaxonId)>> {
    t1.check_same_taxa(t2)?;
    let second: BTreeSet<_> = t2.cherries().into_iter().collect();
    Ok(t1.cherries().into_iter().filter(|c| second.contains(c)).collect())
}

impl Tree {
    /// Pairs of leaves `(x, y)`, `x < y`, sharing a parent.
    pub fn cherries(&self) -> Vec<(TaxonId, TaxonId)> {
        let mut out = Vec::new();
        for v in 0..self.num_vertices() {
            if self.is_leaf(v) {
                continue;
            }
            let leaves: Vec<TaxonId> = self.neighbours(v).iter().filter_map(|&w| self.label(w)).collect();
            for i in 0..leaves.len() {
                for j in i + 1..leaves.len() {
                    out.push((leaves[i].min(leaves[j]), leaves[i].max(leaves[j])));
                }
            }
        }
        out.sort_unstable();
        out
    }

    fn internal_parent(&self, x: TaxonId) -> Option<VertexId> {
        self.parent(x).filter(|&p| !self.is_leaf(p))
    }

    /// Whether `seq` is a chain: the parents form a path, with equal
    /// consecutive parents allowed only for the first and last pair.
    pub fn is_chain(&self, seq: &[TaxonId]) -> bool {
        let k = seq.len();
        if k == 0 {
            return false;
        }
        let mut parents = Vec::with_capacity(k);
        for &x in seq {
            match self.internal_parent(x) {
                Some(p) => parents.push(p),
                None => return false,
            }
        }
        let mut collapsed: Vec<VertexId> = vec![parents[0]];
        for i in 0..k - 1 {
            let (p, q) = (parents[i], parents[i + 1]);
            if p == q {
                if i != 0 && i != k - 2 {
                    return false;
                }
            } else {
                if !self.neighbours(p).contains(&q) {
                    return false;
                }
                collapsed.push(q);
            }
        }
        let mut sorted = collapsed.clone();
        sorted.sort_unstable();
        sorted.windows(2).all(|w| w[0] != w[1])
    }

    /// Leaves whose parent equals or neighbours the parent of `x`.
    fn chain_neighbours(&self, x: TaxonId) -> Vec<TaxonId> {
        let Some(p) = self.internal_parent(x) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for &w in std::iter::once(&p).chain(self.neighbours(p)) {
            if let Some(t) = self.label(w) {
                if t != x {
                    out.push(t);
                }
                continue;
            }
            if w != p {
                out.extend(self.neighbours(w).iter().filter_map(|&z| self.label(z)));
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// All maximal common chains with at least two leaves.
pub fn common_chains(t1: &Tree, t2: &Tree) -> Result<Vec<Chain>> {
    t1.check_same_taxa(t2)?;
    let valid = |s: &[TaxonId]| t1.is_chain(s) && t2.is_chain(s);
    let extensions = |s: &[TaxonId]| -> bool {
        let last = *s.last().unwrap();
        t1.chain_neighbours(last).into_iter().any(|z| {
            if s.contains(&z) {
                return false;
            }
            let mut ext = s.to_vec();
            ext.push(z);
            valid(&ext)
        })
    };

    let mut found = BTreeSet::new();
    let mut stack: Vec<Vec<TaxonId>> = (0..t1.num_leaves()).map(|x| vec![x]).collect();
    while let Some(seq) = stack.pop() {
        let last = *seq.last().unwrap();
        let mut extended = false;
        for z in t1.chain_neighbours(last) {
            if seq.contains(&z) {
                continue;
            }
            let mut next = seq.clone();
            next.push(z);
            if valid(&next) {
                extended = true;
                stack.push(next);
            }
        }
        if extended || seq.len() < 2 {
            continue;
        }
        let mut rev = seq.clone();
        rev.reverse();
        if extensions(&rev) {
            continue;
        }
        found.insert(canonical_chain(t1, t2, seq));
    }
    Ok(found.into_iter().collect())
}

fn canonical_chain(t1: &Tree, t2: &Tree, seq: Vec<TaxonId>) -> Chain {
    let same_parent = |x: TaxonId, y: TaxonId| {
        t1.parent(x) == t1.parent(y) && t2.parent(x) == t2.parent(y)
    };
    let normalize = |mut s: Vec<TaxonId>| {
        let k = s.len();
        if same_parent(s[0], s[1]) && s[0] > s[1] {
            s.swap(0, 1);
        }
        if k > 2 && same_parent(s[k - 2], s[k - 1]) && s[k - 2] > s[k - 1] {
            s.swap(k - 2, k - 1);
        }
        s
    };
    let forward = normalize(seq.clone());
    let mut rev = seq;
    rev.reverse();
    let backward = normalize(rev);
    let leaves = forward.min(backward);
    let k = leaves.len();
    Chain {
        pendant_first: same_parent(leaves[0], leaves[1]),
        pendant_last: same_parent(leaves[k - 2], leaves[k - 1]),
        leaves,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::newick::parse_newick;

    fn t(s: &str) -> Tree {
        parse_newick(s).unwrap()
    }

    fn names(tree: &Tree, ids: &[TaxonId]) -> Vec<String> {
        ids.iter().map(|&i| tree.taxon(i).to_string()).collect()
    }

    /// Every ordered sequence of distinct leaves that is a chain in both
    /// trees, filtered to those not extendable at either end.
    fn brute_force_maximal(t1: &Tree, t2: &Tree) -> BTreeSet<Chain> {
        let n = t1.num_leaves();
        let mut all = Vec::new();
        let mut stack: Vec<Vec<TaxonId>> = (0..n).map(|x| vec![x]).collect();
        while let Some(s) = stack.pop() {
            if s.len() >= 2 {
                all.push(s.clone());
            } else if !(t1.is_chain(&s) && t2.is_chain(&s)) {
                continue;
            }
            for z in 0..n {
                if !s.contains(&z) {
                    let mut e = s.clone();
                    e.push(z);
                    // chains are prefix-closed, so invalid prefixes can be dropped
                    if t1.is_chain(&e) && t2.is_chain(&e) {
                        stack.push(e);
                    }
                }
            }
        }
        let ok = |s: &[TaxonId]| t1.is_chain(s) && t2.is_chain(s);
        let valid: Vec<_> = all.into_iter().filter(|s| ok(s)).collect();
        let extendable = |s: &Vec<TaxonId>| {
            (0..n).filter(|z| !s.contains(z)).any(|z| {
                let mut r = s.clone();
                r.push(z);
                let mut l = vec![z];
                l.extend(s);
                ok(&r) || ok(&l)
            })
        };
        valid
            .iter()
            .filter(|s| !extendable(s))
            .map(|s| canonical_chain(t1, t2, s.clone()))
            .collect()
    }

    #[test]
    fn cherries_of_identical_trees() {
        let a = t("((a,b),(c,d));");
        assert_eq!(common_cherries(&a, &a).unwrap(), vec![(0, 1), (2, 3)]);
    }

    #[test]
    fn cherries_of_conflicting_quartet() {
        let a = t("((a,b),(c,d));");
        let b = t("((a,c),(b,d));");
        assert!(common_cherries(&a, &b).unwrap().is_empty());
    }

    #[test]
    fn cherries_five_leaves() {
        let a = t("((a,b),(c,(d,e)));");
        let b = t("((a,b),(d,(c,e)));");
        assert_eq!(common_cherries(&a, &b).unwrap(), vec![(0, 1)]);
    }

    #[test]
    fn cherries_require_same_taxa() {
        let a = t("((a,b),(c,d));");
        let b = t("((a,b),(c,e));");
        assert!(common_cherries(&a, &b).is_err());
    }

    #[test]
    fn identical_caterpillars_have_one_chain() {
        let a = t("(((((x1,x2),x3),x4),x5),x6);");
        let chains = common_chains(&a, &a).unwrap();
        assert_eq!(chains.len(), 1);
        assert_eq!(names(&a, &chains[0].leaves), ["x1", "x2", "x3", "x4", "x5", "x6"]);
        assert!(chains[0].pendant_first && chains[0].pendant_last);
        assert_eq!(chains.into_iter().collect::<BTreeSet<_>>(), brute_force_maximal(&a, &a));
    }

    #[test]
    fn swapped_caterpillar_ends_keep_inner_chain() {
        let a = t("(((((((a,x1),x2),x3),x4),x5),x6),b);");
        let b = t("(((((((b,x1),x2),x3),x4),x5),x6),a);");
        let chains = common_chains(&a, &b).unwrap();
        let want: Vec<TaxonId> = a.taxon_ids(&["x1", "x2", "x3", "x4", "x5", "x6"]).unwrap();
        assert!(chains.iter().any(|c| c.leaves == want), "{chains:?}");
        assert_eq!(chains.into_iter().collect::<BTreeSet<_>>(), brute_force_maximal(&a, &b));
    }

    #[test]
    fn conflicting_quartet_has_only_short_chains() {
        // <a,b,d> is a chain of both trees under the parent-path definition
        let a = t("((a,b),(c,d));");
        let b = t("((a,c),(b,d));");
        let chains = common_chains(&a, &b).unwrap();
        assert!(chains.iter().all(|c| c.len() <= 3));
        assert_eq!(chains.into_iter().collect::<BTreeSet<_>>(), brute_force_maximal(&a, &b));
    }

    #[test]
    fn chain_predicate() {
        let a = t("(((((x1,x2),x3),x4),x5),x6);");
        let ids = |v: &[&str]| a.taxon_ids(v).unwrap();
        assert!(a.is_chain(&ids(&["x1", "x2", "x3"])));
        assert!(a.is_chain(&ids(&["x2", "x1", "x3"])));
        assert!(!a.is_chain(&ids(&["x1", "x3", "x2"])));
        assert!(a.is_chain(&ids(&["x1", "x3"])));
        assert!(!a.is_chain(&ids(&["x1", "x4"])));
    }
}
