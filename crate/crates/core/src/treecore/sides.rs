use super::tree::{TaxonId, Tree, VertexId};
use crate::error::{Error, Result};

/// A pendant subtree of `T(Y)` in `T`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pendant {
    /// Vertex of `T(Y)` the subtree hangs from.
    pub attachment: VertexId,
    /// The subtree vertex adjacent to `attachment`.
    pub root: VertexId,
    pub leaves: Vec<TaxonId>,
}

/// Sides and pendant subtrees of an induced subtree, in host vertex ids.
#[derive(Clone, Debug, Default)]
pub struct SideDecomposition {
    /// Maximal paths of `T(Y)` whose interior vertices have degree 2 in `T(Y)`.
    /// Each side starts at its smaller endpoint.
    pub sides: Vec<Vec<VertexId>>,
    pub pendants: Vec<Pendant>,
    /// Vertex mask of `T(Y)`.
    pub mask: Vec<bool>,
}

/// Decomposes `T(Y)` into sides and lists its pendant subtrees in `T`.
pub fn sides_and_pendants(tree: &Tree, ids: &[TaxonId]) -> Result<SideDecomposition> {
    if ids.len() < 2 {
        return Err(Error::Precondition("at least two taxa are needed to have sides".into()));
    }
    let mask = tree.induced_mask(ids)?;
    Ok(decompose(tree, mask))
}

pub(crate) fn decompose(tree: &Tree, mask: Vec<bool>) -> SideDecomposition {
    let n = tree.num_vertices();
    let deg = |v: VertexId| tree.neighbours(v).iter().filter(|&&w| mask[w]).count();
    let mut sides = Vec::new();
    for v in (0..n).filter(|&v| mask[v] && deg(v) != 2) {
        for &w0 in tree.neighbours(v).iter().filter(|&&w| mask[w]) {
            let mut path = vec![v];
            let (mut prev, mut w) = (v, w0);
            while deg(w) == 2 {
                path.push(w);
                let next = *tree
                    .neighbours(w)
                    .iter()
                    .find(|&&z| mask[z] && z != prev)
                    .expect("degree-2 vertex has a second neighbour");
                prev = w;
                w = next;
            }
            path.push(w);
            if path[0] < *path.last().unwrap() {
                sides.push(path);
            }
        }
    }
    sides.sort();

    let mut pendants = Vec::new();
    for v in (0..n).filter(|&v| mask[v]) {
        for &w in tree.neighbours(v).iter().filter(|&&w| !mask[w]) {
            let leaves = tree.reachable_leaves(w, |_, y| y != v);
            pendants.push(Pendant { attachment: v, root: w, leaves });
        }
    }
    pendants.sort_by(|a, b| a.leaves.cmp(&b.leaves));
    SideDecomposition { sides, pendants, mask }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::newick::parse_newick;

    #[test]
    fn quartet_tree_has_five_sides() {
        let t = parse_newick("((a,b),(c,d));").unwrap();
        let d = sides_and_pendants(&t, &[0, 1, 2, 3]).unwrap();
        assert_eq!(d.sides.len(), 5);
        assert!(d.sides.iter().all(|s| s.len() == 2));
        assert!(d.pendants.is_empty());
    }

    #[test]
    fn caterpillar_ends() {
        let t = parse_newick("(((((a,b),c),d),e),f);").unwrap();
        let ids = t.taxon_ids(&["a", "f"]).unwrap();
        let d = sides_and_pendants(&t, &ids).unwrap();
        assert_eq!(d.sides.len(), 1);
        assert_eq!(d.sides[0].len(), 6);
        let leaves: Vec<Vec<TaxonId>> = d.pendants.iter().map(|p| p.leaves.clone()).collect();
        assert_eq!(leaves, vec![vec![1], vec![2], vec![3], vec![4]]);
    }

    #[test]
    fn too_few_taxa() {
        let t = parse_newick("((a,b),(c,d));").unwrap();
        assert!(sides_and_pendants(&t, &[0]).is_err());
    }

    #[test]
    fn pendant_subtree_with_several_leaves() {
        let t = parse_newick("((a,b),((c,d),e));").unwrap();
        let ids = t.taxon_ids(&["a", "b", "e"]).unwrap();
        let d = sides_and_pendants(&t, &ids).unwrap();
        assert_eq!(d.pendants.len(), 1);
        assert_eq!(d.pendants[0].leaves, t.taxon_ids(&["c", "d"]).unwrap());
    }
}
