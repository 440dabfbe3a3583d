//! Random instances: binary trees by sequential leaf attachment and
//! perturbation by random TBR moves.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fitch::Character;
use crate::treecore::{tbr_move, Edge, Taxon, Tree, VertexId};

/// Taxon names `t1..tn`, zero-padded so lexicographic and numeric order agree.
pub fn taxon_names(n: usize) -> Vec<Taxon> {
    let width = n.max(1).to_string().len();
    (1..=n).map(|i| Taxon::new(format!("t{i:0width$}")).expect("generated names are valid")).collect()
}

/// A random binary tree on `taxa`: start from the first one, two or three
/// leaves and attach every further leaf to a uniformly chosen edge.
pub fn random_tree_on<R: Rng + ?Sized>(taxa: &[Taxon], rng: &mut R) -> Result<Tree> {
    let n = taxa.len();
    if n == 0 {
        return Err(Error::EmptyTaxonSet);
    }
    let mut order: Vec<Taxon> = taxa.to_vec();
    order.shuffle(rng);
    let mut labels: Vec<Option<Taxon>> = Vec::new();
    let mut edges: Vec<(VertexId, VertexId)> = Vec::new();
    match n {
        1 => labels.push(Some(order[0].clone())),
        2 => {
            labels.extend([Some(order[0].clone()), Some(order[1].clone())]);
            edges.push((0, 1));
        }
        _ => {
            labels.extend([None, Some(order[0].clone()), Some(order[1].clone()), Some(order[2].clone())]);
            edges.extend([(0, 1), (0, 2), (0, 3)]);
            for taxon in &order[3..] {
                let i = rng.gen_range(0..edges.len());
                let (u, v) = edges[i];
                let mid = labels.len();
                labels.push(None);
                let leaf = labels.len();
                labels.push(Some(taxon.clone()));
                edges[i] = (u, mid);
                edges.push((mid, v));
                edges.push((mid, leaf));
            }
        }
    }
    Tree::from_edges(&edges, labels)
}

/// A random binary tree on `n` generated taxa.
pub fn random_tree<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Tree> {
    random_tree_on(&taxon_names(n), rng)
}

/// Applies one uniformly random TBR move (cut edge and reattachment edges
/// drawn uniformly from the admissible ones).
pub fn random_tbr_move<R: Rng + ?Sized>(tree: &Tree, rng: &mut R) -> Result<Tree> {
    if tree.edges().len() < 3 {
        return Ok(tree.clone());
    }
    let cut = *tree.edges().choose(rng).expect("tree has edges");
    let pick = |s: VertexId, rng: &mut R| -> Option<Edge> {
        if tree.is_leaf(s) {
            return None;
        }
        let far = cut.other(s);
        let options: Vec<Edge> = tree
            .edges()
            .iter()
            .copied()
            .filter(|&e| e != cut && tree.path(e.u(), far).contains(&s))
            .collect();
        options.choose(rng).copied()
    };
    let ru = pick(cut.u(), rng);
    let rv = pick(cut.v(), rng);
    tbr_move(tree, cut, ru, rv)
}

/// A random tree on `n` taxa and its image under `moves` random TBR moves,
/// reproducible from `seed`. The TBR distance of the pair is at most `moves`.
pub fn gen_random_pair(n: usize, moves: usize, seed: u64) -> Result<(Tree, Tree)> {
    if n < 4 {
        return Err(Error::Precondition(format!("need at least 4 taxa, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t1 = random_tree(n, &mut rng)?;
    let mut t2 = t1.clone();
    for _ in 0..moves {
        t2 = random_tbr_move(&t2, &mut rng)?;
    }
    Ok((t1, t2))
}

/// A random character on the taxa of `tree` with states drawn from `0..t`.
pub fn random_character<R: Rng + ?Sized>(tree: &Tree, t: usize, rng: &mut R) -> Result<Character> {
    let states: Vec<usize> = (0..tree.num_leaves()).map(|_| rng.gen_range(0..t.max(1))).collect();
    Character::from_states(tree, &states, Some(t.max(1)))
}
