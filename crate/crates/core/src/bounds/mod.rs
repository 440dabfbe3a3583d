//! Lower bounds on `d_MP^t` from leg-disjoint incompatible quartets, with
//! certificates that can be checked independently of their construction.

pub mod greedy;
pub mod verify;
pub mod witness;

use std::collections::BTreeMap;

use log::info;

pub use greedy::{greedy_leg_disjoint, lg, quartet_geometry, GreedyResult, GreedyStep, QuartetGeometry};
pub use verify::{verify_certificate, CheckResult, VerificationReport};
pub use witness::{witness_character, Witness, WitnessStep};

use crate::error::{Error, Result};
use crate::fitch::{fitch_extension, parsimonious_extension, parsimony_score, Character};
use crate::io::certificate::{
    CertificateDocument, LegTree, Metadata, QuartetRecord, TreeRecord, UpperBound, CERTIFICATE_VERSION,
};
use crate::treecore::{Edge, TaxonId, Tree};

/// Extends `f`, given on a subset `Y` of the taxa, to all taxa of `t1`: an
/// optimal extension to `T1(Y)` is spread to every vertex of `T1` by the
/// parsimonious extension. The score in `t1` does not grow, and by
/// restriction the score in `t2` does not shrink.
pub fn lift_character(t1: &Tree, t2: &Tree, f: &Character) -> Result<Character> {
    t1.check_same_taxa(t2)?;
    let names: Vec<&str> = f.assignment().keys().map(|t| t.as_str()).collect();
    let y = t1.taxon_ids(&names)?;
    if y.is_empty() {
        return Err(Error::EmptyTaxonSet);
    }
    let sub = t1.induced_subtree(&y)?;
    let ext = fitch_extension(&sub.tree, f, None)?;
    let full = parsimonious_extension(t1, &y, &ext)?;
    let states: Vec<usize> = (0..t1.num_leaves()).map(|x| full.0[t1.leaf(x)]).collect();
    Character::from_states(t1, &states, f.num_states())
}

/// The result of certification: the document and the runs behind it.
#[derive(Clone, Debug)]
pub struct Certified {
    pub document: CertificateDocument,
    pub greedy: GreedyResult,
    pub witness: Witness,
}

struct Run {
    greedy: GreedyResult,
    witness: Witness,
    gap: usize,
}

fn run(leg: &Tree, other: &Tree) -> Result<Run> {
    let greedy = greedy_leg_disjoint(leg, other)?;
    let witness = witness_character(leg, other, &greedy.quartets)?;
    let gap = if witness.colours.is_empty() {
        0
    } else {
        let xs: Vec<TaxonId> = witness.colours.keys().copied().collect();
        let f = witness_as_character(leg, &witness)?;
        let l1 = parsimony_score(&leg.restrict(&xs)?, &f)?;
        let l2 = parsimony_score(&other.restrict(&xs)?, &f)?;
        if l1 < l2 || l1 - l2 < witness.bound() {
            return Err(Error::Internal(format!(
                "witness claims {} but scores are {l1} and {l2}",
                witness.bound()
            )));
        }
        l1 - l2
    };
    Ok(Run { greedy, witness, gap })
}

/// The witness colouring as a two-state character over `X'`.
pub fn witness_as_character(tree: &Tree, w: &Witness) -> Result<Character> {
    let assignment = w.colours.iter().map(|(&x, &c)| (tree.taxon(x).clone(), c as usize)).collect();
    Character::new(assignment, Some(2))
}

/// For each cut edge, the taxa on the side without taxon 0.
fn splits(tree: &Tree, edges: &[Edge]) -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = edges
        .iter()
        .map(|&e| {
            let side = |v| tree.reachable_leaves(v, |x, y| Edge::new(x, y) != e);
            let u = side(e.u());
            let s = if u.contains(&0) { side(e.v()) } else { u };
            s.into_iter().map(|x| tree.taxon(x).to_string()).collect()
        })
        .collect();
    out.sort();
    out
}

/// Runs the greedy selection and witness construction with each tree as
/// `T1`, and certifies the larger verified bound together with the smaller
/// cut as an upper bound on `d_TBR`.
pub fn certified_lower_bound(t1: &Tree, t2: &Tree, seed: Option<u64>) -> Result<Certified> {
    t1.check_same_taxa(t2)?;
    let (a, b) = rayon::join(|| run(t1, t2), || run(t2, t1));
    let (a, b) = (a?, b?);
    let (leg_tree, chosen) = if b.gap > a.gap { (LegTree::T2, &b) } else { (LegTree::T1, &a) };
    let (cut_tree, cut) = if b.greedy.edges.len() < a.greedy.edges.len() {
        (LegTree::T2, &b.greedy)
    } else {
        (LegTree::T1, &a.greedy)
    };
    let name = |x: TaxonId| t1.taxon(x).to_string();
    let quartets = chosen
        .witness
        .quartets
        .iter()
        .map(|aq| {
            let (t1_top, t2_top) = match leg_tree {
                LegTree::T1 => (aq.t1, aq.t2),
                LegTree::T2 => (aq.t2, aq.t1),
            };
            QuartetRecord {
                taxa: aq.quartet.taxa().map(name),
                t1: t1_top.display(aq.quartet, t1),
                t2: t2_top.display(aq.quartet, t2),
            }
        })
        .collect();
    let character: BTreeMap<String, u8> = chosen.witness.colours.iter().map(|(&x, &c)| (name(x), c)).collect();
    let cut_on = if cut_tree == LegTree::T1 { t1 } else { t2 };
    let document = CertificateDocument {
        version: CERTIFICATE_VERSION.to_string(),
        t1: TreeRecord::new(t1),
        t2: TreeRecord::new(t2),
        leg_tree,
        quartets,
        character,
        beta: chosen.witness.beta as u64,
        delta: chosen.witness.delta as u64,
        claimed_bound: chosen.gap as u64,
        upper_bound: UpperBound {
            tree: cut_tree,
            splits: splits(cut_on, &cut.edges),
            value: cut.edges.len() as u64,
        },
        metadata: Metadata {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            greedy_quartets: chosen.greedy.quartets.len() as u64,
            incompatible_quartets: chosen.greedy.incompatible as u64,
            notes: Vec::new(),
        },
    };
    let report = verify_certificate(t1, t2, &document)?;
    if !report.accepted() {
        return Err(Error::Internal(format!("generated certificate fails {:?}", report.failed())));
    }
    info!(
        "certified d_MP^2 >= {} with {} quartets; d_TBR <= {}",
        document.claimed_bound,
        document.quartets.len(),
        document.upper_bound.value
    );
    let chosen = if leg_tree == LegTree::T1 { a } else { b };
    Ok(Certified { document, greedy: chosen.greedy, witness: chosen.witness })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{dmp_exact, dtbr_hitting_set, StateBound};
    use crate::generate::{gen_random_pair, random_character};
    use crate::io::newick::parse_newick;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn t(s: &str) -> Tree {
        parse_newick(s).unwrap()
    }

    #[test]
    fn identical_trees_certify_zero() {
        let a = t("((a,b),((c,d),e));");
        let c = certified_lower_bound(&a, &a, None).unwrap();
        assert_eq!(c.document.claimed_bound, 0);
        assert_eq!(c.document.upper_bound.value, 0);
        assert!(c.document.quartets.is_empty());
    }

    #[test]
    fn conflicting_quartet_certifies_one() {
        let (a, b) = (t("((a,b),(c,d));"), t("((a,c),(b,d));"));
        let c = certified_lower_bound(&a, &b, Some(7)).unwrap();
        assert_eq!(c.document.claimed_bound, 1);
        assert_eq!(c.document.claimed_bound as usize, dmp_exact(&a, &b, StateBound::Finite(2)).unwrap());
        assert_eq!(c.document.metadata.seed, Some(7));
        let f = witness_as_character(&a, &c.witness).unwrap();
        assert_eq!(parsimony_score(&a, &f).unwrap(), 2);
        assert_eq!(parsimony_score(&b, &f).unwrap(), 1);
    }

    #[test]
    fn certificate_round_trips() {
        let (a, b) = (t("((a,b),(c,d));"), t("((a,c),(b,d));"));
        let doc = certified_lower_bound(&a, &b, None).unwrap().document;
        let text = crate::io::write_certificate(&doc);
        assert_eq!(crate::io::read_certificate(&text).unwrap(), doc);
    }

    #[test]
    fn inflated_bound_fails_gap_check() {
        let (a, b) = gen_random_pair(9, 3, 11).unwrap();
        let mut doc = certified_lower_bound(&a, &b, None).unwrap().document;
        doc.claimed_bound += 1;
        let report = verify_certificate(&a, &b, &doc).unwrap();
        assert!(report.failed().contains(&verify::CHECK_GAP));
    }

    #[test]
    fn shared_leg_fails_disjointness_check() {
        let (a, b) = (t("((a,b),((c,d),e));"), t("((a,c),((b,e),d));"));
        let mut doc = certified_lower_bound(&a, &b, None).unwrap().document;
        let q = crate::exact::incompatible_quartets(&a, &b).unwrap();
        let extra = q
            .iter()
            .map(|aq| QuartetRecord {
                taxa: aq.quartet.names(&a),
                t1: aq.t1.display(aq.quartet, &a),
                t2: aq.t2.display(aq.quartet, &b),
            })
            .find(|r| !doc.quartets.contains(r))
            .unwrap();
        doc.quartets.push(extra);
        let report = verify_certificate(&a, &b, &doc).unwrap();
        assert!(report.failed().contains(&verify::CHECK_LEG_DISJOINT));
    }

    #[test]
    fn lift_keeps_full_character_and_constant() {
        let (a, b) = gen_random_pair(8, 2, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = random_character(&a, 3, &mut rng).unwrap();
        assert_eq!(lift_character(&a, &b, &f).unwrap(), f);
        let names: Vec<_> = a.taxa()[..3].to_vec();
        let constant = Character::new(names.into_iter().map(|x| (x, 1)).collect(), Some(2)).unwrap();
        let lifted = lift_character(&a, &b, &constant).unwrap();
        assert_eq!(lifted.distinct_states(), 1);
        assert_eq!(lifted.assignment().len(), 8);
    }

    #[test]
    fn lifted_witness_keeps_its_gap() {
        let host1 = t("((((a,b),e),(f,g)),((c,d),h));");
        let host2 = t("((((a,c),e),(f,g)),((b,d),h));");
        let q = crate::exact::incompatible_quartets(&host1, &host2).unwrap();
        let g = greedy_leg_disjoint(&host1, &host2).unwrap();
        assert!(!q.is_empty());
        let w = witness_character(&host1, &host2, &g.quartets).unwrap();
        let f = witness_as_character(&host1, &w).unwrap();
        let xs: Vec<TaxonId> = w.colours.keys().copied().collect();
        let restricted =
            parsimony_score(&host1.restrict(&xs).unwrap(), &f).unwrap() as i64 - parsimony_score(&host2.restrict(&xs).unwrap(), &f).unwrap() as i64;
        let lifted = lift_character(&host2, &host1, &f).unwrap();
        let full = parsimony_score(&host1, &lifted).unwrap() as i64 - parsimony_score(&host2, &lifted).unwrap() as i64;
        assert!(full >= restricted && restricted >= 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn certificates_are_sound(seed in any::<u64>(), n in 4usize..10, r in 0usize..4) {
            let (a, b) = gen_random_pair(n, r, seed).unwrap();
            let c = certified_lower_bound(&a, &b, Some(seed)).unwrap();
            let doc = &c.document;
            prop_assert!(verify_certificate(&a, &b, doc).unwrap().accepted());
            prop_assert!(doc.claimed_bound as usize <= dmp_exact(&a, &b, StateBound::Finite(2)).unwrap());
            let (d, _) = dtbr_hitting_set(&a, &b).unwrap();
            prop_assert!(doc.upper_bound.value as usize >= d);
        }

        #[test]
        fn lifting_never_shrinks_the_gap(seed in any::<u64>(), n in 5usize..10, r in 1usize..4, k in 2usize..5) {
            let (a, b) = gen_random_pair(n, r, seed).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
            let full = random_character(&a, 2, &mut rng).unwrap();
            let keep: Vec<_> = a.taxa()[..k.min(n)].to_vec();
            let f = Character::new(keep.iter().map(|x| (x.clone(), full.state(x.as_str()).unwrap())).collect(), Some(2)).unwrap();
            let ids: Vec<TaxonId> = (0..keep.len()).collect();
            let gap_y = parsimony_score(&b.induced_subtree(&ids).unwrap().tree, &f).unwrap() as i64
                - parsimony_score(&a.induced_subtree(&ids).unwrap().tree, &f).unwrap() as i64;
            let lifted = lift_character(&a, &b, &f).unwrap();
            let gap_x = parsimony_score(&b, &lifted).unwrap() as i64 - parsimony_score(&a, &lifted).unwrap() as i64;
            prop_assert!(gap_x >= gap_y);
        }
    }
}
