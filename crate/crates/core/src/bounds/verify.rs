//! Independent checking of lower-bound certificates. Only tree primitives,
//! Fitch scoring and the agreement-forest test are used.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exact::{cut_to_partition, is_agreement_forest};
use crate::fitch::{parsimony_score, Character};
use crate::io::certificate::{sha256_hex, CertificateDocument, LegTree, QuartetRecord};
use crate::treecore::{path_edges, Edge, Quartet, QuartetTopology, Taxon, TaxonId, Tree};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn accepted(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }

    fn record(&mut self, name: &str, outcome: std::result::Result<String, String>) {
        let (passed, detail) = match outcome {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        self.checks.push(CheckResult { name: name.to_string(), passed, detail });
    }
}

pub const CHECK_TREES: &str = "trees";
pub const CHECK_INCOMPATIBLE: &str = "(i) incompatible quartets";
pub const CHECK_LEG_DISJOINT: &str = "(ii) leg-disjoint";
pub const CHECK_CHARACTER: &str = "(iii) two-state character";
pub const CHECK_GAP: &str = "(iv) parsimony gap";
pub const CHECK_THIRD: &str = "(v) bound at least a third";
pub const CHECK_BETA: &str = "(vi) recorded beta";
pub const CHECK_UPPER: &str = "upper bound";

struct Parsed {
    quartet: Quartet,
    t1: QuartetTopology,
    t2: QuartetTopology,
}

fn parse_record(t1: &Tree, t2: &Tree, r: &QuartetRecord) -> std::result::Result<Parsed, String> {
    let ids = t1.taxon_ids(&r.taxa).map_err(|e| e.to_string())?;
    let quartet = Quartet::new([ids[0], ids[1], ids[2], ids[3]]).map_err(|e| e.to_string())?;
    let (q1, top1) = QuartetTopology::parse(&r.t1, t1).map_err(|e| e.to_string())?;
    let (q2, top2) = QuartetTopology::parse(&r.t2, t2).map_err(|e| e.to_string())?;
    if q1 != quartet || q2 != quartet {
        return Err(format!("topologies of {:?} name other taxa", r.taxa));
    }
    Ok(Parsed { quartet, t1: top1, t2: top2 })
}

fn legs(q: Quartet, top: QuartetTopology) -> [[TaxonId; 2]; 2] {
    let (p, r) = top.split(q);
    [p, r]
}

fn leg_edge_set(tree: &Tree, q: Quartet, top: QuartetTopology) -> Vec<Edge> {
    legs(q, top)
        .iter()
        .flat_map(|l| path_edges(&tree.path(tree.leaf(l[0]), tree.leaf(l[1]))).collect::<Vec<_>>())
        .collect()
}

/// Checks every claim of `doc` against the input trees.
pub fn verify_certificate(t1: &Tree, t2: &Tree, doc: &CertificateDocument) -> Result<VerificationReport> {
    t1.check_same_taxa(t2)?;
    let mut report = VerificationReport::default();
    let (leg, other) = match doc.leg_tree {
        LegTree::T1 => (t1, t2),
        LegTree::T2 => (t2, t1),
    };

    report.record(CHECK_TREES, {
        let ok = |tree: &Tree, rec: &crate::io::certificate::TreeRecord| {
            sha256_hex(&tree.canonical_newick()) == rec.sha256 && sha256_hex(&rec.newick) == rec.sha256
        };
        if ok(t1, &doc.t1) && ok(t2, &doc.t2) {
            Ok("hashes match the input trees".into())
        } else {
            Err("tree hashes do not match the input trees".into())
        }
    });

    let parsed: Vec<std::result::Result<Parsed, String>> = doc.quartets.iter().map(|r| parse_record(t1, t2, r)).collect();
    report.record(CHECK_INCOMPATIBLE, {
        let mut outcome = Ok(format!("{} quartets", parsed.len()));
        for (r, p) in doc.quartets.iter().zip(&parsed) {
            let problem = match p {
                Err(e) => Some(e.clone()),
                Ok(p) if p.t1 == p.t2 => Some(format!("{:?} has the same topology in both trees", r.taxa)),
                Ok(p) => match (t1.quartet_topology(p.quartet), t2.quartet_topology(p.quartet)) {
                    (Ok(a), Ok(b)) if a == p.t1 && b == p.t2 => None,
                    _ => Some(format!("stated topologies of {:?} do not match the trees", r.taxa)),
                },
            };
            if let Some(problem) = problem {
                outcome = Err(problem);
                break;
            }
        }
        outcome
    });

    let good: Vec<&Parsed> = parsed.iter().filter_map(|p| p.as_ref().ok()).collect();
    let all_parsed = good.len() == parsed.len();
    let leg_top = |p: &Parsed| match doc.leg_tree {
        LegTree::T1 => p.t1,
        LegTree::T2 => p.t2,
    };

    report.record(CHECK_LEG_DISJOINT, {
        let mut edges = BTreeSet::new();
        let mut taxa = BTreeSet::new();
        if !all_parsed {
            Err("unparsable quartets".into())
        } else if good.iter().flat_map(|p| p.quartet.taxa()).any(|x| !taxa.insert(x)) {
            Err("two quartets share a taxon".into())
        } else if good.iter().flat_map(|p| leg_edge_set(leg, p.quartet, leg_top(p))).any(|e| !edges.insert(e)) {
            Err("two quartets share a leg edge".into())
        } else {
            Ok(format!("{} leg edges", edges.len()))
        }
    });

    let xp: BTreeSet<String> = doc.quartets.iter().flat_map(|r| r.taxa.iter().cloned()).collect();
    let keys: BTreeSet<String> = doc.character.keys().cloned().collect();
    report.record(CHECK_CHARACTER, {
        if keys != xp {
            Err("character is not defined exactly on the quartets' taxa".into())
        } else if doc.character.values().any(|&s| s > 1) {
            Err("character uses a state other than 0 and 1".into())
        } else {
            Ok(format!("{} taxa", keys.len()))
        }
    });

    let claimed = doc.claimed_bound as i128;
    report.record(CHECK_GAP, {
        let scores = || -> std::result::Result<(usize, usize), String> {
            if xp.is_empty() {
                return Ok((0, 0));
            }
            let ids = leg.taxon_ids(&xp.iter().collect::<Vec<_>>()).map_err(|e| e.to_string())?;
            let assignment: BTreeMap<Taxon, usize> = doc
                .character
                .iter()
                .map(|(k, &v)| Ok((Taxon::new(k.as_str()).map_err(|e| e.to_string())?, v as usize)))
                .collect::<std::result::Result<_, String>>()?;
            let f = Character::new(assignment, None).map_err(|e| e.to_string())?;
            let score = |t: &Tree| -> std::result::Result<usize, String> {
                let r = t.restrict(&ids).map_err(|e| e.to_string())?;
                parsimony_score(&r, &f).map_err(|e| e.to_string())
            };
            Ok((score(leg)?, score(other)?))
        };
        match scores() {
            Ok((a, b)) if a as i128 - b as i128 >= claimed => Ok(format!("l(T1|X')={a} l(T2|X')={b}")),
            Ok((a, b)) => Err(format!("gap {a} - {b} is below the claimed {claimed}")),
            Err(e) => Err(e),
        }
    });

    report.record(CHECK_THIRD, {
        let k = doc.quartets.len() as i128;
        if 3 * claimed >= k {
            Ok(format!("{claimed} >= ceil({k}/3)"))
        } else {
            Err(format!("{claimed} < ceil({k}/3)"))
        }
    });

    report.record(CHECK_BETA, {
        let colour = |x: TaxonId| doc.character.get(leg.taxon(x).as_str()).copied();
        let mut beta = 0u64;
        let mut complete = all_parsed;
        for p in &good {
            for l in legs(p.quartet, leg_top(p)) {
                match (colour(l[0]), colour(l[1])) {
                    (Some(a), Some(b)) => beta += u64::from(a != b),
                    _ => complete = false,
                }
            }
        }
        if !complete {
            Err("cannot recompute beta".into())
        } else if beta != doc.beta {
            Err(format!("recorded beta {} but the colouring gives {beta}", doc.beta))
        } else if doc.beta as i128 - doc.delta as i128 > claimed {
            Err(format!("claimed {claimed} is below beta {} - delta {}", doc.beta, doc.delta))
        } else {
            Ok(format!("beta {beta}"))
        }
    });

    report.record(CHECK_UPPER, {
        let ub = &doc.upper_bound;
        let (cut_tree, rest) = match ub.tree {
            LegTree::T1 => (t1, t2),
            LegTree::T2 => (t2, t1),
        };
        let mut by_split: BTreeMap<Vec<TaxonId>, Edge> = BTreeMap::new();
        for &e in cut_tree.edges() {
            let side_u = cut_tree.reachable_leaves(e.u(), |x, y| Edge::new(x, y) != e);
            let side = if side_u.contains(&0) {
                cut_tree.reachable_leaves(e.v(), |x, y| Edge::new(x, y) != e)
            } else {
                side_u
            };
            by_split.insert(side, e);
        }
        let edges: std::result::Result<Vec<Edge>, String> = ub
            .splits
            .iter()
            .map(|s| {
                let mut ids = cut_tree.taxon_ids(s).map_err(|e| e.to_string())?;
                ids.sort_unstable();
                by_split.get(&ids).copied().ok_or_else(|| format!("{s:?} is not a split of the tree"))
            })
            .collect();
        match edges {
            Err(e) => Err(e),
            Ok(edges) => {
                let distinct: BTreeSet<Edge> = edges.iter().copied().collect();
                let part = cut_to_partition(cut_tree, &edges);
                if distinct.len() != edges.len() || ub.value != edges.len() as u64 {
                    Err(format!("value {} does not count {} distinct cut edges", ub.value, distinct.len()))
                } else if !matches!(is_agreement_forest(cut_tree, rest, &part), Ok(None)) {
                    Err("the cut does not give an agreement forest".into())
                } else if claimed > ub.value as i128 {
                    Err(format!("claimed {claimed} exceeds the upper bound {}", ub.value))
                } else {
                    Ok(format!("{} components", part.len()))
                }
            }
        }
    });

    Ok(report)
}
