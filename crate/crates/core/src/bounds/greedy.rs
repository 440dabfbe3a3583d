//! Greedy primal-dual selection of pairwise `T1`-leg-disjoint incompatible
//! quartets `Q'` together with an edge set `E'` of `T1` hitting every
//! incompatible quartet.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{incompatible_quartets, AnnotatedQuartet};
use crate::treecore::{path_edges, Edge, Quartet, QuartetTopology, TaxonId, TopologyOracle, Tree, VertexId};

/// `lg x = max(1, log2 x)`.
pub fn lg(x: usize) -> f64 {
    (x.max(1) as f64).log2().max(1.0)
}

/// Geometry of a quartet `ab|cd` of `T1` relative to a cut set `E'`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuartetGeometry {
    /// Taxa `a, b, c, d`; `ab` and `cd` are the legs.
    pub taxa: [TaxonId; 4],
    pub leg_ab: Vec<Edge>,
    pub leg_cd: Vec<Edge>,
    pub u_ab: VertexId,
    pub u_cd: VertexId,
    pub backbone: Vec<Edge>,
    /// First edges from the joints towards `a`, `b`, `c`, `d`.
    pub e: [Edge; 4],
    /// Leaves reachable from `a`, `b`, `c`, `d` avoiding the respective joint
    /// and every edge of `E'`.
    pub x: [Vec<TaxonId>; 4],
}

/// The vertex of the `x`–`y` path closest to `z`.
pub(crate) fn joint(oracle: &TopologyOracle<'_>, x: TaxonId, y: TaxonId, z: TaxonId) -> VertexId {
    let on_path = oracle.leaf_path(x, y);
    *oracle
        .leaf_path(z, x)
        .iter()
        .find(|v| on_path.contains(v))
        .expect("paths to x meet the x-y path")
}

fn toward(oracle: &TopologyOracle<'_>, from: VertexId, leaf: TaxonId) -> VertexId {
    oracle.path(from, oracle.tree().leaf(leaf))[1]
}

/// Computes the geometry of `q` with legs `(a, b)` and `(c, d)` as given by
/// `taxa`, failing if `e_prime` hits a leg or the legs are not those of `T1`.
pub fn quartet_geometry(t1: &Tree, taxa: [TaxonId; 4], e_prime: &[Edge]) -> Result<QuartetGeometry> {
    let [a, b, c, d] = taxa;
    let q = Quartet::new(taxa)?;
    let top = t1.quartet_topology(q)?;
    if top != QuartetTopology::with_cherry(q, a, b)? {
        return Err(Error::Precondition(format!(
            "{a},{b} is not a leg of the quartet in T1 (topology {})",
            top.display(q, t1)
        )));
    }
    let oracle = TopologyOracle::new(t1);
    let leg = |x, y| -> Vec<Edge> { path_edges(&oracle.leaf_path(x, y)).collect() };
    let (leg_ab, leg_cd) = (leg(a, b), leg(c, d));
    if leg_ab.iter().chain(&leg_cd).any(|e| e_prime.contains(e)) {
        return Err(Error::Precondition("the cut set hits the quartet".into()));
    }
    let u_ab = joint(&oracle, a, b, c);
    let u_cd = joint(&oracle, c, d, a);
    let backbone = path_edges(&oracle.path(u_ab, u_cd)).collect();
    let joints = [u_ab, u_ab, u_cd, u_cd];
    let e = [0, 1, 2, 3].map(|i| Edge::new(joints[i], toward(&oracle, joints[i], taxa[i])));
    let x = [0, 1, 2, 3].map(|i| {
        let j = joints[i];
        t1.reachable_leaves(t1.leaf(taxa[i]), |p, r| r != j && !e_prime.contains(&Edge::new(p, r)))
    });
    Ok(QuartetGeometry { taxa, leg_ab, leg_cd, u_ab, u_cd, backbone, e, x })
}

/// One iteration of the greedy selection.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GreedyStep {
    /// The chosen quartet as `"a,b|c,d"` with `ab` the leg of smaller reach.
    pub quartet: String,
    pub reach_ab: usize,
    pub reach_cd: usize,
    /// `|P~_cd|`: edges of the `c`–`d` path in the forest `F1`.
    pub forest_path: usize,
    pub added: Vec<Edge>,
    /// `false` when the chosen quartet shares a leg edge with an already
    /// selected one; its edges are still cut but it does not join `Q'`.
    pub selected: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GreedyResult {
    /// `Q'`, in selection order.
    pub quartets: Vec<AnnotatedQuartet>,
    /// `E'`, sorted.
    pub edges: Vec<Edge>,
    pub steps: Vec<GreedyStep>,
    /// `|Q|`, the number of incompatible quartets.
    pub incompatible: usize,
}

struct Candidate {
    quartet: AnnotatedQuartet,
    /// Legs as `[(a, b), (c, d)]`.
    legs: [[TaxonId; 2]; 2],
    leg_edges: Vec<usize>,
    /// Per leg: joint, neighbour of the joint towards each end.
    joints: [VertexId; 2],
    towards: [[VertexId; 2]; 2],
    /// Per leg: vertices of the leg path from its first to its second end.
    paths: [Vec<VertexId>; 2],
}

/// Leaf counts behind every directed edge of `T1 - E'`.
struct Reach {
    counts: Vec<Vec<usize>>,
}

impl Reach {
    fn new(t1: &Tree, cut: &[bool]) -> Self {
        let counts = (0..t1.num_vertices())
            .map(|v| {
                t1.neighbours(v)
                    .iter()
                    .map(|&w| {
                        if cut[t1.edge_index(Edge::new(v, w)).expect("edge")] {
                            0
                        } else {
                            t1.reachable_leaves(w, |x, y| y != v && !cut[t1.edge_index(Edge::new(x, y)).expect("edge")])
                                .len()
                        }
                    })
                    .collect()
            })
            .collect();
        Reach { counts }
    }

    fn behind(&self, t1: &Tree, from: VertexId, to: VertexId) -> usize {
        let i = t1.neighbours(from).iter().position(|&w| w == to).expect("adjacent");
        self.counts[from][i]
    }

    /// Degree of `v` in the Steiner core of its component.
    fn core_degree(&self, v: VertexId) -> usize {
        self.counts[v].iter().filter(|&&c| c > 0).count()
    }
}

/// Runs the greedy selection on `(T1, T2)`.
pub fn greedy_leg_disjoint(t1: &Tree, t2: &Tree) -> Result<GreedyResult> {
    let all = incompatible_quartets(t1, t2)?;
    let oracle = TopologyOracle::new(t1);
    let candidates: Vec<Candidate> = all
        .iter()
        .map(|&aq| {
            let (p, r) = aq.t1.split(aq.quartet);
            let legs = [p, r];
            let joints = [joint(&oracle, p[0], p[1], r[0]), joint(&oracle, r[0], r[1], p[0])];
            let towards = [0, 1].map(|i| legs[i].map(|x| toward(&oracle, joints[i], x)));
            let paths = legs.map(|l| oracle.leaf_path(l[0], l[1]));
            let mut leg_edges: Vec<usize> = paths
                .iter()
                .flat_map(|p| path_edges(p).map(|e| t1.edge_index(e).expect("edge")).collect::<Vec<_>>())
                .collect();
            leg_edges.sort_unstable();
            Candidate { quartet: aq, legs, leg_edges, joints, towards, paths }
        })
        .collect();

    let mut cut = vec![false; t1.edges().len()];
    let mut used_leg = vec![false; t1.edges().len()];
    let mut result = GreedyResult { quartets: Vec::new(), edges: Vec::new(), steps: Vec::new(), incompatible: all.len() };
    loop {
        let unhit: Vec<&Candidate> = candidates.iter().filter(|c| !c.leg_edges.iter().any(|&e| cut[e])).collect();
        if unhit.is_empty() {
            break;
        }
        let reach = Reach::new(t1, &cut);
        let mut best: Option<((usize, usize), &Candidate, usize, usize)> = None;
        for cand in &unhit {
            let size = |i: usize| -> usize {
                let j = cand.joints[i];
                reach.behind(t1, j, cand.towards[i][0]) + reach.behind(t1, j, cand.towards[i][1])
            };
            let sizes = [size(0), size(1)];
            for (ab, cd) in [(0, 1), (1, 0)] {
                if sizes[ab] > sizes[cd] {
                    continue;
                }
                let path = &cand.paths[cd];
                let forest_path = 1 + path[1..path.len() - 1].iter().filter(|&&v| reach.core_degree(v) == 3).count();
                let key = (sizes[ab], forest_path);
                if best.as_ref().is_none_or(|(k, ..)| key < *k) {
                    best = Some((key, cand, ab, sizes[cd]));
                }
            }
        }
        let ((reach_ab, forest_path), cand, ab, reach_cd) = best.expect("an unhit quartet has a valid orientation");
        let cd = 1 - ab;

        let mut added = vec![
            Edge::new(cand.joints[ab], cand.towards[ab][0]),
            Edge::new(cand.joints[ab], cand.towards[ab][1]),
        ];
        let path = &cand.paths[cd];
        let mut segment_start = true;
        for (i, w) in path.windows(2).enumerate() {
            if segment_start {
                added.push(Edge::new(w[0], w[1]));
            }
            segment_start = i + 1 < path.len() - 1 && reach.core_degree(path[i + 1]) == 3;
        }
        if added.len() != forest_path + 2 {
            return Err(Error::Internal(format!(
                "forest path has {forest_path} edges but {} cut edges were chosen",
                added.len() - 2
            )));
        }
        let selected = !cand.leg_edges.iter().any(|&e| used_leg[e]);
        if selected {
            cand.leg_edges.iter().for_each(|&e| used_leg[e] = true);
        } else {
            warn!(
                "chosen quartet {} shares a leg edge with a selected one; cutting it without selecting it",
                cand.quartet.t1.display(cand.quartet.quartet, t1)
            );
        }
        for e in &added {
            cut[t1.edge_index(*e).expect("edge")] = true;
        }
        let [a, b] = cand.legs[ab];
        let [c, d] = cand.legs[cd];
        let name = |x: TaxonId| t1.taxon(x).as_str();
        result.steps.push(GreedyStep {
            quartet: format!("{},{}|{},{}", name(a), name(b), name(c), name(d)),
            reach_ab,
            reach_cd,
            forest_path,
            added,
            selected,
        });
        if selected {
            result.quartets.push(cand.quartet);
        }
    }
    result.edges = (0..cut.len()).filter(|&i| cut[i]).map(|i| t1.edges()[i]).collect();
    Ok(result)
}
