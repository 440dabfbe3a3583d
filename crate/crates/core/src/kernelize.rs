//! Cherry and chain reduction applied to a fixed point.
//!
//! Cherries are exhausted first; then the longest common chain with at least
//! five leaves (ties: canonical order) is truncated to its four outer leaves,
//! and the loop starts over. Instances with fewer than four leaves are left
//! alone.

use log::debug;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::treecore::{common_chains, common_cherries, Chain, TaxonId, Tree};

/// One applied reduction, recorded by taxon name so it can be replayed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReductionStep {
    Cherry { kept: String, removed: String },
    Chain { chain: Vec<String>, removed: Vec<String> },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionTrace {
    pub initial_leaves: usize,
    pub final_leaves: usize,
    pub steps: Vec<ReductionStep>,
}

impl ReductionTrace {
    /// Re-applies every step to the input pair, checking each against the
    /// rules, and returns the reduced pair.
    pub fn replay(&self, t1: &Tree, t2: &Tree) -> Result<(Tree, Tree)> {
        let (mut a, mut b) = (t1.clone(), t2.clone());
        for step in &self.steps {
            (a, b) = match step {
                ReductionStep::Cherry { kept, removed } => {
                    let ids = a.taxon_ids(&[kept, removed])?;
                    apply_cherry_reduction(&a, &b, (ids[0], ids[1]))?
                }
                ReductionStep::Chain { chain, .. } => {
                    let leaves = a.taxon_ids(chain)?;
                    let k = leaves.len();
                    let same = |x: TaxonId, y: TaxonId| {
                        a.parent(x) == a.parent(y) && b.parent(x) == b.parent(y)
                    };
                    let c = Chain {
                        pendant_first: k >= 2 && same(leaves[0], leaves[1]),
                        pendant_last: k >= 2 && same(leaves[k - 2], leaves[k - 1]),
                        leaves,
                    };
                    apply_chain_reduction(&a, &b, &c)?
                }
            };
        }
        Ok((a, b))
    }
}

/// Rule 1: removes `y` from both trees, where `(x, y)` is a common cherry.
pub fn apply_cherry_reduction(t1: &Tree, t2: &Tree, (x, y): (TaxonId, TaxonId)) -> Result<(Tree, Tree)> {
    t1.check_same_taxa(t2)?;
    let pair = (x.min(y), x.max(y));
    if x == y || !common_cherries(t1, t2)?.contains(&pair) {
        return Err(Error::Precondition(format!(
            "({}, {}) is not a common cherry",
            name(t1, x),
            name(t1, y)
        )));
    }
    Ok((t1.without(&[y])?, t2.without(&[y])?))
}

/// Rule 2: removes `x3..x(k-2)` of a common chain with `k >= 5`.
pub fn apply_chain_reduction(t1: &Tree, t2: &Tree, chain: &Chain) -> Result<(Tree, Tree)> {
    t1.check_same_taxa(t2)?;
    let k = chain.leaves.len();
    if k < 5 {
        return Err(Error::Precondition(format!("chain reduction needs k >= 5, got {k}")));
    }
    let mut distinct = chain.leaves.clone();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() != k
        || distinct.last().is_some_and(|&x| x >= t1.num_leaves())
        || !t1.is_chain(&chain.leaves)
        || !t2.is_chain(&chain.leaves)
    {
        return Err(Error::Precondition("sequence is not a common chain".into()));
    }
    let removed = &chain.leaves[2..k - 2];
    Ok((t1.without(removed)?, t2.without(removed)?))
}

fn name(tree: &Tree, x: TaxonId) -> String {
    if x < tree.num_leaves() {
        tree.taxon(x).to_string()
    } else {
        format!("#{x}")
    }
}

/// Applies the rules until neither applies, returning the reduced pair and
/// the trace of applied steps.
pub fn fully_reduce(t1: &Tree, t2: &Tree) -> Result<(Tree, Tree, ReductionTrace)> {
    t1.check_same_taxa(t2)?;
    let (mut a, mut b) = (t1.clone(), t2.clone());
    let mut trace = ReductionTrace { initial_leaves: a.num_leaves(), ..Default::default() };
    while a.num_leaves() >= 4 {
        if let Some(&(x, y)) = common_cherries(&a, &b)?.first() {
            debug!("cherry ({}, {}): removing {}", a.taxon(x), a.taxon(y), a.taxon(y));
            trace.steps.push(ReductionStep::Cherry { kept: name(&a, x), removed: name(&a, y) });
            (a, b) = apply_cherry_reduction(&a, &b, (x, y))?;
            continue;
        }
        let chains = common_chains(&a, &b)?;
        let longest = chains.iter().filter(|c| c.len() >= 5).fold(None::<&Chain>, |best, c| match best {
            Some(b) if b.len() >= c.len() => Some(b),
            _ => Some(c),
        });
        let Some(chain) = longest else {
            break;
        };
        let k = chain.len();
        let names: Vec<String> = chain.leaves.iter().map(|&x| name(&a, x)).collect();
        debug!("chain of length {k}: {}", names.join(","));
        trace.steps.push(ReductionStep::Chain { removed: names[2..k - 2].to_vec(), chain: names });
        (a, b) = apply_chain_reduction(&a, &b, chain)?;
    }
    trace.final_leaves = a.num_leaves();
    Ok((a, b, trace))
}
