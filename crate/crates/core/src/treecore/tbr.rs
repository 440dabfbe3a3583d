use super::tree::{Edge, Taxon, Tree, VertexId};
use crate::error::{Error, Result};

/// Tree bisection and reconnection.
///
/// Deletes `cut = (u, v)` with `u < v`, suppresses `u` and `v`, subdivides
/// `reattach_u` in the component of `u` and `reattach_v` in the component of
/// `v`, and joins the two new vertices. A side whose cut endpoint is a leaf is
/// reattached at that leaf and must pass `None`. Reattachment edges are edges
/// of the input tree; an edge incident to the suppressed endpoint denotes the
/// edge created by the suppression.
pub fn tbr_move(
    tree: &Tree,
    cut: Edge,
    reattach_u: Option<Edge>,
    reattach_v: Option<Edge>,
) -> Result<Tree> {
    if !tree.is_phylogenetic() {
        return Err(Error::Precondition("TBR moves need a phylogenetic tree".into()));
    }
    if !tree.has_edge(cut) {
        return Err(Error::NoSuchEdge(cut.u(), cut.v()));
    }
    let n = tree.num_vertices();
    let mut adj: Vec<Vec<VertexId>> = (0..n).map(|v| tree.neighbours(v).to_vec()).collect();
    let unlink = |adj: &mut Vec<Vec<VertexId>>, a: VertexId, b: VertexId| {
        adj[a].retain(|&x| x != b);
        adj[b].retain(|&x| x != a);
    };
    let link = |adj: &mut Vec<Vec<VertexId>>, a: VertexId, b: VertexId| {
        adj[a].push(b);
        adj[b].push(a);
    };
    unlink(&mut adj, cut.u(), cut.v());

    // component membership after the cut
    let mut side_of_u = vec![false; n];
    let mut stack = vec![cut.u()];
    side_of_u[cut.u()] = true;
    while let Some(x) = stack.pop() {
        for &y in &adj[x] {
            if !side_of_u[y] {
                side_of_u[y] = true;
                stack.push(y);
            }
        }
    }

    let mut attach = [cut.u(), cut.v()];
    for (slot, (s, target)) in [(cut.u(), reattach_u), (cut.v(), reattach_v)].into_iter().enumerate() {
        let in_component = |e: Edge| side_of_u[e.u()] == (slot == 0) && side_of_u[e.v()] == (slot == 0);
        if tree.is_leaf(s) {
            if target.is_some() {
                return Err(Error::Precondition(format!(
                    "vertex {s} is a leaf; it is reattached directly"
                )));
            }
            continue;
        }
        let target = target.ok_or_else(|| {
            Error::Precondition(format!("missing reattachment edge for the side of vertex {s}"))
        })?;
        if !tree.has_edge(target) || target == cut {
            return Err(Error::NoSuchEdge(target.u(), target.v()));
        }
        if !in_component(target) {
            return Err(Error::Precondition(format!(
                "reattachment edge ({}, {}) lies in the wrong component",
                target.u(),
                target.v()
            )));
        }
        // suppress s, then subdivide the target using s as the new vertex
        let (x, y) = (adj[s][0], adj[s][1]);
        let target = if target.touches(s) { Edge::new(x, y) } else { target };
        unlink(&mut adj, s, x);
        unlink(&mut adj, s, y);
        link(&mut adj, x, y);
        unlink(&mut adj, target.u(), target.v());
        link(&mut adj, target.u(), s);
        link(&mut adj, s, target.v());
        attach[slot] = s;
    }
    link(&mut adj, attach[0], attach[1]);

    let labels: Vec<Option<Taxon>> = (0..n).map(|v| tree.label(v).map(|t| tree.taxon(t).clone())).collect();
    Tree::from_parts(adj, labels)
}
