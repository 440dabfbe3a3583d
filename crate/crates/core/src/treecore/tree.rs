//! Unrooted leaf-labelled trees with internal degree at most three.
//!
//! Vertices are dense integer identifiers. Taxa are kept in lexicographic
//! order and addressed by their rank ([`TaxonId`]), so two trees on the same
//! taxon set share taxon identifiers.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type VertexId = usize;
pub type TaxonId = usize;

const NONE: usize = usize::MAX;

/// A taxon name. Non-empty and free of Newick delimiters.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Taxon(String);

impl Taxon {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        let bad = name.is_empty()
            || name
                .chars()
                .any(|c| matches!(c, '(' | ')' | ',' | ';' | ':' | '[' | ']') || c.is_whitespace());
        if bad {
            return Err(Error::InvalidTaxon(name));
        }
        Ok(Taxon(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Taxon {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        Taxon::new(s)
    }
}

impl From<Taxon> for String {
    fn from(t: Taxon) -> String {
        t.0
    }
}

impl fmt::Display for Taxon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// An undirected edge, stored with the smaller endpoint first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge(VertexId, VertexId);

impl Edge {
    pub fn new(u: VertexId, v: VertexId) -> Self {
        if u <= v {
            Edge(u, v)
        } else {
            Edge(v, u)
        }
    }

    pub fn u(&self) -> VertexId {
        self.0
    }

    pub fn v(&self) -> VertexId {
        self.1
    }

    pub fn touches(&self, x: VertexId) -> bool {
        self.0 == x || self.1 == x
    }

    pub fn other(&self, x: VertexId) -> VertexId {
        if self.0 == x {
            self.1
        } else {
            self.0
        }
    }
}

#[derive(Clone, Debug)]
pub struct Tree {
    adj: Vec<Vec<VertexId>>,
    vertex_taxon: Vec<Option<TaxonId>>,
    taxa: Vec<Taxon>,
    leaf_vertex: Vec<VertexId>,
    edges: Vec<Edge>,
}

impl Tree {
    /// Builds a tree from neighbour lists and per-vertex labels, checking
    /// every structural invariant.
    pub fn from_parts(mut adj: Vec<Vec<VertexId>>, labels: Vec<Option<Taxon>>) -> Result<Self> {
        let n = adj.len();
        if n == 0 {
            return Err(Error::EmptyTaxonSet);
        }
        if labels.len() != n {
            return Err(Error::InvalidTree("label vector length differs from vertex count".into()));
        }
        let mut edges = Vec::new();
        for (u, nbrs) in adj.iter_mut().enumerate() {
            nbrs.sort_unstable();
            if nbrs.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidTree(format!("parallel edges at vertex {u}")));
            }
            for &v in nbrs.iter() {
                if v >= n || v == u {
                    return Err(Error::InvalidTree(format!("bad neighbour {v} of vertex {u}")));
                }
                if u < v {
                    edges.push(Edge(u, v));
                }
            }
        }
        for e in &edges {
            if adj[e.1].binary_search(&e.0).is_err() {
                return Err(Error::InvalidTree("adjacency is not symmetric".into()));
            }
        }
        let degree_sum: usize = adj.iter().map(Vec::len).sum();
        if degree_sum != 2 * edges.len() || edges.len() + 1 != n {
            return Err(Error::InvalidTree("not a tree (edge count)".into()));
        }
        // connectivity
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        if count != n {
            return Err(Error::InvalidTree("graph is disconnected".into()));
        }

        let mut named: Vec<(Taxon, VertexId)> = Vec::new();
        for (v, label) in labels.into_iter().enumerate() {
            let d = adj[v].len();
            match label {
                Some(t) => {
                    if d > 1 {
                        return Err(Error::InvalidTree(format!(
                            "labelled vertex {t} has degree {d}"
                        )));
                    }
                    named.push((t, v));
                }
                None => {
                    if !(2..=3).contains(&d) {
                        return Err(Error::InvalidTree(format!(
                            "unlabelled vertex {v} has degree {d}"
                        )));
                    }
                }
            }
        }
        named.sort();
        if let Some(w) = named.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::DuplicateTaxon(w[0].0.to_string()));
        }
        let mut vertex_taxon = vec![None; n];
        let mut taxa = Vec::with_capacity(named.len());
        let mut leaf_vertex = Vec::with_capacity(named.len());
        for (id, (t, v)) in named.into_iter().enumerate() {
            vertex_taxon[v] = Some(id);
            taxa.push(t);
            leaf_vertex.push(v);
        }
        Ok(Tree { adj, vertex_taxon, taxa, leaf_vertex, edges })
    }

    /// Builds a tree from an edge list over `labels.len()` vertices.
    pub fn from_edges(edges: &[(VertexId, VertexId)], labels: Vec<Option<Taxon>>) -> Result<Self> {
        let mut adj = vec![Vec::new(); labels.len()];
        for &(u, v) in edges {
            if u >= adj.len() || v >= adj.len() {
                return Err(Error::InvalidTree(format!("edge ({u}, {v}) out of range")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        Tree::from_parts(adj, labels)
    }

    pub fn num_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn num_leaves(&self) -> usize {
        self.taxa.len()
    }

    pub fn neighbours(&self, v: VertexId) -> &[VertexId] {
        &self.adj[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v].len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_index(&self, e: Edge) -> Option<usize> {
        self.edges.binary_search(&e).ok()
    }

    pub fn has_edge(&self, e: Edge) -> bool {
        self.edge_index(e).is_some()
    }

    pub fn taxa(&self) -> &[Taxon] {
        &self.taxa
    }

    pub fn taxon(&self, id: TaxonId) -> &Taxon {
        &self.taxa[id]
    }

    pub fn taxon_id(&self, name: &str) -> Option<TaxonId> {
        self.taxa.binary_search_by(|t| t.as_str().cmp(name)).ok()
    }

    pub fn taxon_ids<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<TaxonId>> {
        names
            .iter()
            .map(|s| self.taxon_id(s.as_ref()).ok_or_else(|| Error::UnknownTaxon(s.as_ref().to_string())))
            .collect()
    }

    pub fn leaf(&self, id: TaxonId) -> VertexId {
        self.leaf_vertex[id]
    }

    pub fn label(&self, v: VertexId) -> Option<TaxonId> {
        self.vertex_taxon[v]
    }

    pub fn is_leaf(&self, v: VertexId) -> bool {
        self.vertex_taxon[v].is_some()
    }

    /// The unique neighbour of a leaf, if it has one.
    pub fn parent(&self, leaf: TaxonId) -> Option<VertexId> {
        self.adj[self.leaf_vertex[leaf]].first().copied()
    }

    /// True when no vertex has degree two.
    pub fn is_phylogenetic(&self) -> bool {
        self.adj.iter().all(|a| a.len() != 2)
    }

    pub fn is_binary(&self) -> bool {
        self.is_phylogenetic()
    }

    pub fn same_taxa(&self, other: &Tree) -> bool {
        self.taxa == other.taxa
    }

    pub(crate) fn check_same_taxa(&self, other: &Tree) -> Result<()> {
        if self.same_taxa(other) {
            Ok(())
        } else {
            Err(Error::LeafSetMismatch)
        }
    }

    pub(crate) fn rooted_at(&self, root: VertexId) -> Rooted {
        Rooted::new(self, root)
    }

    /// Vertices on the path from `u` to `v`, both included.
    pub fn path(&self, u: VertexId, v: VertexId) -> Vec<VertexId> {
        self.rooted_at(u).path(u, v)
    }

    /// Vertex mask of the smallest subtree containing the given leaves.
    pub fn induced_mask(&self, ids: &[TaxonId]) -> Result<Vec<bool>> {
        let Some(&first) = ids.first() else {
            return Err(Error::EmptyTaxonSet);
        };
        if let Some(&bad) = ids.iter().find(|&&t| t >= self.taxa.len()) {
            return Err(Error::UnknownTaxon(format!("#{bad}")));
        }
        let rooted = self.rooted_at(self.leaf_vertex[first]);
        let mut mask = vec![false; self.num_vertices()];
        mask[self.leaf_vertex[first]] = true;
        for &t in &ids[1..] {
            let mut v = self.leaf_vertex[t];
            while !mask[v] {
                mask[v] = true;
                v = rooted.parent[v];
            }
        }
        Ok(mask)
    }

    /// Extracts the subgraph on `mask` (which must be connected) as a tree,
    /// returning it together with the host vertex of every new vertex.
    pub(crate) fn sub_tree(&self, mask: &[bool]) -> Result<(Tree, Vec<VertexId>)> {
        let host: Vec<VertexId> = (0..self.num_vertices()).filter(|&v| mask[v]).collect();
        let mut local = vec![NONE; self.num_vertices()];
        for (i, &v) in host.iter().enumerate() {
            local[v] = i;
        }
        let adj = host
            .iter()
            .map(|&v| self.adj[v].iter().filter(|&&w| mask[w]).map(|&w| local[w]).collect())
            .collect();
        let labels = host.iter().map(|&v| self.vertex_taxon[v].map(|t| self.taxa[t].clone())).collect();
        Ok((Tree::from_parts(adj, labels)?, host))
    }

    /// `T(Y)`: the smallest subtree containing the leaves `ids`. May contain
    /// degree-2 vertices.
    pub fn induced_subtree(&self, ids: &[TaxonId]) -> Result<InducedSubtree> {
        let mask = self.induced_mask(ids)?;
        let (tree, host_vertex) = self.sub_tree(&mask)?;
        Ok(InducedSubtree { tree, host_vertex })
    }

    /// `T|_Y`: the induced subtree with degree-2 vertices suppressed.
    pub fn restrict(&self, ids: &[TaxonId]) -> Result<Tree> {
        Ok(self.induced_subtree(ids)?.tree.suppressed())
    }

    pub fn restrict_names<S: AsRef<str>>(&self, names: &[S]) -> Result<Tree> {
        self.restrict(&self.taxon_ids(names)?)
    }

    /// Restriction to every taxon except `removed`.
    pub fn without(&self, removed: &[TaxonId]) -> Result<Tree> {
        let keep: Vec<TaxonId> = (0..self.num_leaves()).filter(|t| !removed.contains(t)).collect();
        self.restrict(&keep)
    }

    /// Suppresses every unlabelled degree-2 vertex.
    pub fn suppressed(&self) -> Tree {
        let n = self.num_vertices();
        let keep: Vec<bool> = (0..n).map(|v| self.adj[v].len() != 2 || self.is_leaf(v)).collect();
        let kept: Vec<VertexId> = (0..n).filter(|&v| keep[v]).collect();
        let mut local = vec![NONE; n];
        for (i, &v) in kept.iter().enumerate() {
            local[v] = i;
        }
        let mut adj = vec![Vec::new(); kept.len()];
        for &v in &kept {
            for &w0 in &self.adj[v] {
                let (mut prev, mut w) = (v, w0);
                while !keep[w] {
                    let next = if self.adj[w][0] == prev { self.adj[w][1] } else { self.adj[w][0] };
                    prev = w;
                    w = next;
                }
                adj[local[v]].push(local[w]);
            }
        }
        let labels = kept.iter().map(|&v| self.vertex_taxon[v].map(|t| self.taxa[t].clone())).collect();
        Tree::from_parts(adj, labels).expect("suppression preserves tree invariants")
    }

    /// Leaf-label-preserving isomorphism test via canonical forms.
    pub fn is_isomorphic(&self, other: &Tree) -> bool {
        self.same_taxa(other) && self.canonical_newick() == other.canonical_newick()
    }

    /// Deterministic Newick string. The tree is rooted on the edge between the
    /// parent `p` of the smallest taxon and the neighbour of `p` whose side has
    /// the most leaves (ties: the larger smallest taxon); children are ordered
    /// by smallest taxon.
    pub fn canonical_newick(&self) -> String {
        if self.num_vertices() == 1 {
            return format!("{};", self.taxa[0]);
        }
        let a = self.leaf_vertex[0];
        let p = self.adj[a][0];
        if self.is_leaf(p) {
            return format!("({},{});", self.taxa[0], self.taxa[self.vertex_taxon[p].unwrap()]);
        }
        let min_below = |v: VertexId, from: VertexId| self.min_taxon_away(v, from);
        let w = self.adj[p]
            .iter()
            .copied()
            .filter(|&x| x != a)
            .max_by_key(|&x| (self.leaves_away(x, p), min_below(x, p)))
            .unwrap();
        let mut parts = [(min_below(p, w), p, w), (min_below(w, p), w, p)];
        parts.sort();
        let mut out = String::from("(");
        self.write_sub(parts[0].1, parts[0].2, &mut out);
        out.push(',');
        self.write_sub(parts[1].1, parts[1].2, &mut out);
        out.push_str(");");
        out
    }

    fn leaves_away(&self, v: VertexId, from: VertexId) -> usize {
        let mut count = 0;
        let mut stack = vec![(v, from)];
        while let Some((x, par)) = stack.pop() {
            count += usize::from(self.vertex_taxon[x].is_some());
            stack.extend(self.adj[x].iter().filter(|&&y| y != par).map(|&y| (y, x)));
        }
        count
    }

    fn min_taxon_away(&self, v: VertexId, from: VertexId) -> TaxonId {
        let mut best = usize::MAX;
        let mut stack = vec![(v, from)];
        while let Some((x, par)) = stack.pop() {
            if let Some(t) = self.vertex_taxon[x] {
                best = best.min(t);
            }
            for &y in &self.adj[x] {
                if y != par {
                    stack.push((y, x));
                }
            }
        }
        best
    }

    fn write_sub(&self, v: VertexId, from: VertexId, out: &mut String) {
        if let Some(t) = self.vertex_taxon[v] {
            out.push_str(self.taxa[t].as_str());
            return;
        }
        let mut kids: Vec<(TaxonId, VertexId)> = self.adj[v]
            .iter()
            .filter(|&&x| x != from)
            .map(|&x| (self.min_taxon_away(x, v), x))
            .collect();
        kids.sort();
        out.push('(');
        for (i, &(_, x)) in kids.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            self.write_sub(x, v, out);
        }
        out.push(')');
    }

    /// Leaves of the component containing `start` after removing the vertices
    /// and edges rejected by `blocked`.
    pub(crate) fn reachable_leaves(
        &self,
        start: VertexId,
        mut allowed: impl FnMut(VertexId, VertexId) -> bool,
    ) -> Vec<TaxonId> {
        let mut out = Vec::new();
        let mut seen = vec![false; self.num_vertices()];
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            if let Some(t) = self.vertex_taxon[x] {
                out.push(t);
            }
            for &y in &self.adj[x] {
                if !seen[y] && allowed(x, y) {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// An induced subtree together with the host vertex of each of its vertices.
#[derive(Clone, Debug)]
pub struct InducedSubtree {
    pub tree: Tree,
    pub host_vertex: Vec<VertexId>,
}

/// A rooting of a tree, used for path queries.
pub(crate) struct Rooted {
    pub parent: Vec<VertexId>,
    pub depth: Vec<usize>,
}

impl Rooted {
    fn new(tree: &Tree, root: VertexId) -> Self {
        let n = tree.num_vertices();
        let mut parent = vec![NONE; n];
        let mut depth = vec![0; n];
        let mut queue = VecDeque::from([root]);
        let mut seen = vec![false; n];
        seen[root] = true;
        while let Some(u) = queue.pop_front() {
            for &v in tree.neighbours(u) {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = u;
                    depth[v] = depth[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        Rooted { parent, depth }
    }

    pub fn path(&self, u: VertexId, v: VertexId) -> Vec<VertexId> {
        let (mut a, mut b) = (u, v);
        let mut left = Vec::new();
        let mut right = Vec::new();
        while self.depth[a] > self.depth[b] {
            left.push(a);
            a = self.parent[a];
        }
        while self.depth[b] > self.depth[a] {
            right.push(b);
            b = self.parent[b];
        }
        while a != b {
            left.push(a);
            right.push(b);
            a = self.parent[a];
            b = self.parent[b];
        }
        left.push(a);
        left.extend(right.into_iter().rev());
        left
    }
}

/// Edges along a vertex path.
pub fn path_edges(path: &[VertexId]) -> impl Iterator<Item = Edge> + '_ {
    path.windows(2).map(|w| Edge::new(w[0], w[1]))
}
