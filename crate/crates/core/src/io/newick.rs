//! Newick reading and writing.
//!
//! Branch lengths are validated and discarded, internal labels and bracketed
//! comments are skipped, and a bifurcating top level is unrooted by
//! suppressing the synthetic root.

use log::warn;

use crate::error::{Error, Result};
use crate::treecore::{Taxon, Tree};

#[derive(Debug)]
struct Node {
    parent: Option<usize>,
    label: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Expect {
    /// A subtree must start here (after `(` or `,`, or at the very start).
    Subtree,
    /// A subtree was just completed; label, length, `,`, `)` or `;` may follow.
    After,
}

/// Parses exactly one tree. Trailing whitespace is allowed; anything else
/// after the semicolon is an error.
pub fn parse_newick(text: &str) -> Result<Tree> {
    let (tree, used) = parse_one(text, 0)?;
    if let Some(off) = text[used..].find(|c: char| !c.is_whitespace()) {
        return Err(syntax(used + off, "trailing characters after ';'"));
    }
    Ok(tree)
}

/// Parses a sequence of semicolon-terminated trees (one per line in `.nwk`
/// files).
pub fn parse_newick_many(text: &str) -> Result<Vec<Tree>> {
    let mut out = Vec::new();
    let mut pos = 0;
    while let Some(off) = skip_trivia(text, pos)? {
        let (tree, used) = parse_one(text, off)?;
        out.push(tree);
        pos = used;
    }
    Ok(out)
}

/// Canonical Newick text of a tree (see [`Tree::canonical_newick`]).
pub fn write_newick(tree: &Tree) -> String {
    tree.canonical_newick()
}

fn syntax(offset: usize, message: impl Into<String>) -> Error {
    Error::Newick { offset, message: message.into() }
}

/// Position of the next significant character, skipping whitespace and
/// comments; `None` at end of input.
fn skip_trivia(text: &str, mut pos: usize) -> Result<Option<usize>> {
    let bytes = text.as_bytes();
    while pos < bytes.len() {
        match bytes[pos] {
            b'[' => match text[pos..].find(']') {
                Some(end) => pos += end + 1,
                None => return Err(syntax(pos, "unterminated comment")),
            },
            c if c.is_ascii_whitespace() => pos += 1,
            _ => return Ok(Some(pos)),
        }
    }
    Ok(None)
}

fn is_delimiter(c: char) -> bool {
    matches!(c, '(' | ')' | ',' | ';' | ':' | '[' | ']') || c.is_whitespace()
}

fn parse_one(text: &str, start: usize) -> Result<(Tree, usize)> {
    let mut nodes: Vec<Node> = Vec::new();
    let mut open: Vec<usize> = Vec::new();
    let mut expect = Expect::Subtree;
    let mut last: Option<usize> = None;
    let mut has_label = false;
    let mut has_length = false;
    let mut pos = start;

    let end = loop {
        let Some(p) = skip_trivia(text, pos)? else {
            return Err(syntax(text.len(), "missing ';'"));
        };
        pos = p;
        let c = text[pos..].chars().next().unwrap();
        match (c, expect) {
            ('(', Expect::Subtree) => {
                if last.is_some() && open.is_empty() {
                    return Err(syntax(pos, "more than one top-level subtree"));
                }
                nodes.push(Node { parent: open.last().copied(), label: None });
                open.push(nodes.len() - 1);
                pos += 1;
            }
            (',', Expect::After) => {
                if open.is_empty() {
                    return Err(syntax(pos, "',' outside parentheses"));
                }
                expect = Expect::Subtree;
                pos += 1;
            }
            (')', Expect::After) => {
                let Some(node) = open.pop() else {
                    return Err(syntax(pos, "unbalanced ')'"));
                };
                last = Some(node);
                has_label = false;
                has_length = false;
                pos += 1;
            }
            (':', Expect::After) => {
                if has_length {
                    return Err(syntax(pos, "second branch length"));
                }
                let begin = pos + 1;
                let len = text[begin..].find(is_delimiter).unwrap_or(text.len() - begin);
                let token = &text[begin..begin + len];
                if token.parse::<f64>().is_err() {
                    return Err(syntax(begin, format!("invalid branch length {token:?}")));
                }
                has_length = true;
                pos = begin + len;
            }
            (';', Expect::After) => {
                if !open.is_empty() {
                    return Err(syntax(pos, "unbalanced '('"));
                }
                break pos + 1;
            }
            (c, _) if !is_delimiter(c) => {
                let len = text[pos..].find(is_delimiter).unwrap_or(text.len() - pos);
                let label = &text[pos..pos + len];
                match expect {
                    Expect::Subtree => {
                        if last.is_some() && open.is_empty() {
                            return Err(syntax(pos, "more than one top-level subtree"));
                        }
                        nodes.push(Node { parent: open.last().copied(), label: Some(label.to_string()) });
                        last = Some(nodes.len() - 1);
                        has_label = true;
                        has_length = false;
                        expect = Expect::After;
                    }
                    Expect::After => {
                        if has_label || has_length {
                            return Err(syntax(pos, format!("unexpected label {label:?}")));
                        }
                        warn!("dropping internal node label {label:?} at byte {pos}");
                        has_label = true;
                    }
                }
                pos += len;
                continue;
            }
            (c, Expect::Subtree) => return Err(syntax(pos, format!("expected a subtree, found {c:?}"))),
            (c, Expect::After) => return Err(syntax(pos, format!("unexpected {c:?}"))),
        }
        if c == '(' {
            expect = Expect::Subtree;
        } else if c == ')' {
            expect = Expect::After;
        }
    };

    let tree = build(&nodes).map_err(|e| match e {
        Error::InvalidTree(m) => syntax(start, m),
        other => other,
    })?;
    Ok((tree, end))
}

fn build(nodes: &[Node]) -> Result<Tree> {
    let n = nodes.len();
    let mut adj = vec![Vec::new(); n];
    for (i, node) in nodes.iter().enumerate() {
        if let Some(p) = node.parent {
            adj[i].push(p);
            adj[p].push(i);
        }
    }
    let mut labels = Vec::with_capacity(n);
    for (i, node) in nodes.iter().enumerate() {
        match &node.label {
            Some(l) => {
                if adj[i].len() > 1 || (node.parent.is_none() && !adj[i].is_empty()) {
                    return Err(Error::Internal("leaf label on an internal node".into()));
                }
                labels.push(Some(Taxon::new(l.clone())?));
            }
            None => {
                if adj[i].is_empty() || (node.parent.is_some() && adj[i].len() == 1) {
                    return Err(Error::InvalidTree("empty subtree '()'".into()));
                }
                labels.push(None);
            }
        }
    }

    // drop unlabelled vertices of degree 1 (a unary root), then suppress
    let mut alive = vec![true; n];
    let mut changed = true;
    while changed {
        changed = false;
        for v in 0..n {
            if alive[v] && labels[v].is_none() && adj[v].iter().filter(|&&w| alive[w]).count() <= 1 {
                alive[v] = false;
                changed = true;
            }
        }
    }
    let mut local = vec![usize::MAX; n];
    let kept: Vec<usize> = (0..n).filter(|&v| alive[v]).collect();
    for (i, &v) in kept.iter().enumerate() {
        local[v] = i;
    }
    let sub_adj: Vec<Vec<usize>> = kept
        .iter()
        .map(|&v| adj[v].iter().filter(|&&w| alive[w]).map(|&w| local[w]).collect())
        .collect();
    if let Some(v) = sub_adj.iter().position(|a| a.len() > 3) {
        return Err(Error::InvalidTree(format!(
            "multifurcating node with {} neighbours (vertex {v})",
            sub_adj[v].len()
        )));
    }
    let sub_labels: Vec<Option<Taxon>> = kept.iter().map(|&v| labels[v].clone()).collect();
    // temporarily relax the degree-2 rule by suppressing before validation
    let raw = RawTree { adj: sub_adj, labels: sub_labels };
    raw.into_tree()
}

struct RawTree {
    adj: Vec<Vec<usize>>,
    labels: Vec<Option<Taxon>>,
}

impl RawTree {
    fn into_tree(self) -> Result<Tree> {
        let n = self.adj.len();
        let keep: Vec<bool> = (0..n).map(|v| self.labels[v].is_some() || self.adj[v].len() != 2).collect();
        let kept: Vec<usize> = (0..n).filter(|&v| keep[v]).collect();
        if kept.is_empty() {
            return Err(Error::InvalidTree("tree has no leaves".into()));
        }
        let mut local = vec![usize::MAX; n];
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
        let labels = kept.iter().map(|&v| self.labels[v].clone()).collect();
        Tree::from_parts(adj, labels)
    }
}
