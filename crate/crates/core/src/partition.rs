//! Set partitions as restricted growth strings.
//!
//! A restricted growth string `a` of length `n` has `a[0] = 0` and
//! `a[i] <= 1 + max(a[..i])`; it encodes the partition whose blocks are the
//! positions sharing a value. Each partition appears exactly once, which
//! quotients out the renaming of block (state) labels.

/// Iterates over the restricted growth strings of length `n` with at most
/// `max_blocks` blocks that start with a fixed prefix, in lexicographic order.
#[derive(Clone, Debug)]
pub struct RestrictedGrowth {
    current: Vec<usize>,
    /// `prefix_max[i]` is the maximum of `current[..=i]`.
    prefix_max: Vec<usize>,
    fixed: usize,
    max_blocks: usize,
    started: bool,
    done: bool,
}

impl RestrictedGrowth {
    pub fn new(n: usize, max_blocks: usize) -> Self {
        RestrictedGrowth::with_prefix(n, max_blocks, &[])
    }

    /// Strings extending `prefix`; yields nothing if the prefix is not itself
    /// a valid restricted growth string within the block limit.
    pub fn with_prefix(n: usize, max_blocks: usize, prefix: &[usize]) -> Self {
        let mut current = prefix.to_vec();
        current.resize(n, 0);
        let mut prefix_max = vec![0; n];
        let mut valid = prefix.len() <= n && (n == 0 || max_blocks > 0);
        for i in 0..n {
            let before = if i == 0 { None } else { Some(prefix_max[i - 1]) };
            let limit = before.map_or(0, |m| m + 1);
            if current[i] > limit || current[i] >= max_blocks.max(1) {
                valid = false;
            }
            prefix_max[i] = before.map_or(current[i], |m| m.max(current[i]));
        }
        RestrictedGrowth {
            current,
            prefix_max,
            fixed: prefix.len().max(1).min(n),
            max_blocks,
            started: false,
            done: !valid,
        }
    }

    /// Moves to the next string in place, returning it.
    pub fn advance(&mut self) -> Option<&[usize]> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(&self.current);
        }
        let n = self.current.len();
        let mut i = n;
        while i > self.fixed {
            i -= 1;
            let limit = (self.prefix_max[i - 1] + 1).min(self.max_blocks - 1);
            if self.current[i] < limit {
                self.current[i] += 1;
                self.prefix_max[i] = self.prefix_max[i - 1].max(self.current[i]);
                for j in i + 1..n {
                    self.current[j] = 0;
                    self.prefix_max[j] = self.prefix_max[j - 1];
                }
                return Some(&self.current);
            }
        }
        self.done = true;
        None
    }
}

impl Iterator for RestrictedGrowth {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        self.advance().map(<[usize]>::to_vec)
    }
}

/// All valid prefixes of length `len` (at most `n`) with at most
/// `max_blocks` blocks; used to split enumeration across workers.
pub fn prefixes(n: usize, max_blocks: usize, len: usize) -> Vec<Vec<usize>> {
    RestrictedGrowth::new(len.min(n), max_blocks).collect()
}

/// Blocks of the partition encoded by `rgs`, as sorted position lists.
pub fn blocks(rgs: &[usize]) -> Vec<Vec<usize>> {
    let k = rgs.iter().copied().max().map_or(0, |m| m + 1);
    let mut out = vec![Vec::new(); k];
    for (i, &b) in rgs.iter().enumerate() {
        out[b].push(i);
    }
    out
}
