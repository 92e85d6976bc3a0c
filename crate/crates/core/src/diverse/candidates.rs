//! Lazy enumeration of the clusterings that can serve one constraint.
//!
//! A candidate picks `p` relevant tuples, `lo <= p <= min(hi, |I|)`, and
//! partitions them into clusters of `k..=2k-1` tuples. Candidates are visited
//! by ascending overlap with neighbouring relevant sets, then ascending `p`,
//! then lexicographically. Every set partition is produced once: the first
//! remaining tuple always opens the next block.

use std::ops::ControlFlow;

use crate::model::TupleId;

#[derive(Clone, Debug)]
pub struct CandidateSpace {
    k: usize,
    lo: usize,
    hi: usize,
    shared: Vec<TupleId>,
    free: Vec<TupleId>,
}

impl CandidateSpace {
    /// `shared` lists relevant tuples that also lie in a neighbour's relevant
    /// set, `free` the rest. Both are visited in the order given.
    pub fn new(k: usize, lo: u64, hi: Option<u64>, shared: Vec<TupleId>, free: Vec<TupleId>) -> Self {
        assert!(k >= 1, "k must be positive");
        let total = shared.len() + free.len();
        let hi = hi.map_or(total, |h| usize::try_from(h).unwrap_or(usize::MAX).min(total));
        let lo = usize::try_from(lo).unwrap_or(usize::MAX);
        CandidateSpace { k, lo, hi, shared, free }
    }

    /// Splits `relevant` by membership in the sorted `neighbour_tuples`.
    pub fn split(
        k: usize,
        lo: u64,
        hi: Option<u64>,
        relevant: &[TupleId],
        neighbour_tuples: &[TupleId],
    ) -> Self {
        let (shared, free) = relevant
            .iter()
            .partition(|id| neighbour_tuples.binary_search(id).is_ok());
        CandidateSpace::new(k, lo, hi, shared, free)
    }

    pub fn relevant_len(&self) -> usize {
        self.shared.len() + self.free.len()
    }

    /// Calls `f` with the blocks of each candidate in order until it breaks.
    pub fn visit<B>(&self, f: &mut dyn FnMut(&[Vec<TupleId>]) -> ControlFlow<B>) -> ControlFlow<B> {
        if self.lo > self.hi {
            return ControlFlow::Continue(());
        }
        let mut blocks = Vec::new();
        for o in 0..=self.shared.len().min(self.hi) {
            for p in self.lo.max(o)..=self.hi {
                if p - o > self.free.len() || !feasible(p, self.k) {
                    continue;
                }
                for_each_combination(self.shared.len(), o, &mut |si| {
                    for_each_combination(self.free.len(), p - o, &mut |fi| {
                        let mut chosen: Vec<TupleId> = si.iter().map(|&i| self.shared[i]).collect();
                        chosen.extend(fi.iter().map(|&i| self.free[i]));
                        partitions(&chosen, self.k, &mut blocks, f)
                    })
                })?;
            }
        }
        ControlFlow::Continue(())
    }

    /// Number of candidates, saturating at `u128::MAX`.
    pub fn count(&self) -> u128 {
        let n = self.relevant_len();
        if self.lo > self.hi {
            return 0;
        }
        let a = block_partitions(self.hi, self.k);
        let mut total: u128 = 0;
        for p in self.lo..=self.hi {
            total = total.saturating_add(binomial(n, p).saturating_mul(a[p]));
        }
        total
    }
}

/// Whether `r` tuples split into blocks of `k..=2k-1`.
pub(crate) fn feasible(r: usize, k: usize) -> bool {
    r == 0 || r.div_ceil(2 * k - 1) <= r / k
}

fn for_each_combination<B>(
    n: usize,
    r: usize,
    f: &mut dyn FnMut(&[usize]) -> ControlFlow<B>,
) -> ControlFlow<B> {
    if r > n {
        return ControlFlow::Continue(());
    }
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        f(&idx)?;
        let mut i = r;
        loop {
            if i == 0 {
                return ControlFlow::Continue(());
            }
            i -= 1;
            if idx[i] < n - r + i {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn partitions<B>(
    rem: &[TupleId],
    k: usize,
    blocks: &mut Vec<Vec<TupleId>>,
    f: &mut dyn FnMut(&[Vec<TupleId>]) -> ControlFlow<B>,
) -> ControlFlow<B> {
    let Some((&first, rest)) = rem.split_first() else {
        return f(blocks);
    };
    for s in k..=(2 * k - 1).min(rem.len()) {
        if !feasible(rem.len() - s, k) {
            continue;
        }
        for_each_combination(rest.len(), s - 1, &mut |idx| {
            let mut block = Vec::with_capacity(s);
            block.push(first);
            block.extend(idx.iter().map(|&i| rest[i]));
            let mut left = Vec::with_capacity(rest.len() + 1 - s);
            let mut next = idx.iter().peekable();
            for (i, &id) in rest.iter().enumerate() {
                if next.peek() == Some(&&i) {
                    next.next();
                } else {
                    left.push(id);
                }
            }
            blocks.push(block);
            let flow = partitions(&left, k, blocks, f);
            blocks.pop();
            flow
        })?;
    }
    ControlFlow::Continue(())
}

fn binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut c: u128 = 1;
    for i in 0..r {
        match c.checked_mul((n - i) as u128) {
            Some(v) => c = v / (i as u128 + 1),
            None => return u128::MAX,
        }
    }
    c
}

/// `a[m]`: partitions of `m` labelled items into blocks of `k..=2k-1`.
fn block_partitions(max: usize, k: usize) -> Vec<u128> {
    let mut a = vec![0u128; max + 1];
    a[0] = 1;
    for m in 1..=max {
        let mut sum: u128 = 0;
        for s in k..=(2 * k - 1).min(m) {
            if a[m - s] != 0 {
                sum = sum.saturating_add(binomial(m - 1, s - 1).saturating_mul(a[m - s]));
            }
        }
        a[m] = sum;
    }
    a
}
