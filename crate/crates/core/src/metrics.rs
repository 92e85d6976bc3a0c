//! Quality measures for published relations and constraint sets.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::constraints::{relevant_tuples, validate, ConstraintRecord, ConstraintSet, DiversityConstraint};
use crate::error::{Error, Result};
use crate::model::{information_loss, qi_groups, suppress, Clustering, Relation, TupleId};
use crate::scalar::Scalar;

/// Samples drawn by [`reference_anonymization`] on larger inputs.
pub const DEFAULT_REFERENCE_BUDGET: usize = 1_000;
/// Inputs below this size get an exhaustive reference.
pub const EXHAUSTIVE_REFERENCE_LIMIT: usize = 9;

/// Sum of per-tuple penalties: the size of the tuple's QI-group, or `|R|` when
/// every QI cell of the tuple is suppressed.
pub fn discernibility(r: &Relation) -> u64 {
    let n = r.len() as u64;
    let qi = r.schema().qi_positions();
    qi_groups(r)
        .iter()
        .map(|g| {
            let row = r.row_unchecked(g[0]);
            let hidden = qi.iter().all(|&p| row[p].is_suppressed());
            let penalty = if hidden { n } else { g.len() as u64 };
            penalty * g.len() as u64
        })
        .sum()
}

/// Discernibility divided by `|R|^2`; zero for the empty relation.
pub fn discernibility_normalized<S: Scalar>(r: &Relation) -> S {
    let n = r.len() as u64;
    if n == 0 {
        return S::zero();
    }
    S::from_ratio(discernibility(r), n * n)
}

/// Normalized discernibility of `reference` over that of `candidate`.
pub fn accuracy_ratio<S: Scalar>(candidate: &Relation, reference: &Relation) -> Result<S> {
    if candidate.len() != reference.len() {
        return Err(Error::Structure(format!(
            "accuracy ratio of relations with {} and {} tuples",
            candidate.len(),
            reference.len()
        )));
    }
    let (c, r) = (discernibility(candidate), discernibility(reference));
    if c == 0 {
        return Ok(S::one());
    }
    Ok(S::from_ratio(r, c))
}

/// A low-discernibility suppression of `r` with clusters of `k..=2k-1`
/// tuples, found exhaustively below [`EXHAUSTIVE_REFERENCE_LIMIT`] tuples and
/// by `budget` random clusterings otherwise.
pub fn reference_anonymization(r: &Relation, k: usize, budget: usize, seed: u64) -> Result<Relation> {
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    let ids = r.ids().to_vec();
    if ids.len() < k {
        let all = if ids.is_empty() { Clustering::empty() } else { Clustering::canonical(vec![ids]) };
        return suppress(r, &all);
    }
    let mut best: Option<(u64, u64, Relation)> = None;
    let mut consider = |blocks: Vec<Vec<TupleId>>| -> Result<()> {
        let out = suppress(r, &Clustering::canonical(blocks))?;
        let key = (discernibility(&out), information_loss(&out));
        if best.as_ref().is_none_or(|(d, l, _)| key < (*d, *l)) {
            best = Some((key.0, key.1, out));
        }
        Ok(())
    };
    if ids.len() < EXHAUSTIVE_REFERENCE_LIMIT {
        let mut all = Vec::new();
        set_partitions(&ids, k, &mut Vec::new(), &mut all);
        for blocks in all {
            consider(blocks)?;
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..budget.max(1) {
            let mut order = ids.clone();
            order.shuffle(&mut rng);
            let mut blocks = Vec::new();
            let mut rest = &order[..];
            while !rest.is_empty() {
                let sizes: Vec<usize> = (k..=(2 * k - 1).min(rest.len()))
                    .filter(|&s| rest.len() - s == 0 || rest.len() - s >= k)
                    .collect();
                let s = sizes[rng.gen_range(0..sizes.len())];
                blocks.push(rest[..s].to_vec());
                rest = &rest[s..];
            }
            consider(blocks)?;
        }
    }
    Ok(best.expect("at least one clustering").2)
}

/// Every partition of `ids` into blocks of `k..=2k-1`.
fn set_partitions(ids: &[TupleId], k: usize, blocks: &mut Vec<Vec<TupleId>>, out: &mut Vec<Vec<Vec<TupleId>>>) {
    let Some((&first, rest)) = ids.split_first() else {
        out.push(blocks.clone());
        return;
    };
    let n = rest.len();
    for mask in 0u32..(1 << n) {
        let s = mask.count_ones() as usize + 1;
        let left = ids.len() - s;
        if s < k || s > 2 * k - 1 || (left != 0 && left < k) {
            continue;
        }
        let mut block = vec![first];
        let mut remaining = Vec::with_capacity(left);
        for (i, &id) in rest.iter().enumerate() {
            if mask & (1 << i) != 0 {
                block.push(id);
            } else {
                remaining.push(id);
            }
        }
        blocks.push(block);
        set_partitions(&remaining, k, blocks, out);
        blocks.pop();
    }
}

/// Jaccard overlap of the relevant tuple sets of two constraints.
pub fn conflict_score<S: Scalar>(r: &Relation, a: &DiversityConstraint, b: &DiversityConstraint) -> Result<S> {
    let ia = relevant_tuples(r, a)?;
    let ib = relevant_tuples(r, b)?;
    let inter = ia.iter().filter(|id| ib.contains(id)).count() as u64;
    let union = (ia.len() + ib.len()) as u64 - inter;
    if union == 0 {
        return Ok(S::zero());
    }
    Ok(S::from_ratio(inter, union))
}

/// Mean conflict score over all unordered pairs; needs two constraints.
pub fn conflict_rate<S: Scalar>(r: &Relation, sigma_set: &ConstraintSet) -> Result<S> {
    let n = sigma_set.len();
    if n < 2 {
        return Err(Error::Config("conflict rate is undefined for fewer than two constraints".into()));
    }
    let c = sigma_set.as_slice();
    let mut sum = S::zero();
    for i in 0..n {
        for j in i + 1..n {
            sum = sum + conflict_score::<S>(r, &c[i], &c[j])?;
        }
    }
    Ok(sum / S::from_count((n * (n - 1) / 2) as u64))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstraintReport {
    #[serde(flatten)]
    pub constraint: ConstraintRecord,
    pub count: u64,
    pub satisfied: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsReport {
    pub disc: u64,
    pub disc_normalized: f64,
    pub info_loss: u64,
    pub constraints: Vec<ConstraintReport>,
}

impl MetricsReport {
    pub fn new(r_anon: &Relation, sigma_set: &ConstraintSet) -> Result<Self> {
        let constraints = sigma_set
            .iter()
            .map(|c| {
                let v = validate(r_anon, c)?;
                Ok(ConstraintReport { constraint: c.clone().into(), count: v.count, satisfied: v.satisfied })
            })
            .collect::<Result<_>>()?;
        Ok(MetricsReport {
            disc: discernibility(r_anon),
            disc_normalized: discernibility_normalized(r_anon),
            info_loss: information_loss(r_anon),
            constraints,
        })
    }
}
