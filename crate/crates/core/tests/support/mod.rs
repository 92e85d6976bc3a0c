//! Random instances and brute-force oracles shared by the integration tests.
//! Nothing here calls the search code it is used to check.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use diva_core::{
    is_satisfiable, minimal_cover, CellValue, Clustering, ConstraintSet, DiversityConstraint, FrequencyRange,
    Relation, Schema, Target, TupleId,
};
use rand::seq::SliceRandom;
use rand::Rng;

pub const QI: [&str; 3] = ["A", "B", "C"];

pub fn schema() -> Arc<Schema> {
    Arc::new(Schema::new(&["A", "B", "C", "S"], &QI, &["S"]).unwrap())
}

/// `n` rows over three QI attributes with the given domain sizes, plus a
/// sensitive column. Values are `a0`, `a1`, ... per attribute.
pub fn random_relation<R: Rng>(rng: &mut R, n: usize, domains: [usize; 3]) -> Relation {
    let rows: Vec<Vec<String>> = (0..n)
        .map(|_| {
            let mut row: Vec<String> = QI
                .iter()
                .zip(domains)
                .map(|(a, d)| format!("{}{}", a.to_lowercase(), rng.gen_range(0..d.max(1))))
                .collect();
            row.push(format!("s{}", rng.gen_range(0..4)));
            row
        })
        .collect();
    Relation::from_rows(schema(), &rows).unwrap()
}

pub fn random_target<R: Rng>(rng: &mut R, r: &Relation, domains: [usize; 3]) -> Target {
    let width = if rng.gen_bool(0.6) { 1 } else { 2 };
    let mut attrs: Vec<usize> = (0..3).collect();
    attrs.shuffle(rng);
    attrs.truncate(width);
    attrs.sort_unstable();
    let row: Option<Vec<String>> = if !r.is_empty() && rng.gen_bool(0.85) {
        let id = r.ids()[rng.gen_range(0..r.len())];
        Some(r.row(id).unwrap().iter().map(|c| c.as_str().unwrap_or("").to_owned()).collect())
    } else {
        None
    };
    let names: Vec<String> = attrs.iter().map(|&a| QI[a].to_owned()).collect();
    let values: Vec<String> = attrs
        .iter()
        .map(|&a| match &row {
            Some(row) => row[a].clone(),
            None => format!("{}{}", QI[a].to_lowercase(), rng.gen_range(0..domains[a].max(1))),
        })
        .collect();
    Target::new(&names, &values).unwrap()
}

/// A constraint on a random target whose range sits around the target's
/// actual frequency in `r`.
pub fn random_constraint<R: Rng>(rng: &mut R, r: &Relation, domains: [usize; 3], k: usize) -> DiversityConstraint {
    let target = random_target(rng, r, domains);
    let f = frequency(r, &target) as u64;
    let lo = if rng.gen_bool(0.3) { 0 } else { rng.gen_range(0..=f + 1).max(rng.gen_range(0..=k as u64)) };
    let hi = if rng.gen_bool(0.15) { None } else { Some(rng.gen_range(lo..=lo.max(f) + 2)) };
    DiversityConstraint::new(target, FrequencyRange::new(lo, hi).unwrap())
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub r: Relation,
    pub sigma: ConstraintSet,
    pub k: usize,
}

pub fn random_instance<R: Rng>(rng: &mut R, max_n: usize, ks: &[usize], max_sigma: usize, max_domain: usize) -> Instance {
    let domains = [rng.gen_range(1..=max_domain), rng.gen_range(1..=max_domain), rng.gen_range(1..=max_domain)];
    let n = rng.gen_range(1..=max_n);
    let r = random_relation(rng, n, domains);
    let k = *ks.choose(rng).unwrap();
    let m = rng.gen_range(1..=max_sigma);
    let sigma = ConstraintSet::dedup((0..m).map(|_| random_constraint(rng, &r, domains, k)).collect());
    Instance { r, sigma, k }
}

fn cell(r: &Relation, id: TupleId, attr: &str) -> CellValue {
    r.row(id).unwrap()[r.schema().position(attr).unwrap()].clone()
}

pub fn matches(r: &Relation, id: TupleId, target: &Target) -> bool {
    target.pairs().iter().all(|(a, v)| cell(r, id, a).as_str() == Some(v.as_str()))
}

pub fn relevant(r: &Relation, target: &Target) -> Vec<TupleId> {
    r.ids().iter().copied().filter(|&id| matches(r, id, target)).collect()
}

pub fn frequency(r: &Relation, target: &Target) -> usize {
    relevant(r, target).len()
}

/// Every set partition of `ids` into blocks of `k..=2k-1`, as restricted
/// growth strings pruned on block size.
pub fn block_partitions(ids: &[TupleId], k: usize) -> Vec<Vec<Vec<TupleId>>> {
    fn go(i: usize, sizes: &mut Vec<usize>, labels: &mut Vec<usize>, ids: &[TupleId], k: usize, out: &mut Vec<Vec<Vec<TupleId>>>) {
        let deficit: usize = sizes.iter().map(|&s| k.saturating_sub(s)).sum();
        if deficit > ids.len() - i {
            return;
        }
        if i == ids.len() {
            let mut blocks = vec![Vec::new(); sizes.len()];
            for (j, &l) in labels.iter().enumerate() {
                blocks[l].push(ids[j]);
            }
            out.push(blocks);
            return;
        }
        for l in 0..=sizes.len() {
            if l == sizes.len() {
                sizes.push(0);
            }
            if sizes[l] + 1 < 2 * k {
                sizes[l] += 1;
                labels.push(l);
                go(i + 1, sizes, labels, ids, k, out);
                labels.pop();
                sizes[l] -= 1;
            }
            if sizes[l] == 0 {
                sizes.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(0, &mut Vec::new(), &mut Vec::new(), ids, k, &mut out);
    out
}

/// All clusterings of relevant tuples admissible for `c`: `p` tuples with
/// `lo <= p <= min(hi, |I|)`, partitioned into blocks of `k..=2k-1`.
pub fn candidates(r: &Relation, c: &DiversityConstraint, k: usize) -> Vec<Vec<Vec<TupleId>>> {
    let rel = relevant(r, &c.target);
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << rel.len()) {
        let p = mask.count_ones() as u64;
        if p < c.lo() || !c.hi().admits(p) {
            continue;
        }
        let chosen: Vec<TupleId> = (0..rel.len()).filter(|i| mask & (1 << i) != 0).map(|i| rel[i]).collect();
        out.extend(block_partitions(&chosen, k));
    }
    out
}

/// Union of clusterings with overlapping clusters fused.
pub fn merge(parts: &[&Vec<Vec<TupleId>>]) -> Vec<HashSet<TupleId>> {
    let mut clusters: Vec<HashSet<TupleId>> = Vec::new();
    for part in parts {
        for block in part.iter() {
            let mut fused: HashSet<TupleId> = block.iter().copied().collect();
            clusters.retain(|c| {
                if c.is_disjoint(&fused) {
                    true
                } else {
                    fused.extend(c.iter().copied());
                    false
                }
            });
            clusters.push(fused);
        }
    }
    clusters
}

/// Tuples still matching `target` once every cluster is suppressed.
pub fn preserved(r: &Relation, clusters: &[HashSet<TupleId>], target: &Target) -> u64 {
    clusters
        .iter()
        .filter(|c| c.iter().all(|&id| matches(r, id, target)))
        .map(|c| c.len() as u64)
        .sum()
}

/// Number of candidate combinations the oracle would walk, saturating.
pub fn search_space(r: &Relation, sigma: &ConstraintSet, k: usize) -> u128 {
    if !is_satisfiable(sigma) {
        return 0;
    }
    let cover = minimal_cover(sigma).unwrap();
    cover.iter().fold(1u128, |acc, c| acc.saturating_mul(candidates(r, c, k).len() as u128))
}

/// Exhaustive decision: some choice of one candidate per constraint of the
/// minimal cover keeps every overlapping pair's lower bounds after merging,
/// and the merge of all choices keeps every lower bound.
pub fn oracle_decide(r: &Relation, sigma: &ConstraintSet, k: usize) -> bool {
    if !is_satisfiable(sigma) {
        return false;
    }
    let mut paired: Vec<(DiversityConstraint, Vec<Vec<Vec<TupleId>>>)> =
        minimal_cover(sigma).unwrap().iter().map(|c| (c.clone(), candidates(r, c, k))).collect();
    if paired.iter().any(|(_, c)| c.is_empty()) {
        return false;
    }
    // smallest lists first; the walk stays exhaustive
    paired.sort_by_key(|(_, c)| c.len());
    let (cover, cands): (Vec<DiversityConstraint>, Vec<Vec<Vec<Vec<TupleId>>>>) = paired.into_iter().unzip();
    let rel: Vec<HashSet<TupleId>> = cover.iter().map(|c| relevant(r, &c.target).into_iter().collect()).collect();
    let adjacent = |i: usize, j: usize| !rel[i].is_disjoint(&rel[j]);
    let mut choice = vec![0usize; cover.len()];
    fn walk(
        i: usize,
        choice: &mut Vec<usize>,
        cands: &[Vec<Vec<Vec<TupleId>>>],
        cover: &[DiversityConstraint],
        r: &Relation,
        adjacent: &dyn Fn(usize, usize) -> bool,
    ) -> bool {
        if i == cover.len() {
            let parts: Vec<&Vec<Vec<TupleId>>> = (0..cover.len()).map(|j| &cands[j][choice[j]]).collect();
            let merged = merge(&parts);
            return cover.iter().all(|c| preserved(r, &merged, &c.target) >= c.lo());
        }
        for x in 0..cands[i].len() {
            choice[i] = x;
            let ok = (0..i).filter(|&j| adjacent(i, j)).all(|j| {
                let merged = merge(&[&cands[i][x], &cands[j][choice[j]]]);
                preserved(r, &merged, &cover[i].target) >= cover[i].lo()
                    && preserved(r, &merged, &cover[j].target) >= cover[j].lo()
            });
            if ok && walk(i + 1, choice, cands, cover, r, adjacent) {
                return true;
            }
        }
        false
    }
    walk(0, &mut choice, &cands, &cover, r, &adjacent)
}

/// k-anonymity by grouping rows on their QI cells.
pub fn oracle_k_anonymous(r: &Relation, k: usize) -> bool {
    let mut groups: BTreeMap<Vec<Option<String>>, usize> = BTreeMap::new();
    for (_, row) in r.tuples() {
        let key = r.schema().qi_positions().iter().map(|&p| row[p].as_str().map(str::to_owned)).collect();
        *groups.entry(key).or_default() += 1;
    }
    groups.values().all(|&n| n >= k)
}

/// Same ids, and every cell either unchanged or a suppressed QI cell.
pub fn oracle_suppression_of(original: &Relation, anon: &Relation) -> bool {
    original.ids() == anon.ids()
        && original.tuples().zip(anon.tuples()).all(|((_, a), (_, b))| {
            a.iter().zip(b).enumerate().all(|(p, (x, y))| x == y || (y.is_suppressed() && original.schema().is_qi(p)))
        })
}

pub fn oracle_satisfies(r: &Relation, sigma: &ConstraintSet) -> bool {
    sigma.iter().all(|c| {
        let f = frequency(r, &c.target) as u64;
        f >= c.lo() && c.hi().admits(f)
    })
}

/// Publication checks, with a description of the first failure.
pub fn check_publication(r: &Relation, sigma: &ConstraintSet, k: usize, out: &Relation) -> Result<(), String> {
    if !oracle_k_anonymous(out, k) || !diva_core::is_k_anonymous(out, k) {
        return Err(format!("not {k}-anonymous"));
    }
    if !oracle_satisfies(out, sigma) || !diva_core::constraints::satisfies(out, sigma).unwrap() {
        return Err("constraints violated".into());
    }
    if !oracle_suppression_of(r, out) || !diva_core::is_suppression_of(r, out).unwrap() {
        return Err("not a suppression of the input".into());
    }
    Ok(())
}

/// Stars a clustering costs, counted cell by cell.
pub fn oracle_stars(r: &Relation, clusters: &[Vec<TupleId>]) -> u64 {
    clusters
        .iter()
        .map(|c| {
            let disagree = r
                .schema()
                .qi_positions()
                .iter()
                .filter(|&&p| c.iter().any(|&id| r.row(id).unwrap()[p] != r.row(c[0]).unwrap()[p]))
                .count();
            (disagree * c.len()) as u64
        })
        .sum()
}

/// A random clustering over a random subset of `r`.
pub fn random_clustering<R: Rng>(rng: &mut R, r: &Relation, max_block: usize) -> Clustering {
    let mut ids: Vec<TupleId> = r.ids().iter().copied().filter(|_| rng.gen_bool(0.8)).collect();
    ids.shuffle(rng);
    let mut blocks = Vec::new();
    while !ids.is_empty() {
        let s = rng.gen_range(1..=max_block.max(1)).min(ids.len());
        blocks.push(ids.drain(..s).collect());
    }
    Clustering::new(blocks).unwrap()
}
