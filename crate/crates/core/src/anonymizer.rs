//! The two-phase anonymizer.
//!
//! Phase one colours the constraint graph and suppresses the resulting
//! clusters. Phase two anonymizes the remaining tuples with a greedy
//! k-member pass. `integrate` then suppresses target attributes of whole
//! residual QI-groups until every upper bound holds again.

use std::collections::{HashMap, HashSet};

use log::debug;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constraints::{
    frequency, is_satisfiable, minimal_cover, satisfies, BoundTarget, ConstraintSet,
};
use crate::diverse::{
    build_graph, cluster_preserves, coloring_with, lower_bounds_hold, ConstraintGraph, SearchConfig,
    Strategy, DEFAULT_CANDIDATE_CAP,
};
use crate::error::{Error, Result};
use crate::model::{
    cluster_agreement, information_loss, is_k_anonymous, is_suppression_of, qi_groups, suppress, CellValue,
    Clustering, Relation, TupleId,
};

/// Most residual groups the exhaustive repair will consider.
pub const EXHAUSTIVE_GROUP_LIMIT: usize = 12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum IntegrateMode {
    /// Repair one violated constraint at a time, cheapest group first.
    #[default]
    Greedy,
    /// Try every subset of candidate groups, fewest stars first.
    Exhaustive,
}

/// Treatment of constraints whose lower bound is below `k`.
///
/// In a k-anonymous suppression every QI-group keeps or loses a target as a
/// whole, so a preserved count is either 0 or at least `k`; a lower bound in
/// `1..k` therefore already forces `k` occurrences and needs no rewriting.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LowerBoundPolicy {
    #[default]
    Admit,
    /// Fail with [`Error::LowerBoundBelowK`].
    Reject,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DivaConfig {
    pub k: usize,
    pub strategy: Strategy,
    pub candidate_cap: usize,
    pub kmember_seed: u64,
    pub integrate: IntegrateMode,
    pub lower_bounds: LowerBoundPolicy,
}

impl DivaConfig {
    pub fn new(k: usize) -> Self {
        DivaConfig {
            k,
            strategy: Strategy::default(),
            candidate_cap: DEFAULT_CANDIDATE_CAP,
            kmember_seed: 0,
            integrate: IntegrateMode::Greedy,
            lower_bounds: LowerBoundPolicy::Admit,
        }
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }

    fn search(&self) -> SearchConfig {
        SearchConfig { k: self.k, strategy: self.strategy, candidate_cap: self.candidate_cap }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Publication {
    pub relation: Relation,
    /// Tuples clustered for the constraints.
    pub diverse_ids: Vec<TupleId>,
    /// Tuples anonymized by the k-member pass.
    pub residual_ids: Vec<TupleId>,
    pub information_loss: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum AnonymizationOutcome {
    Unsatisfiable,
    Published(Publication),
}

impl AnonymizationOutcome {
    pub fn publication(&self) -> Option<&Publication> {
        match self {
            AnonymizationOutcome::Published(p) => Some(p),
            AnonymizationOutcome::Unsatisfiable => None,
        }
    }

    pub fn is_published(&self) -> bool {
        self.publication().is_some()
    }
}

/// Greedy k-member clustering with suppression cost.
///
/// The distance between tuples is the number of QI attributes on which they
/// differ, and a cluster costs the stars it would need. Starting from a
/// seeded random tuple, each new cluster opens with the unassigned tuple
/// farthest from the previous opener and grows to `k` tuples by cheapest
/// addition. Fewer than `k` leftovers join the clusters they make cheapest.
/// A relation smaller than `k` comes back as a single cluster.
pub fn anonymize_kmember(r: &Relation, k: usize, seed: u64) -> Clustering {
    let k = k.max(1);
    let n = r.len();
    if n == 0 {
        return Clustering::empty();
    }
    if n < k {
        return Clustering::canonical(vec![r.ids().to_vec()]);
    }
    let qi = r.schema().qi_positions().to_vec();

    // tuples with identical QI cells are interchangeable here
    let mut slot: HashMap<Vec<CellValue>, usize> = HashMap::new();
    let mut keys: Vec<Vec<CellValue>> = Vec::new();
    let mut members: Vec<Vec<TupleId>> = Vec::new();
    let mut bucket_of: Vec<usize> = Vec::with_capacity(n);
    for (id, row) in r.tuples() {
        let key: Vec<CellValue> = qi.iter().map(|&p| row[p].clone()).collect();
        let b = *slot.entry(key.clone()).or_insert_with(|| {
            keys.push(key);
            members.push(Vec::new());
            keys.len() - 1
        });
        members[b].push(id);
        bucket_of.push(b);
    }
    for m in &mut members {
        m.reverse();
    }
    let distance = |a: &[CellValue], b: &[CellValue]| a.iter().zip(b).filter(|(x, y)| x != y).count();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = keys[bucket_of[rng.gen_range(0..n)]].clone();
    let mut remaining = n;
    let mut clusters: Vec<Vec<TupleId>> = Vec::new();
    while remaining >= k {
        let far = (0..keys.len())
            .filter(|&b| !members[b].is_empty())
            .fold(None, |best: Option<(usize, usize)>, b| {
                let d = distance(&keys[b], &rep);
                match best {
                    Some((_, bd)) if bd >= d => best,
                    _ => Some((b, d)),
                }
            })
            .map(|(b, _)| b)
            .expect("remaining tuples");
        rep = keys[far].clone();
        let head = keys[far].clone();
        let mut agree = vec![true; qi.len()];
        let mut cluster = vec![members[far].pop().expect("nonempty bucket")];
        remaining -= 1;
        while cluster.len() < k {
            let best = (0..keys.len())
                .filter(|&b| !members[b].is_empty())
                .min_by_key(|&b| {
                    (0..qi.len()).filter(|&i| !agree[i] || keys[b][i] != head[i]).count()
                })
                .expect("remaining tuples");
            for (i, a) in agree.iter_mut().enumerate() {
                *a = *a && keys[best][i] == head[i];
            }
            cluster.push(members[best].pop().expect("nonempty bucket"));
            remaining -= 1;
        }
        clusters.push(cluster);
    }

    let mut leftovers: Vec<TupleId> = members.into_iter().flatten().collect();
    leftovers.sort_unstable();
    for id in leftovers {
        let best = (0..clusters.len())
            .min_by_key(|&c| {
                let before = stars(r, &clusters[c]);
                clusters[c].push(id);
                let after = stars(r, &clusters[c]);
                clusters[c].pop();
                after - before
            })
            .expect("at least one cluster");
        clusters[best].push(id);
    }
    Clustering::canonical(clusters)
}

/// Stars the suppression of `cluster` introduces.
fn stars(r: &Relation, cluster: &[TupleId]) -> u64 {
    let agree = cluster_agreement(r, cluster);
    let disagree = r.schema().qi_positions().iter().filter(|&&p| !agree[p]).count();
    (disagree * cluster.len()) as u64
}

/// Joins `r_sigma` and `r_k` and repairs upper-bound violations by
/// suppressing target attributes of whole QI-groups of `r_k`.
pub fn integrate(r_sigma: &Relation, r_k: &Relation, sigma_set: &ConstraintSet) -> Result<Relation> {
    integrate_with(r_sigma, r_k, sigma_set, IntegrateMode::Greedy)
}

pub fn integrate_with(
    r_sigma: &Relation,
    r_k: &Relation,
    sigma_set: &ConstraintSet,
    mode: IntegrateMode,
) -> Result<Relation> {
    let union = r_sigma.union(r_k)?;
    let bounds: Vec<BoundTarget> =
        sigma_set.iter().map(|c| c.target.bind(union.schema())).collect::<Result<_>>()?;
    let mut counts: Vec<u64> = sigma_set.iter().map(|c| frequency(&union, &c.target)).collect::<Result<_>>()?;
    for (c, &n) in sigma_set.iter().zip(&counts) {
        if n < c.lo() {
            return Err(Error::Invariant(format!("lower bound of {c} violated before integration ({n})")));
        }
    }
    let violated: Vec<usize> = (0..counts.len()).filter(|&i| !sigma_set.as_slice()[i].hi().admits(counts[i])).collect();
    if violated.is_empty() {
        return Ok(union);
    }

    let groups = qi_groups(r_k);
    let mut reps: Vec<Vec<CellValue>> = groups.iter().map(|g| r_k.row_unchecked(g[0]).to_vec()).collect();
    let chosen: Vec<(usize, Vec<usize>)> = match mode {
        IntegrateMode::Greedy => greedy_repair(sigma_set, &bounds, &groups, &mut reps, &mut counts, violated)?,
        IntegrateMode::Exhaustive => exhaustive_repair(sigma_set, &bounds, &groups, &reps, &counts, &violated)?,
    };

    let mut cells = Vec::new();
    for (g, positions) in &chosen {
        debug!("suppressing attributes {positions:?} of a residual group of {}", groups[*g].len());
        for &id in &groups[*g] {
            cells.extend(positions.iter().map(|&p| (id, p)));
        }
    }
    let out = union.with_suppressed(&cells)?;
    if !satisfies(&out, sigma_set)? {
        return Err(Error::Invariant("integration left a constraint violated".into()));
    }
    Ok(out)
}

/// Number of constraints whose count drops when `positions` are suppressed in
/// a group with representative `rep`, applied to `counts`.
fn apply_suppression(
    bounds: &[BoundTarget],
    rep: &[CellValue],
    size: u64,
    positions: &[usize],
    counts: &mut [u64],
) {
    for (i, b) in bounds.iter().enumerate() {
        if b.matches(rep) && b.positions().iter().any(|p| positions.contains(p)) {
            counts[i] -= size;
        }
    }
}

fn greedy_repair(
    sigma_set: &ConstraintSet,
    bounds: &[BoundTarget],
    groups: &[Vec<TupleId>],
    reps: &mut [Vec<CellValue>],
    counts: &mut [u64],
    mut violated: Vec<usize>,
) -> Result<Vec<(usize, Vec<usize>)>> {
    let sigma = sigma_set.as_slice();
    let slack = |i: usize, counts: &[u64]| match sigma[i].hi().as_option() {
        Some(hi) => hi as i128 - counts[i] as i128,
        None => i128::MAX,
    };
    violated.sort_by_key(|&i| (slack(i, counts), i));
    let mut chosen: Vec<(usize, Vec<usize>)> = Vec::new();
    for i in violated {
        while !sigma[i].hi().admits(counts[i]) {
            let pick = (0..groups.len())
                .filter(|&g| bounds[i].matches(&reps[g]))
                .min_by_key(|&g| {
                    let others = (0..bounds.len()).filter(|&j| j != i && bounds[j].matches(&reps[g])).count();
                    (others * groups[g].len(), groups[g].len(), g)
                })
                .ok_or_else(|| {
                    Error::Invariant(format!("upper bound of {} violated by the diverse part", sigma[i]))
                })?;
            let positions = bounds[i].positions().to_vec();
            apply_suppression(bounds, &reps[pick], groups[pick].len() as u64, &positions, counts);
            for &p in &positions {
                reps[pick][p] = CellValue::Suppressed;
            }
            chosen.push((pick, positions));
        }
    }
    Ok(chosen)
}

fn exhaustive_repair(
    sigma_set: &ConstraintSet,
    bounds: &[BoundTarget],
    groups: &[Vec<TupleId>],
    reps: &[Vec<CellValue>],
    counts: &[u64],
    violated: &[usize],
) -> Result<Vec<(usize, Vec<usize>)>> {
    // each candidate group loses the target attributes of every violated
    // constraint it matches
    let actions: Vec<(usize, Vec<usize>)> = (0..groups.len())
        .filter_map(|g| {
            let mut positions: Vec<usize> = violated
                .iter()
                .filter(|&&i| bounds[i].matches(&reps[g]))
                .flat_map(|&i| bounds[i].positions().iter().copied())
                .collect();
            positions.sort_unstable();
            positions.dedup();
            (!positions.is_empty()).then_some((g, positions))
        })
        .collect();
    if actions.len() > EXHAUSTIVE_GROUP_LIMIT {
        return Err(Error::Config(format!(
            "exhaustive integration handles at most {EXHAUSTIVE_GROUP_LIMIT} groups, found {}",
            actions.len()
        )));
    }
    let sigma = sigma_set.as_slice();
    let mut best: Option<(u64, u32, u32)> = None;
    for mask in 0u32..(1 << actions.len()) {
        let mut trial = counts.to_vec();
        let mut cost = 0u64;
        for (a, (g, positions)) in actions.iter().enumerate() {
            if mask & (1 << a) != 0 {
                let fresh = positions.iter().filter(|&&p| !reps[*g][p].is_suppressed()).count();
                cost += (fresh * groups[*g].len()) as u64;
                apply_suppression(bounds, &reps[*g], groups[*g].len() as u64, positions, &mut trial);
            }
        }
        let ok = sigma.iter().zip(&trial).all(|(c, &n)| c.range.contains(n));
        let key = (cost, mask.count_ones(), mask);
        if ok && best.is_none_or(|b| key < b) {
            best = Some(key);
        }
    }
    let (_, _, mask) = best.ok_or_else(|| Error::Invariant("no set of residual groups repairs the upper bounds".into()))?;
    Ok(actions.into_iter().enumerate().filter(|(a, _)| mask & (1 << a) != 0).map(|(_, x)| x).collect())
}

/// Checks the preconditions and returns the minimal cover to search with.
fn prepare(r: &Relation, sigma_set: &ConstraintSet, cfg: &DivaConfig) -> Result<ConstraintSet> {
    let k = cfg.k;
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    sigma_set.check_against(r.schema())?;
    if !is_satisfiable(sigma_set) {
        return Err(Error::UnsatisfiableConstraints);
    }
    if cfg.lower_bounds == LowerBoundPolicy::Reject {
        if let Some(c) = sigma_set.iter().find(|c| c.lo() < k as u64) {
            return Err(Error::LowerBoundBelowK { constraint: c.to_string(), lo: c.lo(), k });
        }
    }
    minimal_cover(sigma_set)
}

/// Whether some colouring of the constraint graph exists.
pub fn decide(r: &Relation, sigma_set: &ConstraintSet, k: usize) -> Result<bool> {
    decide_with(r, sigma_set, &DivaConfig::new(k))
}

/// As [`decide`], with the search settings of `cfg`. An unsatisfiable
/// constraint set is answered with `false`.
pub fn decide_with(r: &Relation, sigma_set: &ConstraintSet, cfg: &DivaConfig) -> Result<bool> {
    let cover = match prepare(r, sigma_set, cfg) {
        Err(Error::UnsatisfiableConstraints) => return Ok(false),
        other => other?,
    };
    let g = build_graph(r, &cover)?;
    Ok(coloring_with(&g, r, cfg.search(), &mut |r, g, m| Ok(lower_bounds_hold(r, g, m)))?.is_some())
}

/// Extends a merged clustering so it can be published: fewer than `k`
/// uncovered tuples are absorbed into existing clusters, and the suppressed
/// clusters must respect every upper bound on their own.
fn complete(r: &Relation, g: &ConstraintGraph, merged: &Clustering, k: usize) -> Option<Clustering> {
    let covered = merged.covered_set();
    let residual: Vec<TupleId> = r.ids().iter().copied().filter(|id| !covered.contains(id)).collect();
    let mut clusters = merged.clusters().to_vec();
    let contrib = |c: &[TupleId], v: usize| {
        if cluster_preserves(r, c, &g.vertex(v).bound) {
            c.len() as u64
        } else {
            0
        }
    };
    if !residual.is_empty() && residual.len() < k {
        let mut totals: Vec<u64> =
            (0..g.len()).map(|v| clusters.iter().map(|c| contrib(c, v)).sum()).collect();
        for id in residual {
            let mut best: Option<(u64, usize)> = None;
            for ci in 0..clusters.len() {
                let before = stars(r, &clusters[ci]);
                let old: Vec<u64> = (0..g.len()).map(|v| contrib(&clusters[ci], v)).collect();
                clusters[ci].push(id);
                let keeps = (0..g.len()).all(|v| totals[v] - old[v] + contrib(&clusters[ci], v) >= g.vertex(v).constraint.lo());
                let cost = stars(r, &clusters[ci]) - before;
                clusters[ci].pop();
                if keeps && best.is_none_or(|(bc, _)| cost < bc) {
                    best = Some((cost, ci));
                }
            }
            let (_, ci) = best?;
            for (v, total) in totals.iter_mut().enumerate() {
                *total -= contrib(&clusters[ci], v);
            }
            clusters[ci].push(id);
            for (v, total) in totals.iter_mut().enumerate() {
                *total += contrib(&clusters[ci], v);
            }
        }
    }
    let within = (0..g.len()).all(|v| {
        let n: u64 = clusters.iter().map(|c| contrib(c, v)).sum();
        g.vertex(v).constraint.hi().admits(n)
    });
    within.then(|| Clustering::canonical(clusters))
}

/// Publishes a k-anonymous suppression of `r` that satisfies `sigma_set`.
///
/// Returns `Unsatisfiable` when no colouring exists, and
/// [`Error::Completion`] when colourings exist but none of them can be
/// extended to a valid publication.
pub fn diva(r: &Relation, sigma_set: &ConstraintSet, cfg: DivaConfig) -> Result<AnonymizationOutcome> {
    let cover = prepare(r, sigma_set, &cfg)?;
    if cfg.candidate_cap == 0 {
        return Err(Error::Config("candidate cap must be positive".into()));
    }
    let g = build_graph(r, &cover)?;
    let mut accepted: Option<Clustering> = None;
    let found = coloring_with(&g, r, cfg.search(), &mut |r, g, merged| {
        if !lower_bounds_hold(r, g, merged) {
            return Ok(false);
        }
        accepted = complete(r, g, merged, cfg.k);
        Ok(accepted.is_some())
    })?;
    let Some(s_sigma) = found.and(accepted) else {
        let colourable = coloring_with(&g, r, cfg.search(), &mut |r, g, m| Ok(lower_bounds_hold(r, g, m)))?;
        return match colourable {
            Some(_) => Err(Error::Completion(
                "every diverse clustering breaks an upper bound or strands fewer than k tuples".into(),
            )),
            None => Ok(AnonymizationOutcome::Unsatisfiable),
        };
    };

    let r_sigma = suppress(r, &s_sigma)?;
    let covered: HashSet<TupleId> = s_sigma.covered_set();
    let residual_ids: Vec<TupleId> = r.ids().iter().copied().filter(|id| !covered.contains(id)).collect();
    let residual = r.restrict(&residual_ids.iter().copied().collect());
    let r_k = suppress(&residual, &anonymize_kmember(&residual, cfg.k, cfg.kmember_seed))?;
    let relation = integrate_with(&r_sigma, &r_k, sigma_set, cfg.integrate)?;

    if !is_k_anonymous(&relation, cfg.k) || !satisfies(&relation, sigma_set)? || !is_suppression_of(r, &relation)? {
        return Err(Error::Invariant("published relation failed validation".into()));
    }
    let mut diverse_ids: Vec<TupleId> = covered.into_iter().collect();
    diverse_ids.sort_unstable();
    let information_loss = information_loss(&relation);
    Ok(AnonymizationOutcome::Published(Publication { relation, diverse_ids, residual_ids, information_loss }))
}
