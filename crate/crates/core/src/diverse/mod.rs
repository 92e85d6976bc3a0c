//! Clusterings that preserve the diversity constraints.
//!
//! Each constraint is a vertex of a [`ConstraintGraph`]; colouring a vertex
//! means choosing one of its candidate clusterings. Adjacent colours must be
//! consistent: after merging the two clusterings and suppressing, both
//! lower bounds still hold.

mod candidates;
mod graph;

use std::collections::HashMap;
use std::fmt;
use std::ops::ControlFlow;
use std::rc::Rc;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constraints::{BoundTarget, ConstraintSet, DiversityConstraint};
use crate::error::{Error, Result};
use crate::model::{Clustering, Relation, TupleId};

pub use candidates::CandidateSpace;
pub use graph::{build_graph, ConstraintGraph, Vertex};

pub const DEFAULT_CANDIDATE_CAP: usize = 10_000;

/// Rule for picking the next vertex and ordering its candidates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Heuristic {
    /// Random vertex, candidates in a random tuple order.
    Naive,
    /// Vertex with the fewest consistent candidates left.
    MinChoice,
    /// Vertex with the most edges to uncoloured vertices.
    MaxFanOut,
}

impl Heuristic {
    pub const ALL: [Heuristic; 3] = [Heuristic::Naive, Heuristic::MinChoice, Heuristic::MaxFanOut];

    pub fn name(self) -> &'static str {
        match self {
            Heuristic::Naive => "naive",
            Heuristic::MinChoice => "min-choice",
            Heuristic::MaxFanOut => "max-fanout",
        }
    }
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Heuristic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Heuristic::ALL
            .into_iter()
            .find(|h| h.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown strategy `{s}` (naive, min-choice, max-fanout)")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Strategy {
    pub heuristic: Heuristic,
    pub seed: u64,
}

impl Strategy {
    pub fn new(heuristic: Heuristic, seed: u64) -> Self {
        Strategy { heuristic, seed }
    }
}

impl Default for Strategy {
    fn default() -> Self {
        Strategy::new(Heuristic::MinChoice, 0)
    }
}

/// Clustering chosen for each vertex; `None` while uncoloured.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ColorAssignment {
    colors: Vec<Option<Clustering>>,
}

impl ColorAssignment {
    pub fn get(&self, v: usize) -> Option<&Clustering> {
        self.colors.get(v).and_then(Option::as_ref)
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.colors.iter().all(Option::is_some)
    }

    /// Merge of every assigned clustering.
    pub fn merged(&self) -> Clustering {
        merge_all(self.colors.iter().flatten())
    }
}

/// Union of two clusterings, joining overlapping clusters transitively.
pub fn merge(s1: &Clustering, s2: &Clustering) -> Clustering {
    merge_all([s1, s2])
}

pub fn merge_all<'a, I>(clusterings: I) -> Clustering
where
    I: IntoIterator<Item = &'a Clustering>,
{
    let mut slot: HashMap<TupleId, usize> = HashMap::new();
    let mut ids: Vec<TupleId> = Vec::new();
    let mut parent: Vec<usize> = Vec::new();
    for s in clusterings {
        for cluster in s.clusters() {
            let mut root = None;
            for &id in cluster {
                let i = *slot.entry(id).or_insert_with(|| {
                    ids.push(id);
                    parent.push(parent.len());
                    parent.len() - 1
                });
                let ri = find(&mut parent, i);
                match root {
                    None => root = Some(ri),
                    Some(r0) if r0 != ri => parent[ri] = r0,
                    Some(_) => {}
                }
            }
        }
    }
    let mut groups: HashMap<usize, Vec<TupleId>> = HashMap::new();
    for i in 0..ids.len() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(ids[i]);
    }
    Clustering::canonical(groups.into_values().collect())
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Tuples still matching `target` once `s` is suppressed. Only covered
/// tuples count.
pub(crate) fn preserved_count(r: &Relation, s: &Clustering, target: &BoundTarget) -> u64 {
    s.clusters()
        .iter()
        .filter(|c| cluster_preserves(r, c, target))
        .map(|c| c.len() as u64)
        .sum()
}

/// Whether every tuple of `cluster` matches `target` after suppression.
pub(crate) fn cluster_preserves(r: &Relation, cluster: &[TupleId], target: &BoundTarget) -> bool {
    let Some(&first) = cluster.first() else {
        return false;
    };
    if !target.matches(r.row_unchecked(first)) {
        return false;
    }
    let head = r.row_unchecked(first);
    cluster[1..].iter().all(|&id| {
        let row = r.row_unchecked(id);
        target.positions().iter().all(|&p| row[p] == head[p])
    })
}

/// Whether the merge of `s1` and `s2`, once suppressed, still meets the lower
/// bounds of both constraints.
pub fn consistent(
    s1: &Clustering,
    sig1: &DiversityConstraint,
    s2: &Clustering,
    sig2: &DiversityConstraint,
    r: &Relation,
) -> Result<bool> {
    let merged = merge(s1, s2);
    merged.check_over(r)?;
    for sig in [sig1, sig2] {
        let bound = sig.target.bind(r.schema())?;
        if preserved_count(r, &merged, &bound) < sig.lo() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Candidate clusterings of `sigma` in visiting order, with no neighbours.
pub fn candidate_clusterings(sigma: &DiversityConstraint, r: &Relation, k: usize) -> Result<Vec<Clustering>> {
    candidate_clusterings_capped(sigma, r, k, DEFAULT_CANDIDATE_CAP)
}

pub fn candidate_clusterings_capped(
    sigma: &DiversityConstraint,
    r: &Relation,
    k: usize,
    cap: usize,
) -> Result<Vec<Clustering>> {
    check_k(k)?;
    let mut relevant = crate::constraints::relevant_tuples(r, sigma)?;
    relevant.sort_unstable();
    let space = CandidateSpace::new(k, sigma.lo(), sigma.hi().as_option(), Vec::new(), relevant);
    let mut out = Vec::new();
    let flow = space.visit(&mut |blocks| {
        if out.len() == cap {
            return ControlFlow::Break(());
        }
        out.push(Clustering::canonical(blocks.to_vec()));
        ControlFlow::Continue(())
    });
    match flow {
        ControlFlow::Break(()) => Err(budget_error(sigma, cap)),
        ControlFlow::Continue(()) => Ok(out),
    }
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    Ok(())
}

fn budget_error(sigma: &DiversityConstraint, cap: usize) -> Error {
    Error::SearchBudgetExceeded { constraint: sigma.to_string(), cap }
}

/// Parameters of one colouring search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    pub k: usize,
    pub strategy: Strategy,
    /// Candidates a vertex may try over the whole search before giving up.
    pub candidate_cap: usize,
}

impl SearchConfig {
    pub fn new(k: usize, strategy: Strategy) -> Self {
        SearchConfig { k, strategy, candidate_cap: DEFAULT_CANDIDATE_CAP }
    }
}

/// Decides whether a complete colouring should be kept. Returning `false`
/// makes the search backtrack.
pub type Acceptor<'a> = dyn FnMut(&Relation, &ConstraintGraph, &Clustering) -> Result<bool> + 'a;

/// Lower bounds of every vertex hold on the suppressed merge.
pub fn lower_bounds_hold(r: &Relation, g: &ConstraintGraph, merged: &Clustering) -> bool {
    g.vertices().iter().all(|v| preserved_count(r, merged, &v.bound) >= v.constraint.lo())
}

/// Backtracking colouring. Returns the first complete assignment accepted by
/// the global lower-bound check, or `None` when none exists.
pub fn coloring(g: &ConstraintGraph, r: &Relation, k: usize, strategy: Strategy) -> Result<Option<ColorAssignment>> {
    coloring_with(g, r, SearchConfig::new(k, strategy), &mut |r, g, m| Ok(lower_bounds_hold(r, g, m)))
}

pub fn coloring_with(
    g: &ConstraintGraph,
    r: &Relation,
    cfg: SearchConfig,
    accept: &mut Acceptor<'_>,
) -> Result<Option<ColorAssignment>> {
    check_k(cfg.k)?;
    let mut search = Search::new(g, r, cfg, accept);
    if search.solve()? {
        Ok(Some(ColorAssignment { colors: search.colors }))
    } else {
        Ok(None)
    }
}

/// The vertex a strategy would colour next, or `None` once all are coloured.
pub fn next_vertex(
    g: &ConstraintGraph,
    r: &Relation,
    k: usize,
    assigned: &ColorAssignment,
    strategy: Strategy,
) -> Result<Option<usize>> {
    check_k(k)?;
    let mut accept = |_: &Relation, _: &ConstraintGraph, _: &Clustering| Ok(true);
    let mut search = Search::new(g, r, SearchConfig::new(k, strategy), &mut accept);
    for (v, c) in assigned.colors.iter().enumerate().take(g.len()) {
        search.colors[v] = c.clone();
    }
    search.next_vertex()
}

/// Candidates of `v` consistent with the current assignment, counted up to
/// `limit` (as in the minimum-choice rule).
pub fn remaining_choices(
    g: &ConstraintGraph,
    r: &Relation,
    k: usize,
    assigned: &ColorAssignment,
    v: usize,
) -> Result<u128> {
    check_k(k)?;
    let mut accept = |_: &Relation, _: &ConstraintGraph, _: &Clustering| Ok(true);
    let mut search = Search::new(g, r, SearchConfig::new(k, Strategy::default()), &mut accept);
    for (u, c) in assigned.colors.iter().enumerate().take(g.len()) {
        search.colors[u] = c.clone();
    }
    Ok(search.choices(v, u128::MAX))
}

/// Merged clustering of a colouring of `sigma_set`, or `None`.
pub fn diverse_clustering(
    r: &Relation,
    sigma_set: &ConstraintSet,
    k: usize,
    strategy: Strategy,
) -> Result<Option<Clustering>> {
    diverse_clustering_with(r, sigma_set, SearchConfig::new(k, strategy), &mut |r, g, m| {
        Ok(lower_bounds_hold(r, g, m))
    })
}

pub fn diverse_clustering_with(
    r: &Relation,
    sigma_set: &ConstraintSet,
    cfg: SearchConfig,
    accept: &mut Acceptor<'_>,
) -> Result<Option<Clustering>> {
    let g = build_graph(r, sigma_set)?;
    Ok(coloring_with(&g, r, cfg, accept)?.map(|a| a.merged()))
}

struct Search<'a, 'b> {
    g: &'a ConstraintGraph,
    r: &'a Relation,
    cfg: SearchConfig,
    accept: &'a mut Acceptor<'b>,
    rng: ChaCha8Rng,
    spaces: Vec<Rc<CandidateSpace>>,
    colors: Vec<Option<Clustering>>,
    tried: Vec<usize>,
}

impl<'a, 'b> Search<'a, 'b> {
    fn new(g: &'a ConstraintGraph, r: &'a Relation, cfg: SearchConfig, accept: &'a mut Acceptor<'b>) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.strategy.seed);
        let spaces = g
            .vertices()
            .iter()
            .enumerate()
            .map(|(v, vert)| {
                let (lo, hi) = (vert.constraint.lo(), vert.constraint.hi().as_option());
                let space = match cfg.strategy.heuristic {
                    Heuristic::Naive => {
                        let mut order = vert.relevant.clone();
                        order.shuffle(&mut rng);
                        CandidateSpace::new(cfg.k, lo, hi, Vec::new(), order)
                    }
                    _ => CandidateSpace::split(cfg.k, lo, hi, &vert.relevant, &g.neighbour_tuples(v)),
                };
                Rc::new(space)
            })
            .collect();
        Search { g, r, cfg, accept, rng, spaces, colors: vec![None; g.len()], tried: vec![0; g.len()] }
    }

    fn solve(&mut self) -> Result<bool> {
        let Some(v) = self.next_vertex()? else {
            let merged = merge_all(self.colors.iter().flatten());
            return (self.accept)(self.r, self.g, &merged);
        };
        let space = Rc::clone(&self.spaces[v]);
        let flow = space.visit(&mut |blocks| {
            self.tried[v] += 1;
            if self.tried[v] > self.cfg.candidate_cap {
                return ControlFlow::Break(Err(budget_error(&self.g.vertex(v).constraint, self.cfg.candidate_cap)));
            }
            let cand = Clustering::canonical(blocks.to_vec());
            if !self.fits(v, &cand) {
                return ControlFlow::Continue(());
            }
            self.colors[v] = Some(cand);
            match self.solve() {
                Ok(true) => ControlFlow::Break(Ok(())),
                Ok(false) => {
                    self.colors[v] = None;
                    ControlFlow::Continue(())
                }
                Err(e) => ControlFlow::Break(Err(e)),
            }
        });
        match flow {
            ControlFlow::Break(Ok(())) => Ok(true),
            ControlFlow::Break(Err(e)) => {
                self.colors[v] = None;
                Err(e)
            }
            ControlFlow::Continue(()) => Ok(false),
        }
    }

    /// Pairwise consistency of `cand` for `v` with every coloured neighbour.
    fn fits(&self, v: usize, cand: &Clustering) -> bool {
        let vert = self.g.vertex(v);
        self.g.neighbours(v).iter().all(|&u| {
            let Some(other) = &self.colors[u] else {
                return true;
            };
            let merged = merge(cand, other);
            let ou = self.g.vertex(u);
            preserved_count(self.r, &merged, &vert.bound) >= vert.constraint.lo()
                && preserved_count(self.r, &merged, &ou.bound) >= ou.constraint.lo()
        })
    }

    fn uncoloured(&self) -> Vec<usize> {
        (0..self.g.len()).filter(|&v| self.colors[v].is_none()).collect()
    }

    fn has_coloured_neighbour(&self, v: usize) -> bool {
        self.g.neighbours(v).iter().any(|&u| self.colors[u].is_some())
    }

    /// Consistent candidates of `v`, counting stops once `limit` is exceeded
    /// or the candidate cap is reached.
    fn choices(&self, v: usize, limit: u128) -> u128 {
        if !self.has_coloured_neighbour(v) {
            return self.spaces[v].count();
        }
        let mut seen = 0usize;
        let mut count: u128 = 0;
        let _ = self.spaces[v].visit::<()>(&mut |blocks| {
            seen += 1;
            if seen > self.cfg.candidate_cap {
                return ControlFlow::Break(());
            }
            if self.fits(v, &Clustering::canonical(blocks.to_vec())) {
                count += 1;
                if count > limit {
                    return ControlFlow::Break(());
                }
            }
            ControlFlow::Continue(())
        });
        count
    }

    fn next_vertex(&mut self) -> Result<Option<usize>> {
        let open = self.uncoloured();
        if open.is_empty() {
            return Ok(None);
        }
        let ties: Vec<usize> = match self.cfg.strategy.heuristic {
            Heuristic::Naive => open,
            Heuristic::MaxFanOut => {
                let fan = |v: usize| self.g.neighbours(v).iter().filter(|&&u| self.colors[u].is_none()).count();
                let best = open.iter().map(|&v| fan(v)).max().unwrap_or(0);
                open.into_iter().filter(|&v| fan(v) == best).collect()
            }
            Heuristic::MinChoice => {
                // closed-form counts first, so enumeration can stop early
                let (closed, open_ended): (Vec<usize>, Vec<usize>) =
                    open.into_iter().partition(|&v| !self.has_coloured_neighbour(v));
                let mut best = u128::MAX;
                let mut ties = Vec::new();
                for v in closed.into_iter().chain(open_ended) {
                    let c = self.choices(v, best);
                    if c < best {
                        best = c;
                        ties.clear();
                    }
                    if c == best {
                        ties.push(v);
                    }
                }
                ties.sort_unstable();
                ties
            }
        };
        Ok(Some(ties[self.rng.gen_range(0..ties.len())]))
    }
}
