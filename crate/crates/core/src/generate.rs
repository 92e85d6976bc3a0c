//! Constraint generators: one constraint per distinct value of the target
//! attributes, with bounds derived from the estimated published size.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use log::warn;
use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constraints::{ConstraintSet, DiversityConstraint, FrequencyRange, Target};
use crate::error::{Error, Result};
use crate::model::{qi_groups, Relation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintClass {
    /// Cover as many target values as possible, one occurrence each.
    Minimum,
    /// The same share of the published tuples for every value.
    Average,
    /// Shares proportional to each value's frequency.
    Proportion,
}

impl ConstraintClass {
    pub fn name(self) -> &'static str {
        match self {
            ConstraintClass::Minimum => "minimum",
            ConstraintClass::Average => "average",
            ConstraintClass::Proportion => "proportion",
        }
    }
}

impl fmt::Display for ConstraintClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConstraintClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [ConstraintClass::Minimum, ConstraintClass::Average, ConstraintClass::Proportion]
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown constraint class `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub class: ConstraintClass,
    pub target_attrs: Vec<String>,
    pub seed: u64,
}

/// Estimated number of tuples a k-anonymization can publish unsuppressed:
/// `|R|` minus the number of distinct QI combinations.
pub fn estimate_published(r: &Relation) -> u64 {
    (r.len() as u64).saturating_sub(qi_groups(r).len() as u64)
}

/// Generates constraints and drops those with a lower bound below `k`.
pub fn generate_constraints(r: &Relation, spec: &GeneratorSpec, k: usize) -> Result<ConstraintSet> {
    let all = generate_all(r, spec)?;
    let kept: Vec<DiversityConstraint> = all
        .iter()
        .filter(|c| {
            let keep = c.lo() >= k as u64;
            if !keep {
                warn!("dropping generated constraint {c}: lower bound below k = {k}");
            }
            keep
        })
        .cloned()
        .collect();
    ConstraintSet::new(kept)
}

/// Generates one constraint per distinct target value, unfiltered.
pub fn generate_all(r: &Relation, spec: &GeneratorSpec) -> Result<ConstraintSet> {
    if spec.target_attrs.is_empty() {
        return Err(Error::Config("no target attributes".into()));
    }
    let positions = spec
        .target_attrs
        .iter()
        .map(|a| {
            let p = r.schema().require(a)?;
            if !r.schema().is_qi(p) {
                return Err(Error::Config(format!("target attribute `{a}` is not a quasi-identifier")));
            }
            Ok(p)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut slot: HashMap<Vec<&str>, usize> = HashMap::new();
    let mut values: Vec<Vec<&str>> = Vec::new();
    let mut freq: Vec<u64> = Vec::new();
    for (_, row) in r.tuples() {
        let Some(key) = positions.iter().map(|&p| row[p].as_str()).collect::<Option<Vec<&str>>>() else {
            continue;
        };
        let i = *slot.entry(key.clone()).or_insert_with(|| {
            values.push(key);
            freq.push(0);
            values.len() - 1
        });
        freq[i] += 1;
    }
    let d = values.len() as u64;
    if d == 0 {
        return Err(Error::Config("target attributes have no values".into()));
    }

    let n = r.len() as u64;
    let u = estimate_published(r);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let bounds: Vec<(u64, u64)> = if u < d {
        let mut b = vec![(0, 0); d as usize];
        for i in index::sample(&mut rng, d as usize, u as usize) {
            b[i] = (1, 1);
        }
        b
    } else {
        match spec.class {
            ConstraintClass::Minimum => {
                let mut b = vec![(1, 1); d as usize];
                distribute(&mut b, &freq, u - d, &mut rng);
                b
            }
            ConstraintClass::Average => {
                let (fl, cl) = (u / d, u.div_ceil(d));
                let mut b: Vec<(u64, u64)> = freq.iter().map(|&f| (fl.min(f), cl.min(f))).collect();
                let total: u64 = b.iter().map(|x| x.1).sum();
                distribute(&mut b, &freq, u.saturating_sub(total), &mut rng);
                b
            }
            ConstraintClass::Proportion => {
                freq.iter().map(|&f| ((u * f) / n, (u * f).div_ceil(n))).collect()
            }
        }
    };

    let constraints = values
        .iter()
        .zip(bounds)
        .map(|(v, (lo, hi))| {
            Ok(DiversityConstraint::new(
                Target::new(&spec.target_attrs, &v.iter().map(|s| s.to_string()).collect::<Vec<_>>())?,
                FrequencyRange::new(lo, Some(hi))?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    ConstraintSet::new(constraints)
}

/// Adds `w` to the upper bound of a random constraint whose frequency leaves
/// room for it; without one, spreads `w` over the most frequent values.
fn distribute(bounds: &mut [(u64, u64)], freq: &[u64], w: u64, rng: &mut ChaCha8Rng) {
    if w == 0 {
        return;
    }
    let eligible: Vec<usize> = (0..bounds.len()).filter(|&i| freq[i] >= bounds[i].1 + w).collect();
    if let Some(&i) = eligible.choose(rng) {
        bounds[i].1 += w;
        return;
    }
    let mut order: Vec<usize> = (0..bounds.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(freq[i]), i));
    let mut left = w;
    for i in order {
        let room = freq[i].saturating_sub(bounds[i].1).min(left);
        bounds[i].1 += room;
        left -= room;
        if left == 0 {
            break;
        }
    }
}
