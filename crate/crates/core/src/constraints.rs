//! Diversity constraints and their reasoning engine.
//!
//! A constraint `(X[t], lo, hi)` bounds how many tuples carry the values `t`
//! on the attributes `X`. Targets compare as sets of attribute/value pairs,
//! so `{ETH,CTY}[Caucasian,Calgary]` and `{CTY,ETH}[Calgary,Caucasian]` are
//! the same target.
//!
//! Implication is decided by one range-narrowing pass over the premises:
//! a premise on the same target intersects its range, a premise on a more
//! general target (a strict subset of pairs) caps the count from above, and
//! a premise on a more specific target (a strict superset) bounds it from
//! below.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CellValue, Relation, Schema, TupleId};

/// Upper end of a frequency range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UpperBound {
    Bounded(u64),
    Unbounded,
}

impl UpperBound {
    pub fn admits(self, n: u64) -> bool {
        match self {
            UpperBound::Bounded(hi) => n <= hi,
            UpperBound::Unbounded => true,
        }
    }

    pub fn as_option(self) -> Option<u64> {
        match self {
            UpperBound::Bounded(hi) => Some(hi),
            UpperBound::Unbounded => None,
        }
    }
}

impl PartialOrd for UpperBound {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for UpperBound {
    fn cmp(&self, other: &Self) -> Ordering {
        use UpperBound::*;
        match (self, other) {
            (Bounded(a), Bounded(b)) => a.cmp(b),
            (Bounded(_), Unbounded) => Ordering::Less,
            (Unbounded, Bounded(_)) => Ordering::Greater,
            (Unbounded, Unbounded) => Ordering::Equal,
        }
    }
}

impl fmt::Display for UpperBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UpperBound::Bounded(hi) => write!(f, "{hi}"),
            UpperBound::Unbounded => f.write_str("inf"),
        }
    }
}

/// A closed frequency interval `[lo, hi]`, or the empty range that only
/// arises during inference.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FrequencyRange {
    Interval { lo: u64, hi: UpperBound },
    Empty,
}

impl FrequencyRange {
    pub const ANY: FrequencyRange = FrequencyRange::Interval { lo: 0, hi: UpperBound::Unbounded };

    pub fn new(lo: u64, hi: Option<u64>) -> Result<Self> {
        match hi {
            Some(hi) if lo > hi => Err(Error::InvalidConstraint(format!(
                "lower bound {lo} exceeds upper bound {hi}"
            ))),
            Some(hi) => Ok(FrequencyRange::Interval { lo, hi: UpperBound::Bounded(hi) }),
            None => Ok(FrequencyRange::Interval { lo, hi: UpperBound::Unbounded }),
        }
    }

    /// Interval constructor that collapses an inverted interval to `Empty`.
    fn clamp(lo: u64, hi: UpperBound) -> Self {
        if hi.admits(lo) {
            FrequencyRange::Interval { lo, hi }
        } else {
            FrequencyRange::Empty
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, FrequencyRange::Empty)
    }

    pub fn lo(&self) -> Option<u64> {
        match self {
            FrequencyRange::Interval { lo, .. } => Some(*lo),
            FrequencyRange::Empty => None,
        }
    }

    pub fn hi(&self) -> Option<UpperBound> {
        match self {
            FrequencyRange::Interval { hi, .. } => Some(*hi),
            FrequencyRange::Empty => None,
        }
    }

    pub fn contains(&self, n: u64) -> bool {
        match *self {
            FrequencyRange::Interval { lo, hi } => lo <= n && hi.admits(n),
            FrequencyRange::Empty => false,
        }
    }

    pub fn intersect(&self, other: &FrequencyRange) -> FrequencyRange {
        match (*self, *other) {
            (FrequencyRange::Interval { lo: a, hi: b }, FrequencyRange::Interval { lo: c, hi: d }) => {
                FrequencyRange::clamp(a.max(c), b.min(d))
            }
            _ => FrequencyRange::Empty,
        }
    }

    /// Set inclusion; the empty range is a subset of everything.
    pub fn is_subset_of(&self, other: &FrequencyRange) -> bool {
        match (*self, *other) {
            (FrequencyRange::Empty, _) => true,
            (_, FrequencyRange::Empty) => false,
            (FrequencyRange::Interval { lo: a, hi: b }, FrequencyRange::Interval { lo: c, hi: d }) => {
                c <= a && b <= d
            }
        }
    }
}

impl fmt::Display for FrequencyRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FrequencyRange::Interval { lo, hi } => write!(f, "[{lo},{hi}]"),
            FrequencyRange::Empty => f.write_str("[]"),
        }
    }
}

/// Attribute names and the value each must take.
#[derive(Clone, Debug)]
pub struct Target {
    attrs: Vec<String>,
    values: Vec<String>,
    /// Pairs sorted by attribute, used for set comparisons.
    pairs: Vec<(String, String)>,
}

impl Target {
    pub fn new<S: AsRef<str>>(attrs: &[S], values: &[S]) -> Result<Self> {
        if attrs.is_empty() {
            return Err(Error::InvalidConstraint("target has no attributes".into()));
        }
        if attrs.len() != values.len() {
            return Err(Error::InvalidConstraint(format!(
                "{} attributes but {} values",
                attrs.len(),
                values.len()
            )));
        }
        let attrs: Vec<String> = attrs.iter().map(|a| a.as_ref().to_owned()).collect();
        let values: Vec<String> = values.iter().map(|v| v.as_ref().to_owned()).collect();
        if let Some(v) = values.iter().find(|v| v.as_str() == crate::model::SUPPRESSED_LITERAL) {
            return Err(Error::InvalidConstraint(format!("target value `{v}` is reserved")));
        }
        let mut pairs: Vec<(String, String)> =
            attrs.iter().cloned().zip(values.iter().cloned()).collect();
        pairs.sort();
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidConstraint("duplicate target attribute".into()));
        }
        Ok(Target { attrs, values, pairs })
    }

    pub fn attrs(&self) -> &[String] {
        &self.attrs
    }

    pub fn values(&self) -> &[String] {
        &self.values
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    /// True when every pair of `self` is a pair of `other` and `other` has more.
    pub fn is_strict_subset_of(&self, other: &Target) -> bool {
        self.pairs.len() < other.pairs.len()
            && self.pairs.iter().all(|p| other.pairs.binary_search(p).is_ok())
    }

    /// Resolves attribute names against `schema`.
    pub fn bind(&self, schema: &Schema) -> Result<BoundTarget> {
        let positions = self
            .attrs
            .iter()
            .map(|a| schema.require(a))
            .collect::<Result<Vec<_>>>()?;
        let values = self.values.iter().map(|v| CellValue::value(v)).collect();
        Ok(BoundTarget { positions, values })
    }
}

impl PartialEq for Target {
    fn eq(&self, other: &Self) -> bool {
        self.pairs == other.pairs
    }
}

impl Eq for Target {}

impl std::hash::Hash for Target {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.pairs.hash(state);
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.attrs.len() == 1 {
            return write!(f, "{}[{}]", self.attrs[0], self.values[0]);
        }
        write!(f, "{{{}}}[{}]", self.attrs.join(","), self.values.join(","))
    }
}

/// A target resolved to attribute positions of a particular schema.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundTarget {
    positions: Vec<usize>,
    values: Vec<CellValue>,
}

impl BoundTarget {
    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    /// Whether a row carries the target values. Suppressed cells never match.
    pub fn matches(&self, row: &[CellValue]) -> bool {
        self.positions.iter().zip(&self.values).all(|(&p, v)| &row[p] == v)
    }
}

/// `(X[t], lo, hi)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ConstraintRecord", into = "ConstraintRecord")]
pub struct DiversityConstraint {
    pub target: Target,
    pub range: FrequencyRange,
}

impl DiversityConstraint {
    pub fn new(target: Target, range: FrequencyRange) -> Self {
        DiversityConstraint { target, range }
    }

    pub fn bounded<S: AsRef<str>>(attrs: &[S], values: &[S], lo: u64, hi: u64) -> Result<Self> {
        Ok(DiversityConstraint::new(Target::new(attrs, values)?, FrequencyRange::new(lo, Some(hi))?))
    }

    pub fn at_least<S: AsRef<str>>(attrs: &[S], values: &[S], lo: u64) -> Result<Self> {
        Ok(DiversityConstraint::new(Target::new(attrs, values)?, FrequencyRange::new(lo, None)?))
    }

    /// The constraint no relation satisfies.
    pub fn falsum(target: Target) -> Self {
        DiversityConstraint::new(target, FrequencyRange::Empty)
    }

    /// Lower bound; the empty range reports `u64::MAX` so it is never met.
    pub fn lo(&self) -> u64 {
        self.range.lo().unwrap_or(u64::MAX)
    }

    pub fn hi(&self) -> UpperBound {
        self.range.hi().unwrap_or(UpperBound::Bounded(0))
    }
}

impl fmt::Display for DiversityConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.range {
            FrequencyRange::Interval { lo, hi } => write!(f, "({}, {lo}, {hi})", self.target),
            FrequencyRange::Empty => write!(f, "({}, empty)", self.target),
        }
    }
}

/// Wire form of a constraint: `{"attrs": [...], "values": [...], "lo": n, "hi": n|null}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintRecord {
    pub attrs: Vec<String>,
    pub values: Vec<String>,
    pub lo: u64,
    pub hi: Option<u64>,
}

impl TryFrom<ConstraintRecord> for DiversityConstraint {
    type Error = Error;

    fn try_from(r: ConstraintRecord) -> Result<Self> {
        Ok(DiversityConstraint::new(Target::new(&r.attrs, &r.values)?, FrequencyRange::new(r.lo, r.hi)?))
    }
}

impl From<DiversityConstraint> for ConstraintRecord {
    fn from(c: DiversityConstraint) -> Self {
        // The empty range has no interval form; it is written as lo > hi,
        // which reading back rejects.
        let (lo, hi) = match c.range {
            FrequencyRange::Interval { lo, hi } => (lo, hi.as_option()),
            FrequencyRange::Empty => (1, Some(0)),
        };
        ConstraintRecord { attrs: c.target.attrs, values: c.target.values, lo, hi }
    }
}

/// An ordered set of constraints without exact duplicates.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<DiversityConstraint>", into = "Vec<DiversityConstraint>")]
pub struct ConstraintSet {
    constraints: Vec<DiversityConstraint>,
}

impl ConstraintSet {
    pub fn new(constraints: Vec<DiversityConstraint>) -> Result<Self> {
        for (i, c) in constraints.iter().enumerate() {
            if constraints[..i].contains(c) {
                return Err(Error::InvalidConstraint(format!("duplicate constraint {c}")));
            }
        }
        Ok(ConstraintSet { constraints })
    }

    /// Builds a set, silently dropping exact duplicates.
    pub fn dedup(constraints: Vec<DiversityConstraint>) -> Self {
        let mut out: Vec<DiversityConstraint> = Vec::with_capacity(constraints.len());
        for c in constraints {
            if !out.contains(&c) {
                out.push(c);
            }
        }
        ConstraintSet { constraints: out }
    }

    pub fn empty() -> Self {
        ConstraintSet::default()
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, DiversityConstraint> {
        self.constraints.iter()
    }

    pub fn as_slice(&self) -> &[DiversityConstraint] {
        &self.constraints
    }

    pub fn get(&self, i: usize) -> Option<&DiversityConstraint> {
        self.constraints.get(i)
    }

    /// The set without its `i`-th member.
    pub fn without(&self, i: usize) -> ConstraintSet {
        let mut constraints = self.constraints.clone();
        constraints.remove(i);
        ConstraintSet { constraints }
    }

    /// First `n` members.
    pub fn prefix(&self, n: usize) -> ConstraintSet {
        ConstraintSet { constraints: self.constraints[..n.min(self.len())].to_vec() }
    }

    /// Rejects targets on attributes that are unknown or not quasi-identifiers.
    pub fn check_against(&self, schema: &Schema) -> Result<()> {
        for c in &self.constraints {
            for a in c.target.attrs() {
                let p = schema.require(a)?;
                if !schema.is_qi(p) {
                    return Err(Error::InvalidConstraint(format!(
                        "constraint {c} targets non-QI attribute `{a}`"
                    )));
                }
            }
        }
        Ok(())
    }
}

impl TryFrom<Vec<DiversityConstraint>> for ConstraintSet {
    type Error = Error;

    fn try_from(v: Vec<DiversityConstraint>) -> Result<Self> {
        ConstraintSet::new(v)
    }
}

impl From<ConstraintSet> for Vec<DiversityConstraint> {
    fn from(s: ConstraintSet) -> Self {
        s.constraints
    }
}

impl<'a> IntoIterator for &'a ConstraintSet {
    type Item = &'a DiversityConstraint;
    type IntoIter = std::slice::Iter<'a, DiversityConstraint>;

    fn into_iter(self) -> Self::IntoIter {
        self.constraints.iter()
    }
}

/// Number of tuples of `r` matching `target`.
pub fn frequency(r: &Relation, target: &Target) -> Result<u64> {
    let bound = target.bind(r.schema())?;
    Ok(r.tuples().filter(|(_, row)| bound.matches(row)).count() as u64)
}

/// Count of target occurrences and whether it lies in the range.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Validation {
    pub count: u64,
    pub satisfied: bool,
}

pub fn validate(r: &Relation, sigma: &DiversityConstraint) -> Result<Validation> {
    let count = frequency(r, &sigma.target)?;
    Ok(Validation { count, satisfied: sigma.range.contains(count) })
}

/// Per-constraint validation, in declaration order.
pub fn validate_set(r: &Relation, sigma_set: &ConstraintSet) -> Result<Vec<Validation>> {
    sigma_set.iter().map(|c| validate(r, c)).collect()
}

pub fn satisfies(r: &Relation, sigma_set: &ConstraintSet) -> Result<bool> {
    Ok(validate_set(r, sigma_set)?.iter().all(|v| v.satisfied))
}

/// Whether every constraint's lower bound is met; upper bounds are ignored.
pub fn satisfies_lower_bounds(r: &Relation, sigma_set: &ConstraintSet) -> Result<bool> {
    for c in sigma_set {
        if frequency(r, &c.target)? < c.lo() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The tightest range for `target` derivable from `premises`.
pub fn inferred_range<'a, I>(premises: I, target: &Target) -> FrequencyRange
where
    I: IntoIterator<Item = &'a DiversityConstraint>,
{
    let mut delta = FrequencyRange::ANY;
    for premise in premises {
        let derived = if premise.target == *target {
            premise.range
        } else if premise.target.is_strict_subset_of(target) {
            match premise.range {
                FrequencyRange::Interval { hi, .. } => FrequencyRange::Interval { lo: 0, hi },
                FrequencyRange::Empty => FrequencyRange::Empty,
            }
        } else if target.is_strict_subset_of(&premise.target) {
            match premise.range {
                FrequencyRange::Interval { lo, .. } => {
                    FrequencyRange::Interval { lo, hi: UpperBound::Unbounded }
                }
                FrequencyRange::Empty => FrequencyRange::Empty,
            }
        } else {
            continue;
        };
        delta = delta.intersect(&derived);
    }
    delta
}

/// Whether `sigma_set` logically implies `sigma`.
pub fn implies(sigma_set: &ConstraintSet, sigma: &DiversityConstraint) -> bool {
    implied_by(sigma_set.iter(), sigma)
}

fn implied_by<'a, I>(premises: I, sigma: &DiversityConstraint) -> bool
where
    I: IntoIterator<Item = &'a DiversityConstraint>,
{
    inferred_range(premises, &sigma.target).is_subset_of(&sigma.range)
}

/// False iff some target in the set is narrowed to the empty range.
pub fn is_satisfiable(sigma_set: &ConstraintSet) -> bool {
    let mut seen: BTreeSet<&[(String, String)]> = BTreeSet::new();
    sigma_set
        .iter()
        .filter(|c| seen.insert(c.target.pairs()))
        .all(|c| !inferred_range(sigma_set, &c.target).is_empty())
}

/// Drops members implied by the others, scanning in declaration order until
/// nothing changes.
pub fn minimal_cover(sigma_set: &ConstraintSet) -> Result<ConstraintSet> {
    if !is_satisfiable(sigma_set) {
        return Err(Error::UnsatisfiableConstraints);
    }
    let mut cover = sigma_set.clone();
    loop {
        let redundant = (0..cover.len()).find(|&i| {
            let sigma = &cover.constraints[i];
            let rest = cover.constraints.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, c)| c);
            implied_by(rest, sigma)
        });
        match redundant {
            Some(i) => {
                cover.constraints.remove(i);
            }
            None => return Ok(cover),
        }
    }
}

/// Ids of the tuples matching the constraint's target, in relation order.
pub fn relevant_tuples(r: &Relation, sigma: &DiversityConstraint) -> Result<Vec<TupleId>> {
    let bound = sigma.target.bind(r.schema())?;
    Ok(r.tuples().filter(|(_, row)| bound.matches(row)).map(|(id, _)| id).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;

    fn c(attrs: &[&str], values: &[&str], lo: u64, hi: Option<u64>) -> DiversityConstraint {
        DiversityConstraint::new(Target::new(attrs, values).unwrap(), FrequencyRange::new(lo, hi).unwrap())
    }

    fn set(v: Vec<DiversityConstraint>) -> ConstraintSet {
        ConstraintSet::new(v).unwrap()
    }

    fn calgary_premises() -> (DiversityConstraint, DiversityConstraint, DiversityConstraint) {
        let general = c(&["CTY"], &["Calgary"], 2, Some(10));
        let specific = c(&["GEN", "ETH", "CTY"], &["Female", "Caucasian", "Calgary"], 4, Some(7));
        let query = c(&["ETH", "CTY"], &["Caucasian", "Calgary"], 5, Some(8));
        (general, specific, query)
    }

    #[test]
    fn targets_compare_as_pair_sets() {
        let a = Target::new(&["ETH", "CTY"], &["Caucasian", "Calgary"]).unwrap();
        let b = Target::new(&["CTY", "ETH"], &["Calgary", "Caucasian"]).unwrap();
        assert_eq!(a, b);
        let g = Target::new(&["CTY"], &["Calgary"]).unwrap();
        assert!(g.is_strict_subset_of(&a));
        assert!(!a.is_strict_subset_of(&g));
        assert!(!a.is_strict_subset_of(&b));
        let other_value = Target::new(&["CTY"], &["Vancouver"]).unwrap();
        assert!(!other_value.is_strict_subset_of(&a));
    }

    #[test]
    fn target_validation() {
        assert!(Target::new::<&str>(&[], &[]).is_err());
        assert!(Target::new(&["A", "A"], &["x", "y"]).is_err());
        assert!(Target::new(&["A"], &["x", "y"]).is_err());
        assert!(Target::new(&["A"], &["*"]).is_err());
        assert!(FrequencyRange::new(3, Some(2)).is_err());
    }

    #[test]
    fn frequency_examples() {
        let asian = Target::new(&["ETH"], &["Asian"]).unwrap();
        assert_eq!(frequency(&table_1a(), &asian).unwrap(), 3);
        assert_eq!(frequency(&crate::model::Relation::empty(medical_schema()), &asian).unwrap(), 0);
        let vancouver = Target::new(&["CTY"], &["Vancouver"]).unwrap();
        assert_eq!(frequency(&table_1c(), &vancouver).unwrap(), 2);
        let unknown = Target::new(&["ZIP"], &["1"]).unwrap();
        assert!(matches!(frequency(&table_1a(), &unknown), Err(Error::UnknownAttribute(_))));
    }

    #[test]
    fn validate_examples() {
        let r = table_1a();
        assert!(validate(&r, &sigma1()).unwrap().satisfied);
        assert!(validate(&r, &c(&["GEN"], &["Male"], 0, None)).unwrap().satisfied);
        assert_eq!(validate(&r, &sigma2()).unwrap(), Validation { count: 2, satisfied: true });
        assert!(!validate(&r, &c(&["ETH"], &["Asian"], 4, None)).unwrap().satisfied);
        assert!(satisfies(&r, &example_sigma()).unwrap());
    }

    #[test]
    fn implication_narrows_to_expected_range() {
        let (general, specific, query) = calgary_premises();
        let premises = set(vec![general, specific]);
        assert_eq!(
            inferred_range(&premises, &query.target),
            FrequencyRange::new(4, Some(10)).unwrap()
        );
        // [4,10] is not inside [5,8]: four Calgary residents, all female and
        // Caucasian, satisfy both premises but not the query.
        assert!(!implies(&premises, &query));
        assert!(implies(&premises, &c(&["ETH", "CTY"], &["Caucasian", "Calgary"], 3, Some(12))));
    }

    #[test]
    fn implication_simple_cases() {
        assert!(implies(&ConstraintSet::empty(), &c(&["A"], &["a"], 0, None)));
        assert!(!implies(&ConstraintSet::empty(), &c(&["A"], &["a"], 1, None)));
        let s = set(vec![c(&["A"], &["a"], 2, Some(5))]);
        assert!(implies(&s, &c(&["A"], &["a"], 1, Some(6))));
        assert!(!implies(&s, &c(&["A"], &["a"], 3, Some(4))));
    }

    #[test]
    fn inference_rule_units() {
        // range containment on a fixed target
        let s = set(vec![c(&["A"], &["a"], 2, Some(5))]);
        assert!(implies(&s, &c(&["A"], &["a"], 2, Some(5))));
        assert!(implies(&s, &c(&["A"], &["a"], 0, None)));
        // upper bound carries to a more specific target
        let ab = c(&["A", "B"], &["a", "b"], 0, Some(5));
        assert!(implies(&s, &ab));
        assert!(!implies(&s, &c(&["A", "B"], &["a", "b"], 1, Some(5))));
        // lower bound carries to a more general target
        let s2 = set(vec![c(&["A", "B"], &["a", "b"], 2, Some(5))]);
        assert!(implies(&s2, &c(&["A"], &["a"], 2, None)));
        assert!(!implies(&s2, &c(&["A"], &["a"], 2, Some(5))));
        // intersection of ranges on one target
        let s3 = set(vec![c(&["A"], &["a"], 1, Some(5)), c(&["A"], &["a"], 3, Some(7))]);
        assert!(implies(&s3, &c(&["A"], &["a"], 3, Some(5))));
    }

    #[test]
    fn satisfiability_examples() {
        let s = set(vec![
            c(&["ETH", "CTY"], &["Caucasian", "Calgary"], 6, Some(8)),
            c(&["CTY"], &["Calgary"], 1, Some(5)),
        ]);
        assert!(!is_satisfiable(&s));
        assert!(is_satisfiable(&ConstraintSet::empty()));
        let s = set(vec![c(&["A"], &["a"], 2, Some(5)), c(&["A"], &["a"], 4, Some(9))]);
        assert!(is_satisfiable(&s));
        assert_eq!(inferred_range(&s, &s.get(0).unwrap().target), FrequencyRange::new(4, Some(5)).unwrap());
        let s = set(vec![c(&["A"], &["a"], 2, Some(3)), c(&["A"], &["a"], 4, Some(9))]);
        assert!(!is_satisfiable(&s));
    }

    #[test]
    fn minimal_cover_examples() {
        let (general, specific, query) = calgary_premises();
        let pair = set(vec![general.clone(), specific.clone()]);
        assert_eq!(minimal_cover(&pair).unwrap(), pair);
        let single = set(vec![sigma1()]);
        assert_eq!(minimal_cover(&single).unwrap(), single);

        // a looser copy of an existing constraint is redundant
        let loose = c(&["CTY"], &["Calgary"], 1, Some(12));
        let s = set(vec![general.clone(), loose, specific.clone(), query]);
        let cover = minimal_cover(&s).unwrap();
        assert_eq!(cover.len(), 3);
        assert!(!cover.as_slice().iter().any(|x| x.range == FrequencyRange::new(1, Some(12)).unwrap()));

        let bad = set(vec![c(&["A"], &["a"], 2, Some(3)), c(&["A"], &["a"], 4, Some(9))]);
        assert!(matches!(minimal_cover(&bad), Err(Error::UnsatisfiableConstraints)));
    }

    #[test]
    fn relevant_tuple_examples() {
        let r = table_1a();
        assert_eq!(relevant_tuples(&r, &sigma1()).unwrap(), vec![t(8), t(9), t(10)]);
        assert_eq!(relevant_tuples(&r, &sigma3()).unwrap(), vec![t(6), t(7), t(8), t(10)]);
        let empty = crate::model::Relation::empty(medical_schema());
        assert!(relevant_tuples(&empty, &sigma1()).unwrap().is_empty());
    }

    #[test]
    fn constraint_json_shape() {
        let json = r#"[{"attrs":["ETH"],"values":["Asian"],"lo":2,"hi":5},
                       {"attrs":["GEN","CTY"],"values":["Male","Calgary"],"lo":1,"hi":null}]"#;
        let s: ConstraintSet = serde_json::from_str(json).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.get(1).unwrap().hi(), UpperBound::Unbounded);
        let back = serde_json::to_value(&s).unwrap();
        assert_eq!(back[0]["hi"], 5);
        assert!(back[1]["hi"].is_null());
        assert!(serde_json::from_str::<ConstraintSet>(r#"[{"attrs":["A"],"values":["a"],"lo":3,"hi":1}]"#).is_err());
        let dup = r#"[{"attrs":["A"],"values":["a"],"lo":1,"hi":2},{"attrs":["A"],"values":["a"],"lo":1,"hi":2}]"#;
        assert!(serde_json::from_str::<ConstraintSet>(dup).is_err());
    }

    #[test]
    fn qi_only_targets() {
        let schema = medical_schema();
        assert!(example_sigma().check_against(&schema).is_ok());
        let on_sensitive = set(vec![c(&["DIAG"], &["Seizure"], 1, None)]);
        assert!(on_sensitive.check_against(&schema).is_err());
    }
}
