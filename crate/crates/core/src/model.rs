//! Tabular data model: schemas, cells, relations, clusterings, and the
//! suppression operator.
//!
//! Tuples are identified by stable [`TupleId`]s assigned at ingestion, so
//! duplicate rows stay distinguishable and clusterings never refer to row
//! contents.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TupleId(pub u32);

impl fmt::Display for TupleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Literal used for suppressed cells in textual output.
pub const SUPPRESSED_LITERAL: &str = "*";

/// A single cell: a concrete categorical value or the suppression marker.
///
/// `Suppressed` equals itself (two fully starred QI vectors fall in the same
/// QI-group) and never equals a concrete value.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CellValue {
    Value(Arc<str>),
    Suppressed,
}

impl CellValue {
    pub fn value(s: &str) -> Self {
        CellValue::Value(Arc::from(s))
    }

    pub fn is_suppressed(&self) -> bool {
        matches!(self, CellValue::Suppressed)
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            CellValue::Value(v) => Some(v),
            CellValue::Suppressed => None,
        }
    }
}

impl fmt::Display for CellValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellValue::Value(v) => f.write_str(v),
            CellValue::Suppressed => f.write_str(SUPPRESSED_LITERAL),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AttributeRole {
    QuasiIdentifier,
    Sensitive,
    Other,
}

/// Attribute names plus the quasi-identifier / sensitive partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schema {
    attributes: Vec<String>,
    roles: Vec<AttributeRole>,
    qi: Vec<usize>,
    positions: HashMap<String, usize>,
}

impl Schema {
    pub fn new<S: AsRef<str>>(attributes: &[S], qi: &[S], sensitive: &[S]) -> Result<Self> {
        let attributes: Vec<String> = attributes.iter().map(|a| a.as_ref().to_owned()).collect();
        let mut positions = HashMap::with_capacity(attributes.len());
        for (i, a) in attributes.iter().enumerate() {
            if positions.insert(a.clone(), i).is_some() {
                return Err(Error::Schema(format!("duplicate attribute `{a}`")));
            }
        }
        let mut roles = vec![AttributeRole::Other; attributes.len()];
        for name in qi {
            let name = name.as_ref();
            let &i = positions
                .get(name)
                .ok_or_else(|| Error::UnknownAttribute(name.to_owned()))?;
            roles[i] = AttributeRole::QuasiIdentifier;
        }
        for name in sensitive {
            let name = name.as_ref();
            let &i = positions
                .get(name)
                .ok_or_else(|| Error::UnknownAttribute(name.to_owned()))?;
            if roles[i] == AttributeRole::QuasiIdentifier {
                return Err(Error::Schema(format!(
                    "attribute `{name}` is both quasi-identifier and sensitive"
                )));
            }
            roles[i] = AttributeRole::Sensitive;
        }
        let qi = (0..attributes.len())
            .filter(|&i| roles[i] == AttributeRole::QuasiIdentifier)
            .collect();
        Ok(Schema { attributes, roles, qi, positions })
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn arity(&self) -> usize {
        self.attributes.len()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.positions.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<usize> {
        self.position(name)
            .ok_or_else(|| Error::UnknownAttribute(name.to_owned()))
    }

    pub fn role(&self, index: usize) -> AttributeRole {
        self.roles[index]
    }

    /// Positions of the quasi-identifier attributes, in schema order.
    pub fn qi_positions(&self) -> &[usize] {
        &self.qi
    }

    pub fn qi_names(&self) -> impl Iterator<Item = &str> {
        self.qi.iter().map(|&i| self.attributes[i].as_str())
    }

    pub fn sensitive_names(&self) -> impl Iterator<Item = &str> {
        self.attributes
            .iter()
            .zip(&self.roles)
            .filter(|(_, r)| **r == AttributeRole::Sensitive)
            .map(|(a, _)| a.as_str())
    }

    pub fn is_qi(&self, index: usize) -> bool {
        self.roles[index] == AttributeRole::QuasiIdentifier
    }
}

/// An ordered bag of tuples over a shared schema.
#[derive(Clone, Debug)]
pub struct Relation {
    schema: Arc<Schema>,
    ids: Vec<TupleId>,
    rows: Vec<Box<[CellValue]>>,
    index: HashMap<TupleId, usize>,
}

impl PartialEq for Relation {
    fn eq(&self, other: &Self) -> bool {
        self.schema == other.schema && self.ids == other.ids && self.rows == other.rows
    }
}

impl Relation {
    pub fn new(schema: Arc<Schema>, tuples: Vec<(TupleId, Vec<CellValue>)>) -> Result<Self> {
        let mut ids = Vec::with_capacity(tuples.len());
        let mut rows = Vec::with_capacity(tuples.len());
        let mut index = HashMap::with_capacity(tuples.len());
        for (id, cells) in tuples {
            if cells.len() != schema.arity() {
                return Err(Error::Structure(format!(
                    "tuple {id} has {} cells, schema has {} attributes",
                    cells.len(),
                    schema.arity()
                )));
            }
            if let Some(pos) = cells
                .iter()
                .enumerate()
                .position(|(i, c)| c.is_suppressed() && !schema.is_qi(i))
            {
                return Err(Error::Structure(format!(
                    "tuple {id} has a suppressed cell in non-QI attribute `{}`",
                    schema.attributes()[pos]
                )));
            }
            if index.insert(id, rows.len()).is_some() {
                return Err(Error::Structure(format!("duplicate tuple id {id}")));
            }
            ids.push(id);
            rows.push(cells.into_boxed_slice());
        }
        Ok(Relation { schema, ids, rows, index })
    }

    /// Builds a relation from string rows, assigning ids `0..n` in order.
    pub fn from_rows<S: AsRef<str>>(schema: Arc<Schema>, rows: &[Vec<S>]) -> Result<Self> {
        let tuples = rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let cells = row.iter().map(|c| CellValue::value(c.as_ref())).collect();
                (TupleId(i as u32), cells)
            })
            .collect();
        Relation::new(schema, tuples)
    }

    pub fn empty(schema: Arc<Schema>) -> Self {
        Relation { schema, ids: Vec::new(), rows: Vec::new(), index: HashMap::new() }
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn schema_arc(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[TupleId] {
        &self.ids
    }

    pub fn contains(&self, id: TupleId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn row(&self, id: TupleId) -> Option<&[CellValue]> {
        self.index.get(&id).map(|&i| &*self.rows[i])
    }

    pub(crate) fn row_unchecked(&self, id: TupleId) -> &[CellValue] {
        &self.rows[self.index[&id]]
    }

    pub fn tuples(&self) -> impl Iterator<Item = (TupleId, &[CellValue])> {
        self.ids.iter().copied().zip(self.rows.iter().map(|r| &**r))
    }

    /// The QI projection of a tuple, in schema order.
    pub fn qi_key(&self, id: TupleId) -> Vec<CellValue> {
        let row = self.row_unchecked(id);
        self.schema.qi_positions().iter().map(|&i| row[i].clone()).collect()
    }

    /// Sub-relation holding `keep` in this relation's order.
    pub fn restrict(&self, keep: &HashSet<TupleId>) -> Relation {
        let tuples = self
            .tuples()
            .filter(|(id, _)| keep.contains(id))
            .map(|(id, row)| (id, row.to_vec()))
            .collect();
        Relation::new(self.schema.clone(), tuples).expect("restriction of a valid relation")
    }

    /// Disjoint union, ordered by tuple id.
    pub fn union(&self, other: &Relation) -> Result<Relation> {
        if self.schema != other.schema {
            return Err(Error::Structure("union of relations with different schemas".into()));
        }
        let mut tuples: Vec<(TupleId, Vec<CellValue>)> = self
            .tuples()
            .chain(other.tuples())
            .map(|(id, row)| (id, row.to_vec()))
            .collect();
        tuples.sort_by_key(|(id, _)| *id);
        Relation::new(self.schema.clone(), tuples)
    }

    /// Returns a copy with `cells` of the given tuples replaced by `Suppressed`.
    pub fn with_suppressed(&self, cells: &[(TupleId, usize)]) -> Result<Relation> {
        let mut out = self.clone();
        for &(id, attr) in cells {
            if !self.schema.is_qi(attr) {
                return Err(Error::Structure(format!(
                    "cannot suppress non-QI attribute `{}`",
                    self.schema.attributes()[attr]
                )));
            }
            let &i = self
                .index
                .get(&id)
                .ok_or_else(|| Error::Structure(format!("unknown tuple {id}")))?;
            out.rows[i][attr] = CellValue::Suppressed;
        }
        Ok(out)
    }
}

/// A set of pairwise-disjoint, non-empty clusters of tuple ids.
///
/// Stored canonically (each cluster sorted, clusters ordered by their
/// smallest member) so that structural equality is set-of-sets equality.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clustering {
    clusters: Vec<Vec<TupleId>>,
}

impl Clustering {
    pub fn new(clusters: Vec<Vec<TupleId>>) -> Result<Self> {
        let mut seen = HashSet::new();
        for c in &clusters {
            if c.is_empty() {
                return Err(Error::Structure("empty cluster".into()));
            }
            for &id in c {
                if !seen.insert(id) {
                    return Err(Error::OverlappingClusters(id));
                }
            }
        }
        Ok(Self::canonical(clusters))
    }

    /// Canonicalizes clusters already known to be disjoint and non-empty.
    pub(crate) fn canonical(mut clusters: Vec<Vec<TupleId>>) -> Self {
        for c in &mut clusters {
            c.sort_unstable();
        }
        clusters.sort_unstable_by_key(|c| c[0]);
        Clustering { clusters }
    }

    pub fn empty() -> Self {
        Clustering::default()
    }

    pub fn clusters(&self) -> &[Vec<TupleId>] {
        &self.clusters
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn covered(&self) -> impl Iterator<Item = TupleId> + '_ {
        self.clusters.iter().flatten().copied()
    }

    pub fn covered_set(&self) -> HashSet<TupleId> {
        self.covered().collect()
    }

    pub fn covered_count(&self) -> usize {
        self.clusters.iter().map(Vec::len).sum()
    }

    pub fn min_cluster_size(&self) -> Option<usize> {
        self.clusters.iter().map(Vec::len).min()
    }

    /// Checks every member occurs in `r`.
    pub fn check_over(&self, r: &Relation) -> Result<()> {
        match self.covered().find(|id| !r.contains(*id)) {
            Some(id) => Err(Error::Structure(format!("clustering references unknown tuple {id}"))),
            None => Ok(()),
        }
    }
}

impl fmt::Display for Clustering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, c) in self.clusters.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str("{")?;
            for (j, id) in c.iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{id}")?;
            }
            f.write_str("}")?;
        }
        f.write_str("}")
    }
}

/// Partitions tuple ids by equality on all QI cells, groups ordered by first
/// appearance.
pub fn qi_groups(r: &Relation) -> Vec<Vec<TupleId>> {
    let mut slot: HashMap<Vec<&CellValue>, usize> = HashMap::new();
    let mut groups: Vec<Vec<TupleId>> = Vec::new();
    let qi = r.schema().qi_positions();
    for (id, row) in r.tuples() {
        let key: Vec<&CellValue> = qi.iter().map(|&i| &row[i]).collect();
        let next = groups.len();
        let g = *slot.entry(key).or_insert(next);
        if g == next {
            groups.push(Vec::new());
        }
        groups[g].push(id);
    }
    groups
}

pub fn is_k_anonymous(r: &Relation, k: usize) -> bool {
    qi_groups(r).iter().all(|g| g.len() >= k)
}

/// For each QI attribute position, whether all tuples of `cluster` agree.
pub(crate) fn cluster_agreement(r: &Relation, cluster: &[TupleId]) -> Vec<bool> {
    let arity = r.schema().arity();
    let mut agree = vec![true; arity];
    let Some((&first, rest)) = cluster.split_first() else {
        return agree;
    };
    let head = r.row_unchecked(first);
    for &id in rest {
        let row = r.row_unchecked(id);
        for &a in r.schema().qi_positions() {
            if agree[a] && row[a] != head[a] {
                agree[a] = false;
            }
        }
    }
    agree
}

/// Applies cluster-wise suppression.
///
/// The output holds exactly the tuples covered by `s`, in `r`'s order. A QI
/// cell is replaced by `Suppressed` iff its cluster carries more than one
/// distinct value for that attribute; other cells are left untouched.
pub fn suppress(r: &Relation, s: &Clustering) -> Result<Relation> {
    s.check_over(r)?;
    let mut replaced: HashMap<TupleId, Vec<CellValue>> = HashMap::with_capacity(s.covered_count());
    for cluster in s.clusters() {
        let agree = cluster_agreement(r, cluster);
        for &id in cluster {
            let row = r
                .row_unchecked(id)
                .iter()
                .enumerate()
                .map(|(a, c)| {
                    if r.schema().is_qi(a) && !agree[a] {
                        CellValue::Suppressed
                    } else {
                        c.clone()
                    }
                })
                .collect();
            if replaced.insert(id, row).is_some() {
                return Err(Error::OverlappingClusters(id));
            }
        }
    }
    let tuples = r
        .ids()
        .iter()
        .filter_map(|id| replaced.remove(id).map(|row| (*id, row)))
        .collect();
    Relation::new(r.schema_arc().clone(), tuples)
}

/// Number of suppressed cells.
pub fn information_loss(r: &Relation) -> u64 {
    r.tuples()
        .map(|(_, row)| row.iter().filter(|c| c.is_suppressed()).count() as u64)
        .sum()
}

/// Whether `anon` is obtainable from `original` by suppressing QI cells.
pub fn is_suppression_of(original: &Relation, anon: &Relation) -> Result<bool> {
    if original.schema() != anon.schema() {
        return Err(Error::Structure("schemas differ".into()));
    }
    if original.len() != anon.len() || anon.ids().iter().any(|id| !original.contains(*id)) {
        return Err(Error::Structure("tuple ids differ".into()));
    }
    let schema = original.schema();
    Ok(anon.tuples().all(|(id, row)| {
        let orig = original.row_unchecked(id);
        row.iter()
            .zip(orig)
            .enumerate()
            .all(|(a, (new, old))| new == old || (new.is_suppressed() && schema.is_qi(a)))
    }))
}
