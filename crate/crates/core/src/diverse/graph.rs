use crate::constraints::{relevant_tuples, BoundTarget, ConstraintSet, DiversityConstraint};
use crate::error::Result;
use crate::model::{Relation, TupleId};

#[derive(Clone, Debug)]
pub struct Vertex {
    pub constraint: DiversityConstraint,
    /// Relevant tuple ids, sorted.
    pub relevant: Vec<TupleId>,
    pub(crate) bound: BoundTarget,
}

/// One vertex per constraint; an edge joins two constraints whose relevant
/// tuple sets intersect.
#[derive(Clone, Debug)]
pub struct ConstraintGraph {
    vertices: Vec<Vertex>,
    adjacency: Vec<Vec<usize>>,
}

impl ConstraintGraph {
    pub fn build(r: &Relation, sigma_set: &ConstraintSet) -> Result<Self> {
        let mut vertices = Vec::with_capacity(sigma_set.len());
        for c in sigma_set {
            let mut relevant = relevant_tuples(r, c)?;
            relevant.sort_unstable();
            let bound = c.target.bind(r.schema())?;
            vertices.push(Vertex { constraint: c.clone(), relevant, bound });
        }
        let n = vertices.len();
        let mut adjacency = vec![Vec::new(); n];
        for i in 0..n {
            for j in i + 1..n {
                if sorted_intersect(&vertices[i].relevant, &vertices[j].relevant) {
                    adjacency[i].push(j);
                    adjacency[j].push(i);
                }
            }
        }
        Ok(ConstraintGraph { vertices, adjacency })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> &Vertex {
        &self.vertices[v]
    }

    /// Adjacent vertices in ascending order.
    pub fn neighbours(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Edges as `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, adj) in self.adjacency.iter().enumerate() {
            out.extend(adj.iter().filter(|&&j| j > i).map(|&j| (i, j)));
        }
        out
    }

    /// Sorted union of the relevant sets of `v`'s neighbours.
    pub(crate) fn neighbour_tuples(&self, v: usize) -> Vec<TupleId> {
        let mut out: Vec<TupleId> = self.adjacency[v]
            .iter()
            .flat_map(|&u| self.vertices[u].relevant.iter().copied())
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

pub fn build_graph(r: &Relation, sigma_set: &ConstraintSet) -> Result<ConstraintGraph> {
    ConstraintGraph::build(r, sigma_set)
}

fn sorted_intersect(a: &[TupleId], b: &[TupleId]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}
