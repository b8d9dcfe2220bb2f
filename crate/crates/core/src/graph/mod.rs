//! Weighted multigraphs with fixed edge orientation.
//!
//! A [`Graph`] is immutable once built. Edge `i` is oriented `tail -> head`,
//! which fixes the sign convention of the incidence matrix `B`:
//! `(Bx)_e = x_tail - x_head`.

mod generators;
mod io;

use std::collections::VecDeque;
use std::ops::{Deref, DerefMut};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use generators::{generate_family, Family};
pub use io::{parse_edge_list, read_graph, write_edge_list, write_graph};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub conductance: f64,
}

impl Edge {
    pub fn new(tail: usize, head: usize, conductance: f64) -> Self {
        Edge { tail, head, conductance }
    }

    /// The endpoint opposite to `v`, if `v` is an endpoint.
    pub fn other(&self, v: usize) -> Option<usize> {
        if v == self.tail {
            Some(self.head)
        } else if v == self.head {
            Some(self.tail)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
}

impl Graph {
    /// Builds a graph on `n` vertices. Parallel edges are kept as distinct
    /// instances; self-loops and non-positive conductances are rejected.
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self> {
        for (index, e) in edges.iter().enumerate() {
            for vertex in [e.tail, e.head] {
                if vertex >= n {
                    return Err(Error::VertexOutOfRange { vertex, n });
                }
            }
            if e.tail == e.head {
                return Err(Error::SelfLoop { index, tail: e.tail, head: e.head });
            }
            if !(e.conductance > 0.0 && e.conductance.is_finite()) {
                return Err(Error::BadConductance { index, conductance: e.conductance });
            }
        }
        Ok(Graph { n, edges })
    }

    /// Builds a graph from `(tail, head, conductance)` triples; the vertex
    /// count is the largest id plus one.
    pub fn from_edge_list<I>(edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let edges: Vec<Edge> = edges.into_iter().map(|(t, h, c)| Edge::new(t, h, c)).collect();
        let n = edges.iter().map(|e| e.tail.max(e.head) + 1).max().unwrap_or(0);
        Graph::new(n, edges)
    }

    /// Unit-conductance graph from vertex pairs.
    pub fn unweighted<I>(n: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Graph::new(n, pairs.into_iter().map(|(t, h)| Edge::new(t, h, 1.0)).collect())
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn conductances(&self) -> impl Iterator<Item = f64> + '_ {
        self.edges.iter().map(|e| e.conductance)
    }

    pub fn is_unweighted(&self) -> bool {
        self.edges.iter().all(|e| e.conductance == 1.0)
    }

    pub(crate) fn require_unweighted(&self) -> Result<()> {
        if self.is_unweighted() {
            Ok(())
        } else {
            Err(Error::Weighted)
        }
    }

    pub(crate) fn check_vertex(&self, vertex: usize) -> Result<()> {
        if vertex < self.n {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange { vertex, n: self.n })
        }
    }

    /// Incidence lists: for each vertex, the indices of its incident edges.
    pub fn incident_edges(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for (i, e) in self.edges.iter().enumerate() {
            adj[e.tail].push(i);
            adj[e.head].push(i);
        }
        adj
    }

    /// Sum of conductances of edges incident with each vertex.
    pub fn weighted_degrees(&self) -> Vec<f64> {
        let mut deg = vec![0.0; self.n];
        for e in &self.edges {
            deg[e.tail] += e.conductance;
            deg[e.head] += e.conductance;
        }
        deg
    }

    /// `Bx`: the potential difference `x_tail - x_head` across each edge.
    pub fn incidence_apply(&self, x: &VertexVector) -> Result<EdgeVector> {
        check_len(self.n, x.len())?;
        let values = self.edges.iter().map(|e| x[e.tail] - x[e.head]).collect();
        Ok(EdgeVector::new(values, EdgeRole::PotentialDifference))
    }

    /// `Bᵀf`: net flow out of each vertex.
    pub fn incidence_transpose_apply(&self, f: &EdgeVector) -> Result<VertexVector> {
        check_len(self.edges.len(), f.len())?;
        let mut out = vec![0.0; self.n];
        for (e, &value) in self.edges.iter().zip(f.iter()) {
            out[e.tail] += value;
            out[e.head] -= value;
        }
        Ok(VertexVector(out))
    }

    /// Dense `BᵀCB`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let mut l = DMatrix::zeros(self.n, self.n);
        for e in &self.edges {
            let (a, b, c) = (e.tail, e.head, e.conductance);
            l[(a, a)] += c;
            l[(b, b)] += c;
            l[(a, b)] -= c;
            l[(b, a)] -= c;
        }
        l
    }

    /// Hop distances from `source` to every vertex; `None` if unreachable.
    pub fn bfs_distances(&self, source: usize) -> Result<Vec<Option<usize>>> {
        self.check_vertex(source)?;
        let adj = self.incident_edges();
        let mut dist = vec![None; self.n];
        let mut queue = VecDeque::new();
        dist[source] = Some(0);
        queue.push_back(source);
        while let Some(x) = queue.pop_front() {
            let d = dist[x].expect("queued vertices have distances");
            for &ei in &adj[x] {
                let y = self.edges[ei].other(x).expect("incident edge");
                if dist[y].is_none() {
                    dist[y] = Some(d + 1);
                    queue.push_back(y);
                }
            }
        }
        Ok(dist)
    }

    /// Unweighted shortest-path distance; `None` when `v` is unreachable from `u`.
    pub fn bfs_distance(&self, u: usize, v: usize) -> Result<Option<usize>> {
        self.check_vertex(v)?;
        Ok(self.bfs_distances(u)?[v])
    }

    pub fn is_connected(&self) -> bool {
        if self.n <= 1 {
            return true;
        }
        self.bfs_distances(0)
            .map(|d| d.iter().all(Option::is_some))
            .unwrap_or(false)
    }

    pub(crate) fn require_connected(&self) -> Result<()> {
        if self.is_connected() {
            Ok(())
        } else {
            Err(Error::Disconnected)
        }
    }
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}

/// What a per-edge vector represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeRole {
    /// Nonnegative test weights `w`.
    Weights,
    Flow,
    PotentialDifference,
}

/// One real value per edge, indexed like [`Graph::edges`].
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeVector {
    values: Vec<f64>,
    role: EdgeRole,
}

impl EdgeVector {
    pub fn new(values: Vec<f64>, role: EdgeRole) -> Self {
        EdgeVector { values, role }
    }

    /// Nonnegative weights; rejects negative or non-finite entries.
    pub fn weights(values: Vec<f64>) -> Result<Self> {
        if let Some((i, w)) = values.iter().enumerate().find(|(_, w)| !(**w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidArgument(format!("weight {i} is {w}; weights must be nonnegative")));
        }
        Ok(EdgeVector::new(values, EdgeRole::Weights))
    }

    pub fn ones(m: usize) -> Self {
        EdgeVector::new(vec![1.0; m], EdgeRole::Weights)
    }

    pub fn role(&self) -> EdgeRole {
        self.role
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.values
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }

    pub fn norm_squared(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// Checks length against `g` and, for weights, nonnegativity.
    pub(crate) fn check_weights_for(&self, g: &Graph) -> Result<()> {
        check_len(g.n_edges(), self.values.len())?;
        if let Some((i, w)) = self.values.iter().enumerate().find(|(_, w)| **w < 0.0 || w.is_nan()) {
            return Err(Error::InvalidArgument(format!("weight {i} is {w}; weights must be nonnegative")));
        }
        Ok(())
    }
}

impl Deref for EdgeVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.values
    }
}

/// One real value per vertex.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VertexVector(pub Vec<f64>);

impl VertexVector {
    pub fn zeros(n: usize) -> Self {
        VertexVector(vec![0.0; n])
    }

    /// `b_v`.
    pub fn indicator(n: usize, v: usize) -> Self {
        let mut x = Self::zeros(n);
        x.0[v] = 1.0;
        x
    }

    /// `b_uv = b_u - b_v`.
    pub fn dipole(n: usize, u: usize, v: usize) -> Self {
        let mut x = Self::zeros(n);
        x.0[u] += 1.0;
        x.0[v] -= 1.0;
        x
    }

    pub fn dot(&self, other: &VertexVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }
}

impl Deref for VertexVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for VertexVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}
