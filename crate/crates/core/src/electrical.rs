//! Electrical flows, effective resistances, flow stretch `Δ`, and the transfer
//! impedance matrix `Π = C^{1/2} B L⁺ Bᵀ C^{1/2}`.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{EdgeRole, EdgeVector, Graph, VertexVector};
use crate::laplacian::{default_max_iter, spectral_norm_nonneg, LaplacianSystem, PowerEstimate, POWER_TOL};

/// Largest edge count for which `Π` is materialized.
pub const DENSE_EDGE_CAP: usize = 4000;

/// Entries of `Π` below this magnitude count as zero in `Π̄`.
pub const ZERO_TOL: f64 = 1e-12;

/// A connected graph together with its factored Laplacian.
#[derive(Debug, Clone)]
pub struct Network<'g> {
    graph: &'g Graph,
    system: Arc<LaplacianSystem>,
}

impl<'g> Network<'g> {
    pub fn new(graph: &'g Graph) -> Result<Self> {
        let system = Arc::new(LaplacianSystem::from_graph(graph)?);
        Ok(Network { graph, system })
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn system(&self) -> &LaplacianSystem {
        &self.system
    }

    fn check_pair(&self, u: usize, v: usize) -> Result<()> {
        self.graph.check_vertex(u)?;
        self.graph.check_vertex(v)?;
        if u == v {
            return Err(Error::InvalidArgument(format!("flow endpoints must differ (both are {u})")));
        }
        Ok(())
    }

    /// Vertex potentials `L⁺ b_uv`.
    pub fn potentials(&self, u: usize, v: usize) -> Result<VertexVector> {
        self.graph.check_vertex(u)?;
        self.graph.check_vertex(v)?;
        self.system.pinv_apply(&VertexVector::dipole(self.graph.n_vertices(), u, v))
    }

    /// `f = C B L⁺ b_uv`.
    pub fn unit_flow(&self, u: usize, v: usize) -> Result<EdgeVector> {
        self.check_pair(u, v)?;
        let phi = self.potentials(u, v)?;
        let values = self
            .graph
            .edges()
            .iter()
            .map(|e| e.conductance * (phi[e.tail] - phi[e.head]))
            .collect();
        Ok(EdgeVector::new(values, EdgeRole::Flow))
    }

    pub fn effective_resistance(&self, u: usize, v: usize) -> Result<f64> {
        self.check_pair(u, v)?;
        let phi = self.potentials(u, v)?;
        Ok(phi[u] - phi[v])
    }

    /// `‖f_uv‖₁ / dist(u, v)` on an unweighted graph.
    pub fn delta(&self, u: usize, v: usize) -> Result<f64> {
        self.graph.require_unweighted()?;
        let dist = self.graph.bfs_distance(u, v)?.ok_or(Error::Disconnected)?;
        Ok(self.unit_flow(u, v)?.l1_norm() / dist as f64)
    }

    pub fn delta_edge(&self, e: usize) -> Result<f64> {
        self.graph.require_unweighted()?;
        let edge = self.edge_checked(e)?;
        Ok(self.unit_flow(edge.tail, edge.head)?.l1_norm())
    }

    fn edge_checked(&self, e: usize) -> Result<crate::graph::Edge> {
        self.graph
            .edges()
            .get(e)
            .copied()
            .ok_or_else(|| Error::InvalidArgument(format!("edge {e} out of range")))
    }

    /// Per-edge `ℓ1` norms and effective resistances; `Δ` is filled in only
    /// for unweighted graphs.
    pub fn flow_summary(&self) -> Result<FlowSummary> {
        let unweighted = self.graph.is_unweighted();
        let per_edge: Vec<EdgeFlowStats> = self
            .graph
            .edges()
            .par_iter()
            .map(|e| {
                let phi = self.system.solve(&VertexVector::dipole(self.graph.n_vertices(), e.tail, e.head));
                let l1: f64 = self
                    .graph
                    .edges()
                    .iter()
                    .map(|g| (g.conductance * (phi[g.tail] - phi[g.head])).abs())
                    .sum();
                EdgeFlowStats {
                    tail: e.tail,
                    head: e.head,
                    delta: unweighted.then_some(l1),
                    l1,
                    reff: phi[e.tail] - phi[e.head],
                }
            })
            .collect();
        Ok(FlowSummary::from_edges(per_edge))
    }

    pub fn delta_summary(&self) -> Result<FlowSummary> {
        self.graph.require_unweighted()?;
        self.flow_summary()
    }

    pub fn transfer_impedance(&self, mode: ImpedanceMode) -> Result<TransferImpedance<'g>> {
        TransferImpedance::new(self.graph, Arc::clone(&self.system), mode)
    }
}

pub fn unit_flow(g: &Graph, u: usize, v: usize) -> Result<EdgeVector> {
    Network::new(g)?.unit_flow(u, v)
}

pub fn effective_resistance(g: &Graph, u: usize, v: usize) -> Result<f64> {
    Network::new(g)?.effective_resistance(u, v)
}

pub fn delta_edge(g: &Graph, e: usize) -> Result<f64> {
    g.require_unweighted()?;
    Network::new(g)?.delta_edge(e)
}

pub fn delta_summary(g: &Graph) -> Result<FlowSummary> {
    g.require_unweighted()?;
    Network::new(g)?.delta_summary()
}

pub fn transfer_impedance(g: &Graph, mode: ImpedanceMode) -> Result<TransferImpedance<'_>> {
    Network::new(g)?.transfer_impedance(mode)
}

/// `‖Π̄‖` by power iteration.
pub fn abs_impedance_spectral_norm(g: &Graph) -> Result<f64> {
    Ok(transfer_impedance(g, ImpedanceMode::Auto)?.abs_spectral_norm()?.value)
}

/// `‖Π̄‖₁→₁`, the largest column sum of `Π̄`.
pub fn abs_impedance_max_colsum(g: &Graph) -> Result<f64> {
    Ok(transfer_impedance(g, ImpedanceMode::Auto)?.max_abs_colsum())
}

/// `wᵀ Π̄ w` for nonnegative `w`.
pub fn quadratic_form_abs(g: &Graph, w: &EdgeVector) -> Result<f64> {
    w.check_weights_for(g)?;
    transfer_impedance(g, ImpedanceMode::Auto)?.quadratic_form_abs(w)
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeFlowStats {
    pub tail: usize,
    pub head: usize,
    pub delta: Option<f64>,
    pub l1: f64,
    pub reff: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowSummary {
    pub per_edge: Vec<EdgeFlowStats>,
    pub sum_delta: Option<f64>,
    pub mean_delta: Option<f64>,
    pub max_delta: Option<f64>,
}

impl FlowSummary {
    fn from_edges(per_edge: Vec<EdgeFlowStats>) -> Self {
        let deltas: Option<Vec<f64>> = per_edge.iter().map(|s| s.delta).collect();
        let (sum_delta, mean_delta, max_delta) = match deltas {
            Some(d) if !d.is_empty() => {
                let sum: f64 = d.iter().sum();
                (Some(sum), Some(sum / d.len() as f64), Some(d.iter().copied().fold(f64::MIN, f64::max)))
            }
            _ => (None, None, None),
        };
        FlowSummary { per_edge, sum_delta, mean_delta, max_delta }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImpedanceMode {
    /// Store all of `Π`.
    Dense,
    /// Recompute each column with one Laplacian solve when needed.
    Streaming,
    /// Dense when `m` is within [`DENSE_EDGE_CAP`].
    Auto,
}

/// The transfer impedance matrix of a connected graph.
#[derive(Debug, Clone)]
pub struct TransferImpedance<'g> {
    graph: &'g Graph,
    system: Arc<LaplacianSystem>,
    sqrt_c: Vec<f64>,
    dense: Option<DMatrix<f64>>,
}

impl<'g> TransferImpedance<'g> {
    fn new(graph: &'g Graph, system: Arc<LaplacianSystem>, mode: ImpedanceMode) -> Result<Self> {
        let m = graph.n_edges();
        let dense = match mode {
            ImpedanceMode::Dense if m > DENSE_EDGE_CAP => {
                return Err(Error::DenseCapExceeded { m, cap: DENSE_EDGE_CAP })
            }
            ImpedanceMode::Dense => true,
            ImpedanceMode::Auto => m <= DENSE_EDGE_CAP,
            ImpedanceMode::Streaming => false,
        };
        let sqrt_c: Vec<f64> = graph.conductances().map(f64::sqrt).collect();
        let mut imp = TransferImpedance { graph, system, sqrt_c, dense: None };
        if dense {
            imp.dense = Some(imp.materialize());
        }
        Ok(imp)
    }

    fn materialize(&self) -> DMatrix<f64> {
        let edges = self.graph.edges();
        let m = edges.len();
        let k = self.system.pinv_dense();
        // Columns of L⁺ Bᵀ C^{1/2}.
        let y = DMatrix::from_fn(k.nrows(), m, |i, f| self.sqrt_c[f] * (k[(i, edges[f].tail)] - k[(i, edges[f].head)]));
        DMatrix::from_fn(m, m, |e, f| self.sqrt_c[e] * (y[(edges[e].tail, f)] - y[(edges[e].head, f)]))
    }

    pub fn mode(&self) -> ImpedanceMode {
        if self.dense.is_some() {
            ImpedanceMode::Dense
        } else {
            ImpedanceMode::Streaming
        }
    }

    pub fn n_edges(&self) -> usize {
        self.sqrt_c.len()
    }

    pub fn dense(&self) -> Option<&DMatrix<f64>> {
        self.dense.as_ref()
    }

    /// `Π 1_f`: the scaled potential drops when unit current crosses edge `f`.
    pub fn column(&self, f: usize) -> Vec<f64> {
        if let Some(d) = &self.dense {
            return d.column(f).iter().copied().collect();
        }
        let edges = self.graph.edges();
        let n = self.graph.n_vertices();
        let mut b = vec![0.0; n];
        b[edges[f].tail] += self.sqrt_c[f];
        b[edges[f].head] -= self.sqrt_c[f];
        let x = self.system.solve(&b);
        edges
            .iter()
            .zip(&self.sqrt_c)
            .map(|(e, s)| s * (x[e.tail] - x[e.head]))
            .collect()
    }

    /// Column `f` of `Π̄`, with near-zero entries flushed to zero.
    pub fn abs_column(&self, f: usize) -> Vec<f64> {
        let mut col = self.column(f);
        col.iter_mut().for_each(|v| *v = flush_abs(*v));
        col
    }

    /// A dense copy of `Π`, regardless of mode.
    pub fn to_dense(&self) -> DMatrix<f64> {
        match &self.dense {
            Some(d) => d.clone(),
            None => {
                let m = self.n_edges();
                let cols: Vec<Vec<f64>> = (0..m).into_par_iter().map(|f| self.column(f)).collect();
                DMatrix::from_fn(m, m, |e, f| cols[f][e])
            }
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        match &self.dense {
            Some(d) => d.diagonal().iter().copied().collect(),
            None => (0..self.n_edges()).into_par_iter().map(|f| self.column(f)[f]).collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    /// `max |(Π² - Π)_{ef}|`.
    pub fn projection_defect(&self) -> f64 {
        let p = self.to_dense();
        let p2 = &p * &p;
        (p2 - p).amax()
    }

    /// `y = Π̄ x`.
    pub fn abs_matvec(&self, x: &[f64], y: &mut [f64]) {
        let m = self.n_edges();
        match &self.dense {
            Some(d) => {
                let rows: Vec<f64> = (0..m)
                    .into_par_iter()
                    .map(|e| d.row(e).iter().zip(x).map(|(p, xf)| flush_abs(*p) * xf).sum())
                    .collect();
                y.copy_from_slice(&rows);
            }
            None => {
                // Π̄ is symmetric, so row e of Π̄ x is column e dotted with x.
                let rows: Vec<f64> = (0..m)
                    .into_par_iter()
                    .map(|e| self.abs_column(e).iter().zip(x).map(|(p, xf)| p * xf).sum())
                    .collect();
                y.copy_from_slice(&rows);
            }
        }
    }

    pub fn abs_spectral_norm(&self) -> Result<PowerEstimate> {
        let m = self.n_edges();
        spectral_norm_nonneg(|x, y| self.abs_matvec(x, y), m, POWER_TOL, default_max_iter(m))
    }

    /// Column sums of `Π̄`; on an unweighted graph entry `f` is `Δ(f)`.
    pub fn abs_colsums(&self) -> Vec<f64> {
        (0..self.n_edges())
            .into_par_iter()
            .map(|f| match &self.dense {
                Some(d) => d.column(f).iter().map(|v| flush_abs(*v)).sum(),
                None => self.abs_column(f).iter().sum(),
            })
            .collect()
    }

    pub fn max_abs_colsum(&self) -> f64 {
        self.abs_colsums().into_iter().fold(0.0, f64::max)
    }

    /// `wᵀ Π̄ w`.
    pub fn quadratic_form_abs(&self, w: &EdgeVector) -> Result<f64> {
        w.check_weights_for(self.graph)?;
        let mut y = vec![0.0; w.len()];
        self.abs_matvec(w, &mut y);
        Ok(w.iter().zip(&y).map(|(a, b)| a * b).sum())
    }
}

fn flush_abs(v: f64) -> f64 {
    if v.abs() < ZERO_TOL {
        0.0
    } else {
        v.abs()
    }
}

/// Graph-level numbers reported by the `analyze` command.
#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub n: usize,
    pub m: usize,
    pub trace_pi: f64,
    pub spectral_norm_abs_pi: f64,
    pub max_colsum_abs_pi: f64,
    pub sum_delta: Option<f64>,
    pub mean_delta: Option<f64>,
    pub max_delta: Option<f64>,
    pub per_edge: Vec<EdgeFlowStats>,
}

pub fn analyze(g: &Graph, mode: ImpedanceMode) -> Result<AnalysisReport> {
    let network = Network::new(g)?;
    let pi = network.transfer_impedance(mode)?;
    let flows = network.flow_summary()?;
    Ok(AnalysisReport {
        n: g.n_vertices(),
        m: g.n_edges(),
        trace_pi: pi.trace(),
        spectral_norm_abs_pi: pi.abs_spectral_norm()?.value,
        max_colsum_abs_pi: pi.max_abs_colsum(),
        sum_delta: flows.sum_delta,
        mean_delta: flows.mean_delta,
        max_delta: flows.max_delta,
        per_edge: flows.per_edge,
    })
}
