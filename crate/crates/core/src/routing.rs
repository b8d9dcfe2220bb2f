//! Oblivious routing along unit electrical flows.
//!
//! Every demand pair `(s, t)` is routed on its own electrical flow `f_st`; the
//! routed flow is the signed sum of the scaled `f_st` and its congestion on
//! edge `e` is `|F_e| / c_e`. On an unweighted graph the worst-case ratio to
//! the optimal multicommodity congestion equals `‖Π̄‖₁→₁ = max_e Δ(e)`.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::electrical::{ImpedanceMode, Network};
use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Demand {
    pub source: usize,
    pub sink: usize,
    pub amount: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DemandSet {
    pairs: Vec<Demand>,
}

impl DemandSet {
    pub fn new(pairs: Vec<Demand>) -> Result<Self> {
        for (i, d) in pairs.iter().enumerate() {
            if d.source == d.sink {
                return Err(Error::InvalidArgument(format!("demand {i} has source equal to sink ({})", d.source)));
            }
            if !(d.amount > 0.0 && d.amount.is_finite()) {
                return Err(Error::InvalidArgument(format!("demand {i} has non-positive amount {}", d.amount)));
            }
        }
        Ok(DemandSet { pairs })
    }

    pub fn single(source: usize, sink: usize, amount: f64) -> Result<Self> {
        Self::new(vec![Demand { source, sink, amount }])
    }

    /// Parses `s t amount` lines; `#` lines and blank lines are skipped.
    pub fn parse(text: &str, origin: impl AsRef<Path>) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse { path: origin.as_ref().to_owned(), line, message };
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [s, t, a] = fields[..] else {
                return Err(err(i + 1, format!("expected `source sink amount`, got `{line}`")));
            };
            let source = s.parse().map_err(|_| err(i + 1, format!("bad vertex id `{s}`")))?;
            let sink = t.parse().map_err(|_| err(i + 1, format!("bad vertex id `{t}`")))?;
            let amount = a.parse().map_err(|_| err(i + 1, format!("bad amount `{a}`")))?;
            pairs.push(Demand { source, sink, amount });
        }
        Self::new(pairs)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_owned(), source })?;
        Self::parse(&text, path)
    }

    pub fn pairs(&self) -> &[Demand] {
        &self.pairs
    }

    pub fn extend(&mut self, other: &DemandSet) {
        self.pairs.extend_from_slice(&other.pairs);
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeRouting {
    pub tail: usize,
    pub head: usize,
    pub flow: f64,
    pub congestion: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RoutingReport {
    pub max_congestion: f64,
    /// `max_e Δ(e)`; absent on weighted graphs, where no such identity holds.
    pub competitive_ratio_bound: Option<f64>,
    pub per_edge: Vec<EdgeRouting>,
}

impl RoutingReport {
    pub fn flows(&self) -> Vec<f64> {
        self.per_edge.iter().map(|e| e.flow).collect()
    }

    pub fn total_l1(&self) -> f64 {
        self.per_edge.iter().map(|e| e.flow.abs()).sum()
    }
}

pub fn route_demands(g: &Graph, demands: &DemandSet) -> Result<RoutingReport> {
    let network = Network::new(g)?;
    let flows = superposed_flow(&network, demands)?;
    let per_edge: Vec<EdgeRouting> = g
        .edges()
        .iter()
        .zip(flows)
        .map(|(e, flow)| EdgeRouting { tail: e.tail, head: e.head, flow, congestion: flow.abs() / e.conductance })
        .collect();
    let max_congestion = per_edge.iter().map(|e| e.congestion).fold(0.0, f64::max);
    let competitive_ratio_bound = if g.is_unweighted() {
        Some(network.transfer_impedance(ImpedanceMode::Auto)?.max_abs_colsum())
    } else {
        None
    };
    Ok(RoutingReport { max_congestion, competitive_ratio_bound, per_edge })
}

fn superposed_flow(network: &Network<'_>, demands: &DemandSet) -> Result<Vec<f64>> {
    let per_pair: Vec<Vec<f64>> = demands
        .pairs()
        .par_iter()
        .map(|d| {
            let f = network.unit_flow(d.source, d.sink)?;
            Ok(f.iter().map(|v| d.amount * v).collect())
        })
        .collect::<Result<_>>()?;
    let mut total = vec![0.0; network.graph().n_edges()];
    for flow in per_pair {
        total.iter_mut().zip(flow).for_each(|(t, f)| *t += f);
    }
    Ok(total)
}

/// `‖Π‖₁→₁` of an unweighted graph: the competitive ratio of electrical routing.
pub fn competitive_ratio_bound(g: &Graph) -> Result<f64> {
    g.require_unweighted()?;
    Ok(Network::new(g)?.transfer_impedance(ImpedanceMode::Auto)?.max_abs_colsum())
}
