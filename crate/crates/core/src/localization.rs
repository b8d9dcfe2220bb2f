//! The greedy Schur elimination that bounds `Σ_{e,f} w_e w_f √(c_e c_f) |b_eᵀ L⁺ b_f|`.
//!
//! Each step retains `S_i`, pivots on the vertex minimizing
//! `Degree_{S_i}(x) = (Σ_e w_e √c_e q_x(e))² / Σ_e c_e q_x(e)²` (with `q`
//! taken over the edges of the original graph), and records how much the
//! absolute quadratic form `V_i` can drop.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::electrical::quadratic_form_abs;
use crate::error::{Error, Result};
use crate::graph::{EdgeVector, Graph};
use crate::laplacian::LaplacianSystem;
use crate::schur::{schur_complement, SchurSystem};

/// Two degree values closer than this (relative) count as a tie, and the
/// smaller vertex id wins.
const TIE_TOL: f64 = 1e-12;

/// Relative agreement required between `V_0` and `wᵀ Π̄ w`.
pub const CROSS_CHECK_TOL: f64 = 1e-6;

/// `ceil(log2 size)`, the bucket count used with the `6T + 6` constant.
pub fn bucket_count(size: usize) -> u32 {
    if size <= 1 {
        0
    } else {
        usize::BITS - (size - 1).leading_zeros()
    }
}

/// `(6T + 6) ‖w‖²` with `T = ceil(log2 size)`.
pub fn local_energy_bound(size: usize, w_norm_sq: f64) -> f64 {
    (6.0 * bucket_count(size) as f64 + 6.0) * w_norm_sq
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Degree {
    pub value: f64,
    /// `q ≡ 0`, so the ratio is taken as 0.
    pub degenerate: bool,
}

/// `Degree_S(u)` for `u ∈ S`.
pub fn degree(g: &Graph, s: &[usize], u: usize, w: &EdgeVector) -> Result<Degree> {
    w.check_weights_for(g)?;
    let sys = schur_complement(g, s)?;
    let k = sys
        .position(u)
        .ok_or_else(|| Error::InvalidArgument(format!("vertex {u} is not in the retained set")))?;
    Ok(degree_at(&sys, k, w))
}

fn degree_at(sys: &SchurSystem<'_>, k: usize, w: &[f64]) -> Degree {
    let p = sys.probabilities();
    let mut l1 = 0.0;
    let mut energy = 0.0;
    for (e, we) in sys.graph().edges().iter().zip(w) {
        let q = (p.at(k, e.tail) - p.at(k, e.head)).abs();
        l1 += we * e.conductance.sqrt() * q;
        energy += e.conductance * q * q;
    }
    if energy > 0.0 {
        Degree { value: l1 * l1 / energy, degenerate: false }
    } else {
        Degree { value: 0.0, degenerate: true }
    }
}

/// The chain of upper bounds on `Degree_S(u)` from the bucketing argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalEnergyCertificate {
    pub vertex: usize,
    pub degree: f64,
    /// `Σ_e r_u(e) w_e²`.
    pub potential_weight: f64,
    /// `(Σ r w²) · (Σ c q²/r) / (Σ c q²)`; at least `degree` by Cauchy-Schwarz.
    pub cauchy_schwarz: f64,
    /// `Σ_i 2^{i+1} E(Y_u^{(i)}) / E(all)`; at most `2T + 2`.
    pub bucket_factor: f64,
}

impl LocalEnergyCertificate {
    /// `potential_weight · bucket_factor`, which dominates `cauchy_schwarz`.
    pub fn bucketed(&self) -> f64 {
        self.potential_weight * self.bucket_factor
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeProfile {
    pub retained: Vec<usize>,
    pub degrees: Vec<f64>,
    pub sum: f64,
    /// `T = ceil(log2 |S|)`.
    pub buckets: u32,
    pub w_norm_sq: f64,
    /// `(6T + 6) ‖w‖²`.
    pub bound: f64,
    pub certificates: Vec<LocalEnergyCertificate>,
}

impl DegreeProfile {
    pub fn holds(&self) -> bool {
        self.sum <= self.bound
    }

    pub fn min_degree(&self) -> f64 {
        self.degrees.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn degree_profile(g: &Graph, s: &[usize], w: &EdgeVector) -> Result<DegreeProfile> {
    w.check_weights_for(g)?;
    let sys = schur_complement(g, s)?;
    Ok(profile_of(&sys, w))
}

fn profile_of(sys: &SchurSystem<'_>, w: &[f64]) -> DegreeProfile {
    let size = sys.len();
    let buckets = bucket_count(size);
    let w_norm_sq: f64 = w.iter().map(|v| v * v).sum();
    let certificates: Vec<LocalEnergyCertificate> = (0..size).map(|k| certificate(sys, k, w, buckets)).collect();
    let degrees: Vec<f64> = certificates.iter().map(|c| c.degree).collect();
    DegreeProfile {
        retained: sys.retained().to_vec(),
        sum: degrees.iter().sum(),
        degrees,
        buckets,
        w_norm_sq,
        bound: local_energy_bound(size, w_norm_sq),
        certificates,
    }
}

fn certificate(sys: &SchurSystem<'_>, k: usize, w: &[f64], buckets: u32) -> LocalEnergyCertificate {
    let stats = sys.edge_stats_at(k);
    let degree = degree_at(sys, k, w).value;
    let mut potential_weight = 0.0;
    let mut total = 0.0;
    let mut scaled = 0.0;
    let mut by_bucket = vec![0.0; buckets as usize + 1];
    for ((e, we), (q, r)) in sys.graph().edges().iter().zip(w).zip(stats.q.iter().zip(&stats.r)) {
        potential_weight += r * we * we;
        let energy = e.conductance * q * q;
        total += energy;
        scaled += energy / r;
        by_bucket[bucket_of(*r, buckets)] += energy;
    }
    let (cauchy_schwarz, bucket_factor) = if total > 0.0 {
        let factor = by_bucket
            .iter()
            .enumerate()
            .map(|(i, energy)| 2f64.powi(i as i32 + 1) * energy)
            .sum::<f64>()
            / total;
        (potential_weight * scaled / total, factor)
    } else {
        (0.0, 0.0)
    };
    LocalEnergyCertificate { vertex: sys.retained()[k], degree, potential_weight, cauchy_schwarz, bucket_factor }
}

/// Index `i` of the bucket `Y^{(i)}` holding an edge with clamped potential
/// `r`: the largest `i ≤ T` with `r ≤ 2^{-i}`.
fn bucket_of(r: f64, buckets: u32) -> usize {
    let mut i = 0;
    while i < buckets && r <= 0.5f64.powi(i as i32 + 1) {
        i += 1;
    }
    i as usize
}

/// `V = Σ_{e,f} w_e √c_e |b_eᵀ L_S⁺ b_f| √c_f w_f` where `b_e` is the
/// difference of the hitting-probability vectors of the endpoints of `e`.
fn absolute_form(sys: &SchurSystem<'_>, w: &[f64]) -> Result<f64> {
    let size = sys.len();
    let kernel = LaplacianSystem::from_matrix(sys.laplacian().clone())?.pinv_dense();
    let p = sys.probabilities();
    let edges = sys.graph().edges();
    let bw = DMatrix::from_fn(size, edges.len(), |i, e| {
        let edge = &edges[e];
        w[e] * edge.conductance.sqrt() * (p.at(i, edge.tail) - p.at(i, edge.head))
    });
    let gram = bw.transpose() * (kernel * &bw);
    Ok(gram.iter().map(|v| v.abs()).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EliminationStep {
    pub i: usize,
    /// `|S_i|`.
    pub size: usize,
    pub pivot: usize,
    pub degree_value: f64,
    /// `(Σ_e w_e √c_e |x_e|)² / m_i` with `m_i` the pivot's diagonal entry.
    pub rank_one: f64,
    /// `(6T_i + 6) ‖w‖² / |S_i|`; the minimum degree cannot exceed it.
    pub pigeonhole_bound: f64,
    #[serde(rename = "V_i")]
    pub value: Option<f64>,
    /// `V_i - V_{i+1} - degree_value`.
    pub slack: Option<f64>,
}

impl EliminationStep {
    pub fn rank_one_gap(&self) -> f64 {
        (self.rank_one - self.degree_value).abs() / self.degree_value.abs().max(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TerminalState {
    /// `S_T = {a, b}`.
    pub retained: [usize; 2],
    #[serde(rename = "V_T")]
    pub value: Option<f64>,
    pub w_norm_sq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EliminationTrace {
    pub steps: Vec<EliminationStep>,
    pub terminal: TerminalState,
}

impl EliminationTrace {
    /// `V_0`, the quantity the trace bounds.
    pub fn initial_value(&self) -> Option<f64> {
        self.steps.first().map_or(self.terminal.value, |s| s.value)
    }

    pub fn max_slack(&self) -> Option<f64> {
        self.steps.iter().map(|s| s.slack).try_fold(f64::NEG_INFINITY, |acc, s| s.map(|s| acc.max(s)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EliminationOptions {
    /// Recompute `V_i` at every step. Off records only degrees and pivots.
    pub compute_values: bool,
}

impl Default for EliminationOptions {
    fn default() -> Self {
        EliminationOptions { compute_values: true }
    }
}

/// Runs the greedy elimination from `S_0 = V` down to two vertices.
pub fn run_elimination(g: &Graph, w: &EdgeVector, options: EliminationOptions) -> Result<EliminationTrace> {
    w.check_weights_for(g)?;
    if g.n_vertices() < 2 {
        return Err(Error::InvalidArgument("elimination needs at least two vertices".into()));
    }
    let all: Vec<usize> = (0..g.n_vertices()).collect();
    let w_norm_sq = w.norm_squared();
    let mut sys = schur_complement(g, &all)?;
    let mut steps = Vec::with_capacity(all.len() - 2);
    loop {
        let value = if options.compute_values { Some(absolute_form(&sys, w)?) } else { None };
        if sys.len() == 2 {
            let terminal = TerminalState { retained: [sys.retained()[0], sys.retained()[1]], value, w_norm_sq };
            fill_slack(&mut steps, value);
            return Ok(EliminationTrace { steps, terminal });
        }
        let (k, degree) = argmin_degree(&sys, w);
        let pivot = sys.retained()[k];
        steps.push(EliminationStep {
            i: steps.len(),
            size: sys.len(),
            pivot,
            degree_value: degree,
            rank_one: rank_one_term(&sys, k, w),
            pigeonhole_bound: local_energy_bound(sys.len(), w_norm_sq) / sys.len() as f64,
            value,
            slack: None,
        });
        sys = sys.eliminate_one(pivot)?;
    }
}

fn argmin_degree(sys: &SchurSystem<'_>, w: &[f64]) -> (usize, f64) {
    let mut best = (0, degree_at(sys, 0, w).value);
    for k in 1..sys.len() {
        let d = degree_at(sys, k, w).value;
        if d < best.1 - TIE_TOL * best.1.abs().max(1.0) {
            best = (k, d);
        }
    }
    best
}

fn rank_one_term(sys: &SchurSystem<'_>, k: usize, w: &[f64]) -> f64 {
    let p = sys.probabilities();
    let pivot_entry = sys.laplacian()[(k, k)];
    let l1: f64 = sys
        .graph()
        .edges()
        .iter()
        .zip(w)
        .map(|(e, we)| we * e.conductance.sqrt() * (p.at(k, e.tail) - p.at(k, e.head)).abs())
        .sum();
    l1 * l1 / pivot_entry
}

fn fill_slack(steps: &mut [EliminationStep], terminal: Option<f64>) {
    let next_values: Vec<Option<f64>> = steps.iter().skip(1).map(|s| s.value).chain([terminal]).collect();
    for (step, next) in steps.iter_mut().zip(next_values) {
        step.slack = match (step.value, next) {
            (Some(v), Some(n)) => Some(v - n - step.degree_value),
            _ => None,
        };
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Theorem4Check {
    /// `V_0` through the Schur-system path.
    pub lhs: f64,
    /// `wᵀ Π̄ w` through the transfer impedance.
    pub quadratic_form: f64,
    pub harmonic_bound: f64,
    pub ok: bool,
}

/// `‖w‖² (1 + Σ_{i<n-2} (6 ceil(log2(n-i)) + 6) / (n - i))`.
pub fn harmonic_bound(n: usize, w_norm_sq: f64) -> f64 {
    let steps: f64 = (3..=n).map(|size| local_energy_bound(size, 1.0) / size as f64).sum();
    w_norm_sq * (1.0 + steps)
}

pub fn theorem4_check(g: &Graph, w: &EdgeVector) -> Result<Theorem4Check> {
    w.check_weights_for(g)?;
    let all: Vec<usize> = (0..g.n_vertices()).collect();
    let lhs = absolute_form(&schur_complement(g, &all)?, w)?;
    let quadratic_form = quadratic_form_abs(g, w)?;
    let harmonic_bound = harmonic_bound(g.n_vertices(), w.norm_squared());
    let agree = (lhs - quadratic_form).abs() <= CROSS_CHECK_TOL * quadratic_form.abs().max(f64::MIN_POSITIVE);
    Ok(Theorem4Check { lhs, quadratic_form, harmonic_bound, ok: agree && lhs <= harmonic_bound })
}
