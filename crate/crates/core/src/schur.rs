//! Schur complements of graph Laplacians and random-walk hitting
//! probabilities onto a retained vertex set `S`.
//!
//! With `L` split into blocks `P` (on `S`), `Q` (`S` by the rest) and `R`
//! (the rest), the Schur complement is `P - Q R⁻¹ Qᵀ`, and column `x` of
//! `[I  -Q R⁻¹]` is the distribution of the first vertex of `S` hit by a
//! walk started at `x`.

use nalgebra::{Cholesky, DMatrix};

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, VertexVector};
use crate::laplacian::LaplacianSystem;

/// Default threshold below which Schur conductances are dropped when a Schur
/// complement is turned back into a graph.
pub const SCHUR_PRUNE_TOL: f64 = 1e-12;

/// Largest row-sum residue tolerated (relative to the largest entry) when
/// materializing a Schur complement.
const SELF_LOOP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbabilityMethod {
    /// `[I  -Q R⁻¹]` from the block split of `L`.
    Block,
    /// Potentials in the graph with `S \ {v}` identified to a single vertex.
    Identify,
    /// The absorbing Markov chain `(I - P_TT) h = P_Tv` of the random walk.
    WalkOracle,
}

/// `p_v(x)` for every `v` in the retained set and every vertex `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMap {
    retained: Vec<usize>,
    values: DMatrix<f64>,
}

impl ProbabilityMap {
    pub fn retained(&self) -> &[usize] {
        &self.retained
    }

    /// `|S| x n` matrix; row `k` belongs to `retained()[k]`.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// `p_v(x)` by position `k` of `v` in the retained set.
    pub fn at(&self, k: usize, x: usize) -> f64 {
        self.values[(k, x)]
    }

    /// `p_v(x)` by vertex id; `None` if `v` is not retained.
    pub fn get(&self, v: usize, x: usize) -> Option<f64> {
        self.retained.binary_search(&v).ok().map(|k| self.values[(k, x)])
    }

    pub fn max_abs_diff(&self, other: &ProbabilityMap) -> f64 {
        (&self.values - &other.values).amax()
    }
}

/// `q_v(e)` and `r_v(e)` over the edges of the base graph.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeStats {
    pub q: Vec<f64>,
    pub r: Vec<f64>,
}

/// Two sides of an inequality or identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub lhs: f64,
    pub rhs: f64,
}

impl Comparison {
    pub fn relative_gap(&self) -> f64 {
        (self.lhs - self.rhs).abs() / self.rhs.abs().max(f64::MIN_POSITIVE)
    }
}

/// A Schur complement materialized as a graph on the retained vertices.
#[derive(Debug, Clone)]
pub struct SchurGraph {
    pub graph: Graph,
    /// Original id of each local vertex.
    pub vertices: Vec<usize>,
}

/// `Schur(G, S)` together with the hitting probabilities onto `S`.
#[derive(Debug, Clone)]
pub struct SchurSystem<'g> {
    graph: &'g Graph,
    laplacian: DMatrix<f64>,
    probabilities: ProbabilityMap,
}

fn validate_subset(g: &Graph, s: &[usize]) -> Result<Vec<usize>> {
    let mut retained = s.to_vec();
    retained.sort_unstable();
    retained.dedup();
    if retained.len() != s.len() {
        return Err(Error::InvalidArgument("retained set has duplicate vertices".into()));
    }
    if retained.len() < 2 {
        return Err(Error::InvalidArgument("retained set needs at least two vertices".into()));
    }
    for &v in &retained {
        g.check_vertex(v)?;
    }
    Ok(retained)
}

/// Block elimination of `V \ S`: returns the Schur Laplacian on the sorted
/// `retained` set and the `|S| x n` probability matrix.
fn block_eliminate(g: &Graph, retained: &[usize]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = g.n_vertices();
    let l = g.laplacian();
    let mut in_s = vec![false; n];
    retained.iter().for_each(|&v| in_s[v] = true);
    let rest: Vec<usize> = (0..n).filter(|&x| !in_s[x]).collect();
    let (k, r) = (retained.len(), rest.len());

    let p = DMatrix::from_fn(k, k, |i, j| l[(retained[i], retained[j])]);
    let mut probs = DMatrix::zeros(k, n);
    for (i, &v) in retained.iter().enumerate() {
        probs[(i, v)] = 1.0;
    }
    if r == 0 {
        return Ok((p, probs));
    }
    let q = DMatrix::from_fn(k, r, |i, j| l[(retained[i], rest[j])]);
    let rr = DMatrix::from_fn(r, r, |i, j| l[(rest[i], rest[j])]);
    let chol = Cholesky::new(rr).ok_or(Error::Singular)?;
    // X = R⁻¹ Qᵀ, so Q R⁻¹ = Xᵀ.
    let x = chol.solve(&q.transpose());
    let schur = p - &q * &x;
    for (j, &c) in rest.iter().enumerate() {
        for i in 0..k {
            probs[(i, c)] = -x[(j, i)];
        }
    }
    Ok((schur, probs))
}

pub fn schur_complement<'g>(g: &'g Graph, s: &[usize]) -> Result<SchurSystem<'g>> {
    g.require_connected()?;
    let retained = validate_subset(g, s)?;
    let (laplacian, values) = block_eliminate(g, &retained)?;
    Ok(SchurSystem { graph: g, laplacian, probabilities: ProbabilityMap { retained, values } })
}

pub fn hitting_probabilities(g: &Graph, s: &[usize], method: ProbabilityMethod) -> Result<ProbabilityMap> {
    g.require_connected()?;
    let retained = validate_subset(g, s)?;
    let values = match method {
        ProbabilityMethod::Block => block_eliminate(g, &retained)?.1,
        ProbabilityMethod::Identify => identify_probabilities(g, &retained)?,
        ProbabilityMethod::WalkOracle => walk_probabilities(g, &retained)?,
    };
    Ok(ProbabilityMap { retained, values })
}

/// `p_v(x) = |b_vsᵀ L_H⁺ b_xs| / b_vsᵀ L_H⁺ b_vs` with `S \ {v}` merged into `s`.
fn identify_probabilities(g: &Graph, retained: &[usize]) -> Result<DMatrix<f64>> {
    let n = g.n_vertices();
    let mut probs = DMatrix::zeros(retained.len(), n);
    for (k, &v) in retained.iter().enumerate() {
        let merged = |x: usize| x != v && retained.binary_search(&x).is_ok();
        let mut map = vec![0; n];
        let mut next = 0;
        for (x, slot) in map.iter_mut().enumerate() {
            if !merged(x) {
                *slot = next;
                next += 1;
            }
        }
        let s = next;
        for (x, slot) in map.iter_mut().enumerate() {
            if merged(x) {
                *slot = s;
            }
        }
        let edges: Vec<Edge> = g
            .edges()
            .iter()
            .filter(|e| map[e.tail] != map[e.head])
            .map(|e| Edge::new(map[e.tail], map[e.head], e.conductance))
            .collect();
        let h = Graph::new(s + 1, edges)?;
        let sys = LaplacianSystem::from_graph(&h)?;
        let phi = sys.pinv_apply(&VertexVector::dipole(s + 1, map[v], s))?;
        let denom = phi[map[v]] - phi[s];
        for x in 0..n {
            probs[(k, x)] = (phi[map[x]] - phi[s]).abs() / denom;
        }
    }
    Ok(probs)
}

/// Solves the absorbing chain directly: for transient `x`,
/// `h_v(x) = Σ_y P(x, y) h_v(y)` with `h_v = 1` at `v` and `0` on `S \ {v}`.
fn walk_probabilities(g: &Graph, retained: &[usize]) -> Result<DMatrix<f64>> {
    let n = g.n_vertices();
    let k = retained.len();
    let mut slot = vec![None; n];
    for (i, &v) in retained.iter().enumerate() {
        slot[v] = Some(Slot::Absorbing(i));
    }
    let transient: Vec<usize> = (0..n).filter(|&x| slot[x].is_none()).collect();
    for (i, &x) in transient.iter().enumerate() {
        slot[x] = Some(Slot::Transient(i));
    }
    let mut probs = DMatrix::zeros(k, n);
    for (i, &v) in retained.iter().enumerate() {
        probs[(i, v)] = 1.0;
    }
    if transient.is_empty() {
        return Ok(probs);
    }

    let degree = g.weighted_degrees();
    let t = transient.len();
    let mut a = DMatrix::<f64>::identity(t, t);
    let mut rhs = DMatrix::<f64>::zeros(t, k);
    for e in g.edges() {
        for (from, to) in [(e.tail, e.head), (e.head, e.tail)] {
            let Some(Slot::Transient(i)) = slot[from] else { continue };
            let step = e.conductance / degree[from];
            match slot[to].expect("every vertex has a slot") {
                Slot::Transient(j) => a[(i, j)] -= step,
                Slot::Absorbing(j) => rhs[(i, j)] += step,
            }
        }
    }
    let h = a.lu().solve(&rhs).ok_or(Error::Singular)?;
    for (i, &x) in transient.iter().enumerate() {
        for j in 0..k {
            probs[(j, x)] = h[(i, j)];
        }
    }
    Ok(probs)
}

#[derive(Debug, Clone, Copy)]
enum Slot {
    Absorbing(usize),
    Transient(usize),
}

impl<'g> SchurSystem<'g> {
    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    /// The retained set, sorted ascending.
    pub fn retained(&self) -> &[usize] {
        &self.probabilities.retained
    }

    pub fn len(&self) -> usize {
        self.retained().len()
    }

    pub fn is_empty(&self) -> bool {
        self.retained().is_empty()
    }

    pub fn position(&self, v: usize) -> Option<usize> {
        self.retained().binary_search(&v).ok()
    }

    fn position_checked(&self, v: usize) -> Result<usize> {
        self.position(v)
            .ok_or_else(|| Error::InvalidArgument(format!("vertex {v} is not in the retained set")))
    }

    /// `|S| x |S|` Laplacian of `Schur(G, S)`, indexed like [`Self::retained`].
    pub fn laplacian(&self) -> &DMatrix<f64> {
        &self.laplacian
    }

    pub fn probabilities(&self) -> &ProbabilityMap {
        &self.probabilities
    }

    /// `c_v^H`: total conductance at `v` in `Schur(G, S)`.
    pub fn weighted_degree(&self, v: usize) -> Result<f64> {
        let k = self.position_checked(v)?;
        Ok((0..self.len()).filter(|&j| j != k).map(|j| -self.laplacian[(k, j)]).sum())
    }

    /// Eliminates `x` from `S` with a star-clique update of the Schur Laplacian.
    pub fn eliminate_one(&self, x: usize) -> Result<SchurSystem<'g>> {
        let k = self.position_checked(x)?;
        if self.len() <= 2 {
            return Err(Error::InvalidArgument("cannot eliminate below two retained vertices".into()));
        }
        let pivot = self.laplacian[(k, k)];
        if pivot <= 0.0 {
            return Err(Error::Singular);
        }
        let keep: Vec<usize> = (0..self.len()).filter(|&i| i != k).collect();
        let laplacian = DMatrix::from_fn(keep.len(), keep.len(), |i, j| {
            let (a, b) = (keep[i], keep[j]);
            self.laplacian[(a, b)] - self.laplacian[(a, k)] * self.laplacian[(k, b)] / pivot
        });
        let retained: Vec<usize> = keep.iter().map(|&i| self.retained()[i]).collect();
        let values = block_eliminate(self.graph, &retained)?.1;
        Ok(SchurSystem { graph: self.graph, laplacian, probabilities: ProbabilityMap { retained, values } })
    }

    /// The Schur Laplacian as a graph on local ids `0..|S|`, dropping
    /// conductances at or below `prune`.
    pub fn materialize(&self, prune: f64) -> Result<SchurGraph> {
        let k = self.len();
        let scale = self.laplacian.amax().max(1.0);
        let mut edges = Vec::new();
        for i in 0..k {
            let row_sum: f64 = self.laplacian.row(i).sum();
            if row_sum.abs() > SELF_LOOP_TOL * scale {
                return Err(Error::NotLaplacian(format!("self-loop residue {row_sum} at local vertex {i}")));
            }
            for j in i + 1..k {
                let c = -self.laplacian[(i, j)];
                if c > prune {
                    edges.push(Edge::new(i, j, c));
                }
            }
        }
        Ok(SchurGraph { graph: Graph::new(k, edges)?, vertices: self.retained().to_vec() })
    }

    /// `q_v(e) = |p_v(x) - p_v(y)|` and `r_v(e) = max(p_v(x), p_v(y), 1/|S|)`.
    pub fn edge_stats(&self, v: usize) -> Result<EdgeStats> {
        let k = self.position_checked(v)?;
        Ok(self.edge_stats_at(k))
    }

    pub(crate) fn edge_stats_at(&self, k: usize) -> EdgeStats {
        let floor = 1.0 / self.len() as f64;
        let p = |x| self.probabilities.at(k, x);
        let (q, r) = self
            .graph
            .edges()
            .iter()
            .map(|e| {
                let (a, b) = (p(e.tail), p(e.head));
                ((a - b).abs(), a.max(b).max(floor))
            })
            .unzip();
        EdgeStats { q, r }
    }

    /// `Σ_{v ∈ S} r_v(e)`; at most 3.
    pub fn sum_potentials(&self, e: usize) -> Result<f64> {
        let edge = self
            .graph
            .edges()
            .get(e)
            .ok_or_else(|| Error::InvalidArgument(format!("edge {e} out of range")))?;
        let floor = 1.0 / self.len() as f64;
        Ok((0..self.len())
            .map(|k| {
                let (a, b) = (self.probabilities.at(k, edge.tail), self.probabilities.at(k, edge.head));
                a.max(b).max(floor)
            })
            .sum())
    }

    /// Energy of `q_v` on edges whose endpoint potentials are both at most
    /// `p` (lhs) against `p` times the total energy (rhs).
    pub fn norm_energy(&self, v: usize, p: f64) -> Result<Comparison> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidArgument(format!("threshold {p} is not in (0, 1)")));
        }
        let k = self.position_checked(v)?;
        let mut low = 0.0;
        let mut total = 0.0;
        for e in self.graph.edges() {
            let (a, b) = (self.probabilities.at(k, e.tail), self.probabilities.at(k, e.head));
            let energy = e.conductance * (a - b).powi(2);
            total += energy;
            if a.max(b) <= p {
                low += energy;
            }
        }
        Ok(Comparison { lhs: low, rhs: p * total })
    }

    /// Weighted degree of `v` in `Schur(G, S)` (lhs) against
    /// `Σ_e c_e q_v(e)²` (rhs). The two are equal.
    pub fn schur_conductance(&self, v: usize) -> Result<Comparison> {
        let lhs = self.weighted_degree(v)?;
        let stats = self.edge_stats(v)?;
        let rhs = self.graph.conductances().zip(&stats.q).map(|(c, q)| c * q * q).sum();
        Ok(Comparison { lhs, rhs })
    }
}

pub fn eliminate_one<'g>(sys: &SchurSystem<'g>, x: usize) -> Result<SchurSystem<'g>> {
    sys.eliminate_one(x)
}

pub fn edge_stats(sys: &SchurSystem<'_>, v: usize) -> Result<EdgeStats> {
    sys.edge_stats(v)
}

pub fn check_sum_potentials(sys: &SchurSystem<'_>, e: usize) -> Result<f64> {
    sys.sum_potentials(e)
}

pub fn check_norm_energy(g: &Graph, s: &[usize], v: usize, p: f64) -> Result<Comparison> {
    schur_complement(g, s)?.norm_energy(v, p)
}

pub fn check_schur_conductance(g: &Graph, s: &[usize], v: usize) -> Result<Comparison> {
    schur_complement(g, s)?.schur_conductance(v)
}
