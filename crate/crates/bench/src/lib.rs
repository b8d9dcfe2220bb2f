//! Fixtures shared by the benchmarks.

use elflow_core::{generate_family, EdgeVector, Family, Graph};

pub fn torus(n: usize) -> Graph {
    generate_family(Family::Torus(n)).expect("torus")
}

pub fn expander(n: usize) -> Graph {
    generate_family(Family::Expander { n, d: 4, seed: 1 }).expect("expander")
}

pub fn ones(g: &Graph) -> EdgeVector {
    EdgeVector::ones(g.n_edges())
}

/// Every other vertex, which keeps `|S| = n / 2` on the families above.
pub fn half(g: &Graph) -> Vec<usize> {
    (0..g.n_vertices()).step_by(2).collect()
}
