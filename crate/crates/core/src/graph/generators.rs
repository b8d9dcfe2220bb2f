use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Edge, Graph};
use crate::error::{Error, Result};

const MAX_RESTARTS: usize = 10_000;

/// Named graph families. All generated graphs have unit conductances and are
/// connected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// A direct `u-v` edge plus `k` disjoint `u-v` paths of length `k`.
    ParallelPaths(usize),
    /// `n x n` grid with wraparound.
    Torus(usize),
    Hypercube(usize),
    /// Random `d`-regular graph from a union of `d` perfect matchings.
    Expander { n: usize, d: usize, seed: u64 },
    Path(usize),
    Complete(usize),
    ErdosRenyi { n: usize, p: f64, seed: u64 },
    Star(usize),
}

pub fn generate_family(family: Family) -> Result<Graph> {
    match family {
        Family::ParallelPaths(k) => parallel_paths(k),
        Family::Torus(n) => torus(n),
        Family::Hypercube(d) => hypercube(d),
        Family::Expander { n, d, seed } => expander(n, d, seed),
        Family::Path(n) => path(n),
        Family::Complete(n) => complete(n),
        Family::ErdosRenyi { n, p, seed } => erdos_renyi(n, p, seed),
        Family::Star(n) => star(n),
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

fn parallel_paths(k: usize) -> Result<Graph> {
    if k == 0 {
        return Err(invalid("parallel_paths needs k >= 1"));
    }
    let (u, v) = (0, 1);
    let mut edges = vec![Edge::new(u, v, 1.0)];
    let mut next = 2;
    for _ in 0..k {
        let mut prev = u;
        for _ in 0..k - 1 {
            edges.push(Edge::new(prev, next, 1.0));
            prev = next;
            next += 1;
        }
        edges.push(Edge::new(prev, v, 1.0));
    }
    Graph::new(next, edges)
}

fn torus(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(invalid("torus side must be at least 3"));
    }
    let id = |r: usize, c: usize| (r % n) * n + (c % n);
    let mut pairs = Vec::with_capacity(2 * n * n);
    for r in 0..n {
        for c in 0..n {
            pairs.push((id(r, c), id(r, c + 1)));
            pairs.push((id(r, c), id(r + 1, c)));
        }
    }
    Graph::unweighted(n * n, pairs)
}

fn hypercube(d: usize) -> Result<Graph> {
    if d == 0 || d > 20 {
        return Err(invalid("hypercube dimension must be in 1..=20"));
    }
    let n = 1usize << d;
    let pairs = (0..n).flat_map(|v| {
        (0..d).filter_map(move |b| (v & (1 << b) == 0).then_some((v, v | (1 << b))))
    });
    Graph::unweighted(n, pairs)
}

fn path(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(invalid("path needs at least 2 vertices"));
    }
    Graph::unweighted(n, (0..n - 1).map(|i| (i, i + 1)))
}

fn complete(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(invalid("complete graph needs at least 2 vertices"));
    }
    Graph::unweighted(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
}

fn star(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(invalid("star needs at least 2 vertices"));
    }
    Graph::unweighted(n, (1..n).map(|i| (0, i)))
}

fn expander(n: usize, d: usize, seed: u64) -> Result<Graph> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(invalid("expander needs an even vertex count >= 2"));
    }
    if d == 0 || d >= n {
        return Err(invalid("expander degree must be in 1..n"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    'restart: for _ in 0..MAX_RESTARTS {
        let mut seen = HashSet::with_capacity(n * d / 2);
        let mut pairs = Vec::with_capacity(n * d / 2);
        for _ in 0..d {
            let mut accepted = false;
            for _ in 0..100 {
                order.shuffle(&mut rng);
                let matching: Vec<(usize, usize)> = order
                    .chunks_exact(2)
                    .map(|p| (p[0].min(p[1]), p[0].max(p[1])))
                    .collect();
                if matching.iter().all(|p| !seen.contains(p)) {
                    seen.extend(matching.iter().copied());
                    pairs.extend(matching);
                    accepted = true;
                    break;
                }
            }
            if !accepted {
                continue 'restart;
            }
        }
        pairs.sort_unstable();
        let g = Graph::unweighted(n, pairs)?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(invalid(format!("could not sample a connected {d}-regular graph on {n} vertices")))
}

fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if n < 2 || !(p > 0.0 && p <= 1.0) {
        return Err(invalid("erdos_renyi needs n >= 2 and p in (0, 1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_RESTARTS {
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen::<f64>() < p {
                    pairs.push((i, j));
                }
            }
        }
        let g = Graph::unweighted(n, pairs)?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(invalid(format!("G({n}, {p}) never came out connected")))
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Family::ParallelPaths(k) => write!(f, "parallel_paths:{k}"),
            Family::Torus(n) => write!(f, "torus:{n}"),
            Family::Hypercube(d) => write!(f, "hypercube:{d}"),
            Family::Expander { n, d, seed } => write!(f, "expander:{n}:{d}:{seed}"),
            Family::Path(n) => write!(f, "path:{n}"),
            Family::Complete(n) => write!(f, "complete:{n}"),
            Family::ErdosRenyi { n, p, seed } => write!(f, "erdos_renyi:{n}:{p}:{seed}"),
            Family::Star(n) => write!(f, "star:{n}"),
        }
    }
}

/// Parses specs like `torus:8`, `expander:64:4[:seed]`, `triangle`, `edge`.
impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        let name = parts.next().unwrap_or_default();
        let args: Vec<&str> = parts.collect();
        let int = |i: usize| -> Result<usize> {
            args.get(i)
                .ok_or_else(|| invalid(format!("family `{s}` is missing argument {}", i + 1)))?
                .parse()
                .map_err(|_| invalid(format!("bad integer in family `{s}`")))
        };
        let seed = |i: usize| -> Result<u64> {
            args.get(i).map_or(Ok(1), |a| a.parse().map_err(|_| invalid(format!("bad seed in family `{s}`"))))
        };
        let arity = |expected: std::ops::RangeInclusive<usize>| -> Result<()> {
            if expected.contains(&args.len()) {
                Ok(())
            } else {
                Err(invalid(format!("wrong number of arguments in family `{s}`")))
            }
        };
        let family = match name {
            "edge" => {
                arity(0..=0)?;
                Family::Path(2)
            }
            "triangle" => {
                arity(0..=0)?;
                Family::Complete(3)
            }
            "parallel_paths" => {
                arity(1..=1)?;
                Family::ParallelPaths(int(0)?)
            }
            "torus" => {
                arity(1..=1)?;
                Family::Torus(int(0)?)
            }
            "hypercube" => {
                arity(1..=1)?;
                Family::Hypercube(int(0)?)
            }
            "path" => {
                arity(1..=1)?;
                Family::Path(int(0)?)
            }
            "complete" => {
                arity(1..=1)?;
                Family::Complete(int(0)?)
            }
            "star" => {
                arity(1..=1)?;
                Family::Star(int(0)?)
            }
            "expander" => {
                arity(2..=3)?;
                Family::Expander { n: int(0)?, d: int(1)?, seed: seed(2)? }
            }
            "erdos_renyi" | "er" => {
                arity(2..=3)?;
                let p = args[1].parse().map_err(|_| invalid(format!("bad probability in family `{s}`")))?;
                Family::ErdosRenyi { n: int(0)?, p, seed: seed(2)? }
            }
            _ => return Err(invalid(format!("unknown graph family `{name}`"))),
        };
        Ok(family)
    }
}
