//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any criterion fails.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use elflow_core::electrical::{delta_edge, delta_summary, transfer_impedance, ImpedanceMode, Network};
use elflow_core::localization::{degree_profile, run_elimination, EliminationOptions};
use elflow_core::routing::{competitive_ratio_bound, route_demands, DemandSet};
use elflow_core::schur::{hitting_probabilities, schur_complement, ProbabilityMethod};
use elflow_core::{generate_family, EdgeVector, Family, Graph};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn family(f: Family) -> Graph {
    generate_family(f).unwrap_or_else(|e| panic!("{f}: {e}"))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_time(start: Instant, limit: Duration) -> Result<(), String> {
    let elapsed = start.elapsed();
    ensure(elapsed < limit, || format!("took {elapsed:.1?}, limit {limit:?}"))
}

fn random_subset(rng: &mut impl Rng, n: usize, size: usize) -> Vec<usize> {
    let mut all: Vec<usize> = (0..n).collect();
    all.shuffle(rng);
    all.truncate(size);
    all
}

fn random_weighted(rng: &mut impl Rng, n: usize, extra: usize) -> Graph {
    // Random spanning tree plus extra chords, conductances in [0.1, 10].
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.gen_range(0..v), v, rng.gen_range(0.1..10.0)));
    }
    while edges.len() < n - 1 + extra {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
            edges.push((a, b, rng.gen_range(0.1..10.0)));
        }
    }
    Graph::from_edge_list(edges).unwrap()
}

fn projection_graphs() -> Vec<(String, Graph)> {
    [
        Family::Path(2),
        Family::Complete(3),
        Family::Path(8),
        Family::Complete(6),
        Family::Torus(4),
        Family::Hypercube(4),
        Family::Expander { n: 64, d: 4, seed: 1 },
        Family::ParallelPaths(4),
    ]
    .into_iter()
    .map(|f| (f.to_string(), family(f)))
    .collect()
}

fn ac1_projection_identities() -> Outcome {
    let start = Instant::now();
    let mut worst_trace: f64 = 0.0;
    let mut worst_defect: f64 = 0.0;
    for (name, g) in projection_graphs() {
        let pi = transfer_impedance(&g, ImpedanceMode::Dense).map_err(|e| format!("{name}: {e}"))?;
        let trace_err = (pi.trace() - (g.n_vertices() - 1) as f64).abs();
        let defect = pi.projection_defect();
        ensure(trace_err <= 1e-8, || format!("{name}: trace off by {trace_err:e}"))?;
        ensure(defect <= 1e-8, || format!("{name}: ‖Π²-Π‖_max = {defect:e}"))?;
        worst_trace = worst_trace.max(trace_err);
        worst_defect = worst_defect.max(defect);
    }
    within_time(start, Duration::from_secs(10))?;
    Ok(format!("max |trace-(n-1)| = {worst_trace:.1e}, max defect = {worst_defect:.1e}, {:.2?}", start.elapsed()))
}

fn ac2_parallel_paths() -> Outcome {
    let mut worst: f64 = 0.0;
    for k in 2..=5 {
        let g = family(Family::ParallelPaths(k));
        let delta = delta_edge(&g, 0).map_err(|e| e.to_string())?;
        let expected = (k as f64 + 1.0) / 2.0;
        let err = (delta - expected).abs();
        ensure(err <= 1e-9, || format!("k = {k}: Δ = {delta}, expected {expected}"))?;
        worst = worst.max(err);
    }
    Ok(format!("Δ(uv) = (k+1)/2 for k = 2..5, max error {worst:.1e}"))
}

fn ac3_probability_methods() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let graphs = [
        family(Family::Torus(4)),
        family(Family::Hypercube(5)),
        family(Family::Expander { n: 64, d: 4, seed: 2 }),
        family(Family::ErdosRenyi { n: 40, p: 0.12, seed: 5 }),
        family(Family::ParallelPaths(5)),
        random_weighted(&mut rng, 30, 30),
    ];
    let (mut max_diff, mut max_mass): (f64, f64) = (0.0, 0.0);
    for instance in 0..20 {
        let g = &graphs[instance % graphs.len()];
        let n = g.n_vertices();
        let size = rng.gen_range(2..=n.min(24));
        let s = random_subset(&mut rng, n, size);
        let get = |m| hitting_probabilities(g, &s, m).map_err(|e| e.to_string());
        let block = get(ProbabilityMethod::Block)?;
        let ident = get(ProbabilityMethod::Identify)?;
        let walk = get(ProbabilityMethod::WalkOracle)?;
        let diff = block.max_abs_diff(&ident).max(block.max_abs_diff(&walk)).max(ident.max_abs_diff(&walk));
        ensure(diff <= 1e-8, || format!("instance {instance}: methods differ by {diff:e}"))?;
        for x in 0..n {
            let mass = (block.matrix().column(x).sum() - 1.0).abs();
            ensure(mass <= 1e-9, || format!("instance {instance}: Σ_v p_v({x}) off by {mass:e}"))?;
            max_mass = max_mass.max(mass);
        }
        max_diff = max_diff.max(diff);
    }
    Ok(format!("20 instances, max method gap {max_diff:.1e}, max mass error {max_mass:.1e}"))
}

fn ac4_proposition_sweeps() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let graphs = [
        family(Family::Torus(4)),
        family(Family::Path(6)),
        family(Family::Expander { n: 32, d: 4, seed: 3 }),
        family(Family::ParallelPaths(4)),
        random_weighted(&mut rng, 20, 25),
    ];
    let mut instances = 0;
    let (mut max_sum, mut max_ratio, mut max_gap): (f64, f64, f64) = (0.0, 0.0, 0.0);
    while instances < 250 {
        let g = &graphs[instances % graphs.len()];
        let n = g.n_vertices();
        let size = rng.gen_range(2..=n);
        let s = random_subset(&mut rng, n, size);
        let v = s[rng.gen_range(0..s.len())];
        let p = rng.gen_range(0.001..0.999);
        let sys = schur_complement(g, &s).map_err(|e| e.to_string())?;
        for e in 0..g.n_edges() {
            let sum = sys.sum_potentials(e).map_err(|e| e.to_string())?;
            ensure(sum <= 3.0, || format!("Σ_v r_v(e) = {sum} > 3 (S = {s:?}, e = {e})"))?;
            max_sum = max_sum.max(sum);
        }
        let energy = sys.norm_energy(v, p).map_err(|e| e.to_string())?;
        ensure(energy.lhs <= energy.rhs * (1.0 + 1e-12), || format!("norm-energy {energy:?} (S = {s:?}, v = {v}, p = {p})"))?;
        if energy.rhs > 0.0 {
            max_ratio = max_ratio.max(energy.lhs / energy.rhs);
        }
        let cond = sys.schur_conductance(v).map_err(|e| e.to_string())?;
        ensure(cond.relative_gap() <= 1e-8, || format!("schur-conductance {cond:?} (S = {s:?}, v = {v})"))?;
        max_gap = max_gap.max(cond.relative_gap());
        instances += 1;
    }
    Ok(format!(
        "{instances} instances: max Σr = {max_sum:.3}, max energy lhs/rhs = {max_ratio:.3}, max conductance gap {max_gap:.1e}"
    ))
}

fn ac5_local_energy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let graphs = [
        family(Family::Torus(4)),
        family(Family::Expander { n: 64, d: 4, seed: 4 }),
        family(Family::ParallelPaths(4)),
        family(Family::Hypercube(4)),
        random_weighted(&mut rng, 24, 30),
    ];
    let mut worst: f64 = 0.0;
    let total = 120;
    for instance in 0..total {
        let g = &graphs[instance % graphs.len()];
        let n = g.n_vertices();
        let size = rng.gen_range(2..=n);
        let s = random_subset(&mut rng, n, size);
        let w = if instance % 2 == 0 {
            EdgeVector::ones(g.n_edges())
        } else {
            EdgeVector::weights((0..g.n_edges()).map(|_| rng.gen_range(0.0..3.0)).collect()).unwrap()
        };
        let profile = degree_profile(g, &s, &w).map_err(|e| e.to_string())?;
        ensure(profile.holds(), || format!("instance {instance}: Σ Degree = {} > {}", profile.sum, profile.bound))?;
        worst = worst.max(profile.sum / profile.bound);
    }
    Ok(format!("{total} instances, max Σ Degree / ((6T+6)‖w‖²) = {worst:.3}"))
}

fn ac6_elimination_traces() -> Outcome {
    let start = Instant::now();
    let mut report = Vec::new();
    for f in [Family::Path(8), Family::Torus(4), Family::Expander { n: 32, d: 4, seed: 1 }, Family::Complete(8)] {
        let g = family(f);
        let w = EdgeVector::ones(g.n_edges());
        let trace = run_elimination(&g, &w, EliminationOptions::default()).map_err(|e| format!("{f}: {e}"))?;
        for step in &trace.steps {
            let slack = step.slack.expect("values computed");
            ensure(slack <= 1e-8, || format!("{f} step {}: slack {slack:e}", step.i))?;
            ensure(step.rank_one_gap() <= 1e-8, || {
                format!("{f} step {}: rank-one {} vs Degree {}", step.i, step.rank_one, step.degree_value)
            })?;
        }
        let v_t = trace.terminal.value.expect("values computed");
        ensure(v_t <= w.norm_squared() + 1e-8, || format!("{f}: V_T = {v_t} > ‖w‖² = {}", w.norm_squared()))?;
        let v0 = trace.initial_value().expect("values computed");
        let q = transfer_impedance(&g, ImpedanceMode::Dense).map_err(|e| e.to_string())?.quadratic_form_abs(&w).unwrap();
        ensure((v0 - q).abs() <= 1e-6 * q, || format!("{f}: V_0 = {v0} vs wᵀΠ̄w = {q}"))?;
        report.push(format!("{f}: {} steps, max slack {:.1e}", trace.steps.len(), trace.max_slack().unwrap_or(0.0)));
    }
    within_time(start, Duration::from_secs(60))?;
    Ok(format!("{} ({:.2?})", report.join("; "), start.elapsed()))
}

fn check_sequence(name: &str, seq: &[f64]) -> Result<(), String> {
    let max = seq.iter().copied().fold(f64::MIN, f64::max);
    ensure(max <= 8.0, || format!("{name} exceeds 8: {seq:?}"))?;
    let growth = seq[seq.len() - 1] / seq[0];
    ensure(growth <= 2.0, || format!("{name} grows by {growth:.3}: {seq:?}"))
}

fn ac7_scaling() -> Outcome {
    let start = Instant::now();
    let mut lines = Vec::new();
    let series = [
        ("torus", vec![Family::Torus(4), Family::Torus(8), Family::Torus(16), Family::Torus(32)]),
        (
            "expander",
            vec![
                Family::Expander { n: 32, d: 4, seed: 1 },
                Family::Expander { n: 128, d: 4, seed: 1 },
                Family::Expander { n: 512, d: 4, seed: 1 },
            ],
        ),
    ];
    for (name, families) in series {
        let mut delta_ratio = Vec::new();
        let mut norm_ratio = Vec::new();
        for f in families {
            let g = family(f);
            let ln2 = (g.n_vertices() as f64).ln().powi(2);
            let network = Network::new(&g).map_err(|e| e.to_string())?;
            let sum_delta = network.delta_summary().map_err(|e| e.to_string())?.sum_delta.unwrap();
            let pi = network.transfer_impedance(ImpedanceMode::Streaming).map_err(|e| e.to_string())?;
            let norm = pi.abs_spectral_norm().map_err(|e| format!("{f}: {e}"))?.value;
            delta_ratio.push(sum_delta / (g.n_edges() as f64 * ln2));
            norm_ratio.push(norm / ln2);
        }
        check_sequence(&format!("{name} ΣΔ/(m ln²n)"), &delta_ratio)?;
        check_sequence(&format!("{name} ‖Π̄‖/ln²n"), &norm_ratio)?;
        let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(", ");
        lines.push(format!("{name}: ΣΔ/(m ln²n) = [{}], ‖Π̄‖/ln²n = [{}]", fmt(&delta_ratio), fmt(&norm_ratio)));
    }
    within_time(start, Duration::from_secs(600))?;
    Ok(format!("{} ({:.1?})", lines.join("; "), start.elapsed()))
}

fn ac8_routing() -> Outcome {
    let tri = family(Family::Complete(3));
    let r = route_demands(&tri, &DemandSet::single(0, 1, 1.0).unwrap()).map_err(|e| e.to_string())?;
    ensure((r.max_congestion - 2.0 / 3.0).abs() <= 1e-9, || format!("triangle congestion {}", r.max_congestion))?;

    let mut graphs = projection_graphs();
    graphs.push(("torus:8".into(), family(Family::Torus(8))));
    graphs.push(("parallel_paths:5".into(), family(Family::ParallelPaths(5))));
    let mut worst: f64 = 0.0;
    for (name, g) in &graphs {
        let ratio = competitive_ratio_bound(g).map_err(|e| e.to_string())?;
        let max_delta = delta_summary(g).map_err(|e| e.to_string())?.max_delta.unwrap();
        let err = (ratio - max_delta).abs();
        ensure(err <= 1e-9, || format!("{name}: ratio {ratio} vs max Δ {max_delta}"))?;
        worst = worst.max(err);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let g = family(Family::Expander { n: 64, d: 4, seed: 1 });
    let mut lin: f64 = 0.0;
    for _ in 0..20 {
        let mut pick = || loop {
            let (s, t) = (rng.gen_range(0..64), rng.gen_range(0..64));
            if s != t {
                return DemandSet::single(s, t, rng.gen_range(0.1..3.0)).unwrap();
            }
        };
        let (d1, d2) = (pick(), pick());
        let mut both = d1.clone();
        both.extend(&d2);
        let f1 = route_demands(&g, &d1).unwrap().flows();
        let f2 = route_demands(&g, &d2).unwrap().flows();
        let f12 = route_demands(&g, &both).unwrap().flows();
        for ((a, b), c) in f1.iter().zip(&f2).zip(&f12) {
            lin = lin.max((a + b - c).abs());
        }
    }
    ensure(lin <= 1e-10, || format!("superposition error {lin:e}"))?;
    Ok(format!(
        "triangle congestion 2/3; ratio = max Δ on {} graphs (max err {worst:.1e}); linearity err {lin:.1e}",
        graphs.len()
    ))
}

fn ac9_grid_decay() -> Outcome {
    let side = 32;
    let g = family(Family::Torus(side));
    let edge = g.edge(0);
    ensure(edge.head == edge.tail + 1, || "edge 0 should be horizontal".into())?;
    let network = Network::new(&g).map_err(|e| e.to_string())?;
    let phi = network.potentials(edge.tail, edge.head).map_err(|e| e.to_string())?;
    let at = |k: usize| phi[k * side + edge.tail % side].abs();
    let c = at(2) * 4.0;
    let values: Vec<(usize, f64)> = [2, 4, 8].into_iter().map(|k| (k, at(k))).collect();
    for pair in values.windows(2) {
        ensure(pair[1].1 < pair[0].1, || format!("not decreasing: {values:?}"))?;
    }
    for &(k, v) in &values {
        let ceiling = c / (k * k) as f64;
        ensure(v <= ceiling, || format!("k = {k}: |φ| = {v:e} > C/k² = {ceiling:e}"))?;
    }
    let fmt: Vec<String> = values.iter().map(|(k, v)| format!("k={k}: {v:.3e}")).collect();
    Ok(format!("{} with C = {c:.4}", fmt.join(", ")))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("AC1 projection identities", ac1_projection_identities),
        ("AC2 parallel-paths Δ exact", ac2_parallel_paths),
        ("AC3 probability method agreement", ac3_probability_methods),
        ("AC4 Schur proposition sweeps", ac4_proposition_sweeps),
        ("AC5 local-energy constant", ac5_local_energy),
        ("AC6 elimination trace soundness", ac6_elimination_traces),
        ("AC7 scaling of ΣΔ and ‖Π̄‖", ac7_scaling),
        ("AC8 routing", ac8_routing),
        ("AC9 grid potential decay", ac9_grid_decay),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
