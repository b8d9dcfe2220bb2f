//! `elflow` command-line front end.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 numerical failure,
//! 3 when a `verify` record fails.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use elflow_core::electrical::{analyze, ImpedanceMode};
use elflow_core::graph::write_edge_list;
use elflow_core::localization::{degree_profile, harmonic_bound, run_elimination, theorem4_check, EliminationOptions};
use elflow_core::routing::{route_demands, DemandSet};
use elflow_core::schur::{hitting_probabilities, schur_complement, ProbabilityMethod};
use elflow_core::{generate_family, read_graph, EdgeVector, Error, Family, Graph};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "elflow", version, about = "Electrical flows, transfer impedance and Schur elimination on graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct GraphArgs {
    /// Edge-list file, or a family spec such as `family:torus:8` or `torus:8`.
    #[arg(long)]
    graph: String,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the graph as an edge list.
    Generate(GraphArgs),
    /// Transfer-impedance summary and per-edge flow statistics.
    Analyze {
        #[command(flatten)]
        io: GraphArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long, value_enum, default_value_t = Mode::Auto)]
        mode: Mode,
    },
    /// Greedy elimination trace as JSON lines.
    Eliminate {
        #[command(flatten)]
        io: GraphArgs,
        /// `ones`, or a file with one nonnegative weight per edge.
        #[arg(long, default_value = "ones")]
        w: String,
        /// Skip computing V_i at every step.
        #[arg(long)]
        skip_vi: bool,
    },
    /// Randomized checks of the Schur-complement and localization bounds.
    Verify {
        #[command(flatten)]
        io: GraphArgs,
        #[arg(long, value_enum, default_value_t = Prop::All)]
        prop: Prop,
        /// Random instances per property.
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Route demands on electrical flows.
    Route {
        #[command(flatten)]
        io: GraphArgs,
        /// Demand file, or inline `s t amount` triples separated by `;`.
        #[arg(long)]
        demands: String,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Auto,
    Dense,
    Streaming,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Prop {
    SumPotentials,
    NormEnergy,
    SchurConductance,
    LocalEnergy,
    Probabilities,
    Theorem4,
    All,
}

impl Prop {
    const EACH: [Prop; 6] = [
        Prop::SumPotentials,
        Prop::NormEnergy,
        Prop::SchurConductance,
        Prop::LocalEnergy,
        Prop::Probabilities,
        Prop::Theorem4,
    ];

    fn name(self) -> &'static str {
        match self {
            Prop::SumPotentials => "sum_potentials",
            Prop::NormEnergy => "norm_energy",
            Prop::SchurConductance => "schur_conductance",
            Prop::LocalEnergy => "local_energy",
            Prop::Probabilities => "probabilities",
            Prop::Theorem4 => "theorem4",
            Prop::All => "all",
        }
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Core(Error),
    Io(io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.into())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(io::Error::other(e))
    }
}

#[derive(Debug, Serialize)]
struct VerifyRecord<'a> {
    prop: &'static str,
    graph: &'a str,
    params: Value,
    lhs: f64,
    rhs: f64,
    ok: bool,
}

/// Runs the CLI on `argv` (including the program name) and returns the exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_VERIFY_FAILED,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Io(e)) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
        Err(CliError::Core(e)) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_USAGE
            }
        }
    }
}

/// Returns `Ok(false)` when a verification record failed.
fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Generate(io) => {
            let g = load_graph(&io.graph)?;
            let mut out = open_output(io.out.as_deref())?;
            out.write_all(write_edge_list(&g).as_bytes())?;
        }
        Command::Analyze { io, format, mode } => {
            let g = load_graph(&io.graph)?;
            let mode = match mode {
                Mode::Auto => ImpedanceMode::Auto,
                Mode::Dense => ImpedanceMode::Dense,
                Mode::Streaming => ImpedanceMode::Streaming,
            };
            let report = analyze(&g, mode)?;
            let mut out = open_output(io.out.as_deref())?;
            match format {
                Format::Json => {
                    serde_json::to_writer_pretty(&mut out, &report)?;
                    writeln!(out)?;
                }
                Format::Csv => {
                    let mut csv = csv::Writer::from_writer(out);
                    for row in &report.per_edge {
                        csv.serialize(row)?;
                    }
                    csv.flush()?;
                }
            }
        }
        Command::Eliminate { io, w, skip_vi } => {
            let g = load_graph(&io.graph)?;
            let w = load_weights(&w, &g)?;
            let trace = run_elimination(&g, &w, EliminationOptions { compute_values: !skip_vi })?;
            let mut out = open_output(io.out.as_deref())?;
            for step in &trace.steps {
                serde_json::to_writer(&mut out, step)?;
                writeln!(out)?;
            }
            let summary = json!({
                "summary": true,
                "steps": trace.steps.len(),
                "terminal": trace.terminal,
                "V_0": trace.initial_value(),
                "max_slack": trace.max_slack(),
                "harmonic_bound": harmonic_bound(g.n_vertices(), w.norm_squared()),
            });
            serde_json::to_writer(&mut out, &summary)?;
            writeln!(out)?;
        }
        Command::Verify { io, prop, samples, seed } => {
            let g = load_graph(&io.graph)?;
            let props: Vec<Prop> = if prop == Prop::All { Prop::EACH.to_vec() } else { vec![prop] };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut out = open_output(io.out.as_deref())?;
            let mut all_ok = true;
            for p in props {
                for record in verify(&g, &io.graph, p, samples, &mut rng)? {
                    all_ok &= record.ok;
                    serde_json::to_writer(&mut out, &record)?;
                    writeln!(out)?;
                }
            }
            return Ok(all_ok);
        }
        Command::Route { io, demands } => {
            let g = load_graph(&io.graph)?;
            let demands = if Path::new(&demands).is_file() {
                DemandSet::read(&demands)?
            } else {
                DemandSet::parse(&demands.replace(';', "\n"), "<inline demands>")?
            };
            let report = route_demands(&g, &demands)?;
            let mut out = open_output(io.out.as_deref())?;
            serde_json::to_writer_pretty(&mut out, &report)?;
            writeln!(out)?;
        }
    }
    Ok(true)
}

fn load_graph(spec: &str) -> Result<Graph, CliError> {
    if let Some(rest) = spec.strip_prefix("family:") {
        let family: Family = rest.parse().map_err(CliError::Core)?;
        return Ok(generate_family(family)?);
    }
    if Path::new(spec).exists() {
        return Ok(read_graph(spec)?);
    }
    match spec.parse::<Family>() {
        Ok(family) => Ok(generate_family(family)?),
        Err(_) => Err(CliError::Usage(format!("`{spec}` is neither a readable file nor a family spec"))),
    }
}

fn load_weights(spec: &str, g: &Graph) -> Result<EdgeVector, CliError> {
    if spec == "ones" {
        return Ok(EdgeVector::ones(g.n_edges()));
    }
    let text = fs::read_to_string(spec)?;
    let values = text
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| CliError::Usage(format!("bad weight `{t}` in {spec}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if values.len() != g.n_edges() {
        return Err(CliError::Usage(format!("{spec} has {} weights, graph has {} edges", values.len(), g.n_edges())));
    }
    Ok(EdgeVector::weights(values)?)
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn random_subset(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let size = rng.gen_range(2..=n);
    let mut all: Vec<usize> = (0..n).collect();
    all.shuffle(rng);
    all.truncate(size);
    all.sort_unstable();
    all
}

fn verify<'a>(
    g: &Graph,
    graph_id: &'a str,
    prop: Prop,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<VerifyRecord<'a>>, CliError> {
    let n = g.n_vertices();
    if n < 2 {
        return Err(CliError::Usage("verification needs at least two vertices".into()));
    }
    let record = |params: Value, lhs: f64, rhs: f64, ok: bool| VerifyRecord { prop: prop.name(), graph: graph_id, params, lhs, rhs, ok };
    let mut records = Vec::new();
    if prop == Prop::Theorem4 {
        let w = EdgeVector::ones(g.n_edges());
        let check = theorem4_check(g, &w)?;
        let params = json!({ "w": "ones", "quadratic_form": check.quadratic_form });
        records.push(record(params, check.lhs, check.harmonic_bound, check.ok));
        return Ok(records);
    }
    for _ in 0..samples {
        let s = random_subset(rng, n);
        match prop {
            Prop::SumPotentials => {
                let sys = schur_complement(g, &s)?;
                let (mut worst, mut edge) = (0.0, 0);
                for e in 0..g.n_edges() {
                    let sum = sys.sum_potentials(e)?;
                    if sum > worst {
                        (worst, edge) = (sum, e);
                    }
                }
                records.push(record(json!({ "S": s, "edge": edge }), worst, 3.0, worst <= 3.0));
            }
            Prop::NormEnergy => {
                let v = s[rng.gen_range(0..s.len())];
                let p = rng.gen_range(0.001..0.999);
                let c = schur_complement(g, &s)?.norm_energy(v, p)?;
                let ok = c.lhs <= c.rhs * (1.0 + 1e-12);
                records.push(record(json!({ "S": s, "v": v, "p": p }), c.lhs, c.rhs, ok));
            }
            Prop::SchurConductance => {
                let v = s[rng.gen_range(0..s.len())];
                let c = schur_complement(g, &s)?.schur_conductance(v)?;
                records.push(record(json!({ "S": s, "v": v }), c.lhs, c.rhs, c.relative_gap() <= 1e-8));
            }
            Prop::LocalEnergy => {
                let random = rng.gen_bool(0.5);
                let w = if random {
                    EdgeVector::weights((0..g.n_edges()).map(|_| rng.gen_range(0.0..3.0)).collect())?
                } else {
                    EdgeVector::ones(g.n_edges())
                };
                let profile = degree_profile(g, &s, &w)?;
                let params = json!({ "S": s, "w": if random { "random" } else { "ones" } });
                records.push(record(params, profile.sum, profile.bound, profile.holds()));
            }
            Prop::Probabilities => {
                let block = hitting_probabilities(g, &s, ProbabilityMethod::Block)?;
                let ident = hitting_probabilities(g, &s, ProbabilityMethod::Identify)?;
                let walk = hitting_probabilities(g, &s, ProbabilityMethod::WalkOracle)?;
                let gap = block.max_abs_diff(&ident).max(block.max_abs_diff(&walk));
                records.push(record(json!({ "S": s }), gap, 1e-8, gap <= 1e-8));
            }
            Prop::Theorem4 | Prop::All => unreachable!("handled above"),
        }
    }
    Ok(records)
}
