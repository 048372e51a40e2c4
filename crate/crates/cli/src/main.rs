mod report;
mod topology;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lattice_net::metrics::{closed_form, distance_summary, throughput_bound, BoundKind, Rational};
use lattice_net::routing::{dor_path, verify_minimality, MinimalityReport, Router, RouterKind};
use lattice_net::simulator::{default_threads, run_simulation, sweep, SimConfig, SweepRow};
use lattice_net::symmetry::stabilizer;
use lattice_net::{common_lift, Error, IntMatrix, IntVector, LatticeGraph, RoutingRecord, TieBreak, TopologyKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use report::{emit_one, emit_report, json, Format, Tabular};
use topology::{parse_part, TopologyArgs};

#[derive(Parser, Debug)]
#[command(name = "lattice-net", version, about = "Analyze, route and simulate lattice-graph networks")]
struct Cli {
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Order, diameter, average distance and throughput bound.
    Analyze {
        #[command(flatten)]
        topology: TopologyArgs,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Linear-symmetry check via the signed-permutation stabilizer.
    Symmetry {
        #[command(flatten)]
        topology: TopologyArgs,
    },
    /// Minimal routing record and dimension-order path between two vertices.
    Route {
        #[command(flatten)]
        topology: TopologyArgs,
        #[arg(long)]
        from: IntVector,
        #[arg(long)]
        to: IntVector,
        /// Defaults to the closed-form router when the family has one.
        #[arg(long, value_enum)]
        router: Option<RouterArg>,
        /// Break ties at random with this seed instead of lexicographically.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compare a router against BFS distances.
    Verify {
        #[command(flatten)]
        topology: TopologyArgs,
        #[arg(long, value_enum, default_value = "generic")]
        router: RouterArg,
        /// Random pairs checked on graphs too large for all pairs.
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Common lift of two or more topologies, e.g. `lift --a 2 pc2a bcc`.
    Lift {
        /// Components such as pc2a, bcc, fcc:4 or torus:8x8.
        parts: Vec<String>,
        #[arg(long)]
        a: Option<i64>,
        /// Literal generator matrices, in place of named components.
        #[arg(long)]
        matrix: Vec<String>,
    },
    /// Run one simulation from a JSON configuration file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the configuration.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Load sweep averaged over several seeds.
    Sweep {
        /// JSON configuration used as the template for every point.
        #[arg(long)]
        config: PathBuf,
        /// Offered loads, e.g. 0.1,0.2,0.5. May be empty.
        #[arg(long, allow_hyphen_values = true)]
        loads: String,
        #[arg(long, default_value_t = 5)]
        seeds: usize,
        /// Worker threads; defaults to LATTICE_NET_THREADS or the core count.
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RouterArg {
    Specialized,
    Generic,
    Torus,
}

impl From<RouterArg> for RouterKind {
    fn from(r: RouterArg) -> Self {
        match r {
            RouterArg::Specialized => RouterKind::Specialized,
            RouterArg::Generic => RouterKind::Generic,
            RouterArg::Torus => RouterKind::Torus,
        }
    }
}

enum Failure {
    /// Bad input: exit code 2.
    Usage(String),
    /// The command ran and found a problem: exit code 1.
    Validation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Overflow(_) | Error::ResourceLimit(_) | Error::Invariant(_) => Failure::Validation(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = Result<(String, bool), Failure>;

fn ratio(r: Rational) -> String {
    r.to_string()
}

#[derive(Serialize)]
struct ClosedFormCheck {
    diameter: u32,
    average: String,
    matches: bool,
}

#[derive(Serialize)]
struct Analysis {
    nodes: u64,
    diameter: u32,
    average: String,
    topology: String,
    a: Option<i64>,
    dimension: usize,
    hermite: IntMatrix,
    avg_num: i64,
    avg_den: i64,
    symmetric: Option<bool>,
    bound_kind: BoundKind,
    bound_num: i64,
    bound_den: i64,
    bound: f64,
    histogram: Vec<u64>,
    per_dim_average: Vec<String>,
    closed_form: Option<ClosedFormCheck>,
}

impl Tabular for Analysis {
    const HEADERS: &'static [&'static str] =
        &["topology", "a", "nodes", "diameter", "avg_num", "avg_den", "bound_num", "bound_den"];
    fn cells(&self) -> Vec<String> {
        vec![
            self.topology.clone(),
            self.a.map(|a| a.to_string()).unwrap_or_default(),
            self.nodes.to_string(),
            self.diameter.to_string(),
            self.avg_num.to_string(),
            self.avg_den.to_string(),
            self.bound_num.to_string(),
            self.bound_den.to_string(),
        ]
    }
}

impl Tabular for SweepRow {
    const HEADERS: &'static [&'static str] = &["topology", "pattern", "offered", "accepted", "avg_latency", "seed_count"];
    fn cells(&self) -> Vec<String> {
        vec![
            self.topology.clone(),
            self.pattern.name().to_string(),
            format!("{:.4}", self.offered),
            format!("{:.6}", self.accepted),
            format!("{:.3}", self.avg_latency),
            self.seed_count.to_string(),
        ]
    }
}

/// `None` when the dimension is beyond the stabilizer scan.
fn is_symmetric(m: &IntMatrix) -> Result<Option<bool>, Error> {
    match stabilizer(m) {
        Ok(s) => Ok(Some(s.symmetric)),
        Err(Error::UnsupportedDimension(..)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn analyze(args: &TopologyArgs, format: Format) -> Outcome {
    let kind = args.kind()?;
    let g = LatticeGraph::new(kind.matrix()?)?;
    let s = distance_summary(&g)?;
    let symmetric = is_symmetric(g.generator())?;
    let bound = throughput_bound(&g, &s, symmetric.unwrap_or(false))?;
    let closed = closed_form(&kind).ok().map(|c| ClosedFormCheck {
        diameter: c.diameter,
        average: ratio(c.average),
        matches: c.diameter == s.diameter && c.average == s.average,
    });
    let report = Analysis {
        nodes: s.nodes,
        diameter: s.diameter,
        average: ratio(s.average),
        topology: kind.to_string(),
        a: args.side(),
        dimension: g.dim(),
        hermite: g.hermite().clone(),
        avg_num: *s.average.numer(),
        avg_den: *s.average.denom(),
        symmetric,
        bound_kind: bound.kind,
        bound_num: *bound.value.numer(),
        bound_den: *bound.value.denom(),
        bound: *bound.value.numer() as f64 / *bound.value.denom() as f64,
        histogram: s.histogram,
        per_dim_average: s.per_dim_average.into_iter().map(ratio).collect(),
        closed_form: closed,
    };
    Ok((emit_one(&report, format), true))
}

#[derive(Serialize)]
struct SymmetryReport {
    topology: String,
    symmetric: bool,
    stabilizer_size: usize,
    /// For each axis `i`, a stabilizer member sending `e_1` to `±e_i`.
    witnesses: Vec<Option<String>>,
}

fn symmetry(args: &TopologyArgs) -> Outcome {
    let kind = args.kind()?;
    let s = stabilizer(&kind.matrix()?)?;
    let report = SymmetryReport {
        topology: kind.to_string(),
        symmetric: s.symmetric,
        stabilizer_size: s.members.len(),
        witnesses: s.witnesses.iter().map(|w| w.as_ref().map(|p| p.to_string())).collect(),
    };
    Ok((json(&report), true))
}

#[derive(Serialize)]
struct RouteReport {
    topology: String,
    router: RouterKind,
    source: Vec<i64>,
    destination: Vec<i64>,
    record: RoutingRecord,
    norm: u64,
    path: Vec<Vec<i64>>,
}

fn route(args: &TopologyArgs, from: &IntVector, to: &IntVector, router: Option<RouterArg>, seed: Option<u64>) -> Outcome {
    let kind = args.kind()?;
    let g = LatticeGraph::new(kind.matrix()?)?;
    let (vs, vd) = (g.reduce(from)?, g.reduce(to)?);
    let (router_kind, router) = match router {
        Some(r) => (r.into(), Router::build(r.into(), &kind, &g)?),
        None => match Router::specialized(&kind) {
            Ok(r) => (RouterKind::Specialized, r),
            Err(_) => (RouterKind::Generic, Router::generic(&g)?),
        },
    };
    let record = match seed {
        Some(seed) => router.route(&vs, &vd, &mut TieBreak::Random(&mut ChaCha8Rng::seed_from_u64(seed)))?,
        None => router.route(&vs, &vd, &mut TieBreak::Canonical)?,
    };
    let path = dor_path(&g, &vs, &record)?;
    let report = RouteReport {
        topology: kind.to_string(),
        router: router_kind,
        source: vs.0,
        destination: vd.0,
        norm: record.norm(),
        record,
        path: path.into_iter().map(|v| v.0).collect(),
    };
    Ok((json(&report), true))
}

#[derive(Serialize)]
struct VerifyReport {
    topology: String,
    router: RouterKind,
    #[serde(flatten)]
    report: MinimalityReport,
}

fn verify(args: &TopologyArgs, router: RouterArg, samples: usize, seed: u64, as_json: bool) -> Outcome {
    let kind = args.kind()?;
    let g = LatticeGraph::new(kind.matrix()?)?;
    let r = Router::build(router.into(), &kind, &g)?;
    let report = verify_minimality(&g, &r, samples, seed)?;
    let ok = report.violations.is_empty();
    let text = if as_json {
        json(&VerifyReport { topology: kind.to_string(), router: router.into(), report })
    } else {
        let mut out = format!(
            "{kind}: {} pairs checked, {} violations\n",
            report.pairs_checked,
            report.violations.len()
        );
        for v in report.violations.iter().take(10) {
            out += &format!(
                "  {} -> {}: record {} reaches {}, BFS distance {}\n",
                v.source, v.destination, v.record, v.reached, v.distance
            );
        }
        out
    };
    Ok((text, ok))
}

#[derive(Serialize)]
struct LiftReport {
    parts: Vec<String>,
    dimension: usize,
    order: u64,
    generator: IntMatrix,
    hermite: IntMatrix,
}

fn lift(parts: &[String], a: Option<i64>, matrices: &[String]) -> Outcome {
    let mut kinds: Vec<TopologyKind> = parts.iter().map(|p| parse_part(p, a)).collect::<Result<_, _>>()?;
    for m in matrices {
        kinds.push(TopologyKind::Custom { matrix: m.parse()? });
    }
    if kinds.len() < 2 {
        return Err(Failure::Usage("lift needs at least two components".into()));
    }
    let mut m = kinds[0].matrix()?;
    for k in &kinds[1..] {
        m = common_lift(&m, &k.matrix()?)?;
    }
    let g = LatticeGraph::new(m.clone())?;
    let report = LiftReport {
        parts: kinds.iter().map(|k| k.to_string()).collect(),
        dimension: g.dim(),
        order: g.order(),
        generator: m,
        hermite: g.hermite().clone(),
    };
    Ok((json(&report), true))
}

fn load_config(path: &PathBuf) -> Result<SimConfig, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn parse_loads(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| Failure::Usage(format!("bad load {t:?}"))))
        .collect()
}

fn dispatch(command: &Command) -> Outcome {
    match command {
        Command::Analyze { topology, format } => analyze(topology, *format),
        Command::Symmetry { topology } => symmetry(topology),
        Command::Route { topology, from, to, router, seed } => route(topology, from, to, *router, *seed),
        Command::Verify { topology, router, samples, seed, json } => verify(topology, *router, *samples, *seed, *json),
        Command::Lift { parts, a, matrix } => lift(parts, *a, matrix),
        Command::Simulate { config, seed } => {
            let mut config = load_config(config)?;
            if let Some(seed) = seed {
                config.seed = *seed;
            }
            let stats = run_simulation(&config)?;
            Ok((json(&stats), true))
        }
        Command::Sweep { config, loads, seeds, threads, format } => {
            let template = load_config(config)?;
            let loads = parse_loads(loads)?;
            let rows = sweep(&template, &loads, *seeds, threads.unwrap_or_else(default_threads))?;
            Ok((emit_report(&rows, *format), true))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok((text, ok)) => {
            let written = match &cli.output {
                Some(path) => std::fs::write(path, &text).map_err(|e| format!("{}: {e}", path.display())),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            match written {
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
                Ok(()) if ok => ExitCode::SUCCESS,
                Ok(()) => ExitCode::from(1),
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
