use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use beamqubo::baseline::{best_fit, input_order, shuffled_order};
use beamqubo::geometry::{build_proximity_graph, GeoPoint};
use beamqubo::harness::{
    draw_users, run_experiment, solve_instance, write_outputs, BackendKind, BoundingBox, Dataset,
    ExperimentConfig,
};
use beamqubo::presolve::{build_reduced_hamiltonian, presolve_with};
use beamqubo::qubo::{build_qubo, ProblemInstance};
use beamqubo::Error;

#[derive(Parser)]
#[command(name = "beamqubo", version, about = "Satellite beam placement as a clique-cover QUBO")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the full QUBO for one instance.
    Build {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of users.
        #[arg(long)]
        users: Option<usize>,
    },
    /// Run the presolve and report what is left for the annealer.
    Presolve {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        users: Option<usize>,
    },
    /// Presolve, anneal and merge one instance; compare with Best Fit.
    Solve {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        users: Option<usize>,
    },
    /// Run many realizations per user count and write records and a summary.
    Bench {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated user counts.
        #[arg(long, value_delimiter = ',')]
        users: Option<Vec<usize>>,
        #[arg(long)]
        realizations: Option<usize>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// JSON experiment config; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    alpha_deg: Option<f64>,
    #[arg(long)]
    capacity: Option<usize>,
    /// Beam budget (default: one per user).
    #[arg(long)]
    beams: Option<usize>,
    #[arg(long, value_parser = parse_backend)]
    backend: Option<BackendKind>,
    #[arg(long)]
    sweeps: Option<usize>,
    #[arg(long)]
    reads: Option<usize>,
    /// AIS CSV file; requires --bbox.
    #[arg(long)]
    ais: Option<PathBuf>,
    /// Bounding box as w,s,e,n in degrees.
    #[arg(long, allow_hyphen_values = true)]
    bbox: Option<String>,
    /// Synthetic data: number of clusters.
    #[arg(long)]
    clusters: Option<usize>,
    /// Synthetic data: cluster radius in degrees.
    #[arg(long)]
    spread_deg: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    sat_lat: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    sat_lon: Option<f64>,
    /// Satellite altitude in km.
    #[arg(long)]
    sat_alt: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    shuffle_seed: Option<u64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    allow_active_beam_join: bool,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_backend(s: &str) -> Result<BackendKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl Failure {
    fn config(e: impl ToString) -> Self {
        Self::Config(e.to_string())
    }

    fn runtime(e: impl ToString) -> Self {
        Self::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Build { common, users } => {
            let (cfg, n) = single(&common, users)?;
            let inst = instance(&cfg, n)?;
            let lambda = cfg.lambda.unwrap_or(inst.default_lambda());
            let (q, _) = build_qubo(&inst, lambda)
                .map_err(Failure::runtime)?;
            eprintln!(
                "users {} edges {} beams {} capacity {} qubits {} nonzeros {}",
                n,
                inst.graph.edge_count(),
                inst.beams,
                inst.capacity,
                q.size(),
                q.nnz()
            );
            match &common.out {
                Some(dir) => {
                    write(dir, "qubo.txt", &q.to_text())?;
                    write(dir, "graph.txt", &inst.graph.to_edge_list())
                }
                None => emit(&q.to_text()),
            }
        }
        Command::Presolve { common, users } => {
            let (cfg, n) = single(&common, users)?;
            let inst = instance(&cfg, n)?;
            let options = cfg.presolve_options();
            let state = presolve_with(&inst, &options).map_err(Failure::runtime)?;
            let report = state.report(options.allow_active_beam_join);
            emit(&report.to_string())?;
            if let Some(dir) = &common.out {
                let text = serde_json::to_string_pretty(&report).map_err(Failure::runtime)?;
                write(dir, "presolve.json", &text)?;
                if !state.is_complete() {
                    let rh = build_reduced_hamiltonian(&state, &inst, &options)
                        .map_err(Failure::runtime)?;
                    write(dir, "reduced_qubo.txt", &rh.qubo.to_text())?;
                }
            }
            Ok(())
        }
        Command::Solve { common, users } => {
            let (cfg, n) = single(&common, users)?;
            let inst = instance(&cfg, n)?;
            let order = match cfg.shuffle_seed {
                Some(s) => shuffled_order(n, s),
                None => input_order(n),
            };
            let bf = best_fit(&inst, &order).map_err(Failure::runtime)?;
            let outcome = solve_instance(&inst, &cfg.presolve_options(), &cfg.backend, cfg.seed)
                .map_err(Failure::runtime)?;
            let sol = &outcome.solution;
            println!("beams: {}", sol.objective);
            println!("feasible: {}", sol.is_feasible());
            println!("violations: {}", sol.violations.len());
            println!("best_fit_beams: {}", bf.objective);
            println!("lp_lower_bound: {:.6}", outcome.state.lp_lower_bound);
            println!("qubits_full: {}", outcome.qubits_full);
            println!("qubits_reduced: {}", outcome.qubits_reduced.unwrap_or(0));
            println!("reduction_ratio: {:.6}", outcome.reduction_ratio());
            println!(
                "solved_by: {}",
                if outcome.sample.is_some() { "annealer" } else { "presolve-only" }
            );
            if let Some(dir) = &common.out {
                let beams: Vec<Vec<usize>> = (0..inst.beams)
                    .filter(|&b| sol.active[b])
                    .map(|b| sol.members(b))
                    .collect();
                let doc = json!({
                    "beams": beams,
                    "objective": sol.objective,
                    "feasible": sol.is_feasible(),
                    "violations": sol.violations,
                    "best_fit_objective": bf.objective,
                    "lp_lower_bound": outcome.state.lp_lower_bound,
                    "qubits_full": outcome.qubits_full,
                    "qubits_reduced": outcome.qubits_reduced,
                });
                let text = serde_json::to_string_pretty(&doc).map_err(Failure::runtime)?;
                write(dir, "solution.json", &text)?;
            }
            Ok(())
        }
        Command::Bench {
            common,
            users,
            realizations,
            threads,
        } => {
            let mut cfg = config(&common)?;
            if let Some(u) = users {
                cfg.user_counts = u;
            }
            if let Some(r) = realizations {
                cfg.realizations = r;
            }
            if threads.is_some() {
                cfg.threads = threads;
            }
            cfg.validate().map_err(Failure::config)?;
            let out = common.out.clone().unwrap_or_else(|| PathBuf::from("results"));
            let output = run_experiment(&cfg).map_err(Failure::runtime)?;
            write_outputs(&out, &output).map_err(Failure::runtime)?;
            let text = serde_json::to_string_pretty(&output.summary).map_err(Failure::runtime)?;
            emit(&format!("{text}\n"))?;
            eprintln!("wrote {}", out.display());
            Ok(())
        }
    }
}

/// Config file (or defaults) with command-line overrides applied.
fn config(args: &CommonArgs) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            ExperimentConfig::from_json(&text).map_err(Failure::config)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(v) = args.alpha_deg {
        cfg.alpha_deg = v;
    }
    if let Some(v) = args.capacity {
        cfg.capacity = v;
    }
    if args.beams.is_some() {
        cfg.beams = args.beams;
    }
    if let Some(v) = args.backend {
        cfg.backend.kind = v;
    }
    if let Some(v) = args.sweeps {
        cfg.backend.sweeps = v;
    }
    if let Some(v) = args.reads {
        cfg.backend.reads = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if args.shuffle_seed.is_some() {
        cfg.shuffle_seed = args.shuffle_seed;
    }
    if args.lambda.is_some() {
        cfg.lambda = args.lambda;
    }
    if args.allow_active_beam_join {
        cfg.allow_active_beam_join = true;
    }
    if args.sat_lat.is_some() || args.sat_lon.is_some() || args.sat_alt.is_some() {
        let s = cfg.satellite;
        cfg.satellite = GeoPoint::new(
            args.sat_lat.unwrap_or(s.latitude),
            args.sat_lon.unwrap_or(s.longitude),
            args.sat_alt.unwrap_or(s.altitude),
        )
        .map_err(Failure::config)?;
    }
    let bbox = args
        .bbox
        .as_deref()
        .map(str::parse::<BoundingBox>)
        .transpose()
        .map_err(Failure::config)?;
    if let Some(path) = &args.ais {
        let Some(bbox) = bbox else {
            return Err(Failure::Config("--ais needs an explicit --bbox w,s,e,n".into()));
        };
        cfg.dataset = Dataset::Ais {
            path: path.clone(),
            bbox,
        };
    } else if bbox.is_some() || args.clusters.is_some() || args.spread_deg.is_some() {
        match &mut cfg.dataset {
            Dataset::Synthetic(p) => {
                p.clusters = args.clusters.unwrap_or(p.clusters);
                p.spread_deg = args.spread_deg.unwrap_or(p.spread_deg);
                p.bbox = bbox.unwrap_or(p.bbox);
            }
            Dataset::Ais { bbox: b, .. } => {
                if args.clusters.is_some() || args.spread_deg.is_some() {
                    return Err(Failure::Config(
                        "--clusters and --spread-deg apply to synthetic data only".into(),
                    ));
                }
                *b = bbox.unwrap_or(*b);
            }
        }
    }
    Ok(cfg)
}

/// Config plus the single user count for build, presolve and solve.
fn single(args: &CommonArgs, users: Option<usize>) -> Result<(ExperimentConfig, usize), Failure> {
    let mut cfg = config(args)?;
    let n = match users {
        Some(n) => n,
        None => match cfg.user_counts[..] {
            [n] => n,
            _ => return Err(Failure::Config("pass --users N".into())),
        },
    };
    cfg.user_counts = vec![n];
    cfg.validate().map_err(Failure::config)?;
    Ok((cfg, n))
}

fn instance(cfg: &ExperimentConfig, n: usize) -> Result<ProblemInstance, Failure> {
    let geom = cfg.geometry().map_err(Failure::config)?;
    let users = draw_users(&cfg.dataset, n, cfg.seed).map_err(|e| match &cfg.dataset {
        Dataset::Ais { path, .. } => Failure::Runtime(format!("{}: {e}", path.display())),
        Dataset::Synthetic(_) => Failure::runtime(e),
    })?;
    let graph = build_proximity_graph(&users, &geom).map_err(Failure::runtime)?;
    ProblemInstance::new(graph, cfg.beams.unwrap_or(n), cfg.capacity).map_err(Failure::config)
}

/// Writes to stdout; a closed pipe (as with `| head`) is not an error.
fn emit(text: &str) -> Result<(), Failure> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::runtime(e)),
        _ => Ok(()),
    }
}

fn write(dir: &Path, name: &str, text: &str) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Runtime(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

