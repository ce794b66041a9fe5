//! Command-line front door: each pipeline stage exposed as a subcommand for
//! scripting and reproduction. Outputs are line-oriented and parseable
//! without lookahead; exit codes are 0 (success), 2 (input validation),
//! 3 (capability refusal), 1 (everything else).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use patdiv::asrgraph::{build_graph, EdgeWeightedGraph};
use patdiv::channel::{parse_geometry_csv, support_set};
use patdiv::coloring::{esa_oracle, ewvc_pd, objective_f, DEFAULT_ORACLE_CAP};
use patdiv::simharness::{run_experiment, write_per_trial, write_report, ExperimentConfig};
use patdiv::textfmt::sig9;
use patdiv::Error;

#[derive(Parser)]
#[command(
    name = "patdiv",
    version,
    about = "Pattern-division precoding pipeline: supports, overlap graphs, coloring, simulation",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print each cluster's DFT support set from a geometry file
    /// (CSV rows `id,theta_deg,distance_m,ring_radius_m`)
    Supports {
        geometry: PathBuf,
        /// Antenna count
        #[arg(long = "M", default_value_t = 32)]
        antennas: usize,
        /// Antenna-spacing-to-wavelength ratio
        #[arg(long = "D", default_value_t = 0.5)]
        spacing: f64,
    },
    /// Build the ASR-overlap graph from a geometry file and print it as an
    /// edge list (`ewg <G> <P>` header, then `g g' weight` lines)
    Graph {
        geometry: PathBuf,
        #[arg(long = "M", default_value_t = 32)]
        antennas: usize,
        #[arg(long = "D", default_value_t = 0.5)]
        spacing: f64,
        /// Orthogonalization-gain constant in (0, 1]
        #[arg(long, default_value_t = 1.0)]
        epsilon: f64,
        /// Omit edges with weight at or below this threshold
        #[arg(long = "wmin", default_value_t = 0.0)]
        weight_min: f64,
        /// Pattern-count hint written into the header
        #[arg(long = "P", default_value_t = 2)]
        patterns: usize,
    },
    /// Color an edge-list graph file with the two-phase heuristic; prints
    /// `cluster pattern` lines (patterns numbered from 1), `f <value>` and
    /// `phase2_bypassed <bool>`
    Color {
        graph: PathBuf,
        /// Pattern budget; defaults to the file's header hint
        #[arg(long = "P")]
        patterns: Option<usize>,
    },
    /// Compare the heuristic against the exhaustive oracle on a graph file
    OracleCompare {
        graph: PathBuf,
        #[arg(long = "P")]
        patterns: Option<usize>,
        /// Vertex ceiling for the exhaustive search
        #[arg(long = "oracle-cap", default_value_t = DEFAULT_ORACLE_CAP)]
        oracle_cap: usize,
    },
    /// Run a Monte-Carlo experiment from a JSON config and write the report
    /// CSV it names
    Simulate {
        config: PathBuf,
        /// Override the config's RNG seed
        #[arg(long)]
        seed: Option<u64>,
        /// Also write a per-trial CSV to this path
        #[arg(long = "per-trial")]
        per_trial: Option<PathBuf>,
        /// Override the exhaustive-search vertex ceiling
        #[arg(long = "oracle-cap")]
        oracle_cap: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::InvalidConfig(violations)) => {
            eprintln!("error: invalid config:");
            for violation in &violations {
                eprintln!("  {violation}");
            }
            ExitCode::from(2)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::OracleCap { .. } => 3,
        Error::Parse { .. }
        | Error::InvalidInput(_)
        | Error::InvalidConfig(_)
        | Error::IncompleteAssignment(_) => 2,
        _ => 1,
    }
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn load_graph(path: &Path, patterns: Option<usize>) -> Result<(EdgeWeightedGraph, usize), Error> {
    let (graph, hint) = EdgeWeightedGraph::from_edge_list(&read(path)?)?;
    let patterns = patterns.unwrap_or(hint);
    if patterns < 1 {
        return Err(Error::InvalidInput(
            "pattern count must be at least 1".to_string(),
        ));
    }
    if graph.num_edges() > 0 && patterns < 2 {
        return Err(Error::InvalidInput(
            "graphs with edges need at least two patterns".to_string(),
        ));
    }
    Ok((graph, patterns))
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Supports { geometry, antennas, spacing } => {
            if antennas < 1 || !(spacing > 0.0) {
                return Err(Error::InvalidInput(
                    "need M >= 1 and D > 0".to_string(),
                ));
            }
            for geom in parse_geometry_csv(&read(&geometry)?) {
                let support = support_set(&geom, antennas, spacing);
                if support.is_empty() {
                    println!("{}:", geom.id);
                } else {
                    println!("{}: {}", geom.id, support.canonical());
                }
            }
            Ok(())
        }
        Command::Graph { geometry, antennas, spacing, epsilon, weight_min, patterns } => {
            if antennas < 1 || !(spacing > 0.0) {
                return Err(Error::InvalidInput("need M >= 1 and D > 0".to_string()));
            }
            if !(epsilon > 0.0 && epsilon <= 1.0) {
                return Err(Error::InvalidInput("epsilon must lie in (0, 1]".to_string()));
            }
            if !(weight_min >= 0.0) {
                return Err(Error::InvalidInput("wmin must be non-negative".to_string()));
            }
            let geoms = parse_geometry_csv(&read(&geometry)?);
            let supports: Vec<_> = geoms?
                .iter()
                .map(|g| support_set(g, antennas, spacing))
                .collect();
            let graph = build_graph(&supports, epsilon, weight_min);
            print!("{}", graph.to_edge_list(patterns));
            Ok(())
        }
        Command::Color { graph, patterns } => {
            let (graph, patterns) = load_graph(&graph, patterns)?;
            let (assignment, trace) = ewvc_pd(&graph, patterns);
            let objective = objective_f(&graph, &assignment)?;
            print!("{}", assignment.to_text(objective));
            println!("phase2_bypassed {}", trace.phase2_bypassed);
            Ok(())
        }
        Command::OracleCompare { graph, patterns, oracle_cap } => {
            let (graph, patterns) = load_graph(&graph, patterns)?;
            let (_, f_optimal) = esa_oracle(&graph, patterns, oracle_cap)?;
            let (assignment, _) = ewvc_pd(&graph, patterns);
            let f_heuristic = objective_f(&graph, &assignment)?;
            println!("heuristic {}", sig9(f_heuristic));
            println!("oracle {}", sig9(f_optimal));
            println!("gap {}", sig9(f_heuristic - f_optimal));
            Ok(())
        }
        Command::Simulate { config, seed, per_trial, oracle_cap } => {
            let mut config = ExperimentConfig::parse_json(&read(&config)?)?;
            if let Some(seed) = seed {
                config.system.seed = seed;
            }
            if let Some(path) = per_trial {
                config.per_trial_path = Some(path);
            }
            if let Some(cap) = oracle_cap {
                config.oracle_cap = cap;
            }
            config.validate()?;
            let report = run_experiment(&config)?;
            write_report(&report, &config.output_path)?;
            if let Some(path) = &config.per_trial_path {
                write_per_trial(&report, path)?;
            }
            println!(
                "wrote {} rows to {}",
                report.points.len(),
                config.output_path.display()
            );
            let mean_build: f64 = if report.points.is_empty() {
                0.0
            } else {
                report.points.iter().map(|p| p.mean_graph_build_nanos).sum::<f64>()
                    / report.points.len() as f64
            };
            println!("mean graph build {} ns/trial (solver timing excluded)", sig9(mean_build));
            Ok(())
        }
    }
}
