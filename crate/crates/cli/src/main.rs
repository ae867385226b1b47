use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use consensus_cli::simulate::{DEFAULT_STEPS, DEFAULT_T_END};
use consensus_cli::verify::DEFAULT_CESARO_TERMS;
use consensus_cli::{
    analyze, read_graph, simulate, verify, AnalyzeOptions, CliError, GraphSource, InitialState,
    Outcome, SimulateOptions, SimulationMode, VerifyOptions,
};
use consensus_core::dynamics::DEFAULT_DT;
use consensus_core::forest::DEFAULT_ENUMERATION_CAP;
use consensus_core::generate::{random_digraph, random_strongly_connected, seeded_rng};
use consensus_core::spectral::{DEFAULT_RANK_TOL, DEFAULT_ZERO_TOL};
use consensus_core::{write_edge_list, Tolerances};

#[derive(Parser)]
#[command(
    name = "consensus",
    version,
    about = "Consensus analysis of weighted digraphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct TolArgs {
    /// Relative threshold for counting an eigenvalue as zero.
    #[arg(long, default_value_t = DEFAULT_ZERO_TOL)]
    zero_tol: f64,
    /// Relative singular-value threshold for numerical rank.
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    rank_tol: f64,
    /// Largest graph order for which in-forests are enumerated.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    forest_cap: usize,
}

impl TolArgs {
    fn tolerances(&self) -> Result<Tolerances, CliError> {
        Tolerances::new(self.zero_tol, self.rank_tol).map_err(CliError::Invalid)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Continuous,
    Discrete,
}

#[derive(Subcommand)]
enum Command {
    /// Rank, components, spectrum and limit matrix of a graph.
    Analyze {
        file: PathBuf,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Integrate or iterate the consensus protocol.
    Simulate {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "continuous")]
        mode: ModeArg,
        /// Comma-separated values, a file of values, `random` or `random:<seed>`.
        #[arg(long, default_value = "random")]
        x0: String,
        /// Discrete step size; defaults to 1/(2 * max out-degree).
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_DT)]
        dt: f64,
        #[arg(long, default_value_t = DEFAULT_T_END)]
        t_end: f64,
        #[arg(long, default_value_t = DEFAULT_STEPS)]
        steps: usize,
        /// Record every k-th step (10 for continuous, 1 for discrete by default).
        #[arg(long)]
        stride: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV trajectory destination.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        forest_cap: usize,
    },
    /// Cross-check every computed quantity against an independent method.
    Verify {
        file: Option<PathBuf>,
        /// Check every unit-weight digraph on N nodes (N <= 4).
        #[arg(long, conflicts_with_all = ["file", "random"])]
        exhaustive: Option<usize>,
        /// Check COUNT random weighted digraphs.
        #[arg(long, conflicts_with = "file")]
        random: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_CESARO_TERMS)]
        cesaro_m: usize,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Print a seeded random graph as an edge list.
    Generate {
        #[arg(long)]
        nodes: usize,
        #[arg(long, default_value_t = 0.3)]
        arc_prob: f64,
        #[arg(long, default_value_t = 0.1)]
        min_weight: f64,
        #[arg(long, default_value_t = 2.0)]
        max_weight: f64,
        /// Start from a Hamiltonian cycle so the graph is strongly connected.
        #[arg(long)]
        strongly_connected: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Analyze { file, tol } => {
            let g = read_graph(&file)?;
            let opts = AnalyzeOptions {
                tolerances: tol.tolerances()?,
                forest_cap: tol.forest_cap,
            };
            analyze(&g, opts)
        }
        Command::Simulate {
            file,
            mode,
            x0,
            eps,
            dt,
            t_end,
            steps,
            stride,
            seed,
            output,
            forest_cap,
        } => {
            let g = read_graph(&file)?;
            let opts = SimulateOptions {
                mode: match mode {
                    ModeArg::Continuous => SimulationMode::Continuous,
                    ModeArg::Discrete => SimulationMode::Discrete,
                },
                x0: InitialState::parse(&x0)?,
                eps,
                dt,
                t_end,
                steps,
                stride,
                seed,
                output,
                forest_cap,
            };
            simulate(&g, &opts)
        }
        Command::Verify {
            file,
            exhaustive,
            random,
            seed,
            cesaro_m,
            tol,
        } => {
            let source = match (file, exhaustive, random) {
                (Some(path), _, _) => GraphSource::File(path),
                (None, Some(n), _) => GraphSource::Exhaustive(n),
                (None, None, Some(count)) => GraphSource::Random { count, seed },
                (None, None, None) => {
                    return Err(CliError::Usage(
                        "verify needs a FILE, --exhaustive N or --random COUNT".into(),
                    ))
                }
            };
            let opts = VerifyOptions {
                tolerances: tol.tolerances()?,
                forest_cap: tol.forest_cap,
                cesaro_terms: cesaro_m,
                seed,
                ..VerifyOptions::default()
            };
            verify(&source, &opts)
        }
        Command::Generate {
            nodes,
            arc_prob,
            min_weight,
            max_weight,
            strongly_connected,
            seed,
        } => {
            if !(0.0..=1.0).contains(&arc_prob) || !(0.0 < min_weight && min_weight <= max_weight) {
                return Err(CliError::Usage(
                    "need 0 <= arc-prob <= 1 and 0 < min-weight <= max-weight".into(),
                ));
            }
            let mut rng = seeded_rng(seed);
            let weights = min_weight..=max_weight;
            let g = if strongly_connected {
                random_strongly_connected(&mut rng, nodes, arc_prob, weights)
            } else {
                random_digraph(&mut rng, nodes, arc_prob, weights)
            };
            Ok(Outcome {
                json: format!("# seed {seed}\n{}", write_edge_list(&g)),
                success: true,
            })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(outcome) => {
            print!("{}", outcome.json);
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
