use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use partsat::cli::{cmd_check, cmd_gen, cmd_solve, GenOptions, SolveOptions, EXIT_INPUT_ERROR};
use partsat::extract::VertexOrder;
use partsat::propagate::OrderMode;

#[derive(Parser)]
#[command(name = "partsat", version, about = "Clausal-partition propagation SAT heuristic")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum OrderArg {
    /// FIFO worklist of directed edges (default).
    #[default]
    Worklist,
    /// Literal repeated sweeps over all directed edges.
    Sweep,
    /// Sweep over a seeded shuffle of the edge order (see --seed).
    Shuffle,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum VertexOrderArg {
    /// Pin vertices in ascending key order (default).
    #[default]
    Key,
    /// Pin the vertex with the fewest admissible assignments first.
    MostConstrained,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a DIMACS CNF file. Exit codes: 10 SAT-VERIFIED, 20 UNSAT,
    /// 30 UNKNOWN, 1 input error.
    Solve {
        path: PathBuf,
        /// Search the reduced space for a witness and verify it.
        #[arg(long)]
        extract: bool,
        /// Emit the run report as JSON.
        #[arg(long)]
        json: bool,
        #[arg(long, value_enum, default_value_t)]
        order: OrderArg,
        /// Shuffle seed for --order shuffle.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t)]
        vertex_order: VertexOrderArg,
        /// Backtracks allowed before the search gives up.
        #[arg(long, default_value_t = 10_000)]
        max_backtracks: u64,
        /// Print the partition elements before solving.
        #[arg(long)]
        dump_elements: bool,
    },
    /// Generate random 3SAT instances with oracle labels.
    Gen {
        /// Output directory for .cnf files and manifest.txt.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Variables per instance (single-cell mode).
        #[arg(long)]
        n: Option<u32>,
        /// Clauses per instance (single-cell mode).
        #[arg(long)]
        m: Option<usize>,
        /// Instances per cell.
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Emit the density grid m/n in {2,3,4,4.26,5,6} over n in
        /// [n-min, n-max] instead of one cell.
        #[arg(long)]
        sweep: bool,
        #[arg(long, default_value_t = 4)]
        n_min: u32,
        #[arg(long, default_value_t = 12)]
        n_max: u32,
    },
    /// Re-run the solver on a generated battery and report soundness and
    /// false-positive rates. Nonzero exit on any soundness violation.
    Check {
        manifest: PathBuf,
        /// Directory holding the instances (defaults to the manifest's).
        #[arg(long)]
        dir: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve {
            path,
            extract,
            json,
            order,
            seed,
            vertex_order,
            max_backtracks,
            dump_elements,
        } => {
            let options = SolveOptions {
                extract,
                json,
                order: match order {
                    OrderArg::Worklist => OrderMode::WorklistFifo,
                    OrderArg::Sweep => OrderMode::Sweep,
                    OrderArg::Shuffle => OrderMode::ShuffledSweep(seed),
                },
                vertex_order: match vertex_order {
                    VertexOrderArg::Key => VertexOrder::AscendingKey,
                    VertexOrderArg::MostConstrained => VertexOrder::MostConstrainedFirst,
                },
                max_backtracks,
                dump_elements,
            };
            cmd_solve(&path, &options)
        }
        Command::Gen {
            out,
            seed,
            n,
            m,
            count,
            sweep,
            n_min,
            n_max,
        } => cmd_gen(&GenOptions {
            out_dir: out,
            seed,
            num_vars: n,
            num_clauses: m,
            count,
            sweep,
            n_min,
            n_max,
        })
        .map(|entries| {
            println!("generated {} instances", entries.len());
            0
        }),
        Command::Check {
            manifest,
            dir,
            json,
        } => cmd_check(&manifest, dir.as_deref(), json),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(EXIT_INPUT_ERROR as u8)
        }
    }
}
