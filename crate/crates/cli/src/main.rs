use std::path::{Path, PathBuf};
use std::process::ExitCode;

use algiso::cfi::BaseGraph;
use algiso::poly::Calculus;
use algiso_cli::commands::{self, Globals, OperatorChoice};
use algiso_cli::report::{cmd_compare, CompareConfig, DEFAULT_EMBED_LIMIT};
use algiso_cli::{CliError, CliResult};
use clap::{Parser, Subcommand};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "algiso", version, about = "Refinement operators and algebraic proof systems for graph isomorphism")]
struct Cli {
    /// Field characteristic: 0 for the rationals, otherwise a prime.
    #[arg(long = "char", global = true, default_value_t = 0)]
    characteristic: u64,
    /// Worker threads.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Refuse degree-bounded spans with more monomials than this.
    #[arg(long, global = true)]
    guard_monomials: Option<usize>,
    /// Refuse spans whose rank exceeds this.
    #[arg(long, global = true)]
    guard_rows: Option<usize>,
    /// Write JSON here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Automorphism orbits on k-tuples (graphs of at most 8 vertices).
    Orbits {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        width: usize,
    },
    /// Fixed point of a counting or solvability operator.
    Refine {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        width: usize,
        #[arg(long)]
        operator: OperatorChoice,
        #[arg(long, default_value_t = 1)]
        r: usize,
        /// Combine the solvability operators for every admissible r.
        #[arg(long)]
        combined: bool,
        /// Start from this partition instead of the atomic types.
        #[arg(long)]
        start: Option<PathBuf>,
    },
    /// Degree-bounded refutation of the isomorphism axioms for a partial map.
    Refute {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        calculus: Calculus,
        #[arg(long)]
        degree: usize,
        /// Pinned pairs `u1:v1,u2:v2,...`.
        #[arg(long)]
        map: String,
    },
    /// Partition of k-tuples by degree-bounded refutability.
    Partition {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        calculus: Calculus,
        #[arg(long)]
        width: usize,
        #[arg(long)]
        degree: usize,
    },
    /// Generalized CFI graph over a base graph.
    Cfi {
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        p: u64,
        /// Twists `e0:1,e2:1`; unlisted edges are untwisted.
        #[arg(long, default_value = "")]
        twist: String,
        /// Emit every total twist and their disjoint union.
        #[arg(long)]
        family: bool,
        /// With --family, write `<prefix><j>.json` and `<prefix>union.json`.
        #[arg(long)]
        out_prefix: Option<String>,
    },
    /// Run every method and report how their partitions relate.
    Compare {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "2")]
        widths: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "2")]
        degrees: Vec<usize>,
        /// Characteristics to compare; defaults to `--char`.
        #[arg(long, value_delimiter = ',')]
        chars: Vec<u64>,
        #[arg(long, value_delimiter = ',', default_value = "nc,mc,pc")]
        calculi: Vec<Calculus>,
        /// Embed partitions with at most this many tuples.
        #[arg(long, default_value_t = DEFAULT_EMBED_LIMIT)]
        embed_limit: usize,
    },
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::input(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let globals = Globals {
        characteristic: cli.characteristic,
        jobs: cli.jobs.max(1),
        guard_monomials: cli.guard_monomials,
        guard_rows: cli.guard_rows,
    };
    let out = cli.out.as_deref();
    match cli.command {
        Command::Orbits { input, width } => emit(&commands::cmd_orbits(&commands::read_graph(&input)?, width)?, out),
        Command::Refine { input, width, operator, r, combined, start } => {
            let g = commands::read_graph(&input)?;
            let start = start.map(|p| commands::read_partition(&g, &p)).transpose()?;
            emit(&commands::cmd_refine(&g, width, operator, r, combined, globals.field()?, start)?, out)
        }
        Command::Refute { input, calculus, degree, map } => {
            let g = commands::read_graph(&input)?;
            emit(&commands::cmd_refute(&g, calculus, degree, &map, &globals)?, out)
        }
        Command::Partition { input, calculus, width, degree } => {
            let g = commands::read_graph(&input)?;
            emit(&commands::cmd_partition(&g, calculus, width, degree, &globals)?, out)
        }
        Command::Cfi { base, p, twist, family, out_prefix } => {
            let base = BaseGraph::load(&commands::read_text(&base)?)?;
            if !family {
                if out_prefix.is_some() {
                    return Err(CliError::input("--out-prefix requires --family"));
                }
                return emit(&commands::cmd_cfi(&base, p, &twist)?, out);
            }
            if !twist.is_empty() {
                return Err(CliError::input("--twist does not apply to --family"));
            }
            let fam = commands::cmd_cfi_family(&base, p)?;
            match out_prefix {
                Some(prefix) => {
                    let mut files = Vec::new();
                    for (j, copy) in fam.copies.iter().enumerate() {
                        let path = format!("{prefix}{j}.json");
                        emit(copy, Some(Path::new(&path)))?;
                        files.push(path);
                    }
                    let path = format!("{prefix}union.json");
                    emit(&fam.union, Some(Path::new(&path)))?;
                    files.push(path);
                    emit(&serde_json::json!({ "files": files }), out)
                }
                None => emit(&fam, out),
            }
        }
        Command::Compare { input, widths, degrees, chars, calculi, embed_limit } => {
            let g = commands::read_graph(&input)?;
            let cfg = CompareConfig {
                widths,
                degrees,
                characteristics: if chars.is_empty() { vec![globals.characteristic] } else { chars },
                calculi,
                engine: globals.engine(false),
                jobs: globals.jobs,
                embed_limit,
            };
            let report = cmd_compare(&g, &cfg)?;
            eprint!("{}", report.table());
            emit(&report, out)?;
            if report.guard_exceeded() {
                return Err(CliError::Guard("some cells exceeded a resource guard".into()));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
