use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sparse_bregman::cli_io::{parse_k_max, parse_k_range, run, Command, Options};
use sparse_bregman::{DecodeConfig, Generator, Mode, Search, Tolerances};

/// Sparse Bregman decoding of probability vectors.
///
/// Reads one JSON object per line ({"probs": [...]} or {"logits": [...]},
/// optionally with an "id") and writes one result per line.
#[derive(Parser, Debug)]
#[command(name = "sparse-bregman", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Find k*, the support and the sparse distribution for each record.
    Decode(Common),
    /// Renormalize the top k entries of each record.
    Renorm {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k: usize,
    },
    /// Write cost(k) of a single record as CSV.
    CostCurve {
        #[command(flatten)]
        common: Common,
        /// Inclusive range a:b, defaults to 1:V.
        #[arg(long, value_parser = parse_k_range)]
        k_range: Option<(usize, usize)>,
    },
    /// Decode each record and draw seeded samples from it.
    Sample {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        n: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Primal,
    Dual,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SearchArg {
    Binary,
    Exponential,
    Linear,
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long, value_enum, default_value = "primal")]
    mode: ModeArg,
    /// Real number, shannon, inf or -inf.
    #[arg(long, default_value = "2", allow_hyphen_values = true)]
    alpha: Generator,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    /// Integer or none.
    #[arg(long, default_value = "none", value_parser = parse_k_max)]
    k_max: ::std::option::Option<usize>,
    #[arg(long, value_enum, default_value = "binary")]
    search: SearchArg,
    /// Softmax temperature for logits records.
    #[arg(long, default_value_t = 1.0)]
    temperature: f64,
    /// Relative tolerance of the multiplier solves.
    #[arg(long)]
    tol: Option<f64>,
    /// Write support_probs instead of dense probs.
    #[arg(long)]
    compact: bool,
    /// Include the evaluated cost points in each record.
    #[arg(long)]
    emit_cost_curve: bool,
    /// Input file, stdin if absent.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output file, stdout if absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

impl Common {
    fn options(&self) -> Result<Options, String> {
        let mode = match self.mode {
            ModeArg::Primal => Mode::Primal,
            ModeArg::Dual => Mode::Dual,
        };
        let search = match self.search {
            SearchArg::Binary => Search::Binary,
            SearchArg::Exponential => Search::Exponential,
            SearchArg::Linear => Search::Linear,
        };
        let mut config = DecodeConfig::new(mode, self.alpha, self.lambda)
            .with_k_max(self.k_max)
            .with_search(search)
            .with_temperature(self.temperature);
        if let Some(tol) = self.tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(format!("--tol must be positive, got {tol}"));
            }
            config = config.with_tol(Tolerances::with_outer(tol));
        }
        Ok(Options {
            config,
            compact: self.compact,
            emit_cost_curve: self.emit_cost_curve,
        })
    }
}

fn open_input(path: &Option<PathBuf>) -> io::Result<Box<dyn Read>> {
    Ok(match path {
        Some(p) => Box::new(File::open(p)?),
        None => Box::new(io::stdin().lock()),
    })
}

fn open_output(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let (common, command) = match &cli.command {
        Sub::Decode(c) => (c, Command::Decode),
        Sub::Renorm { common, k } => (common, Command::Renorm { k: *k }),
        Sub::CostCurve { common, k_range } => (common, Command::CostCurve { range: *k_range }),
        Sub::Sample { common, seed, n } => (common, Command::Sample { seed: *seed, n: *n }),
    };
    let opts = match common.options() {
        Ok(o) => o,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    // Fixed-k renormalization has no λ or search, and accepts the limit
    // generators; everything else needs a fully valid decode config.
    let check = match command {
        Command::Renorm { .. } => {
            let g = opts.config.generator;
            if opts.config.mode == Mode::Dual && !g.is_dual_valid() {
                Err(format!("{g} is not valid for dual renormalization"))
            } else {
                Ok(())
            }
        }
        _ => opts.config.validate().map_err(|e| format!("{}: {e}", e.name())),
    };
    if let Err(msg) = check {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }

    let result = open_input(&common.input).and_then(|input| {
        let output = open_output(&common.output)?;
        run(&command, &opts, BufReader::new(input), BufWriter::new(output))
    });
    match result {
        Ok(outcome) => ExitCode::from(outcome.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
