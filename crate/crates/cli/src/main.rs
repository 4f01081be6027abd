//! `qarn`: run a nearest-element search, reproduce the two-element example,
//! or sweep random instances against the classical oracle.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use qarn_core::{
    agreement_sweep, build_circuit, execute, index_distribution, initial_state, rx, Mode,
    QarnError, QarnProblem, SearchRequest, Stage, StateVector, SweepConfig,
};

/// Expected `P(D = 0)` for the fixed example and how far it may drift.
const EXAMPLE_P0: f64 = 0.3647;
const EXAMPLE_P0_TOLERANCE: f64 = 0.005;
const MODE_TOLERANCE: f64 = 1e-10;

#[derive(Parser)]
#[command(name = "qarn", version, about = "Nearest-element search on a simulated register")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search one array for the element nearest to a target.
    Search(SearchArgs),
    /// Run b = 5, a = [2, 6], n = 3 in paper and full-circuit modes.
    PaperExample(PaperArgs),
    /// Compare decisions with the classical oracle on random instances.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct SearchArgs {
    /// Bits per value.
    #[arg(long)]
    bits: Option<u32>,
    /// Reference value.
    #[arg(long)]
    target: Option<u64>,
    /// Comma-separated array values.
    #[arg(long, value_delimiter = ',')]
    array: Option<Vec<u64>>,
    /// paper, general or full.
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Read a request (or a saved response) from a JSON file; flags override its fields.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Write the response to a file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    pretty: bool,
    /// Include wall-clock time as `elapsed_ms` (output is then not reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct PaperArgs {
    #[arg(long)]
    pretty: bool,
    /// Turn every comparison rotation the same way (negative control for the check).
    #[arg(long, hide = true)]
    tamper_sign: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 4)]
    max_bits: u32,
    #[arg(long, default_value_t = 4)]
    max_m: usize,
    /// Random instances per (n, m) row.
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

enum Failure {
    Input(String),
    Numeric(String),
    Capacity(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Numeric(_) => 2,
            Failure::Capacity(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Numeric(m) | Failure::Capacity(m) => m,
        }
    }
}

impl From<QarnError> for Failure {
    fn from(e: QarnError) -> Self {
        let msg = e.to_string();
        match e {
            QarnError::InvalidInput(_) => Failure::Input(msg),
            QarnError::Numeric(_) => Failure::Numeric(msg),
            QarnError::Capacity { .. } => Failure::Capacity(msg),
        }
    }
}

fn to_json<T: Serialize>(value: &T, pretty: bool) -> Result<String, Failure> {
    let text = if pretty {
        serde_json::to_string_pretty(value)
    } else {
        serde_json::to_string(value)
    };
    text.map_err(|e| Failure::Numeric(format!("cannot encode output: {e}")))
}

fn read_request(path: &PathBuf) -> Result<SearchRequest, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::Input(format!("cannot parse {}: {e}", path.display())))
}

fn search(args: SearchArgs) -> Result<(), Failure> {
    let mut request = match &args.input {
        Some(path) => read_request(path)?,
        None => {
            let missing = |flag: &str| Failure::Input(format!("missing --{flag} (or --input)"));
            SearchRequest {
                n: args.bits.ok_or_else(|| missing("bits"))?,
                b: args.target.ok_or_else(|| missing("target"))?,
                a: args.array.clone().ok_or_else(|| missing("array"))?,
                mode: None,
                shots: None,
                seed: None,
            }
        }
    };
    if let Some(n) = args.bits {
        request.n = n;
    }
    if let Some(b) = args.target {
        request.b = b;
    }
    if let Some(a) = args.array {
        request.a = a;
    }
    request.mode = args.mode.or(request.mode);
    request.shots = args.shots.or(request.shots);
    request.seed = args.seed.or(request.seed);

    let start = Instant::now();
    let mut response = execute(&request)?;
    if args.timing {
        response.elapsed_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    let text = to_json(&response, args.pretty)?;
    match args.output {
        Some(path) => fs::write(&path, text + "\n")
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))?,
        None => println!("{text}"),
    }
    Ok(())
}

#[derive(Serialize)]
struct PaperReport {
    n: u32,
    b: u64,
    a: Vec<u64>,
    paper: Vec<f64>,
    full: Vec<f64>,
    max_deviation: f64,
    p0_error: f64,
    pass: bool,
}

/// Runs the compiled circuit, optionally with every rotation angle made positive.
fn simulate(problem: &QarnProblem, tamper: bool) -> Result<Vec<f64>, Failure> {
    let mut circuit = build_circuit(problem)?;
    if tamper {
        for op in circuit.ops_mut() {
            if op.stage == Stage::Compare {
                if let Some(theta) = op.gate.angle() {
                    op.gate = rx(theta.abs())?;
                }
            }
        }
    }
    let start: StateVector = initial_state(problem, circuit.layout().clone())?;
    let state = circuit.execute(start)?;
    Ok(index_distribution(&state, problem)?.probabilities)
}

fn paper_example(args: PaperArgs) -> Result<(), Failure> {
    let paper = QarnProblem::new(3, vec![2, 6], 5, Mode::PaperExact)?;
    let full = paper.in_mode(Mode::FullCircuit)?;
    let p = simulate(&paper, args.tamper_sign)?;
    let f = simulate(&full, false)?;
    let max_deviation = p.iter().zip(&f).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let p0_error = (p[0] - EXAMPLE_P0).abs();
    let pass = p0_error <= EXAMPLE_P0_TOLERANCE && max_deviation <= MODE_TOLERANCE;
    let report = PaperReport {
        n: paper.n(),
        b: paper.b(),
        a: paper.a().to_vec(),
        paper: p,
        full: f,
        max_deviation,
        p0_error,
        pass,
    };
    println!("{}", to_json(&report, args.pretty)?);
    if pass {
        Ok(())
    } else {
        Err(Failure::Numeric(format!(
            "example check failed: |P(0) - {EXAMPLE_P0}| = {p0_error:.4e}, mode deviation {max_deviation:.3e}"
        )))
    }
}

fn sweep(args: SweepArgs) -> Result<(), Failure> {
    let table = agreement_sweep(&SweepConfig {
        max_bits: args.max_bits,
        max_m: args.max_m,
        count: args.count,
        seed: args.seed,
    })?;
    print!("{}", table.to_csv());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Search(args) => search(args),
        Command::PaperExample(args) => paper_example(args),
        Command::Sweep(args) => sweep(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("qarn: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
