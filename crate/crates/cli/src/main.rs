//! `perdec`: analysis and decoupling of periodic systems from JSON files.

mod commands;
mod document;
mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use perdec_core::nonsquare::DEFAULT_STEP10_BOUND;
use perdec_core::Error;

use commands::{DecoupleArgs, Failure, Loaded, Signal};
use document::{load_law, Entry, SystemDocument};
use report::Report;

#[derive(Parser)]
#[command(name = "perdec", version, about = "Exact decoupling of linear periodic discrete-time systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Initial sampling time of the cyclic representation.
    #[arg(long, global = true, default_value_t = 0, allow_hyphen_values = true)]
    tau: i64,

    /// Number of Markov parameters checked for diagonality.
    #[arg(long, global = true)]
    horizon: Option<usize>,

    /// Iteration bound of the candidate-list search.
    #[arg(long = "step10-bound", global = true)]
    step10_bound: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Machine,
}

#[derive(Clone, Copy, ValueEnum)]
enum SignalKind {
    Impulse,
    Step,
    Custom,
}

#[derive(Subcommand)]
enum Command {
    /// Stability, monodromy spectrum, output reachability and decoupling invariants.
    Analyze { system: PathBuf },
    /// Cyclic transfer matrix and its block-respecting Hermite form.
    Hermite { system: PathBuf },
    /// Synthesize a decoupling feedback law and verify the closed loop.
    Decouple { system: PathBuf },
    /// Exact response from zero initial state.
    Simulate {
        system: PathBuf,
        /// Close the loop with this law first.
        #[arg(long)]
        law: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = SignalKind::Impulse)]
        kind: SignalKind,
        #[arg(long, default_value_t = 0)]
        channel: usize,
        /// JSON array of input vectors, for `--kind custom`.
        #[arg(long)]
        inputs: Option<PathBuf>,
        #[arg(long, default_value_t = 8)]
        steps: usize,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        t0: i64,
    },
    /// Check that a law decouples the system.
    Verify {
        system: PathBuf,
        /// A law document or a machine-format decouple report.
        #[arg(long)]
        law: PathBuf,
    },
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::NotSolvable(_) | Error::NotFound => "NotSolvable",
        Error::NotStable => "NotStable",
        Error::NotOutputReachable => "NotOutputReachable",
        Error::BoundExceeded(_) => "Inconclusive",
        Error::ConstructionFailed { .. } => "ConstructionFailed",
        Error::VerificationFailed(_) => "VerificationFailed",
        _ => "Error",
    }
}

fn exit_code(kind: &str) -> u8 {
    match kind {
        "NotSolvable" => 2,
        "NotStable" => 3,
        "NotOutputReachable" => 4,
        "Inconclusive" => 5,
        "ConstructionFailed" => 6,
        "VerificationFailed" | "NotDecoupled" => 7,
        _ => 1,
    }
}

fn describe(failure: &Failure) -> (&'static str, String) {
    match failure {
        Failure::Document(e) => ("InvalidInput", e.to_string()),
        Failure::Usage(msg) => ("Usage", msg.clone()),
        Failure::NotDecoupled(_) => ("NotDecoupled", "the law does not decouple the system".into()),
        Failure::Core(e @ Error::NotStable) => (
            "NotStable",
            format!("{e} (add a stabilizing_feedback section with F and G to the system file)"),
        ),
        Failure::Core(e) => (error_kind(e), e.to_string()),
    }
}

fn emit(text: &str, output: Option<&Path>) -> std::io::Result<()> {
    match output {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    }
}

fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Text => report.to_text(),
        Format::Machine => report.to_json(),
    }
}

fn load_inputs(path: &Path) -> Result<Vec<Vec<Entry>>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Document(document::DocumentError::Io(path.display().to_string(), e)))?;
    serde_json::from_str(&text).map_err(|e| Failure::Document(document::DocumentError::Parse(e.to_string())))
}

fn run(cli: &Cli) -> Result<Report, Failure> {
    let path = match &cli.command {
        Command::Analyze { system }
        | Command::Hermite { system }
        | Command::Decouple { system }
        | Command::Simulate { system, .. }
        | Command::Verify { system, .. } => system,
    };
    let doc = SystemDocument::load(path)?;
    let opts = doc.options.clone().unwrap_or_default();
    let horizon = cli.horizon.or(opts.horizon);
    let loaded = Loaded::new(&doc)?;
    match &cli.command {
        Command::Analyze { .. } => commands::analyze(&loaded, cli.tau),
        Command::Hermite { .. } => commands::hermite(&loaded, cli.tau),
        Command::Decouple { .. } => {
            let step10_bound = cli.step10_bound.or(opts.step10_bound).unwrap_or(DEFAULT_STEP10_BOUND);
            commands::decouple(&loaded, &DecoupleArgs { tau: cli.tau, horizon, step10_bound })
        }
        Command::Simulate { law, kind, channel, inputs, steps, t0, .. } => {
            let law = law.as_deref().map(|p| load_law(p, &loaded.raw)).transpose()?;
            let signal = match (kind, inputs) {
                (SignalKind::Impulse, _) => Signal::Impulse(*channel),
                (SignalKind::Step, _) => Signal::Step(*channel),
                (SignalKind::Custom, Some(p)) => Signal::Custom(load_inputs(p)?),
                (SignalKind::Custom, None) => return Err(Failure::Usage("--kind custom needs --inputs".into())),
            };
            commands::simulate(&loaded, law.as_ref(), &signal, *t0, *steps)
        }
        Command::Verify { law, .. } => {
            let law = load_law(law, &loaded.raw)?;
            commands::verify(&loaded, &law, cli.tau, horizon)
        }
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
    let output = cli.output.as_deref();
    let result = run(&cli);
    let (report, failure) = match result {
        Ok(report) => (Some(report), None),
        Err(Failure::NotDecoupled(report)) => (Some(report), Some(describe(&Failure::NotDecoupled(Report::new())))),
        Err(f) => (None, Some(describe(&f))),
    };
    let text = match (&report, &failure, cli.format) {
        (Some(r), _, fmt) => render(r, fmt),
        (None, Some((kind, msg)), Format::Machine) => {
            let mut r = Report::new();
            r.put("error", *kind).put("message", msg.as_str()).put("exit_code", exit_code(kind) as usize);
            r.to_json()
        }
        _ => String::new(),
    };
    if let Err(e) = emit(&text, output) {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::from(1);
    }
    match failure {
        None => ExitCode::SUCCESS,
        Some((kind, msg)) => {
            eprintln!("error [{kind}]: {msg}");
            ExitCode::from(exit_code(kind))
        }
    }
}
