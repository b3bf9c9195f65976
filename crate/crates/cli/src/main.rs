//! Command-line front end for exact merge-tree interleaving distances.
//!
//! Subcommands: `distance` (binary search over the candidate set), `check`
//! (one ε-query), `ingest` (1-D scalar series to tree file), `candidates`
//! (print the candidate set), and `oracle` (brute-force cross-check).
//!
//! Exit codes are a stable contract: 0 success, 1 `check` answered
//! "not-interleaved", 2 parse or validation error, 3 search budget exceeded,
//! 4 oracle/engine mismatch under `--compare`, 5 instance too large for the
//! oracle guard. Stdout stays empty on exits 2 and higher; diagnostics go to
//! stderr. Set `MT_INTERLEAVE_LOG` (error/warn/info/debug/trace) for
//! verbosity.

mod manifest;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mt_interleave::{
    compute_interleaving_distance, generate_candidates, is_eps_interleaved, merge_tree_of_series,
    oracle_distance, parse_series_csv, parse_tree_document, write_tree_document, EngineError,
    Epsilon, MergeTree, OracleError, ScalarValue, SearchConfig,
};

use crate::manifest::{Payload, RunManifest};

#[derive(Parser)]
#[command(
    name = "mt-interleave",
    version,
    about = "Exact interleaving distance between merge trees",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the exact interleaving distance between two merge trees.
    Distance(DistanceArgs),
    /// Decide whether two merge trees are interleaved at a given epsilon.
    Check(CheckArgs),
    /// Build the merge tree of a scalar series CSV and write it as a tree file.
    Ingest(IngestArgs),
    /// Print the sorted candidate epsilon values for a tree pair.
    Candidates(CandidatesArgs),
    /// Run the brute-force oracle, optionally cross-checking the engine.
    Oracle(OracleArgs),
}

/// Knobs shared by every engine-backed subcommand.
#[derive(Args)]
struct SearchFlags {
    /// Disable per-leaf target refinement (verdicts are unchanged, more
    /// assignments are enumerated).
    #[arg(long = "no-refine")]
    no_refine: bool,
    /// Cap on assignments tested per epsilon query (default 10000000).
    #[arg(long, value_name = "N")]
    max_maps: Option<u64>,
    /// Test assignments across threads; verdicts and distances are unchanged.
    #[arg(long)]
    parallel: bool,
    /// Force sequential enumeration so the exported witness is the
    /// lexicographically first good assignment, byte-for-byte reproducible.
    #[arg(long)]
    deterministic_witness: bool,
}

impl SearchFlags {
    fn to_config(&self) -> Result<SearchConfig, CliError> {
        let mut config = SearchConfig::default();
        config.refinement = !self.no_refine;
        if let Some(max_maps) = self.max_maps {
            if max_maps == 0 {
                return Err(CliError::Value {
                    message: "--max-maps must be at least 1".to_string(),
                });
            }
            config.max_maps = max_maps;
        }
        config.parallel = self.parallel;
        config.deterministic_witness = self.deterministic_witness;
        Ok(config)
    }
}

#[derive(Args)]
struct DistanceArgs {
    /// First merge tree file.
    #[arg(value_name = "TREE_A")]
    tree_a: PathBuf,
    /// Second merge tree file.
    #[arg(value_name = "TREE_B")]
    tree_b: PathBuf,
    /// Write the distance-realizing map as JSON to this path.
    #[arg(long, value_name = "PATH")]
    witness: Option<PathBuf>,
    /// Write a replayable run manifest as JSON to this path.
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,
    #[command(flatten)]
    search: SearchFlags,
}

#[derive(Args)]
struct CheckArgs {
    /// First merge tree file.
    #[arg(value_name = "TREE_A")]
    tree_a: PathBuf,
    /// Second merge tree file.
    #[arg(value_name = "TREE_B")]
    tree_b: PathBuf,
    /// Shift to test, as an exact non-negative rational (e.g. 1, 0.5, 3/2).
    #[arg(long, value_name = "RATIONAL")]
    epsilon: String,
    /// Write the epsilon-good map as JSON to this path (only written when the
    /// verdict is "interleaved").
    #[arg(long, value_name = "PATH")]
    witness: Option<PathBuf>,
    /// Write a replayable run manifest as JSON to this path.
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,
    #[command(flatten)]
    search: SearchFlags,
}

#[derive(Args)]
struct IngestArgs {
    /// CSV with a `position,value` header and one sample per line.
    #[arg(value_name = "SERIES_CSV")]
    series: PathBuf,
    /// Output path for the canonical tree file.
    #[arg(value_name = "OUT_TREE")]
    out: PathBuf,
}

#[derive(Args)]
struct CandidatesArgs {
    /// First merge tree file.
    #[arg(value_name = "TREE_A")]
    tree_a: PathBuf,
    /// Second merge tree file.
    #[arg(value_name = "TREE_B")]
    tree_b: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    /// First merge tree file.
    #[arg(value_name = "TREE_A")]
    tree_a: PathBuf,
    /// Second merge tree file.
    #[arg(value_name = "TREE_B")]
    tree_b: PathBuf,
    /// Also run the engine and fail with exit 4 if the distances differ.
    #[arg(long)]
    compare: bool,
    /// Write a replayable run manifest as JSON to this path.
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,
}

/// Failure cases with their stable exit codes.
#[derive(Debug)]
enum CliError {
    /// An input file failed to read, parse, or validate (exit 2).
    Input { path: PathBuf, message: String },
    /// A flag value was rejected (exit 2).
    Value { message: String },
    /// An output file could not be written (exit 2).
    Output { path: PathBuf, message: String },
    /// The assignment budget ran out before a verdict (exit 3).
    Budget { enumerated: u64, budget: u64 },
    /// Oracle and engine disagree on a distance (exit 4).
    Mismatch { oracle: ScalarValue, engine: ScalarValue },
    /// The oracle guard rejected the instance (exit 5).
    TooLarge { eta_f: usize, eta_g: usize },
    /// A library invariant failed; this is a bug, not bad input (exit 2).
    Internal { message: String },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input { .. }
            | CliError::Value { .. }
            | CliError::Output { .. }
            | CliError::Internal { .. } => 2,
            CliError::Budget { .. } => 3,
            CliError::Mismatch { .. } => 4,
            CliError::TooLarge { .. } => 5,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input { path, message } => write!(f, "{}: {message}", path.display()),
            CliError::Value { message } => f.write_str(message),
            CliError::Output { path, message } => {
                write!(f, "cannot write {}: {message}", path.display())
            }
            CliError::Budget { enumerated, budget } => write!(
                f,
                "search budget exceeded: {enumerated} assignments tested against a budget of \
                 {budget}; raise --max-maps"
            ),
            CliError::Mismatch { oracle, engine } => write!(
                f,
                "oracle and engine disagree: oracle says {oracle}, engine says {engine}; this \
                 certifies a bug"
            ),
            CliError::TooLarge { eta_f, eta_g } => write!(
                f,
                "instance too large for the oracle: leaf counts {eta_f} and {eta_g} exceed the \
                 brute-force guard"
            ),
            CliError::Internal { message } => write!(f, "internal error: {message}"),
        }
    }
}

/// Successful run: text for stdout plus the process exit code (0, or 1 for a
/// "not-interleaved" check verdict).
struct Outcome {
    stdout: String,
    code: u8,
}

impl Outcome {
    fn ok(stdout: String) -> Outcome {
        Outcome { stdout, code: 0 }
    }
}

fn main() -> ExitCode {
    let env = env_logger::Env::new().filter_or("MT_INTERLEAVE_LOG", "warn");
    env_logger::Builder::from_env(env).format_timestamp(None).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            ExitCode::from(outcome.code)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(command: Command) -> Result<Outcome, CliError> {
    match command {
        Command::Distance(args) => cmd_distance(args),
        Command::Check(args) => cmd_check(args),
        Command::Ingest(args) => cmd_ingest(args),
        Command::Candidates(args) => cmd_candidates(args),
        Command::Oracle(args) => cmd_oracle(args),
    }
}

fn cmd_distance(args: DistanceArgs) -> Result<Outcome, CliError> {
    let mf = read_tree(&args.tree_a)?;
    let mg = read_tree(&args.tree_b)?;
    let config = args.search.to_config()?;
    let report = compute_interleaving_distance(&mf, &mg, &config).map_err(engine_error)?;
    log::info!(
        "distance {} found over {} candidates in {} probes, {} assignments, {} ms",
        report.epsilon_star,
        report.candidate_count,
        report.trace.len(),
        report.total_maps_enumerated,
        report.wall_time_ms
    );
    let document = report.to_document();
    if let Some(path) = &args.witness {
        write_file(path, &report.witness.to_json_bytes())?;
    }
    if let Some(path) = &args.json {
        let manifest = RunManifest::new(
            "distance",
            &input_strings(&[&args.tree_a, &args.tree_b]),
            config,
            Payload::Distance { report: document.clone() },
        );
        write_file(path, &manifest.to_json_bytes())?;
    }
    Ok(Outcome::ok(render_epsilon(
        &document.epsilon_star,
        document.epsilon_star_decimal_approx,
    )))
}

fn cmd_check(args: CheckArgs) -> Result<Outcome, CliError> {
    let mf = read_tree(&args.tree_a)?;
    let mg = read_tree(&args.tree_b)?;
    let config = args.search.to_config()?;
    let eps = parse_epsilon(&args.epsilon)?;
    let result = is_eps_interleaved(&mf, &mg, &eps, &config).map_err(engine_error)?;
    log::info!(
        "check at {}: interleaved={}, {} assignments tested",
        eps,
        result.interleaved,
        result.maps_enumerated
    );
    if let Some(path) = &args.witness {
        match &result.witness {
            Some(witness) => write_file(path, &witness.to_json_bytes())?,
            None => log::warn!(
                "no witness written to {}: the trees are not interleaved at {}",
                path.display(),
                eps
            ),
        }
    }
    if let Some(path) = &args.json {
        let manifest = RunManifest::new(
            "check",
            &input_strings(&[&args.tree_a, &args.tree_b]),
            config,
            Payload::Check {
                epsilon: eps.value().clone(),
                interleaved: result.interleaved,
                maps_enumerated: result.maps_enumerated,
                refined_target_sizes: result.refined_target_sizes.clone(),
                witness: result.witness.as_ref().map(|w| w.to_document()),
            },
        );
        write_file(path, &manifest.to_json_bytes())?;
    }
    if result.interleaved {
        Ok(Outcome::ok("interleaved\n".to_string()))
    } else {
        Ok(Outcome { stdout: "not-interleaved\n".to_string(), code: 1 })
    }
}

fn cmd_ingest(args: IngestArgs) -> Result<Outcome, CliError> {
    let bytes = read_file(&args.series)?;
    let tree = parse_series_csv(&bytes)
        .and_then(|series| merge_tree_of_series(&series))
        .map_err(|e| CliError::Input { path: args.series.clone(), message: e.to_string() })?;
    write_file(&args.out, &write_tree_document(&tree))?;
    log::info!(
        "ingested {} into {} ({} nodes, {} leaves)",
        args.series.display(),
        args.out.display(),
        tree.len(),
        tree.leaf_count()
    );
    Ok(Outcome::ok(String::new()))
}

fn cmd_candidates(args: CandidatesArgs) -> Result<Outcome, CliError> {
    let mf = read_tree(&args.tree_a)?;
    let mg = read_tree(&args.tree_b)?;
    let candidates = generate_candidates(&mf, &mg);
    let mut out = String::new();
    for eps in candidates.iter() {
        out.push_str(&eps.to_string());
        out.push('\n');
    }
    Ok(Outcome::ok(out))
}

fn cmd_oracle(args: OracleArgs) -> Result<Outcome, CliError> {
    let mf = read_tree(&args.tree_a)?;
    let mg = read_tree(&args.tree_b)?;
    let report = oracle_distance(&mf, &mg).map_err(|e| match e {
        OracleError::InstanceTooLarge { eta_f, eta_g } => CliError::TooLarge { eta_f, eta_g },
    })?;
    log::info!(
        "oracle distance {} after {} glued maps",
        report.epsilon_star,
        report.total_maps_checked
    );
    let mut engine_epsilon_star = None;
    if args.compare {
        let engine_report = compute_interleaving_distance(&mf, &mg, &SearchConfig::default())
            .map_err(engine_error)?;
        let engine_star = engine_report.epsilon_star.value().clone();
        if &engine_star != report.epsilon_star.value() {
            return Err(CliError::Mismatch {
                oracle: report.epsilon_star.value().clone(),
                engine: engine_star,
            });
        }
        engine_epsilon_star = Some(engine_star);
    }
    let stdout = format!("{}\n", report.epsilon_star);
    if let Some(path) = &args.json {
        let manifest = RunManifest::new(
            "oracle",
            &input_strings(&[&args.tree_a, &args.tree_b]),
            SearchConfig::default(),
            Payload::Oracle { report, engine_epsilon_star },
        );
        write_file(path, &manifest.to_json_bytes())?;
    }
    Ok(Outcome::ok(stdout))
}

/// Exact rational on the first line; a marked decimal approximation on a
/// second line only when the exact value is not an integer.
fn render_epsilon(exact: &ScalarValue, approx: f64) -> String {
    let exact = exact.to_string();
    if exact.contains('/') {
        format!("{exact}\n\u{2248} {approx}\n")
    } else {
        format!("{exact}\n")
    }
}

fn parse_epsilon(text: &str) -> Result<Epsilon, CliError> {
    let value: ScalarValue = text
        .parse()
        .map_err(|e| CliError::Value { message: format!("--epsilon: {e}") })?;
    Epsilon::new(value).map_err(|e| CliError::Value {
        message: format!("--epsilon must be non-negative, got {}", e.0),
    })
}

fn engine_error(err: EngineError) -> CliError {
    match err {
        EngineError::SearchBudgetExceeded { enumerated, budget } => {
            CliError::Budget { enumerated, budget }
        }
        other => CliError::Internal { message: other.to_string() },
    }
}

fn input_strings(paths: &[&PathBuf]) -> Vec<String> {
    paths.iter().map(|p| p.to_string_lossy().into_owned()).collect()
}

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Input { path: path.to_path_buf(), message: e.to_string() })
}

fn read_tree(path: &Path) -> Result<MergeTree, CliError> {
    let bytes = read_file(path)?;
    parse_tree_document(&bytes)
        .map_err(|e| CliError::Input { path: path.to_path_buf(), message: e.to_string() })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes)
        .map_err(|e| CliError::Output { path: path.to_path_buf(), message: e.to_string() })
}
