//! `cqhc`: build codes, decode single shots, run and analyse sweeps.

mod table;
mod verify;
mod vignette;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cqhc::analysis::{estimate_threshold, fit_power_law, reference_comparison};
use cqhc::sim::{run_sweep, SweepConfig};
use cqhc::{
    decode, structured_failure_pattern, BitVector, ConcatCode, DecodeTrace, DecoderKind,
    PerfectSyndromes, Profile,
};

#[derive(Parser)]
#[command(
    name = "cqhc",
    version,
    about = "Concatenated quantum Hamming codes: decoding and Monte Carlo"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Code construction.
    #[command(subcommand)]
    Code(CodeCommand),
    /// Decode one X error with perfect syndromes and print the outcome as JSON.
    Decode(DecodeArgs),
    /// Monte Carlo sweep over physical error rates; writes CSV plus a JSON sidecar.
    Sweep(SweepArgs),
    /// Weighted power-law fit of p_L against p over a window.
    Fit(FitArgs),
    /// Crossing point of two sweep curves.
    Threshold(ThresholdArgs),
    /// Seven three-level bidirectional blocks against one four-level local block.
    Compare(CompareArgs),
    /// Run the audit battery (oracle agreement and scripted scenarios).
    Verify,
    /// Replay a scripted decoding scenario and compare with expected numbers.
    Vignette(VignetteArgs),
}

#[derive(Subcommand)]
enum CodeCommand {
    /// Print parameters and local codes of a profile as JSON.
    Build {
        /// Block lengths, bottom level first, e.g. 15x15x31.
        #[arg(long)]
        profile: Profile,
    },
}

#[derive(Args)]
struct DecodeArgs {
    /// Block lengths, bottom level first, e.g. 15x15.
    #[arg(long)]
    profile: Profile,
    /// local or bidir.
    #[arg(long)]
    decoder: DecoderKind,
    /// Comma-separated 0-based flat qubit indices.
    #[arg(long, value_delimiter = ',', group = "input")]
    error: Option<Vec<usize>>,
    /// Comma-separated qubit addresses, each 1-based labels joined by dots,
    /// top level first (e.g. 1.1,2.2).
    #[arg(long, value_delimiter = ',', group = "input")]
    addresses: Option<Vec<String>>,
    /// Structured pattern: one label pair per level, bottom level first
    /// (e.g. 1:2,1:2 for {(a_2,a_1) : a_ℓ ∈ {1,2}}).
    #[arg(long, value_delimiter = ',', group = "input")]
    pairs: Option<Vec<String>>,
    /// Include the full decoder trace.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON file holding a sweep config, or a sidecar written by an earlier
    /// sweep. Flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Block lengths, bottom level first.
    #[arg(long)]
    profile: Option<Profile>,
    /// local or bidir.
    #[arg(long)]
    decoder: Option<DecoderKind>,
    /// Comma-separated physical error rates.
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    /// Stop a point at this many logical failures [default: 300].
    #[arg(long)]
    min_failures: Option<u64>,
    /// Stop a point after this many trials [default: 1000000000].
    #[arg(long)]
    max_trials: Option<u64>,
    /// Master seed. Falls back to the config file, then to CQHC_SEED.
    #[arg(long)]
    seed: Option<u64>,
    /// Per-point wall-clock limit in seconds; results then depend on machine speed.
    #[arg(long)]
    max_wall_s: Option<f64>,
    /// Worker threads [default: available parallelism].
    #[arg(long)]
    jobs: Option<usize>,
    /// CSV output path; the sidecar goes next to it with a .json extension.
    /// Without it the CSV is written to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Explicit sidecar path.
    #[arg(long)]
    sidecar: Option<PathBuf>,
    /// Leave wall_s empty so that re-runs are byte-identical.
    #[arg(long)]
    omit_timing: bool,
    /// No per-point progress on stderr.
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct FitArgs {
    /// Sweep CSV.
    #[arg(long)]
    input: PathBuf,
    /// Window lo:hi on p, inclusive.
    #[arg(long, value_parser = parse_window)]
    window: (f64, f64),
    /// Ignore points with fewer failures.
    #[arg(long, default_value_t = 1)]
    min_failures: u64,
}

#[derive(Args)]
struct ThresholdArgs {
    /// Sweep CSV of the smaller code.
    #[arg(long)]
    lo: PathBuf,
    /// Sweep CSV of the larger code.
    #[arg(long)]
    hi: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    /// Physical error rate at which to compare.
    #[arg(long, default_value_t = 0.01)]
    p: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum VignetteName {
    /// Weight-4 error on 15x15: local fails, bidirectional recovers it.
    #[value(name = "fig1")]
    TwoBlock,
    /// Weight-12 logical on 15x15 split into two weight-6 halves.
    Split12,
    /// Weight-10 error on 7x7x7 that defeats the bidirectional decoder.
    #[value(name = "appendixA")]
    Weight10,
}

#[derive(Args)]
struct VignetteArgs {
    name: VignetteName,
    /// Print the checks as JSON.
    #[arg(long)]
    json: bool,
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected lo:hi")?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("{e}"))?;
    if !(lo > 0.0 && lo <= hi) {
        return Err("need 0 < lo <= hi".into());
    }
    Ok((lo, hi))
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    io::stdout().lock().write_all(text.as_bytes())?;
    Ok(())
}

#[derive(Serialize)]
struct LevelSummary {
    level: usize,
    n: usize,
    k: usize,
    blocks: usize,
    qubits: usize,
    logicals: usize,
}

#[derive(Serialize)]
struct CodeReport {
    profile: Profile,
    levels: usize,
    n: usize,
    k: usize,
    distance: usize,
    per_level: Vec<LevelSummary>,
    local_codes: Vec<cqhc::qhc::CodeDescription>,
}

fn code_build(profile: Profile) -> Result<()> {
    let code = ConcatCode::new(profile)?;
    let per_level = (1..=code.levels())
        .map(|l| LevelSummary {
            level: l,
            n: code.local(l).n(),
            k: code.local(l).k(),
            blocks: code.block_count(l),
            qubits: code.qubits_at(l),
            logicals: code.logicals_at(l),
        })
        .collect();
    let mut rs: Vec<usize> = (1..=code.levels()).map(|l| code.local(l).r()).collect();
    rs.sort_unstable();
    rs.dedup();
    let local_codes = rs
        .iter()
        .map(|&r| {
            (1..=code.levels())
                .find(|&l| code.local(l).r() == r)
                .expect("present")
        })
        .map(|l| code.local(l).describe())
        .collect();
    print_json(&CodeReport {
        profile: code.profile().clone(),
        levels: code.levels(),
        n: code.num_qubits(),
        k: code.num_logicals(),
        distance: code.distance(),
        per_level,
        local_codes,
    })
}

#[derive(Serialize)]
struct DecodeReport {
    profile: Profile,
    decoder: DecoderKind,
    error: Vec<usize>,
    error_weight: usize,
    recovery: Vec<usize>,
    recovery_weight: usize,
    recovery_equals_error: bool,
    failure: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<DecodeTrace>,
}

fn parse_pair(s: &str) -> Result<(usize, usize)> {
    let (a, b) = s
        .split_once(':')
        .with_context(|| format!("pair `{s}` is not a:b"))?;
    Ok((a.trim().parse()?, b.trim().parse()?))
}

fn parse_address(s: &str) -> Result<Vec<usize>> {
    s.split('.')
        .map(|x| {
            x.trim()
                .parse()
                .with_context(|| format!("bad address `{s}`"))
        })
        .collect()
}

fn decode_cmd(args: DecodeArgs) -> Result<()> {
    let code = ConcatCode::new(args.profile)?;
    let error = if let Some(idx) = &args.error {
        BitVector::from_indices(code.num_qubits(), idx.iter().copied())
            .with_context(|| format!("qubit index out of range for N = {}", code.num_qubits()))?
    } else if let Some(addrs) = &args.addresses {
        let tuples = addrs
            .iter()
            .map(|a| parse_address(a))
            .collect::<Result<Vec<_>>>()?;
        code.error_from_addresses(&tuples)?
    } else if let Some(pairs) = &args.pairs {
        let pairs = pairs
            .iter()
            .map(|p| parse_pair(p))
            .collect::<Result<Vec<_>>>()?;
        structured_failure_pattern(&code, &pairs)?
    } else {
        BitVector::zeros(code.num_qubits())
    };
    let source = PerfectSyndromes::new(&code, &error)?;
    let mut trace = DecodeTrace::default();
    let session = decode(args.decoder, &code, &source, &mut trace)?;
    let recovery = session.recovery();
    print_json(&DecodeReport {
        profile: code.profile().clone(),
        decoder: args.decoder,
        error: error.iter_ones().collect(),
        error_weight: error.weight(),
        recovery: recovery.iter_ones().collect(),
        recovery_weight: recovery.weight(),
        recovery_equals_error: recovery == error,
        failure: code.is_failure(&error, &session),
        trace: args.trace.then_some(trace),
    })
}

fn resolve_config(args: &SweepArgs) -> Result<(SweepConfig, bool)> {
    let mut base: Option<serde_json::Value> = None;
    let mut omit_timing = args.omit_timing;
    if let Some(path) = &args.config {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut value: serde_json::Value =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        omit_timing |= value
            .get("omit_timing")
            .and_then(serde_json::Value::as_bool)
            .unwrap_or(false);
        if let Some(inner) = value.get_mut("config") {
            base = Some(inner.take());
        } else {
            base = Some(value);
        }
    }
    let mut obj = match base {
        Some(serde_json::Value::Object(m)) => m,
        Some(_) => bail!("config file must hold a JSON object"),
        None => serde_json::Map::new(),
    };
    if let Some(p) = &args.profile {
        obj.insert("profile".into(), serde_json::to_value(p)?);
    }
    if let Some(d) = &args.decoder {
        obj.insert("decoder".into(), serde_json::to_value(d)?);
    }
    if let Some(p) = &args.p {
        obj.insert("p".into(), serde_json::to_value(p)?);
    }
    if let Some(m) = args.min_failures {
        obj.insert("min_failures".into(), m.into());
    }
    if let Some(m) = args.max_trials {
        obj.insert("max_trials".into(), m.into());
    }
    if let Some(w) = args.max_wall_s {
        obj.insert("max_wall_s".into(), serde_json::to_value(w)?);
    }
    if let Some(s) = args.seed {
        obj.insert("seed".into(), s.into());
    }
    if !obj.contains_key("seed") {
        if let Ok(env) = std::env::var("CQHC_SEED") {
            let s: u64 = env
                .trim()
                .parse()
                .context("CQHC_SEED is not an unsigned integer")?;
            obj.insert("seed".into(), s.into());
        }
    }
    for key in ["profile", "decoder", "p", "seed"] {
        if !obj.contains_key(key) {
            bail!("missing `{key}`: pass --{key} or a --config file");
        }
    }
    let config: SweepConfig =
        serde_json::from_value(serde_json::Value::Object(obj)).context("invalid sweep config")?;
    config.validate()?;
    Ok((config, omit_timing))
}

fn sidecar_path(args: &SweepArgs) -> Option<PathBuf> {
    args.sidecar
        .clone()
        .or_else(|| args.out.as_ref().map(|o| o.with_extension("json")))
}

fn sweep_cmd(args: SweepArgs) -> Result<()> {
    let (config, omit_timing) = resolve_config(&args)?;
    let quiet = args.quiet;
    let mut record = run_sweep(&config, args.jobs, |pt| {
        if !quiet {
            eprintln!(
                "p = {}: {} failures / {} trials, p_L = {:.3e}{}",
                pt.p,
                pt.failures,
                pt.trials,
                pt.p_l,
                if pt.low_confidence {
                    " (low confidence)"
                } else {
                    ""
                }
            );
        }
    })?;
    if omit_timing {
        for pt in &mut record.points {
            pt.wall_s = 0.0;
        }
    }
    let csv = table::to_csv(&record.points, omit_timing)?;
    match &args.out {
        Some(path) => {
            fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?
        }
        None => io::stdout().lock().write_all(&csv)?,
    }
    if let Some(path) = sidecar_path(&args) {
        let sidecar = table::Sidecar {
            record,
            omit_timing,
        };
        let mut text = serde_json::to_string_pretty(&sidecar)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn read_points(path: &Path) -> Result<Vec<cqhc::sim::PointEstimate>> {
    table::read_csv(path).with_context(|| format!("reading {}", path.display()))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Code(CodeCommand::Build { profile }) => code_build(profile)?,
        Command::Decode(args) => decode_cmd(args)?,
        Command::Sweep(args) => sweep_cmd(args)?,
        Command::Fit(args) => {
            let points = read_points(&args.input)?;
            print_json(&fit_power_law(&points, args.window, args.min_failures)?)?;
        }
        Command::Threshold(args) => {
            let lo = read_points(&args.lo)?;
            let hi = read_points(&args.hi)?;
            print_json(&estimate_threshold(&lo, &hi)?)?;
        }
        Command::Compare(args) => {
            if !(args.p > 0.0 && args.p < 1.0) {
                bail!("p must lie in (0, 1)");
            }
            print_json(&reference_comparison(args.p))?;
        }
        Command::Verify => return verify::run(),
        Command::Vignette(args) => {
            let checks = match args.name {
                VignetteName::TwoBlock => vignette::two_block()?,
                VignetteName::Split12 => vignette::split_logical()?,
                VignetteName::Weight10 => vignette::weight10()?,
            };
            return vignette::report(&checks, args.json);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e)
            if e.downcast_ref::<io::Error>()
                .is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe) =>
        {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
