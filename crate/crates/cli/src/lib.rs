//! Command-line front end: argument parsing, provenance headers, and report
//! rendering around the `ordnoise` library.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ordnoise::bindesign::sweep;
use ordnoise::bounds::{bound_curve, Method};
use ordnoise::calibrate::{estimate_from_dataset, one_hot_surrogate, synth_rmse_curve};
use ordnoise::io::{
    fmt_sig, read_counts_csv, read_survey_csv, write_comments, write_curve, write_rmse_curve, write_survey,
    write_sweep, write_sweep_summary,
};
use ordnoise::noise::{apply_noise, generate_synth};
use ordnoise::resample::ResamplePlan;
use ordnoise::stats::{chi2_uniformity, compare_uniformity, crosstab, describe_spread, Chi2Variant, CountVector};
use ordnoise::{BinningScheme, Error, NoiseModel, RngSpec};

pub const TOOL: &str = "ordnoise";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
const BRAND: &str = "1-6,7-8,9-10";

#[derive(Debug, Parser)]
#[command(name = TOOL, version, about = "Noise ceilings for binned ordinal survey labels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthetic survey with uniform true scores and clipped uniform noise.
    Synth(SynthArgs),
    /// Accuracy/precision ceilings, baselines, class shares and NPS over v.
    Bounds(BoundsArgs),
    /// Exact ceilings for every 2- or 3-bin layout of the scale.
    SweepBins(SweepArgs),
    /// Regression RMSE of noisy on true scores over v.
    RmseCurve(RmseArgs),
    /// Estimate a survey's noise level and its accuracy ceiling.
    Estimate(EstimateArgs),
    /// Chi-square uniformity of uncalibrated vs calibrated score counts.
    Chi2(Chi2Args),
    /// Spread and score-by-category table for a response-level file.
    CityStats(CityArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Write here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Master seed; drawn at random (and reported) when absent.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    /// Noise half-width.
    #[arg(long, default_value_t = 0)]
    pub v: u8,
    /// Add indicator features of the true score.
    #[arg(long)]
    pub one_hot: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Exact,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long, default_value = BRAND)]
    pub scheme: String,
    #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
    pub method: MethodArg,
    #[arg(long, default_value_t = 9)]
    pub vmax: u8,
    /// Monte Carlo population size.
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    /// Monte Carlo resampling iterations.
    #[arg(long, default_value_t = ResamplePlan::DEFAULT_ITERATIONS)]
    pub iterations: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Table {
    /// One row per (scheme, v).
    Long,
    /// One row per (width class, v).
    Summary,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 9)]
    pub vmax: u8,
    #[arg(long, value_enum, default_value_t = Table::Long)]
    pub table: Table,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct RmseArgs {
    #[arg(long, default_value_t = 9)]
    pub vmax: u8,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Survey CSV with a `score` column and feature columns.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = BRAND)]
    pub scheme: String,
    /// Observed model accuracy to express relative to the ceiling.
    #[arg(long)]
    pub actual: Option<f64>,
    #[arg(long, default_value_t = ResamplePlan::DEFAULT_ITERATIONS)]
    pub iterations: usize,
    /// Synthetic sample size for the RMSE curve.
    #[arg(long, default_value_t = 10_000)]
    pub curve_n: usize,
    #[arg(long, default_value_t = 9)]
    pub vmax: u8,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Chi2Args {
    /// `score,count` file for the plain numeric survey.
    #[arg(long)]
    pub uncalibrated: PathBuf,
    /// `score,count` file for the anchored survey.
    #[arg(long)]
    pub calibrated: PathBuf,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CityArgs {
    /// Response-level CSV with `score` and `self_category` columns.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

/// Failure of a run, rendered as JSON on stderr by the binary.
#[derive(Debug)]
pub enum CliError {
    Usage(clap::Error),
    Run(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Run(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Run(Error::Io(e))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        if e.is_io() {
            CliError::Run(Error::Io(e.into()))
        } else {
            CliError::Run(Error::Invalid(e.to_string()))
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Run(_) => 1,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            CliError::Usage(e) => json!({
                "error": { "kind": "usage", "message": e.to_string().trim_end() }
            }),
            CliError::Run(e) => json!({
                "error": { "kind": e.kind(), "message": e.to_string() }
            }),
        }
    }
}

/// Rounds every float in `value` to 12 significant digits.
pub fn round_floats(value: Value) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            fmt_sig(x)
                .parse::<f64>()
                .ok()
                .and_then(serde_json::Number::from_f64)
                .map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_floats).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_floats(v))).collect()),
        other => other,
    }
}

fn report(command: &str, seed: Option<u64>, config: Value, results: Value, warnings: Vec<String>) -> Value {
    round_floats(json!({
        "tool": TOOL,
        "version": VERSION,
        "command": command,
        "seed": seed,
        "config": config,
        "results": results,
        "warnings": warnings,
    }))
}

fn provenance(command: &str, seed: Option<u64>, config: &Value) -> Vec<String> {
    vec![
        format!("tool: {TOOL} {VERSION}"),
        format!("command: {command}"),
        match seed {
            Some(s) => format!("seed: {s}"),
            None => "seed: none (exact computation; --seed is ignored)".to_string(),
        },
        format!("config: {config}"),
    ]
}

fn seed_or_random(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(rand::random)
}

fn note_ignored_seed(seed: Option<u64>, warnings: &mut Vec<String>) {
    if seed.is_some() {
        warnings.push("exact mode is deterministic; --seed is ignored".to_string());
    }
}

/// Sends output to `path` if given, else to `stdout`.
fn emit(
    path: Option<&Path>,
    stdout: &mut dyn Write,
    body: impl FnOnce(&mut dyn Write) -> Result<(), CliError>,
) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            body(&mut w)?;
            w.flush()?;
        }
        None => body(stdout)?,
    }
    Ok(())
}

fn emit_json(path: Option<&Path>, stdout: &mut dyn Write, value: &Value) -> Result<(), CliError> {
    emit(path, stdout, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)?;
        Ok(())
    })
}

/// Parses `args` (including the program name) and runs the command,
/// writing primary output to `stdout` unless `--output` is given and
/// warnings to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(CliError::Usage)?;
    let mut warnings = Vec::new();
    match cli.command {
        Command::Synth(a) => synth(a, stdout, &mut warnings)?,
        Command::Bounds(a) => bounds(a, stdout, &mut warnings)?,
        Command::SweepBins(a) => sweep_bins(a, stdout, &mut warnings)?,
        Command::RmseCurve(a) => rmse_curve(a, stdout)?,
        Command::Estimate(a) => return estimate(a, stdout),
        Command::Chi2(a) => return chi2(a, stdout),
        Command::CityStats(a) => return city_stats(a, stdout),
    }
    for w in warnings {
        writeln!(stderr, "warning: {w}")?;
    }
    Ok(())
}

fn synth(a: SynthArgs, stdout: &mut dyn Write, _warnings: &mut Vec<String>) -> Result<(), CliError> {
    let seed = seed_or_random(a.common.seed);
    let rng = RngSpec::new(seed);
    let data = if a.one_hot {
        one_hot_surrogate(a.n, a.v, &rng)?
    } else {
        apply_noise(
            &generate_synth(a.n, &rng.child(0))?,
            NoiseModel::new(a.v)?,
            &rng.child(1),
        )?
    };
    let config = json!({ "n": a.n, "v": a.v, "one_hot": a.one_hot });
    emit(a.common.output.as_deref(), stdout, |w| {
        write_comments(w, &provenance("synth", Some(seed), &config))?;
        write_survey(w, &data)?;
        Ok(())
    })
}

fn bounds(a: BoundsArgs, stdout: &mut dyn Write, warnings: &mut Vec<String>) -> Result<(), CliError> {
    let scheme = BinningScheme::parse(&a.scheme)?;
    let (method, seed, config) = match a.method {
        MethodArg::Exact => {
            note_ignored_seed(a.common.seed, warnings);
            (
                Method::Exact,
                None,
                json!({ "scheme": scheme.to_string(), "method": "exact", "vmax": a.vmax }),
            )
        }
        MethodArg::Mc => {
            let seed = seed_or_random(a.common.seed);
            let plan = ResamplePlan::new(RngSpec::new(seed)).iterations(a.iterations);
            let config = json!({
                "scheme": scheme.to_string(), "method": "mc", "vmax": a.vmax,
                "n": a.n, "iterations": a.iterations,
            });
            (Method::MonteCarlo { n: a.n, plan }, Some(seed), config)
        }
    };
    let curve = bound_curve(&scheme, a.vmax, &method)?;
    match a.format {
        Format::Csv => emit(a.common.output.as_deref(), stdout, |w| {
            write_comments(w, &provenance("bounds", seed, &config))?;
            write_curve(w, &curve)?;
            Ok(())
        }),
        Format::Json => {
            let results = json!({
                "labels": scheme.labels(),
                "records": serde_json::to_value(&curve.records)?,
            });
            let value = report("bounds", seed, config, results, warnings.clone());
            emit_json(a.common.output.as_deref(), stdout, &value)
        }
    }
}

fn sweep_bins(a: SweepArgs, stdout: &mut dyn Write, warnings: &mut Vec<String>) -> Result<(), CliError> {
    note_ignored_seed(a.common.seed, warnings);
    let result = sweep(a.k, a.vmax)?;
    let table = match a.table {
        Table::Long => "long",
        Table::Summary => "summary",
    };
    let config = json!({ "k": a.k, "vmax": a.vmax, "table": table });
    emit(a.common.output.as_deref(), stdout, |w| {
        write_comments(w, &provenance("sweep-bins", None, &config))?;
        match a.table {
            Table::Long => write_sweep(w, &result)?,
            Table::Summary => write_sweep_summary(w, &result)?,
        }
        Ok(())
    })
}

fn rmse_curve(a: RmseArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let seed = seed_or_random(a.common.seed);
    let curve = synth_rmse_curve(a.vmax, a.n, &RngSpec::new(seed))?;
    let config = json!({ "vmax": a.vmax, "n": a.n });
    emit(a.common.output.as_deref(), stdout, |w| {
        write_comments(w, &provenance("rmse-curve", Some(seed), &config))?;
        write_rmse_curve(w, &curve)?;
        Ok(())
    })
}

fn estimate(a: EstimateArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let seed = seed_or_random(a.common.seed);
    let rng = RngSpec::new(seed);
    let scheme = BinningScheme::parse(&a.scheme)?;
    let survey = read_survey_csv(&a.input)?;
    let curve = synth_rmse_curve(a.vmax, a.curve_n, &rng.child(0))?;
    let plan = ResamplePlan::new(rng.child(1)).iterations(a.iterations);
    let est = estimate_from_dataset(&survey.dataset, &scheme, &plan, &curve, a.actual)?;

    let mut warnings = survey.warnings;
    warnings.extend(est.warnings.iter().cloned());
    let config = json!({
        "input": a.input.display().to_string(),
        "scheme": scheme.to_string(),
        "actual": a.actual,
        "iterations": a.iterations,
        "curve_n": a.curve_n,
        "vmax": a.vmax,
    });
    let results = json!({
        "rows": survey.dataset.len(),
        "features": survey.dataset.feature_count(),
        "real_rmse": est.real_rmse.mean,
        "real_rmse_std": est.real_rmse.std,
        "full_fit_rmse": est.full_fit_rmse,
        "v_hat": est.v_hat,
        "full_fit_v_hat": est.full_fit_v_hat,
        "accuracy_ceiling": est.accuracy_ceiling,
        "relative_score": est.relative_score,
        "rmse_curve": curve.values(),
    });
    emit_json(
        a.common.output.as_deref(),
        stdout,
        &report("estimate", Some(seed), config, results, warnings),
    )
}

fn chi2(a: Chi2Args, stdout: &mut dyn Write) -> Result<(), CliError> {
    let u = read_counts_csv(&a.uncalibrated)?;
    let c = read_counts_csv(&a.calibrated)?;
    let comparisons = compare_uniformity(&u, &c)?;
    let mut warnings = Vec::new();
    for cmp in &comparisons {
        for (side, r) in [("uncalibrated", &cmp.uncalibrated), ("calibrated", &cmp.calibrated)] {
            warnings.extend(r.warnings.iter().map(|w| format!("{side} {}: {w}", cmp.variant)));
        }
    }
    warnings.push("the log-counts variant is an interpretation, not a standard test".to_string());
    let config = json!({
        "uncalibrated": a.uncalibrated.display().to_string(),
        "calibrated": a.calibrated.display().to_string(),
    });
    let results = json!({
        "uncalibrated_counts": u.counts(),
        "calibrated_counts": c.counts(),
        "variants": serde_json::to_value(&comparisons)?,
    });
    emit_json(
        a.output.as_deref(),
        stdout,
        &report("chi2", None, config, results, warnings),
    )
}

fn city_stats(a: CityArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let survey = read_survey_csv(&a.input)?;
    let records = survey.dataset.records();
    let scores: Vec<_> = records.iter().map(|r| r.biased_score).collect();
    let values: Vec<f64> = scores.iter().map(|s| s.get() as f64).collect();
    let spread = describe_spread(&values)?;
    let mut warnings = survey.warnings;

    let labelled: Vec<_> = records
        .iter()
        .filter_map(|r| r.self_category.clone().map(|c| (r.biased_score, c)))
        .collect();
    let table = if labelled.is_empty() {
        warnings.push("no `self_category` answers; cross-tabulation skipped".to_string());
        Value::Null
    } else {
        if labelled.len() < records.len() {
            warnings.push(format!(
                "{} responses without a self_category left out of the cross-tabulation",
                records.len() - labelled.len()
            ));
        }
        let (s, c): (Vec<_>, Vec<_>) = labelled.into_iter().unzip();
        let t = crosstab(&s, &c)?;
        json!({
            "labels": t.labels,
            "counts": t.counts,
            "modal": t.modal,
            "modal_boundaries": t.modal_boundaries(),
        })
    };
    let counts = CountVector::from_scores(&scores)?;
    let uniformity = Chi2Variant::ALL
        .iter()
        .map(|&v| chi2_uniformity(&counts, v))
        .collect::<Result<Vec<_>, _>>()?;
    for r in &uniformity {
        warnings.extend(r.warnings.iter().map(|w| format!("{}: {w}", r.variant)));
    }
    let config = json!({ "input": a.input.display().to_string() });
    let results = json!({
        "responses": records.len(),
        "spread": { "mean": spread.mean, "two_sigma": spread.two_sigma, "display": spread.to_string() },
        "counts": counts.counts(),
        "crosstab": table,
        "uniformity": serde_json::to_value(&uniformity)?,
    });
    emit_json(
        a.output.as_deref(),
        stdout,
        &report("city-stats", None, config, results, warnings),
    )
}
