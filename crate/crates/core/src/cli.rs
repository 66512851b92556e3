//! Command-line front end: argument definitions, document layout and
//! serialization. `main.rs` only parses, calls [`run`] and exits.
//!
//! Exit codes: 0 success, 1 domain error, 2 usage error, 3 verification
//! failure.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::channel::{ChannelConfig, PowerBudget, RatePair, Scheme};
use crate::error::MacError;
use crate::montecarlo::{self, SampleConfig, SicValidationReport};
use crate::rates::max_sum_rate;
use crate::regions::{self, EquivalenceReport, Frontier, Region};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VERIFICATION_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "macregion",
    version,
    about = "Two-user Gaussian MAC rate regions"
)]
pub struct Cli {
    /// Write `null` instead of the wall-clock time into the manifest, making
    /// repeated runs byte-identical.
    #[arg(long, global = true)]
    pub no_timestamp: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Superposition-coding region as half-spaces and vertices.
    Region {
        #[command(flatten)]
        budget: BudgetArgs,
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
    },
    /// Sampled Pareto frontier of one scheme.
    Frontier {
        #[arg(long, value_enum)]
        scheme: SchemeArg,
        #[command(flatten)]
        budget: BudgetArgs,
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long, default_value_t = regions::DEFAULT_RESOLUTION)]
        resolution: usize,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
        /// Write the document here instead of stdout. CSV output gets a
        /// `<out>.manifest.json` sidecar.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sum-power equivalence check of superposition, TD and FD.
    Compare {
        #[arg(long, allow_negative_numbers = true)]
        sum_power: f64,
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long, default_value_t = regions::DEFAULT_RESOLUTION)]
        resolution: usize,
        #[arg(long, default_value_t = regions::DEFAULT_TOLERANCE)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
    },
    /// Monte Carlo check of the SIC rates.
    Validate {
        #[arg(long, allow_negative_numbers = true)]
        p1: f64,
        #[arg(long, allow_negative_numbers = true)]
        p2: f64,
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long, default_value_t = montecarlo::DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        stream: u64,
        #[arg(long, default_value_t = montecarlo::DEFAULT_TOLERANCE)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
    },
    /// Maximum sum rate of a scheme over a log-spaced noise grid.
    Sweep {
        #[arg(long, value_enum, default_value_t = SchemeArg::Sc)]
        scheme: SchemeArg,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long, allow_negative_numbers = true)]
        noise_min: f64,
        #[arg(long, allow_negative_numbers = true)]
        noise_max: f64,
        #[arg(long)]
        steps: usize,
        /// Powers and noise bounds are given in dB.
        #[arg(long)]
        db: bool,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
    },
}

/// Either both per-user powers or a single sum power.
#[derive(Debug, Clone, Copy, Args)]
pub struct BudgetArgs {
    #[arg(
        long,
        allow_negative_numbers = true,
        requires = "p2",
        conflicts_with = "sum_power",
        required_unless_present = "sum_power"
    )]
    pub p1: Option<f64>,
    #[arg(
        long,
        allow_negative_numbers = true,
        requires = "p1",
        conflicts_with = "sum_power",
        required_unless_present = "sum_power"
    )]
    pub p2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub sum_power: Option<f64>,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct ChannelArgs {
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub noise: f64,
    /// Powers and noise are given in dB.
    #[arg(long)]
    pub db: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Sc,
    Td,
    Fd,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Sc => Scheme::Superposition,
            SchemeArg::Td => Scheme::TimeDivision,
            SchemeArg::Fd => Scheme::FrequencyDivision,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Domain(#[from] MacError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Domain(MacError::Config(_)) => EXIT_USAGE,
            _ => EXIT_DOMAIN,
        }
    }
}

/// What a command produced: text for stdout and stderr, and the exit code.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CommandOutput {
    pub stdout: String,
    pub stderr: String,
    pub exit_code: i32,
}

/// Parameter echo. Values are the linear quantities actually used, so
/// rerunning with them (without `--db`) reproduces the document.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Parameters {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sum_power: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stream: Option<u64>,
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub parameters: Parameters,
    pub timestamp_unix: Option<u64>,
}

impl RunManifest {
    fn new(command: &'static str, parameters: Parameters, with_timestamp: bool) -> Self {
        let timestamp_unix = with_timestamp.then(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        });
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            parameters,
            timestamp_unix,
        }
    }
}

#[derive(Serialize)]
struct RegionBody<'a> {
    halfspaces: &'a [regions::HalfSpace],
    vertices: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct RegionDocument<'a> {
    manifest: &'a RunManifest,
    scheme: &'static str,
    region: RegionBody<'a>,
}

#[derive(Serialize)]
struct FrontierDocument<'a> {
    manifest: &'a RunManifest,
    scheme: &'static str,
    points: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct CompareDocument<'a> {
    manifest: &'a RunManifest,
    scheme: [&'static str; 3],
    report: &'a EquivalenceReport,
}

#[derive(Serialize)]
struct ValidateDocument<'a> {
    manifest: &'a RunManifest,
    scheme: &'static str,
    report: &'a SicValidationReport,
}

#[derive(Serialize)]
struct SweepRow {
    noise: f64,
    sum_rate: f64,
}

#[derive(Serialize)]
struct SweepDocument<'a> {
    manifest: &'a RunManifest,
    scheme: &'static str,
    rows: &'a [SweepRow],
}

/// Shortest decimal form that parses back to the identical `f64`.
pub fn format_number(x: f64) -> String {
    format!("{x:?}")
}

/// CSV frontier export: `r1,r2` header, one LF-terminated row per point.
pub fn frontier_to_csv(f: &Frontier) -> String {
    let mut s = String::from("r1,r2\n");
    for p in f.points() {
        let _ = writeln!(s, "{},{}", format_number(p.r1), format_number(p.r2));
    }
    s
}

/// Parses the CSV written by [`frontier_to_csv`].
pub fn frontier_from_csv(text: &str) -> Result<Vec<RatePair>, CliError> {
    let mut lines = text.lines();
    if lines.next() != Some("r1,r2") {
        return Err(CliError::Usage("missing `r1,r2` header".into()));
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let (a, b) = line
                .split_once(',')
                .ok_or_else(|| CliError::Usage(format!("malformed row `{line}`")))?;
            let parse = |v: &str| {
                v.parse::<f64>()
                    .map_err(|e| CliError::Usage(format!("bad number `{v}`: {e}")))
            };
            Ok(RatePair {
                r1: parse(a)?,
                r2: parse(b)?,
            })
        })
        .collect()
}

/// Extracts the points of a frontier JSON document.
pub fn frontier_from_json(text: &str) -> Result<Vec<RatePair>, CliError> {
    #[derive(serde::Deserialize)]
    struct Doc {
        points: Vec<[f64; 2]>,
    }
    let doc: Doc = serde_json::from_str(text)?;
    Ok(doc
        .points
        .into_iter()
        .map(|[r1, r2]| RatePair { r1, r2 })
        .collect())
}

fn pairs(points: &[RatePair]) -> Vec<[f64; 2]> {
    points.iter().map(|p| [p.r1, p.r2]).collect()
}

fn to_json<T: Serialize>(doc: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(doc)?;
    s.push('\n');
    Ok(s)
}

fn linear(x: f64, db: bool) -> f64 {
    if db {
        10f64.powf(x / 10.0)
    } else {
        x
    }
}

fn resolve_budget(
    args: &BudgetArgs,
    db: bool,
    params: &mut Parameters,
) -> Result<PowerBudget, CliError> {
    let budget = match (args.p1, args.p2, args.sum_power) {
        (Some(p1), Some(p2), None) => {
            let (p1, p2) = (linear(p1, db), linear(p2, db));
            params.p1 = Some(p1);
            params.p2 = Some(p2);
            PowerBudget::per_user(p1, p2)?
        }
        (None, None, Some(p)) => {
            let p = linear(p, db);
            params.sum_power = Some(p);
            PowerBudget::sum_power(p)?
        }
        _ => {
            return Err(CliError::Usage(
                "give either --p1 and --p2, or --sum-power".into(),
            ))
        }
    };
    Ok(budget)
}

fn resolve_channel(args: &ChannelArgs, params: &mut Parameters) -> Result<ChannelConfig, CliError> {
    let noise = linear(args.noise, args.db);
    params.noise = Some(noise);
    Ok(ChannelConfig::with_noise(noise)?)
}

/// Plain document to stdout, or to `out` (plus a manifest sidecar for CSV).
fn emit(
    body: String,
    format: OutputFormat,
    manifest: &RunManifest,
    out: Option<&Path>,
) -> Result<CommandOutput, CliError> {
    let manifest_json = || to_json(manifest);
    let mut output = CommandOutput::default();
    match (out, format) {
        (Some(path), OutputFormat::Json) => std::fs::write(path, body)?,
        (Some(path), OutputFormat::Csv) => {
            std::fs::write(path, body)?;
            let mut sidecar = path.as_os_str().to_owned();
            sidecar.push(".manifest.json");
            std::fs::write(PathBuf::from(sidecar), manifest_json()?)?;
        }
        (None, OutputFormat::Json) => output.stdout = body,
        (None, OutputFormat::Csv) => {
            output.stdout = body;
            output.stderr = manifest_json()?;
        }
    }
    Ok(output)
}

fn csv_table(header: &str, rows: &[Vec<String>]) -> String {
    let mut s = format!("{header}\n");
    for row in rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

pub fn run(cli: &Cli) -> Result<CommandOutput, CliError> {
    let stamp = !cli.no_timestamp;
    match &cli.command {
        Command::Region {
            budget,
            channel,
            format,
        } => {
            let mut params = Parameters {
                format: Some(*format),
                ..Default::default()
            };
            let budget = resolve_budget(budget, channel.db, &mut params)?;
            let ch = resolve_channel(channel, &mut params)?;
            let region = regions::superposition_region(&budget, &ch)?;
            let manifest = RunManifest::new("region", params, stamp);
            emit(
                region_document(&region, &manifest, *format)?,
                *format,
                &manifest,
                None,
            )
        }
        Command::Frontier {
            scheme,
            budget,
            channel,
            resolution,
            format,
            out,
        } => {
            let scheme = Scheme::from(*scheme);
            let mut params = Parameters {
                scheme: Some(scheme.short_name()),
                resolution: Some(*resolution),
                format: Some(*format),
                ..Default::default()
            };
            let budget = resolve_budget(budget, channel.db, &mut params)?;
            let ch = resolve_channel(channel, &mut params)?;
            let frontier = regions::frontier(scheme, &budget, &ch, *resolution)?;
            let manifest = RunManifest::new("frontier", params, stamp);
            let body = match format {
                OutputFormat::Csv => frontier_to_csv(&frontier),
                OutputFormat::Json => to_json(&FrontierDocument {
                    manifest: &manifest,
                    scheme: scheme.short_name(),
                    points: pairs(frontier.points()),
                })?,
            };
            emit(body, *format, &manifest, out.as_deref())
        }
        Command::Compare {
            sum_power,
            channel,
            resolution,
            tol,
            format,
        } => {
            let mut params = Parameters {
                resolution: Some(*resolution),
                tol: Some(*tol),
                format: Some(*format),
                ..Default::default()
            };
            let p_total = linear(*sum_power, channel.db);
            params.sum_power = Some(p_total);
            let ch = resolve_channel(channel, &mut params)?;
            let report = regions::verify_equivalence(p_total, &ch, *resolution, *tol)?;
            let manifest = RunManifest::new("compare", params, stamp);
            let body = match format {
                OutputFormat::Json => to_json(&CompareDocument {
                    manifest: &manifest,
                    scheme: ["sc", "td", "fd"],
                    report: &report,
                })?,
                OutputFormat::Csv => {
                    let h = &report.pairwise_hausdorff;
                    let rows: Vec<Vec<String>> = [
                        ("sum_capacity", format_number(report.sum_capacity)),
                        ("hausdorff_sc_td", format_number(h.sc_td)),
                        ("hausdorff_sc_fd", format_number(h.sc_fd)),
                        ("hausdorff_td_fd", format_number(h.td_fd)),
                        ("tolerance", format_number(report.tolerance)),
                        ("resolution", report.resolution.to_string()),
                        ("verdict", report.verdict.to_string()),
                    ]
                    .into_iter()
                    .map(|(k, v)| vec![k.to_string(), v])
                    .collect();
                    csv_table("field,value", &rows)
                }
            };
            let mut output = emit(body, *format, &manifest, None)?;
            output.exit_code = if report.verdict {
                EXIT_OK
            } else {
                EXIT_VERIFICATION_FAILED
            };
            Ok(output)
        }
        Command::Validate {
            p1,
            p2,
            channel,
            samples,
            seed,
            stream,
            tol,
            format,
        } => {
            let (p1, p2) = (linear(*p1, channel.db), linear(*p2, channel.db));
            let mut params = Parameters {
                p1: Some(p1),
                p2: Some(p2),
                samples: Some(*samples),
                seed: Some(*seed),
                stream: Some(*stream),
                tol: Some(*tol),
                format: Some(*format),
                ..Default::default()
            };
            let ch = resolve_channel(channel, &mut params)?;
            let cfg = SampleConfig::new(*seed, *stream, *samples)?;
            let report = montecarlo::validate_sic_chain(p1, p2, &ch, &cfg, *tol)?;
            let manifest = RunManifest::new("validate", params, stamp);
            let body = match format {
                OutputFormat::Json => to_json(&ValidateDocument {
                    manifest: &manifest,
                    scheme: "sc",
                    report: &report,
                })?,
                OutputFormat::Csv => validation_csv(&report),
            };
            let mut output = emit(body, *format, &manifest, None)?;
            output.exit_code = if report.verdict {
                EXIT_OK
            } else {
                EXIT_VERIFICATION_FAILED
            };
            Ok(output)
        }
        Command::Sweep {
            scheme,
            budget,
            noise_min,
            noise_max,
            steps,
            db,
            format,
        } => {
            let scheme = Scheme::from(*scheme);
            let (lo, hi) = (linear(*noise_min, *db), linear(*noise_max, *db));
            if !(lo > 0.0 && lo.is_finite() && hi.is_finite()) {
                return Err(CliError::Usage(format!(
                    "noise range must be positive and finite, got [{lo}, {hi}]"
                )));
            }
            if lo > hi {
                return Err(CliError::Usage(format!(
                    "--noise-min ({lo}) exceeds --noise-max ({hi})"
                )));
            }
            if *steps == 0 {
                return Err(CliError::Usage("--steps must be at least 1".into()));
            }
            let mut params = Parameters {
                scheme: Some(scheme.short_name()),
                noise_min: Some(lo),
                noise_max: Some(hi),
                steps: Some(*steps),
                format: Some(*format),
                ..Default::default()
            };
            let budget = resolve_budget(budget, *db, &mut params)?;
            let rows = log_grid(lo, hi, *steps)
                .into_iter()
                .map(|noise| {
                    let ch = ChannelConfig::with_noise(noise)?;
                    Ok(SweepRow {
                        noise,
                        sum_rate: max_sum_rate(scheme, &budget, &ch)?,
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            let manifest = RunManifest::new("sweep", params, stamp);
            let body = match format {
                OutputFormat::Json => to_json(&SweepDocument {
                    manifest: &manifest,
                    scheme: scheme.short_name(),
                    rows: &rows,
                })?,
                OutputFormat::Csv => {
                    let rows: Vec<Vec<String>> = rows
                        .iter()
                        .map(|r| vec![format_number(r.noise), format_number(r.sum_rate)])
                        .collect();
                    csv_table("noise,sum_rate", &rows)
                }
            };
            emit(body, *format, &manifest, None)
        }
    }
}

/// `steps` log-spaced values from `lo` to `hi`, both endpoints exact.
fn log_grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![lo];
    }
    let ratio = (hi / lo).ln();
    (0..steps)
        .map(|j| match j {
            0 => lo,
            j if j == steps - 1 => hi,
            j => lo * (ratio * j as f64 / (steps - 1) as f64).exp(),
        })
        .collect()
}

fn region_document(
    region: &Region,
    manifest: &RunManifest,
    format: OutputFormat,
) -> Result<String, CliError> {
    match format {
        OutputFormat::Json => to_json(&RegionDocument {
            manifest,
            scheme: Scheme::Superposition.short_name(),
            region: RegionBody {
                halfspaces: region.halfspaces(),
                vertices: pairs(region.vertices()),
            },
        }),
        OutputFormat::Csv => {
            let mut rows: Vec<Vec<String>> = region
                .halfspaces()
                .iter()
                .map(|h| {
                    vec![
                        "halfspace".into(),
                        format_number(h.a1),
                        format_number(h.a2),
                        format_number(h.b),
                    ]
                })
                .collect();
            rows.extend(region.vertices().iter().map(|v| {
                vec![
                    "vertex".into(),
                    format_number(v.r1),
                    format_number(v.r2),
                    String::new(),
                ]
            }));
            Ok(csv_table("kind,v1,v2,v3", &rows))
        }
    }
}

fn validation_csv(r: &SicValidationReport) -> String {
    let mut rows = Vec::new();
    let mut push = |name: &str, value: f64, reference: f64, tol: f64, pass: bool| {
        rows.push(vec![
            name.to_string(),
            format_number(value),
            format_number(reference),
            format_number(tol),
            pass.to_string(),
        ]);
    };
    for (name, c) in [
        ("plugin_user1_after_cancel", &r.user1_after_cancel),
        ("plugin_user2_with_interference", &r.user2_with_interference),
        ("plugin_joint", &r.joint),
    ] {
        push(name, c.estimate.value, c.analytic, c.tolerance, c.pass);
    }
    push(
        "chain_rule",
        r.chain.sum_of_stages,
        r.chain.joint,
        r.chain.tolerance,
        r.chain.pass,
    );
    for (name, c) in [
        ("knn_user1_after_cancel", &r.knn.user1_after_cancel),
        (
            "knn_user2_with_interference",
            &r.knn.user2_with_interference,
        ),
        ("knn_joint", &r.knn.joint),
    ] {
        push(name, c.estimate.value, c.plugin_value, c.tolerance, c.pass);
    }
    for (name, c) in [
        (
            "residual_after_cancelling_user2",
            &r.residuals.after_cancelling_user2,
        ),
        (
            "residual_after_cancelling_both",
            &r.residuals.after_cancelling_both,
        ),
    ] {
        push(
            name,
            c.empirical,
            c.expected,
            montecarlo::VARIANCE_SIGMAS * c.std_error,
            c.pass,
        );
    }
    let mut s = csv_table("check,value,reference,tolerance,pass", &rows);
    let _ = writeln!(s, "verdict,,,,{}", r.verdict);
    s
}
