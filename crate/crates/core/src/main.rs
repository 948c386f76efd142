use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use eprsteer::distributions::{BinningPolicy, JointDistribution, Quadrature};
use eprsteer::error::Error;
use eprsteer::fock::{self, DTable};
use eprsteer::gaussian::GaussianTwoModeState;
use eprsteer::io::{self, Sidecar, Units};
use eprsteer::simulate;
use eprsteer::steering::{self, SchwingerConfig};
use eprsteer::Result;

#[derive(Parser)]
#[command(name = "eprsteer", version, about = "Mesoscopic EPR steering analysis and boson-number certification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a record CSV (or summary statistics) into a steering report.
    Analyze(AnalyzeArgs),
    /// Certify boson-number lower bounds from a measured Duan parameter.
    Certify(CertifyArgs),
    /// Emit threshold/bound curve data as CSV.
    Curves(CurvesArgs),
    /// Generate synthetic record files from a Gaussian state.
    Simulate(SimulateArgs),
    /// Regenerate the support-restricted Duan bound table.
    FockTable(FockTableArgs),
}

#[derive(Args, Serialize, Deserialize, Default, Clone)]
struct AnalyzeArgs {
    /// Record CSV input (canonical schema).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    input: Option<PathBuf>,
    /// JSON report output path (stdout if omitted).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<PathBuf>,
    /// Bins per axis for the joint histograms.
    #[arg(long)]
    bins: Option<usize>,
    /// Apply the per-bin n/(n-1) variance correction.
    #[arg(long)]
    bessel: Option<bool>,
    /// Delta values: a number or a:b:step range, repeatable.
    #[arg(long = "delta")]
    delta: Option<Vec<String>>,
    /// |<J^X>| in particles; triggers Schwinger normalization.
    #[arg(long)]
    jx_mean: Option<f64>,
    /// LO intensity in particles; jx_mean defaults to half of it.
    #[arg(long)]
    lo_intensity: Option<f64>,
    /// Use the Gaussian closed form for epsilon_delta.
    #[arg(long)]
    gaussian: Option<bool>,
    /// Summary statistics instead of raw records: key=value pairs
    /// (eps=..., optionally abs_dev_x=..., abs_dev_p=...).
    #[arg(long = "from-summary", num_args = 1.., value_name = "KEY=VALUE")]
    #[serde(skip_serializing_if = "Option::is_none")]
    from_summary: Option<Vec<String>>,
    /// JSON config file mirroring these flags; flags override it.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    /// Measured Duan parameter, in (0, 1].
    #[arg(long)]
    d: f64,
    /// D_{n0} table CSV (defaults to the shipped table).
    #[arg(long)]
    table: Option<PathBuf>,
    /// JSON output path (stdout if omitted).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CurveKind {
    Fig1Threshold,
    Fig2Bounds,
}

#[derive(Args)]
struct CurvesArgs {
    #[arg(long, value_enum)]
    kind: CurveKind,
    /// Delta grid a:b:step for the threshold curve.
    #[arg(long, default_value = "0:1.65:0.01")]
    delta: String,
    /// D_{n0} table CSV (defaults to the shipped table).
    #[arg(long)]
    table: Option<PathBuf>,
    /// CSV output path (stdout if omitted).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum SimKind {
    Quadrature,
    Schwinger,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    kind: SimKind,
    /// Squeezing parameter of the source state.
    #[arg(long, default_value_t = 0.0)]
    r: f64,
    /// Transmission toward Alice.
    #[arg(long, default_value_t = 1.0)]
    eta_a: f64,
    /// Transmission toward Bob.
    #[arg(long, default_value_t = 1.0)]
    eta_b: f64,
    /// Thermal occupation of the loss channel.
    #[arg(long, default_value_t = 0.0)]
    n_th: f64,
    /// Samples per setting (quadrature) or shots per setting (schwinger).
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Local-oscillator intensity E^2 for the schwinger readout.
    #[arg(long, default_value_t = 1e6)]
    lo_intensity: f64,
    /// Record CSV output path.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct FockTableArgs {
    #[arg(long, default_value_t = 14)]
    max_n0: usize,
    /// CSV output path (stdout if omitted).
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Fully resolved analyze configuration, echoed into the report.
#[derive(Serialize, Clone)]
struct ResolvedAnalysisConfig {
    input: Option<PathBuf>,
    bins: usize,
    bessel: bool,
    deltas: Vec<f64>,
    jx_mean: Option<f64>,
    lo_intensity: Option<f64>,
    gaussian: bool,
    from_summary: Option<Vec<String>>,
}

#[derive(Serialize)]
struct AnalysisOutput {
    tool_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    input_sha256: Option<String>,
    resolved_config: ResolvedAnalysisConfig,
    #[serde(flatten)]
    report: steering::SteeringReport,
    verdicts: Verdicts,
}

#[derive(Serialize)]
struct Verdicts {
    /// epsilon < 1: the standard EPR steering condition.
    epr_paradox: bool,
    /// Largest grid delta at which epsilon_delta < 1, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    max_nonlocal_delta: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Certify(args) => cmd_certify(args),
        Command::Curves(args) => cmd_curves(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::FockTable(args) => cmd_fock_table(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn cmd_analyze(mut args: AnalyzeArgs) -> Result<()> {
    if let Some(cfg_path) = args.config.take() {
        let file: AnalyzeArgs = serde_json::from_str(&fs::read_to_string(cfg_path)?)?;
        args = merge_analyze(file, args);
    }
    let deltas = match &args.delta {
        Some(specs) => parse_delta_specs(specs)?,
        None => parse_delta_specs(&["0:1.5:0.05".to_string()])?,
    };
    let bins = args.bins.unwrap_or(100);
    let bessel = args.bessel.unwrap_or(false);
    let gaussian_flag = args.gaussian.unwrap_or(false);

    let mut metadata = BTreeMap::new();
    let mut input_sha256 = None;
    let mut jx_mean = args.jx_mean;
    let mut lo_intensity = args.lo_intensity;

    let (sx, sp, gaussian_assumed, normalized) = if let Some(summary) = &args.from_summary {
        let (sx, sp, assumed) = stats_from_summary(summary)?;
        metadata.insert("source".into(), "summary statistics".into());
        (sx, sp, assumed || gaussian_flag, false)
    } else {
        let input = args.input.clone().ok_or_else(|| {
            Error::InvalidParameter("analyze needs --input or --from-summary".into())
        })?;
        input_sha256 = Some(io::file_sha256(&input)?);
        let records = io::read_records(&input)?;
        if records.is_empty() {
            return Err(Error::InsufficientData("no records in input".into()));
        }
        let sidecar = Sidecar::read(&input)?;
        let mut particles = false;
        if let Some(side) = &sidecar {
            if side.units == Units::Particles {
                particles = true;
                if jx_mean.is_none() {
                    jx_mean = side.jx_mean;
                }
                if lo_intensity.is_none() {
                    lo_intensity = side.lo_intensity;
                }
            }
        }
        particles = particles || jx_mean.is_some() || lo_intensity.is_some();

        let policy = BinningPolicy { bins, bessel, ..Default::default() };
        let dx = JointDistribution::build_joint(&records, (Quadrature::X, Quadrature::X), policy)?;
        let dp = JointDistribution::build_joint(&records, (Quadrature::P, Quadrature::P), policy)?;
        let mut sx = dx.inference_stats();
        let mut sp = dp.inference_stats();

        if particles {
            let jx = jx_mean
                .or(lo_intensity.map(|lo| lo / 2.0))
                .ok_or_else(|| Error::InvalidParameter(
                    "particle-unit records need --jx-mean or --lo-intensity".into(),
                ))?;
            jx_mean = Some(jx);
            let cfg = SchwingerConfig::new(jx, lo_intensity.unwrap_or(2.0 * jx))?;
            if let Some(warning) = cfg.consistency_warning() {
                metadata.insert("schwinger_warning".into(), warning);
            }
            let (nx, np) = steering::schwinger_normalize(&sx, &sp, &cfg)?;
            sx = nx;
            sp = np;
            metadata.insert("normalization".into(), "schwinger".into());
        }
        metadata.insert("source".into(), "records".into());
        (sx, sp, gaussian_flag, particles)
    };

    let schwinger_cfg = match jx_mean {
        Some(jx) => Some(SchwingerConfig::new(jx, lo_intensity.unwrap_or(2.0 * jx))?),
        None => lo_intensity
            .map(|lo| SchwingerConfig::new(lo / 2.0, lo))
            .transpose()?,
    };
    let mut report =
        steering::build_report(&sx, &sp, &deltas, schwinger_cfg.as_ref(), gaussian_assumed)?;
    report.metadata = metadata;
    if normalized {
        report.metadata.insert("units".into(), "particles (normalized)".into());
    }

    let max_nonlocal_delta = report
        .epsilon_delta
        .iter()
        .filter(|p| p.nonlocal)
        .map(|p| p.delta)
        .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |a| a.max(d))));
    let output = AnalysisOutput {
        tool_version: eprsteer::VERSION.into(),
        input_sha256,
        resolved_config: ResolvedAnalysisConfig {
            input: args.input.clone(),
            bins,
            bessel,
            deltas: deltas.clone(),
            jx_mean,
            lo_intensity,
            gaussian: gaussian_assumed,
            from_summary: args.from_summary.clone(),
        },
        verdicts: Verdicts { epr_paradox: report.epsilon < 1.0, max_nonlocal_delta },
        report,
    };
    emit_json(&output, args.output.as_deref())
}

fn cmd_certify(args: CertifyArgs) -> Result<()> {
    let (table, provenance) = load_table(args.table.as_deref())?;
    let result = fock::certify(args.d, &table)?;
    #[derive(Serialize)]
    struct CertifyOutput {
        tool_version: String,
        table_provenance: String,
        table_convention: String,
        table_max_n0: usize,
        #[serde(flatten)]
        result: fock::CertificationResult,
    }
    let out = CertifyOutput {
        tool_version: eprsteer::VERSION.into(),
        table_provenance: provenance,
        table_convention: table.rows[0].convention.clone(),
        table_max_n0: table.max_n0(),
        result,
    };
    emit_json(&out, args.output.as_deref())
}

fn cmd_curves(args: CurvesArgs) -> Result<()> {
    let mut out = String::new();
    match args.kind {
        CurveKind::Fig1Threshold => {
            out.push_str("delta,epsilon_max\n");
            for delta in parse_delta_specs(&[args.delta.clone()])? {
                match steering::threshold_epsilon(delta) {
                    Ok(eps) => out.push_str(&format!("{delta},{eps}\n")),
                    Err(Error::DeltaTooLarge(_)) => break,
                    Err(e) => return Err(e),
                }
            }
        }
        CurveKind::Fig2Bounds => {
            let (table, _) = load_table(args.table.as_deref())?;
            out.push_str("kind,parameter,value\n");
            for nbar in 1..=4 {
                out.push_str(&format!("dl_bound,{nbar},{}\n", fock::dl_bound(nbar as f64)));
            }
            for n0 in [2usize, 3, 4, 10] {
                let d = table.lookup(n0).ok_or_else(|| {
                    Error::InsufficientData(format!("table has no row for n0 = {n0}"))
                })?;
                out.push_str(&format!("d_n0,{n0},{d}\n"));
            }
        }
    }
    emit_text(&out, args.output.as_deref())
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let state = GaussianTwoModeState::two_mode_squeezed(args.r)
        .apply_loss(args.eta_a, args.eta_b, args.n_th)?;
    let config = serde_json::json!({
        "kind": args.kind,
        "r": args.r,
        "eta_a": args.eta_a,
        "eta_b": args.eta_b,
        "n_th": args.n_th,
        "n": args.n,
        "seed": args.seed,
        "lo_intensity": args.lo_intensity,
        "tool_version": eprsteer::VERSION,
    });
    let (records, sidecar) = match args.kind {
        SimKind::Quadrature => {
            let records = simulate::sample_quadrature_records(&state, args.n, args.seed)?;
            let sidecar = Sidecar {
                units: Units::Quadrature,
                lo_intensity: None,
                jx_mean: None,
                config,
            };
            (records, sidecar)
        }
        SimKind::Schwinger => {
            let records =
                simulate::schwinger_spin_records(&state, args.lo_intensity, args.n, args.seed)?;
            let sidecar = Sidecar {
                units: Units::Particles,
                lo_intensity: Some(args.lo_intensity),
                jx_mean: Some(args.lo_intensity / 2.0),
                config,
            };
            (records, sidecar)
        }
    };
    io::write_records(&args.output, &records)?;
    sidecar.write(&args.output)?;
    Ok(())
}

fn cmd_fock_table(args: FockTableArgs) -> Result<()> {
    let table = DTable::build(args.max_n0)?;
    emit_text(&table.to_csv(), args.output.as_deref())
}

fn merge_analyze(base: AnalyzeArgs, over: AnalyzeArgs) -> AnalyzeArgs {
    AnalyzeArgs {
        input: over.input.or(base.input),
        output: over.output.or(base.output),
        bins: over.bins.or(base.bins),
        bessel: over.bessel.or(base.bessel),
        delta: over.delta.or(base.delta),
        jx_mean: over.jx_mean.or(base.jx_mean),
        lo_intensity: over.lo_intensity.or(base.lo_intensity),
        gaussian: over.gaussian.or(base.gaussian),
        from_summary: over.from_summary.or(base.from_summary),
        config: None,
    }
}

fn stats_from_summary(
    pairs: &[String],
) -> Result<(
    eprsteer::distributions::InferenceStats,
    eprsteer::distributions::InferenceStats,
    bool,
)> {
    let mut eps = None;
    let mut abs_dev_x = None;
    let mut abs_dev_p = None;
    for pair in pairs {
        let (key, value) = pair.split_once('=').ok_or_else(|| {
            Error::InvalidParameter(format!("summary entries are key=value, got {pair:?}"))
        })?;
        let value: f64 = value.trim().parse().map_err(|e| {
            Error::InvalidParameter(format!("summary value for {key}: {e}"))
        })?;
        match key.trim() {
            "eps" => eps = Some(value),
            "abs_dev_x" => abs_dev_x = Some(value),
            "abs_dev_p" => abs_dev_p = Some(value),
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown summary key {other:?} (expected eps, abs_dev_x, abs_dev_p)"
                )))
            }
        }
    }
    let eps = eps.ok_or_else(|| Error::InvalidParameter("summary needs eps=...".into()))?;
    if !(eps > 0.0) {
        return Err(Error::EpsilonOutOfRange(eps));
    }
    // symmetric split: each inference variance is eps itself
    let sigma = eps.sqrt();
    let gaussian_assumed = abs_dev_x.is_none() || abs_dev_p.is_none();
    let gaussian_abs = sigma * steering::SQRT_2_OVER_PI;
    let sx = eprsteer::distributions::InferenceStats::new(
        eps,
        abs_dev_x.unwrap_or(gaussian_abs),
        0,
    )?;
    let sp = eprsteer::distributions::InferenceStats::new(
        eps,
        abs_dev_p.unwrap_or(gaussian_abs),
        0,
    )?;
    Ok((sx, sp, gaussian_assumed))
}

fn parse_delta_specs(specs: &[String]) -> Result<Vec<f64>> {
    let mut deltas = Vec::new();
    for spec in specs {
        if let Some((start, rest)) = spec.split_once(':') {
            let (end, step) = rest.split_once(':').ok_or_else(|| {
                Error::InvalidParameter(format!("delta range is a:b:step, got {spec:?}"))
            })?;
            let parse = |s: &str| -> Result<f64> {
                s.trim()
                    .parse()
                    .map_err(|e| Error::InvalidParameter(format!("delta range {spec:?}: {e}")))
            };
            let (a, b, h) = (parse(start)?, parse(end)?, parse(step)?);
            if !(h > 0.0) || b < a {
                return Err(Error::InvalidParameter(format!("bad delta range {spec:?}")));
            }
            let mut d = a;
            while d <= b + 1e-12 {
                deltas.push(d);
                d += h;
            }
        } else {
            let d: f64 = spec.trim().parse().map_err(|e| {
                Error::InvalidParameter(format!("delta {spec:?}: {e}"))
            })?;
            deltas.push(d);
        }
    }
    for &d in &deltas {
        if !(d >= 0.0) {
            return Err(Error::NegativeDelta(d));
        }
    }
    deltas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(deltas)
}

fn load_table(path: Option<&Path>) -> Result<(DTable, String)> {
    match path {
        Some(p) => Ok((DTable::from_csv(&fs::read_to_string(p)?)?, p.display().to_string())),
        None => Ok((DTable::shipped(), "shipped".into())),
    }
}

fn emit_json<T: Serialize>(value: &T, output: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    emit_text(&format!("{text}\n"), output)
}

fn emit_text(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}
