//! `z2lab`: batch experiments on operators on `ℓp` and on the twisted sum `Z2`.
//!
//! Every command writes one report (JSON, or CSV for resolvent grids) to
//! stdout or `--out`. Exit codes: 0 success, 1 usage or operator-spec error,
//! 2 numerical warning, 3 solver failure.

mod config;
mod opspec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use z2lab::conditions::{check_all, CheckConfig, OperatorFamily};
use z2lab::normest::{growth_trend, opnorm_sweep, z2_opnorm_est};
use z2lab::spectra::{cesaro_disk_check, default_disk_points, eigenvalues, resolvent_grid};
use z2lab::{PExponent, Z2Error};

use config::{ExperimentConfig, FileConfig, Format, Overrides};
use opspec::{MatrixOp, OpSpec};

pub const SCHEMA_VERSION: u32 = 1;

const NORM_SIZES: [usize; 5] = [64, 128, 256, 512, 1024];
const CHECK_SIZES: [usize; 5] = [64, 128, 256, 512, 1024];
const DISK_SIZES: [usize; 4] = [128, 256, 512, 1024];

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Z2Error),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(e) => match e {
                Z2Error::NoConvergence { .. }
                | Z2Error::EigenNoConvergence(_)
                | Z2Error::PrecisionLoss { .. }
                | Z2Error::SingularShift(_) => 3,
                _ => 1,
            },
            CliError::Io(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "z2lab", version, about = "Numerical experiments on Z2 and on operators on lp")]
struct Cli {
    /// TOML file with default settings; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate operator norms over increasing sizes and classify their growth.
    Norm(NormArgs),
    /// Run the boundedness condition checks on an operator family.
    Check(CheckArgs),
    /// Eigenvalues, resolvent-norm grids or the Cesàro disk check.
    Spectrum(SpectrumArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Operator specification, e.g. `cesaro`, `hilbert:1`, `scalar:1,0,1,1`.
    #[arg(long)]
    op: String,
    /// Comma-separated, strictly increasing dimensions.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Args)]
struct NormArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Exponent of `ℓp` (a number ≥ 1 or `inf`).
    #[arg(long, conflicts_with = "z2")]
    p: Option<String>,
    /// Estimate the `Z2` quasinorm modulus instead of an `ℓp` norm.
    #[arg(long)]
    z2: bool,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    ascent_steps: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    probes: Option<usize>,
    #[arg(long)]
    lf_star_budget: Option<usize>,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("mode").required(true).args(["eigs", "disk_check", "grid"])))]
struct SpectrumArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    p: Option<String>,
    /// Eigenvalues of the `n × n` section.
    #[arg(long, requires = "n")]
    eigs: bool,
    /// Resolvent-growth check of the Cesàro spectral disk.
    #[arg(long)]
    disk_check: bool,
    /// Resolvent norms at shifts `re:im,re:im,...` for the `n × n` section.
    #[arg(long, requires = "n")]
    grid: Option<String>,
    #[arg(long)]
    n: Option<usize>,
}

fn parse_p(s: Option<&str>) -> Result<PExponent, CliError> {
    let Some(s) = s else { return Ok(PExponent::new(2.0)?) };
    let v = match s.trim() {
        "inf" | "infinity" => f64::INFINITY,
        t => match t.split_once('/') {
            Some((a, b)) => match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(a), Ok(b)) => a / b,
                _ => return Err(CliError::Usage(format!("'{s}' is not an exponent"))),
            },
            None => t.parse().map_err(|_| CliError::Usage(format!("'{s}' is not an exponent")))?,
        },
    };
    PExponent::new(v).map_err(|_| CliError::Usage(format!("exponent {s} is outside [1, inf]")))
}

fn parse_grid(s: &str) -> Result<Vec<Complex64>, CliError> {
    s.split(',')
        .map(|t| {
            let (re, im) = t.split_once(':').unwrap_or((t, "0"));
            match (re.trim().parse::<f64>(), im.trim().parse::<f64>()) {
                (Ok(re), Ok(im)) if re.is_finite() && im.is_finite() => Ok(Complex64::new(re, im)),
                _ => Err(CliError::Usage(format!("'{t}' is not a grid point re:im"))),
            }
        })
        .collect()
}

#[derive(Serialize)]
struct Library {
    name: &'static str,
    version: &'static str,
}

#[derive(Serialize)]
struct Report<'a> {
    schema_version: u32,
    library: Library,
    command: &'a str,
    operator: &'a str,
    config: &'a ExperimentConfig,
    parameters: Value,
    result: Value,
    warnings: Vec<String>,
}

/// Result of one command before serialization.
struct Outcome {
    parameters: Value,
    result: Value,
    warnings: Vec<String>,
    csv: Option<String>,
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

fn load_file(path: Option<&PathBuf>) -> Result<FileConfig, CliError> {
    path.map_or_else(|| Ok(FileConfig::default()), |p| FileConfig::load(p))
}

fn common_overrides(c: &CommonArgs) -> Overrides {
    Overrides { seed: c.seed, sizes: c.sizes.clone(), out: c.out.clone(), format: c.format, ..Default::default() }
}

fn run_norm(args: &NormArgs, cfg: &ExperimentConfig, op: &OpSpec) -> Result<Outcome, CliError> {
    let z2 = args.z2 || (args.p.is_none() && matches!(op, OpSpec::Block(_)));
    let mut warnings = Vec::new();
    if z2 {
        let b = &cfg.budgets;
        let mut values = Vec::new();
        let mut per_size = Vec::new();
        for &n in &cfg.sizes {
            let t = op.build_block(n, cfg.seed)?;
            let est = z2_opnorm_est(&t, b.samples, b.ascent_steps, cfg.seed);
            values.push(est.value);
            per_size.push(json!({ "n": n, "value": est.value }));
        }
        let trend = growth_trend(&cfg.sizes, &values);
        return Ok(Outcome {
            parameters: json!({ "space": "z2" }),
            result: json!({ "estimates": per_size, "trend": to_value(&trend) }),
            warnings,
            csv: None,
        });
    }
    let m = op.as_matrix()?;
    let p = parse_p(args.p.as_deref())?;
    let mut mats = Vec::with_capacity(cfg.sizes.len());
    for &n in &cfg.sizes {
        mats.push(m.build(n, cfg.seed)?);
    }
    let ests = opnorm_sweep(
        |n| mats[cfg.sizes.iter().position(|&s| s == n).expect("size from the sweep")].clone(),
        &cfg.sizes,
        p,
        cfg.norm_tol(),
        cfg.budgets.max_iter,
    );
    let values: Vec<f64> = ests.iter().map(|e| e.value).collect();
    let reference = m.reference_norm(p)?;
    let per_size: Vec<Value> = cfg
        .sizes
        .iter()
        .zip(&ests)
        .map(|(&n, e)| {
            json!({ "n": n, "value": e.value, "converged": e.converged, "iterations": e.iterations, "svd_oracle": e.svd_oracle })
        })
        .collect();
    for (&n, e) in cfg.sizes.iter().zip(&ests) {
        if !e.converged {
            warnings.push(format!("estimate at n = {n} did not converge in {} iterations", e.iterations));
        }
        if let Some(r) = reference {
            if e.value > r * (1.0 + 1e-9) + 1e-12 {
                warnings.push(format!("estimate at n = {n} exceeds the reference norm {r}"));
            }
        }
    }
    let trend = growth_trend(&cfg.sizes, &values);
    Ok(Outcome {
        parameters: json!({ "space": "lp", "p": to_value(p) }),
        result: json!({ "estimates": per_size, "reference_norm": reference, "trend": to_value(&trend) }),
        warnings,
        csv: None,
    })
}

fn run_check(cfg: &ExperimentConfig, op: &OpSpec, label: &str) -> Result<Outcome, CliError> {
    let spec = op.clone();
    let seed = cfg.seed;
    let family = OperatorFamily::new(label, move |n| spec.build_block(n, seed));
    let check = CheckConfig { probes: cfg.budgets.probes, lf_star_budget: cfg.budgets.lf_star_budget, seed };
    let report = check_all(&family, &cfg.sizes, &check)?;
    let warnings = report
        .conditions
        .iter()
        .filter(|(_, t)| !t.gaps.is_empty())
        .map(|(k, t)| format!("condition {k} has no admissible probe at sizes {:?}", t.gaps))
        .collect();
    Ok(Outcome { parameters: to_value(check), result: to_value(&report), warnings, csv: None })
}

fn run_spectrum(args: &SpectrumArgs, cfg: &ExperimentConfig, op: &OpSpec) -> Result<Outcome, CliError> {
    let p = parse_p(args.p.as_deref())?;
    let m = op.as_matrix()?;
    if args.disk_check {
        if *m != MatrixOp::Cesaro {
            return Err(CliError::Usage("--disk-check applies to the cesaro operator".into()));
        }
        let (inside, outside) = default_disk_points(p);
        let report = cesaro_disk_check(p, &cfg.sizes, &inside, &outside)?;
        let warnings = report
            .points
            .iter()
            .filter(|pt| !pt.pass)
            .map(|pt| format!("disk point {} classified {:?}", pt.lambda, pt.class))
            .collect();
        return Ok(Outcome {
            parameters: json!({ "mode": "disk_check", "p": to_value(p) }),
            result: to_value(&report),
            warnings,
            csv: None,
        });
    }
    let n = args.n.expect("clap requires --n");
    if n == 0 {
        return Err(CliError::Usage("--n must be positive".into()));
    }
    let a = m.build(n, cfg.seed)?;
    if args.eigs {
        let eig = eigenvalues(&a)?;
        return Ok(Outcome {
            parameters: json!({ "mode": "eigs", "n": n }),
            result: json!({ "n": n, "eigenvalues": to_value(&eig) }),
            warnings: Vec::new(),
            csv: None,
        });
    }
    let grid = parse_grid(args.grid.as_deref().expect("clap requires a mode"))?;
    let g = resolvent_grid(&a, p, &grid)?;
    Ok(Outcome {
        parameters: json!({ "mode": "grid", "n": n, "p": to_value(p) }),
        result: to_value(&g),
        warnings: Vec::new(),
        csv: Some(g.to_csv()),
    })
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let file = load_file(cli.config.as_ref())?;
    let (name, common, cfg) = match &cli.command {
        Command::Norm(a) => {
            let o = Overrides {
                samples: a.samples,
                ascent_steps: a.ascent_steps,
                tol: a.tol,
                max_iter: a.max_iter,
                ..common_overrides(&a.common)
            };
            ("norm", &a.common, ExperimentConfig::resolve(file, o, &NORM_SIZES)?)
        }
        Command::Check(a) => {
            let o = Overrides { probes: a.probes, lf_star_budget: a.lf_star_budget, ..common_overrides(&a.common) };
            ("check", &a.common, ExperimentConfig::resolve(file, o, &CHECK_SIZES)?)
        }
        Command::Spectrum(a) => ("spectrum", &a.common, ExperimentConfig::resolve(file, common_overrides(&a.common), &DISK_SIZES)?),
    };
    let op = opspec::parse(&common.op)?;
    let grid_mode = matches!(&cli.command, Command::Spectrum(a) if a.grid.is_some());
    if cfg.output.format == Format::Csv && !grid_mode {
        return Err(CliError::Usage("CSV output is available for resolvent grids only".into()));
    }
    let outcome = match &cli.command {
        Command::Norm(a) => run_norm(a, &cfg, &op)?,
        Command::Check(_) => run_check(&cfg, &op, common.op.trim())?,
        Command::Spectrum(a) => run_spectrum(a, &cfg, &op)?,
    };
    let text = match (cfg.output.format, &outcome.csv) {
        (Format::Csv, Some(csv)) => csv.clone(),
        _ => {
            let report = Report {
                schema_version: SCHEMA_VERSION,
                library: Library { name: "z2lab", version: z2lab::VERSION },
                command: name,
                operator: common.op.trim(),
                config: &cfg,
                parameters: outcome.parameters,
                result: outcome.result,
                warnings: outcome.warnings.clone(),
            };
            let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
            s.push('\n');
            s
        }
    };
    match &cfg.output.path {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    Ok(if outcome.warnings.is_empty() { 0 } else { 2 })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
