//! Subcommand orchestration and the exit-code contract:
//! 0 ok, 1 assumption violation, 2 usage or parse, 3 numerical,
//! 4 certification, 5 invariant breach.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rnbeam_core::analysis::{compare_decay_to_spectrum, generic_initial_state};
use rnbeam_core::assembly::assemble;
use rnbeam_core::dynamics::{default_dt, simulate, BeamState, EnergyTrace};
use rnbeam_core::model::{validate_assumption, ASSUMPTION_TOL};
use rnbeam_core::spectral::{
    closed_form_spectrum, discrete_spectrum, ModeOptions, Spectrum,
};
use rnbeam_core::Error as CoreError;

use crate::config::{self, InitialData, RunConfig};
use crate::output::{self, SweepRow};

pub const EXIT_ASSUMPTION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_CERTIFICATION: i32 = 4;
pub const EXIT_INVARIANT: i32 = 5;

#[derive(Parser)]
#[command(name = "rnbeam", version, about = "Sandwich-beam spectra, simulation, and decay analysis")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a configuration against the gain admissibility conditions.
    Validate(CommonArgs),
    /// Compute a spectrum; writes spectrum.csv and summary.json.
    Spectrum {
        #[command(flatten)]
        common: CommonArgs,
        /// Use the configured core shear (rejects all-zero-shear stacks).
        #[arg(long, conflicts_with = "decoupled")]
        coupled: bool,
        /// Zero every core shear modulus first.
        #[arg(long)]
        decoupled: bool,
        #[arg(long, value_enum, default_value_t = Method::Pencil)]
        method: Method,
    },
    /// Integrate in time; writes trace.csv and decay_report.json.
    Simulate(CommonArgs),
    /// Rerun simulate-and-compare across parameter values; writes sweep.csv.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Dotted path into the config, e.g. gains.gamma0 or layers.even.0.G.
        #[arg(long)]
        param: String,
        /// Comma-separated values for the swept parameter.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Vec<f64>,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override the configured output directory.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Override the configured random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Proceed despite gain admissibility violations.
    #[arg(long)]
    force: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    /// Dense eigensolve of the assembled generator.
    Pencil,
    /// Closed-form characteristic roots (decoupled only).
    Roots,
}

pub struct Failure {
    pub code: i32,
    pub message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: message.into() }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        let code = match &e {
            CoreError::AssumptionViolation(_) => EXIT_ASSUMPTION,
            CoreError::InvalidParameter(_)
            | CoreError::InvalidMesh(_)
            | CoreError::DimensionMismatch { .. }
            | CoreError::Io(_) => EXIT_USAGE,
            CoreError::IncompleteSpectrum(_) | CoreError::ContourResolutionFailure(_) => {
                EXIT_CERTIFICATION
            }
            CoreError::DegenerateFrequency(_)
            | CoreError::RootFailure(_)
            | CoreError::SizeLimit { .. }
            | CoreError::NumericalFailure(_)
            | CoreError::NotAnEigenvalue(_)
            | CoreError::IntegratorFailure(_) => EXIT_NUMERICAL,
        };
        Failure { code, message: e.to_string() }
    }
}

pub fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate(common) => cmd_validate(&common),
        Command::Spectrum { common, coupled, decoupled, method } => {
            cmd_spectrum(&common, coupled, decoupled, method)
        }
        Command::Simulate(common) => cmd_simulate(&common),
        Command::Sweep { common, param, values } => cmd_sweep(&common, &param, &values),
    }
}

fn load_config(common: &CommonArgs) -> Result<RunConfig, Failure> {
    let mut cfg = config::load(&common.config).map_err(usage)?;
    if let Some(dir) = &common.output {
        cfg.output_dir = dir.clone();
    }
    if let Some(seed) = common.seed {
        cfg.analysis.seed = seed;
    }
    cfg.check()?;
    Ok(cfg)
}

fn gate_admissibility(cfg: &RunConfig, force: bool) -> Result<(), Failure> {
    let report = validate_assumption(&cfg.beam, &cfg.layers, &cfg.gains, ASSUMPTION_TOL)?;
    if report.is_admissible() || force {
        return Ok(());
    }
    let list: Vec<String> = report.violations.iter().map(|v| v.constraint.clone()).collect();
    Err(Failure {
        code: EXIT_ASSUMPTION,
        message: format!("inadmissible gains: {} (pass --force to proceed)", list.join("; ")),
    })
}

fn cmd_validate(common: &CommonArgs) -> Result<(), Failure> {
    let cfg = load_config(common)?;
    let report = validate_assumption(&cfg.beam, &cfg.layers, &cfg.gains, ASSUMPTION_TOL)?;
    println!("{}", serde_json::to_string_pretty(&cfg).expect("config serializes"));
    if report.is_admissible() {
        println!("admissible: true");
        Ok(())
    } else {
        println!("admissible: false");
        for v in &report.violations {
            println!("violated: {} (gain is {})", v.constraint, v.gain);
        }
        Err(Failure {
            code: EXIT_ASSUMPTION,
            message: "gain admissibility violated; see report above".into(),
        })
    }
}

fn cmd_spectrum(
    common: &CommonArgs,
    coupled: bool,
    decoupled: bool,
    method: Method,
) -> Result<(), Failure> {
    let cfg = load_config(common)?;
    gate_admissibility(&cfg, common.force)?;
    if coupled && cfg.layers.is_decoupled() {
        return Err(usage(
            "--coupled, but every configured core shear modulus is zero",
        ));
    }
    let stack = if decoupled { cfg.layers.decoupled() } else { cfg.layers.clone() };

    let spectrum = match method {
        Method::Pencil => {
            let sys = assemble(&cfg.beam, &stack, &cfg.gains, &cfg.mesh.build()?)?;
            Spectrum::from_eigenvalues(&discrete_spectrum(&sys, cfg.spectral.dense_limit)?)
        }
        Method::Roots => {
            if !stack.is_decoupled() {
                return Err(usage(
                    "--method roots has no closed form for a coupled stack; pass --decoupled",
                ));
            }
            closed_form_spectrum(
                &cfg.beam,
                &stack,
                &cfg.gains,
                cfg.spectral.n_max,
                &cfg.spectral.root_options(),
            )?
        }
    };

    output::ensure_dir(&cfg.output_dir)?;
    let csv = output::write_spectrum_csv(&cfg.output_dir, &spectrum)?;
    let json = output::write_summary(&cfg.output_dir, &spectrum)?;
    println!("abscissa {}", output::fmt_f64(spectrum.abscissa()));
    println!("wrote {}", csv.display());
    println!("wrote {}", json.display());
    Ok(())
}

fn initial_state(cfg: &RunConfig, sys: &rnbeam_core::DiscretizedSystem) -> Result<BeamState, Failure> {
    match cfg.time.initial {
        InitialData::Generic => Ok(generic_initial_state(
            sys,
            10,
            cfg.analysis.seed,
            cfg.spectral.dense_limit,
            &ModeOptions::default(),
        )?),
        InitialData::Zero => Ok(BeamState::zero(sys)),
    }
}

fn fit_window(trace: &EnergyTrace, fraction: f64) -> Option<(f64, f64)> {
    let t0 = *trace.times.first()?;
    let t1 = *trace.times.last()?;
    if t1 <= t0 {
        return None;
    }
    Some((t1 - fraction * (t1 - t0), t1))
}

/// The midpoint scheme is contractive for nonnegative gains, so energy
/// growth beyond round-off between samples is a build defect, not a model
/// property.
fn check_monotone(trace: &EnergyTrace) -> Result<(), Failure> {
    let e0 = trace.energies.first().copied().unwrap_or(0.0);
    for (i, w) in trace.energies.windows(2).enumerate() {
        if w[1] > w[0] + 1e-11 * e0.max(w[0]) {
            return Err(Failure {
                code: EXIT_INVARIANT,
                message: format!(
                    "energy increased between samples {} and {} ({:e} -> {:e}); \
                     the contractive integrator contract is broken",
                    i,
                    i + 1,
                    w[0],
                    w[1]
                ),
            });
        }
    }
    Ok(())
}

fn simulate_and_compare(
    cfg: &RunConfig,
) -> Result<(EnergyTrace, rnbeam_core::analysis::DecayReport, BeamState), Failure> {
    let sys = assemble(&cfg.beam, &cfg.layers, &cfg.gains, &cfg.mesh.build()?)?;
    let initial = initial_state(cfg, &sys)?;
    let dt = match cfg.time.dt {
        Some(dt) => dt,
        None => default_dt(&sys)?,
    };
    let trace = simulate(&sys, &initial, cfg.time.t_final, dt, cfg.time.sample_every)?;
    check_monotone(&trace)?;
    let spectrum = Spectrum::from_eigenvalues(&discrete_spectrum(&sys, cfg.spectral.dense_limit)?);
    let window = fit_window(&trace, cfg.analysis.fit_window_fraction);
    let report = compare_decay_to_spectrum(&sys, &trace, &spectrum, window, Some(&initial))?;
    Ok((trace, report, initial))
}

fn cmd_simulate(common: &CommonArgs) -> Result<(), Failure> {
    let cfg = load_config(common)?;
    gate_admissibility(&cfg, common.force)?;
    let (trace, report, _) = simulate_and_compare(&cfg)?;
    output::ensure_dir(&cfg.output_dir)?;
    let csv = output::write_trace_csv(&cfg.output_dir, &trace)?;
    let json = output::write_decay_report(&cfg.output_dir, &report)?;
    println!("mu_fit {}", output::fmt_f64(report.mu_fit));
    println!("wrote {}", csv.display());
    println!("wrote {}", json.display());
    Ok(())
}

/// Integral values are inserted as JSON integers so integer-typed fields
/// (mesh sizes, mode counts) are sweepable too.
fn json_number(v: f64) -> serde_json::Value {
    if v.is_finite() && v.fract() == 0.0 && v.abs() <= i64::MAX as f64 {
        serde_json::Value::from(v as i64)
    } else {
        serde_json::Value::from(v)
    }
}

fn inadmissible_row(v: f64) -> SweepRow {
    SweepRow {
        param_value: v,
        abscissa: f64::NAN,
        mu_fit: f64::NAN,
        rel_mismatch: f64::NAN,
        flags: vec!["inadmissible".into()],
    }
}

fn sweep_point(cfg: &RunConfig, v: f64) -> Result<SweepRow, Failure> {
    if cfg.check().is_err() {
        return Ok(inadmissible_row(v));
    }
    let assumption = validate_assumption(&cfg.beam, &cfg.layers, &cfg.gains, ASSUMPTION_TOL)?;
    if !assumption.is_admissible() {
        return Ok(inadmissible_row(v));
    }
    let (_, report, _) = simulate_and_compare(cfg)?;
    Ok(SweepRow {
        param_value: v,
        abscissa: report.mu_spec.unwrap_or(f64::NAN),
        mu_fit: report.mu_fit,
        rel_mismatch: report.rel_mismatch.unwrap_or(f64::NAN),
        flags: report.flags.iter().map(|f| f.to_string()).collect(),
    })
}

fn cmd_sweep(common: &CommonArgs, param: &str, values: &[f64]) -> Result<(), Failure> {
    if values.is_empty() {
        return Err(usage("--values needs at least one number"));
    }
    let raw = std::fs::read_to_string(&common.config)
        .map_err(|e| usage(format!("cannot read {}: {e}", common.config.display())))?;
    let base = config::value_from_str(&raw).map_err(usage)?;
    let pointer = format!("/{}", param.replace('.', "/"));
    if base.pointer(&pointer).is_none() {
        return Err(usage(format!("config has no parameter at `{param}`")));
    }

    let mut out_dir = config::from_value(base.clone()).map_err(usage)?.output_dir;
    if let Some(dir) = &common.output {
        out_dir = dir.clone();
    }

    let mut rows = Vec::with_capacity(values.len());
    for &v in values {
        let mut patched = base.clone();
        *patched.pointer_mut(&pointer).expect("pointer checked above") = json_number(v);
        let mut cfg = config::from_value(patched).map_err(usage)?;
        if let Some(seed) = common.seed {
            cfg.analysis.seed = seed;
        }
        rows.push(sweep_point(&cfg, v)?);
    }

    output::ensure_dir(&out_dir)?;
    let csv = output::write_sweep_csv(&out_dir, &rows)?;
    println!("wrote {}", csv.display());
    Ok(())
}
