//! Scenario runner: paper-figure presets and config-driven runs producing
//! CSV traces plus standalone plot scripts.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use qbm::model::{BathSpec, SystemSpec};
use qbm::quad::QuadratureSettings;
use qbm::scenario::{self, Grid, OutputKind, RunReport, Scenario, StateKind, PRESET_NAMES};
use qbm::Error;

#[derive(Parser)]
#[command(name = "qbm", about = "Non-Markovian quantum Brownian motion laboratory", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Structured config file (bath/system/grid sections).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV and plot scripts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Override the number of grid points.
    #[arg(long, global = true)]
    grid_points: Option<usize>,
    /// Override the grid end time (units of 1/omega0).
    #[arg(long, global = true)]
    t_max: Option<f64>,
    /// Relative quadrature tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Run the quadrature/eigenvalue oracles inline and fail on mismatch.
    #[arg(long, global = true)]
    check_oracle: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Characteristic timescales and regime classification.
    Timescales,
    /// HPZ master-equation coefficients over the time grid.
    Coeffs,
    /// Decoherence function mu_I(t) of a superposed-coherent-state cat.
    Decohere,
    /// Concurrence C12(t) of the two-mode entangled coherent state.
    Concurrence,
    /// Decoherence time tau_d against the packet separation.
    SweepTaud,
    /// Run a named paper-figure preset (fig1, fig2a..fig4d).
    Preset { name: String },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Config {
    bath: BathCfg,
    #[serde(default)]
    system: SystemCfg,
    grid: Option<GridCfg>,
    sweep: Option<SweepCfg>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BathCfg {
    gamma: f64,
    cutoff: f64,
    temperature: f64,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct SystemCfg {
    sigma0: Option<f64>,
    q0: Option<f64>,
    p0: Option<f64>,
    alpha0: Option<f64>,
    theta: Option<f64>,
    n_modes: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridCfg {
    t_max: f64,
    n_points: usize,
    #[serde(default)]
    log_spaced: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepCfg {
    /// Extra cutoff values sharing the main bath's gamma and temperature.
    cutoffs: Vec<f64>,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_ORACLE: u8 = 4;

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::InvalidSpec(_) | Error::Io(_) => EXIT_CONFIG,
        Error::OracleMismatch { .. } | Error::NumericalEigenFailure { .. } => EXIT_ORACLE,
        _ => EXIT_NUMERICAL,
    }
}

fn fail(code: u8, msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn load_config(path: &Path) -> Result<Config, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    toml::from_str(&text).map_err(|e| format!("cannot parse {}: {e}", path.display()))
}

fn build_system(cfg: &SystemCfg) -> Result<SystemSpec<f64>, String> {
    if cfg.alpha0.is_some() && (cfg.q0.is_some() || cfg.p0.is_some()) {
        return Err("system.alpha0 is mutually exclusive with system.q0/system.p0".into());
    }
    let mut sys = match cfg.alpha0 {
        Some(a) => SystemSpec::with_alpha0(a),
        None => SystemSpec::default(),
    };
    if let Some(s) = cfg.sigma0 {
        sys.sigma0 = s;
    }
    if let Some(q0) = cfg.q0 {
        sys.q0 = q0;
    }
    if let Some(p0) = cfg.p0 {
        sys.p0 = p0;
    }
    sys.validate().map_err(|e| e.to_string())?;
    Ok(sys)
}

fn scenario_from_config(cmd: &Cmd, cfg: &Config, name: String) -> Result<Scenario<f64>, String> {
    let bath = BathSpec::new(cfg.bath.gamma, cfg.bath.cutoff, cfg.bath.temperature)
        .map_err(|e| e.to_string())?;
    let system = build_system(&cfg.system)?;
    let theta = cfg.system.theta.unwrap_or(0.0);
    let (output, state) = match cmd {
        Cmd::Timescales => (OutputKind::Timescales, StateKind::Cat { theta }),
        Cmd::Coeffs => (OutputKind::Coefficients, StateKind::Cat { theta }),
        Cmd::Decohere => (OutputKind::Decoherence, StateKind::Cat { theta }),
        Cmd::Concurrence => (
            OutputKind::Concurrence,
            StateKind::Ecs { n_modes: cfg.system.n_modes.unwrap_or(2), theta },
        ),
        Cmd::SweepTaud => (OutputKind::TauDSweep, StateKind::Cat { theta }),
        Cmd::Preset { .. } => unreachable!("presets bypass config assembly"),
    };
    let grid = match (&cfg.grid, output) {
        (Some(g), _) => Grid { t_max: g.t_max, n_points: g.n_points, log_spaced: g.log_spaced },
        // Timescales and the tau_d sweep have serviceable defaults; traces do not.
        (None, OutputKind::Timescales) => Grid { t_max: 1.0, n_points: 2, log_spaced: false },
        (None, OutputKind::TauDSweep) => Grid { t_max: 1.0, n_points: 25, log_spaced: false },
        (None, _) => return Err("config needs a [grid] section for this output".into()),
    };
    let sweep_baths = match &cfg.sweep {
        Some(sw) => {
            let mut baths = vec![bath];
            for &c in &sw.cutoffs {
                baths.push(
                    BathSpec::new(cfg.bath.gamma, c, cfg.bath.temperature)
                        .map_err(|e| e.to_string())?,
                );
            }
            baths
        }
        None => vec![],
    };
    Ok(Scenario {
        name,
        bath,
        system,
        state,
        grid,
        output,
        settings: QuadratureSettings::default(),
        sweep_baths,
    })
}

fn print_report(report: &RunReport) {
    println!("scenario: {}", report.scenario);
    println!("regime: {}", report.regime);
    println!(
        "timescales: tau_s={:.6e} tau_gamma={:.6e} tau_b={:.6e}",
        report.timescales.tau_s, report.timescales.tau_gamma, report.timescales.tau_b
    );
    for f in &report.files {
        println!("wrote: {}", f.display());
    }
    for c in &report.checks {
        let status = if c.passed { "pass" } else { "FAIL" };
        println!(
            "oracle {status}: {} (deviation {:.3e}, limit {:.1e})",
            c.name, c.deviation, c.limit
        );
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut sc = match &cli.cmd {
        Cmd::Preset { name } => match scenario::preset::<f64>(name) {
            Ok(sc) => sc,
            Err(e) => {
                return fail(
                    EXIT_CONFIG,
                    &format!("{e}; available presets: {}", PRESET_NAMES.join(", ")),
                )
            }
        },
        cmd => {
            let Some(path) = &cli.common.config else {
                return fail(EXIT_CONFIG, "this subcommand needs --config <path>");
            };
            let cfg = match load_config(path) {
                Ok(c) => c,
                Err(msg) => return fail(EXIT_CONFIG, &msg),
            };
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "run".into());
            match scenario_from_config(cmd, &cfg, name) {
                Ok(sc) => sc,
                Err(msg) => return fail(EXIT_CONFIG, &msg),
            }
        }
    };
    if let Some(n) = cli.common.grid_points {
        sc.grid.n_points = n;
    }
    if let Some(t) = cli.common.t_max {
        sc.grid.t_max = t;
    }
    if let Some(tol) = cli.common.tol {
        sc.settings.rel_tol = tol;
    }
    match scenario::run(&sc, &cli.common.out, cli.common.check_oracle) {
        Ok(report) => {
            print_report(&report);
            if !report.failed_checks().is_empty() {
                eprintln!("error: inline oracle checks failed");
                return ExitCode::from(EXIT_ORACLE);
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(exit_code_for(&e), &e.to_string()),
    }
}
