//! Figure-reproduction scenarios: presets carrying the captioned parameters,
//! the end-to-end pipeline runner, and the tau_d sweep.
//!
//! Runners write CSV (17 significant digits, '#'-prefixed metadata, no
//! timestamps) plus a standalone Python plot script per run; identical
//! configuration produces byte-identical files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::decoherence::{
    decoherence_time, detect_revivals, mu_quadrature, mu_closed_form, CatState, DecayTrace,
    TauBranch,
};
use crate::entanglement::{
    concurrence_nonmarkovian, concurrence_static, rebuild_density, wootters_concurrence, EcsSpec,
};
use crate::error::{Error, Result};
use crate::hpz;
use crate::langevin::{GreenFunction, PropagatorState};
use crate::model::{classify_regime, timescales, BathSpec, SystemSpec, Timescales};
use crate::quad::QuadratureSettings;
use crate::scalar::Real;

/// Which initial state the scenario evolves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateKind<R> {
    Cat { theta: R },
    Ecs { n_modes: usize, theta: R },
}

/// Which pipeline output the scenario produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputKind {
    Timescales,
    Coefficients,
    Decoherence,
    Concurrence,
    TauDSweep,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<R> {
    pub t_max: R,
    pub n_points: usize,
    pub log_spaced: bool,
}

impl<R: Real> Grid<R> {
    pub fn times(&self) -> Result<Vec<R>> {
        if self.n_points < 2 || !(self.t_max > R::zero()) {
            return Err(Error::InvalidSpec("grid needs >= 2 points and t_max > 0".into()));
        }
        let n = self.n_points;
        let mut t = Vec::with_capacity(n);
        if self.log_spaced {
            // t[0] = 0, then log-spaced over four decades up to t_max.
            t.push(R::zero());
            let lo = self.t_max * R::of(1e-4);
            for i in 0..(n - 1) {
                let frac = R::of(i as f64) / R::of((n - 2) as f64);
                t.push(lo * (self.t_max / lo).powf(frac));
            }
        } else {
            for i in 0..n {
                t.push(self.t_max * R::of(i as f64) / R::of((n - 1) as f64));
            }
        }
        Ok(t)
    }
}

#[derive(Debug, Clone)]
pub struct Scenario<R> {
    pub name: String,
    pub bath: BathSpec<R>,
    pub system: SystemSpec<R>,
    pub state: StateKind<R>,
    pub grid: Grid<R>,
    pub output: OutputKind,
    pub settings: QuadratureSettings<R>,
    /// Additional baths for the tau_d sweep (one output column per bath).
    pub sweep_baths: Vec<BathSpec<R>>,
}

/// One inline oracle verification.
#[derive(Debug, Clone)]
pub struct OracleCheck {
    pub name: String,
    pub passed: bool,
    pub deviation: f64,
    pub limit: f64,
}

/// What a run produced.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub scenario: String,
    pub regime: String,
    pub timescales: Timescales<f64>,
    pub files: Vec<PathBuf>,
    pub checks: Vec<OracleCheck>,
}

impl RunReport {
    pub fn failed_checks(&self) -> Vec<&OracleCheck> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

/// A named figure preset with exactly the captioned parameters.
pub fn preset<R: Real>(name: &str) -> Result<Scenario<R>> {
    let settings = QuadratureSettings::default();
    let bath = |g: f64, c: f64, kt: f64| BathSpec::new(R::of(g), R::of(c), R::of(kt));
    let cat = |alpha0: f64| SystemSpec::with_alpha0(R::of(alpha0));
    let lin = |t_max: f64, n: usize| Grid { t_max: R::of(t_max), n_points: n, log_spaced: false };
    let s = match name {
        "fig1" => Scenario {
            name: name.into(),
            bath: bath(1e-5, 10.0, 50.0)?,
            system: SystemSpec::default(),
            state: StateKind::Cat { theta: R::zero() },
            grid: lin(1.0, 25),
            output: OutputKind::TauDSweep,
            settings,
            sweep_baths: vec![bath(1e-5, 10.0, 50.0)?, bath(1e-5, 100.0, 50.0)?],
        },
        "fig2a" => Scenario {
            name: name.into(),
            bath: bath(1e-5, 10.0, 10.0)?,
            system: cat(30.0f64.sqrt()),
            state: StateKind::Cat { theta: R::zero() },
            grid: lin(12.0, 481),
            output: OutputKind::Decoherence,
            settings,
            sweep_baths: vec![],
        },
        "fig2b" => Scenario {
            name: name.into(),
            bath: bath(1e-5, 10.0, 1e-3)?,
            system: cat(10.0),
            state: StateKind::Cat { theta: R::zero() },
            grid: Grid { t_max: R::of(100.0), n_points: 401, log_spaced: true },
            output: OutputKind::Decoherence,
            settings,
            sweep_baths: vec![],
        },
        "fig3a" => cat_scenario(name, bath(1e-5, 100.0, 10.0)?, 100.0, lin(0.3, 481))?,
        "fig3b" => cat_scenario(name, bath(1e-5, 10.0, 10.0)?, 100.0, lin(0.6, 481))?,
        "fig3c" => cat_scenario(name, bath(1e-5, 2.0, 10.0)?, 100.0, lin(2.0, 481))?,
        "fig3d" => cat_scenario(name, bath(1e-5, 10.0, 10.0)?, 500.0, lin(0.1, 481))?,
        "fig3e" => cat_scenario(name, bath(1e-5, 10.0, 10.0)?, 10.0, lin(50.0, 481))?,
        "fig3f" => cat_scenario(name, bath(0.05, 0.01, 10.0)?, 30.0, lin(6.0, 481))?,
        "fig4a" => ecs_scenario(name, bath(1e-3, 3.0, 0.0)?, 20.0, lin(3.0, 301))?,
        "fig4b" => ecs_scenario(name, bath(1e-3, 0.5, 0.0)?, 20.0, lin(8.0, 301))?,
        "fig4c" => ecs_scenario(name, bath(1e-3, 1e-2, 0.0)?, 1500.0, lin(12.0, 301))?,
        "fig4d" => ecs_scenario(name, bath(1e-3, 1e-3, 0.0)?, 3500.0, lin(10.0, 301))?,
        other => {
            return Err(Error::InvalidSpec(format!(
                "unknown preset '{other}' (expected fig1, fig2a, fig2b, fig3a-f, fig4a-d)"
            )))
        }
    };
    Ok(s)
}

fn cat_scenario<R: Real>(
    name: &str,
    bath: BathSpec<R>,
    alpha0: f64,
    grid: Grid<R>,
) -> Result<Scenario<R>> {
    Ok(Scenario {
        name: name.into(),
        bath,
        system: SystemSpec::with_alpha0(R::of(alpha0)),
        state: StateKind::Cat { theta: R::zero() },
        grid,
        output: OutputKind::Decoherence,
        settings: QuadratureSettings::default(),
        sweep_baths: vec![],
    })
}

fn ecs_scenario<R: Real>(
    name: &str,
    bath: BathSpec<R>,
    alpha0: f64,
    grid: Grid<R>,
) -> Result<Scenario<R>> {
    Ok(Scenario {
        name: name.into(),
        bath,
        system: SystemSpec::with_alpha0(R::of(alpha0)),
        state: StateKind::Ecs { n_modes: 2, theta: R::zero() },
        grid,
        output: OutputKind::Concurrence,
        settings: QuadratureSettings::default(),
        sweep_baths: vec![],
    })
}

/// All preset names, in figure order.
pub const PRESET_NAMES: [&str; 13] = [
    "fig1", "fig2a", "fig2b", "fig3a", "fig3b", "fig3c", "fig3d", "fig3e", "fig3f", "fig4a",
    "fig4b", "fig4c", "fig4d",
];

/// tau_d over a q0 range for each bath; rows (q0, per-bath (tau_d, branch)).
pub fn sweep_tau_d<R: Real>(
    q0_values: &[R],
    baths: &[BathSpec<R>],
    system: &SystemSpec<R>,
    settings: &QuadratureSettings<R>,
) -> Result<Vec<(R, Vec<(R, TauBranch)>)>> {
    if q0_values.len() < 8 {
        return Err(Error::InvalidSpec("tau_d sweep needs >= 8 q0 points".into()));
    }
    let mut rows = Vec::with_capacity(q0_values.len());
    for &q0 in q0_values {
        if !(q0 > R::zero()) {
            return Err(Error::InvalidSpec("tau_d sweep needs q0 > 0".into()));
        }
        let state = CatState::new(SystemSpec { q0, ..*system }, R::zero())?;
        let mut cols = Vec::with_capacity(baths.len());
        for bath in baths {
            cols.push(decoherence_time(&state, bath, settings)?);
        }
        rows.push((q0, cols));
    }
    Ok(rows)
}

fn fmt_col<R: Real>(x: R) -> String {
    format!("{:.16e}", x.as_f64())
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}

fn metadata_header<R: Real>(sc: &Scenario<R>, regime: &str, ts: &Timescales<R>) -> String {
    let mut m = String::new();
    let _ = writeln!(m, "# scenario: {}", sc.name);
    let _ = writeln!(
        m,
        "# bath: gamma={:e} cutoff={:e} temperature={:e}",
        sc.bath.gamma.as_f64(),
        sc.bath.cutoff.as_f64(),
        sc.bath.temperature.as_f64()
    );
    let _ = writeln!(
        m,
        "# system: sigma0={:e} q0={:e} p0={:e} alpha2={:e}",
        sc.system.sigma0.as_f64(),
        sc.system.q0.as_f64(),
        sc.system.p0.as_f64(),
        sc.system.alpha2().as_f64()
    );
    let _ = writeln!(m, "# regime: {regime} (factor-5 thresholds on the time-scale predicates)");
    let _ = writeln!(
        m,
        "# timescales: tau_s={:e} tau_gamma={:e} tau_b={:e}",
        ts.tau_s.as_f64(),
        ts.tau_gamma.as_f64(),
        ts.tau_b.as_f64()
    );
    m
}

fn plot_script(csv_name: &str, columns: &[&str], ylabel: &str, logy: bool) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "#!/usr/bin/env python3");
    let _ = writeln!(s, "import csv");
    let _ = writeln!(s, "import matplotlib");
    let _ = writeln!(s, "matplotlib.use(\"Agg\")");
    let _ = writeln!(s, "import matplotlib.pyplot as plt");
    let _ = writeln!(s);
    let _ = writeln!(s, "rows = []");
    let _ = writeln!(s, "with open(\"{csv_name}\") as fh:");
    let _ = writeln!(s, "    for line in fh:");
    let _ = writeln!(s, "        if line.startswith(\"#\"):");
    let _ = writeln!(s, "            continue");
    let _ = writeln!(s, "        rows.append(line.strip())");
    let _ = writeln!(s, "reader = csv.DictReader(rows)");
    let _ = writeln!(s, "data = {{name: [] for name in reader.fieldnames}}");
    let _ = writeln!(s, "for row in reader:");
    let _ = writeln!(s, "    for key, value in row.items():");
    let _ = writeln!(s, "        data[key].append(float(value))");
    let _ = writeln!(s);
    let _ = writeln!(s, "x = data[reader.fieldnames[0]]");
    for col in columns {
        let _ = writeln!(s, "plt.plot(x, data[\"{col}\"], label=\"{col}\")");
    }
    if logy {
        let _ = writeln!(s, "plt.xscale(\"log\")");
        let _ = writeln!(s, "plt.yscale(\"log\")");
    }
    let _ = writeln!(s, "plt.xlabel(reader.fieldnames[0])");
    let _ = writeln!(s, "plt.ylabel(\"{ylabel}\")");
    let _ = writeln!(s, "plt.legend()");
    let _ = writeln!(s, "plt.tight_layout()");
    let _ = writeln!(s, "plt.savefig(\"{}.png\", dpi=160)", csv_name.trim_end_matches(".csv"));
    s
}

/// Execute the scenario pipeline and write its artifacts under `out_dir`.
pub fn run<R: Real>(sc: &Scenario<R>, out_dir: &Path, check_oracle: bool) -> Result<RunReport> {
    sc.settings.validate()?;
    let ts = timescales(&sc.bath, &sc.system)?;
    let regime = match classify_regime(&ts) {
        Ok(r) => r.to_string(),
        Err(Error::AmbiguousRegime { tb_over_ts, ts_over_tg }) => {
            format!("ambiguous (tau_b/tau_s={tb_over_ts:.3e}, tau_s/tau_gamma={ts_over_tg:.3e})")
        }
        Err(e) => return Err(e),
    };
    let ts64 = Timescales {
        tau_s: ts.tau_s.as_f64(),
        tau_gamma: ts.tau_gamma.as_f64(),
        tau_b: ts.tau_b.as_f64(),
        tau_d: None,
    };
    let mut files = Vec::new();
    let mut checks = Vec::new();
    let header = metadata_header(sc, &regime, &ts);

    match sc.output {
        OutputKind::Timescales => {
            let mut csv = header;
            csv.push_str("tau_s,tau_gamma,tau_b\n");
            let _ = writeln!(
                csv,
                "{},{},{}",
                fmt_col(ts.tau_s),
                fmt_col(ts.tau_gamma),
                fmt_col(ts.tau_b)
            );
            files.push(write_file(out_dir, &format!("{}_timescales.csv", sc.name), &csv)?);
        }
        OutputKind::Coefficients => {
            let series = hpz::CoefficientSeries::compute(
                &sc.bath,
                &sc.system,
                sc.grid.t_max,
                sc.grid.n_points,
                &sc.settings,
            )?;
            let mut csv = header.clone();
            if series.non_lindblad() {
                csv.push_str("# non_lindblad: true\n");
            }
            csv.push_str(&series.to_csv());
            let name = format!("{}_coeffs.csv", sc.name);
            files.push(write_file(out_dir, &name, &csv)?);
            files.push(write_file(
                out_dir,
                &format!("{}_coeffs.py", sc.name),
                &plot_script(&name, &["gamma_p", "d_p", "d_qp"], "coefficient", false),
            )?);
            if check_oracle {
                let t_probe = sc.grid.t_max * R::half();
                let closed = hpz::gamma_p(t_probe, &sc.bath, &sc.system);
                let quad_ref = R::two() / (sc.system.hbar * sc.system.mass * sc.system.omega0)
                    * crate::quad::integrate(
                        &|u: R| {
                            let l = sc.bath.gamma_abs(&sc.system)
                                * sc.bath.cutoff_abs(&sc.system)
                                * sc.bath.cutoff_abs(&sc.system)
                                * sc.system.hbar
                                * R::half()
                                * (-sc.bath.cutoff_abs(&sc.system) * u).exp();
                            l * (sc.system.omega0 * u).sin()
                        },
                        R::zero(),
                        t_probe,
                        &sc.settings,
                    )?;
                checks.push(oracle_check("gamma_p closed form vs quadrature", closed, quad_ref, 1e-8));
            }
        }
        OutputKind::Decoherence => {
            let theta = match sc.state {
                StateKind::Cat { theta } => theta,
                _ => return Err(Error::InvalidSpec("decoherence output needs a cat state".into())),
            };
            let state = CatState::new(sc.system, theta)?;
            let grid = sc.grid.times()?;
            let trace = DecayTrace::compute(&state, &sc.bath, &grid, &sc.settings)?;
            let (tau_d, branch) = decoherence_time(&state, &sc.bath, &sc.settings)?;
            let non_lindblad = grid
                .iter()
                .skip(1)
                .step_by(8)
                .map(|&t| hpz::secular_rates(t, &sc.bath, &sc.system, &sc.settings))
                .collect::<Result<Vec<_>>>()?
                .iter()
                .any(|&(down, up)| down < R::zero() || up < R::zero());
            let mut csv = header.clone();
            let _ = writeln!(csv, "# tau_d: {:e} ({:?})", tau_d.as_f64(), branch);
            let _ = writeln!(csv, "# non_lindblad: {non_lindblad}");
            for (t, mu) in &trace.revivals {
                let _ = writeln!(csv, "# revival: t={:e} mu={:e}", t.as_f64(), mu.as_f64());
            }
            csv.push_str("t,mu,mu_thermal,mu_vacuum\n");
            for i in 0..grid.len() {
                let _ = writeln!(
                    csv,
                    "{},{},{},{}",
                    fmt_col(grid[i]),
                    fmt_col(trace.mu[i]),
                    fmt_col(trace.mu_thermal[i]),
                    fmt_col(trace.mu_vacuum[i])
                );
            }
            let name = format!("{}_mu.csv", sc.name);
            files.push(write_file(out_dir, &name, &csv)?);
            files.push(write_file(
                out_dir,
                &format!("{}_mu.py", sc.name),
                &plot_script(&name, &["mu", "mu_thermal", "mu_vacuum"], "mu_I(t)", sc.grid.log_spaced),
            )?);
            if check_oracle {
                let green = GreenFunction::new(&sc.bath, &sc.system)?;
                let mut worst_res = R::zero();
                for k in 1..=50 {
                    let t = sc.grid.t_max * R::of(k as f64) / R::of(50.0);
                    worst_res = worst_res.max(green.memory_residual(t).abs());
                }
                checks.push(OracleCheck {
                    name: "green function memory residual".into(),
                    passed: worst_res.as_f64() <= 1e-8,
                    deviation: worst_res.as_f64(),
                    limit: 1e-8,
                });
                for frac in [0.1, 0.45, 0.9] {
                    let t = sc.grid.t_max * R::of(frac);
                    let prop = PropagatorState::at(t, &green, &sc.bath, &sc.system, &sc.settings)?;
                    let closed = mu_closed_form(&state, &prop);
                    let quadr = mu_quadrature(&state, &prop, &green)?;
                    checks.push(oracle_check(
                        &format!("mu closed vs quadrature at t={:.2}", t.as_f64()),
                        closed,
                        quadr,
                        1e-6,
                    ));
                }
            }
        }
        OutputKind::Concurrence => {
            let (n_modes, theta) = match sc.state {
                StateKind::Ecs { n_modes, theta } => (n_modes, theta),
                _ => return Err(Error::InvalidSpec("concurrence output needs an ECS state".into())),
            };
            let spec = EcsSpec::new(n_modes, theta, sc.system.alpha2())?;
            let grid = sc.grid.times()?;
            let rates = hpz::integrated_rates(&grid, &sc.bath, &sc.system, &sc.settings)?;
            let bare = sc.bath.gamma_abs(&sc.system) / sc.system.mass;
            let w0 = sc.system.omega0;
            let cutoff = sc.bath.cutoff_abs(&sc.system);
            let adjusted = bare * cutoff * cutoff / (w0 * w0 + cutoff * cutoff);
            let trace = concurrence_nonmarkovian(&grid, &spec, &rates, bare, adjusted)?;
            let revivals = detect_revivals(&grid, &trace.c);
            let mut csv = header.clone();
            match trace.separability_time {
                Some(t) => {
                    let _ = writeln!(csv, "# separability_time: {:e}", t.as_f64());
                }
                None => csv.push_str("# separability_time: none\n"),
            }
            for (t, c) in &revivals {
                let _ = writeln!(csv, "# revival: t={:e} c={:e}", t.as_f64(), c.as_f64());
            }
            csv.push_str("t,c,c_markov_bare,c_markov_adjusted\n");
            for i in 0..grid.len() {
                let _ = writeln!(
                    csv,
                    "{},{},{},{}",
                    fmt_col(grid[i]),
                    fmt_col(trace.c[i]),
                    fmt_col(trace.c_markov_bare[i]),
                    fmt_col(trace.c_markov_adjusted[i])
                );
            }
            let name = format!("{}_concurrence.csv", sc.name);
            files.push(write_file(out_dir, &name, &csv)?);
            files.push(write_file(
                out_dir,
                &format!("{}_concurrence.py", sc.name),
                &plot_script(&name, &["c", "c_markov_bare", "c_markov_adjusted"], "C12(t)", false),
            )?);
            if check_oracle {
                checks.push(concurrence_oracle_check(&spec)?);
            }
        }
        OutputKind::TauDSweep => {
            let baths = if sc.sweep_baths.is_empty() {
                std::slice::from_ref(&sc.bath)
            } else {
                &sc.sweep_baths[..]
            };
            let n = sc.grid.n_points.max(8);
            // Log-spaced q0 range straddling the Eq. (41)/(45) crossover.
            let q0s: Vec<R> = (0..n)
                .map(|i| {
                    let frac = R::of(i as f64) / R::of((n - 1) as f64);
                    R::one() * R::of(1000.0).powf(frac)
                })
                .collect();
            let rows = sweep_tau_d(&q0s, baths, &sc.system, &sc.settings)?;
            let mut csv = header.clone();
            let mut head = String::from("q0");
            for bath in baths {
                let _ = write!(head, ",tau_d_cutoff{:.0},branch_cutoff{:.0}", bath.cutoff.as_f64(), bath.cutoff.as_f64());
            }
            csv.push_str(&head);
            csv.push('\n');
            for (q0, cols) in &rows {
                let mut line = fmt_col(*q0);
                for (tau, branch) in cols {
                    let _ = write!(line, ",{},{:?}", fmt_col(*tau), branch);
                }
                csv.push_str(&line);
                csv.push('\n');
            }
            let name = format!("{}_taud.csv", sc.name);
            files.push(write_file(out_dir, &name, &csv)?);
            let cols: Vec<String> = baths
                .iter()
                .map(|b| format!("tau_d_cutoff{:.0}", b.cutoff.as_f64()))
                .collect();
            let col_refs: Vec<&str> = cols.iter().map(|s| s.as_str()).collect();
            files.push(write_file(
                out_dir,
                &format!("{}_taud.py", sc.name),
                &plot_script(&name, &col_refs, "tau_d", true),
            )?);
        }
    }

    Ok(RunReport { scenario: sc.name.clone(), regime, timescales: ts64, files, checks })
}

fn oracle_check<R: Real>(name: &str, a: R, b: R, limit: f64) -> OracleCheck {
    let deviation =
        ((a - b).abs() / a.abs().max(b.abs()).max(R::of(1e-300))).as_f64();
    OracleCheck { name: name.into(), passed: deviation <= limit, deviation, limit }
}

fn concurrence_oracle_check<R: Real>(spec: &EcsSpec<R>) -> Result<OracleCheck> {
    // Static algebraic concurrence against the Wootters eigenvalue route.
    let alg = concurrence_static(spec)?;
    let (p, q, m) = spec.parameters();
    let woot = wootters_concurrence(&rebuild_density(p, q, m, spec.theta))?;
    let deviation = (alg - woot).abs().as_f64();
    Ok(OracleCheck {
        name: "concurrence algebraic vs Wootters".into(),
        passed: deviation <= 1e-10,
        deviation,
        limit: 1e-10,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_exist_with_captioned_parameters() {
        for name in ["fig1", "fig2a", "fig2b", "fig3a", "fig3b", "fig3c", "fig3d", "fig3e",
            "fig3f", "fig4a", "fig4b", "fig4c", "fig4d"]
        {
            let sc: Scenario<f64> = preset(name).unwrap();
            assert_eq!(sc.name, name);
        }
        assert!(preset::<f64>("fig9").is_err());
        let fig3f: Scenario<f64> = preset("fig3f").unwrap();
        assert_eq!(fig3f.bath.gamma, 0.05);
        assert_eq!(fig3f.bath.cutoff, 0.01);
        assert_eq!(fig3f.bath.temperature, 10.0);
        assert!((fig3f.system.alpha2() - 900.0).abs() < 1e-9);
        let fig4c: Scenario<f64> = preset("fig4c").unwrap();
        assert_eq!(fig4c.bath.cutoff, 1e-2);
        assert!(fig4c.bath.is_zero_temperature());
        assert!((fig4c.system.alpha2() - 1500.0f64.powi(2)).abs() < 1e-3);
    }

    #[test]
    fn grid_shapes() {
        let lin = Grid { t_max: 2.0, n_points: 5, log_spaced: false };
        assert_eq!(lin.times().unwrap(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        let log = Grid::<f64> { t_max: 100.0, n_points: 6, log_spaced: true };
        let t = log.times().unwrap();
        assert_eq!(t[0], 0.0);
        assert!((t[1] - 1e-2).abs() < 1e-12);
        assert!((t[5] - 100.0).abs() < 1e-9);
        assert!(Grid { t_max: -1.0, n_points: 5, log_spaced: false }.times().is_err());
    }

    #[test]
    fn timescale_run_is_deterministic() {
        let sc = Scenario {
            output: OutputKind::Timescales,
            ..preset::<f64>("fig2a").unwrap()
        };
        let dir = std::env::temp_dir().join("qbm_scenario_test");
        let r1 = run(&sc, &dir, false).unwrap();
        let bytes1 = std::fs::read(&r1.files[0]).unwrap();
        let r2 = run(&sc, &dir, false).unwrap();
        let bytes2 = std::fs::read(&r2.files[0]).unwrap();
        assert_eq!(bytes1, bytes2);
        assert_eq!(r1.regime, "born-markovian");
        let text = String::from_utf8(bytes1).unwrap();
        assert!(text.contains("# scenario: fig2a"));
        assert!(text.contains("tau_s,tau_gamma,tau_b"));
    }

    #[test]
    fn concurrence_run_fig4b_end_to_end() {
        let mut sc = preset::<f64>("fig4b").unwrap();
        sc.grid.n_points = 121; // desk-scale smoke variant
        let dir = std::env::temp_dir().join("qbm_scenario_test_c");
        let report = run(&sc, &dir, true).unwrap();
        assert!(report.failed_checks().is_empty(), "{:?}", report.checks);
        let text = std::fs::read_to_string(&report.files[0]).unwrap();
        let first_data = text
            .lines()
            .skip_while(|l| l.starts_with('#'))
            .nth(1)
            .unwrap();
        let c0: f64 = first_data.split(',').nth(1).unwrap().parse().unwrap();
        assert!((c0 - 1.0).abs() < 1e-6, "ECS with alpha0=20 starts maximally entangled");
        assert!(report.files[1].to_string_lossy().ends_with(".py"));
    }
}
