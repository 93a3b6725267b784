//! Cat-state Wigner dynamics, the closed-form decoherence function mu_I(t),
//! its direct-quadrature oracle, the two asymptotic decay laws, decoherence
//! time extraction and revival detection.
//!
//! All mu computations run in log space so that displacements |alpha0|^2 of
//! order 10^3 neither overflow nor lose the normalization mu_I(0) = 1.

use crate::error::{Error, Result};
use crate::langevin::{GreenFunction, MomentState, PropagatorState};
use crate::model::{classify_regime, timescales, BathSpec, Regime, SystemSpec};
use crate::quad::QuadratureSettings;
use crate::scalar::Real;

/// Superposition of two coherent packets at +/- (q0, p0) with relative phase
/// theta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatState<R> {
    pub system: SystemSpec<R>,
    pub theta: R,
    /// N~0 = (1 + e^(q0^2/sigma0^2))^(-1); underflows to 0 for very large
    /// separations, which is why nothing downstream divides by it.
    pub norm_n0: R,
}

impl<R: Real> CatState<R> {
    /// A p0 != 0 cat is folded into an equivalent p0 = 0 one by phase-space
    /// rotation (q0_eff = 2 sigma0 |alpha0|), valid for the coherent width.
    pub fn new(system: SystemSpec<R>, theta: R) -> Result<Self> {
        system.validate()?;
        let mut system = system;
        if system.p0 != R::zero() {
            if !system.has_coherent_width() {
                return Err(Error::InvalidSpec(
                    "p0 != 0 requires the coherent-state width sigma0^2 = hbar/(2 m omega0)".into(),
                ));
            }
            system.q0 = R::two() * system.sigma0 * system.alpha2().sqrt();
            system.p0 = R::zero();
        }
        let beta0 = system.q0 * system.q0 / (system.sigma0 * system.sigma0);
        let norm_n0 = (-beta0 - (-beta0).exp().ln_1p()).exp();
        Ok(Self { system, theta, norm_n0 })
    }

    fn beta0(&self) -> R {
        self.system.q0 * self.system.q0 / (self.system.sigma0 * self.system.sigma0)
    }
}

/// Initial cat Wigner function, Eq. (9) generalized to a relative phase.
pub fn cat_wigner<R: Real>(q: R, p: R, state: &CatState<R>) -> R {
    let sys = &state.system;
    let s2 = sys.sigma0 * sys.sigma0;
    let hb = sys.hbar;
    let half_beta0 = state.beta0() * R::half();
    let quad = q * q / (R::two() * s2) + R::two() * p * p * s2 / (hb * hb);
    let fringe = (R::two() * sys.q0 * p / hb - state.theta).cos();
    // W = e^(-quad) [e^(b0/2) cos + cosh(q q0/s2)] / (pi hbar (e^(b0/2) + cos theta)),
    // with every exponent combined before exponentiating so that large
    // separations neither overflow nor produce inf * 0.
    let log_norm = half_beta0 + state.theta.cos().mul_add((-half_beta0).exp(), R::one()).ln();
    let x = q * sys.q0 / s2;
    let base = -quad - log_norm;
    (fringe * (base + half_beta0).exp()
        + ((x + base).exp() + (-x + base).exp()) * R::half())
        / (R::PI() * hb)
}

/// 2x2 covariance bookkeeping in the (p, q) ordering.
struct Sigma<R> {
    det: R,
    /// Sigma^{-1} rows: [[a, b], [b, c]].
    inv: [[R; 2]; 2],
}

fn sigma<R: Real>(m: &MomentState<R>) -> Sigma<R> {
    let half_qp = m.qp * R::half();
    let det = m.p2 * m.q2 - half_qp * half_qp;
    let inv = [
        [m.q2 / det, -half_qp / det],
        [-half_qp / det, m.p2 / det],
    ];
    Sigma { det, inv }
}

/// Displacement vector b = (q0 / 2 sigma0^2)(f', f/m) in the (p, q) ordering.
fn displacement<R: Real>(state: &CatState<R>, prop: &PropagatorState<R>) -> [R; 2] {
    let sys = &state.system;
    let c = sys.q0 / (R::two() * sys.sigma0 * sys.sigma0);
    [c * prop.fdot, c * prop.f / sys.mass]
}

/// Interference part of the evolved Wigner function at (q, p), closed form.
pub fn evolve_interference_wigner<R: Real>(
    q: R,
    p: R,
    state: &CatState<R>,
    prop: &PropagatorState<R>,
) -> R {
    let sys = &state.system;
    let sg = sigma(&prop.moments);
    let b = displacement(state, prop);
    let v = [p, q];
    let hb = sys.hbar;
    let mut vsb = R::zero();
    let mut vsv = R::zero();
    let mut bsb = R::zero();
    for i in 0..2 {
        for j in 0..2 {
            vsb += v[i] * sg.inv[i][j] * b[j];
            vsv += v[i] * sg.inv[i][j] * v[j];
            bsb += b[i] * sg.inv[i][j] * b[j];
        }
    }
    let beta = hb * hb * bsb;
    let half_beta0 = state.beta0() * R::half();
    let exponent = beta * R::half() - half_beta0 - (-half_beta0).exp().ln_1p() - vsv * R::half();
    (hb * vsb - state.theta).cos() * exponent.exp() / (R::two() * R::PI() * sg.det.sqrt())
}

/// Decoherence function mu_I(t), closed form, normalized to mu_I(0) = 1.
pub fn mu_closed_form<R: Real>(state: &CatState<R>, prop: &PropagatorState<R>) -> R {
    let sys = &state.system;
    let sg = sigma(&prop.moments);
    let b = displacement(state, prop);
    let mut bsb = R::zero();
    for i in 0..2 {
        for j in 0..2 {
            bsb += b[i] * sg.inv[i][j] * b[j];
        }
    }
    let hb = sys.hbar;
    let beta = hb * hb * bsb;
    let beta0 = state.beta0();
    let ln_mu0 = (hb / (R::two() * sg.det.sqrt())).ln();
    let ln_mu = ln_mu0 + (beta - beta0) + (-beta).exp().ln_1p() - (-beta0).exp().ln_1p();
    ln_mu.exp()
}

/// Direct-quadrature oracle: mu_I(t) = (2 pi hbar)^2 int int W_I^2 dq dp,
/// normalized by its own t = 0 value. Trapezoid on a fringe-resolving grid
/// over +/- 8 standard deviations.
pub fn mu_quadrature<R: Real>(
    state: &CatState<R>,
    prop: &PropagatorState<R>,
    green: &GreenFunction<R>,
) -> Result<R> {
    let raw_t = w_interference_norm(state, prop)?;
    let (f0, fd0, fdd0) = green.eval(R::zero());
    let sys = &state.system;
    let m0 = crate::langevin::moments(R::zero(), sys, green, (R::zero(), R::zero(), R::zero()));
    let prop0 = PropagatorState { t: R::zero(), f: f0, fdot: fd0, fddot: fdd0, moments: m0 };
    let raw_0 = w_interference_norm(state, &prop0)?;
    Ok(raw_t / raw_0)
}

fn w_interference_norm<R: Real>(state: &CatState<R>, prop: &PropagatorState<R>) -> Result<R> {
    let sys = &state.system;
    let sg = sigma(&prop.moments);
    let b = displacement(state, prop);
    let hb = sys.hbar;
    // Fringe wave numbers along p and q: hbar (Sigma^{-1} b).
    let kp = (hb * (sg.inv[0][0] * b[0] + sg.inv[0][1] * b[1])).abs();
    let kq = (hb * (sg.inv[1][0] * b[0] + sg.inv[1][1] * b[1])).abs();
    let sp = prop.moments.p2.sqrt();
    let sq = prop.moments.q2.sqrt();
    let eight = R::of(8.0);
    let axis = |half_range: R, k: R| -> (usize, R) {
        let mut step = half_range / R::of(64.0);
        if k > R::zero() {
            step = step.min(R::two() * R::PI() / k / eight);
        }
        let n = ((R::two() * half_range / step).ceil().as_f64() as usize + 1).min(20001);
        (n, R::two() * half_range / R::of((n - 1) as f64))
    };
    let (np, dp) = axis(eight * sp, kp);
    let (nq, dq) = axis(eight * sq, kq);
    let mut total = R::zero();
    for iq in 0..nq {
        let q = -eight * sq + dq * R::of(iq as f64);
        let wq = if iq == 0 || iq == nq - 1 { R::half() } else { R::one() };
        let mut row = R::zero();
        for ip in 0..np {
            let p = -eight * sp + dp * R::of(ip as f64);
            let wp = if ip == 0 || ip == np - 1 { R::half() } else { R::one() };
            let w = evolve_interference_wigner(q, p, state, prop);
            row += wp * w * w;
        }
        total += wq * row;
    }
    let c = R::two() * R::PI() * hb;
    let val = c * c * total * dp * dq;
    if !val.is_finite() || val <= R::zero() {
        return Err(Error::QuadratureFailure {
            target: 0.0,
            achieved: f64::INFINITY,
            subdivisions: (np * nq),
        });
    }
    Ok(val)
}

/// Eq. (38) thermal approximant exp[-(4 q0^2 / hbar^2) D_p(inf) t] with the
/// exact stationary D_p(inf) = (hbar/2) J(omega0) coth(hbar omega0 / 2 kT).
pub fn mu_thermal_approx<R: Real>(t: R, state: &CatState<R>, bath: &BathSpec<R>) -> R {
    let sys = &state.system;
    let w0 = sys.omega0;
    let g = bath.gamma_abs(sys);
    let big_g = bath.cutoff_abs(sys);
    let j = g * w0 * big_g * big_g / (w0 * w0 + big_g * big_g);
    let coth = if bath.is_zero_temperature() {
        R::one()
    } else {
        (sys.hbar * w0 / (R::two() * bath.thermal_energy(sys))).tanh().recip()
    };
    let d_p_inf = sys.hbar * R::half() * j * coth;
    (-R::of(4.0) * sys.q0 * sys.q0 * d_p_inf * t / (sys.hbar * sys.hbar)).exp()
}

/// Eq. (43) vacuum/interaction approximant
/// exp[-(8 q0^2 / pi hbar) int J coth (1 - cos omega t)/omega^2 domega].
pub fn mu_vacuum_approx<R: Real>(
    t: R,
    state: &CatState<R>,
    bath: &BathSpec<R>,
    settings: &QuadratureSettings<R>,
) -> Result<R> {
    if t < R::zero() {
        return Err(Error::InvalidSpec("mu_vacuum_approx needs t >= 0".into()));
    }
    if t == R::zero() {
        return Ok(R::one());
    }
    let sys = &state.system;
    let a = settings.omega_max_factor
        * bath
            .cutoff_abs(sys)
            .max(bath.thermal_energy(sys) / sys.hbar)
            .max(t.recip())
            .max(sys.omega0);
    let finite = crate::quad::quad_semi_infinite(
        &|w: R| {
            let weight = crate::langevin::thermal_weight_abs(w, bath, sys);
            let wt = w * t;
            let osc = if wt.abs() < R::of(1e-4) {
                t * t * R::half() * (R::one() - wt * wt / R::of(12.0))
            } else {
                (R::one() - wt.cos()) / (w * w)
            };
            [weight * osc]
        },
        a,
        Some(t),
        settings,
    )?[0];
    // Tail with J coth ~ c1/omega: int_A (1 - cos wt)/w^3 dw.
    let c1 = bath.gamma_abs(sys) * bath.cutoff_abs(sys) * bath.cutoff_abs(sys);
    let (_, ci_a) = crate::special::sici(a * t);
    let at = a * t;
    let i3_cos = at.cos() / (R::two() * a * a) - t * R::half() * (at.sin() / a - t * ci_a);
    let tail = c1 * (R::half() / (a * a) - i3_cos);
    let rate = R::of(8.0) * sys.q0 * sys.q0 / (R::PI() * sys.hbar) * (finite + tail);
    Ok((-rate).exp())
}

/// Which decoherence-time expression applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TauBranch {
    /// hbar^2 / (4 gamma kT) q0^-2, Eq. (41).
    Quadratic,
    /// hbar / (2 sqrt(gamma Gamma kT)) q0^-1, Eq. (45).
    Linear,
    /// 1/e crossing of the full mu_I(t).
    Numeric,
    /// q0 = 0: nothing to decohere.
    NoDecoherence,
}

/// Decoherence time and the branch that produced it. The closed-form
/// branches apply in the high-temperature regime (kT >= 5 hbar omega0),
/// split at their crossing point tau_d = 1/Gamma; otherwise the 1/e crossing
/// of mu_closed_form is bisected numerically.
pub fn decoherence_time<R: Real>(
    state: &CatState<R>,
    bath: &BathSpec<R>,
    settings: &QuadratureSettings<R>,
) -> Result<(R, TauBranch)> {
    let sys = &state.system;
    let q0 = sys.q0;
    if q0 * q0 / (sys.sigma0 * sys.sigma0) < R::of(1e-12) {
        return Ok((R::infinity(), TauBranch::NoDecoherence));
    }
    let kt = bath.thermal_energy(sys);
    let g = bath.gamma_abs(sys);
    let big_g = bath.cutoff_abs(sys);
    let hb = sys.hbar;
    if kt >= R::of(5.0) * hb * sys.omega0 {
        let tau_quad = hb * hb / (R::of(4.0) * g * kt * q0 * q0);
        if tau_quad >= big_g.recip() {
            return Ok((tau_quad, TauBranch::Quadratic));
        }
        return Ok((hb / (R::two() * (g * big_g * kt).sqrt() * q0), TauBranch::Linear));
    }
    // Numeric branch: bracket the 1/e crossing by doubling, then bisect.
    let green = GreenFunction::new(bath, sys)?;
    let target = R::one().exp().recip();
    let mu_at = |t: R| -> Result<R> {
        let prop = PropagatorState::at(t, &green, bath, sys, settings)?;
        Ok(mu_closed_form(state, &prop))
    };
    let mut hi = R::of(1e-3) / sys.omega0;
    let mut lo = R::zero();
    let mut found = false;
    for _ in 0..80 {
        if mu_at(hi)? < target {
            found = true;
            break;
        }
        lo = hi;
        hi *= R::two();
    }
    if !found {
        return Ok((R::infinity(), TauBranch::NoDecoherence));
    }
    for _ in 0..60 {
        let mid = (lo + hi) * R::half();
        if mu_at(mid)? < target {
            hi = mid;
        } else {
            lo = mid;
        }
        if (hi - lo) <= R::of(1e-10) * hi {
            break;
        }
    }
    Ok(((lo + hi) * R::half(), TauBranch::Numeric))
}

/// Strict local maxima of y after its first strict local minimum, with a
/// 3-point stencil. The stencil tolerance is relative to the local value (a
/// collapse can bottom out many orders of magnitude below its peak), while
/// reported peaks must clear an absolute noise floor of 1e-12.
pub fn detect_revivals<R: Real>(t: &[R], y: &[R]) -> Vec<(R, R)> {
    let floor = R::of(1e-12);
    let rel = R::of(1e-9);
    let mut seen_min = false;
    let mut out = Vec::new();
    for i in 1..y.len().saturating_sub(1) {
        let tol = rel * y[i].abs().max(R::of(1e-300));
        let up = y[i] - y[i - 1];
        let down = y[i] - y[i + 1];
        if !seen_min && up < -tol && down < -tol {
            seen_min = true;
        } else if seen_min && up > tol && down > tol && y[i] > floor {
            out.push((t[i], y[i]));
        }
    }
    out
}

/// First crossing of y below 1/e, linearly interpolated.
pub fn one_over_e_time<R: Real>(t: &[R], y: &[R]) -> Option<R> {
    let target = R::one().exp().recip();
    for i in 1..y.len() {
        if y[i] < target && y[i - 1] >= target {
            let frac = (y[i - 1] - target) / (y[i - 1] - y[i]);
            return Some(t[i - 1] + frac * (t[i] - t[i - 1]));
        }
    }
    None
}

/// Full decoherence trace: mu_I plus both approximants on a shared grid.
#[derive(Debug, Clone)]
pub struct DecayTrace<R> {
    pub t_grid: Vec<R>,
    pub mu: Vec<R>,
    pub mu_thermal: Vec<R>,
    pub mu_vacuum: Vec<R>,
    pub revivals: Vec<(R, R)>,
    pub regime: Regime,
}

impl<R: Real> DecayTrace<R> {
    pub fn compute(
        state: &CatState<R>,
        bath: &BathSpec<R>,
        t_grid: &[R],
        settings: &QuadratureSettings<R>,
    ) -> Result<Self> {
        if t_grid.len() < 2 || t_grid[0] != R::zero() {
            return Err(Error::InvalidSpec("decay trace needs a grid starting at 0".into()));
        }
        let sys = &state.system;
        let green = GreenFunction::new(bath, sys)?;
        let mut mu = Vec::with_capacity(t_grid.len());
        let mut mu_thermal = Vec::with_capacity(t_grid.len());
        let mut mu_vacuum = Vec::with_capacity(t_grid.len());
        for &t in t_grid {
            let prop = PropagatorState::at(t, &green, bath, sys, settings)?;
            mu.push(mu_closed_form(state, &prop));
            mu_thermal.push(mu_thermal_approx(t, state, bath));
            mu_vacuum.push(mu_vacuum_approx(t, state, bath, settings)?);
        }
        let revivals = detect_revivals(t_grid, &mu);
        let regime = classify_regime(&timescales(bath, sys)?)?;
        Ok(Self { t_grid: t_grid.to_vec(), mu, mu_thermal, mu_vacuum, revivals, regime })
    }
}
