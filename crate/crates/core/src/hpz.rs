//! Time-dependent HPZ master-equation coefficients to second order in the
//! coupling, the secular rates and the integrated quantities Gamma_p(t),
//! Delta_p(t).
//!
//! gamma_p and delta_omega2 come from closed-form time integrals of the
//! exponential dissipation kernel. D_qp and D_p swap the order of the nested
//! (t', omega) integrals: the inner time integral is done analytically under
//! the omega-quadrature, which also gets analytic 1/omega tails via Si/Ci.

use crate::error::{Error, Result};
use crate::kernels;
use crate::langevin::thermal_weight_abs;
use crate::model::{BathSpec, SystemSpec};
use crate::quad::{self, QuadratureSettings};
use crate::scalar::Real;
use crate::special::sici;

/// All master-equation coefficients at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HpzCoefficients<R> {
    pub t: R,
    pub gamma_p: R,
    pub delta_omega2: R,
    pub d_qp: R,
    pub d_p: R,
    pub gamma_down: R,
    pub gamma_up: R,
}

impl<R: Real> HpzCoefficients<R> {
    /// Derived gamma_q(t) = omega0^2 + delta Omega^2(t) - gamma Gamma / m.
    pub fn gamma_q(&self, bath: &BathSpec<R>, sys: &SystemSpec<R>) -> R {
        sys.omega0 * sys.omega0 + self.delta_omega2
            - bath.gamma_abs(sys) * bath.cutoff_abs(sys) / sys.mass
    }
}

/// Gamma_p(t) and Delta_p(t) sampled on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegratedRates<R> {
    pub t: Vec<R>,
    pub big_gamma_p: Vec<R>,
    pub delta_p: Vec<R>,
}

/// gamma_p(t) = (2 / hbar m omega0) int_0^t L(t') sin(omega0 t') dt',
/// with the integral of e^(-Gamma t') sin(omega0 t') done in closed form.
pub fn gamma_p<R: Real>(t: R, bath: &BathSpec<R>, sys: &SystemSpec<R>) -> R {
    let g = bath.gamma_abs(sys);
    let big_g = bath.cutoff_abs(sys);
    let w0 = sys.omega0;
    let denom = big_g * big_g + w0 * w0;
    let e = (-big_g * t).exp();
    g * big_g * big_g / (sys.mass * w0) * (w0 - e * (w0 * (w0 * t).cos() + big_g * (w0 * t).sin()))
        / denom
}

/// delta Omega^2(t) = gamma Gamma / m - (2 / hbar m) int_0^t L(t') cos(omega0 t') dt'.
pub fn delta_omega2<R: Real>(t: R, bath: &BathSpec<R>, sys: &SystemSpec<R>) -> R {
    let g = bath.gamma_abs(sys);
    let big_g = bath.cutoff_abs(sys);
    let w0 = sys.omega0;
    let denom = big_g * big_g + w0 * w0;
    let e = (-big_g * t).exp();
    let integral =
        g * big_g * big_g / sys.mass * (big_g - e * (big_g * (w0 * t).cos() - w0 * (w0 * t).sin()))
            / denom;
    g * big_g / sys.mass - integral
}

/// sin(x t) / x with the x -> 0 limit t.
fn sinct<R: Real>(x: R, t: R) -> R {
    let xt = x * t;
    if xt.abs() < R::of(1e-6) {
        t * (R::one() - xt * xt / R::of(6.0))
    } else {
        xt.sin() / x
    }
}

/// (1 - cos(x t)) / x with the x -> 0 limit 0.
fn cosct<R: Real>(x: R, t: R) -> R {
    let xt = x * t;
    if xt.abs() < R::of(1e-4) {
        x * t * t * R::half() * (R::one() - xt * xt / R::of(12.0))
    } else {
        (R::one() - xt.cos()) / x
    }
}

fn omega_max<R: Real>(t: R, bath: &BathSpec<R>, sys: &SystemSpec<R>, s: &QuadratureSettings<R>) -> R {
    s.omega_max_factor
        * bath
            .cutoff_abs(sys)
            .max(bath.thermal_energy(sys) / sys.hbar)
            .max(t.recip())
            .max(sys.omega0)
}

/// Momentum diffusion D_p(t) = int_0^t K(t') cos(omega0 t') dt' with the
/// order swapped: (hbar/pi) int J coth [sin((w-w0)t)/(w-w0) + sin((w+w0)t)/(w+w0)]/2 dw.
pub fn d_p<R: Real>(
    t: R,
    bath: &BathSpec<R>,
    sys: &SystemSpec<R>,
    settings: &QuadratureSettings<R>,
) -> Result<R> {
    if t < R::zero() {
        return Err(Error::InvalidSpec("d_p needs t >= 0".into()));
    }
    if t == R::zero() {
        return Ok(R::zero());
    }
    let w0 = sys.omega0;
    let a = omega_max(t, bath, sys, settings);
    let finite = quad::quad_semi_infinite(
        &|w: R| {
            let c = R::half() * (sinct(w - w0, t) + sinct(w + w0, t));
            [thermal_weight_abs(w, bath, sys) * c]
        },
        a,
        Some(t),
        settings,
    )?[0];
    // Tail of J coth ~ c1/omega for omega >> max(Gamma, kT/hbar), split by
    // partial fractions 1/(w(w - sgn w0)).
    let c1 = bath.gamma_abs(sys) * bath.cutoff_abs(sys) * bath.cutoff_abs(sys);
    let (si_a, ci_a) = sici(a * t);
    let mut tail = R::zero();
    for sgn in [R::one(), -R::one()] {
        let b = a - sgn * w0;
        let (si_b, _) = sici(b * t);
        let i1 = R::FRAC_PI_2() - si_b;
        let i2 = (sgn * w0 * t).cos() * (R::FRAC_PI_2() - si_a) + (sgn * w0 * t).sin() * ci_a;
        tail += c1 * R::half() * (i1 - i2) / (sgn * w0);
    }
    Ok(sys.hbar * (finite + tail) / R::PI())
}

/// Anomalous diffusion D_qp(t) = (1/m omega0) int_0^t K(t') sin(omega0 t') dt',
/// order-swapped like [`d_p`].
pub fn d_qp<R: Real>(
    t: R,
    bath: &BathSpec<R>,
    sys: &SystemSpec<R>,
    settings: &QuadratureSettings<R>,
) -> Result<R> {
    if t < R::zero() {
        return Err(Error::InvalidSpec("d_qp needs t >= 0".into()));
    }
    if t == R::zero() {
        return Ok(R::zero());
    }
    let w0 = sys.omega0;
    let a = omega_max(t, bath, sys, settings);
    let finite = quad::quad_semi_infinite(
        &|w: R| {
            let s = R::half() * (cosct(w0 + w, t) + cosct(w0 - w, t));
            [thermal_weight_abs(w, bath, sys) * s]
        },
        a,
        Some(t),
        settings,
    )?[0];
    let c1 = bath.gamma_abs(sys) * bath.cutoff_abs(sys) * bath.cutoff_abs(sys);
    let (si_a, ci_a) = sici(a * t);
    let (_, ci_ap) = sici((a + w0) * t);
    let (_, ci_am) = sici((a - w0) * t);
    let cw = (w0 * t).cos();
    let sw = (w0 * t).sin();
    let t_plus = ((R::one() + w0 / a).ln() + cw * ci_a + sw * (R::FRAC_PI_2() - si_a) - ci_ap) / w0;
    let t_minus = ((a / (a - w0)).ln() + ci_am - cw * ci_a + sw * (R::FRAC_PI_2() - si_a)) / w0;
    let tail = c1 * R::half() * (t_plus - t_minus);
    Ok(sys.hbar * (finite + tail) / (R::PI() * sys.mass * w0))
}

/// Nested-quadrature oracle for [`d_p`]: outer t'-integral over the
/// numerically evaluated K(t'). Test oracle only — panics if the inner
/// kernel quadrature fails. Natural-units system assumed (hbar = m = omega0 = 1).
pub fn d_p_nested<R: Real>(t: R, bath: &BathSpec<R>, settings: &QuadratureSettings<R>) -> Result<R> {
    quad::integrate(
        &|s: R| kernels::kernel_k(s, bath, settings).expect("inner K quadrature") * s.cos(),
        R::zero(),
        t,
        settings,
    )
}

/// Nested-quadrature oracle for [`d_qp`]; see [`d_p_nested`].
pub fn d_qp_nested<R: Real>(
    t: R,
    bath: &BathSpec<R>,
    settings: &QuadratureSettings<R>,
) -> Result<R> {
    quad::integrate(
        &|s: R| kernels::kernel_k(s, bath, settings).expect("inner K quadrature") * s.sin(),
        R::zero(),
        t,
        settings,
    )
}

/// Secular rates of Eqs. (26)-(27): (gamma_down, gamma_up) =
/// (D_p/(hbar m omega0) +/- gamma_p/2). A negative rate marks non-Lindblad
/// dynamics.
pub fn secular_rates<R: Real>(
    t: R,
    bath: &BathSpec<R>,
    sys: &SystemSpec<R>,
    settings: &QuadratureSettings<R>,
) -> Result<(R, R)> {
    let dp = d_p(t, bath, sys, settings)?;
    let gp = gamma_p(t, bath, sys);
    let base = dp / (sys.hbar * sys.mass * sys.omega0);
    Ok((base + gp * R::half(), base - gp * R::half()))
}

/// All coefficients at one time.
pub fn coefficients<R: Real>(
    t: R,
    bath: &BathSpec<R>,
    sys: &SystemSpec<R>,
    settings: &QuadratureSettings<R>,
) -> Result<HpzCoefficients<R>> {
    let gp = gamma_p(t, bath, sys);
    let dp = d_p(t, bath, sys, settings)?;
    let base = dp / (sys.hbar * sys.mass * sys.omega0);
    Ok(HpzCoefficients {
        t,
        gamma_p: gp,
        delta_omega2: delta_omega2(t, bath, sys),
        d_qp: d_qp(t, bath, sys, settings)?,
        d_p: dp,
        gamma_down: base + gp * R::half(),
        gamma_up: base - gp * R::half(),
    })
}

fn cumulative_trapezoid<R: Real>(t: &[R], y: &[R]) -> Vec<R> {
    let mut out = Vec::with_capacity(t.len());
    let mut acc = R::zero();
    out.push(acc);
    for i in 1..t.len() {
        acc += (t[i] - t[i - 1]) * (y[i] + y[i - 1]) * R::half();
        out.push(acc);
    }
    out
}

/// Gamma_p(t) = int_0^t gamma_p and Delta_p(t) = (2 e^(-Gamma_p(t)) / hbar m omega0)
/// int_0^t e^(Gamma_p(s)) D_p(s) ds on the supplied grid, cumulative
/// trapezoid, with a halved-grid self-check.
pub fn integrated_rates<R: Real>(
    t_grid: &[R],
    bath: &BathSpec<R>,
    sys: &SystemSpec<R>,
    settings: &QuadratureSettings<R>,
) -> Result<IntegratedRates<R>> {
    if t_grid.len() < 2 || t_grid[0] != R::zero() {
        return Err(Error::InvalidSpec("integrated_rates needs a grid starting at 0".into()));
    }
    for w in t_grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidSpec("integrated_rates needs a strictly increasing grid".into()));
        }
    }
    let gp: Vec<R> = t_grid.iter().map(|&t| gamma_p(t, bath, sys)).collect();
    let dp = t_grid
        .iter()
        .map(|&t| d_p(t, bath, sys, settings))
        .collect::<Result<Vec<R>>>()?;
    let big_gamma_p = cumulative_trapezoid(t_grid, &gp);
    let weighted: Vec<R> = big_gamma_p
        .iter()
        .zip(&dp)
        .map(|(&g, &d)| g.exp() * d)
        .collect();
    let inner = cumulative_trapezoid(t_grid, &weighted);
    let scale = R::two() / (sys.hbar * sys.mass * sys.omega0);
    let delta_p: Vec<R> = big_gamma_p
        .iter()
        .zip(&inner)
        .map(|(&g, &i)| scale * (-g).exp() * i)
        .collect();

    // Self-check: redo the end-point integrals on the grid thinned by two.
    let idx: Vec<usize> = (0..t_grid.len())
        .step_by(2)
        .chain(std::iter::once(t_grid.len() - 1))
        .collect();
    let pick = |v: &[R]| -> Vec<R> { idx.iter().map(|&i| v[i]).collect() };
    let tc = pick(t_grid);
    let gpc = cumulative_trapezoid(&tc, &pick(&gp));
    let wc: Vec<R> = gpc.iter().zip(pick(&dp)).map(|(&g, d)| g.exp() * d).collect();
    let innerc = cumulative_trapezoid(&tc, &wc);
    let tol = R::of(1e-3);
    let last = t_grid.len() - 1;
    let gref = big_gamma_p[last].abs().max(R::of(1e-300));
    if (gpc[idx.len() - 1] - big_gamma_p[last]).abs() / gref > tol {
        return Err(Error::GridTooCoarse {
            quantity: "big_gamma_p",
            rel_change: ((gpc[idx.len() - 1] - big_gamma_p[last]).abs() / gref).as_f64(),
        });
    }
    let dref = inner[last].abs().max(R::of(1e-300));
    if (innerc[idx.len() - 1] - inner[last]).abs() / dref > tol {
        return Err(Error::GridTooCoarse {
            quantity: "delta_p",
            rel_change: ((innerc[idx.len() - 1] - inner[last]).abs() / dref).as_f64(),
        });
    }
    Ok(IntegratedRates { t: t_grid.to_vec(), big_gamma_p, delta_p })
}

/// Dense uniform-grid series of all coefficients with cubic Hermite
/// interpolation between nodes; immutable and shareable once built.
#[derive(Debug, Clone)]
pub struct CoefficientSeries<R> {
    pub t: Vec<R>,
    pub samples: Vec<HpzCoefficients<R>>,
    pub big_gamma_p: Vec<R>,
    pub delta_p: Vec<R>,
    dt: R,
}

impl<R: Real> CoefficientSeries<R> {
    pub fn compute(
        bath: &BathSpec<R>,
        sys: &SystemSpec<R>,
        t_max: R,
        n_points: usize,
        settings: &QuadratureSettings<R>,
    ) -> Result<Self> {
        if n_points < 4 || !(t_max > R::zero()) {
            return Err(Error::InvalidSpec("coefficient series needs t_max > 0 and >= 4 points".into()));
        }
        let dt = t_max / R::of((n_points - 1) as f64);
        let t: Vec<R> = (0..n_points).map(|i| dt * R::of(i as f64)).collect();
        let samples = t
            .iter()
            .map(|&ti| coefficients(ti, bath, sys, settings))
            .collect::<Result<Vec<_>>>()?;
        let rates = integrated_rates(&t, bath, sys, settings)?;
        Ok(Self { t, samples, big_gamma_p: rates.big_gamma_p, delta_p: rates.delta_p, dt })
    }

    fn hermite(&self, field: impl Fn(&HpzCoefficients<R>) -> R, t: R) -> R {
        let n = self.samples.len();
        let pos = (t / self.dt).max(R::zero());
        let i = (pos.floor().as_f64() as usize).min(n - 2);
        let u = pos - R::of(i as f64);
        let y0 = field(&self.samples[i]);
        let y1 = field(&self.samples[i + 1]);
        // Central-difference slopes (one-sided at the ends), in units of dt.
        let slope = |j: usize| -> R {
            if j == 0 {
                field(&self.samples[1]) - field(&self.samples[0])
            } else if j == n - 1 {
                field(&self.samples[n - 1]) - field(&self.samples[n - 2])
            } else {
                (field(&self.samples[j + 1]) - field(&self.samples[j - 1])) * R::half()
            }
        };
        let m0 = slope(i);
        let m1 = slope(i + 1);
        let u2 = u * u;
        let u3 = u2 * u;
        let three = R::of(3.0);
        (R::two() * u3 - three * u2 + R::one()) * y0
            + (u3 - R::two() * u2 + u) * m0
            + (three * u2 - R::two() * u3) * y1
            + (u3 - u2) * m1
    }

    /// Interpolated coefficients at any t inside the grid.
    pub fn sample(&self, t: R) -> Result<HpzCoefficients<R>> {
        let t_max = *self.t.last().unwrap();
        if t < R::zero() || t > t_max * (R::one() + R::of(1e-12)) {
            return Err(Error::GridMismatch(format!(
                "sample time {t} outside series range [0, {t_max}]"
            )));
        }
        Ok(HpzCoefficients {
            t,
            gamma_p: self.hermite(|c| c.gamma_p, t),
            delta_omega2: self.hermite(|c| c.delta_omega2, t),
            d_qp: self.hermite(|c| c.d_qp, t),
            d_p: self.hermite(|c| c.d_p, t),
            gamma_down: self.hermite(|c| c.gamma_down, t),
            gamma_up: self.hermite(|c| c.gamma_up, t),
        })
    }

    /// True if either secular rate goes negative anywhere on the grid.
    pub fn non_lindblad(&self) -> bool {
        self.samples
            .iter()
            .any(|c| c.gamma_down < R::zero() || c.gamma_up < R::zero())
    }

    /// CSV trace with the full column set.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("t,gamma_p,delta_omega2,d_qp,d_p,gamma_down,gamma_up,big_gamma_p,delta_p\n");
        for (i, c) in self.samples.iter().enumerate() {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                c.t,
                c.gamma_p,
                c.delta_omega2,
                c.d_qp,
                c.d_p,
                c.gamma_down,
                c.gamma_up,
                self.big_gamma_p[i],
                self.delta_p[i],
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn natural() -> SystemSpec<f64> {
        SystemSpec::default()
    }

    fn bath(gamma: f64, cutoff: f64, kt: f64) -> BathSpec<f64> {
        BathSpec::new(gamma, cutoff, kt).unwrap()
    }

    fn settings() -> QuadratureSettings<f64> {
        QuadratureSettings::default()
    }

    #[test]
    fn gamma_p_arrow_and_zero() {
        let b = bath(1e-5, 10.0, 0.0);
        let sys = natural();
        assert_eq!(gamma_p(0.0, &b, &sys), 0.0);
        let v = gamma_p(20.0 / 10.0, &b, &sys);
        assert_relative_eq!(v, 1e-5 * 100.0 / 101.0, max_relative = 0.01);
    }

    #[test]
    fn gamma_p_matches_quadrature_of_kernel_l() {
        let b = bath(1e-3, 2.0, 0.0);
        let sys = natural();
        let s = settings();
        for t in [0.3, 1.0, 4.0] {
            let q = 2.0
                * quad::integrate(&|u: f64| kernels::kernel_l(u, &b) * u.sin(), 0.0, t, &s)
                    .unwrap();
            assert_relative_eq!(gamma_p(t, &b, &sys), q, max_relative = 1e-10);
        }
    }

    #[test]
    fn gamma_p_oscillates_at_small_cutoff() {
        let b = bath(0.05, 0.01, 0.0);
        let sys = natural();
        // gamma_p stays non-negative for this kernel, so oscillation shows up
        // as repeated crossings of the long-time asymptote.
        let asym = 0.05 * 1e-4 / (1.0 + 1e-4);
        let mut signs = 0;
        let mut prev = gamma_p(0.5, &b, &sys) - asym;
        for k in 2..200 {
            let v = gamma_p(0.5 * k as f64, &b, &sys) - asym;
            if v.signum() != prev.signum() {
                signs += 1;
            }
            prev = v;
        }
        assert!(signs >= 4, "expected oscillatory transient, saw {signs} crossings");
        // Settles near (gamma/m) * Gamma^2/(1+Gamma^2) ~ gamma * 1e-4.
        let late = gamma_p(20.0 / 0.01, &b, &sys);
        assert_relative_eq!(late, 0.05 * 1e-4 / (1.0 + 1e-4), max_relative = 0.01);
    }

    #[test]
    fn delta_omega2_landmarks() {
        let b = bath(1e-5, 10.0, 0.0);
        let sys = natural();
        assert_relative_eq!(delta_omega2(0.0, &b, &sys), 1e-5 * 10.0, max_relative = 1e-12);
        let v = delta_omega2(2.0, &b, &sys);
        assert_relative_eq!(v, 1e-4 * (1.0 - 100.0 / 101.0), max_relative = 0.01);
        let quad_check = 1e-4
            - 2.0 * quad::integrate(
                &|u: f64| kernels::kernel_l(u, &b) * u.cos(),
                0.0,
                1.5,
                &settings(),
            )
            .unwrap();
        assert_relative_eq!(delta_omega2(1.5, &b, &sys), quad_check, max_relative = 1e-8);
    }

    #[test]
    fn d_p_zero_and_stationary_arrow() {
        let sys = natural();
        let s = settings();
        let b = bath(1e-5, 10.0, 10.0);
        assert_eq!(d_p(0.0, &b, &sys, &s).unwrap(), 0.0);
        let v = d_p(2.0, &b, &sys, &s).unwrap();
        let j = kernels::spectral_density(1.0, &b);
        let arrow = 0.5 * j / (0.05f64).tanh();
        assert_relative_eq!(v, arrow, max_relative = 0.01);
    }

    #[test]
    fn d_p_high_temperature_limit() {
        // gamma << m omega0, Gamma >> omega0, kT >> hbar omega0: D_p -> gamma kT.
        let b = bath(1e-5, 100.0, 50.0);
        let v = d_p(0.2, &b, &natural(), &settings()).unwrap();
        assert_relative_eq!(v, 1e-5 * 50.0, max_relative = 0.03);
    }

    #[test]
    fn d_p_consistent_with_stationary_momentum() {
        // D_p(infty) ~ gamma_p(infty) <p^2(infty)> (Eq. 18 arrow).
        let b = bath(0.05, 10.0, 10.0);
        let sys = natural();
        let s = settings();
        let green = crate::langevin::GreenFunction::new(&b, &sys).unwrap();
        let noise = crate::langevin::noise_integrals(200.0, &green, &b, &sys, &s).unwrap();
        let m = crate::langevin::moments(200.0, &sys, &green, noise);
        let dp = d_p(5.0, &b, &sys, &s).unwrap();
        assert_relative_eq!(dp, gamma_p(5.0, &b, &sys) * m.p2, max_relative = 0.02);
    }

    #[test]
    fn d_qp_stationary_matches_principal_value_oracle() {
        // PV oracle: D_qp(infty) = (hbar / pi m) P int J coth / (omega0^2 - omega^2) domega.
        let b = bath(0.05, 10.0, 10.0);
        let sys = natural();
        let s = settings();
        let w0 = 1.0f64;
        let h = |w: f64| {
            kernels::spectral_density(w, &b) / ((w / (2.0 * b.temperature)).tanh()) / (w0 + w)
        };
        // Symmetric pairing around the pole on [0, 2 w0], regular beyond.
        let paired = quad::integrate(
            &|u: f64| (h(w0 - u) - h(w0 + u)) / u.max(1e-300),
            0.0,
            w0,
            &s,
        )
        .unwrap();
        // Beyond 2 w0 the integrand is regular; truncation at 5000 leaves
        // ~ gamma Gamma^2 / (2 * 5000^2), far below the test tolerance.
        let outer = quad::integrate(
            &|x: f64| {
                let w = 2.0 * w0 + x;
                let j = kernels::spectral_density(w, &b) / ((w / (2.0 * b.temperature)).tanh());
                j / (w0 * w0 - w * w)
            },
            0.0,
            5000.0,
            &s,
        )
        .unwrap();
        let pv = (paired + outer) / std::f64::consts::PI;
        let v = d_qp(5.0, &b, &sys, &s).unwrap();
        assert_relative_eq!(v, pv, max_relative = 1e-3);
    }

    #[test]
    fn swapped_and_nested_quadratures_agree() {
        let s = settings();
        let sys = natural();
        // Finite temperature, moderate cutoff.
        let b1 = bath(1e-5, 10.0, 10.0);
        for k in 1..=20 {
            let t = 0.1 * k as f64;
            let nested = d_p_nested(t, &b1, &s).unwrap();
            let swapped = d_p(t, &b1, &sys, &s).unwrap();
            assert_relative_eq!(swapped, nested, max_relative = 1e-6);
        }
        // Zero temperature, sub-resonant cutoff (integrable log at t' = 0).
        let b2 = bath(1e-3, 0.5, 0.0);
        for t in [0.5, 2.0, 6.0] {
            assert_relative_eq!(
                d_qp(t, &b2, &sys, &s).unwrap(),
                d_qp_nested(t, &b2, &s).unwrap(),
                max_relative = 1e-6
            );
            assert_relative_eq!(
                d_p(t, &b2, &sys, &s).unwrap(),
                d_p_nested(t, &b2, &s).unwrap(),
                max_relative = 1e-6
            );
        }
    }

    #[test]
    fn secular_identity_and_limits() {
        let sys = natural();
        let s = settings();
        let b = bath(1e-5, 10.0, 10.0);
        for k in 1..=10 {
            let t = 0.3 * k as f64;
            let (down, up) = secular_rates(t, &b, &sys, &s).unwrap();
            let gp = gamma_p(t, &b, &sys);
            assert!(((down - up) - gp).abs() <= 1e-12 * down.abs().max(1.0));
        }
        // High-T stationary ratio -> (nbar + 1)/nbar.
        let (down, up) = secular_rates(3.0, &b, &sys, &s).unwrap();
        let nbar = 1.0 / ((0.1f64).exp() - 1.0);
        assert_relative_eq!(down / up, (nbar + 1.0) / nbar, max_relative = 0.02);
        // T = 0 stationary: gamma_up -> 0.
        let b0 = bath(1e-5, 10.0, 0.0);
        let (down0, up0) = secular_rates(3.0, &b0, &sys, &s).unwrap();
        assert!(up0.abs() < 0.02 * down0);
    }

    #[test]
    fn non_lindblad_window_at_small_cutoff() {
        let b = bath(0.05, 0.01, 10.0);
        let sys = natural();
        let s = settings();
        let negative = (1..=40)
            .map(|k| 0.5 * k as f64)
            .any(|t| secular_rates(t, &b, &sys, &s).unwrap().0 < 0.0);
        assert!(negative, "expected gamma_down < 0 somewhere for Gamma = 0.01");
    }

    #[test]
    fn integrated_rates_markovian_limit() {
        let b = bath(1e-3, 100.0, 50.0);
        let sys = natural();
        let s = settings();
        let n = 801;
        let grid: Vec<f64> = (0..n).map(|i| 20.0 * i as f64 / (n - 1) as f64).collect();
        let r = integrated_rates(&grid, &b, &sys, &s).unwrap();
        assert_eq!(r.big_gamma_p[0], 0.0);
        assert_eq!(r.delta_p[0], 0.0);
        let c = gamma_p(20.0, &b, &sys);
        let d = d_p(20.0, &b, &sys, &s).unwrap();
        assert_relative_eq!(r.big_gamma_p[n - 1], c * 20.0, max_relative = 0.02);
        let delta_ref = 2.0 * d / c * (1.0 - (-c * 20.0f64).exp());
        assert_relative_eq!(r.delta_p[n - 1], delta_ref, max_relative = 0.02);
        // Gamma_p nondecreasing when gamma_p >= 0 throughout.
        for w in r.big_gamma_p.windows(2) {
            assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn integrated_rates_rejects_coarse_grid() {
        // gamma_p oscillates with period ~2 pi here; a 5-point grid over
        // [0, 20] cannot resolve it and the halving check must fire.
        let b = bath(0.05, 0.01, 10.0);
        let grid = [0.0, 5.0, 10.0, 15.0, 20.0];
        let err = integrated_rates(&grid, &b, &natural(), &settings());
        assert!(matches!(err, Err(Error::GridTooCoarse { .. })), "got {err:?}");
        // Bad grids are rejected up front.
        assert!(integrated_rates(&[0.5, 1.0], &b, &natural(), &settings()).is_err());
        assert!(integrated_rates(&[0.0, 1.0, 1.0], &b, &natural(), &settings()).is_err());
    }

    #[test]
    fn series_interpolation_and_csv() {
        let b = bath(1e-5, 10.0, 10.0);
        let sys = natural();
        let s = settings();
        let series = CoefficientSeries::compute(&b, &sys, 2.0, 161, &s).unwrap();
        // Node values are reproduced exactly.
        let at_node = series.sample(series.t[40]).unwrap();
        assert_relative_eq!(at_node.d_p, series.samples[40].d_p, max_relative = 1e-14);
        // Midpoints agree with direct evaluation.
        let mid = series.sample(1.00625).unwrap();
        let direct = coefficients(1.00625, &b, &sys, &s).unwrap();
        assert_relative_eq!(mid.d_p, direct.d_p, max_relative = 1e-5);
        assert_relative_eq!(mid.gamma_p, direct.gamma_p, max_relative = 1e-5);
        assert!(!series.non_lindblad());
        assert!(series.sample(2.5).is_err());
        let csv = series.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,gamma_p,delta_omega2,d_qp,d_p,gamma_down,gamma_up,big_gamma_p,delta_p"
        );
        assert_eq!(lines.count(), 161);
    }

    #[test]
    fn coefficients_converge_for_fig3a() {
        let b = bath(1e-5, 100.0, 10.0);
        let sys = natural();
        let s = settings();
        let c20 = coefficients(20.0 / 100.0, &b, &sys, &s).unwrap();
        let cinf = coefficients(60.0 / 100.0, &b, &sys, &s).unwrap();
        assert_relative_eq!(c20.gamma_p, cinf.gamma_p, max_relative = 0.01);
        assert_relative_eq!(c20.delta_omega2, cinf.delta_omega2, max_relative = 0.01);
        assert_relative_eq!(c20.d_p, cinf.d_p, max_relative = 0.01);
        assert_relative_eq!(c20.d_qp, cinf.d_qp, max_relative = 0.01);
    }

    #[test]
    fn gamma_q_accessor() {
        let b = bath(1e-5, 10.0, 0.0);
        let sys = natural();
        let c = coefficients(2.0, &b, &sys, &settings()).unwrap();
        let expected = 1.0 + c.delta_omega2 - 1e-4;
        assert_relative_eq!(c.gamma_q(&b, &sys), expected, max_relative = 1e-12);
    }
}
