//! Drude spectral density and the bath kernels L(t), K(t).
//!
//! This module works in natural units (hbar = m = omega0 = 1): the
//! `BathSpec` ratios are used directly as absolute quantities. Modules that
//! receive a `SystemSpec` apply hbar, m and omega0 explicitly.

use crate::error::{Error, Result};
use crate::model::BathSpec;
use crate::quad::{self, QuadratureSettings};
use crate::scalar::Real;
use crate::special::sici;

/// A sampled kernel value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSample<R> {
    pub t: R,
    pub value: R,
}

/// Drude spectral density J(omega) = gamma omega Gamma^2 / (omega^2 + Gamma^2).
pub fn spectral_density<R: Real>(omega: R, bath: &BathSpec<R>) -> R {
    let c2 = bath.cutoff * bath.cutoff;
    bath.gamma * omega * c2 / (omega * omega + c2)
}

/// J(omega) * coth(omega / 2 kT), with the finite omega -> 0 limit handled
/// analytically and coth -> 1 at T = 0.
pub(crate) fn thermal_spectral_weight<R: Real>(omega: R, bath: &BathSpec<R>) -> R {
    let j = spectral_density(omega, bath);
    if bath.is_zero_temperature() {
        return j;
    }
    let x = omega / (R::two() * bath.temperature);
    if x < R::of(1e-8) {
        // J ~ gamma*omega, coth ~ 1/x + x/3: finite limit 2*gamma*kT*Gamma^2/(omega^2+Gamma^2).
        let c2 = bath.cutoff * bath.cutoff;
        R::two() * bath.gamma * bath.temperature * c2 / (omega * omega + c2)
    } else {
        j / x.tanh()
    }
}

/// Dissipation kernel L(t) = (hbar/pi) int J(omega) sin(omega t) domega,
/// exact for the Drude density: (gamma Gamma^2 / 2) e^(-Gamma t) (hbar = 1).
pub fn kernel_l<R: Real>(t: R, bath: &BathSpec<R>) -> R {
    debug_assert!(t >= R::zero());
    bath.gamma * bath.cutoff * bath.cutoff * R::half() * (-bath.cutoff * t).exp()
}

/// Quadrature evaluation of Eq. (20); test oracle for [`kernel_l`].
///
/// Finite integral to omega_max plus the analytic sin tail of the
/// 1/omega expansion J = c1/omega + c3/omega^3 + ...
pub fn kernel_l_quadrature<R: Real>(
    t: R,
    bath: &BathSpec<R>,
    settings: &QuadratureSettings<R>,
) -> Result<R> {
    if t <= R::zero() {
        return Err(Error::InvalidSpec("kernel_l_quadrature needs t > 0".into()));
    }
    let a = settings.omega_max_factor * bath.cutoff.max(t.recip()).max(R::one());
    let finite = quad::quad_semi_infinite(
        &|w: R| [spectral_density(w, bath) * (w * t).sin()],
        a,
        Some(t),
        settings,
    )?[0];
    let c1 = bath.gamma * bath.cutoff * bath.cutoff;
    let c3 = -c1 * bath.cutoff * bath.cutoff;
    let (si_a, _) = sici(a * t);
    let at = a * t;
    // int_A^inf sin(wt)/w dw and int_A^inf sin(wt)/w^3 dw.
    let i1 = R::FRAC_PI_2() - si_a;
    let i3 = at.sin() / (R::two() * a * a)
        + t * R::half() * (at.cos() / a - t * (R::FRAC_PI_2() - si_a));
    Ok((finite + c1 * i1 + c3 * i3) / R::PI())
}

/// Noise kernel K(t) = (hbar/pi) int J(omega) coth(omega/2kT) cos(omega t) domega.
///
/// The t = 0 point carries a logarithmic UV divergence at every temperature
/// (coth -> 1 for omega >> kT, so the integrand falls off only as 1/omega)
/// and is reported as `DivergentAtZero`.
pub fn kernel_k<R: Real>(
    t: R,
    bath: &BathSpec<R>,
    settings: &QuadratureSettings<R>,
) -> Result<R> {
    if t < R::zero() {
        return Err(Error::InvalidSpec("kernel_k needs t >= 0".into()));
    }
    if t == R::zero() {
        return Err(Error::DivergentAtZero);
    }
    let a = settings.omega_max_factor
        * bath
            .cutoff
            .max(bath.temperature)
            .max(t.recip())
            .max(R::one());
    let finite = quad::quad_semi_infinite(
        &|w: R| [thermal_spectral_weight(w, bath) * (w * t).cos()],
        a,
        Some(t),
        settings,
    )?[0];
    // Tail with coth ~ 1 (error O(e^(-A/kT)), negligible for A >= 50 kT):
    // J = c1/omega + c3/omega^3 + O(omega^-5).
    let c1 = bath.gamma * bath.cutoff * bath.cutoff;
    let c3 = -c1 * bath.cutoff * bath.cutoff;
    let (si_a, ci_a) = sici(a * t);
    let _ = si_a;
    let at = a * t;
    // int_A^inf cos(wt)/w dw = -Ci(At);
    // int_A^inf cos(wt)/w^3 dw = cos(At)/(2A^2) - (t/2)(sin(At)/A - t Ci(At)).
    let i1 = -ci_a;
    let i3 = at.cos() / (R::two() * a * a)
        - t * R::half() * (at.sin() / a - t * ci_a);
    Ok((finite + c1 * i1 + c3 * i3) / R::PI())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn bath(gamma: f64, cutoff: f64, kt: f64) -> BathSpec<f64> {
        BathSpec::new(gamma, cutoff, kt).unwrap()
    }

    fn settings() -> QuadratureSettings<f64> {
        QuadratureSettings::default()
    }

    #[test]
    fn spectral_density_landmarks() {
        let b = bath(2.0, 3.0, 1.0);
        assert_eq!(spectral_density(0.0, &b), 0.0);
        // omega = Gamma: gamma*Gamma/2.
        assert_relative_eq!(spectral_density(3.0, &b), 3.0, max_relative = 1e-14);
        // omega -> inf: gamma*Gamma^2/omega.
        assert_relative_eq!(spectral_density(1e8, &b), 18.0 / 1e8, max_relative = 1e-6);
    }

    #[test]
    fn kernel_l_closed_form_values() {
        let b = bath(1e-3, 10.0, 0.0);
        assert_relative_eq!(kernel_l(0.0, &b), 0.05, max_relative = 1e-14);
        assert_relative_eq!(kernel_l(0.1, &b), 0.05 * (-1.0f64).exp(), max_relative = 1e-14);
    }

    #[test]
    fn kernel_l_matches_quadrature() {
        let b = bath(1e-3, 10.0, 5.0);
        let s = settings();
        for t_scaled in [0.1, 1.0, 5.0] {
            let t = t_scaled / b.cutoff;
            let q = kernel_l_quadrature(t, &b, &s).unwrap();
            // Spec property: agreement to rel_tol * 10.
            assert_relative_eq!(kernel_l(t, &b), q, max_relative = 1e-7);
        }
    }

    #[test]
    fn kernel_k_divergent_at_zero_for_every_temperature() {
        for kt in [0.0, 1.0, 50.0] {
            let b = bath(1e-3, 10.0, kt);
            assert_eq!(kernel_k(0.0, &b, &settings()), Err(Error::DivergentAtZero));
        }
    }

    #[test]
    fn high_temperature_fluctuation_dissipation() {
        // K(t) ~ kT gamma Gamma e^(-Gamma t) for kT >> hbar omega0.
        let b = bath(1e-3, 10.0, 50.0);
        let s = settings();
        for k in 1..=10 {
            let t = 0.5 * k as f64 / b.cutoff;
            let k_val = kernel_k(t, &b, &s).unwrap();
            let fdt = b.temperature * b.gamma * b.cutoff * (-b.cutoff * t).exp();
            assert_relative_eq!(k_val, fdt, max_relative = 0.02);
        }
    }

    #[test]
    fn kernel_k_monotone_decreasing_on_initial_interval() {
        let b = bath(1e-3, 10.0, 5.0);
        let s = settings();
        let mut prev = f64::INFINITY;
        for k in 1..=30 {
            let t = 0.1 * k as f64 / b.cutoff; // up to 3/Gamma
            let v = kernel_k(t, &b, &s).unwrap();
            assert!(v < prev, "K not decreasing at t = {t}");
            prev = v;
        }
    }

    #[test]
    fn kernel_k_monotone_in_temperature() {
        let s = settings();
        for t in [0.05, 0.2, 1.0] {
            let mut prev = -f64::INFINITY;
            for kt in [0.0, 0.5, 2.0, 10.0] {
                let v = kernel_k(t, &bath(1e-3, 10.0, kt), &s).unwrap();
                assert!(v >= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn decoupled_bath_is_silent() {
        // gamma -> 0 limit proxied by the smallest admissible coupling.
        let b = bath(1e-300, 5.0, 1.0);
        assert!(kernel_l(1.0, &b).abs() < 1e-290);
        let v = kernel_k(1.0, &b, &settings()).unwrap();
        assert!(v.abs() < 1e-290);
    }
}
