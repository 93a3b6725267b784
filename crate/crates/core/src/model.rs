//! Parameter types, unit conventions and the four-regime taxonomy.
//!
//! Units: everything is expressed in the paper's dimensionless ratios.
//! `BathSpec` stores gamma/(m omega0), Gamma/omega0 and kT/(hbar omega0);
//! `SystemSpec` carries the absolute constants (natural units hbar = m =
//! omega0 = 1 by default) and converts the ratios to absolute quantities.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Drude bath parameters as dimensionless ratios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec<R> {
    /// Damping strength gamma in units of m*omega0.
    pub gamma: R,
    /// Drude cutoff Gamma in units of omega0.
    pub cutoff: R,
    /// kT in units of hbar*omega0; exactly 0 selects the zero-temperature
    /// branch (coth -> 1, beta*hbar -> infinity).
    pub temperature: R,
}

impl<R: Real> BathSpec<R> {
    pub fn new(gamma: R, cutoff: R, temperature: R) -> Result<Self> {
        if !(gamma > R::zero()) || !gamma.is_finite() {
            return Err(Error::InvalidSpec(format!("bath.gamma must be > 0, got {gamma}")));
        }
        if !(cutoff > R::zero()) || !cutoff.is_finite() {
            return Err(Error::InvalidSpec(format!("bath.cutoff must be > 0, got {cutoff}")));
        }
        if !(temperature >= R::zero()) || !temperature.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "bath.temperature must be >= 0, got {temperature}"
            )));
        }
        Ok(Self { gamma, cutoff, temperature })
    }

    /// Absolute damping strength gamma (units of mass * frequency).
    pub fn gamma_abs(&self, sys: &SystemSpec<R>) -> R {
        self.gamma * sys.mass * sys.omega0
    }

    /// Absolute cutoff frequency Gamma.
    pub fn cutoff_abs(&self, sys: &SystemSpec<R>) -> R {
        self.cutoff * sys.omega0
    }

    /// Absolute thermal energy kT.
    pub fn thermal_energy(&self, sys: &SystemSpec<R>) -> R {
        self.temperature * sys.hbar * sys.omega0
    }

    pub fn is_zero_temperature(&self) -> bool {
        self.temperature == R::zero()
    }
}

/// Brownian oscillator and initial wave-packet geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemSpec<R> {
    pub mass: R,
    /// Bare frequency omega0; sets the time unit.
    pub omega0: R,
    /// Initial minimum-uncertainty packet width sigma0.
    pub sigma0: R,
    /// Half-separation q0 of the superposed packets.
    pub q0: R,
    /// Momentum displacement p0.
    pub p0: R,
    pub hbar: R,
}

impl<R: Real> Default for SystemSpec<R> {
    /// Natural units with the coherent-state width sigma0^2 = hbar/(2 m omega0).
    fn default() -> Self {
        Self {
            mass: R::one(),
            omega0: R::one(),
            sigma0: R::half().sqrt(),
            q0: R::zero(),
            p0: R::zero(),
            hbar: R::one(),
        }
    }
}

impl<R: Real> SystemSpec<R> {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("mass", self.mass),
            ("omega0", self.omega0),
            ("sigma0", self.sigma0),
            ("hbar", self.hbar),
        ] {
            if !(v > R::zero()) || !v.is_finite() {
                return Err(Error::InvalidSpec(format!("system.{name} must be > 0, got {v}")));
            }
        }
        for (name, v) in [("q0", self.q0), ("p0", self.p0)] {
            if !(v >= R::zero()) || !v.is_finite() {
                return Err(Error::InvalidSpec(format!("system.{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Natural-unit system with a position cat of half-separation `q0`.
    pub fn with_q0(q0: R) -> Self {
        Self { q0, ..Self::default() }
    }

    /// Natural-unit system with displacement |alpha0| (q0 = 2 sigma0 |alpha0|, p0 = 0).
    pub fn with_alpha0(alpha0: R) -> Self {
        let base = Self::default();
        Self { q0: R::two() * base.sigma0 * alpha0, ..base }
    }

    /// Derived displacement |alpha0|^2 = q0^2/(4 sigma0^2) + sigma0^2 p0^2/hbar^2.
    pub fn alpha2(&self) -> R {
        let s2 = self.sigma0 * self.sigma0;
        self.q0 * self.q0 / (R::of(4.0) * s2) + s2 * self.p0 * self.p0 / (self.hbar * self.hbar)
    }

    /// True if sigma0 is the coherent-state width hbar/(2 m omega0) (to 1e-12).
    pub fn has_coherent_width(&self) -> bool {
        let target = (self.hbar / (R::two() * self.mass * self.omega0)).sqrt();
        (self.sigma0 - target).abs() <= R::of(1e-12) * target
    }
}

/// Characteristic time scales of Eqs. (22)-(24).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timescales<R> {
    pub tau_s: R,
    pub tau_gamma: R,
    pub tau_b: R,
    /// Filled in by the decoherence module when available.
    pub tau_d: Option<R>,
}

/// The four dynamical regimes distinguished by the time-scale ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    BornMarkovian,
    NonMarkovian,
    StrongCoupling,
    OutOfResonance,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::BornMarkovian => "born-markovian",
            Regime::NonMarkovian => "non-markovian",
            Regime::StrongCoupling => "strong-coupling",
            Regime::OutOfResonance => "out-of-resonance",
        };
        f.write_str(s)
    }
}

/// tau_s, tau_gamma, tau_b from the bath/system parameters.
pub fn timescales<R: Real>(bath: &BathSpec<R>, sys: &SystemSpec<R>) -> Result<Timescales<R>> {
    sys.validate()?;
    let w0 = sys.omega0;
    let w0sq = w0 * w0;
    let gamma = bath.gamma_abs(sys);
    let cutoff = bath.cutoff_abs(sys);
    let csq = cutoff * cutoff;
    let tau_s = (w0sq + gamma * cutoff / sys.mass * (R::one() - csq / (w0sq + csq)))
        .sqrt()
        .recip();
    let tau_gamma = sys.mass / gamma * (R::one() + w0sq / csq);
    let beta_hbar = if bath.is_zero_temperature() {
        R::infinity()
    } else {
        sys.hbar / bath.thermal_energy(sys)
    };
    // Tie broken toward the cutoff branch.
    let tau_b = if beta_hbar < cutoff.recip() { beta_hbar } else { cutoff.recip() };
    Ok(Timescales { tau_s, tau_gamma, tau_b, tau_d: None })
}

/// Threshold for "a much smaller than b": a <= b/5.
fn much_less<R: Real>(a: R, b: R) -> bool {
    a <= b / R::of(5.0)
}

/// Threshold for "a comparable to b": 1/5 < a/b < 5.
fn comparable<R: Real>(a: R, b: R) -> bool {
    let r = a / b;
    r > R::of(0.2) && r < R::of(5.0)
}

/// Classify the regime from the time scales alone.
///
/// The factor-5 bands make the paper's qualitative predicates overlap in a
/// thin sliver (tau_s < tau_b < 5 tau_s satisfies both Eq. 1 and Eq. 3), so
/// predicates are evaluated in a fixed precedence: non-Markovian,
/// out-of-resonance, Born-Markovian, strong-coupling. If nothing fires the
/// explicit `AmbiguousRegime` error is returned.
pub fn classify_regime<R: Real>(ts: &Timescales<R>) -> Result<Regime> {
    let Timescales { tau_s, tau_gamma, tau_b, .. } = *ts;
    if !(tau_s > R::zero() && tau_gamma > R::zero() && tau_b > R::zero()) {
        return Err(Error::InvalidSpec("time scales must be strictly positive".into()));
    }
    if comparable(tau_b, tau_s) && much_less(tau_s, tau_gamma) {
        return Ok(Regime::NonMarkovian);
    }
    if tau_s < tau_b && much_less(tau_b, tau_gamma) {
        return Ok(Regime::OutOfResonance);
    }
    if much_less(tau_b, tau_s) && much_less(tau_s, tau_gamma) {
        return Ok(Regime::BornMarkovian);
    }
    if much_less(tau_b, tau_s) && comparable(tau_s, tau_gamma) {
        return Ok(Regime::StrongCoupling);
    }
    Err(Error::AmbiguousRegime {
        tb_over_ts: (tau_b / tau_s).as_f64(),
        ts_over_tg: (tau_s / tau_gamma).as_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn ts(gamma: f64, cutoff: f64, temperature: f64) -> Timescales<f64> {
        let bath = BathSpec::new(gamma, cutoff, temperature).unwrap();
        timescales(&bath, &SystemSpec::default()).unwrap()
    }

    #[test]
    fn invariants_reject_bad_specs() {
        assert!(BathSpec::new(0.0, 1.0, 1.0).is_err());
        assert!(BathSpec::new(1e-3, -1.0, 1.0).is_err());
        assert!(BathSpec::new(1e-3, 1.0, -0.5).is_err());
        let mut sys = SystemSpec::<f64>::default();
        sys.sigma0 = 0.0;
        assert!(sys.validate().is_err());
    }

    #[test]
    fn tau_b_picks_cutoff_branch() {
        // Gamma = 10, kT >= 0.1 (so beta*hbar = 1/kT <= 10): cutoff branch
        // wins for kT <= 10, with the tie at kT = 10 broken toward 1/Gamma.
        for kt in [0.1, 1.0, 10.0] {
            assert_relative_eq!(ts(1e-5, 10.0, kt).tau_b, 0.1, max_relative = 1e-14);
        }
        assert_relative_eq!(ts(1e-5, 10.0, 100.0).tau_b, 0.01, max_relative = 1e-14);
        // T = 0: beta*hbar infinite, cutoff branch always.
        assert_relative_eq!(ts(1e-5, 10.0, 0.0).tau_b, 0.1, max_relative = 1e-14);
    }

    #[test]
    fn tau_s_approaches_inverse_omega0_for_weak_coupling() {
        let t = ts(1e-9, 10.0, 1.0);
        assert_relative_eq!(t.tau_s, 1.0, max_relative = 1e-6);
        // Spec property: gamma <= 1e-3, Gamma >= 10 keeps |tau_s - 1| <= 1e-3.
        for g in [1e-3, 1e-4] {
            for c in [10.0, 100.0] {
                assert!((ts(g, c, 1.0).tau_s - 1.0).abs() <= 1e-3);
            }
        }
    }

    #[test]
    fn tau_gamma_for_deep_sub_resonant_cutoff() {
        let t = ts(1e-3, 1e-3, 0.0);
        assert_relative_eq!(t.tau_gamma, 1e3 * (1.0 + 1e6), max_relative = 1e-12);
    }

    #[test]
    fn figure_classifications() {
        assert_eq!(classify_regime(&ts(1e-5, 100.0, 0.0)).unwrap(), Regime::BornMarkovian);
        assert_eq!(classify_regime(&ts(0.05, 0.01, 0.0)).unwrap(), Regime::OutOfResonance);
        assert_eq!(classify_regime(&ts(1e-5, 2.0, 0.0)).unwrap(), Regime::NonMarkovian);
    }

    #[test]
    fn ambiguous_is_explicit() {
        // tau_b comparable to tau_s but tau_gamma close too: nothing fires.
        let t = Timescales { tau_s: 1.0, tau_gamma: 2.0, tau_b: 1.0, tau_d: None };
        assert!(matches!(
            classify_regime(&t),
            Err(Error::AmbiguousRegime { .. })
        ));
    }

    #[test]
    fn strong_coupling_branch() {
        let t = Timescales { tau_s: 1.0, tau_gamma: 2.0, tau_b: 0.01, tau_d: None };
        assert_eq!(classify_regime(&t).unwrap(), Regime::StrongCoupling);
    }

    #[test]
    fn alpha2_derivation() {
        let sys = SystemSpec::<f64>::with_alpha0(30f64.sqrt());
        assert_relative_eq!(sys.alpha2(), 30.0, max_relative = 1e-12);
        assert!(sys.has_coherent_width());
    }

    proptest! {
        // Multiplying omega0 and Gamma by c and gamma by c (m fixed) divides
        // all three time scales by c. In ratio units gamma/(m omega0) and
        // Gamma/omega0 are then unchanged while omega0 -> c*omega0 and
        // kT/(hbar omega0) -> kT'/(hbar c omega0) must stay fixed too
        // (temperature scales with c).
        #[test]
        fn timescales_scale_covariant(
            gamma in 1e-6f64..1e-1,
            cutoff in 1e-3f64..1e3,
            kt in 0.0f64..100.0,
            c in 1e-3f64..1e3,
        ) {
            let bath = BathSpec::new(gamma, cutoff, kt).unwrap();
            let base = SystemSpec::<f64>::default();
            let scaled_sys = SystemSpec { omega0: c, ..base };
            let t1 = timescales(&bath, &base).unwrap();
            let t2 = timescales(&bath, &scaled_sys).unwrap();
            prop_assert!((t2.tau_s * c / t1.tau_s - 1.0).abs() < 1e-10);
            prop_assert!((t2.tau_gamma * c / t1.tau_gamma - 1.0).abs() < 1e-10);
            prop_assert!((t2.tau_b * c / t1.tau_b - 1.0).abs() < 1e-10);
        }

        // Classification only depends on ratios of time scales.
        #[test]
        fn classification_scale_invariant(
            ts_val in 1e-3f64..1e3,
            tb_rel in 1e-3f64..1e3,
            tg_rel in 1e-3f64..1e3,
            c in 1e-6f64..1e6,
        ) {
            let t1 = Timescales { tau_s: ts_val, tau_b: ts_val * tb_rel, tau_gamma: ts_val * tg_rel, tau_d: None };
            let t2 = Timescales {
                tau_s: t1.tau_s * c,
                tau_b: t1.tau_b * c,
                tau_gamma: t1.tau_gamma * c,
                tau_d: None,
            };
            match (classify_regime(&t1), classify_regime(&t2)) {
                (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
                (Err(_), Err(_)) => {}
                other => prop_assert!(false, "scale broke classification: {:?}", other),
            }
        }
    }
}
