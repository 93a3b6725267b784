//! Sine and cosine integrals, needed for the analytic 1/omega tails of the
//! semi-infinite kernel quadratures.
//!
//! Si(x) = int_0^x sin(u)/u du,  Ci(x) = gamma + ln x + int_0^x (cos u - 1)/u du.

use num_complex::Complex;

use crate::scalar::Real;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Si(x) and Ci(x) for x >= 0; Ci(0) is -infinity.
///
/// Power series below x = 2, otherwise the exponential-integral continued
/// fraction E1(ix) evaluated by the modified Lentz algorithm, using
/// Ci(x) = -Re E1(ix) and Si(x) = pi/2 + Im E1(ix).
pub fn sici<R: Real>(x: R) -> (R, R) {
    assert!(x >= R::zero(), "sici requires x >= 0");
    if x == R::zero() {
        return (R::zero(), R::neg_infinity());
    }
    if x <= R::two() {
        sici_series(x)
    } else {
        sici_cf(x)
    }
}

fn sici_series<R: Real>(x: R) -> (R, R) {
    let x2 = x * x;
    // Si: sum (-1)^k x^(2k+1) / ((2k+1)(2k+1)!)
    let mut si = x;
    let mut term = x;
    let mut k = 1u32;
    loop {
        let two_k = R::of(2.0 * k as f64);
        term = -term * x2 / (two_k * (two_k + R::one()));
        let contrib = term / (two_k + R::one());
        si += contrib;
        if contrib.abs() <= si.abs() * R::epsilon() {
            break;
        }
        k += 1;
        debug_assert!(k < 200);
    }
    // Ci: gamma + ln x + sum (-1)^k x^(2k) / (2k (2k)!)
    let mut ci = R::of(EULER_GAMMA) + x.ln();
    let mut term = R::one();
    let mut k = 1u32;
    loop {
        let two_k = R::of(2.0 * k as f64);
        term = -term * x2 / (two_k * (two_k - R::one()));
        let contrib = term / two_k;
        ci += contrib;
        if contrib.abs() <= R::epsilon() * (ci.abs() + R::one()) {
            break;
        }
        k += 1;
        debug_assert!(k < 200);
    }
    (si, ci)
}

fn sici_cf<R: Real>(x: R) -> (R, R) {
    // Modified Lentz continued fraction for E1(z), z = ix:
    // E1(z) = exp(-z) * 1/(z + 1 - 1/(z + 3 - 4/(z + 5 - 9/(...))))
    let z = Complex::new(R::zero(), x);
    let tiny = Complex::new(R::of(1e-290), R::zero());
    let mut b = z + Complex::new(R::one(), R::zero());
    let mut c = Complex::new(R::of(1e290), R::zero());
    let mut d = b.finv();
    let mut h = d;
    for i in 1..400u32 {
        let fi = R::of(i as f64);
        let a = Complex::new(-fi * fi, R::zero());
        b += Complex::new(R::two(), R::zero());
        d = b + a * d;
        if d.norm_sqr() < tiny.re {
            d = tiny;
        }
        c = b + a / c;
        if c.norm_sqr() < tiny.re {
            c = tiny;
        }
        d = d.finv();
        let delta = c * d;
        h = h * delta;
        if (delta - Complex::new(R::one(), R::zero())).norm() < R::epsilon() {
            break;
        }
    }
    let e1 = (-z).exp() * h;
    let ci = -e1.re;
    let si = R::FRAC_PI_2() + e1.im;
    (si, ci)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // Reference values frozen from mpmath (30 significant digits).
    #[test]
    fn matches_high_precision_references() {
        let cases: [(f64, f64, f64); 4] = [
            (0.1, 0.0999444611082769501605921185542, -1.72786838665729663899772515291),
            (1.0, 0.946083070367183014941353313823, 0.337403922900968134662646203889),
            (25.0, 1.53148255099996132263118319301, -0.00684859717970259091893877803172),
            (700.0, 1.57199393223749157063702809228, 0.000778810012739756339810132017166),
        ];
        for (x, si_ref, ci_ref) in cases {
            let (si, ci) = sici::<f64>(x);
            assert_relative_eq!(si, si_ref, max_relative = 1e-13);
            assert_relative_eq!(ci, ci_ref, max_relative = 1e-11, epsilon = 1e-14);
        }
    }

    #[test]
    fn series_and_continued_fraction_agree_at_switchover() {
        for x in [1.9f64, 2.0, 2.1] {
            let (si_s, ci_s) = sici_series(x);
            let (si_c, ci_c) = sici_cf(x);
            assert_relative_eq!(si_s, si_c, max_relative = 1e-12);
            assert_relative_eq!(ci_s, ci_c, max_relative = 1e-12);
        }
    }

    #[test]
    fn limits() {
        let (si, ci) = sici::<f64>(0.0);
        assert_eq!(si, 0.0);
        assert!(ci.is_infinite() && ci < 0.0);
        // Si(x) -> pi/2 for large x
        let (si, _) = sici::<f64>(1e6);
        assert_relative_eq!(si, std::f64::consts::FRAC_PI_2, max_relative = 1e-5);
    }

    #[test]
    fn f32_smoke() {
        let (si, ci) = sici::<f32>(1.0f32);
        assert!((si - 0.946_083).abs() < 1e-5);
        assert!((ci - 0.337_404).abs() < 1e-5);
    }
}
