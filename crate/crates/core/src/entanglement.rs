//! Concurrence of two-mode entangled coherent states: the Eq. (12) reduced
//! density matrix, a Wootters eigenvalue oracle, and Markovian vs
//! non-Markovian disentanglement traces.
//!
//! The algebraic concurrence is M^2 q / (1 + p^2 q cos theta) — with
//! p^2 q = p^N for the static state, this is the middle member of Eq. (13) —
//! and coincides with the Wootters computation on the trace-1 rebuilt matrix
//! for any (p, q, M) an evolution can produce.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::hpz::IntegratedRates;
use crate::scalar::Real;

type Mat4<R> = [[Complex<R>; 4]; 4];

/// Multi-mode entangled coherent state |alpha+> +/- e^(i theta)|alpha->.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EcsSpec<R> {
    pub n_modes: usize,
    pub theta: R,
    /// Per-mode displacement squared |alpha|^2.
    pub alpha2: R,
}

impl<R: Real> EcsSpec<R> {
    pub fn new(n_modes: usize, theta: R, alpha2: R) -> Result<Self> {
        if n_modes < 2 {
            return Err(Error::InvalidSpec(format!("ECS needs N >= 2 modes, got {n_modes}")));
        }
        if !(alpha2 >= R::zero()) || !alpha2.is_finite() {
            return Err(Error::InvalidSpec(format!("ECS needs |alpha|^2 >= 0, got {alpha2}")));
        }
        let spec = Self { n_modes, theta, alpha2 };
        // theta = pi with vanishing displacement: |Phi-> norm goes to zero.
        if theta.cos() < R::of(-0.999999) && alpha2 < R::of(1e-12) {
            return Err(Error::IllNormalized { alpha2: alpha2.as_f64() });
        }
        Ok(spec)
    }

    /// (p, q, M) of Eq. (12).
    pub fn parameters(&self) -> (R, R, R) {
        let p = (-R::two() * self.alpha2).exp();
        let q = p.powi(self.n_modes as i32 - 2);
        let m = (R::one() - p * p).sqrt();
        (p, q, m)
    }
}

/// Eq. (12) matrix in the orthogonal basis {|00>, |01>, |10>, |11>}, plus
/// the parameters it was built from.
#[derive(Debug, Clone)]
pub struct ReducedDensityMatrix<R> {
    pub matrix: Mat4<R>,
    pub p: R,
    pub q: R,
    pub m: R,
    pub n0_sq: R,
}

fn re<R: Real>(x: R) -> Complex<R> {
    Complex::new(x, R::zero())
}

/// Build the Eq. (12) matrix from raw (p, q, M, theta). Normalized to trace
/// one with N0^2 = (2 + 2 p^2 q cos theta)^(-1).
pub fn rebuild_density<R: Real>(p: R, q: R, m: R, theta: R) -> ReducedDensityMatrix<R> {
    let n0_sq = (R::two() + R::two() * p * p * q * theta.cos()).recip();
    let eip = Complex::new(theta.cos(), theta.sin());
    let one = Complex::new(R::one(), R::zero());
    let pm = re(p * m);
    let m2 = re(m * m);
    let z = Complex::new(R::zero(), R::zero());
    let mut mat: Mat4<R> = [[z; 4]; 4];
    mat[0][0] = re(R::two() * p * p * (R::one() + q * theta.cos()));
    mat[0][1] = pm * (one + re(q) * eip);
    mat[0][2] = pm * (one + re(q) * eip.conj());
    mat[1][0] = pm * (one + re(q) * eip.conj());
    mat[1][1] = m2;
    mat[1][2] = m2 * re(q) * eip.conj();
    mat[2][0] = pm * (one + re(q) * eip);
    mat[2][1] = m2 * re(q) * eip;
    mat[2][2] = m2;
    for row in mat.iter_mut() {
        for v in row.iter_mut() {
            *v = *v * re(n0_sq);
        }
    }
    ReducedDensityMatrix { matrix: mat, p, q, m, n0_sq }
}

/// Reduced two-mode density matrix of the N-mode ECS.
pub fn reduced_density<R: Real>(spec: &EcsSpec<R>) -> Result<ReducedDensityMatrix<R>> {
    let (p, q, m) = spec.parameters();
    Ok(rebuild_density(p, q, m, spec.theta))
}

fn mat_mul<R: Real>(a: &Mat4<R>, b: &Mat4<R>) -> Mat4<R> {
    let z = Complex::new(R::zero(), R::zero());
    let mut out: Mat4<R> = [[z; 4]; 4];
    for i in 0..4 {
        for k in 0..4 {
            let aik = a[i][k];
            if aik == z {
                continue;
            }
            for j in 0..4 {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

fn frobenius<R: Real>(a: &Mat4<R>) -> R {
    let mut s = R::zero();
    for row in a {
        for v in row {
            s += v.norm_sqr();
        }
    }
    s.sqrt()
}

/// Cyclic complex-Hermitian Jacobi: returns (eigenvalues, eigenvector
/// columns). Convergence is certified by the caller through the residual.
fn hermitian_eigen<R: Real>(a: &Mat4<R>) -> ([R; 4], Mat4<R>) {
    let z = Complex::new(R::zero(), R::zero());
    let one = Complex::new(R::one(), R::zero());
    let mut m = *a;
    let mut v: Mat4<R> = [[z; 4]; 4];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = one;
    }
    let scale = frobenius(a).max(R::of(1e-300));
    for _sweep in 0..60 {
        let mut off = R::zero();
        for i in 0..4 {
            for j in (i + 1)..4 {
                off += m[i][j].norm_sqr();
            }
        }
        if off.sqrt() <= R::epsilon() * scale {
            break;
        }
        for pi in 0..4 {
            for qi in (pi + 1)..4 {
                let apq = m[pi][qi];
                let r = apq.norm();
                if r <= R::epsilon() * scale {
                    continue;
                }
                let phase = apq / re(r);
                let alpha = m[pi][pi].re;
                let beta = m[qi][qi].re;
                let tau = (beta - alpha) / (R::two() * r);
                let t = if tau >= R::zero() {
                    (tau + (R::one() + tau * tau).sqrt()).recip()
                } else {
                    -(-tau + (R::one() + tau * tau).sqrt()).recip()
                };
                let c = (R::one() + t * t).sqrt().recip();
                let s = t * c;
                // G[p][p] = c, G[p][q] = s*phase, G[q][p] = -s*conj(phase), G[q][q] = c.
                let gpq = re(s) * phase;
                let gqp = -re(s) * phase.conj();
                // m <- G^dagger m G applied in place on rows/cols p, q.
                for k in 0..4 {
                    let mkp = m[k][pi];
                    let mkq = m[k][qi];
                    m[k][pi] = mkp * re(c) + mkq * gqp;
                    m[k][qi] = mkp * gpq + mkq * re(c);
                }
                for k in 0..4 {
                    let mpk = m[pi][k];
                    let mqk = m[qi][k];
                    m[pi][k] = re(c) * mpk + gqp.conj() * mqk;
                    m[qi][k] = gpq.conj() * mpk + re(c) * mqk;
                }
                for k in 0..4 {
                    let vkp = v[k][pi];
                    let vkq = v[k][qi];
                    v[k][pi] = vkp * re(c) + vkq * gqp;
                    v[k][qi] = vkp * gpq + vkq * re(c);
                }
            }
        }
    }
    let mut eig = [R::zero(); 4];
    for i in 0..4 {
        eig[i] = m[i][i].re;
    }
    (eig, v)
}

fn eigen_residual<R: Real>(a: &Mat4<R>, eig: &[R; 4], v: &Mat4<R>) -> R {
    // max column norm of A V - V diag(eig).
    let av = mat_mul(a, v);
    let mut worst = R::zero();
    for j in 0..4 {
        let mut col = R::zero();
        for i in 0..4 {
            col += (av[i][j] - v[i][j] * re(eig[j])).norm_sqr();
        }
        worst = worst.max(col.sqrt());
    }
    worst
}

fn checked_eigen<R: Real>(a: &Mat4<R>) -> Result<([R; 4], Mat4<R>)> {
    let (eig, v) = hermitian_eigen(a);
    let limit = R::of(1e-8);
    let residual = eigen_residual(a, &eig, &v) / frobenius(a).max(R::one());
    if residual > limit {
        return Err(Error::NumericalEigenFailure {
            residual: residual.as_f64(),
            limit: limit.as_f64(),
        });
    }
    Ok((eig, v))
}

/// Wootters concurrence from the spin-flip eigenvalue route
/// sqrt(eig(sqrt(rho) rho~ sqrt(rho))).
pub fn wootters_concurrence<R: Real>(rho: &ReducedDensityMatrix<R>) -> Result<R> {
    let a = &rho.matrix;
    let (eig, v) = checked_eigen(a)?;
    let y = [-R::one(), R::one(), R::one(), -R::one()];
    // Numerical rank of rho; eigenvalues at the solver's absolute resolution
    // are exact zeros and so are the corresponding Wootters lambdas.
    let trace = eig.iter().fold(R::zero(), |acc, &e| acc + e.max(R::zero()));
    let tol = trace * R::epsilon() * R::of(256.0);
    let kept: Vec<usize> = (0..4).filter(|&k| eig[k] > tol).collect();
    if kept.len() <= 2 {
        // Rank-reduced route: with rho = L L^dagger the nonzero lambdas are
        // the singular values of the r x r complex symmetric B = L^T S L,
        // S = sigma_y x sigma_y. A closed-form 2 x 2 SVD keeps the small
        // singular value at full relative accuracy, which the generic
        // sqrt-of-eigenvalue route cannot (it floors at sqrt(eps * norm)).
        let r = kept.len();
        if r == 0 {
            return Ok(R::zero());
        }
        let z = Complex::new(R::zero(), R::zero());
        let mut bmat = [[z; 2]; 2];
        for (jj, &kj) in kept.iter().enumerate() {
            for (kk, &kk2) in kept.iter().enumerate() {
                let mut s = z;
                for i in 0..4 {
                    s += v[i][kj] * re(y[i]) * v[3 - i][kk2];
                }
                bmat[jj][kk] = s * re((eig[kj].max(R::zero()) * eig[kk2].max(R::zero())).sqrt());
            }
        }
        if r == 1 {
            return Ok(bmat[0][0].norm());
        }
        let g = bmat[0][0].norm_sqr()
            + bmat[0][1].norm_sqr()
            + bmat[1][0].norm_sqr()
            + bmat[1][1].norm_sqr();
        let det = (bmat[0][0] * bmat[1][1] - bmat[0][1] * bmat[1][0]).norm();
        let s1 = ((g + (g * g - R::of(4.0) * det * det).max(R::zero()).sqrt()) * R::half()).sqrt();
        let s2 = if s1 > R::zero() { det / s1 } else { R::zero() };
        return Ok((s1 - s2).max(R::zero()));
    }
    // Generic route: lambdas from sqrt(sqrt(rho) rho~ sqrt(rho)).
    let z = Complex::new(R::zero(), R::zero());
    let mut sqrt_rho: Mat4<R> = [[z; 4]; 4];
    for k in 0..4 {
        let lam = eig[k].max(R::zero()).sqrt();
        for i in 0..4 {
            for j in 0..4 {
                sqrt_rho[i][j] += v[i][k] * v[j][k].conj() * re(lam);
            }
        }
    }
    // rho~ = (sigma_y x sigma_y) rho* (sigma_y x sigma_y); Y is the
    // anti-diagonal (-1, 1, 1, -1), so (Y B Y)[i][j] = y_i y_j B[3-i][3-j].
    let mut tilde: Mat4<R> = [[z; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            tilde[i][j] = a[3 - i][3 - j].conj() * re(y[i] * y[j]);
        }
    }
    let prod = mat_mul(&mat_mul(&sqrt_rho, &tilde), &sqrt_rho);
    let (mut lam2, _) = checked_eigen(&prod)?;
    let mut lambdas: Vec<R> = lam2.iter_mut().map(|l| l.max(R::zero()).sqrt()).collect();
    lambdas.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(R::zero()))
}

/// Algebraic concurrence for arbitrary evolved parameters.
pub fn concurrence_algebraic<R: Real>(p: R, q: R, m: R, theta: R) -> R {
    m * m * q / (R::one() + p * p * q * theta.cos())
}

/// Static concurrence of the N-mode ECS, Eq. (13) middle member.
pub fn concurrence_static<R: Real>(spec: &EcsSpec<R>) -> Result<R> {
    let (p, q, m) = spec.parameters();
    Ok(concurrence_algebraic(p, q, m, spec.theta))
}

/// Markovian zero-temperature photon-loss parameters at time t.
fn markovian_pq<R: Real>(t: R, alpha2: R, gamma: R) -> (R, R, R) {
    let decay = (-gamma * t).exp();
    let p = (-R::two() * decay * alpha2).exp();
    let q = (-R::of(4.0) * (R::one() - decay) * alpha2).exp();
    let m = (R::one() - p * p).sqrt();
    (p, q, m)
}

/// Concurrence under the Markovian zero-T channel with loss rate gamma.
pub fn concurrence_markovian<R: Real>(t: R, spec: &EcsSpec<R>, gamma: R) -> R {
    let (p, q, m) = markovian_pq(t, spec.alpha2, gamma);
    concurrence_algebraic(p, q, m, spec.theta)
}

/// Concurrence trace with both Markovian baselines.
#[derive(Debug, Clone)]
pub struct ConcurrenceTrace<R> {
    pub t_grid: Vec<R>,
    pub c: Vec<R>,
    pub c_markov_bare: Vec<R>,
    pub c_markov_adjusted: Vec<R>,
    /// First time the non-Markovian concurrence drops to <= 1e-6.
    pub separability_time: Option<R>,
}

/// Non-Markovian trace via the Eq. (36) substitution gamma t -> Gamma_p(t),
/// (1 - e^(-gamma t)) -> Delta_p(t). `bare_rate` and `adjusted_rate` feed
/// the two Markovian baselines (Fig. 4's blue and yellow curves).
pub fn concurrence_nonmarkovian<R: Real>(
    t_grid: &[R],
    spec: &EcsSpec<R>,
    rates: &IntegratedRates<R>,
    bare_rate: R,
    adjusted_rate: R,
) -> Result<ConcurrenceTrace<R>> {
    if rates.t.len() != t_grid.len()
        || rates
            .t
            .iter()
            .zip(t_grid)
            .any(|(&a, &b)| (a - b).abs() > R::of(1e-12) * (R::one() + b.abs()))
    {
        return Err(Error::GridMismatch(
            "integrated rates were computed on a different time grid".into(),
        ));
    }
    let a2 = spec.alpha2;
    let mut c = Vec::with_capacity(t_grid.len());
    let mut separability_time = None;
    for i in 0..t_grid.len() {
        let decay = (-rates.big_gamma_p[i]).exp();
        let p = (-R::two() * decay * a2).exp();
        let q = (-R::of(4.0) * rates.delta_p[i] * a2).exp();
        let m = (R::one() - p * p).sqrt();
        let ci = concurrence_algebraic(p, q, m, spec.theta);
        if separability_time.is_none() && ci <= R::of(1e-6) {
            separability_time = Some(t_grid[i]);
        }
        c.push(ci);
    }
    let c_markov_bare = t_grid.iter().map(|&t| concurrence_markovian(t, spec, bare_rate)).collect();
    let c_markov_adjusted =
        t_grid.iter().map(|&t| concurrence_markovian(t, spec, adjusted_rate)).collect();
    Ok(ConcurrenceTrace {
        t_grid: t_grid.to_vec(),
        c,
        c_markov_bare,
        c_markov_adjusted,
        separability_time,
    })
}
