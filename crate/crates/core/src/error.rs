//! Error taxonomy shared by all modules.

/// Everything that can go wrong in the library.
///
/// Values are carried as `f64` for reporting regardless of the scalar type
/// the computation ran in.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error(
        "quadrature failed: error {achieved:.3e} above target {target:.3e} \
         after {subdivisions} subdivisions"
    )]
    QuadratureFailure {
        target: f64,
        achieved: f64,
        subdivisions: usize,
    },

    /// K(t) has a logarithmic UV divergence at exactly t = 0 (any T).
    #[error("kernel K(t) diverges logarithmically at t = 0")]
    DivergentAtZero,

    #[error(
        "no regime predicate fired: tau_b/tau_s = {tb_over_ts:.3e}, \
         tau_s/tau_gamma = {ts_over_tg:.3e}"
    )]
    AmbiguousRegime { tb_over_ts: f64, ts_over_tg: f64 },

    #[error("triple-degenerate Green-function root near s = {re:.6e}{im:+.6e}i")]
    DegenerateRoots { re: f64, im: f64 },

    #[error("grid too coarse: {quantity} changed by {rel_change:.3e} on halving")]
    GridTooCoarse {
        quantity: &'static str,
        rel_change: f64,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("ill-normalized ECS: theta = pi with |alpha|^2 = {alpha2:.3e}")]
    IllNormalized { alpha2: f64 },

    #[error("eigensolver residual {residual:.3e} exceeds {limit:.1e}")]
    NumericalEigenFailure { residual: f64, limit: f64 },

    #[error("oracle mismatch in {what}: relative deviation {deviation:.3e} exceeds {limit:.1e}")]
    OracleMismatch {
        what: String,
        deviation: f64,
        limit: f64,
    },

    #[error("i/o failure: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
