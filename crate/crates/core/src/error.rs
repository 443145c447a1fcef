use num_complex::Complex64;
use thiserror::Error;

/// Everything that can go wrong while evaluating an instance.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("branch angle {0} is outside the open interval (0, 2π)")]
    InvalidAngle(f64),

    #[error("tolerance {0} must be finite and positive")]
    InvalidTolerance(f64),

    #[error("non-finite input")]
    NonFinite,

    #[error("logarithm of zero")]
    ZeroInput,

    #[error("{z} lies on the branch cut at angle {theta}")]
    OnBranchCut { z: Complex64, theta: f64 },

    #[error("evaluation point coincides with the pole at alpha")]
    PoleHit,

    #[error("|alpha| = {modulus} is within {band} of the unit circle")]
    AlphaOnCircle { modulus: f64, band: f64 },

    #[error("alpha lies on the branch cut")]
    AlphaOnCut,

    #[error("hypergeometric parameter c = {0} is a non-positive integer")]
    InvalidC(Complex64),

    #[error("series argument |z| = {0} is outside the unit disc")]
    OutsideDisc(f64),

    #[error("no convergence: best value {value}, error estimate {estimate:e}")]
    NoConvergence { value: Complex64, estimate: f64 },

    #[error("beta is a non-negative integer; the value is the residue 2πiα^β")]
    BetaNonNegativeInteger,

    #[error("beta is an integer")]
    IntegerBeta,

    #[error("invalid rational exponent {m}/{n}")]
    InvalidRational { m: i64, n: i64 },

    #[error("rational exponent {m}/{n} does not match beta = {beta}")]
    BetaMismatch { m: i64, n: i64, beta: Complex64 },

    #[error("integration path passes through the pole")]
    SingularPath,

    #[error("integral diverges at zero (Re(beta) <= 0)")]
    DivergentAtZero,

    #[error("finite-difference stencil crosses |alpha| = 1")]
    RegimeStraddle,

    #[error("method not applicable: {0}")]
    NotApplicable(&'static str),
}

impl Error {
    /// Stable short name used in reports and the C interface.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidAngle(_) => "InvalidAngle",
            Error::InvalidTolerance(_) => "InvalidTolerance",
            Error::NonFinite => "NonFinite",
            Error::ZeroInput => "ZeroInput",
            Error::OnBranchCut { .. } => "OnBranchCut",
            Error::PoleHit => "PoleHit",
            Error::AlphaOnCircle { .. } => "AlphaOnCircle",
            Error::AlphaOnCut => "AlphaOnCut",
            Error::InvalidC(_) => "InvalidC",
            Error::OutsideDisc(_) => "OutsideDisc",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::BetaNonNegativeInteger => "BetaNonNegativeInteger",
            Error::IntegerBeta => "IntegerBeta",
            Error::InvalidRational { .. } => "InvalidRational",
            Error::BetaMismatch { .. } => "BetaMismatch",
            Error::SingularPath => "SingularPath",
            Error::DivergentAtZero => "DivergentAtZero",
            Error::RegimeStraddle => "RegimeStraddle",
            Error::NotApplicable(_) => "NotApplicable",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
