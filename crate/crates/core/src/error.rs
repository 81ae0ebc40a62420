use core::fmt;

/// Errors surfaced by the numerical operations.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Atomic laws carry no density and cannot be realized on a grid.
    AtomicNotRealizable,
    /// The requested grid truncates more mass than allowed.
    GridTooNarrow { truncated_mass: f64 },
    /// Variance too small to standardize.
    DegenerateLaw,
    /// Two laws could not be brought onto a common grid.
    IncompatibleSupports,
    /// Grid steps (or offsets) of two densities do not match.
    GridMismatch,
    /// The density floor mask covers too little of the mass for a
    /// score / conjugate-variable computation.
    SupportTooThin { mask_mass: f64 },
    /// The flow integrand has not decayed at the truncation time.
    TailTooFat { integrand: f64 },
    /// Cauchy transform requested at or below the real axis.
    BelowAxis,
    /// Stieltjes inversion lost too much mass.
    MassLoss { factor: f64 },
    /// A subordination fixed point did not converge.
    NoConvergence { residual: f64 },
    /// A stated hypothesis of the inequality under test is violated.
    HypothesisViolated,
    /// Projection family needs dimension at least 2^m.
    DimensionTooSmall,
    /// Equality-case witness requested for a strict-inequality instance.
    NotAnEqualityCase,
    /// The optimizer is still moving at the step budget.
    StalledBelowTolerance { relative_change: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::AtomicNotRealizable => write!(f, "atomic law has no density to realize"),
            Error::GridTooNarrow { truncated_mass } => {
                write!(f, "grid truncates mass {truncated_mass:.3e}")
            }
            Error::DegenerateLaw => write!(f, "law has (numerically) zero variance"),
            Error::IncompatibleSupports => write!(f, "laws cannot share a common grid"),
            Error::GridMismatch => write!(f, "grid steps/offsets do not match"),
            Error::SupportTooThin { mask_mass } => {
                write!(f, "density floor mask covers only {mask_mass:.6} of the mass")
            }
            Error::TailTooFat { integrand } => {
                write!(f, "flow integrand {integrand:.3e} at truncation time")
            }
            Error::BelowAxis => write!(f, "Cauchy transform needs Im z > 0"),
            Error::MassLoss { factor } => {
                write!(f, "Stieltjes inversion renormalization factor {factor:.6}")
            }
            Error::NoConvergence { residual } => {
                write!(f, "fixed point residual {residual:.3e} at iteration budget")
            }
            Error::HypothesisViolated => write!(f, "hypothesis of the inequality violated"),
            Error::DimensionTooSmall => write!(f, "dimension must be at least 2^m"),
            Error::NotAnEqualityCase => write!(f, "not an equality case"),
            Error::StalledBelowTolerance { relative_change } => {
                write!(f, "optimizer still moving ({relative_change:.3e}) at step budget")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
