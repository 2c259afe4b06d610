use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value while evaluating {what}")]
    NonFiniteEvaluation { what: String },

    #[error("grid too coarse: {points} points, need at least {required}")]
    GridTooCoarse { points: usize, required: usize },

    #[error("state left the admissible ball: |v|_inf = {norm:.3e} > radius {radius:.3e} at t = {t:.6}")]
    AdmissibleBallExceeded { norm: f64, radius: f64, t: f64 },

    #[error("Newton iteration failed after {iterations} iterations (residual {residual:.3e}) in {context}")]
    NewtonDivergence {
        context: String,
        iterations: usize,
        residual: f64,
    },

    #[error("CFL condition violated: Courant number {courant:.6} > 1")]
    CflViolation { courant: f64 },

    #[error("initial data incompatible with boundary conditions: residual {residual:.3e} > {tolerance:.1e}")]
    IncompatibleData { residual: f64, tolerance: f64 },

    #[error("boundary role exchange needs l = m, got l = {l}, m = {m}")]
    ZeroEigenvalueUnsupported { l: usize, m: usize },

    #[error("characteristic speed {index} vanishes at the equilibrium")]
    ZeroEigenvalue { index: usize },

    #[error("characteristic speed {speed:.3e} below sidewise threshold {threshold:.1e}")]
    DegenerateSpeed { speed: f64, threshold: f64 },

    #[error("control horizon T = {t:.6} does not exceed the minimal time T* = {t_star:.6}")]
    TimeTooShort { t: f64, t_star: f64 },

    #[error("determinate domains do not cover the strip: {0}")]
    CoverageFailure(String),

    #[error("observations inconsistent: overlap disagreement {disagreement:.3e} > tolerance {tolerance:.3e}")]
    InconsistentObservations { disagreement: f64, tolerance: f64 },

    #[error("chart domain exceeded: {0}")]
    ChartDomainExceeded(String),

    #[error("equilibrium is not subcritical: V^2 = {v2:.6} >= g A H'(A) = {c2:.6}")]
    SupercriticalEquilibrium { v2: f64, c2: f64 },

    #[error("boundary Jacobian is singular: det = {det:.3e}")]
    SingularBoundaryJacobian { det: f64 },

    #[error("flux derivative K_v = {value:.3e} is not positive")]
    DegenerateFlux { value: f64 },

    #[error("constraint violated: {0}")]
    ConstraintViolated(String),

    #[error("observability ratio undefined: observations vanish while the state does not")]
    DivisionByZero,

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Stable machine-readable name, used in JSON reports.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NonFiniteEvaluation { .. } => "NonFiniteEvaluation",
            Error::GridTooCoarse { .. } => "GridTooCoarse",
            Error::AdmissibleBallExceeded { .. } => "AdmissibleBallExceeded",
            Error::NewtonDivergence { .. } => "NewtonDivergence",
            Error::CflViolation { .. } => "CflViolation",
            Error::IncompatibleData { .. } => "IncompatibleData",
            Error::ZeroEigenvalueUnsupported { .. } => "ZeroEigenvalueUnsupported",
            Error::ZeroEigenvalue { .. } => "ZeroEigenvalue",
            Error::DegenerateSpeed { .. } => "DegenerateSpeed",
            Error::TimeTooShort { .. } => "TimeTooShort",
            Error::CoverageFailure(_) => "CoverageFailure",
            Error::InconsistentObservations { .. } => "InconsistentObservations",
            Error::ChartDomainExceeded(_) => "ChartDomainExceeded",
            Error::SupercriticalEquilibrium { .. } => "SupercriticalEquilibrium",
            Error::SingularBoundaryJacobian { .. } => "SingularBoundaryJacobian",
            Error::DegenerateFlux { .. } => "DegenerateFlux",
            Error::ConstraintViolated(_) => "ConstraintViolated",
            Error::DivisionByZero => "DivisionByZero",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }

    /// True for errors caused by malformed input rather than a failed computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_)
                | Error::GridTooCoarse { .. }
                | Error::IncompatibleData { .. }
                | Error::SupercriticalEquilibrium { .. }
                | Error::SingularBoundaryJacobian { .. }
                | Error::DegenerateFlux { .. }
                | Error::ConstraintViolated(_)
                | Error::ZeroEigenvalueUnsupported { .. }
        )
    }
}
