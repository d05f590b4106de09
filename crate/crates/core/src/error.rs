use thiserror::Error;

/// Errors shared by all solver modules.
#[derive(Debug, Error)]
pub enum Error {
    /// The discrete k-form has a non-positive eigenvalue; k is too large.
    #[error("indefinite k-form: {0}")]
    IndefiniteForm(String),

    /// The grid is too coarse to resolve a charge component.
    #[error("unresolved component: {0}")]
    UnresolvedComponent(String),

    /// Two sampled functions live on different grids.
    #[error("grid mismatch between sampled functions")]
    GridMismatch,

    /// A linear system came out singular to working precision.
    #[error("singular system: {0}")]
    SingularSystem(String),

    /// A potential kink was detected away from the conductor boundary and
    /// away from any charge support; the field is corrupt.
    #[error("potential kink off the conductor boundary at rho = {0}")]
    NonConductorKink(f64),

    /// Rearrangement requires nonnegative samples.
    #[error("negative samples passed to rearrangement")]
    NegativeSamples,

    /// One-sided derivatives differ at this radius; the gradient force is
    /// undefined there and the mollified form must be used.
    #[error("one-sided derivatives differ at kink radius {0}")]
    KinkRadius(f64),

    /// The closed-form denominator C(E) - k^2 |E| is not positive.
    #[error("denominator C(E) - k^2 |E| is not positive")]
    DenominatorNonpositive,

    /// The pair-balance denominator 3 - 4 pi k^2 r^2 vanishes.
    #[error("degenerate pair-balance denominator 3 - 4 pi k^2 r^2")]
    DegenerateDenominator,

    /// A pair-force evaluation point left the gap interval (r, r + delta].
    #[error("R = {0} outside the pair gap interval")]
    OutOfInterval(f64),

    /// A pair fraction outside [0, 1] where a physical fraction is required.
    #[error("pair fraction t = {0} outside [0, 1]")]
    TOutOfRange(f64),

    /// An iterative solver hit its iteration cap.
    #[error("no convergence after {0} iterations (residual {1:.3e})")]
    NoConvergence(usize, f64),

    /// A geometry variant is not supported by the requested operation.
    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),

    /// Scenario-level validation failure.
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
