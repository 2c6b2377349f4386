use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("radial node count must be >= 3 (got {0})")]
    TooFewRadialNodes(usize),
    #[error("axial node count must be >= 2 (got {0})")]
    TooFewAxialNodes(usize),
    #[error("radial extent must be positive and finite (got {0})")]
    BadRadialExtent(f64),
    #[error("axial period must be positive and finite (got {0})")]
    BadAxialPeriod(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("field shape {got:?} does not match grid shape {expected:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("field contains a non-finite value at node ({i}, {j})")]
    NonFinite { i: usize, j: usize },
    #[error("operation requires an even-parity field")]
    ParityMismatch,
    #[error("ghost row index {index} is outside [-{max}, {max}]")]
    GhostOutOfRange { index: isize, max: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("norm exponent must be >= 1 (got {0})")]
    BadExponent(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("epsilon must lie in [0, 2) (got {0})")]
    EpsilonOutOfRange(f64),
    #[error("viscosity must be non-negative and finite (got {0})")]
    BadViscosity(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EllipticError {
    #[error("singular tridiagonal system for z-mode {mode} at row {row}")]
    Singular { mode: usize, row: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
    #[error("stream function is stale: |L phi1 + omega1| = {residual:e} exceeds {threshold:e}")]
    StalePhi { residual: f64, threshold: f64 },
    #[error("time step must be positive and finite (got {0})")]
    BadTimeStep(f64),
    #[error("final time must be positive (got {0})")]
    BadFinalTime(f64),
    #[error("non-finite {field} after step ending at t = {t}")]
    Instability { t: f64, field: &'static str },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
    #[error("need at least {needed} samples (got {got})")]
    TooFewSamples { needed: usize, got: usize },
    #[error("sample times must be strictly increasing")]
    NonIncreasingTimes,
    #[error("{what} requires epsilon in (0, 2) (got {eps})")]
    EpsilonNotPositive { what: &'static str, eps: f64 },
    #[error("r_min = {r_min} is below 4 hr = {limit}")]
    RMinTooSmall { r_min: f64, limit: f64 },
    #[error("scale factor must be positive and finite (got {0})")]
    BadScale(f64),
    #[error("rescaled field escapes the target grid: dropped amplitude {dropped:e} relative to peak")]
    SupportEscape { dropped: f64 },
    #[error("Prodi-Serrin exponent p must lie in (3, inf] (got {0})")]
    BadSerrinExponent(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InequalityError {
    #[error("lambda must exceed 1 (got {0})")]
    BadLambda(f64),
    #[error("sigma must differ from 1")]
    SigmaIsOne,
    #[error("test function must be non-negative (found {value} at sample {index})")]
    NegativeFunction { index: usize, value: f64 },
    #[error("sample grid must have at least two points on an increasing interval")]
    BadSampleGrid,
    #[error("exponents must satisfy 1 < eps' < eps < 2 (got eps' = {eps_prime}, eps = {eps})")]
    ExponentOrder { eps: f64, eps_prime: f64 },
    #[error("u1 violates the circulation bound at node ({i}, {j}): |u1| = {value:e} > {bound:e}")]
    CirculationBound {
        i: usize,
        j: usize,
        value: f64,
        bound: f64,
    },
    #[error("cutoff scale must be positive (got {0})")]
    BadScale(f64),
    #[error("radial profile has {got} samples, grid has {expected}")]
    ProfileLength { expected: usize, got: usize },
    #[error("degenerate field: all derivatives vanish")]
    Degenerate,
    #[error(transparent)]
    Field(#[from] FieldError),
}
