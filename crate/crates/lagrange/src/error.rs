use thiserror::Error;

/// Errors shared across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("collision: bodies {i} and {j} coincide")]
    Collision { i: usize, j: usize },

    #[error("configuration is not central: residual {residual:e} exceeds tolerance {tol:e}")]
    NotCentral { residual: f64, tol: f64 },

    #[error("degenerate central configuration: kernel dimension {kernel_dim} exceeds 2")]
    DegenerateCentralConfig { kernel_dim: usize },

    #[error("masses must be positive")]
    NonPositiveMass,

    #[error("masses must be normalized to total 1 (got {total})")]
    UnnormalizedMasses { total: f64 },

    #[error("configuration must satisfy {condition}")]
    InvalidConfiguration { condition: &'static str },

    #[error("inconsistent angular rate: omega^2 = {omega_sq} but lambda = {lambda}")]
    OmegaLambdaMismatch { omega_sq: f64, lambda: f64 },

    #[error("frequency collision: beta = {beta} is not below 1/27")]
    FrequencyCollision { beta: f64 },

    #[error("resonance: |<k, frequencies>| = {residual:e} for k = ({k0}, {k1}, {k2})")]
    Resonance {
        k0: i64,
        k1: i64,
        k2: i64,
        residual: f64,
    },

    #[error("chart mismatch: expected {expected:?}, got {got:?}")]
    ChartMismatch {
        expected: crate::poly::Chart,
        got: crate::poly::Chart,
    },

    #[error("degenerate mass triple: kappa vanishes")]
    KappaVanishes,

    #[error("point outside {region}")]
    OutOfRegion { region: &'static str },

    #[error("normal form coefficient {name} has imaginary part {imag:e}")]
    NonRealNormalForm { name: &'static str, imag: f64 },

    #[error("trajectory left the chart: |z|^2 = {z_norm_sq}")]
    ChartExit { z_norm_sq: f64 },

    #[error("radial collapse: r = {r}")]
    RadialCollapse { r: f64 },

    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("no resonant beta of order <= {max_order} in (0, 1/27)")]
    NoResonantBeta { max_order: usize },

    #[error("convexity criterion inapplicable: a0 = 0")]
    ConvexityInapplicable,

    #[error("eigen-solver failed")]
    EigenFailure,
}

pub type Result<T> = std::result::Result<T, Error>;
