use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("root bracketing unresolved after {refinements} grid refinements near n_bar = {near:e}")]
    RootGrid { refinements: u32, near: f64 },

    #[error("steady state at n_bar = {n_bar:e} is unstable (kappa^2 + delta_tilde^2 - |alpha|^2 = {margin:e})")]
    UnstableRoot { n_bar: f64, margin: f64 },

    #[error("quadrature did not converge: error estimate {estimate:e} exceeds tolerance {tolerance:e}")]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("eigensolver failed for chi = {chi:e}, n_c = {n_c}, |omega| = {omega_abs:e}, dim = {dim}")]
    Eigen { chi: f64, n_c: f64, omega_abs: f64, dim: usize },

    #[error("steady state is not unique: null space of dimension {null_dim}")]
    DegenerateSteadyState { null_dim: usize, basis: Vec<Vec<Complex64>> },

    #[error("steady-state residual {residual:e} exceeds {tolerance:e}")]
    Residual { residual: f64, tolerance: f64 },

    #[error("mean photon number not converged at the dim = {dim} cap (change {change:e})")]
    Truncation { dim: usize, change: f64 },

    #[error("propagation to tau = {tau:e} failed: error {error:e} after {halvings} step halvings (step {step:e})")]
    Propagation { tau: f64, step: f64, halvings: u32, error: f64 },

    #[error("{0}")]
    Undefined(&'static str),

    #[error("malformed parameter file: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
