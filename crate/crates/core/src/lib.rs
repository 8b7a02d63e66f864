//! Simulator for photon blockade, optical bistability and probe transparency
//! in a dispersively coupled qubit–cavity (circuit QED) system.
//!
//! The analysis chain runs
//!
//! 1. [`model`]: parameters, Kerr strength χ = g⁴/Δ³, excitation energy E(N̄);
//! 2. [`fock_spectrum`]: spectrum and photon staircase of χ(n − n_c)² + Ω a† + Ω* a;
//! 3. [`steady_state`]: self-consistent mean-field roots, stability, bistability window;
//! 4. [`fluctuations`]: linearized fluctuations, stationary correlators, g²(τ);
//! 5. [`io_response`]: probe response spectrum of the output field;
//! 6. [`lindblad_oracle`]: exact truncated master equation used for cross-checks.
//!
//! Internally every rate is an angular frequency in rad/s and every time is in
//! seconds; [`units`] converts to and from ν = ω/2π in MHz. All numerical code
//! is generic over [`Real`]; the `*F64` aliases below are what most callers want.

pub mod error;
pub mod fluctuations;
pub mod fock_spectrum;
pub mod grid;
pub mod io_response;
pub mod lindblad_oracle;
pub mod model;
pub mod quadrature;
pub mod scalar;
pub mod steady_state;
pub mod units;

pub use error::{Error, Result};
pub use scalar::Real;

pub type SystemParamsF64 = model::SystemParams<f64>;
pub type SystemParamsF32 = model::SystemParams<f32>;
pub type SteadyStateRootF64 = steady_state::SteadyStateRoot<f64>;
pub type BistabilityWindowF64 = steady_state::BistabilityWindow<f64>;
pub type LinearizedCoefficientsF64 = fluctuations::LinearizedCoefficients<f64>;
pub type CorrelationSetF64 = fluctuations::CorrelationSet<f64>;
pub type ResponseSpectrumF64 = io_response::ResponseSpectrum<f64>;
pub type EigenSystemF64 = fock_spectrum::EigenSystem<f64>;
pub type FockOperatorSetF64 = lindblad_oracle::FockOperatorSet<f64>;
pub type DensityMatrixF64 = lindblad_oracle::DensityMatrix<f64>;
