//! Fourier-side simulation and verification toolkit for the strongly
//! damped Klein-Gordon equation
//!
//!   u_tt - Δu + m²u - Δu_t = 0   on (0,∞) × R^n.
//!
//! Everything happens on the Fourier side: initial data are Gaussian
//! mixtures with closed-form transforms, each frequency evolves by the
//! exact propagator of the reduced mode equation, and norms come from
//! adaptive radial quadrature. On top of that sit the verification
//! layers: an energy method with explicit pointwise decay constants, the
//! exact low-frequency remainder decomposition against the asymptotic
//! profile, the oscillation integrals controlling the sharp two-sided
//! L² decay rate t^{-n/4}, and slope-fitting machinery that turns decay
//! claims into measured exponents.
//!
//! See the `examples/` directory for runnable tours of each capability
//! and the `sdkg` binary for the batch scenario runner.

pub mod asymptotics;
pub mod catalog;
pub mod energy;
pub mod mode;
pub mod norms;
pub mod profile;
pub mod quad;
pub mod report;
pub mod runner;
pub mod scenario;
pub mod svg;

pub use catalog::{validate_params, Datum, DatumPair, GaussianTerm, ModelParams, RawParams};
pub use mode::{char_roots, discriminant, evolve_mode, ModeState, Regime};
