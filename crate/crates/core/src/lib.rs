//! Simulation and verification of the damped nonlinear beam
//!
//! ```text
//! m u_tt + sigma u_xxxx + F1(u_t) + F2(u) = f(x),   x in (a, b)
//! u = u_xx = 0 at x = a, b
//! ```
//!
//! together with its stationary problem `sigma u_xxxx + F2(u) = f`.
//!
//! * [`model`]: problem data and hypothesis checks.
//! * [`discretization`]: finite-difference and sine-spectral operators, quadrature, norms.
//! * [`dynamics`]: energy-consistent implicit time stepping.
//! * [`stationary`]: convex minimization of the static potential energy.
//! * [`diagnostics`]: energy ledgers, Lyapunov checks, convergence to equilibrium.
//! * [`config`]: TOML scenario files.

pub mod config;
pub mod diagnostics;
pub mod discretization;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod settings;
pub mod stationary;

pub use error::{BeamError, Result};
pub use settings::SolverSettings;
