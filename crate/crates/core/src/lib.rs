//! Rigid-body attitude stabilization from body-frame vector measurements,
//! without gyroscope feedback and without reconstructing the attitude.
//!
//! The controller sees only the vectors `b_i = Rᵀ r_i` (sun sensor,
//! magnetometer, ...). First-order filters on those vectors produce an
//! angular-velocity surrogate `ω̂`, and the torque is
//! `τ = Σ ρ_i S(b_i^d) b_i − M ω̂`.
//!
//! Modules, bottom up:
//!
//! - [`so3`]: vectors, 3×3 matrices, quaternions, the Rodrigues map.
//! - [`plant`]: kinematics, Euler dynamics, vector measurements.
//! - [`observer`]: measurement filters and `ω̂`.
//! - [`controller`]: `W_ρ`, `z_ρ` and the torque.
//! - [`sim`]: closed-loop RK4 simulation and the Lyapunov function.
//! - [`analysis`]: equilibria, genericity check, linearizations and spectra.
//! - [`tuning`]: ISE/IAE/ITAE objectives and a multi-start bounded simplex search.
//! - [`config`] / [`commands`]: JSON run configuration and the command-line surface.

pub mod analysis;
pub mod commands;
pub mod config;
pub mod controller;
pub mod error;
pub mod linalg;
pub mod observer;
pub mod plant;
pub mod presets;
pub mod sim;
pub mod so3;
pub mod tuning;

pub use error::{Error, Result};
