//! Implicit Lyapunov function (ILF) controllers for chains of integrators.
//!
//! The crate covers:
//!
//! - [`ratefn`]: nested-exponential rate functions, the comparison ODE, decay envelopes
//!   and a finite-data decay-rate classifier.
//! - [`ilf`]: homogeneous dilations, four ILF families, the warm-started bisection
//!   solver and numerical samplers for the Lyapunov-type conditions.
//! - [`lmi`]: integrator chains, a Jacobi symmetric eigensolver, LMI feasibility checks,
//!   witness searches and a best-effort gain synthesizer.
//! - [`control`]: finite-time, hyperexponential and combined ILF feedback laws with
//!   sampled-time realization.
//! - [`sim`]: fixed-step RK4 closed-loop simulation with measurement noise and input delay.
//! - [`experiments`]: reproducible experiment runners behind the `hypex` binary.
//!
//! Runnable walkthroughs live in `examples/`; `cargo run --example <name>`.

pub mod control;
pub mod error;
pub mod experiments;
pub mod ilf;
pub mod lmi;
pub mod ratefn;
pub mod sim;

pub use error::{Error, Result};

/// Dense column-major matrix used throughout the crate.
pub type Matrix = nalgebra::DMatrix<f64>;
/// State vector.
pub type Vector = nalgebra::DVector<f64>;
/// Single-input state-feedback gain.
pub type RowVector = nalgebra::RowDVector<f64>;
