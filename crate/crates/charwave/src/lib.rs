//! Simulation and measurement toolkit for the Cauchy problem
//! u_tt - c(u_x)² u_xx = 0 on the line.
//!
//! The solution is evolved through its Riemann invariants r = u_t + G(u_x),
//! s = u_t - G(u_x) (G = ∫₀^θ c), which are transported unchanged along the
//! characteristics dx/dt = ∓c. The scaled slopes F = √c·r_x obey a Riccati
//! equation dF/dt = γF² along the same curves, so gradient blowup shows up
//! as a pole of F; the crates' modules cover the pieces:
//!
//! * [`wavespeed`] — speed families c(θ), G, G⁻¹, γ and structural validators
//! * [`initialdata`] — profile pairs (φ, ψ), initial invariants, blowup vs
//!   global-existence classification
//! * [`solver`] — semi-Lagrangian grid evolution plus the finite-volume
//!   p-system oracle
//! * [`characteristics`] — characteristic tracing, Riccati integration and
//!   pole extrapolation
//! * [`lifespan`] — ε sweeps and scaling-law fits (power and exponential)
//! * [`config`] / [`cli`] — the experiment-file format and the `charwave`
//!   command-line surface

pub mod characteristics;
pub mod cli;
pub mod config;
mod error;
pub mod initialdata;
pub mod lifespan;
pub mod numeric;
pub mod report;
pub mod solver;
pub mod wavespeed;

pub use error::{Error, Result};
pub use initialdata::{ConditionReport, InitialData, Profile, ProfileKind};
pub use solver::{RiemannField, Simulation, SolverConfig, StopInfo, StopReason};
pub use wavespeed::{SpeedClaim, SpeedKind, WaveSpeed};
