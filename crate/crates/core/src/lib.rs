//! Maximal-dissipation machinery for the complete compressible Euler system
//! in one space dimension.
//!
//! The crate provides:
//!
//! * [`thermo`] — gamma-law equation of state with a family of entropy laws
//!   (perfect gas, third-law, cold-pressure), vacuum-consistent extended
//!   entropies, conservative-variable gradients, and a thermodynamic
//!   stability verifier;
//! * [`relenergy`] — ballistic free energy and the coercive relative energy
//!   in standard and conservative variables (Bregman form);
//! * [`measures`] — atomic Young measure fields and nonnegative
//!   entropy-production cell measures, the local partial order, chain
//!   suprema, maximal selection, and the concentration-defect inequality;
//! * [`solver`] — finite-volume solver on the periodic torus with
//!   entropy-residual extraction, an exact Riemann solution for the perfect
//!   gas, ensembles, and runtime diagnostics;
//! * [`weakstrong`] — the weak-strong uniqueness residual and its
//!   Gronwall-type growth check;
//! * [`config`] / [`io`] — key-value scenario files and the text formats for
//!   trajectories, Young measures, cell measures, and reports.

pub mod config;
pub mod io;
pub mod measures;
pub mod relenergy;
pub mod solver;
pub mod state;
pub mod thermo;
pub mod weakstrong;

pub use state::{kinetic_energy, ConsState, StandardState};
pub use thermo::{GasModel, LawSpec, ThermoError};
