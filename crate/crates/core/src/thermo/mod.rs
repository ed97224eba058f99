//! Equation of state, entropy family, vacuum-consistent extensions, and the
//! thermodynamic-stability verifier.

pub mod cutoff;
pub mod law;
pub mod verify;

pub use cutoff::{curve, CutoffFunction};
pub use law::{
    BoundaryClass, CurveFn, EntropyGradient, EntropyLaw, GasModel, LawSpec, LawVariant,
    RhoPressureHessian, ThermoError,
};
pub use verify::{verify_hypotheses, CheckLine, HypothesisReport, Violation};
