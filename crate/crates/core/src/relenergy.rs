//! Ballistic free energy and the relative energy functional.
//!
//! The relative energy measures the distance of a conservative phase-space
//! point from a strictly admissible reference state. It is nonnegative,
//! vanishes exactly at the reference, and equals `-theta_ref` times the
//! Bregman divergence of the concave total entropy. The Bregman form is the
//! runtime evaluation path (cancellation-free near the reference); the
//! direct form is kept for cross-checking.

use crate::state::{ConsState, StandardState};
use crate::thermo::{EntropyGradient, GasModel, ThermoError};

/// Pointwise relative energy; `+inf` for inadmissible candidate states.
pub type RelativeEnergyValue = f64;

/// Ballistic free energy `rho (e(rho, theta) - reference_theta * s(rho, theta))`.
pub fn ballistic_free_energy(
    model: &GasModel,
    rho: f64,
    theta: f64,
    reference_theta: f64,
) -> Result<f64, ThermoError> {
    if !(reference_theta > 0.0) {
        return Err(ThermoError::NonPositiveTemperature(reference_theta));
    }
    let e = model.specific_internal_energy(rho, theta)?;
    let s = model.specific_entropy(rho, e)?;
    Ok(rho * (e - reference_theta * s))
}

/// Reference state with every derived quantity the relative energy needs,
/// prepared once and reused across many candidate evaluations.
#[derive(Clone, Debug)]
pub struct PreparedReference<const N: usize> {
    pub standard: StandardState<N>,
    pub conservative: ConsState<N>,
    pub theta: f64,
    pub pressure: f64,
    pub internal_energy: f64,
    pub specific_entropy: f64,
    total_entropy: f64,
    gradient: EntropyGradient<N>,
    /// `d H_theta / d rho` at the reference: `e - theta s + p / rho`.
    pub free_energy_slope: f64,
}

impl<const N: usize> PreparedReference<N> {
    pub fn new(model: &GasModel, reference: &StandardState<N>) -> Result<Self, ThermoError> {
        let conservative = model.to_conservative(reference)?;
        if !model.is_strictly_admissible(&conservative) {
            return Err(ThermoError::NotStrictlyAdmissible);
        }
        let e = model.specific_internal_energy(reference.rho, reference.theta)?;
        let s = model.specific_entropy(reference.rho, e)?;
        let p = model.pressure(reference.rho, e)?;
        let total_entropy = model.total_entropy(&conservative);
        let gradient = model.entropy_gradient(&conservative)?;
        Ok(PreparedReference {
            standard: *reference,
            conservative,
            theta: reference.theta,
            pressure: p,
            internal_energy: e,
            specific_entropy: s,
            total_entropy,
            gradient,
            free_energy_slope: e - reference.theta * s + p / reference.rho,
        })
    }

    /// Bregman-form relative energy: `-theta * [S(s) - S(ref) - dS(ref).(s - ref)]`.
    pub fn relative_energy(&self, model: &GasModel, s: &ConsState<N>) -> RelativeEnergyValue {
        let entropy = model.total_entropy(s);
        if entropy == f64::NEG_INFINITY {
            return f64::INFINITY;
        }
        let mut bracket = entropy - self.total_entropy;
        bracket -= self.gradient.d_rho * (s.rho - self.conservative.rho);
        for k in 0..N {
            bracket -=
                self.gradient.d_momentum[k] * (s.momentum[k] - self.conservative.momentum[k]);
        }
        bracket -= self.gradient.d_energy * (s.total_energy - self.conservative.total_energy);
        -self.theta * bracket + 0.0
    }

    /// Direct form of the relative energy, used for cross-checks only.
    pub fn relative_energy_direct(
        &self,
        model: &GasModel,
        s: &ConsState<N>,
    ) -> RelativeEnergyValue {
        let entropy = model.total_entropy(s);
        if entropy == f64::NEG_INFINITY {
            return f64::INFINITY;
        }
        let mut v = s.total_energy - self.theta * entropy;
        for k in 0..N {
            v -= s.momentum[k] * self.standard.velocity[k];
        }
        v += 0.5 * s.rho * self.standard.speed_squared();
        v += self.pressure;
        v -= self.free_energy_slope * s.rho;
        v + 0.0
    }
}

/// Relative energy of a conservative state against a strictly admissible
/// reference (Bregman evaluation path).
pub fn relative_energy_conservative<const N: usize>(
    model: &GasModel,
    s: &ConsState<N>,
    reference: &StandardState<N>,
) -> Result<RelativeEnergyValue, ThermoError> {
    let prepared = PreparedReference::new(model, reference)?;
    Ok(prepared.relative_energy(model, s))
}

/// Relative energy in standard variables, built from the ballistic free
/// energy.
pub fn relative_energy_standard<const N: usize>(
    model: &GasModel,
    state: &StandardState<N>,
    reference: &StandardState<N>,
) -> Result<RelativeEnergyValue, ThermoError> {
    let prepared = PreparedReference::new(model, reference)?;
    let free_state = ballistic_free_energy(model, state.rho, state.theta, reference.theta)?;
    let free_ref =
        prepared.conservative.rho * (prepared.internal_energy
            - reference.theta * prepared.specific_entropy);
    let mut du2 = 0.0;
    for k in 0..N {
        let d = state.velocity[k] - reference.velocity[k];
        du2 += d * d;
    }
    let v = 0.5 * state.rho * du2 + free_state
        - prepared.free_energy_slope * (state.rho - reference.rho)
        - free_ref;
    Ok(v + 0.0)
}

/// Absolute difference between the direct and Bregman forms of the relative
/// energy; contractually at most `1e-10 * max(1, value)` on interior states.
pub fn bregman_gap<const N: usize>(
    model: &GasModel,
    s: &ConsState<N>,
    reference: &StandardState<N>,
) -> Result<f64, ThermoError> {
    if !model.is_strictly_admissible(s) {
        return Err(ThermoError::NotStrictlyAdmissible);
    }
    let prepared = PreparedReference::new(model, reference)?;
    let a = prepared.relative_energy(model, s);
    let b = prepared.relative_energy_direct(model, s);
    Ok((a - b).abs())
}
