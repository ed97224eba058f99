//! Entropy laws S and the gas model.
//!
//! A gas is described by the adiabatic exponent `gamma` together with an
//! entropy law: a scalar function S of the ratio `p / rho^gamma`, strictly
//! increasing, with the stability combination
//! `(gamma - 1) S' + gamma S'' * ratio < 0` on its domain
//! `(cold_pressure, inf)`, a divergent slope at the left end of the domain,
//! and a boundary limit of S in `{0, -inf}`.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::state::{ConsState, StandardState};
use crate::thermo::verify::{self, HypothesisReport};

pub type CurveFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Which structural family an entropy law belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LawVariant {
    /// `cold_pressure = 0`, boundary limit `-inf` (classical log entropy).
    PerfectGas,
    /// `cold_pressure = 0`, boundary limit `0` (entropy vanishes with the
    /// temperature).
    ThirdLaw,
    /// `cold_pressure > 0`, boundary limit `0`.
    ColdPressure,
    /// User-supplied evaluators, not necessarily satisfying the hypotheses.
    Custom,
}

impl fmt::Display for LawVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LawVariant::PerfectGas => "perfect",
            LawVariant::ThirdLaw => "third-law",
            LawVariant::ColdPressure => "cold-pressure",
            LawVariant::Custom => "custom",
        };
        f.write_str(s)
    }
}

/// Boundary behavior of S at the cold-pressure end of its domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryClass {
    Zero,
    MinusInfinity,
    /// Probing could not resolve the limit into either admissible class.
    Indeterminate,
}

impl fmt::Display for BoundaryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BoundaryClass::Zero => "zero",
            BoundaryClass::MinusInfinity => "minus-infinity",
            BoundaryClass::Indeterminate => "indeterminate",
        };
        f.write_str(s)
    }
}

#[derive(Clone)]
enum Curve {
    /// S(ratio) = scale * ln(ratio)
    Log { scale: f64 },
    /// S(ratio) = scale * ln(1 + (ratio - cold_pressure)^alpha)
    SaturatedLog { scale: f64, cold_pressure: f64, alpha: f64 },
    /// S(ratio) = ratio^exponent (diagnostic law; fails the growth bound)
    Power { exponent: f64 },
    Custom { value: CurveFn, slope: CurveFn, curvature: CurveFn },
}

impl fmt::Debug for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Curve::Log { scale } => write!(f, "Log {{ scale: {scale} }}"),
            Curve::SaturatedLog { scale, cold_pressure, alpha } => write!(
                f,
                "SaturatedLog {{ scale: {scale}, cold_pressure: {cold_pressure}, alpha: {alpha} }}"
            ),
            Curve::Power { exponent } => write!(f, "Power {{ exponent: {exponent} }}"),
            Curve::Custom { .. } => f.write_str("Custom {{ .. }}"),
        }
    }
}

/// One entropy law: threshold, variant tag, and the three evaluators.
#[derive(Clone, Debug)]
pub struct EntropyLaw {
    variant: LawVariant,
    cold_pressure: f64,
    chi_bound: Option<f64>,
    curve: Curve,
    /// `lim_{rho -> 0+} rho S((gamma-1) E / rho^gamma)` (E > 0), estimated
    /// numerically at construction; `0` for every law with log-bounded growth.
    vacuum_limit: f64,
    boundary_class: BoundaryClass,
}

impl EntropyLaw {
    pub fn variant(&self) -> LawVariant {
        self.variant
    }

    /// Left end of the law's domain: the cold-pressure threshold.
    pub fn cold_pressure(&self) -> f64 {
        self.cold_pressure
    }

    pub fn chi_bound(&self) -> Option<f64> {
        self.chi_bound
    }

    pub fn boundary_class(&self) -> BoundaryClass {
        self.boundary_class
    }

    /// Limit of the total entropy along vanishing density at positive
    /// energy; exactly zero for laws with log-bounded growth.
    pub fn vacuum_limit(&self) -> f64 {
        self.vacuum_limit
    }

    /// S(ratio); defined for `ratio > cold_pressure`.
    pub fn entropy(&self, ratio: f64) -> f64 {
        match &self.curve {
            Curve::Log { scale } => scale * ratio.ln(),
            Curve::SaturatedLog { scale, cold_pressure, alpha } => {
                scale * (1.0 + (ratio - cold_pressure).powf(*alpha)).ln()
            }
            Curve::Power { exponent } => ratio.powf(*exponent),
            Curve::Custom { value, .. } => value(ratio),
        }
    }

    /// S'(ratio).
    pub fn entropy_slope(&self, ratio: f64) -> f64 {
        match &self.curve {
            Curve::Log { scale } => scale / ratio,
            Curve::SaturatedLog { scale, cold_pressure, alpha } => {
                let w = ratio - cold_pressure;
                let u = w.powf(*alpha);
                scale * alpha * w.powf(alpha - 1.0) / (1.0 + u)
            }
            Curve::Power { exponent } => exponent * ratio.powf(exponent - 1.0),
            Curve::Custom { slope, .. } => slope(ratio),
        }
    }

    /// S''(ratio).
    pub fn entropy_curvature(&self, ratio: f64) -> f64 {
        match &self.curve {
            Curve::Log { scale } => -scale / (ratio * ratio),
            Curve::SaturatedLog { scale, cold_pressure, alpha } => {
                let w = ratio - cold_pressure;
                let u = w.powf(*alpha);
                let denom = (1.0 + u) * (1.0 + u);
                scale * alpha * w.powf(alpha - 2.0) * ((alpha - 1.0) - u) / denom
            }
            Curve::Power { exponent } => {
                exponent * (exponent - 1.0) * ratio.powf(exponent - 2.0)
            }
            Curve::Custom { curvature, .. } => curvature(ratio),
        }
    }

    /// Entropy value on the boundary of the admissible region, per atom of
    /// density: `S(cold_pressure+)`, i.e. 0 or `-inf`.
    pub fn boundary_entropy(&self) -> f64 {
        match self.boundary_class {
            BoundaryClass::Zero => 0.0,
            BoundaryClass::MinusInfinity => f64::NEG_INFINITY,
            // Should not be reachable for validated laws; treat like the
            // upper semi-continuous extension.
            BoundaryClass::Indeterminate => f64::NEG_INFINITY,
        }
    }
}

/// Construction-time description of an entropy law.
#[derive(Clone)]
pub enum LawSpec {
    Perfect,
    ThirdLaw,
    ColdPressure { cold_pressure: f64 },
    /// `S(ratio) = ratio^exponent`: diagnostic law used to exercise the
    /// hypothesis verifier; never passes validated construction.
    Power { exponent: f64 },
    Custom { cold_pressure: f64, value: CurveFn, slope: CurveFn, curvature: CurveFn },
}

#[derive(Debug, Error)]
pub enum ThermoError {
    #[error("gamma must exceed 1 (got {0})")]
    InvalidGamma(f64),
    #[error("cold-pressure threshold must be positive (got {0})")]
    InvalidColdPressure(f64),
    #[error("entropy law rejected by hypothesis verification ({0} violation(s))")]
    HypothesesViolated(usize),
    #[error("density must be positive (got {0})")]
    NonPositiveDensity(f64),
    #[error("internal energy must be positive (got {0})")]
    NonPositiveInternalEnergy(f64),
    #[error("temperature must be positive (got {0})")]
    NonPositiveTemperature(f64),
    #[error("state at or below the cold-pressure threshold (ratio {ratio} <= {threshold})")]
    BelowColdThreshold { ratio: f64, threshold: f64 },
    #[error("operation undefined at vacuum")]
    Vacuum,
    #[error("state is not strictly admissible")]
    NotStrictlyAdmissible,
    #[error("cutoff function violates its contract: {0}")]
    CutoffContract(&'static str),
    #[error("temperature inversion failed to bracket a solution")]
    InversionBracket,
}

/// Gamma-law gas with an entropy law; immutable once built.
#[derive(Clone, Debug)]
pub struct GasModel {
    gamma: f64,
    law: EntropyLaw,
    report: HypothesisReport,
}

impl GasModel {
    /// Build and validate: the law must pass the hypothesis verifier on the
    /// default sample grid.
    pub fn new(gamma: f64, spec: LawSpec) -> Result<Self, ThermoError> {
        Self::with_chi_bound(gamma, spec, None)
    }

    pub fn with_chi_bound(
        gamma: f64,
        spec: LawSpec,
        chi_bound: Option<f64>,
    ) -> Result<Self, ThermoError> {
        let model = Self::unvalidated_with_chi_bound(gamma, spec, chi_bound)?;
        if !model.report.passed {
            return Err(ThermoError::HypothesesViolated(model.report.violations.len()));
        }
        Ok(model)
    }

    /// Build without rejecting hypothesis violations. The report is still
    /// computed and kept, so diagnostic flows (`verify-eos`) can inspect a
    /// failing law.
    pub fn unvalidated(gamma: f64, spec: LawSpec) -> Result<Self, ThermoError> {
        Self::unvalidated_with_chi_bound(gamma, spec, None)
    }

    pub fn unvalidated_with_chi_bound(
        gamma: f64,
        spec: LawSpec,
        chi_bound: Option<f64>,
    ) -> Result<Self, ThermoError> {
        if !(gamma > 1.0) || !gamma.is_finite() {
            return Err(ThermoError::InvalidGamma(gamma));
        }
        let scale = 1.0 / (gamma - 1.0);
        let (variant, cold_pressure, curve) = match spec {
            LawSpec::Perfect => (LawVariant::PerfectGas, 0.0, Curve::Log { scale }),
            LawSpec::ThirdLaw => (
                LawVariant::ThirdLaw,
                0.0,
                Curve::SaturatedLog { scale, cold_pressure: 0.0, alpha: 0.5 / gamma },
            ),
            LawSpec::ColdPressure { cold_pressure } => {
                if !(cold_pressure > 0.0) || !cold_pressure.is_finite() {
                    return Err(ThermoError::InvalidColdPressure(cold_pressure));
                }
                (
                    LawVariant::ColdPressure,
                    cold_pressure,
                    Curve::SaturatedLog { scale, cold_pressure, alpha: 0.5 / gamma },
                )
            }
            LawSpec::Power { exponent } => (LawVariant::Custom, 0.0, Curve::Power { exponent }),
            LawSpec::Custom { cold_pressure, value, slope, curvature } => {
                if cold_pressure < 0.0 || !cold_pressure.is_finite() {
                    return Err(ThermoError::InvalidColdPressure(cold_pressure));
                }
                (LawVariant::Custom, cold_pressure, Curve::Custom { value, slope, curvature })
            }
        };
        let mut law = EntropyLaw {
            variant,
            cold_pressure,
            chi_bound,
            curve,
            vacuum_limit: 0.0,
            boundary_class: BoundaryClass::Indeterminate,
        };
        law.boundary_class = verify::probe_boundary_class(&law);
        law.vacuum_limit = verify::probe_vacuum_limit(&law, gamma);
        let mut model = GasModel { gamma, law, report: HypothesisReport::empty() };
        model.report = verify::verify_hypotheses(&model, &verify::default_sample_grid(&model));
        Ok(model)
    }

    pub fn perfect_gas(gamma: f64) -> Result<Self, ThermoError> {
        Self::new(gamma, LawSpec::Perfect)
    }

    pub fn third_law(gamma: f64) -> Result<Self, ThermoError> {
        Self::new(gamma, LawSpec::ThirdLaw)
    }

    pub fn cold_pressure_gas(gamma: f64, cold_pressure: f64) -> Result<Self, ThermoError> {
        Self::new(gamma, LawSpec::ColdPressure { cold_pressure })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `c_v = 1 / (gamma - 1)`, always derived.
    pub fn heat_capacity(&self) -> f64 {
        1.0 / (self.gamma - 1.0)
    }

    pub fn law(&self) -> &EntropyLaw {
        self.law_ref()
    }

    fn law_ref(&self) -> &EntropyLaw {
        &self.law
    }

    /// Hypothesis report computed at construction.
    pub fn hypothesis_report(&self) -> &HypothesisReport {
        &self.report
    }

    /// Caloric pressure `p = (gamma - 1) rho e`.
    pub fn pressure(&self, rho: f64, internal_energy: f64) -> Result<f64, ThermoError> {
        if !(rho > 0.0) {
            return Err(ThermoError::NonPositiveDensity(rho));
        }
        if !(internal_energy > 0.0) {
            return Err(ThermoError::NonPositiveInternalEnergy(internal_energy));
        }
        Ok((self.gamma - 1.0) * rho * internal_energy)
    }

    /// The entropy-law argument `(gamma - 1) e / rho^(gamma - 1) = p / rho^gamma`.
    pub fn entropy_ratio(&self, rho: f64, internal_energy: f64) -> f64 {
        (self.gamma - 1.0) * internal_energy / rho.powf(self.gamma - 1.0)
    }

    /// Specific entropy `s(rho, e) = S(ratio)`.
    pub fn specific_entropy(&self, rho: f64, internal_energy: f64) -> Result<f64, ThermoError> {
        let ratio = self.checked_ratio(rho, internal_energy)?;
        Ok(self.law.entropy(ratio))
    }

    /// Absolute temperature from `1/theta = d s / d e`.
    pub fn temperature(&self, rho: f64, internal_energy: f64) -> Result<f64, ThermoError> {
        let ratio = self.checked_ratio(rho, internal_energy)?;
        let slope = self.law.entropy_slope(ratio);
        if !(slope > 0.0) {
            return Err(ThermoError::NonPositiveTemperature(slope));
        }
        Ok(rho.powf(self.gamma - 1.0) / ((self.gamma - 1.0) * slope))
    }

    fn checked_ratio(&self, rho: f64, internal_energy: f64) -> Result<f64, ThermoError> {
        if !(rho > 0.0) {
            return Err(ThermoError::NonPositiveDensity(rho));
        }
        if !(internal_energy > 0.0) {
            return Err(ThermoError::NonPositiveInternalEnergy(internal_energy));
        }
        let ratio = self.entropy_ratio(rho, internal_energy);
        if ratio <= self.law.cold_pressure {
            return Err(ThermoError::BelowColdThreshold {
                ratio,
                threshold: self.law.cold_pressure,
            });
        }
        Ok(ratio)
    }

    /// Specific internal energy `e(rho, theta)`, inverting `temperature` by
    /// bisection (monotone in `e` by thermodynamic stability). The bracket is
    /// refined until it cannot shrink further, which is well inside the
    /// contractual relative tolerance of 1e-12.
    pub fn specific_internal_energy(&self, rho: f64, theta: f64) -> Result<f64, ThermoError> {
        if !(rho > 0.0) {
            return Err(ThermoError::NonPositiveDensity(rho));
        }
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(ThermoError::NonPositiveTemperature(theta));
        }
        // e at the cold threshold; the admissible range is (e_cold, inf).
        let e_cold = self.law.cold_pressure * rho.powf(self.gamma - 1.0) / (self.gamma - 1.0);
        // Lower bracket: approach the threshold until theta drops below target.
        let mut lo = e_cold + 1e-6 * e_cold.max(1.0);
        let mut tries = 0;
        while self.temperature(rho, lo).map_or(false, |t| t >= theta) {
            lo = e_cold + (lo - e_cold) * 1e-4;
            tries += 1;
            if tries > 80 {
                return Err(ThermoError::InversionBracket);
            }
        }
        if self.temperature(rho, lo).is_err() {
            // Stepped onto the threshold numerically; nudge back up.
            lo = e_cold + (lo - e_cold).max(f64::MIN_POSITIVE) * 2.0;
        }
        // Upper bracket: grow until theta exceeds target.
        let mut hi = (e_cold + 1.0).max(2.0 * lo);
        tries = 0;
        while self.temperature(rho, hi).map_or(true, |t| t <= theta) {
            hi *= 2.0;
            tries += 1;
            if tries > 2000 || !hi.is_finite() {
                return Err(ThermoError::InversionBracket);
            }
        }
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            match self.temperature(rho, mid) {
                Ok(t) if t < theta => lo = mid,
                Ok(_) => hi = mid,
                Err(_) => lo = mid,
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Admissibility margin `E - E_kin - cold_pressure * rho^gamma / (gamma - 1)`;
    /// `-inf` when the kinetic energy is infinite.
    pub fn admissibility_margin<const N: usize>(&self, s: &ConsState<N>) -> f64 {
        let threshold = self.law.cold_pressure * s.rho.powf(self.gamma) / (self.gamma - 1.0);
        s.total_energy - s.kinetic_energy() - threshold
    }

    /// Slack used to separate the interior, boundary, and inadmissible
    /// branches of the extended entropy.
    pub fn admissibility_slack<const N: usize>(&self, s: &ConsState<N>) -> f64 {
        1e-12 * s.total_energy.abs().max(1.0)
    }

    /// Strict admissibility: positive density and margin beyond the slack.
    pub fn is_strictly_admissible<const N: usize>(&self, s: &ConsState<N>) -> bool {
        s.rho > 0.0 && self.admissibility_margin(s) > self.admissibility_slack(s)
    }

    /// Total entropy on the closed phase space, with extended-real semantics:
    /// vacuum limits on `rho = 0`, the boundary class on the cold threshold,
    /// `-inf` elsewhere.
    pub fn total_entropy<const N: usize>(&self, s: &ConsState<N>) -> f64 {
        debug_assert!(s.in_phase_space(), "total_entropy outside the phase space: {s:?}");
        if s.rho == 0.0 {
            return if s.momentum.iter().all(|&m| m == 0.0) {
                self.law.vacuum_limit
            } else {
                f64::NEG_INFINITY
            };
        }
        let margin = self.admissibility_margin(s);
        let slack = self.admissibility_slack(s);
        if margin > slack {
            let e = (s.total_energy - s.kinetic_energy()) / s.rho;
            let ratio = self.entropy_ratio(s.rho, e);
            s.rho * self.law.entropy(ratio)
        } else if margin >= -slack {
            s.rho * self.law.boundary_entropy()
        } else {
            f64::NEG_INFINITY
        }
    }

    /// Partial derivatives of the total entropy in conservative variables,
    /// valid on the strict interior of the admissible region.
    pub fn entropy_gradient<const N: usize>(
        &self,
        s: &ConsState<N>,
    ) -> Result<EntropyGradient<N>, ThermoError> {
        if !(s.rho > 0.0) {
            return Err(ThermoError::Vacuum);
        }
        if !self.is_strictly_admissible(s) {
            return Err(ThermoError::NotStrictlyAdmissible);
        }
        let e = (s.total_energy - s.kinetic_energy()) / s.rho;
        let theta = self.temperature(s.rho, e)?;
        let entropy = self.specific_entropy(s.rho, e)?;
        let pressure = self.pressure(s.rho, e)?;
        let m2 = s.momentum.iter().map(|m| m * m).sum::<f64>();
        let d_rho =
            (theta * entropy - pressure / s.rho - e + 0.5 * m2 / (s.rho * s.rho)) / theta;
        let mut d_momentum = [0.0; N];
        for k in 0..N {
            d_momentum[k] = -s.momentum[k] / (s.rho * theta);
        }
        Ok(EntropyGradient { d_rho, d_momentum, d_energy: 1.0 / theta })
    }

    /// Change of variables to the conservative state.
    pub fn to_conservative<const N: usize>(
        &self,
        s: &StandardState<N>,
    ) -> Result<ConsState<N>, ThermoError> {
        if !(s.rho > 0.0) {
            return Err(ThermoError::NonPositiveDensity(s.rho));
        }
        if !(s.theta > 0.0) {
            return Err(ThermoError::NonPositiveTemperature(s.theta));
        }
        let e = self.specific_internal_energy(s.rho, s.theta)?;
        let mut momentum = [0.0; N];
        for k in 0..N {
            momentum[k] = s.rho * s.velocity[k];
        }
        let total_energy = 0.5 * s.rho * s.speed_squared() + s.rho * e;
        Ok(ConsState { rho: s.rho, momentum, total_energy })
    }

    /// Change of variables back to standard variables; defined off vacuum on
    /// the strict interior only.
    pub fn to_standard<const N: usize>(
        &self,
        s: &ConsState<N>,
    ) -> Result<StandardState<N>, ThermoError> {
        if !(s.rho > 0.0) {
            return Err(ThermoError::Vacuum);
        }
        if !self.is_strictly_admissible(s) {
            return Err(ThermoError::NotStrictlyAdmissible);
        }
        let e = (s.total_energy - s.kinetic_energy()) / s.rho;
        let theta = self.temperature(s.rho, e)?;
        let mut velocity = [0.0; N];
        for k in 0..N {
            velocity[k] = s.momentum[k] / s.rho;
        }
        Ok(StandardState { rho: s.rho, theta, velocity })
    }

    /// Pressure in standard variables, `p(rho, theta)`.
    pub fn pressure_standard(&self, rho: f64, theta: f64) -> Result<f64, ThermoError> {
        let e = self.specific_internal_energy(rho, theta)?;
        self.pressure(rho, e)
    }
}

/// Gradient of the total entropy in conservative variables.
#[derive(Clone, Copy, Debug)]
pub struct EntropyGradient<const N: usize> {
    pub d_rho: f64,
    pub d_momentum: [f64; N],
    pub d_energy: f64,
}

/// Hessian of `h(rho, p) = rho S(p / rho^gamma)` with the concavity verdict.
#[derive(Clone, Copy, Debug)]
pub struct RhoPressureHessian {
    /// Row-major `[[d2/drho2, d2/drho dp], [d2/drho dp, d2/dp2]]`.
    pub matrix: [[f64; 2]; 2],
    pub concave: bool,
}

impl GasModel {
    /// Closed-form Hessian of `h(rho, p) = rho S(p / rho^gamma)`; negative
    /// semidefiniteness is checked through the 2x2 eigenvalues with tolerance
    /// `1e-8 * ||H||`.
    pub fn entropy_hessian_rho_p(
        &self,
        rho: f64,
        pressure: f64,
    ) -> Result<RhoPressureHessian, ThermoError> {
        if !(rho > 0.0) {
            return Err(ThermoError::NonPositiveDensity(rho));
        }
        let gamma = self.gamma;
        let ratio = pressure / rho.powf(gamma);
        if ratio <= self.law.cold_pressure {
            return Err(ThermoError::BelowColdThreshold {
                ratio,
                threshold: self.law.cold_pressure,
            });
        }
        let s1 = self.law.entropy_slope(ratio);
        let s2 = self.law.entropy_curvature(ratio);
        let d_rho_rho = gamma * ratio / rho * ((gamma - 1.0) * s1 + gamma * s2 * ratio);
        let d_p_p = s2 / rho.powf(2.0 * gamma - 1.0);
        let d_rho_p = ((1.0 - gamma) * s1 - gamma * s2 * ratio) / rho.powf(gamma);
        let matrix = [[d_rho_rho, d_rho_p], [d_rho_p, d_p_p]];
        let trace = d_rho_rho + d_p_p;
        let det = d_rho_rho * d_p_p - d_rho_p * d_rho_p;
        let disc = (trace * trace - 4.0 * det).max(0.0).sqrt();
        let max_eig = 0.5 * (trace + disc);
        let norm = (d_rho_rho * d_rho_rho + 2.0 * d_rho_p * d_rho_p + d_p_p * d_p_p).sqrt();
        let concave = max_eig <= 1e-8 * norm.max(f64::MIN_POSITIVE);
        Ok(RhoPressureHessian { matrix, concave })
    }
}
