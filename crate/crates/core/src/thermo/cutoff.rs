//! Concave cutoff functions for renormalized entropies.
//!
//! A cutoff is increasing, concave, bounded above, acts as the identity on
//! `(-inf, 1]`, and matches the law's boundary entropy value at the left end
//! of its domain. The scaling `K chi(. / K)` widens the identity range to
//! `(-inf, K]` while keeping every structural property.

use std::sync::Arc;

use crate::state::ConsState;
use crate::thermo::law::{CurveFn, GasModel, ThermoError};

#[derive(Clone)]
enum ChiBase {
    /// Identity below 1, saturating exponential above, bounded by `bound`.
    Saturating { bound: f64 },
    /// User-supplied base (contract checked when used).
    Custom { value: CurveFn, bound: f64 },
}

/// A cutoff `chi`, possibly rescaled.
#[derive(Clone)]
pub struct CutoffFunction {
    base: ChiBase,
    scale: f64,
}

impl CutoffFunction {
    /// The standard cutoff: identity below 1, concave saturation toward
    /// `bound` above. A bound of exactly 1 degenerates to `min(z, 1)`.
    pub fn saturating(bound: f64) -> Self {
        assert!(bound >= 1.0, "cutoff bound must be at least 1");
        CutoffFunction { base: ChiBase::Saturating { bound }, scale: 1.0 }
    }

    /// Custom base cutoff with a declared upper bound.
    pub fn custom(value: CurveFn, bound: f64) -> Self {
        CutoffFunction { base: ChiBase::Custom { value, bound }, scale: 1.0 }
    }

    /// The rescaled member `K chi(. / K)` of the cutoff family.
    pub fn scaled(&self, k: f64) -> Self {
        assert!(k > 0.0 && k.is_finite());
        CutoffFunction { base: self.base.clone(), scale: self.scale * k }
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Upper bound of this (rescaled) cutoff.
    pub fn upper_bound(&self) -> f64 {
        let b = match &self.base {
            ChiBase::Saturating { bound } => *bound,
            ChiBase::Custom { bound, .. } => *bound,
        };
        self.scale * b
    }

    pub fn value(&self, z: f64) -> f64 {
        if z == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        let w = z / self.scale;
        // The identity range is exact for the built-in cutoff; rescaling must
        // not introduce round-off there.
        if matches!(self.base, ChiBase::Saturating { .. }) && w <= 1.0 {
            return z;
        }
        self.scale * self.base_value(w)
    }

    fn base_value(&self, z: f64) -> f64 {
        match &self.base {
            ChiBase::Saturating { bound } => {
                let span = bound - 1.0;
                if z <= 1.0 {
                    z
                } else if span == 0.0 {
                    1.0
                } else {
                    1.0 + span * (1.0 - (-(z - 1.0) / span).exp())
                }
            }
            ChiBase::Custom { value, .. } => value(z),
        }
    }

    /// Sample-based contract check: increasing, midpoint-concave, below the
    /// declared bound. Built-in cutoffs satisfy the contract by construction
    /// and skip the sampling.
    pub fn validate(&self, lo: f64, hi: f64) -> Result<(), ThermoError> {
        if matches!(self.base, ChiBase::Saturating { .. }) {
            return Ok(());
        }
        let n = 129;
        let mut prev = f64::NEG_INFINITY;
        let mut values = Vec::with_capacity(n);
        for i in 0..n {
            let z = lo + (hi - lo) * (i as f64) / ((n - 1) as f64);
            let v = self.value(z);
            if v > self.upper_bound() + 1e-10 * self.upper_bound().abs().max(1.0) {
                return Err(ThermoError::CutoffContract("value exceeds declared bound"));
            }
            if v < prev {
                return Err(ThermoError::CutoffContract("not increasing"));
            }
            prev = v;
            values.push(v);
        }
        for w in values.windows(3) {
            let mid = 0.5 * (w[0] + w[2]);
            if mid > w[1] + 1e-10 * w[1].abs().max(1.0) {
                return Err(ThermoError::CutoffContract("not concave"));
            }
        }
        Ok(())
    }
}

/// A curve function wrapping a closure, for custom cutoffs in tests and
/// diagnostics.
pub fn curve(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> CurveFn {
    Arc::new(f)
}

impl GasModel {
    /// The standard cutoff at this law's configured bound (2 when the law
    /// does not carry one).
    pub fn default_cutoff(&self) -> CutoffFunction {
        CutoffFunction::saturating(self.law().chi_bound().unwrap_or(2.0))
    }

    /// Renormalized total entropy `rho chi(S(ratio))` with the same branch
    /// structure as the plain total entropy, except that every massless state
    /// with zero momentum has renormalized entropy exactly 0.
    pub fn renormalized_entropy<const N: usize>(
        &self,
        chi: &CutoffFunction,
        s: &ConsState<N>,
    ) -> Result<f64, ThermoError> {
        let boundary = self.law().boundary_entropy();
        let lo = if boundary.is_finite() { boundary + 1e-6 } else { -40.0 };
        chi.validate(lo, lo.max(0.0) + 50.0)?;
        debug_assert!(s.in_phase_space());
        if s.rho == 0.0 {
            return Ok(if s.momentum.iter().all(|&m| m == 0.0) {
                0.0
            } else {
                f64::NEG_INFINITY
            });
        }
        let margin = self.admissibility_margin(s);
        let slack = self.admissibility_slack(s);
        if margin > slack {
            let e = (s.total_energy - s.kinetic_energy()) / s.rho;
            let ratio = self.entropy_ratio(s.rho, e);
            Ok(s.rho * chi.value(self.law().entropy(ratio)))
        } else if margin >= -slack {
            Ok(s.rho * chi.value(boundary))
        } else {
            Ok(f64::NEG_INFINITY)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::ConsState;
    use crate::thermo::law::GasModel;

    #[test]
    fn identity_below_scale() {
        let chi = CutoffFunction::saturating(2.0);
        let chi10 = chi.scaled(10.0);
        assert_eq!(chi10.value(5.0), 5.0);
        assert_eq!(chi10.value(-3.0), -3.0);
        assert!(chi10.value(12.0) < 12.0);
        assert!(chi10.value(1e9) <= chi10.upper_bound());
    }

    #[test]
    fn scale_one_is_base() {
        let chi = CutoffFunction::saturating(2.0);
        let same = chi.scaled(1.0);
        for z in [-2.0, 0.5, 1.0, 3.0, 10.0] {
            assert_eq!(chi.value(z), same.value(z));
        }
    }

    #[test]
    fn pointwise_monotone_in_scale() {
        let chi = CutoffFunction::saturating(2.0);
        for z in [0.5, 2.0, 7.0, 40.0] {
            let mut prev = f64::NEG_INFINITY;
            for k in 0..=10 {
                let v = chi.scaled(2f64.powi(k)).value(z);
                assert!(v >= prev - 1e-14);
                assert!(v <= z + 1e-14);
                prev = v;
            }
            // converges to the identity
            assert!((chi.scaled(2f64.powi(10)).value(z) - z).abs() < 1e-12);
        }
    }

    #[test]
    fn renormalized_entropy_vacuum_is_zero() {
        let m = GasModel::perfect_gas(1.4).unwrap();
        let chi = CutoffFunction::saturating(2.0);
        let v = m
            .renormalized_entropy(&chi, &ConsState::new(0.0, [0.0], 1.0))
            .unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn renormalized_matches_total_when_inside_identity_range() {
        // state with S(ratio) = 0 and chi_10: values agree exactly
        let m = GasModel::perfect_gas(2.0).unwrap();
        let chi = CutoffFunction::saturating(2.0).scaled(10.0);
        let s = ConsState::new(1.0, [0.0], 1.0);
        let total = m.total_entropy(&s);
        assert_eq!(total, 0.0);
        assert_eq!(m.renormalized_entropy(&chi, &s).unwrap(), total);
    }

    #[test]
    fn renormalized_respects_upper_bound() {
        let m = GasModel::perfect_gas(1.4).unwrap();
        let chi = CutoffFunction::saturating(1.0);
        // huge entropy state: S(ratio) large
        let s = ConsState::new(1.0, [0.0], 1e20);
        let v = m.renormalized_entropy(&chi, &s).unwrap();
        assert!(v <= s.rho * chi.upper_bound() + 1e-12);
    }

    #[test]
    fn default_cutoff_takes_the_configured_bound() {
        use crate::thermo::law::LawSpec;
        let m = GasModel::with_chi_bound(1.4, LawSpec::Perfect, Some(3.5)).unwrap();
        assert_eq!(m.default_cutoff().upper_bound(), 3.5);
        let m = GasModel::perfect_gas(1.4).unwrap();
        assert_eq!(m.default_cutoff().upper_bound(), 2.0);
    }

    #[test]
    fn custom_cutoff_contract_violations() {
        let m = GasModel::perfect_gas(1.4).unwrap();
        let s = ConsState::new(1.0, [0.0], 1.0);
        // decreasing: fails
        let bad = CutoffFunction::custom(curve(|z| -z), 10.0);
        assert!(m.renormalized_entropy(&bad, &s).is_err());
        // convex: fails
        let bad = CutoffFunction::custom(curve(|z| z * z), f64::INFINITY);
        assert!(m.renormalized_entropy(&bad, &s).is_err());
    }
}
