//! Hypothesis verification for entropy laws.
//!
//! Checks, on a sample grid of the law's domain:
//!   * positive slope `S' > 0`,
//!   * the stability combination `(gamma - 1) S' + gamma S'' ratio < 0`,
//!   * log-bounded growth with a fitted constant,
//!   * divergence of `S'` at the cold-pressure end,
//!   * the boundary limit class of `S` (`0` or `-inf`).

use std::fmt;

use crate::thermo::law::{BoundaryClass, EntropyLaw, GasModel};

#[derive(Clone, Debug)]
pub struct Violation {
    pub check: &'static str,
    pub at: f64,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct CheckLine {
    pub name: &'static str,
    pub ok: bool,
    pub worst_residual: f64,
    pub at: f64,
}

/// Outcome of `verify_hypotheses`. `passed` holds exactly when `violations`
/// is empty.
#[derive(Clone, Debug)]
pub struct HypothesisReport {
    pub passed: bool,
    pub violations: Vec<Violation>,
    pub checks: Vec<CheckLine>,
    /// Fitted constant of the growth bound `S(ratio) <= C (1 + |ln ratio|)`.
    pub fitted_growth_constant: f64,
    pub boundary_class: BoundaryClass,
}

impl HypothesisReport {
    pub(crate) fn empty() -> Self {
        HypothesisReport {
            passed: true,
            violations: Vec::new(),
            checks: Vec::new(),
            fitted_growth_constant: 0.0,
            boundary_class: BoundaryClass::Indeterminate,
        }
    }
}

impl fmt::Display for HypothesisReport {
    /// One line per check: `check-name status worst-residual at-Z`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in &self.checks {
            writeln!(
                f,
                "{} {} {:.16e} {:.16e}",
                line.name,
                if line.ok { "ok" } else { "fail" },
                line.worst_residual,
                line.at
            )?;
        }
        writeln!(f, "# fitted-growth-constant {:.16e}", self.fitted_growth_constant)?;
        writeln!(f, "# boundary-class {}", self.boundary_class)
    }
}

/// Log-spaced sample grid over the law's domain, used for validated
/// construction.
pub fn default_sample_grid(model: &GasModel) -> Vec<f64> {
    let base = model.law().cold_pressure();
    let scale = base.max(1.0);
    let mut grid = Vec::with_capacity(240);
    for k in 0..240 {
        // offsets from 1e-6 to 1e6 relative to the domain scale
        let exp = -6.0 + 12.0 * (k as f64) / 239.0;
        grid.push(base + scale * 10f64.powf(exp));
    }
    grid
}

/// Estimate the boundary class of `S` at the cold-pressure end by probing.
pub(crate) fn probe_boundary_class(law: &EntropyLaw) -> BoundaryClass {
    let base = law.cold_pressure();
    let scale = base.max(1.0);
    let mut values = Vec::new();
    for k in 2..=12 {
        let ratio = base + scale * 10f64.powi(-k);
        let v = law.entropy(ratio);
        if v.is_nan() {
            return BoundaryClass::Indeterminate;
        }
        values.push(v);
    }
    let last = *values.last().unwrap();
    if last.abs() < 1e-2 {
        return BoundaryClass::Zero;
    }
    // Diverging to -inf: strictly decreasing tail, already very negative.
    let decreasing = values.windows(2).all(|w| w[1] < w[0]);
    if decreasing && last < -10.0 {
        return BoundaryClass::MinusInfinity;
    }
    BoundaryClass::Indeterminate
}

/// Estimate `lim_{rho -> 0+} rho S((gamma - 1) E / rho^gamma)` at `E = 1`.
/// Zero for every law with log-bounded growth; divergence is reported as an
/// infinity of the matching sign.
pub(crate) fn probe_vacuum_limit(law: &EntropyLaw, gamma: f64) -> f64 {
    let mut prev = f64::NAN;
    for k in 1..=60 {
        let rho = 10f64.powi(-k);
        let ratio = (gamma - 1.0) / rho.powf(gamma);
        if ratio <= law.cold_pressure() {
            continue;
        }
        let v = rho * law.entropy(ratio);
        if !v.is_finite() {
            return if v > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY };
        }
        if k > 20 && v.abs() < 1e-12 {
            return 0.0;
        }
        if k > 20 && prev.is_finite() && v.abs() > 2.0 * prev.abs() && v.abs() > 1.0 {
            return if v > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY };
        }
        prev = v;
    }
    if prev.is_finite() && prev.abs() < 1e-9 {
        0.0
    } else {
        prev
    }
}

/// Run all hypothesis checks at the given samples (each above the threshold).
pub fn verify_hypotheses(model: &GasModel, ratio_samples: &[f64]) -> HypothesisReport {
    let law = model.law();
    let gamma = model.gamma();
    let base = law.cold_pressure();
    assert!(
        ratio_samples.iter().all(|&z| z > base),
        "hypothesis samples must lie above the cold-pressure threshold"
    );

    let mut violations = Vec::new();
    let mut checks = Vec::new();

    // S' > 0
    {
        let mut worst = f64::INFINITY;
        let mut at = f64::NAN;
        for &z in ratio_samples {
            let s1 = law.entropy_slope(z);
            if s1 < worst {
                worst = s1;
                at = z;
            }
        }
        let ok = worst > 0.0;
        if !ok {
            violations.push(Violation { check: "s-slope-positive", at, residual: worst });
        }
        checks.push(CheckLine { name: "s-slope-positive", ok, worst_residual: worst, at });
    }

    // (gamma - 1) S' + gamma S'' ratio < 0
    {
        let mut worst = f64::NEG_INFINITY;
        let mut at = f64::NAN;
        for &z in ratio_samples {
            let combo = (gamma - 1.0) * law.entropy_slope(z) + gamma * law.entropy_curvature(z) * z;
            if combo > worst {
                worst = combo;
                at = z;
            }
        }
        let ok = worst < 0.0;
        if !ok {
            violations.push(Violation { check: "stability-combination", at, residual: worst });
        }
        checks.push(CheckLine { name: "stability-combination", ok, worst_residual: worst, at });
    }

    // Growth bound: fit C = sup S / (1 + |ln ratio|) on a log-spaced grid
    // extended beyond the samples, and flag super-logarithmic growth through
    // the ratio still climbing at the right edge.
    let fitted_c;
    {
        let hi = ratio_samples.iter().cloned().fold(1.0f64, f64::max).max(1e8);
        let lo = base + base.max(1.0) * 1e-9;
        let mut grid: Vec<f64> = (0..400)
            .map(|k| {
                let t = k as f64 / 399.0;
                lo * (hi / lo).powf(t)
            })
            .collect();
        grid.extend_from_slice(ratio_samples);
        let ratio_of = |z: f64| law.entropy(z) / (1.0 + z.ln().abs());
        let mut c = 0.0f64;
        for &z in &grid {
            c = c.max(ratio_of(z));
        }
        fitted_c = c.max(0.0);
        // edge growth over the last decade
        let edge = ratio_of(hi);
        let inner = ratio_of(hi / 10.0);
        let growth = if inner.abs() > 1e-300 { edge / inner } else { 1.0 };
        let ok = !(edge > 0.0 && growth > 1.05);
        if !ok {
            violations.push(Violation { check: "growth-bound", at: hi, residual: growth - 1.05 });
        }
        checks.push(CheckLine {
            name: "growth-bound",
            ok,
            worst_residual: growth - 1.05,
            at: hi,
        });
    }

    // S' diverges at the cold-pressure end.
    {
        let scale = base.max(1.0);
        let mut slopes = Vec::new();
        for k in 2..=10 {
            slopes.push(law.entropy_slope(base + scale * 10f64.powi(-k)));
        }
        let increasing = slopes.windows(2).all(|w| w[1] > w[0]);
        let last = *slopes.last().unwrap();
        let ok = increasing && last > 1e4;
        if !ok {
            violations.push(Violation {
                check: "slope-divergence",
                at: base + scale * 1e-10,
                residual: last,
            });
        }
        checks.push(CheckLine {
            name: "slope-divergence",
            ok,
            worst_residual: last,
            at: base + scale * 1e-10,
        });
    }

    // Boundary limit class.
    let boundary_class = law.boundary_class();
    {
        let ok = boundary_class != BoundaryClass::Indeterminate;
        let scale = base.max(1.0);
        let at = base + scale * 1e-12;
        let residual = law.entropy(at);
        if !ok {
            violations.push(Violation { check: "boundary-limit", at, residual });
        }
        checks.push(CheckLine { name: "boundary-limit", ok, worst_residual: residual, at });
    }

    HypothesisReport {
        passed: violations.is_empty(),
        violations,
        checks,
        fitted_growth_constant: fitted_c,
        boundary_class,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermo::law::{GasModel, LawSpec};

    #[test]
    fn perfect_gas_passes() {
        let m = GasModel::unvalidated(1.4, LawSpec::Perfect).unwrap();
        let report = verify_hypotheses(&m, &default_sample_grid(&m));
        assert!(report.passed, "violations: {:?}", report.violations);
        assert_eq!(report.boundary_class, BoundaryClass::MinusInfinity);
        // fitted C stays below the analytic asymptote max(1, 1/(gamma-1))
        assert!(report.fitted_growth_constant <= 1.0 / 0.4 + 1e-9);
    }

    #[test]
    fn square_law_fails_stability() {
        let m = GasModel::unvalidated(1.4, LawSpec::Power { exponent: 2.0 }).unwrap();
        let report = verify_hypotheses(&m, &default_sample_grid(&m));
        assert!(!report.passed);
        assert!(report.violations.iter().any(|v| v.check == "stability-combination"));
        // (gamma-1) 2Z + 2 gamma Z > 0 at every sample
        let worst = report
            .checks
            .iter()
            .find(|c| c.name == "stability-combination")
            .unwrap()
            .worst_residual;
        assert!(worst > 0.0);
    }

    #[test]
    fn third_law_boundary_class_zero() {
        let m = GasModel::third_law(2.0).unwrap();
        assert_eq!(m.hypothesis_report().boundary_class, BoundaryClass::Zero);
        let m = GasModel::cold_pressure_gas(1.4, 2.5).unwrap();
        assert_eq!(m.hypothesis_report().boundary_class, BoundaryClass::Zero);
    }

    #[test]
    fn report_serialization_one_line_per_check() {
        let m = GasModel::perfect_gas(1.4).unwrap();
        let text = m.hypothesis_report().to_string();
        let check_lines: Vec<_> =
            text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(check_lines.len(), m.hypothesis_report().checks.len());
        for line in check_lines {
            let fields: Vec<_> = line.split_whitespace().collect();
            assert_eq!(fields.len(), 4);
            assert!(fields[1] == "ok" || fields[1] == "fail");
        }
    }

    #[test]
    fn vacuum_limit_zero_for_shipped_laws() {
        for gamma in [1.4, 5.0 / 3.0, 2.0] {
            let m = GasModel::perfect_gas(gamma).unwrap();
            assert_eq!(m.law().vacuum_limit(), 0.0);
            let m = GasModel::third_law(gamma).unwrap();
            assert_eq!(m.law().vacuum_limit(), 0.0);
            let m = GasModel::cold_pressure_gas(gamma, 1.0).unwrap();
            assert_eq!(m.law().vacuum_limit(), 0.0);
        }
    }
}
