//! Weak-strong uniqueness residual and its Gronwall-type growth check.
//!
//! Against a smooth reference flow, the residual at time `tau` is the
//! spatial integral of the relative energy of the measure plus the total
//! energy defect. It vanishes identically when the measure is the Dirac
//! field of the reference; for matched initial data it must start at zero
//! and stay at grid-error level.

use thiserror::Error;

use crate::measures::{MeasureError, YoungMeasureField};
use crate::relenergy::PreparedReference;
use crate::solver::{self, Scenario, SolverError, Trajectory};
use crate::state::{ConsState, StandardState};
use crate::thermo::{GasModel, ThermoError};

#[derive(Debug, Error)]
pub enum WeakStrongError {
    #[error("reference solution is not strictly admissible at t = {t}, x = {x}")]
    InadmissibleReference { t: f64, x: f64 },
    #[error("reference violates the entropy-transport identity (residual {0})")]
    TransportIdentity(f64),
    #[error("residual series contains a non-finite value at index {0}")]
    NonFiniteResidual(usize),
    #[error("time index {0} out of range")]
    TimeOutOfRange(usize),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Thermo(#[from] ThermoError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// Smooth reference flows with certain smoothness class.
#[derive(Clone, Debug)]
pub enum ReferenceSolution {
    /// Uniform state, an exact global solution.
    Constant { state: StandardState<1> },
    /// Sinusoidal density profile advected at constant velocity under
    /// constant pressure: an exact globally smooth solution (the wave is
    /// linearly degenerate).
    Translate { base: StandardState<1>, amplitude: f64, wavenumber: u32 },
    /// Interpolation of a stored fine-grid run. Smoothness is not certain;
    /// the transport-identity precondition decides usability.
    ResolvedNumeric { trajectory: Trajectory },
}

impl ReferenceSolution {
    /// Reference built from a scenario's initial condition, when the
    /// condition belongs to a class with certain smoothness.
    pub fn from_scenario(scenario: &Scenario) -> Option<ReferenceSolution> {
        match &scenario.ic {
            solver::InitialCondition::Constant { state } => {
                Some(ReferenceSolution::Constant { state: *state })
            }
            solver::InitialCondition::SmoothWave {
                base,
                amplitude,
                wavenumber,
                velocity_amplitude,
            } if *velocity_amplitude == 0.0 => Some(ReferenceSolution::Translate {
                base: *base,
                amplitude: *amplitude,
                wavenumber: *wavenumber,
            }),
            _ => None,
        }
    }

    pub fn class(&self) -> &'static str {
        match self {
            ReferenceSolution::Constant { .. } => "constant",
            ReferenceSolution::Translate { .. } => "translate",
            ReferenceSolution::ResolvedNumeric { .. } => "resolved-numeric",
        }
    }

    /// Evaluate the reference at time `t` and position `x`.
    pub fn eval(&self, model: &GasModel, t: f64, x: f64) -> Result<StandardState<1>, WeakStrongError> {
        match self {
            ReferenceSolution::Constant { state } => Ok(*state),
            ReferenceSolution::Translate { base, amplitude, wavenumber } => {
                let p0 = model.pressure_standard(base.rho, base.theta)?;
                let u0 = base.velocity[0];
                let phase =
                    (std::f64::consts::PI * *wavenumber as f64 * (x - u0 * t + 1.0)).sin();
                let rho = base.rho * (1.0 + amplitude * phase);
                if !(rho > 0.0) {
                    return Err(WeakStrongError::InadmissibleReference { t, x });
                }
                let e = p0 / ((model.gamma() - 1.0) * rho);
                let theta = model.temperature(rho, e)?;
                Ok(StandardState::new(rho, theta, [u0]))
            }
            ReferenceSolution::ResolvedNumeric { trajectory } => {
                let grid = trajectory.grid;
                let tf = (t / grid.dt).clamp(0.0, grid.n_t as f64);
                let t0 = (tf.floor() as usize).min(grid.n_t - 1);
                let wt = tf - t0 as f64;
                let xf = (x + 1.0) / grid.dx - 0.5;
                let x0 = xf.floor();
                let wx = xf - x0;
                let i0 = (x0.rem_euclid(grid.n_x as f64)) as usize;
                let i1 = (i0 + 1) % grid.n_x;
                let lerp = |a: &ConsState<1>, b: &ConsState<1>, w: f64| {
                    ConsState::new(
                        a.rho * (1.0 - w) + b.rho * w,
                        [a.momentum[0] * (1.0 - w) + b.momentum[0] * w],
                        a.total_energy * (1.0 - w) + b.total_energy * w,
                    )
                };
                let lower = lerp(&trajectory.levels[t0][i0], &trajectory.levels[t0][i1], wx);
                let upper =
                    lerp(&trajectory.levels[t0 + 1][i0], &trajectory.levels[t0 + 1][i1], wx);
                let state = lerp(&lower, &upper, wt);
                model
                    .to_standard(&state)
                    .map_err(|_| WeakStrongError::InadmissibleReference { t, x })
            }
        }
    }

    /// Check strict admissibility and the entropy-transport identity
    /// `d/dt log(theta / rho^(gamma-1)) + u d/dx log(...) = 0` on a sample
    /// grid, with tolerance 1e-8.
    pub fn validate(
        &self,
        model: &GasModel,
        t_end: f64,
    ) -> Result<(), WeakStrongError> {
        let gamma = model.gamma();
        let log_ratio = |s: &StandardState<1>| (s.theta / s.rho.powf(gamma - 1.0)).ln();
        let ht = 1e-5 * t_end.max(1.0);
        let hx = 1e-5;
        let mut worst = 0.0f64;
        for it in 0..=24 {
            let t = ht + (t_end - 2.0 * ht) * it as f64 / 24.0;
            for ix in 0..64 {
                let x = -1.0 + 2.0 * (ix as f64 + 0.5) / 64.0;
                let center = self.eval(model, t, x)?;
                if !(center.rho > 0.0 && center.theta > 0.0) {
                    return Err(WeakStrongError::InadmissibleReference { t, x });
                }
                let lt = log_ratio(&self.eval(model, t + ht, x)?);
                let lt0 = log_ratio(&self.eval(model, t - ht, x)?);
                let lx = log_ratio(&self.eval(model, t, x + hx)?);
                let lx0 = log_ratio(&self.eval(model, t, x - hx)?);
                let residual =
                    (lt - lt0) / (2.0 * ht) + center.velocity[0] * (lx - lx0) / (2.0 * hx);
                worst = worst.max(residual.abs());
            }
        }
        if worst > 1e-8 {
            return Err(WeakStrongError::TransportIdentity(worst));
        }
        Ok(())
    }
}

/// The residual at one time index of the field:
/// relative energy against the reference plus the total energy defect.
pub fn residual_at(
    field: &YoungMeasureField<1>,
    reference: &ReferenceSolution,
    model: &GasModel,
    tau_index: usize,
) -> Result<f64, WeakStrongError> {
    let grid = field.grid();
    if tau_index >= grid.n_t {
        return Err(WeakStrongError::TimeOutOfRange(tau_index));
    }
    let t = grid.time(tau_index);
    let mut energy_integral = 0.0;
    for x_index in 0..grid.n_x {
        let x = grid.x_center(x_index);
        let std_ref = reference.eval(model, t, x)?;
        let prepared = PreparedReference::new(model, &std_ref)?;
        let cell = field.expect(tau_index, x_index, |s| prepared.relative_energy(model, s));
        energy_integral += cell * grid.dx;
    }
    let initial = field.integrate_slice(0, |s| s.total_energy);
    let current = field.integrate_slice(tau_index, |s| s.total_energy);
    Ok(energy_integral + (initial - current))
}

/// The residual over every time index of the field.
pub fn residual_series(
    field: &YoungMeasureField<1>,
    reference: &ReferenceSolution,
    model: &GasModel,
) -> Result<(Vec<f64>, Vec<f64>), WeakStrongError> {
    let grid = field.grid();
    let mut times = Vec::with_capacity(grid.n_t);
    let mut values = Vec::with_capacity(grid.n_t);
    for k in 0..grid.n_t {
        times.push(grid.time(k));
        values.push(residual_at(field, reference, model, k)?);
    }
    Ok((times, values))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::NotApplicable => "NOT-APPLICABLE",
        };
        f.write_str(s)
    }
}

/// Fitted envelope of a residual series.
#[derive(Clone, Debug)]
pub struct GronwallReport {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Smallest L with `R(tau) <= (R(0) + epsilon) exp(L tau)` over the series.
    pub fitted_growth: f64,
    /// Offset absorbing the discretization level when `R(0) = 0`.
    pub epsilon_grid: f64,
    pub verdict: Verdict,
}

impl GronwallReport {
    pub fn max_residual(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }
}

/// Fit the smallest exponential envelope over the series and judge it:
/// fail on non-finite or coercivity-violating values and on
/// faster-than-exponential growth.
pub fn gronwall_check(times: &[f64], values: &[f64]) -> GronwallReport {
    assert_eq!(times.len(), values.len());
    assert!(!times.is_empty());
    let scale = values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let finite = values.iter().all(|v| v.is_finite());
    let coercive = values.iter().all(|&v| v >= -1e-12 * scale);

    let r0 = values[0].max(0.0);
    let tiny = 1e-300;
    let epsilon_grid = if r0 > 1e-14 * scale {
        0.0
    } else {
        values
            .iter()
            .zip(times.iter())
            .find(|(_, &t)| t > 0.0)
            .map(|(&v, _)| v.max(tiny))
            .unwrap_or(tiny)
    };
    let base = (r0 + epsilon_grid).max(tiny);
    let mut fitted_growth = 0.0f64;
    for (&t, &v) in times.iter().zip(values.iter()).skip(1) {
        if t > 0.0 && v > base {
            fitted_growth = fitted_growth.max((v / base).ln() / t);
        }
    }

    // Shape test: log-slopes between consecutive points meaningfully above
    // the envelope base must not keep accelerating.
    let mut super_exponential = false;
    let max_value = values.iter().cloned().fold(0.0, f64::max);
    if max_value > 10.0 * base {
        let mut points: Vec<(f64, f64)> = Vec::new();
        for (&t, &v) in times.iter().zip(values.iter()) {
            if v > 1.5 * base {
                points.push((t, v.ln()));
            }
        }
        if points.len() >= 8 {
            let slopes: Vec<f64> = points
                .windows(2)
                .filter(|w| w[1].0 > w[0].0)
                .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
                .collect();
            let quarter = slopes.len() / 4;
            if quarter >= 1 {
                let head: f64 = slopes[..quarter].iter().sum::<f64>() / quarter as f64;
                let tail: f64 =
                    slopes[slopes.len() - quarter..].iter().sum::<f64>() / quarter as f64;
                if head > 0.0 && tail > 2.0 * head {
                    super_exponential = true;
                }
            }
        }
    }

    let verdict = if finite && coercive && !super_exponential {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    GronwallReport {
        times: times.to_vec(),
        values: values.to_vec(),
        fitted_growth,
        epsilon_grid,
        verdict,
    }
}

/// Componentwise agreement tolerance between a scenario's initial data and
/// the Dirac of the reference.
const MATCH_TOLERANCE: f64 = 1e-10;

/// Run the scenario, compare against the reference, and report the residual
/// series. Mismatched initial data yields a `NotApplicable` verdict with the
/// initial residual reported.
pub fn weak_strong_test(
    scenario: &Scenario,
    reference: &ReferenceSolution,
) -> Result<GronwallReport, WeakStrongError> {
    let model = &scenario.model;
    reference.validate(model, scenario.t_end)?;
    let trajectory = solver::run(scenario)?;
    let field = trajectory.dirac_field()?;
    let grid = *field.grid();

    let mut matched = true;
    'outer: for x_index in 0..grid.n_x {
        let x = grid.x_center(x_index);
        let expected = model.to_conservative(&reference.eval(model, 0.0, x)?)?;
        let actual = &trajectory.levels[0][x_index];
        let scale = expected
            .total_energy
            .abs()
            .max(expected.rho.abs())
            .max(1.0);
        if expected.distance(actual) > MATCH_TOLERANCE * scale {
            matched = false;
            break 'outer;
        }
    }

    let (times, values) = residual_series(&field, reference, model)?;
    let mut report = gronwall_check(&times, &values);
    if !matched {
        report.verdict = Verdict::NotApplicable;
    }
    Ok(report)
}

/// Refinement study of the weak-strong test over several resolutions.
#[derive(Clone, Debug)]
pub struct RefinementStudy {
    pub resolutions: Vec<usize>,
    pub cell_widths: Vec<f64>,
    pub max_residuals: Vec<f64>,
    /// Least-squares slope of `ln(max residual)` against `ln(dx)`.
    pub observed_order: f64,
    pub monotone: bool,
}

pub fn weak_strong_refinement(
    base: &Scenario,
    reference: &ReferenceSolution,
    resolutions: &[usize],
) -> Result<RefinementStudy, WeakStrongError> {
    assert!(!resolutions.is_empty());
    let mut cell_widths = Vec::new();
    let mut max_residuals = Vec::new();
    for &n_x in resolutions {
        let scenario = Scenario { n_x, ..base.clone() };
        let report = weak_strong_test(&scenario, reference)?;
        cell_widths.push(solver::cell_width(n_x));
        max_residuals.push(report.max_residual());
    }
    let logs: Vec<(f64, f64)> = cell_widths
        .iter()
        .zip(max_residuals.iter())
        .filter(|(_, &r)| r > 0.0)
        .map(|(&dx, &r)| (dx.ln(), r.ln()))
        .collect();
    let observed_order = if logs.len() >= 2 {
        let n = logs.len() as f64;
        let sx: f64 = logs.iter().map(|(x, _)| x).sum();
        let sy: f64 = logs.iter().map(|(_, y)| y).sum();
        let sxx: f64 = logs.iter().map(|(x, _)| x * x).sum();
        let sxy: f64 = logs.iter().map(|(x, y)| x * y).sum();
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    } else {
        f64::INFINITY
    };
    let monotone = max_residuals.windows(2).all(|w| w[1] <= w[0] * 1.1);
    Ok(RefinementStudy {
        resolutions: resolutions.to_vec(),
        cell_widths,
        max_residuals,
        observed_order,
        monotone,
    })
}
