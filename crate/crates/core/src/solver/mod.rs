//! Finite-volume solver for the conservative Euler system on the periodic
//! torus `[-1, 1]`, with entropy-residual extraction, ensembles, and runtime
//! diagnostics.

pub mod riemann;

use std::sync::Mutex;

use rand::Rng;
use thiserror::Error;

use crate::measures::{
    Atom, CellMeasure, MatrixCellMeasure, MeasureError, SpaceTimeGrid, YoungMeasureField,
};
use crate::state::{ConsState, StandardState};
use crate::thermo::{GasModel, ThermoError};

pub use riemann::{exact_riemann, shock_entropy_production, PrimitiveState, RiemannSolution, WaveKind};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("CFL violation at step {step}: speed {speed} with dt {dt}, dx {dx}")]
    CflViolation { step: usize, speed: f64, dt: f64, dx: f64 },
    #[error("vacuum formation at step {step}, cell {cell} (rho = {rho})")]
    VacuumFormation { step: usize, cell: usize, rho: f64 },
    #[error("admissibility lost at step {step}, cell {cell} (margin = {margin})")]
    AdmissibilityLost { step: usize, cell: usize, margin: f64 },
    #[error("initial data not strictly admissible at cell {cell}")]
    InadmissibleInitialData { cell: usize },
    #[error("cell entropy violation at ({t}, {x}): residual {residual} below -{tolerance}")]
    EntropyViolation { t: usize, x: usize, residual: f64, tolerance: f64 },
    #[error("invalid scenario: {0}")]
    BadScenario(String),
    #[error("exact solution requires the perfect-gas law")]
    NotPerfectGas,
    #[error("initial states would generate vacuum (pressure function has no positive root)")]
    RiemannVacuum,
    #[error("states do not satisfy the jump conditions (residual {0})")]
    RankineHugoniot(f64),
    #[error(transparent)]
    Thermo(#[from] ThermoError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FluxKind {
    LaxFriedrichs,
    Rusanov,
    Hll,
}

impl std::fmt::Display for FluxKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            FluxKind::LaxFriedrichs => "lax-friedrichs",
            FluxKind::Rusanov => "rusanov",
            FluxKind::Hll => "hll",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SchemeConfig {
    pub flux: FluxKind,
    pub cfl: f64,
    /// Per-step second-difference smoothing applied to momentum and energy.
    pub viscosity_eps: f64,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig { flux: FluxKind::LaxFriedrichs, cfl: 0.9, viscosity_eps: 0.0 }
    }
}

#[derive(Clone, Debug)]
pub enum InitialCondition {
    /// Mirrored jump: `left` on `|x| < 1/2`, `right` elsewhere, so the torus
    /// carries the jump at `x = 1/2` and its mirror image at `x = -1/2`.
    Riemann { left: StandardState<1>, right: StandardState<1> },
    Constant { state: StandardState<1> },
    /// Sinusoidal density (and optionally velocity) perturbation of a base
    /// state at constant pressure. With `velocity_amplitude = 0` this is an
    /// exact traveling wave advected at the base velocity.
    SmoothWave {
        base: StandardState<1>,
        amplitude: f64,
        wavenumber: u32,
        velocity_amplitude: f64,
    },
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub model: GasModel,
    pub n_x: usize,
    pub t_end: f64,
    pub ic: InitialCondition,
    pub scheme: SchemeConfig,
    pub seed: u64,
}

/// Finite-volume history: `n_t + 1` time levels of `n_x` states, plus the
/// per-level energy defect `d(t) = total E(0) - total E(t)`.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub grid: SpaceTimeGrid,
    pub scheme: SchemeConfig,
    pub levels: Vec<Vec<ConsState<1>>>,
    pub energy_defect: Vec<f64>,
}

impl Trajectory {
    /// The Dirac Young-measure field of this trajectory: time cell `n` holds
    /// the snapshot at its left endpoint, so the `t = 0` slice is the initial
    /// data.
    pub fn dirac_field(&self) -> Result<YoungMeasureField<1>, MeasureError> {
        let mut states = Vec::with_capacity(self.grid.cells());
        for level in &self.levels[..self.grid.n_t] {
            states.extend_from_slice(level);
        }
        YoungMeasureField::dirac(self.grid, &states)
    }

    pub fn total_energy(&self, level: usize) -> f64 {
        self.levels[level].iter().map(|s| s.total_energy).sum::<f64>() * self.grid.dx
    }
}

/// Domain half-width of the torus `[-1, 1]`.
pub const DOMAIN_HALF_WIDTH: f64 = 1.0;

pub fn cell_width(n_x: usize) -> f64 {
    2.0 * DOMAIN_HALF_WIDTH / n_x as f64
}

pub fn x_center(i: usize, n_x: usize) -> f64 {
    -DOMAIN_HALF_WIDTH + (i as f64 + 0.5) * cell_width(n_x)
}

/// Physical flux of the conservative system at a strictly admissible state.
pub fn euler_flux(model: &GasModel, s: &ConsState<1>) -> Result<[f64; 3], SolverError> {
    if !(s.rho > 0.0) {
        return Err(SolverError::Thermo(ThermoError::Vacuum));
    }
    let gamma = model.gamma();
    let kin = s.kinetic_energy();
    let p = (gamma - 1.0) * (s.total_energy - kin);
    let u = s.momentum[0] / s.rho;
    Ok([
        s.momentum[0],
        s.momentum[0] * u + p,
        (s.total_energy + p) * u,
    ])
}

/// `|u| + c` with the gamma-law sound speed.
pub fn wave_speed(model: &GasModel, s: &ConsState<1>) -> f64 {
    let gamma = model.gamma();
    let p = (gamma - 1.0) * (s.total_energy - s.kinetic_energy());
    let c = (gamma * p.max(0.0) / s.rho).sqrt();
    (s.momentum[0] / s.rho).abs() + c
}

fn max_wave_speed(model: &GasModel, states: &[ConsState<1>]) -> f64 {
    states.iter().map(|s| wave_speed(model, s)).fold(0.0, f64::max)
}

/// Numerical flux and the matching numerical entropy flux at one interface.
/// The entropy flux uses the same two-point average and the same dissipation
/// coefficient as the scheme flux, applied to the total entropy.
fn interface_flux(
    model: &GasModel,
    scheme: &SchemeConfig,
    grid_speed: f64,
    left: &ConsState<1>,
    right: &ConsState<1>,
) -> Result<[f64; 3], SolverError> {
    let fl = euler_flux(model, left)?;
    let fr = euler_flux(model, right)?;
    Ok(match scheme.flux {
        FluxKind::LaxFriedrichs => {
            let a = grid_speed;
            [
                0.5 * (fl[0] + fr[0]) - 0.5 * a * (right.rho - left.rho),
                0.5 * (fl[1] + fr[1]) - 0.5 * a * (right.momentum[0] - left.momentum[0]),
                0.5 * (fl[2] + fr[2]) - 0.5 * a * (right.total_energy - left.total_energy),
            ]
        }
        FluxKind::Rusanov => {
            let a = wave_speed(model, left).max(wave_speed(model, right));
            [
                0.5 * (fl[0] + fr[0]) - 0.5 * a * (right.rho - left.rho),
                0.5 * (fl[1] + fr[1]) - 0.5 * a * (right.momentum[0] - left.momentum[0]),
                0.5 * (fl[2] + fr[2]) - 0.5 * a * (right.total_energy - left.total_energy),
            ]
        }
        FluxKind::Hll => {
            let (sl, sr) = hll_speeds(model, left, right);
            if sl >= 0.0 {
                fl
            } else if sr <= 0.0 {
                fr
            } else {
                let dl = [
                    right.rho - left.rho,
                    right.momentum[0] - left.momentum[0],
                    right.total_energy - left.total_energy,
                ];
                [
                    (sr * fl[0] - sl * fr[0] + sl * sr * dl[0]) / (sr - sl),
                    (sr * fl[1] - sl * fr[1] + sl * sr * dl[1]) / (sr - sl),
                    (sr * fl[2] - sl * fr[2] + sl * sr * dl[2]) / (sr - sl),
                ]
            }
        }
    })
}

fn hll_speeds(model: &GasModel, left: &ConsState<1>, right: &ConsState<1>) -> (f64, f64) {
    let gamma = model.gamma();
    let sound = |s: &ConsState<1>| {
        let p = (gamma - 1.0) * (s.total_energy - s.kinetic_energy());
        (gamma * p.max(0.0) / s.rho).sqrt()
    };
    let ul = left.momentum[0] / left.rho;
    let ur = right.momentum[0] / right.rho;
    ((ul - sound(left)).min(ur - sound(right)), (ul + sound(left)).max(ur + sound(right)))
}

/// Entropy flux `S(state) * u` and its interface average consistent with the
/// scheme.
fn interface_entropy_flux(
    model: &GasModel,
    scheme: &SchemeConfig,
    grid_speed: f64,
    left: &ConsState<1>,
    right: &ConsState<1>,
) -> f64 {
    let wl = model.total_entropy(left);
    let wr = model.total_entropy(right);
    let ql = wl * left.momentum[0] / left.rho;
    let qr = wr * right.momentum[0] / right.rho;
    match scheme.flux {
        FluxKind::LaxFriedrichs => 0.5 * (ql + qr) - 0.5 * grid_speed * (wr - wl),
        FluxKind::Rusanov => {
            let a = wave_speed(model, left).max(wave_speed(model, right));
            0.5 * (ql + qr) - 0.5 * a * (wr - wl)
        }
        FluxKind::Hll => {
            let (sl, sr) = hll_speeds(model, left, right);
            if sl >= 0.0 {
                ql
            } else if sr <= 0.0 {
                qr
            } else {
                (sr * ql - sl * qr + sl * sr * (wr - wl)) / (sr - sl)
            }
        }
    }
}

/// One conservative update on the periodic grid. Preserves the cell totals
/// of all three components exactly (telescoping interface fluxes).
pub fn step(
    model: &GasModel,
    scheme: &SchemeConfig,
    states: &[ConsState<1>],
    dt: f64,
    dx: f64,
) -> Result<Vec<ConsState<1>>, SolverError> {
    let n = states.len();
    let speed = max_wave_speed(model, states);
    if speed * dt / dx > 1.0 + 1e-12 {
        return Err(SolverError::CflViolation { step: 0, speed, dt, dx });
    }
    let grid_speed = dx / dt;
    let mut fluxes = Vec::with_capacity(n);
    for i in 0..n {
        let j = (i + 1) % n;
        fluxes.push(interface_flux(model, scheme, grid_speed, &states[i], &states[j])?);
    }
    let lambda = dt / dx;
    let mut next = Vec::with_capacity(n);
    for i in 0..n {
        let prev = (i + n - 1) % n;
        let fr = &fluxes[i];
        let fl = &fluxes[prev];
        next.push(ConsState::new(
            states[i].rho - lambda * (fr[0] - fl[0]),
            [states[i].momentum[0] - lambda * (fr[1] - fl[1])],
            states[i].total_energy - lambda * (fr[2] - fl[2]),
        ));
    }
    if scheme.viscosity_eps > 0.0 {
        let eps = scheme.viscosity_eps;
        for i in 0..n {
            let prev = (i + n - 1) % n;
            let succ = (i + 1) % n;
            next[i].momentum[0] += eps
                * (states[succ].momentum[0] - 2.0 * states[i].momentum[0]
                    + states[prev].momentum[0]);
            next[i].total_energy += eps
                * (states[succ].total_energy - 2.0 * states[i].total_energy
                    + states[prev].total_energy);
        }
    }
    Ok(next)
}

/// Sample the initial condition at cell centers.
pub fn initial_states(scenario: &Scenario) -> Result<Vec<ConsState<1>>, SolverError> {
    let model = &scenario.model;
    let n = scenario.n_x;
    let mut states = Vec::with_capacity(n);
    match &scenario.ic {
        InitialCondition::Riemann { left, right } => {
            let left = model.to_conservative(left)?;
            let right = model.to_conservative(right)?;
            for i in 0..n {
                let x = x_center(i, n);
                states.push(if x.abs() < 0.5 { left } else { right });
            }
        }
        InitialCondition::Constant { state } => {
            let s = model.to_conservative(state)?;
            states.resize(n, s);
        }
        InitialCondition::SmoothWave { base, amplitude, wavenumber, velocity_amplitude } => {
            let p0 = model.pressure_standard(base.rho, base.theta)?;
            for i in 0..n {
                let x = x_center(i, n);
                let phase = (std::f64::consts::PI * *wavenumber as f64 * (x + 1.0)).sin();
                let rho = base.rho * (1.0 + amplitude * phase);
                let u = base.velocity[0] + velocity_amplitude * phase;
                if !(rho > 0.0) {
                    return Err(SolverError::BadScenario(
                        "smooth-wave amplitude produces nonpositive density".into(),
                    ));
                }
                let e = p0 / ((model.gamma() - 1.0) * rho);
                let theta = model.temperature(rho, e)?;
                states.push(model.to_conservative(&StandardState::new(rho, theta, [u]))?);
            }
        }
    }
    Ok(states)
}

enum Attempt {
    Done(Trajectory),
    Retry(f64),
}

enum TimeGrid {
    /// Derive the step count from a wave-speed bound and the CFL target.
    FromSpeedBound(f64),
    /// Use exactly this many uniform steps (CFL still checked per step).
    Fixed(usize),
}

fn run_on_time_grid(scenario: &Scenario, time_grid: TimeGrid) -> Result<Attempt, SolverError> {
    let model = &scenario.model;
    let scheme = &scenario.scheme;
    if !(scheme.cfl > 0.0 && scheme.cfl <= 1.0) {
        return Err(SolverError::BadScenario(format!("cfl {} outside (0, 1]", scheme.cfl)));
    }
    if scheme.viscosity_eps < 0.0 {
        return Err(SolverError::BadScenario("negative viscosity".into()));
    }
    if !(scenario.t_end > 0.0) {
        return Err(SolverError::BadScenario("t_end must be positive".into()));
    }
    if scenario.n_x < 2 {
        return Err(SolverError::BadScenario("need at least two space cells".into()));
    }
    let dx = cell_width(scenario.n_x);
    let states0 = initial_states(scenario)?;
    for (cell, s) in states0.iter().enumerate() {
        if !model.is_strictly_admissible(s) {
            return Err(SolverError::InadmissibleInitialData { cell });
        }
    }
    let density_floor = 1e-12 * states0.iter().map(|s| s.rho).fold(0.0, f64::max);
    let (n_t, speed_bound) = match time_grid {
        TimeGrid::FromSpeedBound(bound) => {
            let dt_target = scheme.cfl * dx / bound;
            ((scenario.t_end / dt_target).ceil().max(1.0) as usize, bound)
        }
        TimeGrid::Fixed(n_t) => {
            if n_t == 0 {
                return Err(SolverError::BadScenario("need at least one time step".into()));
            }
            // hard stability bound: speed dt / dx <= 1
            (n_t, dx * n_t as f64 / scenario.t_end)
        }
    };
    let dt = scenario.t_end / n_t as f64;
    let initial_energy: f64 = states0.iter().map(|s| s.total_energy).sum::<f64>() * dx;

    let mut levels = Vec::with_capacity(n_t + 1);
    let mut defects = Vec::with_capacity(n_t + 1);
    levels.push(states0);
    defects.push(0.0);
    for step_index in 0..n_t {
        let current = levels.last().unwrap();
        let speed = max_wave_speed(model, current);
        if speed > speed_bound * (1.0 + 1e-12) {
            return Ok(Attempt::Retry(speed));
        }
        let next = step(model, scheme, current, dt, dx)?;
        for (cell, s) in next.iter().enumerate() {
            if s.rho <= density_floor {
                return Err(SolverError::VacuumFormation {
                    step: step_index,
                    cell,
                    rho: s.rho,
                });
            }
            if !model.is_strictly_admissible(s) {
                return Err(SolverError::AdmissibilityLost {
                    step: step_index,
                    cell,
                    margin: model.admissibility_margin(s),
                });
            }
        }
        let energy: f64 = next.iter().map(|s| s.total_energy).sum::<f64>() * dx;
        let defect = initial_energy - energy;
        if defect < -1e-12 * initial_energy.abs().max(1.0) {
            return Err(SolverError::BadScenario(format!(
                "energy defect {defect} negative beyond round-off at step {step_index}"
            )));
        }
        levels.push(next);
        defects.push(defect);
    }
    let grid = SpaceTimeGrid::new(n_t, scenario.n_x, dt, dx);
    Ok(Attempt::Done(Trajectory {
        grid,
        scheme: *scheme,
        levels,
        energy_defect: defects,
    }))
}

/// Run a scenario to completion. The time step is fixed over the run; if the
/// wave speed grows past the initial estimate the run restarts with a larger
/// bound (deterministically), so the CFL condition holds at every step.
pub fn run(scenario: &Scenario) -> Result<Trajectory, SolverError> {
    let states0 = initial_states(scenario)?;
    let mut bound = max_wave_speed(&scenario.model, &states0).max(1e-12);
    for _ in 0..12 {
        match run_on_time_grid(scenario, TimeGrid::FromSpeedBound(bound))? {
            Attempt::Done(traj) => return Ok(traj),
            Attempt::Retry(speed) => bound = speed * 1.05,
        }
    }
    Err(SolverError::CflViolation {
        step: 0,
        speed: bound,
        dt: scenario.scheme.cfl * cell_width(scenario.n_x) / bound,
        dx: cell_width(scenario.n_x),
    })
}

/// Run with exactly `n_t` uniform time steps. Refinement studies that
/// compare entropy production across resolutions need the grid ratio
/// `dt / dx` pinned; deriving the step from per-run wave-speed estimates
/// perturbs the scheme's dissipation coefficient between runs.
pub fn run_fixed_steps(scenario: &Scenario, n_t: usize) -> Result<Trajectory, SolverError> {
    match run_on_time_grid(scenario, TimeGrid::Fixed(n_t))? {
        Attempt::Done(traj) => Ok(traj),
        Attempt::Retry(speed) => Err(SolverError::CflViolation {
            step: 0,
            speed,
            dt: scenario.t_end / n_t as f64,
            dx: cell_width(scenario.n_x),
        }),
    }
}

/// Statistics of the entropy-residual extraction.
#[derive(Clone, Copy, Debug)]
pub struct ResidualStats {
    /// Most negative raw residual encountered (before clamping).
    pub min_residual: f64,
    /// Mass removed by clamping negatives to zero.
    pub clamped_mass: f64,
    /// Scale used for the violation tolerance.
    pub scale: f64,
}

/// Tolerance factor for the cell entropy inequality.
pub const ENTROPY_RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Per-cell entropy production of a trajectory:
/// `sigma = (S(next) - S(current)) dx + (Q_right - Q_left) dt`.
/// Raw residuals must stay above `-1e-10 * scale`; surviving negatives are
/// clamped to zero.
pub fn entropy_residual_detailed(
    traj: &Trajectory,
    model: &GasModel,
) -> Result<(CellMeasure, ResidualStats), SolverError> {
    let grid = traj.grid;
    let n = grid.n_x;
    let grid_speed = grid.dx / grid.dt;
    // Scale reflecting the magnitudes whose cancellation produces sigma.
    let mut scale = 0.0f64;
    for level in &traj.levels {
        for s in level {
            scale = scale.max(grid.dx * model.total_entropy(s).abs());
        }
    }
    let mut entropy_now: Vec<f64> =
        traj.levels[0].iter().map(|s| model.total_entropy(s)).collect();
    let mut values = vec![0.0; grid.cells()];
    let mut min_residual = 0.0f64;
    let mut min_cell = (0, 0);
    let mut clamped_mass = 0.0;
    for t in 0..grid.n_t {
        let current = &traj.levels[t];
        let next = &traj.levels[t + 1];
        let entropy_next: Vec<f64> = next.iter().map(|s| model.total_entropy(s)).collect();
        let mut q = Vec::with_capacity(n);
        for i in 0..n {
            let j = (i + 1) % n;
            let flux = interface_entropy_flux(
                model,
                &traj.scheme,
                grid_speed,
                &current[i],
                &current[j],
            );
            scale = scale.max(grid.dt * flux.abs());
            q.push(flux);
        }
        for i in 0..n {
            let prev = (i + n - 1) % n;
            let residual =
                (entropy_next[i] - entropy_now[i]) * grid.dx + (q[i] - q[prev]) * grid.dt;
            if residual < min_residual {
                min_residual = residual;
                min_cell = (t, i);
            }
            if residual < 0.0 {
                clamped_mass += -residual;
            }
            values[grid.index(t, i)] = residual.max(0.0);
        }
        entropy_now = entropy_next;
    }
    let tolerance = ENTROPY_RESIDUAL_TOLERANCE * scale;
    if min_residual < -tolerance {
        return Err(SolverError::EntropyViolation {
            t: min_cell.0,
            x: min_cell.1,
            residual: min_residual,
            tolerance,
        });
    }
    let measure = CellMeasure::new(grid, values)?;
    Ok((measure, ResidualStats { min_residual, clamped_mass, scale }))
}

pub fn entropy_residual(traj: &Trajectory, model: &GasModel) -> Result<CellMeasure, SolverError> {
    entropy_residual_detailed(traj, model).map(|(m, _)| m)
}

/// Multiplicative and additive jitter applied to initial-condition states.
#[derive(Clone, Copy, Debug)]
pub struct Perturbation {
    pub rho_factor: f64,
    pub u_shift: f64,
    pub p_factor: f64,
}

impl Perturbation {
    pub fn identity() -> Self {
        Perturbation { rho_factor: 1.0, u_shift: 0.0, p_factor: 1.0 }
    }

    pub fn sample(rng: &mut impl Rng, amplitude: f64) -> Self {
        Perturbation {
            rho_factor: 1.0 + amplitude * (2.0 * rng.gen::<f64>() - 1.0),
            u_shift: amplitude * (2.0 * rng.gen::<f64>() - 1.0),
            p_factor: 1.0 + amplitude * (2.0 * rng.gen::<f64>() - 1.0),
        }
    }

    fn apply(&self, model: &GasModel, s: &StandardState<1>) -> Result<StandardState<1>, SolverError> {
        let p = model.pressure_standard(s.rho, s.theta)?;
        let rho = s.rho * self.rho_factor;
        let p = p * self.p_factor;
        if !(rho > 0.0) || !(p > 0.0) {
            return Err(SolverError::BadScenario("perturbation left the phase space".into()));
        }
        let e = p / ((model.gamma() - 1.0) * rho);
        let theta = model.temperature(rho, e)?;
        Ok(StandardState::new(rho, theta, [s.velocity[0] + self.u_shift]))
    }
}

/// Apply a perturbation to every state of the initial condition.
pub fn perturb_scenario(base: &Scenario, p: &Perturbation) -> Result<Scenario, SolverError> {
    let model = &base.model;
    let ic = match &base.ic {
        InitialCondition::Riemann { left, right } => InitialCondition::Riemann {
            left: p.apply(model, left)?,
            right: p.apply(model, right)?,
        },
        InitialCondition::Constant { state } => {
            InitialCondition::Constant { state: p.apply(model, state)? }
        }
        InitialCondition::SmoothWave { base: b, amplitude, wavenumber, velocity_amplitude } => {
            InitialCondition::SmoothWave {
                base: p.apply(model, b)?,
                amplitude: *amplitude,
                wavenumber: *wavenumber,
                velocity_amplitude: *velocity_amplitude,
            }
        }
    };
    Ok(Scenario { ic, ..base.clone() })
}

fn worker_count() -> usize {
    std::env::var("MAXDISS_WORKERS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(1)
}

fn run_members(
    scenarios: &[Scenario],
    speed_bound: f64,
) -> Result<Result<Vec<Trajectory>, f64>, SolverError> {
    let n = scenarios.len();
    let workers = worker_count().min(n);
    let results: Mutex<Vec<Option<Result<Attempt, SolverError>>>> =
        Mutex::new((0..n).map(|_| None).collect());
    let next_index = Mutex::new(0usize);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = {
                    let mut guard = next_index.lock().unwrap();
                    let i = *guard;
                    if i >= n {
                        return;
                    }
                    *guard += 1;
                    i
                };
                let outcome = run_on_time_grid(&scenarios[i], TimeGrid::FromSpeedBound(speed_bound));
                results.lock().unwrap()[i] = Some(outcome);
            });
        }
    });
    let collected = results.into_inner().unwrap();
    let mut trajectories = Vec::with_capacity(n);
    let mut retry_speed: Option<f64> = None;
    for outcome in collected {
        match outcome.expect("worker filled every slot")? {
            Attempt::Done(t) => trajectories.push(t),
            Attempt::Retry(s) => {
                retry_speed = Some(retry_speed.map_or(s, |r: f64| r.max(s)));
            }
        }
    }
    match retry_speed {
        Some(s) => Ok(Err(s)),
        None => Ok(Ok(trajectories)),
    }
}

/// Run every perturbed scenario on a shared time grid and assemble the
/// uniformly weighted Young measure field. Runs execute concurrently when
/// `MAXDISS_WORKERS` asks for more than one worker; the result does not
/// depend on the worker count.
pub fn ensemble(
    base: &Scenario,
    perturbations: &[Perturbation],
) -> Result<YoungMeasureField<1>, SolverError> {
    ensemble_with_residual(base, perturbations).map(|(field, _)| field)
}

/// Ensemble field together with the matching entropy-production measure
/// (the uniform average of the member residuals, by linearity of the
/// entropy balance in the pair).
pub fn ensemble_with_residual(
    base: &Scenario,
    perturbations: &[Perturbation],
) -> Result<(YoungMeasureField<1>, CellMeasure), SolverError> {
    if perturbations.is_empty() {
        return Err(SolverError::BadScenario("empty perturbation list".into()));
    }
    let mut scenarios = Vec::with_capacity(perturbations.len());
    for p in perturbations {
        scenarios.push(perturb_scenario(base, p)?);
    }
    let mut bound = 1e-12f64;
    for sc in &scenarios {
        bound = bound.max(max_wave_speed(&sc.model, &initial_states(sc)?));
    }
    for _ in 0..12 {
        match run_members(&scenarios, bound)? {
            Ok(trajectories) => {
                let grid = trajectories[0].grid;
                let weight = 1.0 / trajectories.len() as f64;
                let mut cells: Vec<Vec<Atom<1>>> = vec![Vec::new(); grid.cells()];
                let mut sigma = vec![0.0; grid.cells()];
                for traj in &trajectories {
                    for t in 0..grid.n_t {
                        for x in 0..grid.n_x {
                            crate::measures::push_atom(
                                &mut cells[grid.index(t, x)],
                                Atom { weight, state: traj.levels[t][x] },
                            );
                        }
                    }
                    let residual = entropy_residual(traj, &base.model)?;
                    for (acc, v) in sigma.iter_mut().zip(residual.values()) {
                        *acc += weight * v;
                    }
                }
                let field = YoungMeasureField::new(grid, cells)?;
                let sigma = CellMeasure::new(grid, sigma)?;
                return Ok((field, sigma));
            }
            Err(speed) => bound = speed * 1.05,
        }
    }
    Err(SolverError::CflViolation { step: 0, speed: bound, dt: 0.0, dx: cell_width(base.n_x) })
}

/// Runtime diagnostics of a Young measure field: energy inequality,
/// admissibility event probability, moment bounds, and the defect-bound
/// constant.
#[derive(Clone, Debug)]
pub struct DiagnosticsReport {
    pub initial_energy: f64,
    pub final_energy: f64,
    pub max_energy: f64,
    pub energy_inequality: bool,
    pub max_energy_defect: f64,
    pub admissibility_probability: f64,
    pub admissibility: bool,
    pub kinetic_moment_max: f64,
    pub gamma_moment_max: f64,
    pub entropy_moment_q: f64,
    pub entropy_moment_max: f64,
    pub entropy_flux_moment_max: f64,
    pub concentration_variation: f64,
    /// Smallest constant making the concentration bound hold; zero when the
    /// concentration measure vanishes (always the case for atomic fields
    /// from discrete runs).
    pub defect_bound_constant: f64,
}

pub fn diagnostics(
    field: &YoungMeasureField<1>,
    model: &GasModel,
    concentration: Option<&MatrixCellMeasure<1>>,
) -> DiagnosticsReport {
    let grid = *field.grid();
    let gamma = model.gamma();
    let fitted_c = model.hypothesis_report().fitted_growth_constant.max(0.05);
    let q = 1.0 + 1.0 / (2.0 * fitted_c);

    let mut energies = Vec::with_capacity(grid.n_t);
    let mut kinetic_max = 0.0f64;
    let mut gamma_max = 0.0f64;
    let mut entropy_max = 0.0f64;
    let mut entropy_flux_max = 0.0f64;
    let mut admissibility_probability = 1.0f64;
    for t in 0..grid.n_t {
        energies.push(field.integrate_slice(t, |s| s.total_energy));
        kinetic_max = kinetic_max.max(field.integrate_slice(t, |s| s.kinetic_energy()));
        gamma_max = gamma_max.max(field.integrate_slice(t, |s| s.rho.powf(gamma)));
        entropy_max =
            entropy_max.max(field.integrate_slice(t, |s| model.total_entropy(s).abs().powf(q)));
        entropy_flux_max = entropy_flux_max.max(field.integrate_slice(t, |s| {
            (model.total_entropy(s).abs() * s.momentum[0].abs()).powf(q)
        }));
        for x in 0..grid.n_x {
            let admissible_mass: f64 = field
                .atoms(t, x)
                .iter()
                .filter(|a| {
                    model.admissibility_margin(&a.state) >= -model.admissibility_slack(&a.state)
                })
                .map(|a| a.weight)
                .sum();
            admissibility_probability = admissibility_probability.min(admissible_mass);
        }
    }
    let initial_energy = energies[0];
    let final_energy = *energies.last().unwrap();
    let max_energy = energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let energy_tolerance = 1e-12 * initial_energy.abs().max(1.0);
    let max_energy_defect = energies
        .iter()
        .map(|e| initial_energy - e)
        .fold(f64::NEG_INFINITY, f64::max);
    let defect_integral: f64 =
        energies.iter().map(|e| (initial_energy - e).max(0.0) * grid.dt).sum();
    let variation = concentration.map_or(0.0, |m| m.total_variation());
    let defect_bound_constant = if variation == 0.0 {
        0.0
    } else if defect_integral > 0.0 {
        variation / defect_integral
    } else {
        f64::INFINITY
    };
    DiagnosticsReport {
        initial_energy,
        final_energy,
        max_energy,
        energy_inequality: max_energy <= initial_energy + energy_tolerance,
        max_energy_defect,
        admissibility_probability,
        admissibility: admissibility_probability >= 1.0 - 1e-12,
        kinetic_moment_max: kinetic_max,
        gamma_moment_max: gamma_max,
        entropy_moment_q: q,
        entropy_moment_max: entropy_max,
        entropy_flux_moment_max: entropy_flux_max,
        concentration_variation: variation,
        defect_bound_constant,
    }
}

/// Crude gradient-blowup horizon from initial data: the reciprocal of the
/// strongest compression of either acoustic characteristic speed. Infinite
/// when nothing compresses.
pub fn gradient_blowup_time(model: &GasModel, states: &[ConsState<1>], dx: f64) -> f64 {
    let gamma = model.gamma();
    let n = states.len();
    let mut max_compression = 0.0f64;
    let speed = |s: &ConsState<1>| {
        let p = (gamma - 1.0) * (s.total_energy - s.kinetic_energy());
        let c = (gamma * p.max(0.0) / s.rho).sqrt();
        let u = s.momentum[0] / s.rho;
        (u - c, u + c)
    };
    for i in 0..n {
        let j = (i + 1) % n;
        let (lm_i, lp_i) = speed(&states[i]);
        let (lm_j, lp_j) = speed(&states[j]);
        max_compression = max_compression.max((lm_i - lm_j) / dx).max((lp_i - lp_j) / dx);
    }
    if max_compression > 0.0 {
        1.0 / max_compression
    } else {
        f64::INFINITY
    }
}
