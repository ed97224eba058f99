//! Exact self-similar solution of the gamma-law Riemann problem and the
//! entropy production rate of discontinuities.

use crate::solver::SolverError;
use crate::state::{ConsState, StandardState};
use crate::thermo::{GasModel, LawVariant};

/// Primitive triple (density, velocity, pressure).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrimitiveState {
    pub rho: f64,
    pub u: f64,
    pub p: f64,
}

impl PrimitiveState {
    pub fn sound_speed(&self, gamma: f64) -> f64 {
        (gamma * self.p / self.rho).sqrt()
    }

    /// Temperature of the perfect gas: `theta = p / rho`.
    pub fn to_standard(&self) -> StandardState<1> {
        StandardState::new(self.rho, self.p / self.rho, [self.u])
    }

    pub fn to_conservative(&self, gamma: f64) -> ConsState<1> {
        ConsState::new(
            self.rho,
            [self.rho * self.u],
            0.5 * self.rho * self.u * self.u + self.p / (gamma - 1.0),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WaveKind {
    Shock,
    Rarefaction,
}

/// Exact solution of the Riemann problem: star state plus a self-similar
/// sampler in `xi = x / t`.
#[derive(Clone, Debug)]
pub struct RiemannSolution {
    pub gamma: f64,
    pub left: PrimitiveState,
    pub right: PrimitiveState,
    pub star_pressure: f64,
    pub star_velocity: f64,
    pub star_rho_left: f64,
    pub star_rho_right: f64,
    pub left_wave: WaveKind,
    pub right_wave: WaveKind,
}

fn side_function(p: f64, side: &PrimitiveState, gamma: f64) -> (f64, f64) {
    let a = side.sound_speed(gamma);
    if p > side.p {
        let big_a = 2.0 / ((gamma + 1.0) * side.rho);
        let big_b = (gamma - 1.0) / (gamma + 1.0) * side.p;
        let root = (big_a / (p + big_b)).sqrt();
        let f = (p - side.p) * root;
        let df = root * (1.0 - 0.5 * (p - side.p) / (p + big_b));
        (f, df)
    } else {
        let z = (gamma - 1.0) / (2.0 * gamma);
        let f = 2.0 * a / (gamma - 1.0) * ((p / side.p).powf(z) - 1.0);
        let df = (p / side.p).powf(-(gamma + 1.0) / (2.0 * gamma)) / (side.rho * a);
        (f, df)
    }
}

fn star_pressure(
    left: &PrimitiveState,
    right: &PrimitiveState,
    gamma: f64,
) -> Result<f64, SolverError> {
    let al = left.sound_speed(gamma);
    let ar = right.sound_speed(gamma);
    // positivity condition: the rarefactions must not open a vacuum
    if 2.0 * (al + ar) / (gamma - 1.0) <= right.u - left.u {
        return Err(SolverError::RiemannVacuum);
    }
    let total = |p: f64| {
        let (fl, dl) = side_function(p, left, gamma);
        let (fr, dr) = side_function(p, right, gamma);
        (fl + fr + right.u - left.u, dl + dr)
    };
    // bracket the monotone pressure function
    let mut lo = 1e-300;
    let mut hi = left.p.max(right.p);
    while total(hi).0 <= 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(SolverError::RiemannVacuum);
        }
    }
    // Newton from a mean-pressure guess, safeguarded by the bracket
    let mut p = 0.5 * (left.p + right.p);
    p = p.clamp(lo, hi);
    for _ in 0..200 {
        let (f, df) = total(p);
        if f > 0.0 {
            hi = p;
        } else {
            lo = p;
        }
        let mut next = p - f / df;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - p).abs() <= 1e-15 * p.abs() {
            return Ok(next);
        }
        p = next;
    }
    Ok(p)
}

/// Solve the Riemann problem for a perfect-gas model.
pub fn exact_riemann(
    model: &GasModel,
    left: &StandardState<1>,
    right: &StandardState<1>,
) -> Result<RiemannSolution, SolverError> {
    if model.law().variant() != LawVariant::PerfectGas {
        return Err(SolverError::NotPerfectGas);
    }
    let gamma = model.gamma();
    let to_prim = |s: &StandardState<1>| -> Result<PrimitiveState, SolverError> {
        let p = model.pressure_standard(s.rho, s.theta)?;
        Ok(PrimitiveState { rho: s.rho, u: s.velocity[0], p })
    };
    let left = to_prim(left)?;
    let right = to_prim(right)?;
    let ps = star_pressure(&left, &right, gamma)?;
    let (fl, _) = side_function(ps, &left, gamma);
    let (fr, _) = side_function(ps, &right, gamma);
    let us = 0.5 * (left.u + right.u) + 0.5 * (fr - fl);
    let beta = (gamma - 1.0) / (gamma + 1.0);
    let star_rho = |side: &PrimitiveState| {
        let ratio = ps / side.p;
        if ps > side.p {
            side.rho * (ratio + beta) / (beta * ratio + 1.0)
        } else {
            side.rho * ratio.powf(1.0 / gamma)
        }
    };
    Ok(RiemannSolution {
        gamma,
        left,
        right,
        star_pressure: ps,
        star_velocity: us,
        star_rho_left: star_rho(&left),
        star_rho_right: star_rho(&right),
        left_wave: if ps > left.p { WaveKind::Shock } else { WaveKind::Rarefaction },
        right_wave: if ps > right.p { WaveKind::Shock } else { WaveKind::Rarefaction },
    })
}

impl RiemannSolution {
    /// Speed of the left wave front (shock speed, or rarefaction head).
    pub fn left_wave_speed(&self) -> f64 {
        let a = self.left.sound_speed(self.gamma);
        match self.left_wave {
            WaveKind::Shock => {
                let g = self.gamma;
                self.left.u
                    - a * ((g + 1.0) / (2.0 * g) * self.star_pressure / self.left.p
                        + (g - 1.0) / (2.0 * g))
                        .sqrt()
            }
            WaveKind::Rarefaction => self.left.u - a,
        }
    }

    /// Speed of the right wave front (shock speed, or rarefaction head).
    pub fn right_wave_speed(&self) -> f64 {
        let a = self.right.sound_speed(self.gamma);
        match self.right_wave {
            WaveKind::Shock => {
                let g = self.gamma;
                self.right.u
                    + a * ((g + 1.0) / (2.0 * g) * self.star_pressure / self.right.p
                        + (g - 1.0) / (2.0 * g))
                        .sqrt()
            }
            WaveKind::Rarefaction => self.right.u + a,
        }
    }

    /// Sample the self-similar solution at `xi = x / t`.
    pub fn sample(&self, xi: f64) -> PrimitiveState {
        let g = self.gamma;
        let beta = (g - 1.0) / (g + 1.0);
        if xi <= self.star_velocity {
            let side = &self.left;
            let a = side.sound_speed(g);
            match self.left_wave {
                WaveKind::Shock => {
                    let s = self.left_wave_speed();
                    if xi <= s {
                        *side
                    } else {
                        PrimitiveState {
                            rho: self.star_rho_left,
                            u: self.star_velocity,
                            p: self.star_pressure,
                        }
                    }
                }
                WaveKind::Rarefaction => {
                    let head = side.u - a;
                    let a_star = a * (self.star_pressure / side.p).powf((g - 1.0) / (2.0 * g));
                    let tail = self.star_velocity - a_star;
                    if xi <= head {
                        *side
                    } else if xi >= tail {
                        PrimitiveState {
                            rho: self.star_rho_left,
                            u: self.star_velocity,
                            p: self.star_pressure,
                        }
                    } else {
                        let factor = 2.0 / (g + 1.0) + beta / a * (side.u - xi);
                        PrimitiveState {
                            rho: side.rho * factor.powf(2.0 / (g - 1.0)),
                            u: 2.0 / (g + 1.0) * (a + (g - 1.0) / 2.0 * side.u + xi),
                            p: side.p * factor.powf(2.0 * g / (g - 1.0)),
                        }
                    }
                }
            }
        } else {
            let side = &self.right;
            let a = side.sound_speed(g);
            match self.right_wave {
                WaveKind::Shock => {
                    let s = self.right_wave_speed();
                    if xi >= s {
                        *side
                    } else {
                        PrimitiveState {
                            rho: self.star_rho_right,
                            u: self.star_velocity,
                            p: self.star_pressure,
                        }
                    }
                }
                WaveKind::Rarefaction => {
                    let head = side.u + a;
                    let a_star = a * (self.star_pressure / side.p).powf((g - 1.0) / (2.0 * g));
                    let tail = self.star_velocity + a_star;
                    if xi >= head {
                        *side
                    } else if xi <= tail {
                        PrimitiveState {
                            rho: self.star_rho_right,
                            u: self.star_velocity,
                            p: self.star_pressure,
                        }
                    } else {
                        let factor = 2.0 / (g + 1.0) - beta / a * (side.u - xi);
                        PrimitiveState {
                            rho: side.rho * factor.powf(2.0 / (g - 1.0)),
                            u: 2.0 / (g + 1.0) * (-a + (g - 1.0) / 2.0 * side.u + xi),
                            p: side.p * factor.powf(2.0 * g / (g - 1.0)),
                        }
                    }
                }
            }
        }
    }
}

/// Entropy production rate of a traveling discontinuity satisfying the jump
/// conditions: `speed * (w_L - w_R) - (w_L u_L - w_R u_R)` with
/// `w = rho S(p / rho^gamma)`. Nonnegative exactly for admissible
/// (compressive) jumps; contacts produce nothing.
pub fn shock_entropy_production(
    model: &GasModel,
    left: &StandardState<1>,
    right: &StandardState<1>,
    speed: f64,
) -> Result<f64, SolverError> {
    let gamma = model.gamma();
    let to_prim = |s: &StandardState<1>| -> Result<(PrimitiveState, f64), SolverError> {
        let e = model.specific_internal_energy(s.rho, s.theta)?;
        let p = model.pressure(s.rho, e)?;
        let prim = PrimitiveState { rho: s.rho, u: s.velocity[0], p };
        let entropy = s.rho * model.specific_entropy(s.rho, e)?;
        Ok((prim, entropy))
    };
    let (pl, wl) = to_prim(left)?;
    let (pr, wr) = to_prim(right)?;
    // Rankine-Hugoniot residuals for mass, momentum, energy.
    let el = 0.5 * pl.rho * pl.u * pl.u + pl.p / (gamma - 1.0);
    let er = 0.5 * pr.rho * pr.u * pr.u + pr.p / (gamma - 1.0);
    let jumps = [
        speed * (pr.rho - pl.rho) - (pr.rho * pr.u - pl.rho * pl.u),
        speed * (pr.rho * pr.u - pl.rho * pl.u)
            - ((pr.rho * pr.u * pr.u + pr.p) - (pl.rho * pl.u * pl.u + pl.p)),
        speed * (er - el) - ((er + pr.p) * pr.u - (el + pl.p) * pl.u),
    ];
    let scale = [
        pl.rho.abs().max(pr.rho.abs()),
        (pl.rho * pl.u).abs().max((pr.rho * pr.u).abs()).max(pl.p.max(pr.p)),
        el.abs().max(er.abs()),
    ];
    for (r, s) in jumps.iter().zip(scale.iter()) {
        if r.abs() > 1e-8 * s.max(1.0) {
            return Err(SolverError::RankineHugoniot(r.abs()));
        }
    }
    Ok(speed * (wl - wr) - (wl * pl.u - wr * pr.u))
}
