//! Phase-space states in conservative and standard variables.
//!
//! The conservative state (density, momentum, total energy) is the primary
//! representation: it stays meaningful on the closed phase space including
//! vacuum, where velocity and temperature are undefined. States are generic
//! over the space dimension `N`; the shipped solver instantiates `N = 1`.

/// A point of the conservative phase space: `rho >= 0`, `momentum` free,
/// `total_energy >= 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConsState<const N: usize> {
    pub rho: f64,
    pub momentum: [f64; N],
    pub total_energy: f64,
}

/// Off-vacuum state in standard variables: positive density and temperature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StandardState<const N: usize> {
    pub rho: f64,
    pub theta: f64,
    pub velocity: [f64; N],
}

/// Kinetic energy as a lower semi-continuous convex function on the closed
/// phase space. Returns `+inf` for massless states carrying momentum.
pub fn kinetic_energy<const N: usize>(rho: f64, momentum: &[f64; N]) -> f64 {
    let m2 = momentum.iter().map(|m| m * m).sum::<f64>();
    if rho > 0.0 {
        0.5 * m2 / rho
    } else if m2 == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

impl<const N: usize> ConsState<N> {
    pub fn new(rho: f64, momentum: [f64; N], total_energy: f64) -> Self {
        Self { rho, momentum, total_energy }
    }

    /// Whether the state lies in the closed phase space at all.
    pub fn in_phase_space(&self) -> bool {
        self.rho >= 0.0
            && self.total_energy >= 0.0
            && self.rho.is_finite()
            && self.total_energy.is_finite()
            && self.momentum.iter().all(|m| m.is_finite())
    }

    pub fn kinetic_energy(&self) -> f64 {
        kinetic_energy(self.rho, &self.momentum)
    }

    /// Internal energy density `total_energy - kinetic`; `-inf` when the
    /// kinetic part is infinite.
    pub fn internal_energy_density(&self) -> f64 {
        self.total_energy - self.kinetic_energy()
    }

    /// Componentwise max-norm distance, used when coalescing measure atoms.
    pub fn distance(&self, other: &Self) -> f64 {
        let mut d = (self.rho - other.rho).abs();
        d = d.max((self.total_energy - other.total_energy).abs());
        for k in 0..N {
            d = d.max((self.momentum[k] - other.momentum[k]).abs());
        }
        d
    }

    pub fn velocity(&self) -> Option<[f64; N]> {
        if self.rho > 0.0 {
            let mut u = [0.0; N];
            for k in 0..N {
                u[k] = self.momentum[k] / self.rho;
            }
            Some(u)
        } else {
            None
        }
    }
}

impl<const N: usize> StandardState<N> {
    pub fn new(rho: f64, theta: f64, velocity: [f64; N]) -> Self {
        Self { rho, theta, velocity }
    }

    pub fn speed_squared(&self) -> f64 {
        self.velocity.iter().map(|u| u * u).sum()
    }
}
