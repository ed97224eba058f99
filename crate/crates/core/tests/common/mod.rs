//! Shared test oracles: finite-difference derivatives, random state
//! samplers, and symmetric eigenvalue helpers. Everything here is
//! independent of the closed-form implementation paths it checks.

#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;

use maxdiss_core::state::{ConsState, StandardState};
use maxdiss_core::thermo::GasModel;

/// Central-difference gradient with step `1e-6 * max(1, |x_i|)`.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let h = 1e-6 * x[i].abs().max(1.0);
        let mut hi = x.to_vec();
        let mut lo = x.to_vec();
        hi[i] += h;
        lo[i] -= h;
        grad.push((f(&hi) - f(&lo)) / (2.0 * h));
    }
    grad
}

/// Richardson-extrapolated central second differences of a scalar function:
/// one level of extrapolation kills the leading `h^2` truncation term.
pub fn fd_hessian(f: impl Fn(&[f64]) -> f64 + Copy, x: &[f64], base_step: f64) -> Vec<Vec<f64>> {
    let n = x.len();
    let raw = |h_scale: f64| -> Vec<Vec<f64>> {
        let h: Vec<f64> = x.iter().map(|v| h_scale * v.abs().max(1.0)).collect();
        let mut m = vec![vec![0.0; n]; n];
        let f0 = f(x);
        for i in 0..n {
            let mut hi = x.to_vec();
            let mut lo = x.to_vec();
            hi[i] += h[i];
            lo[i] -= h[i];
            m[i][i] = (f(&hi) - 2.0 * f0 + f(&lo)) / (h[i] * h[i]);
            for j in (i + 1)..n {
                let mut pp = x.to_vec();
                let mut pm = x.to_vec();
                let mut mp = x.to_vec();
                let mut mm = x.to_vec();
                pp[i] += h[i];
                pp[j] += h[j];
                pm[i] += h[i];
                pm[j] -= h[j];
                mp[i] -= h[i];
                mp[j] += h[j];
                mm[i] -= h[i];
                mm[j] -= h[j];
                let v = (f(&pp) - f(&pm) - f(&mp) + f(&mm)) / (4.0 * h[i] * h[j]);
                m[i][j] = v;
                m[j][i] = v;
            }
        }
        m
    };
    let coarse = raw(base_step);
    let fine = raw(0.5 * base_step);
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            out[i][j] = (4.0 * fine[i][j] - coarse[i][j]) / 3.0;
        }
    }
    out
}

/// Central differences of a vector field (used for Hessians from verified
/// gradients), symmetrized.
pub fn fd_jacobian_symmetric(
    g: impl Fn(&[f64]) -> Vec<f64>,
    x: &[f64],
    base_step: f64,
) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        let h = base_step * x[i].abs().max(1.0);
        let mut hi = x.to_vec();
        let mut lo = x.to_vec();
        hi[i] += h;
        lo[i] -= h;
        let ghi = g(&hi);
        let glo = g(&lo);
        for j in 0..n {
            m[i][j] = (ghi[j] - glo[j]) / (2.0 * h);
        }
    }
    let mut sym = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            sym[i][j] = 0.5 * (m[i][j] + m[j][i]);
        }
    }
    sym
}

pub fn max_eigenvalue(matrix: &[Vec<f64>]) -> f64 {
    let n = matrix.len();
    let m = DMatrix::from_fn(n, n, |i, j| matrix[i][j]);
    let eig = m.symmetric_eigen();
    eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

pub fn frobenius_norm(matrix: &[Vec<f64>]) -> f64 {
    matrix
        .iter()
        .flat_map(|row| row.iter())
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
}

/// Random strictly admissible conservative state, comfortably inside the
/// law's domain (ratio at least 0.3 above the cold threshold).
pub fn sample_admissible(rng: &mut impl Rng, model: &GasModel) -> ConsState<1> {
    let gamma = model.gamma();
    let threshold = model.law().cold_pressure();
    let rho: f64 = rng.gen_range(0.4..2.5);
    let u: f64 = rng.gen_range(-1.5..1.5);
    let ratio: f64 = threshold + rng.gen_range(0.3..3.0);
    let e = ratio * rho.powf(gamma - 1.0) / (gamma - 1.0);
    ConsState::new(rho, [rho * u], 0.5 * rho * u * u + rho * e)
}

/// Random strictly admissible reference in standard variables.
pub fn sample_standard(rng: &mut impl Rng, model: &GasModel) -> StandardState<1> {
    let cons = sample_admissible(rng, model);
    model.to_standard(&cons).expect("sampled state is interior")
}

/// The five laws used throughout the acceptance checks.
pub fn shipped_laws() -> Vec<(String, GasModel)> {
    vec![
        ("perfect gamma=1.4".into(), GasModel::perfect_gas(1.4).unwrap()),
        ("perfect gamma=5/3".into(), GasModel::perfect_gas(5.0 / 3.0).unwrap()),
        ("perfect gamma=2".into(), GasModel::perfect_gas(2.0).unwrap()),
        ("third-law gamma=1.4".into(), GasModel::third_law(1.4).unwrap()),
        ("cold-pressure gamma=5/3 pbar=0.7".into(), GasModel::cold_pressure_gas(5.0 / 3.0, 0.7).unwrap()),
    ]
}

/// Total entropy as a function of the flat coordinate vector
/// `[rho, m, E]`, for finite-difference oracles.
pub fn entropy_of_coords(model: &GasModel) -> impl Fn(&[f64]) -> f64 + Copy + '_ {
    move |x: &[f64]| model.total_entropy(&ConsState::new(x[0], [x[1]], x[2]))
}

/// Entropy gradient as a flat vector function, for Hessian oracles.
pub fn gradient_of_coords(model: &GasModel) -> impl Fn(&[f64]) -> Vec<f64> + Copy + '_ {
    move |x: &[f64]| {
        let g = model
            .entropy_gradient(&ConsState::new(x[0], [x[1]], x[2]))
            .expect("gradient sample must stay interior");
        vec![g.d_rho, g.d_momentum[0], g.d_energy]
    }
}
