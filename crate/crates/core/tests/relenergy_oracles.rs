//! Dual-evaluation and change-of-variables oracles for the relative energy.

mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;
use maxdiss_core::relenergy::{
    ballistic_free_energy, bregman_gap, relative_energy_conservative, relative_energy_standard,
    PreparedReference,
};
use maxdiss_core::state::ConsState;
use maxdiss_core::thermo::GasModel;

#[test]
fn dual_forms_agree_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for gamma in [1.4, 5.0 / 3.0, 2.0] {
        let model = GasModel::perfect_gas(gamma).unwrap();
        for _ in 0..3000 {
            let state = sample_admissible(&mut rng, &model);
            let reference = sample_standard(&mut rng, &model);
            let gap = bregman_gap(&model, &state, &reference).unwrap();
            let value = relative_energy_conservative(&model, &state, &reference).unwrap();
            assert!(
                gap <= 1e-10 * value.abs().max(1.0),
                "gamma {gamma}: gap {gap} vs value {value}"
            );
        }
    }
}

#[test]
fn tampered_gradient_breaks_the_identity() {
    // negative control: the Bregman form with a negated momentum slope must
    // drift far beyond the contractual gap
    let model = GasModel::perfect_gas(1.4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let reference = sample_standard(&mut rng, &model);
    let prepared = PreparedReference::new(&model, &reference).unwrap();
    let ref_cons = prepared.conservative;
    let gradient = model.entropy_gradient(&ref_cons).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let state = sample_admissible(&mut rng, &model);
        let direct = prepared.relative_energy_direct(&model, &state);
        let entropy = model.total_entropy(&state);
        let bracket = entropy
            - model.total_entropy(&ref_cons)
            - gradient.d_rho * (state.rho - ref_cons.rho)
            - (-gradient.d_momentum[0]) * (state.momentum[0] - ref_cons.momentum[0])
            - gradient.d_energy * (state.total_energy - ref_cons.total_energy);
        let tampered = -reference.theta * bracket;
        worst = worst.max((tampered - direct).abs() / direct.abs().max(1.0));
    }
    assert!(worst > 1e-3, "negated momentum slope should blow the gap, got {worst}");
}

#[test]
fn standard_and_conservative_forms_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    for (name, model) in shipped_laws() {
        for _ in 0..2000 {
            let state = sample_standard(&mut rng, &model);
            let reference = sample_standard(&mut rng, &model);
            let via_standard = relative_energy_standard(&model, &state, &reference).unwrap();
            let cons = model.to_conservative(&state).unwrap();
            let via_conservative =
                relative_energy_conservative(&model, &cons, &reference).unwrap();
            let scale = via_conservative.abs().max(1.0);
            assert!(
                (via_standard - via_conservative).abs() <= 1e-10 * scale,
                "{name}: {via_standard} vs {via_conservative}"
            );
        }
    }
}

#[test]
fn coercive_on_random_pairs_and_zero_only_at_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    for (name, model) in shipped_laws() {
        for _ in 0..2000 {
            let state = sample_admissible(&mut rng, &model);
            let reference = sample_standard(&mut rng, &model);
            let v = relative_energy_conservative(&model, &state, &reference).unwrap();
            assert!(v >= 0.0, "{name}: relative energy {v} negative");
            // distinct states keep a strictly positive distance
            let ref_cons = model.to_conservative(&reference).unwrap();
            if state.distance(&ref_cons) > 1e-3 {
                assert!(v > 0.0, "{name}: zero at distance {}", state.distance(&ref_cons));
            }
        }
        // exact equality case
        let reference = sample_standard(&mut rng, &model);
        let cons = model.to_conservative(&reference).unwrap();
        let v = relative_energy_conservative(&model, &cons, &reference).unwrap();
        assert!(v.abs() <= 1e-12, "{name}: equality case {v}");
    }
}

#[test]
fn quadratic_near_the_reference() {
    // perturbing the candidate by delta changes the relative energy at
    // second order: halving delta divides the value by about four
    let model = GasModel::perfect_gas(1.4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(59);
    for _ in 0..50 {
        let reference = sample_standard(&mut rng, &model);
        let base = model.to_conservative(&reference).unwrap();
        let value_at = |delta: f64| {
            let s = ConsState::new(
                base.rho * (1.0 + delta),
                [base.momentum[0] + delta],
                base.total_energy * (1.0 + delta),
            );
            relative_energy_conservative(&model, &s, &reference).unwrap()
        };
        let coarse = value_at(1e-3);
        let fine = value_at(5e-4);
        let ratio = coarse / fine;
        assert!(
            (ratio - 4.0).abs() < 0.25,
            "expected quadratic scaling, ratio {ratio}"
        );
    }
}

#[test]
fn ballistic_free_energy_at_reference_temperature() {
    // H_theta(rho, theta) = rho (e - theta s): the free energy itself
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for (name, model) in shipped_laws() {
        let s = sample_standard(&mut rng, &model);
        let h = ballistic_free_energy(&model, s.rho, s.theta, s.theta).unwrap();
        let e = model.specific_internal_energy(s.rho, s.theta).unwrap();
        let entropy = model.specific_entropy(s.rho, e).unwrap();
        let expected = s.rho * (e - s.theta * entropy);
        assert!((h - expected).abs() <= 1e-12 * expected.abs().max(1.0), "{name}");
    }
}
