use std::sync::Arc;

use liouville_core::zeronumber::zero_number_trace;
use liouville_core::{
    zero_number, Boundary, Cadence, ConeSpec, Geometry, Grid, HomogeneousGradientField, InitialData, Perturbation,
    Solver, SolverConfig, StopRule,
};
use rand::{Rng, SeedableRng};

/// Longest chain `i_0 < … < i_k` with `v_{i_j} v_{i_{j+1}} < 0`, after
/// discarding near-zero entries.
fn chain_length(v: &[f64]) -> usize {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let w: Vec<f64> = v.iter().copied().filter(|x| x.abs() > 1e-9 * scale).collect();
    let mut best = vec![0usize; w.len()];
    for j in 0..w.len() {
        for i in 0..j {
            if w[i] * w[j] < 0.0 {
                best[j] = best[j].max(best[i] + 1);
            }
        }
    }
    best.into_iter().max().unwrap_or(0)
}

#[test]
fn random_long_sequences_match_the_chain_definition() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10_000 {
        let len = rng.gen_range(13..80);
        let v: Vec<f64> = (0..len)
            .map(|_| match rng.gen_range(0..4) {
                0 => 0.0,
                _ => rng.gen_range(-1.0..1.0),
            })
            .collect();
        assert_eq!(zero_number(&v), chain_length(&v), "{v:?}");
    }
}

#[test]
fn coupled_system_zero_numbers_do_not_increase() {
    let field = HomogeneousGradientField::gradient_coupled(0.0, 0.5).unwrap();
    let geo = Geometry::line(12.0, Boundary::Dirichlet, Boundary::Dirichlet);
    let grid = Arc::new(Grid::new(geo, 241).unwrap());
    let spec = ConeSpec::pair([8, 8, 8, 8]);
    let times: Vec<f64> = (1..=40).map(|j| 0.025 * j as f64).collect();
    let mut passed = 0;
    for seed in 0..50 {
        let data = InitialData::RandomInCone { spec: spec.clone(), seed, amplitude: 1.0, bumps: 4 };
        let mut s = Solver::new(grid.clone(), field.clone(), Perturbation::NONE, SolverConfig::default()).unwrap();
        let init = s.state(data.sample(&grid, 2).unwrap()).unwrap();
        let tr = s.run_until(init, &StopRule::time(1.0).or_sup_norm(1e3), &Cadence::Times(times.clone())).unwrap();
        let z = zero_number_trace(&tr, &spec);
        if z.passed() == Some(true) {
            passed += 1;
        }
    }
    assert!(passed >= 48, "{passed}/50");
}

#[test]
fn mixed_combinations_are_not_asserted() {
    let field = HomogeneousGradientField::gradient_coupled(0.0, 0.5).unwrap();
    let geo = Geometry::line(4.0, Boundary::Dirichlet, Boundary::Dirichlet);
    let grid = Arc::new(Grid::new(geo, 41).unwrap());
    let mut spec = ConeSpec::pair([8, 8, 8, 8]);
    spec.combos[0].coeffs = vec![2.0, 1.0];
    let mut s = Solver::new(grid.clone(), field, Perturbation::NONE, SolverConfig::default()).unwrap();
    let init = s.state(InitialData::Flat { values: vec![0.1, 0.2] }.sample(&grid, 2).unwrap()).unwrap();
    let tr = s.run_until(init, &StopRule::time(0.1), &Cadence::EverySteps(1)).unwrap();
    assert_eq!(zero_number_trace(&tr, &spec).passed(), None);
}
