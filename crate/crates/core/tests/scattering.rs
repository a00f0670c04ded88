//! End-to-end scattering checks on the (16, 8192) lattice.

use num_complex::Complex64;
use timeop::evolution::survival_series;
use timeop::lattice::MomentumGrid;
use timeop::scattering::{
    completeness_check, conjugated_t, ground_state, interacting_propagate, t1_symmetry_check,
    wave_operator, Direction, WaveOperatorOptions, BOUND_OVERLAP_LIMIT,
};
use timeop::states::{make_bump, std_dev, WaveFunction};
use timeop::{PotentialSpec, TimeOperator};

fn grid() -> MomentumGrid {
    MomentumGrid::new(16.0, 8192).unwrap()
}

fn eta() -> WaveFunction {
    make_bump(1.0, 2.0, &grid()).unwrap()
}

#[test]
fn barrier_wave_operators_preserve_the_norm() {
    let opts = WaveOperatorOptions::default();
    let v = PotentialSpec::gaussian(grid(), 0.1).unwrap();
    assert!(v.putnam_class());
    for d in [Direction::Plus, Direction::Minus] {
        let u = wave_operator(&eta(), &v, d, &opts).unwrap();
        assert!(u.converged, "{:?}", u.increments);
        assert!((u.state.norm() - eta().norm()).abs() < 1e-6 + opts.tol);
    }
}

#[test]
fn well_bound_state_is_orthogonal_to_the_scattering_range() {
    let opts = WaveOperatorOptions::default();
    let v = PotentialSpec::gaussian(grid(), -1.0).unwrap();
    assert!(v.kuroda_class() && !v.putnam_class());
    let bound = ground_state(&v, 0.05, 20_000, 1e-12).unwrap();
    assert!(bound.energy < 0.0);
    let r = completeness_check(&eta(), &v, &bound, Direction::Plus, &opts).unwrap();
    assert!(r.passed(), "{}", r.to_json());
    assert_eq!(r.tolerances["overlap"], BOUND_OVERLAP_LIMIT);
}

#[test]
fn conjugated_time_operator_is_symmetric_and_transports_the_mean() {
    let opts = WaveOperatorOptions::default();
    let v = PotentialSpec::gaussian(grid(), 0.1).unwrap();
    let zeta = make_bump(1.5, 2.5, &grid()).unwrap();
    let r = t1_symmetry_check(&eta(), &zeta, &v, Direction::Plus, &opts).unwrap();
    assert!(r.passed(), "{}", r.to_json());
}

#[test]
fn survival_bound_carries_over_to_the_interacting_pair() {
    let opts = WaveOperatorOptions::default();
    let v = PotentialSpec::gaussian(grid(), 0.1).unwrap();
    let eta = eta().normalized();
    let psi = wave_operator(&eta, &v, Direction::Plus, &opts)
        .unwrap()
        .into_converged()
        .unwrap();
    let t_psi = conjugated_t(&psi, &v, Direction::Plus, &opts.conjugation()).unwrap();
    let mean = psi.inner(&t_psi).unwrap().re / psi.norm_sqr();
    let spread = t_psi.axpy(Complex64::new(-mean, 0.0), &psi).unwrap().norm() / psi.norm();
    let free_spread = std_dev(&TimeOperator, &eta).unwrap();
    assert!(
        (spread - free_spread).abs() < 1e-2 * free_spread,
        "{spread} vs {free_spread}"
    );

    let times = [1.0, 2.0, 4.0, 8.0];
    let free = survival_series(&eta, &eta, &times).unwrap();
    for (t, p_free) in times.iter().zip(&free.probabilities) {
        let evolved = interacting_propagate(&psi, &v, *t, opts.dt).unwrap();
        let p = psi.inner(&evolved).unwrap().norm_sqr() / psi.norm_sqr().powi(2);
        assert!(p <= 4.0 * spread * spread / (t * t), "t = {t}: P = {p}");
        assert!((p - p_free).abs() < 1e-2, "t = {t}: {p} vs free {p_free}");
    }
}
