//! Acceptance suite: one test per criterion, each printing a single
//! `PASS`/`FAIL` line before asserting.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use timeop::evolution::{
    free_tweakwr_residual, half_time, half_time_check, heisenberg_shift_check, log_spaced,
    rapid_decay_probe, survival_bound_check, survival_series, weighted_decay_scan, RAPID_DECAY_END,
    RAPID_DECAY_START, RAPID_DECAY_STEP,
};
use timeop::lattice::{BoxSequence, MomentumGrid};
use timeop::operators::{
    apply_a_delta, apply_t0, domain_diagnostic, interval_ccr_demo, lavine_commutator_residual,
    DomainProbe,
};
use timeop::scattering::{
    intertwining_check, t1_tweakwr_check, wave_operator, Direction, WaveOperatorOptions,
    COMBINED_TOLERANCE,
};
use timeop::spectral::{
    ac_bound_sweep, commutator_check, f_eps_lambda, f_eps_lambda_direct, kobe_rows, kobe_sequence,
    resolvent_bound_check, spectral_weight_h0, BorelSet,
};
use timeop::states::{make_phi_n, StateFamily, WaveFunction};
use timeop::{PotentialSpec, Report};

const SEED: u64 = 20_240_601;

fn verdict(criterion: u32, title: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("criterion {criterion:>2} [{tag}] {title}: {detail}");
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn failures(r: &Report) -> String {
    r.failures()
        .map(|v| format!("{}={:e} ({})", v.name, v.value, v.condition))
        .collect::<Vec<_>>()
        .join(", ")
}

fn sci(xs: &[f64]) -> String {
    format!(
        "[{}]",
        xs.iter()
            .map(|x| format!("{x:.2e}"))
            .collect::<Vec<_>>()
            .join(", ")
    )
}

fn bump_families() -> [StateFamily; 3] {
    [
        StateFamily::Bump { k1: 1.0, k2: 2.0 },
        StateFamily::Bump { k1: 0.5, k2: 2.5 },
        StateFamily::Bump { k1: -2.0, k2: -0.5 },
    ]
}

fn domain_families() -> Vec<StateFamily> {
    let mut v: Vec<StateFamily> = (2..=6).map(|n| StateFamily::PhiN { n, a0: 1.0 }).collect();
    v.extend(bump_families());
    v
}

fn domain_states(grid: &MomentumGrid) -> Vec<(String, WaveFunction)> {
    domain_families()
        .iter()
        .map(|f| (f.label(), f.build(grid).unwrap()))
        .collect()
}

#[test]
fn criterion_01_closed_form_survival() {
    let grid = MomentumGrid::desk();
    let times: Vec<f64> = (0..=200).map(|i| 0.25 * i as f64).collect();
    let mut worst: f64 = 0.0;
    let mut at = (0, 0.0, 0.0);
    for n in 2..=6u32 {
        for a0 in [0.5, 1.0, 2.0] {
            let psi = make_phi_n(n, a0, &grid).unwrap();
            let s = survival_series(&psi, &psi, &times).unwrap();
            for (t, p) in times.iter().zip(&s.probabilities) {
                let exact = (1.0 + t * t / (16.0 * a0 * a0)).powf(-(n as f64) - 0.5);
                let rel = (p / exact - 1.0).abs();
                if rel > worst {
                    worst = rel;
                    at = (n, a0, *t);
                }
            }
        }
    }
    verdict(
        1,
        "closed-form survival probability",
        worst < 1e-6,
        &format!(
            "max relative error {worst:.2e} (< 1e-6) at n={}, a0={}, t={}",
            at.0, at.1, at.2
        ),
    );
}

#[test]
fn criterion_02_survival_inequality() {
    let grid = MomentumGrid::desk();
    let times = log_spaced(0.1, 100.0, 60);
    let mut bad = Vec::new();
    let mut checked = 0;
    for (label, psi) in domain_states(&grid) {
        let r = survival_bound_check(&label, &psi, &times).unwrap();
        checked += times.len();
        if !r.passed() {
            bad.push(format!("{label}: {}", failures(&r)));
        }
    }
    verdict(
        2,
        "survival inequality 4 (dT)^2 |psi|^2 / t^2 >= P(t)",
        bad.is_empty(),
        &format!(
            "{checked} (state, t) pairs, violations: {}",
            if bad.is_empty() {
                "none".into()
            } else {
                bad.join("; ")
            }
        ),
    );
}

#[test]
fn criterion_03_kobe_sequence() {
    let grid = MomentumGrid::desk();
    let r = kobe_sequence(&[2, 5, 10, 50, 100], 1.0, &grid).unwrap();
    let n200 = kobe_rows(&[200], 1.0, &grid).unwrap()[0];
    let rel = (n200.product - 0.5) / 0.5;
    let pass = r.passed() && rel.abs() <= 3e-3;
    verdict(
        3,
        "uncertainty products along phi_n",
        pass,
        &format!(
            "sequence checks {}; n=200 product {:.6} is {:.3}% above 1/2 (needs <= 0.3%)",
            if r.passed() {
                "ok".to_string()
            } else {
                failures(&r)
            },
            n200.product,
            100.0 * rel
        ),
    );
}

#[test]
fn criterion_04_half_time_bound() {
    let grid = MomentumGrid::desk();
    let mut bad = Vec::new();
    for (label, psi) in domain_states(&grid) {
        let r = half_time_check(&label, &psi, 100.0).unwrap();
        if !r.passed() {
            bad.push(label);
        }
    }
    let phi2 = make_phi_n(2, 1.0, &grid).unwrap();
    let tau = half_time(&phi2, 100.0).unwrap().tau;
    let exact = 4.0 * (2f64.powf(0.4) - 1.0).sqrt();
    let r = half_time_check("phi_2", &phi2, 100.0).unwrap();
    let bound = r.quantities["bound"].as_f64().unwrap();
    let pass = bad.is_empty() && (tau - 2.2610).abs() < 1e-3 && (bound - 8.0).abs() < 1e-4;
    verdict(
        4,
        "half-time bound 2 sqrt(2) dT >= tau_h",
        pass,
        &format!(
            "phi_2: tau_h = {tau:.6} (closed form {exact:.6}), bound = {bound:.6}; failing states: {bad:?}"
        ),
    );
}

#[test]
fn criterion_05_absolute_continuity() {
    let grid = MomentumGrid::desk();
    let states = domain_states(&grid);
    let r = ac_bound_sweep(&states, SEED, 100, 50.0).unwrap();
    let mut degenerate: f64 = 0.0;
    for (_, psi) in &states {
        for e in [0.0, 0.3, 1.0, 2.5, 10.0, 31.7] {
            degenerate = degenerate
                .max(spectral_weight_h0(psi, &BorelSet::interval(e, e).unwrap()).unwrap());
        }
    }
    verdict(
        5,
        "absolute-continuity bound |E(B) psi|^2 <= |T psi| |psi| |B|",
        r.passed() && degenerate < 1e-6,
        &format!(
            "seed {SEED}, 100 intervals x {} states: {}; max weight on zero-length sets {degenerate:e}",
            states.len(),
            if r.passed() { "no violations".to_string() } else { failures(&r) }
        ),
    );
}

#[test]
fn criterion_06_resolvent_and_f() {
    let grid = MomentumGrid::desk();
    let mut bad = Vec::new();
    let phi2 = make_phi_n(2, 1.0, &grid).unwrap();
    if !resolvent_bound_check(&phi2, 0.5, 0.01).unwrap().passed() {
        bad.push("phi_2 at (0.5, 0.01)".to_string());
    }
    for f in bump_families() {
        let psi = f.build(&grid).unwrap();
        for i in 0..=40 {
            let lambda = 0.5 * i as f64;
            for eps in [1.0, 0.1, 0.01] {
                if !resolvent_bound_check(&psi, lambda, eps).unwrap().passed() {
                    bad.push(format!("{} at ({lambda}, {eps})", f.label()));
                }
            }
        }
    }
    let mut f_err: f64 = 0.0;
    let mut f_max: f64 = 0.0;
    for eps in [0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0] {
        for i in 0..=40 {
            let lambda = -20.0 + i as f64;
            let closed = f_eps_lambda(eps, lambda).unwrap();
            f_err = f_err.max((closed - f_eps_lambda_direct(eps, lambda).unwrap()).abs());
            f_max = f_max.max(closed.abs());
        }
    }
    verdict(
        6,
        "resolvent bound and f(eps, lambda) identity",
        bad.is_empty() && f_err < 1e-6 && f_max <= FRAC_PI_2,
        &format!("resolvent violations {bad:?}; max |f closed - f direct| = {f_err:.2e}; max |f| = {f_max:.6}"),
    );
}

fn wr_residual_on(grid: &MomentumGrid, t: Complex64) -> f64 {
    let psi = StateFamily::Bump { k1: 1.0, k2: 2.0 }.build(grid).unwrap();
    free_tweakwr_residual(&psi, t).unwrap()
}

#[test]
fn criterion_07_weak_weyl_relation() {
    let grid = MomentumGrid::desk();
    let times = [
        Complex64::new(1.0, 0.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(3.0, 0.0),
        Complex64::new(-3.0, 0.0),
        Complex64::new(1.0, -0.5),
    ];
    let mut worst: f64 = 0.0;
    for f in bump_families() {
        let psi = f.build(&grid).unwrap();
        for t in times {
            worst = worst.max(free_tweakwr_residual(&psi, t).unwrap());
        }
    }
    let t = Complex64::new(3.0, 0.0);
    let errs: Vec<f64> = [1024, 2048, 4096]
        .iter()
        .map(|&n| wr_residual_on(&MomentumGrid::new(8.0, n).unwrap(), t))
        .collect();
    let order = (errs[1] / errs[2]).log2();
    let mut shift_ok = true;
    let mut shift_worst: f64 = 0.0;
    for f in bump_families() {
        let psi = f.build(&grid).unwrap();
        for t in [-3.0, -1.0, 1.0, 3.0, 5.0] {
            let r = heisenberg_shift_check(&psi, t).unwrap();
            shift_ok &= r.passed();
            shift_worst =
                shift_worst.max(r.quantities["difference"].as_f64().unwrap() / (1.0 + t.abs()));
        }
    }
    verdict(
        7,
        "T-weak Weyl relation and Heisenberg shift",
        worst < 1e-6 && order >= 5.5 && shift_ok,
        &format!(
            "max residual {worst:.2e} (< 1e-6); dk-halving residuals {} give order {order:.2} (>= 5.5); \
             max shift residual / (1+|t|) {shift_worst:.2e}",
            sci(&errs)
        ),
    );
}

#[test]
fn criterion_08_commutator_identities() {
    let grid = MomentumGrid::desk();
    let mut bad = Vec::new();
    for f in bump_families() {
        let psi = f.build(&grid).unwrap();
        for t in [0.5, 2.0, 8.0] {
            let r = commutator_check(&psi, t).unwrap();
            if !r.passed() {
                bad.push(format!("{} t={t}: {}", f.label(), failures(&r)));
            }
        }
    }
    verdict(
        8,
        "commutators of T0 with cos(tH0), sin(tH0)",
        bad.is_empty(),
        &format!("failures: {bad:?}"),
    );
}

#[test]
fn criterion_09_domain_diagnostics() {
    let halving = BoxSequence::halving(16.0, 1024, 4).unwrap();
    let mut problems = Vec::new();
    for f in domain_families() {
        let v = domain_diagnostic(&f, 0.0, DomainProbe::Extended, &halving).unwrap();
        if !v.converged() {
            problems.push(format!("{} not converged", f.label()));
        }
    }
    let mut exps = Vec::new();
    for n in [0, 1] {
        let v = domain_diagnostic(
            &StateFamily::PhiN { n, a0: 1.0 },
            0.0,
            DomainProbe::Extended,
            &halving,
        )
        .unwrap();
        if v.converged() || !v.growing() {
            problems.push(format!(
                "phi_{n} not diverging (exponent {:.3})",
                v.exponent
            ));
        }
        exps.push(v.exponent);
    }
    let widening = BoxSequence::widening(8.0, 1.0 / 64.0, 4).unwrap();
    let g = StateFamily::PowerTail { s: 1.0 };
    let at_rest = domain_diagnostic(
        &g,
        0.0,
        DomainProbe::Original,
        &BoxSequence::halving(32.0, 2048, 4).unwrap(),
    )
    .unwrap();
    if !at_rest.converged() {
        problems.push("g at t = 0 not converged".into());
    }
    let evolved = domain_diagnostic(&g, 1.0, DomainProbe::Original, &widening).unwrap();
    if evolved.converged() || evolved.exponent <= 0.0 {
        problems.push(format!(
            "evolved g not diverging (exponent {:.3})",
            evolved.exponent
        ));
    }

    let grid = MomentumGrid::desk();
    let bumps = bump_families();
    for (a, b) in [
        (bumps[0], bumps[0]),
        (bumps[0], bumps[1]),
        (bumps[1], bumps[1]),
    ] {
        let r = rapid_decay_probe(&a, &b, &grid, 4).unwrap();
        if !r.passed() {
            problems.push(format!(
                "rapid decay {} x {}: {}",
                a.label(),
                b.label(),
                failures(&r)
            ));
        }
    }
    let phi2 = StateFamily::PhiN { n: 2, a0: 1.0 };
    if rapid_decay_probe(&phi2, &phi2, &grid, 4).is_ok() {
        problems.push("rapid-decay probe accepted phi_2".into());
    }
    let p = phi2.build(&grid).unwrap();
    let scan = weighted_decay_scan(
        &p,
        &p,
        RAPID_DECAY_START,
        RAPID_DECAY_END,
        RAPID_DECAY_STEP,
        4,
    )
    .unwrap();
    let phi2_m4_at_end = scan[4].argmax == RAPID_DECAY_END;

    verdict(
        9,
        "domain diagnostics and rapid decay",
        problems.is_empty() && phi2_m4_at_end,
        &format!(
            "phi_0/phi_1 exponents {exps:.3?}; evolved g exponent {:.3}; phi_2 t^4|A| peaks at t = {}; problems: {problems:?}",
            evolved.exponent, scan[4].argmax
        ),
    );
}

#[test]
fn criterion_10_scattering_and_lavine() {
    let grid = MomentumGrid::new(16.0, 8192).unwrap();
    let eta = StateFamily::Bump { k1: 1.0, k2: 2.0 }.build(&grid).unwrap();
    let opts = WaveOperatorOptions::default();

    let zero = PotentialSpec::zero(grid);
    let id = wave_operator(&eta, &zero, Direction::Plus, &opts)
        .unwrap()
        .state
        .distance(&eta)
        .unwrap();

    let barrier = PotentialSpec::gaussian(grid, 0.1).unwrap();
    let u = wave_operator(&eta, &barrier, Direction::Plus, &opts).unwrap();
    let increments = u.increments.clone();
    let intertwine = intertwining_check(&eta, &barrier, 5.0, Direction::Plus, &opts).unwrap();
    let weyl = t1_tweakwr_check(&eta, &barrier, 2.0, Direction::Plus, &opts).unwrap();

    let desk = MomentumGrid::desk();
    let mut lavine_worst: f64 = 0.0;
    let mut monotone = true;
    for f in bump_families() {
        let b = f.build(&desk).unwrap();
        let t0 = apply_t0(&b).unwrap();
        let mut prev = f64::INFINITY;
        for delta in [1.0, 0.1, 0.01] {
            lavine_worst = lavine_worst.max(lavine_commutator_residual(&b, delta).unwrap());
            let gap = apply_a_delta(&b, delta).unwrap().distance(&t0).unwrap();
            monotone &= gap < prev;
            prev = gap;
        }
    }
    let pass = id < 1e-10
        && u.converged
        && intertwine.passed()
        && weyl.passed()
        && lavine_worst < 1e-6
        && monotone;
    verdict(
        10,
        "wave operators, conjugated time operator, Lavine commutator",
        pass,
        &format!(
            "V=0 deviation {id:.1e}; barrier increments {}; intertwining {:.2e}, T1 Weyl {:.2e} \
             (< {COMBINED_TOLERANCE}); Lavine residual {lavine_worst:.2e}, gap decreasing: {monotone}",
            sci(&increments),
            intertwine.verdicts[0].value,
            weyl.verdicts[0].value
        ),
    );
}

#[test]
fn criterion_11_interval_demo() {
    let theta = Complex64::from_polar(1.0, 0.4);
    let mut worst_residual: f64 = 0.0;
    for n in [1.0, 2.0] {
        let r = interval_ccr_demo(theta, 2.0 * PI * n).unwrap();
        for key in ["boundary_mismatch", "shift_residual"] {
            worst_residual = worst_residual.max(r.quantities[key].as_f64().unwrap());
        }
    }
    let mut least_mismatch = f64::INFINITY;
    for eps in [FRAC_PI_2, PI, 3.0] {
        let r = interval_ccr_demo(theta, eps).unwrap();
        least_mismatch = least_mismatch.min(r.quantities["boundary_mismatch"].as_f64().unwrap());
    }
    verdict(
        11,
        "interval counterexample to the Weyl form",
        worst_residual < 1e-10 && least_mismatch >= 1.0,
        &format!("residual at eps = 2 pi n: {worst_residual:.1e}; smallest mismatch off the lattice: {least_mismatch:.4}"),
    );
}
