//! The experiments behind each subcommand.
//!
//! Every experiment returns a [`Table`] for the CSV file and a [`Report`]
//! whose verdicts decide the exit code.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use timeop::evolution::{
    free_tweakwr_residual, half_time_check, heisenberg_shift_check, log_spaced,
    survival_bound_check, survival_series,
};
use timeop::lattice::{BoxSequence, MomentumGrid};
use timeop::operators::{domain_diagnostic, interval_ccr_demo, DomainProbe, DomainVerdict};
use timeop::scattering::{
    completeness_check, ground_state, intertwining_check, t1_symmetry_check, t1_tweakwr_check,
    wave_operator, Direction,
};
use timeop::spectral::{
    ac_bound_sweep, commutator_residuals, f_eps_lambda, f_eps_lambda_direct, kobe_sequence,
    phi_n_uncertainty, resolvent_bound_check,
};
use timeop::states::{std_dev, StateFamily, WaveFunction};
use timeop::{FreeHamiltonian, PotentialSpec, Report, TimeOperator};

use crate::config::{ConfigError, ExperimentConfig, DEFAULT_GRID, DEFAULT_SCATTER_GRID};

/// CSV payload: a header and rows of pre-formatted cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub table: Table,
    pub report: Report,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Numerics(#[from] timeop::Error),
}

/// Shortest round-trip form, with an exponent for very small or large values.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn blank() -> String {
    String::new()
}

const SURVIVAL_REL_TOL: f64 = 1e-6;
const WEYL_TOL: f64 = 1e-6;
const F_TOL: f64 = 1e-6;

/// Upper end of the energy window for the random intervals.
const AC_ENERGY_MAX: f64 = 50.0;

fn bump_families(cfg: &ExperimentConfig) -> Vec<StateFamily> {
    cfg.bumps
        .iter()
        .map(|&[k1, k2]| StateFamily::Bump { k1, k2 })
        .collect()
}

fn phi_families(cfg: &ExperimentConfig) -> Vec<StateFamily> {
    cfg.phi_n
        .iter()
        .map(|&n| StateFamily::PhiN { n, a0: cfg.a0 })
        .collect()
}

fn domain_states(
    cfg: &ExperimentConfig,
    grid: &MomentumGrid,
) -> Result<Vec<(StateFamily, WaveFunction)>, RunError> {
    phi_families(cfg)
        .into_iter()
        .chain(bump_families(cfg))
        .map(|f| Ok((f, f.build(grid)?)))
        .collect()
}

fn header(name: &str, relation: &str, cfg: &ExperimentConfig, grid: MomentumGrid) -> Report {
    let mut r = Report::new(name, relation)
        .with_grid(grid)
        .with_seed(cfg.seed);
    r.input("config", cfg);
    r
}

/// Survival probabilities on log-spaced times, the closed form for `phi_n`
/// and the `4 (Delta T)^2 / t^2` bound.
///
/// Columns: `state, t, probability, closed_form, bound`.
pub fn survival(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    let grid = cfg.grid_or(DEFAULT_GRID)?;
    let times = log_spaced(cfg.t_min, cfg.horizon, cfg.t_count);
    let mut table = Table::new(&["state", "t", "probability", "closed_form", "bound"]);
    let mut report = header(
        "survival",
        "P_psi(t) <= 4 (Delta T0)^2 ||psi||^2 / t^2; P_phi_n(t) = (1 + t^2/16 a0^2)^(-n-1/2)",
        cfg,
        grid,
    );
    report.tolerance("closed_form_relative", SURVIVAL_REL_TOL);
    for (family, psi) in domain_states(cfg, &grid)? {
        let label = family.label();
        let series = survival_series(&psi, &psi, &times)?;
        let dt = std_dev(&TimeOperator, &psi)?;
        let norm2 = psi.norm_sqr();
        let mut worst: f64 = 0.0;
        for (&t, &p) in times.iter().zip(&series.probabilities) {
            let closed = match family {
                StateFamily::PhiN { n, a0 } => {
                    let c = (1.0 + t * t / (16.0 * a0 * a0)).powf(-(n as f64) - 0.5);
                    worst = worst.max((p / c - 1.0).abs());
                    num(c)
                }
                _ => blank(),
            };
            table.push(vec![
                label.clone(),
                num(t),
                num(p),
                closed,
                num(4.0 * dt * dt * norm2 / (t * t)),
            ]);
        }
        if matches!(family, StateFamily::PhiN { .. }) {
            report.check_below(
                &format!("{label}.closed_form_relative_error"),
                worst,
                SURVIVAL_REL_TOL,
            );
        }
        report.absorb(&label, survival_bound_check(&label, &psi, &times)?);
    }
    Ok(Outcome { table, report })
}

/// Uncertainty products along `n_list` and the half-time table.
///
/// Columns: `state, n, delta_t0, delta_h0, product, closed_form, tau_h, half_time_bound`.
pub fn uncertainty(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    let grid = cfg.grid_or(DEFAULT_GRID)?;
    let mut table = Table::new(&[
        "state",
        "n",
        "delta_t0",
        "delta_h0",
        "product",
        "closed_form",
        "tau_h",
        "half_time_bound",
    ]);
    let mut report = header(
        "uncertainty",
        "(Delta T0)(Delta H0) > 1/2 and tau_h <= 2 sqrt(2) Delta T0",
        cfg,
        grid,
    );
    report.absorb("kobe", kobe_sequence(&cfg.n_list, cfg.a0, &grid)?);

    let mut families: Vec<StateFamily> = cfg
        .n_list
        .iter()
        .map(|&n| StateFamily::PhiN { n, a0: cfg.a0 })
        .collect();
    families.extend(bump_families(cfg));
    for family in families {
        let label = family.label();
        let psi = family.build(&grid)?.normalized();
        let dt = std_dev(&TimeOperator, &psi)?;
        let dh = std_dev(&FreeHamiltonian, &psi)?;
        let half = half_time_check(&label, &psi, cfg.horizon)?;
        let (n, closed) = match family {
            StateFamily::PhiN { n, .. } => (n.to_string(), num(phi_n_uncertainty(n))),
            _ => (blank(), blank()),
        };
        let q = |k: &str| half.quantities[k].as_f64().unwrap_or(f64::NAN);
        table.push(vec![
            label.clone(),
            n,
            num(dt),
            num(dh),
            num(dt * dh),
            closed,
            num(q("tau_h")),
            num(q("bound")),
        ]);
        report.absorb(&format!("half_time.{label}"), half);
    }
    Ok(Outcome { table, report })
}

/// Absolute-continuity sweep, resolvent bound and the `f(eps, lambda)` table.
///
/// Columns: `eps, lambda, f_closed_form, f_direct, abs_error`.
pub fn bounds(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    let grid = cfg.grid_or(DEFAULT_GRID)?;
    let mut report = header(
        "bounds",
        "||E(B) psi||^2 <= ||T0 psi|| ||psi|| |B|; |Im <psi, R(lambda + i eps) psi>| <= pi ||T0 psi|| ||psi||",
        cfg,
        grid,
    );
    let states: Vec<(String, WaveFunction)> = domain_states(cfg, &grid)?
        .into_iter()
        .map(|(f, psi)| (f.label(), psi))
        .collect();
    report.absorb(
        "ac",
        ac_bound_sweep(&states, cfg.seed, cfg.intervals, AC_ENERGY_MAX)?,
    );

    let mut resolvent_failures = 0usize;
    let mut checks = 0usize;
    for (_, psi) in &states {
        for i in 0..=40 {
            for eps in [1.0, 0.1, 0.01] {
                checks += 1;
                if !resolvent_bound_check(psi, 0.5 * i as f64, eps)?.passed() {
                    resolvent_failures += 1;
                }
            }
        }
    }
    report.quantity("resolvent_checks", checks);
    report.check_at_most("resolvent_violations", resolvent_failures as f64, 0.0);

    let mut table = Table::new(&["eps", "lambda", "f_closed_form", "f_direct", "abs_error"]);
    let mut worst: f64 = 0.0;
    let mut largest: f64 = 0.0;
    for eps in [0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0] {
        for i in 0..=40 {
            let lambda = -20.0 + i as f64;
            let closed = f_eps_lambda(eps, lambda)?;
            let direct = f_eps_lambda_direct(eps, lambda)?;
            worst = worst.max((closed - direct).abs());
            largest = largest.max(closed.abs());
            table.push(vec![
                num(eps),
                num(lambda),
                num(closed),
                num(direct),
                num((closed - direct).abs()),
            ]);
        }
    }
    report.tolerance("f_direct", F_TOL);
    report.check_below("f_closed_vs_direct", worst, F_TOL);
    report.check_at_most("f_max_abs", largest, FRAC_PI_2);
    Ok(Outcome { table, report })
}

/// Residuals of the T-weak Weyl relation, the Heisenberg shift and the
/// commutator identities on bump states.
///
/// Columns: `state, relation, t_re, t_im, residual`.
pub fn weylrel(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    let grid = cfg.grid_or(DEFAULT_GRID)?;
    let mut table = Table::new(&["state", "relation", "t_re", "t_im", "residual"]);
    let mut report = header(
        "weylrel",
        "T0 exp(-itH0) = exp(-itH0)(T0 + t) for Im t <= 0; <T0>_t = <T0> + t; [T0, cos tH0], [T0, sin tH0]",
        cfg,
        grid,
    );
    report.tolerance("weyl", WEYL_TOL);
    let weyl_times = [
        Complex64::new(1.0, 0.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(3.0, 0.0),
        Complex64::new(-3.0, 0.0),
        Complex64::new(1.0, -0.5),
    ];
    for family in bump_families(cfg) {
        let label = family.label();
        let psi = family.build(&grid)?;
        let mut worst: f64 = 0.0;
        for t in weyl_times {
            let res = free_tweakwr_residual(&psi, t)?;
            worst = worst.max(res);
            table.push(vec![
                label.clone(),
                "weyl".into(),
                num(t.re),
                num(t.im),
                num(res),
            ]);
        }
        report.check_below(&format!("{label}.weyl_max_residual"), worst, WEYL_TOL);
        for t in [-3.0, -1.0, 1.0, 3.0, 5.0] {
            let r = heisenberg_shift_check(&psi, t)?;
            let diff = r.quantities["difference"].as_f64().unwrap_or(f64::NAN);
            table.push(vec![
                label.clone(),
                "heisenberg_shift".into(),
                num(t),
                num(0.0),
                num(diff),
            ]);
            report.absorb(&format!("{label}.shift_t{t}"), r);
        }
        for t in [0.5, 2.0, 8.0] {
            let (c, s) = commutator_residuals(&psi, t)?;
            table.push(vec![
                label.clone(),
                "commutator_cos".into(),
                num(t),
                num(0.0),
                num(c),
            ]);
            table.push(vec![
                label.clone(),
                "commutator_sin".into(),
                num(t),
                num(0.0),
                num(s),
            ]);
            let limit = 1e-6 * (1.0 + t) * psi.norm();
            report.check_below(&format!("{label}.commutator_cos_t{t}"), c, limit);
            report.check_below(&format!("{label}.commutator_sin_t{t}"), s, limit);
        }
    }
    Ok(Outcome { table, report })
}

/// Domain diagnostics: `phi_0`, `phi_1` leave the domain, `phi_n` (n >= 2)
/// and bumps stay in it, and the slow-tail state `g` drops out under free
/// evolution.
///
/// Columns: `state, probe, evolve_time, half_width, count, estimate, status, exponent`.
pub fn domain(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    let grid = cfg.grid_or(DEFAULT_GRID)?;
    let invalid = |e: timeop::Error| RunError::Config(ConfigError::Invalid(e.to_string()));
    let halving =
        BoxSequence::halving(grid.half_width(), (grid.len() / 4).max(4), 4).map_err(invalid)?;
    let widening =
        BoxSequence::widening(grid.half_width() / 4.0, 2.0 * grid.spacing(), 4).map_err(invalid)?;
    let mut table = Table::new(&[
        "state",
        "probe",
        "evolve_time",
        "half_width",
        "count",
        "estimate",
        "status",
        "exponent",
    ]);
    let mut report = header(
        "domain",
        "psi in Dom(T0) iff ||T0 psi|| stays finite under refinement; exp(-itH0) need not preserve Dom(T0)",
        cfg,
        grid,
    );

    let mut record = |v: &DomainVerdict, expect_converged: bool, report: &mut Report| {
        let status = if v.converged() {
            "converged"
        } else {
            "diverging"
        };
        let probe = match v.probe {
            DomainProbe::Extended => "extended",
            DomainProbe::Original => "original",
        };
        for e in &v.estimates {
            table.push(vec![
                v.state.clone(),
                probe.into(),
                num(v.evolve_time),
                num(e.half_width),
                e.count.to_string(),
                num(e.estimate),
                status.into(),
                num(v.exponent),
            ]);
        }
        let name = format!("{}.{probe}.t{}", v.state, v.evolve_time);
        if expect_converged {
            report.check(&name, v.exponent, "Cauchy within 1%", v.converged());
        } else {
            report.check(
                &name,
                v.exponent,
                "not Cauchy, growing",
                !v.converged() && v.growing(),
            );
        }
    };

    for n in [0, 1] {
        let v = domain_diagnostic(
            &StateFamily::PhiN { n, a0: cfg.a0 },
            0.0,
            DomainProbe::Extended,
            &halving,
        )?;
        record(&v, false, &mut report);
    }
    for family in phi_families(cfg).into_iter().chain(bump_families(cfg)) {
        let v = domain_diagnostic(&family, 0.0, DomainProbe::Extended, &halving)?;
        record(&v, true, &mut report);
    }
    let g = StateFamily::PowerTail { s: 1.0 };
    record(
        &domain_diagnostic(&g, 0.0, DomainProbe::Original, &halving)?,
        true,
        &mut report,
    );
    record(
        &domain_diagnostic(&g, 1.0, DomainProbe::Original, &widening)?,
        false,
        &mut report,
    );
    Ok(Outcome { table, report })
}

/// Wave operators for a Gaussian barrier in both directions, the `T1`
/// checks, and the completeness witness for a Gaussian well.
///
/// Columns: `direction, check, horizon, value`.
pub fn scatter(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    let grid = cfg.grid_or(DEFAULT_SCATTER_GRID)?;
    let opts = cfg.wave_options();
    let first = bump_families(cfg)
        .into_iter()
        .next()
        .ok_or_else(|| ConfigError::Invalid("scatter needs at least one bump state".into()))?;
    let eta = first.build(&grid)?;
    let mut table = Table::new(&["direction", "check", "horizon", "value"]);
    let mut report = header(
        "scatter",
        "U = s-lim exp(itH1) exp(-itH0); T1 = U T0 U*",
        cfg,
        grid,
    );
    report
        .input("state", first.label())
        .input("partner", cfg.partner)
        .tolerance("wave_operator", opts.tol);

    let zero = wave_operator(&eta, &PotentialSpec::zero(grid), Direction::Plus, &opts)?;
    let id = zero.state.distance(&eta)?;
    table.push(vec![
        "+".into(),
        "zero_potential_deviation".into(),
        blank(),
        num(id),
    ]);
    report.check_below("zero_potential_identity", id, 1e-10);

    let barrier = PotentialSpec::gaussian(grid, cfg.barrier_height)?;
    for direction in [Direction::Plus, Direction::Minus] {
        let d = direction.symbol();
        let u = wave_operator(&eta, &barrier, direction, &opts)?;
        for (h, inc) in u.horizons.iter().skip(1).zip(&u.increments) {
            table.push(vec![d.into(), "increment".into(), num(*h), num(*inc)]);
        }
        table.push(vec![
            d.into(),
            "stepping_error".into(),
            num(opts.final_horizon()),
            num(u.stepping_error),
        ]);
        report.quantity(&format!("{d}.increments"), &u.increments);
        report.check_below(
            &format!("{d}.cauchy"),
            u.last_increment(),
            opts.tol * eta.norm(),
        );
        report.check_below(
            &format!("{d}.stepping_error"),
            u.stepping_error,
            0.25 * opts.tol,
        );

        let inter = intertwining_check(&eta, &barrier, 5.0, direction, &opts)?;
        table.push(vec![
            d.into(),
            "intertwining".into(),
            blank(),
            num(inter.verdicts[0].value),
        ]);
        report.absorb(&format!("{d}.intertwining"), inter);
        let weyl = t1_tweakwr_check(&eta, &barrier, 2.0, direction, &opts)?;
        table.push(vec![
            d.into(),
            "t1_weyl".into(),
            blank(),
            num(weyl.verdicts[0].value),
        ]);
        report.absorb(&format!("{d}.t1_weyl"), weyl);
    }
    let [k1, k2] = cfg.partner;
    let zeta = StateFamily::Bump { k1, k2 }.build(&grid)?;
    let sym = t1_symmetry_check(&eta, &zeta, &barrier, Direction::Plus, &opts)?;
    for v in &sym.verdicts {
        table.push(vec![
            "+".into(),
            format!("t1_{}", v.name),
            blank(),
            num(v.value),
        ]);
    }
    report.absorb("+.t1_symmetry", sym);

    let well = PotentialSpec::gaussian(grid, -cfg.well_depth)?;
    let bound = ground_state(&well, 0.05, 20_000, 1e-12)?;
    table.push(vec![
        blank(),
        "well_bound_energy".into(),
        blank(),
        num(bound.energy),
    ]);
    let complete = completeness_check(&eta, &well, &bound, Direction::Plus, &opts)?;
    for v in &complete.verdicts {
        table.push(vec![
            "+".into(),
            format!("well_{}", v.name),
            blank(),
            num(v.value),
        ]);
    }
    report.absorb("+.completeness", complete);
    Ok(Outcome { table, report })
}

/// The boundary-phase toy on `[0, 1]` at commensurate and incommensurate shifts.
///
/// Columns: `eps, eps_over_2pi, boundary_mismatch, shift_residual`.
pub fn demo_interval(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    let theta = Complex64::from_polar(1.0, cfg.theta_arg);
    let mut table = Table::new(&["eps", "eps_over_2pi", "boundary_mismatch", "shift_residual"]);
    let mut report = Report::new(
        "demo_interval",
        "P exp(i eps Q) = exp(i eps Q)(P + eps) holds on the interval only for eps in 2 pi Z",
    )
    .with_seed(cfg.seed);
    report.input("config", cfg);
    for eps in [FRAC_PI_2, PI, 3.0, 2.0 * PI, 4.0 * PI] {
        let r = interval_ccr_demo(theta, eps)?;
        let q = |k: &str| r.quantities[k].as_f64().unwrap_or(f64::NAN);
        table.push(vec![
            num(eps),
            num(q("eps_over_2pi")),
            num(q("boundary_mismatch")),
            num(q("shift_residual")),
        ]);
        report.absorb(&format!("eps{eps:.4}"), r);
    }
    Ok(Outcome { table, report })
}
