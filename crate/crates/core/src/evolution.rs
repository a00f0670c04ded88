//! Free and interacting time evolution, survival amplitudes and the
//! T-weak Weyl relation residuals.
//!
//! Free evolution multiplies by `exp(-i t k^2/2)` and carries no stepping
//! error. Survival amplitudes are direct lattice sums of
//! `conj(phi) exp(-i t k^2/2) psi`; the phase is formed in double-double
//! arithmetic and the sum is compensated, so probabilities stay accurate
//! to a few ulps of the amplitude even when they fall to `1e-18`.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{refine_samples, MomentumGrid, Transform};
use crate::operators::{Operator, PotentialSpec, TimeOperator};
use crate::report::Report;
use crate::states::{expectation, std_dev, Representation, StateFamily, WaveFunction};

/// Largest `dt * max|V|` accepted by the split-step propagator.
pub const STEP_BUDGET: f64 = 0.1;

/// Smallest quadrature-node count per phase period at the support edge.
pub const NODES_PER_PERIOD: f64 = 8.0;

/// `exp(-i t H0) psi` for `Im t <= 0`.
pub fn free_propagate(psi: &WaveFunction, t: Complex64) -> Result<WaveFunction> {
    if t.im > 0.0 {
        return Err(Error::UpperHalfPlane(t.im));
    }
    psi.require(Representation::Momentum)?;
    if t == Complex64::new(0.0, 0.0) {
        return Ok(psi.clone());
    }
    Ok(psi.map_nodes(|k, a| {
        let e = 0.5 * k * k;
        a * Complex64::from_polar((t.im * e).exp(), -t.re * e)
    }))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// `exp(-i t k^2 / 2)` with the phase carried to roughly double-double accuracy.
#[inline]
fn free_phase(t: f64, k: f64) -> Complex64 {
    let (kk, kk_lo) = two_prod(k, k);
    let (p, p_lo) = two_prod(t, 0.5 * kk);
    let e = p_lo + t * 0.5 * kk_lo;
    let (s, c) = p.sin_cos();
    Complex64::new(c - e * s, -(s + e * c))
}

/// Neumaier-compensated complex accumulator.
#[derive(Default)]
struct CompensatedSum {
    re: f64,
    im: f64,
    cre: f64,
    cim: f64,
}

impl CompensatedSum {
    #[inline]
    fn add(&mut self, z: Complex64) {
        fn step(sum: &mut f64, comp: &mut f64, x: f64) {
            let t = *sum + x;
            if sum.abs() >= x.abs() {
                *comp += (*sum - t) + x;
            } else {
                *comp += (x - t) + *sum;
            }
            *sum = t;
        }
        step(&mut self.re, &mut self.cre, z.re);
        step(&mut self.im, &mut self.cim, z.im);
    }

    fn value(&self) -> Complex64 {
        Complex64::new(self.re + self.cre, self.im + self.cim)
    }
}

/// Survival-type amplitudes `<phi, exp(-i t H0) psi>` for many times.
///
/// Caches the pointwise product `conj(phi) psi`, and band-limited refinements
/// of it when the phase would be under-resolved at the support edge.
#[derive(Debug, Clone)]
pub struct AmplitudeKernel {
    grid: MomentumGrid,
    product: Vec<Complex64>,
    edge: f64,
    refined: HashMap<usize, (MomentumGrid, Vec<Complex64>)>,
}

impl AmplitudeKernel {
    pub fn new(phi: &WaveFunction, psi: &WaveFunction) -> Result<Self> {
        phi.require(Representation::Momentum)?;
        psi.require(Representation::Momentum)?;
        if phi.grid() != psi.grid() {
            return Err(Error::GridMismatch(
                "survival amplitude needs states on one lattice".into(),
            ));
        }
        let grid = *phi.grid();
        let product: Vec<Complex64> = phi
            .amplitudes()
            .iter()
            .zip(psi.amplitudes())
            .map(|(a, b)| a.conj() * b)
            .collect();
        let prod_wf =
            WaveFunction::from_amplitudes(grid, Representation::Momentum, product.clone());
        let edge = prod_wf.support_edge(1e-14);
        Ok(Self {
            grid,
            product,
            edge,
            refined: HashMap::new(),
        })
    }

    /// Refinement factor (a power of two) needed at time `t`.
    pub fn refinement(&self, t: f64) -> usize {
        let need = t.abs() * self.edge * self.grid.spacing() * NODES_PER_PERIOD
            / (2.0 * std::f64::consts::PI);
        let mut r = 1usize;
        while (r as f64) < need {
            r *= 2;
        }
        r
    }

    pub fn amplitude(&mut self, t: f64) -> Complex64 {
        let r = self.refinement(t);
        let (grid, values) = if r == 1 {
            (&self.grid, &self.product)
        } else {
            let (g, v) = self.refined.entry(r).or_insert_with(|| {
                (
                    self.grid.refined(r),
                    refine_samples(&self.grid, &self.product, r),
                )
            });
            (&*g, &*v)
        };
        let mut acc = CompensatedSum::default();
        for (j, v) in values.iter().enumerate() {
            if *v != Complex64::new(0.0, 0.0) {
                acc.add(v * free_phase(t, grid.node(j)));
            }
        }
        acc.value() * grid.spacing()
    }
}

/// Sampled survival amplitude `A(t) = <phi, exp(-i t H0) psi>` and `P = |A|^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalSeries {
    pub state: String,
    pub times: Vec<f64>,
    pub amplitudes: Vec<Complex64>,
    pub probabilities: Vec<f64>,
}

impl SurvivalSeries {
    pub fn labelled(mut self, state: impl Into<String>) -> Self {
        self.state = state.into();
        self
    }
}

/// `A(t)` at each of the ascending `times`.
pub fn survival_series(
    phi: &WaveFunction,
    psi: &WaveFunction,
    times: &[f64],
) -> Result<SurvivalSeries> {
    if times.windows(2).any(|w| w[0] > w[1]) || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::UnsortedTimes);
    }
    let mut kernel = AmplitudeKernel::new(phi, psi)?;
    let amplitudes: Vec<Complex64> = times.iter().map(|&t| kernel.amplitude(t)).collect();
    let probabilities = amplitudes.iter().map(|a| a.norm_sqr()).collect();
    Ok(SurvivalSeries {
        state: String::new(),
        times: times.to_vec(),
        amplitudes,
        probabilities,
    })
}

/// Strang splitting for `exp(-i dt H1)`, `H1 = H0 + V`, with cached phases.
///
/// A negative `dt` runs the propagator backwards, which is how
/// `exp(+i T H1)` is realised.
pub struct SplitStep {
    transform: Transform,
    dt: f64,
    half_kinetic: Vec<Complex64>,
    full_kinetic: Vec<Complex64>,
    potential: Vec<Complex64>,
}

impl SplitStep {
    pub fn new(v: &PotentialSpec, dt: f64) -> Result<Self> {
        if !dt.is_finite() {
            return Err(Error::Config(format!("time step must be finite, got {dt}")));
        }
        let budget = dt.abs() * v.max_abs();
        if budget >= STEP_BUDGET {
            return Err(Error::StepBudget(budget));
        }
        let grid = *v.grid();
        let half_kinetic = grid.nodes().map(|k| free_phase(0.5 * dt, k)).collect();
        let full_kinetic = grid.nodes().map(|k| free_phase(dt, k)).collect();
        let potential = v
            .samples()
            .iter()
            .map(|s| Complex64::from_polar(1.0, -dt * s))
            .collect();
        Ok(Self {
            transform: Transform::new(grid),
            dt,
            half_kinetic,
            full_kinetic,
            potential,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> &MomentumGrid {
        self.transform.grid()
    }

    /// Applies `steps` Strang steps to momentum samples in place.
    pub fn advance(&self, buf: &mut [Complex64], steps: usize) {
        if steps == 0 {
            return;
        }
        let mul = |buf: &mut [Complex64], f: &[Complex64]| {
            for (b, f) in buf.iter_mut().zip(f) {
                *b *= f;
            }
        };
        mul(buf, &self.half_kinetic);
        for s in 0..steps {
            self.transform.momentum_to_position_in_place(buf);
            mul(buf, &self.potential);
            self.transform.position_to_momentum_in_place(buf);
            mul(
                buf,
                if s + 1 == steps {
                    &self.half_kinetic
                } else {
                    &self.full_kinetic
                },
            );
        }
    }

    pub fn propagate(&self, psi: &WaveFunction, steps: usize) -> Result<WaveFunction> {
        psi.require(Representation::Momentum)?;
        if psi.grid() != self.grid() {
            return Err(Error::GridMismatch(
                "potential and state live on different lattices".into(),
            ));
        }
        let mut buf = psi.amplitudes().to_vec();
        self.advance(&mut buf, steps);
        Ok(WaveFunction::from_amplitudes(
            *psi.grid(),
            Representation::Momentum,
            buf,
        ))
    }
}

/// `exp(-i t H1) psi` by `steps` Strang steps of size `t / steps`.
pub fn split_step_propagate(
    psi: &WaveFunction,
    v: &PotentialSpec,
    t: f64,
    steps: usize,
) -> Result<WaveFunction> {
    if t == 0.0 {
        return Ok(psi.clone());
    }
    if steps == 0 {
        return Err(Error::Config(
            "split-step propagation needs at least one step".into(),
        ));
    }
    SplitStep::new(v, t / steps as f64)?.propagate(psi, steps)
}

/// `||T U psi - U (T + t) psi|| / ||psi||` with `U = propagate`.
pub fn tweakwr_residual<T, U>(
    apply_t: &T,
    propagate: U,
    psi: &WaveFunction,
    t: Complex64,
) -> Result<f64>
where
    T: Operator + ?Sized,
    U: Fn(&WaveFunction) -> Result<WaveFunction>,
{
    let lhs = apply_t.apply(&propagate(psi)?)?;
    let shifted = apply_t.apply(psi)?.axpy(t, psi)?;
    let rhs = propagate(&shifted)?;
    Ok(lhs.distance(&rhs)? / psi.norm())
}

/// Residual of the T-weak Weyl relation for the free pair `(T0_ext, H0)`.
pub fn free_tweakwr_residual(psi: &WaveFunction, t: Complex64) -> Result<f64> {
    tweakwr_residual(
        &TimeOperator,
        |w: &WaveFunction| free_propagate(w, t),
        psi,
        t,
    )
}

/// `<T0_ext>` of `exp(-i t H0) psi` against `<T0_ext>_psi + t`.
pub fn heisenberg_shift_check(psi: &WaveFunction, t: f64) -> Result<Report> {
    let unit = psi.normalized();
    let before = expectation(&TimeOperator, &unit)?;
    let after = expectation(
        &TimeOperator,
        &free_propagate(&unit, Complex64::new(t, 0.0))?,
    )?;
    let diff = (after - (before + t)).abs();
    let limit = 1e-6 * (1.0 + t.abs());
    let mut r = Report::new(
        "heisenberg_shift",
        "<T0>_{exp(-itH0) psi} = <T0>_psi + t: the expectation of T0 shifts with time",
    )
    .with_grid(*psi.grid());
    r.input("t", t)
        .quantity("expectation_before", before)
        .quantity("expectation_after", after)
        .quantity("difference", diff)
        .tolerance("difference", limit);
    r.check_below("difference", diff, limit);
    Ok(r)
}

/// Survival inequality `4 (Delta T)^2 ||psi||^2 / t^2 >= P(t)` and the weak
/// decay it implies, over the sampled `times`.
///
/// `P` is the unnormalised `|<psi, exp(-itH0) psi>|^2`. Beyond
/// `t_w = 20 Delta T ||psi||` the bound forces `P < 0.01 ||psi||^4`.
pub fn survival_bound_check(label: &str, psi: &WaveFunction, times: &[f64]) -> Result<Report> {
    let dt = std_dev(&TimeOperator, psi)?;
    let series = survival_series(psi, psi, times)?;
    let norm2 = psi.norm_sqr();
    let mut violations = 0usize;
    let mut min_slack = f64::INFINITY;
    let weak_threshold = 20.0 * dt * psi.norm();
    let mut weak_violations = 0usize;
    for (&t, &p) in times.iter().zip(&series.probabilities) {
        if t == 0.0 {
            continue;
        }
        let bound = 4.0 * dt * dt * norm2 / (t * t);
        if p > bound {
            violations += 1;
        }
        min_slack = min_slack.min(bound - p);
        if t.abs() > weak_threshold && p >= 0.01 * norm2 * norm2 {
            weak_violations += 1;
        }
    }
    let mut r = Report::new(
        "survival_bound",
        "P_psi(t) <= 4 (Delta T0)^2 ||psi||^2 / t^2 for all t != 0",
    )
    .with_grid(*psi.grid());
    r.input("state", label)
        .input("samples", times.len())
        .quantity("delta_t0", dt)
        .quantity("min_slack", min_slack)
        .quantity("weak_decay_threshold", weak_threshold);
    r.check_at_most("violations", violations as f64, 0.0);
    r.check_at_most("weak_decay_violations", weak_violations as f64, 0.0);
    Ok(r)
}

/// `n` log-spaced samples in `[lo, hi]`.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Lower end of the rapid-decay window.
pub const RAPID_DECAY_START: f64 = 10.0;
/// Upper end of the rapid-decay window.
pub const RAPID_DECAY_END: f64 = 100.0;
/// Sample spacing of the rapid-decay window.
pub const RAPID_DECAY_STEP: f64 = 0.05;

/// Where `sup |t|^m |A(t)|` over a window is attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedDecay {
    pub m: u32,
    pub sup: f64,
    pub argmax: f64,
}

/// `sup_{t in [t_start, t_end]} t^m |<phi, exp(-itH0) psi>|` for `m = 0..=m_max`.
pub fn weighted_decay_scan(
    phi: &WaveFunction,
    psi: &WaveFunction,
    t_start: f64,
    t_end: f64,
    step: f64,
    m_max: u32,
) -> Result<Vec<WeightedDecay>> {
    if !(t_start > 0.0 && t_end > t_start && step > 0.0) {
        return Err(Error::Config(format!(
            "bad decay window [{t_start}, {t_end}] step {step}"
        )));
    }
    let count = ((t_end - t_start) / step).round() as usize + 1;
    let times: Vec<f64> = (0..count).map(|i| t_start + i as f64 * step).collect();
    let series = survival_series(phi, psi, &times)?;
    let mods: Vec<f64> = series.amplitudes.iter().map(|a| a.norm()).collect();
    Ok((0..=m_max)
        .map(|m| {
            let (argmax, sup) = times
                .iter()
                .zip(&mods)
                .map(|(t, a)| (*t, t.powi(m as i32) * a))
                .fold((t_start, f64::NEG_INFINITY), |acc, x| {
                    if x.1 > acc.1 {
                        x
                    } else {
                        acc
                    }
                });
            WeightedDecay { m, sup, argmax }
        })
        .collect())
}

/// For two bump states, checks that each `t^m |A(t)|` (`m <= m_max`) peaks
/// at the start of the window `[10, 100]`: the amplitude outruns every power.
pub fn rapid_decay_probe(
    phi: &StateFamily,
    psi: &StateFamily,
    grid: &MomentumGrid,
    m_max: u32,
) -> Result<Report> {
    for f in [phi, psi] {
        if !f.is_bump() {
            return Err(Error::Config(format!(
                "rapid decay is only claimed for compactly supported states away from 0, got {}",
                f.label()
            )));
        }
    }
    let a = phi.build(grid)?;
    let b = psi.build(grid)?;
    let scan = weighted_decay_scan(
        &a,
        &b,
        RAPID_DECAY_START,
        RAPID_DECAY_END,
        RAPID_DECAY_STEP,
        m_max,
    )?;
    let mut r = Report::new(
        "rapid_decay",
        "<phi, exp(-itH0) psi> is rapidly decreasing in t for phi, psi supported away from k = 0",
    )
    .with_grid(*grid);
    r.input("phi", phi.label())
        .input("psi", psi.label())
        .input("t_start", RAPID_DECAY_START)
        .input("t_end", RAPID_DECAY_END)
        .input("m_max", m_max);
    for w in &scan {
        r.quantity(&format!("sup_m{}", w.m), w.sup)
            .quantity(&format!("argmax_m{}", w.m), w.argmax);
        r.check(
            &format!("peak_at_start_m{}", w.m),
            w.argmax,
            &format!("== {RAPID_DECAY_START}"),
            w.argmax == RAPID_DECAY_START,
        );
    }
    Ok(r)
}

/// Last time at which the survival probability equals 1/2 within a horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfTime {
    pub tau: f64,
    pub horizon: f64,
    /// The crossing lies in the last tenth of the horizon, so a later
    /// crossing beyond it cannot be ruled out.
    pub horizon_caveat: bool,
}

/// Scan resolution of [`half_time`].
pub const HALF_TIME_SAMPLES: usize = 4000;

/// `tau_h(psi)`: largest `t` in `[0, horizon]` with `P(t) = 1/2 ||psi||^4`.
pub fn half_time(psi: &WaveFunction, horizon: f64) -> Result<HalfTime> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::Config(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let half = 0.5 * psi.norm_sqr() * psi.norm_sqr();
    let mut kernel = AmplitudeKernel::new(psi, psi)?;
    let mut p = |t: f64| kernel.amplitude(t).norm_sqr() - half;
    let step = horizon / HALF_TIME_SAMPLES as f64;
    let mut crossing = None;
    let mut prev = p(horizon);
    if prev >= 0.0 {
        return Err(Error::NotFound(format!(
            "P stays at or above 1/2 at the horizon t = {horizon}"
        )));
    }
    for i in (0..HALF_TIME_SAMPLES).rev() {
        let t = i as f64 * step;
        let cur = p(t);
        if cur >= 0.0 && prev < 0.0 {
            crossing = Some((t, t + step));
            break;
        }
        prev = cur;
    }
    let (mut lo, mut hi) =
        crossing.ok_or_else(|| Error::NotFound("P never reaches 1/2 in the horizon".into()))?;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if p(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tau = 0.5 * (lo + hi);
    Ok(HalfTime {
        tau,
        horizon,
        horizon_caveat: tau > 0.9 * horizon,
    })
}

/// Half-time bound `tau_h <= 2 sqrt(2) Delta T0` for a unit-norm state.
pub fn half_time_check(label: &str, psi: &WaveFunction, horizon: f64) -> Result<Report> {
    let unit = psi.normalized();
    let ht = half_time(&unit, horizon)?;
    let dt = std_dev(&TimeOperator, &unit)?;
    let bound = 2.0 * 2f64.sqrt() * dt;
    let mut r =
        Report::new("half_time", "tau_h(psi) <= 2 sqrt(2) (Delta T0)_psi").with_grid(*psi.grid());
    r.input("state", label)
        .input("horizon", horizon)
        .quantity("tau_h", ht.tau)
        .quantity("delta_t0", dt)
        .quantity("bound", bound)
        .quantity("horizon_caveat", ht.horizon_caveat);
    r.check_at_least("slack", bound - ht.tau, 0.0);
    Ok(r)
}
