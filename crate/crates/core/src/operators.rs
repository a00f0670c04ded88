//! Operator actions in the momentum representation.
//!
//! `H0` multiplies by `k^2/2`. The extended Aharonov-Bohm time operator acts as
//! `(i/2) (d(psi/k)/dk + (1/k) dpsi/dk)`; its derivatives are sixth-order
//! finite differences (see [`crate::stencil`]). Transform-based derivatives
//! would wrap the `1/k` singular behaviour around the periodic box.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{BoxSequence, MomentumGrid};
use crate::report::Report;
use crate::states::{Representation, StateFamily, WaveFunction};
use crate::stencil::derivative;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Linear operator acting on lattice wave functions.
pub trait Operator {
    fn apply(&self, psi: &WaveFunction) -> Result<WaveFunction>;
}

impl<F> Operator for F
where
    F: Fn(&WaveFunction) -> Result<WaveFunction>,
{
    fn apply(&self, psi: &WaveFunction) -> Result<WaveFunction> {
        self(psi)
    }
}

/// `H0 = P^2 / 2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct FreeHamiltonian;

impl Operator for FreeHamiltonian {
    fn apply(&self, psi: &WaveFunction) -> Result<WaveFunction> {
        apply_h0(psi)
    }
}

/// The symmetric extension of the Aharonov-Bohm time operator.
#[derive(Debug, Clone, Copy, Default)]
pub struct TimeOperator;

impl Operator for TimeOperator {
    fn apply(&self, psi: &WaveFunction) -> Result<WaveFunction> {
        apply_t0(psi)
    }
}

/// Regularised Lavine operator `A_delta`.
#[derive(Debug, Clone, Copy)]
pub struct LavineA(pub f64);

impl Operator for LavineA {
    fn apply(&self, psi: &WaveFunction) -> Result<WaveFunction> {
        apply_a_delta(psi, self.0)
    }
}

/// Regularised Lavine multiplier `C_delta = k^2 / (k^2 + delta^2)`.
#[derive(Debug, Clone, Copy)]
pub struct LavineC(pub f64);

impl Operator for LavineC {
    fn apply(&self, psi: &WaveFunction) -> Result<WaveFunction> {
        apply_c_delta(psi, self.0)
    }
}

pub fn apply_h0(psi: &WaveFunction) -> Result<WaveFunction> {
    psi.require(Representation::Momentum)?;
    Ok(psi.map_nodes(|k, a| a * (0.5 * k * k)))
}

/// Multiplication by `k`.
pub fn apply_m_k(psi: &WaveFunction) -> Result<WaveFunction> {
    psi.require(Representation::Momentum)?;
    Ok(psi.map_nodes(|k, a| a * k))
}

/// Multiplication by `1/k`; finite because the lattice skips `k = 0`.
pub fn apply_m_inv_k(psi: &WaveFunction) -> Result<WaveFunction> {
    psi.require(Representation::Momentum)?;
    Ok(psi.map_nodes(|k, a| a / k))
}

/// `d/dk` by sixth-order finite differences.
pub fn apply_d_k(psi: &WaveFunction) -> Result<WaveFunction> {
    psi.require(Representation::Momentum)?;
    let d = derivative(psi.amplitudes(), psi.grid().spacing());
    Ok(WaveFunction::from_amplitudes(
        *psi.grid(),
        Representation::Momentum,
        d,
    ))
}

/// `(i/2) (d(psi/k)/dk + (1/k) dpsi/dk)`.
///
/// No domain check is made; use [`domain_diagnostic`] for membership.
pub fn apply_t0(psi: &WaveFunction) -> Result<WaveFunction> {
    psi.require(Representation::Momentum)?;
    let grid = psi.grid();
    let h = grid.spacing();
    let over_k: Vec<Complex64> = grid
        .nodes()
        .zip(psi.amplitudes())
        .map(|(k, a)| a / k)
        .collect();
    let d_over_k = derivative(&over_k, h);
    let d_psi = derivative(psi.amplitudes(), h);
    let out = grid
        .nodes()
        .zip(d_over_k.iter().zip(&d_psi))
        .map(|(k, (a, b))| 0.5 * I * (a + b / k))
        .collect();
    Ok(WaveFunction::from_amplitudes(
        *grid,
        Representation::Momentum,
        out,
    ))
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Config(format!(
            "regularisation delta must be positive, got {delta}"
        )));
    }
    Ok(())
}

/// `A_delta = (f(k) Q + Q f(k)) / 2` with `Q = i d/dk`, `f(k) = k / (k^2 + delta^2)`.
pub fn apply_a_delta(psi: &WaveFunction, delta: f64) -> Result<WaveFunction> {
    check_delta(delta)?;
    psi.require(Representation::Momentum)?;
    let grid = psi.grid();
    let h = grid.spacing();
    let f = |k: f64| k / (k * k + delta * delta);
    let f_psi: Vec<Complex64> = grid
        .nodes()
        .zip(psi.amplitudes())
        .map(|(k, a)| a * f(k))
        .collect();
    let d_f_psi = derivative(&f_psi, h);
    let d_psi = derivative(psi.amplitudes(), h);
    let out = grid
        .nodes()
        .zip(d_f_psi.iter().zip(&d_psi))
        .map(|(k, (a, b))| 0.5 * I * (a + f(k) * b))
        .collect();
    Ok(WaveFunction::from_amplitudes(
        *grid,
        Representation::Momentum,
        out,
    ))
}

pub fn apply_c_delta(psi: &WaveFunction, delta: f64) -> Result<WaveFunction> {
    check_delta(delta)?;
    psi.require(Representation::Momentum)?;
    Ok(psi.map_nodes(|k, a| a * (k * k / (k * k + delta * delta))))
}

/// `(H0 - z)^{-1}` for non-real `z`.
pub fn resolvent_h0(psi: &WaveFunction, z: Complex64) -> Result<WaveFunction> {
    if z.im == 0.0 || !z.im.is_finite() {
        return Err(Error::Config(format!(
            "resolvent needs a non-real spectral parameter, got {z}"
        )));
    }
    psi.require(Representation::Momentum)?;
    Ok(psi.map_nodes(|k, a| a / (0.5 * k * k - z)))
}

/// Residual `||(H0 A - A H0) psi + i C psi|| / ||psi||` of `[H0, i A_delta] = C_delta`.
pub fn lavine_commutator_residual(psi: &WaveFunction, delta: f64) -> Result<f64> {
    let h_a = apply_h0(&apply_a_delta(psi, delta)?)?;
    let a_h = apply_a_delta(&apply_h0(psi)?, delta)?;
    let c = apply_c_delta(psi, delta)?;
    let comm = h_a.axpy(Complex64::new(-1.0, 0.0), &a_h)?;
    Ok(comm.axpy(I, &c)?.norm() / psi.norm())
}

/// Sampled real potential `V(x)` together with its class flags.
///
/// The Putnam class is `0 <= V <= const` with `V` integrable; the Kuroda class
/// is `V` in `L^1 ∩ L^2`. On a finite box every sampled potential has finite
/// integrals, so integrability is judged by decay: `|V|` on the outer tenth
/// of the position box must stay below `1e-10 * max|V|`.
#[derive(Clone)]
pub struct PotentialSpec {
    name: String,
    grid: MomentumGrid,
    samples: Arc<Vec<f64>>,
    max_abs: f64,
    l1: f64,
    l2: f64,
    putnam_class: bool,
    kuroda_class: bool,
}

impl std::fmt::Debug for PotentialSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PotentialSpec")
            .field("name", &self.name)
            .field("max_abs", &self.max_abs)
            .field("putnam_class", &self.putnam_class)
            .field("kuroda_class", &self.kuroda_class)
            .finish()
    }
}

impl PotentialSpec {
    pub fn new(
        name: impl Into<String>,
        grid: MomentumGrid,
        v: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let samples: Vec<f64> = grid.position_nodes().map(v).collect();
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("potential samples must be finite".into()));
        }
        let dx = grid.position_spacing();
        let max_abs = samples.iter().map(|s| s.abs()).fold(0.0, f64::max);
        let l1 = dx * samples.iter().map(|s| s.abs()).sum::<f64>();
        let l2 = (dx * samples.iter().map(|s| s * s).sum::<f64>()).sqrt();
        let outer = grid.position_half_width() * 0.9;
        let tail = grid
            .position_nodes()
            .zip(&samples)
            .filter(|(x, _)| x.abs() >= outer)
            .map(|(_, s)| s.abs())
            .fold(0.0, f64::max);
        let decays = tail <= 1e-10 * max_abs || max_abs == 0.0;
        let nonnegative = samples.iter().all(|s| *s >= 0.0);
        Ok(Self {
            name: name.into(),
            grid,
            samples: Arc::new(samples),
            max_abs,
            l1,
            l2,
            putnam_class: nonnegative && decays,
            kuroda_class: decays,
        })
    }

    pub fn zero(grid: MomentumGrid) -> Self {
        Self::new("zero", grid, |_| 0.0).expect("zero potential is valid")
    }

    /// `height * exp(-x^2)`; a barrier for positive height, a well otherwise.
    pub fn gaussian(grid: MomentumGrid, height: f64) -> Result<Self> {
        Self::new(format!("gaussian({height})"), grid, move |x| {
            height * (-x * x).exp()
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn grid(&self) -> &MomentumGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs
    }

    pub fn l1_norm(&self) -> f64 {
        self.l1
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2
    }

    pub fn putnam_class(&self) -> bool {
        self.putnam_class
    }

    pub fn kuroda_class(&self) -> bool {
        self.kuroda_class
    }

    pub fn is_zero(&self) -> bool {
        self.max_abs == 0.0
    }
}

/// Which operator domain a [`domain_diagnostic`] probes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainProbe {
    /// `||T0_ext psi||` for the symmetric extension.
    Extended,
    /// The largest of `||psi/k||`, `||d(psi/k)/dk||`, `||dpsi/dk||` and
    /// `||(1/k) dpsi/dk||`: all four must stay finite for the original
    /// `(Q P^-1 + P^-1 Q)/2`.
    Original,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainStatus {
    Converged,
    Diverging,
}

/// One box of a domain diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainEstimate {
    pub half_width: f64,
    pub count: usize,
    pub estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainVerdict {
    pub state: String,
    pub probe: DomainProbe,
    pub evolve_time: f64,
    pub estimates: Vec<DomainEstimate>,
    pub status: DomainStatus,
    /// Least-squares slope of `ln(estimate)` against `ln(N)` over the last
    /// three boxes.
    pub exponent: f64,
}

impl DomainVerdict {
    pub fn converged(&self) -> bool {
        self.status == DomainStatus::Converged
    }

    /// Growth exponent above [`DIVERGENCE_EXPONENT`].
    pub fn growing(&self) -> bool {
        self.exponent > DIVERGENCE_EXPONENT
    }
}

/// Successive estimates closer than this (relative) count as Cauchy.
pub const CAUCHY_TOLERANCE: f64 = 0.01;

/// Fitted growth exponent above which a sequence counts as blowing up.
pub const DIVERGENCE_EXPONENT: f64 = 0.2;

fn domain_estimate(psi: &WaveFunction, probe: DomainProbe) -> Result<f64> {
    match probe {
        DomainProbe::Extended => Ok(apply_t0(psi)?.norm()),
        DomainProbe::Original => {
            let over_k = apply_m_inv_k(psi)?;
            let d_over_k = apply_d_k(&over_k)?;
            let d_psi = apply_d_k(psi)?;
            let k_inv_d = apply_m_inv_k(&d_psi)?;
            Ok(
                [over_k.norm(), d_over_k.norm(), d_psi.norm(), k_inv_d.norm()]
                    .into_iter()
                    .fold(0.0, f64::max),
            )
        }
    }
}

/// Least-squares slope of `ys` against `xs`.
pub(crate) fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Tracks a domain norm of `exp(-i t H0) psi_family` over a box sequence.
///
/// Converged iff the last three estimates are Cauchy within 1%; otherwise
/// diverging, with the fitted growth exponent reported.
pub fn domain_diagnostic(
    family: &StateFamily,
    evolve_time: f64,
    probe: DomainProbe,
    boxes: &BoxSequence,
) -> Result<DomainVerdict> {
    if boxes.len() < 3 {
        return Err(Error::Config(format!(
            "domain diagnostic needs at least 3 boxes, got {}",
            boxes.len()
        )));
    }
    let mut estimates = Vec::with_capacity(boxes.len());
    for grid in boxes.grids() {
        let psi = family.build(grid)?;
        let psi = if evolve_time != 0.0 {
            crate::evolution::free_propagate(&psi, Complex64::new(evolve_time, 0.0))?
        } else {
            psi
        };
        estimates.push(DomainEstimate {
            half_width: grid.half_width(),
            count: grid.len(),
            estimate: domain_estimate(&psi, probe)?,
        });
    }
    let tail = &estimates[estimates.len() - 3..];
    let cauchy = tail
        .windows(2)
        .all(|w| (w[1].estimate - w[0].estimate).abs() <= CAUCHY_TOLERANCE * w[1].estimate.abs());
    let xs: Vec<f64> = tail.iter().map(|e| (e.count as f64).ln()).collect();
    let ys: Vec<f64> = tail.iter().map(|e| e.estimate.ln()).collect();
    Ok(DomainVerdict {
        state: family.label(),
        probe,
        evolve_time,
        estimates,
        status: if cauchy {
            DomainStatus::Converged
        } else {
            DomainStatus::Diverging
        },
        exponent: fit_slope(&xs, &ys),
    })
}

/// Number of boundary-respecting modes used by [`interval_ccr_demo`].
pub const INTERVAL_MODES: i64 = 16;

/// Finite toy of position/momentum on `L^2([0, 1])` with `psi(0) = theta psi(1)`.
///
/// The momentum eigenmodes are `exp(i kappa_m x)` with
/// `kappa_m = 2 pi m - arg(theta)`. Reports the boundary mismatch of
/// `exp(i eps Q) e_m` and the largest matrix element of
/// `P exp(i eps Q) - exp(i eps Q) (P + eps)` between the lowest modes.
/// Both vanish only when `eps` is a multiple of `2 pi`.
pub fn interval_ccr_demo(theta: Complex64, eps: f64) -> Result<Report> {
    if (theta.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::Config(format!(
            "boundary phase must have unit modulus, got |theta| = {}",
            theta.norm()
        )));
    }
    let modes: Vec<i64> = (-INTERVAL_MODES / 2..INTERVAL_MODES / 2).collect();

    // every mode exp(i (kappa_m + eps) x) has theta f(1) = exp(i (2 pi m + eps)),
    // so the mismatch f(0) - theta f(1) = 1 - exp(i eps) is the same for all
    let mismatch = 2.0 * (0.5 * eps).sin().abs();

    // <e_n, exp(i eps x) e_m> = exp(i phi/2) sinc(phi/2), phi = kappa_m - kappa_n + eps
    let mut shift: f64 = 0.0;
    for &n in &modes {
        for &m in &modes {
            let phi = 2.0 * PI * (m - n) as f64 + eps;
            let half = 0.5 * phi;
            // sin(pi (m - n) + eps/2), exact at integer multiples of pi
            let sign = if (m - n).rem_euclid(2) == 0 {
                1.0
            } else {
                -1.0
            };
            let sinc = if half == 0.0 {
                1.0
            } else {
                sign * (0.5 * eps).sin() / half
            };
            let e_nm = Complex64::from_polar(sinc, half);
            let residual = -phi * e_nm;
            shift = shift.max(residual.norm());
        }
    }

    let periods = eps / (2.0 * PI);
    let commensurate = (periods - periods.round()).abs() < 1e-12;
    let mut report = Report::new(
        "interval_ccr_demo",
        "P exp(i eps Q) = exp(i eps Q) (P + eps) on L^2([0,1]) with psi(0) = theta psi(1)",
    );
    report
        .input("theta_re", theta.re)
        .input("theta_im", theta.im)
        .input("eps", eps)
        .input("modes", INTERVAL_MODES)
        .quantity("boundary_mismatch", mismatch)
        .quantity("shift_residual", shift)
        .quantity("eps_over_2pi", periods)
        .tolerance("residual", 1e-10);
    if commensurate {
        report.check_below("boundary_mismatch", mismatch, 1e-10);
        report.check_below("shift_residual", shift, 1e-10);
    } else {
        report.check_above("boundary_mismatch", mismatch, 1e-10);
        report.check_above("shift_residual", shift, 1e-10);
    }
    Ok(report)
}
