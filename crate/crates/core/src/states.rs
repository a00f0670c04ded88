//! Wave functions on the lattice, the test-state families, and the
//! expectation / standard-deviation functionals.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::error::{Error, Result};
use crate::lattice::MomentumGrid;
use crate::operators::Operator;

/// Largest tail mass outside the box accepted for a Gaussian-family state.
pub const TAIL_MASS_LIMIT: f64 = 1e-12;

/// Relative size of `Im <psi, A psi>` tolerated for a symmetric operator.
pub const SYMMETRY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Representation {
    Momentum,
    Position,
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Representation::Momentum => f.write_str("momentum"),
            Representation::Position => f.write_str("position"),
        }
    }
}

/// Complex amplitudes on a lattice, tagged with their representation.
///
/// The norm is the lattice `l2` norm weighted by the node spacing of the
/// representation; it is computed once at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    grid: MomentumGrid,
    representation: Representation,
    amplitudes: Vec<Complex64>,
    norm: f64,
}

impl WaveFunction {
    pub fn new(
        grid: MomentumGrid,
        representation: Representation,
        amplitudes: Vec<Complex64>,
    ) -> Result<Self> {
        if amplitudes.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                found: amplitudes.len(),
            });
        }
        Ok(Self::from_amplitudes(grid, representation, amplitudes))
    }

    /// Unchecked constructor; the caller guarantees `amplitudes.len() == grid.len()`.
    pub(crate) fn from_amplitudes(
        grid: MomentumGrid,
        representation: Representation,
        amplitudes: Vec<Complex64>,
    ) -> Self {
        debug_assert_eq!(amplitudes.len(), grid.len());
        let spacing = match representation {
            Representation::Momentum => grid.spacing(),
            Representation::Position => grid.position_spacing(),
        };
        let norm = (spacing * amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>()).sqrt();
        Self {
            grid,
            representation,
            amplitudes,
            norm,
        }
    }

    /// Samples `f(k)` at every momentum node.
    pub fn from_fn(grid: MomentumGrid, f: impl Fn(f64) -> Complex64) -> Self {
        let amps = grid.nodes().map(f).collect();
        Self::from_amplitudes(grid, Representation::Momentum, amps)
    }

    /// Samples `f(x)` at every position node.
    pub fn from_position_fn(grid: MomentumGrid, f: impl Fn(f64) -> Complex64) -> Self {
        let amps = grid.position_nodes().map(f).collect();
        Self::from_amplitudes(grid, Representation::Position, amps)
    }

    pub fn grid(&self) -> &MomentumGrid {
        &self.grid
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn norm_sqr(&self) -> f64 {
        self.norm * self.norm
    }

    pub fn spacing(&self) -> f64 {
        match self.representation {
            Representation::Momentum => self.grid.spacing(),
            Representation::Position => self.grid.position_spacing(),
        }
    }

    pub fn require(&self, representation: Representation) -> Result<()> {
        if self.representation != representation {
            return Err(Error::Representation {
                expected: representation,
                found: self.representation,
            });
        }
        Ok(())
    }

    fn compatible(&self, other: &WaveFunction) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!(
                "(K={}, N={}) vs (K={}, N={})",
                self.grid.half_width(),
                self.grid.len(),
                other.grid.half_width(),
                other.grid.len()
            )));
        }
        other.require(self.representation)
    }

    /// `<self, other>`, antilinear in `self`.
    pub fn inner(&self, other: &WaveFunction) -> Result<Complex64> {
        self.compatible(other)?;
        let s: Complex64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(s * self.spacing())
    }

    /// `||self - other||`.
    pub fn distance(&self, other: &WaveFunction) -> Result<f64> {
        self.compatible(other)?;
        let s: f64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        Ok((s * self.spacing()).sqrt())
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: Complex64, other: &WaveFunction) -> Result<WaveFunction> {
        self.compatible(other)?;
        let amps = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a + c * b)
            .collect();
        Ok(Self::from_amplitudes(self.grid, self.representation, amps))
    }

    pub fn scaled(&self, c: Complex64) -> WaveFunction {
        let amps = self.amplitudes.iter().map(|a| a * c).collect();
        Self::from_amplitudes(self.grid, self.representation, amps)
    }

    /// Unit-norm copy. Panics on the zero vector.
    pub fn normalized(&self) -> WaveFunction {
        assert!(self.norm > 0.0, "cannot normalize the zero vector");
        self.scaled(Complex64::new(1.0 / self.norm, 0.0))
    }

    /// Pointwise map `a_j -> f(node_j, a_j)` in the current representation.
    pub fn map_nodes(&self, f: impl Fn(f64, Complex64) -> Complex64) -> WaveFunction {
        let amps = match self.representation {
            Representation::Momentum => self
                .grid
                .nodes()
                .zip(&self.amplitudes)
                .map(|(k, a)| f(k, *a))
                .collect(),
            Representation::Position => self
                .grid
                .position_nodes()
                .zip(&self.amplitudes)
                .map(|(x, a)| f(x, *a))
                .collect(),
        };
        Self::from_amplitudes(self.grid, self.representation, amps)
    }

    /// Largest |node| carrying amplitude above `rel * max|amplitude|`.
    pub fn support_edge(&self, rel: f64) -> f64 {
        let peak = self.amplitudes.iter().map(|a| a.norm()).fold(0.0, f64::max);
        let cut = rel * peak;
        let node = |j: usize| match self.representation {
            Representation::Momentum => self.grid.node(j),
            Representation::Position => self.grid.position_node(j),
        };
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > cut)
            .map(|(j, _)| node(j).abs())
            .fold(0.0, f64::max)
    }
}

/// The parametrised test-state families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateFamily {
    /// `k^n N_n exp(-a0 k^2)`.
    PhiN { n: u32, a0: f64 },
    /// Smooth bump `exp(-1/((k-k1)(k2-k)))` supported on `[k1, k2]`, away from 0.
    Bump { k1: f64, k2: f64 },
    /// `exp(-1/k^2) / (1 + |k|^s)`, square integrable with a slow tail.
    PowerTail { s: f64 },
}

impl StateFamily {
    pub fn build(&self, grid: &MomentumGrid) -> Result<WaveFunction> {
        match *self {
            StateFamily::PhiN { n, a0 } => make_phi_n(n, a0, grid),
            StateFamily::Bump { k1, k2 } => make_bump(k1, k2, grid),
            StateFamily::PowerTail { s } => make_power_tail(s, grid),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            StateFamily::PhiN { n, a0 } => format!("phi_{n}(a0={a0})"),
            StateFamily::Bump { k1, k2 } => format!("bump[{k1},{k2}]"),
            StateFamily::PowerTail { s } => format!("power_tail(s={s})"),
        }
    }

    pub fn is_bump(&self) -> bool {
        matches!(self, StateFamily::Bump { .. })
    }
}

impl fmt::Display for StateFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// `ln N_n` for `phi_n`, from `N_n^{-2} = Gamma(n + 1/2) / (2 a0)^{n + 1/2}`.
pub fn phi_n_log_norm(n: u32, a0: f64) -> f64 {
    let m = n as f64 + 0.5;
    -0.5 * (ln_gamma(m) - m * (2.0 * a0).ln())
}

/// Mass of `|phi_n|^2` outside `[-K, K]`.
pub fn phi_n_tail_mass(n: u32, a0: f64, half_width: f64) -> f64 {
    gamma_ur(n as f64 + 0.5, 2.0 * a0 * half_width * half_width)
}

/// `phi_n(k) = k^n N_n exp(-a0 k^2)`, renormalised on the lattice.
pub fn make_phi_n(n: u32, a0: f64, grid: &MomentumGrid) -> Result<WaveFunction> {
    if !(a0.is_finite() && a0 > 0.0) {
        return Err(Error::Config(format!("a0 must be positive, got {a0}")));
    }
    let tail = phi_n_tail_mass(n, a0, grid.half_width());
    if tail > TAIL_MASS_LIMIT {
        return Err(Error::DomainCoverage {
            tail,
            limit: TAIL_MASS_LIMIT,
        });
    }
    let ln_norm = phi_n_log_norm(n, a0);
    let psi = WaveFunction::from_fn(*grid, |k| {
        // log-space evaluation keeps k^n e^{-a0 k^2} finite for large n
        let mag = (n as f64 * k.abs().ln() - a0 * k * k + ln_norm).exp();
        let sign = if k < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
        Complex64::new(sign * mag, 0.0)
    });
    Ok(psi.normalized())
}

/// Fewest lattice nodes a bump support must contain.
pub const MIN_BUMP_NODES: usize = 16;

/// Normalised `C_0^inf` bump on `[k1, k2]`, identically zero elsewhere.
pub fn make_bump(k1: f64, k2: f64, grid: &MomentumGrid) -> Result<WaveFunction> {
    if k1.partial_cmp(&k2) != Some(std::cmp::Ordering::Less) {
        return Err(Error::Support(format!("need k1 < k2, got [{k1}, {k2}]")));
    }
    if k1 < 0.0 && k2 > 0.0 || k1 == 0.0 || k2 == 0.0 {
        return Err(Error::Support(format!(
            "support [{k1}, {k2}] must exclude the origin"
        )));
    }
    let kmax = grid.half_width();
    if k1 < -kmax || k2 > kmax {
        return Err(Error::Support(format!(
            "support [{k1}, {k2}] leaves the box [-{kmax}, {kmax}]"
        )));
    }
    let inside = grid.nodes().filter(|k| *k > k1 && *k < k2).count();
    if inside < MIN_BUMP_NODES {
        return Err(Error::Support(format!(
            "support [{k1}, {k2}] holds only {inside} nodes (need {MIN_BUMP_NODES})"
        )));
    }
    let psi = WaveFunction::from_fn(*grid, |k| {
        if k > k1 && k < k2 {
            Complex64::new((-1.0 / ((k - k1) * (k2 - k))).exp(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Ok(psi.normalized())
}

/// Normalised `g(k) = exp(-1/k^2) / (1 + |k|^s)` for `1/2 < s <= 3/2`.
pub fn make_power_tail(s: f64, grid: &MomentumGrid) -> Result<WaveFunction> {
    if !(s > 0.5 && s <= 1.5) {
        return Err(Error::Config(format!(
            "power-tail exponent must lie in (1/2, 3/2], got {s}"
        )));
    }
    let psi = WaveFunction::from_fn(*grid, |k| {
        Complex64::new((-1.0 / (k * k)).exp() / (1.0 + k.abs().powf(s)), 0.0)
    });
    Ok(psi.normalized())
}

/// `<psi, A psi>` without the reality check.
pub fn raw_expectation<A: Operator + ?Sized>(op: &A, psi: &WaveFunction) -> Result<Complex64> {
    let a_psi = op.apply(psi)?;
    psi.inner(&a_psi)
}

/// `<A>_psi = <psi, A psi>`; errors if the imaginary part exceeds
/// `1e-6 * ||psi||^2`.
pub fn expectation<A: Operator + ?Sized>(op: &A, psi: &WaveFunction) -> Result<f64> {
    let v = raw_expectation(op, psi)?;
    let bound = SYMMETRY_TOLERANCE * psi.norm_sqr();
    if v.im.abs() > bound {
        return Err(Error::SymmetryViolation { imag: v.im, bound });
    }
    Ok(v.re)
}

/// `(Delta A)_psi = ||(A - <A>_psi) psi||`.
pub fn std_dev<A: Operator + ?Sized>(op: &A, psi: &WaveFunction) -> Result<f64> {
    let a_psi = op.apply(psi)?;
    let v = psi.inner(&a_psi)?;
    let bound = SYMMETRY_TOLERANCE * psi.norm_sqr();
    if v.im.abs() > bound {
        return Err(Error::SymmetryViolation { imag: v.im, bound });
    }
    Ok(a_psi.axpy(Complex64::new(-v.re, 0.0), psi)?.norm())
}
