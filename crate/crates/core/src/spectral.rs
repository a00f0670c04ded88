//! Spectral measure of `H0`, the absolute-continuity and resolvent bounds,
//! the commutator identities and uncertainty products.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::MomentumGrid;
use crate::operators::{apply_t0, resolvent_h0, FreeHamiltonian, TimeOperator};
use crate::report::Report;
use crate::states::{make_phi_n, std_dev, Representation, WaveFunction};

/// Finite union of disjoint half-open energy intervals `[a, b)`.
///
/// The upper end may be `+inf`. Zero-length intervals are dropped, so a
/// degenerate set has measure zero and zero spectral weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BorelSet {
    intervals: Vec<(f64, f64)>,
}

impl BorelSet {
    pub fn empty() -> Self {
        Self {
            intervals: Vec::new(),
        }
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::new(&[(a, b)])
    }

    /// Sorts and merges the given intervals.
    pub fn new(intervals: &[(f64, f64)]) -> Result<Self> {
        let mut v: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
        for &(a, b) in intervals {
            if a.is_nan() || b.is_nan() || a == f64::INFINITY || b < a {
                return Err(Error::Config(format!("invalid interval [{a}, {b})")));
            }
            if b > a {
                v.push((a, b));
            }
        }
        v.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(v.len());
        for (a, b) in v {
            match merged.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        Ok(Self { intervals: merged })
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Total Lebesgue measure `|B|`.
    pub fn lebesgue(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }
}

fn overlap(a: f64, b: f64, c: f64, d: f64) -> f64 {
    (b.min(d) - a.max(c)).max(0.0)
}

/// `||E(B) psi||^2` for `H0`: the mass of `|psi|^2` on `{k : k^2/2 in B}`.
///
/// `|psi|^2` is taken constant on each lattice cell `[k_j - dk/2, k_j + dk/2)`
/// and the part of the cell mapped into `B` is measured exactly, so
/// intervals narrower than a cell still get a proportionate weight.
pub fn spectral_weight_h0(psi: &WaveFunction, set: &BorelSet) -> Result<f64> {
    psi.require(Representation::Momentum)?;
    let grid = psi.grid();
    let h = grid.spacing();
    let bands: Vec<(f64, f64)> = set
        .intervals()
        .iter()
        .filter(|(_, b)| *b > 0.0)
        .map(|&(a, b)| ((2.0 * a.max(0.0)).sqrt(), (2.0 * b).sqrt()))
        .collect();
    let mut total = 0.0;
    for (j, amp) in psi.amplitudes().iter().enumerate() {
        let w = amp.norm_sqr();
        if w == 0.0 {
            continue;
        }
        let k = grid.node(j);
        let (lo, hi) = (k - 0.5 * h, k + 0.5 * h);
        let mut len = 0.0;
        for &(ka, kb) in &bands {
            len += overlap(lo, hi, ka, kb) + overlap(lo, hi, -kb, -ka);
        }
        total += w * len;
    }
    Ok(total)
}

/// Absolute-continuity bound `||E(B) psi||^2 <= ||T0 psi|| ||psi|| |B|`.
pub fn check_ac_bound(psi: &WaveFunction, set: &BorelSet) -> Result<Report> {
    let weight = spectral_weight_h0(psi, set)?;
    let rhs = apply_t0(psi)?.norm() * psi.norm() * set.lebesgue();
    let mut r = Report::new(
        "ac_bound",
        "||E(B) psi||^2 <= ||T0 psi|| ||psi|| |B| (H0 absolutely continuous)",
    )
    .with_grid(*psi.grid());
    r.input("intervals", set.intervals())
        .quantity("spectral_weight", weight)
        .quantity("bound", rhs)
        .tolerance("additive", AC_SLACK);
    r.check_at_most("excess", weight - rhs, AC_SLACK);
    Ok(r)
}

/// Additive slack of the absolute-continuity check.
pub const AC_SLACK: f64 = 1e-8;

/// `count` seeded random intervals `[a, b)` with `lo <= a < b <= hi`.
pub fn random_intervals(seed: u64, count: usize, lo: f64, hi: f64) -> Vec<BorelSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let x: f64 = rng.gen_range(lo..hi);
            let y: f64 = rng.gen_range(lo..hi);
            BorelSet::interval(x.min(y), x.max(y)).expect("ordered finite endpoints")
        })
        .collect()
}

/// Absolute-continuity bound over seeded random intervals for every state.
pub fn ac_bound_sweep(
    states: &[(String, WaveFunction)],
    seed: u64,
    count: usize,
    hi: f64,
) -> Result<Report> {
    let sets = random_intervals(seed, count, 0.0, hi);
    let mut r = Report::new(
        "ac_bound_sweep",
        "||E(B) psi||^2 <= ||T0 psi|| ||psi|| |B| over random intervals B",
    )
    .with_seed(seed);
    r.input("intervals", count)
        .input("upper_energy", hi)
        .tolerance("additive", AC_SLACK);
    for (label, psi) in states {
        let t_norm = apply_t0(psi)?.norm();
        let mut violations = 0usize;
        let mut ratio: f64 = 0.0;
        for b in &sets {
            let w = spectral_weight_h0(psi, b)?;
            let rhs = t_norm * psi.norm() * b.lebesgue();
            if w > rhs + AC_SLACK {
                violations += 1;
            }
            if rhs > 0.0 {
                ratio = ratio.max(w / rhs);
            }
        }
        r.quantity(&format!("{label}.max_ratio"), ratio);
        r.check_at_most(&format!("{label}.violations"), violations as f64, 0.0);
    }
    Ok(r)
}

/// `f(eps, lambda) = int_0^inf exp(-eps t) sin(lambda t) / t dt = arctan(lambda / eps)`,
/// written as `sign(lambda) (pi/2 - arctan(eps/|lambda|))`.
pub fn f_eps_lambda(eps: f64, lambda: f64) -> Result<f64> {
    check_eps(eps)?;
    if lambda == 0.0 {
        return Ok(0.0);
    }
    Ok(lambda.signum() * (FRAC_PI_2 - (eps / lambda.abs()).atan()))
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Config(format!("eps must be positive, got {eps}")));
    }
    Ok(())
}

const GL_ORDER: usize = 16;

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// `int_0^inf exp(-eps t) sin(lambda t) / t dt` by panelled Gauss-Legendre.
///
/// Panels are at most half a period of the sine and one decay length wide;
/// the tail beyond `t = 40 / eps` is below `1e-17`.
pub fn f_eps_lambda_direct(eps: f64, lambda: f64) -> Result<f64> {
    check_eps(eps)?;
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let (x, w) = gauss_legendre(GL_ORDER);
    let end = 40.0 / eps;
    let width = (PI / lambda.abs()).min(1.0 / eps);
    let panels = (end / width).ceil() as usize;
    let half = 0.5 * width;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * width;
        let mut s = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            let t = mid + half * xi;
            s += wi * (-eps * t).exp() * (lambda * t).sin() / t;
        }
        total += s * half;
    }
    Ok(total)
}

/// Resolvent bound `|Im <psi, R(lambda + i eps) psi>| <= pi ||T0 psi|| ||psi||`.
pub fn resolvent_bound_check(psi: &WaveFunction, lambda: f64, eps: f64) -> Result<Report> {
    check_eps(eps)?;
    let r_psi = resolvent_h0(psi, Complex64::new(lambda, eps))?;
    let lhs = psi.inner(&r_psi)?.im.abs();
    let rhs = PI * apply_t0(psi)?.norm() * psi.norm();
    let mut r = Report::new(
        "resolvent_bound",
        "|Im <psi, R(lambda + i eps) psi>| <= pi ||T0 psi|| ||psi||",
    )
    .with_grid(*psi.grid());
    r.input("lambda", lambda)
        .input("eps", eps)
        .quantity("lhs", lhs)
        .quantity("rhs", rhs);
    r.check_at_most("lhs_minus_rhs", lhs - rhs, 0.0);
    Ok(r)
}

/// Residual norms of `[T0, cos tH0] psi + i t sin(tH0) psi` and
/// `[T0, sin tH0] psi - i t cos(tH0) psi`.
pub fn commutator_residuals(psi: &WaveFunction, t: f64) -> Result<(f64, f64)> {
    psi.require(Representation::Momentum)?;
    let cos = |w: &WaveFunction| w.map_nodes(|k, a| a * (0.5 * t * k * k).cos());
    let sin = |w: &WaveFunction| w.map_nodes(|k, a| a * (0.5 * t * k * k).sin());
    let t_psi = apply_t0(psi)?;
    let minus = Complex64::new(-1.0, 0.0);
    let it = Complex64::new(0.0, t);

    let c_comm = apply_t0(&cos(psi))?.axpy(minus, &cos(&t_psi))?;
    let first = c_comm.axpy(it, &sin(psi))?.norm();
    let s_comm = apply_t0(&sin(psi))?.axpy(minus, &sin(&t_psi))?;
    let second = s_comm.axpy(-it, &cos(psi))?.norm();
    Ok((first, second))
}

pub fn commutator_check(psi: &WaveFunction, t: f64) -> Result<Report> {
    let (a, b) = commutator_residuals(psi, t)?;
    let limit = 1e-6 * (1.0 + t.abs()) * psi.norm();
    let mut r = Report::new(
        "commutator",
        "[T0, cos tH0] = -i t sin tH0 and [T0, sin tH0] = i t cos tH0 on Dom(T0)",
    )
    .with_grid(*psi.grid());
    r.input("t", t).tolerance("residual", limit);
    r.check_below("cos_residual", a, limit);
    r.check_below("sin_residual", b, limit);
    Ok(r)
}

/// `(Delta T0)_psi (Delta H0)_psi` for the normalised state.
pub fn uncertainty_product(psi: &WaveFunction) -> Result<f64> {
    let unit = psi.normalized();
    Ok(std_dev(&TimeOperator, &unit)? * std_dev(&FreeHamiltonian, &unit)?)
}

/// `0.5 sqrt((n + 1/2) / (n - 3/2))`, the uncertainty product of `phi_n`.
pub fn phi_n_uncertainty(n: u32) -> f64 {
    let n = n as f64;
    0.5 * ((n + 0.5) / (n - 1.5)).sqrt()
}

/// Tolerance on each product of the Kobe sequence against its closed form.
pub const KOBE_TOLERANCE: f64 = 1e-4;

/// One row of the Kobe sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KobeRow {
    pub n: u32,
    pub product: f64,
    pub closed_form: f64,
}

pub fn kobe_rows(n_list: &[u32], a0: f64, grid: &MomentumGrid) -> Result<Vec<KobeRow>> {
    n_list
        .iter()
        .map(|&n| {
            if n < 2 {
                return Err(Error::Config(format!(
                    "phi_{n} is outside the time-operator domain; need n >= 2"
                )));
            }
            let psi = make_phi_n(n, a0, grid)?;
            Ok(KobeRow {
                n,
                product: uncertainty_product(&psi)?,
                closed_form: phi_n_uncertainty(n),
            })
        })
        .collect()
}

/// Uncertainty products along `phi_n`: closed form, strict decrease, and
/// strictly above `1/2` with the gap shrinking to zero.
pub fn kobe_sequence(n_list: &[u32], a0: f64, grid: &MomentumGrid) -> Result<Report> {
    let rows = kobe_rows(n_list, a0, grid)?;
    let mut r = Report::new(
        "kobe_sequence",
        "(Delta T0)(Delta H0) > 1/2 for every state, with infimum 1/2 approached along phi_n",
    )
    .with_grid(*grid);
    r.input("n_list", n_list)
        .input("a0", a0)
        .tolerance("closed_form", KOBE_TOLERANCE);
    for row in &rows {
        r.quantity(&format!("product_n{}", row.n), row.product);
        r.check_below(
            &format!("closed_form_n{}", row.n),
            (row.product - row.closed_form).abs(),
            KOBE_TOLERANCE,
        );
        r.check_above(&format!("above_half_n{}", row.n), row.product, 0.5);
    }
    let decreasing = rows
        .windows(2)
        .all(|w| w[1].n > w[0].n && w[1].product < w[0].product);
    r.check(
        "strictly_decreasing",
        rows.len() as f64,
        "products strictly decrease in n",
        decreasing,
    );
    if let Some(last) = rows.last() {
        r.quantity("gap_to_half", last.product - 0.5);
    }
    Ok(r)
}
