//! Wave operators for short-range potentials and the conjugated time
//! operators `T1 = U T0 U*`.
//!
//! `U = lim exp(i T H1) exp(-i T H0)` is approximated along doubling horizons
//! `T0 2^j`; the free factor is exact and the interacting factor is a
//! Strang split-step run backwards. The adjoint reverses the composition.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{free_propagate, SplitStep};
use crate::operators::{apply_t0, PotentialSpec};
use crate::report::Report;
use crate::states::{Representation, WaveFunction};

/// Sign of the time limit defining a wave operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Plus,
    Minus,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Plus => 1.0,
            Direction::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Direction::Plus => "+",
            Direction::Minus => "-",
        }
    }
}

/// Horizon schedule and tolerances for the wave-operator limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveOperatorOptions {
    /// First horizon.
    pub t0: f64,
    /// Number of horizons `t0, 2 t0, ..., t0 2^(levels-1)`.
    pub levels: u32,
    /// Cauchy tolerance on the last increment, relative to the input norm.
    pub tol: f64,
    /// Split-step size.
    pub dt: f64,
}

impl Default for WaveOperatorOptions {
    fn default() -> Self {
        Self {
            t0: 2.0,
            levels: 6,
            tol: 1e-3,
            dt: 0.01,
        }
    }
}

impl WaveOperatorOptions {
    pub fn horizons(&self) -> Vec<f64> {
        (0..self.levels)
            .map(|j| self.t0 * f64::from(1u32 << j))
            .collect()
    }

    pub fn final_horizon(&self) -> f64 {
        self.t0 * f64::from(1u32 << (self.levels - 1))
    }

    /// Options for the limits inside `T1 = U T0 U*`, which share the
    /// combined budget of the relation they feed.
    pub fn conjugation(&self) -> Self {
        Self {
            tol: self.tol.max(COMBINED_TOLERANCE / 4.0),
            ..*self
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.t0 > 0.0 && self.tol > 0.0 && self.dt > 0.0)
            || self.levels < 2
            || self.levels > 20
        {
            return Err(Error::Config(format!(
                "invalid wave-operator options {self:?}"
            )));
        }
        Ok(())
    }
}

/// Which side of the limit a [`WaveOperatorResult`] realises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `U psi = lim exp(iTH1) exp(-iTH0) psi`.
    Forward,
    /// `U* phi = lim exp(iTH0) exp(-iTH1) phi`.
    Adjoint,
}

/// Horizon-doubling sequence for one wave-operator application.
#[derive(Debug, Clone)]
pub struct WaveOperatorResult {
    pub direction: Direction,
    pub side: Side,
    pub horizons: Vec<f64>,
    /// `||Psi(T_{j+1}) - Psi(T_j)||`.
    pub increments: Vec<f64>,
    pub converged: bool,
    /// Step-doubling estimate of the split-step error at the final horizon.
    pub stepping_error: f64,
    pub state: WaveFunction,
}

impl WaveOperatorResult {
    pub fn last_increment(&self) -> f64 {
        *self.increments.last().expect("at least two horizons")
    }

    /// The limit state, or a convergence error carrying the increments.
    pub fn into_converged(self) -> Result<WaveFunction> {
        if self.converged {
            Ok(self.state)
        } else {
            Err(Error::Convergence {
                increments: self.increments,
            })
        }
    }
}

/// Smallest `K'` with `||psi||^2` mass beyond `|k| > K'` at most `fraction`.
fn momentum_edge(psi: &WaveFunction, fraction: f64) -> f64 {
    let grid = psi.grid();
    let n = grid.len();
    let budget = fraction * psi.norm_sqr() / grid.spacing();
    let amps = psi.amplitudes();
    let mut tail = 0.0;
    for i in 0..n / 2 {
        let next = tail + amps[i].norm_sqr() + amps[n - 1 - i].norm_sqr();
        if next > budget {
            return grid.node(n - 1 - i);
        }
        tail = next;
    }
    grid.spacing()
}

/// Box of width `2 pi / dk` at least four free flights `T k_max`, with
/// `k_max` cutting a momentum tail whose wrap-around stays below `tol / 4`.
fn check_box(psi: &WaveFunction, horizon: f64, tol: f64) -> Result<()> {
    let grid = psi.grid();
    let k_max = momentum_edge(psi, (0.25 * tol).powi(2));
    let width = 2.0 * grid.position_half_width();
    if width < 4.0 * horizon * k_max {
        return Err(Error::Config(format!(
            "position box {width:.1} is narrower than 4 x free flight {:.1} (T = {horizon}, k_max = {k_max:.3})",
            horizon * k_max
        )));
    }
    Ok(())
}

/// `exp(i s T H1) exp(-i s T H0) psi` or the reversed composition.
fn finite_horizon(
    psi: &WaveFunction,
    v: &PotentialSpec,
    s_t: f64,
    side: Side,
    dt: f64,
) -> Result<WaveFunction> {
    let steps = (s_t.abs() / dt).ceil().max(1.0) as usize;
    let h = s_t / steps as f64;
    match side {
        Side::Forward => {
            let free = free_propagate(psi, Complex64::new(s_t, 0.0))?;
            SplitStep::new(v, -h)?.propagate(&free, steps)
        }
        Side::Adjoint => {
            let inter = SplitStep::new(v, h)?.propagate(psi, steps)?;
            free_propagate(&inter, Complex64::new(-s_t, 0.0))
        }
    }
}

fn limit_sequence(
    psi: &WaveFunction,
    v: &PotentialSpec,
    direction: Direction,
    side: Side,
    opts: &WaveOperatorOptions,
) -> Result<WaveOperatorResult> {
    opts.validate()?;
    psi.require(Representation::Momentum)?;
    if psi.grid() != v.grid() {
        return Err(Error::GridMismatch(
            "potential and state live on different lattices".into(),
        ));
    }
    check_box(psi, opts.final_horizon(), opts.tol)?;
    let horizons = opts.horizons();
    if v.is_zero() {
        let n = horizons.len() - 1;
        return Ok(WaveOperatorResult {
            direction,
            side,
            horizons,
            increments: vec![0.0; n],
            converged: true,
            stepping_error: 0.0,
            state: psi.clone(),
        });
    }
    let s = direction.sign();
    let mut states = Vec::with_capacity(horizons.len());
    for &t in &horizons {
        states.push(finite_horizon(psi, v, s * t, side, opts.dt)?);
    }
    let increments: Vec<f64> = states
        .windows(2)
        .map(|w| w[1].distance(&w[0]))
        .collect::<Result<_>>()?;
    let last = states.pop().expect("at least two horizons");
    let coarse = finite_horizon(psi, v, s * opts.final_horizon(), side, 2.0 * opts.dt)?;
    let stepping_error = last.distance(&coarse)? / 3.0;
    let converged = *increments.last().expect("at least one increment") < opts.tol * psi.norm();
    Ok(WaveOperatorResult {
        direction,
        side,
        horizons,
        increments,
        converged,
        stepping_error,
        state: last,
    })
}

/// `U_± psi` along doubling horizons; check [`WaveOperatorResult::converged`].
pub fn wave_operator(
    psi: &WaveFunction,
    v: &PotentialSpec,
    direction: Direction,
    opts: &WaveOperatorOptions,
) -> Result<WaveOperatorResult> {
    limit_sequence(psi, v, direction, Side::Forward, opts)
}

/// `U_±* phi` along doubling horizons.
pub fn adjoint_wave_operator(
    phi: &WaveFunction,
    v: &PotentialSpec,
    direction: Direction,
    opts: &WaveOperatorOptions,
) -> Result<WaveOperatorResult> {
    limit_sequence(phi, v, direction, Side::Adjoint, opts)
}

/// `T1 psi = U T0 U* psi`; both limits must converge to `opts.tol`, see
/// [`WaveOperatorOptions::conjugation`].
pub fn conjugated_t(
    psi: &WaveFunction,
    v: &PotentialSpec,
    direction: Direction,
    opts: &WaveOperatorOptions,
) -> Result<WaveFunction> {
    let pulled = adjoint_wave_operator(psi, v, direction, opts)?.into_converged()?;
    let t_pulled = apply_t0(&pulled)?;
    wave_operator(&t_pulled, v, direction, opts)?.into_converged()
}

/// `exp(-i t H1) psi` with the options' step size.
pub fn interacting_propagate(
    psi: &WaveFunction,
    v: &PotentialSpec,
    t: f64,
    dt: f64,
) -> Result<WaveFunction> {
    if t == 0.0 {
        return Ok(psi.clone());
    }
    let steps = (t.abs() / dt).ceil().max(1.0) as usize;
    SplitStep::new(v, t / steps as f64)?.propagate(psi, steps)
}

fn scattering_report(
    name: &str,
    relation: &str,
    psi: &WaveFunction,
    v: &PotentialSpec,
    direction: Direction,
    opts: &WaveOperatorOptions,
) -> Report {
    let mut r = Report::new(name, relation).with_grid(*psi.grid());
    r.input("potential", v.name())
        .input("direction", direction.symbol())
        .input("options", opts)
        .tolerance("wave_operator", opts.tol);
    r
}

/// Combined tolerance of the end-to-end scattering checks.
pub const COMBINED_TOLERANCE: f64 = 1e-2;

/// `||exp(-isH1) U psi - U exp(-isH0) psi|| / ||psi||`.
pub fn intertwining_check(
    psi: &WaveFunction,
    v: &PotentialSpec,
    s: f64,
    direction: Direction,
    opts: &WaveOperatorOptions,
) -> Result<Report> {
    let u = wave_operator(psi, v, direction, opts)?;
    let stepping = u.stepping_error;
    let lhs = interacting_propagate(&u.into_converged()?, v, s, opts.dt)?;
    let rhs = wave_operator(
        &free_propagate(psi, Complex64::new(s, 0.0))?,
        v,
        direction,
        opts,
    )?
    .into_converged()?;
    let residual = lhs.distance(&rhs)? / psi.norm();
    let mut r = scattering_report(
        "intertwining",
        "exp(-isH1) U = U exp(-isH0), i.e. H1 = U H0 U* on the range of U",
        psi,
        v,
        direction,
        opts,
    );
    r.input("s", s)
        .quantity("stepping_error", stepping)
        .tolerance("combined", COMBINED_TOLERANCE);
    r.check_below("residual", residual, COMBINED_TOLERANCE);
    Ok(r)
}

/// T-weak Weyl relation for `(T1, H1)` on `psi = U eta`.
pub fn t1_tweakwr_check(
    eta: &WaveFunction,
    v: &PotentialSpec,
    t: f64,
    direction: Direction,
    opts: &WaveOperatorOptions,
) -> Result<Report> {
    let u = wave_operator(eta, v, direction, opts)?;
    let stepping = u.stepping_error;
    let psi = u.into_converged()?;
    let inner = opts.conjugation();
    let evolved = interacting_propagate(&psi, v, t, opts.dt)?;
    let lhs = conjugated_t(&evolved, v, direction, &inner)?;
    let shifted = conjugated_t(&psi, v, direction, &inner)?.axpy(Complex64::new(t, 0.0), &psi)?;
    let rhs = interacting_propagate(&shifted, v, t, opts.dt)?;
    let residual = lhs.distance(&rhs)? / psi.norm();
    let mut r = scattering_report(
        "t1_tweakwr",
        "T1 exp(-itH1) = exp(-itH1) (T1 + t) with T1 = U T0 U*",
        eta,
        v,
        direction,
        opts,
    );
    r.input("t", t)
        .quantity("stepping_error", stepping)
        .tolerance("combined", COMBINED_TOLERANCE);
    r.check_below("residual", residual, COMBINED_TOLERANCE);
    Ok(r)
}

/// Symmetry and expectation transport of `T1` on conjugated pairs.
pub fn t1_symmetry_check(
    eta: &WaveFunction,
    zeta: &WaveFunction,
    v: &PotentialSpec,
    direction: Direction,
    opts: &WaveOperatorOptions,
) -> Result<Report> {
    let psi = wave_operator(eta, v, direction, opts)?.into_converged()?;
    let phi = wave_operator(zeta, v, direction, opts)?.into_converged()?;
    let inner = opts.conjugation();
    let t_psi = conjugated_t(&psi, v, direction, &inner)?;
    let t_phi = conjugated_t(&phi, v, direction, &inner)?;
    let asym = (phi.inner(&t_psi)? - t_phi.inner(&psi)?).norm();
    let transported = psi.inner(&t_psi)?.re / psi.norm_sqr();
    let free = eta.inner(&apply_t0(eta)?)?.re / eta.norm_sqr();
    let limit = 5.0 * opts.tol;
    let mut r = scattering_report(
        "t1_symmetry",
        "<phi, T1 psi> = <T1 phi, psi> and <T1>_{U eta} = <T0>_eta",
        eta,
        v,
        direction,
        opts,
    );
    r.quantity("expectation_t1", transported)
        .quantity("expectation_t0", free)
        .tolerance("symmetry", limit);
    r.check_below("antisymmetric_part", asym, limit);
    r.check_below("expectation_transport", (transported - free).abs(), limit);
    Ok(r)
}

/// Ground state of `H1` by normalised imaginary-time Strang steps.
#[derive(Debug, Clone)]
pub struct BoundState {
    pub state: WaveFunction,
    pub energy: f64,
    pub iterations: usize,
}

/// Finds the lowest eigenstate of `H1 = H0 + V`; errors if its energy is not
/// negative (no bound state).
pub fn ground_state(v: &PotentialSpec, dtau: f64, max_iter: usize, tol: f64) -> Result<BoundState> {
    let grid = *v.grid();
    let transform = crate::lattice::Transform::new(grid);
    let half_kinetic: Vec<f64> = grid.nodes().map(|k| (-0.25 * dtau * k * k).exp()).collect();
    let potential: Vec<f64> = v.samples().iter().map(|s| (-dtau * s).exp()).collect();
    let start = WaveFunction::from_position_fn(grid, |x| Complex64::new((-0.5 * x * x).exp(), 0.0));
    let mut psi = transform.to_momentum(&start)?.normalized();
    let energy_of = |psi: &WaveFunction| -> Result<f64> {
        let kinetic: f64 = grid
            .nodes()
            .zip(psi.amplitudes())
            .map(|(k, a)| 0.5 * k * k * a.norm_sqr())
            .sum::<f64>()
            * grid.spacing();
        let x = transform.to_position(psi)?;
        let pot: f64 = x
            .amplitudes()
            .iter()
            .zip(v.samples())
            .map(|(a, s)| s * a.norm_sqr())
            .sum::<f64>()
            * grid.position_spacing();
        Ok(kinetic + pot)
    };
    let mut energy = energy_of(&psi)?;
    for it in 1..=max_iter {
        let mut buf = psi.into_amplitudes();
        for (b, f) in buf.iter_mut().zip(&half_kinetic) {
            *b *= f;
        }
        transform.momentum_to_position_in_place(&mut buf);
        for (b, f) in buf.iter_mut().zip(&potential) {
            *b *= f;
        }
        transform.position_to_momentum_in_place(&mut buf);
        for (b, f) in buf.iter_mut().zip(&half_kinetic) {
            *b *= f;
        }
        psi = WaveFunction::from_amplitudes(grid, Representation::Momentum, buf).normalized();
        let e = energy_of(&psi)?;
        let done = (e - energy).abs() < tol;
        energy = e;
        if done {
            if energy >= 0.0 {
                return Err(Error::NotFound(format!(
                    "lowest energy {energy} is not negative: no bound state"
                )));
            }
            return Ok(BoundState {
                state: psi,
                energy,
                iterations: it,
            });
        }
    }
    Err(Error::NotFound(format!(
        "imaginary-time iteration did not settle in {max_iter} steps"
    )))
}

/// Largest overlap tolerated between a scattering state and a bound state.
pub const BOUND_OVERLAP_LIMIT: f64 = 1e-3;

/// For a potential with a bound state `chi`: `U eta` is orthogonal to `chi`,
/// `U* U eta = eta`, and `U* chi` has no limit (`U U*` is not the identity).
pub fn completeness_check(
    eta: &WaveFunction,
    v: &PotentialSpec,
    bound: &BoundState,
    direction: Direction,
    opts: &WaveOperatorOptions,
) -> Result<Report> {
    let psi = wave_operator(eta, v, direction, opts)?.into_converged()?;
    let overlap = bound.state.inner(&psi)?.norm_sqr() / psi.norm_sqr();
    let back = adjoint_wave_operator(&psi, v, direction, opts)?.into_converged()?;
    let roundtrip = back.distance(eta)? / eta.norm();
    let on_bound = adjoint_wave_operator(&bound.state, v, direction, opts)?;
    let mut r = scattering_report(
        "completeness",
        "U* U = 1 while U U* projects onto the scattering states, away from the bound state",
        eta,
        v,
        direction,
        opts,
    );
    r.quantity("bound_energy", bound.energy)
        .quantity("adjoint_on_bound_increments", &on_bound.increments)
        .tolerance("overlap", BOUND_OVERLAP_LIMIT);
    r.check_below("bound_overlap", overlap, BOUND_OVERLAP_LIMIT);
    r.check_below("adjoint_roundtrip", roundtrip, 2.0 * opts.tol);
    r.check(
        "adjoint_on_bound_diverges",
        on_bound.last_increment(),
        "no Cauchy limit",
        !on_bound.converged,
    );
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::MomentumGrid;
    use crate::states::make_bump;

    fn setup(height: f64) -> (WaveFunction, PotentialSpec) {
        let grid = MomentumGrid::new(16.0, 8192).unwrap();
        (
            make_bump(1.0, 2.0, &grid).unwrap(),
            PotentialSpec::gaussian(grid, height).unwrap(),
        )
    }

    fn quick() -> WaveOperatorOptions {
        WaveOperatorOptions {
            t0: 2.0,
            levels: 4,
            tol: 1e-3,
            dt: 0.02,
        }
    }

    #[test]
    fn zero_potential_is_identity() {
        let (psi, _) = setup(0.1);
        let v = PotentialSpec::zero(*psi.grid());
        let u = wave_operator(&psi, &v, Direction::Plus, &quick()).unwrap();
        assert!(u.converged);
        assert!(u.state.distance(&psi).unwrap() < 1e-10);
        let t1 = conjugated_t(&psi, &v, Direction::Minus, &quick()).unwrap();
        assert!(t1.distance(&apply_t0(&psi).unwrap()).unwrap() < 1e-8);
    }

    #[test]
    fn barrier_wave_operator_converges_and_is_unitary() {
        let (psi, v) = setup(0.1);
        assert!(v.putnam_class());
        let opts = WaveOperatorOptions::default();
        let u = wave_operator(&psi, &v, Direction::Plus, &opts).unwrap();
        assert!(u.converged, "{:?}", u.increments);
        assert!(
            u.increments.windows(2).all(|w| w[1] < w[0]),
            "{:?}",
            u.increments
        );
        assert!((u.state.norm() - psi.norm()).abs() < 1e-6);
        assert!(u.stepping_error < opts.tol / 4.0, "{}", u.stepping_error);
        let back = adjoint_wave_operator(&u.state, &v, Direction::Plus, &opts).unwrap();
        assert!(back.state.distance(&psi).unwrap() < 2e-3);
    }

    #[test]
    fn box_precondition() {
        let grid = MomentumGrid::new(16.0, 512).unwrap();
        let psi = make_bump(1.0, 2.0, &grid).unwrap();
        let v = PotentialSpec::gaussian(grid, 0.1).unwrap();
        assert!(matches!(
            wave_operator(&psi, &v, Direction::Plus, &quick()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn well_has_a_bound_state() {
        let (_, v) = setup(-1.0);
        assert!(!v.putnam_class() && v.kuroda_class());
        let b = ground_state(&v, 0.05, 20000, 1e-12).unwrap();
        assert!(b.energy < 0.0);
        let (_, barrier) = setup(0.1);
        assert!(ground_state(&barrier, 0.05, 20000, 1e-12).is_err());
    }
}
