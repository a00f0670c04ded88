//! A numerical laboratory for the Aharonov-Bohm time operator on the line.
//!
//! States live on a half-step-offset momentum lattice ([`lattice`]). The
//! free Hamiltonian acts by multiplication with `k^2/2`, the time operator by
//! sixth-order finite differences ([`operators`]). Free dynamics is exact,
//! dynamics with a potential uses Strang splitting ([`evolution`]). The
//! [`spectral`] and [`scattering`] modules turn the inequalities and
//! identities of the theory into [`Report`]s with explicit verdicts.
//!
//! ```
//! use timeop::{lattice::MomentumGrid, states::make_phi_n, evolution::survival_series};
//!
//! let grid = MomentumGrid::new(16.0, 2048).unwrap();
//! let phi = make_phi_n(2, 1.0, &grid).unwrap();
//! let series = survival_series(&phi, &phi, &[0.0, 4.0]).unwrap();
//! assert!((series.probabilities[1] - 2f64.powf(-2.5)).abs() < 1e-9);
//! ```

pub mod error;
pub mod evolution;
pub mod lattice;
pub mod operators;
pub mod report;
pub mod scattering;
pub mod spectral;
pub mod states;
pub mod stencil;

pub use error::{Error, Result};
pub use lattice::{BoxSequence, MomentumGrid, Transform};
pub use operators::{FreeHamiltonian, Operator, PotentialSpec, TimeOperator};
pub use report::{Report, Verdict};
pub use states::{Representation, StateFamily, WaveFunction};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/lattice.md")]
    mod lattice {}
    #[doc = include_str!("../../../book/src/states.md")]
    mod states {}
    #[doc = include_str!("../../../book/src/time-operator.md")]
    mod time_operator {}
    #[doc = include_str!("../../../book/src/survival.md")]
    mod survival {}
    #[doc = include_str!("../../../book/src/spectral.md")]
    mod spectral {}
    #[doc = include_str!("../../../book/src/scattering.md")]
    mod scattering {}
}
