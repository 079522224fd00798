//! Form-factor machinery for dynamical correlation functions of the critical
//! one-dimensional Bose gas at zero temperature.
//!
//! The crate is organized around the chain
//!
//! * [`thermo`] — dressed thermodynamic ground-state description (Fermi
//!   boundary, density, dressed energy/momentum/charge/phase);
//! * [`excitations`] — excitation-class descriptors and the shift-function,
//!   critical-exponent and phase formulas attached to a class;
//! * [`combinatorics`] — discrete summation identities with brute-force
//!   verification, and the Gaudin-Mehta integral;
//! * [`finitesize`] — finite-N logarithmic Bethe equations and finite-size
//!   scaling checks;
//! * [`asymptotics`] — saddle-point analysis and the table of leading
//!   oscillating harmonics of the two-point functions;
//! * [`edge`] — threshold (edge-singularity) exponents and coefficients for
//!   the density structure factor and the spectral function.
//!
//! Supporting layers: [`specfun`] (log-gamma, Barnes G), [`quad`]
//! (Gauss-Legendre + Nystrom solver), [`linalg`] (dense LU).

pub mod asymptotics;
pub mod combinatorics;
pub mod edge;
pub mod error;
pub mod excitations;
pub mod finitesize;
pub mod linalg;
pub mod quad;
pub mod specfun;
pub mod thermo;

pub use error::{Error, Result};
