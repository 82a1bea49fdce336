//! Numerical library for the Estermann function, twisted moments of central
//! Dirichlet L-values, and continued-fraction moment statistics.
//!
//! The crate is organized bottom-up:
//!
//! * [`numerics`]: complex Gamma, Riemann/Hurwitz zeta, periodic zeta.
//! * [`rationals`]: reduced fractions, continued fractions, Dedekind sums,
//!   the cotangent sum `c_0`.
//! * [`estermann`]: the Estermann function `D_{α,β}(s, a/q)` pointwise and
//!   in batch over all residues mod a prime, completed functional equations.
//! * [`characters`]: Dirichlet characters mod a prime, batch central
//!   L-values, the twisted moment `M(a,q)`.
//! * [`expsums`]: Ramanujan and Kloosterman sums, shifted divisor sums and
//!   their truncated identities.
//! * [`mellin`]: Mellin transform kernels, the entire weight `G`, the
//!   smoothed-expansion weight `V`, sign-pattern contour identities, and
//!   Gamma-function identities.
//! * [`moments`]: brute-force moment sums and every closed-form main term,
//!   packaged as convergence studies.
//!
//! All floating-point work is in `f64`; identity tests carry explicit
//! tolerances and quadratures report internal error estimates.

pub mod characters;
pub mod estermann;
pub mod expsums;
pub mod mellin;
pub mod moments;
pub mod numerics;
pub mod rationals;

pub(crate) mod arith;
pub(crate) mod fft;

pub use num_complex::Complex64;
