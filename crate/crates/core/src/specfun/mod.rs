//! Special-function kernel: Bessel functions, gamma, the Gaussian tail, a
//! G^{2,1}_{1,2} Meijer-G evaluator and adaptive semi-infinite quadrature.
//!
//! Everything here is pure and reentrant.

// Tabulated constants are kept as published.
#![allow(clippy::excessive_precision)]

mod bessel;
mod gamma;
mod meijer;
mod normal;
mod quadrature;

pub use bessel::{
    bessel_i0, bessel_i0_scaled, bessel_j0, bessel_k1, one_minus_xk1_scaled, xk1_scaled, XK1_SERIES_SWITCH,
};
pub use gamma::{gamma_fn, ln_gamma_complex};
pub use meijer::{meijer_g2112, meijer_g2112_remainder};
pub use normal::q_function;
pub use quadrature::{integrate_finite, integrate_semi_infinite, QuadResult, QuadratureSpec, Transform};
