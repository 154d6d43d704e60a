//! Special functions: gamma family, modified Bessel functions, Meijer G.

mod bessel;
mod gamma;
mod meijer;

pub use bessel::{bessel_i, bessel_i_scaled, bessel_k, laguerre_half};
pub use gamma::{ln_gamma, reg_lower_gamma, reg_upper_gamma};
pub use meijer::{meijer_g, meijer_g_scaled, MeijerGSpec, MeijerGValue};
