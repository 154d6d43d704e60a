//! Performance analysis of a single-antenna link assisted by a reconfigurable
//! intelligent surface (RIS) whose two hops undergo independent Rician fading.
//!
//! The crate is organised bottom-up:
//!
//! - [`special`]: Bessel functions, gamma-family functions and a numerical
//!   Meijer G evaluator based on Mellin-Barnes contour integration.
//! - [`quadrature`]: adaptive Gauss-Kronrod integration used by every
//!   integral oracle.
//! - [`channel`]: cascaded Rician moments, the moment-matched Gamma law of the
//!   summed amplitude and the resulting end-to-end SNR distribution.
//! - [`performance`]: symbol error probability and ergodic capacity, each as a
//!   Meijer G closed form and as a direct quadrature of its defining integral,
//!   plus the water-filling cutoff solver.
//! - [`monte_carlo`]: a seeded, worker-partitioned simulator of the co-phased
//!   link that serves as a sampling oracle.
//!
//! ```
//! use ris_perf::channel::{laguerre_params, CascadedLink, RicianParams, SnrModel};
//! use ris_perf::performance::{capacity_nocsi_closed, capacity_nocsi_quadrature};
//!
//! let hop = RicianParams::from_sigma2(1.0, 0.5)?;
//! let link = CascadedLink::new(hop, hop, 2)?;
//! let model = SnrModel::new(laguerre_params(&link)?, 10.0)?;
//! let closed = capacity_nocsi_closed(&model)?;
//! let quad = capacity_nocsi_quadrature(&model)?;
//! assert!((closed - quad).abs() < 1e-6 * quad);
//! # Ok::<(), ris_perf::Error>(())
//! ```

pub mod channel;
mod error;
pub mod monte_carlo;
pub mod performance;
pub mod quadrature;
pub mod special;

pub use error::{Error, Result};

/// Converts a decibel value to a linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a linear power ratio to decibels.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[cfg(test)]
mod tests {
    use super::*;

    proptest::proptest! {
        #[test]
        fn decibels_round_trip(db in -200.0f64..200.0) {
            let back = linear_to_db(db_to_linear(db));
            proptest::prop_assert!((back - db).abs() <= 1e-12 * db.abs().max(1.0));
        }
    }

    #[test]
    fn decibel_anchors() {
        assert_eq!(db_to_linear(0.0), 1.0);
        assert!((db_to_linear(10.0) - 10.0).abs() < 1e-14);
        assert!((linear_to_db(100.0) - 20.0).abs() < 1e-14);
    }
}
