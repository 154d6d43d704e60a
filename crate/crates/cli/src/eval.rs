//! Per-point evaluation shared by the subcommands.

use ris_perf::channel::{laguerre_params, CascadedLink, SnrModel};
use ris_perf::performance::{
    asep_closed_form, asep_quadrature, capacity_csi_closed_form, capacity_csi_quadrature,
    capacity_nocsi_closed_form, capacity_nocsi_quadrature, waterfill_cutoff, ClosedForm, CsiArgument,
    Modulation,
};
use ris_perf::{db_to_linear, Result};

/// Closed forms are considered to track quadrature within this relative error.
pub const TRACK_TOL: f64 = 1e-5;

/// ASEP values below this are too small for a relative comparison.
pub const ASEP_FLOOR: f64 = 1e-12;

/// Residual target for the water-filling cutoff.
pub const CUTOFF_TOL: f64 = 1e-11;

/// Every metric at one (link, SNR) point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub gamma_bar: f64,
    pub asep_closed: f64,
    pub asep_quad: f64,
    pub cap_nocsi_closed: f64,
    pub cap_nocsi_quad: f64,
    pub gamma0: f64,
    pub residual: f64,
    pub cap_csi_literal: f64,
    pub cap_csi_corrected: f64,
    pub cap_csi_quad: f64,
}

impl Metrics {
    pub fn cap_csi_closed(&self, argument: CsiArgument) -> f64 {
        match argument {
            CsiArgument::Literal => self.cap_csi_literal,
            CsiArgument::Corrected => self.cap_csi_corrected,
        }
    }
}

pub fn model(link: &CascadedLink, snr_db: f64) -> Result<SnrModel> {
    SnrModel::new(laguerre_params(link)?, db_to_linear(snr_db))
}

/// Evaluates a closed form after shifting its first lower parameter by
/// `perturb` (zero in normal use).
fn closed(mut form: ClosedForm, perturb: f64) -> Result<f64> {
    if perturb != 0.0 {
        form.spec.b[0] += perturb;
    }
    form.evaluate()
}

pub fn evaluate(link: &CascadedLink, snr_db: f64, modulation: &Modulation, perturb: f64) -> Result<Metrics> {
    let m = model(link, snr_db)?;
    let wf = waterfill_cutoff(&m, CUTOFF_TOL)?;
    Ok(Metrics {
        gamma_bar: m.gamma_bar(),
        asep_closed: closed(asep_closed_form(modulation, &m)?, perturb)?,
        asep_quad: asep_quadrature(modulation, &m)?,
        cap_nocsi_closed: closed(capacity_nocsi_closed_form(&m)?, perturb)?,
        cap_nocsi_quad: capacity_nocsi_quadrature(&m)?,
        gamma0: wf.gamma0,
        residual: wf.residual,
        cap_csi_literal: closed(capacity_csi_closed_form(&m, wf.gamma0, CsiArgument::Literal)?, perturb)?,
        cap_csi_corrected: closed(capacity_csi_closed_form(&m, wf.gamma0, CsiArgument::Corrected)?, perturb)?,
        cap_csi_quad: capacity_csi_quadrature(&m, wf.gamma0)?,
    })
}

pub fn rel_error(value: f64, truth: f64) -> f64 {
    if truth == 0.0 {
        value.abs()
    } else {
        ((value - truth) / truth).abs()
    }
}

pub fn tracks(value: f64, truth: f64) -> bool {
    rel_error(value, truth) < TRACK_TOL
}

/// Twelve significant digits in scientific notation.
pub fn num(v: f64) -> String {
    format!("{v:.11e}")
}

/// Shortest decimal form of a grid coordinate.
pub fn coord(v: f64) -> String {
    format!("{v}")
}

/// Clamps rounding-level excursions into `[lo, hi]` and rejects anything
/// further out or non-finite.
pub fn in_range(what: &str, v: f64, lo: f64, hi: f64) -> std::result::Result<f64, String> {
    let slack = 1e-9 * hi.abs().max(1.0);
    if v.is_finite() && v >= lo - slack && v <= hi + slack {
        Ok(v.clamp(lo, hi))
    } else {
        Err(format!("{what} = {v:e} outside [{lo}, {hi}]"))
    }
}
