//! Error probability and ergodic capacity of the approximated SNR law.
//!
//! Every metric comes in two forms: a Meijer G closed form and a direct
//! adaptive quadrature of its defining integral. The quadrature forms are the
//! reference; the closed forms are checked against them.
//!
//! All quadratures run in the amplitude domain `y = √(γ/γ̄)`, where the SNR law
//! is a plain Gamma density, which removes the `γ^{-1/2}` endpoint behaviour.

use std::f64::consts::{LN_2, PI};

use crate::channel::SnrModel;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_to_infinity, Tolerance};
use crate::special::{meijer_g_scaled, reg_upper_gamma, MeijerGSpec};

/// Relative tolerance requested from the Meijer G evaluator.
pub const CLOSED_FORM_TOL: f64 = 1e-10;

const QUAD_TOL: Tolerance = Tolerance {
    abs: 1e-13,
    rel: 1e-11,
    max_intervals: 4000,
};

/// Conditional symbol-error kernel `p Q(√(2qγ))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Modulation {
    p: f64,
    q: f64,
}

impl Modulation {
    pub const BPSK: Self = Self { p: 1.0, q: 1.0 };
    pub const QPSK: Self = Self { p: 2.0, q: 0.5 };

    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p.is_finite() && p > 0.0 && p <= 2.0) {
            return Err(Error::InvalidParameter(format!("p = {p} must lie in (0, 2]")));
        }
        if !(q.is_finite() && q > 0.0) {
            return Err(Error::InvalidParameter(format!("q = {q} must be positive")));
        }
        Ok(Self { p, q })
    }

    /// M-ary PAM: `p = 2(M-1)/M`, `q = 3/(M²-1)`.
    pub fn pam(order: u32) -> Result<Self> {
        if order < 2 {
            return Err(Error::InvalidParameter(format!("PAM order {order} must be >= 2")));
        }
        let m = order as f64;
        Self::new(2.0 * (m - 1.0) / m, 3.0 / (m * m - 1.0))
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// `p Q(√(2qγ)) = (p/2) erfc(√(qγ))`.
    pub fn conditional_error(&self, gamma: f64) -> f64 {
        0.5 * self.p * libm::erfc((self.q * gamma).sqrt())
    }
}

/// A closed form `e^{ln_prefactor} G^{m,n}_{p,q}(z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedForm {
    pub spec: MeijerGSpec,
    pub ln_prefactor: f64,
}

impl ClosedForm {
    pub fn evaluate(&self) -> Result<f64> {
        Ok(meijer_g_scaled(&self.spec, self.ln_prefactor, CLOSED_FORM_TOL)?.value)
    }
}

fn ln_gamma_shape(model: &SnrModel) -> f64 {
    model.approx().ln_gamma_shape()
}

/// ASEP closed form:
///
/// ```text
/// 2^{a-1} p / (π Γ(a+1)) G^{2,3}_{3,4}(1/(4qγ̄b²) | 1/2, 1/2, 1; (a+1)/2, (a+2)/2, 0, 1/2)
/// ```
pub fn asep_closed_form(modulation: &Modulation, model: &SnrModel) -> Result<ClosedForm> {
    let (a, b) = (model.approx().a(), model.approx().b());
    let spec = MeijerGSpec::new(
        2,
        3,
        vec![0.5, 0.5, 1.0],
        vec![0.5 * (a + 1.0), 0.5 * (a + 2.0), 0.0, 0.5],
        1.0 / (4.0 * modulation.q * model.gamma_bar() * b * b),
    )?;
    Ok(ClosedForm {
        spec,
        ln_prefactor: (a - 1.0) * LN_2 + modulation.p.ln() - PI.ln() - ln_gamma_shape(model),
    })
}

fn check_probability(what: &'static str, v: f64, upper: f64) -> Result<f64> {
    if !(-1e-9..=upper + 1e-9).contains(&v) {
        return Err(Error::Inconsistent { what, value: v });
    }
    Ok(v.clamp(0.0, upper))
}

fn check_capacity(what: &'static str, v: f64) -> Result<f64> {
    if !(v >= -1e-9) || !v.is_finite() {
        return Err(Error::Inconsistent { what, value: v });
    }
    Ok(v.max(0.0))
}

pub fn asep_closed(modulation: &Modulation, model: &SnrModel) -> Result<f64> {
    let v = asep_closed_form(modulation, model)?.evaluate()?;
    check_probability("ASEP closed form", v, 1.0)
}

/// Quadrature breakpoints in the amplitude domain covering the bulk of the
/// Gamma law, starting at `from`.
fn amplitude_points(model: &SnrModel, from: f64) -> (Vec<f64>, f64) {
    let (mean, sd) = model.approx().amplitude_mean_std();
    let mut pts = vec![from];
    for k in [-6.0, -3.0, -1.5, 0.0, 1.5, 3.0, 6.0, 12.0] {
        let y = mean + k * sd;
        if y > from {
            pts.push(y);
        }
    }
    // the lower tail matters when the shape is small
    if pts.len() > 1 && pts[1] > from + 0.5 * mean {
        pts.insert(1, from + 0.25 * (pts[1] - from));
    }
    (pts, sd)
}

/// ASEP from the SNR distribution function,
/// `(p√q / 2√π) ∫ e^{-qγ} γ^{-1/2} F(γ) dγ`.
pub fn asep_quadrature(modulation: &Modulation, model: &SnrModel) -> Result<f64> {
    let approx = model.approx();
    let gb = model.gamma_bar();
    // γ = t², t = √γ̄ y
    let scale = gb.sqrt();
    let (pts, sd) = amplitude_points(model, 0.0);
    let mut t_pts: Vec<f64> = pts.iter().map(|y| y * scale).collect();
    // the Gaussian factor e^{-qt²} and the location of the peak of the
    // integrand for small error rates
    let t_q = 1.0 / modulation.q.sqrt();
    let t_peak = (approx.shape() / (2.0 * modulation.q)).sqrt();
    t_pts.extend([0.5 * t_q, t_q, 3.0 * t_q, t_peak, 2.0 * t_peak]);
    t_pts.sort_by(f64::total_cmp);
    t_pts.dedup();
    let tail = t_q.min(sd * scale);
    let v = asep_quadrature_with_cdf(modulation, |g| model.cdf(g).unwrap_or(f64::NAN), &t_pts, tail)?;
    check_probability("ASEP quadrature", v, 0.5 * modulation.p)
}

/// ASEP integral for an arbitrary distribution function, integrated in
/// `t = √γ` over the given breakpoints.
pub fn asep_quadrature_with_cdf<F: Fn(f64) -> f64>(
    modulation: &Modulation,
    cdf: F,
    t_points: &[f64],
    tail_scale: f64,
) -> Result<f64> {
    let q = modulation.q;
    let f = |t: f64| {
        let e = (-q * t * t).exp();
        if e == 0.0 {
            0.0
        } else {
            e * cdf(t * t)
        }
    };
    let r = integrate_to_infinity(f, t_points, tail_scale, QUAD_TOL)?;
    Ok(modulation.p * q.sqrt() / PI.sqrt() * r.value)
}

/// Capacity without CSI, closed form:
///
/// ```text
/// 2^a / (ln2 √π Γ(a+1)) G^{1,4}_{4,2}(4γ̄b² | -a/2, (1-a)/2, 1, 1; 1, 0)
/// ```
pub fn capacity_nocsi_closed_form(model: &SnrModel) -> Result<ClosedForm> {
    let (a, b) = (model.approx().a(), model.approx().b());
    let spec = MeijerGSpec::new(
        1,
        4,
        vec![-0.5 * a, 0.5 * (1.0 - a), 1.0, 1.0],
        vec![1.0, 0.0],
        4.0 * model.gamma_bar() * b * b,
    )?;
    Ok(ClosedForm {
        spec,
        ln_prefactor: capacity_ln_prefactor(model),
    })
}

fn capacity_ln_prefactor(model: &SnrModel) -> f64 {
    model.approx().a() * LN_2 - LN_2.ln() - 0.5 * PI.ln() - ln_gamma_shape(model)
}

pub fn capacity_nocsi_closed(model: &SnrModel) -> Result<f64> {
    let v = capacity_nocsi_closed_form(model)?.evaluate()?;
    check_capacity("capacity (no CSI) closed form", v)
}

/// Ergodic capacity `E[log2(1 + γ)]` by quadrature.
pub fn capacity_nocsi_quadrature(model: &SnrModel) -> Result<f64> {
    let approx = model.approx();
    let gb = model.gamma_bar();
    let (pts, sd) = amplitude_points(model, 0.0);
    let f = |y: f64| {
        if y == 0.0 {
            return 0.0;
        }
        (gb * y * y).ln_1p() * approx.ln_amplitude_pdf(y).exp()
    };
    let r = integrate_to_infinity(f, &pts, sd, QUAD_TOL)?;
    check_capacity("capacity (no CSI) quadrature", r.value / LN_2)
}

/// Which argument the water-filling closed form uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsiArgument {
    /// `4b²/γ₀`, without the average SNR.
    Literal,
    /// `4γ̄b²/γ₀`, which follows from the substitution `γ = γ̄ξ²`.
    Corrected,
}

/// Capacity with CSI under water filling, closed form:
///
/// ```text
/// 2^a / (ln2 √π Γ(a+1)) G^{0,4}_{4,2}(z | -a/2, (1-a)/2, 1, 1; 0, 0)
/// ```
///
/// with `z` chosen by `argument`.
pub fn capacity_csi_closed_form(
    model: &SnrModel,
    gamma0: f64,
    argument: CsiArgument,
) -> Result<ClosedForm> {
    check_cutoff(gamma0)?;
    let (a, b) = (model.approx().a(), model.approx().b());
    let z = match argument {
        CsiArgument::Literal => 4.0 * b * b / gamma0,
        CsiArgument::Corrected => 4.0 * model.gamma_bar() * b * b / gamma0,
    };
    let spec = MeijerGSpec::new(
        0,
        4,
        vec![-0.5 * a, 0.5 * (1.0 - a), 1.0, 1.0],
        vec![0.0, 0.0],
        z,
    )?;
    Ok(ClosedForm {
        spec,
        ln_prefactor: capacity_ln_prefactor(model),
    })
}

/// Water-filling capacity closed form with the argument `4b²/γ₀`.
pub fn capacity_csi_closed(model: &SnrModel, gamma0: f64) -> Result<f64> {
    capacity_csi_closed_with(model, gamma0, CsiArgument::Literal)
}

/// Water-filling capacity closed form with the argument `4γ̄b²/γ₀`.
pub fn capacity_csi_closed_corrected(model: &SnrModel, gamma0: f64) -> Result<f64> {
    capacity_csi_closed_with(model, gamma0, CsiArgument::Corrected)
}

pub fn capacity_csi_closed_with(model: &SnrModel, gamma0: f64, argument: CsiArgument) -> Result<f64> {
    let v = capacity_csi_closed_form(model, gamma0, argument)?.evaluate()?;
    check_capacity("capacity (CSI) closed form", v)
}

fn check_cutoff(gamma0: f64) -> Result<()> {
    if gamma0.is_finite() && gamma0 > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("cutoff {gamma0} must be positive")))
    }
}

/// Water-filling capacity `E[log2(γ/γ₀) 1{γ > γ₀}]` by quadrature.
pub fn capacity_csi_quadrature(model: &SnrModel, gamma0: f64) -> Result<f64> {
    check_cutoff(gamma0)?;
    let approx = model.approx();
    let y0 = model.amplitude_of(gamma0);
    let (pts, sd) = amplitude_points(model, y0);
    // log2(γ/γ₀) = 2 log2(y/y0)
    let f = |y: f64| {
        if y <= y0 {
            return 0.0;
        }
        2.0 * (y / y0).ln() * approx.ln_amplitude_pdf(y).exp()
    };
    let r = integrate_to_infinity(f, &pts, sd, QUAD_TOL)?;
    check_capacity("capacity (CSI) quadrature", r.value / LN_2)
}

/// Water-filling transmit power relative to the average, `1/γ₀ - 1/γ` above
/// the cutoff and zero below.
pub fn power_policy(gamma0: f64, gamma: f64) -> f64 {
    if gamma > gamma0 {
        1.0 / gamma0 - 1.0 / gamma
    } else {
        0.0
    }
}

/// Result of the cutoff search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaterFillSolution {
    pub gamma0: f64,
    pub residual: f64,
    pub iterations: u32,
}

/// Average-power constraint residual `∫_{γ₀}^∞ (1/γ₀ - 1/γ) f(γ) dγ - 1`.
///
/// Strictly decreasing in `γ₀`.
pub fn waterfill_residual(model: &SnrModel, gamma0: f64) -> Result<f64> {
    check_cutoff(gamma0)?;
    let approx = model.approx();
    let gb = model.gamma_bar();
    let y0 = model.amplitude_of(gamma0);
    // the 1/γ₀ part is exact; only the 1/γ part needs quadrature
    let survival = reg_upper_gamma(approx.shape(), y0 / approx.b())?;
    let (pts, sd) = amplitude_points(model, y0);
    let f = |y: f64| {
        if y <= y0 {
            return 0.0;
        }
        approx.ln_amplitude_pdf(y).exp() / (gb * y * y)
    };
    let inverse = integrate_to_infinity(f, &pts, sd, QUAD_TOL)?;
    Ok(survival / gamma0 - inverse.value - 1.0)
}

pub const CUTOFF_LOWER: f64 = 1e-12;

/// Solves the average-power constraint for the cutoff `γ₀ ∈ (0, 1]`.
///
/// Bisection in `ln γ₀` over `[1e-12, 1]`, then secant steps inside the
/// bracket until `|residual| ≤ tol`.
pub fn waterfill_cutoff(model: &SnrModel, tol: f64) -> Result<WaterFillSolution> {
    if !(1e-12..=1e-6).contains(&tol) {
        return Err(Error::InvalidParameter(format!("tol = {tol} outside [1e-12, 1e-6]")));
    }
    let residual = |g: f64| waterfill_residual(model, g);
    let (mut lo, mut hi) = (CUTOFF_LOWER, 1.0);
    let (mut r_lo, mut r_hi) = (residual(lo)?, residual(hi)?);
    if !(r_lo > 0.0 && r_hi < 0.0) {
        return Err(Error::Solver(format!(
            "no sign change: residual({lo:e}) = {r_lo:e}, residual({hi}) = {r_hi:e}"
        )));
    }
    let mut iterations = 0u32;
    // coarse bisection in log space
    while hi / lo > 1.0 + 1e-3 {
        iterations += 1;
        let mid = (lo * hi).sqrt();
        let r = residual(mid)?;
        if r.abs() <= tol {
            return Ok(WaterFillSolution {
                gamma0: mid,
                residual: r,
                iterations,
            });
        }
        if r > 0.0 {
            (lo, r_lo) = (mid, r);
        } else {
            (hi, r_hi) = (mid, r);
        }
    }
    // regula falsi with the Illinois modification
    let mut side = 0i8;
    for _ in 0..200 {
        iterations += 1;
        let x = (lo * r_hi - hi * r_lo) / (r_hi - r_lo);
        let x = if x > lo && x < hi { x } else { 0.5 * (lo + hi) };
        let r = residual(x)?;
        if r.abs() <= tol || hi - lo <= 4.0 * f64::EPSILON * hi {
            if r.abs() > tol {
                break;
            }
            return Ok(WaterFillSolution {
                gamma0: x,
                residual: r,
                iterations,
            });
        }
        if r > 0.0 {
            (lo, r_lo) = (x, r);
            if side == 1 {
                r_hi *= 0.5;
            }
            side = 1;
        } else {
            (hi, r_hi) = (x, r);
            if side == -1 {
                r_lo *= 0.5;
            }
            side = -1;
        }
    }
    Err(Error::Solver(format!(
        "residual did not reach {tol:e}; bracket [{lo:e}, {hi:e}] with residuals {r_lo:e}, {r_hi:e}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{laguerre_params, CascadedLink, RicianParams};
    use crate::db_to_linear;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn model(n: u32, k: f64, db: f64) -> SnrModel {
        let hop = RicianParams::from_sigma2(k, 0.5).unwrap();
        let approx = laguerre_params(&CascadedLink::new(hop, hop, n).unwrap()).unwrap();
        SnrModel::new(approx, db_to_linear(db)).unwrap()
    }

    #[test]
    fn modulation_presets() {
        let pam2 = Modulation::pam(2).unwrap();
        assert_eq!((pam2.p(), pam2.q()), (1.0, 1.0));
        let pam4 = Modulation::pam(4).unwrap();
        assert!(rel(pam4.p(), 1.5) < 1e-15 && rel(pam4.q(), 0.2) < 1e-15);
        assert!(Modulation::new(0.0, 1.0).is_err());
        assert!(Modulation::new(2.5, 1.0).is_err());
        assert!(Modulation::new(1.0, -1.0).is_err());
        assert!(Modulation::pam(1).is_err());
        // p Q(√(2qγ)) at γ = 0 is p/2
        assert_eq!(Modulation::QPSK.conditional_error(0.0), 1.0);
    }

    #[test]
    fn frozen_fig2_point() {
        // N = 5, K = 1, σ² = 1/2, 10 dB, BPSK; 30-digit references
        let m = model(5, 1.0, 10.0);
        let asep = asep_quadrature(&Modulation::BPSK, &m).unwrap();
        assert!(rel(asep, 7.049_238_569_234_868_48e-11) < 1e-8);
        assert!(rel(asep_closed(&Modulation::BPSK, &m).unwrap(), asep) < 1e-8);
        let cap = capacity_nocsi_quadrature(&m).unwrap();
        assert!(rel(cap, 9.260_857_276_950_676_35) < 1e-10);
        assert!(rel(capacity_nocsi_closed(&m).unwrap(), cap) < 1e-8);
        let csi = capacity_csi_quadrature(&m, 0.5).unwrap();
        assert!(rel(csi, 10.257_934_095_550_553_6) < 1e-10);
        assert!(rel(capacity_csi_closed_corrected(&m, 0.5).unwrap(), csi) < 1e-8);
        assert!(rel(capacity_csi_closed(&m, 0.5).unwrap(), 6.936_006_005_192_105_27) < 1e-8);
    }

    #[test]
    fn asep_limits() {
        // deviation from p/2 scales like √γ̄ E(ξ)
        let tiny = model(1, 0.0, -90.0);
        assert!((asep_closed(&Modulation::BPSK, &tiny).unwrap() - 0.5).abs() < 1e-4);
        let one = asep_quadrature_with_cdf(&Modulation::BPSK, |_| 1.0, &[0.0, 1.0], 1.0).unwrap();
        assert!((one - 0.5).abs() < 1e-12);
        let qpsk = asep_quadrature_with_cdf(&Modulation::QPSK, |_| 1.0, &[0.0, 1.0], 1.0).unwrap();
        assert!((qpsk - 1.0).abs() < 1e-12);
    }

    #[test]
    fn asep_closed_matches_quadrature_and_decreases() {
        for &(n, k) in &[(1, 0.0), (2, 1.0), (5, 1.0), (5, 10.0)] {
            let mut prev = f64::INFINITY;
            for db in [0.0, 5.0, 10.0, 15.0, 20.0] {
                let m = model(n, k, db);
                let quad = asep_quadrature(&Modulation::BPSK, &m).unwrap();
                let closed = asep_closed(&Modulation::BPSK, &m).unwrap();
                if quad > 1e-12 {
                    assert!(rel(closed, quad) < 1e-6, "N={n} K={k} {db} dB: {closed} vs {quad}");
                }
                assert!(quad <= prev);
                prev = quad;
                let doubled = SnrModel::new(m.approx(), 2.0 * m.gamma_bar()).unwrap();
                assert!(asep_quadrature(&Modulation::BPSK, &doubled).unwrap() < quad);
            }
        }
    }

    #[test]
    fn capacity_nocsi_properties() {
        let m = model(2, 1.0, 10.0);
        let quad = capacity_nocsi_quadrature(&m).unwrap();
        assert!(rel(capacity_nocsi_closed(&m).unwrap(), quad) < 1e-6);
        assert!(quad <= (1.0 + m.mean_snr()).log2());
        let tiny = SnrModel::new(m.approx(), 1e-9).unwrap();
        assert!(capacity_nocsi_closed(&tiny).unwrap() <= 1e-6);
        let mut prev = -1.0;
        for db in 0..=20 {
            let c = capacity_nocsi_closed(&model(2, 1.0, db as f64)).unwrap();
            assert!(c > prev);
            prev = c;
        }
    }

    #[test]
    fn waterfill_solutions() {
        for db in [0.0, 10.0, 20.0] {
            let m = model(2, 1.0, db);
            let s = waterfill_cutoff(&m, 1e-10).unwrap();
            assert!(s.residual.abs() < 1e-10);
            assert!(s.gamma0 > 0.0 && s.gamma0 <= 1.0);
            assert!(waterfill_residual(&m, s.gamma0).unwrap().abs() < 1e-10);
        }
        let m = model(2, 1.0, 0.0);
        let huge = SnrModel::new(m.approx(), 1e6).unwrap();
        assert!(waterfill_cutoff(&huge, 1e-10).unwrap().gamma0 > 0.9);
        let mut prev = 0.0;
        for db in 0..=20 {
            let g0 = waterfill_cutoff(&model(2, 1.0, db as f64), 1e-10).unwrap().gamma0;
            assert!(g0 > prev);
            prev = g0;
        }
        assert!(waterfill_cutoff(&m, 1e-3).is_err());
    }

    #[test]
    fn capacity_csi_properties() {
        let m = model(2, 1.0, 10.0);
        let g0 = waterfill_cutoff(&m, 1e-10).unwrap().gamma0;
        let quad = capacity_csi_quadrature(&m, g0).unwrap();
        assert!(rel(capacity_csi_closed_corrected(&m, g0).unwrap(), quad) < 1e-6);
        assert!(quad >= capacity_nocsi_quadrature(&m).unwrap());
        assert!(capacity_csi_quadrature(&m, 0.5 * g0).unwrap() > quad);
        // a cutoff beyond the support leaves nothing
        let far = 1e4 * m.mean_snr();
        assert!(capacity_csi_quadrature(&m, far).unwrap() < 1e-12);
        assert!(capacity_csi_quadrature(&m, 0.0).is_err());
        // at 0 dB the literal and corrected arguments coincide
        let m0 = model(2, 1.0, 0.0);
        let g0 = waterfill_cutoff(&m0, 1e-10).unwrap().gamma0;
        assert!(rel(capacity_csi_closed(&m0, g0).unwrap(), capacity_csi_closed_corrected(&m0, g0).unwrap()) < 1e-12);
    }

    #[test]
    fn large_k_gap_vanishes() {
        let m = model(5, 10.0, 10.0);
        let g0 = waterfill_cutoff(&m, 1e-10).unwrap().gamma0;
        let gap = capacity_csi_quadrature(&m, g0).unwrap() - capacity_nocsi_quadrature(&m).unwrap();
        assert!((0.0..0.05).contains(&gap));
    }

    #[test]
    fn power_policy_values() {
        assert_eq!(power_policy(0.4, 0.4), 0.0);
        assert_eq!(power_policy(0.4, 0.1), 0.0);
        assert!(rel(power_policy(0.4, 0.8), 1.0 / 0.8) < 1e-15);
    }

    #[test]
    fn policy_meets_the_power_budget() {
        let m = model(5, 1.0, 5.0);
        let g0 = waterfill_cutoff(&m, 1e-11).unwrap().gamma0;
        let approx = m.approx();
        let (mean, sd) = approx.amplitude_mean_std();
        let y0 = m.amplitude_of(g0);
        let f = |y: f64| power_policy(g0, m.gamma_bar() * y * y) * approx.amplitude_pdf(y).unwrap();
        let pts: Vec<f64> = [y0, mean - 3.0 * sd, mean, mean + 3.0 * sd]
            .into_iter()
            .filter(|&y| y >= y0)
            .collect();
        let r = integrate_to_infinity(f, &pts, sd, Tolerance::relative(1e-12)).unwrap();
        assert!((r.value - 1.0).abs() < 1e-6);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]
        #[test]
        fn asep_is_bounded(k in 0.0f64..12.0, n in 1u32..6, db in -10.0f64..25.0) {
            let m = model(n, k, db);
            let v = asep_quadrature(&Modulation::BPSK, &m).unwrap();
            proptest::prop_assert!((0.0..=0.5).contains(&v));
        }

        #[test]
        fn capacities_are_ordered(k in 0.0f64..12.0, n in 1u32..6, db in -5.0f64..25.0) {
            let m = model(n, k, db);
            let g0 = waterfill_cutoff(&m, 1e-10).unwrap().gamma0;
            let nocsi = capacity_nocsi_quadrature(&m).unwrap();
            let csi = capacity_csi_quadrature(&m, g0).unwrap();
            proptest::prop_assert!(nocsi >= 0.0);
            proptest::prop_assert!(csi >= nocsi - 1e-9);
        }
    }
}
