//! Cascaded Rician channel statistics and the Gamma approximation of the
//! co-phased sum amplitude.
//!
//! Each RIS element contributes `ξ_l = α_l β_l`, the product of two
//! independent Rician envelopes. With ideal co-phasing the end-to-end SNR is
//! `γ = γ̄ ξ²` with `ξ = Σ_l ξ_l`. The sum amplitude is approximated by the
//! first term of its Laguerre expansion, a Gamma law matched to the exact mean
//! and variance:
//!
//! ```text
//! f_ξ(y) = y^a e^{-y/b} / (b^{a+1} Γ(a+1)),   a = E(ξ)²/Var(ξ) - 1,   b = Var(ξ)/E(ξ)
//! ```

use crate::error::{domain, require_finite, Error, Result};
use crate::special::{bessel_i_scaled, bessel_k, laguerre_half, ln_gamma, reg_lower_gamma};

/// Above this K-factor the envelope moments switch to their large-K
/// expansions instead of Bessel evaluations.
pub const K_CAP: f64 = 1e8;

/// Rician fading envelope with shape factor `K` and mean-square power `Ω`.
///
/// `K = +∞` is accepted and denotes a deterministic envelope `√Ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RicianParams {
    k: f64,
    omega: f64,
}

impl RicianParams {
    pub fn new(k: f64, omega: f64) -> Result<Self> {
        if k.is_nan() || k < 0.0 {
            return Err(Error::InvalidParameter(format!("K = {k} must be >= 0")));
        }
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidParameter(format!("Omega = {omega} must be positive")));
        }
        Ok(Self { k, omega })
    }

    /// Builds the hop from `K` and the per-dimension scatter variance `σ²`,
    /// i.e. `Ω = 2σ²(K + 1)`.
    pub fn from_sigma2(k: f64, sigma2: f64) -> Result<Self> {
        if !(sigma2.is_finite() && sigma2 > 0.0) {
            return Err(Error::InvalidParameter(format!("sigma2 = {sigma2} must be positive")));
        }
        if k.is_infinite() {
            return Err(Error::InvalidParameter(
                "K = inf has unbounded power at fixed sigma2".into(),
            ));
        }
        Self::new(k, 2.0 * sigma2 * (k + 1.0))
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Line-of-sight amplitude `v = √(KΩ/(K+1))`.
    pub fn los_amplitude(&self) -> f64 {
        if self.k.is_infinite() {
            self.omega.sqrt()
        } else {
            (self.k * self.omega / (self.k + 1.0)).sqrt()
        }
    }

    /// Per-dimension scatter standard deviation `σ = √(Ω/(2(K+1)))`.
    pub fn scatter_std(&self) -> f64 {
        if self.k.is_infinite() {
            0.0
        } else {
            (self.omega / (2.0 * (self.k + 1.0))).sqrt()
        }
    }

    /// `E(α)/√Ω`.
    fn mean_ratio(&self) -> f64 {
        let k = self.k;
        if k > K_CAP {
            return (1.0 - self.excess_ratio()).sqrt();
        }
        // e^{-K/2} [(K+1) I0(K/2) + K I1(K/2)] with scaled Bessel functions
        let bracket = (k + 1.0) * bessel_i_scaled(0, 0.5 * k).expect("finite argument")
            + k * bessel_i_scaled(1, 0.5 * k).expect("finite argument");
        0.5 * (std::f64::consts::PI / (k + 1.0)).sqrt() * bracket
    }

    /// `Var(α)/Ω = 1 - E(α)²/Ω`, asymptotically `1/(2(K+1))`.
    fn excess_ratio(&self) -> f64 {
        let k = self.k;
        if k.is_infinite() {
            0.0
        } else if k > 1e6 {
            let x = 1.0 / (k + 1.0);
            // 1 - (π/4)(K+1)^{-1} L½(-K)² expanded in 1/(K+1); the direct
            // difference would lose digits to cancellation here
            x * (0.5 - x * (0.125 + 0.1875 * x))
        } else {
            let r = self.mean_ratio();
            1.0 - r * r
        }
    }

    /// Envelope mean `E(α) = ½ √(Ωπ/(K+1)) L½(-K)`.
    pub fn mean_amplitude(&self) -> f64 {
        self.omega.sqrt() * self.mean_ratio()
    }

    /// Envelope mean evaluated through the Laguerre function directly.
    pub fn mean_amplitude_laguerre(&self) -> Result<f64> {
        if self.k > K_CAP {
            return Ok(self.mean_amplitude());
        }
        Ok(0.5 * (self.omega * std::f64::consts::PI / (self.k + 1.0)).sqrt() * laguerre_half(-self.k)?)
    }

    /// Envelope variance `Ω - E(α)²`.
    pub fn var_amplitude(&self) -> f64 {
        self.omega * self.excess_ratio()
    }
}

/// Two Rician hops through an RIS with `N` identical elements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadedLink {
    pub hop1: RicianParams,
    pub hop2: RicianParams,
    n_elements: u32,
}

impl CascadedLink {
    pub fn new(hop1: RicianParams, hop2: RicianParams, n_elements: u32) -> Result<Self> {
        if n_elements == 0 {
            return Err(Error::InvalidParameter("N must be at least 1".into()));
        }
        Ok(Self {
            hop1,
            hop2,
            n_elements,
        })
    }

    pub fn n_elements(&self) -> u32 {
        self.n_elements
    }
}

/// How a hop's scale follows its K-factor in parameter sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parameterization {
    /// `Ω` is held fixed.
    FixOmega,
    /// `σ²` is held fixed and `Ω = 2σ²(K+1)`.
    FixSigma2,
}

impl Parameterization {
    /// Builds a hop from `K` and either `Ω` or `σ²`, depending on `self`.
    pub fn hop(self, k: f64, scale: f64) -> Result<RicianParams> {
        match self {
            Self::FixOmega => RicianParams::new(k, scale),
            Self::FixSigma2 => RicianParams::from_sigma2(k, scale),
        }
    }
}

/// Mean of one cascaded element `E(α β)`:
///
/// ```text
/// (π/4) e^{-(K1+K2)/2} √(Ω1Ω2/((K1+1)(K2+1))) Π_i [(K_i+1) I0(K_i/2) + K_i I1(K_i/2)]
/// ```
pub fn mean_cascaded_element(hop1: &RicianParams, hop2: &RicianParams) -> f64 {
    (hop1.omega * hop2.omega).sqrt() * (hop1.mean_ratio() * hop2.mean_ratio())
}

/// Variance of one cascaded element, `Ω1Ω2 - E(αβ)²`.
///
/// Evaluated as `Ω1Ω2 (δ1 + δ2 - δ1δ2)` with `δ_i = Var(α_i)/Ω_i`, which avoids
/// the cancellation of the direct difference at large K.
pub fn var_cascaded_element(hop1: &RicianParams, hop2: &RicianParams) -> Result<f64> {
    let (d1, d2) = (hop1.excess_ratio(), hop2.excess_ratio());
    let v = hop1.omega * hop2.omega * (d1 + d2 - d1 * d2);
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Inconsistent {
            what: "cascaded element variance",
            value: v,
        })
    }
}

/// Laguerre first-term Gamma approximation of `ξ = Σ ξ_l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaApprox {
    a: f64,
    b: f64,
}

impl GammaApprox {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && a > -1.0) {
            return Err(Error::InvalidParameter(format!("a = {a} must exceed -1")));
        }
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::InvalidParameter(format!("b = {b} must be positive")));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Gamma shape `a + 1`.
    pub fn shape(&self) -> f64 {
        self.a + 1.0
    }

    /// `ln Γ(a+1)`.
    pub fn ln_gamma_shape(&self) -> f64 {
        ln_gamma(self.shape()).expect("shape is positive")
    }

    /// Density of the sum amplitude `f_ξ(y)`.
    pub fn amplitude_pdf(&self, y: f64) -> Result<f64> {
        require_finite("amplitude_pdf", "y", y)?;
        if y < 0.0 {
            return Err(domain("amplitude_pdf", format!("y = {y} must be >= 0")));
        }
        Ok(self.ln_amplitude_pdf(y).exp())
    }

    pub(crate) fn ln_amplitude_pdf(&self, y: f64) -> f64 {
        if y == 0.0 {
            return match self.a {
                a if a > 0.0 => f64::NEG_INFINITY,
                a if a == 0.0 => -self.b.ln() - self.ln_gamma_shape(),
                _ => f64::INFINITY,
            };
        }
        self.a * y.ln() - y / self.b - self.shape() * self.b.ln() - self.ln_gamma_shape()
    }

    /// Distribution function of the sum amplitude, `P(a+1, y/b)`.
    pub fn amplitude_cdf(&self, y: f64) -> Result<f64> {
        if y.is_nan() || y < 0.0 {
            return Err(domain("amplitude_cdf", format!("y = {y} must be >= 0")));
        }
        reg_lower_gamma(self.shape(), y / self.b)
    }

    /// Mean `b(a+1)` and standard deviation `b√(a+1)` of the amplitude.
    pub fn amplitude_mean_std(&self) -> (f64, f64) {
        (self.b * self.shape(), self.b * self.shape().sqrt())
    }
}

/// Gamma parameters for a link: `a = N E(ξ_l)²/Var(ξ_l) - 1`,
/// `b = Var(ξ_l)/E(ξ_l)`.
pub fn laguerre_params(link: &CascadedLink) -> Result<GammaApprox> {
    let mean = mean_cascaded_element(&link.hop1, &link.hop2);
    let var = var_cascaded_element(&link.hop1, &link.hop2)?;
    let n = link.n_elements as f64;
    GammaApprox::new(n * mean * mean / var - 1.0, var / mean)
}

/// Approximate end-to-end SNR law for a given average SNR `γ̄` (linear).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrModel {
    approx: GammaApprox,
    gamma_bar: f64,
}

impl SnrModel {
    pub fn new(approx: GammaApprox, gamma_bar: f64) -> Result<Self> {
        if !(gamma_bar.is_finite() && gamma_bar > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "average SNR {gamma_bar} must be positive"
            )));
        }
        Ok(Self { approx, gamma_bar })
    }

    pub fn approx(&self) -> GammaApprox {
        self.approx
    }

    pub fn gamma_bar(&self) -> f64 {
        self.gamma_bar
    }

    /// SNR density
    /// `γ^{(a-1)/2} exp(-√γ/(b√γ̄)) / (2 b^{a+1} Γ(a+1) γ̄^{(a+1)/2})`.
    pub fn pdf(&self, gamma: f64) -> Result<f64> {
        snr_pdf(self, gamma)
    }

    /// SNR distribution function `P(a+1, √γ/(b√γ̄))`.
    pub fn cdf(&self, gamma: f64) -> Result<f64> {
        snr_cdf(self, gamma)
    }

    /// `E[γ] = γ̄ b²(a+1)(a+2)`.
    pub fn mean_snr(&self) -> f64 {
        let GammaApprox { a, b } = self.approx;
        self.gamma_bar * b * b * (a + 1.0) * (a + 2.0)
    }

    /// Amplitude `√(γ/γ̄)` corresponding to an SNR value.
    pub fn amplitude_of(&self, gamma: f64) -> f64 {
        (gamma / self.gamma_bar).sqrt()
    }
}

pub fn snr_pdf(model: &SnrModel, gamma: f64) -> Result<f64> {
    require_finite("snr_pdf", "gamma", gamma)?;
    if gamma <= 0.0 {
        return Err(domain("snr_pdf", format!("gamma = {gamma} must be positive")));
    }
    let GammaApprox { a, b } = model.approx;
    let gb = model.gamma_bar;
    let ln = 0.5 * (a - 1.0) * gamma.ln() - (gamma / gb).sqrt() / b
        - std::f64::consts::LN_2
        - (a + 1.0) * b.ln()
        - model.approx.ln_gamma_shape()
        - 0.5 * (a + 1.0) * gb.ln();
    Ok(ln.exp())
}

pub fn snr_cdf(model: &SnrModel, gamma: f64) -> Result<f64> {
    if gamma.is_nan() || gamma < 0.0 {
        return Err(domain("snr_cdf", format!("gamma = {gamma} must be >= 0")));
    }
    model.approx.amplitude_cdf(model.amplitude_of(gamma))
}

/// Truncated double-series value of the single-element product density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductPdf {
    pub value: f64,
    /// Share of the value carried by the outermost retained terms.
    pub last_term_ratio: f64,
    /// `false` when `last_term_ratio` exceeds `1e-8`.
    pub converged: bool,
}

pub const MAX_PRODUCT_TERMS: u32 = 60;

/// Exact density of `αβ` for two independent Rician envelopes:
///
/// ```text
/// f(y) = 4 e^{-(K1+K2)} Σ_{i,j≥0} K1^i K2^j (c1c2)^{1+(i+j)/2} y^{i+j+1} K_{i-j}(2y√(c1c2)) / (i! j!)²
/// ```
///
/// with `c = (K+1)/Ω`, truncated to `truncation` terms per index.
pub fn product_pdf_exact(
    hop1: &RicianParams,
    hop2: &RicianParams,
    y: f64,
    truncation: u32,
) -> Result<ProductPdf> {
    require_finite("product_pdf_exact", "y", y)?;
    if y <= 0.0 {
        return Err(domain("product_pdf_exact", format!("y = {y} must be positive")));
    }
    if truncation == 0 || truncation > MAX_PRODUCT_TERMS {
        return Err(Error::InvalidParameter(format!(
            "truncation {truncation} outside 1..={MAX_PRODUCT_TERMS}"
        )));
    }
    if !(hop1.k.is_finite() && hop2.k.is_finite()) || hop1.k.max(hop2.k) > 700.0 {
        return Err(Error::InvalidParameter(
            "product series needs K <= 700 on both hops".into(),
        ));
    }
    let c1 = (hop1.k + 1.0) / hop1.omega;
    let c2 = (hop2.k + 1.0) / hop2.omega;
    let ln_c = (c1 * c2).ln();
    let x = 2.0 * y * (c1 * c2).sqrt();
    let ln_y = y.ln();

    let mut ln_k = Vec::with_capacity(truncation as usize);
    for nu in 0..truncation {
        ln_k.push(ln_bessel_k(nu as f64, x)?);
    }
    let ln_fact: Vec<f64> = (0..truncation)
        .map(|i| ln_gamma(i as f64 + 1.0).expect("positive"))
        .collect();
    let ln_pow = |k: f64, i: u32| -> Option<f64> {
        match (k, i) {
            (_, 0) => Some(0.0),
            (k, _) if k == 0.0 => None,
            (k, i) => Some(i as f64 * k.ln()),
        }
    };

    let base = 4f64.ln() - hop1.k - hop2.k;
    let last = truncation - 1;
    let mut total = 0.0;
    let mut edge = 0.0;
    for i in 0..truncation {
        let Some(pi) = ln_pow(hop1.k, i) else { break };
        for j in 0..truncation {
            let Some(pj) = ln_pow(hop2.k, j) else { break };
            let s = (i + j) as f64;
            let ln_term = base + pi + pj + (1.0 + 0.5 * s) * ln_c + (s + 1.0) * ln_y
                + ln_k[i.abs_diff(j) as usize]
                - 2.0 * (ln_fact[i as usize] + ln_fact[j as usize]);
            let term = ln_term.exp();
            total += term;
            if i == last || j == last {
                edge += term;
            }
        }
    }
    let last_term_ratio = if total > 0.0 { edge / total } else { 0.0 };
    Ok(ProductPdf {
        value: total,
        last_term_ratio,
        converged: last_term_ratio <= 1e-8,
    })
}

fn ln_bessel_k(nu: f64, x: f64) -> Result<f64> {
    let v = bessel_k(nu, x)?;
    if v.is_finite() && v > 0.0 {
        return Ok(v.ln());
    }
    if v == 0.0 {
        // far tail: K_ν(x) ~ √(π/2x) e^{-x}
        return Ok(0.5 * (std::f64::consts::PI / (2.0 * x)).ln() - x);
    }
    // small argument, large order: K_ν(x) ~ Γ(ν)/2 (2/x)^ν
    Ok(ln_gamma(nu)? - std::f64::consts::LN_2 + nu * (2.0 / x).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate_to_infinity, Tolerance};
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn unit(k: f64) -> RicianParams {
        RicianParams::new(k, 1.0).unwrap()
    }

    #[test]
    fn rician_construction() {
        let h = RicianParams::from_sigma2(3.0, 0.5).unwrap();
        assert_eq!(h.omega(), 4.0);
        assert!(rel(h.los_amplitude().powi(2) + 2.0 * h.scatter_std().powi(2), h.omega()) < 1e-15);
        assert!(RicianParams::new(-1.0, 1.0).is_err());
        assert!(RicianParams::new(1.0, 0.0).is_err());
        assert!(RicianParams::new(f64::NAN, 1.0).is_err());
        assert!(RicianParams::from_sigma2(1.0, -0.5).is_err());
        assert!(CascadedLink::new(unit(1.0), unit(1.0), 0).is_err());
    }

    #[test]
    fn rayleigh_product_moments() {
        let (h, g) = (unit(0.0), unit(0.0));
        assert!(rel(mean_cascaded_element(&h, &g), PI / 4.0) < 1e-14);
        assert!(rel(var_cascaded_element(&h, &g).unwrap(), 1.0 - PI * PI / 16.0) < 1e-13);
        let approx = laguerre_params(&CascadedLink::new(h, g, 1).unwrap()).unwrap();
        assert!(rel(approx.a(), 0.609_945_759_918_522_535) < 1e-12);
        assert!(rel(approx.b(), 0.487_841_381_337_714_377) < 1e-12);
    }

    #[test]
    fn frozen_moments() {
        // 30-digit references for unit-power K = 1 hops and the σ² = 1/2, N = 5 point
        let (h, g) = (unit(1.0), unit(1.0));
        assert!(rel(mean_cascaded_element(&h, &g), 0.821_658_900_384_983_284) < 1e-13);
        assert!(rel(var_cascaded_element(&h, &g).unwrap(), 0.324_876_651_418_140_117) < 1e-12);
        let hop = RicianParams::from_sigma2(1.0, 0.5).unwrap();
        let approx = laguerre_params(&CascadedLink::new(hop, hop, 5).unwrap()).unwrap();
        assert!(rel(approx.a(), 9.390_456_587_674_663_89) < 1e-12);
        assert!(rel(approx.b(), 0.790_782_285_120_799_243) < 1e-12);
    }

    #[test]
    fn bessel_and_laguerre_mean_paths_agree() {
        for &k in &[0.0, 0.3, 1.0, 7.5, 40.0, 1e3, 1e6] {
            let h = RicianParams::new(k, 2.5).unwrap();
            let direct = h.mean_amplitude();
            let lag = h.mean_amplitude_laguerre().unwrap();
            assert!(rel(direct, lag) < 1e-12, "K = {k}");
        }
    }

    #[test]
    fn large_k_limit() {
        let (h, g) = (unit(1e6), unit(1e6));
        assert!((mean_cascaded_element(&h, &g) - 1.0).abs() < 1e-3);
        let v = var_cascaded_element(&h, &g).unwrap();
        assert!(v > 0.0 && rel(v, 1e-6) < 1e-5);
        // the expansion continues the Bessel branch smoothly
        let below = unit(1e6).var_amplitude();
        let above = unit(1e6 * (1.0 + 1e-12)).var_amplitude();
        assert!(rel(below, above) < 1e-9);
        let beyond = unit(1e9);
        assert!(rel(beyond.var_amplitude(), 0.5e-9) < 1e-8);
        assert!(rel(beyond.mean_amplitude(), 1.0) < 1e-9);
        let det = RicianParams::new(f64::INFINITY, 4.0).unwrap();
        assert_eq!(det.mean_amplitude(), 2.0);
        assert_eq!(det.var_amplitude(), 0.0);
        assert!(var_cascaded_element(&det, &det).is_err());
    }

    #[test]
    fn shape_is_linear_in_n() {
        let hop = RicianParams::new(2.0, 1.3).unwrap();
        let one = laguerre_params(&CascadedLink::new(hop, hop, 1).unwrap()).unwrap();
        let five = laguerre_params(&CascadedLink::new(hop, hop, 5).unwrap()).unwrap();
        assert!(rel(five.shape(), 5.0 * one.shape()) < 1e-14);
        assert_eq!(one.b(), five.b());
    }

    fn model(n: u32, k: f64, gamma_bar: f64) -> SnrModel {
        let hop = RicianParams::from_sigma2(k, 0.5).unwrap();
        let approx = laguerre_params(&CascadedLink::new(hop, hop, n).unwrap()).unwrap();
        SnrModel::new(approx, gamma_bar).unwrap()
    }

    #[test]
    fn snr_pdf_is_normalised() {
        for &(n, k, g) in &[(1, 0.0, 1.0), (2, 1.0, 10.0), (5, 10.0, 100.0)] {
            let m = model(n, k, g);
            let (mu, sd) = m.approx().amplitude_mean_std();
            let t_scale = g.sqrt() * sd;
            let t_mid = g.sqrt() * mu;
            // γ = t²
            let f = |t: f64| if t == 0.0 { 0.0 } else { 2.0 * t * m.pdf(t * t).unwrap() };
            let pts = [0.0, (t_mid - 3.0 * t_scale).max(0.5 * t_mid), t_mid, t_mid + 3.0 * t_scale];
            let r = integrate_to_infinity(f, &pts, t_scale, Tolerance::relative(1e-12)).unwrap();
            assert!((r.value - 1.0).abs() < 1e-8, "{n} {k} {g}: {}", r.value);
        }
    }

    #[test]
    fn snr_pdf_is_the_transformed_amplitude_density() {
        let m = model(5, 1.0, 3.0);
        for &gamma in &[0.01, 1.0, 7.0, 40.0, 300.0] {
            let y = (gamma / m.gamma_bar()).sqrt();
            let want = m.approx().amplitude_pdf(y).unwrap() / (2.0 * (gamma * m.gamma_bar()).sqrt());
            assert!(rel(m.pdf(gamma).unwrap(), want) < 1e-12);
        }
    }

    #[test]
    fn snr_cdf_limits_and_domain() {
        let m = model(2, 1.0, 10.0);
        assert_eq!(m.cdf(0.0).unwrap(), 0.0);
        let GammaApprox { a, b } = m.approx();
        let far = 1e6 * m.gamma_bar() * b * b * (a + 1.0).powi(2);
        assert!((m.cdf(far).unwrap() - 1.0).abs() < 1e-9);
        assert!(m.cdf(-1.0).is_err());
        assert!(m.pdf(0.0).is_err());
        assert!(m.pdf(f64::NAN).is_err());
    }

    #[test]
    fn snr_cdf_derivative_is_the_pdf() {
        let m = model(5, 1.0, 10.0);
        let (mu, sd) = m.approx().amplitude_mean_std();
        for i in 0..50 {
            // spread points across the bulk of the amplitude law
            let y = (mu - 3.0 * sd).max(0.05 * mu) + 6.0 * sd * i as f64 / 49.0;
            let g = m.gamma_bar() * y * y;
            let h = 1e-5 * g;
            let fd = (m.cdf(g + h).unwrap() - m.cdf(g - h).unwrap()) / (2.0 * h);
            assert!(rel(fd, m.pdf(g).unwrap()) < 1e-5, "gamma = {g}");
        }
    }

    /// Rayleigh product density by direct quadrature of the product integral.
    fn rayleigh_product_oracle(y: f64) -> f64 {
        // ∫ f_R(x) f_R(y/x) / x dx with f_R(r) = 2r e^{-r²}
        let f = |x: f64| {
            if x == 0.0 {
                0.0
            } else {
                let w = y / x;
                2.0 * x * (-x * x).exp() * 2.0 * w * (-w * w).exp() / x
            }
        };
        let s = y.sqrt();
        integrate_to_infinity(f, &[0.0, 0.5 * s, s, 2.0 * s], s, Tolerance::relative(1e-12))
            .unwrap()
            .value
    }

    #[test]
    fn product_series_rayleigh_limit() {
        for &y in &[0.05, 0.3, 1.0, 2.2] {
            let r = product_pdf_exact(&unit(0.0), &unit(0.0), y, 10).unwrap();
            let closed = 4.0 * y * bessel_k(0.0, 2.0 * y).unwrap();
            assert!(rel(r.value, closed) < 1e-12);
            assert!(rel(r.value, rayleigh_product_oracle(y)) < 1e-4);
            assert!(r.converged);
        }
        // K → 0 from above converges to the same density
        let r = product_pdf_exact(&unit(1e-9), &unit(1e-9), 0.7, 20).unwrap();
        assert!(rel(r.value, 4.0 * 0.7 * bessel_k(0.0, 1.4).unwrap()) < 1e-6);
    }

    #[test]
    fn product_series_integrates_to_one() {
        let (h, g) = (unit(1.0), unit(1.0));
        let f = |y: f64| if y == 0.0 { 0.0 } else { product_pdf_exact(&h, &g, y, 40).unwrap().value };
        let r = integrate_to_infinity(f, &[0.0, 0.5, 1.0, 2.0], 1.0, Tolerance::new(1e-10, 1e-9)).unwrap();
        assert!((r.value - 1.0).abs() < 5e-3, "{}", r.value);
        // first two moments agree with the moment formulas
        let m1 = integrate_to_infinity(|y| y * f(y), &[0.0, 0.5, 1.0, 2.0], 1.0, Tolerance::new(1e-10, 1e-9)).unwrap();
        assert!(rel(m1.value, mean_cascaded_element(&h, &g)) < 1e-6);
    }

    #[test]
    fn product_series_flags_truncation() {
        let h = RicianParams::new(10.0, 1.0).unwrap();
        let r = product_pdf_exact(&h, &h, 1.0, 3).unwrap();
        assert!(!r.converged);
        assert!(product_pdf_exact(&h, &h, 1.0, 61).is_err());
        assert!(product_pdf_exact(&h, &h, 0.0, 10).is_err());
        assert!(product_pdf_exact(&h, &h, 1.0, 60).unwrap().converged);
    }

    proptest::proptest! {
        #[test]
        fn mean_is_symmetric_and_bounded(k1 in 0.0f64..50.0, k2 in 0.0f64..50.0, o1 in 0.1f64..10.0, o2 in 0.1f64..10.0) {
            let h = RicianParams::new(k1, o1).unwrap();
            let g = RicianParams::new(k2, o2).unwrap();
            let m = mean_cascaded_element(&h, &g);
            proptest::prop_assert_eq!(m, mean_cascaded_element(&g, &h));
            proptest::prop_assert!(m * m <= o1 * o2);
            proptest::prop_assert!(var_cascaded_element(&h, &g).unwrap() > 0.0);
        }

        #[test]
        fn cdf_depends_on_snr_ratio_only(k in 0.0f64..20.0, n in 1u32..8, g in 0.01f64..1e3, c in 0.01f64..100.0, x in 0.0f64..50.0) {
            let hop = RicianParams::from_sigma2(k, 0.5).unwrap();
            let approx = laguerre_params(&CascadedLink::new(hop, hop, n).unwrap()).unwrap();
            let m1 = SnrModel::new(approx, g).unwrap();
            let m2 = SnrModel::new(approx, c * g).unwrap();
            let p1 = m1.cdf(x * g).unwrap();
            let p2 = m2.cdf(c * x * g).unwrap();
            proptest::prop_assert!((p1 - p2).abs() < 1e-12);
            proptest::prop_assert!((0.0..=1.0).contains(&p1));
        }

        #[test]
        fn cdf_is_monotone_and_pdf_nonnegative(k in 0.0f64..20.0, n in 1u32..8, x in 1e-6f64..100.0, dx in 0.0f64..10.0) {
            let hop = RicianParams::from_sigma2(k, 0.5).unwrap();
            let approx = laguerre_params(&CascadedLink::new(hop, hop, n).unwrap()).unwrap();
            let m = SnrModel::new(approx, 10.0).unwrap();
            proptest::prop_assert!(m.cdf(x + dx).unwrap() >= m.cdf(x).unwrap());
            proptest::prop_assert!(m.pdf(x).unwrap() >= 0.0);
        }

        #[test]
        fn b_is_independent_of_n(k in 0.0f64..30.0, n in 1u32..64) {
            let hop = RicianParams::new(k, 1.0).unwrap();
            let one = laguerre_params(&CascadedLink::new(hop, hop, 1).unwrap()).unwrap();
            let many = laguerre_params(&CascadedLink::new(hop, hop, n).unwrap()).unwrap();
            proptest::prop_assert_eq!(one.b(), many.b());
            proptest::prop_assert!((many.shape() / one.shape() - n as f64).abs() < 1e-12 * n as f64);
        }
    }
}
