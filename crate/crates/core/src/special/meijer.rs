//! Real-argument Meijer G-function by Mellin-Barnes contour quadrature.
//!
//! ```text
//!                     1   ⌠  ∏_{j≤m} Γ(b_j - s) ∏_{j≤n} Γ(1 - a_j + s)
//! G^{m,n}_{p,q}(z) = ---- ⎮ ------------------------------------------ z^s ds
//!                    2πi  ⌡  ∏_{j>m} Γ(1 - b_j + s) ∏_{j>n} Γ(a_j - s)
//! ```
//!
//! The contour runs upward and separates the right pole ladders `b_j + k`
//! (`j ≤ m`) from the left ladders `a_j - 1 - k` (`j ≤ n`).
//!
//! Strategy:
//!
//! - When `c* = m + n - (p+q)/2 > 0` the integrand decays like `e^{-c* π |t|}` on
//!   any vertical line `s = c + it`. The abscissa `c` is chosen inside the
//!   separating interval by minimising the L1 norm of the integrand, which puts
//!   the line through the real saddle point and keeps cancellation small even
//!   when the result is many orders of magnitude below the integrand scale.
//! - When `c* = 0` and `p = q` the vertical line converges only algebraically;
//!   the contour is bent into a parabola `c - κt² + it` that opens towards the
//!   side where `|z^s|` decays, which gives Gaussian decay.
//! - When no separating vertical line exists, the line is placed in a gap
//!   between poles and the residues of the poles it strands on the wrong side
//!   are added back (simple poles only).
//! - For `p > q` and `z > 1` the argument-inversion identity
//!   `G^{m,n}_{p,q}(z | a; b) = G^{n,m}_{q,p}(1/z | 1-b; 1-a)` is applied first.
//!
//! Because the parameters and `z` are real, the integrand is conjugate
//! symmetric and only the upper half of the contour is integrated. The
//! half-line integral is discretised by the trapezoid rule, which converges
//! geometrically for analytic integrands; the step is halved until two
//! successive levels agree.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::gamma::{ln_gamma_complex, ln_gamma_pos};
use crate::error::{Error, Result};

/// Parameters of `G^{m,n}_{p,q}(z | a; b)` with `p = a.len()`, `q = b.len()`.
///
/// The first `n` entries of `a` and the first `m` entries of `b` are the ones
/// that appear as numerator gamma factors.
#[derive(Debug, Clone, PartialEq)]
pub struct MeijerGSpec {
    pub m: usize,
    pub n: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub z: f64,
}

/// A Meijer G value with its estimated relative error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeijerGValue {
    pub value: f64,
    pub rel_error: f64,
}

const INTEGER_EPS: f64 = 1e-12;

fn is_positive_integer(x: f64) -> bool {
    x > 0.5 && (x - x.round()).abs() < INTEGER_EPS
}

impl MeijerGSpec {
    pub fn new(m: usize, n: usize, a: Vec<f64>, b: Vec<f64>, z: f64) -> Result<Self> {
        let spec = Self { m, n, a, b, z };
        spec.validate()?;
        Ok(spec)
    }

    pub fn p(&self) -> usize {
        self.a.len()
    }

    pub fn q(&self) -> usize {
        self.b.len()
    }

    /// Checks order bounds, finiteness, `z > 0` and that no `a_j - b_k`
    /// (`j ≤ n`, `k ≤ m`) is a positive integer.
    pub fn validate(&self) -> Result<()> {
        if self.m > self.q() || self.n > self.p() {
            return Err(Error::InvalidSpec(format!(
                "orders m={} n={} exceed q={} p={}",
                self.m,
                self.n,
                self.q(),
                self.p()
            )));
        }
        if self.a.iter().chain(&self.b).any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("non-finite parameter".into()));
        }
        if !(self.z.is_finite() && self.z > 0.0) {
            return Err(Error::InvalidSpec(format!("z = {} must be positive and finite", self.z)));
        }
        for (j, a) in self.a[..self.n].iter().enumerate() {
            for (k, b) in self.b[..self.m].iter().enumerate() {
                if is_positive_integer(a - b) {
                    return Err(Error::InvalidSpec(format!(
                        "pole collision: a_{} - b_{} = {} is a positive integer",
                        j + 1,
                        k + 1,
                        a - b
                    )));
                }
            }
        }
        Ok(())
    }

    /// The same function expressed through the argument `1/z`.
    pub fn inverted(&self) -> Self {
        Self {
            m: self.n,
            n: self.m,
            a: self.b.iter().map(|b| 1.0 - b).collect(),
            b: self.a.iter().map(|a| 1.0 - a).collect(),
            z: 1.0 / self.z,
        }
    }

    /// Exponential decay rate `c* = m + n - (p + q)/2` of the integrand along
    /// vertical lines, in units of `π`.
    pub fn decay(&self) -> f64 {
        (self.m + self.n) as f64 - 0.5 * (self.p() + self.q()) as f64
    }

    fn right_start(&self) -> f64 {
        self.b[..self.m].iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn left_end(&self) -> f64 {
        self.a[..self.n].iter().map(|a| a - 1.0).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Evaluates `G^{m,n}_{p,q}(z)` to the requested relative tolerance.
pub fn meijer_g(spec: &MeijerGSpec, rel_tol: f64) -> Result<MeijerGValue> {
    meijer_g_scaled(spec, 0.0, rel_tol)
}

/// Evaluates `e^{ln_scale} G^{m,n}_{p,q}(z)`.
///
/// The scale is folded in before exponentiation, so results whose gamma
/// prefactor and G value would individually overflow stay representable.
pub fn meijer_g_scaled(spec: &MeijerGSpec, ln_scale: f64, rel_tol: f64) -> Result<MeijerGValue> {
    spec.validate()?;
    if !(1e-12..=1e-4).contains(&rel_tol) {
        return Err(Error::InvalidParameter(format!(
            "rel_tol = {rel_tol} outside [1e-12, 1e-4]"
        )));
    }
    if !ln_scale.is_finite() {
        return Err(Error::InvalidParameter(format!("ln_scale = {ln_scale}")));
    }
    let spec = if spec.p() > spec.q() && spec.z > 1.0 {
        spec.inverted()
    } else {
        spec.clone()
    };
    Evaluator::new(&spec, ln_scale, rel_tol).run()
}

#[derive(Debug, Clone, Copy)]
struct Contour {
    c: f64,
    /// Parabolic bend: `s(t) = c - bend t² + i t`. Positive bends to the left.
    bend: f64,
}

impl Contour {
    fn at(&self, t: f64) -> (Complex64, Complex64) {
        (
            Complex64::new(self.c - self.bend * t * t, t),
            Complex64::new(-2.0 * self.bend * t, 1.0),
        )
    }
}

/// A stranded pole whose residue corrects a non-separating vertical line.
#[derive(Debug, Clone, Copy)]
struct Stranded {
    location: f64,
    /// Index into `b` (right ladder) or `a` (left ladder).
    param: usize,
    right: bool,
    order: u32,
}

struct Evaluator<'a> {
    spec: &'a MeijerGSpec,
    ln_z: f64,
    ln_scale: f64,
    rel_tol: f64,
}

/// Profile of `|integrand|` along the upper half of a contour.
struct Profile {
    ln_peak: f64,
    ln_l1: f64,
    /// Abscissa beyond which the envelope is negligible.
    t_end: f64,
}

const TAIL_DROP: f64 = 50.0;
const T_START: f64 = 32.0;
const T_LIMIT: f64 = 65_536.0;
const MAX_LEVELS: usize = 16;

impl<'a> Evaluator<'a> {
    fn new(spec: &'a MeijerGSpec, ln_scale: f64, rel_tol: f64) -> Self {
        Self {
            spec,
            ln_z: spec.z.ln(),
            ln_scale,
            rel_tol,
        }
    }

    /// Log of the Mellin-Barnes integrand, modulo 2πi.
    fn ln_kernel(&self, s: Complex64, skip: Option<(bool, usize)>) -> Complex64 {
        let spec = self.spec;
        let mut acc = s * self.ln_z;
        for (j, &b) in spec.b.iter().enumerate() {
            if skip == Some((true, j)) {
                continue;
            }
            if j < spec.m {
                acc += ln_gamma_complex(b - s);
            } else {
                acc -= ln_gamma_complex(1.0 - b + s);
            }
        }
        for (j, &a) in spec.a.iter().enumerate() {
            if skip == Some((false, j)) {
                continue;
            }
            if j < spec.n {
                acc += ln_gamma_complex(1.0 - a + s);
            } else {
                acc -= ln_gamma_complex(a - s);
            }
        }
        acc
    }

    /// `ln|f(s(t)) s'(t)|`; `-inf` at zeros of the integrand.
    fn ln_envelope(&self, contour: &Contour, t: f64) -> f64 {
        let (s, ds) = contour.at(t);
        let v = self.ln_kernel(s, None).re + ds.norm().ln();
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    }

    fn integrand(&self, contour: &Contour, t: f64, ln_ref: f64) -> f64 {
        let (s, ds) = contour.at(t);
        let phi = self.ln_kernel(s, None);
        if phi.re == f64::NEG_INFINITY || phi.re.is_nan() {
            return 0.0;
        }
        ((phi - ln_ref).exp() * ds).im
    }

    /// Distance from `c` to the nearest numerator pole.
    fn pole_distance(&self, c: f64) -> f64 {
        let spec = self.spec;
        let mut d = f64::INFINITY;
        for &b in &spec.b[..spec.m] {
            d = d.min(ladder_distance(c - b));
        }
        for &a in &spec.a[..spec.n] {
            d = d.min(ladder_distance(a - 1.0 - c));
        }
        d
    }

    fn profile(&self, contour: &Contour, h: f64) -> Profile {
        let mut ln_peak = f64::NEG_INFINITY;
        let mut samples = Vec::with_capacity(256);
        let mut t = 0.0;
        let mut prev = f64::INFINITY;
        loop {
            let e = self.ln_envelope(contour, t);
            samples.push(e);
            if e > ln_peak {
                ln_peak = e;
            }
            if (e < ln_peak - TAIL_DROP && e <= prev && t >= 1.0) || t > T_LIMIT {
                break;
            }
            prev = e;
            t += h;
        }
        let mut l1 = 0.0;
        for (k, &e) in samples.iter().enumerate() {
            let w = if k == 0 { 0.5 } else { 1.0 };
            l1 += w * (e - ln_peak).exp();
        }
        let t_end = if t > T_LIMIT { f64::INFINITY } else { t };
        Profile {
            ln_peak,
            ln_l1: ln_peak + (h * l1).ln(),
            t_end,
        }
    }

    fn probe_step(&self, c: f64) -> f64 {
        (0.25 * self.pole_distance(c)).clamp(1e-3, 0.25)
    }

    fn ln_l1(&self, c: f64, bend: f64) -> f64 {
        let contour = Contour { c, bend };
        let p = self.profile(&contour, self.probe_step(c));
        if p.t_end.is_finite() {
            p.ln_l1
        } else {
            f64::INFINITY
        }
    }

    fn run(&self) -> Result<MeijerGValue> {
        let spec = self.spec;
        let decay = spec.decay();
        if spec.m + spec.n == 0 || decay < 0.0 {
            return Err(Error::InvalidSpec(format!(
                "contour integral diverges (m + n - (p + q)/2 = {decay})"
            )));
        }
        let lo = spec.left_end();
        let hi = spec.right_start();
        let separable = lo < hi;

        let mut bend = 0.0;
        if decay == 0.0 {
            if spec.p() != spec.q() {
                return Err(Error::InvalidSpec("zero decay with p != q is not supported".into()));
            }
            if !separable {
                return Err(Error::InvalidSpec(
                    "zero decay without a separating line is not supported".into(),
                ));
            }
            if self.ln_z.abs() < 1e-12 {
                return Err(Error::InvalidSpec(
                    "zero decay at unit argument: the contour integral is only conditionally convergent"
                        .into(),
                ));
            }
            // closing towards the side where |z^s| decays encloses only that
            // side's ladder; with no ladder there the function vanishes
            let left = self.ln_z > 0.0;
            if (left && spec.n == 0) || (!left && spec.m == 0) {
                return Ok(MeijerGValue {
                    value: 0.0,
                    rel_error: 0.0,
                });
            }
            let kappa = (1.0 / self.ln_z.abs()).min(1e6);
            bend = if left { kappa } else { -kappa };
        }

        let (c, stranded) = if separable {
            (self.choose_abscissa(lo, hi, bend), Vec::new())
        } else {
            self.gap_abscissa(lo, hi)?
        };
        let contour = Contour { c, bend };
        let (integral, rel_error, ln_ref) = self.integrate(&contour)?;
        let mut value = (ln_ref + self.ln_scale).exp() * integral / PI;
        let mut abs_error = value.abs() * rel_error;
        for pole in &stranded {
            let r = self.residue(pole);
            value += r;
            abs_error += r.abs() * 1e-14;
        }
        if !value.is_finite() {
            return Err(Error::Range {
                function: "meijer_g",
                detail: format!("result overflows (log magnitude {})", ln_ref + self.ln_scale),
            });
        }
        let rel_error = if value == 0.0 { abs_error } else { abs_error / value.abs() };
        if rel_error > self.rel_tol {
            return Err(Error::Convergence {
                estimate: value,
                rel_error,
            });
        }
        Ok(MeijerGValue { value, rel_error })
    }

    /// Picks `c` in `(lo, hi)` minimising the integrand's L1 norm.
    fn choose_abscissa(&self, lo: f64, hi: f64, bend: f64) -> f64 {
        let f = |c: f64| self.ln_l1(c, bend);
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) => {
                let margin = (0.1 * (hi - lo)).min(0.5);
                golden_section(&f, lo + margin, hi - margin)
            }
            (true, false) => expand_and_minimise(&f, lo + 0.5, 1.0),
            (false, true) => expand_and_minimise(&f, hi - 0.5, -1.0),
            (false, false) => unreachable!("m + n > 0"),
        }
    }

    /// For interleaved ladders: puts the line in the widest pole gap and
    /// lists the poles left on the wrong side.
    fn gap_abscissa(&self, lo: f64, hi: f64) -> Result<(f64, Vec<Stranded>)> {
        let spec = self.spec;
        // hi = first right pole, lo = last left pole, hi <= lo
        let window = (hi - 1.0, lo + 1.0);
        let mut poles = Vec::new();
        for &b in &spec.b[..spec.m] {
            let mut k = 0.0;
            while b + k <= window.1 {
                poles.push(b + k);
                k += 1.0;
            }
        }
        for &a in &spec.a[..spec.n] {
            let mut k = 0.0;
            while a - 1.0 - k >= window.0 {
                poles.push(a - 1.0 - k);
                k += 1.0;
            }
        }
        poles.sort_by(f64::total_cmp);
        let mut best = (0.0, hi - 0.5);
        for w in poles.windows(2) {
            if w[0] >= hi - 1e-9 && w[1] <= lo + 1e-9 && w[1] - w[0] > best.0 {
                best = (w[1] - w[0], 0.5 * (w[0] + w[1]));
            }
        }
        let c = best.1;
        let mut stranded = Vec::new();
        for (k, &b) in spec.b[..spec.m].iter().enumerate() {
            let mut l = 0u32;
            while b + (l as f64) < c {
                stranded.push(Stranded {
                    location: b + l as f64,
                    param: k,
                    right: true,
                    order: l,
                });
                l += 1;
            }
        }
        for (j, &a) in spec.a[..spec.n].iter().enumerate() {
            let mut l = 0u32;
            while a - 1.0 - (l as f64) > c {
                stranded.push(Stranded {
                    location: a - 1.0 - l as f64,
                    param: j,
                    right: false,
                    order: l,
                });
                l += 1;
            }
        }
        // residues are only computed for simple poles
        for (i, p) in stranded.iter().enumerate() {
            let multiple = (0..spec.m)
                .filter(|&k| !(p.right && k == p.param))
                .any(|k| ladder_distance(p.location - spec.b[k]) < 1e-9)
                || (0..spec.n)
                    .filter(|&j| p.right || j != p.param)
                    .any(|j| ladder_distance(spec.a[j] - 1.0 - p.location) < 1e-9);
            if multiple {
                return Err(Error::InvalidSpec(format!(
                    "stranded pole {} at s = {} is not simple",
                    i, p.location
                )));
            }
        }
        Ok((c, stranded))
    }

    /// Contribution of a stranded pole to G, with the sign fixed by which side
    /// of the line it sits on.
    fn residue(&self, pole: &Stranded) -> f64 {
        let s = Complex64::new(pole.location, 0.0);
        let rest = self.ln_kernel(s, Some((pole.right, pole.param)));
        let sign = if pole.order % 2 == 0 { 1.0 } else { -1.0 };
        let ln_fact = ln_gamma_pos(pole.order as f64 + 1.0);
        // right-ladder residue is -(-1)^l/l! * rest and enters with a minus
        // sign; left-ladder residue is (-1)^l/l! * rest and enters with a plus
        sign * (rest - ln_fact + self.ln_scale).exp().re
    }

    /// Trapezoid quadrature of the upper half contour; returns the integral
    /// scaled by `e^{-ln_ref}`, its relative error estimate and `ln_ref`.
    fn integrate(&self, contour: &Contour) -> Result<(f64, f64, f64)> {
        let d = self.pole_distance(contour.c);
        let profile = self.profile(contour, self.probe_step(contour.c));
        let ln_ref = profile.ln_peak;
        if !ln_ref.is_finite() {
            return Err(Error::Convergence {
                estimate: f64::NAN,
                rel_error: f64::INFINITY,
            });
        }

        // truncation: double T until the envelope has dropped well below the peak
        let mut t_max = T_START;
        loop {
            let e = self.ln_envelope(contour, t_max);
            let e_before = self.ln_envelope(contour, 0.9 * t_max);
            if e < ln_ref - TAIL_DROP && e <= e_before && t_max >= profile.t_end.min(T_LIMIT) {
                break;
            }
            t_max *= 2.0;
            if t_max > T_LIMIT {
                return Err(Error::Convergence {
                    estimate: f64::NAN,
                    rel_error: f64::INFINITY,
                });
            }
        }

        // width of the central bump where the envelope falls by one unit
        let mut width = 0.25;
        {
            let mut t = 0.0;
            while t < t_max {
                t += 0.01 * (1.0 + t);
                if self.ln_envelope(contour, t) < ln_ref - 1.0 {
                    width = t;
                    break;
                }
            }
        }
        let mut h = (0.5 * d).min(0.25 * width).min(0.5);
        if contour.bend != 0.0 {
            h = h.min(0.25 / (1.0 + contour.bend.abs()).sqrt());
        }
        let mut n = (t_max / h).ceil() as usize;
        h = t_max / n as f64;

        let mut sum = 0.5 * self.integrand(contour, 0.0, ln_ref);
        let mut abs_sum = sum.abs();
        for k in 1..=n {
            let v = self.integrand(contour, k as f64 * h, ln_ref);
            sum += v;
            abs_sum += v.abs();
        }
        let mut estimate = h * sum;
        let mut last_diff = f64::INFINITY;
        for _ in 0..MAX_LEVELS {
            let h_new = 0.5 * h;
            let mut odd = 0.0;
            for k in 0..n {
                let v = self.integrand(contour, (2 * k + 1) as f64 * h_new, ln_ref);
                odd += v;
                abs_sum += v.abs();
            }
            sum += odd;
            h = h_new;
            n *= 2;
            let refined = h * sum;
            last_diff = (refined - estimate).abs();
            estimate = refined;
            let rounding = 4.0 * f64::EPSILON * h * abs_sum;
            let bound = last_diff.max(rounding);
            if bound <= 0.1 * self.rel_tol * estimate.abs() {
                return Ok((estimate, bound / estimate.abs(), ln_ref));
            }
            if rounding > 0.1 * self.rel_tol * estimate.abs() && last_diff <= rounding {
                // cancellation floor reached
                break;
            }
        }
        let rounding = 4.0 * f64::EPSILON * h * abs_sum;
        let rel = last_diff.max(rounding) / estimate.abs();
        Ok((estimate, rel, ln_ref))
    }
}

/// Distance from a point at offset `x` (relative to the ladder start, ladder
/// extending over `x = 0, 1, 2, ...` in the positive direction... mirrored by
/// the caller) to the nearest rung.
fn ladder_distance(x: f64) -> f64 {
    // rungs at offsets 0, 1, 2, ... i.e. x = s - start for right ladders
    if x <= 0.0 {
        -x
    } else {
        let frac = x - x.floor();
        frac.min(1.0 - frac)
    }
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

fn golden_section<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> f64 {
    let mut x1 = b - GOLDEN * (b - a);
    let mut x2 = a + GOLDEN * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let tol = 1e-2 * (1.0 + 0.5 * (a.abs() + b.abs()) * 0.01);
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        x1
    } else {
        x2
    }
}

/// Minimises `f` on the ray from `start` in `direction` (±1): expands the step
/// geometrically until the function turns up, then refines by golden section.
fn expand_and_minimise<F: Fn(f64) -> f64>(f: &F, start: f64, direction: f64) -> f64 {
    const LIMIT: f64 = 1e4;
    let mut prev_x = start;
    let mut prev_f = f(start);
    let mut step = 0.5;
    let mut before = start;
    loop {
        let x = prev_x + direction * step;
        let fx = f(x);
        if fx > prev_f || (x - start).abs() > LIMIT {
            let (a, b) = if direction > 0.0 { (before, x) } else { (x, before) };
            return golden_section(f, a, b);
        }
        before = prev_x;
        prev_x = x;
        prev_f = fx;
        step *= 2.0;
    }
}
