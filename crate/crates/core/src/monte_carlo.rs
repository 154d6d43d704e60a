//! Seeded Monte-Carlo simulation of the co-phased link.
//!
//! Trials are grouped into fixed blocks of [`BLOCK_TRIALS`]; block `k` draws
//! from ChaCha8 stream `k` of the seed. Workers take contiguous runs of blocks
//! and the per-block accumulators are merged in block order, so a summary is a
//! pure function of the configuration and does not depend on how many workers
//! ran it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{laguerre_params, mean_cascaded_element, CascadedLink, GammaApprox, RicianParams};
use crate::error::{Error, Result};
use crate::performance::{power_policy, Modulation};

/// Trials per random-stream block.
pub const BLOCK_TRIALS: u64 = 1 << 16;

/// Amplitude samples retained for the Kolmogorov-Smirnov statistic.
pub const KS_SAMPLE_CAP: usize = 1 << 22;

/// Rician envelope `|v + σ(Z1 + iZ2)|` from a pair of uniforms on `(0, 1]`
/// and `[0, 1)`, through the Box-Muller transform.
pub fn sample_rician(params: &RicianParams, u1: f64, u2: f64) -> f64 {
    let (z1, z2) = box_muller(u1, u2);
    let s = params.scatter_std();
    (params.los_amplitude() + s * z1).hypot(s * z2)
}

fn box_muller(u1: f64, u2: f64) -> (f64, f64) {
    let r = (-2.0 * u1.ln()).sqrt();
    let (sin, cos) = (std::f64::consts::TAU * u2).sin_cos();
    (r * cos, r * sin)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub link: CascadedLink,
    /// Average SNR, linear.
    pub gamma_bar: f64,
    pub trials: u64,
    pub seed: u64,
    pub workers: usize,
    pub modulation: Modulation,
}

/// Statistics at one average SNR; `None` fields need a cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct SimSummary {
    pub gamma_bar: f64,
    pub gamma0: Option<f64>,
    pub trials_used: u64,
    pub mean_snr: f64,
    pub mean_snr_se: f64,
    /// Mean of `log2(1 + γ)`.
    pub mean_capacity_nocsi: f64,
    pub mean_capacity_nocsi_se: f64,
    /// Mean of `log2(γ/γ₀) 1{γ > γ₀}`.
    pub mean_capacity_csi: Option<f64>,
    pub mean_capacity_csi_se: Option<f64>,
    /// Mean of `p Q(√(2qγ))`.
    pub empirical_asep: f64,
    pub empirical_asep_se: f64,
    /// Mean water-filling power `(1/γ₀ - 1/γ) 1{γ > γ₀}`.
    pub power_expenditure: Option<f64>,
    pub power_expenditure_se: Option<f64>,
    /// Sample mean and variance of the sum amplitude `ξ`, with standard errors.
    pub amplitude_mean: f64,
    pub amplitude_mean_se: f64,
    pub amplitude_var: f64,
    pub amplitude_var_se: f64,
    /// KS distance between the empirical SNR law and the Gamma approximation,
    /// over the first `ks_samples` trials.
    pub ks_distance_vs_model: Option<f64>,
    pub ks_samples: usize,
}

/// An average SNR and optional water-filling cutoff to evaluate on shared
/// channel draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimPoint {
    pub gamma_bar: f64,
    pub gamma0: Option<f64>,
}

/// Runs `config` at its own average SNR.
pub fn simulate(config: &SimConfig, gamma0: Option<f64>) -> Result<SimSummary> {
    let point = SimPoint {
        gamma_bar: config.gamma_bar,
        gamma0,
    };
    Ok(simulate_points(config, &[point])?.remove(0))
}

/// Runs several SNR points on the same channel draws; `config.gamma_bar` is
/// ignored in favour of each point's value.
///
/// Every point sees exactly the samples a single-point run would see.
pub fn simulate_points(config: &SimConfig, points: &[SimPoint]) -> Result<Vec<SimSummary>> {
    if config.trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    if config.workers == 0 {
        return Err(Error::InvalidParameter("workers must be at least 1".into()));
    }
    for p in points {
        if !(p.gamma_bar.is_finite() && p.gamma_bar > 0.0) {
            return Err(Error::InvalidParameter(format!("average SNR {}", p.gamma_bar)));
        }
        if let Some(g0) = p.gamma0 {
            if !(g0.is_finite() && g0 > 0.0) {
                return Err(Error::InvalidParameter(format!("cutoff {g0}")));
            }
        }
    }

    let n_blocks = config.trials.div_ceil(BLOCK_TRIALS);
    let workers = (config.workers as u64).min(n_blocks) as usize;
    let shift = config.link.n_elements() as f64 * mean_cascaded_element(&config.link.hop1, &config.link.hop2);
    let run = Run {
        config,
        points,
        shift,
    };

    let mut blocks: Vec<BlockStats> = Vec::with_capacity(n_blocks as usize);
    if workers <= 1 {
        for b in 0..n_blocks {
            blocks.push(run.block(b));
        }
    } else {
        let per = n_blocks.div_ceil(workers as u64);
        let parts: Vec<Vec<BlockStats>> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers as u64)
                .map(|w| {
                    let run = &run;
                    scope.spawn(move || {
                        let lo = w * per;
                        let hi = ((w + 1) * per).min(n_blocks);
                        (lo..hi).map(|b| run.block(b)).collect::<Vec<_>>()
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        });
        blocks.extend(parts.into_iter().flatten());
    }

    let mut total = BlockStats::new(points.len());
    let mut samples = Vec::new();
    for block in blocks {
        total.merge(&block);
        if samples.len() < KS_SAMPLE_CAP {
            let room = KS_SAMPLE_CAP - samples.len();
            samples.extend(block.samples.iter().take(room));
        }
    }

    let ks = laguerre_params(&config.link).ok().map(|approx| ks_distance(&mut samples, &approx));
    let n = config.trials as f64;
    let (amp_mean, amp_mean_se, amp_var, amp_var_se) = total.amplitude.summary(n, shift);
    Ok(points
        .iter()
        .zip(&total.points)
        .map(|(p, acc)| {
            let (mean_snr, mean_snr_se) = acc.snr.mean_se(n);
            let (cap, cap_se) = acc.capacity.mean_se(n);
            let (asep, asep_se) = acc.asep.mean_se(n);
            let csi = p.gamma0.map(|_| acc.capacity_csi.mean_se(n));
            let power = p.gamma0.map(|_| acc.power.mean_se(n));
            SimSummary {
                gamma_bar: p.gamma_bar,
                gamma0: p.gamma0,
                trials_used: config.trials,
                mean_snr,
                mean_snr_se,
                mean_capacity_nocsi: cap,
                mean_capacity_nocsi_se: cap_se,
                mean_capacity_csi: csi.map(|c| c.0),
                mean_capacity_csi_se: csi.map(|c| c.1),
                empirical_asep: asep,
                empirical_asep_se: asep_se,
                power_expenditure: power.map(|c| c.0),
                power_expenditure_se: power.map(|c| c.1),
                amplitude_mean: amp_mean,
                amplitude_mean_se: amp_mean_se,
                amplitude_var: amp_var,
                amplitude_var_se: amp_var_se,
                ks_distance_vs_model: ks,
                ks_samples: samples.len(),
            }
        })
        .collect())
}

/// Draws `count` sum amplitudes `ξ = Σ α_l β_l` from the first blocks of the
/// given seed, exactly as the simulator does.
pub fn sample_sum_amplitudes(link: &CascadedLink, count: usize, seed: u64) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    let mut block = 0u64;
    while out.len() < count {
        let mut rng = block_rng(seed, block);
        let take = (count - out.len()).min(BLOCK_TRIALS as usize);
        for _ in 0..take {
            out.push(draw_sum(link, &mut rng));
        }
        block += 1;
    }
    out
}

/// Kolmogorov-Smirnov distance between samples of `ξ` and the Gamma law.
///
/// Equal to the distance in the SNR domain, since `γ = γ̄ξ²` is monotone.
/// Sorts `samples` in place.
pub fn ks_distance(samples: &mut [f64], approx: &GammaApprox) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &y) in samples.iter().enumerate() {
        let f = approx.amplitude_cdf(y.max(0.0)).unwrap_or(f64::NAN);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

fn draw_sum(link: &CascadedLink, rng: &mut ChaCha8Rng) -> f64 {
    let mut sum = 0.0;
    for _ in 0..link.n_elements() {
        let a = sample_rician(&link.hop1, 1.0 - rng.random::<f64>(), rng.random::<f64>());
        let b = sample_rician(&link.hop2, 1.0 - rng.random::<f64>(), rng.random::<f64>());
        sum += a * b;
    }
    sum
}

/// Neumaier-compensated sums of a quantity and its square.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    sum: Compensated,
    sum_sq: Compensated,
}

impl Moments {
    fn add(&mut self, x: f64) {
        self.sum.add(x);
        self.sum_sq.add(x * x);
    }

    fn merge(&mut self, other: &Self) {
        self.sum.merge(&other.sum);
        self.sum_sq.merge(&other.sum_sq);
    }

    fn mean_se(&self, n: f64) -> (f64, f64) {
        let mean = self.sum.value() / n;
        if n < 2.0 {
            return (mean, 0.0);
        }
        let var = ((self.sum_sq.value() - n * mean * mean) / (n - 1.0)).max(0.0);
        (mean, (var / n).sqrt())
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Compensated {
    sum: f64,
    c: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn merge(&mut self, other: &Self) {
        self.add(other.sum);
        self.c += other.c;
    }

    fn value(&self) -> f64 {
        self.sum + self.c
    }
}

/// Power sums of `ξ - shift` up to the fourth order.
#[derive(Debug, Clone, Copy, Default)]
struct AmplitudeMoments {
    s: [Compensated; 4],
}

impl AmplitudeMoments {
    fn add(&mut self, d: f64) {
        let mut p = d;
        for s in &mut self.s {
            s.add(p);
            p *= d;
        }
    }

    fn merge(&mut self, other: &Self) {
        for (a, b) in self.s.iter_mut().zip(&other.s) {
            a.merge(b);
        }
    }

    /// Mean, its SE, unbiased variance, and the large-sample SE of the
    /// variance `√((μ4 - σ⁴)/n)`.
    fn summary(&self, n: f64, shift: f64) -> (f64, f64, f64, f64) {
        let r: Vec<f64> = self.s.iter().map(|s| s.value() / n).collect();
        let m = r[0];
        let mu2 = r[1] - m * m;
        let mu4 = r[3] - 4.0 * m * r[2] + 6.0 * m * m * r[1] - 3.0 * m.powi(4);
        let var = if n > 1.0 { mu2 * n / (n - 1.0) } else { 0.0 };
        let mean_se = (var.max(0.0) / n).sqrt();
        let var_se = ((mu4 - mu2 * mu2).max(0.0) / n).sqrt();
        (shift + m, mean_se, var, var_se)
    }
}

#[derive(Debug, Clone, Default)]
struct PointStats {
    snr: Moments,
    capacity: Moments,
    capacity_csi: Moments,
    asep: Moments,
    power: Moments,
}

#[derive(Debug, Clone)]
struct BlockStats {
    points: Vec<PointStats>,
    amplitude: AmplitudeMoments,
    samples: Vec<f64>,
}

impl BlockStats {
    fn new(points: usize) -> Self {
        Self {
            points: vec![PointStats::default(); points],
            amplitude: AmplitudeMoments::default(),
            samples: Vec::new(),
        }
    }

    fn merge(&mut self, other: &Self) {
        for (a, b) in self.points.iter_mut().zip(&other.points) {
            a.snr.merge(&b.snr);
            a.capacity.merge(&b.capacity);
            a.capacity_csi.merge(&b.capacity_csi);
            a.asep.merge(&b.asep);
            a.power.merge(&b.power);
        }
        self.amplitude.merge(&other.amplitude);
    }
}

struct Run<'a> {
    config: &'a SimConfig,
    points: &'a [SimPoint],
    shift: f64,
}

impl Run<'_> {
    fn block(&self, block: u64) -> BlockStats {
        let cfg = self.config;
        let start = block * BLOCK_TRIALS;
        let count = BLOCK_TRIALS.min(cfg.trials - start);
        let keep = start < KS_SAMPLE_CAP as u64;
        let mut stats = BlockStats::new(self.points.len());
        if keep {
            stats.samples.reserve(count as usize);
        }
        let mut rng = block_rng(cfg.seed, block);
        for _ in 0..count {
            let xi = draw_sum(&cfg.link, &mut rng);
            stats.amplitude.add(xi - self.shift);
            if keep {
                stats.samples.push(xi);
            }
            let x2 = xi * xi;
            for (p, acc) in self.points.iter().zip(&mut stats.points) {
                let gamma = p.gamma_bar * x2;
                acc.snr.add(gamma);
                acc.capacity.add(gamma.ln_1p() / std::f64::consts::LN_2);
                acc.asep.add(cfg.modulation.conditional_error(gamma));
                if let Some(g0) = p.gamma0 {
                    let csi = if gamma > g0 { (gamma / g0).log2() } else { 0.0 };
                    acc.capacity_csi.add(csi);
                    acc.power.add(power_policy(g0, gamma));
                }
            }
        }
        stats
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{var_cascaded_element, RicianParams};
    use rand::Rng;

    fn draws(params: &RicianParams, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| sample_rician(params, 1.0 - rng.random::<f64>(), rng.random::<f64>()))
            .collect()
    }

    fn mean_se(x: &[f64]) -> (f64, f64) {
        let n = x.len() as f64;
        let m = x.iter().sum::<f64>() / n;
        let v = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, (v / n).sqrt())
    }

    #[test]
    fn rayleigh_second_moment() {
        let h = RicianParams::new(0.0, 2.0).unwrap();
        let sq: Vec<f64> = draws(&h, 1_000_000, 1).iter().map(|a| a * a).collect();
        let (m, se) = mean_se(&sq);
        assert!((m - 2.0).abs() < 3.0 * se, "{m} ± {se}");
    }

    #[test]
    fn rician_mean_matches_laguerre_form() {
        let h = RicianParams::new(1.0, 1.0).unwrap();
        let (m, se) = mean_se(&draws(&h, 1_000_000, 2));
        let want = h.mean_amplitude_laguerre().unwrap();
        assert!((m - want).abs() < 3.0 * se, "{m} vs {want} ± {se}");
    }

    #[test]
    fn strong_los_concentrates() {
        let h = RicianParams::new(1e8, 1.0).unwrap();
        let x = draws(&h, 100_000, 3);
        let (m, se) = mean_se(&x);
        let var = se * se * x.len() as f64;
        assert!(var < 1e-6);
        assert!((m - 1.0).abs() < 1e-3);
    }

    fn config(n: u32, k: f64, gamma_bar: f64, trials: u64, workers: usize) -> SimConfig {
        let hop = RicianParams::from_sigma2(k, 0.5).unwrap();
        SimConfig {
            link: CascadedLink::new(hop, hop, n).unwrap(),
            gamma_bar,
            trials,
            seed: 7,
            workers,
            modulation: Modulation::BPSK,
        }
    }

    #[test]
    fn deterministic_link_gives_exact_snr() {
        let hop = RicianParams::new(f64::INFINITY, 1.0).unwrap();
        let cfg = SimConfig {
            link: CascadedLink::new(hop, hop, 1).unwrap(),
            gamma_bar: 1.0,
            trials: 1,
            seed: 0,
            workers: 1,
            modulation: Modulation::BPSK,
        };
        let s = simulate(&cfg, None).unwrap();
        assert_eq!(s.mean_snr, 1.0);
        assert_eq!(s.mean_capacity_nocsi, 1.0);
        assert_eq!(s.trials_used, 1);
        assert!(s.mean_capacity_csi.is_none() && s.power_expenditure.is_none());
        assert!(s.ks_distance_vs_model.is_none());
    }

    #[test]
    fn results_do_not_depend_on_worker_count() {
        let one = simulate(&config(3, 1.0, 10.0, 300_000, 1), Some(0.3)).unwrap();
        let four = simulate(&config(3, 1.0, 10.0, 300_000, 4), Some(0.3)).unwrap();
        assert_eq!(one, four);
        let again = simulate(&config(3, 1.0, 10.0, 300_000, 4), Some(0.3)).unwrap();
        assert_eq!(four, again);
    }

    #[test]
    fn shared_points_match_single_runs() {
        let cfg = config(2, 5.0, 1.0, 100_000, 2);
        let points = [
            SimPoint { gamma_bar: 1.0, gamma0: None },
            SimPoint { gamma_bar: 10.0, gamma0: Some(0.5) },
        ];
        let both = simulate_points(&cfg, &points).unwrap();
        let single = simulate(&SimConfig { gamma_bar: 10.0, ..cfg }, Some(0.5)).unwrap();
        assert_eq!(both[1], single);
    }

    #[test]
    fn sum_moments_match_formulas() {
        let cfg = config(5, 1.0, 1.0, 1_000_000, 1);
        let s = simulate(&cfg, None).unwrap();
        let e = 5.0 * mean_cascaded_element(&cfg.link.hop1, &cfg.link.hop2);
        let v = 5.0 * var_cascaded_element(&cfg.link.hop1, &cfg.link.hop2).unwrap();
        assert!((s.amplitude_mean - e).abs() < 4.0 * s.amplitude_mean_se);
        assert!((s.amplitude_var - v).abs() < 4.0 * s.amplitude_var_se);
        // the drawn amplitudes are the simulator's
        let xs = sample_sum_amplitudes(&cfg.link, 1_000_000, cfg.seed);
        let (m, _) = mean_se(&xs);
        assert!((m - s.amplitude_mean).abs() < 1e-12 * m);
    }

    #[test]
    fn ks_distance_behaviour() {
        let approx = GammaApprox::new(0.0, 1.0).unwrap();
        // exact quantiles of Exp(1) give the minimal distance 1/(2n)
        let n = 1000;
        let mut q: Vec<f64> = (0..n).map(|i| -(1.0 - (i as f64 + 0.5) / n as f64).ln()).collect();
        assert!((ks_distance(&mut q, &approx) - 0.5 / n as f64).abs() < 1e-12);
        let mut shifted: Vec<f64> = q.iter().map(|x| x + 10.0).collect();
        assert!(ks_distance(&mut shifted, &approx) > 0.99);
    }

    #[test]
    fn rejects_empty_runs() {
        assert!(simulate(&config(1, 1.0, 1.0, 0, 1), None).is_err());
        assert!(simulate(&config(1, 1.0, 1.0, 10, 0), None).is_err());
        assert!(simulate(&config(1, 1.0, 1.0, 10, 1), Some(-1.0)).is_err());
    }
}
