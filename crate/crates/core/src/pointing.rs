//! Random pointing error model.
//!
//! Elevation and azimuth errors on each side of the link are independent,
//! zero-mean Gaussians with a common per-axis standard deviation σ, so the
//! radial error `ψ = √(ψ_e² + ψ_a²)` is Rayleigh(σ). Two facts give the
//! closed-form oracles used throughout:
//!
//! * `E[ψ] = σ √(π/2)`
//! * `ψ²` is exponential with mean `2σ²`, so `E[exp(-Gψ²)] = 1 / (1 + 2Gσ²)`.
//!
//! # Sampling
//!
//! Draws are counter based. Every `(seed, side, axis, index)` maps to one
//! value: the seed keys a ChaCha8 generator, `(side, axis)` picks one of its
//! 2⁶⁴ streams and the sample index fixes the word position. Work can then
//! be split across threads by index range and still reproduce the serial
//! result bit for bit. Reductions sum fixed-size chunks and then add the
//! chunk sums in index order, so totals do not depend on the thread count.

use std::f64::consts::{FRAC_PI_2, PI};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{non_negative, positive, Error, Result};

/// Pointing resolution without an ATP module.
pub const RESOLUTION_NO_ATP_RAD: f64 = 5e-6;
/// Pointing resolution with an ATP module.
pub const RESOLUTION_ATP_RAD: f64 = 0.5e-6;

/// Samples handled by one unit of parallel work.
const CHUNK: usize = 1 << 14;
/// ChaCha words consumed per Gaussian draw (two u64).
const WORDS_PER_DRAW: u128 = 4;

/// Per-axis pointing jitter at both ends of the link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointingJitter {
    pub sigma_t_rad: f64,
    pub sigma_r_rad: f64,
    /// Informational only; the sigmas carry the effect.
    pub atp_enabled: bool,
}

impl PointingJitter {
    pub fn new(sigma_t_rad: f64, sigma_r_rad: f64, atp_enabled: bool) -> Result<Self> {
        Ok(Self {
            sigma_t_rad: non_negative("sigma_t_rad", sigma_t_rad)?,
            sigma_r_rad: non_negative("sigma_r_rad", sigma_r_rad)?,
            atp_enabled,
        })
    }

    pub fn perfect() -> Self {
        Self {
            sigma_t_rad: 0.0,
            sigma_r_rad: 0.0,
            atp_enabled: true,
        }
    }

    /// Maps pointing resolutions to per-axis sigmas, `σ = factor × resolution`.
    pub fn from_resolution(
        resolution_t_rad: f64,
        resolution_r_rad: f64,
        factor: f64,
        atp_enabled: bool,
    ) -> Result<Self> {
        let factor = non_negative("resolution_to_sigma_factor", factor)?;
        Self::new(
            factor * non_negative("resolution_t_rad", resolution_t_rad)?,
            factor * non_negative("resolution_r_rad", resolution_r_rad)?,
            atp_enabled,
        )
    }

    /// Jitter whose mean radial errors are `psi_t_rad` and `psi_r_rad`.
    pub fn from_mean_radial(psi_t_rad: f64, psi_r_rad: f64, atp_enabled: bool) -> Result<Self> {
        let scale = FRAC_PI_2.sqrt();
        Self::new(
            non_negative("mean_radial_t_rad", psi_t_rad)? / scale,
            non_negative("mean_radial_r_rad", psi_r_rad)? / scale,
            atp_enabled,
        )
    }

    pub fn sigma(&self, side: Side) -> f64 {
        match side {
            Side::Transmitter => self.sigma_t_rad,
            Side::Receiver => self.sigma_r_rad,
        }
    }

    pub fn is_perfect(&self) -> bool {
        self.sigma_t_rad == 0.0 && self.sigma_r_rad == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    Transmitter,
    Receiver,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Axis {
    Elevation,
    Azimuth,
}

fn stream_id(side: Side, axis: Axis) -> u64 {
    let s = match side {
        Side::Transmitter => 0,
        Side::Receiver => 1,
    };
    let a = match axis {
        Axis::Elevation => 0,
        Axis::Azimuth => 1,
    };
    2 * s + a
}

/// Standard-normal draws addressed by sample index.
#[derive(Debug, Clone)]
pub struct AxisStream {
    rng: ChaCha8Rng,
}

impl AxisStream {
    pub fn new(seed: u64, side: Side, axis: Axis) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id(side, axis));
        Self { rng }
    }

    /// Fills `out` with the unit-variance draws for indices `start..start + out.len()`.
    pub fn fill_standard(&self, start: u64, out: &mut [f64]) {
        let mut rng = self.rng.clone();
        rng.set_word_pos(u128::from(start) * WORDS_PER_DRAW);
        for z in out.iter_mut() {
            *z = box_muller(rng.next_u64(), rng.next_u64());
        }
    }

    pub fn standard_at(&self, index: u64) -> f64 {
        let mut z = [0.0];
        self.fill_standard(index, &mut z);
        z[0]
    }
}

// Uses only the cosine branch so each draw costs exactly two words.
fn box_muller(a: u64, b: u64) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    let u1 = ((a >> 11) as f64 + 1.0) * SCALE; // (0, 1]
    let u2 = (b >> 11) as f64 * SCALE; // [0, 1)
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Radial error from its elevation and azimuth components.
pub fn radial_from_axes(elev: f64, azim: f64) -> f64 {
    (elev * elev + azim * azim).sqrt()
}

/// Both axis streams of one side of the link.
#[derive(Debug, Clone)]
pub struct RadialSampler {
    elevation: AxisStream,
    azimuth: AxisStream,
}

impl RadialSampler {
    pub fn new(seed: u64, side: Side) -> Self {
        Self {
            elevation: AxisStream::new(seed, side, Axis::Elevation),
            azimuth: AxisStream::new(seed, side, Axis::Azimuth),
        }
    }

    /// Radial errors for `sigma` at indices `start..start + out.len()`.
    pub fn fill(&self, sigma: f64, start: u64, out: &mut [f64]) {
        let mut azim = vec![0.0; out.len()];
        self.elevation.fill_standard(start, out);
        self.azimuth.fill_standard(start, &mut azim);
        for (psi, a) in out.iter_mut().zip(&azim) {
            *psi = radial_from_axes(sigma * *psi, sigma * a);
        }
    }

    /// `n` radial errors, computed in parallel.
    pub fn sample(&self, sigma: f64, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
            self.fill(sigma, (c * CHUNK) as u64, chunk);
        });
        out
    }

    /// Sample means of `exp(-G ψ²)` for each `(gain, sigma)` pair over the
    /// same `n` draws. Each entry equals what a single-pair call would return.
    pub fn mean_losses(&self, pairs: &[(f64, f64)], n: usize) -> Vec<f64> {
        let chunks = n.div_ceil(CHUNK);
        let partials: Vec<Vec<f64>> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let start = c * CHUNK;
                let len = CHUNK.min(n - start);
                let mut elev = vec![0.0; len];
                let mut azim = vec![0.0; len];
                self.elevation.fill_standard(start as u64, &mut elev);
                self.azimuth.fill_standard(start as u64, &mut azim);
                pairs
                    .iter()
                    .map(|&(gain, sigma)| {
                        elev.iter()
                            .zip(&azim)
                            .map(|(e, a)| {
                                let psi = radial_from_axes(sigma * e, sigma * a);
                                (-gain * psi * psi).exp()
                            })
                            .sum::<f64>()
                    })
                    .collect()
            })
            .collect();
        (0..pairs.len())
            .map(|k| partials.iter().map(|p| p[k]).sum::<f64>() / n as f64)
            .collect()
    }
}

/// Sums `f(i)` for `i in 0..n` with a chunked, thread-count independent order.
pub(crate) fn deterministic_sum<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let partials: Vec<f64> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| (c * CHUNK..n.min((c + 1) * CHUNK)).map(&f).sum())
        .collect();
    partials.iter().sum()
}

fn require_samples(n: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::Domain {
            name: "n",
            reason: "at least one sample is required",
            value: 0.0,
        });
    }
    Ok(n)
}

/// `n` zero-mean Gaussian axis errors with standard deviation `sigma`
/// (transmitter elevation stream of `seed`).
pub fn sample_axis_errors(sigma: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    let sigma = non_negative("sigma", sigma)?;
    let n = require_samples(n)?;
    let stream = AxisStream::new(seed, Side::Transmitter, Axis::Elevation);
    let mut out = vec![0.0; n];
    out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
        stream.fill_standard((c * CHUNK) as u64, chunk);
        chunk.iter_mut().for_each(|z| *z *= sigma);
    });
    Ok(out)
}

/// `n` Rayleigh radial errors built from two independent axis streams
/// (transmitter side of `seed`).
pub fn sample_radial(sigma: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    let sigma = non_negative("sigma", sigma)?;
    let n = require_samples(n)?;
    Ok(RadialSampler::new(seed, Side::Transmitter).sample(sigma, n))
}

/// Sampled radial errors for both ends of the link.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JitterSampleSet {
    pub seed: u64,
    pub n_samples: usize,
    pub radial_angles_t: Vec<f64>,
    pub radial_angles_r: Vec<f64>,
    pub mean_radial_t: f64,
    pub mean_radial_r: f64,
}

impl JitterSampleSet {
    pub fn draw(jitter: &PointingJitter, n: usize, seed: u64) -> Result<Self> {
        let n = require_samples(n)?;
        let radial_angles_t = RadialSampler::new(seed, Side::Transmitter).sample(jitter.sigma_t_rad, n);
        let radial_angles_r = RadialSampler::new(seed, Side::Receiver).sample(jitter.sigma_r_rad, n);
        let mean_radial_t = deterministic_sum(n, |i| radial_angles_t[i]) / n as f64;
        let mean_radial_r = deterministic_sum(n, |i| radial_angles_r[i]) / n as f64;
        Ok(Self {
            seed,
            n_samples: n,
            radial_angles_t,
            radial_angles_r,
            mean_radial_t,
            mean_radial_r,
        })
    }

    /// Sample mean of `exp(-g_t ψ_t²) exp(-g_r ψ_r²)`.
    pub fn mean_joint_loss(&self, g_t: f64, g_r: f64) -> f64 {
        let (t, r) = (&self.radial_angles_t, &self.radial_angles_r);
        deterministic_sum(self.n_samples, |i| {
            (-g_t * t[i] * t[i]).exp() * (-g_r * r[i] * r[i]).exp()
        }) / self.n_samples as f64
    }

    /// `(joint, transmitter, receiver)` sample-mean losses in one pass.
    pub fn mean_losses_split(&self, g_t: f64, g_r: f64) -> (f64, f64, f64) {
        let (t, r) = (&self.radial_angles_t, &self.radial_angles_r);
        let n = self.n_samples;
        let partials: Vec<[f64; 3]> = (0..n.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let mut acc = [0.0; 3];
                for i in c * CHUNK..n.min((c + 1) * CHUNK) {
                    let lt = (-g_t * t[i] * t[i]).exp();
                    let lr = (-g_r * r[i] * r[i]).exp();
                    acc[0] += lt * lr;
                    acc[1] += lt;
                    acc[2] += lr;
                }
                acc
            })
            .collect();
        let mut total = [0.0; 3];
        for p in &partials {
            for k in 0..3 {
                total[k] += p[k];
            }
        }
        let n = n as f64;
        (total[0] / n, total[1] / n, total[2] / n)
    }

    pub fn mean_loss(&self, side: Side, gain: f64) -> f64 {
        let psi = match side {
            Side::Transmitter => &self.radial_angles_t,
            Side::Receiver => &self.radial_angles_r,
        };
        deterministic_sum(self.n_samples, |i| (-gain * psi[i] * psi[i]).exp()) / self.n_samples as f64
    }
}

/// Rayleigh density with scale `sigma`.
pub fn rayleigh_pdf(psi: f64, sigma: f64) -> Result<f64> {
    let psi = non_negative("psi", psi)?;
    let sigma = positive("sigma", sigma)?;
    let s2 = sigma * sigma;
    Ok(psi / s2 * (-psi * psi / (2.0 * s2)).exp())
}

/// Rayleigh distribution function with scale `sigma`.
pub fn rayleigh_cdf(psi: f64, sigma: f64) -> Result<f64> {
    let psi = non_negative("psi", psi)?;
    let sigma = positive("sigma", sigma)?;
    Ok(-(-psi * psi / (2.0 * sigma * sigma)).exp_m1())
}

/// Closed-form `E[exp(-G ψ²)]` for Rayleigh(σ) radial errors.
pub fn expected_misalignment_loss(gain: f64, sigma: f64) -> f64 {
    1.0 / (1.0 + 2.0 * gain * sigma * sigma)
}

/// Mean of the Rayleigh(σ) radial error.
pub fn mean_radial_angle(sigma: f64) -> f64 {
    sigma * FRAC_PI_2.sqrt()
}

/// Monte Carlo estimate of `E[exp(-G ψ²)]` from `n` transmitter-side draws.
pub fn mc_expected_loss(gain: f64, sigma: f64, n: usize, seed: u64) -> Result<f64> {
    let gain = non_negative("gain", gain)?;
    let sigma = non_negative("sigma", sigma)?;
    let n = require_samples(n)?;
    Ok(RadialSampler::new(seed, Side::Transmitter).mean_losses(&[(gain, sigma)], n)[0])
}

/// One-sample Kolmogorov-Smirnov statistic of `samples` against Rayleigh(σ).
pub fn ks_statistic_rayleigh(samples: &[f64], sigma: f64) -> Result<f64> {
    let sigma = positive("sigma", sigma)?;
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = rayleigh_cdf(x, sigma)?;
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(d)
}

/// Asymptotic one-sample KS critical value at significance 0.01.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.627_624 / (n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    // Composite Simpson over [a, b]; independent of the closed forms above.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn zero_sigma_is_degenerate() {
        assert!(sample_axis_errors(0.0, 1000, 3).unwrap().iter().all(|&z| z == 0.0));
        assert!(sample_radial(0.0, 1000, 3).unwrap().iter().all(|&z| z == 0.0));
        assert_eq!(mean_radial_angle(0.0), 0.0);
        assert_eq!(expected_misalignment_loss(5e14, 0.0), 1.0);
    }

    #[test]
    fn zero_samples_rejected() {
        assert!(sample_axis_errors(1e-6, 0, 1).is_err());
        assert!(sample_radial(1e-6, 0, 1).is_err());
        assert!(mc_expected_loss(1.0, 1e-6, 0, 1).is_err());
    }

    #[test]
    fn axis_errors_are_seed_deterministic() {
        let a = sample_axis_errors(2e-6, 50_000, 11).unwrap();
        let b = sample_axis_errors(2e-6, 50_000, 11).unwrap();
        let c = sample_axis_errors(2e-6, 50_000, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn index_addressing_matches_bulk() {
        let stream = AxisStream::new(5, Side::Receiver, Axis::Azimuth);
        let mut bulk = vec![0.0; 40_000];
        stream.fill_standard(0, &mut bulk);
        for i in [0usize, 1, 16_383, 16_384, 39_999] {
            assert_eq!(stream.standard_at(i as u64), bulk[i]);
        }
    }

    #[test]
    fn axis_sigma_matches() {
        let z = sample_axis_errors(5e-6, 1_000_000, 2024).unwrap();
        let n = z.len() as f64;
        let mean = z.iter().sum::<f64>() / n;
        let sd = (z.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!(rel(sd, 5e-6) < 5e-3, "sd {sd}");
        assert!(mean.abs() < 5e-6 * 5.0 / n.sqrt());
    }

    #[test]
    fn radial_from_axes_examples() {
        assert_eq!(radial_from_axes(3.0, 4.0), 5.0);
        assert_eq!(radial_from_axes(0.0, 0.0), 0.0);
        assert_eq!(radial_from_axes(-2.5, 0.0), 2.5);
    }

    #[test]
    fn rayleigh_pdf_examples() {
        let s = 3e-6;
        assert_eq!(rayleigh_pdf(0.0, s).unwrap(), 0.0);
        assert!(rel(rayleigh_pdf(s, s).unwrap(), (-0.5f64).exp() / s) < 1e-14);
        let total = simpson(|p| rayleigh_pdf(p, s).unwrap(), 0.0, 8.0 * s, 4000);
        assert!((total - 1.0).abs() < 1e-6, "{total}");
        assert!(rayleigh_pdf(1.0, 0.0).is_err());
    }

    #[test]
    fn mean_radial_against_quadrature() {
        for sigma in [5e-6, 0.5e-6] {
            let quad = simpson(|p| p * rayleigh_pdf(p, sigma).unwrap(), 0.0, 12.0 * sigma, 6000);
            assert!(rel(mean_radial_angle(sigma), quad) < 1e-9);
        }
        assert!(rel(mean_radial_angle(5e-6), 6.266_570_686_577_501e-6) < 1e-12);
        assert!(rel(mean_radial_angle(0.5e-6), 6.266_570_686_577_501e-7) < 1e-12);
    }

    #[test]
    fn expected_loss_against_quadrature() {
        let s = 1e-6;
        let g = 1.0 / (2.0 * s * s);
        assert!(rel(expected_misalignment_loss(g, s), 0.5) < 1e-15);
        for (g, s) in [(g, s), (5.55e14, 0.5e-6), (3e12, 2e-7), (1e9, 1e-5)] {
            let quad = simpson(
                |p| (-g * p * p).exp() * rayleigh_pdf(p, s).unwrap(),
                0.0,
                12.0 * s,
                20_000,
            );
            assert!(rel(expected_misalignment_loss(g, s), quad) < 1e-6, "{g} {s}");
        }
        // mpmath quadrature: 3.590664272890484e-3
        assert!(rel(expected_misalignment_loss(5.55e14, 0.5e-6), 3.590_664_272_890_484e-3) < 1e-12);
    }

    #[test]
    fn rayleigh_moments() {
        let sigma = 5e-6;
        let psi = sample_radial(sigma, 1_000_000, 77).unwrap();
        let n = psi.len() as f64;
        let m1 = psi.iter().sum::<f64>() / n;
        let m2 = psi.iter().map(|p| p * p).sum::<f64>() / n;
        assert!(rel(m1, mean_radial_angle(sigma)) < 2e-3, "{m1}");
        assert!(rel(m2, 2.0 * sigma * sigma) < 5e-3, "{m2}");
    }

    #[test]
    fn ks_accepts_rayleigh_and_rejects_wrong_scale() {
        let psi = sample_radial(1e-6, 100_000, 9).unwrap();
        let crit = ks_critical_1pct(psi.len());
        assert!(ks_statistic_rayleigh(&psi, 1e-6).unwrap() < crit);
        assert!(ks_statistic_rayleigh(&psi, 1.05e-6).unwrap() > crit);
    }

    #[test]
    fn axis_streams_uncorrelated() {
        let mut e = vec![0.0; 1_000_000];
        let mut a = vec![0.0; 1_000_000];
        AxisStream::new(31, Side::Transmitter, Axis::Elevation).fill_standard(0, &mut e);
        AxisStream::new(31, Side::Transmitter, Axis::Azimuth).fill_standard(0, &mut a);
        let n = e.len() as f64;
        let (me, ma) = (e.iter().sum::<f64>() / n, a.iter().sum::<f64>() / n);
        let cov: f64 = e.iter().zip(&a).map(|(x, y)| (x - me) * (y - ma)).sum();
        let ve: f64 = e.iter().map(|x| (x - me).powi(2)).sum();
        let va: f64 = a.iter().map(|y| (y - ma).powi(2)).sum();
        let rho = cov / (ve * va).sqrt();
        assert!(rho.abs() < 0.01, "rho {rho}");
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| {
                    let jitter = PointingJitter::new(1e-7, 3e-8, false).unwrap();
                    let set = JitterSampleSet::draw(&jitter, 100_003, 4).unwrap();
                    (set.mean_joint_loss(1e14, 1e12), set.mean_radial_t, set.radial_angles_r)
                })
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn single_and_batch_estimates_agree() {
        let pairs = [(1e12, 1e-6), (5e14, 3e-8)];
        let batch = RadialSampler::new(8, Side::Transmitter).mean_losses(&pairs, 70_000);
        for (k, &(g, s)) in pairs.iter().enumerate() {
            assert_eq!(batch[k], mc_expected_loss(g, s, 70_000, 8).unwrap());
        }
    }

    #[test]
    fn jitter_constructors() {
        let j = PointingJitter::from_resolution(5e-6, 5e-6, 1.0, false).unwrap();
        assert_eq!((j.sigma_t_rad, j.sigma_r_rad), (5e-6, 5e-6));
        let j = PointingJitter::from_mean_radial(9.035e-8, 0.0, false).unwrap();
        assert!(rel(mean_radial_angle(j.sigma_t_rad), 9.035e-8) < 1e-15);
        assert!(PointingJitter::new(-1.0, 0.0, false).is_err());
        assert!(PointingJitter::perfect().is_perfect());
    }

    proptest! {
        #[test]
        fn sample_mean_loss_tracks_closed_form(log_g in 8.0f64..15.0, m in 0.01f64..5.0, seed in 0u64..1000) {
            let g = 10f64.powf(log_g);
            let sigma = (m / (2.0 * g)).sqrt();
            let mc = mc_expected_loss(g, sigma, 200_000, seed).unwrap();
            // 5 standard errors of exp(-X), X ~ Exp(mean m)
            let rel_sd = m / (1.0 + 2.0 * m).sqrt() / (200_000f64).sqrt();
            prop_assert!(rel(mc, expected_misalignment_loss(g, sigma)) < 5.0 * rel_sd + 1e-12);
        }

        #[test]
        fn both_loss_forms_tend_to_one(g in 1e8f64..1e15, frac in 0.0f64..1.0) {
            // keeps 2 G sigma^2 <= 100 so neither form underflows
            let sigma = frac * (50.0 / g).sqrt();
            let mean_angle = (-g * mean_radial_angle(sigma).powi(2)).exp();
            let expectation = expected_misalignment_loss(g, sigma);
            prop_assert!(mean_angle > 0.0 && mean_angle <= 1.0);
            prop_assert!(expectation > 0.0 && expectation <= 1.0);
            let tiny = 1e-6 / g.sqrt();
            prop_assert!(1.0 - (-g * mean_radial_angle(tiny).powi(2)).exp() < 1e-9);
            prop_assert!(1.0 - expected_misalignment_loss(g, tiny) < 1e-9);
        }
    }
}
