//! Dechirped IF data synthesis under the spatial-wideband and narrowband
//! models, with circularly-symmetric complex Gaussian noise.
//!
//! Rows of every matrix are virtual elements `q`, columns are fast-time
//! samples `n`. A unit-amplitude target with noise standard deviation
//! `sigma` has per-sample SNR `1 / sigma^2`, i.e. `SNR_dB = -20 log10(sigma)`.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::{RadarConfig, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::signature::{Signature, SignatureEntry};

/// Q x N complex IF samples together with the configuration that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct IfData {
    data: Array2<Complex64>,
    cfg: RadarConfig,
}

impl IfData {
    pub fn new(data: Array2<Complex64>, cfg: RadarConfig) -> Result<Self> {
        let expected = (cfg.num_elements, cfg.num_fast_time);
        if data.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: data.dim(),
            });
        }
        Ok(Self { data, cfg })
    }

    pub fn zeros(cfg: RadarConfig) -> Self {
        Self {
            data: Array2::zeros((cfg.num_elements, cfg.num_fast_time)),
            cfg,
        }
    }

    pub fn data(&self) -> &Array2<Complex64> {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut Array2<Complex64> {
        &mut self.data
    }

    pub fn into_data(self) -> Array2<Complex64> {
        self.data
    }

    pub fn cfg(&self) -> &RadarConfig {
        &self.cfg
    }

    /// Same configuration, new samples.
    pub fn with_data(&self, data: Array2<Complex64>) -> Result<Self> {
        Self::new(data, self.cfg)
    }

    /// (Q, N).
    pub fn dim(&self) -> (usize, usize) {
        self.data.dim()
    }

    pub fn energy(&self) -> f64 {
        energy(&self.data)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Squared Frobenius norm.
pub fn energy(m: &Array2<Complex64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// `exp(j 2 pi x)` with the argument reduced to one cycle first.
#[inline]
pub(crate) fn cis_cycles(x: f64) -> Complex64 {
    let frac = x - x.floor();
    Complex64::from_polar(1.0, 2.0 * PI * frac)
}

pub(crate) fn add_component(
    out: &mut Array2<Complex64>,
    entry: &SignatureEntry,
    coupling: f64,
    sign: f64,
) {
    let amp = entry.amplitude * sign;
    let sw = coupling * entry.omega_angle;
    for ((q, n), y) in out.indexed_iter_mut() {
        let (qf, nf) = (q as f64, n as f64);
        let cycles = entry.omega_range * nf + entry.omega_angle * qf + sw * qf * nf;
        *y += amp * cis_cycles(cycles);
    }
}

fn synthesize(
    scene: &Signature,
    cfg: &RadarConfig,
    noise_sigma: f64,
    seed: u64,
    coupling: f64,
) -> IfData {
    let (q, n) = (cfg.num_elements, cfg.num_fast_time);
    let mut data = Array2::zeros((q, n));
    for entry in scene {
        add_component(&mut data, entry, coupling, 1.0);
    }
    if noise_sigma > 0.0 {
        add_noise(&mut data, noise_sigma, seed);
    }
    IfData { data, cfg: *cfg }
}

/// Adds CN(0, sigma^2) noise from one ChaCha8 stream seeded by `seed`,
/// filled row-major (q outer, n inner), real part drawn before imaginary.
pub fn add_noise(data: &mut Array2<Complex64>, noise_sigma: f64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = noise_sigma / std::f64::consts::SQRT_2;
    for y in data.iter_mut() {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        *y += Complex64::new(re * scale, im * scale);
    }
}

/// IF data with the time-antenna coupled spatial-wideband term.
pub fn synthesize_wideband(scene: &Signature, cfg: &RadarConfig, noise_sigma: f64, seed: u64) -> IfData {
    let coupling = cfg.frac_bandwidth / cfg.num_fast_time as f64;
    synthesize(scene, cfg, noise_sigma, seed, coupling)
}

/// IF data under the narrowband (pure 2D tone) model.
pub fn synthesize_narrowband(scene: &Signature, cfg: &RadarConfig, noise_sigma: f64, seed: u64) -> IfData {
    synthesize(scene, cfg, noise_sigma, seed, 0.0)
}

/// Noise standard deviation giving the requested per-sample SNR for a
/// unit-amplitude target.
pub fn sigma_for_snr_db(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 20.0)
}

/// Worst-case (sin theta = 1) magnitudes of the two quadratic phase terms
/// dropped from the IF model: the range/aperture cross term
/// `2 pi gamma 2 R Q d / c^2` and the aperture-squared term
/// `pi gamma Q^2 d^2 / c^2`.
pub fn quadratic_phase_bound(cfg: &RadarConfig, max_range_m: f64) -> (f64, f64) {
    let gamma = cfg.chirp_slope();
    let aperture = cfg.num_elements as f64 * cfg.element_spacing_m;
    let c2 = SPEED_OF_LIGHT * SPEED_OF_LIGHT;
    let cross = 2.0 * PI * gamma * 2.0 * max_range_m * aperture / c2;
    let q2 = PI * gamma * aperture * aperture / c2;
    (cross, q2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(r: f64, a: f64, amp: Complex64) -> SignatureEntry {
        SignatureEntry::new(r, a, amp)
    }

    #[test]
    fn empty_scene_is_zero() {
        let cfg = RadarConfig::reference();
        let y = synthesize_wideband(&Signature::empty(), &cfg, 0.0, 1);
        assert_eq!(y.energy(), 0.0);
    }

    #[test]
    fn broadside_target_has_no_angle_phase() {
        let cfg = RadarConfig::reference();
        let s = Signature::new(vec![entry(0.25, 0.0, Complex64::new(1.0, 0.0))]).unwrap();
        let y = synthesize_wideband(&s, &cfg, 0.0, 0);
        for ((_, n), v) in y.data().indexed_iter() {
            let want = cis_cycles(0.25 * n as f64);
            assert!((v - want).norm() < 1e-12);
        }
    }

    #[test]
    fn origin_sample_is_amplitude_sum() {
        let cfg = RadarConfig::reference();
        let a = Complex64::new(0.3, -0.7);
        let b = Complex64::new(-1.1, 0.2);
        let s = Signature::new(vec![entry(0.3, 0.1, a), entry(0.7, -0.3, b)]).unwrap();
        let y = synthesize_wideband(&s, &cfg, 0.0, 0);
        assert!((y.data()[(0, 0)] - (a + b)).norm() < 1e-14);
    }

    #[test]
    fn narrowband_equals_wideband_at_zero_alpha() {
        let cfg = RadarConfig::new(77e9, 0.0, 32, 16).unwrap();
        let s = Signature::new(vec![entry(0.3, 0.2, Complex64::new(1.0, 0.5))]).unwrap();
        let a = synthesize_wideband(&s, &cfg, 0.3, 9);
        let b = synthesize_narrowband(&s, &cfg, 0.3, 9);
        assert_eq!(a, b);
    }

    #[test]
    fn noise_variance_matches_sigma() {
        let cfg = RadarConfig::reference();
        let y = synthesize_wideband(&Signature::empty(), &cfg, 2.0, 42);
        let var = y.energy() / (128.0 * 128.0);
        assert!((var - 4.0).abs() < 0.15, "{var}");
        let mean: Complex64 = y.data().iter().sum::<Complex64>() / (128.0 * 128.0);
        assert!(mean.norm() < 0.05);
    }

    #[test]
    fn seed_determinism() {
        let cfg = RadarConfig::reference();
        let s = Signature::new(vec![entry(0.3, 0.2, Complex64::new(1.0, 0.0))]).unwrap();
        assert_eq!(
            synthesize_wideband(&s, &cfg, 0.5, 7),
            synthesize_wideband(&s, &cfg, 0.5, 7)
        );
        assert_ne!(
            synthesize_wideband(&s, &cfg, 0.5, 7),
            synthesize_wideband(&s, &cfg, 0.5, 8)
        );
    }

    #[test]
    fn snr_convention() {
        assert!((sigma_for_snr_db(20.0) - 0.1).abs() < 1e-15);
        assert!((sigma_for_snr_db(0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn term_two_bound_at_reported_parameters() {
        // gamma = 100 MHz/us, Q = 128, d = lambda/2 at 77 GHz, R = 20 m.
        let cfg = RadarConfig::reference();
        assert!((cfg.chirp_slope() - 1e14).abs() < 1.0);
        let (cross, q2) = quadratic_phase_bound(&cfg, 20.0);
        assert!((cross - 0.0697).abs() < 1e-3, "{cross}");
        assert!((q2 - 2.17e-4).abs() < 1e-5, "{q2}");
        let (cross2, q2b) = quadratic_phase_bound(&cfg, 40.0);
        assert!((cross2 - 2.0 * cross).abs() < 1e-15);
        assert_eq!(q2b, q2);
    }

    #[test]
    fn zero_slope_has_zero_bound() {
        let mut cfg = RadarConfig::new(77e9, 0.0, 128, 128).unwrap();
        cfg.chirp_duration_s = 1e-4;
        assert_eq!(quadratic_phase_bound(&cfg, 20.0), (0.0, 0.0));
    }
}
