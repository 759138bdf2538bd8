//! Coarse-to-fine signature estimation.
//!
//! 1. 2D DFT of the IF data and block peak search give the target count
//!    and bin-level range/angle frequencies.
//! 2. For each peak, strongest first: de-rotate the working matrix by the
//!    coarse angle's wideband phase, isolate the target, refine both
//!    frequencies with sparsity-1 2D-OMP on an oversampled dictionary,
//!    estimate the amplitude by wideband projection of the original data
//!    and subtract the reconstructed target from the working matrix.

use num_complex::Complex64;

use crate::cs::{
    estimate_coefficient, oversampled_dictionaries, refine_single, refine_single_local, DictionaryPair,
};
use crate::compensate::{compensate, gate, GatePolicy, DEFAULT_MASK_FRACTION};
use crate::config::RadarConfig;
use crate::cs::eliminate;
use crate::error::{Error, Result};
use crate::signature::{Signature, SignatureEntry};
use crate::synth::IfData;
use crate::transform::{coarse_signature, dft2, find_peaks, peak_threshold, PeakParams};

pub const DEFAULT_OVERSAMPLE: usize = 8;
pub const DEFAULT_REFINE_PASSES: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineParams {
    /// Dictionary oversampling relative to the DFT grid.
    pub oversample: usize,
    pub peaks: PeakParams,
    pub gate: GatePolicy,
    /// When false the wideband phase is never removed (Theta = 1).
    pub compensate: bool,
    /// Compensate/refine rounds per target. The first round uses the
    /// coarse angle, later rounds the previous refined angle.
    pub refine_passes: usize,
    /// Also try the coarse angle shifted by one period when the block of a
    /// near-endfire target has migrated across the +-0.5 boundary; the
    /// candidate capturing more energy wins.
    pub unwrap_angle: bool,
    /// Skip a coarse peak whose bin no longer clears the detection
    /// threshold once the stronger targets have been eliminated.
    pub revalidate: bool,
    /// Search only the dictionary atoms inside the gate window instead of
    /// the whole grid.
    pub local_search: bool,
}

impl PipelineParams {
    pub fn for_config(cfg: &RadarConfig) -> Self {
        let peaks = PeakParams::for_config(cfg);
        Self {
            oversample: DEFAULT_OVERSAMPLE,
            peaks,
            gate: GatePolicy::SpectralMask {
                mask_fraction: DEFAULT_MASK_FRACTION,
                neighborhood: peaks.max_exclusion(),
            },
            compensate: true,
            refine_passes: DEFAULT_REFINE_PASSES,
            unwrap_angle: true,
            revalidate: true,
            local_search: true,
        }
    }

    /// One compensation with the coarse angle for every coarse peak.
    pub fn single_pass(cfg: &RadarConfig) -> Self {
        Self {
            refine_passes: 1,
            unwrap_angle: false,
            revalidate: false,
            ..Self::for_config(cfg)
        }
    }
}

/// Coarse angles worth compensating with. A block centred near
/// `omega (1 + alpha / 2)` can exceed 0.5 and alias to the other end.
fn angle_candidates(coarse: f64, cfg: &RadarConfig, unwrap: bool) -> Vec<f64> {
    let mut out = vec![coarse];
    if unwrap {
        let reach = 0.5 * (1.0 + cfg.frac_bandwidth);
        let alt = coarse - coarse.signum();
        if coarse != 0.0 && alt.abs() < reach && alt.abs() > 0.5 - cfg.frac_bandwidth {
            out.push(alt);
        }
    }
    out
}

/// Per-target trace of one estimation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetLog {
    /// (angle bin, range bin) of the coarse peak.
    pub coarse_bin: (usize, usize),
    /// (omega_range, omega_angle) from the DFT grid.
    pub coarse: (f64, f64),
    /// (omega_range, omega_angle) after refinement.
    pub refined: (f64, f64),
    pub coefficient: Complex64,
    /// Working-matrix energy after this target was eliminated.
    pub residual_energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationReport {
    pub estimated: Signature,
    pub per_target_log: Vec<TargetLog>,
    pub parameters: PipelineParams,
}

/// Reusable estimator holding the dictionaries for one configuration.
#[derive(Debug, Clone)]
pub struct SignatureEstimator {
    cfg: RadarConfig,
    params: PipelineParams,
    dict: DictionaryPair,
}

impl SignatureEstimator {
    pub fn new(cfg: &RadarConfig, params: PipelineParams) -> Result<Self> {
        let dict = oversampled_dictionaries(params.oversample, cfg)?;
        Ok(Self {
            cfg: *cfg,
            params,
            dict,
        })
    }

    pub fn dictionaries(&self) -> &DictionaryPair {
        &self.dict
    }

    pub fn params(&self) -> &PipelineParams {
        &self.params
    }

    /// Compensate, gate and refine one target of the working matrix,
    /// starting from `(omega_range, omega_angle)`.
    fn refine(&self, working: &IfData, bin: (usize, usize), start: (f64, f64)) -> Result<(f64, f64)> {
        let mut est = start;
        for _ in 0..self.params.refine_passes.max(1) {
            let compensated = if self.params.compensate {
                compensate(working, est.1, &self.cfg)
            } else {
                working.clone()
            };
            let isolated = gate(&compensated, bin, &self.params.gate);
            let found = match (self.params.local_search, self.params.gate) {
                (true, GatePolicy::SpectralMask { neighborhood, .. }) => {
                    let hw = (neighborhood.0.max(1), neighborhood.1.max(1));
                    refine_single_local(&isolated, &self.dict, bin, hw)
                }
                _ => refine_single(&isolated, &self.dict),
            };
            est = match found {
                Ok(f) => f,
                Err(Error::NoSignal) => return Ok((est.0, est.1 - (est.1 + 0.5).floor())),
                Err(e) => return Err(e),
            };
            if !self.params.compensate {
                break;
            }
        }
        Ok(est)
    }

    pub fn estimate(&self, y: &IfData) -> Result<EstimationReport> {
        if !y.is_finite() {
            return Err(Error::NonFinite);
        }
        let cfg = &self.cfg;
        let map = dft2(y);
        let peaks = find_peaks(&map, &self.params.peaks);
        let threshold = peak_threshold(&map, &self.params.peaks);
        let coarse = coarse_signature(&peaks, cfg)?;

        let mut working = y.clone();
        let mut estimated = Signature::empty();
        let mut log = Vec::with_capacity(peaks.count());
        let nb = cfg.with_frac_bandwidth(0.0)?;
        let model = if self.params.compensate { cfg } else { &nb };
        for (k, (peak, c)) in peaks.peaks.iter().zip(coarse.iter()).enumerate() {
            if k > 0 && self.params.revalidate && dft2(&working).power()[(peak.u, peak.v)] <= threshold {
                continue;
            }
            let mut best: Option<(f64, f64, f64)> = None;
            for start in angle_candidates(c.omega_angle, cfg, self.params.compensate && self.params.unwrap_angle) {
                let (omega_range, omega_angle) = self.refine(&working, (peak.u, peak.v), (c.omega_range, start))?;
                let captured = estimate_coefficient(&working, omega_range, omega_angle, model).norm();
                if best.is_none_or(|b| captured > b.0) {
                    best = Some((captured, omega_range, omega_angle));
                }
            }
            let (_, omega_range, omega_angle) = best.expect("at least one candidate");
            let amplitude = estimate_coefficient(y, omega_range, omega_angle, model);
            let entry = SignatureEntry::new(omega_range, omega_angle, amplitude);
            working = eliminate(&working, &entry, model);
            log.push(TargetLog {
                coarse_bin: (peak.u, peak.v),
                coarse: (c.omega_range, c.omega_angle),
                refined: (omega_range, omega_angle),
                coefficient: amplitude,
                residual_energy: working.energy(),
            });
            // two peaks refining onto the same atom yield one estimate
            let _ = estimated.push(entry);
        }
        Ok(EstimationReport {
            estimated,
            per_target_log: log,
            parameters: self.params,
        })
    }
}

pub fn estimate_signature(y: &IfData, cfg: &RadarConfig, params: &PipelineParams) -> Result<EstimationReport> {
    SignatureEstimator::new(cfg, *params)?.estimate(y)
}
