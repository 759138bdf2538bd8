//! 2D DFT of the IF data, block peak search and coarse signature extraction.
//!
//! Map row `u` is the angle bin, column `v` the range bin. The transform is
//! unnormalized.

use std::cmp::Ordering;
use std::fmt::Write as _;

use ndarray::Array2;
use num_complex::Complex64;

use crate::config::RadarConfig;
use crate::error::Result;
use crate::fft;
use crate::signature::{Signature, SignatureEntry};
use crate::synth::IfData;

#[derive(Debug, Clone, PartialEq)]
pub struct RangeAngleMap {
    spectrum: Array2<Complex64>,
    power: Array2<f64>,
}

impl RangeAngleMap {
    pub fn from_spectrum(spectrum: Array2<Complex64>) -> Self {
        let power = spectrum.mapv(|z| z.norm_sqr());
        Self { spectrum, power }
    }

    pub fn spectrum(&self) -> &Array2<Complex64> {
        &self.spectrum
    }

    pub fn power(&self) -> &Array2<f64> {
        &self.power
    }

    pub fn dim(&self) -> (usize, usize) {
        self.spectrum.dim()
    }

    /// Inverse transform back to time-antenna samples.
    pub fn inverse(&self) -> Array2<Complex64> {
        fft::ifft2(&self.spectrum)
    }

    /// `u,v,power` rows with a header, for plotting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("u,v,power\n");
        for ((u, v), p) in self.power.indexed_iter() {
            let _ = writeln!(out, "{u},{v},{p:e}");
        }
        out
    }
}

/// Forward unnormalized 2D DFT over elements (q) and fast time (n).
pub fn dft2(y: &IfData) -> RangeAngleMap {
    RangeAngleMap::from_spectrum(fft::fft2(y.data()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    /// Angle bin.
    pub u: usize,
    /// Range bin.
    pub v: usize,
    pub power: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PeakList {
    pub peaks: Vec<Peak>,
}

impl PeakList {
    pub fn count(&self) -> usize {
        self.peaks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peaks.is_empty()
    }
}

/// Peak search settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakParams {
    /// Base exclusion half-widths (angle bins, range bins): a candidate is
    /// discarded when it lies strictly closer than this, widened by the
    /// SWE spread, in both dimensions to an already accepted peak.
    pub min_separation: (usize, usize),
    /// Extra exclusion in bins per unit |spatial frequency| of the
    /// stronger peak; `alpha Q` covers one wideband block.
    pub swe_spread: f64,
    /// Candidates must exceed `threshold_factor * median(power)`.
    pub threshold_factor: f64,
    /// Candidates must also exceed `relative_floor * max(power)`.
    pub relative_floor: f64,
}

impl PeakParams {
    /// Exclusion zone sized to one spatial-wideband block.
    pub fn for_config(cfg: &RadarConfig) -> Self {
        Self {
            min_separation: DEFAULT_MIN_SEPARATION,
            swe_spread: cfg.frac_bandwidth * cfg.num_elements as f64,
            threshold_factor: DEFAULT_THRESHOLD_FACTOR,
            relative_floor: DEFAULT_RELATIVE_FLOOR,
        }
    }

    /// Exclusion half-widths around a peak in angle bin `u` of `q`.
    pub fn exclusion(&self, u: usize, q: usize) -> (usize, usize) {
        let extra = (self.swe_spread * bin_to_omega_angle(u, q).abs()).ceil() as usize;
        (self.min_separation.0 + extra, self.min_separation.1 + extra)
    }

    /// Largest exclusion over all angle bins.
    pub fn max_exclusion(&self) -> (usize, usize) {
        let extra = (self.swe_spread * 0.5).ceil() as usize;
        (self.min_separation.0 + extra, self.min_separation.1 + extra)
    }
}

pub const DEFAULT_MIN_SEPARATION: (usize, usize) = (3, 3);
pub const DEFAULT_THRESHOLD_FACTOR: f64 = 20.0;
pub const DEFAULT_RELATIVE_FLOOR: f64 = 2e-3;

/// Circular distance between two bins on a ring of `len`.
#[inline]
pub(crate) fn ring_distance(a: usize, b: usize, len: usize) -> usize {
    let d = a.abs_diff(b);
    d.min(len - d)
}

fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    let mid = v.len() / 2;
    let (_, m, _) = v.select_nth_unstable_by(mid, |a, b| a.total_cmp(b));
    let upper = *m;
    if v.len() % 2 == 1 {
        upper
    } else {
        let lower = v[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    }
}

/// Detection threshold `max(threshold_factor * median, relative_floor * max)`
/// of a power map.
pub fn peak_threshold(map: &RangeAngleMap, params: &PeakParams) -> f64 {
    let flat: Vec<f64> = map.power().iter().copied().collect();
    let max = flat.iter().copied().fold(0.0, f64::max);
    (params.threshold_factor * median(&flat)).max(params.relative_floor * max)
}

/// Local maxima of the power map above the threshold, accepted greedily
/// in descending power (ties: lower `(u, v)` first) with a rectangular
/// exclusion zone around every accepted peak, wider at large angles where
/// a target smears over more bins. Neighborhoods wrap around
/// both axes.
pub fn find_peaks(map: &RangeAngleMap, params: &PeakParams) -> PeakList {
    let power = map.power();
    let (rows, cols) = power.dim();
    if rows == 0 || cols == 0 {
        return PeakList::default();
    }
    let threshold = peak_threshold(map, params);

    let mut candidates = Vec::new();
    for ((u, v), &p) in power.indexed_iter() {
        if !(p > threshold) {
            continue;
        }
        let mut is_max = true;
        'nb: for du in [rows - 1, 0, 1] {
            for dv in [cols - 1, 0, 1] {
                if du == 0 && dv == 0 {
                    continue;
                }
                let (uu, vv) = ((u + du) % rows, (v + dv) % cols);
                if (uu, vv) != (u, v) && power[(uu, vv)] > p {
                    is_max = false;
                    break 'nb;
                }
            }
        }
        if is_max {
            candidates.push(Peak { u, v, power: p });
        }
    }
    candidates.sort_by(|a, b| {
        b.power
            .partial_cmp(&a.power)
            .unwrap_or(Ordering::Equal)
            .then((a.u, a.v).cmp(&(b.u, b.v)))
    });

    let mut accepted: Vec<Peak> = Vec::new();
    for c in candidates {
        let blocked = accepted.iter().any(|a| {
            let (eu, ev) = params.exclusion(a.u, rows);
            ring_distance(a.u, c.u, rows) < eu && ring_distance(a.v, c.v, cols) < ev
        });
        if !blocked {
            accepted.push(c);
        }
    }
    PeakList { peaks: accepted }
}

/// Angle bin to spatial frequency in [-0.5, 0.5).
pub fn bin_to_omega_angle(u: usize, q: usize) -> f64 {
    if 2 * u < q {
        u as f64 / q as f64
    } else {
        u as f64 / q as f64 - 1.0
    }
}

/// Range bin to range frequency in [0, 1).
pub fn bin_to_omega_range(v: usize, n: usize) -> f64 {
    v as f64 / n as f64
}

/// Bin-level signature from the peak list; amplitudes are left at zero.
pub fn coarse_signature(peaks: &PeakList, cfg: &RadarConfig) -> Result<Signature> {
    let entries = peaks
        .peaks
        .iter()
        .map(|p| {
            SignatureEntry::new(
                bin_to_omega_range(p.v, cfg.num_fast_time),
                bin_to_omega_angle(p.u, cfg.num_elements),
                Complex64::new(0.0, 0.0),
            )
        })
        .collect();
    Signature::new(entries)
}
