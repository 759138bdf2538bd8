//! Spatial-wideband de-rotation by a coarse angle estimate and isolation of
//! the compensated target before refinement.

use ndarray::Array2;
use num_complex::Complex64;

use crate::config::RadarConfig;
use crate::fft;
use crate::synth::{cis_cycles, IfData};
use crate::transform::ring_distance;

/// Unit-modulus matrix with entry (q, n) = `exp(j2pi (alpha/N) omega q n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMatrix {
    theta: Array2<Complex64>,
}

impl PhaseMatrix {
    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.theta
    }

    pub fn conj(&self) -> PhaseMatrix {
        PhaseMatrix {
            theta: self.theta.mapv(|z| z.conj()),
        }
    }
}

pub fn swe_phase_matrix(omega_theta: f64, cfg: &RadarConfig) -> PhaseMatrix {
    let rate = cfg.frac_bandwidth / cfg.num_fast_time as f64 * omega_theta;
    let theta = Array2::from_shape_fn((cfg.num_elements, cfg.num_fast_time), |(q, n)| {
        cis_cycles(rate * q as f64 * n as f64)
    });
    PhaseMatrix { theta }
}

/// Multiplies the samples by the conjugate wideband phase of `omega_theta_hat`,
/// turning a target at that spatial frequency into a narrowband 2D tone.
pub fn compensate(y: &IfData, omega_theta_hat: f64, cfg: &RadarConfig) -> IfData {
    let rate = cfg.frac_bandwidth / cfg.num_fast_time as f64 * omega_theta_hat;
    let mut out = y.clone();
    for ((q, n), z) in out.data_mut().indexed_iter_mut() {
        *z *= cis_cycles(-rate * q as f64 * n as f64);
    }
    out
}

/// How the compensated k-th target is separated from the rest of the scene.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GatePolicy {
    /// Keep the DFT bins inside `neighborhood` (angle, range half-widths)
    /// around the coarse bin whose power is at least `mask_fraction` of the
    /// strongest bin in that neighborhood; zero the rest.
    SpectralMask {
        mask_fraction: f64,
        neighborhood: (usize, usize),
    },
    /// Zero every time-antenna sample with magnitude below `gamma`.
    TimeDomainThreshold { gamma: f64 },
    /// No isolation.
    Passthrough,
}

impl GatePolicy {
    pub fn name(&self) -> &'static str {
        match self {
            GatePolicy::SpectralMask { .. } => "spectral-mask",
            GatePolicy::TimeDomainThreshold { .. } => "time-threshold",
            GatePolicy::Passthrough => "passthrough",
        }
    }
}

pub const DEFAULT_MASK_FRACTION: f64 = 0.0;

/// Isolates the target around `coarse_bin = (u, v)` in compensated data.
/// Neighborhoods wrap around the DFT axes, so nothing is out of bounds.
pub fn gate(y_comp: &IfData, coarse_bin: (usize, usize), policy: &GatePolicy) -> IfData {
    match *policy {
        GatePolicy::Passthrough => y_comp.clone(),
        GatePolicy::TimeDomainThreshold { gamma } => {
            let mut out = y_comp.clone();
            out.data_mut().mapv_inplace(|z| if z.norm() >= gamma { z } else { Complex64::new(0.0, 0.0) });
            out
        }
        GatePolicy::SpectralMask {
            mask_fraction,
            neighborhood,
        } => {
            let mut spec = fft::fft2(y_comp.data());
            let (rows, cols) = spec.dim();
            let (u0, v0) = (coarse_bin.0 % rows, coarse_bin.1 % cols);
            let inside = |u: usize, v: usize| {
                ring_distance(u, u0, rows) < neighborhood.0.max(1)
                    && ring_distance(v, v0, cols) < neighborhood.1.max(1)
            };
            let peak = spec
                .indexed_iter()
                .filter(|((u, v), _)| inside(*u, *v))
                .map(|(_, z)| z.norm_sqr())
                .fold(0.0, f64::max);
            let keep = mask_fraction * peak;
            for ((u, v), z) in spec.indexed_iter_mut() {
                if !(inside(u, v) && z.norm_sqr() >= keep && peak > 0.0) {
                    *z = Complex64::new(0.0, 0.0);
                }
            }
            y_comp
                .with_data(fft::ifft2(&spec))
                .expect("shape preserved by the transform")
        }
    }
}
