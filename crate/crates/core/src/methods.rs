//! Uniform front end over the proposed estimator and the baselines.

use std::fmt;
use std::str::FromStr;

use crate::baselines::{music2d_signature, omp2d_baseline, rotation_baseline, MusicGrid, MusicParams};
use crate::config::RadarConfig;
use crate::error::{Error, Result};
use crate::pipeline::{PipelineParams, SignatureEstimator};
use crate::signature::Signature;
use crate::synth::IfData;
use crate::transform::{dft2, find_peaks};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Proposed,
    Music2d,
    Omp2d,
    Rotation,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Proposed, Method::Music2d, Method::Omp2d, Method::Rotation];

    pub fn name(self) -> &'static str {
        match self {
            Method::Proposed => "proposed",
            Method::Music2d => "music2d",
            Method::Omp2d => "omp2d",
            Method::Rotation => "rotation",
        }
    }

    /// Label used in reports; the rotation baseline is a reconstruction.
    pub fn label(self) -> &'static str {
        match self {
            Method::Rotation => "rotation (reconstructed)",
            m => m.name(),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| Error::InvalidConfig(format!("unknown method {s:?}")))
    }
}

/// Every estimator for one configuration, with dictionaries built once.
#[derive(Debug, Clone)]
pub struct MethodSuite {
    cfg: RadarConfig,
    proposed: SignatureEstimator,
    music_grid: MusicGrid,
    music: MusicParams,
}

impl MethodSuite {
    pub fn new(cfg: &RadarConfig, params: PipelineParams, music: MusicParams) -> Result<Self> {
        Ok(Self {
            cfg: *cfg,
            proposed: SignatureEstimator::new(cfg, params)?,
            music_grid: MusicGrid::oversampled(params.oversample, cfg),
            music,
        })
    }

    pub fn for_config(cfg: &RadarConfig) -> Result<Self> {
        Self::new(cfg, PipelineParams::for_config(cfg), MusicParams::for_config(cfg))
    }

    pub fn cfg(&self) -> &RadarConfig {
        &self.cfg
    }

    pub fn pipeline(&self) -> &SignatureEstimator {
        &self.proposed
    }

    pub fn music_params(&self) -> &MusicParams {
        &self.music
    }

    pub fn with_music_params(mut self, music: MusicParams) -> Self {
        self.music = music;
        self
    }

    /// Number of coarse DFT peaks, the proposed method's target count.
    pub fn coarse_count(&self, y: &IfData) -> usize {
        find_peaks(&dft2(y), &self.proposed.params().peaks).count()
    }

    /// Runs `method` on `y`. `num_sources` is the prior target count used
    /// by the narrowband baselines; `None` takes the coarse peak count.
    /// MUSIC with no sources to look for returns an empty signature.
    pub fn run(&self, method: Method, y: &IfData, num_sources: Option<usize>) -> Result<Signature> {
        if !y.is_finite() {
            return Err(Error::NonFinite);
        }
        let k = || num_sources.unwrap_or_else(|| self.coarse_count(y));
        match method {
            Method::Proposed => Ok(self.proposed.estimate(y)?.estimated),
            Method::Music2d => match k() {
                0 => Ok(Signature::empty()),
                k => music2d_signature(y, k, &self.music_grid, &self.music),
            },
            Method::Omp2d => omp2d_baseline(y, self.proposed.dictionaries(), k()),
            Method::Rotation => rotation_baseline(y, &self.cfg, &self.proposed.params().peaks),
        }
    }
}
