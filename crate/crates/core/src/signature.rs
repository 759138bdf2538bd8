//! Physical targets and the normalized-frequency scene signature.

use num_complex::Complex64;

use crate::config::RadarConfig;
use crate::error::{Error, Result};

/// A stationary far-field point target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    pub range_m: f64,
    pub aoa_deg: f64,
    pub amplitude: Complex64,
}

impl Target {
    pub fn new(range_m: f64, aoa_deg: f64, amplitude: Complex64) -> Self {
        Self {
            range_m,
            aoa_deg,
            amplitude,
        }
    }

    pub fn unit(range_m: f64, aoa_deg: f64) -> Self {
        Self::new(range_m, aoa_deg, Complex64::new(1.0, 0.0))
    }
}

/// One scene component in normalized frequencies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignatureEntry {
    /// Normalized range frequency, nominally in [0, 1).
    pub omega_range: f64,
    /// Normalized spatial frequency, nominally in [-0.5, 0.5).
    pub omega_angle: f64,
    pub amplitude: Complex64,
}

impl SignatureEntry {
    pub fn new(omega_range: f64, omega_angle: f64, amplitude: Complex64) -> Self {
        Self {
            omega_range,
            omega_angle,
            amplitude,
        }
    }

    pub fn from_target(target: &Target, cfg: &RadarConfig) -> Result<Self> {
        Ok(Self {
            omega_range: cfg.range_to_omega(target.range_m)?,
            omega_angle: cfg.aoa_to_omega(target.aoa_deg)?,
            amplitude: target.amplitude,
        })
    }

    pub fn to_target(&self, cfg: &RadarConfig) -> Result<Target> {
        Ok(Target {
            range_m: cfg.omega_to_range(self.omega_range)?,
            aoa_deg: cfg.omega_to_aoa(self.omega_angle)?,
            amplitude: self.amplitude,
        })
    }
}

/// The radio-scene signature: target count and per-target
/// (amplitude, range frequency, spatial frequency).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Signature {
    entries: Vec<SignatureEntry>,
}

impl Signature {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Rejects entries sharing identical (omega_range, omega_angle).
    pub fn new(entries: Vec<SignatureEntry>) -> Result<Self> {
        for (i, a) in entries.iter().enumerate() {
            if let Some(b) = entries[..i].iter().find(|b| {
                b.omega_range == a.omega_range && b.omega_angle == a.omega_angle
            }) {
                return Err(Error::DuplicateEntry(b.omega_range, b.omega_angle));
            }
        }
        Ok(Self { entries })
    }

    pub fn from_targets(targets: &[Target], cfg: &RadarConfig) -> Result<Self> {
        let entries = targets
            .iter()
            .map(|t| SignatureEntry::from_target(t, cfg))
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }

    pub fn to_targets(&self, cfg: &RadarConfig) -> Result<Vec<Target>> {
        self.entries.iter().map(|e| e.to_target(cfg)).collect()
    }

    pub fn count(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[SignatureEntry] {
        &self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, SignatureEntry> {
        self.entries.iter()
    }

    /// Appends an entry; an exact duplicate of an existing entry is rejected.
    pub fn push(&mut self, entry: SignatureEntry) -> Result<()> {
        if self
            .entries
            .iter()
            .any(|b| b.omega_range == entry.omega_range && b.omega_angle == entry.omega_angle)
        {
            return Err(Error::DuplicateEntry(entry.omega_range, entry.omega_angle));
        }
        self.entries.push(entry);
        Ok(())
    }

    /// Concatenation of two signatures.
    pub fn union(&self, other: &Signature) -> Result<Signature> {
        let mut entries = self.entries.clone();
        entries.extend_from_slice(&other.entries);
        Self::new(entries)
    }
}

impl<'a> IntoIterator for &'a Signature {
    type Item = &'a SignatureEntry;
    type IntoIter = std::slice::Iter<'a, SignatureEntry>;

    fn into_iter(self) -> Self::IntoIter {
        self.entries.iter()
    }
}
