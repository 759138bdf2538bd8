//! Radar configuration and the exact conversions between physical target
//! coordinates and the normalized frequencies used by every other module.

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s (exact SI value).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Chirp slope used when no chirp duration is given: 100 MHz/us.
pub const DEFAULT_CHIRP_SLOPE_HZ_PER_S: f64 = 100e6 / 1e-6;

/// Static description of the virtual ULA FMCW radar.
///
/// `element_spacing_m` defaults to half a carrier wavelength. The chirp
/// duration only enters the reported chirp slope and sample rate; the
/// discrete IF model depends on `frac_bandwidth` and the sample counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadarConfig {
    pub carrier_freq_hz: f64,
    pub frac_bandwidth: f64,
    pub num_fast_time: usize,
    pub num_elements: usize,
    pub element_spacing_m: f64,
    pub chirp_duration_s: f64,
}

impl RadarConfig {
    /// Builds a configuration with half-wavelength spacing and a chirp
    /// duration chosen so the slope is 100 MHz/us.
    pub fn new(
        carrier_freq_hz: f64,
        frac_bandwidth: f64,
        num_fast_time: usize,
        num_elements: usize,
    ) -> Result<Self> {
        let bw = frac_bandwidth * carrier_freq_hz;
        let chirp_duration_s = if bw > 0.0 {
            bw / DEFAULT_CHIRP_SLOPE_HZ_PER_S
        } else {
            1e-6
        };
        let cfg = Self {
            carrier_freq_hz,
            frac_bandwidth,
            num_fast_time,
            num_elements,
            element_spacing_m: SPEED_OF_LIGHT / (2.0 * carrier_freq_hz),
            chirp_duration_s,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// 77 GHz carrier with 0.1 fractional bandwidth on a 128 x 128 grid.
    pub fn reference() -> Self {
        Self::new(77e9, 0.1, 128, 128).expect("reference configuration is valid")
    }

    pub fn with_frac_bandwidth(mut self, frac_bandwidth: f64) -> Result<Self> {
        self.frac_bandwidth = frac_bandwidth;
        self.validate()?;
        Ok(self)
    }

    pub fn with_dims(mut self, num_elements: usize, num_fast_time: usize) -> Result<Self> {
        self.num_elements = num_elements;
        self.num_fast_time = num_fast_time;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.carrier_freq_hz.is_finite() && self.carrier_freq_hz > 0.0) {
            return bad("carrier_freq_hz must be positive");
        }
        if !(0.0..=1.0).contains(&self.frac_bandwidth) {
            return bad("frac_bandwidth must lie in [0, 1]");
        }
        if self.num_fast_time == 0 || self.num_elements == 0 {
            return bad("num_fast_time and num_elements must be positive");
        }
        if !(self.element_spacing_m.is_finite() && self.element_spacing_m > 0.0) {
            return bad("element_spacing_m must be positive");
        }
        if !(self.chirp_duration_s.is_finite() && self.chirp_duration_s > 0.0) {
            return bad("chirp_duration_s must be positive");
        }
        Ok(())
    }

    pub fn bandwidth_hz(&self) -> f64 {
        self.frac_bandwidth * self.carrier_freq_hz
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_freq_hz
    }

    /// Chirp slope BW / T_ch in Hz/s.
    pub fn chirp_slope(&self) -> f64 {
        self.bandwidth_hz() / self.chirp_duration_s
    }

    /// Fast-time sample rate N / T_ch.
    pub fn sample_rate_hz(&self) -> f64 {
        self.num_fast_time as f64 / self.chirp_duration_s
    }

    /// Unambiguous range c N / (2 BW); infinite for zero bandwidth.
    pub fn max_range_m(&self) -> f64 {
        SPEED_OF_LIGHT * self.num_fast_time as f64 / (2.0 * self.bandwidth_hz())
    }

    /// Normalized range frequency 2 R BW / (c N).
    pub fn range_to_omega(&self, range_m: f64) -> Result<f64> {
        if self.frac_bandwidth <= 0.0 {
            return Err(Error::ZeroBandwidth);
        }
        Ok(2.0 * range_m * self.bandwidth_hz() / (SPEED_OF_LIGHT * self.num_fast_time as f64))
    }

    pub fn omega_to_range(&self, omega_range: f64) -> Result<f64> {
        if self.frac_bandwidth <= 0.0 {
            return Err(Error::ZeroBandwidth);
        }
        Ok(omega_range * SPEED_OF_LIGHT * self.num_fast_time as f64 / (2.0 * self.bandwidth_hz()))
    }

    /// Normalized spatial frequency d sin(theta) / lambda.
    pub fn aoa_to_omega(&self, aoa_deg: f64) -> Result<f64> {
        if !(aoa_deg.abs() < 90.0) {
            return Err(Error::InvalidAngle(aoa_deg));
        }
        let omega = self.element_spacing_m * aoa_deg.to_radians().sin() / self.wavelength_m();
        if omega.abs() >= 0.5 && self.element_spacing_m > 0.5 * self.wavelength_m() {
            return Err(Error::SpatialAliasing(omega));
        }
        Ok(omega)
    }

    pub fn omega_to_aoa(&self, omega_angle: f64) -> Result<f64> {
        let s = omega_angle * self.wavelength_m() / self.element_spacing_m;
        if !(s.abs() < 1.0) {
            return Err(Error::SpatialAliasing(omega_angle));
        }
        Ok(s.asin().to_degrees())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_range_maps_to_zero() {
        let cfg = RadarConfig::reference();
        assert_eq!(cfg.range_to_omega(0.0).unwrap(), 0.0);
    }

    #[test]
    fn max_range_maps_to_one() {
        let cfg = RadarConfig::reference();
        let r = cfg.max_range_m();
        assert!((cfg.range_to_omega(r).unwrap() - 1.0).abs() < 1e-15);
        assert!((r - 2.491_781_469).abs() < 1e-8, "R_max = {r}");
        assert!((r - 2.494).abs() < 3e-3);
    }

    #[test]
    fn target_one_range_frequency() {
        // 2 * 2.02 * 7.7e9 / (299792458 * 128) = 0.810665...
        let cfg = RadarConfig::reference();
        let omega = cfg.range_to_omega(2.02).unwrap();
        assert!((omega - 0.810_665).abs() < 1e-6, "{omega}");
        assert!((omega - 3.1108e10 / (SPEED_OF_LIGHT * 128.0)).abs() < 1e-12);
    }

    #[test]
    fn zero_bandwidth_is_rejected() {
        let cfg = RadarConfig::new(77e9, 0.0, 128, 128).unwrap();
        assert!(matches!(cfg.range_to_omega(1.0), Err(Error::ZeroBandwidth)));
    }

    #[test]
    fn angle_closed_forms() {
        let cfg = RadarConfig::reference();
        assert_eq!(cfg.aoa_to_omega(0.0).unwrap(), 0.0);
        assert!((cfg.aoa_to_omega(30.0).unwrap() - 0.25).abs() < 1e-15);
        assert!((cfg.aoa_to_omega(-45.0).unwrap() + 0.353_553_390_6).abs() < 1e-10);
        assert!(cfg.aoa_to_omega(90.0).is_err());
    }

    #[test]
    fn wide_spacing_aliases() {
        let mut cfg = RadarConfig::reference();
        cfg.element_spacing_m = cfg.wavelength_m();
        assert!(cfg.aoa_to_omega(20.0).is_ok());
        assert!(matches!(cfg.aoa_to_omega(40.0), Err(Error::SpatialAliasing(_))));
    }

    #[test]
    fn invalid_config() {
        assert!(RadarConfig::new(77e9, 1.5, 128, 128).is_err());
        assert!(RadarConfig::new(77e9, 0.1, 0, 128).is_err());
        assert!(RadarConfig::new(-1.0, 0.1, 128, 128).is_err());
    }
}
