//! Scoring of estimated signatures against ground truth, and the
//! Monte-Carlo harness that aggregates scores per method and SNR.

mod monte_carlo;

pub use monte_carlo::*;

use std::cmp::Ordering;

use crate::config::RadarConfig;
use crate::error::{Error, Result};
use crate::signature::{Signature, Target};

/// Hit window in physical units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchTolerance {
    pub range_m: f64,
    pub aoa_deg: f64,
}

impl Default for MatchTolerance {
    fn default() -> Self {
        Self {
            range_m: 0.02,
            aoa_deg: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub true_index: usize,
    pub est_index: usize,
    pub range_error_m: f64,
    pub aoa_error_deg: f64,
    /// |a_hat - a|.
    pub amp_error: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MatchResult {
    pub hits: Vec<Hit>,
    pub misses: Vec<usize>,
    pub false_alarms: Vec<usize>,
}

impl MatchResult {
    pub fn hit_count(&self) -> usize {
        self.hits.len()
    }

    pub fn estimate_count(&self) -> usize {
        self.hits.len() + self.false_alarms.len()
    }

    pub fn truth_count(&self) -> usize {
        self.hits.len() + self.misses.len()
    }
}

/// Greedy one-to-one matching in ascending combined normalized error
/// `range_err / tol_range + aoa_err / tol_aoa`; only pairs inside both
/// tolerances are eligible. Estimates that do not map to a physical angle
/// are false alarms.
pub fn match_targets(
    est: &Signature,
    truth: &Signature,
    tol: &MatchTolerance,
    cfg: &RadarConfig,
) -> Result<MatchResult> {
    if !(tol.range_m > 0.0 && tol.aoa_deg > 0.0) {
        return Err(Error::InvalidConfig("match tolerances must be positive".into()));
    }
    let truth_t: Vec<Target> = truth.to_targets(cfg)?;
    let est_t: Vec<Option<Target>> = est.iter().map(|e| e.to_target(cfg).ok()).collect();

    let mut pairs = Vec::new();
    for (i, t) in truth_t.iter().enumerate() {
        for (j, e) in est_t.iter().enumerate() {
            let Some(e) = e else { continue };
            let dr = (e.range_m - t.range_m).abs();
            let da = (e.aoa_deg - t.aoa_deg).abs();
            if dr <= tol.range_m && da <= tol.aoa_deg {
                pairs.push((dr / tol.range_m + da / tol.aoa_deg, i, j, dr, da));
            }
        }
    }
    pairs.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(Ordering::Equal)
            .then((a.1, a.2).cmp(&(b.1, b.2)))
    });

    let mut true_used = vec![false; truth_t.len()];
    let mut est_used = vec![false; est_t.len()];
    let mut hits = Vec::new();
    for (_, i, j, dr, da) in pairs {
        if true_used[i] || est_used[j] {
            continue;
        }
        true_used[i] = true;
        est_used[j] = true;
        let amp_error = (est.entries()[j].amplitude - truth.entries()[i].amplitude).norm();
        hits.push(Hit {
            true_index: i,
            est_index: j,
            range_error_m: dr,
            aoa_error_deg: da,
            amp_error,
        });
    }
    hits.sort_by_key(|h| h.true_index);
    Ok(MatchResult {
        hits,
        misses: (0..truth_t.len()).filter(|&i| !true_used[i]).collect(),
        false_alarms: (0..est_t.len()).filter(|&j| !est_used[j]).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rmse {
    pub range_m: f64,
    pub aoa_deg: f64,
    pub amplitude: f64,
}

/// Root-mean-square errors over every hit in `results`.
pub fn rmse(results: &[MatchResult]) -> Result<Rmse> {
    let (mut n, mut r, mut a, mut m) = (0usize, 0.0, 0.0, 0.0);
    for h in results.iter().flat_map(|res| res.hits.iter()) {
        n += 1;
        r += h.range_error_m * h.range_error_m;
        a += h.aoa_error_deg * h.aoa_error_deg;
        m += h.amp_error * h.amp_error;
    }
    if n == 0 {
        return Err(Error::NoHits);
    }
    let n = n as f64;
    Ok(Rmse {
        range_m: (r / n).sqrt(),
        aoa_deg: (a / n).sqrt(),
        amplitude: (m / n).sqrt(),
    })
}

/// Truth scene from physical targets; amplitudes default to unit modulus.
pub fn truth_signature(targets: &[Target], cfg: &RadarConfig) -> Result<Signature> {
    Signature::from_targets(targets, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use crate::signature::SignatureEntry;
    use proptest::prelude::*;

    fn scene(cfg: &RadarConfig, targets: &[(f64, f64)]) -> Signature {
        let t: Vec<Target> = targets.iter().map(|&(r, a)| Target::unit(r, a)).collect();
        Signature::from_targets(&t, cfg).unwrap()
    }

    #[test]
    fn perfect_estimate() {
        let cfg = RadarConfig::reference();
        let truth = scene(&cfg, &[(1.0, 10.0), (2.0, -30.0)]);
        let m = match_targets(&truth, &truth, &MatchTolerance::default(), &cfg).unwrap();
        assert_eq!(m.hit_count(), 2);
        assert!(m.misses.is_empty() && m.false_alarms.is_empty());
    }

    #[test]
    fn empty_estimate() {
        let cfg = RadarConfig::reference();
        let truth = scene(&cfg, &[(1.0, 10.0), (2.0, -30.0), (0.5, 60.0)]);
        let m = match_targets(&Signature::empty(), &truth, &MatchTolerance::default(), &cfg).unwrap();
        assert_eq!((m.hit_count(), m.misses.len(), m.false_alarms.len()), (0, 3, 0));
    }

    #[test]
    fn one_off_by_five_degrees() {
        let cfg = RadarConfig::reference();
        let truth = scene(&cfg, &[(1.0, 10.0), (2.0, -30.0), (0.5, 60.0)]);
        let est = scene(&cfg, &[(1.0, 10.0), (2.0, -25.0)]);
        let m = match_targets(&est, &truth, &MatchTolerance::default(), &cfg).unwrap();
        assert_eq!(m.hit_count(), 1);
        assert_eq!(m.false_alarms, vec![1]);
        assert_eq!(m.misses, vec![1, 2]);
    }

    #[test]
    fn greedy_prefers_closest() {
        let cfg = RadarConfig::reference();
        let truth = scene(&cfg, &[(1.0, 10.0)]);
        let est = scene(&cfg, &[(1.015, 10.5), (1.001, 10.1)]);
        let m = match_targets(&est, &truth, &MatchTolerance::default(), &cfg).unwrap();
        assert_eq!(m.hits[0].est_index, 1);
        assert_eq!(m.false_alarms, vec![0]);
    }

    #[test]
    fn rmse_arithmetic() {
        let mk = |dr: f64, da: f64| MatchResult {
            hits: vec![Hit {
                true_index: 0,
                est_index: 0,
                range_error_m: dr,
                aoa_error_deg: da,
                amp_error: 0.0,
            }],
            ..Default::default()
        };
        assert_eq!(rmse(&[mk(0.0, 0.0)]).unwrap(), Rmse { range_m: 0.0, aoa_deg: 0.0, amplitude: 0.0 });
        assert!((rmse(&[mk(0.01, 0.0)]).unwrap().range_m - 0.01).abs() < 1e-15);
        let r = rmse(&[mk(0.0, 0.3), mk(0.0, 0.4)]).unwrap();
        assert!((r.aoa_deg - 0.353_553_390_593).abs() < 1e-9);
        assert!(matches!(rmse(&[MatchResult::default()]), Err(Error::NoHits)));
    }

    #[test]
    fn unphysical_estimate_is_false_alarm() {
        let cfg = RadarConfig::reference();
        let truth = scene(&cfg, &[(1.0, 10.0)]);
        let est = Signature::new(vec![SignatureEntry::new(0.4, -0.5, Complex64::new(1.0, 0.0))]).unwrap();
        let m = match_targets(&est, &truth, &MatchTolerance::default(), &cfg).unwrap();
        assert_eq!(m.false_alarms, vec![0]);
    }

    proptest! {
        #[test]
        fn conservation_and_permutation_symmetry(
            truth in prop::collection::vec((0.1f64..2.4, -70f64..70.0), 0..5),
            est in prop::collection::vec((0.1f64..2.4, -70f64..70.0), 0..6),
            jitter in prop::collection::vec((-0.03f64..0.03, -1.5f64..1.5), 6),
            rot in 0usize..6,
        ) {
            let cfg = RadarConfig::reference();
            // mix of genuine near-misses and random estimates
            let mut e: Vec<(f64, f64)> = truth.iter().zip(&jitter).map(|(t, j)| (t.0 + j.0, t.1 + j.1)).collect();
            e.extend(est);
            let dedup = |v: Vec<(f64, f64)>| {
                let mut out: Vec<(f64, f64)> = Vec::new();
                for x in v { if !out.contains(&x) { out.push(x); } }
                out
            };
            let truth = dedup(truth);
            let e = dedup(e);
            let ts = scene(&cfg, &truth);
            let es = scene(&cfg, &e);
            let m = match_targets(&es, &ts, &MatchTolerance::default(), &cfg).unwrap();
            prop_assert_eq!(m.hits.len() + m.misses.len(), ts.count());
            prop_assert_eq!(m.hits.len() + m.false_alarms.len(), es.count());

            let mut rotated = e.clone();
            if !rotated.is_empty() {
                let k = rot % rotated.len();
                rotated.rotate_left(k);
            }
            let m2 = match_targets(&scene(&cfg, &rotated), &ts, &MatchTolerance::default(), &cfg).unwrap();
            prop_assert_eq!(m.hits.len(), m2.hits.len());
            let key = |r: &MatchResult| {
                let mut v: Vec<(usize, u64, u64)> = r.hits.iter()
                    .map(|h| (h.true_index, h.range_error_m.to_bits(), h.aoa_error_deg.to_bits()))
                    .collect();
                v.sort();
                v
            };
            prop_assert_eq!(key(&m), key(&m2));
        }
    }
}
