use std::fmt::Write as _;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{match_targets, rmse, MatchResult, MatchTolerance};
use crate::config::RadarConfig;
use crate::error::{Error, Result};
use crate::methods::{Method, MethodSuite};
use crate::signature::{Signature, SignatureEntry};
use crate::synth::{sigma_for_snr_db, synthesize_wideband};

/// Range interval for random scenes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RangeInterval {
    /// Fractions of the unambiguous range.
    Relative(f64, f64),
    /// Meters; values beyond the unambiguous range alias.
    Absolute(f64, f64),
}

impl RangeInterval {
    pub fn meters(&self, cfg: &RadarConfig) -> Result<(f64, f64)> {
        let (lo, hi) = match *self {
            RangeInterval::Relative(a, b) => {
                let r = cfg.max_range_m();
                (a * r, b * r)
            }
            RangeInterval::Absolute(a, b) => (a, b),
        };
        if !(lo >= 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::InvalidConfig(format!("bad range interval [{lo}, {hi}]")));
        }
        Ok((lo, hi))
    }
}

impl Default for RangeInterval {
    fn default() -> Self {
        RangeInterval::Relative(0.1, 0.9)
    }
}

/// Minimum pairwise spacing of drawn targets, in DFT bins. A pair is
/// accepted when it is at least `range_bins` apart in range and
/// `angle_bins` apart in angle, or when it is further apart than one
/// SWE block width in either dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationRule {
    pub enabled: bool,
    pub range_bins: f64,
    pub angle_bins: f64,
}

impl Default for SeparationRule {
    fn default() -> Self {
        Self {
            enabled: true,
            range_bins: 3.0,
            angle_bins: 3.0,
        }
    }
}

impl SeparationRule {
    pub fn accepts(&self, a: &SignatureEntry, b: &SignatureEntry, cfg: &RadarConfig) -> bool {
        if !self.enabled {
            return true;
        }
        let (q, n) = (cfg.num_elements as f64, cfg.num_fast_time as f64);
        let ring = |d: f64| {
            let d = d.rem_euclid(1.0);
            d.min(1.0 - d)
        };
        let dr = ring(a.omega_range - b.omega_range) * n;
        let da = ring(a.omega_angle - b.omega_angle) * q;
        let block = cfg.frac_bandwidth * q * a.omega_angle.abs().max(b.omega_angle.abs()) + 1.0;
        (dr >= self.range_bins && da >= self.angle_bins) || dr > block || da > block
    }
}

/// One Monte-Carlo experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkSpec {
    pub cfg: RadarConfig,
    pub num_targets: usize,
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub ranges: RangeInterval,
    pub aoa_deg: (f64, f64),
    pub separation: SeparationRule,
    pub tolerance: MatchTolerance,
    pub methods: Vec<Method>,
    /// Target count handed to methods that need it: true K when set,
    /// otherwise the coarse peak count.
    pub oracle_count: bool,
}

impl BenchmarkSpec {
    /// K = 3 targets on the reference radar, SNR −20..20 dB in 5 dB steps.
    pub fn reference() -> Self {
        Self {
            cfg: RadarConfig::reference(),
            num_targets: 3,
            snr_db: (-4..=4).map(|k| 5.0 * k as f64).collect(),
            trials: 200,
            ranges: RangeInterval::default(),
            aoa_deg: (0.0, 80.0),
            separation: SeparationRule::default(),
            tolerance: MatchTolerance::default(),
            methods: Method::ALL.to_vec(),
            oracle_count: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.cfg.validate()?;
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.methods.is_empty() || self.snr_db.is_empty() {
            return Err(Error::InvalidConfig("need at least one method and SNR point".into()));
        }
        let (lo, hi) = self.aoa_deg;
        if !(lo > -90.0 && hi < 90.0 && lo <= hi) {
            return Err(Error::InvalidConfig(format!("bad AoA interval [{lo}, {hi}]")));
        }
        if self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidConfig("SNR points must be finite".into()));
        }
        self.ranges.meters(&self.cfg)?;
        Ok(())
    }
}

/// Aggregate for one method at one SNR point.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRecord {
    pub method: Method,
    pub snr_db: f64,
    pub alpha: f64,
    pub q: usize,
    pub n: usize,
    pub k: usize,
    pub trials: usize,
    pub hit_rate: f64,
    pub false_rate: f64,
    /// NaN when no trial produced a hit.
    pub rmse_range_m: f64,
    pub rmse_aoa_deg: f64,
    pub rmse_amp: f64,
    pub mean_runtime_s: f64,
    /// Trials whose estimator returned an error; scored as empty estimates.
    pub failures: usize,
}

/// How trials are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Executor {
    Sequential,
    /// Rayon pool with the given thread count; 0 uses the global pool.
    /// Without the `parallel` feature this runs sequentially.
    #[default]
    Parallel,
    Threads(usize),
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the scene of `trial`.
pub fn scene_seed(base_seed: u64, trial: usize) -> u64 {
    mix(mix(base_seed) ^ trial as u64)
}

/// Seed of the noise of `trial` at SNR point `snr_index`.
pub fn noise_seed(base_seed: u64, trial: usize, snr_index: usize) -> u64 {
    mix(scene_seed(base_seed, trial) ^ mix(snr_index as u64 + 1))
}

/// Random scene: uniform ranges and AoAs, unit-modulus amplitudes with
/// uniform phase, pairwise separation enforced by rejection.
pub fn draw_scene(spec: &BenchmarkSpec, seed: u64) -> Result<Signature> {
    let cfg = &spec.cfg;
    let (rlo, rhi) = spec.ranges.meters(cfg)?;
    let (alo, ahi) = spec.aoa_deg;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries: Vec<SignatureEntry> = Vec::with_capacity(spec.num_targets);
    let mut attempts = 0usize;
    while entries.len() < spec.num_targets {
        attempts += 1;
        if attempts > 100_000 {
            return Err(Error::InvalidConfig(
                "cannot place targets with the requested separation".into(),
            ));
        }
        let r = rng.random_range(rlo..=rhi);
        let a = rng.random_range(alo..=ahi);
        let psi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let mut e = SignatureEntry::new(
            cfg.range_to_omega(r)?,
            cfg.aoa_to_omega(a)?,
            Complex64::from_polar(1.0, psi),
        );
        e.omega_range = e.omega_range.rem_euclid(1.0);
        if entries.iter().all(|o| spec.separation.accepts(o, &e, cfg) && (o.omega_range, o.omega_angle) != (e.omega_range, e.omega_angle)) {
            entries.push(e);
        }
    }
    Signature::new(entries)
}

#[derive(Debug, Clone)]
struct Outcome {
    result: MatchResult,
    runtime_s: f64,
    failed: bool,
}

fn run_trial(
    spec: &BenchmarkSpec,
    suite: &MethodSuite,
    base_seed: u64,
    trial: usize,
    snr_index: usize,
) -> Result<Vec<Outcome>> {
    let cfg = &spec.cfg;
    let truth = draw_scene(spec, scene_seed(base_seed, trial))?;
    let sigma = sigma_for_snr_db(spec.snr_db[snr_index]);
    let y = synthesize_wideband(&truth, cfg, sigma, noise_seed(base_seed, trial, snr_index));
    let k = spec.oracle_count.then_some(spec.num_targets);
    spec.methods
        .iter()
        .map(|&m| {
            let start = Instant::now();
            let est = suite.run(m, &y, k);
            let runtime_s = start.elapsed().as_secs_f64();
            let failed = est.is_err();
            let est = est.unwrap_or_else(|_| Signature::empty());
            Ok(Outcome {
                result: match_targets(&est, &truth, &spec.tolerance, cfg)?,
                runtime_s,
                failed,
            })
        })
        .collect()
}

fn map_items<T, F>(items: Vec<(usize, usize)>, exec: Executor, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, usize) -> Result<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let par = |items: Vec<(usize, usize)>| -> Result<Vec<T>> {
            items.into_par_iter().map(|(s, t)| f(s, t)).collect()
        };
        match exec {
            Executor::Sequential => {}
            Executor::Parallel | Executor::Threads(0) => return par(items),
            Executor::Threads(n) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
                return pool.install(|| par(items));
            }
        }
    }
    let _ = exec;
    items.into_iter().map(|(s, t)| f(s, t)).collect()
}

/// Runs every method of `spec` over `spec.trials` random scenes at each
/// SNR point. Records come out ordered by SNR point, then method;
/// aggregation is in trial order so results do not depend on `exec`.
pub fn monte_carlo(
    spec: &BenchmarkSpec,
    suite: &MethodSuite,
    base_seed: u64,
    exec: Executor,
) -> Result<Vec<BenchmarkRecord>> {
    spec.validate()?;
    let items: Vec<(usize, usize)> = (0..spec.snr_db.len())
        .flat_map(|s| (0..spec.trials).map(move |t| (s, t)))
        .collect();
    let outcomes = map_items(items, exec, |s, t| run_trial(spec, suite, base_seed, t, s))?;

    let mut records = Vec::with_capacity(spec.snr_db.len() * spec.methods.len());
    for (s, &snr_db) in spec.snr_db.iter().enumerate() {
        let block = &outcomes[s * spec.trials..(s + 1) * spec.trials];
        for (mi, &method) in spec.methods.iter().enumerate() {
            let per: Vec<&Outcome> = block.iter().map(|o| &o[mi]).collect();
            let results: Vec<MatchResult> = per.iter().map(|o| o.result.clone()).collect();
            records.push(aggregate(spec, method, snr_db, &results, &per));
        }
    }
    Ok(records)
}

fn aggregate(
    spec: &BenchmarkSpec,
    method: Method,
    snr_db: f64,
    results: &[MatchResult],
    per: &[&Outcome],
) -> BenchmarkRecord {
    let hits: usize = results.iter().map(|r| r.hit_count()).sum();
    let fas: usize = results.iter().map(|r| r.false_alarms.len()).sum();
    let ests: usize = results.iter().map(|r| r.estimate_count()).sum();
    let err = rmse(results).ok();
    let trials = results.len();
    BenchmarkRecord {
        method,
        snr_db,
        alpha: spec.cfg.frac_bandwidth,
        q: spec.cfg.num_elements,
        n: spec.cfg.num_fast_time,
        k: spec.num_targets,
        trials,
        hit_rate: hits as f64 / (spec.num_targets * trials).max(1) as f64,
        false_rate: if ests == 0 { 0.0 } else { fas as f64 / ests as f64 },
        rmse_range_m: err.map_or(f64::NAN, |e| e.range_m),
        rmse_aoa_deg: err.map_or(f64::NAN, |e| e.aoa_deg),
        rmse_amp: err.map_or(f64::NAN, |e| e.amplitude),
        mean_runtime_s: per.iter().map(|o| o.runtime_s).sum::<f64>() / trials.max(1) as f64,
        failures: per.iter().filter(|o| o.failed).count(),
    }
}

/// Single-scene wall-clock comparison: each method once on one K-target
/// scene drawn from `spec` at its highest SNR point.
pub fn timing_records(spec: &BenchmarkSpec, suite: &MethodSuite, base_seed: u64) -> Result<Vec<BenchmarkRecord>> {
    spec.validate()?;
    let s = spec
        .snr_db
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let timing_spec = BenchmarkSpec { trials: 1, ..spec.clone() };
    let out = run_trial(&timing_spec, suite, base_seed, 0, s)?;
    Ok(spec
        .methods
        .iter()
        .zip(&out)
        .map(|(&m, o)| aggregate(&timing_spec, m, spec.snr_db[s], std::slice::from_ref(&o.result), &[o]))
        .collect())
}

pub const CSV_HEADER: &str =
    "method,snr_db,alpha,Q,N,K,trials,hit_rate,false_rate,rmse_range_m,rmse_aoa_deg,rmse_amp,mean_runtime_s";

/// CSV rows per the benchmark schema. With `timing` off the runtime
/// column is left empty so output is reproducible byte for byte.
pub fn records_to_csv(records: &[BenchmarkRecord], timing: bool) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        write_row(&mut out, r.method.name(), r, timing);
    }
    out
}

/// Appends timing rows, labelled `timing:<method>`.
pub fn append_timing_rows(csv: &mut String, records: &[BenchmarkRecord]) {
    for r in records {
        write_row(csv, &format!("timing:{}", r.method.name()), r, true);
    }
}

fn write_row(out: &mut String, label: &str, r: &BenchmarkRecord, timing: bool) {
    let rt = if timing { format!("{:.6}", r.mean_runtime_s) } else { String::new() };
    let _ = writeln!(
        out,
        "{label},{},{},{},{},{},{},{:.6},{:.6},{},{},{},{rt}",
        r.snr_db,
        r.alpha,
        r.q,
        r.n,
        r.k,
        r.trials,
        r.hit_rate,
        r.false_rate,
        fmt_metric(r.rmse_range_m),
        fmt_metric(r.rmse_aoa_deg),
        fmt_metric(r.rmse_amp),
    );
}

fn fmt_metric(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.6e}")
    }
}
