//! Versioned text formats: scene files, IF data dumps, estimation reports
//! and benchmark specs. Each file starts with `MAGIC VERSION`; `#` starts
//! a comment; other lines are `key = value`.

use std::fmt::Write as _;

use ndarray::Array2;
use num_complex::Complex64;

use crate::baselines::MusicSolver;
use crate::config::RadarConfig;
use crate::error::{Error, Result};
use crate::metrics::{BenchmarkSpec, RangeInterval, SeparationRule};
use crate::pipeline::EstimationReport;
use crate::signature::{Signature, Target};
use crate::synth::IfData;

pub const SCENE_MAGIC: &str = "SWESCENE";
pub const DUMP_MAGIC: &str = "SWEIF";
pub const REPORT_MAGIC: &str = "SWEREPORT";
pub const BENCH_MAGIC: &str = "SWEBENCH";
pub const FORMAT_VERSION: u32 = 1;

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Non-blank, comment-stripped lines with 1-based line numbers, after
/// checking the header.
fn body<'a>(text: &'a str, magic: &'static str) -> Result<Vec<(usize, &'a str)>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (ln, header) = lines.next().ok_or_else(|| parse_err(1, format!("missing {magic} header")))?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some(magic) {
        return Err(parse_err(ln, format!("expected {magic} header, found {header:?}")));
    }
    let version: u32 = parts
        .next()
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| parse_err(ln, "missing or malformed format version"))?;
    if version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion { kind: magic, version });
    }
    Ok(lines.collect())
}

fn key_value(ln: usize, line: &str) -> Result<(&str, &str)> {
    line.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .ok_or_else(|| parse_err(ln, format!("expected key = value, found {line:?}")))
}

fn num<T: std::str::FromStr>(ln: usize, key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| parse_err(ln, format!("{key}: cannot parse {v:?}")))
}

fn list<T: std::str::FromStr>(ln: usize, key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',').map(|x| num(ln, key, x.trim())).collect()
}

fn boolean(ln: usize, key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(parse_err(ln, format!("{key}: expected a boolean, found {v:?}"))),
    }
}

/// Accumulates radar keys; anything else is left to the caller.
#[derive(Default)]
struct RadarKeys {
    carrier_freq_hz: Option<f64>,
    frac_bandwidth: Option<f64>,
    num_fast_time: Option<usize>,
    num_elements: Option<usize>,
    element_spacing_m: Option<f64>,
    chirp_duration_s: Option<f64>,
    last_line: usize,
}

impl RadarKeys {
    fn take(&mut self, ln: usize, key: &str, v: &str) -> Result<bool> {
        self.last_line = ln;
        match key {
            "carrier_freq_hz" => self.carrier_freq_hz = Some(num(ln, key, v)?),
            "frac_bandwidth" => self.frac_bandwidth = Some(num(ln, key, v)?),
            "num_fast_time" => self.num_fast_time = Some(num(ln, key, v)?),
            "num_elements" => self.num_elements = Some(num(ln, key, v)?),
            "element_spacing_m" => self.element_spacing_m = Some(num(ln, key, v)?),
            "chirp_duration_s" => self.chirp_duration_s = Some(num(ln, key, v)?),
            _ => return Ok(false),
        }
        Ok(true)
    }

    /// Missing keys fall back to the reference configuration.
    fn build(&self) -> Result<RadarConfig> {
        let r = RadarConfig::reference();
        let mut cfg = RadarConfig::new(
            self.carrier_freq_hz.unwrap_or(r.carrier_freq_hz),
            self.frac_bandwidth.unwrap_or(r.frac_bandwidth),
            self.num_fast_time.unwrap_or(r.num_fast_time),
            self.num_elements.unwrap_or(r.num_elements),
        )
        .map_err(|e| parse_err(self.last_line, e.to_string()))?;
        if let Some(d) = self.element_spacing_m {
            cfg.element_spacing_m = d;
        }
        if let Some(t) = self.chirp_duration_s {
            cfg.chirp_duration_s = t;
        }
        cfg.validate().map_err(|e| parse_err(self.last_line, e.to_string()))?;
        Ok(cfg)
    }
}

fn write_radar(out: &mut String, cfg: &RadarConfig) {
    let _ = writeln!(out, "carrier_freq_hz = {:?}", cfg.carrier_freq_hz);
    let _ = writeln!(out, "frac_bandwidth = {:?}", cfg.frac_bandwidth);
    let _ = writeln!(out, "num_fast_time = {}", cfg.num_fast_time);
    let _ = writeln!(out, "num_elements = {}", cfg.num_elements);
    let _ = writeln!(out, "element_spacing_m = {:?}", cfg.element_spacing_m);
    let _ = writeln!(out, "chirp_duration_s = {:?}", cfg.chirp_duration_s);
}

/// Radar configuration plus physical targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub cfg: RadarConfig,
    pub targets: Vec<Target>,
}

impl Scene {
    pub fn signature(&self) -> Result<Signature> {
        Signature::from_targets(&self.targets, &self.cfg)
    }
}

/// Parses a scene file. Targets are `target = range_m, aoa_deg, re, im`;
/// the amplitude may be omitted for unit amplitude.
pub fn parse_scene(text: &str) -> Result<Scene> {
    let mut radar = RadarKeys::default();
    let mut targets = Vec::new();
    let mut target_lines = Vec::new();
    for (ln, line) in body(text, SCENE_MAGIC)? {
        let (key, v) = key_value(ln, line)?;
        if radar.take(ln, key, v)? {
            continue;
        }
        match key {
            "target" => {
                let f: Vec<f64> = list(ln, key, v)?;
                let t = match f.as_slice() {
                    [r, a] => Target::unit(*r, *a),
                    [r, a, re, im] => Target::new(*r, *a, Complex64::new(*re, *im)),
                    _ => return Err(parse_err(ln, "target: expected range_m, aoa_deg[, re, im]")),
                };
                if !(t.range_m >= 0.0 && t.aoa_deg.abs() < 90.0 && t.amplitude.is_finite()) {
                    return Err(parse_err(ln, format!("target out of range: {v}")));
                }
                targets.push(t);
                target_lines.push(ln);
            }
            _ => return Err(parse_err(ln, format!("unknown key {key:?}"))),
        }
    }
    let cfg = radar.build()?;
    for (t, &ln) in targets.iter().zip(&target_lines) {
        cfg.aoa_to_omega(t.aoa_deg).map_err(|e| parse_err(ln, e.to_string()))?;
    }
    let scene = Scene { cfg, targets };
    scene
        .signature()
        .map_err(|e| parse_err(target_lines.last().copied().unwrap_or(1), e.to_string()))?;
    Ok(scene)
}

pub fn write_scene(scene: &Scene) -> String {
    let mut out = format!("{SCENE_MAGIC} {FORMAT_VERSION}\n");
    write_radar(&mut out, &scene.cfg);
    for t in &scene.targets {
        let _ = writeln!(
            out,
            "target = {:?}, {:?}, {:?}, {:?}",
            t.range_m, t.aoa_deg, t.amplitude.re, t.amplitude.im
        );
    }
    out
}

/// IF dump: radar keys, then `data` and Q*N row-major `re im` lines.
/// Floats use shortest round-trip formatting, so dumps reload exactly.
pub fn write_dump(y: &IfData) -> String {
    let mut out = format!("{DUMP_MAGIC} {FORMAT_VERSION}\n");
    write_radar(&mut out, y.cfg());
    out.push_str("data\n");
    for z in y.data().iter() {
        let _ = writeln!(out, "{:?} {:?}", z.re, z.im);
    }
    out
}

pub fn parse_dump(text: &str) -> Result<IfData> {
    let lines = body(text, DUMP_MAGIC)?;
    let mut radar = RadarKeys::default();
    let mut it = lines.into_iter();
    let mut data_line = None;
    for (ln, line) in it.by_ref() {
        if line == "data" {
            data_line = Some(ln);
            break;
        }
        let (key, v) = key_value(ln, line)?;
        if !radar.take(ln, key, v)? {
            return Err(parse_err(ln, format!("unknown key {key:?}")));
        }
    }
    let data_ln = data_line.ok_or_else(|| parse_err(radar.last_line.max(1), "missing data section"))?;
    let cfg = radar.build()?;
    let (q, n) = (cfg.num_elements, cfg.num_fast_time);
    let mut values = Vec::with_capacity(q * n);
    let mut last = data_ln;
    for (ln, line) in it {
        last = ln;
        let mut parts = line.split_whitespace();
        let (Some(re), Some(im), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(parse_err(ln, "expected two numbers"));
        };
        values.push(Complex64::new(num(ln, "re", re)?, num(ln, "im", im)?));
    }
    if values.len() != q * n {
        return Err(parse_err(last, format!("expected {} samples, found {}", q * n, values.len())));
    }
    let data = Array2::from_shape_vec((q, n), values).map_err(|e| parse_err(last, e.to_string()))?;
    IfData::new(data, cfg)
}

/// One estimated target of a report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportRow {
    pub range_m: f64,
    pub aoa_deg: f64,
    pub omega_range: f64,
    pub omega_angle: f64,
    pub amplitude: Complex64,
    /// Working-matrix energy after elimination; NaN for methods without
    /// a sequential residual.
    pub residual_energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub method: String,
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn from_signature(method: &str, est: &Signature, cfg: &RadarConfig) -> Self {
        let rows = est
            .iter()
            .map(|e| {
                let t = e.to_target(cfg).ok();
                ReportRow {
                    range_m: t.map_or(f64::NAN, |t| t.range_m),
                    aoa_deg: t.map_or(f64::NAN, |t| t.aoa_deg),
                    omega_range: e.omega_range,
                    omega_angle: e.omega_angle,
                    amplitude: e.amplitude,
                    residual_energy: f64::NAN,
                }
            })
            .collect();
        Self { method: method.to_string(), rows }
    }

    /// Rows follow the estimated signature; residual energies come from
    /// the matching trace entries.
    pub fn from_pipeline(method: &str, report: &EstimationReport, cfg: &RadarConfig) -> Self {
        let mut out = Self::from_signature(method, &report.estimated, cfg);
        for row in &mut out.rows {
            if let Some(log) = report
                .per_target_log
                .iter()
                .find(|l| l.refined == (row.omega_range, row.omega_angle))
            {
                row.residual_energy = log.residual_energy;
            }
        }
        out
    }
}

pub fn write_report(report: &Report) -> String {
    let mut out = format!("{REPORT_MAGIC} {FORMAT_VERSION}\n");
    let _ = writeln!(out, "method = {}", report.method);
    let _ = writeln!(out, "count = {}", report.rows.len());
    out.push_str("# k, range_m, aoa_deg, omega_range, omega_angle, amp_re, amp_im, residual_energy\n");
    for (k, r) in report.rows.iter().enumerate() {
        let _ = writeln!(
            out,
            "target = {k}, {:?}, {:?}, {:?}, {:?}, {:?}, {:?}, {:?}",
            r.range_m, r.aoa_deg, r.omega_range, r.omega_angle, r.amplitude.re, r.amplitude.im, r.residual_energy
        );
    }
    out
}

pub fn parse_report(text: &str) -> Result<Report> {
    let mut method = None;
    let mut count = None;
    let mut rows = Vec::new();
    let mut last = 1;
    for (ln, line) in body(text, REPORT_MAGIC)? {
        last = ln;
        let (key, v) = key_value(ln, line)?;
        match key {
            "method" => method = Some(v.to_string()),
            "count" => count = Some(num::<usize>(ln, key, v)?),
            "target" => {
                let f: Vec<f64> = list(ln, key, v)?;
                let [_, range_m, aoa_deg, omega_range, omega_angle, re, im, residual_energy] = f[..] else {
                    return Err(parse_err(ln, "target: expected 8 fields"));
                };
                rows.push(ReportRow {
                    range_m,
                    aoa_deg,
                    omega_range,
                    omega_angle,
                    amplitude: Complex64::new(re, im),
                    residual_energy,
                });
            }
            _ => return Err(parse_err(ln, format!("unknown key {key:?}"))),
        }
    }
    if count.is_some_and(|c| c != rows.len()) {
        return Err(parse_err(last, "count does not match the number of targets"));
    }
    Ok(Report {
        method: method.ok_or_else(|| parse_err(last, "missing method"))?,
        rows,
    })
}

/// Parsed benchmark spec with the MUSIC solver choice.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchFile {
    pub spec: BenchmarkSpec,
    pub music_solver: MusicSolver,
}

/// Benchmark spec. Radar keys as in scene files, plus `num_targets`,
/// `snr_db` (list), `trials`, `ranges = relative|absolute, lo, hi`,
/// `aoa_deg = lo, hi`, `separation = on|off`, `tol_range_m`,
/// `tol_aoa_deg`, `methods` (list), `oracle_count`, `music_solver`.
pub fn parse_bench_spec(text: &str) -> Result<BenchFile> {
    let mut radar = RadarKeys::default();
    let mut spec = BenchmarkSpec::reference();
    let mut music_solver = MusicSolver::subspace();
    let mut last = 1;
    for (ln, line) in body(text, BENCH_MAGIC)? {
        last = ln;
        let (key, v) = key_value(ln, line)?;
        if radar.take(ln, key, v)? {
            continue;
        }
        match key {
            "num_targets" => spec.num_targets = num(ln, key, v)?,
            "snr_db" => spec.snr_db = list(ln, key, v)?,
            "trials" => spec.trials = num(ln, key, v)?,
            "ranges" => {
                let parts: Vec<&str> = v.split(',').map(str::trim).collect();
                let [kind, lo, hi] = parts[..] else {
                    return Err(parse_err(ln, "ranges: expected relative|absolute, lo, hi"));
                };
                let (lo, hi) = (num(ln, key, lo)?, num(ln, key, hi)?);
                spec.ranges = match kind {
                    "relative" => RangeInterval::Relative(lo, hi),
                    "absolute" => RangeInterval::Absolute(lo, hi),
                    _ => return Err(parse_err(ln, format!("ranges: unknown kind {kind:?}"))),
                };
            }
            "aoa_deg" => {
                let f: Vec<f64> = list(ln, key, v)?;
                let [lo, hi] = f[..] else {
                    return Err(parse_err(ln, "aoa_deg: expected lo, hi"));
                };
                spec.aoa_deg = (lo, hi);
            }
            "separation" => {
                spec.separation = SeparationRule {
                    enabled: boolean(ln, key, v)?,
                    ..SeparationRule::default()
                }
            }
            "tol_range_m" => spec.tolerance.range_m = num(ln, key, v)?,
            "tol_aoa_deg" => spec.tolerance.aoa_deg = num(ln, key, v)?,
            "methods" => {
                spec.methods = v
                    .split(',')
                    .map(|m| m.trim().parse().map_err(|_| parse_err(ln, format!("unknown method {m:?}"))))
                    .collect::<Result<_>>()?
            }
            "oracle_count" => spec.oracle_count = boolean(ln, key, v)?,
            "music_solver" => {
                music_solver = match v {
                    "dense" => MusicSolver::Dense,
                    "subspace" => MusicSolver::subspace(),
                    _ => return Err(parse_err(ln, format!("music_solver: expected dense|subspace, found {v:?}"))),
                }
            }
            _ => return Err(parse_err(ln, format!("unknown key {key:?}"))),
        }
    }
    spec.cfg = radar.build()?;
    spec.validate().map_err(|e| parse_err(last, e.to_string()))?;
    Ok(BenchFile { spec, music_solver })
}

pub fn write_bench_spec(file: &BenchFile) -> String {
    let s = &file.spec;
    let mut out = format!("{BENCH_MAGIC} {FORMAT_VERSION}\n");
    write_radar(&mut out, &s.cfg);
    let join = |v: Vec<String>| v.join(", ");
    let _ = writeln!(out, "num_targets = {}", s.num_targets);
    let _ = writeln!(out, "snr_db = {}", join(s.snr_db.iter().map(|x| format!("{x:?}")).collect()));
    let _ = writeln!(out, "trials = {}", s.trials);
    let _ = match s.ranges {
        RangeInterval::Relative(a, b) => writeln!(out, "ranges = relative, {a:?}, {b:?}"),
        RangeInterval::Absolute(a, b) => writeln!(out, "ranges = absolute, {a:?}, {b:?}"),
    };
    let _ = writeln!(out, "aoa_deg = {:?}, {:?}", s.aoa_deg.0, s.aoa_deg.1);
    let _ = writeln!(out, "separation = {}", if s.separation.enabled { "on" } else { "off" });
    let _ = writeln!(out, "tol_range_m = {:?}", s.tolerance.range_m);
    let _ = writeln!(out, "tol_aoa_deg = {:?}", s.tolerance.aoa_deg);
    let _ = writeln!(out, "methods = {}", join(s.methods.iter().map(|m| m.name().to_string()).collect()));
    let _ = writeln!(out, "oracle_count = {}", s.oracle_count);
    let solver = match file.music_solver {
        MusicSolver::Dense => "dense",
        MusicSolver::Subspace { .. } => "subspace",
    };
    let _ = writeln!(out, "music_solver = {solver}");
    out
}

impl Default for BenchFile {
    fn default() -> Self {
        Self {
            spec: BenchmarkSpec::reference(),
            music_solver: MusicSolver::subspace(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::methods::Method;
    use crate::synth::synthesize_wideband;

    const TWO_TARGET: &str = "SWESCENE 1
# two-target desk scene
carrier_freq_hz = 77e9
frac_bandwidth = 0.1
num_fast_time = 128
num_elements = 128
target = 2.02, 30, 1, 0
target = 0.97, -45
";

    #[test]
    fn scene_round_trip() {
        let s = parse_scene(TWO_TARGET).unwrap();
        assert_eq!(s.targets.len(), 2);
        assert_eq!(s.targets[1].amplitude, Complex64::new(1.0, 0.0));
        assert_eq!(parse_scene(&write_scene(&s)).unwrap(), s);
    }

    #[test]
    fn scene_errors_carry_line_numbers() {
        let bad = TWO_TARGET.replace("target = 0.97, -45", "target = 0.97, abc");
        match parse_scene(&bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 8),
            other => panic!("{other:?}"),
        }
        match parse_scene("SWESCENE 1\nbogus = 3\n") {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_scene("SWESCENE 2\n"), Err(Error::UnsupportedVersion { version: 2, .. })));
        assert!(matches!(parse_scene("SWEIF 1\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_scene(""), Err(Error::Parse { .. })));
    }

    #[test]
    fn empty_scene_is_valid() {
        let s = parse_scene("SWESCENE 1\n").unwrap();
        assert!(s.targets.is_empty());
        assert_eq!(s.cfg, RadarConfig::reference());
    }

    #[test]
    fn dump_round_trip_is_exact() {
        let s = parse_scene(TWO_TARGET).unwrap();
        let cfg = s.cfg.with_dims(8, 6).unwrap();
        let y = synthesize_wideband(&Signature::from_targets(&s.targets, &cfg).unwrap(), &cfg, 0.3, 4);
        let back = parse_dump(&write_dump(&y)).unwrap();
        assert_eq!(back.data(), y.data());
        assert_eq!(back.cfg(), y.cfg());
    }

    #[test]
    fn truncated_dump_rejected() {
        let cfg = RadarConfig::reference().with_dims(2, 2).unwrap();
        let text = write_dump(&IfData::zeros(cfg));
        let cut: String = text.lines().take(text.lines().count() - 1).map(|l| format!("{l}\n")).collect();
        assert!(matches!(parse_dump(&cut), Err(Error::Parse { .. })));
        assert!(matches!(
            parse_dump(&text.replace("SWEIF 1", "SWEIF 7")),
            Err(Error::UnsupportedVersion { version: 7, .. })
        ));
    }

    #[test]
    fn report_round_trip() {
        let cfg = RadarConfig::reference();
        let sig = Signature::from_targets(&[Target::unit(1.0, 10.0)], &cfg).unwrap();
        let r = Report::from_signature("music2d", &sig, &cfg);
        let back = parse_report(&write_report(&r)).unwrap();
        assert_eq!(back.method, "music2d");
        assert_eq!(back.rows.len(), 1);
        assert!((back.rows[0].range_m - 1.0).abs() < 1e-12);
        assert!(back.rows[0].residual_energy.is_nan());
    }

    #[test]
    fn bench_round_trip() {
        let mut f = BenchFile::default();
        f.spec.snr_db = vec![-5.0, 0.0, 12.5];
        f.spec.methods = vec![Method::Rotation, Method::Proposed];
        f.spec.ranges = RangeInterval::Absolute(1.0, 20.0);
        f.music_solver = MusicSolver::Dense;
        let back = parse_bench_spec(&write_bench_spec(&f)).unwrap();
        assert_eq!(back, f);
        assert!(parse_bench_spec("SWEBENCH 1\ntrials = 0\n").is_err());
        assert!(parse_bench_spec("SWEBENCH 1\nmethods = proposed, esprit\n").is_err());
    }
}
