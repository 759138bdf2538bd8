//! Comparison estimators: narrowband 2D-MUSIC with spatial smoothing,
//! plain 2D-OMP on the uncompensated data, and a reconstructed
//! rotation-based wideband estimator (coarse-bin de-rotation followed by
//! interpolated DFT peaks, no sparse refinement).

use faer::{Mat, Side};
use ndarray::Array2;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftDirection;

use crate::compensate::compensate;
use crate::config::RadarConfig;
use crate::cs::{eliminate, estimate_coefficient, omp2d, project_narrowband, DictionaryPair};
use crate::error::{Error, Result};
use crate::fft;
use crate::signature::{Signature, SignatureEntry};
use crate::synth::{cis_cycles, IfData};
use crate::transform::{coarse_signature, dft2, find_peaks, ring_distance, PeakParams};

/// Eigen-solver behind 2D-MUSIC. Both produce the same signal subspace;
/// `Dense` forms the smoothed covariance explicitly and fully decomposes
/// it, `Subspace` runs block subspace iteration with FFT-based implicit
/// covariance products and only resolves the leading eigenvectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MusicSolver {
    Dense,
    Subspace { max_iter: usize, tol: f64 },
}

impl MusicSolver {
    pub fn subspace() -> Self {
        MusicSolver::Subspace {
            max_iter: 60,
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MusicParams {
    /// Smoothing subarray size (elements, fast-time samples).
    pub subarray: (usize, usize),
    pub solver: MusicSolver,
}

impl MusicParams {
    /// Q/2 x N/2 subarrays, dense eigendecomposition.
    pub fn for_config(cfg: &RadarConfig) -> Self {
        Self {
            subarray: ((cfg.num_elements / 2).max(1), (cfg.num_fast_time / 2).max(1)),
            solver: MusicSolver::Dense,
        }
    }
}

/// Scan grid in normalized frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct MusicGrid {
    pub angles: Vec<f64>,
    pub ranges: Vec<f64>,
}

impl MusicGrid {
    /// Uniform grids matching the oversampled CS dictionaries.
    pub fn oversampled(factor: usize, cfg: &RadarConfig) -> Self {
        let ga = factor * cfg.num_elements;
        let gr = factor * cfg.num_fast_time;
        Self {
            angles: (0..ga).map(|g| -0.5 + g as f64 / ga as f64).collect(),
            ranges: (0..gr).map(|g| g as f64 / gr as f64).collect(),
        }
    }

    fn uniform_start(grid: &[f64], min_len: usize) -> Option<f64> {
        let g = grid.len() as f64;
        let ok = grid.len() >= min_len
            && grid
                .iter()
                .enumerate()
                .all(|(k, &x)| (x - (grid[0] + k as f64 / g)).abs() < 1e-12);
        ok.then(|| grid[0])
    }
}

/// Spatially smoothed covariance `(1/L) sum_l x_l x_l^H` over all
/// `(Q - mq + 1)(N - mn + 1)` overlapping subarrays. Subarray samples are
/// vectorized element-major: index `m1 * mn + m2`.
pub fn smoothed_covariance(y: &Array2<Complex64>, subarray: (usize, usize)) -> Result<Mat<Complex64>> {
    let x = snapshot_matrix(y, subarray)?;
    let l = x.ncols() as f64;
    let mut r = &x * x.adjoint();
    r *= faer::Scale(Complex64::new(1.0 / l, 0.0));
    Ok(r)
}

fn check_subarray(y: &Array2<Complex64>, subarray: (usize, usize)) -> Result<(usize, usize)> {
    let (q, n) = y.dim();
    let (mq, mn) = subarray;
    if mq == 0 || mn == 0 || mq > q || mn > n {
        return Err(Error::InvalidConfig(format!(
            "subarray {subarray:?} does not fit a {q} x {n} matrix"
        )));
    }
    Ok((q - mq + 1, n - mn + 1))
}

fn snapshot_matrix(y: &Array2<Complex64>, subarray: (usize, usize)) -> Result<Mat<Complex64>> {
    let (lq, ln) = check_subarray(y, subarray)?;
    let (mq, mn) = subarray;
    Ok(Mat::from_fn(mq * mn, lq * ln, |m, l| {
        let (m1, m2) = (m / mn, m % mn);
        let (l1, l2) = (l / ln, l % ln);
        y[(l1 + m1, l2 + m2)]
    }))
}

/// Leading `k` eigenpairs of the smoothed covariance, eigenvalues descending.
struct SignalSubspace {
    values: Vec<f64>,
    /// columns are unit eigenvectors of length mq * mn
    vectors: Mat<Complex64>,
}

fn dense_subspace(y: &Array2<Complex64>, subarray: (usize, usize), k: usize) -> Result<SignalSubspace> {
    let r = smoothed_covariance(y, subarray)?;
    let evd = r.self_adjoint_eigen(Side::Lower).map_err(|_| Error::Eigen)?;
    let m = r.nrows();
    let s = evd.S().column_vector();
    let u = evd.U();
    let k = k.min(m);
    let values = (0..k).map(|i| s[m - 1 - i].re).collect();
    let vectors = Mat::from_fn(m, k, |row, i| u[(row, m - 1 - i)]);
    Ok(SignalSubspace { values, vectors })
}

/// Implicit smoothed-covariance products through 2D FFT correlations.
struct ImplicitCovariance {
    spec: Array2<Complex64>,
    dims: (usize, usize),
    subarray: (usize, usize),
    offsets: (usize, usize),
}

impl ImplicitCovariance {
    fn new(y: &Array2<Complex64>, subarray: (usize, usize)) -> Result<Self> {
        let offsets = check_subarray(y, subarray)?;
        Ok(Self {
            spec: fft::fft2(y),
            dims: y.dim(),
            subarray,
            offsets,
        })
    }

    /// `sum_m Y[l + m] conj(v[m])` for `l` in `0..ext`, where `v` lives in
    /// the top-left `vdims` corner.
    fn correlate(&self, v: &[Complex64], vdims: (usize, usize), ext: (usize, usize)) -> Vec<Complex64> {
        let mut pad = Array2::<Complex64>::zeros(self.dims);
        for a in 0..vdims.0 {
            for b in 0..vdims.1 {
                pad[(a, b)] = v[a * vdims.1 + b];
            }
        }
        fft::fft2_inplace(&mut pad, FftDirection::Forward);
        pad.zip_mut_with(&self.spec, |p, s| *p = s * p.conj());
        fft::fft2_inplace(&mut pad, FftDirection::Inverse);
        let scale = 1.0 / (self.dims.0 * self.dims.1) as f64;
        let mut out = Vec::with_capacity(ext.0 * ext.1);
        for a in 0..ext.0 {
            for b in 0..ext.1 {
                out.push(pad[(a, b)] * scale);
            }
        }
        out
    }

    fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        // w = X^H v, then X w / L
        let w: Vec<Complex64> = self
            .correlate(v, self.subarray, self.offsets)
            .into_iter()
            .map(|z| z.conj())
            .collect();
        let wc: Vec<Complex64> = w.iter().map(|z| z.conj()).collect();
        let l = (self.offsets.0 * self.offsets.1) as f64;
        self.correlate(&wc, self.offsets, self.subarray)
            .into_iter()
            .map(|z| z / l)
            .collect()
    }
}

fn orthonormalize(cols: &mut [Vec<Complex64>]) {
    for i in 0..cols.len() {
        for _ in 0..2 {
            for j in 0..i {
                let h: Complex64 = cols[j].iter().zip(&cols[i]).map(|(a, b)| a.conj() * b).sum();
                let (head, tail) = cols.split_at_mut(i);
                for (x, e) in tail[0].iter_mut().zip(&head[j]) {
                    *x -= h * e;
                }
            }
        }
        let nrm: f64 = cols[i].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nrm > 0.0 {
            cols[i].iter_mut().for_each(|z| *z /= nrm);
        }
    }
}

fn iterative_subspace(
    y: &Array2<Complex64>,
    subarray: (usize, usize),
    k: usize,
    max_iter: usize,
    tol: f64,
) -> Result<SignalSubspace> {
    let op = ImplicitCovariance::new(y, subarray)?;
    let m = subarray.0 * subarray.1;
    let p = (k + 8).min(m);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0f5b);
    let mut basis: Vec<Vec<Complex64>> = (0..p)
        .map(|_| {
            (0..m)
                .map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
                .collect()
        })
        .collect();
    orthonormalize(&mut basis);

    let mut prev: Vec<f64> = vec![f64::INFINITY; k];
    let mut values = vec![0.0; p];
    for _ in 0..max_iter.max(1) {
        let images: Vec<Vec<Complex64>> = basis.iter().map(|v| op.apply(v)).collect();
        // Rayleigh-Ritz on span(basis)
        let h = Mat::from_fn(p, p, |i, j| {
            basis[i].iter().zip(&images[j]).map(|(a, b)| a.conj() * b).sum::<Complex64>()
        });
        let evd = h.self_adjoint_eigen(Side::Lower).map_err(|_| Error::Eigen)?;
        let s = evd.S().column_vector();
        let u = evd.U();
        let order: Vec<usize> = (0..p).rev().collect();
        values = order.iter().map(|&i| s[i].re).collect();
        let rotate = |src: &[Vec<Complex64>]| -> Vec<Vec<Complex64>> {
            order
                .iter()
                .map(|&c| {
                    let mut out = vec![Complex64::new(0.0, 0.0); m];
                    for (r, col) in src.iter().enumerate() {
                        let w = u[(r, c)];
                        for (o, x) in out.iter_mut().zip(col) {
                            *o += w * x;
                        }
                    }
                    out
                })
                .collect()
        };
        let ritz_vectors = rotate(&basis);
        let scale = values[0].abs().max(f64::MIN_POSITIVE);
        let converged = values[..k]
            .iter()
            .zip(&prev)
            .all(|(a, b)| (a - b).abs() <= tol * scale);
        prev.copy_from_slice(&values[..k]);
        if converged {
            basis = ritz_vectors;
            break;
        }
        basis = rotate(&images);
        orthonormalize(&mut basis);
    }
    let vectors = Mat::from_fn(m, k, |r, c| basis[c][r]);
    values.truncate(k);
    Ok(SignalSubspace { values, vectors })
}

/// MUSIC pseudo-spectrum `1 / (a^H P_noise a)` over `grid` (rows: angles,
/// columns: ranges), using `a^H P_noise a = |a|^2 - |E_s^H a|^2`.
pub fn music_pseudospectrum(
    y: &IfData,
    num_sources: usize,
    grid: &MusicGrid,
    params: &MusicParams,
) -> Result<Array2<f64>> {
    if num_sources == 0 {
        return Err(Error::InvalidConfig("num_sources must be at least 1".into()));
    }
    if !y.is_finite() {
        return Err(Error::NonFinite);
    }
    let sub = match params.solver {
        MusicSolver::Dense => dense_subspace(y.data(), params.subarray, num_sources)?,
        MusicSolver::Subspace { max_iter, tol } => {
            iterative_subspace(y.data(), params.subarray, num_sources, max_iter, tol)?
        }
    };
    let lead = sub.values.first().copied().unwrap_or(0.0);
    let rank = sub.values.iter().filter(|&&v| v > 1e-9 * lead && lead > 0.0).count();
    if rank < num_sources {
        return Err(Error::InsufficientRank {
            rank,
            required: num_sources,
        });
    }
    let (mq, mn) = params.subarray;
    let m = (mq * mn) as f64;
    let (ga, gr) = (grid.angles.len(), grid.ranges.len());
    let mut captured = Array2::<f64>::zeros((ga, gr));
    let uniform = MusicGrid::uniform_start(&grid.angles, mq)
        .zip(MusicGrid::uniform_start(&grid.ranges, mn));
    for k in 0..num_sources {
        let e = Array2::from_shape_fn((mq, mn), |(a, b)| sub.vectors[(a * mn + b, k)]);
        let proj = match uniform {
            Some((phi0, rho0)) => {
                let shifted = Array2::from_shape_fn((mq, mn), |(a, b)| {
                    e[(a, b)] * cis_cycles(-(phi0 * a as f64 + rho0 * b as f64))
                });
                fft::padded_fft2(&shifted, ga, gr)
            }
            None => {
                let ca = DictionaryPair::from_grids(grid.ranges.clone(), grid.angles.clone(), mn, mq)?;
                ca.correlate(&e)
            }
        };
        captured.zip_mut_with(&proj, |c, z| *c += z.norm_sqr());
    }
    Ok(captured.mapv(|c| 1.0 / (m - c).max(1e-12 * m)))
}

/// 2D-MUSIC estimates `(omega_range, omega_angle)` of the `num_sources`
/// largest pseudo-spectrum local maxima.
pub fn music2d(
    y: &IfData,
    num_sources: usize,
    grid: &MusicGrid,
    params: &MusicParams,
) -> Result<Vec<(f64, f64)>> {
    let p = music_pseudospectrum(y, num_sources, grid, params)?;
    let (ga, gr) = p.dim();
    let mut maxima = Vec::new();
    for ((i, j), &v) in p.indexed_iter() {
        let mut is_max = true;
        'nb: for di in [ga - 1, 0, 1] {
            for dj in [gr - 1, 0, 1] {
                let (ii, jj) = ((i + di) % ga, (j + dj) % gr);
                if (ii, jj) != (i, j) && p[(ii, jj)] > v {
                    is_max = false;
                    break 'nb;
                }
            }
        }
        if is_max {
            maxima.push((v, i, j));
        }
    }
    maxima.sort_by(|a, b| b.0.total_cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (_, i, j) in maxima {
        let f = (grid.ranges[j], grid.angles[i]);
        if !out.contains(&f) {
            out.push(f);
        }
        if out.len() == num_sources {
            break;
        }
    }
    Ok(out)
}

/// 2D-MUSIC wrapped as a signature; amplitudes by narrowband projection.
pub fn music2d_signature(
    y: &IfData,
    num_sources: usize,
    grid: &MusicGrid,
    params: &MusicParams,
) -> Result<Signature> {
    let est = music2d(y, num_sources, grid, params)?;
    Signature::new(
        est.into_iter()
            .map(|(r, a)| SignatureEntry::new(r, a, project_narrowband(y.data(), r, a)))
            .collect(),
    )
}

/// Plain 2D-OMP with `k_hat` atoms on the uncompensated data.
pub fn omp2d_baseline(y: &IfData, dict: &DictionaryPair, k_hat: usize) -> Result<Signature> {
    let atoms = omp2d(y.data(), dict, k_hat, 1e-12)?;
    Signature::new(
        atoms
            .iter()
            .map(|a| {
                SignatureEntry::new(
                    dict.range_grid()[a.range_index],
                    dict.angle_grid()[a.angle_index],
                    a.coefficient,
                )
            })
            .collect(),
    )
}

/// Parabolic vertex offset in (-0.5, 0.5) from three magnitudes.
fn parabolic_offset(left: f64, mid: f64, right: f64) -> f64 {
    let den = left - 2.0 * mid + right;
    if den.abs() < f64::EPSILON * mid.abs().max(1.0) {
        return 0.0;
    }
    (0.5 * (left - right) / den).clamp(-0.5, 0.5)
}

/// Reconstructed rotation-based wideband estimator. For each coarse peak,
/// strongest first: de-rotate the working matrix by the coarse bin's
/// wideband phase, locate the DFT peak near the coarse bin, refine it by
/// per-axis parabolic interpolation of the magnitude, estimate the
/// amplitude by wideband projection and eliminate the target.
pub fn rotation_baseline(y: &IfData, cfg: &RadarConfig, peaks: &PeakParams) -> Result<Signature> {
    let found = find_peaks(&dft2(y), peaks);
    let coarse = coarse_signature(&found, cfg)?;
    let (q, n) = y.dim();
    let mut working = y.clone();
    let mut out = Signature::empty();
    for (peak, c) in found.peaks.iter().zip(coarse.iter()) {
        let map = dft2(&compensate(&working, c.omega_angle, cfg));
        let mag = map.power().mapv(f64::sqrt);
        let (sep_u, sep_v) = peaks.exclusion(peak.u, q);
        let (mut bu, mut bv, mut best) = (peak.u, peak.v, -1.0);
        for ((u, v), &m) in mag.indexed_iter() {
            if ring_distance(u, peak.u, q) < sep_u.max(1) && ring_distance(v, peak.v, n) < sep_v.max(1) && m > best {
                (bu, bv, best) = (u, v, m);
            }
        }
        let du = parabolic_offset(mag[((bu + q - 1) % q, bv)], best, mag[((bu + 1) % q, bv)]);
        let dv = parabolic_offset(mag[(bu, (bv + n - 1) % n)], best, mag[(bu, (bv + 1) % n)]);
        let mut omega_angle = (bu as f64 + du) / q as f64;
        omega_angle -= (omega_angle + 0.5).floor();
        let omega_range = ((bv as f64 + dv) / n as f64).rem_euclid(1.0);
        let amplitude = estimate_coefficient(y, omega_range, omega_angle, cfg);
        let entry = SignatureEntry::new(omega_range, omega_angle, amplitude);
        working = eliminate(&working, &entry, cfg);
        let _ = out.push(entry);
    }
    Ok(out)
}
