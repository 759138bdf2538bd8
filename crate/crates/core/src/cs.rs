//! Separable steering dictionaries and greedy sparse recovery on the
//! compensated (narrowband-equivalent) data model `Y = C Z B^T + W`.
//!
//! `B` holds range steering vectors `b(rho) = [exp(j2pi rho n)]_n` as
//! columns (N x G_R) and `C` angle steering vectors
//! `c(phi) = [exp(j2pi phi q)]_q` (Q x G_theta). The correlation of a
//! residual with atom `(i, j)` is `c(phi_i)^H Y b(rho_j)^*`.

use ndarray::Array2;
use num_complex::Complex64;

use crate::config::RadarConfig;
use crate::error::{Error, Result};
use crate::fft;
use crate::signature::SignatureEntry;
use crate::synth::{add_component, cis_cycles, energy, IfData};

#[derive(Debug, Clone, Copy, PartialEq)]
struct UniformGrids {
    rho0: f64,
    phi0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DictionaryPair {
    range_atoms: Array2<Complex64>,
    angle_atoms: Array2<Complex64>,
    range_grid: Vec<f64>,
    angle_grid: Vec<f64>,
    uniform: Option<UniformGrids>,
}

fn steering_matrix(len: usize, grid: &[f64]) -> Array2<Complex64> {
    Array2::from_shape_fn((len, grid.len()), |(k, g)| cis_cycles(grid[g] * k as f64))
}

/// Range steering vector b(omega) of length `n`.
pub fn range_steering(omega: f64, n: usize) -> Vec<Complex64> {
    (0..n).map(|k| cis_cycles(omega * k as f64)).collect()
}

/// Angle steering vector c(omega) of length `q`.
pub fn angle_steering(omega: f64, q: usize) -> Vec<Complex64> {
    range_steering(omega, q)
}

fn is_full_period_uniform(grid: &[f64]) -> bool {
    let g = grid.len() as f64;
    grid.iter()
        .enumerate()
        .all(|(k, &x)| (x - (grid[0] + k as f64 / g)).abs() < 1e-12)
}

impl DictionaryPair {
    /// Dictionary over arbitrary strictly increasing grids.
    pub fn from_grids(
        range_grid: Vec<f64>,
        angle_grid: Vec<f64>,
        num_fast_time: usize,
        num_elements: usize,
    ) -> Result<Self> {
        for (name, grid) in [("range", &range_grid), ("angle", &angle_grid)] {
            if grid.is_empty() {
                return Err(Error::InvalidDictionary(format!("empty {name} grid")));
            }
            if grid.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::InvalidDictionary(format!(
                    "{name} grid must be strictly increasing"
                )));
            }
        }
        let uniform = (is_full_period_uniform(&range_grid)
            && is_full_period_uniform(&angle_grid)
            && range_grid.len() >= num_fast_time
            && angle_grid.len() >= num_elements)
            .then(|| UniformGrids {
                rho0: range_grid[0],
                phi0: angle_grid[0],
            });
        Ok(Self {
            range_atoms: steering_matrix(num_fast_time, &range_grid),
            angle_atoms: steering_matrix(num_elements, &angle_grid),
            range_grid,
            angle_grid,
            uniform,
        })
    }

    pub fn range_atoms(&self) -> &Array2<Complex64> {
        &self.range_atoms
    }

    pub fn angle_atoms(&self) -> &Array2<Complex64> {
        &self.angle_atoms
    }

    pub fn range_grid(&self) -> &[f64] {
        &self.range_grid
    }

    pub fn angle_grid(&self) -> &[f64] {
        &self.angle_grid
    }

    /// (Q, N) of the matrices this dictionary explains.
    pub fn signal_dim(&self) -> (usize, usize) {
        (self.angle_atoms.nrows(), self.range_atoms.nrows())
    }

    /// (G_theta, G_R).
    pub fn grid_dim(&self) -> (usize, usize) {
        (self.angle_grid.len(), self.range_grid.len())
    }

    /// Rank-1 atom `c(phi_i) b(rho_j)^T`.
    pub fn atom(&self, angle_index: usize, range_index: usize) -> Array2<Complex64> {
        let c = self.angle_atoms.column(angle_index);
        let b = self.range_atoms.column(range_index);
        Array2::from_shape_fn(self.signal_dim(), |(q, n)| c[q] * b[n])
    }

    /// `C^H Y B^*` as a G_theta x G_R matrix. Uniform full-period grids use
    /// a zero-padded 2D FFT; anything else uses two matrix products.
    pub fn correlate(&self, y: &Array2<Complex64>) -> Array2<Complex64> {
        match self.uniform {
            Some(UniformGrids { rho0, phi0 }) => {
                let shifted = if rho0 == 0.0 && phi0 == 0.0 {
                    y.clone()
                } else {
                    Array2::from_shape_fn(y.dim(), |(q, n)| {
                        y[(q, n)] * cis_cycles(-(phi0 * q as f64 + rho0 * n as f64))
                    })
                };
                let (gt, gr) = self.grid_dim();
                fft::padded_fft2(&shifted, gt, gr)
            }
            None => self.correlate_direct(y),
        }
    }

    fn correlate_direct(&self, y: &Array2<Complex64>) -> Array2<Complex64> {
        let ch = self.angle_atoms.t().mapv(|z| z.conj());
        let b_conj = self.range_atoms.mapv(|z| z.conj());
        ch.dot(y).dot(&b_conj)
    }
}

/// Uniform grids `rho_g = g / G_R` on [0, 1) and `phi_g = -0.5 + g / G_theta`
/// on [-0.5, 0.5).
pub fn build_dictionaries(g_r: usize, g_theta: usize, cfg: &RadarConfig) -> Result<DictionaryPair> {
    if g_r == 0 || g_theta == 0 {
        return Err(Error::InvalidDictionary("grid sizes must be positive".into()));
    }
    let range_grid = (0..g_r).map(|g| g as f64 / g_r as f64).collect();
    let angle_grid = (0..g_theta).map(|g| -0.5 + g as f64 / g_theta as f64).collect();
    DictionaryPair::from_grids(range_grid, angle_grid, cfg.num_fast_time, cfg.num_elements)
}

/// Dictionary oversampled `factor` times relative to the DFT grid.
pub fn oversampled_dictionaries(factor: usize, cfg: &RadarConfig) -> Result<DictionaryPair> {
    build_dictionaries(factor * cfg.num_fast_time, factor * cfg.num_elements, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomSelection {
    pub angle_index: usize,
    pub range_index: usize,
    /// Coefficient from the final joint least-squares fit.
    pub coefficient: Complex64,
    /// Residual energy right after this atom was added.
    pub residual_energy: f64,
}

/// Row-major argmax of |m|; the first maximum wins on exact ties, which
/// is the lowest (angle, range) index pair.
pub(crate) fn argmax_abs(m: &Array2<Complex64>) -> Option<((usize, usize), f64)> {
    let mut best: Option<((usize, usize), f64)> = None;
    for (idx, z) in m.indexed_iter() {
        let p = z.norm_sqr();
        if best.is_none_or(|(_, bp)| p > bp) {
            best = Some((idx, p));
        }
    }
    best
}

fn inner(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Two-dimensional orthogonal matching pursuit.
///
/// Each iteration picks the atom with the largest normalized correlation
/// with the residual, appends it to an incrementally re-orthogonalized
/// (modified Gram-Schmidt) basis and refits every selected coefficient by
/// least squares. Stops after `max_atoms` atoms or once the residual energy
/// falls below `residual_tol` times the input energy. A selected atom that
/// is linearly dependent on the previous ones is dropped and ends the search.
pub fn omp2d(
    y: &Array2<Complex64>,
    dict: &DictionaryPair,
    max_atoms: usize,
    residual_tol: f64,
) -> Result<Vec<AtomSelection>> {
    if y.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::NonFinite);
    }
    if y.dim() != dict.signal_dim() {
        return Err(Error::DimensionMismatch {
            expected: dict.signal_dim(),
            got: y.dim(),
        });
    }
    let initial = energy(y);
    let mut out: Vec<AtomSelection> = Vec::new();
    if initial == 0.0 {
        return Ok(out);
    }

    let mut basis: Vec<Array2<Complex64>> = Vec::new();
    // columns of the upper-triangular factor, r[k][l] for l <= k
    let mut r_cols: Vec<Vec<Complex64>> = Vec::new();
    let mut residual = y.clone();

    while out.len() < max_atoms {
        let Some(((i, j), p)) = argmax_abs(&dict.correlate(&residual)) else {
            break;
        };
        if p == 0.0 {
            break;
        }
        let atom = dict.atom(i, j);
        let atom_norm = energy(&atom).sqrt();
        let mut v = atom;
        let mut col = vec![Complex64::new(0.0, 0.0); basis.len() + 1];
        for _ in 0..2 {
            for (l, e) in basis.iter().enumerate() {
                let h = inner(e, &v);
                v.scaled_add(-h, e);
                col[l] += h;
            }
        }
        let nrm = energy(&v).sqrt();
        if nrm <= 1e-10 * atom_norm {
            break;
        }
        v.mapv_inplace(|z| z / nrm);
        col[basis.len()] = Complex64::new(nrm, 0.0);
        basis.push(v);
        r_cols.push(col);

        let proj: Vec<Complex64> = basis.iter().map(|e| inner(e, y)).collect();
        residual.assign(y);
        for (e, &h) in basis.iter().zip(&proj) {
            residual.scaled_add(-h, e);
        }
        let res_energy = energy(&residual);

        // back substitution R x = Q^H y
        let k = basis.len();
        let mut x = vec![Complex64::new(0.0, 0.0); k];
        for row in (0..k).rev() {
            let mut acc = proj[row];
            for c in row + 1..k {
                acc -= r_cols[c][row] * x[c];
            }
            x[row] = acc / r_cols[row][row];
        }
        out.push(AtomSelection {
            angle_index: i,
            range_index: j,
            coefficient: Complex64::new(0.0, 0.0),
            residual_energy: res_energy,
        });
        for (sel, c) in out.iter_mut().zip(x) {
            sel.coefficient = c;
        }
        if res_energy < residual_tol * initial {
            break;
        }
    }
    Ok(out)
}

/// Sparsity-1 2D-OMP: grid frequencies `(omega_range, omega_angle)` of the
/// single best atom.
pub fn refine_single(y_k: &IfData, dict: &DictionaryPair) -> Result<(f64, f64)> {
    if y_k.energy() == 0.0 {
        return Err(Error::NoSignal);
    }
    let atoms = omp2d(y_k.data(), dict, 1, 0.0)?;
    let a = atoms.first().ok_or(Error::NoSignal)?;
    Ok((dict.range_grid[a.range_index], dict.angle_grid[a.angle_index]))
}

/// Grid indices within `reach` cycles (circularly) of `center`.
fn indices_near(grid: &[f64], center: f64, reach: f64) -> Vec<usize> {
    grid.iter()
        .enumerate()
        .filter(|(_, &g)| {
            let d = (g - center).rem_euclid(1.0);
            d.min(1.0 - d) <= reach + 1e-12
        })
        .map(|(i, _)| i)
        .collect()
}

/// `refine_single` restricted to the atoms whose frequencies lie within
/// `half_width` DFT bins (angle, range) of the DFT bin `bin`. For input
/// already band-limited to that window by a spectral gate the correlation
/// peak lies inside it, and the search costs two small matrix products
/// instead of a full zero-padded transform.
pub fn refine_single_local(
    y_k: &IfData,
    dict: &DictionaryPair,
    bin: (usize, usize),
    half_width: (usize, usize),
) -> Result<(f64, f64)> {
    if !y_k.is_finite() {
        return Err(Error::NonFinite);
    }
    if y_k.dim() != dict.signal_dim() {
        return Err(Error::DimensionMismatch {
            expected: dict.signal_dim(),
            got: y_k.dim(),
        });
    }
    if y_k.energy() == 0.0 {
        return Err(Error::NoSignal);
    }
    let (q, n) = dict.signal_dim();
    let rows = indices_near(&dict.angle_grid, bin.0 as f64 / q as f64, half_width.0 as f64 / q as f64);
    let cols = indices_near(&dict.range_grid, bin.1 as f64 / n as f64, half_width.1 as f64 / n as f64);
    if rows.is_empty() || cols.is_empty() {
        return refine_single(y_k, dict);
    }
    let ch = Array2::from_shape_fn((rows.len(), q), |(i, k)| dict.angle_atoms[(k, rows[i])].conj());
    let bc = Array2::from_shape_fn((n, cols.len()), |(k, j)| dict.range_atoms[(k, cols[j])].conj());
    let corr = ch.dot(y_k.data()).dot(&bc);
    let ((i, j), _) = argmax_abs(&corr).ok_or(Error::NoSignal)?;
    Ok((dict.range_grid[cols[j]], dict.angle_grid[rows[i]]))
}

/// Least-squares amplitude of the rank-1 wideband model at the given
/// frequencies: `c^H (Y o Theta^*) b^* / (N Q)` evaluated on the
/// uncompensated measurement.
pub fn estimate_coefficient(
    y_wideband: &IfData,
    omega_range: f64,
    omega_angle: f64,
    cfg: &RadarConfig,
) -> Complex64 {
    let coupling = cfg.frac_bandwidth / cfg.num_fast_time as f64;
    project(y_wideband.data(), omega_range, omega_angle, coupling)
}

/// Same projection without the wideband phase, for data that is already
/// compensated or genuinely narrowband.
pub fn project_narrowband(y: &Array2<Complex64>, omega_range: f64, omega_angle: f64) -> Complex64 {
    project(y, omega_range, omega_angle, 0.0)
}

fn project(y: &Array2<Complex64>, omega_range: f64, omega_angle: f64, coupling: f64) -> Complex64 {
    let sw = coupling * omega_angle;
    let mut acc = Complex64::new(0.0, 0.0);
    for ((q, n), z) in y.indexed_iter() {
        let (qf, nf) = (q as f64, n as f64);
        acc += z * cis_cycles(-(omega_range * nf + omega_angle * qf + sw * qf * nf));
    }
    acc / y.len().max(1) as f64
}

/// Subtracts the full wideband single-target model of `entry` from `y`.
pub fn eliminate(y: &IfData, entry: &SignatureEntry, cfg: &RadarConfig) -> IfData {
    let mut out = y.clone();
    let coupling = cfg.frac_bandwidth / cfg.num_fast_time as f64;
    add_component(out.data_mut(), entry, coupling, -1.0);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::Signature;
    use crate::synth::{synthesize_narrowband, synthesize_wideband};

    fn small_cfg(q: usize, n: usize) -> RadarConfig {
        RadarConfig::new(77e9, 0.1, n, q).unwrap()
    }

    #[test]
    fn dft_grid_dictionary_is_inverse_dft_kernel() {
        let cfg = small_cfg(8, 16);
        let d = build_dictionaries(16, 8, &cfg).unwrap();
        for ((n, g), z) in d.range_atoms().indexed_iter() {
            let want = cis_cycles((g * n) as f64 / 16.0);
            assert!((z - want).norm() < 1e-14);
        }
        assert!(d.range_atoms().column(0).iter().all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn column_norms_and_first_entries() {
        let cfg = small_cfg(12, 20);
        let d = oversampled_dictionaries(4, &cfg).unwrap();
        for col in d.range_atoms().columns() {
            assert_eq!(col[0], Complex64::new(1.0, 0.0));
            let nrm: f64 = col.iter().map(|z| z.norm_sqr()).sum();
            assert!((nrm.sqrt() - 20f64.sqrt()).abs() < 1e-12);
        }
        for col in d.angle_atoms().columns() {
            assert_eq!(col[0], Complex64::new(1.0, 0.0));
            let nrm: f64 = col.iter().map(|z| z.norm_sqr()).sum();
            assert!((nrm.sqrt() - 12f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_grid_is_error() {
        let cfg = small_cfg(8, 8);
        assert!(build_dictionaries(0, 8, &cfg).is_err());
        assert!(DictionaryPair::from_grids(vec![0.1, 0.1], vec![0.0], 8, 8).is_err());
    }

    #[test]
    fn fft_correlation_matches_matrix_products() {
        let cfg = small_cfg(6, 10);
        let d = oversampled_dictionaries(3, &cfg).unwrap();
        let y = Array2::from_shape_fn((6, 10), |(q, n)| {
            Complex64::new((q as f64 + 0.3 * n as f64).cos(), (n as f64 * 0.2).sin())
        });
        let fast = d.correlate(&y);
        let slow = d.correlate_direct(&y);
        for (a, b) in fast.iter().zip(slow.iter()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn single_on_grid_exact() {
        let cfg = small_cfg(16, 16);
        let d = oversampled_dictionaries(4, &cfg).unwrap();
        let amp = Complex64::new(-0.4, 1.3);
        let entry = SignatureEntry::new(d.range_grid()[37], d.angle_grid()[11], amp);
        let y = synthesize_narrowband(&Signature::new(vec![entry]).unwrap(), &cfg, 0.0, 0);
        let atoms = omp2d(y.data(), &d, 1, 0.0).unwrap();
        assert_eq!((atoms[0].angle_index, atoms[0].range_index), (11, 37));
        assert!((atoms[0].coefficient - amp).norm() < 1e-9);
    }

    #[test]
    fn off_grid_refines_to_adjacent_point() {
        let cfg = small_cfg(16, 16);
        let d = oversampled_dictionaries(4, &cfg).unwrap();
        let step_r = 1.0 / 64.0;
        let step_a = 1.0 / 64.0;
        let r = d.range_grid()[20] + 0.5 * step_r;
        let a = d.angle_grid()[40] + 0.5 * step_a;
        let entry = SignatureEntry::new(r, a, Complex64::new(1.0, 0.0));
        let y = synthesize_narrowband(&Signature::new(vec![entry]).unwrap(), &cfg, 0.0, 0);
        let (rr, aa) = refine_single(&y, &d).unwrap();
        assert!((rr - r).abs() <= 0.5 * step_r + 1e-12);
        assert!((aa - a).abs() <= 0.5 * step_a + 1e-12);
    }

    #[test]
    fn local_refine_matches_full_search_on_isolated_target() {
        let cfg = RadarConfig::reference();
        let dict = oversampled_dictionaries(8, &cfg).unwrap();
        for (r, a) in [(0.3137, 0.2001), (0.9, -0.47), (0.01, 0.49)] {
            let s = Signature::new(vec![SignatureEntry::new(r, a, Complex64::new(0.6, 0.8))]).unwrap();
            let y = synthesize_narrowband(&s, &cfg, 0.0, 0);
            let bin = (
                (a.rem_euclid(1.0) * 128.0).round() as usize % 128,
                (r * 128.0).round() as usize % 128,
            );
            assert_eq!(
                refine_single_local(&y, &dict, bin, (4, 4)).unwrap(),
                refine_single(&y, &dict).unwrap()
            );
        }
    }

    #[test]
    fn refine_zero_is_error() {
        let cfg = small_cfg(8, 8);
        let d = oversampled_dictionaries(2, &cfg).unwrap();
        assert!(matches!(refine_single(&IfData::zeros(cfg), &d), Err(Error::NoSignal)));
    }

    #[test]
    fn non_finite_rejected() {
        let cfg = small_cfg(8, 8);
        let d = oversampled_dictionaries(2, &cfg).unwrap();
        let mut y = Array2::zeros((8, 8));
        y[(1, 1)] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(omp2d(&y, &d, 1, 0.0), Err(Error::NonFinite)));
    }

    #[test]
    fn two_on_grid_targets_recovered() {
        let cfg = small_cfg(16, 16);
        let d = oversampled_dictionaries(2, &cfg).unwrap();
        let e1 = SignatureEntry::new(d.range_grid()[5], d.angle_grid()[9], Complex64::new(1.0, 0.2));
        let e2 = SignatureEntry::new(d.range_grid()[21], d.angle_grid()[25], Complex64::new(-0.5, 0.7));
        let y = synthesize_narrowband(&Signature::new(vec![e1, e2]).unwrap(), &cfg, 0.0, 0);
        let atoms = omp2d(y.data(), &d, 2, 0.0).unwrap();
        assert_eq!(atoms.len(), 2);
        let mut got: Vec<_> = atoms.iter().map(|a| (a.angle_index, a.range_index)).collect();
        got.sort();
        assert_eq!(got, vec![(9, 5), (25, 21)]);
        assert!(atoms[1].residual_energy < 1e-9 * y.energy());
        // direct subtraction oracle
        let mut rebuilt = y.data().clone();
        for a in &atoms {
            rebuilt.scaled_add(-a.coefficient, &d.atom(a.angle_index, a.range_index));
        }
        assert!(energy(&rebuilt) < 1e-9 * y.energy());
    }

    #[test]
    fn coefficient_is_exact_for_own_model() {
        let cfg = RadarConfig::reference();
        let amp = Complex64::new(0.6, -0.8);
        let e = SignatureEntry::new(0.37, -0.29, amp);
        let y = synthesize_wideband(&Signature::new(vec![e]).unwrap(), &cfg, 0.0, 0);
        let a = estimate_coefficient(&y, 0.37, -0.29, &cfg);
        assert!((a - amp).norm() < 1e-9 * amp.norm());
        assert_eq!(estimate_coefficient(&IfData::zeros(cfg), 0.37, -0.29, &cfg), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn elimination_cancels_exact_target() {
        let cfg = RadarConfig::reference();
        let e1 = SignatureEntry::new(0.81, 0.25, Complex64::new(1.0, 0.0));
        let e2 = SignatureEntry::new(0.39, -0.35, Complex64::new(0.0, 1.0));
        let both = synthesize_wideband(&Signature::new(vec![e1, e2]).unwrap(), &cfg, 0.0, 0);
        let only2 = synthesize_wideband(&Signature::new(vec![e2]).unwrap(), &cfg, 0.0, 0);
        let res = eliminate(&both, &e1, &cfg);
        for (a, b) in res.data().iter().zip(only2.data().iter()) {
            assert!((a - b).norm() < 1e-9);
        }
        let zero_amp = SignatureEntry::new(0.81, 0.25, Complex64::new(0.0, 0.0));
        assert_eq!(eliminate(&both, &zero_amp, &cfg), both);
    }
}
