//! Thin 2D FFT helpers over rustfft with a per-thread planner.

use std::cell::RefCell;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(len, direction))
}

/// Transforms every contiguous `len`-chunk of `buf` in place.
fn batch(buf: &mut [Complex64], len: usize, direction: FftDirection) {
    if len <= 1 || buf.is_empty() {
        return;
    }
    let fft = plan(len, direction);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    fft.process_with_scratch(buf, &mut scratch);
}

/// Unnormalized 2D transform in place: along each row, then along each column.
pub fn fft2_inplace(m: &mut Array2<Complex64>, direction: FftDirection) {
    let (rows, cols) = m.dim();
    if !m.is_standard_layout() {
        *m = m.as_standard_layout().to_owned();
    }
    batch(m.as_slice_mut().expect("standard layout"), cols, direction);
    let mut t: Vec<Complex64> = Vec::with_capacity(rows * cols);
    for c in 0..cols {
        t.extend(m.column(c).iter().copied());
    }
    batch(&mut t, rows, direction);
    for (c, chunk) in t.chunks_exact(rows).enumerate() {
        for (r, v) in chunk.iter().enumerate() {
            m[(r, c)] = *v;
        }
    }
}

/// Forward unnormalized 2D DFT.
pub fn fft2(m: &Array2<Complex64>) -> Array2<Complex64> {
    let mut out = m.as_standard_layout().to_owned();
    fft2_inplace(&mut out, FftDirection::Forward);
    out
}

/// Inverse 2D DFT normalized by 1 / (rows * cols).
pub fn ifft2(m: &Array2<Complex64>) -> Array2<Complex64> {
    let mut out = m.as_standard_layout().to_owned();
    fft2_inplace(&mut out, FftDirection::Inverse);
    let scale = 1.0 / (out.len().max(1) as f64);
    out.mapv_inplace(|z| z * scale);
    out
}

/// Forward 2D DFT of `m` zero-padded to `(out_rows, out_cols)`.
/// Entry (i, j) equals `sum_{q,n} m[q,n] exp(-j2pi(i q / out_rows + j n / out_cols))`.
pub fn padded_fft2(m: &Array2<Complex64>, out_rows: usize, out_cols: usize) -> Array2<Complex64> {
    let (rows, cols) = m.dim();
    assert!(out_rows >= rows && out_cols >= cols, "padding must not truncate");
    let zero = Complex64::new(0.0, 0.0);
    // rows first, only the populated ones
    let mut rowbuf = vec![zero; rows * out_cols];
    for r in 0..rows {
        for c in 0..cols {
            rowbuf[r * out_cols + c] = m[(r, c)];
        }
    }
    batch(&mut rowbuf, out_cols, FftDirection::Forward);
    // columns, transposed layout
    let mut colbuf = vec![zero; out_cols * out_rows];
    for r in 0..rows {
        for c in 0..out_cols {
            colbuf[c * out_rows + r] = rowbuf[r * out_cols + c];
        }
    }
    batch(&mut colbuf, out_rows, FftDirection::Forward);
    let mut out = Array2::zeros((out_rows, out_cols));
    for c in 0..out_cols {
        for r in 0..out_rows {
            out[(r, c)] = colbuf[c * out_rows + r];
        }
    }
    out
}
