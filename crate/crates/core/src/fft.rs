//! Thin FFT helpers over rustfft: 1-D spectral filters and 2-D Gaussian
//! convolutions on uniform grids.
//!
//! All convolutions are cyclic; the distributions this crate handles decay to
//! numerical zero well inside the grid, which keeps wrap-around negligible.

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;

/// Angular frequencies 2π * fftfreq(n, spacing).
pub fn angular_frequencies(n: usize, spacing: f64) -> Vec<f64> {
    let df = 1.0 / (n as f64 * spacing);
    (0..n)
        .map(|i| {
            let k = if i <= (n - 1) / 2 { i as f64 } else { i as f64 - n as f64 };
            2.0 * std::f64::consts::PI * k * df
        })
        .collect()
}

fn fft_inplace(data: &mut [Complex64], inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(data.len())
    } else {
        planner.plan_fft_forward(data.len())
    };
    fft.process(data);
    if inverse {
        let scale = 1.0 / data.len() as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

/// Applies a real spectral multiplier to real samples on a uniform grid:
/// out = IFFT(multiplier(k) * FFT(values)).
pub fn apply_spectral_multiplier(values: &[f64], spacing: f64, multiplier: impl Fn(f64) -> f64) -> Vec<f64> {
    let n = values.len();
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_inplace(&mut buf, false);
    for (v, k) in buf.iter_mut().zip(angular_frequencies(n, spacing)) {
        *v *= multiplier(k);
    }
    fft_inplace(&mut buf, true);
    buf.iter().map(|c| c.re).collect()
}

fn fft2_inplace(data: &mut Array2<Complex64>, inverse: bool) {
    let (n_rows, n_cols) = data.dim();
    let mut planner = FftPlanner::new();
    let fft_row = if inverse {
        planner.plan_fft_inverse(n_cols)
    } else {
        planner.plan_fft_forward(n_cols)
    };
    let mut scratch = vec![Complex64::new(0.0, 0.0); n_cols];
    for mut row in data.rows_mut() {
        scratch.copy_from_slice(row.as_slice().expect("contiguous row"));
        fft_row.process(&mut scratch);
        row.as_slice_mut().unwrap().copy_from_slice(&scratch);
    }
    let fft_col = if inverse {
        planner.plan_fft_inverse(n_rows)
    } else {
        planner.plan_fft_forward(n_rows)
    };
    let mut col_buf = vec![Complex64::new(0.0, 0.0); n_rows];
    for j in 0..n_cols {
        for i in 0..n_rows {
            col_buf[i] = data[(i, j)];
        }
        fft_col.process(&mut col_buf);
        for i in 0..n_rows {
            data[(i, j)] = col_buf[i];
        }
    }
    if inverse {
        let scale = 1.0 / (n_rows * n_cols) as f64;
        data.mapv_inplace(|v| v * scale);
    }
}

/// Convolves real 2-D samples with a centered Gaussian of covariance `sigma`
/// (2x2 symmetric PSD, in grid units of the two axes). Implemented as a
/// spectral multiplication by exp(-k' sigma k / 2), which needs no inverse of
/// sigma and handles the singular case smoothly.
pub fn gaussian_convolve_2d(
    values: &Array2<f64>,
    spacing_rows: f64,
    spacing_cols: f64,
    sigma: [[f64; 2]; 2],
) -> Array2<f64> {
    let (n_rows, n_cols) = values.dim();
    let mut data = values.mapv(|v| Complex64::new(v, 0.0));
    fft2_inplace(&mut data, false);
    let k_rows = angular_frequencies(n_rows, spacing_rows);
    let k_cols = angular_frequencies(n_cols, spacing_cols);
    for i in 0..n_rows {
        for j in 0..n_cols {
            let (kq, kp) = (k_rows[i], k_cols[j]);
            let quad = sigma[0][0] * kq * kq + 2.0 * sigma[0][1] * kq * kp + sigma[1][1] * kp * kp;
            data[(i, j)] *= (-0.5 * quad).exp();
        }
    }
    fft2_inplace(&mut data, true);
    data.mapv(|v| v.re)
}
