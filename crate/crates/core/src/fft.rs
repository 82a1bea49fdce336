//! Thin wrappers over rustfft used by the batch engines and lattice
//! quadratures. All transforms are unnormalized; callers divide by length
//! where a true inverse is needed.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// In-place forward DFT: `X[k] = sum_j x[j] e(-jk/n)`.
pub(crate) fn dft_forward(data: &mut [Complex64]) {
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(data.len()).process(data);
}

/// In-place unnormalized inverse DFT: `X[k] = sum_j x[j] e(+jk/n)`.
pub(crate) fn dft_inverse(data: &mut [Complex64]) {
    let mut planner = FftPlanner::new();
    planner.plan_fft_inverse(data.len()).process(data);
}

/// Cyclic convolution `c[r] = sum_{i+j == r (mod n)} a[i] b[j]`.
pub(crate) fn cyclic_convolution(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    let mut fa = a.to_vec();
    let mut fb = b.to_vec();
    dft_forward(&mut fa);
    dft_forward(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    dft_inverse(&mut fa);
    let scale = 1.0 / n as f64;
    for x in fa.iter_mut() {
        *x *= scale;
    }
    fa
}
