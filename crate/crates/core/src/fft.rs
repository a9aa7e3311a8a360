//! Multi-dimensional FFT over row-major arrays.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// In-place unnormalized DFT along every axis of a row-major array.
///
/// Forward: `X_k = Σ_j x_j e^{-2πi j·k/n}`; inverse uses `e^{+2πi…}`.
pub fn fft_nd(data: &mut [Complex64], shape: &[usize], inverse: bool) {
    assert_eq!(data.len(), shape.iter().product::<usize>());
    let mut planner = FftPlanner::<f64>::new();
    let total = data.len();
    let mut stride = total;
    let mut line = Vec::new();
    for &n in shape {
        stride /= n;
        if n == 1 {
            continue;
        }
        let fft = if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        };
        line.resize(n, Complex64::new(0.0, 0.0));
        // Each line along this axis starts at `outer*n*stride + inner`.
        let block = n * stride;
        for outer in 0..total / block {
            for inner in 0..stride {
                let base = outer * block + inner;
                for (k, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + k * stride];
                }
                fft.process(&mut line);
                for (k, v) in line.iter().enumerate() {
                    data[base + k * stride] = *v;
                }
            }
        }
    }
}
