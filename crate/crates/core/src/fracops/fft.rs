//! In-place n-dimensional FFT on a row-major cube, one axis at a time.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// Forward (or normalized inverse) transform of `data`, a cube of side `side` in `dim` axes.
pub fn fft_nd(data: &mut [Complex64], dim: usize, side: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse { planner.plan_fft_inverse(side) } else { planner.plan_fft_forward(side) };
    let total = data.len();
    let mut line = vec![Complex64::new(0.0, 0.0); side];
    for axis in 0..dim {
        let stride = side.pow((dim - 1 - axis) as u32);
        for start in 0..total {
            // first element of each line along `axis`
            if (start / stride) % side != 0 {
                continue;
            }
            for (k, l) in line.iter_mut().enumerate() {
                *l = data[start + k * stride];
            }
            fft.process(&mut line);
            for (k, l) in line.iter().enumerate() {
                data[start + k * stride] = *l;
            }
        }
    }
    if inverse {
        let s = 1.0 / total as f64;
        for x in data.iter_mut() {
            *x *= s;
        }
    }
}

/// Signed frequency index of bin `k` on a period of `side` bins.
pub fn signed_freq(k: usize, side: usize) -> f64 {
    if k <= side / 2 {
        k as f64
    } else {
        k as f64 - side as f64
    }
}
