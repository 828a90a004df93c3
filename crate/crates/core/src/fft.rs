//! Unnormalized multi-dimensional FFTs over row-major buffers.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// In-place unnormalized transform of `data` (row-major with `shape`) along `axis`.
///
/// Forward uses `e^{-i}`; inverse uses `e^{+i}` without the `1/n` factor.
pub fn fft_axis(data: &mut [Complex64], shape: &[usize], axis: usize, inverse: bool) {
    let n = shape[axis];
    debug_assert_eq!(data.len(), shape.iter().product::<usize>());
    if n <= 1 {
        return;
    }
    let fft = plan(n, inverse);
    let inner: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    if inner == 1 {
        fft.process_with_scratch(data, &mut scratch);
        return;
    }
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for o in 0..outer {
        let base = o * n * inner;
        for s in 0..inner {
            for (k, v) in line.iter_mut().enumerate() {
                *v = data[base + k * inner + s];
            }
            fft.process_with_scratch(&mut line, &mut scratch);
            for (k, v) in line.iter().enumerate() {
                data[base + k * inner + s] = *v;
            }
        }
    }
}

/// Transform along every axis.
pub fn fft_all(data: &mut [Complex64], shape: &[usize], inverse: bool) {
    for axis in 0..shape.len() {
        fft_axis(data, shape, axis, inverse);
    }
}

/// `(-1)^k` for a signed index; FFT index parity equals signed parity on even axes.
#[inline]
pub(crate) fn parity_sign(i: usize) -> f64 {
    if i % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}
