//! Thin 2-D wrapper over rustfft with a per-size plan cache.
//!
//! Conventions: `forward` computes the raw sum `sum_x f(x) e^{-ik.x}` and
//! `inverse` the raw sum `sum_k c(k) e^{+ik.x}`; normalization (1/n^2 on the
//! forward side, so coefficients are Fourier-series coefficients) is applied
//! by the caller.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn plans(n: usize) -> Arc<Plans> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Plans>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("fft plan cache poisoned");
    map.entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Plans {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

fn transform2(buf: &mut [Complex64], n: usize, fft: &Arc<dyn Fft<f64>>) {
    debug_assert_eq!(buf.len(), n * n);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    for row in buf.chunks_exact_mut(n) {
        fft.process_with_scratch(row, &mut scratch);
    }
    let mut col = vec![Complex64::default(); n];
    for j in 0..n {
        for i in 0..n {
            col[i] = buf[i * n + j];
        }
        fft.process_with_scratch(&mut col, &mut scratch);
        for i in 0..n {
            buf[i * n + j] = col[i];
        }
    }
}

/// In-place unnormalized forward transform of an `n x n` row-major buffer.
pub(crate) fn forward2(buf: &mut [Complex64], n: usize) {
    let p = plans(n);
    transform2(buf, n, &p.forward);
}

/// In-place unnormalized inverse transform of an `n x n` row-major buffer.
pub(crate) fn inverse2(buf: &mut [Complex64], n: usize) {
    let p = plans(n);
    transform2(buf, n, &p.inverse);
}
