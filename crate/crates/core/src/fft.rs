use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

/// Cached forward/inverse FFT plans of a fixed size, with shared scratch.
///
/// The forward transform is unnormalized; the inverse applies the 1/n
/// factor, so `forward` followed by `inverse` is the identity.
pub struct FftCache {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: Vec<C64>,
}

impl FftCache {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let scratch_len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        FftCache { n, fwd, inv, scratch: vec![C64::new(0.0, 0.0); scratch_len] }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In-place forward DFT (unnormalized).
    pub fn forward(&mut self, data: &mut [C64]) {
        debug_assert_eq!(data.len(), self.n);
        self.fwd.process_with_scratch(data, &mut self.scratch);
    }

    /// In-place inverse DFT including the 1/n normalization.
    pub fn inverse(&mut self, data: &mut [C64]) {
        debug_assert_eq!(data.len(), self.n);
        self.inv.process_with_scratch(data, &mut self.scratch);
        let scale = 1.0 / self.n as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}
