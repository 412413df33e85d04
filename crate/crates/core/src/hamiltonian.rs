use std::sync::Arc;

use ndarray::Array1;
use num_complex::Complex64 as C64;

use crate::basis::{diabatic_matrix, epsilon};
use crate::error::{Result, SwionError};
use crate::fft::FftCache;
use crate::grid::GridSpec;
use crate::params::IonTrapParams;
use crate::state::{Basis, SpinorState};

/// The two-channel Hamiltonian in the diabatic representation as a matrix
/// free operator: kinetic term by FFT, potential term pointwise. This is
/// the single hot object of a propagation run; one application per
/// Chebyshev term.
pub struct HamOp {
    grid: Arc<GridSpec>,
    /// full diagonal potentials (harmonic + interaction) per channel
    v11: Array1<f64>,
    v22: Array1<f64>,
    /// constant real channel coupling
    v12: f64,
    /// p²/2m in FFT frequency order
    kin: Array1<f64>,
    cache: FftCache,
    buf: Vec<C64>,
}

impl HamOp {
    pub fn new(params: &IonTrapParams, grid: Arc<GridSpec>) -> Self {
        let n = grid.n_points;
        let v = diabatic_matrix(params, &grid);
        let mut v11 = v.v11;
        let mut v22 = v.v22;
        for (j, &x) in grid.x.iter().enumerate() {
            let h = params.harmonic(x);
            v11[j] += h;
            v22[j] += h;
        }
        let kin = grid.p.mapv(|p| p * p / (2.0 * params.m));
        HamOp {
            grid,
            v11,
            v22,
            v12: params.delta / 2.0,
            kin,
            cache: FftCache::new(n),
            buf: vec![C64::new(0.0, 0.0); n],
        }
    }

    pub fn grid(&self) -> &Arc<GridSpec> {
        &self.grid
    }

    pub fn n_points(&self) -> usize {
        self.grid.n_points
    }

    /// out_u/out_l := H (in_u, in_l). All slices must have grid length;
    /// outputs are overwritten.
    pub fn apply(&mut self, in_u: &[C64], in_l: &[C64], out_u: &mut [C64], out_l: &mut [C64]) {
        let n = self.grid.n_points;
        debug_assert!(
            in_u.len() == n && in_l.len() == n && out_u.len() == n && out_l.len() == n
        );
        // kinetic part per channel via FFT, then add the 2x2 potential
        self.buf.copy_from_slice(in_u);
        self.cache.forward(&mut self.buf);
        for (b, &k) in self.buf.iter_mut().zip(self.kin.iter()) {
            *b *= k;
        }
        self.cache.inverse(&mut self.buf);
        out_u.copy_from_slice(&self.buf);

        self.buf.copy_from_slice(in_l);
        self.cache.forward(&mut self.buf);
        for (b, &k) in self.buf.iter_mut().zip(self.kin.iter()) {
            *b *= k;
        }
        self.cache.inverse(&mut self.buf);
        out_l.copy_from_slice(&self.buf);

        for j in 0..n {
            out_u[j] += self.v11[j] * in_u[j] + self.v12 * in_l[j];
            out_l[j] += self.v22[j] * in_l[j] + self.v12 * in_u[j];
        }
    }

    /// H·s as a new state (requires the diabatic representation).
    pub fn apply_state(&mut self, s: &SpinorState) -> Result<SpinorState> {
        if s.basis != Basis::Diabatic {
            return Err(SwionError::BasisMismatch {
                expected: Basis::Diabatic.to_string(),
                got: s.basis.to_string(),
            });
        }
        if s.n_points() != self.grid.n_points {
            return Err(SwionError::GridMismatch);
        }
        let mut out = SpinorState::zeros(Arc::clone(&s.grid), Basis::Diabatic);
        out.time = s.time;
        let (u, l) = (s.upper.as_slice().unwrap(), s.lower.as_slice().unwrap());
        let (ou, ol) = (
            out.upper.as_slice_mut().unwrap(),
            out.lower.as_slice_mut().unwrap(),
        );
        self.apply(u, l, ou, ol);
        Ok(out)
    }

    /// ⟨s|H|s⟩ (real part; the value is real for any state by Hermiticity,
    /// which the test suite checks explicitly).
    pub fn expectation(&mut self, s: &SpinorState) -> Result<f64> {
        let hs = self.apply_state(s)?;
        Ok(s.overlap(&hs)?.re)
    }
}

/// One-shot H·s without reusing plans; convenience wrapper for callers
/// outside the propagation loop.
pub fn apply_hamiltonian(s: &SpinorState, params: &IonTrapParams) -> Result<SpinorState> {
    HamOp::new(params, Arc::clone(&s.grid)).apply_state(s)
}

/// Guaranteed-bracketing spectral interval of H on this grid: kinetic
/// cutoff plus pointwise potential-eigenvalue extrema (h ± ε), inflated by
/// `margin` about the midpoint.
pub fn spectral_bounds(params: &IonTrapParams, grid: &GridSpec, margin: f64) -> (f64, f64) {
    let kin_max = grid.p_max() * grid.p_max() / (2.0 * params.m);
    let mut v_max = f64::NEG_INFINITY;
    let mut v_min = f64::INFINITY;
    for &x in grid.x.iter() {
        let h = params.harmonic(x);
        let e = epsilon(params, x);
        v_max = v_max.max(h + e);
        v_min = v_min.min(h - e);
    }
    let e_max0 = kin_max + v_max;
    let e_min0 = v_min;
    let mid = 0.5 * (e_max0 + e_min0);
    let half = 0.5 * (e_max0 - e_min0) * margin;
    (mid - half, mid + half)
}
