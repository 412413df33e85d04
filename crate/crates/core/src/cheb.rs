use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SwionError};
use crate::grid::GridSpec;
use crate::hamiltonian::{spectral_bounds, HamOp};
use crate::params::IonTrapParams;
use crate::state::{Basis, SpinorState};

/// Hard ceiling on the expansion order; hitting it signals broken spectral
/// bounds rather than a legitimately huge step.
pub const MAX_CHEB_ORDER: usize = 50_000;

/// Propagation controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagatorConfig {
    /// observable sampling interval; also the Chebyshev step size
    pub dt_report: f64,
    /// final time
    pub t_end: f64,
    /// safety factor >= 1 on the estimated spectral range
    #[serde(default = "default_margin")]
    pub spectral_margin: f64,
    /// truncation threshold for expansion coefficients, in (0, 1e-8]
    #[serde(default = "default_tail_tol")]
    pub cheb_tail_tol: f64,
}

fn default_margin() -> f64 {
    1.1
}

fn default_tail_tol() -> f64 {
    1e-12
}

impl PropagatorConfig {
    pub fn new(dt_report: f64, t_end: f64) -> Self {
        PropagatorConfig {
            dt_report,
            t_end,
            spectral_margin: default_margin(),
            cheb_tail_tol: default_tail_tol(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt_report.is_finite() && self.dt_report > 0.0) {
            return Err(SwionError::InvalidParams(format!(
                "dt_report = {} must be > 0",
                self.dt_report
            )));
        }
        if !(self.t_end.is_finite() && self.t_end >= self.dt_report) {
            return Err(SwionError::InvalidParams(format!(
                "t_end = {} must be >= dt_report = {}",
                self.t_end, self.dt_report
            )));
        }
        if !(self.spectral_margin.is_finite() && self.spectral_margin >= 1.0) {
            return Err(SwionError::InvalidParams(format!(
                "spectral_margin = {} must be >= 1",
                self.spectral_margin
            )));
        }
        if !(self.cheb_tail_tol > 0.0 && self.cheb_tail_tol <= 1e-8) {
            return Err(SwionError::InvalidParams(format!(
                "cheb_tail_tol = {} must lie in (0, 1e-8]",
                self.cheb_tail_tol
            )));
        }
        Ok(())
    }
}

/// J_0(x)..J_{k_max}(x) by Miller's backward recurrence, normalized with
/// J_0 + 2 J_2 + 2 J_4 + ... = 1. Stable for all orders including the
/// super-exponentially small tail k >> x, which upward recurrence destroys.
pub fn bessel_j_seq(x: f64, k_max: usize) -> Vec<f64> {
    assert!(x >= 0.0 && x.is_finite());
    if x == 0.0 {
        let mut out = vec![0.0; k_max + 1];
        out[0] = 1.0;
        return out;
    }
    // start far enough above k_max that the downward error has decayed
    let start = k_max + 60 + (2.0 * (k_max as f64 + x)).sqrt() as usize;
    let mut f = vec![0.0f64; start + 2];
    f[start + 1] = 0.0;
    f[start] = 1e-200;
    for k in (1..=start).rev() {
        f[k - 1] = (2.0 * k as f64 / x) * f[k] - f[k + 1];
        // the unnormalized sequence grows fast below the turnover; rescale
        // everything computed so far before it overflows
        if f[k - 1].abs() > 1e250 {
            let scale = 1e-250;
            for v in f.iter_mut().skip(k - 1) {
                *v *= scale;
            }
        }
    }
    let mut norm = f[0];
    let mut k = 2;
    while k <= start {
        norm += 2.0 * f[k];
        k += 2;
    }
    let inv = 1.0 / norm;
    f.truncate(k_max + 1);
    for v in f.iter_mut() {
        *v *= inv;
    }
    f
}

/// Truncation order for scaled step argument alpha: the first k past the
/// Bessel turnover where |a_k| = (2 - delta_k0)|J_k(alpha)| drops below
/// tol, plus 10 extra terms.
pub fn chebyshev_order(alpha: f64, tol: f64, ceiling: usize) -> Result<usize> {
    let mut guess = (1.2 * alpha) as usize + 120;
    loop {
        if guess > ceiling {
            guess = ceiling;
        }
        let j = bessel_j_seq(alpha, guess);
        // search beyond the turnover only; below it the coefficients oscillate
        let from = (alpha.ceil() as usize).min(guess);
        for (k, jk) in j.iter().enumerate().skip(from) {
            let ak = if k == 0 { jk.abs() } else { 2.0 * jk.abs() };
            if ak < tol {
                let order = k + 10;
                if order > ceiling {
                    break;
                }
                return Ok(order);
            }
        }
        if guess == ceiling {
            return Err(SwionError::NonConvergence { max_order: ceiling, alpha });
        }
        guess *= 2;
    }
}

/// Chebyshev-expansion propagator: applies e^{-iH dt} as
/// e^{-ib dt} sum_k a_k T_k(H_s) with H_s = (H - b)/a affinely scaled to
/// unit spectral radius, a_k = (2-delta_k0)(-i)^k J_k(a dt).
///
/// One Hamiltonian application per expansion term; buffers are reused
/// across steps.
pub struct ChebStepper {
    op: HamOp,
    e_min: f64,
    e_max: f64,
    tail_tol: f64,
    prev_u: Vec<C64>,
    prev_l: Vec<C64>,
    cur_u: Vec<C64>,
    cur_l: Vec<C64>,
    tmp_u: Vec<C64>,
    tmp_l: Vec<C64>,
    acc_u: Vec<C64>,
    acc_l: Vec<C64>,
}

impl ChebStepper {
    pub fn new(params: &IonTrapParams, grid: Arc<GridSpec>, cfg: &PropagatorConfig) -> Result<Self> {
        cfg.validate()?;
        let (e_min, e_max) = spectral_bounds(params, &grid, cfg.spectral_margin);
        let n = grid.n_points;
        let zero = vec![C64::new(0.0, 0.0); n];
        Ok(ChebStepper {
            op: HamOp::new(params, grid),
            e_min,
            e_max,
            tail_tol: cfg.cheb_tail_tol,
            prev_u: zero.clone(),
            prev_l: zero.clone(),
            cur_u: zero.clone(),
            cur_l: zero.clone(),
            tmp_u: zero.clone(),
            tmp_l: zero.clone(),
            acc_u: zero.clone(),
            acc_l: zero,
        })
    }

    pub fn spectral_range(&self) -> (f64, f64) {
        (self.e_min, self.e_max)
    }

    /// Expansion order that a step of size dt will use.
    pub fn order_for(&self, dt: f64) -> Result<usize> {
        let a = 0.5 * (self.e_max - self.e_min);
        chebyshev_order(a * dt, self.tail_tol, MAX_CHEB_ORDER)
    }

    /// e^{-iH dt}·s. The state must be diabatic and on the stepper's grid.
    pub fn step(&mut self, s: &SpinorState, dt: f64) -> Result<SpinorState> {
        if s.basis != Basis::Diabatic {
            return Err(SwionError::BasisMismatch {
                expected: Basis::Diabatic.to_string(),
                got: s.basis.to_string(),
            });
        }
        if s.n_points() != self.op.n_points() {
            return Err(SwionError::GridMismatch);
        }
        let n = s.n_points();
        let a = 0.5 * (self.e_max - self.e_min);
        let b = 0.5 * (self.e_max + self.e_min);
        let alpha = a * dt;
        let order = chebyshev_order(alpha, self.tail_tol, MAX_CHEB_ORDER)?;
        let bessel = bessel_j_seq(alpha, order);

        let su = s.upper.as_slice().unwrap();
        let sl = s.lower.as_slice().unwrap();

        // phi_0 = s
        self.prev_u.copy_from_slice(su);
        self.prev_l.copy_from_slice(sl);
        // phi_1 = H_s s = (H s - b s)/a
        self.op.apply(su, sl, &mut self.cur_u, &mut self.cur_l);
        let inv_a = 1.0 / a;
        for j in 0..n {
            self.cur_u[j] = (self.cur_u[j] - b * su[j]) * inv_a;
            self.cur_l[j] = (self.cur_l[j] - b * sl[j]) * inv_a;
        }

        // acc = a_0 phi_0 + a_1 phi_1 with a_k = (2-d_k0)(-i)^k J_k
        let c0 = C64::new(bessel[0], 0.0);
        let c1 = C64::new(0.0, -2.0 * bessel[1]);
        for j in 0..n {
            self.acc_u[j] = c0 * self.prev_u[j] + c1 * self.cur_u[j];
            self.acc_l[j] = c0 * self.prev_l[j] + c1 * self.cur_l[j];
        }

        for k in 2..=order {
            // phi_{k} = 2 H_s phi_{k-1} - phi_{k-2}, built into tmp
            self.op.apply(&self.cur_u, &self.cur_l, &mut self.tmp_u, &mut self.tmp_l);
            for j in 0..n {
                self.tmp_u[j] = 2.0 * (self.tmp_u[j] - b * self.cur_u[j]) * inv_a - self.prev_u[j];
                self.tmp_l[j] = 2.0 * (self.tmp_l[j] - b * self.cur_l[j]) * inv_a - self.prev_l[j];
            }
            // a_k = 2 (-i)^k J_k
            let jk = 2.0 * bessel[k];
            let ck = match k % 4 {
                0 => C64::new(jk, 0.0),
                1 => C64::new(0.0, -jk),
                2 => C64::new(-jk, 0.0),
                _ => C64::new(0.0, jk),
            };
            for j in 0..n {
                self.acc_u[j] += ck * self.tmp_u[j];
                self.acc_l[j] += ck * self.tmp_l[j];
            }
            std::mem::swap(&mut self.prev_u, &mut self.cur_u);
            std::mem::swap(&mut self.prev_l, &mut self.cur_l);
            std::mem::swap(&mut self.cur_u, &mut self.tmp_u);
            std::mem::swap(&mut self.cur_l, &mut self.tmp_l);
        }

        let phase = C64::from_polar(1.0, -b * dt);
        let mut out = SpinorState::zeros(Arc::clone(&s.grid), Basis::Diabatic);
        out.time = s.time + dt;
        for j in 0..n {
            out.upper[j] = phase * self.acc_u[j];
            out.lower[j] = phase * self.acc_l[j];
        }
        Ok(out)
    }
}

/// One-shot Chebyshev step; builds a throwaway stepper. Propagation loops
/// should hold a [`ChebStepper`] instead.
pub fn chebyshev_step(
    s: &SpinorState,
    dt: f64,
    params: &IonTrapParams,
    cfg: &PropagatorConfig,
) -> Result<SpinorState> {
    ChebStepper::new(params, Arc::clone(&s.grid), cfg)?.step(s, dt)
}
