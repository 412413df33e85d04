use serde::{Deserialize, Serialize};

use crate::basis::epsilon;
use crate::error::{Result, SwionError};
use crate::params::IonTrapParams;

/// Single potential curve a classical point particle can ride. The sign in
/// the label is the sign of the x-dependent offset added to the trap:
///
/// * `DPlus` / `DMinus`: m w^2 x^2 / 2 +/- lambda cos(kx + phi)
/// * `APlus` / `AMinus`: m w^2 x^2 / 2 +/- eps(x)
///
/// An initial wave packet on the upper diabatic channel moves on `DMinus`;
/// the transmitted fraction after the avoided crossings rides `APlus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Curve {
    APlus,
    AMinus,
    DPlus,
    DMinus,
}

impl std::fmt::Display for Curve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Curve::APlus => "A+",
            Curve::AMinus => "A-",
            Curve::DPlus => "D+",
            Curve::DMinus => "D-",
        };
        write!(f, "{s}")
    }
}

pub fn curve_potential(curve: Curve, params: &IonTrapParams, x: f64) -> f64 {
    let h = params.harmonic(x);
    match curve {
        Curve::DPlus => h + params.lambda * params.cos_kx(x),
        Curve::DMinus => h - params.lambda * params.cos_kx(x),
        Curve::APlus => h + epsilon(params, x),
        Curve::AMinus => h - epsilon(params, x),
    }
}

/// Analytic slope dV/dx of the curve. For the adiabatic pair,
/// d eps/dx = -lambda^2 k sin(kx+phi) cos(kx+phi) / eps(x); at a strict
/// crossing (eps = 0) the slope of the diabatic curve is used, which is the
/// correct one-sided limit along either adiabatic branch.
pub fn curve_slope(curve: Curve, params: &IonTrapParams, x: f64) -> f64 {
    let harm = params.m * params.omega * params.omega * x;
    let s = (params.k * x + params.phi).sin();
    let lam_k_s = params.lambda * params.k * s;
    match curve {
        Curve::DPlus => harm - lam_k_s,
        Curve::DMinus => harm + lam_k_s,
        Curve::APlus | Curve::AMinus => {
            let eps = epsilon(params, x);
            let d_eps = if eps == 0.0 {
                // lambda cos passes through zero linearly; |lambda cos|'
                // approaches -lambda k s from one side
                -lam_k_s.abs()
            } else {
                -params.lambda * lam_k_s * params.cos_kx(x) / eps
            };
            match curve {
                Curve::APlus => harm + d_eps,
                _ => harm - d_eps,
            }
        }
    }
}

/// Sampled classical path, one entry per leapfrog step (step 0 is the
/// initial condition).
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub curve: Curve,
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub p: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Total energy p^2/2m + V(x) at sample i.
    pub fn energy(&self, params: &IonTrapParams, i: usize) -> f64 {
        self.p[i] * self.p[i] / (2.0 * params.m) + curve_potential(self.curve, params, self.x[i])
    }

    /// Oscillation period from momentum zero crossings: two consecutive
    /// crossings bound half an oscillation regardless of the potential's
    /// asymmetry, so the period is the span of crossings i and i+2.
    /// Crossing times are linearly interpolated.
    pub fn period(&self) -> Result<f64> {
        let mut crossings = Vec::new();
        if !self.p.is_empty() && self.p[0] == 0.0 {
            crossings.push(self.t[0]);
        }
        for i in 1..self.p.len() {
            let (a, b) = (self.p[i - 1], self.p[i]);
            if b == 0.0 {
                crossings.push(self.t[i]);
            } else if a != 0.0 && a.signum() != b.signum() {
                let frac = a / (a - b);
                crossings.push(self.t[i - 1] + frac * (self.t[i] - self.t[i - 1]));
            }
            if crossings.len() == 3 {
                return Ok(crossings[2] - crossings[0]);
            }
        }
        Err(SwionError::NoPeakFound { prominence: 0.0 })
    }
}

/// Leapfrog (kick-drift-kick) integration of a point particle on `curve`
/// from (x0, p0) to t_end in steps of dt.
pub fn classical_trajectory(
    x0: f64,
    p0: f64,
    curve: Curve,
    params: &IonTrapParams,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(SwionError::InvalidParams(format!(
            "classical step dt = {dt} must be positive and finite"
        )));
    }
    if !(t_end >= dt) || !t_end.is_finite() {
        return Err(SwionError::InvalidParams(format!(
            "classical t_end = {t_end} must be finite and >= dt = {dt}"
        )));
    }
    let n_steps = (t_end / dt).ceil() as usize;
    let mut t = Vec::with_capacity(n_steps + 1);
    let mut xs = Vec::with_capacity(n_steps + 1);
    let mut ps = Vec::with_capacity(n_steps + 1);
    let (mut x, mut p) = (x0, p0);
    t.push(0.0);
    xs.push(x);
    ps.push(p);
    for i in 1..=n_steps {
        let p_half = p - 0.5 * dt * curve_slope(curve, params, x);
        x += dt * p_half / params.m;
        p = p_half - 0.5 * dt * curve_slope(curve, params, x);
        t.push(i as f64 * dt);
        xs.push(x);
        ps.push(p);
    }
    Ok(Trajectory { curve, t, x: xs, p: ps })
}
