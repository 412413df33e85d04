use std::f64::consts::PI;

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SwionError};
use crate::params::IonTrapParams;

/// Uniform periodic spatial grid and its conjugate momentum grid.
///
/// Positions are x_j = x_min + j dx for j = 0..n_points-1 (x_max itself is
/// excluded, as usual for a periodic grid). Momenta follow the standard
/// discrete-Fourier ordering: p_j = 2 pi j / (n dx) for j < n/2 and
/// 2 pi (j - n) / (n dx) for j >= n/2, so p ranges over [-pi/dx, pi/dx).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "GridDef", into = "GridDef")]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    pub dx: f64,
    pub x: Array1<f64>,
    pub p: Array1<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridDef {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl TryFrom<GridDef> for GridSpec {
    type Error = SwionError;
    fn try_from(d: GridDef) -> Result<Self> {
        GridSpec::new(d.x_min, d.x_max, d.n_points)
    }
}

impl From<GridSpec> for GridDef {
    fn from(g: GridSpec) -> Self {
        GridDef { x_min: g.x_min, x_max: g.x_max, n_points: g.n_points }
    }
}

impl PartialEq for GridSpec {
    fn eq(&self, other: &Self) -> bool {
        self.x_min == other.x_min
            && self.x_max == other.x_max
            && self.n_points == other.n_points
    }
}

impl GridSpec {
    /// Build a grid from explicit bounds. `n_points` must be a power of two
    /// (and at least 8) so the FFT-based kinetic operator stays fast and the
    /// momentum grid keeps its exact conjugate structure.
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if n_points < 8 || !n_points.is_power_of_two() {
            return Err(SwionError::NotPowerOfTwo(n_points));
        }
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(SwionError::InvalidParams(format!(
                "bad grid bounds [{x_min}, {x_max}]"
            )));
        }
        let n = n_points;
        let dx = (x_max - x_min) / n as f64;
        let x = Array1::from_iter((0..n).map(|j| x_min + j as f64 * dx));
        let dp = 2.0 * PI / (n as f64 * dx);
        let p = Array1::from_iter((0..n).map(|j| {
            if j < n / 2 { j as f64 * dp } else { (j as f64 - n as f64) * dp }
        }));
        Ok(GridSpec { x_min, x_max, n_points: n, dx, x, p })
    }

    /// Momentum cutoff pi/dx of the grid.
    pub fn p_max(&self) -> f64 {
        PI / self.dx
    }
}

/// Build a grid of `n_points` points centered on `x_center` spanning
/// `x_center +/- x_extent_hint`, and verify that its momentum cutoff can
/// represent the dynamics.
///
/// The extent hint is expected to carry a 50% safety margin over the
/// classically reachable amplitude (see the default policy in the run
/// configuration), so the dynamical energy scale is estimated at amplitude
/// `x_extent_hint / 1.5`:
///
///   E_dyn = (m omega^2 / 2)(extent/1.5)^2 + lambda + |delta|/2
///
/// and the builder requires p_max = pi/dx >= 1.3 sqrt(2 m E_dyn), i.e. a
/// 30% momentum headroom over the fastest classical motion. Tighter
/// multiples of the box-edge energy would reject grids that demonstrably
/// converge (the wavefunction never reaches the box edge), while anything
/// below sqrt(2 m E_dyn) visibly aliases.
pub fn build_grid(
    params: &IonTrapParams,
    x_center: f64,
    x_extent_hint: f64,
    n_points: usize,
) -> Result<GridSpec> {
    if !(x_extent_hint.is_finite() && x_extent_hint > 0.0) {
        return Err(SwionError::InvalidParams(format!(
            "bad grid extent {x_extent_hint}"
        )));
    }
    let grid = GridSpec::new(x_center - x_extent_hint, x_center + x_extent_hint, n_points)?;
    let amplitude = x_extent_hint / 1.5;
    let e_dyn = params.harmonic(amplitude) + params.lambda + params.delta.abs() / 2.0;
    let required = 1.3 * (2.0 * params.m * e_dyn).sqrt();
    if grid.p_max() < required {
        return Err(SwionError::MomentumCutoff { p_max: grid.p_max(), required });
    }
    Ok(grid)
}

/// Default extent policy: 1.5 x max(|x0|, classical amplitude at the
/// initial energy), so bound motion never approaches the grid boundary.
pub fn default_extent(params: &IonTrapParams, e0: f64, x0: f64) -> f64 {
    let amp = (2.0 * e0.max(0.0) / (params.m * params.omega * params.omega)).sqrt();
    1.5 * x0.abs().max(amp)
}
