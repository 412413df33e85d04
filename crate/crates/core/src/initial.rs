use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::Array1;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SwionError};
use crate::grid::GridSpec;
use crate::params::IonTrapParams;
use crate::state::{Basis, SpinorState};

/// Which spinor component the initial packet occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Upper,
    Lower,
}

/// Packet shape selector.
///
/// `Coherent` is a Gaussian whose width is always derived from the trap
/// (1/sqrt(2 m omega)); `Gaussian` takes an explicit width, which is how
/// position-squeezed packets are expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PacketKind {
    Gaussian,
    Coherent,
    Fock,
}

/// Initial-state description, one section of the run configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialStateSpec {
    pub kind: PacketKind,
    #[serde(default)]
    pub x0: f64,
    /// Width (only for `kind = gaussian`).
    #[serde(default)]
    pub sigma: Option<f64>,
    /// Quantum number (only for `kind = fock`).
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default = "default_basis")]
    pub basis: Basis,
    #[serde(default = "default_branch")]
    pub branch: Branch,
    #[serde(default)]
    pub p0: f64,
}

fn default_basis() -> Basis {
    Basis::Diabatic
}

fn default_branch() -> Branch {
    Branch::Upper
}

impl InitialStateSpec {
    pub fn gaussian(x0: f64, sigma: f64) -> Self {
        InitialStateSpec {
            kind: PacketKind::Gaussian,
            x0,
            sigma: Some(sigma),
            n: None,
            basis: Basis::Diabatic,
            branch: Branch::Upper,
            p0: 0.0,
        }
    }

    pub fn coherent(x0: f64) -> Self {
        InitialStateSpec {
            kind: PacketKind::Coherent,
            x0,
            sigma: None,
            n: None,
            basis: Basis::Diabatic,
            branch: Branch::Upper,
            p0: 0.0,
        }
    }

    pub fn fock(n: usize) -> Self {
        InitialStateSpec {
            kind: PacketKind::Fock,
            x0: 0.0,
            sigma: None,
            n: Some(n),
            basis: Basis::Diabatic,
            branch: Branch::Upper,
            p0: 0.0,
        }
    }

    pub fn validate(&self, params: &IonTrapParams) -> Result<()> {
        match self.kind {
            PacketKind::Gaussian => {
                let s = self.sigma.ok_or_else(|| {
                    SwionError::InvalidParams("gaussian initial state needs sigma".into())
                })?;
                if !(s.is_finite() && s > 0.0) {
                    return Err(SwionError::InvalidParams(format!("sigma = {s} must be > 0")));
                }
            }
            PacketKind::Coherent => {}
            PacketKind::Fock => {
                let n = self.n.ok_or_else(|| {
                    SwionError::InvalidParams("fock initial state needs n".into())
                })?;
                if n > FOCK_N_MAX {
                    return Err(SwionError::HermiteUnstable(n));
                }
            }
        }
        params.validate()
    }

    /// Effective packet width: explicit for gaussian, trap-derived for
    /// coherent, turning-point scale for fock.
    pub fn width(&self, params: &IonTrapParams) -> f64 {
        match self.kind {
            PacketKind::Gaussian => self.sigma.unwrap_or(params.coherent_width()),
            PacketKind::Coherent => params.coherent_width(),
            PacketKind::Fock => {
                let n = self.n.unwrap_or(0) as f64;
                ((2.0 * n + 1.0) / (params.m * params.omega)).sqrt()
            }
        }
    }

    /// Upper estimate of the packet's energy in its own channel, used by
    /// the default grid-extent policy: harmonic energy at (x0, p0) plus the
    /// zero-point/width terms plus the largest possible interaction offsets.
    pub fn energy_estimate(&self, params: &IonTrapParams) -> f64 {
        let offsets = params.lambda + params.delta.abs() / 2.0;
        match self.kind {
            PacketKind::Gaussian | PacketKind::Coherent => {
                let s = self.width(params);
                params.harmonic(self.x0)
                    + self.p0 * self.p0 / (2.0 * params.m)
                    + 1.0 / (8.0 * params.m * s * s)
                    + 0.5 * params.m * params.omega * params.omega * s * s
                    + offsets
            }
            PacketKind::Fock => {
                params.omega * (self.n.unwrap_or(0) as f64 + 0.5) + offsets
            }
        }
    }
}

/// Hard ceiling on the Fock quantum number; beyond this the packet no
/// longer fits typical grids and the recurrence loses digits.
pub const FOCK_N_MAX: usize = 200;

/// upper bound on the Gaussian tail mass lying outside the grid
fn gaussian_tail_outside(grid: &GridSpec, x0: f64, sigma: f64) -> f64 {
    let d_left = (x0 - grid.x_min).max(0.0);
    let d_right = (grid.x_max - x0).max(0.0);
    let tail = |d: f64| {
        if d <= 0.0 {
            return 1.0;
        }
        let z = d / (2f64.sqrt() * sigma);
        // erfc(z)/2 <= exp(-z^2)/(2 z sqrt(pi)) for z > 0
        (-z * z).exp() / (2.0 * z * PI.sqrt())
    };
    tail(d_left) + tail(d_right)
}

/// Normalized minimum-uncertainty Gaussian
/// (2 pi sigma^2)^(-1/4) exp(-(x-x0)^2 / 4 sigma^2) exp(i p0 x)
/// placed on the requested channel.
pub fn make_gaussian(
    spec: &InitialStateSpec,
    params: &IonTrapParams,
    grid: &Arc<GridSpec>,
) -> Result<SpinorState> {
    spec.validate(params)?;
    let sigma = spec.width(params);
    let tail = gaussian_tail_outside(grid, spec.x0, sigma);
    if tail > 1e-12 {
        return Err(SwionError::SupportViolation(format!(
            "gaussian at x0 = {} with sigma = {} leaves {:.2e} of its mass outside [{}, {}]",
            spec.x0, sigma, tail, grid.x_min, grid.x_max
        )));
    }
    // the packet's momentum support must also fit the grid
    let sigma_p = 1.0 / (2.0 * sigma);
    if spec.p0.abs() + 6.0 * sigma_p > grid.p_max() {
        return Err(SwionError::SupportViolation(format!(
            "packet momentum support |{}| + 6 * {:.3} exceeds p_max = {:.3}",
            spec.p0,
            sigma_p,
            grid.p_max()
        )));
    }
    let norm = (2.0 * PI * sigma * sigma).powf(-0.25);
    let mut comp = Array1::zeros(grid.n_points);
    for (j, &x) in grid.x.iter().enumerate() {
        let amp = norm * (-(x - spec.x0).powi(2) / (4.0 * sigma * sigma)).exp();
        comp[j] = C64::from_polar(amp, spec.p0 * x);
    }
    place_on_channel(comp, spec, grid)
}

/// Normalized n-th harmonic-oscillator eigenfunction of the trap, built by
/// the normalized three-term recurrence
/// phi_{j+1} = sqrt(2/(j+1)) xi phi_j - sqrt(j/(j+1)) phi_{j-1},
/// xi = sqrt(m omega) x.
pub fn make_fock(
    n: usize,
    params: &IonTrapParams,
    grid: &Arc<GridSpec>,
) -> Result<SpinorState> {
    let spec = InitialStateSpec::fock(n);
    make_fock_on(&spec, params, grid)
}

fn fock_profile(n: usize, params: &IonTrapParams, grid: &GridSpec) -> Result<Array1<f64>> {
    if n > FOCK_N_MAX {
        return Err(SwionError::HermiteUnstable(n));
    }
    let sqrt_mw = (params.m * params.omega).sqrt();
    // turning point of the target state must sit inside the grid with margin
    let x_turn = ((2 * n + 1) as f64).sqrt() / sqrt_mw;
    if grid.x_min > -1.2 * x_turn - 5.0 / sqrt_mw || grid.x_max < 1.2 * x_turn + 5.0 / sqrt_mw {
        return Err(SwionError::SupportViolation(format!(
            "fock n = {n} has turning points +/-{x_turn:.3}, outside the grid margin"
        )));
    }
    let norm0 = (sqrt_mw * sqrt_mw / PI).powf(0.25);
    let mut prev: Array1<f64> = Array1::zeros(grid.n_points);
    let mut cur: Array1<f64> =
        grid.x.mapv(|x| norm0 * (-0.5 * sqrt_mw * sqrt_mw * x * x).exp());
    for j in 0..n {
        let a = (2.0 / (j as f64 + 1.0)).sqrt();
        let b = (j as f64 / (j as f64 + 1.0)).sqrt();
        let next = Array1::from_iter(grid.x.iter().enumerate().map(|(i, &x)| {
            a * sqrt_mw * x * cur[i] - b * prev[i]
        }));
        prev = cur;
        cur = next;
    }
    // sampling error shows up directly in the discrete norm
    let norm2: f64 = cur.iter().map(|v| v * v).sum::<f64>() * grid.dx;
    if (norm2 - 1.0).abs() > 1e-6 {
        return Err(SwionError::SupportViolation(format!(
            "fock n = {n} norm^2 = {norm2} on this grid (insufficient extent or resolution)"
        )));
    }
    Ok(cur)
}

fn make_fock_on(
    spec: &InitialStateSpec,
    params: &IonTrapParams,
    grid: &Arc<GridSpec>,
) -> Result<SpinorState> {
    let n = spec.n.ok_or_else(|| SwionError::InvalidParams("fock needs n".into()))?;
    let profile = fock_profile(n, params, grid)?;
    let comp = profile.mapv(|v| C64::new(v, 0.0));
    place_on_channel(comp, spec, grid)
}

fn place_on_channel(
    comp: Array1<C64>,
    spec: &InitialStateSpec,
    grid: &Arc<GridSpec>,
) -> Result<SpinorState> {
    let mut s = SpinorState::zeros(Arc::clone(grid), spec.basis);
    match spec.branch {
        Branch::Upper => s.upper = comp,
        Branch::Lower => s.lower = comp,
    }
    s.normalize()?;
    Ok(s)
}

/// Dispatch on the packet kind.
pub fn build_initial(
    spec: &InitialStateSpec,
    params: &IonTrapParams,
    grid: &Arc<GridSpec>,
) -> Result<SpinorState> {
    spec.validate(params)?;
    match spec.kind {
        PacketKind::Gaussian | PacketKind::Coherent => make_gaussian(spec, params, grid),
        PacketKind::Fock => make_fock_on(spec, params, grid),
    }
}
