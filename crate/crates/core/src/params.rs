use serde::{Deserialize, Serialize};

use crate::error::{Result, SwionError};

/// Physical parameters of the driven trapped ion, all in atomic units
/// (hbar = 1).
///
/// * `m` - ion mass
/// * `omega` - trap frequency
/// * `delta` - detuning between the internal transition and the laser
/// * `lambda` - Rabi coupling amplitude of the standing wave
/// * `k` - laser wave number
/// * `phi` - standing-wave phase at the trap center
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IonTrapParams {
    pub m: f64,
    pub omega: f64,
    pub delta: f64,
    pub lambda: f64,
    pub k: f64,
    pub phi: f64,
}

impl IonTrapParams {
    pub fn new(m: f64, omega: f64, delta: f64, lambda: f64, k: f64, phi: f64) -> Result<Self> {
        let p = IonTrapParams { m, omega, delta, lambda, k, phi };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.m, self.omega, self.delta, self.lambda, self.k, self.phi]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(SwionError::InvalidParams("non-finite parameter".into()));
        }
        if self.m <= 0.0 {
            return Err(SwionError::InvalidParams(format!("m = {} must be > 0", self.m)));
        }
        if self.omega <= 0.0 {
            return Err(SwionError::InvalidParams(format!(
                "omega = {} must be > 0",
                self.omega
            )));
        }
        if self.lambda < 0.0 {
            return Err(SwionError::InvalidParams(format!(
                "lambda = {} must be >= 0",
                self.lambda
            )));
        }
        if self.k < 0.0 {
            return Err(SwionError::InvalidParams(format!("k = {} must be >= 0", self.k)));
        }
        Ok(())
    }

    /// Lamb-Dicke parameter eta = k * x_zpf = k / sqrt(2 m omega).
    ///
    /// This is the standard definition (wave number times the ground-state
    /// position spread). See [`IonTrapParams::eta_alternative`] for the
    /// other form floating around in the literature.
    pub fn eta(&self) -> f64 {
        self.k / (2.0 * self.m * self.omega).sqrt()
    }

    /// The dimensionally odd variant eta = k * sqrt(m omega / 2) that
    /// sometimes appears in print. Exposed for comparison only; nothing in
    /// this crate uses it.
    pub fn eta_alternative(&self) -> f64 {
        self.k * (self.m * self.omega / 2.0).sqrt()
    }

    /// Width of the motional ground state, sigma_coh = 1 / sqrt(2 m omega).
    pub fn coherent_width(&self) -> f64 {
        1.0 / (2.0 * self.m * self.omega).sqrt()
    }

    /// Harmonic potential m omega^2 x^2 / 2 at position `x`.
    pub fn harmonic(&self, x: f64) -> f64 {
        0.5 * self.m * self.omega * self.omega * x * x
    }

    /// Standing-wave profile cos(k x + phi) at position `x`.
    pub fn cos_kx(&self, x: f64) -> f64 {
        (self.k * x + self.phi).cos()
    }
}
