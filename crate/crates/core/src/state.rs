use std::fmt;
use std::sync::Arc;

use ndarray::Array1;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SwionError};
use crate::grid::GridSpec;

/// Which two-level frame the spinor components live in.
///
/// Component meaning per basis:
///
/// * `Bare`: `upper` = excited internal state |2> (energy +delta/2),
///   `lower` = ground state |1> (-delta/2). The standing wave couples the
///   two with amplitude proportional to lambda cos(kx+phi).
/// * `Diabatic`: `upper` = |+> = (|1> + |2>)/sqrt(2), `lower` = |-> =
///   (|1> - |2>)/sqrt(2) up to sign. Here the standing wave is diagonal
///   (|+> sees -lambda cos(kx+phi), |-> the opposite) and the detuning
///   provides the constant coupling delta/2.
/// * `Adiabatic`: pointwise eigenframe of the potential matrix; `upper`
///   rides the upper curve +eps(x), `lower` the lower curve -eps(x).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Bare,
    Diabatic,
    Adiabatic,
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Basis::Bare => "bare",
            Basis::Diabatic => "diabatic",
            Basis::Adiabatic => "adiabatic",
        };
        write!(f, "{s}")
    }
}

/// Two-component wavefunction sampled on a shared grid.
#[derive(Debug, Clone)]
pub struct SpinorState {
    pub upper: Array1<C64>,
    pub lower: Array1<C64>,
    pub basis: Basis,
    pub time: f64,
    pub grid: Arc<GridSpec>,
}

impl SpinorState {
    pub fn zeros(grid: Arc<GridSpec>, basis: Basis) -> Self {
        let n = grid.n_points;
        SpinorState {
            upper: Array1::zeros(n),
            lower: Array1::zeros(n),
            basis,
            time: 0.0,
            grid,
        }
    }

    pub fn n_points(&self) -> usize {
        self.grid.n_points
    }

    pub fn dx(&self) -> f64 {
        self.grid.dx
    }

    /// Total norm squared, sum_j (|upper_j|^2 + |lower_j|^2) dx.
    pub fn norm_squared(&self) -> f64 {
        let s: f64 = self
            .upper
            .iter()
            .zip(self.lower.iter())
            .map(|(u, l)| u.norm_sqr() + l.norm_sqr())
            .sum();
        s * self.dx()
    }

    /// Rescale to unit norm. Errors on an identically zero state.
    pub fn normalize(&mut self) -> Result<()> {
        let n2 = self.norm_squared();
        if n2 <= 0.0 || !n2.is_finite() {
            return Err(SwionError::InvalidParams(format!(
                "cannot normalize state with norm^2 = {n2}"
            )));
        }
        let scale = C64::new(1.0 / n2.sqrt(), 0.0);
        self.upper.mapv_inplace(|v| v * scale);
        self.lower.mapv_inplace(|v| v * scale);
        Ok(())
    }

    fn check_compatible(&self, other: &SpinorState) -> Result<()> {
        if self.basis != other.basis {
            return Err(SwionError::BasisMismatch {
                expected: self.basis.to_string(),
                got: other.basis.to_string(),
            });
        }
        if *self.grid != *other.grid {
            return Err(SwionError::GridMismatch);
        }
        Ok(())
    }

    /// Inner product <self|other> = sum_j (u_j* u'_j + l_j* l'_j) dx.
    pub fn overlap(&self, other: &SpinorState) -> Result<C64> {
        self.check_compatible(other)?;
        let mut acc = C64::new(0.0, 0.0);
        for (a, b) in self.upper.iter().zip(other.upper.iter()) {
            acc += a.conj() * b;
        }
        for (a, b) in self.lower.iter().zip(other.lower.iter()) {
            acc += a.conj() * b;
        }
        Ok(acc * self.dx())
    }
}
