use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Result, SwionError};
use crate::fft::FftCache;
use crate::state::SpinorState;

/// Phase-space distribution samples W(p, x); `values[(k, j)]` belongs to
/// `(p_axis[k], x_axis[j])`. Both axes ascend.
#[derive(Debug, Clone)]
pub struct WignerGrid {
    pub x_axis: Array1<f64>,
    pub p_axis: Array1<f64>,
    pub values: Array2<f64>,
}

impl WignerGrid {
    /// Marginal over p at every x: integral W dp, which must reproduce the
    /// total position density.
    pub fn p_marginal(&self) -> Array1<f64> {
        let dp = self.p_axis[1] - self.p_axis[0];
        let mut out = Array1::zeros(self.x_axis.len());
        for j in 0..self.x_axis.len() {
            out[j] = self.values.column(j).sum() * dp;
        }
        out
    }

    /// Total phase-space mass: integral W dp dx.
    pub fn total_mass(&self) -> f64 {
        let dx = self.x_axis[1] - self.x_axis[0];
        self.p_marginal().sum() * dx
    }

    /// Dense text export: axis vectors in header lines, then the value
    /// matrix with one p-row per line.
    pub fn table(&self) -> String {
        let fmt_axis = |a: &Array1<f64>| {
            a.iter().map(|v| format!("{v:.10e}")).collect::<Vec<_>>().join(" ")
        };
        let mut out = String::with_capacity(self.values.len() * 18 + 4096);
        out.push_str(&format!("# x_axis: {}\n", fmt_axis(&self.x_axis)));
        out.push_str(&format!("# p_axis: {}\n", fmt_axis(&self.p_axis)));
        out.push_str("# rows: p index, columns: x index, value: W(p, x)\n");
        for k in 0..self.p_axis.len() {
            let row = self
                .values
                .row(k)
                .iter()
                .map(|v| format!("{v:.10e}"))
                .collect::<Vec<_>>()
                .join(" ");
            out.push_str(&row);
            out.push('\n');
        }
        out
    }
}

/// The p values the FFT path produces: conjugate lattice of the
/// half-width y-window, ascending, spacing pi/(M dx) with M = n/2.
pub fn natural_p_axis(s: &SpinorState) -> Array1<f64> {
    let m = s.n_points() / 2;
    let dp = std::f64::consts::PI / (m as f64 * s.dx());
    Array1::from_iter((0..m).map(|k| (k as isize - (m / 2) as isize) as f64 * dp))
}

fn edge_support_check(s: &SpinorState) -> Result<()> {
    let n = s.n_points();
    let edge = (n / 16).max(2);
    let mut mass = 0.0;
    for j in (0..edge).chain(n - edge..n) {
        mass += s.upper[j].norm_sqr() + s.lower[j].norm_sqr();
    }
    mass *= s.dx();
    if mass > 1e-10 {
        return Err(SwionError::SupportViolation(format!(
            "state carries {mass:.2e} of its mass within {edge} cells of the grid edge; \
             the Wigner y-window would clip it"
        )));
    }
    Ok(())
}

/// Spinor-summed correlation C_j(y) = sum_i psi_i*(x_j - y) psi_i(x_j + y)
/// with zero padding outside the grid.
fn correlation(s: &SpinorState, j: usize, shift: isize) -> C64 {
    let n = s.n_points() as isize;
    let (jm, jp) = (j as isize - shift, j as isize + shift);
    if jm < 0 || jm >= n || jp < 0 || jp >= n {
        return C64::new(0.0, 0.0);
    }
    let (jm, jp) = (jm as usize, jp as usize);
    s.upper[jm].conj() * s.upper[jp] + s.lower[jm].conj() * s.lower[jp]
}

/// W(p,x) = (1/pi) integral dy e^{-2ipy} sum_i psi_i*(x-y) psi_i(x+y)
/// over the symmetric y-window of half the grid width (zero-padded).
///
/// `p_axis = None` evaluates on the natural conjugate lattice by FFT (one
/// transform per x column); an explicit axis switches to direct quadrature
/// at exactly the requested p values. Both paths share the window and
/// normalization, so they agree wherever the axes coincide.
pub fn wigner(s: &SpinorState, p_axis: Option<&Array1<f64>>) -> Result<WignerGrid> {
    edge_support_check(s)?;
    let n = s.n_points();
    let m = n / 2;
    let dx = s.dx();
    let inv_pi = std::f64::consts::FRAC_1_PI;

    let x_axis = s.grid.x.clone();
    match p_axis {
        None => {
            let p_nat = natural_p_axis(s);
            let mut values = Array2::zeros((m, n));
            let mut cache = FftCache::new(m);
            let mut col = vec![C64::new(0.0, 0.0); m];
            let mut max_re: f64 = 0.0;
            let mut max_im: f64 = 0.0;
            for j in 0..n {
                // fftfreq-ordered y samples: index mm -> shift mm (mm < M/2)
                // or mm - M (mm >= M/2)
                for (mm, slot) in col.iter_mut().enumerate() {
                    let shift = if mm < m / 2 { mm as isize } else { mm as isize - m as isize };
                    *slot = correlation(s, j, shift);
                }
                cache.forward(&mut col);
                for (k, v) in col.iter().enumerate() {
                    // reorder fftfreq k to the ascending axis
                    let k_out = (k + m / 2) % m;
                    values[(k_out, j)] = inv_pi * v.re * dx;
                    max_re = max_re.max(v.re.abs());
                    max_im = max_im.max(v.im.abs());
                }
            }
            if max_im > 1e-12 * max_re.max(1.0) {
                return Err(SwionError::Linalg(format!(
                    "Wigner transform has imaginary residue {max_im:.2e} (max real {max_re:.2e})"
                )));
            }
            Ok(WignerGrid { x_axis, p_axis: p_nat, values })
        }
        Some(axis) => {
            let mut values = Array2::zeros((axis.len(), n));
            for j in 0..n {
                for (k, &p) in axis.iter().enumerate() {
                    let mut acc = C64::new(0.0, 0.0);
                    for shift in -((m / 2) as isize)..(m / 2) as isize {
                        let c = correlation(s, j, shift);
                        if c.norm_sqr() != 0.0 {
                            let y = shift as f64 * dx;
                            acc += c * C64::from_polar(1.0, -2.0 * p * y);
                        }
                    }
                    values[(k, j)] = inv_pi * acc.re * dx;
                }
            }
            Ok(WignerGrid { x_axis, p_axis: axis.clone(), values })
        }
    }
}
