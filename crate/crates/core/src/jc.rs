use ndarray::Array2;

use crate::dense::eigh_symmetric;
use crate::error::{Result, SwionError};
use crate::params::IonTrapParams;

/// Generalized Rabi half-splitting Omega_n = sqrt((delta-omega)^2/4 + g^2 n)
/// of the excitation-n doublet.
pub fn rabi_half_splitting(n: usize, delta: f64, omega: f64, g: f64) -> f64 {
    let d = (delta - omega) / 2.0;
    (d * d + g * g * n as f64).sqrt()
}

/// Closed-form doublet energies (E_plus, E_minus) of the linearized
/// sideband model,
///
///   H = omega a^dag a + (delta/2) sigma_z + g (a^dag sigma_- + sigma_+ a),
///
/// quoted as E^(+-)(n) = omega n +- Omega_n. The pair describes the
/// excitation-n block spanned by |n, 1> and |n-1, 2>, whose matrix
/// eigenvalues sit at E^(+-)(n) - omega/2; the constant offset drops out
/// of every splitting and revival time.
pub fn jc_reference(n: usize, delta: f64, omega: f64, g: f64) -> (f64, f64) {
    let w = rabi_half_splitting(n, delta, omega, g);
    (omega * n as f64 + w, omega * n as f64 - w)
}

/// Coupling strength of the linearized model for the full trap parameters:
/// g = lambda * eta.
pub fn jc_coupling(params: &IonTrapParams) -> f64 {
    params.lambda * params.eta()
}

/// Revival time of a packet centered on excitation n0: adjacent doublets
/// dephase at the difference of their Rabi splittings,
/// T_rev = pi / (Omega_{n0+1} - Omega_{n0}).
pub fn t_rev_jc(n0: usize, delta: f64, omega: f64, g: f64) -> Result<f64> {
    let gap = rabi_half_splitting(n0 + 1, delta, omega, g)
        - rabi_half_splitting(n0, delta, omega, g);
    if gap <= 0.0 {
        return Err(SwionError::InvalidParams(format!(
            "Rabi splittings do not separate at n0 = {n0} (g = {g})"
        )));
    }
    Ok(std::f64::consts::PI / gap)
}

/// Dense matrix of the linearized model truncated to `n_fock` oscillator
/// states, ordered |0,1>, |0,2>, |1,1>, |1,2>, ... with |1> the lower and
/// |2> the upper internal level. Real symmetric for real g.
pub fn jc_hamiltonian_dense(n_fock: usize, delta: f64, omega: f64, g: f64) -> Array2<f64> {
    let dim = 2 * n_fock;
    let mut h = Array2::zeros((dim, dim));
    let idx = |m: usize, up: bool| 2 * m + up as usize;
    for m in 0..n_fock {
        h[(idx(m, false), idx(m, false))] = omega * m as f64 - delta / 2.0;
        h[(idx(m, true), idx(m, true))] = omega * m as f64 + delta / 2.0;
        // sigma_+ a : |m,1> -> sqrt(m) |m-1,2>
        if m >= 1 {
            let v = g * (m as f64).sqrt();
            h[(idx(m - 1, true), idx(m, false))] = v;
            h[(idx(m, false), idx(m - 1, true))] = v;
        }
    }
    h
}

/// Excitation number m + delta_{i,2} of basis state `j` in the ordering of
/// [`jc_hamiltonian_dense`].
fn excitation_of_basis_state(j: usize) -> usize {
    j / 2 + j % 2
}

/// Eigenvalues of the dense model grouped by conserved excitation number,
/// identified through <v| a^dag a + |2><2| |v> rounded to the nearest
/// integer. Returns (n, eigenvalues sorted ascending) pairs; n = 0 carries
/// the single uncoupled level, every other n a doublet (truncation leaves
/// the topmost block incomplete, so it is dropped).
pub fn jc_dense_blocks(
    n_fock: usize,
    delta: f64,
    omega: f64,
    g: f64,
) -> Result<Vec<(usize, Vec<f64>)>> {
    let h = jc_hamiltonian_dense(n_fock, delta, omega, g);
    let (evals, evecs) = eigh_symmetric(h)?;
    let mut blocks: Vec<Vec<f64>> = vec![Vec::new(); n_fock + 1];
    for (i, &e) in evals.iter().enumerate() {
        let row = evecs.row(i);
        let n_exc: f64 = row
            .iter()
            .enumerate()
            .map(|(j, c)| c * c * excitation_of_basis_state(j) as f64)
            .sum();
        let n = n_exc.round();
        if (n_exc - n).abs() > 1e-6 {
            return Err(SwionError::Linalg(format!(
                "eigenvector {i} has non-integer excitation number {n_exc}"
            )));
        }
        blocks[n as usize].push(e);
    }
    let mut out = Vec::with_capacity(n_fock);
    for (n, mut b) in blocks.into_iter().enumerate() {
        if n == n_fock {
            // incomplete top block under truncation
            continue;
        }
        b.sort_by(|a, c| a.partial_cmp(c).unwrap());
        let want = if n == 0 { 1 } else { 2 };
        if b.len() != want {
            return Err(SwionError::Linalg(format!(
                "excitation block n = {n} holds {} levels, expected {want}",
                b.len()
            )));
        }
        out.push((n, b));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const OMEGA: f64 = 5e-4;

    #[test]
    fn decoupled_limit_reduces_to_bare_levels() {
        let delta = 0.02514;
        let (ep, em) = jc_reference(7, delta, OMEGA, 0.0);
        assert_relative_eq!(ep, OMEGA * 7.0 + (delta - OMEGA).abs() / 2.0, epsilon = 1e-18);
        assert_relative_eq!(em, OMEGA * 7.0 - (delta - OMEGA).abs() / 2.0, epsilon = 1e-18);
    }

    #[test]
    fn resonant_single_quantum_doublet() {
        // delta = omega: E(1) = omega +/- g
        let g = 1.2e-3;
        let (ep, em) = jc_reference(1, OMEGA, OMEGA, g);
        assert_relative_eq!(ep, OMEGA + g, epsilon = 1e-18);
        assert_relative_eq!(em, OMEGA - g, epsilon = 1e-18);
    }

    #[test]
    fn doublet_gap_is_twice_the_rabi_half_splitting() {
        let (delta, g) = (0.005028, 1.1180339887498948e-3);
        for n in [1, 2, 17, 120] {
            let (ep, em) = jc_reference(n, delta, OMEGA, g);
            assert_relative_eq!(
                ep - em,
                2.0 * rabi_half_splitting(n, delta, OMEGA, g),
                max_relative = 1e-15
            );
        }
    }

    #[test]
    fn dense_blocks_reproduce_the_closed_form() {
        let (delta, g) = (0.02514, 1.118e-3);
        let n_fock = 60;
        let blocks = jc_dense_blocks(n_fock, delta, OMEGA, g).unwrap();
        assert_eq!(blocks.len(), n_fock);
        for (n, evs) in blocks {
            if n == 0 {
                assert_relative_eq!(evs[0], -delta / 2.0, epsilon = 1e-12);
                continue;
            }
            let (ep, em) = jc_reference(n, delta, OMEGA, g);
            // dense block sits omega/2 below the quoted pair
            assert_relative_eq!(evs[1], ep - OMEGA / 2.0, epsilon = 1e-12);
            assert_relative_eq!(evs[0], em - OMEGA / 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn revival_time_shrinks_with_coupling() {
        let delta = 0.005028;
        let t1 = t_rev_jc(700, delta, OMEGA, 1e-3).unwrap();
        let t2 = t_rev_jc(700, delta, OMEGA, 2e-3).unwrap();
        assert!(t1 > t2);
        assert!(t_rev_jc(700, delta, OMEGA, 0.0).is_err());
        // closed form for the gap
        let g = 1.5e-3;
        let gap = rabi_half_splitting(701, delta, OMEGA, g)
            - rabi_half_splitting(700, delta, OMEGA, g);
        assert_relative_eq!(
            t_rev_jc(700, delta, OMEGA, g).unwrap(),
            std::f64::consts::PI / gap,
            max_relative = 1e-15
        );
    }

    #[test]
    fn coupling_uses_the_lamb_dicke_scale() {
        let p = IonTrapParams::new(80000.0, OMEGA, 0.005028, 0.05, 0.2, 0.0).unwrap();
        assert_relative_eq!(jc_coupling(&p), 0.05 * 0.022360679774997897, max_relative = 1e-12);
    }
}
