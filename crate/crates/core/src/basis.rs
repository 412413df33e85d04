use std::sync::Arc;

use ndarray::Array1;
use num_complex::Complex64 as C64;

use crate::error::{Result, SwionError};
use crate::grid::GridSpec;
use crate::params::IonTrapParams;
use crate::state::{Basis, SpinorState};

/// Hermitian 2x2 potential block sampled on the grid (v21 = conj(v12) is
/// implied). Indices follow the spinor component order: 1 = upper, 2 =
/// lower.
#[derive(Debug, Clone)]
pub struct PotentialMatrix {
    pub v11: Array1<f64>,
    pub v22: Array1<f64>,
    pub v12: Array1<C64>,
}

/// eps(x) = sqrt(delta^2/4 + lambda^2 cos^2(kx+phi)), half the adiabatic
/// splitting.
pub fn epsilon(params: &IonTrapParams, x: f64) -> f64 {
    let lc = params.lambda * params.cos_kx(x);
    (params.delta * params.delta / 4.0 + lc * lc).sqrt()
}

/// Potential curve pair (V_plus, V_minus) for the requested representation:
///
/// * bare:      m w^2 x^2 / 2 +/- delta/2
/// * diabatic:  m w^2 x^2 / 2 +/- lambda cos(kx+phi)
/// * adiabatic: m w^2 x^2 / 2 +/- eps(x)
///
/// These are the curves ordered by their label sign. Which spinor channel
/// moves on which diabatic curve is a separate convention fixed in
/// [`diabatic_matrix`].
pub fn potential_curves(
    kind: Basis,
    params: &IonTrapParams,
    grid: &GridSpec,
) -> (Array1<f64>, Array1<f64>) {
    let n = grid.n_points;
    let mut vp = Array1::zeros(n);
    let mut vm = Array1::zeros(n);
    for (j, &x) in grid.x.iter().enumerate() {
        let h = params.harmonic(x);
        let off = match kind {
            Basis::Bare => params.delta / 2.0,
            Basis::Diabatic => params.lambda * params.cos_kx(x),
            Basis::Adiabatic => epsilon(params, x),
        };
        vp[j] = h + off;
        vm[j] = h - off;
    }
    (vp, vm)
}

/// Interaction block of the Hamiltonian in the diabatic representation
/// (harmonic trap term *not* included; the propagator adds it to both
/// diagonals).
///
/// The upper channel |+> = (|1> + |2>)/sqrt(2) sees -lambda cos(kx+phi),
/// the lower channel the opposite sign, and the detuning appears as the
/// constant real coupling delta/2. The sign assignment is fixed by the
/// requirement that the inversion identity W = P2 - P1 = 2 Re<psi_+|psi_->
/// holds with the Hadamard convention used in [`change_basis`]; it also
/// reproduces the observed splitting fractions, which flip outside their
/// error bars if the diagonal signs are exchanged.
pub fn diabatic_matrix(params: &IonTrapParams, grid: &GridSpec) -> PotentialMatrix {
    let n = grid.n_points;
    let mut v11 = Array1::zeros(n);
    let mut v22 = Array1::zeros(n);
    for (j, &x) in grid.x.iter().enumerate() {
        let lc = params.lambda * params.cos_kx(x);
        v11[j] = -lc;
        v22[j] = lc;
    }
    let v12 = Array1::from_elem(n, C64::new(params.delta / 2.0, 0.0));
    PotentialMatrix { v11, v22, v12 }
}

/// First-order expansion of the standing wave about x = 0:
/// cos(kx+phi) ~ cos(phi) - sin(phi) k x. Returns the same block layout as
/// [`diabatic_matrix`] with the linearized profile, for side-by-side
/// validity checks of the small-excursion (Lamb-Dicke) picture.
pub fn ld_expanded_model(params: &IonTrapParams, grid: &GridSpec) -> PotentialMatrix {
    let n = grid.n_points;
    let mut v11 = Array1::zeros(n);
    let mut v22 = Array1::zeros(n);
    let (cphi, sphi) = (params.phi.cos(), params.phi.sin());
    for (j, &x) in grid.x.iter().enumerate() {
        let lc = params.lambda * (cphi - sphi * params.k * x);
        v11[j] = -lc;
        v22[j] = lc;
    }
    let v12 = Array1::from_elem(n, C64::new(params.delta / 2.0, 0.0));
    PotentialMatrix { v11, v22, v12 }
}

/// Mixing angle theta(x) = atan2(2 lambda cos(kx+phi), delta) / 2 between
/// the bare and adiabatic frames. Zero at the curve crossings, +/- pi/4 in
/// the strong-coupling limit delta -> 0.
///
/// Errors only when both atan2 arguments are identically zero (so in
/// practice when lambda = delta = 0, since cos of a float is never exactly
/// zero); for delta = 0 near a crossing the angle smoothly saturates to the
/// +/- pi/4 limit instead.
pub fn mixing_angle(params: &IonTrapParams, x: f64) -> Result<f64> {
    let y = 2.0 * params.lambda * params.cos_kx(x);
    if y == 0.0 && params.delta == 0.0 {
        return Err(SwionError::UndefinedAngle(x));
    }
    Ok(0.5 * y.atan2(params.delta))
}

/// theta(x) sampled on the whole grid with branch unwrapping, so the
/// adiabatic frame varies smoothly between crossings even for delta < 0
/// (where atan2 alone jumps by pi across each crossing).
pub fn mixing_angle_profile(params: &IonTrapParams, grid: &GridSpec) -> Result<Array1<f64>> {
    let mut th = Array1::zeros(grid.n_points);
    let mut prev = 0.0f64;
    let mut offset = 0.0f64;
    for (j, &x) in grid.x.iter().enumerate() {
        let raw = mixing_angle(params, x)?;
        if j > 0 {
            let jump = raw + offset - prev;
            if jump.abs() > std::f64::consts::FRAC_PI_2 {
                offset -= std::f64::consts::PI * jump.signum() * (jump.abs() / std::f64::consts::PI).round();
            }
        }
        prev = raw + offset;
        th[j] = prev;
    }
    Ok(th)
}

/// Analytic first and second derivatives of the mixing angle:
///
///   dtheta  = -delta lambda k s / D,
///   d2theta = -delta lambda k^2 c (D + 8 lambda^2 s^2) / D^2,
///
/// with s = sin(kx+phi), c = cos(kx+phi), D = delta^2 + 4 lambda^2 c^2.
/// Both vanish in the uncoupled limits delta = 0 or k = 0.
pub fn nonadiabatic_couplings(params: &IonTrapParams, x: f64) -> Result<(f64, f64)> {
    let arg = params.k * x + params.phi;
    let (s, c) = arg.sin_cos();
    let d = params.delta * params.delta + 4.0 * params.lambda * params.lambda * c * c;
    if d == 0.0 {
        return Err(SwionError::UndefinedAngle(x));
    }
    let dlam = params.delta * params.lambda;
    let dtheta = -dlam * params.k * s / d;
    let d2theta = -dlam * params.k * params.k * c
        * (d + 8.0 * params.lambda * params.lambda * s * s)
        / (d * d);
    Ok((dtheta, d2theta))
}

/// Rotate a state into `target`. Norm is preserved exactly (all transforms
/// are pointwise orthogonal rotations).
///
/// Conventions, with d = (psi_plus, psi_minus) diabatic, b = (psi_2, psi_1)
/// bare and a = (upper-curve, lower-curve) adiabatic components:
///
///   b_u = (d_u + d_l)/sqrt(2),          b_l = (d_u - d_l)/sqrt(2)
///   a_u = cos(th) b_u - sin(th) b_l,    a_l = sin(th) b_u + cos(th) b_l
///
/// The bare<->diabatic Hadamard is self-inverse; the adiabatic rotation
/// inverts as its transpose. theta = 0 at the crossings, so adiabatic and
/// bare components coincide pointwise there.
pub fn change_basis(s: &SpinorState, target: Basis, params: &IonTrapParams) -> Result<SpinorState> {
    if s.basis == target {
        return Ok(s.clone());
    }
    // route through the bare frame; each leg is pointwise orthogonal
    let bare = match s.basis {
        Basis::Bare => s.clone(),
        Basis::Diabatic => hadamard(s, Basis::Bare),
        Basis::Adiabatic => rotate_adiabatic(s, params, true)?,
    };
    Ok(match target {
        Basis::Bare => bare,
        Basis::Diabatic => hadamard(&bare, Basis::Diabatic),
        Basis::Adiabatic => rotate_adiabatic(&bare, params, false)?,
    })
}

fn hadamard(s: &SpinorState, out_basis: Basis) -> SpinorState {
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = SpinorState::zeros(Arc::clone(&s.grid), out_basis);
    out.time = s.time;
    for j in 0..s.n_points() {
        let u = s.upper[j];
        let l = s.lower[j];
        out.upper[j] = (u + l) * inv_sqrt2;
        out.lower[j] = (u - l) * inv_sqrt2;
    }
    out
}

fn rotate_adiabatic(s: &SpinorState, params: &IonTrapParams, to_bare: bool) -> Result<SpinorState> {
    let th = mixing_angle_profile(params, &s.grid)?;
    let out_basis = if to_bare { Basis::Bare } else { Basis::Adiabatic };
    let mut out = SpinorState::zeros(Arc::clone(&s.grid), out_basis);
    out.time = s.time;
    for j in 0..s.n_points() {
        let (sin_t, cos_t) = th[j].sin_cos();
        let u = s.upper[j];
        let l = s.lower[j];
        if to_bare {
            out.upper[j] = u * cos_t + l * sin_t;
            out.lower[j] = -u * sin_t + l * cos_t;
        } else {
            out.upper[j] = u * cos_t - l * sin_t;
            out.lower[j] = u * sin_t + l * cos_t;
        }
    }
    Ok(out)
}

/// Three-column text table (x, V_plus, V_minus) of the requested curves.
pub fn curves_table(kind: Basis, params: &IonTrapParams, grid: &GridSpec) -> String {
    let (vp, vm) = potential_curves(kind, params, grid);
    let mut out = String::with_capacity(grid.n_points * 64);
    out.push_str("# x V_plus V_minus\n");
    for j in 0..grid.n_points {
        out.push_str(&format!("{:.12e} {:.12e} {:.12e}\n", grid.x[j], vp[j], vm[j]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn fig2a() -> IonTrapParams {
        IonTrapParams::new(80000.0, 5e-4, 0.02514, 0.05, 0.2, 1.07249074).unwrap()
    }

    fn grid2048() -> GridSpec {
        build_grid(&fig2a(), 0.0, 9.0, 2048).unwrap()
    }

    #[test]
    fn fig2a_has_one_diabatic_crossing_where_frames_touch() {
        let p = fig2a();
        let g = grid2048();
        let (dp, dm) = potential_curves(Basis::Diabatic, &p, &g);
        let mut crossings = 0;
        for j in 1..g.n_points {
            let a = dp[j - 1] - dm[j - 1];
            let b = dp[j] - dm[j];
            if a.signum() != b.signum() {
                crossings += 1;
            }
        }
        assert_eq!(crossings, 1);
        // at the crossing the adiabatic curves coincide with the bare ones
        let xc = (std::f64::consts::FRAC_PI_2 - p.phi) / p.k;
        assert_relative_eq!(xc, 2.4915279339744822, max_relative = 1e-12);
        assert_relative_eq!(epsilon(&p, xc), p.delta / 2.0, max_relative = 1e-10);
    }

    #[test]
    fn decoupled_limits_of_the_curves() {
        let g = grid2048();
        let mut p = fig2a();
        p.lambda = 0.0;
        let (dp, dm) = potential_curves(Basis::Diabatic, &p, &g);
        let (ap, am) = potential_curves(Basis::Adiabatic, &p, &g);
        let (bp, bm) = potential_curves(Basis::Bare, &p, &g);
        for j in 0..g.n_points {
            let h = p.harmonic(g.x[j]);
            assert_relative_eq!(dp[j], h, max_relative = 1e-14);
            assert_relative_eq!(dm[j], h, max_relative = 1e-14);
            assert_relative_eq!(ap[j], bp[j], max_relative = 1e-14);
            assert_relative_eq!(am[j], bm[j], max_relative = 1e-14);
        }

        let mut p0 = fig2a();
        p0.delta = 0.0;
        let (ap0, am0) = potential_curves(Basis::Adiabatic, &p0, &g);
        for j in 0..g.n_points {
            let h = p0.harmonic(g.x[j]);
            let lc = (p0.lambda * p0.cos_kx(g.x[j])).abs();
            assert_relative_eq!(ap0[j], h + lc, epsilon = 1e-14);
            assert_relative_eq!(am0[j], h - lc, epsilon = 1e-14);
        }
    }

    #[test]
    fn adiabatic_ordering_and_gap() {
        let p = fig2a();
        let g = grid2048();
        let (ap, am) = potential_curves(Basis::Adiabatic, &p, &g);
        for j in 0..g.n_points {
            assert!(ap[j] >= am[j]);
            assert!(ap[j] - am[j] >= p.delta.abs() - 1e-14);
        }
    }

    #[test]
    fn diabatic_block_values() {
        let p = fig2a();
        let g = grid2048();
        let m = diabatic_matrix(&p, &g);
        // at x = 0 (grid center, j = n/2): the upper channel is pulled down
        let j0 = g.n_points / 2;
        assert_eq!(g.x[j0], 0.0);
        assert_relative_eq!(m.v11[j0], -0.023896893180522, epsilon = 1e-12);
        assert_relative_eq!(m.v22[j0], 0.023896893180522, epsilon = 1e-12);
        assert_relative_eq!(m.v12[j0].re, p.delta / 2.0, epsilon = 1e-15);
        assert_eq!(m.v12[j0].im, 0.0);
        // at the crossing the diagonal interaction vanishes
        let xc = 2.4915279339744822;
        let jc = ((xc - g.x_min) / g.dx).round() as usize;
        assert!(m.v11[jc].abs() < p.lambda * p.k * g.dx);
        assert!(m.v22[jc].abs() < p.lambda * p.k * g.dx);

        let mut pd = p;
        pd.delta = 0.0;
        let md = diabatic_matrix(&pd, &g);
        assert!(md.v12.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn mixing_angle_values() {
        let p = fig2a();
        // crossing: angle vanishes
        let xc = 2.4915279339744822;
        assert!(mixing_angle(&p, xc).unwrap().abs() < 1e-10);
        // strong-coupling limit: pi/4
        let mut ps = p;
        ps.delta = 1e-300;
        let th = mixing_angle(&ps, 0.0).unwrap();
        assert_relative_eq!(th, std::f64::consts::FRAC_PI_4, max_relative = 1e-12);
        // at the trap center
        assert_relative_eq!(mixing_angle(&p, 0.0).unwrap(), 0.543279021187218, epsilon = 1e-12);
        // undefined when both arguments vanish identically
        let mut p0 = p;
        p0.delta = 0.0;
        p0.lambda = 0.0;
        assert!(matches!(
            mixing_angle(&p0, xc),
            Err(SwionError::UndefinedAngle(_))
        ));
        // delta = 0 with finite coupling: the angle saturates at +/- pi/4
        // on either side of a crossing (the limit of the adiabatic frame)
        let mut pc = p;
        pc.delta = 0.0;
        let left = mixing_angle(&pc, xc - 0.1).unwrap();
        let right = mixing_angle(&pc, xc + 0.1).unwrap();
        assert_relative_eq!(left, std::f64::consts::FRAC_PI_4, max_relative = 1e-12);
        assert_relative_eq!(right, -std::f64::consts::FRAC_PI_4, max_relative = 1e-12);
    }

    #[test]
    fn mixing_angle_rotation_diagonalizes_coupling_block() {
        // R(th)^T [[d/2, lc],[lc, -d/2]] R(th) = diag(+eps, -eps) with
        // th = atan2(2 lc, d)/2 and R = [[cos, -sin],[sin, cos]]
        let p = fig2a();
        for &x in &[-7.3, -2.0, 0.0, 1.1, 2.4915279339744822, 5.0, 8.9] {
            let lc = p.lambda * p.cos_kx(x);
            let d2 = p.delta / 2.0;
            let th = mixing_angle(&p, x).unwrap();
            let (s, c) = th.sin_cos();
            let eps = epsilon(&p, x);
            // columns of R are the eigenvectors
            let m = [[d2, lc], [lc, -d2]];
            let r = [[c, -s], [s, c]];
            for (col, expect) in [(0usize, eps), (1usize, -eps)] {
                let v = [r[0][col], r[1][col]];
                let mv = [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]];
                assert_relative_eq!(mv[0], expect * v[0], epsilon = 1e-14);
                assert_relative_eq!(mv[1], expect * v[1], epsilon = 1e-14);
            }
            // residual off-diagonal after the similarity transform
            let off = (c * (m[0][0] * (-s) + m[0][1] * c) + s * (m[1][0] * (-s) + m[1][1] * c)).abs();
            assert!(off < 1e-12 * eps.max(1e-30));
        }
    }

    #[test]
    fn nonadiabatic_couplings_match_finite_differences() {
        let p = fig2a();
        let h = 1e-6;
        for &x in &[-13.216435333974482, -5.0, -1.0, 0.3, 2.0, 4.0, 7.7] {
            let (dt, d2t) = nonadiabatic_couplings(&p, x).unwrap();
            let tp = mixing_angle(&p, x + h).unwrap();
            let tm = mixing_angle(&p, x - h).unwrap();
            let fd1 = (tp - tm) / (2.0 * h);
            assert_relative_eq!(dt, fd1, max_relative = 1e-6, epsilon = 1e-10);
            // second derivative checked as the centered difference of the
            // analytic first derivative (double-differencing theta itself
            // drowns in rounding noise at any usable step)
            let dp = nonadiabatic_couplings(&p, x + h).unwrap().0;
            let dm = nonadiabatic_couplings(&p, x - h).unwrap().0;
            let fd2 = (dp - dm) / (2.0 * h);
            assert_relative_eq!(d2t, fd2, max_relative = 1e-6, epsilon = 1e-9);
        }
        // frozen value at the first crossing left of the origin
        let (dt, _) = nonadiabatic_couplings(&p, -13.216435333974482).unwrap();
        assert_relative_eq!(dt, 0.3977724741447893, max_relative = 1e-12);
    }

    #[test]
    fn nonadiabatic_couplings_vanish_in_trivial_limits() {
        let mut p = fig2a();
        p.delta = 0.0;
        let (dt, d2t) = nonadiabatic_couplings(&p, 1.0).unwrap();
        assert_eq!((dt, d2t), (0.0, 0.0));
        let mut pk = fig2a();
        pk.k = 0.0;
        let (dt, d2t) = nonadiabatic_couplings(&pk, 1.0).unwrap();
        assert_eq!((dt, d2t), (0.0, 0.0));
    }

    fn gaussian_state(g: Arc<GridSpec>, basis: Basis, x0: f64, on_upper: bool) -> SpinorState {
        let mut s = SpinorState::zeros(g, basis);
        let sigma = 0.3;
        let norm = (2.0 * std::f64::consts::PI * sigma * sigma).powf(-0.25);
        for (j, &x) in s.grid.clone().x.iter().enumerate() {
            let v = C64::new(norm * (-(x - x0).powi(2) / (4.0 * sigma * sigma)).exp(), 0.0);
            if on_upper {
                s.upper[j] = v;
            } else {
                s.lower[j] = v;
            }
        }
        s
    }

    #[test]
    fn excited_bare_state_splits_evenly_and_in_phase() {
        let p = fig2a();
        let g = Arc::new(grid2048());
        let s = gaussian_state(Arc::clone(&g), Basis::Bare, 0.0, true);
        let d = change_basis(&s, Basis::Diabatic, &p).unwrap();
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        for j in 0..g.n_points {
            assert!((d.upper[j] - s.upper[j] * inv_sqrt2).norm() < 1e-14);
            assert!((d.lower[j] - s.upper[j] * inv_sqrt2).norm() < 1e-14);
        }
        // the ground bare state splits with opposite relative sign
        let s1 = gaussian_state(Arc::clone(&g), Basis::Bare, 0.0, false);
        let d1 = change_basis(&s1, Basis::Diabatic, &p).unwrap();
        for j in 0..g.n_points {
            assert!((d1.upper[j] - s1.lower[j] * inv_sqrt2).norm() < 1e-14);
            assert!((d1.lower[j] + s1.lower[j] * inv_sqrt2).norm() < 1e-14);
        }
    }

    #[test]
    fn round_trips_are_identity() {
        let p = fig2a();
        let g = Arc::new(grid2048());
        let mut s = gaussian_state(Arc::clone(&g), Basis::Bare, 1.0, true);
        // make it genuinely two-component and complex
        for j in 0..g.n_points {
            s.lower[j] = s.upper[j] * C64::new(0.3, 0.4) * C64::new((0.01 * j as f64).cos(), 0.2);
        }
        s.normalize().unwrap();
        for target in [Basis::Diabatic, Basis::Adiabatic] {
            let t = change_basis(&s, target, &p).unwrap();
            assert_relative_eq!(t.norm_squared(), 1.0, epsilon = 1e-12);
            let back = change_basis(&t, Basis::Bare, &p).unwrap();
            for j in 0..g.n_points {
                assert!((back.upper[j] - s.upper[j]).norm() < 1e-12);
                assert!((back.lower[j] - s.lower[j]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn adiabatic_equals_bare_at_crossing_points() {
        let p = fig2a();
        let g = Arc::new(grid2048());
        let mut s = gaussian_state(Arc::clone(&g), Basis::Bare, 2.4915279339744822, true);
        for j in 0..g.n_points {
            s.lower[j] = s.upper[j] * 0.5;
        }
        s.normalize().unwrap();
        let a = change_basis(&s, Basis::Adiabatic, &p).unwrap();
        // at the crossing grid point theta ~ 0 so components coincide
        let jc = ((2.4915279339744822 - g.x_min) / g.dx).round() as usize;
        let th = mixing_angle(&p, g.x[jc]).unwrap();
        assert!(th.abs() < 2e-3);
        assert!((a.upper[jc] - s.upper[jc]).norm() < 2e-3 * s.upper[jc].norm());
        assert!((a.lower[jc] - s.lower[jc]).norm() < 2e-3 * s.upper[jc].norm());
    }

    #[test]
    fn ld_expansion_deviates_in_the_deep_lamb_dicke_violating_regime() {
        let p = fig2a();
        let g = grid2048();
        let full = diabatic_matrix(&p, &g);
        let lin = ld_expanded_model(&p, &g);
        let mut max_rel: f64 = 0.0;
        for j in 0..g.n_points {
            let x = g.x[j];
            if x.abs() <= 6.0 {
                let rel = (lin.v22[j] - full.v22[j]).abs() / full.v22[j].abs().max(1e-12);
                max_rel = max_rel.max(rel);
            }
        }
        assert!(max_rel >= 0.10, "max relative deviation {max_rel} < 10%");
    }

    #[test]
    fn ld_expansion_limits() {
        let g = grid2048();
        let mut p = fig2a();
        p.phi = 0.0;
        let m = ld_expanded_model(&p, &g);
        for j in 0..g.n_points {
            assert_relative_eq!(m.v22[j], p.lambda, epsilon = 1e-14);
        }
        p.phi = std::f64::consts::FRAC_PI_2;
        let m = ld_expanded_model(&p, &g);
        for j in 0..g.n_points {
            assert_relative_eq!(m.v22[j], -p.lambda * p.k * g.x[j], epsilon = 1e-14);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn change_basis_preserves_norm(seed in 0u64..500, target_idx in 0usize..3) {
            let p = fig2a();
            let g = Arc::new(GridSpec::new(-9.0, 9.0, 128).unwrap());
            let mut s = SpinorState::zeros(Arc::clone(&g), Basis::Diabatic);
            let mut z = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
            let mut next = move || {
                z ^= z >> 33; z = z.wrapping_mul(0xff51afd7ed558ccd); z ^= z >> 33;
                (z >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            };
            for j in 0..s.n_points() {
                s.upper[j] = C64::new(next(), next());
                s.lower[j] = C64::new(next(), next());
            }
            s.normalize().unwrap();
            let target = [Basis::Bare, Basis::Diabatic, Basis::Adiabatic][target_idx];
            let t = change_basis(&s, target, &p).unwrap();
            prop_assert!((t.norm_squared() - 1.0).abs() < 1e-12);
        }
    }
}
