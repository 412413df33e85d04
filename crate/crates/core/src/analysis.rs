use crate::dense::SpectrumTable;
use crate::error::{Result, SwionError};
use crate::observables::ObservableSeries;

/// Characteristic times of a wave packet built around level n0 of a single
/// potential curve, from finite differences of the level spacing:
///
///   T_cl  = 2 pi / |E'(n0)|
///   T_rev = 4 pi / |E''(n0)|
///   T_sup = 12 pi / |E'''(n0)|
///
/// `None` marks a timescale pushed to infinity by a vanishing derivative,
/// as for the equidistant harmonic ladder.
#[derive(Debug, Clone, Copy)]
pub struct TimeScales {
    pub n0: usize,
    pub t_cl: f64,
    pub t_rev: Option<f64>,
    pub t_sup: Option<f64>,
}

/// A derivative is treated as zero (timescale infinite) when it falls below
/// this fraction of |E'(n0)|. Genuine anharmonicities of interest sit at
/// 1e-5..1e-2 of the spacing; eigensolver noise stays below 1e-7.
pub const CURVATURE_FLOOR: f64 = 1e-6;

const STENCIL_HALF_WIDTH: usize = 3;

/// Central finite-difference derivatives of E(n) at n0: first derivative at
/// width 3, second at width 5 (fourth order), third at width 7 (fourth
/// order). Requires levels n0 +/- 3.
pub fn timescales_from_spectrum(spectrum: &SpectrumTable, n0: usize) -> Result<TimeScales> {
    let n_levels = spectrum.energies.len();
    if n0 < STENCIL_HALF_WIDTH || n0 + STENCIL_HALF_WIDTH >= n_levels {
        return Err(SwionError::InsufficientSpectrum {
            n0,
            half_width: STENCIL_HALF_WIDTH,
        });
    }
    let e = |off: isize| spectrum.energies[(n0 as isize + off) as usize];
    let d1 = (e(1) - e(-1)) / 2.0;
    let d2 = (-e(-2) + 16.0 * e(-1) - 30.0 * e(0) + 16.0 * e(1) - e(2)) / 12.0;
    let d3 =
        (e(-3) - 8.0 * e(-2) + 13.0 * e(-1) - 13.0 * e(1) + 8.0 * e(2) - e(3)) / 8.0;
    if d1.abs() == 0.0 {
        return Err(SwionError::Linalg(format!(
            "level spacing vanishes at n0 = {n0}; no classical period"
        )));
    }
    let floor = CURVATURE_FLOOR * d1.abs();
    let pi = std::f64::consts::PI;
    Ok(TimeScales {
        n0,
        t_cl: 2.0 * pi / d1.abs(),
        t_rev: (d2.abs() >= floor).then(|| 4.0 * pi / d2.abs()),
        t_sup: (d3.abs() >= floor).then(|| 12.0 * pi / d3.abs()),
    })
}

/// Index of the level closest in energy to `e`.
pub fn level_index_at_energy(spectrum: &SpectrumTable, e: f64) -> usize {
    spectrum
        .energies
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| (*a - e).abs().partial_cmp(&(*b - e).abs()).unwrap())
        .map(|(i, _)| i)
        .unwrap_or(0)
}

pub const DEFAULT_PROMINENCE: f64 = 0.2;

/// First recurrence of the autocorrelation after t = 0: the earliest local
/// maximum of |A(t)| that rises at least `prominence` above the running
/// minimum seen since the start. The peak position is refined with a
/// three-point parabola, so the result does not snap to the sampling grid.
/// Depends only on time ratios: rescaling every t by a constant rescales
/// the detected period by the same constant.
pub fn detect_classical_period(series: &ObservableSeries, prominence: f64) -> Result<f64> {
    let r = &series.records;
    if !(prominence > 0.0) {
        return Err(SwionError::InvalidParams(format!(
            "peak prominence {prominence} must be positive"
        )));
    }
    let mut running_min = f64::INFINITY;
    for i in 1..r.len().saturating_sub(1) {
        let (ym, y0, yp) = (r[i - 1].a.norm(), r[i].a.norm(), r[i + 1].a.norm());
        running_min = running_min.min(ym);
        if ym < y0 && y0 >= yp && y0 - running_min >= prominence {
            let denom = ym - 2.0 * y0 + yp;
            let shift = if denom == 0.0 { 0.0 } else { 0.5 * (ym - yp) / denom };
            // uniform spacing around the peak; clamp against pathological fits
            let dt = 0.5 * (r[i + 1].t - r[i - 1].t);
            let shift = shift.clamp(-1.0, 1.0);
            return Ok(r[i].t + shift * dt);
        }
    }
    Err(SwionError::NoPeakFound { prominence })
}

/// Population left behind on the launch channel at the first half period:
/// 1 - P_plus read from the record closest to t_cl / 2. The series must
/// sample that instant to within one reporting interval.
pub fn splitting_fraction(series: &ObservableSeries, t_cl: f64) -> Result<f64> {
    let r = &series.records;
    let t_half = 0.5 * t_cl;
    if r.len() < 2 {
        return Err(SwionError::MissingRecord(t_half));
    }
    let dt = r[1].t - r[0].t;
    let best = r
        .iter()
        .min_by(|a, b| {
            (a.t - t_half).abs().partial_cmp(&(b.t - t_half).abs()).unwrap()
        })
        .unwrap();
    if (best.t - t_half).abs() > dt {
        return Err(SwionError::MissingRecord(t_half));
    }
    Ok(1.0 - best.p_plus)
}

/// Harmonic-mean revival time of a packet split between two curves with
/// weights p_sp and 1 - p_sp: the coherences accumulate inverse-period
/// phase at the weighted rate 1/T = p_sp/T_A + (1-p_sp)/T_D. Symmetric
/// under (p_sp, T_A, T_D) -> (1-p_sp, T_D, T_A).
pub fn predicted_revival(p_sp: f64, t_rev_a: f64, t_rev_d: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_sp) {
        return Err(SwionError::InvalidParams(format!(
            "splitting fraction {p_sp} outside [0, 1]"
        )));
    }
    if !(t_rev_a > 0.0) || !(t_rev_d > 0.0) {
        return Err(SwionError::InvalidParams(format!(
            "revival times must be positive, got {t_rev_a} and {t_rev_d}"
        )));
    }
    Ok(1.0 / (p_sp / t_rev_a + (1.0 - p_sp) / t_rev_d))
}

/// Largest cycle count searched for a common period.
pub const MAX_COMMON_CYCLES: u64 = 1_000_000;

/// Smallest common period of two frequencies: the least k (cycles of w1)
/// and l (cycles of w2) with |k w2 - l w1| <= tol * w1, giving
/// T = 2 pi k / w1. Errors with the searched denominator bound when the
/// ratio admits no such approximant.
pub fn combined_period(w1: f64, w2: f64, tol: f64) -> Result<(f64, u64, u64)> {
    if !(w1 > 0.0) || !(w2 > 0.0) || !(tol > 0.0) {
        return Err(SwionError::InvalidParams(format!(
            "combined_period needs positive frequencies and tolerance, got \
             w1 = {w1}, w2 = {w2}, tol = {tol}"
        )));
    }
    let ratio = w2 / w1;
    for k in 1..=MAX_COMMON_CYCLES {
        let l = (k as f64 * ratio).round();
        if l < 1.0 {
            continue;
        }
        if (k as f64 * ratio - l).abs() <= tol {
            return Ok((2.0 * std::f64::consts::PI * k as f64 / w1, k, l as u64));
        }
    }
    Err(SwionError::NoRationalApproximant(MAX_COMMON_CYCLES))
}
