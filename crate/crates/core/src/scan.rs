//! Parameter search for the bistable operating point: a (phi, lambda)
//! grid is ranked by how closely each point realizes a target splitting
//! fraction while keeping the two branch periods commensurate.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::analysis::splitting_fraction;
use crate::cheb::{ChebStepper, PropagatorConfig};
use crate::classical::{classical_trajectory, Curve};
use crate::config::RunSpec;
use crate::error::{Result, SwionError};
use crate::observables::{measure, ObservableSeries};
use crate::params::IonTrapParams;
use crate::run::resolve_grid_and_state;

/// Records per classical period during a scan-point propagation; even so
/// that both T/2 (splitting) and T (recurrence score) land on records.
pub const SCAN_STEPS_PER_PERIOD: usize = 16;

/// Classical oscillation period for a packet released at rest from `x0`
/// on `curve`.
pub fn curve_period(params: &IonTrapParams, x0: f64, curve: Curve) -> Result<f64> {
    let t_trap = 2.0 * PI / params.omega;
    classical_trajectory(x0, 0.0, curve, params, 2.0 * t_trap, t_trap / 2e4)?.period()
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanResult {
    pub phi: f64,
    pub lambda: f64,
    /// splitting fraction measured at half the lower-curve period
    pub p_sp: f64,
    pub t_cl_aplus: f64,
    pub t_cl_dminus: f64,
    /// relative branch-period mismatch |T_A+ - T_D-| / T_D-
    pub mismatch: f64,
    /// |A| after one classical period: how cleanly the split packet rephases
    pub score: f64,
}

/// Evaluate every (phi, lambda) combination requested by `spec.scan` and
/// return the results sorted by distance to the target splitting fraction,
/// ties broken by recurrence score. The point count is checked against the
/// scan budget before any propagation starts.
pub fn bistability_scan(spec: &RunSpec) -> Result<Vec<ScanResult>> {
    bistability_scan_threads(spec, 1)
}

/// [`bistability_scan`] with the points spread over up to `threads` worker
/// threads. Points are independent and reassembled in grid order before
/// sorting, so the result is identical for any thread count.
pub fn bistability_scan_threads(spec: &RunSpec, threads: usize) -> Result<Vec<ScanResult>> {
    if threads == 0 {
        return Err(SwionError::Config("threads must be >= 1".into()));
    }
    spec.validate()?;
    let scan = spec
        .scan
        .as_ref()
        .ok_or_else(|| SwionError::Config("scan requested but no [scan] section".into()))?;
    let phis = scan
        .phi
        .as_ref()
        .map(|r| r.values())
        .unwrap_or_else(|| vec![spec.params.phi]);
    let lambdas = scan
        .lambda
        .as_ref()
        .map(|r| r.values())
        .unwrap_or_else(|| vec![spec.params.lambda]);
    let mut points = Vec::with_capacity(phis.len() * lambdas.len());
    for &phi in &phis {
        for &lambda in &lambdas {
            points.push((phi, lambda));
        }
    }
    if points.len() > scan.budget {
        return Err(SwionError::BudgetExhausted { points: points.len(), budget: scan.budget });
    }

    let eval = |(phi, lambda): (f64, f64)| -> Result<ScanResult> {
        let params = IonTrapParams::new(
            spec.params.m,
            spec.params.omega,
            spec.params.delta,
            lambda,
            spec.params.k,
            phi,
        )?;
        scan_point(spec, &params)
    };

    let workers = threads.min(points.len()).max(1);
    let mut slots: Vec<Option<Result<ScanResult>>> = Vec::new();
    slots.resize_with(points.len(), || None);
    if workers == 1 {
        for (i, &pt) in points.iter().enumerate() {
            slots[i] = Some(eval(pt));
        }
    } else {
        let mut parts: Vec<Vec<(usize, (f64, f64))>> = vec![Vec::new(); workers];
        for (i, &pt) in points.iter().enumerate() {
            parts[i % workers].push((i, pt));
        }
        std::thread::scope(|s| {
            let handles: Vec<_> = parts
                .into_iter()
                .map(|part| {
                    s.spawn(move || {
                        part.into_iter().map(|(i, pt)| (i, eval(pt))).collect::<Vec<_>>()
                    })
                })
                .collect();
            for h in handles {
                for (i, r) in h.join().expect("scan worker panicked") {
                    slots[i] = Some(r);
                }
            }
        });
    }
    // first failure in grid order wins, independent of scheduling
    let mut results = Vec::with_capacity(points.len());
    for slot in slots {
        results.push(slot.expect("every point evaluated")?);
    }

    let target = scan.target_p_sp;
    results.sort_by(|a, b| {
        let da = (a.p_sp - target).abs();
        let db = (b.p_sp - target).abs();
        da.total_cmp(&db).then(b.score.total_cmp(&a.score))
    });
    Ok(results)
}

fn scan_point(spec: &RunSpec, params: &IonTrapParams) -> Result<ScanResult> {
    let x0 = spec.initial.x0;
    let t_d = curve_period(params, x0, Curve::DMinus)?;
    let t_a = curve_period(params, x0, Curve::APlus)?;

    let mut point_spec = spec.clone();
    point_spec.params = *params;
    let (grid, s0) = resolve_grid_and_state(&point_spec)?;

    let dt = t_d / SCAN_STEPS_PER_PERIOD as f64;
    let prop = PropagatorConfig::new(dt, t_d);
    let mut stepper = ChebStepper::new(params, Arc::clone(&grid), &prop)?;
    let mut series = ObservableSeries::new();
    let mut state = s0.clone();
    series.push(measure(&state, &s0, params)?);
    for _ in 0..SCAN_STEPS_PER_PERIOD {
        state = stepper.step(&state, dt)?;
        series.push(measure(&state, &s0, params)?);
    }

    let p_sp = splitting_fraction(&series, t_d)?;
    let score = series.records.last().map(|r| r.a.norm()).unwrap_or(0.0);
    Ok(ScanResult {
        phi: params.phi,
        lambda: params.lambda,
        p_sp,
        t_cl_aplus: t_a,
        t_cl_dminus: t_d,
        mismatch: (t_a - t_d).abs() / t_d,
        score,
    })
}

/// Fixed-width text table of scan results, best candidate first.
pub fn scan_table(results: &[ScanResult]) -> String {
    let mut out = String::from(
        "# phi                 lambda              P_sp       T_cl(A+)        T_cl(D-)        mismatch    score\n",
    );
    for r in results {
        out.push_str(&format!(
            "{:<20.12} {:<19.12} {:<10.6} {:<15.6} {:<15.6} {:<11.3e} {:.6}\n",
            r.phi, r.lambda, r.p_sp, r.t_cl_aplus, r.t_cl_dminus, r.mismatch, r.score
        ));
    }
    out
}
