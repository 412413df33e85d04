use serde::{Deserialize, Serialize};

use crate::cheb::PropagatorConfig;
use crate::classical::{classical_trajectory, Curve};
use crate::error::{Result, SwionError};
use crate::grid::GridSpec;
use crate::initial::InitialStateSpec;
use crate::params::IonTrapParams;

/// Requested artifacts of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// observable time series (CSV)
    #[serde(default = "default_true")]
    pub series: bool,
    /// times at which full Wigner snapshots are written
    #[serde(default)]
    pub wigner_times: Vec<f64>,
    /// potential-curve tables in all three representations
    #[serde(default)]
    pub curves: bool,
    /// single-channel eigenvalue tables for the launch and crossing curves
    #[serde(default)]
    pub spectra: bool,
    /// full-state binary checkpoint interval, in time units (absent = off)
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoint_every: Option<f64>,
}

fn default_true() -> bool {
    true
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            series: true,
            wigner_times: Vec::new(),
            curves: false,
            spectra: false,
            checkpoint_every: None,
        }
    }
}

/// Inclusive uniform sampling of one parameter: `count` points from
/// `start` to `stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl RangeSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.start + i as f64 * step).collect()
    }
}

/// Grid search over the standing-wave phase and coupling looking for a
/// target splitting fraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    pub target_p_sp: f64,
    /// maximum number of scan points a single invocation may propagate
    pub budget: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<RangeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<RangeSpec>,
}

/// One fully resolved run: physical parameters, numerical grid, initial
/// state, propagation window, and requested artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub params: IonTrapParams,
    #[serde(default = "default_grid")]
    pub grid: GridSpec,
    pub initial: InitialStateSpec,
    pub propagator: PropagatorConfig,
    #[serde(default)]
    pub outputs: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanSpec>,
}

fn default_grid() -> GridSpec {
    GridSpec::new(-9.0, 9.0, 2048).expect("default grid is valid")
}

impl RunSpec {
    /// Cross-section consistency checks that individual section validators
    /// cannot see.
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.initial.validate(&self.params)?;
        self.propagator.validate()?;
        if !(self.grid.x_min < self.initial.x0 && self.initial.x0 < self.grid.x_max) {
            return Err(SwionError::Config(format!(
                "[initial] x0 = {} lies outside the [grid] range [{}, {})",
                self.initial.x0, self.grid.x_min, self.grid.x_max
            )));
        }
        for (i, &t) in self.outputs.wigner_times.iter().enumerate() {
            if !(0.0..=self.propagator.t_end).contains(&t) {
                return Err(SwionError::Config(format!(
                    "[outputs] wigner_times[{i}] = {t} outside [0, t_end = {}]",
                    self.propagator.t_end
                )));
            }
        }
        if let Some(ck) = self.outputs.checkpoint_every {
            if !(ck.is_finite() && ck > 0.0) {
                return Err(SwionError::Config(format!(
                    "[outputs] checkpoint_every = {ck} must be positive"
                )));
            }
        }
        if let Some(scan) = &self.scan {
            if !(0.0..=1.0).contains(&scan.target_p_sp) {
                return Err(SwionError::Config(format!(
                    "[scan] target_p_sp = {} outside [0, 1]",
                    scan.target_p_sp
                )));
            }
            if scan.budget == 0 {
                return Err(SwionError::Config("[scan] budget must be >= 1".into()));
            }
            for (name, r) in [("phi", &scan.phi), ("lambda", &scan.lambda)] {
                if let Some(r) = r {
                    if r.count == 0 || !r.start.is_finite() || !r.stop.is_finite() {
                        return Err(SwionError::Config(format!(
                            "[scan.{name}] needs finite bounds and count >= 1"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Parse a TOML run configuration. Unknown keys, missing required keys,
/// and type mismatches are reported with their line and column; semantic
/// conflicts name the offending sections.
pub fn parse_config(text: &str) -> Result<RunSpec> {
    let spec: RunSpec =
        toml::from_str(text).map_err(|e| SwionError::Config(e.to_string()))?;
    spec.validate()?;
    Ok(spec)
}

/// Serialize a run spec with every applied default spelled out. Parsing
/// the result reproduces it exactly.
pub fn resolved_config(spec: &RunSpec) -> Result<String> {
    toml::to_string_pretty(spec)
        .map_err(|e| SwionError::Config(format!("serialize: {e}")))
}

pub const PRESET_NAMES: [&str; 6] =
    ["fig2a", "fig2b", "fig3-coherent", "fig3-squeezed", "fig4", "fig5"];

/// Classical period estimate used to lay out preset sampling schedules:
/// the trajectory of the launch point on the lower diabatic curve.
fn classical_period_estimate(params: &IonTrapParams, x0: f64) -> f64 {
    let t_trap = 2.0 * std::f64::consts::PI / params.omega;
    classical_trajectory(x0, 0.0, Curve::DMinus, params, 2.0 * t_trap, t_trap / 2e4)
        .and_then(|traj| traj.period())
        .expect("preset parameters support a bound classical orbit")
}

fn fig2a_params() -> IonTrapParams {
    IonTrapParams::new(80000.0, 5e-4, 0.02514, 0.05, 0.2, 1.07249074)
        .expect("preset parameters are valid")
}

fn fig3_params() -> IonTrapParams {
    // same drive as fig2a with the detuning reduced fivefold
    IonTrapParams::new(80000.0, 5e-4, 0.02514 / 5.0, 0.05, 0.2, 1.07249074)
        .expect("preset parameters are valid")
}

fn fig5_params() -> IonTrapParams {
    IonTrapParams::new(
        80000.0,
        5e-4,
        0.005025343787836,
        0.064727653164347,
        0.2,
        1.07244080531656,
    )
    .expect("preset parameters are valid")
}

/// Named scenario. Every preset resolves to an ordinary RunSpec; nothing
/// here can be expressed only by name.
pub fn preset(name: &str) -> Result<RunSpec> {
    let spec = match name {
        // potential-curve tables for the two drive geometries
        "fig2a" | "fig2b" => {
            let params = if name == "fig2a" {
                fig2a_params()
            } else {
                IonTrapParams::new(80000.0, 5e-4, 0.02514, 0.05, 1.0, 0.0)
                    .expect("preset parameters are valid")
            };
            RunSpec {
                params,
                grid: default_grid(),
                initial: InitialStateSpec::coherent(0.0),
                propagator: PropagatorConfig::new(50.0, 500.0),
                outputs: OutputSpec {
                    series: false,
                    curves: true,
                    ..OutputSpec::default()
                },
                preset: Some(name.to_string()),
                scan: None,
            }
        }
        // five classical periods of the split-and-recombine scenario
        "fig3-squeezed" | "fig3-coherent" => {
            let params = fig3_params();
            let t_cl = classical_period_estimate(&params, 6.0);
            let initial = if name == "fig3-squeezed" {
                InitialStateSpec::gaussian(6.0, 0.047)
            } else {
                InitialStateSpec::coherent(6.0)
            };
            RunSpec {
                params,
                grid: default_grid(),
                initial,
                propagator: PropagatorConfig::new(t_cl / 64.0, 5.5 * t_cl),
                outputs: OutputSpec::default(),
                preset: Some(name.to_string()),
                scan: None,
            }
        }
        // phase-space snapshots: eight uniform times across the first
        // period, then one after the collapse near 2000 T_cl
        "fig4" => {
            let params = fig3_params();
            let t_cl = classical_period_estimate(&params, 6.0);
            let mut wigner_times: Vec<f64> =
                (0..8).map(|j| j as f64 * t_cl / 8.0).collect();
            wigner_times.push(2000.0 * t_cl);
            RunSpec {
                params,
                grid: default_grid(),
                initial: InitialStateSpec::gaussian(6.0, 0.047),
                propagator: PropagatorConfig::new(t_cl / 8.0, 2000.0 * t_cl),
                outputs: OutputSpec { wigner_times, ..OutputSpec::default() },
                preset: Some(name.to_string()),
                scan: None,
            }
        }
        // long run through the revival; coarse sampling, periodic
        // checkpoints
        "fig5" => {
            let params = fig5_params();
            let t_cl = classical_period_estimate(&params, 6.0);
            RunSpec {
                params,
                grid: default_grid(),
                initial: InitialStateSpec::gaussian(6.0, 0.0340999659),
                // about 1.1 revival times for these parameters
                propagator: PropagatorConfig::new(t_cl / 8.0, 1.2e9),
                outputs: OutputSpec {
                    checkpoint_every: Some(500.0 * t_cl),
                    ..OutputSpec::default()
                },
                preset: Some(name.to_string()),
                scan: None,
            }
        }
        other => {
            return Err(SwionError::Config(format!(
                "unknown preset '{other}'; available: {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial::PacketKind;
    use approx::assert_relative_eq;

    const MINIMAL: &str = r#"
[params]
m = 80000.0
omega = 5e-4
delta = 0.02514
lambda = 0.05
k = 0.2
phi = 1.07249074

[initial]
kind = "gaussian"
x0 = 6.0
sigma = 0.047

[propagator]
dt_report = 50.0
t_end = 500.0
"#;

    #[test]
    fn minimal_config_fills_defaults() {
        let spec = parse_config(MINIMAL).unwrap();
        assert_eq!(spec.grid.n_points, 2048);
        assert_relative_eq!(spec.grid.x_min, -9.0);
        assert!(spec.outputs.series);
        assert!(spec.outputs.wigner_times.is_empty());
        assert_relative_eq!(spec.propagator.spectral_margin, 1.1);
        assert!(spec.preset.is_none());
        assert!(spec.scan.is_none());
    }

    #[test]
    fn resolved_echo_round_trips_identically() {
        let spec = parse_config(MINIMAL).unwrap();
        let echo = resolved_config(&spec).unwrap();
        // every default appears explicitly in the echo
        assert!(echo.contains("x_min"), "echo:\n{echo}");
        assert!(echo.contains("spectral_margin"), "echo:\n{echo}");
        assert!(echo.contains("series"), "echo:\n{echo}");
        let again = parse_config(&echo).unwrap();
        assert_eq!(spec, again);
    }

    #[test]
    fn unknown_keys_are_rejected_with_position() {
        let text = MINIMAL.replace("lambda = 0.05", "lambda = 0.05\nchirp = 1.0");
        let err = parse_config(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("chirp"), "{msg}");
        assert!(msg.contains("line"), "{msg}");
        assert!(err.is_config_error());
    }

    #[test]
    fn missing_required_keys_are_rejected() {
        let text = MINIMAL.replace("omega = 5e-4\n", "");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("omega"), "{err}");
        assert!(err.is_config_error());
    }

    #[test]
    fn launch_point_must_sit_inside_the_grid() {
        let text = MINIMAL.replace("x0 = 6.0", "x0 = 12.0");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("x0"), "{err}");
        assert!(err.is_config_error());
    }

    #[test]
    fn output_times_must_fit_the_run() {
        let text = format!("{MINIMAL}\n[outputs]\nwigner_times = [100.0, 900.0]\n");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("wigner_times"), "{err}");
    }

    #[test]
    fn scan_section_parses_and_validates() {
        let text = format!(
            "{MINIMAL}\n[scan]\ntarget_p_sp = 0.4\nbudget = 16\n\
             [scan.phi]\nstart = 1.0\nstop = 1.1\ncount = 4\n"
        );
        let spec = parse_config(&text).unwrap();
        let scan = spec.scan.unwrap();
        assert_eq!(scan.phi.unwrap().values().len(), 4);
        let bad = text.replace("target_p_sp = 0.4", "target_p_sp = 1.4");
        assert!(parse_config(&bad).is_err());
    }

    #[test]
    fn every_preset_is_valid_and_round_trips() {
        for name in PRESET_NAMES {
            let spec = preset(name).unwrap();
            assert_eq!(spec.preset.as_deref(), Some(name));
            let echo = resolved_config(&spec).unwrap();
            assert_eq!(parse_config(&echo).unwrap(), spec, "{name}");
        }
        assert!(preset("fig6").is_err());
    }

    #[test]
    fn fig3_presets_pin_the_drive_and_packet() {
        let sq = preset("fig3-squeezed").unwrap();
        assert_relative_eq!(sq.params.delta, 0.005028, max_relative = 1e-12);
        assert_relative_eq!(sq.params.lambda, 0.05);
        assert_relative_eq!(sq.params.phi, 1.07249074);
        assert_relative_eq!(sq.initial.x0, 6.0);
        assert_relative_eq!(sq.initial.sigma.unwrap(), 0.047);
        // the sampling interval tracks the classical period (~12300)
        assert!((sq.propagator.dt_report - 12304.0 / 64.0).abs() < 4.0);
        let co = preset("fig3-coherent").unwrap();
        assert_eq!(co.initial.kind, PacketKind::Coherent);
        assert!(co.initial.sigma.is_none());
        // width comes from the trap, never from the config
        assert_relative_eq!(
            co.initial.width(&co.params),
            0.11180339887498948,
            max_relative = 1e-12
        );
    }

    #[test]
    fn fig5_preset_pins_the_shifted_drive() {
        let spec = preset("fig5").unwrap();
        assert_relative_eq!(spec.params.phi, 1.07244080531656);
        assert_relative_eq!(spec.params.lambda, 0.064727653164347);
        assert_relative_eq!(spec.params.delta, 0.005025343787836);
        assert_relative_eq!(spec.initial.sigma.unwrap(), 0.0340999659);
        // coarse sampling at an eighth of the classical period
        assert!((spec.propagator.dt_report - 12225.0 / 8.0).abs() < 4.0);
        let ck = spec.outputs.checkpoint_every.unwrap();
        assert!((ck - 500.0 * 12225.0).abs() < 2000.0);
        assert!(spec.propagator.t_end > 1e9);
    }

    #[test]
    fn fig2_presets_emit_curve_tables() {
        let a = preset("fig2a").unwrap();
        assert!(a.outputs.curves);
        assert!(!a.outputs.series);
        let b = preset("fig2b").unwrap();
        assert_relative_eq!(b.params.k, 1.0);
        assert_relative_eq!(b.params.phi, 0.0);
        assert_relative_eq!(b.params.delta, 0.02514);
    }

    #[test]
    fn fig4_schedule_covers_one_period_and_the_collapse() {
        let spec = preset("fig4").unwrap();
        let times = &spec.outputs.wigner_times;
        assert_eq!(times.len(), 9);
        assert_relative_eq!(times[0], 0.0);
        // uniform spacing over the first period
        let dt = times[1];
        for j in 1..8 {
            assert_relative_eq!(times[j], j as f64 * dt, max_relative = 1e-12);
        }
        assert!(times[8] > 2.4e7, "collapse snapshot at {}", times[8]);
        assert!(times[8] <= spec.propagator.t_end);
    }
}
