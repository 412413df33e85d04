use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{detect_classical_period, splitting_fraction, DEFAULT_PROMINENCE};
use crate::basis::{curves_table, potential_curves};
use crate::cheb::ChebStepper;
use crate::config::{resolved_config, RunSpec};
use crate::dense::single_channel_spectrum;
use crate::error::{Result, SwionError};
use crate::fft::FftCache;
use crate::grid::{build_grid, GridSpec};
use crate::initial::build_initial;
use crate::observables::{measure, ObservableSeries};
use crate::params::IonTrapParams;
use crate::state::{Basis, SpinorState};
use crate::wigner::wigner;

/// Hard ceiling of the automatic grid-doubling policy.
pub const MAX_GRID_POINTS: usize = 1 << 14;

/// A state whose outer momentum band (|p| >= p_max/2) carries more mass
/// than this is considered under-resolved and triggers a doubling.
pub const MOMENTUM_TAIL_LIMIT: f64 = 1e-10;

/// Fraction of the state's norm carried by momenta |p| >= p_max / 2.
pub fn momentum_tail_fraction(s: &SpinorState) -> f64 {
    let n = s.n_points();
    let mut cache = FftCache::new(n);
    let mut buf = vec![num_complex::Complex64::new(0.0, 0.0); n];
    let mut tail = 0.0;
    let mut total = 0.0;
    let half = s.grid.p_max() / 2.0;
    for chan in [&s.upper, &s.lower] {
        buf.copy_from_slice(chan.as_slice().expect("contiguous"));
        cache.forward(&mut buf);
        for (j, v) in buf.iter().enumerate() {
            let w = v.norm_sqr();
            total += w;
            if s.grid.p[j].abs() >= half {
                tail += w;
            }
        }
    }
    if total == 0.0 {
        0.0
    } else {
        tail / total
    }
}

/// Build the working grid and initial state, doubling the point count
/// until the resolution covers both the dynamical momentum range (the
/// packet accelerates to sqrt(2 m E_dyn) rolling down the curve, far past
/// its initial momentum spread) and the packet's own support. The extent
/// never changes, only the resolution.
pub fn resolve_grid_and_state(spec: &RunSpec) -> Result<(Arc<GridSpec>, SpinorState)> {
    let center = 0.5 * (spec.grid.x_min + spec.grid.x_max);
    let extent = 0.5 * (spec.grid.x_max - spec.grid.x_min);
    let mut n = spec.grid.n_points;
    loop {
        let attempt = build_grid(&spec.params, center, extent, n)
            .map(Arc::new)
            .and_then(|grid| {
                let state = build_initial(&spec.initial, &spec.params, &grid)?;
                if momentum_tail_fraction(&state) > MOMENTUM_TAIL_LIMIT {
                    return Err(SwionError::SupportViolation(format!(
                        "packet momentum tail beyond p_max/2 exceeds {MOMENTUM_TAIL_LIMIT:.0e}"
                    )));
                }
                Ok((grid, state))
            });
        match attempt {
            Ok(pair) => return Ok(pair),
            // a momentum shortfall is fixed by resolution; a position-support
            // failure at fixed extent repeats at every n
            Err(e @ (SwionError::MomentumCutoff { .. } | SwionError::SupportViolation(_)))
                if n * 2 <= MAX_GRID_POINTS && e.to_string().contains("momentum") =>
            {
                n *= 2;
            }
            Err(e) => return Err(e),
        }
    }
}

const CHECKPOINT_MAGIC: &[u8; 8] = b"SWCHK\x01\0\0";

fn basis_tag(b: Basis) -> u64 {
    match b {
        Basis::Bare => 0,
        Basis::Diabatic => 1,
        Basis::Adiabatic => 2,
    }
}

fn basis_from_tag(t: u64) -> Result<Basis> {
    match t {
        0 => Ok(Basis::Bare),
        1 => Ok(Basis::Diabatic),
        2 => Ok(Basis::Adiabatic),
        other => Err(SwionError::Checkpoint(format!("unknown basis tag {other}"))),
    }
}

/// Serialize the full propagation state. Everything is explicit
/// little-endian f64/u64, so a restart is bit-exact on any platform.
pub fn write_checkpoint(path: &Path, s: &SpinorState, params: &IonTrapParams) -> Result<()> {
    let n = s.n_points();
    let mut buf = Vec::with_capacity(8 + 8 + 16 + 8 + 8 + 48 + 32 * n);
    buf.extend_from_slice(CHECKPOINT_MAGIC);
    buf.extend_from_slice(&(n as u64).to_le_bytes());
    buf.extend_from_slice(&s.grid.x_min.to_le_bytes());
    buf.extend_from_slice(&s.grid.x_max.to_le_bytes());
    buf.extend_from_slice(&basis_tag(s.basis).to_le_bytes());
    buf.extend_from_slice(&s.time.to_le_bytes());
    for v in [params.m, params.omega, params.delta, params.lambda, params.k, params.phi] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for j in 0..n {
        buf.extend_from_slice(&s.upper[j].re.to_le_bytes());
        buf.extend_from_slice(&s.upper[j].im.to_le_bytes());
        buf.extend_from_slice(&s.lower[j].re.to_le_bytes());
        buf.extend_from_slice(&s.lower[j].im.to_le_bytes());
    }
    fs::write(path, buf)?;
    Ok(())
}

/// Inverse of [`write_checkpoint`].
pub fn read_checkpoint(path: &Path) -> Result<(SpinorState, IonTrapParams)> {
    let data = fs::read(path)?;
    let fail = |msg: &str| SwionError::Checkpoint(format!("{}: {msg}", path.display()));
    if data.len() < 96 || &data[..8] != CHECKPOINT_MAGIC {
        return Err(fail("bad magic or truncated header"));
    }
    struct Cursor<'a> {
        data: &'a [u8],
        off: usize,
    }
    impl Cursor<'_> {
        fn u64(&mut self) -> u64 {
            let v = u64::from_le_bytes(self.data[self.off..self.off + 8].try_into().unwrap());
            self.off += 8;
            v
        }
        fn f64(&mut self) -> f64 {
            f64::from_bits(self.u64())
        }
    }
    let mut cur = Cursor { data: &data, off: 8 };
    let n = cur.u64() as usize;
    if data.len() != 96 + 32 * n {
        return Err(fail("length does not match point count"));
    }
    let x_min = cur.f64();
    let x_max = cur.f64();
    let basis = basis_from_tag(cur.u64())?;
    let time = cur.f64();
    let m = cur.f64();
    let omega = cur.f64();
    let delta = cur.f64();
    let lambda = cur.f64();
    let k = cur.f64();
    let phi = cur.f64();
    let params = IonTrapParams::new(m, omega, delta, lambda, k, phi)?;
    let grid = Arc::new(GridSpec::new(x_min, x_max, n)?);
    let mut s = SpinorState::zeros(grid, basis);
    s.time = time;
    for j in 0..n {
        s.upper[j] = num_complex::Complex64::new(cur.f64(), cur.f64());
        s.lower[j] = num_complex::Complex64::new(cur.f64(), cur.f64());
    }
    Ok((s, params))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestFile {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Headline {
    /// detected classical period, when the run is long enough to show one
    pub t_cl: Option<f64>,
    /// splitting fraction at half the detected period
    pub p_sp: Option<f64>,
    /// |norm^2 - 1| of the final record
    pub final_norm_drift: Option<f64>,
    pub n_records: usize,
    /// grid resolution actually used after the doubling policy
    pub grid_points: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub files: Vec<ManifestFile>,
    pub headline: Headline,
    /// true when the run aborted and the listed outputs are incomplete
    pub partial: bool,
    pub error: Option<String>,
}

fn sha256_hex(data: &[u8]) -> String {
    let digest = Sha256::digest(data);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

struct OutputSink {
    dir: PathBuf,
    files: Vec<ManifestFile>,
}

impl OutputSink {
    fn write(&mut self, name: &str, data: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        let mut f = fs::File::create(&path)?;
        f.write_all(data)?;
        f.sync_all()?;
        self.files.push(ManifestFile {
            path: name.to_string(),
            sha256: sha256_hex(data),
            bytes: data.len() as u64,
        });
        Ok(path)
    }
}

/// Run the full pipeline described by `spec`, writing every requested
/// artifact into `out_dir` plus `resolved.toml` (the defaults-expanded
/// config echo) and `manifest.json` (file list with checksums and headline
/// numbers). A propagation failure still writes the manifest, flagged
/// `partial`, before the error propagates.
pub fn execute(spec: &RunSpec, out_dir: &Path) -> Result<Manifest> {
    spec.validate()?;
    fs::create_dir_all(out_dir)?;
    let mut sink = OutputSink { dir: out_dir.to_path_buf(), files: Vec::new() };
    sink.write("resolved.toml", resolved_config(spec)?.as_bytes())?;

    let (grid, s0) = resolve_grid_and_state(spec)?;
    let mut headline = Headline {
        t_cl: None,
        p_sp: None,
        final_norm_drift: None,
        n_records: 0,
        grid_points: grid.n_points,
    };

    let result = run_pipeline(spec, &grid, &s0, &mut sink, &mut headline);
    let manifest = Manifest {
        files: sink.files.clone(),
        headline,
        partial: result.is_err(),
        error: result.as_ref().err().map(|e| e.to_string()),
    };
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| SwionError::Config(format!("manifest: {e}")))?;
    fs::write(out_dir.join("manifest.json"), json)?;
    result.map(|()| manifest)
}

fn run_pipeline(
    spec: &RunSpec,
    grid: &Arc<GridSpec>,
    s0: &SpinorState,
    sink: &mut OutputSink,
    headline: &mut Headline,
) -> Result<()> {
    let params = &spec.params;
    if spec.outputs.curves {
        for basis in [Basis::Bare, Basis::Diabatic, Basis::Adiabatic] {
            let name = format!("curves_{basis}.txt");
            sink.write(&name, curves_table(basis, params, grid).as_bytes())?;
        }
    }
    if spec.outputs.spectra {
        let n_max = 900.min(grid.n_points / 2);
        let (_, d_minus) = potential_curves(Basis::Diabatic, params, grid);
        let table = single_channel_spectrum(&d_minus, "D-", params, grid, n_max)?;
        sink.write("spectrum_dminus.txt", table.table().as_bytes())?;
        let (a_plus, _) = potential_curves(Basis::Adiabatic, params, grid);
        let table = single_channel_spectrum(&a_plus, "A+", params, grid, n_max)?;
        sink.write("spectrum_aplus.txt", table.table().as_bytes())?;
    }

    let want_series = spec.outputs.series;
    let want_wigner = !spec.outputs.wigner_times.is_empty();
    let want_checkpoints = spec.outputs.checkpoint_every.is_some();
    if !(want_series || want_wigner || want_checkpoints) {
        return Ok(());
    }

    let dt = spec.propagator.dt_report;
    let n_steps = (spec.propagator.t_end / dt).round().max(1.0) as usize;
    // map each requested snapshot time onto the nearest record index
    let mut wigner_steps: Vec<(usize, usize)> = spec
        .outputs
        .wigner_times
        .iter()
        .enumerate()
        .map(|(i, &t)| ((t / dt).round().min(n_steps as f64) as usize, i))
        .collect();
    wigner_steps.sort_unstable();

    let mut stepper = ChebStepper::new(params, Arc::clone(grid), &spec.propagator)?;
    let mut series = ObservableSeries::new();
    let mut state = s0.clone();
    let mut next_checkpoint = spec.outputs.checkpoint_every.unwrap_or(f64::INFINITY);
    let mut n_checkpoints = 0usize;

    let flush_series = |sink: &mut OutputSink, series: &ObservableSeries| -> Result<()> {
        if want_series && !series.is_empty() {
            sink.write("series.csv", series.to_csv().as_bytes())?;
        }
        Ok(())
    };

    let step_result = (|| -> Result<()> {
        for step in 0..=n_steps {
            if step > 0 {
                state = stepper.step(&state, dt)?;
            }
            series.push(measure(&state, s0, params)?);
            for &(_, idx) in wigner_steps.iter().filter(|&&(s, _)| s == step) {
                let w = wigner(&state, None)?;
                let name = format!("wigner_{idx:03}.txt");
                let body = format!(
                    "# t = {:.10e} (requested {:.10e})\n{}",
                    state.time, spec.outputs.wigner_times[idx], w.table()
                );
                sink.write(&name, body.as_bytes())?;
            }
            if state.time >= next_checkpoint - 0.5 * dt {
                let name = format!("checkpoint_{n_checkpoints:04}.bin");
                write_checkpoint(&sink.dir.join(&name), &state, params)?;
                let data = fs::read(sink.dir.join(&name))?;
                sink.files.push(ManifestFile {
                    path: name,
                    sha256: sha256_hex(&data),
                    bytes: data.len() as u64,
                });
                n_checkpoints += 1;
                next_checkpoint += spec.outputs.checkpoint_every.unwrap();
            }
        }
        Ok(())
    })();

    headline.n_records = series.len();
    if let Some(last) = series.records.last() {
        headline.final_norm_drift = Some((last.norm2 - 1.0).abs());
    }
    if let Ok(t_cl) = detect_classical_period(&series, DEFAULT_PROMINENCE) {
        headline.t_cl = Some(t_cl);
        headline.p_sp = splitting_fraction(&series, t_cl).ok();
    }
    flush_series(sink, &series)?;
    step_result
}
