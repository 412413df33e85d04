use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use swion::config::{parse_config, preset, resolved_config, OutputSpec, RunSpec, PRESET_NAMES};
use swion::error::{Result, SwionError};
use swion::run::execute;
use swion::scan::{bistability_scan_threads, scan_table};

#[derive(Parser)]
#[command(
    name = "swion",
    version,
    about = "Coupled-channel wave-packet dynamics of a trapped two-level ion \
             in a standing-wave laser field"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// worker threads (used by scan; other subcommands are single-threaded)
    #[arg(long, global = true, default_value_t = 1, value_name = "N")]
    threads: usize,
}

#[derive(Args)]
struct SpecArgs {
    /// TOML run configuration file
    #[arg(long, value_name = "PATH", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// built-in scenario name (see presets-list)
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// dotted-path config override, e.g. params.lambda=0.06 (repeatable)
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct OutArgs {
    /// output directory (created if missing)
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Propagate the configured scenario and write every requested artifact
    Run {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Rank (phi, lambda) candidates against a target splitting fraction
    Scan {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Write potential-curve tables in all three representations
    Curves {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Write single-channel bound spectra for the two transport curves
    Spectrum {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Write phase-space (Wigner) snapshots at the given times
    Wigner {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        out: OutArgs,
        /// snapshot times, comma separated (default: the initial state)
        #[arg(long, value_delimiter = ',', value_name = "T1,T2,...")]
        times: Vec<f64>,
    },
    /// List the built-in scenario presets
    PresetsList,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    if cli.threads == 0 {
        return Err(SwionError::Config("--threads must be >= 1".into()));
    }
    match cli.cmd {
        Cmd::Run { spec, out } => run_and_report(build_spec(&spec)?, &out.out),
        Cmd::Scan { spec, out } => run_scan(build_spec(&spec)?, &out.out, cli.threads),
        Cmd::Curves { spec, out } => {
            let mut spec = build_spec(&spec)?;
            spec.outputs = OutputSpec { series: false, curves: true, ..OutputSpec::default() };
            run_and_report(spec, &out.out)
        }
        Cmd::Spectrum { spec, out } => {
            let mut spec = build_spec(&spec)?;
            spec.outputs = OutputSpec { series: false, spectra: true, ..OutputSpec::default() };
            run_and_report(spec, &out.out)
        }
        Cmd::Wigner { spec, out, times } => {
            let mut spec = build_spec(&spec)?;
            let times = if times.is_empty() { vec![0.0] } else { times };
            // propagate only as far as the latest snapshot
            let t_max = times.iter().cloned().fold(0.0, f64::max);
            spec.propagator.t_end = t_max.max(spec.propagator.dt_report);
            spec.outputs =
                OutputSpec { series: false, wigner_times: times, ..OutputSpec::default() };
            run_and_report(spec, &out.out)
        }
        Cmd::PresetsList => {
            for (name, what) in [
                ("fig2a", "potential-curve tables, standing wave k = 0.2"),
                ("fig2b", "potential-curve tables, standing wave k = 1.0"),
                ("fig3-coherent", "coherent-packet splitting run over 5.5 classical periods"),
                ("fig3-squeezed", "squeezed-packet splitting run over 5.5 classical periods"),
                ("fig4", "phase-space snapshots across one period plus the collapsed state"),
                ("fig5", "bistable long run to about 1.1 revival times, with checkpoints"),
            ] {
                println!("{name:<15} {what}");
            }
            // keep the listing in lockstep with the library
            debug_assert_eq!(PRESET_NAMES.len(), 6);
            Ok(())
        }
    }
}

fn build_spec(args: &SpecArgs) -> Result<RunSpec> {
    let base = match (&args.config, &args.preset) {
        (Some(path), None) => {
            let text = fs::read_to_string(path)
                .map_err(|e| SwionError::Config(format!("{}: {e}", path.display())))?;
            parse_config(&text)?
        }
        (None, Some(name)) => preset(name)?,
        _ => {
            return Err(SwionError::Config(
                "provide a scenario via --config PATH or --preset NAME".into(),
            ))
        }
    };
    apply_overrides(&base, &args.overrides)
}

/// Apply `key.path=value` pairs on top of the resolved config and
/// re-validate the result, so overrides obey exactly the same rules as a
/// hand-written file.
fn apply_overrides(spec: &RunSpec, overrides: &[String]) -> Result<RunSpec> {
    if overrides.is_empty() {
        return Ok(spec.clone());
    }
    let mut doc: toml::Table = toml::from_str(&resolved_config(spec)?)
        .map_err(|e| SwionError::Config(format!("resolved-config reparse: {e}")))?;
    for pair in overrides {
        let (path, raw) = pair.split_once('=').ok_or_else(|| {
            SwionError::Config(format!("override '{pair}' is not of the form KEY=VALUE"))
        })?;
        set_path(&mut doc, path.trim(), toml_value(raw.trim())?)?;
    }
    let text = toml::to_string(&doc)
        .map_err(|e| SwionError::Config(format!("overridden config: {e}")))?;
    parse_config(&text)
}

/// Parse an override value as a TOML literal; bare words fall back to
/// strings so `--override preset=fig5` works without explicit quotes.
fn toml_value(raw: &str) -> Result<toml::Value> {
    let attempt = |text: &str| -> Option<toml::Value> {
        toml::from_str::<toml::Table>(&format!("v = {text}"))
            .ok()
            .and_then(|mut t| t.remove("v"))
    };
    attempt(raw)
        .or_else(|| attempt(&format!("\"{}\"", raw.escape_default())))
        .ok_or_else(|| SwionError::Config(format!("cannot parse override value '{raw}'")))
}

fn set_path(doc: &mut toml::Table, path: &str, value: toml::Value) -> Result<()> {
    let parts: Vec<&str> = path.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(SwionError::Config(format!("bad override path '{path}'")));
    }
    let mut cur = doc;
    for key in &parts[..parts.len() - 1] {
        cur = cur
            .entry(key.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| {
                SwionError::Config(format!("override path '{path}': '{key}' is not a section"))
            })?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

fn run_and_report(spec: RunSpec, out: &PathBuf) -> Result<()> {
    let manifest = execute(&spec, out)?;
    let h = &manifest.headline;
    println!("wrote {} files to {}", manifest.files.len(), out.display());
    println!("grid points      : {}", h.grid_points);
    if h.n_records > 0 {
        println!("records          : {}", h.n_records);
    }
    if let Some(t) = h.t_cl {
        println!("T_cl (detected)  : {t:.6}");
    }
    if let Some(p) = h.p_sp {
        println!("P_sp (T_cl/2)    : {p:.4}");
    }
    if let Some(d) = h.final_norm_drift {
        println!("final norm drift : {d:.3e}");
    }
    Ok(())
}

fn run_scan(spec: RunSpec, out: &PathBuf, threads: usize) -> Result<()> {
    fs::create_dir_all(out)?;
    fs::write(out.join("resolved.toml"), resolved_config(&spec)?)?;
    let results = bistability_scan_threads(&spec, threads)?;
    fs::write(out.join("scan.txt"), scan_table(&results))?;
    let json = serde_json::to_string_pretty(&results)
        .map_err(|e| SwionError::Config(format!("scan serialization: {e}")))?;
    fs::write(out.join("scan.json"), json)?;
    print!("{}", scan_table(&results));
    println!("wrote scan.txt and scan.json to {}", out.display());
    Ok(())
}
