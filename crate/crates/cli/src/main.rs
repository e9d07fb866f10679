use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bardamage::diagnostics::classify_report;
use bardamage::output::{emit_figures, write_envelope_table, write_eps_csv, write_limit_csv};
use bardamage::scenarios::{preset_datum, preset_description, sweep_eps, DatumSpec, PRESETS};
use bardamage::{run_eps, run_limit, Error, ScenarioConfig, TwoWellParams};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "bardamage",
    version,
    about = "Brittle damage of a 1D bar and its plasticity-like limit"
)]
struct Cli {
    /// Scenario file (TOML). Defaults to the loading-unloading preset.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Replace the config's boundary datum by a named preset.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Output file (directory for emit-figures). Tables go to stdout otherwise.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    steps: Option<usize>,
    #[arg(long, global = true)]
    cells: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u32>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the damage model at one scale ε.
    SimulateEps {
        /// Defaults to the last entry of eps_list.
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Run the effective limit evolution.
    SimulateLimit,
    /// Decide whether the limit evolution is perfect plasticity.
    Classify,
    /// Compare the ε-runs of eps_list against the limit.
    SweepEps,
    /// Tabulate a two-well energy, its convex envelope and the optimal mixture.
    EnvelopeTable {
        #[arg(long, default_value_t = 0.1)]
        a: f64,
        #[arg(long, default_value_t = 1.0)]
        b: f64,
        #[arg(long, default_value_t = 2.0)]
        k: f64,
        #[arg(long, default_value_t = 6.0)]
        xi_max: f64,
        #[arg(long, default_value_t = 600)]
        points: usize,
    },
    /// Write the figure tables of the limit evolution.
    EmitFigures,
    /// List the built-in boundary data.
    PresetList,
}

fn load_config(cli: &Cli) -> bardamage::Result<ScenarioConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(name) = &cli.preset {
        preset_datum(name, &cfg.material)?;
        cfg.datum = DatumSpec::Preset { name: name.clone() };
    }
    if let Some(s) = cli.steps {
        cfg.steps = s;
    }
    if let Some(c) = cli.cells {
        cfg.cells = c;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn sink(out: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            Box::new(BufWriter::new(File::create(p)?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn json<T: serde::Serialize>(out: &mut dyn Write, value: &T) -> bardamage::Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Invariant(format!("serialization failed: {e}")))?;
    writeln!(out, "{text}")?;
    Ok(())
}

fn run(cli: &Cli) -> bardamage::Result<()> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::PresetList => {
            let mut w = sink(out)?;
            for name in PRESETS {
                writeln!(w, "{name}\t{}", preset_description(name).unwrap_or(""))?;
            }
            w.flush()?;
        }
        Command::EnvelopeTable {
            a,
            b,
            k,
            xi_max,
            points,
        } => {
            let p = TwoWellParams::new(*a, *b, *k)?;
            if !(*xi_max > 0.0) {
                return Err(Error::Config("--xi-max must be positive".into()));
            }
            let mut w = sink(out)?;
            write_envelope_table(&mut w, &p, -xi_max, *xi_max, *points)?;
            w.flush()?;
        }
        Command::SimulateEps { eps } => {
            let cfg = load_config(cli)?;
            let eps = eps.or(cfg.eps_list.last().copied()).unwrap_or(0.01);
            cfg.material.overshoot(eps)?;
            let w = cfg.boundary_datum()?;
            let traj = run_eps(&cfg.material, eps, cfg.cells, &w, &w.time_grid(cfg.steps)?)?;
            let mut sink = sink(out)?;
            write_eps_csv(&mut sink, &traj)?;
            sink.flush()?;
        }
        Command::SimulateLimit => {
            let cfg = load_config(cli)?;
            let w = cfg.boundary_datum()?;
            let traj = run_limit(&cfg.material, &w, &w.time_grid(cfg.steps)?)?;
            let mut sink = sink(out)?;
            write_limit_csv(&mut sink, &traj)?;
            sink.flush()?;
        }
        Command::Classify => {
            let cfg = load_config(cli)?;
            let w = cfg.boundary_datum()?;
            let (report, _) = classify_report(&w, &cfg.material, &w.time_grid(cfg.steps)?)?;
            let mut sink = sink(out)?;
            json(&mut sink, &report)?;
            sink.flush()?;
        }
        Command::SweepEps => {
            let cfg = load_config(cli)?;
            let report = sweep_eps(&cfg)?;
            let mut sink = sink(out)?;
            json(&mut sink, &report)?;
            sink.flush()?;
        }
        Command::EmitFigures => {
            let cfg = load_config(cli)?;
            let w = cfg.boundary_datum()?;
            let traj = run_limit(&cfg.material, &w, &w.time_grid(cfg.steps)?)?;
            let dir = out.unwrap_or(&cfg.output);
            for path in emit_figures(&traj, dir)? {
                eprintln!("wrote {}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() || matches!(e, Error::Io(_)) {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
