//! `ddd`: simulate, inspect and check regularized dislocation networks.
//!
//! Exit codes: 0 ok, 1 usage, 2 configuration, 3 numerical failure,
//! 4 blow-up (with `simulate --fail-on-blowup`).

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;

use ddd_core::cli_io::{self, load_config, render_svg, run_checks, CheckOptions, Plane, SimulationConfig};
use ddd_core::elasticity::Vec3;
use ddd_core::energy_force::{energy_line, pk_force};
use ddd_core::evolution::{bound_monitor, write_diagnostics, write_events, Termination};
use ddd_core::geometry::{read_network, write_network, DislocationNetwork};
use ddd_core::DddError;

#[derive(Parser)]
#[command(name = "ddd", version, about = "Regularized discrete dislocation dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the gradient flow and write snapshots, diagnostics.csv and events.jsonl.
    Simulate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Also render every snapshot as SVG (xy projection).
        #[arg(long)]
        svg: bool,
        /// Exit with code 4 if the run stops on blow-up detection.
        #[arg(long)]
        fail_on_blowup: bool,
    },
    /// Print the line energy and its loop-pair breakdown as JSON.
    Energy {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Print the nodal Peach–Koehler force as CSV.
    Force {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Tabulate the kernels along a ray as CSV.
    KernelTable {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Direction of the ray, `x,y,z`.
        #[arg(long, default_value = "0,0,1", value_parser = parse_vec)]
        direction: Vec3,
        /// Largest radius in units of ε.
        #[arg(long, default_value_t = 100.0)]
        r_max: f64,
        /// Number of radii, log-spaced from ε/100 (plus r = 0).
        #[arg(long, default_value_t = 41)]
        count: usize,
    },
    /// Run the invariant suites and print a pass/fail table.
    Check {
        #[arg(long)]
        sphere_order: Option<usize>,
        /// Multiplies the profile normalization.
        #[arg(long, default_value_t = 1.0)]
        normalization_scale: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Render a network as SVG.
    Render {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value = "xy")]
        plane: Plane,
    },
}

fn parse_vec(s: &str) -> Result<Vec3, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    match v[..] {
        [x, y, z] => Ok(Vec3::new(x, y, z)),
        _ => Err(format!("expected three comma-separated numbers, got `{s}`")),
    }
}

enum Failure {
    Config(DddError),
    Numerical(DddError),
    BlowUp,
    Checks,
}

impl From<DddError> for Failure {
    fn from(e: DddError) -> Self {
        match e {
            DddError::Config { .. } | DddError::Json(_) | DddError::Format(_) | DddError::Io { .. } => Failure::Config(e),
            e => Failure::Numerical(e),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> Failure + '_ {
    move |e| Failure::Config(DddError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn config_or_default(path: Option<&Path>, epsilon: f64) -> Result<SimulationConfig, Failure> {
    Ok(match path {
        Some(p) => load_config(p)?,
        None => SimulationConfig::minimal(epsilon),
    })
}

fn matching_epsilon(cfg: &SimulationConfig, s: &DislocationNetwork) -> Result<(), Failure> {
    if cfg.epsilon != s.epsilon() {
        return Err(Failure::Config(DddError::Config {
            key: "epsilon".into(),
            message: format!("config has {} but the network was built for {}", cfg.epsilon, s.epsilon()),
        }));
    }
    Ok(())
}

fn simulate(input: &Path, config: &Path, out_dir: &Path, svg: bool, fail_on_blowup: bool) -> Result<(), Failure> {
    let cfg = load_config(config)?;
    let s0 = read_network(input)?;
    matching_epsilon(&cfg, &s0)?;
    let sim = cfg.simulation()?;
    let snapshots = out_dir.join("snapshots");
    fs::create_dir_all(&snapshots).map_err(io_err(&snapshots))?;
    let echo = out_dir.join("config.json");
    fs::write(&echo, cfg.to_json()).map_err(io_err(&echo))?;
    let every = cfg.output.snapshot_every;
    let snapshot = |s: &DislocationNetwork, step: usize| -> ddd_core::Result<()> {
        if s.is_empty() {
            return Ok(());
        }
        let stem = snapshots.join(format!("step_{step:06}"));
        write_network(&stem.with_extension("json"), s)?;
        if svg {
            render_svg(s, Plane::Xy, &stem.with_extension("svg"))?;
        }
        Ok(())
    };
    snapshot(&s0, 0)?;
    let (state, why) = sim.run(s0, |st, _| {
        if every > 0 && st.step % every == 0 {
            snapshot(&st.network, st.step)?;
        }
        Ok(())
    })?;
    snapshot(&state.network, state.step)?;
    let diag = out_dir.join("diagnostics.csv");
    write_diagnostics(BufWriter::new(File::create(&diag).map_err(io_err(&diag))?), &state.diagnostics)?;
    let events = out_dir.join("events.jsonl");
    write_events(BufWriter::new(File::create(&events).map_err(io_err(&events))?), &state.events)?;
    if !state.diagnostics.is_empty() {
        info!("largest bound ratios: {:?}", bound_monitor(&state.diagnostics)?);
    }
    println!("{} steps, t = {}, stopped: {:?}", state.step, state.time, why);
    match why {
        Termination::BlowUp { .. } if fail_on_blowup => Err(Failure::BlowUp),
        _ => Ok(()),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate {
            input,
            config,
            out_dir,
            svg,
            fail_on_blowup,
        } => simulate(&input, &config, &out_dir, svg, fail_on_blowup),
        Command::Energy { input, config } => {
            let s = read_network(&input)?;
            let cfg = config_or_default(config.as_deref(), s.epsilon())?;
            matching_epsilon(&cfg, &s)?;
            let e = energy_line(&s, &cfg.evaluator()?, &cfg.line_rule()?)?;
            let out = serde_json::json!({ "total": e.total, "pairs": e.pairs });
            println!("{}", serde_json::to_string_pretty(&out).map_err(DddError::from)?);
            Ok(())
        }
        Command::Force { input, config } => {
            let s = read_network(&input)?;
            let cfg = config_or_default(config.as_deref(), s.epsilon())?;
            matching_epsilon(&cfg, &s)?;
            let f = pk_force(&s, &cfg.evaluator()?, &cfg.line_rule()?)?;
            cli_io::write_force_table(io::stdout().lock(), &s, &f.force)?;
            Ok(())
        }
        Command::KernelTable {
            config,
            direction,
            r_max,
            count,
        } => {
            let cfg = config_or_default(config.as_deref(), 1.0)?;
            let ev = cfg.evaluator()?;
            let eps = cfg.epsilon;
            let lo = (0.01f64).ln();
            let hi = r_max.max(0.02).ln();
            let mut radii = vec![0.0];
            radii.extend((0..count).map(|k| eps * (lo + (hi - lo) * k as f64 / (count.max(2) - 1) as f64).exp()));
            cli_io::write_kernel_table(io::stdout().lock(), &ev, &direction, &radii)?;
            Ok(())
        }
        Command::Check {
            sphere_order,
            normalization_scale,
            seed,
        } => {
            let mut opts = CheckOptions {
                seed,
                ..Default::default()
            };
            if let Some(p) = sphere_order {
                opts.sphere_order = p;
            }
            opts.normalization *= normalization_scale;
            let report = run_checks(&opts);
            print!("{report}");
            io::stdout().flush().ok();
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::Checks)
            }
        }
        Command::Render { input, output, plane } => {
            let s = read_network(&input)?;
            render_svg(&s, plane, &output)?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = std::env::var("DDD_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("could not size the thread pool: {e}");
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
        Err(Failure::BlowUp) => {
            eprintln!("error: run stopped on blow-up");
            ExitCode::from(4)
        }
        // `check` reports failing suites in its table
        Err(Failure::Checks) => ExitCode::from(3),
    }
}
