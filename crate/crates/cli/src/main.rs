mod config;
mod output;

use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use asi_sim::floquet::{kappa_t0, qubit_qubit_geff};
use asi_sim::scenarios::{run_coupling_sweep, run_scenario, sweep_minimum, Engine, ScenarioName, ScenarioOutput, SweepKind};
use asi_sim::units::{mhz, to_mhz, to_ns};
use asi_sim::validate;
use clap::{Parser, Subcommand};
use rayon::prelude::*;

use config::{Failure, Format, RunConfig};

macro_rules! out {
    ($($t:tt)*) => {
        writeln!(io::stdout(), $($t)*)?
    };
}

#[derive(Parser, Debug)]
#[command(name = "asi-sim", version, about = "Chiral spin dynamics from Floquet-engineered antisymmetric exchange")]
struct Cli {
    /// Print the default configuration (of `scenario <name>` when given) and exit.
    #[arg(long, global = true)]
    print_defaults: bool,

    /// Seed of the quasi-static dephasing sampler.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a named scenario and emit its population traces.
    Scenario {
        /// Scenario name; may instead come from the config file.
        name: Option<String>,
        /// effective | full | lindblad
        #[arg(long)]
        engine: Option<String>,
        /// JSON overrides layered over the preset.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write data here; the summary then goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Extract coupling rates over a ν/2π (MHz) or Δφ (rad) grid.
    Sweep {
        #[arg(value_enum)]
        kind: SweepArg,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long)]
        points: usize,
        /// JSON file whose `sweep` object overrides the sweep setup.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Print the second-order effective couplings.
    Couplings {
        /// Modulation index Δ/ν.
        #[arg(long)]
        f: f64,
        /// Bare coupling g/2π (MHz).
        #[arg(long)]
        g: f64,
        /// Modulation frequency ν/2π (MHz).
        #[arg(long)]
        nu: f64,
    },
    /// Run the invariant suite.
    Validate,
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
enum SweepArg {
    Nu,
    Dphi,
}

impl From<SweepArg> for SweepKind {
    fn from(a: SweepArg) -> Self {
        match a {
            SweepArg::Nu => SweepKind::Nu,
            SweepArg::Dphi => SweepKind::Dphi,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) | Err(Failure::Closed) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if cli.print_defaults {
        let name = match &cli.command {
            Some(Command::Scenario { name: Some(n), .. }) => config::parse_scenario(n)?,
            _ => ScenarioName::Fig2a,
        };
        let engine = match &cli.command {
            Some(Command::Scenario { engine: Some(e), .. }) => e.parse::<Engine>()?,
            _ => Engine::Effective,
        };
        out!("{}", serde_json::to_string_pretty(&RunConfig::preset(name, engine)).expect("config serializes"));
        return Ok(());
    }
    match cli.command {
        None => Err(Failure::Config("missing subcommand (scenario, sweep, couplings, validate); see --help".into())),
        Some(Command::Scenario { name, engine, config, out, format }) => {
            let file = config.as_deref().map(config::read_json).transpose()?;
            let engine = engine.map(|e| e.parse::<Engine>()).transpose()?;
            let mut cfg = config::resolve(name.as_deref(), engine, file)?;
            cfg.apply_seed(cli.seed);
            if let Some(out) = out {
                cfg.output.path = Some(out);
            }
            if let Some(format) = format {
                cfg.output.format = format;
            }
            scenario(&cfg)
        }
        Some(Command::Sweep { kind, from, to, points, config, out, format }) => {
            let file = config.as_deref().map(config::read_json).transpose()?;
            let setup = config::resolve_sweep(kind.into(), file)?;
            sweep(kind.into(), from, to, points, &setup, out, format)
        }
        Some(Command::Couplings { f, g, nu }) => couplings(f, g, nu),
        Some(Command::Validate) => run_validate(),
    }
}

fn sink(path: Option<&PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => {
            Box::new(BufWriter::new(File::create(p).map_err(|e| Failure::Numerical(format!("cannot create {}: {e}", p.display())))?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn scenario(cfg: &RunConfig) -> Result<(), Failure> {
    log::info!("running {} with the {} engine", cfg.scenario, cfg.engine);
    log::debug!("resolved configuration: {}", serde_json::to_string(cfg).expect("config serializes"));
    let start = std::time::Instant::now();
    let ScenarioOutput { populations, summary } = run_scenario(&cfg.spec())?;
    let mut w = sink(cfg.output.path.as_ref())?;
    let recs = output::records(&populations);
    let report = report_lines(&summary);
    match cfg.output.format {
        Format::Csv => output::write_csv(&mut w, &recs)?,
        Format::Json => output::write_json(&mut w, recs, summary)?,
    }
    w.flush()?;
    drop(w);
    log::info!("finished in {:.2} s", start.elapsed().as_secs_f64());
    // keep stdout machine-readable when the data goes there
    for l in &report {
        if cfg.output.path.is_some() {
            out!("{l}");
        } else {
            eprintln!("{l}");
        }
    }
    Ok(())
}

fn report_lines(s: &asi_sim::scenarios::ScenarioSummary) -> Vec<String> {
    let mut out = vec![format!("scenario {} ({} engine)", s.scenario, s.engine)];
    if let (Some(k), Some(t)) = (s.kappa_mhz, s.t0_ns) {
        out.push(format!("kappa/2pi = {k:.4} MHz, T0 = {t:.2} ns"));
    }
    if !s.order.is_empty() {
        out.push(format!("visit order: {}", s.order.join(" -> ")));
    }
    for p in &s.peaks {
        out.push(format!("  peak {:>4} at {:8.2} ns: {:.4}", p.label, p.time_ns, p.value));
    }
    for r in &s.rates {
        let ext = r.extracted_mhz.map_or("decoupled".to_string(), |v| format!("{v:.4} MHz"));
        out.push(format!("{}: extracted {ext} (raw {:.4} MHz), analytic {:.4} MHz", r.name, r.raw_mhz, r.analytic_mhz));
    }
    if let Some(g) = &s.ghz {
        out.push(format!("fidelity {:.6} (unoptimized {:.6}, relative phase {:.4} rad)", g.fidelity, g.raw_fidelity, g.relative_phase));
        let verdict = if g.genuine_entanglement { "PASS" } else { "FAIL" };
        out.push(format!("genuine entanglement: {verdict} (> {})", g.threshold));
    }
    if let Some(l) = s.leakage {
        out.push(format!("max leakage: {l:.3e}"));
    }
    out
}

fn sweep(
    kind: SweepKind,
    from: f64,
    to: f64,
    points: usize,
    setup: &asi_sim::scenarios::SweepSetup,
    out: Option<PathBuf>,
    format: Format,
) -> Result<(), Failure> {
    if points == 0 {
        return Err(Failure::Config("--points must be at least 1".into()));
    }
    let grid: Vec<f64> =
        if points == 1 { vec![from] } else { (0..points).map(|k| from + (to - from) * k as f64 / (points - 1) as f64).collect() };
    log::info!("sweeping {kind:?} over {points} points");
    let pts = run_coupling_sweep(kind, &grid, setup)?;
    let mut w = sink(out.as_ref())?;
    match format {
        Format::Csv => output::write_sweep_csv(&mut w, &pts)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, &pts).map_err(io::Error::from)?;
            w.write_all(b"\n")?;
        }
    }
    w.flush()?;
    drop(w);
    if kind == SweepKind::Nu {
        if let Some(m) = sweep_minimum(&pts) {
            eprintln!("minimum vacuum-Rabi rate {:.4} MHz at nu/2pi = {:.3} MHz", m.raw_mhz, m.x);
        }
    }
    Ok(())
}

fn couplings(f: f64, g: f64, nu: f64) -> Result<(), Failure> {
    if !(f >= 0.0 && g > 0.0 && nu > 0.0) || !(f.is_finite() && g.is_finite() && nu.is_finite()) {
        return Err(Failure::Config(format!("need f >= 0, g > 0, nu > 0 (got f = {f}, g = {g}, nu = {nu})")));
    }
    let c = kappa_t0(mhz(g), f, mhz(nu));
    out!("f          = {f:.6}");
    out!("beta       = {:.6}", c.beta);
    out!("g0/2pi     = {:.6} MHz", to_mhz(c.g0));
    out!("kappa/2pi  = {:.6} MHz", to_mhz(c.kappa));
    out!("T0         = {:.3} ns", to_ns(c.t0));
    out!();
    out!("{:>12}  {:>16}", "dphi (rad)", "g_eff/2pi (MHz)");
    for k in -6..=6 {
        let x = k as f64 * PI / 6.0;
        out!("{x:>12.6}  {:>16.6}", qubit_qubit_geff(g, f, nu, x));
    }
    Ok(())
}

fn run_validate() -> Result<(), Failure> {
    let checks: Vec<validate::Check> =
        validate::check_names().into_par_iter().map(|n| validate::run_check(n).expect("registered check")).collect();
    for c in &checks {
        out!("{} {:<26} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed == 0 {
        out!("all {} properties hold", checks.len());
        Ok(())
    } else {
        Err(Failure::Numerical(format!("{failed} of {} properties failed", checks.len())))
    }
}
