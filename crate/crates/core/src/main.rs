// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use afrelay::config::derive_with_table;
use afrelay::e2e::{E2eModel, EvalPath, ModulationSpec};
use afrelay::mcsim::{self, MetricRequest};
use afrelay::sweep::{self, Axis, Endpoint, Metric, SweepSpec};
use afrelay::validate::{run_validation, ValidationOptions};
use afrelay::{table, Error, GainConvention, Result, SystemConfig};

const EXIT_VALIDATION_FAILED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "afrelay",
    version,
    about = "Two-way AF relay selection with outdated CSI: analysis, simulation and sweeps"
)]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "AFRELAY_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every analytic metric at one operating point.
    Analyze {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long, default_value = "bpsk")]
        modulation: String,
        #[arg(long, default_value_t = 1.0)]
        mgf_s: f64,
        #[arg(long, value_enum, default_value_t = PathArg::Closed)]
        eval: PathArg,
        #[arg(long, value_enum, default_value_t = EndpointArg::S2)]
        endpoint: EndpointArg,
    },
    /// Sweep one parameter and print CSV (or JSON) rows.
    Sweep {
        #[command(flatten)]
        sys: SystemArgs,
        /// Start from a built-in study instead of the flags.
        #[arg(long, value_enum)]
        preset: Option<Preset>,
        /// Sweep specification JSON; overrides all other sweep options.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        axis: Option<String>,
        /// Comma-separated values or `start:stop:step`.
        #[arg(long)]
        grid: Option<String>,
        /// Comma-separated subset of outage, ser, mgf.
        #[arg(long)]
        metrics: Option<String>,
        #[arg(long)]
        modulation: Option<String>,
        #[arg(long)]
        mc_trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        mgf_s: Option<f64>,
        #[arg(long, value_enum)]
        endpoint: Option<EndpointArg>,
        #[arg(long)]
        json: bool,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Monte-Carlo estimates only.
    Simulate {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "bpsk")]
        modulation: String,
        #[arg(long, default_value_t = 1.0)]
        mgf_s: f64,
        #[arg(long, value_enum, default_value_t = EndpointArg::S2)]
        endpoint: EndpointArg,
    },
    /// Run the self-check suite and print a JSON report.
    Validate {
        /// Also compare end-to-end outage at the correlated reference point.
        #[arg(long)]
        full: bool,
        #[arg(long, default_value_t = 200_000)]
        mc_trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Dump coefficient tables and the term set as JSON.
    Table {
        #[command(flatten)]
        sys: SystemArgs,
    },
}

#[derive(Args, Default)]
struct SystemArgs {
    /// Scenario JSON; its fields override the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    num_relays: Option<u32>,
    #[arg(long)]
    rho1: Option<f64>,
    #[arg(long)]
    rho2: Option<f64>,
    #[arg(long)]
    d1: Option<f64>,
    #[arg(long)]
    pathloss_exp: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    eta1_db: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    eta2_db: Option<f64>,
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long)]
    noise_power: Option<f64>,
    #[arg(long, value_enum)]
    gain_convention: Option<ConventionArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConventionArg {
    SelectedRelayMeans,
    PerRelayMeans,
}

#[derive(Clone, Copy, ValueEnum)]
enum PathArg {
    Closed,
    Quadrature,
}

#[derive(Clone, Copy, ValueEnum)]
enum EndpointArg {
    S1,
    S2,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// Outage against relay position, 15 dB.
    Fig1,
    /// BPSK error rate against SNR, relay midway.
    Fig2,
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

// Shallow overlay of a JSON object onto another.
fn overlay(base: &mut Value, over: Value) -> Result<()> {
    match (base.as_object_mut(), over) {
        (Some(b), Value::Object(o)) => {
            for (k, v) in o {
                b.insert(k, v);
            }
            Ok(())
        }
        _ => Err(Error::InvalidInput("configuration must be a JSON object".into())),
    }
}

impl SystemArgs {
    fn flags_onto(&self, mut cfg: SystemConfig) -> SystemConfig {
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { cfg.$f = v; } )* };
        }
        set!(num_relays, rho1, rho2, d1, pathloss_exp, eta1_db, eta2_db, rate, noise_power);
        if let Some(g) = self.gain_convention {
            cfg.gain_convention = match g {
                ConventionArg::SelectedRelayMeans => GainConvention::SelectedRelayMeans,
                ConventionArg::PerRelayMeans => GainConvention::PerRelayMeans,
            };
        }
        cfg
    }

    fn resolve_from(&self, base: SystemConfig) -> Result<SystemConfig> {
        let cfg = self.flags_onto(base);
        let cfg = match &self.config {
            None => cfg,
            Some(path) => {
                let mut v = serde_json::to_value(cfg).expect("config serializes");
                overlay(&mut v, read_json(path)?)?;
                serde_json::from_value(v).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve(&self) -> Result<SystemConfig> {
        self.resolve_from(SystemConfig::default())
    }
}

fn endpoint_cfg(cfg: SystemConfig, e: EndpointArg) -> SystemConfig {
    match e {
        EndpointArg::S2 => cfg,
        EndpointArg::S1 => cfg.swap_hops(),
    }
}

fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidInput(format!("cannot parse grid '{s}'"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let (a, b, h) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(h > 0.0) || !(b >= a) {
            return Err(bad());
        }
        let n = ((b - a) / h + 1e-9).floor() as usize;
        // multiply rather than accumulate so grid values are reproducible
        return Ok((0..=n).map(|k| a + k as f64 * h).collect());
    }
    s.split(',').map(num).collect()
}

fn analyze(sys: &SystemArgs, modulation: &str, mgf_s: f64, eval: PathArg, endpoint: EndpointArg) -> Result<Value> {
    let cfg = endpoint_cfg(sys.resolve()?, endpoint);
    let (derived, table) = derive_with_table(&cfg)?;
    let model = E2eModel::from_parts(&cfg, &derived, &table)?;
    let path = match eval {
        PathArg::Closed => EvalPath::Closed,
        PathArg::Quadrature => EvalPath::Quadrature,
    };
    let m = ModulationSpec::from_name(modulation)?;
    Ok(json!({
        "config": cfg,
        "derived": derived,
        "eval_path": path,
        "outage": model.outage(derived.psi)?,
        "ser": model.ser_with(path, &m)?,
        "modulation": m,
        "mgf_s": mgf_s,
        "mgf": model.mgf_with(path, mgf_s)?,
    }))
}

fn simulate(
    sys: &SystemArgs,
    trials: u64,
    seed: u64,
    modulation: &str,
    mgf_s: f64,
    endpoint: EndpointArg,
) -> Result<Value> {
    let cfg = endpoint_cfg(sys.resolve()?, endpoint);
    let (derived, _) = derive_with_table(&cfg)?;
    let m = ModulationSpec::from_name(modulation)?;
    let req = MetricRequest { psi: Some(derived.psi), modulations: vec![m.clone()], mgf_s: vec![mgf_s] };
    let est = mcsim::estimate_metrics(&cfg, &req, trials, seed, 0)?;
    Ok(json!({
        "config": cfg,
        "derived": derived,
        "outage": est.outage,
        "ser": est.ser[0],
        "modulation": m,
        "mgf_s": mgf_s,
        "mgf": est.mgf[0],
        "rng": mcsim::RNG_NAME,
        "gaussian": mcsim::GAUSSIAN_METHOD,
        "chunk_trials": mcsim::CHUNK_TRIALS,
    }))
}

#[allow(clippy::too_many_arguments)]
fn build_sweep_spec(
    sys: &SystemArgs,
    preset: Option<Preset>,
    spec: &Option<PathBuf>,
    axis: &Option<String>,
    grid: &Option<String>,
    metrics: &Option<String>,
    modulation: &Option<String>,
    mc_trials: Option<u64>,
    seed: Option<u64>,
    mgf_s: Option<f64>,
    endpoint: Option<EndpointArg>,
) -> Result<SweepSpec> {
    let mut s = match preset {
        Some(Preset::Fig1) => SweepSpec::fig1(2, 0.9, 0.9),
        Some(Preset::Fig2) => SweepSpec::fig2(2, 0.9, 0.9),
        None => SweepSpec { metrics: vec![Metric::Outage], ..SweepSpec::fig1(2, 0.9, 0.9) },
    };
    s.base = sys.resolve_from(s.base)?;
    if let Some(a) = axis {
        s.axis = Axis::from_name(a)?;
    }
    if let Some(g) = grid {
        s.grid = parse_grid(g)?;
    }
    if let Some(m) = metrics {
        s.metrics = m.split(',').map(|t| Metric::from_name(t.trim())).collect::<Result<_>>()?;
    }
    if let Some(m) = modulation {
        s.modulation = m.clone();
    }
    if let Some(n) = mc_trials {
        s.mc_trials = n;
    }
    if let Some(v) = seed {
        s.seed = v;
    }
    if let Some(v) = mgf_s {
        s.mgf_s = v;
    }
    if let Some(e) = endpoint {
        s.endpoint = match e {
            EndpointArg::S1 => Endpoint::S1,
            EndpointArg::S2 => Endpoint::S2,
        };
    }
    if let Some(path) = spec {
        let mut v = serde_json::to_value(&s).expect("spec serializes");
        overlay(&mut v, read_json(path)?)?;
        s = serde_json::from_value(v).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    }
    s.validate()?;
    Ok(s)
}

// A closed pipe (`afrelay ... | head`) is not an error worth reporting.
fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    if let Err(e) = out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            eprintln!("error: cannot write output: {e}");
            std::process::exit(1);
        }
    }
}

fn print_json(v: &impl serde::Serialize) {
    emit(&(serde_json::to_string_pretty(v).expect("serializable") + "\n"));
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Analyze { sys, modulation, mgf_s, eval, endpoint } => {
            print_json(&analyze(&sys, &modulation, mgf_s, eval, endpoint)?);
        }
        Command::Simulate { sys, trials, seed, modulation, mgf_s, endpoint } => {
            print_json(&simulate(&sys, trials, seed, &modulation, mgf_s, endpoint)?);
        }
        Command::Sweep {
            sys,
            preset,
            spec,
            axis,
            grid,
            metrics,
            modulation,
            mc_trials,
            seed,
            mgf_s,
            endpoint,
            json,
            output,
        } => {
            let s = build_sweep_spec(
                &sys,
                preset,
                &spec,
                &axis,
                &grid,
                &metrics,
                &modulation,
                mc_trials,
                seed,
                mgf_s,
                endpoint,
            )?;
            let rows = sweep::run_sweep(&s)?;
            let text = if json { sweep::to_json(&rows) + "\n" } else { sweep::to_csv(&s, &rows) };
            match output {
                Some(p) => std::fs::write(&p, text)
                    .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", p.display())))?,
                None => emit(&text),
            }
        }
        Command::Validate { full, mc_trials, seed } => {
            let report = run_validation(&ValidationOptions { mc_trials, seed, full });
            print_json(&report);
            if !report.passed {
                return Ok(EXIT_VALIDATION_FAILED);
            }
        }
        Command::Table { sys } => {
            emit(&(table::to_json(&table::dump_table(&sys.resolve()?)?) + "\n"));
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
