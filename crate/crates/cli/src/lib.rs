//! Command-line driver for the `mpnd` solver suite.
//!
//! [`run`] parses arguments, loads the instance and configuration, runs one
//! subcommand and returns the process exit code: 0 on success, 1 for usage or
//! configuration errors, 2 for unreadable or invalid data, 3 for internal
//! failures.

pub mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use mpnd_core::ants::{run_colony, ColonyConfig, ProbabilityRule};
use mpnd_core::evaluate::sp_baseline;
use mpnd_core::instance::{expand_multiperiod, parse_sndlib, read_instance, write_instance, GrowthConfig, Instance};
use mpnd_core::reformulate::{emit_nominal, emit_robust};
use mpnd_core::relaxation::{lower_bound, nominal_lp_optimum};
use mpnd_core::report::gap;
use mpnd_core::search::{oracle_enumerate, solve_hybrid, HybridConfig, DEFAULT_ORACLE_CAP};
use mpnd_core::uncertainty::{build_multiband, BandSpec, MultibandSet};
use serde::Serialize;

pub use config::FileConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(m: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: m.into(),
        }
    }

    fn data(m: impl Into<String>) -> Self {
        CliError {
            code: EXIT_DATA,
            message: m.into(),
        }
    }

    fn internal(m: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INTERNAL,
            message: m.into(),
        }
    }
}

impl From<mpnd_core::Error> for CliError {
    fn from(e: mpnd_core::Error) -> Self {
        use mpnd_core::Error as E;
        let code = match e {
            E::Config(_) => EXIT_USAGE,
            E::Probability(_) => EXIT_INTERNAL,
            _ => EXIT_DATA,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "mpnd", version, about = "Robust multiperiod network design solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Colony followed by the exact neighbourhood search.
    Solve {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Seconds given to the neighbourhood search.
        #[arg(long)]
        rins_time: Option<f64>,
        /// Fixing tolerance of the neighbourhood rules.
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Colony only.
    Colony {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Every commodity on its shortest path.
    Baseline {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Exhaustive enumeration of all routings.
    Oracle {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        out: OutArgs,
        /// Largest number of routings to enumerate.
        #[arg(long)]
        cap: Option<f64>,
    },
    /// Writes the integer program in LP format.
    ExportLp {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Emit the robust counterpart instead of the nominal model.
        #[arg(long)]
        robust: bool,
        /// Emit dual rows for negative bands as well.
        #[arg(long)]
        all_bands: bool,
    },
    /// Expands a network into a multiperiod instance file.
    Gen {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Checks an instance and reports every violation.
    Validate {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Lists the admissible paths of every commodity.
    Paths {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Instance file, native or SNDlib format.
    instance: PathBuf,
    /// TOML configuration; defaults to $MPND_CONFIG.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Periods when expanding an SNDlib network.
    #[arg(long)]
    periods: Option<usize>,
    /// Per-period demand growth factor.
    #[arg(long)]
    growth: Option<f64>,
    /// Per-period module cost factor.
    #[arg(long)]
    discount: Option<f64>,
    /// Admissible paths per commodity.
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    jitter: Option<f64>,
    #[arg(long)]
    growth_seed: Option<u64>,
    /// Module size override.
    #[arg(long)]
    phi: Option<f64>,
}

#[derive(Args, Debug)]
struct OutArgs {
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Instance label in the report.
    #[arg(long)]
    id: Option<String>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    out: OutArgs,
    #[arg(long)]
    seed: Option<u64>,
    /// Total wall-clock budget in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Ants per batch.
    #[arg(long)]
    ants: Option<usize>,
    /// Stop after this many batches; without --time-limit the run is then
    /// independent of machine speed.
    #[arg(long)]
    batches: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Width of the moving average; defaults to ants / 10.
    #[arg(long)]
    window: Option<usize>,
}

/// One CSV row. Columns of phases that did not run are left empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub id: String,
    #[serde(rename = "T")]
    pub periods: usize,
    pub c_aco: Option<f64>,
    pub c_aco_rins: Option<f64>,
    pub gap_ar: Option<f64>,
    pub c_sp: Option<f64>,
    pub gap_sp: Option<f64>,
    pub lb: Option<f64>,
    pub time_s: f64,
    pub seed: Option<u64>,
    #[serde(skip)]
    pub batches: Option<usize>,
    #[serde(skip)]
    pub colony_s: Option<f64>,
    #[serde(skip)]
    pub rins_s: Option<f64>,
}

pub const CSV_HEADER: &str = "id,T,c_aco,c_aco_rins,gap_ar,c_sp,gap_sp,lb,time_s,seed";

fn secs(x: f64, what: &str) -> CliResult<Duration> {
    Duration::try_from_secs_f64(x).map_err(|_| CliError::usage(format!("{what} must be a non-negative number of seconds")))
}

/// Gap in percent, or nothing when the value is not positive.
fn gap_or_none(v: f64, lb: f64) -> Option<f64> {
    gap(v, lb).ok()
}

fn growth_config(input: &InputArgs, file: &FileConfig) -> GrowthConfig {
    let g = &file.growth;
    let d = GrowthConfig::default();
    GrowthConfig {
        periods: input.periods.or(g.periods).unwrap_or(d.periods),
        demand_growth: input.growth.or(g.demand_growth).unwrap_or(d.demand_growth),
        cost_discount: input.discount.or(g.cost_discount).unwrap_or(d.cost_discount),
        paths_per_commodity: input.paths.or(g.paths).unwrap_or(d.paths_per_commodity),
        jitter: input.jitter.or(g.jitter).unwrap_or(d.jitter),
        seed: input.growth_seed.or(g.seed).unwrap_or(d.seed),
        module_size: input.phi.or(g.module_size),
    }
}

fn band_spec(file: &FileConfig) -> CliResult<BandSpec> {
    let u = &file.uncertainty;
    let mut spec = BandSpec::default();
    if let Some(f) = &u.fractions {
        if u.upper.is_none() {
            return Err(CliError::usage("[uncertainty] upper is required when fractions are given"));
        }
        spec.lower = vec![0.0; f.len()];
        spec.fractions = f.clone();
    }
    if let Some(l) = &u.lower {
        spec.lower = l.clone();
    }
    if let Some(h) = &u.upper {
        spec.upper = h.clone();
    }
    Ok(spec)
}

fn is_sndlib(text: &str) -> bool {
    text.lines().any(|l| {
        let l = l.trim_start();
        l.starts_with("NODES (") || l.starts_with("LINKS (")
    })
}

struct Loaded {
    instance: Instance,
    file: FileConfig,
}

fn load(input: &InputArgs) -> CliResult<Loaded> {
    let file = FileConfig::load(input.config.as_deref()).map_err(CliError::usage)?;
    let text = fs::read_to_string(&input.instance)
        .map_err(|e| CliError::data(format!("{}: {e}", input.instance.display())))?;
    let instance = if is_sndlib(&text) {
        let growth = growth_config(input, &file);
        growth.validate()?;
        let mut inst = expand_multiperiod(&parse_sndlib(&text)?, &growth)?;
        if let Some(stem) = input.instance.file_stem() {
            inst.name = stem.to_string_lossy().into_owned();
        }
        inst
    } else {
        let mut inst = read_instance(&text)?;
        if let Some(phi) = input.phi.or(file.growth.module_size) {
            if !(phi > 0.0 && phi.is_finite()) {
                return Err(CliError::usage("module size must be positive"));
            }
            inst.module_size = phi;
        }
        inst
    };
    Ok(Loaded { instance, file })
}

fn multiband(loaded: &Loaded) -> CliResult<MultibandSet> {
    Ok(build_multiband(&loaded.instance, &band_spec(&loaded.file)?)?)
}

fn label(id: &Option<String>, inst: &Instance, path: &Path) -> String {
    id.clone().unwrap_or_else(|| {
        if inst.name.is_empty() {
            path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned())
        } else {
            inst.name.clone()
        }
    })
}

/// Colony settings from flags over file over defaults. The time limit is
/// left for the caller to set.
fn colony_config(run: &RunArgs, file: &FileConfig) -> CliResult<ColonyConfig> {
    let c = &file.colony;
    let d = ColonyConfig::default();
    let ants = run.ants.or(c.ants).unwrap_or(d.ants);
    let rule = match c.rule.as_deref() {
        None | Some("linear") => ProbabilityRule::Linear,
        Some("canonical") => ProbabilityRule::Canonical {
            beta: c.beta.unwrap_or(1.0),
            delta: c.delta.unwrap_or(1.0),
        },
        Some(other) => return Err(CliError::usage(format!("unknown probability rule `{other}`"))),
    };
    let cfg = ColonyConfig {
        alpha: run.alpha.or(c.alpha).unwrap_or(d.alpha),
        ants,
        window: run.window.or(c.window).unwrap_or((ants / 10).max(1)),
        time_limit: None,
        max_batches: run.batches.or(c.batches),
        seed: run.seed.or(c.seed).unwrap_or(d.seed),
        rule,
        tau_floor: c.tau_floor,
        eta_floor: c.eta_floor.unwrap_or(d.eta_floor),
        workers: run.workers.or(c.workers).unwrap_or(d.workers),
    };
    Ok(cfg)
}

/// Explicit total budget from the flag, else from the file.
fn total_budget(run: &RunArgs, file: &FileConfig) -> CliResult<Option<Duration>> {
    run.time_limit.or(file.colony.time_limit).map(|t| secs(t, "time limit")).transpose()
}

struct Sink<'a> {
    out: &'a mut dyn Write,
    path: Option<PathBuf>,
    buf: Vec<u8>,
}

impl<'a> Sink<'a> {
    fn new(out: &'a mut dyn Write, path: Option<PathBuf>) -> Self {
        Sink {
            out,
            path,
            buf: Vec::new(),
        }
    }

    fn finish(self) -> CliResult<()> {
        match self.path {
            Some(p) => fs::write(&p, &self.buf).map_err(|e| CliError::internal(format!("{}: {e}", p.display()))),
            None => self
                .out
                .write_all(&self.buf)
                .map_err(|e| CliError::internal(format!("cannot write output: {e}"))),
        }
    }
}

fn write_reports(sink: &mut Sink, rows: &[RunReport]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(&mut sink.buf);
    for r in rows {
        w.serialize(r).map_err(|e| CliError::internal(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::internal(e.to_string()))
}

fn cmd_solve(
    input: &InputArgs,
    run: &RunArgs,
    rins_flag: Option<f64>,
    eps_flag: Option<f64>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CliResult<()> {
    let start = Instant::now();
    let loaded = load(input)?;
    let mb = multiband(&loaded)?;
    let file = &loaded.file;
    let mut colony = colony_config(run, file)?;
    let rins = secs(rins_flag.or(file.search.rins_time).unwrap_or(10.0), "RINS time")?;
    let (colony_time, rins_time) = match total_budget(run, file)? {
        Some(total) => {
            let c = total.saturating_sub(rins).max(total / 2);
            (Some(c), rins.min(total.saturating_sub(c)))
        }
        None if colony.max_batches.is_some() => (None, rins),
        None => (ColonyConfig::default().time_limit, rins),
    };
    colony.time_limit = colony_time;
    let cfg = HybridConfig {
        colony,
        epsilon: eps_flag.or(file.search.epsilon).unwrap_or(0.1),
        rins_time,
    };
    let rep = solve_hybrid(&loaded.instance, &mb, &cfg)?;
    let _ = writeln!(
        err,
        "batches {}, fixed {} one / {} zero, search {} after {} nodes",
        rep.colony.batches,
        rep.fixed_one,
        rep.fixed_zero,
        rep.search_status.map_or("skipped", |s| s.as_str()),
        rep.search_nodes
    );
    let row = RunReport {
        id: label(&run.out.id, &loaded.instance, &input.instance),
        periods: loaded.instance.periods,
        c_aco: Some(rep.aco),
        c_aco_rins: Some(rep.aco_rins),
        gap_ar: gap_or_none(rep.aco_rins, rep.lower_bound),
        c_sp: Some(rep.sp),
        gap_sp: gap_or_none(rep.sp, rep.lower_bound),
        lb: Some(rep.lower_bound),
        time_s: start.elapsed().as_secs_f64(),
        seed: Some(cfg.colony.seed),
        batches: Some(rep.colony.batches),
        colony_s: Some(rep.colony_time.as_secs_f64()),
        rins_s: Some(rep.rins_time.as_secs_f64()),
    };
    let mut sink = Sink::new(out, run.out.out.clone());
    write_reports(&mut sink, &[row])?;
    sink.finish()
}

fn cmd_colony(input: &InputArgs, run: &RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let start = Instant::now();
    let loaded = load(input)?;
    let mb = multiband(&loaded)?;
    let mut cfg = colony_config(run, &loaded.file)?;
    cfg.time_limit = match total_budget(run, &loaded.file)? {
        Some(t) => Some(t),
        None if cfg.max_batches.is_some() => None,
        None => ColonyConfig::default().time_limit,
    };
    let res = run_colony(&loaded.instance, &mb, &cfg)?;
    let _ = writeln!(err, "batches {}, ants {}", res.batches, res.ants_built);
    let row = RunReport {
        id: label(&run.out.id, &loaded.instance, &input.instance),
        periods: loaded.instance.periods,
        c_aco: Some(res.best.cost),
        c_aco_rins: None,
        gap_ar: gap_or_none(res.best.cost, res.lower_bound),
        c_sp: Some(res.baseline.cost),
        gap_sp: gap_or_none(res.baseline.cost, res.lower_bound),
        lb: Some(res.lower_bound),
        time_s: start.elapsed().as_secs_f64(),
        seed: Some(cfg.seed),
        batches: Some(res.batches),
        colony_s: Some(res.elapsed.as_secs_f64()),
        rins_s: None,
    };
    let mut sink = Sink::new(out, run.out.out.clone());
    write_reports(&mut sink, &[row])?;
    sink.finish()
}

fn cmd_baseline(input: &InputArgs, o: &OutArgs, out: &mut dyn Write) -> CliResult<()> {
    let start = Instant::now();
    let loaded = load(input)?;
    let mb = multiband(&loaded)?;
    let inst = &loaded.instance;
    let sp = sp_baseline(inst, &mb);
    let lb = lower_bound(inst, &mb, &nominal_lp_optimum(inst)?);
    let row = RunReport {
        id: label(&o.id, inst, &input.instance),
        periods: inst.periods,
        c_aco: None,
        c_aco_rins: None,
        gap_ar: None,
        c_sp: Some(sp.cost),
        gap_sp: gap_or_none(sp.cost, lb),
        lb: Some(lb),
        time_s: start.elapsed().as_secs_f64(),
        seed: None,
        batches: None,
        colony_s: None,
        rins_s: None,
    };
    let mut sink = Sink::new(out, o.out.clone());
    write_reports(&mut sink, &[row])?;
    sink.finish()
}

#[derive(Serialize)]
struct OracleRow {
    id: String,
    #[serde(rename = "T")]
    periods: usize,
    c_opt: f64,
    routings: f64,
    time_s: f64,
}

fn cmd_oracle(input: &InputArgs, o: &OutArgs, cap: Option<f64>, out: &mut dyn Write) -> CliResult<()> {
    let start = Instant::now();
    let loaded = load(input)?;
    let mb = multiband(&loaded)?;
    let inst = &loaded.instance;
    let cap = cap.or(loaded.file.search.oracle_cap).unwrap_or(DEFAULT_ORACLE_CAP);
    let best = oracle_enumerate(inst, &mb, cap)?;
    let row = OracleRow {
        id: label(&o.id, inst, &input.instance),
        periods: inst.periods,
        c_opt: best.cost,
        routings: mpnd_core::search::routing_count(inst),
        time_s: start.elapsed().as_secs_f64(),
    };
    let mut sink = Sink::new(out, o.out.clone());
    {
        let mut w = csv::Writer::from_writer(&mut sink.buf);
        w.serialize(&row).map_err(|e| CliError::internal(e.to_string()))?;
        w.flush().map_err(|e| CliError::internal(e.to_string()))?;
    }
    sink.finish()
}

fn cmd_export(
    input: &InputArgs,
    dest: &Option<PathBuf>,
    robust: bool,
    all_bands: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CliResult<()> {
    let loaded = load(input)?;
    let (text, stats) = if robust {
        let mb = multiband(&loaded)?;
        let all = all_bands || loaded.file.search.all_bands.unwrap_or(false);
        emit_robust(&loaded.instance, &mb, all)
    } else {
        emit_nominal(&loaded.instance)
    };
    let _ = writeln!(
        err,
        "variables x {} y {} w {} z {}; rows assign {} cap {} dual {}",
        stats.x_vars, stats.y_vars, stats.w_vars, stats.z_vars, stats.assign_rows, stats.cap_rows, stats.dual_rows
    );
    let mut sink = Sink::new(out, dest.clone());
    sink.buf = text.into_bytes();
    sink.finish()
}

fn cmd_gen(input: &InputArgs, dest: &Option<PathBuf>, out: &mut dyn Write) -> CliResult<()> {
    let loaded = load(input)?;
    let mut sink = Sink::new(out, dest.clone());
    sink.buf = write_instance(&loaded.instance).into_bytes();
    sink.finish()
}

fn cmd_validate(input: &InputArgs, out: &mut dyn Write) -> CliResult<()> {
    match load(input) {
        Ok(l) => {
            let _ = writeln!(
                out,
                "ok: {} vertices, {} edges, {} commodities, {} periods",
                l.instance.network.vertices.len(),
                l.instance.num_edges(),
                l.instance.num_commodities(),
                l.instance.periods
            );
            Ok(())
        }
        Err(e) => {
            let msg = e.message.strip_prefix("validation error: ").unwrap_or(&e.message);
            for part in msg.split("; ") {
                let _ = writeln!(out, "violation: {part}");
            }
            Err(e)
        }
    }
}

#[derive(Serialize)]
struct PathRow {
    commodity: String,
    path: usize,
    hops: usize,
    cost: f64,
    edges: String,
}

fn cmd_paths(input: &InputArgs, dest: &Option<PathBuf>, out: &mut dyn Write) -> CliResult<()> {
    let loaded = load(input)?;
    let inst = &loaded.instance;
    let mut sink = Sink::new(out, dest.clone());
    {
        let mut w = csv::Writer::from_writer(&mut sink.buf);
        for (c, paths) in inst.paths.iter().enumerate() {
            for (p, path) in paths.iter().enumerate() {
                let edges: Vec<&str> = path.iter().map(|&e| inst.network.edges[e].id.as_str()).collect();
                w.serialize(PathRow {
                    commodity: inst.network.commodities[c].id.clone(),
                    path: p + 1,
                    hops: path.len(),
                    cost: inst.path_cost(path, 0),
                    edges: edges.join(" "),
                })
                .map_err(|e| CliError::internal(e.to_string()))?;
            }
        }
        w.flush().map_err(|e| CliError::internal(e.to_string()))?;
    }
    sink.finish()
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    match &cli.command {
        Command::Solve {
            input,
            run,
            rins_time,
            epsilon,
        } => cmd_solve(input, run, *rins_time, *epsilon, out, err),
        Command::Colony { input, run } => cmd_colony(input, run, out, err),
        Command::Baseline { input, out: o } => cmd_baseline(input, o, out),
        Command::Oracle { input, out: o, cap } => cmd_oracle(input, o, *cap, out),
        Command::ExportLp {
            input,
            out: dest,
            robust,
            all_bands,
        } => cmd_export(input, dest, *robust, *all_bands, out, err),
        Command::Gen { input, out: dest } => cmd_gen(input, dest, out),
        Command::Validate { input } => cmd_validate(input, out),
        Command::Paths { input, out: dest } => cmd_paths(input, dest, out),
    }
}

/// Runs the command line `args` (program name first) and returns the exit
/// code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let shown = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{shown}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{shown}");
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}
