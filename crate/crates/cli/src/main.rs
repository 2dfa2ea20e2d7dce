mod config;
mod report;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use config::{FileConfig, Overrides, RunConfig};
use evsp::charge_arcs::{build_network, Network, SequenceLimits};
use evsp::io::{load_instance, load_solution, save_instance, save_solution};
use evsp::master::CgStatus;
use evsp::model::Instance;
use evsp::oracle::{generate, validate, GeneratorConfig};
use evsp::pricing::{price_graph, Duals, PricingConfig};
use evsp::search::{branch_and_price, dive, root_lp, BpConfig, DiveConfig, DiveStatus, Solution};
use evsp::solution::{record_route, RouteRecord, SolutionFile};
use evsp::sparsify::sparsify_network;
use report::SummaryRow;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

const EXIT_INVALID: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_LIMIT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "evsp",
    version,
    about = "Electric vehicle scheduling by branch-and-price"
)]
struct Cli {
    #[command(subcommand)]
    mode: Mode,
}

#[derive(Subcommand)]
enum Mode {
    /// Draw a random instance.
    Generate(GenerateArgs),
    /// Build the charging-arc graphs and report their size.
    Preprocess {
        #[command(flatten)]
        run: RunArgs,
        /// Write one text dump per depot graph into this directory.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Solve the root linear relaxation by column generation.
    RootLp(RunArgs),
    /// Exact branch-and-price.
    Bp(RunArgs),
    /// Diving heuristic.
    Dive(RunArgs),
    /// One pricing round per depot for given duals (zero by default).
    PriceOnly {
        #[command(flatten)]
        run: RunArgs,
        /// JSON file `{"services": [...], "depot": 0.0}`.
        #[arg(long)]
        duals: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        max_columns: usize,
    },
    /// Check a solution file against an instance.
    Validate {
        instance: PathBuf,
        solution: PathBuf,
        /// Write the report here instead of standard output.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct GenerateArgs {
    /// Start from a preset: `small` or `mid`.
    #[arg(long, default_value = "small")]
    preset: String,
    #[arg(long)]
    services: Option<usize>,
    #[arg(long)]
    depots: Option<usize>,
    #[arg(long)]
    stations: Option<usize>,
    #[arg(long)]
    horizon: Option<f64>,
    /// Concave three-piece charging profile.
    #[arg(long)]
    nonlinear: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    instance: PathBuf,
    /// TOML configuration file.
    #[arg(long, env = "EVSP_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Depots priced concurrently.
    #[arg(long)]
    threads: Option<usize>,
    /// Seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    node_limit: Option<usize>,
    /// Longest station sequence on a charging arc.
    #[arg(long)]
    max_stations: Option<usize>,
    /// Work on the sparsified graphs.
    #[arg(long)]
    sparsify: bool,
    /// Arcs kept per vertex for the four arc classes, e.g. `2,2,15,2`.
    #[arg(long, value_name = "A,B,C,D", value_parser = parse_keep)]
    keep: Option<[usize; 4]>,
    /// Diving parameters `depth,candidates,routes,singletons`, e.g. `2,2,1,T`.
    #[arg(long, value_name = "D,C,R,S", value_parser = parse_dive)]
    dive: Option<(usize, usize, usize, bool)>,
    /// Solution (or report) JSON.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Summary CSV, appended to.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Iteration log CSV.
    #[arg(long)]
    log: Option<PathBuf>,
}

fn parse_keep(s: &str) -> Result<[usize; 4], String> {
    let v: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    <[usize; 4]>::try_from(v).map_err(|v| format!("expected four counts, got {}", v.len()))
}

fn parse_dive(s: &str) -> Result<(usize, usize, usize, bool), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(format!("expected four comma-separated values, got {s:?}"));
    }
    let num = |p: &str| p.parse::<usize>().map_err(|e| format!("{p:?}: {e}"));
    let flag = match parts[3] {
        "T" | "t" | "true" | "1" => true,
        "F" | "f" | "false" | "0" => false,
        other => return Err(format!("{other:?} is not a boolean")),
    };
    Ok((num(parts[0])?, num(parts[1])?, num(parts[2])?, flag))
}

impl RunArgs {
    fn config(&self) -> anyhow::Result<RunConfig> {
        let file = match &self.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        RunConfig::merge(
            file,
            Overrides {
                seed: self.seed,
                threads: self.threads,
                time_limit: self.time_limit,
                node_limit: self.node_limit,
                max_stations: self.max_stations,
                sparsify: self.sparsify,
                keep: self.keep,
                dive: self.dive,
            },
        )
    }
}

/// Instance, graphs and settings shared by the solve modes.
struct Prepared {
    inst: Instance,
    net: Network,
    cfg: RunConfig,
    started: Instant,
}

fn prepare(args: &RunArgs) -> anyhow::Result<Prepared> {
    let cfg = args.config()?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build_global()
        .context("starting the thread pool")?;
    let inst = load_instance(&args.instance)?;
    let started = Instant::now();
    let limits = SequenceLimits {
        max_stations: cfg.max_stations,
    };
    let mut net = build_network(&inst, limits)?;
    if cfg.sparsify {
        net = sparsify_network(&inst, &net, &cfg.sparsify_params);
    }
    Ok(Prepared {
        inst,
        net,
        cfg,
        started,
    })
}

fn mode_name(base: &str, cfg: &RunConfig) -> String {
    if cfg.sparsify {
        format!("{base}+sparse")
    } else {
        base.to_string()
    }
}

/// Write the solution file, summary row and log requested by `args`.
fn finish(
    args: &RunArgs,
    p: &Prepared,
    mode: &str,
    status: &str,
    solution: Option<&Solution>,
    bound: Option<f64>,
    nodes: usize,
    log: &[evsp::master::IterationLog],
) -> anyhow::Result<()> {
    let seconds = p.started.elapsed().as_secs_f64();
    let file = SolutionFile::new(
        &p.inst.name,
        mode,
        status,
        &p.net.battery,
        &p.net.store,
        p.inst.vehicle.fixed_cost,
        solution,
        bound,
    );
    if let Some(out) = &args.out {
        save_solution(out, &file)?;
    }
    if let Some(path) = &args.summary {
        let row = SummaryRow {
            instance: p.inst.name.clone(),
            mode: mode.to_string(),
            status: status.to_string(),
            ub: solution.map(|s| s.cost),
            vehicles: solution.map(Solution::vehicles),
            driving_cost: solution.map(|s| s.driving_cost(p.inst.vehicle.fixed_cost)),
            bound: file.bound,
            gap: file.gap,
            nodes,
            time: format!("{seconds:.2}"),
        };
        report::append_summary(path, &row)?;
    }
    if let Some(path) = &args.log {
        report::write_log(path, log)?;
    }
    let cost = solution.map_or("-".to_string(), |s| format!("{:.3}", s.cost));
    let bound = bound.map_or("-".to_string(), |b| format!("{b:.3}"));
    eprintln!(
        "{} {mode}: {status}, cost {cost}, bound {bound}, nodes {nodes}, {seconds:.2}s",
        p.inst.name
    );
    Ok(())
}

fn run_root_lp(args: &RunArgs) -> anyhow::Result<u8> {
    let p = prepare(args)?;
    let (value, status, log) = root_lp(&p.inst, &p.net, &p.cfg.cg, p.cfg.time_limit)?;
    let (name, code, bound) = match status {
        CgStatus::Converged => ("converged", 0, Some(value)),
        CgStatus::Infeasible => ("infeasible", EXIT_INFEASIBLE, None),
        CgStatus::Limit => ("limit", EXIT_LIMIT, None),
    };
    finish(
        args,
        &p,
        &mode_name("root-lp", &p.cfg),
        name,
        None,
        bound,
        1,
        &log,
    )?;
    Ok(code)
}

fn run_bp(args: &RunArgs) -> anyhow::Result<u8> {
    let p = prepare(args)?;
    let cfg = BpConfig {
        cg: p.cfg.cg.clone(),
        node_limit: p.cfg.node_limit,
        time_limit: p.cfg.time_limit,
    };
    let out = branch_and_price(&p.inst, &p.net, &cfg)?;
    let (status, code) = match (&out.best, out.proven) {
        (Some(_), true) => ("optimal", 0),
        (None, true) => ("infeasible", EXIT_INFEASIBLE),
        (Some(_), false) => ("feasible", EXIT_LIMIT),
        (None, false) => ("limit", EXIT_LIMIT),
    };
    let bound = out.bound.is_finite().then_some(out.bound);
    finish(
        args,
        &p,
        &mode_name("bp", &p.cfg),
        status,
        out.best.as_ref(),
        bound,
        out.nodes,
        &out.log,
    )?;
    Ok(code)
}

fn run_dive(args: &RunArgs) -> anyhow::Result<u8> {
    let p = prepare(args)?;
    let d = &p.cfg.dive;
    let cfg = DiveConfig {
        strong_depth: d.strong_depth,
        strong_candidates: d.strong_candidates,
        max_routes: d.max_routes,
        singletons: d.singletons,
        seed: p.cfg.seed,
        cg: p.cfg.cg.clone(),
        time_limit: p.cfg.time_limit,
    };
    let out = dive(&p.inst, &p.net, &cfg)?;
    let (status, code) = match out.status {
        DiveStatus::Feasible => ("feasible", 0),
        DiveStatus::Infeasible => ("infeasible", EXIT_INFEASIBLE),
        DiveStatus::Limit => ("limit", EXIT_LIMIT),
    };
    let bound = out.root_value.is_finite().then_some(out.root_value);
    finish(
        args,
        &p,
        &mode_name("dive", &p.cfg),
        status,
        out.solution.as_ref(),
        bound,
        out.nodes,
        &out.log,
    )?;
    Ok(code)
}

#[derive(Serialize)]
struct PreprocessReport {
    instance: String,
    sparsified: bool,
    arcs: usize,
    distinct_arcs: usize,
    per_depot: Vec<usize>,
    stats: evsp::charge_arcs::NetworkStats,
}

fn run_preprocess(args: &RunArgs, dump: Option<&Path>) -> anyhow::Result<u8> {
    let p = prepare(args)?;
    let report = PreprocessReport {
        instance: p.inst.name.clone(),
        sparsified: p.cfg.sparsify,
        arcs: p.net.total_arcs(),
        distinct_arcs: p.net.distinct_arcs(),
        per_depot: p.net.graphs.iter().map(|g| g.n_arcs()).collect(),
        stats: p.net.stats(),
    };
    if let Some(dir) = dump {
        std::fs::create_dir_all(dir)?;
        for g in &p.net.graphs {
            let path = dir.join(format!("depot_{}.txt", g.depot));
            let f = std::fs::File::create(&path)
                .with_context(|| format!("creating {}", path.display()))?;
            g.dump(std::io::BufWriter::new(f))?;
        }
    }
    emit(args.out.as_deref(), &report)?;
    Ok(0)
}

#[derive(Deserialize)]
struct DualsFile {
    services: Vec<f64>,
    #[serde(default)]
    depot: f64,
}

#[derive(Serialize)]
struct PricedRecord {
    reduced_cost: f64,
    #[serde(flatten)]
    route: RouteRecord,
}

#[derive(Serialize)]
struct DepotPricing {
    depot: usize,
    labels: usize,
    truncated: bool,
    routes: Vec<PricedRecord>,
}

fn run_price_only(args: &RunArgs, duals: Option<&Path>, max_columns: usize) -> anyhow::Result<u8> {
    let p = prepare(args)?;
    let n = p.inst.n_services();
    let duals = match duals {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let d: DualsFile = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", path.display()))?;
            if d.services.len() != n {
                bail!("{} service duals given for {n} services", d.services.len());
            }
            d
        }
        None => DualsFile {
            services: vec![0.0; n],
            depot: 0.0,
        },
    };
    let cfg = PricingConfig {
        max_columns,
        threshold: f64::INFINITY,
        ..Default::default()
    };
    let fixed = p.inst.vehicle.fixed_cost;
    let capacity = p.net.battery.capacity();
    let report: Vec<DepotPricing> = p
        .net
        .graphs
        .iter()
        .map(|g| {
            let d = Duals {
                services: &duals.services,
                depot: duals.depot,
            };
            let out = price_graph(g, capacity, fixed, d, &cfg);
            DepotPricing {
                depot: g.depot,
                labels: out.labels,
                truncated: out.truncated,
                routes: out
                    .routes
                    .iter()
                    .map(|r| PricedRecord {
                        reduced_cost: r.reduced_cost,
                        route: record_route(&p.net.battery, &p.net.store, &r.route),
                    })
                    .collect(),
            }
        })
        .collect();
    emit(args.out.as_deref(), &report)?;
    Ok(0)
}

fn run_validate(instance: &Path, solution: &Path, out: Option<&Path>) -> anyhow::Result<u8> {
    let inst = load_instance(instance)?;
    let sol = load_solution(solution)?;
    let report = validate(&inst, &sol);
    emit(out, &report)?;
    if let Some(v) = &report.violation {
        eprintln!("invalid: {:?} {}", v.kind, v.detail);
    }
    Ok(if report.feasible { 0 } else { EXIT_INVALID })
}

fn run_generate(a: &GenerateArgs) -> anyhow::Result<u8> {
    let mut cfg = match a.preset.as_str() {
        "small" => GeneratorConfig::small(10, a.seed),
        "mid" => GeneratorConfig::mid(a.seed),
        other => bail!("unknown preset {other:?}"),
    };
    if let Some(n) = a.services {
        cfg.services = n;
    }
    if let Some(d) = a.depots {
        anyhow::ensure!(d > 0, "at least one depot is needed");
        cfg.depots = d;
    }
    if let Some(s) = a.stations {
        cfg.stations = s;
    }
    if let Some(h) = a.horizon {
        anyhow::ensure!(
            h > cfg.max_duration,
            "horizon must exceed the longest service"
        );
        cfg.horizon = h;
    }
    cfg.nonlinear = a.nonlinear;
    let inst = generate(&cfg);
    match &a.out {
        Some(path) => save_instance(path, &inst)?,
        None => println!("{}", evsp::io::instance_to_json(&inst)),
    }
    Ok(0)
}

/// Pretty JSON to a file or standard output.
fn emit<T: Serialize>(out: Option<&Path>, value: &T) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors, which here means infeasible
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INVALID } else { 0 });
        }
    };
    let result = match &cli.mode {
        Mode::Generate(a) => run_generate(a),
        Mode::Preprocess { run, dump } => run_preprocess(run, dump.as_deref()),
        Mode::RootLp(a) => run_root_lp(a),
        Mode::Bp(a) => run_bp(a),
        Mode::Dive(a) => run_dive(a),
        Mode::PriceOnly {
            run,
            duals,
            max_columns,
        } => run_price_only(run, duals.as_deref(), *max_columns),
        Mode::Validate {
            instance,
            solution,
            out,
        } => run_validate(instance, solution, out.as_deref()),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INVALID)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dive_parameters_parse() {
        assert_eq!(parse_dive("2,2,1,T"), Ok((2, 2, 1, true)));
        assert_eq!(parse_dive("0, 1, 3, false"), Ok((0, 1, 3, false)));
        assert!(parse_dive("2,2,1").is_err());
        assert!(parse_dive("2,2,1,maybe").is_err());
        assert_eq!(parse_keep("2,2,15,2"), Ok([2, 2, 15, 2]));
        assert!(parse_keep("2,2,15").is_err());
    }
}
