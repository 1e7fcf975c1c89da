use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use irrigation::analysis::{
    classify, dyadic_cost_bound, hybrid_certificate, lemma31_weight_bound, lemma32_weight_bound,
    nonirrigability_lower_bound, sweep, tail_bound, Regime, SweepConfig,
};
use irrigation::dyadic::{
    approximate_measure, build_dyadic_plan, build_hybrid_plan, hybrid_min_level, DyadicGrid,
};
use irrigation::io::{
    generator_from_json, measure_from_json, network_from_json, network_to_json, to_sorted_json,
    NetworkRecord,
};
use irrigation::lagrangian::{epsilon_good_maximal_paths, path_split, ParticlePlan, PlanRecord};
use irrigation::solver::{compute_weights_indexed, network_cost_indexed};
use irrigation::{Error, FluxFunction, Measure, Network};

const EXIT_IO: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_REGIME: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(
    name = "irrigate",
    version,
    about = "Weighted irrigation networks: weights, costs, dyadic plans and bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve branch weights on a network and report the weighted cost
    Solve {
        #[arg(long)]
        network: PathBuf,
        /// `power:c,beta` or `zero`
        #[arg(long)]
        f: String,
        #[arg(long)]
        alpha: f64,
    },
    /// Split the maximal eps-good paths of a plan into a network
    Split {
        #[arg(long)]
        plan: PathBuf,
        /// Defaults to the smallest group mass (no truncation)
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the dyadic plan of a measure at level n
    Dyadic(PlanArgs),
    /// Build the hybrid plan (dyadic branches plus shortcuts to the origin)
    Hybrid(PlanArgs),
    /// Solve the plans of levels n-min..=n-max and tabulate weights, costs and bounds
    Sweep {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long = "L", default_value_t = 1.0)]
        edge: f64,
        #[arg(long)]
        f: String,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1)]
        n_min: u32,
        #[arg(long)]
        n_max: u32,
        /// Sweep hybrid plans with this threshold
        #[arg(long)]
        z0: Option<f64>,
        /// CSV destination; stdout if absent
        #[arg(long)]
        out: Option<PathBuf>,
        /// Emit JSON instead of CSV
        #[arg(long)]
        json: bool,
    },
    /// Classify irrigability from d, alpha and beta
    Classify {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
    },
    /// Evaluate the weight, cost and tail bounds of a regime
    Bounds {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long = "L", default_value_t = 1.0)]
        edge: f64,
        #[arg(long = "M", default_value_t = 1.0)]
        mass: f64,
        /// Also evaluate the lower bound for cubes of this side
        #[arg(long)]
        delta: Option<f64>,
        /// Also report the level n0 required by the hybrid plan
        #[arg(long)]
        z0: Option<f64>,
        /// With --r: mass tail bound for a plan of this cost
        #[arg(long)]
        cost: Option<f64>,
        #[arg(long)]
        r: Option<f64>,
    },
}

#[derive(Args)]
struct PlanArgs {
    /// Generator spec: {"measure", "d", "L", "n", "f": {"c", "beta"}, "z0"}
    #[arg(long, conflicts_with_all = ["measure", "n"])]
    spec: Option<PathBuf>,
    #[arg(long)]
    measure: Option<PathBuf>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long = "L", default_value_t = 1.0)]
    edge: f64,
    /// `power:c,beta` or `zero`; defaults to the spec's law
    #[arg(long)]
    f: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long)]
    z0: Option<f64>,
    /// Write the network JSON here instead of embedding it in the report
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Io(PathBuf, std::io::Error),
    Lib(Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome<T> = Result<T, Failure>;

fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn write(path: &Path, text: &str) -> Outcome<()> {
    fs::write(path, text).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn parse_flux(s: &str) -> Outcome<FluxFunction> {
    if s == "zero" {
        return Ok(FluxFunction::zero());
    }
    let bad = || {
        Failure::Lib(Error::Domain(format!(
            "--f expects `power:c,beta` or `zero`, got `{s}`"
        )))
    };
    let params = s.strip_prefix("power:").ok_or_else(bad)?;
    let (c, beta) = params.split_once(',').ok_or_else(bad)?;
    let c: f64 = c.trim().parse().map_err(|_| bad())?;
    let beta: f64 = beta.trim().parse().map_err(|_| bad())?;
    Ok(FluxFunction::power_law(c, beta)?)
}

fn emit(v: &Value) -> Outcome<()> {
    println!("{}", to_sorted_json(v)?);
    Ok(())
}

fn network_value(net: &Network) -> Outcome<Value> {
    Ok(serde_json::to_value(NetworkRecord::from_network(net)).map_err(Error::from)?)
}

fn solve(network: &Path, f: &str, alpha: f64) -> Outcome<()> {
    let net = network_from_json(&read(network)?)?;
    let flux = parse_flux(f)?;
    let weights = compute_weights_indexed(&net, &flux)?;
    let cost = network_cost_indexed(&net, &weights, alpha)?;
    emit(&json!({
        "alpha": alpha,
        "cost": cost,
        "weights": weights,
    }))
}

fn split(plan: &Path, eps: Option<f64>, out: Option<&Path>) -> Outcome<()> {
    let rec: PlanRecord = serde_json::from_str(&read(plan)?).map_err(Error::from)?;
    let plan = ParticlePlan::from_record(&rec)?;
    let eps = eps.unwrap_or_else(|| {
        plan.groups()
            .iter()
            .map(|g| g.mass)
            .fold(f64::INFINITY, f64::min)
    });
    let paths = epsilon_good_maximal_paths(&plan, eps)?;
    let net = path_split(&paths)?;
    let text = network_to_json(&net)?;
    match out {
        Some(p) => write(p, &text),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

struct PlanInputs {
    measure: Measure,
    n: u32,
    edge: f64,
    flux: FluxFunction,
    z0: Option<f64>,
}

fn plan_inputs(a: &PlanArgs) -> Outcome<PlanInputs> {
    if let Some(spec) = &a.spec {
        let g = generator_from_json(&read(spec)?)?;
        let measure = g.measure.into_measure()?;
        if measure.dim() != g.d {
            return Err(Error::Domain(format!(
                "spec says d = {} but the measure has dimension {}",
                g.d,
                measure.dim()
            ))
            .into());
        }
        let flux = match &a.f {
            Some(f) => parse_flux(f)?,
            None => FluxFunction::power_law(g.f.c, g.f.beta)?,
        };
        return Ok(PlanInputs {
            measure,
            n: g.n,
            edge: g.edge,
            flux,
            z0: a.z0.or(g.z0),
        });
    }
    let (Some(measure), Some(n)) = (&a.measure, a.n) else {
        return Err(Failure::Usage(
            "either --spec or both --measure and --n are required".into(),
        ));
    };
    let f = a.f.as_deref().unwrap_or("zero");
    Ok(PlanInputs {
        measure: measure_from_json(&read(measure)?)?,
        n,
        edge: a.edge,
        flux: parse_flux(f)?,
        z0: a.z0,
    })
}

fn plan_report(a: &PlanArgs, net: &Network, mut report: Value) -> Outcome<()> {
    match &a.out {
        Some(p) => write(p, &network_to_json(net)?)?,
        None => report["network"] = network_value(net)?,
    }
    emit(&report)
}

fn dyadic(a: &PlanArgs, force_hybrid: bool) -> Outcome<()> {
    let p = plan_inputs(a)?;
    let grid = DyadicGrid::new(p.measure.dim(), p.edge, p.n)?;
    let mu_n = approximate_measure(&p.measure, &grid)?;
    let z0 = if force_hybrid {
        Some(p.z0.ok_or_else(|| Failure::Usage("hybrid needs --z0 (or z0 in the spec)".into()))?)
    } else {
        p.z0
    };
    match z0 {
        None => {
            let plan = build_dyadic_plan(&mu_n, &grid)?;
            let weights = compute_weights_indexed(&plan.network, &p.flux)?;
            let cost = network_cost_indexed(&plan.network, &weights, a.alpha)?;
            let max_weight = weights.iter().map(|w| w.at_base).fold(0.0, f64::max);
            let report = json!({
                "alpha": a.alpha,
                "branches": plan.network.len(),
                "cost": cost,
                "max_weight": max_weight,
                "n": p.n,
            });
            plan_report(a, &plan.network, report)
        }
        Some(z0) => {
            let plan = build_hybrid_plan(&mu_n, &grid, &p.flux, z0)?;
            let weights = compute_weights_indexed(&plan.network, &p.flux)?;
            let cost = network_cost_indexed(&plan.network, &weights, a.alpha)?;
            let max_weight = weights.iter().map(|w| w.at_base).fold(0.0, f64::max);
            let cert = hybrid_certificate(&plan, &weights, &p.flux, p.edge, mu_n.total_mass())?;
            let report = json!({
                "alpha": a.alpha,
                "branches": plan.network.len(),
                "certificate": cert,
                "cost": cost,
                "kinds": plan.kinds,
                "max_weight": max_weight,
                "n": p.n,
                "n0": plan.n0,
                "z0": z0,
            });
            plan_report(a, &plan.network, report)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_sweep(
    measure: &Path,
    edge: f64,
    f: &str,
    alpha: f64,
    n_min: u32,
    n_max: u32,
    z0: Option<f64>,
    out: Option<&Path>,
    as_json: bool,
) -> Outcome<()> {
    if n_max < n_min {
        return Err(Error::Domain(format!("--n-max {n_max} is below --n-min {n_min}")).into());
    }
    let mu = measure_from_json(&read(measure)?)?;
    let cfg = SweepConfig {
        edge,
        alpha,
        flux: parse_flux(f)?,
        z0,
    };
    let levels: Vec<u32> = (n_min..=n_max).collect();
    let result = sweep(&mu, &cfg, &levels)?;
    for v in &result.violations {
        eprintln!("bound exceeded: {v}");
    }
    let text = if as_json {
        to_sorted_json(&result)? + "\n"
    } else {
        result.to_csv()
    };
    match out {
        Some(p) => write(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn bounds(
    d: usize,
    alpha: f64,
    beta: f64,
    c: f64,
    edge: f64,
    mass: f64,
    delta: Option<f64>,
    z0: Option<f64>,
    cost: Option<f64>,
    r: Option<f64>,
) -> Outcome<()> {
    let regime = Regime::new(d, alpha, beta, c, edge, mass)?;
    let mut report = json!({
        "classification": classify(d, alpha, beta),
        "regime": regime,
        "weight_bound_unit_cube": lemma31_weight_bound(&regime)?,
        "weight_bound": lemma32_weight_bound(&regime)?,
    });
    if let Ok(b) = dyadic_cost_bound(&regime) {
        report["cost_bound"] = json!(b);
    }
    if let Some(delta) = delta {
        report["lower_bound"] = json!(nonirrigability_lower_bound(&regime, delta)?);
    }
    if let Some(z0) = z0 {
        let grid = DyadicGrid::new(d, edge, 1)?;
        let flux = FluxFunction::power_law(c, beta)?;
        report["n0"] = json!(hybrid_min_level(&grid, &flux, z0)?);
    }
    match (cost, r) {
        (Some(e), Some(r)) => report["tail_bound"] = json!(tail_bound(e, alpha, r)?),
        (None, None) => {}
        _ => return Err(Failure::Usage("--cost and --r go together".into())),
    }
    emit(&report)
}

fn run(cli: Cli) -> Outcome<()> {
    match cli.command {
        Command::Solve { network, f, alpha } => solve(&network, &f, alpha),
        Command::Split { plan, eps, out } => split(&plan, eps, out.as_deref()),
        Command::Dyadic(a) => dyadic(&a, false),
        Command::Hybrid(a) => dyadic(&a, true),
        Command::Sweep {
            measure,
            edge,
            f,
            alpha,
            n_min,
            n_max,
            z0,
            out,
            json,
        } => run_sweep(
            &measure,
            edge,
            &f,
            alpha,
            n_min,
            n_max,
            z0,
            out.as_deref(),
            json,
        ),
        Command::Classify { d, alpha, beta } => {
            if d == 0 {
                return Err(Error::Domain("d must be >= 1".into()).into());
            }
            println!("{}", classify(d, alpha, beta));
            Ok(())
        }
        Command::Bounds {
            d,
            alpha,
            beta,
            c,
            edge,
            mass,
            delta,
            z0,
            cost,
            r,
        } => bounds(d, alpha, beta, c, edge, mass, delta, z0, cost, r),
    }
}

fn configure_threads() {
    let Ok(v) = std::env::var("IRRIGATE_THREADS") else {
        return;
    };
    match v.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
        _ => eprintln!("ignoring IRRIGATE_THREADS={v}: expected a positive integer"),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    configure_threads();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Io(path, e)) => {
            eprintln!("error: {}: {e}", path.display());
            ExitCode::from(EXIT_IO)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            match e.root_cause() {
                Error::Regime(_) => ExitCode::from(EXIT_REGIME),
                _ => ExitCode::from(EXIT_INVALID),
            }
        }
    }
}
