use std::fmt::Write;

use clap::{ArgGroup, Args, ValueEnum};
use hardy_lab::applications::{
    parameter_sweep, sweep_csv, Domain, InequalityKind, InequalityParams, TestFunction,
};
use hardy_lab::covering::{
    build_covering, covering_json, level_csv, tail_integrability, verify_counting_bounds, verify_geometry,
    weights_from_beta, CoveringError, CubeCovering, HolderProfile, ProfileKind, WeightSpec,
};
use hardy_lab::decomp::{decompose, verify_decomposition, CellFunction, DecompositionReport, TreePartition};
use hardy_lab::hardy::{analyze, optimize_theta, AnalyzeOptions, HardyError, ProblemJson};
use hardy_lab::random::{log_uniform, random_recursive_tree};
use hardy_lab::{HardyProblem, RootedTree};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::{csv_report, json_report, Cli, Command, Failure, Format, Outcome, Status};

const DEFAULT_CUBE_CAP: usize = 1_000_000;

#[derive(Debug, Args, Serialize)]
#[command(group(ArgGroup::new("shape").args(["chain", "star", "random"])))]
pub struct TreeArgs {
    /// Chain with this many non-root vertices.
    #[arg(long)]
    pub chain: Option<usize>,
    /// Star with this many leaves.
    #[arg(long)]
    pub star: Option<usize>,
    /// Random recursive tree with this many vertices (root included).
    #[arg(long)]
    pub random: Option<usize>,
    /// Log-uniform weights in [1e-2, 1e2] instead of unit weights.
    #[arg(long)]
    pub random_weights: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct CoveringArgs {
    #[arg(long, default_value = "demo")]
    pub phi: String,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub ell: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KindArg {
    Poincare,
    Fractional,
    Korn,
}

impl KindArg {
    fn kind(self) -> InequalityKind {
        match self {
            KindArg::Poincare => InequalityKind::ImprovedPoincare,
            KindArg::Fractional => InequalityKind::FractionalPoincare,
            KindArg::Korn => InequalityKind::Korn,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainArg {
    Unit,
    Covered,
}

#[derive(Debug, Args, Serialize)]
pub struct IneqArgs {
    #[arg(long, value_enum, default_value_t = KindArg::Poincare)]
    pub kind: KindArg,
    /// Catalog function name; `--input` takes a function JSON instead.
    #[arg(long)]
    pub function: Option<String>,
    #[arg(long, value_enum, default_value_t = DomainArg::Covered)]
    pub domain: DomainArg,
    #[command(flatten)]
    pub covering: CoveringArgs,
    #[arg(long, default_value_t = 0.5)]
    pub s: f64,
    #[arg(long, default_value_t = 0.5)]
    pub tau: f64,
    /// Override the right-hand exponent shift.
    #[arg(long, allow_hyphen_values = true)]
    pub shift: Option<f64>,
    /// Comma-separated β values for a sweep.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub sweep: Vec<f64>,
}

pub fn run(cli: &Cli) -> Result<Outcome, Failure> {
    match &cli.command {
        Command::Tree(a) => tree(cli, a),
        Command::Hardy => hardy(cli),
        Command::Covering(a) => covering(cli, a),
        Command::Decompose(a) => decomposition(cli, a),
        Command::Ineq(a) => ineq(cli, a),
    }
}

fn read_json(cli: &Cli) -> Result<Option<Value>, Failure> {
    let Some(path) = &cli.common.input else {
        return Ok(None);
    };
    let text = std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    // accept our own report envelopes as input
    Ok(Some(match value {
        Value::Object(mut m) if m.contains_key("result") && m.contains_key("tool") => m.remove("result").unwrap(),
        v => v,
    }))
}

fn parse<T: for<'de> Deserialize<'de>>(value: Value) -> Result<T, Failure> {
    serde_json::from_value(value).map_err(Failure::input)
}

fn ok(body: String) -> Outcome {
    Outcome {
        body,
        status: Status::Ok,
        problems: Vec::new(),
    }
}

fn checked(body: String, problems: Vec<String>) -> Outcome {
    let status = if problems.is_empty() { Status::Ok } else { Status::Violation };
    Outcome { body, status, problems }
}

fn hardy_failure(e: HardyError) -> Failure {
    match e {
        HardyError::TooLarge { .. } => Failure::cap(e),
        e => Failure::input(e),
    }
}

fn tree(cli: &Cli, a: &TreeArgs) -> Result<Outcome, Failure> {
    let p = cli.common.p;
    let mut rng = ChaCha8Rng::seed_from_u64(cli.common.seed);
    let tree = match (a.chain, a.star, a.random) {
        (Some(n), _, _) => RootedTree::chain(n),
        (_, Some(n), _) => RootedTree::star(n),
        (_, _, Some(n)) if n >= 2 => random_recursive_tree(n, &mut rng),
        (_, _, Some(n)) => return Err(Failure::input(format!("--random {n}: need at least 2 vertices"))),
        _ => match read_json(cli)? {
            Some(v) => {
                let pj: ProblemJson = parse(v)?;
                return Ok(ok(json_report(cli, ProblemJson::from_problem(&pj.to_problem().map_err(hardy_failure)?))));
            }
            None => return Err(Failure::input("give --chain, --star, --random or --input")),
        },
    };
    let m = tree.star_count();
    let (u, v) = if a.random_weights {
        (log_uniform(1e-2, 1e2, m, &mut rng), log_uniform(1e-2, 1e2, m, &mut rng))
    } else {
        (vec![1.0; m], vec![1.0; m])
    };
    let pr = HardyProblem::new(tree, u, v, p).map_err(hardy_failure)?;
    Ok(ok(json_report(cli, ProblemJson::from_problem(&pr))))
}

fn hardy(cli: &Cli) -> Result<Outcome, Failure> {
    let value = read_json(cli)?.ok_or_else(|| Failure::input("hardy needs --input <problem.json>"))?;
    let pr = parse::<ProblemJson>(value)?.to_problem().map_err(hardy_failure)?;
    let defaults = AnalyzeOptions::default();
    let opts = AnalyzeOptions {
        theta_max: cli.common.theta_max,
        antichain_cap: cli.common.cap.unwrap_or(defaults.antichain_cap),
        ..defaults
    };
    let rep = analyze(&pr, &opts).map_err(hardy_failure)?;
    let problems: Vec<String> = rep
        .invariants
        .iter()
        .filter(|c| !c.ok)
        .map(|c| format!("{}: {}", c.name, c.detail))
        .collect();
    let body = match cli.common.format {
        Format::Json => json_report(cli, &rep),
        Format::Csv => {
            let mut s = String::from("depth,a_chain,a_tree\n");
            for (d, (c, t)) in rep.a_chain_profile.iter().zip(&rep.a_tree_profile).enumerate() {
                writeln!(s, "{},{c:e},{t:e}", d + 1).expect("writing to a string");
            }
            csv_report(cli, &s)
        }
    };
    let mut out = checked(body, problems);
    if out.status == Status::Ok && rep.b_ehp.is_none() {
        out.status = Status::Cap;
        out.problems.push(format!(
            "antichain cap {} reached; B is only a lower bound",
            opts.antichain_cap
        ));
    }
    Ok(out)
}

fn build(cli: &Cli, a: &CoveringArgs) -> Result<CubeCovering, Failure> {
    let kind = ProfileKind::from_name(&a.phi).ok_or_else(|| Failure::input(format!("unknown --phi {}", a.phi)))?;
    let profile = HolderProfile::new(kind, cli.common.alpha, a.ell, a.n).map_err(Failure::input)?;
    build_covering(&profile, cli.common.depth, cli.common.cap.unwrap_or(DEFAULT_CUBE_CAP)).map_err(|e| match e {
        CoveringError::CubeCap(_) => Failure::cap(e),
        e => Failure::input(e),
    })
}

#[derive(Serialize)]
struct CoveringResult<T: Serialize> {
    covering: T,
    geometry: hardy_lab::covering::GeometryReport,
    counting: hardy_lab::covering::CountingReport,
    tail: hardy_lab::covering::TailProfile,
}

fn covering(cli: &Cli, a: &CoveringArgs) -> Result<Outcome, Failure> {
    let cov = build(cli, a)?;
    let geometry = verify_geometry(&cov);
    let tail = tail_integrability(&cov, cli.common.beta, cli.common.p);
    let problems = if geometry.ok() {
        Vec::new()
    } else {
        vec![format!("covering geometry: {geometry:?}")]
    };
    let body = match cli.common.format {
        Format::Json => json_report(
            cli,
            CoveringResult {
                covering: covering_json(&cov),
                counting: verify_counting_bounds(&cov),
                geometry,
                tail,
            },
        ),
        Format::Csv => csv_report(cli, &level_csv(&cov, Some(&tail))),
    };
    Ok(checked(body, problems))
}

#[derive(Deserialize)]
struct ValuesJson {
    values: Vec<f64>,
}

#[derive(Serialize)]
struct DecomposeResult {
    spec: WeightSpec,
    hardy_bound: f64,
    fragments: usize,
    runs: Vec<DecompositionReport>,
}

fn decomposition(cli: &Cli, a: &CoveringArgs) -> Result<Outcome, Failure> {
    let c = &cli.common;
    let cov = build(cli, a)?;
    let spec = WeightSpec {
        beta: c.beta,
        gamma: c.beta + c.alpha - 1.0,
        p: c.p,
    };
    let part = TreePartition::from_covering(&cov, spec);
    let pr = weights_from_beta(&cov, spec).map_err(hardy_failure)?.problem;
    let bound = optimize_theta(&pr, c.theta_max).map_err(hardy_failure)?.suff_bound;
    let inputs = match read_json(cli)? {
        Some(v) => vec![CellFunction::new(&part, parse::<ValuesJson>(v)?.values).map_err(Failure::input)?],
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
            (0..c.samples.unwrap_or(5))
                .map(|_| CellFunction::random_mean_zero(&part, &mut rng))
                .collect()
        }
    };
    let mut runs = Vec::with_capacity(inputs.len());
    let mut problems = Vec::new();
    for (k, g) in inputs.iter().enumerate() {
        let res = decompose(&part, g, &pr).map_err(Failure::input)?;
        let rep = verify_decomposition(&part, g, &res, &pr, bound).map_err(Failure::input)?;
        if !rep.ok() {
            problems.push(format!("run {k}: offending vertex {:?}, {rep:?}", rep.offending));
        }
        runs.push(rep);
    }
    let body = match c.format {
        Format::Json => json_report(
            cli,
            DecomposeResult {
                spec,
                hardy_bound: bound,
                fragments: part.len(),
                runs,
            },
        ),
        Format::Csv => {
            let mut s = String::from("run,ratio,c_pred,max_sum_error,max_mean_error,ok\n");
            for (k, r) in runs.iter().enumerate() {
                writeln!(
                    s,
                    "{k},{:e},{:e},{:e},{:e},{}",
                    r.ratio,
                    r.c_pred,
                    r.max_sum_error,
                    r.max_mean_error,
                    r.ok()
                )
                .expect("writing to a string");
            }
            csv_report(cli, &s)
        }
    };
    Ok(checked(body, problems))
}

fn catalog(name: &str, n: usize) -> Option<TestFunction> {
    let e0 = |v: f64| {
        let mut c = vec![0.0; n];
        c[0] = v;
        c
    };
    Some(match name {
        "constant" => TestFunction::Constant { c: 1.0 },
        "linear" => TestFunction::Linear {
            coeffs: e0(1.0),
            offset: -0.5,
        },
        "monomial" => TestFunction::Monomial {
            axis: 0,
            power: 2,
            scale: 1.0,
        },
        "vertical_power" => TestFunction::VerticalPower { top: 3.0, gamma: 0.5 },
        "sine" => TestFunction::Sine {
            axis: 0,
            freq: std::f64::consts::PI,
        },
        "rotation" => TestFunction::Rotation,
        "quadratic_field" => TestFunction::QuadraticField,
        _ => return None,
    })
}

fn ineq(cli: &Cli, a: &IneqArgs) -> Result<Outcome, Failure> {
    let c = &cli.common;
    let domain = match a.domain {
        DomainArg::Unit => Domain::UnitCube { n: a.covering.n },
        DomainArg::Covered => Domain::covered(build(cli, &a.covering)?),
    };
    let kind = a.kind.kind();
    let f = match (read_json(cli)?, &a.function) {
        (Some(v), _) => parse::<TestFunction>(v)?,
        (None, Some(name)) => {
            catalog(name, domain.dim()).ok_or_else(|| Failure::input(format!("unknown --function {name}")))?
        }
        (None, None) if kind == InequalityKind::Korn => TestFunction::QuadraticField,
        (None, None) => catalog("linear", domain.dim()).expect("in catalog"),
    };
    let mut prm = InequalityParams::new(kind, c.beta, c.p, c.samples.unwrap_or(100_000), c.seed);
    prm.shift = a.shift;
    prm.s = a.s;
    prm.tau = a.tau;
    let betas = if a.sweep.is_empty() { vec![c.beta] } else { a.sweep.clone() };
    let table = parameter_sweep(&domain, &f, &prm, &betas).map_err(Failure::input)?;
    let problems: Vec<String> = table
        .rows
        .iter()
        .filter(|r| r.violating_candidate)
        .map(|r| format!("inequality-violating candidate at beta = {}: lhs {} rhs 0", r.beta, r.lhs))
        .collect();
    let body = match c.format {
        Format::Json if a.sweep.is_empty() => json_report(cli, &table.rows[0]),
        Format::Json => json_report(cli, &table),
        Format::Csv => csv_report(cli, &sweep_csv(&table)),
    };
    Ok(checked(body, problems))
}
