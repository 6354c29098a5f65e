use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use heistheta::finite_heisenberg::{
    enumerate_maximal_isotropic_2torsion, GroupPoint, HeisenbergGroup, PolarizationType, SymplecticBasis,
};
use heistheta::invariants::{classify_weight_n, derivative_module_check, invariant_forms, pullback_octics};
use heistheta::numerics::checks::{
    degree4_points_check, equivariance, fiber_check, torsion_scan, verify_diagram, well_definedness,
};
use heistheta::numerics::{build_isogeny, PeriodMatrixConfig, SectionEvaluator};
use heistheta::report::CheckReport;
use heistheta::schrodinger::{
    eigenspace_dims, eigenspace_squaring_check, format_sign_word, format_table, identify_in_sign_group,
    iota_eigenspace_formula, represent, represent_iota, squared_action_table, standard_basis,
};
use heistheta::suite;
use heistheta::Error;

#[derive(Parser)]
#[command(name = "heistheta", version, about = "Finite Heisenberg groups, Schrodinger bases and theta checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args, Clone)]
struct Opts {
    /// Polarization type, e.g. 2,4
    #[arg(long, global = true)]
    delta: Option<String>,
    /// Degree n (symmetric power or weight)
    #[arg(long, global = true)]
    degree: Option<usize>,
    /// Config JSON path, or "random"
    #[arg(long, global = true)]
    config: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// Write the JSON report here
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// First group point: a label (sigma1, tau2, x1, ...), "x1,..;l1,..", or a sum like "sigma1+2*tau1"
    #[arg(long, global = true)]
    a: Option<String>,
    /// Second group point, same syntax as --a
    #[arg(long, global = true)]
    b: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Heisenberg group operations
    Heis {
        #[command(subcommand)]
        op: HeisOp,
    },
    /// Schrodinger representation and the section basis
    Rep {
        #[command(subcommand)]
        op: RepOp,
    },
    /// Invariant forms and weight-n decompositions
    Inv {
        #[command(subcommand)]
        op: InvOp,
    },
    /// Numerical checks with theta functions
    Theta {
        #[command(subcommand)]
        op: ThetaOp,
    },
    /// Full suite
    Verify {
        #[command(subcommand)]
        op: VerifyOp,
    },
}

#[derive(Subcommand)]
enum HeisOp {
    /// Product of the lifts of --a and --b
    Mul,
    /// Weil pairing e(a, b)
    Pair,
    /// Maximal isotropic subgroups of the 2-torsion
    Isotropic,
}

#[derive(Subcommand)]
enum RepOp {
    /// The basis s_j in delta-function coordinates
    Basis,
    /// Action of the complement generators on t_j = s_j^2
    Table,
    /// Eigenspace dimensions of iota (and of --a if given)
    Eigen,
    /// iota and G' as sign flips
    Signs,
    /// Eigenspaces W_a^+- and the squaring maps (default a = sigma2)
    Wsplit,
}

#[derive(Subcommand)]
enum InvOp {
    /// Dimension of invariant forms of degree --degree
    Dim,
    /// Isotypic decomposition of Sym^n in weight n
    Classify,
    /// Derivative span of a random invariant quartic
    Deriv,
}

#[derive(Subcommand)]
enum ThetaOp {
    /// Build the isogeny model
    Build,
    /// Diagram check with equivariance and well-definedness
    Diagram,
    /// Two-torsion scan
    Torsion,
    /// Fiber sampling and the degree-2 curves
    Fibers,
    /// Degree-4 fiber over P_0
    Deg4,
    /// The (1,4) case
    Nested14,
}

#[derive(Subcommand)]
enum VerifyOp {
    /// Every check, exact first
    All,
}

struct Outcome {
    text: String,
    json: Value,
    pass: bool,
}

impl Outcome {
    fn info(text: String, json: Value) -> Self {
        Self { text, json, pass: true }
    }

    fn from_reports(reports: Vec<CheckReport>) -> Self {
        let text = reports.iter().map(|r| r.summary()).collect::<Vec<_>>().join("\n");
        let pass = reports.iter().all(|r| r.passed());
        Self { text, json: json!({ "pass": pass, "checks": reports }), pass }
    }
}

/// Failures that map to exit code 2.
struct UsageError(String);

impl From<Error> for UsageError {
    fn from(e: Error) -> Self {
        UsageError(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, UsageError>;

fn parse_delta(opts: &Opts, default: &str) -> CliResult<PolarizationType> {
    Ok(PolarizationType::parse(opts.delta.as_deref().unwrap_or(default))?)
}

fn parse_point(text: &str, delta: &PolarizationType) -> CliResult<GroupPoint> {
    let basis = SymplecticBasis::new(delta);
    let g = delta.genus();
    let mut acc = GroupPoint::zero(delta);
    for term in text.split('+').map(str::trim) {
        let (k, body) = match term.split_once('*') {
            Some((k, body)) => {
                (k.trim().parse::<u32>().map_err(|_| UsageError(format!("bad multiplier in {term:?}")))?, body.trim())
            }
            None => (1, term),
        };
        let p = if let Some(p) = basis.point(body) {
            p
        } else if let Some((x, l)) = body.split_once(';') {
            let nums = |s: &str| -> CliResult<Vec<u32>> {
                s.split(',')
                    .map(|v| v.trim().parse::<u32>().map_err(|_| UsageError(format!("bad coordinate in {body:?}"))))
                    .collect()
            };
            let (x, l) = (nums(x)?, nums(l)?);
            if x.len() != g || l.len() != g {
                return Err(UsageError(format!("{body:?} needs {g} coordinates on each side")));
            }
            let d = delta.divisors();
            GroupPoint::new(x.iter().zip(d).map(|(v, d)| v % d).collect(), l.iter().zip(d).map(|(v, d)| v % d).collect())
        } else {
            return Err(UsageError(format!(
                "unknown point {body:?}; labels for {delta}: {}",
                basis.labels().join(", ")
            )));
        };
        acc = acc.add(&p.scale(k, delta), delta);
    }
    Ok(acc)
}

fn require_point(opt: &Option<String>, flag: &str, delta: &PolarizationType) -> CliResult<GroupPoint> {
    let text = opt.as_deref().ok_or_else(|| UsageError(format!("--{flag} is required")))?;
    parse_point(text, delta)
}

fn load_config(opts: &Opts, default_delta: &str) -> CliResult<PeriodMatrixConfig> {
    let seed = opts.seed.unwrap_or(heistheta::numerics::config::DEFAULT_SEED);
    let mut cfg = match opts.config.as_deref() {
        None | Some("random") => PeriodMatrixConfig::random(parse_delta(opts, default_delta)?, seed),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| UsageError(format!("reading {path}: {e}")))?;
            let cfg = PeriodMatrixConfig::from_json(&text)?;
            if let Some(d) = &opts.delta {
                if PolarizationType::parse(d)? != cfg.delta {
                    return Err(UsageError(format!("--delta {d} disagrees with config delta {}", cfg.delta)));
                }
            }
            match (cfg.random, opts.seed) {
                (true, Some(s)) => PeriodMatrixConfig::random(cfg.delta.clone(), s).with_settings(&cfg),
                _ => cfg,
            }
        }
    };
    if let Some(s) = opts.seed {
        cfg.seed = s;
    }
    if let Some(n) = opts.samples {
        cfg.samples = n;
    }
    if let Some(e) = opts.epsilon {
        cfg.epsilon = e;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn heis(op: &HeisOp, opts: &Opts) -> CliResult<Outcome> {
    let delta = parse_delta(opts, "2,4")?;
    let group = HeisenbergGroup::new(delta.clone());
    Ok(match op {
        HeisOp::Mul => {
            let a = group.lift(require_point(&opts.a, "a", &delta)?);
            let b = group.lift(require_point(&opts.b, "b", &delta)?);
            let p = group.multiply(&a, &b)?;
            Outcome::info(
                format!("{a} * {b} = {p}"),
                json!({ "a": a.point, "b": b.point, "scalar": p.scalar.to_string(), "point": p.point }),
            )
        }
        HeisOp::Pair => {
            let a = require_point(&opts.a, "a", &delta)?;
            let b = require_point(&opts.b, "b", &delta)?;
            let e = group.weil_pairing(&a, &b);
            Outcome::info(format!("e({a}, {b}) = {e}"), json!({ "a": a, "b": b, "value": e.to_string() }))
        }
        HeisOp::Isotropic => {
            let subs = enumerate_maximal_isotropic_2torsion(&delta);
            let mut text = format!("{} maximal isotropic subgroups of K(L)_2 for delta = {delta}", subs.len());
            for s in &subs {
                let gens: Vec<String> = s.generators.iter().map(|g| g.to_string()).collect();
                text.push_str(&format!("\n  order {}: <{}>", s.order(), gens.join(", ")));
            }
            let rows: Vec<Value> =
                subs.iter().map(|s| json!({ "order": s.order(), "generators": s.generators })).collect();
            Outcome::info(text, json!({ "delta": delta, "count": subs.len(), "subgroups": rows }))
        }
    })
}

fn rep(op: &RepOp, opts: &Opts) -> CliResult<Outcome> {
    let delta = parse_delta(opts, "2,4")?;
    let (group, basis) = standard_basis(&delta)?;
    Ok(match op {
        RepOp::Basis => {
            let k1 = delta.k1_elements();
            let mut text = String::new();
            let mut rows = Vec::new();
            for (j, v) in basis.vectors.iter().enumerate() {
                let terms: Vec<String> = v
                    .iter()
                    .zip(&k1)
                    .filter(|(c, _)| !c.is_zero())
                    .map(|(c, y)| format!("({c})d[{}]", y.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")))
                    .collect();
                text.push_str(&format!("s{j} = {} = {}\n", basis.labels[j], terms.join(" + ")));
                rows.push(json!({
                    "index": j,
                    "label": basis.labels[j],
                    "coefficients": v.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                }));
            }
            Outcome::info(text.trim_end().to_string(), json!({ "delta": delta, "basis": rows }))
        }
        RepOp::Table => {
            let table = squared_action_table(&group, &basis)?;
            let text = format!("{}\n({} entries)", format_table(&table).trim_end(), table.len());
            Outcome::info(text, json!({ "delta": delta, "table": table }))
        }
        RepOp::Eigen => {
            let iota = represent_iota(&delta);
            let dims = eigenspace_dims(&iota)?;
            let formula = iota_eigenspace_formula(&delta);
            let mut text = format!("iota: +1 -> {}, -1 -> {}", dims.0, dims.1);
            if let Some(f) = formula {
                text.push_str(&format!(" (formula {}, {})", f.0, f.1));
            }
            let mut j = json!({ "delta": delta, "iota": dims, "formula": formula });
            if let Some(a) = &opts.a {
                let p = parse_point(a, &delta)?;
                let d = eigenspace_dims(&represent(&group, &group.symmetric_lift(&p)?))?;
                text.push_str(&format!("\n{p}: +1 -> {}, -1 -> {}", d.0, d.1));
                j["point"] = json!({ "point": p, "dims": d });
            }
            Outcome::info(text, j)
        }
        RepOp::Signs => {
            let iota = identify_in_sign_group(&represent_iota(&delta), &basis)?;
            let mut text = format!("iota = {}", format_sign_word(&iota));
            let mut rows = Vec::new();
            for h in group.level_subgroup(&basis.level.lifts)? {
                let flips = identify_in_sign_group(&represent(&group, &h), &basis)?;
                text.push_str(&format!("\n{h} = {}", format_sign_word(&flips)));
                rows.push(json!({ "element": h.to_string(), "flips": flips }));
            }
            Outcome::info(text, json!({ "delta": delta, "iota": iota, "level_subgroup": rows }))
        }
        RepOp::Wsplit => {
            let a = match &opts.a {
                Some(t) => parse_point(t, &delta)?,
                None => SymplecticBasis::new(&delta)
                    .point("sigma2")
                    .ok_or_else(|| UsageError(format!("give --a for delta = {delta}")))?,
            };
            let r = eigenspace_squaring_check(&group, &basis, &a)?;
            let show = |vs: &[Vec<String>]| -> String {
                vs.iter()
                    .map(|v| {
                        v.iter()
                            .enumerate()
                            .filter(|(_, c)| c.as_str() != "0")
                            .map(|(i, c)| if c == "1" { format!("s{i}") } else { format!("({c})s{i}") })
                            .collect::<Vec<_>>()
                            .join("+")
                    })
                    .collect::<Vec<_>>()
                    .join(", ")
            };
            let text = format!(
                "a = {a}\nW+ = <{}>\nW- = <{}>\nsquaring diagonal: {}, degree {}\ncommutators on W+/W-: {} / {}",
                show(&r.w_plus),
                show(&r.w_minus),
                r.squaring_is_diagonal,
                r.map_degree,
                r.commutator_on_w_plus,
                r.commutator_on_w_minus
            );
            Outcome { text, pass: r.pass, json: json!(r) }
        }
    })
}

fn inv(op: &InvOp, opts: &Opts) -> CliResult<Outcome> {
    Ok(match op {
        InvOp::Dim => {
            let delta = parse_delta(opts, "2,2,2")?;
            let n = opts.degree.unwrap_or(4);
            let space = invariant_forms(&delta, n);
            let proj = space.projective_dim();
            let first = proj.map_or("empty".to_string(), |p| p.to_string());
            let mut text = format!("{first}\nvector dimension: {} (projective dimension {first})", space.dim());
            let mut j = json!({ "delta": delta, "degree": n, "projective_dim": proj, "vector_dim": space.dim() });
            if delta.divisors() == [2, 4] && n == 8 {
                let p = pullback_octics(&delta)?;
                text = format!(
                    "{}\npullback octics: vector dimension {} (invariant octic monomial span {})",
                    p.projective_dim, p.pullback_rank, p.squared_monomial_invariants
                );
                j = json!({ "delta": delta, "degree": n, "projective_dim": p.projective_dim, "vector_dim": p.pullback_rank, "pullback": p });
            }
            Outcome::info(text, j)
        }
        InvOp::Classify => {
            let delta = parse_delta(opts, "2,2,2")?;
            let n = opts.degree.unwrap_or(2);
            let r = classify_weight_n(&delta, n)?;
            let mut text = format!(
                "delta = {delta}, n = {n}: irreducible dimension {} (formula), {} components, total {} / {}",
                r.formula_irrep_dim,
                r.components.len(),
                r.total_dim,
                r.expected_total
            );
            for c in &r.components {
                text.push_str(&format!(
                    "\n  chi {:?}: dim {}, multiplicity {:?}, irrep {:?}",
                    c.character, c.dimension, c.multiplicity, c.irrep_dim
                ));
            }
            Outcome { text, pass: r.pass, json: json!(r) }
        }
        InvOp::Deriv => {
            let r = derivative_module_check(opts.seed.unwrap_or(heistheta::numerics::config::DEFAULT_SEED))?;
            let text = format!(
                "derivative span {} (stable: {}), commutant {:?}, attempts {}",
                r.span_dim, r.stable, r.commutant_dim, r.attempts
            );
            Outcome { text, pass: r.pass, json: json!(r) }
        }
    })
}

fn theta(op: &ThetaOp, opts: &Opts) -> CliResult<Outcome> {
    if let ThetaOp::Nested14 = op {
        let cfg = load_config(opts, "1,4")?;
        let run = suite::nested_checks(&cfg);
        let mut out = Outcome::from_reports(run.checks);
        out.json["seeds"] = json!(run.seeds);
        return Ok(out);
    }
    let cfg = load_config(opts, "1,2,4")?;
    let model = build_isogeny(&cfg)?;
    let eval = SectionEvaluator::new(&model)?;
    Ok(match op {
        ThetaOp::Build => {
            let text = format!(
                "delta = {}, p = {:?}, q = {:?}, index {}, restricted type {:?}\nG = {}",
                cfg.delta,
                model.p,
                model.q,
                model.index,
                model.restricted_type,
                model.g_points.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(", ")
            );
            let j = json!({
                "config": cfg.to_json(),
                "p": model.p,
                "q": model.q,
                "index": model.index,
                "restricted_type": model.restricted_type,
                "g_points": model.g_points,
            });
            Outcome::info(text, j)
        }
        ThetaOp::Diagram => Outcome::from_reports(vec![
            well_definedness(&model, &eval, 20),
            equivariance(&model, &eval, 20),
            verify_diagram(&model, &eval, cfg.samples),
        ]),
        ThetaOp::Torsion => Outcome::from_reports(vec![torsion_scan(&model, &eval).report]),
        ThetaOp::Fibers => Outcome::from_reports(vec![fiber_check(&model, &eval, 50)]),
        ThetaOp::Deg4 => {
            let scan = torsion_scan(&model, &eval);
            Outcome::from_reports(vec![degree4_points_check(&model, &eval, &scan.minus_points)])
        }
        ThetaOp::Nested14 => unreachable!(),
    })
}

fn verify(opts: &Opts) -> CliResult<Outcome> {
    let cfg = load_config(opts, "1,2,4")?;
    if cfg.delta.divisors() != [1, 2, 4] {
        return Err(UsageError(format!("verify all needs delta = 1,2,4, got {}", cfg.delta)));
    }
    let report = suite::verify_all(&cfg, None)?;
    let mut text: Vec<String> = report.checks.iter().map(|r| r.summary()).collect();
    text.push(format!(
        "{} ({} of {} checks passed)",
        if report.pass { "ALL PASS" } else { "FAILURES" },
        report.checks.iter().filter(|c| c.passed()).count(),
        report.checks.len()
    ));
    Ok(Outcome { text: text.join("\n"), pass: report.pass, json: json!(report) })
}

fn run(cli: &Cli) -> CliResult<Outcome> {
    match &cli.command {
        Command::Heis { op } => heis(op, &cli.opts),
        Command::Rep { op } => rep(op, &cli.opts),
        Command::Inv { op } => inv(op, &cli.opts),
        Command::Theta { op } => theta(op, &cli.opts),
        Command::Verify { op: VerifyOp::All } => verify(&cli.opts),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            println!("{}", outcome.text);
            if let Some(path) = &cli.opts.out {
                let body = serde_json::to_string_pretty(&outcome.json).expect("report serializes") + "\n";
                if let Err(e) = std::fs::write(path, body) {
                    eprintln!("error: writing {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            if outcome.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
