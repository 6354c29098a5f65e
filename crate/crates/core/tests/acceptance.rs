//! Acceptance criteria 1-14, one line each. Runs without the libtest harness so the lines are
//! always printed; exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use heistheta::finite_heisenberg::{
    enumerate_maximal_isotropic_2torsion, HeisenbergGroup, PolarizationType, Subgroup, SymplecticBasis,
};
use heistheta::invariants::{classify_weight_n, derivative_module_check, invariant_forms, pullback_octics};
use heistheta::numerics::checks::{
    degree4_points_check, equivariance, fiber_check, nested_14_check, torsion_scan, verify_diagram,
};
use heistheta::numerics::{build_isogeny, PeriodMatrixConfig, SectionEvaluator};
use heistheta::report::CheckReport;
use heistheta::schrodinger::{
    eigenspace_dims, eigenspace_squaring_check, identify_in_sign_group, represent, represent_iota,
    squared_action_table, standard_basis,
};
use heistheta::suite::{self, SQUARED_ACTION};

const SEED: u64 = 7;

fn delta(s: &str) -> PolarizationType {
    PolarizationType::parse(s).unwrap()
}

type Outcome = Result<String, String>;

fn check(cond: bool, ok: String, bad: String) -> Outcome {
    if cond {
        Ok(ok)
    } else {
        Err(bad)
    }
}

fn report_outcome(r: &CheckReport, keys: &[&str]) -> Outcome {
    let shown: Vec<String> = keys.iter().map(|k| format!("{k}={}", r.details[*k])).collect();
    let msg = format!("{}; max residual {:.2e}", shown.join(", "), r.max_residual);
    check(r.passed(), msg, format!("{}: {}", r.summary(), r.details))
}

fn c1() -> Outcome {
    let g = HeisenbergGroup::new(delta("2,4"));
    let b = SymplecticBasis::new(g.delta());
    let e = |u: &str, v: &str| g.weil_pairing(&b.point(u).unwrap(), &b.point(v).unwrap()).to_string();
    let s = [e("sigma1", "sigma2"), e("tau1", "tau2"), e("sigma1", "tau1"), e("sigma1", "tau2"), e("sigma2", "tau1"), e("sigma2", "tau2")];
    check(s == ["-1", "-i", "1", "1", "1", "1"], format!("e(s1,s2)={}, e(t1,t2)={}, mixed all 1", s[0], s[1]), format!("{s:?}"))
}

fn c2() -> Outcome {
    let d = delta("2,4");
    let b = SymplecticBasis::new(&d);
    let g = Subgroup::generated_by(
        vec![b.point("sigma1").unwrap(), b.point("tau1").unwrap().scale(2, &d), b.point("tau2").unwrap().scale(2, &d)],
        &d,
    );
    let all = enumerate_maximal_isotropic_2torsion(&d);
    check(
        all.iter().any(|s| s.elements == g.elements),
        format!("G (order {}) is one of {} maximal isotropic subgroups", g.order(), all.len()),
        "G not enumerated".into(),
    )
}

fn c3() -> Outcome {
    let (g, basis) = standard_basis(&delta("2,4")).map_err(|e| e.to_string())?;
    let t = squared_action_table(&g, &basis).map_err(|e| e.to_string())?;
    let gens = ["sigma2'", "tau1'", "tau2'"];
    let mut bad = Vec::new();
    for (j, row) in SQUARED_ACTION.iter().enumerate() {
        for (c, &(to, sign)) in row.iter().enumerate() {
            let e = t.iter().find(|e| e.generator == gens[c] && e.from == j).ok_or("missing entry")?;
            if (e.to, e.sign) != (to, sign) {
                bad.push(format!("{} t{j}", gens[c]));
            }
        }
    }
    let minus = t.iter().filter(|e| e.sign < 0).count();
    check(bad.is_empty() && t.len() == 24 && minus == 4, format!("24 entries, {minus} minus signs, all equal"), format!("mismatch {bad:?}"))
}

fn c4() -> Outcome {
    let (g, basis) = standard_basis(&delta("2,4")).map_err(|e| e.to_string())?;
    let iota = represent_iota(g.delta());
    let flips = identify_in_sign_group(&iota, &basis).map_err(|e| e.to_string())?;
    let dims = eigenspace_dims(&iota).map_err(|e| e.to_string())?;
    let mut case1 = true;
    let mut n = 0;
    for p in g.delta().torsion_points(2).into_iter().filter(|p| !p.is_zero()) {
        let lift = g.symmetric_lift(&p).map_err(|e| e.to_string())?;
        case1 &= eigenspace_dims(&represent(&g, &lift)).map_err(|e| e.to_string())? == (4, 4);
        n += 1;
    }
    check(
        flips == [6, 7] && dims == (6, 2) && case1,
        format!("iota (+,+,+,+,+,+,-,-), dims {dims:?}; (4,4) for all {n} two-torsion translations"),
        format!("flips {flips:?} dims {dims:?} case1 {case1}"),
    )
}

fn c5() -> Outcome {
    let r = suite::sign_group();
    check(r.passed(), format!("iota = {}, seven nontrivial g' each flip four", r.details["iota"].as_str().unwrap_or("?")), r.details.to_string())
}

fn c6() -> Outcome {
    let q = invariant_forms(&delta("2,2,2"), 4);
    let p = pullback_octics(&delta("2,4")).map_err(|e| e.to_string())?;
    check(
        q.projective_dim() == Some(14) && p.pass && p.projective_dim == 14,
        format!(
            "quartics P^{} (vector dim {}), pullback octics P^{} (vector dim {})",
            q.projective_dim().unwrap(),
            q.dim(),
            p.projective_dim,
            p.pullback_rank
        ),
        format!("quartics {} pullback {:?}", q.dim(), p),
    )
}

fn c7() -> Outcome {
    let mut cases = 0;
    for ds in suite::ISOTYPIC_DELTAS {
        for n in 1..=4 {
            let r = classify_weight_n(&delta(ds), n).map_err(|e| e.to_string())?;
            if !(r.pass && r.total_dim == r.expected_total) {
                return Err(format!("delta {ds} n {n}: {r:?}"));
            }
            cases += 1;
        }
    }
    Ok(format!("{cases} (delta, n) cases match prod d_i/(n,d_i) with total-dimension cross-check"))
}

fn c8() -> Outcome {
    let r = derivative_module_check(SEED).map_err(|e| e.to_string())?;
    check(
        r.pass && r.span_dim == 8 && r.commutant_dim == Some(1),
        format!("span {}, commutant {}", r.span_dim, r.commutant_dim.unwrap_or(0)),
        format!("{r:?}"),
    )
}

fn c9() -> Outcome {
    let (g, basis) = standard_basis(&delta("2,4")).map_err(|e| e.to_string())?;
    let s2 = SymplecticBasis::new(g.delta()).point("sigma2").unwrap();
    let r = eigenspace_squaring_check(&g, &basis, &s2).map_err(|e| e.to_string())?;
    let support: Vec<Vec<usize>> = r
        .w_plus
        .iter()
        .map(|v| v.iter().enumerate().filter(|(_, x)| x.as_str() != "0").map(|(i, _)| i).collect())
        .collect();
    let exact = r.pass && support == vec![vec![0, 1], vec![2, 4], vec![3, 5], vec![6, 7]];
    let nested = nested_14_check(&PeriodMatrixConfig::random(delta("1,4"), SEED));
    let deck = nested.iter().find(|r| r.name == "nested_14.iota_and_deck").unwrap();
    let count = deck.details["squared_map_deck_count"].as_u64();
    let numeric = nested.iter().all(|r| r.passed()) && count == Some(8);
    let worst = nested.iter().map(|r| r.max_residual).fold(0.0, f64::max);
    check(
        exact && numeric,
        format!("W+ = (s0+s1, s2+s4, s3+s5, s6+s7); (1,4) deck count {}, residual {worst:.2e}", count.unwrap()),
        format!("exact {exact} nested {nested:?}"),
    )
}

struct Numeric {
    model: heistheta::numerics::IsogenyModel,
    eval: SectionEvaluator,
}

fn numeric() -> Numeric {
    let cfg = PeriodMatrixConfig::random(delta("1,2,4"), SEED);
    let model = build_isogeny(&cfg).unwrap();
    let eval = SectionEvaluator::new(&model).unwrap();
    Numeric { model, eval }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let n = numeric();
    let scan = torsion_scan(&n.model, &n.eval);
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("Weil-form table", Box::new(c1)),
        ("G among maximal isotropic subgroups", Box::new(c2)),
        ("squared action table", Box::new(c3)),
        ("iota eigenstructure and translation splits", Box::new(c4)),
        ("sign-group words", Box::new(c5)),
        ("invariant quartics / pullback octics", Box::new(c6)),
        ("weight-n isotypic dimensions", Box::new(c7)),
        ("derivative span of an invariant quartic", Box::new(c8)),
        ("eigenspace split and nested (1,4) deck group", Box::new(c9)),
        ("numeric equivariance", Box::new(|| report_outcome(&equivariance(&n.model, &n.eval, 20), &["samples", "per_generator"]))),
        ("diagram, squares rank, two-torsion span", Box::new(|| report_outcome(&verify_diagram(&n.model, &n.eval, 100), &["samples", "squares_rank", "squares_sigma_ratio", "two_torsion_span_rank"]))),
        ("two-torsion count and orbits", Box::new(|| report_outcome(&scan.report, &["count_minus", "two_torsion_points", "orbit_sizes"]))),
        ("fiber sampling and degree-2 curves", Box::new(|| report_outcome(&fiber_check(&n.model, &n.eval, 50), &["samples", "generic_exactly_one_match", "nearest_nonidentity_distance"]))),
        ("degree-4 fiber over P0", Box::new(|| report_outcome(&degree4_points_check(&n.model, &n.eval, &scan.minus_points), &["fiber_size", "p0_form_0_c_1", "c"]))),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        match f() {
            Ok(msg) => println!("criterion {:>2} PASS  {name}: {msg} [{:.2?}]", i + 1, t.elapsed()),
            Err(msg) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name}: {msg} [{:.2?}]", i + 1, t.elapsed());
            }
        }
    }
    println!("acceptance: {} of {} criteria pass in {:.2?}", criteria.len() - failures, criteria.len(), start.elapsed());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
