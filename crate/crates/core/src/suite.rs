//! The full verification run: exact checks first, then the numeric ones.

use serde::Serialize;
use serde_json::json;

use crate::finite_heisenberg::{
    enumerate_maximal_isotropic_2torsion, GroupPoint, HeisenbergGroup, PolarizationType, Subgroup, SymplecticBasis,
};
use crate::invariants::{classify_weight_n, derivative_module_check, invariant_forms, pullback_octics};
use crate::numerics::checks::{nested_14_check, run_numeric_suite};
use crate::numerics::{build_isogeny, PeriodMatrixConfig, SectionEvaluator};
use crate::report::CheckReport;
use crate::schrodinger::{
    eigenspace_dims, eigenspace_squaring_check, format_sign_word, identify_in_sign_group, iota_eigenspace_formula,
    represent, represent_iota, squared_action_table, standard_basis, TableEntry,
};
use crate::Result;

/// Deltas on which the weight-n decomposition is checked.
pub const ISOTYPIC_DELTAS: [&str; 5] = ["2", "4", "2,2", "2,4", "2,2,2"];

/// Random period matrices tried before a rank-deficient one is reported as a failure.
pub const MAX_RESAMPLES: u64 = 5;

/// Action of sigma2', tau1', tau2' on t_j = s_j^2 for delta = (2,4): `(to, sign)` per row.
pub const SQUARED_ACTION: [[(usize, i32); 3]; 8] = [
    [(1, 1), (2, 1), (3, 1)],
    [(0, 1), (4, 1), (5, 1)],
    [(4, 1), (0, 1), (6, -1)],
    [(5, 1), (6, 1), (0, 1)],
    [(2, 1), (1, 1), (7, -1)],
    [(3, 1), (7, 1), (1, 1)],
    [(7, 1), (3, 1), (2, -1)],
    [(6, 1), (5, 1), (4, -1)],
];

fn delta(s: &str) -> PolarizationType {
    PolarizationType::parse(s).expect("built-in delta")
}

fn guard(name: &str, f: impl FnOnce() -> Result<CheckReport>) -> CheckReport {
    f().unwrap_or_else(|e| CheckReport::failed(name, e))
}

pub fn weil_table() -> CheckReport {
    let name = "weil_table";
    let g = HeisenbergGroup::new(delta("2,4"));
    let b = SymplecticBasis::new(g.delta());
    let p = |l: &str| b.point(l).expect("label");
    let e = |u: &str, v: &str| g.weil_pairing(&p(u), &p(v)).to_string();
    let mut entries = serde_json::Map::new();
    let mut pass = true;
    for (u, v, want) in [
        ("sigma1", "sigma2", "-1"),
        ("tau1", "tau2", "-i"),
        ("sigma1", "tau1", "1"),
        ("sigma1", "tau2", "1"),
        ("sigma2", "tau1", "1"),
        ("sigma2", "tau2", "1"),
    ] {
        let got = e(u, v);
        pass &= got == want;
        entries.insert(format!("e({u},{v})"), json!(got));
    }
    CheckReport::exact(name, pass, json!(entries))
}

/// G = <sigma1, 2 tau1, 2 tau2> is among the maximal isotropic subgroups of K(L)_2.
pub fn level_subgroup_enumerated() -> CheckReport {
    let d = delta("2,4");
    let b = SymplecticBasis::new(&d);
    let gens = vec![
        b.point("sigma1").expect("label"),
        b.point("tau1").expect("label").scale(2, &d),
        b.point("tau2").expect("label").scale(2, &d),
    ];
    let g = Subgroup::generated_by(gens, &d);
    let all = enumerate_maximal_isotropic_2torsion(&d);
    let found = all.iter().any(|s| s.elements == g.elements);
    CheckReport::exact(
        "level_subgroup_enumerated",
        found && g.order() == 8,
        json!({ "order": g.order(), "maximal_isotropic_subgroups": all.len(), "found": found }),
    )
}

pub fn squared_action() -> CheckReport {
    guard("squared_action_table", || {
        let (g, basis) = standard_basis(&delta("2,4"))?;
        let table = squared_action_table(&g, &basis)?;
        let gens = ["sigma2'", "tau1'", "tau2'"];
        let expected: Vec<TableEntry> = (0..8)
            .flat_map(|j| {
                gens.iter().enumerate().map(move |(c, name)| TableEntry {
                    generator: name.to_string(),
                    from: j,
                    sign: SQUARED_ACTION[j][c].1,
                    to: SQUARED_ACTION[j][c].0,
                })
            })
            .collect();
        let mismatches: Vec<&TableEntry> = expected.iter().filter(|e| !table.contains(e)).collect();
        let minus = table.iter().filter(|e| e.sign < 0).count();
        Ok(CheckReport::exact(
            "squared_action_table",
            mismatches.is_empty() && table.len() == 24 && minus == 4,
            json!({ "entries": table.len(), "minus_signs": minus, "mismatches": mismatches }),
        ))
    })
}

/// iota eigenvalues on s_0..s_7, the (6,2) split and its closed form, and (4,4) for every
/// nonzero two-torsion translation.
pub fn iota_eigenstructure() -> CheckReport {
    guard("iota_eigenstructure", || {
        let (g, basis) = standard_basis(&delta("2,4"))?;
        let iota = represent_iota(g.delta());
        let flips = identify_in_sign_group(&iota, &basis)?;
        let pattern: String = (0..basis.len()).map(|j| if flips.contains(&j) { '-' } else { '+' }).collect();
        let dims = eigenspace_dims(&iota)?;
        let formula = iota_eigenspace_formula(g.delta());
        let mut translations = Vec::new();
        for p in g.delta().torsion_points(2).into_iter().filter(|p| !p.is_zero()) {
            let d = eigenspace_dims(&represent(&g, &g.symmetric_lift(&p)?))?;
            translations.push((p, d));
        }
        let case1 = translations.iter().all(|(_, d)| *d == (4, 4));
        Ok(CheckReport::exact(
            "iota_eigenstructure",
            pattern == "++++++--" && dims == (6, 2) && formula == Some((6, 2)) && case1,
            json!({
                "pattern": pattern,
                "dims": dims,
                "formula": formula,
                "translations_checked": translations.len(),
                "translations_all_4_4": case1,
            }),
        ))
    })
}

/// iota = a6.a7 and every nontrivial element of G' flips exactly four coordinates.
pub fn sign_group() -> CheckReport {
    guard("sign_group", || {
        let (g, basis) = standard_basis(&delta("2,4"))?;
        let iota = identify_in_sign_group(&represent_iota(g.delta()), &basis)?;
        let mut words = Vec::new();
        let mut four = true;
        for h in g.level_subgroup(&basis.level.lifts)? {
            if h.point.is_zero() {
                continue;
            }
            let flips = identify_in_sign_group(&represent(&g, &h), &basis)?;
            four &= flips.len() == 4;
            words.push(json!({ "element": h.to_string(), "word": format_sign_word(&flips) }));
        }
        Ok(CheckReport::exact(
            "sign_group",
            iota == [6, 7] && four && words.len() == 7,
            json!({ "iota": format_sign_word(&iota), "g_prime": words }),
        ))
    })
}

pub fn invariant_dimensions() -> CheckReport {
    guard("invariant_dimensions", || {
        let quartics = invariant_forms(&delta("2,2,2"), 4);
        let pull = pullback_octics(&delta("2,4"))?;
        let pass = quartics.dim() == 15 && quartics.projective_dim() == Some(14) && pull.pass && pull.projective_dim == 14;
        Ok(CheckReport::exact(
            "invariant_dimensions",
            pass,
            json!({
                "quartics_vector_dim": quartics.dim(),
                "quartics_projective_dim": quartics.projective_dim(),
                "pullback": pull,
            }),
        ))
    })
}

pub fn isotypic_decomposition() -> CheckReport {
    guard("isotypic_decomposition", || {
        let mut rows = Vec::new();
        let mut pass = true;
        for ds in ISOTYPIC_DELTAS {
            for n in 1..=4 {
                let r = classify_weight_n(&delta(ds), n)?;
                pass &= r.pass;
                rows.push(json!({
                    "delta": ds,
                    "n": n,
                    "irrep_dim": r.formula_irrep_dim,
                    "components": r.components.len(),
                    "total_dim": r.total_dim,
                    "expected_total": r.expected_total,
                    "pass": r.pass,
                }));
            }
        }
        Ok(CheckReport::exact("isotypic_decomposition", pass, json!(rows)))
    })
}

pub fn derivative_module(seed: u64) -> CheckReport {
    guard("derivative_module", || {
        let r = derivative_module_check(seed)?;
        Ok(CheckReport::exact("derivative_module", r.pass, json!(r)))
    })
}

/// W_a^± for every a in sigma2 + G, with the sigma2 bases (s0±s1, s2±s4, s3±s5, s6±s7).
pub fn eigenspace_split() -> CheckReport {
    guard("eigenspace_split", || {
        let (g, basis) = standard_basis(&delta("2,4"))?;
        let d = g.delta().clone();
        let sigma2 = SymplecticBasis::new(&d).point("sigma2").expect("label");
        let mut pass = true;
        let mut rows = Vec::new();
        let mut sigma2_report = None;
        for h in &basis.level.subgroup.elements {
            let a: GroupPoint = sigma2.add(h, &d);
            let r = eigenspace_squaring_check(&g, &basis, &a)?;
            pass &= r.pass && r.map_degree == 8;
            rows.push(json!({ "a": a.to_string(), "pass": r.pass, "map_degree": r.map_degree }));
            if h.is_zero() {
                sigma2_report = Some(r);
            }
        }
        let r = sigma2_report.expect("G contains 0");
        let support = |side: &[Vec<String>]| -> Vec<Vec<usize>> {
            side.iter().map(|v| v.iter().enumerate().filter(|(_, x)| x.as_str() != "0").map(|(i, _)| i).collect()).collect()
        };
        let want = vec![vec![0, 1], vec![2, 4], vec![3, 5], vec![6, 7]];
        let plus_ok = support(&r.w_plus) == want && r.w_plus.iter().all(|v| v.iter().all(|x| x == "0" || x == "1"));
        let minus_ok = support(&r.w_minus) == want;
        pass &= plus_ok && minus_ok;
        Ok(CheckReport::exact(
            "eigenspace_split",
            pass,
            json!({ "sigma2": r, "sigma2_plus_basis_ok": plus_ok, "sigma2_minus_support_ok": minus_ok, "coset": rows }),
        ))
    })
}

/// Exact checks in order.
pub fn exact_checks(seed: u64) -> Vec<CheckReport> {
    vec![
        weil_table(),
        level_subgroup_enumerated(),
        squared_action(),
        iota_eigenstructure(),
        sign_group(),
        invariant_dimensions(),
        isotypic_decomposition(),
        derivative_module(seed),
        eigenspace_split(),
    ]
}

#[derive(Clone, Debug, Serialize)]
pub struct NumericRun {
    /// Seeds tried for the period matrix, the last one used.
    pub seeds: Vec<u64>,
    pub checks: Vec<CheckReport>,
}

fn non_generic(r: &CheckReport) -> bool {
    r.details.get("non_generic_period_matrix").and_then(|v| v.as_bool()) == Some(true)
}

/// Numeric checks for the (1,2,4) model, resampling a random Omega while the squares are rank-deficient.
pub fn numeric_checks(config: &PeriodMatrixConfig) -> Result<NumericRun> {
    let mut cfg = config.clone();
    let mut seeds = vec![cfg.seed];
    loop {
        let model = build_isogeny(&cfg)?;
        let eval = SectionEvaluator::new(&model)?;
        let checks = run_numeric_suite(&model, &eval);
        let resample = cfg.random && checks.iter().any(non_generic) && (seeds.len() as u64) < MAX_RESAMPLES;
        if !resample {
            return Ok(NumericRun { seeds, checks });
        }
        cfg = PeriodMatrixConfig::random(cfg.delta.clone(), cfg.seed + 1).with_settings(&cfg);
        seeds.push(cfg.seed);
    }
}

/// The (1,4) checks, with the same resampling rule.
pub fn nested_checks(config: &PeriodMatrixConfig) -> NumericRun {
    let mut cfg = config.clone();
    let mut seeds = vec![cfg.seed];
    loop {
        let checks = nested_14_check(&cfg);
        if !(cfg.random && checks.iter().any(non_generic) && (seeds.len() as u64) < MAX_RESAMPLES) {
            return NumericRun { seeds, checks };
        }
        cfg = PeriodMatrixConfig::random(cfg.delta.clone(), cfg.seed + 1).with_settings(&cfg);
        seeds.push(cfg.seed);
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub config: serde_json::Value,
    pub pass: bool,
    pub checks: Vec<CheckReport>,
    pub numeric_seeds: Vec<u64>,
    pub nested_seeds: Vec<u64>,
}

/// Everything. `config` must be of type (1,2,4); the (1,4) run uses a random matrix with the same seed
/// and settings unless `nested` is given.
pub fn verify_all(config: &PeriodMatrixConfig, nested: Option<&PeriodMatrixConfig>) -> Result<SuiteReport> {
    let mut checks = exact_checks(config.seed);
    let numeric = numeric_checks(config)?;
    checks.extend(numeric.checks);
    let nested_cfg = match nested {
        Some(c) => c.clone(),
        None => PeriodMatrixConfig::random(delta("1,4"), config.seed).with_settings(config),
    };
    let nested_run = nested_checks(&nested_cfg);
    checks.extend(nested_run.checks);
    Ok(SuiteReport {
        config: config.to_json(),
        pass: checks.iter().all(|c| c.passed()),
        checks,
        numeric_seeds: numeric.seeds,
        nested_seeds: nested_run.seeds,
    })
}
