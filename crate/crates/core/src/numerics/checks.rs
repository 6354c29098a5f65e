//! Numerical verification suites. Every check draws its samples from a ChaCha stream seeded by
//! the config seed and a per-check tag, evaluates points in parallel and aggregates in index order.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::error::{Error, Result};
use crate::finite_heisenberg::{GroupPoint, SymplecticBasis};
use crate::numerics::config::PeriodMatrixConfig;
use crate::numerics::lattice::{build_isogeny, IsogenyModel};
use crate::numerics::projective::ProjectivePoint;
use crate::numerics::sections::SectionEvaluator;
use crate::report::{CheckReport, Status};
use crate::schrodinger::{identify_in_sign_group, represent, represent_iota, MonomialMatrix};

pub const EQUALITY_TOL: f64 = 1e-8;
pub const VANISHING_TOL: f64 = 1e-6;
pub const FIBER_TOL: f64 = 1e-6;
pub const DEGREE4_TOL: f64 = 1e-7;
const NEWTON_TOL: f64 = 1e-12;
const NEWTON_RESTARTS: usize = 50;

fn rng_for(config: &PeriodMatrixConfig, tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(config.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ tag)
}

fn to_vec(v: &DVector<Complex64>) -> Vec<Complex64> {
    v.iter().copied().collect()
}

fn add(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn neg(a: &[Complex64]) -> Vec<Complex64> {
    a.iter().map(|x| -x).collect()
}

/// A point of C^g with real coordinates in [0,1) with respect to (e, Omega e).
fn random_point(model: &IsogenyModel, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let g = model.g();
    let r: Vec<f64> = (0..g).map(|_| rng.gen::<f64>()).collect();
    let s: Vec<f64> = (0..g).map(|_| rng.gen::<f64>()).collect();
    to_vec(&model.lattice_point(&r, &s))
}

/// `w[j] = zeta^{phase_j} v[target_j]`: the coordinates of z + u predicted from those of z,
/// where the lift of u maps s_j to zeta^{phase_j} s_{target_j}.
pub fn predicted_translate(m: &MonomialMatrix, v: &[Complex64]) -> Vec<Complex64> {
    let zeta = |e: u32| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * e as f64 / m.order() as f64);
    (0..m.dim())
        .map(|j| {
            let (phase, target) = m.column(j);
            zeta(phase) * v[target]
        })
        .collect()
}

fn section_action(model: &IsogenyModel, u: &GroupPoint) -> Result<MonomialMatrix> {
    model.basis.action(&represent(&model.group, &model.group.lift(u.clone())))
}

/// d(phi_L(z), phi_L(z + lambda)) for random lambda in Lambda_A.
pub fn well_definedness(model: &IsogenyModel, eval: &SectionEvaluator, count: usize) -> CheckReport {
    let name = "well_definedness";
    let mut rng = rng_for(&model.config, 1);
    let g = model.g();
    let cases: Vec<(Vec<Complex64>, Vec<Complex64>)> = (0..count)
        .map(|_| {
            let z = random_point(model, &mut rng);
            let r: Vec<f64> = (0..g).map(|i| (rng.gen_range(-2..=2) * model.p[i] as i64) as f64).collect();
            let s: Vec<f64> = (0..g).map(|i| (rng.gen_range(-2..=2) * model.q[i] as i64) as f64).collect();
            (z, to_vec(&model.lattice_point(&r, &s)))
        })
        .collect();
    let res: Result<Vec<f64>> = cases
        .par_iter()
        .map(|(z, lambda)| Ok(eval.point(z)?.distance(&eval.point(&add(z, lambda))?)))
        .collect();
    match res {
        Ok(d) => {
            let max = d.iter().cloned().fold(0.0, f64::max);
            CheckReport::new(name, max < EQUALITY_TOL, max, json!({ "samples": count }))
        }
        Err(e) => CheckReport::failed(name, e),
    }
}

/// phi_L(z + u) = rho(u) phi_L(z) for every symplectic generator u of K(L).
pub fn equivariance(model: &IsogenyModel, eval: &SectionEvaluator, count: usize) -> CheckReport {
    let name = "equivariance";
    let run = || -> Result<(f64, serde_json::Value)> {
        let mut rng = rng_for(&model.config, 2);
        let points: Vec<Vec<Complex64>> = (0..count).map(|_| random_point(model, &mut rng)).collect();
        let values: Vec<Vec<Complex64>> = points.par_iter().map(|z| eval.values(z)).collect::<Result<_>>()?;
        let sb = SymplecticBasis::new(model.delta());
        let mut max = 0.0f64;
        let mut per_generator = serde_json::Map::new();
        for label in sb.labels() {
            let u = sb.point(&label).expect("label of the basis");
            let m = section_action(model, &u)?;
            let shift = to_vec(&model.analytic_point(&u));
            let d: Vec<f64> = points
                .par_iter()
                .zip(&values)
                .map(|(z, v)| {
                    let lhs = eval.point(&add(z, &shift))?;
                    let rhs = ProjectivePoint::new(predicted_translate(&m, v))?;
                    Ok(lhs.distance(&rhs))
                })
                .collect::<Result<_>>()?;
            let worst = d.iter().cloned().fold(0.0, f64::max);
            per_generator.insert(label, json!(worst));
            max = max.max(worst);
        }
        Ok((max, json!({ "samples": count, "per_generator": per_generator })))
    };
    match run() {
        Ok((max, details)) => CheckReport::new(name, max < EQUALITY_TOL, max, details),
        Err(e) => CheckReport::failed(name, e),
    }
}

fn singular_values(rows: &[Vec<Complex64>]) -> Vec<f64> {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    let mat = DMatrix::from_fn(n, m, |i, j| {
        let scale = rows[i].iter().map(|v| v.norm()).fold(0.0, f64::max);
        rows[i][j] / scale
    });
    let mut sv: Vec<f64> = mat.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

fn rank_ratio(sv: &[f64]) -> f64 {
    match (sv.first(), sv.last()) {
        (Some(&a), Some(&b)) if a > 0.0 => b / a,
        _ => 0.0,
    }
}

fn squares(v: &[Complex64]) -> Vec<Complex64> {
    v.iter().map(|x| x * x).collect()
}

/// Diagram (I): `p(phi_L(z)) = phi_{M^2}(pi z)`, with phi_{M^2} in the second-order theta basis
/// of B related to the squares by a linear map T fitted on independent samples.
pub fn verify_diagram(model: &IsogenyModel, eval: &SectionEvaluator, samples: usize) -> CheckReport {
    let name = "diagram";
    let run = || -> Result<(bool, f64, serde_json::Value)> {
        let g = model.g();
        let h = eval.len();
        let n2 = 1usize << g;
        let mut rng = rng_for(&model.config, 3);
        let fit_points: Vec<Vec<Complex64>> = (0..20.max(2 * n2)).map(|_| random_point(model, &mut rng)).collect();
        let fit: Vec<(Vec<Complex64>, Vec<Complex64>)> = fit_points
            .par_iter()
            .map(|z| Ok((squares(&eval.values(z)?), eval.theta2(z)?)))
            .collect::<Result<_>>()?;

        // rank of the squares on a 20 x h sample matrix
        let sq_rows: Vec<Vec<Complex64>> = fit.iter().map(|(s, _)| s.clone()).collect();
        let sv = singular_values(&sq_rows);
        let ratio = rank_ratio(&sv);
        let generic = ratio > VANISHING_TOL && sv.len() == h;

        // T^t = argmin |X T^t - Y| with rows scaled by the Theta_2 row size
        let x = DMatrix::from_fn(fit.len(), n2, |i, j| {
            let m = fit[i].1.iter().map(|v| v.norm()).fold(0.0, f64::max);
            fit[i].1[j] / m
        });
        let y = DMatrix::from_fn(fit.len(), h, |i, j| {
            let m = fit[i].1.iter().map(|v| v.norm()).fold(0.0, f64::max);
            fit[i].0[j] / m
        });
        let tt = x
            .clone()
            .svd(true, true)
            .solve(&y, 1e-14)
            .map_err(|e| Error::Precondition(format!("least squares: {e}")))?;
        let fit_residual = (&x * &tt - &y).norm() / y.norm();
        let t_sv = tt.singular_values();
        let t_ratio = t_sv.min() / t_sv.max();

        // validation at fresh points, with pi z represented by a Lambda_B-shifted vector
        let validation: Vec<(Vec<Complex64>, Vec<Complex64>)> = (0..samples)
            .map(|_| {
                let z = random_point(model, &mut rng);
                let r: Vec<f64> = (0..g).map(|_| rng.gen_range(-2..=2) as f64).collect();
                let s: Vec<f64> = (0..g).map(|_| rng.gen_range(-2..=2) as f64).collect();
                (z, to_vec(&model.lattice_point(&r, &s)))
            })
            .collect();
        let d: Vec<f64> = validation
            .par_iter()
            .map(|(z, lambda)| {
                let lhs = eval.point(z)?.squared();
                let t2 = DVector::from_vec(eval.theta2(&add(z, lambda))?);
                let rhs = ProjectivePoint::new(to_vec(&(tt.transpose() * t2)))?;
                Ok(lhs.distance(&rhs))
            })
            .collect::<Result<_>>()?;
        let max = d.iter().cloned().fold(0.0, f64::max);

        // images of H = (1/2) Omega Z^g / Lambda_B span the linear system
        let half: Vec<Vec<Complex64>> = (0..n2)
            .map(|mask| {
                let s: Vec<f64> = (0..g).map(|i| if mask & (1 << i) != 0 { 0.5 } else { 0.0 }).collect();
                eval.theta2(&to_vec(&model.lattice_point(&vec![0.0; g], &s)))
            })
            .collect::<Result<_>>()?;
        let h_sv = singular_values(&half);
        let h_ratio = rank_ratio(&h_sv);
        let span_rank = h_sv.iter().filter(|&&v| v > VANISHING_TOL * h_sv[0]).count();

        let pass = generic && max < EQUALITY_TOL && span_rank == n2;
        let details = json!({
            "samples": samples,
            "fit_points": fit.len(),
            "fit_relative_residual": fit_residual,
            "squares_rank": sv.iter().filter(|&&v| v > VANISHING_TOL * sv[0]).count(),
            "squares_sigma_ratio": ratio,
            "non_generic_period_matrix": !generic,
            "transfer_sigma_ratio": t_ratio,
            "two_torsion_span_rank": span_rank,
            "two_torsion_sigma_ratio": h_ratio,
        });
        Ok((pass, max, details))
    };
    match run() {
        Ok((pass, max, details)) => CheckReport::new(name, pass, max, details),
        Err(e) => CheckReport::failed(name, e),
    }
}

/// The 4^g two-torsion points of A, `1/2 (a . p) e + 1/2 Omega (b . q) e`, indexed by (a, b) bits.
fn two_torsion(model: &IsogenyModel) -> Vec<((Vec<u8>, Vec<u8>), Vec<Complex64>)> {
    let g = model.g();
    (0..1usize << (2 * g))
        .map(|mask| {
            let a: Vec<u8> = (0..g).map(|i| ((mask >> (2 * g - 1 - i)) & 1) as u8).collect();
            let b: Vec<u8> = (0..g).map(|i| ((mask >> (g - 1 - i)) & 1) as u8).collect();
            let r: Vec<f64> = (0..g).map(|i| 0.5 * (a[i] as u32 * model.p[i]) as f64).collect();
            let s: Vec<f64> = (0..g).map(|i| 0.5 * (b[i] as u32 * model.q[i]) as f64).collect();
            ((a, b), to_vec(&model.lattice_point(&r, &s)))
        })
        .collect()
}

/// Translate a two-torsion label by the lattice vector (r, s) of Lambda_B.
fn translate_label(model: &IsogenyModel, label: &(Vec<u8>, Vec<u8>), r: &[u32], s: &[u32]) -> (Vec<u8>, Vec<u8>) {
    let g = model.g();
    // r_i e_i = 1/2 (2 r_i / p_i) p_i e_i
    let a = (0..g).map(|i| ((label.0[i] as u32 + 2 * r[i] / model.p[i]) % 2) as u8).collect();
    let b = (0..g).map(|i| ((label.1[i] as u32 + 2 * s[i] / model.q[i]) % 2) as u8).collect();
    (a, b)
}

#[derive(Clone, Debug)]
pub struct TorsionScan {
    pub report: CheckReport,
    /// Analytic representatives of the points of A_2^- found.
    pub minus_points: Vec<Vec<Complex64>>,
}

fn require_124(model: &IsogenyModel, name: &str) -> Option<CheckReport> {
    (model.delta().divisors() != [1, 2, 4]).then(|| CheckReport::failed(name, "requires delta = (1,2,4)"))
}

/// Count two-torsion points with s_0..s_5 vanishing and check that they form two G-orbits of 8.
pub fn torsion_scan(model: &IsogenyModel, eval: &SectionEvaluator) -> TorsionScan {
    let name = "torsion_scan";
    if let Some(r) = require_124(model, name) {
        return TorsionScan { report: r, minus_points: Vec::new() };
    }
    let run = || -> Result<TorsionScan> {
        let pts = two_torsion(model);
        let h = eval.len();
        let values: Vec<Vec<Complex64>> = pts.par_iter().map(|(_, z)| eval.values(z)).collect::<Result<_>>()?;
        let ratios: Vec<f64> = values
            .iter()
            .map(|v| {
                let all = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
                v[..h - 2].iter().map(|x| x.norm()).fold(0.0, f64::max) / all
            })
            .collect();
        let hits: Vec<usize> = (0..pts.len()).filter(|&k| ratios[k] < VANISHING_TOL).collect();
        let hit_labels: Vec<&(Vec<u8>, Vec<u8>)> = hits.iter().map(|&k| &pts[k].0).collect();

        // G-orbits among the hits
        let mut orbits: Vec<Vec<usize>> = Vec::new();
        let mut seen = vec![false; hits.len()];
        let mut closed = true;
        for i in 0..hits.len() {
            if seen[i] {
                continue;
            }
            let mut orbit = Vec::new();
            for (r, s) in &model.g_reps {
                let t = translate_label(model, hit_labels[i], r, s);
                match hit_labels.iter().position(|l| **l == t) {
                    Some(k) => {
                        if !seen[k] {
                            seen[k] = true;
                            orbit.push(hits[k]);
                        }
                    }
                    None => closed = false,
                }
            }
            orbit.sort();
            orbits.push(orbit);
        }
        // the second orbit is the first translated by sigma2
        let sb = SymplecticBasis::new(model.delta());
        let sigma2 = sb.point("sigma2").expect("(1,2,4) labels");
        let v = model.analytic_point(&sigma2);
        let sigma_shift_ok = orbits.len() == 2 && {
            let first = &pts[orbits[0][0]];
            let moved = add(&first.1, &to_vec(&v));
            let d = eval.point(&moved)?.distance(&eval.point(&pts[orbits[1][0]].1)?);
            let g = model.g();
            let shifted_label = {
                // sigma2 is a real shift by 1/q_i in each coordinate with l_i != 0
                let r: Vec<f64> = (0..g).map(|i| sigma2.l[i] as f64 / model.q[i] as f64).collect();
                let a: Vec<u8> =
                    (0..g).map(|i| ((first.0 .0[i] as f64 + 2.0 * r[i] / model.p[i] as f64).round() as u32 % 2) as u8).collect();
                (a, first.0 .1.clone())
            };
            d < EQUALITY_TOL && orbits[1].iter().any(|&k| pts[k].0 == shifted_label)
        };
        // image form (0:...:0:c1:c2)
        let form_ok = hits.iter().all(|&k| {
            let v = &values[k];
            let all = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
            v[h - 2].norm() > VANISHING_TOL * all && v[h - 1].norm() > VANISHING_TOL * all
        });
        let sizes: Vec<usize> = orbits.iter().map(|o| o.len()).collect();
        let pass = hits.len() == 16 && closed && sizes == [8, 8] && sigma_shift_ok && form_ok;
        let max = hits.iter().map(|&k| ratios[k]).fold(0.0, f64::max);
        let plus_min = (0..pts.len()).filter(|k| !hits.contains(k)).map(|k| ratios[k]).fold(f64::INFINITY, f64::min);
        let fmt_label = |l: &(Vec<u8>, Vec<u8>)| {
            format!(
                "{}|{}",
                l.0.iter().map(|b| b.to_string()).collect::<String>(),
                l.1.iter().map(|b| b.to_string()).collect::<String>()
            )
        };
        let details = json!({
            "two_torsion_points": pts.len(),
            "count_minus": hits.len(),
            "count_plus": pts.len() - hits.len(),
            "orbit_sizes": sizes,
            "orbits": orbits.iter().map(|o| o.iter().map(|&k| fmt_label(&pts[k].0)).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "orbits_closed_under_g": closed,
            "second_orbit_is_sigma2_translate": sigma_shift_ok,
            "image_form_0_c1_c2": form_ok,
            "smallest_ratio_outside": plus_min,
        });
        let mut report = CheckReport::new(name, pass, max, details);
        if !pass {
            report.details["offending"] = json!(hits.iter().map(|&k| fmt_label(&pts[k].0)).collect::<Vec<_>>());
        }
        Ok(TorsionScan { report, minus_points: hits.iter().map(|&k| pts[k].1.clone()).collect() })
    };
    run().unwrap_or_else(|e| TorsionScan { report: CheckReport::failed(name, e), minus_points: Vec::new() })
}

/// Deck candidates `sign * z + g` for g in G, identity first.
fn deck_candidates(model: &IsogenyModel, z: &[Complex64]) -> Vec<(String, Vec<Complex64>)> {
    let mut out = Vec::new();
    for sign in [1.0, -1.0] {
        for ((r, s), v) in model.g_reps.iter().zip(model.g_analytic()) {
            let base = if sign > 0.0 { z.to_vec() } else { neg(z) };
            let label = format!(
                "{}z+({};{})",
                if sign > 0.0 { "" } else { "-" },
                r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
                s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
            );
            out.push((label, add(&base, &to_vec(&v))));
        }
    }
    out
}

/// Distances from phi(z) to phi(w) over all deck candidates w (squared coordinates if `squared`).
fn deck_distances(model: &IsogenyModel, eval: &SectionEvaluator, z: &[Complex64], squared: bool) -> Result<Vec<(String, f64)>> {
    let base = eval.point(z)?;
    let base = if squared { base.squared() } else { base };
    deck_candidates(model, z)
        .into_iter()
        .map(|(label, w)| {
            let p = eval.point(&w)?;
            let p = if squared { p.squared() } else { p };
            Ok((label, base.distance(&p)))
        })
        .collect()
}

/// Damped complex Newton for `s_a = s_b = 0` on a random 2-dimensional affine slice.
pub fn find_on_curve(
    model: &IsogenyModel,
    eval: &SectionEvaluator,
    idx: [usize; 2],
    rng: &mut ChaCha8Rng,
) -> Result<Option<(Vec<Complex64>, f64, usize)>> {
    let g = model.g();
    for attempt in 0..NEWTON_RESTARTS {
        let z0 = random_point(model, rng);
        let dirs: Vec<Vec<Complex64>> = (0..2)
            .map(|_| (0..g).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
            .collect();
        let at = |t: Complex64, u: Complex64| -> Vec<Complex64> {
            (0..g).map(|k| z0[k] + t * dirs[0][k] + u * dirs[1][k]).collect()
        };
        let residual = |v: &[Complex64]| {
            let all = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
            v[idx[0]].norm().max(v[idx[1]].norm()) / all
        };
        let (mut t, mut u) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        let mut current = match eval.values(&at(t, u)) {
            Ok(v) => residual(&v),
            Err(_) => continue,
        };
        for _ in 0..60 {
            if current < NEWTON_TOL {
                break;
            }
            let (v, jac) = eval.values_and_jacobian(&at(t, u))?;
            let dir = |row: usize, d: usize| -> Complex64 { (0..g).map(|k| jac[row][k] * dirs[d][k]).sum() };
            let (a, b, c, d) = (dir(idx[0], 0), dir(idx[0], 1), dir(idx[1], 0), dir(idx[1], 1));
            let det = a * d - b * c;
            if det.norm() < 1e-300 {
                break;
            }
            let (f0, f1) = (v[idx[0]], v[idx[1]]);
            let dt = (d * f0 - b * f1) / det;
            let du = (a * f1 - c * f0) / det;
            let mut step = 1.0;
            let mut improved = false;
            while step > 1e-4 {
                let (nt, nu) = (t - dt * step, u - du * step);
                if let Ok(nv) = eval.values(&at(nt, nu)) {
                    let r = residual(&nv);
                    if r < current {
                        t = nt;
                        u = nu;
                        current = r;
                        improved = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
        if current < NEWTON_TOL {
            return Ok(Some((at(t, u), current, attempt + 1)));
        }
    }
    Ok(None)
}

/// Birationality sampling and the degree-2 curves s6 = s7 = 0 (deck -z) and s3 = s5 = 0 (deck -z + 2 tau1).
pub fn fiber_check(model: &IsogenyModel, eval: &SectionEvaluator, samples: usize) -> CheckReport {
    let name = "fiber_check";
    if let Some(r) = require_124(model, name) {
        return r;
    }
    let run = || -> Result<(Status, f64, serde_json::Value)> {
        let mut rng = rng_for(&model.config, 5);
        let mut generic_ok = true;
        let mut worst_identity = 0.0f64;
        let mut nearest_other = f64::INFINITY;
        let mut resampled = 0usize;
        let mut accepted = 0usize;
        while accepted < samples {
            let batch: Vec<Vec<Complex64>> = (0..samples - accepted).map(|_| random_point(model, &mut rng)).collect();
            let results: Vec<(Vec<(String, f64)>, f64)> = batch
                .par_iter()
                .map(|z| {
                    let v = eval.values(z)?;
                    let all = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
                    let smallest = v.iter().map(|x| x.norm()).fold(f64::INFINITY, f64::min) / all;
                    Ok((deck_distances(model, eval, z, false)?, smallest))
                })
                .collect::<Result<_>>()?;
            for (dists, smallest) in results {
                let matches = dists.iter().filter(|(_, d)| *d < FIBER_TOL).count();
                if matches != 1 && smallest < 1e-4 {
                    resampled += 1;
                    if resampled > samples {
                        return Err(Error::Precondition("too many samples near special loci".into()));
                    }
                    continue;
                }
                accepted += 1;
                generic_ok &= matches == 1 && dists[0].1 < FIBER_TOL;
                worst_identity = worst_identity.max(dists[0].1);
                nearest_other = nearest_other.min(dists[1..].iter().map(|(_, d)| *d).fold(f64::INFINITY, f64::min));
            }
        }

        let g = model.g();
        let mut e3 = vec![0u32; g];
        e3[g - 1] = 1;
        let zero = vec![0u32; g];
        let curves = [
            ("s6=s7=0", [6usize, 7], format!("-z+({};{})", join(&zero), join(&zero))),
            ("s3=s5=0", [3usize, 5], format!("-z+({};{})", join(&zero), join(&e3))),
        ];
        let mut status = if generic_ok { Status::Pass } else { Status::Fail };
        let mut curve_details = Vec::new();
        for (label, idx, expected) in curves {
            match find_on_curve(model, eval, idx, &mut rng)? {
                Some((z, res, attempts)) => {
                    let dists = deck_distances(model, eval, &z, false)?;
                    let matched: Vec<&str> =
                        dists.iter().filter(|(_, d)| *d < FIBER_TOL).map(|(l, _)| l.as_str()).collect();
                    let identity = dists[0].0.clone();
                    let ok = matched.len() == 2 && matched.contains(&identity.as_str()) && matched.contains(&expected.as_str());
                    if !ok {
                        status = Status::Fail;
                    }
                    curve_details.push(json!({
                        "curve": label,
                        "newton_residual": res,
                        "attempts": attempts,
                        "matches": matched,
                        "expected_deck": expected,
                        "pass": ok,
                    }));
                }
                None => {
                    if status == Status::Pass {
                        status = Status::Inconclusive;
                    }
                    curve_details.push(json!({ "curve": label, "result": "inconclusive" }));
                }
            }
        }
        let details = json!({
            "samples": samples,
            "candidates": 2 * model.g_reps.len(),
            "generic_exactly_one_match": generic_ok,
            "resampled": resampled,
            "nearest_nonidentity_distance": nearest_other,
            "curves": curve_details,
        });
        Ok((status, worst_identity, details))
    };
    match run() {
        Ok((status, max, details)) => CheckReport { name: name.into(), status, max_residual: max, details },
        Err(e) => CheckReport::failed(name, e),
    }
}

fn join(v: &[u32]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// The fiber {a, a + 2tau1, a + 2tau2, a + 2tau1 + 2tau2} over P_0 = phi_L(a), a in A_2^-.
pub fn degree4_points_check(model: &IsogenyModel, eval: &SectionEvaluator, minus_points: &[Vec<Complex64>]) -> CheckReport {
    let name = "degree4_points";
    if let Some(r) = require_124(model, name) {
        return r;
    }
    let Some(a) = minus_points.first() else {
        return CheckReport::failed(name, "no point of A_2^- available");
    };
    let run = || -> Result<(bool, f64, serde_json::Value)> {
        let sb = SymplecticBasis::new(model.delta());
        let delta = model.delta();
        let t1 = sb.point("tau1").expect("(1,2,4) labels").scale(2, delta);
        let t2 = sb.point("tau2").expect("(1,2,4) labels").scale(2, delta);
        let shifts = [GroupPoint::zero(delta), t1.clone(), t2.clone(), t1.add(&t2, delta)];
        let fiber: Vec<ProjectivePoint> =
            shifts.iter().map(|u| eval.point(&add(a, &to_vec(&model.analytic_point(u))))).collect::<Result<_>>()?;
        let mut max = 0.0f64;
        for i in 0..fiber.len() {
            for j in i + 1..fiber.len() {
                max = max.max(fiber[i].distance(&fiber[j]));
            }
        }
        let v = eval.values(a)?;
        let h = v.len();
        let last = v[h - 1];
        let p0: Vec<Complex64> = v.iter().map(|x| x / last).collect();
        let leading_zero = p0[..h - 2].iter().all(|x| x.norm() < VANISHING_TOL);
        let c = p0[h - 2];
        let c2 = c * c;
        let form_ok = leading_zero && c.norm() > VANISHING_TOL;
        // distinct points of A: the four shifts are nonzero in Lambda_B / Lambda_A
        let distinct = shifts.iter().skip(1).all(|u| !u.is_zero());
        let pass = max < DEGREE4_TOL && form_ok && distinct;
        let details = json!({
            "fiber_size": fiber.len(),
            "p0_form_0_c_1": form_ok,
            "c": [c.re, c.im],
            "p_image_c_squared": [c2.re, c2.im],
            "largest_leading_coordinate": p0[..h - 2].iter().map(|x| x.norm()).fold(0.0, f64::max),
        });
        Ok((pass, max, details))
    };
    match run() {
        Ok((pass, max, details)) => CheckReport::new(name, pass, max, details),
        Err(e) => CheckReport::failed(name, e),
    }
}

/// The (1,4) case: equivariance, diagram, iota pattern and the deck group of the squared map.
pub fn nested_14_check(config: &PeriodMatrixConfig) -> Vec<CheckReport> {
    let name = "nested_14";
    if config.delta.divisors() != [1, 4] {
        return vec![CheckReport::failed(name, "requires delta = (1,4)")];
    }
    let (model, eval) = match build_isogeny(config).and_then(|m| SectionEvaluator::new(&m).map(|e| (m, e))) {
        Ok(v) => v,
        Err(e) => return vec![CheckReport::failed(name, e)],
    };
    let samples = config.samples;
    let mut out = vec![
        rename(well_definedness(&model, &eval, 20), "nested_14.well_definedness"),
        rename(equivariance(&model, &eval, 20), "nested_14.equivariance"),
        rename(verify_diagram(&model, &eval, samples), "nested_14.diagram"),
    ];
    let run = || -> Result<(bool, f64, serde_json::Value)> {
        let iota = represent_iota(model.delta());
        let flips = identify_in_sign_group(&iota, &model.basis)?;
        let pattern: Vec<&str> = (0..eval.len()).map(|j| if flips.contains(&j) { "-" } else { "+" }).collect();
        let m = model.basis.action(&iota)?;
        let mut rng = rng_for(config, 7);
        let points: Vec<Vec<Complex64>> = (0..20).map(|_| random_point(&model, &mut rng)).collect();
        let rows: Vec<(f64, usize, usize)> = points
            .par_iter()
            .map(|z| {
                let v = eval.values(z)?;
                let iota_res = eval.point(&neg(z))?.distance(&ProjectivePoint::new(predicted_translate(&m, &v))?);
                let plain = deck_distances(&model, &eval, z, false)?.iter().filter(|(_, d)| *d < FIBER_TOL).count();
                let squared = deck_distances(&model, &eval, z, true)?.iter().filter(|(_, d)| *d < FIBER_TOL).count();
                Ok((iota_res, plain, squared))
            })
            .collect::<Result<_>>()?;
        let max = rows.iter().map(|r| r.0).fold(0.0, f64::max);
        let deck_counts: Vec<usize> = rows.iter().map(|r| r.2).collect();
        let plain_counts: Vec<usize> = rows.iter().map(|r| r.1).collect();
        let pass = pattern == ["+", "+", "+", "-"]
            && max < EQUALITY_TOL
            && deck_counts.iter().all(|&c| c == 8)
            && plain_counts.iter().all(|&c| c == 1);
        let details = json!({
            "iota_pattern": pattern.concat(),
            "squared_map_deck_count": deck_counts.first().copied().unwrap_or(0),
            "phi_l_matches": plain_counts.first().copied().unwrap_or(0),
            "samples": rows.len(),
        });
        Ok((pass, max, details))
    };
    out.push(match run() {
        Ok((pass, max, details)) => CheckReport::new("nested_14.iota_and_deck", pass, max, details),
        Err(e) => CheckReport::failed("nested_14.iota_and_deck", e),
    });
    out
}

fn rename(mut r: CheckReport, name: &str) -> CheckReport {
    r.name = name.into();
    r
}

/// All numeric checks for a model of type (1,2,4), in a fixed order.
pub fn run_numeric_suite(model: &IsogenyModel, eval: &SectionEvaluator) -> Vec<CheckReport> {
    let samples = model.config.samples;
    let scan = torsion_scan(model, eval);
    vec![
        well_definedness(model, eval, 20),
        equivariance(model, eval, 20),
        verify_diagram(model, eval, samples),
        scan.report.clone(),
        fiber_check(model, eval, 50),
        degree4_points_check(model, eval, &scan.minus_points),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_heisenberg::PolarizationType;

    fn model(delta: &str) -> (IsogenyModel, SectionEvaluator) {
        let cfg = PeriodMatrixConfig::random(PolarizationType::parse(delta).unwrap(), 7);
        let m = build_isogeny(&cfg).unwrap();
        let e = SectionEvaluator::new(&m).unwrap();
        (m, e)
    }

    #[test]
    fn two_torsion_labels_translate_within_g() {
        let (m, _) = model("1,2,4");
        let pts = two_torsion(&m);
        assert_eq!(pts.len(), 64);
        let label = &pts[5].0;
        let moved: Vec<_> = m.g_reps.iter().map(|(r, s)| translate_label(&m, label, r, s)).collect();
        let mut uniq = moved.clone();
        uniq.sort();
        uniq.dedup();
        assert_eq!(uniq.len(), 8);
    }

    #[test]
    fn well_defined_and_equivariant_124() {
        let (m, e) = model("1,2,4");
        let r = well_definedness(&m, &e, 5);
        assert!(r.passed(), "{r:?}");
        let r = equivariance(&m, &e, 3);
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn deck_candidates_identity_first() {
        let (m, _) = model("1,2,4");
        let z = vec![Complex64::new(0.1, 0.2); 3];
        let c = deck_candidates(&m, &z);
        assert_eq!(c.len(), 16);
        assert_eq!(c[0].1, z);
    }
}
