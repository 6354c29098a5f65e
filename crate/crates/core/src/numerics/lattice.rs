//! The sublattice Lambda_A of Lambda_B = Z^g + Omega Z^g and the data of pi: A -> B.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::finite_heisenberg::{GroupPoint, HeisenbergGroup, LevelStructure, PolarizationType};
use crate::numerics::config::PeriodMatrixConfig;
use crate::schrodinger::{build_section_basis, SectionBasis};

/// Elementary divisors of an integer matrix (nonzero diagonal of its Smith normal form).
pub fn smith_normal_form(m: &[Vec<i64>]) -> Vec<i64> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut a: Vec<Vec<i64>> = m.to_vec();
    let mut out = Vec::new();
    for t in 0..rows.min(cols) {
        // smallest nonzero entry of the trailing block as pivot
        let Some((pi, pj)) = (t..rows)
            .flat_map(|i| (t..cols).map(move |j| (i, j)))
            .filter(|&(i, j)| a[i][j] != 0)
            .min_by_key(|&(i, j)| a[i][j].abs())
        else {
            break;
        };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let mut clean = true;
            for i in t + 1..rows {
                let q = a[i][t] / a[t][t];
                if q != 0 {
                    for j in t..cols {
                        a[i][j] -= q * a[t][j];
                    }
                }
                clean &= a[i][t] == 0;
            }
            for j in t + 1..cols {
                let q = a[t][j] / a[t][t];
                if q != 0 {
                    for row in a.iter_mut().skip(t) {
                        row[j] -= q * row[t];
                    }
                }
                clean &= a[t][j] == 0;
            }
            if !clean {
                // move the smallest remainder of row/column t into the pivot
                let best_row = (t + 1..rows).filter(|&i| a[i][t] != 0).min_by_key(|&i| a[i][t].abs());
                let best_col = (t + 1..cols).filter(|&j| a[t][j] != 0).min_by_key(|&j| a[t][j].abs());
                match (best_row, best_col) {
                    (Some(i), Some(j)) if a[t][j].abs() < a[i][t].abs() => a.iter_mut().for_each(|r| r.swap(t, j)),
                    (Some(i), _) => a.swap(t, i),
                    (None, Some(j)) => a.iter_mut().for_each(|r| r.swap(t, j)),
                    (None, None) => {}
                }
                continue;
            }
            let offender = (t + 1..rows)
                .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
                .find(|&(i, j)| a[i][j] % a[t][t] != 0);
            match offender {
                Some((i, _)) => {
                    for j in t..cols {
                        a[t][j] += a[i][j];
                    }
                }
                None => break,
            }
        }
        out.push(a[t][t].abs());
    }
    out
}

/// Lambda_A = <p_i e_i, q_i Omega e_i> with p_i q_i = d_i, the quotient G = Lambda_B / Lambda_A,
/// and the exact section basis for the matching level structure.
#[derive(Clone, Debug)]
pub struct IsogenyModel {
    pub config: PeriodMatrixConfig,
    pub p: Vec<u32>,
    pub q: Vec<u32>,
    /// Elementary divisors of the symplectic form restricted to Lambda_A, one per pair.
    pub restricted_type: Vec<i64>,
    pub index: i64,
    /// G as points of K(L); `g_reps[k] = (r, s)` is the lattice vector sum r_i e_i + Omega sum s_i e_i.
    pub g_points: Vec<GroupPoint>,
    pub g_reps: Vec<(Vec<u32>, Vec<u32>)>,
    pub group: HeisenbergGroup,
    pub level: LevelStructure,
    pub basis: SectionBasis,
}

impl IsogenyModel {
    pub fn g(&self) -> usize {
        self.config.g
    }

    pub fn delta(&self) -> &PolarizationType {
        &self.config.delta
    }

    /// `sum r_i e_i + Omega sum s_i e_i` for real coefficient vectors.
    pub fn lattice_point(&self, r: &[f64], s: &[f64]) -> DVector<Complex64> {
        let g = self.g();
        let sv = DVector::from_fn(g, |i, _| Complex64::new(s[i], 0.0));
        let rv = DVector::from_fn(g, |i, _| Complex64::new(r[i], 0.0));
        rv + &self.config.omega * sv
    }

    /// Analytic representative of a point (x, l) of K(L): `sum (l_i / q_i) e_i - Omega sum (x_i / p_i) e_i`.
    pub fn analytic_point(&self, u: &GroupPoint) -> DVector<Complex64> {
        let r: Vec<f64> = (0..self.g()).map(|i| u.l[i] as f64 / self.q[i] as f64).collect();
        let s: Vec<f64> = (0..self.g()).map(|i| -(u.x[i] as f64) / self.p[i] as f64).collect();
        self.lattice_point(&r, &s)
    }

    pub fn g_analytic(&self) -> Vec<DVector<Complex64>> {
        self.g_reps
            .iter()
            .map(|(r, s)| {
                let r: Vec<f64> = r.iter().map(|&v| v as f64).collect();
                let s: Vec<f64> = s.iter().map(|&v| v as f64).collect();
                self.lattice_point(&r, &s)
            })
            .collect()
    }
}

fn choose_sublattice(delta: &PolarizationType) -> Result<Vec<u32>> {
    let d = delta.divisors();
    // lexicographically smallest p with p_i | d_i and all p_i, q_i in {1, 2}
    let mut candidates: Vec<Vec<u32>> = vec![Vec::new()];
    for &di in d {
        candidates = candidates
            .into_iter()
            .flat_map(|prefix| {
                (1..=di).filter(move |p| di % p == 0).map(move |p| {
                    let mut v = prefix.clone();
                    v.push(p);
                    v
                })
            })
            .collect();
    }
    candidates.sort();
    candidates
        .into_iter()
        .find(|p| p.iter().zip(d).all(|(&pi, &di)| pi <= 2 && di / pi <= 2))
        .ok_or_else(|| Error::Isogeny(format!("no sublattice with 2-elementary quotient for type {delta}")))
}

pub fn build_isogeny(config: &PeriodMatrixConfig) -> Result<IsogenyModel> {
    config.validate()?;
    let delta = &config.delta;
    let g = config.g;
    let p = choose_sublattice(delta)?;
    let q: Vec<u32> = delta.divisors().iter().zip(&p).map(|(d, p)| d / p).collect();

    // basis of Lambda_A in (e, f) coordinates and the Gram matrix of E = [[0, I], [-I, 0]]
    let mut basis = vec![vec![0i64; 2 * g]; 2 * g];
    for i in 0..g {
        basis[i][i] = p[i] as i64;
        basis[g + i][g + i] = q[i] as i64;
    }
    let e = |a: &[i64], b: &[i64]| -> i64 { (0..g).map(|i| a[i] * b[g + i] - a[g + i] * b[i]).sum() };
    let cols: Vec<Vec<i64>> = (0..2 * g).map(|j| (0..2 * g).map(|i| basis[i][j]).collect()).collect();
    let gram: Vec<Vec<i64>> = cols.iter().map(|a| cols.iter().map(|b| e(a, b)).collect()).collect();
    let mut divisors = smith_normal_form(&gram);
    divisors.sort();
    let restricted_type: Vec<i64> = divisors.chunks(2).map(|c| c[0]).collect();
    let expected: Vec<i64> = {
        let mut v: Vec<i64> = delta.divisors().iter().map(|&d| d as i64).collect();
        v.sort();
        v
    };
    if restricted_type != expected || divisors.chunks(2).any(|c| c.len() != 2 || c[0] != c[1]) {
        return Err(Error::Isogeny(format!("restricted type {restricted_type:?} differs from {delta}")));
    }
    let index: i64 = (0..g).map(|i| (p[i] * q[i]) as i64).product();

    let group = HeisenbergGroup::new(delta.clone());
    let level = LevelStructure::standard(&group)?;
    let mut g_reps = Vec::new();
    let mut g_points = Vec::new();
    let mut r = vec![0u32; g];
    let mut s = vec![0u32; g];
    loop {
        // e_i = q_i (e_i / q_i) -> l_i = q_i;  Omega e_i = -p_i (-Omega e_i / p_i) -> x_i = -p_i
        let mut x = vec![0u32; g];
        let mut l = vec![0u32; g];
        for i in 0..g {
            let d = delta.divisors()[i];
            l[i] = (r[i] * q[i]) % d;
            x[i] = (d - (s[i] * p[i]) % d) % d;
        }
        g_points.push(GroupPoint::new(x, l));
        g_reps.push((r.clone(), s.clone()));
        // odometer over r_i < p_i, s_i < q_i
        let mut k = 0;
        loop {
            if k == 2 * g {
                break;
            }
            let (slot, bound) = if k < g { (&mut r[g - 1 - k], p[g - 1 - k]) } else { (&mut s[2 * g - 1 - k], q[2 * g - 1 - k]) };
            *slot += 1;
            if *slot < bound {
                break;
            }
            *slot = 0;
            k += 1;
        }
        if k == 2 * g {
            break;
        }
    }
    let mut sorted = g_points.clone();
    sorted.sort();
    sorted.dedup();
    if sorted != level.subgroup.elements {
        return Err(Error::Isogeny("Lambda_B / Lambda_A is not the level subgroup G".into()));
    }
    let basis = build_section_basis(&group, &level)?;
    Ok(IsogenyModel {
        config: config.clone(),
        p,
        q,
        restricted_type,
        index,
        g_points,
        g_reps,
        group,
        level,
        basis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snf_examples() {
        assert_eq!(smith_normal_form(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]), vec![2, 6, 12]);
        assert_eq!(smith_normal_form(&[vec![0, 1], vec![-1, 0]]), vec![1, 1]);
        assert_eq!(smith_normal_form(&[vec![4, 0], vec![0, 6]]), vec![2, 12]);
        assert_eq!(smith_normal_form(&[vec![0, 0], vec![0, 0]]), Vec::<i64>::new());
    }

    #[test]
    fn default_models() {
        let cfg = PeriodMatrixConfig::random(PolarizationType::parse("1,2,4").unwrap(), 7);
        let m = build_isogeny(&cfg).unwrap();
        assert_eq!((m.p.clone(), m.q.clone()), (vec![1, 1, 2], vec![1, 2, 2]));
        assert_eq!(m.restricted_type, vec![1, 2, 4]);
        assert_eq!((m.index, m.g_points.len()), (8, 8));
        let cfg = PeriodMatrixConfig::random(PolarizationType::parse("1,4").unwrap(), 7);
        let m = build_isogeny(&cfg).unwrap();
        assert_eq!((m.p.clone(), m.q.clone(), m.index), (vec![1, 2], vec![1, 2], 4));
        let cfg = PeriodMatrixConfig::random(PolarizationType::parse("1,1").unwrap(), 7);
        let m = build_isogeny(&cfg).unwrap();
        assert_eq!((m.restricted_type.clone(), m.index), (vec![1, 1], 1));
    }

    #[test]
    fn unsupported_type() {
        let cfg = PeriodMatrixConfig::random(PolarizationType::parse("1,8").unwrap(), 7);
        assert!(matches!(build_isogeny(&cfg), Err(Error::Isogeny(_))));
    }
}
