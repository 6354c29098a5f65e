//! Schrödinger representation of Heis(delta) on V(delta) = functions K_1(delta) -> C,
//! the section basis s_chi, and its sign and squaring tables.
//!
//! Action: `((a, x, l) f)(y) = a l(y) f(x + y)` and `(iota f)(y) = f(-y)`.

use std::fmt::Write as _;

use serde::Serialize;

use crate::cyclotomic::Cyclotomic;
use crate::error::{Error, Result};
use crate::exact_linalg::{rank_of, Matrix, Vector};
use crate::finite_heisenberg::{
    CyclotomicScalar, GroupPoint, HeisenbergElement, HeisenbergGroup, LevelStructure, PolarizationType,
};

/// Monomial matrix in column form: `M e_j = zeta_N^{phases[j]} e_{targets[j]}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MonomialMatrix {
    order: u32,
    targets: Vec<usize>,
    phases: Vec<u32>,
}

impl MonomialMatrix {
    pub fn new(order: u32, targets: Vec<usize>, phases: Vec<u32>) -> Result<Self> {
        let n = targets.len();
        if phases.len() != n {
            return Err(Error::NotMonomial("targets and phases differ in length".into()));
        }
        let mut hit = vec![false; n];
        for &t in &targets {
            if t >= n || std::mem::replace(&mut hit[t], true) {
                return Err(Error::NotMonomial(format!("targets {targets:?} are not a permutation")));
            }
        }
        let phases = phases.into_iter().map(|p| p % order).collect();
        Ok(Self { order, targets, phases })
    }

    pub fn identity(order: u32, n: usize) -> Self {
        Self { order, targets: (0..n).collect(), phases: vec![0; n] }
    }

    pub fn scalar(order: u32, n: usize, exponent: u32) -> Self {
        Self { order, targets: (0..n).collect(), phases: vec![exponent % order; n] }
    }

    pub fn dim(&self) -> usize {
        self.targets.len()
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn phases(&self) -> &[u32] {
        &self.phases
    }

    /// Image of basis vector j as `(phase exponent, target index)`.
    pub fn column(&self, j: usize) -> (u32, usize) {
        (self.phases[j], self.targets[j])
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.order, other.order);
        assert_eq!(self.dim(), other.dim());
        let (targets, phases) = (0..self.dim())
            .map(|j| {
                let k = other.targets[j];
                (self.targets[k], (other.phases[j] + self.phases[k]) % self.order)
            })
            .unzip();
        Self { order: self.order, targets, phases }
    }

    pub fn inverse(&self) -> Self {
        let n = self.dim();
        let mut targets = vec![0; n];
        let mut phases = vec![0; n];
        for j in 0..n {
            let k = self.targets[j];
            targets[k] = j;
            phases[k] = (self.order - self.phases[j]) % self.order;
        }
        Self { order: self.order, targets, phases }
    }

    pub fn is_identity(&self) -> bool {
        self.targets.iter().enumerate().all(|(j, &t)| t == j) && self.phases.iter().all(|&p| p == 0)
    }

    /// Scalar exponent when the matrix is a scalar multiple of the identity.
    pub fn as_scalar(&self) -> Option<u32> {
        let p = *self.phases.first()?;
        (self.targets.iter().enumerate().all(|(j, &t)| t == j) && self.phases.iter().all(|&q| q == p))
            .then_some(p)
    }

    pub fn apply(&self, v: &[Cyclotomic]) -> Vector {
        let mut out = vec![Cyclotomic::zero(self.order); self.dim()];
        for (j, x) in v.iter().enumerate() {
            if !x.is_zero() {
                out[self.targets[j]] = x * &Cyclotomic::root_of_unity(self.order, self.phases[j] as i64);
            }
        }
        out
    }

    pub fn trace(&self) -> Cyclotomic {
        (0..self.dim())
            .filter(|&j| self.targets[j] == j)
            .fold(Cyclotomic::zero(self.order), |acc, j| {
                &acc + &Cyclotomic::root_of_unity(self.order, self.phases[j] as i64)
            })
    }

    pub fn to_dense(&self) -> Matrix {
        let n = self.dim();
        let mut m = Matrix::zeros(self.order, n, n);
        for j in 0..n {
            m.set(self.targets[j], j, Cyclotomic::root_of_unity(self.order, self.phases[j] as i64));
        }
        m
    }

    /// Dense rows; `None` for zero entries, otherwise the exponent of zeta_N.
    pub fn to_json(&self) -> serde_json::Value {
        let n = self.dim();
        let mut rows = vec![vec![serde_json::Value::Null; n]; n];
        for j in 0..n {
            rows[self.targets[j]][j] = serde_json::Value::from(self.phases[j]);
        }
        serde_json::json!({ "order": self.order, "rows": rows })
    }

    /// Dimensions of the (+1, -1) eigenspaces of an involution.
    pub fn involution_eigenspaces(&self) -> Result<(usize, usize)> {
        if !self.mul(self).is_identity() {
            return Err(Error::NotInvolution);
        }
        let half = self.order / 2;
        let (mut plus, mut minus) = (0, 0);
        for j in 0..self.dim() {
            let k = self.targets[j];
            if k == j {
                if self.phases[j] == 0 {
                    plus += 1;
                } else {
                    debug_assert_eq!(self.phases[j], half);
                    minus += 1;
                }
            } else if j < k {
                // a 2-cycle with phase product 1 carries one eigenvalue of each sign
                plus += 1;
                minus += 1;
            }
        }
        Ok((plus, minus))
    }
}

/// ρ(h) on V(delta) in the delta-function basis: `ρ(a,x,l) δ_y = a l(y - x) δ_{y - x}`.
pub fn represent(group: &HeisenbergGroup, h: &HeisenbergElement) -> MonomialMatrix {
    let delta = group.delta();
    let k1 = delta.k1_elements();
    let n = group.scalar_order();
    let neg_x = GroupPoint::new(h.point.x.clone(), vec![0; delta.genus()]).neg(delta).x;
    let (targets, phases) = k1
        .iter()
        .map(|y| {
            let w: Vec<u32> = y.iter().zip(&neg_x).zip(delta.divisors()).map(|((a, b), d)| (a + b) % d).collect();
            let phase = (h.scalar.exponent + delta.character_exponent(&h.point.l, &w)) % n;
            (delta.k1_index(&w), phase)
        })
        .unzip();
    MonomialMatrix { order: n, targets, phases }
}

/// ρ(ι): `δ_y ↦ δ_{-y}`.
pub fn represent_iota(delta: &PolarizationType) -> MonomialMatrix {
    let targets = delta
        .k1_elements()
        .iter()
        .map(|y| {
            let neg: Vec<u32> = y.iter().zip(delta.divisors()).map(|(&a, &d)| (d - a) % d).collect();
            delta.k1_index(&neg)
        })
        .collect::<Vec<_>>();
    let n = targets.len();
    MonomialMatrix { order: delta.scalar_order(), targets, phases: vec![0; n] }
}

/// The basis s_0, ..., s_{h-1} of V(delta) adapted to a level structure.
#[derive(Clone, Debug)]
pub struct SectionBasis {
    pub delta: PolarizationType,
    pub level: LevelStructure,
    /// `vectors[j]` = coordinates of s_j in the delta-function basis.
    pub vectors: Vec<Vector>,
    pub words: Vec<Vec<usize>>,
    pub labels: Vec<String>,
    /// `characters[j][i]` = eigenvalue of the i-th lifted generator of G on s_j.
    pub characters: Vec<Vec<CyclotomicScalar>>,
}

impl SectionBasis {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn order(&self) -> u32 {
        self.delta.scalar_order()
    }

    /// Express `v` as `c * s_k`; returns `(c, k)`.
    pub fn proportional_to(&self, v: &[Cyclotomic]) -> Option<(Cyclotomic, usize)> {
        let i = v.iter().position(|x| !x.is_zero())?;
        self.vectors.iter().enumerate().find_map(|(k, s)| {
            let c = &v[i] * &s[i].inverse()?;
            let matches = s.iter().zip(v).all(|(a, b)| &(&c * a) == b);
            matches.then_some((c, k))
        })
    }

    /// Matrix of an operator on V(delta) in the s-basis; it must permute the lines C s_j.
    pub fn action(&self, op: &MonomialMatrix) -> Result<MonomialMatrix> {
        let (targets, phases): (Vec<usize>, Vec<u32>) = self
            .vectors
            .iter()
            .enumerate()
            .map(|(j, s)| {
                let image = op.apply(s);
                let (c, k) = self
                    .proportional_to(&image)
                    .ok_or_else(|| Error::NotMonomial(format!("image of s_{j} is not a multiple of a basis vector")))?;
                let e = c
                    .as_root_of_unity()
                    .ok_or_else(|| Error::NotMonomial(format!("image of s_{j} has non-unit coefficient {c}")))?;
                Ok((k, e))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .unzip();
        MonomialMatrix::new(self.order(), targets, phases)
    }
}

/// Build s_0 (the G'-invariant line, normalized with ι s_0 = s_0) and s_j = (word_j) s_0.
pub fn build_section_basis(group: &HeisenbergGroup, level: &LevelStructure) -> Result<SectionBasis> {
    let delta = group.delta().clone();
    let order = group.scalar_order();
    let h = delta.h0();
    let g_prime: Vec<MonomialMatrix> =
        group.level_subgroup(&level.lifts)?.iter().map(|e| represent(group, e)).collect();

    let unit = |i: usize| {
        let mut v = vec![Cyclotomic::zero(order); h];
        v[i] = Cyclotomic::one(order);
        v
    };
    let average = |v: &Vector| {
        g_prime.iter().fold(vec![Cyclotomic::zero(order); h], |acc, m| {
            acc.iter().zip(m.apply(v)).map(|(a, b)| a + &b).collect()
        })
    };
    let images: Vec<Vector> = (0..h).map(|i| average(&unit(i))).collect();
    let fixed_dim = rank_of(order, &images);
    if fixed_dim != 1 {
        return Err(Error::InvariantsNotOneDimensional(fixed_dim));
    }
    let mut s0 = images.into_iter().find(|v| v.iter().any(|x| !x.is_zero())).expect("rank 1");
    let iota = represent_iota(&delta);
    let sym: Vector = s0.iter().zip(iota.apply(&s0)).map(|(a, b)| a + &b).collect();
    if sym.iter().all(|x| x.is_zero()) {
        return Err(Error::Precondition("iota acts by -1 on the G'-invariant line".into()));
    }
    s0 = sym;
    let lead = s0.iter().find(|x| !x.is_zero()).unwrap().inverse().unwrap();
    s0 = s0.iter().map(|x| x * &lead).collect();

    let words = level.words();
    let vectors: Vec<Vector> =
        words.iter().map(|w| represent(group, &level.word_element(group, w)).apply(&s0)).collect();
    let labels = words
        .iter()
        .map(|w| if w.is_empty() { "s0".to_string() } else { format!("{}(s0)", level.word_label(w)) })
        .collect();
    if rank_of(order, &vectors) != vectors.len() || vectors.len() != h {
        return Err(Error::Precondition(format!(
            "{} word images do not form a basis of V{delta}",
            vectors.len()
        )));
    }

    let mut characters = Vec::with_capacity(vectors.len());
    for v in &vectors {
        let mut chi = Vec::new();
        for lift in &level.lifts {
            let image = represent(group, lift).apply(v);
            let i = v.iter().position(|x| !x.is_zero()).unwrap();
            let c = &image[i] * &v[i].inverse().unwrap();
            let same = image.iter().zip(v).all(|(a, b)| a == &(&c * b));
            let e = c.as_root_of_unity().filter(|_| same).ok_or_else(|| {
                Error::Precondition("section is not an eigenvector of the level subgroup".into())
            })?;
            chi.push(CyclotomicScalar::new(e as i64, order));
        }
        characters.push(chi);
    }
    let distinct: std::collections::HashSet<_> = characters.iter().collect();
    if distinct.len() != characters.len() {
        return Err(Error::Precondition("characters of the sections are not distinct".into()));
    }

    Ok(SectionBasis { delta, level: level.clone(), vectors, words, labels, characters })
}

/// Standard group, level structure and basis for delta with entries in {1,2,4}.
pub fn standard_basis(delta: &PolarizationType) -> Result<(HeisenbergGroup, SectionBasis)> {
    let group = HeisenbergGroup::new(delta.clone());
    let level = LevelStructure::standard(&group)?;
    let basis = build_section_basis(&group, &level)?;
    Ok((group, basis))
}

/// Dimensions of the ±1 eigenspaces of an involution on V(delta).
pub fn eigenspace_dims(gamma: &MonomialMatrix) -> Result<(usize, usize)> {
    gamma.involution_eigenspaces()
}

/// `h/2 ± 2^{g-s-1}`, s = number of odd entries of delta; `None` when the exponent is negative.
pub fn iota_eigenspace_formula(delta: &PolarizationType) -> Option<(usize, usize)> {
    let g = delta.genus() as i64;
    let s = delta.divisors().iter().filter(|&&d| d % 2 == 1).count() as i64;
    let e = g - s - 1;
    if e < 0 {
        return None;
    }
    let h = delta.h0();
    let shift = 1usize << e;
    (h.is_multiple_of(2) && h / 2 >= shift).then(|| (h / 2 + shift, h / 2 - shift))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TableEntry {
    pub generator: String,
    pub from: usize,
    pub sign: i32,
    pub to: usize,
}

/// Induced action of the complement generators on t_j = s_j^2: `u s_j = c s_k` gives `t_j ↦ c^2 t_k`.
pub fn squared_action_table(group: &HeisenbergGroup, basis: &SectionBasis) -> Result<Vec<TableEntry>> {
    let n = basis.order();
    let mut table = Vec::new();
    for (label, lift) in &basis.level.complement {
        let m = basis.action(&represent(group, lift))?;
        for j in 0..basis.len() {
            let (e, k) = m.column(j);
            let sq = (2 * e) % n;
            let sign = match sq {
                0 => 1,
                s if 2 * s == n => -1,
                _ => {
                    return Err(Error::NotMonomial(format!(
                        "{label}' sends t_{j} to a non-real multiple of t_{k}"
                    )))
                }
            };
            table.push(TableEntry { generator: format!("{label}'"), from: j, sign, to: k });
        }
    }
    Ok(table)
}

/// Aligned text: one row per t_j, one column per generator.
pub fn format_table(table: &[TableEntry]) -> String {
    let mut gens: Vec<&str> = Vec::new();
    for e in table {
        if !gens.contains(&e.generator.as_str()) {
            gens.push(&e.generator);
        }
    }
    let rows = table.iter().map(|e| e.from).max().map_or(0, |m| m + 1);
    let width = gens.iter().map(|g| g.len()).max().unwrap_or(0).max(4);
    let mut out = String::new();
    let _ = write!(out, "{:>5}", "");
    for g in &gens {
        let _ = write!(out, "  {g:>width$}");
    }
    out.push('\n');
    for j in 0..rows {
        let _ = write!(out, "{:>5}", format!("t{j}"));
        for g in &gens {
            let e = table.iter().find(|e| e.generator == *g && e.from == j).unwrap();
            let cell = format!("{}t{}", if e.sign < 0 { "-" } else { "" }, e.to);
            let _ = write!(out, "  {cell:>width$}");
        }
        out.push('\n');
    }
    out
}

/// Express an operator that is diagonal ±1 on the s-basis as the list of flipped coordinates.
pub fn identify_in_sign_group(gamma: &MonomialMatrix, basis: &SectionBasis) -> Result<Vec<usize>> {
    let m = basis.action(gamma).map_err(|_| Error::NotDiagonalSign)?;
    let half = m.order() / 2;
    let mut flips = Vec::new();
    for j in 0..m.dim() {
        match m.column(j) {
            (0, k) if k == j => {}
            (p, k) if k == j && p == half => flips.push(j),
            _ => return Err(Error::NotDiagonalSign),
        }
    }
    Ok(flips)
}

pub fn format_sign_word(flips: &[usize]) -> String {
    if flips.is_empty() {
        "1".into()
    } else {
        flips.iter().map(|i| format!("a{i}")).collect::<Vec<_>>().join(".")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SquaringReport {
    pub point: GroupPoint,
    /// W^+ and W^- bases, as coefficient vectors in the s-basis.
    pub w_plus: Vec<Vec<String>>,
    pub w_minus: Vec<Vec<String>>,
    /// V^+ and V^- bases, as coefficient vectors in the t-basis (t_j = s_j^2).
    pub v_plus: Vec<Vec<String>>,
    pub v_minus: Vec<Vec<String>>,
    pub squaring_is_diagonal: bool,
    pub map_degree: usize,
    /// Pair in a^perp used for the Heis(4) relation, with its commutator on W^+ and W^-.
    pub heis_pair: (GroupPoint, GroupPoint),
    pub commutator_on_w_plus: String,
    pub commutator_on_w_minus: String,
    pub pass: bool,
}

/// Eigenspaces W_a^± of a symmetric lift a' of an order-2 point a outside G (e.g. a in sigma2 + G),
/// and the squaring map P W_a^± -> P V_a^+ in those bases.
pub fn eigenspace_squaring_check(
    group: &HeisenbergGroup,
    basis: &SectionBasis,
    a: &GroupPoint,
) -> Result<SquaringReport> {
    let delta = group.delta();
    let n = basis.order();
    let half = n / 2;
    if a.is_zero() || !a.scale(2, delta).is_zero() {
        return Err(Error::Precondition(format!("{a} is not of order 2")));
    }
    if basis.level.subgroup.contains(a) {
        return Err(Error::Precondition(format!("{a} lies in G and acts by a scalar on each s_j")));
    }
    let lift = group.symmetric_lift(a)?;
    let m = basis.action(&represent(group, &lift))?;
    let dim = basis.len();
    let zero = || vec![Cyclotomic::zero(n); dim];
    let root = |e: u32| Cyclotomic::root_of_unity(n, e as i64);

    // Eigenvectors of a' (s-coordinates) and of its induced action on t (t-coordinates).
    let mut w_plus = Vec::new();
    let mut w_minus = Vec::new();
    let mut v_plus = Vec::new();
    let mut v_minus = Vec::new();
    let mut squaring_is_diagonal = true;
    for j in 0..dim {
        let (e, k) = m.column(j);
        if k < j {
            continue;
        }
        if k == j {
            let mut v = zero();
            v[j] = Cyclotomic::one(n);
            if e == 0 { w_plus.push(v.clone()) } else { w_minus.push(v.clone()) }
            v_plus.push(v);
            continue;
        }
        // a' s_j = c s_k, a' s_k = c^{-1} s_j: eigenvectors s_j ± c s_k.
        let c = root(e);
        for (sign, w_side) in [(1i64, &mut w_plus), (-1, &mut w_minus)] {
            let mut v = zero();
            v[j] = Cyclotomic::one(n);
            v[k] = &c * &Cyclotomic::from_integer(n, sign);
            w_side.push(v);
        }
        let c2 = root(2 * e);
        for (sign, v_side) in [(1i64, &mut v_plus), (-1, &mut v_minus)] {
            let mut v = zero();
            v[j] = Cyclotomic::one(n);
            v[k] = &c2 * &Cyclotomic::from_integer(n, sign);
            v_side.push(v);
        }
    }
    if w_plus.len() != w_minus.len() {
        return Err(Error::UnexpectedSplit { plus: w_plus.len(), minus: w_minus.len() });
    }

    // Induced action on t: t_j -> c^2 t_k.
    let t_action = MonomialMatrix::new(n, m.targets().to_vec(), m.phases().iter().map(|&p| 2 * p).collect())?;
    for v in &v_plus {
        if &t_action.apply(v) != v {
            squaring_is_diagonal = false;
        }
    }
    // Squaring of sum_m z_m w_m: each s-coordinate is a single z_m times a unit, so
    // the t-image is sum_m z_m^2 (w_m squared coordinatewise), and that square must be v_plus[m].
    for side in [&w_plus, &w_minus] {
        let mut owner = vec![None; dim];
        for (idx, w) in side.iter().enumerate() {
            for (j, x) in w.iter().enumerate() {
                if !x.is_zero() {
                    if owner[j].is_some() {
                        squaring_is_diagonal = false;
                    }
                    owner[j] = Some(idx);
                }
            }
        }
        for w in side.iter() {
            let sq: Vector = w.iter().map(|x| x * x).collect();
            if !v_plus.contains(&sq) {
                squaring_is_diagonal = false;
            }
        }
    }

    // Heis(4) relation on W^± from a pair u, v in a^perp with e(u, v) of order 4.
    let perp: Vec<GroupPoint> = delta
        .group_points()
        .into_iter()
        .filter(|u| group.weil_pairing(a, u).is_one())
        .collect();
    let pair = perp
        .iter()
        .flat_map(|u| perp.iter().map(move |v| (u, v)))
        .find(|(u, v)| group.weil_pairing(u, v).multiplicative_order() == 4)
        .ok_or_else(|| Error::Precondition("no pair with commutator of order 4 in a^perp".into()))?;
    let restricted_commutator = |side: &Vec<Vector>| -> Result<String> {
        let ops: Vec<Matrix> = [pair.0, pair.1]
            .iter()
            .map(|p| Ok(basis.action(&represent(group, &group.symmetric_lift(p)?))?.to_dense()))
            .collect::<Result<_>>()?;
        let basis_cols = Matrix::from_columns(n, dim, side);
        let restrict = |op: &Matrix| -> Result<Matrix> {
            let cols = side
                .iter()
                .map(|w| {
                    basis_cols
                        .solve(&op.apply(w))
                        .ok_or_else(|| Error::Precondition("W is not stable under a^perp".into()))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Matrix::from_columns(n, side.len(), &cols))
        };
        let (ru, rv) = (restrict(&ops[0])?, restrict(&ops[1])?);
        let (ru_inv, rv_inv) =
            (restrict(&inverse_monomial_dense(&ops[0]))?, restrict(&inverse_monomial_dense(&ops[1]))?);
        let comm = ru.mul(&rv).mul(&ru_inv).mul(&rv_inv);
        let c = comm.get(0, 0).clone();
        let scalar = comm == diag_scalar(n, side.len(), &c);
        let expected = group.weil_pairing(pair.0, pair.1).to_cyclotomic();
        Ok(if scalar && c == expected {
            CyclotomicScalar::new(c.as_root_of_unity().unwrap() as i64, n).to_string()
        } else {
            format!("not the scalar {expected}")
        })
    };
    let cp = restricted_commutator(&w_plus)?;
    let cm = restricted_commutator(&w_minus)?;
    let heis_ok = !cp.starts_with("not") && !cm.starts_with("not");

    let fmt = |vs: &[Vector]| vs.iter().map(|v| v.iter().map(|x| x.to_string()).collect()).collect();
    let free_coords = w_plus.len();
    Ok(SquaringReport {
        point: a.clone(),
        w_plus: fmt(&w_plus),
        w_minus: fmt(&w_minus),
        v_plus: fmt(&v_plus),
        v_minus: fmt(&v_minus),
        squaring_is_diagonal,
        map_degree: 1 << free_coords.saturating_sub(1),
        heis_pair: (pair.0.clone(), pair.1.clone()),
        commutator_on_w_plus: cp,
        commutator_on_w_minus: cm,
        pass: squaring_is_diagonal && heis_ok && w_plus.len() == dim / 2 && half > 0,
    })
}

fn diag_scalar(order: u32, n: usize, c: &Cyclotomic) -> Matrix {
    let mut m = Matrix::zeros(order, n, n);
    for i in 0..n {
        m.set(i, i, c.clone());
    }
    m
}

/// Inverse of a dense monomial matrix with unit entries: conjugate transpose.
fn inverse_monomial_dense(m: &Matrix) -> Matrix {
    let mut t = m.transpose();
    for i in 0..t.rows() {
        for j in 0..t.cols() {
            let v = t.get(i, j).conj();
            t.set(i, j, v);
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_heisenberg::SymplecticBasis;

    fn delta(s: &str) -> PolarizationType {
        PolarizationType::parse(s).unwrap()
    }

    #[test]
    fn identity_and_scalars() {
        let g = HeisenbergGroup::new(delta("2,4"));
        assert!(represent(&g, &g.identity()).is_identity());
        let minus = represent(&g, &g.scalar(4));
        assert_eq!(minus.as_scalar(), Some(4));
        assert_eq!(minus.to_dense(), Matrix::identity(8, 8).sub(&Matrix::identity(8, 8)).sub(&Matrix::identity(8, 8)));
    }

    #[test]
    fn representation_property_on_all_pairs_of_points() {
        let g = HeisenbergGroup::new(delta("2,2"));
        let pts = g.delta().group_points();
        for a in &pts {
            for b in &pts {
                let (ha, hb) = (g.lift(a.clone()), g.lift(b.clone()));
                let prod = g.multiply(&ha, &hb).unwrap();
                assert_eq!(represent(&g, &prod), represent(&g, &ha).mul(&represent(&g, &hb)));
            }
        }
    }

    #[test]
    fn iota_conjugation() {
        let g = HeisenbergGroup::new(delta("2,4"));
        let iota = represent_iota(g.delta());
        assert!(iota.mul(&iota).is_identity());
        let b = SymplecticBasis::new(g.delta());
        let gens: Vec<_> = b.labels().iter().map(|l| g.lift(b.point(l).unwrap())).collect();
        for mask in 0u32..16 {
            let h = (0..4).filter(|i| mask & (1 << i) != 0).fold(g.identity(), |acc, i| {
                g.multiply(&acc, &gens[i]).unwrap()
            });
            let lhs = iota.mul(&represent(&g, &h)).mul(&iota);
            assert_eq!(lhs, represent(&g, &g.symmetric_involution(&h)));
        }
    }

    #[test]
    fn basis_for_one_two_four() {
        let (g, basis) = standard_basis(&delta("1,2,4")).unwrap();
        assert_eq!(basis.len(), 8);
        // s_0 is the indicator of the last coordinate being even
        let k1 = g.delta().k1_elements();
        for (y, v) in k1.iter().zip(&basis.vectors[0]) {
            assert_eq!(v.is_one(), y[2] % 2 == 0);
            assert_eq!(v.is_zero(), y[2] % 2 == 1);
        }
        let iota = represent_iota(g.delta());
        assert_eq!(identify_in_sign_group(&iota, &basis).unwrap(), vec![6, 7]);
    }

    #[test]
    fn eigenspaces() {
        let (g, _) = standard_basis(&delta("2,4")).unwrap();
        let iota = represent_iota(g.delta());
        assert_eq!(eigenspace_dims(&iota).unwrap(), (6, 2));
        let b = SymplecticBasis::new(g.delta());
        let s1 = g.symmetric_lift(&b.point("sigma1").unwrap()).unwrap();
        assert_eq!(eigenspace_dims(&represent(&g, &s1)).unwrap(), (4, 4));
        let t1 = g.symmetric_lift(&b.point("tau1").unwrap()).unwrap();
        assert!(matches!(eigenspace_dims(&represent(&g, &t1)), Err(Error::NotInvolution)));
        let t1sq = represent(&g, &g.power(&t1, 2));
        let (p, m) = eigenspace_dims(&iota.mul(&t1sq)).unwrap();
        assert!(p > 0 && m > 0);
    }

    #[test]
    fn eigenspace_dims_match_dense_rank() {
        let (g, _) = standard_basis(&delta("2,4")).unwrap();
        for p in g.delta().torsion_points(2) {
            let m = represent(&g, &g.symmetric_lift(&p).unwrap());
            let (plus, minus) = eigenspace_dims(&m).unwrap();
            let dense = m.to_dense();
            let id = Matrix::identity(8, 8);
            assert_eq!(plus, 8 - dense.sub(&id).rank());
            assert_eq!(minus, 8 - dense.add(&id).rank());
        }
    }

    #[test]
    fn iota_formula() {
        assert_eq!(iota_eigenspace_formula(&delta("1,2,4")), Some((6, 2)));
        assert_eq!(iota_eigenspace_formula(&delta("4")), Some((3, 1)));
        assert_eq!(iota_eigenspace_formula(&delta("2,2")), Some((4, 0)));
    }

    #[test]
    fn table_first_rows() {
        let (g, basis) = standard_basis(&delta("1,2,4")).unwrap();
        let t = squared_action_table(&g, &basis).unwrap();
        assert_eq!(t.len(), 24);
        assert!(t.contains(&TableEntry { generator: "sigma2'".into(), from: 0, sign: 1, to: 1 }));
        assert!(t.contains(&TableEntry { generator: "tau2'".into(), from: 2, sign: -1, to: 6 }));
        assert!(t.contains(&TableEntry { generator: "tau1'".into(), from: 2, sign: 1, to: 0 }));
        let text = format_table(&t);
        assert_eq!(text.lines().count(), 9);
    }

    #[test]
    fn nonmonomial_operator_rejected() {
        let (_, basis) = standard_basis(&delta("2")).unwrap();
        let m = MonomialMatrix::identity(4, 2);
        assert!(identify_in_sign_group(&m, &basis).unwrap().is_empty());
        assert!(MonomialMatrix::new(4, vec![0, 0], vec![0, 0]).is_err());
    }
}
