//! Symmetric powers of V(delta), invariant forms, weight-n isotypic classification,
//! the derivative module of an invariant quartic and the pullback octics F(s_0^2, ..., s_7^2).

use std::collections::{HashMap, HashSet, VecDeque};

use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cyclotomic::Cyclotomic;
use crate::error::{Error, Result};
use crate::exact_linalg::{commutant_dimension, rank_of, Matrix, Vector};
use crate::finite_heisenberg::{GroupPoint, HeisenbergGroup, PolarizationType, SymplecticBasis};
use crate::schrodinger::{represent, squared_action_table, standard_basis, MonomialMatrix};

/// Monomial basis of Sym^n of an `nvars`-dimensional space.
#[derive(Clone, Debug)]
pub struct SymmetricPower {
    nvars: usize,
    degree: usize,
    monomials: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
}

impl SymmetricPower {
    pub fn new(nvars: usize, degree: usize) -> Self {
        let mut monomials = Vec::new();
        let mut current = vec![0u8; nvars];
        fill(&mut monomials, &mut current, 0, degree);
        let index = monomials.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        Self { nvars, degree, monomials, index }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.monomials.len()
    }

    pub fn monomial(&self, i: usize) -> &[u8] {
        &self.monomials[i]
    }

    pub fn index_of(&self, m: &[u8]) -> Option<usize> {
        self.index.get(m).copied()
    }

    /// Action on Sym^n induced by a monomial matrix on the variables.
    pub fn induced(&self, m: &MonomialMatrix) -> MonomialMatrix {
        assert_eq!(m.dim(), self.nvars);
        let order = m.order() as u64;
        let (targets, phases) = self
            .monomials
            .iter()
            .map(|mono| {
                let mut image = vec![0u8; self.nvars];
                let mut phase = 0u64;
                for (j, &e) in mono.iter().enumerate() {
                    if e > 0 {
                        let (p, t) = m.column(j);
                        image[t] += e;
                        phase += e as u64 * p as u64;
                    }
                }
                (self.index[&image], (phase % order) as u32)
            })
            .unzip();
        MonomialMatrix::new(m.order(), targets, phases).expect("induced action is monomial")
    }

    pub fn format(&self, v: &[Cyclotomic]) -> String {
        let terms: Vec<String> = v
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| {
                let mono: Vec<String> = self.monomials[i]
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(j, &e)| if e == 1 { format!("t{j}") } else { format!("t{j}^{e}") })
                    .collect();
                format!("({c})*{}", mono.join("*"))
            })
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" + ")
        }
    }
}

/// Monomials in lexicographically decreasing exponent order of the first variable.
fn fill(out: &mut Vec<Vec<u8>>, current: &mut Vec<u8>, var: usize, left: usize) {
    if var + 1 == current.len() {
        current[var] = left as u8;
        out.push(current.clone());
        return;
    }
    if current.is_empty() {
        return;
    }
    for e in (0..=left).rev() {
        current[var] = e as u8;
        fill(out, current, var + 1, left - e);
    }
    current[var] = 0;
}

/// Lifts (1, x_i), (1, l_i) of a symplectic basis, as matrices on V(delta). They generate the
/// finite Heisenberg group with centre mu_{lcm(delta)}.
pub fn heisenberg_generators(group: &HeisenbergGroup) -> Vec<MonomialMatrix> {
    let basis = SymplecticBasis::new(group.delta());
    basis.labels().iter().map(|l| represent(group, &group.lift(basis.point(l).unwrap()))).collect()
}

/// Common fixed vectors of monomial matrices: one orbit sum per orbit whose stabilizer acts trivially.
/// Only orbits meeting `support` (if given) are considered.
pub fn fixed_vectors(gens: &[MonomialMatrix], support: Option<&[usize]>) -> Vec<Vector> {
    let Some(first) = gens.first() else { return Vec::new() };
    let (dim, order) = (first.dim(), first.order());
    let mut seen = vec![false; dim];
    let mut out = Vec::new();
    let starts: Vec<usize> = support.map_or_else(|| (0..dim).collect(), |s| s.to_vec());
    for start in starts {
        if seen[start] {
            continue;
        }
        let mut phase: HashMap<usize, u32> = HashMap::from([(start, 0)]);
        let mut queue = VecDeque::from([start]);
        let mut consistent = true;
        seen[start] = true;
        while let Some(j) = queue.pop_front() {
            let e = phase[&j];
            for g in gens {
                let (p, t) = g.column(j);
                let want = (e + p) % order;
                match phase.get(&t) {
                    Some(&have) => consistent &= have == want,
                    None => {
                        phase.insert(t, want);
                        seen[t] = true;
                        queue.push_back(t);
                    }
                }
            }
        }
        if consistent {
            let mut v = vec![Cyclotomic::zero(order); dim];
            for (j, e) in phase {
                v[j] = Cyclotomic::root_of_unity(order, e as i64);
            }
            out.push(v);
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct InvariantSpace {
    pub delta: PolarizationType,
    pub sym: SymmetricPower,
    pub basis: Vec<Vector>,
}

impl InvariantSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Dimension of the projective space of invariant hypersurfaces; `None` when empty.
    pub fn projective_dim(&self) -> Option<usize> {
        self.dim().checked_sub(1)
    }
}

/// Basis of the Heis(delta)-invariant forms of degree n on V(delta).
pub fn invariant_forms(delta: &PolarizationType, degree: usize) -> InvariantSpace {
    let group = HeisenbergGroup::new(delta.clone());
    let sym = SymmetricPower::new(delta.h0(), degree);
    let gens: Vec<MonomialMatrix> = heisenberg_generators(&group).iter().map(|g| sym.induced(g)).collect();
    let basis = fixed_vectors(&gens, None);
    InvariantSpace { delta: delta.clone(), sym, basis }
}

/// Element of Z[mu_N] stored by coefficient of each zeta^k; exact and cheap to rotate.
#[derive(Clone, Debug, PartialEq, Eq)]
struct RootSum(Vec<i64>);

impl RootSum {
    fn zero(order: u32) -> Self {
        RootSum(vec![0; order as usize])
    }

    fn add_rotated(&mut self, other: &RootSum, k: u32) {
        let n = self.0.len();
        for (i, &c) in other.0.iter().enumerate() {
            if c != 0 {
                self.0[(i + k as usize) % n] += c;
            }
        }
    }

    fn to_cyclotomic(&self) -> Cyclotomic {
        let n = self.0.len() as u32;
        self.0.iter().enumerate().fold(Cyclotomic::zero(n), |acc, (k, &c)| {
            if c == 0 {
                acc
            } else {
                &acc + &(&Cyclotomic::root_of_unity(n, k as i64) * &Cyclotomic::from_integer(n, c))
            }
        })
    }
}

fn monomial_trace(m: &MonomialMatrix) -> RootSum {
    let mut t = RootSum::zero(m.order());
    for j in 0..m.dim() {
        let (p, k) = m.column(j);
        if k == j {
            t.0[p as usize] += 1;
        }
    }
    t
}

#[derive(Clone, Debug, Serialize)]
pub struct IsotypicComponent {
    /// Character of K(L)_n as exponents (a_i, b_i) mod gcd(n, d_i).
    pub character: Vec<(u32, u32)>,
    pub dimension: usize,
    pub commutant: usize,
    pub irrep_dim: Option<usize>,
    pub multiplicity: Option<usize>,
    pub matches_formula: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct IsotypicReport {
    pub delta: PolarizationType,
    pub degree: usize,
    pub formula_irrep_dim: usize,
    pub characters_total: usize,
    pub components: Vec<IsotypicComponent>,
    pub total_dim: usize,
    pub expected_total: usize,
    pub total_commutant: usize,
    pub pass: bool,
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

fn integer_of(c: &Cyclotomic, what: &str) -> Result<i64> {
    c.as_rational()
        .filter(|r| r.is_integer())
        .and_then(|r| r.to_integer().to_i64())
        .ok_or_else(|| Error::Precondition(format!("{what} is not an integer: {c}")))
}

fn exact_sqrt(v: usize) -> Option<usize> {
    let r = (v as f64).sqrt().round() as usize;
    (r * r == v).then_some(r)
}

/// Decompose Sym^n V(delta) under Heis(delta) in weight n.
///
/// Scalar-one lifts of K(L)_n act on Sym^n as a commuting family (their cocycle is killed by the
/// n-th power), so projectors onto their joint eigenspaces are built from traces. The commutant of
/// each piece is `(1/|K(L)|) sum_v |tr(rho(1,v) P_chi)|^2`, which equals `m^2` exactly when the piece
/// is m copies of one irreducible; the irreducible's dimension is then `dim / m`.
pub fn classify_weight_n(delta: &PolarizationType, n: usize) -> Result<IsotypicReport> {
    if n == 0 {
        return Err(Error::Precondition("weight must be positive".into()));
    }
    let group = HeisenbergGroup::new(delta.clone());
    let order = group.scalar_order();
    let sym = SymmetricPower::new(delta.h0(), n);
    let points = delta.group_points();
    let point_index: HashMap<&GroupPoint, usize> = points.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let traces: Vec<RootSum> =
        points.iter().map(|p| monomial_trace(&sym.induced(&represent(&group, &group.lift(p.clone()))))).collect();

    let gcds: Vec<u32> = delta.divisors().iter().map(|&d| d.gcd(&(n as u32))).collect();
    let kn: Vec<&GroupPoint> = points.iter().filter(|p| p.scale(n as u32, delta).is_zero()).collect();
    let coords = |u: &GroupPoint| -> Vec<(u32, u32)> {
        delta
            .divisors()
            .iter()
            .zip(&gcds)
            .enumerate()
            .map(|(i, (&d, &g))| (u.x[i] / (d / g), u.l[i] / (d / g)))
            .collect()
    };
    let characters: Vec<Vec<(u32, u32)>> = {
        let mut all = vec![Vec::new()];
        for &g in &gcds {
            all = all
                .into_iter()
                .flat_map(|prefix: Vec<(u32, u32)>| {
                    (0..g).flat_map(move |a| {
                        let prefix = prefix.clone();
                        (0..g).map(move |b| {
                            let mut c = prefix.clone();
                            c.push((a, b));
                            c
                        })
                    })
                })
                .collect();
        }
        all
    };
    // exponent (mod N) of chi(u)^{-1}
    let chi_inv = |chi: &[(u32, u32)], u: &GroupPoint| -> u32 {
        let e: u64 = chi
            .iter()
            .zip(coords(u))
            .zip(&gcds)
            .map(|((&(a, b), (x, l)), &g)| ((a * x + b * l) as u64) * (order / g) as u64)
            .sum();
        ((order as u64 - e % order as u64) % order as u64) as u32
    };

    let kl = points.len() as i64;
    let knn = kn.len() as i64;
    let formula_irrep_dim = delta.divisors().iter().zip(&gcds).map(|(&d, &g)| (d / g) as usize).product();
    let mut components = Vec::new();
    let mut total_dim = 0;
    let mut total_commutant = 0;
    let mut pass = true;
    for chi in &characters {
        // dim W_chi = (1/|K_n|) sum_u chi(u)^{-1} t(u)
        let mut dsum = RootSum::zero(order);
        for u in &kn {
            dsum.add_rotated(&traces[point_index[u]], chi_inv(chi, u));
        }
        let dnum = integer_of(&dsum.to_cyclotomic(), "isotypic dimension")?;
        if dnum % knn != 0 {
            return Err(Error::Precondition(format!("isotypic dimension {dnum}/{knn} not integral")));
        }
        let dimension = (dnum / knn) as usize;
        if dimension == 0 {
            continue;
        }
        // |K_n|^2 |K(L)| * commutant = sum_v |sum_u chi(u)^{-1} l_u(x_v)^n t(v+u)|^2
        let mut csum = Cyclotomic::zero(order);
        for v in &points {
            let mut acc = RootSum::zero(order);
            for u in &kn {
                let twist = (n as u64 * delta.character_exponent(&u.l, &v.x) as u64 % order as u64) as u32;
                let w = v.add(u, delta);
                acc.add_rotated(&traces[point_index[&w]], (chi_inv(chi, u) + twist) % order);
            }
            let a = acc.to_cyclotomic();
            csum = &csum + &(&a * &a.conj());
        }
        let cnum = integer_of(&csum, "commutant dimension")?;
        let denom = knn * knn * kl;
        if cnum % denom != 0 {
            return Err(Error::Precondition(format!("commutant {cnum}/{denom} not integral")));
        }
        let commutant = (cnum / denom) as usize;
        let multiplicity = exact_sqrt(commutant).filter(|m| *m > 0 && dimension.is_multiple_of(*m));
        let irrep_dim = multiplicity.map(|m| dimension / m);
        let matches_formula = irrep_dim == Some(formula_irrep_dim);
        pass &= matches_formula;
        total_dim += dimension;
        total_commutant += commutant;
        components.push(IsotypicComponent {
            character: chi.clone(),
            dimension,
            commutant,
            irrep_dim,
            multiplicity,
            matches_formula,
        });
    }
    let expected_total = binomial(delta.h0() + n - 1, n);
    pass &= total_dim == expected_total;
    Ok(IsotypicReport {
        delta: delta.clone(),
        degree: n,
        formula_irrep_dim,
        characters_total: characters.len(),
        components,
        total_dim,
        expected_total,
        total_commutant,
        pass,
    })
}

/// Commutant dimension of the whole of Sym^n V(delta) by the trace formula (used against the
/// explicit solve in tests).
pub fn sym_commutant_by_traces(delta: &PolarizationType, n: usize) -> Result<usize> {
    Ok(classify_weight_n(delta, n)?.total_commutant)
}

#[derive(Clone, Debug, Serialize)]
pub struct DerivativeReport {
    pub coefficients: Vec<i64>,
    pub attempts: usize,
    pub span_dim: usize,
    pub stable: bool,
    pub commutant_dim: Option<usize>,
    pub generic: bool,
    pub pass: bool,
}

fn partial(sym: &SymmetricPower, lower: &SymmetricPower, f: &[Cyclotomic], var: usize) -> Vector {
    let order = f.first().map_or(4, |c| c.order());
    let mut out = vec![Cyclotomic::zero(order); lower.dim()];
    for (i, c) in f.iter().enumerate() {
        let m = sym.monomial(i);
        if c.is_zero() || m[var] == 0 {
            continue;
        }
        let mut lm = m.to_vec();
        lm[var] -= 1;
        let k = lower.index_of(&lm).unwrap();
        out[k] = &out[k] + &(c * &Cyclotomic::from_integer(order, m[var] as i64));
    }
    out
}

/// Span of the partial derivatives of an invariant form, its stability under the weight-(n-1)
/// action and the dimension of its commutant.
pub fn derivative_span(space: &InvariantSpace, f: &[Cyclotomic]) -> Result<(usize, bool, Option<usize>)> {
    if f.iter().all(|c| c.is_zero()) {
        return Err(Error::Precondition("zero form".into()));
    }
    let sym = &space.sym;
    if sym.degree() == 0 {
        return Err(Error::Precondition("constant form".into()));
    }
    let group = HeisenbergGroup::new(space.delta.clone());
    let gens = heisenberg_generators(&group);
    for g in &gens {
        if sym.induced(g).apply(f) != f {
            return Err(Error::Precondition("form is not invariant".into()));
        }
    }
    let order = group.scalar_order();
    let lower = SymmetricPower::new(sym.nvars(), sym.degree() - 1);
    let partials: Vec<Vector> = (0..sym.nvars()).map(|i| partial(sym, &lower, f, i)).collect();
    let span: Vec<Vector> = {
        let mut m = Matrix::from_rows(order, partials.clone());
        let piv = m.rref();
        (0..piv.len()).map(|r| m.row(r)).collect()
    };
    let dim = span.len();
    let lowered: Vec<MonomialMatrix> = gens.iter().map(|g| lower.induced(g)).collect();
    let cols = Matrix::from_columns(order, lower.dim(), &span);
    let mut restricted = Vec::new();
    let mut stable = true;
    for g in &lowered {
        let mut coords = Vec::new();
        for v in &span {
            match cols.solve(&g.apply(v)) {
                Some(x) => coords.push(x),
                None => stable = false,
            }
        }
        if stable {
            restricted.push(Matrix::from_columns(order, dim, &coords));
        }
    }
    let commutant = stable.then(|| commutant_dimension(order, &restricted));
    Ok((dim, stable, commutant))
}

/// Cor. check on Heis(2,2,2): a seeded random integer combination of the invariant quartics has an
/// 8-dimensional, stable, irreducible derivative span. Non-generic draws are retried up to 3 times.
pub fn derivative_module_check(seed: u64) -> Result<DerivativeReport> {
    let delta = PolarizationType::new(vec![2, 2, 2])?;
    let space = invariant_forms(&delta, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let order = delta.scalar_order();
    let mut last = None;
    for attempt in 1..=4 {
        let coefficients: Vec<i64> = (0..space.dim()).map(|_| rng.gen_range(-9..=9)).collect();
        if coefficients.iter().all(|&c| c == 0) {
            continue;
        }
        let f = combine(&space.basis, &coefficients, order);
        let (span_dim, stable, commutant_dim) = derivative_span(&space, &f)?;
        let generic = span_dim == delta.h0();
        let report = DerivativeReport {
            coefficients,
            attempts: attempt,
            span_dim,
            stable,
            commutant_dim,
            generic,
            pass: generic && stable && commutant_dim == Some(1),
        };
        if generic {
            return Ok(report);
        }
        last = Some(report);
    }
    last.ok_or_else(|| Error::Precondition("no nonzero draw".into()))
}

pub fn combine(basis: &[Vector], coefficients: &[i64], order: u32) -> Vector {
    let dim = basis.first().map_or(0, |b| b.len());
    let mut f = vec![Cyclotomic::zero(order); dim];
    for (b, &c) in basis.iter().zip(coefficients) {
        if c == 0 {
            continue;
        }
        let c = Cyclotomic::from_integer(order, c);
        for (x, y) in f.iter_mut().zip(b) {
            if !y.is_zero() {
                *x = &*x + &(&c * y);
            }
        }
    }
    f
}

#[derive(Clone, Debug, Serialize)]
pub struct PullbackReport {
    pub delta: PolarizationType,
    pub table_in_standard_group: bool,
    pub quartic_dim: usize,
    pub pullback_rank: usize,
    pub projective_dim: usize,
    pub all_invariant: bool,
    /// Heis(delta)-invariant octics in the span of the squared monomials s^(2m).
    pub squared_monomial_invariants: usize,
    pub pass: bool,
}

/// Octics F(s_0^2, ..., s_7^2) on V(delta), F a Heis(2,2,2)-invariant quartic in t_j = s_j^2.
///
/// t_j is labelled by the bits of the lift word of s_j; the induced action of the complement
/// generators on the t_j is checked to lie in the standard Heis(2,2,2) group in that labelling.
pub fn pullback_octics(delta: &PolarizationType) -> Result<PullbackReport> {
    let (group, basis) = standard_basis(delta)?;
    if basis.len() != 8 || basis.level.complement.len() != 3 {
        return Err(Error::Precondition(format!("pullback octics need an 8-dimensional V, got {delta}")));
    }
    let small = PolarizationType::new(vec![2, 2, 2])?;
    let small_group = HeisenbergGroup::new(small.clone());
    let small_order = small_group.scalar_order();

    // j -> y-label index in K_1(2,2,2)
    let label: Vec<usize> = basis
        .words
        .iter()
        .map(|w| {
            let y: Vec<u32> = (0..3).map(|k| w.contains(&k) as u32).collect();
            small.k1_index(&y)
        })
        .collect();
    let table = squared_action_table(&group, &basis)?;
    let standard: HashSet<MonomialMatrix> = {
        let gens = heisenberg_generators(&small_group);
        let mut seen = HashSet::from([MonomialMatrix::identity(small_order, 8)]);
        let mut queue: VecDeque<MonomialMatrix> = seen.iter().cloned().collect();
        while let Some(m) = queue.pop_front() {
            for g in &gens {
                let p = g.mul(&m);
                if seen.insert(p.clone()) {
                    queue.push_back(p);
                }
            }
        }
        seen
    };
    let mut table_in_standard_group = true;
    for (name, _) in &basis.level.complement {
        let gen = format!("{name}'");
        let mut targets = vec![0; 8];
        let mut phases = vec![0; 8];
        for e in table.iter().filter(|e| e.generator == gen) {
            targets[label[e.from]] = label[e.to];
            phases[label[e.from]] = if e.sign < 0 { small_order / 2 } else { 0 };
        }
        let m = MonomialMatrix::new(small_order, targets, phases)?;
        table_in_standard_group &= standard.contains(&m);
    }

    let quartics = invariant_forms(&small, 4);
    let octic = SymmetricPower::new(8, 8);
    let order = group.scalar_order();
    let pulled: Vec<Vector> = quartics
        .basis
        .iter()
        .map(|f| {
            let mut v = vec![Cyclotomic::zero(order); octic.dim()];
            for (i, c) in f.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let m = quartics.sym.monomial(i);
                let mut sq = vec![0u8; 8];
                for j in 0..8 {
                    sq[j] = 2 * m[label[j]];
                }
                let e = c.as_root_of_unity().expect("orbit sums have unit coefficients");
                // zeta_4^e = zeta_N^{e N / 4}
                v[octic.index_of(&sq).unwrap()] =
                    Cyclotomic::root_of_unity(order, (e * (order / small_order)) as i64);
            }
            v
        })
        .collect();
    let s_gens: Vec<MonomialMatrix> = heisenberg_generators(&group)
        .iter()
        .map(|g| basis.action(g).map(|m| octic.induced(&m)))
        .collect::<Result<_>>()?;
    let all_invariant = pulled.iter().all(|v| s_gens.iter().all(|g| &g.apply(v) == v));
    let pullback_rank = rank_of(order, &pulled);
    let squares: Vec<usize> =
        (0..octic.dim()).filter(|&i| octic.monomial(i).iter().all(|e| e % 2 == 0)).collect();
    let squared_monomial_invariants = fixed_vectors(&s_gens, Some(&squares)).len();
    Ok(PullbackReport {
        delta: delta.clone(),
        table_in_standard_group,
        quartic_dim: quartics.dim(),
        pullback_rank,
        projective_dim: pullback_rank.saturating_sub(1),
        all_invariant,
        squared_monomial_invariants,
        pass: table_in_standard_group && all_invariant && pullback_rank == quartics.dim(),
    })
}

/// `sum t_i^4` as a vector of Sym^4 in 8 variables.
pub fn fermat_quartic(sym: &SymmetricPower, order: u32) -> Vector {
    let mut v = vec![Cyclotomic::zero(order); sym.dim()];
    for i in 0..sym.nvars() {
        let mut m = vec![0u8; sym.nvars()];
        m[i] = sym.degree() as u8;
        v[sym.index_of(&m).unwrap()] = Cyclotomic::one(order);
    }
    v
}
