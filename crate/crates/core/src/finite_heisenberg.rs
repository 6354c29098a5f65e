//! Finite Heisenberg groups of type delta = (d_1 | d_2 | ... | d_g).
//!
//! `Heis(delta) = mu_N x K_1(delta) x K_1(delta)^`, with `N = 2 lcm(delta)`,
//! and the law `(a, x, l)(a', x', l') = (a a' l'(x), x + x', l + l')`.
//! Characters `l` are stored as residue tuples: `l(y) = exp(2 pi i sum l_i y_i / d_i)`.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cyclotomic::Cyclotomic;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolarizationType {
    divisors: Vec<u32>,
}

impl PolarizationType {
    pub fn new(divisors: Vec<u32>) -> Result<Self> {
        if divisors.is_empty() {
            return Err(Error::InvalidDelta("empty type".into()));
        }
        if divisors.contains(&0) {
            return Err(Error::InvalidDelta(format!("{divisors:?}: entries must be positive")));
        }
        if let Some(w) = divisors.windows(2).find(|w| w[1] % w[0] != 0) {
            return Err(Error::InvalidDelta(format!("{} does not divide {}", w[0], w[1])));
        }
        Ok(Self { divisors })
    }

    /// Parse "1,2,4".
    pub fn parse(s: &str) -> Result<Self> {
        let divisors = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u32>()
                    .map_err(|e| Error::InvalidDelta(format!("{s:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(divisors)
    }

    pub fn divisors(&self) -> &[u32] {
        &self.divisors
    }

    pub fn genus(&self) -> usize {
        self.divisors.len()
    }

    /// `h^0(L) = prod d_i = dim V(delta)`.
    pub fn h0(&self) -> usize {
        self.divisors.iter().map(|&d| d as usize).product()
    }

    pub fn lcm(&self) -> u32 {
        self.divisors.iter().fold(1, |a, &d| a.lcm(&d))
    }

    /// Order of the scalar group mu_N.
    pub fn scalar_order(&self) -> u32 {
        2 * self.lcm()
    }

    /// Elements of K_1(delta) in mixed-radix order, last coordinate fastest.
    pub fn k1_elements(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new()];
        for &d in &self.divisors {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..d).map(move |r| {
                        let mut v = prefix.clone();
                        v.push(r);
                        v
                    })
                })
                .collect();
        }
        out
    }

    pub fn k1_index(&self, x: &[u32]) -> usize {
        self.divisors
            .iter()
            .zip(x)
            .fold(0usize, |acc, (&d, &r)| acc * d as usize + (r % d) as usize)
    }

    /// All points of K(L) = K_1 x K_1^.
    pub fn group_points(&self) -> Vec<GroupPoint> {
        let k1 = self.k1_elements();
        let mut out = Vec::with_capacity(k1.len() * k1.len());
        for x in &k1 {
            for l in &k1 {
                out.push(GroupPoint::new(x.clone(), l.clone()));
            }
        }
        out
    }

    /// Exponent of `l(y)` in mu_N.
    pub fn character_exponent(&self, l: &[u32], y: &[u32]) -> u32 {
        let n = self.scalar_order() as u64;
        let e: u64 = self
            .divisors
            .iter()
            .zip(l.iter().zip(y))
            .map(|(&d, (&li, &yi))| li as u64 * yi as u64 * (n / d as u64))
            .sum();
        (e % n) as u32
    }

    /// Points u with n u = 0.
    pub fn torsion_points(&self, n: u32) -> Vec<GroupPoint> {
        self.group_points().into_iter().filter(|p| p.scale(n, self).is_zero()).collect()
    }
}

impl fmt::Display for PolarizationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.divisors.iter().map(|d| d.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl Serialize for PolarizationType {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.divisors.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PolarizationType {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<u32>::deserialize(d)?;
        PolarizationType::new(v).map_err(serde::de::Error::custom)
    }
}

/// An N-th root of unity `exp(2 pi i exponent / N)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CyclotomicScalar {
    pub exponent: u32,
    pub order: u32,
}

impl CyclotomicScalar {
    pub fn new(exponent: i64, order: u32) -> Self {
        Self { exponent: exponent.rem_euclid(order as i64) as u32, order }
    }

    pub fn one(order: u32) -> Self {
        Self { exponent: 0, order }
    }

    pub fn is_one(&self) -> bool {
        self.exponent == 0
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.order, other.order);
        Self::new(self.exponent as i64 + other.exponent as i64, self.order)
    }

    pub fn inv(&self) -> Self {
        Self::new(-(self.exponent as i64), self.order)
    }

    pub fn pow(&self, k: i64) -> Self {
        Self::new(self.exponent as i64 * k, self.order)
    }

    /// Multiplicative order.
    pub fn multiplicative_order(&self) -> u32 {
        self.order / self.order.gcd(&self.exponent)
    }

    pub fn to_cyclotomic(&self) -> Cyclotomic {
        Cyclotomic::root_of_unity(self.order, self.exponent as i64)
    }

    pub fn to_complex(&self) -> num_complex::Complex64 {
        let t = 2.0 * std::f64::consts::PI * self.exponent as f64 / self.order as f64;
        num_complex::Complex64::from_polar(1.0, t)
    }
}

impl fmt::Display for CyclotomicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (e, n) = (self.exponent, self.order);
        if e == 0 {
            write!(f, "1")
        } else if 2 * e == n {
            write!(f, "-1")
        } else if 4 * e == n {
            write!(f, "i")
        } else if 4 * e == 3 * n {
            write!(f, "-i")
        } else {
            write!(f, "zeta_{n}^{e}")
        }
    }
}

/// A point `(x, l)` of K(L) = K_1(delta) x K_1(delta)^.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupPoint {
    pub x: Vec<u32>,
    pub l: Vec<u32>,
}

impl GroupPoint {
    pub fn new(x: Vec<u32>, l: Vec<u32>) -> Self {
        Self { x, l }
    }

    pub fn zero(delta: &PolarizationType) -> Self {
        Self { x: vec![0; delta.genus()], l: vec![0; delta.genus()] }
    }

    pub fn is_zero(&self) -> bool {
        self.x.iter().chain(self.l.iter()).all(|&v| v == 0)
    }

    pub fn add(&self, other: &Self, delta: &PolarizationType) -> Self {
        let d = delta.divisors();
        Self {
            x: (0..d.len()).map(|i| (self.x[i] + other.x[i]) % d[i]).collect(),
            l: (0..d.len()).map(|i| (self.l[i] + other.l[i]) % d[i]).collect(),
        }
    }

    pub fn neg(&self, delta: &PolarizationType) -> Self {
        let d = delta.divisors();
        Self {
            x: (0..d.len()).map(|i| (d[i] - self.x[i] % d[i]) % d[i]).collect(),
            l: (0..d.len()).map(|i| (d[i] - self.l[i] % d[i]) % d[i]).collect(),
        }
    }

    pub fn scale(&self, k: u32, delta: &PolarizationType) -> Self {
        let d = delta.divisors();
        Self {
            x: (0..d.len()).map(|i| ((self.x[i] as u64 * k as u64) % d[i] as u64) as u32).collect(),
            l: (0..d.len()).map(|i| ((self.l[i] as u64 * k as u64) % d[i] as u64) as u32).collect(),
        }
    }

    /// Additive order in K(L).
    pub fn order(&self, delta: &PolarizationType) -> u32 {
        let d = delta.divisors();
        (0..d.len()).fold(1u32, |acc, i| {
            let ox = d[i] / d[i].gcd(&self.x[i]);
            let ol = d[i] / d[i].gcd(&self.l[i]);
            acc.lcm(&ox).lcm(&ol)
        })
    }

    fn validate(&self, delta: &PolarizationType) -> Result<()> {
        let d = delta.divisors();
        if self.x.len() != d.len() || self.l.len() != d.len() {
            return Err(Error::TypeMismatch(format!("point {self} has wrong length for type {delta}")));
        }
        for i in 0..d.len() {
            if self.x[i] >= d[i] || self.l[i] >= d[i] {
                return Err(Error::TypeMismatch(format!("point {self} not reduced for type {delta}")));
            }
        }
        Ok(())
    }
}

impl fmt::Display for GroupPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?},{:?}]", self.x, self.l)
    }
}

impl Serialize for GroupPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        (&self.x, &self.l).serialize(s)
    }
}

impl<'de> Deserialize<'de> for GroupPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let (x, l) = <(Vec<u32>, Vec<u32>)>::deserialize(d)?;
        Ok(GroupPoint { x, l })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HeisenbergElement {
    pub scalar: CyclotomicScalar,
    pub point: GroupPoint,
}

impl fmt::Display for HeisenbergElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {:?}, {:?})", self.scalar, self.point.x, self.point.l)
    }
}

/// The finite Heisenberg group of a fixed type.
#[derive(Clone, Debug)]
pub struct HeisenbergGroup {
    delta: PolarizationType,
}

impl HeisenbergGroup {
    pub fn new(delta: PolarizationType) -> Self {
        Self { delta }
    }

    pub fn delta(&self) -> &PolarizationType {
        &self.delta
    }

    pub fn scalar_order(&self) -> u32 {
        self.delta.scalar_order()
    }

    pub fn identity(&self) -> HeisenbergElement {
        HeisenbergElement {
            scalar: CyclotomicScalar::one(self.scalar_order()),
            point: GroupPoint::zero(&self.delta),
        }
    }

    /// `(1, x, l)`, the scalar-one lift of a point.
    pub fn lift(&self, point: GroupPoint) -> HeisenbergElement {
        HeisenbergElement { scalar: CyclotomicScalar::one(self.scalar_order()), point }
    }

    pub fn scalar(&self, exponent: i64) -> HeisenbergElement {
        HeisenbergElement {
            scalar: CyclotomicScalar::new(exponent, self.scalar_order()),
            point: GroupPoint::zero(&self.delta),
        }
    }

    pub fn character(&self, l: &[u32], y: &[u32]) -> CyclotomicScalar {
        CyclotomicScalar::new(self.delta.character_exponent(l, y) as i64, self.scalar_order())
    }

    fn validate(&self, h: &HeisenbergElement) -> Result<()> {
        if h.scalar.order != self.scalar_order() {
            return Err(Error::TypeMismatch(format!(
                "scalar order {} for group of type {} (N = {})",
                h.scalar.order,
                self.delta,
                self.scalar_order()
            )));
        }
        h.point.validate(&self.delta)
    }

    pub fn multiply(&self, a: &HeisenbergElement, b: &HeisenbergElement) -> Result<HeisenbergElement> {
        self.validate(a)?;
        self.validate(b)?;
        Ok(self.mul_unchecked(a, b))
    }

    pub(crate) fn mul_unchecked(&self, a: &HeisenbergElement, b: &HeisenbergElement) -> HeisenbergElement {
        let twist = self.character(&b.point.l, &a.point.x);
        HeisenbergElement {
            scalar: a.scalar.mul(&b.scalar).mul(&twist),
            point: a.point.add(&b.point, &self.delta),
        }
    }

    pub fn inverse(&self, h: &HeisenbergElement) -> HeisenbergElement {
        // (a, x, l)^{-1} = (a^{-1} l(x), -x, -l)
        let twist = self.character(&h.point.l, &h.point.x);
        HeisenbergElement { scalar: h.scalar.inv().mul(&twist), point: h.point.neg(&self.delta) }
    }

    pub fn power(&self, h: &HeisenbergElement, k: u32) -> HeisenbergElement {
        (0..k).fold(self.identity(), |acc, _| self.mul_unchecked(&acc, h))
    }

    pub fn commutator(&self, a: &HeisenbergElement, b: &HeisenbergElement) -> HeisenbergElement {
        let ab = self.mul_unchecked(a, b);
        let ab_ainv = self.mul_unchecked(&ab, &self.inverse(a));
        self.mul_unchecked(&ab_ainv, &self.inverse(b))
    }

    /// Weil form `e^L(u, v) = l_v(x_u) / l_u(x_v)`, the commutator of any lifts.
    pub fn weil_pairing(&self, u: &GroupPoint, v: &GroupPoint) -> CyclotomicScalar {
        self.character(&v.l, &u.x).mul(&self.character(&u.l, &v.x).inv())
    }

    /// `D_{-1}(a, x, l) = (a, -x, -l)`.
    pub fn symmetric_involution(&self, h: &HeisenbergElement) -> HeisenbergElement {
        HeisenbergElement { scalar: h.scalar, point: h.point.neg(&self.delta) }
    }

    /// The lift `(a, x, l)` with `D_{-1}(h) = h^{-1}`, i.e. `a^2 = l(x)`, smallest exponent first.
    pub fn symmetric_lift(&self, point: &GroupPoint) -> Result<HeisenbergElement> {
        point.validate(&self.delta)?;
        let n = self.scalar_order();
        let e = self.delta.character_exponent(&point.l, &point.x);
        if !e.is_multiple_of(2) {
            return Err(Error::NoSymmetricLift { point: point.to_string(), order: n });
        }
        let h = HeisenbergElement { scalar: CyclotomicScalar::new((e / 2) as i64, n), point: point.clone() };
        debug_assert_eq!(self.symmetric_involution(&h), self.inverse(&h));
        Ok(h)
    }

    /// Symmetric lifts of the generators of an isotropic subgroup.
    pub fn choose_symmetric_lifts(&self, subgroup: &Subgroup) -> Result<Vec<HeisenbergElement>> {
        for a in &subgroup.generators {
            for b in &subgroup.generators {
                if !self.weil_pairing(a, b).is_one() {
                    return Err(Error::Precondition(format!("subgroup not isotropic: e({a},{b}) != 1")));
                }
            }
        }
        let lifts = subgroup
            .generators
            .iter()
            .map(|g| self.symmetric_lift(g))
            .collect::<Result<Vec<_>>>()?;
        self.level_subgroup(&lifts)?;
        Ok(lifts)
    }

    /// Closure of a set of elements; errors unless it meets the centre trivially.
    pub fn level_subgroup(&self, lifts: &[HeisenbergElement]) -> Result<Vec<HeisenbergElement>> {
        let elems = self.closure(lifts);
        let points: HashSet<&GroupPoint> = elems.iter().map(|h| &h.point).collect();
        if points.len() != elems.len() {
            return Err(Error::NotASection(format!(
                "{} elements over {} points",
                elems.len(),
                points.len()
            )));
        }
        Ok(elems)
    }

    pub fn closure(&self, gens: &[HeisenbergElement]) -> Vec<HeisenbergElement> {
        let mut seen: BTreeSet<HeisenbergElement> = BTreeSet::new();
        let id = self.identity();
        seen.insert(id.clone());
        let mut queue = VecDeque::from([id]);
        while let Some(a) = queue.pop_front() {
            for g in gens {
                let b = self.mul_unchecked(&a, g);
                if seen.insert(b.clone()) {
                    queue.push_back(b);
                }
            }
        }
        seen.into_iter().collect()
    }
}

/// A subgroup of K(L) given by generators and its enumerated closure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subgroup {
    pub generators: Vec<GroupPoint>,
    pub elements: Vec<GroupPoint>,
}

impl Subgroup {
    pub fn generated_by(generators: Vec<GroupPoint>, delta: &PolarizationType) -> Self {
        let elements = point_closure(&generators, delta);
        Self { generators, elements }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, p: &GroupPoint) -> bool {
        self.elements.binary_search(p).is_ok()
    }

    pub fn is_isotropic(&self, group: &HeisenbergGroup) -> bool {
        self.elements
            .iter()
            .all(|a| self.elements.iter().all(|b| group.weil_pairing(a, b).is_one()))
    }
}

fn point_closure(gens: &[GroupPoint], delta: &PolarizationType) -> Vec<GroupPoint> {
    let mut seen = BTreeSet::new();
    let zero = GroupPoint::zero(delta);
    seen.insert(zero.clone());
    let mut queue = VecDeque::from([zero]);
    while let Some(a) = queue.pop_front() {
        for g in gens {
            let b = a.add(g, delta);
            if seen.insert(b.clone()) {
                queue.push_back(b);
            }
        }
    }
    seen.into_iter().collect()
}

/// Greedy generating set: lexicographically smallest elements that enlarge the span.
fn minimal_generators(elements: &[GroupPoint], delta: &PolarizationType) -> Vec<GroupPoint> {
    let mut gens = Vec::new();
    let mut span = point_closure(&gens, delta);
    let mut sorted = elements.to_vec();
    sorted.sort();
    for e in sorted {
        if span.binary_search(&e).is_err() {
            gens.push(e);
            span = point_closure(&gens, delta);
        }
    }
    gens
}

/// All subgroups H of K(L) with 2K(L) <= H, e^L|H = 1, 2H = 0, maximal with these properties.
///
/// Returns an empty list when some d_i > 1 is odd, or when 2K(L) has elements of order > 2.
pub fn enumerate_maximal_isotropic_2torsion(delta: &PolarizationType) -> Vec<Subgroup> {
    if delta.divisors().iter().any(|&d| d > 1 && d % 2 == 1) {
        return Vec::new();
    }
    let group = HeisenbergGroup::new(delta.clone());
    let all = delta.group_points();
    let two_k: Vec<GroupPoint> = {
        let doubled: BTreeSet<GroupPoint> = all.iter().map(|p| p.scale(2, delta)).collect();
        doubled.into_iter().collect()
    };
    if two_k.iter().any(|p| !p.scale(2, delta).is_zero()) {
        return Vec::new();
    }
    let base = point_closure(&two_k, delta);
    let is_iso = |set: &[GroupPoint]| set.iter().all(|a| set.iter().all(|b| group.weil_pairing(a, b).is_one()));
    if !is_iso(&base) {
        return Vec::new();
    }
    let candidates: Vec<GroupPoint> = all.into_iter().filter(|p| p.scale(2, delta).is_zero()).collect();

    let mut found: HashSet<Vec<GroupPoint>> = HashSet::new();
    let mut maximal = Vec::new();
    let mut queue = VecDeque::from([base.clone()]);
    found.insert(base);
    while let Some(h) = queue.pop_front() {
        let mut extended = false;
        for c in &candidates {
            if h.binary_search(c).is_ok() || !h.iter().all(|x| group.weil_pairing(x, c).is_one()) {
                continue;
            }
            extended = true;
            let mut gens = h.clone();
            gens.push(c.clone());
            let bigger = point_closure(&gens, delta);
            if found.insert(bigger.clone()) {
                queue.push_back(bigger);
            }
        }
        if !extended {
            maximal.push(h);
        }
    }
    maximal.sort();
    maximal
        .into_iter()
        .map(|elements| Subgroup { generators: minimal_generators(&elements, delta), elements })
        .collect()
}

/// Labelled symplectic generators: for each factor with d_i > 1, `x_i = e_i` in K_1 and
/// `l_i = -e_i` in K_1^, so that `e^L(x_i, l_i) = exp(-2 pi i / d_i)`.
///
/// For delta with nontrivial part (2,4) the labels are sigma1, tau1, sigma2, tau2 and the
/// Weil form reads e(sigma1,sigma2) = -1, e(tau1,tau2) = -i, e(sigma_i, tau_j) = 1.
#[derive(Clone, Debug)]
pub struct SymplecticBasis {
    /// (label of x-generator, label of character generator, factor index, d_i)
    pub pairs: Vec<(String, String, usize, u32)>,
    delta: PolarizationType,
}

impl SymplecticBasis {
    pub fn new(delta: &PolarizationType) -> Self {
        let nontrivial: Vec<(usize, u32)> =
            delta.divisors().iter().copied().enumerate().filter(|&(_, d)| d > 1).collect();
        let ds: Vec<u32> = nontrivial.iter().map(|&(_, d)| d).collect();
        let pairs = match ds.as_slice() {
            [2, 4] => vec![
                ("sigma1".to_string(), "sigma2".to_string(), nontrivial[0].0, 2),
                ("tau1".to_string(), "tau2".to_string(), nontrivial[1].0, 4),
            ],
            [4] => vec![("z1".to_string(), "z2".to_string(), nontrivial[0].0, 4)],
            _ => nontrivial
                .iter()
                .map(|&(i, d)| (format!("x{}", i + 1), format!("l{}", i + 1), i, d))
                .collect(),
        };
        Self { pairs, delta: delta.clone() }
    }

    pub fn point(&self, label: &str) -> Option<GroupPoint> {
        let g = self.delta.genus();
        for (xl, ll, i, d) in &self.pairs {
            if xl == label {
                let mut x = vec![0; g];
                x[*i] = 1;
                return Some(GroupPoint::new(x, vec![0; g]));
            }
            if ll == label {
                let mut l = vec![0; g];
                l[*i] = d - 1;
                return Some(GroupPoint::new(vec![0; g], l));
            }
        }
        None
    }

    pub fn labels(&self) -> Vec<String> {
        self.pairs.iter().flat_map(|(a, b, _, _)| [a.clone(), b.clone()]).collect()
    }
}

/// Data fixing the section basis: a maximal isotropic 2-torsion subgroup G with symmetric lifts,
/// and an ordered list of symmetric "complement" lifts whose words produce the basis s_j from s_0.
#[derive(Clone, Debug)]
pub struct LevelStructure {
    pub subgroup: Subgroup,
    pub lifts: Vec<HeisenbergElement>,
    pub complement: Vec<(String, HeisenbergElement)>,
}

impl LevelStructure {
    /// The standard structure for delta with entries in {1, 2, 4}: each d_i = 2 factor puts
    /// x_i in G and l_i in the complement; each d_i = 4 factor puts 2x_i, 2l_i in G and x_i, l_i
    /// in the complement. For (1,2,4): G = <sigma1, 2 tau1, 2 tau2>, complement (sigma2, tau1, tau2).
    pub fn standard(group: &HeisenbergGroup) -> Result<Self> {
        let delta = group.delta();
        if delta.divisors().iter().any(|&d| !matches!(d, 1 | 2 | 4)) {
            return Err(Error::Precondition(format!(
                "standard level structure needs entries in {{1,2,4}}, got {delta}"
            )));
        }
        let basis = SymplecticBasis::new(delta);
        let mut gens = Vec::new();
        let mut twos = Vec::new();
        let mut fours = Vec::new();
        for (xl, ll, _, d) in &basis.pairs {
            let x = basis.point(xl).unwrap();
            let l = basis.point(ll).unwrap();
            if *d == 2 {
                gens.push(x);
                twos.push((ll.clone(), l));
            } else {
                gens.push(x.scale(2, delta));
                gens.push(l.scale(2, delta));
                fours.push((xl.clone(), x));
                fours.push((ll.clone(), l));
            }
        }
        let subgroup = Subgroup::generated_by(gens, delta);
        let lifts = group.choose_symmetric_lifts(&subgroup)?;
        let complement = twos
            .into_iter()
            .chain(fours)
            .map(|(label, p)| Ok((label, group.symmetric_lift(&p)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { subgroup, lifts, complement })
    }

    /// Level structure for an arbitrary maximal isotropic 2-torsion subgroup: for each generator
    /// g_k of G the lexicographically smallest point c_k with e(g_j, c_k) = (-1)^{[j = k]}.
    pub fn from_subgroup(group: &HeisenbergGroup, subgroup: Subgroup) -> Result<Self> {
        let delta = group.delta();
        let lifts = group.choose_symmetric_lifts(&subgroup)?;
        let n = group.scalar_order();
        let minus_one = CyclotomicScalar::new((n / 2) as i64, n);
        let mut points = delta.group_points();
        points.sort();
        let mut complement = Vec::new();
        for k in 0..subgroup.generators.len() {
            let c = points
                .iter()
                .find(|c| {
                    subgroup.generators.iter().enumerate().all(|(j, g)| {
                        let e = group.weil_pairing(g, c);
                        if j == k {
                            e == minus_one
                        } else {
                            e.is_one()
                        }
                    })
                })
                .ok_or_else(|| Error::Precondition(format!("no dual element for generator {k}")))?;
            complement.push((format!("c{}", k + 1), group.symmetric_lift(c)?));
        }
        Ok(Self { subgroup, lifts, complement })
    }

    /// Words in the complement generators, ordered by length and then lexicographically.
    pub fn words(&self) -> Vec<Vec<usize>> {
        let k = self.complement.len();
        let mut words: Vec<Vec<usize>> = (0u32..(1 << k))
            .map(|mask| (0..k).filter(|&i| mask & (1 << i) != 0).collect())
            .collect();
        words.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        words
    }

    pub fn word_label(&self, word: &[usize]) -> String {
        if word.is_empty() {
            return "1".into();
        }
        word.iter().map(|&i| format!("{}'", self.complement[i].0)).collect::<Vec<_>>().join("")
    }

    /// Product of the lifted complement generators in the word, left to right.
    pub fn word_element(&self, group: &HeisenbergGroup, word: &[usize]) -> HeisenbergElement {
        word.iter()
            .fold(group.identity(), |acc, &i| group.mul_unchecked(&acc, &self.complement[i].1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> PolarizationType {
        PolarizationType::parse(s).unwrap()
    }

    #[test]
    fn parse_and_validate() {
        assert_eq!(d("1,2,4").divisors(), &[1, 2, 4]);
        assert_eq!(d("1, 2, 4").h0(), 8);
        assert!(PolarizationType::parse("2,3").is_err());
        assert!(PolarizationType::parse("0").is_err());
        assert!(PolarizationType::parse("a").is_err());
        assert_eq!(d("2,4").scalar_order(), 8);
        assert_eq!(d("2,4").group_points().len(), 64);
    }

    #[test]
    fn identity_is_neutral() {
        let g = HeisenbergGroup::new(d("2,4"));
        let h = HeisenbergElement {
            scalar: CyclotomicScalar::new(3, 8),
            point: GroupPoint::new(vec![1, 3], vec![0, 2]),
        };
        assert_eq!(g.multiply(&g.identity(), &h).unwrap(), h);
        assert_eq!(g.multiply(&h, &g.identity()).unwrap(), h);
        assert_eq!(g.multiply(&h, &g.inverse(&h)).unwrap(), g.identity());
    }

    #[test]
    fn mismatched_type_is_rejected() {
        let g = HeisenbergGroup::new(d("2,4"));
        let wrong = HeisenbergElement {
            scalar: CyclotomicScalar::one(4),
            point: GroupPoint::new(vec![1], vec![0]),
        };
        assert!(matches!(g.multiply(&g.identity(), &wrong), Err(Error::TypeMismatch(_))));
        let unreduced = g.lift(GroupPoint::new(vec![2, 0], vec![0, 0]));
        assert!(g.multiply(&unreduced, &g.identity()).is_err());
    }

    #[test]
    fn sigma_commutator_is_minus_one() {
        let g = HeisenbergGroup::new(d("2,4"));
        let a = g.lift(GroupPoint::new(vec![1, 0], vec![0, 0]));
        let b = g.lift(GroupPoint::new(vec![0, 0], vec![1, 0]));
        let c = g.commutator(&a, &b);
        assert_eq!(c.point, GroupPoint::zero(g.delta()));
        assert_eq!(c.scalar, CyclotomicScalar::new(4, 8));
        // commutator of two K_1 elements
        let x = g.lift(GroupPoint::new(vec![0, 1], vec![0, 0]));
        assert!(g.commutator(&a, &x).scalar.is_one());
    }

    #[test]
    fn weil_table_for_two_four() {
        let delta = d("2,4");
        let g = HeisenbergGroup::new(delta.clone());
        let b = SymplecticBasis::new(&delta);
        let p = |s: &str| b.point(s).unwrap();
        assert_eq!(g.weil_pairing(&p("sigma1"), &p("sigma2")).to_string(), "-1");
        assert_eq!(g.weil_pairing(&p("tau1"), &p("tau2")).to_string(), "-i");
        for s in ["sigma1", "sigma2"] {
            for t in ["tau1", "tau2"] {
                assert!(g.weil_pairing(&p(s), &p(t)).is_one());
            }
        }
        assert_eq!(p("tau2"), GroupPoint::new(vec![0, 0], vec![0, 3]));
    }

    #[test]
    fn involution_properties() {
        let g = HeisenbergGroup::new(d("2,4"));
        assert_eq!(g.symmetric_involution(&g.identity()), g.identity());
        for p in g.delta().group_points() {
            let h = HeisenbergElement { scalar: CyclotomicScalar::new(5, 8), point: p.clone() };
            assert_eq!(g.symmetric_involution(&g.symmetric_involution(&h)), h);
            if p.scale(2, g.delta()).is_zero() {
                assert_eq!(g.symmetric_involution(&h), h);
            }
        }
    }

    #[test]
    fn symmetric_lifts() {
        let delta = d("2,4");
        let g = HeisenbergGroup::new(delta.clone());
        let b = SymplecticBasis::new(&delta);
        let s1 = g.symmetric_lift(&b.point("sigma1").unwrap()).unwrap();
        assert!(s1.scalar.is_one());
        assert_eq!(g.power(&s1, 2), g.identity());
        let t1 = g.symmetric_lift(&b.point("tau1").unwrap()).unwrap();
        assert_eq!(g.symmetric_involution(&t1), g.inverse(&t1));
        // every point has a symmetric lift; order-2 points get order-2 lifts
        for p in delta.group_points() {
            let h = g.symmetric_lift(&p).unwrap();
            assert_eq!(g.symmetric_involution(&h), g.inverse(&h));
            if p.order(&delta) == 2 {
                assert_eq!(g.power(&h, 2), g.identity());
            }
        }
    }

    #[test]
    fn standard_level_structure() {
        let g = HeisenbergGroup::new(d("1,2,4"));
        let level = LevelStructure::standard(&g).unwrap();
        assert_eq!(level.subgroup.order(), 8);
        let labels: Vec<&str> = level.complement.iter().map(|(l, _)| l.as_str()).collect();
        assert_eq!(labels, ["sigma2", "tau1", "tau2"]);
        assert_eq!(level.words()[4], vec![0, 1]);
        assert_eq!(level.word_label(&level.words()[7]), "sigma2'tau1'tau2'");
        for a in &level.lifts {
            for b in &level.lifts {
                assert!(g.commutator(a, b).scalar.is_one());
            }
        }
        assert_eq!(g.level_subgroup(&level.lifts).unwrap().len(), 8);
    }

    #[test]
    fn scalar_subgroup_is_not_a_section() {
        let g = HeisenbergGroup::new(d("2"));
        assert!(g.level_subgroup(&[g.scalar(2)]).is_err());
    }

    #[test]
    fn odd_entries_give_no_subgroups() {
        assert!(enumerate_maximal_isotropic_2torsion(&d("3")).is_empty());
        assert!(enumerate_maximal_isotropic_2torsion(&d("8")).is_empty());
    }

    #[test]
    fn enumeration_for_two() {
        let subs = enumerate_maximal_isotropic_2torsion(&d("2"));
        assert_eq!(subs.len(), 3);
        assert!(subs.iter().all(|h| h.order() == 2));
    }
}
