//! Exact arithmetic in the cyclotomic field Q(zeta_N).
//!
//! Elements are stored in the power basis 1, zeta, ..., zeta^{phi(N)-1} with
//! rational coefficients, reduced modulo the N-th cyclotomic polynomial.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// The monic cyclotomic polynomial Phi_N, lowest degree first.
fn cyclotomic_polynomial(n: u32) -> Vec<i64> {
    // x^n - 1 divided by Phi_d for every proper divisor d of n.
    let mut num = vec![0i64; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    for d in 1..n {
        if n.is_multiple_of(d) {
            num = poly_div_exact(&num, &modulus(d));
        }
    }
    num
}

fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dn = den.len() - 1;
    let qn = rem.len() - 1 - dn;
    let mut quot = vec![0i64; qn + 1];
    for k in (0..=qn).rev() {
        let c = rem[k + dn];
        quot[k] = c;
        for (i, &d) in den.iter().enumerate() {
            rem[k + i] -= c * d;
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0));
    quot
}

fn modulus(n: u32) -> Arc<Vec<i64>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Vec<i64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().unwrap().get(&n) {
        return p.clone();
    }
    let p = Arc::new(cyclotomic_polynomial(n));
    cache.lock().unwrap().insert(n, p.clone());
    p
}

/// Element of Q(zeta_N).
#[derive(Clone)]
pub struct Cyclotomic {
    order: u32,
    modulus: Arc<Vec<i64>>,
    coeffs: Vec<BigRational>,
}

impl PartialEq for Cyclotomic {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order && self.coeffs == other.coeffs
    }
}

impl Eq for Cyclotomic {}

impl Cyclotomic {
    pub fn zero(order: u32) -> Self {
        assert!(order >= 1, "cyclotomic order must be positive");
        let modulus = modulus(order);
        let deg = modulus.len() - 1;
        Self { order, modulus, coeffs: vec![BigRational::zero(); deg] }
    }

    pub fn one(order: u32) -> Self {
        Self::from_integer(order, 1)
    }

    pub fn from_integer(order: u32, v: i64) -> Self {
        Self::from_rational(order, BigRational::from_integer(BigInt::from(v)))
    }

    pub fn from_rational(order: u32, v: BigRational) -> Self {
        let mut z = Self::zero(order);
        z.coeffs[0] = v;
        z
    }

    /// zeta_N^k.
    pub fn root_of_unity(order: u32, k: i64) -> Self {
        let k = k.rem_euclid(order as i64) as usize;
        let mut raw = vec![BigRational::zero(); k.max(1) + 1];
        raw[k] = BigRational::one();
        let mut z = Self::zero(order);
        z.coeffs = z.reduce(raw);
        z
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Degree of the field over Q.
    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(|c| c.is_zero())
    }

    /// The value as a rational number when it lies in Q.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.coeffs[1..].iter().all(|c| c.is_zero()) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    pub fn as_integer(&self) -> Option<i64> {
        self.as_rational().filter(|r| r.is_integer()).and_then(|r| r.to_integer().to_i64())
    }

    /// Exponent k when the element equals zeta_N^k.
    pub fn as_root_of_unity(&self) -> Option<u32> {
        (0..self.order).find(|&k| *self == Self::root_of_unity(self.order, k as i64))
    }

    fn reduce(&self, mut raw: Vec<BigRational>) -> Vec<BigRational> {
        let m = &self.modulus;
        let deg = m.len() - 1;
        if raw.len() > deg {
            for k in (deg..raw.len()).rev() {
                let c = std::mem::take(&mut raw[k]);
                if c.is_zero() {
                    continue;
                }
                for (i, &mi) in m.iter().enumerate().take(deg) {
                    if mi != 0 {
                        raw[k - deg + i] -= &c * BigRational::from_integer(BigInt::from(mi));
                    }
                }
            }
        }
        raw.resize(deg, BigRational::zero());
        raw
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.order, other.order, "mixed cyclotomic orders");
    }

    /// Complex conjugate (zeta -> zeta^{-1}).
    pub fn conj(&self) -> Self {
        let n = self.order as usize;
        let mut raw = vec![BigRational::zero(); n.max(self.degree()) + 1];
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let idx = (n - k % n) % n;
            raw[idx] += c;
        }
        let mut z = self.clone();
        z.coeffs = self.reduce(raw);
        z
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        // Solve (multiplication-by-self) * x = e_0 over Q.
        let d = self.degree();
        let mut cols = Vec::with_capacity(d);
        for j in 0..d {
            let mut basis = Self::zero(self.order);
            basis.coeffs[j] = BigRational::one();
            cols.push((self * &basis).coeffs);
        }
        let mut aug: Vec<Vec<BigRational>> = (0..d)
            .map(|i| {
                let mut row: Vec<BigRational> = (0..d).map(|j| cols[j][i].clone()).collect();
                row.push(if i == 0 { BigRational::one() } else { BigRational::zero() });
                row
            })
            .collect();
        for col in 0..d {
            let piv = (col..d).find(|&r| !aug[r][col].is_zero())?;
            aug.swap(col, piv);
            let inv = aug[col][col].recip();
            for v in aug[col].iter_mut() {
                *v = &*v * &inv;
            }
            for r in 0..d {
                if r != col && !aug[r][col].is_zero() {
                    let f = aug[r][col].clone();
                    let pivot_row = aug[col].clone();
                    for (v, p) in aug[r].iter_mut().zip(pivot_row.iter()) {
                        *v -= &f * p;
                    }
                }
            }
        }
        let mut z = Self::zero(self.order);
        z.coeffs = aug.into_iter().map(|row| row[d].clone()).collect();
        Some(z)
    }

    pub fn to_complex(&self) -> Complex64 {
        let n = self.order as f64;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / n;
                Complex64::from_polar(1.0, theta) * c.to_f64().unwrap_or(f64::NAN)
            })
            .sum()
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        let mut z = self.clone();
        for c in z.coeffs.iter_mut() {
            *c = &*c * r;
        }
        z
    }
}

impl fmt::Debug for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, "{}", if c.is_negative() { " - " } else { " + " })?;
            } else if c.is_negative() {
                write!(f, "-")?;
            }
            let a = c.abs();
            match (k, a.is_one()) {
                (0, _) => write!(f, "{}", a)?,
                (1, true) => write!(f, "z{}", self.order)?,
                (1, false) => write!(f, "{}*z{}", a, self.order)?,
                (_, true) => write!(f, "z{}^{}", self.order, k)?,
                (_, false) => write!(f, "{}*z{}^{}", a, self.order, k)?,
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl<'a> Add<&'a Cyclotomic> for &'a Cyclotomic {
    type Output = Cyclotomic;
    fn add(self, rhs: &Cyclotomic) -> Cyclotomic {
        self.check(rhs);
        let mut z = self.clone();
        for (a, b) in z.coeffs.iter_mut().zip(rhs.coeffs.iter()) {
            *a += b;
        }
        z
    }
}

impl<'a> Sub<&'a Cyclotomic> for &'a Cyclotomic {
    type Output = Cyclotomic;
    fn sub(self, rhs: &Cyclotomic) -> Cyclotomic {
        self.check(rhs);
        let mut z = self.clone();
        for (a, b) in z.coeffs.iter_mut().zip(rhs.coeffs.iter()) {
            *a -= b;
        }
        z
    }
}

impl<'a> Mul<&'a Cyclotomic> for &'a Cyclotomic {
    type Output = Cyclotomic;
    fn mul(self, rhs: &Cyclotomic) -> Cyclotomic {
        self.check(rhs);
        let d = self.degree();
        let mut raw = vec![BigRational::zero(); 2 * d];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    raw[i + j] += a * b;
                }
            }
        }
        let mut z = self.clone();
        z.coeffs = self.reduce(raw);
        z
    }
}

impl Neg for &Cyclotomic {
    type Output = Cyclotomic;
    fn neg(self) -> Cyclotomic {
        let mut z = self.clone();
        for c in z.coeffs.iter_mut() {
            *c = -&*c;
        }
        z
    }
}

impl Add for Cyclotomic {
    type Output = Cyclotomic;
    fn add(self, rhs: Cyclotomic) -> Cyclotomic {
        &self + &rhs
    }
}

impl Sub for Cyclotomic {
    type Output = Cyclotomic;
    fn sub(self, rhs: Cyclotomic) -> Cyclotomic {
        &self - &rhs
    }
}

impl Mul for Cyclotomic {
    type Output = Cyclotomic;
    fn mul(self, rhs: Cyclotomic) -> Cyclotomic {
        &self * &rhs
    }
}

impl Neg for Cyclotomic {
    type Output = Cyclotomic;
    fn neg(self) -> Cyclotomic {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclotomic_polynomials() {
        assert_eq!(cyclotomic_polynomial(1), vec![-1, 1]);
        assert_eq!(cyclotomic_polynomial(2), vec![1, 1]);
        assert_eq!(cyclotomic_polynomial(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_polynomial(8), vec![1, 0, 0, 0, 1]);
        assert_eq!(cyclotomic_polynomial(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic_polynomial(12), vec![1, 0, -1, 0, 1]);
    }

    #[test]
    fn roots_multiply_by_adding_exponents() {
        for n in [1u32, 2, 3, 4, 6, 8, 12] {
            for a in 0..n as i64 {
                for b in 0..n as i64 {
                    let lhs = &Cyclotomic::root_of_unity(n, a) * &Cyclotomic::root_of_unity(n, b);
                    assert_eq!(lhs, Cyclotomic::root_of_unity(n, a + b), "n={n} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn sum_of_all_roots_vanishes() {
        for n in [2u32, 3, 4, 8, 12] {
            let mut s = Cyclotomic::zero(n);
            for k in 0..n as i64 {
                s = &s + &Cyclotomic::root_of_unity(n, k);
            }
            assert!(s.is_zero());
        }
    }

    #[test]
    fn inverse_and_conjugate() {
        let n = 8;
        let a = &Cyclotomic::root_of_unity(n, 1) + &Cyclotomic::from_integer(n, 3);
        let inv = a.inverse().unwrap();
        assert!((&a * &inv).is_one());
        let norm = &a * &a.conj();
        assert_eq!(norm.conj(), norm);
        assert!(norm.to_complex().im.abs() < 1e-12);
        assert_eq!(Cyclotomic::root_of_unity(n, 3).conj(), Cyclotomic::root_of_unity(n, 5));
        assert!(Cyclotomic::zero(n).inverse().is_none());
    }

    #[test]
    fn complex_embedding() {
        let i = Cyclotomic::root_of_unity(4, 1).to_complex();
        assert!((i - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert_eq!(Cyclotomic::root_of_unity(8, 6).as_root_of_unity(), Some(6));
    }
}
