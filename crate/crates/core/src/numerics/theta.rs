//! Theta functions with characteristics,
//! `theta[c1, c2](z, Omega) = sum_n exp(pi i (n+c1)^T Omega (n+c1) + 2 pi i (n+c1)^T (z+c2))`,
//! summed over an ellipsoid in the Im(Omega)-metric with a certified tail bound.
//!
//! With Y = Im Omega, w = Im z and c = -Y^{-1} w, each term has modulus
//! `exp(pi w^T Y^{-1} w) exp(-pi |v - c|_Y^2)`. Terms with `|v - c|_Y > R` sum to at most
//! `exp(pi w^T Y^{-1} w) exp(-pi R^2 / 2) (2 + sqrt(2 / lambda_min))^g`; R is chosen so that this is
//! below `eps` times the largest term.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub const DEFAULT_MAX_RADIUS: f64 = 40.0;

/// `THETA_MAX_RADIUS` or the default, read once.
pub fn max_radius() -> f64 {
    static CAP: OnceLock<f64> = OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var("THETA_MAX_RADIUS")
            .ok()
            .and_then(|s| s.parse::<f64>().ok())
            .filter(|r| *r > 0.0)
            .unwrap_or(DEFAULT_MAX_RADIUS)
    })
}

#[derive(Clone, Debug)]
pub struct ThetaValue {
    /// theta * exp(-log_normalizer); the normalizer depends only on z and Omega, so it is
    /// common to all characteristics at one point.
    pub normalized: Complex64,
    /// d theta / d z_k, times exp(-log_normalizer).
    pub gradient_normalized: Vec<Complex64>,
    /// `pi w^T Y^{-1} w` with w = Im z.
    pub log_normalizer: f64,
    /// Certified bound on the omitted tail (normalized).
    pub tail_bound: f64,
    /// Modulus of the largest term (normalized); the bound is relative to it.
    pub scale: f64,
    pub radius: f64,
    pub terms: usize,
}

impl ThetaValue {
    /// The value itself (may overflow for large Im z).
    pub fn value(&self) -> Complex64 {
        self.normalized * self.log_normalizer.exp()
    }

    pub fn gradient(&self) -> Vec<Complex64> {
        let f = self.log_normalizer.exp();
        self.gradient_normalized.iter().map(|g| g * f).collect()
    }
}

/// Precomputed data for one period matrix.
#[derive(Clone, Debug)]
pub struct ThetaContext {
    g: usize,
    omega: DMatrix<Complex64>,
    y_inv: DMatrix<f64>,
    /// Upper-triangular R with Y = R^T R.
    r: DMatrix<f64>,
    lambda_min: f64,
}

impl ThetaContext {
    pub fn new(omega: &DMatrix<Complex64>) -> Result<Self> {
        let g = omega.nrows();
        let y = omega.map(|c| c.im);
        let y = (&y + y.transpose()) * 0.5;
        let chol = y
            .clone()
            .cholesky()
            .ok_or_else(|| Error::InvalidPeriodMatrix("Im Omega is not positive definite".into()))?;
        let r = chol.l().transpose();
        let y_inv = chol.inverse();
        let lambda_min = y.symmetric_eigenvalues().min();
        Ok(Self { g, omega: omega.clone(), y_inv, r, lambda_min })
    }

    pub fn genus(&self) -> usize {
        self.g
    }

    fn tail_factor(&self) -> f64 {
        (2.0 + (2.0 / self.lambda_min).sqrt()).powi(self.g as i32)
    }

    /// Evaluate with relative tail `eps` and radius cap `cap`.
    pub fn eval_capped(&self, c1: &[f64], c2: &[f64], z: &[Complex64], eps: f64, cap: f64) -> Result<ThetaValue> {
        let g = self.g;
        assert!(c1.len() == g && c2.len() == g && z.len() == g, "dimension mismatch");
        let w = DVector::from_fn(g, |i, _| z[i].im);
        let centre = -(&self.y_inv * &w);
        let growth = PI * w.dot(&(&self.y_inv * &w));
        // u = n + c1 - centre; the rounded lattice point bounds the distance to the nearest one.
        let shift: Vec<f64> = (0..g).map(|i| c1[i] - centre[i]).collect();
        let nearest: Vec<f64> = shift.iter().map(|s| s - s.round()).collect();
        let d0 = self.y_norm_sq(&nearest);
        let log_factor = self.tail_factor().ln();
        // relative tail = exp(pi d_min^2 - pi R^2 / 2) * factor <= exp(pi d0 - pi R^2 / 2) * factor
        let radius_for = |e: f64| (2.0 / PI * (PI * d0 + log_factor - e.ln())).max(0.0).sqrt();
        let radius = radius_for(eps);
        if radius > cap {
            let achieved = (PI * d0 - PI * cap * cap / 2.0 + log_factor).exp();
            return Err(Error::TruncationUnreachable { requested: eps, radius: cap, achieved });
        }
        let mut value = Complex64::new(0.0, 0.0);
        let mut gradient = vec![Complex64::new(0.0, 0.0); g];
        let mut max_exp = f64::NEG_INFINITY;
        let mut terms = 0usize;
        let zc: Vec<Complex64> = (0..g).map(|i| z[i] + c2[i]).collect();
        self.enumerate(&shift, radius, &mut |n: &[i64]| {
            let v: Vec<f64> = (0..g).map(|i| n[i] as f64 + c1[i]).collect();
            let mut quad = Complex64::new(0.0, 0.0);
            for i in 0..g {
                for j in 0..g {
                    quad += self.omega[(i, j)] * (v[i] * v[j]);
                }
            }
            let lin: Complex64 = (0..g).map(|i| zc[i] * v[i]).sum();
            let ex = Complex64::i() * PI * quad + Complex64::i() * 2.0 * PI * lin - growth;
            max_exp = max_exp.max(ex.re);
            let t = ex.exp();
            value += t;
            for k in 0..g {
                gradient[k] += t * Complex64::new(0.0, 2.0 * PI * v[k]);
            }
            terms += 1;
        });
        let scale = if terms > 0 { max_exp.exp() } else { (-PI * d0).exp() };
        let tail_bound = (-PI * radius * radius / 2.0 + log_factor).exp();
        Ok(ThetaValue {
            normalized: value,
            gradient_normalized: gradient,
            log_normalizer: growth,
            tail_bound,
            scale,
            radius,
            terms,
        })
    }

    pub fn eval(&self, c1: &[f64], c2: &[f64], z: &[Complex64], eps: f64) -> Result<ThetaValue> {
        self.eval_capped(c1, c2, z, eps, max_radius())
    }

    fn y_norm_sq(&self, u: &[f64]) -> f64 {
        let v = DVector::from_column_slice(u);
        let rv = &self.r * v;
        rv.dot(&rv)
    }

    /// Visit every n in Z^g with |n + shift|_Y <= radius.
    fn enumerate(&self, shift: &[f64], radius: f64, visit: &mut dyn FnMut(&[i64])) {
        let g = self.g;
        let mut n = vec![0i64; g];
        self.descend(g, shift, radius * radius, &mut n, visit);
    }

    fn descend(&self, level: usize, shift: &[f64], budget: f64, n: &mut Vec<i64>, visit: &mut dyn FnMut(&[i64])) {
        if level == 0 {
            visit(n);
            return;
        }
        let i = level - 1;
        let rii = self.r[(i, i)];
        // row i of R u: r_ii u_i + sum_{j > i} r_ij u_j
        let tail: f64 = (i + 1..self.g).map(|j| self.r[(i, j)] * (n[j] as f64 + shift[j])).sum();
        let centre = -tail / rii - shift[i];
        let half = budget.max(0.0).sqrt() / rii;
        let lo = (centre - half).ceil() as i64;
        let hi = (centre + half).floor() as i64;
        for k in lo..=hi {
            let t = rii * (k as f64 + shift[i]) + tail;
            let rest = budget - t * t;
            if rest < -1e-12 {
                continue;
            }
            n[i] = k;
            self.descend(i, shift, rest, n, visit);
        }
        n[i] = 0;
    }
}

/// One-shot evaluation.
pub fn theta_char(c1: &[f64], c2: &[f64], z: &[Complex64], omega: &DMatrix<Complex64>, eps: f64) -> Result<ThetaValue> {
    ThetaContext::new(omega)?.eval(c1, c2, z, eps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn omega1(t: Complex64) -> DMatrix<Complex64> {
        DMatrix::from_element(1, 1, t)
    }

    #[test]
    fn value_at_i() {
        let v = theta_char(&[0.0], &[0.0], &[Complex64::new(0.0, 0.0)], &omega1(Complex64::i()), 1e-12).unwrap();
        // independent direct summation to |n| <= 30
        assert!((v.value().re - 1.0864348112133082).abs() < 1e-14);
        assert!(v.value().im.abs() < 1e-15);
        assert!(v.tail_bound < 1e-12 * v.scale);
    }

    #[test]
    fn odd_characteristic_vanishes_at_zero() {
        let om = DMatrix::from_row_slice(
            2,
            2,
            &[Complex64::new(0.3, 1.2), Complex64::new(0.1, 0.2), Complex64::new(0.1, 0.2), Complex64::new(-0.4, 1.5)],
        );
        let z = [Complex64::new(0.0, 0.0); 2];
        let v = theta_char(&[0.5, 0.0], &[0.5, 0.0], &z, &om, 1e-12).unwrap();
        assert!(v.value().norm() < 1e-12);
    }

    #[test]
    fn unreachable_epsilon_errors() {
        let ctx = ThetaContext::new(&omega1(Complex64::new(0.0, 0.05))).unwrap();
        let e = ctx.eval_capped(&[0.0], &[0.0], &[Complex64::new(0.0, 0.0)], 1e-12, 2.0);
        assert!(matches!(e, Err(Error::TruncationUnreachable { .. })));
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let om = omega1(Complex64::new(0.2, 0.9));
        let ctx = ThetaContext::new(&om).unwrap();
        let z = Complex64::new(0.31, -0.12);
        let h = 1e-6;
        let a = ctx.eval(&[0.25], &[0.0], &[z + h], 1e-14).unwrap().value();
        let b = ctx.eval(&[0.25], &[0.0], &[z - h], 1e-14).unwrap().value();
        let d = ctx.eval(&[0.25], &[0.0], &[z], 1e-14).unwrap().gradient()[0];
        assert!(((a - b) / (2.0 * h) - d).norm() < 1e-6 * d.norm().max(1.0));
    }
}
