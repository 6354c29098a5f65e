//! phi_L and phi_{M^2} on C^g.
//!
//! With Q = diag(q), the functions `theta_a(z) = theta[a/d, 0](Q z, Q Omega Q)`, a in K_1(delta),
//! form the delta-function basis of H^0(A, L) for L = pi^* M, and the section s_j has value
//! `sum_y s_j[y] theta_y(z)`. On B, H^0(M^2) has the basis `theta[c/2, 0](2z, 2 Omega)`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::lattice::IsogenyModel;
use crate::numerics::projective::ProjectivePoint;
use crate::numerics::theta::ThetaContext;

const BASE_POINT_TOL: f64 = 1e-13;

#[derive(Clone, Debug)]
pub struct SectionEvaluator {
    pub model: IsogenyModel,
    ctx_a: ThetaContext,
    ctx_b: ThetaContext,
    ctx_2: ThetaContext,
    /// `coeffs[j][y]`: s_j in the delta-function basis.
    coeffs: Vec<Vec<Complex64>>,
    chars: Vec<Vec<f64>>,
    eps: f64,
}

impl SectionEvaluator {
    pub fn new(model: &IsogenyModel) -> Result<Self> {
        let g = model.g();
        let omega = &model.config.omega;
        let qm = DMatrix::from_fn(g, g, |i, j| if i == j { Complex64::new(model.q[i] as f64, 0.0) } else { Complex64::new(0.0, 0.0) });
        let omega_a = &qm * omega * &qm;
        let delta = model.delta();
        let chars = delta
            .k1_elements()
            .iter()
            .map(|a| a.iter().zip(delta.divisors()).map(|(&ai, &di)| ai as f64 / di as f64).collect())
            .collect();
        let coeffs = model.basis.vectors.iter().map(|v| v.iter().map(|c| c.to_complex()).collect()).collect();
        Ok(Self {
            model: model.clone(),
            ctx_a: ThetaContext::new(&omega_a)?,
            ctx_b: ThetaContext::new(omega)?,
            ctx_2: ThetaContext::new(&(omega * Complex64::new(2.0, 0.0)))?,
            coeffs,
            chars,
            eps: model.config.epsilon,
        })
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn scaled(&self, z: &[Complex64]) -> Vec<Complex64> {
        z.iter().zip(&self.model.q).map(|(zi, &qi)| zi * qi as f64).collect()
    }

    /// Values of theta_y at z, with d/dz and the largest term scale.
    fn basis_values(&self, z: &[Complex64], with_gradient: bool) -> Result<(Vec<Complex64>, Vec<Vec<Complex64>>, f64)> {
        let w = self.scaled(z);
        let zero = vec![0.0; self.model.g()];
        let mut vals = Vec::with_capacity(self.chars.len());
        let mut grads = Vec::new();
        let mut scale: f64 = 0.0;
        for c in &self.chars {
            let t = self.ctx_a.eval(c, &zero, &w, self.eps)?;
            scale = scale.max(t.scale);
            vals.push(t.normalized);
            if with_gradient {
                grads.push(t.gradient_normalized.iter().zip(&self.model.q).map(|(gk, &qk)| gk * qk as f64).collect());
            }
        }
        Ok((vals, grads, scale))
    }

    /// `(s_0(z), ..., s_{h-1}(z))` up to a positive factor depending only on Im z.
    pub fn values(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        let (vals, _, scale) = self.basis_values(z, false)?;
        let out = self.combine(&vals);
        if out.iter().all(|v| v.norm() < BASE_POINT_TOL * scale) {
            return Err(Error::BasePointLike);
        }
        Ok(out)
    }

    /// Values and the Jacobian, both scaled by the common theta normalizer at z. `d s_j / d z_k`.
    pub fn values_and_jacobian(&self, z: &[Complex64]) -> Result<(Vec<Complex64>, Vec<Vec<Complex64>>)> {
        let (vals, grads, _) = self.basis_values(z, true)?;
        let g = self.model.g();
        let jac = self
            .coeffs
            .iter()
            .map(|row| {
                (0..g).map(|k| row.iter().zip(&grads).map(|(c, gr)| c * gr[k]).sum()).collect()
            })
            .collect();
        Ok((self.combine(&vals), jac))
    }

    fn combine(&self, vals: &[Complex64]) -> Vec<Complex64> {
        self.coeffs.iter().map(|row| row.iter().zip(vals).map(|(c, v)| c * v).sum()).collect()
    }

    /// phi_L(z).
    pub fn point(&self, z: &[Complex64]) -> Result<ProjectivePoint> {
        ProjectivePoint::new(self.values(z)?)
    }

    /// Second-order theta coordinates of B (up to a common positive factor): `theta[c/2, 0](2z, 2 Omega)`, c in {0,1}^g, last bit fastest.
    pub fn theta2(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        let g = self.model.g();
        let w: Vec<Complex64> = z.iter().map(|v| v * 2.0).collect();
        let zero = vec![0.0; g];
        (0..1usize << g)
            .map(|mask| {
                let c: Vec<f64> = (0..g).map(|i| if mask & (1 << (g - 1 - i)) != 0 { 0.5 } else { 0.0 }).collect();
                Ok(self.ctx_2.eval(&c, &zero, &w, self.eps)?.normalized)
            })
            .collect()
    }

    /// `theta[alpha, beta](z, Omega)` on B.
    pub fn theta_b(&self, alpha: &[f64], beta: &[f64], z: &[Complex64]) -> Result<Complex64> {
        Ok(self.ctx_b.eval(alpha, beta, z, self.eps)?.value())
    }
}

/// phi_L(z) for a model.
pub fn eval_sections(model: &IsogenyModel, z: &[Complex64]) -> Result<ProjectivePoint> {
    SectionEvaluator::new(model)?.point(z)
}
