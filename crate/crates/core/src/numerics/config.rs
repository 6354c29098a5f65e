use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finite_heisenberg::PolarizationType;

pub const DEFAULT_EPSILON: f64 = 1e-12;
pub const DEFAULT_SAMPLES: usize = 100;
pub const DEFAULT_SEED: u64 = 7;

/// Period matrix Omega of a principally polarized B = C^g / (Z^g + Omega Z^g) and run settings.
#[derive(Clone, Debug)]
pub struct PeriodMatrixConfig {
    pub g: usize,
    pub delta: PolarizationType,
    pub omega: DMatrix<Complex64>,
    pub seed: u64,
    pub epsilon: f64,
    pub samples: usize,
    /// True when omega was drawn from the seed.
    pub random: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum OmegaSpec {
    Named(String),
    Matrix(Vec<Vec<[f64; 2]>>),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    g: Option<usize>,
    delta: PolarizationType,
    omega: OmegaSpec,
    seed: Option<u64>,
    epsilon: Option<f64>,
    samples: Option<usize>,
}

impl PeriodMatrixConfig {
    /// `Omega = S + i (Q^T Q + g I)`, S symmetric and Q with entries uniform in [-1, 1].
    pub fn random(delta: PolarizationType, seed: u64) -> Self {
        let g = delta.genus();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = DMatrix::<f64>::zeros(g, g);
        for i in 0..g {
            for j in i..g {
                let v = rng.gen_range(-1.0..=1.0);
                s[(i, j)] = v;
                s[(j, i)] = v;
            }
        }
        let q = DMatrix::<f64>::from_fn(g, g, |_, _| rng.gen_range(-1.0..=1.0));
        let y = q.transpose() * &q + DMatrix::<f64>::identity(g, g) * g as f64;
        let omega = DMatrix::from_fn(g, g, |i, j| Complex64::new(s[(i, j)], y[(i, j)]));
        Self { g, delta, omega, seed, epsilon: DEFAULT_EPSILON, samples: DEFAULT_SAMPLES, random: true }
    }

    /// Copy epsilon and the sample count from `other`.
    pub fn with_settings(mut self, other: &Self) -> Self {
        self.epsilon = other.epsilon;
        self.samples = other.samples;
        self
    }

    pub fn new(delta: PolarizationType, omega: DMatrix<Complex64>) -> Result<Self> {
        let cfg = Self {
            g: delta.genus(),
            delta,
            omega,
            seed: DEFAULT_SEED,
            epsilon: DEFAULT_EPSILON,
            samples: DEFAULT_SAMPLES,
            random: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let g = raw.g.unwrap_or(raw.delta.genus());
        if g != raw.delta.genus() {
            return Err(Error::Config(format!("g = {g} but delta {} has length {}", raw.delta, raw.delta.genus())));
        }
        let seed = raw.seed.unwrap_or(DEFAULT_SEED);
        let mut cfg = match raw.omega {
            OmegaSpec::Named(name) if name == "random" => Self::random(raw.delta, seed),
            OmegaSpec::Named(name) => return Err(Error::Config(format!("unknown omega {name:?}"))),
            OmegaSpec::Matrix(rows) => {
                if rows.len() != g || rows.iter().any(|r| r.len() != g) {
                    return Err(Error::Config(format!("omega must be {g}x{g}")));
                }
                let omega = DMatrix::from_fn(g, g, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1]));
                Self { g, delta: raw.delta, omega, seed, epsilon: 0.0, samples: 0, random: false }
            }
        };
        cfg.seed = seed;
        cfg.epsilon = raw.epsilon.unwrap_or(DEFAULT_EPSILON);
        cfg.samples = raw.samples.unwrap_or(DEFAULT_SAMPLES);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let omega: Vec<Vec<[f64; 2]>> =
            (0..self.g).map(|i| (0..self.g).map(|j| [self.omega[(i, j)].re, self.omega[(i, j)].im]).collect()).collect();
        serde_json::json!({
            "g": self.g,
            "delta": self.delta,
            "omega": omega,
            "seed": self.seed,
            "epsilon": self.epsilon,
            "samples": self.samples,
        })
    }

    pub fn imaginary_part(&self) -> DMatrix<f64> {
        self.omega.map(|c| c.im)
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.g;
        if self.omega.nrows() != g || self.omega.ncols() != g {
            return Err(Error::InvalidPeriodMatrix(format!("expected {g}x{g}")));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Config(format!("epsilon {} outside (0, 1)", self.epsilon)));
        }
        for i in 0..g {
            for j in 0..g {
                if (self.omega[(i, j)] - self.omega[(j, i)]).norm() > 1e-12 {
                    return Err(Error::InvalidPeriodMatrix(format!("not symmetric at ({i},{j})")));
                }
            }
        }
        let y = self.imaginary_part();
        let y = (&y + y.transpose()) * 0.5;
        let min_eig = y.symmetric_eigenvalues().min();
        if !(min_eig > 0.0) {
            return Err(Error::InvalidPeriodMatrix(format!("Im Omega has eigenvalue {min_eig:e}")));
        }
        Ok(())
    }
}
