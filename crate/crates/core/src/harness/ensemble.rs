//! Seeded random test ensembles.
//!
//! Randomness comes from `SplitMix64`, seeded per trial from
//! `(seed, trial)`, so every instance is reproducible bit for bit.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use rand_xoshiro::SplitMix64;

use crate::error::{PerturbError, Result};
use crate::jacobi;
use crate::matrix::{DenseMatrix, HermitianMatrix};

/// `{1e-1, 10^-1.5, 1e-2, 10^-2.5, 1e-3}`
pub fn default_t_grid() -> Vec<f64> {
    (0..5).map(|k| 10f64.powf(-1.0 - 0.5 * k as f64)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Predictor {
    FirstOrder,
    SchurFull,
    SchurSimplified,
    RsSecondOrder,
    EigvecFirstOrder,
    /// `(aligned U(t) − U)/t` against `U'(0)`.
    EigvecDifferenceQuotient,
    UApResidual,
}

impl Predictor {
    pub const ALL: [Predictor; 7] = [
        Predictor::FirstOrder,
        Predictor::SchurFull,
        Predictor::SchurSimplified,
        Predictor::RsSecondOrder,
        Predictor::EigvecFirstOrder,
        Predictor::EigvecDifferenceQuotient,
        Predictor::UApResidual,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Predictor::FirstOrder => "first_order",
            Predictor::SchurFull => "schur_full",
            Predictor::SchurSimplified => "schur_simplified",
            Predictor::RsSecondOrder => "rs_second_order",
            Predictor::EigvecFirstOrder => "eigvec_first_order",
            Predictor::EigvecDifferenceQuotient => "eigvec_difference_quotient",
            Predictor::UApResidual => "u_ap_residual",
        }
    }

    /// Theoretical order of the error metric in `t`.
    pub fn expected_order(self) -> f64 {
        match self {
            Predictor::FirstOrder | Predictor::EigvecFirstOrder | Predictor::UApResidual => 2.0,
            Predictor::SchurFull | Predictor::SchurSimplified | Predictor::RsSecondOrder => 3.0,
            Predictor::EigvecDifferenceQuotient => 1.0,
        }
    }
}

impl fmt::Display for Predictor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Predictor {
    type Err = PerturbError;

    fn from_str(s: &str) -> Result<Self> {
        Predictor::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| PerturbError::InvalidConfig(format!("unknown predictor '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub seed: u64,
    pub n: usize,
    /// Eigenvalue multiplicities of `A`, summing to `n`.
    pub block_spec: Vec<usize>,
    /// Strictly decreasing positive step sizes.
    pub t_grid: Vec<f64>,
    pub trials: usize,
    pub predictor: Predictor,
}

impl EnsembleConfig {
    pub fn new(seed: u64, block_spec: Vec<usize>, trials: usize, predictor: Predictor) -> Self {
        EnsembleConfig {
            seed,
            n: block_spec.iter().sum(),
            block_spec,
            t_grid: default_t_grid(),
            trials,
            predictor,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.block_spec.contains(&0) {
            return Err(PerturbError::InvalidConfig("block sizes must be positive".into()));
        }
        if self.block_spec.iter().sum::<usize>() != self.n || self.n == 0 {
            return Err(PerturbError::InvalidConfig(format!(
                "block sizes {:?} do not sum to n = {}",
                self.block_spec, self.n
            )));
        }
        if self.trials == 0 {
            return Err(PerturbError::InvalidConfig("trials must be at least 1".into()));
        }
        if self.t_grid.len() < 2
            || self.t_grid.iter().any(|&t| t.is_nan() || t <= 0.0 || !t.is_finite())
            || self.t_grid.windows(2).any(|w| w[1] >= w[0])
        {
            return Err(PerturbError::InvalidConfig(
                "t grid must hold at least two positive, strictly decreasing values".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub a: HermitianMatrix,
    pub f: HermitianMatrix,
    /// Eigenvalues of `A` with multiplicity, non-increasing.
    pub spectrum: Vec<f64>,
}

pub fn trial_rng(seed: u64, trial: usize) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed ^ (trial as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Hermitian matrix with i.i.d. standard normal real diagonal and complex
/// normal off-diagonal entries of unit variance.
pub fn random_hermitian(rng: &mut SplitMix64, n: usize) -> HermitianMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = DenseMatrix::zeros(n, n);
    for i in 0..n {
        let d: f64 = StandardNormal.sample(rng);
        m[(i, i)] = Complex64::new(d, 0.0);
        for j in (i + 1)..n {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            let z = Complex64::new(re * s, im * s);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    HermitianMatrix::new(m).expect("constructed Hermitian")
}

/// Eigenvectors of a random Hermitian draw.
pub fn random_unitary(rng: &mut SplitMix64, n: usize) -> DenseMatrix {
    let h = random_hermitian(rng, n);
    jacobi::eigh_default(&h).expect("oracle converges on random input").u
}

/// `A = Q diag(λ) Q*` with the multiplicities of `cfg.block_spec` and
/// distinct values at least 1 apart; `F` random Hermitian with unit
/// operator norm.
pub fn generate_instance(cfg: &EnsembleConfig, trial: usize) -> Instance {
    let mut rng = trial_rng(cfg.seed, trial);
    let gap = Uniform::new(1.0, 2.0).expect("valid range");
    let start = Uniform::new(-1.0, 1.0).expect("valid range");
    let top: f64 = start.sample(&mut rng);
    let mut spectrum = Vec::with_capacity(cfg.n);
    let mut value = top;
    for (k, &mult) in cfg.block_spec.iter().enumerate() {
        if k > 0 {
            value -= gap.sample(&mut rng);
        }
        spectrum.extend(std::iter::repeat_n(value, mult));
    }
    let q = random_unitary(&mut rng, cfg.n);
    let scaled = DenseMatrix::from_fn(cfg.n, cfg.n, |i, j| q[(i, j)] * spectrum[j]);
    let a = HermitianMatrix::symmetrized(&scaled * &q.adjoint());
    let raw = random_hermitian(&mut rng, cfg.n);
    let f = raw.scale(1.0 / raw.operator_norm());
    Instance { a, f, spectrum }
}
