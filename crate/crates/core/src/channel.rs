//! Correlated Rayleigh block fading.
//!
//! With `h = R^{1/2} u` and `R = V Ω V^H`, the channel gain `X = ||h||²` is a
//! weighted sum of unit exponentials, `X = Σ_j λ_j |w_j|²`, whose density has
//! the partial-fraction form `f_X(x) = Σ_j (b_j/λ_j) e^{-x/λ_j}` with
//! `b_j = λ_j^{N-1} Π_{n≠j} 1/(λ_j - λ_n)`.

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::quadrature::CraigRule;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

const HERMITIAN_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;
const EIG_RESIDUAL_TOL: f64 = 1e-10;
/// Relative gap below which eigenvalues are treated as repeated.
pub const CLUSTER_GAP: f64 = 1e-9;
/// Relative spacing applied inside a cluster of repeated eigenvalues.
pub const CLUSTER_SPREAD: f64 = 1e-6;
/// Smallest allowed product of the in-cluster spacings; keeps the
/// partial-fraction coefficients within double-double range for large clusters.
const CLUSTER_SPREAD_FLOOR: f64 = 1e-20;

/// Hermitian, unit-diagonal, positive semidefinite antenna correlation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    entries: DMatrix<Complex64>,
}

impl CorrelationMatrix {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        let n = entries.nrows();
        if n == 0 || entries.ncols() != n {
            return Err(Error::InvalidCorrelation(format!(
                "expected a nonempty square matrix, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        for i in 0..n {
            if (entries[(i, i)] - Complex64::new(1.0, 0.0)).norm() > HERMITIAN_TOL {
                return Err(Error::InvalidCorrelation(format!(
                    "diagonal entry {i} is {} (expected 1)",
                    entries[(i, i)]
                )));
            }
            for j in 0..i {
                if (entries[(i, j)] - entries[(j, i)].conj()).norm() > HERMITIAN_TOL {
                    return Err(Error::InvalidCorrelation(format!(
                        "entries ({i},{j}) and ({j},{i}) are not conjugate"
                    )));
                }
            }
        }
        let min_eig = SymmetricEigen::new(entries.clone())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -PSD_TOL {
            return Err(Error::InvalidCorrelation(format!(
                "not positive semidefinite (smallest eigenvalue {min_eig:e})"
            )));
        }
        Ok(CorrelationMatrix { entries })
    }

    /// Exponential model `R(i,j) = rho^|i-j|`.
    pub fn exponential(n: usize, rho: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&rho) {
            return Err(Error::RhoOutOfRange(rho));
        }
        if n == 0 {
            return Err(Error::InvalidCorrelation("order must be positive".into()));
        }
        let entries = DMatrix::from_fn(n, n, |i, j| {
            Complex64::new(rho.powi(i.abs_diff(j) as i32), 0.0)
        });
        CorrelationMatrix::new(entries)
    }

    /// Build from rows of `[re, im]` pairs.
    pub fn from_rows(rows: &[Vec<[f64; 2]>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidCorrelation("matrix must be square".into()));
        }
        let entries = DMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1]));
        CorrelationMatrix::new(entries)
    }

    pub fn order(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }
}

/// Distribution of the channel gain `X`, as consumed by the bounds.
pub trait GainModel: Sync {
    /// Density `f_X(x)`.
    fn pdf(&self, x: f64) -> f64;
    /// Distribution function `Pr[X < x]`.
    fn cdf(&self, x: f64) -> f64;
    /// `Σ_t w_t ∫_γ^∞ Q(d_t √(x·snr/2)) f_X(x) dx` over `(d_t, w_t)` terms.
    fn weighted_tail(&self, terms: &[(f64, f64)], snr: f64, gamma: f64) -> f64;
}

/// Eigen-structure of a correlated Rayleigh channel.
#[derive(Debug, Clone)]
pub struct RayleighChannel {
    eigenvalues: Vec<f64>,
    coeffs: Vec<Dd>,
    sqrt_factor: DMatrix<Complex64>,
    perturbed: bool,
}

/// The part of a channel that goes into run metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSummary {
    #[serde(rename = "N")]
    pub order: usize,
    pub eigenvalues: Vec<f64>,
    pub coeffs: Vec<f64>,
    pub perturbed: bool,
}

impl RayleighChannel {
    /// Eigen-decompose `r`, spread repeated eigenvalues apart, and form the
    /// partial-fraction coefficients and the sampling square root.
    pub fn build(r: &CorrelationMatrix) -> Result<Self> {
        let n = r.order();
        let eig = SymmetricEigen::new(r.entries.clone());
        for (j, &lam) in eig.eigenvalues.iter().enumerate() {
            let v = eig.eigenvectors.column(j);
            let resid = (&r.entries * v - v * Complex64::new(lam, 0.0)).norm();
            if resid.is_nan() || resid >= EIG_RESIDUAL_TOL {
                return Err(Error::Numeric(format!(
                    "eigenpair {j} residual {resid:e} exceeds {EIG_RESIDUAL_TOL:e}"
                )));
            }
            if lam < -PSD_TOL {
                return Err(Error::InvalidCorrelation(format!(
                    "not positive semidefinite (eigenvalue {lam:e})"
                )));
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

        let root = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            n,
            eig.eigenvalues.iter().map(|&l| Complex64::new(l.max(0.0).sqrt(), 0.0)),
        ));
        let sqrt_factor = &eig.eigenvectors * root * eig.eigenvectors.adjoint();

        // Null directions carry no gain; the hypoexponential lives on the rest.
        let floor = 1e-12 * n as f64;
        let sorted: Vec<f64> = order
            .iter()
            .map(|&j| eig.eigenvalues[j])
            .filter(|&l| l > floor)
            .collect();
        let (eigenvalues, perturbed) = spread_clusters(&sorted);
        let coeffs = partial_fraction_coeffs(&eigenvalues);
        Ok(RayleighChannel {
            eigenvalues,
            coeffs,
            sqrt_factor,
            perturbed,
        })
    }

    /// Antenna count `N`.
    pub fn order(&self) -> usize {
        self.sqrt_factor.nrows()
    }

    /// Eigenvalues `λ_j`, descending, after cluster spreading.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Partial-fraction coefficients `b_j`, rounded to `f64`.
    pub fn coeffs(&self) -> Vec<f64> {
        self.coeffs.iter().map(|b| b.to_f64()).collect()
    }

    /// `Σ_j b_j`, formed in extended precision.
    pub fn coeff_sum(&self) -> f64 {
        self.coeffs.iter().copied().sum::<Dd>().to_f64()
    }

    pub fn perturbed(&self) -> bool {
        self.perturbed
    }

    /// `V Ω^{1/2} V^H`.
    pub fn sqrt_factor(&self) -> &DMatrix<Complex64> {
        &self.sqrt_factor
    }

    pub fn summary(&self) -> ChannelSummary {
        ChannelSummary {
            order: self.order(),
            eigenvalues: self.eigenvalues.clone(),
            coeffs: self.coeffs(),
            perturbed: self.perturbed,
        }
    }

    /// Density of the gain `X` at `x`.
    pub fn gain_pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let x = Dd::from_f64(x);
        self.eigenvalues
            .iter()
            .zip(&self.coeffs)
            .map(|(&l, &b)| {
                let l = Dd::from_f64(l);
                b / l * (-(x / l)).exp()
            })
            .sum::<Dd>()
            .to_f64()
            .max(0.0)
    }

    /// `Pr[X < x]`.
    pub fn gain_cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let x = Dd::from_f64(x);
        self.eigenvalues
            .iter()
            .zip(&self.coeffs)
            .map(|(&l, &b)| -(b * (-(x / Dd::from_f64(l))).exp_m1()))
            .sum::<Dd>()
            .to_f64()
            .clamp(0.0, 1.0)
    }

    /// Draw `h = R^{1/2} u` with `u ~ CN(0, I_N)`.
    pub fn sample_fading<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Complex64> {
        let n = self.order();
        let u: Vec<Complex64> = (0..n).map(|_| complex_normal(rng)).collect();
        (0..n)
            .map(|i| (0..n).map(|j| self.sqrt_factor[(i, j)] * u[j]).sum())
            .collect()
    }

    /// Single-distance tail `∫_γ^∞ Q(d √(x·snr/2)) f_X(x) dx`.
    pub fn pep_tail(&self, d: f64, snr: f64, gamma: f64) -> f64 {
        self.weighted_tail(&[(d, 1.0)], snr, gamma)
    }
}

/// One `CN(0, 1)` draw.
pub(crate) fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

/// Spread each run of (relatively) equal eigenvalues by multiplicative
/// offsets `1 + k·CLUSTER_SPREAD`, symmetric about the cluster so the trace is
/// unchanged. Input must be sorted descending.
fn spread_clusters(sorted: &[f64]) -> (Vec<f64>, bool) {
    let mut out = sorted.to_vec();
    let mut perturbed = false;
    let mut start = 0;
    while start < sorted.len() {
        let mut end = start + 1;
        while end < sorted.len() && (sorted[end - 1] - sorted[end]) < CLUSTER_GAP * sorted[end - 1]
        {
            end += 1;
        }
        let size = end - start;
        if size > 1 {
            perturbed = true;
            let centre = (size - 1) as f64 / 2.0;
            let step = cluster_step(size);
            for (i, v) in out[start..end].iter_mut().enumerate() {
                *v *= 1.0 + (centre - i as f64) * step;
            }
        }
        start = end;
    }
    (out, perturbed)
}

fn cluster_step(size: usize) -> f64 {
    CLUSTER_SPREAD.max(CLUSTER_SPREAD_FLOOR.powf(1.0 / (size - 1) as f64))
}

fn partial_fraction_coeffs(lambdas: &[f64]) -> Vec<Dd> {
    lambdas
        .iter()
        .enumerate()
        .map(|(j, &lj)| {
            let lj = Dd::from_f64(lj);
            lambdas
                .iter()
                .enumerate()
                .filter(|&(n, _)| n != j)
                .fold(Dd::ONE, |acc, (_, &ln)| acc * lj / (lj - Dd::from_f64(ln)))
        })
        .collect()
}

/// Per-threshold part of the Craig-form tail.
///
/// For `t = d²·snr / (4 sin²θ)` the Craig integrand summed over branches is
/// `e^{-tγ} Σ_j c_j / (1 + λ_j t)` with `c_j = b_j e^{-γ/λ_j}`. Over a common
/// denominator that is `e^{-tγ} P(t) / Π_j (1 + λ_j t)`; the numerator
/// coefficients are formed once in double-double, after which each node is a
/// cancellation-free rational evaluation.
/// Relative size below which the remaining Craig nodes are dropped.
const TAIL_CUTOFF: f64 = 1e-24;

#[derive(Debug, Clone)]
pub(crate) struct TailKernel {
    lambdas: Vec<f64>,
    numer: Vec<f64>,
}

impl TailKernel {
    pub fn new(ch: &RayleighChannel, gamma: f64) -> Self {
        let n = ch.eigenvalues.len();
        let g = Dd::from_f64(gamma);
        let mut numer = vec![Dd::ZERO; n];
        for (j, (&lj, &bj)) in ch.eigenvalues.iter().zip(&ch.coeffs).enumerate() {
            let cj = bj * (-(g / Dd::from_f64(lj))).exp();
            if cj == Dd::ZERO {
                continue;
            }
            // Π_{m≠j} (1 + λ_m t), ascending powers of t
            let mut poly = vec![Dd::ZERO; n];
            poly[0] = Dd::ONE;
            let mut deg = 0;
            for (m, &lm) in ch.eigenvalues.iter().enumerate() {
                if m == j {
                    continue;
                }
                let lm = Dd::from_f64(lm);
                for p in (1..=deg + 1).rev() {
                    poly[p] = poly[p] + poly[p - 1] * lm;
                }
                deg += 1;
            }
            for (acc, p) in numer.iter_mut().zip(&poly) {
                *acc = *acc + cj * *p;
            }
        }
        TailKernel {
            lambdas: ch.eigenvalues.clone(),
            numer: numer.iter().map(|c| c.to_f64()).collect(),
        }
    }

    #[inline]
    fn eval(&self, t: f64) -> f64 {
        let p = self.numer.iter().rev().fold(0.0, |acc, &c| acc * t + c);
        let q: f64 = self.lambdas.iter().map(|&l| 1.0 + l * t).product();
        p / q
    }

    /// `∫_γ^∞ Q(d √(x·snr/2)) f_X(x) dx` for the threshold this kernel was built at.
    pub fn pep(&self, d: f64, snr: f64, gamma: f64) -> f64 {
        let rule = CraigRule::get();
        let beta = 0.25 * d * d * snr;
        let mut acc = 0.0;
        for (&s2, &w) in rule.sin2.iter().zip(&rule.weights) {
            let t = beta / s2;
            if gamma == 0.0 {
                acc += w * self.eval(t);
                continue;
            }
            // The integrand decreases along the rule, so once it is negligible
            // (or the exponential underflows) the remaining nodes are too.
            let term = w * (-t * gamma).exp() * self.eval(t);
            if term <= TAIL_CUTOFF * acc || term == 0.0 {
                break;
            }
            acc += term;
        }
        acc.max(0.0)
    }
}

impl GainModel for RayleighChannel {
    fn pdf(&self, x: f64) -> f64 {
        self.gain_pdf(x)
    }

    fn cdf(&self, x: f64) -> f64 {
        self.gain_cdf(x)
    }

    fn weighted_tail(&self, terms: &[(f64, f64)], snr: f64, gamma: f64) -> f64 {
        let kernel = TailKernel::new(self, gamma);
        terms
            .iter()
            .map(|&(d, w)| w * kernel.pep(d, snr, gamma))
            .sum()
    }
}
