//! Union bound and the deep-fade threshold bound.
//!
//! The threshold bound charges every channel realization with gain below `γ`
//! as an error and applies the union bound only above it:
//!
//! ```text
//! G(γ) = Pr[X < γ] + (1/M) Σ_i Σ_d A_i(d) ∫_γ^∞ Q(d √(x·E/2σ²)) f_X(x) dx
//! ```
//!
//! `dG/dγ = f_X(γ)·h(γ)` with `h(γ) = 1 − (1/M) Σ_i Σ_d A_i(d) Q(d √(E·γ/2σ²))`.
//! `h` is strictly increasing from `h(0) ≤ 0` (for `M ≥ 3`) to 1, so the
//! minimizer of `G` is the unique root of `h`, found here by bisection.

use crate::channel::{GainModel, RayleighChannel};
use crate::constellation::{DistanceSpectrum, DEFAULT_BIN_TOL};
use crate::error::{Error, Result};
use crate::special::q_function;
use serde::{Deserialize, Serialize};

/// Largest upper bracket tried before giving up on the stationarity root.
const BRACKET_LIMIT: f64 = (1u64 << 60) as f64;
const ROOT_RESIDUAL: f64 = 1e-9;

/// Signal-to-noise ratio `E/σ²` with `σ² = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkParams {
    snr: f64,
}

impl LinkParams {
    pub fn new(snr: f64) -> Result<Self> {
        if !snr.is_finite() || snr <= 0.0 {
            return Err(Error::Config(format!("snr must be positive and finite, got {snr}")));
        }
        Ok(LinkParams { snr })
    }

    pub fn from_db(snr_db: f64) -> Result<Self> {
        LinkParams::new(10f64.powf(snr_db / 10.0))
    }

    /// Linear `E/σ²`.
    pub fn snr(&self) -> f64 {
        self.snr
    }

    pub fn snr_db(&self) -> f64 {
        10.0 * self.snr.log10()
    }
}

/// Both bounds at one SNR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundPoint {
    pub snr_db: f64,
    pub union_bound: f64,
    pub new_bound: f64,
    pub gamma_star: f64,
}

/// Threshold bound and the threshold that achieves it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewBound {
    pub value: f64,
    pub gamma_star: f64,
}

/// Bound evaluation for one spectrum over one gain model.
///
/// The spectrum is pooled once into `(distance, Σ_i A_i(d)/M)` terms, which
/// keeps per-signal spectra exact while letting every evaluation walk a single
/// flat list.
#[derive(Debug, Clone)]
pub struct BoundEvaluator<'a, G: GainModel = RayleighChannel> {
    terms: Vec<(f64, f64)>,
    gain: &'a G,
}

impl<'a, G: GainModel> BoundEvaluator<'a, G> {
    pub fn new(spectrum: &DistanceSpectrum, gain: &'a G) -> Self {
        BoundEvaluator {
            terms: spectrum.pooled_terms(DEFAULT_BIN_TOL),
            gain,
        }
    }

    /// Pooled `(distance, weight)` terms.
    pub fn terms(&self) -> &[(f64, f64)] {
        &self.terms
    }

    /// `(1/M) Σ_i Σ_d A_i(d) P(d)`; may exceed 1.
    pub fn union_bound(&self, link: LinkParams) -> f64 {
        self.objective_g(link, 0.0)
    }

    /// `G(γ)`. At `γ = 0` this is the union bound, bit for bit.
    pub fn objective_g(&self, link: LinkParams, gamma: f64) -> f64 {
        let gamma = gamma.max(0.0);
        self.gain.cdf(gamma) + self.gain.weighted_tail(&self.terms, link.snr(), gamma)
    }

    /// `h(γ)`, the bracketed factor of `dG/dγ`.
    pub fn stationarity_h(&self, link: LinkParams, gamma: f64) -> f64 {
        let scale = (link.snr() * gamma.max(0.0) / 2.0).sqrt();
        let s: f64 = self
            .terms
            .iter()
            .map(|&(d, w)| w * q_function(d * scale))
            .sum();
        1.0 - s
    }

    /// Root of `h`, or 0 when `h(0) ≥ 0` (no interior minimum).
    pub fn find_gamma_star(&self, link: LinkParams) -> Result<f64> {
        let h = |g: f64| self.stationarity_h(link, g);
        if h(0.0) >= 0.0 {
            return Ok(0.0);
        }
        let mut hi = 1.0;
        let mut h_hi = h(hi);
        while h_hi <= 0.0 {
            hi *= 2.0;
            if hi > BRACKET_LIMIT {
                return Err(Error::RootNotBracketed(hi));
            }
            h_hi = h(hi);
        }
        let mut lo = if hi > 1.0 { hi / 2.0 } else { 0.0 };
        let mut h_lo = h(lo);
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let h_mid = h(mid);
            if h_mid == 0.0 {
                return Ok(mid);
            }
            if h_mid < 0.0 {
                lo = mid;
                h_lo = h_mid;
            } else {
                hi = mid;
                h_hi = h_mid;
            }
            let width_ok = hi - lo < f64::max(1e-12, 1e-10 * lo);
            if width_ok && h_lo.abs().min(h_hi.abs()) < ROOT_RESIDUAL {
                break;
            }
        }
        Ok(if h_lo.abs() <= h_hi.abs() { lo } else { hi })
    }

    /// `min_γ G(γ)` and its argument.
    pub fn new_bound(&self, link: LinkParams) -> Result<NewBound> {
        let gamma_star = self.find_gamma_star(link)?;
        let value = self.objective_g(link, gamma_star);
        if !value.is_finite() {
            return Err(Error::Numeric(format!(
                "objective not finite at gamma* = {gamma_star:e}"
            )));
        }
        Ok(NewBound { value, gamma_star })
    }

    /// Union and threshold bounds at one SNR in dB.
    pub fn point(&self, snr_db: f64) -> Result<BoundPoint> {
        let link = LinkParams::from_db(snr_db)?;
        let union_bound = self.union_bound(link);
        let nb = self.new_bound(link)?;
        Ok(BoundPoint {
            snr_db,
            union_bound,
            new_bound: nb.value,
            gamma_star: nb.gamma_star,
        })
    }
}

/// `∫_γ^∞ Q(d √(x·E/2σ²)) f_X(x) dx` through the Craig representation.
pub fn pep_tail(d: f64, link: LinkParams, ch: &RayleighChannel, gamma: f64) -> f64 {
    assert!(d > 0.0, "distance must be positive");
    ch.pep_tail(d, link.snr(), gamma.max(0.0))
}

pub fn union_bound(spec: &DistanceSpectrum, link: LinkParams, ch: &RayleighChannel) -> f64 {
    BoundEvaluator::new(spec, ch).union_bound(link)
}

pub fn objective_g(
    spec: &DistanceSpectrum,
    link: LinkParams,
    ch: &RayleighChannel,
    gamma: f64,
) -> f64 {
    BoundEvaluator::new(spec, ch).objective_g(link, gamma)
}

/// `h(γ)` depends only on the spectrum and SNR.
pub fn stationarity_h(spec: &DistanceSpectrum, link: LinkParams, gamma: f64) -> f64 {
    let terms = spec.pooled_terms(DEFAULT_BIN_TOL);
    let scale = (link.snr() * gamma.max(0.0) / 2.0).sqrt();
    1.0 - terms
        .iter()
        .map(|&(d, w)| w * q_function(d * scale))
        .sum::<f64>()
}

pub fn find_gamma_star(spec: &DistanceSpectrum, link: LinkParams) -> Result<f64> {
    // the gain model plays no part in locating the root
    struct NoGain;
    impl GainModel for NoGain {
        fn pdf(&self, _: f64) -> f64 {
            0.0
        }
        fn cdf(&self, _: f64) -> f64 {
            0.0
        }
        fn weighted_tail(&self, _: &[(f64, f64)], _: f64, _: f64) -> f64 {
            0.0
        }
    }
    BoundEvaluator::new(spec, &NoGain).find_gamma_star(link)
}

pub fn new_bound(spec: &DistanceSpectrum, link: LinkParams, ch: &RayleighChannel) -> Result<NewBound> {
    BoundEvaluator::new(spec, ch).new_bound(link)
}
