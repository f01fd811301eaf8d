//! Monte Carlo estimation of the exact ML block error probability.
//!
//! Trial `t` draws everything it needs from its own ChaCha stream (`seed`,
//! stream `t`), so an estimate is a pure function of the configuration and
//! seed no matter how trials are spread over threads.

use crate::bounds::LinkParams;
use crate::channel::{complex_normal, RayleighChannel};
use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::exec::Exec;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Largest constellation simulated by exhaustive search.
pub const MAX_SIMULATED_SIGNALS: usize = 10_000;
const CHUNK: usize = 4096;
const WILSON_Z: f64 = 1.959_963_984_540_054;

/// Simulated block error rate with a 95% Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub trials: u64,
    pub errors: u64,
    pub bler: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

impl McEstimate {
    pub fn from_counts(trials: u64, errors: u64, seed: u64) -> Self {
        let n = trials as f64;
        let p = errors as f64 / n;
        let z2 = WILSON_Z * WILSON_Z;
        let denom = 1.0 + z2 / n;
        let centre = (p + z2 / (2.0 * n)) / denom;
        let half = WILSON_Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        McEstimate {
            trials,
            errors,
            bler: p,
            ci_low: (centre - half).max(0.0).min(p),
            ci_high: (centre + half).min(1.0).max(p),
            seed,
        }
    }
}

/// ML detector with the signal energies cached.
#[derive(Debug, Clone)]
pub struct Detector<'a> {
    constellation: &'a Constellation,
    energies: Vec<f64>,
}

impl<'a> Detector<'a> {
    pub fn new(constellation: &'a Constellation) -> Self {
        let energies = constellation
            .signals()
            .map(|s| s.iter().map(|z| z.norm_sqr()).sum())
            .collect();
        Detector {
            constellation,
            energies,
        }
    }

    /// Index maximizing `ξ_k = 2 Re{r^H H s_k} − √E ||s_k||² Σ_n |h_n|²`;
    /// ties go to the lowest index.
    pub fn detect(&self, r: &[Complex64], h: &[Complex64], energy: f64) -> Result<usize> {
        let k = self.constellation.dim();
        let n = h.len();
        if n == 0 || r.len() != n * k {
            return Err(Error::DimensionMismatch(format!(
                "received vector has {} entries, expected N·K = {}·{}",
                r.len(),
                n,
                k
            )));
        }
        let gain: f64 = h.iter().map(|z| z.norm_sqr()).sum();
        // r^H H s = Σ_κ s_κ conj(z_κ), z = Σ_n conj(h_n) r_n
        let mut z = vec![Complex64::new(0.0, 0.0); k];
        for (hn, block) in h.iter().zip(r.chunks_exact(k)) {
            let hc = hn.conj();
            for (zk, rk) in z.iter_mut().zip(block) {
                *zk += hc * rk;
            }
        }
        let penalty = energy.sqrt() * gain;
        let mut best = 0;
        let mut best_metric = f64::NEG_INFINITY;
        for (idx, s) in self.constellation.signals().enumerate() {
            let corr: f64 = s
                .iter()
                .zip(&z)
                .map(|(a, b)| a.re * b.re + a.im * b.im)
                .sum();
            let metric = 2.0 * corr - penalty * self.energies[idx];
            if metric > best_metric {
                best_metric = metric;
                best = idx;
            }
        }
        Ok(best)
    }
}

/// One-shot ML decision; see [`Detector::detect`].
pub fn ml_detect(
    r: &[Complex64],
    h: &[Complex64],
    c: &Constellation,
    energy: f64,
) -> Result<usize> {
    Detector::new(c).detect(r, h, energy)
}

fn trial_error(
    base: &ChaCha8Rng,
    trial: u64,
    detector: &Detector,
    ch: &RayleighChannel,
    energy: f64,
) -> bool {
    let c = detector.constellation;
    let mut rng = base.clone();
    rng.set_stream(trial);
    let h = ch.sample_fading(&mut rng);
    let sent = rng.random_range(0..c.len());
    let amp = energy.sqrt();
    let s = c.signal(sent);
    let r: Vec<Complex64> = h
        .iter()
        .flat_map(|hn| s.iter().map(move |sk| amp * hn * sk))
        .map(|clean| clean + complex_normal(&mut rng))
        .collect();
    detector.detect(&r, &h, energy).expect("dimensions agree by construction") != sent
}

/// Monte Carlo BLER. With `min_errors > 0`, stops at the first trial where
/// `errors ≥ min_errors` and `trials ≥ 10·min_errors`.
pub fn mc_bler(
    c: &Constellation,
    ch: &RayleighChannel,
    link: LinkParams,
    trials: u64,
    seed: u64,
    min_errors: u64,
) -> Result<McEstimate> {
    mc_bler_with(Exec::default(), c, ch, link, trials, seed, min_errors)
}

/// [`mc_bler`] with an explicit execution mode.
pub fn mc_bler_with(
    exec: Exec,
    c: &Constellation,
    ch: &RayleighChannel,
    link: LinkParams,
    trials: u64,
    seed: u64,
    min_errors: u64,
) -> Result<McEstimate> {
    if trials == 0 {
        return Err(Error::Config("Monte Carlo needs at least one trial".into()));
    }
    if c.len() > MAX_SIMULATED_SIGNALS {
        return Err(Error::Config(format!(
            "M = {} exceeds the simulation limit {MAX_SIMULATED_SIGNALS}",
            c.len()
        )));
    }
    let base = ChaCha8Rng::seed_from_u64(seed);
    let detector = Detector::new(c);
    let energy = link.snr();
    let floor = min_errors.saturating_mul(10);
    let (mut done, mut errors) = (0u64, 0u64);
    'outer: while done < trials {
        let len = (trials - done).min(CHUNK as u64) as usize;
        let start = done;
        let flags = exec.map(len, |i| trial_error(&base, start + i as u64, &detector, ch, energy));
        for flag in flags {
            done += 1;
            errors += u64::from(flag);
            if min_errors > 0 && errors >= min_errors && done >= floor {
                break 'outer;
            }
        }
    }
    Ok(McEstimate::from_counts(done, errors, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::CorrelationMatrix;
    use crate::constellation::gen_orthogonal;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn noiseless_detection_recovers_signal() {
        let q = Constellation::qpsk();
        let h = [c(0.3, -0.7), c(-1.1, 0.2)];
        for i in 0..4 {
            let s = q.signal(i)[0];
            let r: Vec<Complex64> = h.iter().map(|hn| 2.0 * hn * s).collect();
            assert_eq!(ml_detect(&r, &h, &q, 4.0).unwrap(), i);
        }
    }

    #[test]
    fn orthogonal_single_antenna_picks_largest_real_part() {
        let o = gen_orthogonal(4).unwrap();
        let r = [c(0.2, 5.0), c(0.9, 0.0), c(-3.0, 0.0), c(0.8, 0.1)];
        assert_eq!(ml_detect(&r, &[c(1.0, 0.0)], &o, 2.0).unwrap(), 1);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let o = gen_orthogonal(3).unwrap();
        let r = [c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)];
        assert_eq!(ml_detect(&r, &[c(1.0, 0.0)], &o, 1.0).unwrap(), 0);
        let r = [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)];
        assert_eq!(ml_detect(&r, &[c(1.0, 0.0)], &o, 1.0).unwrap(), 1);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let o = gen_orthogonal(3).unwrap();
        let r = [c(1.0, 0.0); 5];
        assert!(matches!(
            ml_detect(&r, &[c(1.0, 0.0), c(1.0, 0.0)], &o, 1.0),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn wilson_interval_brackets_estimate() {
        for (n, e) in [(10u64, 0u64), (10, 10), (1000, 37), (1, 1)] {
            let m = McEstimate::from_counts(n, e, 0);
            assert!(m.ci_low <= m.bler && m.bler <= m.ci_high);
            assert!(m.ci_low >= 0.0 && m.ci_high <= 1.0);
        }
        let m = McEstimate::from_counts(100, 50, 0);
        assert!((m.ci_low - 0.403_831_4).abs() < 1e-6);
    }

    #[test]
    fn early_stop_respects_floor() {
        let o = gen_orthogonal(4).unwrap();
        let ch = RayleighChannel::build(&CorrelationMatrix::exponential(1, 0.0).unwrap()).unwrap();
        let link = LinkParams::new(1e-9).unwrap();
        let est = mc_bler(&o, &ch, link, 50_000, 3, 20).unwrap();
        assert!(est.errors >= 20);
        assert_eq!(est.trials, 200);
        assert!(mc_bler(&o, &ch, link, 0, 3, 0).is_err());
    }

    #[test]
    fn modes_agree_exactly() {
        let o = gen_orthogonal(8).unwrap();
        let ch = RayleighChannel::build(&CorrelationMatrix::exponential(2, 0.1).unwrap()).unwrap();
        let link = LinkParams::from_db(5.0).unwrap();
        let a = mc_bler_with(Exec::Sequential, &o, &ch, link, 10_000, 77, 0).unwrap();
        let b = mc_bler_with(Exec::Parallel, &o, &ch, link, 10_000, 77, 0).unwrap();
        assert_eq!(a, b);
    }
}
