//! SNR sweeps, gap measurement, and figure presets.

use crate::bounds::{BoundEvaluator, LinkParams};
use crate::channel::{ChannelSummary, CorrelationMatrix, RayleighChannel};
use crate::constellation::{
    analytic_spectrum_orthogonal, analytic_spectrum_permutation, distance_spectrum, gen_gaussian,
    gen_orthogonal, gen_permutation, Constellation, DistanceSpectrum, DEFAULT_BIN_TOL,
    MAX_PERMUTATION_SPECTRUM,
};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::simulate::{mc_bler_with, McEstimate, MAX_SIMULATED_SIGNALS};
use serde::{Deserialize, Serialize};

/// Signalling scheme selector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Scheme {
    Orthogonal {
        #[serde(rename = "M")]
        m: usize,
    },
    Permutation {
        #[serde(rename = "L")]
        l: usize,
    },
    Gaussian {
        #[serde(rename = "K")]
        k: usize,
        #[serde(rename = "M")]
        m: usize,
        seed: u64,
    },
    Qpsk,
}

impl Scheme {
    /// Parse the compact form used on the command line:
    /// `qpsk`, `orthogonal:M`, `permutation:L`, `gaussian:K:M:SEED`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.trim().split(':').collect();
        let num = |s: &str| -> Result<u64> {
            s.parse()
                .map_err(|_| Error::Config(format!("bad number '{s}' in scheme '{text}'")))
        };
        match parts.as_slice() {
            ["qpsk"] => Ok(Scheme::Qpsk),
            ["orthogonal", m] => Ok(Scheme::Orthogonal { m: num(m)? as usize }),
            ["permutation", l] => Ok(Scheme::Permutation { l: num(l)? as usize }),
            ["gaussian", k, m, seed] => Ok(Scheme::Gaussian {
                k: num(k)? as usize,
                m: num(m)? as usize,
                seed: num(seed)?,
            }),
            _ => Err(Error::Config(format!(
                "unknown scheme '{text}' (expected qpsk, orthogonal:M, permutation:L, gaussian:K:M:SEED)"
            ))),
        }
    }

    /// Number of signals `M`, or `None` if it does not fit in 64 bits.
    pub fn signal_count(&self) -> Option<u64> {
        match *self {
            Scheme::Orthogonal { m } => Some(m as u64),
            Scheme::Permutation { l } => (1..=l as u64).try_fold(1u64, |a, x| a.checked_mul(x)),
            Scheme::Gaussian { m, .. } => Some(m as u64),
            Scheme::Qpsk => Some(4),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Scheme::Orthogonal { m } => format!("orthogonal M={m}"),
            Scheme::Permutation { l } => format!("permutation L={l}"),
            Scheme::Gaussian { k, m, seed } => format!("gaussian K={k} M={m} seed={seed}"),
            Scheme::Qpsk => "qpsk".into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Scheme::Orthogonal { m } if m < 2 => Err(Error::Config(format!(
                "orthogonal signalling needs M >= 2, got {m}"
            ))),
            Scheme::Permutation { l } if !(2..=MAX_PERMUTATION_SPECTRUM).contains(&l) => {
                Err(Error::PermutationSizeUnsupported(l, MAX_PERMUTATION_SPECTRUM))
            }
            Scheme::Gaussian { k, m, .. } if k == 0 || m < 2 => Err(Error::Config(format!(
                "gaussian code needs K >= 1 and M >= 2, got K = {k}, M = {m}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn constellation(&self) -> Result<Constellation> {
        match *self {
            Scheme::Orthogonal { m } => gen_orthogonal(m),
            Scheme::Permutation { l } => gen_permutation(l),
            Scheme::Gaussian { k, m, seed } => gen_gaussian(k, m, seed),
            Scheme::Qpsk => Ok(Constellation::qpsk()),
        }
    }

    /// Closed form where one exists, enumeration otherwise.
    pub fn spectrum(&self) -> Result<DistanceSpectrum> {
        match *self {
            Scheme::Orthogonal { m } => analytic_spectrum_orthogonal(m),
            Scheme::Permutation { l } => analytic_spectrum_permutation(l),
            _ => Ok(distance_spectrum(&self.constellation()?, DEFAULT_BIN_TOL)),
        }
    }
}

/// Channel selector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model")]
pub enum ChannelSpec {
    #[serde(rename = "rayleigh-exp")]
    RayleighExp {
        #[serde(rename = "N")]
        n: usize,
        rho: f64,
    },
    #[serde(rename = "rayleigh-matrix")]
    RayleighMatrix { entries: Vec<Vec<[f64; 2]>> },
}

impl ChannelSpec {
    pub fn exponential(n: usize, rho: f64) -> Self {
        ChannelSpec::RayleighExp { n, rho }
    }

    pub fn build(&self) -> Result<RayleighChannel> {
        let r = match self {
            ChannelSpec::RayleighExp { n, rho } => CorrelationMatrix::exponential(*n, *rho)?,
            ChannelSpec::RayleighMatrix { entries } => CorrelationMatrix::from_rows(entries)?,
        };
        RayleighChannel::build(&r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Compute {
    Union,
    New,
    Mc,
}

fn default_compute() -> Vec<Compute> {
    vec![Compute::Union, Compute::New]
}
fn default_trials() -> u64 {
    100_000
}
fn default_seed() -> u64 {
    1
}
fn default_min_errors() -> u64 {
    100
}
fn default_prefix() -> String {
    "fadebound".into()
}

/// One sweep: scheme, channel, SNR grid, and what to compute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub scheme: Scheme,
    pub channel: ChannelSpec,
    pub snr_db_start: f64,
    pub snr_db_stop: f64,
    pub snr_db_step: f64,
    #[serde(default = "default_compute")]
    pub compute: Vec<Compute>,
    #[serde(default = "default_trials")]
    pub mc_trials: u64,
    #[serde(default = "default_seed")]
    pub mc_seed: u64,
    #[serde(default = "default_min_errors")]
    pub mc_min_errors: u64,
    #[serde(default = "default_prefix")]
    pub output_prefix: String,
    #[serde(default)]
    pub svg: bool,
}

impl SweepConfig {
    /// Bounds-only sweep with the default Monte Carlo settings.
    pub fn bounds(scheme: Scheme, channel: ChannelSpec, start: f64, stop: f64, step: f64) -> Self {
        SweepConfig {
            scheme,
            channel,
            snr_db_start: start,
            snr_db_stop: stop,
            snr_db_step: step,
            compute: default_compute(),
            mc_trials: default_trials(),
            mc_seed: default_seed(),
            mc_min_errors: default_min_errors(),
            output_prefix: default_prefix(),
            svg: false,
        }
    }

    pub fn wants(&self, c: Compute) -> bool {
        self.compute.contains(&c)
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b, s) = (self.snr_db_start, self.snr_db_stop, self.snr_db_step);
        if !(a.is_finite() && b.is_finite() && s.is_finite()) {
            return Err(Error::Config("SNR grid must be finite".into()));
        }
        if a > b {
            return Err(Error::Config(format!("snr_db_start {a} exceeds snr_db_stop {b}")));
        }
        if s <= 0.0 {
            return Err(Error::Config(format!("snr_db_step must be positive, got {s}")));
        }
        if self.compute.is_empty() {
            return Err(Error::Config("nothing to compute".into()));
        }
        self.scheme.validate()?;
        if self.wants(Compute::Mc) {
            let m = self.scheme.signal_count().unwrap_or(u64::MAX);
            if m > MAX_SIMULATED_SIGNALS as u64 {
                return Err(Error::Config(format!(
                    "Monte Carlo requested for M = {m} > {MAX_SIMULATED_SIGNALS}"
                )));
            }
            if self.mc_trials == 0 {
                return Err(Error::Config("mc_trials must be positive".into()));
            }
        }
        Ok(())
    }

    /// SNR grid in dB, inclusive of the stop value when it lands on the grid.
    pub fn snr_points(&self) -> Vec<f64> {
        let n = ((self.snr_db_stop - self.snr_db_start) / self.snr_db_step + 1e-9).floor() as usize;
        (0..=n)
            .map(|i| self.snr_db_start + i as f64 * self.snr_db_step)
            .collect()
    }

    /// Seed of the Monte Carlo run at grid index `i`.
    pub fn mc_seed_at(&self, i: usize) -> u64 {
        self.mc_seed.wrapping_add(i as u64)
    }
}

/// One row of sweep output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub snr_db: f64,
    pub union_bound: Option<f64>,
    pub new_bound: Option<f64>,
    pub gamma_star: Option<f64>,
    pub mc: Option<McEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub label: String,
    pub signals: u64,
    pub channel: ChannelSummary,
    pub rows: Vec<SweepRow>,
}

impl SweepOutcome {
    /// `(snr_db, union_bound)` pairs.
    pub fn union_curve(&self) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter_map(|r| r.union_bound.map(|v| (r.snr_db, v)))
            .collect()
    }

    /// `(snr_db, new_bound)` pairs.
    pub fn new_curve(&self) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter_map(|r| r.new_bound.map(|v| (r.snr_db, v)))
            .collect()
    }
}

/// Evaluate a sweep. SNR points run independently under `exec`; rows come
/// back in SNR order.
pub fn run_sweep(cfg: &SweepConfig, exec: Exec) -> Result<SweepOutcome> {
    cfg.validate()?;
    let channel = cfg.channel.build()?;
    let snrs = cfg.snr_points();
    let bounds_needed = cfg.wants(Compute::Union) || cfg.wants(Compute::New);

    let mut rows: Vec<SweepRow> = if bounds_needed {
        let spectrum = cfg.scheme.spectrum()?;
        let eval = BoundEvaluator::new(&spectrum, &channel);
        exec.map(snrs.len(), |i| -> Result<SweepRow> {
            let link = LinkParams::from_db(snrs[i])?;
            let union_bound = cfg.wants(Compute::Union).then(|| eval.union_bound(link));
            let nb = if cfg.wants(Compute::New) {
                Some(eval.new_bound(link)?)
            } else {
                None
            };
            Ok(SweepRow {
                snr_db: snrs[i],
                union_bound,
                new_bound: nb.map(|b| b.value),
                gamma_star: nb.map(|b| b.gamma_star),
                mc: None,
            })
        })
        .into_iter()
        .collect::<Result<_>>()?
    } else {
        snrs.iter()
            .map(|&snr_db| SweepRow {
                snr_db,
                union_bound: None,
                new_bound: None,
                gamma_star: None,
                mc: None,
            })
            .collect()
    };

    if cfg.wants(Compute::Mc) {
        let c = cfg.scheme.constellation()?;
        for (i, row) in rows.iter_mut().enumerate() {
            let link = LinkParams::from_db(row.snr_db)?;
            row.mc = Some(mc_bler_with(
                exec,
                &c,
                &channel,
                link,
                cfg.mc_trials,
                cfg.mc_seed_at(i),
                cfg.mc_min_errors,
            )?);
        }
    }

    Ok(SweepOutcome {
        label: cfg.scheme.label(),
        signals: cfg.scheme.signal_count().unwrap_or(u64::MAX),
        channel: channel.summary(),
        rows,
    })
}

/// SNR at which `curve` first falls through `level`, interpolating linearly
/// in (dB, log10 value).
pub fn crossing_db(curve: &[(f64, f64)], level: f64) -> Option<f64> {
    let target = level.log10();
    curve.windows(2).find_map(|w| {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if y0 >= level && y1 < level {
            let l0 = y0.log10();
            let l1 = y1.max(f64::MIN_POSITIVE).log10();
            Some(x0 + (target - l0) / (l1 - l0) * (x1 - x0))
        } else {
            None
        }
    })
}

/// Horizontal distance in dB between the points where `curve_a` and
/// `curve_b` cross `level`; positive when `curve_a` crosses to the right.
pub fn gap_at_level(curve_a: &[(f64, f64)], curve_b: &[(f64, f64)], level: f64) -> Result<f64> {
    if level.is_nan() || level <= 0.0 {
        return Err(Error::LevelOutOfRange(format!("level must be positive, got {level}")));
    }
    let a = crossing_db(curve_a, level);
    let b = crossing_db(curve_b, level);
    match (a, b) {
        (Some(a), Some(b)) => Ok(a - b),
        _ => Err(Error::LevelOutOfRange(format!(
            "level {level:e} not crossed by {} within the sweep",
            match (a, b) {
                (None, None) => "either curve",
                (None, _) => "the first curve",
                _ => "the second curve",
            }
        ))),
    }
}

/// Gap at the first of `levels` that both curves cross.
pub fn gap_at_first_common_level(
    curve_a: &[(f64, f64)],
    curve_b: &[(f64, f64)],
    levels: &[f64],
) -> Result<(f64, f64)> {
    levels
        .iter()
        .find_map(|&l| gap_at_level(curve_a, curve_b, l).ok().map(|g| (l, g)))
        .ok_or_else(|| Error::LevelOutOfRange(format!("none of {levels:?} crossed by both curves")))
}

/// Default gap level.
pub const DEFAULT_GAP_LEVEL: f64 = 1e-4;
/// Levels tried, in order, when the default is not reached by both curves.
pub const FALLBACK_GAP_LEVELS: [f64; 3] = [1e-4, 1e-3, 1e-2];

/// Seeds averaged by the Gaussian-code preset.
pub const FIG5_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

/// A named curve of a figure preset.
#[derive(Debug, Clone, PartialEq)]
pub struct PresetRun {
    pub name: String,
    pub config: SweepConfig,
}

/// Sweep configurations of the built-in presets `fig1` to `fig5`.
pub fn figure_preset(fig: u8) -> Result<Vec<PresetRun>> {
    let ch = |n, rho| ChannelSpec::exponential(n, rho);
    let run = |name: String, scheme: Scheme, channel: ChannelSpec, mc: bool| {
        // 40 dB so the weakest curves still reach the default gap level
        let mut config = SweepConfig::bounds(scheme, channel, 0.0, 40.0, 1.0);
        if mc {
            config.compute.push(Compute::Mc);
        }
        PresetRun { name, config }
    };
    let orthogonal = |n, rho| {
        vec![
            run("orthogonal_M16".into(), Scheme::Orthogonal { m: 16 }, ch(n, rho), true),
            run("orthogonal_M512".into(), Scheme::Orthogonal { m: 512 }, ch(n, rho), false),
        ]
    };
    match fig {
        1 => Ok(orthogonal(2, 0.1)),
        2 => Ok(orthogonal(4, 0.1)),
        3 => Ok(orthogonal(4, 0.5)),
        4 => Ok([3usize, 6, 9]
            .iter()
            .map(|&l| {
                run(
                    format!("permutation_L{l}"),
                    Scheme::Permutation { l },
                    ch(2, 0.1),
                    l == 3,
                )
            })
            .collect()),
        5 => Ok([10usize, 300]
            .iter()
            .flat_map(|&m| {
                FIG5_SEEDS.iter().map(move |&seed| (m, seed))
            })
            .map(|(m, seed)| {
                run(
                    format!("gaussian_M{m}_seed{seed}"),
                    Scheme::Gaussian { k: 9, m, seed },
                    ch(2, 0.1),
                    m == 10 && seed == FIG5_SEEDS[0],
                )
            })
            .collect()),
        _ => Err(Error::Config(format!("unknown figure {fig} (expected 1-5)"))),
    }
}
