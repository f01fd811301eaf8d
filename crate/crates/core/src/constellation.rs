//! Signalling schemes and their distance spectra.
//!
//! Spectra come from two independent routes: brute-force enumeration over
//! all signal pairs ([`distance_spectrum`]) and closed-form combinatorics for
//! the orthogonal and permutation families.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

/// Default squared-distance bin width.
pub const DEFAULT_BIN_TOL: f64 = 1e-9;

/// Largest permutation length accepted by [`gen_permutation`].
pub const MAX_PERMUTATION_GEN: usize = 10;
/// Largest permutation length accepted by [`analytic_spectrum_permutation`].
pub const MAX_PERMUTATION_SPECTRUM: usize = 20;

const MIN_SEPARATION: f64 = 1e-9;
const MAX_GAUSSIAN_REDRAWS: u64 = 16;

/// `M` complex signals of dimension `K` with unit average energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConstellationJson", into = "ConstellationJson")]
pub struct Constellation {
    dim: usize,
    count: usize,
    signals: Vec<Complex64>,
    label: String,
}

#[derive(Serialize, Deserialize)]
struct ConstellationJson {
    label: String,
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "M")]
    m: usize,
    signals: Vec<[f64; 2]>,
}

impl From<Constellation> for ConstellationJson {
    fn from(c: Constellation) -> Self {
        ConstellationJson {
            label: c.label,
            k: c.dim,
            m: c.count,
            signals: c.signals.iter().map(|s| [s.re, s.im]).collect(),
        }
    }
}

impl TryFrom<ConstellationJson> for Constellation {
    type Error = Error;

    fn try_from(j: ConstellationJson) -> Result<Self> {
        if j.k == 0 || j.m == 0 || j.signals.len() != j.k * j.m {
            return Err(Error::DimensionMismatch(format!(
                "expected {} x {} signal entries, found {}",
                j.m,
                j.k,
                j.signals.len()
            )));
        }
        Ok(Constellation {
            dim: j.k,
            count: j.m,
            signals: j.signals.iter().map(|&[re, im]| Complex64::new(re, im)).collect(),
            label: j.label,
        })
    }
}

impl Constellation {
    /// Scale `raw` uniformly to unit average energy.
    pub fn normalize(raw: &[Vec<Complex64>], label: impl Into<String>) -> Result<Self> {
        let m = raw.len();
        if m < 2 {
            return Err(Error::DegenerateConstellation(format!(
                "need at least 2 signals, got {m}"
            )));
        }
        let k = raw[0].len();
        if k == 0 || raw.iter().any(|s| s.len() != k) {
            return Err(Error::DimensionMismatch(
                "signals must share one nonzero dimension".into(),
            ));
        }
        let energy: f64 = raw.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>() / m as f64;
        if !energy.is_finite() || energy <= 0.0 {
            return Err(Error::DegenerateConstellation("all signals are zero".into()));
        }
        let scale = energy.sqrt().recip();
        let signals: Vec<Complex64> = raw.iter().flatten().map(|z| z * scale).collect();
        let c = Constellation {
            dim: k,
            count: m,
            signals,
            label: label.into(),
        };
        if let Some((i, j)) = c.closest_pair_below(MIN_SEPARATION) {
            return Err(Error::RepeatedSignal(i, j));
        }
        Ok(c)
    }

    /// QPSK `{1, j, -1, -j}`.
    pub fn qpsk() -> Self {
        let raw: Vec<Vec<Complex64>> = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)]
            .iter()
            .map(|&(re, im)| vec![Complex64::new(re, im)])
            .collect();
        Constellation::normalize(&raw, "qpsk").expect("QPSK is a valid constellation")
    }

    /// Complex dimension `K`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of signals `M`.
    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn signal(&self, i: usize) -> &[Complex64] {
        &self.signals[i * self.dim..(i + 1) * self.dim]
    }

    pub fn signals(&self) -> impl Iterator<Item = &[Complex64]> {
        self.signals.chunks_exact(self.dim)
    }

    /// `(1/M) Σ ||s_i||²`.
    pub fn average_energy(&self) -> f64 {
        self.signals.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.count as f64
    }

    pub fn squared_distance(&self, i: usize, k: usize) -> f64 {
        self.signal(i)
            .iter()
            .zip(self.signal(k))
            .map(|(a, b)| (a - b).norm_sqr())
            .sum()
    }

    fn closest_pair_below(&self, tol: f64) -> Option<(usize, usize)> {
        let tol2 = tol * tol;
        for i in 0..self.count {
            for k in i + 1..self.count {
                if self.squared_distance(i, k) <= tol2 {
                    return Some((i, k));
                }
            }
        }
        None
    }
}

/// One `(distance, count)` pair of a signal's spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    #[serde(rename = "d")]
    pub distance: f64,
    pub count: u64,
}

/// Per-signal distance spectra `A_i(d)`.
///
/// When every signal sees the same spectrum only one profile is stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpectrumJson", into = "SpectrumJson")]
pub struct DistanceSpectrum {
    signals: usize,
    profiles: Vec<Vec<SpectrumEntry>>,
}

#[derive(Serialize, Deserialize)]
struct SpectrumJson {
    symmetric: bool,
    #[serde(rename = "M")]
    m: usize,
    per_signal: Vec<Vec<SpectrumEntry>>,
}

impl From<DistanceSpectrum> for SpectrumJson {
    fn from(s: DistanceSpectrum) -> Self {
        SpectrumJson {
            symmetric: s.is_symmetric(),
            m: s.signals,
            per_signal: s.profiles,
        }
    }
}

impl TryFrom<SpectrumJson> for DistanceSpectrum {
    type Error = Error;

    fn try_from(j: SpectrumJson) -> Result<Self> {
        let profiles = if j.symmetric {
            j.per_signal.into_iter().take(1).collect::<Vec<_>>()
        } else {
            j.per_signal
        };
        if profiles.is_empty() || (profiles.len() != 1 && profiles.len() != j.m) {
            return Err(Error::DimensionMismatch(format!(
                "spectrum for M = {} carries {} profiles",
                j.m,
                profiles.len()
            )));
        }
        Ok(DistanceSpectrum::from_profiles(j.m, profiles))
    }
}

impl DistanceSpectrum {
    fn from_profiles(signals: usize, profiles: Vec<Vec<SpectrumEntry>>) -> Self {
        let profiles = if profiles.len() > 1 && profiles.iter().all(|p| p == &profiles[0]) {
            vec![profiles.into_iter().next().unwrap()]
        } else {
            profiles
        };
        DistanceSpectrum { signals, profiles }
    }

    /// A spectrum shared by all `m` signals.
    pub fn symmetric(m: usize, entries: Vec<SpectrumEntry>) -> Self {
        DistanceSpectrum {
            signals: m,
            profiles: vec![entries],
        }
    }

    /// Number of signals `M`.
    pub fn signals(&self) -> usize {
        self.signals
    }

    pub fn is_symmetric(&self) -> bool {
        self.profiles.len() == 1
    }

    /// Spectrum seen from signal `i`.
    pub fn signal(&self, i: usize) -> &[SpectrumEntry] {
        assert!(i < self.signals, "signal index {i} out of range");
        if self.is_symmetric() {
            &self.profiles[0]
        } else {
            &self.profiles[i]
        }
    }

    /// `Σ_d A_i(d)` for every signal.
    pub fn totals(&self) -> Vec<u64> {
        (0..self.signals)
            .map(|i| self.signal(i).iter().map(|e| e.count).sum())
            .collect()
    }

    /// The exact weighted term list of `(1/M) Σ_i Σ_d A_i(d) f(d)`: distinct
    /// distances paired with `Σ_i A_i(d) / M`. Bins are merged across signals
    /// with the given tolerance.
    pub fn pooled_terms(&self, bin_tol: f64) -> Vec<(f64, f64)> {
        let m = self.signals as f64;
        if self.is_symmetric() {
            return self.profiles[0]
                .iter()
                .map(|e| (e.distance, e.count as f64))
                .collect();
        }
        let mut all: Vec<(i64, f64, u64)> = self
            .profiles
            .iter()
            .flatten()
            .map(|e| (bin_key(e.distance * e.distance, bin_tol), e.distance, e.count))
            .collect();
        all.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut out: Vec<(f64, f64)> = Vec::new();
        let mut last_key = None;
        for (key, d, count) in all {
            if last_key == Some(key) {
                out.last_mut().unwrap().1 += count as f64;
            } else {
                out.push((d, count as f64));
                last_key = Some(key);
            }
        }
        for t in &mut out {
            t.1 /= m;
        }
        out
    }

    /// Compare two spectra bin by bin: identical squared-distance bins and counts.
    pub fn same_bins(&self, other: &DistanceSpectrum, bin_tol: f64) -> bool {
        if self.signals != other.signals {
            return false;
        }
        let keys = |p: &[SpectrumEntry]| -> Vec<(i64, u64)> {
            p.iter()
                .map(|e| (bin_key(e.distance * e.distance, bin_tol), e.count))
                .collect()
        };
        (0..self.signals).all(|i| keys(self.signal(i)) == keys(other.signal(i)))
    }
}

fn bin_key(d2: f64, bin_tol: f64) -> i64 {
    (d2 / bin_tol).round() as i64
}

/// Brute-force distance spectrum over all `M(M-1)` ordered pairs.
pub fn distance_spectrum(c: &Constellation, bin_tol: f64) -> DistanceSpectrum {
    assert!(bin_tol > 0.0, "bin tolerance must be positive");
    let m = c.len();
    let profiles = (0..m)
        .map(|i| {
            let mut d2: Vec<(i64, f64)> = (0..m)
                .filter(|&k| k != i)
                .map(|k| {
                    let v = c.squared_distance(i, k);
                    (bin_key(v, bin_tol), v)
                })
                .collect();
            d2.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
            let mut entries: Vec<SpectrumEntry> = Vec::new();
            let mut last_key = None;
            for (key, v) in d2 {
                if last_key == Some(key) {
                    entries.last_mut().unwrap().count += 1;
                } else {
                    entries.push(SpectrumEntry {
                        distance: v.sqrt(),
                        count: 1,
                    });
                    last_key = Some(key);
                }
            }
            entries
        })
        .collect();
    DistanceSpectrum::from_profiles(m, profiles)
}

/// Orthogonal signalling: the `M` standard basis vectors of `C^M`.
pub fn gen_orthogonal(m: usize) -> Result<Constellation> {
    if m < 2 {
        return Err(Error::DegenerateConstellation(format!(
            "orthogonal signalling needs M >= 2, got {m}"
        )));
    }
    let mut signals = vec![Complex64::new(0.0, 0.0); m * m];
    for i in 0..m {
        signals[i * m + i] = Complex64::new(1.0, 0.0);
    }
    Ok(Constellation {
        dim: m,
        count: m,
        signals,
        label: format!("orthogonal M={m}"),
    })
}

/// Advance `perm` to the next permutation in lexicographic order.
fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// Binary permutation code of length `L`: `L!` codewords of dimension `L²`,
/// one unit entry per slot at the position of the permuted index, scaled by
/// `1/√L`. Codewords follow lexicographic order of the permutations.
pub fn gen_permutation(l: usize) -> Result<Constellation> {
    if !(2..=MAX_PERMUTATION_GEN).contains(&l) {
        return Err(Error::PermutationSizeUnsupported(l, MAX_PERMUTATION_GEN));
    }
    let k = l * l;
    let m: usize = (1..=l).product();
    let amp = Complex64::new(1.0 / (l as f64).sqrt(), 0.0);
    let mut signals = vec![Complex64::new(0.0, 0.0); m * k];
    let mut perm: Vec<usize> = (0..l).collect();
    let mut idx = 0;
    loop {
        let row = &mut signals[idx * k..(idx + 1) * k];
        for (slot, &n) in perm.iter().enumerate() {
            row[slot * l + n] = amp;
        }
        idx += 1;
        if !next_permutation(&mut perm) {
            break;
        }
    }
    debug_assert_eq!(idx, m);
    Ok(Constellation {
        dim: k,
        count: m,
        signals,
        label: format!("permutation L={l}"),
    })
}

/// Raw `CN(0, I_K)` draws before normalization.
pub fn gaussian_draws(k: usize, m: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..m)
        .map(|_| {
            (0..k)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
                })
                .collect()
        })
        .collect()
}

/// Gaussian random code: `M` draws from `CN(0, I_K)`, normalized. A draw that
/// fails normalization is replaced by the draw for `seed + 1`, and so on; the
/// seed actually used is recorded in the label.
pub fn gen_gaussian(k: usize, m: usize, seed: u64) -> Result<Constellation> {
    if m < 2 || k == 0 {
        return Err(Error::DegenerateConstellation(format!(
            "gaussian code needs K >= 1 and M >= 2, got K = {k}, M = {m}"
        )));
    }
    let mut last_err = None;
    for bump in 0..MAX_GAUSSIAN_REDRAWS {
        let used = seed.wrapping_add(bump);
        let label = if bump == 0 {
            format!("gaussian K={k} M={m} seed={seed}")
        } else {
            format!("gaussian K={k} M={m} seed={seed} redrawn_seed={used}")
        };
        match Constellation::normalize(&gaussian_draws(k, m, used), label) {
            Ok(c) => return Ok(c),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap())
}

/// Number of derangements `!n`, by the exact recurrence
/// `!n = (n-1)(!(n-1) + !(n-2))`.
pub fn derangements(n: u32) -> Result<u64> {
    if n > 20 {
        return Err(Error::CountOverflow(format!("!{n} exceeds 64 bits")));
    }
    let (mut prev, mut cur) = (1u64, 0u64); // !0, !1
    if n == 0 {
        return Ok(prev);
    }
    for k in 2..=u64::from(n) {
        let next = (k - 1) * (cur + prev);
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Binomial coefficient with overflow check.
pub fn binomial(n: u64, k: u64) -> Result<u64> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    u64::try_from(acc).map_err(|_| Error::CountOverflow(format!("C({n}, {k})")))
}

/// Closed-form spectrum of orthogonal signalling: `M - 1` neighbours at `√2`.
pub fn analytic_spectrum_orthogonal(m: usize) -> Result<DistanceSpectrum> {
    if m < 2 {
        return Err(Error::DegenerateConstellation(format!(
            "orthogonal signalling needs M >= 2, got {m}"
        )));
    }
    Ok(DistanceSpectrum::symmetric(
        m,
        vec![SpectrumEntry {
            distance: std::f64::consts::SQRT_2,
            count: m as u64 - 1,
        }],
    ))
}

/// Closed-form spectrum of the permutation code: for `m = 2..=L`, codewords
/// whose relative permutation moves exactly `m` symbols sit at distance
/// `√(2m/L)`, and there are `!m · C(L, m)` of them.
pub fn analytic_spectrum_permutation(l: usize) -> Result<DistanceSpectrum> {
    if !(2..=MAX_PERMUTATION_SPECTRUM).contains(&l) {
        return Err(Error::PermutationSizeUnsupported(l, MAX_PERMUTATION_SPECTRUM));
    }
    let lu = l as u64;
    let signals = (1..=lu)
        .try_fold(1u64, |acc, x| acc.checked_mul(x))
        .ok_or_else(|| Error::CountOverflow(format!("{l}!")))?;
    let entries = (2..=lu)
        .map(|m| {
            let count = derangements(m as u32)?
                .checked_mul(binomial(lu, m)?)
                .ok_or_else(|| Error::CountOverflow(format!("!{m} * C({l}, {m})")))?;
            Ok(SpectrumEntry {
                distance: (2.0 * m as f64 / l as f64).sqrt(),
                count,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let signals = usize::try_from(signals).map_err(|_| Error::CountOverflow(format!("{l}!")))?;
    Ok(DistanceSpectrum::symmetric(signals, entries))
}
