//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use fadebound_core::bounds::{BoundEvaluator, LinkParams};
use fadebound_core::channel::RayleighChannel;
use fadebound_core::special::q_function;
use fadebound_core::sweep::{ChannelSpec, Scheme};

/// Density of a sum of independent exponentials with means `lambdas`, from
/// the gamma-mixture series. Every term is nonnegative, so the series does
/// not suffer the cancellation of the partial-fraction form.
pub struct GammaSeriesDensity {
    shape: usize,
    lmin: f64,
    log_c: f64,
    delta: Vec<f64>,
}

impl GammaSeriesDensity {
    pub fn new(lambdas: &[f64]) -> Self {
        let lmin = lambdas.iter().cloned().fold(f64::INFINITY, f64::min);
        let ratios: Vec<f64> = lambdas.iter().map(|&l| 1.0 - lmin / l).collect();
        let log_c: f64 = lambdas.iter().map(|&l| (lmin / l).ln()).sum();
        let rmax = ratios.iter().cloned().fold(0.0, f64::max);
        let terms = if rmax == 0.0 {
            1
        } else {
            (((1e-40f64).ln() / rmax.ln()).ceil() as usize + 50).min(20_000)
        };
        let g: Vec<f64> = (0..=terms)
            .map(|k| {
                if k == 0 {
                    0.0
                } else {
                    ratios.iter().map(|r| r.powi(k as i32)).sum::<f64>() / k as f64
                }
            })
            .collect();
        let mut delta = vec![1.0];
        for k in 0..terms {
            let s: f64 = (1..=k + 1).map(|i| i as f64 * g[i] * delta[k + 1 - i]).sum();
            delta.push(s / (k + 1) as f64);
        }
        GammaSeriesDensity { shape: lambdas.len(), lmin, log_c, delta }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return if self.shape == 1 && x == 0.0 { 1.0 / self.lmin } else { 0.0 };
        }
        let lx = (x / self.lmin).ln();
        // ln Γ(shape + k) accumulated incrementally
        let mut lgam: f64 = (1..self.shape).map(|i| (i as f64).ln()).sum();
        let mut total = 0.0;
        for (k, &d) in self.delta.iter().enumerate() {
            let a = (self.shape + k) as f64;
            if k > 0 {
                lgam += (a - 1.0).ln();
            }
            let t = d * ((a - 1.0) * lx - x / self.lmin - lgam).exp();
            total += t;
            if k > 20 && t < 1e-18 * total && lx < (a / 2.0).ln() {
                break;
            }
        }
        (self.log_c).exp() * total / self.lmin
    }
}

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, abs_tol, 48)
}

/// `∫_γ^∞ Q(d √(x·snr/2)) f(x) dx` by adaptive Simpson on geometrically
/// growing panels, with the tolerance set from a coarse first pass.
pub fn pep_tail_direct(lambdas: &[f64], d: f64, snr: f64, gamma: f64) -> f64 {
    let dens = GammaSeriesDensity::new(lambdas);
    let lmax = lambdas.iter().cloned().fold(0.0, f64::max);
    let f = |x: f64| q_function(d * (x * snr / 2.0).sqrt()) * dens.pdf(x);
    let span = 80.0 * lmax + 40.0 * lmax * lambdas.len() as f64;
    let mut edges = vec![gamma];
    let mut w = 1e-9 * (1.0 + gamma);
    while edges.last().unwrap() + w < gamma + span {
        edges.push(gamma + w);
        w *= 2.0;
    }
    edges.push(gamma + span);
    let pass = |tol: f64| -> f64 {
        edges
            .windows(2)
            .map(|e| adaptive_simpson(&f, e[0], e[1], tol))
            .sum()
    };
    let rough = pass(1e-6);
    if rough == 0.0 {
        return 0.0;
    }
    pass(rough * 1e-13 / edges.len() as f64)
}

/// Closed form of `pep_tail` for a single antenna with mean gain `lambda`.
pub fn pep_tail_single(lambda: f64, d: f64, snr: f64, gamma: f64) -> f64 {
    let beta = d * d * snr / 4.0;
    let mu = 1.0 / lambda;
    (-gamma * mu).exp() * q_function((2.0 * beta * gamma).sqrt())
        - (beta / (beta + mu)).sqrt() * q_function((2.0 * (beta + mu) * gamma).sqrt())
}

/// Q⁻¹ by bisection.
pub fn q_inverse(p: f64) -> f64 {
    let (mut lo, mut hi) = (-40.0, 40.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if q_function(mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section minimizer of `f` on `[a, b]`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    golden_section_by(|c, d| f(c) <= f(d), a, b, rel_tol)
}

/// Golden-section search driven by a comparison: `not_worse(c, d)` is true
/// when the objective at `c` does not exceed the objective at `d`.
pub fn golden_section_by<C: Fn(f64, f64) -> bool>(
    not_worse: C,
    mut a: f64,
    mut b: f64,
    rel_tol: f64,
) -> f64 {
    let invphi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - invphi * (b - a);
    let mut d = a + invphi * (b - a);
    while (b - a) > rel_tol * (c.abs() + d.abs()) + 1e-300 {
        if not_worse(c, d) {
            b = d;
            d = c;
            c = b - invphi * (b - a);
        } else {
            a = c;
            c = d;
            d = a + invphi * (b - a);
        }
    }
    0.5 * (a + b)
}

/// `G(hi) - G(lo)` for `lo < hi`, as `∫ f_X(x) (1 - Σ w Q(d √(x·snr/2))) dx`
/// on geometric panels with a 20-point Gauss–Legendre rule.
pub struct ObjectiveIncrement {
    density: GammaSeriesDensity,
    terms: Vec<(f64, f64)>,
    snr: f64,
    rule: fadebound_core::quadrature::Rule,
}

impl ObjectiveIncrement {
    pub fn new(lambdas: &[f64], terms: &[(f64, f64)], snr: f64) -> Self {
        ObjectiveIncrement {
            density: GammaSeriesDensity::new(lambdas),
            terms: terms.to_vec(),
            snr,
            rule: fadebound_core::quadrature::gauss_legendre(20),
        }
    }

    fn integrand(&self, x: f64) -> f64 {
        let scale = (self.snr * x / 2.0).sqrt();
        let s: f64 = self.terms.iter().map(|&(d, w)| w * q_function(d * scale)).sum();
        self.density.pdf(x) * (1.0 - s)
    }

    pub fn between(&self, lo: f64, hi: f64) -> f64 {
        let mut edges = vec![lo];
        let mut x = if lo > 0.0 { lo } else { hi * 1e-6 };
        if lo == 0.0 {
            edges.push(x);
        }
        while x * 1.25 < hi {
            x *= 1.25;
            edges.push(x);
        }
        edges.push(hi);
        edges
            .windows(2)
            .map(|e| {
                let (m, r) = (0.5 * (e[0] + e[1]), 0.5 * (e[1] - e[0]));
                self.rule
                    .nodes
                    .iter()
                    .zip(&self.rule.weights)
                    .map(|(&t, &w)| w * r * self.integrand(m + r * t))
                    .sum::<f64>()
            })
            .sum()
    }
}

/// `n` points spaced evenly in `log γ` between `lo` and `hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Number of sign changes in the forward differences of `values`, ignoring
/// differences at the rounding level of the values themselves.
pub fn slope_sign_changes(values: &[f64]) -> usize {
    let signs: Vec<i8> = values
        .windows(2)
        .filter_map(|w| {
            let diff = w[1] - w[0];
            let floor = 8.0 * f64::EPSILON * w[0].abs().max(w[1].abs());
            if diff.abs() <= floor {
                None
            } else {
                Some(if diff > 0.0 { 1 } else { -1 })
            }
        })
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Schemes of the acceptance grid.
pub fn grid_schemes() -> Vec<Scheme> {
    let mut s = vec![
        Scheme::Qpsk,
        Scheme::Orthogonal { m: 16 },
        Scheme::Orthogonal { m: 512 },
    ];
    s.extend([3, 6, 9].map(|l| Scheme::Permutation { l }));
    s.extend([10, 300].map(|m| Scheme::Gaussian { k: 9, m, seed: 1 }));
    s
}

/// Channels of the acceptance grid.
pub fn grid_channels() -> Vec<ChannelSpec> {
    let mut v = Vec::new();
    for n in [1, 2, 4] {
        for rho in [0.1, 0.5] {
            v.push(ChannelSpec::exponential(n, rho));
        }
    }
    v
}

pub fn link(snr_db: f64) -> LinkParams {
    LinkParams::from_db(snr_db).unwrap()
}

pub type Curve = Vec<(f64, f64)>;

/// Union and new bound curves of one scheme over an SNR grid.
pub fn curves(
    scheme: &Scheme,
    ch: &RayleighChannel,
    snrs: &[f64],
) -> (Curve, Curve) {
    let spec = scheme.spectrum().unwrap();
    let eval = BoundEvaluator::new(&spec, ch);
    let mut ub = Vec::new();
    let mut nb = Vec::new();
    for &s in snrs {
        ub.push((s, eval.union_bound(link(s))));
        nb.push((s, eval.new_bound(link(s)).unwrap().value));
    }
    (ub, nb)
}

pub fn db_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| start + i as f64 * step).collect()
}
