//! Fixed-node quadrature for the Craig-form integrals over `θ ∈ [0, π/2]`.
//!
//! The Craig integrand develops boundary layers at both ends of the interval:
//! near `θ = 0` when `d²·E·γ` is small, and near `θ = π/2` when it is large.
//! Nodes are therefore Gauss–Legendre nodes pushed through the cubic
//! smoothstep map `θ = (π/2)(3u² − 2u³)`, whose vanishing derivative at both
//! ends clusters them where the layers live.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

/// Number of nodes of the Craig rule.
pub const CRAIG_NODES: usize = 96;

/// A quadrature rule: parallel node and weight arrays.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on the
/// three-term Legendre recurrence.
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Rule { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// The Craig rule on `[0, π/2]`, stored as `sin²θ` at each node together with
/// the weight already divided by `π`.
#[derive(Debug)]
pub struct CraigRule {
    pub sin2: Vec<f64>,
    pub weights: Vec<f64>,
}

impl CraigRule {
    fn build(n: usize) -> Self {
        let gl = gauss_legendre(n);
        let mut sin2 = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for (&x, &w) in gl.nodes.iter().zip(&gl.weights) {
            let u = 0.5 * (x + 1.0);
            let theta = FRAC_PI_2 * u * u * (3.0 - 2.0 * u);
            let jac = FRAC_PI_2 * 6.0 * u * (1.0 - u) * 0.5;
            let s = theta.sin();
            sin2.push(s * s);
            weights.push(w * jac / PI);
        }
        // descending sin²θ, so the Craig argument t grows along the rule
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| sin2[b].total_cmp(&sin2[a]));
        CraigRule {
            sin2: order.iter().map(|&i| sin2[i]).collect(),
            weights: order.iter().map(|&i| weights[i]).collect(),
        }
    }

    /// Shared read-only instance.
    pub fn get() -> &'static CraigRule {
        static RULE: OnceLock<CraigRule> = OnceLock::new();
        RULE.get_or_init(|| CraigRule::build(CRAIG_NODES))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = gauss_legendre(10);
        // exact through degree 19
        for deg in 0..20 {
            let got: f64 = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(x, w)| w * x.powi(deg))
                .sum();
            let want = if deg % 2 == 0 { 2.0 / (deg as f64 + 1.0) } else { 0.0 };
            assert!((got - want).abs() < 1e-14, "degree {deg}: {got} vs {want}");
        }
    }

    #[test]
    fn gauss_legendre_64_weights_sum_to_two() {
        let rule = gauss_legendre(64);
        let s: f64 = rule.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-13);
        assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn craig_rule_reproduces_q_function() {
        // Q(x) = (1/π) ∫ exp(-x² / (2 sin²θ)) dθ
        let rule = CraigRule::get();
        for &x in &[0.0, 0.5, 1.0, 2.0, 4.0] {
            let q: f64 = rule
                .sin2
                .iter()
                .zip(&rule.weights)
                .map(|(s2, w)| w * (-x * x / (2.0 * s2)).exp())
                .sum();
            let want = crate::special::q_function(x);
            assert!((q - want).abs() / want < 1e-10, "x = {x}: {q} vs {want}");
        }
    }
}
