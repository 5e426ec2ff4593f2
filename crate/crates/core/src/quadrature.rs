//! Composite Gauss-Legendre rules.

use std::f64::consts::PI;

/// Nodes and weights of the `k`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on `P_k` from the Chebyshev-like initial guesses.
    pub fn new(k: usize) -> Self {
        assert!(k >= 1, "rule needs at least one node");
        let mut nodes = vec![0.0; k];
        let mut weights = vec![0.0; k];
        let m = k.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (k as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(k, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(k, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[k - 1 - i] = x;
            weights[i] = w;
            weights[k - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Composite rule on `[a, b]` split into `panels` equal panels; returns
    /// `(t, w)` pairs in ascending `t`.
    pub fn composite(&self, a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
        let h = (b - a) / panels as f64;
        let mut out = Vec::with_capacity(panels * self.nodes.len());
        for p in 0..panels {
            let lo = a + p as f64 * h;
            let mid = lo + 0.5 * h;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                out.push((mid + 0.5 * h * x, 0.5 * h * w));
            }
        }
        out
    }
}

fn legendre_with_derivative(k: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for j in 2..=k {
        let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
        p0 = p1;
        p1 = p2;
    }
    if k == 0 {
        return (1.0, 0.0);
    }
    let d = k as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        for k in [1, 2, 5, 16, 32, 64] {
            let g = GaussLegendre::new(k);
            let s: f64 = g.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "k = {k}: {s}");
        }
    }

    #[test]
    fn exact_for_polynomials() {
        let g = GaussLegendre::new(8);
        // degree 15 is integrated exactly
        let s: f64 = g
            .nodes
            .iter()
            .zip(&g.weights)
            .map(|(x, w)| w * x.powi(14))
            .sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn composite_gaussian() {
        let g = GaussLegendre::new(32);
        let s: f64 = g
            .composite(-10.0, 10.0, 8)
            .iter()
            .map(|(t, w)| w * (-t * t).exp())
            .sum();
        assert!((s - PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn nodes_ascend() {
        let g = GaussLegendre::new(32);
        let pts = g.composite(0.0, 3.0, 3);
        assert!(pts.windows(2).all(|w| w[0].0 < w[1].0));
    }
}
