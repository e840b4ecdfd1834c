use super::QuadratureRule;
use crate::Point;
use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `(-1, 1)`, nodes ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Highest polynomial degree integrated exactly.
    pub fn degree(&self) -> usize {
        2 * self.nodes.len() - 1
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// `(P_q(x), P_q'(x))` by the three-term recurrence.
fn legendre_with_derivative(q: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 1..q {
        let k = k as f64;
        let p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let dp = q as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// `q`-point Gauss–Legendre rule by Newton iteration from Chebyshev-type
/// initial guesses; the rule is symmetrised about zero.
pub fn gauss_legendre_1d(q: usize) -> GaussLegendre {
    assert!(q >= 1, "at least one point is required");
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    for i in 0..q.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(q, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-15 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(q, x);
        if d.is_finite() {
            dp = d;
        }
        if q % 2 == 1 && i == q / 2 {
            x = 0.0;
            dp = legendre_with_derivative(q, 0.0).1;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[q - 1 - i] = x;
        nodes[i] = -x;
        weights[i] = w;
        weights[q - 1 - i] = w;
    }
    GaussLegendre { nodes, weights }
}

/// Collapsed tensor rule on the reference simplex with `(q+1)^d` points.
///
/// The two-dimensional rule integrates total degree `2q` exactly and the
/// three-dimensional one total degree `2q - 1`.
pub fn duffy_simplex_rule(q: usize, d: usize) -> QuadratureRule {
    let g = gauss_legendre_1d(q + 1);
    let u: Vec<(f64, f64)> = g
        .nodes
        .iter()
        .zip(&g.weights)
        .map(|(&x, &w)| (0.5 * (1.0 + x), 0.5 * w))
        .collect();
    let mut points = Vec::new();
    let mut weights = Vec::new();
    match d {
        2 => {
            for &(a, wa) in &u {
                for &(b, wb) in &u {
                    points.push(Point::new(a, b * (1.0 - a), 0.0));
                    weights.push(wa * wb * (1.0 - a));
                }
            }
        }
        3 => {
            for &(a, wa) in &u {
                for &(b, wb) in &u {
                    for &(c, wc) in &u {
                        let s = 1.0 - a;
                        points.push(Point::new(a, b * s, c * s * (1.0 - b)));
                        weights.push(wa * wb * wc * s * s * (1.0 - b));
                    }
                }
            }
        }
        _ => panic!("Duffy rule needs d = 2 or 3"),
    }
    QuadratureRule {
        dim: d,
        points,
        weights,
        degree: if d == 2 { 2 * q } else { 2 * q - 1 },
    }
}
