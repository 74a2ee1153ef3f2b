//! Gauss–Legendre rules on intervals and collapsed (Duffy) tensor rules on
//! triangles, plus their mapping to mesh elements and facets.

use crate::mesh::{Mesh, Point};

#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    /// Polynomials of total degree up to this are integrated exactly.
    pub exactness_degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(Point) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(*p))
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Point, f64)> + '_ {
        self.points
            .iter()
            .copied()
            .zip(self.weights.iter().copied())
    }
}

/// `n`-point Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
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
        // map from [-1, 1]
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Rule on `[0, 1]` exact for polynomials of `degree`.
pub fn reference_interval(degree: usize) -> QuadratureRule {
    let (x, w) = gauss_legendre(degree / 2 + 1);
    QuadratureRule {
        points: x.into_iter().map(|t| [t, 0.0]).collect(),
        weights: w,
        exactness_degree: degree,
    }
}

/// Rule on the triangle `(0,0), (1,0), (0,1)` exact for total `degree`.
///
/// Collapsed coordinates `x = s`, `y = t (1 - s)` turn a degree-`k`
/// polynomial into degree `k + 1` in `s` (with the Jacobian) and `k` in `t`.
pub fn reference_triangle(degree: usize) -> QuadratureRule {
    let (s, ws) = gauss_legendre((degree + 3) / 2);
    let (t, wt) = gauss_legendre((degree + 2) / 2);
    let mut points = Vec::with_capacity(s.len() * t.len());
    let mut weights = Vec::with_capacity(s.len() * t.len());
    for (si, wsi) in s.iter().zip(&ws) {
        for (tj, wtj) in t.iter().zip(&wt) {
            points.push([*si, tj * (1.0 - si)]);
            weights.push(wsi * wtj * (1.0 - si));
        }
    }
    QuadratureRule {
        points,
        weights,
        exactness_degree: degree,
    }
}

/// Volume rule on element `e`, with Jacobian-scaled weights.
pub fn quadrature_for(mesh: &Mesh, e: usize, degree: usize) -> QuadratureRule {
    let p = mesh.element_points(e);
    match mesh.dim() {
        1 => {
            let r = reference_interval(degree);
            let len = p[1][0] - p[0][0];
            QuadratureRule {
                points: r
                    .points
                    .iter()
                    .map(|q| [p[0][0] + len * q[0], 0.0])
                    .collect(),
                weights: r.weights.iter().map(|w| w * len).collect(),
                exactness_degree: degree,
            }
        }
        _ => {
            let r = reference_triangle(degree);
            let jac = 2.0 * mesh.element_measure(e);
            let (e1, e2) = (
                [p[1][0] - p[0][0], p[1][1] - p[0][1]],
                [p[2][0] - p[0][0], p[2][1] - p[0][1]],
            );
            QuadratureRule {
                points: r
                    .points
                    .iter()
                    .map(|q| {
                        [
                            p[0][0] + e1[0] * q[0] + e2[0] * q[1],
                            p[0][1] + e1[1] * q[0] + e2[1] * q[1],
                        ]
                    })
                    .collect(),
                weights: r.weights.iter().map(|w| w * jac).collect(),
                exactness_degree: degree,
            }
        }
    }
}

/// Facet rule: Gauss–Legendre along an edge, a unit point mass in 1D.
pub fn facet_quadrature_for(mesh: &Mesh, f: usize, degree: usize) -> QuadratureRule {
    let facet = &mesh.facets()[f];
    let v = mesh.vertices();
    match mesh.dim() {
        1 => QuadratureRule {
            points: vec![v[facet.vertex_ids[0]]],
            weights: vec![1.0],
            exactness_degree: usize::MAX,
        },
        _ => {
            let (a, b) = (v[facet.vertex_ids[0]], v[facet.vertex_ids[1]]);
            let r = reference_interval(degree);
            QuadratureRule {
                points: r
                    .points
                    .iter()
                    .map(|q| [a[0] + (b[0] - a[0]) * q[0], a[1] + (b[1] - a[1]) * q[0]])
                    .collect(),
                weights: r.weights.iter().map(|w| w * facet.measure).collect(),
                exactness_degree: degree,
            }
        }
    }
}
