//! Gauss quadrature on the unit segment and the reference triangle.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::point::Vec2;

pub const MAX_DEGREE: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureKind {
    /// Reference triangle with vertices (0,0), (1,0), (0,1); measure 1/2.
    Triangle,
    /// Unit segment [0,1]; measure 1.
    Segment,
}

/// Points and weights of a quadrature rule.
///
/// Triangle points are reference coordinates `(xi, eta)`, i.e. the last two
/// barycentric coordinates; segment points store the parameter in `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub kind: QuadratureKind,
    pub points: Vec<Vec2>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn barycentric(&self, i: usize) -> [f64; 3] {
        let p = self.points[i];
        [1.0 - p.x - p.y, p.x, p.y]
    }

    pub fn iter(&self) -> impl Iterator<Item = (Vec2, f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }
}

/// `n`-point Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            // three-term recurrence for P_n and P_{n-1}
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes.push(0.5 * (1.0 - x));
        weights.push(1.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

/// Gauss rule of the requested polynomial exactness.
///
/// Segments use Gauss-Legendre with `ceil((degree + 1) / 2)` points. Triangles
/// use the centroid rule (degree <= 1), the interior three-point rule
/// (degree 2), Radon's seven-point rule (degrees 3 to 5), and above that a
/// collapsed Gauss-Legendre product rule. All weights are positive and all
/// points interior.
pub fn make_quadrature(kind: QuadratureKind, degree: usize) -> Result<QuadratureRule> {
    if degree > MAX_DEGREE {
        return Err(Error::UnsupportedDegree(degree));
    }
    let (points, weights) = match kind {
        QuadratureKind::Segment => {
            let (x, w) = gauss_legendre((degree + 1).div_ceil(2));
            (x.into_iter().map(|s| Vec2::new(s, 0.0)).collect(), w)
        }
        QuadratureKind::Triangle => match degree {
            0 | 1 => (alloc::vec![Vec2::new(1.0 / 3.0, 1.0 / 3.0)], alloc::vec![0.5]),
            2 => (
                alloc::vec![
                    Vec2::new(1.0 / 6.0, 1.0 / 6.0),
                    Vec2::new(2.0 / 3.0, 1.0 / 6.0),
                    Vec2::new(1.0 / 6.0, 2.0 / 3.0),
                ],
                alloc::vec![1.0 / 6.0; 3],
            ),
            3..=5 => radon_rule(),
            _ => collapsed_rule(degree),
        },
    };
    Ok(QuadratureRule {
        kind,
        points,
        weights,
        degree,
    })
}

fn radon_rule() -> (Vec<Vec2>, Vec<f64>) {
    let r = 15f64.sqrt();
    let (a, b) = ((6.0 - r) / 21.0, (9.0 + 2.0 * r) / 21.0);
    let (c, d) = ((6.0 + r) / 21.0, (9.0 - 2.0 * r) / 21.0);
    let (wa, wc) = ((155.0 - r) / 2400.0, (155.0 + r) / 2400.0);
    let points = alloc::vec![
        Vec2::new(1.0 / 3.0, 1.0 / 3.0),
        Vec2::new(a, a),
        Vec2::new(b, a),
        Vec2::new(a, b),
        Vec2::new(c, c),
        Vec2::new(d, c),
        Vec2::new(c, d),
    ];
    (points, alloc::vec![9.0 / 80.0, wa, wa, wa, wc, wc, wc])
}

fn collapsed_rule(degree: usize) -> (Vec<Vec2>, Vec<f64>) {
    // x^a y^b times the (1-u) Jacobian has degree a+b+1 in u and b in v
    let (u, wu) = gauss_legendre((degree + 2).div_ceil(2));
    let (v, wv) = gauss_legendre((degree + 1).div_ceil(2));
    let mut points = Vec::with_capacity(u.len() * v.len());
    let mut weights = Vec::with_capacity(points.capacity());
    for (&ui, &wi) in u.iter().zip(&wu) {
        for (&vj, &wj) in v.iter().zip(&wv) {
            points.push(Vec2::new(ui, (1.0 - ui) * vj));
            weights.push(wi * wj * (1.0 - ui));
        }
    }
    (points, weights)
}

/// Exact integral of `x^a y^b` over the reference triangle: `a! b! / (a+b+2)!`.
pub fn reference_monomial_integral(a: u32, b: u32) -> f64 {
    let fact = |n: u32| (1..=n).map(|k| k as f64).product::<f64>();
    fact(a) * fact(b) / fact(a + b + 2)
}
