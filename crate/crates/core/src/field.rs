//! Analytic scalar fields with closed-form partial derivatives of every order.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use num_traits::Float;

use crate::point::Vec2;

/// A smooth scalar field whose partial derivatives are available in closed form.
pub trait SmoothField: Send + Sync {
    /// `d^(a+b) v / dx^a dy^b` at `p`.
    fn derivative(&self, p: Vec2, a: usize, b: usize) -> f64;

    fn value(&self, p: Vec2) -> f64 {
        self.derivative(p, 0, 0)
    }

    fn gradient(&self, p: Vec2) -> Vec2 {
        Vec2::new(self.derivative(p, 1, 0), self.derivative(p, 0, 1))
    }

    fn laplacian(&self, p: Vec2) -> f64 {
        self.derivative(p, 2, 0) + self.derivative(p, 0, 2)
    }

    /// Total degree when the field is a polynomial.
    fn polynomial_degree(&self) -> Option<usize> {
        None
    }
}

/// Polynomial `sum c_ij x^i y^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    terms: Vec<(usize, usize, f64)>,
}

impl Polynomial {
    pub fn new(terms: &[(usize, usize, f64)]) -> Self {
        Self {
            terms: terms.iter().copied().filter(|t| t.2 != 0.0).collect(),
        }
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|&(i, j, _)| i + j).max().unwrap_or(0)
    }
}

fn falling(n: usize, k: usize) -> f64 {
    (0..k).map(|r| (n - r) as f64).product()
}

/// The field catalog used by the manufactured problems.
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Constant(f64),
    Polynomial(Polynomial),
    /// `exp(x) sin(y)`
    ExpSin,
    /// `cos(pi x) cosh(y)`
    CosCosh,
    /// `offset + amplitude * sin(x + y)`
    SinPlane {
        offset: f64,
        amplitude: f64,
    },
}

impl SmoothField for Field {
    fn derivative(&self, p: Vec2, a: usize, b: usize) -> f64 {
        match self {
            Field::Constant(c) => {
                if a + b == 0 {
                    *c
                } else {
                    0.0
                }
            }
            Field::Polynomial(poly) => poly
                .terms
                .iter()
                .filter(|&&(i, j, _)| i >= a && j >= b)
                .map(|&(i, j, c)| {
                    c * falling(i, a) * falling(j, b) * p.x.powi((i - a) as i32) * p.y.powi((j - b) as i32)
                })
                .sum(),
            Field::ExpSin => p.x.exp() * (p.y + b as f64 * FRAC_PI_2).sin(),
            Field::CosCosh => {
                let dx = PI.powi(a as i32) * (PI * p.x + a as f64 * FRAC_PI_2).cos();
                let dy = if b.is_multiple_of(2) { p.y.cosh() } else { p.y.sinh() };
                dx * dy
            }
            Field::SinPlane { offset, amplitude } => {
                let s = amplitude * (p.x + p.y + (a + b) as f64 * FRAC_PI_2).sin();
                if a + b == 0 {
                    offset + s
                } else {
                    s
                }
            }
        }
    }

    fn polynomial_degree(&self) -> Option<usize> {
        match self {
            Field::Constant(_) => Some(0),
            Field::Polynomial(p) => Some(p.degree()),
            _ => None,
        }
    }
}

/// Dense-sampling estimate of `|v|_{W^m_inf}` over the box `[lo, hi]`:
/// the largest `|D^alpha v|` with `|alpha| = m` on an `n x n` grid.
pub fn seminorm_w_inf(v: &dyn SmoothField, m: usize, lo: Vec2, hi: Vec2, n: usize) -> f64 {
    let mut best = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let p = Vec2::new(
                lo.x + (hi.x - lo.x) * i as f64 / (n - 1) as f64,
                lo.y + (hi.y - lo.y) * j as f64 / (n - 1) as f64,
            );
            for a in 0..=m {
                best = best.max(v.derivative(p, a, m - a).abs());
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(f: &Field) {
        let h = 1e-5;
        for &(x, y) in &[(0.3, -0.2), (-0.7, 0.5), (0.1, 0.9)] {
            let p = Vec2::new(x, y);
            for a in 0..3 {
                for b in 0..3 {
                    let fx = (f.derivative(p + Vec2::new(h, 0.0), a, b) - f.derivative(p - Vec2::new(h, 0.0), a, b))
                        / (2.0 * h);
                    let fy = (f.derivative(p + Vec2::new(0.0, h), a, b) - f.derivative(p - Vec2::new(0.0, h), a, b))
                        / (2.0 * h);
                    let ex = f.derivative(p, a + 1, b);
                    let ey = f.derivative(p, a, b + 1);
                    assert!((fx - ex).abs() <= 1e-6 * ex.abs().max(1.0), "{f:?} d{a}{b}/dx");
                    assert!((fy - ey).abs() <= 1e-6 * ey.abs().max(1.0), "{f:?} d{a}{b}/dy");
                }
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        fd_check(&Field::ExpSin);
        fd_check(&Field::CosCosh);
        fd_check(&Field::SinPlane {
            offset: 2.0,
            amplitude: 0.5,
        });
        fd_check(&Field::Polynomial(Polynomial::new(&[
            (3, 0, 1.0),
            (1, 2, -2.0),
            (0, 1, 4.0),
        ])));
    }

    #[test]
    fn polynomial_degree_and_values() {
        let p = Polynomial::new(&[(2, 0, 1.0), (0, 1, -1.0), (0, 0, 3.0)]);
        assert_eq!(p.degree(), 2);
        let f = Field::Polynomial(p);
        assert_eq!(f.value(Vec2::new(2.0, 1.0)), 6.0);
        assert_eq!(f.derivative(Vec2::new(2.0, 1.0), 2, 0), 2.0);
        assert_eq!(f.derivative(Vec2::new(2.0, 1.0), 3, 0), 0.0);
    }

    #[test]
    fn exp_sin_is_harmonic() {
        let p = Vec2::new(0.4, 0.7);
        assert!(Field::ExpSin.laplacian(p).abs() < 1e-14);
        assert!(seminorm_w_inf(&Field::ExpSin, 0, Vec2::new(-1.0, -1.0), Vec2::new(1.0, 1.0), 21) <= 1f64.exp());
    }
}
