//! Coefficients and data of the Neumann problem
//! `-div(p grad u) + q u = f` in the domain, `p grad u . n = g` on its boundary.

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::{Field, Polynomial, SmoothField};
use crate::geometry::CurvedDomain;
use crate::point::Vec2;

pub type ScalarFn = Arc<dyn Fn(Vec2) -> f64 + Send + Sync>;
/// Neumann datum as a function of a boundary point and the exact outward normal there.
pub type NeumannFn = Arc<dyn Fn(Vec2, Vec2) -> f64 + Send + Sync>;

/// Names accepted by [`ProblemData::catalog`].
pub const CATALOG: [&str; 4] = ["constant", "poly_k", "exp_sin", "trig"];

#[derive(Clone)]
pub struct ProblemData {
    pub name: String,
    pub diffusion: Arc<dyn SmoothField>,
    pub reaction: Arc<dyn SmoothField>,
    pub source: ScalarFn,
    pub neumann: NeumannFn,
    pub exact: Option<Arc<dyn SmoothField>>,
}

impl core::fmt::Debug for ProblemData {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ProblemData")
            .field("name", &self.name)
            .field("manufactured", &self.exact.is_some())
            .finish()
    }
}

/// `-div(p grad u) + q u` from closed-form derivatives.
pub fn strong_operator(u: &dyn SmoothField, p: &dyn SmoothField, q: &dyn SmoothField, x: Vec2) -> f64 {
    -(p.value(x) * u.laplacian(x) + p.gradient(x).dot(u.gradient(x))) + q.value(x) * u.value(x)
}

impl ProblemData {
    /// Data manufactured from an exact solution: `f = -div(p grad u) + q u`
    /// and `g(x, n) = p(x) grad u(x) . n`.
    pub fn manufactured<U, P, Q>(name: &str, exact: U, diffusion: P, reaction: Q) -> Self
    where
        U: SmoothField + 'static,
        P: SmoothField + 'static,
        Q: SmoothField + 'static,
    {
        let exact: Arc<dyn SmoothField> = Arc::new(exact);
        let diffusion: Arc<dyn SmoothField> = Arc::new(diffusion);
        let reaction: Arc<dyn SmoothField> = Arc::new(reaction);
        let source: ScalarFn = {
            let (u, p, q) = (exact.clone(), diffusion.clone(), reaction.clone());
            Arc::new(move |x| strong_operator(&*u, &*p, &*q, x))
        };
        let neumann: NeumannFn = {
            let (u, p) = (exact.clone(), diffusion.clone());
            Arc::new(move |x, n| p.value(x) * u.gradient(x).dot(n))
        };
        Self {
            name: name.to_string(),
            diffusion,
            reaction,
            source,
            neumann,
            exact: Some(exact),
        }
    }

    /// Manufactured catalog problem. `poly_k` uses a polynomial of total degree `degree`.
    pub fn catalog(name: &str, degree: usize) -> Option<Self> {
        let unit = || Field::Constant(1.0);
        let data = match name {
            "constant" => Self::manufactured(name, unit(), unit(), unit()),
            "poly_k" => Self::manufactured(name, Field::Polynomial(patch_polynomial(degree)?), unit(), unit()),
            "exp_sin" => Self::manufactured(
                name,
                Field::ExpSin,
                Field::SinPlane {
                    offset: 2.0,
                    amplitude: 0.5,
                },
                unit(),
            ),
            "trig" => Self::manufactured(name, Field::CosCosh, unit(), Field::Constant(2.0)),
            _ => return None,
        };
        Some(data)
    }

    /// Polynomial degree of the exact solution, if it is a polynomial.
    pub fn exact_polynomial_degree(&self) -> Option<usize> {
        self.exact.as_ref().and_then(|u| u.polynomial_degree())
    }

    /// Sampled lower bounds `(min p, min q)` over the box `[lo, hi]`; fails unless both are positive.
    pub fn check_coefficients(&self, lo: Vec2, hi: Vec2, n: usize) -> Result<(f64, f64)> {
        let mut pmin = f64::INFINITY;
        let mut qmin = f64::INFINITY;
        for i in 0..n {
            for j in 0..n {
                let x = Vec2::new(
                    lo.x + (hi.x - lo.x) * i as f64 / (n - 1) as f64,
                    lo.y + (hi.y - lo.y) * j as f64 / (n - 1) as f64,
                );
                pmin = pmin.min(self.diffusion.value(x));
                qmin = qmin.min(self.reaction.value(x));
            }
        }
        if pmin > 0.0 && qmin > 0.0 {
            Ok((pmin, qmin))
        } else {
            Err(Error::InvalidInput(
                "diffusion and reaction must be bounded below by a positive constant",
            ))
        }
    }

    /// Largest violation of the manufactured relations at the given interior
    /// points and boundary parameters.
    pub fn consistency_residual(&self, domain: &CurvedDomain, interior: &[Vec2], boundary: &[f64]) -> Result<f64> {
        let u = self.exact.as_ref().ok_or(Error::MissingExact)?;
        let mut worst = 0.0_f64;
        for &x in interior {
            let f = strong_operator(&**u, &*self.diffusion, &*self.reaction, x);
            worst = worst.max((f - (self.source)(x)).abs());
        }
        for &t in boundary {
            let x = domain.point(t);
            let n = domain.exact_normal(t);
            let g = self.diffusion.value(x) * u.gradient(x).dot(n);
            worst = worst.max((g - (self.neumann)(x, n)).abs());
        }
        Ok(worst)
    }
}

/// Degree-`k` polynomial used for the patch test.
pub fn patch_polynomial(k: usize) -> Option<Polynomial> {
    let terms: Vec<(usize, usize, f64)> = match k {
        1 => alloc::vec![(0, 0, 1.0), (1, 0, 2.0), (0, 1, -1.0)],
        2 => alloc::vec![(2, 0, 1.0), (0, 1, -1.0), (0, 0, 3.0)],
        3 => alloc::vec![(3, 0, 1.0), (1, 2, -2.0), (2, 0, 1.0), (0, 1, -1.0), (0, 0, 3.0)],
        _ => return None,
    };
    Some(Polynomial::new(&terms))
}
