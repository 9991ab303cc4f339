//! Exact smooth domains and the closest-point map onto their boundary.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use num_traits::Float;

use crate::error::ProjectionError;
use crate::point::Vec2;
use crate::quadrature::gauss_legendre;

/// Number of samples of the coarse parameter sweep that seeds Newton.
pub const SWEEP_SAMPLES: usize = 256;
/// Newton iterations allowed per seed.
pub const NEWTON_MAX_ITERATIONS: usize = 50;
/// Lobatto-Chebyshev sample count used by [`CurvedDomain::chord_gap`] (plus one endpoint).
pub const CHORD_GAP_SAMPLES: usize = 32;

const ARCLENGTH_PANELS: usize = 1024;

/// A smooth, closed, counterclockwise boundary curve given analytically.
///
/// The parameter `t` runs over `[0, 1)`; the polar angle is `2 pi t` for every
/// catalog curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurvedDomain {
    Disk {
        radius: f64,
    },
    Ellipse {
        a: f64,
        b: f64,
    },
    /// `r(theta) = 1 + amplitude * cos(lobes * theta)`.
    Star {
        amplitude: f64,
        lobes: u32,
    },
}

/// Record of a projection `x -> eta(x)` onto the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryTrace {
    /// The projected point `xi` (usually on a mesh facet).
    pub source: Vec2,
    /// `eta(xi)`, on the curve.
    pub projected: Vec2,
    /// Curve parameter of `projected`.
    pub parameter: f64,
    /// Exact outward unit normal at `projected`.
    pub normal: Vec2,
    /// Outward unit normal of the facet containing `source`, when known.
    pub facet_normal: Option<Vec2>,
    pub offset: Vec2,
    pub offset_length: f64,
    /// First-order optimality residual `(gamma(t) - x) . gamma'(t)`.
    pub residual: f64,
}

impl CurvedDomain {
    pub const fn unit_disk() -> Self {
        CurvedDomain::Disk { radius: 1.0 }
    }

    pub const fn ellipse() -> Self {
        CurvedDomain::Ellipse { a: 1.5, b: 1.0 }
    }

    pub const fn star() -> Self {
        CurvedDomain::Star {
            amplitude: 0.2,
            lobes: 5,
        }
    }

    /// Looks up a catalog domain. An empty parameter list selects the defaults.
    pub fn from_name(name: &str, params: &[f64]) -> Option<Self> {
        let domain = match (name, params) {
            ("disk", []) => Self::unit_disk(),
            ("disk", [r]) => CurvedDomain::Disk { radius: *r },
            ("ellipse", []) => Self::ellipse(),
            ("ellipse", [a, b]) => CurvedDomain::Ellipse { a: *a, b: *b },
            ("star", []) => Self::star(),
            ("star", [amp]) => CurvedDomain::Star {
                amplitude: *amp,
                lobes: 5,
            },
            ("star", [amp, lobes]) if *lobes >= 1.0 && lobes.fract() == 0.0 => CurvedDomain::Star {
                amplitude: *amp,
                lobes: *lobes as u32,
            },
            _ => return None,
        };
        domain.is_valid().then_some(domain)
    }

    fn is_valid(&self) -> bool {
        match *self {
            CurvedDomain::Disk { radius } => radius > 0.0 && radius.is_finite(),
            CurvedDomain::Ellipse { a, b } => a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite(),
            CurvedDomain::Star { amplitude, .. } => (0.0..0.5).contains(&amplitude),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CurvedDomain::Disk { .. } => "disk",
            CurvedDomain::Ellipse { .. } => "ellipse",
            CurvedDomain::Star { .. } => "star",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            CurvedDomain::Disk { radius } => alloc::vec![radius],
            CurvedDomain::Ellipse { a, b } => alloc::vec![a, b],
            CurvedDomain::Star { amplitude, lobes } => alloc::vec![amplitude, lobes as f64],
        }
    }

    /// The catalog domains are star-shaped about the origin.
    pub fn centroid(&self) -> Vec2 {
        Vec2::ZERO
    }

    pub fn is_convex(&self) -> bool {
        match *self {
            CurvedDomain::Disk { .. } | CurvedDomain::Ellipse { .. } => true,
            CurvedDomain::Star { amplitude, lobes } => {
                let n2 = (lobes * lobes) as f64;
                // r^2 + 2 r'^2 - r r'' >= 0 everywhere iff amplitude * (1 + n^2) <= 1
                amplitude * (1.0 + n2) <= 1.0
            }
        }
    }

    /// Radius of the largest disk about the centroid contained in the domain.
    pub fn inradius(&self) -> f64 {
        match *self {
            CurvedDomain::Disk { radius } => radius,
            CurvedDomain::Ellipse { a, b } => a.min(b),
            CurvedDomain::Star { amplitude, .. } => 1.0 - amplitude,
        }
    }

    /// Largest distance from the centroid to the curve.
    pub fn circumradius(&self) -> f64 {
        match *self {
            CurvedDomain::Disk { radius } => radius,
            CurvedDomain::Ellipse { a, b } => a.max(b),
            CurvedDomain::Star { amplitude, .. } => 1.0 + amplitude,
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            CurvedDomain::Disk { radius } => PI * radius * radius,
            CurvedDomain::Ellipse { a, b } => PI * a * b,
            CurvedDomain::Star { amplitude, .. } => PI * (1.0 + 0.5 * amplitude * amplitude),
        }
    }

    #[inline]
    fn star_radius(amplitude: f64, lobes: u32, theta: f64) -> (f64, f64, f64) {
        let n = lobes as f64;
        let (s, c) = (n * theta).sin_cos();
        (1.0 + amplitude * c, -amplitude * n * s, -amplitude * n * n * c)
    }

    /// `gamma(t)`.
    pub fn point(&self, t: f64) -> Vec2 {
        let theta = TAU * t;
        let (s, c) = theta.sin_cos();
        match *self {
            CurvedDomain::Disk { radius } => Vec2::new(radius * c, radius * s),
            CurvedDomain::Ellipse { a, b } => Vec2::new(a * c, b * s),
            CurvedDomain::Star { amplitude, lobes } => {
                let (r, _, _) = Self::star_radius(amplitude, lobes, theta);
                Vec2::new(r * c, r * s)
            }
        }
    }

    /// `gamma'(t)`.
    pub fn tangent(&self, t: f64) -> Vec2 {
        let theta = TAU * t;
        let (s, c) = theta.sin_cos();
        let d = match *self {
            CurvedDomain::Disk { radius } => Vec2::new(-radius * s, radius * c),
            CurvedDomain::Ellipse { a, b } => Vec2::new(-a * s, b * c),
            CurvedDomain::Star { amplitude, lobes } => {
                let (r, dr, _) = Self::star_radius(amplitude, lobes, theta);
                Vec2::new(dr * c - r * s, dr * s + r * c)
            }
        };
        d * TAU
    }

    /// `gamma''(t)`.
    pub fn curvature_vector(&self, t: f64) -> Vec2 {
        let theta = TAU * t;
        let (s, c) = theta.sin_cos();
        let d = match *self {
            CurvedDomain::Disk { radius } => Vec2::new(-radius * c, -radius * s),
            CurvedDomain::Ellipse { a, b } => Vec2::new(-a * c, -b * s),
            CurvedDomain::Star { amplitude, lobes } => {
                let (r, dr, ddr) = Self::star_radius(amplitude, lobes, theta);
                Vec2::new(ddr * c - 2.0 * dr * s - r * c, ddr * s + 2.0 * dr * c - r * s)
            }
        };
        d * (TAU * TAU)
    }

    /// Outward unit normal at parameter `t`.
    pub fn exact_normal(&self, t: f64) -> Vec2 {
        self.tangent(t).normalized().perp_cw()
    }

    pub fn is_inside(&self, x: Vec2) -> bool {
        match *self {
            CurvedDomain::Disk { radius } => x.norm_squared() < radius * radius,
            CurvedDomain::Ellipse { a, b } => (x.x / a).powi(2) + (x.y / b).powi(2) < 1.0,
            CurvedDomain::Star { amplitude, lobes } => {
                let theta = x.y.atan2(x.x);
                let (r, _, _) = Self::star_radius(amplitude, lobes, theta);
                x.norm() < r
            }
        }
    }

    /// Arclength of the parameter interval `[t0, t1]` by `order`-point Gauss-Legendre.
    fn arclength_panel(&self, t0: f64, t1: f64, order: usize) -> f64 {
        let (nodes, weights) = gauss_legendre(order);
        let len = t1 - t0;
        nodes
            .iter()
            .zip(&weights)
            .map(|(&s, &w)| w * self.tangent(t0 + s * len).norm())
            .sum::<f64>()
            * len
    }

    fn arclength_table(&self) -> Vec<f64> {
        let mut cumulative = Vec::with_capacity(ARCLENGTH_PANELS + 1);
        cumulative.push(0.0);
        let dt = 1.0 / ARCLENGTH_PANELS as f64;
        let mut acc = 0.0;
        for i in 0..ARCLENGTH_PANELS {
            acc += self.arclength_panel(i as f64 * dt, (i + 1) as f64 * dt, 8);
            cumulative.push(acc);
        }
        cumulative
    }

    pub fn perimeter(&self) -> f64 {
        match *self {
            CurvedDomain::Disk { radius } => TAU * radius,
            _ => *self.arclength_table().last().unwrap(),
        }
    }

    /// `n` parameters equally spaced in arclength, starting at `t = 0`.
    pub fn arclength_parameters(&self, n: usize) -> Vec<f64> {
        let fractions: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
        self.parameters_at_arclength(&fractions)
    }

    /// Maps arclength fractions in `[0, 1)` (measured from `t = 0`) to curve parameters.
    pub fn parameters_at_arclength(&self, fractions: &[f64]) -> Vec<f64> {
        if let CurvedDomain::Disk { .. } = self {
            return fractions.to_vec();
        }
        let table = self.arclength_table();
        let total = table[ARCLENGTH_PANELS];
        let dt = 1.0 / ARCLENGTH_PANELS as f64;
        fractions
            .iter()
            .map(|&frac| {
                let target = total * frac;
                let panel = match table.binary_search_by(|s| s.partial_cmp(&target).unwrap()) {
                    Ok(p) => return p as f64 * dt,
                    Err(p) => p - 1,
                };
                let t0 = panel as f64 * dt;
                let mut t = t0 + dt * (target - table[panel]) / (table[panel + 1] - table[panel]);
                for _ in 0..20 {
                    let s = table[panel] + self.arclength_panel(t0, t, 8);
                    let step = (s - target) / self.tangent(t).norm();
                    t -= step;
                    if step.abs() < 1e-16 {
                        break;
                    }
                }
                t
            })
            .collect()
    }

    /// Closest-point projection `eta(x)`.
    ///
    /// A coarse sweep of [`SWEEP_SAMPLES`] parameters seeds a safeguarded Newton
    /// iteration on `(gamma(t) - x) . gamma'(t) = 0` from every discrete local
    /// minimum of the distance; the best converged candidate wins.
    pub fn closest_point(&self, x: Vec2) -> Result<BoundaryTrace, ProjectionError> {
        let n = SWEEP_SAMPLES;
        let dt = 1.0 / n as f64;
        let dist: Vec<f64> = (0..n).map(|i| (self.point(i as f64 * dt) - x).norm_squared()).collect();

        let mut candidates: Vec<(f64, f64, f64)> = Vec::new(); // (t, distance, residual)
        let mut last_residual = f64::NAN;
        for i in 0..n {
            let prev = dist[(i + n - 1) % n];
            let next = dist[(i + 1) % n];
            if dist[i] <= prev && dist[i] <= next {
                match self.newton_project(x, i as f64 * dt, dt) {
                    Ok(c) => candidates.push(c),
                    Err(r) => last_residual = r,
                }
            }
        }
        let Some(&(t, d, residual)) = candidates.iter().min_by(|a, b| a.1.partial_cmp(&b.1).unwrap()) else {
            return Err(ProjectionError::NoConvergence {
                residual: last_residual,
            });
        };
        for &(t1, d1, _) in &candidates {
            let gap = (t1 - t).abs();
            let cyclic = gap.min(1.0 - gap);
            if (d1 - d).abs() < 1e-10 && cyclic > 0.01 {
                return Err(ProjectionError::AmbiguousProjection { t0: t, t1 });
            }
        }
        let projected = self.point(t);
        let offset = projected - x;
        Ok(BoundaryTrace {
            source: x,
            projected,
            parameter: t,
            normal: self.exact_normal(t),
            facet_normal: None,
            offset,
            offset_length: offset.norm(),
            residual,
        })
    }

    /// Returns `(t, distance, residual)` or the final residual on failure.
    fn newton_project(&self, x: Vec2, seed: f64, half_width: f64) -> Result<(f64, f64, f64), f64> {
        let g = |t: f64| {
            let d = self.point(t) - x;
            let d1 = self.tangent(t);
            (d.dot(d1), d1.norm_squared() + d.dot(self.curvature_vector(t)))
        };
        let (mut lo, mut hi) = (seed - half_width, seed + half_width);
        let bracketed = g(lo).0 <= 0.0 && g(hi).0 >= 0.0;
        let mut t = seed;
        let (mut f, mut df) = g(t);
        for _ in 0..NEWTON_MAX_ITERATIONS {
            if f == 0.0 {
                break;
            }
            if bracketed {
                if f < 0.0 {
                    lo = t;
                } else {
                    hi = t;
                }
            }
            let mut next = t - f / df;
            let outside = !(next > lo && next < hi);
            if df <= 0.0 || (bracketed && outside) {
                next = if bracketed {
                    0.5 * (lo + hi)
                } else {
                    t - (f / df.abs()).clamp(-half_width, half_width)
                };
            }
            let step = next - t;
            t = next;
            (f, df) = g(t);
            if step.abs() <= 1e-16 * t.abs().max(1.0) {
                break;
            }
        }
        let scale = self.tangent(t).norm().max(1.0);
        if !(f.abs() <= 1e-11 * scale) {
            return Err(f);
        }
        let t = t - t.floor();
        // t - floor(t) may round up to exactly 1.0
        let t = if t >= 1.0 { 0.0 } else { t };
        Ok((t, (self.point(t) - x).norm(), f))
    }

    /// Largest gap `|eta(xi) - xi|` between the chord `[a, b]` and the curve.
    ///
    /// Samples Chebyshev-Lobatto points on the chord, then polishes the best
    /// sample with a golden-section search on its neighbouring interval.
    pub fn chord_gap(&self, a: Vec2, b: Vec2) -> Result<f64, ProjectionError> {
        if a == b {
            return Ok(0.0);
        }
        let n = CHORD_GAP_SAMPLES;
        let s: Vec<f64> = (0..=n)
            .map(|j| 0.5 * (1.0 - (PI * j as f64 / n as f64).cos()))
            .collect();
        let gap = |s: f64| -> Result<f64, ProjectionError> { Ok(self.closest_point(a.lerp(b, s))?.offset_length) };
        let mut values = Vec::with_capacity(n + 1);
        for &sj in &s {
            values.push(gap(sj)?);
        }
        let (jbest, &vbest) = values
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.partial_cmp(y.1).unwrap())
            .unwrap();
        let mut lo = s[jbest.saturating_sub(1)];
        let mut hi = s[(jbest + 1).min(n)];
        let ratio = 0.5 * (5.0_f64.sqrt() - 1.0);
        let mut x1 = hi - ratio * (hi - lo);
        let mut x2 = lo + ratio * (hi - lo);
        let (mut f1, mut f2) = (gap(x1)?, gap(x2)?);
        for _ in 0..60 {
            if hi - lo < 1e-10 {
                break;
            }
            if f1 < f2 {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + ratio * (hi - lo);
                f2 = gap(x2)?;
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - ratio * (hi - lo);
                f1 = gap(x1)?;
            }
        }
        Ok(vbest.max(f1).max(f2))
    }

    /// Smallest `|gamma'(t)|` over `samples` parameters.
    pub fn min_speed(&self, samples: usize) -> f64 {
        (0..samples)
            .map(|i| self.tangent(i as f64 / samples as f64).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Checks that the sampled boundary polygon has no crossing non-adjacent segments.
    pub fn is_simple(&self, samples: usize) -> bool {
        let pts: Vec<Vec2> = (0..samples).map(|i| self.point(i as f64 / samples as f64)).collect();
        let seg = |i: usize| (pts[i], pts[(i + 1) % samples]);
        for i in 0..samples {
            for j in i + 2..samples {
                if i == 0 && j == samples - 1 {
                    continue;
                }
                let (p0, p1) = seg(i);
                let (q0, q1) = seg(j);
                let d1 = (p1 - p0).cross(q0 - p0);
                let d2 = (p1 - p0).cross(q1 - p0);
                let d3 = (q1 - q0).cross(p0 - q0);
                let d4 = (q1 - q0).cross(p1 - q0);
                if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
                    return false;
                }
            }
        }
        true
    }
}
