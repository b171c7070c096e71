//! Convex bodies in ℝ³ described by exact signed-distance functions.
//!
//! A [`ConvexBody`] is a [`Shape`] together with an outer offset `r ≥ 0`, so
//! that the parallel body `K_r = K + r·B` is represented exactly by
//! `sdf_{K_r} = sdf_K − r`. All operations are pure.

mod convexity;
mod curvature;
mod measure;
mod mesh;
mod shape;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

pub use convexity::LambdaReport;
pub use measure::{RingSample, MEASURE_RESOLUTION};
pub use mesh::MIN_RESOLUTION as MIN_MESH_RESOLUTION;
pub use shape::{Axis, Shape};

use crate::math::Vec3;
use crate::{Error, Result};

/// Point of `∂K` with its outer unit normal and an area weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceSample {
    pub point: Vec3,
    pub normal: Vec3,
    pub weight: f64,
    pub curvatures: Option<[f64; 2]>,
}

/// Compact convex body in ℝ³.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexBody {
    shape: Shape,
    offset: f64,
    bounding_radius: f64,
    interior: Vec3,
}

/// Iteration budget and tolerance of [`ConvexBody::metric_projection`].
pub const PROJECTION_BUDGET: usize = 200;
pub const PROJECTION_TOL: f64 = 1e-10;

impl ConvexBody {
    pub fn new(shape: Shape) -> Result<Self> {
        shape.validate()?;
        let bounding_radius = shape.bounding_radius();
        if !bounding_radius.is_finite() {
            return Err(Error::InvalidParameter("body is unbounded".into()));
        }
        let interior = shape.center_hint().unwrap_or(Vec3::ZERO);
        let depth = shape.sdf(interior);
        if depth > 0.0 {
            return Err(Error::InvalidParameter("could not locate an interior point (empty intersection?)".into()));
        }
        Ok(ConvexBody { shape, offset: 0.0, bounding_radius, interior })
    }

    pub fn ball(center: Vec3, radius: f64) -> Result<Self> {
        Self::new(Shape::Ball { center, radius })
    }

    pub fn ellipsoid(center: Vec3, semi_axes: [f64; 3]) -> Result<Self> {
        Self::new(Shape::Ellipsoid { center, semi_axes })
    }

    pub fn intersection(parts: Vec<Shape>) -> Result<Self> {
        Self::new(Shape::Intersection(parts))
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// Outer offset relative to the underlying shape.
    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Ambient dimension `n + 1`; meshed operations are fixed to ℝ³.
    pub fn dimension(&self) -> usize {
        3
    }

    pub fn bounding_radius(&self) -> f64 {
        self.bounding_radius
    }

    /// A point strictly inside the body (unless the body is degenerate).
    pub fn interior_point(&self) -> Vec3 {
        self.interior
    }

    /// `C^{1,1}` boundary: smooth primitives and every positive offset.
    pub fn is_smooth(&self) -> bool {
        self.offset > 0.0 || self.shape.is_smooth()
    }

    pub fn kind(&self) -> &'static str {
        match self.shape {
            Shape::Ball { .. } => "ball",
            Shape::Ellipsoid { .. } => "ellipsoid",
            Shape::Intersection(_) => "intersection",
            Shape::HalfSpace { .. } | Shape::Slab { .. } => "halfspace-slab",
        }
    }

    /// One-line construction record for reports.
    pub fn describe(&self) -> String {
        let base = match &self.shape {
            Shape::Ball { center, radius } => format!("ball(center={:?}, radius={radius})", center.0),
            Shape::Ellipsoid { center, semi_axes } => format!("ellipsoid(center={:?}, semi_axes={semi_axes:?})", center.0),
            Shape::Intersection(parts) => format!("intersection({} components)", parts.len()),
            s => format!("{s:?}"),
        };
        if self.offset > 0.0 {
            format!("parallel({base}, r={})", self.offset)
        } else {
            base
        }
    }

    /// Closed-form radius if the body is a (parallel) ball.
    pub fn ball_radius(&self) -> Option<f64> {
        match &self.shape {
            Shape::Ball { radius, .. } => Some(radius + self.offset),
            Shape::Ellipsoid { semi_axes: [a, b, c], .. } if a == b && b == c => Some(a + self.offset),
            _ => None,
        }
    }

    pub fn sdf(&self, p: Vec3) -> f64 {
        self.shape.sdf(p) - self.offset
    }

    /// Same sign and zero set as [`ConvexBody::sdf`], cheaper away from the
    /// boundary. Never exceeds the exact exterior distance.
    pub fn level(&self, p: Vec3) -> f64 {
        let l = self.shape.level(p);
        if self.offset == 0.0 || l <= 0.0 || l > self.offset {
            l - self.offset
        } else {
            self.shape.sdf(p) - self.offset
        }
    }

    /// Nearest point of the body (identity inside).
    pub fn project(&self, p: Vec3) -> Vec3 {
        let q = self.shape.project(p);
        if self.offset == 0.0 {
            return q;
        }
        let d = p - q;
        let n = d.norm();
        if n <= self.offset {
            p
        } else {
            q + d * (self.offset / n)
        }
    }

    /// Nearest boundary point from either side.
    pub fn boundary_point(&self, p: Vec3) -> Vec3 {
        if self.sdf(p) > 0.0 {
            return self.project(p);
        }
        if self.offset == 0.0 {
            return self.shape.boundary_point(p);
        }
        // inside K_r: walk outward along the distance gradient
        let n = self.outer_normal_near(p);
        p - n * self.sdf(p)
    }

    /// Central-difference gradient of the exact sdf.
    pub fn gradient(&self, p: Vec3, step: f64) -> Vec3 {
        let mut g = [0.0; 3];
        for (i, gi) in g.iter_mut().enumerate() {
            let e = Vec3::axis(i) * step;
            *gi = (self.sdf(p + e) - self.sdf(p - e)) / (2.0 * step);
        }
        Vec3(g)
    }

    fn level_gradient(&self, p: Vec3, step: f64) -> Vec3 {
        let mut g = [0.0; 3];
        for (i, gi) in g.iter_mut().enumerate() {
            let e = Vec3::axis(i) * step;
            *gi = (self.level(p + e) - self.level(p - e)) / (2.0 * step);
        }
        Vec3(g)
    }

    fn scale(&self) -> f64 {
        self.bounding_radius.max(1e-300)
    }

    fn outer_normal_near(&self, p: Vec3) -> Vec3 {
        let g = self.level_gradient(p, 1e-7 * self.scale()).normalized();
        if g.norm() > 0.5 {
            g
        } else {
            (p - self.interior).normalized()
        }
    }

    /// Outer unit normal at (or next to) a boundary point.
    ///
    /// At non-smooth points this is a supporting normal: the point is pushed
    /// off the body along the level-set gradient and the normal is read back
    /// from the exact projection of the pushed point.
    pub fn outer_normal(&self, p: Vec3) -> Vec3 {
        if self.offset > 0.0 {
            let d = p - self.shape.project(p);
            if d.norm() > 0.0 {
                return d.normalized();
            }
        } else if let Some(n) = self.shape.surface_normal(p, 1e-12 * self.scale()) {
            return n;
        }
        let g0 = self.outer_normal_near(p);
        let q = p + g0 * (1e-4 * self.scale());
        let d = q - self.project(q);
        if d.norm() > 0.0 {
            d.normalized()
        } else {
            g0
        }
    }

    /// Metric projection `ξ(p)` of an exterior point onto `∂K`.
    ///
    /// Uses only the sdf: the search direction is the numerical distance
    /// gradient at `p`, and a damped Newton iteration along that ray lands on
    /// the zero level.
    pub fn metric_projection(&self, p: Vec3) -> Result<Vec3> {
        let d = self.sdf(p);
        if !(d > 0.0) {
            return Err(Error::PointInsideBody { sdf: d });
        }
        let step = 1e-5 * d.max(1e-3 * self.scale());
        let dir = self.gradient(p, step).normalized();
        let mut tau = d;
        let tol = PROJECTION_TOL * self.scale().max(d);
        for _ in 0..PROJECTION_BUDGET {
            let q = p - dir * tau;
            let s = self.sdf(q);
            if s.abs() <= tol {
                return Ok(q);
            }
            // d/dτ sdf(p − τ·dir) ≈ −1 at the solution
            tau += s;
            if !(tau > 0.0) {
                tau = 0.5 * d;
            }
        }
        Err(Error::NoConvergence { what: "metric projection", budget: PROJECTION_BUDGET })
    }

    /// Outer parallel body `K_r`.
    pub fn parallel_body(&self, r: f64) -> Result<ConvexBody> {
        if !(r >= 0.0) {
            return Err(Error::NegativeOffset(r));
        }
        Ok(ConvexBody { shape: self.shape.clone(), offset: self.offset + r, bounding_radius: self.bounding_radius + r, interior: self.interior })
    }

    /// Rotational symmetry axis, when the construction has one.
    pub fn symmetry_axis(&self) -> Option<Axis> {
        self.shape.symmetry_axis()
    }

    /// Distance `s` from `origin` (interior) to `∂K` along unit `dir`.
    pub fn ray_to_boundary(&self, origin: Vec3, dir: Vec3) -> f64 {
        let mut lo = 0.0;
        let mut hi = self.bounding_radius + origin.norm() + 1e-9;
        while self.level(origin + dir * hi) <= 0.0 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.level(origin + dir * mid) <= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// `count` boundary points from rays on a Fibonacci sphere of directions
    /// centred at the interior point, with their outer normals.
    pub fn ray_samples(&self, count: usize) -> Vec<(Vec3, Vec3)> {
        let golden = core::f64::consts::PI * (3.0 - 5.0f64.sqrt());
        (0..count)
            .map(|i| {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                let r = (1.0 - z * z).sqrt();
                let th = golden * i as f64;
                let dir = Vec3::new(r * th.cos(), r * th.sin(), z);
                let p = self.interior + dir * self.ray_to_boundary(self.interior, dir);
                (p, self.outer_normal(p))
            })
            .collect()
    }
}
