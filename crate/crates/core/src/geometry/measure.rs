//! Surface area and volume.
//!
//! Balls use closed forms, bodies of revolution a 1-D quadrature over the
//! meridian in polar form about an interior point of the axis, everything
//! else the marching-tetrahedra facets (area) and a smoothed cell indicator
//! (volume).

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use super::{Axis, ConvexBody};
use crate::math::Vec3;
use crate::quadrature::{adaptive_simpson, Tolerance};

/// Default grid resolution for the meshed fallbacks.
pub const MEASURE_RESOLUTION: usize = 160;

/// Point of the meridian of a body of revolution, in axis coordinates.
///
/// `z` runs along the axis from its origin, `rho ≥ 0` is the distance from
/// the axis. `weight` is the area of the band of `∂K` the sample stands for
/// (`2π·rho·dℓ`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingSample {
    pub rho: f64,
    pub z: f64,
    pub normal_rho: f64,
    pub normal_z: f64,
    pub weight: f64,
}

struct Meridian {
    center: Vec3,
    axis: Axis,
    perp: Vec3,
}

impl Meridian {
    fn dir(&self, phi: f64) -> Vec3 {
        self.axis.dir * phi.cos() + self.perp * phi.sin()
    }
}

impl ConvexBody {
    fn meridian(&self) -> Option<Meridian> {
        let axis = self.symmetry_axis()?;
        let center = axis.foot(self.interior_point());
        if !(self.level(center) < 0.0) {
            return None;
        }
        Some(Meridian { center, perp: axis.dir.any_orthogonal(), axis })
    }

    /// Boundary point, outer normal and `dℓ/dφ` along the meridian ray at
    /// polar angle `phi`.
    fn meridian_point(&self, m: &Meridian, phi: f64) -> (Vec3, Vec3, f64) {
        let dir = m.dir(phi);
        let s = self.ray_to_boundary(m.center, dir);
        let p = m.center + dir * s;
        let n = self.outer_normal(p);
        (p, n, s / n.dot(dir).max(1e-12))
    }

    /// Surface area `vol(∂K)`.
    pub fn area(&self) -> f64 {
        if let Some(r) = self.ball_radius() {
            return 4.0 * PI * r * r;
        }
        if let Some(m) = self.meridian() {
            let f = |phi: f64| {
                let (p, _, dl) = self.meridian_point(&m, phi);
                2.0 * PI * m.axis.distance_to(p) * dl
            };
            return adaptive_simpson(f, 0.0, PI, Tolerance { abs: 1e-12, rel: 1e-11, max_depth: 40 }).value;
        }
        self.mesh_area(MEASURE_RESOLUTION)
    }

    /// Volume `vol(K)`.
    pub fn volume(&self) -> f64 {
        if let Some(r) = self.ball_radius() {
            return 4.0 / 3.0 * PI * r * r * r;
        }
        if let Some(m) = self.meridian() {
            let f = |phi: f64| {
                let s = self.ray_to_boundary(m.center, m.dir(phi));
                2.0 * PI * s * s * s / 3.0 * phi.sin()
            };
            return adaptive_simpson(f, 0.0, PI, Tolerance { abs: 1e-12, rel: 1e-11, max_depth: 40 }).value;
        }
        self.grid_volume(MEASURE_RESOLUTION)
    }

    /// Σ of facet areas of the marching-tetrahedra surface (`0` when meshing fails).
    pub fn mesh_area(&self, resolution: usize) -> f64 {
        match self.triangulate(resolution) {
            Ok(t) => t.iter().map(|[a, b, c]| 0.5 * (*b - *a).cross(*c - *a).norm()).sum(),
            Err(_) => 0.0,
        }
    }

    /// Cell-centred indicator quadrature, with the indicator smoothed over a
    /// cell width across the boundary.
    pub fn grid_volume(&self, resolution: usize) -> f64 {
        let half = self.bounding_radius() * 1.02;
        if !(half > 0.0) {
            return 0.0;
        }
        let n = resolution.max(1);
        let h = 2.0 * half / n as f64;
        let mut total = 0.0;
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    let c = Vec3::new(-half + (i as f64 + 0.5) * h, -half + (j as f64 + 0.5) * h, -half + (k as f64 + 0.5) * h);
                    let l = self.level(c);
                    if l < -h {
                        total += 1.0;
                    } else if l < h {
                        total += (0.5 - self.sdf(c) / h).clamp(0.0, 1.0);
                    }
                }
            }
        }
        total * h * h * h
    }

    /// Meridian samples of a body of revolution: `count` midpoint panels in
    /// the polar angle about an axis point. `None` without a symmetry axis.
    pub fn ring_samples(&self, count: usize) -> Option<Vec<RingSample>> {
        let m = self.meridian()?;
        let dphi = PI / count as f64;
        let out = (0..count)
            .map(|i| {
                let phi = (i as f64 + 0.5) * dphi;
                let (p, n, dl) = self.meridian_point(&m, phi);
                let rel = p - m.axis.origin;
                let z = rel.dot(m.axis.dir);
                let radial = rel - m.axis.dir * z;
                let rho = radial.norm();
                let e_rho = if rho > 0.0 { radial / rho } else { m.perp };
                RingSample { rho, z, normal_rho: n.dot(e_rho), normal_z: n.dot(m.axis.dir), weight: 2.0 * PI * rho * dl * dphi }
            })
            .collect();
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::super::Shape;
    use super::*;
    use crate::quadrature::adaptive_simpson;
    use alloc::vec;

    fn lens() -> ConvexBody {
        ConvexBody::intersection(vec![
            Shape::Ball { center: Vec3::new(-0.5, 0.0, 0.0), radius: 1.0 },
            Shape::Ball { center: Vec3::new(0.5, 0.0, 0.0), radius: 1.0 },
        ])
        .unwrap()
    }

    // surface of revolution x = a·sin t, z = c·cos t
    fn spheroid_area_oracle(a: f64, c: f64) -> f64 {
        let f = |t: f64| 2.0 * PI * a * t.sin() * (a * a * t.cos() * t.cos() + c * c * t.sin() * t.sin()).sqrt();
        adaptive_simpson(f, 0.0, PI, Tolerance::default()).value
    }

    #[test]
    fn unit_ball_measures() {
        let b = ConvexBody::ball(Vec3::ZERO, 1.0).unwrap();
        assert!((b.area() - 4.0 * PI).abs() < 1e-12);
        assert!((b.volume() - 4.0 * PI / 3.0).abs() < 1e-12);
        let p = b.parallel_body(0.25).unwrap();
        assert!((p.area() - 4.0 * PI * 1.5625).abs() < 1e-12);
    }

    #[test]
    fn point_like_body_has_no_volume() {
        let b = ConvexBody::ball(Vec3::ZERO, 0.0).unwrap();
        assert_eq!(b.volume(), 0.0);
        assert_eq!(b.grid_volume(16), 0.0);
    }

    #[test]
    fn spheroid_meridian_quadrature() {
        let e = ConvexBody::ellipsoid(Vec3::ZERO, [1.0, 1.0, 1.5]).unwrap();
        let oracle = spheroid_area_oracle(1.0, 1.5);
        assert!((e.area() - oracle).abs() < 1e-8 * oracle, "{} vs {oracle}", e.area());
        assert!((e.volume() - 2.0 * PI).abs() < 1e-8);
    }

    #[test]
    fn spheroid_mesh_matches_oracle() {
        let e = ConvexBody::ellipsoid(Vec3::ZERO, [1.0, 1.0, 1.5]).unwrap();
        let oracle = spheroid_area_oracle(1.0, 1.5);
        let s: f64 = e.boundary_samples(64).unwrap().iter().map(|x| x.weight).sum();
        assert!((s - oracle).abs() < 0.01 * oracle);
        let v = e.grid_volume(64);
        assert!((v - 2.0 * PI).abs() < 0.01 * 2.0 * PI, "{v}");
    }

    #[test]
    fn lens_area_and_volume() {
        // two spherical caps of height 1/2 on unit spheres
        let k = lens();
        assert!((k.area() - 2.0 * PI).abs() < 1e-8, "{}", k.area());
        let cap = PI * 0.25 * (3.0 - 0.5) / 3.0;
        assert!((k.volume() - 2.0 * cap).abs() < 1e-8);
    }

    #[test]
    fn ring_weights_sum_to_area() {
        let e = ConvexBody::ellipsoid(Vec3::ZERO, [1.0, 1.0, 1.5]).unwrap();
        let rings = e.ring_samples(2000).unwrap();
        let s: f64 = rings.iter().map(|r| r.weight).sum();
        assert!((s - e.area()).abs() < 1e-5 * s);
        for r in &rings {
            assert!((r.normal_rho.hypot(r.normal_z) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn minkowski_volume_inequality() {
        let b = ConvexBody::ball(Vec3::ZERO, 1.0).unwrap();
        assert!((b.area() - 3.0 * b.volume()).abs() < 1e-12);
        let e = ConvexBody::ellipsoid(Vec3::ZERO, [1.0, 1.0, 1.5]).unwrap();
        let h0 = 1.0 / 2.25;
        assert!(e.area() > 3.0 * h0 * e.volume());
    }
}
