//! Curvature extrema and boundary integrals of bodies, with uncertainties.
//!
//! Each quantity is sampled twice (full and half sample count, full and half
//! probe), and the spread between the two is reported as its uncertainty.

use std::f64::consts::PI;

use capacity_core::geometry::{ConvexBody, SurfaceSample};
use capacity_core::{Error, Vec3};

/// Meridian panels for bodies of revolution.
pub const RING_SAMPLES: usize = 2048;
/// Mesh resolution for general bodies.
pub const MESH_SAMPLES: usize = 48;

#[derive(Debug, Clone, PartialEq)]
pub struct Measured {
    pub value: f64,
    pub uncertainty: f64,
    pub provenance: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureSummary {
    pub kappa_min: Measured,
    pub kappa_max: Measured,
    pub h_max: Measured,
    /// `∫ H dA` with `H` the mean of the principal curvatures; `None` on
    /// non-smooth bodies.
    pub mean_curvature_integral: Option<Measured>,
    pub samples: usize,
    /// Samples where the curvature probe hit an edge.
    pub ridge_samples: usize,
}

#[derive(Clone, Copy)]
struct Point {
    p: Vec3,
    w: f64,
}

fn ring_points(body: &ConvexBody, count: usize) -> Option<Vec<Point>> {
    let axis = body.symmetry_axis()?;
    let perp = axis.dir.any_orthogonal().normalized();
    let rings = body.ring_samples(count)?;
    Some(rings.iter().map(|r| Point { p: axis.origin + axis.dir * r.z + perp * r.rho, w: r.weight }).collect())
}

fn mesh_points(body: &ConvexBody, resolution: usize) -> Result<Vec<Point>, Error> {
    let s: Vec<SurfaceSample> = body.boundary_samples(resolution)?;
    let total: f64 = s.iter().map(|x| x.weight).sum();
    let scale = body.area() / total;
    Ok(s.iter().map(|x| Point { p: x.point, w: x.weight * scale }).collect())
}

struct Pass {
    kmin: f64,
    kmax: f64,
    hmax: f64,
    integral: f64,
    ridges: usize,
    count: usize,
}

fn pass(body: &ConvexBody, pts: &[Point], probe: f64) -> Pass {
    let mut out = Pass { kmin: f64::INFINITY, kmax: f64::NEG_INFINITY, hmax: f64::NEG_INFINITY, integral: 0.0, ridges: 0, count: pts.len() };
    for pt in pts {
        match body.principal_curvatures(pt.p, probe) {
            Ok([k1, k2]) if k1.is_finite() && k2.is_finite() => {
                out.kmin = out.kmin.min(k1);
                out.kmax = out.kmax.max(k2);
                out.hmax = out.hmax.max(0.5 * (k1 + k2));
                out.integral += pt.w * 0.5 * (k1 + k2);
            }
            _ => out.ridges += 1,
        }
    }
    out
}

pub fn curvature_summary(body: &ConvexBody) -> Result<CurvatureSummary, Error> {
    if let Some(r) = body.ball_radius() {
        let k = 1.0 / r;
        let exact = |v: f64| Measured { value: v, uncertainty: 0.0, provenance: "closed-form" };
        return Ok(CurvatureSummary {
            kappa_min: exact(k),
            kappa_max: exact(k),
            h_max: exact(k),
            mean_curvature_integral: Some(exact(4.0 * PI * r)),
            samples: 0,
            ridge_samples: 0,
        });
    }
    let probe = body.default_probe();
    let (fine, coarse, provenance) = match (ring_points(body, RING_SAMPLES), ring_points(body, RING_SAMPLES / 2)) {
        (Some(f), Some(c)) => (f, c, "meridian-sampling"),
        _ => (mesh_points(body, MESH_SAMPLES)?, mesh_points(body, MESH_SAMPLES / 2)?, "mesh-sampling"),
    };
    let a = pass(body, &fine, probe);
    let b = pass(body, &fine, 0.5 * probe);
    let c = pass(body, &coarse, probe);
    if a.ridges == a.count {
        return Err(Error::RidgePoint);
    }
    let spread = |x: f64, y: f64, z: f64| (x - y).abs() + (x - z).abs();
    let m = |value: f64, unc: f64| Measured { value, uncertainty: unc, provenance };
    let integral = if body.is_smooth() && a.ridges == 0 { Some(m(a.integral, spread(a.integral, b.integral, c.integral))) } else { None };
    Ok(CurvatureSummary {
        kappa_min: m(a.kmin, spread(a.kmin, b.kmin, c.kmin)),
        kappa_max: m(a.kmax, spread(a.kmax, b.kmax, c.kmax)),
        h_max: m(a.hmax, spread(a.hmax, b.hmax, c.hmax)),
        mean_curvature_integral: integral,
        samples: a.count,
        ridge_samples: a.ridges,
    })
}

/// Boundary area with an uncertainty (meshed areas are compared against a
/// half-resolution mesh).
pub fn area(body: &ConvexBody) -> Measured {
    if let Some(r) = body.ball_radius() {
        return Measured { value: 4.0 * PI * r * r, uncertainty: 0.0, provenance: "closed-form" };
    }
    if body.symmetry_axis().is_some() {
        let v = body.area();
        return Measured { value: v, uncertainty: 1e-9 * v, provenance: "meridian-quadrature" };
    }
    let v = body.area();
    let coarse = body.mesh_area(capacity_core::geometry::MEASURE_RESOLUTION / 2);
    Measured { value: v, uncertainty: (v - coarse).abs(), provenance: "mesh" }
}

pub fn volume(body: &ConvexBody) -> Measured {
    if let Some(r) = body.ball_radius() {
        return Measured { value: 4.0 * PI * r * r * r / 3.0, uncertainty: 0.0, provenance: "closed-form" };
    }
    if body.symmetry_axis().is_some() {
        let v = body.volume();
        return Measured { value: v, uncertainty: 1e-9 * v, provenance: "meridian-quadrature" };
    }
    let v = body.volume();
    let coarse = body.grid_volume(capacity_core::geometry::MEASURE_RESOLUTION / 2);
    Measured { value: v, uncertainty: (v - coarse).abs(), provenance: "grid" }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prolate_spheroid_extrema() {
        let e = ConvexBody::ellipsoid(Vec3::ZERO, [1.0, 1.0, 1.5]).unwrap();
        let s = curvature_summary(&e).unwrap();
        // κ ranges over [a/c², c/a²], H peaks at the poles
        assert!((s.kappa_min.value - 1.0 / 2.25).abs() <= s.kappa_min.uncertainty + 1e-6, "{s:?}");
        assert!((s.kappa_max.value - 1.5).abs() <= s.kappa_max.uncertainty + 1e-5, "{s:?}");
        assert!((s.h_max.value - 1.5).abs() <= s.h_max.uncertainty + 1e-5, "{s:?}");
        assert!(s.kappa_min.uncertainty < 1e-4);
        assert_eq!(s.ridge_samples, 0);
        assert!(s.mean_curvature_integral.is_some());
    }

    #[test]
    fn lens_has_ridges() {
        let lens = ConvexBody::intersection(vec![
            capacity_core::geometry::Shape::Ball { center: Vec3::new(-0.5, 0.0, 0.0), radius: 1.0 },
            capacity_core::geometry::Shape::Ball { center: Vec3::new(0.5, 0.0, 0.0), radius: 1.0 },
        ])
        .unwrap();
        let s = curvature_summary(&lens).unwrap();
        assert!(s.mean_curvature_integral.is_none());
        assert!((s.kappa_min.value - 1.0).abs() < 1e-3, "{s:?}");
        let a = area(&lens);
        assert!((a.value - 2.0 * PI).abs() < 1e-7);
    }
}
