//! Primitive convex sets with exact signed distances and projections.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::math::Vec3;
use crate::{Error, Result};

/// A line `origin + s·dir` with unit `dir`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub origin: Vec3,
    pub dir: Vec3,
}

impl Axis {
    pub fn distance_to(&self, p: Vec3) -> f64 {
        let d = p - self.origin;
        (d - self.dir * d.dot(self.dir)).norm()
    }

    /// Point of the axis closest to `p`.
    pub fn foot(&self, p: Vec3) -> Vec3 {
        self.origin + self.dir * (p - self.origin).dot(self.dir)
    }
}

/// Closed convex primitive, or an intersection of them.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Ball {
        center: Vec3,
        radius: f64,
    },
    /// Axis-aligned ellipsoid with semi-axes along x, y, z.
    Ellipsoid {
        center: Vec3,
        semi_axes: [f64; 3],
    },
    /// `{x : ⟨normal, x − point⟩ ≤ 0}`
    HalfSpace {
        normal: Vec3,
        point: Vec3,
    },
    /// `{x : |⟨normal, x − center⟩| ≤ half_width}`
    Slab {
        normal: Vec3,
        center: Vec3,
        half_width: f64,
    },
    Intersection(Vec<Shape>),
}

const DYKSTRA_BUDGET: usize = 20_000;

impl Shape {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        match self {
            Shape::Ball { radius, .. } if !(*radius >= 0.0 && radius.is_finite()) => bad("ball radius must be finite and >= 0"),
            Shape::Ellipsoid { semi_axes, .. } if semi_axes.iter().any(|a| !(*a > 0.0 && a.is_finite())) => bad("ellipsoid semi-axes must be positive"),
            Shape::HalfSpace { normal, .. } | Shape::Slab { normal, .. } if (normal.norm() - 1.0).abs() > 1e-12 => {
                bad("half-space normal must be a unit vector")
            }
            Shape::Slab { half_width, .. } if !(*half_width > 0.0) => bad("slab half-width must be positive"),
            Shape::Intersection(parts) if parts.is_empty() => bad("intersection needs at least one component"),
            Shape::Intersection(parts) => parts.iter().try_for_each(Shape::validate),
            _ => Ok(()),
        }
    }

    /// Exact signed Euclidean distance to the boundary (negative inside).
    pub fn sdf(&self, p: Vec3) -> f64 {
        match self {
            Shape::Ball { center, radius } => (p - *center).norm() - radius,
            Shape::Ellipsoid { center, semi_axes } => ellipsoid_closest(p - *center, *semi_axes).1,
            Shape::HalfSpace { normal, point } => normal.dot(p - *point),
            Shape::Slab { normal, center, half_width } => normal.dot(p - *center).abs() - half_width,
            Shape::Intersection(parts) => {
                let inner = parts.iter().map(|s| s.sdf(p)).fold(f64::NEG_INFINITY, f64::max);
                if inner <= 0.0 {
                    inner
                } else {
                    (p - self.project(p)).norm()
                }
            }
        }
    }

    /// A function with the same sign and zero set as [`Shape::sdf`] that is
    /// cheaper to evaluate. Exact for balls and half-spaces; a lower bound on
    /// the exterior distance for intersections.
    pub fn level(&self, p: Vec3) -> f64 {
        match self {
            Shape::Ellipsoid { center, semi_axes } => {
                let d = p - *center;
                let q = Vec3::new(d.x() / semi_axes[0], d.y() / semi_axes[1], d.z() / semi_axes[2]);
                let emin = semi_axes.iter().copied().fold(f64::INFINITY, f64::min);
                (q.norm() - 1.0) * emin
            }
            Shape::Intersection(parts) => parts.iter().map(|s| s.level(p)).fold(f64::NEG_INFINITY, f64::max),
            _ => self.sdf(p),
        }
    }

    /// Nearest point of the closed set (the identity inside).
    pub fn project(&self, p: Vec3) -> Vec3 {
        match self {
            Shape::Ball { center, radius } => {
                let d = p - *center;
                let n = d.norm();
                if n <= *radius {
                    p
                } else {
                    *center + d * (radius / n)
                }
            }
            Shape::Ellipsoid { center, semi_axes } => {
                let d = p - *center;
                let (x, s) = ellipsoid_closest(d, *semi_axes);
                if s <= 0.0 {
                    p
                } else {
                    *center + x
                }
            }
            Shape::HalfSpace { normal, point } => {
                let s = normal.dot(p - *point);
                if s <= 0.0 {
                    p
                } else {
                    p - *normal * s
                }
            }
            Shape::Slab { normal, center, half_width } => {
                let s = normal.dot(p - *center);
                let clamped = s.clamp(-half_width, *half_width);
                p - *normal * (s - clamped)
            }
            Shape::Intersection(parts) => dykstra(parts, p),
        }
    }

    /// Nearest boundary point; for interior points this is the foot of the
    /// inner distance.
    pub fn boundary_point(&self, p: Vec3) -> Vec3 {
        match self {
            Shape::Ball { center, radius } => {
                let d = p - *center;
                let n = d.norm();
                if n == 0.0 {
                    *center + Vec3::Z * *radius
                } else {
                    *center + d * (radius / n)
                }
            }
            Shape::Ellipsoid { center, semi_axes } => *center + ellipsoid_closest(p - *center, *semi_axes).0,
            Shape::HalfSpace { normal, point } => p - *normal * normal.dot(p - *point),
            Shape::Slab { normal, center, half_width } => {
                let s = normal.dot(p - *center);
                let target = if s >= 0.0 { *half_width } else { -half_width };
                p - *normal * (s - target)
            }
            Shape::Intersection(parts) => {
                if self.sdf(p) > 0.0 {
                    return dykstra(parts, p);
                }
                let mut best = (f64::NEG_INFINITY, p);
                for s in parts {
                    let d = s.sdf(p);
                    if d > best.0 {
                        best = (d, s.boundary_point(p));
                    }
                }
                best.1
            }
        }
    }

    /// Exact outer unit normal at a boundary point `p`, or `None` where the
    /// boundary has no unique normal (edges of intersections and slabs count
    /// when more than one face is active within `tol`).
    pub fn surface_normal(&self, p: Vec3, tol: f64) -> Option<Vec3> {
        match self {
            Shape::Ball { center, .. } => Some((p - *center).normalized()),
            Shape::Ellipsoid { center, semi_axes } => {
                let d = p - *center;
                let g = Vec3::new(d.x() / (semi_axes[0] * semi_axes[0]), d.y() / (semi_axes[1] * semi_axes[1]), d.z() / (semi_axes[2] * semi_axes[2]));
                Some(g.normalized())
            }
            Shape::HalfSpace { normal, .. } => Some(*normal),
            Shape::Slab { normal, center, .. } => Some(if normal.dot(p - *center) >= 0.0 { *normal } else { -*normal }),
            Shape::Intersection(parts) => {
                let mut active = parts.iter().filter(|s| s.sdf(p) >= -tol);
                let first = active.next()?;
                if active.next().is_some() {
                    return None;
                }
                first.surface_normal(p, tol)
            }
        }
    }

    /// Radius of an origin-centred ball containing the set; infinite for
    /// unbounded sets.
    pub fn bounding_radius(&self) -> f64 {
        match self {
            Shape::Ball { center, radius } => center.norm() + radius,
            Shape::Ellipsoid { center, semi_axes } => center.norm() + semi_axes.iter().copied().fold(0.0, f64::max),
            Shape::HalfSpace { .. } | Shape::Slab { .. } => f64::INFINITY,
            Shape::Intersection(parts) => parts.iter().map(Shape::bounding_radius).fold(f64::INFINITY, f64::min),
        }
    }

    pub fn is_smooth(&self) -> bool {
        match self {
            Shape::Ball { .. } | Shape::Ellipsoid { .. } | Shape::HalfSpace { .. } => true,
            Shape::Slab { .. } => false,
            Shape::Intersection(parts) => parts.len() == 1 && parts[0].is_smooth(),
        }
    }

    /// A point that is interior whenever the set has interior, if one is
    /// cheaply available.
    pub fn center_hint(&self) -> Option<Vec3> {
        match self {
            Shape::Ball { center, .. } | Shape::Ellipsoid { center, .. } => Some(*center),
            Shape::HalfSpace { .. } | Shape::Slab { .. } => None,
            Shape::Intersection(parts) => {
                let centers: Vec<Vec3> = parts.iter().filter_map(Shape::center_hint).collect();
                if centers.is_empty() {
                    return None;
                }
                let mean = centers.iter().fold(Vec3::ZERO, |a, c| a + *c) / centers.len() as f64;
                Some(mean)
            }
        }
    }

    fn symmetric_about(&self, axis: &Axis) -> bool {
        const TOL: f64 = 1e-12;
        let parallel = |v: Vec3| v.cross(axis.dir).norm() <= TOL;
        match self {
            Shape::Ball { center, .. } => axis.distance_to(*center) <= TOL,
            Shape::Ellipsoid { center, semi_axes } => {
                if axis.distance_to(*center) > TOL {
                    return false;
                }
                let [a, b, c] = *semi_axes;
                if a == b && b == c {
                    true
                } else if a == b {
                    parallel(Vec3::Z)
                } else if a == c {
                    parallel(Vec3::Y)
                } else if b == c {
                    parallel(Vec3::X)
                } else {
                    false
                }
            }
            Shape::HalfSpace { normal, .. } | Shape::Slab { normal, .. } => parallel(*normal),
            Shape::Intersection(parts) => parts.iter().all(|s| s.symmetric_about(axis)),
        }
    }

    fn axis_candidates(&self, out: &mut Vec<Axis>) {
        match self {
            Shape::Ball { center, .. } => out.push(Axis { origin: *center, dir: Vec3::Z }),
            Shape::Ellipsoid { center, semi_axes } => {
                let [a, b, c] = *semi_axes;
                let dir = if a == b {
                    Vec3::Z
                } else if a == c {
                    Vec3::Y
                } else {
                    Vec3::X
                };
                out.push(Axis { origin: *center, dir });
            }
            Shape::HalfSpace { normal, point } => out.push(Axis { origin: *point, dir: *normal }),
            Shape::Slab { normal, center, .. } => out.push(Axis { origin: *center, dir: *normal }),
            Shape::Intersection(parts) => {
                let centers: Vec<Vec3> = parts.iter().filter_map(Shape::center_hint).collect();
                for (i, a) in centers.iter().enumerate() {
                    for b in &centers[i + 1..] {
                        let d = *b - *a;
                        if d.norm() > 1e-12 {
                            out.push(Axis { origin: *a, dir: d.normalized() });
                        }
                    }
                }
                for p in parts {
                    p.axis_candidates(out);
                }
                if let Some(c) = centers.first() {
                    for dir in [Vec3::X, Vec3::Y, Vec3::Z] {
                        out.push(Axis { origin: *c, dir });
                    }
                }
            }
        }
    }

    /// A line of rotational symmetry, if the construction has one.
    pub fn symmetry_axis(&self) -> Option<Axis> {
        let mut cands = Vec::new();
        self.axis_candidates(&mut cands);
        cands.into_iter().find(|a| self.symmetric_about(a)).map(|a| {
            // Canonical origin: the axis point closest to the world origin.
            Axis { origin: a.foot(Vec3::ZERO), dir: a.dir }
        })
    }
}

/// Projection onto an intersection of convex sets by Dykstra's algorithm.
fn dykstra(parts: &[Shape], p: Vec3) -> Vec3 {
    if parts.len() == 1 {
        return parts[0].project(p);
    }
    let scale = 1.0 + p.norm();
    let mut x = p;
    let mut incr = alloc::vec![Vec3::ZERO; parts.len()];
    for _ in 0..DYKSTRA_BUDGET {
        let start = x;
        for (i, s) in parts.iter().enumerate() {
            let y = x + incr[i];
            let nx = s.project(y);
            incr[i] = y - nx;
            x = nx;
        }
        if (x - start).norm() <= 1e-16 * scale {
            break;
        }
    }
    x
}

/// Closest point on the ellipsoid surface to `p` (ellipsoid centred at the
/// origin, axis-aligned) and the signed distance. Follows Eberly's robust
/// bisection on the Lagrange parameter.
pub(crate) fn ellipsoid_closest(p: Vec3, semi_axes: [f64; 3]) -> (Vec3, f64) {
    // Sort axes in decreasing order, remembering the permutation.
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| semi_axes[b].partial_cmp(&semi_axes[a]).unwrap());
    let e = [semi_axes[idx[0]], semi_axes[idx[1]], semi_axes[idx[2]]];
    let y = [p[idx[0]].abs(), p[idx[1]].abs(), p[idx[2]].abs()];
    let x = closest_sorted3(e, y);
    let mut out = [0.0; 3];
    for k in 0..3 {
        out[idx[k]] = x[k].copysign(p[idx[k]]);
    }
    let q = Vec3(out);
    let dist = (p - q).norm();
    let inside = (p.x() / semi_axes[0]).powi(2) + (p.y() / semi_axes[1]).powi(2) + (p.z() / semi_axes[2]).powi(2) < 1.0;
    (q, if inside { -dist } else { dist })
}

fn robust_length(v: &[f64]) -> f64 {
    let m = v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    if m == 0.0 {
        return 0.0;
    }
    m * v.iter().map(|c| (c / m) * (c / m)).sum::<f64>().sqrt()
}

/// Root of `Σ (r_i z_i / (s + r_i))² − 1` bracketed as in Eberly's method.
fn lagrange_root(r: &[f64], z: &[f64], g: f64) -> f64 {
    let last = z.len() - 1;
    let n: Vec<f64> = r.iter().zip(z).map(|(ri, zi)| ri * zi).collect();
    let mut s0 = z[last] - 1.0;
    let mut s1 = if g < 0.0 { 0.0 } else { robust_length(&n) - 1.0 };
    let mut s = 0.0;
    for _ in 0..2048 {
        s = 0.5 * (s0 + s1);
        if s == s0 || s == s1 {
            break;
        }
        let val: f64 = n.iter().zip(r).map(|(ni, ri)| (ni / (s + ri)).powi(2)).sum::<f64>() - 1.0;
        if val > 0.0 {
            s0 = s;
        } else if val < 0.0 {
            s1 = s;
        } else {
            break;
        }
    }
    s
}

fn closest_sorted2(e: [f64; 2], y: [f64; 2]) -> [f64; 2] {
    if y[1] > 0.0 {
        if y[0] > 0.0 {
            let z = [y[0] / e[0], y[1] / e[1]];
            let g = z[0] * z[0] + z[1] * z[1] - 1.0;
            if g != 0.0 {
                let r0 = (e[0] / e[1]).powi(2);
                let s = lagrange_root(&[r0, 1.0], &z, g);
                [r0 * y[0] / (s + r0), y[1] / (s + 1.0)]
            } else {
                y
            }
        } else {
            [0.0, e[1]]
        }
    } else {
        let numer0 = e[0] * y[0];
        let denom0 = e[0] * e[0] - e[1] * e[1];
        if numer0 < denom0 {
            let xde0 = numer0 / denom0;
            [e[0] * xde0, e[1] * (1.0 - xde0 * xde0).sqrt()]
        } else {
            [e[0], 0.0]
        }
    }
}

fn closest_sorted3(e: [f64; 3], y: [f64; 3]) -> [f64; 3] {
    if y[2] > 0.0 {
        if y[1] > 0.0 {
            if y[0] > 0.0 {
                let z = [y[0] / e[0], y[1] / e[1], y[2] / e[2]];
                let g = z.iter().map(|v| v * v).sum::<f64>() - 1.0;
                if g != 0.0 {
                    let r = [(e[0] / e[2]).powi(2), (e[1] / e[2]).powi(2), 1.0];
                    let s = lagrange_root(&r, &z, g);
                    [r[0] * y[0] / (s + r[0]), r[1] * y[1] / (s + r[1]), y[2] / (s + 1.0)]
                } else {
                    y
                }
            } else {
                let x = closest_sorted2([e[1], e[2]], [y[1], y[2]]);
                [0.0, x[0], x[1]]
            }
        } else if y[0] > 0.0 {
            let x = closest_sorted2([e[0], e[2]], [y[0], y[2]]);
            [x[0], 0.0, x[1]]
        } else {
            [0.0, 0.0, e[2]]
        }
    } else {
        let denom = [e[0] * e[0] - e[2] * e[2], e[1] * e[1] - e[2] * e[2]];
        let numer = [e[0] * y[0], e[1] * y[1]];
        if numer[0] < denom[0] && numer[1] < denom[1] {
            let xde = [numer[0] / denom[0], numer[1] / denom[1]];
            let discr = 1.0 - xde[0] * xde[0] - xde[1] * xde[1];
            if discr > 0.0 {
                return [e[0] * xde[0], e[1] * xde[1], e[2] * discr.sqrt()];
            }
        }
        let x = closest_sorted2([e[0], e[1]], [y[0], y[1]]);
        [x[0], x[1], 0.0]
    }
}
