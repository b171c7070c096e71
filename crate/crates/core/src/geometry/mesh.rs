//! Boundary extraction by marching tetrahedra on the level function.

use alloc::vec::Vec;

use super::{ConvexBody, SurfaceSample};
use crate::math::Vec3;
use crate::{Error, Result};

// Kuhn split of the unit cube along the 0–7 diagonal; corner bits are x=1, y=2, z=4.
const TETS: [[usize; 4]; 6] = [[0, 1, 3, 7], [0, 3, 2, 7], [0, 2, 6, 7], [0, 6, 4, 7], [0, 4, 5, 7], [0, 5, 1, 7]];

/// Smallest resolution accepted by [`ConvexBody::boundary_samples`].
pub const MIN_RESOLUTION: usize = 8;

fn crossing(pa: Vec3, va: f64, pb: Vec3, vb: f64) -> Vec3 {
    let t = va / (va - vb);
    pa + (pb - pa) * t
}

impl ConvexBody {
    /// Flat triangles of the zero level on a `resolution³` grid spanning the
    /// bounding cube.
    pub(crate) fn triangulate(&self, resolution: usize) -> Result<Vec<[Vec3; 3]>> {
        if resolution < MIN_RESOLUTION {
            return Err(Error::MeshingFailure(resolution));
        }
        let half = self.bounding_radius() * 1.02 + 1e-9;
        let n = resolution;
        let h = 2.0 * half / n as f64;
        let np = n + 1;
        let node = |i: usize, j: usize, k: usize| Vec3::new(-half + i as f64 * h, -half + j as f64 * h, -half + k as f64 * h);
        let mut values = alloc::vec![0.0; np * np * np];
        for k in 0..np {
            for j in 0..np {
                for i in 0..np {
                    values[(k * np + j) * np + i] = self.level(node(i, j, k));
                }
            }
        }
        let mut tris = Vec::new();
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    let mut cp = [Vec3::ZERO; 8];
                    let mut cv = [0.0; 8];
                    let mut any_in = false;
                    let mut any_out = false;
                    for c in 0..8 {
                        let (di, dj, dk) = (c & 1, (c >> 1) & 1, (c >> 2) & 1);
                        cp[c] = node(i + di, j + dj, k + dk);
                        cv[c] = values[((k + dk) * np + j + dj) * np + i + di];
                        if cv[c] < 0.0 {
                            any_in = true;
                        } else {
                            any_out = true;
                        }
                    }
                    if !(any_in && any_out) {
                        continue;
                    }
                    for tet in TETS {
                        let (inside, outside): (Vec<usize>, Vec<usize>) = tet.iter().partition(|&&c| cv[c] < 0.0);
                        let x = |a: usize, b: usize| crossing(cp[a], cv[a], cp[b], cv[b]);
                        match inside.len() {
                            1 => {
                                let a = inside[0];
                                tris.push([x(a, outside[0]), x(a, outside[1]), x(a, outside[2])]);
                            }
                            3 => {
                                let b = outside[0];
                                tris.push([x(inside[0], b), x(inside[1], b), x(inside[2], b)]);
                            }
                            2 => {
                                let (a, b) = (inside[0], inside[1]);
                                let (c, d) = (outside[0], outside[1]);
                                let (ac, ad, bd, bc) = (x(a, c), x(a, d), x(b, d), x(b, c));
                                tris.push([ac, ad, bd]);
                                tris.push([ac, bd, bc]);
                            }
                            _ => {}
                        }
                    }
                }
            }
        }
        if tris.is_empty() {
            return Err(Error::MeshingFailure(resolution));
        }
        Ok(tris)
    }

    /// Quadrature samples of `∂K`: one per facet of the marching-tetrahedra
    /// surface, placed at the facet centroid's nearest boundary point, with
    /// the facet area as weight and the exact outer normal.
    pub fn boundary_samples(&self, resolution: usize) -> Result<Vec<SurfaceSample>> {
        let tris = self.triangulate(resolution)?;
        let mut out = Vec::with_capacity(tris.len());
        for [a, b, c] in tris {
            let area = 0.5 * (b - a).cross(c - a).norm();
            if !(area > 0.0) {
                continue;
            }
            let centroid = (a + b + c) / 3.0;
            let point = self.boundary_point(centroid);
            let normal = self.outer_normal(point);
            out.push(SurfaceSample { point, normal, weight: area, curvatures: None });
        }
        if out.is_empty() {
            return Err(Error::MeshingFailure(resolution));
        }
        Ok(out)
    }

    /// Same as [`ConvexBody::boundary_samples`] with principal curvatures
    /// attached (`None` where the curvature probe hits a ridge).
    pub fn boundary_samples_with_curvature(&self, resolution: usize) -> Result<Vec<SurfaceSample>> {
        let probe = self.default_probe();
        let mut s = self.boundary_samples(resolution)?;
        for sample in &mut s {
            sample.curvatures = self.principal_curvatures(sample.point, probe).ok();
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn unit_sphere_area() {
        let b = ConvexBody::ball(Vec3::ZERO, 1.0).unwrap();
        let s = b.boundary_samples(64).unwrap();
        let area: f64 = s.iter().map(|x| x.weight).sum();
        assert!((area - 4.0 * PI).abs() < 0.01 * 4.0 * PI, "{area}");
        for x in &s {
            assert!((x.normal.norm() - 1.0).abs() < 1e-12);
            assert!(x.weight > 0.0);
            // outward: sdf increases along the normal
            assert!(b.sdf(x.point + x.normal * 1e-3) > b.sdf(x.point));
        }
    }

    #[test]
    fn degenerate_resolution() {
        let b = ConvexBody::ball(Vec3::ZERO, 1.0).unwrap();
        assert!(matches!(b.boundary_samples(4), Err(Error::MeshingFailure(4))));
    }
}
