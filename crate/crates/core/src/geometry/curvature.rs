use super::ConvexBody;
use crate::math::{sym2_eigenvalues, Vec3};
use crate::{Error, Result};

#[allow(unused_imports)]
use num_traits::Float;

/// `1 − t·κ_t` below this counts as a focal (infinite-curvature) probe.
const FOCAL_GAP: f64 = 1e-3;

impl ConvexBody {
    /// Tangential block of the sdf Hessian at `q`, eigenvalues ascending.
    fn tangent_hessian(&self, q: Vec3, normal: Vec3, step: f64) -> [f64; 2] {
        let t1 = normal.any_orthogonal();
        let t2 = normal.cross(t1);
        let f0 = self.sdf(q);
        let second = |dir: Vec3| (self.sdf(q + dir * step) - 2.0 * f0 + self.sdf(q - dir * step)) / (step * step);
        let a = second(t1);
        let c = second(t2);
        let m = second((t1 + t2) / core::f64::consts::SQRT_2);
        sym2_eigenvalues(a, m - 0.5 * (a + c), c)
    }

    /// Probe length suited to [`ConvexBody::principal_curvatures`]: a
    /// finite-difference step for smooth bodies, the offset scale `h` of the
    /// `{h, h/2, h/4}` schedule otherwise.
    pub fn default_probe(&self) -> f64 {
        if self.is_smooth() {
            1e-4 * self.bounding_radius()
        } else {
            1e-2 * self.bounding_radius()
        }
    }

    /// Principal curvatures of `∂K` at the boundary point `p`, ascending.
    ///
    /// Smooth bodies: second differences of the signed distance along the
    /// tangent plane with step `probe`. Non-smooth bodies: curvatures `(κᵢ)_t`
    /// of the parallel surfaces through `p + t·n` for `t ∈ {probe, probe/2,
    /// probe/4}`, mapped back by `κ = κ_t / (1 − tκ_t)` and Richardson
    /// extrapolated to `t → 0`. A direction whose `t·κ_t → 1` at every probe
    /// is focal and reported as `+∞`.
    pub fn principal_curvatures(&self, p: Vec3, probe: f64) -> Result<[f64; 2]> {
        if !(probe > 0.0) {
            return Err(Error::InvalidParameter("probe must be positive".into()));
        }
        let s = self.sdf(p);
        if s.abs() > 1e-7 * self.bounding_radius().max(1.0) {
            return Err(Error::InvalidParameter(alloc::format!("point is not on the boundary (sdf = {s:e})")));
        }
        let normal = self.outer_normal(p);
        if self.is_smooth() {
            return Ok(self.tangent_hessian(p, normal, probe));
        }
        let ts = [probe, 0.5 * probe, 0.25 * probe];
        let mut mapped = [[0.0; 2]; 3];
        for (k, &t) in ts.iter().enumerate() {
            let q = p + normal * t;
            let kt = self.tangent_hessian(q, normal, t / 64.0);
            for i in 0..2 {
                let gap = 1.0 - t * kt[i];
                mapped[k][i] = if gap < FOCAL_GAP { f64::INFINITY } else { kt[i] / gap };
            }
        }
        let mut out = [0.0; 2];
        for i in 0..2 {
            let col = [mapped[0][i], mapped[1][i], mapped[2][i]];
            let infinite = col.iter().filter(|v| v.is_infinite()).count();
            out[i] = match infinite {
                3 => f64::INFINITY,
                0 => {
                    let r1 = 2.0 * col[1] - col[0];
                    let r1b = 2.0 * col[2] - col[1];
                    let r2 = (4.0 * r1b - r1) / 3.0;
                    if (r2 - r1b).abs() > 0.05 * r2.abs().max(1.0 / self.bounding_radius()) {
                        return Err(Error::RidgePoint);
                    }
                    r2
                }
                _ => return Err(Error::RidgePoint),
            };
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::super::Shape;
    use super::*;
    use alloc::vec;

    #[test]
    fn sphere_radius_two() {
        let b = ConvexBody::ball(Vec3::new(0.3, 0.0, 0.0), 2.0).unwrap();
        let p = Vec3::new(0.3, 2.0 * 0.6, 2.0 * 0.8);
        let k = b.principal_curvatures(p, b.default_probe()).unwrap();
        assert!((k[0] - 0.5).abs() < 1e-6 && (k[1] - 0.5).abs() < 1e-6, "{k:?}");
    }

    #[test]
    fn ellipsoid_pole_and_equator() {
        let b = ConvexBody::ellipsoid(Vec3::ZERO, [1.0, 1.0, 1.5]).unwrap();
        // analytic: pole c/a² = 1.5 (both); equator 1/a = 1 and a/c² = 0.444…
        let k = b.principal_curvatures(Vec3::new(0.0, 0.0, 1.5), b.default_probe()).unwrap();
        assert!((k[0] - 1.5).abs() < 1e-4 && (k[1] - 1.5).abs() < 1e-4, "{k:?}");
        let k = b.principal_curvatures(Vec3::new(1.0, 0.0, 0.0), b.default_probe()).unwrap();
        assert!((k[0] - 1.0 / 2.25).abs() < 1e-4 && (k[1] - 1.0).abs() < 1e-4, "{k:?}");
    }

    #[test]
    fn lens_cap_and_edge() {
        let b = ConvexBody::intersection(vec![
            Shape::Ball { center: Vec3::new(-0.5, 0.0, 0.0), radius: 1.0 },
            Shape::Ball { center: Vec3::new(0.5, 0.0, 0.0), radius: 1.0 },
        ])
        .unwrap();
        // cap point of the ball centred at −0.5
        let dir = Vec3::new(0.8, 0.6, 0.0);
        let p = Vec3::new(-0.5, 0.0, 0.0) + dir;
        let k = b.principal_curvatures(p, b.default_probe()).unwrap();
        assert!((k[0] - 1.0).abs() < 1e-4 && (k[1] - 1.0).abs() < 1e-4, "{k:?}");
        // rim point
        let rim = Vec3::new(0.0, 0.75f64.sqrt(), 0.0);
        let k = b.principal_curvatures(rim, b.default_probe()).unwrap();
        assert!(k[1].is_infinite(), "{k:?}");
        assert!(k[0].is_finite() && k[0] > 0.0);
    }

    #[test]
    fn rejects_off_boundary_points() {
        let b = ConvexBody::ball(Vec3::ZERO, 1.0).unwrap();
        assert!(b.principal_curvatures(Vec3::new(0.5, 0.0, 0.0), 1e-4).is_err());
    }
}
