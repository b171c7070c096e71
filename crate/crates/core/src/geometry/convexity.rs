//! λ-convexity and the Minkowski identity.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::ConvexBody;
use crate::math::Vec3;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaReport {
    pub lambda: f64,
    pub holds: bool,
    /// `min_p (λ⁻¹ − max_q |q − c_p|)` over the tested points; `≥ −tol` iff the check holds.
    pub worst_margin: f64,
    pub worst_point: Vec3,
    pub tolerance: f64,
    pub samples: usize,
}

impl ConvexBody {
    /// Tests every sampled boundary point `p` with outer (supporting)
    /// normal `ν` for `K ⊂ B̄(p − ν/λ, 1/λ)`, with containment checked over
    /// the same boundary samples.
    pub fn lambda_convexity_check(&self, lambda: f64, samples: usize) -> Result<LambdaReport> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(alloc::format!("lambda must be positive, got {lambda}")));
        }
        let pts: Vec<(Vec3, Vec3)> = self.ray_samples(samples.max(2));
        let radius = 1.0 / lambda;
        let tolerance = 1e-8 * self.bounding_radius().max(radius.min(1.0));
        let mut worst = f64::INFINITY;
        let mut worst_point = Vec3::ZERO;
        for &(p, nu) in &pts {
            let c = p - nu * radius;
            let far = pts.iter().map(|(q, _)| (*q - c).norm_sq()).fold(0.0, f64::max).sqrt();
            let margin = radius - far;
            if margin < worst {
                worst = margin;
                worst_point = p;
            }
        }
        Ok(LambdaReport { lambda, holds: worst >= -tolerance, worst_margin: worst, worst_point, tolerance, samples: pts.len() })
    }

    /// `∫_{∂K} (1 + H⟨X, N⟩) dA / area(∂K)` with `X = x − center`, `N` the
    /// inner normal and `H` the mean of the principal curvatures. Vanishes
    /// for every smooth body and interior center.
    pub fn minkowski_residual(&self, center: Vec3, resolution: usize) -> Result<f64> {
        if !self.is_smooth() {
            return Err(Error::NonsmoothBody);
        }
        if !(self.sdf(center) < 0.0) {
            return Err(Error::InvalidParameter("center must be interior".into()));
        }
        let probe = self.default_probe();
        let samples = self.boundary_samples(resolution)?;
        let (mut num, mut area) = (0.0, 0.0);
        for s in &samples {
            let k = self.principal_curvatures(s.point, probe)?;
            let h = 0.5 * (k[0] + k[1]);
            let inner = -s.normal;
            num += s.weight * (1.0 + h * (s.point - center).dot(inner));
            area += s.weight;
        }
        Ok(num / area)
    }
}
