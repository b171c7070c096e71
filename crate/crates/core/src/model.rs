//! Rotationally symmetric model manifolds `dt² + g(t)² h₀` and exterior
//! warped products `dr² + g(r)² h` over a boundary of given volume.
//!
//! The warping function is evaluated together with its first two
//! derivatives; every curvature diagnostic is an algebraic expression in
//! `(g, g', g'')`.

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::interp::MonotoneCubic;
use crate::math::unit_sphere_volume;
use crate::{Error, Result};

/// Sampling density for curvature certificates.
pub const SAMPLES_PER_DECADE: usize = 512;
/// Sign tolerance for curvature certificates.
pub const CERTIFICATE_TOL: f64 = 1e-9;

/// `g = t` on `[0, ε]`, a convex quintic bridge on `[ε, t₀]`, and the affine
/// tail `g(t₀)(1 + H₀(t − t₀))` beyond `t₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Splice {
    pub t0: f64,
    pub h0: f64,
    eps: f64,
    g_end: f64,
    // bridge p(s) = ε + v0·s + c3·s³ + c4·s⁴ + c5·s⁵ with s = (t − ε)H₀
    v0: f64,
    c: [f64; 3],
}

impl Splice {
    pub fn new(t0: f64, h0: f64) -> Result<Splice> {
        if !(t0 > 0.0 && h0 > 0.0 && t0.is_finite() && h0.is_finite()) {
            return Err(Error::InvalidParameter("splice needs t0 > 0 and H0 > 0".into()));
        }
        let ht = h0 * t0;
        if ht < 1.0 - 1e-12 {
            return Err(Error::InfeasibleSplice(ht));
        }
        let len = 1.0 / h0;
        let eps = (t0 - len).max(0.0);
        let g_end = eps + t0;
        // end data: value, s-slope and zero curvature at both ends
        let d = g_end - eps;
        let v0 = len;
        let v1 = h0 * g_end * len;
        let c = [10.0 * d - 6.0 * v0 - 4.0 * v1, -15.0 * d + 8.0 * v0 + 7.0 * v1, 6.0 * d - 3.0 * v0 - 3.0 * v1];
        Ok(Splice { t0, h0, eps, g_end, v0, c })
    }

    /// End of the Euclidean initial segment.
    pub fn epsilon(&self) -> f64 {
        self.eps
    }

    /// `g(t₀)`.
    pub fn g_t0(&self) -> f64 {
        self.g_end
    }

    fn eval3(&self, t: f64) -> (f64, f64, f64) {
        if t <= self.eps {
            return (t, 1.0, 0.0);
        }
        if t >= self.t0 {
            return (self.g_end * (1.0 + self.h0 * (t - self.t0)), self.g_end * self.h0, 0.0);
        }
        let k = self.h0;
        let s = (t - self.eps) * k;
        let [c3, c4, c5] = self.c;
        let p = self.eps + s * (self.v0 + s * s * (c3 + s * (c4 + s * c5)));
        let dp = self.v0 + s * s * (3.0 * c3 + s * (4.0 * c4 + s * 5.0 * c5));
        let ddp = s * (6.0 * c3 + s * (12.0 * c4 + s * 20.0 * c5));
        (p, dp * k, ddp * k * k)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// `g = t`
    Euclidean,
    /// `g = sinh(k t)/k`, sectional curvature `−k²`
    Hyperbolic {
        k: f64,
    },
    /// `g = sin t` on `(0, π)`
    Sine,
    /// `g = t (1 + t²)^{−1/4}`: concave, non-negative Ricci curvature
    Concave,
    Splice(Splice),
    /// Monotone cubic through `(t, g)` pairs, affine beyond the table.
    Tabulated(MonotoneCubic),
    /// `g = 1 + H₀ r`
    Affine {
        h0: f64,
    },
}

impl Profile {
    pub fn name(&self) -> &'static str {
        match self {
            Profile::Euclidean => "euclidean",
            Profile::Hyperbolic { .. } => "hyperbolic",
            Profile::Sine => "sine",
            Profile::Concave => "concave",
            Profile::Splice(_) => "remark-splice",
            Profile::Tabulated(_) => "tabulated",
            Profile::Affine { .. } => "affine",
        }
    }

    /// `(g, g', g'')` at `t`.
    pub fn eval3(&self, t: f64) -> (f64, f64, f64) {
        match self {
            Profile::Euclidean => (t, 1.0, 0.0),
            Profile::Hyperbolic { k } => {
                let (s, c) = ((k * t).sinh(), (k * t).cosh());
                (s / k, c, k * s)
            }
            Profile::Sine => (t.sin(), t.cos(), -t.sin()),
            Profile::Concave => {
                let u = 1.0 + t * t;
                let g = t * u.powf(-0.25);
                let d = u.powf(-1.25) * (1.0 + 0.5 * t * t);
                let dd = -t * u.powf(-2.25) * (1.5 + 0.25 * t * t);
                (g, d, dd)
            }
            Profile::Splice(s) => s.eval3(t),
            Profile::Tabulated(m) => m.eval3(t),
            Profile::Affine { h0 } => (1.0 + h0 * t, *h0, 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelKind {
    /// `g(0) = 0`, `g'(0) = 1`: a smooth pole, fibers are round unit spheres.
    Closed,
    /// `∂K × [0, ∞)` with fiber volume `vol(∂K, h)`.
    Exterior { fiber_volume: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialCurvatures {
    pub sec_radial: f64,
    pub sec_tangent: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WarpedModel {
    n: usize,
    profile: Profile,
    kind: ModelKind,
}

impl WarpedModel {
    /// `n` is the dimension of the fiber, so the model has dimension `n + 1`.
    /// `n = 1` (surfaces) is accepted for the radial quadratures.
    pub fn new(n: usize, profile: Profile, kind: ModelKind) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidDimension(n));
        }
        let m = WarpedModel { n, profile, kind };
        match kind {
            ModelKind::Closed => {
                let (g, d, _) = m.profile.eval3(0.0);
                let slope_tol = if matches!(m.profile, Profile::Tabulated(_)) { 1e-3 } else { 1e-10 };
                if g.abs() > 1e-10 || (d - 1.0).abs() > slope_tol {
                    return Err(Error::InvalidParameter(alloc::format!("closed model needs g(0)=0, g'(0)=1 (got {g}, {d})")));
                }
            }
            ModelKind::Exterior { fiber_volume } => {
                if !(fiber_volume > 0.0) {
                    return Err(Error::InvalidParameter("fiber volume must be positive".into()));
                }
                if !(m.profile.eval3(0.0).0 > 0.0) {
                    return Err(Error::InvalidParameter("exterior model needs g(0) > 0".into()));
                }
            }
        }
        if let Profile::Tabulated(t) = &m.profile {
            let (lo, _) = t.domain();
            if lo > 0.0 {
                return Err(Error::InvalidParameter("tabulated profile must start at t = 0".into()));
            }
        }
        Ok(m)
    }

    pub fn euclidean(n: usize) -> Result<Self> {
        Self::new(n, Profile::Euclidean, ModelKind::Closed)
    }

    /// Constant curvature −1.
    pub fn hyperbolic(n: usize) -> Result<Self> {
        Self::new(n, Profile::Hyperbolic { k: 1.0 }, ModelKind::Closed)
    }

    pub fn sphere(n: usize) -> Result<Self> {
        Self::new(n, Profile::Sine, ModelKind::Closed)
    }

    pub fn concave(n: usize) -> Result<Self> {
        Self::new(n, Profile::Concave, ModelKind::Closed)
    }

    pub fn tabulated(n: usize, ts: Vec<f64>, gs: Vec<f64>, kind: ModelKind) -> Result<Self> {
        if gs.iter().skip(1).any(|g| !(*g > 0.0)) {
            return Err(Error::InvalidParameter("tabulated g must be positive away from t = 0".into()));
        }
        Self::new(n, Profile::Tabulated(MonotoneCubic::new(ts, gs)?), kind)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn describe(&self) -> String {
        let kind = match self.kind {
            ModelKind::Closed => String::from("closed"),
            ModelKind::Exterior { fiber_volume } => alloc::format!("exterior(fiber volume {fiber_volume})"),
        };
        alloc::format!("{} model, n = {}, {kind}", self.profile.name(), self.n)
    }

    /// `[t_min, t_max]`; `t_max` is infinite except for the round sphere.
    pub fn domain(&self) -> (f64, f64) {
        match self.profile {
            Profile::Sine => (0.0, core::f64::consts::PI),
            _ => (0.0, f64::INFINITY),
        }
    }

    /// Volume of the fiber at `g = 1`: `ω_n` for closed models.
    pub fn fiber_volume(&self) -> f64 {
        match self.kind {
            ModelKind::Closed => unit_sphere_volume(self.n),
            ModelKind::Exterior { fiber_volume } => fiber_volume,
        }
    }

    pub fn g(&self, t: f64) -> f64 {
        self.profile.eval3(t).0
    }

    pub fn g3(&self, t: f64) -> (f64, f64, f64) {
        self.profile.eval3(t)
    }

    /// Volume of the level `{t}`: `vol(fiber)·g(t)ⁿ`.
    pub fn sphere_area(&self, t: f64) -> f64 {
        self.fiber_volume() * self.g(t).powi(self.n as i32)
    }

    /// `(T, g(T), g')` when `g` is affine with positive slope on `[T, ∞)`.
    pub fn affine_tail(&self) -> Option<(f64, f64, f64)> {
        match &self.profile {
            Profile::Euclidean => Some((0.0, 0.0, 1.0)),
            Profile::Splice(s) => Some((s.t0, s.g_end, s.g_end * s.h0)),
            Profile::Affine { h0 } => Some((0.0, 1.0, *h0)),
            Profile::Tabulated(m) => {
                let (_, hi) = m.domain();
                let (g, d, _) = m.eval3(hi);
                (d > 0.0).then_some((hi, g, d))
            }
            _ => None,
        }
    }

    fn check_interior(&self, t: f64) -> Result<()> {
        let (lo, hi) = self.domain();
        if matches!(self.kind, ModelKind::Closed) && t == 0.0 {
            return Err(Error::PoleEvaluation);
        }
        if !(t >= lo && t < hi) {
            return Err(Error::DomainMismatch { r: t, lo, hi });
        }
        Ok(())
    }

    /// Sectional curvatures of radial planes (`−g''/g`) and of planes
    /// tangent to the level spheres (`(1 − g'²)/g²`).
    pub fn radial_curvatures(&self, t: f64) -> Result<RadialCurvatures> {
        self.check_interior(t)?;
        let (g, d, dd) = self.g3(t);
        Ok(RadialCurvatures { sec_radial: -dd / g, sec_tangent: (1.0 - d * d) / (g * g) })
    }

    /// The two Ricci eigenvalues: radial `n·sec_rad` and tangential
    /// `sec_rad + (n − 1)·sec_tan`.
    pub fn ricci(&self, t: f64) -> Result<[f64; 2]> {
        let c = self.radial_curvatures(t)?;
        let n = self.n as f64;
        Ok([n * c.sec_radial, c.sec_radial + (n - 1.0) * c.sec_tangent])
    }

    /// `g'/g`, the principal curvature of the level sphere at `t`.
    pub fn sphere_mean_curvature(&self, t: f64) -> Result<f64> {
        self.check_interior(t)?;
        let (g, d, _) = self.g3(t);
        Ok(d / g)
    }

    /// Log-spaced sample points covering the part of the domain where the
    /// profile is non-trivial.
    pub fn certificate_samples(&self, per_decade: usize) -> Vec<f64> {
        let (lo, hi) = match &self.profile {
            Profile::Sine => (1e-3, core::f64::consts::PI - 1e-3),
            Profile::Hyperbolic { k } => (1e-3 / k, 100.0 / k),
            Profile::Splice(s) => (1e-3 * s.t0, 1e3 * s.t0),
            Profile::Tabulated(m) => (1e-3 * m.domain().1, 10.0 * m.domain().1),
            _ => (1e-3, 1e3),
        };
        let decades = (hi / lo).log10();
        let count = ((decades * per_decade as f64).ceil() as usize).max(2);
        let mut ts: Vec<f64> = (0..=count).map(|i| lo * (hi / lo).powf(i as f64 / count as f64)).collect();
        if let Some(last) = ts.last_mut() {
            *last = last.min(hi);
        }
        ts
    }

    /// All sampled sectional curvatures `≤ tol`.
    pub fn is_cartan_hadamard(&self, per_decade: usize) -> bool {
        self.certificate_samples(per_decade).into_iter().all(|t| match self.radial_curvatures(t) {
            Ok(c) => c.sec_radial <= CERTIFICATE_TOL && c.sec_tangent <= CERTIFICATE_TOL,
            Err(_) => false,
        })
    }

    /// Smallest sampled Ricci eigenvalue.
    pub fn ricci_radial_lower(&self, per_decade: usize) -> f64 {
        self.certificate_samples(per_decade).into_iter().filter_map(|t| self.ricci(t).ok()).map(|r| r[0].min(r[1])).fold(f64::INFINITY, f64::min)
    }

    /// Smallest sampled `g''`.
    pub fn min_second_derivative(&self, per_decade: usize) -> f64 {
        self.certificate_samples(per_decade).into_iter().map(|t| self.g3(t).2).fold(f64::INFINITY, f64::min)
    }
}

/// Closed model whose geodesic ball of radius `t₀` has boundary curvature
/// `H₀` and whose profile is affine beyond `t₀`; needs `H₀t₀ ≥ 1`.
pub fn remark_example_model(n: usize, t0: f64, h0: f64) -> Result<WarpedModel> {
    WarpedModel::new(n, Profile::Splice(Splice::new(t0, h0)?), ModelKind::Closed)
}

/// `dr² + (1 + H₀r)² h` over a boundary of volume `boundary_area`.
pub fn exterior_equality_model(n: usize, h0: f64, boundary_area: f64) -> Result<WarpedModel> {
    if !(h0 > 0.0) {
        return Err(Error::InvalidParameter("H0 must be positive".into()));
    }
    WarpedModel::new(n, Profile::Affine { h0 }, ModelKind::Exterior { fiber_volume: boundary_area })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fd_check(m: &WarpedModel, t: f64) {
        let h = 1e-5 * t;
        let (g, d, dd) = m.g3(t);
        let (gp, gm) = (m.g(t + h), m.g(t - h));
        let d_fd = (gp - gm) / (2.0 * h);
        let dd_fd = (gp - 2.0 * g + gm) / (h * h);
        assert!((d - d_fd).abs() <= 1e-6 * d.abs().max(1.0), "g' at {t}: {d} vs {d_fd}");
        assert!((dd - dd_fd).abs() <= 1e-4 * dd.abs().max(1.0), "g'' at {t}: {dd} vs {dd_fd}");
    }

    #[test]
    fn flat_and_hyperbolic_curvatures() {
        let e = WarpedModel::euclidean(2).unwrap();
        let c = e.radial_curvatures(1.0).unwrap();
        assert_eq!((c.sec_radial, c.sec_tangent), (0.0, 0.0));
        let h = WarpedModel::hyperbolic(2).unwrap();
        let c = h.radial_curvatures(1.0).unwrap();
        assert!((c.sec_radial + 1.0).abs() < 1e-14 && (c.sec_tangent + 1.0).abs() < 1e-14);
        assert!(matches!(e.radial_curvatures(0.0), Err(Error::PoleEvaluation)));
        assert!(matches!(e.sphere_mean_curvature(0.0), Err(Error::PoleEvaluation)));
    }

    #[test]
    fn certificates() {
        let e = WarpedModel::euclidean(2).unwrap();
        let h = WarpedModel::hyperbolic(2).unwrap();
        let s = WarpedModel::sphere(2).unwrap();
        let c = WarpedModel::concave(2).unwrap();
        assert!(e.is_cartan_hadamard(SAMPLES_PER_DECADE));
        assert!(h.is_cartan_hadamard(SAMPLES_PER_DECADE));
        assert!(!s.is_cartan_hadamard(SAMPLES_PER_DECADE));
        assert_eq!(e.ricci_radial_lower(SAMPLES_PER_DECADE), 0.0);
        assert!((h.ricci_radial_lower(SAMPLES_PER_DECADE) + 2.0).abs() < 1e-9);
        assert!(c.ricci_radial_lower(SAMPLES_PER_DECADE) >= 0.0);
        assert!(c.min_second_derivative(SAMPLES_PER_DECADE) <= 0.0);
    }

    #[test]
    fn sphere_mean_curvatures() {
        let e = WarpedModel::euclidean(2).unwrap();
        assert!((e.sphere_mean_curvature(2.5).unwrap() - 0.4).abs() < 1e-15);
        let h = WarpedModel::hyperbolic(2).unwrap();
        assert!((h.sphere_mean_curvature(1.0).unwrap() - 1.0 / 1.0f64.tanh()).abs() < 1e-14);
        let r = remark_example_model(2, 1.0, 2.0).unwrap();
        assert!((r.sphere_mean_curvature(1.0).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn remark_splice_properties() {
        let m = remark_example_model(2, 1.0, 2.0).unwrap();
        assert!(m.is_cartan_hadamard(SAMPLES_PER_DECADE));
        assert!(m.min_second_derivative(SAMPLES_PER_DECADE) >= -CERTIFICATE_TOL);
        for t in [1.0, 1.5, 3.0, 100.0] {
            assert_eq!(m.radial_curvatures(t).unwrap().sec_radial, 0.0);
        }
        let (g, d, _) = m.g3(1.0);
        assert!((g - 1.5).abs() < 1e-14 && (d - 3.0).abs() < 1e-14);
        let (g, d, _) = m.g3(0.0);
        assert!(g == 0.0 && d == 1.0);
        for t in [0.2, 0.6, 0.75, 0.9, 1.7] {
            fd_check(&m, t);
        }
    }

    #[test]
    fn trivial_and_infeasible_splices() {
        let m = remark_example_model(2, 1.0, 1.0).unwrap();
        for t in [0.1, 0.5, 0.99, 2.0, 10.0] {
            let (g, d, dd) = m.g3(t);
            assert!((g - t).abs() < 1e-14 && (d - 1.0).abs() < 1e-14 && dd.abs() < 1e-12);
        }
        assert!(matches!(remark_example_model(2, 1.0, 0.5), Err(Error::InfeasibleSplice(_))));
    }

    #[test]
    fn exterior_model() {
        let m = exterior_equality_model(2, 1.0, 4.0 * core::f64::consts::PI).unwrap();
        assert_eq!(m.g(0.0), 1.0);
        for r in [0.0, 0.5, 3.0] {
            assert!((m.sphere_mean_curvature(r).unwrap() - 1.0 / (1.0 + r)).abs() < 1e-15);
        }
    }

    #[test]
    fn derivative_consistency() {
        for m in [WarpedModel::hyperbolic(2).unwrap(), WarpedModel::concave(3).unwrap(), WarpedModel::sphere(2).unwrap()] {
            for t in [0.05, 0.4, 1.3, 2.2] {
                fd_check(&m, t);
            }
        }
    }

    #[test]
    fn pole_asymptotics() {
        for m in [WarpedModel::hyperbolic(2).unwrap(), WarpedModel::concave(2).unwrap(), remark_example_model(2, 1.0, 3.0).unwrap()] {
            for t in [1e-3, 1e-4] {
                let ratio = m.sphere_mean_curvature(t).unwrap() * t;
                assert!((ratio - 1.0).abs() < 1e-5, "{ratio}");
            }
        }
    }

    #[test]
    fn tabulated_pole_check() {
        let ts: Vec<f64> = (0..=200).map(|i| i as f64 * 0.01).collect();
        let gs: Vec<f64> = ts.iter().map(|t| t.sinh()).collect();
        let m = WarpedModel::tabulated(2, ts.clone(), gs, ModelKind::Closed).unwrap();
        assert!((m.g(1.0) - 1.0f64.sinh()).abs() < 1e-5);
        let bad: Vec<f64> = ts.iter().map(|t| 2.0 * t).collect();
        assert!(WarpedModel::tabulated(2, ts, bad, ModelKind::Closed).is_err());
    }

    proptest! {
        // f = g'/g solves f' = −sec_rad − f², so on Cartan–Hadamard models it
        // dominates the flat solution H₀/(1 + H₀(t − t₀)).
        #[test]
        fn riccati_lower_estimate(t0 in 0.1f64..3.0, extra in 0.0f64..5.0, h0t0 in 1.0f64..4.0, which in 0usize..3) {
            let m = match which {
                0 => WarpedModel::hyperbolic(2).unwrap(),
                1 => WarpedModel::euclidean(3).unwrap(),
                _ => remark_example_model(2, t0, h0t0 / t0).unwrap(),
            };
            let h = m.sphere_mean_curvature(t0).unwrap();
            let t = t0 + extra;
            let f = m.sphere_mean_curvature(t).unwrap();
            prop_assert!(f >= h / (1.0 + h * (t - t0)) - 1e-12 * f.abs());
        }

        #[test]
        fn splice_is_convex(t0 in 0.1f64..5.0, h0t0 in 1.0f64..20.0, x in 0.0f64..1.0) {
            let s = Splice::new(t0, h0t0 / t0).unwrap();
            let (_, d, dd) = s.eval3(x * t0 * 1.5);
            prop_assert!(dd >= -1e-9 * (h0t0 / t0));
            prop_assert!(d >= 1.0 - 1e-12);
        }
    }
}
