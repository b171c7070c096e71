//! Riccati comparison along normal geodesics.
//!
//! Two scalar flows drive the capacity bounds:
//!
//! * `f' = −sec(r) − f²`, the extremal case of the equation for
//!   `⟨E', E⟩/|E|²` of a Jacobi field `E` normal to a parallel hypersurface;
//!   with `sec ≤ 0` it stays above `f₀/(1 + f₀r)`;
//! * `H' = −Ric(r)/n − u(r)·H²` for the mean curvature of the parallel
//!   hypersurfaces, where `u ≥ 1` measures how far the second fundamental
//!   form is from umbilic (`|σ|² = u·n·H²`); with `Ric ≥ 0` it stays below
//!   `H₀/(1 + H₀r)`.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::interp::MonotoneCubic;
use crate::model::WarpedModel;
use crate::ode::rk4_richardson;
use crate::radial::RadialPotential;
use crate::report::{ComparisonReport, Direction};
use crate::{Error, Result};

/// Points used to certify the sign of a curvature profile.
pub const CERTIFICATE_SAMPLES: usize = 1024;
/// Flows stop once `f` drops below this (blow-down)...
pub const BLOW_DOWN: f64 = 1e-9;
/// ...or `|f|` exceeds this (blow-up).
pub const BLOW_UP: f64 = 1e9;
/// Pointwise agreement demanded between successive step halvings.
pub const ODE_TOL: f64 = 1e-8;
const MAX_HALVINGS: u32 = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvatureKind {
    /// `R(E, γ', γ', E)/|E|²` along the geodesic
    Sectional,
    /// `Ric(γ', γ')` along the geodesic
    Ricci,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignCertificate {
    Nonpositive,
    Nonnegative,
    /// identically zero on the samples
    Both,
    None,
}

impl SignCertificate {
    pub fn nonpositive(self) -> bool {
        matches!(self, SignCertificate::Nonpositive | SignCertificate::Both)
    }

    pub fn nonnegative(self) -> bool {
        matches!(self, SignCertificate::Nonnegative | SignCertificate::Both)
    }
}

enum Source {
    Constant(f64),
    Table(MonotoneCubic),
    Function(Box<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl core::fmt::Debug for Source {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Source::Constant(c) => write!(f, "Constant({c})"),
            Source::Table(t) => write!(f, "Table({:?})", t.domain()),
            Source::Function(_) => f.write_str("Function"),
        }
    }
}

/// Curvature along a unit-speed geodesic, `r ∈ [0, r_max]`.
#[derive(Debug)]
pub struct CurvatureProfile {
    kind: CurvatureKind,
    r_max: f64,
    source: Source,
    certificate: SignCertificate,
}

impl CurvatureProfile {
    fn build(kind: CurvatureKind, r_max: f64, source: Source) -> Result<Self> {
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(Error::InvalidParameter(format!("profile domain [0, {r_max}] is empty or unbounded")));
        }
        let mut p = CurvatureProfile { kind, r_max, source, certificate: SignCertificate::None };
        let (mut le, mut ge) = (true, true);
        for i in 0..CERTIFICATE_SAMPLES {
            let v = p.eval(r_max * i as f64 / (CERTIFICATE_SAMPLES - 1) as f64);
            if !v.is_finite() {
                return Err(Error::InvalidParameter("curvature profile is not finite on its domain".into()));
            }
            le &= v <= 0.0;
            ge &= v >= 0.0;
        }
        p.certificate = match (le, ge) {
            (true, true) => SignCertificate::Both,
            (true, false) => SignCertificate::Nonpositive,
            (false, true) => SignCertificate::Nonnegative,
            _ => SignCertificate::None,
        };
        Ok(p)
    }

    pub fn constant(kind: CurvatureKind, value: f64, r_max: f64) -> Result<Self> {
        Self::build(kind, r_max, Source::Constant(value))
    }

    /// Shape-preserving cubic through `(r, value)` samples starting at `r = 0`.
    pub fn table(kind: CurvatureKind, rs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let spline = MonotoneCubic::new(rs, values)?;
        let (lo, hi) = spline.domain();
        if lo != 0.0 {
            return Err(Error::InvalidParameter("curvature table must start at r = 0".into()));
        }
        Self::build(kind, hi, Source::Table(spline))
    }

    pub fn function(kind: CurvatureKind, r_max: f64, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        Self::build(kind, r_max, Source::Function(Box::new(f)))
    }

    /// Curvature along the radial geodesic leaving the sphere `{t = t₀}` of a
    /// model: `−g''/g` (sectional) or `−n·g''/g` (Ricci).
    pub fn from_model(model: &WarpedModel, t0: f64, r_max: f64, kind: CurvatureKind) -> Result<Self> {
        let m = model.clone();
        m.radial_curvatures(t0)?;
        let scale = match kind {
            CurvatureKind::Sectional => 1.0,
            CurvatureKind::Ricci => model.n() as f64,
        };
        Self::function(kind, r_max, move |r| {
            let (g, _, dd) = m.g3(t0 + r);
            -scale * dd / g
        })
    }

    pub fn kind(&self) -> CurvatureKind {
        self.kind
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn certificate(&self) -> SignCertificate {
        self.certificate
    }

    pub fn eval(&self, r: f64) -> f64 {
        match &self.source {
            Source::Constant(c) => *c,
            Source::Table(t) => t.eval(r),
            Source::Function(f) => f(r),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FlowStop {
    /// reached `r_max`
    Completed,
    /// `f` dropped below the blow-down threshold at `r`
    BlowDown(f64),
    /// `|f|` exceeded the blow-up threshold at `r`
    BlowUp(f64),
}

/// Sampled solution of one of the comparison flows.
#[derive(Debug, Clone)]
pub struct Flow {
    pub r: Vec<f64>,
    pub values: Vec<f64>,
    /// `|E(r)|` with `|E(0)| = 1` (Riccati flows only).
    pub jacobi_norm: Option<Vec<f64>>,
    pub stop: FlowStop,
    /// First `r` where the value changed sign to negative.
    pub negative_crossing: Option<f64>,
    /// Agreement between the last two step halvings.
    pub defect: f64,
}

impl Flow {
    pub fn domain(&self) -> (f64, f64) {
        (0.0, *self.r.last().unwrap_or(&0.0))
    }

    /// Piecewise-linear interpolation of the samples.
    pub fn eval(&self, r: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        if !(r >= lo && r <= hi) {
            return Err(Error::DomainMismatch { r, lo, hi });
        }
        let k = self.r.partition_point(|x| *x < r);
        if k == 0 {
            return Ok(self.values[0]);
        }
        let (r0, r1) = (self.r[k - 1], self.r[k]);
        let w = (r - r0) / (r1 - r0);
        Ok(self.values[k - 1] * (1.0 - w) + self.values[k] * w)
    }

    /// Compares the flow with a bound curve on the flow's samples.
    pub fn compare(&self, context: &str, direction: Direction, bound: impl Fn(f64) -> f64, tolerance: f64) -> ComparisonReport {
        let bc = self.r.iter().map(|&r| (r, bound(r))).collect();
        let cc = self.r.iter().copied().zip(self.values.iter().copied()).collect();
        ComparisonReport::from_curves(context, direction, bc, cc, tolerance)
    }
}

fn check_step(r_max: f64, step: f64) -> Result<()> {
    if !(step > 0.0 && r_max > 0.0 && step <= r_max) {
        return Err(Error::InvalidParameter(format!("need 0 < step <= r_max (got step {step}, r_max {r_max})")));
    }
    Ok(())
}

fn stop_reason(stopped_at: Option<f64>, last: f64) -> FlowStop {
    match stopped_at {
        None => FlowStop::Completed,
        Some(r) if last.abs() >= BLOW_UP || !last.is_finite() => FlowStop::BlowUp(r),
        Some(r) if last < BLOW_DOWN => FlowStop::BlowDown(r),
        Some(r) => FlowStop::BlowUp(r),
    }
}

/// Integrates `f' = −sec(r) − f²`, `f(0) = f₀`, together with the Jacobi
/// norm `|E|' = f·|E|`, sampling every `step` up to `r_max` (clipped to the
/// profile domain) or until blow-down/blow-up.
pub fn riccati_flow(profile: &CurvatureProfile, f0: f64, r_max: f64, step: f64) -> Result<Flow> {
    if profile.kind != CurvatureKind::Sectional {
        return Err(Error::InvalidParameter("riccati flow needs a sectional curvature profile".into()));
    }
    if !(f0 > 0.0) {
        return Err(Error::InvalidParameter(format!("f0 must be positive, got {f0}")));
    }
    let r_max = r_max.min(profile.r_max);
    check_step(r_max, step)?;
    let rhs = |r: f64, y: &[f64; 2]| [-profile.eval(r) - y[0] * y[0], y[0] * y[1]];
    let stop = |_: f64, y: &[f64; 2]| y[0] < BLOW_DOWN || y[0].abs() > BLOW_UP;
    let t = rk4_richardson(&rhs, [f0, 1.0], r_max, step, ODE_TOL, MAX_HALVINGS, &stop);
    let stop = stop_reason(t.stopped_at, t.final_state[0]);
    let values: Vec<f64> = t.y.iter().map(|y| y[0]).collect();
    let negative_crossing = t.r.iter().zip(&values).find(|(_, v)| **v < 0.0).map(|(r, _)| *r);
    Ok(Flow { r: t.r, values, jacobi_norm: Some(t.y.iter().map(|y| y[1]).collect()), stop, negative_crossing, defect: t.defect })
}

/// Flat solution `f₀/(1 + f₀r)` of the Riccati equation.
pub fn riccati_lower_bound(f0: f64, r: f64) -> f64 {
    f0 / (1.0 + f0 * r)
}

/// Integrates `H' = −Ric(r)/n − u(r)·H²`, `H(0) = H₀`. Only blow-up stops
/// the flow; a sign change of `H` is recorded in `negative_crossing`.
pub fn mean_curvature_flow(profile: &CurvatureProfile, n: usize, h0: f64, umbilicity: &dyn Fn(f64) -> f64, r_max: f64, step: f64) -> Result<Flow> {
    if profile.kind != CurvatureKind::Ricci {
        return Err(Error::InvalidParameter("mean curvature flow needs a Ricci profile".into()));
    }
    if n < 1 {
        return Err(Error::InvalidDimension(n));
    }
    if !(h0 > 0.0) {
        return Err(Error::InvalidParameter(format!("H0 must be positive, got {h0}")));
    }
    let r_max = r_max.min(profile.r_max);
    check_step(r_max, step)?;
    for i in 0..CERTIFICATE_SAMPLES {
        let r = r_max * i as f64 / (CERTIFICATE_SAMPLES - 1) as f64;
        if !(umbilicity(r) >= 1.0) {
            return Err(Error::InvalidParameter(format!("umbilicity factor must be >= 1 (got {} at r = {r})", umbilicity(r))));
        }
    }
    let nf = n as f64;
    let rhs = |r: f64, y: &[f64; 1]| [-profile.eval(r) / nf - umbilicity(r) * y[0] * y[0]];
    let stop = |_: f64, y: &[f64; 1]| y[0].abs() > BLOW_UP;
    let t = rk4_richardson(&rhs, [h0], r_max, step, ODE_TOL, MAX_HALVINGS, &stop);
    let values: Vec<f64> = t.y.iter().map(|y| y[0]).collect();
    let stop = match t.stopped_at {
        None => FlowStop::Completed,
        Some(r) => FlowStop::BlowUp(r),
    };
    let negative_crossing = t.r.iter().zip(&values).find(|(_, v)| **v < 0.0).map(|(r, _)| *r);
    Ok(Flow { r: t.r, values, jacobi_norm: None, stop, negative_crossing, defect: t.defect })
}

/// `H₀/(1 + H₀r)`, the mean curvature of parallel spheres in flat space.
pub fn mean_curvature_upper_bound(h0: f64, r: f64) -> f64 {
    h0 / (1.0 + h0 * r)
}

/// A mean-curvature profile `r ↦ H(r)` for [`transplant_laplacian`].
pub trait MeanCurvatureCurve {
    fn domain(&self) -> (f64, f64);
    fn at(&self, r: f64) -> f64;
}

impl MeanCurvatureCurve for Flow {
    fn domain(&self) -> (f64, f64) {
        Flow::domain(self)
    }

    fn at(&self, r: f64) -> f64 {
        self.eval(r).unwrap_or(f64::NAN)
    }
}

/// Closed-form profile on `[0, ∞)`.
pub struct CurveFn<F: Fn(f64) -> f64>(pub F);

impl<F: Fn(f64) -> f64> MeanCurvatureCurve for CurveFn<F> {
    fn domain(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }

    fn at(&self, r: f64) -> f64 {
        (self.0)(r)
    }
}

/// `Δv = Φ''(r) + n·H(r)·Φ'(r)` for `v = Φ ∘ dist(·, K)`.
pub fn transplant_laplacian(potential: &RadialPotential, h: &dyn MeanCurvatureCurve, r: f64) -> Result<f64> {
    let (lo, hi) = h.domain();
    let hi = hi.min(potential.outer_distance());
    if !(r >= lo && r <= hi) {
        return Err(Error::DomainMismatch { r, lo, hi });
    }
    Ok(potential.second_derivative(r) + potential.n() as f64 * h.at(r) * potential.derivative(r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::exterior_potential_euclidean;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn flat(kind: CurvatureKind) -> CurvatureProfile {
        CurvatureProfile::constant(kind, 0.0, 10.0).unwrap()
    }

    #[test]
    fn riccati_flat_and_hyperbolic() {
        let f = riccati_flow(&flat(CurvatureKind::Sectional), 1.0, 1.0, 0.01).unwrap();
        assert!((f.eval(1.0).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(f.stop, FlowStop::Completed);

        let hyp = CurvatureProfile::constant(CurvatureKind::Sectional, -1.0, 5.0).unwrap();
        assert!(hyp.certificate().nonpositive());
        let coth = |x: f64| 1.0 / x.tanh();
        let f = riccati_flow(&hyp, coth(1.0), 2.0, 0.01).unwrap();
        for (r, v) in f.r.iter().zip(&f.values) {
            assert!((v - coth(1.0 + r)).abs() < 1e-9);
        }
        assert!((f.eval(1.0).unwrap() - 1.0373).abs() < 1e-4);

        let f = riccati_flow(&hyp, 1.0, 1.0, 0.01).unwrap();
        let half = riccati_flow(&hyp, 1.0, 1.0, 0.005).unwrap();
        let v = f.eval(1.0).unwrap();
        assert!((v - half.eval(1.0).unwrap()).abs() < 1e-9);
        assert!(v > 0.5 + 1e-3);
    }

    #[test]
    fn riccati_blows_down_on_spheres() {
        // sec ≡ 1, f₀ = cot(1): f = cot(1 + r) reaches 0 at r = π/2 − 1
        let sph = CurvatureProfile::constant(CurvatureKind::Sectional, 1.0, 5.0).unwrap();
        let f = riccati_flow(&sph, 1.0 / 1.0f64.tan(), 3.0, 0.01).unwrap();
        match f.stop {
            FlowStop::BlowDown(r) => assert!((r - (core::f64::consts::FRAC_PI_2 - 1.0)).abs() < 0.02),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bound_formulas() {
        assert_eq!(riccati_lower_bound(1.0, 0.0), 1.0);
        assert_eq!(riccati_lower_bound(1.0, 1.0), 0.5);
        assert!((riccati_lower_bound(2.0, 3.0) - 2.0 / 7.0).abs() < 1e-16);
        assert_eq!(mean_curvature_upper_bound(1.0, 1.0), 0.5);
        assert_eq!(mean_curvature_upper_bound(2.5, 0.0), 2.5);
        assert!((mean_curvature_upper_bound(3.0, 2.0) - 3.0 / 7.0).abs() < 1e-16);
    }

    #[test]
    fn mean_curvature_cases() {
        let one = |_: f64| 1.0;
        let h = mean_curvature_flow(&flat(CurvatureKind::Ricci), 2, 1.0, &one, 1.0, 0.01).unwrap();
        assert!((h.eval(1.0).unwrap() - 0.5).abs() < 1e-12);
        let rep = h.compare("flat", Direction::Upper, |r| mean_curvature_upper_bound(1.0, r), 1e-9);
        assert_eq!(rep.verdict, crate::report::Verdict::Equality);

        let ric = CurvatureProfile::constant(CurvatureKind::Ricci, 2.0, 3.0).unwrap();
        let h = mean_curvature_flow(&ric, 2, 1.0, &one, 3.0, 0.01).unwrap();
        for (r, v) in h.r.iter().zip(&h.values).skip(1) {
            assert!(*v < mean_curvature_upper_bound(1.0, *r));
        }
        // H' = −1 − H² from H = 1 crosses zero at r = π/4
        let r0 = h.negative_crossing.unwrap();
        assert!((r0 - core::f64::consts::FRAC_PI_4).abs() < 0.011, "{r0}");

        let h = mean_curvature_flow(&flat(CurvatureKind::Ricci), 2, 1.0, &|_| 1.5, 1.0, 0.01).unwrap();
        assert!(h.eval(1.0).unwrap() < 0.5);
        assert!(mean_curvature_flow(&flat(CurvatureKind::Ricci), 2, 1.0, &|_| 0.5, 1.0, 0.01).is_err());
    }

    #[test]
    fn transplanted_laplacian_signs() {
        let phi = exterior_potential_euclidean(2, 1.0).unwrap();
        for r in [0.0, 0.3, 1.0, 5.0] {
            let v = transplant_laplacian(&phi, &CurveFn(|r| mean_curvature_upper_bound(1.0, r)), r).unwrap();
            assert!(v.abs() < 1e-10);
        }
        let v = transplant_laplacian(&phi, &CurveFn(|_| 1.0), 1.0).unwrap();
        assert!((v - (0.25 - 0.5)).abs() < 1e-14);
        assert!(transplant_laplacian(&phi, &CurveFn(|_| 0.1), 1.0).unwrap() > 0.0);
        let flow = mean_curvature_flow(&flat(CurvatureKind::Ricci), 2, 1.0, &|_| 1.0, 1.0, 0.01).unwrap();
        assert!(matches!(transplant_laplacian(&phi, &flow, 2.0), Err(Error::DomainMismatch { .. })));
    }

    #[test]
    fn jacobi_norm_equality_case() {
        let h0 = 1.7;
        let f = riccati_flow(&flat(CurvatureKind::Sectional), h0, 3.0, 0.01).unwrap();
        for (r, e) in f.r.iter().zip(f.jacobi_norm.as_ref().unwrap()) {
            assert!((e - (1.0 + h0 * r)).abs() < 1e-8);
        }
    }

    #[test]
    fn model_profiles() {
        let m = WarpedModel::hyperbolic(2).unwrap();
        let p = CurvatureProfile::from_model(&m, 1.0, 4.0, CurvatureKind::Sectional).unwrap();
        assert!(p.certificate().nonpositive());
        assert!((p.eval(2.0) + 1.0).abs() < 1e-14);
        let ric = CurvatureProfile::from_model(&WarpedModel::concave(2).unwrap(), 0.5, 4.0, CurvatureKind::Ricci).unwrap();
        assert!(ric.certificate().nonnegative());
    }

    fn random_table(rng: &mut ChaCha8Rng, sign: f64) -> CurvatureProfile {
        let k = rng.random_range(3..12);
        let rs: Vec<f64> = (0..k).map(|i| 4.0 * i as f64 / (k - 1) as f64).collect();
        let vs: Vec<f64> = (0..k).map(|_| sign * rng.random_range(0.0..5.0)).collect();
        let kind = if sign < 0.0 { CurvatureKind::Sectional } else { CurvatureKind::Ricci };
        CurvatureProfile::table(kind, rs, vs).unwrap()
    }

    #[test]
    fn randomized_cartan_hadamard_comparison() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let p = random_table(&mut rng, -1.0);
            assert!(p.certificate().nonpositive());
            let f0 = rng.random_range(0.1..5.0);
            let f = riccati_flow(&p, f0, 4.0, 0.02).unwrap();
            let worst = f.r.iter().zip(&f.values).map(|(r, v)| v - riccati_lower_bound(f0, *r)).fold(f64::INFINITY, f64::min);
            assert!(worst >= -1e-6, "{worst}");
        }
    }

    #[test]
    fn randomized_ricci_comparison() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let p = random_table(&mut rng, 1.0);
            assert!(p.certificate().nonnegative());
            let h0 = rng.random_range(0.1..5.0);
            let u0 = rng.random_range(1.0..3.0);
            let u1 = rng.random_range(1.0..3.0);
            let umb = move |r: f64| u0 + (u1 - u0) * r / 4.0;
            let n = rng.random_range(2..5);
            let h = mean_curvature_flow(&p, n, h0, &umb, 4.0, 0.02).unwrap();
            let worst = h.r.iter().zip(&h.values).map(|(r, v)| v - mean_curvature_upper_bound(h0, *r)).fold(f64::NEG_INFINITY, f64::max);
            assert!(worst <= 1e-6, "{worst}");
        }
    }

    #[test]
    fn equality_is_rigid_to_first_order() {
        let mut devs = Vec::new();
        for eps in [1e-3, 1e-4] {
            let sec = CurvatureProfile::constant(CurvatureKind::Sectional, -eps, 2.0).unwrap();
            let f = riccati_flow(&sec, 1.0, 2.0, 0.01).unwrap();
            let dev = f.r.iter().zip(&f.values).map(|(r, v)| (v - riccati_lower_bound(1.0, *r)).abs()).fold(0.0, f64::max);
            let ric = CurvatureProfile::constant(CurvatureKind::Ricci, 0.0, 2.0).unwrap();
            let h = mean_curvature_flow(&ric, 2, 1.0, &|_| 1.0 + eps, 2.0, 0.01).unwrap();
            let dev_h = h.r.iter().zip(&h.values).map(|(r, v)| (v - mean_curvature_upper_bound(1.0, *r)).abs()).fold(0.0, f64::max);
            devs.push((dev, dev_h));
        }
        for k in 0..2 {
            let pick = |d: (f64, f64)| if k == 0 { d.0 } else { d.1 };
            let ratio = pick(devs[0]) / pick(devs[1]);
            assert!((ratio - 10.0).abs() < 0.5, "{ratio}");
        }
    }

    #[test]
    fn averaged_flows_dominate_the_bound() {
        // several principal directions with f_i(0) ≥ H₀ on a non-positively curved profile
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h0 = 0.8;
        for _ in 0..20 {
            let n = 3;
            let flows: Vec<Flow> = (0..n)
                .map(|_| {
                    let p = random_table(&mut rng, -1.0);
                    riccati_flow(&p, h0 + rng.random_range(0.0..2.0), 4.0, 0.02).unwrap()
                })
                .collect();
            for k in 0..flows[0].r.len() {
                let mean = flows.iter().map(|f| f.values[k]).sum::<f64>() / n as f64;
                assert!(mean >= riccati_lower_bound(h0, flows[0].r[k]) - 1e-9);
            }
        }
    }
}
