//! Capacities and equilibrium potentials of balls: Euclidean closed forms
//! and one-dimensional quadratures on warped models.
//!
//! On a warped model the capacitary potential of `{t ≤ t₀}` relative to
//! `{t < t₁}` depends on `t` alone and solves `(gⁿu')' = 0`, so
//!
//! ```text
//! cap = vol(fiber) / ∫_{t₀}^{t₁} g(s)^{−n} ds.
//! ```

use alloc::format;

#[allow(unused_imports)]
use num_traits::Float;

use crate::math::unit_sphere_volume;
use crate::model::{ModelKind, WarpedModel};
use crate::quadrature::{adaptive_simpson, Tolerance};
use crate::report::{ComparisonReport, Direction};
use crate::{Error, Result};

/// Dyadic tail blocks whose successive ratios exceed this signal divergence.
pub const DIVERGENCE_RATIO: f64 = 0.99;
/// Consecutive blocks needed to decide convergence or divergence.
pub const DIVERGENCE_STREAK: usize = 20;
const MAX_BLOCKS: usize = 400;

const QUAD: Tolerance = Tolerance { abs: 1e-12, rel: 1e-10, max_depth: 48 };

#[derive(Debug, Clone)]
enum PotentialForm {
    Annulus { h0: f64, t: f64 },
    Exterior { h0: f64 },
    Warped { model: WarpedModel, t0: f64, t1: f64, total: f64 },
}

/// Radial equilibrium potential as a function of the distance `r ≥ 0` from
/// the inner sphere: `1` at `r = 0`, `0` on the outer sphere or at infinity.
#[derive(Debug, Clone)]
pub struct RadialPotential {
    n: usize,
    form: PotentialForm,
}

impl RadialPotential {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Distance from the inner to the outer sphere (`∞` for exterior problems).
    pub fn outer_distance(&self) -> f64 {
        match &self.form {
            PotentialForm::Annulus { t, .. } => *t,
            PotentialForm::Exterior { .. } => f64::INFINITY,
            PotentialForm::Warped { t0, t1, .. } => t1 - t0,
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        let n = self.n as f64;
        match &self.form {
            PotentialForm::Annulus { h0, t } => {
                let end = (1.0 + t * h0).powf(1.0 - n);
                (((1.0 + r * h0).powf(1.0 - n)) - end) / (1.0 - end)
            }
            PotentialForm::Exterior { h0 } => (1.0 + r * h0).powf(1.0 - n),
            PotentialForm::Warped { model, t0, t1, total } => {
                if r <= 0.0 {
                    return 1.0;
                }
                match inverse_area_integral(model, t0 + r, *t1) {
                    Ok(Some(j)) => j / total,
                    _ => 0.0,
                }
            }
        }
    }

    pub fn derivative(&self, r: f64) -> f64 {
        let n = self.n as f64;
        match &self.form {
            PotentialForm::Annulus { h0, t } => {
                let end = (1.0 + t * h0).powf(1.0 - n);
                (1.0 - n) * h0 * (1.0 + r * h0).powf(-n) / (1.0 - end)
            }
            PotentialForm::Exterior { h0 } => (1.0 - n) * h0 * (1.0 + r * h0).powf(-n),
            PotentialForm::Warped { model, t0, total, .. } => -model.g(t0 + r).powi(-(self.n as i32)) / total,
        }
    }

    pub fn second_derivative(&self, r: f64) -> f64 {
        let n = self.n as f64;
        match &self.form {
            PotentialForm::Annulus { h0, t } => {
                let end = (1.0 + t * h0).powf(1.0 - n);
                (1.0 - n) * -n * h0 * h0 * (1.0 + r * h0).powf(-n - 1.0) / (1.0 - end)
            }
            PotentialForm::Exterior { h0 } => (1.0 - n) * -n * h0 * h0 * (1.0 + r * h0).powf(-n - 1.0),
            PotentialForm::Warped { model, t0, .. } => {
                let (g, d, _) = model.g3(t0 + r);
                -n * d / g * self.derivative(r)
            }
        }
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        Err(Error::InvalidDimension(n))
    } else {
        Ok(())
    }
}

fn check_h0(h0: f64) -> Result<()> {
    if h0 > 0.0 && h0.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("H0 must be positive, got {h0}")))
    }
}

/// Potential of the Euclidean ball of radius `1/H₀` in the concentric ball
/// of radius `1/H₀ + t`.
pub fn annulus_potential_euclidean(n: usize, h0: f64, t: f64) -> Result<RadialPotential> {
    check_n(n)?;
    check_h0(h0)?;
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("annulus width must be positive, got {t}")));
    }
    Ok(RadialPotential { n, form: PotentialForm::Annulus { h0, t } })
}

/// Exterior potential `(1 + rH₀)^{1−n}` of the ball of radius `1/H₀`.
pub fn exterior_potential_euclidean(n: usize, h0: f64) -> Result<RadialPotential> {
    check_n(n)?;
    check_h0(h0)?;
    Ok(RadialPotential { n, form: PotentialForm::Exterior { h0 } })
}

/// `cap(B̄_{1/H₀}) = (n−1)·H₀·ω_n·H₀^{−n}` in `ℝ^{n+1}`.
pub fn ball_capacity_euclidean(n: usize, h0: f64) -> Result<f64> {
    check_n(n)?;
    check_h0(h0)?;
    Ok((n as f64 - 1.0) * h0 * unit_sphere_volume(n) * h0.powi(-(n as i32)))
}

/// `∫_{t₀}^{t₁} g^{−n}`; `None` when the improper integral diverges.
pub fn inverse_area_integral(model: &WarpedModel, t0: f64, t1: f64) -> Result<Option<f64>> {
    let n = model.n() as i32;
    let f = |s: f64| model.g(s).powi(-n);
    let (lo, hi) = model.domain();
    if !(t0 >= lo && t0 < hi) {
        return Err(Error::DomainMismatch { r: t0, lo, hi });
    }
    if !(t1 > t0) {
        return Err(Error::InvalidParameter(format!("outer radius {t1} must exceed inner radius {t0}")));
    }
    if model.g(t0) <= 0.0 {
        // a point: the integral diverges at the pole
        return Ok(None);
    }
    if t1.is_finite() {
        if t1 >= hi {
            return Ok(None);
        }
        return Ok(Some(adaptive_simpson(f, t0, t1, QUAD).value));
    }
    if hi.is_finite() {
        // compact model, g → 0 at the antipodal pole
        return Ok(None);
    }
    if let Some((t_aff, g_aff, slope)) = model.affine_tail() {
        let start = t_aff.max(t0);
        let head = if start > t0 { adaptive_simpson(f, t0, start, QUAD).value } else { 0.0 };
        if n == 1 {
            return Ok(None);
        }
        let a = g_aff + slope * (start - t_aff);
        return Ok(Some(head + a.powi(1 - n) / (slope * (n as f64 - 1.0))));
    }
    dyadic_tail(&f, t0)
}

/// Sums `∫` over blocks `[t₀ + w(2ᵏ−1), t₀ + w(2ᵏ⁺¹−1)]`, deciding
/// convergence from the block ratios and closing with a geometric tail.
fn dyadic_tail<F: Fn(f64) -> f64>(f: &F, t0: f64) -> Result<Option<f64>> {
    let w = t0.max(1.0);
    let mut sum = 0.0;
    let mut prev: Option<f64> = None;
    let (mut slow, mut fast) = (0usize, 0usize);
    let mut last_ratio = 0.0;
    for k in 0..MAX_BLOCKS {
        let a = t0 + w * ((2.0f64).powi(k as i32) - 1.0);
        let b = t0 + w * ((2.0f64).powi(k as i32 + 1) - 1.0);
        let block = adaptive_simpson(f, a, b, QUAD).value;
        sum += block;
        if block == 0.0 || block <= 1e-17 * sum {
            return Ok(Some(sum));
        }
        if let Some(p) = prev {
            let ratio = block / p;
            if ratio > DIVERGENCE_RATIO {
                slow += 1;
                fast = 0;
            } else {
                fast += 1;
                slow = 0;
            }
            last_ratio = ratio;
        }
        if slow >= DIVERGENCE_STREAK {
            return Ok(None);
        }
        if fast >= DIVERGENCE_STREAK && block * last_ratio / (1.0 - last_ratio) <= 1e-13 * sum {
            return Ok(Some(sum + block * last_ratio / (1.0 - last_ratio)));
        }
        prev = Some(block);
    }
    Err(Error::Inconclusive)
}

/// Capacity of the geodesic ball `{t ≤ t₀}` relative to `{t < t₁}`
/// (`t₁ = ∞` for the capacity in the whole model); `0` when the model is
/// parabolic at that end.
pub fn warped_ball_capacity(model: &WarpedModel, t0: f64, t1: f64) -> Result<f64> {
    Ok(match inverse_area_integral(model, t0, t1)? {
        Some(i) if i.is_finite() && i > 0.0 => model.fiber_volume() / i,
        _ => 0.0,
    })
}

/// The potential behind [`warped_ball_capacity`].
pub fn warped_potential(model: &WarpedModel, t0: f64, t1: f64) -> Result<RadialPotential> {
    match inverse_area_integral(model, t0, t1)? {
        Some(total) if total.is_finite() && total > 0.0 => {
            Ok(RadialPotential { n: model.n(), form: PotentialForm::Warped { model: model.clone(), t0, t1, total } })
        }
        _ => Err(Error::InvalidParameter("no equilibrium potential: the model is parabolic at this end".into())),
    }
}

/// `vol(fiber)·∫ gⁿ u'²` over `[t₀, t₁]`, the Dirichlet energy of the potential.
pub fn potential_energy(model: &WarpedModel, pot: &RadialPotential, t0: f64, t1: f64) -> f64 {
    let n = model.n() as i32;
    let f = |s: f64| {
        let d = pot.derivative(s - t0);
        model.g(s).powi(n) * d * d
    };
    let integral = if t1.is_finite() { adaptive_simpson(f, t0, t1, QUAD).value } else { crate::quadrature::improper_simpson(f, t0.max(1e-300), QUAD).value };
    model.fiber_volume() * integral
}

/// Whether some (hence every) ball has positive capacity.
pub fn hyperbolicity_indicator(model: &WarpedModel) -> Result<bool> {
    let t0 = match model.kind() {
        ModelKind::Closed => 1.0f64.min(0.5 * model.domain().1),
        ModelKind::Exterior { .. } => 0.0,
    };
    Ok(inverse_area_integral(model, t0, f64::INFINITY)?.is_some())
}

/// Compares the model capacity of `{t ≤ t₀}` with `(n−1)·H₀·vol(∂B_{t₀})`.
pub fn equality_check_remark(model: &WarpedModel, t0: f64, h0: f64) -> Result<ComparisonReport> {
    let cap = warped_ball_capacity(model, t0, f64::INFINITY)?;
    let bound = (model.n() as f64 - 1.0) * h0 * model.sphere_area(t0);
    Ok(ComparisonReport::scalar(
        format!("{}: capacity of the ball t <= {t0} against (n-1)*H0*area with H0 = {h0}", model.describe()),
        Direction::Lower,
        cap,
        bound,
        1e-8 * cap.abs(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{exterior_equality_model, remark_example_model, SAMPLES_PER_DECADE};
    use crate::report::Verdict;
    use core::f64::consts::PI;
    use proptest::prelude::*;

    #[test]
    fn euclidean_potentials() {
        let p = annulus_potential_euclidean(2, 1.0, 1.0).unwrap();
        assert!((p.value(0.5) - 1.0 / 3.0).abs() < 1e-15);
        assert!((p.value(0.0) - 1.0).abs() < 1e-15 && p.value(1.0).abs() < 1e-15);
        let e = exterior_potential_euclidean(2, 1.0).unwrap();
        assert_eq!(e.value(1.0), 0.5);
        assert_eq!(e.value(0.0), 1.0);
        let e3 = exterior_potential_euclidean(3, 2.0).unwrap();
        assert!((e3.derivative(0.0) + 4.0).abs() < 1e-14);
        // t → ∞ limit of the annulus potential
        let far = annulus_potential_euclidean(2, 1.0, 1e12).unwrap();
        assert!((far.value(3.0) - 0.25).abs() < 1e-10);
        assert!(matches!(annulus_potential_euclidean(1, 1.0, 1.0), Err(Error::InvalidDimension(1))));
    }

    #[test]
    fn annulus_is_radially_harmonic() {
        for (n, h0, t) in [(2usize, 1.0, 1.0), (3, 2.0, 0.7), (5, 0.3, 4.0)] {
            let p = annulus_potential_euclidean(n, h0, t).unwrap();
            for i in 1..10 {
                let r = t * i as f64 / 10.0;
                let lap = p.second_derivative(r) + n as f64 * h0 / (1.0 + r * h0) * p.derivative(r);
                assert!(lap.abs() < 1e-10, "{lap}");
                // analytic derivatives against differences of the profile
                let h = 1e-5 * t;
                let fd = (p.value(r + h) - p.value(r - h)) / (2.0 * h);
                assert!((fd - p.derivative(r)).abs() < 1e-6 * p.derivative(r).abs());
            }
            assert!(p.value(t).abs() < 1e-14);
        }
    }

    #[test]
    fn ball_capacities() {
        assert!((ball_capacity_euclidean(2, 1.0).unwrap() - 4.0 * PI).abs() < 1e-12);
        assert!((ball_capacity_euclidean(2, 2.0).unwrap() - 2.0 * PI).abs() < 1e-12);
        let s = 3.0;
        for n in 2..7 {
            let a = ball_capacity_euclidean(n, 1.3).unwrap();
            let b = ball_capacity_euclidean(n, 1.3 / s).unwrap();
            assert!((b / a - s.powi(n as i32 - 1)).abs() < 1e-10 * b / a);
        }
    }

    #[test]
    fn warped_capacities() {
        let e = WarpedModel::euclidean(2).unwrap();
        assert!((warped_ball_capacity(&e, 1.0, 2.0).unwrap() - 8.0 * PI).abs() < 1e-9);
        assert!((warped_ball_capacity(&e, 1.0, f64::INFINITY).unwrap() - 4.0 * PI).abs() < 1e-12);
        let h = WarpedModel::hyperbolic(2).unwrap();
        let expected = 4.0 * PI * 1.0f64.sinh() * 1.0f64.exp();
        let cap = warped_ball_capacity(&h, 1.0, f64::INFINITY).unwrap();
        assert!((cap - expected).abs() < 1e-8 * expected, "{cap} vs {expected}");
        assert!((cap - 40.14).abs() < 0.01);
    }

    #[test]
    fn hyperbolicity() {
        assert!(hyperbolicity_indicator(&WarpedModel::euclidean(2).unwrap()).unwrap());
        assert!(hyperbolicity_indicator(&WarpedModel::hyperbolic(2).unwrap()).unwrap());
        assert!(!hyperbolicity_indicator(&WarpedModel::euclidean(1).unwrap()).unwrap());
        // g ~ √t: ∫ t^{−n/2} diverges for n = 2, converges for n = 3
        assert!(!hyperbolicity_indicator(&WarpedModel::concave(2).unwrap()).unwrap());
        assert!(hyperbolicity_indicator(&WarpedModel::concave(3).unwrap()).unwrap());
        assert!(!hyperbolicity_indicator(&WarpedModel::sphere(2).unwrap()).unwrap());
        assert_eq!(warped_ball_capacity(&WarpedModel::concave(2).unwrap(), 1.0, f64::INFINITY).unwrap(), 0.0);
    }

    #[test]
    fn remark_equality() {
        let m = remark_example_model(2, 1.0, 2.0).unwrap();
        let r = equality_check_remark(&m, 1.0, 2.0).unwrap();
        assert_eq!(r.verdict, Verdict::Equality);
        let cap = r.computed_curve[0].1;
        assert!(r.worst_slack.abs() <= 1e-8 * cap);
        let e = remark_example_model(2, 1.0, 1.0).unwrap();
        let r = equality_check_remark(&e, 1.0, 1.0).unwrap();
        assert_eq!(r.verdict, Verdict::Equality);
        assert!((r.computed_curve[0].1 - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn hyperbolic_is_strict() {
        let h = WarpedModel::hyperbolic(2).unwrap();
        let h0 = h.sphere_mean_curvature(1.0).unwrap();
        let r = equality_check_remark(&h, 1.0, h0).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        let bound = h0 * 4.0 * PI * 1.0f64.sinh().powi(2);
        assert!((r.bound_curve[0].1 - bound).abs() < 1e-10 * bound);
        assert!((bound - 22.79).abs() < 0.01);
        assert!(r.worst_slack > 17.0);
    }

    #[test]
    fn exterior_equality() {
        let m = exterior_equality_model(2, 1.0, 4.0 * PI).unwrap();
        assert!((warped_ball_capacity(&m, 0.0, f64::INFINITY).unwrap() - 4.0 * PI).abs() < 1e-12);
        let m = exterior_equality_model(3, 0.7, 2.5).unwrap();
        assert!((warped_ball_capacity(&m, 0.0, f64::INFINITY).unwrap() - 2.0 * 0.7 * 2.5).abs() < 1e-12);
    }

    #[test]
    fn flux_energy_identity() {
        for (m, t0, t1) in [
            (WarpedModel::hyperbolic(2).unwrap(), 1.0, 3.0),
            (WarpedModel::concave(3).unwrap(), 0.5, 4.0),
            (remark_example_model(3, 1.0, 2.5).unwrap(), 0.8, 6.0),
        ] {
            let cap = warped_ball_capacity(&m, t0, t1).unwrap();
            let pot = warped_potential(&m, t0, t1).unwrap();
            let energy = potential_energy(&m, &pot, t0, t1);
            assert!((energy - cap).abs() < 1e-8 * cap, "{energy} vs {cap}");
            // (gⁿu')' = 0: the flux gⁿu' is constant
            let n = m.n() as i32;
            let flux = |t: f64| m.g(t).powi(n) * pot.derivative(t - t0);
            for t in [t0 + 0.1, 0.5 * (t0 + t1), t1 - 0.1] {
                assert!((flux(t) - flux(t0)).abs() < 1e-8 * flux(t0).abs());
            }
            assert!((pot.value(0.0) - 1.0).abs() < 1e-15 && pot.value(t1 - t0).abs() < 1e-12);
        }
    }

    #[test]
    fn comparison_sandwich_on_models() {
        // Cartan–Hadamard: lower bound; non-negative Ricci: upper bound
        for m in [WarpedModel::hyperbolic(2).unwrap(), remark_example_model(2, 1.0, 3.0).unwrap(), WarpedModel::euclidean(4).unwrap()] {
            assert!(m.is_cartan_hadamard(SAMPLES_PER_DECADE));
            for t0 in [0.5, 1.0, 2.0] {
                let h0 = m.sphere_mean_curvature(t0).unwrap();
                let cap = warped_ball_capacity(&m, t0, f64::INFINITY).unwrap();
                assert!(cap >= (m.n() as f64 - 1.0) * h0 * m.sphere_area(t0) * (1.0 - 1e-10));
            }
        }
        let m = WarpedModel::concave(3).unwrap();
        assert!(m.ricci_radial_lower(SAMPLES_PER_DECADE) >= 0.0);
        for t0 in [0.5, 1.0, 2.0] {
            let h0 = m.sphere_mean_curvature(t0).unwrap();
            let cap = warped_ball_capacity(&m, t0, f64::INFINITY).unwrap();
            assert!(cap <= (m.n() as f64 - 1.0) * h0 * m.sphere_area(t0) * (1.0 + 1e-10));
        }
    }

    proptest! {
        #[test]
        fn capacity_decreases_with_domain(t0 in 0.2f64..2.0, a in 0.1f64..3.0, b in 0.1f64..3.0, which in 0usize..3) {
            let m = match which {
                0 => WarpedModel::hyperbolic(2).unwrap(),
                1 => WarpedModel::concave(3).unwrap(),
                _ => WarpedModel::euclidean(2).unwrap(),
            };
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let c1 = warped_ball_capacity(&m, t0, t0 + lo).unwrap();
            let c2 = warped_ball_capacity(&m, t0, t0 + hi + 1e-3).unwrap();
            let c_inf = warped_ball_capacity(&m, t0, f64::INFINITY).unwrap();
            prop_assert!(c1 >= c2 * (1.0 - 1e-10));
            prop_assert!(c2 >= c_inf * (1.0 - 1e-10));
        }
    }

    #[test]
    fn capacity_converges_to_infinite_domain() {
        let m = WarpedModel::hyperbolic(2).unwrap();
        let inf = warped_ball_capacity(&m, 1.0, f64::INFINITY).unwrap();
        let far = warped_ball_capacity(&m, 1.0, 30.0).unwrap();
        assert!((far - inf).abs() < 1e-9 * inf);
        let m = WarpedModel::concave(3).unwrap();
        let inf = warped_ball_capacity(&m, 1.0, f64::INFINITY).unwrap();
        let far = warped_ball_capacity(&m, 1.0, 1e6).unwrap();
        assert!(far > inf && (far - inf) < 1e-2 * inf);
    }
}
