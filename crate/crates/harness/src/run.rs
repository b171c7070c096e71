//! Dispatch of one scenario to the core checks.

use std::f64::consts::PI;
use std::time::Instant;

use capacity_core::comparison::{mean_curvature_flow, mean_curvature_upper_bound, riccati_flow, riccati_lower_bound, CurvatureKind, CurvatureProfile};
use capacity_core::geometry::ConvexBody;
use capacity_core::model::{WarpedModel, SAMPLES_PER_DECADE};
use capacity_core::radial::{equality_check_remark, warped_ball_capacity};
use capacity_core::report::{Direction, Verdict};
use capacity_core::solver::{exhaustion_capacity, potential_monotonicity_check, solve_annulus, ExhaustionOptions, SolveOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curvature::{area, curvature_summary, volume, Measured};
use crate::report::{format_number, Report};
use crate::scenario::{CapacityMethod, Geometry, Kind, Scenario};
use crate::HarnessError;

/// Points used by the λ-convexity check.
pub const LAMBDA_SAMPLES: usize = 1500;
/// Uncertainty attached to quadrature capacities.
const QUADRATURE_INDICATOR: f64 = 1e-9;
/// Relative roundoff allowed when checking the exhaustion trace.
const TRACE_SLACK: f64 = 1e-9;

/// `|slack| ≤ max(3·indicator·capacity, 1e−8)` counts as equality.
pub fn tolerance(capacity: f64, error_indicator: f64) -> f64 {
    (3.0 * error_indicator * capacity.abs()).max(1e-8)
}

/// The verdict of a scalar check.
pub fn verdict(direction: Direction, computed: f64, bound: f64, tol: f64) -> (f64, Verdict) {
    let slack = direction.slack(computed, bound);
    (slack, Verdict::from_slack(slack, slack.abs(), tol))
}

pub fn run_scenario(s: &Scenario) -> Result<Report, HarnessError> {
    let start = Instant::now();
    let mut r = Report::new(&s.id, s.kind, &s.inputs);
    if let Some(d) = &s.description {
        r.notes.push(d.clone());
    }
    match (&s.geometry, s.kind) {
        (_, Kind::RiccatiSuite) => riccati_suite(s, &mut r)?,
        (Geometry::Model { model, descriptor }, Kind::RadialEquality) => {
            let (t0, h0) = match (s.t0, s.h0, descriptor.splice_parameters()) {
                (Some(t), Some(h), _) => (t, h),
                (t, h, Some((st, sh))) => (t.unwrap_or(st), h.unwrap_or(sh)),
                _ => return Err(HarnessError::Invalid("radial-equality needs t0 and h0".into())),
            };
            let c = equality_check_remark(model, t0, h0)?;
            let (cap, bound) = (c.computed_curve[0].1, c.bound_curve[0].1);
            r.capacity = Some(cap);
            r.method = "quadrature".into();
            r.error_indicator = QUADRATURE_INDICATOR;
            r.h0 = Some(h0);
            r.provenance("capacity", "quadrature");
            r.provenance("bound", "closed-form");
            r.provenance("H0", "user");
            // the remark is an identity, so it is judged at the quadrature tolerance
            r.bound = Some(bound);
            r.slack = Some(c.worst_slack);
            r.tolerance = c.tolerance.max(1e-8 * cap.abs());
            r.verdict = Verdict::from_slack(c.worst_slack, c.worst_slack.abs(), r.tolerance);
            r.notes.push(c.context);
        }
        (Geometry::Model { model, .. }, _) => model_check(s, model, &mut r)?,
        (Geometry::Body(body), _) => body_check(s, body, &mut r)?,
        (Geometry::None, _) => return Err(HarnessError::Invalid(format!("{} needs a geometry", s.kind.as_str()))),
    }
    r.runtime = start.elapsed().as_secs_f64();
    Ok(r)
}

fn inapplicable(r: &mut Report, why: impl Into<String>) {
    r.verdict = Verdict::Inapplicable;
    r.notes.push(format!("inapplicable: {}", why.into()));
}

fn model_check(s: &Scenario, model: &WarpedModel, r: &mut Report) -> Result<(), HarnessError> {
    let t0 = match (s.t0, model.kind()) {
        (Some(t), _) => t,
        (None, capacity_core::model::ModelKind::Exterior { .. }) => 0.0,
        (None, _) => return Err(HarnessError::Invalid("model scenarios need t0".into())),
    };
    let t1 = s.t1.unwrap_or(f64::INFINITY);
    let n = model.n() as f64;
    let cap = warped_ball_capacity(model, t0, t1)?;
    r.capacity = Some(cap);
    r.method = "quadrature".into();
    r.error_indicator = QUADRATURE_INDICATOR;
    r.provenance("capacity", "quadrature");
    let sphere = model.sphere_mean_curvature(t0)?;
    let h0 = match s.h0 {
        Some(h) => {
            r.provenance("H0", "user");
            h
        }
        None => {
            r.provenance("H0", format!("closed-form: g'/g at t0 = {t0}"));
            sphere
        }
    };
    r.h0 = Some(h0);
    let bound = (n - 1.0) * h0 * model.sphere_area(t0);
    r.bound = Some(bound);
    r.provenance("bound", "closed-form");
    let direction = s.kind.direction();
    r.tolerance = tolerance(cap, r.error_indicator);
    let (slack, v) = verdict(direction, cap, bound, r.tolerance);
    r.slack = Some(slack);
    r.notes.push(model.describe());
    match s.kind {
        Kind::Thm31 => {
            if !model.is_cartan_hadamard(SAMPLES_PER_DECADE) {
                inapplicable(r, "the model has positive sectional curvature somewhere");
                return Ok(());
            }
            if h0 > sphere * (1.0 + 1e-12) {
                inapplicable(r, format!("H0 = {h0} exceeds the sphere curvature {sphere}"));
                return Ok(());
            }
        }
        Kind::Thm35 => {
            let ric = model.ricci_radial_lower(SAMPLES_PER_DECADE);
            if ric < -capacity_core::model::CERTIFICATE_TOL {
                inapplicable(r, format!("Ricci curvature reaches {ric} < 0"));
                return Ok(());
            }
            if h0 < sphere * (1.0 - 1e-12) {
                inapplicable(r, format!("H0 = {h0} is below the sphere curvature {sphere}"));
                return Ok(());
            }
        }
        k => return Err(HarnessError::Invalid(format!("{} does not take a model", k.as_str()))),
    }
    r.verdict = v;
    Ok(())
}

/// `H₀` from the body's curvature, or the user's value checked against it.
fn derive_h0(s: &Scenario, body: &ConvexBody, r: &mut Report) -> Result<Option<f64>, HarnessError> {
    let needs = s.kind.uses_kappa_min() || s.kind.uses_h_max();
    if !needs {
        return Ok(None);
    }
    if s.kind == Kind::Thm45 {
        // gated by the λ-check instead
        if let Some(h) = s.h0 {
            r.provenance("H0", "user");
            return Ok(Some(h));
        }
    }
    if !body.is_smooth() {
        inapplicable(r, "the body is not smooth");
        return Ok(None);
    }
    let c = match curvature_summary(body) {
        Ok(c) => c,
        Err(capacity_core::Error::RidgePoint) => {
            inapplicable(r, "curvature probe found only ridge points");
            return Ok(None);
        }
        Err(e) => return Err(e.into()),
    };
    let (m, derived, label) = if s.kind.uses_kappa_min() {
        (&c.kappa_min, c.kappa_min.value - c.kappa_min.uncertainty, "min principal curvature - uncertainty")
    } else {
        (&c.h_max, c.h_max.value + c.h_max.uncertainty, "max mean curvature + uncertainty")
    };
    r.notes.push(format!(
        "sampled {} = {} +- {} over {} points ({})",
        if s.kind.uses_kappa_min() { "kappa_min" } else { "H_max" },
        format_number(m.value),
        format_number(m.uncertainty),
        c.samples,
        m.provenance
    ));
    match s.h0 {
        Some(h) => {
            r.provenance("H0", "user");
            let ok = if s.kind.uses_kappa_min() { h <= m.value + m.uncertainty } else { h >= m.value - m.uncertainty };
            if !ok {
                inapplicable(r, format!("user H0 = {h} violates the curvature hypothesis (sampled {})", m.value));
                return Ok(None);
            }
            Ok(Some(h))
        }
        None => {
            r.provenance("H0", format!("{label} ({})", m.provenance));
            if !(derived > 0.0) {
                inapplicable(r, format!("derived H0 = {derived} is not positive"));
                return Ok(None);
            }
            Ok(Some(derived))
        }
    }
}

struct GridResult {
    value: f64,
    indicator: f64,
}

fn grid_capacity(s: &Scenario, body: &ConvexBody, r: &mut Report) -> Result<GridResult, HarnessError> {
    if s.capacity == CapacityMethod::ClosedForm {
        let radius = body.ball_radius().expect("validated on load");
        r.method = "closed-form".into();
        r.provenance("capacity", "closed-form");
        return Ok(GridResult { value: 4.0 * PI * radius, indicator: 0.0 });
    }
    let g = &s.grid;
    let h = g.h.unwrap_or(0.02 * body.bounding_radius());
    let mut opts = ExhaustionOptions::new(h);
    opts.initial_outer = g.outer;
    opts.growth = g.growth;
    opts.max_stages = g.max_stages;
    opts.offset_factor = g.offset;
    opts.solve = SolveOptions { mode: g.mode()?, tol: g.tol, ..SolveOptions::default() };
    if !g.richardson {
        opts.h_schedule = vec![h];
    }
    let est = exhaustion_capacity(body, &opts)?;
    r.h = Some(h);
    r.method = format!("grid-{}", est.method.as_str());
    r.provenance("capacity", "grid");
    r.trace = est.trace.iter().map(|t| (t.outer_radius, t.value)).collect();
    let columns = est.trace.first().map_or(0, |t| t.energies.len());
    let monotone = (0..columns).all(|c| est.trace.windows(2).all(|w| w[1].energies[c] <= w[0].energies[c] * (1.0 + TRACE_SLACK)));
    r.trace_monotone = Some(monotone);
    if !monotone {
        r.notes.push("exhaustion trace increased between stages".into());
    }
    if !est.converged {
        r.notes.push(format!("exhaustion did not settle within {} stages; last iterate {}", g.max_stages, format_number(est.last_iterate)));
    }
    if g.monotonicity_check {
        let r0 = est.trace[0].outer_radius;
        let coarse = 2.0 * h;
        let a = solve_annulus(body, r0, coarse, opts.solve)?;
        let b = solve_annulus(body, r0 * g.growth, coarse, opts.solve)?;
        let m = potential_monotonicity_check(&a, &b)?;
        r.notes.push(format!(
            "nested potentials at h = {}: max violation {} over {} nodes (threshold {}) {}",
            format_number(coarse),
            format_number(m.max_violation),
            m.common_nodes,
            format_number(m.threshold),
            if m.passes { "pass" } else { "FAIL" }
        ));
        if !m.passes {
            r.trace_monotone = Some(false);
        }
    }
    Ok(GridResult { value: est.value, indicator: est.error_indicator })
}

fn body_check(s: &Scenario, body: &ConvexBody, r: &mut Report) -> Result<(), HarnessError> {
    r.notes.push(body.describe());
    let h0 = derive_h0(s, body, r)?;
    let gated = r.notes.iter().any(|n| n.starts_with("inapplicable"));
    if s.kind == Kind::Thm45 && !gated {
        let h0 = h0.expect("thm-4.5 always has H0 here");
        let l = body.lambda_convexity_check(h0, LAMBDA_SAMPLES)?;
        r.notes.push(format!(
            "lambda-convexity at lambda = {h0}: worst margin {} over {} points, {}",
            format_number(l.worst_margin),
            l.samples,
            if l.holds { "pass" } else { "fail" }
        ));
        if !l.holds {
            inapplicable(r, "the body is not H0-convex");
        }
    }
    if s.kind == Kind::SzegoMeanCurvature && !body.is_smooth() {
        inapplicable(r, "the mean-curvature integral needs a smooth body");
    }
    let gated = r.notes.iter().any(|n| n.starts_with("inapplicable"));
    let grid = grid_capacity(s, body, r)?;
    let cap = grid.value;
    r.capacity = Some(cap);
    r.h0 = h0;

    let (bound, unc): (f64, f64) = match s.kind {
        Kind::Thm31 | Kind::Thm35 | Kind::Cor41 | Kind::Cor42 | Kind::Thm45 => match h0 {
            Some(h) => {
                let a = area(body);
                r.provenance("area", a.provenance);
                (h * a.value, h * a.uncertainty)
            }
            None => (f64::NAN, 0.0),
        },
        Kind::Cor43 | Kind::Cor44 => match h0 {
            Some(h) => {
                let v = volume(body);
                r.provenance("volume", v.provenance);
                (3.0 * h * h * v.value, 3.0 * h * h * v.uncertainty)
            }
            None => (f64::NAN, 0.0),
        },
        Kind::SzegoVolume => {
            let v = volume(body);
            r.provenance("volume", v.provenance);
            let c = (36.0 * PI).powf(2.0 / 3.0) / 3.0;
            (c * v.value.cbrt(), c * v.uncertainty / (3.0 * v.value.powf(2.0 / 3.0)))
        }
        Kind::SzegoMeanCurvature => {
            if gated {
                (f64::NAN, 0.0)
            } else {
                match curvature_summary(body)?.mean_curvature_integral {
                    Some(Measured { value, uncertainty, provenance }) => {
                        r.provenance("mean curvature integral", provenance);
                        (value, uncertainty)
                    }
                    None => {
                        inapplicable(r, "curvature probe hit ridge points");
                        (f64::NAN, 0.0)
                    }
                }
            }
        }
        Kind::PolyaSzegoRatio => {
            let a = area(body);
            r.provenance("area", a.provenance);
            let k = (32.0f64).sqrt() / PI.sqrt();
            r.notes.push(format!(
                "cap/sqrt(area) = {} against the conjectured constant {} (reported only)",
                format_number(cap / a.value.sqrt()),
                format_number(k)
            ));
            (k * a.value.sqrt(), 0.5 * k * a.uncertainty / a.value.sqrt())
        }
        Kind::RadialEquality | Kind::RiccatiSuite => unreachable!("dispatched elsewhere"),
    };
    if bound.is_finite() {
        r.bound = Some(bound);
        r.provenance("bound", "derived from the measured quantities above");
        // bound uncertainty is folded into the indicator
        r.error_indicator = grid.indicator + if cap > 0.0 { unc / cap } else { 0.0 };
        r.tolerance = tolerance(cap, r.error_indicator);
        let (slack, v) = verdict(s.kind.direction(), cap, bound, r.tolerance);
        r.slack = Some(slack);
        let gated = r.notes.iter().any(|n| n.starts_with("inapplicable"));
        r.verdict = if gated || s.kind == Kind::PolyaSzegoRatio { Verdict::Inapplicable } else { v };
    } else {
        r.error_indicator = grid.indicator;
        r.verdict = Verdict::Inapplicable;
    }
    if r.verdict.is_pass() && r.trace_monotone == Some(false) {
        r.verdict = Verdict::Fails;
        r.notes.push("verdict downgraded: exhaustion monotonicity violated".into());
    }
    Ok(())
}

fn random_table(rng: &mut ChaCha8Rng, sign: f64, r_max: f64) -> Result<CurvatureProfile, HarnessError> {
    let k = rng.random_range(3..12);
    let rs: Vec<f64> = (0..k).map(|i| r_max * i as f64 / (k - 1) as f64).collect();
    let vs: Vec<f64> = (0..k).map(|_| sign * rng.random_range(0.0..5.0)).collect();
    let kind = if sign < 0.0 { CurvatureKind::Sectional } else { CurvatureKind::Ricci };
    Ok(CurvatureProfile::table(kind, rs, vs)?)
}

/// Random curvature tables in both directions plus the flat cases.
fn riccati_suite(s: &Scenario, r: &mut Report) -> Result<(), HarnessError> {
    let p = &s.riccati;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut worst = f64::INFINITY;
    let mut largest: f64 = 0.0;
    let mut skipped = 0usize;
    for _ in 0..p.count {
        let prof = random_table(&mut rng, -1.0, p.r_max)?;
        let f0 = rng.random_range(0.1..5.0);
        if !prof.certificate().nonpositive() {
            skipped += 1;
            continue;
        }
        let f = riccati_flow(&prof, f0, p.r_max, p.step)?;
        for (x, v) in f.r.iter().zip(&f.values) {
            let d = v - riccati_lower_bound(f0, *x);
            worst = worst.min(d);
            largest = largest.max(d.abs());
        }
    }
    let worst_sec = worst;
    worst = f64::INFINITY;
    for _ in 0..p.count {
        let prof = random_table(&mut rng, 1.0, p.r_max)?;
        let h0 = rng.random_range(0.1..5.0);
        let u0 = rng.random_range(1.0..3.0);
        let u1 = rng.random_range(1.0..3.0);
        let n = rng.random_range(2..5);
        if !prof.certificate().nonnegative() {
            skipped += 1;
            continue;
        }
        let r_max = p.r_max;
        let umb = move |x: f64| u0 + (u1 - u0) * x / r_max;
        let f = mean_curvature_flow(&prof, n, h0, &umb, p.r_max, p.step)?;
        let mut w = f64::INFINITY;
        for (x, v) in f.r.iter().zip(&f.values) {
            let d = mean_curvature_upper_bound(h0, *x) - v;
            w = w.min(d);
            largest = largest.max(d.abs());
        }
        worst = worst.min(w);
    }
    let worst_ric = worst;
    worst = worst_sec.min(worst_ric);
    // flat and umbilic cases reproduce the bound curves
    let mut flat_dev: f64 = 0.0;
    for f0 in [0.25, 1.0, 3.0] {
        let sec = CurvatureProfile::constant(CurvatureKind::Sectional, 0.0, p.r_max)?;
        let f = riccati_flow(&sec, f0, p.r_max, p.step)?;
        flat_dev = f.r.iter().zip(&f.values).map(|(x, v)| (v - riccati_lower_bound(f0, *x)).abs()).fold(flat_dev, f64::max);
        let ric = CurvatureProfile::constant(CurvatureKind::Ricci, 0.0, p.r_max)?;
        let h = mean_curvature_flow(&ric, 2, f0, &|_| 1.0, p.r_max, p.step)?;
        flat_dev = h.r.iter().zip(&h.values).map(|(x, v)| (v - mean_curvature_upper_bound(f0, *x)).abs()).fold(flat_dev, f64::max);
    }
    r.method = "ode".into();
    r.provenance("flows", "ode");
    r.provenance("bounds", "closed-form");
    r.slack = Some(worst);
    r.tolerance = p.tolerance;
    r.notes.push(format!(
        "{} sec <= 0 and {} Ric >= 0 profiles (seed {}): worst slack {} / {}",
        p.count,
        p.count,
        p.seed,
        format_number(worst_sec),
        format_number(worst_ric)
    ));
    r.notes.push(format!("flat/umbilic deviation from the bound curves: {}", format_number(flat_dev)));
    if skipped > 0 {
        r.notes.push(format!("{skipped} profiles failed their sign certificate and were skipped"));
    }
    r.verdict = if flat_dev > 1e-8 { Verdict::Fails } else { Verdict::from_slack(worst, largest, p.tolerance) };
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn verdict_follows_slack_and_direction(computed in -50.0f64..50.0, bound in -50.0f64..50.0, tol in 1e-8f64..1.0, upper in any::<bool>()) {
            let d = if upper { Direction::Upper } else { Direction::Lower };
            let (slack, v) = verdict(d, computed, bound, tol);
            let expected = if upper { bound - computed } else { computed - bound };
            prop_assert_eq!(slack, expected);
            match v {
                Verdict::Equality => prop_assert!(slack.abs() <= tol),
                Verdict::Holds => prop_assert!(slack > tol),
                Verdict::Fails => prop_assert!(slack < -tol),
                Verdict::Inapplicable => prop_assert!(false),
            }
            // flipping the direction and swapping the arguments gives the same verdict
            let flipped = if upper { Direction::Lower } else { Direction::Upper };
            prop_assert_eq!(verdict(flipped, bound, computed, tol).1, v);
        }

        #[test]
        fn tolerance_floor(cap in 0.0f64..100.0, ind in 0.0f64..1.0) {
            let t = tolerance(cap, ind);
            prop_assert!(t >= 1e-8);
            prop_assert!(t >= 3.0 * ind * cap);
        }
    }
}
