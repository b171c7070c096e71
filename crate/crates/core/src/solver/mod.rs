//! Dirichlet problem on `B_R ∖ K` for convex `K ⊂ ℝ³`, capacity by energy
//! and by flux, and exhaustion towards the whole-space capacity.
//!
//! Bodies with a rotation axis can be solved on the meridian half-plane,
//! which is much cheaper than the full grid at the same spacing.

mod grid;
mod mg;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

pub use grid::{Cut, Layout, THETA_MIN};

use crate::geometry::ConvexBody;
use crate::math::Vec3;
use crate::{Error, Result};
use grid::{Level, INNER, OUTER, UNKNOWN};

/// Default relative residual of the linear solve.
pub const SOLVER_TOL: f64 = 1e-10;
/// Default PCG iteration budget.
pub const SOLVER_BUDGET: usize = 100_000;
/// Default flux offset in units of `h`.
pub const DEFAULT_OFFSET_FACTOR: f64 = 3.0;
/// Meridian panels used for axisymmetric flux surfaces.
pub const FLUX_RING_PANELS: usize = 4096;

/// Grid family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Axisymmetric when the body has a rotation axis, full otherwise.
    #[default]
    Auto,
    Full3d,
    Axisymmetric,
}

impl Mode {
    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "auto" => Some(Mode::Auto),
            "full3d" => Some(Mode::Full3d),
            "axisym" | "axisymmetric" => Some(Mode::Axisymmetric),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Auto => "auto",
            Mode::Full3d => "full3d",
            Mode::Axisymmetric => "axisym",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub mode: Mode,
    pub tol: f64,
    pub budget: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { mode: Mode::Auto, tol: SOLVER_TOL, budget: SOLVER_BUDGET }
    }
}

/// Solution of the annulus problem on a grid.
///
/// `values` holds every node: 1 inside `K`, 0 outside the outer sphere, the
/// discrete solution in between.
#[derive(Debug, Clone)]
pub struct DiscretePotential {
    layout: Layout,
    kind: Vec<u8>,
    values: Vec<f64>,
    cuts: BTreeMap<(usize, u8), Cut>,
    cr: Vec<f64>,
    cz: Vec<f64>,
    outer_radius: f64,
    tol: f64,
    pub residual_norm: f64,
    pub iterations: usize,
}

fn layout_for(body: &ConvexBody, outer_radius: f64, h: f64, mode: Mode) -> Result<(Layout, usize)> {
    let axis = match mode {
        Mode::Full3d => None,
        Mode::Auto => body.symmetry_axis(),
        Mode::Axisymmetric => Some(body.symmetry_axis().ok_or_else(|| Error::InvalidParameter("axisymmetric mode needs a body of revolution".into()))?),
    };
    let center = axis.map_or(Vec3::ZERO, |a| a.origin);
    let extent = body.bounding_radius() + center.norm();
    if !(outer_radius > extent + 3.0 * h) {
        return Err(Error::DomainTooThin);
    }
    let m_min = ((outer_radius + h) / h).ceil() as usize;
    let (k, m) = mg::plan_levels(m_min, axis.is_some());
    let layout = match axis {
        Some(axis) => Layout::Axisymmetric { m, h, axis, perp: axis.dir.any_orthogonal().normalized() },
        None => Layout::Full { m, h, center },
    };
    Ok((layout, k))
}

/// Solves `Δu = 0` in `B_R(c) ∖ K`, `u = 1` on `∂K`, `u = 0` on `|x − c| = R`.
///
/// `c` is the origin for full grids and the axis point nearest the origin in
/// axisymmetric mode.
pub fn solve_annulus(body: &ConvexBody, outer_radius: f64, h: f64, options: SolveOptions) -> Result<DiscretePotential> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidParameter(format!("grid spacing {h}")));
    }
    let (layout, k) = layout_for(body, outer_radius, h, options.mode)?;
    let mut levels = Vec::with_capacity(k + 1);
    let mut cuts = BTreeMap::new();
    for (i, l) in mg::coarse_layouts(&layout, k).into_iter().enumerate() {
        let (lv, c) = Level::build(l, body, outer_radius, i == 0);
        if i == 0 {
            cuts = c;
        }
        levels.push(lv);
    }
    if levels[0].unknowns == 0 {
        return Err(Error::DomainTooThin);
    }
    let mut hier = mg::Hierarchy::new(levels)?;
    let sol = mg::pcg(&mut hier, options.tol, options.budget)?;
    let lv0 = hier.levels.swap_remove(0);
    let mut values = sol.x;
    for (v, k) in values.iter_mut().zip(&lv0.kind) {
        match *k {
            INNER => *v = 1.0,
            OUTER => *v = 0.0,
            _ => {}
        }
    }
    Ok(DiscretePotential {
        layout: lv0.layout,
        kind: lv0.kind,
        values,
        cuts,
        cr: lv0.cr,
        cz: lv0.cz,
        outer_radius,
        tol: options.tol,
        residual_norm: sol.relative_residual,
        iterations: sol.iterations,
    })
}

impl DiscretePotential {
    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn h(&self) -> f64 {
        self.layout.h()
    }

    pub fn outer_radius(&self) -> f64 {
        self.outer_radius
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// Node values in layout order (first index fastest).
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_fluid(&self, p: usize) -> bool {
        self.kind[p] == UNKNOWN
    }

    pub fn fluid_nodes(&self) -> usize {
        self.kind.iter().filter(|k| **k == UNKNOWN).count()
    }

    pub fn cuts(&self) -> &BTreeMap<(usize, u8), Cut> {
        &self.cuts
    }

    fn strides(&self) -> [usize; 3] {
        let d = self.layout.dims();
        [1, d[0], d[0] * d[1]]
    }

    fn axes(&self) -> usize {
        if self.layout.is_axisymmetric() {
            2
        } else {
            3
        }
    }

    /// Cut-aware central difference at a node, per grid axis.
    fn node_gradient(&self, p: usize) -> [f64; 3] {
        let mut g = [0.0; 3];
        if self.kind[p] != UNKNOWN {
            return g;
        }
        let h = self.h();
        let st = self.strides();
        let c = self.layout.coords(p);
        let u0 = self.values[p];
        for (a, ga) in g.iter_mut().enumerate().take(self.axes()) {
            if a == 0 && self.layout.is_axisymmetric() && c[0] == 0 {
                continue;
            }
            let arm = |dir: u8, q: usize| match self.cuts.get(&(p, 2 * a as u8 + dir)) {
                Some(cut) => (cut.theta * h, cut.value),
                None => (h, self.values[q]),
            };
            let (fa, up) = arm(0, p + st[a]);
            let (ba, um) = arm(1, p - st[a]);
            *ga = (ba * ba * (up - u0) + fa * fa * (u0 - um)) / (fa * ba * (fa + ba));
        }
        g
    }

    /// Multilinear interpolation of `f(node)` at fractional grid coordinates.
    fn interpolate<const N: usize>(&self, x: Vec3, f: impl Fn(usize) -> [f64; N]) -> Option<[f64; N]> {
        let loc = self.layout.locate(x);
        let d = self.layout.dims();
        let axes = self.axes();
        let mut base = [0usize; 3];
        let mut frac = [0.0; 3];
        for a in 0..axes {
            let l = loc[a];
            if !(l >= 0.0) || l > (d[a] - 1) as f64 {
                return None;
            }
            let i = (l.floor() as usize).min(d[a] - 2);
            base[a] = i;
            frac[a] = l - i as f64;
        }
        let st = self.strides();
        let mut out = [0.0; N];
        for corner in 0..(1usize << axes) {
            let mut w = 1.0;
            let mut p = 0;
            for a in 0..axes {
                let bit = (corner >> a) & 1;
                w *= if bit == 1 { frac[a] } else { 1.0 - frac[a] };
                p += (base[a] + bit) * st[a];
            }
            if w == 0.0 {
                continue;
            }
            let v = f(p);
            for k in 0..N {
                out[k] += w * v[k];
            }
        }
        Some(out)
    }

    /// Interpolated potential at a point (1 inside `K`, 0 beyond the grid).
    pub fn value_at(&self, x: Vec3) -> f64 {
        self.interpolate(x, |p| [self.values[p]]).map_or(0.0, |v| v[0])
    }

    /// Interpolated gradient at a point of `ℝ³`.
    pub fn gradient_at(&self, x: Vec3) -> Option<Vec3> {
        let g = self.interpolate(x, |p| self.node_gradient(p))?;
        Some(match &self.layout {
            Layout::Full { .. } => Vec3::new(g[0], g[1], g[2]),
            Layout::Axisymmetric { axis, perp, .. } => {
                let rel = x - axis.origin;
                let z = rel.dot(axis.dir);
                let radial = rel - axis.dir * z;
                let rho = radial.norm();
                let e = if rho > 0.0 { radial / rho } else { *perp };
                e * g[0] + axis.dir * g[1]
            }
        })
    }

    /// Plain-text header of the binary export (see the repository README).
    pub fn export_header(&self) -> String {
        let d = self.layout.dims();
        let h = self.h();
        let mut s = String::from("capacity-potential 1\n");
        match &self.layout {
            Layout::Full { m, center, .. } => {
                let o = *center - Vec3::new(1.0, 1.0, 1.0) * (*m as f64 * h);
                s += "mode full3d\n";
                s += &format!("dims {} {} {}\n", d[0], d[1], d[2]);
                s += &format!("spacing {h:e}\n");
                s += &format!("origin {:e} {:e} {:e}\n", o.x(), o.y(), o.z());
            }
            Layout::Axisymmetric { m, axis, perp, .. } => {
                s += "mode axisym\n";
                s += &format!("dims {} {} 1\n", d[0], d[1]);
                s += &format!("spacing {h:e}\n");
                s += &format!("origin 0 {:e} 0\n", -(*m as f64) * h);
                s += &format!(
                    "axis {:e} {:e} {:e} {:e} {:e} {:e}\n",
                    axis.origin.x(),
                    axis.origin.y(),
                    axis.origin.z(),
                    axis.dir.x(),
                    axis.dir.y(),
                    axis.dir.z()
                );
                s += &format!("perp {:e} {:e} {:e}\n", perp.x(), perp.y(), perp.z());
            }
        }
        s += &format!("outer_radius {:e}\n", self.outer_radius);
        s += "dtype f64le\norder first-index-fastest\n";
        s
    }
}

/// How a [`CapacityEstimate`] value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Energy,
    Flux,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Energy => "energy",
            Method::Flux => "flux",
        }
    }
}

/// One stage of an exhaustion: `cap(K, B_R)` at each spacing of the schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub outer_radius: f64,
    /// Energy capacities, one per spacing, coarsest first.
    pub energies: Vec<f64>,
    /// Flux capacities, one per spacing.
    pub fluxes: Vec<f64>,
    /// Energy value extrapolated in `h` (the finest energy for one spacing).
    pub value: f64,
    /// Whole-space value extrapolated in `R` from this stage and earlier.
    pub extrapolated: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityEstimate {
    pub value: f64,
    pub method: Method,
    pub h: f64,
    pub offset: Option<f64>,
    pub error_indicator: f64,
    pub trace: Vec<TraceEntry>,
    pub converged: bool,
    /// `cap(K, B_R)` at the last stage, before extrapolation in `R`.
    pub last_iterate: f64,
}

impl CapacityEstimate {
    fn single(value: f64, method: Method, h: f64, offset: Option<f64>) -> Self {
        CapacityEstimate { value, method, h, offset, error_indicator: 0.0, trace: Vec::new(), converged: true, last_iterate: value }
    }
}

/// Discrete Dirichlet energy `Σ c·(Δu)²` over grid edges, cut edges counted
/// over their fluid part only. For the solved potential this equals the
/// capacity of the discrete condenser.
pub fn capacity_energy(u: &DiscretePotential) -> CapacityEstimate {
    let st = u.strides();
    let mut e = 0.0;
    for p in 0..u.values.len() {
        if u.kind[p] != UNKNOWN {
            continue;
        }
        let c = u.layout.coords(p);
        for a in 0..u.axes() {
            let q = p + st[a];
            if u.kind[q] != UNKNOWN {
                continue;
            }
            let w = match (&u.layout, a) {
                (Layout::Full { h, .. }, _) => *h,
                (_, 0) => u.cr[c[0]],
                _ => u.cz[c[0]],
            };
            let d = u.values[p] - u.values[q];
            e += w * d * d;
        }
    }
    for (&(p, _), cut) in &u.cuts {
        let d = u.values[p] - cut.value;
        e += cut.weight / cut.theta * d * d;
    }
    CapacityEstimate::single(e, Method::Energy, u.h(), None)
}

/// Flux `∫ −∂_ν u dA` over `∂(K + offset·B)`, with the gradient sampled by
/// multilinear interpolation of cut-aware nodal differences.
pub fn capacity_flux(u: &DiscretePotential, body: &ConvexBody, offset: f64) -> Result<CapacityEstimate> {
    let h = u.h();
    let center = u.layout.center();
    let reach = body.bounding_radius() + center.norm() + offset;
    if !(offset >= 2.0 * h * (1.0 - 1e-12) && offset <= 5.0 * h * (1.0 + 1e-12)) || reach + 2.0 * h >= u.outer_radius {
        return Err(Error::OffsetOutsideDomain(offset));
    }
    let surface = body.parallel_body(offset)?;
    let flux = match &u.layout {
        Layout::Axisymmetric { axis, perp, .. } => {
            let rings = surface.ring_samples(FLUX_RING_PANELS).ok_or(Error::GridMismatch("body has no rotation axis"))?;
            let mut total = 0.0;
            for r in rings {
                let x = axis.origin + axis.dir * r.z + *perp * r.rho;
                let n = axis.dir * r.normal_z + *perp * r.normal_rho;
                let g = u.gradient_at(x).ok_or(Error::OffsetOutsideDomain(offset))?;
                total -= r.weight * g.dot(n);
            }
            total
        }
        Layout::Full { .. } => {
            let res = ((2.04 * surface.bounding_radius() / h).ceil() as usize).max(crate::geometry::MIN_MESH_RESOLUTION);
            let samples = surface.boundary_samples(res)?;
            let mesh_area: f64 = samples.iter().map(|s| s.weight).sum();
            let scale = surface.area() / mesh_area;
            let mut total = 0.0;
            for s in samples {
                let g = u.gradient_at(s.point).ok_or(Error::OffsetOutsideDomain(offset))?;
                total -= s.weight * scale * g.dot(s.normal);
            }
            total
        }
    };
    let mut est = CapacityEstimate::single(flux, Method::Flux, h, Some(offset));
    est.error_indicator = (capacity_energy(u).value - flux).abs() / flux.abs();
    Ok(est)
}

/// Energy capacity of a solved potential with `|energy − flux|/energy` as
/// error indicator, the flux taken at `offset_factor·h`.
pub fn capacity_estimate(u: &DiscretePotential, body: &ConvexBody, offset_factor: f64) -> Result<CapacityEstimate> {
    let flux = capacity_flux(u, body, offset_factor * u.h())?;
    let mut est = capacity_energy(u);
    est.error_indicator = (est.value - flux.value).abs() / est.value;
    est.offset = flux.offset;
    Ok(est)
}

/// Result of comparing two potentials on nested domains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonicityReport {
    /// `max (u_a − u_b)` over nodes fluid in both.
    pub max_violation: f64,
    pub common_nodes: usize,
    pub threshold: f64,
    pub passes: bool,
}

/// Checks `u_a ≤ u_b` where `u_a` solves on the smaller domain.
pub fn potential_monotonicity_check(a: &DiscretePotential, b: &DiscretePotential) -> Result<MonotonicityReport> {
    let (la, lb) = (&a.layout, &b.layout);
    if la.is_axisymmetric() != lb.is_axisymmetric() {
        return Err(Error::GridMismatch("grid families differ"));
    }
    if (la.h() - lb.h()).abs() > 1e-12 * la.h() {
        return Err(Error::GridMismatch("spacings differ"));
    }
    if (la.center() - lb.center()).norm() > 1e-12 * (1.0 + la.center().norm()) {
        return Err(Error::GridMismatch("grids are not aligned"));
    }
    if let (Layout::Axisymmetric { axis: xa, perp: pa, .. }, Layout::Axisymmetric { axis: xb, perp: pb, .. }) = (la, lb) {
        if (xa.dir - xb.dir).norm() > 1e-12 || (*pa - *pb).norm() > 1e-12 {
            return Err(Error::GridMismatch("axes differ"));
        }
    }
    let shift = lb.m() as isize - la.m() as isize;
    let axes = a.axes();
    let mut worst = f64::NEG_INFINITY;
    let mut count = 0;
    for p in 0..a.values.len() {
        if a.kind[p] != UNKNOWN {
            continue;
        }
        let c = la.coords(p);
        let mut cb = [0usize; 3];
        let mut inside = true;
        for k in 0..axes {
            // the ρ index of axisymmetric grids starts on the axis for both
            let s = if la.is_axisymmetric() && k == 0 { 0 } else { shift };
            let v = c[k] as isize + s;
            if v < 0 || v as usize >= lb.dims()[k] {
                inside = false;
            }
            cb[k] = v.max(0) as usize;
        }
        if !inside {
            continue;
        }
        let q = lb.index(cb[0], cb[1], cb[2]);
        if b.kind[q] != UNKNOWN {
            continue;
        }
        count += 1;
        worst = worst.max(a.values[p] - b.values[q]);
    }
    if count == 0 {
        return Err(Error::GridMismatch("no common fluid nodes"));
    }
    let threshold = 10.0 * a.tol.max(b.tol);
    Ok(MonotonicityReport { max_violation: worst, common_nodes: count, threshold, passes: worst <= threshold })
}

/// Parameters of [`exhaustion_capacity`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustionOptions {
    /// First outer radius; defaults to twice the body's extent.
    pub initial_outer: Option<f64>,
    pub growth: f64,
    /// Grid spacings, coarsest first; two or more enable extrapolation in `h`.
    pub h_schedule: Vec<f64>,
    pub rel_tol: f64,
    pub min_stages: usize,
    pub max_stages: usize,
    pub offset_factor: f64,
    /// Assumed convergence order in `h` for the extrapolation.
    pub order: f64,
    pub solve: SolveOptions,
}

impl ExhaustionOptions {
    pub fn new(h: f64) -> Self {
        ExhaustionOptions {
            initial_outer: None,
            growth: 2.0,
            h_schedule: alloc::vec![h, h / 2.0],
            rel_tol: 5e-3,
            min_stages: 3,
            max_stages: 6,
            offset_factor: DEFAULT_OFFSET_FACTOR,
            order: 2.0,
            solve: SolveOptions::default(),
        }
    }
}

/// Extrapolation of `(h_i, v_i)` to `h = 0` assuming `v = v₀ + C·h^order`
/// from the two finest spacings.
pub fn richardson(hs: &[f64], vs: &[f64], order: f64) -> f64 {
    let n = vs.len();
    if n < 2 {
        return vs[n - 1];
    }
    let r = (hs[n - 2] / hs[n - 1]).powf(order);
    vs[n - 1] + (vs[n - 1] - vs[n - 2]) / (r - 1.0)
}

/// Whole-space capacity from `cap(K, B_R)` values by polynomial
/// extrapolation of `1/cap` in `1/R` (exact to first order for concentric
/// balls, where `1/cap = (1 − 1/R)/(4π)`). Uses up to the last three points.
pub fn extrapolate_reciprocal(radii: &[f64], caps: &[f64]) -> f64 {
    let n = radii.len();
    let k = n.min(3);
    let xs = &radii[n - k..];
    let ys = &caps[n - k..];
    let mut inv0 = 0.0;
    for i in 0..k {
        let mut w = 1.0;
        for j in 0..k {
            if j != i {
                let (xi, xj) = (1.0 / xs[i], 1.0 / xs[j]);
                w *= (0.0 - xj) / (xi - xj);
            }
        }
        inv0 += w / ys[i];
    }
    1.0 / inv0
}

/// `cap(K)` through the exhaustion `B_{R₀·growth^j}`, solving each stage on
/// every spacing of the schedule.
///
/// The returned value is the extrapolated whole-space capacity (energy
/// method); `last_iterate` is the final `cap(K, B_R)`. When successive
/// extrapolated values never agree within `rel_tol`, the estimate is
/// returned with `converged = false`.
pub fn exhaustion_capacity(body: &ConvexBody, opts: &ExhaustionOptions) -> Result<CapacityEstimate> {
    if !(opts.growth >= 1.5) {
        return Err(Error::InvalidParameter(format!("growth {} < 1.5", opts.growth)));
    }
    if opts.h_schedule.is_empty() || opts.h_schedule.iter().any(|h| !(*h > 0.0)) {
        return Err(Error::InvalidParameter("empty or non-positive h schedule".into()));
    }
    let center = match opts.solve.mode {
        Mode::Full3d => Vec3::ZERO,
        _ => body.symmetry_axis().map_or(Vec3::ZERO, |a| a.origin),
    };
    let extent = body.bounding_radius() + center.norm();
    let h_max = opts.h_schedule.iter().cloned().fold(0.0, f64::max);
    let r0 = opts.initial_outer.unwrap_or((2.0 * extent).max(extent + 8.0 * h_max));
    let h_fine = *opts.h_schedule.last().unwrap();
    let offset = opts.offset_factor * h_fine;
    let mut trace: Vec<TraceEntry> = Vec::new();
    let mut radii = Vec::new();
    let mut values = Vec::new();
    let mut converged = false;
    let mut indicator = 0.0f64;
    for j in 0..opts.max_stages {
        let radius = r0 * opts.growth.powi(j as i32);
        let mut energies = Vec::new();
        let mut fluxes = Vec::new();
        for &h in &opts.h_schedule {
            let u = solve_annulus(body, radius, h, opts.solve)?;
            energies.push(capacity_energy(&u).value);
            fluxes.push(capacity_flux(&u, body, opts.offset_factor * h)?.value);
        }
        let value = richardson(&opts.h_schedule, &energies, opts.order);
        let flux = richardson(&opts.h_schedule, &fluxes, opts.order);
        let correction = (value - energies[energies.len() - 1]).abs();
        indicator = ((value - flux).abs().max(correction)) / value;
        radii.push(radius);
        values.push(value);
        let extrapolated = extrapolate_reciprocal(&radii, &values);
        let prev = trace.last().map(|t| t.extrapolated);
        trace.push(TraceEntry { outer_radius: radius, energies, fluxes, value, extrapolated });
        if let Some(prev) = prev {
            if j + 1 >= opts.min_stages && (extrapolated - prev).abs() < opts.rel_tol * extrapolated.abs() {
                converged = true;
                break;
            }
        }
    }
    let last = trace.last().expect("at least one stage");
    Ok(CapacityEstimate {
        value: last.extrapolated,
        method: Method::Energy,
        h: h_fine,
        offset: Some(offset),
        error_indicator: indicator,
        last_iterate: last.value,
        converged,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Shape;
    use core::f64::consts::PI;

    fn unit_ball() -> ConvexBody {
        ConvexBody::ball(Vec3::ZERO, 1.0).unwrap()
    }

    // concentric spheres: u = (1/r − 1/R)/(1 − 1/R), cap = 4π/(1 − 1/R)
    fn shell_potential(r: f64, outer: f64) -> f64 {
        ((1.0 / r - 1.0 / outer) / (1.0 - 1.0 / outer)).clamp(0.0, 1.0)
    }

    fn nodal_error(u: &DiscretePotential, outer: f64) -> f64 {
        (0..u.values().len()).filter(|p| u.is_fluid(*p)).map(|p| (u.values()[p] - shell_potential(u.layout().point(p).norm(), outer)).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn axisymmetric_ball_annulus() {
        let u = solve_annulus(&unit_ball(), 2.0, 0.02, SolveOptions::default()).unwrap();
        assert!(u.layout().is_axisymmetric());
        assert!(u.residual_norm <= 1e-10);
        assert!(u.values().iter().all(|v| (-1e-12..=1.0 + 1e-12).contains(v)));
        let worst = nodal_error(&u, 2.0);
        assert!(worst <= 5e-3, "{worst}");
        let exact = 8.0 * PI;
        let e = capacity_energy(&u).value;
        let f = capacity_flux(&u, &unit_ball(), 0.06).unwrap().value;
        assert!((e - exact).abs() < 0.02 * exact, "energy {e}");
        assert!((f - exact).abs() < 0.02 * exact, "flux {f}");
        let f2 = capacity_flux(&u, &unit_ball(), 0.04).unwrap().value;
        let f5 = capacity_flux(&u, &unit_ball(), 0.10).unwrap().value;
        assert!((f2 - f5).abs() < 0.01 * f5, "{f2} {f5}");
    }

    #[test]
    fn full_grid_ball_annulus() {
        let opts = SolveOptions { mode: Mode::Full3d, ..SolveOptions::default() };
        let u = solve_annulus(&unit_ball(), 2.0, 0.05, opts).unwrap();
        assert!(!u.layout().is_axisymmetric());
        assert!(u.residual_norm <= 1e-10);
        let exact = 8.0 * PI;
        let e = capacity_energy(&u).value;
        let f = capacity_flux(&u, &unit_ball(), 0.15).unwrap().value;
        assert!((e - exact).abs() < 0.02 * exact, "energy {e}");
        assert!((f - exact).abs() < 0.02 * exact, "flux {f}");
        let worst = nodal_error(&u, 2.0);
        assert!(worst <= 5e-3, "{worst}");
    }

    #[test]
    fn domain_checks() {
        assert_eq!(solve_annulus(&unit_ball(), 1.05, 0.02, SolveOptions::default()).unwrap_err(), Error::DomainTooThin);
        let u = solve_annulus(&unit_ball(), 2.0, 0.1, SolveOptions::default()).unwrap();
        assert!(matches!(capacity_flux(&u, &unit_ball(), 0.1), Err(Error::OffsetOutsideDomain(_))));
        assert!(matches!(capacity_flux(&u, &unit_ball(), 0.6), Err(Error::OffsetOutsideDomain(_))));
        let lens = ConvexBody::intersection(alloc::vec![
            Shape::Ball { center: Vec3::new(-0.5, 0.0, 0.0), radius: 1.0 },
            Shape::Ball { center: Vec3::new(0.5, 0.0, 0.0), radius: 1.0 },
        ])
        .unwrap();
        let _ = lens;
        let bad = SolveOptions { mode: Mode::Axisymmetric, ..SolveOptions::default() };
        let slab = ConvexBody::intersection(alloc::vec![
            Shape::Ball { center: Vec3::ZERO, radius: 1.0 },
            Shape::HalfSpace { normal: Vec3::new(1.0, 1.0, 0.0).normalized(), point: Vec3::new(0.3, 0.0, 0.0) },
            Shape::HalfSpace { normal: Vec3::new(0.0, -1.0, 1.0).normalized(), point: Vec3::new(0.0, 0.0, 0.3) },
        ])
        .unwrap();
        assert!(matches!(solve_annulus(&slab, 2.0, 0.1, bad), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn nested_potentials_are_monotone() {
        let b = unit_ball();
        let u2 = solve_annulus(&b, 2.0, 0.04, SolveOptions::default()).unwrap();
        let u4 = solve_annulus(&b, 4.0, 0.04, SolveOptions::default()).unwrap();
        let r = potential_monotonicity_check(&u2, &u4).unwrap();
        assert!(r.passes && r.max_violation <= 1e-8, "{r:?}");
        let same = potential_monotonicity_check(&u2, &u2).unwrap();
        assert_eq!(same.max_violation, 0.0);
        let swapped = potential_monotonicity_check(&u4, &u2).unwrap();
        assert!(!swapped.passes && swapped.max_violation > 0.1);
        let coarse = solve_annulus(&b, 2.0, 0.05, SolveOptions::default()).unwrap();
        assert!(matches!(potential_monotonicity_check(&u2, &coarse), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn indicator_decreases_under_refinement() {
        let b = ConvexBody::ellipsoid(Vec3::ZERO, [1.0, 1.0, 1.5]).unwrap();
        let ind: Vec<f64> = [0.04, 0.02, 0.01]
            .iter()
            .map(|h| capacity_estimate(&solve_annulus(&b, 3.0, *h, SolveOptions::default()).unwrap(), &b, 3.0).unwrap().error_indicator)
            .collect();
        assert!(ind[0] < 0.05);
        for w in ind.windows(2) {
            assert!((w[0] / w[1]).log2() >= 1.0, "{ind:?}");
        }
    }

    #[test]
    fn energy_of_constant_field_vanishes() {
        // every node fluid at u = 1 away from the cuts: no gradient anywhere
        let b = unit_ball();
        let mut u = solve_annulus(&b, 2.0, 0.1, SolveOptions::default()).unwrap();
        u.values.iter_mut().for_each(|v| *v = 1.0);
        u.cuts.values_mut().for_each(|c| c.value = 1.0);
        assert_eq!(capacity_energy(&u).value, 0.0);
    }

    #[test]
    fn reciprocal_extrapolation_is_exact_for_balls() {
        let radii = [2.0, 4.0, 8.0];
        let caps: Vec<f64> = radii.iter().map(|r| 4.0 * PI * r / (r - 1.0)).collect();
        assert!((extrapolate_reciprocal(&radii, &caps) - 4.0 * PI).abs() < 1e-12);
        assert!((extrapolate_reciprocal(&radii[..2], &caps[..2]) - 4.0 * PI).abs() < 1e-12);
        assert!((richardson(&[0.2, 0.1], &[1.0 + 0.04, 1.0 + 0.01], 2.0) - 1.0).abs() < 1e-14);
    }
}
