//! Vertex-centred grids, node classification and the cut-cell operator.
//!
//! The operator is assembled in energy form: every grid edge carries a
//! weight `c` (dual-face area over edge length) and contributes
//! `c·(u_p − u_q)²`. An edge from an unknown `p` to a Dirichlet node is cut
//! where the boundary crosses it, at fraction `θ` of its length; it then
//! contributes `(c/θ)·(u_p − u_b)²`. The resulting matrix is a symmetric
//! M-matrix, so CG applies and the discrete maximum principle holds.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::geometry::{Axis, ConvexBody};
use crate::math::Vec3;

pub(crate) const UNKNOWN: u8 = 0;
pub(crate) const INNER: u8 = 1;
pub(crate) const OUTER: u8 = 2;

/// Cut fractions below this are clamped (moves the boundary by < 1% of `h`).
pub const THETA_MIN: f64 = 1e-2;

/// Node placement.
///
/// `Full`: `(2m+1)³` nodes at `center + (i − m, j − m, k − m)·h`.
/// `Axisymmetric`: `(m+1) × (2m+1)` nodes at `ρ = i·h`, `z = (j − m)·h` in
/// the half-plane spanned by `axis.dir` and `perp`, centred at `axis.origin`.
#[derive(Debug, Clone, PartialEq)]
pub enum Layout {
    Full { m: usize, h: f64, center: Vec3 },
    Axisymmetric { m: usize, h: f64, axis: Axis, perp: Vec3 },
}

impl Layout {
    pub fn h(&self) -> f64 {
        match self {
            Layout::Full { h, .. } | Layout::Axisymmetric { h, .. } => *h,
        }
    }

    pub fn m(&self) -> usize {
        match self {
            Layout::Full { m, .. } | Layout::Axisymmetric { m, .. } => *m,
        }
    }

    pub fn center(&self) -> Vec3 {
        match self {
            Layout::Full { center, .. } => *center,
            Layout::Axisymmetric { axis, .. } => axis.origin,
        }
    }

    pub fn is_axisymmetric(&self) -> bool {
        matches!(self, Layout::Axisymmetric { .. })
    }

    /// Node counts along the (x, y, z) or (ρ, z, –) directions.
    pub fn dims(&self) -> [usize; 3] {
        match self {
            Layout::Full { m, .. } => [2 * m + 1; 3],
            Layout::Axisymmetric { m, .. } => [m + 1, 2 * m + 1, 1],
        }
    }

    pub fn len(&self) -> usize {
        let d = self.dims();
        d[0] * d[1] * d[2]
    }

    pub fn coarsened(&self) -> Layout {
        match self {
            Layout::Full { m, h, center } => Layout::Full { m: m / 2, h: 2.0 * h, center: *center },
            Layout::Axisymmetric { m, h, axis, perp } => Layout::Axisymmetric { m: m / 2, h: 2.0 * h, axis: *axis, perp: *perp },
        }
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        let d = self.dims();
        (k * d[1] + j) * d[0] + i
    }

    pub fn coords(&self, p: usize) -> [usize; 3] {
        let d = self.dims();
        [p % d[0], (p / d[0]) % d[1], p / (d[0] * d[1])]
    }

    /// Position of a node in ℝ³ (axisymmetric nodes on the `perp` half-plane).
    pub fn point(&self, p: usize) -> Vec3 {
        let [i, j, k] = self.coords(p);
        match self {
            Layout::Full { m, h, center } => {
                let mf = *m as f64;
                *center + Vec3::new((i as f64 - mf) * h, (j as f64 - mf) * h, (k as f64 - mf) * h)
            }
            Layout::Axisymmetric { m, h, axis, perp } => axis.origin + axis.dir * ((j as f64 - *m as f64) * h) + *perp * (i as f64 * h),
        }
    }

    /// Grid coordinates (fractional node indices) of a point.
    pub fn locate(&self, x: Vec3) -> [f64; 3] {
        match self {
            Layout::Full { m, h, center } => {
                let d = x - *center;
                [d.x() / h + *m as f64, d.y() / h + *m as f64, d.z() / h + *m as f64]
            }
            Layout::Axisymmetric { m, h, axis, .. } => {
                let rel = x - axis.origin;
                let z = rel.dot(axis.dir);
                let rho = (rel - axis.dir * z).norm();
                [rho / h, z / h + *m as f64, 0.0]
            }
        }
    }

    /// Axisymmetric edge weights: `2π·ρ_{i+½}` for the ρ-edge leaving node
    /// `i` outward, `2π·m_i/h` for z-edges at node `i`, where
    /// `m_i = ∫ρ dρ` over the node's ρ-cell.
    pub fn axisym_weights(&self) -> (Vec<f64>, Vec<f64>) {
        let (m, h) = (self.m(), self.h());
        let cr = (0..=m).map(|i| 2.0 * PI * (i as f64 + 0.5) * h).collect();
        let cz = (0..=m).map(|i| if i == 0 { 2.0 * PI * h / 8.0 } else { 2.0 * PI * i as f64 * h }).collect();
        (cr, cz)
    }
}

/// A cut edge leaving unknown node `node` in direction `dir`
/// (`2·axis + {0: +, 1: −}`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cut {
    pub theta: f64,
    pub weight: f64,
    pub value: f64,
}

/// One grid level: classification, diagonal and boundary right-hand side.
#[derive(Debug, Clone)]
pub struct Level {
    pub layout: Layout,
    pub kind: Vec<u8>,
    pub diag: Vec<f64>,
    pub rhs: Vec<f64>,
    pub cr: Vec<f64>,
    pub cz: Vec<f64>,
    pub unknowns: usize,
}

/// Root of `f` on `[0, 1]` with `f(0) > 0 ≥ f(1)` (Illinois regula falsi).
fn edge_root(f: impl Fn(f64) -> f64) -> f64 {
    let (mut a, mut b) = (0.0, 1.0);
    let (mut fa, mut fb) = (f(a), f(b));
    let mut side = 0i8;
    for _ in 0..200 {
        if b - a <= 1e-13 {
            break;
        }
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let fc = f(c);
        if fc > 0.0 {
            a = c;
            fa = fc;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = c;
            fb = fc;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
            if fc == 0.0 {
                return c;
            }
        }
    }
    0.5 * (a + b)
}

/// Fraction along `p → q` where `|x − c| = R`, with `p` inside.
fn sphere_root(p: Vec3, q: Vec3, c: Vec3, radius: f64) -> f64 {
    let d = q - p;
    let w = p - c;
    let (a, b, cc) = (d.norm_sq(), 2.0 * w.dot(d), w.norm_sq() - radius * radius);
    let disc = (b * b - 4.0 * a * cc).max(0.0);
    let s = (-b + disc.sqrt()) / (2.0 * a);
    s.clamp(0.0, 1.0)
}

impl Level {
    /// Classifies nodes against `K` (inner, `u = 1`) and the sphere of radius
    /// `outer_radius` about the layout centre (outer, `u = 0`) and assembles
    /// diagonal and right-hand side. Cut edges are returned when `record`.
    pub fn build(layout: Layout, body: &ConvexBody, outer_radius: f64, record: bool) -> (Level, BTreeMap<(usize, u8), Cut>) {
        let n = layout.len();
        let center = layout.center();
        let points: Vec<Vec3> = (0..n).map(|p| layout.point(p)).collect();
        let kind: Vec<u8> = points
            .iter()
            .map(|x| {
                if (*x - center).norm() >= outer_radius {
                    OUTER
                } else if body.level(*x) <= 0.0 {
                    INNER
                } else {
                    UNKNOWN
                }
            })
            .collect();
        let (cr, cz) = if layout.is_axisymmetric() { layout.axisym_weights() } else { (Vec::new(), Vec::new()) };
        let h = layout.h();
        let dims = layout.dims();
        let strides = [1usize, dims[0], dims[0] * dims[1]];
        let axes = if layout.is_axisymmetric() { 2 } else { 3 };
        let mut diag = alloc::vec![0.0; n];
        let mut rhs = alloc::vec![0.0; n];
        let mut cuts = BTreeMap::new();
        let mut unknowns = 0;
        for p in 0..n {
            if kind[p] != UNKNOWN {
                continue;
            }
            unknowns += 1;
            let c = layout.coords(p);
            for axis in 0..axes {
                for (s, sign) in [(0u8, 1i64), (1u8, -1i64)] {
                    // edge weight and neighbour
                    let weight = if layout.is_axisymmetric() {
                        match (axis, sign) {
                            (0, 1) => cr[c[0]],
                            (0, _) => {
                                if c[0] == 0 {
                                    continue;
                                }
                                cr[c[0] - 1]
                            }
                            _ => cz[c[0]],
                        }
                    } else {
                        h
                    };
                    let q = (p as i64 + sign * strides[axis] as i64) as usize;
                    match kind[q] {
                        UNKNOWN => diag[p] += weight,
                        k => {
                            let theta = if k == INNER {
                                let (xp, xq) = (points[p], points[q]);
                                edge_root(|t| body.level(xp + (xq - xp) * t))
                            } else {
                                sphere_root(points[p], points[q], center, outer_radius)
                            }
                            .max(THETA_MIN);
                            let value = if k == INNER { 1.0 } else { 0.0 };
                            diag[p] += weight / theta;
                            rhs[p] += weight / theta * value;
                            if record {
                                cuts.insert((p, 2 * axis as u8 + s), Cut { theta, weight, value });
                            }
                        }
                    }
                }
            }
        }
        (Level { layout, kind, diag, rhs, cr, cz, unknowns }, cuts)
    }

    pub fn len(&self) -> usize {
        self.kind.len()
    }

    /// `y = A x` on unknowns (zero elsewhere); `x` must vanish off the unknowns.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let d = self.layout.dims();
        match self.layout {
            Layout::Full { h, .. } => {
                let (sx, sy) = (d[0], d[0] * d[1]);
                for p in 0..self.len() {
                    if self.kind[p] != UNKNOWN {
                        y[p] = 0.0;
                        continue;
                    }
                    let s = x[p + 1] + x[p - 1] + x[p + sx] + x[p - sx] + x[p + sy] + x[p - sy];
                    y[p] = self.diag[p] * x[p] - h * s;
                }
            }
            Layout::Axisymmetric { .. } => {
                let nr = d[0];
                for p in 0..self.len() {
                    if self.kind[p] != UNKNOWN {
                        y[p] = 0.0;
                        continue;
                    }
                    let i = p % nr;
                    let mut s = self.cr[i] * x[p + 1] + self.cz[i] * (x[p + nr] + x[p - nr]);
                    if i > 0 {
                        s += self.cr[i - 1] * x[p - 1];
                    }
                    y[p] = self.diag[p] * x[p] - s;
                }
            }
        }
    }

    #[inline]
    fn relax(&self, p: usize, x: &mut [f64], b: &[f64]) {
        let d = self.layout.dims();
        let s = match self.layout {
            Layout::Full { h, .. } => {
                let (sx, sy) = (d[0], d[0] * d[1]);
                h * (x[p + 1] + x[p - 1] + x[p + sx] + x[p - sx] + x[p + sy] + x[p - sy])
            }
            Layout::Axisymmetric { .. } => {
                let nr = d[0];
                let i = p % nr;
                let mut s = self.cr[i] * x[p + 1] + self.cz[i] * (x[p + nr] + x[p - nr]);
                if i > 0 {
                    s += self.cr[i - 1] * x[p - 1];
                }
                s
            }
        };
        x[p] = (b[p] + s) / self.diag[p];
    }

    /// One lexicographic Gauss–Seidel sweep, forward or backward.
    pub fn gauss_seidel(&self, x: &mut [f64], b: &[f64], forward: bool) {
        let n = self.len();
        if forward {
            for p in 0..n {
                if self.kind[p] == UNKNOWN {
                    self.relax(p, x, b);
                }
            }
        } else {
            for p in (0..n).rev() {
                if self.kind[p] == UNKNOWN {
                    self.relax(p, x, b);
                }
            }
        }
    }

    /// Interpolation weights of fine node coordinate `c` onto coarse nodes.
    fn prolong_stencil(&self, p: usize, out: &mut [(usize, f64); 8], coarse: &Layout) -> usize {
        let c = self.layout.coords(p);
        let cd = coarse.dims();
        let axes = if self.layout.is_axisymmetric() { 2 } else { 3 };
        let mut count = 1;
        out[0] = (0, 1.0);
        let mut stride = 1;
        for a in 0..3 {
            if a >= axes {
                break;
            }
            let half = c[a] / 2;
            if c[a] % 2 == 0 {
                for e in out.iter_mut().take(count) {
                    e.0 += half * stride;
                }
            } else {
                for t in 0..count {
                    let (idx, w) = out[t];
                    out[t] = (idx + half * stride, 0.5 * w);
                    out[count + t] = (idx + (half + 1) * stride, 0.5 * w);
                }
                count *= 2;
            }
            stride *= cd[a];
        }
        count
    }

    /// `fine += P·coarse` on fine unknowns.
    pub fn prolong_add(&self, coarse: &Level, ec: &[f64], ef: &mut [f64]) {
        let mut st = [(0usize, 0.0f64); 8];
        for p in 0..self.len() {
            if self.kind[p] != UNKNOWN {
                continue;
            }
            let k = self.prolong_stencil(p, &mut st, &coarse.layout);
            let mut v = 0.0;
            for &(q, w) in &st[..k] {
                v += w * ec[q];
            }
            ef[p] += v;
        }
    }

    /// `coarse = Pᵀ·fine`, zero off the coarse unknowns.
    pub fn restrict(&self, coarse: &Level, rf: &[f64], rc: &mut [f64]) {
        rc.iter_mut().for_each(|v| *v = 0.0);
        let mut st = [(0usize, 0.0f64); 8];
        for p in 0..self.len() {
            if self.kind[p] != UNKNOWN {
                continue;
            }
            let k = self.prolong_stencil(p, &mut st, &coarse.layout);
            for &(q, w) in &st[..k] {
                rc[q] += w * rf[p];
            }
        }
        for (v, k) in rc.iter_mut().zip(&coarse.kind) {
            if *k != UNKNOWN {
                *v = 0.0;
            }
        }
    }
}
