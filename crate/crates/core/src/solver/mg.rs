//! Geometric multigrid V-cycle used as a CG preconditioner.
//!
//! Coarse levels are rediscretised on the same body. Restriction is the
//! transpose of multilinear prolongation, smoothing is forward Gauss–Seidel
//! before and backward after the coarse correction, and the coarsest level
//! is solved exactly by banded Cholesky, so the preconditioner is symmetric.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::grid::{Layout, Level, UNKNOWN};
use crate::{Error, Result};

const SMOOTHING: usize = 2;

/// Banded Cholesky factor of a level operator (Dirichlet rows are identity).
struct BandCholesky {
    n: usize,
    bw: usize,
    // row-major band: l[i*(bw+1) + (i - j)] for j in [i-bw, i]
    l: Vec<f64>,
}

impl BandCholesky {
    fn factor(level: &Level) -> Result<Self> {
        let n = level.len();
        let d = level.layout.dims();
        let bw = if level.layout.is_axisymmetric() { d[0] } else { d[0] * d[1] };
        let w = bw + 1;
        let mut a = alloc::vec![0.0; n * w];
        // assemble the lower band from unit responses of the stencil
        let mut e = alloc::vec![0.0; n];
        let mut col = alloc::vec![0.0; n];
        for j in 0..n {
            if level.kind[j] != UNKNOWN {
                a[j * w] = 1.0;
                continue;
            }
            e[j] = 1.0;
            level.apply(&e, &mut col);
            e[j] = 0.0;
            let hi = (j + bw).min(n - 1);
            for i in j..=hi {
                if col[i] != 0.0 {
                    a[i * w + (i - j)] = col[i];
                }
            }
        }
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let mut s = a[i * w + (i - j)];
                let klo = lo.max(j.saturating_sub(bw));
                for k in klo..j {
                    s -= a[i * w + (i - k)] * a[j * w + (j - k)];
                }
                if i == j {
                    if !(s > 0.0) {
                        return Err(Error::NoConvergence { what: "coarse factorisation", budget: 0 });
                    }
                    a[i * w] = s.sqrt();
                } else {
                    a[i * w + (i - j)] = s / a[j * w];
                }
            }
        }
        Ok(BandCholesky { n, bw, l: a })
    }

    fn solve(&self, x: &mut [f64]) {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        for i in 0..n {
            let mut s = x[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.l[i * w + (i - k)] * x[k];
            }
            x[i] = s / self.l[i * w];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..=(i + bw).min(n - 1) {
                s -= self.l[k * w + (k - i)] * x[k];
            }
            x[i] = s / self.l[i * w];
        }
    }
}

/// Largest coarsest-grid half-width `m` for the banded direct solve.
fn coarse_limit(axisymmetric: bool) -> usize {
    if axisymmetric {
        32
    } else {
        8
    }
}

/// Number of coarsenings `k` and padded half-width `m = q·2^k ≥ m_min`
/// minimising `m` subject to `q ≤` the coarse limit.
pub(crate) fn plan_levels(m_min: usize, axisymmetric: bool) -> (usize, usize) {
    let limit = coarse_limit(axisymmetric);
    let mut best = (0usize, usize::MAX);
    for k in 0..30 {
        let q = m_min.div_ceil(1 << k);
        if q <= limit && q >= 2 {
            let m = q << k;
            if m < best.1 {
                best = (k, m);
            }
        }
        if q < 2 {
            break;
        }
    }
    if best.1 == usize::MAX {
        best = (0, m_min.max(2));
    }
    best
}

pub(crate) struct Hierarchy {
    pub levels: Vec<Level>,
    coarse: BandCholesky,
    work: Vec<[Vec<f64>; 3]>,
}

impl Hierarchy {
    pub fn new(levels: Vec<Level>) -> Result<Self> {
        let coarse = BandCholesky::factor(levels.last().expect("at least one level"))?;
        let work = levels.iter().map(|l| [alloc::vec![0.0; l.len()], alloc::vec![0.0; l.len()], alloc::vec![0.0; l.len()]]).collect();
        Ok(Hierarchy { levels, coarse, work })
    }

    /// `z = M⁻¹ r` by one V-cycle from level 0.
    pub fn precondition(&mut self, r: &[f64], z: &mut [f64]) {
        self.work[0][0].copy_from_slice(r);
        self.vcycle(0);
        z.copy_from_slice(&self.work[0][1]);
    }

    // work[l] = [rhs, solution, scratch]
    fn vcycle(&mut self, l: usize) {
        let last = self.levels.len() - 1;
        if l == last {
            let [b, x, _] = &mut self.work[l];
            x.copy_from_slice(b);
            self.coarse.solve(x);
            for (v, k) in x.iter_mut().zip(&self.levels[l].kind) {
                if *k != UNKNOWN {
                    *v = 0.0;
                }
            }
            return;
        }
        {
            let lv = &self.levels[l];
            let [b, x, t] = &mut self.work[l];
            x.iter_mut().for_each(|v| *v = 0.0);
            for _ in 0..SMOOTHING {
                lv.gauss_seidel(x, b, true);
            }
            lv.apply(x, t);
            for p in 0..t.len() {
                t[p] = b[p] - t[p];
            }
        }
        {
            let (fine, coarse) = self.work.split_at_mut(l + 1);
            self.levels[l].restrict(&self.levels[l + 1], &fine[l][2], &mut coarse[0][0]);
        }
        self.vcycle(l + 1);
        {
            let (fine, coarse) = self.work.split_at_mut(l + 1);
            self.levels[l].prolong_add(&self.levels[l + 1], &coarse[0][1], &mut fine[l][1]);
        }
        let lv = &self.levels[l];
        let [b, x, _] = &mut self.work[l];
        for _ in 0..SMOOTHING {
            lv.gauss_seidel(x, b, false);
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Outcome of a preconditioned CG solve.
pub(crate) struct PcgResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Solves `A x = b` on level 0 to `‖b − A x‖ ≤ tol·‖b‖`.
pub(crate) fn pcg(h: &mut Hierarchy, tol: f64, budget: usize) -> Result<PcgResult> {
    let lv0 = &h.levels[0];
    let n = lv0.len();
    let b = lv0.rhs.clone();
    let bnorm = dot(&b, &b).sqrt();
    let mut x = alloc::vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(PcgResult { x, iterations: 0, relative_residual: 0.0 });
    }
    let mut r = b;
    let mut z = alloc::vec![0.0; n];
    let mut q = alloc::vec![0.0; n];
    h.precondition(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for it in 1..=budget {
        h.levels[0].apply(&p, &mut q);
        let alpha = rz / dot(&p, &q);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        let rel = dot(&r, &r).sqrt() / bnorm;
        if rel <= tol {
            // confirm with the true residual
            h.levels[0].apply(&x, &mut q);
            let rhs = &h.levels[0].rhs;
            let true_rel = rhs.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() / bnorm;
            if true_rel <= tol {
                return Ok(PcgResult { x, iterations: it, relative_residual: true_rel });
            }
            for i in 0..n {
                r[i] = rhs[i] - q[i];
            }
        }
        h.precondition(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NoConvergence { what: "preconditioned CG", budget })
}

/// Levels from `layout` down `k` coarsenings.
pub(crate) fn coarse_layouts(layout: &Layout, k: usize) -> Vec<Layout> {
    let mut out = alloc::vec![layout.clone()];
    for _ in 0..k {
        let next = out.last().unwrap().coarsened();
        out.push(next);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_plan_pads_minimally() {
        let (k, m) = plan_levels(101, false);
        assert!(m >= 101 && m % (1 << k) == 0 && m / (1 << k) <= 8);
        assert_eq!(m, 112);
        let (k, m) = plan_levels(401, true);
        assert!(m >= 401 && m / (1 << k) <= 32);
    }
}
