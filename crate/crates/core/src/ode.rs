//! Classical fourth-order Runge–Kutta with step-halving error control.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

/// Samples of an integrated trajectory on a uniform grid `r_k = k·step`.
#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    pub r: Vec<f64>,
    pub y: Vec<[f64; N]>,
    /// Where the stop predicate fired, if it did before `r_max`.
    pub stopped_at: Option<f64>,
    /// State at the last RK4 step taken (the one that triggered the stop).
    pub final_state: [f64; N],
    /// Substeps per output step in the accepted integration.
    pub substeps: usize,
    /// Largest pointwise difference between the last two refinements,
    /// relative to `max(|y|, 1)`.
    pub defect: f64,
}

fn rk4_step<const N: usize, F>(rhs: &F, r: f64, y: &[f64; N], h: f64) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let axpy = |a: &[f64; N], s: f64, b: &[f64; N]| -> [f64; N] { core::array::from_fn(|i| a[i] + s * b[i]) };
    let k1 = rhs(r, y);
    let k2 = rhs(r + 0.5 * h, &axpy(y, 0.5 * h, &k1));
    let k3 = rhs(r + 0.5 * h, &axpy(y, 0.5 * h, &k2));
    let k4 = rhs(r + h, &axpy(y, h, &k3));
    core::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// Fixed-step integration from `r = 0`, sampling every `step` with
/// `substeps` RK4 steps in between. Stops (keeping the last good sample)
/// as soon as `stop` returns true or the state becomes non-finite.
pub fn rk4_fixed<const N: usize, F, S>(rhs: &F, y0: [f64; N], r_max: f64, step: f64, substeps: usize, stop: &S) -> Trajectory<N>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    S: Fn(f64, &[f64; N]) -> bool,
{
    let n_out = (r_max / step).round() as usize;
    let h = step / substeps as f64;
    let mut r_out = Vec::with_capacity(n_out + 1);
    let mut y_out = Vec::with_capacity(n_out + 1);
    r_out.push(0.0);
    y_out.push(y0);
    let mut y = y0;
    let mut last = y0;
    let mut stopped_at = None;
    if stop(0.0, &y0) {
        stopped_at = Some(0.0);
    }
    'outer: for k in 0..n_out {
        if stopped_at.is_some() {
            break;
        }
        let r0 = k as f64 * step;
        for j in 0..substeps {
            let r = r0 + j as f64 * h;
            y = rk4_step(rhs, r, &y, h);
            last = y;
            if y.iter().any(|v| !v.is_finite()) || stop(r + h, &y) {
                stopped_at = Some(r + h);
                if y.iter().all(|v| v.is_finite()) && j + 1 == substeps {
                    r_out.push((k + 1) as f64 * step);
                    y_out.push(y);
                }
                break 'outer;
            }
        }
        r_out.push((k + 1) as f64 * step);
        y_out.push(y);
    }
    Trajectory { r: r_out, y: y_out, stopped_at, final_state: last, substeps, defect: 0.0 }
}

/// Integrates with `1, 2, 4, …` substeps per output step until two
/// successive refinements agree to `tol` pointwise (relative to `max(|y|, 1)`)
/// on their common samples, then returns the finer one with the Richardson
/// correction `(y_f − y_c)/15`.
/// Gives up after `max_halvings` refinements and reports the last defect.
pub fn rk4_richardson<const N: usize, F, S>(rhs: &F, y0: [f64; N], r_max: f64, step: f64, tol: f64, max_halvings: u32, stop: &S) -> Trajectory<N>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    S: Fn(f64, &[f64; N]) -> bool,
{
    let mut coarse = rk4_fixed(rhs, y0, r_max, step, 1, stop);
    let mut substeps = 1;
    for _ in 0..max_halvings {
        substeps *= 2;
        let mut fine = rk4_fixed(rhs, y0, r_max, step, substeps, stop);
        let common = coarse.y.len().min(fine.y.len());
        let mut defect: f64 = 0.0;
        for k in 0..common {
            for i in 0..N {
                defect = defect.max((fine.y[k][i] - coarse.y[k][i]).abs() / fine.y[k][i].abs().max(1.0));
            }
        }
        fine.defect = defect;
        if defect < tol {
            for k in 0..common {
                for i in 0..N {
                    fine.y[k][i] += (fine.y[k][i] - coarse.y[k][i]) / 15.0;
                }
            }
            return fine;
        }
        coarse = fine;
    }
    coarse
}
