//! Adaptive Simpson quadrature, finite and improper.

#[allow(unused_imports)]
use num_traits::Float;

/// Tolerances for [`adaptive_simpson`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_depth: u32,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs: 1e-12, rel: 1e-10, max_depth: 48 }
    }
}

/// Outcome of a quadrature: value plus an error estimate accumulated from
/// the Richardson defects of the accepted panels.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

/// Interval-halving Simpson integration of `f` over `[a, b]`.
///
/// A panel is accepted when `|S₂ − S₁| ≤ 15·ε` with ε the panel's share of
/// `max(abs, rel·|I|)`. `I` is first estimated on a 16-panel composite rule.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Quadrature {
    if a == b {
        return Quadrature { value: 0.0, error: 0.0, evaluations: 0 };
    }
    // Coarse estimate fixes the absolute target.
    const SEED: usize = 16;
    let step = (b - a) / SEED as f64;
    let mut evals = 0;
    let mut panels = alloc::vec::Vec::with_capacity(SEED);
    let mut coarse = 0.0;
    let mut left = f(a);
    evals += 1;
    for i in 0..SEED {
        let pa = a + step * i as f64;
        let pb = if i + 1 == SEED { b } else { a + step * (i + 1) as f64 };
        let fm = f(0.5 * (pa + pb));
        let fb = f(pb);
        evals += 2;
        let whole = simpson(pa, pb, left, fm, fb);
        coarse += whole;
        panels.push(Panel { a: pa, b: pb, fa: left, fm, fb, whole });
        left = fb;
    }
    let target = tol.abs.max(tol.rel * coarse.abs());
    let mut value = 0.0;
    let mut error = 0.0;
    for p in panels {
        let eps = target * (p.b - p.a) / (b - a);
        let (v, e) = refine(&f, p, eps, tol.max_depth, &mut evals);
        value += v;
        error += e;
    }
    Quadrature { value, error, evaluations: evals }
}

fn refine<F: Fn(f64) -> f64>(f: &F, p: Panel, eps: f64, depth: u32, evals: &mut usize) -> (f64, f64) {
    let m = 0.5 * (p.a + p.b);
    let lm = 0.5 * (p.a + m);
    let rm = 0.5 * (m + p.b);
    let flm = f(lm);
    let frm = f(rm);
    *evals += 2;
    let left = simpson(p.a, m, p.fa, flm, p.fm);
    let right = simpson(m, p.b, p.fm, frm, p.fb);
    let delta = left + right - p.whole;
    if delta.abs() <= 15.0 * eps || depth == 0 || !delta.is_finite() {
        return (left + right + delta / 15.0, delta.abs() / 15.0);
    }
    let (lv, le) = refine(f, Panel { a: p.a, b: m, fa: p.fa, fm: flm, fb: p.fm, whole: left }, 0.5 * eps, depth - 1, evals);
    let (rv, re) = refine(f, Panel { a: m, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: right }, 0.5 * eps, depth - 1, evals);
    (lv + rv, le + re)
}

/// ∫_{t0}^{∞} f via the substitution `s = t0 / (1 − x)`, `x ∈ [0, 1)`.
///
/// Requires `t0 > 0`; the integrand is evaluated on `[0, 1 − 1e−12]` and
/// any non-finite value of the transformed integrand is treated as zero
/// (it arises only where `f` has underflowed).
pub fn improper_simpson<F: Fn(f64) -> f64>(f: F, t0: f64, tol: Tolerance) -> Quadrature {
    debug_assert!(t0 > 0.0);
    let transformed = |x: f64| {
        let one_minus = 1.0 - x;
        let s = t0 / one_minus;
        let v = f(s) * t0 / (one_minus * one_minus);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    adaptive_simpson(transformed, 0.0, 1.0 - 1e-12, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let q = adaptive_simpson(|x| x * x * x - 2.0 * x, 0.0, 2.0, Tolerance::default());
        assert!((q.value - 0.0).abs() < 1e-13);
    }

    #[test]
    fn smooth_integrand() {
        let q = adaptive_simpson(|x: f64| x.sin(), 0.0, PI, Tolerance::default());
        assert!((q.value - 2.0).abs() < 1e-10);
    }

    #[test]
    fn improper_power_tail() {
        // ∫₁^∞ s⁻² ds = 1
        let q = improper_simpson(|s| 1.0 / (s * s), 1.0, Tolerance::default());
        assert!((q.value - 1.0).abs() < 1e-10, "{}", q.value);
        // ∫₂^∞ s⁻³ ds = 1/8
        let q = improper_simpson(|s| s.powi(-3), 2.0, Tolerance::default());
        assert!((q.value - 0.125).abs() < 1e-11, "{}", q.value);
    }

    #[test]
    fn improper_exponential_tail() {
        // ∫₁^∞ csch² = coth 1 − 1
        let q = improper_simpson(|s: f64| s.sinh().powi(-2), 1.0, Tolerance::default());
        let exact = 1.0 / 1.0f64.tanh() - 1.0;
        assert!((q.value - exact).abs() < 1e-10 * exact, "{} vs {}", q.value, exact);
    }
}
