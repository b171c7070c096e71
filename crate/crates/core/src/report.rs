//! Verdicts and sampled comparison reports shared by the radial and ODE checks.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;

/// Direction of a checked inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// computed ≥ bound
    Lower,
    /// computed ≤ bound
    Upper,
}

impl Direction {
    /// Signed slack: positive when the inequality holds with room to spare.
    pub fn slack(self, computed: f64, bound: f64) -> f64 {
        match self {
            Direction::Lower => computed - bound,
            Direction::Upper => bound - computed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Verdict {
    Holds,
    Equality,
    Fails,
    Inapplicable,
}

impl Verdict {
    /// Pure decision table. Equality wins when every slack is within
    /// `tolerance`; otherwise the inequality holds iff the worst slack does.
    pub fn from_slack(worst_slack: f64, max_abs_slack: f64, tolerance: f64) -> Verdict {
        if !(worst_slack.is_finite() && max_abs_slack.is_finite()) {
            Verdict::Fails
        } else if max_abs_slack <= tolerance {
            Verdict::Equality
        } else if worst_slack >= -tolerance {
            Verdict::Holds
        } else {
            Verdict::Fails
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Equality => "equality",
            Verdict::Fails => "fails",
            Verdict::Inapplicable => "inapplicable",
        }
    }

    pub fn parse(s: &str) -> Option<Verdict> {
        Some(match s {
            "holds" => Verdict::Holds,
            "equality" => Verdict::Equality,
            "fails" => Verdict::Fails,
            "inapplicable" => Verdict::Inapplicable,
            _ => return None,
        })
    }

    /// Holds and equality both count as a satisfied inequality.
    pub fn is_pass(self) -> bool {
        matches!(self, Verdict::Holds | Verdict::Equality)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One inequality check over a sampled variable `r`.
///
/// A scalar check (capacity against a bound) is a single sample.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub direction: Direction,
    /// `(r, bound(r))`
    pub bound_curve: Vec<(f64, f64)>,
    /// `(r, computed(r))`, same abscissae as `bound_curve`
    pub computed_curve: Vec<(f64, f64)>,
    pub worst_slack: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub context: String,
}

impl ComparisonReport {
    pub fn from_curves(
        context: impl Into<String>,
        direction: Direction,
        bound_curve: Vec<(f64, f64)>,
        computed_curve: Vec<(f64, f64)>,
        tolerance: f64,
    ) -> ComparisonReport {
        let mut worst = f64::INFINITY;
        let mut max_abs: f64 = 0.0;
        for ((_, b), (_, c)) in bound_curve.iter().zip(&computed_curve) {
            let s = direction.slack(*c, *b);
            worst = worst.min(s);
            max_abs = max_abs.max(s.abs());
        }
        if bound_curve.is_empty() {
            worst = f64::NAN;
        }
        let verdict = Verdict::from_slack(worst, max_abs, tolerance);
        ComparisonReport { direction, bound_curve, computed_curve, worst_slack: worst, tolerance, verdict, context: context.into() }
    }

    pub fn scalar(context: impl Into<String>, direction: Direction, computed: f64, bound: f64, tolerance: f64) -> ComparisonReport {
        Self::from_curves(context, direction, alloc::vec![(0.0, bound)], alloc::vec![(0.0, computed)], tolerance)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn scalar_lower_bound() {
        let r = ComparisonReport::scalar("x", Direction::Lower, 40.14, 22.79, 1e-8);
        assert_eq!(r.verdict, Verdict::Holds);
        assert!(r.worst_slack > 17.0);
        let r = ComparisonReport::scalar("x", Direction::Upper, 40.14, 22.79, 1e-8);
        assert_eq!(r.verdict, Verdict::Fails);
    }

    proptest! {
        #[test]
        fn verdict_table_is_consistent(slack in -10.0f64..10.0, tol in 0.0f64..1.0) {
            let v = Verdict::from_slack(slack, slack.abs(), tol);
            match v {
                Verdict::Equality => prop_assert!(slack.abs() <= tol),
                Verdict::Holds => prop_assert!(slack > tol),
                Verdict::Fails => prop_assert!(slack < -tol),
                Verdict::Inapplicable => prop_assert!(false),
            }
        }
    }
}
