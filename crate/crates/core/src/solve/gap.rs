use std::time::Duration;

/// Denominator used by [`relative_gap`] when either argument is zero.
pub const GAP_EPSILON: f64 = 1e-10;

/// Relative difference `d(a, b)` between a bound and an objective value.
///
/// Infinite when either argument is infinite, `|a - b| / max(|a|, |b|)` when both are
/// nonzero, and `|a - b| / GAP_EPSILON` otherwise.
pub fn relative_gap(a: f64, b: f64) -> f64 {
    if a.is_infinite() || b.is_infinite() || a.is_nan() || b.is_nan() {
        return f64::INFINITY;
    }
    let diff = (a - b).abs();
    if a != 0.0 && b != 0.0 {
        diff / a.abs().max(b.abs())
    } else {
        diff / GAP_EPSILON
    }
}

/// Termination criteria shared by the MIP and spatial branch and bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub time_limit: Duration,
    pub node_limit: usize,
}

impl Default for GapSpec {
    fn default() -> Self {
        GapSpec { rel_tol: 1e-6, abs_tol: 1e-8, time_limit: Duration::from_secs(600), node_limit: usize::MAX }
    }
}

impl GapSpec {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_time_limit(mut self, limit: Duration) -> Self {
        self.time_limit = limit;
        self
    }

    pub fn with_node_limit(mut self, limit: usize) -> Self {
        self.node_limit = limit;
        self
    }

    /// Whether `lower` and `upper` are close enough to stop.
    pub fn closed(&self, lower: f64, upper: f64) -> bool {
        upper.is_finite() && (upper - lower <= self.abs_tol || relative_gap(lower, upper) <= self.rel_tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_examples() {
        assert_eq!(relative_gap(-400.0, -400.0), 0.0);
        assert!((relative_gap(100.0, 99.0) - 0.01).abs() < 1e-15);
        assert_eq!(relative_gap(f64::NEG_INFINITY, -400.0), f64::INFINITY);
        assert_eq!(relative_gap(0.0, 1e-12), 1e-12 / GAP_EPSILON);
    }

    #[test]
    fn gap_spec_closure() {
        let spec = GapSpec::default().with_rel_tol(0.01);
        assert!(spec.closed(-400.0, -397.0));
        assert!(!spec.closed(-400.0, -390.0));
        assert!(!spec.closed(-400.0, f64::INFINITY));
    }
}
