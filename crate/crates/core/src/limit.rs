use std::fmt;

/// A value that may legitimately diverge (perfect bunching, zero
/// transmission, a dispersion pole). Divergences are reported explicitly
/// instead of as huge floats or NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Limit<T = f64> {
    Finite(T),
    Divergent,
}

impl<T: Copy> Limit<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            Limit::Finite(v) => Some(v),
            Limit::Divergent => None,
        }
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self, Limit::Divergent)
    }

    /// Unwraps a finite value; panics on divergence.
    pub fn expect_finite(self, msg: &str) -> T {
        self.finite().expect(msg)
    }
}

impl Limit<f64> {
    /// The value with divergence mapped to +∞.
    pub fn value(self) -> f64 {
        match self {
            Limit::Finite(v) => v,
            Limit::Divergent => f64::INFINITY,
        }
    }
}

impl<T: fmt::Display> fmt::Display for Limit<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Limit::Finite(v) => v.fmt(f),
            Limit::Divergent => f.write_str("inf"),
        }
    }
}
