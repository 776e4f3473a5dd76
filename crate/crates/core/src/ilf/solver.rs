//! Bracketing bisection for `Q(V, x) = 0`.
//!
//! Each step either doubles the upper end (root above the bracket), halves the lower end
//! down to `v_min` (root below the bracket), or bisects. The upper end `b` is reported, so
//! `Q(V, x) ≤ 0` always holds for the returned value.

use super::candidate::IlfCandidate;
use crate::error::{domain, Result};
use crate::Vector;

pub const DEFAULT_PRECISION: f64 = 1e-12;
const MAX_ITERATIONS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IlfSolution {
    pub v: f64,
    /// Lower end of the final bracket.
    pub lower: f64,
    /// The root lies below `v_min`; `v == v_min`.
    pub clamped: bool,
    pub iterations: usize,
}

/// A solver bound to one candidate that remembers its last root for warm starts.
/// Keep one per trajectory.
#[derive(Debug, Clone)]
pub struct IlfSolver {
    candidate: IlfCandidate,
    v_min: f64,
    precision: f64,
    last: Option<f64>,
}

impl IlfSolver {
    /// `precision` is relative: the final bracket satisfies `b − a ≤ precision · b`.
    pub fn new(candidate: IlfCandidate, v_min: f64, precision: f64) -> Result<Self> {
        if !(v_min > 0.0) || !(precision > 0.0) {
            return Err(domain("v_min and precision must be positive"));
        }
        Ok(Self { candidate, v_min, precision, last: None })
    }

    pub fn with_defaults(candidate: IlfCandidate) -> Self {
        let v_min = candidate.default_v_min();
        Self { candidate, v_min, precision: DEFAULT_PRECISION, last: None }
    }

    pub fn candidate(&self) -> &IlfCandidate {
        &self.candidate
    }

    pub fn v_min(&self) -> f64 {
        self.v_min
    }

    pub fn precision(&self) -> f64 {
        self.precision
    }

    pub fn reset(&mut self) {
        self.last = None;
    }

    /// Solves from the previous root when there is one, else from `[v_min, 1]`.
    pub fn solve(&mut self, x: &Vector) -> Result<IlfSolution> {
        let (a, b) = match self.last {
            Some(prev) => ((0.5 * prev).max(self.v_min), prev.max(self.v_min)),
            None => (self.v_min, 1f64.max(self.v_min)),
        };
        let sol = bisect(&self.candidate, x, self.v_min, self.precision, a, b)?;
        self.last = Some(sol.v);
        Ok(sol)
    }
}

/// Cold-start solve.
pub fn solve_ilf_bisection(
    candidate: &IlfCandidate,
    x: &Vector,
    v_min: f64,
    precision: f64,
) -> Result<IlfSolution> {
    if !(v_min > 0.0) || !(precision > 0.0) {
        return Err(domain("v_min and precision must be positive"));
    }
    bisect(candidate, x, v_min, precision, v_min, 1f64.max(v_min))
}

fn bisect(
    c: &IlfCandidate,
    x: &Vector,
    v_min: f64,
    precision: f64,
    mut a: f64,
    mut b: f64,
) -> Result<IlfSolution> {
    if x.iter().all(|xi| *xi == 0.0) {
        return Err(domain("ILF value is undefined at x = 0"));
    }
    if x.iter().any(|xi| !xi.is_finite()) {
        return Err(domain("state is not finite"));
    }
    let q = |v: f64| c.q_eval(v, x);
    for iterations in 1..=MAX_ITERATIONS {
        let qb = q(b)?;
        if qb > 0.0 {
            a = b;
            b *= 2.0;
            continue;
        }
        let qa = q(a)?;
        if qa < 0.0 {
            if a <= v_min {
                return Ok(IlfSolution { v: v_min, lower: v_min, clamped: true, iterations });
            }
            b = a;
            a = (0.5 * a).max(v_min);
            continue;
        }
        if b - a <= precision * b {
            return Ok(IlfSolution { v: b, lower: a, clamped: false, iterations });
        }
        let mid = 0.5 * (a + b);
        if q(mid)? < 0.0 {
            b = mid;
        } else {
            a = mid.max(v_min);
        }
    }
    Err(domain(format!("bisection did not converge in {MAX_ITERATIONS} steps")))
}
