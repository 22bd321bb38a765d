use std::fmt;
use std::sync::Arc;

use crate::error::{BqmError, Result};
use crate::linalg::{ComplexMatrix, Tolerance};

/// Closed interval of times.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

impl Interval {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        if !(start.is_finite() && end.is_finite()) || start > end {
            return Err(BqmError::contract(format!("invalid interval [{start}, {end}]")));
        }
        Ok(Interval { start, end })
    }

    pub fn length(&self) -> f64 {
        self.end - self.start
    }

    fn slack(&self) -> f64 {
        1e-12 * (1.0 + self.start.abs().max(self.end.abs()))
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start - self.slack() && t <= self.end + self.slack()
    }

    /// `t - margin` and `t + margin` both inside.
    pub fn contains_with_margin(&self, t: f64, margin: f64) -> bool {
        self.contains(t - margin) && self.contains(t + margin)
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let start = self.start.max(other.start);
        let end = self.end.min(other.end);
        (start <= end).then_some(Interval { start, end })
    }
}

/// Uniform grid `t0 = t_0 < t_1 < ... < t_steps = t1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    pub t0: f64,
    pub t1: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, steps: usize) -> Result<Self> {
        if !(t0.is_finite() && t1.is_finite()) || t0 > t1 {
            return Err(BqmError::contract(format!("time grid needs t0 <= t1 (got {t0}, {t1})")));
        }
        if steps == 0 {
            return Err(BqmError::contract("time grid needs at least one step"));
        }
        Ok(TimeGrid { t0, t1, steps })
    }

    pub fn dt(&self) -> f64 {
        (self.t1 - self.t0) / self.steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.steps {
            self.t1
        } else {
            self.t0 + (self.t1 - self.t0) * (k as f64 / self.steps as f64)
        }
    }

    /// All `steps + 1` grid points.
    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| self.time(k)).collect()
    }

    pub fn interval(&self) -> Interval {
        Interval {
            start: self.t0,
            end: self.t1,
        }
    }
}

type Evaluator = dyn Fn(f64) -> ComplexMatrix + Send + Sync;

/// Time-dependent Hermitian Hamiltonian `H(t)` on a closed domain.
#[derive(Clone)]
pub struct HamiltonianFamily {
    dim: usize,
    domain: Interval,
    evaluator: Arc<Evaluator>,
}

impl fmt::Debug for HamiltonianFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HamiltonianFamily")
            .field("dim", &self.dim)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl HamiltonianFamily {
    /// Wrap an evaluator. The evaluator is sampled at the domain ends and
    /// midpoint to check the dimension and Hermiticity.
    pub fn new(
        dim: usize,
        domain: Interval,
        evaluator: impl Fn(f64) -> ComplexMatrix + Send + Sync + 'static,
        tol: &Tolerance,
    ) -> Result<Self> {
        let family = HamiltonianFamily {
            dim,
            domain,
            evaluator: Arc::new(evaluator),
        };
        let mid = 0.5 * (domain.start + domain.end);
        family.check_hermitian(&[domain.start, mid, domain.end], tol)?;
        Ok(family)
    }

    pub fn constant(h: ComplexMatrix, domain: Interval, tol: &Tolerance) -> Result<Self> {
        let dim = h.dim();
        HamiltonianFamily::new(dim, domain, move |_| h.clone(), tol)
    }

    /// `H(t) = 0`.
    pub fn zero(dim: usize, domain: Interval) -> Self {
        HamiltonianFamily {
            dim,
            domain,
            evaluator: Arc::new(move |_| ComplexMatrix::zeros(dim)),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn at(&self, t: f64) -> ComplexMatrix {
        (self.evaluator)(t)
    }

    /// Same evaluator on a different domain.
    pub fn with_domain(&self, domain: Interval) -> Self {
        HamiltonianFamily {
            domain,
            ..self.clone()
        }
    }

    pub fn check_hermitian(&self, samples: &[f64], tol: &Tolerance) -> Result<()> {
        for &t in samples {
            let h = self.at(t);
            if h.dim() != self.dim {
                return Err(BqmError::Shape {
                    expected: self.dim,
                    found: h.dim(),
                });
            }
            if !h.is_finite() {
                return Err(BqmError::contract(format!("H({t}) has non-finite entries")));
            }
            if !h.is_hermitian(tol) {
                return Err(BqmError::contract(format!(
                    "H({t}) is not Hermitian (residual {:e})",
                    h.hermiticity_residual()
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn require_in_domain(&self, t: f64, what: &str) -> Result<()> {
        if !self.domain.contains(t) {
            return Err(BqmError::contract(format!(
                "{what} t = {t} lies outside the Hamiltonian domain [{}, {}]",
                self.domain.start, self.domain.end
            )));
        }
        Ok(())
    }
}
