//! Randomised numerical equivalence of expressions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Assignment, EvalError, Expr, Var};

pub const DEFAULT_SAMPLES: usize = 50;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_SEED: u64 = 0x5EED;

/// Box from which sample points are drawn.
///
/// When `w` is set, `y` is not drawn from its own range; instead
/// `W = x*p - y` is drawn from `w` and `y = x*p - W`, which keeps `W`
/// away from zero.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleDomain {
    pub ranges: [(f64, f64); 6],
    pub w: Option<(f64, f64)>,
}

impl Default for SampleDomain {
    fn default() -> Self {
        Self {
            ranges: [
                (-1.0, 1.0),
                (-1.0, 1.0),
                (-1.0, 1.0),
                (0.5, 2.0),
                (0.5, 2.0),
                (-1.0, 1.0),
            ],
            w: None,
        }
    }
}

impl SampleDomain {
    /// Domain for equations whose coefficients involve `x*p - y`.
    pub fn with_w() -> Self {
        let mut d = Self::default();
        d.ranges[Var::X.index()] = (0.5, 2.0);
        d.w = Some((0.5, 2.0));
        d
    }

    pub fn range(&self, v: Var) -> (f64, f64) {
        self.ranges[v.index()]
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Assignment {
        let mut pt = [0.0; 6];
        for v in Var::ALL {
            let (lo, hi) = self.range(v);
            pt[v.index()] = rng.gen_range(lo..=hi);
        }
        if let Some((lo, hi)) = self.w {
            let w = rng.gen_range(lo..=hi);
            pt[Var::Y.index()] = pt[Var::X.index()] * pt[Var::P.index()] - w;
        }
        Assignment::from_point(pt)
    }

    /// `n` reproducible points.
    pub fn points(&self, n: usize, seed: u64) -> Vec<Assignment> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| self.sample(&mut rng)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivOutcome {
    pub passed: bool,
    /// Largest scaled residual `|a-b| / (1 + max(|a|,|b|))`.
    pub max_residual: f64,
    pub samples: usize,
    pub worst: Option<Assignment>,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("evaluation failed at sample {index}: {source}")]
pub struct EquivError {
    pub index: usize,
    #[source]
    pub source: EvalError,
}

/// Scaled residual between two values.
pub fn scaled_residual(a: f64, b: f64) -> f64 {
    let r = (a - b).abs() / (1.0 + a.abs().max(b.abs()));
    if r.is_nan() {
        f64::INFINITY
    } else {
        r
    }
}

/// Compare `a` and `b` at `n` seeded points of `domain`.
pub fn equiv(
    a: &Expr,
    b: &Expr,
    domain: &SampleDomain,
    n: usize,
    tol: f64,
    seed: u64,
) -> Result<EquivOutcome, EquivError> {
    let mut max = 0.0f64;
    let mut worst = None;
    for (index, pt) in domain.points(n, seed).into_iter().enumerate() {
        let va = a.eval(&pt).map_err(|source| EquivError { index, source })?;
        let vb = b.eval(&pt).map_err(|source| EquivError { index, source })?;
        let r = scaled_residual(va, vb);
        if r > max || worst.is_none() {
            max = max.max(r);
            worst = Some(pt);
        }
    }
    Ok(EquivOutcome {
        passed: max <= tol,
        max_residual: max,
        samples: n,
        worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ex;

    #[test]
    fn detects_equal_and_unequal() {
        let d = SampleDomain::default();
        let same = equiv(&ex("(q+r)^2"), &ex("q^2 + 2*q*r + r^2"), &d, 50, 1e-12, 1).unwrap();
        assert!(same.passed);
        let diff = equiv(&ex("(q+r)^2"), &ex("q^2 + r^2"), &d, 50, 1e-9, 1).unwrap();
        assert!(!diff.passed);
    }

    #[test]
    fn w_domain_keeps_w_positive() {
        let d = SampleDomain::with_w();
        for pt in d.points(200, 3) {
            let w = pt.get(Var::X).unwrap() * pt.get(Var::P).unwrap() - pt.get(Var::Y).unwrap();
            assert!((0.5 - 1e-12..=2.0 + 1e-12).contains(&w));
        }
    }
}
