//! Metric on the five-dimensional moduli space of a fifth-order ODE.
//!
//! Two independent constructions are provided: from the null frame with
//! the pairing `2 e¹⊙e⁵ − 8 e²⊙e⁴ + 6 e³⊙e³`, and from the chain of
//! pairings `h^(ab) = g(dX^a, dX^b)` obtained by repeatedly applying `D`
//! to `g(dȳ, dȳ) = 0`.

mod connection;
mod curvature;

pub use connection::{frame_law_residual, ConnectionForms, DerivedConnection};
pub use curvature::{CurvatureAtPoint, GeomError, N};

use crate::expr::{equiv, Assignment, EquivError, EquivOutcome, EvalError, Expr, SampleDomain, Var};
use crate::jet::JetOde;
use crate::pentad::PentadData;

/// Pairing of the frame: `C[i][j] = g(E_i, E_j)`.
pub fn frame_pairing() -> [[i64; N]; N] {
    let mut c = [[0; N]; N];
    c[0][4] = 1;
    c[4][0] = 1;
    c[1][3] = -4;
    c[3][1] = -4;
    c[2][2] = 6;
    c
}

/// Inverse pairing `g(e^i, e^j)` as exact fractions `(num, den)`.
pub fn frame_pairing_inverse() -> [[(i64, i64); N]; N] {
    let mut c = [[(0, 1); N]; N];
    c[0][4] = (1, 1);
    c[4][0] = (1, 1);
    c[1][3] = (-1, 4);
    c[3][1] = (-1, 4);
    c[2][2] = (1, 6);
    c
}

/// Covariant and contravariant metric with symbolic first and second
/// derivatives of the covariant one.
#[derive(Clone, Debug)]
pub struct MetricField {
    pub coords: Vec<Var>,
    pub lower: Vec<Vec<Expr>>,
    pub upper: Vec<Vec<Expr>>,
    /// `d1[c][a][b] = ∂_c g_ab`.
    pub d1: Vec<Vec<Vec<Expr>>>,
    /// `d2[c][d][a][b] = ∂_c ∂_d g_ab`.
    pub d2: Vec<Vec<Vec<Vec<Expr>>>>,
}

impl MetricField {
    pub fn new(coords: Vec<Var>, lower: Vec<Vec<Expr>>, upper: Vec<Vec<Expr>>) -> Self {
        let n = coords.len();
        let d1: Vec<Vec<Vec<Expr>>> = coords
            .iter()
            .map(|&v| {
                (0..n)
                    .map(|a| (0..n).map(|b| lower[a][b].diff(v).simplified()).collect())
                    .collect()
            })
            .collect();
        let d2 = (0..n)
            .map(|c| {
                coords
                    .iter()
                    .map(|&v| (0..n).map(|a| (0..n).map(|b| d1[c][a][b].diff(v)).collect()).collect())
                    .collect()
            })
            .collect();
        Self {
            coords,
            lower,
            upper,
            d1,
            d2,
        }
    }

    /// `g = Kᵀ C K` and `g⁻¹ = M C⁻¹ Mᵀ` from the frame of an order 5 equation.
    pub fn from_frame(pd: &PentadData) -> Self {
        assert_eq!(pd.order, 5, "the metric needs a fifth-order frame");
        let c = frame_pairing();
        let ci = frame_pairing_inverse();
        let k = &pd.coframe;
        let m = &pd.rows;
        let mut lower = vec![vec![Expr::zero(); N]; N];
        let mut upper = vec![vec![Expr::zero(); N]; N];
        for a in 0..N {
            for b in a..N {
                let mut lo = Vec::new();
                let mut up = Vec::new();
                for i in 0..N {
                    for j in 0..N {
                        if c[i][j] != 0 {
                            lo.push(Expr::integer(c[i][j]) * &k[i][a] * &k[j][b]);
                        }
                        let (num, den) = ci[i][j];
                        if num != 0 {
                            up.push(Expr::rational(num, den) * &m[a][i] * &m[b][j]);
                        }
                    }
                }
                let lo = Expr::sum(lo).simplified();
                let up = Expr::sum(up).simplified();
                lower[a][b] = lo.clone();
                lower[b][a] = lo;
                upper[a][b] = up.clone();
                upper[b][a] = up;
            }
        }
        Self::new(vec![Var::Y, Var::P, Var::Q, Var::R, Var::S], lower, upper)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn eval_matrix(m: &[Vec<Expr>], pt: &Assignment) -> Result<[[f64; N]; N], EvalError> {
        let mut out = [[0.0; N]; N];
        for a in 0..N {
            for b in 0..N {
                out[a][b] = m[a][b].eval(pt)?;
            }
        }
        Ok(out)
    }

    pub fn lower_at(&self, pt: &Assignment) -> Result<[[f64; N]; N], EvalError> {
        Self::eval_matrix(&self.lower, pt)
    }

    pub fn upper_at(&self, pt: &Assignment) -> Result<[[f64; N]; N], EvalError> {
        Self::eval_matrix(&self.upper, pt)
    }

    /// Worst entry of `g_lower · g_upper − I`.
    pub fn inverse_check(
        &self,
        domain: &SampleDomain,
        n: usize,
        tol: f64,
        seed: u64,
    ) -> Result<EquivOutcome, EquivError> {
        let mut worst: Option<EquivOutcome> = None;
        for a in 0..N {
            for b in 0..N {
                let e = Expr::sum((0..N).map(|c| &self.lower[a][c] * &self.upper[c][b]));
                let want = if a == b { Expr::one() } else { Expr::zero() };
                let o = equiv(&e, &want, domain, n, tol, seed)?;
                if worst.as_ref().is_none_or(|w| o.max_residual > w.max_residual) {
                    worst = Some(o);
                }
            }
        }
        Ok(worst.unwrap())
    }

    /// Symbolic Christoffel symbol `Γ^c_ab`.
    pub fn christoffel(&self, c: usize, a: usize, b: usize) -> Expr {
        let terms = (0..N).filter(|&d| !self.upper[c][d].is_zero()).map(|d| {
            let s = &self.d1[a][d][b] + &self.d1[b][d][a] - &self.d1[d][a][b];
            &self.upper[c][d] * s
        });
        (Expr::rational(1, 2) * Expr::sum(terms.collect::<Vec<_>>())).simplified()
    }

    /// Lie derivative of `g_ab` along the prolongation plus `∂_x g_ab`,
    /// one expression per `a ≤ b`.
    pub fn killing_residuals(&self, ode: &JetOde) -> Vec<((usize, usize), Expr)> {
        let v = ode.prolongation();
        let mut out = Vec::new();
        for a in 0..N {
            for b in a..N {
                let mut t = vec![ode.total_derivative(&self.lower[a][b])];
                for c in 0..N {
                    t.push(&self.lower[c][b] * v[c].diff(self.coords[a]));
                    t.push(&self.lower[a][c] * v[c].diff(self.coords[b]));
                }
                out.push(((a, b), Expr::sum(t).simplified()));
            }
        }
        out
    }
}

/// Contravariant metric from the pairing chain together with the relations
/// that were not used to build it.
#[derive(Clone, Debug)]
pub struct PairingChain {
    pub upper: Vec<Vec<Expr>>,
    /// `(label, lhs, rhs)` that must agree identically.
    pub consistency: Vec<(String, Expr, Expr)>,
}

/// Build `h^(ab) = g(dX^a, dX^b)` from `h^(ab) = 0` for `a + b < 4`,
/// `h^(04) = 24 P⁴` and `D h^(ab) = h^(a+1,b) + h^(a,b+1)`, where
/// `h^(a5) = Σ_c (∂Λ/∂X^c) h^(ac)`.
pub fn pairing_chain(ode: &JetOde, p: &Expr) -> PairingChain {
    assert_eq!(ode.order, 5, "the pairing chain is set up for fifth-order equations");
    let grad = ode.rhs_gradient();
    let mut h: Vec<Vec<Option<Expr>>> = vec![vec![None; N]; N];
    let set = |h: &mut Vec<Vec<Option<Expr>>>, a: usize, b: usize, e: Expr| {
        h[a][b] = Some(e.clone());
        h[b][a] = Some(e);
    };
    for a in 0..N {
        for b in 0..N {
            if a + b < 4 {
                h[a][b] = Some(Expr::zero());
            }
        }
    }
    set(&mut h, 0, 4, (Expr::integer(24) * p.powi(4)).simplified());
    let overflow = |h: &Vec<Vec<Option<Expr>>>, a: usize| {
        Expr::sum((0..N).map(|c| &grad[c] * h[a][c].as_ref().unwrap())).simplified()
    };
    for level in 4..=8usize {
        let first = level.saturating_sub(4);
        for a in first..=level / 2 {
            let b = level - a;
            if a == 0 {
                continue;
            }
            if h[a][b].is_some() {
                continue;
            }
            let prev = h[a - 1][b].clone().unwrap();
            let right = if b + 1 < N {
                h[a - 1][b + 1].clone().unwrap()
            } else {
                overflow(&h, a - 1)
            };
            let e = (ode.total_derivative(&prev) - right).simplified();
            set(&mut h, a, b, e);
        }
    }
    let upper: Vec<Vec<Expr>> = h
        .into_iter()
        .map(|row| row.into_iter().map(Option::unwrap).collect())
        .collect();
    let mut consistency = Vec::new();
    for a in 2..N {
        let lhs = ode.total_derivative(&upper[a][a]);
        let rhs = if a + 1 < N {
            Expr::integer(2) * &upper[a][a + 1]
        } else {
            Expr::integer(2) * Expr::sum((0..N).map(|c| &grad[c] * &upper[a][c]))
        };
        consistency.push((format!("D h^{a}{a}"), lhs, rhs));
    }
    PairingChain { upper, consistency }
}

/// Signs of the eigenvalues of a symmetric matrix: `(positive, negative)`.
pub fn signature(g: &[[f64; N]; N]) -> (usize, usize) {
    let m = nalgebra::SMatrix::<f64, N, N>::from_fn(|i, j| g[i][j]);
    let eig = m.symmetric_eigen().eigenvalues;
    let pos = eig.iter().filter(|&&l| l > 0.0).count();
    let neg = eig.iter().filter(|&&l| l < 0.0).count();
    (pos, neg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{ex, DEFAULT_SEED};
    use crate::pentad::solve_pentad;

    fn conics() -> (JetOde, PentadData, MetricField) {
        let ode = JetOde::builtin("conics5").unwrap();
        let pd = solve_pentad(&ode).unwrap();
        let m = MetricField::from_frame(&pd);
        (ode, pd, m)
    }

    #[test]
    fn frame_metric_is_inverse_pair() {
        let (ode, _, m) = conics();
        assert!(m.inverse_check(&ode.domain, 50, 1e-9, DEFAULT_SEED).unwrap().passed);
        let pt = Assignment::from_point([0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let up = m.upper_at(&pt).unwrap();
        let anti = [24.0, -24.0, 24.0, -24.0, 24.0];
        for a in 0..N {
            for b in 0..N {
                let want = if a + b == 4 { anti[a] } else { 0.0 };
                assert!((up[a][b] - want).abs() < 1e-12, "{a}{b}");
            }
        }
    }

    #[test]
    fn chain_agrees_with_frame() {
        let (ode, pd, m) = conics();
        let chain = pairing_chain(&ode, &pd.p);
        for a in 0..N {
            for b in 0..N {
                let o = equiv(&chain.upper[a][b], &m.upper[a][b], &ode.domain, 50, 1e-9, 7).unwrap();
                assert!(o.passed, "{a}{b}");
            }
        }
        for (label, l, r) in &chain.consistency {
            assert!(equiv(l, r, &ode.domain, 50, 1e-9, 7).unwrap().passed, "{label}");
        }
        let want = ex("48*q*s - 32*r^2");
        assert!(
            equiv(&chain.upper[2][4], &want, &ode.domain, 50, 1e-9, 7)
                .unwrap()
                .passed
        );
    }

    #[test]
    fn signature_of_diagonal() {
        let mut g = [[0.0; N]; N];
        for (i, s) in [1.0, -1.0, 1.0, -1.0, 1.0].iter().enumerate() {
            g[i][i] = *s;
        }
        assert_eq!(signature(&g), (3, 2));
    }
}
