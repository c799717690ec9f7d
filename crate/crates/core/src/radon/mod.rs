//! The integral `F(X) = ∫ f(x, Z(x, X)) q^(1/3) dx` over conics and its
//! check against the second-order system on the moduli space.
//!
//! A point `X = (ȳ, p̄, q̄, r̄, s̄)` is the 4-jet of a conic at `x0`. The conic
//! is recovered from the jet, evaluated in closed form along a real
//! interval, and integrated by Gauss–Legendre quadrature.

pub mod fd;
pub mod ode;

pub use fd::gradient_hessian;
pub use ode::integrate_ode;

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use nalgebra::{SMatrix, SVector};

use crate::expr::{Assignment, EvalError, Expr, Var};
use crate::geom::{CurvatureAtPoint, GeomError, MetricField, N};
use crate::so3::{hor_operator, mu_lambda, GTensor};

#[derive(Debug, thiserror::Error)]
pub enum RadonError {
    #[error("jet does not determine a unique conic (null space of dimension {0})")]
    Degenerate(usize),
    #[error("second derivative vanishes: the conic equation is singular there")]
    Inflection,
    #[error("conic branch leaves the reals at x = {0}")]
    Discriminant(f64),
    #[error("vertical tangent at x = {0}")]
    VerticalTangent(f64),
    #[error("second derivative changes sign on the interval near x = {0}")]
    SignChange(f64),
    #[error("branch changed under perturbation of the jet")]
    BranchFlip,
    #[error("gradient too small for a least-squares fit of the eigenvalue")]
    IllConditioned,
    #[error("integration failed: {0}")]
    Integration(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// `a x² + 2bxy + c y² + 2dx + 2ey + f = 0`, unit length.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConicCoefficients(pub [f64; 6]);

type Series = [f64; 5];

fn mul(u: &Series, v: &Series) -> Series {
    let mut w = [0.0; 5];
    for i in 0..5 {
        for j in 0..5 - i {
            w[i + j] += u[i] * v[j];
        }
    }
    w
}

/// Taylor coefficients of `x², xy, y², x, y, 1` along `y(x0 + t)`.
fn monomial_series(x0: f64, y: &Series) -> [Series; 6] {
    let x = [x0, 1.0, 0.0, 0.0, 0.0];
    let one = [1.0, 0.0, 0.0, 0.0, 0.0];
    [mul(&x, &x), mul(&x, y), mul(y, y), x, *y, one]
}

const WEIGHTS: [f64; 6] = [1.0, 2.0, 1.0, 2.0, 2.0, 1.0];

fn taylor(jet: &[f64; 5]) -> Series {
    [jet[0], jet[1], jet[2] / 2.0, jet[3] / 6.0, jet[4] / 24.0]
}

/// Recover the conic through a 4-jet at `x0` from the five conditions
/// obtained by differentiating its equation along the curve.
pub fn conic_from_jet(jet: &[f64; 5], x0: f64) -> Result<ConicCoefficients, RadonError> {
    let scale = jet.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if jet[2].abs() <= 1e-12 * scale {
        return Err(RadonError::Inflection);
    }
    let mono = monomial_series(x0, &taylor(jet));
    let mut m = SMatrix::<f64, 6, 6>::zeros();
    for k in 0..5 {
        for (col, s) in mono.iter().enumerate() {
            m[(k, col)] = WEIGHTS[col] * s[k];
        }
    }
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let sv = svd.singular_values;
    let mut order: Vec<usize> = (0..6).collect();
    order.sort_by(|&a, &b| sv[a].total_cmp(&sv[b]));
    let largest = sv[order[5]];
    let nullity = order.iter().filter(|&&i| sv[i] <= 1e-10 * largest).count();
    if nullity != 1 {
        return Err(RadonError::Degenerate(nullity));
    }
    let row = v_t.row(order[0]);
    let mut c = [0.0; 6];
    for (i, x) in c.iter_mut().enumerate() {
        *x = row[i];
    }
    let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
    let lead = c.iter().copied().find(|x| x.abs() > 1e-12).unwrap_or(1.0);
    let sign = lead.signum();
    for x in c.iter_mut() {
        *x *= sign / norm;
    }
    Ok(ConicCoefficients(c))
}

impl ConicCoefficients {
    pub fn value(&self, x: f64, y: f64) -> f64 {
        let [a, b, c, d, e, f] = self.0;
        a * x * x + 2.0 * b * x * y + c * y * y + 2.0 * d * x + 2.0 * e * y + f
    }

    /// `(∂_x, ∂_y)` of the defining polynomial.
    pub fn gradient(&self, x: f64, y: f64) -> (f64, f64) {
        let [a, b, c, d, e, _] = self.0;
        (2.0 * (a * x + b * y + d), 2.0 * (b * x + c * y + e))
    }

    /// Branch through `(x, y)`: the sign of `∂_y` there.
    pub fn branch_at(&self, x: f64, y: f64) -> f64 {
        self.gradient(x, y).1.signum()
    }

    /// `(y, q)` on the branch with `sign ∂_y = branch`.
    pub fn eval_z(&self, branch: f64, x: f64) -> Result<(f64, f64), RadonError> {
        let [a, b, c, d, e, _] = self.0;
        let half_b = b * x + e;
        let c0 = a * x * x + 2.0 * d * x + self.0[5];
        let disc = half_b * half_b - c * c0;
        if disc < 0.0 {
            return Err(RadonError::Discriminant(x));
        }
        let root = disc.sqrt();
        let scale = self.0.iter().fold(0.0f64, |m, v| m.max(v.abs())) * (1.0 + x.abs());
        if root <= 1e-12 * scale {
            return Err(RadonError::VerticalTangent(x));
        }
        let y = if c != 0.0 && -half_b * branch >= 0.0 {
            (-half_b + branch * root) / c
        } else {
            c0 / (-half_b - branch * root)
        };
        let (fx, fy) = self.gradient(x, y);
        let p = -fx / fy;
        let q = -(2.0 * a + 4.0 * b * p + 2.0 * c * p * p) / fy;
        Ok((y, q))
    }

    /// `(y, p, q, r, s)` at `x` on the given branch.
    pub fn jet_at(&self, branch: f64, x: f64) -> Result<[f64; 5], RadonError> {
        let (y0, _) = self.eval_z(branch, x)?;
        let fy = self.gradient(x, y0).1;
        let mut ys: Series = [y0, 0.0, 0.0, 0.0, 0.0];
        for k in 1..5 {
            let mono = monomial_series(x, &ys);
            let known: f64 = (0..6).map(|col| self.0[col] * WEIGHTS[col] * mono[col][k]).sum();
            ys[k] = -known / fy;
        }
        Ok([ys[0], ys[1], 2.0 * ys[2], 6.0 * ys[3], 24.0 * ys[4]])
    }
}

/// Interval, quadrature order, finite-difference step and test function.
#[derive(Clone, Debug)]
pub struct RadonConfig {
    pub interval: (f64, f64),
    pub order: usize,
    pub h: f64,
    pub f: Expr,
    /// Base point at which points of the moduli space are given as jets.
    pub x0: f64,
}

impl RadonConfig {
    pub fn new(f: Expr) -> Self {
        Self {
            interval: (-0.4, 0.4),
            order: 32,
            h: 1e-2,
            f,
            x0: 0.0,
        }
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.order = order;
        self
    }

    pub fn with_interval(mut self, a: f64, b: f64) -> Self {
        self.interval = (a, b);
        self
    }

    pub fn with_step(mut self, h: f64) -> Self {
        self.h = h;
        self
    }
}

const GRID: usize = 64;

/// Conic and branch for a jet, after checking the interval is usable.
pub fn prepare(cfg: &RadonConfig, jet: &[f64; 5]) -> Result<(ConicCoefficients, f64), RadonError> {
    let conic = conic_from_jet(jet, cfg.x0)?;
    let branch = conic.branch_at(cfg.x0, jet[0]);
    let (a, b) = cfg.interval;
    let mut sign = 0.0;
    for k in 0..=GRID {
        let x = a + (b - a) * k as f64 / GRID as f64;
        let (_, q) = conic.eval_z(branch, x)?;
        if sign == 0.0 {
            sign = q.signum();
        } else if q.signum() != sign || q == 0.0 {
            return Err(RadonError::SignChange(x));
        }
    }
    Ok((conic, branch))
}

fn integrate(cfg: &RadonConfig, conic: &ConicCoefficients, branch: f64) -> Result<f64, RadonError> {
    let order = NonZeroUsize::new(cfg.order.max(1)).expect("nonzero");
    let rule = GaussLegendre::new(order);
    let mut failure: Option<RadonError> = None;
    let (a, b) = cfg.interval;
    let value = rule.integrate(a, b, |x| {
        if failure.is_some() {
            return 0.0;
        }
        let step = conic.eval_z(branch, x).and_then(|(y, q)| {
            let pt = Assignment::from_pairs(&[(Var::X, x), (Var::Y, y)]);
            Ok(cfg.f.eval(&pt)? * q.cbrt())
        });
        step.unwrap_or_else(|e| {
            failure = Some(e);
            0.0
        })
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

/// `F(X)` for the jet `X` at `cfg.x0`.
pub fn radon_f(cfg: &RadonConfig, jet: &[f64; 5]) -> Result<f64, RadonError> {
    let (conic, branch) = prepare(cfg, jet)?;
    integrate(cfg, &conic, branch)
}

/// `F` near a reference jet, refusing to continue onto the other branch.
fn radon_f_on(cfg: &RadonConfig, jet: &[f64; 5], branch: f64) -> Result<f64, RadonError> {
    let (conic, b) = prepare(cfg, jet)?;
    if b != branch {
        return Err(RadonError::BranchFlip);
    }
    integrate(cfg, &conic, b)
}

/// Value, gradient and Hessian of `F` at a jet by finite differences.
#[allow(clippy::type_complexity)]
pub fn derivatives(cfg: &RadonConfig, jet: &[f64; 5], h: f64) -> Result<(f64, [f64; N], [[f64; N]; N]), RadonError> {
    let (_, branch) = prepare(cfg, jet)?;
    let value = radon_f_on(cfg, jet, branch)?;
    let (g, hs) = gradient_hessian(|x| radon_f_on(cfg, x, branch), jet, h)?;
    Ok((value, g, hs))
}

/// Operator data for one jet and one test function.
#[derive(Clone, Debug)]
pub struct PointResult {
    pub jet: [f64; 5],
    pub value: f64,
    pub gradient: [f64; N],
    pub v: [f64; N],
    pub laplacian: f64,
    /// Least-squares `λ` in `v = λ ∇F`.
    pub lambda: f64,
    /// `‖v − λ ∇F‖ / ‖v‖`.
    pub residual: f64,
}

/// Results for one test function across several jets.
#[derive(Clone, Debug)]
pub struct SystemFit {
    pub f: String,
    pub points: Vec<PointResult>,
    pub lambda: f64,
    pub lambda_spread: f64,
    /// `ΔF = μ F + ν` fitted over the points.
    pub mu: f64,
    pub nu: f64,
    /// `|μ − (6λ² + R/10)|`.
    pub mu_defect: f64,
    pub worst_residual: f64,
}

/// Evaluate the operator on `F` at one jet, with the metric and structure
/// tensor of the conic equation.
pub fn operator_at(
    cfg: &RadonConfig,
    metric: &MetricField,
    g: &GTensor,
    jet: &[f64; 5],
) -> Result<PointResult, RadonError> {
    let (value, gradient, hess) = derivatives(cfg, jet, cfg.h)?;
    let mut pt = Assignment::new();
    pt.set(Var::X, cfg.x0);
    for (v, &x) in [Var::Y, Var::P, Var::Q, Var::R, Var::S].into_iter().zip(jet) {
        pt.set(v, x);
    }
    let curv = CurvatureAtPoint::compute(metric, &pt)?;
    let gp = g.at(&curv)?;
    let op = hor_operator(&gp, &curv, &gradient, &hess);
    let gv = SVector::<f64, N>::from_column_slice(&gradient);
    let vv = SVector::<f64, N>::from_column_slice(&op.v);
    let gn = gv.norm_squared();
    if gn <= 1e-24 * (1.0 + vv.norm_squared()) {
        return Err(RadonError::IllConditioned);
    }
    let lambda = vv.dot(&gv) / gn;
    let residual = (vv - lambda * gv).norm() / vv.norm().max(f64::MIN_POSITIVE);
    Ok(PointResult {
        jet: *jet,
        value,
        gradient,
        v: op.v,
        laplacian: op.laplacian,
        lambda,
        residual,
    })
}

/// Fit `λ` and `μ` for one test function over several jets.
pub fn verify_system(
    cfg: &RadonConfig,
    metric: &MetricField,
    g: &GTensor,
    jets: &[[f64; 5]],
    scalar_curvature: f64,
) -> Result<SystemFit, RadonError> {
    let points = jets
        .iter()
        .map(|j| operator_at(cfg, metric, g, j))
        .collect::<Result<Vec<_>, _>>()?;
    let lambdas: Vec<f64> = points.iter().map(|p| p.lambda).collect();
    let lambda = lambdas.iter().sum::<f64>() / lambdas.len() as f64;
    let lo = lambdas.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = lambdas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (mu, nu) = fit_line(&points);
    Ok(SystemFit {
        f: cfg.f.to_string(),
        worst_residual: points.iter().map(|p| p.residual).fold(0.0, f64::max),
        lambda,
        lambda_spread: hi - lo,
        mu,
        nu,
        mu_defect: (mu - mu_lambda(lambda, scalar_curvature)).abs(),
        points,
    })
}

/// Least squares for `ΔF = μ F + ν`.
fn fit_line(points: &[PointResult]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.value).sum::<f64>() / n;
    let my = points.iter().map(|p| p.laplacian).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.value - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.value - mx) * (p.laplacian - my)).sum();
    if sxx == 0.0 {
        return (f64::NAN, f64::NAN);
    }
    let mu = sxy / sxx;
    (mu, my - mu * mx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ex;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn circle_and_parabola() {
        let c = conic_from_jet(&[1.0, 0.0, -1.0, 0.0, -3.0], 0.0).unwrap();
        let k = 1.0 / 3f64.sqrt();
        assert!(close(&c.0, &[k, 0.0, k, 0.0, 0.0, -k], 1e-10), "{:?}", c);
        let p = conic_from_jet(&[0.0, 0.0, 2.0, 0.0, 0.0], 0.0).unwrap();
        let k = 1.0 / 1.25f64.sqrt();
        assert!(close(&p.0, &[k, 0.0, 0.0, 0.0, -0.5 * k, 0.0], 1e-10), "{:?}", p);
        assert!(matches!(
            conic_from_jet(&[0.0, 1.0, 0.0, 1.0, 0.0], 0.0),
            Err(RadonError::Inflection)
        ));
    }

    #[test]
    fn closed_form_branches() {
        let c = conic_from_jet(&[1.0, 0.0, -1.0, 0.0, -3.0], 0.0).unwrap();
        let b = c.branch_at(0.0, 1.0);
        let (y, q) = c.eval_z(b, 0.0).unwrap();
        assert!((y - 1.0).abs() < 1e-12 && (q + 1.0).abs() < 1e-12);
        assert!(matches!(c.eval_z(b, 2.0), Err(RadonError::Discriminant(_))));
        let p = conic_from_jet(&[0.0, 0.0, 2.0, 0.0, 0.0], 0.0).unwrap();
        let (y, q) = p.eval_z(p.branch_at(0.0, 0.0), 1.0).unwrap();
        assert!((y - 1.0).abs() < 1e-12 && (q - 2.0).abs() < 1e-12);
        let jet = c.jet_at(b, 0.0).unwrap();
        assert!(close(&jet, &[1.0, 0.0, -1.0, 0.0, -3.0], 1e-12));
    }

    #[test]
    fn parabola_integrals() {
        let jet = [0.0, 0.0, 2.0, 0.0, 0.0];
        let cfg = RadonConfig::new(ex("1")).with_interval(-1.0, 1.0);
        assert!((radon_f(&cfg, &jet).unwrap() - 2.0 * 2f64.cbrt()).abs() < 1e-12);
        let cfg = RadonConfig::new(ex("x")).with_interval(-1.0, 1.0);
        assert!(radon_f(&cfg, &jet).unwrap().abs() < 1e-14);
    }

    mod properties {
        use proptest::prelude::*;

        use super::*;

        fn arb_jet() -> impl Strategy<Value = [f64; 5]> {
            (-0.2..0.2f64, -0.2..0.2f64, 0.8..1.2f64, -0.2..0.2f64, 2.5..3.5f64)
                .prop_map(|(y, p, q, r, s)| [y, p, q, r, s])
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn conic_round_trip(jet in arb_jet(), x in -0.2..0.2f64) {
                let c = conic_from_jet(&jet, 0.0).unwrap();
                let moved = c.jet_at(c.branch_at(0.0, jet[0]), x).unwrap();
                let d = conic_from_jet(&moved, x).unwrap();
                let diff = c.0.iter().zip(&d.0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                prop_assert!(diff < 1e-9, "{:?} vs {:?}", c, d);
            }

            #[test]
            fn base_point_invariance(jet in arb_jet(), delta in -0.1..0.1f64) {
                let cfg = RadonConfig::new(ex("1 + x*y - y^2"));
                let c = conic_from_jet(&jet, 0.0).unwrap();
                let moved = c.jet_at(c.branch_at(0.0, jet[0]), delta).unwrap();
                let mut shifted = cfg.clone();
                shifted.x0 = delta;
                let a = radon_f(&cfg, &jet).unwrap();
                let b = radon_f(&shifted, &moved).unwrap();
                prop_assert!((a - b).abs() < 1e-10 * (1.0 + a.abs()), "{} vs {}", a, b);
            }

            #[test]
            fn quadrature_order_doubling(jet in arb_jet(), a in -2i32..=2, b in -2i32..=2, c in -2i32..=2) {
                let f = Expr::sum([
                    Expr::integer(a.into()),
                    Expr::integer(b.into()) * ex("x"),
                    Expr::integer(c.into()) * ex("x*y^2"),
                ]);
                let cfg = RadonConfig::new(f);
                let lo = radon_f(&cfg, &jet).unwrap();
                let hi = radon_f(&cfg.clone().with_order(2 * cfg.order), &jet).unwrap();
                prop_assert!((lo - hi).abs() < 1e-10, "{} vs {}", lo, hi);
            }

            #[test]
            fn hessian_is_symmetric(jet in arb_jet()) {
                let cfg = RadonConfig::new(ex("x*y"));
                let (_, _, h) = derivatives(&cfg, &jet, cfg.h).unwrap();
                for i in 0..N {
                    for j in 0..N {
                        prop_assert_eq!(h[i][j].to_bits(), h[j][i].to_bits());
                    }
                }
            }
        }
    }
}
