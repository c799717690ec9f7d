//! The second-order operator `F ↦ G_a^bc ∇_b∇_c F` and the Laplacian.

use rand::Rng;

use super::{GAtPoint, GTensor, Mat};
use crate::expr::EvalError;
use crate::geom::{CurvatureAtPoint, N};
use crate::known::Component;

/// Operator values for one function at one point.
#[derive(Clone, Copy, Debug)]
pub struct HorOperatorValue {
    /// `v_a = G_a^bc ∇_b∇_c F`.
    pub v: [f64; N],
    /// `g^bc ∇_b∇_c F`.
    pub laplacian: f64,
    /// `∇_a F`.
    pub gradient: [f64; N],
}

/// `∇_b∇_c F = ∂_b∂_c F − Γ^d_bc ∂_d F` contracted with `G_a^bc` and `g^bc`.
pub fn hor_operator(gp: &GAtPoint, curv: &CurvatureAtPoint, grad: &[f64; N], hess: &Mat) -> HorOperatorValue {
    let mut cov = [[0.0; N]; N];
    for b in 0..N {
        for c in 0..N {
            cov[b][c] = hess[b][c] - (0..N).map(|d| curv.gamma[d][b][c] * grad[d]).sum::<f64>();
        }
    }
    let mut v = [0.0; N];
    let mut laplacian = 0.0;
    for b in 0..N {
        for c in 0..N {
            laplacian += curv.ginv[b][c] * cov[b][c];
            for (a, va) in v.iter_mut().enumerate() {
                *va += gp.mixed[a][b][c] * cov[b][c];
            }
        }
    }
    HorOperatorValue {
        v,
        laplacian,
        gradient: *grad,
    }
}

/// Evaluate printed coordinate components on a gradient and Hessian.
pub fn printed_operator(
    components: &[Component],
    curv: &CurvatureAtPoint,
    grad: &[f64; N],
    hess: &Mat,
) -> Result<[f64; N], EvalError> {
    let mut out = [0.0; N];
    for (a, comp) in components.iter().enumerate() {
        let mut s = comp.gradient.eval(&curv.point)? * grad[a];
        for (i, j, e) in &comp.hessian {
            s += e.eval(&curv.point)? * hess[*i][*j];
        }
        out[a] = s;
    }
    Ok(out)
}

/// Largest relative disagreement per component between the printed
/// expansion and the tensorial operator, over random quadratic functions.
pub fn expansion_residuals<R: Rng>(
    gt: &GTensor,
    curv: &CurvatureAtPoint,
    components: &[Component],
    trials: usize,
    rng: &mut R,
) -> Result<[f64; N], EvalError> {
    let gp = gt.at(curv)?;
    let mut worst = [0.0f64; N];
    for _ in 0..trials {
        let mut grad = [0.0; N];
        let mut hess = [[0.0; N]; N];
        for g in grad.iter_mut() {
            *g = rng.gen_range(-1.0..1.0);
        }
        for i in 0..N {
            for j in i..N {
                hess[i][j] = rng.gen_range(-1.0..1.0);
                hess[j][i] = hess[i][j];
            }
        }
        let tensor = hor_operator(&gp, curv, &grad, &hess).v;
        let printed = printed_operator(components, curv, &grad, &hess)?;
        for a in 0..N {
            let r = (tensor[a] - printed[a]).abs() / (1.0 + tensor[a].abs().max(printed[a].abs()));
            worst[a] = worst[a].max(r);
        }
    }
    Ok(worst)
}

/// `μ = 6λ² + R/10`.
pub fn mu_lambda(lambda: f64, scalar_curvature: f64) -> f64 {
    6.0 * lambda * lambda + scalar_curvature / 10.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mu_lambda_values() {
        assert_eq!(mu_lambda(0.0, -60.0), -6.0);
        assert_eq!(mu_lambda(1.0, -60.0), 0.0);
        assert_eq!(mu_lambda(0.0, 0.0), 0.0);
    }
}
