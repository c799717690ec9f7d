//! Spinor connection of the conic metric in terms of the null frame.
//!
//! With `∇o = φ o + ψ ι` and `∇ι = χ o − φ ι`, the frame covector
//! `e^i = o^m ι^(4−m)` (`m = i − 1`) obeys
//!
//! ```text
//! ∇_a e^i_b = (2m − 4) φ_a e^i_b + m ψ_a e^(i−1)_b + (4 − m) χ_a e^(i+1)_b
//! ```

use super::curvature::{CurvatureAtPoint, N};
use super::MetricField;
use crate::expr::{ex, Assignment, EvalError, Expr};
use crate::pentad::PentadData;

/// Closed-form connection one-forms of the conic equation, components
/// along `(dȳ, dp̄, dq̄, dr̄, ds̄)`.
#[derive(Clone, Debug)]
pub struct ConnectionForms {
    pub alpha: Expr,
    pub gamma: Expr,
    pub delta: Expr,
    pub phi: Vec<Expr>,
    pub psi: Vec<Expr>,
    pub chi: Vec<Expr>,
}

impl ConnectionForms {
    pub fn conics() -> Self {
        let alpha = ex("s/(12*q^2) - r^2/(8*q^3)");
        let gamma = ex("(1/24)*q^(-3/2)*r");
        let delta = ex("(1/2)*q^(-1/2)");
        let z = Expr::zero;
        let phi = vec![alpha.clone(), -(ex("q^(-1/2)") * &gamma), z(), z(), z()];
        let chi = vec![Expr::integer(4) * &gamma, delta.clone(), z(), z(), z()];
        let psi = vec![
            ex("-(1/864)*r^3/q^(9/2)"),
            ex("(5/96)*r^2/q^(7/2) - s/(24*q^(5/2))"),
            ex("r/(24*q^(5/2))"),
            z(),
            z(),
        ];
        Self {
            alpha,
            gamma,
            delta,
            phi,
            psi,
            chi,
        }
    }

    fn eval(v: &[Expr], pt: &Assignment) -> Result<[f64; N], EvalError> {
        let mut out = [0.0; N];
        for (o, e) in out.iter_mut().zip(v) {
            *o = e.eval(pt)?;
        }
        Ok(out)
    }
}

/// Coframe with symbolic derivatives, and the connection forms read off
/// from the Levi-Civita connection.
#[derive(Clone, Debug)]
pub struct DerivedConnection {
    pub coframe: Vec<Vec<Expr>>,
    /// `dcoframe[i][a][b] = ∂_a e^i_b`.
    pub dcoframe: Vec<Vec<Vec<Expr>>>,
    pub phi: Vec<Expr>,
    pub chi: Vec<Expr>,
    pub psi: Vec<Expr>,
}

impl DerivedConnection {
    /// `φ, χ` from `∇e¹ = −4φ e¹ + 4χ e²` and `ψ` from `∇e⁵ = 4φ e⁵ + 4ψ e⁴`,
    /// contracting with the dual frame.
    pub fn new(pd: &PentadData, m: &MetricField) -> Self {
        let coords = &m.coords;
        let k = pd.coframe.clone();
        let frame = pd.frame();
        let dcoframe: Vec<Vec<Vec<Expr>>> = k
            .iter()
            .map(|row| {
                coords
                    .iter()
                    .map(|&v| row.iter().map(|e| e.diff(v).simplified()).collect())
                    .collect()
            })
            .collect();
        let gamma: Vec<Vec<Vec<Expr>>> = (0..N)
            .map(|c| {
                (0..N)
                    .map(|a| (0..N).map(|b| m.christoffel(c, a, b)).collect())
                    .collect()
            })
            .collect();
        let nabla = |i: usize, a: usize, b: usize| {
            let mut t = vec![dcoframe[i][a][b].clone()];
            for c in 0..N {
                if !k[i][c].is_zero() {
                    t.push(-(&gamma[c][a][b] * &k[i][c]));
                }
            }
            Expr::sum(t)
        };
        let contract =
            |i: usize, j: usize, a: usize| Expr::sum((0..N).map(|b| nabla(i, a, b) * &frame[j][b]).collect::<Vec<_>>());
        let quarter = Expr::rational(1, 4);
        let phi = (0..N).map(|a| (-(&quarter * contract(0, 0, a))).simplified()).collect();
        let chi = (0..N).map(|a| (&quarter * contract(0, 1, a)).simplified()).collect();
        let psi = (0..N).map(|a| (&quarter * contract(4, 3, a)).simplified()).collect();
        Self {
            coframe: k,
            dcoframe,
            phi,
            chi,
            psi,
        }
    }

    /// `∇_a e^i_b` at a point.
    pub fn nabla_coframe(&self, curv: &CurvatureAtPoint) -> Result<Vec<[[f64; N]; N]>, EvalError> {
        let pt = &curv.point;
        let mut k = [[0.0; N]; N];
        for i in 0..N {
            for a in 0..N {
                k[i][a] = self.coframe[i][a].eval(pt)?;
            }
        }
        let mut out = vec![[[0.0; N]; N]; N];
        for i in 0..N {
            for a in 0..N {
                for b in 0..N {
                    let mut s = self.dcoframe[i][a][b].eval(pt)?;
                    for c in 0..N {
                        s -= curv.gamma[c][a][b] * k[i][c];
                    }
                    out[i][a][b] = s;
                }
            }
        }
        Ok(out)
    }

    pub fn coframe_at(&self, pt: &Assignment) -> Result<[[f64; N]; N], EvalError> {
        MetricField::eval_matrix(&self.coframe, pt)
    }
}

/// Relative residual of the frame law for `e^(i+1)` at a point.
pub fn frame_law_residual(
    forms: &ConnectionForms,
    derived: &DerivedConnection,
    curv: &CurvatureAtPoint,
    i: usize,
) -> Result<f64, EvalError> {
    let pt = &curv.point;
    let nabla = derived.nabla_coframe(curv)?;
    let k = derived.coframe_at(pt)?;
    let phi = ConnectionForms::eval(&forms.phi, pt)?;
    let psi = ConnectionForms::eval(&forms.psi, pt)?;
    let chi = ConnectionForms::eval(&forms.chi, pt)?;
    let m = i as f64;
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for a in 0..N {
        for b in 0..N {
            let mut want = (2.0 * m - 4.0) * phi[a] * k[i][b];
            if i > 0 {
                want += m * psi[a] * k[i - 1][b];
            }
            if i + 1 < N {
                want += (4.0 - m) * chi[a] * k[i + 1][b];
            }
            num = num.max((nabla[i][a][b] - want).abs());
            den = den.max(want.abs()).max(nabla[i][a][b].abs());
        }
    }
    Ok(num / (1.0 + den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::equiv;
    use crate::jet::JetOde;
    use crate::pentad::solve_pentad;

    #[test]
    fn derived_forms_match_closed_forms() {
        let ode = JetOde::builtin("conics5").unwrap();
        let pd = solve_pentad(&ode).unwrap();
        let m = MetricField::from_frame(&pd);
        let dc = DerivedConnection::new(&pd, &m);
        let cf = ConnectionForms::conics();
        for a in 0..N {
            for (got, want, name) in [
                (&dc.phi, &cf.phi, "phi"),
                (&dc.chi, &cf.chi, "chi"),
                (&dc.psi, &cf.psi, "psi"),
            ] {
                let o = equiv(&got[a], &want[a], &ode.domain, 50, 1e-9, 3).unwrap();
                assert!(o.passed, "{name}[{a}]: {} vs {}", got[a], want[a]);
            }
        }
    }
}
