//! Adaptive Runge–Kutta integration of the jet system of an ODE.

use std::cell::Cell;

use ode_solvers::{DVector, Dopri5, OutputType, System};

use super::RadonError;
use crate::expr::{Assignment, Var};
use crate::jet::JetOde;

struct JetSystem<'a> {
    ode: &'a JetOde,
    failed: Cell<bool>,
}

impl System<f64, DVector<f64>> for JetSystem<'_> {
    fn system(&self, x: f64, y: &DVector<f64>, dy: &mut DVector<f64>) {
        let n = y.len();
        let mut a = Assignment::new();
        a.set(Var::X, x);
        for (k, &v) in self.ode.jet_vars()[1..].iter().enumerate() {
            a.set(v, y[k]);
        }
        for k in 0..n - 1 {
            dy[k] = y[k + 1];
        }
        dy[n - 1] = match self.ode.rhs.eval(&a) {
            Ok(v) if v.is_finite() => v,
            _ => {
                self.failed.set(true);
                f64::NAN
            }
        };
    }
}

/// Carry the jet `(y, p, …)` at `x0` to `x1` along the ODE.
pub fn integrate_ode(ode: &JetOde, jet: &[f64], x0: f64, x1: f64, tol: f64) -> Result<Vec<f64>, RadonError> {
    if jet.len() != ode.dim() {
        return Err(RadonError::Integration(format!(
            "expected a jet of length {}",
            ode.dim()
        )));
    }
    if x0 == x1 {
        return Ok(jet.to_vec());
    }
    let sys = JetSystem {
        ode,
        failed: Cell::new(false),
    };
    let y0 = DVector::from_column_slice(jet);
    let mut solver = Dopri5::new(sys, x0, x1, x1 - x0, y0, tol, tol);
    solver.set_output(OutputType::Sparse);
    solver
        .integrate()
        .map_err(|e| RadonError::Integration(format!("{e:?}")))?;
    let x_end = *solver
        .x_out()
        .last()
        .ok_or_else(|| RadonError::Integration("no output".into()))?;
    let y = solver
        .y_out()
        .last()
        .ok_or_else(|| RadonError::Integration("no output".into()))?;
    if (x_end - x1).abs() > 1e-12 * (1.0 + x1.abs()) || y.iter().any(|v| !v.is_finite()) {
        return Err(RadonError::Integration(format!("stopped at x = {x_end}")));
    }
    Ok(y.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_of_the_second_equation() {
        let ode = JetOde::builtin("gn5").unwrap();
        // y = 1 + x² + (1 + x)^(3/2)
        let jet = |x: f64| {
            let u: f64 = 1.0 + x;
            vec![
                1.0 + x * x + u.powf(1.5),
                2.0 * x + 1.5 * u.sqrt(),
                2.0 + 0.75 * u.powf(-0.5),
                -0.375 * u.powf(-1.5),
                0.5625 * u.powf(-2.5),
            ]
        };
        let got = integrate_ode(&ode, &jet(0.0), 0.0, 0.5, 1e-12).unwrap();
        for (a, b) in got.iter().zip(jet(0.5)) {
            assert!((a - b).abs() < 1e-8 * (1.0 + b.abs()), "{a} vs {b}");
        }
        assert_eq!(integrate_ode(&ode, &jet(0.0), 0.2, 0.2, 1e-12).unwrap(), jet(0.0));
    }
}
