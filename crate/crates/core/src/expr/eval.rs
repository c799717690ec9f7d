use std::collections::BTreeMap;

use super::{Expr, Kind, Var};

/// Numeric values for (a subset of) the jet variables.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Assignment {
    values: [Option<f64>; 6],
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: &[(Var, f64)]) -> Self {
        let mut a = Self::new();
        for &(v, x) in pairs {
            a.set(v, x);
        }
        a
    }

    /// Full point in coordinate order `(x, y, p, q, r, s)`.
    pub fn from_point(pt: [f64; 6]) -> Self {
        Self { values: pt.map(Some) }
    }

    pub fn set(&mut self, v: Var, x: f64) -> &mut Self {
        self.values[v.index()] = Some(x);
        self
    }

    pub fn with(mut self, v: Var, x: f64) -> Self {
        self.set(v, x);
        self
    }

    pub fn get(&self, v: Var) -> Option<f64> {
        self.values[v.index()]
    }

    pub fn to_map(&self) -> BTreeMap<String, f64> {
        Var::ALL
            .into_iter()
            .filter_map(|v| self.get(v).map(|x| (v.name().to_string(), x)))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("variable `{0}` has no value")]
    MissingVariable(Var),
    #[error("division by zero")]
    DivisionByZero,
    #[error("fractional power of negative base {0}")]
    NegativeBase(f64),
}

pub(super) fn eval(e: &Expr, a: &Assignment) -> Result<f64, EvalError> {
    match e.kind() {
        Kind::Const(_) => Ok(e.0.value),
        Kind::Var(v) => a.get(*v).ok_or(EvalError::MissingVariable(*v)),
        Kind::Sum(ts) => ts.iter().try_fold(0.0, |acc, t| Ok(acc + eval(t, a)?)),
        Kind::Product(fs) => fs.iter().try_fold(1.0, |acc, t| Ok(acc * eval(t, a)?)),
        Kind::Neg(x) => Ok(-eval(x, a)?),
        Kind::Pow(b, _) => {
            let base = eval(b, a)?;
            let k = e.0.exponent;
            if base == 0.0 && k < 0.0 {
                return Err(EvalError::DivisionByZero);
            }
            match e.0.int_exponent {
                Some(n) => Ok(base.powi(n)),
                None => {
                    if base < 0.0 {
                        Err(EvalError::NegativeBase(base))
                    } else {
                        Ok(base.powf(k))
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ex;

    #[test]
    fn errors_are_reported() {
        let a = Assignment::from_pairs(&[(Var::Q, -1.0), (Var::R, 0.0)]);
        assert_eq!(ex("q^(1/2)").eval(&a), Err(EvalError::NegativeBase(-1.0)));
        assert_eq!(ex("1/r").eval(&a), Err(EvalError::DivisionByZero));
        assert_eq!(ex("s").eval(&a), Err(EvalError::MissingVariable(Var::S)));
        assert_eq!(ex("q^3").eval(&a), Ok(-1.0));
    }
}
