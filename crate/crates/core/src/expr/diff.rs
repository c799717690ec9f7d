use super::{Expr, Kind, Var};
use num_traits::One;

pub(super) fn diff(e: &Expr, v: Var) -> Expr {
    match e.kind() {
        Kind::Const(_) => Expr::zero(),
        Kind::Var(u) => {
            if *u == v {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Kind::Sum(ts) => Expr::sum(ts.iter().map(|t| diff(t, v))),
        Kind::Neg(x) => -diff(x, v),
        Kind::Product(fs) => {
            let mut terms = Vec::with_capacity(fs.len());
            for i in 0..fs.len() {
                let d = diff(&fs[i], v);
                if d.is_zero() {
                    continue;
                }
                let mut factors = fs.clone();
                factors[i] = d;
                terms.push(Expr::product(factors));
            }
            Expr::sum(terms)
        }
        Kind::Pow(b, k) => {
            let db = diff(b, v);
            if db.is_zero() {
                return Expr::zero();
            }
            let km1 = k - num_rational::BigRational::one();
            Expr::product([Expr::constant(k.clone()), b.pow(km1), db])
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::{ex, Assignment, Var};

    #[test]
    fn power_rule_with_fractional_exponent() {
        let e = ex("q^(1/3)*r");
        let d = e.diff(Var::Q);
        let a = Assignment::from_pairs(&[(Var::Q, 8.0), (Var::R, 3.0)]);
        let got = d.eval(&a).unwrap();
        assert!((got - 3.0 / 3.0 * 8f64.powf(-2.0 / 3.0)).abs() < 1e-14);
    }

    #[test]
    fn constants_vanish() {
        assert!(ex("(40/9)").diff(Var::X).is_zero());
        assert!(ex("q^2 + r").diff(Var::S).is_zero());
    }
}
