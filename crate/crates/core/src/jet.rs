//! Jet space of a scalar ODE `y^(n) = Λ(x, y, p, q, r, s)` for `n` in {4, 5}.

use std::fmt;
use std::path::Path;

use crate::expr::{ex, parse, Expr, ParseError, SampleDomain, Var};

#[derive(Debug, thiserror::Error)]
pub enum OdeError {
    #[error("unknown builtin ODE `{0}` (expected conics5, gn5 or conics4)")]
    UnknownBuiltin(String),
    #[error("unsupported order {0}: only 4 and 5 are handled")]
    UnsupportedOrder(u32),
    #[error("right-hand side depends on `{0}`, which is not a jet variable of this order")]
    ForeignVariable(Var),
    #[error("ODE file line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("ODE file: missing key `{0}`")]
    MissingKey(&'static str),
    #[error("right-hand side: {0}")]
    Parse(#[from] ParseError),
    #[error("reading ODE file: {0}")]
    Io(#[from] std::io::Error),
}

/// `y^(n) = Λ` with the jet coordinates `x, y, p = y', q = y'', ...`.
#[derive(Clone, Debug)]
pub struct JetOde {
    pub name: String,
    pub order: u32,
    pub rhs: Expr,
    pub domain: SampleDomain,
}

pub const BUILTINS: [&str; 3] = ["conics5", "gn5", "conics4"];

impl JetOde {
    pub fn new(name: impl Into<String>, order: u32, rhs: Expr) -> Result<Self, OdeError> {
        if !(4..=5).contains(&order) {
            return Err(OdeError::UnsupportedOrder(order));
        }
        let mut ode = Self {
            name: name.into(),
            order,
            rhs,
            domain: SampleDomain::default(),
        };
        if let Some(v) = ode.rhs.free_vars().into_iter().find(|v| !ode.jet_vars().contains(v)) {
            return Err(OdeError::ForeignVariable(v));
        }
        if ode.rhs.depends_on(Var::X) {
            ode.domain = SampleDomain::with_w();
        }
        Ok(ode)
    }

    pub fn builtin(name: &str) -> Result<Self, OdeError> {
        let (order, rhs) = match name {
            "conics5" => (5, "-(40/9)*r^3/q^2 + 5*r*s/q"),
            "gn5" => (5, "(5/3)*s^2/r"),
            "conics4" => (4, "4*r^2/(3*q) + (2*x*q*r + 6*q^2)/(x*p - y) - 3*x^2*q^3/(x*p - y)^2"),
            _ => return Err(OdeError::UnknownBuiltin(name.to_string())),
        };
        Self::new(name, order, ex(rhs))
    }

    /// Parse `key = value` lines with keys `name`, `order`, `rhs`.
    /// Blank lines and lines starting with `#` are ignored.
    pub fn from_definition(text: &str) -> Result<Self, OdeError> {
        let (mut name, mut order, mut rhs) = (None, None, None);
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| OdeError::Format {
                line: i + 1,
                msg: "expected `key = value`".into(),
            })?;
            let v = v.trim();
            match k.trim() {
                "name" => name = Some(v.to_string()),
                "order" => {
                    order = Some(v.parse::<u32>().map_err(|_| OdeError::Format {
                        line: i + 1,
                        msg: format!("order must be an integer, got {v:?}"),
                    })?)
                }
                "rhs" => rhs = Some(parse(v)?),
                other => {
                    return Err(OdeError::Format {
                        line: i + 1,
                        msg: format!("unknown key {other:?}"),
                    })
                }
            }
        }
        Self::new(
            name.ok_or(OdeError::MissingKey("name"))?,
            order.ok_or(OdeError::MissingKey("order"))?,
            rhs.ok_or(OdeError::MissingKey("rhs"))?,
        )
    }

    pub fn from_file(path: &Path) -> Result<Self, OdeError> {
        Self::from_definition(&std::fs::read_to_string(path)?)
    }

    /// A builtin name or a path to a definition file.
    pub fn resolve(spec: &str) -> Result<Self, OdeError> {
        if BUILTINS.contains(&spec) {
            Self::builtin(spec)
        } else if Path::new(spec).exists() {
            Self::from_file(Path::new(spec))
        } else {
            Err(OdeError::UnknownBuiltin(spec.to_string()))
        }
    }

    /// Jet variables `x, y, p, ...` up to order `n - 1`.
    pub fn jet_vars(&self) -> Vec<Var> {
        Var::ALL[..self.order as usize + 1].to_vec()
    }

    /// Moduli coordinates: the jet at fixed `x`, i.e. `y, p, ...`.
    pub fn coords(&self) -> Vec<Var> {
        Var::ALL[1..self.order as usize + 1].to_vec()
    }

    pub fn dim(&self) -> usize {
        self.order as usize
    }

    /// The variable `Λ` replaces under `D`, the highest jet coordinate.
    pub fn top(&self) -> Var {
        Var::ALL[self.order as usize]
    }

    /// Total derivative `D = ∂x + p ∂y + q ∂p + ... + Λ ∂top`.
    pub fn total_derivative(&self, e: &Expr) -> Expr {
        let vars = self.jet_vars();
        let mut terms = vec![e.diff(Var::X)];
        for (i, &v) in vars.iter().enumerate().skip(1) {
            let d = e.diff(v);
            if d.is_zero() {
                continue;
            }
            let coef = match vars.get(i + 1) {
                Some(&next) => Expr::var(next),
                None => self.rhs.clone(),
            };
            terms.push(d * coef);
        }
        Expr::sum(terms)
    }

    /// Components of the prolongation field on the moduli coordinates.
    pub fn prolongation(&self) -> Vec<Expr> {
        let mut out: Vec<Expr> = self.coords()[1..].iter().map(|&v| Expr::var(v)).collect();
        out.push(self.rhs.clone());
        out
    }

    /// `∂Λ/∂X^a` for each moduli coordinate.
    pub fn rhs_gradient(&self) -> Vec<Expr> {
        self.coords().iter().map(|&v| self.rhs.diff(v)).collect()
    }
}

impl fmt::Display for JetOde {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: y^({}) = {}", self.name, self.order, self.rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{equiv, Assignment, DEFAULT_SEED};

    fn same(a: &Expr, b: &Expr, ode: &JetOde) -> bool {
        equiv(a, b, &ode.domain, 50, 1e-12, DEFAULT_SEED).unwrap().passed
    }

    #[test]
    fn total_derivative_basics() {
        let ode = JetOde::builtin("conics5").unwrap();
        assert_eq!(ode.total_derivative(&ex("y")), ex("p"));
        assert!(same(&ode.total_derivative(&ex("s")), &ode.rhs, &ode));
        assert!(same(
            &ode.total_derivative(&ex("q^(1/2)")),
            &ex("(1/2)*r*q^(-1/2)"),
            &ode
        ));
    }

    #[test]
    fn partials_of_the_conic_equation() {
        let ode = JetOde::builtin("conics5").unwrap();
        assert!(same(&ode.rhs.diff(Var::S), &ex("5*r/q"), &ode));
        assert!(same(&ode.rhs.diff(Var::R), &ex("5*s/q - (40/3)*r^2/q^2"), &ode));
        let a = Assignment::from_pairs(&[(Var::Q, 1.0), (Var::R, 3.0), (Var::S, 2.0)]);
        assert_eq!(ode.rhs.eval(&a).unwrap(), -90.0);
    }

    #[test]
    fn builtins_and_prolongation() {
        let gn = JetOde::builtin("gn5").unwrap();
        assert_eq!(gn.order, 5);
        let v = gn.prolongation();
        assert_eq!(v.len(), 5);
        assert_eq!(v[0], ex("p"));
        assert_eq!(v[4], gn.rhs);
        let c4 = JetOde::builtin("conics4").unwrap();
        assert_eq!(c4.prolongation().len(), 4);
        assert_eq!(c4.top(), Var::R);
        assert!(c4.domain.w.is_some());
        assert!(matches!(JetOde::builtin("nope"), Err(OdeError::UnknownBuiltin(_))));
    }

    #[test]
    fn definition_files() {
        let ode = JetOde::from_definition("# trivial\nname = flat\norder = 4\nrhs = 0\n").unwrap();
        assert_eq!(ode.name, "flat");
        assert!(ode.rhs.is_zero());
        assert!(matches!(
            JetOde::from_definition("name = a\norder = 4\nrhs = s"),
            Err(OdeError::ForeignVariable(Var::S))
        ));
        assert!(matches!(
            JetOde::from_definition("name = a\norder = 6\nrhs = q"),
            Err(OdeError::UnsupportedOrder(6))
        ));
        assert!(matches!(
            JetOde::from_definition("name = a\norder = 5"),
            Err(OdeError::MissingKey("rhs"))
        ));
    }

    mod properties {
        use proptest::prelude::*;

        use super::*;
        use crate::expr::properties::arb_expr;

        fn close(a: &Expr, b: &Expr) -> bool {
            equiv(a, b, &crate::expr::SampleDomain::default(), 20, 1e-9, 5)
                .unwrap()
                .passed
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn total_derivative_is_a_derivation(a in arb_expr(), b in arb_expr()) {
                let ode = JetOde::builtin("conics5").unwrap();
                let lhs = ode.total_derivative(&(&a * &b));
                let rhs = &a * ode.total_derivative(&b) + &b * ode.total_derivative(&a);
                prop_assert!(close(&lhs, &rhs));
            }

            #[test]
            fn top_partial_commutator(f in arb_expr()) {
                // ∂_s D − D ∂_s = ∂_r + Λ_s ∂_s
                let ode = JetOde::builtin("conics5").unwrap();
                let lhs = ode.total_derivative(&f).diff(Var::S) - ode.total_derivative(&f.diff(Var::S));
                let rhs = f.diff(Var::R) + ode.rhs.diff(Var::S) * f.diff(Var::S);
                prop_assert!(close(&lhs, &rhs));
            }
        }
    }
}
