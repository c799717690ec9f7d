//! Symbolic expressions over jet variables.
//!
//! An [`Expr`] is an immutable, reference-counted tree with exact rational
//! constants and exact rational exponents. Construction goes through smart
//! constructors that flatten nested sums and products, fold constants and
//! pull signs out of products; they never reorder or expand anything, so the
//! printed form of a parsed expression stays close to its source.
//!
//! [`Expr::simplified`] is the heavier pass: it expands into sums of
//! monomials with rational exponents and is used to keep derived expressions
//! small. Identities are certified by [`equiv`], not by comparing normal
//! forms.

mod diff;
mod equiv;
mod eval;
mod normal;
mod parse;
#[cfg(test)]
pub(crate) mod properties;

use std::cmp::Ordering;
use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub use equiv::{
    equiv, scaled_residual, EquivError, EquivOutcome, SampleDomain, DEFAULT_SAMPLES, DEFAULT_SEED, DEFAULT_TOL,
};
pub use eval::{Assignment, EvalError};
pub use parse::{parse, ParseError};

/// Jet variable alphabet. The order here is also the canonical coordinate
/// order `(x, y, p, q, r, s)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    X,
    Y,
    P,
    Q,
    R,
    S,
}

impl Var {
    pub const ALL: [Var; 6] = [Var::X, Var::Y, Var::P, Var::Q, Var::R, Var::S];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
            Var::P => "p",
            Var::Q => "q",
            Var::R => "r",
            Var::S => "s",
        }
    }

    pub fn from_name(name: &str) -> Option<Var> {
        Var::ALL.into_iter().find(|v| v.name() == name)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Node kinds of an expression tree.
#[derive(Clone, Debug)]
pub enum Kind {
    Const(BigRational),
    Var(Var),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Pow(Expr, BigRational),
    Neg(Expr),
}

#[derive(Debug)]
struct Node {
    kind: Kind,
    hash: u64,
    // numeric caches used by eval
    value: f64,
    exponent: f64,
    int_exponent: Option<i32>,
}

/// Immutable symbolic expression. Cloning is cheap.
#[derive(Clone)]
pub struct Expr(Arc<Node>);

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // huge numerators/denominators: go through the ratio of logs
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

impl Expr {
    fn from_kind(kind: Kind) -> Expr {
        let mut h = DefaultHasher::new();
        let mut value = 0.0;
        let mut exponent = 0.0;
        let mut int_exponent = None;
        match &kind {
            Kind::Const(c) => {
                0u8.hash(&mut h);
                c.hash(&mut h);
                value = rat_to_f64(c);
            }
            Kind::Var(v) => {
                1u8.hash(&mut h);
                v.hash(&mut h);
            }
            Kind::Sum(ts) => {
                2u8.hash(&mut h);
                for t in ts {
                    t.0.hash.hash(&mut h);
                }
            }
            Kind::Product(fs) => {
                3u8.hash(&mut h);
                for t in fs {
                    t.0.hash.hash(&mut h);
                }
            }
            Kind::Pow(b, k) => {
                4u8.hash(&mut h);
                b.0.hash.hash(&mut h);
                k.hash(&mut h);
                exponent = rat_to_f64(k);
                if k.is_integer() {
                    int_exponent = k.to_integer().to_i32();
                }
            }
            Kind::Neg(e) => {
                5u8.hash(&mut h);
                e.0.hash.hash(&mut h);
            }
        }
        Expr(Arc::new(Node {
            kind,
            hash: h.finish(),
            value,
            exponent,
            int_exponent,
        }))
    }

    pub fn kind(&self) -> &Kind {
        &self.0.kind
    }

    pub fn constant(c: BigRational) -> Expr {
        Expr::from_kind(Kind::Const(c))
    }

    pub fn integer(n: i64) -> Expr {
        Expr::constant(int(n))
    }

    pub fn rational(n: i64, d: i64) -> Expr {
        Expr::constant(rat(n, d))
    }

    pub fn zero() -> Expr {
        Expr::integer(0)
    }

    pub fn one() -> Expr {
        Expr::integer(1)
    }

    pub fn var(v: Var) -> Expr {
        Expr::from_kind(Kind::Var(v))
    }

    pub fn as_const(&self) -> Option<&BigRational> {
        match self.kind() {
            Kind::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const().is_some_and(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.as_const().is_some_and(|c| c.is_one())
    }

    /// Sum with flattening and constant folding.
    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        let mut out = Vec::new();
        let mut c = BigRational::zero();
        fn push(out: &mut Vec<Expr>, c: &mut BigRational, t: Expr) {
            match t.kind() {
                Kind::Const(k) => *c += k,
                Kind::Sum(ts) => {
                    for u in ts {
                        push(out, c, u.clone());
                    }
                }
                _ => out.push(t),
            }
        }
        for t in terms {
            push(&mut out, &mut c, t);
        }
        if !c.is_zero() {
            out.push(Expr::constant(c));
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::from_kind(Kind::Sum(out)),
        }
    }

    /// Product with flattening, constant folding and sign extraction.
    pub fn product<I: IntoIterator<Item = Expr>>(factors: I) -> Expr {
        let mut out = Vec::new();
        let mut c = BigRational::one();
        fn push(out: &mut Vec<Expr>, c: &mut BigRational, f: Expr) {
            match f.kind() {
                Kind::Const(k) => *c *= k,
                Kind::Product(fs) => {
                    for u in fs {
                        push(out, c, u.clone());
                    }
                }
                Kind::Neg(e) => {
                    *c = -c.clone();
                    push(out, c, e.clone());
                }
                _ => out.push(f),
            }
        }
        for f in factors {
            push(&mut out, &mut c, f);
        }
        if c.is_zero() {
            return Expr::zero();
        }
        let rest = match out.len() {
            0 => return Expr::constant(c),
            1 => out.pop().unwrap(),
            _ => Expr::from_kind(Kind::Product(out)),
        };
        if c.is_one() {
            rest
        } else if c == -BigRational::one() {
            Expr::from_kind(Kind::Neg(rest))
        } else {
            let mut fs = vec![Expr::constant(c)];
            match rest.kind() {
                Kind::Product(inner) => fs.extend(inner.iter().cloned()),
                _ => fs.push(rest),
            }
            Expr::from_kind(Kind::Product(fs))
        }
    }

    /// `self^k` for an exact rational exponent.
    pub fn pow(&self, k: BigRational) -> Expr {
        if k.is_zero() {
            return Expr::one();
        }
        if k.is_one() {
            return self.clone();
        }
        match self.kind() {
            Kind::Const(c) if c.is_one() => return Expr::one(),
            Kind::Const(c) if k.is_integer() && !c.is_zero() => {
                let n = k.to_integer().to_i32().expect("exponent fits in i32");
                return Expr::constant(num_traits::pow::Pow::pow(c.clone(), n));
            }
            Kind::Pow(b, j) if k.is_integer() => return b.pow(j * &k),
            _ => {}
        }
        Expr::from_kind(Kind::Pow(self.clone(), k))
    }

    pub fn powi(&self, k: i64) -> Expr {
        self.pow(int(k))
    }

    pub fn recip(&self) -> Expr {
        self.powi(-1)
    }

    /// The set of variables appearing in the expression.
    pub fn free_vars(&self) -> Vec<Var> {
        let mut seen = [false; 6];
        fn walk(e: &Expr, seen: &mut [bool; 6]) {
            match e.kind() {
                Kind::Const(_) => {}
                Kind::Var(v) => seen[v.index()] = true,
                Kind::Sum(xs) | Kind::Product(xs) => xs.iter().for_each(|x| walk(x, seen)),
                Kind::Pow(b, _) => walk(b, seen),
                Kind::Neg(x) => walk(x, seen),
            }
        }
        walk(self, &mut seen);
        Var::ALL.into_iter().filter(|v| seen[v.index()]).collect()
    }

    pub fn depends_on(&self, v: Var) -> bool {
        self.free_vars().contains(&v)
    }

    /// Number of nodes in the tree (shared subtrees counted each time).
    pub fn size(&self) -> usize {
        match self.kind() {
            Kind::Const(_) | Kind::Var(_) => 1,
            Kind::Sum(xs) | Kind::Product(xs) => 1 + xs.iter().map(Expr::size).sum::<usize>(),
            Kind::Pow(b, _) => 1 + b.size(),
            Kind::Neg(x) => 1 + x.size(),
        }
    }

    /// Replace a variable by an expression.
    pub fn substitute(&self, v: Var, with: &Expr) -> Expr {
        match self.kind() {
            Kind::Const(_) => self.clone(),
            Kind::Var(u) => {
                if *u == v {
                    with.clone()
                } else {
                    self.clone()
                }
            }
            Kind::Sum(xs) => Expr::sum(xs.iter().map(|x| x.substitute(v, with))),
            Kind::Product(xs) => Expr::product(xs.iter().map(|x| x.substitute(v, with))),
            Kind::Pow(b, k) => b.substitute(v, with).pow(k.clone()),
            Kind::Neg(x) => -x.substitute(v, with),
        }
    }

    /// Partial derivative.
    pub fn diff(&self, v: Var) -> Expr {
        diff::diff(self, v)
    }

    /// Evaluate in IEEE double precision.
    pub fn eval(&self, a: &Assignment) -> Result<f64, EvalError> {
        eval::eval(self, a)
    }

    /// Expand into a sum of monomials with rational exponents and rebuild.
    pub fn simplified(&self) -> Expr {
        normal::simplify(self)
    }

    fn structural_cmp(&self, other: &Expr) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        fn rank(k: &Kind) -> u8 {
            match k {
                Kind::Const(_) => 0,
                Kind::Var(_) => 1,
                Kind::Sum(_) => 2,
                Kind::Product(_) => 3,
                Kind::Pow(..) => 4,
                Kind::Neg(_) => 5,
            }
        }
        match (self.kind(), other.kind()) {
            (Kind::Const(a), Kind::Const(b)) => a.cmp(b),
            (Kind::Var(a), Kind::Var(b)) => a.cmp(b),
            (Kind::Sum(a), Kind::Sum(b)) | (Kind::Product(a), Kind::Product(b)) => a.cmp(b),
            (Kind::Pow(a, j), Kind::Pow(b, k)) => a.cmp(b).then_with(|| j.cmp(k)),
            (Kind::Neg(a), Kind::Neg(b)) => a.cmp(b),
            (a, b) => rank(a).cmp(&rank(b)),
        }
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.0.hash == other.0.hash && self.structural_cmp(other) == Ordering::Equal
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.hash.hash(state);
    }
}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        self.structural_cmp(other)
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl From<Var> for Expr {
    fn from(v: Var) -> Expr {
        Expr::var(v)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::integer(n)
    }
}

impl From<BigRational> for Expr {
    fn from(c: BigRational) -> Expr {
        Expr::constant(c)
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match self.kind() {
            Kind::Const(c) => Expr::constant(-c.clone()),
            Kind::Neg(e) => e.clone(),
            Kind::Product(fs) if fs[0].as_const().is_some() => {
                let c = -fs[0].as_const().unwrap().clone();
                Expr::product(std::iter::once(Expr::constant(c)).chain(fs[1..].iter().cloned()))
            }
            _ => Expr::from_kind(Kind::Neg(self.clone())),
        }
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl $tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(&self, &rhs)
            }
        }
        impl $tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(&self, rhs)
            }
        }
        impl $tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(self, &rhs)
            }
        }
        impl $tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(self, rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| Expr::sum([a.clone(), b.clone()]));
binop!(Sub, sub, |a, b| Expr::sum([a.clone(), -b]));
binop!(Mul, mul, |a, b| Expr::product([a.clone(), b.clone()]));
binop!(Div, div, |a, b| Expr::product([a.clone(), b.recip()]));

// Printing. The output is ASCII and re-parses to a structurally equal tree.

fn fmt_const(c: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if c.is_integer() && !c.is_negative() {
        write!(f, "{}", c.numer())
    } else if c.is_integer() {
        write!(f, "({})", c.numer())
    } else {
        write!(f, "({}/{})", c.numer(), c.denom())
    }
}

// precedence levels: 0 sum, 1 unary/neg, 2 product, 3 power base
fn fmt_at(e: &Expr, level: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let own = match e.kind() {
        Kind::Const(_) | Kind::Var(_) => 4,
        Kind::Sum(_) => 0,
        Kind::Neg(_) => 1,
        Kind::Product(_) => 2,
        Kind::Pow(..) => 3,
    };
    let paren = own < level;
    if paren {
        f.write_str("(")?;
    }
    match e.kind() {
        Kind::Const(c) => fmt_const(c, f)?,
        Kind::Var(v) => f.write_str(v.name())?,
        Kind::Sum(ts) => {
            for (i, t) in ts.iter().enumerate() {
                if i == 0 {
                    fmt_at(t, 1, f)?;
                    continue;
                }
                match t.kind() {
                    Kind::Neg(x) => {
                        f.write_str(" - ")?;
                        fmt_at(x, 2, f)?;
                    }
                    Kind::Const(c) if c.is_negative() => {
                        f.write_str(" - ")?;
                        fmt_const(&-c.clone(), f)?;
                    }
                    Kind::Product(fs) if fs[0].as_const().is_some_and(|c| c.is_negative()) => {
                        f.write_str(" - ")?;
                        fmt_at(&-t, 2, f)?;
                    }
                    _ => {
                        f.write_str(" + ")?;
                        fmt_at(t, 1, f)?;
                    }
                }
            }
        }
        Kind::Neg(x) => {
            f.write_str("-")?;
            fmt_at(x, 2, f)?;
        }
        Kind::Product(fs) => {
            for (i, t) in fs.iter().enumerate() {
                if i > 0 {
                    f.write_str("*")?;
                }
                fmt_at(t, 3, f)?;
            }
        }
        Kind::Pow(b, k) => {
            // base must be an atom: a bare negative constant would re-parse as neg(pow)
            let atomic_base =
                matches!(b.kind(), Kind::Var(_)) || b.as_const().is_some_and(|c| c.is_integer() && !c.is_negative());
            if atomic_base {
                fmt_at(b, 4, f)?;
            } else {
                f.write_str("(")?;
                fmt_at(b, 0, f)?;
                f.write_str(")")?;
            }
            f.write_str("^")?;
            fmt_const(k, f)?;
        }
    }
    if paren {
        f.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_at(self, 0, f)
    }
}

/// Shorthand for building expressions from source text in tests and tables.
/// Panics on malformed input, so only use it with literals.
pub fn ex(src: &str) -> Expr {
    parse(src).unwrap_or_else(|e| panic!("bad expression literal {src:?}: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructors_fold_and_flatten() {
        let q = Expr::var(Var::Q);
        let e = Expr::sum([q.clone(), Expr::integer(2), Expr::sum([q.clone(), Expr::integer(-2)])]);
        match e.kind() {
            Kind::Sum(ts) => assert_eq!(ts.len(), 2),
            k => panic!("unexpected {k:?}"),
        }
        assert!((Expr::integer(0) * &q).is_zero());
        assert_eq!(Expr::integer(1) * &q, q);
        assert_eq!(-(-q.clone()), q);
        assert_eq!(q.pow(rat(1, 2)).powi(2), q);
    }

    #[test]
    fn printing_is_ascii() {
        let e = ex("-(40/9)*r^3/q^2 + 5*r*s/q");
        let s = e.to_string();
        assert!(s.is_ascii());
        assert_eq!(s, "(-40/9)*r^3*q^(-2) + 5*r*s*q^(-1)");
    }

    #[test]
    fn product_sign_extraction() {
        let e = Expr::product([Expr::integer(-1), Expr::var(Var::Q), Expr::var(Var::R)]);
        assert!(matches!(e.kind(), Kind::Neg(_)));
        assert_eq!(e.to_string(), "-q*r");
    }
}
