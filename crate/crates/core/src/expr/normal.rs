//! Expanded normal form: a sum of rational multiples of monomials.
//!
//! A monomial is a product of atoms raised to rational exponents. Atoms are
//! variables, sums that could not be expanded (non-integer or negative
//! powers of a multi-term sum, content-normalised first) and positive
//! rational constants under a root that does not come out exactly.
//!
//! Splitting `(a*b)^k` into `a^k * b^k` for fractional `k` assumes positive
//! bases. Evaluation rejects fractional powers of negative numbers, so a
//! violation surfaces as an evaluation error rather than a wrong value.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{Expr, Kind, Var};

type Monomial = BTreeMap<Expr, BigRational>;
type Poly = BTreeMap<Monomial, BigRational>;

// positive integer powers of sums up to this size are multiplied out
const MAX_EXPAND_POWER: i64 = 8;

fn constant(c: BigRational) -> Poly {
    let mut p = Poly::new();
    if !c.is_zero() {
        p.insert(Monomial::new(), c);
    }
    p
}

fn add_into(acc: &mut Poly, m: Monomial, c: BigRational) {
    if c.is_zero() {
        return;
    }
    match acc.get_mut(&m) {
        Some(v) => {
            *v += c;
            if v.is_zero() {
                acc.remove(&m);
            }
        }
        None => {
            acc.insert(m, c);
        }
    }
}

fn mul_monomials(a: &Monomial, b: &Monomial) -> Monomial {
    let mut out = a.clone();
    for (atom, k) in b {
        let e = out.entry(atom.clone()).or_insert_with(BigRational::zero);
        *e += k;
        if e.is_zero() {
            out.remove(atom);
        }
    }
    out
}

fn mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            add_into(&mut out, mul_monomials(ma, mb), ca * cb);
        }
    }
    canonical(out)
}

/// Fold integer powers of constant atoms into coefficients and multiply out
/// positive integer powers of sum atoms.
fn canonical(p: Poly) -> Poly {
    let needs_work = p.keys().any(|m| m.iter().any(|(a, k)| reducible(a, k)));
    if !needs_work {
        return p;
    }
    let mut out = Poly::new();
    for (m, c) in p {
        let mut coef = constant(c);
        let mut rest = Monomial::new();
        for (atom, k) in m {
            if reducible(&atom, &k) {
                let n = k.to_integer().to_i64().unwrap();
                let base = match atom.kind() {
                    Kind::Const(c) => constant(num_traits::pow::Pow::pow(c.clone(), n as i32)),
                    _ => {
                        let b = normalize(&atom);
                        pow_int(&b, n)
                    }
                };
                coef = mul(&coef, &base);
            } else {
                rest.insert(atom, k);
            }
        }
        let mut rest_poly = Poly::new();
        rest_poly.insert(rest, BigRational::one());
        for (m2, c2) in mul(&coef, &rest_poly) {
            add_into(&mut out, m2, c2);
        }
    }
    out
}

fn reducible(atom: &Expr, k: &BigRational) -> bool {
    if !k.is_integer() {
        return false;
    }
    match atom.kind() {
        Kind::Const(c) => !c.is_zero() || k.is_positive(),
        Kind::Sum(_) => k.is_positive() && k.to_integer() <= BigInt::from(MAX_EXPAND_POWER),
        _ => false,
    }
}

fn pow_int(p: &Poly, n: i64) -> Poly {
    let mut acc = constant(BigRational::one());
    for _ in 0..n {
        acc = mul(&acc, p);
    }
    acc
}

/// Exact `c^k` when it is rational.
fn exact_root(c: &BigRational, k: &BigRational) -> Option<BigRational> {
    if k.is_integer() {
        if c.is_zero() && k.is_negative() {
            return None;
        }
        let n = k.to_integer().to_i32()?;
        return Some(num_traits::pow::Pow::pow(c.clone(), n));
    }
    if c.is_negative() {
        return None;
    }
    let b = k.denom().to_u32()?;
    let a = k.numer().to_i32()?;
    let rn = c.numer().nth_root(b);
    let rd = c.denom().nth_root(b);
    if num_traits::pow::pow(rn.clone(), b as usize) != *c.numer()
        || num_traits::pow::pow(rd.clone(), b as usize) != *c.denom()
    {
        return None;
    }
    let r = BigRational::new(rn, rd);
    if r.is_zero() && a < 0 {
        return None;
    }
    Some(num_traits::pow::Pow::pow(r, a))
}

fn atom_pow(atom: Expr, k: BigRational) -> Poly {
    let mut m = Monomial::new();
    m.insert(atom, k);
    let mut p = Poly::new();
    p.insert(m, BigRational::one());
    p
}

fn const_pow(c: &BigRational, k: &BigRational) -> Poly {
    match exact_root(c, k) {
        Some(r) => constant(r),
        None => atom_pow(Expr::constant(c.clone()), k.clone()),
    }
}

fn known_positive(atom: &Expr) -> bool {
    match atom.kind() {
        Kind::Var(v) => matches!(v, Var::Q | Var::R),
        Kind::Sum(_) | Kind::Const(_) => true,
        _ => false,
    }
}

fn power(base: &Poly, k: &BigRational) -> Poly {
    if k.is_zero() {
        return constant(BigRational::one());
    }
    if base.is_empty() {
        return if k.is_positive() {
            Poly::new()
        } else {
            atom_pow(Expr::zero(), k.clone())
        };
    }
    if base.len() == 1 {
        let (m, c) = base.iter().next().unwrap();
        if c.is_negative() && !k.is_integer() {
            return atom_pow(rebuild(base), k.clone());
        }
        let mut out = const_pow(c, k);
        let mut mono = Monomial::new();
        for (a, e) in m {
            mono.insert(a.clone(), e * k);
        }
        let mut mp = Poly::new();
        mp.insert(mono, BigRational::one());
        out = mul(&out, &mp);
        return canonical(out);
    }
    if k.is_integer() && k.is_positive() && k.to_integer() <= BigInt::from(MAX_EXPAND_POWER) {
        return pow_int(base, k.to_i64().unwrap());
    }

    // pull out the common monomial and the rational content
    let integral = k.is_integer();
    let mut common = Monomial::new();
    let atoms: std::collections::BTreeSet<&Expr> = base.keys().flat_map(|m| m.keys()).collect();
    for a in atoms {
        if !integral && !known_positive(a) {
            continue;
        }
        let min = base
            .keys()
            .map(|m| m.get(a).cloned().unwrap_or_else(BigRational::zero))
            .min()
            .unwrap();
        if !min.is_zero() {
            common.insert(a.clone(), min);
        }
    }
    let lead = base.values().next().unwrap().clone();
    let content = if integral { lead } else { lead.abs() };
    let mut inv = Monomial::new();
    for (a, e) in &common {
        inv.insert(a.clone(), -e.clone());
    }
    let mut reduced = Poly::new();
    for (m, c) in base {
        add_into(&mut reduced, mul_monomials(m, &inv), c / &content);
    }
    let mut out = const_pow(&content, k);
    let mut cm = Monomial::new();
    for (a, e) in common {
        cm.insert(a, e * k);
    }
    let mut cp = Poly::new();
    cp.insert(cm, BigRational::one());
    out = mul(&out, &cp);
    let inner = if reduced.len() == 1 {
        power(&reduced, k)
    } else {
        atom_pow(rebuild(&reduced), k.clone())
    };
    mul(&out, &inner)
}

fn normalize(e: &Expr) -> Poly {
    match e.kind() {
        Kind::Const(c) => constant(c.clone()),
        Kind::Var(_) => atom_pow(e.clone(), BigRational::one()),
        Kind::Neg(x) => normalize(x).into_iter().map(|(m, c)| (m, -c)).collect(),
        Kind::Sum(ts) => {
            let mut acc = Poly::new();
            for t in ts {
                for (m, c) in normalize(t) {
                    add_into(&mut acc, m, c);
                }
            }
            acc
        }
        Kind::Product(fs) => {
            // merge powers of a shared base before expanding anything
            let mut grouped: Vec<(Expr, BigRational)> = Vec::new();
            for f in fs {
                let (b, k) = match f.kind() {
                    Kind::Pow(b, k) => (b.clone(), k.clone()),
                    _ => (f.clone(), BigRational::one()),
                };
                match grouped.iter_mut().find(|(g, _)| *g == b) {
                    Some((_, e)) => *e += k,
                    None => grouped.push((b, k)),
                }
            }
            let mut acc = constant(BigRational::one());
            for (b, k) in grouped {
                let f = if k.is_one() {
                    normalize(&b)
                } else {
                    power(&normalize(&b), &k)
                };
                acc = mul(&acc, &f);
                if acc.is_empty() {
                    break;
                }
            }
            acc
        }
        Kind::Pow(b, k) => power(&normalize(b), k),
    }
}

fn rebuild(p: &Poly) -> Expr {
    let terms = p.iter().map(|(m, c)| {
        let factors = m.iter().map(|(a, k)| a.pow(k.clone()));
        Expr::product(std::iter::once(Expr::constant(c.clone())).chain(factors))
    });
    let terms: Vec<Expr> = terms.collect();
    Expr::sum(terms)
}

pub(super) fn simplify(e: &Expr) -> Expr {
    rebuild(&normalize(e))
}

#[cfg(test)]
mod tests {
    use crate::expr::ex;

    #[test]
    fn cancels_and_collects() {
        assert!(ex("(q + r)^2 - q^2 - 2*q*r - r^2").simplified().is_zero());
        assert_eq!(ex("q^(1/2)*q^(1/2)").simplified(), ex("q"));
        assert_eq!(ex("r/q*q").simplified(), ex("r"));
        assert_eq!(ex("4^(1/2)*q").simplified(), ex("2*q"));
    }

    #[test]
    fn sum_atoms_cancel_against_their_inverse() {
        let e = ex("(x*p - y)^(-1)*(x*p - y)^2");
        assert_eq!(e.simplified(), ex("x*p - y").simplified());
        let f = ex("(2*q + 2*r)^(-1/2) * (q + r)^(1/2)");
        assert_eq!(f.simplified(), ex("2^(-1/2)").simplified());
    }
}
