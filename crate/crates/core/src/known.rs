//! Published closed forms for the builtin equations, used as oracles.
//!
//! Coordinates are ordered `(ȳ, p̄, q̄, r̄, s̄)` (or `(ȳ, p̄, q̄, r̄)` for
//! order 4). Entries are kept exactly as printed, typos included; the
//! checks report any disagreement rather than hiding it.

use crate::expr::{ex, Expr};

fn rows(src: &[&[&str]]) -> Vec<Vec<Expr>> {
    src.iter().map(|r| r.iter().map(|s| ex(s)).collect()).collect()
}

fn symmetric(upper_triangle: &[&[&str]]) -> Vec<Vec<Expr>> {
    let n = upper_triangle.len();
    let mut m = vec![vec![Expr::zero(); n]; n];
    for (i, row) in upper_triangle.iter().enumerate() {
        for (k, s) in row.iter().enumerate() {
            let j = i + k;
            m[i][j] = ex(s);
            m[j][i] = m[i][j].clone();
        }
    }
    m
}

/// Closed forms for the conic equation of order 5.
pub mod conics5 {
    use super::*;

    pub fn p() -> Expr {
        ex("q^(1/2)")
    }

    pub fn q() -> Expr {
        ex("(1/48)*r^2/q^(5/2)")
    }

    /// `A, B, C, E, F, G, H`.
    pub fn coefficients() -> Vec<(char, Expr)> {
        [
            ('A', "-r^3/(8*q^3) + r*s/(6*q^2)"),
            ('B', "2*s/q^(1/2) - r^2/(6*q^(3/2))"),
            ('C', "18*r"),
            ('E', "s^2/(6*q^2) + r^2*s/(6*q^3) - (319/864)*r^4/q^4"),
            ('F', "(28/3)*r*s/q^(3/2) - (151/18)*r^3/q^(5/2)"),
            ('G', "24*s + r^2/q"),
            ('H', "72*q^(1/2)*r"),
        ]
        .into_iter()
        .map(|(c, s)| (c, ex(s)))
        .collect()
    }

    /// Coframe rows `e¹ … e⁵`.
    pub fn coframe() -> Vec<Vec<Expr>> {
        let e4 = "1/(24*q^(3/2))";
        let e5 = "1/(24*q^2)";
        rows(&[
            &["1", "0", "0", "0", "0"],
            &["0", "1/(4*q^(1/2))", "0", "0", "0"],
            &["-r^2/(144*q^3)", "-r/(24*q^2)", "1/(12*q)", "0", "0"],
            &[
                &format!("({e4})*(r^3/(4*q^3) - r*s/(6*q^2))"),
                &format!("({e4})*((19/24)*r^2/q^2 - s/(2*q))"),
                &format!("({e4})*(-3*r/(2*q))"),
                e4,
                "0",
            ],
            &[
                &format!("({e5})*(-s^2/(6*q^2) + r^2*s/(2*q^3) - (323/864)*r^4/q^4)"),
                &format!("({e5})*(r*s/(6*q^2) - (17/72)*r^3/q^3)"),
                &format!("({e5})*(-2*s/q + (53/12)*r^2/q^2)"),
                &format!("({e5})*(-3*r/q)"),
                e5,
            ],
        ])
    }

    pub fn g_upper() -> Vec<Vec<Expr>> {
        symmetric(&[
            &["0", "0", "0", "0", "24*q^2"],
            &["0", "0", "-24*q^2", "-72*q*r"],
            &["24*q^2", "24*q*r", "48*q*s - 32*r^2"],
            &["56*r^2 - 24*q*s", "(160/3)*r^3/q - 16*r*s"],
            &["104*s^2 - 320*r^2*s/q + (2560/9)*r^4/q^2"],
        ])
    }

    pub fn g_lower() -> Vec<Vec<Expr>> {
        symmetric(&[
            &[
                "r^2*s/(24*q^5) - 5*r^4/(162*q^6) - s^2/(72*q^4)",
                "r*s/(72*q^4) - r^3/(54*q^5)",
                "(13/72)*r^2/q^4 - s/(12*q^3)",
                "-r/(8*q^3)",
                "1/(24*q^2)",
            ],
            &["s/(24*q^3) - r^2/(18*q^4)", "r/(24*q^3)", "-1/(24*q^2)", "0"],
            &["1/(24*q^2)", "0", "0"],
            &["0", "0"],
            &["0"],
        ])
    }

    /// The first integral `g_ȳȳ`.
    pub fn first_integral() -> Expr {
        ex("r^2*s/(24*q^5) - 5*r^4/(162*q^6) - s^2/(72*q^4)")
    }

    /// The pairings `g(dX^a, dX^b)` stated one by one.
    pub fn pairings() -> Vec<((usize, usize), Expr)> {
        [
            ((0, 0), "0"),
            ((0, 1), "0"),
            ((0, 2), "0"),
            ((0, 3), "0"),
            ((1, 1), "0"),
            ((1, 2), "0"),
            ((0, 4), "24*q^2"),
            ((1, 3), "-24*q^2"),
            ((2, 2), "24*q^2"),
            ((1, 4), "-72*q*r"),
            ((2, 3), "24*q*r"),
            ((2, 4), "48*q*s - 32*r^2"),
            ((3, 3), "56*r^2 - 24*q*s"),
            ((3, 4), "(160/3)*r^3/q - 16*r*s"),
            ((4, 4), "104*s^2 - 320*r^2*s/q + (2560/9)*r^4/q^2"),
        ]
        .into_iter()
        .map(|(ij, s)| (ij, ex(s)))
        .collect()
    }

    /// `(i, j, coefficient of F_ij)` and the coefficient of `F_a` for each
    /// printed component of `G_a^bc ∇_b∇_c F`. The printed `s̄′` is taken
    /// to be the right-hand side `rhs` of the equation.
    pub fn operator_components(rhs: &Expr) -> Vec<Component> {
        let (y, p, q, r, s) = (0, 1, 2, 3, 4);
        let c = |i, j, e: &str| (i, j, ex(e));
        vec![
            Component {
                hessian: vec![
                    c(y, q, "4*q"),
                    c(y, r, "6*r"),
                    c(y, s, "8*s"),
                    c(p, p, "-2*q"),
                    c(p, q, "-2*r"),
                    c(p, r, "-2*s"),
                    (p, s, Expr::integer(-2) * rhs),
                ],
                gradient: ex("-1"),
            },
            Component {
                hessian: vec![
                    c(y, r, "6*q"),
                    c(y, s, "16*r"),
                    c(p, q, "-2*q"),
                    c(p, r, "-4*r"),
                    c(p, s, "-6*s"),
                ],
                gradient: ex("-1"),
            },
            Component {
                hessian: vec![
                    c(y, s, "4*q"),
                    c(p, r, "2*q"),
                    c(q, r, "-2*r"),
                    c(q, q, "-2*q"),
                    c(q, s, "-16*s + 80*r^2/(3*q)"),
                    c(r, r, "7*s - 40*r^3/(3*q)"),
                    c(r, s, "70*r*s/(3*q) - 400*r^3/(9*q^2)"),
                    c(s, s, "-(70/3)*s^2/q + (320/3)*r^2*s/q^2 - (3200/27)*r^4/q^3"),
                ],
                gradient: ex("-1"),
            },
            Component {
                hessian: vec![
                    c(p, s, "4*q"),
                    c(q, s, "-16*r"),
                    c(q, r, "-2*q"),
                    c(r, r, "6*r"),
                    c(r, s, "-2*s + 80*r^2/(3*q)"),
                    c(s, s, "-(80/3)*r*s/q + (640/9)*r^3/q^2"),
                ],
                gradient: ex("-1"),
            },
            Component {
                hessian: vec![
                    c(q, s, "4*q"),
                    c(r, r, "-3*q"),
                    c(r, s, "-12*r"),
                    c(s, s, "8*s - 80*r^2/(3*q)"),
                ],
                gradient: ex("-1"),
            },
        ]
    }

    /// Scalar curvature of the conic metric.
    pub const SCALAR_CURVATURE: f64 = -60.0;
}

/// One printed coordinate component of the second-order operator:
/// `Σ coefficient · F_ij + gradient · F_a`.
#[derive(Clone, Debug)]
pub struct Component {
    pub hessian: Vec<(usize, usize, Expr)>,
    pub gradient: Expr,
}

/// Closed forms for `y⁽⁵⁾ = (5/3) y⁽⁴⁾² / y⁽³⁾`.
pub mod gn5 {
    use super::*;

    pub fn p() -> Expr {
        ex("r^(1/3)")
    }

    pub fn q() -> Expr {
        Expr::zero()
    }

    pub fn coefficients() -> Vec<(char, Expr)> {
        [
            ('A', "0"),
            ('B', "4*s^2/(3*r^(5/3))"),
            ('C', "12*s/r^(1/3)"),
            ('E', "0"),
            ('F', "20*s^3/(9*r^(8/3))"),
            ('G', "20*s^2/r^(4/3)"),
            ('H', "48*s"),
        ]
        .into_iter()
        .map(|(c, s)| (c, ex(s)))
        .collect()
    }

    pub fn coframe() -> Vec<Vec<Expr>> {
        rows(&[
            &["1", "0", "0", "0", "0"],
            &["0", "1/(4*r^(1/3))", "0", "0", "0"],
            &["0", "-(s/(3*r))/(12*r^(2/3))", "1/(12*r^(2/3))", "0", "0"],
            &["0", "0", "-(s/r)/(24*r)", "1/(24*r)", "0"],
            &[
                "0",
                "0",
                "(s^2/(3*r^2))/(24*r^(4/3))",
                "-(2*s/r)/(24*r^(4/3))",
                "1/(24*r^(4/3))",
            ],
        ])
    }

    /// Dual vectors `E_i` as printed, indexed by `i − 1`; `E_2` is omitted
    /// because its printed form is not dual to the printed coframe.
    pub fn frame() -> Vec<(usize, Vec<Expr>)> {
        vec![
            (0, rows(&[&["1", "0", "0", "0", "0"]]).remove(0)),
            (
                2,
                rows(&[&["0", "0", "12*r^(2/3)", "12*r^(2/3)*s/r", "12*r^(2/3)*5*s^2/(3*r^2)"]]).remove(0),
            ),
            (3, rows(&[&["0", "0", "0", "24*r", "24*r*2*s/r"]]).remove(0)),
            (4, rows(&[&["0", "0", "0", "0", "24*r^(4/3)"]]).remove(0)),
        ]
    }

    pub fn g_lower() -> Vec<Vec<Expr>> {
        symmetric(&[
            &["0", "0", "s^2/(72*r^(10/3))", "-s/(12*r^(7/3))", "1/(24*r^(4/3))"],
            &["s^2/(216*r^(10/3))", "s/(36*r^(7/3))", "-1/(24*r^(4/3))", "0"],
            &["1/(24*r^(4/3))", "0", "0"],
            &["0", "0"],
            &["0"],
        ])
    }

    pub fn g_upper() -> Vec<Vec<Expr>> {
        symmetric(&[
            &["0", "0", "0", "0", "24*r^(4/3)"],
            &["0", "0", "-24*r^(4/3)", "-48*r^(1/3)*s"],
            &["24*r^(4/3)", "16*r^(1/3)*s", "24*r^(-2/3)*s^2"],
            &["8*r^(-2/3)*s^2", "-(32/3)*r^(-5/3)*s^3"],
            &["(40/3)*r^(-8/3)*s^4"],
        ])
    }

    pub fn pairings() -> Vec<((usize, usize), Expr)> {
        [
            ((0, 0), "0"),
            ((0, 1), "0"),
            ((0, 2), "0"),
            ((0, 3), "0"),
            ((0, 4), "24*r^(4/3)"),
            ((1, 1), "0"),
            ((1, 2), "0"),
            ((1, 3), "-24*r^(4/3)"),
            ((1, 4), "-48*r^(1/3)*s"),
        ]
        .into_iter()
        .map(|(ij, s)| (ij, ex(s)))
        .collect()
    }
}

/// Closed forms for the order 4 equation of conics through a point.
pub mod conics4 {
    use super::*;

    pub fn p() -> Expr {
        ex("q^(4/9)*(x*p - y)^(1/3)")
    }

    pub fn q() -> Expr {
        let w = "(x*p - y)";
        ex(&format!(
            "(1/(9*q^(4/9)*{w}^(1/3)))*(2*r^2/(9*q^2) + x*r/(3*{w}) - x^2*q^2/{w}^2)"
        ))
    }

    /// `B, C, D`.
    pub fn coefficients() -> Vec<(char, Expr)> {
        let w = "(x*p - y)";
        let p = "(q^(4/9)*(x*p - y)^(1/3))";
        [
            (
                'B',
                format!("{p}*(14*r^2/q^2 + (16*x*r + 27*q)/(3*{w}) - 7*x^2*q^2/{w}^2)"),
            ),
            ('C', format!("(2*q^(1/3)/{p})*(4*r*{w} + 3*x*q^2)")),
            ('D', format!("6*q^(4/3)*{w}")),
        ]
        .into_iter()
        .map(|(c, s)| (c, ex(&s)))
        .collect()
    }

    /// Coframe rows `ι³, oι², o²ι, o³` in terms of `P, Q` and `A … D`.
    pub fn coframe(p: &Expr, q: &Expr, a: &Expr, b: &Expr, c: &Expr, d: &Expr, p_prime: &Expr) -> Vec<Vec<Expr>> {
        let z = Expr::zero;
        let p2 = p.powi(2);
        let p3 = p.powi(3);
        let inv_d = d.recip();
        vec![
            vec![Expr::one(), z(), z(), z()],
            vec![z(), (Expr::integer(3) * p).recip(), z(), z()],
            {
                let k = (Expr::integer(6) * &p2).recip();
                vec![-(&k * Expr::integer(3) * p * q), -(&k * p_prime / p), k, z()]
            },
            vec![
                &inv_d * (c * q / (Expr::integer(2) * p) - a),
                &inv_d * (c * p_prime / (Expr::integer(6) * &p3) - b / (Expr::integer(3) * p)),
                -(&inv_d * c / (Expr::integer(6) * &p2)),
                inv_d,
            ],
        ]
    }

    /// Two-form coefficients `ω_ab` of `dX^a∧dX^b`, antisymmetric.
    pub fn omega() -> Vec<Vec<Expr>> {
        let w = "(x*p - y)";
        let pre = format!("1/(6*q^(4/3)*{w})");
        let yr = ex(&pre);
        let pq = ex(&format!("-{pre}"));
        let yq = ex(&format!("({pre})*(4*r/(3*q) + 2*x*q/{w})"));
        let yp = ex(&format!("-({pre})*({w}*(x*r - 3*q) - 3*x^2*q^2)/{w}^2"));
        let mut m = vec![vec![Expr::zero(); 4]; 4];
        for (a, b, e) in [(0, 1, yp), (0, 2, yq), (0, 3, yr), (1, 2, pq)] {
            m[b][a] = -&e;
            m[a][b] = e;
        }
        m
    }

    /// Coefficient of `dȳ∧dp̄∧dq̄∧dr̄` in `Ω∧Ω`.
    pub fn wedge_square() -> Expr {
        ex("-1/(18*(q^(4/9)*(x*p - y)^(1/3))^6)")
    }
}
