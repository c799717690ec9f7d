//! Named checks grouped by module, shared by the command line and tests.

use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::expr::{equiv, ex, Assignment, Expr, SampleDomain, Var, DEFAULT_SAMPLES, DEFAULT_SEED, DEFAULT_TOL};
use crate::geom::{
    frame_law_residual, pairing_chain, signature, ConnectionForms, CurvatureAtPoint, DerivedConnection, MetricField, N,
};
use crate::jet::{JetOde, BUILTINS};
use crate::known::{self, Component};
use crate::pentad::{solve_pentad, PentadData};
use crate::radon::{self, integrate_ode, RadonConfig};
use crate::report::CheckReport;
use crate::so3::{expansion_residuals, identity_residuals, GTensor};

/// Points for curvature checks.
pub const CURVATURE_POINTS: usize = 20;
/// Points for structure tensor checks.
pub const TENSOR_POINTS: usize = 10;
/// Random quadratic functions per point for the operator expansion.
pub const QUADRATIC_TRIALS: usize = 20;

/// Randomised identity testing parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Settings {
    pub seed: u64,
    pub samples: usize,
    pub tol: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            samples: DEFAULT_SAMPLES,
            tol: DEFAULT_TOL,
        }
    }
}

/// Which builtin an equation is, if any.
pub fn builtin_kind(ode: &JetOde) -> Option<&'static str> {
    let name = BUILTINS.into_iter().find(|b| *b == ode.name)?;
    let b = JetOde::builtin(name).ok()?;
    if b.order != ode.order {
        return None;
    }
    let o = equiv(&b.rhs, &ode.rhs, &b.domain, DEFAULT_SAMPLES, DEFAULT_TOL, DEFAULT_SEED).ok()?;
    o.passed.then_some(name)
}

fn coord_label(ode: &JetOde, a: usize) -> &'static str {
    ode.coords()[a].name()
}

/// Compare pairs of expressions and record the worst residual under one name.
pub fn equiv_group(
    rep: &mut CheckReport,
    s: &Settings,
    domain: &SampleDomain,
    name: &str,
    items: &[(String, Expr, Expr)],
    notes: &str,
) -> bool {
    let mut worst = 0.0f64;
    let mut failing = Vec::new();
    for (label, a, b) in items {
        match equiv(a, b, domain, s.samples, s.tol, s.seed) {
            Ok(o) => {
                worst = worst.max(o.max_residual);
                if o.max_residual > s.tol {
                    failing.push(label.as_str());
                }
            }
            Err(e) => {
                rep.error(name, s.seed, format!("{label}: {e}"));
                return false;
            }
        }
    }
    let mut n = notes.to_string();
    if !failing.is_empty() {
        if !n.is_empty() {
            n.push_str("; ");
        }
        n.push_str(&format!("mismatch: {}", failing.join(" ")));
    }
    rep.check(name, worst, s.tol, s.samples, s.seed, n)
}

fn equiv_one(
    rep: &mut CheckReport,
    s: &Settings,
    domain: &SampleDomain,
    name: &str,
    a: &Expr,
    b: &Expr,
    notes: &str,
) -> bool {
    equiv_group(rep, s, domain, name, &[(name.to_string(), a.clone(), b.clone())], notes)
}

fn matrix_items(ode: &JetOde, prefix: &str, got: &[Vec<Expr>], want: &[Vec<Expr>]) -> Vec<(String, Expr, Expr)> {
    let n = got.len();
    let mut out = Vec::new();
    for a in 0..n {
        for b in a..n {
            let label = format!("{prefix}{}{}", coord_label(ode, a), coord_label(ode, b));
            out.push((label, got[a][b].clone(), want[a][b].clone()));
        }
    }
    out
}

/// Solve for the frame, recording a failure as an error record.
pub fn solve(ode: &JetOde, s: &Settings, rep: &mut CheckReport) -> Option<PentadData> {
    match solve_pentad(ode) {
        Ok(pd) => Some(pd),
        Err(e) => {
            rep.error("pentad_solve", s.seed, e.to_string());
            None
        }
    }
}

/// Recurrence relations between the named coefficients, from `P` and `Q`.
pub fn recurrence_items(ode: &JetOde, pd: &PentadData) -> Vec<(String, Expr, Expr)> {
    let d = |e: &Expr| ode.total_derivative(e);
    let k = |n: i64| Expr::integer(n);
    let (p, q) = (&pd.p, &pd.q);
    let (p1, q1) = (d(p), d(q));
    let p2 = d(&p1);
    let c = pd.coefficients();
    let get = |ch: char| c[&ch].clone();
    let want: Vec<(char, Expr)> = if pd.order == 5 {
        vec![
            ('A', k(8) * &p1 * q + k(4) * p * &q1),
            ('B', k(4) * &p2 + k(40) * p.powi(2) * q),
            ('C', k(36) * p * &p1),
            ('E', d(&get('A')) + get('B') * q),
            ('F', d(&get('B')) + k(4) * p * get('A') + k(2) * q * get('C')),
            ('G', d(&get('C')) + k(3) * p * get('B') + k(72) * p.powi(3) * q),
            ('H', k(144) * p.powi(2) * &p1),
        ]
    } else {
        vec![
            ('A', k(3) * p * &q1 + k(6) * &p1 * q),
            ('B', k(3) * &p2 + k(21) * p.powi(2) * q),
            ('C', k(18) * p * &p1),
            ('D', k(6) * p.powi(3)),
            ('E', d(&get('A')) + get('B') * q),
            ('F', d(&get('B')) + k(3) * get('A') * p + k(2) * get('C') * q),
            ('G', d(&get('C')) + k(2) * get('B') * p + k(3) * get('D') * q),
            ('H', d(&get('D')) + get('C') * p),
        ]
    };
    want.into_iter().map(|(ch, e)| (ch.to_string(), get(ch), e)).collect()
}

/// `P`, `Q`, the coefficient equations, the coframe and, for builtins,
/// the printed closed forms.
pub fn pentad_checks(ode: &JetOde, pd: &PentadData, s: &Settings, rep: &mut CheckReport) {
    let dom = &ode.domain;
    for c in &pd.identities {
        equiv_one(
            rep,
            s,
            dom,
            &format!("residual_identity_e{}", c.slot),
            &c.lhs,
            &c.rhs,
            "",
        );
    }
    for c in &pd.solved {
        equiv_one(rep, s, dom, &format!("solved_equation_e{}", c.slot), &c.lhs, &c.rhs, "");
    }
    let n = pd.dim();
    let mut inv = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let e = Expr::sum((0..n).map(|a| &pd.coframe[i][a] * &pd.rows[a][j]));
            let want = if i == j { Expr::one() } else { Expr::zero() };
            inv.push((format!("{}{}", i + 1, j + 1), e, want));
        }
    }
    equiv_group(rep, s, dom, "coframe_inverse", &inv, "");
    equiv_group(rep, s, dom, "coefficient_recurrences", &recurrence_items(ode, pd), "");

    match builtin_kind(ode) {
        Some("conics5") => {
            equiv_one(rep, s, dom, "P_equals_q_1_2", &pd.p, &known::conics5::p(), "");
            equiv_one(rep, s, dom, "Q_equals_r2_over_48q_5_2", &pd.q, &known::conics5::q(), "");
            printed_coefficients(ode, pd, s, rep, &known::conics5::coefficients());
            printed_coframe(ode, pd, s, rep, &known::conics5::coframe());
            negative_control(s, rep);
        }
        Some("gn5") => {
            equiv_one(rep, s, dom, "P_equals_r_1_3", &pd.p, &known::gn5::p(), "");
            equiv_one(rep, s, dom, "Q_equals_0", &pd.q, &known::gn5::q(), "");
            printed_coefficients(ode, pd, s, rep, &known::gn5::coefficients());
            printed_coframe(ode, pd, s, rep, &known::gn5::coframe());
            let frame = pd.frame();
            let mut items = Vec::new();
            for (i, printed) in known::gn5::frame() {
                for a in 0..n {
                    items.push((
                        format!("E{}.{}", i + 1, coord_label(ode, a)),
                        frame[i][a].clone(),
                        printed[a].clone(),
                    ));
                }
            }
            equiv_group(rep, s, dom, "frame_printed", &items, "E2 checked by duality only");
        }
        Some("conics4") => {
            equiv_one(
                rep,
                s,
                dom,
                "P_equals_q_4_9_W_1_3",
                &pd.p,
                &known::conics4::p(),
                "W = x*p - y",
            );
            equiv_one(rep, s, dom, "Q_equals_printed", &pd.q, &known::conics4::q(), "");
            printed_coefficients(ode, pd, s, rep, &known::conics4::coefficients());
            let c = pd.coefficients();
            let kp = known::conics4::p();
            let rows = known::conics4::coframe(
                &kp,
                &known::conics4::q(),
                &c[&'A'],
                &c[&'B'],
                &c[&'C'],
                &c[&'D'],
                &ode.total_derivative(&kp),
            );
            printed_coframe(ode, pd, s, rep, &rows);
            symplectic_checks(ode, pd, s, rep);
        }
        _ => {}
    }
}

fn printed_coefficients(ode: &JetOde, pd: &PentadData, s: &Settings, rep: &mut CheckReport, printed: &[(char, Expr)]) {
    let c = pd.coefficients();
    let items: Vec<_> = printed
        .iter()
        .map(|(ch, e)| (ch.to_string(), c[ch].clone(), e.clone()))
        .collect();
    equiv_group(rep, s, &ode.domain, "coefficients_printed", &items, "");
}

fn printed_coframe(ode: &JetOde, pd: &PentadData, s: &Settings, rep: &mut CheckReport, printed: &[Vec<Expr>]) {
    let mut items = Vec::new();
    for (i, row) in printed.iter().enumerate() {
        for (a, e) in row.iter().enumerate() {
            items.push((
                format!("e{}.{}", i + 1, coord_label(ode, a)),
                pd.coframe[i][a].clone(),
                e.clone(),
            ));
        }
    }
    equiv_group(rep, s, &ode.domain, "coframe_printed", &items, "");
}

/// The conic equation with `40/9` replaced by `41/9`.
pub fn perturbed_conics5() -> JetOde {
    JetOde::new("conics5_perturbed", 5, ex("-(41/9)*r^3/q^2 + 5*r*s/q")).expect("valid equation")
}

/// Perturbing the conic equation must break at least one residual
/// identity. Recorded as a lower bound on the worst identity residual.
pub fn negative_control(s: &Settings, rep: &mut CheckReport) {
    let name = "negative_control_41_9";
    let ode = perturbed_conics5();
    let pd = match solve_pentad(&ode) {
        Ok(pd) => pd,
        Err(e) => {
            rep.check(name, 0.0, 1.0, 0, s.seed, format!("no frame: {e}"));
            return;
        }
    };
    let mut worst = 0.0f64;
    for c in &pd.identities {
        match equiv(&c.lhs, &c.rhs, &ode.domain, s.samples, s.tol, s.seed) {
            Ok(o) => worst = worst.max(o.max_residual),
            Err(e) => {
                rep.error(name, s.seed, e.to_string());
                return;
            }
        }
    }
    rep.at_least(
        name,
        worst,
        1e3 * s.tol,
        s.samples,
        s.seed,
        format!("worst identity residual {worst:.3e}"),
    );
}

/// Closure, transport and the top power of the two-form of an order 4
/// equation, and the printed form entry by entry.
pub fn symplectic_checks(ode: &JetOde, pd: &PentadData, s: &Settings, rep: &mut CheckReport) {
    let Some(form) = pd.symplectic() else { return };
    let dom = &ode.domain;
    let coords = ode.coords();
    if builtin_kind(ode) == Some("conics4") {
        let printed = known::conics4::omega();
        let mut items = Vec::new();
        for a in 0..4 {
            for b in (a + 1)..4 {
                items.push((
                    format!("{}{}", coords[a].name(), coords[b].name()),
                    form.matrix[a][b].clone(),
                    printed[a][b].clone(),
                ));
            }
        }
        equiv_group(rep, s, dom, "symplectic_printed", &items, "");
        equiv_one(
            rep,
            s,
            dom,
            "symplectic_wedge_square",
            &form.wedge_square(),
            &known::conics4::wedge_square(),
            "coefficient of dy^dp^dq^dr in the square",
        );
    }
    let closed: Vec<_> = form
        .exterior_derivative(&coords)
        .into_iter()
        .map(|((a, b, c), e)| {
            let label = format!("{}{}{}", coords[a].name(), coords[b].name(), coords[c].name());
            (label, e, Expr::zero())
        })
        .collect();
    equiv_group(rep, s, dom, "symplectic_closed", &closed, "");
    let transport: Vec<_> = form
        .transport(ode)
        .into_iter()
        .map(|((a, b), e)| (format!("{}{}", coords[a].name(), coords[b].name()), e, Expr::zero()))
        .collect();
    equiv_group(rep, s, dom, "symplectic_x_independent", &transport, "");
}

/// Curvature at each point, or an error record.
pub fn curvature_at(
    m: &MetricField,
    points: &[Assignment],
    s: &Settings,
    rep: &mut CheckReport,
) -> Option<Vec<CurvatureAtPoint>> {
    let mut out = Vec::with_capacity(points.len());
    for pt in points {
        match CurvatureAtPoint::compute(m, pt) {
            Ok(c) => out.push(c),
            Err(e) => {
                rep.error("curvature", s.seed, format!("at {:?}: {e}", pt.to_map()));
                return None;
            }
        }
    }
    Some(out)
}

fn worst(curv: &[CurvatureAtPoint], f: impl Fn(&CurvatureAtPoint) -> f64) -> f64 {
    curv.iter().map(f).fold(0.0, f64::max)
}

/// The metric of an order 5 equation: both constructions, printed forms,
/// curvature, Killing property, coordinates and connection.
pub fn geom_checks(
    ode: &JetOde,
    pd: &PentadData,
    m: &MetricField,
    points: &[Assignment],
    s: &Settings,
    rep: &mut CheckReport,
) {
    let dom = &ode.domain;
    match m.inverse_check(dom, s.samples, s.tol, s.seed) {
        Ok(o) => {
            rep.check("metric_inverse", o.max_residual, s.tol, s.samples, s.seed, "");
        }
        Err(e) => rep.error("metric_inverse", s.seed, e.to_string()),
    }
    let chain = pairing_chain(ode, &pd.p);
    equiv_group(
        rep,
        s,
        dom,
        "metric_routes_agree",
        &matrix_items(ode, "g^", &chain.upper, &m.upper),
        "frame pairing vs pairing chain",
    );
    equiv_group(rep, s, dom, "pairing_chain_consistency", &chain.consistency, "");

    let kind = builtin_kind(ode);
    let printed = match kind {
        Some("conics5") => Some((
            known::conics5::g_upper(),
            known::conics5::g_lower(),
            known::conics5::pairings(),
        )),
        Some("gn5") => Some((known::gn5::g_upper(), known::gn5::g_lower(), known::gn5::pairings())),
        _ => None,
    };
    if let Some((up, lo, pairings)) = printed {
        equiv_group(
            rep,
            s,
            dom,
            "metric_upper_printed",
            &matrix_items(ode, "g^", &m.upper, &up),
            "",
        );
        equiv_group(
            rep,
            s,
            dom,
            "metric_lower_printed",
            &matrix_items(ode, "g_", &m.lower, &lo),
            "",
        );
        let items: Vec<_> = pairings
            .into_iter()
            .map(|((a, b), e)| {
                let label = format!("{}{}", coord_label(ode, a), coord_label(ode, b));
                (label, m.upper[a][b].clone(), e)
            })
            .collect();
        equiv_group(rep, s, dom, "pairings_printed", &items, "");
    }

    let killing: Vec<_> = m.killing_residuals(ode);
    let symbolic_zero = killing.iter().filter(|(_, e)| e.is_zero()).count();
    let items: Vec<_> = killing
        .into_iter()
        .map(|((a, b), e)| {
            (
                format!("{}{}", coord_label(ode, a), coord_label(ode, b)),
                e,
                Expr::zero(),
            )
        })
        .collect();
    equiv_group(
        rep,
        s,
        dom,
        "killing_prolongation",
        &items,
        &format!("{symbolic_zero} of {} simplify to 0", items.len()),
    );
    let d_gyy = ode.total_derivative(&m.lower[0][0]).simplified();
    equiv_one(
        rep,
        s,
        dom,
        "first_integral",
        &d_gyy,
        &Expr::zero(),
        if d_gyy.is_zero() { "D(g_yy) simplifies to 0" } else { "" },
    );
    if kind == Some("conics5") {
        equiv_one(
            rep,
            s,
            dom,
            "first_integral_printed",
            &m.lower[0][0],
            &known::conics5::first_integral(),
            "",
        );
    }

    let Some(curv) = curvature_at(m, points, s, rep) else {
        return;
    };
    let np = curv.len();
    rep.check(
        "riemann_symmetries",
        worst(&curv, |c| c.symmetry_residual()),
        1e-8,
        np,
        s.seed,
        "",
    );
    rep.check(
        "bianchi_identity",
        worst(&curv, |c| c.bianchi_residual()),
        1e-8,
        np,
        s.seed,
        "",
    );
    rep.check(
        "harmonic_coordinates",
        worst(&curv, |c| c.harmonic_residual()),
        1e-8,
        np,
        s.seed,
        "g^ab Gamma^c_ab",
    );
    let split = curv
        .iter()
        .filter(|c| !matches!(signature(&c.g), (3, 2) | (2, 3)))
        .count();
    rep.check(
        "signature_3_2",
        split as f64,
        0.0,
        np,
        s.seed,
        "points with another split",
    );
    match kind {
        Some("conics5") => {
            let r = worst(&curv, |c| (c.scalar - known::conics5::SCALAR_CURVATURE).abs());
            rep.check("scalar_curvature_minus60", r, 1e-6, np, s.seed, "");
            rep.check(
                "einstein_minus12",
                worst(&curv, |c| c.einstein_residual(-12.0)),
                1e-6,
                np,
                s.seed,
                "R_ab = -12 g_ab",
            );
            connection_checks(ode, pd, m, &curv, s, rep);
        }
        Some("gn5") => {
            rep.check(
                "scalar_curvature_zero",
                worst(&curv, |c| c.scalar.abs()),
                1e-8,
                np,
                s.seed,
                "",
            );
            let smallest = curv.iter().map(|c| c.ricci_mixed_norm()).fold(f64::INFINITY, f64::min);
            rep.at_least(
                "ricci_nonzero",
                smallest,
                1e-3,
                np,
                s.seed,
                format!("smallest max|R^a_b| {smallest:.3e}"),
            );
        }
        _ => {}
    }
}

/// Connection forms read off from the Levi-Civita connection against the
/// closed forms, and the five frame laws.
pub fn connection_checks(
    ode: &JetOde,
    pd: &PentadData,
    m: &MetricField,
    curv: &[CurvatureAtPoint],
    s: &Settings,
    rep: &mut CheckReport,
) {
    let dc = DerivedConnection::new(pd, m);
    let cf = ConnectionForms::conics();
    for (name, got, want) in [
        ("connection_phi", &dc.phi, &cf.phi),
        ("connection_psi", &dc.psi, &cf.psi),
        ("chi_equals_4gamma_y_plus_delta_p", &dc.chi, &cf.chi),
    ] {
        let items: Vec<_> = (0..N)
            .map(|a| (coord_label(ode, a).to_string(), got[a].clone(), want[a].clone()))
            .collect();
        equiv_group(rep, s, &ode.domain, name, &items, "");
    }
    let mut r = 0.0f64;
    for c in curv {
        for i in 0..N {
            match frame_law_residual(&cf, &dc, c, i) {
                Ok(x) => r = r.max(x),
                Err(e) => {
                    rep.error("connection_frame_laws", s.seed, e.to_string());
                    return;
                }
            }
        }
    }
    rep.check(
        "connection_frame_laws",
        r,
        1e-8,
        curv.len(),
        s.seed,
        "five laws for nabla e^i",
    );
}

/// Printed operator components with the coefficient of `F_rr` in the
/// `dq̄` component corrected to `7s − 40r²/(3q)`.
pub fn corrected_components(rhs: &Expr) -> Vec<Component> {
    let mut comps = known::conics5::operator_components(rhs);
    for (i, j, e) in comps[2].hessian.iter_mut() {
        if (*i, *j) == (3, 3) {
            *e = ex("7*s - 40*r^2/(3*q)");
        }
    }
    comps
}

/// Exact frame constants and pointwise identities of the structure
/// tensor; for the conic equation also the parallel and curvature
/// identities and the printed operator.
pub fn so3_checks(ode: &JetOde, pd: &PentadData, m: &MetricField, s: &Settings, rep: &mut CheckReport) {
    let gt = GTensor::build(pd, m);
    let ft = &gt.frame;
    let exact = |x: num_rational::Rational64| x.to_f64().unwrap_or(f64::INFINITY).abs();
    let trace = ft.trace().iter().map(|&x| exact(x)).fold(0.0, f64::max);
    rep.check("G_trace_exact", trace, 1e-10, 1, s.seed, "frame components, exact");
    let norm = exact(ft.norm() - num_rational::Rational64::new(35, 12));
    rep.check("G_norm_35_12_exact", norm, 1e-10, 1, s.seed, "frame components, exact");
    let contraction = ft.contraction();
    let mut cr = 0.0f64;
    for i in 0..N {
        for j in 0..N {
            cr = cr.max(exact(
                contraction[i][j] - ft.g[i][j] * num_rational::Rational64::new(7, 12),
            ));
        }
    }
    rep.check(
        "G_contraction_7_12_exact",
        cr,
        1e-10,
        1,
        s.seed,
        "frame components, exact",
    );
    rep.check(
        "G0_normalisation_exact",
        exact(ft.normalisation_defect()),
        1e-10,
        1,
        s.seed,
        "frame components, exact",
    );

    let items: Vec<_> = gt
        .trace_exprs(m)
        .into_iter()
        .enumerate()
        .map(|(c, e)| (coord_label(ode, c).to_string(), e, Expr::zero()))
        .collect();
    equiv_group(rep, s, &ode.domain, "G_trace_free_symbolic", &items, "");

    let points = ode.domain.points(TENSOR_POINTS, s.seed);
    let Some(curv) = curvature_at(m, &points, s, rep) else {
        return;
    };
    let mut res = Vec::new();
    for c in &curv {
        match gt.at(c) {
            Ok(gp) => res.push(identity_residuals(&gp, c)),
            Err(e) => {
                rep.error("G_pointwise", s.seed, e.to_string());
                return;
            }
        }
    }
    let np = res.len();
    let w = |f: fn(&crate::so3::IdentityResiduals) -> f64| res.iter().map(f).fold(0.0, f64::max);
    rep.check("G_symmetric", w(|r| r.symmetry), 1e-8, np, s.seed, "");
    rep.check("G_trace_free", w(|r| r.trace), 1e-8, np, s.seed, "");
    rep.check("G_norm_35_12", w(|r| r.norm), 1e-10, np, s.seed, "");
    rep.check("G_contraction_7_12", w(|r| r.contraction), 1e-10, np, s.seed, "");
    rep.check("G0_normalisation", w(|r| r.normalisation), 1e-8, np, s.seed, "");
    if builtin_kind(ode) != Some("conics5") {
        return;
    }
    rep.check("G_parallel", w(|r| r.parallel), 1e-8, np, s.seed, "");
    rep.check("G1_curvature", w(|r| r.curvature), 1e-8, np, s.seed, "");
    rep.check("G2_decomposition", w(|r| r.decomposition), 1e-8, np, s.seed, "");
    rep.check("G4_curvature_ratio", w(|r| r.curvature_ratio), 1e-8, np, s.seed, "");

    let names = ["dy", "dp", "dq", "dr", "ds"];
    let note = "printed components; the derivative of s in the dy component is read as the right-hand side";
    for (tag, comps) in [
        ("", known::conics5::operator_components(&ode.rhs)),
        ("_corrected", corrected_components(&ode.rhs)),
    ] {
        let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
        let mut worst = [0.0f64; N];
        for c in &curv {
            match expansion_residuals(&gt, c, &comps, QUADRATIC_TRIALS, &mut rng) {
                Ok(r) => {
                    for a in 0..N {
                        worst[a] = worst[a].max(r[a]);
                    }
                }
                Err(e) => {
                    rep.error(format!("operator_expansion{tag}"), s.seed, e.to_string());
                    return;
                }
            }
        }
        let samples = np * QUADRATIC_TRIALS;
        if tag.is_empty() {
            for a in 0..N {
                rep.check(
                    format!("operator_expansion_{}", names[a]),
                    worst[a],
                    1e-8,
                    samples,
                    s.seed,
                    note,
                );
            }
        } else {
            rep.check(
                "operator_expansion_dq_corrected",
                worst[2],
                1e-8,
                samples,
                s.seed,
                "dq component with F_rr coefficient 7s - 40r^2/(3q)",
            );
        }
    }
}

/// Radon suite options.
#[derive(Clone, Debug)]
pub struct RadonOptions {
    pub functions: Vec<String>,
    pub interval: (f64, f64),
    pub jets: Vec<[f64; 5]>,
    pub x0: f64,
    pub step: f64,
    pub order: usize,
}

/// Jets at `x = 0` used when none are given.
pub const DEFAULT_JETS: [[f64; 5]; 3] = [
    [0.0, 0.0, 1.0, 0.0, 3.0],
    [0.1, 0.2, 1.1, 0.3, 2.5],
    [-0.2, 0.1, 0.9, -0.2, 3.2],
];

impl Default for RadonOptions {
    fn default() -> Self {
        let base = RadonConfig::new(Expr::one());
        Self {
            functions: ["1", "x", "y", "x*y"].map(String::from).to_vec(),
            interval: base.interval,
            jets: DEFAULT_JETS.to_vec(),
            x0: base.x0,
            step: base.h,
            order: base.order,
        }
    }
}

impl RadonOptions {
    pub fn config(&self, f: Expr) -> RadonConfig {
        let mut cfg = RadonConfig::new(f)
            .with_interval(self.interval.0, self.interval.1)
            .with_order(self.order)
            .with_step(self.step);
        cfg.x0 = self.x0;
        cfg
    }
}

fn tag(f: &str) -> String {
    let t: String = f.chars().filter(|c| c.is_ascii_alphanumeric()).collect();
    if t.is_empty() {
        "f".into()
    } else {
        t
    }
}

/// The integral formula against the second-order system, with
/// quadrature, finite-difference and integration hygiene checks.
pub fn radon_checks(
    ode: &JetOde,
    pd: &PentadData,
    m: &MetricField,
    opts: &RadonOptions,
    s: &Settings,
    rep: &mut CheckReport,
) {
    if builtin_kind(ode) != Some("conics5") {
        return;
    }
    let gt = GTensor::build(pd, m);
    let np = opts.jets.len();
    for f in &opts.functions {
        let t = tag(f);
        let fx = match crate::expr::parse(f) {
            Ok(e) => e,
            Err(e) => {
                rep.error(format!("radon_residual_{t}"), s.seed, e.to_string());
                continue;
            }
        };
        let cfg = opts.config(fx);
        match radon::verify_system(&cfg, m, &gt, &opts.jets, known::conics5::SCALAR_CURVATURE) {
            Ok(fit) => {
                let note = format!("lambda {:.9} mu {:.9}", fit.lambda, fit.mu);
                rep.check(
                    format!("radon_residual_{t}"),
                    fit.worst_residual,
                    1e-4,
                    np,
                    s.seed,
                    note.clone(),
                );
                rep.check(
                    format!("radon_lambda_spread_{t}"),
                    fit.lambda_spread,
                    1e-3,
                    np,
                    s.seed,
                    note.clone(),
                );
                if np >= 2 {
                    rep.check(
                        format!("radon_mu_{t}"),
                        fit.mu_defect,
                        1e-3,
                        np,
                        s.seed,
                        format!("{note}; |mu - (6 lambda^2 - 6)|"),
                    );
                }
            }
            Err(e) => rep.error(format!("radon_residual_{t}"), s.seed, e.to_string()),
        }
        let jet = opts.jets[0];
        let doubled = radon::radon_f(&cfg, &jet).and_then(|a| {
            radon::radon_f(&opts.config(cfg.f.clone()).with_order(2 * cfg.order), &jet).map(|b| (a - b).abs())
        });
        match doubled {
            Ok(d) => {
                rep.check(format!("radon_quadrature_doubling_{t}"), d, 1e-10, 1, s.seed, "");
            }
            Err(e) => rep.error(format!("radon_quadrature_doubling_{t}"), s.seed, e.to_string()),
        }
    }
    let cfg = opts.config(ex("x*y"));
    let jet = opts.jets[0];
    let fd = radon::derivatives(&cfg, &jet, cfg.h).and_then(|(_, g1, _)| {
        radon::derivatives(&cfg, &jet, cfg.h / 2.0).map(|(_, g2, _)| {
            g1.iter()
                .zip(&g2)
                .map(|(a, b)| (a - b).abs() / (1.0 + b.abs()))
                .fold(0.0, f64::max)
        })
    });
    match fd {
        Ok(d) => {
            rep.check(
                "radon_fd_doubling",
                d,
                1e-5,
                1,
                s.seed,
                "gradient of F for f = x*y at steps h and h/2",
            );
        }
        Err(e) => rep.error("radon_fd_doubling", s.seed, e.to_string()),
    }
    let ode_check = radon::conic_from_jet(&jet, opts.x0).and_then(|conic| {
        let branch = conic.branch_at(opts.x0, jet[0]);
        let x1 = opts.interval.1;
        let want = conic.jet_at(branch, x1)?;
        let got = integrate_ode(ode, &jet, opts.x0, x1, 1e-12)?;
        Ok(got
            .iter()
            .zip(&want)
            .map(|(a, b)| (a - b).abs() / (1.0 + b.abs()))
            .fold(0.0, f64::max))
    });
    match ode_check {
        Ok(d) => {
            rep.check(
                "radon_ode_vs_conic",
                d,
                1e-8,
                1,
                s.seed,
                "integrated jet vs closed-form conic",
            );
        }
        Err(e) => rep.error("radon_ode_vs_conic", s.seed, e.to_string()),
    }
}

/// Every suite that applies to the equation.
pub fn all_checks(ode: &JetOde, opts: &RadonOptions, s: &Settings) -> CheckReport {
    let mut rep = CheckReport::new();
    let Some(pd) = solve(ode, s, &mut rep) else { return rep };
    pentad_checks(ode, &pd, s, &mut rep);
    if pd.order == 5 {
        let m = MetricField::from_frame(&pd);
        let points = ode.domain.points(CURVATURE_POINTS, s.seed);
        geom_checks(ode, &pd, &m, &points, s, &mut rep);
        so3_checks(ode, &pd, &m, s, &mut rep);
        radon_checks(ode, &pd, &m, opts, s, &mut rep);
    }
    rep
}

/// Assignment for a point of the moduli space; `x` defaults to zero.
pub fn moduli_point(ode: &JetOde, values: &[(Var, f64)]) -> Result<Assignment, String> {
    let mut a = Assignment::new();
    a.set(Var::X, 0.0);
    for &(v, x) in values {
        if !ode.jet_vars().contains(&v) {
            return Err(format!("`{v}` is not a coordinate of an order {} equation", ode.order));
        }
        a.set(v, x);
    }
    for v in ode.coords() {
        if a.get(v).is_none() {
            return Err(format!("missing coordinate `{v}`"));
        }
    }
    Ok(a)
}
