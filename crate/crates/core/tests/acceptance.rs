//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the lines are always printed; exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use paraconf::geom::MetricField;
use paraconf::jet::JetOde;
use paraconf::report::{CheckReport, Status};
use paraconf::suite::{self, RadonOptions, Settings};

struct Verdict {
    passed: bool,
    detail: String,
}

/// All named records must pass; the detail lists failures or the worst
/// residual relative to its tolerance.
fn require(rep: &CheckReport, names: &[&str]) -> Verdict {
    let mut failed = Vec::new();
    let mut ratio = 0.0f64;
    for n in names {
        match rep.get(n) {
            Some(r) if r.status == Status::Pass => {
                if r.tolerance > 0.0 {
                    ratio = ratio.max(r.max_residual / r.tolerance);
                }
            }
            Some(r) => failed.push(format!(
                "{n} [{} {:.3e} > {:.1e}{}]",
                r.status.as_str(),
                r.max_residual,
                r.tolerance,
                notes(&r.notes)
            )),
            None => failed.push(format!("{n} [missing]")),
        }
    }
    if failed.is_empty() {
        Verdict {
            passed: true,
            detail: format!("{} checks, worst residual/tolerance {ratio:.2e}", names.len()),
        }
    } else {
        Verdict {
            passed: false,
            detail: failed.join(", "),
        }
    }
}

fn notes(n: &str) -> String {
    if n.is_empty() {
        String::new()
    } else {
        format!("; {n}")
    }
}

fn within(v: Verdict, elapsed: Duration, limit: Duration) -> Verdict {
    let ok = elapsed <= limit;
    Verdict {
        passed: v.passed && ok,
        detail: format!(
            "{}; {:.2}s (limit {}s)",
            v.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        ),
    }
}

fn merge(a: Verdict, b: Verdict) -> Verdict {
    Verdict {
        passed: a.passed && b.passed,
        detail: format!("{}; {}", a.detail, b.detail),
    }
}

fn prefixed(rep: &CheckReport, prefix: &str) -> Vec<String> {
    let mut v: Vec<String> = rep
        .records
        .iter()
        .filter(|r| r.name.starts_with(prefix))
        .map(|r| r.name.clone())
        .collect();
    v.sort();
    v
}

fn refs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

fn main() -> ExitCode {
    let s = Settings::default();
    let odes: Vec<JetOde> = ["conics5", "gn5", "conics4"]
        .into_iter()
        .map(|n| JetOde::builtin(n).expect("builtin"))
        .collect();

    let t = Instant::now();
    let mut solve_rep = CheckReport::new();
    let pds: Vec<_> = odes.iter().map(|o| suite::solve(o, &s, &mut solve_rep)).collect();
    let solve_time = t.elapsed();
    if pds.iter().any(Option::is_none) {
        println!("frame construction failed: {}", solve_rep.to_table());
        return ExitCode::FAILURE;
    }
    let pds: Vec<_> = pds.into_iter().map(Option::unwrap).collect();

    let mut pentad: Vec<CheckReport> = Vec::new();
    let mut conics4_time = solve_time;
    for (ode, pd) in odes.iter().zip(&pds) {
        let t = Instant::now();
        let mut r = CheckReport::new();
        suite::pentad_checks(ode, pd, &s, &mut r);
        if ode.name == "conics4" {
            conics4_time = t.elapsed();
        }
        pentad.push(r);
    }

    let t = Instant::now();
    let metrics: Vec<MetricField> = pds[..2].iter().map(MetricField::from_frame).collect();
    let mut geom: Vec<CheckReport> = Vec::new();
    for i in 0..2 {
        let mut r = CheckReport::new();
        let points = odes[i].domain.points(suite::CURVATURE_POINTS, s.seed);
        suite::geom_checks(&odes[i], &pds[i], &metrics[i], &points, &s, &mut r);
        geom.push(r);
    }
    let geom_time = t.elapsed();

    let mut so3 = CheckReport::new();
    suite::so3_checks(&odes[0], &pds[0], &metrics[0], &s, &mut so3);

    let t = Instant::now();
    let mut radon = CheckReport::new();
    suite::radon_checks(&odes[0], &pds[0], &metrics[0], &RadonOptions::default(), &s, &mut radon);
    let radon_time = t.elapsed();

    let mut lines: Vec<(usize, &str, Verdict)> = Vec::new();

    lines.push((
        1,
        "pentad reconstruction",
        within(
            merge(
                merge(
                    require(&pentad[0], &["P_equals_q_1_2", "Q_equals_r2_over_48q_5_2"]),
                    require(&pentad[1], &["P_equals_r_1_3", "Q_equals_0"]),
                ),
                require(&pentad[2], &["P_equals_q_4_9_W_1_3", "Q_equals_printed"]),
            ),
            solve_time,
            Duration::from_secs(5),
        ),
    ));

    let ids: Vec<Verdict> = pentad
        .iter()
        .map(|r| {
            let names = prefixed(r, "residual_identity_");
            if names.is_empty() {
                Verdict {
                    passed: false,
                    detail: "no residual identities".into(),
                }
            } else {
                require(r, &refs(&names))
            }
        })
        .collect();
    let mut v2 = require(&pentad[0], &["negative_control_41_9"]);
    for v in ids {
        v2 = merge(v, v2);
    }
    lines.push((2, "residual identity gate", v2));

    let mut v3 = require(
        &geom[0],
        &["metric_upper_printed", "metric_lower_printed", "metric_routes_agree"],
    );
    v3 = merge(
        v3,
        require(
            &geom[1],
            &["metric_upper_printed", "metric_lower_printed", "metric_routes_agree"],
        ),
    );
    lines.push((3, "metric fidelity", v3));

    lines.push((
        4,
        "curvature",
        within(
            merge(
                require(&geom[0], &["scalar_curvature_minus60", "einstein_minus12"]),
                require(&geom[1], &["scalar_curvature_zero", "ricci_nonzero"]),
            ),
            geom_time,
            Duration::from_secs(30),
        ),
    ));

    let killing = metrics[0].killing_residuals(&odes[0]);
    let nonzero = killing.iter().filter(|(_, e)| !e.is_zero()).count();
    let exact = Verdict {
        passed: nonzero == 0,
        detail: format!("{nonzero} Killing components not identically zero"),
    };
    lines.push((
        5,
        "structure checks",
        merge(
            exact,
            require(
                &geom[0],
                &[
                    "killing_prolongation",
                    "first_integral",
                    "harmonic_coordinates",
                    "signature_3_2",
                ],
            ),
        ),
    ));

    lines.push((
        6,
        "connection",
        require(&geom[0], &["connection_frame_laws", "chi_equals_4gamma_y_plus_delta_p"]),
    ));

    lines.push((
        7,
        "SO(3) identities",
        require(
            &so3,
            &[
                "G0_normalisation",
                "G_parallel",
                "G1_curvature",
                "G2_decomposition",
                "G4_curvature_ratio",
                "G_contraction_7_12",
                "G_norm_35_12",
                "G_contraction_7_12_exact",
                "G_norm_35_12_exact",
            ],
        ),
    ));

    let v8 = require(
        &so3,
        &[
            "operator_expansion_dy",
            "operator_expansion_dp",
            "operator_expansion_dq",
            "operator_expansion_dr",
            "operator_expansion_ds",
        ],
    );
    lines.push((
        8,
        "operator expansion",
        Verdict {
            passed: v8.passed,
            detail: format!("{}; s' in the dy component read as the right-hand side", v8.detail),
        },
    ));

    let mut names9 = prefixed(&radon, "radon_residual_");
    names9.extend(prefixed(&radon, "radon_mu_"));
    names9.extend(prefixed(&radon, "radon_lambda_spread_"));
    let v9 = if names9.len() == 12 {
        require(&radon, &refs(&names9))
    } else {
        Verdict {
            passed: false,
            detail: format!("expected 12 records, found {}: {}", names9.len(), radon.to_table()),
        }
    };
    lines.push((
        9,
        "Radon verification",
        within(v9, radon_time, Duration::from_secs(120)),
    ));

    lines.push((
        10,
        "symplectic form",
        within(
            require(
                &pentad[2],
                &[
                    "symplectic_printed",
                    "symplectic_closed",
                    "symplectic_wedge_square",
                    "symplectic_x_independent",
                ],
            ),
            conics4_time,
            Duration::from_secs(10),
        ),
    ));

    let mut names11 = vec!["radon_fd_doubling".to_string(), "radon_ode_vs_conic".to_string()];
    names11.extend(prefixed(&radon, "radon_quadrature_doubling_"));
    lines.push((11, "numerics hygiene", require(&radon, &refs(&names11))));

    let mut all = true;
    for (k, title, v) in &lines {
        all &= v.passed;
        println!(
            "criterion {k:>2} {:<4} {title}: {}",
            if v.passed { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    let passed = lines.iter().filter(|(_, _, v)| v.passed).count();
    println!("acceptance: {passed}/{} criteria pass", lines.len());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
