//! The structure tensor `G_abc` of the conic metric and its identities.
//!
//! Frame components come from [`spinor`]; coordinate components follow by
//! contracting with the coframe. Pointwise checks use symbolic derivatives
//! of the coframe and the Christoffel symbols from
//! [`CurvatureAtPoint`].

pub mod operator;
pub mod spinor;

pub use operator::{expansion_residuals, hor_operator, mu_lambda, HorOperatorValue};
pub use spinor::FrameTensors;

use num_traits::ToPrimitive;

use crate::expr::{rat, Assignment, EvalError, Expr, Var};
use crate::geom::{CurvatureAtPoint, MetricField, N};
use crate::pentad::PentadData;

pub type Mat = [[f64; N]; N];
pub type Tensor3 = [[[f64; N]; N]; N];
pub type Tensor4 = [[[[f64; N]; N]; N]; N];

/// Structure tensor over the coordinates of the moduli space.
#[derive(Clone, Debug)]
pub struct GTensor {
    pub frame: FrameTensors,
    /// Nonzero frame components `(i, j, k, Ĝ_ijk)` as floats.
    entries: Vec<(usize, usize, usize, f64)>,
    pub coframe: Vec<Vec<Expr>>,
    /// `dcoframe[i][a][b] = ∂_a e^i_b`.
    pub dcoframe: Vec<Vec<Vec<Expr>>>,
    pub coords: Vec<Var>,
}

/// `G` and its first derivatives at a point, in coordinates.
#[derive(Clone, Debug)]
pub struct GAtPoint {
    /// `G_abc`.
    pub lower: Tensor3,
    /// `G^abc`.
    pub upper: Tensor3,
    /// `G_a^bc`.
    pub mixed: Tensor3,
    /// `G^a_bc`.
    pub raised_first: Tensor3,
    /// `∂_a G_bcd`.
    pub dlower: Tensor4,
}

impl GTensor {
    pub fn build(pd: &PentadData, m: &MetricField) -> Self {
        let frame = FrameTensors::new();
        let mut entries = Vec::new();
        for i in 0..N {
            for j in 0..N {
                for k in 0..N {
                    let v = frame.big_g[i][j][k].to_f64().unwrap_or(0.0);
                    if v != 0.0 {
                        entries.push((i, j, k, v));
                    }
                }
            }
        }
        let coframe = pd.coframe.clone();
        let dcoframe = coframe
            .iter()
            .map(|row| {
                m.coords
                    .iter()
                    .map(|&v| row.iter().map(|e| e.diff(v)).collect())
                    .collect()
            })
            .collect();
        Self {
            frame,
            entries,
            coframe,
            dcoframe,
            coords: m.coords.clone(),
        }
    }

    /// `G_abc` as an expression (not simplified).
    pub fn component(&self, a: usize, b: usize, c: usize) -> Expr {
        let k = &self.coframe;
        Expr::sum(
            self.entries
                .iter()
                .filter(|&&(i, j, l, _)| !k[i][a].is_zero() && !k[j][b].is_zero() && !k[l][c].is_zero())
                .map(|&(i, j, l, _)| {
                    let w = self.frame.big_g[i][j][l];
                    Expr::constant(rat(*w.numer(), *w.denom())) * &k[i][a] * &k[j][b] * &k[l][c]
                })
                .collect::<Vec<_>>(),
        )
    }

    /// `g^ab G_abc` for each `c`, as expressions.
    pub fn trace_exprs(&self, m: &MetricField) -> Vec<Expr> {
        (0..N)
            .map(|c| {
                let mut t = Vec::new();
                for a in 0..N {
                    for b in 0..N {
                        if !m.upper[a][b].is_zero() {
                            t.push(&m.upper[a][b] * self.component(a, b, c));
                        }
                    }
                }
                Expr::sum(t)
            })
            .collect()
    }

    pub fn at(&self, curv: &CurvatureAtPoint) -> Result<GAtPoint, EvalError> {
        let pt: &Assignment = &curv.point;
        let mut k = [[0.0; N]; N];
        let mut dk = [[[0.0; N]; N]; N];
        for i in 0..N {
            for a in 0..N {
                k[i][a] = self.coframe[i][a].eval(pt)?;
                for b in 0..N {
                    dk[i][a][b] = self.dcoframe[i][a][b].eval(pt)?;
                }
            }
        }
        let mut lower = [[[0.0; N]; N]; N];
        let mut dlower = [[[[0.0; N]; N]; N]; N];
        for &(i, j, l, v) in &self.entries {
            for b in 0..N {
                for c in 0..N {
                    for d in 0..N {
                        lower[b][c][d] += v * k[i][b] * k[j][c] * k[l][d];
                        for a in 0..N {
                            dlower[a][b][c][d] += v
                                * (dk[i][a][b] * k[j][c] * k[l][d]
                                    + k[i][b] * dk[j][a][c] * k[l][d]
                                    + k[i][b] * k[j][c] * dk[l][a][d]);
                        }
                    }
                }
            }
        }
        let gi = &curv.ginv;
        let raise = |t: &Tensor3, slot: usize| {
            let mut out = [[[0.0; N]; N]; N];
            for a in 0..N {
                for b in 0..N {
                    for c in 0..N {
                        let mut s = 0.0;
                        for e in 0..N {
                            s += match slot {
                                0 => gi[a][e] * t[e][b][c],
                                1 => gi[b][e] * t[a][e][c],
                                _ => gi[c][e] * t[a][b][e],
                            };
                        }
                        out[a][b][c] = s;
                    }
                }
            }
            out
        };
        let raised_first = raise(&lower, 0);
        let mixed = raise(&raise(&lower, 1), 2);
        let upper = raise(&mixed, 0);
        Ok(GAtPoint {
            lower,
            upper,
            mixed,
            raised_first,
            dlower,
        })
    }
}

fn max_abs<'a, I: IntoIterator<Item = &'a f64>>(it: I) -> f64 {
    it.into_iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn flat3(t: &Tensor3) -> impl Iterator<Item = &f64> {
    t.iter().flatten().flatten()
}

fn flat4(t: &Tensor4) -> impl Iterator<Item = &f64> {
    t.iter().flatten().flatten().flatten()
}

/// `max |lhs − rhs| / (1 + max(|lhs|, |rhs|))` over paired components.
fn relative<'a>(pairs: impl Iterator<Item = (&'a f64, &'a f64)>) -> f64 {
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for (a, b) in pairs {
        num = num.max((a - b).abs());
        den = den.max(a.abs()).max(b.abs());
    }
    num / (1.0 + den)
}

/// `χ_abcd = 6 G^e_ab G_cde`.
fn chi(gp: &GAtPoint) -> Tensor4 {
    let mut out = [[[[0.0; N]; N]; N]; N];
    for a in 0..N {
        for b in 0..N {
            for c in 0..N {
                for d in 0..N {
                    out[a][b][c][d] = 6.0
                        * (0..N)
                            .map(|e| gp.raised_first[e][a][b] * gp.lower[c][d][e])
                            .sum::<f64>();
                }
            }
        }
    }
    out
}

/// `g_a(b g_cd)`, which is already symmetric in all four slots.
fn sym_gg(g: &Mat) -> Tensor4 {
    let mut out = [[[[0.0; N]; N]; N]; N];
    for a in 0..N {
        for b in 0..N {
            for c in 0..N {
                for d in 0..N {
                    out[a][b][c][d] = (g[a][b] * g[c][d] + g[a][c] * g[b][d] + g[a][d] * g[b][c]) / 3.0;
                }
            }
        }
    }
    out
}

/// Residuals of the pointwise identities at one point.
#[derive(Clone, Copy, Debug, Default)]
pub struct IdentityResiduals {
    pub symmetry: f64,
    pub trace: f64,
    pub norm: f64,
    pub contraction: f64,
    pub normalisation: f64,
    pub parallel: f64,
    pub curvature: f64,
    pub decomposition: f64,
    pub curvature_ratio: f64,
}

pub fn identity_residuals(gp: &GAtPoint, curv: &CurvatureAtPoint) -> IdentityResiduals {
    let g = &curv.g;
    let gi = &curv.ginv;
    let lo = &gp.lower;

    let mut symmetry = 0.0f64;
    for a in 0..N {
        for b in 0..N {
            for c in 0..N {
                symmetry = symmetry
                    .max((lo[a][b][c] - lo[b][a][c]).abs())
                    .max((lo[a][b][c] - lo[a][c][b]).abs());
            }
        }
    }
    let scale = max_abs(flat3(lo));
    symmetry /= 1.0 + scale;

    let mut trace = 0.0f64;
    for c in 0..N {
        let mut s = 0.0;
        let mut sc = 0.0f64;
        for a in 0..N {
            for b in 0..N {
                let t = gi[a][b] * lo[a][b][c];
                s += t;
                sc = sc.max(t.abs());
            }
        }
        trace = trace.max(s.abs() / (1.0 + sc));
    }

    let mut contr = [[0.0; N]; N];
    let mut full = 0.0;
    for a in 0..N {
        for b in 0..N {
            let mut s = 0.0;
            for e in 0..N {
                for f in 0..N {
                    s += lo[e][f][a] * (0..N).map(|h| gi[e][h] * gp.raised_first[f][h][b]).sum::<f64>();
                }
            }
            contr[a][b] = s;
        }
    }
    for a in 0..N {
        for b in 0..N {
            for c in 0..N {
                full += lo[a][b][c] * gp.upper[a][b][c];
            }
        }
    }
    let norm = (full - 35.0 / 12.0).abs() / (1.0 + 35.0 / 12.0);
    let want: Vec<f64> = g.iter().flatten().map(|x| 7.0 / 12.0 * x).collect();
    let contraction = relative(contr.iter().flatten().zip(want.iter()));

    let ch = chi(gp);
    let gg = sym_gg(g);
    let mut sym_chi = [[[[0.0; N]; N]; N]; N];
    for a in 0..N {
        for b in 0..N {
            for c in 0..N {
                for d in 0..N {
                    sym_chi[a][b][c][d] = (ch[a][b][c][d] + ch[a][c][d][b] + ch[a][d][b][c]) / 3.0;
                }
            }
        }
    }
    let normalisation = relative(flat4(&sym_chi).zip(flat4(&gg)));

    let gam = &curv.gamma;
    let mut nabla = [[[[0.0; N]; N]; N]; N];
    for a in 0..N {
        for b in 0..N {
            for c in 0..N {
                for d in 0..N {
                    let mut s = gp.dlower[a][b][c][d];
                    for e in 0..N {
                        s -= gam[e][a][b] * lo[e][c][d] + gam[e][a][c] * lo[b][e][d] + gam[e][a][d] * lo[b][c][e];
                    }
                    nabla[a][b][c][d] = s;
                }
            }
        }
    }
    let parallel = max_abs(flat4(&nabla)) / (1.0 + max_abs(flat4(&gp.dlower)));

    // R_abc^d in the convention [∇_a, ∇_b] V^d = R_abc^d V^c
    let rm = |a: usize, b: usize, c: usize, d: usize| curv.riemann[d][c][a][b];
    let mut worst = 0.0f64;
    let mut sc = 0.0f64;
    for a in 0..N {
        for b in 0..N {
            let mut t = [[[0.0; N]; N]; N];
            for d in 0..N {
                for e in 0..N {
                    for f in 0..N {
                        t[d][e][f] = (0..N).map(|c| rm(a, b, c, d) * gp.upper[e][f][c]).sum();
                    }
                }
            }
            sc = sc.max(max_abs(flat3(&t)));
            for d in 0..N {
                for e in 0..N {
                    for f in 0..N {
                        worst = worst.max((t[d][e][f] + t[e][f][d] + t[f][d][e]).abs());
                    }
                }
            }
        }
    }
    let curvature = worst / (1.0 + sc);

    // F_bcad = χ_a[bc]d
    let f_low = |b: usize, c: usize, a: usize, d: usize| 0.5 * (ch[a][b][c][d] - ch[a][c][b][d]);
    let mut rhs = [[[[0.0; N]; N]; N]; N];
    for a in 0..N {
        for b in 0..N {
            for c in 0..N {
                for d in 0..N {
                    rhs[a][b][c][d] = gg[a][b][c][d] + 2.0 / 3.0 * f_low(b, c, a, d) + 2.0 / 3.0 * f_low(b, d, a, c);
                }
            }
        }
    }
    let decomposition = relative(flat4(&ch).zip(flat4(&rhs)));

    // F^cd_pq with the first pair raised
    let mut f_low_t = [[[[0.0; N]; N]; N]; N];
    for c in 0..N {
        for d in 0..N {
            for p in 0..N {
                for q in 0..N {
                    f_low_t[c][d][p][q] = f_low(c, d, p, q);
                }
            }
        }
    }
    let mut f_up = [[[[0.0; N]; N]; N]; N];
    for c in 0..N {
        for d in 0..N {
            for p in 0..N {
                for q in 0..N {
                    let mut s = 0.0;
                    for e in 0..N {
                        for h in 0..N {
                            s += gi[c][e] * gi[d][h] * f_low_t[e][h][p][q];
                        }
                    }
                    f_up[c][d][p][q] = s;
                }
            }
        }
    }
    let r = &curv.riemann_lower;
    let mut lhs = [[[[0.0; N]; N]; N]; N];
    let mut want4 = [[[[0.0; N]; N]; N]; N];
    for a in 0..N {
        for b in 0..N {
            for p in 0..N {
                for q in 0..N {
                    let mut s = 0.0;
                    for c in 0..N {
                        for d in 0..N {
                            s += r[a][b][c][d] * f_up[c][d][p][q];
                        }
                    }
                    lhs[a][b][p][q] = s;
                    want4[a][b][p][q] = 1.75 * r[a][b][p][q];
                }
            }
        }
    }
    let curvature_ratio = relative(flat4(&lhs).zip(flat4(&want4)));

    IdentityResiduals {
        symmetry,
        trace,
        norm,
        contraction,
        normalisation,
        parallel,
        curvature,
        decomposition,
        curvature_ratio,
    }
}
