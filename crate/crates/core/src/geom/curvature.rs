use nalgebra::SMatrix;

use super::MetricField;
use crate::expr::{Assignment, EvalError};

pub const N: usize = 5;

pub type Mat = [[f64; N]; N];
pub type Tensor3 = [[[f64; N]; N]; N];
pub type Tensor4 = [[[[f64; N]; N]; N]; N];

#[derive(Debug, thiserror::Error)]
pub enum GeomError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("metric is singular at the point")]
    Singular,
}

/// Connection and curvature of a metric at one point.
#[derive(Clone, Debug)]
pub struct CurvatureAtPoint {
    pub point: Assignment,
    pub g: Mat,
    pub ginv: Mat,
    /// `dg[c][a][b] = ∂_c g_ab`.
    pub dg: Tensor3,
    /// `gamma[c][a][b] = Γ^c_ab`.
    pub gamma: Tensor3,
    /// `riemann[a][b][c][d] = R^a_bcd`.
    pub riemann: Tensor4,
    /// All indices down: `R_abcd = g_ae R^e_bcd`.
    pub riemann_lower: Tensor4,
    pub ricci: Mat,
    pub scalar: f64,
}

fn invert(g: &Mat) -> Result<Mat, GeomError> {
    let m = SMatrix::<f64, N, N>::from_fn(|i, j| g[i][j]);
    let inv = m.try_inverse().ok_or(GeomError::Singular)?;
    if inv.iter().any(|x| !x.is_finite()) {
        return Err(GeomError::Singular);
    }
    let mut out = [[0.0; N]; N];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = inv[(i, j)];
        }
    }
    Ok(out)
}

impl CurvatureAtPoint {
    pub fn compute(m: &MetricField, pt: &Assignment) -> Result<Self, GeomError> {
        let g = m.lower_at(pt)?;
        let ginv = invert(&g)?;
        let mut dg = [[[0.0; N]; N]; N];
        let mut ddg = [[[[0.0; N]; N]; N]; N];
        for c in 0..N {
            for a in 0..N {
                for b in a..N {
                    dg[c][a][b] = m.d1[c][a][b].eval(pt)?;
                    dg[c][b][a] = dg[c][a][b];
                }
            }
        }
        for c in 0..N {
            for d in c..N {
                for a in 0..N {
                    for b in a..N {
                        let v = m.d2[c][d][a][b].eval(pt)?;
                        ddg[c][d][a][b] = v;
                        ddg[c][d][b][a] = v;
                        ddg[d][c][a][b] = v;
                        ddg[d][c][b][a] = v;
                    }
                }
            }
        }

        // first-kind symbols and their derivatives
        let mut gam1 = [[[0.0; N]; N]; N];
        let mut dgam1 = [[[[0.0; N]; N]; N]; N];
        for d in 0..N {
            for a in 0..N {
                for b in 0..N {
                    gam1[d][a][b] = 0.5 * (dg[a][d][b] + dg[b][d][a] - dg[d][a][b]);
                    for e in 0..N {
                        dgam1[e][d][a][b] = 0.5 * (ddg[e][a][d][b] + ddg[e][b][d][a] - ddg[e][d][a][b]);
                    }
                }
            }
        }
        // ∂_e g^{cd} = −g^{cf} ∂_e g_fh g^{hd}
        let mut dginv = [[[0.0; N]; N]; N];
        for e in 0..N {
            for c in 0..N {
                for d in 0..N {
                    let mut s = 0.0;
                    for f in 0..N {
                        for h in 0..N {
                            s -= ginv[c][f] * dg[e][f][h] * ginv[h][d];
                        }
                    }
                    dginv[e][c][d] = s;
                }
            }
        }
        let mut gamma = [[[0.0; N]; N]; N];
        let mut dgamma = [[[[0.0; N]; N]; N]; N];
        for c in 0..N {
            for a in 0..N {
                for b in 0..N {
                    let mut s = 0.0;
                    for d in 0..N {
                        s += ginv[c][d] * gam1[d][a][b];
                    }
                    gamma[c][a][b] = s;
                    for e in 0..N {
                        let mut t = 0.0;
                        for d in 0..N {
                            t += dginv[e][c][d] * gam1[d][a][b] + ginv[c][d] * dgam1[e][d][a][b];
                        }
                        dgamma[e][c][a][b] = t;
                    }
                }
            }
        }

        // R^a_bcd = ∂_c Γ^a_db − ∂_d Γ^a_cb + Γ^a_ce Γ^e_db − Γ^a_de Γ^e_cb
        let mut riemann = [[[[0.0; N]; N]; N]; N];
        for a in 0..N {
            for b in 0..N {
                for c in 0..N {
                    for d in 0..N {
                        let mut s = dgamma[c][a][d][b] - dgamma[d][a][c][b];
                        for e in 0..N {
                            s += gamma[a][c][e] * gamma[e][d][b] - gamma[a][d][e] * gamma[e][c][b];
                        }
                        riemann[a][b][c][d] = s;
                    }
                }
            }
        }
        let mut riemann_lower = [[[[0.0; N]; N]; N]; N];
        for a in 0..N {
            for b in 0..N {
                for c in 0..N {
                    for d in 0..N {
                        riemann_lower[a][b][c][d] = (0..N).map(|e| g[a][e] * riemann[e][b][c][d]).sum();
                    }
                }
            }
        }
        let mut ricci = [[0.0; N]; N];
        for a in 0..N {
            for b in 0..N {
                ricci[a][b] = (0..N).map(|c| riemann[c][a][c][b]).sum();
            }
        }
        let mut scalar = 0.0;
        for a in 0..N {
            for b in 0..N {
                scalar += ginv[a][b] * ricci[a][b];
            }
        }
        Ok(Self {
            point: *pt,
            g,
            ginv,
            dg,
            gamma,
            riemann,
            riemann_lower,
            ricci,
            scalar,
        })
    }

    fn riemann_scale(&self) -> f64 {
        self.riemann_lower
            .iter()
            .flatten()
            .flatten()
            .flatten()
            .fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// Worst violation of `R_abcd = −R_bacd = −R_abdc = R_cdab`, relative
    /// to the largest component.
    pub fn symmetry_residual(&self) -> f64 {
        let r = &self.riemann_lower;
        let mut worst = 0.0f64;
        for a in 0..N {
            for b in 0..N {
                for c in 0..N {
                    for d in 0..N {
                        let x = r[a][b][c][d];
                        worst = worst
                            .max((x + r[b][a][c][d]).abs())
                            .max((x + r[a][b][d][c]).abs())
                            .max((x - r[c][d][a][b]).abs());
                    }
                }
            }
        }
        worst / (1.0 + self.riemann_scale())
    }

    /// Worst violation of `R_a[bcd] = 0`, relative to the largest component.
    pub fn bianchi_residual(&self) -> f64 {
        let r = &self.riemann_lower;
        let mut worst = 0.0f64;
        for a in 0..N {
            for b in 0..N {
                for c in 0..N {
                    for d in 0..N {
                        worst = worst.max((r[a][b][c][d] + r[a][c][d][b] + r[a][d][b][c]).abs());
                    }
                }
            }
        }
        worst / (1.0 + self.riemann_scale())
    }

    /// `max |R_ab − k g_ab| / (1 + max |k g_ab|)`.
    pub fn einstein_residual(&self, k: f64) -> f64 {
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for a in 0..N {
            for b in 0..N {
                num = num.max((self.ricci[a][b] - k * self.g[a][b]).abs());
                den = den.max((k * self.g[a][b]).abs()).max(self.ricci[a][b].abs());
            }
        }
        num / (1.0 + den)
    }

    /// Largest Ricci component measured in an orthonormal-like scale:
    /// `sqrt(R_ab R^ab)` is indefinite, so use `max |R^a_b|`.
    pub fn ricci_mixed_norm(&self) -> f64 {
        let mut m = 0.0f64;
        for a in 0..N {
            for b in 0..N {
                let v: f64 = (0..N).map(|c| self.ginv[a][c] * self.ricci[c][b]).sum();
                m = m.max(v.abs());
            }
        }
        m
    }

    /// `g^ab Γ^c_ab` for each `c`, each relative to its largest summand.
    pub fn harmonic_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for c in 0..N {
            let mut s = 0.0;
            let mut scale = 0.0f64;
            for a in 0..N {
                for b in 0..N {
                    let t = self.ginv[a][b] * self.gamma[c][a][b];
                    s += t;
                    scale = scale.max(t.abs());
                }
            }
            worst = worst.max(s.abs() / (1.0 + scale));
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{ex, Expr, Var};

    /// Round 2-sphere in stereographic-like coordinates embedded in the
    /// first two slots, flat elsewhere: scalar curvature 2.
    #[test]
    fn sphere_block_has_scalar_curvature_two() {
        let coords = vec![Var::Y, Var::P, Var::Q, Var::R, Var::S];
        let conf = ex("4*(1 + y^2 + p^2)^(-2)");
        let mut lower = vec![vec![Expr::zero(); N]; N];
        let mut upper = vec![vec![Expr::zero(); N]; N];
        for i in 0..N {
            let (l, u) = if i < 2 {
                (conf.clone(), conf.recip())
            } else {
                (Expr::one(), Expr::one())
            };
            lower[i][i] = l;
            upper[i][i] = u;
        }
        let m = MetricField::new(coords, lower, upper);
        let pt = Assignment::from_point([0.0, 0.3, -0.2, 1.0, 1.0, 0.0]);
        let k = CurvatureAtPoint::compute(&m, &pt).unwrap();
        assert!((k.scalar - 2.0).abs() < 1e-10, "{}", k.scalar);
        assert!(k.symmetry_residual() < 1e-12);
        assert!(k.bianchi_residual() < 1e-12);
    }
}
