//! Frame components of the metric and the structure tensor from products
//! of the spinor symplectic form, by literal symmetrization.
//!
//! Spinor index values are `0 = o`, `1 = ι` with `ε_01 = 1`. The frame
//! covector `e^(m+1) = o^m ι^(4−m)` corresponds to the sorted index word
//! with `m` zeros, and a totally symmetric spinor `T` has frame component
//! `C(4, m) · T[word(m)]` along it.

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};

use crate::geom::N;

pub type Frame2 = [[Rational64; N]; N];
pub type Frame3 = [[[Rational64; N]; N]; N];

fn eps(a: u8, b: u8) -> i64 {
    match (a, b) {
        (0, 1) => 1,
        (1, 0) => -1,
        _ => 0,
    }
}

fn word(m: usize) -> [u8; 4] {
    let mut w = [1u8; 4];
    for x in w.iter_mut().take(m) {
        *x = 0;
    }
    w
}

fn binomial4(m: usize) -> i64 {
    [1, 4, 6, 4, 1][m]
}

fn permutations4() -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    if (0..4).all(|i| (0..i).all(|j| p[i] != p[j])) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

/// `g_ij` from `S_(ABCD) ε_AE ε_BF ε_CG ε_DH`.
pub fn frame_metric() -> Frame2 {
    let perms = permutations4();
    let mut g = [[Rational64::zero(); N]; N];
    for (i, row) in g.iter_mut().enumerate() {
        for (j, out) in row.iter_mut().enumerate() {
            let (x, y) = (word(i), word(j));
            let total: i64 = perms
                .iter()
                .map(|s| (0..4).map(|k| eps(x[s[k]], y[k])).product::<i64>())
                .sum();
            *out = Rational64::new(total * binomial4(i) * binomial4(j), 24);
        }
    }
    g
}

/// `G_ijk` from `S_(ABCD) S_(EFGH) ε_AE ε_BF ε_GP ε_HQ ε_CR ε_DS`, made
/// symmetric in `PQRS` and then in the three slots.
pub fn frame_structure_tensor() -> Frame3 {
    let perms = permutations4();
    let mut raw = [[[Rational64::zero(); N]; N]; N];
    for i in 0..N {
        for j in 0..N {
            for k in 0..N {
                let (x, y, z) = (word(i), word(j), word(k));
                let mut total = 0i64;
                for s in &perms {
                    let xs = [x[s[0]], x[s[1]], x[s[2]], x[s[3]]];
                    for t in &perms {
                        let ys = [y[t[0]], y[t[1]], y[t[2]], y[t[3]]];
                        for u in &perms {
                            let zs = [z[u[0]], z[u[1]], z[u[2]], z[u[3]]];
                            total += eps(xs[0], ys[0])
                                * eps(xs[1], ys[1])
                                * eps(ys[2], zs[0])
                                * eps(ys[3], zs[1])
                                * eps(xs[2], zs[2])
                                * eps(xs[3], zs[3]);
                        }
                    }
                }
                let weight = binomial4(i) * binomial4(j) * binomial4(k);
                raw[i][j][k] = Rational64::new(total * weight, 24 * 24 * 24);
            }
        }
    }
    let mut out = [[[Rational64::zero(); N]; N]; N];
    for i in 0..N {
        for j in 0..N {
            for k in 0..N {
                let s = raw[i][j][k] + raw[i][k][j] + raw[j][i][k] + raw[j][k][i] + raw[k][i][j] + raw[k][j][i];
                out[i][j][k] = s / Rational64::from_integer(6);
            }
        }
    }
    out
}

/// Exact inverse of a frame metric by Gauss-Jordan elimination.
pub fn invert(g: &Frame2) -> Option<Frame2> {
    let mut a = *g;
    let mut inv = [[Rational64::zero(); N]; N];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = Rational64::one();
    }
    for col in 0..N {
        let pivot = (col..N).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let d = a[col][col];
        for k in 0..N {
            a[col][k] /= d;
            inv[col][k] /= d;
        }
        for r in 0..N {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col];
                for k in 0..N {
                    let (ack, ick) = (a[col][k], inv[col][k]);
                    a[r][k] -= f * ack;
                    inv[r][k] -= f * ick;
                }
            }
        }
    }
    Some(inv)
}

/// Exact frame-level invariants of the structure tensor.
#[derive(Clone, Debug)]
pub struct FrameTensors {
    pub g: Frame2,
    pub ginv: Frame2,
    pub big_g: Frame3,
}

impl FrameTensors {
    pub fn new() -> Self {
        let g = frame_metric();
        let ginv = invert(&g).expect("frame metric is nondegenerate");
        Self {
            g,
            ginv,
            big_g: frame_structure_tensor(),
        }
    }

    /// `g^ij G_ijk` for each `k`.
    pub fn trace(&self) -> [Rational64; N] {
        let mut out = [Rational64::zero(); N];
        for (k, o) in out.iter_mut().enumerate() {
            for i in 0..N {
                for j in 0..N {
                    *o += self.ginv[i][j] * self.big_g[i][j][k];
                }
            }
        }
        out
    }

    /// `G_efa G^ef_b`.
    pub fn contraction(&self) -> Frame2 {
        let mut out = [[Rational64::zero(); N]; N];
        for a in 0..N {
            for b in 0..N {
                let mut s = Rational64::zero();
                for e in 0..N {
                    for f in 0..N {
                        for g in 0..N {
                            for h in 0..N {
                                s += self.big_g[e][f][a] * self.big_g[g][h][b] * self.ginv[e][g] * self.ginv[f][h];
                            }
                        }
                    }
                }
                out[a][b] = s;
            }
        }
        out
    }

    /// `G_abc G^abc`.
    pub fn norm(&self) -> Rational64 {
        let c = self.contraction();
        let mut s = Rational64::zero();
        for a in 0..N {
            for b in 0..N {
                s += self.ginv[a][b] * c[a][b];
            }
        }
        s
    }

    /// Largest `|6 G^e_a(b G_cd)e − g_a(b g_cd)|` over all components.
    pub fn normalisation_defect(&self) -> Rational64 {
        let mut mixed = [[[Rational64::zero(); N]; N]; N];
        for e in 0..N {
            for a in 0..N {
                for b in 0..N {
                    for f in 0..N {
                        mixed[e][a][b] += self.ginv[e][f] * self.big_g[f][a][b];
                    }
                }
            }
        }
        let six = Rational64::from_integer(6);
        let third = Rational64::new(1, 3);
        let mut worst = Rational64::zero();
        for a in 0..N {
            for b in 0..N {
                for c in 0..N {
                    for d in 0..N {
                        let term = |b: usize, c: usize, d: usize| {
                            let mut s = Rational64::zero();
                            for e in 0..N {
                                s += mixed[e][a][b] * self.big_g[c][d][e];
                            }
                            s
                        };
                        let lhs = six * third * (term(b, c, d) + term(c, d, b) + term(d, b, c));
                        let rhs = third
                            * (self.g[a][b] * self.g[c][d] + self.g[a][c] * self.g[d][b] + self.g[a][d] * self.g[b][c]);
                        let diff = (lhs - rhs).abs();
                        if diff > worst {
                            worst = diff;
                        }
                    }
                }
            }
        }
        worst
    }
}

impl Default for FrameTensors {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::frame_pairing;

    #[test]
    fn frame_metric_is_the_pairing() {
        let g = frame_metric();
        let c = frame_pairing();
        for i in 0..N {
            for j in 0..N {
                assert_eq!(g[i][j], Rational64::from_integer(c[i][j]));
            }
        }
    }

    #[test]
    fn structure_tensor_components() {
        let t = frame_structure_tensor();
        let r = Rational64::from_integer;
        let mut nonzero = Vec::new();
        for i in 0..N {
            for j in i..N {
                for k in j..N {
                    if !t[i][j][k].is_zero() {
                        nonzero.push((i + 1, j + 1, k + 1, t[i][j][k]));
                    }
                }
            }
        }
        assert_eq!(
            nonzero,
            vec![
                (1, 3, 5, r(1)),
                (1, 4, 4, r(-2)),
                (2, 2, 5, r(-2)),
                (2, 3, 4, r(2)),
                (3, 3, 3, r(-6)),
            ]
        );
    }

    #[test]
    fn exact_traces() {
        let f = FrameTensors::new();
        assert!(f.trace().iter().all(Zero::is_zero));
        assert_eq!(f.norm(), Rational64::new(35, 12));
        let c = f.contraction();
        for a in 0..N {
            for b in 0..N {
                assert_eq!(c[a][b], Rational64::new(7, 12) * f.g[a][b]);
            }
        }
        assert!(f.normalisation_defect().is_zero());
    }
}
