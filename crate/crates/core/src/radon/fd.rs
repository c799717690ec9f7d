//! Central finite differences with one level of Richardson extrapolation.

use crate::geom::N;

pub type Point = [f64; N];

fn shifted(x: &Point, moves: &[(usize, f64)]) -> Point {
    let mut y = *x;
    for &(i, d) in moves {
        y[i] += d;
    }
    y
}

fn raw<E>(f: &mut impl FnMut(&Point) -> Result<f64, E>, x: &Point, h: f64) -> Result<(Point, [[f64; N]; N]), E> {
    let f0 = f(x)?;
    let mut grad = [0.0; N];
    let mut hess = [[0.0; N]; N];
    for i in 0..N {
        let fp = f(&shifted(x, &[(i, h)]))?;
        let fm = f(&shifted(x, &[(i, -h)]))?;
        grad[i] = (fp - fm) / (2.0 * h);
        hess[i][i] = (fp - 2.0 * f0 + fm) / (h * h);
    }
    for i in 0..N {
        for j in (i + 1)..N {
            let pp = f(&shifted(x, &[(i, h), (j, h)]))?;
            let pm = f(&shifted(x, &[(i, h), (j, -h)]))?;
            let mp = f(&shifted(x, &[(i, -h), (j, h)]))?;
            let mm = f(&shifted(x, &[(i, -h), (j, -h)]))?;
            hess[i][j] = (pp - pm - mp + mm) / (4.0 * h * h);
            hess[j][i] = hess[i][j];
        }
    }
    Ok((grad, hess))
}

/// Gradient and Hessian from steps `h` and `h/2`, combined to cancel the
/// leading `O(h²)` error.
pub fn gradient_hessian<E>(
    mut f: impl FnMut(&Point) -> Result<f64, E>,
    x: &Point,
    h: f64,
) -> Result<(Point, [[f64; N]; N]), E> {
    let (g1, h1) = raw(&mut f, x, h)?;
    let (g2, h2) = raw(&mut f, x, h / 2.0)?;
    let mut grad = [0.0; N];
    let mut hess = [[0.0; N]; N];
    for i in 0..N {
        grad[i] = (4.0 * g2[i] - g1[i]) / 3.0;
        for j in 0..N {
            hess[i][j] = (4.0 * h2[i][j] - h1[i][j]) / 3.0;
        }
    }
    Ok((grad, hess))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_derivatives() {
        let f = |x: &Point| -> Result<f64, ()> { Ok(x[0].powi(3) + x[0] * x[1] * x[4] + (x[2] * x[3]).sin()) };
        let x = [0.3, -0.2, 0.7, 1.1, 0.5];
        let (g, h) = gradient_hessian(f, &x, 1e-3).unwrap();
        assert!((g[0] - (3.0 * 0.09 + -0.2 * 0.5)).abs() < 1e-9);
        assert!((h[0][0] - 6.0 * 0.3).abs() < 1e-7);
        assert!((h[0][4] + 0.2).abs() < 1e-7);
        let c = (0.7f64 * 1.1).cos();
        let s = (0.7f64 * 1.1).sin();
        assert!((h[2][3] - (c - 0.77 * s)).abs() < 1e-7);
    }
}
