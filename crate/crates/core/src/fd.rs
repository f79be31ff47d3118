//! Central finite differences, used to validate analytic derivatives.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::tensor::Tensor3;

/// Step for differencing a function once.
pub fn first_order_step(x: &DVector<f64>) -> f64 {
    1e-6 * (1.0 + x.norm())
}

/// Step for second differences, or for differencing an analytic first derivative
/// when the result is compared against a second derivative.
pub fn second_order_step(x: &DVector<f64>) -> f64 {
    1e-4 * (1.0 + x.norm())
}

fn shifted(x: &DVector<f64>, j: usize, h: f64) -> DVector<f64> {
    let mut y = x.clone();
    y[j] += h;
    y
}

pub fn gradient<F>(mut f: F, x: &DVector<f64>, h: f64) -> Result<DVector<f64>>
where
    F: FnMut(&DVector<f64>) -> Result<f64>,
{
    let mut g = DVector::zeros(x.len());
    for j in 0..x.len() {
        g[j] = (f(&shifted(x, j, h))? - f(&shifted(x, j, -h))?) / (2.0 * h);
    }
    Ok(g)
}

/// `J[(k, j)] = ∂f_k/∂x_j`.
pub fn jacobian<F>(mut f: F, x: &DVector<f64>, h: f64) -> Result<DMatrix<f64>>
where
    F: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
{
    let mut cols = Vec::with_capacity(x.len());
    for j in 0..x.len() {
        let plus = f(&shifted(x, j, h))?;
        let minus = f(&shifted(x, j, -h))?;
        cols.push((plus - minus) / (2.0 * h));
    }
    let rows = cols.first().map_or(0, |c| c.len());
    Ok(DMatrix::from_fn(rows, x.len(), |k, j| cols[j][k]))
}

/// `T[k][i][j] = ∂J[(k, i)]/∂x_j` from an analytic Jacobian.
pub fn jacobian_derivative<F>(mut jac: F, x: &DVector<f64>, h: f64) -> Result<Tensor3>
where
    F: FnMut(&DVector<f64>) -> Result<DMatrix<f64>>,
{
    let n = x.len();
    let mut diffs = Vec::with_capacity(n);
    for j in 0..n {
        diffs.push((jac(&shifted(x, j, h))? - jac(&shifted(x, j, -h))?) / (2.0 * h));
    }
    let rows = diffs.first().map_or(0, |d| d.nrows());
    Ok(Tensor3::from_fn(rows, n, n, |k, i, j| diffs[j][(k, i)]))
}

/// Second differences of a vector-valued function: `T[k][i][j] ≈ ∂²f_k/∂x_i∂x_j`.
pub fn second_derivative<F>(mut f: F, x: &DVector<f64>, h: f64) -> Result<Tensor3>
where
    F: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
{
    let n = x.len();
    let f0 = f(x)?;
    let m = f0.len();
    let mut t = Tensor3::zeros(m, n, n);
    for i in 0..n {
        let fp = f(&shifted(x, i, h))?;
        let fm = f(&shifted(x, i, -h))?;
        let d = (fp - 2.0 * &f0 + fm) / (h * h);
        for k in 0..m {
            t.set(k, i, i, d[k]);
        }
        for j in (i + 1)..n {
            let pp = f(&shifted(&shifted(x, i, h), j, h))?;
            let pm = f(&shifted(&shifted(x, i, h), j, -h))?;
            let mp = f(&shifted(&shifted(x, i, -h), j, h))?;
            let mm = f(&shifted(&shifted(x, i, -h), j, -h))?;
            let d = (pp - pm - mp + mm) / (4.0 * h * h);
            for k in 0..m {
                t.set(k, i, j, d[k]);
                t.set(k, j, i, d[k]);
            }
        }
    }
    Ok(t)
}
