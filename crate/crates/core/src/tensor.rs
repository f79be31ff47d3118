//! Dense order-3 tensors, stored row-major as `[k][i][j]`.

use nalgebra::{DMatrix, DVector};

use crate::linops::sigma_max;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    dims: (usize, usize, usize),
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(d0: usize, d1: usize, d2: usize) -> Self {
        Self {
            dims: (d0, d1, d2),
            data: vec![0.0; d0 * d1 * d2],
        }
    }

    pub fn from_fn(d0: usize, d1: usize, d2: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(d0, d1, d2);
        for k in 0..d0 {
            for i in 0..d1 {
                for j in 0..d2 {
                    t.set(k, i, j, f(k, i, j));
                }
            }
        }
        t
    }

    /// Stacks `d1 × d2` matrices along the first index.
    pub fn from_slices(slices: &[DMatrix<f64>]) -> Self {
        let (d1, d2) = slices.first().map_or((0, 0), |s| s.shape());
        Self::from_fn(slices.len(), d1, d2, |k, i, j| slices[k][(i, j)])
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    #[inline]
    fn idx(&self, k: usize, i: usize, j: usize) -> usize {
        debug_assert!(k < self.dims.0 && i < self.dims.1 && j < self.dims.2);
        (k * self.dims.1 + i) * self.dims.2 + j
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[self.idx(k, i, j)]
    }

    #[inline]
    pub fn set(&mut self, k: usize, i: usize, j: usize, v: f64) {
        let at = self.idx(k, i, j);
        self.data[at] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn slice(&self, k: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.dims.1, self.dims.2, |i, j| self.get(k, i, j))
    }

    /// `Σ_k v[k] · T[k]`, contraction over the first index.
    pub fn contract_first(&self, v: &DVector<f64>) -> DMatrix<f64> {
        assert_eq!(v.len(), self.dims.0, "contraction length");
        let mut out = DMatrix::zeros(self.dims.1, self.dims.2);
        for k in 0..self.dims.0 {
            if v[k] != 0.0 {
                out += v[k] * self.slice(k);
            }
        }
        out
    }

    /// Replaces every slice by `½(S + Sᵀ)` so the last two indices commute exactly.
    pub fn symmetrize_last_two(&mut self) {
        assert_eq!(self.dims.1, self.dims.2, "slices must be square");
        for k in 0..self.dims.0 {
            for i in 0..self.dims.1 {
                for j in (i + 1)..self.dims.2 {
                    let v = 0.5 * (self.get(k, i, j) + self.get(k, j, i));
                    self.set(k, i, j, v);
                    self.set(k, j, i, v);
                }
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|v| *v *= s);
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn max_abs_diff(&self, other: &Tensor3) -> f64 {
        assert_eq!(self.dims, other.dims);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `√(Σ_k ‖T[k]‖₂²)`; an upper bound on the injective norm, exact when `d0 == 1`.
    pub fn slice_norm_bound(&self) -> f64 {
        (0..self.dims.0)
            .map(|k| sigma_max(&self.slice(k)).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// The `d0 × (d1·d2)` mode-1 matricization.
    pub fn unfold_first(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dims.0, self.dims.1 * self.dims.2, &self.data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_and_contraction() {
        let t = Tensor3::from_fn(2, 2, 3, |k, i, j| (100 * k + 10 * i + j) as f64);
        assert_eq!(t.get(1, 0, 2), 102.0);
        assert_eq!(t.slice(1)[(1, 2)], 112.0);
        let c = t.contract_first(&DVector::from_vec(vec![1.0, -1.0]));
        assert_eq!(c, DMatrix::from_element(2, 3, -100.0));
        assert_eq!(t.unfold_first()[(1, 5)], 112.0);
    }

    #[test]
    fn symmetrize_and_norms() {
        let mut t = Tensor3::from_fn(1, 2, 2, |_, i, j| if i == 0 && j == 1 { 2.0 } else { 0.0 });
        t.symmetrize_last_two();
        assert_eq!(t.get(0, 0, 1), 1.0);
        assert_eq!(t.get(0, 1, 0), 1.0);
        assert!((t.slice_norm_bound() - 1.0).abs() < 1e-14);
        assert!((t.frobenius_norm() - 2f64.sqrt()).abs() < 1e-14);
    }
}
