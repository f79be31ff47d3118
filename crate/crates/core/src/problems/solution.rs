use nalgebra::{DMatrix, DVector};

use crate::linops::orthonormal_basis;

/// Known minimiser set of a problem, with a distance oracle.
#[derive(Debug, Clone, PartialEq)]
pub enum SolutionSet {
    Point(DVector<f64>),
    /// `{point + basis·c}`
    Affine { point: DVector<f64>, basis: DMatrix<f64> },
    /// `{(t, sin t) : t ∈ [a, b]}`
    SineCurve { a: f64, b: f64 },
}

const GRID: usize = 4001;
const GOLDEN_TOL: f64 = 1e-10;

impl SolutionSet {
    pub fn distance(&self, x: &DVector<f64>) -> f64 {
        match self {
            SolutionSet::Point(p) => (x - p).norm(),
            SolutionSet::Affine { point, basis } => {
                let q = orthonormal_basis(basis, 1e-12);
                let d = x - point;
                (&d - &q * (q.transpose() * &d)).norm()
            }
            SolutionSet::SineCurve { a, b } => {
                let (t, d2) = nearest_on_sine(x[0], x[1], *a, *b);
                debug_assert!(t >= *a && t <= *b);
                d2.sqrt()
            }
        }
    }

    /// Orthonormal basis of the tangent space at a point of the set.
    pub fn tangent_at(&self, x: &DVector<f64>) -> DMatrix<f64> {
        match self {
            SolutionSet::Point(p) => DMatrix::zeros(p.len(), 0),
            SolutionSet::Affine { basis, .. } => orthonormal_basis(basis, 1e-12),
            SolutionSet::SineCurve { .. } => {
                let v = DVector::from_vec(vec![1.0, x[0].cos()]).normalize();
                DMatrix::from_column_slice(2, 1, v.as_slice())
            }
        }
    }

    /// A representative minimiser.
    pub fn anchor(&self) -> DVector<f64> {
        match self {
            SolutionSet::Point(p) => p.clone(),
            SolutionSet::Affine { point, .. } => point.clone(),
            SolutionSet::SineCurve { a, b } => {
                let t = 0.5 * (a + b);
                DVector::from_vec(vec![t, t.sin()])
            }
        }
    }
}

/// Dense grid over `[a, b]` followed by golden-section refinement.
fn nearest_on_sine(x1: f64, x2: f64, a: f64, b: f64) -> (f64, f64) {
    let d2 = |t: f64| (x1 - t).powi(2) + (x2 - t.sin()).powi(2);
    let h = (b - a) / (GRID - 1) as f64;
    let best = (0..GRID)
        .map(|i| a + h * i as f64)
        .min_by(|s, t| d2(*s).total_cmp(&d2(*t)))
        .expect("nonempty grid");
    let (mut lo, mut hi) = ((best - h).max(a), (best + h).min(b));
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    while hi - lo > GOLDEN_TOL {
        if d2(c) < d2(d) {
            hi = d;
        } else {
            lo = c;
        }
        c = hi - inv_phi * (hi - lo);
        d = lo + inv_phi * (hi - lo);
    }
    let t = 0.5 * (lo + hi);
    [t, a, b, best]
        .into_iter()
        .map(|s| (s, d2(s)))
        .min_by(|p, q| p.1.total_cmp(&q.1))
        .expect("nonempty")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_and_affine_distances() {
        let s = SolutionSet::Point(DVector::zeros(2));
        assert_eq!(s.distance(&DVector::from_vec(vec![3.0, 4.0])), 5.0);
        let line = SolutionSet::Affine {
            point: DVector::zeros(2),
            basis: DMatrix::from_column_slice(2, 1, &[1.0, 1.0]),
        };
        assert!((line.distance(&DVector::from_vec(vec![1.0, -1.0])) - 2f64.sqrt()).abs() < 1e-14);
        assert!(line.distance(&DVector::from_vec(vec![2.5, 2.5])) < 1e-14);
    }

    #[test]
    fn sine_curve_members_and_endpoints() {
        let s = SolutionSet::SineCurve { a: -0.5, b: 0.5 };
        for t in [-0.5, -0.1, 0.0, 0.3, 0.5] {
            assert!(s.distance(&DVector::from_vec(vec![t, t.sin()])) < 1e-9);
        }
        // beyond the right end the nearest point is the endpoint
        let x = DVector::from_vec(vec![3.0, 0.5f64.sin()]);
        assert!((s.distance(&x) - 2.5).abs() < 1e-9);
    }
}
