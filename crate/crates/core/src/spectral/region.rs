use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Above this dimension the cube-rejection acceptance rate is too small.
const REJECTION_MAX_DIM: usize = 8;

/// A seeded ball of sample points. The center is always the first sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub center: Vec<f64>,
    pub radius: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Region {
    pub fn new(center: DVector<f64>, radius: f64, samples: usize, seed: u64) -> Result<Self> {
        let r = Self {
            center: center.as_slice().to_vec(),
            radius,
            samples,
            seed,
        };
        r.validate()?;
        Ok(r)
    }

    /// A single-point region at `center`.
    pub fn point(center: DVector<f64>) -> Self {
        Self {
            center: center.as_slice().to_vec(),
            radius: 1.0,
            samples: 1,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidParam("region needs at least one sample".into()));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidParam(format!("region radius must be positive, got {}", self.radius)));
        }
        if self.center.is_empty() || self.center.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParam("region center must be a finite nonempty vector".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn points(&self) -> Result<Vec<DVector<f64>>> {
        self.validate()?;
        let d = self.dim();
        let center = DVector::from_column_slice(&self.center);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::with_capacity(self.samples);
        out.push(center.clone());
        while out.len() < self.samples {
            let offset = if d <= REJECTION_MAX_DIM {
                loop {
                    let y = DVector::from_fn(d, |_, _| rng.random_range(-1.0..=1.0));
                    if y.norm_squared() <= 1.0 {
                        break y;
                    }
                }
            } else {
                let g = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
                let u: f64 = rng.random();
                g.normalize() * u.powf(1.0 / d as f64)
            };
            out.push(&center + offset * self.radius);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_stay_in_ball_and_are_seeded() {
        for d in [1, 3, 12] {
            let r = Region::new(DVector::from_element(d, 1.0), 0.5, 50, 9).unwrap();
            let pts = r.points().unwrap();
            assert_eq!(pts.len(), 50);
            assert_eq!(pts[0], DVector::from_element(d, 1.0));
            for p in &pts {
                assert!((p - &pts[0]).norm() <= 0.5 + 1e-12);
            }
            assert_eq!(pts, r.points().unwrap());
        }
    }

    #[test]
    fn invalid_regions() {
        assert!(Region::new(DVector::zeros(2), 0.0, 3, 0).is_err());
        assert!(Region::new(DVector::zeros(2), 1.0, 0, 0).is_err());
    }
}
