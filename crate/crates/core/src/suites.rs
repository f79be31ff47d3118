//! Seeded property suites over the random families. Every instance gets its
//! own seed so a failure can be replayed in isolation.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::families::{implicit_instances, random_affine_quadratic, random_embedded_pencil, random_morse_bott, random_warped_quadratic};
use crate::fd;
use crate::linops::{gen_eig_extremes, sym_eig};
use crate::reduced::{Objective, ObjectiveFn, ReducedProblem};
use crate::spectral::{check_nonlinear_bound, correction_bound, gram_sandwich, mb_constants, Region, BOUND_SLACK};

/// Instances with `Δ` or `ε` at or below this are skipped by the gap-based suites.
pub const GAP_FLOOR: f64 = 1e-6;
pub const INTERLACING_SLACK: f64 = 1e-10;
const HESSIAN_SHIFT: f64 = 0.5;
const WARP_RADIUS: f64 = 0.3;
const WARP_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SuiteOptions {
    pub seed: u64,
    pub count: usize,
    /// Test hook: shift every analytic Hessian by `½I` so the derivative
    /// consistency check must fail.
    pub corrupt_hessian: bool,
}

impl SuiteOptions {
    pub fn new(seed: u64, count: usize) -> Self {
        Self {
            seed,
            count,
            corrupt_hessian: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub index: usize,
    /// Seed that regenerates this instance alone.
    pub seed: u64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub checked: usize,
    pub skipped: usize,
    pub failures: Vec<Failure>,
}

impl SuiteOutcome {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            checked: 0,
            skipped: 0,
            failures: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn fail(&mut self, index: usize, seed: u64, detail: String) {
        self.failures.push(Failure { index, seed, detail });
    }
}

pub fn instance_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(index as u64)
}

struct Shifted {
    inner: Arc<dyn ObjectiveFn>,
    shift: f64,
}

impl ObjectiveFn for Shifted {
    fn value(&self, x: &DVector<f64>) -> f64 {
        self.inner.value(x)
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.inner.gradient(x)
    }
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let n = x.len();
        self.inner.hessian(x) + DMatrix::identity(n, n) * self.shift
    }
}

fn maybe_corrupt(p: ReducedProblem, opts: &SuiteOptions) -> ReducedProblem {
    if !opts.corrupt_hessian {
        return p;
    }
    let obj = &p.objective;
    let func = Arc::new(Shifted {
        inner: obj.func.clone(),
        shift: HESSIAN_SHIFT,
    });
    let objective = Objective {
        func,
        ..obj.clone()
    };
    ReducedProblem { objective, ..p }
}

/// Analytic Hessian against central differences of the analytic gradient.
fn hessian_consistent(obj: &Objective, x: &DVector<f64>) -> Result<(), String> {
    let h = obj.hessian(x).map_err(|e| e.to_string())?;
    let h_fd = fd::jacobian(|y| obj.gradient(y), x, fd::first_order_step(x)).map_err(|e| e.to_string())?;
    let err = (h.matrix() - &h_fd).norm();
    if err > 1e-6 * (1.0 + h.frobenius_norm()) {
        return Err(format!("Hessian disagrees with finite differences of the gradient by {err:e}"));
    }
    Ok(())
}

/// `β_F ≤ β_f − Δ_max(2ε−ε²)` and its Euclidean counterpart on random
/// 6-dimensional quadratics with 3-dimensional affine reductions.
pub fn affine_bound_suite(opts: &SuiteOptions) -> SuiteOutcome {
    let mut out = SuiteOutcome::new("affine_bound");
    for i in 0..opts.count {
        let seed = instance_seed(opts.seed, i);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = match random_affine_quadratic(&mut rng, 6, 3) {
            Ok(p) => maybe_corrupt(p, opts),
            Err(e) => {
                out.fail(i, seed, format!("generator: {e}"));
                continue;
            }
        };
        let x1 = DVector::zeros(3);
        let x = match p.mapping.phi(&x1) {
            Ok(x) => x,
            Err(e) => {
                out.fail(i, seed, e.to_string());
                continue;
            }
        };
        if let Err(d) = hessian_consistent(&p.objective, &x) {
            out.fail(i, seed, d);
            continue;
        }
        let c = match check_nonlinear_bound(&p, &Region::point(x1)) {
            Ok(c) => c,
            Err(e) => {
                out.fail(i, seed, e.to_string());
                continue;
            }
        };
        if c.affine.delta_max <= GAP_FLOOR || c.affine.epsilon <= GAP_FLOOR {
            out.skipped += 1;
            continue;
        }
        out.checked += 1;
        if c.affine.lhs > c.affine.rhs + BOUND_SLACK {
            out.fail(i, seed, format!("beta_F = {} exceeds {}", c.affine.lhs, c.affine.rhs));
        } else if !c.euclidean_holds {
            out.fail(
                i,
                seed,
                format!("euclidean beta_F = {} exceeds {}", c.euclidean_lhs, c.euclidean_rhs),
            );
        }
    }
    out
}

/// `μ_F ≥ μ_f + Δ_min(2ε−ε²)` on random Morse–Bott quadratics whose
/// hypotheses (criticality, kernel = tangent, a nonvacuous reduced normal
/// space, a usable gap) are verified first.
pub fn morse_bott_suite(opts: &SuiteOptions) -> SuiteOutcome {
    let mut out = SuiteOutcome::new("morse_bott");
    for i in 0..opts.count {
        let seed = instance_seed(opts.seed, i);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = match random_morse_bott(&mut rng, 6, 3) {
            Ok(m) => m,
            Err(e) => {
                out.fail(i, seed, format!("generator: {e}"));
                continue;
            }
        };
        let p = maybe_corrupt(inst.problem, opts);
        let x = DVector::zeros(6);
        if let Err(d) = hessian_consistent(&p.objective, &x) {
            out.fail(i, seed, d);
            continue;
        }
        let mb = match mb_constants(&p, &inst.minimiser, &inst.tangent) {
            Ok(mb) => mb,
            Err(_) => {
                out.skipped += 1;
                continue;
            }
        };
        if mb.vacuous || mb.delta_min <= GAP_FLOOR {
            out.skipped += 1;
            continue;
        }
        out.checked += 1;
        let mu_big_f = mb.mu_big_f.expect("nonvacuous");
        if mu_big_f < mb.bound - BOUND_SLACK {
            out.fail(i, seed, format!("mu_F = {mu_big_f} below {}", mb.bound));
        }
    }
    out
}

/// `β_F ≤ β_f − Δ_max(2ε−ε²) + QZ/m^Φ` and its Euclidean counterpart over a
/// small ball, for random quadratics under warped nonlinear reductions.
pub fn nonlinear_bound_suite(opts: &SuiteOptions) -> SuiteOutcome {
    let mut out = SuiteOutcome::new("nonlinear_bound");
    for i in 0..opts.count {
        let seed = instance_seed(opts.seed, i);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let checked = random_warped_quadratic(&mut rng, 6, 3).and_then(|p| {
            let p = maybe_corrupt(p, opts);
            let region = Region::new(DVector::zeros(3), WARP_RADIUS, WARP_SAMPLES, seed)?;
            let x = p.mapping.phi(&DVector::zeros(3))?;
            Ok((hessian_consistent(&p.objective, &x), check_nonlinear_bound(&p, &region)?))
        });
        match checked {
            Ok((Err(d), _)) => out.fail(i, seed, d),
            Ok((Ok(()), c)) => {
                if c.vacuous || c.affine.delta_max <= GAP_FLOOR || c.affine.epsilon <= GAP_FLOOR {
                    out.skipped += 1;
                    continue;
                }
                out.checked += 1;
                if !c.holds {
                    out.fail(i, seed, format!("beta_F = {} exceeds {}", c.lhs, c.rhs));
                } else if !c.euclidean_holds {
                    out.fail(
                        i,
                        seed,
                        format!("euclidean beta_F = {} exceeds {}", c.euclidean_lhs, c.euclidean_rhs),
                    );
                }
            }
            Err(e) => out.fail(i, seed, e.to_string()),
        }
    }
    out
}

/// `‖C‖ ≤ (L̃/σ²)ξL_f` for the implicit-argmin instances at seeded points of
/// `[−1, 1]^{n₁}`; instance `i` uses problem `i mod 3`.
pub fn correction_suite(opts: &SuiteOptions) -> SuiteOutcome {
    let mut out = SuiteOutcome::new("correction_bound");
    let problems = match implicit_instances() {
        Ok(p) => p,
        Err(e) => {
            if opts.count > 0 {
                out.fail(0, opts.seed, format!("generator: {e}"));
            }
            return out;
        }
    };
    for i in 0..opts.count {
        let seed = instance_seed(opts.seed, i);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (name, p) = &problems[i % problems.len()];
        let p = maybe_corrupt(p.clone(), opts);
        let x1 = DVector::from_fn(p.n1(), |_, _| rng.random_range(-1.0..=1.0));
        let checked = p.mapping.phi(&x1).and_then(|x| {
            let consistent = hessian_consistent(&p.objective, &x);
            Ok((consistent, correction_bound(&p, &x1)?))
        });
        match checked {
            Ok((Err(d), _)) => out.fail(i, seed, format!("{name}: {d}")),
            Ok((Ok(()), c)) => {
                out.checked += 1;
                if !c.holds {
                    out.fail(i, seed, format!("{name}: |C| = {} exceeds {}", c.correction_norm, c.bound));
                }
            }
            Err(e) => out.fail(i, seed, format!("{name}: {e}")),
        }
    }
    out
}

/// Generalised extremes of `(DᵀHD, DᵀD)` lie in `[λ_min(H), λ_max(H)]`.
pub fn interlacing_suite(opts: &SuiteOptions) -> SuiteOutcome {
    let mut out = SuiteOutcome::new("interlacing");
    for i in 0..opts.count {
        let seed = instance_seed(opts.seed, i);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let checked = random_embedded_pencil(&mut rng, 10).and_then(|pen| {
            let (lo, hi) = gen_eig_extremes(&pen.a(), &pen.b())?;
            let e = sym_eig(&pen.h)?;
            Ok((lo, hi, e.min(), e.max()))
        });
        match checked {
            Ok((lo, hi, hmin, hmax)) => {
                out.checked += 1;
                if lo < hmin - INTERLACING_SLACK || hi > hmax + INTERLACING_SLACK {
                    out.fail(i, seed, format!("[{lo}, {hi}] escapes [{hmin}, {hmax}]"));
                }
            }
            Err(e) => out.fail(i, seed, e.to_string()),
        }
    }
    out
}

/// Sign-aware Gram sandwich of `∇²F` between metric and Euclidean spectra.
pub fn gram_suite(opts: &SuiteOptions) -> SuiteOutcome {
    let mut out = SuiteOutcome::new("gram_sandwich");
    for i in 0..opts.count {
        let seed = instance_seed(opts.seed, i);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_affine_quadratic(&mut rng, 6, 3).and_then(|p| gram_sandwich(&maybe_corrupt(p, opts), &DVector::zeros(3)));
        match g {
            Ok(g) => {
                out.checked += 1;
                if !g.holds {
                    out.fail(i, seed, format!("{g:?}"));
                }
            }
            Err(e) => out.fail(i, seed, e.to_string()),
        }
    }
    out
}

pub fn run_all(opts: &SuiteOptions) -> Vec<SuiteOutcome> {
    let interlacing = SuiteOptions {
        count: 2 * opts.count,
        ..*opts
    };
    vec![
        affine_bound_suite(opts),
        nonlinear_bound_suite(opts),
        morse_bott_suite(opts),
        interlacing_suite(&interlacing),
        correction_suite(opts),
        gram_suite(opts),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_and_replay() {
        let opts = SuiteOptions::new(11, 20);
        for s in run_all(&opts) {
            assert!(s.passed(), "{}: {:?}", s.name, s.failures);
            assert!(s.checked > 0, "{}", s.name);
        }
    }

    #[test]
    fn empty_suite_is_vacuous() {
        for s in run_all(&SuiteOptions::new(11, 0)) {
            assert!(s.passed() && s.checked == 0);
        }
    }

    #[test]
    fn corrupted_hessian_is_caught_with_seed() {
        let opts = SuiteOptions {
            corrupt_hessian: true,
            ..SuiteOptions::new(11, 3)
        };
        let s = affine_bound_suite(&opts);
        assert_eq!(s.failures.len(), 3);
        assert_eq!(s.failures[1].seed, instance_seed(11, 1));
        assert!(!morse_bott_suite(&opts).passed());
        assert!(!nonlinear_bound_suite(&opts).passed());
        assert!(!correction_suite(&opts).passed());
    }
}
