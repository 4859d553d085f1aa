//! Per-eigenvalue least squares and the eigenvalue sweep.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use super::{l2, CharacteristicGrid, OkeedmdError, TargetSample};

/// Weight sums below this make a node unfittable; its coefficient is set to 0.
const DEGENERATE_WEIGHT: f64 = 1e-300;
const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Optimal data for one eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaFit {
    pub lambda: Complex64,
    /// `h` at the `n + 1` data nodes.
    pub h: Vec<Complex64>,
    /// `|A(lambda) h - b|`.
    pub residual_norm: f64,
    /// Set when `sum_j |e^{lambda r_j}|^2` underflowed or overflowed.
    pub degenerate: bool,
}

/// Candidate eigenvalues for the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidates {
    pub values: Vec<Complex64>,
    /// Golden-section refinement around the discrete optimum; only applied
    /// when every candidate is real.
    pub refine: bool,
}

impl Candidates {
    pub fn list(values: Vec<Complex64>) -> Self {
        Candidates {
            values,
            refine: false,
        }
    }

    /// `count` uniform reals on `[lo, hi]`, refined.
    pub fn real_range(lo: f64, hi: f64, count: usize) -> Self {
        let values = match count {
            0 => Vec::new(),
            1 => vec![Complex64::new(lo, 0.0)],
            _ => (0..count)
                .map(|k| Complex64::new(lo + (hi - lo) * k as f64 / (count - 1) as f64, 0.0))
                .collect(),
        };
        Candidates {
            values,
            refine: true,
        }
    }

    /// Rectangular grid `re_count x im_count` over `re_range x im_range`.
    pub fn rectangle(re_range: (f64, f64), im_range: (f64, f64), re_count: usize, im_count: usize) -> Self {
        let axis = |(lo, hi): (f64, f64), count: usize| -> Vec<f64> {
            match count {
                0 => Vec::new(),
                1 => vec![lo],
                _ => (0..count)
                    .map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64)
                    .collect(),
            }
        };
        let ims = axis(im_range, im_count);
        let values = axis(re_range, re_count)
            .into_iter()
            .flat_map(|re| ims.iter().map(move |&im| Complex64::new(re, im)))
            .collect();
        Candidates {
            values,
            refine: false,
        }
    }

    pub fn with_refinement(mut self, refine: bool) -> Self {
        self.refine = refine;
        self
    }
}

impl Default for Candidates {
    fn default() -> Self {
        Candidates::real_range(-5.0, 5.0, 101)
    }
}

/// Closed-form optimum `h_i = sum_j conj(e_j) q_ij / sum_j |e_j|^2`, `e_j = e^{lambda r_j}`.
pub fn fit_h(grid: &CharacteristicGrid, target: &TargetSample, lambda: Complex64) -> Result<LambdaFit, OkeedmdError> {
    target.check(grid)?;
    Ok(fit_flat(grid, target.b(), lambda))
}

pub(crate) fn fit_flat(grid: &CharacteristicGrid, b: &[Complex64], lambda: Complex64) -> LambdaFit {
    let rows = grid.n() + 1;
    let e: Vec<Complex64> = grid.r_nodes().iter().map(|&r| (lambda * r).exp()).collect();
    let weight: f64 = e.iter().map(|z| z.norm_sqr()).sum();
    let degenerate = !(weight >= DEGENERATE_WEIGHT) || !weight.is_finite();
    let h: Vec<Complex64> = if degenerate {
        vec![Complex64::new(0.0, 0.0); rows]
    } else {
        (0..rows)
            .map(|i| {
                e.iter()
                    .enumerate()
                    .map(|(j, ej)| ej.conj() * b[j * rows + i])
                    .sum::<Complex64>()
                    / weight
            })
            .collect()
    };
    let residual_norm = if degenerate {
        l2(b)
    } else {
        residual(&e, &h, b)
    };
    LambdaFit {
        lambda,
        h,
        residual_norm,
        degenerate,
    }
}

fn residual(e: &[Complex64], h: &[Complex64], b: &[Complex64]) -> f64 {
    let rows = h.len();
    let mut acc = 0.0;
    for (j, ej) in e.iter().enumerate() {
        for (i, hi) in h.iter().enumerate() {
            acc += (ej * hi - b[j * rows + i]).norm_sqr();
        }
    }
    acc.sqrt()
}

/// Same problem through an explicit `A(lambda)` and an SVD solve.
pub fn fit_h_dense(
    grid: &CharacteristicGrid,
    target: &TargetSample,
    lambda: Complex64,
) -> Result<LambdaFit, OkeedmdError> {
    target.check(grid)?;
    let rows = grid.n() + 1;
    let e: Vec<Complex64> = grid.r_nodes().iter().map(|&r| (lambda * r).exp()).collect();
    let a = DMatrix::from_fn(grid.len(), rows, |k, i| {
        if k % rows == i {
            e[k / rows]
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let b = DVector::from_column_slice(target.b());
    let h = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|msg| OkeedmdError::Dense(msg.to_string()))?;
    let r = &a * &h - &b;
    Ok(LambdaFit {
        lambda,
        h: h.iter().copied().collect(),
        residual_norm: r.norm(),
        degenerate: false,
    })
}

/// Best fit over the candidates and the residual at every candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSweep {
    pub best: LambdaFit,
    pub curve: Vec<(Complex64, f64)>,
}

/// Fits every candidate and keeps the smallest residual. Near ties go to the
/// smallest `|lambda|`, then the smallest `|Im lambda|`.
pub fn sweep_lambda(
    grid: &CharacteristicGrid,
    target: &TargetSample,
    candidates: &Candidates,
) -> Result<LambdaSweep, OkeedmdError> {
    target.check(grid)?;
    sweep_flat(grid, target.b(), candidates)
}

pub(crate) fn sweep_flat(
    grid: &CharacteristicGrid,
    b: &[Complex64],
    candidates: &Candidates,
) -> Result<LambdaSweep, OkeedmdError> {
    if candidates.values.is_empty() {
        return Err(OkeedmdError::NoCandidates);
    }
    let fits: Vec<LambdaFit> = candidates
        .values
        .par_iter()
        .map(|&lambda| fit_flat(grid, b, lambda))
        .collect();
    let tie = 1e-12 * l2(b);
    let min = fits.iter().map(|f| f.residual_norm).fold(f64::INFINITY, f64::min);
    let mut best = fits
        .iter()
        .filter(|f| f.residual_norm <= min + tie)
        .min_by(|x, y| {
            let key = |f: &LambdaFit| (f.lambda.norm(), f.lambda.im.abs());
            key(x).partial_cmp(&key(y)).unwrap_or(std::cmp::Ordering::Equal)
        })
        .cloned()
        .unwrap_or_else(|| fits[0].clone());
    let all_real = candidates.values.iter().all(|z| z.im == 0.0);
    if candidates.refine && all_real && candidates.values.len() > 1 {
        if let Some(refined) = refine_real(grid, b, &candidates.values, best.lambda.re) {
            if refined.residual_norm < best.residual_norm - tie {
                best = refined;
            }
        }
    }
    let curve = fits.iter().map(|f| (f.lambda, f.residual_norm)).collect();
    Ok(LambdaSweep { best, curve })
}

/// Golden-section search between the neighbours of `center` among the
/// candidates, down to a bracket of width `1e-3`.
fn refine_real(grid: &CharacteristicGrid, b: &[Complex64], values: &[Complex64], center: f64) -> Option<LambdaFit> {
    let mut reals: Vec<f64> = values.iter().map(|z| z.re).collect();
    reals.sort_by(|a, b| a.total_cmp(b));
    reals.dedup();
    let k = reals.iter().position(|&v| v == center)?;
    let lo = reals[k.saturating_sub(1)];
    let hi = reals[(k + 1).min(reals.len() - 1)];
    if hi <= lo {
        return None;
    }
    let f = |x: f64| fit_flat(grid, b, Complex64::new(x, 0.0));
    let (mut a, mut c) = (lo, hi);
    let mut x1 = c - GOLDEN * (c - a);
    let mut x2 = a + GOLDEN * (c - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while c - a > 1e-3 {
        if f1.residual_norm <= f2.residual_norm {
            c = x2;
            x2 = x1;
            f2 = f1;
            x1 = c - GOLDEN * (c - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN * (c - a);
            f2 = f(x2);
        }
    }
    Some(if f1.residual_norm <= f2.residual_norm { f1 } else { f2 })
}
