//! Greedy expansion of a target in fitted eigenfunctions.

use num_complex::Complex64;

use super::fit::sweep_flat;
use super::{l2, Candidates, CharacteristicGrid, OkeedmdError, TargetSample};
use crate::keig::Keig;
use crate::manifold::DataFunction;

/// Terms with a norm below this are not divided by.
const VANISHING_TERM: f64 = 1e-14;

/// One fitted eigenfunction `c * phi_bar` of the expansion.
#[derive(Debug, Clone)]
pub struct Term {
    pub lambda: Complex64,
    pub h: DataFunction,
    /// Norm of the term on the grid.
    pub c: f64,
    /// Unit-norm grid values, column-major like the target.
    pub normalized_phi: Vec<Complex64>,
    pub keig: Keig,
    pub degenerate: bool,
}

#[derive(Debug, Clone)]
pub struct DecompositionResult {
    pub terms: Vec<Term>,
    /// `|R_k|` for `k = 0..=terms.len()`; `R_0 = b`.
    pub residual_norms: Vec<f64>,
    /// Residual against every candidate, one curve per stage.
    pub lambda_curves: Vec<Vec<(Complex64, f64)>>,
    /// Final residual `R_K`.
    pub residual: Vec<Complex64>,
    pub grid: CharacteristicGrid,
}

impl DecompositionResult {
    /// `sum_k c_k phi_bar_k`, the fitted part of the target.
    pub fn reconstruction(&self) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        for term in &self.terms {
            for (o, p) in out.iter_mut().zip(&term.normalized_phi) {
                *o += p * term.c;
            }
        }
        out
    }

    pub fn relative_residuals(&self) -> Vec<f64> {
        let b = self.residual_norms[0];
        self.residual_norms.iter().map(|r| r / b).collect()
    }
}

/// Fits `R_{k-1}` by the best single eigenfunction, subtracts it, and repeats
/// up to `k_max` times or until `|R_k| / |b| < stop_tol`.
pub fn greedy_decompose(
    grid: &CharacteristicGrid,
    target: &TargetSample,
    candidates: &Candidates,
    k_max: usize,
    stop_tol: f64,
) -> Result<DecompositionResult, OkeedmdError> {
    target.check(grid)?;
    if k_max == 0 {
        return Err(OkeedmdError::NoTerms);
    }
    let b_norm = target.norm();
    if b_norm == 0.0 {
        return Err(OkeedmdError::EmptyTarget);
    }
    let mut residual = target.b().to_vec();
    let mut residual_norms = vec![b_norm];
    let mut terms = Vec::new();
    let mut lambda_curves = Vec::new();
    for _ in 0..k_max {
        let sweep = sweep_flat(grid, &residual, candidates)?;
        lambda_curves.push(sweep.curve);
        let best = sweep.best;
        let p = grid.apply(best.lambda, &best.h);
        let c = l2(&p);
        if c < VANISHING_TERM {
            break;
        }
        for (r, pk) in residual.iter_mut().zip(&p) {
            *r -= pk;
        }
        let h = grid.data_function(&best.h)?;
        let keig = Keig::with_options(
            best.lambda,
            h.clone(),
            grid.manifold().clone(),
            grid.field().clone(),
            grid.t_window(),
            *grid.options(),
        )?;
        terms.push(Term {
            lambda: best.lambda,
            h,
            c,
            normalized_phi: p.iter().map(|z| z / c).collect(),
            keig,
            degenerate: best.degenerate,
        });
        let r_norm = l2(&residual);
        residual_norms.push(r_norm);
        if r_norm / b_norm < stop_tol {
            break;
        }
    }
    Ok(DecompositionResult {
        terms,
        residual_norms,
        lambda_curves,
        residual,
        grid: grid.clone(),
    })
}
