//! Level-set comparison of planar eigenfunctions through `grad(phi1) . perp-grad(phi2)`.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{Eigenfunction, KeigError};

/// Below this everywhere, two eigenfunctions are taken to share their level sets.
pub const EQUIVALENCE_THRESHOLD: f64 = 1e-4;

/// `1e-5` times the diagonal of the bounding box of `points`.
pub fn default_fd_step(points: &[Vec<f64>]) -> f64 {
    let dim = points.first().map_or(0, Vec::len);
    let mut diag2 = 0.0;
    for k in 0..dim {
        let (lo, hi) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p[k]), hi.max(p[k]))
        });
        diag2 += (hi - lo).powi(2);
    }
    let diag = diag2.sqrt();
    1e-5 * if diag > 0.0 { diag } else { 1.0 }
}

fn gradient<E: Eigenfunction + ?Sized>(
    phi: &E,
    x: &[f64],
    step: f64,
) -> Result<[Complex64; 2], KeigError> {
    let mut g = [Complex64::new(0.0, 0.0); 2];
    for (k, slot) in g.iter_mut().enumerate() {
        let mut plus = x.to_vec();
        let mut minus = x.to_vec();
        plus[k] += step;
        minus[k] -= step;
        *slot = (phi.eval(&plus)? - phi.eval(&minus)?) / (2.0 * step);
    }
    Ok(g)
}

/// `|grad(phi1) . perp-grad(phi2)|` at each point, with `perp-grad(g) = (g_x2, -g_x1)`.
///
/// Values near zero everywhere mean the level sets coincide; values bounded
/// away from zero mean they cross transversally.
pub fn levelset_transversality<A, B>(
    phi1: &A,
    phi2: &B,
    points: &[Vec<f64>],
    fd_step: f64,
) -> Result<Vec<f64>, KeigError>
where
    A: Eigenfunction + ?Sized,
    B: Eigenfunction + ?Sized,
{
    if let Some(p) = points.iter().find(|p| p.len() != 2) {
        return Err(KeigError::Dimension {
            expected: 2,
            got: p.len(),
        });
    }
    points
        .par_iter()
        .map(|x| {
            let g1 = gradient(phi1, x, fd_step)?;
            let g2 = gradient(phi2, x, fd_step)?;
            Ok((g1[0] * g2[1] - g1[1] * g2[0]).norm())
        })
        .collect()
}

/// Numerical test of membership in the same primary class: the level-set
/// transversality stays below [`EQUIVALENCE_THRESHOLD`] on every point.
pub fn same_primary_class<A, B>(phi1: &A, phi2: &B, points: &[Vec<f64>]) -> Result<bool, KeigError>
where
    A: Eigenfunction + ?Sized,
    B: Eigenfunction + ?Sized,
{
    let values = levelset_transversality(phi1, phi2, points, default_fd_step(points))?;
    Ok(values.iter().all(|&v| v <= EQUIVALENCE_THRESHOLD))
}
