//! Products of powers of eigenfunctions.

use std::sync::Arc;

use num_complex::Complex64;

use super::{Eigenfunction, KeigError};

/// `x -> prod_i phi_i(x)^{alpha_i}` with eigenvalue `sum_i alpha_i lambda_i`.
///
/// Integer powers are taken on the whole complex plane (nonzero base for
/// negative powers). Non-integer powers require a nonnegative real value;
/// anything else would need a branch cut and is rejected.
#[derive(Clone)]
pub struct PowerProduct {
    factors: Vec<(Arc<dyn Eigenfunction>, f64)>,
}

impl PowerProduct {
    pub fn new(factors: Vec<(Arc<dyn Eigenfunction>, f64)>) -> Self {
        PowerProduct { factors }
    }

    /// `phi^p` for a single eigenfunction.
    pub fn power(phi: Arc<dyn Eigenfunction>, p: f64) -> Self {
        PowerProduct::new(vec![(phi, p)])
    }
}

/// `phi_1^{alpha_1} phi_2^{alpha_2}`, an eigenfunction for `alpha_1 lambda_1 + alpha_2 lambda_2`.
pub fn algebraic_combine(
    k1: Arc<dyn Eigenfunction>,
    alpha1: f64,
    k2: Arc<dyn Eigenfunction>,
    alpha2: f64,
) -> PowerProduct {
    PowerProduct::new(vec![(k1, alpha1), (k2, alpha2)])
}

fn real_power(v: Complex64, alpha: f64) -> Result<Complex64, KeigError> {
    if alpha == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if alpha.fract() == 0.0 && alpha.abs() <= i32::MAX as f64 {
        if v == Complex64::new(0.0, 0.0) && alpha < 0.0 {
            return Err(KeigError::DomainError(format!(
                "negative power {alpha} of zero"
            )));
        }
        return Ok(v.powi(alpha as i32));
    }
    let real = v.im == 0.0 || v.im.abs() <= 1e-14 * v.re.abs();
    if !real || v.re < 0.0 {
        return Err(KeigError::DomainError(format!(
            "non-integer power {alpha} of {v}"
        )));
    }
    if v.re == 0.0 && alpha < 0.0 {
        return Err(KeigError::DomainError(format!(
            "negative power {alpha} of zero"
        )));
    }
    Ok(Complex64::new(v.re.powf(alpha), 0.0))
}

impl Eigenfunction for PowerProduct {
    fn eigenvalue(&self) -> Complex64 {
        self.factors
            .iter()
            .map(|(phi, a)| phi.eigenvalue() * *a)
            .sum()
    }

    fn eval(&self, x: &[f64]) -> Result<Complex64, KeigError> {
        let mut acc = Complex64::new(1.0, 0.0);
        for (phi, alpha) in &self.factors {
            if *alpha == 0.0 {
                continue;
            }
            acc *= real_power(phi.eval(x)?, *alpha)?;
        }
        Ok(acc)
    }
}

/// A constant multiple of an eigenfunction; same eigenvalue and level sets.
#[derive(Clone)]
pub struct Scaled {
    pub inner: Arc<dyn Eigenfunction>,
    pub factor: Complex64,
}

impl Eigenfunction for Scaled {
    fn eigenvalue(&self) -> Complex64 {
        self.inner.eigenvalue()
    }

    fn eval(&self, x: &[f64]) -> Result<Complex64, KeigError> {
        Ok(self.factor * self.inner.eval(x)?)
    }
}
