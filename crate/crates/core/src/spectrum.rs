//! Approximate eigenfunctions of the action-angle flow `I' = 0, theta' = I`.
//!
//! On the annulus `[a, b] x S^1` the functions
//! `phi(I, theta) = n 1{|I - omega| < 1/(2n)} e^{i theta}` satisfy
//! `|K_t phi - e^{i omega t} phi| / |phi| ~ t / (sqrt(12) n)`, so every
//! `i omega` with `omega` in `(a, b)` is an approximate eigenvalue. On a wedge
//! that the flow leaves in finite time, every complex number is an eigenvalue.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::dynamics::{Benchmark, FlowOptions};
use crate::keig::{koopman_residual, ClosedFormEigenfunction, KeigError};

pub const DEFAULT_QUAD_POINTS: usize = 256;
pub const MIN_QUAD_POINTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error("support [{lo}, {hi}] leaves the annulus [{a}, {b}]")]
    SupportOutOfRange { lo: f64, hi: f64, a: f64, b: f64 },
    #[error("need n >= 1")]
    ZeroSharpness,
    #[error("quadrature needs at least {MIN_QUAD_POINTS} nodes, got {0}")]
    TooFewNodes(usize),
    #[error("invalid wedge: {0}")]
    BadWedge(String),
    #[error(transparent)]
    Keig(#[from] KeigError),
}

/// `n 1{|I - omega| < 1/(2n)} e^{i theta}` on the annulus `[a, b] x S^1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxEig {
    pub omega: f64,
    pub n: u32,
    pub annulus: (f64, f64),
}

impl ApproxEig {
    pub fn new(omega: f64, n: u32, annulus: (f64, f64)) -> Result<Self, SpectrumError> {
        let ae = ApproxEig { omega, n, annulus };
        ae.support()?;
        Ok(ae)
    }

    pub fn support(&self) -> Result<(f64, f64), SpectrumError> {
        if self.n == 0 {
            return Err(SpectrumError::ZeroSharpness);
        }
        let half = 0.5 / self.n as f64;
        let (lo, hi) = (self.omega - half, self.omega + half);
        let (a, b) = self.annulus;
        if lo < a || hi > b {
            return Err(SpectrumError::SupportOutOfRange { lo, hi, a, b });
        }
        Ok((lo, hi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    pub residual_norm: f64,
    pub phi_norm: f64,
    pub relative_residual: f64,
}

/// `|K_t phi - e^{i omega t} phi|` in `L^2` of the annulus. The angular
/// integral is exact; the action integral uses Gauss-Legendre on the support.
pub fn approx_eig_residual(ae: &ApproxEig, t: f64, quad_points: usize) -> Result<ResidualReport, SpectrumError> {
    if quad_points < MIN_QUAD_POINTS {
        return Err(SpectrumError::TooFewNodes(quad_points));
    }
    let (lo, hi) = ae.support()?;
    let n = ae.n as f64;
    let (nodes, weights) = gauss_legendre(quad_points);
    let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    let mut res2 = 0.0;
    let mut phi2 = 0.0;
    for (x, w) in nodes.iter().zip(&weights) {
        let action = mid + half * x;
        let defect = Complex64::new(0.0, action * t).exp() - Complex64::new(0.0, ae.omega * t).exp();
        res2 += w * half * n * n * defect.norm_sqr();
        phi2 += w * half * n * n;
    }
    let residual_norm = (2.0 * PI * res2).sqrt();
    let phi_norm = (2.0 * PI * phi2).sqrt();
    Ok(ResidualReport {
        residual_norm,
        phi_norm,
        relative_residual: residual_norm / phi_norm,
    })
}

/// Nodes and weights of the `count`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(count: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; count];
    let mut weights = vec![0.0; count];
    let nf = count as f64;
    for k in 0..count.div_ceil(2) {
        let mut x = (PI * (k as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(count, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(count, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[k] = -x;
        nodes[count - 1 - k] = x;
        weights[k] = w;
        weights[count - 1 - k] = w;
    }
    (nodes, weights)
}

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Least-squares slope of `ln y` against `ln x`; `None` with fewer than two distinct `x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).map(|(x, y)| (x.ln(), y.ln())).collect();
    let k = pts.len() as f64;
    if pts.len() < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub rows: Vec<(u32, ResidualReport)>,
    /// Slope of `ln relative_residual` against `ln n`, near `-1`.
    pub slope: Option<f64>,
}

/// Residuals for each `n` and their log-log slope.
pub fn scaling_fit(
    omega: f64,
    t: f64,
    n_list: &[u32],
    annulus: (f64, f64),
    quad_points: usize,
) -> Result<ScalingFit, SpectrumError> {
    let rows = n_list
        .par_iter()
        .map(|&n| {
            let ae = ApproxEig::new(omega, n, annulus)?;
            Ok((n, approx_eig_residual(&ae, t, quad_points)?))
        })
        .collect::<Result<Vec<_>, SpectrumError>>()?;
    let xs: Vec<f64> = rows.iter().map(|(n, _)| *n as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|(_, r)| r.relative_residual).collect();
    Ok(ScalingFit {
        slope: log_log_slope(&xs, &ys),
        rows,
    })
}

/// The wedge `(a, b) x (alpha1, alpha2)` in action-angle coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wedge {
    pub action: (f64, f64),
    pub angle: (f64, f64),
}

impl Wedge {
    fn validate(&self) -> Result<(), SpectrumError> {
        let (a, b) = self.action;
        let (al1, al2) = self.angle;
        if !(0.0 < a && a < b) {
            return Err(SpectrumError::BadWedge(format!("action range ({a}, {b})")));
        }
        if !(al1 < al2 && al2 - al1 < 2.0 * PI) {
            return Err(SpectrumError::BadWedge(format!(
                "angle range ({al1}, {al2}) must be shorter than one turn"
            )));
        }
        Ok(())
    }

    /// `h(I) e^{lambda (theta - alpha1) / I}` on the wedge.
    pub fn eigenfunction<H>(&self, lambda: Complex64, h: H) -> ClosedFormEigenfunction
    where
        H: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        let (a, b) = self.action;
        let (al1, al2) = self.angle;
        let slack = 1e-9;
        ClosedFormEigenfunction::new("wedge", lambda, move |x| {
            let (action, theta) = (x[0], x[1]);
            let inside = action > a - slack && action < b + slack && theta > al1 - slack && theta < al2 + slack;
            inside.then(|| h(action) * (lambda * (theta - al1) / action).exp())
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WedgeReport {
    pub residuals: Vec<(Complex64, f64)>,
    pub max_residual: f64,
}

/// Certifies `h(I) e^{lambda (theta - alpha1)/I}` as an eigenfunction for every
/// `lambda` on a 10 x 10 sample of the wedge whose time-`t` images stay inside.
pub fn wedge_point_spectrum_check<H>(
    lambdas: &[Complex64],
    wedge: Wedge,
    h: H,
    t: f64,
) -> Result<WedgeReport, SpectrumError>
where
    H: Fn(f64) -> Complex64 + Send + Sync + Clone + 'static,
{
    wedge.validate()?;
    let (a, b) = wedge.action;
    let (al1, al2) = wedge.angle;
    let reach = b * t.abs();
    let (th_lo, th_hi) = if t >= 0.0 { (al1, al2 - reach) } else { (al1 + reach, al2) };
    if th_hi <= th_lo {
        return Err(SpectrumError::BadWedge(format!("time {t} leaves the wedge from every point")));
    }
    let mut points = Vec::with_capacity(100);
    for i in 0..10 {
        for j in 0..10 {
            let action = a + (b - a) * (i as f64 + 0.5) / 10.0;
            let theta = th_lo + (th_hi - th_lo) * (j as f64 + 0.5) / 10.0;
            points.push(vec![action, theta]);
        }
    }
    let field = Benchmark::ActionAngle.field();
    let opts = FlowOptions::default();
    let residuals = lambdas
        .par_iter()
        .map(|&lambda| {
            let phi = wedge.eigenfunction(lambda, h.clone());
            Ok((lambda, koopman_residual(&phi, &field, &points, t, &opts)?))
        })
        .collect::<Result<Vec<_>, KeigError>>()?;
    let max_residual = residuals.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(WedgeReport {
        residuals,
        max_residual,
    })
}
