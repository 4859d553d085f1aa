//! Koopman eigenfunctions built from data on a transverse manifold.
//!
//! For a data function `h` on a manifold crossed by the flow, the function
//! `phi(x) = h(s*(x)) exp(lambda r*(x))` is an eigenfunction of the Koopman
//! semigroup on the swept domain, where `r*(x)` is the flow time from the
//! manifold to `x` and `s*(x)` the parameter of the point where the orbit of
//! `x` left the manifold.

mod combine;
mod levelset;
mod pullback;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::dynamics::{advance, DynamicsError, FlowOptions, VectorField};
use crate::manifold::{DataFunction, DataManifold, ManifoldError};

pub use combine::{algebraic_combine, PowerProduct, Scaled};
pub use levelset::{default_fd_step, levelset_transversality, same_primary_class, EQUIVALENCE_THRESHOLD};
pub use pullback::{Pullback, PullbackContext};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KeigError {
    #[error("point {x:?} is outside the swept domain")]
    NotInDomain { x: Vec<f64> },
    #[error("orbit crosses the data manifold twice (r = {first} and r = {second})")]
    AmbiguousCrossing { first: f64, second: f64 },
    #[error("power is not single valued here: {0}")]
    DomainError(String),
    #[error("time window [{t1}, {t2}] must contain 0")]
    BadWindow { t1: f64, t2: f64 },
    #[error("expected dimension {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// Anything that can be evaluated as a Koopman eigenfunction.
pub trait Eigenfunction: Send + Sync {
    fn eigenvalue(&self) -> Complex64;
    fn eval(&self, x: &[f64]) -> Result<Complex64, KeigError>;
}

impl<T: Eigenfunction + ?Sized> Eigenfunction for Arc<T> {
    fn eigenvalue(&self) -> Complex64 {
        (**self).eigenvalue()
    }
    fn eval(&self, x: &[f64]) -> Result<Complex64, KeigError> {
        (**self).eval(x)
    }
}

impl<T: Eigenfunction + ?Sized> Eigenfunction for &T {
    fn eigenvalue(&self) -> Complex64 {
        (**self).eigenvalue()
    }
    fn eval(&self, x: &[f64]) -> Result<Complex64, KeigError> {
        (**self).eval(x)
    }
}

type PointFn = dyn Fn(&[f64]) -> Option<Complex64> + Send + Sync;

/// An eigenfunction given by a formula; `None` marks points outside its domain.
#[derive(Clone)]
pub struct ClosedFormEigenfunction {
    lambda: Complex64,
    label: String,
    f: Arc<PointFn>,
}

impl ClosedFormEigenfunction {
    pub fn new<F>(label: impl Into<String>, lambda: Complex64, f: F) -> Self
    where
        F: Fn(&[f64]) -> Option<Complex64> + Send + Sync + 'static,
    {
        ClosedFormEigenfunction {
            lambda,
            label: label.into(),
            f: Arc::new(f),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for ClosedFormEigenfunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClosedFormEigenfunction")
            .field("label", &self.label)
            .field("lambda", &self.lambda)
            .finish()
    }
}

impl Eigenfunction for ClosedFormEigenfunction {
    fn eigenvalue(&self) -> Complex64 {
        self.lambda
    }

    fn eval(&self, x: &[f64]) -> Result<Complex64, KeigError> {
        (self.f)(x).ok_or_else(|| KeigError::NotInDomain { x: x.to_vec() })
    }
}

/// Eigenfunction defined by an eigenvalue, data on a manifold, the flow and a
/// time window.
#[derive(Debug, Clone)]
pub struct Keig {
    lambda: Complex64,
    h: DataFunction,
    ctx: PullbackContext,
}

impl Keig {
    pub fn new(
        lambda: Complex64,
        h: DataFunction,
        manifold: DataManifold,
        field: VectorField,
        t_window: (f64, f64),
    ) -> Result<Self, KeigError> {
        Keig::with_options(lambda, h, manifold, field, t_window, FlowOptions::default())
    }

    pub fn with_options(
        lambda: Complex64,
        h: DataFunction,
        manifold: DataManifold,
        field: VectorField,
        t_window: (f64, f64),
        opts: FlowOptions,
    ) -> Result<Self, KeigError> {
        if h.grid() != manifold.grid() {
            return Err(ManifoldError::GridMismatch.into());
        }
        let ctx = PullbackContext::new(field, manifold, t_window, opts)?;
        Ok(Keig { lambda, h, ctx })
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn data(&self) -> &DataFunction {
        &self.h
    }

    pub fn manifold(&self) -> &DataManifold {
        &self.ctx.manifold
    }

    pub fn field(&self) -> &VectorField {
        &self.ctx.field
    }

    pub fn t_window(&self) -> (f64, f64) {
        self.ctx.t_window
    }

    pub fn options(&self) -> &FlowOptions {
        &self.ctx.opts
    }

    pub fn context(&self) -> &PullbackContext {
        &self.ctx
    }

    pub fn pullback(&self, x: &[f64]) -> Result<Pullback, KeigError> {
        self.ctx.pullback(x)
    }

    /// Value together with the pullback it came from.
    pub fn eval_with_pullback(&self, x: &[f64]) -> Result<(Complex64, Pullback), KeigError> {
        let pb = self.pullback(x)?;
        let value = self.h.eval(pb.s_star)? * (self.lambda * pb.r_star).exp();
        Ok((value, pb))
    }

    /// Worst relative defect of `phi(flow_t(x)) = e^{lambda t} phi(x)` over `points`.
    pub fn koopman_residual(&self, points: &[Vec<f64>], t: f64) -> Result<f64, KeigError> {
        koopman_residual(self, self.field(), points, t, self.options())
    }

    /// `|phi(flow_r(x)) - phi(x) e^{lambda r}|`.
    pub fn orbit_scaling_check(&self, x: &[f64], r: f64) -> Result<f64, KeigError> {
        let y = advance(self.field(), x, r, self.options())?;
        let lhs = Eigenfunction::eval(self, &y)?;
        let rhs = Eigenfunction::eval(self, x)? * (self.lambda * r).exp();
        Ok((lhs - rhs).norm())
    }

    /// Data on another transverse manifold that yields this same eigenfunction.
    pub fn restate_data(&self, target: &DataManifold) -> Result<DataFunction, KeigError> {
        let values = target
            .grid()
            .nodes()
            .par_iter()
            .map(|&s| Eigenfunction::eval(self, &target.embed(s)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(DataFunction::tabulated(target.grid(), values)?)
    }

    /// Pseudo-random points of the swept domain, `flow_r(x(s))` with `s` uniform
    /// in the parameter range and `r` uniform in `[t1, t2 - t_margin]`.
    pub fn domain_points(
        &self,
        count: usize,
        seed: u64,
        t_margin: f64,
    ) -> Result<Vec<Vec<f64>>, KeigError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = self.manifold().grid();
        let (t1, t2) = self.t_window();
        let r_hi = (t2 - t_margin).max(t1);
        let draws: Vec<(f64, f64)> = (0..count)
            .map(|_| {
                let s = if g.count == 1 {
                    g.s_min
                } else {
                    rng.gen_range(g.s_min..=g.s_max)
                };
                let r = if r_hi > t1 { rng.gen_range(t1..=r_hi) } else { t1 };
                (s, r)
            })
            .collect();
        draws
            .par_iter()
            .map(|&(s, r)| {
                advance(self.field(), &self.manifold().embed(s), r, self.options())
                    .map_err(KeigError::from)
            })
            .collect()
    }
}

impl Eigenfunction for Keig {
    fn eigenvalue(&self) -> Complex64 {
        self.lambda
    }

    fn eval(&self, x: &[f64]) -> Result<Complex64, KeigError> {
        self.eval_with_pullback(x).map(|(v, _)| v)
    }
}

/// Worst relative defect of the eigen-relation
/// `|phi(flow_t(x)) - e^{lambda t} phi(x)| / max(1, |phi(x)|)` over `points`.
///
/// The flow uses the field's closed form when it has one.
pub fn koopman_residual<E: Eigenfunction + ?Sized>(
    phi: &E,
    field: &VectorField,
    points: &[Vec<f64>],
    t: f64,
    opts: &FlowOptions,
) -> Result<f64, KeigError> {
    if t == 0.0 {
        return Ok(0.0);
    }
    let growth = (phi.eigenvalue() * t).exp();
    let defects = points
        .par_iter()
        .map(|x| {
            let value = phi.eval(x)?;
            let image = advance(field, x, t, opts)?;
            let moved = phi.eval(&image)?;
            Ok((moved - growth * value).norm() / value.norm().max(1.0))
        })
        .collect::<Result<Vec<f64>, KeigError>>()?;
    Ok(defects.into_iter().fold(0.0, f64::max))
}

/// Evaluates `keig` on many points; failures are reported per point.
pub fn evaluate_points(keig: &Keig, points: &[Vec<f64>]) -> Vec<Result<(Complex64, Pullback), KeigError>> {
    points.par_iter().map(|x| keig.eval_with_pullback(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{flow, Benchmark};
    use crate::manifold::ParamGrid;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn lin2d() -> VectorField {
        Benchmark::Lin2d { a1: 1.0, a2: 2.0 }.system().field
    }

    fn horizontal() -> DataManifold {
        DataManifold::horizontal(1.0, 0.25, 2.5, 46).unwrap()
    }

    fn observer() -> Keig {
        let m = horizontal();
        let h = DataFunction::constant(m.grid(), c(1.0));
        Keig::new(c(2.0), h, m, lin2d(), (0.0, 1.05)).unwrap()
    }

    #[test]
    fn pullback_inverts_linear_flow() {
        let pb = observer().pullback(&[2.0, 4.0]).unwrap();
        assert!((pb.r_star - 2f64.ln()).abs() < 1e-6, "{pb:?}");
        assert!((pb.s_star - 1.0).abs() < 1e-6, "{pb:?}");
    }

    #[test]
    fn pullback_on_manifold_is_trivial() {
        let pb = observer().pullback(&[1.7, 1.0]).unwrap();
        assert_eq!(pb.r_star, 0.0);
        assert!((pb.s_star - 1.7).abs() < 1e-12);
    }

    #[test]
    fn pullback_round_trip() {
        let k = observer();
        for x in k.domain_points(20, 3, 0.0).unwrap() {
            let pb = k.pullback(&x).unwrap();
            let back = flow(k.field(), &pb.foot, pb.r_star, k.options()).unwrap().state;
            for (a, b) in back.iter().zip(&x) {
                assert!((a - b).abs() <= 100.0 * k.options().tol * (1.0 + b.abs()));
            }
        }
    }

    #[test]
    fn point_outside_domain() {
        let k = observer();
        // x2 below the manifold: reached only by forward time, window is [0, 1.05]
        assert!(matches!(
            k.pullback(&[1.0, 0.5]),
            Err(KeigError::NotInDomain { .. })
        ));
        // right orbit height but s* = 3/sqrt(2) is beyond the segment end
        assert!(matches!(
            k.pullback(&[6.0, 2.0]),
            Err(KeigError::NotInDomain { .. })
        ));
    }

    #[test]
    fn observer_function_values() {
        let v = Eigenfunction::eval(&observer(), &[2.0, 4.0]).unwrap();
        assert!((v - c(4.0)).norm() < 1e-8);
    }

    #[test]
    fn value_on_manifold_is_data() {
        let m = horizontal();
        let h = DataFunction::from_fn(m.grid(), |s| c(s * s)).unwrap();
        let k = Keig::new(Complex64::new(0.3, 1.0), h, m, lin2d(), (0.0, 1.0)).unwrap();
        let v = Eigenfunction::eval(&k, &[1.5, 1.0]).unwrap();
        assert!((v - c(2.25)).norm() < 1e-12);
    }

    #[test]
    fn general_solution_with_s_data() {
        let m = horizontal();
        let h = DataFunction::from_fn(m.grid(), c).unwrap();
        let k = Keig::new(c(2.0), h, m, lin2d(), (0.0, 1.05)).unwrap();
        let v = Eigenfunction::eval(&k, &[2.0, 4.0]).unwrap();
        assert!((v - c(4.0)).norm() < 1e-8);
    }

    #[test]
    fn residual_of_exact_observer() {
        let k = observer();
        let pts = k.domain_points(100, 7, 0.1).unwrap();
        assert!(k.koopman_residual(&pts, 0.1).unwrap() <= 1e-8);
        assert_eq!(k.koopman_residual(&pts, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn residual_detects_wrong_eigenvalue() {
        let f = |x: &[f64]| Some(c(x[1]));
        let wrong = ClosedFormEigenfunction::new("x2 with lambda 2.5", c(2.5), f);
        let field = lin2d();
        let pts: Vec<Vec<f64>> = (0..10).map(|i| vec![1.0 + 0.1 * i as f64, 1.5]).collect();
        let r = koopman_residual(&wrong, &field, &pts, 0.1, &FlowOptions::default()).unwrap();
        // |e^{0.25} - e^{0.2}| / e^{0.2} = e^{0.05} - 1 relative to phi >= 1
        assert!(r >= (0.05f64).exp() - 1.0 - 1e-12, "{r}");
    }

    #[test]
    fn orbit_scaling() {
        let k = observer();
        assert_eq!(k.orbit_scaling_check(&[1.3, 1.6], 0.0).unwrap(), 0.0);
        assert!(k.orbit_scaling_check(&[1.3, 1.6], 0.3).unwrap() <= 1e-8);
    }

    #[test]
    fn restate_onto_itself() {
        let m = horizontal();
        let h = DataFunction::from_fn(m.grid(), |s| c(s.sin() + 2.0)).unwrap();
        let k = Keig::new(c(2.0), h.clone(), m.clone(), lin2d(), (0.0, 1.0)).unwrap();
        let again = k.restate_data(&m).unwrap();
        for (a, b) in again.values().iter().zip(h.values()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn window_must_contain_zero() {
        let m = horizontal();
        let h = DataFunction::constant(m.grid(), c(1.0));
        let err = Keig::new(c(1.0), h, m, lin2d(), (0.2, 1.0)).unwrap_err();
        assert_eq!(err, KeigError::BadWindow { t1: 0.2, t2: 1.0 });
    }

    #[test]
    fn data_grid_must_match_manifold() {
        let m = horizontal();
        let h = DataFunction::constant(ParamGrid::new(0.0, 1.0, 3).unwrap(), c(1.0));
        assert!(matches!(
            Keig::new(c(1.0), h, m, lin2d(), (0.0, 1.0)),
            Err(KeigError::Manifold(ManifoldError::GridMismatch))
        ));
    }

    #[test]
    fn recurrent_orbit_is_ambiguous() {
        // rotation: every orbit is a circle and crosses the positive x1 axis every 2 pi
        let field = VectorField::new("rotation", 2, |x, out| {
            out[0] = -x[1];
            out[1] = x[0];
        });
        let m = DataManifold::horizontal(0.0, 0.5, 2.0, 16).unwrap();
        let h = DataFunction::constant(m.grid(), c(1.0));
        let k = Keig::new(c(1.0), h, m, field, (0.0, 8.0)).unwrap();
        assert!(matches!(
            k.pullback(&[0.0, 1.0]),
            Err(KeigError::AmbiguousCrossing { .. })
        ));
    }
}
