//! Vector fields, adaptive flow integration and surface-crossing detection.

mod benchmarks;
mod integrator;

use std::fmt;
use std::ops::ControlFlow;
use std::sync::Arc;

use thiserror::Error;

pub use benchmarks::{Benchmark, BenchmarkError, BenchmarkSystem};
pub(crate) use integrator::Stepper;

/// Default local error tolerance for flow integration.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Maximum number of bisection steps used to refine a crossing.
pub const MAX_BISECTIONS: usize = 80;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("state norm {norm:e} exceeded the blow-up bound at t = {t}")]
    BlowUp { t: f64, norm: f64 },
    #[error("step size {h:e} fell below the minimum at t = {t}")]
    StepUnderflow { t: f64, h: f64 },
    #[error("no crossing of the event surface within t_max = {t_max}")]
    NoCrossing { t_max: f64 },
    #[error("step budget exhausted after {steps} steps at t = {t}")]
    MaxStepsExceeded { t: f64, steps: usize },
    #[error("state has dimension {got}, field expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("integration time {0} is not finite")]
    NonFiniteTime(f64),
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
}

type Rhs = dyn Fn(&[f64], &mut [f64]) + Send + Sync;
type ExactFlow = dyn Fn(&[f64], f64) -> Option<Vec<f64>> + Send + Sync;

/// Right-hand side `F` of an autonomous system `x' = F(x)`.
///
/// Cloning is cheap; the closures are shared.
#[derive(Clone)]
pub struct VectorField {
    name: String,
    dim: usize,
    rhs: Arc<Rhs>,
    closed_form_flow: Option<Arc<ExactFlow>>,
}

impl VectorField {
    pub fn new<F>(name: impl Into<String>, dim: usize, rhs: F) -> Self
    where
        F: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    {
        assert!(dim > 0, "vector field dimension must be positive");
        VectorField {
            name: name.into(),
            dim,
            rhs: Arc::new(rhs),
            closed_form_flow: None,
        }
    }

    /// Attaches an exact flow map `(x, t) -> x(t)`. Returning `None` marks a time
    /// at which the solution does not exist.
    pub fn with_closed_form_flow<G>(mut self, flow: G) -> Self
    where
        G: Fn(&[f64], f64) -> Option<Vec<f64>> + Send + Sync + 'static,
    {
        self.closed_form_flow = Some(Arc::new(flow));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        (self.rhs)(x, &mut out);
        out
    }

    pub fn has_closed_form_flow(&self) -> bool {
        self.closed_form_flow.is_some()
    }

    pub fn exact_flow(&self, x: &[f64], t: f64) -> Option<Vec<f64>> {
        self.closed_form_flow.as_ref().and_then(|f| f(x, t))
    }
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorField")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("closed_form_flow", &self.closed_form_flow.is_some())
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    /// Local error tolerance per step (mixed absolute/relative).
    pub tol: f64,
    /// States with a larger max-norm are reported as [`DynamicsError::BlowUp`].
    pub blowup_bound: f64,
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            tol: DEFAULT_TOL,
            blowup_bound: 1e12,
            min_step: 1e-14,
            max_steps: 1_000_000,
        }
    }
}

impl FlowOptions {
    pub fn with_tol(tol: f64) -> Self {
        FlowOptions {
            tol,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<(), DynamicsError> {
        if self.tol > 0.0 && self.tol.is_finite() {
            Ok(())
        } else {
            Err(DynamicsError::BadTolerance(self.tol))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowResult {
    pub state: Vec<f64>,
    pub time_elapsed: f64,
    pub steps_taken: usize,
}

/// Integrates `x' = F(x)` from `x0` for time `t` (negative `t` runs backwards).
pub fn flow(
    field: &VectorField,
    x0: &[f64],
    t: f64,
    opts: &FlowOptions,
) -> Result<FlowResult, DynamicsError> {
    opts.validate()?;
    let mut stepper = Stepper::new(field, x0, t, opts)?;
    while stepper.step()? {}
    let steps_taken = stepper.steps();
    Ok(FlowResult {
        state: stepper.into_state(),
        time_elapsed: t,
        steps_taken,
    })
}

/// Flow by the closed form when the field has one, numerically otherwise.
pub fn advance(
    field: &VectorField,
    x0: &[f64],
    t: f64,
    opts: &FlowOptions,
) -> Result<Vec<f64>, DynamicsError> {
    if t == 0.0 {
        return Ok(x0.to_vec());
    }
    if field.has_closed_form_flow() {
        return field.exact_flow(x0, t).ok_or(DynamicsError::BlowUp {
            t,
            norm: f64::INFINITY,
        });
    }
    flow(field, x0, t, opts).map(|r| r.state)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }
}

/// A located crossing of an event surface.
#[derive(Debug, Clone, PartialEq)]
pub struct EventHit {
    pub state: Vec<f64>,
    /// Non-negative flow time from the start point; the sign is given by the
    /// scan direction.
    pub time_of_flight: f64,
}

/// How a crossing scan ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanEnd {
    /// The callback asked to stop.
    Stopped,
    /// The time budget ran out.
    Exhausted,
}

/// Integrates from `x0` in `direction` for at most `t_max` and reports every sign
/// change of `event` to `on_crossing`, refined by bisection to `|event| < tol`.
pub fn scan_crossings<E, C>(
    field: &VectorField,
    x0: &[f64],
    event: E,
    direction: Direction,
    t_max: f64,
    opts: &FlowOptions,
    mut on_crossing: C,
) -> Result<ScanEnd, DynamicsError>
where
    E: Fn(&[f64]) -> f64,
    C: FnMut(EventHit) -> ControlFlow<()>,
{
    opts.validate()?;
    let t_end = direction.sign() * t_max;
    let mut stepper = Stepper::new(field, x0, t_end, opts)?;
    let mut g_prev = event(x0);
    while stepper.step()? {
        let g_new = event(stepper.state());
        let crossed = (g_prev != 0.0 && g_new == 0.0) || g_prev * g_new < 0.0;
        if crossed {
            let hit = refine_crossing(&stepper, &event, g_prev, g_new, opts.tol);
            if on_crossing(hit).is_break() {
                return Ok(ScanEnd::Stopped);
            }
        }
        g_prev = g_new;
    }
    Ok(ScanEnd::Exhausted)
}

fn refine_crossing<E>(stepper: &Stepper<'_>, event: &E, g_lo: f64, g_hi: f64, tol: f64) -> EventHit
where
    E: Fn(&[f64]) -> f64,
{
    let t0 = stepper.prev_time();
    let h = stepper.time() - t0;
    if g_hi == 0.0 || g_hi.abs() < tol && g_lo.abs() >= tol {
        return EventHit {
            state: stepper.state().to_vec(),
            time_of_flight: stepper.time().abs(),
        };
    }
    let (mut lo, mut hi) = (0.0_f64, h);
    let mut g_lo = g_lo;
    let mut best = (stepper.state().to_vec(), h, g_hi.abs());
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let y = stepper.restep(mid);
        let g = event(&y);
        if g.abs() < best.2 {
            best = (y.clone(), mid, g.abs());
        }
        if g.abs() < tol {
            break;
        }
        if (g < 0.0) == (g_lo < 0.0) {
            lo = mid;
            g_lo = g;
        } else {
            hi = mid;
        }
    }
    EventHit {
        state: best.0,
        time_of_flight: (t0 + best.1).abs(),
    }
}

/// Flows until `event` changes sign and returns the crossing state and flight time.
///
/// A start point with `|event(x0)| < tol` is returned unchanged with zero flight time.
pub fn flow_to_event<E>(
    field: &VectorField,
    x0: &[f64],
    event: E,
    direction: Direction,
    t_max: f64,
    opts: &FlowOptions,
) -> Result<EventHit, DynamicsError>
where
    E: Fn(&[f64]) -> f64,
{
    opts.validate()?;
    if event(x0).abs() < opts.tol {
        return Ok(EventHit {
            state: x0.to_vec(),
            time_of_flight: 0.0,
        });
    }
    let mut found = None;
    scan_crossings(field, x0, event, direction, t_max, opts, |hit| {
        found = Some(hit);
        ControlFlow::Break(())
    })?;
    found.ok_or(DynamicsError::NoCrossing { t_max })
}
