//! Dormand-Prince 5(4) stepper with adaptive step control.
//!
//! The stepper advances a single trajectory towards a fixed end time and keeps
//! the last accepted step around so callers can re-step from its start with a
//! shorter step. Event location uses that to bisect inside an accepted step
//! with the full accuracy of the method.

use super::{DynamicsError, FlowOptions, VectorField};

const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

// 5th order solution minus embedded 4th order solution.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;

/// Outcome of a single trial step.
struct Trial {
    y: Vec<f64>,
    f: Vec<f64>,
    err: f64,
}

/// A trajectory being integrated from `t = 0` towards `t_end` (either sign).
pub(crate) struct Stepper<'a> {
    field: &'a VectorField,
    opts: &'a FlowOptions,
    t_end: f64,
    dir: f64,
    t: f64,
    y: Vec<f64>,
    f: Vec<f64>,
    h: f64,
    steps: usize,
    prev_t: f64,
    prev_y: Vec<f64>,
    prev_f: Vec<f64>,
}

impl<'a> Stepper<'a> {
    pub(crate) fn new(
        field: &'a VectorField,
        x0: &[f64],
        t_end: f64,
        opts: &'a FlowOptions,
    ) -> Result<Self, DynamicsError> {
        if x0.len() != field.dim() {
            return Err(DynamicsError::DimensionMismatch {
                expected: field.dim(),
                got: x0.len(),
            });
        }
        if !t_end.is_finite() {
            return Err(DynamicsError::NonFiniteTime(t_end));
        }
        let dir = if t_end < 0.0 { -1.0 } else { 1.0 };
        let y = x0.to_vec();
        let f = field.eval(&y);
        let mut stepper = Stepper {
            field,
            opts,
            t_end,
            dir,
            t: 0.0,
            prev_t: 0.0,
            prev_y: y.clone(),
            prev_f: f.clone(),
            y,
            f,
            h: 0.0,
            steps: 0,
        };
        stepper.h = stepper.initial_step();
        Ok(stepper)
    }

    pub(crate) fn time(&self) -> f64 {
        self.t
    }

    pub(crate) fn state(&self) -> &[f64] {
        &self.y
    }

    pub(crate) fn into_state(self) -> Vec<f64> {
        self.y
    }

    pub(crate) fn steps(&self) -> usize {
        self.steps
    }

    pub(crate) fn finished(&self) -> bool {
        self.t == self.t_end
    }

    /// Time at the start of the last accepted step.
    pub(crate) fn prev_time(&self) -> f64 {
        self.prev_t
    }

    fn scale(&self, a: f64, b: f64) -> f64 {
        self.opts.tol * (1.0 + a.abs().max(b.abs()))
    }

    fn initial_step(&self) -> f64 {
        let span = self.t_end.abs();
        if span == 0.0 {
            return 0.0;
        }
        let n = self.y.len() as f64;
        let norm = |v: &[f64], y: &[f64]| {
            (v.iter()
                .zip(y)
                .map(|(vi, yi)| (vi / self.scale(*yi, *yi)).powi(2))
                .sum::<f64>()
                / n)
                .sqrt()
        };
        let d0 = norm(&self.y, &self.y);
        let d1 = norm(&self.f, &self.y);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let h0 = h0.min(span);
        let y1: Vec<f64> = self
            .y
            .iter()
            .zip(&self.f)
            .map(|(y, f)| y + self.dir * h0 * f)
            .collect();
        let f1 = self.field.eval(&y1);
        let df: Vec<f64> = f1.iter().zip(&self.f).map(|(a, b)| a - b).collect();
        let d2 = norm(&df, &self.y) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        let h = (100.0 * h0).min(h1).min(span);
        if h.is_finite() && h > 0.0 {
            h
        } else {
            span.min(1e-3)
        }
    }

    /// One Dormand-Prince step of signed size `h` from `(y, f)`.
    fn trial(&self, y: &[f64], f: &[f64], h: f64) -> Trial {
        let d = y.len();
        let mut k: [Vec<f64>; 7] = Default::default();
        k[0] = f.to_vec();
        let mut stage = vec![0.0; d];
        for s in 1..7 {
            for i in 0..d {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += A[s][j] * kj[i];
                }
                stage[i] = y[i] + h * acc;
            }
            k[s] = self.field.eval(&stage);
        }
        // stage 7 is evaluated at the 5th order solution (FSAL)
        let y_new = stage;
        let mut err: f64 = 0.0;
        for i in 0..d {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += E[j] * kj[i];
            }
            let sc = self.scale(y[i], y_new[i]);
            err = err.max((h * e).abs() / sc);
        }
        if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            err = f64::INFINITY;
        }
        Trial {
            y: y_new,
            f: k[6].clone(),
            err,
        }
    }

    /// Advances by one accepted step. Returns `Ok(false)` once `t_end` is reached.
    pub(crate) fn step(&mut self) -> Result<bool, DynamicsError> {
        if self.finished() {
            return Ok(false);
        }
        loop {
            if self.steps >= self.opts.max_steps {
                return Err(DynamicsError::MaxStepsExceeded {
                    t: self.t,
                    steps: self.steps,
                });
            }
            let remaining = (self.t_end - self.t).abs();
            let mut h = self.h.abs();
            let last = h >= remaining * (1.0 - 1e-12) || remaining - h < 1e-12 * remaining;
            if last {
                h = remaining;
            }
            let trial = self.trial(&self.y, &self.f, self.dir * h);
            let err = trial.err;
            if err <= 1.0 {
                let fac = if err == 0.0 {
                    FAC_MAX
                } else {
                    (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, FAC_MAX)
                };
                self.prev_t = self.t;
                self.prev_y = std::mem::replace(&mut self.y, trial.y);
                self.prev_f = std::mem::replace(&mut self.f, trial.f);
                self.t = if last {
                    self.t_end
                } else {
                    self.t + self.dir * h
                };
                // keep the controller's proposal independent of a clipped final step
                self.h = if last { self.h.abs().max(h) } else { h * fac };
                self.steps += 1;
                let norm = self.y.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                if !norm.is_finite() || norm > self.opts.blowup_bound {
                    return Err(DynamicsError::BlowUp { t: self.t, norm });
                }
                return Ok(true);
            }
            let fac = if err.is_finite() {
                (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, 1.0)
            } else {
                FAC_MIN
            };
            let proposal = h * fac;
            if proposal < self.opts.min_step {
                return Err(DynamicsError::StepUnderflow {
                    t: self.t,
                    h: proposal,
                });
            }
            self.h = proposal;
        }
    }

    /// State at `prev_time() + tau` obtained by a fresh step from the start of the
    /// last accepted step. `tau` carries the integration direction.
    pub(crate) fn restep(&self, tau: f64) -> Vec<f64> {
        if tau == 0.0 {
            return self.prev_y.clone();
        }
        self.trial(&self.prev_y, &self.prev_f, tau).y
    }
}
