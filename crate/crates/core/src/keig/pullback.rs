use std::ops::ControlFlow;

use serde::Serialize;

use super::KeigError;
use crate::dynamics::{scan_crossings, Direction, DynamicsError, FlowOptions, VectorField};
use crate::manifold::DataManifold;

/// Where a point's orbit meets the data manifold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pullback {
    /// Flow time from the foot point to the query point.
    pub r_star: f64,
    /// Manifold parameter of the foot point.
    pub s_star: f64,
    pub foot: Vec<f64>,
}

/// Everything needed to pull a point back onto the data manifold.
#[derive(Debug, Clone)]
pub struct PullbackContext {
    pub field: VectorField,
    pub manifold: DataManifold,
    /// `[t1, t2]` with `t1 <= 0 <= t2`; the domain is the union of the flow
    /// images of the manifold over this window.
    pub t_window: (f64, f64),
    pub opts: FlowOptions,
}

impl PullbackContext {
    pub fn new(
        field: VectorField,
        manifold: DataManifold,
        t_window: (f64, f64),
        opts: FlowOptions,
    ) -> Result<Self, KeigError> {
        let (t1, t2) = t_window;
        if !(t1 <= 0.0 && 0.0 <= t2) || !t1.is_finite() || !t2.is_finite() {
            return Err(KeigError::BadWindow { t1, t2 });
        }
        if field.dim() != manifold.dim() {
            return Err(KeigError::Dimension {
                expected: field.dim(),
                got: manifold.dim(),
            });
        }
        Ok(PullbackContext {
            field,
            manifold,
            t_window,
            opts,
        })
    }

    /// Largest distance between a crossing and the manifold for the crossing to
    /// count as landing on it (rather than on its supporting surface elsewhere).
    fn landing_tol(&self, foot: &[f64]) -> f64 {
        let scale = foot.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        (1e3 * self.opts.tol).max(1e-7) * scale
    }

    fn window_slack(&self, budget: f64) -> f64 {
        1e-8 * (1.0 + budget)
    }

    /// Finds `(r*, s*)` for `x`: integrates backwards (then forwards when the
    /// window extends to negative times) until the orbit crosses the manifold.
    pub fn pullback(&self, x: &[f64]) -> Result<Pullback, KeigError> {
        if x.len() != self.field.dim() {
            return Err(KeigError::Dimension {
                expected: self.field.dim(),
                got: x.len(),
            });
        }
        if self.manifold.level(x).abs() < self.opts.tol {
            let (s, d) = self.manifold.project(x);
            if d <= self.landing_tol(x) {
                return Ok(Pullback {
                    r_star: 0.0,
                    s_star: s,
                    foot: x.to_vec(),
                });
            }
        }
        let (t1, t2) = self.t_window;
        let mut legs = Vec::with_capacity(2);
        if t2 > 0.0 {
            legs.push((Direction::Backward, t2));
        }
        if t1 < 0.0 {
            legs.push((Direction::Forward, -t1));
        }
        for (direction, budget) in legs {
            if let Some(hit) = self.scan_leg(x, direction, budget)? {
                return Ok(hit);
            }
        }
        Err(KeigError::NotInDomain { x: x.to_vec() })
    }

    fn scan_leg(
        &self,
        x: &[f64],
        direction: Direction,
        budget: f64,
    ) -> Result<Option<Pullback>, KeigError> {
        let t_max = budget + self.window_slack(budget);
        let mut first: Option<Pullback> = None;
        let mut ambiguous = None;
        let sign = match direction {
            Direction::Backward => 1.0,
            Direction::Forward => -1.0,
        };
        let scan = scan_crossings(
            &self.field,
            x,
            |y| self.manifold.level(y),
            direction,
            t_max,
            &self.opts,
            |hit| {
                let (s, d) = self.manifold.project(&hit.state);
                if d > self.landing_tol(&hit.state) {
                    return ControlFlow::Continue(());
                }
                let r_star = sign * hit.time_of_flight;
                match &first {
                    None => {
                        first = Some(Pullback {
                            r_star,
                            s_star: s,
                            foot: hit.state,
                        });
                        ControlFlow::Continue(())
                    }
                    Some(p) => {
                        ambiguous = Some((p.r_star, r_star));
                        ControlFlow::Break(())
                    }
                }
            },
        );
        if let Some((first, second)) = ambiguous {
            return Err(KeigError::AmbiguousCrossing { first, second });
        }
        match scan {
            Ok(_) => Ok(first),
            // past the first landing the orbit may leave the region where the
            // flow exists; that cannot produce a second landing
            Err(_) if first.is_some() => Ok(first),
            Err(
                DynamicsError::BlowUp { .. }
                | DynamicsError::StepUnderflow { .. }
                | DynamicsError::MaxStepsExceeded { .. },
            ) => Ok(None),
            Err(e) => Err(e.into()),
        }
    }
}
