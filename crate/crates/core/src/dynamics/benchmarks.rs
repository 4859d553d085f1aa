//! Built-in systems with default data manifolds and, where known, an exact eigenfunction.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::VectorField;
use crate::keig::ClosedFormEigenfunction;
use crate::manifold::DataManifold;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Benchmark {
    /// `x' = a x`
    Lin1d { a: f64 },
    /// `x1' = a1 x1, x2' = a2 x2`
    Lin2d { a1: f64, a2: f64 },
    /// Hopf normal form `r' = r (mu - r^2), theta' = 1` in Cartesian coordinates.
    Hopf { mu: f64 },
    /// `x1' = x2, x2' = x2 (1 - x1^2) - x1`
    VanDerPol,
    /// `x' = x^2`, finite-time blow-up for positive data.
    BlowUp,
    /// `I' = 0, theta' = I` with state `(I, theta)`, theta unwrapped.
    ActionAngle,
}

/// A benchmark field with its default data manifold and time window.
#[derive(Debug, Clone)]
pub struct BenchmarkSystem {
    pub field: VectorField,
    pub default_manifold: DataManifold,
    pub default_window: (f64, f64),
    pub oracle: Option<ClosedFormEigenfunction>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BenchmarkError {
    #[error("unknown benchmark system `{0}`")]
    Unknown(String),
    #[error("system `{name}` takes {expected} parameters, got {got}")]
    Arity {
        name: String,
        expected: usize,
        got: usize,
    },
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

impl Benchmark {
    /// Looks a system up by name: `lin1d(a)`, `lin2d(a1, a2)`, `hopf(mu)`, `vdp`,
    /// `blowup`, `action_angle`. Missing parameters take the usual defaults.
    pub fn from_name(name: &str, params: &[f64]) -> Result<Self, BenchmarkError> {
        let arity = |expected: usize| {
            if params.len() > expected {
                Err(BenchmarkError::Arity {
                    name: name.to_string(),
                    expected,
                    got: params.len(),
                })
            } else {
                Ok(())
            }
        };
        let p = |i: usize, default: f64| params.get(i).copied().unwrap_or(default);
        match name {
            "lin1d" => arity(1).map(|_| Benchmark::Lin1d { a: p(0, 1.0) }),
            "lin2d" => arity(2).map(|_| Benchmark::Lin2d {
                a1: p(0, 1.0),
                a2: p(1, 2.0),
            }),
            "hopf" => arity(1).map(|_| Benchmark::Hopf { mu: p(0, 1.0) }),
            "vdp" | "van_der_pol" => arity(0).map(|_| Benchmark::VanDerPol),
            "blowup" => arity(0).map(|_| Benchmark::BlowUp),
            "action_angle" => arity(0).map(|_| Benchmark::ActionAngle),
            other => Err(BenchmarkError::Unknown(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Benchmark::Lin1d { .. } => "lin1d",
            Benchmark::Lin2d { .. } => "lin2d",
            Benchmark::Hopf { .. } => "hopf",
            Benchmark::VanDerPol => "vdp",
            Benchmark::BlowUp => "blowup",
            Benchmark::ActionAngle => "action_angle",
        }
    }

    pub fn field(&self) -> VectorField {
        match *self {
            Benchmark::Lin1d { a } => VectorField::new("lin1d", 1, move |x, out| out[0] = a * x[0])
                .with_closed_form_flow(move |x, t| Some(vec![x[0] * (a * t).exp()])),
            Benchmark::Lin2d { a1, a2 } => VectorField::new("lin2d", 2, move |x, out| {
                out[0] = a1 * x[0];
                out[1] = a2 * x[1];
            })
            .with_closed_form_flow(move |x, t| {
                Some(vec![x[0] * (a1 * t).exp(), x[1] * (a2 * t).exp()])
            }),
            Benchmark::Hopf { mu } => VectorField::new("hopf", 2, move |x, out| {
                let r2 = x[0] * x[0] + x[1] * x[1];
                out[0] = -x[1] + x[0] * (mu - r2);
                out[1] = x[0] + x[1] * (mu - r2);
            })
            .with_closed_form_flow(move |x, t| hopf_flow(mu, x, t)),
            Benchmark::VanDerPol => VectorField::new("vdp", 2, |x, out| {
                out[0] = x[1];
                out[1] = x[1] * (1.0 - x[0] * x[0]) - x[0];
            }),
            Benchmark::BlowUp => VectorField::new("blowup", 1, |x, out| out[0] = x[0] * x[0])
                .with_closed_form_flow(|x, t| {
                    let denom = 1.0 - x[0] * t;
                    // the solution exists while 1 - x0 t keeps its initial sign
                    (denom > 0.0).then(|| vec![x[0] / denom])
                }),
            Benchmark::ActionAngle => VectorField::new("action_angle", 2, |x, out| {
                out[0] = 0.0;
                out[1] = x[0];
            })
            .with_closed_form_flow(|x, t| Some(vec![x[0], x[1] + x[0] * t])),
        }
    }

    pub fn system(&self) -> BenchmarkSystem {
        let field = self.field();
        match *self {
            Benchmark::Lin1d { a } => BenchmarkSystem {
                field,
                default_manifold: DataManifold::point(1.0),
                default_window: (-1.0, 1.0),
                oracle: Some(ClosedFormEigenfunction::new("x", c(a), |x| Some(c(x[0])))),
            },
            Benchmark::Lin2d { a2, .. } => BenchmarkSystem {
                field,
                default_manifold: DataManifold::horizontal(1.0, 0.25, 2.5, 46)
                    .expect("valid segment"),
                default_window: (0.0, 1.0),
                oracle: Some(ClosedFormEigenfunction::new("x2", c(a2), |x| Some(c(x[1])))),
            },
            Benchmark::Hopf { mu } => BenchmarkSystem {
                field,
                default_manifold: DataManifold::circle([0.0, 0.0], 5.0, 0.0, 2.0 * PI, 361)
                    .expect("valid circle"),
                default_window: (0.0, 3.0),
                oracle: (mu > 0.0).then(|| hopf_oracle(mu, 5.0)),
            },
            Benchmark::VanDerPol => BenchmarkSystem {
                field,
                default_manifold: DataManifold::segment(&[0.5, 0.0], &[3.0, 0.0], 0.0, 1.0, 41)
                    .expect("valid segment"),
                default_window: (0.0, 2.0),
                oracle: None,
            },
            Benchmark::BlowUp => BenchmarkSystem {
                field,
                default_manifold: DataManifold::point(1.0),
                // sweeps [0.5, 2] from the point x = 1
                default_window: (-1.0, 0.5),
                oracle: Some(ClosedFormEigenfunction::new("exp(-1/x)", c(1.0), |x| {
                    (x[0] > 0.0).then(|| c((-1.0 / x[0]).exp()))
                })),
            },
            Benchmark::ActionAngle => BenchmarkSystem {
                field,
                default_manifold: DataManifold::segment(&[1.0, 0.5], &[2.0, 0.5], 1.0, 2.0, 41)
                    .expect("valid segment"),
                default_window: (0.0, 1.0),
                oracle: Some(ClosedFormEigenfunction::new("exp((theta - 0.5)/I)", c(1.0), |x| {
                    (x[0] > 0.0).then(|| c(((x[1] - 0.5) / x[0]).exp()))
                })),
            },
        }
    }
}

/// Exact Hopf flow: `u = 1/r^2` solves `u' = 2 - 2 mu u`.
fn hopf_flow(mu: f64, x: &[f64], t: f64) -> Option<Vec<f64>> {
    let r0sq = x[0] * x[0] + x[1] * x[1];
    if r0sq == 0.0 {
        return Some(vec![0.0, 0.0]);
    }
    let u0 = 1.0 / r0sq;
    let u = if mu == 0.0 {
        u0 + 2.0 * t
    } else {
        1.0 / mu + (u0 - 1.0 / mu) * (-2.0 * mu * t).exp()
    };
    if !(u > 0.0) || !u.is_finite() {
        return None;
    }
    let r = u.recip().sqrt();
    let theta = x[1].atan2(x[0]) + t;
    Some(vec![r * theta.cos(), r * theta.sin()])
}

/// `exp(r*(x))` for data `h = 1` on the circle of radius `radius > sqrt(mu)`;
/// `r*` is the exact time to fall from the circle to radius `|x|`.
fn hopf_oracle(mu: f64, radius: f64) -> ClosedFormEigenfunction {
    ClosedFormEigenfunction::new("hopf exp(r*)", c(1.0), move |x| {
        let r2 = x[0] * x[0] + x[1] * x[1];
        if r2 <= mu || r2 > radius * radius * (1.0 + 1e-12) {
            return None;
        }
        let ratio = (1.0 / r2 - 1.0 / mu) / (1.0 / (radius * radius) - 1.0 / mu);
        let r_star = -ratio.ln() / (2.0 * mu);
        Some(c(r_star.exp()))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{flow, FlowOptions};
    use crate::keig::{koopman_residual, Eigenfunction};
    use crate::manifold::check_transversality;

    fn all() -> Vec<Benchmark> {
        vec![
            Benchmark::Lin1d { a: 0.7 },
            Benchmark::Lin2d { a1: 1.0, a2: 2.0 },
            Benchmark::Hopf { mu: 1.0 },
            Benchmark::VanDerPol,
            Benchmark::BlowUp,
            Benchmark::ActionAngle,
        ]
    }

    fn sample_points(b: Benchmark) -> Vec<Vec<f64>> {
        (0..10)
            .map(|i| {
                let u = i as f64 / 9.0;
                match b {
                    Benchmark::Lin1d { .. } => vec![0.5 + u],
                    Benchmark::BlowUp => vec![0.2 + 0.1 * u],
                    Benchmark::ActionAngle => vec![1.0 + u, 0.5 + u],
                    Benchmark::Hopf { .. } => vec![1.0 + 0.5 * u, -0.5 + 0.5 * u],
                    _ => vec![0.5 + u, 1.0 - 0.5 * u],
                }
            })
            .collect()
    }

    #[test]
    fn registry_round_trip() {
        for b in all() {
            let params: Vec<f64> = match b {
                Benchmark::Lin1d { a } => vec![a],
                Benchmark::Lin2d { a1, a2 } => vec![a1, a2],
                Benchmark::Hopf { mu } => vec![mu],
                _ => vec![],
            };
            assert_eq!(Benchmark::from_name(b.name(), &params).unwrap(), b);
        }
        assert!(matches!(
            Benchmark::from_name("lorenz", &[]),
            Err(BenchmarkError::Unknown(_))
        ));
        assert!(matches!(
            Benchmark::from_name("vdp", &[1.0]),
            Err(BenchmarkError::Arity { .. })
        ));
    }

    #[test]
    fn rhs_dimension() {
        for b in all() {
            let sys = b.system();
            let x = sys.default_manifold.embed(sys.default_manifold.grid().s_min);
            assert_eq!(sys.field.eval(&x).len(), sys.field.dim());
        }
    }

    #[test]
    fn default_manifolds_are_transverse() {
        for b in all() {
            let sys = b.system();
            let report = check_transversality(&sys.default_manifold, &sys.field).unwrap();
            assert!(report.pass, "{}: {report:?}", b.name());
        }
    }

    #[test]
    fn closed_form_flows_match_integration() {
        let opts = FlowOptions::default();
        for b in all() {
            let field = b.field();
            if !field.has_closed_form_flow() {
                continue;
            }
            for x in sample_points(b) {
                for t in [-0.1, 0.3, 0.9] {
                    let exact = field.exact_flow(&x, t).unwrap();
                    let num = flow(&field, &x, t, &opts).unwrap().state;
                    for (a, e) in num.iter().zip(&exact) {
                        assert!(
                            (a - e).abs() <= 1e-8 * (1.0 + e.abs()),
                            "{} x={x:?} t={t}: {num:?} vs {exact:?}",
                            b.name()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn closed_form_flows_compose() {
        for b in all() {
            let field = b.field();
            if !field.has_closed_form_flow() {
                continue;
            }
            for x in sample_points(b) {
                let direct = field.exact_flow(&x, 0.7).unwrap();
                let mid = field.exact_flow(&x, 0.4).unwrap();
                let composed = field.exact_flow(&mid, 0.3).unwrap();
                for (a, e) in composed.iter().zip(&direct) {
                    assert!((a - e).abs() <= 1e-10 * (1.0 + e.abs()));
                }
            }
        }
    }

    #[test]
    fn oracles_are_eigenfunctions() {
        for b in all() {
            let sys = b.system();
            let Some(oracle) = &sys.oracle else { continue };
            let pts = sample_points(b);
            let r = koopman_residual(oracle, &sys.field, &pts, 0.1, &FlowOptions::default()).unwrap();
            assert!(r <= 1e-6, "{}: {r}", b.name());
            assert!(oracle.eval(&pts[0]).is_ok());
        }
    }
}
