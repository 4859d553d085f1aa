//! Transverse data manifolds and the data functions that live on them.
//!
//! A [`DataManifold`] is a one-parameter curve (a single point when the state
//! space is one-dimensional) crossed by every characteristic of the flow. Data
//! functions are tabulated on the manifold's uniform parameter grid and read
//! back by linear interpolation.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::VectorField;

/// Normalized cross magnitude below which the manifold counts as tangent to the flow.
pub const TRANSVERSALITY_THRESHOLD: f64 = 1e-8;

/// Slack allowed when evaluating a data function just outside its parameter range.
pub const RANGE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ManifoldError {
    #[error("parameter {s} outside [{s_min}, {s_max}]")]
    OutOfRange { s: f64, s_min: f64, s_max: f64 },
    #[error("vector field vanishes on the manifold at s = {s}")]
    ZeroField { s: f64 },
    #[error("data functions live on different grids")]
    GridMismatch,
    #[error("expected {expected} samples, got {got}")]
    SampleCount { expected: usize, got: usize },
    #[error("non-finite data value at node {0}")]
    NonFinite(usize),
    #[error("manifold revisits the same point at s = {0} and s = {1}")]
    NotInjective(f64, f64),
    #[error("manifold dimension {manifold} does not match field dimension {field}")]
    DimensionMismatch { manifold: usize, field: usize },
    #[error("invalid manifold: {0}")]
    Invalid(String),
}

/// Uniform parameter grid `s_0 < s_1 < ... < s_{count-1}` on `[s_min, s_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamGrid {
    pub s_min: f64,
    pub s_max: f64,
    pub count: usize,
}

impl ParamGrid {
    pub fn new(s_min: f64, s_max: f64, count: usize) -> Result<Self, ManifoldError> {
        if count == 0 || !s_min.is_finite() || !s_max.is_finite() || s_max < s_min {
            return Err(ManifoldError::Invalid(format!(
                "bad parameter grid [{s_min}, {s_max}] with {count} nodes"
            )));
        }
        if count > 1 && s_max == s_min {
            return Err(ManifoldError::Invalid(
                "several nodes on a degenerate parameter range".into(),
            ));
        }
        Ok(ParamGrid {
            s_min,
            s_max,
            count,
        })
    }

    pub fn spacing(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.s_max - self.s_min) / (self.count - 1) as f64
        }
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            self.s_max
        } else {
            self.s_min + i as f64 * self.spacing()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.node(i)).collect()
    }

    /// Clamps `s` into range when it lies within [`RANGE_SLACK`] of it.
    pub fn clamp(&self, s: f64) -> Result<f64, ManifoldError> {
        if s < self.s_min - RANGE_SLACK || s > self.s_max + RANGE_SLACK || s.is_nan() {
            return Err(ManifoldError::OutOfRange {
                s,
                s_min: self.s_min,
                s_max: self.s_max,
            });
        }
        Ok(s.clamp(self.s_min, self.s_max))
    }

    fn same_as(&self, other: &ParamGrid) -> bool {
        self.count == other.count
            && (self.s_min - other.s_min).abs() <= 1e-12 * (1.0 + self.s_min.abs())
            && (self.s_max - other.s_max).abs() <= 1e-12 * (1.0 + self.s_max.abs())
    }
}

type CurveFn = dyn Fn(f64) -> Vec<f64> + Send + Sync;
type LevelFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// Declarative description of a manifold, as found in run configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ManifoldSpec {
    /// Straight segment; the parameter runs over `s_range` (default `[0, 1]`).
    Segment {
        from: Vec<f64>,
        to: Vec<f64>,
        n: usize,
        #[serde(default)]
        s_range: Option<[f64; 2]>,
    },
    /// Circular arc parameterized by the polar angle.
    Circle {
        center: [f64; 2],
        radius: f64,
        arc: [f64; 2],
        n: usize,
    },
    /// A single point of a one-dimensional state space.
    Point { at: f64 },
}

impl ManifoldSpec {
    pub fn build(&self) -> Result<DataManifold, ManifoldError> {
        match self {
            ManifoldSpec::Segment {
                from,
                to,
                n,
                s_range,
            } => {
                let [lo, hi] = s_range.unwrap_or([0.0, 1.0]);
                DataManifold::segment(from, to, lo, hi, *n)
            }
            ManifoldSpec::Circle {
                center,
                radius,
                arc,
                n,
            } => DataManifold::circle(*center, *radius, arc[0], arc[1], *n),
            ManifoldSpec::Point { at } => Ok(DataManifold::point(*at)),
        }
    }
}

/// Parameterized codimension-one data manifold `s -> x(s)`.
#[derive(Clone)]
pub struct DataManifold {
    dim: usize,
    grid: ParamGrid,
    embed: Arc<CurveFn>,
    tangent: Option<Arc<CurveFn>>,
    level: Arc<LevelFn>,
    periodic: bool,
    label: String,
}

impl fmt::Debug for DataManifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DataManifold")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("grid", &self.grid)
            .field("periodic", &self.periodic)
            .finish()
    }
}

impl DataManifold {
    /// Custom manifold. `level` must be a signed function vanishing on the
    /// supporting surface of the manifold; crossings of the flow are detected
    /// through its sign changes.
    pub fn custom<E, L>(
        label: impl Into<String>,
        dim: usize,
        grid: ParamGrid,
        embed: E,
        level: L,
    ) -> Self
    where
        E: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
        L: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        DataManifold {
            dim,
            grid,
            embed: Arc::new(embed),
            tangent: None,
            level: Arc::new(level),
            periodic: false,
            label: label.into(),
        }
    }

    pub fn with_tangent<T>(mut self, tangent: T) -> Self
    where
        T: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    {
        self.tangent = Some(Arc::new(tangent));
        self
    }

    /// Planar segment from `from` (at `s_min`) to `to` (at `s_max`).
    pub fn segment(
        from: &[f64],
        to: &[f64],
        s_min: f64,
        s_max: f64,
        n: usize,
    ) -> Result<Self, ManifoldError> {
        if from.len() != 2 || to.len() != 2 {
            return Err(ManifoldError::Invalid(
                "segments are supported in the plane only".into(),
            ));
        }
        let grid = ParamGrid::new(s_min, s_max, n)?;
        if s_max <= s_min {
            return Err(ManifoldError::Invalid("segment needs s_min < s_max".into()));
        }
        let (p, q) = ([from[0], from[1]], [to[0], to[1]]);
        let d = [q[0] - p[0], q[1] - p[1]];
        let len = d[0].hypot(d[1]);
        if len == 0.0 {
            return Err(ManifoldError::Invalid("segment has zero length".into()));
        }
        let span = s_max - s_min;
        let tangent = [d[0] / span, d[1] / span];
        let m = DataManifold::custom(
            format!("segment {p:?} -> {q:?}"),
            2,
            grid,
            move |s| {
                let u = (s - s_min) / span;
                vec![p[0] + u * d[0], p[1] + u * d[1]]
            },
            move |x| ((x[0] - p[0]) * d[1] - (x[1] - p[1]) * d[0]) / len,
        )
        .with_tangent(move |_| tangent.to_vec());
        Ok(m)
    }

    /// Horizontal segment `x2 = height` parameterized by `s = x1`.
    pub fn horizontal(height: f64, x1_min: f64, x1_max: f64, n: usize) -> Result<Self, ManifoldError> {
        DataManifold::segment(&[x1_min, height], &[x1_max, height], x1_min, x1_max, n)
    }

    /// Vertical segment `x1 = abscissa` parameterized by `s = x2`.
    pub fn vertical(abscissa: f64, x2_min: f64, x2_max: f64, n: usize) -> Result<Self, ManifoldError> {
        DataManifold::segment(&[abscissa, x2_min], &[abscissa, x2_max], x2_min, x2_max, n)
    }

    /// Circular arc `center + radius (cos s, sin s)`, `s` in `[alpha1, alpha2]`.
    pub fn circle(
        center: [f64; 2],
        radius: f64,
        alpha1: f64,
        alpha2: f64,
        n: usize,
    ) -> Result<Self, ManifoldError> {
        if !(radius > 0.0) {
            return Err(ManifoldError::Invalid("circle radius must be positive".into()));
        }
        if alpha2 <= alpha1 || alpha2 - alpha1 > 2.0 * std::f64::consts::PI + 1e-12 {
            return Err(ManifoldError::Invalid(format!(
                "arc [{alpha1}, {alpha2}] must be increasing and at most one turn"
            )));
        }
        let grid = ParamGrid::new(alpha1, alpha2, n)?;
        let [cx, cy] = center;
        let mut m = DataManifold::custom(
            format!("circle r={radius} about {center:?}"),
            2,
            grid,
            move |s| vec![cx + radius * s.cos(), cy + radius * s.sin()],
            move |x| (x[0] - cx).hypot(x[1] - cy) - radius,
        )
        .with_tangent(move |s| vec![-radius * s.sin(), radius * s.cos()]);
        m.periodic = alpha2 - alpha1 >= 2.0 * std::f64::consts::PI - 1e-12;
        Ok(m)
    }

    /// The single point `x = at` of a one-dimensional state space.
    pub fn point(at: f64) -> Self {
        DataManifold::custom(
            format!("point {at}"),
            1,
            ParamGrid {
                s_min: 0.0,
                s_max: 0.0,
                count: 1,
            },
            move |_| vec![at],
            move |x| x[0] - at,
        )
        .with_tangent(|_| vec![1.0])
    }

    /// The same curve with `count` nodes over the same parameter range.
    pub fn resampled(&self, count: usize) -> Result<Self, ManifoldError> {
        let mut m = self.clone();
        m.grid = ParamGrid::new(self.grid.s_min, self.grid.s_max, count)?;
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grid(&self) -> ParamGrid {
        self.grid
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Closed curves (full circles) identify both ends of the parameter range.
    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn embed(&self, s: f64) -> Vec<f64> {
        (self.embed)(s)
    }

    pub fn level(&self, x: &[f64]) -> f64 {
        (self.level)(x)
    }

    /// Tangent `dx/ds`, analytic when available, central difference otherwise.
    pub fn tangent(&self, s: f64) -> Vec<f64> {
        if let Some(t) = &self.tangent {
            return t(s);
        }
        let width = (self.grid.s_max - self.grid.s_min).max(1.0);
        let step = 1e-6 * width;
        let a = self.embed(s + step);
        let b = self.embed(s - step);
        a.iter().zip(&b).map(|(a, b)| (a - b) / (2.0 * step)).collect()
    }

    /// Parameter of the manifold point closest to `x`, with that distance.
    ///
    /// Nearest grid node first, then golden-section refinement on the two
    /// adjacent grid cells.
    pub fn project(&self, x: &[f64]) -> (f64, f64) {
        let dist = |s: f64| {
            self.embed(s)
                .iter()
                .zip(x)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt()
        };
        let g = self.grid;
        if g.count == 1 {
            return (g.s_min, dist(g.s_min));
        }
        let (k, _) = (0..g.count)
            .map(|i| (i, dist(g.node(i))))
            .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
        let lo = g.node(k.saturating_sub(1));
        let hi = g.node((k + 1).min(g.count - 1));
        let s = golden_section(dist, lo, hi, 1e-14 * (1.0 + g.s_max.abs().max(g.s_min.abs())));
        let mut best = (s, dist(s));
        // the seam of a closed curve: the nearest node may sit on the other end
        if self.periodic && (k == 0 || k + 1 == g.count) {
            let (lo, hi) = if k == 0 {
                (g.node(g.count - 2), g.s_max)
            } else {
                (g.s_min, g.node(1))
            };
            let s2 = golden_section(dist, lo, hi, 1e-14 * (1.0 + g.s_max.abs()));
            let d2 = dist(s2);
            if d2 < best.1 {
                best = (s2, d2);
            }
        }
        best
    }

    /// Pairwise check on the sample grid that distinct parameters map to distinct points.
    pub fn check_injective(&self) -> Result<(), ManifoldError> {
        let nodes = self.grid.nodes();
        let pts: Vec<Vec<f64>> = nodes.iter().map(|&s| self.embed(s)).collect();
        let d = |a: &[f64], b: &[f64]| {
            a.iter()
                .zip(b)
                .map(|(x, y)| (x - y).powi(2))
                .sum::<f64>()
                .sqrt()
        };
        let min_adjacent = pts
            .windows(2)
            .map(|w| d(&w[0], &w[1]))
            .fold(f64::INFINITY, f64::min);
        let threshold = 0.5 * min_adjacent;
        let last = pts.len().saturating_sub(1);
        for i in 0..pts.len() {
            for j in i + 2..pts.len() {
                if self.periodic && i == 0 && j == last {
                    continue;
                }
                if d(&pts[i], &pts[j]) < threshold {
                    return Err(ManifoldError::NotInjective(nodes[i], nodes[j]));
                }
            }
        }
        Ok(())
    }
}

fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    // the bracket ends may beat the interior for monotone distance profiles
    [a, mid, b]
        .into_iter()
        .map(|s| (s, f(s)))
        .fold((mid, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
        .0
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransversalityReport {
    /// Minimum over the grid of `|det[tangent, F]| / (|tangent| |F|)`.
    pub min_normalized: f64,
    /// Grid parameters where the normalized magnitude is below threshold.
    pub violations: Vec<f64>,
    pub pass: bool,
}

/// Checks that the flow crosses the manifold at every sample of its grid.
pub fn check_transversality(
    manifold: &DataManifold,
    field: &VectorField,
) -> Result<TransversalityReport, ManifoldError> {
    if manifold.dim() != field.dim() {
        return Err(ManifoldError::DimensionMismatch {
            manifold: manifold.dim(),
            field: field.dim(),
        });
    }
    let mut min_normalized = f64::INFINITY;
    let mut violations = Vec::new();
    for s in manifold.grid().nodes() {
        let f = field.eval(&manifold.embed(s));
        let f_norm = norm(&f);
        if f_norm < 1e-14 {
            return Err(ManifoldError::ZeroField { s });
        }
        let value = if field.dim() == 1 {
            1.0
        } else {
            let t = manifold.tangent(s);
            let t_norm = norm(&t);
            if t_norm == 0.0 {
                0.0
            } else if field.dim() == 2 {
                (t[0] * f[1] - t[1] * f[0]).abs() / (t_norm * f_norm)
            } else {
                // sine of the angle between tangent and field
                let cos = t.iter().zip(&f).map(|(a, b)| a * b).sum::<f64>() / (t_norm * f_norm);
                (1.0 - cos * cos).max(0.0).sqrt()
            }
        };
        if value < TRANSVERSALITY_THRESHOLD {
            violations.push(s);
        }
        min_normalized = min_normalized.min(value);
    }
    Ok(TransversalityReport {
        min_normalized,
        pass: violations.is_empty(),
        violations,
    })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

type DataFn = dyn Fn(f64) -> Complex64 + Send + Sync;

/// Complex data `h` tabulated on a parameter grid.
#[derive(Clone)]
pub struct DataFunction {
    grid: ParamGrid,
    values: Vec<Complex64>,
    closed_form: Option<Arc<DataFn>>,
}

impl fmt::Debug for DataFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DataFunction")
            .field("grid", &self.grid)
            .field("values", &self.values)
            .field("closed_form", &self.closed_form.is_some())
            .finish()
    }
}

impl DataFunction {
    pub fn tabulated(grid: ParamGrid, values: Vec<Complex64>) -> Result<Self, ManifoldError> {
        if values.len() != grid.count {
            return Err(ManifoldError::SampleCount {
                expected: grid.count,
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(ManifoldError::NonFinite(i));
        }
        Ok(DataFunction {
            grid,
            values,
            closed_form: None,
        })
    }

    /// Samples `f` on the grid and keeps it for exact evaluation off the nodes.
    pub fn from_fn<F>(grid: ParamGrid, f: F) -> Result<Self, ManifoldError>
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        let values = grid.nodes().into_iter().map(&f).collect();
        let mut h = DataFunction::tabulated(grid, values)?;
        h.closed_form = Some(Arc::new(f));
        Ok(h)
    }

    pub fn constant(grid: ParamGrid, c: Complex64) -> Self {
        DataFunction::from_fn(grid, move |_| c).expect("finite constant")
    }

    /// `h(s) = coeff * s^power`, real power on the principal branch.
    pub fn monomial(grid: ParamGrid, coeff: Complex64, power: f64) -> Result<Self, ManifoldError> {
        DataFunction::from_fn(grid, move |s| {
            if power == 0.0 {
                coeff
            } else if power.fract() == 0.0 {
                coeff * s.powi(power as i32)
            } else {
                coeff * Complex64::new(s, 0.0).powf(power)
            }
        })
    }

    pub fn grid(&self) -> ParamGrid {
        self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn has_closed_form(&self) -> bool {
        self.closed_form.is_some()
    }

    /// Drops the closed form so evaluation goes through interpolation.
    pub fn tabulated_only(&self) -> Self {
        DataFunction {
            grid: self.grid,
            values: self.values.clone(),
            closed_form: None,
        }
    }

    pub fn eval(&self, s: f64) -> Result<Complex64, ManifoldError> {
        let s = self.grid.clamp(s)?;
        if let Some(f) = &self.closed_form {
            return Ok(f(s));
        }
        let g = self.grid;
        if g.count == 1 {
            return Ok(self.values[0]);
        }
        let u = (s - g.s_min) / g.spacing();
        let i = (u.floor() as usize).min(g.count - 2);
        let w = u - i as f64;
        Ok(self.values[i] * (1.0 - w) + self.values[i + 1] * w)
    }

    /// Grid derivative: second-order central differences inside, second-order
    /// one-sided at the ends (first-order with only two nodes).
    pub fn derivative_samples(&self) -> Vec<Complex64> {
        let v = &self.values;
        let n = v.len();
        let dx = self.grid.spacing();
        match n {
            0 | 1 => vec![Complex64::new(0.0, 0.0); n],
            2 => {
                let d = (v[1] - v[0]) / dx;
                vec![d, d]
            }
            _ => (0..n)
                .map(|i| {
                    if i == 0 {
                        (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dx)
                    } else if i == n - 1 {
                        (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * dx)
                    } else {
                        (v[i + 1] - v[i - 1]) / (2.0 * dx)
                    }
                })
                .collect(),
        }
    }
}

/// Sup over the grid of `|h h~' - h~ h'|`. Zero means the two data functions
/// produce eigenfunctions with the same level sets.
pub fn data_compatibility(h: &DataFunction, h_tilde: &DataFunction) -> Result<f64, ManifoldError> {
    if !h.grid.same_as(&h_tilde.grid) {
        return Err(ManifoldError::GridMismatch);
    }
    let dh = h.derivative_samples();
    let dht = h_tilde.derivative_samples();
    Ok(h.values
        .iter()
        .zip(&h_tilde.values)
        .zip(dh.iter().zip(&dht))
        .map(|((a, b), (da, db))| (a * db - b * da).norm())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Benchmark;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn constant_data() {
        let g = ParamGrid::new(0.0, 1.0, 5).unwrap();
        let h = DataFunction::constant(g, c(1.0));
        assert_eq!(h.eval(0.37).unwrap(), c(1.0));
    }

    #[test]
    fn linear_interpolation() {
        let g = ParamGrid::new(0.0, 1.0, 2).unwrap();
        let h = DataFunction::tabulated(g, vec![c(0.0), c(1.0)]).unwrap();
        assert_eq!(h.eval(0.25).unwrap(), c(0.25));
    }

    #[test]
    fn closed_form_passthrough() {
        let g = ParamGrid::new(0.0, 4.0, 3).unwrap();
        let h = DataFunction::from_fn(g, |s| c(s * s)).unwrap();
        assert_eq!(h.eval(3.0).unwrap(), c(9.0));
        assert_eq!(h.values()[1], c(4.0));
    }

    #[test]
    fn out_of_range_with_slack() {
        let g = ParamGrid::new(0.0, 1.0, 3).unwrap();
        let h = DataFunction::tabulated(g, vec![c(0.0), c(1.0), c(2.0)]).unwrap();
        assert_eq!(h.eval(1.0 + 5e-10).unwrap(), c(2.0));
        assert!(matches!(
            h.eval(1.0 + 1e-6),
            Err(ManifoldError::OutOfRange { .. })
        ));
    }

    #[test]
    fn sample_count_checked() {
        let g = ParamGrid::new(0.0, 1.0, 3).unwrap();
        let err = DataFunction::tabulated(g, vec![c(0.0)]).unwrap_err();
        assert_eq!(err, ManifoldError::SampleCount { expected: 3, got: 1 });
        let err = DataFunction::tabulated(g, vec![c(0.0), c(f64::NAN), c(1.0)]).unwrap_err();
        assert_eq!(err, ManifoldError::NonFinite(1));
    }

    #[test]
    fn horizontal_segment_is_transverse_to_linear_flow() {
        let field = Benchmark::Lin2d { a1: 1.0, a2: 2.0 }.system().field;
        let m = DataManifold::horizontal(1.0, 0.5, 2.0, 31).unwrap();
        let report = check_transversality(&m, &field).unwrap();
        assert!(report.pass);
        // det[(1,0),(s,2)] = 2, normalized by |F| = sqrt(s^2 + 4)
        let expected = 2.0 / (2.0f64 * 2.0 + 4.0).sqrt();
        assert!((report.min_normalized - expected).abs() < 1e-12);
    }

    #[test]
    fn trajectory_arc_is_not_transverse() {
        let field = Benchmark::Lin2d { a1: 1.0, a2: 2.0 }.system().field;
        // x(s) = (e^s, e^{2s}) is itself a trajectory
        let m = DataManifold::custom(
            "orbit",
            2,
            ParamGrid::new(0.0, 1.0, 11).unwrap(),
            |s| vec![s.exp(), (2.0 * s).exp()],
            |x| x[1] - x[0] * x[0],
        );
        let report = check_transversality(&m, &field).unwrap();
        assert!(!report.pass);
        assert!(report.min_normalized < 1e-8);
        assert_eq!(report.violations.len(), 11);
    }

    #[test]
    fn manifold_through_fixed_point() {
        let field = Benchmark::Lin2d { a1: 1.0, a2: 2.0 }.system().field;
        let m = DataManifold::segment(&[-1.0, -1.0], &[1.0, 1.0], 0.0, 1.0, 3).unwrap();
        assert_eq!(
            check_transversality(&m, &field).unwrap_err(),
            ManifoldError::ZeroField { s: 0.5 }
        );
    }

    #[test]
    fn compatibility_of_constants() {
        let g = ParamGrid::new(1.0, 2.0, 11).unwrap();
        let one = DataFunction::constant(g, c(1.0));
        assert_eq!(data_compatibility(&one, &one).unwrap(), 0.0);
        let other = DataFunction::constant(g, Complex64::new(2.5, -1.0));
        assert_eq!(data_compatibility(&one, &other).unwrap(), 0.0);
    }

    #[test]
    fn compatibility_of_one_and_s() {
        let g = ParamGrid::new(1.0, 2.0, 11).unwrap();
        let one = DataFunction::constant(g, c(1.0));
        let s = DataFunction::from_fn(g, c).unwrap();
        assert!((data_compatibility(&one, &s).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn compatibility_grid_mismatch() {
        let a = DataFunction::constant(ParamGrid::new(0.0, 1.0, 5).unwrap(), c(1.0));
        let b = DataFunction::constant(ParamGrid::new(0.0, 1.0, 6).unwrap(), c(1.0));
        assert_eq!(data_compatibility(&a, &b).unwrap_err(), ManifoldError::GridMismatch);
    }

    #[test]
    fn projection_recovers_parameter() {
        let m = DataManifold::circle([0.0, 0.0], 5.0, 0.0, 2.0 * std::f64::consts::PI, 64).unwrap();
        for &s in &[0.0, 0.3, 1.234, 3.0, 6.2] {
            let (p, d) = m.project(&m.embed(s));
            assert!(d < 1e-10, "s={s} d={d}");
            assert!((m.embed(p)[0] - m.embed(s)[0]).abs() < 1e-10);
        }
        let seg = DataManifold::horizontal(1.0, 0.5, 2.0, 16).unwrap();
        let (p, d) = seg.project(&[1.2345, 1.0]);
        assert!((p - 1.2345).abs() < 1e-12 && d < 1e-12);
    }

    #[test]
    fn injectivity() {
        let seg = DataManifold::horizontal(1.0, 0.5, 2.0, 16).unwrap();
        seg.check_injective().unwrap();
        let full = DataManifold::circle([0.0, 0.0], 1.0, 0.0, 2.0 * std::f64::consts::PI, 32).unwrap();
        full.check_injective().unwrap();
        let folded = DataManifold::custom(
            "fold",
            2,
            ParamGrid::new(-1.0, 1.0, 21).unwrap(),
            |s| vec![s * s, 0.0],
            |x| x[1],
        );
        assert!(matches!(
            folded.check_injective(),
            Err(ManifoldError::NotInjective(..))
        ));
    }

    #[test]
    fn spec_builds_segment_and_circle() {
        let spec: ManifoldSpec =
            serde_json::from_str(r#"{"type":"segment","from":[0,1],"to":[2,1],"n":5}"#).unwrap();
        let m = spec.build().unwrap();
        assert_eq!(m.embed(0.5), vec![1.0, 1.0]);
        let spec: ManifoldSpec = serde_json::from_str(
            r#"{"type":"circle","center":[0,0],"radius":5,"arc":[0,3.141592653589793],"n":9}"#,
        )
        .unwrap();
        let m = spec.build().unwrap();
        assert!(!m.is_periodic());
        assert!((m.level(&[3.0, 4.0])).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn compatibility_is_antisymmetric(
            a in proptest::collection::vec(-5.0f64..5.0, 9),
            b in proptest::collection::vec(-5.0f64..5.0, 9),
        ) {
            let g = ParamGrid::new(0.0, 2.0, 9).unwrap();
            let ha = DataFunction::tabulated(g, a.into_iter().map(c).collect()).unwrap();
            let hb = DataFunction::tabulated(g, b.into_iter().map(c).collect()).unwrap();
            let ab = data_compatibility(&ha, &hb).unwrap();
            let ba = data_compatibility(&hb, &ha).unwrap();
            prop_assert!((ab - ba).abs() <= 1e-12 * (1.0 + ab));
        }

        #[test]
        fn scalar_multiples_are_compatible(
            a in proptest::collection::vec(-5.0f64..5.0, 9),
            re in -3.0f64..3.0,
            im in -3.0f64..3.0,
        ) {
            let g = ParamGrid::new(0.0, 2.0, 9).unwrap();
            let alpha = Complex64::new(re, im);
            let ha = DataFunction::tabulated(g, a.iter().copied().map(c).collect()).unwrap();
            let hb = DataFunction::tabulated(g, a.iter().map(|&v| alpha * v).collect()).unwrap();
            let scale = 1.0 + a.iter().map(|v| v.abs()).fold(0.0, f64::max).powi(2) * alpha.norm();
            prop_assert!(data_compatibility(&ha, &hb).unwrap() <= 1e-12 * scale);
        }
    }
}
