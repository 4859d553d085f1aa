//! Optimal eigenfunction fitting on a grid of characteristics.
//!
//! A target observable `q` is sampled on the points `S[i][j] = flow_{r_j}(x(s_i))`
//! swept out from a data manifold. For each candidate eigenvalue the best data
//! function `h` is a decoupled least-squares problem; sweeping over candidates
//! and fitting residuals greedily yields a short expansion of `q` in
//! eigenfunctions.

mod fit;
mod greedy;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::dynamics::{advance, DynamicsError, FlowOptions, VectorField};
use crate::keig::KeigError;
use crate::manifold::{check_transversality, DataFunction, DataManifold, ManifoldError, ParamGrid};

pub use fit::{fit_h, fit_h_dense, sweep_lambda, Candidates, LambdaFit, LambdaSweep};
pub use greedy::{greedy_decompose, DecompositionResult, Term};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OkeedmdError {
    #[error("target vanishes on the grid")]
    EmptyTarget,
    #[error("no candidate eigenvalues")]
    NoCandidates,
    #[error("grid needs m >= 1 time steps (got n = {n}, m = {m})")]
    GridSize { n: usize, m: usize },
    #[error("time window [{t1}, {t2}] must satisfy t1 <= 0 <= t2")]
    BadWindow { t1: f64, t2: f64 },
    #[error("the flow is tangent to the data manifold at s = {0:?}")]
    NotTransverse(Vec<f64>),
    #[error("target has {got} samples, grid has {expected}")]
    Shape { expected: usize, got: usize },
    #[error("need at least one term")]
    NoTerms,
    #[error("dense solve failed: {0}")]
    Dense(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
    #[error(transparent)]
    Keig(#[from] KeigError),
}

/// Points `S[i][j] = flow_{r_j}(x(s_i))` for `n + 1` data nodes and `m + 1` times.
#[derive(Debug, Clone)]
pub struct CharacteristicGrid {
    s_nodes: Vec<f64>,
    r_nodes: Vec<f64>,
    // row-major by i
    points: Vec<Vec<f64>>,
    field: VectorField,
    manifold: DataManifold,
    t_window: (f64, f64),
    opts: FlowOptions,
}

/// Sweeps `n + 1` uniformly spaced points of `manifold` through `m + 1` uniform
/// times of `t_window`. Each column continues the integration of the previous one.
pub fn build_grid(
    field: &VectorField,
    manifold: &DataManifold,
    t_window: (f64, f64),
    n: usize,
    m: usize,
    opts: &FlowOptions,
) -> Result<CharacteristicGrid, OkeedmdError> {
    if m == 0 {
        return Err(OkeedmdError::GridSize { n, m });
    }
    let (t1, t2) = t_window;
    if !(t1 <= 0.0 && 0.0 <= t2) || !t1.is_finite() || !t2.is_finite() {
        return Err(OkeedmdError::BadWindow { t1, t2 });
    }
    let manifold = manifold.resampled(n + 1)?;
    let report = check_transversality(&manifold, field)?;
    if !report.pass {
        return Err(OkeedmdError::NotTransverse(report.violations));
    }
    let s_nodes = manifold.grid().nodes();
    let r_nodes = ParamGrid::new(t1, t2, m + 1)
        .map(|g| g.nodes())
        .unwrap_or_else(|_| vec![t1; m + 1]);
    let rows = s_nodes
        .par_iter()
        .map(|&s| {
            let mut row = Vec::with_capacity(m + 1);
            let mut x = advance(field, &manifold.embed(s), r_nodes[0], opts)?;
            row.push(x.clone());
            for w in r_nodes.windows(2) {
                x = advance(field, &x, w[1] - w[0], opts)?;
                row.push(x.clone());
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>, DynamicsError>>()?;
    Ok(CharacteristicGrid {
        s_nodes,
        r_nodes,
        points: rows.into_iter().flatten().collect(),
        field: field.clone(),
        manifold,
        t_window,
        opts: *opts,
    })
}

impl CharacteristicGrid {
    /// Index of the last data node; there are `n + 1`.
    pub fn n(&self) -> usize {
        self.s_nodes.len() - 1
    }

    /// Index of the last time node; there are `m + 1`.
    pub fn m(&self) -> usize {
        self.r_nodes.len() - 1
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn s_nodes(&self) -> &[f64] {
        &self.s_nodes
    }

    pub fn r_nodes(&self) -> &[f64] {
        &self.r_nodes
    }

    pub fn point(&self, i: usize, j: usize) -> &[f64] {
        &self.points[i * (self.m() + 1) + j]
    }

    /// All points, row-major by data node.
    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn field(&self) -> &VectorField {
        &self.field
    }

    /// The data manifold resampled on the `n + 1` grid nodes.
    pub fn manifold(&self) -> &DataManifold {
        &self.manifold
    }

    pub fn t_window(&self) -> (f64, f64) {
        self.t_window
    }

    pub fn options(&self) -> &FlowOptions {
        &self.opts
    }

    /// Position of `S[i][j]` in a flattened (column-major) target.
    pub fn flat_index(&self, i: usize, j: usize) -> usize {
        j * (self.n() + 1) + i
    }

    /// `A(lambda) h`, i.e. `h_i e^{lambda r_j}` flattened column-major.
    pub fn apply(&self, lambda: Complex64, h: &[Complex64]) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.len());
        for &r in &self.r_nodes {
            let e = (lambda * r).exp();
            out.extend(h.iter().map(|hi| hi * e));
        }
        out
    }

    pub fn data_function(&self, h: &[Complex64]) -> Result<DataFunction, OkeedmdError> {
        Ok(DataFunction::tabulated(self.manifold.grid(), h.to_vec())?)
    }

    /// Grid points away from the edges, spread evenly, at most `count` of them.
    /// They stay in the swept set after flowing for half a time step.
    pub fn interior_points(&self, count: usize) -> Vec<Vec<f64>> {
        let (n, m) = (self.n(), self.m());
        let is: Vec<usize> = if n >= 2 { (1..n).collect() } else { (0..=n).collect() };
        let js: Vec<usize> = if m >= 2 { (1..m).collect() } else { vec![0] };
        let all: Vec<(usize, usize)> = is
            .iter()
            .flat_map(|&i| js.iter().map(move |&j| (i, j)))
            .collect();
        if all.is_empty() || count == 0 {
            return Vec::new();
        }
        let take = count.min(all.len());
        (0..take)
            .map(|k| {
                let (i, j) = all[k * all.len() / take];
                self.point(i, j).to_vec()
            })
            .collect()
    }
}

/// Target samples `q[i][j] = q(S[i][j])` stored as the column-major vector `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSample {
    rows: usize,
    cols: usize,
    b: Vec<Complex64>,
}

impl TargetSample {
    /// Samples an observable of the state.
    pub fn from_fn<F>(grid: &CharacteristicGrid, q: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Sync,
    {
        TargetSample::from_characteristics(grid, |_, _, x| q(x))
    }

    /// Samples a function of `(s_i, r_j, S[i][j])`.
    pub fn from_characteristics<F>(grid: &CharacteristicGrid, q: F) -> Self
    where
        F: Fn(f64, f64, &[f64]) -> Complex64 + Sync,
    {
        let (rows, cols) = (grid.n() + 1, grid.m() + 1);
        let b = (0..rows * cols)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k % rows, k / rows);
                q(grid.s_nodes[i], grid.r_nodes[j], grid.point(i, j))
            })
            .collect();
        TargetSample { rows, cols, b }
    }

    /// Wraps a column-major vector.
    pub fn from_flat(grid: &CharacteristicGrid, b: Vec<Complex64>) -> Result<Self, OkeedmdError> {
        if b.len() != grid.len() {
            return Err(OkeedmdError::Shape {
                expected: grid.len(),
                got: b.len(),
            });
        }
        Ok(TargetSample {
            rows: grid.n() + 1,
            cols: grid.m() + 1,
            b,
        })
    }

    pub fn b(&self) -> &[Complex64] {
        &self.b
    }

    pub fn q(&self, i: usize, j: usize) -> Complex64 {
        self.b[j * self.rows + i]
    }

    /// `q[i][j]` as rows.
    pub fn q_values(&self) -> Vec<Vec<Complex64>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.q(i, j)).collect())
            .collect()
    }

    pub fn norm(&self) -> f64 {
        l2(&self.b)
    }

    fn check(&self, grid: &CharacteristicGrid) -> Result<(), OkeedmdError> {
        if self.rows != grid.n() + 1 || self.cols != grid.m() + 1 {
            return Err(OkeedmdError::Shape {
                expected: grid.len(),
                got: self.b.len(),
            });
        }
        Ok(())
    }
}

pub(crate) fn l2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{flow, Benchmark};

    fn lin2d_grid(n: usize, m: usize, t2: f64) -> CharacteristicGrid {
        let field = Benchmark::Lin2d { a1: 1.0, a2: 2.0 }.field();
        let lambda = DataManifold::horizontal(1.0, 1.0, 2.0, 3).unwrap();
        build_grid(&field, &lambda, (0.0, t2), n, m, &FlowOptions::default()).unwrap()
    }

    #[test]
    fn linear_grid_corner() {
        let g = lin2d_grid(2, 2, 1.0);
        let p = g.point(0, 2);
        assert!((p[0] - 1f64.exp()).abs() < 1e-8);
        assert!((p[1] - 2f64.exp()).abs() < 1e-8);
        assert_eq!(g.point(1, 0), &[1.5, 1.0][..]);
    }

    #[test]
    fn zero_window_is_manifold_samples() {
        let g = lin2d_grid(4, 3, 0.0);
        for i in 0..=4 {
            for j in 0..=3 {
                assert_eq!(g.point(i, j), g.manifold().embed(g.s_nodes()[i]).as_slice());
            }
        }
    }

    #[test]
    fn continued_columns_match_direct_flow() {
        let field = Benchmark::VanDerPol.field();
        let sys = Benchmark::VanDerPol.system();
        let opts = FlowOptions::default();
        let g = build_grid(&field, &sys.default_manifold, (0.0, 2.0), 6, 8, &opts).unwrap();
        for i in 0..=6 {
            for j in 0..=8 {
                let x0 = g.manifold().embed(g.s_nodes()[i]);
                let direct = flow(&field, &x0, g.r_nodes()[j], &opts).unwrap().state;
                for (a, b) in direct.iter().zip(g.point(i, j)) {
                    assert!((a - b).abs() <= 100.0 * opts.tol * (1.0 + a.abs()), "{i} {j}");
                }
            }
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        let field = Benchmark::Lin2d { a1: 1.0, a2: 2.0 }.field();
        let lambda = DataManifold::horizontal(1.0, 1.0, 2.0, 3).unwrap();
        let opts = FlowOptions::default();
        assert!(matches!(
            build_grid(&field, &lambda, (0.0, 1.0), 3, 0, &opts),
            Err(OkeedmdError::GridSize { .. })
        ));
        assert!(matches!(
            build_grid(&field, &lambda, (0.5, 1.0), 2, 3, &opts),
            Err(OkeedmdError::BadWindow { .. })
        ));
        let flat = DataManifold::vertical(1.0, 1.0, 2.0, 3).unwrap();
        let tangent_field = VectorField::new("shear", 2, |_, out| {
            out[0] = 0.0;
            out[1] = 1.0;
        });
        assert!(matches!(
            build_grid(&tangent_field, &flat, (0.0, 1.0), 2, 2, &opts),
            Err(OkeedmdError::NotTransverse(_))
        ));
        let g = lin2d_grid(2, 2, 1.0);
        assert!(TargetSample::from_flat(&g, vec![Complex64::new(0.0, 0.0); 4]).is_err());
    }

    #[test]
    fn target_layout_is_column_major() {
        let g = lin2d_grid(3, 2, 1.0);
        let t = TargetSample::from_characteristics(&g, |s, r, _| Complex64::new(s, r));
        for i in 0..=3 {
            for j in 0..=2 {
                let v = t.b()[g.flat_index(i, j)];
                assert_eq!(v, Complex64::new(g.s_nodes()[i], g.r_nodes()[j]));
                assert_eq!(t.q_values()[i][j], v);
            }
        }
    }

    #[test]
    fn interior_points_stay_inside() {
        let g = lin2d_grid(10, 10, 1.0);
        let pts = g.interior_points(50);
        assert_eq!(pts.len(), 50);
        for p in &pts {
            assert!(p[0] > 1.0 && p[1] > 1.0);
        }
    }
}
