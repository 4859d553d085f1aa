//! The three commands: grid evaluation, decomposition and the spectrum demo.

use std::path::PathBuf;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::RunConfig;
use super::expr::Expr;
use super::output::{num, write_json, Csv};
use super::CliError;
use crate::dynamics::{advance, BenchmarkSystem, FlowOptions};
use crate::keig::{evaluate_points, koopman_residual, Keig, KeigError};
use crate::manifold::{DataFunction, DataManifold};
use crate::okeedmd::{build_grid, greedy_decompose, DecompositionResult, OkeedmdError, TargetSample};
use crate::spectrum::{scaling_fit, wedge_point_spectrum_check, SpectrumError};

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfCheck {
    pub t: f64,
    pub points: usize,
    pub max_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalSummary {
    pub system: String,
    pub lambda: [f64; 2],
    pub h: String,
    pub t_window: [f64; 2],
    pub lattice_points: usize,
    pub evaluated: usize,
    pub outside: usize,
    pub self_check: SelfCheck,
    pub config: RunConfig,
}

#[derive(Debug, Clone)]
pub struct EvalOutcome {
    pub files: Vec<PathBuf>,
    pub summary: EvalSummary,
}

/// Builds the eigenfunction described by `eigenfunction` in the config.
pub fn eval_keig(cfg: &RunConfig) -> Result<(Keig, BenchmarkSystem), CliError> {
    let sys = cfg.system()?;
    let manifold = cfg.manifold(&sys)?;
    let window = cfg.window(&sys)?;
    let spec = cfg
        .eigenfunction
        .as_ref()
        .ok_or_else(|| CliError::Config("missing `eigenfunction`".into()))?;
    let h_expr = Expr::parse(&spec.h).map_err(|e| CliError::Config(format!("eigenfunction.h: {e}")))?;
    h_expr
        .validate_data()
        .map_err(|e| CliError::Config(format!("eigenfunction.h: {e}")))?;
    let h = DataFunction::from_fn(manifold.grid(), move |s| {
        h_expr.eval_data(s).unwrap_or(Complex64::new(f64::NAN, 0.0))
    })
    .map_err(|e| CliError::Config(format!("eigenfunction.h: {e}")))?;
    let lambda = Complex64::new(spec.lambda[0], spec.lambda[1]);
    let keig = Keig::with_options(lambda, h, manifold, sys.field.clone(), window, FlowOptions::with_tol(cfg.tol()))
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok((keig, sys))
}

/// Bounding box of the swept set, from the manifold nodes flowed through the window.
fn swept_box(keig: &Keig) -> Vec<[f64; 2]> {
    let (t1, t2) = keig.t_window();
    let dim = keig.field().dim();
    let mut bounds = vec![[f64::INFINITY, f64::NEG_INFINITY]; dim];
    for s in keig.manifold().grid().nodes() {
        let x0 = keig.manifold().embed(s);
        for k in 0..=20 {
            let t = t1 + (t2 - t1) * k as f64 / 20.0;
            if let Ok(x) = advance(keig.field(), &x0, t, keig.options()) {
                for (b, v) in bounds.iter_mut().zip(&x) {
                    b[0] = b[0].min(*v);
                    b[1] = b[1].max(*v);
                }
            }
        }
    }
    bounds
}

fn lattice(cfg: &RunConfig, keig: &Keig) -> Result<Vec<Vec<f64>>, CliError> {
    let dim = keig.field().dim();
    if dim > 2 {
        return Err(CliError::Config("grid evaluation supports one or two dimensions".into()));
    }
    let (ranges, counts) = match &cfg.lattice {
        Some(l) => {
            let mut ranges = vec![l.x1];
            let mut counts = vec![l.n1];
            if dim == 2 {
                ranges.push(l.x2.ok_or_else(|| CliError::Config("lattice.x2 missing".into()))?);
                counts.push(l.n2.unwrap_or(l.n1));
            }
            (ranges, counts)
        }
        None => {
            let b = swept_box(keig);
            let counts = if dim == 2 { vec![40, 40] } else { vec![50] };
            (b, counts)
        }
    };
    if counts.iter().any(|&c| c == 0) {
        return Err(CliError::Config("lattice needs at least one node per axis".into()));
    }
    let axis = |r: [f64; 2], c: usize| -> Vec<f64> {
        if c == 1 {
            vec![0.5 * (r[0] + r[1])]
        } else {
            (0..c).map(|k| r[0] + (r[1] - r[0]) * k as f64 / (c - 1) as f64).collect()
        }
    };
    let a1 = axis(ranges[0], counts[0]);
    Ok(if dim == 2 {
        let a2 = axis(ranges[1], counts[1]);
        a1.iter().flat_map(|&x1| a2.iter().map(move |&x2| vec![x1, x2])).collect()
    } else {
        a1.into_iter().map(|x| vec![x]).collect()
    })
}

/// Evaluates one eigenfunction on a lattice and writes `keig_grid.csv` and
/// `eval_summary.json`. More than half of the lattice outside the swept set is
/// a domain failure.
pub fn cmd_eval(cfg: &RunConfig) -> Result<EvalOutcome, CliError> {
    let (keig, sys) = eval_keig(cfg)?;
    let points = lattice(cfg, &keig)?;
    let results = evaluate_points(&keig, &points);
    let mut csv = Csv::new(&["x1", "x2", "re_phi", "im_phi", "r_star", "s_star"]);
    let mut inside = Vec::new();
    for (x, res) in points.iter().zip(&results) {
        match res {
            Ok((v, pb)) => {
                let x2 = x.get(1).copied().unwrap_or(0.0);
                csv.row(&[num(x[0]), num(x2), num(v.re), num(v.im), num(pb.r_star), num(pb.s_star)]);
                inside.push((x.clone(), pb.r_star));
            }
            Err(KeigError::NotInDomain { .. } | KeigError::AmbiguousCrossing { .. }) => {}
            Err(e) => return Err(CliError::Domain(e.to_string())),
        }
    }
    let outside = points.len() - inside.len();
    if 2 * outside > points.len() {
        return Err(CliError::Domain(format!(
            "{outside} of {} lattice points lie outside the swept domain",
            points.len()
        )));
    }

    let (t1, t2) = keig.t_window();
    let dt = (0.25 * (t2 - t1)).min(0.1);
    let mut candidates: Vec<Vec<f64>> = inside
        .iter()
        .filter(|(_, r)| *r + dt <= t2 - 1e-9 && *r + dt >= t1)
        .map(|(x, _)| x.clone())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed());
    candidates.shuffle(&mut rng);
    candidates.truncate(10);
    let max_residual = if candidates.is_empty() || dt <= 0.0 {
        None
    } else {
        koopman_residual(&keig, keig.field(), &candidates, dt, keig.options()).ok()
    };

    let dir = cfg.output_dir();
    let spec = cfg.eigenfunction.as_ref().expect("checked in eval_keig");
    let summary = EvalSummary {
        system: sys.field.name().to_string(),
        lambda: spec.lambda,
        h: spec.h.clone(),
        t_window: [t1, t2],
        lattice_points: points.len(),
        evaluated: inside.len(),
        outside,
        self_check: SelfCheck {
            t: dt,
            points: candidates.len(),
            max_residual,
        },
        config: cfg.echo(),
    };
    let files = vec![
        csv.write(&dir.join("keig_grid.csv"))?,
        write_json(&dir.join("eval_summary.json"), &summary)?,
    ];
    Ok(EvalOutcome { files, summary })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermReport {
    pub k: usize,
    pub lambda: [f64; 2],
    pub c: f64,
    /// Eigen-relation defect on interior grid points, half a time step.
    pub koopman_residual: Option<f64>,
    pub h_samples: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionReport {
    pub system: String,
    pub manifold: String,
    pub n: usize,
    pub m: usize,
    pub t_window: [f64; 2],
    pub target: String,
    pub terms: Vec<TermReport>,
    pub residuals: Vec<f64>,
    pub relative_residuals: Vec<f64>,
    pub config: RunConfig,
}

#[derive(Debug, Clone)]
pub struct DecomposeOutcome {
    pub files: Vec<PathBuf>,
    pub report: DecompositionReport,
    pub result: DecompositionResult,
}

fn okeedmd_error(e: OkeedmdError) -> CliError {
    match e {
        OkeedmdError::EmptyTarget => CliError::EmptyTarget,
        OkeedmdError::Dynamics(d) => CliError::Domain(d.to_string()),
        other => CliError::Config(other.to_string()),
    }
}

/// Greedy decomposition of the configured target; writes `decomposition.json`,
/// `residuals.csv`, `lambda_curves.csv`, `h_functions.csv` and `term_grids.csv`.
pub fn cmd_decompose(cfg: &RunConfig) -> Result<DecomposeOutcome, CliError> {
    let sys = cfg.system()?;
    let manifold: DataManifold = cfg.manifold(&sys)?;
    let window = cfg.window(&sys)?;
    let target_src = cfg
        .target
        .as_ref()
        .ok_or_else(|| CliError::Config("missing `target`".into()))?;
    let target = Expr::parse(target_src).map_err(|e| CliError::Config(format!("target: {e}")))?;
    let (n, m) = cfg.grid.map_or((40, 40), |g| (g.n, g.m));
    let opts = FlowOptions::with_tol(cfg.tol());
    let grid = build_grid(&sys.field, &manifold, window, n, m, &opts).map_err(okeedmd_error)?;
    let sample = TargetSample::from_characteristics(&grid, |s, r, x| target.eval_target(s, r, x));
    if sample.b().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(CliError::Domain("target is not finite on the grid".into()));
    }
    let candidates = cfg.lambda_sweep.clone().unwrap_or_default().candidates();
    let k_max = cfg.k.unwrap_or(8);
    let stop_tol = cfg.stop_tol.unwrap_or(1e-10);
    let result = greedy_decompose(&grid, &sample, &candidates, k_max, stop_tol).map_err(okeedmd_error)?;

    let (t1, t2) = window;
    let dt = (t2 - t1) / (2.0 * m as f64);
    let check_points = grid.interior_points(50);
    let terms: Vec<TermReport> = result
        .terms
        .iter()
        .enumerate()
        .map(|(k, term)| TermReport {
            k: k + 1,
            lambda: pair(term.lambda),
            c: term.c,
            koopman_residual: koopman_residual(&term.keig, grid.field(), &check_points, dt, grid.options()).ok(),
            h_samples: term.h.values().iter().map(|z| pair(*z)).collect(),
        })
        .collect();
    let report = DecompositionReport {
        system: sys.field.name().to_string(),
        manifold: manifold.label().to_string(),
        n,
        m,
        t_window: [t1, t2],
        target: target_src.clone(),
        terms,
        residuals: result.residual_norms.clone(),
        relative_residuals: result.relative_residuals(),
        config: cfg.echo(),
    };

    let dir = cfg.output_dir();
    let mut residuals = Csv::new(&["k", "residual_norm", "relative_residual"]);
    for (k, (r, rel)) in result.residual_norms.iter().zip(result.relative_residuals()).enumerate() {
        residuals.row(&[k.to_string(), num(*r), num(rel)]);
    }
    let mut curves = Csv::new(&["stage", "re_lambda", "im_lambda", "residual_norm"]);
    for (k, curve) in result.lambda_curves.iter().enumerate() {
        for (lambda, r) in curve {
            curves.row(&[(k + 1).to_string(), num(lambda.re), num(lambda.im), num(*r)]);
        }
    }
    let mut hs = Csv::new(&["stage", "s", "re_h", "im_h"]);
    let mut grids = Csv::new(&["stage", "i", "j", "x1", "x2", "re_phi", "im_phi"]);
    for (k, term) in result.terms.iter().enumerate() {
        for (s, h) in grid.s_nodes().iter().zip(term.h.values()) {
            hs.row(&[(k + 1).to_string(), num(*s), num(h.re), num(h.im)]);
        }
        for i in 0..=grid.n() {
            for j in 0..=grid.m() {
                let x = grid.point(i, j);
                let v = term.normalized_phi[grid.flat_index(i, j)];
                grids.row(&[
                    (k + 1).to_string(),
                    i.to_string(),
                    j.to_string(),
                    num(x[0]),
                    num(x.get(1).copied().unwrap_or(0.0)),
                    num(v.re),
                    num(v.im),
                ]);
            }
        }
    }
    let files = vec![
        write_json(&dir.join("decomposition.json"), &report)?,
        residuals.write(&dir.join("residuals.csv"))?,
        curves.write(&dir.join("lambda_curves.csv"))?,
        hs.write(&dir.join("h_functions.csv"))?,
        grids.write(&dir.join("term_grids.csv"))?,
    ];
    Ok(DecomposeOutcome { files, report, result })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub n: u32,
    pub residual: f64,
    pub phi_norm: f64,
    pub relative_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WedgeSummary {
    pub t: f64,
    pub lambdas: Vec<[f64; 2]>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSummary {
    pub omega: f64,
    pub t: f64,
    pub annulus: [f64; 2],
    pub quad_points: usize,
    pub rows: Vec<ScalingRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    pub wedge: WedgeSummary,
    pub config: RunConfig,
}

#[derive(Debug, Clone)]
pub struct SpectrumOutcome {
    pub files: Vec<PathBuf>,
    pub summary: SpectrumSummary,
}

fn spectrum_error(e: SpectrumError) -> CliError {
    CliError::Config(format!("spectrum: {e}"))
}

/// Residual scaling of the annulus approximate eigenfunctions and the wedge
/// check; writes `spectrum_scaling.csv` and `spectrum_summary.json`.
pub fn cmd_spectrum(cfg: &RunConfig) -> Result<SpectrumOutcome, CliError> {
    let spec = cfg.spectrum.clone().unwrap_or_default();
    if spec.n_list.is_empty() {
        return Err(CliError::Config("spectrum.n_list is empty".into()));
    }
    let fit = scaling_fit(
        spec.omega,
        spec.t,
        &spec.n_list,
        (spec.annulus[0], spec.annulus[1]),
        spec.quad_points,
    )
    .map_err(spectrum_error)?;
    let h_expr = Expr::parse(&spec.wedge.h).map_err(|e| CliError::Config(format!("spectrum.wedge.h: {e}")))?;
    h_expr
        .validate_data()
        .map_err(|e| CliError::Config(format!("spectrum.wedge.h: {e}")))?;
    let h = move |action: f64| h_expr.eval_data(action).unwrap_or(Complex64::new(f64::NAN, 0.0));
    let lambdas = spec.wedge.lambdas();
    let wedge = wedge_point_spectrum_check(&lambdas, spec.wedge.wedge(), h, spec.wedge.t).map_err(spectrum_error)?;

    let rows: Vec<ScalingRow> = fit
        .rows
        .iter()
        .map(|(n, r)| ScalingRow {
            n: *n,
            residual: r.residual_norm,
            phi_norm: r.phi_norm,
            relative_residual: r.relative_residual,
        })
        .collect();
    let mut csv = Csv::new(&["n", "residual", "phi_norm", "relative_residual"]);
    for r in &rows {
        csv.row(&[r.n.to_string(), num(r.residual), num(r.phi_norm), num(r.relative_residual)]);
    }
    let summary = SpectrumSummary {
        omega: spec.omega,
        t: spec.t,
        annulus: spec.annulus,
        quad_points: spec.quad_points,
        rows,
        slope: fit.slope,
        wedge: WedgeSummary {
            t: spec.wedge.t,
            lambdas: wedge.residuals.iter().map(|(l, _)| pair(*l)).collect(),
            residuals: wedge.residuals.iter().map(|(_, r)| *r).collect(),
            max_residual: wedge.max_residual,
        },
        config: cfg.echo(),
    };
    let dir = cfg.output_dir();
    let files = vec![
        csv.write(&dir.join("spectrum_scaling.csv"))?,
        write_json(&dir.join("spectrum_summary.json"), &summary)?,
    ];
    Ok(SpectrumOutcome { files, summary })
}
