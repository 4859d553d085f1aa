//! Run configuration, read from TOML or JSON.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::CliError;
use crate::dynamics::{Benchmark, BenchmarkSystem};
use crate::manifold::{DataManifold, ManifoldSpec};
use crate::okeedmd::Candidates;
use crate::spectrum::Wedge;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub name: String,
    #[serde(default)]
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: usize,
    pub m: usize,
}

/// Candidate eigenvalues: an explicit list, or a real range, or a rectangle
/// when `im_count > 1`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub list: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub re_range: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub im_range: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub im_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refine: Option<bool>,
}

impl SweepSpec {
    pub fn candidates(&self) -> Candidates {
        if let Some(list) = &self.list {
            return Candidates::list(list.iter().map(|z| Complex64::new(z[0], z[1])).collect())
                .with_refinement(self.refine.unwrap_or(false));
        }
        let [lo, hi] = self.re_range.unwrap_or([-5.0, 5.0]);
        let count = self.count.unwrap_or(101);
        match (self.im_range, self.im_count) {
            (Some(im), Some(k)) if k > 1 => Candidates::rectangle((lo, hi), (im[0], im[1]), count, k)
                .with_refinement(false),
            _ => Candidates::real_range(lo, hi, count).with_refinement(self.refine.unwrap_or(true)),
        }
    }
}

/// A single eigenfunction: eigenvalue `[re, im]` and a data expression in `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenSpec {
    pub lambda: [f64; 2],
    pub h: String,
}

/// Rectangular evaluation lattice; `x2`/`n2` are ignored for scalar systems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub x1: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x2: Option<[f64; 2]>,
    pub n1: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n2: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WedgeSpec {
    pub action: [f64; 2],
    pub angle: [f64; 2],
    pub re_range: [f64; 2],
    pub im_range: [f64; 2],
    pub count: usize,
    pub t: f64,
    pub h: String,
}

impl Default for WedgeSpec {
    fn default() -> Self {
        WedgeSpec {
            action: [1.0, 2.0],
            angle: [0.0, 3.0],
            re_range: [-2.0, 2.0],
            im_range: [-2.0, 2.0],
            count: 5,
            t: 0.1,
            h: "monomial(1, 1)".into(),
        }
    }
}

impl WedgeSpec {
    pub fn wedge(&self) -> Wedge {
        Wedge {
            action: (self.action[0], self.action[1]),
            angle: (self.angle[0], self.angle[1]),
        }
    }

    /// `count x count` eigenvalues over the rectangle.
    pub fn lambdas(&self) -> Vec<Complex64> {
        Candidates::rectangle(
            (self.re_range[0], self.re_range[1]),
            (self.im_range[0], self.im_range[1]),
            self.count,
            self.count,
        )
        .values
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumSpec {
    pub omega: f64,
    pub t: f64,
    pub n_list: Vec<u32>,
    pub annulus: [f64; 2],
    pub quad_points: usize,
    pub wedge: WedgeSpec,
}

impl Default for SpectrumSpec {
    fn default() -> Self {
        SpectrumSpec {
            omega: 1.0,
            t: 1.0,
            n_list: vec![4, 8, 16, 32, 64, 128, 256],
            annulus: [0.5, 1.5],
            quad_points: crate::spectrum::DEFAULT_QUAD_POINTS,
            wedge: WedgeSpec::default(),
        }
    }
}

/// Everything a run needs. Missing entries fall back to the defaults of the
/// chosen benchmark system.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifold: Option<ManifoldSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_window: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_sweep: Option<SweepSpec>,
    #[serde(rename = "K", alias = "k", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrator_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenfunction: Option<EigenSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSpec>,
}

impl RunConfig {
    /// Reads TOML, or JSON when the file ends in `.json`.
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let parsed = if json {
            RunConfig::from_json_str(&text)
        } else {
            RunConfig::from_toml_str(&text)
        };
        parsed.map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn from_json_str(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn benchmark(&self) -> Result<Benchmark, CliError> {
        let spec = self
            .system
            .as_ref()
            .ok_or_else(|| CliError::Config("missing `system`".into()))?;
        Benchmark::from_name(&spec.name, &spec.params).map_err(|e| CliError::Config(format!("system: {e}")))
    }

    pub fn system(&self) -> Result<BenchmarkSystem, CliError> {
        Ok(self.benchmark()?.system())
    }

    pub fn manifold(&self, sys: &BenchmarkSystem) -> Result<DataManifold, CliError> {
        match &self.manifold {
            Some(spec) => spec.build().map_err(|e| CliError::Config(format!("manifold: {e}"))),
            None => Ok(sys.default_manifold.clone()),
        }
    }

    pub fn window(&self, sys: &BenchmarkSystem) -> Result<(f64, f64), CliError> {
        let (t1, t2) = self.t_window.map_or(sys.default_window, |w| (w[0], w[1]));
        if !(t1 <= 0.0 && 0.0 <= t2) {
            return Err(CliError::Config(format!(
                "t_window: [{t1}, {t2}] must contain 0"
            )));
        }
        Ok((t1, t2))
    }

    pub fn tol(&self) -> f64 {
        self.integrator_tol.unwrap_or(crate::dynamics::DEFAULT_TOL)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    /// The configuration as recorded in reports: everything except the output location.
    pub fn echo(&self) -> RunConfig {
        RunConfig {
            output_dir: None,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_and_json_agree() {
        let toml_text = r#"
            target = "gaussian(3, 10)"
            K = 8
            t_window = [0.0, 2.0]
            [system]
            name = "vdp"
            [grid]
            n = 40
            m = 40
            [manifold]
            type = "segment"
            from = [0.5, 0.0]
            to = [3.0, 0.0]
            n = 41
        "#;
        let a = RunConfig::from_toml_str(toml_text).unwrap();
        let json = serde_json::to_string(&a).unwrap();
        let b = RunConfig::from_json_str(&json).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.k, Some(8));
        assert!(a.manifold.is_some());
    }

    #[test]
    fn unknown_fields_rejected_with_location() {
        let err = RunConfig::from_toml_str("sytem = 3\n").unwrap_err();
        match err {
            CliError::Config(msg) => assert!(msg.contains("sytem") && msg.contains("line 1"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sweep_specs() {
        let real = SweepSpec::default().candidates();
        assert_eq!(real.values.len(), 101);
        assert!(real.refine);
        let rect = SweepSpec {
            re_range: Some([-1.0, 1.0]),
            im_range: Some([-1.0, 1.0]),
            count: Some(3),
            im_count: Some(3),
            ..Default::default()
        }
        .candidates();
        assert_eq!(rect.values.len(), 9);
        assert!(!rect.refine);
        let list = SweepSpec {
            list: Some(vec![[2.0, 0.0]]),
            ..Default::default()
        }
        .candidates();
        assert_eq!(list.values, vec![Complex64::new(2.0, 0.0)]);
    }

    #[test]
    fn window_must_contain_zero() {
        let cfg = RunConfig {
            system: Some(SystemSpec {
                name: "lin1d".into(),
                params: vec![],
            }),
            t_window: Some([0.5, 1.0]),
            ..Default::default()
        };
        let sys = cfg.system().unwrap();
        assert!(matches!(cfg.window(&sys), Err(CliError::Config(_))));
    }
}
