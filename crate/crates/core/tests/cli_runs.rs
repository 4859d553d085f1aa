use std::path::{Path, PathBuf};
use std::process::Command;

use keigs::cli::{cmd_decompose, cmd_eval, cmd_spectrum, eval_keig, read_csv, CliError, RunConfig, SpectrumSpec};
use keigs::keig::Eigenfunction;
use rand::seq::SliceRandom;
use rand::SeedableRng;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn load(name: &str, out: &Path) -> RunConfig {
    let mut cfg = RunConfig::from_path(&config(name)).unwrap();
    cfg.output_dir = Some(out.to_path_buf());
    cfg
}

#[test]
fn observer_grid_is_x2_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = load("lin2d_observer.toml", dir.path());
    let outcome = cmd_eval(&cfg).unwrap();
    assert_eq!(outcome.summary.outside, 0);
    assert!(outcome.summary.self_check.max_residual.unwrap() <= 1e-6);

    let (header, rows) = read_csv(&dir.path().join("keig_grid.csv")).unwrap();
    assert_eq!(header, ["x1", "x2", "re_phi", "im_phi", "r_star", "s_star"]);
    assert_eq!(rows.len(), 900);
    for row in &rows {
        assert!((row[2] - row[1]).abs() <= 1e-6 * row[1]);
    }

    let (keig, _) = eval_keig(&cfg).unwrap();
    let mut picked = rows.clone();
    picked.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(3));
    for row in picked.iter().take(10) {
        let v = keig.eval(&row[..2]).unwrap();
        assert!((v.re - row[2]).abs() <= 1e-9 * v.norm().max(1.0));
        assert!((v.im - row[3]).abs() <= 1e-9 * v.norm().max(1.0));
    }
}

#[test]
fn hopf_self_check() {
    let dir = tempfile::tempdir().unwrap();
    let outcome = cmd_eval(&load("hopf_circle.toml", dir.path())).unwrap();
    assert_eq!(outcome.summary.self_check.points, 10);
    assert!(outcome.summary.self_check.max_residual.unwrap() <= 1e-4);
}

#[test]
fn lattice_outside_domain_is_a_domain_failure() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = load("lin2d_observer.toml", dir.path());
    cfg.lattice.as_mut().unwrap().x2 = Some([-3.0, -2.0]);
    let err = cmd_eval(&cfg).unwrap_err();
    assert!(matches!(err, CliError::Domain(_)));
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn decomposition_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let outcome = cmd_decompose(&load("vdp_decompose.toml", dir.path())).unwrap();
    let r = &outcome.report.residuals;
    assert_eq!(r.len(), 9);
    assert!(r.windows(2).all(|w| w[1] < w[0]));
    for name in ["decomposition.json", "residuals.csv", "lambda_curves.csv", "h_functions.csv", "term_grids.csv"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let (_, curves) = read_csv(&dir.path().join("lambda_curves.csv")).unwrap();
    assert_eq!(curves.len(), 8 * 101);
    let (_, hs) = read_csv(&dir.path().join("h_functions.csv")).unwrap();
    assert_eq!(hs.len(), 8 * 41);
    for term in &outcome.report.terms {
        assert!(term.koopman_residual.unwrap() <= 1e-3, "{term:?}");
    }
}

#[test]
fn exact_target_is_one_term() {
    let dir = tempfile::tempdir().unwrap();
    let outcome = cmd_decompose(&load("vdp_exact.toml", dir.path())).unwrap();
    assert_eq!(outcome.report.terms.len(), 1);
    assert!(outcome.report.relative_residuals[1] <= 1e-8);
}

#[test]
fn vanishing_target_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = load("vdp_exact.toml", dir.path());
    cfg.target = Some("const(0)".into());
    let err = cmd_decompose(&cfg).unwrap_err();
    assert_eq!(err, CliError::EmptyTarget);
    assert_eq!(err.exit_code(), 4);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    cmd_decompose(&load("vdp_decompose.toml", a.path())).unwrap();
    cmd_decompose(&load("vdp_decompose.toml", b.path())).unwrap();
    for name in ["decomposition.json", "residuals.csv", "term_grids.csv"] {
        assert_eq!(
            std::fs::read(a.path().join(name)).unwrap(),
            std::fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn spectrum_with_single_sharpness_omits_slope() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        output_dir: Some(dir.path().to_path_buf()),
        spectrum: Some(SpectrumSpec {
            n_list: vec![16],
            ..Default::default()
        }),
        ..Default::default()
    };
    let outcome = cmd_spectrum(&cfg).unwrap();
    assert_eq!(outcome.summary.slope, None);
    let json = std::fs::read_to_string(dir.path().join("spectrum_summary.json")).unwrap();
    assert!(!json.contains("slope"));
    assert!(outcome.summary.wedge.max_residual <= 1e-8);
}

fn keigs(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_keigs")).args(args).output().unwrap()
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();

    let ok = keigs(&["--spectrum-demo", "--out", out]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(dir.path().join("spectrum_scaling.csv").exists());

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[system]\nname = \"vdp\"\nK = \"eight\"\n").unwrap();
    let res = keigs(&["--config", bad.to_str().unwrap(), "decompose"]);
    assert_eq!(res.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&res.stderr);
    assert!(msg.contains("line 3"), "{msg}");

    let unknown = dir.path().join("unknown.toml");
    std::fs::write(&unknown, "target = \"gaussian(1, 1)\"\n[system]\nname = \"lorenz\"\n").unwrap();
    assert_eq!(keigs(&["--config", unknown.to_str().unwrap(), "decompose"]).status.code(), Some(2));

    let empty = dir.path().join("empty.toml");
    std::fs::write(&empty, "target = \"const(0)\"\n[system]\nname = \"vdp\"\n[grid]\nn = 4\nm = 4\n").unwrap();
    assert_eq!(
        keigs(&["--config", empty.to_str().unwrap(), "--out", out, "decompose"]).status.code(),
        Some(4)
    );

    let far = dir.path().join("far.toml");
    let text = std::fs::read_to_string(config("lin2d_observer.toml"))
        .unwrap()
        .replace("x2 = [1.0, 7.38905609893065]", "x2 = [-3.0, -2.0]");
    std::fs::write(&far, text).unwrap();
    assert_eq!(
        keigs(&["--config", far.to_str().unwrap(), "--out", out, "eval"]).status.code(),
        Some(3)
    );

    assert_eq!(keigs(&["--no-such-flag"]).status.code(), Some(2));
}

#[test]
fn json_config_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = load("blowup.toml", dir.path());
    let path = dir.path().join("blowup.json");
    std::fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let back = RunConfig::from_path(&path).unwrap();
    assert_eq!(back, cfg);
    let outcome = cmd_eval(&back).unwrap();
    assert_eq!(outcome.summary.outside, 0);
}
