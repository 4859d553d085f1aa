use std::sync::Arc;

use keigs::dynamics::{advance, Benchmark, FlowOptions};
use keigs::keig::{algebraic_combine, koopman_residual, levelset_transversality, Eigenfunction, Keig, PowerProduct};
use keigs::manifold::DataFunction;
use keigs::Complex64;
use proptest::prelude::*;

fn keig_for(b: Benchmark, lambda: Complex64, power: f64) -> Keig {
    let sys = b.system();
    let m = sys.default_manifold.clone();
    let h = DataFunction::monomial(m.grid(), Complex64::new(1.0, 0.0), power).unwrap();
    Keig::with_options(lambda, h, m, sys.field, sys.default_window, FlowOptions::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn eigen_relation_with_exact_flow(re in -2.0f64..2.0, im in -2.0f64..2.0, p in 0.0f64..2.0, t in 0.01f64..0.2, seed in any::<u64>()) {
        let keig = keig_for(Benchmark::Lin2d { a1: 1.0, a2: 2.0 }, Complex64::new(re, im), p);
        let t = t.min(keig.t_window().1 / 2.0);
        let pts = keig.domain_points(100, seed, t).unwrap();
        let r = keig.koopman_residual(&pts, t).unwrap();
        prop_assert!(r <= 1e-6, "{r}");
    }

    #[test]
    fn eigen_relation_with_integrated_flow(re in -1.0f64..1.0, p in 0.0f64..2.0, seed in any::<u64>()) {
        let keig = keig_for(Benchmark::VanDerPol, Complex64::new(re, 0.5), p);
        let pts = keig.domain_points(30, seed, 0.2).unwrap();
        let r = keig.koopman_residual(&pts, 0.2).unwrap();
        prop_assert!(r <= 1e-4, "{r}");
    }

    #[test]
    fn pullback_lands_on_the_point(seed in any::<u64>()) {
        for b in [Benchmark::VanDerPol, Benchmark::Hopf { mu: 1.0 }, Benchmark::ActionAngle] {
            let keig = keig_for(b, Complex64::new(1.0, 0.0), 1.0);
            let tol = keig.options().tol;
            for x in keig.domain_points(10, seed, 0.0).unwrap() {
                let pb = keig.pullback(&x).unwrap();
                let back = advance(keig.field(), &pb.foot, pb.r_star, keig.options()).unwrap();
                for (a, e) in back.iter().zip(&x) {
                    prop_assert!((a - e).abs() <= 100.0 * tol * (1.0 + e.abs()), "{}: {x:?} -> {back:?}", b.name());
                }
            }
        }
    }

    #[test]
    fn integer_powers_stay_eigenfunctions(a1 in -2i32..=2, a2 in -2i32..=2, seed in any::<u64>()) {
        let lin = Benchmark::Lin2d { a1: 1.0, a2: 2.0 };
        let k1: Arc<dyn Eigenfunction> = Arc::new(keig_for(lin, Complex64::new(2.0, 0.0), 0.0));
        let k2: Arc<dyn Eigenfunction> = Arc::new(keig_for(lin, Complex64::new(0.5, 1.0), 1.0));
        let reference = keig_for(lin, Complex64::new(2.0, 0.0), 0.0);
        let pts = reference.domain_points(40, seed, 0.1).unwrap();
        let field = reference.field();
        let opts = reference.options();
        let r1 = koopman_residual(&k1, field, &pts, 0.1, opts).unwrap();
        let r2 = koopman_residual(&k2, field, &pts, 0.1, opts).unwrap();
        let combo = algebraic_combine(k1, a1 as f64, k2, a2 as f64);
        let expect = Complex64::new(2.0 * a1 as f64 + 0.5 * a2 as f64, a2 as f64);
        prop_assert!((combo.eigenvalue() - expect).norm() < 1e-14);
        let r = koopman_residual(&combo, field, &pts, 0.1, opts).unwrap();
        prop_assert!(r <= 5.0 * r1.max(r2) + 1e-8, "{r} vs {r1}, {r2}");
    }
}

#[test]
fn powers_share_level_sets() {
    let phi: Arc<dyn Eigenfunction> = Arc::new(keig_for(Benchmark::Lin2d { a1: 1.0, a2: 2.0 }, Complex64::new(2.0, 0.0), 1.0));
    let mut pts = Vec::new();
    for i in 0..10 {
        for j in 0..10 {
            pts.push(vec![1.0 + i as f64 / 9.0, 1.5 + 2.0 * j as f64 / 9.0]);
        }
    }
    for p in [2.0, 3.0] {
        let pow = PowerProduct::power(phi.clone(), p);
        let v = levelset_transversality(&phi, &pow, &pts, 1e-4).unwrap();
        let worst = v.iter().copied().fold(0.0, f64::max);
        assert!(worst <= 1e-4, "p = {p}: {worst}");
    }
}
