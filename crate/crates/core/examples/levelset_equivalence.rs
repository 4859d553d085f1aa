//! Level-set test: powers share level sets, independent eigenfunctions cross them.

use std::sync::Arc;

use keigs::dynamics::{Benchmark, FlowOptions};
use keigs::keig::{default_fd_step, levelset_transversality, Eigenfunction, Keig, PowerProduct};
use keigs::manifold::{DataFunction, DataManifold};
use keigs::Complex64;

fn keig(h: fn(f64) -> Complex64) -> Keig {
    let field = Benchmark::Lin2d { a1: 1.0, a2: 2.0 }.field();
    let curve = DataManifold::horizontal(1.0, 0.25, 2.5, 46).unwrap();
    let data = DataFunction::from_fn(curve.grid(), h).unwrap();
    Keig::with_options(Complex64::new(2.0, 0.0), data, curve, field, (-0.2, 1.05), FlowOptions::with_tol(1e-12)).unwrap()
}

fn main() {
    let mut pts = Vec::new();
    for i in 0..10 {
        for j in 0..10 {
            pts.push(vec![1.0 + i as f64 / 9.0, 1.0 + j as f64 / 9.0]);
        }
    }
    let step = default_fd_step(&pts);
    let x2: Arc<dyn Eigenfunction> = Arc::new(keig(|_| Complex64::new(1.0, 0.0)));
    let cube = PowerProduct::power(x2.clone(), 3.0);
    let other = keig(|s| Complex64::new(s, 0.0));

    let same = levelset_transversality(&x2, &cube, &pts, step).unwrap();
    let cross = levelset_transversality(&x2, &other, &pts, step).unwrap();
    println!("x2 vs x2^3:       max {:.2e}", same.iter().copied().fold(0.0, f64::max));
    println!("x2 vs x1 sqrt x2: min {:.3}", cross.iter().copied().fold(f64::INFINITY, f64::min));
}
