//! Powers and products of eigenfunctions are eigenfunctions with combined eigenvalues.

use std::sync::Arc;

use keigs::dynamics::{Benchmark, FlowOptions};
use keigs::keig::{algebraic_combine, koopman_residual, Eigenfunction, Keig, PowerProduct};
use keigs::manifold::{DataFunction, DataManifold};
use keigs::Complex64;

fn keig(h: fn(f64) -> Complex64) -> Keig {
    let field = Benchmark::Lin2d { a1: 1.0, a2: 2.0 }.field();
    let curve = DataManifold::horizontal(1.0, 0.25, 2.5, 46).unwrap();
    let data = DataFunction::from_fn(curve.grid(), h).unwrap();
    Keig::with_options(Complex64::new(2.0, 0.0), data, curve, field, (0.0, 1.05), FlowOptions::default()).unwrap()
}

fn main() {
    let reference = keig(|_| Complex64::new(1.0, 0.0));
    let pts = reference.domain_points(100, 3, 0.1).unwrap();
    let x2: Arc<dyn Eigenfunction> = Arc::new(keig(|_| Complex64::new(1.0, 0.0)));
    let x1_sqrt_x2: Arc<dyn Eigenfunction> = Arc::new(keig(|s| Complex64::new(s, 0.0)));

    for p in [2.0, 3.0, 0.5] {
        let pow = PowerProduct::power(x2.clone(), p);
        let r = koopman_residual(&pow, reference.field(), &pts, 0.1, reference.options()).unwrap();
        println!("x2^{p}: eigenvalue {}, residual {r:.2e}", pow.eigenvalue());
    }
    // x2^-1 (x1 sqrt(x2))^2 = x1^2
    let combo = algebraic_combine(x2, -1.0, x1_sqrt_x2, 2.0);
    let r = koopman_residual(&combo, reference.field(), &pts, 0.1, reference.options()).unwrap();
    println!("x2^-1 (x1 sqrt x2)^2: eigenvalue {}, residual {r:.2e}", combo.eigenvalue());
    println!("at (1.5, 2): {:.10} (x1^2 = 2.25)", combo.eval(&[1.5, 2.0]).unwrap().re);
}
