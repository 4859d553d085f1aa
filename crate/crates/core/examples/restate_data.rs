//! Moves eigenfunction data from one transverse curve to another.

use keigs::dynamics::{Benchmark, FlowOptions};
use keigs::keig::{Eigenfunction, Keig};
use keigs::manifold::{DataFunction, DataManifold};
use keigs::Complex64;

fn main() {
    let field = Benchmark::Lin2d { a1: 1.0, a2: 2.0 }.field();
    let horizontal = DataManifold::horizontal(1.0, 0.25, 2.5, 46).unwrap();
    let h = DataFunction::from_fn(horizontal.grid(), |s| Complex64::new(s, 0.0)).unwrap();
    let lambda = Complex64::new(2.0, 0.0);
    let phi = Keig::with_options(lambda, h, horizontal, field.clone(), (0.0, 1.05), FlowOptions::default()).unwrap();

    // on x1 = 1 parameterized by x2 the same eigenfunction has data sqrt(x2)
    let vertical = DataManifold::vertical(1.0, 1.2, 4.0, 401).unwrap();
    let restated = phi.restate_data(&vertical).unwrap();
    for (s, v) in vertical.grid().nodes().iter().zip(restated.values()).step_by(50) {
        println!("x2 = {s:.3}: h = {:.8}, sqrt = {:.8}", v.re, s.sqrt());
    }

    let rebuilt = Keig::with_options(lambda, restated, vertical, field, (-1.0, 1.0), FlowOptions::default()).unwrap();
    let x = [1.2, 3.0];
    println!("original {:.8}, rebuilt {:.8}", phi.eval(&x).unwrap().re, rebuilt.eval(&x).unwrap().re);
}
