//! Observer eigenfunction of x1' = x1, x2' = 2 x2 from constant data on x2 = 1.
//!
//! With h = 1 and lambda = 2 the eigenfunction is the coordinate x2 itself.

use keigs::dynamics::{Benchmark, FlowOptions};
use keigs::keig::{Eigenfunction, Keig};
use keigs::manifold::{DataFunction, DataManifold};
use keigs::Complex64;

fn main() {
    let field = Benchmark::Lin2d { a1: 1.0, a2: 2.0 }.field();
    let curve = DataManifold::horizontal(1.0, 0.25, 2.5, 46).unwrap();
    let h = DataFunction::constant(curve.grid(), Complex64::new(1.0, 0.0));
    let phi = Keig::with_options(Complex64::new(2.0, 0.0), h, curve, field, (0.0, 1.05), FlowOptions::default()).unwrap();

    println!("{:>6} {:>6} {:>14} {:>10}", "x1", "x2", "phi", "rel err");
    for x in [[1.0, 1.0], [1.5, 2.0], [2.0, 4.0], [1.2, 7.0]] {
        let v = phi.eval(&x).unwrap();
        println!("{:6.2} {:6.2} {:14.10} {:10.2e}", x[0], x[1], v.re, (v.re - x[1]).abs() / x[1]);
    }
}
