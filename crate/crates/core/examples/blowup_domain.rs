//! x' = x^2 blows up in finite time; eigenfunctions live only on the swept interval.

use keigs::dynamics::Benchmark;
use keigs::keig::{Eigenfunction, Keig};
use keigs::manifold::DataFunction;
use keigs::Complex64;

fn main() {
    let sys = Benchmark::BlowUp.system();
    for lambda in [Complex64::new(1.0, 0.0), Complex64::new(1.0, 1.0)] {
        let h = DataFunction::constant(sys.default_manifold.grid(), Complex64::new(1.0, 0.0));
        let phi = Keig::new(lambda, h, sys.default_manifold.clone(), sys.field.clone(), sys.default_window).unwrap();
        println!("lambda = {lambda}");
        for x in [0.5, 1.0, 1.5, 2.0, 5.0] {
            match phi.eval(&[x]) {
                Ok(v) => println!("  x = {x:4.1}: phi / exp(-lambda/x) = {:.10}", v / (-lambda / x).exp()),
                Err(e) => println!("  x = {x:4.1}: {e}"),
            }
        }
    }
}
