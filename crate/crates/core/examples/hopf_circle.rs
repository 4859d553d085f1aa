//! Eigenfunctions of the Hopf normal form from data on a circle outside the limit cycle.

use keigs::dynamics::Benchmark;
use keigs::keig::{Eigenfunction, Keig};
use keigs::manifold::DataFunction;
use keigs::Complex64;

fn main() {
    let sys = Benchmark::Hopf { mu: 1.0 }.system();
    let circle = sys.default_manifold.clone();
    let h = DataFunction::from_fn(circle.grid(), |s| Complex64::new(2.0 + s.cos(), 0.0)).unwrap();
    let phi = Keig::new(Complex64::new(1.0, 0.0), h, circle, sys.field.clone(), sys.default_window).unwrap();

    let pts = phi.domain_points(200, 11, 0.1).unwrap();
    let residual = phi.koopman_residual(&pts, 0.1).unwrap();
    println!("window {:?}, {} sample points", phi.t_window(), pts.len());
    println!("Koopman residual at t = 0.1: {residual:.2e}");
    for x in pts.iter().take(5) {
        println!("phi({:.3}, {:.3}) = {:.6}", x[0], x[1], phi.eval(x).unwrap());
    }
}
