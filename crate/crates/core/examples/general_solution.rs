//! Non-constant data: h(s) = s on x2 = 1 gives x1 sqrt(x2) for lambda = 2.

use keigs::dynamics::{Benchmark, FlowOptions};
use keigs::keig::Keig;
use keigs::manifold::{DataFunction, DataManifold};
use keigs::Complex64;

fn main() {
    let field = Benchmark::Lin2d { a1: 1.0, a2: 2.0 }.field();
    let curve = DataManifold::horizontal(1.0, 0.25, 2.5, 46).unwrap();
    let h = DataFunction::from_fn(curve.grid(), |s| Complex64::new(s, 0.0)).unwrap();
    let phi = Keig::with_options(Complex64::new(2.0, 0.0), h, curve, field, (0.0, 1.05), FlowOptions::default()).unwrap();

    for x in [[1.0, 1.5], [1.5, 3.0], [2.0, 5.0]] {
        let (v, pb) = phi.eval_with_pullback(&x).unwrap();
        let exact = x[0] * x[1].sqrt();
        println!(
            "x = {x:?}: phi = {:.10}, exact = {exact:.10}, s* = {:.6}, r* = {:.6}",
            v.re, pb.s_star, pb.r_star
        );
    }
}
