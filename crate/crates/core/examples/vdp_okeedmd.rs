//! Greedy eigenfunction decomposition of a Gaussian over Van der Pol characteristics.

use keigs::dynamics::{Benchmark, FlowOptions};
use keigs::okeedmd::{build_grid, greedy_decompose, Candidates, TargetSample};
use keigs::Complex64;

fn main() {
    let sys = Benchmark::VanDerPol.system();
    let grid = build_grid(&sys.field, &sys.default_manifold, (0.0, 2.0), 40, 40, &FlowOptions::default()).unwrap();
    let target = TargetSample::from_fn(&grid, |x| Complex64::new(3.0 * (-(x[0] * x[0] + x[1] * x[1]) / 10.0).exp(), 0.0));
    let res = greedy_decompose(&grid, &target, &Candidates::default(), 8, 1e-10).unwrap();

    let rel = res.relative_residuals();
    println!("{:>2} {:>10} {:>12} {:>10}", "k", "lambda", "c", "residual");
    for (k, term) in res.terms.iter().enumerate() {
        println!("{:2} {:10.4} {:12.4e} {:10.4}", k + 1, term.lambda.re, term.c, rel[k + 1]);
    }
}
