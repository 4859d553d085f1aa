//! Approximate eigenfunctions of the action-angle flow and the wedge point-spectrum check.

use keigs::spectrum::{scaling_fit, wedge_point_spectrum_check, Wedge, DEFAULT_QUAD_POINTS};
use keigs::Complex64;

fn main() {
    let fit = scaling_fit(1.0, 1.0, &[4, 8, 16, 32, 64, 128], (0.5, 1.5), DEFAULT_QUAD_POINTS).unwrap();
    println!("{:>4} {:>12} {:>12}", "n", "relative", "1/(sqrt12 n)");
    for (n, row) in &fit.rows {
        println!("{n:4} {:12.6} {:12.6}", row.relative_residual, 1.0 / (12f64.sqrt() * *n as f64));
    }
    println!("log-log slope {:.4}", fit.slope.unwrap());

    let wedge = Wedge { action: (1.0, 2.0), angle: (0.0, 3.0) };
    let lambdas: Vec<Complex64> = (0..5).map(|k| Complex64::new(k as f64 - 2.0, 1.0)).collect();
    let report = wedge_point_spectrum_check(&lambdas, wedge, |i| Complex64::new(i, 0.0), 0.1).unwrap();
    println!("wedge eigenfunctions, max residual {:.2e}", report.max_residual);
}
