//! Wall-time scaling of the global FFT solver against the sequential
//! stepper on a nonlinear oscillator, doubling N a few times.
//!
//! Run with `cargo run --release --example scaling`.

use fide_core::fastsolve::picard_solve;
use fide_core::stepper::{solve_reference, LambdaOp, Problem, Scheme, SolverParams};

fn main() {
    let alpha = 0.4;
    println!("{:>7} {:>10} {:>7} {:>10} {:>10}", "N", "fast [s]", "sweeps", "ref [s]", "max diff");
    for &n in &[4096usize, 8192, 16384] {
        let problem = Problem::new(
            1,
            LambdaOp::scalar(-1.0),
            Box::new(|t: f64, u: &[f64], out: &mut [f64]| {
                out[0] =
                    0.01 * u[0] * (1.0 - u[0] * u[0]) + (2.0 * std::f64::consts::PI * t).cos();
            }),
            vec![1.0],
        )
        .unwrap();
        let params = SolverParams::new(alpha, 1, 1.0 / n as f64, n).with_picard(1e-7, 200);

        let fast = picard_solve(&problem, &params, Scheme::Imex).unwrap();
        let reference = solve_reference(&problem, &params, Scheme::Imex).unwrap();

        let mut worst = 0.0f64;
        for (a, b) in fast.states().iter().zip(reference.states()) {
            worst = worst.max((a - b).abs());
        }
        println!(
            "{:>7} {:>10.3} {:>7} {:>10.3} {:>10.2e}",
            n,
            fast.diagnostics().wall_time.unwrap(),
            fast.diagnostics().picard_iterations,
            reference.diagnostics().wall_time.unwrap(),
            worst
        );
    }
}
