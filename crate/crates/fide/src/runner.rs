//! Convergence studies and timing sweeps over the registry problems.
//!
//! A study fixes a problem, a scheme, a fractional order, and a correction
//! plan ([`RunSettings`]), then measures errors across a ladder of step
//! sizes ([`run_convergence`]) or wall times across a ladder of grid sizes
//! ([`run_timing`]). Ladder entries are independent, so they run in
//! parallel on the rayon pool; set `FIDE_THREADS` to cap the worker count
//! (`0` or unset picks the number of cores).
//!
//! Problems with a closed-form solution are measured against it directly.
//! `case3` has none, so its errors are measured against a fine benchmark
//! trajectory (`h = 2⁻¹¹`, degree-1 scheme, three correction terms) that is
//! computed once per study and shared by every ladder entry; coarse grids
//! must nest in the benchmark grid.

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use fide_core::corrections::CorrectionPlan;
use fide_core::fastsolve::picard_solve;
use fide_core::stepper::{error_metrics, solve_reference, Scheme, SolverParams, Trajectory};

use crate::registry::ProblemInstance;

/// Step size of the `case3` benchmark trajectory.
pub const BENCHMARK_H: f64 = 1.0 / 2048.0;

/// Largest grid the stepwise reference solver is timed on by default; its
/// quadratic history cost makes bigger grids pointlessly slow.
pub const DEFAULT_MAX_REF_N: usize = 1 << 13;

/// Resolved solver configuration for one study.
///
/// [`RunSettings::from_instance`] seeds every field from the registry
/// defaults; callers override what their experiment changes.
#[derive(Debug, Clone)]
pub struct RunSettings {
    /// Multi-step family to run.
    pub scheme: Scheme,
    /// Interpolation degree (0 or 1).
    pub p: usize,
    /// Fractional order.
    pub alpha: f64,
    /// Integration horizon.
    pub t_end: f64,
    /// Startup correction powers.
    pub plan: CorrectionPlan,
    /// Picard stopping tolerance of the global solver.
    pub picard_tol: f64,
    /// Picard sweep cap.
    pub picard_max: usize,
    /// Gauss–Jacobi points for kernel and correction quadrature.
    pub quad_points: usize,
    /// Epsilon-circulant embedding parameter.
    pub eps: f64,
}

impl RunSettings {
    /// Study settings matching the problem's registry defaults.
    pub fn from_instance(instance: &ProblemInstance, alpha: f64, p: usize) -> Self {
        let defaults = SolverParams::new(alpha, p, 1.0, 1);
        RunSettings {
            scheme: instance.default_scheme,
            p,
            alpha,
            t_end: instance.t_end,
            plan: instance.default_plan.clone(),
            picard_tol: instance.default_picard_tol,
            picard_max: defaults.picard_max,
            quad_points: defaults.quad_points,
            eps: defaults.eps_circulant,
        }
    }

    /// Solver parameters for a concrete grid.
    pub fn params(&self, h: f64, n_steps: usize) -> SolverParams {
        let mut params = SolverParams::new(self.alpha, self.p, h, n_steps)
            .with_plan(self.plan.clone())
            .with_picard(self.picard_tol, self.picard_max);
        params.quad_points = self.quad_points;
        params.eps_circulant = self.eps;
        params
    }
}

/// One measured step size of a convergence study.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    /// Step size.
    pub h: f64,
    /// Relative endpoint error.
    pub err_endpoint: f64,
    /// Relative global (sup-norm over the grid) error.
    pub err_global: f64,
    /// Observed endpoint order against the previous (coarser) row.
    pub order_endpoint: Option<f64>,
    /// Observed global order against the previous row.
    pub order_global: Option<f64>,
    /// Picard sweeps the global solver needed.
    pub picard_iters: usize,
    /// Wall time of the solve in seconds.
    pub wall_s: f64,
}

/// One measured grid size of a timing sweep.
#[derive(Debug, Clone, Serialize)]
pub struct TimingRow {
    /// Number of steps.
    pub n: usize,
    /// Median wall time of the FFT solver, seconds.
    pub fast_s: f64,
    /// Median wall time of the stepwise reference, seconds; `None` above
    /// the reference cutoff.
    pub reference_s: Option<f64>,
}

/// Number of steps covering `[0, t_end]` with step `h`.
///
/// # Errors
///
/// Non-positive `h` or `t_end`, or a horizon that is not an integer
/// multiple of `h` (within `1e-9` relative).
pub fn steps_for(t_end: f64, h: f64) -> Result<usize> {
    if !h.is_finite() || h <= 0.0 {
        bail!("step size must be positive and finite, got {h}");
    }
    if !t_end.is_finite() || t_end <= 0.0 {
        bail!("horizon must be positive and finite, got {t_end}");
    }
    let n = (t_end / h).round();
    if n < 1.0 {
        bail!("step size {h} exceeds the horizon {t_end}");
    }
    if (n * h - t_end).abs() > 1e-9 * t_end.max(1.0) {
        bail!("horizon {t_end} is not an integer number of steps of size {h}");
    }
    Ok(n as usize)
}

/// Runs the fast global solver on one grid.
pub fn solve_fast(
    instance: &ProblemInstance,
    settings: &RunSettings,
    h: f64,
) -> Result<Trajectory> {
    let n = steps_for(settings.t_end, h)?;
    picard_solve(&instance.problem, &settings.params(h, n), settings.scheme)
        .with_context(|| format!("fast solve of '{}' at h = {h}", instance.name))
}

/// Runs the stepwise reference solver on one grid.
pub fn solve_slow(
    instance: &ProblemInstance,
    settings: &RunSettings,
    h: f64,
) -> Result<Trajectory> {
    let n = steps_for(settings.t_end, h)?;
    solve_reference(&instance.problem, &settings.params(h, n), settings.scheme)
        .with_context(|| format!("reference solve of '{}' at h = {h}", instance.name))
}

/// Benchmark trajectory used in place of an exact solution.
///
/// Degree-1 scheme on `h = 2⁻¹¹` with the three-term correction set of the
/// problem's fractional expansion; shared across the study regardless of
/// the degree under test.
pub fn benchmark_trajectory(
    instance: &ProblemInstance,
    settings: &RunSettings,
) -> Result<Trajectory> {
    let alpha = settings.alpha;
    let powers = [alpha, 2.0 * alpha, 1.0 + alpha];
    let mut bench = settings.clone();
    bench.scheme = Scheme::Imex;
    bench.p = 1;
    bench.plan = CorrectionPlan::symmetric(&powers, &powers)?;
    solve_fast(instance, &bench, BENCHMARK_H).context("benchmark trajectory")
}

/// Observed order between two ladder entries, `ln(e0/e1) / ln(h0/h1)`.
fn order_between(h0: f64, e0: f64, h1: f64, e1: f64) -> Option<f64> {
    if !(e0 > 0.0) || !(e1 > 0.0) {
        return None;
    }
    let span = (h0 / h1).ln();
    if !span.is_finite() || span.abs() < 1e-12 {
        return None;
    }
    let order = (e0 / e1).ln() / span;
    order.is_finite().then_some(order)
}

/// Runs the fast solver across a step-size ladder and measures errors.
///
/// Ladder entries run in parallel. Orders are reported between adjacent
/// rows (the first row has none); a single-entry ladder therefore has
/// empty order columns. Errors are measured against the exact solution,
/// or against the shared benchmark trajectory when the problem has none —
/// in that case every `h` must be an integer multiple of [`BENCHMARK_H`].
///
/// # Errors
///
/// Solver failures, incompatible grids, or an empty ladder.
pub fn run_convergence(
    instance: &ProblemInstance,
    settings: &RunSettings,
    h_list: &[f64],
) -> Result<Vec<ConvergenceRow>> {
    if h_list.is_empty() {
        bail!("empty step-size ladder");
    }
    let needs_benchmark = instance.exact.is_none();
    if needs_benchmark {
        for &h in h_list {
            let stride = h / BENCHMARK_H;
            if (stride.round() - stride).abs() > 1e-9 || stride < 1.0 {
                bail!(
                    "step size {h} does not nest in the benchmark grid (h = {BENCHMARK_H})"
                );
            }
            steps_for(settings.t_end, h)?;
        }
    }
    let benchmark = if needs_benchmark {
        Some(benchmark_trajectory(instance, settings)?)
    } else {
        None
    };

    let measured: Result<Vec<(f64, f64, usize, f64)>> = h_list
        .par_iter()
        .map(|&h| {
            let trajectory = solve_fast(instance, settings, h)?;
            let (endpoint, global) = match (&instance.exact, &benchmark) {
                (Some(exact), _) => error_metrics(&trajectory, |t, out| exact(t, out)),
                (None, Some(bench)) => error_metrics(&trajectory, |t, out| {
                    let idx = (t / BENCHMARK_H).round() as usize;
                    out.copy_from_slice(bench.state(idx));
                }),
                (None, None) => unreachable!("benchmark built above"),
            };
            let diag = trajectory.diagnostics();
            Ok((endpoint, global, diag.picard_iterations, diag.wall_time.unwrap_or(0.0)))
        })
        .collect();
    let measured = measured?;

    let mut rows = Vec::with_capacity(h_list.len());
    for (i, (&h, &(endpoint, global, iters, wall))) in
        h_list.iter().zip(measured.iter()).enumerate()
    {
        let (order_endpoint, order_global) = if i == 0 {
            (None, None)
        } else {
            let (h0, (e0, g0, ..)) = (h_list[i - 1], measured[i - 1]);
            (
                order_between(h0, e0, h, endpoint),
                order_between(h0, g0, h, global),
            )
        };
        rows.push(ConvergenceRow {
            h,
            err_endpoint: endpoint,
            err_global: global,
            order_endpoint,
            order_global,
            picard_iters: iters,
            wall_s: wall,
        });
    }
    Ok(rows)
}

/// Times the fast solver against the stepwise reference across grid sizes.
///
/// Each entry reports the median of `repeats` runs; the reference is
/// skipped for `n > max_ref_n` (its history cost is quadratic).
pub fn run_timing(
    instance: &ProblemInstance,
    settings: &RunSettings,
    n_list: &[usize],
    repeats: usize,
    max_ref_n: usize,
) -> Result<Vec<TimingRow>> {
    if n_list.is_empty() {
        bail!("empty grid ladder");
    }
    if repeats == 0 {
        bail!("need at least one repeat per measurement");
    }
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        if n == 0 {
            bail!("grid size must be positive");
        }
        let h = settings.t_end / n as f64;
        let fast_s = median_time(repeats, || solve_fast(instance, settings, h))?;
        let reference_s = if n <= max_ref_n {
            Some(median_time(repeats, || solve_slow(instance, settings, h))?)
        } else {
            None
        };
        rows.push(TimingRow { n, fast_s, reference_s });
    }
    Ok(rows)
}

fn median_time<F>(repeats: usize, mut run: F) -> Result<f64>
where
    F: FnMut() -> Result<Trajectory>,
{
    let mut samples = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let started = std::time::Instant::now();
        run()?;
        samples.push(started.elapsed().as_secs_f64());
    }
    samples.sort_by(|a, b| a.total_cmp(b));
    let mid = samples.len() / 2;
    Ok(if samples.len() % 2 == 1 {
        samples[mid]
    } else {
        0.5 * (samples[mid - 1] + samples[mid])
    })
}

/// Applies the `FIDE_THREADS` worker cap to the global rayon pool.
///
/// `0` or an unset variable keeps the default (one worker per core). Call
/// once, before any parallel work; later calls are ignored.
pub fn configure_threads() {
    if let Ok(raw) = std::env::var("FIDE_THREADS") {
        match raw.trim().parse::<usize>() {
            Ok(0) => {}
            Ok(n) => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            Err(_) => eprintln!("warning: ignoring invalid FIDE_THREADS value '{raw}'"),
        }
    }
}
