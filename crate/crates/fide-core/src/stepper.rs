//! Sequential reference solver for Caputo initial-value problems.
//!
//! Solves `D^α u = λ u + f(t, u)`, `u(0) = u₀`, `0 < α ≤ 1`, by fractional
//! linear multi-step schemes of order `p + 1 ∈ {1, 2}`. Each step combines
//! three discrete operators built in [`crate::coeffs`] and corrected per
//! [`crate::corrections`]:
//!
//! * a lagged **history** sum `(1/(Γ(α)Γ(2-α))) Σ_j γ_{k,j} u_j`,
//! * an implicit **Adams–Moulton quadrature** `h^α Σ_j β_j (·)_{k+1-j}`
//!   applied to both `λ u` and `f`,
//! * for the IMEX variant, an explicit **extrapolation** `E_k f` replacing
//!   the implicit force sample so only the stiff linear part stays implicit.
//!
//! The update solved at each step is
//!
//! ```text
//! u_{k+1} = u_k - H_k[u] + h^α λ( I_k[u] ) + h^α J_k[f]
//! ```
//!
//! with the implicit part collected into a single constant matrix
//! `I - h^α β₀ λ` that is factored once per run. FAMM evaluates
//! `f(t_{k+1}, u_{k+1})` by an inner fixed-point iteration; IMEX needs no
//! iteration at all once past the starting corrections. Because correction
//! rows reference the first `m` solution samples, the first `m` steps are
//! swept repeatedly (Gauss–Seidel style, starting from an uncorrected pass)
//! until self-consistent.
//!
//! Cost is `O(N² d)` over `N` steps — this is the plain quadratic stepper
//! used as ground truth; the FFT-accelerated equivalent lives in
//! [`crate::fastsolve`].

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::coeffs::{gamma_entry, AdamsMoultonCoeffs, KernelTable};
use crate::corrections::{correction_weights, CorrectionPlan, CorrectionWeights};
use crate::error::{Error, Result};
use crate::linalg;
use crate::math;
use crate::specfun::GaussJacobiRule;

/// Right-hand side callback: `force(t, u, out)` writes `f(t, u)` into `out`.
pub type ForceFn = Box<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>;

/// The stiff linear operator `λ` of `D^α u = λ u + f(t, u)`.
#[derive(Debug, Clone, PartialEq)]
pub enum LambdaOp {
    /// `λ u` with a scalar `λ` (any dimension; acts componentwise).
    Scalar(f64),
    /// A dense row-major `dim x dim` matrix.
    Matrix {
        /// Matrix dimension.
        dim: usize,
        /// Row-major entries, `data[r * dim + c]`.
        data: Vec<f64>,
    },
}

impl LambdaOp {
    /// Scalar operator.
    pub fn scalar(value: f64) -> Self {
        LambdaOp::Scalar(value)
    }

    /// Dense matrix operator.
    ///
    /// # Errors
    ///
    /// [`Error::Shape`] unless `data.len() == dim * dim`.
    pub fn matrix(dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::Shape(format!(
                "lambda matrix for dimension {dim} needs {} entries, got {}",
                dim * dim,
                data.len()
            )));
        }
        Ok(LambdaOp::Matrix { dim, data })
    }

    /// `true` when the operator can act on `dim`-vectors.
    pub fn dim_matches(&self, dim: usize) -> bool {
        match self {
            LambdaOp::Scalar(_) => true,
            LambdaOp::Matrix { dim: d, .. } => *d == dim,
        }
    }

    /// Applies the operator: `out = λ x`.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        match self {
            LambdaOp::Scalar(s) => {
                for (o, &v) in out.iter_mut().zip(x) {
                    *o = s * v;
                }
            }
            LambdaOp::Matrix { dim, data } => {
                for r in 0..*dim {
                    let mut acc = 0.0;
                    for (c, &v) in x.iter().enumerate() {
                        acc += data[r * dim + c] * v;
                    }
                    out[r] = acc;
                }
            }
        }
    }
}

/// A Caputo initial-value problem `D^α u = λ u + f(t, u)`, `u(0) = u₀`.
///
/// The splitting matters for IMEX: `λ u` is treated implicitly, `f`
/// explicitly, so the stiffness should live in `λ`.
pub struct Problem {
    dim: usize,
    lambda: LambdaOp,
    force: ForceFn,
    u0: Vec<f64>,
    lipschitz: Option<f64>,
}

impl Problem {
    /// Builds a problem.
    ///
    /// # Errors
    ///
    /// [`Error::Shape`] when `u0.len() != dim` or the operator dimension
    /// disagrees with `dim`.
    pub fn new(dim: usize, lambda: LambdaOp, force: ForceFn, u0: Vec<f64>) -> Result<Self> {
        if u0.len() != dim {
            return Err(Error::Shape(format!(
                "initial state has length {}, expected {dim}",
                u0.len()
            )));
        }
        if !lambda.dim_matches(dim) {
            return Err(Error::Shape(format!(
                "lambda operator does not act on dimension {dim}"
            )));
        }
        Ok(Problem {
            dim,
            lambda,
            force,
            u0,
            lipschitz: None,
        })
    }

    /// Attaches a Lipschitz bound for `f` in `u`, used by contraction
    /// diagnostics of the global solver.
    pub fn with_lipschitz(mut self, bound: f64) -> Self {
        self.lipschitz = Some(bound);
        self
    }

    /// State-space dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The stiff linear operator.
    pub fn lambda(&self) -> &LambdaOp {
        &self.lambda
    }

    /// Initial state.
    pub fn u0(&self) -> &[f64] {
        &self.u0
    }

    /// Evaluates `f(t, u)` into `out`.
    pub fn force(&self, t: f64, u: &[f64], out: &mut [f64]) {
        (self.force)(t, u, out);
    }

    /// Lipschitz bound attached via [`Problem::with_lipschitz`], if any.
    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }
}

impl core::fmt::Debug for Problem {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Problem")
            .field("dim", &self.dim)
            .field("lambda", &self.lambda)
            .field("u0", &self.u0)
            .field("lipschitz", &self.lipschitz)
            .finish_non_exhaustive()
    }
}

/// Discretization parameters shared by the reference stepper and the global
/// FFT solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverParams {
    /// Fractional order, `0 < alpha <= 1`.
    pub alpha: f64,
    /// Scheme degree: `0` (first order) or `1` (second order).
    pub p: usize,
    /// Step size.
    pub h: f64,
    /// Number of steps `N`; the trajectory holds `N + 1` states.
    pub n_steps: usize,
    /// Starting-correction exponents.
    pub plan: CorrectionPlan,
    /// Fixed-point tolerance (per-step iterations, startup sweeps, and the
    /// global Picard iteration all use it).
    pub picard_tol: f64,
    /// Iteration cap for the same loops.
    pub picard_max: usize,
    /// Gauss–Jacobi points for kernel/correction quadratures.
    pub quad_points: usize,
    /// Circulant regularization ε of the global FFT solver (unused by the
    /// sequential stepper).
    pub eps_circulant: f64,
}

impl SolverParams {
    /// Parameters with default tolerances and no corrections.
    pub fn new(alpha: f64, p: usize, h: f64, n_steps: usize) -> Self {
        SolverParams {
            alpha,
            p,
            h,
            n_steps,
            plan: CorrectionPlan::none(),
            picard_tol: 1e-10,
            picard_max: 500,
            quad_points: 24,
            eps_circulant: 5e-9,
        }
    }

    /// Replaces the correction plan.
    pub fn with_plan(mut self, plan: CorrectionPlan) -> Self {
        self.plan = plan;
        self
    }

    /// Sets fixed-point tolerance and iteration cap.
    pub fn with_picard(mut self, tol: f64, max_iter: usize) -> Self {
        self.picard_tol = tol;
        self.picard_max = max_iter;
        self
    }

    /// Checks parameter ranges.
    ///
    /// # Errors
    ///
    /// [`Error::Domain`] describing the first offending field.
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Domain(format!(
                "alpha = {} outside (0, 1]",
                self.alpha
            )));
        }
        if self.p > 1 {
            return Err(Error::Domain(format!(
                "scheme degree p = {} not in {{0, 1}}",
                self.p
            )));
        }
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(Error::Domain(format!("step size h = {} invalid", self.h)));
        }
        if self.n_steps == 0 {
            return Err(Error::Domain("n_steps must be positive".into()));
        }
        if self.n_steps < self.plan.max_terms() {
            return Err(Error::Domain(format!(
                "n_steps = {} is smaller than the correction depth {}",
                self.n_steps,
                self.plan.max_terms()
            )));
        }
        if !(self.picard_tol > 0.0) {
            return Err(Error::Domain(format!(
                "picard_tol = {} must be positive",
                self.picard_tol
            )));
        }
        if self.picard_max == 0 {
            return Err(Error::Domain("picard_max must be positive".into()));
        }
        if self.quad_points == 0 {
            return Err(Error::Domain("quad_points must be positive".into()));
        }
        if !(self.eps_circulant >= 1e-12 && self.eps_circulant < 1.0) {
            return Err(Error::Domain(format!(
                "eps_circulant = {} outside [1e-12, 1)",
                self.eps_circulant
            )));
        }
        Ok(())
    }
}

/// Which multi-step family to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Fully implicit fractional Adams–Moulton.
    Famm,
    /// Implicit in `λ u`, explicit (extrapolated) in `f`.
    Imex,
}

/// Run metadata attached to a [`Trajectory`].
///
/// For the sequential stepper, `picard_iterations` is the largest per-step
/// fixed-point count, `final_residual` the last step's update norm, and
/// `residual_history` the startup-sweep deltas. The global FFT solver
/// documents its own (whole-trajectory) semantics for the same fields.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnostics {
    /// Iteration count (see type docs).
    pub picard_iterations: usize,
    /// Final fixed-point residual in the infinity norm.
    pub final_residual: f64,
    /// Largest correction-family depth that was active.
    pub corrections_used: usize,
    /// Wall-clock seconds for the solve (`None` without `std`).
    pub wall_time: Option<f64>,
    /// Residual per iteration of the outermost fixed-point loop.
    pub residual_history: Vec<f64>,
}

/// A computed discrete solution on the uniform grid `t_k = k h`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<f64>,
    dim: usize,
    diagnostics: Diagnostics,
}

impl Trajectory {
    pub(crate) fn from_parts(
        times: Vec<f64>,
        states: Vec<f64>,
        dim: usize,
        diagnostics: Diagnostics,
    ) -> Self {
        debug_assert_eq!(states.len(), times.len() * dim);
        Trajectory {
            times,
            states,
            dim,
            diagnostics,
        }
    }

    /// Grid times `t_0..t_N`.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// State at grid index `k`.
    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k * self.dim..(k + 1) * self.dim]
    }

    /// All states as one row-major `(N+1) x dim` block.
    pub fn states(&self) -> &[f64] {
        &self.states
    }

    /// Number of steps `N`.
    pub fn n_steps(&self) -> usize {
        self.times.len() - 1
    }

    /// State-space dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Final state `u_N`.
    pub fn last(&self) -> &[f64] {
        self.state(self.n_steps())
    }

    /// Solver metadata.
    pub fn diagnostics(&self) -> &Diagnostics {
        &self.diagnostics
    }
}

/// How the constant implicit matrix `I - h^α β₀ λ` is inverted per step.
enum ImplicitSolve {
    /// Scalar λ: componentwise multiply by `1 / (1 - h^α β₀ λ)`.
    Scalar(f64),
    /// Dense factored `dim x dim` system.
    Dense { lu: Vec<f64>, piv: Vec<usize> },
}

impl ImplicitSolve {
    fn new(lambda: &LambdaOp, dim: usize, c: f64) -> Result<Self> {
        match lambda {
            LambdaOp::Scalar(s) => {
                let denom = 1.0 - c * s;
                if denom == 0.0 || !denom.is_finite() {
                    return Err(Error::Singular {
                        what: format!("implicit factor 1 - h^alpha beta0 lambda = {denom}"),
                    });
                }
                Ok(ImplicitSolve::Scalar(1.0 / denom))
            }
            LambdaOp::Matrix { data, .. } => {
                let mut m = vec![0.0f64; dim * dim];
                for r in 0..dim {
                    for c_idx in 0..dim {
                        let id = if r == c_idx { 1.0 } else { 0.0 };
                        m[r * dim + c_idx] = id - c * data[r * dim + c_idx];
                    }
                }
                let piv = linalg::lu_factor(&mut m, dim, "implicit step matrix")?;
                Ok(ImplicitSolve::Dense { lu: m, piv })
            }
        }
    }

    fn solve_in_place(&self, x: &mut [f64]) {
        match self {
            ImplicitSolve::Scalar(inv) => {
                for v in x.iter_mut() {
                    *v *= inv;
                }
            }
            ImplicitSolve::Dense { lu, piv } => {
                linalg::lu_solve(lu, x.len(), piv, x);
            }
        }
    }
}

struct Engine<'a> {
    problem: &'a Problem,
    params: &'a SolverParams,
    scheme: Scheme,
    coeffs: AdamsMoultonCoeffs,
    table: KernelTable,
    weights: CorrectionWeights,
    h_alpha: f64,
    /// `1 / (Γ(α) Γ(2-α))`.
    norm: f64,
    implicit: ImplicitSolve,
    /// `γ ≡ 0` at `α = 1`; skip the quadratic history loop entirely then.
    history_active: bool,
}

/// Per-step outcome used for diagnostics.
struct StepStats {
    inner_iterations: usize,
    residual: f64,
}

impl Engine<'_> {
    /// Computes `u_{k+1}` into `u[(k+1)*d..]` and refreshes
    /// `f[(k+1)*d..]`, reading history and correction samples from the
    /// current contents of `u` and `f`.
    fn advance(
        &self,
        k: usize,
        u: &mut [f64],
        f: &mut [f64],
        use_corrections: bool,
    ) -> Result<StepStats> {
        let d = self.problem.dim;
        let p = self.params.p;
        let h = self.params.h;
        let beta0 = self.coeffs.beta0();
        let u0 = u[0..d].to_vec();
        let f0 = f[0..d].to_vec();

        // Known part of the right-hand side (everything except the implicit
        // beta0 contribution).
        let mut rhs = vec![0.0f64; d];
        let mut lam_in = vec![0.0f64; d];
        let mut lam_out = vec![0.0f64; d];

        // u_k.
        rhs.copy_from_slice(&u[k * d..(k + 1) * d]);

        // Lagged history - (1/GG) sum_j gamma_{k,j} u_j.
        if self.history_active {
            for j in 0..=k {
                let w = self.norm * gamma_entry(&self.table, p, k, j);
                if w != 0.0 {
                    let uj = &u[j * d..(j + 1) * d];
                    for (r, &v) in rhs.iter_mut().zip(uj) {
                        *r -= w * v;
                    }
                }
            }
        }

        // Quadrature input for the lambda part, without the implicit sample:
        // beta1 u_k plus its sigma corrections.
        if p == 1 {
            let uk = &u[k * d..(k + 1) * d];
            for (l, &v) in lam_in.iter_mut().zip(uk) {
                *l = self.coeffs.beta1() * v;
            }
        }

        if use_corrections {
            // History corrections: - sum_r Wt_{k,r} (u_{r+1} - u0).
            let wt = self.weights.history().row(k);
            for (r, &w) in wt.iter().enumerate() {
                let uj = &u[(r + 1) * d..(r + 2) * d];
                for i in 0..d {
                    rhs[i] -= w * (uj[i] - u0[i]);
                }
            }
            // Quadrature corrections on u: + sum_r W_{k,r} (u_{r+1} - u0).
            let wu = self.weights.integral_u().row(k);
            for (r, &w) in wu.iter().enumerate() {
                let uj = &u[(r + 1) * d..(r + 2) * d];
                for i in 0..d {
                    lam_in[i] += w * (uj[i] - u0[i]);
                }
            }
        }

        self.problem.lambda.apply(&lam_in, &mut lam_out);
        for (r, &v) in rhs.iter_mut().zip(&lam_out) {
            *r += self.h_alpha * v;
        }

        // Explicit force quadrature: everything except beta0 * f_{k+1}.
        let mut force_acc = vec![0.0f64; d];
        if p == 1 {
            let fk = &f[k * d..(k + 1) * d];
            for (a, &v) in force_acc.iter_mut().zip(fk) {
                *a = self.coeffs.beta1() * v;
            }
        }
        if use_corrections {
            let wf = self.weights.integral_f().row(k);
            for (r, &w) in wf.iter().enumerate() {
                let fj = &f[(r + 1) * d..(r + 2) * d];
                for i in 0..d {
                    force_acc[i] += w * (fj[i] - f0[i]);
                }
            }
        }

        // IMEX: the implicit force sample is replaced by the corrected
        // extrapolation, so it joins the known part.
        if self.scheme == Scheme::Imex {
            let fk = &f[k * d..(k + 1) * d];
            if p == 1 && k >= 1 {
                let fkm = &f[(k - 1) * d..k * d];
                for i in 0..d {
                    force_acc[i] += beta0 * (2.0 * fk[i] - fkm[i]);
                }
            } else {
                for i in 0..d {
                    force_acc[i] += beta0 * fk[i];
                }
            }
            if use_corrections {
                let wex = self.weights.extrapolation().row(k);
                for (r, &w) in wex.iter().enumerate() {
                    let fj = &f[(r + 1) * d..(r + 2) * d];
                    for i in 0..d {
                        force_acc[i] += beta0 * w * (fj[i] - f0[i]);
                    }
                }
            }
        }

        for (r, &v) in rhs.iter_mut().zip(&force_acc) {
            *r += self.h_alpha * v;
        }

        let t_next = (k + 1) as f64 * h;
        let (next, stats) = match self.scheme {
            Scheme::Imex => {
                let mut x = rhs.clone();
                self.implicit.solve_in_place(&mut x);
                (
                    x,
                    StepStats {
                        inner_iterations: 0,
                        residual: 0.0,
                    },
                )
            }
            Scheme::Famm => {
                // Fixed point on the implicit force sample:
                // u = M^{-1}(rhs + h^alpha beta0 f(t_{k+1}, u)).
                let mut guess = u[k * d..(k + 1) * d].to_vec();
                let mut fbuf = vec![0.0f64; d];
                let mut iterations = 0usize;
                loop {
                    self.problem.force(t_next, &guess, &mut fbuf);
                    let mut x = rhs.clone();
                    for (xi, &fv) in x.iter_mut().zip(&fbuf) {
                        *xi += self.h_alpha * beta0 * fv;
                    }
                    self.implicit.solve_in_place(&mut x);
                    iterations += 1;
                    let mut delta = 0.0f64;
                    let mut scale = 1.0f64;
                    let mut finite = true;
                    for (a, b) in x.iter().zip(&guess) {
                        // f64::max drops NaN operands; track finiteness.
                        finite &= a.is_finite();
                        delta = delta.max(math::abs(a - b));
                        scale = scale.max(math::abs(*a));
                    }
                    if !finite {
                        delta = f64::INFINITY;
                    }
                    guess = x;
                    if delta <= self.params.picard_tol * scale {
                        break (
                            guess,
                            StepStats {
                                inner_iterations: iterations,
                                residual: delta,
                            },
                        );
                    }
                    if iterations >= self.params.picard_max || !delta.is_finite() {
                        return Err(Error::NoConvergence {
                            what: format!("implicit force iteration at step {}", k + 1),
                            iterations,
                            residual: delta,
                        });
                    }
                }
            }
        };

        u[(k + 1) * d..(k + 2) * d].copy_from_slice(&next);
        self.problem
            .force(t_next, &u[(k + 1) * d..(k + 2) * d], &mut f[(k + 1) * d..(k + 2) * d]);
        Ok(stats)
    }
}

/// Runs the sequential solver.
///
/// # Errors
///
/// * [`Error::Domain`] / [`Error::Shape`] on invalid parameters.
/// * [`Error::NoConvergence`] if a per-step force iteration or the
///   startup-correction sweeps fail to settle.
/// * [`Error::Singular`] if the implicit matrix is not invertible.
pub fn solve_reference(
    problem: &Problem,
    params: &SolverParams,
    scheme: Scheme,
) -> Result<Trajectory> {
    params.validate()?;
    #[cfg(feature = "std")]
    let started = std::time::Instant::now();

    let d = problem.dim;
    let n = params.n_steps;
    let alpha = params.alpha;
    let p = params.p;

    let rule = GaussJacobiRule::new(params.quad_points, alpha - 1.0, 0.0)?;
    let table = KernelTable::new(alpha, params.h, n, &rule)?;
    let coeffs = AdamsMoultonCoeffs::new(alpha, p)?;
    let weights = correction_weights(&params.plan, alpha, p, n, &table, &rule)?;
    let h_alpha = math::powf(params.h, alpha);
    let implicit = ImplicitSolve::new(&problem.lambda, d, h_alpha * coeffs.beta0())?;

    let engine = Engine {
        problem,
        params,
        scheme,
        norm: 1.0 / table.gamma_gamma(),
        coeffs,
        table,
        weights,
        h_alpha,
        implicit,
        history_active: alpha < 1.0,
    };

    let mut u = vec![0.0f64; (n + 1) * d];
    let mut f = vec![0.0f64; (n + 1) * d];
    u[0..d].copy_from_slice(&problem.u0);
    problem.force(0.0, &problem.u0, &mut f[0..d]);

    let mut diag = Diagnostics {
        corrections_used: params.plan.max_terms(),
        ..Diagnostics::default()
    };

    // Startup sweeps: correction rows reference u_1..u_m before they exist,
    // so iterate the first m steps to self-consistency. The first pass runs
    // uncorrected to produce sane initial samples.
    let depth = params.plan.max_terms().min(n);
    let mut start = 0usize;
    if depth > 0 {
        for k in 0..depth {
            let stats = engine.advance(k, &mut u, &mut f, false)?;
            diag.picard_iterations = diag.picard_iterations.max(stats.inner_iterations);
        }
        let mut prev: Vec<f64> = u[d..(depth + 1) * d].to_vec();
        let mut sweep = 0usize;
        loop {
            sweep += 1;
            for k in 0..depth {
                let stats = engine.advance(k, &mut u, &mut f, true)?;
                diag.picard_iterations = diag.picard_iterations.max(stats.inner_iterations);
            }
            let cur = &u[d..(depth + 1) * d];
            let mut delta = 0.0f64;
            let mut scale = 1.0f64;
            let mut finite = true;
            for (a, b) in cur.iter().zip(&prev) {
                // f64::max drops NaN operands; track finiteness.
                finite &= a.is_finite();
                delta = delta.max(math::abs(a - b));
                scale = scale.max(math::abs(*a));
            }
            if !finite {
                delta = f64::INFINITY;
            }
            diag.residual_history.push(delta);
            if delta <= params.picard_tol * scale {
                break;
            }
            if sweep >= 50 || !delta.is_finite() {
                return Err(Error::NoConvergence {
                    what: "starting-correction sweeps".into(),
                    iterations: sweep,
                    residual: delta,
                });
            }
            prev.copy_from_slice(cur);
        }
        start = depth;
    }

    for k in start..n {
        let stats = engine.advance(k, &mut u, &mut f, true)?;
        diag.picard_iterations = diag.picard_iterations.max(stats.inner_iterations);
        diag.final_residual = stats.residual;
    }

    // The explicit IMEX march has no per-step residual that could flag an
    // overflowing trajectory, so check the states once at the end.
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::NoConvergence {
            what: "finite-value check after time-stepping".into(),
            iterations: n,
            residual: f64::INFINITY,
        });
    }

    #[cfg(feature = "std")]
    {
        diag.wall_time = Some(started.elapsed().as_secs_f64());
    }

    let times: Vec<f64> = (0..=n).map(|k| k as f64 * params.h).collect();
    Ok(Trajectory::from_parts(times, u, d, diag))
}

/// [`solve_reference`] with [`Scheme::Famm`].
///
/// # Errors
///
/// See [`solve_reference`].
pub fn solve_famm(problem: &Problem, params: &SolverParams) -> Result<Trajectory> {
    solve_reference(problem, params, Scheme::Famm)
}

/// [`solve_reference`] with [`Scheme::Imex`].
///
/// # Errors
///
/// See [`solve_reference`].
pub fn solve_imex(problem: &Problem, params: &SolverParams) -> Result<Trajectory> {
    solve_reference(problem, params, Scheme::Imex)
}

/// Relative error metrics of a trajectory against an exact solution.
///
/// Returns `(endpoint, global)`:
/// `endpoint = |u_N - u(t_N)|_inf / |u(t_N)|_inf` and
/// `global = max_k |u_k - u(t_k)|_inf / max_k |u(t_k)|_inf`
/// (a ratio of maxima, not a maximum of ratios). Zero denominators fall
/// back to absolute errors.
pub fn error_metrics<F>(trajectory: &Trajectory, mut exact: F) -> (f64, f64)
where
    F: FnMut(f64, &mut [f64]),
{
    let d = trajectory.dim();
    let mut buf = vec![0.0f64; d];
    let mut max_err = 0.0f64;
    let mut max_mag = 0.0f64;
    let mut end_err = 0.0f64;
    let mut end_mag = 0.0f64;
    let n = trajectory.n_steps();
    for (k, &t) in trajectory.times().iter().enumerate() {
        exact(t, &mut buf);
        let state = trajectory.state(k);
        let mut err = 0.0f64;
        let mut mag = 0.0f64;
        for i in 0..d {
            err = err.max(math::abs(state[i] - buf[i]));
            mag = mag.max(math::abs(buf[i]));
        }
        max_err = max_err.max(err);
        max_mag = max_mag.max(mag);
        if k == n {
            end_err = err;
            end_mag = mag;
        }
    }
    let endpoint = if end_mag > 0.0 { end_err / end_mag } else { end_err };
    let global = if max_mag > 0.0 { max_err / max_mag } else { max_err };
    (endpoint, global)
}

/// Observed convergence orders `log2(err[i] / err[i+1])` for errors measured
/// at successively halved step sizes.
pub fn observed_order(errors: &[f64]) -> Vec<f64> {
    errors
        .windows(2)
        .map(|w| math::ln(w[0] / w[1]) / core::f64::consts::LN_2)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gamma_fn;
    use approx::assert_relative_eq;

    fn scalar_problem(lambda: f64, u0: f64, force: ForceFn) -> Problem {
        Problem::new(1, LambdaOp::scalar(lambda), force, vec![u0]).unwrap()
    }

    #[test]
    fn parameter_validation_rejects_bad_input() {
        let good = SolverParams::new(0.5, 0, 0.1, 10);
        assert!(good.validate().is_ok());
        assert!(SolverParams::new(0.0, 0, 0.1, 10).validate().is_err());
        assert!(SolverParams::new(1.1, 0, 0.1, 10).validate().is_err());
        assert!(SolverParams::new(0.5, 2, 0.1, 10).validate().is_err());
        assert!(SolverParams::new(0.5, 0, 0.0, 10).validate().is_err());
        assert!(SolverParams::new(0.5, 0, 0.1, 0).validate().is_err());
        // Correction depth cannot exceed the number of steps.
        let plan = CorrectionPlan::symmetric(&[0.5, 1.0, 1.5], &[]).unwrap();
        assert!(SolverParams::new(0.5, 0, 0.1, 2)
            .with_plan(plan)
            .validate()
            .is_err());
        let mut bad_eps = SolverParams::new(0.5, 0, 0.1, 10);
        bad_eps.eps_circulant = 1e-15;
        assert!(bad_eps.validate().is_err());
    }

    #[test]
    fn problem_shape_checks() {
        let f: ForceFn = Box::new(|_, _, out| out[0] = 0.0);
        assert!(Problem::new(2, LambdaOp::scalar(0.0), f, vec![1.0]).is_err());
        let f: ForceFn = Box::new(|_, _, out| out[0] = 0.0);
        let m = LambdaOp::matrix(3, vec![0.0; 9]).unwrap();
        assert!(Problem::new(2, m, f, vec![1.0, 2.0]).is_err());
        assert!(LambdaOp::matrix(2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn lambda_op_applies_matrix() {
        let m = LambdaOp::matrix(2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let mut out = vec![0.0; 2];
        m.apply(&[1.0, -1.0], &mut out);
        assert_eq!(out, vec![-1.0, -1.0]);
    }

    /// At alpha = 1 with degree 1, FAMM must reduce exactly to the classical
    /// trapezoidal rule and IMEX to trapezoid-in-lambda with Adams-Bashforth
    /// extrapolation of the force.
    #[test]
    fn alpha_one_degree_one_matches_classical_schemes() {
        let lambda = -2.0;
        let h = 0.05;
        let n = 40;
        let force_of_t = |t: f64| (2.0 * t).sin() + 0.3;

        let params = SolverParams::new(1.0, 1, h, n);
        let f: ForceFn = Box::new(move |t, _, out| out[0] = force_of_t(t));
        let problem = scalar_problem(lambda, 1.0, f);

        // FAMM = trapezoidal rule.
        let famm = solve_reference(&problem, &params, Scheme::Famm).unwrap();
        let mut u = 1.0f64;
        for k in 0..n {
            let t0 = k as f64 * h;
            let t1 = (k + 1) as f64 * h;
            u = (u + 0.5 * h * (lambda * u + force_of_t(t0) + force_of_t(t1)))
                / (1.0 - 0.5 * h * lambda);
            assert_relative_eq!(famm.state(k + 1)[0], u, max_relative = 1e-12);
        }

        // IMEX = trapezoid in lambda u, AB2-style in f.
        let imex = solve_reference(&problem, &params, Scheme::Imex).unwrap();
        let mut u = 1.0f64;
        for k in 0..n {
            let t_k = k as f64 * h;
            let f_pred = if k == 0 {
                force_of_t(0.0)
            } else {
                1.5 * force_of_t(t_k) - 0.5 * force_of_t(t_k - h)
            };
            u = (u + 0.5 * h * lambda * u + h * f_pred) / (1.0 - 0.5 * h * lambda);
            assert_relative_eq!(imex.state(k + 1)[0], u, max_relative = 1e-12);
        }
    }

    /// At alpha = 1 with degree 0, FAMM is implicit Euler and IMEX is the
    /// classical first-order splitting.
    #[test]
    fn alpha_one_degree_zero_matches_classical_schemes() {
        let lambda = -3.0;
        let h = 0.1;
        let n = 20;
        let force_of_t = |t: f64| (t * t).cos();
        let params = SolverParams::new(1.0, 0, h, n);
        let f: ForceFn = Box::new(move |t, _, out| out[0] = force_of_t(t));
        let problem = scalar_problem(lambda, 0.5, f);

        let famm = solve_reference(&problem, &params, Scheme::Famm).unwrap();
        let imex = solve_reference(&problem, &params, Scheme::Imex).unwrap();
        let mut ue = 0.5f64;
        let mut ui = 0.5f64;
        for k in 0..n {
            let t1 = (k + 1) as f64 * h;
            let t0 = k as f64 * h;
            ue = (ue + h * force_of_t(t1)) / (1.0 - h * lambda);
            ui = (ui + h * force_of_t(t0)) / (1.0 - h * lambda);
            assert_relative_eq!(famm.state(k + 1)[0], ue, max_relative = 1e-12);
            assert_relative_eq!(imex.state(k + 1)[0], ui, max_relative = 1e-12);
        }
    }

    /// With corrections covering every power present in the solution and the
    /// force, the schemes reproduce u(t) = u0 + t^sigma to fixed-point
    /// accuracy: all three discrete operators are exact on the sampled data.
    #[test]
    fn corrected_schemes_are_exact_on_covered_powers() {
        let alpha = 0.4;
        let sigma = 1.0;
        let lambda = -0.8;
        let u0 = 0.7;
        let h = 1.0 / 16.0;
        let n = 16;
        // f(t) = D^alpha u - lambda u for u = u0 + t^sigma.
        let dcoef = gamma_fn(sigma + 1.0).unwrap() / gamma_fn(sigma + 1.0 - alpha).unwrap();

        let plan = CorrectionPlan::new(
            &[sigma],
            &[sigma],
            &[sigma - alpha, sigma],
            &[sigma - alpha, sigma],
        )
        .unwrap();

        for p in [0usize, 1] {
            for scheme in [Scheme::Famm, Scheme::Imex] {
                let force_clone: ForceFn = {
                    let dc = dcoef;
                    Box::new(move |t: f64, _: &[f64], out: &mut [f64]| {
                        out[0] = dc * t.powf(sigma - alpha) - lambda * (u0 + t.powf(sigma));
                    })
                };
                let problem = scalar_problem(lambda, u0, force_clone);
                let params = SolverParams::new(alpha, p, h, n)
                    .with_plan(plan.clone())
                    .with_picard(1e-13, 500);
                let traj = solve_reference(&problem, &params, scheme).unwrap();
                for (k, &t) in traj.times().iter().enumerate() {
                    let exact = u0 + t.powf(sigma);
                    assert!(
                        (traj.state(k)[0] - exact).abs() < 1e-9,
                        "p={p} scheme={scheme:?} k={k}: {} vs {exact}",
                        traj.state(k)[0]
                    );
                }
            }
        }
    }

    /// Orders on a solution whose singular power is corrected away while a
    /// smooth `t^3` component is left to the scheme itself: the degree-0
    /// scheme converges at first order, the degree-1 scheme at second.
    #[test]
    fn degree_one_beats_degree_zero_on_model_problem() {
        let alpha = 0.6;
        // u_exact = t^(2 alpha) + t^3, lambda = -1,
        // f = D^alpha u - lambda u (powers alpha, 3 - alpha, 2 alpha, 3;
        // only {alpha, 2 alpha} are corrected).
        let lambda = -1.0;
        let c1 = gamma_fn(2.0 * alpha + 1.0).unwrap() / gamma_fn(alpha + 1.0).unwrap();
        let c2 = gamma_fn(4.0).unwrap() / gamma_fn(4.0 - alpha).unwrap();
        let exact = move |t: f64| t.powf(2.0 * alpha) + t * t * t;
        let make_problem = || -> Problem {
            let force: ForceFn = Box::new(move |t: f64, _: &[f64], out: &mut [f64]| {
                out[0] = c1 * t.powf(alpha) + c2 * t.powf(3.0 - alpha) - lambda * exact(t);
            });
            scalar_problem(lambda, 0.0, force)
        };
        let mut errs = [[0.0f64; 2]; 2];
        for (pi, p) in [0usize, 1].into_iter().enumerate() {
            for (ni, n) in [32usize, 64].into_iter().enumerate() {
                let plan =
                    CorrectionPlan::symmetric(&[alpha, 2.0 * alpha], &[alpha, 2.0 * alpha])
                        .unwrap();
                let params = SolverParams::new(alpha, p, 1.0 / n as f64, n)
                    .with_plan(plan)
                    .with_picard(1e-12, 500);
                let problem = make_problem();
                let traj = solve_reference(&problem, &params, Scheme::Imex).unwrap();
                let (end, _) = error_metrics(&traj, |t, out| out[0] = exact(t));
                errs[pi][ni] = end;
            }
        }
        let order0 = (errs[0][0] / errs[0][1]).log2();
        let order1 = (errs[1][0] / errs[1][1]).log2();
        assert!(order0 > 0.8 && order0 < 1.3, "degree-0 order {order0}");
        assert!(order1 > 1.7, "degree-1 order {order1}");
        assert!(errs[1][1] < errs[0][1] / 10.0);
    }

    #[test]
    fn matrix_lambda_runs_and_is_finite() {
        let m = LambdaOp::matrix(2, vec![-1.0, 0.2, 0.0, -0.5]).unwrap();
        let force: ForceFn = Box::new(|t, u, out| {
            out[0] = (1.0 + t).recip() - 0.1 * u[1];
            out[1] = 0.05 * u[0];
        });
        let problem = Problem::new(2, m, force, vec![1.0, -1.0]).unwrap();
        let params = SolverParams::new(0.7, 1, 0.05, 30);
        for scheme in [Scheme::Famm, Scheme::Imex] {
            let traj = solve_reference(&problem, &params, scheme).unwrap();
            assert_eq!(traj.n_steps(), 30);
            assert!(traj.states().iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn divergent_force_iteration_reports_no_convergence() {
        // h^alpha beta0 L >> 1 makes the FAMM inner map expansive.
        let force: ForceFn = Box::new(|_, u, out| out[0] = 1e6 * u[0] + 1.0);
        let problem = scalar_problem(0.0, 1.0, force);
        let params = SolverParams::new(0.5, 0, 1.0, 4).with_picard(1e-12, 25);
        match solve_reference(&problem, &params, Scheme::Famm) {
            Err(Error::NoConvergence { iterations, .. }) => assert_eq!(iterations, 25),
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn error_metrics_and_orders_behave() {
        let traj = Trajectory::from_parts(
            vec![0.0, 0.5, 1.0],
            vec![0.0, 0.26, 1.02],
            1,
            Diagnostics::default(),
        );
        // exact: t^2 -> values 0, 0.25, 1.0; endpoint err 0.02, global
        // max err 0.02 over max mag 1.0.
        let (end, glob) = error_metrics(&traj, |t, out| out[0] = t * t);
        assert_relative_eq!(end, 0.02, max_relative = 1e-12);
        assert_relative_eq!(glob, 0.02, max_relative = 1e-12);

        let orders = observed_order(&[1e-2, 2.5e-3, 6.25e-4]);
        assert_eq!(orders.len(), 2);
        assert_relative_eq!(orders[0], 2.0, max_relative = 1e-12);
        assert_relative_eq!(orders[1], 2.0, max_relative = 1e-12);
    }

    #[test]
    fn wall_time_is_recorded_under_std() {
        let force: ForceFn = Box::new(|_, _, out| out[0] = 1.0);
        let problem = scalar_problem(-1.0, 0.0, force);
        let params = SolverParams::new(0.5, 0, 0.1, 5);
        let traj = solve_reference(&problem, &params, Scheme::Imex).unwrap();
        assert!(traj.diagnostics().wall_time.is_some());
        assert_eq!(traj.diagnostics().corrections_used, 0);
    }
}
