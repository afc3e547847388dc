//! Built-in benchmark problems.
//!
//! Five Caputo initial-value problems `D^α u = λ u + f(t, u)`, `u(0) = u₀`,
//! exercising the solver in different regimes:
//!
//! | key        | d | λ          | character                                  | exact solution |
//! |------------|---|------------|--------------------------------------------|----------------|
//! | `example1` | 1 | `0`        | pure quadrature, monomial forcing          | `t^{p+α}`      |
//! | `example2` | 3 | matrix     | stiff linear system, six fractional powers | yes            |
//! | `case1`    | 1 | `-0.2`     | relaxation, singular derivative at `t = 0` | `E_α(-0.2 t^α)`|
//! | `case2`    | 1 | `-1`       | quadratic nonlinearity, polynomial target  | yes            |
//! | `case3`    | 1 | `-1`       | cubic nonlinearity, oscillatory forcing    | no (benchmark) |
//!
//! `example1` uses a forcing `f(t) = Γ(α+p+1)/Γ(p+1) · t^p` whose monomial
//! degree equals the interpolation degree of the scheme, so the quadrature
//! rule integrates `f` exactly and the measured error isolates the history
//! reconstruction of the singular solution `t^{p+α}` — the standard
//! convergence test for these methods.
//! The others manufacture `f` from a known `u` (or, for `case3`, rely on a
//! fine benchmark run) and carry the correction powers appropriate for their
//! leading fractional expansions.
//!
//! [`build`] instantiates a problem for a given order `α` and scheme degree
//! `p`; the returned [`ProblemInstance`] bundles the [`Problem`] with the
//! horizon, the exact solution (if any), and per-problem defaults (scheme,
//! correction plan, Picard tolerance) used by the runner and the CLI.

use anyhow::{bail, Result};
use fide_core::corrections::CorrectionPlan;
use fide_core::specfun::{gamma_fn, mittag_leffler};
use fide_core::stepper::{LambdaOp, Problem, Scheme};

/// Evaluates the exact solution at `t` into a state slice.
pub type ExactFn = Box<dyn Fn(f64, &mut [f64]) + Send + Sync>;

/// A registry problem instantiated for a concrete `(α, p)`.
pub struct ProblemInstance {
    /// Registry key this instance was built from.
    pub name: &'static str,
    /// The initial-value problem.
    pub problem: Problem,
    /// Exact solution, when the problem has a closed form.
    pub exact: Option<ExactFn>,
    /// Integration horizon `T`.
    pub t_end: f64,
    /// Scheme the problem is normally run with.
    pub default_scheme: Scheme,
    /// Correction powers appropriate for this problem at degree `p`.
    pub default_plan: CorrectionPlan,
    /// Picard tolerance the convergence studies use.
    pub default_picard_tol: f64,
}

impl core::fmt::Debug for ProblemInstance {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ProblemInstance")
            .field("name", &self.name)
            .field("problem", &self.problem)
            .field("has_exact", &self.exact.is_some())
            .field("t_end", &self.t_end)
            .field("default_scheme", &self.default_scheme)
            .field("default_plan", &self.default_plan)
            .field("default_picard_tol", &self.default_picard_tol)
            .finish()
    }
}

/// One row of the problem catalogue (static metadata for `list-problems`).
#[derive(Debug, Clone)]
pub struct CatalogueEntry {
    /// Registry key accepted by [`build`].
    pub name: &'static str,
    /// State dimension.
    pub dim: usize,
    /// Default horizon `T`.
    pub t_end: f64,
    /// Whether a closed-form solution is available.
    pub has_exact: bool,
    /// One-line description.
    pub summary: &'static str,
}

/// All registry keys, in catalogue order.
pub const PROBLEM_NAMES: [&str; 5] = ["example1", "example2", "case1", "case2", "case3"];

/// Static catalogue of the built-in problems.
pub fn catalogue() -> Vec<CatalogueEntry> {
    vec![
        CatalogueEntry {
            name: "example1",
            dim: 1,
            t_end: 1.0,
            has_exact: true,
            summary: "monomial forcing, lambda = 0; exact u = t^{p+alpha}",
        },
        CatalogueEntry {
            name: "example2",
            dim: 3,
            t_end: 10.0,
            has_exact: true,
            summary: "stiff 3x3 linear system with six-power manufactured solution",
        },
        CatalogueEntry {
            name: "case1",
            dim: 1,
            t_end: 40.0,
            has_exact: true,
            summary: "linear relaxation; exact u = E_alpha(-0.2 t^alpha)",
        },
        CatalogueEntry {
            name: "case2",
            dim: 1,
            t_end: 1.0,
            has_exact: true,
            summary: "quadratic nonlinearity with quartic polynomial target",
        },
        CatalogueEntry {
            name: "case3",
            dim: 1,
            t_end: 50.0,
            has_exact: false,
            summary: "cubic nonlinearity, 2 cos(2 pi t) forcing; benchmark-based errors",
        },
    ]
}

/// Instantiates a registry problem for fractional order `alpha` and scheme
/// degree `p`.
///
/// # Errors
///
/// Unknown `name` (the message lists the valid keys), `alpha` outside
/// `(0, 1]`, or `p > 1`.
pub fn build(name: &str, alpha: f64, p: usize) -> Result<ProblemInstance> {
    if !alpha.is_finite() || alpha <= 0.0 || alpha > 1.0 {
        bail!("fractional order must lie in (0, 1], got {alpha}");
    }
    if p > 1 {
        bail!("interpolation degree p = {p} is not supported (use 0 or 1)");
    }
    match name {
        "example1" => example1(alpha, p),
        "example2" => example2(alpha, p),
        "case1" => case1(alpha, p),
        "case2" => case2(alpha, p),
        "case3" => case3(alpha, p),
        other => bail!(
            "unknown problem '{other}'; valid keys: {}",
            PROBLEM_NAMES.join(", ")
        ),
    }
}

/// `Γ(σ+1) / Γ(σ+1-α)`: the Caputo power rule factor in
/// `D^α t^σ = Γ(σ+1)/Γ(σ+1-α) · t^{σ-α}`.
fn caputo_factor(sigma: f64, alpha: f64) -> Result<f64> {
    Ok(gamma_fn(sigma + 1.0)? / gamma_fn(sigma + 1.0 - alpha)?)
}

/// Correction powers `{α, 2α, …, Mα}` (the expansion of Mittag-Leffler-type
/// solutions).
fn multiples_of_alpha(alpha: f64, m: usize) -> Vec<f64> {
    (1..=m).map(|k| k as f64 * alpha).collect()
}

fn symmetric_plan(sigma: &[f64], delta: &[f64]) -> Result<CorrectionPlan> {
    CorrectionPlan::symmetric(sigma, delta).map_err(anyhow::Error::from)
}

fn example1(alpha: f64, p: usize) -> Result<ProblemInstance> {
    let q = p as u32;
    let scale = gamma_fn(alpha + q as f64 + 1.0)? / gamma_fn(q as f64 + 1.0)?;
    let force: fide_core::stepper::ForceFn = Box::new(move |t: f64, _u: &[f64], out: &mut [f64]| {
        out[0] = scale * t.powi(q as i32);
    });
    let problem = Problem::new(1, LambdaOp::scalar(0.0), force, vec![0.0])?;
    let power = q as f64 + alpha;
    let exact: ExactFn = Box::new(move |t: f64, out: &mut [f64]| {
        out[0] = if t > 0.0 { t.powf(power) } else { 0.0 };
    });
    Ok(ProblemInstance {
        name: "example1",
        problem,
        exact: Some(exact),
        t_end: 1.0,
        default_scheme: Scheme::Famm,
        // The solution is a single monomial above the reconstruction degree;
        // the schemes meet design order on it without startup corrections.
        default_plan: CorrectionPlan::none(),
        default_picard_tol: 1e-10,
    })
}

/// Implicit matrix of `example2`.
const EX2_P: [f64; 9] = [
    -1.0, 0.0, 0.001, //
    -0.0005, -0.0008, -0.0002, //
    0.001, 0.0, -0.001,
];

/// Explicitly treated matrix of `example2` (part of `f`).
const EX2_S: [f64; 9] = [
    -0.006, 0.0, 0.002, //
    -0.001, -0.002, 0.0, //
    0.0, -0.005, -0.008,
];

/// The six `(component, coefficient, power)` terms of the `example2` target
/// beyond the constant 1 in each component.
fn ex2_terms(alpha: f64) -> [(usize, f64, f64); 6] {
    [
        (0, 0.5, alpha),
        (0, 0.8, 2.0 * alpha),
        (1, 1.0, 1.0 + alpha),
        (1, 1.0, 5.0 * alpha),
        (2, 1.0, 2.0),
        (2, 1.0, 2.0 + alpha),
    ]
}

fn ex2_exact(alpha: f64, t: f64, out: &mut [f64]) {
    out.fill(1.0);
    if t > 0.0 {
        for (i, a, s) in ex2_terms(alpha) {
            out[i] += a * t.powf(s);
        }
    }
}

fn example2(alpha: f64, p: usize) -> Result<ProblemInstance> {
    // Caputo factors for the six powers; the constants differentiate to zero.
    let factors: Vec<f64> = ex2_terms(alpha)
        .iter()
        .map(|&(_, _, s)| caputo_factor(s, alpha))
        .collect::<Result<_>>()?;
    // f(t, u) = S u + g(t) with g chosen so the target solves
    // D^alpha u = P u + S u + g:  g = D^alpha u_ex - (P + S) u_ex.
    let mut combined = [0.0f64; 9];
    for i in 0..9 {
        combined[i] = EX2_P[i] + EX2_S[i];
    }
    let force: fide_core::stepper::ForceFn = Box::new(move |t: f64, u: &[f64], out: &mut [f64]| {
        let mut target = [0.0f64; 3];
        ex2_exact(alpha, t, &mut target);
        for (r, o) in out.iter_mut().enumerate() {
            let mut g = 0.0;
            for c in 0..3 {
                g -= combined[r * 3 + c] * target[c];
            }
            for c in 0..3 {
                g += EX2_S[r * 3 + c] * u[c];
            }
            *o = g;
        }
        for (idx, &(i, a, s)) in ex2_terms(alpha).iter().enumerate() {
            // t^{s-alpha} with s = alpha present: exponent 0 must give 1.
            let e = s - alpha;
            let pow = if e == 0.0 { 1.0 } else { t.powf(e) };
            out[i] += a * factors[idx] * pow;
        }
    });
    let problem = Problem::new(3, LambdaOp::matrix(3, EX2_P.to_vec())?, force, vec![1.0; 3])?;
    let exact: ExactFn = Box::new(move |t: f64, out: &mut [f64]| ex2_exact(alpha, t, out));
    let default_plan = if p == 1 {
        symmetric_plan(
            &[alpha, 2.0 * alpha, 1.0 + alpha],
            &[2.0 * alpha, 1.0 + alpha, 5.0 * alpha],
        )?
    } else {
        CorrectionPlan::none()
    };
    Ok(ProblemInstance {
        name: "example2",
        problem,
        exact: Some(exact),
        t_end: 10.0,
        default_scheme: Scheme::Imex,
        default_plan,
        default_picard_tol: 5e-7,
    })
}

fn case1(alpha: f64, _p: usize) -> Result<ProblemInstance> {
    let force: fide_core::stepper::ForceFn = Box::new(|_t: f64, _u: &[f64], out: &mut [f64]| {
        out[0] = 0.0;
    });
    let problem = Problem::new(1, LambdaOp::scalar(-0.2), force, vec![1.0])?;
    let exact: ExactFn = Box::new(move |t: f64, out: &mut [f64]| {
        let arg = if t > 0.0 { -0.2 * t.powf(alpha) } else { 0.0 };
        out[0] = mittag_leffler(alpha, arg).expect("Mittag-Leffler evaluation");
    });
    // The solution expands in powers {alpha, 2 alpha, ...}; two terms restore
    // the design order of both schemes (more push the error to the tolerance
    // floor).
    let powers = multiples_of_alpha(alpha, 2);
    Ok(ProblemInstance {
        name: "case1",
        problem,
        exact: Some(exact),
        t_end: 40.0,
        default_scheme: Scheme::Imex,
        default_plan: symmetric_plan(&powers, &powers)?,
        default_picard_tol: 1e-7,
    })
}

fn case2_target(t: f64) -> f64 {
    1.0 + t + t * t / 2.0 + t * t * t / 3.0 + t * t * t * t / 4.0
}

fn case2(alpha: f64, p: usize) -> Result<ProblemInstance> {
    // D^alpha of the quartic target via the power rule.
    let coeffs = [1.0, 0.5, 1.0 / 3.0, 0.25];
    let mut factors = [0.0f64; 4];
    for (j, f) in factors.iter_mut().enumerate() {
        *f = coeffs[j] * caputo_factor((j + 1) as f64, alpha)?;
    }
    // f(t, u) = -0.1 u^2 + g(t) with g = D^alpha u_ex + u_ex + 0.1 u_ex^2
    // (lambda = -1 keeps the linear part implicit).
    let force: fide_core::stepper::ForceFn = Box::new(move |t: f64, u: &[f64], out: &mut [f64]| {
        let target = case2_target(t);
        let mut deriv = 0.0;
        for (j, &f) in factors.iter().enumerate() {
            let e = (j + 1) as f64 - alpha;
            deriv += f * if t > 0.0 { t.powf(e) } else { 0.0 };
        }
        let g = deriv + target + 0.1 * target * target;
        out[0] = -0.1 * u[0] * u[0] + g;
    });
    let problem = Problem::new(1, LambdaOp::scalar(-1.0), force, vec![1.0])?;
    let exact: ExactFn = Box::new(|t: f64, out: &mut [f64]| out[0] = case2_target(t));
    // The force, viewed as a function of t, carries the t^{1-alpha} and t
    // terms of D^alpha u_ex; degree-1 extrapolation needs both corrected.
    // Degree 0 already meets first order on this smooth solution.
    let default_plan = if p == 1 {
        let powers: Vec<f64> = [1.0 - alpha, 1.0].iter().copied().filter(|&s| s > 0.0).collect();
        symmetric_plan(&powers, &powers)?
    } else {
        CorrectionPlan::none()
    };
    Ok(ProblemInstance {
        name: "case2",
        problem,
        exact: Some(exact),
        t_end: 1.0,
        default_scheme: Scheme::Imex,
        default_plan,
        default_picard_tol: 1e-7,
    })
}

fn case3(alpha: f64, p: usize) -> Result<ProblemInstance> {
    let force: fide_core::stepper::ForceFn = Box::new(|t: f64, u: &[f64], out: &mut [f64]| {
        let v = u[0];
        out[0] = 0.01 * v * (1.0 - v * v) + 2.0 * (2.0 * core::f64::consts::PI * t).cos();
    });
    let problem = Problem::new(1, LambdaOp::scalar(-1.0), force, vec![1.0])?;
    let default_plan = if p == 1 {
        symmetric_plan(
            &[alpha, 2.0 * alpha, 1.0 + alpha],
            &[alpha, 2.0 * alpha, 1.0 + alpha],
        )?
    } else {
        CorrectionPlan::none()
    };
    Ok(ProblemInstance {
        name: "case3",
        problem,
        exact: None,
        t_end: 50.0,
        default_scheme: Scheme::Imex,
        default_plan,
        default_picard_tol: 1e-6,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn caputo_power_rule(alpha: f64, coeff: f64, sigma: f64, t: f64) -> f64 {
        let factor = gamma_fn(sigma + 1.0).unwrap() / gamma_fn(sigma + 1.0 - alpha).unwrap();
        let e = sigma - alpha;
        coeff * factor * if e == 0.0 { 1.0 } else { t.powf(e) }
    }

    #[test]
    fn unknown_names_list_the_valid_keys() {
        let err = build("example9", 0.5, 0).unwrap_err().to_string();
        for name in PROBLEM_NAMES {
            assert!(err.contains(name), "{err}");
        }
        assert!(build("case1", 0.0, 0).is_err());
        assert!(build("case1", 1.5, 0).is_err());
        assert!(build("case1", 0.5, 2).is_err());
    }

    #[test]
    fn catalogue_matches_registry() {
        let cat = catalogue();
        assert_eq!(cat.len(), PROBLEM_NAMES.len());
        for (entry, name) in cat.iter().zip(PROBLEM_NAMES) {
            assert_eq!(entry.name, name);
            let inst = build(name, 0.5, 0).unwrap();
            assert_eq!(inst.problem.dim(), entry.dim);
            assert_eq!(inst.t_end, entry.t_end);
            assert_eq!(inst.exact.is_some(), entry.has_exact);
        }
    }

    #[test]
    fn example1_exact_solution_is_monomial() {
        for p in [0usize, 1] {
            let inst = build("example1", 0.5, p).unwrap();
            let exact = inst.exact.as_ref().unwrap();
            let mut u = [0.0];
            exact(0.0, &mut u);
            assert_eq!(u[0], 0.0);
            exact(1.0, &mut u);
            assert!((u[0] - 1.0).abs() < 1e-15, "u(1) = {}", u[0]);
            // Forcing degree equals p: f(t) ~ t^p.
            let mut f1 = [0.0];
            let mut f2 = [0.0];
            inst.problem.force(0.5, &u, &mut f1);
            inst.problem.force(1.0, &u, &mut f2);
            let ratio = f2[0] / f1[0];
            let expected = 2.0f64.powi(p as i32);
            assert!((ratio - expected).abs() < 1e-12, "ratio {ratio}");
        }
    }

    #[test]
    fn example2_exact_endpoint_matches_quadrature() {
        // Independently computed with 50-digit arithmetic:
        // u(10) for alpha = 0.3.
        let inst = build("example2", 0.3, 1).unwrap();
        let exact = inst.exact.as_ref().unwrap();
        let mut u = [0.0; 3];
        exact(10.0, &mut u);
        let expected = [
            5.1824885219124178068,
            52.575399751372589334,
            300.52623149688796014,
        ];
        for i in 0..3 {
            assert!(
                (u[i] - expected[i]).abs() < 1e-12 * expected[i],
                "component {i}: {} vs {}",
                u[i],
                expected[i]
            );
        }
        exact(0.0, &mut u);
        assert_eq!(u, [1.0, 1.0, 1.0]);
        assert_eq!(inst.problem.u0(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn example2_satisfies_its_own_equation() {
        // Residual check D^alpha u_ex = P u_ex + f(t, u_ex) at interior
        // times, with the left side rebuilt from the power rule.
        let alpha = 0.3;
        let inst = build("example2", alpha, 1).unwrap();
        let exact = inst.exact.as_ref().unwrap();
        for k in 1..=20 {
            let t = 0.5 * k as f64;
            let mut u = [0.0; 3];
            exact(t, &mut u);
            let mut deriv = [0.0; 3];
            for (i, a, s) in ex2_terms(alpha) {
                deriv[i] += caputo_power_rule(alpha, a, s, t);
            }
            let mut rhs = [0.0; 3];
            inst.problem.lambda().apply(&u, &mut rhs);
            let mut f = [0.0; 3];
            inst.problem.force(t, &u, &mut f);
            for i in 0..3 {
                rhs[i] += f[i];
            }
            for i in 0..3 {
                let scale = deriv[i].abs().max(1.0);
                assert!(
                    (deriv[i] - rhs[i]).abs() < 1e-10 * scale,
                    "t = {t}, component {i}: {} vs {}",
                    deriv[i],
                    rhs[i]
                );
            }
        }
    }

    #[test]
    fn case1_is_unforced_relaxation() {
        let inst = build("case1", 0.4, 0).unwrap();
        let mut f = [1.0];
        inst.problem.force(3.0, &[2.0], &mut f);
        assert_eq!(f[0], 0.0);
        let exact = inst.exact.as_ref().unwrap();
        let mut u = [0.0];
        exact(0.0, &mut u);
        assert_eq!(u[0], 1.0);
        exact(40.0, &mut u);
        let want = mittag_leffler(0.4, -0.2 * 40.0f64.powf(0.4)).unwrap();
        assert_eq!(u[0], want);
        assert!(u[0] > 0.0 && u[0] < 1.0);
    }

    #[test]
    fn case2_manufactured_force_matches_quadrature() {
        // g(t) = f(t, 0); independently computed with 50-digit arithmetic
        // for alpha = 0.5.
        let inst = build("case2", 0.5, 1).unwrap();
        let mut g = [0.0];
        inst.problem.force(0.0, &[0.0], &mut g);
        assert!((g[0] - 1.1).abs() < 1e-14, "g(0) = {}", g[0]);
        inst.problem.force(0.5, &[0.0], &mut g);
        assert!(
            (g[0] - 3.181126284492263082).abs() < 1e-14,
            "g(0.5) = {}",
            g[0]
        );
        inst.problem.force(1.0, &[0.0], &mut g);
        assert!(
            (g[0] - 7.0322924217744254741).abs() < 1e-13,
            "g(1) = {}",
            g[0]
        );
        let exact = inst.exact.as_ref().unwrap();
        let mut u = [0.0];
        exact(1.0, &mut u);
        assert!((u[0] - 3.0833333333333333333).abs() < 1e-15);
    }

    #[test]
    fn case2_satisfies_its_own_equation() {
        let alpha = 0.7;
        let inst = build("case2", alpha, 0).unwrap();
        let exact = inst.exact.as_ref().unwrap();
        for k in 1..=20 {
            let t = k as f64 / 21.0;
            let mut u = [0.0];
            exact(t, &mut u);
            let mut deriv = 0.0;
            for (j, c) in [1.0, 0.5, 1.0 / 3.0, 0.25].iter().enumerate() {
                deriv += caputo_power_rule(alpha, *c, (j + 1) as f64, t);
            }
            let mut f = [0.0];
            inst.problem.force(t, &u, &mut f);
            let rhs = -u[0] + f[0];
            assert!(
                (deriv - rhs).abs() < 1e-10 * deriv.abs().max(1.0),
                "t = {t}: {deriv} vs {rhs}"
            );
        }
    }

    #[test]
    fn case3_has_no_exact_solution_and_oscillatory_force() {
        let inst = build("case3", 0.5, 1).unwrap();
        assert!(inst.exact.is_none());
        let mut f = [0.0];
        // At integer t the cosine is 1: f = 0.01 u (1 - u^2) + 2.
        inst.problem.force(1.0, &[1.0], &mut f);
        assert!((f[0] - 2.0).abs() < 1e-12);
        inst.problem.force(0.25, &[0.0], &mut f);
        assert!(f[0].abs() < 1e-12);
        assert_eq!(inst.default_plan.max_terms(), 3);
    }

    #[test]
    fn default_plans_track_the_scheme_degree() {
        for name in ["example2", "case2", "case3"] {
            assert!(build(name, 0.4, 0).unwrap().default_plan.is_empty());
            assert!(!build(name, 0.4, 1).unwrap().default_plan.is_empty());
        }
        // Relaxation keeps two Mittag-Leffler powers for both degrees.
        for p in [0, 1] {
            let inst = build("case1", 0.4, p).unwrap();
            assert_eq!(inst.default_plan.sigma_u(), &[0.4, 0.8]);
        }
        // Degenerate power 1 - alpha drops out at alpha = 1.
        let inst = build("case2", 1.0, 1).unwrap();
        assert_eq!(inst.default_plan.sigma_u(), &[1.0]);
    }
}
