//! Starting corrections for algebraically singular solutions.
//!
//! Solutions of Caputo equations generically behave like
//! `u(t) = u(0) + Σ c_i t^{σ_i} + smoother` near `t = 0` with fractional
//! exponents `σ_i`, which caps the observable order of any polynomial-based
//! multi-step scheme. The classical (Lubich-style) remedy adds a short
//! weighted sum over the first `m` steps to each discrete operator so that
//! the *corrected* operator is exact on `t^{σ}` for every power in a small
//! user-chosen set. Four operators need correcting, hence four weight
//! families, all driven by the same `m x m` power system
//! `Σ_j W_{k,j} j^{σ_r} = rhs_r(k)` (`j = 1..m`):
//!
//! * **integral-u** — the implicit Adams–Moulton quadrature applied to `u`,
//! * **integral-f** — the same quadrature applied to the forcing `f`,
//! * **history** — the lagged convolution ([`crate::coeffs::gamma_row`]),
//! * **extrapolation** — the explicit predictor `E_k f` used by IMEX.
//!
//! The power matrix depends only on the exponent list, so it is factored
//! once and reused for every row `k`; right-hand sides involve `₂F₁` and
//! incomplete-beta evaluations plus the moment sums `Σ_j γ_{k,j} j^σ`.
//! Those moment sums are the only superlinear piece; rows are summed
//! directly up to a size threshold and by FFT convolution (exploiting the
//! stationarity of `γ` plus a single boundary fix-up) beyond it, keeping
//! weight assembly `O(N log N)` overall.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::coeffs::{gamma_entry, stationary_gamma, AdamsMoultonCoeffs, KernelTable};
use crate::error::{Error, Result};
use crate::fft::{Complex64, FftDirection, FftPlan};
use crate::linalg;
use crate::math;
use crate::specfun::{self, gamma_fn, incomplete_beta, GaussJacobiRule};

/// Largest number of correction terms per family.
pub const MAX_TERMS: usize = 6;

/// History-moment rows up to this count are summed directly; larger tables
/// switch to the FFT convolution path.
const DIRECT_MOMENT_MAX: usize = 2048;

/// Lags at least this large evaluate `₂F₁` right-hand sides by power series.
const SERIES_MIN_K: usize = 32;

/// The exponent sets used to correct each discrete operator.
///
/// Empty lists are valid: an empty family contributes nothing and costs
/// nothing. Every list must be strictly increasing, positive, and at most
/// [`MAX_TERMS`] long; beyond that the Vandermonde-like power system becomes
/// numerically meaningless.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorrectionPlan {
    sigma_u: Vec<f64>,
    sigma_hist: Vec<f64>,
    delta_f: Vec<f64>,
    delta_ex: Vec<f64>,
}

impl CorrectionPlan {
    /// The empty plan: no corrections anywhere.
    pub fn none() -> Self {
        CorrectionPlan::default()
    }

    /// Builds a plan with independent exponent lists per family.
    ///
    /// # Errors
    ///
    /// [`Error::Domain`] if any list has a non-positive, non-finite,
    /// non-increasing entry or more than [`MAX_TERMS`] entries.
    pub fn new(
        sigma_u: &[f64],
        sigma_hist: &[f64],
        delta_f: &[f64],
        delta_ex: &[f64],
    ) -> Result<Self> {
        for (name, list) in [
            ("sigma_u", sigma_u),
            ("sigma_hist", sigma_hist),
            ("delta_f", delta_f),
            ("delta_ex", delta_ex),
        ] {
            validate_powers(name, list)?;
        }
        Ok(CorrectionPlan {
            sigma_u: sigma_u.to_vec(),
            sigma_hist: sigma_hist.to_vec(),
            delta_f: delta_f.to_vec(),
            delta_ex: delta_ex.to_vec(),
        })
    }

    /// The common setup: one `sigma` list for both solution-side families,
    /// one `delta` list for both forcing-side families.
    ///
    /// # Errors
    ///
    /// Same as [`CorrectionPlan::new`].
    pub fn symmetric(sigma: &[f64], delta: &[f64]) -> Result<Self> {
        CorrectionPlan::new(sigma, sigma, delta, delta)
    }

    /// `true` when every family is empty.
    pub fn is_empty(&self) -> bool {
        self.sigma_u.is_empty()
            && self.sigma_hist.is_empty()
            && self.delta_f.is_empty()
            && self.delta_ex.is_empty()
    }

    /// Largest family size; solvers iterate the first `max(max_terms, p)`
    /// steps to self-consistency because corrections make them implicit in
    /// each other.
    pub fn max_terms(&self) -> usize {
        self.sigma_u
            .len()
            .max(self.sigma_hist.len())
            .max(self.delta_f.len())
            .max(self.delta_ex.len())
    }

    /// Exponents correcting the Adams–Moulton quadrature of `u`.
    pub fn sigma_u(&self) -> &[f64] {
        &self.sigma_u
    }

    /// Exponents correcting the history convolution of `u`.
    pub fn sigma_hist(&self) -> &[f64] {
        &self.sigma_hist
    }

    /// Exponents correcting the Adams–Moulton quadrature of `f`.
    pub fn delta_f(&self) -> &[f64] {
        &self.delta_f
    }

    /// Exponents correcting the IMEX extrapolation of `f`.
    pub fn delta_ex(&self) -> &[f64] {
        &self.delta_ex
    }
}

fn validate_powers(name: &str, powers: &[f64]) -> Result<()> {
    if powers.len() > MAX_TERMS {
        return Err(Error::Domain(format!(
            "correction family {name} has {} exponents; at most {MAX_TERMS} \
             are supported",
            powers.len()
        )));
    }
    for (i, &s) in powers.iter().enumerate() {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::Domain(format!(
                "correction exponent {name}[{i}] = {s} must be positive and finite"
            )));
        }
        if i > 0 && s <= powers[i - 1] {
            return Err(Error::Domain(format!(
                "correction exponents {name} must be strictly increasing \
                 (violated at index {i})"
            )));
        }
    }
    Ok(())
}

/// A dense row-major matrix of correction weights; `row(k)` has one weight
/// per correction term (possibly zero columns).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl WeightMatrix {
    fn zero(rows: usize, cols: usize) -> Self {
        WeightMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Number of rows (one per step index `k`).
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of correction terms.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Weights `W_{k,1..m}` for row `k` (empty slice if the family is empty).
    #[inline]
    pub fn row(&self, k: usize) -> &[f64] {
        &self.data[k * self.cols..(k + 1) * self.cols]
    }

    fn row_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.data[k * self.cols..(k + 1) * self.cols]
    }
}

/// All four weight families assembled for rows `0..n_rows`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionWeights {
    integral_u: WeightMatrix,
    integral_f: WeightMatrix,
    history: WeightMatrix,
    extrapolation: WeightMatrix,
}

impl CorrectionWeights {
    /// Weights correcting the Adams–Moulton quadrature of `u`.
    pub fn integral_u(&self) -> &WeightMatrix {
        &self.integral_u
    }

    /// Weights correcting the Adams–Moulton quadrature of `f`.
    pub fn integral_f(&self) -> &WeightMatrix {
        &self.integral_f
    }

    /// Weights correcting the history convolution.
    pub fn history(&self) -> &WeightMatrix {
        &self.history
    }

    /// Weights correcting the IMEX extrapolation.
    pub fn extrapolation(&self) -> &WeightMatrix {
        &self.extrapolation
    }
}

/// Solves one power system `Σ_j w_j j^{σ_r} = rhs_r` (`j = 1..m`).
///
/// # Errors
///
/// [`Error::Domain`] on invalid powers or mismatched lengths;
/// [`Error::IllConditioned`] if the system cannot be solved to a relative
/// residual of 1e-8 or its condition number exceeds 1e12.
///
/// # Examples
///
/// ```
/// // One power: w * 1^s = rhs.
/// let w = fide_core::corrections::solve_power_system(&[0.5], &[2.0]).unwrap();
/// assert_eq!(w, vec![2.0]);
/// ```
pub fn solve_power_system(powers: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let system = PowerSystem::new(powers)?;
    system.solve(rhs)
}

/// A factored power system reused across all rows of a weight family.
struct PowerSystem {
    powers: Vec<f64>,
    /// Equilibrated LU factors (row-major m x m).
    lu: Vec<f64>,
    piv: Vec<usize>,
    /// Row scalings applied before factorization.
    scale: Vec<f64>,
}

impl PowerSystem {
    fn new(powers: &[f64]) -> Result<Self> {
        validate_powers("powers", powers)?;
        let m = powers.len();
        if m == 0 {
            return Ok(PowerSystem {
                powers: Vec::new(),
                lu: Vec::new(),
                piv: Vec::new(),
                scale: Vec::new(),
            });
        }
        // M[r][c] = (c+1)^{powers[r]}, row-equilibrated.
        let mut matrix = vec![0.0f64; m * m];
        let mut scale = vec![0.0f64; m];
        for r in 0..m {
            let mut row_max = 0.0f64;
            for c in 0..m {
                let v = math::powf((c + 1) as f64, powers[r]);
                matrix[r * m + c] = v;
                row_max = row_max.max(math::abs(v));
            }
            let s = 1.0 / row_max;
            scale[r] = s;
            for c in 0..m {
                matrix[r * m + c] *= s;
            }
        }
        let norm = linalg::inf_norm(&matrix, m);
        let mut lu = matrix;
        let piv = lu_with_context(&mut lu, m, powers)?;
        let cond = linalg::cond_inf(&lu, m, &piv, norm);
        if cond > 1e12 {
            return Err(Error::IllConditioned {
                what: format!(
                    "correction power system for exponents {}",
                    format_powers(powers)
                ),
                cond,
            });
        }
        Ok(PowerSystem {
            powers: powers.to_vec(),
            lu,
            piv,
            scale,
        })
    }

    fn len(&self) -> usize {
        self.powers.len()
    }

    fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let m = self.len();
        if rhs.len() != m {
            return Err(Error::Shape(format!(
                "power system of size {m} got a right-hand side of length {}",
                rhs.len()
            )));
        }
        if m == 0 {
            return Ok(Vec::new());
        }
        let mut x: Vec<f64> = rhs.iter().zip(&self.scale).map(|(&b, &s)| b * s).collect();
        linalg::lu_solve(&self.lu, m, &self.piv, &mut x);
        // Residual check against the *original* system.
        let mut worst = 0.0f64;
        let mut rhs_norm = 1.0f64;
        for r in 0..m {
            let mut acc = 0.0f64;
            for c in 0..m {
                acc += math::powf((c + 1) as f64, self.powers[r]) * x[c];
            }
            worst = worst.max(math::abs(acc - rhs[r]));
            rhs_norm = rhs_norm.max(math::abs(rhs[r]));
        }
        if !(worst <= 1e-8 * rhs_norm) {
            return Err(Error::IllConditioned {
                what: format!(
                    "correction power system for exponents {} (residual {worst:.3e})",
                    format_powers(&self.powers)
                ),
                cond: f64::NAN,
            });
        }
        Ok(x)
    }
}

fn lu_with_context(a: &mut [f64], n: usize, powers: &[f64]) -> Result<Vec<usize>> {
    linalg::lu_factor(a, n, "correction power matrix").map_err(|e| match e {
        Error::Singular { .. } => Error::Singular {
            what: format!(
                "correction power matrix for exponents {}",
                format_powers(powers)
            ),
        },
        other => other,
    })
}

fn format_powers(powers: &[f64]) -> String {
    let mut out = String::from("[");
    for (i, p) in powers.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&format!("{p}"));
    }
    out.push(']');
    out
}

/// Exact dimensionless Adams–Moulton target
/// `(1/Γ(α)) ∫_k^{k+1} (k+1-x)^{α-1} x^σ dx`.
fn am_exact_moment(k: usize, sigma: f64, alpha: f64, rule: &GaussJacobiRule) -> Result<f64> {
    if k == 0 {
        // Beta integral: Γ(σ+1)/Γ(σ+α+1).
        return Ok(gamma_fn(sigma + 1.0)? / gamma_fn(sigma + alpha + 1.0)?);
    }
    let kf = k as f64;
    let z = -1.0 / kf;
    let f = if k >= SERIES_MIN_K {
        specfun::hyp2f1_series_b1(-sigma, alpha + 1.0, z)
    } else {
        specfun::hyp2f1_with_rule(-sigma, 1.0, alpha + 1.0, z, rule)?
    };
    Ok(math::powf(kf, sigma) / gamma_fn(alpha + 1.0)? * f)
}

/// Dimensionless Adams–Moulton approximation `Σ_j β_j (k+1-j)^σ`.
fn am_discrete_moment(k: usize, sigma: f64, coeffs: &AdamsMoultonCoeffs) -> f64 {
    let mut acc = coeffs.beta0() * math::powf((k + 1) as f64, sigma);
    if coeffs.p() == 1 {
        acc += coeffs.beta1() * math::powf(k as f64, sigma);
    }
    acc
}

/// Row `k` of the integral-correction family for exponents `powers`
/// (shared by the `u` and `f` quadrature corrections, which differ only in
/// which exponent list they use).
fn integral_row(
    k: usize,
    powers: &[f64],
    system: &PowerSystem,
    coeffs: &AdamsMoultonCoeffs,
    alpha: f64,
    rule: &GaussJacobiRule,
) -> Result<Vec<f64>> {
    let rhs: Vec<f64> = powers
        .iter()
        .map(|&s| Ok(am_exact_moment(k, s, alpha, rule)? - am_discrete_moment(k, s, coeffs)))
        .collect::<Result<_>>()?;
    system.solve(&rhs)
}

/// Continuous dimensionless history target for `u = t^σ`:
/// `k^σ - [Γ(σ+1)/(Γ(α)Γ(σ-α+1))] (k+1)^σ B(k/(k+1); σ-α+1, α)`.
fn history_exact_moment(k: usize, sigma: f64, alpha: f64) -> Result<f64> {
    let kf = k as f64;
    let prefactor =
        gamma_fn(sigma + 1.0)? / (gamma_fn(alpha)? * gamma_fn(sigma - alpha + 1.0)?);
    let b = incomplete_beta(kf / (kf + 1.0), sigma - alpha + 1.0, alpha)?;
    Ok(math::powf(kf, sigma) - prefactor * math::powf(kf + 1.0, sigma) * b)
}

/// Row `k` of the extrapolation-correction family.
///
/// Degree 0 predicts `f_{k+1} ≈ f_k`; degree 1 predicts `2 f_k - f_{k-1}`,
/// degrading to degree 0 at `k = 0` where no second point exists. The
/// right-hand sides are the corresponding finite differences of `t^δ`.
fn extrapolation_rhs(k: usize, delta: f64, p: usize) -> f64 {
    let next = math::powf((k + 1) as f64, delta);
    let cur = math::powf(k as f64, delta);
    if p == 0 || k == 0 {
        next - cur
    } else {
        let prev = math::powf((k - 1) as f64, delta);
        next - 2.0 * cur + prev
    }
}

/// Row `k` of the quadrature-correction weights for `u` (exponents
/// `plan.sigma_u()`).
///
/// # Errors
///
/// Propagates power-system and special-function failures; see
/// [`solve_power_system`].
pub fn weights_integral_u(
    k: usize,
    plan: &CorrectionPlan,
    alpha: f64,
    p: usize,
    rule: &GaussJacobiRule,
) -> Result<Vec<f64>> {
    let coeffs = AdamsMoultonCoeffs::new(alpha, p)?;
    let system = PowerSystem::new(plan.sigma_u())?;
    integral_row(k, plan.sigma_u(), &system, &coeffs, alpha, rule)
}

/// Row `k` of the quadrature-correction weights for `f` (exponents
/// `plan.delta_f()`).
///
/// # Errors
///
/// Same as [`weights_integral_u`].
pub fn weights_integral_f(
    k: usize,
    plan: &CorrectionPlan,
    alpha: f64,
    p: usize,
    rule: &GaussJacobiRule,
) -> Result<Vec<f64>> {
    let coeffs = AdamsMoultonCoeffs::new(alpha, p)?;
    let system = PowerSystem::new(plan.delta_f())?;
    integral_row(k, plan.delta_f(), &system, &coeffs, alpha, rule)
}

/// Row `k` of the history-correction weights (exponents
/// `plan.sigma_hist()`), computed by the direct `O(k)` moment sum.
///
/// # Errors
///
/// [`Error::Shape`] if `table` is too shallow for row `k`; otherwise as
/// [`solve_power_system`].
pub fn weights_history(
    k: usize,
    plan: &CorrectionPlan,
    alpha: f64,
    p: usize,
    table: &KernelTable,
) -> Result<Vec<f64>> {
    let powers = plan.sigma_hist();
    let system = PowerSystem::new(powers)?;
    if powers.is_empty() {
        return Ok(Vec::new());
    }
    if table.max_lag() < k {
        return Err(Error::Shape(format!(
            "history weights at k = {k} need kernel lags up to {k}, table \
             holds {}",
            table.max_lag()
        )));
    }
    if k == 0 {
        return Ok(vec![0.0; powers.len()]);
    }
    let norm = 1.0 / table.gamma_gamma();
    let rhs: Vec<f64> = powers
        .iter()
        .map(|&s| {
            let mut disc = 0.0f64;
            for j in 1..=k {
                disc += gamma_entry(table, p, k, j) * math::powf(j as f64, s);
            }
            Ok(history_exact_moment(k, s, alpha)? - norm * disc)
        })
        .collect::<Result<_>>()?;
    system.solve(&rhs)
}

/// Row `k` of the extrapolation-correction weights (exponents
/// `plan.delta_ex()`).
///
/// # Errors
///
/// As [`solve_power_system`].
pub fn weights_extrapolation(k: usize, plan: &CorrectionPlan, p: usize) -> Result<Vec<f64>> {
    let powers = plan.delta_ex();
    let system = PowerSystem::new(powers)?;
    let rhs: Vec<f64> = powers.iter().map(|&d| extrapolation_rhs(k, d, p)).collect();
    system.solve(&rhs)
}

/// Assembles all four weight families for rows `0..n_rows`.
///
/// This is the batch entry point the solvers use: power systems are factored
/// once per family, `₂F₁` right-hand sides switch to series at large `k`,
/// and history moment sums switch from direct `O(N²)` to FFT convolution
/// beyond 2048 rows.
///
/// # Errors
///
/// * [`Error::Shape`] if `table.max_lag() < n_rows` while the history family
///   is non-empty.
/// * Power-system errors as in [`solve_power_system`].
pub fn correction_weights(
    plan: &CorrectionPlan,
    alpha: f64,
    p: usize,
    n_rows: usize,
    table: &KernelTable,
    rule: &GaussJacobiRule,
) -> Result<CorrectionWeights> {
    let coeffs = AdamsMoultonCoeffs::new(alpha, p)?;

    // --- integral families -------------------------------------------------
    let integral_u = assemble_integral(plan.sigma_u(), n_rows, &coeffs, alpha, rule)?;
    let integral_f = assemble_integral(plan.delta_f(), n_rows, &coeffs, alpha, rule)?;

    // --- extrapolation family ----------------------------------------------
    let ex_powers = plan.delta_ex();
    let ex_system = PowerSystem::new(ex_powers)?;
    let mut extrapolation = WeightMatrix::zero(n_rows, ex_powers.len());
    if !ex_powers.is_empty() {
        for k in 0..n_rows {
            let rhs: Vec<f64> = ex_powers.iter().map(|&d| extrapolation_rhs(k, d, p)).collect();
            extrapolation.row_mut(k).copy_from_slice(&ex_system.solve(&rhs)?);
        }
    }

    // --- history family ----------------------------------------------------
    let history = assemble_history(plan.sigma_hist(), n_rows, alpha, p, table)?;

    Ok(CorrectionWeights {
        integral_u,
        integral_f,
        history,
        extrapolation,
    })
}

fn assemble_integral(
    powers: &[f64],
    n_rows: usize,
    coeffs: &AdamsMoultonCoeffs,
    alpha: f64,
    rule: &GaussJacobiRule,
) -> Result<WeightMatrix> {
    let system = PowerSystem::new(powers)?;
    let mut out = WeightMatrix::zero(n_rows, powers.len());
    if powers.is_empty() {
        return Ok(out);
    }
    for k in 0..n_rows {
        let row = integral_row(k, powers, &system, coeffs, alpha, rule)?;
        out.row_mut(k).copy_from_slice(&row);
    }
    Ok(out)
}

fn assemble_history(
    powers: &[f64],
    n_rows: usize,
    alpha: f64,
    p: usize,
    table: &KernelTable,
) -> Result<WeightMatrix> {
    let system = PowerSystem::new(powers)?;
    let m = powers.len();
    let mut out = WeightMatrix::zero(n_rows, m);
    if m == 0 || n_rows == 0 {
        return Ok(out);
    }
    // Stationary lag l reaches one kernel entry past itself, so both moment
    // paths are safe when the table holds lags through n_rows.
    if table.max_lag() < n_rows {
        return Err(Error::Shape(format!(
            "history weights for {n_rows} rows need kernel lags up to \
             {n_rows}, table holds {}",
            table.max_lag()
        )));
    }
    let norm = 1.0 / table.gamma_gamma();

    // Discrete moment sums s_r(k) = Σ_j gamma_{k,j} j^{σ_r} for k < n_rows.
    let moments: Vec<Vec<f64>> = if n_rows <= DIRECT_MOMENT_MAX {
        direct_moments(powers, n_rows, p, table)
    } else {
        convolution_moments(powers, n_rows, p, table)
    };

    for k in 1..n_rows {
        let rhs: Vec<f64> = powers
            .iter()
            .enumerate()
            .map(|(r, &s)| Ok(history_exact_moment(k, s, alpha)? - norm * moments[r][k]))
            .collect::<Result<_>>()?;
        out.row_mut(k).copy_from_slice(&system.solve(&rhs)?);
    }
    Ok(out)
}

/// `s_r(k)` by direct summation; `O(n² m)` with `O(n m)` power evaluations.
fn direct_moments(
    powers: &[f64],
    n_rows: usize,
    p: usize,
    table: &KernelTable,
) -> Vec<Vec<f64>> {
    let pow_tables: Vec<Vec<f64>> = powers
        .iter()
        .map(|&s| (0..n_rows).map(|j| math::powf(j as f64, s)).collect())
        .collect();
    powers
        .iter()
        .enumerate()
        .map(|(r, _)| {
            let mut s = vec![0.0f64; n_rows];
            for (k, sk) in s.iter_mut().enumerate().skip(1) {
                let mut acc = 0.0f64;
                for j in 1..=k {
                    acc += gamma_entry(table, p, k, j) * pow_tables[r][j];
                }
                *sk = acc;
            }
            s
        })
        .collect()
}

/// `s_r(k)` by FFT convolution against the stationary lag values, with the
/// (single, `p = 1` only) boundary column `j = 1` fixed up exactly.
fn convolution_moments(
    powers: &[f64],
    n_rows: usize,
    p: usize,
    table: &KernelTable,
) -> Vec<Vec<f64>> {
    let n = n_rows;
    let g: Vec<f64> = (0..n).map(|l| stationary_gamma(table, p, l)).collect();

    let conv_len = (2 * n - 1).next_power_of_two();
    let plan = FftPlan::new(conv_len);
    let mut g_spec = vec![Complex64::new(0.0, 0.0); conv_len];
    for (slot, &v) in g_spec.iter_mut().zip(&g) {
        *slot = Complex64::new(v, 0.0);
    }
    plan.process(&mut g_spec, FftDirection::Forward);

    powers
        .iter()
        .map(|&s| {
            let mut buf = vec![Complex64::new(0.0, 0.0); conv_len];
            for (j, slot) in buf.iter_mut().enumerate().take(n) {
                *slot = Complex64::new(math::powf(j as f64, s), 0.0);
            }
            plan.process(&mut buf, FftDirection::Forward);
            for (b, gs) in buf.iter_mut().zip(&g_spec) {
                *b *= *gs;
            }
            plan.process(&mut buf, FftDirection::Inverse);
            let mut out = vec![0.0f64; n];
            for k in 1..n {
                let mut v = buf[k].re;
                if p == 1 {
                    // Only the j = 1 column deviates from stationarity with
                    // a nonzero power weight (j = 0 is killed by 0^σ = 0).
                    v += gamma_entry(table, p, k, 1) - g[k - 1];
                }
                out[k] = v;
            }
            out
        })
        .collect()
}
