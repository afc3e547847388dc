//! Scheme coefficients: Adams–Moulton weights, convolution kernel tables,
//! and the lagged history rows.
//!
//! The multi-step schemes split the Riemann–Liouville memory integral at the
//! current step. The *local* part yields fractional Adams–Moulton weights
//! `beta_j`; the *tail* is summed by parts, which produces a discrete
//! convolution with rows `gamma_{k,j}` built from finite differences of two
//! one-parameter kernel families
//!
//! ```text
//!   a(l) = (l^{1-α}/α) ₂F₁(α-1, 1; α+1; -1/l),   a(0) = Γ(α)Γ(2-α),
//!   b(l) = (l^{2-α}/α) ₂F₁(α-2, 1; α+1; -1/l),   b(0) = Γ(α)Γ(3-α)/2,
//! ```
//!
//! tabulated once per run by [`KernelTable`]. The `gamma` rows have a key
//! structural property: away from a fixed number of boundary columns each
//! row is a function of the lag `k - j` alone ([`stationary_gamma`]), which
//! is what makes the global system Toeplitz and the whole `O(N log N)`
//! fast path possible.
//!
//! Degree `p ∈ {0, 1}` selects piecewise-constant or piecewise-linear
//! reconstruction; at `α = 1` the memory vanishes: every `gamma` row is
//! identically zero and the `beta` weights collapse to backward Euler /
//! trapezoid, so classical one-step methods are recovered exactly.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::specfun::{gamma_fn, GaussJacobiRule};
use crate::specfun;

/// Lags at least this large evaluate the kernel hypergeometrics by power
/// series (`|z| = 1/l <= 1/32`, ~12 terms for full precision); smaller lags
/// use the Gauss–Jacobi quadrature of the Euler integral.
const SERIES_MIN_LAG: usize = 32;

/// Interpolation degrees supported by every scheme in this crate.
fn check_degree(p: usize) -> Result<()> {
    if p > 1 {
        return Err(Error::Unsupported(format!(
            "interpolation degree p = {p}; only p = 0 and p = 1 are implemented"
        )));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!(
            "fractional order must satisfy 0 < alpha <= 1 (got {alpha})"
        )));
    }
    Ok(())
}

/// Fractional Adams–Moulton weights for the implicit local term.
///
/// Degree `p = 0`: `beta_0 = 1/Γ(α+1)`. Degree `p = 1`:
/// `beta_0 = 1/Γ(α+2)`, `beta_1 = α/Γ(α+2)`. At `α = 1` these are the
/// backward-Euler and trapezoid weights.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamsMoultonCoeffs {
    alpha: f64,
    p: usize,
    beta: [f64; 2],
}

impl AdamsMoultonCoeffs {
    /// Computes the weights for order `alpha ∈ (0, 1]` and degree `p ∈ {0, 1}`.
    ///
    /// # Errors
    ///
    /// [`Error::Domain`] for `alpha` outside `(0, 1]`;
    /// [`Error::Unsupported`] for `p > 1`.
    ///
    /// # Examples
    ///
    /// ```
    /// use fide_core::coeffs::AdamsMoultonCoeffs;
    /// let c = AdamsMoultonCoeffs::new(1.0, 1).unwrap();
    /// assert!((c.beta0() - 0.5).abs() < 1e-14); // trapezoid rule
    /// assert!((c.beta1() - 0.5).abs() < 1e-14);
    /// ```
    pub fn new(alpha: f64, p: usize) -> Result<Self> {
        check_alpha(alpha)?;
        check_degree(p)?;
        let beta = match p {
            0 => [1.0 / gamma_fn(alpha + 1.0)?, 0.0],
            _ => {
                let g = gamma_fn(alpha + 2.0)?;
                [1.0 / g, alpha / g]
            }
        };
        Ok(AdamsMoultonCoeffs { alpha, p, beta })
    }

    /// Fractional order.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Interpolation degree.
    pub fn p(&self) -> usize {
        self.p
    }

    /// The weights `[beta_0, …, beta_p]`.
    pub fn beta(&self) -> &[f64] {
        &self.beta[..=self.p]
    }

    /// Weight on the *new* value `u_{k+1}`.
    pub fn beta0(&self) -> f64 {
        self.beta[0]
    }

    /// Weight on `u_k` (zero when `p = 0`).
    pub fn beta1(&self) -> f64 {
        self.beta[1]
    }
}

/// Tabulated kernel values `a(l)`, `b(l)` for lags `0..=max_lag`.
///
/// Values are dimensionless (pure functions of the lag); the step size `h`
/// is carried along for bookkeeping, since the dimensional convolution
/// weights of the underlying quadrature are `h·a(k-j)` and `h²·b(k-j)`.
/// Everything downstream (the `gamma` rows, the stability maps) uses only
/// the dimensionless values, so solvers build one table per `(alpha, N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable {
    alpha: f64,
    h: f64,
    gamma_gamma: f64,
    a_vals: Vec<f64>,
    b_vals: Vec<f64>,
    // First differences a(l+1) - a(l), b(l+1) - b(l), stored so the gamma
    // rows can difference *these* instead of the raw kernels. b(l) grows
    // like l^{2-α}; third-differencing raw values rounds each entry at
    // ε·l^{2-α} and a length-k row sum then drifts to ~ε·√k·k^{2-α},
    // which breaks the row-sum-zero invariant near k = 2000. Differences
    // of stored first differences telescope over identical f64 values, so
    // the cancellation is structural rather than numerical.
    da_vals: Vec<f64>,
    db_vals: Vec<f64>,
}

impl KernelTable {
    /// Tabulates both kernels up to `max_lag` inclusive.
    ///
    /// `rule` must be a Gauss–Jacobi rule with weight exponents
    /// `(alpha - 1, 0)` — the rule that serves `₂F₁(·, 1; α+1; z)`; build it
    /// once with [`GaussJacobiRule::new`] and reuse it across tables.
    ///
    /// # Errors
    ///
    /// * [`Error::Domain`] for invalid `alpha` or `h <= 0`.
    /// * [`Error::Shape`] if the rule's exponents don't match `alpha`.
    ///
    /// # Examples
    ///
    /// ```
    /// use fide_core::coeffs::KernelTable;
    /// use fide_core::specfun::GaussJacobiRule;
    /// let rule = GaussJacobiRule::new(20, -0.5, 0.0).unwrap(); // alpha = 0.5
    /// let table = KernelTable::new(0.5, 0.1, 64, &rule).unwrap();
    /// // a(0) = Γ(α)Γ(2-α) = π/2 for α = 1/2.
    /// assert!((table.a(0) - core::f64::consts::FRAC_PI_2).abs() < 1e-13);
    /// ```
    pub fn new(alpha: f64, h: f64, max_lag: usize, rule: &GaussJacobiRule) -> Result<Self> {
        check_alpha(alpha)?;
        if !(h > 0.0) {
            return Err(Error::Domain(format!("step size must be positive (got {h})")));
        }
        let (ea, eb) = rule.exponents();
        if math::abs(ea - (alpha - 1.0)) > 1e-12 || math::abs(eb) > 1e-12 {
            return Err(Error::Shape(format!(
                "kernel table for alpha = {alpha} needs a Gauss-Jacobi rule with \
                 exponents ({}, 0), got ({ea}, {eb})",
                alpha - 1.0
            )));
        }

        let gamma_alpha = gamma_fn(alpha)?;
        let gamma_2ma = gamma_fn(2.0 - alpha)?;
        let gamma_3ma = gamma_fn(3.0 - alpha)?;

        let mut a_vals = Vec::with_capacity(max_lag + 1);
        let mut b_vals = Vec::with_capacity(max_lag + 1);
        a_vals.push(gamma_alpha * gamma_2ma);
        b_vals.push(0.5 * gamma_alpha * gamma_3ma);

        for l in 1..=max_lag {
            let lf = l as f64;
            let z = -1.0 / lf;
            let (f_a, f_b) = if l >= SERIES_MIN_LAG {
                (
                    specfun::hyp2f1_series_b1(alpha - 1.0, alpha + 1.0, z),
                    specfun::hyp2f1_series_b1(alpha - 2.0, alpha + 1.0, z),
                )
            } else {
                (
                    specfun::hyp2f1_with_rule(alpha - 1.0, 1.0, alpha + 1.0, z, rule)?,
                    specfun::hyp2f1_with_rule(alpha - 2.0, 1.0, alpha + 1.0, z, rule)?,
                )
            };
            a_vals.push(math::powf(lf, 1.0 - alpha) / alpha * f_a);
            b_vals.push(math::powf(lf, 2.0 - alpha) / alpha * f_b);
        }

        let da_vals: Vec<f64> = a_vals.windows(2).map(|w| w[1] - w[0]).collect();
        let db_vals: Vec<f64> = b_vals.windows(2).map(|w| w[1] - w[0]).collect();

        Ok(KernelTable {
            alpha,
            h,
            gamma_gamma: gamma_alpha * gamma_2ma,
            a_vals,
            b_vals,
            da_vals,
            db_vals,
        })
    }

    /// Fractional order the table was built for.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Step size carried for bookkeeping (values themselves are lag-only).
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Largest tabulated lag.
    pub fn max_lag(&self) -> usize {
        self.a_vals.len() - 1
    }

    /// `Γ(α)Γ(2-α)`, the normalization of the history convolution (equals
    /// `a(0)`).
    pub fn gamma_gamma(&self) -> f64 {
        self.gamma_gamma
    }

    /// Kernel value `a(lag)`.
    ///
    /// # Panics
    ///
    /// Panics if `lag > max_lag`.
    #[inline]
    pub fn a(&self, lag: usize) -> f64 {
        self.a_vals[lag]
    }

    /// Kernel value `b(lag)`.
    ///
    /// # Panics
    ///
    /// Panics if `lag > max_lag`.
    #[inline]
    pub fn b(&self, lag: usize) -> f64 {
        self.b_vals[lag]
    }
}

/// One materialized history row `gamma_{k,0..=k}` for a fixed step index.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaRow {
    k: usize,
    p: usize,
    values: Vec<f64>,
}

impl GammaRow {
    /// Step index `k` of this row.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Interpolation degree.
    pub fn p(&self) -> usize {
        self.p
    }

    /// The entries `gamma_{k,0}, …, gamma_{k,k}` (length `k + 1`).
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Single history coefficient `gamma_{k,j}` for degree `p`.
///
/// The table must be deep enough (`max_lag >= k`). All entries come from
/// closed-form finite differences of `a` and `b`; there are `O(1)` distinct
/// boundary cases and a stationary interior, so each entry costs `O(1)`.
///
/// # Panics
///
/// Panics (in debug builds) on `j > k`, `p > 1`, or a too-shallow table.
pub fn gamma_entry(table: &KernelTable, p: usize, k: usize, j: usize) -> f64 {
    debug_assert!(p <= 1);
    debug_assert!(j <= k);
    debug_assert!(table.max_lag() >= k);
    if k == 0 {
        return 0.0;
    }
    let a = |l: usize| table.a(l);
    if p == 0 {
        return if j == k {
            a(1) - a(0)
        } else if j == 0 {
            a(k - 1) - a(k)
        } else {
            let m = k - j;
            a(m + 1) - 2.0 * a(m) + a(m - 1)
        };
    }
    // p = 1. Large-lag kernel differences are taken over the stored first
    // differences `da`, `db` (see the field note on `KernelTable`): e.g.
    // a(k-1) - a(k-2) is read as da(k-2), and the interior third difference
    // b(m+1) - 3b(m) + 3b(m-1) - b(m-2) as db(m) - 2db(m-1) + db(m-2).
    let da = |l: usize| table.da_vals[l];
    let db = |l: usize| table.db_vals[l];
    let w = 1.0 / (2.0 - table.alpha());
    if k == 1 {
        // Degree drops to 0 on the first step (only one interval exists).
        return if j == 0 { -da(0) } else { da(0) };
    }
    if j == k {
        return 0.5 * (a(1) - 3.0 * a(0)) + w * db(0);
    }
    if k == 2 && j == 1 {
        return a(2) - a(1) + 2.0 * a(0) - 2.0 * w * db(0);
    }
    if j == k - 1 {
        return 0.5 * (a(2) - 3.0 * a(1) + 4.0 * a(0)) + w * (db(1) - 2.0 * db(0));
    }
    if j == 0 {
        return 0.5 * (-2.0 * a(k) + da(k - 2)) + w * db(k - 2);
    }
    if j == 1 {
        return 0.5 * (2.0 * da(k - 1) + 2.0 * a(k - 2) + da(k - 3))
            + w * (-2.0 * db(k - 2) + db(k - 3));
    }
    // Interior: 2 <= j <= k - 2, stationary in the lag m = k - j.
    let m = k - j;
    0.5 * (da(m) - 2.0 * da(m - 1) + da(m - 2)) + w * (db(m) - 2.0 * db(m - 1) + db(m - 2))
}

/// Materializes the whole row `gamma_{k, 0..=k}`.
///
/// # Errors
///
/// [`Error::Unsupported`] for `p > 1`; [`Error::Shape`] if the table is too
/// shallow for row `k`.
pub fn gamma_row(table: &KernelTable, p: usize, k: usize) -> Result<GammaRow> {
    check_degree(p)?;
    if table.max_lag() < k {
        return Err(Error::Shape(format!(
            "gamma row k = {k} needs kernel lags up to {k}, but the table \
             holds only {}",
            table.max_lag()
        )));
    }
    let values = (0..=k).map(|j| gamma_entry(table, p, k, j)).collect();
    Ok(GammaRow { k, p, values })
}

/// Stationary lag value `g(l)`: the entry `gamma_{k, k-l}` once `k` is large
/// enough that boundary cases no longer interfere (`k >= l + 2` for `p = 0`,
/// `k >= l + 2` and `k >= 2` for `p = 1`). These are the Toeplitz symbol
/// coefficients of the global system and of the stability maps.
///
/// # Panics
///
/// Panics (in debug builds) if `p > 1` or the table depth is less than
/// `l + 1`.
pub fn stationary_gamma(table: &KernelTable, p: usize, lag: usize) -> f64 {
    debug_assert!(p <= 1);
    debug_assert!(table.max_lag() >= lag + 1);
    let a = |l: usize| table.a(l);
    if p == 0 {
        return if lag == 0 {
            a(1) - a(0)
        } else {
            a(lag + 1) - 2.0 * a(lag) + a(lag - 1)
        };
    }
    // Same difference-table forms as the `gamma_entry` arms they mirror, so
    // deep-row entries and stationary values agree bit for bit.
    let da = |l: usize| table.da_vals[l];
    let db = |l: usize| table.db_vals[l];
    let w = 1.0 / (2.0 - table.alpha());
    match lag {
        0 => 0.5 * (a(1) - 3.0 * a(0)) + w * db(0),
        1 => 0.5 * (a(2) - 3.0 * a(1) + 4.0 * a(0)) + w * (db(1) - 2.0 * db(0)),
        l => 0.5 * (da(l) - 2.0 * da(l - 1) + da(l - 2)) + w * (db(l) - 2.0 * db(l - 1) + db(l - 2)),
    }
}

/// Evaluates the lagged history sum
/// `H_k = (1/(Γ(α)Γ(2-α))) Σ_{j=0}^{k} gamma_{k,j} u_j`
/// for a `dim`-valued trajectory stored flat (`states[j*dim..(j+1)*dim]` is
/// `u_j`); `states` must hold at least `k + 1` states.
///
/// This is the term the schemes *subtract* each step; the reference solvers
/// fuse it into their step loop, so this standalone form mostly serves tests
/// and external reuse.
///
/// # Errors
///
/// [`Error::Domain`] for invalid `alpha`; [`Error::Shape`] on a short or
/// ragged `states` slice.
pub fn history_load(row: &GammaRow, states: &[f64], dim: usize, alpha: f64) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    if dim == 0 || states.len() % dim != 0 || states.len() / dim < row.k() + 1 {
        return Err(Error::Shape(format!(
            "history_load needs at least {} states of dimension {dim}, got \
             {} values",
            row.k() + 1,
            states.len()
        )));
    }
    let norm = 1.0 / (gamma_fn(alpha)? * gamma_fn(2.0 - alpha)?);
    let mut out = alloc::vec![0.0f64; dim];
    for (j, &g) in row.values().iter().enumerate() {
        let state = &states[j * dim..(j + 1) * dim];
        for (acc, &v) in out.iter_mut().zip(state) {
            *acc += g * v;
        }
    }
    for acc in out.iter_mut() {
        *acc *= norm;
    }
    Ok(out)
}
