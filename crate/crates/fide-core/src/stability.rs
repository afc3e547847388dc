//! Linear-stability regions of the history-form multi-step schemes.
//!
//! # Model problem
//!
//! Apply the degree-`p` scheme to the scalar test equation
//!
//! ```text
//! D^α u = λ u + f(u),      f(u) = κ λ u,
//! ```
//!
//! with the linear part `λ u` implicit and `f` on the explicit
//! (extrapolated) leg, so `κ` measures how much of the total stiffness the
//! splitting pushes onto the explicit side (`κ = 0` is the fully implicit
//! method). With `ĥ = h^α λ` the recursion has constant coefficients once
//! the history row settles into its stationary tail; substituting the
//! growth mode `u_k = ζ^k` and writing `ξ = 1/ζ` gives the boundary-locus
//! maps
//!
//! ```text
//! p = 0:  ĥ(ξ) = Γ(α+1) (1 - ξ + γ(ξ) ξ / (Γ(α)Γ(2-α))) / (1 + κξ)
//! p = 1:  ĥ(ξ) = Γ(α+2) (1 - ξ + γ(ξ) ξ / (Γ(α)Γ(2-α)))
//!                 / ((1+κ)(αξ + 1) - κ (ξ - 1)²)
//! ```
//!
//! where `γ(ξ) = Σ_l γ_{k,k-l} ξ^l` is the lag generating function of a
//! deep history row (`k = k_trunc`). Modes of unit modulus are `|ξ| = 1`,
//! so the image of the unit circle is the region boundary. Because every
//! history row sums to zero, `γ(1) = 0` and the locus always passes
//! through the origin — `λ = 0` is neutral for every order.
//!
//! # Sampling `γ` on the unit circle
//!
//! On the `n`-th roots of unity `ξ_m = e^{2πim/n}` the power `ξ_m^l`
//! depends only on `l mod n`, so the `k_trunc + 1` row coefficients are
//! folded into `n` bins and transformed once; `γ(ξ_m)` is the forward-FFT
//! output at index `(n - m) mod n` (the forward kernel carries
//! `e^{-2πi}`). Total cost `O(k_trunc + n log n)`.
//!
//! # Classification
//!
//! For a query `ĥ` off the curve, the argument principle applied to
//! `ĥ(ξ) - ĥ` on the unit disk gives `winding = Z - P`, where `Z` counts
//! characteristic roots `ξ` strictly inside the disk — equivalently growth
//! factors `ζ = 1/ξ` *outside* — and `P` counts poles of the map inside
//! the disk. The scheme is stable at `ĥ` exactly when `Z = 0`, i.e. when
//! the winding number of the sampled locus about `ĥ` equals `-P`. The
//! poles are explicit: `ξ = -1/κ` for `p = 0` (inside iff `|κ| > 1`), and
//! for `p = 1` the roots of `κξ² - ((1+κ)α + 2κ)ξ - 1 = 0` (for `κ = 0`
//! the single root `-1/α`).
//!
//! Queries within [`ON_BOUNDARY_TOL`] of the sampled curve report
//! [`Classification::OnBoundary`]. When the locus self-intersects, or a
//! pole sits within roundoff of the unit circle (the locus is then
//! unbounded — e.g. `p = 1`, `κ = 0`, `α = 1`, whose trapezoidal-rule
//! limit sends `ξ = -1` to infinity), the winding count is unreliable and
//! [`is_stable`] falls back to [`classify_by_simulation`]: march the
//! actual scheme on the test equation and threshold the trajectory
//! (bounded by `10 |u_0|` → stable, beyond `1000 |u_0|` → unstable, in
//! between → on the boundary).

use alloc::vec;
use alloc::vec::Vec;

use crate::coeffs::{gamma_entry, stationary_gamma, AdamsMoultonCoeffs, KernelTable};
use crate::error::{Error, Result};
use crate::fft::{Complex64, FftDirection, FftPlan};
use crate::math;
use crate::specfun::{gamma_fn, GaussJacobiRule};

/// Absolute distance to the sampled locus below which a query point is
/// classified [`Classification::OnBoundary`] rather than by winding.
pub const ON_BOUNDARY_TOL: f64 = 1e-9;

/// A pole of the boundary map within this distance of the unit circle
/// makes the locus (numerically) unbounded; classification then falls
/// back to simulation.
const POLE_CIRCLE_TOL: f64 = 1e-9;

/// Truncation row for the lag generating function when not overridden.
const DEFAULT_K_TRUNC: usize = 100_000;

/// Unit-circle sample count when not overridden.
const DEFAULT_N_SAMPLES: usize = 1024;

/// Steps marched by [`classify_by_simulation`].
const SIM_STEPS: usize = 10_000;

/// Trajectory bound (relative to `|u_0|`) below which a simulated run
/// counts as stable.
const SIM_STABLE_FACTOR: f64 = 10.0;

/// Trajectory bound (relative to `|u_0|`) beyond which a simulated run
/// counts as unstable.
const SIM_UNSTABLE_FACTOR: f64 = 1e3;

/// Quadrature size for the kernel tables built internally.
const QUAD_POINTS: usize = 24;

/// Which scheme/test-equation combination to analyse.
///
/// `kappa` is the ratio between the explicitly treated force and the
/// implicit linear part (`f = κ λ u`); `k_trunc` and `n_samples` control
/// the lag truncation and the unit-circle resolution of the locus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityQuery {
    /// Fractional order `α ∈ (0, 1]`.
    pub alpha: f64,
    /// Interpolation degree of the scheme (`0` or `1`).
    pub p: usize,
    /// Explicit-to-implicit stiffness ratio of the test equation.
    pub kappa: f64,
    /// History row used to truncate the lag generating function.
    pub k_trunc: usize,
    /// Number of unit-circle samples of the locus.
    pub n_samples: usize,
}

impl StabilityQuery {
    /// Query with default resolution (`k_trunc = 100 000`,
    /// `n_samples = 1024`).
    pub fn new(alpha: f64, p: usize, kappa: f64) -> Self {
        StabilityQuery {
            alpha,
            p,
            kappa,
            k_trunc: DEFAULT_K_TRUNC,
            n_samples: DEFAULT_N_SAMPLES,
        }
    }

    /// Checks the parameter ranges.
    ///
    /// # Errors
    ///
    /// [`Error::Domain`] for `α ∉ (0, 1]`, non-finite `κ`, `k_trunc = 0`,
    /// or fewer than 16 circle samples; [`Error::Unsupported`] for `p > 1`.
    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() || self.alpha <= 0.0 || self.alpha > 1.0 {
            return Err(Error::Domain(alloc::format!(
                "fractional order must lie in (0, 1] (got {})",
                self.alpha
            )));
        }
        if self.p > 1 {
            return Err(Error::Unsupported(alloc::format!(
                "interpolation degree p = {} (only 0 and 1 are implemented)",
                self.p
            )));
        }
        if !self.kappa.is_finite() {
            return Err(Error::Domain(alloc::format!(
                "stiffness ratio kappa must be finite (got {})",
                self.kappa
            )));
        }
        if self.k_trunc == 0 || self.n_samples < 16 {
            return Err(Error::Domain(alloc::format!(
                "resolution too coarse: k_trunc = {} (need >= 1), n_samples = {} (need >= 16)",
                self.k_trunc,
                self.n_samples
            )));
        }
        Ok(())
    }
}

/// Verdict of a stability classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    /// The locus winds `-P` times around the query: no unstable mode.
    Stable,
    /// At least one characteristic root grows.
    Unstable,
    /// Within [`ON_BOUNDARY_TOL`] of the sampled boundary, or (under the
    /// simulation fallback) between the stable and unstable thresholds.
    OnBoundary,
}

/// The sampled region boundary `ĥ(ξ_m)` together with the pole census and
/// geometry flags that [`is_stable`] needs.
#[derive(Debug, Clone)]
pub struct BoundaryLocus {
    query: StabilityQuery,
    h_hat: Vec<Complex64>,
    poles_inside: usize,
    self_intersecting: bool,
    degenerate: bool,
}

impl BoundaryLocus {
    /// The query this locus was built for.
    pub fn query(&self) -> &StabilityQuery {
        &self.query
    }

    /// Boundary samples `ĥ(ξ_m)`, `m = 0 .. n_samples`.
    pub fn h_hat(&self) -> &[Complex64] {
        &self.h_hat
    }

    /// Number of samples (equals `query.n_samples`).
    pub fn n_samples(&self) -> usize {
        self.h_hat.len()
    }

    /// Circle angle of sample `m`: `θ_m = 2πm / n`.
    pub fn theta(&self, m: usize) -> f64 {
        2.0 * core::f64::consts::PI * m as f64 / self.h_hat.len() as f64
    }

    /// Poles of the boundary map strictly inside the unit disk; the
    /// stable winding number is the negative of this.
    pub fn poles_inside(&self) -> usize {
        self.poles_inside
    }

    /// Whether two non-adjacent locus segments cross. Winding is then
    /// considered unreliable and classification simulates instead.
    pub fn is_self_intersecting(&self) -> bool {
        self.self_intersecting
    }

    /// Whether the map degenerates (non-finite samples, or a pole within
    /// roundoff of the unit circle). Classification simulates instead.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }
}

/// Samples the stability-region boundary on the unit circle.
///
/// Builds the history row at `k_trunc`, folds its lags modulo `n_samples`,
/// applies one FFT to evaluate the generating function at all `n`-th roots
/// of unity, and maps each sample through the degree-`p` boundary formula.
/// Non-finite samples are kept (flagged via [`BoundaryLocus::is_degenerate`])
/// so callers can still plot the finite part of an unbounded locus.
///
/// # Errors
///
/// Propagates parameter validation and special-function failures.
///
/// # Examples
///
/// At `α = 1`, degree 0, `κ = 0` the history weights vanish and the locus
/// degenerates to the classical circle `|ĥ - 1| = 1` of the implicit Euler
/// method:
///
/// ```
/// use fide_core::stability::{boundary_locus, StabilityQuery};
///
/// let mut q = StabilityQuery::new(1.0, 0, 0.0);
/// q.k_trunc = 512;
/// q.n_samples = 64;
/// let locus = boundary_locus(&q).unwrap();
/// for v in locus.h_hat() {
///     let r = ((v.re - 1.0).powi(2) + v.im.powi(2)).sqrt();
///     assert!((r - 1.0).abs() < 1e-12);
/// }
/// ```
pub fn boundary_locus(query: &StabilityQuery) -> Result<BoundaryLocus> {
    query.validate()?;
    let alpha = query.alpha;
    let p = query.p;
    let kappa = query.kappa;
    let k = query.k_trunc;
    let n = query.n_samples;

    let rule = GaussJacobiRule::new(QUAD_POINTS, alpha - 1.0, 0.0)?;
    let table = KernelTable::new(alpha, 1.0, k, &rule)?;
    let gg = table.gamma_gamma();

    // Fold the row at k_trunc into n bins: bin r collects all lags
    // l ≡ r (mod n), since ξ^l = ξ^(l mod n) on the sample points.
    let mut bins = vec![Complex64::new(0.0, 0.0); n];
    for l in 0..=k {
        bins[l % n].re += gamma_entry(&table, p, k, k - l);
    }
    // Every history row sums to zero identically, but the fold accumulates
    // the roundoff of ~k third differences of kernel values as large as
    // k^{2-α} (≈1e-6 at the default truncation for p = 1). Re-impose the
    // zero-sum moment condition on bin 0, which pins γ(1) — and thus the
    // ξ = 1 locus sample — to the origin exactly.
    let defect: f64 = bins.iter().map(|b| b.re).sum();
    bins[0].re -= defect;
    let plan = FftPlan::new(n);
    plan.process(&mut bins, FftDirection::Forward);

    let gain = gamma_fn(alpha + 1.0 + p as f64)?;
    let mut h_hat = Vec::with_capacity(n);
    let mut finite = true;
    for m in 0..n {
        let theta = 2.0 * core::f64::consts::PI * m as f64 / n as f64;
        let xi = Complex64::new(math::cos(theta), math::sin(theta));
        // Forward FFT uses e^{-2πi}; the generating function wants e^{+2πi}.
        let g_xi = bins[(n - m) % n];
        let num = Complex64::new(1.0, 0.0) - xi + g_xi * xi / gg;
        let den = if p == 0 {
            Complex64::new(1.0, 0.0) + xi * kappa
        } else {
            let shift = xi - 1.0;
            (xi * alpha + 1.0) * (1.0 + kappa) - shift * shift * kappa
        };
        let v = num * gain / den;
        finite &= v.re.is_finite() && v.im.is_finite();
        h_hat.push(v);
    }

    let (poles_inside, pole_near_circle) = count_poles_inside(p, alpha, kappa);
    let self_intersecting = finite && locus_self_intersects(&h_hat);
    Ok(BoundaryLocus {
        query: *query,
        h_hat,
        poles_inside,
        self_intersecting,
        degenerate: pole_near_circle || !finite,
    })
}

/// Classifies a point of the `ĥ = h^α λ` plane against a sampled locus.
///
/// Uses the winding-number criterion (see the module docs); falls back to
/// [`classify_by_simulation`] when the locus self-intersects or is
/// degenerate, which is why the locus — not just the query — is required.
///
/// # Errors
///
/// [`Error::Domain`] for a non-finite query point; simulation-fallback
/// failures propagate.
///
/// # Examples
///
/// ```
/// use fide_core::fft::Complex64;
/// use fide_core::stability::{boundary_locus, is_stable, Classification, StabilityQuery};
///
/// let mut q = StabilityQuery::new(1.0, 0, 0.0);
/// q.k_trunc = 512;
/// q.n_samples = 64;
/// let locus = boundary_locus(&q).unwrap();
/// // Implicit Euler: stable outside the circle |ĥ - 1| = 1.
/// let inside = Complex64::new(0.5, 0.0);
/// let outside = Complex64::new(-1.0, 0.0);
/// assert_eq!(is_stable(&locus, outside).unwrap(), Classification::Stable);
/// assert_eq!(is_stable(&locus, inside).unwrap(), Classification::Unstable);
/// ```
pub fn is_stable(locus: &BoundaryLocus, h_hat: Complex64) -> Result<Classification> {
    if !h_hat.re.is_finite() || !h_hat.im.is_finite() {
        return Err(Error::Domain(alloc::format!(
            "query point must be finite (got {h_hat})"
        )));
    }
    if locus.degenerate || locus.self_intersecting {
        return classify_by_simulation(&locus.query, h_hat);
    }
    if polyline_distance(&locus.h_hat, h_hat) <= ON_BOUNDARY_TOL {
        return Ok(Classification::OnBoundary);
    }
    let w = winding_number(&locus.h_hat, h_hat);
    Ok(if w == -(locus.poles_inside as i64) {
        Classification::Stable
    } else {
        Classification::Unstable
    })
}

/// Classifies by marching the scheme itself on the test equation.
///
/// Runs the degree-`p` step recursion with `h^α λ = ĥ` and the explicit
/// force `f = κ λ u` for 10 000 steps from `u_0 = 1` and thresholds the
/// trajectory: bounded by `10` → [`Classification::Stable`], beyond `10³`
/// (or non-finite, or an exactly singular implicit factor) →
/// [`Classification::Unstable`], in between → [`Classification::OnBoundary`].
/// This is the fallback for loci the winding criterion cannot handle, and
/// an independent cross-check for those it can.
///
/// # Errors
///
/// Parameter validation and kernel-table failures propagate.
pub fn classify_by_simulation(query: &StabilityQuery, h_hat: Complex64) -> Result<Classification> {
    query.validate()?;
    if !h_hat.re.is_finite() || !h_hat.im.is_finite() {
        return Err(Error::Domain(alloc::format!(
            "query point must be finite (got {h_hat})"
        )));
    }
    let alpha = query.alpha;
    let p = query.p;
    let coeffs = AdamsMoultonCoeffs::new(alpha, p)?;
    let beta0 = coeffs.beta0();
    let beta1 = if p == 1 { coeffs.beta1() } else { 0.0 };
    // γ ≡ 0 exactly at α = 1 (matching the steppers, which drop the
    // tabulated roundoff there); the march is then O(N).
    let history_active = alpha < 1.0;
    let (g, gam0, dev1, norm) = if history_active {
        let rule = GaussJacobiRule::new(QUAD_POINTS, alpha - 1.0, 0.0)?;
        let table = KernelTable::new(alpha, 1.0, SIM_STEPS, &rule)?;
        let (g, gam0, dev1) = history_split(&table, p, SIM_STEPS);
        (g, gam0, dev1, 1.0 / table.gamma_gamma())
    } else {
        (Vec::new(), Vec::new(), Vec::new(), 0.0)
    };

    let denom = Complex64::new(1.0, 0.0) - h_hat * beta0;
    if !(denom.norm_sqr() > 0.0) {
        // The implicit factor is singular: infinite amplification.
        return Ok(Classification::Unstable);
    }
    let inv_denom = Complex64::new(1.0, 0.0) / denom;
    let kap_h = h_hat * query.kappa;

    let mut u = vec![Complex64::new(0.0, 0.0); SIM_STEPS + 1];
    u[0] = Complex64::new(1.0, 0.0);
    let mut sup2 = 1.0f64;
    let unstable2 = SIM_UNSTABLE_FACTOR * SIM_UNSTABLE_FACTOR;
    for k in 0..SIM_STEPS {
        let mut hist = Complex64::new(0.0, 0.0);
        if history_active && k >= 1 {
            // Stationary tail plus the u_0 / u_1 boundary deviations; see
            // `history_split`.
            let mut acc = Complex64::new(0.0, 0.0);
            for (m, &w) in g[..k].iter().enumerate() {
                acc += u[k - m] * w;
            }
            acc += u[0] * gam0[k];
            if p == 1 {
                acc += u[1] * dev1[k];
            }
            hist = acc * norm;
        }
        let ext = if p == 1 && k >= 1 {
            u[k] * 2.0 - u[k - 1]
        } else {
            u[k]
        };
        let mut rhs = u[k] - hist + kap_h * (ext * beta0);
        if p == 1 {
            rhs += h_hat * (u[k] * beta1) + kap_h * (u[k] * beta1);
        }
        let next = rhs * inv_denom;
        if !next.re.is_finite() || !next.im.is_finite() {
            return Ok(Classification::Unstable);
        }
        let n2 = next.norm_sqr();
        if n2 > sup2 {
            sup2 = n2;
            if sup2 > unstable2 {
                return Ok(Classification::Unstable);
            }
        }
        u[k + 1] = next;
    }
    Ok(
        if sup2 <= SIM_STABLE_FACTOR * SIM_STABLE_FACTOR {
            Classification::Stable
        } else {
            Classification::OnBoundary
        },
    )
}

/// Splits the history rows `0..steps` into a stationary tail plus rank-2
/// boundary deviations:
///
/// ```text
/// Σ_{j=0}^{k} γ_{k,j} u_j = Σ_{m=0}^{k-1} g(m) u_{k-m}
///                           + γ_{k,0} u_0 + (γ_{k,1} - g(k-1)) u_1,
/// ```
///
/// where the `u_1` term only deviates for `p = 1` (for `p = 0` the `j = 1`
/// entry is already stationary). Row `k = 0` is empty. This turns the
/// per-step history sum into a plain dot product with `g`.
fn history_split(table: &KernelTable, p: usize, steps: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut g = vec![0.0f64; steps];
    for (m, v) in g.iter_mut().enumerate() {
        *v = stationary_gamma(table, p, m);
    }
    let mut gam0 = vec![0.0f64; steps];
    let mut dev1 = vec![0.0f64; steps];
    for k in 1..steps {
        gam0[k] = gamma_entry(table, p, k, 0);
        if p == 1 {
            dev1[k] = gamma_entry(table, p, k, 1) - g[k - 1];
        }
    }
    (g, gam0, dev1)
}

/// Counts the poles of the boundary map strictly inside the unit disk and
/// reports whether any pole sits within [`POLE_CIRCLE_TOL`] of the circle.
fn count_poles_inside(p: usize, alpha: f64, kappa: f64) -> (usize, bool) {
    if p == 0 {
        if kappa == 0.0 {
            return (0, false);
        }
        // 1 + κξ = 0  ⇒  ξ = -1/κ.
        let r = 1.0 / math::abs(kappa);
        if math::abs(r - 1.0) <= POLE_CIRCLE_TOL {
            return (0, true);
        }
        return (usize::from(r < 1.0), false);
    }
    if kappa == 0.0 {
        // αξ + 1 = 0  ⇒  ξ = -1/α, never inside for α ≤ 1.
        let r = 1.0 / alpha;
        return (0, math::abs(r - 1.0) <= POLE_CIRCLE_TOL);
    }
    // κξ² - ((1+κ)α + 2κ)ξ - 1 = 0.
    let b = (1.0 + kappa) * alpha + 2.0 * kappa;
    let disc = b * b + 4.0 * kappa;
    let moduli = if disc >= 0.0 {
        let s = math::sqrt(disc);
        [
            math::abs((b + s) / (2.0 * kappa)),
            math::abs((b - s) / (2.0 * kappa)),
        ]
    } else {
        // Conjugate pair; |ξ|² equals the root product |(-1)/κ| = -1/κ
        // (disc < 0 forces κ < 0).
        let m = math::sqrt(-1.0 / kappa);
        [m, m]
    };
    let mut inside = 0;
    let mut near = false;
    for m in moduli {
        if math::abs(m - 1.0) <= POLE_CIRCLE_TOL {
            near = true;
        } else if m < 1.0 {
            inside += 1;
        }
    }
    (inside, near)
}

/// Winding number of the closed sampled curve about `q`, by summing the
/// turn angles of consecutive rays. Callers must keep `q` off the curve.
fn winding_number(points: &[Complex64], q: Complex64) -> i64 {
    let n = points.len();
    let mut total = 0.0f64;
    for m in 0..n {
        let a = points[m] - q;
        let b = points[(m + 1) % n] - q;
        let cross = a.re * b.im - a.im * b.re;
        let dot = a.re * b.re + a.im * b.im;
        total += math::atan2(cross, dot);
    }
    let turns = total / (2.0 * core::f64::consts::PI);
    math::floor(turns + 0.5) as i64
}

/// Minimum distance from `q` to the closed polyline through `points`.
fn polyline_distance(points: &[Complex64], q: Complex64) -> f64 {
    let n = points.len();
    let mut best = f64::INFINITY;
    for m in 0..n {
        let a = points[m];
        let b = points[(m + 1) % n];
        let ab = b - a;
        let aq = q - a;
        let len2 = ab.norm_sqr();
        let t = if len2 > 0.0 {
            ((aq.re * ab.re + aq.im * ab.im) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let closest = a + ab * t;
        let d = math::hypot(q.re - closest.re, q.im - closest.im);
        if d < best {
            best = d;
        }
    }
    best
}

/// Signed area of the triangle `(o, a, b)` (doubled); its sign gives the
/// turn orientation.
fn orient(o: Complex64, a: Complex64, b: Complex64) -> f64 {
    (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re)
}

/// Whether any two non-adjacent segments of the closed polyline properly
/// cross. Touching endpoints and collinear overlaps do not count; queries
/// that close to the curve are caught by the boundary tolerance instead.
fn locus_self_intersects(points: &[Complex64]) -> bool {
    let n = points.len();
    for i in 0..n {
        let a1 = points[i];
        let a2 = points[(i + 1) % n];
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue; // wrap-around neighbours share a vertex
            }
            let b1 = points[j];
            let b2 = points[(j + 1) % n];
            if orient(a1, a2, b1) * orient(a1, a2, b2) < 0.0
                && orient(b1, b2, a1) * orient(b1, b2, a2) < 0.0
            {
                return true;
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_query(alpha: f64, p: usize, kappa: f64, k_trunc: usize, n: usize) -> StabilityQuery {
        let mut q = StabilityQuery::new(alpha, p, kappa);
        q.k_trunc = k_trunc;
        q.n_samples = n;
        q
    }

    #[test]
    fn query_defaults_and_validation() {
        let q = StabilityQuery::new(0.5, 1, 0.3);
        assert_eq!(q.k_trunc, 100_000);
        assert_eq!(q.n_samples, 1024);
        assert!(q.validate().is_ok());

        assert!(StabilityQuery::new(0.0, 0, 0.0).validate().is_err());
        assert!(StabilityQuery::new(1.2, 0, 0.0).validate().is_err());
        assert!(StabilityQuery::new(f64::NAN, 0, 0.0).validate().is_err());
        assert!(StabilityQuery::new(0.5, 2, 0.0).validate().is_err());
        assert!(StabilityQuery::new(0.5, 0, f64::INFINITY).validate().is_err());
        assert!(quick_query(0.5, 0, 0.0, 0, 64).validate().is_err());
        assert!(quick_query(0.5, 0, 0.0, 1000, 8).validate().is_err());
        assert!(quick_query(0.5, 0, 0.0, 1, 16).validate().is_ok());
    }

    #[test]
    fn folded_gamma_matches_direct_series() {
        // Tiny truncation so the generating function can be evaluated by
        // direct Horner summation; pins the fold + FFT indexing.
        let k = 500;
        let n = 16;
        let q = quick_query(0.35, 1, 0.7, k, n);
        let locus = boundary_locus(&q).unwrap();

        let rule = GaussJacobiRule::new(QUAD_POINTS, q.alpha - 1.0, 0.0).unwrap();
        let table = KernelTable::new(q.alpha, 1.0, k, &rule).unwrap();
        let gg = table.gamma_gamma();
        let gain = gamma_fn(q.alpha + 2.0).unwrap();
        // Lag coefficients with the same zero-sum repair the locus applies.
        let mut c: Vec<f64> = (0..=k).map(|l| gamma_entry(&table, 1, k, k - l)).collect();
        let defect: f64 = c.iter().sum();
        c[0] -= defect;
        for m in 0..n {
            let theta = 2.0 * core::f64::consts::PI * m as f64 / n as f64;
            let xi = Complex64::new(theta.cos(), theta.sin());
            let mut g_xi = Complex64::new(0.0, 0.0);
            for &cl in c.iter().rev() {
                g_xi = g_xi * xi + cl;
            }
            let num = Complex64::new(1.0, 0.0) - xi + g_xi * xi / gg;
            let shift = xi - 1.0;
            let den = (xi * q.alpha + 1.0) * (1.0 + q.kappa) - shift * shift * q.kappa;
            let want = num * gain / den;
            let got = locus.h_hat()[m];
            assert!(
                (got - want).norm_sqr().sqrt() < 1e-12,
                "sample {m}: got {got}, want {want}"
            );
        }
    }

    #[test]
    fn locus_starts_at_the_origin() {
        // Row sums vanish, so ξ = 1 (sample 0) must map to ĥ = 0.
        for p in [0usize, 1] {
            let q = quick_query(0.5, p, 0.4, 20_000, 256);
            let locus = boundary_locus(&q).unwrap();
            let h0 = locus.h_hat()[0];
            assert!(
                h0.norm_sqr().sqrt() < 1e-10,
                "p = {p}: locus misses the origin by {h0}"
            );
        }
    }

    #[test]
    fn degree_zero_alpha_one_is_the_classical_circle() {
        // γ ≡ 0 at α = 1 up to kernel roundoff, so the degree-0 map
        // degenerates to ĥ = 1 - ξ: the implicit Euler circle.
        let q = quick_query(1.0, 0, 0.0, 4096, 128);
        let locus = boundary_locus(&q).unwrap();
        assert_eq!(locus.poles_inside(), 0);
        assert!(!locus.is_degenerate());
        assert!(!locus.is_self_intersecting());
        for (m, v) in locus.h_hat().iter().enumerate() {
            let theta = locus.theta(m);
            let want = Complex64::new(1.0 - theta.cos(), -theta.sin());
            assert!(
                (v - want).norm_sqr().sqrt() < 1e-12,
                "sample {m}: got {v}, want {want}"
            );
        }

        // Stable outside the circle |ĥ - 1| = 1, unstable inside, and the
        // exactly sampled point ĥ = 2 (ξ = -1) sits on the boundary.
        let cases = [
            (Complex64::new(-1.0, 0.0), Classification::Stable),
            (Complex64::new(3.0, 0.0), Classification::Stable),
            (Complex64::new(0.5, 0.0), Classification::Unstable),
            (Complex64::new(1.0, 0.5), Classification::Unstable),
            (Complex64::new(2.0, 0.0), Classification::OnBoundary),
        ];
        for (h, want) in cases {
            assert_eq!(is_stable(&locus, h).unwrap(), want, "at {h}");
        }
    }

    #[test]
    fn fractional_degree_zero_classifications() {
        // The fully implicit degree-0 scheme keeps the whole negative real
        // axis stable for fractional orders; small positive real parts sit
        // inside the instability lobe attached to the origin.
        let q = quick_query(0.5, 0, 0.0, 20_000, 512);
        let locus = boundary_locus(&q).unwrap();
        assert_eq!(locus.poles_inside(), 0);
        assert!(!locus.is_degenerate());
        for h in [-0.3, -2.0, -25.0] {
            assert_eq!(
                is_stable(&locus, Complex64::new(h, 0.0)).unwrap(),
                Classification::Stable,
                "at {h}"
            );
        }
        for h in [0.05, 0.2] {
            assert_eq!(
                is_stable(&locus, Complex64::new(h, 0.0)).unwrap(),
                Classification::Unstable,
                "at {h}"
            );
        }
    }

    #[test]
    fn second_order_negative_axis_is_stable() {
        let q = quick_query(0.5, 1, 0.0, 20_000, 512);
        let locus = boundary_locus(&q).unwrap();
        assert_eq!(locus.poles_inside(), 0);
        for h in [-1.0, -10.0] {
            assert_eq!(
                is_stable(&locus, Complex64::new(h, 0.0)).unwrap(),
                Classification::Stable,
                "at {h}"
            );
        }
        assert_eq!(
            is_stable(&locus, Complex64::new(0.05, 0.0)).unwrap(),
            Classification::Unstable
        );
    }

    #[test]
    fn trapezoidal_limit_falls_back_to_simulation() {
        // α = 1, p = 1, κ = 0: the pole -1/α sits on the unit circle and
        // the locus (the imaginary axis of the trapezoidal rule) passes
        // through infinity, so classification must simulate.
        let q = quick_query(1.0, 1, 0.0, 2048, 64);
        let locus = boundary_locus(&q).unwrap();
        assert!(locus.is_degenerate());
        assert_eq!(
            is_stable(&locus, Complex64::new(-1.0, 0.0)).unwrap(),
            Classification::Stable
        );
        assert_eq!(
            is_stable(&locus, Complex64::new(1.0, 0.0)).unwrap(),
            Classification::Unstable
        );
    }

    #[test]
    fn pole_census_matches_hand_roots() {
        // Degree 0: single pole -1/κ.
        assert_eq!(count_poles_inside(0, 0.5, 0.0), (0, false));
        assert_eq!(count_poles_inside(0, 0.5, 2.0), (1, false));
        assert_eq!(count_poles_inside(0, 0.5, 0.5), (0, false));
        assert_eq!(count_poles_inside(0, 0.5, -2.0), (1, false));
        assert_eq!(count_poles_inside(0, 0.5, 1.0).1, true);

        // Degree 1, κ = 0: pole -1/α.
        assert_eq!(count_poles_inside(1, 0.5, 0.0), (0, false));
        assert_eq!(count_poles_inside(1, 1.0, 0.0), (0, true));

        // Degree 1, κ ≠ 0: roots of κξ² - ((1+κ)α + 2κ)ξ - 1.
        // α = 0.5, κ = 2:   roots (5.5 ± √38.25)/4  → {2.9212, -0.1712}.
        assert_eq!(count_poles_inside(1, 0.5, 2.0), (1, false));
        // α = 0.5, κ = 0.1: roots (0.75 ± √0.9625)/0.2 → {8.655, -1.155}.
        assert_eq!(count_poles_inside(1, 0.5, 0.1), (0, false));
        // α = 0.5, κ = -2:  roots (-4.5 ± 3.5)/(-4) → {0.25, 2}.
        assert_eq!(count_poles_inside(1, 0.5, -2.0), (1, false));
        // α = 0.5, κ = -0.5: conjugate pair of modulus √2.
        assert_eq!(count_poles_inside(1, 0.5, -0.5), (0, false));
        // α = 0.6, κ = 0.5: roots 1.9 ± √5.61 → {4.269, -0.469}.
        assert_eq!(count_poles_inside(1, 0.6, 0.5), (1, false));
    }

    #[test]
    fn simulation_history_split_matches_direct_row() {
        let rule = GaussJacobiRule::new(QUAD_POINTS, 0.3 - 1.0, 0.0).unwrap();
        let table = KernelTable::new(0.3, 1.0, 64, &rule).unwrap();
        for p in [0usize, 1] {
            let (g, gam0, dev1) = history_split(&table, p, 64);
            for k in [1usize, 2, 3, 7, 40] {
                // Deterministic pseudo-trajectory.
                let x: Vec<f64> = (0..=k).map(|j| (0.7 * j as f64).cos() + 0.3).collect();
                let direct: f64 = (0..=k)
                    .map(|j| gamma_entry(&table, p, k, j) * x[j])
                    .sum();
                let mut split: f64 = (0..k).map(|m| g[m] * x[k - m]).sum();
                split += gam0[k] * x[0];
                if p == 1 {
                    split += dev1[k] * x[1];
                }
                assert!(
                    (direct - split).abs() <= 1e-12 * (1.0 + direct.abs()),
                    "p = {p}, k = {k}: direct {direct} vs split {split}"
                );
            }
        }
    }

    #[test]
    fn winding_and_simulation_agree_on_probe_grid() {
        // Mixed-splitting second-order query with a genuine pole inside
        // the disk (so the stable winding target is -1), cross-checked
        // against the time-domain march.
        let q = quick_query(0.6, 1, 0.5, 20_000, 512);
        let locus = boundary_locus(&q).unwrap();
        assert_eq!(locus.poles_inside(), 1);
        assert!(!locus.is_degenerate());
        assert!(!locus.is_self_intersecting());

        let probes = [
            Complex64::new(-0.4, 0.4),
            Complex64::new(-2.0, 0.0),
            Complex64::new(-2.0, 1.0),
            Complex64::new(0.3, 0.0),
            Complex64::new(0.6, 0.6),
            Complex64::new(-0.15, -0.8),
        ];
        let mut checked = 0;
        for h in probes {
            // Near-boundary points are legitimately ambiguous for a
            // finite march; skip them.
            if polyline_distance(locus.h_hat(), h) < 0.05 {
                continue;
            }
            let fast = is_stable(&locus, h).unwrap();
            let slow = classify_by_simulation(&q, h).unwrap();
            if slow == Classification::OnBoundary {
                continue;
            }
            assert_eq!(fast, slow, "at {h}");
            checked += 1;
        }
        assert!(checked >= 3, "only {checked} probes were conclusive");
    }

    #[test]
    fn simulation_flags_growth_and_decay() {
        let q = quick_query(0.5, 0, 0.0, 1000, 64);
        assert_eq!(
            classify_by_simulation(&q, Complex64::new(-0.5, 0.0)).unwrap(),
            Classification::Stable
        );
        assert_eq!(
            classify_by_simulation(&q, Complex64::new(0.5, 0.0)).unwrap(),
            Classification::Unstable
        );
    }
}
