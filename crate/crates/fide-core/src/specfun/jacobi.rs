//! Gauss–Jacobi quadrature on `[-1, 1]` with weight `(1-t)^a (1+t)^b`.
//!
//! Rules are constructed by the Golub–Welsch method: the three-term
//! recurrence coefficients of the monic Jacobi polynomials (Gautschi's
//! formulas) define a symmetric tridiagonal Jacobi matrix whose eigenvalues
//! are the nodes. Weights come from the Christoffel function,
//! `w_j = 1 / Σ_m p̃_m(x_j)²` with `p̃_m` the *orthonormal* polynomials,
//! which is numerically stabler than squaring eigenvector components.
//!
//! A `Q`-point rule integrates polynomials through degree `2Q - 1` exactly
//! against the weight; the kernel tables and correction weights in this
//! crate rely on that exactness.

use crate::error::{Error, Result};
use crate::math;
use crate::specfun::gamma_fn;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// A Gauss–Jacobi quadrature rule: nodes/weights for
/// `∫_{-1}^{1} (1-t)^a (1+t)^b f(t) dt ≈ Σ_j w_j f(t_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussJacobiRule {
    exponent_a: f64,
    exponent_b: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussJacobiRule {
    /// Builds the `q`-point rule for weight exponents `a, b > -1`.
    ///
    /// # Errors
    ///
    /// * [`Error::Domain`] if `q == 0`, or `a <= -1`, or `b <= -1`.
    /// * [`Error::NoConvergence`] if the eigenvalue iteration stalls
    ///   (not observed in practice for `q <= 1000`).
    ///
    /// # Examples
    ///
    /// ```
    /// use fide_core::specfun::GaussJacobiRule;
    /// // One-point Gauss-Legendre: midpoint node, weight = interval length.
    /// let rule = GaussJacobiRule::new(1, 0.0, 0.0).unwrap();
    /// assert!(rule.nodes()[0].abs() < 1e-15);
    /// assert!((rule.weights()[0] - 2.0).abs() < 1e-14);
    /// ```
    pub fn new(q: usize, a: f64, b: f64) -> Result<Self> {
        if q == 0 {
            return Err(Error::Domain("quadrature order q must be at least 1".into()));
        }
        if !(a > -1.0) || !(b > -1.0) {
            return Err(Error::Domain(format!(
                "Gauss-Jacobi exponents must satisfy a, b > -1 (got a = {a}, b = {b})"
            )));
        }

        // Monic Jacobi recurrence coefficients (Gautschi):
        //   pi_{k+1} = (x - alpha_k) pi_k - beta_k pi_{k-1}.
        let mut alpha = vec![0.0f64; q];
        let mut beta = vec![0.0f64; q]; // beta[0] = mu0 (total weight mass)
        let apb = a + b;
        alpha[0] = (b - a) / (apb + 2.0);
        // mu0 = ∫ (1-t)^a (1+t)^b dt = 2^{a+b+1} B(a+1, b+1).
        let mu0 = math::powf(2.0, apb + 1.0) * gamma_fn(a + 1.0)? * gamma_fn(b + 1.0)?
            / gamma_fn(apb + 2.0)?;
        beta[0] = mu0;
        if q > 1 {
            beta[1] = 4.0 * (a + 1.0) * (b + 1.0) / ((apb + 2.0) * (apb + 2.0) * (apb + 3.0));
        }
        for n in 1..q {
            let nn = n as f64;
            let denom = (2.0 * nn + apb) * (2.0 * nn + apb + 2.0);
            alpha[n] = (b * b - a * a) / denom;
            if n >= 2 {
                let d = 2.0 * nn + apb;
                beta[n] = 4.0 * nn * (nn + a) * (nn + b) * (nn + apb)
                    / (d * d * (d + 1.0) * (d - 1.0));
            }
        }

        // Jacobi matrix: diagonal alpha, off-diagonal sqrt(beta[1..]).
        let mut diag = alpha.clone();
        let mut off: Vec<f64> = (1..q).map(|n| math::sqrt(beta[n])).collect();
        tridiag_eigenvalues(&mut diag, &mut off)?;
        let mut nodes = diag;
        nodes.sort_unstable_by(|x, y| x.partial_cmp(y).expect("eigenvalues are finite"));

        // Christoffel weights: w_j = 1 / Σ_{m=0}^{q-1} p̃_m(x_j)² with the
        // orthonormal recurrence sqrt(beta_{m+1}) p̃_{m+1}
        //   = (x - alpha_m) p̃_m - sqrt(beta_m) p̃_{m-1}.
        let sqrt_beta: Vec<f64> = beta.iter().map(|&v| math::sqrt(v)).collect();
        let weights = nodes
            .iter()
            .map(|&x| {
                let mut prev = 0.0f64;
                let mut cur = 1.0 / sqrt_beta[0];
                let mut sum_sq = cur * cur;
                for m in 0..q - 1 {
                    let next = ((x - alpha[m]) * cur - sqrt_beta[m] * prev) / sqrt_beta[m + 1];
                    prev = cur;
                    cur = next;
                    sum_sq += cur * cur;
                }
                1.0 / sum_sq
            })
            .collect();

        Ok(GaussJacobiRule {
            exponent_a: a,
            exponent_b: b,
            nodes,
            weights,
        })
    }

    /// Weight exponents `(a, b)` this rule was built for.
    pub fn exponents(&self) -> (f64, f64) {
        (self.exponent_a, self.exponent_b)
    }

    /// Number of quadrature points.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// `true` if the rule has no points (never constructible; kept for API symmetry).
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes in ascending order, all strictly inside `(-1, 1)`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Positive weights matching [`Self::nodes`].
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Applies the rule: `Σ_j w_j f(t_j)`.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Eigenvalues of a symmetric tridiagonal matrix by the implicit-shift QL
/// algorithm (eigenvalues only). `diag` has length `n`, `off` length `n-1`;
/// on success `diag` holds the (unsorted) eigenvalues.
fn tridiag_eigenvalues(diag: &mut [f64], off: &mut [f64]) -> Result<()> {
    let n = diag.len();
    if n == 0 {
        return Ok(());
    }
    // Pad the off-diagonal so e[l..n-1] indexing below is uniform.
    let mut e = vec![0.0f64; n];
    e[..n - 1].copy_from_slice(off);

    for l in 0..n {
        let mut iter = 0;
        loop {
            // Look for a negligible off-diagonal element to split at.
            let mut m = l;
            while m + 1 < n {
                let dd = math::abs(diag[m]) + math::abs(diag[m + 1]);
                if math::abs(e[m]) <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(Error::NoConvergence {
                    what: "tridiagonal QL eigenvalue iteration".into(),
                    iterations: iter,
                    residual: math::abs(e[l]),
                });
            }
            // Implicit shift from the leading 2x2 block.
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * e[l]);
            let mut r = math::hypot(g, 1.0);
            let sign_r = if g >= 0.0 { r } else { -r };
            g = diag[m] - diag[l] + e[l] / (g + sign_r);
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflowed = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let bb = c * e[i];
                r = math::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    // Rotation annihilated the element exactly; deflate and
                    // restart the scan for this l.
                    diag[i + 1] -= p;
                    e[m] = 0.0;
                    underflowed = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * bb;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - bb;
            }
            if underflowed {
                continue;
            }
            diag[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    off.copy_from_slice(&e[..n - 1]);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // Q = 5, a = 0.3, b = 0 reference rule (mpmath Golub-Welsch, 50 digits).
    const NODES_5: [f64; 5] = [
        -0.91094596170737604102,
        -0.56032259252954393789,
        -0.040862629123195425691,
        0.49110434890118090174,
        0.87539576649776945432,
    ];
    const WEIGHTS_5: [f64; 5] = [
        0.2733482955210601817,
        0.52365705295528569381,
        0.56049626317360281568,
        0.39406258234100620454,
        0.14250413423199323427,
    ];

    #[test]
    fn five_point_rule_matches_reference() {
        let rule = GaussJacobiRule::new(5, 0.3, 0.0).unwrap();
        for j in 0..5 {
            assert_relative_eq!(rule.nodes()[j], NODES_5[j], epsilon = 1e-13);
            assert_relative_eq!(rule.weights()[j], WEIGHTS_5[j], max_relative = 1e-13);
        }
    }

    #[test]
    fn weights_sum_to_weight_mass() {
        // Σ w_j = mu0 = 2^{a+b+1} B(a+1, b+1); for a=0.3, b=0 this is
        // 2^{1.3}/1.3 = 1.89406832822294813 (mpmath).
        let rule = GaussJacobiRule::new(5, 0.3, 0.0).unwrap();
        let total: f64 = rule.weights().iter().sum();
        assert_relative_eq!(total, 1.89406832822294813, max_relative = 1e-13);
    }

    #[test]
    fn high_degree_moments_are_exact() {
        // ∫ (1-t)^0.3 t^9 dt = -0.077249227785109256023 and
        // ∫ (1-t)^0.3 t^7 dt = -0.092514123354564803663 (mpmath); a 5-point
        // rule is exact through degree 9.
        let rule = GaussJacobiRule::new(5, 0.3, 0.0).unwrap();
        let m9 = rule.integrate(|t| t.powi(9));
        let m7 = rule.integrate(|t| t.powi(7));
        assert_relative_eq!(m9, -0.077249227785109256023, max_relative = 1e-12);
        assert_relative_eq!(m7, -0.092514123354564803663, max_relative = 1e-12);
    }

    #[test]
    fn low_degree_moments_match_closed_form() {
        // ∫ (1-t)^a (1+t)^b t^k dt
        //   = 2^{a+b+1} Σ_i C(k,i) 2^i (-1)^{k-i} B(b+1+i, a+1).
        // The binomial sum cancels badly for large k, so only low degrees
        // are checked this way; exactness at high degree is covered by the
        // two-rule comparison below.
        let cases = [(1usize, 0.25, -0.5), (2, -0.7, 0.0), (3, 0.0, 0.0), (4, 2.5, 0.5)];
        for &(q, a, b) in &cases {
            let rule = GaussJacobiRule::new(q, a, b).unwrap();
            for k in 0..(2 * q).min(6) {
                let exact = moment(a, b, k);
                let approx = rule.integrate(|t| t.powi(k as i32));
                let scale = exact.abs().max(1.0);
                assert!(
                    (approx - exact).abs() <= 5e-12 * scale,
                    "moment k={k} for (q={q}, a={a}, b={b}): got {approx}, want {exact}"
                );
            }
        }
    }

    #[test]
    fn polynomial_exactness_up_to_design_degree() {
        // A q-point rule and a (q+8)-point rule are both exact on degree
        // <= 2q-1, so they must agree there to roundoff — no closed-form
        // reference needed.
        let cases = [
            (2usize, -0.7, 0.0),
            (3, 0.0, 0.0),
            (6, -0.5, -0.5),
            (9, 0.3, 1.7),
            (12, 1.9, -0.3),
        ];
        for &(q, a, b) in &cases {
            let rule = GaussJacobiRule::new(q, a, b).unwrap();
            let fine = GaussJacobiRule::new(q + 8, a, b).unwrap();
            for k in 0..2 * q {
                let coarse_val = rule.integrate(|t| t.powi(k as i32));
                let fine_val = fine.integrate(|t| t.powi(k as i32));
                let scale = fine_val.abs().max(1.0);
                assert!(
                    (coarse_val - fine_val).abs() <= 1e-12 * scale,
                    "degree {k} for (q={q}, a={a}, b={b}): {coarse_val} vs {fine_val}"
                );
            }
        }
    }

    #[test]
    fn nodes_inside_interval_and_weights_positive() {
        for &(q, a, b) in &[(1usize, 0.3, 0.0), (13, -0.9, 3.0), (64, 0.5, 0.5), (200, -0.2, 0.0)] {
            let rule = GaussJacobiRule::new(q, a, b).unwrap();
            assert_eq!(rule.len(), q);
            for j in 0..q {
                assert!(rule.nodes()[j] > -1.0 && rule.nodes()[j] < 1.0);
                assert!(rule.weights()[j] > 0.0);
                if j > 0 {
                    assert!(rule.nodes()[j] > rule.nodes()[j - 1]);
                }
            }
        }
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(GaussJacobiRule::new(0, 0.0, 0.0).is_err());
        assert!(GaussJacobiRule::new(4, -1.0, 0.0).is_err());
        assert!(GaussJacobiRule::new(4, 0.0, -1.5).is_err());
        assert!(GaussJacobiRule::new(4, f64::NAN, 0.0).is_err());
    }

    /// Closed-form moment via binomial expansion around t = -1.
    fn moment(a: f64, b: f64, k: usize) -> f64 {
        // t = (1+t) - 1, t^k = Σ_i C(k,i) (1+t)^i (-1)^{k-i};
        // ∫ (1-t)^a (1+t)^{b+i} dt = 2^{a+b+i+1} B(b+i+1, a+1).
        let mut total = 0.0;
        for i in 0..=k {
            let binom = (0..i).fold(1.0f64, |acc, j| acc * (k - j) as f64 / (j + 1) as f64);
            let sign = if (k - i) % 2 == 0 { 1.0 } else { -1.0 };
            let beta = crate::specfun::gamma_fn(b + 1.0 + i as f64).unwrap()
                * crate::specfun::gamma_fn(a + 1.0).unwrap()
                / crate::specfun::gamma_fn(a + b + 2.0 + i as f64).unwrap();
            total += binom * sign * 2.0f64.powf(a + b + 1.0 + i as f64) * beta;
        }
        total
    }
}
