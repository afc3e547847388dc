//! Real gamma function via the Lanczos approximation.
//!
//! Uses Godfrey's 15-term coefficient set for `g = 607/128`, which delivers
//! close to full double precision on the positive axis; negative arguments
//! go through the Euler reflection formula. The largest representable value
//! is `gamma_fn(171.61...)`; the solvers never need more than `Γ(≈10)`, but
//! the implementation stays correct up to the overflow boundary (e.g.
//! `Γ(170) ≈ 4.27e304`).

use crate::error::{Error, Result};
use crate::math;
use alloc::format;

/// Lanczos parameter `g = 607/128`.
const LANCZOS_G: f64 = 4.7421875;

/// Godfrey's Lanczos coefficients for `g = 607/128`, 15 terms.
const LANCZOS_COEFFS: [f64; 15] = [
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    0.33994649984811888699e-4,
    0.46523628927048575665e-4,
    -0.98374475304879564677e-4,
    0.15808870322491248884e-3,
    -0.21026444172410488319e-3,
    0.21743961811521264320e-3,
    -0.16431810653676389022e-3,
    0.84418223983852743293e-4,
    -0.26190838401581408670e-4,
    0.36899182659531622704e-5,
];

const SQRT_TWO_PI: f64 = 2.5066282746310005024;

/// Lanczos series `A_g(z)` for the shifted argument `z = x - 1`.
fn lanczos_sum(z: f64) -> f64 {
    let mut acc = LANCZOS_COEFFS[0];
    for (k, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (z + k as f64);
    }
    acc
}

/// The gamma function `Γ(x)` for real `x`.
///
/// # Errors
///
/// [`Error::Domain`] if `x` is NaN or a pole (`x = 0, -1, -2, …`).
///
/// # Examples
///
/// ```
/// let g = fide_core::specfun::gamma_fn(0.5).unwrap();
/// assert!((g - core::f64::consts::PI.sqrt()).abs() < 1e-13);
/// assert!((fide_core::specfun::gamma_fn(5.0).unwrap() - 24.0).abs() < 1e-12);
/// ```
pub fn gamma_fn(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::Domain(format!("gamma_fn({x}) is undefined")));
    }
    if x <= 0.0 && x == math::floor(x) {
        return Err(Error::Domain(format!(
            "gamma_fn has a pole at the non-positive integer {x}"
        )));
    }
    if x < 0.5 {
        // Reflection: Γ(x) Γ(1-x) = π / sin(πx).
        let s = math::sin(core::f64::consts::PI * x);
        return Ok(core::f64::consts::PI / (s * gamma_positive(1.0 - x)));
    }
    Ok(gamma_positive(x))
}

/// Γ(x) for `x >= 0.5` (no pole or reflection handling).
fn gamma_positive(x: f64) -> f64 {
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    // Split the power so intermediate values stay inside f64 range right up
    // to the Γ overflow boundary near x = 171.6.
    let half_pow = math::powf(t, 0.5 * (z + 0.5));
    SQRT_TWO_PI * lanczos_sum(z) * half_pow * math::exp(-t) * half_pow
}

/// `ln Γ(x)` for `x > 0`.
///
/// Used internally where `Γ` itself would overflow (large factorial ratios in
/// the Mittag-Leffler series). Accurate to ~1e-13 relative in `ln`.
pub(crate) fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0, "ln_gamma requires a positive argument");
    if x < 0.5 {
        // ln Γ(x) = ln π - ln sin(πx) - ln Γ(1-x); sin(πx) > 0 on (0, 1/2).
        let s = math::sin(core::f64::consts::PI * x);
        return math::ln(core::f64::consts::PI / s) - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    math::ln(SQRT_TWO_PI * lanczos_sum(z)) + (z + 0.5) * math::ln(t) - t
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // Reference values computed with mpmath at 50 significant digits.
    const GAMMA_HALF: f64 = 1.7724538509055160273; // Γ(1/2) = √π
    const GAMMA_TENTH: f64 = 9.5135076986687312858;
    const GAMMA_MILLI: f64 = 999.42377248459544535;
    const GAMMA_2_5: f64 = 1.3293403881791370205;
    const GAMMA_7_5: f64 = 1871.2543057977883465;
    const GAMMA_170: f64 = 4.2690680090047052749e304;

    #[test]
    fn matches_reference_values() {
        assert_relative_eq!(gamma_fn(0.5).unwrap(), GAMMA_HALF, max_relative = 1e-13);
        assert_relative_eq!(gamma_fn(0.1).unwrap(), GAMMA_TENTH, max_relative = 1e-13);
        assert_relative_eq!(gamma_fn(0.001).unwrap(), GAMMA_MILLI, max_relative = 1e-13);
        assert_relative_eq!(gamma_fn(2.5).unwrap(), GAMMA_2_5, max_relative = 1e-13);
        assert_relative_eq!(gamma_fn(7.5).unwrap(), GAMMA_7_5, max_relative = 1e-13);
        assert_relative_eq!(gamma_fn(170.0).unwrap(), GAMMA_170, max_relative = 1e-12);
    }

    #[test]
    fn integers_are_factorials() {
        let mut fact = 1.0;
        for n in 1..=20u64 {
            assert_relative_eq!(
                gamma_fn(n as f64).unwrap(),
                fact,
                max_relative = 1e-14
            );
            fact *= n as f64;
        }
    }

    #[test]
    fn recurrence_holds_across_the_range() {
        // Γ(x+1) = x Γ(x) on a grid spanning reflection and main branches.
        let mut x = -4.73;
        while x < 40.0 {
            if (x - math::floor(x)).abs() > 1e-3 && (x.abs()) > 1e-3 {
                let lhs = gamma_fn(x + 1.0).unwrap();
                let rhs = x * gamma_fn(x).unwrap();
                assert_relative_eq!(lhs, rhs, max_relative = 1e-11);
            }
            x += 0.137;
        }
    }

    #[test]
    fn reflection_value() {
        // Γ(-1/2) = -2√π.
        assert_relative_eq!(
            gamma_fn(-0.5).unwrap(),
            -2.0 * GAMMA_HALF,
            max_relative = 1e-13
        );
    }

    #[test]
    fn poles_and_nan_are_rejected() {
        assert!(gamma_fn(0.0).is_err());
        assert!(gamma_fn(-3.0).is_err());
        assert!(gamma_fn(f64::NAN).is_err());
    }

    #[test]
    fn ln_gamma_agrees_with_gamma() {
        for &x in &[0.05, 0.3, 1.0, 2.5, 7.5, 34.2, 170.0] {
            let direct = math::ln(gamma_fn(x).unwrap());
            assert_relative_eq!(ln_gamma(x), direct, epsilon = 1e-11, max_relative = 1e-11);
        }
        // Beyond the Γ overflow boundary the log form must keep working:
        // ln Γ(500) from mpmath.
        assert_relative_eq!(ln_gamma(500.0), 2605.1158503617338927, max_relative = 1e-13);
    }
}
