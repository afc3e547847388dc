//! Complex FFTs of arbitrary length, self-contained.
//!
//! The fast global solver diagonalizes an ε-circulant embedding of the
//! scheme's lower-triangular Toeplitz matrix, which needs forward/inverse
//! DFTs whose length is the *step count* `N` — rarely a power of two. Two
//! kernels cover every length:
//!
//! * an iterative radix-2 Cooley–Tukey transform for powers of two, and
//! * Bluestein's chirp-z algorithm for everything else, which re-expresses
//!   a length-`n` DFT as a circular convolution of length `m = 2^k >= 2n-1`
//!   and runs it through the radix-2 kernel.
//!
//! Conventions: the **forward** transform is unnormalized,
//! `X_k = Σ_j x_j e^{-2πi jk/n}`, and the **inverse** carries the full
//! `1/n`, so `inverse(forward(x)) == x`. The inverse is implemented as a
//! conjugate-sandwiched forward transform, so both kernels only ever run in
//! one direction.
//!
//! A [`FftPlan`] precomputes twiddles (and, for Bluestein, the chirp and the
//! spectrum of the convolution kernel); building one costs `O(n log n)` and
//! applying it is allocation-light. The free function [`fft`] is a one-shot
//! convenience for tests and small jobs.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex;

use crate::math;

/// Complex double-precision scalar used throughout the crate.
pub type Complex64 = Complex<f64>;

/// Transform direction. See the module docs for normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FftDirection {
    /// `X_k = Σ_j x_j e^{-2πi jk/n}` (no scaling).
    Forward,
    /// `x_j = (1/n) Σ_k X_k e^{+2πi jk/n}`.
    Inverse,
}

/// `e^{iθ}`.
#[inline]
fn cis(theta: f64) -> Complex64 {
    Complex64::new(math::cos(theta), math::sin(theta))
}

/// A reusable FFT plan for one fixed length.
#[derive(Debug, Clone)]
pub struct FftPlan {
    n: usize,
    kind: Kind,
}

#[derive(Debug, Clone)]
enum Kind {
    /// n is a power of two: iterative Cooley–Tukey.
    Radix2 {
        /// Twiddles `e^{-2πi j/n}` for `j < n/2`.
        twiddles: Vec<Complex64>,
    },
    /// Arbitrary n: Bluestein chirp-z through a radix-2 convolution.
    Bluestein {
        /// Convolution length, a power of two `>= 2n - 1`.
        m: usize,
        /// Twiddles for the length-`m` radix-2 kernel.
        twiddles: Vec<Complex64>,
        /// `c_j = e^{-iπ (j² mod 2n)/n}` for `j < n`.
        chirp: Vec<Complex64>,
        /// Forward length-`m` spectrum of the circularly embedded kernel
        /// `w_l = conj(c_{|l|})`.
        kernel_spectrum: Vec<Complex64>,
    },
}

impl FftPlan {
    /// Builds a plan for transforms of length `n >= 1`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "FFT length must be at least 1");
        if n.is_power_of_two() {
            return FftPlan {
                n,
                kind: Kind::Radix2 {
                    twiddles: make_twiddles(n),
                },
            };
        }
        let m = (2 * n - 1).next_power_of_two();
        let twiddles = make_twiddles(m);
        // Chirp with the quadratic exponent reduced mod 2n *in integers*, so
        // the angle stays O(1) and large j² costs no precision.
        let two_n = 2 * n as u128;
        let chirp: Vec<Complex64> = (0..n)
            .map(|j| {
                let q = ((j as u128) * (j as u128)) % two_n;
                cis(-core::f64::consts::PI * q as f64 / n as f64)
            })
            .collect();
        // Kernel w_l = conj(c_|l|), embedded circularly on length m.
        let mut kernel = vec![Complex64::new(0.0, 0.0); m];
        kernel[0] = chirp[0].conj();
        for l in 1..n {
            let w = chirp[l].conj();
            kernel[l] = w;
            kernel[m - l] = w;
        }
        radix2_forward(&mut kernel, &twiddles);
        FftPlan {
            n,
            kind: Kind::Bluestein {
                m,
                twiddles,
                chirp,
                kernel_spectrum: kernel,
            },
        }
    }

    /// Transform length this plan was built for.
    pub fn len(&self) -> usize {
        self.n
    }

    /// `true` only for the degenerate length-0 plan, which cannot exist.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Transforms `buf` in place.
    ///
    /// # Panics
    ///
    /// Panics if `buf.len() != self.len()` — that is a programming error,
    /// not a runtime condition.
    pub fn process(&self, buf: &mut [Complex64], direction: FftDirection) {
        assert_eq!(
            buf.len(),
            self.n,
            "buffer length {} does not match plan length {}",
            buf.len(),
            self.n
        );
        match direction {
            FftDirection::Forward => self.forward(buf),
            FftDirection::Inverse => {
                // IDFT(x) = conj(DFT(conj(x))) / n.
                for v in buf.iter_mut() {
                    *v = v.conj();
                }
                self.forward(buf);
                let scale = 1.0 / self.n as f64;
                for v in buf.iter_mut() {
                    *v = v.conj() * scale;
                }
            }
        }
    }

    fn forward(&self, buf: &mut [Complex64]) {
        match &self.kind {
            Kind::Radix2 { twiddles } => radix2_forward(buf, twiddles),
            Kind::Bluestein {
                m,
                twiddles,
                chirp,
                kernel_spectrum,
            } => {
                let n = self.n;
                let mut a = vec![Complex64::new(0.0, 0.0); *m];
                for j in 0..n {
                    a[j] = buf[j] * chirp[j];
                }
                radix2_forward(&mut a, twiddles);
                for (av, kv) in a.iter_mut().zip(kernel_spectrum) {
                    *av *= *kv;
                }
                // Inverse length-m transform by the conjugate trick.
                for v in a.iter_mut() {
                    *v = v.conj();
                }
                radix2_forward(&mut a, twiddles);
                let scale = 1.0 / *m as f64;
                for (k, out) in buf.iter_mut().enumerate() {
                    *out = a[k].conj() * scale * chirp[k];
                }
            }
        }
    }
}

/// Twiddle table `e^{-2πi j/n}` for `j < n/2` (empty when `n == 1`).
fn make_twiddles(n: usize) -> Vec<Complex64> {
    (0..n / 2)
        .map(|j| cis(-2.0 * core::f64::consts::PI * j as f64 / n as f64))
        .collect()
}

/// In-place iterative radix-2 DIT transform; `buf.len()` must be a power of
/// two matching the twiddle table.
fn radix2_forward(buf: &mut [Complex64], twiddles: &[Complex64]) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());
    if n <= 1 {
        return;
    }
    // Bit-reversal permutation.
    let mut j = 0usize;
    for i in 0..n - 1 {
        if i < j {
            buf.swap(i, j);
        }
        let mut mask = n >> 1;
        while j & mask != 0 {
            j &= !mask;
            mask >>= 1;
        }
        j |= mask;
    }
    // Butterflies.
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let step = n / len;
        let mut base = 0;
        while base < n {
            for k in 0..half {
                let tw = twiddles[k * step];
                let t = buf[base + half + k] * tw;
                let u = buf[base + k];
                buf[base + k] = u + t;
                buf[base + half + k] = u - t;
            }
            base += len;
        }
        len <<= 1;
    }
}

/// One-shot transform of a slice (any length), returning a new vector.
pub fn fft(x: &[Complex64], direction: FftDirection) -> Vec<Complex64> {
    let plan = FftPlan::new(x.len());
    let mut buf = x.to_vec();
    plan.process(&mut buf, direction);
    buf
}
