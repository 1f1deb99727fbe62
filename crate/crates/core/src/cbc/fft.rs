//! Cyclic convolution via FFT.

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::error::{Error, Result};

/// Cyclic convolution c_i = sum_j a_j b_{(i-j) mod m}.
pub fn convolve_cyclic(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::Validation(format!(
            "convolve_cyclic: length mismatch ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::Validation("convolve_cyclic: empty input".into()));
    }
    let m = a.len();
    if m == 1 {
        return Ok(vec![a[0] * b[0]]);
    }
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);
    let mut fa: Vec<Complex<f64>> = a.iter().map(|&v| Complex::new(v, 0.0)).collect();
    let mut fb: Vec<Complex<f64>> = b.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    inv.process(&mut fa);
    let scale = 1.0 / m as f64;
    Ok(fa.iter().map(|c| c.re * scale).collect())
}

/// Cyclic cross-correlation against a fixed kernel, with the kernel
/// spectrum precomputed once. Used by the fast CBC path, where the same
/// kernel is correlated against a new vector at every dimension.
pub struct FixedKernelCorrelator {
    m: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    kernel_spectrum: Vec<Complex<f64>>,
}

impl FixedKernelCorrelator {
    /// Kernel e of length m; `correlate(x)` returns
    /// c_i = sum_j x_j e_{(j-i) mod m}.
    pub fn new(kernel: &[f64]) -> Result<Self> {
        if kernel.is_empty() {
            return Err(Error::Validation("correlator: empty kernel".into()));
        }
        let m = kernel.len();
        let mut planner = FftPlanner::<f64>::new();
        let fwd = planner.plan_fft_forward(m);
        let inv = planner.plan_fft_inverse(m);
        // Correlation = convolution with the index-reversed kernel.
        let mut spec: Vec<Complex<f64>> = (0..m)
            .map(|u| Complex::new(kernel[(m - u) % m], 0.0))
            .collect();
        fwd.process(&mut spec);
        Ok(FixedKernelCorrelator {
            m,
            fwd,
            inv,
            kernel_spectrum: spec,
        })
    }

    pub fn correlate(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.m);
        if self.m == 1 {
            return vec![x[0] * self.kernel_spectrum[0].re];
        }
        let mut fx: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
        self.fwd.process(&mut fx);
        for (v, k) in fx.iter_mut().zip(&self.kernel_spectrum) {
            *v *= k;
        }
        self.inv.process(&mut fx);
        let scale = 1.0 / self.m as f64;
        fx.iter().map(|c| c.re * scale).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    fn direct_convolution(a: &[f64], b: &[f64]) -> Vec<f64> {
        let m = a.len();
        (0..m)
            .map(|i| (0..m).map(|j| a[j] * b[(i + m - j) % m]).sum::<f64>())
            .collect()
    }

    #[test]
    fn delta_kernel_is_identity() {
        let mut a = vec![0.0; 8];
        a[0] = 1.0;
        let b: Vec<f64> = (0..8).map(|i| i as f64 - 3.0).collect();
        let c = convolve_cyclic(&a, &b).unwrap();
        for (x, y) in c.iter().zip(&b) {
            assert_relative_eq!(x, y, epsilon = 1e-13);
        }
    }

    #[test]
    fn tiny_hand_case() {
        let c = convolve_cyclic(&[1.0, 1.0], &[1.0, 1.0]).unwrap();
        assert_relative_eq!(c[0], 2.0, epsilon = 1e-13);
        assert_relative_eq!(c[1], 2.0, epsilon = 1e-13);
        assert!(convolve_cyclic(&[1.0], &[1.0, 2.0]).is_err());
        assert!(convolve_cyclic(&[], &[]).is_err());
    }

    #[test]
    fn random_lengths_match_direct_convolution() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for m in [2usize, 3, 16, 97, 256, 1000] {
            let a: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() - 0.5).collect();
            let b: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() - 0.5).collect();
            let fast = convolve_cyclic(&a, &b).unwrap();
            let slow = direct_convolution(&a, &b);
            let scale = slow.iter().fold(1e-30f64, |acc, v| acc.max(v.abs()));
            for (x, y) in fast.iter().zip(&slow) {
                assert!(
                    (x - y).abs() <= 1e-12 * scale,
                    "m={m}: {x} vs {y} (scale {scale})"
                );
            }
        }
    }

    #[test]
    fn correlator_matches_brute_force() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let m = 96usize;
        let e: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() - 0.5).collect();
        let x: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() - 0.5).collect();
        let corr = FixedKernelCorrelator::new(&e).unwrap();
        let fast = corr.correlate(&x);
        for i in 0..m {
            let want: f64 = (0..m).map(|j| x[j] * e[(j + m - i) % m]).sum();
            assert!((fast[i] - want).abs() <= 1e-12 * want.abs().max(1.0));
        }
    }
}
