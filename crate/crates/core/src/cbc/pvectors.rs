//! Per-order state vectors for the SPOD dynamic program.
//!
//! The construction criterion decomposes over total derivative order l:
//!
//!   P(z_1..z_t) = (1/n) sum_k sum_{l>=1} p_{t,l}(k),
//!
//! where the vectors obey, with r(l,w) = Gamma_l / Gamma_{l-w},
//!
//!   p_{t,l}(k) = p_{t-1,l}(k)
//!              + omega(k z_t / n) * sum_w r(l,w) gamma_{t,w} p_{t-1,l-w}(k),
//!
//! starting from p_{0,0} = 1 and p_{0,l} = 0 for l >= 1.
//!
//! Each order-l vector carries a power-of-two scale factor: the stored
//! values are `actual * 2^-log2_scale[l]`. Rescaling multiplies by exact
//! powers of two, so the bookkeeping never changes the represented reals;
//! scales are combined in log space when orders are mixed. This keeps
//! magnitudes inside f64 range even when products drift across hundreds
//! of dimensions.

use crate::error::Result;
use crate::numeric::pairwise_sum;
use crate::weights::GammaOrder;

const RESCALE_HIGH: f64 = 1e200;
const RESCALE_LOW: f64 = 1e-200;

pub(crate) struct PVectors {
    n: usize,
    sigma: usize,
    gamma_order: GammaOrder,
    /// vectors[l][k]; index 0 is the constant order-0 vector.
    vectors: Vec<Vec<f64>>,
    /// actual_l = vectors[l] * 2^log2_scale[l]; integer-valued.
    log2_scale: Vec<f64>,
}

impl PVectors {
    pub fn new(n: usize, sigma: u32, gamma_order: GammaOrder) -> Self {
        PVectors {
            n,
            sigma: sigma as usize,
            gamma_order,
            vectors: vec![vec![1.0; n]],
            log2_scale: vec![0.0],
        }
    }

    /// Highest order currently stored (sigma * dimensions processed).
    pub fn max_order(&self) -> usize {
        self.vectors.len() - 1
    }

    /// Total stored doubles; the working-memory footprint of the program.
    pub fn storage_doubles(&self) -> usize {
        self.vectors.len() * self.n
    }

    /// Accumulation vector for the next dimension:
    /// x(k) = sum_{l'} (sum_w gamma[w-1] r(l'+w, w)) * p_{l'}(k).
    pub fn assemble_x(&self, gamma_row: &[f64], out: &mut [f64]) -> Result<()> {
        debug_assert_eq!(out.len(), self.n);
        debug_assert_eq!(gamma_row.len(), self.sigma);
        out.fill(0.0);
        for lp in 0..=self.max_order() {
            let mut coeff = 0.0;
            for (wi, &g) in gamma_row.iter().enumerate() {
                let w = wi as u32 + 1;
                coeff += g * self.gamma_order.ratio(lp as u32 + w, w)?;
            }
            let scaled = coeff * self.log2_scale[lp].exp2();
            if scaled == 0.0 || !scaled.is_finite() {
                if scaled.is_nan() || scaled.is_infinite() {
                    // Blow-up propagates honestly.
                    for v in out.iter_mut() {
                        *v = f64::INFINITY;
                    }
                    return Ok(());
                }
                continue;
            }
            let src = &self.vectors[lp];
            for (o, &v) in out.iter_mut().zip(src) {
                *o += scaled * v;
            }
        }
        Ok(())
    }

    /// Applies the recurrence for one new dimension with the given kernel
    /// row and per-order factors, extending the order range by sigma.
    pub fn update(&mut self, omega_row: &[f64], gamma_row: &[f64]) -> Result<()> {
        debug_assert_eq!(omega_row.len(), self.n);
        let prev_max = self.max_order();
        let new_max = prev_max + self.sigma;
        for _ in 0..self.sigma {
            self.vectors.push(vec![0.0; self.n]);
            self.log2_scale.push(0.0);
        }
        // High orders first: p_l reads only p_{l-w} with w >= 1, so the
        // in-place overwrite is safe in descending order.
        for l in (1..=new_max).rev() {
            let w_lo = l.saturating_sub(prev_max).max(1);
            let w_hi = self.sigma.min(l);
            if w_lo > w_hi {
                continue;
            }
            for w in w_lo..=w_hi {
                let ratio = self.gamma_order.ratio(l as u32, w as u32)?;
                let delta = self.log2_scale[l - w] - self.log2_scale[l];
                let coeff = gamma_row[w - 1] * ratio * delta.exp2();
                if coeff == 0.0 {
                    continue;
                }
                // Split borrow: source order l-w, destination order l.
                let (lo, hi) = self.vectors.split_at_mut(l);
                let src = &lo[l - w];
                let dst = &mut hi[0];
                for k in 0..self.n {
                    dst[k] += coeff * omega_row[k] * src[k];
                }
            }
            self.rescale(l);
        }
        Ok(())
    }

    fn rescale(&mut self, l: usize) {
        let m = self.vectors[l]
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        if m == 0.0 || !m.is_finite() {
            return;
        }
        if m > RESCALE_HIGH || m < RESCALE_LOW {
            let shift = m.log2().round();
            let factor = (-shift).exp2();
            for v in self.vectors[l].iter_mut() {
                *v *= factor;
            }
            self.log2_scale[l] += shift;
        }
    }

    /// sum_k sum_{l>=1} p_l(k), with scales reapplied. Divide by n for
    /// the criterion value of the dimensions processed so far.
    pub fn criterion_base(&self) -> f64 {
        let mut total = 0.0;
        for l in 1..=self.max_order() {
            total += self.log2_scale[l].exp2() * pairwise_sum(&self.vectors[l]);
        }
        total
    }
}
