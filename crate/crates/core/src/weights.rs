//! SPOD (smoothness-driven product and order dependent) cubature weights.
//!
//! A weight spec assigns to every subset u of coordinates the weight
//!
//!   gamma_u = sum over m_u in {1..sigma}^|u| of
//!             Gamma_{|m_u|} * prod_{j in u} gamma_{j,m_j},
//!
//! with gamma_empty = Gamma_0 = 1. The PDE-driven choice is
//! sigma = alpha, Gamma_l = l!, gamma_{j,m} = b_j^m S(alpha, m) with b_j
//! the scaled sup-norms of the field fluctuations. Order factors are
//! never materialized as factorials; only ratios Gamma_l / Gamma_{l-w}
//! (falling factorials) enter any computation outside the small-subset
//! test oracle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{falling_factorial_ratio, riemann_zeta, stirling2};

/// Largest subset size for which exact subset-sum enumeration is allowed.
pub const MAX_ENUMERATED_SUBSET: usize = 12;

/// Rule producing the order factors Gamma_l.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GammaOrder {
    Factorial,
}

impl GammaOrder {
    /// Gamma_l / Gamma_{l-w}.
    pub fn ratio(self, l: u32, w: u32) -> Result<f64> {
        match self {
            GammaOrder::Factorial => falling_factorial_ratio(l, w),
        }
    }

    /// Gamma_l itself. Only the small-subset enumeration uses this.
    pub fn value(self, l: u32) -> f64 {
        match self {
            GammaOrder::Factorial => {
                let mut acc = 1.0;
                for i in 1..=l {
                    acc *= i as f64;
                }
                acc
            }
        }
    }
}

/// SPOD weight specification: smoothness degree sigma, order-factor rule,
/// and the s-by-sigma table of per-dimension per-order factors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpodWeightSpec {
    pub sigma: u32,
    pub s: usize,
    pub gamma_order: GammaOrder,
    /// Row-major: entry for dimension j (0-based) and order m (1-based)
    /// sits at `j * sigma + (m - 1)`.
    pub gamma_jm: Vec<f64>,
}

impl SpodWeightSpec {
    pub fn new(sigma: u32, s: usize, gamma_order: GammaOrder, gamma_jm: Vec<f64>) -> Result<Self> {
        if sigma == 0 {
            return Err(Error::Validation("weight spec: sigma must be >= 1".into()));
        }
        if gamma_jm.len() != s * sigma as usize {
            return Err(Error::Validation(format!(
                "weight spec: table has {} entries, expected s*sigma = {}",
                gamma_jm.len(),
                s * sigma as usize
            )));
        }
        if gamma_jm.iter().any(|g| !g.is_finite() || *g < 0.0) {
            return Err(Error::Validation(
                "weight spec: table entries must be finite and nonnegative".into(),
            ));
        }
        Ok(SpodWeightSpec {
            sigma,
            s,
            gamma_order,
            gamma_jm,
        })
    }

    /// gamma_{j,m} for 0-based dimension j and order m in 1..=sigma.
    #[inline]
    pub fn gamma(&self, j: usize, m: u32) -> f64 {
        self.gamma_jm[j * self.sigma as usize + (m - 1) as usize]
    }

    /// The row gamma_{j,1..sigma}.
    #[inline]
    pub fn gamma_row(&self, j: usize) -> &[f64] {
        let sigma = self.sigma as usize;
        &self.gamma_jm[j * sigma..(j + 1) * sigma]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("weight spec serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SpodWeightSpec = serde_json::from_str(text)?;
        SpodWeightSpec::new(spec.sigma, spec.s, spec.gamma_order, spec.gamma_jm)
    }

    /// Short content digest identifying this spec.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        hasher.update(serde_json::to_vec(self).expect("weight spec serializes"));
        let out = hasher.finalize();
        out[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Optional power-law continuation b_j = scale * j^(-beta) for j beyond
/// the explicitly stored entries.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PowerTail {
    pub scale: f64,
    pub beta: f64,
}

/// A nonincreasing, nonnegative decay sequence b_1 >= b_2 >= ... together
/// with its declared summability exponent p (sum of b_j^p finite).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecaySequence {
    b: Vec<f64>,
    p: f64,
    tail: Option<PowerTail>,
}

impl DecaySequence {
    pub fn new(b: Vec<f64>, p: f64) -> Result<Self> {
        Self::with_tail(b, p, None)
    }

    pub fn with_tail(b: Vec<f64>, p: f64, tail: Option<PowerTail>) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || p == 0.0 {
            return Err(Error::Validation(format!(
                "decay sequence: p = {p} must lie in (0, 1]"
            )));
        }
        if b.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::Validation(
                "decay sequence: entries must be finite and nonnegative".into(),
            ));
        }
        if b.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Validation(
                "decay sequence: entries must be nonincreasing".into(),
            ));
        }
        if let Some(t) = tail {
            if t.scale < 0.0 || t.beta <= 1.0 {
                return Err(Error::Validation(
                    "decay sequence: power tail needs scale >= 0 and beta > 1".into(),
                ));
            }
        }
        Ok(DecaySequence { b, p, tail })
    }

    /// b_j = scale * j^(-beta), stored to length `len` with the rule kept
    /// for continuation past the stored entries.
    pub fn power_law(scale: f64, beta: f64, len: usize, p: f64) -> Result<Self> {
        let b = (1..=len)
            .map(|j| scale * (j as f64).powf(-beta))
            .collect();
        Self::with_tail(b, p, Some(PowerTail { scale, beta }))
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn stored(&self) -> &[f64] {
        &self.b
    }

    pub fn tail(&self) -> Option<PowerTail> {
        self.tail
    }

    /// b_j for 1-based j, using the continuation rule beyond the stored
    /// prefix when present.
    pub fn value(&self, j: usize) -> Result<f64> {
        if j == 0 {
            return Err(Error::Domain("decay sequence: j is 1-based".into()));
        }
        if j <= self.b.len() {
            return Ok(self.b[j - 1]);
        }
        match self.tail {
            Some(t) => Ok(t.scale * (j as f64).powf(-t.beta)),
            None => Err(Error::Range(format!(
                "decay sequence: j = {} beyond stored length {} and no continuation rule",
                j,
                self.b.len()
            ))),
        }
    }
}

/// Builds the PDE-driven SPOD spec: sigma = alpha, Gamma_l = l!,
/// gamma_{j,m} = b_j^m S(alpha, m).
pub fn pde_spod_weights(b: &DecaySequence, alpha: u32, s: usize) -> Result<SpodWeightSpec> {
    require_even_alpha(alpha)?;
    let stirling_row: Vec<f64> = (1..=alpha)
        .map(|m| stirling2(alpha, m).map(|v| v as f64))
        .collect::<Result<_>>()?;
    let mut table = Vec::with_capacity(s * alpha as usize);
    for j in 1..=s {
        let bj = b.value(j)?;
        let mut power = 1.0;
        for m in 1..=alpha {
            power *= bj;
            table.push(power * stirling_row[(m - 1) as usize]);
        }
    }
    SpodWeightSpec::new(alpha, s, GammaOrder::Factorial, table)
}

/// gamma_u by exact enumeration of the sigma^|u| multi-index assignments.
/// Test oracle and small-s bound evaluation only.
pub fn weight_of_subset(spec: &SpodWeightSpec, u: &[usize]) -> Result<f64> {
    if u.len() > MAX_ENUMERATED_SUBSET {
        return Err(Error::Range(format!(
            "weight_of_subset: |u| = {} exceeds enumeration limit {}",
            u.len(),
            MAX_ENUMERATED_SUBSET
        )));
    }
    let mut seen = std::collections::HashSet::new();
    for &j in u {
        if j >= spec.s {
            return Err(Error::Validation(format!(
                "weight_of_subset: dimension {} outside 0..{}",
                j, spec.s
            )));
        }
        if !seen.insert(j) {
            return Err(Error::Validation("weight_of_subset: repeated dimension".into()));
        }
    }
    if u.is_empty() {
        return Ok(spec.gamma_order.value(0));
    }
    let sigma = spec.sigma;
    let mut assignment = vec![1u32; u.len()];
    let mut total = 0.0;
    loop {
        let order: u32 = assignment.iter().sum();
        let mut prod = spec.gamma_order.value(order);
        for (pos, &j) in u.iter().enumerate() {
            prod *= spec.gamma(j, assignment[pos]);
        }
        total += prod;
        // Odometer over {1..sigma}^|u|.
        let mut pos = 0;
        loop {
            if pos == assignment.len() {
                return Ok(total);
            }
            if assignment[pos] < sigma {
                assignment[pos] += 1;
                break;
            }
            assignment[pos] = 1;
            pos += 1;
        }
    }
}

/// Outcome of the s-independent error-bound series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeriesBound {
    Finite(f64),
    /// The lambda = 1 series is geometric and diverges when T >= 1.
    Divergent,
}

/// Result of `error_bound_series`: the inner-series value T and the outer
/// series sum_{l >= 0} (l!)^(lambda-1) T^l (a majorant, independent of
/// the truncation dimension, for the lambda-th power of the CBC
/// error-bound constant).
#[derive(Debug, Clone, Copy)]
pub struct ErrorBoundSeries {
    pub t: f64,
    pub bound: SeriesBound,
}

/// Evaluates T = alpha * sum_j beta_j^lambda with
/// beta_j = max(1, S_max(alpha) (2 zeta(alpha lambda))^(1/lambda)) * b_j,
/// then sums the outer series until terms drop below 1e-16 of the running
/// total. Requires alpha * lambda > 1.
pub fn error_bound_series(
    b: &DecaySequence,
    alpha: u32,
    lambda: f64,
) -> Result<ErrorBoundSeries> {
    require_even_alpha(alpha)?;
    if !(0.0..=1.0).contains(&lambda) || alpha as f64 * lambda <= 1.0 {
        return Err(Error::Domain(format!(
            "error_bound_series: need lambda in (1/alpha, 1], got lambda = {lambda}"
        )));
    }
    let smax = s_max(alpha)?;
    let zeta = riemann_zeta(alpha as f64 * lambda)?;
    let factor = (smax * (2.0 * zeta).powf(1.0 / lambda)).max(1.0);

    // sum_j (factor * b_j)^lambda over the whole sequence: stored entries
    // explicitly, power-law continuation by Euler-Maclaurin.
    let mut sum_pow = 0.0;
    for &bj in b.stored() {
        sum_pow += bj.powf(lambda);
    }
    if let Some(tail) = b.tail() {
        let from = b.stored().len() as f64 + 1.0;
        let x = tail.beta * lambda;
        if x <= 1.0 {
            return Err(Error::Domain(format!(
                "error_bound_series: tail exponent beta*lambda = {x} must exceed 1"
            )));
        }
        sum_pow += tail.scale.powf(lambda) * power_sum_from(x, from);
    }
    let t = alpha as f64 * factor.powf(lambda) * sum_pow;

    if lambda == 1.0 && t >= 1.0 {
        return Ok(ErrorBoundSeries {
            t,
            bound: SeriesBound::Divergent,
        });
    }
    // term_{l+1} / term_l = (l+1)^(lambda-1) * T.
    let mut term = 1.0;
    let mut total = 1.0;
    for l in 0..100_000u64 {
        term *= ((l + 1) as f64).powf(lambda - 1.0) * t;
        total += term;
        if !total.is_finite() {
            return Ok(ErrorBoundSeries {
                t,
                bound: SeriesBound::Finite(f64::INFINITY),
            });
        }
        if term < 1e-16 * total {
            break;
        }
    }
    Ok(ErrorBoundSeries {
        t,
        bound: SeriesBound::Finite(total),
    })
}

/// sum_{j >= from} j^(-x) for x > 1 via Euler-Maclaurin at `from`.
fn power_sum_from(x: f64, from: f64) -> f64 {
    // Sum a modest explicit stretch for accuracy, then correct the rest.
    let explicit_until = (from as u64) + 10_000;
    let mut sum = 0.0;
    let mut j = from as u64;
    while j < explicit_until {
        sum += (j as f64).powf(-x);
        j += 1;
    }
    let n = explicit_until as f64;
    sum + n.powf(1.0 - x) / (x - 1.0) + 0.5 * n.powf(-x) + x / 12.0 * n.powf(-x - 1.0)
        - x * (x + 1.0) * (x + 2.0) / 720.0 * n.powf(-x - 3.0)
}

fn s_max(alpha: u32) -> Result<f64> {
    let mut best = 0u128;
    for k in 1..=alpha {
        best = best.max(stirling2(alpha, k)?);
    }
    Ok(best as f64)
}

/// Outcome of the p = 1 admissibility test.
#[derive(Debug, Clone, Copy)]
pub struct P1Check {
    pub satisfied: bool,
    pub threshold: f64,
}

/// Checks the strict inequality
/// sum_j ||psi_j|| < sqrt(6) a_min / (2 alpha zeta(alpha) max_k S(alpha,k)),
/// which is equivalent to the lambda = 1 bound series being finite.
pub fn check_p1_condition(psi_norms_sum: f64, alpha: u32, a_min: f64) -> Result<P1Check> {
    require_even_alpha(alpha)?;
    if a_min <= 0.0 {
        return Err(Error::Domain("check_p1_condition: a_min must be positive".into()));
    }
    let threshold = 6.0f64.sqrt() * a_min
        / (2.0 * alpha as f64 * riemann_zeta(alpha as f64)? * s_max(alpha)?);
    Ok(P1Check {
        satisfied: psi_norms_sum < threshold,
        threshold,
    })
}

/// alpha = floor(1/p) + 1 for p in (0, 1].
pub fn choose_alpha(p: f64) -> Result<u32> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Domain(format!(
            "choose_alpha: p = {p} outside (0, 1]"
        )));
    }
    Ok((1.0 / p).floor() as u32 + 1)
}

/// The CBC error-bound factor
/// ((1/phi(n)) sum over nonempty u of gamma_u^lambda (2 zeta(alpha lambda))^|u|)^(1/lambda)
/// by exact subset enumeration. Only prime-power n is supported; for
/// dimensions beyond the enumeration limit use `error_bound_series`.
pub fn cbc_error_bound(spec: &SpodWeightSpec, n: u64, lambda: f64, s: usize) -> Result<f64> {
    if s > MAX_ENUMERATED_SUBSET {
        return Err(Error::Range(format!(
            "cbc_error_bound: s = {s} exceeds subset enumeration limit {MAX_ENUMERATED_SUBSET}; \
             use error_bound_series for the s-independent majorant"
        )));
    }
    if s > spec.s {
        return Err(Error::Validation(format!(
            "cbc_error_bound: s = {} exceeds weight spec dimension {}",
            s, spec.s
        )));
    }
    let alpha = spec.sigma;
    if !(0.0..=1.0).contains(&lambda) || alpha as f64 * lambda <= 1.0 {
        return Err(Error::Domain(format!(
            "cbc_error_bound: need lambda in (1/alpha, 1], got {lambda}"
        )));
    }
    if !is_prime_power(n) {
        return Err(Error::Domain(format!(
            "cbc_error_bound: n = {n} is not a prime power; general composite moduli unsupported"
        )));
    }
    let phi = crate::cbc::euler_phi(n)? as f64;
    let two_zeta = 2.0 * riemann_zeta(alpha as f64 * lambda)?;
    let mut total = 0.0;
    // Iterate nonempty subsets via bitmask.
    for mask in 1u32..(1 << s) {
        let subset: Vec<usize> = (0..s).filter(|j| mask >> j & 1 == 1).collect();
        let gamma_u = weight_of_subset(spec, &subset)?;
        total += gamma_u.powf(lambda) * two_zeta.powi(subset.len() as i32);
    }
    Ok((total / phi).powf(1.0 / lambda))
}

fn is_prime_power(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut n = n;
    let mut p = 0u64;
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            p = d;
            while n % d == 0 {
                n /= d;
            }
            return n == 1 && p >= 2;
        }
        d += 1;
    }
    true // n itself prime
}

fn require_even_alpha(alpha: u32) -> Result<()> {
    if alpha < 2 || alpha % 2 != 0 {
        return Err(Error::Domain(format!(
            "alpha = {alpha} must be an even integer >= 2"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn half_power_decay(beta: f64, s: usize) -> DecaySequence {
        DecaySequence::power_law(0.5, beta, s, 0.75).unwrap()
    }

    #[test]
    fn pde_weights_alpha2_rows() {
        let b = half_power_decay(2.0, 4);
        let spec = pde_spod_weights(&b, 2, 4).unwrap();
        for j in 0..4 {
            let bj = 0.5 * ((j + 1) as f64).powi(-2);
            // S(2,1) = S(2,2) = 1.
            assert_relative_eq!(spec.gamma(j, 1), bj, max_relative = 1e-15);
            assert_relative_eq!(spec.gamma(j, 2), bj * bj, max_relative = 1e-15);
        }
    }

    #[test]
    fn pde_weights_alpha4_second_order() {
        let b = half_power_decay(4.0, 2);
        let spec = pde_spod_weights(&b, 4, 2).unwrap();
        for j in 0..2 {
            let bj = 0.5 * ((j + 1) as f64).powi(-4);
            assert_relative_eq!(spec.gamma(j, 2), 7.0 * bj * bj, max_relative = 1e-15);
        }
        assert!(pde_spod_weights(&half_power_decay(2.0, 2), 3, 2).is_err());
    }

    #[test]
    fn empty_subset_weight_is_one() {
        let spec = pde_spod_weights(&half_power_decay(2.0, 3), 2, 3).unwrap();
        assert_eq!(weight_of_subset(&spec, &[]).unwrap(), 1.0);
    }

    #[test]
    fn singleton_weight_alpha2() {
        let spec = pde_spod_weights(&half_power_decay(2.0, 3), 2, 3).unwrap();
        for j in 0..3 {
            let bj = 0.5 * ((j + 1) as f64).powi(-2);
            assert_relative_eq!(
                weight_of_subset(&spec, &[j]).unwrap(),
                bj + 2.0 * bj * bj,
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn pair_weight_matches_explicit_enumeration() {
        // u = {1,2}, alpha = 2, b = (1/2, 1/4): four assignments by hand.
        let b = DecaySequence::new(vec![0.5, 0.25], 0.75).unwrap();
        let spec = pde_spod_weights(&b, 2, 2).unwrap();
        let (b1, b2) = (0.5f64, 0.25f64);
        let expect = 2.0 * b1 * b2
            + 6.0 * b1 * b2 * b2
            + 6.0 * b1 * b1 * b2
            + 24.0 * b1 * b1 * b2 * b2;
        assert_relative_eq!(
            weight_of_subset(&spec, &[0, 1]).unwrap(),
            expect,
            max_relative = 1e-14
        );
    }

    #[test]
    fn subset_weight_guards() {
        let spec = pde_spod_weights(&half_power_decay(2.0, 3), 2, 3).unwrap();
        assert!(weight_of_subset(&spec, &[0, 0]).is_err());
        assert!(weight_of_subset(&spec, &[5]).is_err());
        let big: Vec<usize> = (0..13).collect();
        assert!(matches!(
            weight_of_subset(&spec, &big),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn weights_monotone_in_decay() {
        let spec_small = pde_spod_weights(&half_power_decay(2.0, 3), 2, 3).unwrap();
        let bigger = DecaySequence::new(vec![0.6, 0.15, 0.06], 0.75).unwrap();
        let spec_big = pde_spod_weights(&bigger, 2, 3).unwrap();
        for mask in 1u32..8 {
            let u: Vec<usize> = (0..3).filter(|j| mask >> j & 1 == 1).collect();
            let w_small = weight_of_subset(&spec_small, &u).unwrap();
            let w_big = weight_of_subset(&spec_big, &u).unwrap();
            assert!(w_small > 0.0);
            if u.contains(&0) {
                assert!(w_big >= w_small);
            }
        }
    }

    #[test]
    fn series_geometric_case() {
        // lambda = 1 with T = 1/2 gives the geometric sum 2; T >= 1 diverges.
        // Pick b so that T = alpha * factor * b1 hits the targets exactly.
        let alpha = 2u32;
        let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
        let factor = 2.0 * zeta2; // S_max(2) = 1
        let b_half = DecaySequence::new(vec![0.5 / (2.0 * factor)], 1.0).unwrap();
        let out = error_bound_series(&b_half, alpha, 1.0).unwrap();
        assert_relative_eq!(out.t, 0.5, max_relative = 1e-12);
        match out.bound {
            SeriesBound::Finite(v) => assert_relative_eq!(v, 2.0, max_relative = 1e-12),
            SeriesBound::Divergent => panic!("expected finite"),
        }

        let b_big = DecaySequence::new(vec![1.5 / (2.0 * factor)], 1.0).unwrap();
        let out = error_bound_series(&b_big, alpha, 1.0).unwrap();
        assert_relative_eq!(out.t, 1.5, max_relative = 1e-12);
        assert_eq!(out.bound, SeriesBound::Divergent);
    }

    #[test]
    fn series_converges_for_lambda_below_one() {
        // Large T but lambda < 1: the ratio test gives convergence.
        let b = DecaySequence::new(vec![2.0, 1.0], 0.75).unwrap();
        let out = error_bound_series(&b, 2, 0.75).unwrap();
        match out.bound {
            SeriesBound::Finite(v) => assert!(v.is_finite() && v > 1.0),
            SeriesBound::Divergent => panic!("lambda < 1 never diverges"),
        }
        assert!(error_bound_series(&b, 2, 0.4).is_err()); // alpha*lambda <= 1
    }

    #[test]
    fn series_value_independent_of_truncation_point() {
        // Same power-law sequence stored to different lengths; the
        // continuation rule makes the bound identical.
        let mut values = Vec::new();
        for s in [50usize, 100, 200] {
            let b = DecaySequence::power_law(1.0, 2.0, s, 0.75).unwrap();
            let out = error_bound_series(&b, 2, 0.75).unwrap();
            match out.bound {
                SeriesBound::Finite(v) => values.push(v),
                SeriesBound::Divergent => panic!("finite expected"),
            }
        }
        for w in values.windows(2) {
            assert_relative_eq!(w[0], w[1], max_relative = 1e-12);
        }
    }

    #[test]
    fn p1_threshold_value() {
        let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
        let chk = check_p1_condition(0.1, 2, 1.0).unwrap();
        assert_relative_eq!(
            chk.threshold,
            6.0f64.sqrt() / (4.0 * zeta2),
            max_relative = 1e-12
        );
        assert!(check_p1_condition(0.0, 2, 1.0).unwrap().satisfied);
        let at = check_p1_condition(chk.threshold, 2, 1.0).unwrap();
        assert!(!at.satisfied); // strict inequality
    }

    #[test]
    fn p1_equivalent_to_geometric_convergence() {
        // For a one-term sequence the p=1 condition and T < 1 coincide.
        let alpha = 2u32;
        let a_min = 1.3;
        for psi_sum in [0.05, 0.2, 0.36, 0.37, 0.5] {
            let chk = check_p1_condition(psi_sum, alpha, a_min).unwrap();
            let b1 = psi_sum / (6.0f64.sqrt() * a_min);
            let b = DecaySequence::new(vec![b1], 1.0).unwrap();
            let out = error_bound_series(&b, alpha, 1.0).unwrap();
            let finite = matches!(out.bound, SeriesBound::Finite(_));
            assert_eq!(chk.satisfied, finite, "psi_sum={psi_sum}");
        }
    }

    #[test]
    fn alpha_selection() {
        assert_eq!(choose_alpha(0.5).unwrap(), 3);
        assert_eq!(choose_alpha(1.0).unwrap(), 2);
        assert_eq!(choose_alpha(0.34).unwrap(), 3);
        assert!(choose_alpha(0.0).is_err());
        assert!(choose_alpha(1.5).is_err());
    }

    #[test]
    fn cbc_bound_single_dimension() {
        let b = half_power_decay(2.0, 1);
        let spec = pde_spod_weights(&b, 2, 1).unwrap();
        let lambda = 1.0;
        let gamma1 = weight_of_subset(&spec, &[0]).unwrap();
        let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
        let n = 17u64;
        let want = (gamma1 * 2.0 * zeta2 / 16.0).powf(1.0 / lambda);
        assert_relative_eq!(
            cbc_error_bound(&spec, n, lambda, 1).unwrap(),
            want,
            max_relative = 1e-12
        );
    }

    #[test]
    fn cbc_bound_monotone_in_prime_n() {
        let b = half_power_decay(2.0, 2);
        let spec = pde_spod_weights(&b, 2, 2).unwrap();
        let mut last = f64::INFINITY;
        for n in [17u64, 31, 67, 127] {
            let v = cbc_error_bound(&spec, n, 1.0, 2).unwrap();
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn cbc_bound_guards() {
        let b = half_power_decay(2.0, 13);
        let spec = pde_spod_weights(&b, 2, 13).unwrap();
        assert!(matches!(
            cbc_error_bound(&spec, 17, 1.0, 13),
            Err(Error::Range(_))
        ));
        assert!(matches!(
            cbc_error_bound(&spec, 12, 1.0, 2),
            Err(Error::Domain(_))
        ));
        // Prime powers are accepted.
        assert!(cbc_error_bound(&spec, 9, 1.0, 2).is_ok());
    }

    #[test]
    fn decay_sequence_validation() {
        assert!(DecaySequence::new(vec![0.1, 0.2], 0.5).is_err()); // increasing
        assert!(DecaySequence::new(vec![0.2, 0.1], 0.0).is_err());
        assert!(DecaySequence::new(vec![0.2, -0.1], 0.5).is_err());
        let d = DecaySequence::power_law(1.0, 2.0, 3, 0.75).unwrap();
        assert_relative_eq!(d.value(5).unwrap(), 1.0 / 25.0, max_relative = 1e-15);
        let no_tail = DecaySequence::new(vec![0.2, 0.1], 0.5).unwrap();
        assert!(no_tail.value(3).is_err());
    }

    #[test]
    fn weight_spec_json_round_trip() {
        let spec = pde_spod_weights(&half_power_decay(2.0, 3), 2, 3).unwrap();
        let text = spec.to_json();
        let back = SpodWeightSpec::from_json(&text).unwrap();
        assert_eq!(back.sigma, spec.sigma);
        assert_eq!(back.s, spec.s);
        assert_eq!(back.gamma_jm, spec.gamma_jm);
        assert_eq!(back.digest(), spec.digest());
    }
}
