//! Rank-1 lattice rules: point generation, equal-weight cubature, and
//! worst-case-error evaluation.
//!
//! The worst-case error P_alpha has two independent evaluation routes:
//! the kernel route runs the per-order dynamic program along the fixed
//! generating vector (cost O(n s sigma^2)); the dual route enumerates
//! the truncated dual lattice directly from its definition and serves as
//! a test oracle, never as a production path.

use rayon::prelude::*;

use crate::cbc::pvectors_update_along;
use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;
use crate::special::omega_table;
use crate::weights::{weight_of_subset, SpodWeightSpec};

/// Maximum number of dual-lattice box points the enumeration accepts.
const DUAL_ENUM_LIMIT: u128 = 1 << 27;

/// How lattice points are mapped into the integration domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftMode {
    /// Points {k z / n} in [0,1)^s.
    UnitCube,
    /// Points {k z / n} - 1/2 in [-1/2, 1/2)^s.
    Centered,
}

/// A rank-1 lattice rule: n points generated by one integer vector.
#[derive(Debug, Clone)]
pub struct LatticeRule {
    n: u64,
    z: Vec<u64>,
    shift_mode: ShiftMode,
}

impl LatticeRule {
    pub fn new(n: u64, z: Vec<u64>, shift_mode: ShiftMode) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("lattice rule: n = {n} must be >= 2")));
        }
        if z.is_empty() {
            return Err(Error::Domain("lattice rule: empty generating vector".into()));
        }
        for (j, &zj) in z.iter().enumerate() {
            if zj == 0 || zj >= n || gcd(zj, n) != 1 {
                return Err(Error::Validation(format!(
                    "lattice rule: z_{} = {zj} is not a unit mod {n}",
                    j + 1
                )));
            }
        }
        Ok(LatticeRule { n, z, shift_mode })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn dimension(&self) -> usize {
        self.z.len()
    }

    pub fn generating_vector(&self) -> &[u64] {
        &self.z
    }

    pub fn shift_mode(&self) -> ShiftMode {
        self.shift_mode
    }

    /// Writes point k into `out` (length s). Streamed access: the full
    /// point matrix is never materialized on solver paths.
    pub fn point_into(&self, k: u64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.z.len());
        let shift = match self.shift_mode {
            ShiftMode::UnitCube => 0.0,
            ShiftMode::Centered => 0.5,
        };
        for (o, &zj) in out.iter_mut().zip(&self.z) {
            *o = ((k % self.n) * zj % self.n) as f64 / self.n as f64 - shift;
        }
    }

    /// Iterator over all n points.
    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.n).map(move |k| {
            let mut p = vec![0.0; self.z.len()];
            self.point_into(k, &mut p);
            p
        })
    }

    /// Materialized point set; small n only.
    pub fn points_vec(&self) -> Vec<Vec<f64>> {
        self.points().collect()
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Equal-weight cubature (1/n) sum_k F(y_k). Point evaluations run in
/// parallel; the reduction is a fixed pairwise tree over point index, so
/// the result is independent of the thread count.
pub fn qmc_apply<F>(rule: &LatticeRule, f: F) -> f64
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let s = rule.dimension();
    let values: Vec<f64> = (0..rule.n)
        .into_par_iter()
        .map_init(
            || vec![0.0; s],
            |buf, k| {
                rule.point_into(k, buf);
                f(buf)
            },
        )
        .collect();
    pairwise_sum(&values) / rule.n as f64
}

/// Fallible variant of [`qmc_apply`]; integrand failures are reported
/// with the offending point index attached.
pub fn try_qmc_apply<F>(rule: &LatticeRule, f: F) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let s = rule.dimension();
    let values: std::result::Result<Vec<f64>, Error> = (0..rule.n)
        .into_par_iter()
        .map_init(
            || vec![0.0; s],
            |buf, k| {
                rule.point_into(k, buf);
                f(buf).map_err(|e| Error::Solver(format!("integrand failed at point k = {k}: {e}")))
            },
        )
        .collect();
    Ok(pairwise_sum(&values?) / rule.n as f64)
}

/// Worst-case error P_alpha by the per-order dynamic program along the
/// fixed generating vector.
pub fn worst_case_error_kernel(
    rule: &LatticeRule,
    spec: &SpodWeightSpec,
    alpha: u32,
) -> Result<f64> {
    if rule.dimension() > spec.s {
        return Err(Error::Validation(format!(
            "worst_case_error_kernel: rule dimension {} exceeds weight spec dimension {}",
            rule.dimension(),
            spec.s
        )));
    }
    let n = rule.n as usize;
    let omega_at = omega_table(alpha, n)?;
    Ok(pvectors_update_along(rule.generating_vector(), rule.n, spec, &omega_at)? / rule.n as f64)
}

/// Worst-case error P_alpha from its dual-lattice definition, truncated
/// to the box 0 < |h|_inf <= h_bound:
/// sum over dual h of gamma_supp(h) * prod |h_j|^-alpha.
///
/// Monotone nondecreasing in the truncation bound; approaches the kernel
/// value from below. Test oracle only.
pub fn worst_case_error_dual(
    rule: &LatticeRule,
    spec: &SpodWeightSpec,
    alpha: u32,
    h_bound: u64,
) -> Result<f64> {
    let s = rule.dimension();
    if s > spec.s {
        return Err(Error::Validation(
            "worst_case_error_dual: rule dimension exceeds weight spec".into(),
        ));
    }
    if h_bound == 0 {
        return Err(Error::Domain("worst_case_error_dual: h_bound must be >= 1".into()));
    }
    let box_points = (2u128 * h_bound as u128 + 1).pow(s as u32);
    if s > 3 || box_points > DUAL_ENUM_LIMIT {
        return Err(Error::Range(format!(
            "worst_case_error_dual: enumeration of {box_points} box points (s = {s}, H = {h_bound}) too large"
        )));
    }
    if alpha < 2 || alpha % 2 != 0 {
        return Err(Error::Domain(format!(
            "worst_case_error_dual: alpha = {alpha} must be an even integer >= 2"
        )));
    }
    // gamma_u for every nonempty subset of coordinates.
    let mut gamma = vec![0.0; 1 << s];
    for mask in 1usize..1 << s {
        let subset: Vec<usize> = (0..s).filter(|j| mask >> j & 1 == 1).collect();
        gamma[mask] = weight_of_subset(spec, &subset)?;
    }

    let n = rule.n as i64;
    let z: Vec<i64> = rule.generating_vector().iter().map(|&v| v as i64).collect();
    let h = h_bound as i64;

    // Depth-first over components, carrying the dot product mod n, the
    // support mask, and the product of |h_j|^-alpha.
    fn descend(
        dim: usize,
        s: usize,
        dot_mod: i64,
        mask: usize,
        prod: f64,
        h: i64,
        n: i64,
        z: &[i64],
        gamma: &[f64],
        alpha: i32,
        acc: &mut f64,
    ) {
        if dim == s {
            if mask != 0 && dot_mod == 0 {
                *acc += gamma[mask] * prod;
            }
            return;
        }
        for hj in -h..=h {
            let dot = (dot_mod + (hj.rem_euclid(n)) * z[dim]).rem_euclid(n);
            if hj == 0 {
                descend(dim + 1, s, dot, mask, prod, h, n, z, gamma, alpha, acc);
            } else {
                let fac = (hj.abs() as f64).powi(-alpha);
                descend(
                    dim + 1,
                    s,
                    dot,
                    mask | 1 << dim,
                    prod * fac,
                    h,
                    n,
                    z,
                    gamma,
                    alpha,
                    acc,
                );
            }
        }
    }

    let mut acc = 0.0;
    descend(0, s, 0, 0, 1.0, h, n, &z, &gamma, alpha as i32, &mut acc);
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cbc::cbc_naive;
    use crate::weights::{pde_spod_weights, DecaySequence};
    use approx::assert_relative_eq;

    fn spec_for(beta: f64, alpha: u32, s: usize) -> SpodWeightSpec {
        let b = DecaySequence::power_law(0.5, beta, s, 0.75).unwrap();
        pde_spod_weights(&b, alpha, s).unwrap()
    }

    #[test]
    fn point_values() {
        let rule = LatticeRule::new(4, vec![1, 3], ShiftMode::UnitCube).unwrap();
        let pts = rule.points_vec();
        assert_eq!(pts[1], vec![0.25, 0.75]);
        assert_eq!(pts[0], vec![0.0, 0.0]);
        let centered = LatticeRule::new(4, vec![1, 3], ShiftMode::Centered).unwrap();
        assert_eq!(centered.points_vec()[0], vec![-0.5, -0.5]);
    }

    #[test]
    fn point_set_invariant_under_unit_scaling() {
        let n = 5u64;
        let base = LatticeRule::new(n, vec![1, 2], ShiftMode::UnitCube).unwrap();
        for c in [2u64, 3, 4] {
            let scaled = LatticeRule::new(
                n,
                vec![c % n, (2 * c) % n],
                ShiftMode::UnitCube,
            )
            .unwrap();
            let mut a = base.points_vec();
            let mut b = scaled.points_vec();
            let key = |p: &Vec<f64>| {
                p.iter()
                    .map(|x| (x * n as f64).round() as u64)
                    .collect::<Vec<_>>()
            };
            a.sort_by_key(key);
            b.sort_by_key(key);
            assert_eq!(a, b, "c = {c}");
        }
    }

    #[test]
    fn rejects_non_units() {
        assert!(LatticeRule::new(4, vec![2], ShiftMode::UnitCube).is_err());
        assert!(LatticeRule::new(1, vec![1], ShiftMode::UnitCube).is_err());
    }

    #[test]
    fn cubature_of_constant_is_exact() {
        let rule = LatticeRule::new(17, vec![1, 5], ShiftMode::UnitCube).unwrap();
        assert_relative_eq!(qmc_apply(&rule, |_| 1.0), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn dual_mode_is_integrated_as_constant() {
        // exp(2 pi i h.y) with h in the dual lattice: the rule sums it to
        // 1, not to the true integral 0.
        let n = 17u64;
        let rule = LatticeRule::new(n, vec![1, 5], ShiftMode::UnitCube).unwrap();
        // h = (12, 1): 12*1 + 1*5 = 17 = 0 mod 17.
        let h = [12.0, 1.0];
        let tau = 2.0 * std::f64::consts::PI;
        let re = qmc_apply(&rule, |y| (tau * (h[0] * y[0] + h[1] * y[1])).cos());
        let im = qmc_apply(&rule, |y| (tau * (h[0] * y[0] + h[1] * y[1])).sin());
        assert_relative_eq!(re, 1.0, epsilon = 1e-12);
        assert_relative_eq!(im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn full_period_sine_sums_to_zero() {
        let rule = LatticeRule::new(31, vec![1], ShiftMode::UnitCube).unwrap();
        let v = qmc_apply(&rule, |y| (2.0 * std::f64::consts::PI * y[0]).sin());
        assert!(v.abs() < 1e-14);
    }

    #[test]
    fn nondual_trigonometric_polynomial_integrated_exactly() {
        // Spectrum {e_1, e_2, (1,1)} misses the dual lattice of z=(1,5),
        // n=17 entirely, so the rule integrates the polynomial exactly.
        let rule = LatticeRule::new(17, vec![1, 5], ShiftMode::UnitCube).unwrap();
        let tau = 2.0 * std::f64::consts::PI;
        let f = |y: &[f64]| {
            1.25 + (tau * y[0]).cos() + 0.5 * (tau * y[1]).sin()
                + 0.25 * (tau * (y[0] + y[1])).cos()
        };
        assert_relative_eq!(qmc_apply(&rule, f), 1.25, epsilon = 1e-13);
    }

    #[test]
    fn integrand_failure_reports_point_index() {
        let rule = LatticeRule::new(5, vec![1], ShiftMode::UnitCube).unwrap();
        let err = try_qmc_apply(&rule, |y| {
            if y[0] > 0.5 {
                Err(Error::Validation("boom".into()))
            } else {
                Ok(1.0)
            }
        })
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("point k ="), "{msg}");
    }

    #[test]
    fn kernel_single_dimension_closed_form() {
        for alpha in [2u32, 4] {
            let spec = spec_for(alpha as f64, alpha, 1);
            let n = 17u64;
            let rule = LatticeRule::new(n, vec![1], ShiftMode::UnitCube).unwrap();
            let got = worst_case_error_kernel(&rule, &spec, alpha).unwrap();
            let gamma1 = crate::weights::weight_of_subset(&spec, &[0]).unwrap();
            let zeta = crate::special::riemann_zeta(alpha as f64).unwrap();
            let want = gamma1 * 2.0 * zeta / (n as f64).powi(alpha as i32);
            assert_relative_eq!(got, want, max_relative = 1e-12);
        }
    }

    #[test]
    fn kernel_matches_subset_sum_evaluation() {
        // Direct P_alpha from the subset-sum definition; independent of
        // the dynamic program.
        for (n, s, alpha) in [(17u64, 2usize, 2u32), (31, 3, 2), (17, 3, 4)] {
            let spec = spec_for(alpha as f64, alpha, s);
            let gv = cbc_naive(n, s, &spec, alpha).unwrap();
            let rule = LatticeRule::new(n, gv.z.clone(), ShiftMode::UnitCube).unwrap();
            let omega_at = omega_table(alpha, n as usize).unwrap();
            let mut direct = 0.0;
            for k in 0..n {
                for mask in 1u32..(1 << s) {
                    let subset: Vec<usize> =
                        (0..s).filter(|j| mask >> j & 1 == 1).collect();
                    let gamma = weight_of_subset(&spec, &subset).unwrap();
                    let mut prod = 1.0;
                    for &j in &subset {
                        prod *= omega_at[((k * gv.z[j]) % n) as usize];
                    }
                    direct += gamma * prod;
                }
            }
            direct /= n as f64;
            let kernel = worst_case_error_kernel(&rule, &spec, alpha).unwrap();
            assert_relative_eq!(kernel, direct, max_relative = 1e-12);
        }
    }

    #[test]
    fn kernel_zero_weights_zero_error() {
        let spec = SpodWeightSpec::new(
            2,
            2,
            crate::weights::GammaOrder::Factorial,
            vec![0.0; 4],
        )
        .unwrap();
        let rule = LatticeRule::new(17, vec![1, 5], ShiftMode::UnitCube).unwrap();
        assert_eq!(worst_case_error_kernel(&rule, &spec, 2).unwrap(), 0.0);
    }

    #[test]
    fn dual_single_dimension_structure() {
        let spec = spec_for(2.0, 2, 1);
        let n = 17u64;
        let rule = LatticeRule::new(n, vec![1], ShiftMode::UnitCube).unwrap();
        // Below the first dual point there is nothing.
        assert_eq!(worst_case_error_dual(&rule, &spec, 2, n - 1).unwrap(), 0.0);
        // With H = m*n the sum counts multiples of n up to m.
        let gamma1 = weight_of_subset(&spec, &[0]).unwrap();
        for m in [1u64, 4, 11] {
            let got = worst_case_error_dual(&rule, &spec, 2, m * n).unwrap();
            let want = 2.0 * gamma1 / (n as f64).powi(2)
                * (1..=m).map(|t| 1.0 / (t * t) as f64).sum::<f64>();
            assert_relative_eq!(got, want, max_relative = 1e-12);
        }
    }

    #[test]
    fn dual_monotone_and_approaches_kernel_from_below() {
        let spec = spec_for(2.0, 2, 2);
        let n = 17u64;
        let gv = cbc_naive(n, 2, &spec, 2).unwrap();
        let rule = LatticeRule::new(n, gv.z, ShiftMode::UnitCube).unwrap();
        let kernel = worst_case_error_kernel(&rule, &spec, 2).unwrap();
        let mut last = 0.0;
        for h in [17u64, 60, 200, 700, 2000] {
            let v = worst_case_error_dual(&rule, &spec, 2, h).unwrap();
            assert!(v >= last, "monotone in H");
            assert!(v <= kernel * (1.0 + 1e-12), "below the limit");
            last = v;
        }
        // The gap shrinks with H roughly like H^(1-alpha).
        let g1 = kernel - worst_case_error_dual(&rule, &spec, 2, 200).unwrap();
        let g2 = kernel - worst_case_error_dual(&rule, &spec, 2, 2000).unwrap();
        assert!(g2 < g1 / 5.0, "gap {g1} -> {g2}");
    }

    #[test]
    fn dual_enumeration_guard() {
        let spec = spec_for(2.0, 2, 4);
        let rule = LatticeRule::new(17, vec![1, 3, 5, 7], ShiftMode::UnitCube).unwrap();
        assert!(matches!(
            worst_case_error_dual(&rule, &spec, 2, 10),
            Err(Error::Range(_))
        ));
    }
}
