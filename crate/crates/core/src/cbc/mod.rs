//! Component-by-component construction of rank-1 lattice generating
//! vectors under SPOD weights.
//!
//! Two construction paths share one dynamic program (see [`pvectors`]):
//!
//! - `cbc_naive` evaluates the criterion for every candidate by direct
//!   summation; any modulus n >= 2 at small scale.
//! - `cbc_fast` reorders candidates and lattice indices by powers of a
//!   primitive root, which turns the kernel matrix into a circulant and
//!   reduces each dimension's candidate sweep to one FFT-sized cyclic
//!   correlation; odd prime n only.
//!
//! Both paths select identical components: candidate values within a
//! small relative window of the minimum are treated as ties (the kernel
//! symmetry omega(x) = omega(1-x) makes z and n-z tie exactly in exact
//! arithmetic) and the smallest candidate wins. The recorded step value
//! is recomputed by direct summation for the selected candidate, so the
//! two paths also agree on step values bit-for-bit.

mod fft;
mod pvectors;

pub use fft::convolve_cyclic;

use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::special::omega_table;
use crate::weights::SpodWeightSpec;
use fft::FixedKernelCorrelator;
use pvectors::PVectors;

/// Candidates within this relative distance of the criterion minimum are
/// treated as exact ties and broken toward the smallest z.
const TIE_RELATIVE_WINDOW: f64 = 1e-9;

/// Size guards for the direct path.
const NAIVE_MAX_N: u64 = 4096;
const NAIVE_MAX_S: usize = 64;

/// A rank-1 lattice generating vector together with the per-dimension
/// criterion values recorded during construction.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratingVector {
    pub n: u64,
    pub alpha: u32,
    pub z: Vec<u64>,
    /// P(z_1..z_t) for t = 1..s.
    pub step_values: Vec<f64>,
    /// Digest of the weight spec used for the construction.
    pub weight_digest: String,
}

/// Working-memory accounting for a fast construction.
#[derive(Debug, Clone, Copy)]
pub struct CbcStats {
    /// Doubles held by the per-order state vectors: (sigma * s + 1) * n.
    pub pvector_doubles: usize,
    /// Doubles (equivalent) in all transient per-step buffers.
    pub scratch_doubles: usize,
}

/// Units modulo n in ascending order.
pub fn units_mod(n: u64) -> Result<Vec<u64>> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "units_mod: n = {n} admits no lattice rule (need n >= 2)"
        )));
    }
    Ok((1..n).filter(|&u| gcd(u, n) == 1).collect())
}

/// Euler's totient.
pub fn euler_phi(n: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::Domain("euler_phi: n must be positive".into()));
    }
    let mut n = n;
    let mut phi = 1u64;
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            let mut pk = 1u64;
            n /= d;
            while n % d == 0 {
                pk *= d;
                n /= d;
            }
            phi *= pk * (d - 1);
        }
        d += 1;
    }
    if n > 1 {
        phi *= n - 1;
    }
    Ok(phi)
}

/// Deterministic trial-division primality test.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn mod_pow(mut base: u64, mut exp: u64, modulus: u64) -> u64 {
    let mut result = 1u64;
    base %= modulus;
    while exp > 0 {
        if exp & 1 == 1 {
            result = ((result as u128 * base as u128) % modulus as u128) as u64;
        }
        exp >>= 1;
        base = ((base as u128 * base as u128) % modulus as u128) as u64;
    }
    result
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Smallest primitive root modulo an odd prime n: the powers
/// g^0 .. g^(n-2) enumerate the units.
pub fn primitive_root(n: u64) -> Result<u64> {
    if n < 3 || !is_prime(n) {
        return Err(Error::Domain(format!(
            "primitive_root: n = {n} is not an odd prime"
        )));
    }
    let factors = prime_factors(n - 1);
    'outer: for g in 2..n {
        for &q in &factors {
            if mod_pow(g, (n - 1) / q, n) == 1 {
                continue 'outer;
            }
        }
        return Ok(g);
    }
    unreachable!("every odd prime has a primitive root")
}

fn validate_common(n: u64, s: usize, spec: &SpodWeightSpec, alpha: u32) -> Result<()> {
    if n < 2 {
        return Err(Error::Domain(format!("cbc: n = {n} must be >= 2")));
    }
    if n >= 1 << 31 {
        return Err(Error::Range(format!("cbc: n = {n} exceeds 2^31")));
    }
    if s == 0 {
        return Err(Error::Domain("cbc: s must be >= 1".into()));
    }
    if s > spec.s {
        return Err(Error::Validation(format!(
            "cbc: requested dimension {s} exceeds weight spec dimension {}",
            spec.s
        )));
    }
    if spec.sigma != alpha {
        return Err(Error::Validation(format!(
            "cbc: weight smoothness degree sigma = {} does not match kernel alpha = {alpha}",
            spec.sigma
        )));
    }
    Ok(())
}

/// Direct criterion sweep: value for candidate z is
/// sum_k omega((k z mod n)/n) x(k), all candidates by explicit loops.
struct NaiveSweep<'a> {
    units: &'a [u64],
    omega_at: &'a [f64],
    n: u64,
}

impl NaiveSweep<'_> {
    fn values(&self, x: &[f64], out: &mut Vec<(u64, f64)>) {
        out.clear();
        for &z in self.units {
            out.push((z, criterion_dot(z, self.n, self.omega_at, x)));
        }
    }
}

/// One candidate's criterion by direct summation over all k (identical
/// code on both construction paths; this is what step values use).
fn criterion_dot(z: u64, n: u64, omega_at: &[f64], x: &[f64]) -> f64 {
    let mut acc = 0.0;
    for k in 0..n {
        acc += omega_at[((k * z) % n) as usize] * x[k as usize];
    }
    acc
}

/// Primitive-root sweep: candidates ordered as z = g^-i so the kernel
/// matrix over (i, j) with k = g^j is circulant; one cyclic correlation
/// yields all candidate values. The k = 0 column is constant omega(0)
/// and is folded in analytically, keeping the correlation length n - 1.
struct FastSweep {
    n: u64,
    /// g^t mod n for t = 0..n-2.
    root_powers: Vec<u64>,
    correlator: FixedKernelCorrelator,
    omega_zero: f64,
    xp: Vec<f64>,
}

impl FastSweep {
    fn new(n: u64, omega_at: &[f64]) -> Result<Self> {
        let g = primitive_root(n)?;
        let m = (n - 1) as usize;
        let mut root_powers = Vec::with_capacity(m);
        let mut acc = 1u64;
        for _ in 0..m {
            root_powers.push(acc);
            acc = (acc as u128 * g as u128 % n as u128) as u64;
        }
        let kernel: Vec<f64> = root_powers
            .iter()
            .map(|&k| omega_at[k as usize])
            .collect();
        Ok(FastSweep {
            n,
            root_powers,
            correlator: FixedKernelCorrelator::new(&kernel)?,
            omega_zero: omega_at[0],
            xp: vec![0.0; m],
        })
    }

    fn values(&mut self, x: &[f64], out: &mut Vec<(u64, f64)>) {
        let m = self.root_powers.len();
        for (j, &k) in self.root_powers.iter().enumerate() {
            self.xp[j] = x[k as usize];
        }
        let corr = self.correlator.correlate(&self.xp);
        let constant = self.omega_zero * x[0];
        out.clear();
        for (i, &c) in corr.iter().enumerate() {
            let z = self.root_powers[(m - i) % m];
            out.push((z, c + constant));
        }
    }
}

/// Smallest candidate within the tie window of the criterion minimum.
fn select_candidate(values: &[(u64, f64)]) -> Result<u64> {
    let mut best = f64::INFINITY;
    for &(_, v) in values {
        if v < best {
            best = v;
        }
    }
    if !best.is_finite() {
        return Err(Error::Solver(
            "cbc: criterion accumulation overflowed; weights too large".into(),
        ));
    }
    let window = best + TIE_RELATIVE_WINDOW * best.abs() + 1e-300;
    let mut chosen = u64::MAX;
    for &(z, v) in values {
        if v <= window && z < chosen {
            chosen = z;
        }
    }
    Ok(chosen)
}

enum SweepKind<'a> {
    Naive(NaiveSweep<'a>),
    Fast(FastSweep),
}

fn construct(
    n: u64,
    s: usize,
    spec: &SpodWeightSpec,
    alpha: u32,
    mut sweep: SweepKind<'_>,
    omega_at: &[f64],
) -> Result<(GeneratingVector, CbcStats)> {
    let nn = n as usize;
    let mut pv = PVectors::new(nn, spec.sigma, spec.gamma_order);
    let mut x = vec![0.0; nn];
    let mut omega_row = vec![0.0; nn];
    let mut values: Vec<(u64, f64)> = Vec::new();
    let mut z = Vec::with_capacity(s);
    let mut step_values = Vec::with_capacity(s);

    for t in 0..s {
        let gamma_row = spec.gamma_row(t);
        pv.assemble_x(gamma_row, &mut x)?;
        match &mut sweep {
            SweepKind::Naive(nv) => nv.values(&x, &mut values),
            SweepKind::Fast(fs) => fs.values(&x, &mut values),
        }
        let zt = select_candidate(&values)?;
        // The step value is recomputed directly so both sweeps report
        // identical numbers.
        let t2 = criterion_dot(zt, n, omega_at, &x);
        let base = pv.criterion_base();
        step_values.push((base + t2) / n as f64);
        for k in 0..n {
            omega_row[k as usize] = omega_at[((k * zt) % n) as usize];
        }
        pv.update(&omega_row, gamma_row)?;
        z.push(zt);
    }

    let scratch = x.len()
        + omega_row.len()
        + omega_at.len()
        + 2 * values.len()
        + match &sweep {
            // permuted x + kernel spectrum + two complex FFT buffers
            SweepKind::Fast(fs) => 7 * fs.xp.len(),
            SweepKind::Naive(_) => 0,
        };
    let stats = CbcStats {
        pvector_doubles: pv.storage_doubles(),
        scratch_doubles: scratch,
    };
    Ok((
        GeneratingVector {
            n,
            alpha,
            z,
            step_values,
            weight_digest: spec.digest(),
        },
        stats,
    ))
}

/// CBC construction by direct loops over candidates and lattice indices.
/// Reference path; any n >= 2 within the size guards.
pub fn cbc_naive(n: u64, s: usize, spec: &SpodWeightSpec, alpha: u32) -> Result<GeneratingVector> {
    validate_common(n, s, spec, alpha)?;
    if n > NAIVE_MAX_N || s > NAIVE_MAX_S {
        return Err(Error::Range(format!(
            "cbc_naive: n = {n}, s = {s} beyond direct-loop guards (n <= {NAIVE_MAX_N}, s <= {NAIVE_MAX_S}); use cbc_fast"
        )));
    }
    let omega_at = omega_table(alpha, n as usize)?;
    let units = units_mod(n)?;
    let sweep = SweepKind::Naive(NaiveSweep {
        units: &units,
        omega_at: &omega_at,
        n,
    });
    construct(n, s, spec, alpha, sweep, &omega_at).map(|(gv, _)| gv)
}

/// Fast CBC construction for odd prime n.
pub fn cbc_fast(n: u64, s: usize, spec: &SpodWeightSpec, alpha: u32) -> Result<GeneratingVector> {
    cbc_fast_with_stats(n, s, spec, alpha).map(|(gv, _)| gv)
}

/// Fast CBC construction, also reporting working-memory accounting.
pub fn cbc_fast_with_stats(
    n: u64,
    s: usize,
    spec: &SpodWeightSpec,
    alpha: u32,
) -> Result<(GeneratingVector, CbcStats)> {
    validate_common(n, s, spec, alpha)?;
    if n == 2 || !is_prime(n) {
        return Err(Error::Domain(format!(
            "cbc_fast: n = {n} is not an odd prime; use cbc_naive"
        )));
    }
    let omega_at = omega_table(alpha, n as usize)?;
    let sweep = SweepKind::Fast(FastSweep::new(n, &omega_at)?);
    construct(n, s, spec, alpha, sweep, &omega_at)
}

/// Runs the per-order recursion along a fixed generating vector and
/// returns sum_k sum_{l >= 1} p_{s,l}(k); the caller divides by n to get
/// the worst-case error.
pub(crate) fn pvectors_update_along(
    z: &[u64],
    n: u64,
    spec: &SpodWeightSpec,
    omega_at: &[f64],
) -> Result<f64> {
    let nn = n as usize;
    let mut pv = PVectors::new(nn, spec.sigma, spec.gamma_order);
    let mut omega_row = vec![0.0; nn];
    for (t, &zt) in z.iter().enumerate() {
        for k in 0..n {
            omega_row[k as usize] = omega_at[((k * zt) % n) as usize];
        }
        pv.update(&omega_row, spec.gamma_row(t))?;
    }
    Ok(pv.criterion_base())
}

impl GeneratingVector {
    /// Writes the text format: header `n s alpha`, then one line
    /// `j z_j P_j` per dimension with P_j at 17 significant digits.
    pub fn write_file(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        out.push_str(&format!("{} {} {}\n", self.n, self.z.len(), self.alpha));
        for (i, (&zj, &pj)) in self.z.iter().zip(&self.step_values).enumerate() {
            out.push_str(&format!("{} {} {:.16e}\n", i + 1, zj, pj));
        }
        let mut file = std::fs::File::create(path)?;
        file.write_all(out.as_bytes())?;
        Ok(())
    }

    pub fn read_file(path: &Path) -> Result<GeneratingVector> {
        let file = std::fs::File::open(path)?;
        let mut lines = std::io::BufReader::new(file).lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("vector file: empty".into()))??;
        let head: Vec<&str> = header.split_whitespace().collect();
        if head.len() != 3 {
            return Err(Error::Parse("vector file: header must be 'n s alpha'".into()));
        }
        let n: u64 = parse_field(head[0], "n")?;
        let s: usize = parse_field(head[1], "s")?;
        let alpha: u32 = parse_field(head[2], "alpha")?;
        let mut z = Vec::with_capacity(s);
        let mut step_values = Vec::with_capacity(s);
        for want in 1..=s {
            let line = lines.next().ok_or_else(|| {
                Error::Parse(format!("vector file: missing line for dimension {want}"))
            })??;
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(Error::Parse(format!(
                    "vector file: dimension {want}: expected 'j z_j P_j'"
                )));
            }
            let j: usize = parse_field(parts[0], "j")?;
            if j != want {
                return Err(Error::Parse(format!(
                    "vector file: expected dimension {want}, found {j}"
                )));
            }
            let zj: u64 = parse_field(parts[1], "z_j")?;
            if zj == 0 || zj >= n || gcd(zj, n) != 1 {
                return Err(Error::Validation(format!(
                    "vector file: z_{j} = {zj} is not a unit mod {n}"
                )));
            }
            z.push(zj);
            step_values.push(parse_field::<f64>(parts[2], "P_j")?);
        }
        Ok(GeneratingVector {
            n,
            alpha,
            z,
            step_values,
            weight_digest: String::new(),
        })
    }
}

fn parse_field<T: std::str::FromStr>(text: &str, name: &str) -> Result<T> {
    text.parse()
        .map_err(|_| Error::Parse(format!("vector file: bad {name}: '{text}'")))
}
