//! Multi-indices with finite support and the closed-form identity check
//! for the derivative-bound recurrence.

use crate::error::{Error, Result};
use crate::special::{binomial, stirling2};

/// A multi-index: a finitely supported sequence of nonnegative integers.
/// Trailing zeros are trimmed on construction so equality is canonical.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    entries: Vec<u32>,
}

impl MultiIndex {
    pub fn new(mut entries: Vec<u32>) -> Self {
        while entries.last() == Some(&0) {
            entries.pop();
        }
        MultiIndex { entries }
    }

    pub fn zero() -> Self {
        MultiIndex { entries: Vec::new() }
    }

    /// Unit multi-index e_j (0-based position).
    pub fn unit(j: usize) -> Self {
        let mut entries = vec![0; j + 1];
        entries[j] = 1;
        MultiIndex { entries }
    }

    /// Order |nu| = sum of the entries.
    pub fn order(&self) -> u32 {
        self.entries.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, j: usize) -> u32 {
        self.entries.get(j).copied().unwrap_or(0)
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    /// Support: positions (0-based) with nonzero entry.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .map(|(j, _)| j)
    }

    /// Componentwise partial order: self <= other.
    pub fn le(&self, other: &MultiIndex) -> bool {
        (0..self.len()).all(|j| self.get(j) <= other.get(j))
    }

    /// All multi-indices m <= self, in odometer order.
    pub fn sub_indices(&self) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; self.len()];
        loop {
            out.push(MultiIndex::new(cur.clone()));
            let mut j = 0;
            loop {
                if j == cur.len() {
                    return out;
                }
                if cur[j] < self.entries[j] {
                    cur[j] += 1;
                    break;
                }
                cur[j] = 0;
                j += 1;
            }
        }
    }
}

/// Both sides of the regularity identity.
#[derive(Debug, Clone, Copy)]
pub struct RegularityCheck {
    /// Value obtained by running the recurrence with equalities:
    /// A_0 = B, A_nu = sum_j sum_{k=1}^{nu_j} C(nu_j,k) c^k Y_j A_{nu - k e_j}.
    pub recursive_value: f64,
    /// The Stirling closed form:
    /// c^|nu| B sum_{m <= nu} |m|! Y^m prod_i S(nu_i, m_i).
    pub closed_form: f64,
}

/// Evaluates the recurrence-with-equalities and the Stirling closed form
/// for the same data; the two agree identically.
pub fn verify_regularity_identity(
    b: f64,
    c: f64,
    upsilon: &[f64],
    nu: &MultiIndex,
) -> Result<RegularityCheck> {
    if nu.len() > upsilon.len() {
        return Err(Error::Validation(format!(
            "verify_regularity_identity: nu has support up to position {} but only {} factors given",
            nu.len(),
            upsilon.len()
        )));
    }
    if nu.order() > 10 {
        return Err(Error::Range(format!(
            "verify_regularity_identity: |nu| = {} exceeds exact recursion range (<= 10)",
            nu.order()
        )));
    }

    // Dynamic program over all m <= nu, in increasing order so every
    // A_{nu - k e_j} is already available.
    let subs = nu.sub_indices();
    let mut order_sorted = subs.clone();
    order_sorted.sort_by_key(|m| m.order());
    let mut table: std::collections::HashMap<MultiIndex, f64> = std::collections::HashMap::new();
    for m in &order_sorted {
        if m.order() == 0 {
            table.insert(m.clone(), b);
            continue;
        }
        let mut acc = 0.0;
        for j in 0..m.len() {
            let mj = m.get(j);
            for k in 1..=mj {
                let mut lower = m.entries().to_vec();
                lower[j] = mj - k;
                let prev = table[&MultiIndex::new(lower)];
                acc += binomial(mj, k) as f64 * c.powi(k as i32) * upsilon[j] * prev;
            }
        }
        table.insert(m.clone(), acc);
    }
    let recursive_value = table[nu];

    // Closed form.
    let mut sum = 0.0;
    for m in &subs {
        let mut prod = 1.0;
        for j in 0..nu.len() {
            prod *= stirling2(nu.get(j), m.get(j))? as f64;
            if m.get(j) > 0 {
                prod *= upsilon[j].powi(m.get(j) as i32);
            }
        }
        let mut fact = 1.0;
        for i in 1..=m.order() {
            fact *= i as f64;
        }
        sum += fact * prod;
    }
    let closed_form = c.powi(nu.order() as i32) * b * sum;

    Ok(RegularityCheck {
        recursive_value,
        closed_form,
    })
}
