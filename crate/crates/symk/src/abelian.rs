//! Finite(ly generated) abelian groups as invariant-factor lists, computed
//! from integer relation matrices or from explicit element enumerations.

use crate::intmat::{smith_normal_form, IntMatrix};
use crate::num::factor_u64;
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;

/// Invariant factors d_1 | d_2 | ... | d_r with each d_i >= 2, followed by
/// zeros encoding free Z summands. The representation is unique.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FinAbGroup {
    factors: Vec<u64>,
}

impl fmt::Debug for FinAbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for FinAbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|&d| {
                if d == 0 {
                    "Z".to_string()
                } else {
                    format!("Z/{d}")
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl FinAbGroup {
    pub fn trivial() -> FinAbGroup {
        FinAbGroup { factors: vec![] }
    }

    pub fn free(rank: usize) -> FinAbGroup {
        FinAbGroup {
            factors: vec![0; rank],
        }
    }

    pub fn cyclic(n: u64) -> FinAbGroup {
        if n <= 1 {
            FinAbGroup::trivial()
        } else {
            FinAbGroup { factors: vec![n] }
        }
    }

    /// Normalize an arbitrary list of cyclic orders into invariant factors
    /// (1s dropped, divisibility chain enforced, zeros = free ranks last).
    pub fn from_orders(orders: &[u64]) -> FinAbGroup {
        let n = orders.len();
        let mut m = IntMatrix::zero(n, n);
        for (i, &d) in orders.iter().enumerate() {
            m[(i, i)] = BigInt::from(d);
        }
        FinAbGroup::cokernel_of_columns(&m, n)
    }

    /// Cokernel of the column span of `m` inside Z^target_rank.
    pub fn cokernel_of_columns(m: &IntMatrix, target_rank: usize) -> FinAbGroup {
        assert_eq!(m.rows, target_rank);
        let snf = smith_normal_form(m, false);
        let mut factors: Vec<u64> = Vec::new();
        let mut nonzero = 0usize;
        for d in &snf.diag {
            if d.is_zero() {
                continue;
            }
            nonzero += 1;
            if !d.is_one() {
                factors.push(d.to_u64().expect("invariant factor fits u64"));
            }
        }
        factors.extend(std::iter::repeat(0).take(target_rank - nonzero));
        FinAbGroup { factors }
    }

    /// Quotient of Z^cols by the row span of `m`.
    pub fn quotient_by_rows(m: &IntMatrix) -> FinAbGroup {
        FinAbGroup::cokernel_of_columns(&m.transpose(), m.cols)
    }

    pub fn invariant_factors(&self) -> &[u64] {
        &self.factors
    }

    pub fn is_trivial(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn free_rank(&self) -> usize {
        self.factors.iter().filter(|&&d| d == 0).count()
    }

    /// Order of the group; None when infinite.
    pub fn order(&self) -> Option<BigInt> {
        if self.free_rank() > 0 {
            return None;
        }
        Some(
            self.factors
                .iter()
                .fold(BigInt::one(), |acc, &d| acc * BigInt::from(d)),
        )
    }

    pub fn direct_sum(&self, other: &FinAbGroup) -> FinAbGroup {
        let mut all: Vec<u64> = self
            .factors
            .iter()
            .chain(other.factors.iter())
            .cloned()
            .collect();
        // re-normalize: nonzero parts through from_orders, zeros appended
        let frees = all.iter().filter(|&&d| d == 0).count();
        all.retain(|&d| d != 0);
        let mut g = FinAbGroup::from_orders(&all);
        g.factors.extend(std::iter::repeat(0).take(frees));
        g
    }
}

/// Group structure of an explicitly enumerated finite abelian group, from
/// torsion counting: for each prime l dividing the exponent, the counts of
/// l^k-torsion elements determine the partition of the l-part.
pub fn structure_from_enumeration<T, F>(elements: &[T], op: F, identity: &T) -> FinAbGroup
where
    T: Clone + Eq + Hash,
    F: Fn(&T, &T) -> T,
{
    let n = elements.len() as u64;
    if n <= 1 {
        return FinAbGroup::trivial();
    }
    let pow = |base: &T, mut e: u64| -> T {
        let mut acc = identity.clone();
        let mut b = base.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = op(&acc, &b);
            }
            b = op(&b, &b);
            e >>= 1;
        }
        acc
    };
    // partitions per prime: parts[l][k] = number of cyclic factors with
    // l-exponent at least k+1, read off torsion counts
    let mut per_prime: HashMap<u64, Vec<u32>> = HashMap::new();
    for (l, e_max) in factor_u64(n) {
        let mut prev_log = 0u32;
        let mut col_heights: Vec<u32> = Vec::new();
        for k in 1..=e_max {
            let lk = l.pow(k);
            let count = elements
                .iter()
                .filter(|x| pow(x, lk) == *identity)
                .count() as u64;
            // count = l^(sum of min(k, a_i)); successive log differences
            // give the number of a_i >= k
            let mut log = 0u32;
            let mut c = count;
            while c % l == 0 {
                c /= l;
                log += 1;
            }
            let at_least_k = log - prev_log;
            col_heights.push(at_least_k);
            prev_log = log;
            if at_least_k == 0 {
                break;
            }
        }
        // convert "number with exponent >= k" into exponents per factor
        let m = col_heights.first().copied().unwrap_or(0) as usize;
        let mut exps = vec![0u32; m];
        for (k_idx, &cnt) in col_heights.iter().enumerate() {
            for e in exps.iter_mut().take(cnt as usize) {
                *e = (k_idx + 1) as u32;
            }
        }
        exps.sort_unstable_by(|a, b| b.cmp(a));
        per_prime.insert(l, exps);
    }
    // invariant factor j (largest first) = product over primes of l^(j-th part)
    let width = per_prime.values().map(|v| v.len()).max().unwrap_or(0);
    let mut factors = Vec::new();
    for j in 0..width {
        let mut d = 1u64;
        for (l, exps) in &per_prime {
            if let Some(&e) = exps.get(j) {
                d *= l.pow(e);
            }
        }
        factors.push(d);
    }
    factors.sort_unstable();
    factors.retain(|&d| d > 1);
    FinAbGroup { factors }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_and_order() {
        let g = FinAbGroup::from_orders(&[2, 3]);
        assert_eq!(g.to_string(), "Z/6");
        assert_eq!(g.order(), Some(BigInt::from(6)));
        let h = FinAbGroup::from_orders(&[4, 6]);
        assert_eq!(h.invariant_factors(), &[2, 12]);
        assert!(FinAbGroup::from_orders(&[1, 1]).is_trivial());
    }

    #[test]
    fn cokernel_examples() {
        // diag(2,3) -> Z/6
        let m = IntMatrix::from_rows(vec![vec![2, 0], vec![0, 3]]);
        let g = FinAbGroup::cokernel_of_columns(&m, 2);
        assert_eq!(g.invariant_factors(), &[6]);
        // identity -> trivial
        let g = FinAbGroup::cokernel_of_columns(&IntMatrix::identity(3), 3);
        assert!(g.is_trivial());
        // 2x0 zero matrix -> Z^2
        let g = FinAbGroup::cokernel_of_columns(&IntMatrix::zero(2, 0), 2);
        assert_eq!(g.invariant_factors(), &[0, 0]);
        assert_eq!(g.order(), None);
    }

    #[test]
    fn snf_invariant_under_permutation() {
        let m = IntMatrix::from_rows(vec![vec![4, 2, 0], vec![2, 8, 2], vec![0, 6, 12]]);
        let g1 = FinAbGroup::cokernel_of_columns(&m, 3);
        // permute rows and columns
        let mp = IntMatrix::from_rows(vec![vec![2, 2, 8], vec![12, 0, 6], vec![0, 4, 2]]);
        let g2 = FinAbGroup::cokernel_of_columns(&mp, 3);
        assert_eq!(g1, g2);
    }

    #[test]
    fn structure_from_enumeration_z6() {
        let elems: Vec<u64> = (0..6).collect();
        let g = structure_from_enumeration(&elems, |a, b| (a + b) % 6, &0);
        assert_eq!(g.invariant_factors(), &[6]);
        // Z/2 x Z/4 as pairs
        let elems: Vec<(u64, u64)> = (0..2).flat_map(|a| (0..4).map(move |b| (a, b))).collect();
        let g = structure_from_enumeration(&elems, |x, y| ((x.0 + y.0) % 2, (x.1 + y.1) % 4), &(0, 0));
        assert_eq!(g.invariant_factors(), &[2, 4]);
    }
}
