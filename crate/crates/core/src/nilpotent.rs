//! Truncated noncommutative power series over the integers: the classical
//! embedding x -> 1 + X of a free group into the unit group of
//! Z<<X_1..X_r>> / (degree > c), lower-central-series membership, and the
//! word problem in free nilpotent quotients.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::stallings::SubgroupGraph;
use crate::words::Word;

/// Hard limits keeping the monomial count at desk scale.
pub const MAX_CUTOFF: usize = 6;
pub const MAX_RANK: u32 = 4;

/// Truncated series: monomials are sequences of letter indices (1-based),
/// length 0..=cutoff. Group element images have constant term 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MagnusSeries {
    rank: u32,
    cutoff: usize,
    coeffs: BTreeMap<Vec<u8>, BigInt>,
}

impl MagnusSeries {
    pub fn one(rank: u32, cutoff: usize) -> Self {
        assert!(cutoff >= 1 && cutoff <= MAX_CUTOFF, "cutoff out of range");
        assert!(rank >= 1 && rank <= MAX_RANK, "rank out of range");
        let mut coeffs = BTreeMap::new();
        coeffs.insert(Vec::new(), BigInt::one());
        MagnusSeries {
            rank,
            cutoff,
            coeffs,
        }
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn coeff(&self, monomial: &[u8]) -> BigInt {
        self.coeffs.get(monomial).cloned().unwrap_or_else(BigInt::zero)
    }

    /// Image of a single letter: 1 + X for positive, the truncated geometric
    /// series 1 - X + X^2 - ... for the inverse.
    fn letter(rank: u32, cutoff: usize, x: i32) -> Self {
        let idx = x.unsigned_abs() as u8;
        assert!(idx >= 1 && (idx as u32) <= rank);
        let mut s = Self::one(rank, cutoff);
        let mut sign = BigInt::one();
        for d in 1..=cutoff {
            if x < 0 {
                sign = -sign;
            }
            let c = if x > 0 {
                if d > 1 {
                    break;
                }
                BigInt::one()
            } else {
                sign.clone()
            };
            s.coeffs.insert(vec![idx; d], c);
        }
        s
    }

    pub fn mul(&self, other: &MagnusSeries) -> MagnusSeries {
        assert_eq!(self.rank, other.rank);
        assert_eq!(self.cutoff, other.cutoff);
        let mut coeffs: BTreeMap<Vec<u8>, BigInt> = BTreeMap::new();
        for (m1, c1) in &self.coeffs {
            if c1.is_zero() {
                continue;
            }
            for (m2, c2) in &other.coeffs {
                if m1.len() + m2.len() > self.cutoff || c2.is_zero() {
                    continue;
                }
                let mut m = m1.clone();
                m.extend_from_slice(m2);
                let e = coeffs.entry(m).or_insert_with(BigInt::zero);
                *e += c1 * c2;
            }
        }
        coeffs.retain(|_, c| !c.is_zero());
        MagnusSeries {
            rank: self.rank,
            cutoff: self.cutoff,
            coeffs,
        }
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeff(&[]).is_one()
    }

    /// Lowest degree with a nonzero coefficient, ignoring the constant term.
    pub fn lowest_degree(&self) -> Option<usize> {
        self.coeffs
            .iter()
            .filter(|(m, c)| !m.is_empty() && !c.is_zero())
            .map(|(m, _)| m.len())
            .min()
    }
}

pub fn magnus_expand(w: &Word, rank: u32, cutoff: usize) -> MagnusSeries {
    let mut s = MagnusSeries::one(rank, cutoff);
    for &x in w.letters() {
        s = s.mul(&MagnusSeries::letter(rank, cutoff, x));
    }
    s
}

/// Membership in the c-th lower central series term of the free group.
///
/// Relies on the classical fact that for free groups the c-th dimension
/// subgroup (elements with no terms in degrees 1..c-1) equals gamma_c.
pub fn in_gamma(w: &Word, rank: u32, c: usize) -> bool {
    assert!(c >= 1);
    if c == 1 {
        return true;
    }
    let s = magnus_expand(w, rank, c - 1);
    s.lowest_degree().is_none()
}

/// Equality in the free nilpotent quotient of class c (F / gamma_{c+1}).
pub fn nilpotent_equal(u: &Word, v: &Word, rank: u32, c: usize) -> bool {
    magnus_expand(u, rank, c) == magnus_expand(v, rank, c)
}

/// Verification report for lower-central containment sampling.
#[derive(Clone, Debug)]
pub struct ContainmentReport {
    pub checked: usize,
    pub failures: Vec<Word>,
}

impl ContainmentReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Left-normed basic commutators of the given weight over `base` words:
/// weight 1 is the base itself, weight w+1 is [c, b] for each weight-w
/// commutator c and base word b. Truncated to `max` entries.
pub fn basic_commutators(base: &[Word], weight: usize, max: usize) -> Vec<Word> {
    assert!(weight >= 1);
    let mut layer: Vec<Word> = base.to_vec();
    for _ in 1..weight {
        let mut next = Vec::new();
        'outer: for c in &layer {
            for b in base {
                let w = Word::commutator(c, b);
                if !w.is_identity() {
                    next.push(w);
                }
                if next.len() >= max {
                    break 'outer;
                }
            }
        }
        layer = next;
    }
    layer.truncate(max);
    layer
}

/// Checks that weight-`weight` basic commutators in a free basis of the
/// finite-index subgroup `k` all satisfy the membership predicate `in_l`
/// (typically: maps to the identity of an evaluable quotient).
pub fn gamma_containment_report<F: Fn(&Word) -> bool>(
    k: &SubgroupGraph,
    in_l: F,
    weight: usize,
    max_checks: usize,
) -> ContainmentReport {
    let basis = k.free_basis();
    let commutators = basic_commutators(&basis, weight, max_checks);
    let mut failures = Vec::new();
    for c in &commutators {
        if !in_l(c) {
            failures.push(c.clone());
        }
    }
    ContainmentReport {
        checked: commutators.len(),
        failures,
    }
}
