//! Weight combinatorics attached to an algebraic weight kappa: the
//! vectors p(J) over subsets J of the embeddings, the multiset of their
//! sizes with its (k0-1)d symmetry, and the grouping of subsets that
//! indexes the graded terms of the weight filtration.

use std::collections::BTreeSet;

use crate::qexp::AlgebraicWeight;
use crate::{Error, Result};

/// A subset J of the d embeddings, as a bitmask; the sign vector
/// (-1 on J, +1 off J) ranges over the 2^d Weyl elements.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct WeylElement {
    pub mask: u32,
    pub degree: usize,
}

impl WeylElement {
    pub fn new(mask: u32, degree: usize) -> Result<Self> {
        if degree == 0 || degree > 30 {
            return Err(Error::UnsupportedDegree(degree));
        }
        if mask >= (1 << degree) {
            return Err(Error::InvalidWeight("subset mask out of range".into()));
        }
        Ok(WeylElement { mask, degree })
    }

    pub fn all(degree: usize) -> impl Iterator<Item = WeylElement> {
        (0..(1u32 << degree)).map(move |mask| WeylElement { mask, degree })
    }

    pub fn contains(&self, tau: usize) -> bool {
        self.mask & (1 << tau) != 0
    }

    pub fn complement(&self) -> WeylElement {
        WeylElement { mask: !self.mask & ((1 << self.degree) - 1), degree: self.degree }
    }

    pub fn size(&self) -> usize {
        self.mask.count_ones() as usize
    }
}

/// p(J): (k0 - m_tau - 1) on J and m_tau off J, componentwise.
pub fn p_of_j(kappa: &AlgebraicWeight, j: &WeylElement) -> Vec<i64> {
    let k0 = kappa.k0();
    let m = kappa.m();
    (0..kappa.degree())
        .map(|tau| if j.contains(tau) { k0 - m[tau] - 1 } else { m[tau] })
        .collect()
}

fn size(v: &[i64]) -> i64 {
    v.iter().sum()
}

/// |p(J)| for a single subset.
pub fn p_size(kappa: &AlgebraicWeight, j: &WeylElement) -> i64 {
    size(&p_of_j(kappa, j))
}

/// The multiset {|p(J)| : J subset of J_F}, sorted with multiplicity.
pub fn hodge_tate_multiset(kappa: &AlgebraicWeight) -> Vec<i64> {
    let mut out: Vec<i64> =
        WeylElement::all(kappa.degree()).map(|j| p_size(kappa, &j)).collect();
    out.sort();
    out
}

/// For d = 2 the multiset collapses to the closed quadratic form
/// {m, k0-m-1, k0+m-1, 2k0-m-2}, with m the non-maximal-side entry of m_tau.
pub fn quadratic_multiset(kappa: &AlgebraicWeight) -> Result<Vec<i64>> {
    if kappa.degree() != 2 {
        return Err(Error::UnsupportedDegree(kappa.degree()));
    }
    let k0 = kappa.k0();
    let m = *kappa.m().iter().max().unwrap();
    let mut out = vec![m, k0 - m - 1, k0 + m - 1, 2 * k0 - m - 2];
    out.sort();
    Ok(out)
}

/// |p(J)| + |p(complement J)| = (k0 - 1) d for every subset.
pub fn verify_weight_symmetry(kappa: &AlgebraicWeight) -> bool {
    let expected = (kappa.k0() - 1) * kappa.degree() as i64;
    WeylElement::all(kappa.degree())
        .all(|j| p_size(kappa, &j) + p_size(kappa, &j.complement()) == expected)
}

/// One graded summand: the subset, its filtration index |p(J)| and the
/// cohomological shift |J| it contributes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BggTerm {
    pub subset: WeylElement,
    pub filtration: i64,
    pub shift: usize,
}

/// Character pairing that grades the complex: for the weight
/// (eps_J(n + t) - t, n0) paired against diag(0, -1) per embedding, the
/// value is sum_tau (n0 - w_tau)/2 with w = eps_J(n + t) - t.
fn pairing_value(kappa: &AlgebraicWeight, j: &WeylElement) -> i64 {
    let n = kappa.n();
    let n0 = kappa.n0();
    (0..kappa.degree())
        .map(|tau| {
            let w = if j.contains(tau) { -(n[tau] + 1) - 1 } else { n[tau] };
            debug_assert_eq!((n0 - w) % 2, 0);
            (n0 - w) / 2
        })
        .sum()
}

/// The terms of filtration index i: subsets J with |p(J)| = i, each
/// carrying its shift |J|. The character-pairing route is evaluated
/// independently and must agree with |p(J)|.
pub fn bgg_terms(kappa: &AlgebraicWeight, i: i64) -> Vec<BggTerm> {
    WeylElement::all(kappa.degree())
        .filter_map(|j| {
            let filtration = p_size(kappa, &j);
            assert_eq!(
                pairing_value(kappa, &j),
                filtration,
                "character pairing disagrees with |p(J)|"
            );
            (filtration == i).then_some(BggTerm { subset: j, filtration, shift: j.size() })
        })
        .collect()
}

/// Admissible filtration indices in cohomological degree j:
/// {|p(J)| : |J| <= j}.
pub fn weight_bound_check(kappa: &AlgebraicWeight, j: usize) -> Result<BTreeSet<i64>> {
    if j > kappa.degree() {
        return Err(Error::InvalidWeight(format!(
            "cohomological degree {} exceeds d = {}",
            j,
            kappa.degree()
        )));
    }
    Ok(WeylElement::all(kappa.degree())
        .filter(|s| s.size() <= j)
        .map(|s| p_size(kappa, &s))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn w(k: Vec<i64>) -> AlgebraicWeight {
        AlgebraicWeight::new(k).unwrap()
    }

    #[test]
    fn p_of_j_examples() {
        let parallel = w(vec![2, 2]);
        let empty = WeylElement::new(0, 2).unwrap();
        let full = WeylElement::new(3, 2).unwrap();
        assert_eq!(p_of_j(&parallel, &empty), vec![0, 0]); // (m_tau)
        assert_eq!(p_of_j(&parallel, &full), vec![1, 1]); // (k0 - 1) t
        let skew = w(vec![2, 4]);
        let first = WeylElement::new(1, 2).unwrap();
        assert_eq!(p_of_j(&skew, &first), vec![2, 0]);
    }

    #[test]
    fn multiset_examples() {
        assert_eq!(hodge_tate_multiset(&w(vec![2, 2])), vec![0, 1, 1, 2]);
        for k in [2i64, 4, 6, 10] {
            assert_eq!(
                hodge_tate_multiset(&w(vec![k, k])),
                vec![0, k - 1, k - 1, 2 * k - 2]
            );
        }
    }

    #[test]
    fn symmetry_examples() {
        assert!(verify_weight_symmetry(&w(vec![2, 2])));
        assert!(verify_weight_symmetry(&w(vec![2, 4])));
        // (k0 - 1) d = 6 for kappa = (2, 4)
        let skew = w(vec![2, 4]);
        for j in WeylElement::all(2) {
            assert_eq!(p_size(&skew, &j) + p_size(&skew, &j.complement()), 6);
        }
        // componentwise: p(empty) + p(full) = (k0 - 1) t
        let empty = WeylElement::new(0, 2).unwrap();
        let full = WeylElement::new(3, 2).unwrap();
        let sum: Vec<i64> = p_of_j(&skew, &empty)
            .iter()
            .zip(p_of_j(&skew, &full))
            .map(|(a, b)| a + b)
            .collect();
        assert_eq!(sum, vec![skew.k0() - 1, skew.k0() - 1]);
    }

    #[test]
    fn random_weights_match_the_quadratic_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..50 {
            let k1 = rng.gen_range(1..12) * 2;
            let k2 = rng.gen_range(1..12) * 2;
            let kappa = if rng.gen_bool(0.5) {
                w(vec![k1, k2])
            } else {
                w(vec![k1 + 1, k2 + 1])
            };
            assert_eq!(hodge_tate_multiset(&kappa), quadratic_multiset(&kappa).unwrap());
            assert!(verify_weight_symmetry(&kappa));
            // complement pairing is a bijection of the multiset
            let mut complements: Vec<i64> = WeylElement::all(2)
                .map(|j| p_size(&kappa, &j.complement()))
                .collect();
            complements.sort();
            assert_eq!(complements, hodge_tate_multiset(&kappa));
        }
    }

    #[test]
    fn bgg_grouping() {
        let parallel = w(vec![2, 2]);
        // i = 1: the two singleton subsets, each with shift 1
        let terms = bgg_terms(&parallel, 1);
        assert_eq!(terms.len(), 2);
        assert!(terms.iter().all(|t| t.shift == 1));
        // indices outside the multiset give nothing
        assert!(bgg_terms(&parallel, 7).is_empty());
        // term counts over all i partition the 2^d subsets
        let total: usize = hodge_tate_multiset(&parallel)
            .into_iter()
            .collect::<BTreeSet<i64>>()
            .into_iter()
            .map(|i| bgg_terms(&parallel, i).len())
            .sum();
        assert_eq!(total, 4);
    }

    #[test]
    fn weight_bounds_are_monotone() {
        let kappa = w(vec![4, 6]);
        let j0 = weight_bound_check(&kappa, 0).unwrap();
        let j1 = weight_bound_check(&kappa, 1).unwrap();
        let j2 = weight_bound_check(&kappa, 2).unwrap();
        assert_eq!(j0.len(), 1);
        assert!(j0.is_subset(&j1) && j1.is_subset(&j2));
        // j = 0 sees only |p(empty)| = sum of m_tau
        assert!(j0.contains(&kappa.m().iter().sum::<i64>()));
        // j = d reaches the full support of the multiset
        let support: BTreeSet<i64> = hodge_tate_multiset(&kappa).into_iter().collect();
        assert_eq!(j2, support);
        assert!(weight_bound_check(&kappa, 3).is_err());
    }
}
