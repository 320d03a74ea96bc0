//! Hilbert-Jacobi q-expansions: two-parameter coefficient lattices
//! a_{xi, alpha} with index mu, the discriminant support law
//! 4 xi mu - alpha^2 totally positive or zero, beta-translation and unit
//! relations, and exact support enumeration.

use std::collections::BTreeMap;

use crate::cusps::CuspData;
use crate::field::{FieldElement, QuadField};
use crate::qexp::WeightTag;
use crate::rat;
use crate::{Error, Result};

/// The discriminant 4 xi mu - alpha^2 of a coefficient slot; asserts the
/// lattice membership in X c that the support law presumes.
pub fn discriminant(
    field: &QuadField,
    cusp: &CuspData,
    xi: &FieldElement,
    alpha: &FieldElement,
    mu: &FieldElement,
) -> Result<FieldElement> {
    if !cusp.x_ideal.contains(xi) {
        return Err(Error::MembershipViolation("xi is not in X".into()));
    }
    if !cusp.ab_ideal.contains(alpha) {
        return Err(Error::MembershipViolation("alpha is not in a = bc".into()));
    }
    if !cusp.level.c.contains(mu) {
        return Err(Error::MembershipViolation("mu is not in c".into()));
    }
    let four_xi_mu = field.mul(xi, mu).scale(&rat::int(4));
    let disc = &four_xi_mu - &field.mul(alpha, alpha);
    let xc = cusp.x_ideal.mul(field, &cusp.level.c);
    if !xc.contains(&disc) {
        return Err(Error::MembershipViolation("discriminant left X c".into()));
    }
    Ok(disc)
}

/// beta-translation of a coefficient slot:
/// (xi, alpha) -> (mu beta^2 + alpha beta + xi, alpha + 2 mu beta).
/// The discriminant is preserved identically.
pub fn beta_translate(
    field: &QuadField,
    xi: &FieldElement,
    alpha: &FieldElement,
    mu: &FieldElement,
    beta: &FieldElement,
) -> (FieldElement, FieldElement) {
    let beta2 = field.mul(beta, beta);
    let xi_new = &(&field.mul(mu, &beta2) + &field.mul(alpha, beta)) + xi;
    let alpha_new = alpha + &field.mul(mu, beta).scale(&rat::int(2));
    (xi_new, alpha_new)
}

/// A truncated Hilbert-Jacobi expansion with index mu in c.
#[derive(Clone, Debug, PartialEq)]
pub struct JacobiExpansion {
    pub cusp: CuspData,
    pub weight: WeightTag,
    pub mu: FieldElement,
    pub trace_bound: i64,
    coeffs: BTreeMap<(FieldElement, FieldElement), FieldElement>,
}

impl JacobiExpansion {
    /// Build an expansion, enforcing the support law: a non-zero
    /// coefficient needs 4 xi mu - alpha^2 totally positive or zero, and a
    /// non-zero expansion needs mu totally positive.
    pub fn new(
        field: &QuadField,
        cusp: CuspData,
        weight: WeightTag,
        mu: FieldElement,
        trace_bound: i64,
        entries: impl IntoIterator<Item = ((FieldElement, FieldElement), FieldElement)>,
    ) -> Result<Self> {
        if !cusp.level.c.contains(&mu) {
            return Err(Error::MembershipViolation("mu is not in c".into()));
        }
        let mut coeffs = BTreeMap::new();
        for ((xi, alpha), a) in entries {
            if a.is_zero() {
                continue;
            }
            if !field.is_totally_positive(&mu) {
                return Err(Error::SupportViolation(
                    "non-zero expansion with an index that is not totally positive".into(),
                ));
            }
            let disc = discriminant(field, &cusp, &xi, &alpha, &mu)?;
            if !disc.is_zero() && !field.is_totally_positive(&disc) {
                return Err(Error::SupportViolation(format!(
                    "discriminant of ({:?}, {:?}) is not totally positive",
                    xi, alpha
                )));
            }
            if field.trace(&xi) > rat::int(trace_bound) {
                return Err(Error::SupportViolation("xi exceeds the trace bound".into()));
            }
            let slot = coeffs.entry((xi, alpha)).or_insert_with(FieldElement::zero);
            *slot = &*slot + &a;
        }
        coeffs.retain(|_, a| !a.is_zero());
        Ok(JacobiExpansion { cusp, weight, mu, trace_bound, coeffs })
    }

    pub fn coefficient(&self, xi: &FieldElement, alpha: &FieldElement) -> FieldElement {
        self.coeffs
            .get(&(xi.clone(), alpha.clone()))
            .cloned()
            .unwrap_or_else(FieldElement::zero)
    }

    pub fn entries(
        &self,
    ) -> impl Iterator<Item = (&(FieldElement, FieldElement), &FieldElement)> {
        self.coeffs.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    /// Support law plus the Eisenstein exclusions: non-parallel weight
    /// forces a_{0,0} = 0, and a non-trivial expansion needs mu totally
    /// positive (both support checks hold by construction).
    pub fn koecher_check(&self, field: &QuadField) -> bool {
        if !self.weight.is_parallel()
            && !self.coefficient(&FieldElement::zero(), &FieldElement::zero()).is_zero()
        {
            return false;
        }
        if !self.is_empty() && !field.is_totally_positive(&self.mu) {
            return false;
        }
        true
    }

    /// Test helper: perturb one stored coefficient.
    pub fn with_perturbed_coefficient(&self, index: usize) -> JacobiExpansion {
        let mut out = self.clone();
        if let Some(key) = out.coeffs.keys().nth(index).cloned() {
            let slot = out.coeffs.get_mut(&key).unwrap();
            *slot = &*slot + &FieldElement::one();
        }
        out
    }
}

/// Witness of a failed translation or unit relation.
#[derive(Clone, Debug)]
pub struct JacobiWitness {
    pub xi: FieldElement,
    pub alpha: FieldElement,
    pub expected: FieldElement,
    pub actual: FieldElement,
}

/// Check the beta-translation law a_{beta.(xi,alpha)} = a_{xi,alpha} for
/// all in-truncation translates over the given betas, and the unit
/// relation a_{u^2 xi, u alpha} = u^kappa a_{xi, alpha} (exponential
/// factor 1 at unramified cusps) over the given units.
pub fn verify_jacobi_relations(
    field: &QuadField,
    f: &JacobiExpansion,
    betas: &[FieldElement],
    units: &[FieldElement],
) -> Result<std::result::Result<(), JacobiWitness>> {
    let t = rat::int(f.trace_bound);
    for beta in betas {
        if !f.cusp.b_ideal.contains(beta) {
            return Err(Error::MembershipViolation("beta is not in b".into()));
        }
        for ((xi, alpha), a) in &f.coeffs {
            let (xi_new, alpha_new) = beta_translate(field, xi, alpha, &f.mu, beta);
            if field.trace(&xi_new) > t {
                continue;
            }
            let actual = f.coefficient(&xi_new, &alpha_new);
            if actual != *a {
                return Ok(Err(JacobiWitness {
                    xi: xi.clone(),
                    alpha: alpha.clone(),
                    expected: a.clone(),
                    actual,
                }));
            }
        }
        // translates landing on the support from outside would betray a
        // missing source coefficient; translating by -beta inverts beta
        for ((xi, alpha), a) in &f.coeffs {
            let (xi_src, alpha_src) = beta_translate(field, xi, alpha, &f.mu, &(-beta));
            if field.trace(&xi_src) > t || !f.cusp.x_ideal.contains(&xi_src) {
                continue;
            }
            let src = f.coefficient(&xi_src, &alpha_src);
            if src != *a {
                return Ok(Err(JacobiWitness {
                    xi: xi_src,
                    alpha: alpha_src,
                    expected: a.clone(),
                    actual: src,
                }));
            }
        }
    }
    for u in units {
        if !field.is_unit(u) {
            return Err(Error::InvalidField("unit expected".into()));
        }
        let u2 = field.mul(u, u);
        let factor = f.weight.unit_power(field, u)?;
        for ((xi, alpha), a) in &f.coeffs {
            let xi_new = field.mul(&u2, xi);
            let alpha_new = field.mul(u, alpha);
            if field.trace(&xi_new) > t {
                continue;
            }
            let expected = field.mul(a, &factor);
            let actual = f.coefficient(&xi_new, &alpha_new);
            if expected != actual {
                return Ok(Err(JacobiWitness {
                    xi: xi.clone(),
                    alpha: alpha.clone(),
                    expected,
                    actual,
                }));
            }
        }
    }
    Ok(Ok(()))
}

/// Sampled comparison of the two support laws: the discriminant condition
/// is the max over real beta, while the compactification-dependent ring
/// takes the max over the period lattice only. For a fixed (q, l) the
/// lattice-side inequality reads Tr(xi q + alpha l) >= phi(q, l), so a
/// violating sample is a witness that the pair escapes the smaller ring.
/// No claim is made about the gap being non-empty.
pub fn support_gap_probe(
    field: &QuadField,
    cusp: &CuspData,
    mu: &FieldElement,
    xi: &FieldElement,
    alpha: &FieldElement,
    samples: usize,
    seed: u64,
) -> Result<Option<(FieldElement, FieldElement)>> {
    use rand::{Rng, SeedableRng};
    let data =
        crate::vdfan::DegenerationData::new(*field, cusp.clone(), vec![mu.clone()])?;
    let x_lattice = data.x_lattice();
    let a_star = cusp.ab_ideal.trace_dual(field);
    let [e1, e2] = a_star.basis();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    while checked < samples {
        let q = x_lattice.element_of_rational(&crate::cones::RationalVector(
            rat::frac(rng.gen_range(1..10), rng.gen_range(1..4)),
            rat::frac(rng.gen_range(-10..10), rng.gen_range(1..4)),
        ));
        if !field.is_totally_positive(&q) {
            continue;
        }
        checked += 1;
        let l = &e1.scale(&rat::frac(rng.gen_range(-6..=6), rng.gen_range(1..4)))
            + &e2.scale(&rat::frac(rng.gen_range(-6..=6), rng.gen_range(1..4)));
        let (phi_val, _) = crate::vdfan::phi(&data, &q, std::slice::from_ref(&l))?;
        let pairing = field.trace(&(&field.mul(xi, &q) + &field.mul(alpha, &l)));
        if pairing < phi_val {
            return Ok(Some((q, l)));
        }
    }
    Ok(None)
}

/// All pairs (xi, alpha) with Tr(xi) <= T and 4 xi mu - alpha^2 totally
/// positive or zero; alpha ranges over the finite box forced by the
/// embedding-wise inequality alpha_tau^2 <= 4 xi_tau mu_tau.
pub fn enumerate_support(
    field: &QuadField,
    cusp: &CuspData,
    mu: &FieldElement,
    trace_bound: i64,
) -> Result<Vec<(FieldElement, FieldElement)>> {
    if !field.is_totally_positive(mu) {
        return Err(Error::SupportViolation("mu must be totally positive".into()));
    }
    let xs = crate::qexp::totally_positive_points(field, &cusp.x_ideal, trace_bound);
    let mut out = Vec::new();
    for xi in xs {
        if xi.is_zero() {
            out.push((xi, FieldElement::zero()));
            continue;
        }
        // |alpha_tau| <= sqrt(4 xi_tau mu_tau) <= 2 sqrt(e) with
        // e = max_tau(xi_tau mu_tau) <= Tr(xi mu)
        let prod = field.mul(&xi, mu);
        let (_, bound_hi) = rat::sqrt_bounds(&field.trace(&prod), 16);
        let two_bound = &bound_hi * rat::int(2) + rat::int(1);
        let (sqrt_lo, _) = rat::sqrt_bounds(&rat::int(field.d()), 16);
        let v_bound = &two_bound / &sqrt_lo;
        for alpha in cusp.ab_ideal.points_in_radical_box(field, &two_bound, &v_bound) {
            let disc = &field.mul(&xi, mu).scale(&rat::int(4)) - &field.mul(&alpha, &alpha);
            if disc.is_zero() || field.is_totally_positive(&disc) {
                out.push((xi.clone(), alpha));
            }
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cusps::{derive_cusp_data, Level};
    use crate::ideals::FractionalIdeal;
    use crate::qexp::AlgebraicWeight;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f5() -> QuadField {
        QuadField::new(5).unwrap()
    }

    fn o() -> FractionalIdeal {
        FractionalIdeal::ring_of_integers()
    }

    fn infinity_cusp(field: &QuadField) -> CuspData {
        let level = Level::new(o(), FractionalIdeal::from_rational_integer(7).unwrap()).unwrap();
        derive_cusp_data(field, &FieldElement::one(), &FieldElement::zero(), &level).unwrap()
    }

    fn w22() -> WeightTag {
        WeightTag::integral(&AlgebraicWeight::new(vec![2, 2]).unwrap())
    }

    #[test]
    fn discriminant_examples() {
        let f = f5();
        let cusp = infinity_cusp(&f);
        let mu = FieldElement::one();
        let xi = FieldElement::from_integers(2, 1);
        // alpha = 0: the discriminant is 4 xi mu
        let d = discriminant(&f, &cusp, &xi, &FieldElement::zero(), &mu).unwrap();
        assert_eq!(d, field_scale(&xi, 4));
        // xi = 0, alpha != 0: minus a square, never totally positive
        let d =
            discriminant(&f, &cusp, &FieldElement::zero(), &FieldElement::one(), &mu).unwrap();
        assert!(!f.is_totally_positive(&d) && !d.is_zero());
    }

    fn field_scale(x: &FieldElement, k: i64) -> FieldElement {
        x.scale(&rat::int(k))
    }

    #[test]
    fn discriminant_membership_random() {
        let f = f5();
        let cusp = infinity_cusp(&f);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let xi = FieldElement::from_integers(rng.gen_range(-9..10), rng.gen_range(-9..10));
            let alpha =
                FieldElement::from_integers(rng.gen_range(-9..10), rng.gen_range(-9..10));
            let mu = FieldElement::from_integers(rng.gen_range(-9..10), rng.gen_range(-9..10));
            // X = o, a = o, c = o at this cusp: membership always holds
            assert!(discriminant(&f, &cusp, &xi, &alpha, &mu).is_ok());
        }
    }

    #[test]
    fn translation_preserves_discriminant_identically() {
        let f = f5();
        let cusp = infinity_cusp(&f);
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..1000 {
            let xi = FieldElement::from_integers(rng.gen_range(-8..9), rng.gen_range(-8..9));
            let alpha = FieldElement::from_integers(rng.gen_range(-8..9), rng.gen_range(-8..9));
            let mu = FieldElement::from_integers(rng.gen_range(-8..9), rng.gen_range(-8..9));
            let beta = FieldElement::from_integers(rng.gen_range(-8..9), rng.gen_range(-8..9));
            let (xi2, alpha2) = beta_translate(&f, &xi, &alpha, &mu, &beta);
            let d1 = &field_scale(&f.mul(&xi, &mu), 4) - &f.mul(&alpha, &alpha);
            let d2 = &field_scale(&f.mul(&xi2, &mu), 4) - &f.mul(&alpha2, &alpha2);
            assert_eq!(d1, d2);
            // beta then -beta returns the original pair
            let (xi3, alpha3) = beta_translate(&f, &xi2, &alpha2, &mu, &(-&beta));
            assert_eq!((xi3, alpha3), (xi, alpha));
            let _ = &cusp;
        }
        // beta = 0 is the identity
        let xi = FieldElement::from_integers(1, 1);
        let alpha = FieldElement::from_integers(2, 0);
        let mu = FieldElement::one();
        assert_eq!(
            beta_translate(&f, &xi, &alpha, &mu, &FieldElement::zero()),
            (xi, alpha)
        );
    }

    #[test]
    fn support_enumeration_matches_box_oracle() {
        let f = f5();
        let cusp = infinity_cusp(&f);
        let mu = FieldElement::one();
        let t = 8i64;
        let support = enumerate_support(&f, &cusp, &mu, t).unwrap();
        // independent oracle: brute-force box scan in radical coordinates
        let mut expected = Vec::new();
        for xp in -2 * t..=2 * t {
            for xq in -2 * t..=2 * t {
                let xi = f.from_radical(&rat::frac(xp, 2), &rat::frac(xq, 2));
                if !xi.is_integral() || f.trace(&xi) > rat::int(t) {
                    continue;
                }
                let xi_ok = xi.is_zero() || f.is_totally_positive(&xi);
                if !xi_ok {
                    continue;
                }
                for ap in -4 * t..=4 * t {
                    for aq in -4 * t..=4 * t {
                        let alpha = f.from_radical(&rat::frac(ap, 2), &rat::frac(aq, 2));
                        if !alpha.is_integral() {
                            continue;
                        }
                        let disc =
                            &xi.scale(&rat::int(4)) - &f.mul(&alpha, &alpha);
                        if disc.is_zero() || f.is_totally_positive(&disc) {
                            expected.push((xi.clone(), alpha));
                        }
                    }
                }
            }
        }
        expected.sort();
        expected.dedup();
        assert_eq!(support, expected);
        // xi = 0 admits only alpha = 0
        assert!(support.iter().filter(|(xi, _)| xi.is_zero()).count() == 1);
    }

    #[test]
    fn discriminant_indexed_expansions_pass_and_perturbations_fail() {
        let f = f5();
        let cusp = infinity_cusp(&f);
        let mu = FieldElement::one();
        let t = 8i64;
        // a_{xi, alpha} = g(4 xi mu - alpha^2) passes the translation law
        let entries: Vec<((FieldElement, FieldElement), FieldElement)> =
            enumerate_support(&f, &cusp, &mu, t)
                .unwrap()
                .into_iter()
                .map(|(xi, alpha)| {
                    let disc = &field_scale(&f.mul(&xi, &mu), 4) - &f.mul(&alpha, &alpha);
                    let value = FieldElement::from_rational(f.trace(&disc) + rat::int(1));
                    ((xi, alpha), value)
                })
                .collect();
        let jac =
            JacobiExpansion::new(&f, cusp.clone(), w22(), mu.clone(), t, entries).unwrap();
        assert!(jac.koecher_check(&f));
        let betas = vec![
            FieldElement::zero(),
            FieldElement::one(),
            FieldElement::from_integers(0, 1),
            FieldElement::from_integers(-1, 1),
        ];
        let verdict = verify_jacobi_relations(&f, &jac, &betas, &[]).unwrap();
        assert!(verdict.is_ok());
        // a single perturbed coefficient produces a witness
        let broken = jac.with_perturbed_coefficient(2);
        let verdict = verify_jacobi_relations(&f, &broken, &betas, &[]).unwrap();
        assert!(verdict.is_err());
    }

    #[test]
    fn index_positivity_is_enforced() {
        let f = f5();
        let cusp = infinity_cusp(&f);
        // mu = sqrt(5) has a negative embedding: a non-zero expansion is
        // rejected, the zero expansion is fine
        let mu = f.from_radical(&rat::int(0), &rat::int(1));
        let zero = JacobiExpansion::new(&f, cusp.clone(), w22(), mu.clone(), 8, Vec::new())
            .unwrap();
        assert!(zero.koecher_check(&f));
        let bad = JacobiExpansion::new(
            &f,
            cusp,
            w22(),
            mu,
            8,
            vec![(
                (FieldElement::zero(), FieldElement::zero()),
                FieldElement::one(),
            )],
        );
        assert!(bad.is_err());
    }

    #[test]
    fn nonparallel_weight_kills_the_constant_term() {
        let f = f5();
        let cusp = infinity_cusp(&f);
        let w24 = WeightTag::integral(&AlgebraicWeight::new(vec![2, 4]).unwrap());
        let jac = JacobiExpansion::new(
            &f,
            cusp,
            w24,
            FieldElement::one(),
            8,
            vec![(
                (FieldElement::zero(), FieldElement::zero()),
                FieldElement::one(),
            )],
        )
        .unwrap();
        assert!(!jac.koecher_check(&f));
    }

    #[test]
    fn gap_probe_behaviour() {
        let f = f5();
        let cusp = infinity_cusp(&f);
        let mu = FieldElement::one();
        // an index inside the real support with alpha = 0: the pairing
        // Tr(xi q) is positive while phi <= 0, so no witness appears
        let clean = support_gap_probe(
            &f,
            &cusp,
            &mu,
            &FieldElement::one(),
            &FieldElement::zero(),
            60,
            31,
        )
        .unwrap();
        assert!(clean.is_none());
        // a pair outside the real support (negative discriminant) is
        // caught by sampling
        let witness = support_gap_probe(
            &f,
            &cusp,
            &mu,
            &FieldElement::zero(),
            &FieldElement::one(),
            200,
            32,
        )
        .unwrap();
        assert!(witness.is_some());
    }

    #[test]
    fn beta_orbit_stays_in_support() {
        let f = f5();
        let cusp = infinity_cusp(&f);
        let mu = FieldElement::one();
        let support = enumerate_support(&f, &cusp, &mu, 8).unwrap();
        for beta in [FieldElement::one(), FieldElement::from_integers(1, 1)] {
            for (xi, alpha) in support.iter().take(40) {
                let (xi2, alpha2) = beta_translate(&f, xi, alpha, &mu, &beta);
                let disc = &field_scale(&f.mul(&xi2, &mu), 4) - &f.mul(&alpha2, &alpha2);
                assert!(disc.is_zero() || f.is_totally_positive(&disc));
            }
        }
    }
}
