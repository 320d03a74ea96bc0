//! Trace-truncated q-expansions at a cusp: the totally positive support
//! law, unit-invariance relations, orbit reduction, theta series and
//! p-adic congruence checks.
//!
//! Coefficients live in a pluggable ring: exact field elements (rationals
//! included) or residue rings Z/p^m. Support outside X_+ u {0} is
//! rejected at construction time, so no expansion violating the support
//! law can exist.

use std::collections::BTreeMap;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, Zero};

use crate::cusps::CuspData;
use crate::field::{FieldElement, QuadField};
use crate::ideals::FractionalIdeal;
use crate::rat;
use crate::{Error, Result};

/// An algebraic weight: integer exponents k_tau >= 2 of equal parity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraicWeight {
    k: Vec<i64>,
}

impl AlgebraicWeight {
    pub fn new(k: Vec<i64>) -> Result<Self> {
        if k.len() < 2 {
            return Err(Error::InvalidWeight("degree must be at least 2".into()));
        }
        if k.iter().any(|&kt| kt < 2) {
            return Err(Error::InvalidWeight("every component must be >= 2".into()));
        }
        if k.iter().any(|&kt| (kt - k[0]) % 2 != 0) {
            return Err(Error::InvalidWeight("components must share parity".into()));
        }
        let w = AlgebraicWeight { k };
        // kappa + 2m = k0 t componentwise
        debug_assert!(w
            .k
            .iter()
            .zip(w.m())
            .all(|(&kt, mt)| kt + 2 * mt == w.k0()));
        Ok(w)
    }

    pub fn components(&self) -> &[i64] {
        &self.k
    }

    pub fn degree(&self) -> usize {
        self.k.len()
    }

    pub fn k0(&self) -> i64 {
        *self.k.iter().max().unwrap()
    }

    /// m_tau = (k0 - k_tau)/2.
    pub fn m(&self) -> Vec<i64> {
        let k0 = self.k0();
        self.k.iter().map(|&kt| (k0 - kt) / 2).collect()
    }

    /// n_tau = k_tau - 2.
    pub fn n(&self) -> Vec<i64> {
        self.k.iter().map(|&kt| kt - 2).collect()
    }

    pub fn n0(&self) -> i64 {
        self.k0() - 2
    }

    pub fn is_parallel(&self) -> bool {
        self.k.iter().all(|&kt| kt == self.k[0])
    }
}

/// Weight metadata on an expansion: the doubled exponent vector plus a
/// half-integrality flag, so t/2 + lambda weights need no fractional type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightTag {
    /// 2*kappa componentwise.
    pub doubled: Vec<i64>,
    pub half: bool,
}

impl WeightTag {
    pub fn integral(w: &AlgebraicWeight) -> Self {
        WeightTag { doubled: w.components().iter().map(|&k| 2 * k).collect(), half: false }
    }

    /// The parallel half weight t/2 of the theta series.
    pub fn half_parallel(degree: usize) -> Self {
        WeightTag { doubled: vec![1; degree], half: true }
    }

    pub fn is_parallel(&self) -> bool {
        self.doubled.iter().all(|&x| x == self.doubled[0])
    }

    /// u^kappa as a field element (tau_1-normalized): u^{k_1} conj(u)^{k_2}.
    /// For half weights the integer part lambda of kappa = t/2 + lambda is
    /// used; the residual square-root factor is 1 on the verified laws.
    pub fn unit_power(&self, field: &QuadField, u: &FieldElement) -> Result<FieldElement> {
        let exps: Vec<i64> = if self.half {
            self.doubled.iter().map(|&x| (x - 1) / 2).collect()
        } else {
            self.doubled.iter().map(|&x| x / 2).collect()
        };
        if exps.len() != 2 {
            return Err(Error::UnsupportedDegree(exps.len()));
        }
        let first = field.pow(u, exps[0])?;
        let second = field.pow(&field.conjugate(u), exps[1])?;
        Ok(field.mul(&first, &second))
    }

    /// eps^{kappa/2} for rational eps: eps^{|kappa|/2}.
    pub fn rational_half_power(&self, eps: &BigRational) -> Result<BigRational> {
        if eps.is_one() {
            return Ok(BigRational::one());
        }
        let total: i64 = self.doubled.iter().sum();
        if total % 4 != 0 {
            return Err(Error::InvalidWeight(
                "eps^{kappa/2} is irrational for this weight".into(),
            ));
        }
        let e = total / 4;
        let mut acc = BigRational::one();
        for _ in 0..e.unsigned_abs() {
            acc *= eps;
        }
        if e < 0 {
            acc = acc.recip();
        }
        Ok(acc)
    }
}

/// Coefficient ring abstraction: exact field elements or residue rings.
pub trait Coefficient: Clone + PartialEq + std::fmt::Debug {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    /// Multiply by a field scalar; None when the scalar has no image in
    /// the ring (e.g. an irrational scalar into Z/p^m).
    fn scale(&self, field: &QuadField, by: &FieldElement) -> Option<Self>;
}

impl Coefficient for FieldElement {
    fn zero() -> Self {
        FieldElement::zero()
    }

    fn is_zero(&self) -> bool {
        FieldElement::is_zero(self)
    }

    fn add(&self, other: &Self) -> Self {
        self + other
    }

    fn scale(&self, field: &QuadField, by: &FieldElement) -> Option<Self> {
        Some(field.mul(self, by))
    }
}

/// Element of Z/p^m used by the p-adic mode.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ResidueInt {
    pub value: BigInt,
    pub modulus: BigInt,
}

impl ResidueInt {
    pub fn new(value: BigInt, modulus: BigInt) -> Self {
        let value = value.mod_floor(&modulus);
        ResidueInt { value, modulus }
    }
}

impl Coefficient for ResidueInt {
    fn zero() -> Self {
        // modulus joins on first addition; zero is absorbing either way
        ResidueInt { value: BigInt::zero(), modulus: BigInt::zero() }
    }

    fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    fn add(&self, other: &Self) -> Self {
        if self.modulus.is_zero() {
            return other.clone();
        }
        if other.modulus.is_zero() {
            return self.clone();
        }
        assert_eq!(self.modulus, other.modulus, "mixed moduli");
        ResidueInt::new(&self.value + &other.value, self.modulus.clone())
    }

    fn scale(&self, _field: &QuadField, by: &FieldElement) -> Option<Self> {
        if !by.is_rational() || self.modulus.is_zero() {
            return if by.is_rational() { Some(self.clone()) } else { None };
        }
        let num = by.c0.numer().mod_floor(&self.modulus);
        let den = by.c0.denom().mod_floor(&self.modulus);
        let inv = mod_inverse(&den, &self.modulus)?;
        Some(ResidueInt::new(&self.value * num * inv, self.modulus.clone()))
    }
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

/// A trace-truncated q-expansion supported on X_+ u {0}.
#[derive(Clone, Debug, PartialEq)]
pub struct QExpansion<C: Coefficient = FieldElement> {
    pub cusp: CuspData,
    pub weight: WeightTag,
    pub trace_bound: i64,
    coeffs: BTreeMap<FieldElement, C>,
}

impl<C: Coefficient> QExpansion<C> {
    /// Build an expansion, enforcing the support law: a non-zero
    /// coefficient must sit on a totally positive lattice index (or 0)
    /// within the trace bound.
    pub fn new(
        field: &QuadField,
        cusp: CuspData,
        weight: WeightTag,
        trace_bound: i64,
        entries: impl IntoIterator<Item = (FieldElement, C)>,
    ) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        for (xi, a) in entries {
            if a.is_zero() {
                continue;
            }
            if !cusp.x_ideal.contains(&xi) {
                return Err(Error::SupportViolation(format!("{:?} is not in X", xi)));
            }
            if !xi.is_zero() && !field.is_totally_positive(&xi) {
                return Err(Error::SupportViolation(format!(
                    "{:?} is neither totally positive nor zero",
                    xi
                )));
            }
            if field.trace(&xi) > rat::int(trace_bound) {
                return Err(Error::SupportViolation(format!(
                    "{:?} exceeds the trace bound",
                    xi
                )));
            }
            let slot = coeffs.entry(xi).or_insert_with(C::zero);
            *slot = slot.add(&a);
        }
        coeffs.retain(|_, a: &mut C| !a.is_zero());
        Ok(QExpansion { cusp, weight, trace_bound, coeffs })
    }

    pub fn coefficient(&self, xi: &FieldElement) -> C {
        self.coeffs.get(xi).cloned().unwrap_or_else(C::zero)
    }

    pub fn support(&self) -> impl Iterator<Item = &FieldElement> {
        self.coeffs.keys()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&FieldElement, &C)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Holomorphy-at-the-cusp verdict: the support law holds by
    /// construction; a non-parallel weight additionally forbids a constant
    /// term.
    pub fn koecher_check(&self) -> bool {
        if !self.weight.is_parallel() {
            return self.coefficient(&FieldElement::zero()).is_zero();
        }
        true
    }

    /// Coefficients on the canonical orbit representatives only.
    pub fn orbit_representatives(&self, field: &QuadField) -> BTreeMap<FieldElement, C> {
        let eps = field.unit_group().square_gen;
        let mut out = BTreeMap::new();
        for (xi, a) in &self.coeffs {
            if xi.is_zero() {
                out.insert(xi.clone(), a.clone());
                continue;
            }
            let (rep, _) = orbit_reduce(field, xi, &eps);
            out.entry(rep).or_insert_with(|| a.clone());
        }
        out
    }
}

/// Materialize an expansion from coefficients on orbit representatives,
/// using the unit relation a_{eps^k xi} = (eps0^kappa)^k a_xi.
pub fn from_orbit_representatives<C: Coefficient>(
    field: &QuadField,
    cusp: CuspData,
    weight: WeightTag,
    trace_bound: i64,
    reps: impl IntoIterator<Item = (FieldElement, C)>,
) -> Result<QExpansion<C>> {
    let ug = field.unit_group();
    let eps = ug.square_gen.clone();
    let factor = weight.unit_power(field, &ug.fundamental)?;
    let mut entries: Vec<(FieldElement, C)> = Vec::new();
    let t = rat::int(trace_bound);
    for (rep, a) in reps {
        if rep.is_zero() {
            entries.push((rep, a));
            continue;
        }
        // walk the orbit in both directions while the trace stays in range
        for dir in [1i64, -1] {
            let step = if dir == 1 { eps.clone() } else { field.inv(&eps)? };
            let fstep = if dir == 1 { factor.clone() } else { field.inv(&factor)? };
            let mut xi = rep.clone();
            let mut coef = a.clone();
            if dir == -1 {
                // skip the representative itself on the second pass
                xi = field.mul(&xi, &step);
                coef = coef
                    .scale(field, &fstep)
                    .ok_or_else(|| Error::InvalidWeight("scalar not in coefficient ring".into()))?;
            }
            while field.trace(&xi) <= t {
                entries.push((xi.clone(), coef.clone()));
                xi = field.mul(&xi, &step);
                coef = coef
                    .scale(field, &fstep)
                    .ok_or_else(|| Error::InvalidWeight("scalar not in coefficient ring".into()))?;
            }
        }
    }
    QExpansion::new(field, cusp, weight, trace_bound, entries)
}

/// {xi in X : xi totally positive, Tr(xi) <= t} together with 0, sorted
/// canonically.
pub fn totally_positive_points(
    field: &QuadField,
    x_ideal: &FractionalIdeal,
    trace_bound: i64,
) -> Vec<FieldElement> {
    let t = rat::int(trace_bound);
    let half = &t / rat::int(2);
    let (sqrt_lo, _) = rat::sqrt_bounds(&rat::int(field.d()), 16);
    let v_bound = &half / &sqrt_lo;
    let mut pts: Vec<FieldElement> = x_ideal
        .points_in_radical_box(field, &half, &v_bound)
        .into_iter()
        .filter(|x| field.is_totally_positive(x) && field.trace(x) <= t)
        .collect();
    pts.push(FieldElement::zero());
    pts.sort();
    pts.dedup();
    pts
}

/// Minimal-trace representative of the square-unit orbit of xi, with the
/// power used: xi = eps^k * rep. Trace ties are broken lexicographically
/// on the embeddings.
pub fn orbit_reduce(
    field: &QuadField,
    xi: &FieldElement,
    square_unit: &FieldElement,
) -> (FieldElement, i64) {
    assert!(field.is_totally_positive(xi), "orbit reduction needs a totally positive index");
    let eps = square_unit;
    let eps_inv = field.inv(eps).expect("unit");
    let better = |cand: &FieldElement, cur: &FieldElement| -> bool {
        match field.trace(cand).cmp(&field.trace(cur)) {
            std::cmp::Ordering::Less => true,
            std::cmp::Ordering::Greater => false,
            std::cmp::Ordering::Equal => {
                field.cmp_embeddings(cand, cur) == std::cmp::Ordering::Less
            }
        }
    };
    let mut rep = xi.clone();
    let mut k: i64 = 0;
    loop {
        let up = field.mul(&rep, eps);
        let down = field.mul(&rep, &eps_inv);
        if better(&up, &rep) {
            rep = up;
            k -= 1;
        } else if better(&down, &rep) {
            rep = down;
            k += 1;
        } else {
            break;
        }
    }
    (rep, k)
}

/// Expand the square-unit orbits of the given representatives inside the
/// trace window; the support side of the round-trip law.
pub fn expand_orbit_support(
    field: &QuadField,
    reps: &[FieldElement],
    trace_bound: i64,
) -> Vec<FieldElement> {
    let eps = field.unit_group().square_gen;
    let eps_inv = field.inv(&eps).expect("unit");
    let t = rat::int(trace_bound);
    let mut out = Vec::new();
    for rep in reps {
        if rep.is_zero() {
            out.push(rep.clone());
            continue;
        }
        for dir in [1, -1] {
            let step = if dir == 1 { eps.clone() } else { eps_inv.clone() };
            let mut xi = rep.clone();
            if dir == -1 {
                xi = field.mul(&xi, &step);
            }
            while field.trace(&xi) <= t {
                out.push(xi.clone());
                xi = field.mul(&xi, &step);
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Witness of a failed unit-relation check.
#[derive(Clone, Debug)]
pub struct UnitRelationWitness<C: Coefficient> {
    pub u: FieldElement,
    pub eps: BigRational,
    pub xi: FieldElement,
    pub expected: C,
    pub actual: C,
}

/// Check a_{u^2 eps xi} = eps^{kappa/2} u^kappa a_xi for every index where
/// both sides are inside the truncation window.
pub fn verify_unit_relation<C: Coefficient>(
    field: &QuadField,
    f: &QExpansion<C>,
    pairs: &[(FieldElement, BigRational)],
) -> Result<std::result::Result<(), UnitRelationWitness<C>>> {
    let t = rat::int(f.trace_bound);
    for (u, eps) in pairs {
        if !field.is_unit(u) {
            return Err(Error::InvalidField(format!("{:?} is not a unit", u)));
        }
        let u2eps = field.mul(u, u).scale(eps);
        let factor_num = f.weight.rational_half_power(eps)?;
        let factor = f
            .weight
            .unit_power(field, u)?
            .scale(&factor_num);
        // indices worth checking: supports of both sides pulled together
        let mut keys: Vec<FieldElement> = f.support().cloned().collect();
        let inv = field.inv(&u2eps)?;
        keys.extend(f.support().map(|xi| field.mul(xi, &inv)));
        keys.sort();
        keys.dedup();
        for xi in keys {
            let image = field.mul(&u2eps, &xi);
            if field.trace(&image).abs() > t || field.trace(&xi).abs() > t {
                continue;
            }
            if !xi.is_zero() && !field.is_totally_positive(&xi) {
                continue;
            }
            let expected = match f.coefficient(&xi).scale(field, &factor) {
                Some(e) => e,
                None => return Err(Error::InvalidWeight("scalar not in coefficient ring".into())),
            };
            let actual = f.coefficient(&image);
            if expected != actual {
                return Ok(Err(UnitRelationWitness {
                    u: u.clone(),
                    eps: eps.clone(),
                    xi,
                    expected,
                    actual,
                }));
            }
        }
    }
    Ok(Ok(()))
}

/// A coefficient function on c_0 / n_0 c_0, stored on the canonical
/// residue representatives.
#[derive(Clone, Debug)]
pub struct ThetaCharacter<C: Coefficient> {
    pub c0_ideal: FractionalIdeal,
    pub n0_ideal: FractionalIdeal,
    sublattice: FractionalIdeal,
    table: BTreeMap<FieldElement, C>,
}

impl<C: Coefficient> ThetaCharacter<C> {
    pub fn from_fn(
        field: &QuadField,
        c0_ideal: FractionalIdeal,
        n0_ideal: FractionalIdeal,
        mut value: impl FnMut(&FieldElement) -> C,
    ) -> Result<Self> {
        if !n0_ideal.is_integral() {
            return Err(Error::InvalidIdeal("conductor part must be integral".into()));
        }
        let sublattice = c0_ideal.mul(field, &n0_ideal);
        let mut table = BTreeMap::new();
        for rep in c0_ideal.quotient_reps(field, &sublattice)? {
            let v = value(&rep);
            table.insert(rep, v);
        }
        Ok(ThetaCharacter { c0_ideal, n0_ideal, sublattice, table })
    }

    pub fn constant_one(
        field: &QuadField,
        c0_ideal: FractionalIdeal,
        n0_ideal: FractionalIdeal,
        one: C,
    ) -> Result<Self> {
        Self::from_fn(field, c0_ideal, n0_ideal, |_| one.clone())
    }

    pub fn value(&self, field: &QuadField, alpha: &FieldElement) -> Result<C> {
        let rep = self.c0_ideal.reduce_mod(field, &self.sublattice, alpha)?;
        Ok(self.table.get(&rep).cloned().unwrap_or_else(C::zero))
    }
}

/// Theta q-expansion: coefficient of xi is the sum of eta(alpha) over
/// alpha in c_0 with alpha^2 = xi and Tr(alpha^2) <= T. Requires the
/// polarization ideal c = c_0^2 to be a square coprime to 2; the result
/// carries the parallel half weight t/2 and lives at the cusp infinity of
/// level (c_0^2, 4 n_0).
pub fn theta_qexp<C: Coefficient>(
    field: &QuadField,
    eta: &ThetaCharacter<C>,
    trace_bound: i64,
) -> Result<QExpansion<C>> {
    let c_ideal = eta.c0_ideal.mul(field, &eta.c0_ideal);
    let two = FractionalIdeal::from_rational_integer(2)?;
    if c_ideal.is_integral() && !c_ideal.is_coprime(&two)? {
        return Err(Error::InvalidIdeal("c = c_0^2 must be coprime to 2".into()));
    }
    let n_ideal = eta.n0_ideal.mul(field, &FractionalIdeal::from_rational_integer(4)?);
    let level = crate::cusps::Level::new(c_ideal, n_ideal)?;
    let cusp = crate::cusps::derive_cusp_data(
        field,
        &FieldElement::one(),
        &FieldElement::zero(),
        &level,
    )?;
    // Tr(alpha^2) = 2(u^2 + v^2 D) <= T bounds the radical box
    let half = rat::frac(trace_bound, 2);
    let (_, u_hi) = rat::sqrt_bounds(&half, 16);
    let (_, v_hi) = rat::sqrt_bounds(&(&half / rat::int(field.d())), 16);
    let mut entries: Vec<(FieldElement, C)> = Vec::new();
    for alpha in eta.c0_ideal.points_in_radical_box(field, &u_hi, &v_hi) {
        let sq = field.mul(&alpha, &alpha);
        if field.trace(&sq) > rat::int(trace_bound) {
            continue;
        }
        entries.push((sq, eta.value(field, &alpha)?));
    }
    QExpansion::new(field, cusp, WeightTag::half_parallel(2), trace_bound, entries)
}

/// Number of square roots of xi inside c_0 with the same truncation; the
/// theta coefficient with eta = 1 counts exactly these.
pub fn count_square_roots(
    field: &QuadField,
    c0_ideal: &FractionalIdeal,
    xi: &FieldElement,
    trace_bound: i64,
) -> usize {
    let half = rat::frac(trace_bound, 2);
    let (_, u_hi) = rat::sqrt_bounds(&half, 16);
    let (_, v_hi) = rat::sqrt_bounds(&(&half / rat::int(field.d())), 16);
    c0_ideal
        .points_in_radical_box(field, &u_hi, &v_hi)
        .into_iter()
        .filter(|alpha| field.mul(alpha, alpha) == *xi)
        .count()
}

/// Every coefficient vanishes modulo p^m. Field-element coefficients are
/// inspected coordinate-wise.
pub fn padic_congruence(f: &QExpansion<FieldElement>, p: u64, m: u32) -> bool {
    f.entries().all(|(_, a)| {
        [&a.c0, &a.c1].into_iter().all(|coord| match rat::valuation(coord, p) {
            None => true,
            Some(v) => v >= m as i64,
        })
    })
}

/// Depth of a cusp representative: the p-adic valuation of c, with None
/// standing for infinity (the unramified cusps, where c = 0).
pub fn cusp_depth(
    a: &FieldElement,
    c: &FieldElement,
    p: u64,
) -> Result<Option<i64>> {
    let vals: Vec<Option<i64>> = [&a.c0, &a.c1, &c.c0, &c.c1]
        .into_iter()
        .map(|x| rat::valuation(x, p))
        .collect();
    if vals.iter().flatten().any(|&v| v < 0) {
        return Err(Error::MembershipViolation("representative is not p-integral".into()));
    }
    if vals.iter().all(|v| v.is_none_or(|x| x > 0)) {
        return Err(Error::MembershipViolation("representative is not primitive".into()));
    }
    if c.is_zero() {
        return Ok(None);
    }
    let v = [&c.c0, &c.c1]
        .into_iter()
        .filter_map(|x| rat::valuation(x, p))
        .min()
        .expect("c is non-zero");
    Ok(Some(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cusps::{derive_cusp_data, Level};
    

    fn f5() -> QuadField {
        QuadField::new(5).unwrap()
    }

    fn o() -> FractionalIdeal {
        FractionalIdeal::ring_of_integers()
    }

    fn infinity_cusp(field: &QuadField, n: i64) -> CuspData {
        let level = Level::new(o(), FractionalIdeal::from_rational_integer(n).unwrap()).unwrap();
        derive_cusp_data(field, &FieldElement::one(), &FieldElement::zero(), &level).unwrap()
    }

    fn weight(k: Vec<i64>) -> WeightTag {
        WeightTag::integral(&AlgebraicWeight::new(k).unwrap())
    }

    #[test]
    fn algebraic_weight_arithmetic() {
        let w = AlgebraicWeight::new(vec![2, 4]).unwrap();
        assert_eq!(w.k0(), 4);
        assert_eq!(w.m(), vec![1, 0]);
        assert_eq!(w.n(), vec![0, 2]);
        assert_eq!(w.n0(), 2);
        assert!(!w.is_parallel());
        assert!(AlgebraicWeight::new(vec![2, 3]).is_err());
        assert!(AlgebraicWeight::new(vec![0, 2]).is_err());
    }

    #[test]
    fn point_enumeration_examples() {
        let f = f5();
        let pts = totally_positive_points(&f, &o(), 2);
        assert_eq!(pts, vec![FieldElement::zero(), FieldElement::one()]);
        assert_eq!(totally_positive_points(&f, &o(), 0), vec![FieldElement::zero()]);
        for xi in totally_positive_points(&f, &o(), 12) {
            if !xi.is_zero() {
                assert!(f.norm(&xi).is_positive());
                assert!(f.trace(&xi).is_positive());
            }
        }
    }

    #[test]
    fn independent_enumeration_oracle() {
        // brute scan over radical coordinates (p + q sqrt(5))/2 compared
        // against the lattice-box enumeration
        let f = f5();
        let t = 20i64;
        let mut expected = vec![FieldElement::zero()];
        for p in -2 * t..=2 * t {
            for q in -2 * t..=2 * t {
                let x = f.from_radical(&rat::frac(p, 2), &rat::frac(q, 2));
                if !x.is_integral() {
                    continue;
                }
                if f.is_totally_positive(&x) && f.trace(&x) <= rat::int(t) {
                    expected.push(x);
                }
            }
        }
        expected.sort();
        expected.dedup();
        assert_eq!(totally_positive_points(&f, &o(), t), expected);
    }

    #[test]
    fn support_law_is_enforced() {
        let f = f5();
        let cusp = infinity_cusp(&f, 7);
        // sqrt(5) has mixed signs: not an admissible index
        let sqrt5 = f.from_radical(&rat::int(0), &rat::int(1));
        let err = QExpansion::new(
            &f,
            cusp.clone(),
            weight(vec![2, 2]),
            10,
            vec![(sqrt5, FieldElement::one())],
        );
        assert!(err.is_err());
        // an index outside the lattice X = o is rejected as well
        let outside = FieldElement::new(rat::frac(1, 3), rat::int(0));
        assert!(QExpansion::new(
            &f,
            cusp,
            weight(vec![2, 2]),
            10,
            vec![(outside, FieldElement::one())]
        )
        .is_err());
    }

    #[test]
    fn koecher_parallel_exemption() {
        let f = f5();
        let cusp = infinity_cusp(&f, 7);
        let constant = vec![(FieldElement::zero(), FieldElement::one())];
        let parallel =
            QExpansion::new(&f, cusp.clone(), weight(vec![2, 2]), 10, constant.clone()).unwrap();
        assert!(parallel.koecher_check());
        let skew = QExpansion::new(&f, cusp, weight(vec![2, 4]), 10, constant).unwrap();
        assert!(!skew.koecher_check());
    }

    #[test]
    fn orbit_reduction_round_trip() {
        let f = f5();
        let eps = f.unit_group().square_gen;
        let t = 30i64;
        let pts = totally_positive_points(&f, &o(), t);
        let mut reps: Vec<FieldElement> = Vec::new();
        for xi in pts.iter().filter(|x| !x.is_zero()) {
            let (rep, k) = orbit_reduce(&f, xi, &eps);
            // consistency: eps^k * rep = xi
            let back = f.mul(&f.pow(&eps, k).unwrap(), &rep);
            assert_eq!(back, *xi);
            reps.push(rep);
            // eps^2 xi reduces to the same representative
            let shifted = f.mul(&f.mul(&eps, &eps), xi);
            let (rep2, _) = orbit_reduce(&f, &shifted, &eps);
            let (rep1, _) = orbit_reduce(&f, xi, &eps);
            assert_eq!(rep1, rep2);
        }
        reps.push(FieldElement::zero());
        reps.sort();
        reps.dedup();
        // expanding the orbits regenerates the truncated support exactly
        let expanded = expand_orbit_support(&f, &reps, t);
        assert_eq!(expanded, pts);
    }

    #[test]
    fn unit_relation_accepts_orbit_constant_parallel_weight() {
        let f = f5();
        let cusp = infinity_cusp(&f, 7);
        let w = weight(vec![2, 2]);
        let reps: Vec<(FieldElement, FieldElement)> = totally_positive_points(&f, &o(), 20)
            .into_iter()
            .filter(|x| !x.is_zero())
            .map(|x| orbit_reduce(&f, &x, &f.unit_group().square_gen).0)
            .map(|r| (r, FieldElement::one()))
            .collect();
        let fexp = from_orbit_representatives(&f, cusp, w, 20, reps).unwrap();
        // kappa = 2t: the factor is N(u)^2 = 1, so orbit-constant passes
        let u = f.fundamental_unit();
        let ok = verify_unit_relation(&f, &fexp, &[(u, rat::int(1))]).unwrap();
        assert!(ok.is_ok());
    }

    #[test]
    fn unit_relation_rejects_random_coefficients() {
        let f = f5();
        let cusp = infinity_cusp(&f, 7);
        let w = weight(vec![2, 2]);
        // constant 1 on every index is NOT unit-consistent at weight 2t
        // once a single coefficient is perturbed
        let mut entries: Vec<(FieldElement, FieldElement)> = totally_positive_points(&f, &o(), 20)
            .into_iter()
            .filter(|x| !x.is_zero())
            .map(|x| (x, FieldElement::one()))
            .collect();
        entries[1].1 = FieldElement::from_integers(3, 0);
        let fexp = QExpansion::new(&f, cusp, w, 20, entries).unwrap();
        let u = f.fundamental_unit();
        let verdict = verify_unit_relation(&f, &fexp, &[(u, rat::int(1))]).unwrap();
        assert!(verdict.is_err(), "perturbation must produce a witness");
    }

    #[test]
    fn unit_relation_round_trips_with_inverse() {
        let f = f5();
        let w = weight(vec![2, 4]);
        let u = f.fundamental_unit();
        let forward = w.unit_power(&f, &u).unwrap();
        let back = w.unit_power(&f, &f.inv(&u).unwrap()).unwrap();
        assert_eq!(f.mul(&forward, &back), FieldElement::one());
    }

    #[test]
    fn theta_constant_character() {
        let f = f5();
        let eta = ThetaCharacter::constant_one(
            &f,
            o(),
            FractionalIdeal::from_rational_integer(3).unwrap(),
            FieldElement::one(),
        )
        .unwrap();
        let th = theta_qexp(&f, &eta, 10).unwrap();
        assert_eq!(th.coefficient(&FieldElement::zero()), FieldElement::one());
        // alpha = +-1 are the only square roots of 1
        assert_eq!(th.coefficient(&FieldElement::one()), FieldElement::from_integers(2, 0));
        assert_eq!(count_square_roots(&f, &o(), &FieldElement::one(), 10), 2);
        // support sits inside squares, hence in X_+ u {0}
        for xi in th.support() {
            assert!(count_square_roots(&f, &o(), xi, 10) > 0);
        }
        // theta coefficient = number of roots, for every supported index
        for (xi, a) in th.entries() {
            let n = count_square_roots(&f, &o(), xi, 10);
            assert_eq!(*a, FieldElement::from_integers(n as i64, 0));
        }
        assert!(th.koecher_check());
    }

    #[test]
    fn odd_character_cancels() {
        let f = f5();
        let three = FractionalIdeal::from_rational_integer(3).unwrap();
        let sub = o().mul(&f, &three);
        let eta = ThetaCharacter::from_fn(&f, o(), three, |rep| {
            // odd function: eta(-x) = -eta(x), zero on 2-torsion classes
            let neg = o().reduce_mod(&f, &sub, &(-rep)).unwrap();
            match rep.cmp(&neg) {
                std::cmp::Ordering::Less => FieldElement::one(),
                std::cmp::Ordering::Greater => -&FieldElement::one(),
                std::cmp::Ordering::Equal => FieldElement::zero(),
            }
        })
        .unwrap();
        let th = theta_qexp(&f, &eta, 12).unwrap();
        assert!(th.is_empty(), "odd eta cancels in alpha <-> -alpha pairs");
    }

    #[test]
    fn padic_congruences() {
        let f = f5();
        let cusp = infinity_cusp(&f, 7);
        let w = weight(vec![2, 2]);
        let entries: Vec<(FieldElement, FieldElement)> = totally_positive_points(&f, &o(), 10)
            .into_iter()
            .map(|x| (x, FieldElement::from_integers(10, 5)))
            .collect();
        let fexp = QExpansion::new(&f, cusp.clone(), w.clone(), 10, entries).unwrap();
        assert!(padic_congruence(&fexp, 5, 1));
        assert!(!padic_congruence(&fexp, 5, 2));
        assert!(!padic_congruence(&fexp, 2, 1));
        let zero = QExpansion::new(&f, cusp, w, 10, Vec::<(FieldElement, FieldElement)>::new())
            .unwrap();
        assert!(padic_congruence(&zero, 2, 5));
        // theta with eta = 1 has a_0 = 1: never divisible
        let eta = ThetaCharacter::constant_one(
            &f,
            o(),
            FractionalIdeal::from_rational_integer(3).unwrap(),
            FieldElement::one(),
        )
        .unwrap();
        let th = theta_qexp(&f, &eta, 8).unwrap();
        assert!(!padic_congruence(&th, 2, 1));
    }

    #[test]
    fn depth_of_cusps() {
        let f = f5();
        let one = FieldElement::one();
        // c = 0: unramified, infinite depth
        assert_eq!(cusp_depth(&one, &FieldElement::zero(), 3).unwrap(), None);
        // c = p^2
        assert_eq!(
            cusp_depth(&one, &FieldElement::from_integers(9, 0), 3).unwrap(),
            Some(2)
        );
        // c a p-unit
        assert_eq!(cusp_depth(&one, &FieldElement::from_integers(2, 1), 3).unwrap(), Some(0));
        // non-primitive pair is rejected
        assert!(cusp_depth(
            &FieldElement::from_integers(3, 0),
            &FieldElement::from_integers(6, 3),
            3
        )
        .is_err());
        let _ = f;
    }

    #[test]
    fn residue_coefficients() {
        let f = f5();
        let cusp = infinity_cusp(&f, 7);
        let w = weight(vec![2, 2]);
        let m = BigInt::from(25);
        let entries = vec![
            (FieldElement::zero(), ResidueInt::new(BigInt::from(5), m.clone())),
            (FieldElement::one(), ResidueInt::new(BigInt::from(30), m.clone())),
        ];
        let fexp = QExpansion::<ResidueInt>::new(&f, cusp, w, 10, entries).unwrap();
        assert_eq!(fexp.coefficient(&FieldElement::one()).value, BigInt::from(5));
    }
}
