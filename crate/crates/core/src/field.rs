//! Exact arithmetic in a totally real quadratic field F = Q(sqrt(D)).
//!
//! Elements are stored as exact rational coordinates over the integral
//! basis {1, w}, where w = sqrt(D) for D = 2,3 (mod 4) and
//! w = (1+sqrt(D))/2 for D = 1 (mod 4). Embedding signs and comparisons
//! are decided by squaring with sign bookkeeping, never by approximating
//! the radical. Interfaces are written for general degree d but the
//! algorithms are implemented at d = 2; the Dirichlet rank is then 1 and
//! every unit computation is a certified bounded search.

use std::cmp::Ordering;
use std::fmt;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

use crate::rat;
use crate::{Error, Result};

/// An element c0 + c1*w in coordinates over the integral basis {1, w}.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FieldElement {
    pub c0: BigRational,
    pub c1: BigRational,
}

impl FieldElement {
    pub fn new(c0: BigRational, c1: BigRational) -> Self {
        FieldElement { c0, c1 }
    }

    pub fn from_integers(c0: i64, c1: i64) -> Self {
        FieldElement::new(rat::int(c0), rat::int(c1))
    }

    pub fn from_rational(x: BigRational) -> Self {
        FieldElement::new(x, BigRational::zero())
    }

    pub fn zero() -> Self {
        FieldElement::from_integers(0, 0)
    }

    pub fn one() -> Self {
        FieldElement::from_integers(1, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.c0.is_zero() && self.c1.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.c1.is_zero()
    }

    /// True when both coordinates are integers, i.e. the element lies in o.
    pub fn is_integral(&self) -> bool {
        rat::is_integer(&self.c0) && rat::is_integer(&self.c1)
    }

    pub fn scale(&self, by: &BigRational) -> FieldElement {
        FieldElement::new(&self.c0 * by, &self.c1 * by)
    }
}

impl std::ops::Add for &FieldElement {
    type Output = FieldElement;
    fn add(self, other: &FieldElement) -> FieldElement {
        FieldElement::new(&self.c0 + &other.c0, &self.c1 + &other.c1)
    }
}

impl std::ops::Sub for &FieldElement {
    type Output = FieldElement;
    fn sub(self, other: &FieldElement) -> FieldElement {
        FieldElement::new(&self.c0 - &other.c0, &self.c1 - &other.c1)
    }
}

impl std::ops::Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement::new(-&self.c0, -&self.c1)
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}w)", rat::to_string(&self.c0), rat::to_string(&self.c1))
    }
}

/// An exact real number u + v*sqrt(D): the value of one embedding.
///
/// Signs and comparisons against rationals are decided exactly; rational
/// lower/upper bounds of any requested precision are available for
/// enumeration boxes.
#[derive(Clone, Debug)]
pub struct QuadReal {
    pub u: BigRational,
    pub v: BigRational,
    pub d: i64,
}

impl QuadReal {
    /// Exact sign: -1, 0 or +1.
    pub fn sign(&self) -> i32 {
        let su = rational_sign(&self.u);
        let sv = rational_sign(&self.v);
        if sv == 0 {
            return su;
        }
        if su == 0 {
            return sv;
        }
        if su == sv {
            return su;
        }
        // Opposite signs: compare u^2 against v^2 D. Equality would force
        // sqrt(D) rational, impossible for squarefree D > 1.
        let lhs = &self.u * &self.u;
        let rhs = &self.v * &self.v * rat::int(self.d);
        match lhs.cmp(&rhs) {
            Ordering::Greater => su,
            Ordering::Less => sv,
            Ordering::Equal => unreachable!("sqrt({}) rational", self.d),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.u.is_zero() && self.v.is_zero()
    }

    /// Exact comparison against a rational.
    pub fn cmp_rational(&self, r: &BigRational) -> Ordering {
        let shifted = QuadReal { u: &self.u - r, v: self.v.clone(), d: self.d };
        match shifted.sign() {
            s if s > 0 => Ordering::Greater,
            s if s < 0 => Ordering::Less,
            _ => Ordering::Equal,
        }
    }

    /// Certified rational bounds lo <= value <= hi.
    pub fn bounds(&self, bits: u32) -> (BigRational, BigRational) {
        let (slo, shi) = rat::sqrt_bounds(&rat::int(self.d), bits);
        if self.v.is_negative() {
            (&self.u + &self.v * shi, &self.u + &self.v * slo)
        } else {
            (&self.u + &self.v * slo, &self.u + &self.v * shi)
        }
    }
}

impl PartialEq for QuadReal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for QuadReal {}

impl PartialOrd for QuadReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QuadReal {
    /// Exact order on values of the same field.
    fn cmp(&self, other: &Self) -> Ordering {
        assert_eq!(self.d, other.d, "comparing values of different fields");
        let diff = QuadReal { u: &self.u - &other.u, v: &self.v - &other.v, d: self.d };
        match diff.sign() {
            s if s > 0 => Ordering::Greater,
            s if s < 0 => Ordering::Less,
            _ => Ordering::Equal,
        }
    }
}

fn rational_sign(x: &BigRational) -> i32 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

/// Unit-group data at d = 2: everything is generated by the fundamental
/// unit found by certified bounded search.
#[derive(Clone, Debug)]
pub struct UnitGroupData {
    /// Generator of o^x / {+-1}.
    pub fundamental: FieldElement,
    /// Generator of the totally positive units o_+^x.
    pub plus_gen: FieldElement,
    /// Generator of the squares o^{x2}; totally positive, equals fundamental^2.
    pub square_gen: FieldElement,
}

/// A totally real quadratic field Q(sqrt(D)), D > 1 squarefree.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct QuadField {
    d: i64,
}

impl QuadField {
    pub fn new(d: i64) -> Result<Self> {
        if d <= 1 {
            return Err(Error::InvalidField(format!("D = {} must be > 1", d)));
        }
        if !is_squarefree(d) {
            return Err(Error::InvalidField(format!("D = {} is not squarefree", d)));
        }
        Ok(QuadField { d })
    }

    pub fn d(&self) -> i64 {
        self.d
    }

    pub fn degree(&self) -> usize {
        2
    }

    /// True when the integral basis is {1, (1+sqrt(D))/2}.
    pub fn half_basis(&self) -> bool {
        self.d % 4 == 1
    }

    pub fn discriminant(&self) -> BigInt {
        if self.half_basis() {
            BigInt::from(self.d)
        } else {
            BigInt::from(4 * self.d)
        }
    }

    /// w^2 = wq + wp * w.
    fn omega_square(&self) -> (BigRational, BigRational) {
        if self.half_basis() {
            (rat::int((self.d - 1) / 4), rat::int(1))
        } else {
            (rat::int(self.d), rat::int(0))
        }
    }

    pub fn integral_basis(&self) -> [FieldElement; 2] {
        [FieldElement::one(), FieldElement::from_integers(0, 1)]
    }

    pub fn basis_description(&self) -> String {
        if self.half_basis() {
            format!("1, (1+sqrt({}))/2", self.d)
        } else {
            format!("1, sqrt({})", self.d)
        }
    }

    pub fn mul(&self, x: &FieldElement, y: &FieldElement) -> FieldElement {
        let (wq, wp) = self.omega_square();
        let cross = &x.c1 * &y.c1;
        FieldElement::new(
            &x.c0 * &y.c0 + &cross * wq,
            &x.c0 * &y.c1 + &x.c1 * &y.c0 + &cross * wp,
        )
    }

    /// Galois conjugate: sqrt(D) -> -sqrt(D).
    pub fn conjugate(&self, x: &FieldElement) -> FieldElement {
        if self.half_basis() {
            // conj(w) = 1 - w
            FieldElement::new(&x.c0 + &x.c1, -&x.c1)
        } else {
            FieldElement::new(x.c0.clone(), -&x.c1)
        }
    }

    pub fn trace(&self, x: &FieldElement) -> BigRational {
        let tw = if self.half_basis() { rat::int(1) } else { rat::int(0) };
        &x.c0 * rat::int(2) + &x.c1 * tw
    }

    pub fn norm(&self, x: &FieldElement) -> BigRational {
        let conj = self.conjugate(x);
        let prod = self.mul(x, &conj);
        debug_assert!(prod.c1.is_zero());
        prod.c0
    }

    pub fn inv(&self, x: &FieldElement) -> Result<FieldElement> {
        if x.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let n = self.norm(x);
        let conj = self.conjugate(x);
        Ok(conj.scale(&n.recip()))
    }

    pub fn div(&self, x: &FieldElement, y: &FieldElement) -> Result<FieldElement> {
        Ok(self.mul(x, &self.inv(y)?))
    }

    pub fn pow(&self, x: &FieldElement, k: i64) -> Result<FieldElement> {
        let base = if k < 0 { self.inv(x)? } else { x.clone() };
        let mut acc = FieldElement::one();
        for _ in 0..k.unsigned_abs() {
            acc = self.mul(&acc, &base);
        }
        Ok(acc)
    }

    /// Coordinates (u, v) with x = u + v*sqrt(D); an embedding-independent
    /// radical presentation used by sign logic and by test oracles.
    pub fn as_radical(&self, x: &FieldElement) -> (BigRational, BigRational) {
        if self.half_basis() {
            let half = rat::frac(1, 2);
            (&x.c0 + &x.c1 * &half, &x.c1 * &half)
        } else {
            (x.c0.clone(), x.c1.clone())
        }
    }

    pub fn from_radical(&self, u: &BigRational, v: &BigRational) -> FieldElement {
        if self.half_basis() {
            let two = rat::int(2);
            FieldElement::new(u - v, v * &two)
        } else {
            FieldElement::new(u.clone(), v.clone())
        }
    }

    /// The two real embeddings, as exact comparison handles. The first
    /// embedding sends sqrt(D) to the positive root.
    pub fn embeddings(&self, x: &FieldElement) -> [QuadReal; 2] {
        let (u, v) = self.as_radical(x);
        [
            QuadReal { u: u.clone(), v: v.clone(), d: self.d },
            QuadReal { u, v: -v, d: self.d },
        ]
    }

    pub fn embedding_signs(&self, x: &FieldElement) -> [i32; 2] {
        let [e1, e2] = self.embeddings(x);
        [e1.sign(), e2.sign()]
    }

    pub fn is_totally_positive(&self, x: &FieldElement) -> bool {
        self.embedding_signs(x) == [1, 1]
    }

    pub fn is_totally_nonnegative(&self, x: &FieldElement) -> bool {
        let [s1, s2] = self.embedding_signs(x);
        s1 >= 0 && s2 >= 0
    }

    /// Lexicographic order on (first embedding, second embedding); the
    /// deterministic tie-break used everywhere a canonical orbit
    /// representative is needed.
    pub fn cmp_embeddings(&self, x: &FieldElement, y: &FieldElement) -> Ordering {
        let [x1, x2] = self.embeddings(x);
        let [y1, y2] = self.embeddings(y);
        x1.cmp(&y1).then_with(|| x2.cmp(&y2))
    }

    pub fn is_unit(&self, x: &FieldElement) -> bool {
        x.is_integral() && self.norm(x).abs().is_one()
    }

    /// Integer bounds (b0, b1) with: any x whose embeddings satisfy
    /// |tau_i(x)| <= t_i has |c0| <= b0 and |c1| <= b1.
    pub fn coord_bounds_for_embedding_box(
        &self,
        t1: &BigRational,
        t2: &BigRational,
    ) -> (BigInt, BigInt) {
        let (sqrt_lo, _) = rat::sqrt_bounds(&rat::int(self.d), 32);
        assert!(sqrt_lo.is_positive());
        let half_sum = (t1 + t2) / rat::int(2);
        // |u| <= (t1+t2)/2, |v| <= (t1+t2)/(2 sqrt(D)).
        let u_bound = half_sum.clone();
        let v_bound = &half_sum / &sqrt_lo;
        if self.half_basis() {
            // c1 = 2v, c0 = u - v
            (rat::ceil_int(&(&u_bound + &v_bound)), rat::ceil_int(&(&v_bound * rat::int(2))))
        } else {
            (rat::ceil_int(&u_bound), rat::ceil_int(&v_bound))
        }
    }

    /// The fundamental unit: the generator of o^x/{+-1} normalized so its
    /// first embedding exceeds 1. Found by brute-force search over bounded
    /// coordinates; the enumeration radius certifies minimality.
    pub fn fundamental_unit(&self) -> FieldElement {
        // Grow the box until some non-torsion unit appears.
        let mut bound: i64 = 4;
        let first = loop {
            if let Some(u) = self.smallest_unit_in_box(bound) {
                break u;
            }
            bound *= 2;
            assert!(bound < 1 << 40, "fundamental unit search exploded");
        };
        // Every unit with 1 < tau_1 <= tau_1(first) has coordinates within
        // a box computed from an upper bound of tau_1(first); re-search
        // there and take the exact minimum.
        let (_, hi) = self.embeddings(&first)[0].bounds(16);
        let (b0, b1) = self.coord_bounds_for_embedding_box(&(&hi + rat::int(1)), &rat::int(1));
        
        self
            .smallest_unit_in_box(bigint_to_i64(&b0.max(b1)))
            .expect("unit disappeared from certified box")
    }

    /// Smallest unit with tau_1 > 1 among integral points with
    /// |c0|, |c1| <= bound; None when the box contains no such unit.
    fn smallest_unit_in_box(&self, bound: i64) -> Option<FieldElement> {
        let mut best: Option<FieldElement> = None;
        for c0 in -bound..=bound {
            for c1 in -bound..=bound {
                let x = FieldElement::from_integers(c0, c1);
                if x.c1.is_zero() {
                    continue; // torsion or non-unit
                }
                if !self.norm(&x).abs().is_one() {
                    continue;
                }
                let e1 = &self.embeddings(&x)[0];
                if e1.cmp_rational(&rat::int(1)) != Ordering::Greater {
                    continue;
                }
                match &best {
                    None => best = Some(x),
                    Some(b) => {
                        if self.embeddings(&x)[0].cmp(&self.embeddings(b)[0]) == Ordering::Less {
                            best = Some(x);
                        }
                    }
                }
            }
        }
        best
    }

    /// Unit-group generators; the square generator is the fundamental unit
    /// squared and is always totally positive.
    pub fn unit_group(&self) -> UnitGroupData {
        let eps = self.fundamental_unit();
        let square = self.mul(&eps, &eps);
        let plus = if self.norm(&eps) == rat::int(-1) {
            square.clone()
        } else if self.is_totally_positive(&eps) {
            eps.clone()
        } else {
            -&eps
        };
        debug_assert!(self.is_totally_positive(&plus));
        debug_assert!(self.is_totally_positive(&square));
        UnitGroupData { fundamental: eps, plus_gen: plus, square_gen: square }
    }
}

fn is_squarefree(n: i64) -> bool {
    let mut n = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return false;
            }
        }
        p += 1;
    }
    true
}

fn bigint_to_i64(x: &BigInt) -> i64 {
    use num::ToPrimitive;
    x.to_i64().expect("bound exceeds i64")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f5() -> QuadField {
        QuadField::new(5).unwrap()
    }

    fn f2() -> QuadField {
        QuadField::new(2).unwrap()
    }

    fn sqrt5(f: &QuadField) -> FieldElement {
        // sqrt(5) = -1 + 2w for w = (1+sqrt(5))/2
        f.from_radical(&rat::int(0), &rat::int(1))
    }

    #[test]
    fn rejects_bad_descriptors() {
        assert!(QuadField::new(12).is_err());
        assert!(QuadField::new(1).is_err());
        assert!(QuadField::new(-5).is_err());
    }

    #[test]
    fn embedding_signs_examples() {
        let f = f5();
        assert_eq!(f.embedding_signs(&FieldElement::one()), [1, 1]);
        assert_eq!(f.embedding_signs(&sqrt5(&f)), [1, -1]);
        // (3+sqrt(5))/2: both positive since 3^2 > 5
        let x = f.from_radical(&rat::frac(3, 2), &rat::frac(1, 2));
        assert_eq!(f.embedding_signs(&x), [1, 1]);
    }

    #[test]
    fn total_positivity_examples() {
        let f = f5();
        assert!(f.is_totally_positive(&FieldElement::one()));
        assert!(!f.is_totally_positive(&sqrt5(&f)));
        // golden ratio (1+sqrt(5))/2 = w has a negative conjugate
        assert!(!f.is_totally_positive(&FieldElement::from_integers(0, 1)));
        assert!(!f.is_totally_positive(&FieldElement::zero()));
    }

    #[test]
    fn trace_and_norm_examples() {
        let f = f5();
        assert_eq!(f.trace(&FieldElement::one()), rat::int(2));
        // norm((1+sqrt(5))/2) = (1-5)/4 = -1
        assert_eq!(f.norm(&FieldElement::from_integers(0, 1)), rat::int(-1));
        let g = f2();
        // trace(sqrt(2)) = 0 for D = 2,3 mod 4
        assert_eq!(g.trace(&FieldElement::from_integers(0, 1)), rat::int(0));
    }

    #[test]
    fn discriminant_matches_trace_pairing_determinant() {
        for d in [5i64, 2, 3, 13, 7] {
            let f = QuadField::new(d).unwrap();
            let [b1, b2] = f.integral_basis();
            let g11 = f.trace(&f.mul(&b1, &b1));
            let g12 = f.trace(&f.mul(&b1, &b2));
            let g22 = f.trace(&f.mul(&b2, &b2));
            let det = &g11 * &g22 - &g12 * &g12;
            assert_eq!(det, BigRational::from_integer(f.discriminant()));
        }
    }

    #[test]
    fn fundamental_units() {
        let f = f5();
        assert_eq!(f.fundamental_unit(), FieldElement::from_integers(0, 1)); // (1+sqrt(5))/2
        let g = f2();
        assert_eq!(g.fundamental_unit(), FieldElement::from_integers(1, 1)); // 1+sqrt(2)
        let h = QuadField::new(3).unwrap();
        assert_eq!(h.fundamental_unit(), FieldElement::from_integers(2, 1)); // 2+sqrt(3)
    }

    #[test]
    fn fundamental_unit_minimality_oracle() {
        // Independent scan: no unit strictly between 1 and eps0 in the
        // first embedding, over a wide box.
        for d in [5i64, 2, 3] {
            let f = QuadField::new(d).unwrap();
            let eps = f.fundamental_unit();
            let top = f.embeddings(&eps)[0].clone();
            for c0 in -30i64..=30 {
                for c1 in -30i64..=30 {
                    let x = FieldElement::from_integers(c0, c1);
                    if x.c1.is_zero() || !f.norm(&x).abs().is_one() {
                        continue;
                    }
                    let e = &f.embeddings(&x)[0];
                    if e.cmp_rational(&rat::int(1)) == Ordering::Greater {
                        assert_ne!(e.cmp(&top), Ordering::Less, "smaller unit than eps0: {:?}", x);
                    }
                }
            }
        }
    }

    #[test]
    fn square_unit_generators() {
        let f = f5();
        let sq = f.unit_group().square_gen;
        // (3+sqrt(5))/2 = 1 + w
        assert_eq!(sq, FieldElement::from_integers(1, 1));
        assert!(f.is_totally_positive(&sq));
        assert_ne!(sq, FieldElement::one());
        let g = f2();
        assert_eq!(g.unit_group().square_gen, FieldElement::from_integers(3, 2)); // 3+2sqrt(2)
        // D=3: norm(2+sqrt(3)) = 1, already totally positive
        let h = QuadField::new(3).unwrap();
        let ug = h.unit_group();
        assert_eq!(ug.plus_gen, FieldElement::from_integers(2, 1));
        assert!(h.is_totally_positive(&ug.plus_gen));
    }

    fn small_elt() -> impl Strategy<Value = FieldElement> {
        (-20i64..20, -20i64..20, 1i64..6, 1i64..6)
            .prop_map(|(a, b, p, q)| FieldElement::new(rat::frac(a, p), rat::frac(b, q)))
    }

    proptest! {
        #[test]
        fn trace_is_additive(x in small_elt(), y in small_elt()) {
            let f = f5();
            prop_assert_eq!(f.trace(&(&x + &y)), f.trace(&x) + f.trace(&y));
        }

        #[test]
        fn norm_is_multiplicative(x in small_elt(), y in small_elt()) {
            let f = f5();
            prop_assert_eq!(f.norm(&f.mul(&x, &y)), f.norm(&x) * f.norm(&y));
        }

        #[test]
        fn positivity_closed_under_product(x in small_elt(), y in small_elt()) {
            let f = f5();
            if f.is_totally_positive(&x) && f.is_totally_positive(&y) {
                prop_assert!(f.is_totally_positive(&f.mul(&x, &y)));
            }
        }

        #[test]
        fn inverse_round_trips(x in small_elt()) {
            let f = f2();
            if !x.is_zero() {
                let inv = f.inv(&x).unwrap();
                prop_assert_eq!(f.mul(&x, &inv), FieldElement::one());
            }
        }
    }
}
