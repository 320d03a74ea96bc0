//! Fractional ideals of o as exact rank-2 lattices in Hermite normal form.
//!
//! The canonical presentation of a lattice is (1/den) * (Z(a,0) + Z(b,c))
//! in coordinates over the integral basis {1, w}, with a, c > 0,
//! 0 <= b < a and gcd(a, b, c, den) = 1. The form is unique, so ideal
//! equality is plain field-by-field equality.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, Zero};

use crate::field::{FieldElement, QuadField};
use crate::rat;
use crate::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FractionalIdeal {
    a: BigInt,
    b: BigInt,
    c: BigInt,
    den: BigInt,
}

impl std::fmt::Debug for FractionalIdeal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[({},0),({},{})]/{}", self.a, self.b, self.c, self.den)
    }
}

impl FractionalIdeal {
    /// The ring of integers o.
    pub fn ring_of_integers() -> Self {
        FractionalIdeal { a: BigInt::one(), b: BigInt::zero(), c: BigInt::one(), den: BigInt::one() }
    }

    /// The o-module generated by the given field elements:
    /// sum of g*o over the generators.
    pub fn from_generators(field: &QuadField, gens: &[FieldElement]) -> Result<Self> {
        let omega = FieldElement::from_integers(0, 1);
        let mut rows = Vec::new();
        for g in gens {
            rows.push((g.c0.clone(), g.c1.clone()));
            let gw = field.mul(g, &omega);
            rows.push((gw.c0.clone(), gw.c1.clone()));
        }
        let ideal = Self::from_rows(rows)?;
        debug_assert!(ideal.is_o_module(field));
        Ok(ideal)
    }

    pub fn principal(field: &QuadField, x: &FieldElement) -> Result<Self> {
        Self::from_generators(field, std::slice::from_ref(x))
    }

    pub fn from_rational_integer(n: i64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidIdeal("zero ideal".into()));
        }
        let n = BigInt::from(n.abs());
        Ok(FractionalIdeal { a: n.clone(), b: BigInt::zero(), c: n, den: BigInt::one() })
    }

    /// Lattice from arbitrary rational rows; the result must have rank 2.
    /// Callers are responsible for o-stability of the row span.
    pub(crate) fn from_rows(rows: Vec<(BigRational, BigRational)>) -> Result<Self> {
        let mut den = BigInt::one();
        for (x, y) in &rows {
            den = den.lcm(x.denom());
            den = den.lcm(y.denom());
        }
        let int_rows: Vec<(BigInt, BigInt)> = rows
            .iter()
            .map(|(x, y)| {
                let xi = (x * BigRational::from_integer(den.clone())).to_integer();
                let yi = (y * BigRational::from_integer(den.clone())).to_integer();
                (xi, yi)
            })
            .collect();
        let (a, b, c) = hnf_two_columns(int_rows)
            .ok_or_else(|| Error::InvalidIdeal("row span has rank < 2".into()))?;
        let g = a.gcd(&b).gcd(&c).gcd(&den);
        Ok(FractionalIdeal { a: a / &g, b: b / &g, c: c / &g, den: den / &g })
    }

    /// Basis as field elements: [a/den, (b + c*w)/den].
    pub fn basis(&self) -> [FieldElement; 2] {
        let den = BigRational::from_integer(self.den.clone());
        [
            FieldElement::new(BigRational::from_integer(self.a.clone()) / &den, BigRational::zero()),
            FieldElement::new(
                BigRational::from_integer(self.b.clone()) / &den,
                BigRational::from_integer(self.c.clone()) / &den,
            ),
        ]
    }

    pub fn contains(&self, x: &FieldElement) -> bool {
        let den = BigRational::from_integer(self.den.clone());
        let y0 = &x.c0 * &den;
        let y1 = &x.c1 * &den;
        let t = &y1 / BigRational::from_integer(self.c.clone());
        if !rat::is_integer(&t) {
            return false;
        }
        let s = (&y0 - &t * BigRational::from_integer(self.b.clone()))
            / BigRational::from_integer(self.a.clone());
        rat::is_integer(&s)
    }

    pub fn is_o_module(&self, field: &QuadField) -> bool {
        let omega = FieldElement::from_integers(0, 1);
        self.basis().iter().all(|e| self.contains(&field.mul(e, &omega)))
    }

    /// Exact coordinates of x in this lattice basis, when x lies in the
    /// rational span (always, for rank 2).
    pub fn coordinates(&self, x: &FieldElement) -> (BigRational, BigRational) {
        let den = BigRational::from_integer(self.den.clone());
        let y0 = &x.c0 * &den;
        let y1 = &x.c1 * &den;
        let t = &y1 / BigRational::from_integer(self.c.clone());
        let s = (&y0 - &t * BigRational::from_integer(self.b.clone()))
            / BigRational::from_integer(self.a.clone());
        (s, t)
    }

    pub fn element_from_coordinates(&self, s: &BigRational, t: &BigRational) -> FieldElement {
        let [e1, e2] = self.basis();
        &e1.scale(s) + &e2.scale(t)
    }

    /// Positive generator norm: [o : L] as a rational (covolume ratio).
    pub fn norm(&self) -> BigRational {
        BigRational::new(&self.a * &self.c, &self.den * &self.den)
    }

    pub fn mul(&self, field: &QuadField, other: &Self) -> Self {
        let mut rows = Vec::with_capacity(4);
        for x in self.basis() {
            for y in other.basis() {
                let p = field.mul(&x, &y);
                rows.push((p.c0, p.c1));
            }
        }
        Self::from_rows(rows).expect("product of rank-2 lattices has rank 2")
    }

    pub fn conjugate(&self, field: &QuadField) -> Self {
        let rows = self
            .basis()
            .iter()
            .map(|e| {
                let c = field.conjugate(e);
                (c.c0, c.c1)
            })
            .collect();
        Self::from_rows(rows).expect("conjugate keeps rank")
    }

    /// Inverse fractional ideal; I * I^{-1} = o.
    pub fn inv(&self, field: &QuadField) -> Self {
        let conj = self.conjugate(field);
        let n = self.norm();
        let inv = conj.scale_rational(&n.recip());
        debug_assert_eq!(self.mul(field, &inv), Self::ring_of_integers());
        inv
    }

    pub fn scale_rational(&self, by: &BigRational) -> Self {
        let rows = self.basis().iter().map(|e| (&e.c0 * by, &e.c1 * by)).collect();
        Self::from_rows(rows).expect("scaling keeps rank")
    }

    pub fn scale_element(&self, field: &QuadField, by: &FieldElement) -> Self {
        let rows = self
            .basis()
            .iter()
            .map(|e| {
                let p = field.mul(e, by);
                (p.c0, p.c1)
            })
            .collect();
        Self::from_rows(rows).expect("scaling keeps rank")
    }

    /// Ideal sum I + J.
    pub fn add(&self, other: &Self) -> Self {
        let mut rows: Vec<(BigRational, BigRational)> =
            self.basis().iter().map(|e| (e.c0.clone(), e.c1.clone())).collect();
        rows.extend(other.basis().iter().map(|e| (e.c0.clone(), e.c1.clone())));
        Self::from_rows(rows).expect("sum keeps rank")
    }

    /// Trace dual {y : Tr(xy) in Z for all x in I} = I^{-1} d^{-1}.
    pub fn trace_dual(&self, field: &QuadField) -> Self {
        let [v1, v2] = self.basis();
        let g11 = field.trace(&field.mul(&v1, &v1));
        let g12 = field.trace(&field.mul(&v1, &v2));
        let g22 = field.trace(&field.mul(&v2, &v2));
        let det = &g11 * &g22 - &g12 * &g12;
        assert!(!det.is_zero(), "trace pairing degenerate");
        // rows of G^{-1} give the dual basis in terms of (v1, v2)
        let w1 = &v1.scale(&(&g22 / &det)) - &v2.scale(&(&g12 / &det));
        let w2 = &v2.scale(&(&g11 / &det)) - &v1.scale(&(&g12 / &det));
        let dual = Self::from_rows(vec![(w1.c0, w1.c1), (w2.c0, w2.c1)]).expect("dual keeps rank");
        debug_assert!(dual.is_o_module(field));
        dual
    }

    pub fn is_integral(&self) -> bool {
        self.basis().iter().all(|e| e.is_integral())
    }

    /// Sub-lattice test: other subset of self.
    pub fn contains_ideal(&self, other: &Self) -> bool {
        other.basis().iter().all(|e| self.contains(e))
    }

    pub fn is_coprime(&self, other: &Self) -> Result<bool> {
        if !self.is_integral() || !other.is_integral() {
            return Err(Error::InvalidIdeal("coprimality needs integral ideals".into()));
        }
        Ok(self.add(other) == Self::ring_of_integers())
    }

    /// Generator search: Some(g) with g*o = I, or None if no generator lies
    /// in the certified search region (for class-number-1 desk fields the
    /// region always contains one).
    pub fn principal_generator(&self, field: &QuadField) -> Option<FieldElement> {
        let n = self.norm();
        let (_, sqrt_n_hi) = rat::sqrt_bounds(&n, 16);
        let eps = field.fundamental_unit();
        let (_, eps_hi) = field.embeddings(&eps)[0].bounds(16);
        // Any generator can be unit-adjusted into |tau_i| <= sqrt(N) * eps1.
        let t = (&sqrt_n_hi + rat::int(1)) * (&eps_hi + rat::int(1));
        for x in self.points_in_radical_box(field, &t, &t) {
            if x.is_zero() {
                continue;
            }
            if field.norm(&x).abs() != n {
                continue;
            }
            if let Ok(p) = Self::principal(field, &x) {
                if p == *self {
                    return Some(x);
                }
            }
        }
        None
    }

    /// All lattice points whose radical coordinates satisfy |u| <= u_bound
    /// and |v| <= v_bound (x = u + v sqrt(D)). Conservative rectangle in
    /// basis coordinates, then exact filtering.
    pub fn points_in_radical_box(
        &self,
        field: &QuadField,
        u_bound: &BigRational,
        v_bound: &BigRational,
    ) -> Vec<FieldElement> {
        let [e1, e2] = self.basis();
        let (u1, v1) = field.as_radical(&e1);
        let (u2, v2) = field.as_radical(&e2);
        let det = &u1 * &v2 - &u2 * &v1;
        assert!(!det.is_zero());
        // (s, t) = M^{-1} (u, v) with M = [[u1, u2], [v1, v2]].
        let m11 = (&v2 / &det).abs();
        let m12 = (&u2 / &det).abs();
        let m21 = (&v1 / &det).abs();
        let m22 = (&u1 / &det).abs();
        let s_bound = rat::ceil_int(&(&m11 * u_bound + &m12 * v_bound));
        let t_bound = rat::ceil_int(&(&m21 * u_bound + &m22 * v_bound));
        let s_bound = big_to_i64(&s_bound);
        let t_bound = big_to_i64(&t_bound);
        let mut out = Vec::new();
        for s in -s_bound..=s_bound {
            for t in -t_bound..=t_bound {
                let u = &u1 * rat::int(s) + &u2 * rat::int(t);
                if u.abs() > *u_bound {
                    continue;
                }
                let v = &v1 * rat::int(s) + &v2 * rat::int(t);
                if v.abs() > *v_bound {
                    continue;
                }
                out.push(field.from_radical(&u, &v));
            }
        }
        out
    }

    /// Residue representatives of I/J for J subset of I, in a canonical
    /// triangular fundamental domain.
    pub fn quotient_reps(&self, field: &QuadField, sub: &Self) -> Result<Vec<FieldElement>> {
        let (p, q, r) = self.sub_lattice_hnf(sub)?;
        let _ = q;
        let mut reps = Vec::new();
        let mut x1 = BigInt::zero();
        while x1 < p {
            let mut x2 = BigInt::zero();
            while x2 < r {
                reps.push(self.element_from_coordinates(
                    &BigRational::from_integer(x1.clone()),
                    &BigRational::from_integer(x2.clone()),
                ));
                x2 += 1;
            }
            x1 += 1;
        }
        let _ = field;
        Ok(reps)
    }

    /// Canonical representative of x modulo the sub-lattice J.
    pub fn reduce_mod(&self, field: &QuadField, sub: &Self, x: &FieldElement) -> Result<FieldElement> {
        let (p, q, r) = self.sub_lattice_hnf(sub)?;
        let (s, t) = self.coordinates(x);
        if !rat::is_integer(&s) || !rat::is_integer(&t) {
            return Err(Error::MembershipViolation("element not in ambient lattice".into()));
        }
        let mut x1 = s.to_integer();
        let mut x2 = t.to_integer();
        let k = x2.div_floor(&r);
        x1 -= &k * &q;
        x2 -= &k * &r;
        let j = x1.div_floor(&p);
        x1 -= &j * &p;
        let _ = field;
        Ok(self.element_from_coordinates(
            &BigRational::from_integer(x1),
            &BigRational::from_integer(x2),
        ))
    }

    /// HNF rows (p,0),(q,r) of the sub-lattice J in this lattice's basis.
    fn sub_lattice_hnf(&self, sub: &Self) -> Result<(BigInt, BigInt, BigInt)> {
        let mut rows = Vec::new();
        for e in sub.basis() {
            let (s, t) = self.coordinates(&e);
            if !rat::is_integer(&s) || !rat::is_integer(&t) {
                return Err(Error::InvalidIdeal("not a sub-lattice".into()));
            }
            rows.push((s.to_integer(), t.to_integer()));
        }
        hnf_two_columns(rows).ok_or_else(|| Error::InvalidIdeal("sub-lattice rank < 2".into()))
    }
}

/// Row HNF of an n x 2 integer matrix into (a, b, c) with rows (a,0),(b,c),
/// a, c > 0 and 0 <= b < a. None when the rank is below 2.
fn hnf_two_columns(mut rows: Vec<(BigInt, BigInt)>) -> Option<(BigInt, BigInt, BigInt)> {
    rows.retain(|(x, y)| !x.is_zero() || !y.is_zero());
    // Reduce the second column to a single pivot by repeated remainders.
    loop {
        let mut nonzero: Vec<usize> =
            (0..rows.len()).filter(|&i| !rows[i].1.is_zero()).collect();
        if nonzero.len() <= 1 {
            break;
        }
        nonzero.sort_by_key(|&i| rows[i].1.abs());
        let pivot = nonzero[0];
        let (pb, pc) = rows[pivot].clone();
        for &i in &nonzero[1..] {
            let q = div_round(&rows[i].1, &pc);
            rows[i].0 -= &q * &pb;
            rows[i].1 -= &q * &pc;
        }
        rows.retain(|(x, y)| !x.is_zero() || !y.is_zero());
    }
    let pivot_idx = rows.iter().position(|(_, y)| !y.is_zero())?;
    let (mut b, mut c) = rows[pivot_idx].clone();
    if c.is_negative() {
        b = -b;
        c = -c;
    }
    let mut a = BigInt::zero();
    for (i, (x, _)) in rows.iter().enumerate() {
        if i != pivot_idx {
            a = a.gcd(x);
        }
    }
    if a.is_zero() {
        return None;
    }
    b = b.mod_floor(&a);
    Some((a, b, c))
}

/// Rounded division used to shrink remainders fast.
fn div_round(x: &BigInt, y: &BigInt) -> BigInt {
    let two = BigInt::from(2);
    let (q, r) = x.div_mod_floor(y);
    if &r * &two >= y.abs() {
        q + 1
    } else {
        q
    }
}

fn big_to_i64(x: &BigInt) -> i64 {
    use num::ToPrimitive;
    x.to_i64().expect("enumeration bound exceeds i64")
}

/// The different ideal d, computed as the inverse of the trace dual of o;
/// its norm is |Delta_F|.
pub fn different(field: &QuadField) -> FractionalIdeal {
    FractionalIdeal::ring_of_integers().trace_dual(field).inv(field)
}

/// The dual convention f* = f^{-1} d^{-1} equals the trace dual.
pub fn star(field: &QuadField, f: &FractionalIdeal) -> FractionalIdeal {
    f.trace_dual(field)
}

/// Hypothesis check for the level ideal: n integral and proper, coprime to
/// N(c d) and to the discriminant, and dividing neither 2 nor 3. For
/// integral c the discriminant condition is already implied by N(c d);
/// keeping it explicit makes the check honest for fractional c, where
/// torsion does appear at levels sharing a factor with Delta_F.
pub fn check_nt(field: &QuadField, n: &FractionalIdeal, c: &FractionalIdeal) -> Result<bool> {
    if !n.is_integral() || *n == FractionalIdeal::ring_of_integers() {
        return Err(Error::InvalidIdeal("level ideal must be integral and proper".into()));
    }
    let cd = c.mul(field, &different(field));
    let norm = cd.norm();
    let p = norm.numer().abs();
    let q = norm.denom().abs();
    let delta = field.discriminant().abs();
    for m in [p, q, delta] {
        if m.is_one() {
            continue;
        }
        let m_ideal = FractionalIdeal {
            a: m.clone(),
            b: BigInt::zero(),
            c: m.clone(),
            den: BigInt::one(),
        };
        if !n.is_coprime(&m_ideal)? {
            return Ok(false);
        }
    }
    for small in [2i64, 3] {
        if n.contains_ideal(&FractionalIdeal::from_rational_integer(small)?) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// One integral ideal per ideal class, by Minkowski-bound enumeration and
/// pairwise principality tests.
pub fn class_representatives(field: &QuadField, bound: Option<i64>) -> Result<Vec<FractionalIdeal>> {
    let bound = match bound {
        Some(b) => b,
        None => {
            let disc = BigRational::from_integer(field.discriminant());
            let (_, hi) = rat::sqrt_bounds(&disc, 16);
            big_to_i64(&rat::ceil_int(&(hi / rat::int(2))))
        }
    };
    if bound > 10_000 {
        return Err(Error::BoundExceeded(format!("Minkowski enumeration bound {}", bound)));
    }
    let mut reps: Vec<FractionalIdeal> = Vec::new();
    for ideal in integral_ideals_of_norm_up_to(field, bound) {
        let mut known = false;
        for r in &reps {
            let quot = ideal.mul(field, &r.inv(field));
            if quot.principal_generator(field).is_some() {
                known = true;
                break;
            }
        }
        if !known {
            reps.push(ideal);
        }
    }
    Ok(reps)
}

/// All integral ideals of norm <= bound, canonical and deduplicated.
pub fn integral_ideals_of_norm_up_to(field: &QuadField, bound: i64) -> Vec<FractionalIdeal> {
    let omega = FieldElement::from_integers(0, 1);
    let mut out = Vec::new();
    for n in 1..=bound {
        for c in 1..=n {
            if n % c != 0 {
                continue;
            }
            let a = n / c;
            if a % c != 0 {
                continue; // c | a is forced by o-stability
            }
            let mut b = 0;
            while b < a {
                let cand = FractionalIdeal {
                    a: BigInt::from(a),
                    b: BigInt::from(b),
                    c: BigInt::from(c),
                    den: BigInt::one(),
                };
                // membership of w * (b + c w) decides o-stability
                let e2 = cand.basis()[1].clone();
                if cand.contains(&field.mul(&e2, &omega)) {
                    out.push(cand);
                }
                b += c; // c | b is forced as well
            }
        }
    }
    out
}

/// Units congruent to 1 modulo f, as a finite-index subgroup of o^x:
/// the smallest power of the fundamental unit (up to sign) landing in
/// 1 + f, together with -1 when 2 lies in f.
#[derive(Clone, Debug)]
pub struct ModUnits {
    pub generator: FieldElement,
    pub includes_minus_one: bool,
}

pub fn units_congruent_one(
    field: &QuadField,
    modulus: &FractionalIdeal,
    search_bound: u32,
) -> Result<ModUnits> {
    if !modulus.is_integral() {
        return Err(Error::InvalidIdeal("modulus must be integral".into()));
    }
    let eps = field.fundamental_unit();
    let one = FieldElement::one();
    let mut pow = eps.clone();
    for _ in 1..=search_bound {
        for cand in [pow.clone(), -&pow] {
            if modulus.contains(&(&cand - &one)) {
                let minus = modulus.contains(&FieldElement::from_integers(2, 0));
                return Ok(ModUnits { generator: cand, includes_minus_one: minus });
            }
        }
        pow = field.mul(&pow, &eps);
    }
    Err(Error::BoundExceeded(format!("no unit congruent to 1 within {} powers", search_bound)))
}
