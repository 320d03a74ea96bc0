//! Rational polyhedral cones in Z^2: faces, duals, Hilbert bases of dual
//! monoids, smoothness, limit-point classes and orbit dimensions.
//!
//! A `Cone` is given by the primitive rays of its closure and always
//! denotes the *relative interior* of that closure, so the cones of a fan
//! are pairwise disjoint sets. The pairing between characters and
//! cocharacters is the standard dot product in the fixed basis.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, Zero};

use crate::{Error, Result};

/// A vector of the cocharacter lattice (or its dual) in a fixed basis.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LatticeVector(pub BigInt, pub BigInt);

impl std::fmt::Debug for LatticeVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.0, self.1)
    }
}

impl LatticeVector {
    pub fn new(x: i64, y: i64) -> Self {
        LatticeVector(BigInt::from(x), BigInt::from(y))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero() && self.1.is_zero()
    }

    /// Primitive representative: divide by the gcd of the coordinates.
    pub fn primitive(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let g = self.0.gcd(&self.1);
        LatticeVector(&self.0 / &g, &self.1 / &g)
    }

    pub fn is_primitive(&self) -> bool {
        !self.is_zero() && self.0.gcd(&self.1).is_one()
    }

    pub fn dot(&self, other: &Self) -> BigInt {
        &self.0 * &other.0 + &self.1 * &other.1
    }

    pub fn cross(&self, other: &Self) -> BigInt {
        &self.0 * &other.1 - &self.1 * &other.0
    }

    pub fn add(&self, other: &Self) -> Self {
        LatticeVector(&self.0 + &other.0, &self.1 + &other.1)
    }

    pub fn neg(&self) -> Self {
        LatticeVector(-&self.0, -&self.1)
    }

    /// Rotate by 90 degrees: (x, y) -> (-y, x).
    fn rot90(&self) -> Self {
        LatticeVector(-&self.1, self.0.clone())
    }
}

/// Rational point of the plane, used for membership queries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalVector(pub BigRational, pub BigRational);

impl RationalVector {
    pub fn is_zero(&self) -> bool {
        self.0.is_zero() && self.1.is_zero()
    }

    pub fn from_lattice(v: &LatticeVector) -> Self {
        RationalVector(
            BigRational::from_integer(v.0.clone()),
            BigRational::from_integer(v.1.clone()),
        )
    }

    fn cross_lattice(&self, other: &LatticeVector) -> BigRational {
        &self.0 * BigRational::from_integer(other.1.clone())
            - &self.1 * BigRational::from_integer(other.0.clone())
    }
}

/// A strictly convex rational polyhedral cone, stored by the sorted
/// primitive rays of its closure; the cone itself is the relative interior.
/// Dimensions 0 (the zero cone), 1 (a ray) and 2 are possible.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Cone {
    rays: Vec<LatticeVector>,
}

impl std::fmt::Debug for Cone {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Cone{:?}", self.rays)
    }
}

impl Cone {
    pub fn zero() -> Self {
        Cone { rays: Vec::new() }
    }

    pub fn ray(v: LatticeVector) -> Result<Self> {
        if v.is_zero() {
            return Err(Error::InvalidCone("ray generator must be non-zero".into()));
        }
        Ok(Cone { rays: vec![v.primitive()] })
    }

    /// Cone from closure generators; rays are normalized, deduplicated and
    /// canonically sorted. Rejects non-strictly-convex input.
    pub fn from_rays(gens: &[LatticeVector]) -> Result<Self> {
        let mut rays: Vec<LatticeVector> =
            gens.iter().filter(|v| !v.is_zero()).map(|v| v.primitive()).collect();
        rays.sort();
        rays.dedup();
        match rays.len() {
            0 => Ok(Cone::zero()),
            1 => Ok(Cone { rays }),
            2 => {
                if rays[0].cross(&rays[1]).is_zero() {
                    return Err(Error::InvalidCone(
                        "proportional or opposite rays do not span a strict 2-cone".into(),
                    ));
                }
                Ok(Cone { rays })
            }
            _ => Err(Error::InvalidCone("more than two extremal rays in the plane".into())),
        }
    }

    pub fn rays(&self) -> &[LatticeVector] {
        &self.rays
    }

    pub fn dim(&self) -> usize {
        self.rays.len()
    }

    /// Membership of a rational point in the closed cone.
    pub fn closure_contains(&self, p: &RationalVector) -> bool {
        match self.rays.len() {
            0 => p.is_zero(),
            1 => {
                if !p.cross_lattice(&self.rays[0]).is_zero() {
                    return false;
                }
                // p = t * ray with t >= 0
                let t = ray_coefficient(p, &self.rays[0]);
                !t.is_negative()
            }
            2 => {
                let (s, t) = barycentric(p, &self.rays[0], &self.rays[1]);
                !s.is_negative() && !t.is_negative()
            }
            _ => unreachable!(),
        }
    }

    /// Membership in the relative interior (the cone itself).
    pub fn contains(&self, p: &RationalVector) -> bool {
        match self.rays.len() {
            0 => p.is_zero(),
            1 => {
                if !p.cross_lattice(&self.rays[0]).is_zero() {
                    return false;
                }
                ray_coefficient(p, &self.rays[0]).is_positive()
            }
            2 => {
                let (s, t) = barycentric(p, &self.rays[0], &self.rays[1]);
                s.is_positive() && t.is_positive()
            }
            _ => unreachable!(),
        }
    }

    /// All faces, including the zero cone and the cone itself, as
    /// relatively open cones.
    pub fn faces(&self) -> Vec<Cone> {
        let mut out = vec![Cone::zero()];
        for r in &self.rays {
            out.push(Cone { rays: vec![r.clone()] });
        }
        if self.rays.len() == 2 {
            out.push(self.clone());
        }
        out
    }

    /// The unique face whose relative interior contains p, for p in the
    /// closed cone.
    pub fn face_containing(&self, p: &RationalVector) -> Result<Cone> {
        if !self.closure_contains(p) {
            return Err(Error::OutsideCone);
        }
        for f in self.faces() {
            if f.contains(p) {
                return Ok(f);
            }
        }
        unreachable!("closure is the disjoint union of open faces")
    }

    /// Smoothness: the ray generators extend to a basis of the lattice.
    pub fn is_smooth(&self) -> bool {
        match self.rays.len() {
            0 => true,
            1 => true, // a primitive vector always extends to a basis
            2 => self.rays[0].cross(&self.rays[1]).abs().is_one(),
            _ => unreachable!(),
        }
    }

    /// Determinant of the two rays of a full-dimensional cone.
    pub fn det(&self) -> Option<BigInt> {
        if self.rays.len() == 2 {
            Some(self.rays[0].cross(&self.rays[1]))
        } else {
            None
        }
    }

    /// The dual cone in the character lattice, given by its extremal rays
    /// (only defined for full-dimensional cones, where it is strict).
    pub fn dual_cone(&self) -> Result<Cone> {
        if self.rays.len() != 2 {
            return Err(Error::InvalidCone("dual cone is strict only in full dimension".into()));
        }
        // inward normals of the two walls
        let mut duals = Vec::new();
        for (wall, other) in
            [(&self.rays[0], &self.rays[1]), (&self.rays[1], &self.rays[0])]
        {
            let mut n = wall.rot90();
            if n.dot(other).is_negative() {
                n = n.neg();
            }
            duals.push(n.primitive());
        }
        Cone::from_rays(&duals)
    }

    /// Minimal generating set (Hilbert basis) of the monoid X cap dual(σ).
    ///
    /// Full-dimensional cones go through the bounded staircase inside the
    /// fundamental parallelogram of the dual rays; rays give the half-plane
    /// monoid with its canonical three generators.
    pub fn dual_monoid_generators(&self) -> Result<Vec<LatticeVector>> {
        match self.rays.len() {
            0 => Ok(vec![
                LatticeVector::new(1, 0),
                LatticeVector::new(-1, 0),
                LatticeVector::new(0, 1),
                LatticeVector::new(0, -1),
            ]),
            1 => {
                let r = &self.rays[0];
                let s = r.rot90();
                // v with <v, r> = 1, reduced along s to the shortest choice
                let e = r.0.extended_gcd(&r.1);
                debug_assert!(e.gcd.is_one());
                let mut v = LatticeVector(e.x, e.y);
                debug_assert!(v.dot(r).is_one());
                let denom = s.dot(&s);
                let k = div_round_big(&v.dot(&s), &denom);
                v = LatticeVector(&v.0 - &k * &s.0, &v.1 - &k * &s.1);
                let mut out = vec![v, s.clone(), s.neg()];
                out.sort();
                Ok(out)
            }
            2 => {
                let dual = self.dual_cone()?;
                Ok(hilbert_basis_of_closed_cone(&dual.rays[0], &dual.rays[1]))
            }
            _ => unreachable!(),
        }
    }

    /// Hilbert basis of the closed cone itself (boundary lattice points of
    /// the staircase); used by the equivariant resolution.
    pub fn primal_hilbert_basis(&self) -> Result<Vec<LatticeVector>> {
        if self.rays.len() != 2 {
            return Err(Error::InvalidCone("primal staircase needs a 2-cone".into()));
        }
        Ok(hilbert_basis_of_closed_cone(&self.rays[0], &self.rays[1]))
    }
}

/// Dimension of the torus orbit attached to a face: d - dim(face).
pub fn orbit_dimension(face: &Cone) -> usize {
    2 - face.dim()
}

/// Do two boundary points degenerate to the same limit? True exactly when
/// they lie in the relative interior of the same face.
pub fn same_limit_point(
    xi1: &LatticeVector,
    xi2: &LatticeVector,
    sigma: &Cone,
) -> Result<bool> {
    let p1 = RationalVector::from_lattice(xi1);
    let p2 = RationalVector::from_lattice(xi2);
    let f1 = sigma.face_containing(&p1)?;
    let f2 = sigma.face_containing(&p2)?;
    Ok(f1 == f2)
}

/// Equivariant-morphism criterion between affine charts: sigma1 inside the
/// closure of sigma2.
pub fn admits_equivariant_morphism(sigma1: &Cone, sigma2: &Cone) -> bool {
    if sigma1.dim() == 0 {
        return true;
    }
    sigma1
        .rays()
        .iter()
        .all(|r| sigma2.closure_contains(&RationalVector::from_lattice(r)))
}

/// p = t * ray (valid only when p is on the ray's line).
fn ray_coefficient(p: &RationalVector, ray: &LatticeVector) -> BigRational {
    if !ray.0.is_zero() {
        &p.0 / BigRational::from_integer(ray.0.clone())
    } else {
        &p.1 / BigRational::from_integer(ray.1.clone())
    }
}

/// Coordinates of p in the (non-degenerate) ray basis (r1, r2).
fn barycentric(
    p: &RationalVector,
    r1: &LatticeVector,
    r2: &LatticeVector,
) -> (BigRational, BigRational) {
    let det = BigRational::from_integer(r1.cross(r2));
    let s = p.cross_lattice(r2) / det.clone();
    let t = -(p.cross_lattice(r1) / det);
    (s, t)
}

/// Hilbert basis of the monoid of lattice points of the closed cone
/// spanned by the primitive vectors g1, g2 (non-proportional).
///
/// Every irreducible element lies in the fundamental parallelogram
/// {a g1 + b g2 : 0 <= a, b <= 1}; candidates are enumerated there and an
/// element is kept iff it is not a sum of two non-zero monoid elements.
fn hilbert_basis_of_closed_cone(g1: &LatticeVector, g2: &LatticeVector) -> Vec<LatticeVector> {
    // conservative box covering the parallelogram of g1, g2
    let lo_x = (&g1.0).min(&BigInt::zero()) + (&g2.0).min(&BigInt::zero());
    let hi_x = (&g1.0).max(&BigInt::zero()) + (&g2.0).max(&BigInt::zero());
    let lo_y = (&g1.1).min(&BigInt::zero()) + (&g2.1).min(&BigInt::zero());
    let hi_y = (&g1.1).max(&BigInt::zero()) + (&g2.1).max(&BigInt::zero());
    let det = g1.cross(g2);
    assert!(!det.is_zero());
    let in_cone = |v: &LatticeVector| -> bool {
        // v = a g1 + b g2 with a, b >= 0 (rational)
        let a_num = v.cross(g2);
        let b_num = g1.cross(v);
        if det.is_positive() {
            !a_num.is_negative() && !b_num.is_negative()
        } else {
            !a_num.is_positive() && !b_num.is_positive()
        }
    };
    let in_parallelogram = |v: &LatticeVector| -> bool {
        let a_num = v.cross(g2);
        let b_num = g1.cross(v);
        if det.is_positive() {
            a_num <= det && b_num <= det
        } else {
            a_num >= det && b_num >= det
        }
    };
    let mut candidates: Vec<LatticeVector> = Vec::new();
    let mut x = lo_x.clone();
    while x <= hi_x {
        let mut y = lo_y.clone();
        while y <= hi_y {
            let v = LatticeVector(x.clone(), y.clone());
            if !v.is_zero() && in_cone(&v) && in_parallelogram(&v) {
                candidates.push(v);
            }
            y += 1;
        }
        x += 1;
    }
    // minimality: drop anything that is the sum of two candidates
    let set: std::collections::HashSet<LatticeVector> = candidates.iter().cloned().collect();
    let mut basis: Vec<LatticeVector> = candidates
        .iter()
        .filter(|v| {
            !candidates.iter().any(|w| {
                let diff = LatticeVector(&v.0 - &w.0, &v.1 - &w.1);
                !diff.is_zero() && **v != *w && set.contains(&diff) && in_cone(&diff)
            })
        })
        .cloned()
        .collect();
    basis.sort();
    basis
}

fn div_round_big(x: &BigInt, y: &BigInt) -> BigInt {
    let two = BigInt::from(2);
    let (q, r) = x.div_mod_floor(y);
    if &r * &two >= y.abs() {
        q + 1
    } else {
        q
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn quadrant() -> Cone {
        Cone::from_rays(&[LatticeVector::new(1, 0), LatticeVector::new(0, 1)]).unwrap()
    }

    fn wedge() -> Cone {
        Cone::from_rays(&[LatticeVector::new(1, 1), LatticeVector::new(1, -1)]).unwrap()
    }

    #[test]
    fn hilbert_basis_of_the_three_charts() {
        // A^2
        let g = quadrant().dual_monoid_generators().unwrap();
        assert_eq!(g, vec![LatticeVector::new(0, 1), LatticeVector::new(1, 0)]);
        // quadric cone: three generators with g1 + g3 = 2 g2
        let g = wedge().dual_monoid_generators().unwrap();
        assert_eq!(
            g,
            vec![LatticeVector::new(1, -1), LatticeVector::new(1, 0), LatticeVector::new(1, 1)]
        );
        assert_eq!(g[0].add(&g[2]), LatticeVector::new(2, 0).clone());
        // A^1 x Gm from a single ray
        let ray = Cone::ray(LatticeVector::new(1, 0)).unwrap();
        let g = ray.dual_monoid_generators().unwrap();
        assert_eq!(
            g,
            vec![LatticeVector::new(0, -1), LatticeVector::new(0, 1), LatticeVector::new(1, 0)]
        );
    }

    #[test]
    fn smoothness_verdicts() {
        assert!(quadrant().is_smooth());
        assert!(!wedge().is_smooth());
        // |det| = 2; the sign depends on the canonical ray order
        assert_eq!(wedge().det().unwrap().abs(), BigInt::from(2));
        assert!(Cone::ray(LatticeVector::new(3, 5)).unwrap().is_smooth());
    }

    #[test]
    fn face_counts() {
        assert_eq!(quadrant().faces().len(), 4);
        assert_eq!(Cone::ray(LatticeVector::new(1, 0)).unwrap().faces().len(), 2);
        assert_eq!(Cone::zero().faces().len(), 1);
    }

    #[test]
    fn orbit_dimensions_complement_face_dimensions() {
        let sigma = quadrant();
        for f in sigma.faces() {
            assert_eq!(f.dim() + orbit_dimension(&f), 2);
        }
        assert_eq!(orbit_dimension(&Cone::zero()), 2);
        assert_eq!(orbit_dimension(&sigma), 0);
    }

    #[test]
    fn limit_points() {
        let sigma = quadrant();
        assert!(same_limit_point(
            &LatticeVector::new(1, 1),
            &LatticeVector::new(2, 3),
            &sigma
        )
        .unwrap());
        assert!(!same_limit_point(
            &LatticeVector::new(1, 0),
            &LatticeVector::new(1, 1),
            &sigma
        )
        .unwrap());
        let v = LatticeVector::new(4, 7);
        assert!(same_limit_point(&v, &v, &sigma).unwrap());
        assert!(same_limit_point(&LatticeVector::new(-1, 0), &v, &sigma).is_err());
    }

    #[test]
    fn equivariant_morphism_criterion() {
        let sigma = quadrant();
        let ray = Cone::ray(LatticeVector::new(1, 0)).unwrap();
        assert!(admits_equivariant_morphism(&ray, &sigma));
        assert!(!admits_equivariant_morphism(&sigma, &ray));
        assert!(admits_equivariant_morphism(&sigma, &sigma));
    }

    fn random_cone(rng: &mut impl Rng) -> Option<Cone> {
        let r1 = LatticeVector::new(rng.gen_range(-50..=50), rng.gen_range(-50..=50));
        let r2 = LatticeVector::new(rng.gen_range(-50..=50), rng.gen_range(-50..=50));
        if r1.is_zero() || r2.is_zero() {
            return None;
        }
        Cone::from_rays(&[r1, r2]).ok().filter(|c| c.dim() == 2)
    }

    #[test]
    fn dual_of_dual_regenerates_the_cone() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut seen = 0;
        while seen < 60 {
            let Some(c) = random_cone(&mut rng) else { continue };
            seen += 1;
            assert_eq!(c.dual_cone().unwrap().dual_cone().unwrap(), c);
        }
    }

    #[test]
    fn smooth_iff_two_dual_generators() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        let mut seen = 0;
        while seen < 60 {
            let Some(c) = random_cone(&mut rng) else { continue };
            seen += 1;
            let basis = c.dual_monoid_generators().unwrap();
            assert_eq!(c.is_smooth(), basis.len() == 2, "cone {:?}", c);
            // minimality: no generator is the sum of two others
            for v in &basis {
                for w1 in &basis {
                    for w2 in &basis {
                        assert_ne!(*v, w1.add(w2), "{:?} = {:?} + {:?}", v, w1, w2);
                    }
                }
            }
        }
    }

    #[test]
    fn hilbert_basis_generates_the_monoid() {
        // spot check on the wedge: every dual-monoid point with small
        // coordinates is an N-combination of the basis
        let basis = wedge().dual_monoid_generators().unwrap();
        for x in -6i64..=6 {
            for y in -6i64..=6 {
                let v = LatticeVector::new(x, y);
                if v.is_zero() || x < y.abs() {
                    continue; // outside the dual cone x >= |y|
                }
                let mut found = false;
                'outer: for a in 0..=12 {
                    for b in 0..=12 {
                        for c in 0..=12 {
                            let s = LatticeVector(
                                a * &basis[0].0 + b * &basis[1].0 + c * &basis[2].0,
                                a * &basis[0].1 + b * &basis[1].1 + c * &basis[2].1,
                            );
                            if s == v {
                                found = true;
                                break 'outer;
                            }
                        }
                    }
                }
                assert!(found, "{:?} not generated", v);
            }
        }
    }
}
