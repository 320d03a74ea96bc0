//! Unit-invariant complete fans on the totally positive cone of an ideal
//! lattice: the Dirichlet-unit construction at a cusp, location of points
//! modulo the unit action, completeness certificates and the equivariant
//! staircase resolution.
//!
//! A fan stores only a fundamental domain for the action of the square
//! units: the zero cone, the base ray and the cones partitioning the
//! sector between the base ray and its unit translate. The full fan is
//! the orbit of the stored cones under the recorded symmetry matrix.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::cones::{Cone, LatticeVector, RationalVector};
use crate::field::{FieldElement, QuadField};
use crate::ideals::FractionalIdeal;
use crate::rat;
use crate::{Error, Result};

/// A rank-2 lattice realized by a fractional ideal with its canonical
/// HNF basis; converts between lattice coordinates and field elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdealLattice {
    pub field: QuadField,
    pub ideal: FractionalIdeal,
}

impl IdealLattice {
    pub fn new(field: QuadField, ideal: FractionalIdeal) -> Self {
        IdealLattice { field, ideal }
    }

    pub fn element_of(&self, v: &LatticeVector) -> FieldElement {
        self.element_of_rational(&RationalVector::from_lattice(v))
    }

    pub fn element_of_rational(&self, p: &RationalVector) -> FieldElement {
        self.ideal.element_from_coordinates(&p.0, &p.1)
    }

    pub fn vector_of(&self, x: &FieldElement) -> Result<LatticeVector> {
        let (s, t) = self.ideal.coordinates(x);
        if !rat::is_integer(&s) || !rat::is_integer(&t) {
            return Err(Error::MembershipViolation("element not in the lattice".into()));
        }
        Ok(LatticeVector(s.to_integer(), t.to_integer()))
    }

    pub fn rational_coords_of(&self, x: &FieldElement) -> RationalVector {
        let (s, t) = self.ideal.coordinates(x);
        RationalVector(s, t)
    }

    pub fn is_totally_positive(&self, p: &RationalVector) -> bool {
        self.field.is_totally_positive(&self.element_of_rational(p))
    }

    /// Matrix of multiplication by u on the lattice basis (columns are the
    /// coordinates of u*e_j); integral whenever u*L = L.
    pub fn unit_matrix(&self, u: &FieldElement) -> Result<Mat2> {
        let [e1, e2] = self.ideal.basis();
        let c1 = self.vector_of(&self.field.mul(u, &e1))?;
        let c2 = self.vector_of(&self.field.mul(u, &e2))?;
        Ok(Mat2 { m: [[c1.0, c2.0], [c1.1, c2.1]] })
    }
}

/// 2x2 integer matrix acting on lattice coordinates.
#[derive(Clone, PartialEq, Eq)]
pub struct Mat2 {
    pub m: [[BigInt; 2]; 2],
}

impl std::fmt::Debug for Mat2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[[{},{}],[{},{}]]",
            self.m[0][0], self.m[0][1], self.m[1][0], self.m[1][1]
        )
    }
}

impl Mat2 {
    pub fn identity() -> Self {
        Mat2 {
            m: [
                [BigInt::one(), BigInt::zero()],
                [BigInt::zero(), BigInt::one()],
            ],
        }
    }

    pub fn det(&self) -> BigInt {
        &self.m[0][0] * &self.m[1][1] - &self.m[0][1] * &self.m[1][0]
    }

    /// Inverse of a unimodular matrix.
    pub fn inverse(&self) -> Self {
        let d = self.det();
        assert!(d.clone().abs().is_one(), "inverse needs det +-1");
        let s = d; // det is its own inverse when +-1
        Mat2 {
            m: [
                [&self.m[1][1] * &s, -&self.m[0][1] * &s],
                [-&self.m[1][0] * &s, &self.m[0][0] * &s],
            ],
        }
    }

    pub fn apply(&self, v: &LatticeVector) -> LatticeVector {
        LatticeVector(
            &self.m[0][0] * &v.0 + &self.m[0][1] * &v.1,
            &self.m[1][0] * &v.0 + &self.m[1][1] * &v.1,
        )
    }

    pub fn apply_rational(&self, p: &RationalVector) -> RationalVector {
        let m = |i: usize, j: usize| BigRational::from_integer(self.m[i][j].clone());
        RationalVector(
            m(0, 0) * &p.0 + m(0, 1) * &p.1,
            m(1, 0) * &p.0 + m(1, 1) * &p.1,
        )
    }

    pub fn apply_cone(&self, c: &Cone) -> Cone {
        let rays: Vec<LatticeVector> = c.rays().iter().map(|r| self.apply(r)).collect();
        Cone::from_rays(&rays).expect("unimodular image of a cone is a cone")
    }
}

/// Unit-invariant fan, stored as a fundamental domain plus the symmetry.
#[derive(Clone, Debug)]
pub struct Fan {
    pub lattice: IdealLattice,
    /// Coordinates of the minimal-norm base point xi_0^*.
    pub base: LatticeVector,
    /// Generator of the square units driving the symmetry.
    pub unit: FieldElement,
    /// Matrix of the unit action on lattice coordinates.
    pub symmetry: Mat2,
    /// Stored cones: the zero cone, the base ray, and the cones inside the
    /// fundamental sector [base, unit*base).
    pub cones: Vec<Cone>,
    /// Indices of orbit representatives (all stored cones).
    pub fundamental: Vec<usize>,
}

/// Result of a completeness sampling run.
#[derive(Clone, Debug)]
pub struct CompletenessReport {
    pub samples: usize,
    pub seed: u64,
    pub witness: Option<RationalVector>,
}

impl CompletenessReport {
    pub fn is_complete(&self) -> bool {
        self.witness.is_none()
    }
}

/// Totally positive lattice point of minimal norm, ties broken by minimal
/// trace then lexicographic embedding order. The enumeration radius is
/// certified through unit reduction: a trace-reduced point of norm n has
/// trace at most sqrt(n) (sqrt(eps1) + 1/sqrt(eps1)).
pub fn min_norm_totally_positive(lattice: &IdealLattice) -> Result<FieldElement> {
    let field = &lattice.field;
    let mut bound = rat::int(1);
    let first = loop {
        let pts = totally_positive_up_to_trace(lattice, &bound);
        if let Some(best) = pick_min(field, &pts) {
            break best;
        }
        bound = &bound * rat::int(2);
        if bound > rat::int(1 << 24) {
            return Err(Error::BoundExceeded("no totally positive point found".into()));
        }
    };
    let n_min = field.norm(&first);
    let (_, sqrt_n_hi) = rat::sqrt_bounds(&n_min, 16);
    let eps = field.unit_group().square_gen;
    let (_, eps_hi) = field.embeddings(&eps)[0].bounds(16);
    let (_, sqrt_eps_hi) = rat::sqrt_bounds(&eps_hi, 16);
    let certified = (&sqrt_n_hi + rat::int(1)) * (&sqrt_eps_hi + rat::int(2));
    let pts = totally_positive_up_to_trace(lattice, &certified);
    pick_min(field, &pts).ok_or(Error::NotCovered)
}

fn totally_positive_up_to_trace(lattice: &IdealLattice, t: &BigRational) -> Vec<FieldElement> {
    let field = &lattice.field;
    let half = t / rat::int(2);
    let (sqrt_lo, _) = rat::sqrt_bounds(&rat::int(field.d()), 16);
    let v_bound = &half / &sqrt_lo;
    lattice
        .ideal
        .points_in_radical_box(field, &half, &v_bound)
        .into_iter()
        .filter(|x| field.is_totally_positive(x) && field.trace(x) <= *t)
        .collect()
}

fn pick_min(field: &QuadField, pts: &[FieldElement]) -> Option<FieldElement> {
    pts.iter()
        .min_by(|x, y| {
            field
                .norm(x)
                .cmp(&field.norm(y))
                .then_with(|| field.trace(x).cmp(&field.trace(y)))
                .then_with(|| field.cmp_embeddings(x, y))
        })
        .cloned()
}

/// The Dirichlet-unit fan of the totally positive cone of X^*: one
/// two-dimensional cone and one ray modulo the square-unit action,
/// together with the zero cone.
pub fn build_unit_invariant_fan(field: &QuadField, x_star: &FractionalIdeal) -> Result<Fan> {
    let lattice = IdealLattice::new(*field, x_star.clone());
    let xi0 = min_norm_totally_positive(&lattice)?;
    let base = lattice.vector_of(&xi0)?;
    debug_assert!(base.is_primitive(), "minimal-norm point must be primitive");
    let unit = field.unit_group().square_gen;
    let symmetry = lattice.unit_matrix(&unit)?;
    assert!(symmetry.det().is_one(), "square unit must act with determinant 1");
    let next = symmetry.apply(&base);
    let sector = Cone::from_rays(&[base.clone(), next])?;
    let cones = vec![Cone::zero(), Cone::ray(base.clone())?, sector];
    let fundamental = vec![0, 1, 2];
    Ok(Fan { lattice, base, unit, symmetry, cones, fundamental })
}

impl Fan {
    /// The closed fundamental sector spanned by base and unit*base.
    fn sector(&self) -> Cone {
        Cone::from_rays(&[self.base.clone(), self.symmetry.apply(&self.base)])
            .expect("sector is non-degenerate")
    }

    /// Membership in the half-open sector: includes the base ray, excludes
    /// its unit translate.
    fn in_half_open_sector(&self, p: &RationalVector) -> bool {
        let sector = self.sector();
        if !sector.closure_contains(p) {
            return false;
        }
        let next_ray = Cone::ray(self.symmetry.apply(&self.base)).unwrap();
        !next_ray.contains(p)
    }

    /// Locate a rational point of the totally positive cone (or zero):
    /// the stored-cone index together with the unit power needed to move
    /// the point into the fundamental sector.
    pub fn locate(&self, p: &RationalVector) -> Result<(usize, i64)> {
        if p.is_zero() {
            let idx = self
                .cones
                .iter()
                .position(|c| c.dim() == 0)
                .ok_or(Error::NotCovered)?;
            return Ok((idx, 0));
        }
        if !self.lattice.is_totally_positive(p) {
            return Err(Error::NotCovered);
        }
        let inv = self.symmetry.inverse();
        let mut q = p.clone();
        let mut power: i64 = 0;
        let base_rat = RationalVector::from_lattice(&self.base);
        let next_rat = RationalVector::from_lattice(&self.symmetry.apply(&self.base));
        let oriented = cross_rational(&base_rat, &next_rat);
        for _ in 0..100_000 {
            if self.in_half_open_sector(&q) {
                for (i, c) in self.cones.iter().enumerate() {
                    if c.dim() > 0 && c.contains(&q) {
                        return Ok((i, power));
                    }
                }
                return Err(Error::NotCovered);
            }
            // Angular position against the sector, normalized so that the
            // translated ray is counterclockwise from the base ray. The
            // positive cone spans an angle < pi, so the two sides are
            // mutually exclusive.
            let mut t_side = cross_rational(&q, &next_rat);
            if oriented.is_negative() {
                t_side = -t_side;
            }
            if !t_side.is_positive() {
                // at or beyond the translated ray: pull back
                q = inv.apply_rational(&q);
                power += 1;
            } else {
                q = self.symmetry.apply_rational(&q);
                power -= 1;
            }
        }
        Err(Error::BoundExceeded("unit reduction did not terminate".into()))
    }

    /// Seeded sampling certificate of completeness: every sampled totally
    /// positive rational point must be located in exactly one cone.
    pub fn completeness_report(&self, samples: usize, seed: u64) -> CompletenessReport {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut checked = 0;
        while checked < samples {
            let p = match sample_totally_positive(&self.lattice, &mut rng, 60) {
                Some(p) => p,
                None => continue,
            };
            checked += 1;
            if self.locate(&p).is_err() {
                return CompletenessReport { samples: checked, seed, witness: Some(p) };
            }
        }
        CompletenessReport { samples, seed, witness: None }
    }

    /// Matrix-level invariance: the unit image of every stored cone is
    /// again a translate of a stored cone.
    pub fn is_invariant(&self) -> bool {
        self.cones.iter().all(|c| self.orbit_contains(c))
    }

    /// Is the given cone a unit translate of a stored cone?
    pub fn orbit_contains(&self, cone: &Cone) -> bool {
        if cone.dim() == 0 {
            return self.cones.iter().any(|c| c.dim() == 0);
        }
        let inv = self.symmetry.inverse();
        let mut forward = cone.clone();
        let mut backward = inv.apply_cone(cone);
        for _ in 0..64 {
            if self.cones.contains(&forward) || self.cones.contains(&backward) {
                return true;
            }
            forward = inv.apply_cone(&forward);
            backward = self.symmetry.apply_cone(&backward);
        }
        false
    }

    /// Count stored fundamental cones by dimension (excluding the zero cone).
    pub fn fundamental_counts(&self) -> (usize, usize) {
        let rays = self.cones.iter().filter(|c| c.dim() == 1).count();
        let two = self.cones.iter().filter(|c| c.dim() == 2).count();
        (rays, two)
    }

    /// Test helper for negative controls: drop one stored cone.
    pub fn without_cone(&self, index: usize) -> Fan {
        let mut fan = self.clone();
        fan.cones.remove(index);
        fan.fundamental = (0..fan.cones.len()).collect();
        fan
    }

    pub fn all_smooth(&self) -> bool {
        self.cones.iter().all(|c| c.is_smooth())
    }
}

fn cross_rational(a: &RationalVector, b: &RationalVector) -> BigRational {
    &a.0 * &b.1 - &a.1 * &b.0
}

/// Random rational totally positive point in lattice coordinates;
/// rejection sampling in a small integer box with random denominator.
pub fn sample_totally_positive(
    lattice: &IdealLattice,
    rng: &mut ChaCha8Rng,
    bound: i64,
) -> Option<RationalVector> {
    let den = rng.gen_range(1..5);
    let p = RationalVector(
        rat::frac(rng.gen_range(-bound..=bound), den),
        rat::frac(rng.gen_range(-bound..=bound), den),
    );
    if lattice.is_totally_positive(&p) {
        Some(p)
    } else {
        None
    }
}

/// Resolve one cone by the staircase: the chain of boundary lattice points
/// of conv(closure cap X^* minus 0) subdivides it into smooth pieces.
/// Returns the pieces and the inserted interior rays.
pub fn subdivide_cone(cone: &Cone) -> Result<(Vec<Cone>, Vec<LatticeVector>)> {
    if cone.dim() != 2 {
        return Err(Error::InvalidCone("only 2-cones are subdivided".into()));
    }
    let mut chain = cone.primal_hilbert_basis()?;
    // staircase walls sorted by angle starting from one extremal ray
    let r0 = cone.rays()[0].clone();
    chain.sort_by(|a, b| {
        r0.cross(a)
            .abs()
            .cmp(&r0.cross(b).abs())
            .then_with(|| a.cmp(b))
    });
    // angular sort: within a strictly convex sector, cross(a, b) > 0 puts a
    // before b once the list is oriented away from r0
    chain.sort_by(|a, b| {
        if a == b {
            return std::cmp::Ordering::Equal;
        }
        let c = a.cross(b);
        let orient = cone.rays()[0].cross(&cone.rays()[1]);
        if (c.is_positive() && orient.is_positive()) || (c.is_negative() && orient.is_negative()) {
            std::cmp::Ordering::Less
        } else {
            std::cmp::Ordering::Greater
        }
    });
    let mut pieces = Vec::new();
    for w in chain.windows(2) {
        let piece = Cone::from_rays(&[w[0].clone(), w[1].clone()])?;
        assert!(piece.is_smooth(), "staircase piece must be smooth");
        pieces.push(piece);
    }
    let inserted = chain[1..chain.len() - 1].to_vec();
    Ok((pieces, inserted))
}

/// Equivariant smooth subdivision: resolve every stored two-cone and
/// transport the cut to all unit translates (which the fundamental-domain
/// representation does implicitly). Idempotent on smooth fans.
pub fn smooth_subdivide_equivariant(fan: &Fan) -> Result<Fan> {
    let mut cones = Vec::new();
    for c in &fan.cones {
        match c.dim() {
            0 | 1 => cones.push(c.clone()),
            _ => {
                let (pieces, inserted) = subdivide_cone(c)?;
                for r in inserted {
                    cones.push(Cone::ray(r)?);
                }
                cones.extend(pieces);
            }
        }
    }
    // canonical stored order: zero, then rays, then 2-cones, each sorted
    cones.sort_by(|a, b| {
        a.dim()
            .cmp(&b.dim())
            .then_with(|| a.rays().cmp(b.rays()))
    });
    cones.dedup();
    let fundamental = (0..cones.len()).collect();
    Ok(Fan {
        lattice: fan.lattice.clone(),
        base: fan.base.clone(),
        unit: fan.unit.clone(),
        symmetry: fan.symmetry.clone(),
        cones,
        fundamental,
    })
}

/// Proper-refinement criterion: a refinement map exists and is proper
/// exactly when the supports coincide. Checked on seeded samples plus a
/// ray-set comparison of the fundamental domains.
pub fn proper_refinement_check(fine: &Fan, coarse: &Fan, samples: usize, seed: u64) -> bool {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    while checked < samples {
        let p = match sample_totally_positive(&fine.lattice, &mut rng, 60) {
            Some(p) => p,
            None => continue,
        };
        checked += 1;
        if fine.locate(&p).is_ok() != coarse.locate(&p).is_ok() {
            return false;
        }
    }
    // every coarse boundary ray must survive in the fine fan
    coarse.cones.iter().filter(|c| c.dim() == 1).all(|c| fine.orbit_contains(c))
}
