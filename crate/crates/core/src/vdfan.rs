//! Voronoi-Delaunay polarized fans over a base cusp fan: the linear forms
//! chi_beta, the polarization function phi = min chi_beta over the period
//! lattice, membership in the cones tau_{sigma, B}, the twisted-invariance
//! law and the group action on cone labels.
//!
//! phi is minimized exactly: the quadratic part is positive definite with
//! rational Gram data, so the minimum over the lattice is found inside a
//! certified ellipsoid box around the rational stationary point.

use num::rational::BigRational;
use num::{Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::cones::Cone;
use crate::cusps::CuspData;
use crate::fans::IdealLattice;
use crate::field::{FieldElement, QuadField};
use crate::ideals::FractionalIdeal;
use crate::rat;
use crate::{Error, Result};

/// Degeneration data at a cusp: s polarization indices mu_i in c_+ acting
/// on the period lattice b, with the tautological pairing Tr(q alpha beta).
#[derive(Clone, Debug)]
pub struct DegenerationData {
    pub field: QuadField,
    pub cusp: CuspData,
    pub mu: Vec<FieldElement>,
}

impl DegenerationData {
    pub fn new(field: QuadField, cusp: CuspData, mu: Vec<FieldElement>) -> Result<Self> {
        if mu.is_empty() {
            return Err(Error::InvalidIdeal("at least one polarization index".into()));
        }
        for m in &mu {
            if !cusp.level.c.contains(m) {
                return Err(Error::MembershipViolation("mu is not in c".into()));
            }
            if !field.is_totally_positive(m) {
                return Err(Error::SupportViolation("mu must be totally positive".into()));
            }
        }
        Ok(DegenerationData { field, cusp, mu })
    }

    pub fn s(&self) -> usize {
        self.mu.len()
    }

    /// The cocharacter lattice X^* carrying the base fan.
    pub fn x_lattice(&self) -> IdealLattice {
        IdealLattice::new(self.field, self.cusp.x_dual.clone())
    }

    pub fn period_lattice(&self) -> &FractionalIdeal {
        &self.cusp.b_ideal
    }

    fn check_point(&self, q: &FieldElement, l: &[FieldElement]) -> Result<()> {
        if l.len() != self.s() {
            return Err(Error::InvalidIdeal("wrong number of fiber coordinates".into()));
        }
        if !self.field.is_totally_positive(q) {
            return Err(Error::SupportViolation("q must be strictly totally positive".into()));
        }
        Ok(())
    }

    fn check_beta(&self, beta: &[FieldElement]) -> Result<()> {
        if beta.len() != self.s() {
            return Err(Error::InvalidIdeal("wrong number of beta components".into()));
        }
        for b in beta {
            if !self.cusp.b_ideal.contains(b) {
                return Err(Error::MembershipViolation("beta is not in b".into()));
            }
        }
        Ok(())
    }
}

/// chi_beta(q, l) = Tr(sum_i q mu_i beta_i^2 + 2 l_i mu_i beta_i).
pub fn chi_beta(
    data: &DegenerationData,
    q: &FieldElement,
    l: &[FieldElement],
    beta: &[FieldElement],
) -> Result<BigRational> {
    data.check_beta(beta)?;
    if l.len() != data.s() {
        return Err(Error::InvalidIdeal("wrong number of fiber coordinates".into()));
    }
    let f = &data.field;
    let mut acc = FieldElement::zero();
    for i in 0..data.s() {
        let b2 = f.mul(&beta[i], &beta[i]);
        let quad = f.mul(&f.mul(q, &data.mu[i]), &b2);
        let lin = f.mul(&f.mul(&l[i], &data.mu[i]), &beta[i]).scale(&rat::int(2));
        acc = &acc + &(&quad + &lin);
    }
    Ok(f.trace(&acc))
}

/// Exact minimum of A x^2 + 2 B x y + C y^2 + 2 P x + 2 R y over Z^2 with
/// a positive definite quadratic part, plus all minimizers.
fn minimize_quadratic(
    a: &BigRational,
    b: &BigRational,
    c: &BigRational,
    p: &BigRational,
    r: &BigRational,
) -> Result<(BigRational, Vec<(num::BigInt, num::BigInt)>)> {
    let det = a * c - b * b;
    if !a.is_positive() || !det.is_positive() {
        return Err(Error::SupportViolation("quadratic part is not positive definite".into()));
    }
    let eval = |x: &BigRational, y: &BigRational| -> BigRational {
        a * x * x
            + rat::int(2) * b * x * y
            + c * y * y
            + rat::int(2) * (p * x + r * y)
    };
    // rational stationary point and its value
    let x_star = (b * r - c * p) / &det;
    let y_star = (b * p - a * r) / &det;
    let m_star = p * &x_star + r * &y_star;
    // seed with the four roundings
    let mut best: Option<BigRational> = None;
    for xi in [rat::floor_int(&x_star), rat::ceil_int(&x_star)] {
        for yi in [rat::floor_int(&y_star), rat::ceil_int(&y_star)] {
            let v = eval(
                &BigRational::from_integer(xi.clone()),
                &BigRational::from_integer(yi.clone()),
            );
            if best.as_ref().is_none_or(|b| v < *b) {
                best = Some(v);
            }
        }
    }
    let f_best = best.unwrap();
    let rho = &f_best - &m_star;
    debug_assert!(!rho.is_negative());
    let (_, bx) = rat::sqrt_bounds(&(&rho * c / &det), 16);
    let (_, by) = rat::sqrt_bounds(&(&rho * a / &det), 16);
    let x_lo = rat::ceil_int(&(&x_star - &bx));
    let x_hi = rat::floor_int(&(&x_star + &bx));
    let y_lo = rat::ceil_int(&(&y_star - &by));
    let y_hi = rat::floor_int(&(&y_star + &by));
    let mut min = f_best;
    let mut argmins: Vec<(num::BigInt, num::BigInt)> = Vec::new();
    let mut x = x_lo;
    while x <= x_hi {
        let mut y = y_lo.clone();
        while y <= y_hi {
            let v = eval(
                &BigRational::from_integer(x.clone()),
                &BigRational::from_integer(y.clone()),
            );
            if v < min {
                min = v;
                argmins.clear();
                argmins.push((x.clone(), y.clone()));
            } else if v == min {
                argmins.push((x.clone(), y.clone()));
            }
            y += 1;
        }
        x += 1;
    }
    argmins.sort();
    Ok((min, argmins))
}

/// One slice of phi: minimize Tr(q mu beta^2) + 2 Tr(v mu beta) over the
/// lattice, where v is the fiber coordinate.
fn minimize_slice(
    data: &DegenerationData,
    q: &FieldElement,
    l_i: &FieldElement,
    mu_i: &FieldElement,
) -> Result<(BigRational, Vec<FieldElement>)> {
    let f = &data.field;
    let [e1, e2] = data.cusp.b_ideal.basis();
    let w = f.mul(q, mu_i);
    let v = f.mul(l_i, mu_i);
    let a = f.trace(&f.mul(&w, &f.mul(&e1, &e1)));
    let b = f.trace(&f.mul(&w, &f.mul(&e1, &e2)));
    let c = f.trace(&f.mul(&w, &f.mul(&e2, &e2)));
    let p = f.trace(&f.mul(&v, &e1));
    let r = f.trace(&f.mul(&v, &e2));
    let (min, arg) = minimize_quadratic(&a, &b, &c, &p, &r)?;
    let betas = arg
        .into_iter()
        .map(|(x, y)| {
            data.cusp.b_ideal.element_from_coordinates(
                &BigRational::from_integer(x),
                &BigRational::from_integer(y),
            )
        })
        .collect();
    Ok((min, betas))
}

/// phi(q, l) = min over beta in b^s of chi_beta, with all minimizers.
/// The minimization splits over the s factors, so the argmin set is the
/// cartesian product of the per-factor minimizer lists.
#[allow(clippy::needless_range_loop)]
pub fn phi(
    data: &DegenerationData,
    q: &FieldElement,
    l: &[FieldElement],
) -> Result<(BigRational, Vec<Vec<FieldElement>>)> {
    data.check_point(q, l)?;
    let mut value = BigRational::zero();
    let mut factor_mins: Vec<Vec<FieldElement>> = Vec::new();
    for i in 0..data.s() {
        let (min, betas) = minimize_slice(data, q, &l[i], &data.mu[i])?;
        value += min;
        factor_mins.push(betas);
    }
    let mut tuples: Vec<Vec<FieldElement>> = vec![Vec::new()];
    for factor in factor_mins {
        let mut next = Vec::new();
        for t in &tuples {
            for b in &factor {
                let mut t2 = t.clone();
                t2.push(b.clone());
                next.push(t2);
            }
        }
        tuples = next;
    }
    tuples.sort();
    Ok((value, tuples))
}

/// The lattice action on fiber points: beta sends (q, l) to (q, l + q beta).
pub fn translate_point(
    data: &DegenerationData,
    q: &FieldElement,
    l: &[FieldElement],
    beta: &[FieldElement],
) -> Vec<FieldElement> {
    l.iter()
        .zip(beta)
        .map(|(li, bi)| li + &data.field.mul(q, bi))
        .collect()
}

/// The 1-twisted law phi(beta . (q,l)) = phi(q,l) - chi_beta(q,l),
/// evaluated exactly on both sides.
pub fn verify_one_twisted(
    data: &DegenerationData,
    q: &FieldElement,
    l: &[FieldElement],
    beta: &[FieldElement],
) -> Result<bool> {
    data.check_beta(beta)?;
    let translated = translate_point(data, q, l, beta);
    let (lhs, _) = phi(data, q, &translated)?;
    let (phi_val, _) = phi(data, q, l)?;
    let rhs = phi_val - chi_beta(data, q, l, beta)?;
    Ok(lhs == rhs)
}

/// A Voronoi-Delaunay cone label: a base cone together with a finite set
/// of period vectors whose chi must all attain the minimum.
#[derive(Clone, Debug, PartialEq)]
pub struct VdLabel {
    pub sigma: Cone,
    pub b_set: Vec<Vec<FieldElement>>,
}

impl VdLabel {
    pub fn new(sigma: Cone, mut b_set: Vec<Vec<FieldElement>>) -> Self {
        b_set.sort();
        b_set.dedup();
        VdLabel { sigma, b_set }
    }
}

/// Membership of (q, l) in tau_{sigma, B}, computed along both routes:
/// the min-equality chi_beta = phi for every beta in B, and the generator
/// inequalities min_e Tr(e (2l + q(2 beta + e)) mu) >= 0 certified by the
/// same ellipsoid bound. The two routes must agree on every input.
pub fn tau_membership(
    data: &DegenerationData,
    label: &VdLabel,
    q: &FieldElement,
    l: &[FieldElement],
) -> Result<bool> {
    data.check_point(q, l)?;
    let x_lattice = data.x_lattice();
    let coords = x_lattice.rational_coords_of(q);
    let in_sigma = label.sigma.contains(&coords);
    // route 1: every labelled beta attains the minimum
    let (phi_val, _) = phi(data, q, l)?;
    let mut route1 = in_sigma;
    if route1 {
        for beta in &label.b_set {
            if chi_beta(data, q, l, beta)? != phi_val {
                route1 = false;
                break;
            }
        }
    }
    // route 2: the displayed inequalities over the shifted lattice
    let mut route2 = in_sigma;
    if route2 {
        'outer: for beta in &label.b_set {
            data.check_beta(beta)?;
            for i in 0..data.s() {
                let shifted = &l[i] + &data.field.mul(q, &beta[i]);
                let (min, _) = minimize_slice(data, q, &shifted, &data.mu[i])?;
                if min.is_negative() {
                    route2 = false;
                    break 'outer;
                }
            }
        }
    }
    assert_eq!(route1, route2, "membership routes disagree");
    Ok(route1)
}

/// Group action on labels.
#[derive(Clone, Debug)]
pub enum LabelAction {
    /// A unit u sends tau_{sigma, B} to tau_{u^2 sigma, u^{-1} B}.
    Unit(FieldElement),
    /// A period vector y sends tau_{sigma, B} to tau_{sigma, B - y}.
    Translate(Vec<FieldElement>),
}

pub fn act_on_label(
    data: &DegenerationData,
    label: &VdLabel,
    action: &LabelAction,
) -> Result<VdLabel> {
    match action {
        LabelAction::Unit(u) => {
            if !data.field.is_unit(u) {
                return Err(Error::InvalidField("unit expected".into()));
            }
            let u2 = data.field.mul(u, u);
            let matrix = data.x_lattice().unit_matrix(&u2)?;
            let sigma = matrix.apply_cone(&label.sigma);
            let u_inv = data.field.inv(u)?;
            let b_set = label
                .b_set
                .iter()
                .map(|beta| beta.iter().map(|b| data.field.mul(&u_inv, b)).collect())
                .collect();
            Ok(VdLabel::new(sigma, b_set))
        }
        LabelAction::Translate(y) => {
            data.check_beta(y)?;
            let b_set = label
                .b_set
                .iter()
                .map(|beta| beta.iter().zip(y).map(|(b, yi)| b - yi).collect())
                .collect();
            Ok(VdLabel::new(label.sigma.clone(), b_set))
        }
    }
}

/// The action of a unit on points: u . (q, l) = (u^2 q, u l).
pub fn unit_act_on_point(
    data: &DegenerationData,
    u: &FieldElement,
    q: &FieldElement,
    l: &[FieldElement],
) -> (FieldElement, Vec<FieldElement>) {
    let f = &data.field;
    let u2 = f.mul(u, u);
    (f.mul(&u2, q), l.iter().map(|li| f.mul(u, li)).collect())
}

/// The commutation square: acting by u then by y u^{-1} equals acting by
/// y then by u.
pub fn check_commutation_square(
    data: &DegenerationData,
    label: &VdLabel,
    u: &FieldElement,
    y: &[FieldElement],
) -> Result<bool> {
    let u_inv = data.field.inv(u)?;
    let yu_inv: Vec<FieldElement> =
        y.iter().map(|yi| data.field.mul(yi, &u_inv)).collect();
    let left = act_on_label(
        data,
        &act_on_label(data, label, &LabelAction::Unit(u.clone()))?,
        &LabelAction::Translate(yu_inv),
    )?;
    let right = act_on_label(
        data,
        &act_on_label(data, label, &LabelAction::Translate(y.to_vec()))?,
        &LabelAction::Unit(u.clone()),
    )?;
    Ok(left == right)
}

/// Equidimensionality probe for a label: sample base points q across the
/// interior of sigma, solve the equal-minimum equations for l, and record
/// which angular subsectors of sigma acquire a witnessed point of
/// tau_{sigma, B}.
#[derive(Clone, Debug)]
pub struct EquidimReport {
    pub samples: usize,
    pub successes: usize,
    pub subsectors: Vec<bool>,
    pub empty: bool,
}

impl EquidimReport {
    pub fn covers_base(&self) -> bool {
        !self.empty && self.subsectors.iter().all(|&b| b)
    }
}

pub fn equidimensional_check(
    data: &DegenerationData,
    label: &VdLabel,
    samples: usize,
    seed: u64,
) -> Result<EquidimReport> {
    use rand::SeedableRng;
    if label.sigma.dim() != 2 {
        return Err(Error::InvalidCone("base cone must be two-dimensional".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x_lattice = data.x_lattice();
    let rays = label.sigma.rays();
    const SECTORS: usize = 6;
    let mut subsectors = vec![false; SECTORS];
    let mut successes = 0usize;
    for _ in 0..samples {
        // rational interior point of sigma with a known subsector
        let lam = rng.gen_range(1..=(SECTORS as i64 * 4));
        let sector_idx = ((lam - 1) as usize * SECTORS) / (SECTORS * 4);
        let weight1 = rat::frac(lam, SECTORS as i64 * 4);
        let weight2 = rat::int(1) - &weight1;
        let scale = rat::int(rng.gen_range(1..6));
        let coords = crate::cones::RationalVector(
            (&weight1 * num::BigRational::from_integer(rays[0].0.clone())
                + &weight2 * num::BigRational::from_integer(rays[1].0.clone()))
                * &scale,
            (&weight1 * num::BigRational::from_integer(rays[0].1.clone())
                + &weight2 * num::BigRational::from_integer(rays[1].1.clone()))
                * &scale,
        );
        let q = x_lattice.element_of_rational(&coords);
        if !data.field.is_totally_positive(&q) {
            continue;
        }
        if let Some(l) = solve_fiber_point(data, label, &q, &mut rng)? {
            if tau_membership(data, label, &q, &l)? {
                successes += 1;
                subsectors[sector_idx.min(SECTORS - 1)] = true;
            }
        }
    }
    Ok(EquidimReport {
        samples,
        successes,
        subsectors,
        empty: successes == 0,
    })
}

/// Find l with all labelled chi equal (a linear system in the fiber
/// coordinates), trying the zero free-assignment first and random small
/// ones after. None when the system is inconsistent for this q.
fn solve_fiber_point(
    data: &DegenerationData,
    label: &VdLabel,
    q: &FieldElement,
    rng: &mut ChaCha8Rng,
) -> Result<Option<Vec<FieldElement>>> {
    let s = data.s();
    let unknowns = 2 * s;
    if label.b_set.is_empty() {
        return Ok(Some(vec![FieldElement::zero(); s]));
    }
    let f = &data.field;
    let a_star = data.cusp.ab_ideal.trace_dual(f);
    let [e1, e2] = a_star.basis();
    // coefficients of chi_beta as an affine function of the coordinates of l
    let affine = |beta: &Vec<FieldElement>| -> Result<(Vec<BigRational>, BigRational)> {
        let mut coeffs = vec![BigRational::zero(); unknowns];
        let mut constant = BigRational::zero();
        for i in 0..s {
            let mu_beta = f.mul(&data.mu[i], &beta[i]);
            constant += f.trace(&f.mul(&f.mul(q, &data.mu[i]), &f.mul(&beta[i], &beta[i])));
            coeffs[2 * i] = f.trace(&f.mul(&e1, &mu_beta)) * rat::int(2);
            coeffs[2 * i + 1] = f.trace(&f.mul(&e2, &mu_beta)) * rat::int(2);
        }
        Ok((coeffs, constant))
    };
    let (base_coeffs, base_const) = affine(&label.b_set[0])?;
    let mut rows: Vec<Vec<BigRational>> = Vec::new();
    let mut rhs: Vec<BigRational> = Vec::new();
    for beta in &label.b_set[1..] {
        let (coeffs, constant) = affine(beta)?;
        rows.push(
            coeffs
                .iter()
                .zip(&base_coeffs)
                .map(|(c, b)| c - b)
                .collect(),
        );
        rhs.push(&base_const - &constant);
    }
    for attempt in 0..6 {
        let free = |rng: &mut ChaCha8Rng| {
            if attempt == 0 {
                BigRational::zero()
            } else {
                rat::frac(rng.gen_range(-4..=4), rng.gen_range(1..4))
            }
        };
        if let Some(solution) = solve_affine(&rows, &rhs, unknowns, || free(rng)) {
            let l: Vec<FieldElement> = (0..s)
                .map(|i| {
                    &e1.scale(&solution[2 * i]) + &e2.scale(&solution[2 * i + 1])
                })
                .collect();
            // the equalities hold; whether the shared value is the global
            // minimum is re-checked by the caller
            if tau_membership(data, label, q, &l)? {
                return Ok(Some(l));
            }
        } else {
            return Ok(None);
        }
    }
    Ok(None)
}

/// Gaussian elimination with explicit free-variable assignment.
#[allow(clippy::needless_range_loop)]
fn solve_affine(
    rows: &[Vec<BigRational>],
    rhs: &[BigRational],
    unknowns: usize,
    mut free_value: impl FnMut() -> BigRational,
) -> Option<Vec<BigRational>> {
    let mut a: Vec<Vec<BigRational>> = rows.to_vec();
    let mut b: Vec<BigRational> = rhs.to_vec();
    let m = a.len();
    let mut pivot_col_of_row = Vec::new();
    let mut row = 0usize;
    for col in 0..unknowns {
        let pivot = (row..m).find(|&r| !a[r][col].is_zero());
        let Some(p) = pivot else { continue };
        a.swap(row, p);
        b.swap(row, p);
        let inv = a[row][col].clone().recip();
        for c in col..unknowns {
            a[row][c] = &a[row][c] * &inv;
        }
        b[row] = &b[row] * &inv;
        for r in 0..m {
            if r != row && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for c in col..unknowns {
                    let delta = &factor * &a[row][c];
                    a[r][c] = &a[r][c] - &delta;
                }
                let delta = &factor * &b[row];
                b[r] = &b[r] - &delta;
            }
        }
        pivot_col_of_row.push(col);
        row += 1;
        if row == m {
            break;
        }
    }
    // inconsistent rows: 0 = nonzero
    for r in row..m {
        if a[r].iter().all(|x| x.is_zero()) && !b[r].is_zero() {
            return None;
        }
    }
    let pivot_cols: std::collections::BTreeSet<usize> =
        pivot_col_of_row.iter().cloned().collect();
    let mut x = vec![BigRational::zero(); unknowns];
    for col in 0..unknowns {
        if !pivot_cols.contains(&col) {
            x[col] = free_value();
        }
    }
    for (r, &col) in pivot_col_of_row.iter().enumerate() {
        let mut v = b[r].clone();
        for c in (col + 1)..unknowns {
            if !a[r][c].is_zero() {
                let delta = &a[r][c] * &x[c];
                v -= delta;
            }
        }
        x[col] = v;
    }
    Some(x)
}
