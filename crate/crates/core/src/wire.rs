//! Versioned JSON wire formats for every domain type. All rationals are
//! serialized as exact "p/q" strings; deserializing re-derives computed
//! data and fails on any inconsistency, so round-trips are identities on
//! canonical forms.

use num::bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::cones::{Cone, LatticeVector};
use crate::cusps::{derive_cusp_data, CuspData, Level};
use crate::fans::{Fan, IdealLattice, Mat2};
use crate::field::{FieldElement, QuadField};
use crate::ideals::FractionalIdeal;
use crate::jacobi::JacobiExpansion;
use crate::qexp::{QExpansion, WeightTag};
use crate::rat;
use crate::vdfan::VdLabel;
use crate::{Error, Result};

/// Format tag carried by every serialized document.
pub const FORMAT: &str = "hmf/1";

fn check_format(tag: &str) -> Result<()> {
    if tag != FORMAT {
        return Err(Error::SchemaMismatch(format!(
            "unknown format tag {:?}, expected {:?}",
            tag, FORMAT
        )));
    }
    Ok(())
}

fn parse_rat(s: &str) -> Result<num::BigRational> {
    rat::parse(s).ok_or_else(|| Error::SchemaMismatch(format!("bad rational {:?}", s)))
}

fn parse_int(s: &str) -> Result<BigInt> {
    s.parse::<BigInt>()
        .map_err(|_| Error::SchemaMismatch(format!("bad integer {:?}", s)))
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct FieldWire {
    pub format: String,
    pub degree: usize,
    #[serde(rename = "D")]
    pub d: i64,
}

pub fn field_to_wire(field: &QuadField) -> FieldWire {
    FieldWire { format: FORMAT.into(), degree: field.degree(), d: field.d() }
}

pub fn field_from_wire(w: &FieldWire) -> Result<QuadField> {
    check_format(&w.format)?;
    if w.degree != 2 {
        return Err(Error::UnsupportedDegree(w.degree));
    }
    QuadField::new(w.d)
}

pub type ElementWire = [String; 2];

pub fn element_to_wire(x: &FieldElement) -> ElementWire {
    [rat::to_string(&x.c0), rat::to_string(&x.c1)]
}

pub fn element_from_wire(w: &ElementWire) -> Result<FieldElement> {
    Ok(FieldElement::new(parse_rat(&w[0])?, parse_rat(&w[1])?))
}

/// An ideal travels as a two-generator presentation a o + b o; the
/// canonical HNF basis is such a pair.
#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct IdealWire {
    pub gens: [ElementWire; 2],
}

pub fn ideal_to_wire(ideal: &FractionalIdeal) -> IdealWire {
    let [e1, e2] = ideal.basis();
    IdealWire { gens: [element_to_wire(&e1), element_to_wire(&e2)] }
}

pub fn ideal_from_wire(field: &QuadField, w: &IdealWire) -> Result<FractionalIdeal> {
    let g1 = element_from_wire(&w.gens[0])?;
    let g2 = element_from_wire(&w.gens[1])?;
    FractionalIdeal::from_generators(field, &[g1, g2])
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct ConeWire {
    pub rays: Vec<[String; 2]>,
}

pub fn cone_to_wire(cone: &Cone) -> ConeWire {
    ConeWire {
        rays: cone.rays().iter().map(|r| [r.0.to_string(), r.1.to_string()]).collect(),
    }
}

pub fn cone_from_wire(w: &ConeWire) -> Result<Cone> {
    let rays: Vec<LatticeVector> = w
        .rays
        .iter()
        .map(|[x, y]| Ok(LatticeVector(parse_int(x)?, parse_int(y)?)))
        .collect::<Result<_>>()?;
    Cone::from_rays(&rays)
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct FanWire {
    pub format: String,
    pub field: FieldWire,
    pub lattice: IdealWire,
    pub base: [String; 2],
    pub unit: ElementWire,
    pub symmetry: [[String; 2]; 2],
    pub cones: Vec<ConeWire>,
    pub fundamental: Vec<usize>,
}

pub fn fan_to_wire(fan: &Fan) -> FanWire {
    FanWire {
        format: FORMAT.into(),
        field: field_to_wire(&fan.lattice.field),
        lattice: ideal_to_wire(&fan.lattice.ideal),
        base: [fan.base.0.to_string(), fan.base.1.to_string()],
        unit: element_to_wire(&fan.unit),
        symmetry: [
            [fan.symmetry.m[0][0].to_string(), fan.symmetry.m[0][1].to_string()],
            [fan.symmetry.m[1][0].to_string(), fan.symmetry.m[1][1].to_string()],
        ],
        cones: fan.cones.iter().map(cone_to_wire).collect(),
        fundamental: fan.fundamental.clone(),
    }
}

pub fn fan_from_wire(w: &FanWire) -> Result<Fan> {
    check_format(&w.format)?;
    let field = field_from_wire(&w.field)?;
    let ideal = ideal_from_wire(&field, &w.lattice)?;
    let lattice = IdealLattice::new(field, ideal);
    let unit = element_from_wire(&w.unit)?;
    let symmetry = lattice.unit_matrix(&unit)?;
    let declared = Mat2 {
        m: [
            [parse_int(&w.symmetry[0][0])?, parse_int(&w.symmetry[0][1])?],
            [parse_int(&w.symmetry[1][0])?, parse_int(&w.symmetry[1][1])?],
        ],
    };
    if declared != symmetry {
        return Err(Error::SchemaMismatch("symmetry matrix does not match the unit".into()));
    }
    let base = LatticeVector(parse_int(&w.base[0])?, parse_int(&w.base[1])?);
    let cones: Vec<Cone> = w.cones.iter().map(cone_from_wire).collect::<Result<_>>()?;
    if w.fundamental.iter().any(|&i| i >= cones.len()) {
        return Err(Error::SchemaMismatch("fundamental index out of range".into()));
    }
    Ok(Fan { lattice, base, unit, symmetry, cones, fundamental: w.fundamental.clone() })
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct LevelWire {
    pub c: IdealWire,
    pub n: IdealWire,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct CuspWire {
    pub format: String,
    pub field: FieldWire,
    pub a: ElementWire,
    pub c: ElementWire,
    pub level: LevelWire,
    pub b: IdealWire,
    pub b_prime: IdealWire,
    #[serde(rename = "a_ideal")]
    pub ab: IdealWire,
    pub x: IdealWire,
    pub x_dual: IdealWire,
    pub unramified: bool,
}

pub fn cusp_to_wire(field: &QuadField, cusp: &CuspData) -> CuspWire {
    CuspWire {
        format: FORMAT.into(),
        field: field_to_wire(field),
        a: element_to_wire(&cusp.a),
        c: element_to_wire(&cusp.c),
        level: LevelWire {
            c: ideal_to_wire(&cusp.level.c),
            n: ideal_to_wire(&cusp.level.n),
        },
        b: ideal_to_wire(&cusp.b_ideal),
        b_prime: ideal_to_wire(&cusp.b_prime),
        ab: ideal_to_wire(&cusp.ab_ideal),
        x: ideal_to_wire(&cusp.x_ideal),
        x_dual: ideal_to_wire(&cusp.x_dual),
        unramified: cusp.unramified,
    }
}

pub fn cusp_from_wire(w: &CuspWire) -> Result<(QuadField, CuspData)> {
    check_format(&w.format)?;
    let field = field_from_wire(&w.field)?;
    let level = Level::new(
        ideal_from_wire(&field, &w.level.c)?,
        ideal_from_wire(&field, &w.level.n)?,
    )?;
    let cusp = derive_cusp_data(
        &field,
        &element_from_wire(&w.a)?,
        &element_from_wire(&w.c)?,
        &level,
    )?;
    // the derived ideals travel for readability; they must agree
    for (name, sent, derived) in [
        ("b", &w.b, &cusp.b_ideal),
        ("b_prime", &w.b_prime, &cusp.b_prime),
        ("a_ideal", &w.ab, &cusp.ab_ideal),
        ("x", &w.x, &cusp.x_ideal),
        ("x_dual", &w.x_dual, &cusp.x_dual),
    ] {
        if ideal_from_wire(&field, sent)? != *derived {
            return Err(Error::SchemaMismatch(format!("derived ideal {} disagrees", name)));
        }
    }
    Ok((field, cusp))
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct CoefficientWire {
    pub xi: ElementWire,
    pub a: ElementWire,
}

/// Weight on the wire: kappa itself for integral weights, 2*kappa under
/// half = true.
#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct QExpansionWire {
    pub format: String,
    pub cusp: CuspWire,
    pub weight: Vec<i64>,
    pub half: bool,
    #[serde(rename = "T")]
    pub trace_bound: i64,
    pub coeffs: Vec<CoefficientWire>,
}

fn weight_to_wire(tag: &WeightTag) -> (Vec<i64>, bool) {
    if tag.half {
        (tag.doubled.clone(), true)
    } else {
        (tag.doubled.iter().map(|&x| x / 2).collect(), false)
    }
}

fn weight_from_wire(weight: &[i64], half: bool) -> WeightTag {
    if half {
        WeightTag { doubled: weight.to_vec(), half: true }
    } else {
        WeightTag { doubled: weight.iter().map(|&x| 2 * x).collect(), half: false }
    }
}

pub fn qexp_to_wire(field: &QuadField, f: &QExpansion<FieldElement>) -> QExpansionWire {
    let (weight, half) = weight_to_wire(&f.weight);
    QExpansionWire {
        format: FORMAT.into(),
        cusp: cusp_to_wire(field, &f.cusp),
        weight,
        half,
        trace_bound: f.trace_bound,
        coeffs: f
            .entries()
            .map(|(xi, a)| CoefficientWire { xi: element_to_wire(xi), a: element_to_wire(a) })
            .collect(),
    }
}

pub fn qexp_from_wire(w: &QExpansionWire) -> Result<(QuadField, QExpansion<FieldElement>)> {
    check_format(&w.format)?;
    let (field, cusp) = cusp_from_wire(&w.cusp)?;
    let weight = weight_from_wire(&w.weight, w.half);
    let entries: Vec<(FieldElement, FieldElement)> = w
        .coeffs
        .iter()
        .map(|c| Ok((element_from_wire(&c.xi)?, element_from_wire(&c.a)?)))
        .collect::<Result<_>>()?;
    let f = QExpansion::new(&field, cusp, weight, w.trace_bound, entries)?;
    Ok((field, f))
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct JacobiCoefficientWire {
    pub xi: ElementWire,
    pub alpha: ElementWire,
    pub a: ElementWire,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct JacobiWire {
    pub format: String,
    pub cusp: CuspWire,
    pub weight: Vec<i64>,
    pub half: bool,
    pub mu: ElementWire,
    #[serde(rename = "T")]
    pub trace_bound: i64,
    pub coeffs: Vec<JacobiCoefficientWire>,
}

pub fn jacobi_to_wire(field: &QuadField, f: &JacobiExpansion) -> JacobiWire {
    let (weight, half) = weight_to_wire(&f.weight);
    JacobiWire {
        format: FORMAT.into(),
        cusp: cusp_to_wire(field, &f.cusp),
        weight,
        half,
        mu: element_to_wire(&f.mu),
        trace_bound: f.trace_bound,
        coeffs: f
            .entries()
            .map(|((xi, alpha), a)| JacobiCoefficientWire {
                xi: element_to_wire(xi),
                alpha: element_to_wire(alpha),
                a: element_to_wire(a),
            })
            .collect(),
    }
}

pub fn jacobi_from_wire(w: &JacobiWire) -> Result<(QuadField, JacobiExpansion)> {
    check_format(&w.format)?;
    let (field, cusp) = cusp_from_wire(&w.cusp)?;
    let weight = weight_from_wire(&w.weight, w.half);
    let entries: Vec<((FieldElement, FieldElement), FieldElement)> = w
        .coeffs
        .iter()
        .map(|c| {
            Ok((
                (element_from_wire(&c.xi)?, element_from_wire(&c.alpha)?),
                element_from_wire(&c.a)?,
            ))
        })
        .collect::<Result<_>>()?;
    let f = JacobiExpansion::new(
        &field,
        cusp,
        weight,
        element_from_wire(&w.mu)?,
        w.trace_bound,
        entries,
    )?;
    Ok((field, f))
}

/// A Voronoi-Delaunay label against a base fan: the cone by stored index,
/// the period set explicitly.
#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct VdLabelWire {
    pub sigma: usize,
    #[serde(rename = "B")]
    pub b_set: Vec<Vec<ElementWire>>,
}

pub fn vd_label_to_wire(fan: &Fan, label: &VdLabel) -> Result<VdLabelWire> {
    let sigma = fan
        .cones
        .iter()
        .position(|c| *c == label.sigma)
        .ok_or_else(|| Error::SchemaMismatch("label cone is not stored in the fan".into()))?;
    Ok(VdLabelWire {
        sigma,
        b_set: label
            .b_set
            .iter()
            .map(|beta| beta.iter().map(element_to_wire).collect())
            .collect(),
    })
}

pub fn vd_label_from_wire(fan: &Fan, w: &VdLabelWire) -> Result<VdLabel> {
    let sigma = fan
        .cones
        .get(w.sigma)
        .ok_or_else(|| Error::SchemaMismatch("cone index out of range".into()))?
        .clone();
    let b_set: Vec<Vec<FieldElement>> = w
        .b_set
        .iter()
        .map(|beta| beta.iter().map(element_from_wire).collect())
        .collect::<Result<_>>()?;
    Ok(VdLabel::new(sigma, b_set))
}
