//! Current representations `(T, C)` of polytope valuations and their exact comparison.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arrangement::{cell_witnesses, int_dot, int_vec, sign_vector, IVec};
use crate::error::{Error, Result};
use crate::exterior::KVector;
use crate::linalg::{dot, nullspace, primitive_line, QVec};
use crate::polytope::Polytope;
use crate::rational::{format_rational, serde_rational, sign, to_f64, Rational};
use crate::spherical::SphericalPolytope;
use crate::volume::NumericConfig;

/// Primitive Plücker vector of the orthogonal complement of `span` (an RREF basis),
/// with positive leading coefficient. The complement of `Q^n` is the scalar 1.
pub fn complement_kvector(n: usize, span: &[QVec]) -> KVector {
    let k = nullspace(span, n);
    KVector::simple_from_basis(n, &k).expect("dimensions match").primitive()
}

/// The translation-invariant current `A_{v,N} = [v] × [[N]]`.
///
/// Stored with the leading Plücker coordinate of `v` positive; `(−v, −N)` and
/// `(v, N)` are the same current.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaceCurrent {
    v: KVector,
    normal: SphericalPolytope,
}

impl FaceCurrent {
    pub fn new(v: KVector, normal: SphericalPolytope) -> Result<FaceCurrent> {
        let n = normal.ambient_dim();
        if v.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: v.dim() });
        }
        if v.is_zero() {
            return Err(Error::MalformedRep("zero k-vector".into()));
        }
        if v.grade() + normal.dim() + 1 != n {
            return Err(Error::GradeMismatch(v.grade(), n - 1 - normal.dim()));
        }
        if v.ratio_to(&complement_kvector(n, normal.cone().span())).is_none() {
            return Err(Error::NotComplementary);
        }
        Ok(if v.leading_sign() < 0 {
            FaceCurrent { v: v.neg(), normal: normal.reversed() }
        } else {
            FaceCurrent { v, normal }
        })
    }

    pub fn v(&self) -> &KVector {
        &self.v
    }

    pub fn normal(&self) -> &SphericalPolytope {
        &self.normal
    }

    /// Face dimension `k` (grade of `v`).
    pub fn degree(&self) -> usize {
        self.v.grade()
    }

    /// `+1` if `v` followed by the orientation of `N` is positive, else `-1`.
    pub fn orientation_sign(&self) -> i32 {
        let b = KVector::simple_from_basis(self.v.dim(), &self.normal.oriented_basis())
            .expect("dimensions match");
        sign(&self.v.wedge(&b).expect("same dim").top_coefficient().expect("top grade"))
    }

    /// `c · A_{v,N}`; `None` for `c = 0`.
    pub fn scaled(&self, c: &Rational) -> Option<FaceCurrent> {
        if c.is_zero() {
            return None;
        }
        Some(FaceCurrent::new(self.v.scale(c), self.normal.clone()).expect("still valid"))
    }
}

/// The coefficient `C` of `[[V]]`: exact, or a float with an error estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CValue {
    Exact(#[serde(with = "serde_rational")] Rational),
    Approx { value: f64, err: f64 },
}

impl CValue {
    pub fn zero() -> CValue {
        CValue::Exact(Rational::zero())
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            CValue::Exact(q) => to_f64(q),
            CValue::Approx { value, .. } => *value,
        }
    }

    pub fn err(&self) -> f64 {
        match self {
            CValue::Exact(_) => 0.0,
            CValue::Approx { err, .. } => *err,
        }
    }

    pub fn add(&self, other: &CValue) -> CValue {
        match (self, other) {
            (CValue::Exact(a), CValue::Exact(b)) => CValue::Exact(a + b),
            _ => CValue::Approx {
                value: self.to_f64() + other.to_f64(),
                err: self.err() + other.err(),
            },
        }
    }

    pub fn scale(&self, c: &Rational) -> CValue {
        match self {
            CValue::Exact(a) => CValue::Exact(a * c),
            CValue::Approx { value, err } => {
                let f = to_f64(c);
                CValue::Approx { value: value * f, err: err * f.abs() }
            }
        }
    }

    /// Exact equality for two exact values, otherwise `|a − b| <= tol`.
    pub fn matches(&self, other: &CValue, tol: f64) -> bool {
        match (self, other) {
            (CValue::Exact(a), CValue::Exact(b)) => a == b,
            _ => (self.to_f64() - other.to_f64()).abs() <= tol,
        }
    }

    pub fn display(&self) -> String {
        match self {
            CValue::Exact(q) => format_rational(q),
            CValue::Approx { value, .. } => format!("{value:.15e}"),
        }
    }
}

/// `E(x) = (T, C)` for an element of the polytope algebra, with `T` bigraded by
/// face dimension and `alpha` the multiplicity of the degree-0 part.
#[derive(Clone, Debug, PartialEq)]
pub struct ValuationRep {
    n: usize,
    components: Vec<Vec<FaceCurrent>>,
    c: CValue,
    alpha: Rational,
}

impl ValuationRep {
    pub fn new(
        n: usize,
        components: Vec<Vec<FaceCurrent>>,
        c: CValue,
        alpha: Rational,
    ) -> Result<ValuationRep> {
        if components.len() > n {
            return Err(Error::MalformedRep(format!("{} degrees for dimension {n}", components.len())));
        }
        let mut components = components;
        components.resize(n, vec![]);
        for (k, comp) in components.iter().enumerate() {
            for fc in comp {
                if fc.degree() != k || fc.normal.ambient_dim() != n {
                    return Err(Error::MalformedRep(format!("term of degree {} filed under {k}", fc.degree())));
                }
            }
        }
        Ok(ValuationRep { n, components, c, alpha })
    }

    pub fn zero(n: usize) -> ValuationRep {
        ValuationRep { n, components: vec![vec![]; n], c: CValue::zero(), alpha: Rational::zero() }
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    /// Terms of face dimension `k`.
    pub fn component(&self, k: usize) -> &[FaceCurrent] {
        self.components.get(k).map_or(&[], Vec::as_slice)
    }

    pub fn components(&self) -> &[Vec<FaceCurrent>] {
        &self.components
    }

    pub fn c(&self) -> &CValue {
        &self.c
    }

    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }

    pub fn term_count(&self) -> usize {
        self.components.iter().map(Vec::len).sum()
    }

    pub fn add(&self, other: &ValuationRep) -> Result<ValuationRep> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n });
        }
        let mut components = self.components.clone();
        for (k, comp) in other.components.iter().enumerate() {
            components[k].extend(comp.iter().cloned());
        }
        Ok(ValuationRep { n: self.n, components, c: self.c.add(&other.c), alpha: &self.alpha + &other.alpha })
    }

    pub fn scale(&self, c: &Rational) -> ValuationRep {
        ValuationRep {
            n: self.n,
            components: self
                .components
                .iter()
                .map(|comp| comp.iter().filter_map(|fc| fc.scaled(c)).collect())
                .collect(),
            c: self.c.scale(c),
            alpha: &self.alpha * c,
        }
    }

    pub fn sub(&self, other: &ValuationRep) -> Result<ValuationRep> {
        self.add(&other.scale(&-Rational::one()))
    }

    /// Action of `Δ(λ)`: face-dimension-`k` terms scale by `λ^k`, `C` by `λ^n`.
    pub fn dilate(&self, lambda: &Rational) -> Result<ValuationRep> {
        if !lambda.is_positive() {
            return Err(Error::InvalidScale);
        }
        let pow = |k: usize| (0..k).fold(Rational::one(), |acc, _| acc * lambda);
        Ok(ValuationRep {
            n: self.n,
            components: self
                .components
                .iter()
                .enumerate()
                .map(|(k, comp)| comp.iter().filter_map(|fc| fc.scaled(&pow(k))).collect())
                .collect(),
            c: self.c.scale(&pow(self.n)),
            alpha: self.alpha.clone(),
        })
    }

    /// Checks that the degree-0 constructible function is the constant `alpha`.
    pub fn check_alpha(&self) -> Result<()> {
        let cells = group_cells(self.n, 0, &self.components[0].iter().collect::<Vec<_>>(), &[])?;
        let ok = match cells {
            None => self.alpha.is_zero(),
            Some(g) => g.iter().all(|c| c.value == self.alpha),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::NonConstantAlpha)
        }
    }
}

/// `E(M([P]))`: one term `(v_F, ň(F,P))` per face of dimension below `n`,
/// `C = vol(P)` and `alpha = 1`.
pub fn represent(p: &Polytope) -> ValuationRep {
    let n = p.ambient_dim();
    let lat = p.face_lattice();
    let mut components = vec![vec![]; n];
    for f in lat.faces.iter().filter(|f| f.dim < n) {
        let normal = f.oriented_normal().expect("proper face has a nonzero normal cone");
        components[f.dim].push(FaceCurrent::new(f.v.clone(), normal).expect("face data is complementary"));
    }
    ValuationRep { n, components, c: CValue::Exact(p.volume()), alpha: Rational::one() }
}

/// A top-dimensional cell of an arrangement with the exact value there.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Cell {
    pub signs: Vec<i8>,
    #[serde(with = "serde_rational::vec")]
    pub witness: QVec,
    #[serde(with = "serde_rational")]
    pub value: Rational,
}

/// The constructible function attached to one degree and one span `L`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CanonicalGroup {
    pub degree: usize,
    /// RREF basis of `L`.
    #[serde(with = "serde_rational::vec2")]
    pub span: Vec<QVec>,
    /// The fixed k-vector `w_L` complementary to `L`.
    pub w: KVector,
    #[serde(with = "serde_rational::vec2")]
    pub hyperplanes: Vec<QVec>,
    /// Nonzero cells only.
    pub cells: Vec<Cell>,
}

/// Normal form of a representation: nonzero cell values per degree and span.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CanonicalRep {
    pub dim: usize,
    pub groups: Vec<CanonicalGroup>,
    pub c: CValue,
    #[serde(with = "serde_rational")]
    pub alpha: Rational,
}

impl CanonicalRep {
    /// `true` when the `T` part vanishes.
    pub fn t_is_zero(&self) -> bool {
        self.groups.is_empty()
    }
}

/// All cells (zero ones included) of the function `Σ c_j s_j 1_{N̂_j}` on `L`.
/// `None` if there are no terms. `span` may be passed empty to take it from the terms.
fn group_cells(
    n: usize,
    degree: usize,
    terms: &[&FaceCurrent],
    span: &[QVec],
) -> Result<Option<Vec<Cell>>> {
    let Some(first) = terms.first() else {
        return Ok(None);
    };
    let span: Vec<QVec> = if span.is_empty() { first.normal.cone().span().to_vec() } else { span.to_vec() };
    let (_, coeffs) = group_coefficients(n, degree, terms, &span)?;
    let hyperplanes = group_hyperplanes(terms);
    let restricted: Vec<QVec> =
        hyperplanes.iter().map(|a| span.iter().map(|b| dot(a, b)).collect()).collect();
    let int_facets: Option<Vec<Vec<IVec>>> =
        terms.iter().map(|fc| fc.normal.cone().facets().iter().map(|a| int_vec(a)).collect()).collect();
    let int_planes: Option<Vec<IVec>> = hyperplanes.iter().map(|a| int_vec(a)).collect();
    let cells = cell_witnesses(&restricted, span.len())
        .into_iter()
        .map(|y| {
            let mut x = vec![Rational::zero(); n];
            for (c, b) in y.iter().zip(&span) {
                for (xi, bi) in x.iter_mut().zip(b) {
                    *xi += c * bi;
                }
            }
            let fast = match (&int_facets, &int_planes, int_vec(&x)) {
                (Some(tf), Some(hp), Some(xi)) => evaluate_int(tf, hp, &coeffs, &xi),
                _ => None,
            };
            let (signs, value) = fast.unwrap_or_else(|| {
                let mut value = Rational::zero();
                for (fc, c) in terms.iter().zip(&coeffs) {
                    if fc.normal.cone().facets().iter().all(|a| dot(a, &x).is_positive()) {
                        value += c;
                    }
                }
                (sign_vector(&hyperplanes, &x), value)
            });
            Cell { signs, witness: x, value }
        })
        .collect();
    Ok(Some(cells))
}

/// Sign vector and value at an integer point; `None` on overflow.
fn evaluate_int(
    term_facets: &[Vec<IVec>],
    planes: &[IVec],
    coeffs: &[Rational],
    x: &[i128],
) -> Option<(Vec<i8>, Rational)> {
    let mut value = Rational::zero();
    for (facets, c) in term_facets.iter().zip(coeffs) {
        let mut inside = true;
        for a in facets {
            if int_dot(a, x)? <= 0 {
                inside = false;
                break;
            }
        }
        if inside {
            value += c;
        }
    }
    let signs = planes.iter().map(|a| int_dot(a, x).map(|d| d.signum() as i8)).collect::<Option<Vec<i8>>>()?;
    Some((signs, value))
}

/// `w_L` and the coefficients `c_j s_j` with `v_j = c_j w_L`.
fn group_coefficients(
    n: usize,
    degree: usize,
    terms: &[&FaceCurrent],
    span: &[QVec],
) -> Result<(KVector, Vec<Rational>)> {
    let w = complement_kvector(n, span);
    let b = KVector::simple_from_basis(n, span)?;
    let orient_l = sign(&w.wedge(&b)?.top_coefficient()?);
    let mut coeffs = Vec::with_capacity(terms.len());
    for fc in terms {
        let c = fc.v.ratio_to(&w).ok_or_else(|| {
            Error::MalformedRep(format!("degree-{degree} k-vector {} is not parallel to {w}", fc.v))
        })?;
        let s = fc.normal.sign() * orient_l;
        coeffs.push(if s < 0 { -c } else { c });
    }
    Ok((w, coeffs))
}

fn group_hyperplanes(terms: &[&FaceCurrent]) -> Vec<QVec> {
    let mut hs: Vec<QVec> = terms
        .iter()
        .flat_map(|fc| fc.normal.cone().facets().iter().map(|a| primitive_line(a)))
        .collect();
    hs.sort();
    hs.dedup();
    hs
}

/// Groups terms by degree and span and evaluates each group on its arrangement cells.
pub fn canonical_form(rep: &ValuationRep) -> Result<CanonicalRep> {
    let n = rep.n;
    let mut groups: BTreeMap<(usize, Vec<QVec>), Vec<&FaceCurrent>> = BTreeMap::new();
    for (k, comp) in rep.components.iter().enumerate() {
        for fc in comp {
            groups.entry((k, fc.normal.cone().span().to_vec())).or_default().push(fc);
        }
    }
    let groups: Vec<((usize, Vec<QVec>), Vec<&FaceCurrent>)> = groups.into_iter().collect();
    let built: Vec<Result<Option<CanonicalGroup>>> = groups
        .par_iter()
        .map(|((k, span), terms)| {
            let cells = group_cells(n, *k, terms, span)?.unwrap_or_default();
            let cells: Vec<Cell> = cells.into_iter().filter(|c| !c.value.is_zero()).collect();
            if cells.is_empty() {
                return Ok(None);
            }
            Ok(Some(CanonicalGroup {
                degree: *k,
                span: span.clone(),
                w: complement_kvector(n, span),
                hyperplanes: group_hyperplanes(terms),
                cells,
            }))
        })
        .collect();
    let mut out = Vec::new();
    for g in built {
        if let Some(g) = g? {
            out.push(g);
        }
    }
    Ok(CanonicalRep { dim: n, groups: out, c: rep.c.clone(), alpha: rep.alpha.clone() })
}

/// First difference found between two representations.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RepDiff {
    /// The `T` parts differ on a cell: `value` is the difference there.
    Cell {
        degree: usize,
        #[serde(with = "serde_rational::vec2")]
        span: Vec<QVec>,
        #[serde(with = "serde_rational::vec")]
        witness: QVec,
        #[serde(with = "serde_rational")]
        value: Rational,
    },
    C { lhs: String, rhs: String },
    Alpha {
        #[serde(with = "serde_rational")]
        lhs: Rational,
        #[serde(with = "serde_rational")]
        rhs: Rational,
    },
}

/// `None` when the representations are equal (see [`equals`]), else the first difference.
pub fn first_difference(a: &ValuationRep, b: &ValuationRep, cfg: &NumericConfig) -> Result<Option<RepDiff>> {
    let d = canonical_form(&a.sub(b)?)?;
    if let Some(g) = d.groups.first() {
        let cell = &g.cells[0];
        return Ok(Some(RepDiff::Cell {
            degree: g.degree,
            span: g.span.clone(),
            witness: cell.witness.clone(),
            value: cell.value.clone(),
        }));
    }
    if !a.c.matches(&b.c, cfg.tol) {
        return Ok(Some(RepDiff::C { lhs: a.c.display(), rhs: b.c.display() }));
    }
    if a.alpha != b.alpha {
        return Ok(Some(RepDiff::Alpha { lhs: a.alpha.clone(), rhs: b.alpha.clone() }));
    }
    Ok(None)
}

/// Equality of the represented valuations: the `T` parts agree as functions,
/// `C` matches (exactly, or within `cfg.tol` if approximate) and the alphas agree.
pub fn equals(a: &ValuationRep, b: &ValuationRep, cfg: &NumericConfig) -> Result<bool> {
    Ok(first_difference(a, b, cfg)?.is_none())
}

/// Exact equality of the `T` parts only.
pub fn t_equal(a: &ValuationRep, b: &ValuationRep) -> Result<bool> {
    Ok(canonical_form(&a.sub(b)?)?.t_is_zero())
}

#[derive(Serialize, Deserialize)]
struct FaceCurrentJson {
    v: KVector,
    normal: SphericalPolytope,
}

impl Serialize for FaceCurrent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FaceCurrentJson { v: self.v.clone(), normal: self.normal.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FaceCurrent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = FaceCurrentJson::deserialize(d)?;
        FaceCurrent::new(raw.v, raw.normal).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct ValuationRepJson {
    dim: usize,
    components: Vec<Vec<FaceCurrent>>,
    c: CValue,
    #[serde(with = "serde_rational")]
    alpha: Rational,
}

impl Serialize for ValuationRep {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ValuationRepJson {
            dim: self.n,
            components: self.components.clone(),
            c: self.c.clone(),
            alpha: self.alpha.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ValuationRep {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = ValuationRepJson::deserialize(d)?;
        ValuationRep::new(raw.dim, raw.components, raw.c, raw.alpha).map_err(D::Error::custom)
    }
}
