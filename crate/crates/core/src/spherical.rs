//! Oriented spherical polytopes `N = N̂ ∩ S^{n-1}`, chains of them, and the join volume.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arrangement::int_rank;
use crate::cone::Cone;
use crate::error::{Error, Result};
use crate::linalg::{det, dot, neg, pivots_of, rank, rref_coords, QVec};
use crate::rational::{serde_rational, sign, to_f64, Rational};
use crate::volume::{simplex_volume, NumericConfig, VolumeEstimate};

/// An oriented spherical polytope. The orientation is a sign relative to the
/// RREF basis of the cone's span. Orientations follow the radial-first rule: a
/// point `p` with basis `(p)` is positively oriented.
#[derive(Clone, Debug)]
pub struct SphericalPolytope {
    cone: Cone,
    sign: i32,
    simplices: OnceLock<Arc<Vec<Vec<QVec>>>>,
}

impl PartialEq for SphericalPolytope {
    fn eq(&self, other: &Self) -> bool {
        self.sign == other.sign && self.cone == other.cone
    }
}

impl Eq for SphericalPolytope {}

/// Orientation of `basis` relative to the RREF basis `span` of the same subspace.
fn basis_sign(span: &[QVec], basis: &[QVec]) -> i32 {
    let p = pivots_of(span);
    let m: Vec<QVec> = basis.iter().map(|b| rref_coords(&p, b)).collect();
    sign(&det(&m))
}

impl SphericalPolytope {
    /// Panics on the zero cone or a sign other than `±1`.
    pub fn new(cone: Cone, sign: i32) -> SphericalPolytope {
        assert!(!cone.is_zero(), "spherical polytope needs a nonzero cone");
        assert!(sign == 1 || sign == -1, "orientation sign must be ±1");
        SphericalPolytope { cone, sign, simplices: OnceLock::new() }
    }

    /// Orients the cone by an ordered basis of its span.
    pub fn from_oriented_basis(cone: Cone, basis: &[QVec]) -> Result<SphericalPolytope> {
        if cone.is_zero() {
            return Err(Error::EmptyInput("zero cone".into()));
        }
        if basis.len() != cone.dim() || rank(basis) != cone.dim() {
            return Err(Error::InvalidOrientation("basis does not span the cone".into()));
        }
        let mut rows = cone.span().to_vec();
        rows.extend(basis.iter().cloned());
        if rank(&rows) != cone.dim() {
            return Err(Error::InvalidOrientation("basis vector outside the span".into()));
        }
        let s = basis_sign(cone.span(), basis);
        Ok(SphericalPolytope::new(cone, s))
    }

    /// The whole sphere with the standard orientation.
    pub fn full_sphere(n: usize) -> SphericalPolytope {
        SphericalPolytope::new(Cone::full(n), 1)
    }

    /// A positively oriented point.
    pub fn point(p: &[Rational]) -> Result<SphericalPolytope> {
        let cone = Cone::from_generators(p.len(), &[p.to_vec()])?;
        SphericalPolytope::from_oriented_basis(cone, &[p.to_vec()])
    }

    pub fn cone(&self) -> &Cone {
        &self.cone
    }

    pub fn sign(&self) -> i32 {
        self.sign
    }

    pub fn ambient_dim(&self) -> usize {
        self.cone.ambient_dim()
    }

    /// Dimension as a subset of the sphere.
    pub fn dim(&self) -> usize {
        self.cone.dim() - 1
    }

    pub fn is_top_dimensional(&self) -> bool {
        self.cone.dim() == self.ambient_dim()
    }

    /// A positively oriented basis of the span.
    pub fn oriented_basis(&self) -> Vec<QVec> {
        let mut b = self.cone.span().to_vec();
        if self.sign < 0 {
            b[0] = neg(&b[0]);
        }
        b
    }

    /// Orientation of `basis` (a basis of the span) relative to this polytope.
    pub fn orientation_of(&self, basis: &[QVec]) -> i32 {
        self.sign * basis_sign(self.cone.span(), basis)
    }

    pub fn reversed(&self) -> SphericalPolytope {
        SphericalPolytope::new(self.cone.clone(), -self.sign)
    }

    /// Image under `x ↦ -x` with the pushed-forward orientation.
    pub fn antipode(&self) -> SphericalPolytope {
        let flip = if self.cone.dim().is_multiple_of(2) { 1 } else { -1 };
        SphericalPolytope::new(self.cone.negate(), self.sign * flip)
    }

    /// Complement basis and sign: `(K, ε)` with `ε·det[K; B] > 0` for the oriented basis `B`.
    fn co_orientation(&self) -> (Vec<QVec>, i32) {
        let k = self.cone.equations();
        let mut rows = k.clone();
        rows.extend(self.oriented_basis());
        (k, sign(&det(&rows)))
    }

    /// Boundary chain with outward-first induced orientations; a pointed
    /// 0-dimensional polytope has the scalar boundary `±1`.
    pub fn boundary(&self) -> SphericalChain {
        let n = self.ambient_dim();
        if self.cone.dim() == 1 {
            let scalar = if self.cone.is_pointed() {
                let b = &self.oriented_basis()[0];
                Rational::from_integer(sign(&dot(b, &self.cone.rays()[0])).into())
            } else {
                Rational::zero()
            };
            return SphericalChain::scalar(n, scalar);
        }
        let pivots = pivots_of(self.cone.span());
        let mut chain = SphericalChain::zero(n);
        for (a, facet) in self.cone.facet_cones() {
            let mut m = vec![rref_coords(&pivots, &neg(&a))];
            m.extend(facet.span().iter().map(|b| rref_coords(&pivots, b)));
            let s = sign(&det(&m));
            chain.push(Rational::one(), SphericalPolytope::new(facet, -self.sign * s));
        }
        chain
    }

    /// Simplicial subdivision of the pointed pieces, cached.
    pub fn simplices(&self) -> Arc<Vec<Vec<QVec>>> {
        self.simplices
            .get_or_init(|| {
                Arc::new(self.cone.pointed_pieces().iter().flat_map(|p| p.triangulate()).collect())
            })
            .clone()
    }

    /// Unsigned `(n-1)`-volume; the polytope must be top-dimensional.
    pub fn volume(&self, cfg: &NumericConfig) -> Result<VolumeEstimate> {
        if !self.is_top_dimensional() {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim(), got: self.cone.dim() });
        }
        Ok(self
            .simplices()
            .iter()
            .map(|s| simplex_volume(s, cfg))
            .fold(VolumeEstimate::default(), VolumeEstimate::plus))
    }

    /// Volume signed by the orientation against the standard one.
    pub fn signed_volume(&self, cfg: &NumericConfig) -> Result<VolumeEstimate> {
        Ok(self.volume(cfg)?.scaled(self.sign as f64))
    }
}

/// Spherical volume of a top-dimensional spherical polytope.
pub fn spherical_volume(n: &SphericalPolytope, cfg: &NumericConfig) -> Result<VolumeEstimate> {
    n.volume(cfg)
}

/// Intersection `N1 ∩ N2` oriented by co-orientations: if `(K_i, ε_i)` co-orient
/// the inputs then `B` is positive when `ε_1 ε_2 det[K_1; K_2; B] > 0`.
/// Returns `None` when the intersection has lower than expected dimension.
/// Non-transversal spans with a nonzero intersection are an error.
pub fn cone_intersection(
    a: &SphericalPolytope,
    b: &SphericalPolytope,
) -> Result<Option<SphericalPolytope>> {
    let n = a.ambient_dim();
    if b.ambient_dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.ambient_dim() });
    }
    let c = a.cone.intersect(&b.cone)?;
    if c.is_zero() {
        return Ok(None);
    }
    let mut rows = a.cone.span().to_vec();
    rows.extend(b.cone.span().iter().cloned());
    if rank(&rows) < n {
        return Err(Error::NotTransversal { pairs: vec![] });
    }
    if c.dim() + n < a.cone.dim() + b.cone.dim() {
        return Ok(None);
    }
    let (ka, ea) = a.co_orientation();
    let (kb, eb) = b.co_orientation();
    let mut m = ka;
    m.extend(kb);
    m.extend(c.span().iter().cloned());
    let s = ea * eb * sign(&det(&m));
    Ok(Some(SphericalPolytope::new(c, s)))
}

/// Checks one pair of cones: if their relative interiors share a nonzero point,
/// their spans must add up to the whole space.
pub fn cone_pair_transversal(a: &Cone, b: &Cone) -> bool {
    let n = a.ambient_dim();
    if a.is_zero() || b.is_zero() {
        return true;
    }
    let mut rows = a.span().to_vec();
    rows.extend(b.span().iter().cloned());
    let r = int_rank(&rows).unwrap_or_else(|| rank(&rows));
    // Spans add up to R^n, or meet only at the origin.
    if r == n || r == a.dim() + b.dim() {
        return true;
    }
    if a.separated_from(b) {
        return true;
    }
    let d = a.intersect(b).expect("same dimension");
    if d.is_zero() {
        return true;
    }
    let x = d.relint_point();
    !(a.contains_relint(&x) && b.contains_relint(&x))
}

/// Transversality of two cones given their face lists.
pub fn faces_transversal(fa: &[Cone], fb: &[Cone]) -> bool {
    fa.iter().all(|a| fb.iter().all(|b| cone_pair_transversal(a, b)))
}

/// Every pair of faces whose relative interiors meet away from the origin has spans summing to `R^n`.
pub fn transversal(a: &SphericalPolytope, b: &SphericalPolytope) -> bool {
    faces_transversal(&a.cone.faces(), &b.cone.faces())
}

/// A formal rational combination of oriented spherical polytopes plus a scalar
/// (the boundary of points lands there).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SphericalChain {
    n: usize,
    terms: Vec<(Rational, SphericalPolytope)>,
    scalar: Rational,
}

impl SphericalChain {
    pub fn zero(n: usize) -> SphericalChain {
        SphericalChain { n, terms: vec![], scalar: Rational::zero() }
    }

    pub fn scalar(n: usize, c: Rational) -> SphericalChain {
        SphericalChain { n, terms: vec![], scalar: c }
    }

    pub fn from_polytope(p: SphericalPolytope) -> SphericalChain {
        let mut c = SphericalChain::zero(p.ambient_dim());
        c.push(Rational::one(), p);
        c
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(Rational, SphericalPolytope)] {
        &self.terms
    }

    pub fn scalar_part(&self) -> &Rational {
        &self.scalar
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.scalar.is_zero()
    }

    /// Adds `c·p`, merging with an equal cone.
    pub fn push(&mut self, c: Rational, p: SphericalPolytope) {
        let c = if p.sign < 0 { -c } else { c };
        let p = if p.sign < 0 { p.reversed() } else { p };
        match self.terms.iter().position(|(_, q)| q.cone == p.cone) {
            Some(i) => {
                self.terms[i].0 += c;
                if self.terms[i].0.is_zero() {
                    self.terms.remove(i);
                }
            }
            None if !c.is_zero() => self.terms.push((c, p)),
            None => {}
        }
    }

    pub fn add(&self, other: &SphericalChain) -> SphericalChain {
        let mut out = self.clone();
        for (c, p) in &other.terms {
            out.push(c.clone(), p.clone());
        }
        out.scalar += &other.scalar;
        out
    }

    pub fn scale(&self, c: &Rational) -> SphericalChain {
        let mut out = SphericalChain::zero(self.n);
        for (d, p) in &self.terms {
            out.push(d * c, p.clone());
        }
        out.scalar = &self.scalar * c;
        out
    }

    pub fn neg(&self) -> SphericalChain {
        self.scale(&-Rational::one())
    }

    pub fn boundary(&self) -> SphericalChain {
        let mut out = SphericalChain::zero(self.n);
        for (c, p) in &self.terms {
            out = out.add(&p.boundary().scale(c));
        }
        out
    }

    /// Antipodal image; the scalar part is unchanged.
    pub fn antipode(&self) -> SphericalChain {
        let mut out = SphericalChain::scalar(self.n, self.scalar.clone());
        for (c, p) in &self.terms {
            out.push(c.clone(), p.antipode());
        }
        out
    }

    /// Terms sorted by cone, for display and comparison.
    pub fn canonical_terms(&self) -> Vec<(Rational, SphericalPolytope)> {
        let m: BTreeMap<Cone, Rational> =
            self.terms.iter().map(|(c, p)| (p.cone.clone(), c.clone())).collect();
        m.into_iter().map(|(k, c)| (c, SphericalPolytope::new(k, 1))).collect()
    }
}

/// Signed volume of the join `conv(I, J)` for one pair of polytopes.
pub fn join_pair(
    i: &SphericalPolytope,
    j: &SphericalPolytope,
    pair: (usize, usize),
    cfg: &NumericConfig,
) -> Result<VolumeEstimate> {
    let n = i.ambient_dim();
    if j.ambient_dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: j.ambient_dim() });
    }
    if i.cone.dim() + j.cone.dim() != n {
        return Err(Error::PartialFunctionDomain {
            pair,
            reason: format!("dimensions {} and {} do not add up to n-2", i.dim(), j.dim()),
        });
    }
    if !j.cone.intersect_subspace(i.cone.span())?.is_zero() {
        return Err(Error::PartialFunctionDomain {
            pair,
            reason: "second polytope meets the equator of the first".into(),
        });
    }
    let mut rows = i.cone.span().to_vec();
    rows.extend(j.cone.span().iter().cloned());
    let s = i.sign * j.sign * sign(&det(&rows));
    if s == 0 {
        return Ok(VolumeEstimate::default());
    }
    let (si, sj) = (i.simplices(), j.simplices());
    let mut acc = VolumeEstimate::default();
    for a in si.iter() {
        for b in sj.iter() {
            let mut g = a.clone();
            g.extend(b.iter().cloned());
            acc = acc.plus(simplex_volume(&g, cfg));
        }
    }
    Ok(acc.scaled(s as f64))
}

/// Bilinear extension of the join volume to chains. Scalars join as
/// `A(ε, J) = ε·svol(J)` for top-dimensional `J`, and symmetrically.
/// Pair indices in errors use `terms.len()` for the scalar part.
pub fn join_volume(
    i: &SphericalChain,
    j: &SphericalChain,
    cfg: &NumericConfig,
) -> Result<VolumeEstimate> {
    let n = i.n;
    if j.n != n {
        return Err(Error::DimensionMismatch { expected: n, got: j.n });
    }
    let mut acc = VolumeEstimate::default();
    for (a, (ca, pa)) in i.terms.iter().enumerate() {
        for (b, (cb, pb)) in j.terms.iter().enumerate() {
            let v = join_pair(pa, pb, (a, b), cfg)?;
            acc = acc.plus(v.scaled(to_f64(&(ca * cb))));
        }
    }
    let scalar_side = |eps: &Rational, chain: &SphericalChain, swap: bool| -> Result<VolumeEstimate> {
        let mut acc = VolumeEstimate::default();
        if eps.is_zero() {
            return Ok(acc);
        }
        for (b, (cb, pb)) in chain.terms.iter().enumerate() {
            let idx = if swap { (b, chain.terms.len()) } else { (chain.terms.len(), b) };
            if !pb.is_top_dimensional() {
                return Err(Error::PartialFunctionDomain {
                    pair: idx,
                    reason: "a scalar joins only top-dimensional polytopes".into(),
                });
            }
            acc = acc.plus(pb.signed_volume(cfg)?.scaled(to_f64(&(eps * cb))));
        }
        Ok(acc)
    };
    if !i.scalar.is_zero() && !j.scalar.is_zero() {
        return Err(Error::PartialFunctionDomain {
            pair: (i.terms.len(), j.terms.len()),
            reason: "two scalars cannot be joined".into(),
        });
    }
    acc = acc.plus(scalar_side(&i.scalar, j, false)?);
    acc = acc.plus(scalar_side(&j.scalar, i, true)?);
    Ok(acc)
}

#[derive(Serialize, Deserialize)]
struct SphericalJson {
    cone: Cone,
    #[serde(with = "serde_rational::vec2")]
    orientation: Vec<QVec>,
    sign: i32,
}

impl Serialize for SphericalPolytope {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SphericalJson { cone: self.cone.clone(), orientation: self.cone.span().to_vec(), sign: self.sign }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SphericalPolytope {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = SphericalJson::deserialize(d)?;
        if raw.sign != 1 && raw.sign != -1 {
            return Err(D::Error::custom("sign must be 1 or -1"));
        }
        let p = SphericalPolytope::from_oriented_basis(raw.cone, &raw.orientation)
            .map_err(D::Error::custom)?;
        Ok(if raw.sign < 0 { p.reversed() } else { p })
    }
}
