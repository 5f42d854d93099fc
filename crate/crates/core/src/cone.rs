//! Polyhedral cones in `Q^n` with both generator and halfspace descriptions.

use std::collections::BTreeSet;

use itertools::Itertools;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arrangement::{int_dot, int_vec, IVec};
use crate::error::{Error, Result};
use crate::linalg::{
    add, dot, in_span, is_zero, lex_cmp, neg, nullspace, primitive, project, rank, row_space, sub,
    zeros, QVec,
};
use crate::rational::{serde_rational, Rational};

/// A closed convex polyhedral cone.
///
/// The description is canonical, so structural equality is equality of cones:
/// `span` and `lineality` are RREF bases, `rays` are the extreme rays of the
/// pointed part (orthogonal to the lineality space), and `facets` are inward
/// normals lying in `span`. All stored vectors are primitive.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cone {
    n: usize,
    span: Vec<QVec>,
    lineality: Vec<QVec>,
    rays: Vec<QVec>,
    facets: Vec<QVec>,
}

fn check_dims(n: usize, vs: &[QVec]) -> Result<()> {
    match vs.iter().find(|v| v.len() != n) {
        Some(v) => Err(Error::DimensionMismatch { expected: n, got: v.len() }),
        None => Ok(()),
    }
}

fn combine(basis: &[QVec], coeffs: &[Rational], n: usize) -> QVec {
    let mut out = zeros(n);
    for (b, c) in basis.iter().zip(coeffs) {
        if c.is_zero() {
            continue;
        }
        for (o, x) in out.iter_mut().zip(b) {
            *o += c * x;
        }
    }
    out
}

impl Cone {
    pub fn zero(n: usize) -> Cone {
        Cone { n, span: vec![], lineality: vec![], rays: vec![], facets: vec![] }
    }

    /// The whole space `Q^n`.
    pub fn full(n: usize) -> Cone {
        let basis: Vec<QVec> = (0..n).map(|i| crate::linalg::unit(n, i)).collect();
        Cone { n, span: basis.clone(), lineality: basis, rays: vec![], facets: vec![] }
    }

    /// The linear subspace spanned by `vectors`.
    pub fn subspace(n: usize, vectors: &[QVec]) -> Result<Cone> {
        check_dims(n, vectors)?;
        let basis = row_space(vectors);
        Ok(Cone { n, span: basis.clone(), lineality: basis, rays: vec![], facets: vec![] })
    }

    /// Conical hull of `gens`.
    pub fn from_generators(n: usize, gens: &[QVec]) -> Result<Cone> {
        check_dims(n, gens)?;
        let gens: Vec<QVec> = gens
            .iter()
            .filter(|g| !is_zero(g))
            .map(|g| primitive(g))
            .sorted_by(|a, b| lex_cmp(a, b))
            .dedup()
            .collect();
        let span = row_space(&gens);
        let d = span.len();
        if d == 0 {
            return Ok(Cone::zero(n));
        }

        let mut facets = BTreeSet::new();
        for subset in gens.iter().combinations(d - 1) {
            let m: Vec<QVec> =
                subset.iter().map(|g| span.iter().map(|b| dot(b, g)).collect()).collect();
            let ns = nullspace(&m, d);
            if ns.len() != 1 {
                continue;
            }
            let a = combine(&span, &ns[0], n);
            let (mut pos, mut negs) = (false, false);
            for g in &gens {
                let s = dot(&a, g);
                pos |= s.is_positive();
                negs |= s.is_negative();
                if pos && negs {
                    break;
                }
            }
            if pos && negs {
                continue;
            }
            facets.insert(primitive(&if negs { neg(&a) } else { a }));
        }
        let facets: Vec<QVec> = facets.into_iter().collect();

        let lineality = if facets.is_empty() {
            span.clone()
        } else {
            let m: Vec<QVec> =
                facets.iter().map(|a| span.iter().map(|b| dot(a, b)).collect()).collect();
            let ys = nullspace(&m, d);
            row_space(&ys.iter().map(|y| combine(&span, y, n)).collect::<Vec<_>>())
        };

        let pointed_dim = d - lineality.len();
        let mut rays = BTreeSet::new();
        if pointed_dim > 0 {
            for g in &gens {
                let r = if lineality.is_empty() { g.clone() } else { sub(g, &project(&lineality, g)) };
                if is_zero(&r) {
                    continue;
                }
                let tight: Vec<QVec> =
                    facets.iter().filter(|a| dot(a, &r).is_zero()).cloned().collect();
                if rank(&tight) == pointed_dim - 1 {
                    rays.insert(primitive(&r));
                }
            }
        }
        Ok(Cone { n, span, lineality, rays: rays.into_iter().collect(), facets })
    }

    /// The cone `{x : <e, x> = 0 for e in equations, <a, x> >= 0 for a in inequalities}`.
    pub fn from_constraints(n: usize, equations: &[QVec], inequalities: &[QVec]) -> Result<Cone> {
        check_dims(n, equations)?;
        check_dims(n, inequalities)?;
        let e_basis = nullspace(equations, n);
        let e = e_basis.len();
        if e == 0 {
            return Ok(Cone::zero(n));
        }
        let m: Vec<QVec> = inequalities
            .iter()
            .map(|a| e_basis.iter().map(|b| dot(a, b)).collect::<QVec>())
            .filter(|r| !is_zero(r))
            .map(|r| primitive(&r))
            .sorted_by(|a, b| lex_cmp(a, b))
            .dedup()
            .collect();
        let lin_y = nullspace(&m, e);
        let rows = row_space(&m);
        let w = rows.len();
        let nm: Vec<QVec> =
            m.iter().map(|row| rows.iter().map(|r| dot(row, r)).collect()).collect();
        let feasible = |z: &QVec| nm.iter().all(|row| !dot(row, z).is_negative());

        let mut rays_z: BTreeSet<QVec> = BTreeSet::new();
        if w == 1 {
            for z in [vec![Rational::from_integer(1.into())], vec![Rational::from_integer((-1).into())]] {
                if feasible(&z) {
                    rays_z.insert(z);
                }
            }
        } else if w > 1 {
            for subset in nm.iter().combinations(w - 1) {
                let sub_rows: Vec<QVec> = subset.into_iter().cloned().collect();
                let ns = nullspace(&sub_rows, w);
                if ns.len() != 1 {
                    continue;
                }
                for z in [ns[0].clone(), neg(&ns[0])] {
                    if feasible(&z) {
                        rays_z.insert(primitive(&z));
                    }
                }
            }
        }

        let to_x = |y: &QVec| combine(&e_basis, y, n);
        let mut gens: Vec<QVec> = Vec::new();
        for z in &rays_z {
            gens.push(to_x(&combine(&rows, z, e)));
        }
        for y in &lin_y {
            let x = to_x(y);
            gens.push(neg(&x));
            gens.push(x);
        }
        Cone::from_generators(n, &gens)
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    /// Dimension of the linear span.
    pub fn dim(&self) -> usize {
        self.span.len()
    }

    pub fn lineality_dim(&self) -> usize {
        self.lineality.len()
    }

    pub fn span(&self) -> &[QVec] {
        &self.span
    }

    pub fn lineality(&self) -> &[QVec] {
        &self.lineality
    }

    pub fn rays(&self) -> &[QVec] {
        &self.rays
    }

    /// Inward facet normals `a`, with the cone inside `<a, x> >= 0`.
    pub fn facets(&self) -> &[QVec] {
        &self.facets
    }

    /// Basis of the orthogonal complement of the span.
    pub fn equations(&self) -> Vec<QVec> {
        row_space(&nullspace(&self.span, self.n))
    }

    /// Rays followed by `±` the lineality basis.
    pub fn generators(&self) -> Vec<QVec> {
        let mut g = self.rays.clone();
        for l in &self.lineality {
            g.push(l.clone());
            g.push(neg(l));
        }
        g
    }

    pub fn is_zero(&self) -> bool {
        self.span.is_empty()
    }

    pub fn is_pointed(&self) -> bool {
        self.lineality.is_empty()
    }

    /// `true` if the cone is a linear subspace.
    pub fn is_subspace(&self) -> bool {
        self.facets.is_empty()
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        in_span(&self.span, x) && self.facets.iter().all(|a| !dot(a, x).is_negative())
    }

    pub fn contains_relint(&self, x: &[Rational]) -> bool {
        in_span(&self.span, x) && self.facets.iter().all(|a| dot(a, x).is_positive())
    }

    /// A point of the relative interior; nonzero unless the cone is `{0}`.
    pub fn relint_point(&self) -> QVec {
        let mut x = zeros(self.n);
        for r in &self.rays {
            x = add(&x, r);
        }
        if self.rays.is_empty() {
            for l in &self.lineality {
                x = add(&x, l);
            }
        }
        x
    }

    pub fn negate(&self) -> Cone {
        let mut rays: Vec<QVec> = self.rays.iter().map(|r| neg(r)).collect();
        rays.sort_by(|a, b| lex_cmp(a, b));
        let mut facets: Vec<QVec> = self.facets.iter().map(|a| neg(a)).collect();
        facets.sort_by(|a, b| lex_cmp(a, b));
        Cone { n: self.n, span: self.span.clone(), lineality: self.lineality.clone(), rays, facets }
    }

    pub fn intersect(&self, other: &Cone) -> Result<Cone> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n });
        }
        let mut eqs = self.equations();
        eqs.extend(other.equations());
        let mut ineqs = self.facets.clone();
        ineqs.extend(other.facets.iter().cloned());
        Cone::from_constraints(self.n, &eqs, &ineqs)
    }

    /// Intersection with a linear subspace given by a spanning set.
    pub fn intersect_subspace(&self, vectors: &[QVec]) -> Result<Cone> {
        let mut eqs = self.equations();
        eqs.extend(nullspace(vectors, self.n));
        Cone::from_constraints(self.n, &eqs, &self.facets)
    }

    fn with_rays(&self, idx: &[usize]) -> Cone {
        let mut gens: Vec<QVec> = idx.iter().map(|&i| self.rays[i].clone()).collect();
        for l in &self.lineality {
            gens.push(l.clone());
            gens.push(neg(l));
        }
        Cone::from_generators(self.n, &gens).expect("dimensions already checked")
    }

    /// Each facet normal with the facet it cuts out.
    pub fn facet_cones(&self) -> Vec<(QVec, Cone)> {
        self.facets
            .iter()
            .map(|a| {
                let idx: Vec<usize> =
                    (0..self.rays.len()).filter(|&i| dot(a, &self.rays[i]).is_zero()).collect();
                (a.clone(), self.with_rays(&idx))
            })
            .collect()
    }

    /// All nonempty faces, the cone itself included, ordered by decreasing dimension.
    pub fn faces(&self) -> Vec<Cone> {
        if self.is_zero() {
            return vec![self.clone()];
        }
        let facet_sets: Vec<Vec<usize>> = self
            .facets
            .iter()
            .map(|a| (0..self.rays.len()).filter(|&i| dot(a, &self.rays[i]).is_zero()).collect())
            .collect();
        let all: Vec<usize> = (0..self.rays.len()).collect();
        let mut sets = intersection_closure(&facet_sets);
        sets.insert(all);
        let mut faces: Vec<Cone> = sets.iter().map(|s| self.with_rays(s)).collect();
        faces.sort_by(|a, b| b.dim().cmp(&a.dim()).then_with(|| a.cmp(b)));
        faces.dedup();
        faces
    }

    /// Splits off the lineality space orthant by orthant; the pieces are pointed,
    /// share only boundary, and cover the cone.
    pub fn pointed_pieces(&self) -> Vec<Cone> {
        if self.is_pointed() {
            return vec![self.clone()];
        }
        let m = self.lineality.len();
        (0..1usize << m)
            .map(|mask| {
                let mut gens = self.rays.clone();
                for (i, l) in self.lineality.iter().enumerate() {
                    gens.push(if mask >> i & 1 == 1 { neg(l) } else { l.clone() });
                }
                Cone::from_generators(self.n, &gens).expect("dimensions already checked")
            })
            .collect()
    }

    /// Simplicial subdivision of a pointed cone: a pulling fan from the first ray.
    /// Each simplex is a list of `dim()` linearly independent rays.
    pub fn triangulate(&self) -> Vec<Vec<QVec>> {
        assert!(self.is_pointed(), "triangulate needs a pointed cone");
        let d = self.dim();
        if d == 0 {
            return vec![];
        }
        if self.rays.len() == d {
            return vec![self.rays.clone()];
        }
        let apex = &self.rays[0];
        let mut out = Vec::new();
        for (a, facet) in self.facet_cones() {
            if dot(&a, apex).is_zero() {
                continue;
            }
            for mut s in facet.triangulate() {
                s.insert(0, apex.clone());
                out.push(s);
            }
        }
        out
    }

    /// Exact certificate that two pointed cones meet only at the origin: a
    /// functional positive on every ray of `a` and negative on every ray of `b`,
    /// found by a float perceptron and checked in integers.
    pub fn separated_from(&self, b: &Cone) -> bool {
            let a = self;
        if !a.is_pointed() || !b.is_pointed() || a.is_zero() || b.is_zero() {
            return false;
        }
        let (Some(ra), Some(rb)) = (
            a.rays().iter().map(|r| int_vec(r)).collect::<Option<Vec<IVec>>>(),
            b.rays().iter().map(|r| int_vec(r)).collect::<Option<Vec<IVec>>>(),
        ) else {
            return false;
        };
        let unit = |r: &IVec| -> Vec<f64> {
            let v: Vec<f64> = r.iter().map(|&x| x as f64).collect();
            let l = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / l).collect()
        };
        let ua: Vec<Vec<f64>> = ra.iter().map(unit).collect();
        let ub: Vec<Vec<f64>> = rb.iter().map(unit).collect();
        let n = a.ambient_dim();
        let mut w = vec![0.0; n];
        for u in &ua {
            w.iter_mut().zip(u).for_each(|(x, y)| *x += y);
        }
        for u in &ub {
            w.iter_mut().zip(u).for_each(|(x, y)| *x -= y);
        }
        let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
        for _ in 0..64 {
            let len = dot(&w, &w).sqrt();
            if len == 0.0 {
                return false;
            }
            let margin = 1e-9 * len;
            if let Some(u) = ua.iter().find(|u| dot(&w, u) <= margin) {
                w.iter_mut().zip(u).for_each(|(x, y)| *x += y);
            } else if let Some(u) = ub.iter().find(|u| dot(&w, u) >= -margin) {
                w.iter_mut().zip(u).for_each(|(x, y)| *x -= y);
            } else {
                let top = w.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                let wi: IVec = w.iter().map(|x| (x / top * 1e9).round() as i128).collect();
                return ra.iter().all(|r| int_dot(&wi, r).is_some_and(|d| d > 0))
                    && rb.iter().all(|r| int_dot(&wi, r).is_some_and(|d| d < 0));
            }
        }
        false
    }
}

/// Closes a family of sorted index sets under pairwise intersection.
pub(crate) fn intersection_closure(sets: &[Vec<usize>]) -> BTreeSet<Vec<usize>> {
    let mut all: BTreeSet<Vec<usize>> = sets.iter().cloned().collect();
    let mut frontier: Vec<Vec<usize>> = all.iter().cloned().collect();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for f in &frontier {
            for s in sets {
                let i: Vec<usize> = f.iter().copied().filter(|x| s.binary_search(x).is_ok()).collect();
                if all.insert(i.clone()) {
                    next.push(i);
                }
            }
        }
        frontier = next;
    }
    all
}

#[derive(Serialize, Deserialize)]
struct ConeJson {
    ambient_dim: usize,
    #[serde(with = "serde_rational::vec2")]
    generators: Vec<QVec>,
    #[serde(with = "serde_rational::vec2", default)]
    halfspaces: Vec<QVec>,
    #[serde(with = "serde_rational::vec2", default)]
    equations: Vec<QVec>,
    lin_dim: usize,
}

impl Serialize for Cone {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ConeJson {
            ambient_dim: self.n,
            generators: self.generators(),
            halfspaces: self.facets.clone(),
            equations: self.equations(),
            lin_dim: self.dim(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Cone {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = ConeJson::deserialize(d)?;
        let cone = Cone::from_generators(raw.ambient_dim, &raw.generators).map_err(D::Error::custom)?;
        if cone.dim() != raw.lin_dim {
            return Err(D::Error::custom("lin_dim does not match generators"));
        }
        if !raw.halfspaces.is_empty() || !raw.equations.is_empty() {
            let h = Cone::from_constraints(raw.ambient_dim, &raw.equations, &raw.halfspaces)
                .map_err(D::Error::custom)?;
            if h != cone {
                return Err(D::Error::custom("generators and halfspaces describe different cones"));
            }
        }
        Ok(cone)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{from_ints, unit};

    fn v(xs: &[i64]) -> QVec {
        from_ints(xs)
    }

    #[test]
    fn quadrant() {
        let c = Cone::from_generators(2, &[v(&[1, 0]), v(&[0, 1]), v(&[1, 1])]).unwrap();
        assert_eq!(c.rays(), &[v(&[0, 1]), v(&[1, 0])]);
        assert_eq!(c.facets(), &[v(&[0, 1]), v(&[1, 0])]);
        assert!(c.is_pointed());
        assert!(c.contains_relint(&v(&[2, 1])));
        assert!(!c.contains_relint(&v(&[2, 0])));
    }

    #[test]
    fn half_plane_has_lineality() {
        let c = Cone::from_generators(2, &[v(&[1, 0]), v(&[-1, 0]), v(&[0, 1])]).unwrap();
        assert_eq!(c.lineality_dim(), 1);
        assert_eq!(c.rays(), &[v(&[0, 1])]);
        assert_eq!(c.facets(), &[v(&[0, 1])]);
        assert_eq!(c.pointed_pieces().len(), 2);
    }

    #[test]
    fn line_in_plane() {
        let c = Cone::from_generators(2, &[v(&[0, 1]), v(&[0, -1])]).unwrap();
        assert_eq!(c.dim(), 1);
        assert!(c.is_subspace());
        assert_eq!(c.equations(), vec![v(&[1, 0])]);
    }

    #[test]
    fn constraints_match_generators() {
        let g = Cone::from_generators(3, &[v(&[1, 0, 0]), v(&[0, 1, 0]), v(&[0, 0, 1])]).unwrap();
        let h = Cone::from_constraints(3, &[], &[unit(3, 0), unit(3, 1), unit(3, 2)]).unwrap();
        assert_eq!(g, h);
        let square_pyramid = Cone::from_generators(
            3,
            &[v(&[1, 1, 1]), v(&[1, -1, 1]), v(&[-1, 1, 1]), v(&[-1, -1, 1])],
        )
        .unwrap();
        assert_eq!(square_pyramid.facets().len(), 4);
        let back = Cone::from_constraints(3, &[], square_pyramid.facets()).unwrap();
        assert_eq!(back, square_pyramid);
    }

    #[test]
    fn intersection_of_octants_is_zero() {
        let pos = Cone::from_generators(3, &[unit(3, 0), unit(3, 1), unit(3, 2)]).unwrap();
        assert!(pos.intersect(&pos.negate()).unwrap().is_zero());
    }

    #[test]
    fn faces_of_octant() {
        let pos = Cone::from_generators(3, &[unit(3, 0), unit(3, 1), unit(3, 2)]).unwrap();
        let faces = pos.faces();
        // cone, three 2-faces, three rays, apex
        assert_eq!(faces.len(), 8);
        assert_eq!(faces.iter().filter(|f| f.dim() == 1).count(), 3);
        assert!(faces.last().unwrap().is_zero());
    }

    #[test]
    fn triangulate_square_cone() {
        let c = Cone::from_generators(
            3,
            &[v(&[1, 1, 1]), v(&[1, -1, 1]), v(&[-1, 1, 1]), v(&[-1, -1, 1])],
        )
        .unwrap();
        let t = c.triangulate();
        assert_eq!(t.len(), 2);
        assert!(t.iter().all(|s| s.len() == 3 && rank(s) == 3));
    }

    #[test]
    fn json_round_trip() {
        let c = Cone::from_generators(3, &[v(&[1, 0, 0]), v(&[0, 1, 0]), v(&[0, -1, 0])]).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        let back: Cone = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
    }
}
