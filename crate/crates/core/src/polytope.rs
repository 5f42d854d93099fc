//! Exact convex polytopes: hulls, face lattices, face k-vectors and normal cones.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, OnceLock};

use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arrangement::{int_cross, int_dot, int_vec, IVec};
use crate::cone::{intersection_closure, Cone};
use crate::error::{Error, Result};
use crate::exterior::KVector;
use crate::linalg::{add, det, dot, lex_cmp, neg, nullspace, primitive, rank, row_space, scale, sub, QVec};
use crate::rational::{factorial, serde_rational, sign, Rational};
use crate::spherical::SphericalPolytope;

/// A nonempty convex polytope given by its vertices, sorted lexicographically.
#[derive(Clone, Debug)]
pub struct Polytope {
    n: usize,
    vertices: Vec<QVec>,
    lattice: OnceLock<Arc<FaceLattice>>,
}

impl PartialEq for Polytope {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.vertices == other.vertices
    }
}

impl Eq for Polytope {}

/// A face of a polytope with its orientation data.
#[derive(Clone, Debug)]
pub struct Face {
    pub dim: usize,
    /// Indices into the parent's vertex list, ascending.
    pub vertex_indices: Vec<usize>,
    /// Edge vectors of the first simplex of the face's triangulation.
    pub orientation_basis: Vec<QVec>,
    /// Oriented k-vector with norm equal to the k-volume of the face.
    pub v: KVector,
    pub normal_cone: Cone,
    /// Orientation of the normal cone's span relative to its RREF basis, chosen so
    /// that the face directions followed by the normal directions are positive.
    pub normal_sign: i32,
}

impl Face {
    /// `ň(F,P)`: the normal cone as an oriented spherical polytope; `None` when the cone is `{0}`.
    pub fn oriented_normal(&self) -> Option<SphericalPolytope> {
        if self.normal_cone.is_zero() {
            return None;
        }
        Some(SphericalPolytope::new(self.normal_cone.clone(), self.normal_sign))
    }
}

/// All faces of a polytope grouped by dimension, plus its facet data.
#[derive(Clone, Debug)]
pub struct FaceLattice {
    pub dim: usize,
    /// Faces ordered by dimension, then by vertex index set.
    pub faces: Vec<Face>,
    /// Facets of the polytope within its affine hull: outward normal and vertex set.
    pub facets: Vec<(QVec, Vec<usize>)>,
}

impl FaceLattice {
    pub fn faces_of_dim(&self, k: usize) -> impl Iterator<Item = &Face> {
        self.faces.iter().filter(move |f| f.dim == k)
    }

    /// Number of faces of each dimension `0..=dim`.
    pub fn counts(&self) -> Vec<usize> {
        (0..=self.dim).map(|k| self.faces_of_dim(k).count()).collect()
    }
}

struct Hull {
    /// Basis of the direction space of the affine hull.
    dir: Vec<QVec>,
    /// Basis of its orthogonal complement.
    perp: Vec<QVec>,
    facets: Vec<(QVec, Vec<usize>)>,
}

impl Hull {
    /// Brute-force facet enumeration over affinely independent `d`-subsets.
    fn compute(n: usize, pts: &[QVec]) -> Hull {
        let p0 = &pts[0];
        let diffs: Vec<QVec> = pts.iter().skip(1).map(|p| sub(p, p0)).collect();
        let dir = row_space(&diffs);
        let d = dir.len();
        let perp = nullspace(&dir, n);
        if d == 0 {
            return Hull { dir, perp, facets: vec![] };
        }
        let facets = Hull::int_facets(n, d, pts, &perp).unwrap_or_else(|| Hull::rational_facets(n, d, pts, &perp));
        Hull { dir, perp, facets: facets.into_iter().map(|(k, u)| (u, k)).collect() }
    }

    /// Same search on integer coordinates (all points scaled by a common denominator).
    fn int_facets(n: usize, d: usize, pts: &[QVec], perp: &[QVec]) -> Option<BTreeMap<Vec<usize>, QVec>> {
        let mut l = BigInt::one();
        for p in pts {
            for x in p {
                l = l.lcm(x.denom());
            }
        }
        let ipts: Vec<IVec> = pts
            .iter()
            .map(|p| p.iter().map(|x| (x * &l).to_integer().to_i128()).collect::<Option<IVec>>())
            .collect::<Option<_>>()?;
        let iperp: Vec<IVec> = perp.iter().map(|v| int_vec(v)).collect::<Option<_>>()?;
        let mut facets: BTreeMap<Vec<usize>, QVec> = BTreeMap::new();
        for subset in (0..pts.len()).combinations(d) {
            if facets.keys().any(|f| subset.iter().all(|i| f.binary_search(i).is_ok())) {
                continue;
            }
            let base = &ipts[subset[0]];
            let mut rows: Vec<IVec> = Vec::with_capacity(n - 1);
            for &i in &subset[1..] {
                rows.push(ipts[i].iter().zip(base).map(|(a, b)| a.checked_sub(*b)).collect::<Option<IVec>>()?);
            }
            rows.extend(iperp.iter().cloned());
            let u = int_cross(&rows.iter().collect::<Vec<_>>(), n)?;
            if u.iter().all(|&x| x == 0) {
                continue;
            }
            let b = int_dot(&u, base)?;
            let mut vals = Vec::with_capacity(ipts.len());
            for p in &ipts {
                vals.push(int_dot(&u, p)?.checked_sub(b)?);
            }
            let pos = vals.iter().any(|&v| v > 0);
            let negs = vals.iter().any(|&v| v < 0);
            if pos && negs {
                continue;
            }
            let s = if pos { -1 } else { 1 };
            let on: Vec<usize> = (0..pts.len()).filter(|&i| vals[i] == 0).collect();
            let u: QVec = u.iter().map(|&x| Rational::from_integer((x * s).into())).collect();
            facets.insert(on, primitive(&u));
        }
        Some(facets)
    }

    fn rational_facets(n: usize, d: usize, pts: &[QVec], perp: &[QVec]) -> BTreeMap<Vec<usize>, QVec> {
        let mut facets: BTreeMap<Vec<usize>, QVec> = BTreeMap::new();
        for subset in (0..pts.len()).combinations(d) {
            if facets.keys().any(|f| subset.iter().all(|i| f.binary_search(i).is_ok())) {
                continue;
            }
            let base = &pts[subset[0]];
            let mut rows: Vec<QVec> = subset[1..].iter().map(|&i| sub(&pts[i], base)).collect();
            rows.extend(perp.iter().cloned());
            let ns = nullspace(&rows, n);
            if ns.len() != 1 {
                continue;
            }
            let u = &ns[0];
            let b = dot(u, base);
            let vals: Vec<Rational> = pts.iter().map(|p| dot(u, p) - &b).collect();
            let pos = vals.iter().any(Signed::is_positive);
            let negs = vals.iter().any(Signed::is_negative);
            if pos && negs {
                continue;
            }
            let u = if pos { neg(u) } else { u.clone() };
            let on: Vec<usize> = (0..pts.len()).filter(|&i| vals[i].is_zero()).collect();
            facets.insert(on, primitive(&u));
        }
        facets
    }

    fn is_vertex(&self, i: usize) -> bool {
        let normals: Vec<QVec> =
            self.facets.iter().filter(|(_, s)| s.contains(&i)).map(|(u, _)| u.clone()).collect();
        rank(&normals) == self.dir.len()
    }
}

fn check_dims(n: usize, pts: &[QVec]) -> Result<()> {
    match pts.iter().find(|p| p.len() != n) {
        Some(p) => Err(Error::DimensionMismatch { expected: n, got: p.len() }),
        None => Ok(()),
    }
}

impl Polytope {
    /// Convex hull of a finite point set, keeping only vertices.
    pub fn canonical_hull(n: usize, points: &[QVec]) -> Result<Polytope> {
        if points.is_empty() {
            return Err(Error::EmptyInput("no points".into()));
        }
        check_dims(n, points)?;
        let pts: Vec<QVec> =
            points.iter().cloned().sorted_by(|a, b| lex_cmp(a, b)).dedup().collect();
        let hull = Hull::compute(n, &pts);
        let vertices: Vec<QVec> = if hull.dir.is_empty() {
            pts
        } else {
            pts.iter().enumerate().filter(|(i, _)| hull.is_vertex(*i)).map(|(_, p)| p.clone()).collect()
        };
        Ok(Polytope { n, vertices, lattice: OnceLock::new() })
    }

    pub fn point(p: QVec) -> Polytope {
        Polytope { n: p.len(), vertices: vec![p], lattice: OnceLock::new() }
    }

    /// Axis-parallel box `[lo_1, hi_1] × … × [lo_n, hi_n]`.
    pub fn cuboid(lo: &[Rational], hi: &[Rational]) -> Result<Polytope> {
        let n = lo.len();
        check_dims(n, &[hi.to_vec()])?;
        let pts: Vec<QVec> = (0..1usize << n)
            .map(|mask| {
                (0..n).map(|i| if mask >> i & 1 == 1 { hi[i].clone() } else { lo[i].clone() }).collect()
            })
            .collect();
        Polytope::canonical_hull(n, &pts)
    }

    /// `conv{0, e_1, …, e_n}`.
    pub fn standard_simplex(n: usize) -> Polytope {
        let mut pts = vec![crate::linalg::zeros(n)];
        pts.extend((0..n).map(|i| crate::linalg::unit(n, i)));
        Polytope::canonical_hull(n, &pts).expect("valid simplex")
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> &[QVec] {
        &self.vertices
    }

    /// Dimension of the affine hull.
    pub fn dim(&self) -> usize {
        let p0 = &self.vertices[0];
        rank(&self.vertices.iter().skip(1).map(|p| sub(p, p0)).collect::<Vec<_>>())
    }

    pub fn translate(&self, t: &[Rational]) -> Result<Polytope> {
        check_dims(self.n, &[t.to_vec()])?;
        Ok(Polytope {
            n: self.n,
            vertices: self.vertices.iter().map(|p| add(p, t)).collect(),
            lattice: OnceLock::new(),
        })
    }

    /// `λP` for `λ > 0`.
    pub fn dilate(&self, lambda: &Rational) -> Result<Polytope> {
        if !lambda.is_positive() {
            return Err(Error::InvalidScale);
        }
        Ok(Polytope {
            n: self.n,
            vertices: self.vertices.iter().map(|p| scale(p, lambda)).collect(),
            lattice: OnceLock::new(),
        })
    }

    /// Image under the linear map with the given matrix rows.
    pub fn linear_image(&self, matrix: &[QVec]) -> Result<Polytope> {
        check_dims(self.n, matrix)?;
        let pts: Vec<QVec> = self
            .vertices
            .iter()
            .map(|p| matrix.iter().map(|row| dot(row, p)).collect())
            .collect();
        Polytope::canonical_hull(matrix.len(), &pts)
    }

    pub fn negate(&self) -> Polytope {
        let mut vertices: Vec<QVec> = self.vertices.iter().map(|p| neg(p)).collect();
        vertices.sort_by(|a, b| lex_cmp(a, b));
        Polytope { n: self.n, vertices, lattice: OnceLock::new() }
    }

    /// Translate with the lexicographically smallest vertex at the origin.
    pub fn normalized(&self) -> Polytope {
        let t = neg(&self.vertices[0]);
        self.translate(&t).expect("same dimension")
    }

    /// The face lattice, computed on first use.
    pub fn face_lattice(&self) -> Arc<FaceLattice> {
        self.lattice.get_or_init(|| Arc::new(build_lattice(self.n, &self.vertices))).clone()
    }

    /// Exact n-dimensional volume; zero for lower-dimensional polytopes.
    pub fn volume(&self) -> Rational {
        let lat = self.face_lattice();
        if lat.dim < self.n {
            return Rational::zero();
        }
        let top = lat.faces.last().expect("polytope face");
        top.v.top_coefficient().expect("top grade").abs()
    }

    /// Minkowski sum; candidate vertex sums are filtered through the normal fans first.
    pub fn minkowski_sum(&self, other: &Polytope) -> Result<Polytope> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n });
        }
        let (la, lb) = (self.face_lattice(), other.face_lattice());
        let mut candidates = Vec::new();
        for fa in la.faces_of_dim(0) {
            for fb in lb.faces_of_dim(0) {
                let c = fa.normal_cone.intersect(&fb.normal_cone)?;
                if c.dim() == self.n {
                    candidates.push(add(
                        &self.vertices[fa.vertex_indices[0]],
                        &other.vertices[fb.vertex_indices[0]],
                    ));
                }
            }
        }
        Polytope::canonical_hull(self.n, &candidates)
    }
}

fn build_lattice(n: usize, verts: &[QVec]) -> FaceLattice {
    let hull = Hull::compute(n, verts);
    let d = hull.dir.len();
    let mut sets: Vec<Vec<usize>> = if d == 0 {
        vec![vec![0]]
    } else {
        let facet_sets: Vec<Vec<usize>> = hull.facets.iter().map(|(_, s)| s.clone()).collect();
        let mut all = intersection_closure(&facet_sets);
        all.insert((0..verts.len()).collect());
        all.remove(&Vec::new());
        all.into_iter().collect()
    };
    let affine_dim = |s: &[usize]| {
        let p0 = &verts[s[0]];
        rank(&s[1..].iter().map(|&i| sub(&verts[i], p0)).collect::<Vec<_>>())
    };
    let dims: HashMap<Vec<usize>, usize> = sets.iter().map(|s| (s.clone(), affine_dim(s))).collect();
    sets.sort_by(|a, b| dims[a].cmp(&dims[b]).then_with(|| a.cmp(b)));

    let mut tri_memo: HashMap<Vec<usize>, Vec<Vec<usize>>> = HashMap::new();
    let faces = sets
        .iter()
        .map(|s| {
            let k = dims[s];
            let simplices = triangulate_face(s, &sets, &dims, &mut tri_memo);
            let first = simplices.iter().min().expect("nonempty triangulation").clone();
            let orientation_basis: Vec<QVec> =
                first[1..].iter().map(|&i| sub(&verts[i], &verts[first[0]])).collect();
            let v = face_kvector(n, verts, &simplices, &orientation_basis, k);

            let mut gens: Vec<QVec> = hull
                .facets
                .iter()
                .filter(|(_, fs)| s.iter().all(|i| fs.binary_search(i).is_ok()))
                .map(|(u, _)| u.clone())
                .collect();
            for p in &hull.perp {
                gens.push(p.clone());
                gens.push(neg(p));
            }
            let normal_cone = if k == n {
                Cone::zero(n)
            } else {
                Cone::from_generators(n, &gens).expect("dimensions match")
            };
            let normal_sign = if normal_cone.is_zero() {
                1
            } else {
                let mut m = orientation_basis.clone();
                m.extend(normal_cone.span().iter().cloned());
                sign(&det(&m))
            };
            debug_assert_ne!(normal_sign, 0);
            Face { dim: k, vertex_indices: s.clone(), orientation_basis, v, normal_cone, normal_sign }
        })
        .collect();
    FaceLattice { dim: d, faces, facets: hull.facets }
}

/// Pulling triangulation of a face from its smallest vertex; simplices are ascending index lists.
fn triangulate_face(
    face: &[usize],
    all: &[Vec<usize>],
    dims: &HashMap<Vec<usize>, usize>,
    memo: &mut HashMap<Vec<usize>, Vec<Vec<usize>>>,
) -> Vec<Vec<usize>> {
    if let Some(t) = memo.get(face) {
        return t.clone();
    }
    let k = dims[face];
    let out = if face.len() == k + 1 {
        vec![face.to_vec()]
    } else {
        let apex = face[0];
        let mut out = Vec::new();
        for g in all {
            if dims[g] + 1 != k || g.contains(&apex) || !g.iter().all(|i| face.contains(i)) {
                continue;
            }
            for s in triangulate_face(g, all, dims, memo) {
                let mut t = vec![apex];
                t.extend(s);
                out.push(t);
            }
        }
        out
    };
    memo.insert(face.to_vec(), out.clone());
    out
}

fn face_kvector(
    n: usize,
    verts: &[QVec],
    simplices: &[Vec<usize>],
    orientation_basis: &[QVec],
    k: usize,
) -> KVector {
    if k == 0 {
        return KVector::scalar(n, Rational::one());
    }
    let reference = KVector::simple_from_basis(n, orientation_basis).expect("dimensions match");
    let inv_fact = factorial(k).recip();
    let mut acc = KVector::zero(n, k);
    for s in simplices {
        let edges: Vec<QVec> = s[1..].iter().map(|&i| sub(&verts[i], &verts[s[0]])).collect();
        let w = KVector::simple_from_basis(n, &edges).expect("dimensions match").scale(&inv_fact);
        let w = if w.inner(&reference).is_negative() { w.neg() } else { w };
        acc = acc.add(&w).expect("same grade");
    }
    acc
}

#[derive(Serialize, Deserialize)]
struct PolytopeJson {
    dim: usize,
    #[serde(with = "serde_rational::vec2")]
    vertices: Vec<QVec>,
}

impl Serialize for Polytope {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolytopeJson { dim: self.n, vertices: self.vertices.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polytope {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = PolytopeJson::deserialize(d)?;
        Polytope::canonical_hull(raw.dim, &raw.vertices).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{from_ints, unit};
    use crate::rational::{q, qi};

    fn square() -> Polytope {
        Polytope::cuboid(&[qi(0), qi(0)], &[qi(1), qi(1)]).unwrap()
    }

    #[test]
    fn hull_drops_interior_points() {
        let pts = vec![
            from_ints(&[0, 0]),
            from_ints(&[1, 0]),
            from_ints(&[0, 1]),
            from_ints(&[1, 1]),
            vec![q(1, 2), q(1, 2)],
        ];
        let p = Polytope::canonical_hull(2, &pts).unwrap();
        assert_eq!(p.vertices().len(), 4);
        assert_eq!(p, square());
    }

    #[test]
    fn hull_edge_cases() {
        assert!(Polytope::canonical_hull(2, &[]).is_err());
        assert!(Polytope::canonical_hull(2, &[from_ints(&[1, 2, 3])]).is_err());
        let pt = Polytope::canonical_hull(2, &[from_ints(&[1, 2]), from_ints(&[1, 2])]).unwrap();
        assert_eq!(pt.vertices().len(), 1);
        let seg = Polytope::canonical_hull(
            3,
            &[from_ints(&[0, 0, 0]), from_ints(&[1, 1, 1]), from_ints(&[2, 2, 2])],
        )
        .unwrap();
        assert_eq!(seg.vertices().len(), 2);
    }

    #[test]
    fn square_lattice() {
        let lat = square().face_lattice();
        assert_eq!(lat.counts(), vec![4, 4, 1]);
        let top = lat.faces.last().unwrap();
        assert_eq!(top.v.top_coefficient().unwrap().abs(), qi(1));
        assert!(top.normal_cone.is_zero());
        // vertex (1,1) has normal cone spanned by e1, e2
        let idx = square().vertices().iter().position(|p| *p == from_ints(&[1, 1])).unwrap();
        let f = lat.faces_of_dim(0).find(|f| f.vertex_indices == vec![idx]).unwrap();
        assert_eq!(f.normal_cone, Cone::from_generators(2, &[unit(2, 0), unit(2, 1)]).unwrap());
    }

    #[test]
    fn simplex_lattice() {
        let lat = Polytope::standard_simplex(3).face_lattice();
        assert_eq!(lat.counts(), vec![4, 6, 4, 1]);
        assert_eq!(Polytope::standard_simplex(3).volume(), q(1, 6));
    }

    #[test]
    fn face_kvectors() {
        let seg = Polytope::canonical_hull(2, &[from_ints(&[0, 0]), from_ints(&[3, 4])]).unwrap();
        let edge = seg.face_lattice().faces_of_dim(1).next().unwrap().clone();
        assert_eq!(edge.v, KVector::from_vector(&from_ints(&[3, 4])));
        let tri = Polytope::canonical_hull(
            2,
            &[from_ints(&[0, 0]), from_ints(&[2, 0]), from_ints(&[0, 2])],
        )
        .unwrap();
        let top = tri.face_lattice().faces.last().unwrap().clone();
        // Vertices sort as (0,0), (0,2), (2,0), so the first simplex is negatively oriented.
        assert_eq!(top.v.top_coefficient().unwrap(), qi(-2));
        assert_eq!(top.orientation_basis, vec![from_ints(&[0, 2]), from_ints(&[2, 0])]);
    }

    #[test]
    fn segment_normal_cone_is_line() {
        let seg = Polytope::canonical_hull(2, &[from_ints(&[0, 0]), from_ints(&[1, 0])]).unwrap();
        let lat = seg.face_lattice();
        let edge = lat.faces_of_dim(1).next().unwrap();
        assert!(edge.normal_cone.is_subspace());
        assert_eq!(edge.normal_cone.span(), &[unit(2, 1)]);
    }

    #[test]
    fn cube_facet_normals_are_rays() {
        let cube = Polytope::cuboid(&[qi(0), qi(0), qi(0)], &[qi(1), qi(1), qi(1)]).unwrap();
        let lat = cube.face_lattice();
        assert_eq!(lat.counts(), vec![8, 12, 6, 1]);
        for f in lat.faces_of_dim(2) {
            assert_eq!(f.normal_cone.dim(), 1);
            assert_eq!(f.normal_cone.rays().len(), 1);
        }
        assert_eq!(cube.volume(), qi(1));
    }

    #[test]
    fn minkowski_examples() {
        let a = Polytope::canonical_hull(2, &[from_ints(&[0, 0]), from_ints(&[1, 0])]).unwrap();
        let b = Polytope::canonical_hull(2, &[from_ints(&[0, 0]), from_ints(&[0, 1])]).unwrap();
        assert_eq!(a.minkowski_sum(&b).unwrap(), square());
        let t = Polytope::standard_simplex(2);
        let hex = t.minkowski_sum(&t.negate()).unwrap();
        assert_eq!(hex.vertices().len(), 6);
        assert_eq!(hex.volume(), qi(3));
        let p = Polytope::point(from_ints(&[2, -1]));
        assert_eq!(square().minkowski_sum(&p).unwrap(), square().translate(&from_ints(&[2, -1])).unwrap());
    }

    #[test]
    fn normal_orientation_is_positive() {
        let lat = Polytope::standard_simplex(3).face_lattice();
        for f in &lat.faces {
            if let Some(nf) = f.oriented_normal() {
                let mut m = f.orientation_basis.clone();
                m.extend(nf.oriented_basis());
                assert!(det(&m).is_positive());
            }
        }
    }
}
