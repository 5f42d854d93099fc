//! Partial convolution of current representations and the Minkowski-sum check.

use std::time::Instant;

use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::cone::Cone;
use crate::current::{represent, t_equal, CValue, FaceCurrent, ValuationRep};
use crate::error::{Error, Result, TermId};
use crate::polytope::Polytope;
use crate::rational::{format_rational, to_f64, Rational};
use crate::spherical::{cone_intersection, faces_transversal, join_pair, SphericalPolytope};
use crate::volume::{sphere_volume, NumericConfig, VolumeEstimate};

/// A term with the data reused across pairs.
struct Prepared<'a> {
    id: TermId,
    flat: usize,
    fc: &'a FaceCurrent,
    faces: Vec<Cone>,
    antipode: SphericalPolytope,
}

fn prepare(rep: &ValuationRep) -> Vec<Prepared<'_>> {
    let mut out = Vec::new();
    for (k, comp) in rep.components().iter().enumerate() {
        for (i, fc) in comp.iter().enumerate() {
            out.push((k, i, fc));
        }
    }
    out.into_par_iter()
        .enumerate()
        .map(|(flat, (k, i, fc))| Prepared {
            id: (k, i),
            flat,
            fc,
            faces: fc.normal().cone().faces(),
            antipode: fc.normal().antipode(),
        })
        .collect()
}

fn pair_transversal(a: &Prepared, b: &Prepared) -> bool {
    let (ca, cb) = (a.fc.normal().cone(), b.fc.normal().cone());
    if ca.separated_from(cb) || ca.intersect(cb).is_ok_and(|c| c.is_zero()) {
        return true;
    }
    faces_transversal(&a.faces, &b.faces)
}

fn failing_pairs(pa: &[Prepared], pb: &[Prepared]) -> Vec<(TermId, TermId)> {
    let pairs: Vec<(&Prepared, &Prepared)> = pa.iter().flat_map(|a| pb.iter().map(move |b| (a, b))).collect();
    pairs
        .par_iter()
        .filter(|(a, b)| !pair_transversal(a, b))
        .map(|(a, b)| (a.id, b.id))
        .collect()
}

/// `true` iff every pair of terms has transversal normal polytopes.
pub fn transversal_reps(a: &ValuationRep, b: &ValuationRep) -> Result<bool> {
    Ok(transversal_witnesses(a, b)?.is_empty())
}

/// Term pairs whose normal polytopes are not transversal.
pub fn transversal_witnesses(a: &ValuationRep, b: &ValuationRep) -> Result<Vec<(TermId, TermId)>> {
    if a.ambient_dim() != b.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: a.ambient_dim(), got: b.ambient_dim() });
    }
    Ok(failing_pairs(&prepare(a), &prepare(b)))
}

/// Face pairs violating general position. Ids are `(face dimension, index)` as in
/// [`represent`]. Besides transversality, pairs with `dim F + dim G = n` and both
/// dimensions positive must have `span ň(F,P) ∩ n(G,Q) = {0}` and vice versa.
pub fn general_position_witnesses(p: &Polytope, q: &Polytope) -> Result<Vec<(TermId, TermId)>> {
    let n = p.ambient_dim();
    if q.ambient_dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: q.ambient_dim() });
    }
    let (ra, rb) = (represent(p), represent(q));
    Ok(witnesses_prepared(n, &prepare(&ra), &prepare(&rb)))
}

fn witnesses_prepared(n: usize, pa: &[Prepared], pb: &[Prepared]) -> Vec<(TermId, TermId)> {
    let mut bad = failing_pairs(pa, pb);
    let pairs: Vec<(&Prepared, &Prepared)> = pa
        .iter()
        .flat_map(|a| pb.iter().map(move |b| (a, b)))
        .filter(|(a, b)| a.id.0 >= 1 && b.id.0 >= 1 && a.id.0 + b.id.0 == n)
        .collect();
    let strong: Vec<(TermId, TermId)> = pairs
        .par_iter()
        .filter(|(a, b)| {
            let (ca, cb) = (a.fc.normal().cone(), b.fc.normal().cone());
            let meets = |x: &Cone, y: &Cone| !y.intersect_subspace(x.span()).is_ok_and(|c| c.is_zero());
            meets(ca, cb) || meets(cb, ca)
        })
        .map(|(a, b)| (a.id, b.id))
        .collect();
    bad.extend(strong);
    bad.sort();
    bad.dedup();
    bad
}

pub fn general_position(p: &Polytope, q: &Polytope) -> Result<bool> {
    Ok(general_position_witnesses(p, q)?.is_empty())
}

/// Outcome of [`convolve`].
#[derive(Clone, Debug, Serialize)]
pub struct ConvolutionReport {
    pub transversal: bool,
    pub result: Option<ValuationRep>,
    pub failing_pairs: Vec<(TermId, TermId)>,
    pub c_numeric_error: f64,
}

/// `M(x) * M(y)` on representations. Non-transversal inputs give a report
/// without a result; domain problems of the join volume are errors.
pub fn convolve(a: &ValuationRep, b: &ValuationRep, cfg: &NumericConfig) -> Result<ConvolutionReport> {
    let n = a.ambient_dim();
    if b.ambient_dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.ambient_dim() });
    }
    a.check_alpha()?;
    b.check_alpha()?;
    let (pa, pb) = (prepare(a), prepare(b));
    let failing = failing_pairs(&pa, &pb);
    convolve_prepared(a, b, &pa, &pb, failing, cfg)
}

fn convolve_prepared(
    a: &ValuationRep,
    b: &ValuationRep,
    pa: &[Prepared],
    pb: &[Prepared],
    failing: Vec<(TermId, TermId)>,
    cfg: &NumericConfig,
) -> Result<ConvolutionReport> {
    let n = a.ambient_dim();
    if !failing.is_empty() {
        return Ok(ConvolutionReport {
            transversal: false,
            result: None,
            failing_pairs: failing,
            c_numeric_error: 0.0,
        });
    }
    let pairs: Vec<(&Prepared, &Prepared)> = pa.iter().flat_map(|x| pb.iter().map(move |y| (x, y))).collect();

    let products: Vec<Result<Option<FaceCurrent>>> = pairs.par_iter().map(|(x, y)| t_product(x, y, n)).collect();
    let mut components = vec![vec![]; n];
    for p in products {
        if let Some(fc) = p? {
            components[fc.degree()].push(fc);
        }
    }

    let c_terms: Vec<Result<Option<(VolumeEstimate, f64)>>> =
        pairs.par_iter().map(|(x, y)| c_term(x, y, n, cfg)).collect();
    let norm = sphere_volume(n);
    let mut value = 0.0;
    let mut err = 0.0;
    let mut any = false;
    for t in c_terms {
        if let Some((v, coeff)) = t? {
            any = true;
            value += coeff * v.value / norm;
            err += (coeff * v.std_err / norm).abs();
        }
    }
    let mut c = b.c().scale(a.alpha()).add(&a.c().scale(b.alpha()));
    if any {
        c = c.add(&CValue::Approx { value, err });
    }
    let result = ValuationRep::new(n, components, c, a.alpha() * b.alpha())?;
    result.check_alpha()?;
    Ok(ConvolutionReport {
        transversal: true,
        c_numeric_error: result.c().err(),
        result: Some(result),
        failing_pairs: vec![],
    })
}

/// [`convolve`] with non-transversality turned into an error.
pub fn convolve_reps(a: &ValuationRep, b: &ValuationRep, cfg: &NumericConfig) -> Result<ValuationRep> {
    let report = convolve(a, b, cfg)?;
    report.result.ok_or(Error::NotTransversal { pairs: report.failing_pairs })
}

/// `A_{v1,N1} ∩ A_{v2,N2} = A_{v1∧v2, N1∩N2}`.
fn t_product(x: &Prepared, y: &Prepared, n: usize) -> Result<Option<FaceCurrent>> {
    let (k1, k2) = (x.id.0, y.id.0);
    let meet = cone_intersection(x.fc.normal(), y.fc.normal())
        .map_err(|_| Error::NotTransversal { pairs: vec![(x.id, y.id)] })?;
    if k1 + k2 >= n {
        if meet.is_some() || !x.fc.normal().cone().intersect(y.fc.normal().cone())?.is_zero() {
            return Err(Error::NotTransversal { pairs: vec![(x.id, y.id)] });
        }
        return Ok(None);
    }
    let Some(meet) = meet else {
        return Ok(None);
    };
    let v = x.fc.v().wedge(y.fc.v())?;
    if v.is_zero() {
        return Ok(None);
    }
    FaceCurrent::new(v, meet).map(Some)
}

/// `(−1)^{n+k} top(v1∧v2) · A(−N1, N2)` for `k = deg x`, `deg x + deg y = n`;
/// the caller divides by `vol(S^{n-1})`.
fn c_term(x: &Prepared, y: &Prepared, n: usize, cfg: &NumericConfig) -> Result<Option<(VolumeEstimate, f64)>> {
    let (k1, k2) = (x.id.0, y.id.0);
    if k1 == 0 || k2 == 0 || k1 + k2 != n {
        return Ok(None);
    }
    let top = x.fc.v().wedge(y.fc.v())?.top_coefficient()?;
    if top.is_zero() {
        return Ok(None);
    }
    let sign = if (n + k1).is_multiple_of(2) { 1.0 } else { -1.0 };
    let vol = join_pair(&x.antipode, y.fc.normal(), (x.flat, y.flat), cfg)?;
    Ok(Some((vol, sign * to_f64(&top))))
}

/// Outcome of [`verify_theorem`].
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub t_equal: bool,
    pub c_lhs: String,
    pub c_rhs: String,
    pub c_abs_err: f64,
    pub pairs_checked: usize,
    pub runtime_ms: u64,
}

impl VerificationReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.t_equal && self.c_abs_err <= tol
    }
}

/// Compares `M(P) * M(Q)` with `M(P + Q)`.
pub fn verify_theorem(p: &Polytope, q: &Polytope, cfg: &NumericConfig) -> Result<VerificationReport> {
    let start = Instant::now();
    let n = p.ambient_dim();
    if q.ambient_dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: q.ambient_dim() });
    }
    let (ra, rb) = (represent(p), represent(q));
    let (pa, pb) = (prepare(&ra), prepare(&rb));
    let witnesses = witnesses_prepared(n, &pa, &pb);
    if !witnesses.is_empty() {
        return Err(Error::NotInGeneralPosition { pairs: witnesses });
    }
    let lhs = convolve_prepared(&ra, &rb, &pa, &pb, vec![], cfg)?
        .result
        .expect("general position implies transversal");
    let sum = p.minkowski_sum(q)?;
    let rhs = represent(&sum);
    let exact = sum.volume();
    let c_abs_err = match lhs.c() {
        CValue::Exact(v) => to_f64(&(v - &exact)).abs(),
        c => (c.to_f64() - to_f64(&exact)).abs(),
    };
    Ok(VerificationReport {
        t_equal: t_equal(&lhs, &rhs)?,
        c_lhs: lhs.c().display(),
        c_rhs: format_rational(&exact),
        c_abs_err,
        pairs_checked: ra.term_count() * rb.term_count(),
        runtime_ms: start.elapsed().as_millis() as u64,
    })
}

/// Identity element `M([pt])` in dimension `n`.
pub fn identity(n: usize) -> ValuationRep {
    represent(&Polytope::point(vec![Rational::zero(); n]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::current::equals;
    use crate::linalg::from_ints;
    use crate::rational::{q, qi};

    fn seg(a: &[i64], b: &[i64]) -> Polytope {
        Polytope::canonical_hull(a.len(), &[from_ints(a), from_ints(b)]).unwrap()
    }

    fn hull(n: usize, pts: &[&[i64]]) -> Polytope {
        Polytope::canonical_hull(n, &pts.iter().map(|p| from_ints(p)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn orthogonal_segments() {
        let cfg = NumericConfig::default();
        let (a, b) = (seg(&[0, 0], &[1, 0]), seg(&[0, 0], &[0, 1]));
        assert!(general_position(&a, &b).unwrap());
        let r = verify_theorem(&a, &b, &cfg).unwrap();
        assert!(r.t_equal);
        assert!(r.c_abs_err < 1e-12, "{r:?}");
    }

    #[test]
    fn squares_are_not_in_general_position() {
        let sq = Polytope::cuboid(&[qi(0), qi(0)], &[qi(1), qi(1)]).unwrap();
        assert!(!general_position(&sq, &sq).unwrap());
        let r = represent(&sq);
        assert!(!transversal_reps(&r, &r).unwrap());
        let report = convolve(&r, &r, &NumericConfig::default()).unwrap();
        assert!(!report.transversal && report.result.is_none() && !report.failing_pairs.is_empty());
    }

    #[test]
    fn rotated_square() {
        let sq = Polytope::cuboid(&[qi(0), qi(0)], &[qi(1), qi(1)]).unwrap();
        let rot = sq.linear_image(&[vec![q(3, 5), q(4, 5)], vec![q(-4, 5), q(3, 5)]]).unwrap();
        assert!(general_position(&sq, &rot).unwrap());
        let r = verify_theorem(&sq, &rot, &NumericConfig::default()).unwrap();
        assert!(r.t_equal);
        assert!(r.c_abs_err < 1e-9, "{r:?}");
    }

    #[test]
    fn triangle_and_its_negative() {
        // Parallel edges: transversal, but outside general position.
        let cfg = NumericConfig::default();
        let t = hull(2, &[&[0, 0], &[1, 0], &[0, 1]]);
        let neg = t.negate();
        assert!(!general_position(&t, &neg).unwrap());
        let out = convolve_reps(&represent(&t), &represent(&neg), &cfg).unwrap();
        let hexagon = t.minkowski_sum(&neg).unwrap();
        assert_eq!(hexagon.vertices().len(), 6);
        assert!(t_equal(&out, &represent(&hexagon)).unwrap());
        assert!((out.c().to_f64() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn identity_is_neutral() {
        let cfg = NumericConfig::default();
        let p = hull(3, &[&[0, 0, 0], &[2, 0, 1], &[0, 3, 0], &[1, 1, 2]]);
        let rp = represent(&p);
        let out = convolve_reps(&identity(3), &rp, &cfg).unwrap();
        assert!(equals(&out, &rp, &cfg).unwrap());
        assert_eq!(out.c(), rp.c());
    }

    #[test]
    fn tetrahedron_and_cube() {
        let cfg = NumericConfig::default();
        let t = hull(3, &[&[0, 0, 0], &[3, 1, 0], &[1, 4, 1], &[0, 1, 5]]);
        let c = Polytope::cuboid(&[qi(0), qi(0), qi(0)], &[qi(1), qi(1), qi(1)]).unwrap();
        let c = c
            .linear_image(&[
                vec![q(3, 5), q(4, 5), qi(0)],
                vec![q(-4, 5), q(3, 5), qi(0)],
                vec![qi(0), qi(0), qi(1)],
            ])
            .unwrap()
            .linear_image(&[
                vec![qi(1), qi(0), qi(0)],
                vec![qi(0), q(5, 13), q(12, 13)],
                vec![qi(0), q(-12, 13), q(5, 13)],
            ])
            .unwrap();
        assert!(general_position(&t, &c).unwrap());
        let r = verify_theorem(&t, &c, &cfg).unwrap();
        assert!(r.t_equal);
        assert!(r.c_abs_err < 1e-8, "{r:?}");
    }
}
