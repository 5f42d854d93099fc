//! Formal combinations of polytope classes, with equality decided through [`represent`].

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::current::{equals, first_difference, represent, CValue, RepDiff, ValuationRep};
use crate::error::{Error, Result};
use crate::polytope::Polytope;
use crate::rational::{serde_rational, Rational};
use crate::volume::NumericConfig;

/// `Σ c_i [P_i]` with every `P_i` translated so its smallest vertex is the origin.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiElement {
    n: usize,
    terms: Vec<(Rational, Polytope)>,
}

impl PiElement {
    pub fn zero(n: usize) -> PiElement {
        PiElement { n, terms: vec![] }
    }

    /// The unit `[pt]`.
    pub fn one(n: usize) -> PiElement {
        PiElement::from_polytope(&Polytope::point(vec![Rational::zero(); n]))
    }

    pub fn from_polytope(p: &Polytope) -> PiElement {
        let mut x = PiElement::zero(p.ambient_dim());
        x.push(Rational::one(), p);
        x
    }

    pub fn from_terms(n: usize, terms: Vec<(Rational, Polytope)>) -> Result<PiElement> {
        let mut x = PiElement::zero(n);
        for (c, p) in terms {
            if p.ambient_dim() != n {
                return Err(Error::DimensionMismatch { expected: n, got: p.ambient_dim() });
            }
            x.push(c, &p);
        }
        Ok(x)
    }

    fn push(&mut self, c: Rational, p: &Polytope) {
        let p = p.normalized();
        match self.terms.iter().position(|(_, q)| *q == p) {
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

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(Rational, Polytope)] {
        &self.terms
    }

    fn check_dim(&self, other: &PiElement) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n });
        }
        Ok(())
    }

    pub fn add(&self, other: &PiElement) -> Result<PiElement> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (c, p) in &other.terms {
            out.push(c.clone(), p);
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> PiElement {
        let mut out = PiElement::zero(self.n);
        for (d, p) in &self.terms {
            out.push(d * c, p);
        }
        out
    }

    pub fn neg(&self) -> PiElement {
        self.scale(&-Rational::one())
    }

    pub fn sub(&self, other: &PiElement) -> Result<PiElement> {
        self.add(&other.neg())
    }

    /// `[P]·[Q] = [P + Q]`, extended bilinearly.
    pub fn product(&self, other: &PiElement) -> Result<PiElement> {
        self.check_dim(other)?;
        let pairs: Vec<(&(Rational, Polytope), &(Rational, Polytope))> =
            self.terms.iter().flat_map(|a| other.terms.iter().map(move |b| (a, b))).collect();
        let sums: Vec<Result<(Rational, Polytope)>> =
            pairs.par_iter().map(|((c, p), (d, q))| Ok((c * d, p.minkowski_sum(q)?))).collect();
        let mut out = PiElement::zero(self.n);
        for s in sums {
            let (c, p) = s?;
            out.push(c, &p);
        }
        Ok(out)
    }

    /// `Δ(λ)`: every polytope replaced by `λP`.
    pub fn dilate(&self, lambda: &Rational) -> Result<PiElement> {
        let mut out = PiElement::zero(self.n);
        for (c, p) in &self.terms {
            out.push(c.clone(), &p.dilate(lambda)?);
        }
        Ok(out)
    }
}

/// `Σ c_i E(M[P_i])`.
pub fn embed(x: &PiElement) -> ValuationRep {
    let reps: Vec<ValuationRep> = x.terms.par_iter().map(|(c, p)| represent(p).scale(c)).collect();
    reps.iter()
        .try_fold(ValuationRep::zero(x.n), |acc, r| acc.add(r))
        .expect("terms share the ambient dimension")
}

pub fn equal_in_pi(x: &PiElement, y: &PiElement, cfg: &NumericConfig) -> Result<bool> {
    x.check_dim(y)?;
    equals(&embed(x), &embed(y), cfg)
}

/// First difference between `embed(x)` and `embed(y)`, if any.
pub fn pi_difference(x: &PiElement, y: &PiElement, cfg: &NumericConfig) -> Result<Option<RepDiff>> {
    x.check_dim(y)?;
    first_difference(&embed(x), &embed(y), cfg)
}

/// The weight-`k` part of `embed(x)`: the face-dimension-`k` terms for `k < n`
/// (with alpha kept for `k = 0`), or the volume coefficient alone for `k = n`.
pub fn weight_component(x: &PiElement, k: usize) -> Result<ValuationRep> {
    weight_slice(&embed(x), k)
}

/// Same as [`weight_component`] on a representation.
pub fn weight_slice(rep: &ValuationRep, k: usize) -> Result<ValuationRep> {
    let n = rep.ambient_dim();
    if k > n {
        return Err(Error::GradeOutOfRange { grade: k, dim: n });
    }
    let mut components = vec![vec![]; n];
    let mut c = CValue::zero();
    let mut alpha = Rational::zero();
    if k == n {
        c = rep.c().clone();
    } else {
        components[k] = rep.component(k).to_vec();
        if k == 0 {
            alpha = rep.alpha().clone();
        }
    }
    ValuationRep::new(n, components, c, alpha)
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    #[serde(with = "serde_rational")]
    coeff: Rational,
    polytope: Polytope,
}

#[derive(Serialize, Deserialize)]
struct PiJson {
    dim: usize,
    terms: Vec<TermJson>,
}

impl Serialize for PiElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PiJson {
            dim: self.n,
            terms: self
                .terms
                .iter()
                .map(|(c, p)| TermJson { coeff: c.clone(), polytope: p.clone() })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PiElement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = PiJson::deserialize(d)?;
        PiElement::from_terms(raw.dim, raw.terms.into_iter().map(|t| (t.coeff, t.polytope)).collect())
            .map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::from_ints;
    use crate::rational::{q, qi};

    fn boxp(lo: &[i64], hi: &[i64]) -> Polytope {
        let lo: Vec<Rational> = lo.iter().map(|&x| qi(x)).collect();
        let hi: Vec<Rational> = hi.iter().map(|&x| qi(x)).collect();
        Polytope::cuboid(&lo, &hi).unwrap()
    }

    fn seg(a: &[i64], b: &[i64]) -> Polytope {
        Polytope::canonical_hull(a.len(), &[from_ints(a), from_ints(b)]).unwrap()
    }

    #[test]
    fn product_of_segments_is_square() {
        let x = PiElement::from_polytope(&seg(&[0, 0], &[1, 0]));
        let y = PiElement::from_polytope(&seg(&[0, 0], &[0, 1]));
        assert_eq!(x.product(&y).unwrap(), PiElement::from_polytope(&boxp(&[0, 0], &[1, 1])));
    }

    #[test]
    fn unit_and_translation() {
        let cfg = NumericConfig::default();
        let t = Polytope::standard_simplex(2);
        let x = PiElement::from_polytope(&t).add(&PiElement::from_polytope(&t.negate())).unwrap();
        assert!(equal_in_pi(&x.product(&PiElement::one(2)).unwrap(), &x, &cfg).unwrap());
        let moved = PiElement::from_polytope(&t.translate(&[q(2, 3), qi(5)]).unwrap());
        assert_eq!(moved, PiElement::from_polytope(&t));
    }

    #[test]
    fn inclusion_exclusion() {
        let cfg = NumericConfig::default();
        let big = PiElement::from_polytope(&boxp(&[0, 0], &[2, 1]));
        let parts = PiElement::from_terms(
            2,
            vec![
                (qi(1), boxp(&[0, 0], &[1, 1])),
                (qi(1), boxp(&[1, 0], &[2, 1])),
                (qi(-1), seg(&[1, 0], &[1, 1])),
            ],
        )
        .unwrap();
        assert!(equal_in_pi(&big, &parts, &cfg).unwrap());
        let tri = PiElement::from_polytope(&Polytope::standard_simplex(2));
        assert!(!equal_in_pi(&PiElement::from_polytope(&boxp(&[0, 0], &[1, 1])), &tri, &cfg).unwrap());
    }

    #[test]
    fn embed_is_linear() {
        let p = Polytope::standard_simplex(3);
        let two = PiElement::from_polytope(&p).scale(&qi(2));
        assert_eq!(embed(&two), represent(&p).scale(&qi(2)));
    }

    #[test]
    fn weight_slices() {
        let cfg = NumericConfig::default();
        let pt = PiElement::one(2);
        assert_eq!(weight_component(&pt, 0).unwrap(), embed(&pt));
        assert_eq!(weight_component(&pt, 1).unwrap().term_count(), 0);
        let sq = PiElement::from_polytope(&boxp(&[0, 0], &[1, 1]));
        assert_eq!(weight_component(&sq, 2).unwrap().c(), &CValue::Exact(qi(1)));
        let lam = q(7, 4);
        for k in 0..=2 {
            let scaled = weight_component(&sq.dilate(&lam).unwrap(), k).unwrap();
            let pow = (0..k).fold(qi(1), |acc, _| acc * &lam);
            let expected = weight_component(&sq, k).unwrap().scale(&pow);
            assert!(equals(&scaled, &expected, &cfg).unwrap());
        }
        assert!(weight_component(&sq, 3).is_err());
    }

    #[test]
    fn json_round_trip() {
        let x = PiElement::from_terms(2, vec![(q(1, 2), boxp(&[0, 0], &[1, 2])), (qi(-3), seg(&[0, 0], &[1, 1]))])
            .unwrap();
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(serde_json::from_str::<PiElement>(&s).unwrap(), x);
    }
}
