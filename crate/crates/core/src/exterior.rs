//! Exterior powers of `Q^n` with sparse exact coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::QVec;
use crate::rational::{serde_rational, Rational};

/// An element of `Λ^k(Q^n)`, stored on the basis `e_{i1} ∧ … ∧ e_{ik}` with `i1 < … < ik`
/// (zero-based internally). Zero coefficients are never stored.
#[derive(Clone, Debug)]
pub struct KVector {
    dim: usize,
    grade: usize,
    terms: BTreeMap<Vec<usize>, Rational>,
}

impl PartialEq for KVector {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && ((self.is_zero() && other.is_zero())
                || (self.grade == other.grade && self.terms == other.terms))
    }
}

impl Eq for KVector {}

impl KVector {
    pub fn zero(dim: usize, grade: usize) -> Self {
        KVector { dim, grade, terms: BTreeMap::new() }
    }

    pub fn scalar(dim: usize, c: Rational) -> Self {
        let mut v = Self::zero(dim, 0);
        v.insert(vec![], c);
        v
    }

    /// Builds from `(indices, coefficient)` pairs; indices are zero-based and may be unsorted.
    pub fn from_terms(
        dim: usize,
        grade: usize,
        terms: impl IntoIterator<Item = (Vec<usize>, Rational)>,
    ) -> Result<Self> {
        if grade > dim {
            return Err(Error::GradeOutOfRange { grade, dim });
        }
        let mut v = Self::zero(dim, grade);
        for (idx, c) in terms {
            if idx.len() != grade || idx.iter().any(|&i| i >= dim) {
                return Err(Error::GradeOutOfRange { grade: idx.len(), dim });
            }
            if let Some((sorted, s)) = sort_with_sign(&idx) {
                v.insert(sorted, if s < 0 { -c } else { c });
            }
        }
        Ok(v)
    }

    /// The vector `x` as a 1-vector.
    pub fn from_vector(x: &[Rational]) -> Self {
        let mut v = Self::zero(x.len(), 1);
        for (i, c) in x.iter().enumerate() {
            v.insert(vec![i], c.clone());
        }
        v
    }

    fn insert(&mut self, idx: Vec<usize>, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(idx) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Nonzero coefficients keyed by sorted zero-based index tuples.
    pub fn terms(&self) -> &BTreeMap<Vec<usize>, Rational> {
        &self.terms
    }

    pub fn coeff(&self, idx: &[usize]) -> Rational {
        self.terms.get(idx).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn wedge(&self, other: &KVector) -> Result<KVector> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        let grade = self.grade + other.grade;
        if grade > self.dim {
            return Ok(KVector::zero(self.dim, self.dim));
        }
        let mut out = KVector::zero(self.dim, grade);
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                let Some(s) = merge_sign(a, b) else { continue };
                let mut idx = a.clone();
                idx.extend_from_slice(b);
                idx.sort_unstable();
                let c = x * y;
                out.insert(idx, if s < 0 { -c } else { c });
            }
        }
        Ok(out)
    }

    /// Coefficient on `e_1 ∧ … ∧ e_n`.
    pub fn top_coefficient(&self) -> Result<Rational> {
        if self.grade != self.dim {
            return Err(Error::GradeMismatch(self.grade, self.dim));
        }
        let top: Vec<usize> = (0..self.dim).collect();
        Ok(self.coeff(&top))
    }

    /// `v_1 ∧ … ∧ v_k`; the empty list gives the scalar 1.
    pub fn simple_from_basis(dim: usize, vectors: &[QVec]) -> Result<KVector> {
        if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
        }
        let mut acc = KVector::scalar(dim, Rational::one());
        for v in vectors {
            acc = acc.wedge(&KVector::from_vector(v))?;
        }
        if acc.is_zero() {
            acc.grade = vectors.len().min(dim);
        }
        Ok(acc)
    }

    pub fn scale(&self, c: &Rational) -> KVector {
        if c.is_zero() {
            return KVector::zero(self.dim, self.grade);
        }
        KVector {
            dim: self.dim,
            grade: self.grade,
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }

    pub fn neg(&self) -> KVector {
        self.scale(&-Rational::one())
    }

    pub fn add(&self, other: &KVector) -> Result<KVector> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.grade != other.grade {
            return Err(Error::GradeMismatch(self.grade, other.grade));
        }
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.insert(k.clone(), v.clone());
        }
        Ok(out)
    }

    /// Euclidean inner product on `Λ^k` (the basis `e_I` is orthonormal).
    pub fn inner(&self, other: &KVector) -> Rational {
        let mut acc = Rational::zero();
        for (k, v) in &self.terms {
            if let Some(w) = other.terms.get(k) {
                acc += v * w;
            }
        }
        acc
    }

    pub fn norm_squared(&self) -> Rational {
        self.inner(self)
    }

    /// `Some(c)` with `self = c * other`; `None` if not parallel or `other` is zero.
    pub fn ratio_to(&self, other: &KVector) -> Option<Rational> {
        let (k0, w0) = other.terms.iter().next()?;
        if self.is_zero() {
            return Some(Rational::zero());
        }
        if self.terms.len() != other.terms.len() {
            return None;
        }
        let c = self.coeff(k0) / w0;
        let ok = other
            .terms
            .iter()
            .all(|(k, w)| self.terms.get(k).is_some_and(|v| *v == w * &c));
        ok.then_some(c)
    }

    /// Positive multiple with coprime integer coefficients, leading coefficient positive.
    pub fn primitive(&self) -> KVector {
        let coeffs: Vec<Rational> = self.terms.values().cloned().collect();
        let p = crate::linalg::primitive_line(&coeffs);
        KVector {
            dim: self.dim,
            grade: self.grade,
            terms: self.terms.keys().cloned().zip(p).collect(),
        }
    }

    /// Sign of the first nonzero coefficient in index order (0 for the zero vector).
    pub fn leading_sign(&self) -> i32 {
        match self.terms.values().next() {
            None => 0,
            Some(c) if c.is_negative() => -1,
            Some(_) => 1,
        }
    }
}

/// Sorts indices and returns the permutation sign; `None` on a repeated index.
fn sort_with_sign(idx: &[usize]) -> Option<(Vec<usize>, i32)> {
    let mut v = idx.to_vec();
    let mut s = 1;
    for i in 0..v.len() {
        for j in 0..v.len() - 1 - i {
            if v[j] == v[j + 1] {
                return None;
            }
            if v[j] > v[j + 1] {
                v.swap(j, j + 1);
                s = -s;
            }
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((v, s))
}

/// Sign of the shuffle that sorts `a ++ b` for sorted `a`, `b`; `None` if they share an index.
fn merge_sign(a: &[usize], b: &[usize]) -> Option<i32> {
    let mut inversions = 0usize;
    for &i in a {
        for &j in b {
            if i == j {
                return None;
            }
            if i > j {
                inversions += 1;
            }
        }
    }
    Some(if inversions.is_multiple_of(2) { 1 } else { -1 })
}

impl fmt::Display for KVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}", crate::rational::format_rational(c))?;
            if !k.is_empty() {
                let names: Vec<String> = k.iter().map(|i| format!("e{}", i + 1)).collect();
                write!(f, "·{}", names.join("∧"))?;
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    idx: Vec<usize>,
    #[serde(with = "serde_rational")]
    coeff: Rational,
}

#[derive(Serialize, Deserialize)]
struct KVectorJson {
    dim: usize,
    grade: usize,
    terms: Vec<TermJson>,
}

impl Serialize for KVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        KVectorJson {
            dim: self.dim,
            grade: self.grade,
            terms: self
                .terms
                .iter()
                .map(|(k, c)| TermJson { idx: k.iter().map(|i| i + 1).collect(), coeff: c.clone() })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for KVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = KVectorJson::deserialize(d)?;
        let mut terms = Vec::with_capacity(raw.terms.len());
        for t in raw.terms {
            if t.idx.contains(&0) {
                return Err(D::Error::custom("k-vector indices are 1-based"));
            }
            terms.push((t.idx.iter().map(|i| i - 1).collect(), t.coeff));
        }
        KVector::from_terms(raw.dim, raw.grade, terms).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{from_ints, unit};
    use crate::rational::{q, qi};

    fn e(n: usize, i: usize) -> KVector {
        KVector::from_vector(&unit(n, i))
    }

    #[test]
    fn wedge_basis() {
        let w = e(2, 0).wedge(&e(2, 1)).unwrap();
        assert_eq!(w.top_coefficient().unwrap(), qi(1));
        let back = e(2, 1).wedge(&e(2, 0)).unwrap();
        assert_eq!(back.top_coefficient().unwrap(), qi(-1));
    }

    #[test]
    fn repeated_factor_vanishes() {
        let w = e(3, 0).wedge(&e(3, 1)).unwrap().wedge(&e(3, 0)).unwrap();
        assert!(w.is_zero());
        assert_eq!(w, KVector::zero(3, 0));
    }

    #[test]
    fn bilinear_expansion() {
        let a = KVector::from_vector(&from_ints(&[2, 3, 0]));
        let w = a.wedge(&e(3, 2)).unwrap();
        assert_eq!(w.coeff(&[0, 2]), qi(2));
        assert_eq!(w.coeff(&[1, 2]), qi(3));
        assert_eq!(w.terms().len(), 2);
    }

    #[test]
    fn top_coefficients() {
        let t = KVector::simple_from_basis(3, &[unit(3, 0), unit(3, 1), unit(3, 2)]).unwrap();
        assert_eq!(t.top_coefficient().unwrap(), qi(1));
        let h = KVector::from_terms(2, 2, [(vec![0, 1], q(-5, 2))]).unwrap();
        assert_eq!(h.top_coefficient().unwrap(), q(-5, 2));
        let s = KVector::from_vector(&from_ints(&[1, 1])).wedge(&e(2, 1)).unwrap();
        assert_eq!(s.top_coefficient().unwrap(), qi(1));
        assert!(e(3, 0).top_coefficient().is_err());
    }

    #[test]
    fn simple_from_frames() {
        let a = KVector::simple_from_basis(2, &[from_ints(&[1, 0]), from_ints(&[2, 0])]).unwrap();
        assert!(a.is_zero());
        let s = KVector::simple_from_basis(2, &[from_ints(&[3, 4])]).unwrap();
        assert_eq!(s.norm_squared(), qi(25));
        assert!(KVector::simple_from_basis(2, &[from_ints(&[1, 0, 0])]).is_err());
    }

    #[test]
    fn unsorted_terms_take_sign() {
        let v = KVector::from_terms(3, 2, [(vec![2, 0], qi(1))]).unwrap();
        assert_eq!(v.coeff(&[0, 2]), qi(-1));
        let z = KVector::from_terms(3, 2, [(vec![1, 1], qi(1))]).unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn ratio() {
        let w = KVector::from_vector(&from_ints(&[1, 2]));
        let v = w.scale(&q(-3, 2));
        assert_eq!(v.ratio_to(&w), Some(q(-3, 2)));
        assert_eq!(e(2, 0).ratio_to(&w), None);
    }

    #[test]
    fn json_round_trip() {
        let v = KVector::from_terms(3, 2, [(vec![0, 1], q(1, 2)), (vec![1, 2], qi(-3))]).unwrap();
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(
            s,
            r#"{"dim":3,"grade":2,"terms":[{"idx":[1,2],"coeff":"1/2"},{"idx":[2,3],"coeff":"-3"}]}"#
        );
        let back: KVector = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }
}
