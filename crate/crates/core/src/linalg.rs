//! Exact linear algebra over the rationals.
//!
//! Vectors are plain `Vec<Rational>`; matrices are slices of row vectors.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::rational::{to_f64, Rational};

pub type QVec = Vec<Rational>;

pub fn zeros(n: usize) -> QVec {
    vec![Rational::zero(); n]
}

pub fn unit(n: usize, i: usize) -> QVec {
    let mut v = zeros(n);
    v[i] = Rational::one();
    v
}

pub fn from_ints(xs: &[i64]) -> QVec {
    xs.iter().map(|&x| Rational::from_integer(BigInt::from(x))).collect()
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = Rational::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc += x * y;
        }
    }
    acc
}

pub fn add(a: &[Rational], b: &[Rational]) -> QVec {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[Rational], b: &[Rational]) -> QVec {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(a: &[Rational], c: &Rational) -> QVec {
    a.iter().map(|x| x * c).collect()
}

pub fn neg(a: &[Rational]) -> QVec {
    a.iter().map(|x| -x).collect()
}

pub fn is_zero(a: &[Rational]) -> bool {
    a.iter().all(Zero::is_zero)
}

pub fn to_f64_vec(a: &[Rational]) -> Vec<f64> {
    a.iter().map(to_f64).collect()
}

/// Lexicographic comparison.
pub fn lex_cmp(a: &[Rational], b: &[Rational]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Positive multiple with coprime integer entries. Zero stays zero.
pub fn primitive(a: &[Rational]) -> QVec {
    if is_zero(a) {
        return a.to_vec();
    }
    let mut l = BigInt::one();
    for x in a {
        l = l.lcm(x.denom());
    }
    let ints: Vec<BigInt> = a.iter().map(|x| (x * &l).to_integer()).collect();
    let mut g = BigInt::zero();
    for x in &ints {
        g = g.gcd(x);
    }
    ints.into_iter()
        .map(|x| Rational::from_integer(x / &g))
        .collect()
}

/// Primitive vector whose first nonzero entry is positive.
pub fn primitive_line(a: &[Rational]) -> QVec {
    let p = primitive(a);
    match p.iter().find(|x| !x.is_zero()) {
        Some(x) if x.is_negative() => neg(&p),
        _ => p,
    }
}

/// Reduced row echelon form. Returns the nonzero rows and their pivot columns.
pub fn rref(rows: &[QVec]) -> (Vec<QVec>, Vec<usize>) {
    let mut m: Vec<QVec> = rows.to_vec();
    let ncols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    (m, pivots)
}

pub fn rank(rows: &[QVec]) -> usize {
    rref(rows).1.len()
}

/// Canonical basis of the row space (the nonzero rows of the RREF).
pub fn row_space(rows: &[QVec]) -> Vec<QVec> {
    rref(rows).0
}

/// Basis of `{x : <r, x> = 0 for every row r}` in `Q^n`, primitive vectors.
pub fn nullspace(rows: &[QVec], n: usize) -> Vec<QVec> {
    let (red, pivots) = rref(rows);
    let mut basis = Vec::new();
    for free in (0..n).filter(|c| !pivots.contains(c)) {
        let mut x = zeros(n);
        x[free] = Rational::one();
        for (row, &p) in red.iter().zip(&pivots) {
            x[p] = -row[free].clone();
        }
        basis.push(primitive(&x));
    }
    basis
}

/// Determinant of a square matrix given by rows.
pub fn det(m: &[QVec]) -> Rational {
    let n = m.len();
    if n == 0 {
        return Rational::one();
    }
    let mut a: Vec<QVec> = m.to_vec();
    let mut d = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        let piv = a[c][c].clone();
        d *= &piv;
        for i in c + 1..n {
            if a[i][c].is_zero() {
                continue;
            }
            let f = &a[i][c] / &piv;
            for j in c..n {
                let t = &f * &a[c][j];
                a[i][j] -= t;
            }
        }
    }
    d
}

/// Solves `sum_i y_i basis_i = x`; `None` if `x` is outside the span.
/// The basis must be linearly independent.
pub fn coordinates(basis: &[QVec], x: &[Rational]) -> Option<QVec> {
    let n = x.len();
    let k = basis.len();
    // Augmented system with columns = basis vectors.
    let rows: Vec<QVec> = (0..n)
        .map(|i| {
            let mut r: QVec = basis.iter().map(|b| b[i].clone()).collect();
            r.push(x[i].clone());
            r
        })
        .collect();
    let (red, pivots) = rref(&rows);
    if pivots.contains(&k) {
        return None;
    }
    let mut y = zeros(k);
    for (row, &p) in red.iter().zip(&pivots) {
        y[p] = row[k].clone();
    }
    Some(y)
}

/// Orthogonal projection of `x` onto the span of `basis` (any spanning set).
pub fn project(basis: &[QVec], x: &[Rational]) -> QVec {
    let b = row_space(basis);
    if b.is_empty() {
        return zeros(x.len());
    }
    // Solve the normal equations G y = B x.
    let k = b.len();
    let rows: Vec<QVec> = (0..k)
        .map(|i| {
            let mut r: QVec = (0..k).map(|j| dot(&b[i], &b[j])).collect();
            r.push(dot(&b[i], x));
            r
        })
        .collect();
    let (red, _) = rref(&rows);
    let mut out = zeros(x.len());
    for (i, row) in red.iter().enumerate() {
        let c = &row[k];
        for (o, bi) in out.iter_mut().zip(&b[i]) {
            *o += c * bi;
        }
    }
    out
}

/// `true` when `x` lies in the span of `basis`.
pub fn in_span(basis: &[QVec], x: &[Rational]) -> bool {
    let mut rows = basis.to_vec();
    let r = rank(&rows);
    rows.push(x.to_vec());
    rank(&rows) == r
}

/// Coordinates of `x` with respect to an RREF basis: its entries at the pivot columns.
pub fn rref_coords(pivots: &[usize], x: &[Rational]) -> QVec {
    pivots.iter().map(|&p| x[p].clone()).collect()
}

/// Pivot columns of an RREF basis.
pub fn pivots_of(rref_basis: &[QVec]) -> Vec<usize> {
    rref_basis
        .iter()
        .map(|r| r.iter().position(|x| !x.is_zero()).expect("nonzero rref row"))
        .collect()
}

/// Basis of the intersection of two subspaces given by spanning sets.
pub fn subspace_intersection(a: &[QVec], b: &[QVec], n: usize) -> Vec<QVec> {
    let mut eqs = nullspace(a, n);
    eqs.extend(nullspace(b, n));
    if eqs.is_empty() {
        return (0..n).map(|i| unit(n, i)).collect();
    }
    nullspace(&eqs, n)
}
