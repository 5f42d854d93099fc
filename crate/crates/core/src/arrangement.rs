//! Cells of central hyperplane arrangements, with exact interior witnesses.
//!
//! Lines of the arrangement are intersections of `m - 1` hyperplanes; every
//! cell of an essential arrangement has a ray of this kind on its boundary, so
//! cells are found by stepping off each signed line into the cells of the
//! local arrangement at that line. The search runs in checked `i128` and
//! falls back to rationals on overflow.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::linalg::{dot, is_zero, nullspace, primitive, primitive_line, row_space, scale, QVec};
use crate::rational::Rational;

pub type IVec = Vec<i128>;

/// Sign of `<a, x>` for every normal.
pub fn sign_vector(normals: &[QVec], x: &[Rational]) -> Vec<i8> {
    normals.iter().map(|a| sign_i8(&dot(a, x))).collect()
}

fn sign_i8(s: &Rational) -> i8 {
    if s.is_positive() {
        1
    } else if s.is_negative() {
        -1
    } else {
        0
    }
}

/// Positive multiple of `a` with coprime integer entries, if it fits in `i128`.
pub fn int_vec(a: &[Rational]) -> Option<IVec> {
    primitive(a).iter().map(|x| x.numer().to_i128()).collect()
}

pub fn int_to_rational(a: &[i128]) -> QVec {
    a.iter().map(|&x| Rational::from_integer(x.into())).collect()
}

/// Checked integer inner product.
pub fn int_dot(a: &[i128], b: &[i128]) -> Option<i128> {
    a.iter().zip(b).try_fold(0i128, |acc, (x, y)| acc.checked_add(x.checked_mul(*y)?))
}

/// One interior point per full-dimensional cell of the central arrangement
/// `{a^⊥ : a in normals}` in `Q^m`, ordered by sign vector.
pub fn cell_witnesses(normals: &[QVec], m: usize) -> Vec<QVec> {
    let ints: Option<Vec<IVec>> = normals.iter().filter(|a| !is_zero(a)).map(|a| int_vec(a)).collect();
    if let Some(hs) = ints {
        let hs = dedup_int(&hs);
        if let Some(ws) = int_witnesses(&hs, m) {
            let mut cells: BTreeMap<Vec<i8>, IVec> = BTreeMap::new();
            let mut ok = true;
            for w in ws {
                let Some(sv) = hs.iter().map(|a| int_dot(a, &w).map(|s| s.signum() as i8)).collect::<Option<Vec<i8>>>()
                else {
                    ok = false;
                    break;
                };
                cells.entry(sv).or_insert(w);
            }
            if ok {
                return cells.into_values().map(|w| int_to_rational(&w)).collect();
            }
        }
    }
    rational_cell_witnesses(normals, m)
}

fn dedup_int(hs: &[IVec]) -> Vec<IVec> {
    hs.iter()
        .filter(|a| a.iter().any(|&x| x != 0))
        .map(|a| int_primitive_line(a))
        .sorted()
        .dedup()
        .collect()
}

fn int_primitive_line(a: &[i128]) -> IVec {
    let g = a.iter().fold(0i128, |g, &x| g.gcd(&x));
    let s = a.iter().find(|&&x| x != 0).map_or(1, |x| x.signum());
    a.iter().map(|&x| x / g * s).collect()
}

/// Rank of rational rows through the integer elimination; `None` on overflow.
pub fn int_rank(rows: &[QVec]) -> Option<usize> {
    let Some(m) = rows.first().map(Vec::len) else {
        return Some(0);
    };
    let ints: Vec<IVec> = rows.iter().map(|r| int_vec(r)).collect::<Option<_>>()?;
    Some(int_pivots(&ints, m)?.len())
}

/// Rank and pivot columns by fraction-free elimination.
fn int_pivots(rows: &[IVec], m: usize) -> Option<Vec<usize>> {
    let mut a: Vec<IVec> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..m {
        let Some(p) = (r..a.len()).find(|&i| a[i][c] != 0) else {
            continue;
        };
        a.swap(r, p);
        for i in r + 1..a.len() {
            if a[i][c] == 0 {
                continue;
            }
            let (x, y) = (a[r][c], a[i][c]);
            let mut row = Vec::with_capacity(m);
            for j in 0..m {
                row.push(a[i][j].checked_mul(x)?.checked_sub(a[r][j].checked_mul(y)?)?);
            }
            let g = row.iter().fold(0i128, |g, &v| g.gcd(&v));
            a[i] = if g > 1 { row.iter().map(|v| v / g).collect() } else { row };
        }
        pivots.push(c);
        r += 1;
        if r == a.len() {
            break;
        }
    }
    Some(pivots)
}

fn int_det(m: &[IVec]) -> Option<i128> {
    match m.len() {
        0 => Some(1),
        1 => Some(m[0][0]),
        2 => m[0][0].checked_mul(m[1][1])?.checked_sub(m[0][1].checked_mul(m[1][0])?),
        k => {
            let mut acc = 0i128;
            for j in 0..k {
                if m[0][j] == 0 {
                    continue;
                }
                let minor: Vec<IVec> =
                    m[1..].iter().map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, v)| *v).collect()).collect();
                let t = m[0][j].checked_mul(int_det(&minor)?)?;
                acc = if j % 2 == 0 { acc.checked_add(t)? } else { acc.checked_sub(t)? };
            }
            Some(acc)
        }
    }
}

/// Common null vector of `m - 1` rows in `Z^m` (signed maximal minors); zero if dependent.
pub(crate) fn int_cross(rows: &[&IVec], m: usize) -> Option<IVec> {
    (0..m)
        .map(|j| {
            let minor: Vec<IVec> =
                rows.iter().map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, v)| *v).collect()).collect();
            let d = int_det(&minor)?;
            Some(if j % 2 == 0 { d } else { d.checked_neg()? })
        })
        .collect()
}

fn int_witnesses(hs: &[IVec], m: usize) -> Option<Vec<IVec>> {
    if m == 0 {
        return Some(vec![vec![]]);
    }
    if hs.is_empty() {
        let mut e = vec![0; m];
        e[0] = 1;
        return Some(vec![e]);
    }
    let pivots = int_pivots(hs, m)?;
    if pivots.len() < m {
        // The coordinate subspace on the pivot columns is a complement of the lineality.
        let local: Vec<IVec> = hs.iter().map(|a| pivots.iter().map(|&c| a[c]).collect()).collect();
        let ws = int_witnesses(&dedup_int(&local), pivots.len())?;
        return Some(
            ws.into_iter()
                .map(|y| {
                    let mut x = vec![0; m];
                    for (c, v) in pivots.iter().zip(y) {
                        x[*c] = v;
                    }
                    x
                })
                .collect(),
        );
    }
    if m == 1 {
        return Some(vec![vec![1], vec![-1]]);
    }

    let mut lines: BTreeSet<IVec> = BTreeSet::new();
    for subset in hs.iter().combinations(m - 1) {
        let r = int_cross(&subset, m)?;
        if r.iter().any(|&x| x != 0) {
            lines.insert(int_primitive_line(&r));
        }
    }

    let mut out = Vec::new();
    for line in &lines {
        let pivot = line.iter().position(|&x| x != 0).expect("nonzero line");
        let mut on = Vec::new();
        let mut off = Vec::new();
        for a in hs {
            let ar = int_dot(a, line)?;
            if ar == 0 {
                on.push(a.iter().enumerate().filter(|(i, _)| *i != pivot).map(|(_, x)| *x).collect::<IVec>());
            } else {
                off.push((a, ar.abs()));
            }
        }
        let local_cells = int_witnesses(&dedup_int(&on), m - 1)?;
        for w in &local_cells {
            let mut w_full = w.clone();
            w_full.insert(pivot, 0);
            // Stretch along the line until no hyperplane off the line is crossed.
            let mut k = 1i128;
            for (a, ar) in &off {
                let aw = int_dot(a, &w_full)?.abs();
                k = k.max(aw / ar + 1);
            }
            for s in [1i128, -1] {
                let x: IVec = line
                    .iter()
                    .zip(&w_full)
                    .map(|(r, w)| r.checked_mul(k)?.checked_mul(s)?.checked_add(*w))
                    .collect::<Option<IVec>>()?;
                let g = x.iter().fold(0i128, |g, &v| g.gcd(&v));
                out.push(x.into_iter().map(|v| v / g).collect());
            }
        }
    }
    Some(out)
}

/// Exact rational version of the same search.
fn rational_cell_witnesses(normals: &[QVec], m: usize) -> Vec<QVec> {
    let hs = dedup_lines(normals);
    let mut cells: BTreeMap<Vec<i8>, QVec> = BTreeMap::new();
    for w in witnesses(&hs, m) {
        cells.entry(sign_vector(&hs, &w)).or_insert(w);
    }
    cells.into_values().collect()
}

fn witnesses(hs: &[QVec], m: usize) -> Vec<QVec> {
    if m == 0 {
        return vec![vec![]];
    }
    if hs.is_empty() {
        let mut e = vec![Rational::zero(); m];
        e[0] = Rational::one();
        return vec![e];
    }
    let basis = row_space(hs);
    let r = basis.len();
    if r < m {
        // Work in the row space; the lineality directions do not change any sign.
        let local: Vec<QVec> = hs.iter().map(|a| basis.iter().map(|b| dot(a, b)).collect()).collect();
        return witnesses(&dedup_lines(&local), r)
            .into_iter()
            .map(|y| {
                let mut x = vec![Rational::zero(); m];
                for (c, b) in y.iter().zip(&basis) {
                    for (xi, bi) in x.iter_mut().zip(b) {
                        *xi += c * bi;
                    }
                }
                x
            })
            .collect();
    }
    if m == 1 {
        return vec![vec![Rational::one()], vec![-Rational::one()]];
    }

    let mut lines: BTreeSet<QVec> = BTreeSet::new();
    for subset in hs.iter().combinations(m - 1) {
        let rows: Vec<QVec> = subset.into_iter().cloned().collect();
        let ns = nullspace(&rows, m);
        if ns.len() == 1 {
            lines.insert(primitive_line(&ns[0]));
        }
    }

    let mut out = Vec::new();
    for line in &lines {
        let pivot = line.iter().position(|x| !x.is_zero()).expect("nonzero line");
        let local: Vec<QVec> = hs
            .iter()
            .filter(|a| dot(a, line).is_zero())
            .map(|a| a.iter().enumerate().filter(|(i, _)| *i != pivot).map(|(_, x)| x.clone()).collect())
            .collect();
        let local_cells = witnesses(&dedup_lines(&local), m - 1);
        for s in [Rational::one(), -Rational::one()] {
            let r = scale(line, &s);
            for w in &local_cells {
                let mut w_full = w.clone();
                w_full.insert(pivot, Rational::zero());
                let mut eps = Rational::one();
                for a in hs {
                    let ar = dot(a, &r);
                    let aw = dot(a, &w_full);
                    if !ar.is_zero() && !aw.is_zero() {
                        let bound = ar.abs() / (aw.abs() * Rational::from_integer(2.into()));
                        if bound < eps {
                            eps = bound;
                        }
                    }
                }
                out.push(r.iter().zip(&w_full).map(|(x, y)| x + &eps * y).collect());
            }
        }
    }
    out
}

fn dedup_lines(hs: &[QVec]) -> Vec<QVec> {
    hs.iter().filter(|a| !is_zero(a)).map(|a| primitive_line(a)).sorted().dedup().collect()
}
