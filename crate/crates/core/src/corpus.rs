//! Seeded random polytopes, maps and spherical simplices for the test suites.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cone::Cone;
use crate::convolution::general_position;
use crate::exterior::KVector;
use crate::linalg::{det, rank, QVec};
use crate::polytope::Polytope;
use crate::rational::{q, qi, Rational};
use crate::spherical::SphericalPolytope;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Segment,
    Triangle,
    Simplex,
    Box,
    Hull,
}

impl Kind {
    pub const ALL: [Kind; 5] = [Kind::Segment, Kind::Triangle, Kind::Simplex, Kind::Box, Kind::Hull];
}

/// Every random choice in the suites goes through one of these.
pub struct Corpus {
    rng: ChaCha8Rng,
}

impl Corpus {
    pub fn new(seed: u64) -> Corpus {
        Corpus { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn int(&mut self, lo: i64, hi: i64) -> i64 {
        self.rng.random_range(lo..=hi)
    }

    pub fn index(&mut self, len: usize) -> usize {
        self.rng.random_range(0..len)
    }

    /// Small rational, mostly integral.
    pub fn rational(&mut self, lo: i64, hi: i64) -> Rational {
        let den = [1, 1, 1, 2, 3][self.index(5)];
        q(self.int(lo * den, hi * den), den)
    }

    pub fn vector(&mut self, n: usize, lo: i64, hi: i64) -> QVec {
        (0..n).map(|_| self.rational(lo, hi)).collect()
    }

    fn nonzero_vector(&mut self, n: usize) -> QVec {
        loop {
            let v: QVec = (0..n).map(|_| qi(self.int(-4, 4))).collect();
            if v.iter().any(|x| !x.is_zero()) {
                return v;
            }
        }
    }

    /// Positive scale factor.
    pub fn scale(&mut self) -> Rational {
        q(self.int(1, 12), self.int(1, 5))
    }

    fn hull_of_dim(&mut self, n: usize, count: usize, dim: usize) -> Polytope {
        loop {
            let pts: Vec<QVec> = (0..count).map(|_| self.vector(n, -4, 4)).collect();
            if let Ok(p) = Polytope::canonical_hull(n, &pts) {
                if p.dim() == dim {
                    return p;
                }
            }
        }
    }

    pub fn polytope(&mut self, n: usize, kind: Kind) -> Polytope {
        match kind {
            Kind::Segment => self.hull_of_dim(n, 2, 1),
            Kind::Triangle => self.hull_of_dim(n, 3, 2.min(n)),
            Kind::Simplex => self.hull_of_dim(n, n + 1, n),
            Kind::Box => {
                let lo = self.vector(n, -3, 3);
                let hi: QVec = lo.iter().map(|x| x + self.scale()).collect();
                Polytope::cuboid(&lo, &hi).expect("lo < hi")
            }
            Kind::Hull => {
                let max = if n >= 4 { 7 } else { 10 };
                let count = self.rng.random_range(n + 2..=max);
                self.hull_of_dim(n, count, n)
            }
        }
    }

    pub fn any_polytope(&mut self, n: usize) -> Polytope {
        let kind = Kind::ALL[self.index(Kind::ALL.len())];
        self.polytope(n, kind)
    }

    /// Full-dimensional polytope (simplex, box or hull).
    pub fn solid(&mut self, n: usize) -> Polytope {
        let kind = [Kind::Simplex, Kind::Box, Kind::Hull][self.index(3)];
        self.polytope(n, kind)
    }

    /// Invertible integer matrix with small entries.
    pub fn generic_matrix(&mut self, n: usize) -> Vec<QVec> {
        loop {
            let m: Vec<QVec> = (0..n).map(|_| (0..n).map(|_| qi(self.int(-3, 3))).collect()).collect();
            if !det(&m).is_zero() {
                return m;
            }
        }
    }

    /// Integer matrix of determinant ±1: a signed permutation times a few row operations.
    pub fn unimodular(&mut self, n: usize) -> Vec<QVec> {
        let mut m: Vec<QVec> = (0..n)
            .map(|i| {
                let mut r = vec![Rational::zero(); n];
                r[i] = if self.rng.random_bool(0.5) { Rational::one() } else { -Rational::one() };
                r
            })
            .collect();
        for i in (1..n).rev() {
            let j = self.index(i + 1);
            m.swap(i, j);
        }
        for _ in 0..n + 1 {
            let (i, j) = (self.index(n), self.index(n));
            if i == j {
                continue;
            }
            let c = qi(self.int(-2, 2));
            let row: QVec = m[i].iter().zip(&m[j]).map(|(a, b)| a + &c * b).collect();
            m[i] = row;
        }
        m
    }

    /// `(P, Q)` in general position: `Q` is pushed through random invertible maps until it is.
    pub fn generic_pair(&mut self, n: usize, a: Kind, b: Kind) -> (Polytope, Polytope) {
        loop {
            let p = self.polytope(n, a);
            let q0 = self.polytope(n, b);
            for _ in 0..8 {
                let m = self.generic_matrix(n);
                let q = q0.linear_image(&m).expect("square matrix");
                if general_position(&p, &q).expect("same dimension") {
                    return (p, q);
                }
            }
        }
    }

    /// Simplicial cone on `d` random generators, as an oriented spherical
    /// polytope of dimension `d − 1` with random orientation.
    pub fn spherical_simplex(&mut self, n: usize, d: usize) -> SphericalPolytope {
        loop {
            let gens: Vec<QVec> = (0..d).map(|_| self.nonzero_vector(n)).collect();
            if rank(&gens) != d {
                continue;
            }
            let cone = Cone::from_generators(n, &gens).expect("dimensions match");
            let sign = if self.rng.random_bool(0.5) { 1 } else { -1 };
            return SphericalPolytope::new(cone, sign);
        }
    }

    /// Random covector in `Λ^k`, paired through the standard inner product.
    pub fn covector(&mut self, n: usize, k: usize) -> KVector {
        use itertools::Itertools;
        let terms: Vec<(Vec<usize>, Rational)> =
            (0..n).combinations(k).map(|idx| (idx, qi(self.int(-5, 5)))).collect();
        KVector::from_terms(n, k, terms).expect("k <= n")
    }
}
