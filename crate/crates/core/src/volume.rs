//! Numeric solid angles of simplicial cones.
//!
//! Closed forms handle `n <= 3`. For `n >= 4` there are two engines: a
//! deterministic cubature (recursive bisection plus a gnomonic Gauss rule) and
//! seeded Monte Carlo.

use std::f64::consts::PI;
use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::linalg::{nullspace, to_f64_vec, QVec};

/// How spherical volumes are computed for `n >= 4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum VolumeEngine {
    /// Closed forms for `n <= 3`, cubature above.
    #[default]
    Auto,
    /// Closed forms for `n <= 3`, Monte Carlo above.
    MonteCarlo,
    /// Cubature in every dimension `>= 3`.
    Cubature,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumericConfig {
    pub tol: f64,
    pub mc_samples: u64,
    pub seed: u64,
    #[serde(default)]
    pub engine: VolumeEngine,
}

impl Default for NumericConfig {
    fn default() -> Self {
        NumericConfig { tol: 1e-9, mc_samples: 2_000_000, seed: 42, engine: VolumeEngine::Auto }
    }
}

impl NumericConfig {
    /// Default tolerance for ambient dimension `n`.
    pub fn for_dim(n: usize) -> Self {
        NumericConfig { tol: if n <= 3 { 1e-9 } else { 1e-3 }, ..Default::default() }
    }
}

/// A volume with an error estimate. `warning` is set when a Monte Carlo
/// standard error exceeds the configured tolerance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub value: f64,
    pub std_err: f64,
    pub warning: bool,
}

impl VolumeEstimate {
    pub fn exact(value: f64) -> Self {
        VolumeEstimate { value, std_err: 0.0, warning: false }
    }

    pub fn scaled(self, c: f64) -> Self {
        VolumeEstimate { value: c * self.value, std_err: c.abs() * self.std_err, warning: self.warning }
    }

    /// Sum with independent errors added in quadrature.
    pub fn plus(self, o: Self) -> Self {
        VolumeEstimate {
            value: self.value + o.value,
            std_err: (self.std_err * self.std_err + o.std_err * o.std_err).sqrt(),
            warning: self.warning || o.warning,
        }
    }
}

/// `vol_{n-1}(S^{n-1}) = 2 π^{n/2} / Γ(n/2)`.
pub fn sphere_volume(n: usize) -> f64 {
    match n {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI / (n as f64 - 2.0) * sphere_volume(n - 2),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normalized(a: &[f64]) -> Vec<f64> {
    let r = norm(a);
    a.iter().map(|x| x / r).collect()
}

/// Angle between two vectors.
pub fn angle(a: &[f64], b: &[f64]) -> f64 {
    let c = dot(a, b);
    let s = (dot(a, a) * dot(b, b) - c * c).max(0.0).sqrt();
    s.atan2(c)
}

fn det3(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0])
}

/// Area of the spherical triangle spanned by three independent vectors, by angle excess.
pub fn girard_area(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let d = det3(a, b, c).abs();
    let corner = |p: &[f64], q: &[f64], r: &[f64]| {
        let y = norm(p) * d;
        let x = dot(p, p) * dot(q, r) - dot(p, q) * dot(p, r);
        y.atan2(x)
    };
    corner(a, b, c) + corner(b, c, a) + corner(c, a, b) - PI
}

fn legendre() -> &'static [(f64, f64)] {
    static NODES: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    NODES.get_or_init(|| {
        let rule = GaussLegendre::new(NonZeroUsize::new(CUBATURE_POINTS).expect("nonzero"));
        rule.iter().map(|(x, w)| ((x + 1.0) / 2.0, w / 2.0)).collect()
    })
}

const CUBATURE_POINTS: usize = 8;

/// Widest generator angle left after bisection: about 1e-10 relative error
/// at 1.0 rad, below 1e-14 at 0.5 rad.
fn cubature_angle(tol: f64) -> f64 {
    if tol >= 1e-6 {
        1.0
    } else {
        0.5
    }
}

/// Solid angle of a simplicial cone with unit generators by bisecting until the
/// cone is narrow, then integrating `|y|^{-n}` over the gnomonic image simplex.
fn cubature(gens: &[Vec<f64>], max_angle: f64) -> f64 {
    let n = gens.len();
    let mut worst = (0, 0, 1.0f64);
    for i in 0..n {
        for j in i + 1..n {
            let c = dot(&gens[i], &gens[j]);
            if c < worst.2 {
                worst = (i, j, c);
            }
        }
    }
    if worst.2.clamp(-1.0, 1.0).acos() > max_angle {
        let (i, j, _) = worst;
        let mid: Vec<f64> = normalized(
            &gens[i].iter().zip(&gens[j]).map(|(a, b)| a + b).collect::<Vec<_>>(),
        );
        let mut left = gens.to_vec();
        left[i] = mid.clone();
        let mut right = gens.to_vec();
        right[j] = mid;
        return cubature(&left, max_angle) + cubature(&right, max_angle);
    }
    gnomonic_rule(gens)
}

fn gnomonic_rule(gens: &[Vec<f64>]) -> f64 {
    let n = gens.len();
    let m = n - 1;
    let c = normalized(&(0..n).map(|k| gens.iter().map(|g| g[k]).sum()).collect::<Vec<f64>>());
    let verts: Vec<Vec<f64>> = gens
        .iter()
        .map(|g| {
            let s = dot(&c, g);
            g.iter().map(|x| x / s).collect()
        })
        .collect();
    let edges: Vec<Vec<f64>> =
        verts[1..].iter().map(|v| v.iter().zip(&verts[0]).map(|(a, b)| a - b).collect()).collect();
    // (m)-volume scale of the simplex: sqrt of the Gram determinant of its edges.
    let gram: Vec<Vec<f64>> = edges.iter().map(|a| edges.iter().map(|b| dot(a, b)).collect()).collect();
    let scale = det_f64(gram).abs().sqrt();

    let nodes = legendre();
    let q = nodes.len();
    let mut total = 0.0;
    let mut idx = vec![0usize; m];
    loop {
        // Collapsed coordinates to barycentric weights on edges.
        let mut w = 1.0;
        let mut rest = 1.0;
        let mut y = verts[0].clone();
        for (i, &k) in idx.iter().enumerate() {
            let (u, wu) = nodes[k];
            let b = rest * u;
            for (yy, e) in y.iter_mut().zip(&edges[i]) {
                *yy += b * e;
            }
            w *= wu * rest;
            rest *= 1.0 - u;
        }
        total += w * norm(&y).powi(-(n as i32));
        // advance the multi-index
        let mut d = 0;
        while d < m {
            idx[d] += 1;
            if idx[d] < q {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
        if d == m {
            break;
        }
    }
    total * scale
}

fn det_f64(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut d = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).expect("row");
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= a[c][c];
        for i in c + 1..n {
            let f = a[i][c] / a[c][c];
            for j in c..n {
                a[i][j] -= f * a[c][j];
            }
        }
    }
    d
}

fn simplex_seed(seed: u64, gens: &[QVec]) -> u64 {
    // FNV-1a over the exact generator text, so the stream depends only on the simplex.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ seed.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    for g in gens {
        for x in g {
            for b in x.to_string().bytes().chain(*b",") {
                h ^= b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
    }
    h
}

/// Monte Carlo estimate of the solid angle of a simplicial cone.
fn monte_carlo(gens: &[QVec], cfg: &NumericConfig) -> VolumeEstimate {
    let n = gens.len();
    // Facet normals: row i of the inverse generator matrix, up to positive scaling.
    let normals: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let others: Vec<QVec> =
                gens.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, g)| g.clone()).collect();
            let a = nullspace(&others, n).pop().expect("independent generators");
            let a = if crate::linalg::dot(&a, &gens[i]) < num_traits::Zero::zero() {
                crate::linalg::neg(&a)
            } else {
                a
            };
            normalized(&to_f64_vec(&a))
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(simplex_seed(cfg.seed, gens));
    let mut hits = 0u64;
    let mut taken = 0u64;
    let mut x = vec![0.0f64; n];
    while taken < cfg.mc_samples {
        for xi in x.iter_mut() {
            *xi = StandardNormal.sample(&mut rng);
        }
        let r = norm(&x);
        let mut inside = true;
        let mut near = false;
        for a in &normals {
            let s = dot(a, &x);
            if s.abs() < 1e-12 * r {
                near = true;
                break;
            }
            if s < 0.0 {
                inside = false;
            }
        }
        if near {
            continue;
        }
        taken += 1;
        if inside {
            hits += 1;
        }
    }
    let p = hits as f64 / taken as f64;
    let total = sphere_volume(n);
    let std_err = total * (p * (1.0 - p) / taken as f64).sqrt();
    VolumeEstimate { value: p * total, std_err, warning: std_err > cfg.tol }
}

/// Solid angle (unsigned `(n-1)`-volume of the cone's trace on the sphere) of the
/// simplicial cone spanned by `n` independent vectors of `Q^n`.
pub fn simplex_volume(gens: &[QVec], cfg: &NumericConfig) -> VolumeEstimate {
    let n = gens.len();
    let g: Vec<Vec<f64>> = gens.iter().map(|v| normalized(&to_f64_vec(v))).collect();
    match (n, cfg.engine) {
        (1, _) => VolumeEstimate::exact(1.0),
        (2, _) => VolumeEstimate::exact(angle(&g[0], &g[1])),
        (3, VolumeEngine::Cubature) => VolumeEstimate::exact(cubature(&g, cubature_angle(cfg.tol))),
        (3, _) => VolumeEstimate::exact(girard_area(&g[0], &g[1], &g[2])),
        (_, VolumeEngine::MonteCarlo) => monte_carlo(gens, cfg),
        _ => VolumeEstimate::exact(cubature(&g, cubature_angle(cfg.tol))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{from_ints, unit};

    fn units(n: usize) -> Vec<QVec> {
        (0..n).map(|i| unit(n, i)).collect()
    }

    #[test]
    fn sphere_constants() {
        assert!((sphere_volume(2) - 2.0 * PI).abs() < 1e-15);
        assert!((sphere_volume(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_volume(4) - 2.0 * PI * PI).abs() < 1e-14);
    }

    #[test]
    fn orthants() {
        let cfg = NumericConfig::default();
        assert!((simplex_volume(&units(2), &cfg).value - PI / 2.0).abs() < 1e-15);
        assert!((simplex_volume(&units(3), &cfg).value - PI / 2.0).abs() < 1e-14);
        let c = NumericConfig { engine: VolumeEngine::Cubature, ..cfg.clone() };
        assert!((simplex_volume(&units(3), &c).value - PI / 2.0).abs() < 1e-12);
        assert!((simplex_volume(&units(4), &cfg).value - PI * PI / 8.0).abs() < 1e-12);
    }

    #[test]
    fn girard_matches_van_oosterom_strackee() {
        let tris = [
            [from_ints(&[1, 2, 3]), from_ints(&[-2, 1, 1]), from_ints(&[0, -1, 4])],
            [from_ints(&[5, 1, 1]), from_ints(&[1, 5, 1]), from_ints(&[1, 1, 5])],
        ];
        for t in tris {
            let g: Vec<Vec<f64>> = t.iter().map(|v| to_f64_vec(v)).collect();
            let (a, b, c) = (&g[0], &g[1], &g[2]);
            let num = det3(a, b, c).abs();
            let den = norm(a) * norm(b) * norm(c)
                + dot(a, b) * norm(c)
                + dot(a, c) * norm(b)
                + dot(b, c) * norm(a);
            let mut oracle = 2.0 * num.atan2(den);
            if oracle < 0.0 {
                oracle += 2.0 * PI;
            }
            let g: Vec<Vec<f64>> = g.iter().map(|v| normalized(v)).collect();
            assert!((girard_area(&g[0], &g[1], &g[2]) - oracle).abs() < 1e-12);
        }
    }

    #[test]
    fn cubature_matches_girard() {
        let cfg = NumericConfig::default();
        let cub = NumericConfig { engine: VolumeEngine::Cubature, ..cfg.clone() };
        let wide = vec![from_ints(&[1, 0, 0]), from_ints(&[-9, 1, 0]), from_ints(&[1, 1, 1])];
        for t in [wide, vec![from_ints(&[3, 1, 0]), from_ints(&[0, 2, 1]), from_ints(&[1, -1, 5])]] {
            let a = simplex_volume(&t, &cfg).value;
            let b = simplex_volume(&t, &cub).value;
            assert!((a - b).abs() < 1e-11, "{a} vs {b}");
        }
    }

    #[test]
    fn monte_carlo_is_seeded() {
        let cfg = NumericConfig {
            mc_samples: 20_000,
            engine: VolumeEngine::MonteCarlo,
            ..NumericConfig::default()
        };
        let g = units(4);
        let a = simplex_volume(&g, &cfg);
        let b = simplex_volume(&g, &cfg);
        assert_eq!(a, b);
        assert!((a.value - PI * PI / 8.0).abs() < 4.0 * a.std_err);
    }

    #[test]
    fn coarse_cubature_agrees_with_fine() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut checked = 0;
        while checked < 6 {
            let g: Vec<Vec<f64>> = (0..4)
                .map(|_| normalized(&(0..4).map(|_| rng.random_range(-4..=4) as f64).collect::<Vec<_>>()))
                .collect();
            if g.iter().any(|v| v.iter().any(|x| x.is_nan())) || det_f64(g.clone()).abs() < 1e-3 {
                continue;
            }
            let fine = cubature(&g, 0.35);
            assert!((cubature(&g, 1.0) - fine).abs() < 1e-8);
            assert!((cubature(&g, 0.5) - fine).abs() < 1e-12);
            checked += 1;
        }
    }
}
