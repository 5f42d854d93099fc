//! Seeded invariant suites. Reports contain no timings, so two runs with the
//! same configuration serialize to identical bytes.

use num_traits::One;
use rand::Rng;
use serde::Serialize;

use crate::algebra::{equal_in_pi, weight_slice, PiElement};
use crate::config::RunConfig;
use crate::convolution::{convolve_reps, identity, verify_theorem};
use crate::corpus::{Corpus, Kind};
use crate::current::{equals, represent, t_equal, CValue, ValuationRep};
use crate::error::{Error, Result};
use crate::rational::{to_f64, Rational};
use crate::spherical::{join_volume, SphericalChain};
use crate::volume::NumericConfig;

/// Draws per case before a suite gives up on finding an admissible instance.
const MAX_DRAWS: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Failure {
    pub case: usize,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub dim: usize,
    pub tol: f64,
    pub cases: usize,
    pub passed: usize,
    /// Instances redrawn because a join volume was outside its domain or the
    /// inputs were not transversal.
    pub resampled: usize,
    pub max_error: f64,
    pub failures: Vec<Failure>,
}

impl SuiteReport {
    fn new(suite: &str, dim: usize, tol: f64) -> SuiteReport {
        SuiteReport {
            suite: suite.into(),
            dim,
            tol,
            cases: 0,
            passed: 0,
            resampled: 0,
            max_error: 0.0,
            failures: vec![],
        }
    }

    pub fn ok(&self) -> bool {
        self.failures.is_empty() && self.passed == self.cases
    }

    /// Records a numeric case that passes when `err <= tol`.
    fn numeric(&mut self, err: f64) {
        self.max_error = self.max_error.max(err);
        let (case, tol) = (self.cases, self.tol);
        self.check(err <= tol, || format!("error {err:e} exceeds {tol:e}"), case);
    }

    fn check(&mut self, ok: bool, detail: impl FnOnce() -> String, case: usize) {
        self.cases += 1;
        if ok {
            self.passed += 1;
        } else {
            self.failures.push(Failure { case, detail: detail() });
        }
    }

    fn error(&mut self, e: &Error) {
        let case = self.cases;
        self.check(false, || e.to_string(), case);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub trials: usize,
    pub dims: Vec<usize>,
    pub suites: Vec<SuiteReport>,
    pub passed: bool,
}

fn is_domain(e: &Error) -> bool {
    matches!(e, Error::PartialFunctionDomain { .. } | Error::NotTransversal { .. })
}

/// Runs `attempt` until it returns something other than a domain error.
fn with_resampling<T>(
    report: &mut SuiteReport,
    corpus: &mut Corpus,
    mut attempt: impl FnMut(&mut Corpus) -> Result<T>,
) -> Result<T> {
    for _ in 0..MAX_DRAWS {
        match attempt(corpus) {
            Err(e) if is_domain(&e) => report.resampled += 1,
            r => return r,
        }
    }
    Err(Error::EmptyInput(format!("no admissible instance in {MAX_DRAWS} draws")))
}

fn sign_pow(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `A(∂I, J) = (−1)^k A(I, ∂J)` for random simplicial `I` of dimension `k` and
/// `J` of dimension `n − 1 − k` with `J` off the equator spanned by `I`. `k`
/// cycles through `0..n−1`; at `k = n − 1` the equator is the whole sphere.
pub fn boundary_symmetry(corpus: &mut Corpus, n: usize, trials: usize, cfg: &NumericConfig) -> SuiteReport {
    let mut r = SuiteReport::new("boundary_symmetry", n, cfg.tol);
    for case in 0..trials {
        let k = case % (n - 1);
        let out = with_resampling(&mut r, corpus, |c| {
            let i = c.spherical_simplex(n, k + 1);
            let j = c.spherical_simplex(n, n - k);
            if !j.cone().intersect_subspace(i.cone().span())?.is_zero() {
                return Err(Error::PartialFunctionDomain { pair: (0, 0), reason: "J meets the equator of I".into() });
            }
            let lhs = join_volume(&i.boundary(), &SphericalChain::from_polytope(j.clone()), cfg)?;
            let rhs = join_volume(&SphericalChain::from_polytope(i), &j.boundary(), cfg)?;
            Ok((lhs.value - sign_pow(k) * rhs.value).abs())
        });
        match out {
            Ok(err) => r.numeric(err),
            Err(e) => r.error(&e),
        }
    }
    r
}

/// `Σ_F <v_F, ξ> A(−∂ň(F,P), J) = 0` over the `k`-faces of a random polytope,
/// for a random covector `ξ` and a random `k`-dimensional `J`.
pub fn normal_cancellation(corpus: &mut Corpus, n: usize, trials: usize, cfg: &NumericConfig) -> SuiteReport {
    let mut r = SuiteReport::new("normal_cancellation", n, cfg.tol.max(1e-8));
    for case in 0..trials {
        let k = case % n;
        let p = corpus.any_polytope(n);
        let rep = represent(&p);
        let xi = corpus.covector(n, k);
        let pieces: Vec<(f64, SphericalChain)> = rep
            .component(k)
            .iter()
            .map(|fc| (to_f64(&fc.v().inner(&xi)), fc.normal().boundary().antipode()))
            .collect();
        let out = with_resampling(&mut r, corpus, |c| {
            let j = SphericalChain::from_polytope(c.spherical_simplex(n, k + 1));
            let mut sum = 0.0;
            for (w, chain) in &pieces {
                sum += w * join_volume(chain, &j, cfg)?.value;
            }
            Ok(sum.abs())
        });
        match out {
            Ok(err) => r.numeric(err),
            Err(e) => r.error(&e),
        }
    }
    r
}

fn small_element(c: &mut Corpus, n: usize) -> PiElement {
    let kinds = [Kind::Segment, Kind::Triangle, Kind::Box];
    let count = 1 + c.index(2);
    let terms = (0..count)
        .map(|_| {
            let kind = kinds[c.index(kinds.len())];
            let coeff = Rational::from_integer(c.int(-3, 3).into());
            (coeff, c.polytope(n, kind))
        })
        .collect();
    PiElement::from_terms(n, terms).expect("same dimension")
}

/// Commutativity, associativity, distributivity and the unit of `Π`, decided by `equal_in_pi`.
pub fn ring_laws(corpus: &mut Corpus, n: usize, trials: usize, cfg: &NumericConfig) -> SuiteReport {
    let mut r = SuiteReport::new("ring_laws", n, cfg.tol);
    for case in 0..trials {
        let x = small_element(corpus, n);
        let y = small_element(corpus, n);
        let z = small_element(corpus, n);
        let laws = || -> Result<Vec<&'static str>> {
            let mut broken = vec![];
            if !equal_in_pi(&x.product(&y)?, &y.product(&x)?, cfg)? {
                broken.push("commutativity");
            }
            if !equal_in_pi(&x.product(&y)?.product(&z)?, &x.product(&y.product(&z)?)?, cfg)? {
                broken.push("associativity");
            }
            if !equal_in_pi(&x.product(&y.add(&z)?)?, &x.product(&y)?.add(&x.product(&z)?)?, cfg)? {
                broken.push("distributivity");
            }
            if !equal_in_pi(&x.product(&PiElement::one(n))?, &x, cfg)? {
                broken.push("unit");
            }
            Ok(broken)
        };
        match laws() {
            Ok(broken) => r.check(broken.is_empty(), || broken.join(", "), case),
            Err(e) => r.error(&e),
        }
    }
    r
}

/// `dilate(M(P), λ) = M(λP)`, and the weight-`k` slice of `M(λP)` is `λ^k` times that of `M(P)`.
pub fn grading(corpus: &mut Corpus, n: usize, trials: usize, cfg: &NumericConfig) -> SuiteReport {
    let mut r = SuiteReport::new("grading", n, cfg.tol);
    for case in 0..trials {
        let p = corpus.any_polytope(n);
        let lambda = corpus.scale();
        let run = || -> Result<Option<String>> {
            let m = represent(&p);
            let scaled = represent(&p.dilate(&lambda)?);
            if !equals(&m.dilate(&lambda)?, &scaled, cfg)? {
                return Ok(Some("dilate(M(P)) differs from M(λP)".into()));
            }
            let mut pow = Rational::one();
            for k in 0..=n {
                if !equals(&weight_slice(&scaled, k)?, &weight_slice(&m, k)?.scale(&pow), cfg)? {
                    return Ok(Some(format!("slice {k} does not scale by λ^{k}")));
                }
                pow *= &lambda;
            }
            Ok(None)
        };
        match run() {
            Ok(d) => r.check(d.is_none(), || d.unwrap_or_default(), case),
            Err(e) => r.error(&e),
        }
    }
    r
}

/// Every term of a convolution has `grade(v) + dim(N) = n − 1` and sits in the
/// component of its grade.
pub fn graded_terms(rep: &ValuationRep) -> bool {
    let n = rep.ambient_dim();
    rep.components()
        .iter()
        .enumerate()
        .all(|(k, comp)| comp.iter().all(|fc| fc.v().grade() == k && k + fc.normal().dim() == n - 1))
}

fn c_close(a: &CValue, b: &CValue, tol: f64) -> (bool, f64) {
    let err = (a.to_f64() - b.to_f64()).abs();
    (a.matches(b, tol + 2.0 * (a.err() + b.err())), err)
}

/// `M(pt) ∗ M(P) = M(P)` exactly.
pub fn convolution_identity(corpus: &mut Corpus, n: usize, trials: usize, cfg: &NumericConfig) -> SuiteReport {
    let mut r = SuiteReport::new("convolution_identity", n, 0.0);
    let e = identity(n);
    for case in 0..trials {
        let m = represent(&corpus.any_polytope(n));
        let run = || -> Result<bool> {
            let left = convolve_reps(&e, &m, cfg)?;
            let right = convolve_reps(&m, &e, cfg)?;
            let same = |x: &ValuationRep| -> Result<bool> {
                Ok(t_equal(x, &m)? && x.c() == m.c() && x.alpha() == m.alpha())
            };
            Ok(same(&left)? && same(&right)?)
        };
        match run() {
            Ok(ok) => r.check(ok, || "identity changed the representation".into(), case),
            Err(e) => r.error(&e),
        }
    }
    r
}

fn small_kind(c: &mut Corpus, n: usize) -> Kind {
    let kinds: &[Kind] = if n >= 4 { &[Kind::Segment, Kind::Triangle] } else { &[Kind::Segment, Kind::Triangle, Kind::Simplex, Kind::Box] };
    kinds[c.index(kinds.len())]
}

/// `a ∗ b = b ∗ a` on pairs in general position, with every output term graded.
pub fn convolution_commutativity(
    corpus: &mut Corpus,
    n: usize,
    trials: usize,
    cfg: &NumericConfig,
) -> SuiteReport {
    let mut r = SuiteReport::new("convolution_commutativity", n, cfg.tol);
    for case in 0..trials {
        let (ka, kb) = (small_kind(corpus, n), small_kind(corpus, n));
        let (p, q) = corpus.generic_pair(n, ka, kb);
        let run = || -> Result<(Option<String>, f64)> {
            let (a, b) = (represent(&p), represent(&q));
            let ab = convolve_reps(&a, &b, cfg)?;
            let ba = convolve_reps(&b, &a, cfg)?;
            let (c_ok, err) = c_close(ab.c(), ba.c(), cfg.tol);
            let detail = if !t_equal(&ab, &ba)? {
                Some("T parts differ".into())
            } else if !c_ok {
                Some(format!("C differs by {err:e}"))
            } else if !graded_terms(&ab) {
                Some("output term violates the grading".into())
            } else {
                None
            };
            Ok((detail, err))
        };
        match run() {
            Ok((d, err)) => {
                r.max_error = r.max_error.max(err);
                r.check(d.is_none(), || d.unwrap_or_default(), case)
            }
            Err(e) => r.error(&e),
        }
    }
    r
}

/// `(a ∗ b) ∗ c = a ∗ (b ∗ c)` for generic segments and triangles.
pub fn convolution_associativity(
    corpus: &mut Corpus,
    n: usize,
    trials: usize,
    cfg: &NumericConfig,
) -> SuiteReport {
    let mut r = SuiteReport::new("convolution_associativity", n, cfg.tol);
    let kinds: &[Kind] = if n >= 3 { &[Kind::Segment, Kind::Triangle] } else { &[Kind::Segment] };
    for case in 0..trials {
        let out = with_resampling(&mut r, corpus, |c| {
            let reps: Vec<ValuationRep> = (0..3)
                .map(|_| {
                    let kind = kinds[c.index(kinds.len())];
                    let m = c.generic_matrix(n);
                    represent(&c.polytope(n, kind).linear_image(&m).expect("square matrix"))
                })
                .collect();
            let left = convolve_reps(&convolve_reps(&reps[0], &reps[1], cfg)?, &reps[2], cfg)?;
            let right = convolve_reps(&reps[0], &convolve_reps(&reps[1], &reps[2], cfg)?, cfg)?;
            let (c_ok, err) = c_close(left.c(), right.c(), cfg.tol);
            let detail = if !t_equal(&left, &right)? {
                Some("T parts differ".to_string())
            } else if !c_ok {
                Some(format!("C differs by {err:e}"))
            } else if !graded_terms(&left) || !graded_terms(&right) {
                Some("output term violates the grading".into())
            } else {
                None
            };
            Ok((detail, err))
        });
        match out {
            Ok((d, err)) => {
                r.max_error = r.max_error.max(err);
                r.check(d.is_none(), || d.unwrap_or_default(), case)
            }
            Err(e) => r.error(&e),
        }
    }
    r
}

/// `M(P) ∗ M(Q) = M(P + Q)` on random pairs in general position.
pub fn product_formula(corpus: &mut Corpus, n: usize, trials: usize, cfg: &NumericConfig) -> SuiteReport {
    let mut r = SuiteReport::new("product_formula", n, cfg.tol);
    for case in 0..trials {
        let (ka, kb) = (Kind::ALL[corpus.index(Kind::ALL.len())], Kind::ALL[corpus.index(Kind::ALL.len())]);
        let (p, q) = corpus.generic_pair(n, ka, kb);
        match verify_theorem(&p, &q, cfg) {
            Ok(v) => {
                r.max_error = r.max_error.max(v.c_abs_err);
                let tol = r.tol;
                r.check(
                    v.t_equal && v.c_abs_err <= tol,
                    || format!("t_equal = {}, |ΔC| = {:e}", v.t_equal, v.c_abs_err),
                    case,
                );
            }
            Err(e) => r.error(&e),
        }
    }
    r
}

/// Every suite for every dimension, in a fixed order. Each suite draws its
/// own seed from one generator seeded with `cfg.seed`.
pub fn run(cfg: &RunConfig, dims: &[usize]) -> Result<SelftestReport> {
    cfg.validate()?;
    for &n in dims {
        if !(2..=4).contains(&n) {
            return Err(Error::Config(format!("self-test dimensions are 2, 3 and 4, got {n}")));
        }
    }
    type Suite = fn(&mut Corpus, usize, usize, &NumericConfig) -> SuiteReport;
    let suites: [(Suite, usize); 8] = [
        (boundary_symmetry, 4),
        (normal_cancellation, 3),
        (ring_laws, 4),
        (grading, 4),
        (convolution_identity, 4),
        (convolution_commutativity, 4),
        (convolution_associativity, 4),
        (product_formula, 4),
    ];
    let mut master = Corpus::new(cfg.seed);
    let mut reports = vec![];
    for &n in dims {
        let numeric = cfg.numeric(n);
        for (suite, max_dim) in suites {
            let seed: u64 = master.rng().random();
            if n <= max_dim {
                reports.push(suite(&mut Corpus::new(seed), n, cfg.trials, &numeric));
            }
        }
    }
    let passed = reports.iter().all(SuiteReport::ok);
    Ok(SelftestReport { seed: cfg.seed, trials: cfg.trials, dims: dims.to_vec(), suites: reports, passed })
}
