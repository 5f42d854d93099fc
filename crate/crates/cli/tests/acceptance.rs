//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::process::{Command, ExitCode};
use std::time::Instant;

use valconv::algebra::{equal_in_pi, PiElement};
use valconv::convolution::{convolve_reps, identity, verify_theorem, VerificationReport};
use valconv::corpus::{Corpus, Kind};
use valconv::current::{represent, t_equal};
use valconv::linalg::{add, scale, QVec};
use valconv::polytope::Polytope;
use valconv::rational::{q, qi, Rational};
use valconv::selftest::{self, graded_terms, SuiteReport};
use valconv::volume::NumericConfig;

struct Pair {
    p: Polytope,
    q: Polytope,
    report: VerificationReport,
}

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

/// Pairs in general position, cycling through every ordered pair of kinds.
fn corpus_pairs(n: usize, count: usize, seed: u64) -> Vec<Pair> {
    let mut c = Corpus::new(seed);
    let cfg = NumericConfig::for_dim(n);
    (0..count)
        .map(|i| {
            let (ka, kb) = (Kind::ALL[i % 5], Kind::ALL[(i / 5) % 5]);
            let (p, q) = c.generic_pair(n, ka, kb);
            let report = verify_theorem(&p, &q, &cfg).expect("generic pairs are in general position");
            Pair { p, q, report }
        })
        .collect()
}

fn t_part(pairs: &[&Pair]) -> Outcome {
    let exact = pairs.iter().filter(|p| p.report.t_equal).count();
    outcome(exact == pairs.len() && pairs.len() >= 100, format!("{exact}/{} pairs in R^2 and R^3 with exact T", pairs.len()))
}

fn c_part(low: &[&Pair], high: &[Pair]) -> Outcome {
    let max_low = low.iter().map(|p| p.report.c_abs_err).fold(0.0, f64::max);
    let max_high = high.iter().map(|p| p.report.c_abs_err).fold(0.0, f64::max);
    let ok_low = low.iter().filter(|p| p.report.c_abs_err <= 1e-9).count();
    let ok_high = high.iter().filter(|p| p.report.c_abs_err <= 1e-3 && p.report.t_equal).count();
    outcome(
        ok_low == low.len() && ok_high == high.len() && high.len() >= 10,
        format!(
            "{ok_low}/{} within 1e-9 (max {max_low:.1e}); {ok_high}/{} in R^4 within 1e-3 (max {max_high:.1e})",
            low.len(),
            high.len()
        ),
    )
}

fn identity_element(pairs: &[&Pair]) -> Outcome {
    let mut checked = 0;
    let mut bad = 0;
    for pair in pairs {
        for p in [&pair.p, &pair.q] {
            let n = p.ambient_dim();
            let m = represent(p);
            let out = convolve_reps(&identity(n), &m, &NumericConfig::for_dim(n)).expect("the point is transversal to all");
            checked += 1;
            if !(t_equal(&out, &m).unwrap() && out.c() == m.c() && out.alpha() == m.alpha()) {
                bad += 1;
            }
        }
    }
    outcome(bad == 0, format!("{}/{checked} polytopes unchanged by M(pt) *", checked - bad))
}

fn commutative_associative(pairs: &[&Pair]) -> Outcome {
    let mut comm = 0;
    let mut graded = 0;
    for pair in pairs {
        let n = pair.p.ambient_dim();
        let cfg = NumericConfig::for_dim(n);
        let (a, b) = (represent(&pair.p), represent(&pair.q));
        let ab = convolve_reps(&a, &b, &cfg).unwrap();
        let ba = convolve_reps(&b, &a, &cfg).unwrap();
        comm += usize::from(t_equal(&ab, &ba).unwrap());
        graded += usize::from(graded_terms(&ab) && graded_terms(&ba));
    }
    let cfg = NumericConfig::for_dim(3);
    let assoc: SuiteReport = selftest::convolution_associativity(&mut Corpus::new(404), 3, 20, &cfg);
    outcome(
        comm == pairs.len() && graded == pairs.len() && assoc.ok(),
        format!(
            "commutative {comm}/{n}, graded {graded}/{n}, associative {}/{} triples in R^3",
            assoc.passed,
            assoc.cases,
            n = pairs.len()
        ),
    )
}

fn hull(n: usize, pts: &[QVec]) -> Polytope {
    Polytope::canonical_hull(n, pts).unwrap()
}

/// `[S] = [S1] + [S2] − [S1 ∩ S2]` for a simplex cut through a point on an edge.
fn simplex_split(c: &mut Corpus, n: usize) -> (Polytope, Vec<(Rational, Polytope)>) {
    let s = c.polytope(n, Kind::Simplex);
    let v = s.vertices().to_vec();
    let (i, j) = (0, 1 + c.index(n));
    let t = q(c.int(1, 4), 5);
    let m = add(&scale(&v[i], &(qi(1) - &t)), &scale(&v[j], &t));
    let swap = |k: usize| -> Vec<QVec> { v.iter().enumerate().map(|(x, p)| if x == k { m.clone() } else { p.clone() }).collect() };
    let shared: Vec<QVec> = v.iter().enumerate().filter(|(x, _)| *x != i && *x != j).map(|(_, p)| p.clone()).chain([m.clone()]).collect();
    (s, vec![(qi(1), hull(n, &swap(j))), (qi(1), hull(n, &swap(i))), (qi(-1), hull(n, &shared))])
}

/// `[B] = [B1] + [B2] − [B1 ∩ B2]` for a box cut by a coordinate hyperplane.
fn box_split(c: &mut Corpus, n: usize) -> (Polytope, Vec<(Rational, Polytope)>) {
    let lo: QVec = (0..n).map(|_| qi(c.int(-3, 0))).collect();
    let hi: QVec = lo.iter().map(|x| x + qi(c.int(1, 4))).collect();
    let i = c.index(n);
    let cut = (&lo[i] + &hi[i]) / qi(2);
    let b = Polytope::cuboid(&lo, &hi).unwrap();
    let (mut hi1, mut lo2) = (hi.clone(), lo.clone());
    hi1[i] = cut.clone();
    lo2[i] = cut.clone();
    let b1 = Polytope::cuboid(&lo, &hi1).unwrap();
    let b2 = Polytope::cuboid(&lo2, &hi).unwrap();
    let wall: Vec<QVec> = b1.vertices().iter().filter(|p| p[i] == cut).cloned().collect();
    (b, vec![(qi(1), b1), (qi(1), b2), (qi(-1), hull(n, &wall))])
}

fn moved(c: &mut Corpus, p: &Polytope) -> Polytope {
    let v = c.vector(p.ambient_dim(), -5, 5);
    p.translate(&v).unwrap()
}

fn pi_identities() -> Outcome {
    let mut c = Corpus::new(505);
    let (mut t_ok, mut t_all, mut f_ok, mut f_all, mut errors) = (0, 0, 0, 0, 0);
    for case in 0..60 {
        let n = 2 + case % 2;
        let cfg = NumericConfig::for_dim(n);
        // Identities that hold in the polytope algebra.
        let (lhs, rhs) = match case % 3 {
            0 => {
                let p = c.any_polytope(n);
                (PiElement::from_polytope(&p), PiElement::from_polytope(&moved(&mut c, &p)))
            }
            1 => {
                let (s, parts) = simplex_split(&mut c, n);
                let parts = parts.into_iter().map(|(k, p)| (k, moved(&mut c, &p))).collect();
                (PiElement::from_polytope(&s), PiElement::from_terms(n, parts).unwrap())
            }
            _ => {
                let (b, parts) = box_split(&mut c, n);
                (PiElement::from_polytope(&b), PiElement::from_terms(n, parts).unwrap())
            }
        };
        t_all += 1;
        match equal_in_pi(&lhs, &rhs, &cfg) {
            Ok(true) => t_ok += 1,
            Ok(false) => {}
            Err(_) => errors += 1,
        }
        // Pairs that differ.
        let (lhs, rhs) = match case % 4 {
            0 => {
                let p = c.any_polytope(n);
                let mut q = c.any_polytope(n);
                while q.normalized() == p.normalized() {
                    q = c.any_polytope(n);
                }
                (PiElement::from_polytope(&p), PiElement::from_polytope(&q))
            }
            1 => {
                let p = c.solid(n);
                (PiElement::from_polytope(&p), PiElement::from_polytope(&p.dilate(&q(3, 2)).unwrap()))
            }
            2 => {
                let (s, mut parts) = simplex_split(&mut c, n);
                parts.pop();
                (PiElement::from_polytope(&s), PiElement::from_terms(n, parts).unwrap())
            }
            _ => {
                let s = c.polytope(n, Kind::Simplex);
                (PiElement::from_polytope(&s), PiElement::from_polytope(&s.negate()))
            }
        };
        f_all += 1;
        match equal_in_pi(&lhs, &rhs, &cfg) {
            Ok(false) => f_ok += 1,
            Ok(true) => {}
            Err(_) => errors += 1,
        }
    }
    outcome(
        t_ok == t_all && f_ok == f_all && t_all >= 50 && f_all >= 50 && errors == 0,
        format!("true {t_ok}/{t_all}, false {f_ok}/{f_all}, errors {errors}"),
    )
}

fn suite_line(reports: &[SuiteReport]) -> String {
    reports
        .iter()
        .map(|r| format!("n={}: {}/{} (max {:.1e}, tol {:.0e})", r.dim, r.passed, r.cases, r.max_error, r.tol))
        .collect::<Vec<_>>()
        .join("; ")
}

fn boundary_symmetry() -> Outcome {
    let reports: Vec<SuiteReport> = [(2, 100), (3, 100), (4, 10)]
        .into_iter()
        .map(|(n, trials)| selftest::boundary_symmetry(&mut Corpus::new(600 + n as u64), n, trials, &NumericConfig::for_dim(n)))
        .collect();
    outcome(reports.iter().all(SuiteReport::ok), suite_line(&reports))
}

fn normal_cancellation() -> Outcome {
    let reports: Vec<SuiteReport> = [2, 3]
        .into_iter()
        .map(|n| {
            let cfg = NumericConfig { tol: 1e-8, ..NumericConfig::for_dim(n) };
            selftest::normal_cancellation(&mut Corpus::new(700 + n as u64), n, 30, &cfg)
        })
        .collect();
    outcome(reports.iter().all(SuiteReport::ok), suite_line(&reports))
}

fn weight_grading() -> Outcome {
    let reports: Vec<SuiteReport> =
        [2, 3].into_iter().map(|n| selftest::grading(&mut Corpus::new(800 + n as u64), n, 10, &NumericConfig::for_dim(n))).collect();
    outcome(reports.iter().all(SuiteReport::ok), suite_line(&reports))
}

fn equivariance() -> Outcome {
    let mut c = Corpus::new(900);
    let (mut agree, mut passing) = (0, 0);
    for case in 0..20 {
        let n = 2 + case % 2;
        let cfg = NumericConfig::for_dim(n);
        let (ka, kb) = (Kind::ALL[c.index(5)], Kind::ALL[c.index(5)]);
        let (p, q) = c.generic_pair(n, ka, kb);
        let g = c.unimodular(n);
        let pass = |p: &Polytope, q: &Polytope| verify_theorem(p, q, &cfg).is_ok_and(|r| r.t_equal && r.c_abs_err <= cfg.tol);
        let before = pass(&p, &q);
        let after = pass(&p.linear_image(&g).unwrap(), &q.linear_image(&g).unwrap());
        agree += usize::from(before == after);
        passing += usize::from(before && after);
    }
    outcome(agree == 20, format!("{agree}/20 maps agree, {passing}/20 pass both"))
}

fn reproducibility() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_valconv");
    let run = || {
        let out = Command::new(bin).args(["selftest", "--seed", "7"]).output().expect("binary runs");
        (out.status.code(), out.stdout)
    };
    let (a, b) = (run(), run());
    outcome(
        a.0 == Some(0) && a == b,
        format!("exit codes {:?}/{:?}, {} bytes, identical: {}", a.0, b.0, a.1.len(), a.1 == b.1),
    )
}

fn main() -> ExitCode {
    // Lets `cargo test -- <filter>` skip this target when another test is selected.
    if std::env::args().skip(1).any(|a| !a.starts_with('-')) && !std::env::args().any(|a| a == "acceptance") {
        return ExitCode::SUCCESS;
    }
    let start = Instant::now();
    let mut pairs: Vec<Pair> = corpus_pairs(2, 50, 101);
    pairs.extend(corpus_pairs(3, 50, 102));
    let low: Vec<&Pair> = pairs.iter().collect();
    let high = corpus_pairs(4, 10, 103);

    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("product formula, T part (exact)", Box::new(|| t_part(&low))),
        ("product formula, C part (numeric)", Box::new(|| c_part(&low, &high))),
        ("identity element", Box::new(|| identity_element(&low))),
        ("commutativity, associativity, grading", Box::new(|| commutative_associative(&low))),
        ("equality in the polytope algebra", Box::new(pi_identities)),
        ("boundary symmetry of the join volume", Box::new(boundary_symmetry)),
        ("cancellation over k-faces", Box::new(normal_cancellation)),
        ("weight grading under dilation", Box::new(weight_grading)),
        ("unimodular equivariance", Box::new(equivariance)),
        ("self-test reproducibility", Box::new(reproducibility)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failed += usize::from(!o.ok);
        println!("{} criterion {:>2} {name}: {}", if o.ok { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("acceptance: {}/{} criteria passed in {:.0?}", criteria.len() - failed, criteria.len(), start.elapsed());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
