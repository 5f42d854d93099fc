use std::collections::BTreeSet;

use proptest::prelude::*;
use valconv::algebra::{equal_in_pi, PiElement};
use valconv::arrangement::{cell_witnesses, sign_vector};
use valconv::cone::Cone;
use valconv::current::{canonical_form, represent, t_equal, ValuationRep};
use valconv::exterior::KVector;
use valconv::linalg::{from_ints, rank, QVec};
use valconv::polytope::Polytope;
use valconv::rational::{q, qi, Rational};
use valconv::spherical::SphericalPolytope;
use valconv::volume::{sphere_volume, NumericConfig};

fn ivec(n: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-4i64..=4, n)
}

fn qvec(n: usize) -> impl Strategy<Value = QVec> {
    ivec(n).prop_map(|v| from_ints(&v))
}

fn polytope(n: usize) -> impl Strategy<Value = Polytope> {
    prop::collection::vec(qvec(n), 1..=7).prop_map(move |pts| Polytope::canonical_hull(n, &pts).unwrap())
}

fn solid(n: usize) -> impl Strategy<Value = Polytope> {
    polytope(n).prop_filter("full-dimensional", move |p| p.dim() == n)
}

fn basis(n: usize) -> impl Strategy<Value = Vec<QVec>> {
    prop::collection::vec(qvec(n), n).prop_filter("independent", move |b| rank(b) == n)
}

fn kvector(n: usize, k: usize) -> impl Strategy<Value = KVector> {
    use itertools::Itertools;
    let count = (0..n).combinations(k).count();
    prop::collection::vec(-3i64..=3, count).prop_map(move |cs| {
        KVector::from_terms(n, k, (0..n).combinations(k).zip(cs).map(|(idx, c)| (idx, qi(c)))).unwrap()
    })
}

fn pos_scale() -> impl Strategy<Value = Rational> {
    (1i64..=9, 1i64..=4).prop_map(|(a, b)| q(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn wedge_of_vectors_anticommutes(u in qvec(4), v in qvec(4)) {
        let (a, b) = (KVector::from_vector(&u), KVector::from_vector(&v));
        prop_assert_eq!(a.wedge(&b).unwrap(), b.wedge(&a).unwrap().neg());
        prop_assert!(a.wedge(&a).unwrap().is_zero());
    }

    #[test]
    fn wedge_is_associative(a in kvector(4, 1), b in kvector(4, 2), c in kvector(4, 1)) {
        let left = a.wedge(&b).unwrap().wedge(&c).unwrap();
        let right = a.wedge(&b.wedge(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn top_coefficient_is_determinant(b in basis(3)) {
        let v = KVector::simple_from_basis(3, &b).unwrap();
        prop_assert_eq!(v.top_coefficient().unwrap(), valconv::linalg::det(&b));
    }

    #[test]
    fn minkowski_sum_commutes(p in polytope(3), r in polytope(3)) {
        prop_assert_eq!(p.minkowski_sum(&r).unwrap(), r.minkowski_sum(&p).unwrap());
    }

    #[test]
    fn volume_scales_with_power_of_dimension(p in solid(3), lambda in pos_scale()) {
        let cube = &lambda * &lambda * &lambda;
        prop_assert_eq!(p.dilate(&lambda).unwrap().volume(), p.volume() * cube);
    }

    #[test]
    fn representation_ignores_translation(p in polytope(3), v in qvec(3)) {
        let a = represent(&p);
        let b = represent(&p.translate(&v).unwrap());
        prop_assert!(t_equal(&a, &b).unwrap());
        prop_assert_eq!(a.c(), b.c());
    }

    #[test]
    fn representation_minus_itself_is_zero(p in polytope(3)) {
        let a = represent(&p);
        let d = canonical_form(&a.sub(&a).unwrap()).unwrap();
        prop_assert!(d.t_is_zero());
    }

    #[test]
    fn dilation_matches_representation_of_dilate(p in polytope(2), lambda in pos_scale()) {
        let cfg = NumericConfig::default();
        let lhs = represent(&p).dilate(&lambda).unwrap();
        let rhs = represent(&p.dilate(&lambda).unwrap());
        prop_assert!(valconv::current::equals(&lhs, &rhs, &cfg).unwrap());
    }

    #[test]
    fn json_round_trips(p in polytope(3), c in -5i64..=5) {
        let s = serde_json::to_string(&p).unwrap();
        prop_assert_eq!(&serde_json::from_str::<Polytope>(&s).unwrap(), &p);
        let rep = represent(&p).scale(&qi(c));
        let s = serde_json::to_string(&rep).unwrap();
        prop_assert_eq!(&serde_json::from_str::<ValuationRep>(&s).unwrap(), &rep);
        let x = PiElement::from_terms(3, vec![(qi(c), p.clone())]).unwrap();
        let s = serde_json::to_string(&x).unwrap();
        prop_assert_eq!(serde_json::from_str::<PiElement>(&s).unwrap(), x);
    }

    #[test]
    fn pi_equality_is_symmetric(p in polytope(2), r in polytope(2)) {
        let cfg = NumericConfig::default();
        let (x, y) = (PiElement::from_polytope(&p), PiElement::from_polytope(&r));
        let same = equal_in_pi(&x, &y, &cfg).unwrap();
        prop_assert_eq!(same, equal_in_pi(&y, &x, &cfg).unwrap());
        prop_assert_eq!(same, p.normalized() == r.normalized());
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn boundary_of_boundary_vanishes(gens in prop::collection::vec(qvec(4), 2..=4), sign in prop::bool::ANY) {
        prop_assume!(rank(&gens) == gens.len());
        let cone = Cone::from_generators(4, &gens).unwrap();
        let s = SphericalPolytope::new(cone, if sign { 1 } else { -1 });
        prop_assert!(s.boundary().boundary().is_zero());
    }

    #[test]
    fn antipode_is_an_involution_commuting_with_boundary(gens in prop::collection::vec(qvec(3), 1..=3)) {
        prop_assume!(rank(&gens) == gens.len());
        let s = SphericalPolytope::new(Cone::from_generators(3, &gens).unwrap(), 1);
        prop_assert_eq!(&s.antipode().antipode(), &s);
        prop_assert_eq!(s.antipode().boundary().canonical_terms(), s.boundary().antipode().canonical_terms());
    }

    #[test]
    fn sign_cones_of_a_basis_tile_the_sphere(b in basis(3)) {
        // The 2^n cones spanned by ±b_i cover the sphere once.
        let cfg = NumericConfig::default();
        let mut total = 0.0;
        for mask in 0..8u32 {
            let gens: Vec<QVec> = b
                .iter()
                .enumerate()
                .map(|(i, v)| if mask >> i & 1 == 1 { v.iter().map(|x| -x).collect() } else { v.clone() })
                .collect();
            let s = SphericalPolytope::new(Cone::from_generators(3, &gens).unwrap(), 1);
            total += s.volume(&cfg).unwrap().value;
        }
        prop_assert!((total - sphere_volume(3)).abs() < 1e-10);
    }

    #[test]
    fn arrangement_witnesses_cover_every_cell(
        normals in prop::collection::vec(ivec(3), 1..=6),
        probes in prop::collection::vec(ivec(3), 20),
    ) {
        let hs: Vec<QVec> = normals.iter().map(|v| from_ints(v)).collect();
        let ws = cell_witnesses(&hs, 3);
        let nonzero: Vec<QVec> = hs.iter().filter(|a| a.iter().any(|x| *x != qi(0))).cloned().collect();
        let signs: BTreeSet<Vec<i8>> = ws.iter().map(|w| sign_vector(&nonzero, w)).collect();
        prop_assert_eq!(signs.len(), ws.len());
        prop_assert!(signs.iter().all(|s| s.iter().all(|&x| x != 0)));
        for p in &probes {
            let s = sign_vector(&nonzero, &from_ints(p));
            if s.iter().all(|&x| x != 0) {
                prop_assert!(signs.contains(&s));
            }
        }
    }
}
