use circdlp::params::build_psi;
use circdlp::{Circulant, Error, FieldSpec, MulStrategy, Parallelism, Poly, SquarePermutation};
use proptest::prelude::*;

/// Configured `(field, d)` shapes.
fn shapes() -> Vec<(FieldSpec, usize)> {
    vec![
        (FieldSpec::binary(1).unwrap(), 7),
        (FieldSpec::binary(1).unwrap(), 64),
        (FieldSpec::binary(1).unwrap(), 130),
        (FieldSpec::binary(4).unwrap(), 11),
        (FieldSpec::binary(8).unwrap(), 6),
        (FieldSpec::prime(3).unwrap(), 5),
        (FieldSpec::prime(7).unwrap(), 10),
        (FieldSpec::prime(65537).unwrap(), 4),
    ]
}

fn circ(spec: FieldSpec, d: usize) -> impl Strategy<Value = Circulant> {
    let q = spec.order().min(u64::MAX as u128) as u64;
    prop::collection::vec(0..q, d).prop_map(move |row| Circulant::new(spec, row).unwrap())
}

fn shape_and_pair() -> impl Strategy<Value = (Circulant, Circulant)> {
    prop::sample::select(shapes()).prop_flat_map(|(spec, d)| (circ(spec, d), circ(spec, d)))
}

fn matrix_product(a: &Circulant, b: &Circulant) -> Vec<Vec<u64>> {
    let f = *a.spec();
    let (ea, eb) = (a.expand(), b.expand());
    let d = a.d();
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    (0..d).fold(0, |acc, k| f.add(acc, f.mul(ea[i][k].value(), eb[k][j].value())))
                })
                .collect()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn three_way_isomorphism((a, b) in shape_and_pair()) {
        let product = a.mul(&b).unwrap();
        let modulus = Poly::x_pow_minus_one(*a.spec(), a.d());
        let poly = a.representer().mul(&b.representer()).unwrap().rem(&modulus).unwrap();
        prop_assert_eq!(&product, &Circulant::from_poly(&poly, a.d()).unwrap());
        let expanded: Vec<Vec<u64>> = product.expand().iter().map(|r| r.iter().map(|e| e.value()).collect()).collect();
        prop_assert_eq!(expanded, matrix_product(&a, &b));
        prop_assert_eq!(&product, &b.mul(&a).unwrap());
        for mode in [Parallelism::Sequential, Parallelism::Parallel] {
            prop_assert_eq!(&product, &a.mul_with(&b, MulStrategy::Generic(mode), None).unwrap());
        }
    }

    #[test]
    fn row_sum_and_det_are_multiplicative((a, b) in shape_and_pair()) {
        let ab = a.mul(&b).unwrap();
        prop_assert_eq!(ab.row_sum(), a.row_sum().mul(&b.row_sum()).unwrap());
        if a.d() <= 64 {
            prop_assert_eq!(ab.det(), a.det().mul(&b.det()).unwrap());
        }
    }

    #[test]
    fn inverse_exists_exactly_for_units(a in prop::sample::select(shapes()).prop_flat_map(|(s, d)| circ(s, d))) {
        let modulus = Poly::x_pow_minus_one(*a.spec(), a.d());
        let gcd = a.representer().gcd(&modulus).unwrap();
        match a.inverse() {
            Ok(inv) => {
                prop_assert!(gcd.is_one());
                prop_assert!(a.mul(&inv).unwrap().is_identity());
            }
            Err(Error::NotInvertible { gcd: g }) => {
                prop_assert!(!gcd.is_one());
                prop_assert_eq!(g, gcd);
            }
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn crt_split_is_a_ring_isomorphism((a, b) in shape_and_pair()) {
        let spec = *a.spec();
        let d = a.d();
        prop_assume!(d as u64 % spec.p() != 0);
        let psi = build_psi(d, spec).unwrap();
        let (sa, sb) = (a.crt_split(&psi).unwrap(), b.crt_split(&psi).unwrap());
        prop_assert_eq!(&Circulant::crt_lift(&sa, d, &psi).unwrap(), &a);
        let sab = a.mul(&b).unwrap().crt_split(&psi).unwrap();
        prop_assert_eq!(sab.at_one, sa.at_one.mul(&sb.at_one).unwrap());
        prop_assert_eq!(sab.residue, sa.residue.mul(&sb.residue).unwrap().rem(&psi).unwrap());
        let sum = a.add(&b).unwrap().crt_split(&psi).unwrap();
        prop_assert_eq!(sum.residue, sa.residue.add(&sb.residue).unwrap());
    }

    #[test]
    fn powers_match_repeated_products(a in circ(FieldSpec::binary(2).unwrap(), 9), e in 0u64..300) {
        let mut acc = Circulant::identity(*a.spec(), 9).unwrap();
        for _ in 0..e {
            acc = acc.mul(&a).unwrap();
        }
        prop_assert_eq!(a.pow_u64(e), acc);
    }

    #[test]
    fn permutation_square_matches_product_on_odd_dimensions(
        (a, perm) in prop::sample::select(vec![3usize, 5, 7, 9, 11, 19, 63, 65, 127, 129, 1019])
            .prop_flat_map(|d| (circ(FieldSpec::binary(1).unwrap(), d), Just(SquarePermutation::new(d).unwrap())))
    ) {
        let sq = a.square_char2_with(&perm, None).unwrap();
        prop_assert_eq!(&sq, &a.mul(&a).unwrap());
        prop_assert_eq!(&sq, &a.mul_with(&a, MulStrategy::Generic(Parallelism::Sequential), None).unwrap());
    }

    #[test]
    fn serialization_round_trips(a in prop::sample::select(shapes()).prop_flat_map(|(s, d)| circ(s, d))) {
        let spec = *a.spec();
        prop_assert_eq!(Circulant::from_bytes(spec, &a.to_bytes()).unwrap(), a.clone());
        prop_assert_eq!(Circulant::from_hex(spec, &a.to_hex()).unwrap(), a.clone());
        prop_assert_eq!(a.to_bytes().len(), 4 + a.d() * spec.byte_len());
    }
}

#[test]
fn square_permutation_laws() {
    for d in (3..400).step_by(2) {
        let p = SquarePermutation::new(d).unwrap();
        let t = p.table();
        assert_eq!(t[0], 0);
        let mut seen = vec![false; d];
        for (j, &tj) in t.iter().enumerate() {
            assert_eq!((2 * tj) % d, j);
            assert!(!seen[tj]);
            seen[tj] = true;
        }
    }
    assert!(SquarePermutation::new(4).is_err());
    assert!(SquarePermutation::new(1).is_err());
}

#[test]
fn fast_square_refuses_its_non_hypotheses() {
    let f3 = FieldSpec::prime(3).unwrap();
    let a = Circulant::identity(f3, 5).unwrap();
    assert!(matches!(a.square_char2(), Err(Error::UnsupportedCharacteristic(3))));
    let even = Circulant::identity(FieldSpec::binary(1).unwrap(), 6).unwrap();
    assert!(matches!(even.square_char2(), Err(Error::UnsupportedDimension { .. })));
}

#[test]
fn shift_matrix_order_is_exactly_d() {
    for spec in [FieldSpec::binary(1).unwrap(), FieldSpec::prime(5).unwrap()] {
        for d in 2..=50 {
            let w = Circulant::shift(spec, d).unwrap();
            let id = Circulant::identity(spec, d).unwrap();
            let mut acc = id.clone();
            for j in 1..=d {
                acc = acc.mul(&w).unwrap();
                assert_eq!(acc == id, j == d, "d = {d}, j = {j}");
            }
            assert_eq!(w.inverse().unwrap(), w.pow_u64(d as u64 - 1));
            if d % 2 == 1 {
                assert_eq!(w.det().value(), 1);
            }
        }
    }
}
