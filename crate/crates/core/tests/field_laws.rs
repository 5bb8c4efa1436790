use circdlp::{Error, FieldSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Shift-and-add product modulo the full modulus, one bit at a time.
fn binary_mul_oracle(spec: &FieldSpec, a: u64, b: u64) -> u64 {
    let k = spec.k();
    let m = spec.modulus_full().unwrap_or(0b10);
    let mut acc: u128 = 0;
    let mut a = a as u128;
    for i in 0..k {
        if (b >> i) & 1 == 1 {
            acc ^= a;
        }
        a <<= 1;
        if (a >> k) & 1 == 1 {
            a ^= m;
        }
    }
    acc as u64
}

fn fields() -> Vec<FieldSpec> {
    let mut out: Vec<FieldSpec> = [1, 2, 3, 8, 13, 31, 32, 33, 63, 64]
        .into_iter()
        .map(|k| FieldSpec::binary(k).unwrap())
        .collect();
    out.extend(
        [3u64, 7, 257, 65537, 2_147_483_647]
            .into_iter()
            .map(|p| FieldSpec::prime(p).unwrap()),
    );
    out
}

fn random_element(f: &FieldSpec, rng: &mut ChaCha8Rng) -> u64 {
    let q = f.order();
    (rng.gen::<u128>() % q) as u64
}

#[test]
fn field_axioms_on_random_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for f in fields() {
        for _ in 0..10_000 {
            let (a, b, c) = (
                random_element(&f, &mut rng),
                random_element(&f, &mut rng),
                random_element(&f, &mut rng),
            );
            assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)), "{f}");
            assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)), "{f}");
            assert_eq!(f.add(a, b), f.add(b, a));
            assert_eq!(f.mul(a, b), f.mul(b, a));
            assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)), "{f}");
            assert_eq!(f.add(a, 0), a);
            assert_eq!(f.mul(a, 1), a);
            assert_eq!(f.add(a, f.neg(a)), 0);
            assert_eq!(f.sub(f.add(a, b), b), a);
            assert_eq!(f.square(a), f.mul(a, a), "{f}: square of {a:#x}");
            if a != 0 {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), 1, "{f}: inverse of {a:#x}");
            }
            assert!(f.is_canonical(f.mul(a, b)));
        }
    }
}

#[test]
fn products_match_independent_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for f in fields() {
        for _ in 0..2_000 {
            let (a, b) = (random_element(&f, &mut rng), random_element(&f, &mut rng));
            let expected = if f.is_binary() {
                binary_mul_oracle(&f, a, b)
            } else {
                ((a as u128 * b as u128) % f.p() as u128) as u64
            };
            assert_eq!(f.mul(a, b), expected, "{f}: {a:#x} * {b:#x}");
        }
    }
}

#[test]
fn powers_follow_square_and_multiply() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for f in fields() {
        let a = random_element(&f, &mut rng);
        let mut acc = 1;
        for e in 0..200u128 {
            assert_eq!(f.pow(a, e), acc, "{f}: {a:#x}^{e}");
            acc = f.mul(acc, a);
        }
        assert_eq!(f.pow(0, 0), 1);
    }
}

#[test]
fn mismatched_fields_are_rejected() {
    let f4 = FieldSpec::binary(2).unwrap();
    let f8 = FieldSpec::binary(3).unwrap();
    let a = f4.element(1).unwrap();
    let b = f8.element(1).unwrap();
    assert!(matches!(a.add(&b), Err(Error::SpecMismatch)));
    assert!(matches!(a.mul(&b), Err(Error::SpecMismatch)));
    assert!(matches!(f4.element(0).unwrap().inv(), Err(Error::DivisionByZero)));
    assert!(f4.element(4).is_err());
    assert!(FieldSpec::prime(9).is_err());
    assert!(FieldSpec::binary(0).is_err());
    assert!(FieldSpec::binary(65).is_err());
}

#[test]
fn custom_modulus_round_trips_through_parts() {
    // t^8 + t^4 + t^3 + t + 1 is the AES modulus, not the table default
    let aes = FieldSpec::from_parts(2, 8, Some(0x11b)).unwrap();
    assert_eq!(aes, FieldSpec::binary(8).unwrap());
    let other = FieldSpec::from_parts(2, 8, Some(0x11d)).unwrap();
    assert_ne!(aes, other);
    assert_eq!(other.modulus_hex(), "11d");
    assert_eq!(other.mul(0x80, 0x02), 0x1d);
    assert!(FieldSpec::from_parts(2, 8, Some(0x101)).is_err());
}
