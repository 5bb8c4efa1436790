//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero on any
//! failure.

use std::time::{Duration, Instant};

use circdlp::attack::{
    detect_determinant_leak, detect_rowsum_leak, full_attack, DlogInstance, LeakStatus,
};
use circdlp::bench::{count_exponentiation, predicted_counts, random_exponent_of_length};
use circdlp::params::{build_psi, is_prime, is_q_primitive_mod_d, preset, ParamSet, Policy};
use circdlp::protocol::{
    decode_message, dh_shared, elgamal_decrypt_block, elgamal_encrypt_block, encode_message,
    keygen, message_capacity,
};
use circdlp::{Circulant, CrtPair, FieldElement, FieldSpec, MulStrategy, OpCounter, Parallelism, Poly, SquarePermutation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn random_circ(spec: FieldSpec, d: usize, rng: &mut ChaCha8Rng) -> Circulant {
    let q = spec.order() as u64;
    Circulant::new(spec, (0..d).map(|_| rng.gen_range(0..q)).collect()).unwrap()
}

fn random_poly(spec: FieldSpec, len: usize, rng: &mut ChaCha8Rng) -> Poly {
    let q = spec.order() as u64;
    Poly::new(spec, (0..len).map(|_| rng.gen_range(0..q)).collect()).unwrap()
}

/// Product of the full expansions, checked for circulant structure.
fn matrix_product_oracle(a: &Circulant, b: &Circulant) -> Option<Circulant> {
    let (ea, eb) = (a.expand(), b.expand());
    let d = a.d();
    let zero = a.spec().element(0).unwrap();
    let prod: Vec<Vec<FieldElement>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    (0..d).fold(zero, |acc, k| acc.add(&ea[i][k].mul(&eb[k][j]).unwrap()).unwrap())
                })
                .collect()
        })
        .collect();
    for i in 1..d {
        for j in 0..d {
            if prod[i][j] != prod[i - 1][(j + d - 1) % d] {
                return None;
            }
        }
    }
    Circulant::from_elements(&prod[0]).ok()
}

fn permutation_square_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut n = 0;
    for spec in [FieldSpec::binary(1).unwrap(), FieldSpec::binary(8).unwrap()] {
        for d in [3usize, 5, 7, 11, 19] {
            let perm = SquarePermutation::new(d).unwrap();
            for _ in 0..1000 {
                let a = random_circ(spec, d, &mut rng);
                let fast = a.square_char2_with(&perm, None).unwrap();
                ensure!(fast == a.mul(&a).unwrap(), "{spec} d={d}: {a} squares to {fast}");
                let generic = a
                    .mul_with(&a, MulStrategy::Generic(Parallelism::Sequential), None)
                    .unwrap();
                ensure!(fast == generic, "{spec} d={d}: generic convolution disagrees on {a}");
                n += 1;
            }
        }
    }
    Ok(format!("{n} squarings identical to convolution"))
}

fn ring_isomorphism() -> Outcome {
    let spec = FieldSpec::binary(4).unwrap();
    let d = 11;
    let modulus = Poly::x_pow_minus_one(spec, d);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..1000 {
        let a = random_circ(spec, d, &mut rng);
        let b = random_circ(spec, d, &mut rng);
        let conv = a.mul(&b).unwrap();
        let matrix = matrix_product_oracle(&a, &b).ok_or("matrix product is not circulant")?;
        let poly = a.representer().mul(&b.representer()).unwrap().rem(&modulus).unwrap();
        let poly = Circulant::from_poly(&poly, d).unwrap();
        ensure!(conv == matrix && conv == poly, "{a} * {b}: {conv} / {matrix} / {poly}");
    }
    Ok("1000 pairs agree three ways at F_16, d = 11".into())
}

fn shift_order() -> Outcome {
    let spec = FieldSpec::binary(1).unwrap();
    for d in 2..=50 {
        let w = Circulant::shift(spec, d).unwrap();
        let mut acc = w.clone();
        for j in 1..d {
            ensure!(!acc.is_identity(), "W^{j} = I at d = {d}");
            acc = acc.mul(&w).unwrap();
        }
        ensure!(acc.is_identity(), "W^{d} != I");
        ensure!(w.pow_u64(d as u64).is_identity(), "circ_pow(W, {d}) != I");
    }
    Ok("W^d = I with W^j != I for 0 < j < d, all 2 <= d <= 50".into())
}

/// `Φ_n` over the integers by dividing `x^n - 1` by `Φ_e` for proper
/// divisors `e`.
fn cyclotomic_oracle(n: usize, cache: &mut Vec<Option<Vec<i64>>>) -> Vec<i64> {
    if let Some(Some(c)) = cache.get(n) {
        return c.clone();
    }
    let mut num = vec![0i64; n + 1];
    num[0] = -1;
    num[n] = 1;
    for e in (1..n).filter(|e| n % e == 0) {
        let den = cyclotomic_oracle(e, cache);
        let mut quot = vec![0i64; num.len() - den.len() + 1];
        for i in (0..quot.len()).rev() {
            let c = num[i + den.len() - 1];
            quot[i] = c;
            for (j, &dj) in den.iter().enumerate() {
                num[i + j] -= c * dj;
            }
        }
        assert!(num.iter().all(|&c| c == 0), "inexact division");
        num = quot;
    }
    if cache.len() <= n {
        cache.resize(n + 1, None);
    }
    cache[n] = Some(num.clone());
    num
}

fn cyclotomic_criterion() -> Outcome {
    let f2 = FieldSpec::binary(1).unwrap();
    let mut primes = 0;
    // d = 2 shares the characteristic, outside the criterion's gcd(q, d) = 1
    for d in (3..100u64).filter(|&d| is_prime(d)) {
        let psi = build_psi(d as usize, f2).unwrap();
        let irreducible = psi.is_irreducible().unwrap();
        let primitive = is_q_primitive_mod_d(2, d).unwrap();
        ensure!(irreducible == primitive, "d = {d}: irreducible {irreducible}, primitive {primitive}");
        primes += 1;
    }
    let mut cache = Vec::new();
    for spec in [f2, FieldSpec::prime(3).unwrap()] {
        let p = spec.p() as i64;
        for d in 2..=30 {
            let mut prod = Poly::one(spec);
            for e in (1..=d).filter(|e| d % e == 0) {
                let oracle = cyclotomic_oracle(e, &mut cache);
                let reduced = Poly::new(spec, oracle.iter().map(|c| c.rem_euclid(p) as u64).collect()).unwrap();
                ensure!(reduced == Poly::cyclotomic(spec, e), "{spec}: Φ_{e} disagrees with oracle");
                prod = prod.mul(&reduced).unwrap();
            }
            ensure!(prod == Poly::x_pow_minus_one(spec, d), "{spec}: product over divisors of {d}");
        }
    }
    Ok(format!("{primes} odd primes d < 100 agree; x^d - 1 = prod Φ for d <= 30 over F_2, F_3"))
}

fn security_reduction() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (name, order) in [("d5", 15u64), ("d11", 1023)] {
        let ps = preset(name).unwrap();
        ensure!(ps.is_valid(), "{name} does not validate");
        for _ in 0..50 {
            let m = rng.gen_range(0..order);
            let inst = DlogInstance::known_answer(&ps, m.into()).unwrap();
            let r = full_attack(&inst);
            let status = |n: &str| r.leaks.iter().find(|l| l.name == n).map(|l| l.status.clone());
            ensure!(status("determinant") == Some(LeakStatus::Blocked), "{name} m={m}: determinant leak not blocked");
            ensure!(status("row_sum") == Some(LeakStatus::Blocked), "{name} m={m}: row-sum leak not blocked");
            ensure!(status("projection") == Some(LeakStatus::Fired), "{name} m={m}: projection did not fire");
            ensure!(r.base_order == Some(order), "{name}: base order {:?}", r.base_order);
            let c = r.combined.ok_or("no combined residue")?;
            ensure!(r.success && c.residue == m && c.modulus == order, "{name} m={m}: recovered {c:?}");
        }
    }
    let t = start.elapsed();
    ensure!(t < Duration::from_secs(30), "took {t:?}");
    Ok(format!("100 known-answer instances recovered via F_16 and F_1024 only, {t:.2?}"))
}

fn leak_sensitivity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let loose = Policy { min_order_bits: 1, exp_bits: 8 };
    let mut fired = 0;

    // row sum of order 15 over F_16
    let f16 = FieldSpec::binary(4).unwrap();
    let psi = build_psi(5, f16).unwrap();
    let gamma = (2..16).map(|v| f16.element(v).unwrap()).find(|g| (1..15).all(|e| g.pow(e).value() != 1)).unwrap();
    while fired < 25 {
        let residue = random_poly(f16, 4, &mut rng);
        let a = Circulant::crt_lift(&CrtPair { at_one: gamma, residue }, 5, &psi).unwrap();
        if !a.is_unit() {
            continue;
        }
        let ps = ParamSet::new(a.clone(), loose, None).unwrap();
        ensure!(!ps.checks.row_sum_one, "row-sum condition unexpectedly holds");
        let m: u64 = rng.gen_range(0..1 << 20);
        let inst = DlogInstance::new(ps, a.clone(), a.pow_u64(m), Some(m.into())).unwrap();
        let leak = detect_rowsum_leak(&inst);
        ensure!(leak.status == LeakStatus::Fired, "row-sum leak did not fire: {leak:?}");
        let modulus = leak.modulus.unwrap();
        ensure!(modulus == 15 && leak.residue == Some(m % 15), "row-sum leak {leak:?} for m = {m}");
        fired += 1;
    }

    // determinant 2 (order 2) over F_3
    let f3 = FieldSpec::prime(3).unwrap();
    while fired < 50 {
        let a = random_circ(f3, 5, &mut rng);
        if a.det().value() != 2 || !a.is_unit() {
            continue;
        }
        let ps = ParamSet::new(a.clone(), loose, None).unwrap();
        ensure!(!ps.checks.det_one, "det condition unexpectedly holds");
        let m: u64 = rng.gen_range(0..1 << 20);
        let inst = DlogInstance::new(ps, a.clone(), a.pow_u64(m), Some(m.into())).unwrap();
        let leak = detect_determinant_leak(&inst);
        ensure!(
            leak.status == LeakStatus::Fired && leak.modulus == Some(2) && leak.residue == Some(m % 2),
            "determinant leak {leak:?} for m = {m}"
        );
        fired += 1;
    }
    Ok("25 row-sum leaks (mod 15, F_16) and 25 determinant leaks (mod 2, F_3) match true m".into())
}

fn protocol_round_trips() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for name in ["d5", "d11"] {
        let ps = preset(name).unwrap();
        for _ in 0..100 {
            let a = keygen(&ps, &mut rng).unwrap();
            let b = keygen(&ps, &mut rng).unwrap();
            let s1 = dh_shared(&a.secret_m, &b.public).unwrap().to_bytes();
            let s2 = dh_shared(&b.secret_m, &a.public).unwrap().to_bytes();
            ensure!(s1 == s2, "{name}: DH secrets differ");
        }
        // too narrow for a byte payload; messages are blocks with c_0 = 0
        ensure!(message_capacity(ps.spec, ps.d).is_none(), "{name}: unexpected byte capacity");
        let kp = keygen(&ps, &mut rng).unwrap();
        for _ in 0..100 {
            let mut row: Vec<u64> = (0..ps.d).map(|_| rng.gen_range(0..2)).collect();
            row[0] = 0;
            let m = Circulant::new(ps.spec, row).unwrap();
            let ct = elgamal_encrypt_block(&ps, &kp.public, &m, &mut rng).unwrap();
            ensure!(elgamal_decrypt_block(&kp, &ct).unwrap() == m, "{name}: ElGamal round trip failed");
        }
    }
    let start = Instant::now();
    let big = preset("d1019").unwrap();
    ensure!(big.policy.exp_bits == 160, "d1019 exponent size {}", big.policy.exp_bits);
    let a = keygen(&big, &mut rng).unwrap();
    let b = keygen(&big, &mut rng).unwrap();
    let s1 = dh_shared(&a.secret_m, &b.public).unwrap();
    let s2 = dh_shared(&b.secret_m, &a.public).unwrap();
    let t = start.elapsed();
    ensure!(s1.to_bytes() == s2.to_bytes() && !s1.degenerate, "d1019: DH secrets differ");
    ensure!(t < Duration::from_secs(60), "d1019 DH took {t:?}");
    // byte-level messages need a wide block
    let msg: Vec<u8> = (0..125).map(|_| rng.gen()).collect();
    ensure!(decode_message(&encode_message(big.spec, big.d, &msg).unwrap()).unwrap() == msg, "byte encoding");
    Ok(format!("DH x100 and ElGamal x100 at d5, d11; d1019 DH with 160-bit exponents in {t:.2?}"))
}

fn operation_counts() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let ps = preset("d11").unwrap();
    let odd = random_circ(FieldSpec::prime(5).unwrap(), 6, &mut rng);
    for i in 0..100 {
        let bits = rng.gen_range(1..=160);
        let e = random_exponent_of_length(&mut rng, bits);
        let base = if i % 2 == 0 { &ps.generator } else { &odd };
        let check = count_exponentiation(base, &e);
        let (sq, mu) = predicted_counts(&e);
        ensure!(
            check.matches && check.measured.group_squares == sq && check.measured.group_mults == mu,
            "exponent {e:x}: measured {:?}, predicted ({sq}, {mu})",
            check.measured
        );
        ensure!(sq == bits as u64 - 1, "bit length");
    }
    let f256 = FieldSpec::binary(8).unwrap();
    for d in [11usize, 19] {
        let a = random_circ(f256, d, &mut rng);
        let fast = OpCounter::new();
        let generic = OpCounter::new();
        a.square_char2_with(&SquarePermutation::new(d).unwrap(), Some(&fast)).unwrap();
        a.mul_with(&a, MulStrategy::Generic(Parallelism::Sequential), Some(&generic)).unwrap();
        let (f, g) = (fast.snapshot(), generic.snapshot());
        ensure!(f.field_mults == 0 && f.field_squares == d as u64, "fast path at d = {d}: {f:?}");
        ensure!(g.field_mults == (d * d) as u64, "generic path at d = {d}: {g:?}");
    }
    Ok("100 exponents match L-1 / w-1; squaring costs 0 vs d^2 field mults at d = 11, 19".into())
}

fn inversion() -> Outcome {
    let spec = FieldSpec::binary(1).unwrap();
    let d = 11;
    let modulus = Poly::x_pow_minus_one(spec, d);
    let id = Circulant::identity(spec, d).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut units, mut non_units) = (0, 0);
    while units < 1000 {
        let a = random_circ(spec, d, &mut rng);
        let gcd_one = a.representer().gcd(&modulus).unwrap().is_one();
        let det_nonzero = !a.det().is_zero();
        ensure!(gcd_one == det_nonzero, "{a}: gcd and determinant disagree");
        match a.inverse() {
            Ok(inv) => {
                ensure!(gcd_one, "{a}: inverted a non-unit");
                ensure!(a.mul(&inv).unwrap() == id, "{a}: bad inverse {inv}");
                units += 1;
            }
            Err(_) => {
                ensure!(!gcd_one, "{a}: failed to invert a unit");
                non_units += 1;
            }
        }
    }
    Ok(format!("1000 units inverted; {non_units} non-units rejected"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("permutation squaring equivalence", permutation_square_equivalence),
        ("ring isomorphism", ring_isomorphism),
        ("W^d = I and minimality", shift_order),
        ("cyclotomic criterion", cyclotomic_criterion),
        ("security reduction at desk scale", security_reduction),
        ("leak sensitivity", leak_sensitivity),
        ("protocol round trips", protocol_round_trips),
        ("operation-count model", operation_counts),
        ("inversion", inversion),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let t = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{t:.2?}]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail} [{t:.2?}]");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
