//! Integer number theory on machine words: primality, factoring, orders and
//! the Chinese remainder theorem.

use num_integer::Integer;

use crate::error::{Error, Result};

pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

const SMALL_PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic primality test for all `n < 2^64`.
///
/// Trial division by the primes below 40, then Miller–Rabin with the first
/// twelve prime bases, which is a deterministic witness set for 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &SMALL_PRIMES {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &SMALL_PRIMES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_brent(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut g) = (2u64, 2u64, 1u64);
        while g == 1 {
            x = f(x);
            y = f(f(y));
            g = x.abs_diff(y).gcd(&n);
        }
        if g != n {
            return g;
        }
        c += 1;
    }
}

/// Prime factorisation as `(prime, exponent)` pairs in increasing prime order.
pub fn factor(n: u64) -> Vec<(u64, u32)> {
    let mut primes = Vec::new();
    let mut rest = n;
    for p in 2..1000u64 {
        if p * p > rest {
            break;
        }
        while rest % p == 0 {
            primes.push(p);
            rest /= p;
        }
    }
    let mut stack = vec![rest];
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime(m) {
            primes.push(m);
            continue;
        }
        let f = pollard_brent(m);
        stack.push(f);
        stack.push(m / f);
    }
    primes.sort_unstable();
    let mut out: Vec<(u64, u32)> = Vec::new();
    for p in primes {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    out
}

/// Least `t > 0` with `q^t ≡ 1 (mod d)`.
pub fn multiplicative_order(q: u64, d: u64) -> Result<u64> {
    if d < 2 {
        return Err(Error::InvalidParams(format!("modulus {d} must be at least 2")));
    }
    if q.gcd(&d) != 1 {
        return Err(Error::NotCoprime { a: q, b: d });
    }
    let phi = euler_phi(d);
    let mut t = phi;
    for (p, _) in factor(phi) {
        while t % p == 0 && pow_mod(q, t / p, d) == 1 {
            t /= p;
        }
    }
    Ok(t)
}

pub fn euler_phi(n: u64) -> u64 {
    factor(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

/// Combines `x ≡ r_i (mod m_i)` for possibly non-coprime moduli.
///
/// Returns `None` when two congruences disagree on the gcd of their moduli.
pub fn crt_combine(congruences: &[(u64, u64)]) -> Option<(u64, u64)> {
    let mut acc: (u128, u128) = (0, 1);
    for &(r, m) in congruences {
        let (r, m) = (r as u128 % m as u128, m as u128);
        let (r0, m0) = acc;
        let g = m0.gcd(&m);
        if (r as i128 - r0 as i128).rem_euclid(g as i128) != 0 {
            return None;
        }
        let lcm = m0 / g * m;
        // r0 + m0 * t ≡ r (mod m)  =>  t ≡ (r - r0)/g * inv(m0/g) (mod m/g)
        let mg = m / g;
        let diff = ((r as i128 - r0 as i128) / g as i128).rem_euclid(mg as i128) as u128;
        let inv = if mg == 1 { 0 } else { inv_mod_u128(m0 / g % mg, mg)? };
        let t = diff * inv % mg.max(1);
        acc = ((r0 + m0 * t) % lcm, lcm);
    }
    if acc.1 > u64::MAX as u128 {
        return None;
    }
    Some((acc.0 as u64, acc.1 as u64))
}

fn inv_mod_u128(a: u128, m: u128) -> Option<u128> {
    let e = (a as i128).extended_gcd(&(m as i128));
    (e.gcd == 1).then(|| e.x.rem_euclid(m as i128) as u128)
}

/// Inverse of `a` modulo `m` by the extended Euclidean algorithm.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    inv_mod_u128(a as u128 % m as u128, m as u128).map(|v| v as u64)
}
