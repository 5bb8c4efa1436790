//! Ground-field arithmetic for `F_q`, `q = p^k`.
//!
//! Two families are supported:
//!
//! * `p = 2`, `1 <= k <= 64`: an element is a `u64` whose bit `i` is the
//!   coefficient of `t^i` in the polynomial basis over `F_2`.
//! * odd prime `p < 2^31`, `k = 1`: an element is its residue in `[0, p)`.
//!
//! Values are always kept in canonical form so equality is word equality.
//! [`FieldSpec`] exposes the raw word-level operations used by the circulant
//! and polynomial layers; [`FieldElement`] is the checked public wrapper.

use std::fmt;

use crate::error::{Error, Result};
use crate::nt;

/// Low words of the lowest-weight irreducible `x^k + ... + 1` over `F_2` for
/// `k = 2..=64`; the leading `x^k` term is implicit. Trinomials with the
/// smallest middle exponent where one exists, otherwise the pentanomial with
/// the lexicographically smallest `(k3, k2, k1)`.
const BINARY_MODULI: [u64; 63] = [
    0x3,        // k = 2: x^2 + x + 1
    0x3,        // k = 3: x^3 + x + 1
    0x3,        // k = 4: x^4 + x + 1
    0x5,        // k = 5: x^5 + x^2 + 1
    0x3,        // k = 6: x^6 + x + 1
    0x3,        // k = 7: x^7 + x + 1
    0x1b,       // k = 8: x^8 + x^4 + x^3 + x + 1
    0x3,        // k = 9: x^9 + x + 1
    0x9,        // k = 10: x^10 + x^3 + 1
    0x5,        // k = 11: x^11 + x^2 + 1
    0x9,        // k = 12: x^12 + x^3 + 1
    0x1b,       // k = 13: x^13 + x^4 + x^3 + x + 1
    0x21,       // k = 14: x^14 + x^5 + 1
    0x3,        // k = 15: x^15 + x + 1
    0x2b,       // k = 16: x^16 + x^5 + x^3 + x + 1
    0x9,        // k = 17: x^17 + x^3 + 1
    0x9,        // k = 18: x^18 + x^3 + 1
    0x27,       // k = 19: x^19 + x^5 + x^2 + x + 1
    0x9,        // k = 20: x^20 + x^3 + 1
    0x5,        // k = 21: x^21 + x^2 + 1
    0x3,        // k = 22: x^22 + x + 1
    0x21,       // k = 23: x^23 + x^5 + 1
    0x1b,       // k = 24: x^24 + x^4 + x^3 + x + 1
    0x9,        // k = 25: x^25 + x^3 + 1
    0x1b,       // k = 26: x^26 + x^4 + x^3 + x + 1
    0x27,       // k = 27: x^27 + x^5 + x^2 + x + 1
    0x3,        // k = 28: x^28 + x + 1
    0x5,        // k = 29: x^29 + x^2 + 1
    0x3,        // k = 30: x^30 + x + 1
    0x9,        // k = 31: x^31 + x^3 + 1
    0x8d,       // k = 32: x^32 + x^7 + x^3 + x^2 + 1
    0x401,      // k = 33: x^33 + x^10 + 1
    0x81,       // k = 34: x^34 + x^7 + 1
    0x5,        // k = 35: x^35 + x^2 + 1
    0x201,      // k = 36: x^36 + x^9 + 1
    0x53,       // k = 37: x^37 + x^6 + x^4 + x + 1
    0x63,       // k = 38: x^38 + x^6 + x^5 + x + 1
    0x11,       // k = 39: x^39 + x^4 + 1
    0x39,       // k = 40: x^40 + x^5 + x^4 + x^3 + 1
    0x9,        // k = 41: x^41 + x^3 + 1
    0x81,       // k = 42: x^42 + x^7 + 1
    0x59,       // k = 43: x^43 + x^6 + x^4 + x^3 + 1
    0x21,       // k = 44: x^44 + x^5 + 1
    0x1b,       // k = 45: x^45 + x^4 + x^3 + x + 1
    0x3,        // k = 46: x^46 + x + 1
    0x21,       // k = 47: x^47 + x^5 + 1
    0x2d,       // k = 48: x^48 + x^5 + x^3 + x^2 + 1
    0x201,      // k = 49: x^49 + x^9 + 1
    0x1d,       // k = 50: x^50 + x^4 + x^3 + x^2 + 1
    0x4b,       // k = 51: x^51 + x^6 + x^3 + x + 1
    0x9,        // k = 52: x^52 + x^3 + 1
    0x47,       // k = 53: x^53 + x^6 + x^2 + x + 1
    0x201,      // k = 54: x^54 + x^9 + 1
    0x81,       // k = 55: x^55 + x^7 + 1
    0x95,       // k = 56: x^56 + x^7 + x^4 + x^2 + 1
    0x11,       // k = 57: x^57 + x^4 + 1
    0x80001,    // k = 58: x^58 + x^19 + 1
    0x95,       // k = 59: x^59 + x^7 + x^4 + x^2 + 1
    0x3,        // k = 60: x^60 + x + 1
    0x27,       // k = 61: x^61 + x^5 + x^2 + x + 1
    0x20000001, // k = 62: x^62 + x^29 + 1
    0x3,        // k = 63: x^63 + x + 1
    0x1b,       // k = 64: x^64 + x^4 + x^3 + x + 1
];

/// Description of the ground field `F_q`.
///
/// Immutable and `Copy`; every circulant and polynomial carries one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    p: u64,
    k: u32,
    /// Low `k` bits of the binary modulus (the `x^k` term is implicit).
    /// Unused and zero when `k = 1`.
    modulus: u64,
}

impl FieldSpec {
    /// `F_{2^k}` with the built-in lowest-weight modulus.
    pub fn binary(k: u32) -> Result<Self> {
        match k {
            1 => Ok(FieldSpec { p: 2, k: 1, modulus: 0 }),
            2..=64 => Ok(FieldSpec {
                p: 2,
                k,
                modulus: BINARY_MODULI[k as usize - 2],
            }),
            _ => Err(Error::InvalidField(format!(
                "binary extension degree must lie in 1..=64, got {k}"
            ))),
        }
    }

    /// `F_{2^k}` with a caller-chosen modulus given by its low `k` bits.
    pub fn binary_with_modulus(k: u32, modulus_low: u64) -> Result<Self> {
        if k == 1 {
            return Self::binary(1);
        }
        if !(2..=64).contains(&k) {
            return Self::binary(k);
        }
        if k < 64 && modulus_low >> k != 0 {
            return Err(Error::InvalidField(format!(
                "modulus low word {modulus_low:#x} has bits at or above degree {k}"
            )));
        }
        let full = (1u128 << k) | modulus_low as u128;
        if !gf2_is_irreducible(full) {
            return Err(Error::InvalidField(format!(
                "modulus {full:#x} is reducible over F_2"
            )));
        }
        Ok(FieldSpec { p: 2, k, modulus: modulus_low })
    }

    /// The prime field `F_p`. `p = 2` gives `F_2`.
    pub fn prime(p: u64) -> Result<Self> {
        if p == 2 {
            return Self::binary(1);
        }
        if p >= 1 << 31 || !nt::is_prime(p) {
            return Err(Error::InvalidField(format!(
                "characteristic must be a prime below 2^31, got {p}"
            )));
        }
        Ok(FieldSpec { p, k: 1, modulus: 0 })
    }

    /// Builds a spec from `(p, k)` and an optional modulus given as the
    /// full polynomial (leading term included), as in the parameter files.
    pub fn from_parts(p: u64, k: u32, modulus_full: Option<u128>) -> Result<Self> {
        match (p, k, modulus_full) {
            (2, k, None) => Self::binary(k),
            (2, 1, Some(_)) => Self::binary(1),
            (2, k, Some(full)) => {
                if k > 64 || full >> k != 1 {
                    return Err(Error::InvalidField(format!(
                        "modulus {full:#x} is not monic of degree {k}"
                    )));
                }
                Self::binary_with_modulus(k, (full & ((1u128 << k) - 1)) as u64)
            }
            (p, 1, _) => Self::prime(p),
            (p, k, _) => Err(Error::InvalidField(format!(
                "odd characteristic {p} supports only k = 1, got k = {k}"
            ))),
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// `q = p^k`.
    pub fn order(&self) -> u128 {
        if self.p == 2 {
            1u128 << self.k
        } else {
            self.p as u128
        }
    }

    pub fn is_binary(&self) -> bool {
        self.p == 2
    }

    /// The full modulus polynomial as an integer (bit `i` = coefficient of
    /// `x^i`), or `None` for prime fields where no reduction happens.
    pub fn modulus_full(&self) -> Option<u128> {
        (self.p == 2 && self.k > 1).then(|| (1u128 << self.k) | self.modulus as u128)
    }

    /// Lowercase hex of [`Self::modulus_full`]; empty for prime fields.
    pub fn modulus_hex(&self) -> String {
        self.modulus_full().map(|m| format!("{m:x}")).unwrap_or_default()
    }

    /// Coefficient modulus and vector length of an element: `(p, k)`.
    pub fn coeff_layout(&self) -> (u64, u32) {
        (self.p, self.k)
    }

    pub fn zero(&self) -> u64 {
        0
    }

    pub fn one(&self) -> u64 {
        1
    }

    pub fn is_canonical(&self, v: u64) -> bool {
        if self.p == 2 {
            self.k == 64 || v >> self.k == 0
        } else {
            v < self.p
        }
    }

    /// Reduces an arbitrary integer into the field (prime fields) or masks to
    /// the coefficient width (binary fields).
    pub fn reduce_word(&self, v: u64) -> u64 {
        if self.p == 2 {
            if self.k == 64 {
                v
            } else {
                v & ((1u64 << self.k) - 1)
            }
        } else {
            v % self.p
        }
    }

    /// Image of the integer `n` under `Z -> F_q`.
    pub fn from_integer(&self, n: u64) -> u64 {
        if self.p == 2 {
            n & 1
        } else {
            n % self.p
        }
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        if self.p == 2 {
            a ^ b
        } else {
            let s = a + b;
            if s >= self.p {
                s - self.p
            } else {
                s
            }
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if self.p == 2 {
            a ^ b
        } else if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if self.p == 2 || a == 0 {
            a
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        if self.p == 2 {
            if self.k == 1 {
                a & b
            } else {
                self.reduce_binary(clmul(a, b))
            }
        } else {
            a * b % self.p
        }
    }

    /// Squaring. In characteristic 2 this is the Frobenius map: the bits of
    /// `a` are spread to even positions and the result is reduced, with no
    /// general multiplication involved.
    #[inline]
    pub fn square(&self, a: u64) -> u64 {
        if self.p == 2 {
            if self.k == 1 {
                a
            } else {
                self.reduce_binary(spread_bits(a))
            }
        } else {
            a * a % self.p
        }
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inv(&self, a: u64) -> Option<u64> {
        if a == 0 {
            return None;
        }
        if self.p == 2 {
            if self.k == 1 {
                return Some(1);
            }
            Some(gf2_inv_mod(a as u128, self.modulus_full().unwrap()) as u64)
        } else {
            nt::inv_mod(a, self.p)
        }
    }

    /// Left-to-right square-and-multiply; `0^0 = 1`.
    pub fn pow(&self, a: u64, e: u128) -> u64 {
        if e == 0 {
            return 1;
        }
        let mut acc = a;
        for i in (0..127 - e.leading_zeros()).rev() {
            acc = self.square(acc);
            if (e >> i) & 1 == 1 {
                acc = self.mul(acc, a);
            }
        }
        acc
    }

    /// Unreduced product, for accumulating dot products with a single
    /// final reduction.
    #[inline]
    pub(crate) fn mul_wide(&self, a: u64, b: u64) -> u128 {
        if self.p == 2 {
            if self.k == 1 {
                (a & b) as u128
            } else {
                clmul(a, b)
            }
        } else {
            a as u128 * b as u128
        }
    }

    #[inline]
    pub(crate) fn acc_wide(&self, acc: u128, x: u128) -> u128 {
        if self.p == 2 {
            acc ^ x
        } else {
            acc + x
        }
    }

    #[inline]
    pub(crate) fn reduce_wide(&self, x: u128) -> u64 {
        if self.p == 2 {
            if self.k == 1 {
                x as u64
            } else {
                self.reduce_binary(x)
            }
        } else {
            (x % self.p as u128) as u64
        }
    }

    fn reduce_binary(&self, mut x: u128) -> u64 {
        let k = self.k;
        let full = (1u128 << k) | self.modulus as u128;
        while x >> k != 0 {
            let top = 127 - x.leading_zeros();
            x ^= full << (top - k);
        }
        x as u64
    }

    /// Length of the canonical byte encoding: `ceil(k * log2(p) / 8)`.
    pub fn byte_len(&self) -> usize {
        let bits = if self.p == 2 {
            self.k
        } else {
            64 - (self.p - 1).leading_zeros()
        };
        bits.div_ceil(8) as usize
    }

    /// Big-endian bytes, constant coefficient in the least significant bit.
    pub fn to_bytes(&self, v: u64) -> Vec<u8> {
        let n = self.byte_len();
        v.to_be_bytes()[8 - n..].to_vec()
    }

    pub fn from_bytes(&self, bytes: &[u8]) -> Result<u64> {
        if bytes.len() != self.byte_len() {
            return Err(Error::Decode(format!(
                "field element needs {} bytes, got {}",
                self.byte_len(),
                bytes.len()
            )));
        }
        let mut buf = [0u8; 8];
        buf[8 - bytes.len()..].copy_from_slice(bytes);
        let v = u64::from_be_bytes(buf);
        if !self.is_canonical(v) {
            return Err(Error::Decode(format!("{v:#x} is not a canonical element")));
        }
        Ok(v)
    }

    /// Wraps a raw value, rejecting non-canonical input.
    pub fn element(&self, v: u64) -> Result<FieldElement> {
        if !self.is_canonical(v) {
            return Err(Error::InvalidField(format!("{v:#x} is not canonical in {self}")));
        }
        Ok(FieldElement { spec: *self, value: v })
    }

    /// Builds an element from its coefficient vector over `F_p`
    /// (constant term first).
    pub fn element_from_coeffs(&self, coeffs: &[u64]) -> Result<FieldElement> {
        if coeffs.len() != self.k as usize || coeffs.iter().any(|&c| c >= self.p) {
            return Err(Error::InvalidField(format!(
                "expected {} coefficients in [0, {})",
                self.k, self.p
            )));
        }
        let v = if self.p == 2 {
            coeffs.iter().enumerate().fold(0u64, |acc, (i, &c)| acc | (c << i))
        } else {
            coeffs[0]
        };
        Ok(FieldElement { spec: *self, value: v })
    }

    pub(crate) fn random<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        if self.p == 2 {
            self.reduce_word(rng.gen())
        } else {
            rng.gen_range(0..self.p)
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.k == 1 {
            write!(f, "F_{}", self.p)
        } else {
            write!(f, "F_{}^{}", self.p, self.k)
        }
    }
}

/// An element of `F_q` in canonical polynomial-basis form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldElement {
    spec: FieldSpec,
    value: u64,
}

impl FieldElement {
    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    /// The packed representation (see module docs).
    pub fn value(&self) -> u64 {
        self.value
    }

    /// Coefficients over `F_p`, constant term first, length `k`.
    pub fn coeffs(&self) -> Vec<u64> {
        if self.spec.p == 2 {
            (0..self.spec.k).map(|i| (self.value >> i) & 1).collect()
        } else {
            vec![self.value]
        }
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn same(&self, other: &Self) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::SpecMismatch);
        }
        Ok(())
    }

    fn with(&self, value: u64) -> Self {
        FieldElement { spec: self.spec, value }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same(other)?;
        Ok(self.with(self.spec.add(self.value, other.value)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same(other)?;
        Ok(self.with(self.spec.sub(self.value, other.value)))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same(other)?;
        Ok(self.with(self.spec.mul(self.value, other.value)))
    }

    pub fn square(&self) -> Self {
        self.with(self.spec.square(self.value))
    }

    pub fn inv(&self) -> Result<Self> {
        self.spec
            .inv(self.value)
            .map(|v| self.with(v))
            .ok_or(Error::DivisionByZero)
    }

    pub fn pow(&self, e: u128) -> Self {
        self.with(self.spec.pow(self.value, e))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.spec.to_bytes(self.value)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.to_bytes())
    }
}

/// Prime-field elements print in decimal, extension elements as `0x..` hex
/// of the packed coefficient word.
impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.spec.k == 1 {
            write!(f, "{}", self.value)
        } else {
            write!(f, "{:#x}", self.value)
        }
    }
}

/// Carry-less 64x64 -> 128 bit product.
#[inline]
fn clmul(a: u64, b: u64) -> u128 {
    let (mut acc, a) = (0u128, a as u128);
    let mut b = b;
    while b != 0 {
        let i = b.trailing_zeros();
        acc ^= a << i;
        b &= b - 1;
    }
    acc
}

#[inline]
fn spread_bits(a: u64) -> u128 {
    let mut x = a as u128;
    x = (x | (x << 32)) & 0x0000_0000_FFFF_FFFF_0000_0000_FFFF_FFFF;
    x = (x | (x << 16)) & 0x0000_FFFF_0000_FFFF_0000_FFFF_0000_FFFF;
    x = (x | (x << 8)) & 0x00FF_00FF_00FF_00FF_00FF_00FF_00FF_00FF;
    x = (x | (x << 4)) & 0x0F0F_0F0F_0F0F_0F0F_0F0F_0F0F_0F0F_0F0F;
    x = (x | (x << 2)) & 0x3333_3333_3333_3333_3333_3333_3333_3333;
    x = (x | (x << 1)) & 0x5555_5555_5555_5555_5555_5555_5555_5555;
    x
}

fn deg128(x: u128) -> i32 {
    127 - x.leading_zeros() as i32
}

/// Remainder of `a` by `m` in `F_2[x]`, both packed in `u128`.
fn gf2_rem(mut a: u128, m: u128) -> u128 {
    let dm = deg128(m);
    while a != 0 && deg128(a) >= dm {
        a ^= m << (deg128(a) - dm);
    }
    a
}

fn gf2_mulmod(a: u128, b: u128, m: u128) -> u128 {
    let dm = deg128(m);
    let mut acc = 0u128;
    let mut a = gf2_rem(a, m);
    let mut b = b;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if deg128(a) >= dm {
            a ^= m;
        }
    }
    acc
}

fn gf2_gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let r = gf2_rem(a, b);
        a = b;
        b = r;
    }
    a
}

fn gf2_inv_mod(a: u128, m: u128) -> u128 {
    // invariant: s * a ≡ r (mod m)
    let (mut r0, mut r1) = (m, a);
    let (mut s0, mut s1) = (0u128, 1u128);
    while r1 != 1 {
        let mut q = 0u128;
        let mut r = r0;
        let d1 = deg128(r1);
        while r != 0 && deg128(r) >= d1 {
            let shift = deg128(r) - d1;
            q ^= 1 << shift;
            r ^= r1 << shift;
        }
        let s = s0 ^ clmul_u128_low(q, s1);
        (r0, r1) = (r1, r);
        (s0, s1) = (s1, s);
    }
    gf2_rem(s1, m)
}

fn clmul_u128_low(a: u128, b: u128) -> u128 {
    let mut acc = 0u128;
    let mut b = b;
    while b != 0 {
        let i = b.trailing_zeros();
        acc ^= a << i;
        b &= b - 1;
    }
    acc
}

/// Rabin's test for a binary polynomial of degree `1..=64`.
pub(crate) fn gf2_is_irreducible(f: u128) -> bool {
    let n = deg128(f);
    if n < 1 {
        return false;
    }
    if n == 1 {
        return true;
    }
    let x = 2u128;
    let mut frob = vec![x];
    let mut t = x;
    for _ in 0..n {
        t = gf2_mulmod(t, t, f);
        frob.push(t);
    }
    if frob[n as usize] != x {
        return false;
    }
    nt::factor(n as u64).iter().all(|&(r, _)| {
        let h = frob[(n as u64 / r) as usize] ^ x;
        gf2_gcd(f, h) == 1
    })
}
