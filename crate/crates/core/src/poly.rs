//! Dense univariate polynomials over a ground field `F_q`.

use std::fmt;

use num_bigint::BigUint;
use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};
use crate::nt;

/// Polynomial with coefficients in `F_q`, constant term first, never with a
/// trailing zero coefficient (the zero polynomial has no coefficients).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    spec: FieldSpec,
    coeffs: Vec<u64>,
}

impl Poly {
    pub fn new(spec: FieldSpec, mut coeffs: Vec<u64>) -> Result<Self> {
        if let Some(c) = coeffs.iter().find(|&&c| !spec.is_canonical(c)) {
            return Err(Error::InvalidField(format!("{c:#x} is not canonical in {spec}")));
        }
        trim(&mut coeffs);
        Ok(Poly { spec, coeffs })
    }

    /// Builds from coefficients already known to be canonical.
    pub(crate) fn from_raw(spec: FieldSpec, mut coeffs: Vec<u64>) -> Self {
        debug_assert!(coeffs.iter().all(|&c| spec.is_canonical(c)));
        trim(&mut coeffs);
        Poly { spec, coeffs }
    }

    pub fn zero(spec: FieldSpec) -> Self {
        Poly { spec, coeffs: Vec::new() }
    }

    pub fn one(spec: FieldSpec) -> Self {
        Self::constant(spec, 1)
    }

    pub fn constant(spec: FieldSpec, c: u64) -> Self {
        Self::from_raw(spec, vec![c])
    }

    /// `c * x^n`.
    pub fn monomial(spec: FieldSpec, n: usize, c: u64) -> Self {
        let mut coeffs = vec![0; n + 1];
        coeffs[n] = c;
        Self::from_raw(spec, coeffs)
    }

    /// `x^d - 1`.
    pub fn x_pow_minus_one(spec: FieldSpec, d: usize) -> Self {
        let mut coeffs = vec![0; d + 1];
        coeffs[0] = spec.neg(1);
        coeffs[d] = 1;
        Self::from_raw(spec, coeffs)
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> u64 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs == [1]
    }

    pub fn lead(&self) -> u64 {
        self.coeffs.last().copied().unwrap_or(0)
    }

    pub fn is_monic(&self) -> bool {
        self.lead() == 1
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::SpecMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.add_raw(other))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.sub_raw(other))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.mul_raw(other))
    }

    pub(crate) fn add_raw(&self, other: &Self) -> Self {
        let f = &self.spec;
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|i| f.add(self.coeff(i), other.coeff(i))).collect();
        Self::from_raw(*f, coeffs)
    }

    pub(crate) fn sub_raw(&self, other: &Self) -> Self {
        let f = &self.spec;
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|i| f.sub(self.coeff(i), other.coeff(i))).collect();
        Self::from_raw(*f, coeffs)
    }

    pub(crate) fn mul_raw(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.spec);
        }
        let f = &self.spec;
        let mut out = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        Self::from_raw(*f, out)
    }

    pub fn scale(&self, c: u64) -> Self {
        let f = &self.spec;
        Self::from_raw(*f, self.coeffs.iter().map(|&a| f.mul(a, c)).collect())
    }

    pub fn monic(&self) -> Self {
        match self.spec.inv(self.lead()) {
            Some(inv) => self.scale(inv),
            None => self.clone(),
        }
    }

    /// Euclidean division: `self = q * divisor + r` with `deg r < deg divisor`.
    pub fn div_rem(&self, divisor: &Self) -> Result<(Self, Self)> {
        self.check(divisor)?;
        let f = &self.spec;
        let dd = divisor.degree().ok_or(Error::DivisionByZero)?;
        let lead_inv = f.inv(divisor.lead()).ok_or(Error::DivisionByZero)?;
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Self::zero(*f), self.clone()));
        }
        let mut quot = vec![0u64; rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            let c = f.mul(rem[i], lead_inv);
            if c == 0 {
                continue;
            }
            quot[i - dd] = c;
            for (j, &b) in divisor.coeffs.iter().enumerate() {
                let idx = i - dd + j;
                rem[idx] = f.sub(rem[idx], f.mul(c, b));
            }
        }
        rem.truncate(dd);
        Ok((Self::from_raw(*f, quot), Self::from_raw(*f, rem)))
    }

    pub fn rem(&self, divisor: &Self) -> Result<Self> {
        Ok(self.div_rem(divisor)?.1)
    }

    /// Monic gcd; `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b)?;
            a = b;
            b = r;
        }
        Ok(a.monic())
    }

    /// Extended Euclid: returns `(g, s, t)` with `s*self + t*other = g`,
    /// `g` the monic gcd.
    pub fn ext_gcd(&self, other: &Self) -> Result<(Self, Self, Self)> {
        self.check(other)?;
        let f = self.spec;
        let (mut r0, mut r1) = (self.clone(), other.clone());
        let (mut s0, mut s1) = (Self::one(f), Self::zero(f));
        let (mut t0, mut t1) = (Self::zero(f), Self::one(f));
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1)?;
            let s = s0.sub_raw(&q.mul_raw(&s1));
            let t = t0.sub_raw(&q.mul_raw(&t1));
            (r0, r1) = (r1, r);
            (s0, s1) = (s1, s);
            (t0, t1) = (t1, t);
        }
        match f.inv(r0.lead()) {
            Some(inv) => Ok((r0.scale(inv), s0.scale(inv), t0.scale(inv))),
            None => Ok((r0, s0, t0)),
        }
    }

    pub fn mul_mod(&self, other: &Self, modulus: &Self) -> Result<Self> {
        self.mul(other)?.rem(modulus)
    }

    /// `self^e mod modulus` by square-and-multiply, exponent bits given
    /// most significant first.
    fn pow_mod_bits<I: Iterator<Item = bool>>(&self, bits: I, modulus: &Self) -> Result<Self> {
        let base = self.rem(modulus)?;
        let mut acc = Self::one(self.spec).rem(modulus)?;
        for bit in bits {
            acc = acc.mul_raw(&acc).rem(modulus)?;
            if bit {
                acc = acc.mul_raw(&base).rem(modulus)?;
            }
        }
        Ok(acc)
    }

    pub fn pow_mod(&self, e: u128, modulus: &Self) -> Result<Self> {
        let n = 128 - e.leading_zeros();
        self.pow_mod_bits((0..n).rev().map(|i| (e >> i) & 1 == 1), modulus)
    }

    pub fn pow_mod_big(&self, e: &BigUint, modulus: &Self) -> Result<Self> {
        let n = e.bits();
        self.pow_mod_bits((0..n).rev().map(|i| e.bit(i)), modulus)
    }

    /// `self^q mod modulus`, the `q`-power Frobenius.
    pub fn frobenius_mod(&self, modulus: &Self) -> Result<Self> {
        self.pow_mod(self.spec.order(), modulus)
    }

    pub fn eval(&self, x: u64) -> u64 {
        let f = &self.spec;
        self.coeffs.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, x), c))
    }

    pub fn eval_element(&self, x: &FieldElement) -> Result<FieldElement> {
        if *x.spec() != self.spec {
            return Err(Error::SpecMismatch);
        }
        self.spec.element(self.eval(x.value()))
    }

    /// Irreducibility over `F_q` (Rabin's test): `x^{q^n} ≡ x (mod f)` and
    /// `gcd(x^{q^{n/r}} - x, f) = 1` for every prime `r | n`.
    pub fn is_irreducible(&self) -> Result<bool> {
        let n = match self.degree() {
            None | Some(0) => return Ok(false),
            Some(1) => return Ok(true),
            Some(n) => n,
        };
        let x = Self::monomial(self.spec, 1, 1);
        let mut frob = Vec::with_capacity(n + 1);
        frob.push(x.clone());
        for i in 0..n {
            let next = frob[i].frobenius_mod(self)?;
            frob.push(next);
        }
        if frob[n] != x {
            return Ok(false);
        }
        for (r, _) in nt::factor(n as u64) {
            let h = frob[n / r as usize].sub_raw(&x);
            if !self.gcd(&h)?.is_one() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Factors a squarefree polynomial into monic irreducibles by
    /// distinct-degree then equal-degree (Cantor–Zassenhaus) splitting.
    /// Fails with `Unsupported` if a factor degree exceeds `max_degree`.
    pub fn factor_squarefree<R: Rng + ?Sized>(
        &self,
        max_degree: usize,
        rng: &mut R,
    ) -> Result<Vec<Poly>> {
        let mut out = Vec::new();
        for (deg, block) in self.monic().distinct_degree()? {
            if deg > max_degree {
                return Err(Error::Unsupported(format!(
                    "factor of degree {deg} exceeds splitting bound {max_degree}"
                )));
            }
            block.equal_degree(deg, rng, &mut out)?;
        }
        out.sort_by(|a, b| a.degree().cmp(&b.degree()).then(a.coeffs.cmp(&b.coeffs)));
        Ok(out)
    }

    fn distinct_degree(&self) -> Result<Vec<(usize, Poly)>> {
        let x = Self::monomial(self.spec, 1, 1);
        let mut rest = self.clone();
        let mut h = x.clone();
        let mut out = Vec::new();
        let mut i = 0;
        while rest.degree().unwrap_or(0) >= 2 * (i + 1) {
            i += 1;
            h = h.frobenius_mod(&rest)?;
            let g = rest.gcd(&h.sub_raw(&x))?;
            if !g.is_one() {
                rest = rest.div_rem(&g)?.0;
                h = h.rem(&rest)?;
                out.push((i, g));
            }
        }
        if let Some(deg) = rest.degree().filter(|&d| d > 0) {
            out.push((deg, rest.monic()));
        }
        Ok(out)
    }

    fn equal_degree<R: Rng + ?Sized>(
        &self,
        deg: usize,
        rng: &mut R,
        out: &mut Vec<Poly>,
    ) -> Result<()> {
        let n = self.degree().unwrap_or(0);
        if n == deg {
            out.push(self.monic());
            return Ok(());
        }
        let f = self.spec;
        loop {
            let r = Self::from_raw(f, (0..n).map(|_| f.random(rng)).collect());
            if r.degree().unwrap_or(0) < 1 {
                continue;
            }
            let candidate = if f.is_binary() {
                // absolute trace r + r^2 + ... + r^{2^{k*deg - 1}}
                let mut t = r.clone();
                let mut acc = r.clone();
                for _ in 1..(f.k() as usize * deg) {
                    t = t.mul_raw(&t).rem(self)?;
                    acc = acc.add_raw(&t);
                }
                acc
            } else {
                let e = (BigUint::from(f.order() as u64).pow(deg as u32) - 1u32) >> 1;
                r.pow_mod_big(&e, self)?.sub_raw(&Self::one(f))
            };
            let g = self.gcd(&candidate)?;
            let gd = g.degree().unwrap_or(0);
            if gd > 0 && gd < n {
                g.equal_degree(deg, rng, out)?;
                self.div_rem(&g)?.0.equal_degree(deg, rng, out)?;
                return Ok(());
            }
        }
    }

    /// Brute-force cyclotomic polynomial `Φ_n` over the integers reduced into
    /// `F_q`, via `Φ_n = ∏_{e | n} (x^e - 1)^{μ(n/e)}`.
    pub fn cyclotomic(spec: FieldSpec, n: usize) -> Self {
        let coeffs = cyclotomic_integer(n);
        let p = spec.p() as i64;
        let reduced = coeffs
            .into_iter()
            .map(|c| spec.from_integer(c.rem_euclid(p) as u64))
            .collect();
        Self::from_raw(spec, reduced)
    }
}

/// `Φ_n` with integer coefficients, constant term first.
fn cyclotomic_integer(n: usize) -> Vec<i64> {
    let mut num = vec![1i64];
    let mut den = vec![1i64];
    for e in (1..=n).filter(|e| n % e == 0) {
        let mut factor = vec![0i64; e + 1];
        factor[0] = -1;
        factor[e] = 1;
        match mobius(n / e) {
            1 => num = int_mul(&num, &factor),
            -1 => den = int_mul(&den, &factor),
            _ => {}
        }
    }
    int_exact_div(&num, &den)
}

fn mobius(mut n: usize) -> i32 {
    let mut sign = 1;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

fn int_mul(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut out = vec![0i64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Division of integer polynomials by a monic divisor with zero remainder.
fn int_exact_div(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let mut q = vec![0i64; num.len() - dd];
    for i in (dd..rem.len()).rev() {
        let c = rem[i];
        q[i - dd] = c;
        for (j, &b) in den.iter().enumerate() {
            rem[i - dd + j] -= c * b;
        }
    }
    debug_assert!(rem.iter().all(|&c| c == 0));
    q
}

fn trim(coeffs: &mut Vec<u64>) {
    while coeffs.last() == Some(&0) {
        coeffs.pop();
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let coeff = if self.spec.k() == 1 {
                c.to_string()
            } else {
                format!("{c:#x}")
            };
            match (i, c) {
                (0, _) => f.write_str(&coeff)?,
                (1, 1) => f.write_str("x")?,
                (_, 1) => write!(f, "x^{i}")?,
                (1, _) => write!(f, "{coeff}*x")?,
                _ => write!(f, "{coeff}*x^{i}")?,
            }
        }
        Ok(())
    }
}

/// Raw product of a list of polynomials.
pub fn product(spec: FieldSpec, polys: &[Poly]) -> Poly {
    polys.iter().fold(Poly::one(spec), |acc, p| acc.mul_raw(p))
}
