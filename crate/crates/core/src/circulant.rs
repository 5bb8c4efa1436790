//! The circulant ring `R = F_q[x]/(x^d - 1)`.
//!
//! A [`Circulant`] is stored as its first row `(c_0, ..., c_{d-1})`, which
//! is also the coefficient vector of its representer polynomial
//! `φ_C = c_0 + c_1 x + ... + c_{d-1} x^{d-1}`. Matrix product of two
//! circulants is cyclic convolution of their first rows.

use std::fmt;

use num_bigint::BigUint;
use rand::Rng;

use crate::counter::OpCounter;
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};
use crate::par::{self, Parallelism};
use crate::params::build_psi;
use crate::poly::Poly;

/// How [`Circulant::mul_with`] computes the convolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MulStrategy {
    /// Packed shift-XOR over `F_2`, generic convolution elsewhere.
    Auto,
    /// Entry-by-entry convolution, `d^2` field multiplications.
    Generic(Parallelism),
    /// Rows packed as bit vectors; `F_2` only.
    Packed,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Circulant {
    spec: FieldSpec,
    row: Vec<u64>,
}

/// The permutation `π` with `A^2 = circ(a_{π(0)}^2, ..., a_{π(d-1)}^2)` in
/// characteristic 2: `table[j] = 2^{-1} j mod d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquarePermutation {
    d: usize,
    table: Vec<usize>,
}

impl SquarePermutation {
    pub fn new(d: usize) -> Result<Self> {
        if d < 3 || d % 2 == 0 {
            return Err(Error::UnsupportedDimension {
                d,
                reason: "squaring permutation needs odd d >= 3",
            });
        }
        let inv2 = d.div_ceil(2);
        let table = (0..d).map(|j| inv2 * j % d).collect();
        Ok(SquarePermutation { d, table })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }
}

/// Image of a circulant under `R ≅ F_q[x]/(x-1) × F_q[x]/ψ(x)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrtPair {
    /// `φ mod (x - 1) = φ(1)`, the row-sum.
    pub at_one: FieldElement,
    /// `φ mod ψ`, degree below `d - 1`.
    pub residue: Poly,
}

impl Circulant {
    pub fn new(spec: FieldSpec, row: Vec<u64>) -> Result<Self> {
        if row.len() < 2 {
            return Err(Error::DimensionTooSmall(row.len()));
        }
        if let Some(c) = row.iter().find(|&&c| !spec.is_canonical(c)) {
            return Err(Error::InvalidField(format!("{c:#x} is not canonical in {spec}")));
        }
        Ok(Circulant { spec, row })
    }

    pub fn from_elements(row: &[FieldElement]) -> Result<Self> {
        let spec = *row.first().ok_or(Error::DimensionTooSmall(0))?.spec();
        if row.iter().any(|e| *e.spec() != spec) {
            return Err(Error::SpecMismatch);
        }
        Self::new(spec, row.iter().map(|e| e.value()).collect())
    }

    fn unit_vector(spec: FieldSpec, d: usize, i: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::DimensionTooSmall(d));
        }
        let mut row = vec![0; d];
        row[i] = 1;
        Ok(Circulant { spec, row })
    }

    pub fn identity(spec: FieldSpec, d: usize) -> Result<Self> {
        Self::unit_vector(spec, d, 0)
    }

    pub fn zero(spec: FieldSpec, d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::DimensionTooSmall(d));
        }
        Ok(Circulant { spec, row: vec![0; d] })
    }

    /// The cyclic shift `W = circ(0, 1, 0, ..., 0)`; `W^d = I`.
    pub fn shift(spec: FieldSpec, d: usize) -> Result<Self> {
        Self::unit_vector(spec, d, 1 % d.max(1))
    }

    /// Reduces a polynomial modulo `x^d - 1` into a circulant.
    pub fn from_poly(poly: &Poly, d: usize) -> Result<Self> {
        let spec = *poly.spec();
        let mut row = vec![0u64; d.max(2)];
        if d < 2 {
            return Err(Error::DimensionTooSmall(d));
        }
        for (i, &c) in poly.coeffs().iter().enumerate() {
            row[i % d] = spec.add(row[i % d], c);
        }
        Ok(Circulant { spec, row })
    }

    pub fn random<R: Rng + ?Sized>(spec: FieldSpec, d: usize, rng: &mut R) -> Result<Self> {
        Self::new(spec, (0..d).map(|_| spec.random(rng)).collect())
    }

    pub fn d(&self) -> usize {
        self.row.len()
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    /// Raw canonical entries of the first row.
    pub fn coeffs(&self) -> &[u64] {
        &self.row
    }

    pub fn entry(&self, i: usize) -> FieldElement {
        self.spec.element(self.row[i]).expect("entries are canonical")
    }

    pub fn row(&self) -> Vec<FieldElement> {
        (0..self.d()).map(|i| self.entry(i)).collect()
    }

    pub fn representer(&self) -> Poly {
        Poly::from_raw(self.spec, self.row.clone())
    }

    pub fn is_identity(&self) -> bool {
        self.row[0] == 1 && self.row[1..].iter().all(|&c| c == 0)
    }

    pub fn is_zero(&self) -> bool {
        self.row.iter().all(|&c| c == 0)
    }

    /// Full `d × d` matrix: entry `(i, j)` is `c_{(j - i) mod d}`, so each
    /// row is the right circular shift of the one above.
    pub fn expand(&self) -> Vec<Vec<FieldElement>> {
        self.expand_raw()
            .into_iter()
            .map(|r| r.into_iter().map(|v| self.spec.element(v).unwrap()).collect())
            .collect()
    }

    pub(crate) fn expand_raw(&self) -> Vec<Vec<u64>> {
        let d = self.d();
        (0..d)
            .map(|i| (0..d).map(|j| self.row[(j + d - i) % d]).collect())
            .collect()
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.spec != other.spec || self.d() != other.d() {
            return Err(Error::SpecMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let f = &self.spec;
        let row = self.row.iter().zip(&other.row).map(|(&a, &b)| f.add(a, b)).collect();
        Ok(Circulant { spec: self.spec, row })
    }

    /// Ring product (cyclic convolution).
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.mul_with(other, MulStrategy::Auto, None)
    }

    pub fn mul_counted(&self, other: &Self, counter: &OpCounter) -> Result<Self> {
        self.mul_with(other, MulStrategy::Auto, Some(counter))
    }

    /// Product under an explicit strategy. Counts one group multiplication
    /// plus `d^2` field multiplications and `d(d-1)` field additions.
    pub fn mul_with(
        &self,
        other: &Self,
        strategy: MulStrategy,
        counter: Option<&OpCounter>,
    ) -> Result<Self> {
        let out = self.convolve(other, strategy, counter)?;
        if let Some(c) = counter {
            c.add_group_mults(1);
        }
        Ok(out)
    }

    fn convolve(
        &self,
        other: &Self,
        strategy: MulStrategy,
        counter: Option<&OpCounter>,
    ) -> Result<Self> {
        self.check(other)?;
        let d = self.d();
        let is_f2 = self.spec.is_binary() && self.spec.k() == 1;
        let row = match strategy {
            MulStrategy::Packed if !is_f2 => {
                return Err(Error::Unsupported(format!(
                    "packed convolution needs F_2, not {}",
                    self.spec
                )))
            }
            MulStrategy::Packed => packed_mul(&self.row, &other.row),
            MulStrategy::Auto if is_f2 => packed_mul(&self.row, &other.row),
            MulStrategy::Auto => generic_mul(
                &self.spec,
                &self.row,
                &other.row,
                Parallelism::for_size(d, par::PAR_MIN_DIM),
            ),
            MulStrategy::Generic(mode) => generic_mul(&self.spec, &self.row, &other.row, mode),
        };
        if let Some(c) = counter {
            let d = d as u64;
            c.add_field_mults(d * d);
            c.add_field_adds(d * (d - 1));
        }
        Ok(Circulant { spec: self.spec, row })
    }

    /// Squaring in characteristic 2 for odd `d`: `d` field squarings placed
    /// by the [`SquarePermutation`]; no field multiplication.
    pub fn square_char2(&self) -> Result<Self> {
        let perm = SquarePermutation::new(self.d())?;
        self.square_char2_with(&perm, None)
    }

    pub fn square_char2_with(
        &self,
        perm: &SquarePermutation,
        counter: Option<&OpCounter>,
    ) -> Result<Self> {
        if !self.spec.is_binary() {
            return Err(Error::UnsupportedCharacteristic(self.spec.p()));
        }
        if perm.d() != self.d() {
            return Err(Error::SpecMismatch);
        }
        let f = &self.spec;
        let row = perm.table.iter().map(|&i| f.square(self.row[i])).collect();
        if let Some(c) = counter {
            c.add_field_squares(self.d() as u64);
            c.add_group_squares(1);
        }
        Ok(Circulant { spec: self.spec, row })
    }

    /// Whether squaring can take the permutation path.
    pub fn has_fast_square(&self) -> bool {
        self.spec.is_binary() && self.d() % 2 == 1
    }

    /// `self^2`, through the permutation path whenever it applies.
    pub fn square(&self) -> Self {
        self.pow_bits([true, false].into_iter(), None)
    }

    pub fn pow(&self, e: &BigUint) -> Self {
        self.pow_counted(e, None)
    }

    pub fn pow_u64(&self, e: u64) -> Self {
        let n = 64 - e.leading_zeros();
        self.pow_bits((0..n).rev().map(|i| (e >> i) & 1 == 1), None)
    }

    /// Left-to-right square-and-multiply. For an exponent of bit length
    /// `L` and weight `w` this does exactly `L - 1` squarings and `w - 1`
    /// multiplications.
    pub fn pow_counted(&self, e: &BigUint, counter: Option<&OpCounter>) -> Self {
        let n = e.bits();
        self.pow_bits((0..n).rev().map(|i| e.bit(i)), counter)
    }

    /// Exponent bits most significant first; the leading bit must be set.
    fn pow_bits<I: Iterator<Item = bool>>(&self, mut bits: I, counter: Option<&OpCounter>) -> Self {
        match bits.next() {
            None => return Circulant::identity(self.spec, self.d()).unwrap(),
            Some(top) => debug_assert!(top),
        }
        let perm = self
            .has_fast_square()
            .then(|| SquarePermutation::new(self.d()).unwrap());
        let mut acc = self.clone();
        for bit in bits {
            acc = match &perm {
                Some(perm) => acc.square_char2_with(perm, counter).unwrap(),
                None => {
                    let sq = acc.convolve(&acc, MulStrategy::Auto, counter).unwrap();
                    if let Some(c) = counter {
                        c.add_group_squares(1);
                    }
                    sq
                }
            };
            if bit {
                acc = acc.mul_with(self, MulStrategy::Auto, counter).unwrap();
            }
        }
        acc
    }

    /// Inverse via the extended Euclidean algorithm on `(φ, x^d - 1)`.
    pub fn inverse(&self) -> Result<Self> {
        let modulus = Poly::x_pow_minus_one(self.spec, self.d());
        let (g, s, _) = self.representer().ext_gcd(&modulus)?;
        if !g.is_one() {
            return Err(Error::NotInvertible { gcd: g });
        }
        Self::from_poly(&s.rem(&modulus)?, self.d())
    }

    pub fn is_unit(&self) -> bool {
        let modulus = Poly::x_pow_minus_one(self.spec, self.d());
        self.representer()
            .gcd(&modulus)
            .map(|g| g.is_one())
            .unwrap_or(false)
    }

    /// Common row sum `φ(1)`; an eigenvalue in the ground field.
    pub fn row_sum(&self) -> FieldElement {
        let f = &self.spec;
        let s = self.row.iter().fold(0, |acc, &c| f.add(acc, c));
        f.element(s).unwrap()
    }

    /// Determinant of the expansion by Gaussian elimination.
    pub fn det(&self) -> FieldElement {
        let v = if self.spec.is_binary() && self.spec.k() == 1 {
            det_f2(&self.row)
        } else {
            det_generic(&self.spec, self.expand_raw())
        };
        self.spec.element(v).unwrap()
    }

    /// `(φ(1), φ mod ψ)`; needs `gcd(d, q) = 1` and `psi = (x^d - 1)/(x - 1)`.
    pub fn crt_split(&self, psi: &Poly) -> Result<CrtPair> {
        check_psi(&self.spec, self.d(), psi)?;
        Ok(CrtPair {
            at_one: self.row_sum(),
            residue: self.representer().rem(psi)?,
        })
    }

    /// Unique circulant with the given CRT coordinates:
    /// `f = r + ψ · (u - r(1)) · d^{-1}`.
    pub fn crt_lift(pair: &CrtPair, d: usize, psi: &Poly) -> Result<Self> {
        let spec = *psi.spec();
        if *pair.at_one.spec() != spec || *pair.residue.spec() != spec {
            return Err(Error::SpecMismatch);
        }
        check_psi(&spec, d, psi)?;
        if pair.residue.degree().is_some_and(|deg| deg + 1 >= d) {
            return Err(Error::InvalidParams(format!(
                "residue must have degree below {}",
                d - 1
            )));
        }
        let r = &pair.residue;
        let d_inv = spec.inv(spec.from_integer(d as u64)).ok_or(Error::InseparableModulus {
            d,
            p: spec.p(),
        })?;
        let c = spec.mul(spec.sub(pair.at_one.value(), r.eval(1)), d_inv);
        let f = r.add_raw(&psi.scale(c));
        Self::from_poly(&f, d)
    }

    /// 4-byte big-endian `d` followed by each entry's canonical bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = (self.d() as u32).to_be_bytes().to_vec();
        for &c in &self.row {
            out.extend(self.spec.to_bytes(c));
        }
        out
    }

    pub fn from_bytes(spec: FieldSpec, bytes: &[u8]) -> Result<Self> {
        let (c, rest) = Self::read_prefix(spec, bytes)?;
        if !rest.is_empty() {
            return Err(Error::Decode(format!("{} trailing bytes", rest.len())));
        }
        Ok(c)
    }

    /// Decodes one circulant from the front of `bytes`, returning the rest.
    pub fn read_prefix(spec: FieldSpec, bytes: &[u8]) -> Result<(Self, &[u8])> {
        if bytes.len() < 4 {
            return Err(Error::Decode("missing dimension header".into()));
        }
        let d = u32::from_be_bytes(bytes[..4].try_into().unwrap()) as usize;
        let w = spec.byte_len();
        let need = d
            .checked_mul(w)
            .and_then(|n| n.checked_add(4))
            .ok_or_else(|| Error::Decode("dimension overflow".into()))?;
        if bytes.len() < need {
            return Err(Error::Decode(format!(
                "need {need} bytes for d = {d}, got {}",
                bytes.len()
            )));
        }
        let row = bytes[4..need]
            .chunks(w)
            .map(|ch| spec.from_bytes(ch))
            .collect::<Result<Vec<_>>>()?;
        Ok((Self::new(spec, row)?, &bytes[need..]))
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.to_bytes())
    }

    pub fn from_hex(spec: FieldSpec, s: &str) -> Result<Self> {
        Self::from_bytes(spec, &hex::decode(s.trim())?)
    }
}

impl fmt::Display for Circulant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("circ(")?;
        for (i, e) in self.row().iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str(")")
    }
}

fn check_psi(spec: &FieldSpec, d: usize, psi: &Poly) -> Result<()> {
    if d as u64 % spec.p() == 0 {
        return Err(Error::InseparableModulus { d, p: spec.p() });
    }
    if *psi != build_psi(d, *spec)? {
        return Err(Error::InvalidParams(format!(
            "psi must be (x^{d} - 1)/(x - 1), got {psi}"
        )));
    }
    Ok(())
}

/// `out[j] = Σ_i a[i] · b[(j - i) mod d]` with one reduction per output.
fn generic_mul(f: &FieldSpec, a: &[u64], b: &[u64], mode: Parallelism) -> Vec<u64> {
    let d = a.len();
    par::map_range(d, mode, |j| {
        let mut acc = 0u128;
        for i in 0..=j {
            acc = f.acc_wide(acc, f.mul_wide(a[i], b[j - i]));
        }
        for i in j + 1..d {
            acc = f.acc_wide(acc, f.mul_wide(a[i], b[j + d - i]));
        }
        f.reduce_wide(acc)
    })
}

/// Convolution over `F_2` on bit-packed rows: XOR of the rotations of `b`
/// selected by the set bits of `a`.
fn packed_mul(a: &[u64], b: &[u64]) -> Vec<u64> {
    let d = a.len();
    let words = d.div_ceil(64);
    // b twice in a row so every rotation is a contiguous window
    let mut doubled = vec![0u64; (2 * d).div_ceil(64) + 2];
    for (j, &bit) in b.iter().enumerate() {
        if bit == 1 {
            doubled[j / 64] |= 1 << (j % 64);
            doubled[(j + d) / 64] |= 1 << ((j + d) % 64);
        }
    }
    let mut acc = vec![0u64; words];
    for (i, _) in a.iter().enumerate().filter(|(_, &bit)| bit == 1) {
        let start = (d - i) % d;
        let (w0, sh) = (start / 64, start % 64);
        for (w, slot) in acc.iter_mut().enumerate() {
            let lo = doubled[w0 + w] >> sh;
            let hi = if sh == 0 { 0 } else { doubled[w0 + w + 1] << (64 - sh) };
            *slot ^= lo | hi;
        }
    }
    (0..d).map(|j| (acc[j / 64] >> (j % 64)) & 1).collect()
}

fn det_f2(row: &[u64]) -> u64 {
    let d = row.len();
    let words = d.div_ceil(64);
    let mut m: Vec<Vec<u64>> = (0..d)
        .map(|i| {
            let mut r = vec![0u64; words];
            for j in 0..d {
                if row[(j + d - i) % d] == 1 {
                    r[j / 64] |= 1 << (j % 64);
                }
            }
            r
        })
        .collect();
    for col in 0..d {
        let (w, b) = (col / 64, col % 64);
        let Some(pivot) = (col..d).find(|&r| (m[r][w] >> b) & 1 == 1) else {
            return 0;
        };
        m.swap(col, pivot);
        let (top, bottom) = m.split_at_mut(col + 1);
        let prow = &top[col];
        for r in bottom.iter_mut().filter(|r| (r[w] >> b) & 1 == 1) {
            for (x, y) in r.iter_mut().zip(prow).skip(w) {
                *x ^= y;
            }
        }
    }
    1
}

pub(crate) fn det_generic(f: &FieldSpec, mut m: Vec<Vec<u64>>) -> u64 {
    let d = m.len();
    let mut det = 1u64;
    for col in 0..d {
        let Some(pivot) = (col..d).find(|&r| m[r][col] != 0) else {
            return 0;
        };
        if pivot != col {
            m.swap(col, pivot);
            det = f.neg(det);
        }
        let pv = m[col][col];
        det = f.mul(det, pv);
        let inv = f.inv(pv).unwrap();
        let (top, bottom) = m.split_at_mut(col + 1);
        let prow = &top[col];
        for r in bottom.iter_mut() {
            let factor = f.mul(r[col], inv);
            if factor == 0 {
                continue;
            }
            for j in col..d {
                r[j] = f.sub(r[j], f.mul(factor, prow[j]));
            }
        }
    }
    det
}
