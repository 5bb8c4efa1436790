//! Diffie-Hellman key agreement and textbook ElGamal over `⟨A⟩`.
//!
//! Textbook ElGamal is malleable: the componentwise product of two
//! ciphertexts decrypts to the product of their plaintext blocks. This is a
//! demonstration scheme, not a production one; there is no padding, KEM/DEM
//! construction or authentication.

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circulant::Circulant;
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::params::{ParamSet, ParamSetFile};

const HEADER_LEN: usize = 2;

/// Uniform exponent in `[2, 2^bits)`.
pub fn random_exponent<R: Rng + ?Sized>(rng: &mut R, bits: u32) -> Result<BigUint> {
    let hi = BigUint::one() << bits;
    let lo = BigUint::from(2u8);
    if hi <= lo {
        return Err(Error::InvalidParams(format!(
            "exponent range [2, 2^{bits}) is empty"
        )));
    }
    Ok(rng.gen_biguint_range(&lo, &hi))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyPair {
    pub params: ParamSet,
    pub secret_m: BigUint,
    pub public: Circulant,
}

impl KeyPair {
    pub fn from_secret(params: &ParamSet, secret_m: BigUint) -> Result<Self> {
        params.ensure_valid()?;
        let public = params.generator.pow(&secret_m);
        Ok(KeyPair {
            params: params.clone(),
            secret_m,
            public,
        })
    }

    /// Whether the stored public value is `A^m`.
    pub fn is_consistent(&self) -> bool {
        self.params.generator.pow(&self.secret_m) == self.public
    }

    pub fn to_file(&self) -> KeyFile {
        KeyFile {
            params: self.params.to_file(),
            secret_m_hex: Some(self.secret_m.to_str_radix(16)),
            public_hex: self.public.to_hex(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("serializable")
    }
}

/// Key file: the parameter-set fields plus `public_hex` and, for a private
/// key, `secret_m_hex`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyFile {
    #[serde(flatten)]
    pub params: ParamSetFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secret_m_hex: Option<String>,
    pub public_hex: String,
}

impl KeyFile {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn public_key(&self) -> Result<(ParamSet, Circulant)> {
        let params = ParamSet::from_file(&self.params)?;
        let public = Circulant::from_hex(params.spec, &self.public_hex)?;
        check_shape(&params, &public)?;
        Ok((params, public))
    }

    /// Loads the private key and checks the public value against it.
    pub fn key_pair(&self) -> Result<KeyPair> {
        let (params, public) = self.public_key()?;
        let hex = self
            .secret_m_hex
            .as_deref()
            .ok_or_else(|| Error::Decode("key file has no secret_m_hex".into()))?;
        let secret_m = BigUint::parse_bytes(hex.trim().as_bytes(), 16)
            .ok_or_else(|| Error::Decode(format!("secret_m_hex {hex:?} is not hex")))?;
        let kp = KeyPair::from_secret(&params, secret_m)?;
        if kp.public != public {
            return Err(Error::Decode("public_hex does not match secret_m_hex".into()));
        }
        Ok(kp)
    }
}

/// Secret exponent uniform in `[2, 2^exp_bits)`, public `A^m`.
pub fn keygen<R: Rng + ?Sized>(params: &ParamSet, rng: &mut R) -> Result<KeyPair> {
    params.ensure_valid()?;
    let m = random_exponent(rng, params.policy.exp_bits)?;
    KeyPair::from_secret(params, m)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SharedSecret {
    pub value: Circulant,
    /// The peer value or the result is the identity.
    pub degenerate: bool,
}

impl SharedSecret {
    /// Canonical serialization; key derivation is left to the caller.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.value.to_bytes()
    }
}

/// `their_public^my_secret`; a non-invertible peer value is rejected.
pub fn dh_shared(my_secret: &BigUint, their_public: &Circulant) -> Result<SharedSecret> {
    if !their_public.is_unit() {
        return Err(Error::InvalidInstance(
            "peer public value is not invertible".into(),
        ));
    }
    let value = their_public.pow(my_secret);
    let degenerate = their_public.is_identity() || value.is_identity();
    Ok(SharedSecret { value, degenerate })
}

/// Bytes that fit in one block: the largest `B` with `2^{8B} <= q^{d-1}`,
/// less the 2-byte length header. `None` when not even the header fits.
pub fn message_capacity(spec: FieldSpec, d: usize) -> Option<usize> {
    let block = block_bytes(spec, d);
    block.checked_sub(HEADER_LEN)
}

fn block_bytes(spec: FieldSpec, d: usize) -> usize {
    let space = BigUint::from(spec.order()).pow(d as u32 - 1);
    ((space.bits() - 1) / 8) as usize
}

/// `[len_hi, len_lo, payload, 0...]` read as a big-endian integer and
/// written in base `q` into `c_1, ..., c_{d-1}` (most significant first);
/// `c_0 = 0`.
pub fn encode_message(spec: FieldSpec, d: usize, msg: &[u8]) -> Result<Circulant> {
    let capacity = message_capacity(spec, d).unwrap_or(0);
    if msg.len() > capacity || message_capacity(spec, d).is_none() {
        return Err(Error::MessageTooLong {
            len: msg.len(),
            capacity,
        });
    }
    let mut block = vec![0u8; block_bytes(spec, d)];
    block[..HEADER_LEN].copy_from_slice(&(msg.len() as u16).to_be_bytes());
    block[HEADER_LEN..HEADER_LEN + msg.len()].copy_from_slice(msg);
    let value = BigUint::from_bytes_be(&block);
    let q = BigUint::from(spec.order());
    let mut row = vec![0u64; d];
    let mut rest = value;
    for slot in row[1..].iter_mut().rev() {
        let digit = &rest % &q;
        *slot = u64::try_from(&digit).expect("digit below q");
        rest /= &q;
    }
    debug_assert!(rest.is_zero());
    Circulant::new(spec, row)
}

pub fn decode_message(block: &Circulant) -> Result<Vec<u8>> {
    let spec = *block.spec();
    let d = block.d();
    let capacity = message_capacity(spec, d).ok_or(Error::MalformedMessage("dimension too small for a header"))?;
    let row = block.coeffs();
    if row[0] != 0 {
        return Err(Error::MalformedMessage("nonzero c_0"));
    }
    let q = BigUint::from(spec.order());
    let value = row[1..]
        .iter()
        .fold(BigUint::zero(), |acc, &c| acc * &q + c);
    let width = block_bytes(spec, d);
    if value.bits() > 8 * width as u64 {
        return Err(Error::MalformedMessage("block out of range"));
    }
    let raw = if value.is_zero() { Vec::new() } else { value.to_bytes_be() };
    let mut bytes = vec![0u8; width - raw.len()];
    bytes.extend(raw);
    let len = u16::from_be_bytes([bytes[0], bytes[1]]) as usize;
    if len > capacity {
        return Err(Error::MalformedMessage("length header exceeds capacity"));
    }
    let (payload, padding) = bytes[HEADER_LEN..].split_at(len);
    if padding.iter().any(|&b| b != 0) {
        return Err(Error::MalformedMessage("nonzero padding"));
    }
    Ok(payload.to_vec())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ciphertext {
    pub c1: Circulant,
    pub c2: Circulant,
}

impl Ciphertext {
    /// `d` (4 bytes, big-endian), then the serializations of `c1` and `c2`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = (self.c1.d() as u32).to_be_bytes().to_vec();
        out.extend(self.c1.to_bytes());
        out.extend(self.c2.to_bytes());
        out
    }

    pub fn from_bytes(spec: FieldSpec, bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 4 {
            return Err(Error::Decode("ciphertext too short".into()));
        }
        let d = u32::from_be_bytes(bytes[..4].try_into().unwrap()) as usize;
        let (c1, rest) = Circulant::read_prefix(spec, &bytes[4..])?;
        let c2 = Circulant::from_bytes(spec, rest)?;
        if c1.d() != d || c2.d() != d {
            return Err(Error::Decode("ciphertext dimensions disagree".into()));
        }
        Ok(Ciphertext { c1, c2 })
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.to_bytes())
    }

    pub fn from_hex(spec: FieldSpec, s: &str) -> Result<Self> {
        Self::from_bytes(spec, &hex::decode(s.trim())?)
    }

    /// Componentwise product; decrypts to the product of the two blocks.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        Ok(Ciphertext {
            c1: self.c1.mul(&other.c1)?,
            c2: self.c2.mul(&other.c2)?,
        })
    }
}

fn check_shape(params: &ParamSet, c: &Circulant) -> Result<()> {
    if c.d() != params.d || *c.spec() != params.spec {
        return Err(Error::SpecMismatch);
    }
    Ok(())
}

/// `(A^r, M · B^r)` with fresh `r` in `[2, 2^exp_bits)`.
pub fn elgamal_encrypt_block<R: Rng + ?Sized>(
    params: &ParamSet,
    public: &Circulant,
    block: &Circulant,
    rng: &mut R,
) -> Result<Ciphertext> {
    check_shape(params, public)?;
    check_shape(params, block)?;
    let r = random_exponent(rng, params.policy.exp_bits)?;
    Ok(Ciphertext {
        c1: params.generator.pow(&r),
        c2: block.mul(&public.pow(&r))?,
    })
}

/// `c2 · (c1^m)^{-1}`, the inverse taken by the extended Euclidean
/// algorithm.
pub fn elgamal_decrypt_block(kp: &KeyPair, ct: &Ciphertext) -> Result<Circulant> {
    check_shape(&kp.params, &ct.c1)?;
    check_shape(&kp.params, &ct.c2)?;
    let mask = ct.c1.pow(&kp.secret_m).inverse()?;
    ct.c2.mul(&mask)
}

pub fn elgamal_encrypt<R: Rng + ?Sized>(
    params: &ParamSet,
    public: &Circulant,
    message: &[u8],
    rng: &mut R,
) -> Result<Ciphertext> {
    let block = encode_message(params.spec, params.d, message)?;
    elgamal_encrypt_block(params, public, &block, rng)
}

pub fn elgamal_decrypt(kp: &KeyPair, ct: &Ciphertext) -> Result<Vec<u8>> {
    decode_message(&elgamal_decrypt_block(kp, ct)?)
}
