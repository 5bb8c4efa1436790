//! Parameter sets `(q, d, ψ, A)` and their validation.
//!
//! A parameter set is sound when the circulant discrete log in `⟨A⟩` carries
//! no ground-field leak and reduces to a discrete log in `F_{q^{d-1}}`:
//!
//! | key | condition |
//! |-----|-----------|
//! | (i)   | `det A = 1` |
//! | (ii)  | every row of `A` sums to 1 |
//! | (iii) | `χ_A(x)/(x - 1)` is irreducible |
//! | (iv)  | `d` is prime |
//! | (v)   | `φ_A mod (x - 1) = 1` |
//! | (vi)  | `q` is a primitive root mod `d` |
//!
//! plus `gcd(d, q) = 1`, `ψ` irreducible, `A` invertible and a lower bound on
//! the order of `A mod ψ`.

use std::sync::OnceLock;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::attack::char_poly;
use crate::circulant::{Circulant, CrtPair};
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::nt;
use crate::poly::Poly;

pub use crate::nt::{is_prime, multiplicative_order};

pub const DEFAULT_MIN_ORDER_BITS: u32 = 40;
pub const DEFAULT_EXP_BITS: u32 = 160;
/// Small prime factors of `q^{d-1} - 1` are found by trial division up to
/// this bound.
pub const TRIAL_DIVISION_BOUND: u64 = 1_000_000;
/// Above this dimension condition (iii) is evaluated through the subfield
/// test on `A mod ψ` instead of an explicit characteristic polynomial.
pub const CHARPOLY_MAX_D: usize = 128;
const GENERATOR_ATTEMPTS: usize = 1000;

/// Whether `q` generates `(Z/dZ)^*`, i.e. `Φ_d` is irreducible over `F_q`.
pub fn is_q_primitive_mod_d(q: u128, d: u64) -> Result<bool> {
    if !is_prime(d) {
        return Err(Error::NotPrime(d));
    }
    let q_mod = (q % d as u128) as u64;
    Ok(multiplicative_order(q_mod, d)? == d - 1)
}

/// `ψ(x) = (x^d - 1)/(x - 1) = 1 + x + ... + x^{d-1}`.
pub fn build_psi(d: usize, spec: FieldSpec) -> Result<Poly> {
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    Ok(Poly::from_raw(spec, vec![1; d]))
}

pub fn is_irreducible(f: &Poly) -> Result<bool> {
    f.is_irreducible()
}

/// One boolean per condition, evaluated independently.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checks {
    #[serde(rename = "i_det_one")]
    pub det_one: bool,
    #[serde(rename = "ii_row_sum_one")]
    pub row_sum_one: bool,
    #[serde(rename = "iii_charpoly_quotient_irreducible")]
    pub charpoly_quotient_irreducible: bool,
    #[serde(rename = "iv_d_prime")]
    pub d_prime: bool,
    #[serde(rename = "v_phi_mod_x_minus_1_is_one")]
    pub phi_at_one: bool,
    #[serde(rename = "vi_q_primitive_mod_d")]
    pub q_primitive_mod_d: bool,
    pub psi_irreducible: bool,
    pub gcd_d_q_one: bool,
    pub generator_invertible: bool,
    pub generator_order: bool,
}

impl Checks {
    pub fn all_pass(&self) -> bool {
        self.failures().is_empty()
    }

    /// Keys of the failing checks, in table order.
    pub fn failures(&self) -> Vec<&'static str> {
        [
            (self.det_one, "i_det_one"),
            (self.row_sum_one, "ii_row_sum_one"),
            (self.charpoly_quotient_irreducible, "iii_charpoly_quotient_irreducible"),
            (self.d_prime, "iv_d_prime"),
            (self.phi_at_one, "v_phi_mod_x_minus_1_is_one"),
            (self.q_primitive_mod_d, "vi_q_primitive_mod_d"),
            (self.psi_irreducible, "psi_irreducible"),
            (self.gcd_d_q_one, "gcd_d_q_one"),
            (self.generator_invertible, "generator_invertible"),
            (self.generator_order, "generator_order"),
        ]
        .into_iter()
        .filter_map(|(ok, key)| (!ok).then_some(key))
        .collect()
    }
}

/// How condition (iii) was decided.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuotientMethod {
    CharPoly,
    SubfieldTest,
}

/// What is known about the multiplicative order of `A mod ψ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderBound {
    /// Decimal lower bound (the exact order when `exact`).
    pub lower_bound: String,
    pub lower_bound_bits: u64,
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Checks,
    pub passed: bool,
    pub failures: Vec<String>,
    pub min_order_bits: u32,
    pub quotient_method: QuotientMethod,
    pub multiplicative_order_q_mod_d: Option<u64>,
    pub generator_order: Option<OrderBound>,
}

/// Policy knobs carried with a parameter set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Policy {
    pub min_order_bits: u32,
    pub exp_bits: u32,
}

impl Default for Policy {
    fn default() -> Self {
        Policy {
            min_order_bits: DEFAULT_MIN_ORDER_BITS,
            exp_bits: DEFAULT_EXP_BITS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamSet {
    pub spec: FieldSpec,
    pub d: usize,
    pub psi: Poly,
    pub generator: Circulant,
    pub policy: Policy,
    /// Factorisation of `q^{d-1} - 1`, when known.
    pub order_factors: Option<Vec<(u64, u32)>>,
    pub checks: Checks,
}

impl ParamSet {
    /// Assembles a parameter set and records its validation checks.
    pub fn new(
        generator: Circulant,
        policy: Policy,
        order_factors: Option<Vec<(u64, u32)>>,
    ) -> Result<Self> {
        let spec = *generator.spec();
        let d = generator.d();
        let mut ps = ParamSet {
            spec,
            d,
            psi: build_psi(d, spec)?,
            generator,
            policy,
            order_factors,
            checks: Checks::default(),
        };
        ps.checks = validate_params(&ps, policy.min_order_bits).checks;
        Ok(ps)
    }

    pub fn q(&self) -> u128 {
        self.spec.order()
    }

    /// `q^{d-1} - 1`, the order of `F_{q^{d-1}}^*`.
    pub fn field_group_order(&self) -> BigUint {
        BigUint::from(self.q()).pow(self.d as u32 - 1) - 1u32
    }

    pub fn is_valid(&self) -> bool {
        self.checks.all_pass()
    }

    pub fn ensure_valid(&self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!(
                "failed checks: {}",
                self.checks.failures().join(", ")
            )))
        }
    }

    pub fn to_file(&self) -> ParamSetFile {
        ParamSetFile {
            q_p: self.spec.p(),
            q_k: self.spec.k(),
            modulus_hex: self.spec.modulus_hex(),
            d: self.d,
            generator_hex: self.generator.to_hex(),
            min_order_bits: self.policy.min_order_bits,
            exp_bits: self.policy.exp_bits,
            order_factors: self.order_factors.clone(),
            checks: self.checks,
            seed: None,
        }
    }

    /// Rebuilds from a file; the stored checks are recomputed, not trusted.
    pub fn from_file(file: &ParamSetFile) -> Result<Self> {
        let spec = file.field_spec()?;
        let generator = Circulant::from_hex(spec, &file.generator_hex)?;
        if generator.d() != file.d {
            return Err(Error::Decode(format!(
                "generator has dimension {}, file says {}",
                generator.d(),
                file.d
            )));
        }
        let policy = Policy {
            min_order_bits: file.min_order_bits,
            exp_bits: file.exp_bits,
        };
        Self::new(generator, policy, file.order_factors.clone())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_file(&serde_json::from_str(s)?)
    }
}

fn default_min_order_bits() -> u32 {
    DEFAULT_MIN_ORDER_BITS
}

fn default_exp_bits() -> u32 {
    DEFAULT_EXP_BITS
}

/// On-disk form of a [`ParamSet`] (JSON syntax, lowercase big-endian hex).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamSetFile {
    pub q_p: u64,
    pub q_k: u32,
    /// Full modulus of `F_{2^k}` including the leading term; empty for
    /// prime fields.
    #[serde(default)]
    pub modulus_hex: String,
    pub d: usize,
    pub generator_hex: String,
    #[serde(default = "default_min_order_bits")]
    pub min_order_bits: u32,
    #[serde(default = "default_exp_bits")]
    pub exp_bits: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order_factors: Option<Vec<(u64, u32)>>,
    #[serde(default)]
    pub checks: Checks,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ParamSetFile {
    pub fn field_spec(&self) -> Result<FieldSpec> {
        let modulus = if self.modulus_hex.trim().is_empty() {
            None
        } else {
            Some(u128::from_str_radix(self.modulus_hex.trim(), 16).map_err(|e| {
                Error::Decode(format!("modulus_hex {:?}: {e}", self.modulus_hex))
            })?)
        };
        FieldSpec::from_parts(self.q_p, self.q_k, modulus)
    }
}

/// Evaluates every condition on its own and reports each outcome.
pub fn validate_params(ps: &ParamSet, min_order_bits: u32) -> ValidationReport {
    let spec = ps.spec;
    let d = ps.d;
    let a = &ps.generator;
    let mut checks = Checks {
        d_prime: is_prime(d as u64),
        gcd_d_q_one: d as u64 % spec.p() != 0,
        ..Checks::default()
    };
    let q_mod_d = (ps.q() % d as u128) as u64;
    let order_q = checks
        .gcd_d_q_one
        .then(|| multiplicative_order(q_mod_d, d as u64).ok())
        .flatten();
    checks.q_primitive_mod_d = checks.d_prime && order_q == Some(d as u64 - 1);
    checks.psi_irreducible = ps.psi.is_irreducible().unwrap_or(false);

    checks.det_one = a.det().value() == 1;
    // (ii) on the expanded matrix: every row sums to 1
    let f = &spec;
    checks.row_sum_one = a
        .expand_raw()
        .iter()
        .all(|r| r.iter().fold(0, |acc, &c| f.add(acc, c)) == 1);
    // (v) on the representer polynomial: remainder mod (x - 1)
    let x_minus_1 = Poly::from_raw(spec, vec![spec.neg(1), 1]);
    checks.phi_at_one = a
        .representer()
        .rem(&x_minus_1)
        .map(|r| r.is_one())
        .unwrap_or(false);
    checks.generator_invertible = a.is_unit();

    let quotient_method = if d <= CHARPOLY_MAX_D {
        QuotientMethod::CharPoly
    } else {
        QuotientMethod::SubfieldTest
    };
    checks.charpoly_quotient_irreducible = match quotient_method {
        QuotientMethod::CharPoly => charpoly_quotient_irreducible(a),
        QuotientMethod::SubfieldTest => {
            checks.psi_irreducible && checks.phi_at_one && !in_proper_subfield(a)
        }
    };

    let generator_order = (checks.psi_irreducible && checks.gcd_d_q_one && checks.generator_invertible)
        .then(|| order_bound(a, ps.order_factors.as_deref()));
    checks.generator_order = generator_order
        .as_ref()
        .is_some_and(|b| b.lower_bound_bits > min_order_bits as u64);

    ValidationReport {
        passed: checks.all_pass(),
        failures: checks.failures().into_iter().map(String::from).collect(),
        checks,
        min_order_bits,
        quotient_method,
        multiplicative_order_q_mod_d: order_q,
        generator_order,
    }
}

fn charpoly_quotient_irreducible(a: &Circulant) -> bool {
    let spec = *a.spec();
    let chi = char_poly(a);
    let x_minus_1 = Poly::from_raw(spec, vec![spec.neg(1), 1]);
    match chi.div_rem(&x_minus_1) {
        Ok((quot, rem)) if rem.is_zero() => quot.is_irreducible().unwrap_or(false),
        _ => false,
    }
}

/// `a^(q^j)` through repeated `q`-th powers; cheap in characteristic 2
/// where each is `k` permutation squarings.
fn frobenius_power(a: &Circulant, j: usize) -> Circulant {
    let q = BigUint::from(a.spec().order());
    (0..j).fold(a.clone(), |acc, _| acc.pow(&q))
}

/// Whether `A mod ψ` lies in a proper subfield `F_{q^e}`, `e | d-1`, of
/// `F_{q^{d-1}}` (assumes `ψ` irreducible).
fn in_proper_subfield(a: &Circulant) -> bool {
    let d = a.d();
    let psi = build_psi(d, *a.spec()).unwrap();
    let beta = a.representer().rem(&psi).unwrap();
    nt::factor(d as u64 - 1).iter().any(|&(r, _)| {
        let e = (d - 1) / r as usize;
        frobenius_power(a, e).representer().rem(&psi).unwrap() == beta
    })
}

/// Whether `A^e ≡ 1 (mod ψ)`.
fn pow_is_one_mod_psi(a: &Circulant, e: &BigUint, psi: &Poly) -> bool {
    a.pow(e).representer().rem(psi).unwrap().is_one()
}

fn sieve(limit: u64) -> Vec<u64> {
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

fn small_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| sieve(TRIAL_DIVISION_BOUND))
}

/// Splits `n` into its `TRIAL_DIVISION_BOUND`-smooth part (factored) and the
/// remaining cofactor.
pub fn trial_factor(n: &BigUint) -> (Vec<(u64, u32)>, BigUint) {
    let mut rest = n.clone();
    let mut out = Vec::new();
    for &p in small_primes() {
        let bp = BigUint::from(p);
        if &bp * &bp > rest {
            break;
        }
        let mut e = 0;
        loop {
            let (q, r) = rest.div_rem(&bp);
            if !r.is_zero() {
                break;
            }
            rest = q;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    }
    // a leftover below the square of the bound is prime
    if let Some(small) = rest.to_u64().filter(|&r| r > 1 && is_prime(r)) {
        out.push((small, 1));
        rest = BigUint::one();
    }
    (out, rest)
}

/// Exact order of `g` in a group of order `n = ∏ p^e`, with `is_one(e)`
/// deciding whether `g^e` is the identity.
pub fn order_from_factors<F>(n: &BigUint, factors: &[(u64, u32)], mut pow_is_one: F) -> BigUint
where
    F: FnMut(&BigUint) -> bool,
{
    let mut t = n.clone();
    for &(p, _) in factors {
        let bp = BigUint::from(p);
        while (&t % &bp).is_zero() && pow_is_one(&(&t / &bp)) {
            t /= &bp;
        }
    }
    t
}

/// Lower bound (exact when the factorisation is complete) on the order of
/// `A mod ψ` in `F_q[x]/ψ`.
pub fn order_bound(a: &Circulant, factors: Option<&[(u64, u32)]>) -> OrderBound {
    let spec = *a.spec();
    let d = a.d();
    let psi = build_psi(d, spec).unwrap();
    let n = BigUint::from(spec.order()).pow(d as u32 - 1) - 1u32;
    let (smooth, cofactor) = match factors {
        Some(f) => (f.to_vec(), BigUint::one()),
        None => trial_factor(&n),
    };
    let smooth_part = &n / &cofactor;
    let a_c = a.pow(&cofactor);
    let mut bound = order_from_factors(&smooth_part, &smooth, |e| pow_is_one_mod_psi(&a_c, e, &psi));
    let mut exact = true;
    if !cofactor.is_one() {
        exact = false;
        if !pow_is_one_mod_psi(a, &smooth_part, &psi) {
            // some prime above the trial bound divides the order
            bound *= TRIAL_DIVISION_BOUND;
        }
    }
    OrderBound {
        lower_bound_bits: bound.bits().saturating_sub(u64::from(!bound.is_zero() && bound.count_ones() == 1)),
        lower_bound: bound.to_string(),
        exact,
    }
}

/// Samples a generator `A` with `φ_A(1) = 1`, `det A = 1` and a certified
/// order bound for `A mod ψ`, by lifting `(1, β)` through the CRT split.
/// For `q > 2`, `β = γ^{q-1}` so its norm, and hence `det A`, is 1.
pub fn generate_generator<R: Rng + ?Sized>(
    spec: FieldSpec,
    d: usize,
    policy: Policy,
    order_factors: Option<&[(u64, u32)]>,
    rng: &mut R,
) -> Result<Circulant> {
    if !is_prime(d as u64) {
        return Err(Error::NotPrime(d as u64));
    }
    if d as u64 % spec.p() == 0 {
        return Err(Error::InseparableModulus { d, p: spec.p() });
    }
    if !is_q_primitive_mod_d(spec.order(), d as u64)? {
        return Err(Error::InvalidParams(format!(
            "q = {} is not primitive mod {d}",
            spec.order()
        )));
    }
    let psi = build_psi(d, spec)?;
    let one = spec.element(1)?;
    for _ in 0..GENERATOR_ATTEMPTS {
        let gamma = Poly::from_raw(spec, (0..d - 1).map(|_| spec.random(rng)).collect());
        if gamma.is_zero() {
            continue;
        }
        let lifted = Circulant::crt_lift(&CrtPair { at_one: one, residue: gamma }, d, &psi)?;
        let candidate = if spec.order() == 2 {
            lifted
        } else {
            lifted.pow(&(BigUint::from(spec.order()) - 1u32))
        };
        let ps = ParamSet::new(candidate, policy, order_factors.map(<[_]>::to_vec))?;
        if ps.is_valid() {
            return Ok(ps.generator);
        }
    }
    Err(Error::GenerationFailed(GENERATOR_ATTEMPTS))
}

/// Complete factorisation of `q^{d-1} - 1` when it fits in a machine word.
pub fn desk_factorization(spec: FieldSpec, d: usize) -> Option<Vec<(u64, u32)>> {
    let n = BigUint::from(spec.order()).pow(d as u32 - 1) - 1u32;
    n.to_u64().map(nt::factor)
}

pub const PRESET_NAMES: [&str; 5] = ["d5", "d7", "d11", "d13", "d1019"];

fn preset_json(name: &str) -> Option<&'static str> {
    Some(match name {
        "d5" => include_str!("../presets/d5.json"),
        "d7" => include_str!("../presets/d7.json"),
        "d11" => include_str!("../presets/d11.json"),
        "d13" => include_str!("../presets/d13.json"),
        "d1019" => include_str!("../presets/d1019.json"),
        _ => return None,
    })
}

/// Shipped parameter sets, all over `F_2`:
///
/// * `d5`, `d11`, `d13`: desk-scale sets whose generators have the full
///   order `2^{d-1} - 1` in `F_{2^{d-1}}`;
/// * `d7`: deliberately invalid (2 is not primitive mod 7);
/// * `d1019`: large demonstration set for key agreement.
pub fn preset(name: &str) -> Result<ParamSet> {
    let json = preset_json(name).ok_or_else(|| {
        Error::InvalidParams(format!(
            "unknown preset {name:?}; known presets: {}",
            PRESET_NAMES.join(", ")
        ))
    })?;
    ParamSet::from_json(json)
}

/// Recipe used to produce the shipped preset files.
pub fn preset_recipe(name: &str) -> Option<(usize, Policy, u64)> {
    Some(match name {
        "d5" => (5, Policy { min_order_bits: 3, exp_bits: 3 }, 5),
        "d7" => (7, Policy { min_order_bits: 2, exp_bits: 2 }, 7),
        "d11" => (11, Policy { min_order_bits: 9, exp_bits: 9 }, 11),
        "d13" => (13, Policy { min_order_bits: 11, exp_bits: 11 }, 13),
        "d1019" => (1019, Policy { min_order_bits: 31, exp_bits: 160 }, 1019),
        _ => return None,
    })
}

/// Regenerates a preset from its recipe with a ChaCha stream seeded by the
/// recipe seed.
pub fn build_preset(name: &str) -> Result<ParamSetFile> {
    use rand::SeedableRng;
    let (d, policy, seed) = preset_recipe(name)
        .ok_or_else(|| Error::InvalidParams(format!("unknown preset {name:?}")))?;
    let spec = FieldSpec::binary(1)?;
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
    let factors = desk_factorization(spec, d);
    let generator = if name == "d7" {
        invalid_demo_generator(spec, d, &mut rng)?
    } else {
        generate_generator(spec, d, policy, factors.as_deref(), &mut rng)?
    };
    let mut file = ParamSet::new(generator, policy, factors)?.to_file();
    file.seed = Some(seed);
    Ok(file)
}

/// A unit with row-sum 1 for a dimension where `q` is not primitive.
fn invalid_demo_generator<R: Rng + ?Sized>(spec: FieldSpec, d: usize, rng: &mut R) -> Result<Circulant> {
    loop {
        let c = Circulant::random(spec, d, rng)?;
        if c.row_sum().value() == 1 && c.is_unit() && !c.is_identity() {
            return Ok(c);
        }
    }
}
