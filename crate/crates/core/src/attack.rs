//! Reduction chain for the circulant discrete log: ground-field leaks
//! through the determinant and the row sum, projection onto the field
//! `F_q[x]/ψ`, and generic solvers (baby-step giant-step, Pohlig–Hellman).
//!
//! Everything here is desk scale: group orders must fit in a `u64`.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Debug;
use std::hash::Hash;

use num_bigint::BigUint;
use num_integer::Integer;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::circulant::Circulant;
use crate::counter::OpCounter;
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::nt;
use crate::par::{self, Parallelism};
use crate::params::{build_psi, ParamSet, ParamSetFile};
use crate::poly::Poly;

/// Splitting bound for a reducible `ψ`.
pub const MAX_SPLIT_DEGREE: usize = 32;

/// Characteristic polynomial of the expansion (monic, degree `d`), by
/// reduction to Hessenberg form and the standard recurrence.
pub fn char_poly(a: &Circulant) -> Poly {
    let f = *a.spec();
    let n = a.d();
    let mut h = a.expand_raw();
    for m in 1..n.saturating_sub(1) {
        let Some(piv) = (m..n).find(|&i| h[i][m - 1] != 0) else {
            continue;
        };
        if piv != m {
            h.swap(piv, m);
            for row in h.iter_mut() {
                row.swap(piv, m);
            }
        }
        let inv = f.inv(h[m][m - 1]).unwrap();
        for i in m + 1..n {
            let u = f.mul(h[i][m - 1], inv);
            if u == 0 {
                continue;
            }
            for j in 0..n {
                let t = f.mul(u, h[m][j]);
                h[i][j] = f.sub(h[i][j], t);
            }
            for row in h.iter_mut() {
                let t = f.mul(u, row[i]);
                row[m] = f.add(row[m], t);
            }
        }
    }
    let x = Poly::monomial(f, 1, 1);
    let mut p = vec![Poly::one(f)];
    for m in 1..=n {
        let lin = x.sub_raw(&Poly::constant(f, h[m - 1][m - 1]));
        let mut next = lin.mul_raw(&p[m - 1]);
        let mut t = f.one();
        for i in 1..m {
            t = f.mul(t, h[m - i][m - i - 1]);
            let c = f.mul(t, h[m - i - 1][m - 1]);
            if c != 0 {
                next = next.sub_raw(&p[m - i - 1].scale(c));
            }
        }
        p.push(next);
    }
    p.pop().unwrap()
}

/// Evaluates a polynomial at a circulant (Horner).
pub fn eval_at(poly: &Poly, a: &Circulant) -> Circulant {
    let f = *a.spec();
    let d = a.d();
    let mut acc = Circulant::zero(f, d).unwrap();
    for &c in poly.coeffs().iter().rev() {
        acc = acc.mul(a).unwrap();
        let mut row = acc.coeffs().to_vec();
        row[0] = f.add(row[0], c);
        acc = Circulant::new(f, row).unwrap();
    }
    acc
}

/// A finite abelian group in which discrete logs are solved.
pub trait Group: Sync {
    type Elem: Clone + Eq + Hash + Debug + Send + Sync;

    fn identity(&self) -> Self::Elem;
    fn op(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn invert(&self, a: &Self::Elem) -> Option<Self::Elem>;
}

/// `F_q^*` on raw element words.
#[derive(Clone, Copy, Debug)]
pub struct GroundField(pub FieldSpec);

impl Group for GroundField {
    type Elem = u64;

    fn identity(&self) -> u64 {
        1
    }

    fn op(&self, a: &u64, b: &u64) -> u64 {
        self.0.mul(*a, *b)
    }

    fn invert(&self, a: &u64) -> Option<u64> {
        self.0.inv(*a)
    }
}

/// Units of `F_q[x]/f`; a field when `f` is irreducible.
#[derive(Clone, Debug)]
pub struct QuotientRing {
    pub modulus: Poly,
}

impl Group for QuotientRing {
    type Elem = Poly;

    fn identity(&self) -> Poly {
        Poly::one(*self.modulus.spec())
    }

    fn op(&self, a: &Poly, b: &Poly) -> Poly {
        a.mul_mod(b, &self.modulus).unwrap()
    }

    fn invert(&self, a: &Poly) -> Option<Poly> {
        let (g, s, _) = a.ext_gcd(&self.modulus).ok()?;
        g.is_one().then(|| s.rem(&self.modulus).unwrap())
    }
}

/// Units of the circulant ring of a given shape.
#[derive(Clone, Copy, Debug)]
pub struct CirculantGroup {
    pub spec: FieldSpec,
    pub d: usize,
}

impl Group for CirculantGroup {
    type Elem = Circulant;

    fn identity(&self) -> Circulant {
        Circulant::identity(self.spec, self.d).unwrap()
    }

    fn op(&self, a: &Circulant, b: &Circulant) -> Circulant {
        a.mul(b).unwrap()
    }

    fn invert(&self, a: &Circulant) -> Option<Circulant> {
        a.inverse().ok()
    }
}

fn op_counted<G: Group>(g: &G, a: &G::Elem, b: &G::Elem, counter: &OpCounter) -> G::Elem {
    counter.add_group_mults(1);
    g.op(a, b)
}

/// `a^e` by square-and-multiply, counting every group operation.
pub fn group_pow<G: Group>(g: &G, a: &G::Elem, e: u64, counter: &OpCounter) -> G::Elem {
    if e == 0 {
        return g.identity();
    }
    let mut acc = a.clone();
    for i in (0..63 - e.leading_zeros()).rev() {
        acc = op_counted(g, &acc, &acc, counter);
        if (e >> i) & 1 == 1 {
            acc = op_counted(g, &acc, a, counter);
        }
    }
    acc
}

fn ceil_sqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r.saturating_mul(r) < n {
        r += 1;
    }
    while r > 0 && (r - 1) * (r - 1) >= n {
        r -= 1;
    }
    r
}

/// Least `x < bound` with `g^x = h`, by baby-step giant-step with
/// `⌈√bound⌉` baby steps. The answer is re-checked by exponentiation.
pub fn bsgs<G: Group>(
    group: &G,
    g: &G::Elem,
    h: &G::Elem,
    bound: u64,
    counter: &OpCounter,
) -> Result<u64> {
    if bound == 0 {
        return Err(Error::NoSolution);
    }
    let m = ceil_sqrt(bound).max(1);
    let mut table: HashMap<G::Elem, u64> = HashMap::with_capacity(m as usize);
    let mut cur = group.identity();
    for j in 0..m {
        table.entry(cur.clone()).or_insert(j);
        if j + 1 < m {
            cur = op_counted(group, &cur, g, counter);
        }
    }
    let g_inv = group.invert(g).ok_or_else(|| Error::InvalidInstance("base is not invertible".into()))?;
    counter.add_group_mults(1);
    let stride = group_pow(group, &g_inv, m, counter);
    let mut gamma = h.clone();
    for i in 0..m {
        if let Some(&j) = table.get(&gamma) {
            let x = i * m + j;
            if x >= bound {
                break;
            }
            if group_pow(group, g, x, &OpCounter::new()) != *h {
                return Err(Error::InvalidInstance("baby-step table inconsistent".into()));
            }
            return Ok(x);
        }
        if i + 1 < m {
            gamma = op_counted(group, &gamma, &stride, counter);
        }
    }
    Err(Error::NoSolution)
}

/// Group operations spent in one prime-power subproblem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeWork {
    pub prime: u64,
    pub exponent: u32,
    pub bsgs_ops: u64,
    pub total_ops: u64,
}

/// Result of [`pohlig_hellman_detailed`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhSolution {
    pub x: u64,
    pub per_prime: Vec<PrimeWork>,
}

/// `x mod order` with `g^x = h`, where `g` has order `order = ∏ p^e`.
pub fn pohlig_hellman<G: Group>(
    group: &G,
    g: &G::Elem,
    h: &G::Elem,
    order: u64,
    factorization: &[(u64, u32)],
    counter: &OpCounter,
) -> Result<u64> {
    pohlig_hellman_detailed(group, g, h, order, factorization, counter).map(|s| s.x)
}

/// As [`pohlig_hellman`], also reporting per-prime work. Prime-power
/// subproblems run in parallel when the `parallel` feature is on.
pub fn pohlig_hellman_detailed<G: Group>(
    group: &G,
    g: &G::Elem,
    h: &G::Elem,
    order: u64,
    factorization: &[(u64, u32)],
    counter: &OpCounter,
) -> Result<PhSolution> {
    let product = factorization
        .iter()
        .try_fold(1u64, |acc, &(p, e)| acc.checked_mul(p.checked_pow(e)?));
    if product != Some(order) || order == 0 {
        return Err(Error::InvalidInstance(format!(
            "factorization {factorization:?} does not multiply to {order}"
        )));
    }
    let mode = Parallelism::for_size(factorization.len(), 2);
    let parts = par::map_slice(factorization, mode, |&(p, e)| {
        let local = OpCounter::new();
        let out = solve_prime_power(group, g, h, order, p, e, &local);
        let snap = local.snapshot();
        counter.add_group_mults(snap.group_mults);
        out.map(|(x, bsgs_ops)| {
            (
                x,
                PrimeWork {
                    prime: p,
                    exponent: e,
                    bsgs_ops,
                    total_ops: snap.group_mults,
                },
            )
        })
    });
    let mut congruences = Vec::with_capacity(parts.len());
    let mut per_prime = Vec::with_capacity(parts.len());
    for part in parts {
        let (x, work) = part?;
        congruences.push((x, work.prime.pow(work.exponent)));
        per_prime.push(work);
    }
    let (x, _) = nt::crt_combine(&congruences)
        .ok_or_else(|| Error::InvalidInstance("inconsistent prime-power residues".into()))?;
    if group_pow(group, g, x, &OpCounter::new()) != *h {
        return Err(Error::InvalidInstance("recombined exponent does not verify".into()));
    }
    Ok(PhSolution { x, per_prime })
}

/// Digit-by-digit solve in the subgroup of order `p^e`; returns the residue
/// mod `p^e` and the group operations spent inside BSGS.
fn solve_prime_power<G: Group>(
    group: &G,
    g: &G::Elem,
    h: &G::Elem,
    order: u64,
    p: u64,
    e: u32,
    counter: &OpCounter,
) -> Result<(u64, u64)> {
    let pe = p.pow(e);
    let cofactor = order / pe;
    let gi = group_pow(group, g, cofactor, counter);
    let hi = group_pow(group, h, cofactor, counter);
    let gamma = group_pow(group, &gi, pe / p, counter);
    let gi_inv = group.invert(&gi).ok_or_else(|| Error::InvalidInstance("base is not invertible".into()))?;
    let mut x = 0u64;
    let mut pk = 1u64;
    let mut bsgs_ops = 0;
    for k in 0..e {
        let shift = group_pow(group, &gi_inv, x, counter);
        let hk = group_pow(group, &op_counted(group, &shift, &hi, counter), pe / pk / p, counter);
        let local = OpCounter::new();
        let digit = bsgs(group, &gamma, &hk, p, &local)?;
        bsgs_ops += local.snapshot().group_mults;
        counter.add_group_mults(local.snapshot().group_mults);
        x += digit * pk;
        if k + 1 < e {
            pk *= p;
        }
    }
    Ok((x, bsgs_ops))
}

/// Order of `a` in a group of order `n` with the given factorization.
pub fn element_order<G: Group>(group: &G, a: &G::Elem, n: u64, factorization: &[(u64, u32)]) -> u64 {
    let c = OpCounter::new();
    let id = group.identity();
    let mut t = n;
    for &(p, _) in factorization {
        while t % p == 0 && group_pow(group, a, t / p, &c) == id {
            t /= p;
        }
    }
    t
}

/// Restricts the factorization of `n` to a divisor `t`.
fn factors_of_divisor(factorization: &[(u64, u32)], mut t: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    for &(p, _) in factorization {
        let mut e = 0;
        while t % p == 0 {
            t /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    }
    out
}

/// Serializes an optional big integer as a JSON number when it fits in 64
/// bits and as a decimal string otherwise.
mod big_opt {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Small(u64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &Option<BigUint>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match v {
            None => s.serialize_none(),
            Some(n) => match u64::try_from(n) {
                Ok(small) => s.serialize_u64(small),
                Err(_) => s.serialize_str(&n.to_string()),
            },
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<BigUint>, D::Error> {
        match Option::<Repr>::deserialize(d)? {
            None => Ok(None),
            Some(Repr::Small(n)) => Ok(Some(BigUint::from(n))),
            Some(Repr::Text(t)) => t
                .trim()
                .parse()
                .map(Some)
                .map_err(|_| serde::de::Error::custom(format!("not a decimal integer: {t:?}"))),
        }
    }
}

/// `B = A^m` over a parameter set, optionally with the answer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DlogInstance {
    pub params: ParamSet,
    pub base: Circulant,
    pub target: Circulant,
    pub true_m: Option<BigUint>,
}

/// On-disk form: the parameter-set fields plus `base_hex`, `target_hex`
/// and an optional `true_m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DlogInstanceFile {
    #[serde(flatten)]
    pub params: ParamSetFile,
    pub base_hex: String,
    pub target_hex: String,
    #[serde(default, with = "big_opt", skip_serializing_if = "Option::is_none")]
    pub true_m: Option<BigUint>,
}

impl DlogInstance {
    pub fn new(params: ParamSet, base: Circulant, target: Circulant, true_m: Option<BigUint>) -> Result<Self> {
        for c in [&base, &target] {
            if c.d() != params.d || *c.spec() != params.spec {
                return Err(Error::SpecMismatch);
            }
        }
        if !base.is_unit() {
            return Err(Error::InvalidInstance("base is not invertible".into()));
        }
        if let Some(m) = &true_m {
            if base.pow(m) != target {
                return Err(Error::InvalidInstance("target is not base^true_m".into()));
            }
        }
        Ok(DlogInstance { params, base, target, true_m })
    }

    /// Known-answer instance `B = A^m` for the parameter set's generator.
    pub fn known_answer(params: &ParamSet, m: BigUint) -> Result<Self> {
        let target = params.generator.pow(&m);
        Self::new(params.clone(), params.generator.clone(), target, Some(m))
    }

    pub fn to_file(&self) -> DlogInstanceFile {
        DlogInstanceFile {
            params: self.params.to_file(),
            base_hex: self.base.to_hex(),
            target_hex: self.target.to_hex(),
            true_m: self.true_m.clone(),
        }
    }

    pub fn from_file(file: &DlogInstanceFile) -> Result<Self> {
        let params = ParamSet::from_file(&file.params)?;
        let base = Circulant::from_hex(params.spec, &file.base_hex)?;
        let target = Circulant::from_hex(params.spec, &file.target_hex)?;
        Self::new(params, base, target, file.true_m.clone())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_file(&serde_json::from_str(s)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeakStatus {
    /// The leak carries no information (its base value is 1).
    Blocked,
    /// A residue of the exponent was recovered.
    Fired,
    Unsupported,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Leak {
    pub name: String,
    pub status: LeakStatus,
    /// Recovered exponent residue, valid modulo `modulus`.
    pub residue: Option<u64>,
    /// Order of the leaked base value.
    pub modulus: Option<u64>,
    pub group_ops: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_prime: Vec<PrimeWork>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Leak {
    fn new(name: &str, status: LeakStatus) -> Self {
        Leak {
            name: name.into(),
            status,
            residue: None,
            modulus: None,
            group_ops: 0,
            per_prime: Vec::new(),
            detail: None,
        }
    }

    fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    fn fired(name: &str, residue: u64, modulus: u64) -> Self {
        Leak {
            residue: Some(residue),
            modulus: Some(modulus),
            ..Self::new(name, LeakStatus::Fired)
        }
    }

    pub fn congruence(&self) -> Option<(u64, u64)> {
        match self.status {
            LeakStatus::Fired | LeakStatus::Blocked => Some((self.residue?, self.modulus?)),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Congruence {
    pub residue: u64,
    pub modulus: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackReport {
    pub leaks: Vec<Leak>,
    /// CRT combination of all leak congruences.
    pub combined: Option<Congruence>,
    /// Order of the base in the circulant unit group, when determined.
    pub base_order: Option<u64>,
    pub success: bool,
    pub work_counts: BTreeMap<String, u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_m_recovered: Option<bool>,
}

/// Discrete log of `value(B)` to base `value(A)` in `F_q^*`.
fn ground_leak(name: &str, spec: FieldSpec, a: u64, b: u64) -> Leak {
    if a == 1 {
        // a trivial base value constrains nothing: m ≡ 0 (mod 1)
        let mut leak = Leak::new(name, LeakStatus::Blocked);
        leak.residue = Some(0);
        leak.modulus = Some(1);
        return leak;
    }
    if a == 0 {
        return Leak::new(name, LeakStatus::Failed).with_detail("base value is zero");
    }
    let Ok(n) = u64::try_from(spec.order() - 1) else {
        return Leak::new(name, LeakStatus::Unsupported).with_detail("field too large");
    };
    let group = GroundField(spec);
    let n_factors = nt::factor(n);
    let ord = element_order(&group, &a, n, &n_factors);
    let counter = OpCounter::new();
    match pohlig_hellman_detailed(&group, &a, &b, ord, &factors_of_divisor(&n_factors, ord), &counter) {
        Ok(sol) => Leak {
            group_ops: counter.snapshot().group_mults,
            per_prime: sol.per_prime,
            ..Leak::fired(name, sol.x, ord)
        },
        Err(e) => Leak {
            group_ops: counter.snapshot().group_mults,
            ..Leak::new(name, LeakStatus::Failed).with_detail(e.to_string())
        },
    }
}

/// Leak through `det B = (det A)^m` in `F_q^*`; blocked when `det A = 1`.
pub fn detect_determinant_leak(inst: &DlogInstance) -> Leak {
    ground_leak(
        "determinant",
        inst.params.spec,
        inst.base.det().value(),
        inst.target.det().value(),
    )
}

/// Leak through the row-sum eigenvalue; blocked when `row_sum(A) = 1`.
pub fn detect_rowsum_leak(inst: &DlogInstance) -> Leak {
    ground_leak(
        "row_sum",
        inst.params.spec,
        inst.base.row_sum().value(),
        inst.target.row_sum().value(),
    )
}

/// Projects `A` and `B` to `F_q[x]/f` for each irreducible factor `f` of
/// `ψ` and solves there. `factorization` is that of `q^{d-1} - 1` and is
/// used when `ψ` is irreducible; otherwise each factor's group order is
/// factored directly.
pub fn projection_attack(inst: &DlogInstance, factorization: Option<&[(u64, u32)]>) -> Leak {
    const NAME: &str = "projection";
    let spec = inst.params.spec;
    let d = inst.params.d;
    if d as u64 % spec.p() == 0 {
        return Leak::new(NAME, LeakStatus::Unsupported).with_detail("p divides d; no CRT split");
    }
    let psi = build_psi(d, spec).unwrap();
    let irreducible = psi.is_irreducible().unwrap_or(false);
    let factors = if irreducible {
        vec![psi.clone()]
    } else {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(d as u64);
        match psi.factor_squarefree(MAX_SPLIT_DEGREE, &mut rng) {
            Ok(f) => f,
            Err(e) => return Leak::new(NAME, LeakStatus::Unsupported).with_detail(e.to_string()),
        }
    };
    let counter = OpCounter::new();
    let mut congruences = Vec::new();
    let mut per_prime = Vec::new();
    for f in &factors {
        let deg = f.degree().unwrap() as u32;
        let n = BigUint::from(spec.order()).pow(deg) - 1u32;
        let Ok(n) = u64::try_from(&n) else {
            return Leak::new(NAME, LeakStatus::Unsupported)
                .with_detail(format!("group order q^{deg} - 1 exceeds 64 bits"));
        };
        let n_factors = match factorization {
            Some(fz) if irreducible => fz.to_vec(),
            _ => nt::factor(n),
        };
        let group = QuotientRing { modulus: f.clone() };
        let g = inst.base.representer().rem(f).unwrap();
        let h = inst.target.representer().rem(f).unwrap();
        if g.is_zero() {
            return Leak::new(NAME, LeakStatus::Failed).with_detail("base vanishes modulo a factor of psi");
        }
        let ord = element_order(&group, &g, n, &n_factors);
        match pohlig_hellman_detailed(&group, &g, &h, ord, &factors_of_divisor(&n_factors, ord), &counter) {
            Ok(sol) => {
                congruences.push((sol.x, ord));
                per_prime.extend(sol.per_prime);
            }
            Err(e) => {
                return Leak {
                    group_ops: counter.snapshot().group_mults,
                    ..Leak::new(NAME, LeakStatus::Failed).with_detail(e.to_string())
                }
            }
        }
    }
    let group_ops = counter.snapshot().group_mults;
    match nt::crt_combine(&congruences) {
        Some((x, m)) => Leak {
            group_ops,
            per_prime,
            detail: (!irreducible).then(|| format!("psi splits into {} factors", factors.len())),
            ..Leak::fired(NAME, x, m)
        },
        None => Leak {
            group_ops,
            ..Leak::new(NAME, LeakStatus::Failed).with_detail("factor residues are inconsistent")
        },
    }
}

/// Runs every leak and recombines. Success means the combined modulus is a
/// multiple of the base's order and `A^residue = B` verifies.
pub fn full_attack(inst: &DlogInstance) -> AttackReport {
    let leaks = vec![
        detect_determinant_leak(inst),
        detect_rowsum_leak(inst),
        projection_attack(inst, inst.params.order_factors.as_deref()),
    ];
    let mut work_counts = BTreeMap::new();
    for leak in &leaks {
        work_counts.insert(leak.name.clone(), leak.group_ops);
    }
    let congruences: Vec<_> = leaks.iter().filter_map(Leak::congruence).collect();
    let combined = nt::crt_combine(&congruences).map(|(residue, modulus)| Congruence { residue, modulus });

    // ord(A) = lcm(ord A(1), ord(A mod ψ)) through the CRT split
    let row_sum = leaks.iter().find(|l| l.name == "row_sum").and_then(|l| l.modulus);
    let projected = leaks
        .iter()
        .find(|l| l.name == "projection" && l.status == LeakStatus::Fired)
        .and_then(|l| l.modulus);
    let base_order = row_sum.zip(projected).map(|(a, b)| a.lcm(&b));

    let verify = OpCounter::new();
    let success = match (combined, base_order) {
        (Some(c), Some(ord)) if c.modulus % ord == 0 => {
            inst.base.pow_counted(&BigUint::from(c.residue), Some(&verify)) == inst.target
        }
        _ => false,
    };
    work_counts.insert("verification".into(), verify.snapshot().group_ops());
    let true_m_recovered = inst.true_m.as_ref().map(|m| {
        success
            && combined.is_some_and(|c| (m % BigUint::from(base_order.unwrap())) == BigUint::from(c.residue % base_order.unwrap()))
    });
    AttackReport {
        leaks,
        combined,
        base_order,
        success,
        work_counts,
        true_m_recovered,
    }
}

/// Runs [`full_attack`] on many instances, in parallel when available.
pub fn attack_batch(instances: &[DlogInstance]) -> Vec<AttackReport> {
    par::map_slice(instances, Parallelism::for_size(instances.len(), 2), full_attack)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circulant::CrtPair;
    use crate::params::preset;
    use rand::Rng;
    use rand_chacha::ChaCha8Rng;

    fn f2() -> FieldSpec {
        FieldSpec::binary(1).unwrap()
    }

    /// `F_16 = F_2[x]/Φ_5` with generator `x + 1`.
    fn f16() -> (QuotientRing, Poly) {
        let spec = f2();
        let ring = QuotientRing { modulus: build_psi(5, spec).unwrap() };
        (ring, Poly::new(spec, vec![1, 1]).unwrap())
    }

    #[test]
    fn char_poly_examples() {
        let spec = f2();
        let id = Circulant::identity(spec, 3).unwrap();
        let x_plus_1 = Poly::new(spec, vec![1, 1]).unwrap();
        let cube = x_plus_1.mul(&x_plus_1).unwrap().mul(&x_plus_1).unwrap();
        assert_eq!(char_poly(&id), cube);
        let w = Circulant::shift(spec, 3).unwrap();
        assert_eq!(char_poly(&w).coeffs(), &[1, 0, 0, 1]);
    }

    #[test]
    fn cayley_hamilton_and_row_sum_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (spec, d) in [
            (f2(), 5),
            (f2(), 8),
            (FieldSpec::prime(7).unwrap(), 6),
            (FieldSpec::binary(4).unwrap(), 5),
            (FieldSpec::prime(3).unwrap(), 9),
        ] {
            for _ in 0..30 {
                let a = Circulant::random(spec, d, &mut rng).unwrap();
                let chi = char_poly(&a);
                assert_eq!(chi.degree(), Some(d));
                assert!(chi.is_monic());
                assert!(eval_at(&chi, &a).is_zero());
                // eigenvalue φ(1) means (x - φ(1)) | χ
                let root = a.row_sum().value();
                assert_eq!(chi.eval(root), 0);
            }
        }
    }

    #[test]
    fn bsgs_agrees_with_enumeration_in_f16() {
        let (ring, g) = f16();
        let c = OpCounter::new();
        let mut cur = ring.identity();
        for x in 0..15 {
            assert_eq!(bsgs(&ring, &g, &cur, 15, &c).unwrap(), x);
            cur = ring.op(&cur, &g);
        }
        assert!(cur.is_one());
        let h = group_pow(&ring, &g, 7, &c);
        assert_eq!(bsgs(&ring, &g, &h, 15, &c).unwrap(), 7);
    }

    #[test]
    fn bsgs_reports_missing_logs() {
        let (ring, g) = f16();
        let c = OpCounter::new();
        // g^5 has order 3; g itself is outside that subgroup
        let sub = group_pow(&ring, &g, 5, &c);
        assert!(matches!(bsgs(&ring, &sub, &g, 3, &c), Err(Error::NoSolution)));
        assert_eq!(bsgs(&ring, &sub, &ring.identity(), 3, &c).unwrap(), 0);
        // least solution when the bound exceeds the order
        assert_eq!(bsgs(&ring, &sub, &group_pow(&ring, &sub, 2, &c), 100, &c).unwrap(), 2);
    }

    #[test]
    fn pohlig_hellman_order_15_exhaustive() {
        let (ring, g) = f16();
        let c = OpCounter::new();
        for x in 0..15 {
            let h = group_pow(&ring, &g, x, &c);
            assert_eq!(pohlig_hellman(&ring, &g, &h, 15, &[(3, 1), (5, 1)], &c).unwrap(), x);
        }
        assert!(matches!(
            pohlig_hellman(&ring, &g, &g, 15, &[(3, 1), (7, 1)], &c),
            Err(Error::InvalidInstance(_))
        ));
    }

    #[test]
    fn pohlig_hellman_prime_powers() {
        // F_3^4 minus zero has order 80 = 2^4 * 5; use F_81 = F_3[x]/(x^4 + x + 2)
        let spec = FieldSpec::prime(3).unwrap();
        let modulus = Poly::new(spec, vec![2, 1, 0, 0, 1]).unwrap();
        assert!(modulus.is_irreducible().unwrap());
        let ring = QuotientRing { modulus };
        let factors = nt::factor(80);
        let x = Poly::monomial(spec, 1, 1);
        let g = (1..20)
            .map(|i| group_pow(&ring, &x.add(&Poly::constant(spec, i % 3)).unwrap(), 1 + i / 3, &OpCounter::new()))
            .find(|g| element_order(&ring, g, 80, &factors) == 80)
            .unwrap();
        let c = OpCounter::new();
        for e in 0..80 {
            let h = group_pow(&ring, &g, e, &c);
            assert_eq!(pohlig_hellman(&ring, &g, &h, 80, &factors, &c).unwrap(), e);
        }
    }

    #[test]
    fn ground_field_leaks() {
        let spec = FieldSpec::prime(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ps = ParamSet::new(
            Circulant::identity(spec, 5).unwrap(),
            crate::params::Policy { min_order_bits: 1, exp_bits: 8 },
            None,
        )
        .unwrap();
        let mut fired = 0;
        while fired < 10 {
            let a = Circulant::random(spec, 5, &mut rng).unwrap();
            if !a.is_unit() || a.det().value() != 2 {
                continue;
            }
            let m: u64 = rng.gen_range(0..1000);
            let inst = DlogInstance::new(ps.clone(), a.clone(), a.pow_u64(m), Some(m.into())).unwrap();
            let leak = detect_determinant_leak(&inst);
            assert_eq!(leak.status, LeakStatus::Fired);
            assert_eq!((leak.residue.unwrap(), leak.modulus.unwrap()), (m % 2, 2));
            fired += 1;
        }
    }

    #[test]
    fn projection_on_reducible_psi() {
        // 2 has order 3 mod 7, so ψ splits into two cubics
        let spec = f2();
        let d7 = preset("d7").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let m: u64 = rng.gen_range(0..49);
            let inst = DlogInstance::known_answer(&d7, m.into()).unwrap();
            let leak = projection_attack(&inst, None);
            assert_eq!(leak.status, LeakStatus::Fired, "{leak:?}");
            assert_eq!(m % leak.modulus.unwrap(), leak.residue.unwrap());
            let report = full_attack(&inst);
            assert!(report.success, "{report:?}");
        }
        let _ = spec;
    }

    #[test]
    fn instance_file_round_trip() {
        let ps = preset("d5").unwrap();
        let inst = DlogInstance::known_answer(&ps, 7u32.into()).unwrap();
        let json = inst.to_json();
        assert!(json.contains("\"base_hex\""));
        assert!(json.contains("\"true_m\": 7"));
        assert_eq!(DlogInstance::from_json(&json).unwrap(), inst);
        let mut file = inst.to_file();
        file.true_m = Some(BigUint::from(1u8) << 100u32);
        let text = serde_json::to_string(&file).unwrap();
        let back: DlogInstanceFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.true_m, file.true_m);
    }

    #[test]
    fn identity_target_gives_zero() {
        let ps = preset("d11").unwrap();
        let id = Circulant::identity(ps.spec, 11).unwrap();
        let inst = DlogInstance::new(ps.clone(), ps.generator.clone(), id, None).unwrap();
        let r = full_attack(&inst);
        assert!(r.success);
        assert_eq!(r.combined.unwrap().residue, 0);
        let lifted = Circulant::crt_lift(
            &CrtPair { at_one: ps.spec.element(1).unwrap(), residue: Poly::one(ps.spec) },
            11,
            &ps.psi,
        )
        .unwrap();
        assert!(lifted.is_identity());
    }
}
