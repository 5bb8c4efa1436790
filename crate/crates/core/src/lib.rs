//! Discrete-logarithm cryptography over circulant matrices on finite fields.
//!
//! * [`field`]: ground field `F_q`, `q = p^k`.
//! * [`circulant`]: the ring `F_q[x]/(x^d - 1)` of `d x d` circulants, with
//!   permutation squaring in characteristic 2.
//! * [`params`]: parameter sets and their validation.
//! * [`protocol`]: Diffie-Hellman and textbook ElGamal.
//! * [`attack`]: leaks, projection to `F_{q^{d-1}}` and generic solvers.
//! * [`bench`]: operation counts and timings for exponentiation.

pub mod attack;
pub mod bench;
pub mod circulant;
pub mod counter;
pub mod error;
pub mod field;
pub mod nt;
pub mod par;
pub mod params;
pub mod poly;
pub mod protocol;

pub use circulant::{Circulant, CrtPair, MulStrategy, SquarePermutation};
pub use counter::{OpCounter, OpCounts};
pub use error::{Error, Result};
pub use field::{FieldElement, FieldSpec};
pub use par::Parallelism;
pub use params::{ParamSet, Policy};
pub use poly::Poly;
