//! Computational toolkit for diagonal Fermat-type curves
//! `a1 x1^d + a2 x2^d + a3 x3^d = 0`.
//!
//! The crate is split by concern:
//!
//! * [`arith`]: factorization, multiplicative functions, d-free parts and
//!   power congruences modulo prime powers.
//! * [`local`]: real and p-adic solubility of diagonal forms with
//!   re-checkable certificates, plus the CRT witness class.
//! * [`sieve`]: the large-sieve quantities `tau(p)`, `G(z)`, `g_k` and the
//!   density bound envelopes.
//! * [`counts`]: density experiments over coefficient boxes.
//! * [`points`]: bounded-height point search, lattice covers, basis
//!   reduction and point-count bounds.
//! * [`cli`]: the `fermatlab` command line front end.
//!
//! Exact quantities use [`Rational`]; real-valued bound envelopes are
//! generic over any [`Real`] scalar and are usually evaluated at [`Bound`].

pub mod arith;
pub mod cli;
pub mod counts;
pub mod error;
pub mod local;
pub mod points;
pub mod sieve;

use num_traits::{Float, FromPrimitive};

pub use error::{Error, Result};

/// Exact rational used for `psi(d)`, `G(z)` and `g_k(n)`.
pub type Rational = num_rational::BigRational;

/// Floating scalar accepted by the bound evaluators.
pub trait Real: Float + FromPrimitive + std::fmt::Debug + Send + Sync + 'static {}

impl<T: Float + FromPrimitive + std::fmt::Debug + Send + Sync + 'static> Real for T {}

/// Default precision for reported bound values.
pub type Bound = f64;

/// Single precision bound evaluation, handy for quick sweeps.
pub type BoundF32 = f32;

/// Version string embedded in every report.
pub const VERSION: &str = concat!("fermatlab ", env!("CARGO_PKG_VERSION"));

/// Environment variable that lifts every enumeration guard.
pub const GUARD_OVERRIDE_ENV: &str = "FERMATLAB_GUARD_OVERRIDE";

/// True when `FERMATLAB_GUARD_OVERRIDE=1` is set.
pub fn guard_override_from_env() -> bool {
    std::env::var(GUARD_OVERRIDE_ENV).map(|v| v == "1").unwrap_or(false)
}

pub use arith::{DfreeDecomposition, Factorization};
pub use counts::{DensityReport, Variant};
pub use local::{DiagonalForm, LocalCertificate, Place, WitnessClass};
pub use points::{Lattice3, LatticeCover, RationalPoint};
pub use sieve::SieveParams;
