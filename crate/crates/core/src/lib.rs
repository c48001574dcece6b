//! Random permutation representations of free products of finite groups.
//!
//! A uniformly random homomorphism `Γ → Sym(N)` for `Γ = G_1 * ... * G_m`
//! is a tuple of independent uniform homomorphisms `G_i → Sym(N)`. This crate
//! provides the pieces needed to study such representations at desk scale:
//!
//! - [`group`]: finite groups by table, free products, normal forms and the
//!   torsion / proper-power / reversible / generic element classification.
//! - [`homcount`]: exact counts `χ_n(G) = |hom(G, Sym(n))|`, subgroup census,
//!   exact expected fixed-point counts and a brute-force oracle.
//! - [`fe`]: truncated fractional expansions in `n^{-1/q}`, their closure
//!   operations, least-squares extrapolation, and the saddle-point radius of
//!   `exp(P(z))` with its Lagrange-inversion approximation.
//! - [`sampler`]: exact uniform sampling of homomorphisms into `Sym(N)`.
//! - [`spectra`]: Schreier graphs of sampled actions and their spectral gap.
//! - [`walks`]: exact random-walk distributions on `Γ`, hitting masses and
//!   moment-method norm estimates.
//! - [`trace`]: expected traces of random representations and checks of the
//!   structure of their expansions.

pub mod error;
pub mod fe;
pub mod group;
pub mod homcount;
pub mod precision;
pub mod rng;
pub mod sampler;
pub mod spectra;
pub mod trace;
pub mod walks;

pub use error::{Error, Result};
pub use group::{ElementClass, FiniteGroup, FreeProduct, NormalForm, Syllable};

/// Version string embedded in experiment records.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
