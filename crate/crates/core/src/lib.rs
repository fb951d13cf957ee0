//! Desk-scale numerical laboratory for weighted Hardy spaces h^p(β).
//!
//! The crate provides, in dependency order:
//!
//! * [`weights`] — generators for the weight families β under study, stored in
//!   the log domain, plus the reciprocal self-convolution B_n and regularity
//!   diagnostics (slow oscillation, essential decrease, submultiplicativity).
//! * [`series`] — truncated power series with complex coefficients, Cauchy
//!   products, composition, and the weighted norms ‖·‖_{h^p(β)}.
//! * [`quad`] — adaptive Gauss–Legendre quadrature with an interval-halving
//!   error estimate, shared by the moment integrals and oscillatory integrals.
//! * [`autom`] — coefficients of disk automorphisms T_a and their powers, the
//!   composition-operator matrix on h^p(β), column/row sums with fitted growth
//!   exponents, oscillatory coefficient integrals, and a van der Corput check.
//! * [`opmat`] — dense-matrix machinery: ℓ² operator norms by power iteration
//!   on the Gram operator, Hankel-type Schur multiplier matrices Ψ(u), and
//!   bilinear multiplication diagnostics.
//! * [`experiments`] — reproducible experiment drivers with CSV/JSON emission,
//!   used by the `hplab` binary.
//!
//! Everything is deterministic given a seed; matrices are dense and capped at
//! 4096² entries; norms of objects with huge weights are computed in the log
//! domain throughout.

pub mod autom;
pub mod experiments;
pub mod opmat;
pub mod quad;
pub mod series;
pub mod util;
pub mod weights;
