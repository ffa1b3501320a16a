//! Desk-scale numerical verification of the strong maximum principle for
//! quasi-linear elliptic operators, together with its geometric instantiation
//! as the mean-curvature operator of spacelike graphs in Lorentzian charts and
//! the warped-product splitting picture it feeds.
//!
//! The crate is organised around small, checkable pieces:
//!
//! * [`symkernel`] — dense symmetric-matrix orderings, eigenvalue bounds and
//!   the trace-bound lemma every Hessian estimate rests on;
//! * [`quasilinear`] — quasi-linear operators `M[u] = Σ aᶦʲ(x,u,Du) D_ij u + b`,
//!   ellipticity certification and path linearization;
//! * [`maxlab`] — the comparison function, the derived constant ledger,
//!   standard-setup validation and the contradiction pipeline;
//! * [`lorgraph`] — spacelike graphs over Lorentzian normal-form charts and
//!   extraction of the mean-curvature coefficients;
//! * [`modelspace`] — Minkowski space and the anti-de-Sitter-type warped
//!   strip, with Lorentzian distance, Busemann functions, geodesic spheres,
//!   the splitting map and cosmological time;
//! * [`curvature`] — finite-difference Riemann/Ricci/scalar/Weyl tensors,
//!   conformal transformation checks and the product-norm decomposition.
//!
//! Every checker emits a [`report::VerificationReport`] so outcomes are
//! machine-readable and reproducible under a fixed seed.

// index loops mirror the tensor notation throughout; negated comparisons are
// the NaN-rejecting forms on purpose
#![allow(clippy::needless_range_loop)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curvature;
pub mod lorgraph;
pub mod maxlab;
pub mod modelspace;
pub mod quad;
pub mod quasilinear;
pub mod report;
pub mod symkernel;

pub use report::{Verdict, VerificationReport};
