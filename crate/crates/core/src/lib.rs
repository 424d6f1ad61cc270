//! Numerical certification and explicit construction of maps that are free
//! along a distribution.
//!
//! A map `F: M -> R^q` is free along a `k`-dimensional distribution `H`
//! (spanned by a frame `xi_1, .., xi_k`) when the `k + k(k+1)/2` vectors
//! `L_{xi_a} F` and `{L_{xi_a}, L_{xi_b}} F` are linearly independent. This
//! crate evaluates those Lie derivatives exactly through second-order jets,
//! certifies the rank numerically, inverts the linearized metric-inducing
//! system, and builds the explicit free maps for one-dimensional
//! distributions, completely integrable systems and Riemann-Poisson brackets.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line front end and parallel sweeps live in the `hfree` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod constructions;
pub mod contour;
pub mod error;
pub mod expr;
pub mod genericity;
pub mod geometry;
pub mod hfree;
pub mod jets;
pub mod linalg;
pub mod transversal;

mod math;

pub use constructions::{
    build_cis, build_rp, cis_constant, compose_1d, curve_freeness, rp_bracket, CisMap, Composed1d, CurveDomain,
    CurveKind, FreeCurve, RpBracketSpec, RpMap,
};
pub use error::{Error, Result};
pub use expr::{eval_jet2, parse, Chart, Expr, Function};
pub use geometry::{change_frame, frame_rank, Distribution, FrameChange, DEFAULT_RANK_TOL};
pub use hfree::{
    assemble_d, induced_metric, infinitesimal_invert, is_h_immersion_at, is_hfree_at,
    wintergarten_rank, DMatrix, InducedMetric, MapSpec,
};
pub use jets::{anticommutator, lie, lie2, Jet2, VectorField};

/// `s_k = k(k+1)/2`, the dimension of symmetric `k x k` matrices.
pub const fn sym_dim(k: usize) -> usize {
    k * (k + 1) / 2
}

/// Version of this crate, recorded in report headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
