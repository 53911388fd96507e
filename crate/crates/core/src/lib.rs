//! Numerical verification of minimality and harmonicity conditions for
//! metric G-structures.
//!
//! A G-structure on a Riemannian manifold singles out a tensor field (an
//! almost complex structure, an almost contact triple) compatible with the
//! metric. Its failure to be parallel is measured by the intrinsic torsion
//! `xi`, and the structure is harmonic or minimal when the section it
//! defines into an associated twistor-style bundle is a harmonic or minimal
//! section with respect to a naturally deformed metric. This crate evaluates
//! those conditions pointwise, in charts, with exact first and second
//! derivatives obtained by forward-mode automatic differentiation, and
//! reports residual norms at sampled points.
//!
//! The pieces, bottom up:
//!
//! * [`jet`]: truncated second-order arithmetic, the differentiation engine.
//! * [`expr`]: a small expression language for metric entries and potentials.
//! * [`tensor`]: dense tensors with explicit variance, index algebra,
//!   Gram-Schmidt frames.
//! * [`geometry`]: metric fields, Christoffel symbols, curvature, covariant
//!   derivatives.
//! * [`structure`]: almost Hermitian and almost contact metric structures,
//!   intrinsic torsion, the deformed metric.
//! * [`manifolds`]: the built-in catalog and user-defined manifolds.
//! * [`conditions`]: the harmonicity and minimality residuals themselves.
//! * [`report`]: batch runs over sampled points, JSON and CSV output.

pub mod conditions;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod jet;
pub mod manifolds;
pub mod report;
pub mod structure;
pub mod tensor;

pub use error::{Error, Result};
