//! Coordinate-chart computations in contravariant Poisson geometry.
//!
//! A chart carries a bivector field `Π` and a cotangent metric (cometric)
//! `g`. From the pair this crate builds the contravariant Levi-Civita
//! connection — the unique torsion-free, metric connection differentiating
//! 1-forms along 1-forms through the sharp map `♯_Π` — and everything
//! derived from it: curvature, Ricci and scalar curvature, the Laplacian
//! and Hessian of functions, and the compatibility tensor `DΠ`.
//!
//! On warped products `B ×_f F` (product bivector `Π_B + Π_F`, cometric
//! `g_B + g_F / f²`) the crate additionally evaluates closed-form
//! decompositions of the connection, curvature, Ricci and scalar curvature
//! in terms of the factor geometries, and verifies them numerically against
//! direct computation on the product chart. Einstein classification and the
//! constant-curvature warping-function solvers build on top.
//!
//! Everything is pointwise exact: scalar quantities are expression trees
//! with symbolic derivatives, and sums over orthonormal coframes are
//! implemented as inverse-cometric traces, so indefinite signatures need no
//! frame construction.

// Tensor loops index several arrays by the same i/j/k; iterator rewrites
// obscure the component notation.
#![allow(clippy::needless_range_loop)]

pub mod chart;
pub mod connection;
pub mod einstein;
pub mod error;
pub mod expr;
pub mod fields;
pub mod geometry;
pub mod point;
pub mod report;
pub mod sample;
pub mod space;
pub mod warped;

pub use chart::Chart;
pub use error::{GeomError, Result};
pub use expr::{Evaluator, ScalarField};
pub use fields::{BivectorField, Cometric, CovectorField, VectorField};
pub use point::Point;
pub use report::{CheckRecord, ReportSummary, VerificationReport};
pub use sample::{sample_points, Exclusion, SampleSpec};
pub use space::Space;
pub use warped::WarpedSpace;
