//! Differential calculus of unsteady planar scalar fields.
//!
//! A field `D(t, r)` is described by its order-2 space-time jet. From the
//! jet this crate computes the Frenet frame of the isoline through a point
//! and nine characteristics of the isoline's geometry and motion (front
//! velocity and acceleration, density and its growth rates, curvature,
//! rotation rates). Every closed form is paired with an oracle that
//! evaluates the defining limit directly, so the two can be compared.
//!
//! Around that core sit a unicycle integrator with the reading-rate
//! formulas for a robot sampling the field, the deviation bounds for a
//! perpetually rotating robot, and a bound on the total rotation of the
//! gradient over a space-time box.

pub mod characteristics;
pub mod domain;
pub mod error;
pub mod field;
pub mod geometry;
pub mod isoline;
pub mod kinematics;
pub mod numeric;
pub mod oracles;
pub mod suites;

pub use characteristics::{
    char_set, char_set_at, frenet, frenet_at, identity_residuals, shift_predict, CharSet,
    FrenetFrame, ShiftKind, ShiftPrediction,
};
pub use error::{Error, Result};
pub use field::{eval_jet2, fd_jet2, regularity, FieldJet2, FieldSpec, GaussianTerm, ScalarField};
pub use geometry::{Point2, Sym2, Vec2};
pub use oracles::{OracleSettings, Quantity};
