//! Toolkit for C*-relations on finite-dimensional matrix assignments.
//!
//! The numerical core is generic over [`scalar::Real`] (`f32` or `f64`);
//! exponents of polynomial factors are exact rationals. The experiment
//! harness in [`verify`] works in `f64`.

pub mod approx;
pub mod assignment;
pub mod error;
pub mod matcalc;
pub mod ncpoly;
pub mod relations;
pub mod scalar;
pub mod verify;

pub use error::{Error, ParseError, Result};

pub type Matrix64 = matcalc::Matrix<f64>;
pub type Assignment64 = assignment::Assignment<f64>;
pub type Policy64 = matcalc::TolerancePolicy<f64>;
pub type Poly64 = ncpoly::NcPolynomial<f64>;
pub type Relation64 = relations::Relation<f64>;
pub type System64 = relations::RelationSystem<f64>;

pub type Matrix32 = matcalc::Matrix<f32>;
pub type Assignment32 = assignment::Assignment<f32>;
pub type Policy32 = matcalc::TolerancePolicy<f32>;
pub type Poly32 = ncpoly::NcPolynomial<f32>;
pub type Relation32 = relations::Relation<f32>;
pub type System32 = relations::RelationSystem<f32>;
