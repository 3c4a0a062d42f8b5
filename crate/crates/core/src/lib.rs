//! Wiretap codes for classical-quantum channels built from mosaics of
//! designs.
//!
//! Design and field code ([`gf`], [`designs`], [`mosaic_build`]) is exact
//! integer arithmetic. Everything numeric is generic over [`scalar::Real`]
//! (`f32` or `f64`); the aliases below fix `f64`.

pub mod check;
pub mod derand;
pub mod designs;
pub mod format;
pub mod gf;
pub mod linalg;
pub mod mosaic_build;
pub mod quantum;
pub mod scalar;
pub mod wiretap;

pub use designs::{BibdParams, ClassPartition, DesignParams, FunctionalForm, GddParams, IncidenceStructure, Mosaic};
pub use gf::{FieldCtx, FieldElement};
pub use mosaic_build::Ex2Mosaic;
pub use quantum::Tolerances;
pub use scalar::Real;

pub type Density = quantum::DensityOperator<f64>;
pub type Channel = wiretap::CqChannel<f64>;
pub type WiretapCode = wiretap::Code<f64>;
pub type Evaluator = wiretap::LeakageEvaluator<f64>;
