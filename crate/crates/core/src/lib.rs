//! Estimators for approximate tangent cones, higher-order approximate jets and
//! approximate second fundamental forms of sets that are only known through a
//! measure oracle.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: planes, homogeneous forms, jets, shear maps and the region
//!   vocabulary (balls, cones, cylinders, graph neighbourhoods).
//! * [`measure`]: the [`MeasureOracle`] with chart, point-cloud and segment
//!   backends.
//! * [`density`]: density traces, limit verdicts and the tangent-cone tests.
//! * [`jet`]: tangent-plane estimation and iterated jet fitting.
//! * [`pointwise`]: distance-function based cones, pointwise tangent planes and
//!   full-density carving.
//! * [`sff`]: the approximate second fundamental form.
//! * [`fixtures`]: synthetic sets with analytic ground truth.
//! * [`verify`]: the property suites behind `gmtjet verify`.

pub mod config;
pub mod density;
pub mod error;
pub mod fixtures;
pub mod geometry;
pub mod jet;
pub mod measure;
pub mod pointwise;
pub mod report;
pub mod sff;
pub mod verdict;
pub mod verify;

pub use config::Config;
pub use density::{DensityTrace, Limit, ScaleSchedule, TraceKind};
pub use error::{Error, Result};
pub use geometry::{HomogeneousForm, Jet, Plane, Region, ShearMap, SymmetricMultilinear, Vector};
pub use measure::{Mass, MeasureOracle, Sample};
pub use verdict::{Status, Verdict};
