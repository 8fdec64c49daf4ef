//! Numerical laboratory for the curve shortening flow of graphs.
//!
//! The graphical flow `u_t = u_xx / (1 + u_x^2)` is solved directly on an
//! interval ([`graphical`]) or through the parametric flow of a closed-off
//! curve ([`curve`]). The remaining modules check pointwise estimates against
//! computed flows and build solutions from measure initial data.

pub mod curve;
pub mod error;
pub mod estimates;
pub mod exact;
pub mod fleet;
pub mod graphical;
pub mod grid;
pub mod harnack;
pub mod measures;
pub mod polyline;
pub mod profile;
pub mod report;
pub mod trajectory;
pub mod tridiag;

pub use error::{Error, Result};
pub use grid::{Grid1D, Interval, ScalarField};
pub use polyline::{Point, Polyline};
pub use report::{CheckStatus, EstimateReport, Witness};
pub use trajectory::{CurveTrajectory, FieldTrajectory, RunMeta, Trajectory};
