//! Convergence diagnostics and goodness-of-fit tables.

mod gof;
mod psrf;
mod traces;
mod turnbull;

pub use gof::{cdf_overlay, gof_data, invert_mean_cdf, GofTables, OverlayPoint, PpPoint, QqPoint};
pub use psrf::{psrf, PsrfReport, PsrfValue, PSRF_CONFIDENCE};
pub use traces::{Monitored, ScalarTraceSet};
pub use turnbull::{turnbull, TurnbullEstimate, TurnbullInterval};
