//! Float routines routed through `libm` so std and no_std builds share one
//! deterministic implementation.

pub(crate) use libm::{erfc, fabs, log, pow, sqrt};
