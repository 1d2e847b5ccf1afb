//! Sensing-margin analysis for 1T1R memristor crossbar columns.
//!
//! * [`model`]: closed-form column model with transistor read resistance,
//!   accumulated off-transistor leakage and metal-line IR drop.
//! * [`oracle`]: exact nodal solution of the distributed BL/SL ladder, used
//!   to validate the closed form.
//! * [`analysis`]: sweeps, factor ablation, optimal resistance range and
//!   read-voltage compensation.
//! * [`io`] and [`cli`]: profile files, CSV tables, SVG charts and the
//!   command-line front end.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod io;
pub mod model;
pub mod oracle;

pub use error::{Error, ProfileError, Result};
pub use model::{
    effective_ratio, ideal_ratio, leakage_at, normalized_margin, read_currents, CellSpec, Factors,
    LeakagePoint, ReadSetup, SenseResult, TechnologyProfile,
};
