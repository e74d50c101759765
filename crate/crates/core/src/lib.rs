//! Age of information for a sensor powered by a dedicated RF energy source.
//!
//! The sensor fills a capacitor of size B from the energy transmitter and,
//! whenever it is full, spends all of it on one status update. This crate
//! provides:
//!
//! - [`model`]: physical parameters and the statistics `beta` and `pi`;
//! - [`analytics`]: closed-form moments and average age;
//! - [`simulator`]: a slot-level Monte Carlo of the same system;
//! - [`optimizer`]: the capacitor size minimizing the average age;
//! - [`experiment`], [`output`] and [`cli`]: sweeps, reports and file I/O.

pub mod analytics;
pub mod cli;
pub mod error;
pub mod experiment;
pub mod model;
pub mod optimizer;
pub mod output;
pub mod simulator;

pub use analytics::{average_aoi, AnalyticReport};
pub use error::{Error, Result, RunCounters};
pub use model::{derive, DerivedParams, SystemParams};
pub use optimizer::{optimize_capacitor, OptResult};
pub use simulator::{simulate, SimConfig, SimStats, Window};
