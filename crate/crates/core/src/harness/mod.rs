//! Drivers for the numerical studies, their configuration and reports.

pub mod config;
pub mod drivers;
pub mod mms;
pub mod problems;
pub mod report;

pub use config::{Config, Driver};
pub use drivers::run;
pub use report::{Check, RunReport};
