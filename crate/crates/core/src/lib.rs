//! Robust multiperiod capacitated network design.
//!
//! The crate is organised bottom-up: [`instance`] holds networks and
//! multiperiod data, [`uncertainty`] builds multiband deviation sets,
//! [`evaluate`] prices a fixed routing under the worst case, [`relaxation`]
//! gives closed-form nominal LP values, [`ants`] and [`search`] construct and
//! improve routings, and [`reformulate`] exports MILP models as LP text.

pub mod ants;
pub mod error;
pub mod evaluate;
pub mod instance;
pub mod reformulate;
pub mod relaxation;
pub mod report;
pub mod search;
pub mod uncertainty;

pub use error::{Error, Result};
