//! Models high-frequency buy/sell market-order flow as a bivariate self- and
//! cross-exciting point process, forecasts the near-term distribution of Order
//! Flow Imbalance by simulation, and compares competing forecast models with
//! the Superior Predictive Ability test.
//!
//! The pipeline runs: parse tick data -> classify trades by order id ->
//! build counting processes -> fit Hawkes / Poisson / VAR models on rolling
//! windows -> simulate forecast-horizon order flow -> score realized OFI
//! against each model's empirical distribution -> compare loss arrays.

pub mod diagnostics;
pub mod estimation;
pub mod forecasting;
pub mod hawkes;
pub mod market_data;
pub mod ofi;
pub mod seeding;
pub mod simulation;
pub mod spa;
pub mod var;

pub use hawkes::{EventHistory, HawkesModel, KernelSpec};
pub use market_data::{CountingProcess, RawTick, Session, Side, TradeEvent};
pub use ofi::OfiSeries;
