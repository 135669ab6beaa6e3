//! A stock-market simulation on the dataspace runtime: clock, bank, wallet,
//! sellers, brokers and buyers, plus a scripted scenario runner.

pub mod account_bank;
pub mod bank;
pub mod broker;
pub mod buyer;
pub mod clock;
pub mod protocol;
pub mod scenario;
pub mod seller;
pub mod wallet;

pub use scenario::{run_scenario, run_script_text, ScenarioConfig, ScenarioKind, ScenarioResult, Script};
