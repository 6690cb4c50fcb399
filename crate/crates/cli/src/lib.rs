pub mod config;
pub mod error;
pub mod plot;
pub mod scenario;

pub use config::ScenarioConfig;
pub use error::CliError;
pub use scenario::{Runner, Summary};
