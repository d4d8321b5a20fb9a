pub mod config;
pub mod pipeline;

pub use config::RunConfig;
pub use pipeline::{gradcheck_fixture, DemoSummary, GradcheckReport, Pipeline, TrainSummary, GRADCHECK_TOLERANCE};
