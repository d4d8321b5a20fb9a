pub mod dataforge;
pub mod evalharness;
pub mod hindpo;
pub mod policy;
pub mod stats;
pub mod textmetrics;
pub mod toy;
pub mod trainer;
