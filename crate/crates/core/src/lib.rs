pub mod cohort;
pub mod morphometry;
pub mod pipeline;
pub mod report;
pub mod stats;
