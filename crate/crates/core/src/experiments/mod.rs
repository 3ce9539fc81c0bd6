//! Figure and sweep harness: configuration, result tables, CSV output.

pub mod config;
pub mod figures;
pub mod output;
pub mod sweep;
pub mod table;

pub use config::{ExperimentConfig, FigureId, Quantity, Shard};
pub use figures::run_figure;
pub use sweep::{merge_shards, run_sweep};
pub use table::ResultTable;
