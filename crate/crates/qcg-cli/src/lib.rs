//! Library surface of the experiment harness, so integration tests can run
//! the same code paths as the binary.

pub mod config;
pub mod experiments;
pub mod records;

pub use config::{ConfigError, ExperimentConfig, GeneratorSpec, Grid, OutputFormat};
pub use experiments::{
    best_state_index, run_commutativity, run_cross_generator_matrix, run_sdp_tables,
    run_time_sweep, run_werner_sweep, sdp_tables_to_csv, sdp_tables_to_json, BenchOutput,
    HarnessError, SdpCell, SdpTables,
};
pub use records::{to_csv, to_json, BenchmarkRecord, Summary, CSV_HEADER};
