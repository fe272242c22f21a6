//! File formats: binary matrices, run configuration, CSV results and SVG
//! plots.

pub mod config;
pub mod instance_files;
pub mod matrix_file;
pub mod plots;
pub mod results_csv;

pub use instance_files::{load_instance, write_instance, AnyInstance};
pub use config::{load_config, parse_config, InstanceSource, Mode, OutputConfig, RunConfig};
pub use matrix_file::{read_matrix, read_matrix_as, write_matrix, AnyMatrix, FileScalar};
pub use plots::emit_plots;
pub use results_csv::{read_results_csv, write_results_csv, RESULTS_HEADER};
