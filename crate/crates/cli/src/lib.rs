//! File formats, a parallel study driver and the command-line front end for
//! [`addhaz_core`].

pub mod error;
pub mod fitfile;
pub mod input;
pub mod output;
pub mod study;

pub use error::{Category, CliError, Result};
pub use fitfile::{load_fit, save_fit, FitFile};
pub use input::{load_cone, load_dataset, load_sim_config, parse_grid, parse_vector, Columns};
pub use output::export_curves;
pub use study::run_study_parallel;
