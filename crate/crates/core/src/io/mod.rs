//! Text formats read and written by the command line: `key = value`
//! configuration files, trajectory CSV and list-valued flags.

mod config;
mod table;

pub use config::{parse_h_list, parse_param_override, parse_vector, Config};
pub use table::{format_real, read_table, write_trajectory, Table, TrajectoryColumns};
