//! File formats: TOML graph and run-config files, CSV and JSON reports.

mod config;
mod graph_file;
mod report;

pub use config::{parse_caps, CapsConfig, NamedScan, RunConfig, Tolerances, CONFIG_SCHEMA};
pub use graph_file::{
    parse_graph_file, read_graph_file, EdgeEntry, GraphFile, LevelEntry, GRAPH_SCHEMA,
};
pub use report::{
    alt_rows, circuit_csv, fmt_num, read_scan_csv, scan_csv, write_atomic, AltRow, BathTotal,
    Check, ScanSummary, Totals,
};
