//! Device-level physics on top of the decomposition: operating mode and
//! performance, single-circuit machines, topology, and parameter scans.

mod fit;
mod g3b;
mod performance;
mod scan;
mod single;
mod topology;

pub use fit::{linear_fit, power_law_exponent, LinearFit};
pub use g3b::{g3b_edge_series, g3b_k_factor, k_high_t, EdgeSeriesPoint};
pub use performance::{
    carnot, circuit_operating_point, circuit_performance, device_mode, device_performance,
    operating_point, performance, reversible_x, CircuitPerformance, DeviceMode, Mode,
    OperatingPoint, PerformanceReport, REVERSIBLE_TOL,
};
pub use scan::{
    gho_truncation, grid_side, mean_quanta, run_scan, scan_point, totals, ScanPoint, ScanRow,
    ScanSpec, Truncation, GHO_TRUNCATION_TOL,
};
pub use single::{
    circuit_family, circuit_from_steps, current_bound, family_steps, favored_cycle, r_factor,
    r_factor_high_t, sole_circuit, triangle_ratio, CurrentBound, FamilyKind, RFactor, Role,
    TriangleRatio,
};
pub use topology::{lambda, topology_params, CircuitLambda, TopologyReport};
