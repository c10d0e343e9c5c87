//! Instance generation, batch runs and result aggregation.

mod batch;
mod generate;
mod record;
mod stats;

pub use batch::{desk_gap_spec, load_instances_dir, record_from_report, recorded_time, run_batch, run_cell, Config};
pub use generate::{generate_instance, Family, GenSpec};
pub use record::{gap_percent, records_from_csv, records_from_json, records_to_csv, records_to_json, RunRecord, CSV_HEADER};
pub use stats::{performance_profile, shifted_geomean, solved, PerformanceProfile, ProfilePoint};
