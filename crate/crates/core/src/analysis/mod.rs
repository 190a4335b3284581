//! Statistics over populations and runs: niche-averaged evolvability, Pearson
//! correlation with a least-squares fit, distance profiles, heat maps and
//! cross-run aggregation.

mod aggregate;
mod record;
mod spatial;
mod stats;

pub use aggregate::{aggregate_runs, AggregateRow, AggregateSeries};
pub use record::{Checkpoint, RunRecord, SnapshotStats};
pub use spatial::{
    distance_profile, grid_heatmap, lattice_heatmap, DistanceMetric, DistanceProfile, HeatMap,
    ProfileBin,
};
pub use stats::{mean, pearson, per_niche_mean, standard_error, Correlation, CorrelationResult};
