//! The enumerable fixed-topology genotype space: 18 ternary connection genes
//! of a 3-2-2 recurrent network, exhaustive tabulation, and evolutionary
//! dynamics driven by the resulting lookup table.

mod dynamics;
mod genome;
mod network;
mod shard;
mod table;

pub use dynamics::{
    reproduce, robot_stats, run_robot_drift, run_robot_niched, RobotDriftParams, RobotRun,
};
pub use genome::{
    decode, encode, single_mutation_neighbors, FixedAnnGenome, Gene, GeneMask, GenotypeId,
    Subspace, GENES, SPACE_SIZE,
};
pub use network::{
    activate, steepened_sigmoid, AnnState, FixedAnnController, Neuron, CONNECTIONS,
    DEFAULT_STEEPNESS, HIDDEN, INPUTS, OUTPUTS,
};
pub use shard::{
    decode_shard, encode_shard, load_table, partition, read_manifest, sha256_hex,
    verify_coverage, write_table, ShardEntry, TableManifest, FORMAT_VERSION, HEADER_LEN,
    MANIFEST_FILE, RECORD_LEN,
};
pub use table::{
    compute_niches, evolvability_from_niches, tabulate, GenotypeEvaluator, LookupRecord,
    LookupTable,
};
