//! Variable-topology networks with continuous weights, evolved under
//! behavior-based limited-capacity niching with no fitness objective.

mod genome;
mod network;
mod run;

pub use genome::{
    add_connection, add_node, initial_genome, mutate_neat, perturb_weight, ConnectionGene,
    InnovationCounter, NeatGenome, NodeGene, NodeRole, MOTOR_OUTPUTS, SENSOR_INPUTS, WEIGHT_LIMIT,
};
pub use network::NeatController;
pub use run::{
    estimate_evolvability, evaluate_neat, run_neat_niched, ControlMode, GenomeAudit, NeatParams,
    NeatRun,
};
