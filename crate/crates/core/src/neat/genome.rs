use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::NeatParams;
use crate::error::{Error, Result};

pub const SENSOR_INPUTS: usize = 6;
pub const MOTOR_OUTPUTS: usize = 2;
pub const WEIGHT_LIMIT: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeRole {
    Input,
    Bias,
    Hidden,
    Output,
}

impl NodeRole {
    /// Inputs and the bias are set from outside, never computed.
    pub fn is_source_only(self) -> bool {
        matches!(self, NodeRole::Input | NodeRole::Bias)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeGene {
    pub id: u32,
    pub role: NodeRole,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConnectionGene {
    pub source: u32,
    pub target: u32,
    pub weight: f64,
    pub enabled: bool,
    pub innovation: u64,
}

/// Innovation numbers handed out within one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InnovationCounter {
    next: u64,
}

impl InnovationCounter {
    pub fn starting_at(next: u64) -> Self {
        InnovationCounter { next }
    }

    pub fn peek(&self) -> u64 {
        self.next
    }

    pub fn next(&mut self) -> u64 {
        let n = self.next;
        self.next += 1;
        n
    }
}

/// Variable-topology genome. Nodes are listed inputs, bias, outputs, then
/// hidden nodes in creation order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeatGenome {
    pub nodes: Vec<NodeGene>,
    pub connections: Vec<ConnectionGene>,
}

impl NeatGenome {
    pub fn node(&self, id: u32) -> Option<&NodeGene> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn count_role(&self, role: NodeRole) -> usize {
        self.nodes.iter().filter(|n| n.role == role).count()
    }

    pub fn enabled_connections(&self) -> impl Iterator<Item = &ConnectionGene> {
        self.connections.iter().filter(|c| c.enabled)
    }

    pub fn max_innovation(&self) -> Option<u64> {
        self.connections.iter().map(|c| c.innovation).max()
    }

    fn next_node_id(&self) -> u32 {
        self.nodes.iter().map(|n| n.id).max().map_or(0, |m| m + 1)
    }

    /// Checks the structural invariants: unique node ids, endpoints exist,
    /// targets are computed nodes, weights within the cap, no duplicate
    /// enabled pair, unique innovations.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(format!("genome: {m}")));
        let mut ids = HashSet::new();
        for n in &self.nodes {
            if !ids.insert(n.id) {
                return bad(format!("duplicate node id {}", n.id));
            }
        }
        if self.count_role(NodeRole::Input) != SENSOR_INPUTS
            || self.count_role(NodeRole::Output) != MOTOR_OUTPUTS
        {
            return bad(format!(
                "expected {SENSOR_INPUTS} inputs and {MOTOR_OUTPUTS} outputs"
            ));
        }
        let mut pairs = HashSet::new();
        let mut innovations = HashSet::new();
        for c in &self.connections {
            let (Some(_), Some(t)) = (self.node(c.source), self.node(c.target)) else {
                return bad(format!("connection {} has a missing endpoint", c.innovation));
            };
            if t.role.is_source_only() {
                return bad(format!("connection {} targets an input", c.innovation));
            }
            if !(c.weight.abs() <= WEIGHT_LIMIT) {
                return bad(format!("weight {} outside [-3, 3]", c.weight));
            }
            if c.enabled && !pairs.insert((c.source, c.target)) {
                return bad(format!("duplicate connection {}->{}", c.source, c.target));
            }
            if !innovations.insert(c.innovation) {
                return bad(format!("duplicate innovation {}", c.innovation));
            }
        }
        Ok(())
    }
}

/// Six sensor inputs and a bias wired to both outputs with uniform weights in
/// [-3, 3], no hidden nodes. Innovations 0..14 are used, so a run's counter
/// starts at 14.
pub fn initial_genome<R: Rng + ?Sized>(rng: &mut R) -> (NeatGenome, InnovationCounter) {
    let mut nodes = Vec::with_capacity(SENSOR_INPUTS + 1 + MOTOR_OUTPUTS);
    for id in 0..SENSOR_INPUTS as u32 {
        nodes.push(NodeGene {
            id,
            role: NodeRole::Input,
        });
    }
    let bias = SENSOR_INPUTS as u32;
    nodes.push(NodeGene {
        id: bias,
        role: NodeRole::Bias,
    });
    for k in 0..MOTOR_OUTPUTS as u32 {
        nodes.push(NodeGene {
            id: bias + 1 + k,
            role: NodeRole::Output,
        });
    }
    let mut counter = InnovationCounter::starting_at(0);
    let mut connections = Vec::new();
    for source in 0..=bias {
        for k in 0..MOTOR_OUTPUTS as u32 {
            connections.push(ConnectionGene {
                source,
                target: bias + 1 + k,
                weight: rng.random_range(-WEIGHT_LIMIT..=WEIGHT_LIMIT),
                enabled: true,
                innovation: counter.next(),
            });
        }
    }
    (NeatGenome { nodes, connections }, counter)
}

/// Adds `delta` to a weight and clamps to the cap.
pub fn perturb_weight(weight: f64, delta: f64) -> f64 {
    (weight + delta).clamp(-WEIGHT_LIMIT, WEIGHT_LIMIT)
}

/// Connects a uniformly chosen (source, target) pair that has no gene yet.
/// Targets are hidden or output nodes; self-loops are allowed. Returns false
/// when every pair is already connected.
pub fn add_connection<R: Rng + ?Sized>(
    genome: &mut NeatGenome,
    counter: &mut InnovationCounter,
    rng: &mut R,
) -> bool {
    let existing: HashSet<(u32, u32)> = genome
        .connections
        .iter()
        .map(|c| (c.source, c.target))
        .collect();
    let candidates: Vec<(u32, u32)> = genome
        .nodes
        .iter()
        .flat_map(|s| {
            genome
                .nodes
                .iter()
                .filter(|t| !t.role.is_source_only())
                .map(move |t| (s.id, t.id))
        })
        .filter(|p| !existing.contains(p))
        .collect();
    if candidates.is_empty() {
        return false;
    }
    let (source, target) = candidates[rng.random_range(0..candidates.len())];
    genome.connections.push(ConnectionGene {
        source,
        target,
        weight: rng.random_range(-WEIGHT_LIMIT..=WEIGHT_LIMIT),
        enabled: true,
        innovation: counter.next(),
    });
    true
}

/// Splits a uniformly chosen enabled connection with a new hidden node: the
/// old gene is disabled, the incoming half gets weight 1 and the outgoing
/// half keeps the old weight. Returns false if nothing is enabled.
pub fn add_node<R: Rng + ?Sized>(
    genome: &mut NeatGenome,
    counter: &mut InnovationCounter,
    rng: &mut R,
) -> bool {
    let enabled: Vec<usize> = (0..genome.connections.len())
        .filter(|&i| genome.connections[i].enabled)
        .collect();
    if enabled.is_empty() {
        return false;
    }
    let i = enabled[rng.random_range(0..enabled.len())];
    let old = genome.connections[i];
    genome.connections[i].enabled = false;
    let id = genome.next_node_id();
    genome.nodes.push(NodeGene {
        id,
        role: NodeRole::Hidden,
    });
    genome.connections.push(ConnectionGene {
        source: old.source,
        target: id,
        weight: 1.0,
        enabled: true,
        innovation: counter.next(),
    });
    genome.connections.push(ConnectionGene {
        source: id,
        target: old.target,
        weight: old.weight,
        enabled: true,
        innovation: counter.next(),
    });
    true
}

/// One asexual reproduction: per-connection weight perturbation, then
/// add-connection, then add-node, each with its own probability.
pub fn mutate_neat<R: Rng + ?Sized>(
    genome: &NeatGenome,
    params: &NeatParams,
    counter: &mut InnovationCounter,
    rng: &mut R,
) -> NeatGenome {
    let mut child = genome.clone();
    if params.weight_perturb_prob > 0.0 {
        let h = params.weight_perturb_halfwidth;
        for c in &mut child.connections {
            if rng.random_bool(params.weight_perturb_prob) {
                c.weight = perturb_weight(c.weight, rng.random_range(-h..=h));
            }
        }
    }
    if params.add_connection_prob > 0.0 && rng.random_bool(params.add_connection_prob) {
        add_connection(&mut child, counter, rng);
    }
    if params.add_node_prob > 0.0 && rng.random_bool(params.add_node_prob) {
        add_node(&mut child, counter, rng);
    }
    child
}
