use std::collections::HashMap;

use super::genome::{NeatGenome, NodeRole, MOTOR_OUTPUTS, SENSOR_INPUTS};
use crate::ann_space::steepened_sigmoid;
use crate::error::{Error, Result};
use crate::maze::Controller;

#[derive(Debug, Clone, Copy)]
struct Link {
    source: usize,
    target: usize,
    weight: f64,
    /// Inputs and bias feed forward within the step; everything else is
    /// read from the previous step.
    current: bool,
}

/// Executable form of a [`NeatGenome`]. Each step is one synchronous update
/// of every hidden and output node.
#[derive(Debug, Clone)]
pub struct NeatController {
    inputs: Vec<usize>,
    bias: usize,
    outputs: Vec<usize>,
    computed: Vec<usize>,
    links: Vec<Link>,
    steepness: f64,
    prev: Vec<f64>,
    cur: Vec<f64>,
    sums: Vec<f64>,
}

impl NeatController {
    pub fn new(genome: &NeatGenome, steepness: f64) -> Result<Self> {
        let index: HashMap<u32, usize> = genome
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id, i))
            .collect();
        let of_role = |role: NodeRole| -> Vec<usize> {
            (0..genome.nodes.len())
                .filter(|&i| genome.nodes[i].role == role)
                .collect()
        };
        let inputs = of_role(NodeRole::Input);
        let outputs = of_role(NodeRole::Output);
        let bias = of_role(NodeRole::Bias);
        if inputs.len() != SENSOR_INPUTS || outputs.len() != MOTOR_OUTPUTS || bias.len() != 1 {
            return Err(Error::Evaluation(
                "genome needs 6 inputs, one bias and 2 outputs".into(),
            ));
        }
        let computed = (0..genome.nodes.len())
            .filter(|&i| !genome.nodes[i].role.is_source_only())
            .collect();
        let mut links = Vec::new();
        for c in genome.enabled_connections() {
            let (Some(&source), Some(&target)) = (index.get(&c.source), index.get(&c.target)) else {
                return Err(Error::Evaluation(format!(
                    "connection {} has a missing endpoint",
                    c.innovation
                )));
            };
            links.push(Link {
                source,
                target,
                weight: c.weight,
                current: genome.nodes[source].role.is_source_only(),
            });
        }
        let n = genome.nodes.len();
        Ok(NeatController {
            inputs,
            bias: bias[0],
            outputs,
            computed,
            links,
            steepness,
            prev: vec![0.0; n],
            cur: vec![0.0; n],
            sums: vec![0.0; n],
        })
    }
}

impl Controller for NeatController {
    fn reset(&mut self) {
        self.prev.fill(0.0);
        self.cur.fill(0.0);
    }

    fn activate(&mut self, sensors: &[f64]) -> Result<[f64; 2]> {
        if sensors.len() != SENSOR_INPUTS {
            return Err(Error::Evaluation(format!(
                "expected {SENSOR_INPUTS} sensor values, got {}",
                sensors.len()
            )));
        }
        for (&i, &s) in self.inputs.iter().zip(sensors) {
            self.cur[i] = s;
        }
        self.cur[self.bias] = 1.0;
        for &i in &self.computed {
            self.sums[i] = 0.0;
        }
        for l in &self.links {
            let v = if l.current {
                self.cur[l.source]
            } else {
                self.prev[l.source]
            };
            self.sums[l.target] += l.weight * v;
        }
        for &i in &self.computed {
            self.cur[i] = steepened_sigmoid(self.sums[i], self.steepness);
        }
        let out = [self.cur[self.outputs[0]], self.cur[self.outputs[1]]];
        std::mem::swap(&mut self.prev, &mut self.cur);
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ann_space::DEFAULT_STEEPNESS;
    use crate::neat::genome::{initial_genome, ConnectionGene, NodeGene};
    use crate::seed::seed_stream;

    #[test]
    fn direct_wiring_is_feedforward() {
        let mut rng = seed_stream(1, 0);
        let (g, _) = initial_genome(&mut rng);
        let mut c = NeatController::new(&g, DEFAULT_STEEPNESS).unwrap();
        let sensors = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6];
        let out = c.activate(&sensors).unwrap();
        for (k, &o) in out.iter().enumerate() {
            let target = 7 + k as u32;
            let net: f64 = g
                .connections
                .iter()
                .filter(|x| x.target == target)
                .map(|x| x.weight * if x.source == 6 { 1.0 } else { sensors[x.source as usize] })
                .sum();
            assert!((o - steepened_sigmoid(net, DEFAULT_STEEPNESS)).abs() < 1e-15);
        }
    }

    #[test]
    fn hidden_node_adds_one_step_delay() {
        let mut rng = seed_stream(2, 0);
        let (mut g, _) = initial_genome(&mut rng);
        for c in &mut g.connections {
            c.enabled = false;
        }
        g.nodes.push(NodeGene {
            id: 9,
            role: NodeRole::Hidden,
        });
        g.connections.push(ConnectionGene {
            source: 0,
            target: 9,
            weight: 1.0,
            enabled: true,
            innovation: 20,
        });
        g.connections.push(ConnectionGene {
            source: 9,
            target: 7,
            weight: 2.0,
            enabled: true,
            innovation: 21,
        });
        let mut c = NeatController::new(&g, DEFAULT_STEEPNESS).unwrap();
        let s = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let first = c.activate(&s).unwrap();
        // hidden was 0 on the previous step
        assert!((first[0] - 0.5).abs() < 1e-15);
        let second = c.activate(&s).unwrap();
        let h = steepened_sigmoid(1.0, DEFAULT_STEEPNESS);
        assert!((second[0] - steepened_sigmoid(2.0 * h, DEFAULT_STEEPNESS)).abs() < 1e-15);
        c.reset();
        assert!((c.activate(&s).unwrap()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn wrong_sensor_count() {
        let mut rng = seed_stream(3, 0);
        let (g, _) = initial_genome(&mut rng);
        let mut c = NeatController::new(&g, DEFAULT_STEEPNESS).unwrap();
        assert!(c.activate(&[0.0; 3]).is_err());
    }
}
