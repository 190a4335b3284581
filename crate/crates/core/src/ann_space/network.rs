use serde::{Deserialize, Serialize};

use super::genome::{FixedAnnGenome, GENES};
use crate::error::{Error, Result};
use crate::maze::Controller;

pub const INPUTS: usize = 3;
pub const HIDDEN: usize = 2;
pub const OUTPUTS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Neuron {
    Input(u8),
    Hidden(u8),
    Output(u8),
}

use Neuron::{Hidden as H, Input as I, Output as O};

/// Source and target of each connection gene, in gene order: input→hidden,
/// hidden→hidden (self loops included), hidden→output, output→output.
pub const CONNECTIONS: [(Neuron, Neuron); GENES] = [
    (I(0), H(0)),
    (I(0), H(1)),
    (I(1), H(0)),
    (I(1), H(1)),
    (I(2), H(0)),
    (I(2), H(1)),
    (H(0), H(0)),
    (H(0), H(1)),
    (H(1), H(0)),
    (H(1), H(1)),
    (H(0), O(0)),
    (H(0), O(1)),
    (H(1), O(0)),
    (H(1), O(1)),
    (O(0), O(0)),
    (O(0), O(1)),
    (O(1), O(0)),
    (O(1), O(1)),
];

/// Slope of the steepened logistic activation.
pub const DEFAULT_STEEPNESS: f64 = 4.9;

#[inline]
pub fn steepened_sigmoid(x: f64, steepness: f64) -> f64 {
    1.0 / (1.0 + (-steepness * x).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AnnState {
    pub hidden: [f64; HIDDEN],
    pub output: [f64; OUTPUTS],
}

/// One synchronous update. Hidden neurons read the current inputs and the
/// previous hidden activations; outputs read the freshly updated hidden layer
/// and the previous output activations.
pub fn activate(
    weights: &[f64; GENES],
    inputs: &[f64; INPUTS],
    state: &AnnState,
    steepness: f64,
) -> ([f64; OUTPUTS], AnnState) {
    let mut hidden_in = [0.0; HIDDEN];
    let mut output_in = [0.0; OUTPUTS];
    let mut hidden = [0.0; HIDDEN];
    for (k, &(src, dst)) in CONNECTIONS.iter().enumerate().take(10) {
        let v = match src {
            I(i) => inputs[i as usize],
            H(h) => state.hidden[h as usize],
            O(_) => unreachable!(),
        };
        if let H(h) = dst {
            hidden_in[h as usize] += weights[k] * v;
        }
    }
    for (h, x) in hidden.iter_mut().zip(hidden_in) {
        *h = steepened_sigmoid(x, steepness);
    }
    for (k, &(src, dst)) in CONNECTIONS.iter().enumerate().skip(10) {
        let v = match src {
            H(h) => hidden[h as usize],
            O(o) => state.output[o as usize],
            I(_) => unreachable!(),
        };
        if let O(o) = dst {
            output_in[o as usize] += weights[k] * v;
        }
    }
    let output = output_in.map(|x| steepened_sigmoid(x, steepness));
    (output, AnnState { hidden, output })
}

/// A fixed-topology genome as a maze controller: output 0 drives the left
/// wheel, output 1 the right.
#[derive(Debug, Clone)]
pub struct FixedAnnController {
    weights: [f64; GENES],
    steepness: f64,
    state: AnnState,
}

impl FixedAnnController {
    pub fn new(genome: &FixedAnnGenome, steepness: f64) -> Self {
        FixedAnnController {
            weights: genome.weights(),
            steepness,
            state: AnnState::default(),
        }
    }

    pub fn set_genome(&mut self, genome: &FixedAnnGenome) {
        self.weights = genome.weights();
        self.state = AnnState::default();
    }
}

impl Controller for FixedAnnController {
    fn reset(&mut self) {
        self.state = AnnState::default();
    }

    fn activate(&mut self, sensors: &[f64]) -> Result<[f64; 2]> {
        let inputs: &[f64; INPUTS] = sensors.try_into().map_err(|_| {
            Error::Evaluation(format!(
                "fixed-topology network takes {INPUTS} sensors, got {}",
                sensors.len()
            ))
        })?;
        let (out, next) = activate(&self.weights, inputs, &self.state, self.steepness);
        self.state = next;
        Ok(out)
    }
}
