use rand::Rng;
use serde::{Deserialize, Serialize};

use super::NnError;

/// Which of the three disjoint networks a parameter set belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Actor,
    Critic,
    Adversary,
}

impl Role {
    pub fn tag(self) -> u32 {
        match self {
            Role::Actor => 0,
            Role::Critic => 1,
            Role::Adversary => 2,
        }
    }

    pub fn from_tag(tag: u32) -> Option<Self> {
        match tag {
            0 => Some(Role::Actor),
            1 => Some(Role::Critic),
            2 => Some(Role::Adversary),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Role::Actor => "actor",
            Role::Critic => "critic",
            Role::Adversary => "adversary",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerShape {
    pub inputs: usize,
    pub outputs: usize,
}

impl LayerShape {
    pub fn len(&self) -> usize {
        self.inputs * self.outputs + self.outputs
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Flat parameter vector of a dense network.
///
/// Each layer occupies a contiguous block: the weight matrix stored
/// input-major (`w[i * outputs + o]` multiplies input `i` into output `o`),
/// followed by the `outputs` biases. Gradients use exactly the same layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet {
    role: Role,
    shapes: Vec<LayerShape>,
    offsets: Vec<usize>,
    data: Vec<f64>,
}

impl ParamSet {
    pub fn zeros(role: Role, shapes: Vec<LayerShape>) -> Result<Self, NnError> {
        if shapes.is_empty() {
            return Err(NnError::Config("a network needs at least one layer".into()));
        }
        for pair in shapes.windows(2) {
            if pair[0].outputs != pair[1].inputs {
                return Err(NnError::Config(format!(
                    "layer shapes do not chain: {} outputs feed {} inputs",
                    pair[0].outputs, pair[1].inputs
                )));
            }
        }
        if shapes.iter().any(|s| s.inputs == 0 || s.outputs == 0) {
            return Err(NnError::Config("zero-width layer".into()));
        }
        let mut offsets = Vec::with_capacity(shapes.len());
        let mut total = 0;
        for s in &shapes {
            offsets.push(total);
            total += s.len();
        }
        Ok(Self {
            role,
            shapes,
            offsets,
            data: vec![0.0; total],
        })
    }

    /// Builds an MLP with the given layer widths (`widths[0]` is the input size).
    pub fn mlp(role: Role, widths: &[usize]) -> Result<Self, NnError> {
        if widths.len() < 2 {
            return Err(NnError::Config("an MLP needs input and output widths".into()));
        }
        let shapes = widths
            .windows(2)
            .map(|w| LayerShape {
                inputs: w[0],
                outputs: w[1],
            })
            .collect();
        Self::zeros(role, shapes)
    }

    /// Uniform fan-in initialization; the output layer is scaled by `output_gain`.
    pub fn init_uniform<R: Rng>(&mut self, rng: &mut R, output_gain: f64) {
        let last = self.shapes.len() - 1;
        for l in 0..self.shapes.len() {
            let shape = self.shapes[l];
            let mut bound = (6.0 / shape.inputs as f64).sqrt() * 0.5;
            if l == last {
                bound *= output_gain;
            }
            let (w, b) = self.layer_mut(l);
            for x in w.iter_mut() {
                *x = rng.gen_range(-bound..bound);
            }
            b.iter_mut().for_each(|x| *x = 0.0);
        }
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn shapes(&self) -> &[LayerShape] {
        &self.shapes
    }

    pub fn input_dim(&self) -> usize {
        self.shapes[0].inputs
    }

    pub fn output_dim(&self) -> usize {
        self.shapes[self.shapes.len() - 1].outputs
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn layer(&self, l: usize) -> (&[f64], &[f64]) {
        let s = self.shapes[l];
        let start = self.offsets[l];
        let block = &self.data[start..start + s.len()];
        block.split_at(s.inputs * s.outputs)
    }

    pub fn layer_mut(&mut self, l: usize) -> (&mut [f64], &mut [f64]) {
        let s = self.shapes[l];
        let start = self.offsets[l];
        let block = &mut self.data[start..start + s.len()];
        block.split_at_mut(s.inputs * s.outputs)
    }

    pub(crate) fn offset(&self, l: usize) -> usize {
        self.offsets[l]
    }

    pub(crate) fn from_parts(role: Role, shapes: Vec<LayerShape>, data: Vec<f64>) -> Result<Self, NnError> {
        let mut p = Self::zeros(role, shapes)?;
        if data.len() != p.data.len() {
            return Err(NnError::DimensionMismatch {
                what: "parameter payload",
                expected: p.data.len(),
                got: data.len(),
            });
        }
        p.data = data;
        Ok(p)
    }
}
