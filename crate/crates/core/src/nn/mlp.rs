//! Dense MLP evaluation with a reverse-mode tape.
//!
//! Hidden layers use ELU, the output layer is affine. Inputs are either
//! dense vectors or binary one-hot codes given as the list of active
//! indices; the latter skips the zero columns of the first layer, which
//! dominates the cost for symbolic grid observations.

use super::{NnError, ParamSet};

#[derive(Debug, Clone, Copy)]
pub enum Input<'a> {
    Dense(&'a [f64]),
    /// Binary input of width `dim` with ones at `active`.
    OneHot {
        dim: usize,
        active: &'a [u32],
    },
}

impl Input<'_> {
    pub fn dim(&self) -> usize {
        match self {
            Input::Dense(x) => x.len(),
            Input::OneHot { dim, .. } => *dim,
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        match self {
            Input::Dense(x) => x.to_vec(),
            Input::OneHot { dim, active } => {
                let mut v = vec![0.0; *dim];
                for &i in active.iter() {
                    v[i as usize] = 1.0;
                }
                v
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
enum TapeInput {
    #[default]
    Empty,
    Dense(Vec<f64>),
    OneHot(Vec<u32>),
}

/// Everything backward needs: the input and every layer's post-activation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Tape {
    input: TapeInput,
    input_dim: usize,
    acts: Vec<Vec<f64>>,
}

impl Tape {
    pub fn output(&self) -> &[f64] {
        self.acts.last().map(|v| v.as_slice()).unwrap_or(&[])
    }
}

#[inline]
fn elu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        x.exp_m1()
    }
}

/// ELU derivative expressed through the activation value.
#[inline]
fn elu_grad_from_output(y: f64) -> f64 {
    if y > 0.0 {
        1.0
    } else {
        y + 1.0
    }
}

#[inline]
fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[inline]
fn dot(x: &[f64], y: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let chunks = x.len() / 4;
    for c in 0..chunks {
        for k in 0..4 {
            acc[k] += x[4 * c + k] * y[4 * c + k];
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..x.len() {
        s += x[i] * y[i];
    }
    s
}

pub fn forward(params: &ParamSet, input: Input<'_>) -> Result<(Vec<f64>, Tape), NnError> {
    let mut tape = Tape::default();
    forward_into(params, input, &mut tape)?;
    Ok((tape.output().to_vec(), tape))
}

/// Forward pass reusing the tape's buffers.
pub fn forward_into(params: &ParamSet, input: Input<'_>, tape: &mut Tape) -> Result<(), NnError> {
    let shapes = params.shapes();
    if input.dim() != shapes[0].inputs {
        return Err(NnError::DimensionMismatch {
            what: "network input",
            expected: shapes[0].inputs,
            got: input.dim(),
        });
    }
    tape.input_dim = input.dim();
    match input {
        Input::Dense(x) => match &mut tape.input {
            TapeInput::Dense(buf) => {
                buf.clear();
                buf.extend_from_slice(x);
            }
            other => *other = TapeInput::Dense(x.to_vec()),
        },
        Input::OneHot { active, dim } => {
            if let Some(&bad) = active.iter().find(|&&i| i as usize >= dim) {
                return Err(NnError::DimensionMismatch {
                    what: "one-hot index",
                    expected: dim,
                    got: bad as usize,
                });
            }
            match &mut tape.input {
                TapeInput::OneHot(buf) => {
                    buf.clear();
                    buf.extend_from_slice(active);
                }
                other => *other = TapeInput::OneHot(active.to_vec()),
            }
        }
    }
    tape.acts.resize_with(shapes.len(), Vec::new);
    let last = shapes.len() - 1;
    for l in 0..shapes.len() {
        let s = shapes[l];
        let (w, b) = params.layer(l);
        let (prev, rest) = tape.acts.split_at_mut(l);
        let out = &mut rest[0];
        out.clear();
        out.extend_from_slice(b);
        if l == 0 {
            match &tape.input {
                TapeInput::Dense(x) => {
                    for (i, &xi) in x.iter().enumerate() {
                        if xi != 0.0 {
                            axpy(xi, &w[i * s.outputs..(i + 1) * s.outputs], out);
                        }
                    }
                }
                TapeInput::OneHot(active) => {
                    for &i in active {
                        let i = i as usize;
                        for (o, wi) in out.iter_mut().zip(&w[i * s.outputs..(i + 1) * s.outputs]) {
                            *o += wi;
                        }
                    }
                }
                TapeInput::Empty => unreachable!(),
            }
        } else {
            let x = &prev[l - 1];
            for (i, &xi) in x.iter().enumerate() {
                axpy(xi, &w[i * s.outputs..(i + 1) * s.outputs], out);
            }
        }
        if l != last {
            out.iter_mut().for_each(|v| *v = elu(*v));
        }
    }
    Ok(())
}

/// Accumulates d(loss)/d(params) into `grads` given d(loss)/d(output).
pub fn backward_accumulate(params: &ParamSet, tape: &Tape, upstream: &[f64], grads: &mut [f64]) -> Result<(), NnError> {
    let shapes = params.shapes();
    if tape.acts.len() != shapes.len() || tape.input_dim != shapes[0].inputs {
        return Err(NnError::Config("tape was not produced by this network".into()));
    }
    if upstream.len() != params.output_dim() {
        return Err(NnError::DimensionMismatch {
            what: "upstream gradient",
            expected: params.output_dim(),
            got: upstream.len(),
        });
    }
    if grads.len() != params.len() {
        return Err(NnError::DimensionMismatch {
            what: "gradient buffer",
            expected: params.len(),
            got: grads.len(),
        });
    }
    let mut delta = upstream.to_vec();
    let mut next = Vec::new();
    for l in (0..shapes.len()).rev() {
        let s = shapes[l];
        let off = params.offset(l);
        let (gw, gb) = grads[off..off + s.len()].split_at_mut(s.inputs * s.outputs);
        for (g, d) in gb.iter_mut().zip(&delta) {
            *g += d;
        }
        if l == 0 {
            match &tape.input {
                TapeInput::Dense(x) => {
                    for (i, &xi) in x.iter().enumerate() {
                        if xi != 0.0 {
                            axpy(xi, &delta, &mut gw[i * s.outputs..(i + 1) * s.outputs]);
                        }
                    }
                }
                TapeInput::OneHot(active) => {
                    for &i in active {
                        let i = i as usize;
                        for (g, d) in gw[i * s.outputs..(i + 1) * s.outputs].iter_mut().zip(&delta) {
                            *g += d;
                        }
                    }
                }
                TapeInput::Empty => unreachable!(),
            }
        } else {
            let x = &tape.acts[l - 1];
            let (w, _) = params.layer(l);
            next.clear();
            next.resize(s.inputs, 0.0);
            for (i, &xi) in x.iter().enumerate() {
                let row = &w[i * s.outputs..(i + 1) * s.outputs];
                axpy(xi, &delta, &mut gw[i * s.outputs..(i + 1) * s.outputs]);
                next[i] = dot(row, &delta) * elu_grad_from_output(xi);
            }
            std::mem::swap(&mut delta, &mut next);
        }
    }
    Ok(())
}

/// Gradient of `upstream · output` with respect to every parameter.
pub fn backward(params: &ParamSet, tape: &Tape, upstream: &[f64]) -> Result<Vec<f64>, NnError> {
    let mut grads = vec![0.0; params.len()];
    backward_accumulate(params, tape, upstream, &mut grads)?;
    Ok(grads)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{LayerShape, Role};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_net(rng: &mut ChaCha8Rng, widths: &[usize]) -> ParamSet {
        let mut p = ParamSet::mlp(Role::Actor, widths).unwrap();
        p.as_mut_slice().iter_mut().for_each(|x| *x = rng.gen_range(-1.0..1.0));
        p
    }

    // Straight-line reimplementation over the documented storage layout.
    fn reference_forward(p: &ParamSet, x: &[f64]) -> Vec<f64> {
        let mut h = x.to_vec();
        let n = p.shapes().len();
        for l in 0..n {
            let s = p.shapes()[l];
            let (w, b) = p.layer(l);
            let mut y = vec![0.0; s.outputs];
            for o in 0..s.outputs {
                let mut acc = b[o];
                for i in 0..s.inputs {
                    acc += w[i * s.outputs + o] * h[i];
                }
                y[o] = if l + 1 < n && acc <= 0.0 { acc.exp() - 1.0 } else { acc };
            }
            h = y;
        }
        h
    }

    #[test]
    fn zero_network_outputs_zero() {
        let p = ParamSet::mlp(Role::Critic, &[5, 8, 3]).unwrap();
        let (y, _) = forward(&p, Input::Dense(&[1.0, -2.0, 3.0, 0.5, 9.0])).unwrap();
        assert_eq!(y, vec![0.0; 3]);
    }

    #[test]
    fn identity_layer_passes_input_through() {
        let mut p = ParamSet::zeros(Role::Actor, vec![LayerShape { inputs: 3, outputs: 3 }]).unwrap();
        let (w, _) = p.layer_mut(0);
        for i in 0..3 {
            w[i * 3 + i] = 1.0;
        }
        let x = [0.3, -4.0, 2.5];
        let (y, _) = forward(&p, Input::Dense(&x)).unwrap();
        assert_eq!(y, x.to_vec());
    }

    #[test]
    fn matches_reference_forward() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = random_net(&mut rng, &[6, 5, 4]);
        let x: Vec<f64> = (0..6).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let (y, _) = forward(&p, Input::Dense(&x)).unwrap();
        let r = reference_forward(&p, &x);
        for (a, b) in y.iter().zip(&r) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn one_hot_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = random_net(&mut rng, &[10, 7, 7, 2]);
        let active = [1u32, 4, 9];
        let input = Input::OneHot {
            dim: 10,
            active: &active,
        };
        let dense = input.to_dense();
        let (a, ta) = forward(&p, input).unwrap();
        let (b, tb) = forward(&p, Input::Dense(&dense)).unwrap();
        assert_eq!(a, b);
        let up = [0.7, -1.3];
        assert_eq!(backward(&p, &ta, &up).unwrap(), backward(&p, &tb, &up).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let p = ParamSet::mlp(Role::Actor, &[4, 3]).unwrap();
        assert!(matches!(
            forward(&p, Input::Dense(&[1.0, 2.0])),
            Err(NnError::DimensionMismatch { .. })
        ));
        let (_, tape) = forward(&p, Input::Dense(&[1.0; 4])).unwrap();
        assert!(backward(&p, &tape, &[1.0]).is_err());
    }

    #[test]
    fn constant_loss_has_zero_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = random_net(&mut rng, &[4, 6, 3]);
        let (_, tape) = forward(&p, Input::Dense(&[0.1, 0.2, 0.3, 0.4])).unwrap();
        let g = backward(&p, &tape, &[0.0; 3]).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sum_of_identity_outputs_has_unit_bias_gradient() {
        let mut p = ParamSet::zeros(Role::Actor, vec![LayerShape { inputs: 3, outputs: 3 }]).unwrap();
        let (w, _) = p.layer_mut(0);
        for i in 0..3 {
            w[i * 3 + i] = 1.0;
        }
        let (_, tape) = forward(&p, Input::Dense(&[1.0, 2.0, 3.0])).unwrap();
        let g = backward(&p, &tape, &[1.0; 3]).unwrap();
        assert_eq!(&g[9..], &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let widths = [
                rng.gen_range(1..6),
                rng.gen_range(1..6),
                rng.gen_range(1..6),
                rng.gen_range(1..4),
            ];
            let mut p = random_net(&mut rng, &widths);
            let x: Vec<f64> = (0..widths[0]).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let wts: Vec<f64> = (0..widths[3]).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let loss = |p: &ParamSet| -> f64 {
                let y = reference_forward(p, &x);
                y.iter().zip(&wts).map(|(a, b)| a * b).sum()
            };
            let (_, tape) = forward(&p, Input::Dense(&x)).unwrap();
            let g = backward(&p, &tape, &wts).unwrap();
            let h = 1e-5;
            for k in 0..p.len() {
                let orig = p.as_slice()[k];
                p.as_mut_slice()[k] = orig + h;
                let up = loss(&p);
                p.as_mut_slice()[k] = orig - h;
                let down = loss(&p);
                p.as_mut_slice()[k] = orig;
                let fd = (up - down) / (2.0 * h);
                let err = (fd - g[k]).abs() / fd.abs().max(g[k].abs()).max(1e-6);
                assert!(err < 1e-4, "param {k}: analytic {} vs fd {fd}", g[k]);
            }
        }
    }
}
