//! Parameter-set file format.
//!
//! Binary layout, all integers and floats little-endian:
//!
//! ```text
//! offset  size        field
//! 0       8           magic "AGACPRM1"
//! 8       4           role tag (u32: 0 actor, 1 critic, 2 adversary)
//! 12      4           layer count L (u32)
//! 16      8*L         per layer: inputs (u32), outputs (u32)
//! 16+8L   8           parameter count P (u64)
//! 24+8L   8*P         parameters (f64), layer by layer: input-major weights then biases
//! ```

use std::fmt::Write as _;
use std::io::{Read, Write};

use super::{LayerShape, NnError, ParamSet, Role};

pub const MAGIC: &[u8; 8] = b"AGACPRM1";

pub fn write_params<W: Write>(params: &ParamSet, mut w: W) -> Result<(), NnError> {
    w.write_all(MAGIC)?;
    w.write_all(&params.role().tag().to_le_bytes())?;
    w.write_all(&(params.shapes().len() as u32).to_le_bytes())?;
    for s in params.shapes() {
        w.write_all(&(s.inputs as u32).to_le_bytes())?;
        w.write_all(&(s.outputs as u32).to_le_bytes())?;
    }
    w.write_all(&(params.len() as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(params.len() * 8);
    for x in params.as_slice() {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, NnError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub fn read_params<R: Read>(mut r: R) -> Result<ParamSet, NnError> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(NnError::Format("bad magic".into()));
    }
    let tag = read_u32(&mut r)?;
    let role = Role::from_tag(tag).ok_or_else(|| NnError::Format(format!("unknown role tag {tag}")))?;
    let layers = read_u32(&mut r)? as usize;
    if layers == 0 || layers > 1024 {
        return Err(NnError::Format(format!("implausible layer count {layers}")));
    }
    let mut shapes = Vec::with_capacity(layers);
    for _ in 0..layers {
        let inputs = read_u32(&mut r)? as usize;
        let outputs = read_u32(&mut r)? as usize;
        shapes.push(LayerShape { inputs, outputs });
    }
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    let count = u64::from_le_bytes(b) as usize;
    let expected: usize = shapes.iter().map(|s| s.len()).sum();
    if count != expected {
        return Err(NnError::Format(format!(
            "parameter count {count} does not match layer shapes ({expected})"
        )));
    }
    let mut raw = vec![0u8; count * 8];
    r.read_exact(&mut raw)?;
    let data = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    ParamSet::from_parts(role, shapes, data)
}

/// Human-readable dump, one layer block per section.
pub fn debug_dump(params: &ParamSet) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "role {}", params.role().name());
    for (l, s) in params.shapes().iter().enumerate() {
        let (w, b) = params.layer(l);
        let _ = writeln!(out, "layer {l} inputs {} outputs {}", s.inputs, s.outputs);
        for i in 0..s.inputs {
            let row: Vec<String> = w[i * s.outputs..(i + 1) * s.outputs]
                .iter()
                .map(|x| format!("{x:.17e}"))
                .collect();
            let _ = writeln!(out, "  w[{i}] {}", row.join(" "));
        }
        let bias: Vec<String> = b.iter().map(|x| format!("{x:.17e}")).collect();
        let _ = writeln!(out, "  b {}", bias.join(" "));
    }
    out
}
