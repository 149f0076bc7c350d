//! Columnar binary trajectory dump.
//!
//! Layout (little-endian):
//! ```text
//! magic   b"AGACTRJ1"
//! u64     num_envs, steps, num_actions, obs_dim
//! u32[n]  actions
//! f64[n]  rewards
//! u8[n]   dones
//! f64[n]  logp_old, logp_adv_old, values_old, kl_old, count_scale (one column each)
//! f64[n*num_actions] actor_logp_old
//! f64[num_envs] bootstrap
//! n × (u32 k, u32[k]) active observation indices
//! ```
//! where `n = num_envs * steps`.

use std::io::{Read, Write};

use super::{RolloutError, Trajectory};

const MAGIC: &[u8; 8] = b"AGACTRJ1";

pub fn write_trajectory<W: Write>(w: &mut W, t: &Trajectory) -> Result<(), RolloutError> {
    t.validate().map_err(RolloutError::Format)?;
    w.write_all(MAGIC)?;
    for v in [t.num_envs, t.steps, t.num_actions, t.obs_dim] {
        w.write_all(&(v as u64).to_le_bytes())?;
    }
    for &a in &t.actions {
        w.write_all(&(a as u32).to_le_bytes())?;
    }
    put_f64s(w, &t.rewards)?;
    let dones: Vec<u8> = t.dones.iter().map(|&d| d as u8).collect();
    w.write_all(&dones)?;
    for col in [&t.logp_old, &t.logp_adv_old, &t.values_old, &t.kl_old, &t.count_scale] {
        put_f64s(w, col)?;
    }
    put_f64s(w, &t.actor_logp_old)?;
    put_f64s(w, &t.bootstrap)?;
    for o in &t.obs {
        w.write_all(&(o.len() as u32).to_le_bytes())?;
        for &k in o {
            w.write_all(&k.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_trajectory<R: Read>(r: &mut R) -> Result<Trajectory, RolloutError> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(RolloutError::Format("bad magic".into()));
    }
    let mut dims = [0usize; 4];
    for d in &mut dims {
        *d = usize::try_from(get_u64(r)?).map_err(|_| RolloutError::Format("dimension overflow".into()))?;
    }
    let [num_envs, steps, num_actions, obs_dim] = dims;
    let n = num_envs
        .checked_mul(steps)
        .filter(|n| n.checked_mul(num_actions.max(1)).is_some_and(|x| x < 1 << 32))
        .ok_or_else(|| RolloutError::Format("trajectory too large".into()))?;
    let mut t = Trajectory::with_capacity(num_envs, steps, num_actions, obs_dim);
    for a in &mut t.actions {
        let v = get_u32(r)? as usize;
        if v >= num_actions {
            return Err(RolloutError::Format(format!("action {v} out of range")));
        }
        *a = v;
    }
    get_f64s(r, &mut t.rewards)?;
    let mut dones = vec![0u8; n];
    r.read_exact(&mut dones)?;
    for (d, b) in t.dones.iter_mut().zip(dones) {
        *d = match b {
            0 => false,
            1 => true,
            _ => return Err(RolloutError::Format("done flag not 0 or 1".into())),
        };
    }
    for col in [
        &mut t.logp_old,
        &mut t.logp_adv_old,
        &mut t.values_old,
        &mut t.kl_old,
        &mut t.count_scale,
    ] {
        get_f64s(r, col)?;
    }
    get_f64s(r, &mut t.actor_logp_old)?;
    get_f64s(r, &mut t.bootstrap)?;
    for o in &mut t.obs {
        let k = get_u32(r)? as usize;
        if k > obs_dim {
            return Err(RolloutError::Format("too many active indices".into()));
        }
        o.reserve(k);
        for _ in 0..k {
            let idx = get_u32(r)?;
            if idx as usize >= obs_dim {
                return Err(RolloutError::Format(format!("observation index {idx} out of range")));
            }
            o.push(idx);
        }
    }
    t.validate().map_err(RolloutError::Format)?;
    Ok(t)
}

fn put_f64s<W: Write>(w: &mut W, xs: &[f64]) -> std::io::Result<()> {
    for x in xs {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

fn get_f64s<R: Read>(r: &mut R, out: &mut [f64]) -> std::io::Result<()> {
    let mut b = [0u8; 8];
    for x in out {
        r.read_exact(&mut b)?;
        *x = f64::from_le_bytes(b);
    }
    Ok(())
}

fn get_u64<R: Read>(r: &mut R) -> std::io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn get_u32<R: Read>(r: &mut R) -> std::io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}
