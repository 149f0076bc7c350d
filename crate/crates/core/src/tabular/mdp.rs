use rand::Rng;

use super::TabularError;

/// Probability floor applied to policies before taking logarithms or ratios.
pub const PROB_FLOOR: f64 = 1e-12;

/// Finite MDP with dense transitions `p[(s * A + a) * S + s']` and rewards `r[s * A + a]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularMdp {
    n_states: usize,
    n_actions: usize,
    p: Vec<f64>,
    r: Vec<f64>,
    gamma: f64,
}

impl TabularMdp {
    pub fn new(n_states: usize, n_actions: usize, p: Vec<f64>, r: Vec<f64>, gamma: f64) -> Result<Self, TabularError> {
        if n_states == 0 || n_actions == 0 {
            return Err(TabularError::Invalid(
                "an MDP needs at least one state and one action".into(),
            ));
        }
        if p.len() != n_states * n_actions * n_states || r.len() != n_states * n_actions {
            return Err(TabularError::Invalid(
                "transition or reward table has the wrong size".into(),
            ));
        }
        if !(0.0..1.0).contains(&gamma) {
            return Err(TabularError::Invalid(format!(
                "discount must lie in [0, 1), got {gamma}"
            )));
        }
        for (k, row) in p.chunks(n_states).enumerate() {
            let sum: f64 = row.iter().sum();
            if row.iter().any(|&x| !(x >= 0.0)) || (sum - 1.0).abs() > 1e-12 {
                return Err(TabularError::Invalid(format!(
                    "transition row (s={}, a={}) is not a distribution (sum {sum})",
                    k / n_actions,
                    k % n_actions
                )));
            }
        }
        if r.iter().any(|x| !x.is_finite()) {
            return Err(TabularError::Invalid("rewards must be finite".into()));
        }
        Ok(Self {
            n_states,
            n_actions,
            p,
            r,
            gamma,
        })
    }

    /// Dense random instance with rewards in [-1, 1].
    pub fn random<R: Rng>(rng: &mut R, n_states: usize, n_actions: usize, gamma: f64) -> Self {
        let mut p = Vec::with_capacity(n_states * n_actions * n_states);
        for _ in 0..n_states * n_actions {
            let row: Vec<f64> = (0..n_states).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
            let sum: f64 = row.iter().sum();
            p.extend(row.iter().map(|x| x / sum));
        }
        let r = (0..n_states * n_actions).map(|_| rng.gen_range(-1.0..1.0)).collect();
        Self::new(n_states, n_actions, p, r, gamma).expect("random instance is valid")
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.r[s * self.n_actions + a]
    }

    pub fn rewards(&self) -> &[f64] {
        &self.r
    }

    /// P(· | s, a).
    pub fn transition(&self, s: usize, a: usize) -> &[f64] {
        let k = (s * self.n_actions + a) * self.n_states;
        &self.p[k..k + self.n_states]
    }

    pub fn with_rewards(&self, r: Vec<f64>) -> Result<Self, TabularError> {
        Self::new(self.n_states, self.n_actions, self.p.clone(), r, self.gamma)
    }

    /// Plain-text table format:
    ///
    /// ```text
    /// # comment
    /// states 2
    /// actions 2
    /// gamma 0.9
    /// T 0 0  0.5 0.5     # s a, then P(s' | s, a) for every s'
    /// R 0  1.0 0.0       # s, then r(s, a) for every a
    /// ```
    /// Every (s, a) needs one `T` line and every s one `R` line.
    pub fn parse(text: &str) -> Result<Self, TabularError> {
        let mut n_states = None;
        let mut n_actions = None;
        let mut gamma = None;
        let mut t_rows: Vec<(usize, usize, usize, Vec<f64>)> = Vec::new();
        let mut r_rows: Vec<(usize, usize, Vec<f64>)> = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line_no = ln + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |m: String| TabularError::Parse {
                line: line_no,
                message: m,
            };
            let mut it = line.split_whitespace();
            let key = it.next().expect("non-empty line");
            let nums: Vec<&str> = it.collect();
            let int = |s: &str| s.parse::<usize>().map_err(|e| err(format!("bad integer {s:?}: {e}")));
            let real = |s: &str| s.parse::<f64>().map_err(|e| err(format!("bad number {s:?}: {e}")));
            match key {
                "states" | "actions" | "gamma" if nums.len() != 1 => {
                    return Err(err(format!("{key} takes exactly one value")));
                }
                "states" => n_states = Some(int(nums[0])?),
                "actions" => n_actions = Some(int(nums[0])?),
                "gamma" => gamma = Some(real(nums[0])?),
                "T" if nums.len() >= 2 => {
                    let vals = nums[2..].iter().map(|s| real(s)).collect::<Result<_, _>>()?;
                    t_rows.push((line_no, int(nums[0])?, int(nums[1])?, vals));
                }
                "R" if !nums.is_empty() => {
                    let vals = nums[1..].iter().map(|s| real(s)).collect::<Result<_, _>>()?;
                    r_rows.push((line_no, int(nums[0])?, vals));
                }
                _ => return Err(err(format!("unrecognized line {line:?}"))),
            }
        }
        let missing = |what: &str| TabularError::Parse {
            line: 0,
            message: format!("missing {what} header"),
        };
        let ns = n_states.ok_or_else(|| missing("states"))?;
        let na = n_actions.ok_or_else(|| missing("actions"))?;
        let gamma = gamma.ok_or_else(|| missing("gamma"))?;
        let mut p = vec![f64::NAN; ns * na * ns];
        let mut r = vec![f64::NAN; ns * na];
        for (line, s, a, vals) in t_rows {
            if s >= ns || a >= na || vals.len() != ns {
                return Err(TabularError::Parse {
                    line,
                    message: format!("T row needs s < {ns}, a < {na} and {ns} probabilities"),
                });
            }
            p[(s * na + a) * ns..(s * na + a + 1) * ns].copy_from_slice(&vals);
        }
        for (line, s, vals) in r_rows {
            if s >= ns || vals.len() != na {
                return Err(TabularError::Parse {
                    line,
                    message: format!("R row needs s < {ns} and {na} rewards"),
                });
            }
            r[s * na..(s + 1) * na].copy_from_slice(&vals);
        }
        if p.iter().chain(&r).any(|x| x.is_nan()) {
            return Err(TabularError::Parse {
                line: 0,
                message: "some T or R rows are missing".into(),
            });
        }
        Self::new(ns, na, p, r, gamma)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "states {}\nactions {}\ngamma {:?}\n",
            self.n_states, self.n_actions, self.gamma
        );
        for s in 0..self.n_states {
            for a in 0..self.n_actions {
                out.push_str(&format!("T {s} {a}"));
                for x in self.transition(s, a) {
                    out.push_str(&format!(" {x:?}"));
                }
                out.push('\n');
            }
        }
        for s in 0..self.n_states {
            out.push_str(&format!("R {s}"));
            for a in 0..self.n_actions {
                out.push_str(&format!(" {:?}", self.reward(s, a)));
            }
            out.push('\n');
        }
        out
    }
}

/// Row-stochastic policy table `probs[s * A + a]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularPolicy {
    n_states: usize,
    n_actions: usize,
    probs: Vec<f64>,
}

impl TabularPolicy {
    pub fn new(n_states: usize, n_actions: usize, probs: Vec<f64>) -> Result<Self, TabularError> {
        if probs.len() != n_states * n_actions {
            return Err(TabularError::Invalid("policy table has the wrong size".into()));
        }
        for (s, row) in probs.chunks(n_actions).enumerate() {
            let sum: f64 = row.iter().sum();
            if row.iter().any(|&x| !(x >= 0.0)) || (sum - 1.0).abs() > 1e-12 {
                return Err(TabularError::Invalid(format!(
                    "policy row {s} is not a distribution (sum {sum})"
                )));
            }
        }
        Ok(Self {
            n_states,
            n_actions,
            probs,
        })
    }

    pub fn uniform(n_states: usize, n_actions: usize) -> Self {
        Self {
            n_states,
            n_actions,
            probs: vec![1.0 / n_actions as f64; n_states * n_actions],
        }
    }

    /// Random full-support policy; `spread` scales the log-probabilities.
    pub fn random<R: Rng>(rng: &mut R, n_states: usize, n_actions: usize, spread: f64) -> Self {
        let mut probs = Vec::with_capacity(n_states * n_actions);
        for _ in 0..n_states {
            let z: Vec<f64> = (0..n_actions).map(|_| spread * rng.gen_range(-1.0..1.0)).collect();
            probs.extend(softmax(&z));
        }
        Self {
            n_states,
            n_actions,
            probs,
        }
    }

    /// Builds a policy from per-state log-weights, normalizing each row and
    /// flooring at [`PROB_FLOOR`].
    pub fn from_log_weights(n_states: usize, n_actions: usize, logw: &[f64]) -> Self {
        let mut probs = Vec::with_capacity(n_states * n_actions);
        for row in logw.chunks(n_actions) {
            let p = softmax(row);
            if p.iter().any(|&x| x < PROB_FLOOR) {
                let floored: Vec<f64> = p.iter().map(|x| x.max(PROB_FLOOR)).collect();
                let sum: f64 = floored.iter().sum();
                probs.extend(floored.iter().map(|x| x / sum));
            } else {
                probs.extend(p);
            }
        }
        Self {
            n_states,
            n_actions,
            probs,
        }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.probs[s * self.n_actions..(s + 1) * self.n_actions]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// log max(π, floor).
    pub fn floored_log(&self, s: usize, a: usize) -> f64 {
        self.probs[s * self.n_actions + a].max(PROB_FLOOR).ln()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Deterministic policy picking the most probable action (lowest index on ties).
    pub fn greedy(&self) -> Self {
        let mut probs = vec![0.0; self.probs.len()];
        for s in 0..self.n_states {
            let row = self.row(s);
            let best = (0..self.n_actions).fold(0, |b, a| if row[a] > row[b] { a } else { b });
            probs[s * self.n_actions + best] = 1.0;
        }
        Self {
            n_states: self.n_states,
            n_actions: self.n_actions,
            probs,
        }
    }
}

pub(crate) fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|x| (x - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|x| x / s).collect()
}
