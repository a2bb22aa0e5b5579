//! Tabular multi-objective Q-learning.
//!
//! One value vector `(Q_P, Q_A)` is learned per state-action pair. Action
//! selection either aggregates the vector through a [`UtilityPolicy`] or
//! orders it lexicographically after thresholding the alignment component
//! (TLO^A).

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gridworlds::RewardVector;
use crate::transforms::{UtilityPolicy, OBJECTIVES};

/// Values closer than this are treated as ties.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct QTable {
    states: usize,
    actions: usize,
    values: Vec<[f64; OBJECTIVES]>,
}

impl QTable {
    pub fn new(states: usize, actions: usize) -> Self {
        QTable {
            states,
            actions,
            values: vec![[0.0; OBJECTIVES]; states * actions],
        }
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    #[inline]
    pub fn get(&self, state: usize, action: usize) -> [f64; OBJECTIVES] {
        self.values[state * self.actions + action]
    }

    #[inline]
    pub fn set(&mut self, state: usize, action: usize, value: [f64; OBJECTIVES]) {
        self.values[state * self.actions + action] = value;
    }

    #[inline]
    pub fn row(&self, state: usize) -> &[[f64; OBJECTIVES]] {
        &self.values[state * self.actions..(state + 1) * self.actions]
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().flatten().all(|v| v.is_finite())
    }

    /// CSV dump `state_id,action_id,q_p,q_a`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "state_id,action_id,q_p,q_a")?;
        for s in 0..self.states {
            for a in 0..self.actions {
                let [p, q] = self.get(s, a);
                writeln!(out, "{s},{a},{p:.6},{q:.6}")?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearningParams {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
}

impl Default for LearningParams {
    fn default() -> Self {
        LearningParams {
            alpha: 0.1,
            gamma: 1.0,
            epsilon: 0.1,
        }
    }
}

impl LearningParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::config(format!("alpha must be in (0, 1], got {}", self.alpha)));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::config(format!("gamma must be in [0, 1], got {}", self.gamma)));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::config(format!("epsilon must be in [0, 1], got {}", self.epsilon)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SelectionPolicy {
    Utility(UtilityPolicy),
    /// Maximise `min(Q_A, threshold)`, then `Q_P`.
    Tloa { threshold: f64 },
}

impl SelectionPolicy {
    pub fn validate(&self) -> Result<()> {
        match self {
            SelectionPolicy::Tloa { threshold } if !threshold.is_finite() => {
                Err(Error::config("TLO threshold must be finite"))
            }
            _ => Ok(()),
        }
    }
}

/// Where the utility transforms act: on Q-values at selection time, or on
/// each observed reward before it is learned.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TransformMode {
    #[serde(rename = "q")]
    QValues,
    #[serde(rename = "r")]
    Rewards,
}

impl TransformMode {
    pub fn name(self) -> &'static str {
        match self {
            TransformMode::QValues => "q",
            TransformMode::Rewards => "r",
        }
    }
}

impl std::str::FromStr for TransformMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "q" | "qvalues" | "q-values" => Ok(TransformMode::QValues),
            "r" | "rewards" => Ok(TransformMode::Rewards),
            _ => Err(Error::config(format!("unknown mode '{s}' (valid: q, r)"))),
        }
    }
}

/// Greedy action under `policy`; ties within [`TIE_TOLERANCE`] are broken
/// uniformly at random, drawing from `rng` only when a tie exists.
pub fn greedy_action<R: Rng + ?Sized>(
    q: &QTable,
    state: usize,
    policy: &SelectionPolicy,
    rng: &mut R,
) -> usize {
    let row = q.row(state);
    let mut ties = [0usize; 8];
    let n = match policy {
        SelectionPolicy::Utility(p) => {
            let mut scores = [0.0f64; 8];
            let scores = &mut scores[..row.len()];
            for (s, v) in scores.iter_mut().zip(row) {
                *s = p.utility(v);
            }
            best_within(scores, |_| true, &mut ties)
        }
        SelectionPolicy::Tloa { threshold } => {
            let mut primary = [0.0f64; 8];
            let mut guarded = [0.0f64; 8];
            for (i, v) in row.iter().enumerate() {
                primary[i] = v[0];
                guarded[i] = v[1].min(*threshold);
            }
            let mut first = [0usize; 8];
            let k = best_within(&guarded[..row.len()], |_| true, &mut first);
            let allowed = &first[..k];
            best_within(&primary[..row.len()], |i| allowed.contains(&i), &mut ties)
        }
    };
    if n == 1 {
        ties[0]
    } else {
        ties[rng.random_range(0..n)]
    }
}

/// Writes the indices whose score is within tolerance of the best eligible
/// score into `out` and returns how many there are.
#[inline]
fn best_within(scores: &[f64], eligible: impl Fn(usize) -> bool, out: &mut [usize; 8]) -> usize {
    let best = scores
        .iter()
        .enumerate()
        .filter(|(i, _)| eligible(*i))
        .map(|(_, s)| *s)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut n = 0;
    for (i, s) in scores.iter().enumerate() {
        if eligible(i) && *s >= best - TIE_TOLERANCE {
            out[n] = i;
            n += 1;
        }
    }
    n
}

/// ε-greedy: one uniform draw decides exploration, a second picks the
/// random action when exploring.
pub fn select_action<R: Rng + ?Sized>(
    q: &QTable,
    state: usize,
    policy: &SelectionPolicy,
    params: &LearningParams,
    rng: &mut R,
) -> usize {
    if rng.random::<f64>() < params.epsilon {
        rng.random_range(0..q.actions())
    } else {
        greedy_action(q, state, policy, rng)
    }
}

/// A tabular learner: Q-table plus its selection and learning rules.
#[derive(Clone, Debug)]
pub struct Agent {
    pub q: QTable,
    policy: SelectionPolicy,
    bootstrap: SelectionPolicy,
    /// Set in reward mode: the transforms applied to each observed reward.
    reward_transform: Option<UtilityPolicy>,
    pub params: LearningParams,
    mode: TransformMode,
}

impl Agent {
    /// In reward mode a utility agent learns transformed rewards and then
    /// acts and bootstraps on their plain sum. TLO^A has no transforms, so
    /// the mode does not change it.
    pub fn new(
        states: usize,
        actions: usize,
        policy: SelectionPolicy,
        mode: TransformMode,
        params: LearningParams,
    ) -> Result<Agent> {
        if actions == 0 || actions > 8 {
            return Err(Error::config(format!("1..=8 actions supported, got {actions}")));
        }
        params.validate()?;
        policy.validate()?;
        let (acting, reward_transform) = match (&policy, mode) {
            (SelectionPolicy::Utility(p), TransformMode::Rewards) => {
                (SelectionPolicy::Utility(UtilityPolicy::linear()), Some(p.clone()))
            }
            _ => (policy.clone(), None),
        };
        Ok(Agent {
            q: QTable::new(states, actions),
            policy: acting.clone(),
            bootstrap: acting,
            reward_transform,
            params,
            mode,
        })
    }

    pub fn mode(&self) -> TransformMode {
        self.mode
    }

    /// The policy used at action-selection time.
    pub fn acting_policy(&self) -> &SelectionPolicy {
        &self.policy
    }

    pub fn greedy_action<R: Rng + ?Sized>(&self, state: usize, rng: &mut R) -> usize {
        greedy_action(&self.q, state, &self.policy, rng)
    }

    pub fn select_action<R: Rng + ?Sized>(
        &self,
        state: usize,
        epsilon: f64,
        rng: &mut R,
    ) -> usize {
        let params = LearningParams {
            epsilon,
            ..self.params
        };
        select_action(&self.q, state, &self.policy, &params, rng)
    }

    /// Agent-visible reward after the reward-mode transform, if any.
    #[inline]
    pub fn learned_reward(&self, observed: RewardVector) -> [f64; OBJECTIVES] {
        let r = observed.as_array();
        match &self.reward_transform {
            Some(p) => [p.specs()[0].eval(r[0]), p.specs()[1].eval(r[1])],
            None => r,
        }
    }

    /// One Q-learning update. Each objective moves independently toward its
    /// own target; the bootstrap action is the greedy action of `next`.
    pub fn update<R: Rng + ?Sized>(
        &mut self,
        state: usize,
        action: usize,
        observed: RewardVector,
        next: usize,
        done: bool,
        rng: &mut R,
    ) {
        let r = self.learned_reward(observed);
        let target = if done {
            r
        } else {
            let a_star = greedy_action(&self.q, next, &self.bootstrap, rng);
            let q_next = self.q.get(next, a_star);
            [
                r[0] + self.params.gamma * q_next[0],
                r[1] + self.params.gamma * q_next[1],
            ]
        };
        let mut q = self.q.get(state, action);
        for i in 0..OBJECTIVES {
            q[i] += self.params.alpha * (target[i] - q[i]);
        }
        self.q.set(state, action, q);
    }
}
