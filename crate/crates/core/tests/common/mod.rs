//! Oracles shared by the integration suites.
#![allow(dead_code)]

pub mod props;

use std::collections::{HashSet, VecDeque};

use moval::agents::{Agent, LearningParams, SelectionPolicy, TransformMode};
use moval::gridworlds::{EnvState, Environment};
use moval::rng::{derive_run_seed, ScriptedRng};
use moval::transforms::{granularize, TransformKind};
use rand::Rng;

/// Breadth-first search over a deterministic environment. Returns the
/// length of the shortest action sequence that ends the episode in a state
/// accepted by `accept`, visiting only transitions allowed by `allow`.
pub fn shortest_goal_path(
    env: &Environment,
    allow: impl Fn(&EnvState) -> bool,
    accept: impl Fn(&EnvState) -> bool,
) -> Option<(usize, EnvState)> {
    let mut rng = ScriptedRng::new(vec![0.5]);
    let start = env.reset();
    let mut seen = HashSet::from([start]);
    let mut queue = VecDeque::from([(start, 0usize)]);
    while let Some((state, depth)) = queue.pop_front() {
        for action in 0..env.action_count() {
            let out = env.step(state, action, &mut rng).unwrap();
            if !allow(&out.state) {
                continue;
            }
            if out.done {
                if accept(&out.state) {
                    return Some((depth + 1, out.state));
                }
                continue;
            }
            if seen.insert(out.state) {
                queue.push_back((out.state, depth + 1));
            }
        }
    }
    None
}

/// Fraction of `n` forced moves, each from an intermediate tile while
/// carrying two bottles, that drop a bottle.
pub fn forced_drop_rate(env: &Environment, n: usize, seed: u64) -> f64 {
    let mut rng = derive_run_seed(seed, 0);
    let mut drops = 0usize;
    for i in 0..n {
        // Start at tile 1, 2 or 3 carrying two bottles, nothing on the floor.
        let mut s = env.reset();
        let mut script = ScriptedRng::new(vec![0.99]);
        s = env.step(s, 2, &mut script).unwrap().state;
        s = env.step(s, 2, &mut script).unwrap().state;
        let tile = 1 + i % 3;
        for _ in 0..tile {
            s = env.step(s, 1, &mut script).unwrap().state;
        }
        let action = if rng.random::<bool>() { 0 } else { 1 };
        let out = env.step(s, action, &mut rng).unwrap();
        if out.reward.r_a < 0.0 {
            drops += 1;
        }
    }
    drops as f64 / n as f64
}

/// One-dimensional chain: states 0..n, action 1 moves right, action 0
/// stays. Every step yields `reward`; reaching state n ends the episode.
/// Under gamma 1 the optimal value of moving right from state s is
/// `(n - s) * reward` per objective.
pub struct Chain {
    pub n: usize,
    pub reward: [f64; 2],
}

impl Chain {
    pub fn train(&self, policy: SelectionPolicy, episodes: usize, seed: u64) -> Agent {
        let params = LearningParams { alpha: 0.5, gamma: 1.0, epsilon: 0.3 };
        let mut agent = Agent::new(self.n, 2, policy, TransformMode::QValues, params).unwrap();
        let mut rng = derive_run_seed(seed, 0);
        let r = moval::gridworlds::RewardVector::new(self.reward[0], self.reward[1]);
        for _ in 0..episodes {
            let mut s = 0usize;
            for _ in 0..1000 {
                // Uniform behaviour policy: Q-learning is off-policy.
                let a = rng.random_range(0..2);
                let next = if a == 1 { s + 1 } else { s };
                let done = next == self.n;
                agent.update(s, a, r, next.min(self.n - 1), done, &mut rng);
                if done {
                    break;
                }
                s = next;
            }
        }
        agent
    }
}

pub fn all_kinds() -> Vec<TransformKind> {
    TransformKind::BUILTIN.to_vec()
}

/// Reference aggregate written out longhand: granularity, then transform.
pub fn reference_utility(kinds: &[TransformKind; 2], c: f64, g: [f64; 2], q: [f64; 2]) -> f64 {
    (0..2).map(|i| kinds[i].eval(c, granularize(q[i], g[i]))).sum()
}
