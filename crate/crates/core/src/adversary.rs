//! Network-layer adversary: probabilistic node corruption plus sustained
//! artificial delays on a fixed subset of each corrupted node's links.
//!
//! The attack model is delay-only: corrupted nodes still mine and serve
//! blocks, they never drop, forge or reorder beyond the added delay.
//! Power-based attacks enter the analysis only through the closed-form
//! security machinery.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::model::NodeId;
use crate::netmodel::Topology;
use crate::rng_util::mix_seed;

/// Knobs of the delay attack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversaryConfig {
    pub enabled: bool,
    /// Probability that an individual node is corrupted.
    pub p_hat: f64,
    /// Fraction of a corrupted node's neighbors whose links get delayed.
    pub p_con: f64,
    /// Artificial delay added on marked links, milliseconds.
    pub nt_delay_ms: u64,
    /// Delay every message kind instead of only block-carrying ones.
    /// With the default (false), announcements and requests travel
    /// normally and only the substantive replies and pushes stall, which
    /// is what makes luring a victim into a stalled request possible.
    pub delay_all_kinds: bool,
}

impl Default for AdversaryConfig {
    fn default() -> Self {
        AdversaryConfig {
            enabled: false,
            p_hat: 0.0,
            p_con: 0.0,
            nt_delay_ms: 0,
            delay_all_kinds: false,
        }
    }
}

impl AdversaryConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_hat) {
            return Err(Error::config(format!("p_hat must be in [0,1], got {}", self.p_hat)));
        }
        if !(0.0..=1.0).contains(&self.p_con) {
            return Err(Error::config(format!("p_con must be in [0,1], got {}", self.p_con)));
        }
        Ok(())
    }
}

/// Materialized attack for one run: who is corrupted and which directed
/// links are delayed. Fixed for the whole run.
#[derive(Debug, Clone, Default)]
pub struct AttackPlan {
    pub corrupted: Vec<bool>,
    delayed: HashSet<(NodeId, NodeId)>,
    pub nt_delay_ms: u64,
    pub delay_all_kinds: bool,
}

impl AttackPlan {
    /// A plan with no corrupted nodes.
    pub fn benign(n: usize) -> Self {
        AttackPlan {
            corrupted: vec![false; n],
            delayed: HashSet::new(),
            nt_delay_ms: 0,
            delay_all_kinds: false,
        }
    }

    /// Build a plan from explicit delayed links (testing and custom setups).
    pub fn from_links(
        n: usize,
        corrupted: &[NodeId],
        delayed: &[(NodeId, NodeId)],
        nt_delay_ms: u64,
        delay_all_kinds: bool,
    ) -> Self {
        let mut flags = vec![false; n];
        for c in corrupted {
            flags[c.index()] = true;
        }
        AttackPlan {
            corrupted: flags,
            delayed: delayed.iter().copied().collect(),
            nt_delay_ms,
            delay_all_kinds,
        }
    }

    pub fn corrupted_nodes(&self) -> Vec<NodeId> {
        self.corrupted
            .iter()
            .enumerate()
            .filter(|(_, &c)| c)
            .map(|(i, _)| NodeId(i as u32))
            .collect()
    }

    /// Whether the directed link `from -> to` carries the artificial delay.
    pub fn link_marked(&self, from: NodeId, to: NodeId) -> bool {
        self.corrupted[from.index()] && self.delayed.contains(&(from, to))
    }

    pub fn num_delayed_links(&self) -> usize {
        self.delayed.len()
    }
}

/// Corrupt each node independently with probability `p_hat` and mark a
/// fixed subset of `ceil(p_con * degree)` of each corrupted node's
/// neighbors as delayed for the whole run. Deterministic given the seed.
pub fn assign_corruption(topo: &Topology, cfg: &AdversaryConfig, seed: u64) -> AttackPlan {
    let n = topo.len();
    if !cfg.enabled {
        return AttackPlan::benign(n);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0xADE5));
    let mut corrupted = vec![false; n];
    for flag in corrupted.iter_mut() {
        *flag = rng.gen::<f64>() < cfg.p_hat;
    }
    let mut delayed = HashSet::new();
    for i in 0..n {
        if !corrupted[i] {
            continue;
        }
        let v = NodeId(i as u32);
        let peers = topo.peers(v);
        let k = ((cfg.p_con * peers.len() as f64).ceil() as usize).min(peers.len());
        // partial Fisher-Yates over a copy of the peer list
        let mut pool: Vec<NodeId> = peers.to_vec();
        for j in 0..k {
            let pick = rng.gen_range(j..pool.len());
            pool.swap(j, pick);
            delayed.insert((v, pool[j]));
        }
    }
    AttackPlan {
        corrupted,
        delayed,
        nt_delay_ms: cfg.nt_delay_ms,
        delay_all_kinds: cfg.delay_all_kinds,
    }
}

/// Apply the attack to a base link delay: additive `nt_delay` on marked
/// directed links, identity otherwise.
pub fn delayed_link_delay(base_ms: u64, plan: &AttackPlan, from: NodeId, to: NodeId) -> u64 {
    if plan.link_marked(from, to) {
        base_ms + plan.nt_delay_ms
    } else {
        base_ms
    }
}
