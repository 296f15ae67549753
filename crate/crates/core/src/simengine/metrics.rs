//! Per-run propagation metrics and their reduction.

use crate::model::Block;

/// Sentinel for "node never received the block".
pub const NEVER: u64 = u64::MAX;

/// Propagation outcome of one block.
#[derive(Debug, Clone)]
pub struct BlockOutcome {
    pub block: Block,
    /// Off the final best chain.
    pub stale: bool,
    /// First reception time per node (ms); `NEVER` if it did not arrive.
    pub received_ms: Vec<u64>,
}

impl BlockOutcome {
    /// Reception latency of every node that received the block, ms.
    pub fn latencies_ms(&self) -> impl Iterator<Item = u64> + '_ {
        self.received_ms
            .iter()
            .filter(|&&t| t != NEVER)
            .map(move |&t| t - self.block.created_at_ms)
    }

    pub fn fully_propagated(&self) -> bool {
        self.received_ms.iter().all(|&t| t != NEVER)
    }
}

/// Everything measured in one run.
#[derive(Debug, Clone)]
pub struct RunMetrics {
    pub seed: u64,
    pub per_block: Vec<BlockOutcome>,
    pub blocks_created: u32,
    /// Worst full-propagation time over non-stale blocks, seconds.
    pub delta_max_s: f64,
    /// Mean reception latency over all (block, node) pairs, seconds.
    pub delta_avg_s: f64,
    /// 90th percentile (nearest-rank) of reception latencies, seconds.
    pub delta_p90_s: f64,
    /// Fraction of produced blocks off the final best chain.
    pub stale_rate: f64,
    /// The run hit its cutoff with messages still in flight.
    pub partial: bool,
}

impl RunMetrics {
    pub fn stale_blocks(&self) -> usize {
        self.per_block.iter().filter(|b| b.stale).count()
    }
}

/// Reduce per-block records to `(delta_max_s, delta_avg_s, delta_p90_s,
/// stale_rate)`. Latency statistics cover non-stale blocks; stale blocks
/// only propagate through the neighborhoods that adopted them and would
/// skew the distribution with truncated rows.
pub fn reduce_metrics(per_block: &[BlockOutcome]) -> (f64, f64, f64, f64) {
    let mut latencies: Vec<u64> = Vec::new();
    let mut delta_max = 0u64;
    for outcome in per_block.iter().filter(|b| !b.stale) {
        let mut last = 0u64;
        for lat in outcome.latencies_ms() {
            latencies.push(lat);
            last = last.max(lat);
        }
        delta_max = delta_max.max(last);
    }
    let total = per_block.len();
    let stale = per_block.iter().filter(|b| b.stale).count();
    let stale_rate = if total == 0 {
        0.0
    } else {
        stale as f64 / total as f64
    };
    if latencies.is_empty() {
        return (0.0, 0.0, 0.0, stale_rate);
    }
    let avg = latencies.iter().map(|&l| l as f64).sum::<f64>() / latencies.len() as f64;
    latencies.sort_unstable();
    let rank = ((0.9 * latencies.len() as f64).ceil() as usize).max(1);
    let p90 = latencies[rank - 1];
    (
        delta_max as f64 / 1000.0,
        avg / 1000.0,
        p90 as f64 / 1000.0,
        stale_rate,
    )
}
