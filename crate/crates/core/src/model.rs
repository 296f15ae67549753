//! Shared domain vocabulary: nodes, blocks, rates and scenario configuration.
//!
//! Analytical quantities are real-valued seconds; simulation time is integer
//! milliseconds. Conversions are explicit at the module boundary.

use serde::{Deserialize, Serialize};

use crate::adversary::AdversaryConfig;
use crate::error::{Error, Result};
use crate::netmodel::{NetworkConfig, RegionId};

/// Dense node index, unique and stable for the lifetime of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Whether a node produces blocks or only relays them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Validator,
    ZeroPower,
}

/// Static per-node attributes fixed at topology construction.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeProfile {
    pub id: NodeId,
    pub role: Role,
    pub region: RegionId,
    /// Fraction of total block-production power; 0 iff `ZeroPower`.
    pub relative_power: f64,
    pub corrupted: bool,
}

impl NodeProfile {
    pub fn is_validator(&self) -> bool {
        self.role == Role::Validator
    }
}

/// Identifier of a block within one run; assigned in creation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockId(pub u32);

impl BlockId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A produced block. Payloads are opaque: only the size matters here.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub id: BlockId,
    pub parent: Option<BlockId>,
    pub height: u64,
    pub miner: NodeId,
    pub created_at_ms: u64,
    pub size_bytes: u64,
}

/// The four gossip protocols used by the studied deployments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// Announce with `inv`, serve on `getdata` (Cardano).
    AdvertisementBased,
    /// Push the full block to every peer (Monero).
    DirectPush,
    /// Push to a sqrt-sized subset, announce hashes to the rest (Ethereum Classic).
    HybridPush,
    /// Low-bandwidth compact block relay (Bitcoin).
    CompactBlocksLow,
}

impl Protocol {
    pub const ALL: [Protocol; 4] = [
        Protocol::AdvertisementBased,
        Protocol::DirectPush,
        Protocol::HybridPush,
        Protocol::CompactBlocksLow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::AdvertisementBased => "advertisement_based",
            Protocol::DirectPush => "direct_push",
            Protocol::HybridPush => "hybrid_push",
            Protocol::CompactBlocksLow => "compact_blocks_low",
        }
    }
}

/// One of the four bundled chain presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Chain {
    Bitcoin,
    Cardano,
    Monero,
    EthereumClassic,
}

impl Chain {
    pub const ALL: [Chain; 4] = [
        Chain::Bitcoin,
        Chain::Monero,
        Chain::Cardano,
        Chain::EthereumClassic,
    ];

    /// Expected seconds between blocks.
    pub fn block_interval_s(self) -> f64 {
        match self {
            Chain::Bitcoin => 600.0,
            Chain::Cardano => 20.0,
            Chain::Monero => 120.0,
            Chain::EthereumClassic => 13.0,
        }
    }

    /// Blocks per second.
    pub fn rho(self) -> f64 {
        1.0 / self.block_interval_s()
    }

    pub fn protocol(self) -> Protocol {
        match self {
            Chain::Bitcoin => Protocol::CompactBlocksLow,
            Chain::Cardano => Protocol::AdvertisementBased,
            Chain::Monero => Protocol::DirectPush,
            Chain::EthereumClassic => Protocol::HybridPush,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Chain::Bitcoin => "bitcoin",
            Chain::Cardano => "cardano",
            Chain::Monero => "monero",
            Chain::EthereumClassic => "ethereum_classic",
        }
    }
}

impl std::str::FromStr for Chain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bitcoin" => Ok(Chain::Bitcoin),
            "cardano" => Ok(Chain::Cardano),
            "monero" => Ok(Chain::Monero),
            "ethereum_classic" => Ok(Chain::EthereumClassic),
            other => Err(Error::config(format!("unknown chain name: {other}"))),
        }
    }
}

/// Probabilistic corruption input: either the marginal probability directly
/// or a list of `(corruption probability, type frequency)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CorruptionSpec {
    Value(f64),
    Mixture(Vec<(f64, f64)>),
}

impl CorruptionSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            CorruptionSpec::Value(p) => {
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::config(format!("p_star must be in [0,1], got {p}")));
                }
            }
            CorruptionSpec::Mixture(entries) => {
                if entries.is_empty() {
                    return Err(Error::config("characterization must be non-empty"));
                }
                let mut total = 0.0;
                for &(q, c) in entries {
                    if !(0.0..=1.0).contains(&q) || !(0.0..=1.0).contains(&c) {
                        return Err(Error::config(
                            "characterization entries must lie in [0,1]".to_string(),
                        ));
                    }
                    total += c;
                }
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::config(format!(
                        "characterization frequencies must sum to 1, got {total}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Analytical security parameters of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecurityParams {
    /// Blocks per second.
    pub rho: f64,
    /// Magnification factor; 1 for the bundled presets.
    pub e: f64,
    /// Corruption probability of a single validator.
    pub p_star: CorruptionSpec,
}

impl SecurityParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0) {
            return Err(Error::config(format!("rho must be > 0, got {}", self.rho)));
        }
        if !(self.e >= 1.0) {
            return Err(Error::config(format!("e must be >= 1, got {}", self.e)));
        }
        self.p_star.validate()
    }
}

/// Gossip-layer knobs for compact blocks and request retries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GossipParams {
    /// Compact sketch size as a fraction of the full block.
    pub compact_fraction: f64,
    /// Probability that a compact block needs one missing-transaction round.
    pub txn_round_prob: f64,
    /// Size of the missing-transaction response as a fraction of the block.
    pub txn_fraction: f64,
    /// How long advertisement-based and compact-blocks nodes wait on an
    /// unanswered block request before asking the next advertiser.
    pub request_timeout_ms: u64,
    /// The hybrid-push fetcher's much shorter retry window.
    pub hybrid_request_timeout_ms: u64,
}

impl Default for GossipParams {
    fn default() -> Self {
        GossipParams {
            compact_fraction: 0.02,
            txn_round_prob: 0.1,
            txn_fraction: 0.1,
            request_timeout_ms: 600_000,
            hybrid_request_timeout_ms: 5_000,
        }
    }
}

impl GossipParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("compact_fraction", self.compact_fraction),
            ("txn_round_prob", self.txn_round_prob),
            ("txn_fraction", self.txn_fraction),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(format!("{name} must be in [0,1], got {v}")));
            }
        }
        Ok(())
    }
}

/// Complete description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub n_val: u64,
    pub n_zp: u64,
    pub protocol: Protocol,
    pub block_size_bytes: u64,
    /// Outbound connections established per node.
    pub d_out: u32,
    pub seed: u64,
    pub num_blocks: u32,
    /// Independent repetitions used when aggregating sweeps.
    pub runs: u32,
    pub security: SecurityParams,
    pub gossip: GossipParams,
    pub adversary: AdversaryConfig,
    pub network: NetworkConfig,
}

impl ScenarioConfig {
    /// Total number of nodes.
    pub fn n(&self) -> u64 {
        self.n_val + self.n_zp
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_val < 1 {
            return Err(Error::config("n_val must be >= 1"));
        }
        if self.num_blocks < 1 {
            return Err(Error::config("num_blocks must be >= 1"));
        }
        if self.block_size_bytes == 0 {
            return Err(Error::config("block_size_bytes must be > 0"));
        }
        if self.d_out < 1 || u64::from(self.d_out) >= self.n() {
            return Err(Error::config(format!(
                "d_out must satisfy 1 <= d_out < n, got d_out={} n={}",
                self.d_out,
                self.n()
            )));
        }
        if self.runs < 1 {
            return Err(Error::config("runs must be >= 1"));
        }
        self.security.validate()?;
        self.gossip.validate()?;
        self.adversary.validate()?;
        self.network.validate()?;
        Ok(())
    }

    /// Serialize to the structured text configuration format.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::config(format!("serialize: {e}")))
    }

    /// Parse and validate a scenario from its text form.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig =
            toml::from_str(text).map_err(|e| Error::config(format!("parse: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Build the bundled configuration for one of the four studied chains.
///
/// All presets use a fixed 800 KB block, `e = 1`, the bundled region model
/// and a benign (disabled) adversary. Pure: identical inputs give identical
/// configs.
pub fn preset(chain: Chain) -> ScenarioConfig {
    ScenarioConfig {
        n_val: 1000,
        n_zp: 0,
        protocol: chain.protocol(),
        block_size_bytes: 800_000,
        d_out: 8,
        seed: 42,
        num_blocks: 100,
        runs: 5,
        security: SecurityParams {
            rho: chain.rho(),
            e: 1.0,
            p_star: CorruptionSpec::Value(0.125),
        },
        gossip: GossipParams::default(),
        adversary: AdversaryConfig::default(),
        network: NetworkConfig::default(),
    }
}

/// Parse a chain name and build its preset.
pub fn preset_by_name(name: &str) -> Result<ScenarioConfig> {
    Ok(preset(name.parse()?))
}
