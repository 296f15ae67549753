//! Region-aware link model, random P2P topology generation and graph
//! diagnostics.
//!
//! The bundled latency/throughput matrices cover seven regions; download
//! rates are not part of the published calibration and default to five
//! times the regional upload rate (asymmetric consumer links). Every check
//! that depends on absolute simulated delays therefore asserts trends and
//! orderings, not exact values.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{NodeId, NodeProfile, Role, ScenarioConfig};
use crate::rng_util::mix_seed;

/// Index into the configured region list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RegionId(pub usize);

impl RegionId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

/// Dedicated high-speed network between validators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlayConfig {
    pub enabled: bool,
    pub latency_ms: u64,
    pub bandwidth_bytes_per_s: u64,
}

impl Default for OverlayConfig {
    fn default() -> Self {
        // 1 Gbit/s both ways, 10 ms latency.
        OverlayConfig {
            enabled: false,
            latency_ms: 10,
            bandwidth_bytes_per_s: 125_000_000,
        }
    }
}

/// Regional latency/throughput model plus node placement weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub regions: Vec<String>,
    /// Propagation latency between origin (row) and target (column), ms.
    pub latency_ms: Vec<Vec<u64>>,
    pub upload_bytes_per_s: Vec<u64>,
    pub download_bytes_per_s: Vec<u64>,
    /// Probability of a new node joining each region.
    pub region_weights: Vec<f64>,
    /// Fixed block verification time paid before a node relays a block.
    pub verification_delay_ms: u64,
    pub overlay: OverlayConfig,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        let regions = ["NA", "EU", "SA", "AS", "AP", "JAP", "AUS"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let latency_ms = vec![
            vec![24, 70, 79, 115, 140, 79, 122],
            vec![70, 12, 161, 129, 97, 152, 140],
            vec![79, 128, 30, 195, 207, 176, 201],
            vec![122, 129, 195, 24, 54, 24, 129],
            vec![122, 97, 207, 54, 36, 42, 85],
            vec![103, 152, 176, 48, 42, 18, 183],
            vec![134, 158, 201, 128, 85, 192, 30],
        ];
        let upload: Vec<u64> = vec![
            6_800_000, 4_800_000, 2_700_000, 4_800_000, 13_700_000, 6_800_000, 2_400_000,
        ];
        let download = upload.iter().map(|u| u * 5).collect();
        NetworkConfig {
            regions,
            latency_ms,
            upload_bytes_per_s: upload,
            download_bytes_per_s: download,
            region_weights: vec![0.33, 0.42, 0.02, 0.10, 0.05, 0.05, 0.03],
            verification_delay_ms: 50,
            overlay: OverlayConfig::default(),
        }
    }
}

impl NetworkConfig {
    pub fn num_regions(&self) -> usize {
        self.regions.len()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.regions.len();
        if k == 0 {
            return Err(Error::config("at least one region is required"));
        }
        if self.latency_ms.len() != k || self.latency_ms.iter().any(|row| row.len() != k) {
            return Err(Error::config(format!(
                "latency matrix must be {k}x{k} to match the region list"
            )));
        }
        if self.upload_bytes_per_s.len() != k || self.download_bytes_per_s.len() != k {
            return Err(Error::config("bandwidth vectors must match the region count"));
        }
        if self
            .upload_bytes_per_s
            .iter()
            .chain(&self.download_bytes_per_s)
            .any(|&b| b == 0)
        {
            return Err(Error::config("bandwidths must be positive"));
        }
        if self.region_weights.len() != k {
            return Err(Error::config("region_weights must match the region count"));
        }
        if self.region_weights.iter().any(|&w| w < 0.0) {
            return Err(Error::config("region weights must be non-negative"));
        }
        let total: f64 = self.region_weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::config(format!(
                "region weights must sum to 1, got {total}"
            )));
        }
        if self.overlay.bandwidth_bytes_per_s == 0 {
            return Err(Error::config("overlay bandwidth must be positive"));
        }
        Ok(())
    }
}

/// One-way message delay in milliseconds: propagation (worse of the two
/// directed region latencies) plus transmission (size over the binding
/// endpoint bandwidth). Overlay links use the dedicated-network constants.
pub fn link_delay_ms(
    sender: &NodeProfile,
    receiver: &NodeProfile,
    msg_bytes: u64,
    cfg: &NetworkConfig,
    overlay: bool,
) -> u64 {
    let (prop, bw) = if overlay {
        (cfg.overlay.latency_ms, cfg.overlay.bandwidth_bytes_per_s)
    } else {
        let s = sender.region.index();
        let r = receiver.region.index();
        let prop = cfg.latency_ms[s][r].max(cfg.latency_ms[r][s]);
        let bw = cfg.upload_bytes_per_s[s].min(cfg.download_bytes_per_s[r]);
        (prop, bw)
    };
    prop + transmission_ms(msg_bytes, bw)
}

/// Ceiling of `bytes / bandwidth` in milliseconds.
pub fn transmission_ms(msg_bytes: u64, bandwidth_bytes_per_s: u64) -> u64 {
    (msg_bytes * 1000).div_ceil(bandwidth_bytes_per_s)
}

/// Directed random graph with bounded out-degree; gossip traffic flows on
/// the undirected closure of its edges, as connections carry messages both
/// ways.
#[derive(Debug, Clone)]
pub struct Topology {
    out: Vec<Vec<NodeId>>,
    /// Out-neighbors in construction order followed by the remaining
    /// in-neighbors in ascending order; the deterministic fan-out order.
    peers: Vec<Vec<NodeId>>,
    profiles: Vec<NodeProfile>,
    overlay_enabled: bool,
}

impl Topology {
    /// Assemble a topology from explicit out-adjacency lists.
    pub fn from_parts(
        out: Vec<Vec<NodeId>>,
        profiles: Vec<NodeProfile>,
        overlay_enabled: bool,
    ) -> Result<Self> {
        let n = profiles.len();
        if out.len() != n {
            return Err(Error::Topology(format!(
                "adjacency has {} rows for {} profiles",
                out.len(),
                n
            )));
        }
        for (i, targets) in out.iter().enumerate() {
            let mut seen = vec![false; n];
            for t in targets {
                if t.index() >= n {
                    return Err(Error::Topology(format!("edge target {t} out of range")));
                }
                if t.index() == i {
                    return Err(Error::Topology(format!("self loop at node {i}")));
                }
                if seen[t.index()] {
                    return Err(Error::Topology(format!("duplicate edge {i} -> {t}")));
                }
                seen[t.index()] = true;
            }
        }
        let peers = build_peer_lists(&out);
        Ok(Topology {
            out,
            peers,
            profiles,
            overlay_enabled,
        })
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn out_neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.out[v.index()]
    }

    /// All connected neighbors of `v` in deterministic fan-out order.
    pub fn peers(&self, v: NodeId) -> &[NodeId] {
        &self.peers[v.index()]
    }

    pub fn profile(&self, v: NodeId) -> &NodeProfile {
        &self.profiles[v.index()]
    }

    pub fn profiles(&self) -> &[NodeProfile] {
        &self.profiles
    }

    pub fn profiles_mut(&mut self) -> &mut [NodeProfile] {
        &mut self.profiles
    }

    pub fn validators(&self) -> impl Iterator<Item = &NodeProfile> {
        self.profiles.iter().filter(|p| p.is_validator())
    }

    pub fn overlay_enabled(&self) -> bool {
        self.overlay_enabled
    }

    /// Whether traffic between the two nodes rides the dedicated network.
    pub fn overlay_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.overlay_enabled
            && self.profiles[a.index()].is_validator()
            && self.profiles[b.index()].is_validator()
    }

    /// Undirected connectivity over the peer lists.
    pub fn is_connected(&self) -> bool {
        if self.profiles.is_empty() {
            return false;
        }
        let reached = bfs_distances(&self.peers, 0);
        reached.iter().all(|d| d.is_some())
    }
}

fn build_peer_lists(out: &[Vec<NodeId>]) -> Vec<Vec<NodeId>> {
    let n = out.len();
    let mut peers: Vec<Vec<NodeId>> = out.to_vec();
    let mut inbound: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    for (i, targets) in out.iter().enumerate() {
        for t in targets {
            inbound[t.index()].push(NodeId(i as u32));
        }
    }
    for (i, peer_list) in peers.iter_mut().enumerate() {
        let mut extra: Vec<NodeId> = inbound[i]
            .iter()
            .copied()
            .filter(|v| !out[i].contains(v))
            .collect();
        extra.sort_unstable();
        extra.dedup();
        peer_list.extend(extra);
    }
    peers
}

/// Number of reseeding attempts before giving up on a connected graph.
const CONNECT_RETRIES: u64 = 10;

/// Generate the random topology of a scenario: every node opens `d_out`
/// outbound connections to distinct uniformly random peers, regions are
/// drawn i.i.d. from the configured weights, validator slots are placed
/// uniformly at random and share the production power equally.
/// Deterministic given the seed; retries with derived seeds (up to 10)
/// if the undirected graph comes out disconnected.
pub fn build_topology(cfg: &ScenarioConfig, seed: u64) -> Result<Topology> {
    cfg.validate()?;
    for attempt in 0..CONNECT_RETRIES {
        let topo = generate(cfg, mix_seed(seed, attempt))?;
        if topo.is_connected() {
            return Ok(topo);
        }
    }
    Err(Error::Topology(format!(
        "no connected topology after {CONNECT_RETRIES} attempts (n={}, d_out={})",
        cfg.n(),
        cfg.d_out
    )))
}

fn generate(cfg: &ScenarioConfig, seed: u64) -> Result<Topology> {
    let n = cfg.n() as usize;
    let d_out = cfg.d_out as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Validator slots: partial Fisher-Yates over the index range.
    let mut indices: Vec<u32> = (0..n as u32).collect();
    for i in 0..cfg.n_val as usize {
        let j = rng.gen_range(i..n);
        indices.swap(i, j);
    }
    let mut is_validator = vec![false; n];
    for &i in &indices[..cfg.n_val as usize] {
        is_validator[i as usize] = true;
    }

    let weights = &cfg.network.region_weights;
    let power = 1.0 / cfg.n_val as f64;
    let profiles: Vec<NodeProfile> = (0..n)
        .map(|i| {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut region = weights.len() - 1;
            for (r, &w) in weights.iter().enumerate() {
                acc += w;
                if u < acc {
                    region = r;
                    break;
                }
            }
            NodeProfile {
                id: NodeId(i as u32),
                role: if is_validator[i] {
                    Role::Validator
                } else {
                    Role::ZeroPower
                },
                region: RegionId(region),
                relative_power: if is_validator[i] { power } else { 0.0 },
                corrupted: false,
            }
        })
        .collect();

    let mut out: Vec<Vec<NodeId>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut targets: Vec<NodeId> = Vec::with_capacity(d_out);
        while targets.len() < d_out {
            let t = rng.gen_range(0..n);
            if t != i && !targets.iter().any(|x| x.index() == t) {
                targets.push(NodeId(t as u32));
            }
        }
        out.push(targets);
    }

    Topology::from_parts(out, profiles, cfg.network.overlay.enabled)
}

fn bfs_distances(adj: &[Vec<NodeId>], source: usize) -> Vec<Option<u32>> {
    let mut dist = vec![None; adj.len()];
    dist[source] = Some(0);
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(source);
    while let Some(v) = queue.pop_front() {
        let d = dist[v].unwrap();
        for w in &adj[v] {
            if dist[w.index()].is_none() {
                dist[w.index()] = Some(d + 1);
                queue.push_back(w.index());
            }
        }
    }
    dist
}

/// Node count up to which the diameter is computed exactly by all-pairs BFS.
const EXACT_DIAMETER_LIMIT: usize = 2_000;
/// Random sources for the double-sweep estimate on larger graphs.
const DOUBLE_SWEEP_SOURCES: usize = 16;

/// Diameter (in hops) of the undirected peer graph. Exact for up to 2,000
/// nodes; a double-sweep lower-bound estimate beyond that. Errors on
/// disconnected topologies.
pub fn estimate_diameter(topo: &Topology) -> Result<u64> {
    let n = topo.len();
    if n == 0 {
        return Err(Error::Topology("empty topology".into()));
    }
    let adj = &topo.peers;
    let eccentricity = |src: usize| -> Result<(usize, u32)> {
        let dist = bfs_distances(adj, src);
        let mut far_node = src;
        let mut far = 0u32;
        let mut reached = 0usize;
        for (i, d) in dist.iter().enumerate() {
            match d {
                Some(d) => {
                    reached += 1;
                    if *d > far {
                        far = *d;
                        far_node = i;
                    }
                }
                None => {}
            }
        }
        if reached != n {
            return Err(Error::Topology("disconnected topology".into()));
        }
        Ok((far_node, far))
    };

    if n <= EXACT_DIAMETER_LIMIT {
        let mut best = 0u32;
        for src in 0..n {
            let (_, ecc) = eccentricity(src)?;
            best = best.max(ecc);
        }
        Ok(best as u64)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(0xD1A, n as u64));
        let mut best = 0u32;
        for _ in 0..DOUBLE_SWEEP_SOURCES {
            let src = rng.gen_range(0..n);
            let (far_node, _) = eccentricity(src)?;
            let (_, ecc) = eccentricity(far_node)?;
            best = best.max(ecc);
        }
        Ok(best as u64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{preset, Chain};

    fn profile(i: u32, region: usize) -> NodeProfile {
        NodeProfile {
            id: NodeId(i),
            role: Role::Validator,
            region: RegionId(region),
            relative_power: 0.0,
            corrupted: false,
        }
    }

    #[test]
    fn link_delay_examples() {
        let cfg = NetworkConfig::default();
        let na = profile(0, 0);
        let eu = profile(1, 1);
        // zero payload within North America: pure latency
        assert_eq!(link_delay_ms(&na, &na, 0, &cfg, false), 24);
        // 800 KB block within Europe: 12 ms latency + 167 ms transmission
        assert_eq!(link_delay_ms(&eu, &eu, 800_000, &cfg, false), 179);
        // overlay link: 10 ms + 7 ms at 1 Gbit/s
        assert_eq!(link_delay_ms(&na, &eu, 800_000, &cfg, true), 17);
    }

    #[test]
    fn link_delay_uses_worse_directed_latency() {
        let cfg = NetworkConfig::default();
        let na = profile(0, 0);
        let jap = profile(1, 5);
        // NA->JAP is 79 ms, JAP->NA is 103 ms; both directions pay 103.
        assert_eq!(link_delay_ms(&na, &jap, 0, &cfg, false), 103);
        assert_eq!(link_delay_ms(&jap, &na, 0, &cfg, false), 103);
    }

    #[test]
    fn link_delay_never_below_latency_floor() {
        let cfg = NetworkConfig::default();
        for s in 0..7 {
            for r in 0..7 {
                let a = profile(0, s);
                let b = profile(1, r);
                let floor = cfg.latency_ms[s][r].max(cfg.latency_ms[r][s]);
                for bytes in [0, 100, 800_000] {
                    assert!(link_delay_ms(&a, &b, bytes, &cfg, false) >= floor);
                }
            }
        }
    }

    #[test]
    fn two_node_topology_is_a_mutual_pair() {
        let mut cfg = preset(Chain::Bitcoin);
        cfg.n_val = 2;
        cfg.d_out = 1;
        let topo = build_topology(&cfg, 1).unwrap();
        assert_eq!(topo.out_neighbors(NodeId(0)), &[NodeId(1)]);
        assert_eq!(topo.out_neighbors(NodeId(1)), &[NodeId(0)]);
        assert!(topo.is_connected());
    }

    #[test]
    fn topology_degree_determinism_and_connectivity() {
        let mut cfg = preset(Chain::Bitcoin);
        cfg.n_val = 10_000;
        cfg.d_out = 8;
        let a = build_topology(&cfg, 7).unwrap();
        let b = build_topology(&cfg, 7).unwrap();
        for i in 0..a.len() {
            assert_eq!(a.out_neighbors(NodeId(i as u32)).len(), 8);
            assert_eq!(a.out_neighbors(NodeId(i as u32)), b.out_neighbors(NodeId(i as u32)));
        }
        assert!(a.is_connected());
        let c = build_topology(&cfg, 8).unwrap();
        assert_ne!(
            a.out_neighbors(NodeId(0)),
            c.out_neighbors(NodeId(0)),
            "different seeds should give different graphs"
        );
    }

    #[test]
    fn validator_power_sums_to_one() {
        let mut cfg = preset(Chain::Cardano);
        cfg.n_val = 777;
        cfg.n_zp = 223;
        let topo = build_topology(&cfg, 3).unwrap();
        let total: f64 = topo.validators().map(|p| p.relative_power).sum();
        assert!((total - 1.0).abs() < 1e-9);
        assert_eq!(topo.validators().count(), 777);
        assert!(topo
            .profiles()
            .iter()
            .filter(|p| p.role == Role::ZeroPower)
            .all(|p| p.relative_power == 0.0));
    }

    #[test]
    fn region_frequencies_match_weights() {
        let mut cfg = preset(Chain::Bitcoin);
        cfg.n_val = 100_000;
        let topo = build_topology(&cfg, 5).unwrap();
        let k = cfg.network.num_regions();
        let mut counts = vec![0usize; k];
        for p in topo.profiles() {
            counts[p.region.index()] += 1;
        }
        // chi-square against the configured weights; critical value for
        // df = 6 at p = 0.001 is 22.458
        let n = topo.len() as f64;
        let chi2: f64 = counts
            .iter()
            .zip(&cfg.network.region_weights)
            .map(|(&obs, &w)| {
                let exp = n * w;
                (obs as f64 - exp).powi(2) / exp
            })
            .sum();
        assert!(chi2 < 22.458, "chi2 = {chi2}");
    }

    #[test]
    fn diameter_complete_graph_and_ring() {
        let n = 5;
        let profiles: Vec<NodeProfile> = (0..n).map(|i| profile(i, 0)).collect();
        let out: Vec<Vec<NodeId>> = (0..n)
            .map(|i| (0..n).filter(|&j| j != i).map(NodeId).collect())
            .collect();
        let complete = Topology::from_parts(out, profiles, false).unwrap();
        assert_eq!(estimate_diameter(&complete).unwrap(), 1);

        let profiles: Vec<NodeProfile> = (0..6).map(|i| profile(i, 0)).collect();
        let out: Vec<Vec<NodeId>> = (0..6).map(|i| vec![NodeId((i + 1) % 6)]).collect();
        let ring = Topology::from_parts(out, profiles, false).unwrap();
        assert_eq!(estimate_diameter(&ring).unwrap(), 3);
    }

    #[test]
    fn diameter_grows_sublinearly() {
        let d_at = |n: u64| {
            let mut cfg = preset(Chain::Bitcoin);
            cfg.n_val = n;
            cfg.d_out = 8;
            estimate_diameter(&build_topology(&cfg, 17).unwrap()).unwrap()
        };
        let d100 = d_at(100);
        let d1000 = d_at(1_000);
        assert!(d1000 >= d100);
        assert!(d1000 - d100 <= d100, "d(1000)={d1000} d(100)={d100}");
    }

    #[test]
    fn disconnected_topology_is_rejected() {
        let profiles: Vec<NodeProfile> = (0..4).map(|i| profile(i, 0)).collect();
        let out = vec![
            vec![NodeId(1)],
            vec![NodeId(0)],
            vec![NodeId(3)],
            vec![NodeId(2)],
        ];
        let topo = Topology::from_parts(out, profiles, false).unwrap();
        assert!(!topo.is_connected());
        assert!(estimate_diameter(&topo).is_err());
    }

    #[test]
    fn from_parts_rejects_malformed_adjacency() {
        let profiles: Vec<NodeProfile> = (0..2).map(|i| profile(i, 0)).collect();
        assert!(Topology::from_parts(vec![vec![NodeId(0)], vec![]], profiles.clone(), false)
            .is_err());
        assert!(Topology::from_parts(
            vec![vec![NodeId(1), NodeId(1)], vec![]],
            profiles.clone(),
            false
        )
        .is_err());
        assert!(Topology::from_parts(vec![vec![NodeId(5)], vec![]], profiles, false).is_err());
    }

    #[test]
    fn default_network_config_is_valid() {
        NetworkConfig::default().validate().unwrap();
    }
}
