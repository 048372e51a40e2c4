//! Cycle-driven packet simulator for lattice-graph networks.
//!
//! Router model: every node has one input buffer per incoming link direction
//! and virtual channel, each holding `queue_capacity` packets, plus
//! `injectors` injection queues of the same capacity. Packets follow their
//! routing record in dimension order. Switching is virtual cut-through: a
//! packet moves only when the downstream buffer has room for all of it; a
//! packet entering a ring (injection or a change of dimension or direction)
//! additionally needs a second free slot (bubble flow control), which keeps
//! every ring of every virtual channel deadlock-free.
//!
//! Timing: a link carries one phit per cycle, so a granted packet holds the
//! link and its upstream buffer for `packet_size` cycles. The head reaches the
//! next router one cycle after the grant and may be forwarded from there
//! immediately. The last hop delivers into the destination node.
//!
//! Arbitration per output link: packets already in the network win over
//! injections; ties inside a class are broken uniformly at random.

use std::collections::VecDeque;
use std::thread;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intmat::{IntVector, MAX_DIM};
use crate::lattice::{make_topology, LatticeGraph, TopologyKind};
use crate::metrics::bfs_distances;
use crate::routing::{GenericRouter, RoutingRecord};

/// Largest graph order the simulator accepts.
pub const MAX_SIM_ORDER: u64 = 16384;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrafficPattern {
    /// Every packet picks a uniformly random destination other than its source.
    Uniform,
    /// Each node sends to a fixed vertex at maximum distance.
    Antipodal,
    /// Each node `v` sends to `-v`; self-inverse nodes fall back to uniform.
    CentralSymmetric,
    /// A random perfect matching fixed for the whole run.
    RandomPairings,
}

impl TrafficPattern {
    pub const ALL: [TrafficPattern; 4] = [
        TrafficPattern::Uniform,
        TrafficPattern::Antipodal,
        TrafficPattern::CentralSymmetric,
        TrafficPattern::RandomPairings,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TrafficPattern::Uniform => "uniform",
            TrafficPattern::Antipodal => "antipodal",
            TrafficPattern::CentralSymmetric => "centralsymmetric",
            TrafficPattern::RandomPairings => "randompairings",
        }
    }
}

impl std::str::FromStr for TrafficPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TrafficPattern::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown traffic pattern '{s}'")))
    }
}

fn default_pattern() -> TrafficPattern {
    TrafficPattern::Uniform
}
fn default_packet_size() -> u32 {
    16
}
fn default_injectors() -> usize {
    6
}
fn default_vc_count() -> usize {
    3
}
fn default_queue_capacity() -> usize {
    4
}
fn default_cycles() -> u64 {
    10_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub topology: TopologyKind,
    #[serde(default = "default_pattern")]
    pub pattern: TrafficPattern,
    /// Phits per cycle per node, in `[0, 1]`.
    pub offered_load: f64,
    #[serde(default = "default_packet_size")]
    pub packet_size: u32,
    #[serde(default = "default_injectors")]
    pub injectors: usize,
    #[serde(default = "default_vc_count")]
    pub vc_count: usize,
    /// Packets per virtual channel and per injection queue.
    #[serde(default = "default_queue_capacity")]
    pub queue_capacity: usize,
    #[serde(default = "default_cycles")]
    pub warmup_cycles: u64,
    #[serde(default = "default_cycles")]
    pub measure_cycles: u64,
    #[serde(default)]
    pub seed: u64,
}

impl SimConfig {
    pub fn new(topology: TopologyKind, pattern: TrafficPattern, offered_load: f64) -> Self {
        SimConfig {
            topology,
            pattern,
            offered_load,
            packet_size: default_packet_size(),
            injectors: default_injectors(),
            vc_count: default_vc_count(),
            queue_capacity: default_queue_capacity(),
            warmup_cycles: default_cycles(),
            measure_cycles: default_cycles(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(0.0..=1.0).contains(&self.offered_load) {
            return bad("offered_load must lie in [0, 1]");
        }
        if self.packet_size == 0 || self.injectors == 0 || self.vc_count == 0 {
            return bad("packet_size, injectors and vc_count must be at least 1");
        }
        if self.vc_count > u8::MAX as usize {
            return bad("vc_count must be at most 255");
        }
        if self.queue_capacity < 2 {
            return bad("queue_capacity must be at least 2 for bubble flow control");
        }
        if self.measure_cycles == 0 {
            return bad("measure_cycles must be at least 1");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimStats {
    pub topology: String,
    pub pattern: TrafficPattern,
    pub offered_load: f64,
    /// Phits delivered in the measurement window per cycle per node.
    pub accepted_load: f64,
    /// Mean birth-to-delivery time of packets delivered in the window.
    pub avg_latency: f64,
    /// Packets delivered in the measurement window.
    pub delivered_packets: u64,
    pub generated_packets: u64,
    pub delivered_total: u64,
    /// Packets inside routers or on links when the run ended.
    pub in_network: u64,
    /// Packets waiting in injection queues when the run ended.
    pub queued: u64,
    /// Generation attempts refused because every injection queue was full.
    pub stalled_generations: u64,
    /// Longest run of cycles without a delivery after warm-up.
    pub max_delivery_gap: u64,
    /// Delivered packets whose hop count differed from their record norm.
    pub hop_mismatches: u64,
    /// Delivered packets that arrived earlier than hops + size - 1 cycles.
    pub latency_bound_violations: u64,
}

/// Destination choice for a traffic pattern. Static patterns are resolved
/// once per run.
pub struct TrafficMap {
    pattern: TrafficPattern,
    order: usize,
    // usize::MAX marks "uniform fallback".
    fixed: Vec<usize>,
}

impl TrafficMap {
    pub fn new(pattern: TrafficPattern, g: &LatticeGraph, rng: &mut impl Rng) -> Result<Self> {
        let n = g.order() as usize;
        if n < 2 {
            return Err(Error::Config("traffic needs at least two nodes".into()));
        }
        let fixed = match pattern {
            TrafficPattern::Uniform => Vec::new(),
            TrafficPattern::Antipodal => {
                let dist = bfs_distances(g)?;
                let diameter = *dist.iter().max().unwrap();
                let far: Vec<IntVector> =
                    (0..n).filter(|&i| dist[i] == diameter).map(|i| g.label(i)).collect();
                let mut out = Vec::with_capacity(n);
                for s in 0..n {
                    let v = g.label(s);
                    let mut best: Option<IntVector> = None;
                    for f in &far {
                        let w = g.reduce(&v.checked_add(f)?)?;
                        if best.as_ref().map_or(true, |b| w < *b) {
                            best = Some(w);
                        }
                    }
                    out.push(g.index_unchecked(&best.unwrap()));
                }
                out
            }
            TrafficPattern::CentralSymmetric => (0..n)
                .map(|s| {
                    let w = g.reduce(&g.label(s).neg())?;
                    let d = g.index_unchecked(&w);
                    Ok(if d == s { usize::MAX } else { d })
                })
                .collect::<Result<_>>()?,
            TrafficPattern::RandomPairings => {
                let mut nodes: Vec<usize> = (0..n).collect();
                nodes.shuffle(rng);
                let mut out = vec![usize::MAX; n];
                for pair in nodes.chunks_exact(2) {
                    out[pair[0]] = pair[1];
                    out[pair[1]] = pair[0];
                }
                out
            }
        };
        Ok(TrafficMap { pattern, order: n, fixed })
    }

    pub fn pattern(&self) -> TrafficPattern {
        self.pattern
    }

    /// Destination index for a packet generated at `source`.
    pub fn destination(&self, source: usize, rng: &mut impl Rng) -> usize {
        match self.fixed.get(source) {
            Some(&d) if d != usize::MAX => d,
            _ => {
                let d = rng.gen_range(0..self.order - 1);
                if d >= source {
                    d + 1
                } else {
                    d
                }
            }
        }
    }
}

/// Destination of one packet from `source` under `pattern`. Random pairings
/// draw a fresh matching from `rng`; simulations build a [`TrafficMap`] once
/// instead.
pub fn pattern_destination(
    pattern: TrafficPattern,
    g: &LatticeGraph,
    source: &IntVector,
    rng: &mut impl Rng,
) -> Result<IntVector> {
    let s = g.index_of(source)?;
    let map = TrafficMap::new(pattern, g, rng)?;
    Ok(g.label(map.destination(s, rng)))
}

#[derive(Clone)]
struct Packet {
    dst: u32,
    remaining: [i32; MAX_DIM],
    birth: u64,
    hops: u32,
    norm: u32,
    // Direction of the link it arrived on, or NONE while in an injector.
    in_port: u8,
    vc: u8,
    ready: u64,
}

const NONE: u8 = u8::MAX;

enum Event {
    Release(usize),
    Deliver(u32),
}

enum Target {
    Sink,
    Buffer(u8),
}

struct Network {
    n_dim: usize,
    ports: usize,
    vcs: usize,
    injectors: usize,
    capacity: usize,
    queues_per_node: usize,
    neighbor: Vec<u32>,
    queues: Vec<VecDeque<u32>>,
    occupied: Vec<usize>,
    read_busy: Vec<u64>,
    link_busy: Vec<u64>,
    packets: Vec<Packet>,
    free: Vec<u32>,
    wheel: Vec<Vec<Event>>,
}

impl Network {
    fn input_queue(&self, node: usize, port: usize, vc: usize) -> usize {
        node * self.queues_per_node + port * self.vcs + vc
    }

    fn injector_queue(&self, node: usize, k: usize) -> usize {
        node * self.queues_per_node + self.ports * self.vcs + k
    }

    fn schedule(&mut self, time: u64, e: Event) {
        let w = self.wheel.len() as u64;
        self.wheel[(time % w) as usize].push(e);
    }

    fn next_port(&self, p: &Packet) -> Option<usize> {
        (0..self.n_dim).find(|&i| p.remaining[i] != 0).map(|i| 2 * i + usize::from(p.remaining[i] < 0))
    }

    fn alloc(&mut self, p: Packet) -> u32 {
        match self.free.pop() {
            Some(id) => {
                self.packets[id as usize] = p;
                id
            }
            None => {
                self.packets.push(p);
                (self.packets.len() - 1) as u32
            }
        }
    }

    /// Where the head of a packet would go through `port`, if it may move now.
    fn target(&self, node: usize, pid: u32, port: usize, rng: &mut ChaCha8Rng) -> Option<Target> {
        let p = &self.packets[pid as usize];
        let dim = port / 2;
        let last_hop = p.remaining[dim].abs() == 1
            && (dim + 1..self.n_dim).all(|i| p.remaining[i] == 0);
        if last_hop {
            return Some(Target::Sink);
        }
        let next = self.neighbor[node * self.ports + port] as usize;
        if p.in_port as usize == port {
            let q = self.input_queue(next, port, p.vc as usize);
            return (self.occupied[q] < self.capacity).then_some(Target::Buffer(p.vc));
        }
        let mut best: Vec<u8> = Vec::new();
        let mut best_occ = usize::MAX;
        for vc in 0..self.vcs {
            let occ = self.occupied[self.input_queue(next, port, vc)];
            if occ + 2 > self.capacity {
                continue;
            }
            if occ < best_occ {
                best_occ = occ;
                best.clear();
            }
            if occ == best_occ {
                best.push(vc as u8);
            }
        }
        match best.len() {
            0 => None,
            1 => Some(Target::Buffer(best[0])),
            k => Some(Target::Buffer(best[rng.gen_range(0..k)])),
        }
    }
}

/// Runs one simulation.
pub fn run_simulation(config: &SimConfig) -> Result<SimStats> {
    config.validate()?;
    let g = make_topology(&config.topology)?;
    if g.order() > MAX_SIM_ORDER {
        return Err(Error::Config(format!(
            "graph order {} exceeds the simulator limit of {MAX_SIM_ORDER}",
            g.order()
        )));
    }
    if g.order() < 2 {
        return Err(Error::Config("simulation needs at least two nodes".into()));
    }
    let nodes = g.order() as usize;
    let n_dim = g.dim();
    let ports = 2 * n_dim;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let traffic = TrafficMap::new(config.pattern, &g, &mut rng)?;

    // Minimal records from vertex 0 to every vertex; by vertex transitivity a
    // packet from s to d uses the records of d - s.
    let router = GenericRouter::new(&g)?;
    let zero = IntVector::zeros(n_dim);
    let records: Vec<Vec<RoutingRecord>> =
        g.labels().map(|v| router.minimal_records(&zero, &v)).collect::<Result<_>>()?;

    let queues_per_node = ports * config.vc_count + config.injectors;
    let neighbor = (0..nodes)
        .flat_map(|u| g.neighbor_indices(u))
        .map(|w| w as u32)
        .collect();
    let size = config.packet_size as u64;
    let mut net = Network {
        n_dim,
        ports,
        vcs: config.vc_count,
        injectors: config.injectors,
        capacity: config.queue_capacity,
        queues_per_node,
        neighbor,
        queues: vec![VecDeque::new(); nodes * queues_per_node],
        occupied: vec![0; nodes * queues_per_node],
        read_busy: vec![0; nodes * queues_per_node],
        link_busy: vec![0; nodes * ports],
        packets: Vec::new(),
        free: Vec::new(),
        wheel: (0..size + 2).map(|_| Vec::new()).collect(),
    };

    let inject_p = config.offered_load / size as f64;
    let start = config.warmup_cycles;
    let end = config.warmup_cycles + config.measure_cycles;
    let mut stats = SimStats {
        topology: config.topology.to_string(),
        pattern: config.pattern,
        offered_load: config.offered_load,
        accepted_load: 0.0,
        avg_latency: 0.0,
        delivered_packets: 0,
        generated_packets: 0,
        delivered_total: 0,
        in_network: 0,
        queued: 0,
        stalled_generations: 0,
        max_delivery_gap: 0,
        hop_mismatches: 0,
        latency_bound_violations: 0,
    };
    let mut latency_sum: u64 = 0;
    let mut last_delivery = start;
    let mut transit: Vec<Vec<(usize, u32, Target)>> = (0..ports).map(|_| Vec::new()).collect();
    let mut inject: Vec<Vec<(usize, u32, Target)>> = (0..ports).map(|_| Vec::new()).collect();

    for t in 0..end {
        let slot = (t % net.wheel.len() as u64) as usize;
        for e in std::mem::take(&mut net.wheel[slot]) {
            match e {
                Event::Release(q) => net.occupied[q] -= 1,
                Event::Deliver(pid) => {
                    let p = &net.packets[pid as usize];
                    stats.delivered_total += 1;
                    if p.hops != p.norm {
                        stats.hop_mismatches += 1;
                    }
                    let latency = t - p.birth;
                    if latency + 1 < p.hops as u64 + size {
                        stats.latency_bound_violations += 1;
                    }
                    if t >= start {
                        stats.delivered_packets += 1;
                        latency_sum += latency;
                        stats.max_delivery_gap = stats.max_delivery_gap.max(t - last_delivery);
                        last_delivery = t;
                    }
                    net.free.push(pid);
                }
            }
        }

        if inject_p > 0.0 {
            for node in 0..nodes {
                if !rng.gen_bool(inject_p) {
                    continue;
                }
                let q = (0..net.injectors)
                    .map(|k| net.injector_queue(node, k))
                    .min_by_key(|&q| net.occupied[q])
                    .unwrap();
                if net.occupied[q] >= net.capacity {
                    stats.stalled_generations += 1;
                    continue;
                }
                let dst = traffic.destination(node, &mut rng);
                let diff = g.label(dst).checked_sub(&g.label(node))?;
                let options = &records[g.index_unchecked(&g.reduce(&diff)?)];
                let record = &options[rng.gen_range(0..options.len())];
                let mut remaining = [0i32; MAX_DIM];
                for (i, &r) in record.vector().iter().enumerate() {
                    remaining[i] = r as i32;
                }
                let pid = net.alloc(Packet {
                    dst: dst as u32,
                    remaining,
                    birth: t,
                    hops: 0,
                    norm: record.norm() as u32,
                    in_port: NONE,
                    vc: 0,
                    ready: t,
                });
                net.queues[q].push_back(pid);
                net.occupied[q] += 1;
                stats.generated_packets += 1;
            }
        }

        for node in 0..nodes {
            for c in transit.iter_mut().chain(inject.iter_mut()) {
                c.clear();
            }
            let base = node * net.queues_per_node;
            for q in base..base + net.queues_per_node {
                if net.read_busy[q] > t {
                    continue;
                }
                let Some(&pid) = net.queues[q].front() else { continue };
                let p = &net.packets[pid as usize];
                if p.ready > t {
                    continue;
                }
                let port = net.next_port(p).expect("packets in buffers still have hops left");
                if net.link_busy[node * ports + port] > t {
                    continue;
                }
                if let Some(target) = net.target(node, pid, port, &mut rng) {
                    let class = if p.in_port == NONE { &mut inject } else { &mut transit };
                    class[port].push((q, pid, target));
                }
            }
            for port in 0..ports {
                let pool = if transit[port].is_empty() { &mut inject[port] } else { &mut transit[port] };
                if pool.is_empty() {
                    continue;
                }
                let k = rng.gen_range(0..pool.len());
                let (q, pid, target) = pool.swap_remove(k);
                net.queues[q].pop_front();
                net.read_busy[q] = t + size;
                net.schedule(t + size, Event::Release(q));
                net.link_busy[node * ports + port] = t + size;
                let dim = port / 2;
                let p = &mut net.packets[pid as usize];
                p.remaining[dim] -= if port % 2 == 0 { 1 } else { -1 };
                p.hops += 1;
                match target {
                    Target::Sink => {
                        debug_assert_eq!(net.neighbor[node * ports + port], p.dst);
                        net.schedule(t + size, Event::Deliver(pid));
                    }
                    Target::Buffer(vc) => {
                        p.in_port = port as u8;
                        p.vc = vc;
                        p.ready = t + 1;
                        let next = net.neighbor[node * ports + port] as usize;
                        let dq = net.input_queue(next, port, vc as usize);
                        net.queues[dq].push_back(pid);
                        net.occupied[dq] += 1;
                    }
                }
            }
        }
    }
    stats.max_delivery_gap = stats.max_delivery_gap.max(end - last_delivery);

    for node in 0..nodes {
        for k in 0..net.injectors {
            stats.queued += net.queues[net.injector_queue(node, k)].len() as u64;
        }
        for q in 0..ports * net.vcs {
            stats.in_network += net.queues[node * net.queues_per_node + q].len() as u64;
        }
    }
    stats.in_network += net
        .wheel
        .iter()
        .flatten()
        .filter(|e| matches!(e, Event::Deliver(_)))
        .count() as u64;
    if stats.delivered_packets > 0 {
        stats.avg_latency = latency_sum as f64 / stats.delivered_packets as f64;
    }
    stats.accepted_load =
        (stats.delivered_packets * size) as f64 / (config.measure_cycles as f64 * nodes as f64);
    Ok(stats)
}

/// One averaged point of a load sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub topology: String,
    pub pattern: TrafficPattern,
    pub offered: f64,
    pub accepted: f64,
    pub avg_latency: f64,
    pub seed_count: usize,
}

/// Worker count for sweeps: `LATTICE_NET_THREADS` if set, otherwise the
/// available parallelism.
pub fn default_threads() -> usize {
    std::env::var("LATTICE_NET_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs `template` at every load with seeds `template.seed .. template.seed + seeds`
/// and averages each load over its seeds.
pub fn sweep(template: &SimConfig, loads: &[f64], seeds: usize, threads: usize) -> Result<Vec<SweepRow>> {
    if seeds == 0 {
        return Err(Error::Config("sweep needs at least one seed".into()));
    }
    let jobs: Vec<SimConfig> = loads
        .iter()
        .flat_map(|&load| {
            (0..seeds as u64).map(move |k| SimConfig {
                offered_load: load,
                seed: template.seed.wrapping_add(k),
                ..template.clone()
            })
        })
        .collect();
    for j in &jobs {
        j.validate()?;
    }
    let results = run_parallel(&jobs, threads.max(1))?;
    Ok(loads
        .iter()
        .zip(results.chunks(seeds))
        .map(|(&load, runs)| {
            let k = runs.len() as f64;
            SweepRow {
                topology: template.topology.to_string(),
                pattern: template.pattern,
                offered: load,
                accepted: runs.iter().map(|s| s.accepted_load).sum::<f64>() / k,
                avg_latency: runs.iter().map(|s| s.avg_latency).sum::<f64>() / k,
                seed_count: runs.len(),
            }
        })
        .collect())
}

/// Runs independent simulations on up to `threads` workers; results keep
/// the order of `jobs`.
pub fn run_parallel(jobs: &[SimConfig], threads: usize) -> Result<Vec<SimStats>> {
    let mut out: Vec<Option<Result<SimStats>>> = (0..jobs.len()).map(|_| None).collect();
    let workers = threads.max(1).min(jobs.len().max(1));
    let next = std::sync::atomic::AtomicUsize::new(0);
    let done = std::sync::Mutex::new(&mut out);
    thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= jobs.len() {
                    break;
                }
                let r = run_simulation(&jobs[i]);
                done.lock().unwrap()[i] = Some(r);
            });
        }
    });
    out.into_iter().map(|r| r.expect("every job ran")).collect()
}
