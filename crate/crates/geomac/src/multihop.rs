//! Slotted multi-hop relaying over a random node population.
//!
//! Nodes are a Poisson scatter of density `nu`. In every slot the MAC scheme
//! picks the transmitters: either independent ALOHA thinning or a virtual grid
//! re-posed at a random node and snapped onto nearby nodes. A tracked packet
//! moves at most one hop per slot, to the receiver with the largest forward
//! progress toward its destination.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::propagation::{gain, sir, ChannelModel, Fading};
use crate::reception::{grid_success_prob_fading, grid_success_prob_nofading};
use crate::spatial::{gen_grid, gen_poisson, grid_density, Extent, GridSpec, Point2, PointSet, SpatialIndex};
use crate::{Error, Result};

/// Fraction of unmatched virtual grid points above which a warning is logged.
const UNMATCHED_WARN: f64 = 0.1;

/// Candidate receivers whose reception probability is provably below this are skipped.
const FADING_CUTOFF: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Scheme {
    Aloha { lambda: f64 },
    Grid(GridSpec),
}

impl Scheme {
    /// Transmitter density of the scheme.
    pub fn density(&self) -> f64 {
        match self {
            Scheme::Aloha { lambda } => *lambda,
            Scheme::Grid(spec) => grid_density(spec),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Node density `nu`.
    pub node_density: f64,
    pub extent: Extent,
    pub scheme: Scheme,
    pub model: ChannelModel,
    /// Largest distance between a virtual grid point and the node it snaps to.
    pub snap_radius: f64,
    pub slots: usize,
    pub seed: u64,
    /// Straight-line source to destination distance of every tracked packet.
    pub packet_distance: f64,
    /// Draw a fresh grid rotation every slot (translation is always random).
    pub random_rotation: bool,
    /// Recompute the SIR of every no-fading hop from scratch.
    pub audit: bool,
}

impl SimConfig {
    /// Defaults: snap radius `d/10`, 10000 slots, seed 0, packet distance ten
    /// transmitter spacings, random rotation, audit on.
    pub fn new(node_density: f64, extent: Extent, scheme: Scheme, model: ChannelModel) -> Self {
        let snap_radius = match scheme {
            Scheme::Grid(spec) => spec.d / 10.0,
            Scheme::Aloha { .. } => 0.0,
        };
        SimConfig {
            node_density,
            extent,
            scheme,
            model,
            snap_radius,
            slots: 10_000,
            seed: 0,
            packet_distance: 10.0 / scheme.density().sqrt(),
            random_rotation: true,
            audit: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        let lambda = self.scheme.density();
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::invalid(format!("scheme density must be positive, got {lambda}")));
        }
        if !(self.node_density.is_finite() && self.node_density >= lambda) {
            return Err(Error::invalid(format!(
                "node density {} is below the scheme density {lambda}",
                self.node_density
            )));
        }
        if let Scheme::Grid(spec) = self.scheme {
            spec.validate()?;
            let spacing = spec.d * spec.k1.min(spec.k2).min(1.0);
            if !(self.snap_radius >= 0.0 && self.snap_radius < spacing / 4.0) {
                return Err(Error::invalid(format!(
                    "snap radius {} must lie in [0, {})",
                    self.snap_radius,
                    spacing / 4.0
                )));
            }
        }
        if self.slots == 0 {
            return Err(Error::invalid("slot budget must be positive"));
        }
        if !(self.packet_distance > 0.0 && self.packet_distance <= self.extent.half_width) {
            return Err(Error::invalid(format!(
                "packet distance {} must lie in (0, extent {}]",
                self.packet_distance, self.extent.half_width
            )));
        }
        Ok(())
    }
}

/// Forward progress of the hop `tx -> rx` toward `dest`.
pub fn progress(tx: Point2, rx: Point2, dest: Point2) -> Result<f64> {
    let u = dest - tx;
    let n = u.norm();
    if n == 0.0 {
        return Err(Error::invalid("progress is undefined when the transmitter is the destination"));
    }
    Ok((rx - tx).dot(u) / n)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PacketRecord {
    pub id: usize,
    pub source: Point2,
    pub destination: Point2,
    /// Receivers of the successive hops; the last one is the destination once delivered.
    pub hops: Vec<Point2>,
    pub delivered: bool,
    pub progress_per_hop: Vec<f64>,
    pub slots_to_delivery: Option<usize>,
    /// Node currently holding the packet.
    pub holder: usize,
    pub destination_node: usize,
}

impl PacketRecord {
    pub fn new(id: usize, source_node: usize, destination_node: usize, nodes: &[Point2]) -> Self {
        PacketRecord {
            id,
            source: nodes[source_node],
            destination: nodes[destination_node],
            hops: Vec::new(),
            delivered: false,
            progress_per_hop: Vec::new(),
            slots_to_delivery: None,
            holder: source_node,
            destination_node,
        }
    }
}

/// One line of the hop log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HopEntry {
    pub packet_id: usize,
    pub slot: usize,
    pub hop: usize,
    pub from_x: f64,
    pub from_y: f64,
    pub to_x: f64,
    pub to_y: f64,
    pub progress: f64,
}

/// Transmitters scheduled in one slot.
#[derive(Clone, Debug)]
pub struct SlotSchedule {
    pub slot: usize,
    /// Node indices, parallel to `set.points()`.
    pub nodes: Vec<usize>,
    pub set: PointSet,
    /// Virtual grid points with no node inside the snap radius (0 for ALOHA).
    pub unmatched: usize,
    pub virtual_points: usize,
    position: HashMap<usize, usize>,
}

impl SlotSchedule {
    /// Index in `set` of the transmitting node, if it is scheduled.
    pub fn transmitter_of(&self, node: usize) -> Option<usize> {
        self.position.get(&node).copied()
    }
}

/// Node population plus the lookup structures shared by all slots.
#[derive(Clone, Debug)]
pub struct Network {
    cfg: SimConfig,
    nodes: PointSet,
    index: SpatialIndex,
}

fn mix(seed: u64, a: u64, b: u64) -> u64 {
    // splitmix64 finalizer over the combined words
    let mut z = seed ^ a.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ b.wrapping_mul(0xc2b2_ae3d_27d4_eb4f);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn slot_rng(seed: u64, slot: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(slot as u64 + 1);
    rng
}

impl Network {
    pub fn new(cfg: SimConfig) -> Result<Self> {
        cfg.validate()?;
        let nodes = gen_poisson(cfg.node_density, cfg.extent, cfg.seed)?;
        if nodes.len() < 2 {
            return Err(Error::invalid("node population has fewer than two nodes"));
        }
        let index = SpatialIndex::new(nodes.points(), 2.0 / cfg.node_density.sqrt());
        Ok(Network { cfg, nodes, index })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn nodes(&self) -> &PointSet {
        &self.nodes
    }

    /// Transmitter set of `slot`. Deterministic in `(seed, slot)`.
    pub fn select_transmitters(&self, slot: usize) -> Result<SlotSchedule> {
        let mut rng = slot_rng(self.cfg.seed, slot);
        let pts = self.nodes.points();
        let (nodes, unmatched, virtual_points) = match self.cfg.scheme {
            Scheme::Aloha { lambda } => {
                let q = lambda / self.cfg.node_density;
                let chosen: Vec<usize> = (0..pts.len()).filter(|_| rng.random::<f64>() < q).collect();
                (chosen, 0, 0)
            }
            Scheme::Grid(spec) => {
                let anchor = pts[rng.random_range(0..pts.len())];
                let rotation = if self.cfg.random_rotation {
                    rng.random_range(0.0..2.0 * PI)
                } else {
                    spec.rotation
                };
                let virt = gen_grid(&spec.with_pose(rotation, anchor), self.cfg.extent)?;
                let mut chosen = Vec::with_capacity(virt.len());
                let mut unmatched = 0;
                for v in virt.points() {
                    match self.index.nearest_within(*v, self.cfg.snap_radius) {
                        Some(k) => chosen.push(k),
                        None => unmatched += 1,
                    }
                }
                chosen.sort_unstable();
                chosen.dedup();
                let frac = unmatched as f64 / virt.len() as f64;
                if frac > UNMATCHED_WARN {
                    log::warn!(
                        "slot {slot}: {unmatched} of {} virtual grid points found no node within {}",
                        virt.len(),
                        self.cfg.snap_radius
                    );
                }
                (chosen, unmatched, virt.len())
            }
        };
        let position = nodes.iter().enumerate().map(|(k, &n)| (n, k)).collect();
        let set = PointSet::from_points(
            nodes.iter().map(|&n| pts[n]).collect(),
            self.cfg.scheme.density(),
            self.cfg.extent.half_width,
        )?;
        Ok(SlotSchedule { slot, nodes, set, unmatched, virtual_points, position })
    }

    /// Radius outside which no node can receive from transmitter `i`.
    fn candidate_radius(&self, i: usize, sched: &SlotSchedule) -> f64 {
        let all = 2.0 * 2f64.sqrt() * self.cfg.extent.half_width;
        let tx = sched.set.points();
        let zi = tx[i];
        let mut dists: Vec<f64> = tx
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, p)| p.dist(zi))
            .collect();
        if dists.is_empty() {
            return all;
        }
        let m = &self.cfg.model;
        match m.fading {
            Fading::None => {
                // the reception area lies inside the Apollonius disc of the nearest interferer
                let c = m.beta.powf(1.0 / m.alpha);
                let dnn = dists.iter().copied().fold(f64::INFINITY, f64::min);
                if c > 1.0 {
                    (dnn / (c - 1.0)).min(all)
                } else {
                    all
                }
            }
            _ => {
                // |rx - z_j| <= r + D_j gives a bound on every factor of the product
                dists.sort_by(|a, b| a.total_cmp(b));
                dists.truncate(32);
                let bound = |r: f64| {
                    dists
                        .iter()
                        .map(|&dj| -(m.beta * (r / (r + dj)).powf(m.alpha)).ln_1p())
                        .sum::<f64>()
                        .exp()
                };
                let mut r = dists[0];
                while r < all && bound(r) >= FADING_CUTOFF {
                    r *= 1.5;
                }
                r.min(all)
            }
        }
    }

    /// Reception outcome for one candidate node.
    fn receives(&self, i: usize, rx: Point2, sched: &SlotSchedule, rng: &mut ChaCha8Rng) -> Result<bool> {
        let m = &self.cfg.model;
        match m.fading {
            Fading::None => Ok(grid_success_prob_nofading(i, rx, &sched.set, m)? == 1.0),
            Fading::Exponential => {
                let p = grid_success_prob_fading(i, rx, &sched.set, m)?;
                Ok(rng.random::<f64>() < p)
            }
            Fading::LogUniform { .. } => {
                let zi = sched.set.points()[i];
                let s = gain(zi, rx, m.alpha)? * crate::propagation::sample_fading(m.fading, rng);
                let mut w = 0.0;
                for (j, p) in sched.set.points().iter().enumerate() {
                    if j != i {
                        w += gain(*p, rx, m.alpha)? * crate::propagation::sample_fading(m.fading, rng);
                    }
                }
                Ok(s >= m.beta * w)
            }
        }
    }

    /// Advance `packet` by at most one hop in the slot described by `sched`.
    ///
    /// Returns the hop taken, if any. A holder that is not scheduled, or that
    /// reaches no receiver with positive progress, keeps the packet.
    pub fn relay_step(&self, packet: &mut PacketRecord, sched: &SlotSchedule) -> Result<Option<HopEntry>> {
        if packet.delivered {
            return Ok(None);
        }
        let Some(i) = sched.transmitter_of(packet.holder) else {
            return Ok(None);
        };
        let pts = self.nodes.points();
        let tx = pts[packet.holder];
        let dest = packet.destination;
        let r = self.candidate_radius(i, sched);
        let mut cand = Vec::new();
        self.index.within(tx, r, &mut cand);
        cand.sort_unstable();
        let mut rng = ChaCha8Rng::seed_from_u64(mix(self.cfg.seed, sched.slot as u64, packet.id as u64));

        let mut best: Option<(usize, f64, f64)> = None;
        let mut reached_dest = false;
        for &k in &cand {
            if k == packet.holder || sched.transmitter_of(k).is_some() {
                continue;
            }
            let rx = pts[k];
            match self.receives(i, rx, sched, &mut rng) {
                Ok(true) => {}
                Ok(false) | Err(Error::Singularity) => continue,
                Err(e) => return Err(e),
            }
            if k == packet.destination_node {
                reached_dest = true;
                continue;
            }
            let prog = progress(tx, rx, dest)?;
            let to_dest = rx.dist(dest);
            let better = match best {
                None => true,
                Some((_, bp, bd)) => prog > bp || (prog == bp && to_dest < bd),
            };
            if better {
                best = Some((k, prog, to_dest));
            }
        }

        let next = if reached_dest {
            packet.destination_node
        } else {
            match best {
                Some((k, prog, _)) if prog > 0.0 => k,
                _ => return Ok(None),
            }
        };
        let to = pts[next];
        let prog = progress(tx, to, dest)?;
        packet.hops.push(to);
        packet.progress_per_hop.push(prog);
        packet.holder = next;
        if next == packet.destination_node {
            packet.delivered = true;
            packet.slots_to_delivery = Some(sched.slot + 1);
        }
        Ok(Some(HopEntry {
            packet_id: packet.id,
            slot: sched.slot,
            hop: packet.hops.len(),
            from_x: tx.x,
            from_y: tx.y,
            to_x: to.x,
            to_y: to.y,
            progress: prog,
        }))
    }

    /// Source/destination node pairs at distance close to the packet distance,
    /// centred in the inner half of the extent.
    pub fn draw_pairs(&self, n_packets: usize) -> Result<Vec<(usize, usize)>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(u64::MAX);
        let e = self.cfg.extent.half_width;
        let half = 0.5 * self.cfg.packet_distance;
        let reach = 4.0 / self.cfg.node_density.sqrt();
        let mut pairs = Vec::with_capacity(n_packets);
        let mut attempts = 0usize;
        while pairs.len() < n_packets {
            attempts += 1;
            if attempts > 1000 * (n_packets + 1) {
                return Err(Error::invalid("could not place source/destination pairs in the extent"));
            }
            let mid = Point2::new(rng.random_range(-0.25 * e..=0.25 * e), rng.random_range(-0.25 * e..=0.25 * e));
            let u = Point2::polar(1.0, rng.random_range(0.0..2.0 * PI));
            let s = self.index.nearest_within(mid - u * half, reach);
            let d = self.index.nearest_within(mid + u * half, reach);
            if let (Some(s), Some(d)) = (s, d) {
                if s != d {
                    pairs.push((s, d));
                }
            }
        }
        Ok(pairs)
    }

    /// Run all slots for the given packets.
    pub fn run(&self, mut packets: Vec<PacketRecord>) -> Result<SimOutcome> {
        let mut log = Vec::new();
        let mut unmatched = 0usize;
        let mut virtual_points = 0usize;
        let mut audit_checked = 0usize;
        let mut audit_violations = 0usize;
        let mut slots_run = 0;
        for slot in 0..self.cfg.slots {
            if packets.iter().all(|p| p.delivered) {
                break;
            }
            slots_run = slot + 1;
            let sched = self.select_transmitters(slot)?;
            unmatched += sched.unmatched;
            virtual_points += sched.virtual_points;
            if sched.set.len() == 0 {
                continue;
            }
            let hops: Vec<Option<HopEntry>> = packets
                .par_iter_mut()
                .map(|p| self.relay_step(p, &sched))
                .collect::<Result<_>>()?;
            for h in hops.into_iter().flatten() {
                if self.cfg.audit && self.cfg.model.fading == Fading::None {
                    audit_checked += 1;
                    if !self.audit_hop(&h, &sched)? {
                        audit_violations += 1;
                    }
                }
                log.push(h);
            }
        }
        let summary = SimSummary::new(&packets, &log, slots_run, unmatched, virtual_points, audit_checked, audit_violations);
        Ok(SimOutcome { summary, packets, log })
    }

    fn audit_hop(&self, h: &HopEntry, sched: &SlotSchedule) -> Result<bool> {
        let from = Point2::new(h.from_x, h.from_y);
        let i = sched
            .set
            .points()
            .iter()
            .position(|p| *p == from)
            .ok_or_else(|| Error::invalid("hop sender is not a scheduled transmitter"))?;
        let s = match sir(i, Point2::new(h.to_x, h.to_y), &sched.set, self.cfg.model.alpha) {
            Ok(s) => s,
            Err(Error::InfiniteSir) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        Ok(s >= self.cfg.model.beta * (1.0 - 1e-12))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub packets: usize,
    pub delivered: usize,
    pub delivery_fraction: f64,
    /// Mean hop count over delivered packets.
    pub mean_hops: Option<f64>,
    /// Mean forward progress over all hops taken.
    pub mean_progress: Option<f64>,
    pub mean_slots_to_delivery: Option<f64>,
    /// Sorted slots-to-delivery of the delivered packets.
    pub slots_to_delivery: Vec<usize>,
    pub slots_run: usize,
    pub unmatched_fraction: f64,
    pub audit_checked: usize,
    pub audit_violations: usize,
}

impl SimSummary {
    fn new(
        packets: &[PacketRecord],
        log: &[HopEntry],
        slots_run: usize,
        unmatched: usize,
        virtual_points: usize,
        audit_checked: usize,
        audit_violations: usize,
    ) -> Self {
        let delivered: Vec<&PacketRecord> = packets.iter().filter(|p| p.delivered).collect();
        let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
        let hops: Vec<f64> = delivered.iter().map(|p| p.hops.len() as f64).collect();
        let prog: Vec<f64> = log.iter().map(|h| h.progress).collect();
        let mut slots: Vec<usize> = delivered.iter().filter_map(|p| p.slots_to_delivery).collect();
        slots.sort_unstable();
        let slots_f: Vec<f64> = slots.iter().map(|&s| s as f64).collect();
        SimSummary {
            packets: packets.len(),
            delivered: delivered.len(),
            delivery_fraction: if packets.is_empty() { 0.0 } else { delivered.len() as f64 / packets.len() as f64 },
            mean_hops: mean(&hops),
            mean_progress: mean(&prog),
            mean_slots_to_delivery: mean(&slots_f),
            slots_to_delivery: slots,
            slots_run,
            unmatched_fraction: if virtual_points == 0 { 0.0 } else { unmatched as f64 / virtual_points as f64 },
            audit_checked,
            audit_violations,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimOutcome {
    pub summary: SimSummary,
    pub packets: Vec<PacketRecord>,
    pub log: Vec<HopEntry>,
}

/// Generate the population, place `n_packets` pairs and run the slot budget.
pub fn run_simulation(cfg: &SimConfig, n_packets: usize) -> Result<SimOutcome> {
    let net = Network::new(*cfg)?;
    let packets = net
        .draw_pairs(n_packets)?
        .into_iter()
        .enumerate()
        .map(|(id, (s, d))| PacketRecord::new(id, s, d, net.nodes().points()))
        .collect();
    net.run(packets)
}

/// Hop log as CSV `packet_id,slot,hop,from_x,from_y,to_x,to_y,progress`.
pub fn write_hop_log<W: Write>(log: &[HopEntry], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for h in log {
        w.serialize(h)?;
    }
    if log.is_empty() {
        w.write_record(["packet_id", "slot", "hop", "from_x", "from_y", "to_x", "to_y", "progress"])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_hop_log_csv(log: &[HopEntry], path: impl AsRef<Path>) -> Result<()> {
    write_hop_log(log, std::fs::File::create(path)?)
}

pub fn write_summary_json(summary: &SimSummary, path: impl AsRef<Path>) -> Result<()> {
    let f = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(f, summary)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn progress_signs() {
        let o = Point2::ORIGIN;
        let d = Point2::new(10.0, 0.0);
        assert_eq!(progress(o, Point2::new(3.0, 0.0), d).unwrap(), 3.0);
        assert_eq!(progress(o, Point2::new(0.0, 2.0), d).unwrap(), 0.0);
        assert!(progress(o, Point2::new(-1.0, 0.5), d).unwrap() < 0.0);
        assert!(progress(d, o, d).is_err());
    }

    #[test]
    fn mix_spreads_inputs() {
        assert_ne!(mix(1, 2, 3), mix(1, 3, 2));
        assert_ne!(mix(0, 0, 1), mix(0, 1, 0));
    }
}
