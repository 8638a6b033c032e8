//! Minimum-time swarm routing under battery limits.
//!
//! The search runs A* over labels `(node, per-drone battery, elapsed time)`.
//! From a label the swarm may fly any incident segment, provided every drone
//! still holds its reserve on arrival, or recharge all drones to full when the
//! rooftop has at least one pad. Formations are not searched: flight speed
//! does not depend on the formation, so each wind interval simply uses the
//! pattern with the lowest worst-case drone power.
//!
//! A label is pruned when another label at the same node has at least as much
//! battery for every drone and no later clock. Expanded labels are also
//! indexed by their battery quantized to `quantization` levels per drone; a
//! popped label is skipped when an expanded label in its bucket dominates it.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{FrontierSummary, NetworkError, PlanError};
use crate::formation::{best_formation, swarm_power, EnergyModelConfig, FormationPattern, SwarmSpec, WindSchedule};
use crate::geometry::Point2;
use crate::network::SkywayNetwork;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerOptions {
    /// Charging power per pad, in watts.
    pub charge_rate: f64,
    /// Battery levels per drone used to bucket expanded labels.
    pub quantization: usize,
}

impl Default for PlannerOptions {
    fn default() -> Self {
        Self {
            charge_rate: 100.0,
            quantization: 20,
        }
    }
}

/// Drones charging together on the pads of one rooftop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "(Vec<String>, f64, f64)", into = "(Vec<String>, f64, f64)")]
pub struct RechargeBatch {
    pub drones: Vec<String>,
    pub start: f64,
    pub end: f64,
}

impl From<(Vec<String>, f64, f64)> for RechargeBatch {
    fn from((drones, start, end): (Vec<String>, f64, f64)) -> Self {
        Self { drones, start, end }
    }
}

impl From<RechargeBatch> for (Vec<String>, f64, f64) {
    fn from(b: RechargeBatch) -> Self {
        (b.drones, b.start, b.end)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RechargeSchedule {
    pub batches: Vec<RechargeBatch>,
    pub total_time: f64,
}

impl RechargeSchedule {
    fn shifted(mut self, t0: f64) -> Self {
        for b in &mut self.batches {
            b.start += t0;
            b.end += t0;
        }
        self
    }
}

/// Charges drones to full in batches of at most `pads`, largest deficit first.
///
/// Each batch lasts until its largest deficit is refilled at `charge_rate`;
/// the next batch starts when it ends. Drones with no deficit are left out.
/// Times are relative to the start of charging.
pub fn recharge_schedule(
    swarm: &SwarmSpec,
    deficits: &[f64],
    pads: u32,
    charge_rate: f64,
) -> Result<RechargeSchedule, PlanError> {
    if pads == 0 {
        return Err(PlanError::InfeasibleAction("recharge at a node without pads".into()));
    }
    if !(charge_rate.is_finite() && charge_rate > 0.0) {
        return Err(PlanError::InvalidInput(format!(
            "charge rate must be positive, got {charge_rate}"
        )));
    }
    if deficits.len() != swarm.len() {
        return Err(PlanError::InvalidInput(format!(
            "{} deficits for {} drones",
            deficits.len(),
            swarm.len()
        )));
    }
    let mut order: Vec<usize> = (0..deficits.len()).filter(|&i| deficits[i] > 0.0).collect();
    order.sort_by(|&a, &b| deficits[b].total_cmp(&deficits[a]));
    let mut t = 0.0;
    let mut batches = Vec::new();
    for chunk in order.chunks(pads as usize) {
        let duration = deficits[chunk[0]] / charge_rate;
        batches.push(RechargeBatch {
            drones: chunk.iter().map(|&i| swarm.drones[i].id.clone()).collect(),
            start: t,
            end: t + duration,
        });
        t += duration;
    }
    Ok(RechargeSchedule { batches, total_time: t })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteLeg {
    pub from: String,
    pub to: String,
    pub depart: f64,
    pub arrive: f64,
    /// `(start time, pattern)`, one entry per change of formation.
    #[serde(rename = "formations")]
    pub formation_plan: Vec<(f64, FormationPattern)>,
    /// Per-drone energy for the leg, in joules.
    pub energy: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum StopKind {
    Flyover,
    Recharge { batches: Vec<RechargeBatch> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutePlan {
    pub legs: Vec<RouteLeg>,
    pub stops: BTreeMap<String, StopKind>,
    pub total_time: f64,
}

impl RoutePlan {
    pub fn empty() -> Self {
        Self {
            legs: Vec::new(),
            stops: BTreeMap::new(),
            total_time: 0.0,
        }
    }

    /// Node sequence from source to destination.
    pub fn path(&self) -> Vec<&str> {
        let mut out: Vec<&str> = self.legs.iter().map(|l| l.from.as_str()).collect();
        if let Some(last) = self.legs.last() {
            out.push(&last.to);
        }
        out
    }

    pub fn recharge_stops(&self) -> impl Iterator<Item = (&str, &[RechargeBatch])> {
        self.stops.iter().filter_map(|(id, s)| match s {
            StopKind::Recharge { batches } => Some((id.as_str(), batches.as_slice())),
            StopKind::Flyover => None,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Straight-line flight time from `node` to `dst`.
pub fn heuristic(node: &str, dst: &str, net: &SkywayNetwork, cruise_speed: f64) -> Result<f64, NetworkError> {
    Ok(net.node(node)?.distance(net.node(dst)?) / cruise_speed)
}

/// Unit vector of the planar track from `from` to `to`.
pub fn leg_heading(net: &SkywayNetwork, from: &str, to: &str) -> Result<Point2, NetworkError> {
    let a = net.node(from)?.position;
    let b = net.node(to)?.position;
    let d = b - a;
    Ok(d.scale(1.0 / d.norm()))
}

/// Flies segment `from`→`to` departing at `depart`, switching to the best
/// formation at every wind change.
pub fn fly_leg(
    net: &SkywayNetwork,
    swarm: &SwarmSpec,
    wind: &WindSchedule,
    cfg: &EnergyModelConfig,
    from: &str,
    to: &str,
    depart: f64,
) -> Result<RouteLeg, PlanError> {
    let length = net
        .edge_length(from, to)
        .ok_or_else(|| PlanError::InvalidInput(format!("no segment between `{from}` and `{to}`")))?;
    let heading = leg_heading(net, from, to)?;
    let arrive = depart + length / swarm.cruise_speed;
    let mut energy = vec![0.0; swarm.len()];
    let mut formation_plan: Vec<(f64, FormationPattern)> = Vec::new();
    for (t0, t1, w) in wind.pieces(depart, arrive) {
        let pattern = best_formation(swarm, w, heading, cfg)?;
        if formation_plan.last().is_none_or(|&(_, p)| p != pattern) {
            formation_plan.push((t0, pattern));
        }
        for (e, p) in energy.iter_mut().zip(swarm_power(swarm, pattern, w, heading, cfg)?) {
            *e += p * (t1 - t0);
        }
    }
    Ok(RouteLeg {
        from: from.to_string(),
        to: to.to_string(),
        depart,
        arrive,
        formation_plan,
        energy,
    })
}

enum Action {
    Start,
    Fly(RouteLeg),
    Recharge(RechargeSchedule),
}

struct Label {
    node: usize,
    battery: Vec<f64>,
    elapsed: f64,
    parent: Option<usize>,
    action: Action,
    alive: bool,
}

fn dominates(a: &Label, b: &Label) -> bool {
    a.elapsed <= b.elapsed && a.battery.iter().zip(&b.battery).all(|(x, y)| x >= y)
}

struct Entry {
    f: f64,
    h: f64,
    node: usize,
    seq: usize,
    label: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // BinaryHeap is a max-heap; invert so the smallest key pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.h.total_cmp(&self.h))
            .then_with(|| other.node.cmp(&self.node))
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

struct Search<'a> {
    net: &'a SkywayNetwork,
    swarm: &'a SwarmSpec,
    wind: &'a WindSchedule,
    cfg: &'a EnergyModelConfig,
    opts: PlannerOptions,
    ids: Vec<String>,
    index: HashMap<String, usize>,
    h: Vec<f64>,
    capacity: Vec<f64>,
    reserve: Vec<f64>,
    labels: Vec<Label>,
    retained: Vec<Vec<usize>>,
    open: BinaryHeap<Entry>,
    seq: usize,
    generated: usize,
    pruned: usize,
}

impl Search<'_> {
    /// Adds `label` unless dominated; returns whether it was kept.
    fn push(&mut self, label: Label) -> bool {
        self.generated += 1;
        let node = label.node;
        if self.retained[node].iter().any(|&i| dominates(&self.labels[i], &label)) {
            self.pruned += 1;
            return false;
        }
        let idx = self.labels.len();
        let labels = &mut self.labels;
        self.retained[node].retain(|&i| {
            if dominates(&label, &labels[i]) {
                labels[i].alive = false;
                false
            } else {
                true
            }
        });
        let h = self.h[node];
        let f = label.elapsed + h;
        self.labels.push(label);
        self.retained[node].push(idx);
        self.open.push(Entry {
            f,
            h,
            node,
            seq: self.seq,
            label: idx,
        });
        self.seq += 1;
        true
    }

    fn bucket(&self, battery: &[f64]) -> Vec<u32> {
        let q = self.opts.quantization.max(1);
        battery
            .iter()
            .zip(&self.capacity)
            .map(|(b, c)| (((b / c) * q as f64).floor() as usize).min(q - 1) as u32)
            .collect()
    }

    fn expand(&mut self, idx: usize) -> Result<(), PlanError> {
        let node = self.labels[idx].node;
        let id = self.ids[node].clone();
        let elapsed = self.labels[idx].elapsed;
        let net = self.net;
        for (nbr, _) in net.neighbors(&id)? {
            let leg = fly_leg(net, self.swarm, self.wind, self.cfg, &id, nbr, elapsed)?;
            let battery: Vec<f64> = self.labels[idx]
                .battery
                .iter()
                .zip(&leg.energy)
                .map(|(b, e)| b - e)
                .collect();
            if battery.iter().zip(&self.reserve).any(|(b, r)| b < r) {
                continue;
            }
            let arrive = leg.arrive;
            self.push(Label {
                node: self.index[nbr.as_str()],
                battery,
                elapsed: arrive,
                parent: Some(idx),
                action: Action::Fly(leg),
                alive: true,
            });
        }
        let pads = net.node(&id)?.recharge_pads;
        let deficits: Vec<f64> = self
            .capacity
            .iter()
            .zip(&self.labels[idx].battery)
            .map(|(c, b)| c - b)
            .collect();
        if pads >= 1 && deficits.iter().any(|&d| d > 0.0) {
            let schedule = recharge_schedule(self.swarm, &deficits, pads, self.opts.charge_rate)?.shifted(elapsed);
            self.push(Label {
                node,
                battery: self.capacity.clone(),
                elapsed: elapsed + schedule.total_time,
                parent: Some(idx),
                action: Action::Recharge(schedule),
                alive: true,
            });
        }
        Ok(())
    }

    fn reconstruct(&self, goal: usize) -> RoutePlan {
        let mut chain = Vec::new();
        let mut cur = Some(goal);
        while let Some(i) = cur {
            chain.push(i);
            cur = self.labels[i].parent;
        }
        chain.reverse();
        let mut plan = RoutePlan::empty();
        for &i in &chain {
            match &self.labels[i].action {
                Action::Start => {}
                Action::Fly(leg) => {
                    plan.legs.push(leg.clone());
                }
                Action::Recharge(schedule) => {
                    let node = self.ids[self.labels[i].node].clone();
                    match plan.stops.entry(node).or_insert(StopKind::Flyover) {
                        s @ StopKind::Flyover => {
                            *s = StopKind::Recharge {
                                batches: schedule.batches.clone(),
                            }
                        }
                        StopKind::Recharge { batches } => batches.extend(schedule.batches.iter().cloned()),
                    }
                }
            }
        }
        let n = plan.legs.len();
        for leg in plan.legs.iter().take(n.saturating_sub(1)) {
            plan.stops.entry(leg.to.clone()).or_insert(StopKind::Flyover);
        }
        plan.total_time = self.labels[goal].elapsed;
        plan
    }

    fn summary(&self, dst: usize, expanded: usize) -> FrontierSummary {
        let reached: Vec<usize> = (0..self.ids.len()).filter(|&n| !self.retained[n].is_empty()).collect();
        let closest = reached
            .iter()
            .min_by(|&&a, &&b| self.h[a].total_cmp(&self.h[b]).then(a.cmp(&b)))
            .map(|&n| (self.ids[n].clone(), self.h[n]));
        let _ = dst;
        FrontierSummary {
            expanded,
            generated: self.generated,
            pruned: self.pruned,
            reached: reached.iter().map(|&n| self.ids[n].clone()).collect(),
            closest,
        }
    }
}

/// Fastest plan from `src` to `dst` for a swarm that departs fully charged at t = 0.
pub fn plan_route(
    net: &SkywayNetwork,
    swarm: &SwarmSpec,
    wind: &WindSchedule,
    cfg: &EnergyModelConfig,
    opts: PlannerOptions,
    src: &str,
    dst: &str,
) -> Result<RoutePlan, PlanError> {
    swarm.validate()?;
    cfg.validate()?;
    if !(opts.charge_rate.is_finite() && opts.charge_rate > 0.0) {
        return Err(PlanError::InvalidInput(format!(
            "charge rate must be positive, got {}",
            opts.charge_rate
        )));
    }
    if opts.quantization == 0 {
        return Err(PlanError::InvalidInput("quantization must be at least 1".into()));
    }
    net.node(src)?;
    net.node(dst)?;
    if src == dst {
        return Ok(RoutePlan::empty());
    }

    let ids: Vec<String> = net.nodes().map(|n| n.id.clone()).collect();
    let index: HashMap<String, usize> = ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
    let h = ids
        .iter()
        .map(|id| heuristic(id, dst, net, swarm.cruise_speed))
        .collect::<Result<Vec<_>, _>>()?;
    let capacity = swarm.capacities();
    let reserve = swarm.drones.iter().map(|d| d.reserve()).collect();
    let mut search = Search {
        net,
        swarm,
        wind,
        cfg,
        opts,
        retained: vec![Vec::new(); ids.len()],
        ids,
        index,
        h,
        capacity: capacity.clone(),
        reserve,
        labels: Vec::new(),
        open: BinaryHeap::new(),
        seq: 0,
        generated: 0,
        pruned: 0,
    };
    let src_idx = search.index[src];
    let dst_idx = search.index[dst];
    search.push(Label {
        node: src_idx,
        battery: capacity,
        elapsed: 0.0,
        parent: None,
        action: Action::Start,
        alive: true,
    });

    let mut closed: HashMap<(usize, Vec<u32>), Vec<usize>> = HashMap::new();
    let mut expanded = 0;
    while let Some(entry) = search.open.pop() {
        let idx = entry.label;
        if !search.labels[idx].alive {
            continue;
        }
        if entry.node == dst_idx {
            return Ok(search.reconstruct(idx));
        }
        let key = (entry.node, search.bucket(&search.labels[idx].battery));
        let bucket = closed.entry(key).or_default();
        if bucket
            .iter()
            .any(|&j| dominates(&search.labels[j], &search.labels[idx]))
        {
            continue;
        }
        bucket.push(idx);
        expanded += 1;
        search.expand(idx)?;
    }
    Err(PlanError::NoRoute {
        src: src.to_string(),
        dst: dst.to_string(),
        summary: Box::new(search.summary(dst_idx, expanded)),
    })
}
