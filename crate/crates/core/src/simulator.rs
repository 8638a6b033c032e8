//! Fixed-step replay of a route plan.
//!
//! The leader follows each leg's straight rooftop-to-rooftop line at cruise
//! speed. Followers sit at their rotated slot offsets; when the plan switches
//! pattern they slide linearly to the new slots at `transition_speed` while
//! the leader keeps moving. Batteries drain at the modeled power of the
//! pattern the plan selected (the target pattern during a transition) and
//! refill on the pads during recharge batches.
//!
//! Integration steps are split at every wind change, pattern change and leg
//! boundary, so power is constant over each step.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::SimError;
use crate::formation::{
    slot_offsets, swarm_power, EnergyModelConfig, FormationPattern, SlotOffset, SwarmSpec, WindSchedule,
};
use crate::geometry::Point2;
use crate::network::SkywayNetwork;
use crate::planner::{leg_heading, RechargeBatch, RouteLeg, RoutePlan, StopKind};

const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    /// Sampling and integration step, in seconds.
    pub dt: f64,
    /// Speed at which drones move between slots during a formation change, m/s.
    pub transition_speed: f64,
    /// Charging power per pad, in watts.
    pub charge_rate: f64,
    /// Battery fraction below which a warning is raised (once per drone).
    pub warning_fraction: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            dt: 0.1,
            transition_speed: 1.0,
            charge_rate: 100.0,
            warning_fraction: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "phase", content = "progress")]
pub enum Phase {
    Cruise,
    Transition(f64),
    Recharging,
    Done,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwarmState {
    pub time: f64,
    pub leader_position: [f64; 3],
    pub heading: Point2,
    pub pattern: FormationPattern,
    pub drone_positions: Vec<[f64; 3]>,
    pub batteries: Vec<f64>,
    pub phase: Phase,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum EventKind {
    Depart {
        from: String,
        to: String,
        pattern: FormationPattern,
    },
    Arrive {
        node: String,
    },
    FormationChangeStart {
        from_pattern: FormationPattern,
        to_pattern: FormationPattern,
        duration: f64,
    },
    FormationChangeEnd {
        pattern: FormationPattern,
    },
    RechargeStart {
        node: String,
        drones: Vec<String>,
    },
    RechargeEnd {
        node: String,
        drones: Vec<String>,
    },
    BatteryWarning {
        drone: String,
        fraction: f64,
    },
    Done,
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::Depart { .. } => "Depart",
            EventKind::Arrive { .. } => "Arrive",
            EventKind::FormationChangeStart { .. } => "FormationChangeStart",
            EventKind::FormationChangeEnd { .. } => "FormationChangeEnd",
            EventKind::RechargeStart { .. } => "RechargeStart",
            EventKind::RechargeEnd { .. } => "RechargeEnd",
            EventKind::BatteryWarning { .. } => "BatteryWarning",
            EventKind::Done => "Done",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimEvent {
    pub t: f64,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub events: Vec<SimEvent>,
    pub samples: Vec<SwarmState>,
    /// Flight energy drawn by each drone over the whole run, in joules.
    pub energy_used: Vec<f64>,
    pub final_battery: Vec<f64>,
}

/// One JSON object per line, in trace order.
pub fn emit_events(trace: &SimTrace) -> String {
    let mut out = String::new();
    for e in &trace.events {
        out.push_str(&serde_json::to_string(e).expect("event serializes"));
        out.push('\n');
    }
    out
}

/// Position samples as `t,drone_id,x,y,z,battery_j` rows.
pub fn samples_csv(trace: &SimTrace, swarm: &SwarmSpec) -> String {
    let mut out = String::from("t,drone_id,x,y,z,battery_j\n");
    for s in &trace.samples {
        for (i, d) in swarm.drones.iter().enumerate() {
            let [x, y, z] = s.drone_positions[i];
            out.push_str(&format!("{},{},{},{},{},{}\n", s.time, d.id, x, y, z, s.batteries[i]));
        }
    }
    out
}

struct Transition {
    from: Vec<SlotOffset>,
    to: Vec<SlotOffset>,
    start: f64,
    duration: f64,
}

impl Transition {
    fn end(&self) -> f64 {
        self.start + self.duration
    }

    fn progress(&self, t: f64) -> f64 {
        if self.duration <= 0.0 {
            1.0
        } else {
            ((t - self.start) / self.duration).clamp(0.0, 1.0)
        }
    }
}

/// Leg geometry in 3D.
struct Track {
    a: [f64; 3],
    b: [f64; 3],
    heading: Point2,
    depart: f64,
    arrive: f64,
}

impl Track {
    fn at(&self, t: f64) -> [f64; 3] {
        let s = ((t - self.depart) / (self.arrive - self.depart)).clamp(0.0, 1.0);
        [
            self.a[0] + (self.b[0] - self.a[0]) * s,
            self.a[1] + (self.b[1] - self.a[1]) * s,
            self.a[2] + (self.b[2] - self.a[2]) * s,
        ]
    }
}

struct Sim<'a> {
    swarm: &'a SwarmSpec,
    cfg: &'a EnergyModelConfig,
    opts: SimOptions,
    t: f64,
    next_sample: u64,
    battery: Vec<f64>,
    used: Vec<f64>,
    warned: Vec<bool>,
    pattern: FormationPattern,
    offsets: Vec<SlotOffset>,
    transition: Option<Transition>,
    leader: [f64; 3],
    heading: Point2,
    events: Vec<SimEvent>,
    samples: Vec<SwarmState>,
}

impl Sim<'_> {
    fn emit(&mut self, t: f64, kind: EventKind) {
        self.events.push(SimEvent { t, kind });
    }

    fn current_offsets(&self, t: f64) -> Vec<SlotOffset> {
        match &self.transition {
            Some(tr) => {
                let s = tr.progress(t);
                tr.from.iter().zip(&tr.to).map(|(a, b)| a.lerp(*b, s)).collect()
            }
            None => self.offsets.clone(),
        }
    }

    fn sample_due(&self) -> Option<f64> {
        let ts = self.next_sample as f64 * self.opts.dt;
        (ts <= self.t + TIME_EPS).then_some(ts)
    }

    fn record(&mut self, phase: Phase) {
        let offsets = self.current_offsets(self.t);
        let phase = match (&self.transition, phase) {
            (Some(tr), Phase::Cruise) => Phase::Transition(tr.progress(self.t)),
            (_, p) => p,
        };
        let drone_positions = offsets
            .iter()
            .map(|o| {
                let d = o.rotate(self.heading);
                [self.leader[0] + d.x, self.leader[1] + d.y, self.leader[2]]
            })
            .collect();
        self.samples.push(SwarmState {
            time: self.t,
            leader_position: self.leader,
            heading: self.heading,
            pattern: self.pattern,
            drone_positions,
            batteries: self.battery.clone(),
            phase,
        });
    }

    fn record_due(&mut self, phase: Phase) {
        while self.sample_due().is_some() {
            self.record(phase);
            self.next_sample += 1;
        }
    }

    fn next_grid(&self) -> f64 {
        self.next_sample as f64 * self.opts.dt
    }

    fn finish_transition(&mut self, t: f64) {
        if let Some(tr) = self.transition.take() {
            self.offsets = tr.to;
            self.emit(t, EventKind::FormationChangeEnd { pattern: self.pattern });
        }
    }

    fn change_pattern(&mut self, t: f64, to: FormationPattern) -> Result<(), SimError> {
        let from = self.current_offsets(t);
        if self.transition.is_some() {
            self.finish_transition(t);
        }
        let target = slot_offsets(to, self.swarm.len(), self.swarm.spacing)?;
        let max_move = from
            .iter()
            .zip(&target)
            .map(|(a, b)| a.distance(*b))
            .fold(0.0, f64::max);
        let duration = max_move / self.opts.transition_speed;
        self.emit(
            t,
            EventKind::FormationChangeStart {
                from_pattern: self.pattern,
                to_pattern: to,
                duration,
            },
        );
        self.pattern = to;
        if duration <= 0.0 {
            self.offsets = target;
            self.emit(t, EventKind::FormationChangeEnd { pattern: to });
        } else {
            self.offsets = from.clone();
            self.transition = Some(Transition {
                from,
                to: target,
                start: t,
                duration,
            });
        }
        Ok(())
    }

    /// Drains batteries at constant `power` from `self.t` to `to`.
    #[allow(clippy::needless_range_loop)]
    fn drain(&mut self, to: f64, power: &[f64]) -> Result<(), SimError> {
        let span = to - self.t;
        let threshold = self.opts.warning_fraction;
        for i in 0..self.battery.len() {
            let before = self.battery[i];
            let after = before - power[i] * span;
            let cap = self.swarm.drones[i].battery_capacity;
            if after < 0.0 {
                return Err(SimError::Fault {
                    drone: self.swarm.drones[i].id.clone(),
                    time: self.t + before / power[i],
                });
            }
            if !self.warned[i] && after < threshold * cap {
                self.warned[i] = true;
                let when = if before < threshold * cap {
                    self.t
                } else {
                    self.t + (before - threshold * cap) / power[i]
                };
                self.emit(
                    when,
                    EventKind::BatteryWarning {
                        drone: self.swarm.drones[i].id.clone(),
                        fraction: threshold,
                    },
                );
            }
            self.battery[i] = after;
            self.used[i] += power[i] * span;
        }
        Ok(())
    }

    /// Flies from `self.t` to `until` along `track` in constant wind.
    fn cruise(&mut self, track: &Track, until: f64, wind: Point2) -> Result<(), SimError> {
        let power = swarm_power(self.swarm, self.pattern, wind, track.heading, self.cfg)?;
        while self.t < until - TIME_EPS {
            let mut next = until.min(self.next_grid().max(self.t));
            if let Some(tr) = &self.transition {
                if tr.end() > self.t + TIME_EPS {
                    next = next.min(tr.end());
                }
            }
            if next <= self.t + TIME_EPS {
                next = until.min(self.next_grid().max(self.t + self.opts.dt));
            }
            self.drain(next, &power)?;
            self.t = next;
            self.leader = track.at(self.t);
            if self.transition.as_ref().is_some_and(|tr| tr.end() <= self.t + TIME_EPS) {
                let end = self.transition.as_ref().unwrap().end();
                self.finish_transition(end);
            }
            self.record_due(Phase::Cruise);
        }
        self.t = until;
        self.leader = track.at(until);
        Ok(())
    }

    fn fly(&mut self, net: &SkywayNetwork, wind: &WindSchedule, leg: &RouteLeg, first: bool) -> Result<(), SimError> {
        let from = net.node(&leg.from).map_err(|e| SimError::InvalidPlan(e.to_string()))?;
        let to = net.node(&leg.to).map_err(|e| SimError::InvalidPlan(e.to_string()))?;
        let heading = leg_heading(net, &leg.from, &leg.to).map_err(|e| SimError::InvalidPlan(e.to_string()))?;
        let track = Track {
            a: [from.position.x, from.position.y, from.height],
            b: [to.position.x, to.position.y, to.height],
            heading,
            depart: leg.depart,
            arrive: leg.arrive,
        };
        let initial = leg.formation_plan[0].1;
        self.t = leg.depart;
        self.heading = heading;
        self.leader = track.a;
        if first {
            self.pattern = initial;
            self.offsets = slot_offsets(initial, self.swarm.len(), self.swarm.spacing)?;
        }
        self.emit(
            leg.depart,
            EventKind::Depart {
                from: leg.from.clone(),
                to: leg.to.clone(),
                pattern: initial,
            },
        );
        if !first && initial != self.pattern {
            self.change_pattern(leg.depart, initial)?;
        }
        self.record_due(Phase::Cruise);

        let mut cuts: Vec<(f64, Option<FormationPattern>)> =
            leg.formation_plan.iter().skip(1).map(|&(t, p)| (t, Some(p))).collect();
        cuts.extend(
            wind.pieces(leg.depart, leg.arrive)
                .iter()
                .skip(1)
                .map(|&(t, _, _)| (t, None)),
        );
        cuts.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.is_some().cmp(&a.1.is_some())));
        for (t, change) in cuts {
            self.cruise(&track, t, wind.wind_at(self.t))?;
            if let Some(p) = change {
                if p != self.pattern {
                    self.change_pattern(t, p)?;
                }
            }
        }
        self.cruise(&track, leg.arrive, wind.wind_at(self.t))?;
        if self.transition.is_some() {
            self.finish_transition(leg.arrive);
        }
        self.emit(leg.arrive, EventKind::Arrive { node: leg.to.clone() });
        Ok(())
    }

    /// Sits on the rooftop from `self.t` to `until`, charging the given batches.
    fn ground(&mut self, node: &str, batches: &[RechargeBatch], until: f64) -> Result<(), SimError> {
        let ids: Vec<&str> = self.swarm.drones.iter().map(|d| d.id.as_str()).collect();
        for batch in batches {
            if batch.start < self.t - TIME_EPS || batch.end > until + TIME_EPS || batch.end < batch.start {
                return Err(SimError::InvalidPlan(format!(
                    "recharge batch at `{node}` [{}, {}] outside the stop window",
                    batch.start, batch.end
                )));
            }
            let members = batch
                .drones
                .iter()
                .map(|d| {
                    ids.iter()
                        .position(|x| x == d)
                        .ok_or_else(|| SimError::InvalidPlan(format!("unknown drone `{d}` in recharge batch")))
                })
                .collect::<Result<Vec<usize>, _>>()?;
            self.idle(batch.start);
            self.emit(
                batch.start,
                EventKind::RechargeStart {
                    node: node.to_string(),
                    drones: batch.drones.clone(),
                },
            );
            let levels: Vec<f64> = members.iter().map(|&i| self.battery[i]).collect();
            let rate = self.opts.charge_rate;
            while self.t < batch.end - TIME_EPS {
                let next = batch.end.min(self.next_grid().max(self.t + TIME_EPS));
                self.t = next;
                for (k, &i) in members.iter().enumerate() {
                    let cap = self.swarm.drones[i].battery_capacity;
                    self.battery[i] = (levels[k] + rate * (self.t - batch.start)).min(cap);
                }
                self.record_due(Phase::Recharging);
            }
            self.t = batch.end;
            for &i in &members {
                self.battery[i] = self.swarm.drones[i].battery_capacity;
            }
            self.emit(
                batch.end,
                EventKind::RechargeEnd {
                    node: node.to_string(),
                    drones: batch.drones.clone(),
                },
            );
        }
        self.idle(until);
        Ok(())
    }

    fn idle(&mut self, until: f64) {
        while self.t < until - TIME_EPS {
            self.t = until.min(self.next_grid().max(self.t + TIME_EPS));
            self.record_due(Phase::Recharging);
        }
        self.t = self.t.max(until);
    }
}

fn check_plan(plan: &RoutePlan, net: &SkywayNetwork, swarm: &SwarmSpec) -> Result<(), SimError> {
    let bad = |m: String| Err(SimError::InvalidPlan(m));
    for (k, leg) in plan.legs.iter().enumerate() {
        let Some(length) = net.edge_length(&leg.from, &leg.to) else {
            return bad(format!("leg {k}: no segment `{}`-`{}`", leg.from, leg.to));
        };
        let expected = length / swarm.cruise_speed;
        if ((leg.arrive - leg.depart) - expected).abs() > 1e-6 * expected.max(1.0) {
            return bad(format!("leg {k}: duration does not match segment length"));
        }
        if leg.energy.len() != swarm.len() {
            return bad(format!(
                "leg {k}: energy for {} drones, swarm has {}",
                leg.energy.len(),
                swarm.len()
            ));
        }
        if leg.formation_plan.is_empty()
            || leg
                .formation_plan
                .windows(2)
                .any(|w| w[1].0.partial_cmp(&w[0].0) != Some(Ordering::Greater))
        {
            return bad(format!("leg {k}: formation plan must be non-empty and increasing"));
        }
        if k > 0 {
            let prev = &plan.legs[k - 1];
            if prev.to != leg.from {
                return bad(format!("leg {k} does not start where leg {} ends", k - 1));
            }
            if leg.depart < prev.arrive - TIME_EPS {
                return bad(format!("leg {k} departs before leg {} arrives", k - 1));
            }
        }
    }
    Ok(())
}

/// Replays `plan` at step `opts.dt`, producing events and state samples.
pub fn simulate(
    plan: &RoutePlan,
    net: &SkywayNetwork,
    swarm: &SwarmSpec,
    wind: &WindSchedule,
    cfg: &EnergyModelConfig,
    opts: SimOptions,
) -> Result<SimTrace, SimError> {
    if !(opts.dt.is_finite() && opts.dt > 0.0) {
        return Err(SimError::InvalidPlan(format!("dt must be positive, got {}", opts.dt)));
    }
    if !(opts.transition_speed > 0.0 && opts.charge_rate > 0.0) {
        return Err(SimError::InvalidPlan(
            "transition speed and charge rate must be positive".into(),
        ));
    }
    swarm.validate()?;
    check_plan(plan, net, swarm)?;

    let mut sim = Sim {
        swarm,
        cfg,
        opts,
        t: 0.0,
        next_sample: 0,
        battery: swarm.capacities(),
        used: vec![0.0; swarm.len()],
        warned: vec![false; swarm.len()],
        pattern: FormationPattern::Column,
        offsets: Vec::new(),
        transition: None,
        leader: [0.0; 3],
        heading: Point2::new(1.0, 0.0),
        events: Vec::new(),
        samples: Vec::new(),
    };

    for (k, leg) in plan.legs.iter().enumerate() {
        if k > 0 {
            let batches: Vec<RechargeBatch> = match plan.stops.get(&leg.from) {
                Some(StopKind::Recharge { batches }) => batches
                    .iter()
                    .filter(|b| b.start >= sim.t - TIME_EPS && b.end <= leg.depart + TIME_EPS)
                    .cloned()
                    .collect(),
                _ => Vec::new(),
            };
            sim.ground(&leg.from, &batches, leg.depart)?;
        }
        sim.fly(net, wind, leg, k == 0)?;
    }

    let end = plan.legs.last().map_or(0.0, |l| l.arrive);
    sim.t = end;
    sim.emit(end, EventKind::Done);
    if !plan.legs.is_empty() && sim.samples.last().is_none_or(|s| s.time < end - TIME_EPS) {
        sim.record(Phase::Done);
    } else if let Some(last) = sim.samples.last_mut() {
        last.phase = Phase::Done;
    }

    // Warnings are stamped at their crossing time, which may precede events
    // already emitted in the same step.
    sim.events.sort_by(|a, b| a.t.total_cmp(&b.t));

    Ok(SimTrace {
        events: sim.events,
        samples: sim.samples,
        energy_used: sim.used,
        final_battery: sim.battery,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formation::DroneSpec;
    use crate::network::SkywayNode;
    use crate::planner::{plan_route, PlannerOptions};

    fn swarm(n: usize, capacity: f64) -> SwarmSpec {
        SwarmSpec {
            drones: (0..n)
                .map(|i| DroneSpec {
                    id: format!("d{i}"),
                    payload: 0.2 * i as f64,
                    battery_capacity: capacity,
                    reserve_fraction: 0.1,
                })
                .collect(),
            spacing: 2.0,
            cruise_speed: 5.0,
        }
    }

    fn line_net(xs: &[(&str, f64, u32)]) -> SkywayNetwork {
        let nodes = xs
            .iter()
            .map(|&(id, x, pads)| SkywayNode {
                id: id.into(),
                position: Point2::new(x, 0.0),
                height: 10.0,
                recharge_pads: pads,
            })
            .collect();
        let edges = xs
            .windows(2)
            .map(|w| (w[0].0.to_string(), w[1].0.to_string()))
            .collect();
        SkywayNetwork::from_parts(nodes, edges).unwrap()
    }

    fn kinds(trace: &SimTrace) -> Vec<&'static str> {
        trace.events.iter().map(|e| e.kind.name()).collect()
    }

    #[test]
    fn empty_plan_is_single_done() {
        let net = line_net(&[("a", 0.0, 0), ("b", 100.0, 0)]);
        let cfg = EnergyModelConfig::default();
        let trace = simulate(
            &RoutePlan::empty(),
            &net,
            &swarm(2, 1e5),
            &WindSchedule::calm(),
            &cfg,
            SimOptions::default(),
        )
        .unwrap();
        assert_eq!(kinds(&trace), ["Done"]);
        assert_eq!(emit_events(&trace), "{\"t\":0.0,\"kind\":\"Done\"}\n");
    }

    #[test]
    fn single_leg_events() {
        let net = line_net(&[("a", 0.0, 0), ("b", 100.0, 0)]);
        let cfg = EnergyModelConfig::default();
        let s = swarm(3, 1e5);
        let wind = WindSchedule::calm();
        let plan = plan_route(&net, &s, &wind, &cfg, PlannerOptions::default(), "a", "b").unwrap();
        let trace = simulate(&plan, &net, &s, &wind, &cfg, SimOptions::default()).unwrap();
        assert_eq!(kinds(&trace), ["Depart", "Arrive", "Done"]);
        assert_eq!(emit_events(&trace).lines().count(), 3);
        // 20 s at dt 0.1 → 201 samples including both ends
        assert_eq!(trace.samples.len(), 201);
        assert_eq!(trace.samples.last().unwrap().phase, Phase::Done);
        for (u, e) in trace.energy_used.iter().zip(&plan.legs[0].energy) {
            assert!((u - e).abs() <= 1e-9 * e);
        }
    }

    #[test]
    fn mid_leg_wind_change_triggers_one_transition() {
        let net = line_net(&[("a", 0.0, 0), ("b", 200.0, 0)]);
        let cfg = EnergyModelConfig::default();
        let s = swarm(5, 1e5);
        // headwind then crosswind from the left: Column, then Echelon
        let wind = WindSchedule::new(vec![(0.0, Point2::new(-5.0, 0.0)), (13.37, Point2::new(0.0, -5.0))]).unwrap();
        let plan = plan_route(&net, &s, &wind, &cfg, PlannerOptions::default(), "a", "b").unwrap();
        assert_eq!(plan.legs[0].formation_plan.len(), 2);
        let trace = simulate(&plan, &net, &s, &wind, &cfg, SimOptions::default()).unwrap();
        let starts: Vec<&SimEvent> = trace
            .events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::FormationChangeStart { .. }))
            .collect();
        let ends = trace
            .events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::FormationChangeEnd { .. }))
            .count();
        assert_eq!(starts.len(), 1);
        assert_eq!(ends, 1);
        assert!((starts[0].t - 13.37).abs() <= 0.1);
        assert!(trace
            .samples
            .iter()
            .any(|s| matches!(s.phase, Phase::Transition(p) if p > 0.0 && p < 1.0)));
    }

    #[test]
    fn cruise_keeps_slot_geometry() {
        let net = line_net(&[("a", 0.0, 0), ("b", 120.0, 0)]);
        let cfg = EnergyModelConfig::default();
        let s = swarm(5, 1e5);
        let wind = WindSchedule::constant(Point2::new(0.0, -4.0));
        let plan = plan_route(&net, &s, &wind, &cfg, PlannerOptions::default(), "a", "b").unwrap();
        let trace = simulate(&plan, &net, &s, &wind, &cfg, SimOptions::default()).unwrap();
        for state in trace.samples.iter().filter(|st| st.phase == Phase::Cruise) {
            let offsets = slot_offsets(state.pattern, 5, 2.0).unwrap();
            for i in 0..5 {
                for j in 0..5 {
                    let p = state.drone_positions[i];
                    let q = state.drone_positions[j];
                    let d = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt();
                    assert!((d - offsets[i].distance(offsets[j])).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn recharge_and_warning_events() {
        let net = line_net(&[("a", 0.0, 0), ("r", 250.0, 2), ("b", 500.0, 0)]);
        let cfg = EnergyModelConfig::default();
        let s = swarm(3, 5_800.0);
        let wind = WindSchedule::calm();
        let plan = plan_route(&net, &s, &wind, &cfg, PlannerOptions::default(), "a", "b").unwrap();
        assert_eq!(plan.recharge_stops().count(), 1);
        let trace = simulate(&plan, &net, &s, &wind, &cfg, SimOptions::default()).unwrap();
        let k = kinds(&trace);
        assert_eq!(k.iter().filter(|x| **x == "RechargeStart").count(), 2);
        assert_eq!(k.iter().filter(|x| **x == "RechargeEnd").count(), 2);
        assert!(k.contains(&"BatteryWarning"));
        assert_eq!(*k.last().unwrap(), "Done");
        assert!(trace.events.windows(2).all(|w| w[0].t <= w[1].t));
        // each drone warns at most once
        let warned: Vec<String> = trace
            .events
            .iter()
            .filter_map(|e| match &e.kind {
                EventKind::BatteryWarning { drone, .. } => Some(drone.clone()),
                _ => None,
            })
            .collect();
        let mut dedup = warned.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), warned.len());
        // batteries never rise outside recharging
        for w in trace.samples.windows(2) {
            if w[1].phase != Phase::Recharging {
                for (x, y) in w[0].batteries.iter().zip(&w[1].batteries) {
                    assert!(y <= x);
                }
            }
        }
    }

    #[test]
    fn infeasible_plan_faults() {
        let net = line_net(&[("a", 0.0, 0), ("b", 100.0, 0)]);
        let cfg = EnergyModelConfig::default();
        let roomy = swarm(2, 1e5);
        let plan = plan_route(
            &net,
            &roomy,
            &WindSchedule::calm(),
            &cfg,
            PlannerOptions::default(),
            "a",
            "b",
        )
        .unwrap();
        let tight = swarm(2, 500.0);
        match simulate(&plan, &net, &tight, &WindSchedule::calm(), &cfg, SimOptions::default()) {
            Err(SimError::Fault { drone, time }) => {
                assert_eq!(drone, "d0");
                // leader burns 80 W: 500 J lasts 6.25 s
                assert!((time - 6.25).abs() < 1e-9);
            }
            other => panic!("expected fault, got {other:?}"),
        }
    }

    #[test]
    fn mismatched_plan_rejected() {
        let net = line_net(&[("a", 0.0, 0), ("b", 100.0, 0)]);
        let cfg = EnergyModelConfig::default();
        let s = swarm(2, 1e5);
        let mut plan = plan_route(
            &net,
            &s,
            &WindSchedule::calm(),
            &cfg,
            PlannerOptions::default(),
            "a",
            "b",
        )
        .unwrap();
        plan.legs[0].to = "zz".into();
        assert!(matches!(
            simulate(&plan, &net, &s, &WindSchedule::calm(), &cfg, SimOptions::default()),
            Err(SimError::InvalidPlan(_))
        ));
    }
}
