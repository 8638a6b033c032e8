//! Exhaustive route enumeration, plan replay and random routing instances.

use rand::Rng;
use skyway::formation::{
    best_formation, segment_energy, swarm_power, DroneSpec, EnergyModelConfig, SwarmSpec, WindSchedule,
};
use skyway::geometry::Point2;
use skyway::network::{SkywayNetwork, SkywayNode};
use skyway::planner::{RoutePlan, StopKind};

/// A randomly generated routing problem.
#[derive(Debug, Clone)]
pub struct Instance {
    pub net: SkywayNetwork,
    pub swarm: SwarmSpec,
    pub wind: WindSchedule,
    pub charge_rate: f64,
    pub src: String,
    pub dst: String,
}

/// Up to `max_nodes` rooftops joined by at most `max_edges` segments,
/// three drones and a constant wind.
pub fn random_instance<R: Rng>(rng: &mut R, max_nodes: usize, max_edges: usize) -> Instance {
    let n = rng.gen_range(3..=max_nodes);
    let nodes: Vec<SkywayNode> = (0..n)
        .map(|i| SkywayNode {
            id: format!("n{i}"),
            position: Point2::new(rng.gen_range(0.0..250.0), rng.gen_range(0.0..250.0)),
            height: rng.gen_range(10.0..40.0),
            recharge_pads: if rng.gen_bool(0.6) { rng.gen_range(1..=3) } else { 0 },
        })
        .collect();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    // Mostly connected: a random tree first, then extra chords.
    if rng.gen_bool(0.9) {
        for i in 1..n {
            pairs.push((rng.gen_range(0..i), i));
        }
    }
    let target = rng.gen_range(pairs.len().max(1)..=max_edges.min(n * (n - 1) / 2));
    let mut guard = 0;
    while pairs.len() < target && guard < 1000 {
        guard += 1;
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        let e = (a.min(b), a.max(b));
        if a != b && !pairs.contains(&e) {
            pairs.push(e);
        }
    }
    let edges = pairs
        .iter()
        .map(|&(a, b)| (nodes[a].id.clone(), nodes[b].id.clone()))
        .collect();
    let net = SkywayNetwork::from_parts(nodes, edges).expect("generated network is valid");
    // Roughly 30 J per meter of flight: sized so one typical leg fits on a
    // charge but two in a row often do not.
    let mean_edge = net.edges().iter().map(|e| e.length).sum::<f64>() / net.edges().len().max(1) as f64;
    let capacity = 30.0 * mean_edge * rng.gen_range(1.2..2.6);
    let swarm = SwarmSpec {
        drones: (0..3)
            .map(|i| DroneSpec {
                id: format!("d{i}"),
                payload: rng.gen_range(0.0..1.0),
                battery_capacity: capacity * rng.gen_range(0.8..1.2),
                reserve_fraction: 0.1,
            })
            .collect(),
        spacing: 2.0,
        cruise_speed: 5.0,
    };
    let angle = rng.gen_range(0.0..std::f64::consts::TAU);
    let speed = rng.gen_range(0.0..6.0);
    let wind = WindSchedule::constant(Point2::new(angle.cos(), angle.sin()).scale(speed));
    let src = rng.gen_range(0..n);
    let src_id = format!("n{src}");
    let far: Vec<usize> = (0..n)
        .filter(|&j| j != src && net.edge_length(&src_id, &format!("n{j}")).is_none())
        .collect();
    let dst = if !far.is_empty() && rng.gen_bool(0.8) {
        far[rng.gen_range(0..far.len())]
    } else {
        let mut d = rng.gen_range(0..n);
        while d == src {
            d = rng.gen_range(0..n);
        }
        d
    };
    Instance {
        net,
        swarm,
        wind,
        charge_rate: 100.0,
        src: src_id,
        dst: format!("n{dst}"),
    }
}

/// Per-drone energy for flying `from`→`to` departing at `t`, best formation
/// in every wind interval.
pub fn edge_energy(inst: &Instance, cfg: &EnergyModelConfig, from: &str, to: &str, t: f64) -> (f64, Vec<f64>) {
    let a = inst.net.node(from).unwrap();
    let b = inst.net.node(to).unwrap();
    let len = a.distance(b);
    let d = b.position - a.position;
    let heading = d.scale(1.0 / d.norm());
    let duration = len / inst.swarm.cruise_speed;
    let mut energy = vec![0.0; inst.swarm.len()];
    for (t0, t1, w) in inst.wind.pieces(t, t + duration) {
        let p = best_formation(&inst.swarm, w, heading, cfg).unwrap();
        for (e, pw) in energy
            .iter_mut()
            .zip(swarm_power(&inst.swarm, p, w, heading, cfg).unwrap())
        {
            *e += pw * (t1 - t0);
        }
    }
    (duration, energy)
}

/// Time to refill all deficits: batches of `pads` drones, largest deficits
/// first, each lasting as long as its largest deficit needs.
pub fn batch_recharge_time(deficits: &[f64], pads: usize, rate: f64) -> f64 {
    let mut d: Vec<f64> = deficits.iter().copied().filter(|&x| x > 0.0).collect();
    d.sort_by(|a, b| b.total_cmp(a));
    let mut t = 0.0;
    for k in (0..d.len()).step_by(pads) {
        t += d[k] / rate;
    }
    t
}

/// Minimum arrival time over all routes that are simple between recharges and
/// recharge at each rooftop at most once. `None` when the destination is
/// unreachable.
pub fn brute_force_time(inst: &Instance, cfg: &EnergyModelConfig) -> Option<f64> {
    let ids: Vec<String> = inst.net.nodes().map(|n| n.id.clone()).collect();
    let idx = |id: &str| ids.iter().position(|x| x == id).unwrap();
    let cap: Vec<f64> = inst.swarm.capacities();
    let reserve: Vec<f64> = inst.swarm.drones.iter().map(|d| d.reserve()).collect();
    let mut best = f64::INFINITY;

    struct Ctx<'a> {
        inst: &'a Instance,
        cfg: &'a EnergyModelConfig,
        ids: &'a [String],
        cap: &'a [f64],
        reserve: &'a [f64],
        dst: usize,
    }

    fn dfs(ctx: &Ctx, node: usize, visited: u32, recharged: u32, battery: &[f64], time: f64, best: &mut f64) {
        if time >= *best {
            return;
        }
        if node == ctx.dst {
            *best = time;
            return;
        }
        let here = &ctx.ids[node];
        for (nbr, _) in ctx.inst.net.neighbors(here).unwrap() {
            let j = ctx.ids.iter().position(|x| x == nbr).unwrap();
            if visited & (1 << j) != 0 {
                continue;
            }
            let (dur, energy) = edge_energy(ctx.inst, ctx.cfg, here, nbr, time);
            let next: Vec<f64> = battery.iter().zip(&energy).map(|(b, e)| b - e).collect();
            if next.iter().zip(ctx.reserve).any(|(b, r)| b < r) {
                continue;
            }
            dfs(ctx, j, visited | (1 << j), recharged, &next, time + dur, best);
        }
        let pads = ctx.inst.net.node(here).unwrap().recharge_pads as usize;
        let deficits: Vec<f64> = ctx.cap.iter().zip(battery).map(|(c, b)| c - b).collect();
        if pads > 0 && recharged & (1 << node) == 0 && deficits.iter().any(|&d| d > 0.0) {
            let t = batch_recharge_time(&deficits, pads, ctx.inst.charge_rate);
            dfs(ctx, node, 1 << node, recharged | (1 << node), ctx.cap, time + t, best);
        }
    }

    let ctx = Ctx {
        inst,
        cfg,
        ids: &ids,
        cap: &cap,
        reserve: &reserve,
        dst: idx(&inst.dst),
    };
    let s = idx(&inst.src);
    dfs(&ctx, s, 1 << s, 0, &cap, 0.0, &mut best);
    best.is_finite().then_some(best)
}

/// Replays `plan` with fixed-pattern segment energies and checks every
/// structural and battery constraint. Returns the battery after each leg.
pub fn replay(plan: &RoutePlan, inst: &Instance, cfg: &EnergyModelConfig) -> Result<Vec<Vec<f64>>, String> {
    let Instance {
        net,
        swarm,
        wind,
        charge_rate,
        src,
        dst,
    } = inst;
    let charge_rate = *charge_rate;
    if plan.legs.is_empty() {
        return if src == dst && plan.total_time == 0.0 {
            Ok(Vec::new())
        } else {
            Err("empty plan for distinct endpoints".into())
        };
    }
    if plan.legs[0].from != *src || plan.legs.last().unwrap().to != *dst {
        return Err("plan does not connect source to destination".into());
    }
    if (plan.total_time - plan.legs.last().unwrap().arrive).abs() > 1e-9 {
        return Err("total time differs from last arrival".into());
    }
    let cap = swarm.capacities();
    let mut battery = cap.clone();
    let mut after_legs = Vec::new();
    let mut interior = std::collections::BTreeSet::new();
    for (k, leg) in plan.legs.iter().enumerate() {
        if k > 0 {
            let prev = &plan.legs[k - 1];
            if prev.to != leg.from {
                return Err(format!("leg {k} is not connected"));
            }
            interior.insert(leg.from.clone());
            let pads = net.node(&leg.from).map_err(|e| e.to_string())?.recharge_pads as usize;
            let batches: Vec<_> = match plan.stops.get(&leg.from) {
                Some(StopKind::Recharge { batches }) => batches
                    .iter()
                    .filter(|b| b.start >= prev.arrive - 1e-9 && b.end <= leg.depart + 1e-9)
                    .collect(),
                Some(StopKind::Flyover) => Vec::new(),
                None => return Err(format!("no stop recorded for `{}`", leg.from)),
            };
            if !batches.is_empty() {
                if pads == 0 {
                    return Err(format!("recharge at `{}` without pads", leg.from));
                }
                let deficits: Vec<f64> = cap.iter().zip(&battery).map(|(c, b)| c - b).collect();
                let expected = batch_recharge_time(&deficits, pads, charge_rate);
                let span = batches.last().unwrap().end - batches[0].start;
                if (span - expected).abs() > 1e-6 {
                    return Err(format!(
                        "recharge at `{}` takes {span} s, expected {expected} s",
                        leg.from
                    ));
                }
                for w in batches.windows(2) {
                    if w[1].start < w[0].end - 1e-9 {
                        return Err("overlapping recharge batches".into());
                    }
                }
                for b in &batches {
                    if b.drones.len() > pads {
                        return Err("batch larger than pad count".into());
                    }
                    for d in &b.drones {
                        let i = swarm.drones.iter().position(|x| &x.id == d).ok_or("unknown drone")?;
                        battery[i] = cap[i];
                    }
                }
            }
            if leg.depart < prev.arrive - 1e-9 {
                return Err(format!("leg {k} departs before arriving"));
            }
        }
        let a = net.node(&leg.from).map_err(|e| e.to_string())?;
        let b = net.node(&leg.to).map_err(|e| e.to_string())?;
        if net.edge_length(&leg.from, &leg.to).is_none() {
            return Err(format!("leg {k} uses a missing segment"));
        }
        let d = b.position - a.position;
        let heading = d.scale(1.0 / d.norm());
        if ((leg.arrive - leg.depart) - a.distance(b) / swarm.cruise_speed).abs() > 1e-9 * leg.arrive.max(1.0) {
            return Err(format!("leg {k} duration does not match its length"));
        }
        let mut energy = vec![0.0; swarm.len()];
        for (s, &(t0, pattern)) in leg.formation_plan.iter().enumerate() {
            let t1 = leg.formation_plan.get(s + 1).map_or(leg.arrive, |x| x.0);
            if t1 <= t0 {
                continue;
            }
            let e = segment_energy(swarm, (t1 - t0) * swarm.cruise_speed, pattern, wind, t0, heading, cfg)
                .map_err(|e| e.to_string())?;
            for (x, y) in energy.iter_mut().zip(e) {
                *x += y;
            }
        }
        for (i, (x, y)) in energy.iter().zip(&leg.energy).enumerate() {
            if (x - y).abs() > 1e-9 * y.max(1.0) {
                return Err(format!("leg {k} drone {i}: replayed energy {x} vs planned {y}"));
            }
        }
        for (i, e) in energy.iter().enumerate() {
            battery[i] -= e;
            if battery[i] < swarm.drones[i].reserve() - 1e-9 * cap[i] {
                return Err(format!("drone {} below reserve after leg {k}", swarm.drones[i].id));
            }
        }
        after_legs.push(battery.clone());
    }
    let stop_ids: std::collections::BTreeSet<String> = plan.stops.keys().cloned().collect();
    if stop_ids != interior {
        return Err("stops do not cover exactly the interior nodes".into());
    }
    Ok(after_legs)
}
