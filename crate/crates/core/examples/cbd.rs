//! Builds, plans and simulates the bundled CBD scenario and prints a summary.

use skyway::{build_network, demo, max_formation_width, plan_route, simulate, PlannerOptions, SimOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scene = demo::scene();
    let swarm = demo::swarm();
    let cfg = demo::energy_config();
    let width = max_formation_width(swarm.swarm.len(), swarm.swarm.spacing)?;
    let net = build_network(&scene, width)?;
    println!(
        "{} nodes, {} segments (corridor width {width} m)",
        net.node_count(),
        net.edges().len()
    );
    for e in net.edges() {
        println!("  {} - {} {:.1} m", e.from, e.to, e.length);
    }
    let plan = plan_route(
        &net,
        &swarm.swarm,
        &swarm.wind,
        &cfg,
        PlannerOptions::default(),
        demo::SOURCE,
        demo::DESTINATION,
    )?;
    println!("route {:?} in {:.2} s", plan.path(), plan.total_time);
    for leg in &plan.legs {
        println!(
            "  {} -> {} [{:.1}, {:.1}] {:?}",
            leg.from, leg.to, leg.depart, leg.arrive, leg.formation_plan
        );
    }
    for (id, stop) in &plan.stops {
        println!("  stop {id}: {stop:?}");
    }
    let trace = simulate(&plan, &net, &swarm.swarm, &swarm.wind, &cfg, SimOptions::default())?;
    println!("{} events, {} samples", trace.events.len(), trace.samples.len());
    for e in &trace.events {
        println!("  {:8.2} {:?}", e.t, e.kind);
    }
    Ok(())
}
