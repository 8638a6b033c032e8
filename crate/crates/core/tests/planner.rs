use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use skyway::{heuristic, plan_route, EnergyModelConfig, PlanError, PlannerOptions};
use skyway_testkit::routing::{brute_force_time, random_instance, replay};

fn opts() -> PlannerOptions {
    PlannerOptions {
        charge_rate: 100.0,
        quantization: 20,
    }
}

#[test]
fn matches_exhaustive_enumeration() {
    let cfg = EnergyModelConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut routed = 0;
    for k in 0..120 {
        let inst = random_instance(&mut rng, 8, 14);
        let expected = brute_force_time(&inst, &cfg);
        let got = plan_route(&inst.net, &inst.swarm, &inst.wind, &cfg, opts(), &inst.src, &inst.dst);
        match (expected, got) {
            (Some(t), Ok(plan)) => {
                assert!(
                    (plan.total_time - t).abs() <= 1e-6,
                    "instance {k}: {} vs {t}",
                    plan.total_time
                );
                replay(&plan, &inst, &cfg).unwrap_or_else(|e| panic!("instance {k}: {e}"));
                routed += 1;
            }
            (None, Err(PlanError::NoRoute { .. })) => {}
            (e, g) => panic!("instance {k}: oracle {e:?}, planner {g:?}"),
        }
    }
    assert!(routed > 60, "only {routed} instances had a route");
}

#[test]
fn heuristic_never_exceeds_remaining_time() {
    let cfg = EnergyModelConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..60 {
        let inst = random_instance(&mut rng, 8, 14);
        let Ok(plan) = plan_route(&inst.net, &inst.swarm, &inst.wind, &cfg, opts(), &inst.src, &inst.dst) else {
            continue;
        };
        for leg in &plan.legs {
            let h = heuristic(&leg.from, &inst.dst, &inst.net, inst.swarm.cruise_speed).unwrap();
            assert!(h <= plan.total_time - leg.depart + 1e-9);
        }
    }
}

#[test]
fn scaling_energy_never_speeds_up_a_route() {
    let cfg = EnergyModelConfig::default();
    let heavy = cfg.scaled(1.5);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..40 {
        let inst = random_instance(&mut rng, 6, 10);
        let light = plan_route(&inst.net, &inst.swarm, &inst.wind, &cfg, opts(), &inst.src, &inst.dst);
        let heavier = plan_route(&inst.net, &inst.swarm, &inst.wind, &heavy, opts(), &inst.src, &inst.dst);
        if let (Ok(a), Ok(b)) = (&light, &heavier) {
            assert!(b.total_time >= a.total_time - 1e-6);
        }
        if light.is_err() {
            assert!(heavier.is_err());
        }
    }
}

fn demo_instance(capacity: f64, wind: skyway::WindSchedule) -> skyway_testkit::routing::Instance {
    let mut file = skyway::demo::swarm();
    for d in &mut file.swarm.drones {
        d.battery_capacity = capacity;
    }
    let width = skyway::max_formation_width(file.swarm.len(), file.swarm.spacing).unwrap();
    skyway_testkit::routing::Instance {
        net: skyway::build_network(&skyway::demo::scene(), width).unwrap(),
        swarm: file.swarm,
        wind,
        charge_rate: 100.0,
        src: skyway::demo::SOURCE.into(),
        dst: skyway::demo::DESTINATION.into(),
    }
}

#[test]
fn demo_route_recharges_when_batteries_shrink() {
    let cfg = EnergyModelConfig::default();
    let wind = skyway::WindSchedule::constant(skyway::Point2::new(-3.0, 1.0));
    let roomy = demo_instance(1.0e6, wind.clone());
    let direct = plan_route(
        &roomy.net,
        &roomy.swarm,
        &roomy.wind,
        &cfg,
        opts(),
        &roomy.src,
        &roomy.dst,
    )
    .unwrap();
    assert_eq!(direct.recharge_stops().count(), 0);
    let direct_energy = (0..roomy.swarm.len())
        .map(|i| direct.legs.iter().map(|l| l.energy[i]).sum::<f64>())
        .fold(0.0, f64::max);

    let tight = demo_instance(0.7 * direct_energy, wind);
    let plan = plan_route(
        &tight.net,
        &tight.swarm,
        &tight.wind,
        &cfg,
        opts(),
        &tight.src,
        &tight.dst,
    )
    .unwrap();
    assert!(plan.recharge_stops().count() >= 1);
    let best = brute_force_time(&tight, &cfg).unwrap();
    assert!((plan.total_time - best).abs() <= 1e-6, "{} vs {best}", plan.total_time);
    replay(&plan, &tight, &cfg).unwrap();
}
