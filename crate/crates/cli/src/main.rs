use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use skyway::{
    build_network, demo, emit_events, max_formation_width, plan_route, samples_csv, simulate, EnergyModelConfig,
    PlanError, PlannerOptions, RoutePlan, Scene, SimError, SimOptions, SkywayNetwork, StopKind, SwarmFile,
};

#[derive(Parser)]
#[command(
    name = "skyway",
    version,
    about = "Plan and simulate drone swarm deliveries over rooftop skyways"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the line-of-sight network for a scene and export it as GeoJSON.
    BuildNetwork {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        swarm: PathBuf,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Find the fastest feasible route and write a plan file.
    Plan {
        #[command(flatten)]
        inputs: InputArgs,
        #[arg(long)]
        src: String,
        #[arg(long)]
        dst: String,
        /// Battery buckets per drone used to prune the search.
        #[arg(long, default_value_t = 20)]
        quantization: usize,
        /// Charging power per pad, in watts.
        #[arg(long, default_value_t = 100.0)]
        charge_rate: f64,
        /// Accept identical source and destination (yields an empty plan).
        #[arg(long)]
        allow_trivial: bool,
        #[arg(long, default_value = "plan.json")]
        out: PathBuf,
    },
    /// Replay a plan and write the event log as JSON lines.
    Simulate {
        #[command(flatten)]
        inputs: InputArgs,
        #[arg(long)]
        plan: PathBuf,
        /// Simulation step, in seconds.
        #[arg(long, default_value_t = 0.1)]
        dt: f64,
        /// Charging power per pad; defaults to the rate the plan was made with.
        #[arg(long)]
        charge_rate: Option<f64>,
        /// Event log file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write per-drone position samples as CSV.
        #[arg(long)]
        samples: Option<PathBuf>,
    },
    /// Build, plan and simulate the bundled city scene.
    Demo {
        /// Directory receiving network.geojson, plan.json, events.jsonl and samples.csv.
        #[arg(long, default_value = "demo-output")]
        out: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        dt: f64,
        #[arg(long, default_value_t = 20)]
        quantization: usize,
        #[arg(long, default_value_t = 100.0)]
        charge_rate: f64,
    },
}

#[derive(Args)]
struct InputArgs {
    #[arg(long)]
    scene: PathBuf,
    #[arg(long)]
    swarm: PathBuf,
    /// Energy model; the built-in defaults when omitted.
    #[arg(long)]
    energy_config: Option<PathBuf>,
}

enum Failure {
    Input(String),
    NoRoute(String),
    Stale(String),
    Fault(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::NoRoute(_) => 3,
            Failure::Stale(_) => 4,
            Failure::Fault(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::NoRoute(m) | Failure::Stale(m) | Failure::Fault(m) => m,
        }
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn input<E: std::fmt::Display>(context: &str) -> impl FnOnce(E) -> Failure + '_ {
    move |e| Failure::Input(format!("{context}: {e}"))
}

/// SHA-256 of the exact bytes of each input document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct InputHashes {
    scene: String,
    swarm: String,
    energy_config: String,
}

#[derive(Serialize, Deserialize)]
struct PlanFile {
    inputs: InputHashes,
    charge_rate: f64,
    #[serde(flatten)]
    plan: RoutePlan,
}

/// Parsed inputs together with their content hashes.
struct Loaded {
    scene: Scene,
    swarm: SwarmFile,
    energy: EnergyModelConfig,
    hashes: InputHashes,
}

fn sha256(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))
}

fn parse(scene: &str, swarm: &str, energy: &str) -> Result<Loaded> {
    Ok(Loaded {
        scene: Scene::from_json(scene).map_err(input("scene"))?,
        swarm: SwarmFile::from_json(swarm).map_err(input("swarm"))?,
        energy: EnergyModelConfig::from_json(energy).map_err(input("energy config"))?,
        hashes: InputHashes {
            scene: sha256(scene),
            swarm: sha256(swarm),
            energy_config: sha256(energy),
        },
    })
}

fn load(args: &InputArgs) -> Result<Loaded> {
    let energy = match &args.energy_config {
        Some(p) => read(p)?,
        None => skyway::formation::DEFAULT_ENERGY_CONFIG.to_string(),
    };
    parse(&read(&args.scene)?, &read(&args.swarm)?, &energy)
}

fn network(scene: &Scene, swarm: &SwarmFile) -> Result<SkywayNetwork> {
    let width = max_formation_width(swarm.swarm.len(), swarm.swarm.spacing).map_err(input("swarm"))?;
    let net = build_network(scene, width).map_err(input("scene"))?;
    if net.edges().is_empty() {
        eprintln!("warning: no rooftop pair has line of sight at corridor width {width} m");
    }
    Ok(net)
}

fn plan(loaded: &Loaded, src: &str, dst: &str, opts: PlannerOptions, allow_trivial: bool) -> Result<RoutePlan> {
    if src == dst && !allow_trivial {
        return Err(Failure::Input(format!(
            "source and destination are both `{src}`; pass --allow-trivial to accept an empty plan"
        )));
    }
    let net = network(&loaded.scene, &loaded.swarm)?;
    plan_route(
        &net,
        &loaded.swarm.swarm,
        &loaded.swarm.wind,
        &loaded.energy,
        opts,
        src,
        dst,
    )
    .map_err(|e| match e {
        PlanError::NoRoute { .. } => Failure::NoRoute(e.to_string()),
        other => Failure::Input(other.to_string()),
    })
}

fn plan_file_json(plan: &RoutePlan, hashes: &InputHashes, charge_rate: f64) -> String {
    let file = PlanFile {
        inputs: hashes.clone(),
        charge_rate,
        plan: plan.clone(),
    };
    serde_json::to_string_pretty(&file).expect("plan file serializes") + "\n"
}

fn summary(plan: &RoutePlan) -> String {
    let mut out = format!("total_time: {:.3} s\n", plan.total_time);
    if plan.legs.is_empty() {
        out.push_str("route: empty (source is the destination)\n");
        return out;
    }
    out.push_str(&format!("route: {}\n", plan.path().join(" -> ")));
    let flyovers = plan.stops.values().filter(|s| matches!(s, StopKind::Flyover)).count();
    let recharges: Vec<_> = plan.recharge_stops().collect();
    out.push_str(&format!("stops: {} flyover, {} recharge\n", flyovers, recharges.len()));
    for (node, batches) in recharges {
        for b in batches {
            out.push_str(&format!(
                "  recharge at {node}: {} from {:.3} s to {:.3} s\n",
                b.drones.join(", "),
                b.start,
                b.end
            ));
        }
    }
    out
}

fn sim_error(e: SimError) -> Failure {
    match e {
        SimError::Fault { .. } => Failure::Fault(e.to_string()),
        other => Failure::Input(other.to_string()),
    }
}

fn sim_options(dt: f64, charge_rate: f64) -> SimOptions {
    SimOptions {
        dt,
        charge_rate,
        ..SimOptions::default()
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::BuildNetwork { scene, swarm, out } => {
            let scene = Scene::from_json(&read(&scene)?).map_err(input("scene"))?;
            let swarm = SwarmFile::from_json(&read(&swarm)?).map_err(input("swarm"))?;
            let geojson = network(&scene, &swarm)?.to_geojson();
            match out {
                Some(p) => write(&p, &geojson),
                None => {
                    print!("{geojson}");
                    Ok(())
                }
            }
        }
        Command::Plan {
            inputs,
            src,
            dst,
            quantization,
            charge_rate,
            allow_trivial,
            out,
        } => {
            let loaded = load(&inputs)?;
            let opts = PlannerOptions {
                charge_rate,
                quantization,
            };
            let route = plan(&loaded, &src, &dst, opts, allow_trivial)?;
            write(&out, &plan_file_json(&route, &loaded.hashes, charge_rate))?;
            print!("{}", summary(&route));
            Ok(())
        }
        Command::Simulate {
            inputs,
            plan,
            dt,
            charge_rate,
            out,
            samples,
        } => {
            let loaded = load(&inputs)?;
            let file: PlanFile = serde_json::from_str(&read(&plan)?).map_err(input("plan file"))?;
            if file.inputs != loaded.hashes {
                let mut stale = Vec::new();
                if file.inputs.scene != loaded.hashes.scene {
                    stale.push("scene");
                }
                if file.inputs.swarm != loaded.hashes.swarm {
                    stale.push("swarm");
                }
                if file.inputs.energy_config != loaded.hashes.energy_config {
                    stale.push("energy config");
                }
                return Err(Failure::Stale(format!(
                    "plan {} was made from a different {}",
                    plan.display(),
                    stale.join(" and ")
                )));
            }
            let net = network(&loaded.scene, &loaded.swarm)?;
            let opts = sim_options(dt, charge_rate.unwrap_or(file.charge_rate));
            let trace = simulate(
                &file.plan,
                &net,
                &loaded.swarm.swarm,
                &loaded.swarm.wind,
                &loaded.energy,
                opts,
            )
            .map_err(sim_error)?;
            if let Some(p) = samples {
                write(&p, &samples_csv(&trace, &loaded.swarm.swarm))?;
            }
            let events = emit_events(&trace);
            match out {
                Some(p) => write(&p, &events),
                None => {
                    print!("{events}");
                    Ok(())
                }
            }
        }
        Command::Demo {
            out,
            dt,
            quantization,
            charge_rate,
        } => {
            let loaded = parse(demo::SCENE_JSON, demo::SWARM_JSON, demo::ENERGY_JSON)?;
            fs::create_dir_all(&out).map_err(|e| Failure::Input(format!("cannot create {}: {e}", out.display())))?;
            let net = network(&loaded.scene, &loaded.swarm)?;
            write(&out.join("network.geojson"), &net.to_geojson())?;
            let opts = PlannerOptions {
                charge_rate,
                quantization,
            };
            let route = plan(&loaded, demo::SOURCE, demo::DESTINATION, opts, false)?;
            write(
                &out.join("plan.json"),
                &plan_file_json(&route, &loaded.hashes, charge_rate),
            )?;
            let trace = simulate(
                &route,
                &net,
                &loaded.swarm.swarm,
                &loaded.swarm.wind,
                &loaded.energy,
                sim_options(dt, charge_rate),
            )
            .map_err(sim_error)?;
            write(&out.join("events.jsonl"), &emit_events(&trace))?;
            write(&out.join("samples.csv"), &samples_csv(&trace, &loaded.swarm.swarm))?;
            println!("network: {} rooftops, {} segments", net.node_count(), net.edges().len());
            print!("{}", summary(&route));
            println!(
                "events: {} written to {}",
                trace.events.len(),
                out.join("events.jsonl").display()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
