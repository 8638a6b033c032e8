//! Swarm delivery over a line-of-sight skyway network.
//!
//! Building rooftops become network nodes; rooftops that see each other over
//! a swarm-wide corridor clear of taller buildings and no-fly zones are joined
//! by segments. [`planner::plan_route`] finds the fastest route for a drone
//! swarm under per-drone battery limits, recharging at rooftop pads and
//! picking a formation for every wind interval. [`simulator::simulate`]
//! replays a plan step by step and records what happened as an event log.

pub mod demo;
pub mod error;
pub mod formation;
pub mod geometry;
pub mod network;
pub mod planner;
pub mod simulator;

pub use error::{FormationError, FrontierSummary, GeometryError, NetworkError, PlanError, SimError};
pub use formation::{
    best_formation, drone_power, formation_width, max_formation_width, segment_energy, slot_offsets, DroneSpec,
    EnergyModelConfig, FormationPattern, SlotOffset, SwarmFile, SwarmSpec, WindSchedule,
};
pub use geometry::{
    blocks_vertical, circle_intersects_polygon, corridor_polygon, line_of_sight, polygons_intersect, Building,
    NoFlyZone, Point2, Polygon2,
};
pub use network::{build_network, Scene, SkywayEdge, SkywayNetwork, SkywayNode};
pub use planner::{
    heuristic, plan_route, recharge_schedule, PlannerOptions, RechargeBatch, RouteLeg, RoutePlan, StopKind,
};

pub use simulator::{emit_events, samples_csv, simulate, EventKind, Phase, SimEvent, SimOptions, SimTrace, SwarmState};
