//! The bundled "City CBD" scenario: a compact downtown block of rooftops,
//! seven no-fly zones and a five-drone delivery swarm.

use crate::formation::{EnergyModelConfig, SwarmFile};
use crate::network::Scene;

pub const SCENE_JSON: &str = include_str!("../data/cbd_scene.json");
pub const SWARM_JSON: &str = include_str!("../data/cbd_swarm.json");
pub const ENERGY_JSON: &str = crate::formation::DEFAULT_ENERGY_CONFIG;

/// Depot rooftop.
pub const SOURCE: &str = "depot";
/// Delivery rooftop.
pub const DESTINATION: &str = "harbour";

pub fn scene() -> Scene {
    Scene::from_json(SCENE_JSON).expect("bundled scene is valid")
}

pub fn swarm() -> SwarmFile {
    SwarmFile::from_json(SWARM_JSON).expect("bundled swarm is valid")
}

pub fn energy_config() -> EnergyModelConfig {
    EnergyModelConfig::default()
}
