//! Python bindings: scenes, networks, formations, planning and simulation.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use skyway::geometry::Point2;
use skyway::{
    demo, emit_events, samples_csv, EnergyModelConfig, FormationPattern, PlanError, PlannerOptions, RoutePlan, Scene,
    SimError, SimOptions, SkywayNetwork, SwarmFile,
};

create_exception!(skyway, NoRouteError, PyException);
create_exception!(skyway, SimulationFault, PyException);

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn pattern(name: &str) -> PyResult<FormationPattern> {
    name.parse().map_err(value_error)
}

/// Buildings and no-fly zones.
#[pyclass(name = "Scene", frozen)]
struct PyScene(Scene);

#[pymethods]
impl PyScene {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Scene::from_json(text).map(Self).map_err(value_error)
    }

    /// The bundled city scene.
    #[staticmethod]
    fn demo() -> Self {
        Self(demo::scene())
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    fn building_ids(&self) -> Vec<String> {
        self.0.buildings.iter().map(|b| b.id.clone()).collect()
    }

    fn zone_ids(&self) -> Vec<String> {
        self.0.no_fly_zones.iter().map(|z| z.id.clone()).collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Scene({} buildings, {} no-fly zones)",
            self.0.buildings.len(),
            self.0.no_fly_zones.len()
        )
    }
}

/// Drone roster, formation spacing, cruise speed and wind schedule.
#[pyclass(name = "Swarm", frozen)]
struct PySwarm(SwarmFile);

#[pymethods]
impl PySwarm {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        SwarmFile::from_json(text).map(Self).map_err(value_error)
    }

    #[staticmethod]
    fn demo() -> Self {
        Self(demo::swarm())
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    fn drone_ids(&self) -> Vec<String> {
        self.0.swarm.drones.iter().map(|d| d.id.clone()).collect()
    }

    #[getter]
    fn spacing(&self) -> f64 {
        self.0.swarm.spacing
    }

    #[getter]
    fn cruise_speed(&self) -> f64 {
        self.0.swarm.cruise_speed
    }

    /// Corridor width that fits every formation of this swarm.
    fn corridor_width(&self) -> PyResult<f64> {
        skyway::max_formation_width(self.0.swarm.len(), self.0.swarm.spacing).map_err(value_error)
    }

    fn __len__(&self) -> usize {
        self.0.swarm.len()
    }
}

/// Power model parameters.
#[pyclass(name = "EnergyConfig", frozen)]
struct PyEnergyConfig(EnergyModelConfig);

#[pymethods]
impl PyEnergyConfig {
    #[new]
    fn new() -> Self {
        Self(EnergyModelConfig::default())
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        EnergyModelConfig::from_json(text).map(Self).map_err(value_error)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }
}

/// Rooftops joined by line-of-sight segments.
#[pyclass(name = "Network", frozen)]
struct PyNetwork(SkywayNetwork);

#[pymethods]
impl PyNetwork {
    #[staticmethod]
    fn build(scene: &PyScene, width: f64) -> PyResult<Self> {
        skyway::build_network(&scene.0, width).map(Self).map_err(value_error)
    }

    #[staticmethod]
    fn from_geojson(text: &str) -> PyResult<Self> {
        SkywayNetwork::from_geojson(text).map(Self).map_err(value_error)
    }

    fn to_geojson(&self) -> String {
        self.0.to_geojson()
    }

    fn nodes(&self) -> Vec<String> {
        self.0.nodes().map(|n| n.id.clone()).collect()
    }

    /// `(from, to, length)` for every segment, ordered by endpoint ids.
    fn edges(&self) -> Vec<(String, String, f64)> {
        self.0
            .edges()
            .iter()
            .map(|e| (e.from.clone(), e.to.clone(), e.length))
            .collect()
    }

    /// `(neighbor, length)` pairs of `node`.
    fn neighbors(&self, node: &str) -> PyResult<Vec<(String, f64)>> {
        self.0.neighbors(node).map(|n| n.to_vec()).map_err(value_error)
    }

    fn __len__(&self) -> usize {
        self.0.node_count()
    }

    fn __repr__(&self) -> String {
        format!("Network({} nodes, {} edges)", self.0.node_count(), self.0.edges().len())
    }
}

/// A timed route with formations, per-drone energy and stops.
#[pyclass(name = "Plan", frozen)]
struct PyPlan(RoutePlan);

#[pymethods]
impl PyPlan {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        RoutePlan::from_json(text).map(Self).map_err(value_error)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    #[getter]
    fn total_time(&self) -> f64 {
        self.0.total_time
    }

    fn path(&self) -> Vec<String> {
        self.0.path().into_iter().map(String::from).collect()
    }

    /// Nodes where the swarm recharges.
    fn recharge_nodes(&self) -> Vec<String> {
        self.0.recharge_stops().map(|(n, _)| n.to_string()).collect()
    }

    /// Formation names used on each leg, in order.
    fn formations(&self) -> Vec<Vec<String>> {
        self.0
            .legs
            .iter()
            .map(|l| l.formation_plan.iter().map(|(_, p)| p.name().to_string()).collect())
            .collect()
    }
}

/// Leader-relative `(along, cross)` slot offsets of a formation.
#[pyfunction]
fn slot_offsets(name: &str, n: usize, spacing: f64) -> PyResult<Vec<(f64, f64)>> {
    let offsets = skyway::slot_offsets(pattern(name)?, n, spacing).map_err(value_error)?;
    Ok(offsets.iter().map(|o| (o.along, o.cross)).collect())
}

#[pyfunction]
fn formation_width(name: &str, n: usize, spacing: f64) -> PyResult<f64> {
    skyway::formation_width(pattern(name)?, n, spacing).map_err(value_error)
}

/// Formation with the lowest peak per-drone power for the given wind and heading.
#[pyfunction]
fn best_formation(swarm: &PySwarm, wind: (f64, f64), heading: (f64, f64), config: &PyEnergyConfig) -> PyResult<String> {
    let h = Point2::new(heading.0, heading.1);
    if !h.is_finite() || h.norm() == 0.0 {
        return Err(PyValueError::new_err("heading must be a non-zero vector"));
    }
    skyway::best_formation(
        &swarm.0.swarm,
        Point2::new(wind.0, wind.1),
        h.scale(1.0 / h.norm()),
        &config.0,
    )
    .map(|p| p.name().to_string())
    .map_err(value_error)
}

/// Fastest feasible route; raises `NoRouteError` when none exists.
#[pyfunction]
#[pyo3(signature = (network, swarm, config, src, dst, charge_rate = 100.0, quantization = 20))]
fn plan_route(
    network: &PyNetwork,
    swarm: &PySwarm,
    config: &PyEnergyConfig,
    src: &str,
    dst: &str,
    charge_rate: f64,
    quantization: usize,
) -> PyResult<PyPlan> {
    let opts = PlannerOptions {
        charge_rate,
        quantization,
    };
    skyway::plan_route(&network.0, &swarm.0.swarm, &swarm.0.wind, &config.0, opts, src, dst)
        .map(PyPlan)
        .map_err(|e| match e {
            PlanError::NoRoute { .. } => NoRouteError::new_err(e.to_string()),
            other => value_error(other),
        })
}

/// Replays a plan; returns `(event_jsonl, samples_csv)`.
#[pyfunction]
#[pyo3(signature = (plan, network, swarm, config, dt = 0.1, charge_rate = 100.0))]
fn simulate(
    plan: &PyPlan,
    network: &PyNetwork,
    swarm: &PySwarm,
    config: &PyEnergyConfig,
    dt: f64,
    charge_rate: f64,
) -> PyResult<(String, String)> {
    let opts = SimOptions {
        dt,
        charge_rate,
        ..SimOptions::default()
    };
    let trace =
        skyway::simulate(&plan.0, &network.0, &swarm.0.swarm, &swarm.0.wind, &config.0, opts).map_err(|e| match e {
            SimError::Fault { .. } => SimulationFault::new_err(e.to_string()),
            other => value_error(other),
        })?;
    Ok((emit_events(&trace), samples_csv(&trace, &swarm.0.swarm)))
}

#[pymodule]
#[pyo3(name = "skyway")]
fn skyway_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScene>()?;
    m.add_class::<PySwarm>()?;
    m.add_class::<PyEnergyConfig>()?;
    m.add_class::<PyNetwork>()?;
    m.add_class::<PyPlan>()?;
    m.add_function(wrap_pyfunction!(slot_offsets, m)?)?;
    m.add_function(wrap_pyfunction!(formation_width, m)?)?;
    m.add_function(wrap_pyfunction!(best_formation, m)?)?;
    m.add_function(wrap_pyfunction!(plan_route, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add("NoRouteError", m.py().get_type::<NoRouteError>())?;
    m.add("SimulationFault", m.py().get_type::<SimulationFault>())?;
    m.add("DEMO_SOURCE", demo::SOURCE)?;
    m.add("DEMO_DESTINATION", demo::DESTINATION)?;
    Ok(())
}
