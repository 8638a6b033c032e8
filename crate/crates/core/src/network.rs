//! Scene loading, skyway network construction and GeoJSON export.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::NetworkError;
use crate::geometry::{line_of_sight, Building, NoFlyZone, Point2, Polygon2, EPS};

/// Buildings and no-fly zones, as read from a scene document.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub buildings: Vec<Building>,
    pub no_fly_zones: Vec<NoFlyZone>,
}

#[derive(Serialize, Deserialize)]
struct SceneDoc {
    buildings: Vec<BuildingDoc>,
    #[serde(default)]
    no_fly_zones: Vec<ZoneDoc>,
}

#[derive(Serialize, Deserialize)]
struct BuildingDoc {
    id: String,
    x: f64,
    y: f64,
    radius: f64,
    height: f64,
    #[serde(default)]
    recharge_pads: u32,
}

#[derive(Serialize, Deserialize)]
struct ZoneDoc {
    id: String,
    vertices: Vec<[f64; 2]>,
}

impl Scene {
    pub fn new(buildings: Vec<Building>, no_fly_zones: Vec<NoFlyZone>) -> Result<Self, NetworkError> {
        let scene = Self {
            buildings,
            no_fly_zones,
        };
        scene.validate()?;
        Ok(scene)
    }

    pub fn from_json(text: &str) -> Result<Self, NetworkError> {
        let doc: SceneDoc = serde_json::from_str(text)?;
        let buildings = doc
            .buildings
            .into_iter()
            .map(|b| Building::new(b.id, Point2::new(b.x, b.y), b.radius, b.height, b.recharge_pads))
            .collect::<Result<Vec<_>, _>>()?;
        let no_fly_zones = doc
            .no_fly_zones
            .into_iter()
            .map(|z| {
                let shape = Polygon2::new(z.vertices.iter().map(|&[x, y]| Point2::new(x, y)).collect())
                    .map_err(|e| NetworkError::InvalidScene(format!("no-fly zone {}: {e}", z.id)))?;
                Ok(NoFlyZone { id: z.id, shape })
            })
            .collect::<Result<Vec<_>, NetworkError>>()?;
        Self::new(buildings, no_fly_zones)
    }

    pub fn to_json(&self) -> String {
        let doc = SceneDoc {
            buildings: self
                .buildings
                .iter()
                .map(|b| BuildingDoc {
                    id: b.id.clone(),
                    x: b.center.x,
                    y: b.center.y,
                    radius: b.radius,
                    height: b.height,
                    recharge_pads: b.recharge_pads,
                })
                .collect(),
            no_fly_zones: self
                .no_fly_zones
                .iter()
                .map(|z| ZoneDoc {
                    id: z.id.clone(),
                    vertices: z.shape.vertices().iter().map(|v| [v.x, v.y]).collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("scene serializes")
    }

    fn validate(&self) -> Result<(), NetworkError> {
        if self.buildings.is_empty() {
            return Err(NetworkError::InvalidScene("scene has no buildings".into()));
        }
        let mut ids = BTreeSet::new();
        for b in &self.buildings {
            b.validate()?;
            if !ids.insert(b.id.as_str()) {
                return Err(NetworkError::InvalidScene(format!("duplicate building id `{}`", b.id)));
            }
        }
        for (i, a) in self.buildings.iter().enumerate() {
            for b in &self.buildings[i + 1..] {
                if a.center.distance(b.center) <= EPS {
                    return Err(NetworkError::InvalidScene(format!(
                        "buildings `{}` and `{}` share a center",
                        a.id, b.id
                    )));
                }
            }
        }
        let mut zone_ids = BTreeSet::new();
        for z in &self.no_fly_zones {
            if !zone_ids.insert(z.id.as_str()) {
                return Err(NetworkError::InvalidScene(format!(
                    "duplicate no-fly zone id `{}`",
                    z.id
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkywayNode {
    pub id: String,
    pub position: Point2,
    pub height: f64,
    pub recharge_pads: u32,
}

impl SkywayNode {
    pub fn distance(&self, other: &SkywayNode) -> f64 {
        let planar = self.position.distance(other.position);
        planar.hypot(other.height - self.height)
    }
}

/// Undirected segment stored once with `from < to`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkywayEdge {
    pub from: String,
    pub to: String,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkywayNetwork {
    nodes: BTreeMap<String, SkywayNode>,
    edges: Vec<SkywayEdge>,
    adjacency: BTreeMap<String, Vec<(String, f64)>>,
}

impl SkywayNetwork {
    /// Assembles a network from parts, canonicalizing edge direction.
    pub fn from_parts(nodes: Vec<SkywayNode>, edges: Vec<(String, String)>) -> Result<Self, NetworkError> {
        let mut node_map = BTreeMap::new();
        for n in nodes {
            let id = n.id.clone();
            if node_map.insert(id.clone(), n).is_some() {
                return Err(NetworkError::InvalidScene(format!("duplicate node id `{id}`")));
            }
        }
        let mut seen = BTreeSet::new();
        let mut edge_list = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            if a == b {
                return Err(NetworkError::InvalidScene(format!("self-loop at `{a}`")));
            }
            let (from, to) = if a < b { (a, b) } else { (b, a) };
            let na = node_map
                .get(&from)
                .ok_or_else(|| NetworkError::NotFound(from.clone()))?;
            let nb = node_map.get(&to).ok_or_else(|| NetworkError::NotFound(to.clone()))?;
            let length = na.distance(nb);
            if !seen.insert((from.clone(), to.clone())) {
                return Err(NetworkError::InvalidScene(format!("duplicate edge `{from}`-`{to}`")));
            }
            edge_list.push(SkywayEdge { from, to, length });
        }
        edge_list.sort_by(|x, y| (&x.from, &x.to).cmp(&(&y.from, &y.to)));
        let mut adjacency: BTreeMap<String, Vec<(String, f64)>> =
            node_map.keys().map(|k| (k.clone(), Vec::new())).collect();
        for e in &edge_list {
            adjacency.get_mut(&e.from).unwrap().push((e.to.clone(), e.length));
            adjacency.get_mut(&e.to).unwrap().push((e.from.clone(), e.length));
        }
        for list in adjacency.values_mut() {
            list.sort_by(|x, y| x.0.cmp(&y.0));
        }
        Ok(Self {
            nodes: node_map,
            edges: edge_list,
            adjacency,
        })
    }

    pub fn nodes(&self) -> impl Iterator<Item = &SkywayNode> {
        self.nodes.values()
    }

    pub fn node(&self, id: &str) -> Result<&SkywayNode, NetworkError> {
        self.nodes.get(id).ok_or_else(|| NetworkError::NotFound(id.to_string()))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.nodes.contains_key(id)
    }

    pub fn edges(&self) -> &[SkywayEdge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Length of the segment between `a` and `b`, in either direction.
    pub fn edge_length(&self, a: &str, b: &str) -> Option<f64> {
        self.adjacency.get(a)?.iter().find(|(n, _)| n == b).map(|&(_, len)| len)
    }

    /// Incident segments of `node`, sorted by neighbor id.
    pub fn neighbors(&self, node: &str) -> Result<&[(String, f64)], NetworkError> {
        self.adjacency
            .get(node)
            .map(Vec::as_slice)
            .ok_or_else(|| NetworkError::NotFound(node.to_string()))
    }

    /// FeatureCollection with node points first, then segments, each sorted by id.
    pub fn to_geojson(&self) -> String {
        let mut features = Vec::with_capacity(self.nodes.len() + self.edges.len());
        for n in self.nodes.values() {
            features.push(Feature {
                kind: "Feature",
                geometry: FeatureGeometry::Point {
                    coordinates: [n.position.x, n.position.y, n.height],
                },
                properties: FeatureProps::Node {
                    id: n.id.clone(),
                    height: n.height,
                    recharge_pads: n.recharge_pads,
                },
            });
        }
        for e in &self.edges {
            let a = &self.nodes[&e.from];
            let b = &self.nodes[&e.to];
            features.push(Feature {
                kind: "Feature",
                geometry: FeatureGeometry::LineString {
                    coordinates: [
                        [a.position.x, a.position.y, a.height],
                        [b.position.x, b.position.y, b.height],
                    ],
                },
                properties: FeatureProps::Edge {
                    from: e.from.clone(),
                    to: e.to.clone(),
                    length: e.length,
                },
            });
        }
        let fc = FeatureCollection {
            kind: "FeatureCollection",
            features,
        };
        let mut text = serde_json::to_string_pretty(&fc).expect("geojson serializes");
        text.push('\n');
        text
    }

    /// Reads back a document written by [`SkywayNetwork::to_geojson`].
    pub fn from_geojson(text: &str) -> Result<Self, NetworkError> {
        let fc: FeatureCollectionIn = serde_json::from_str(text)?;
        let mut nodes = Vec::new();
        let mut edges = Vec::new();
        for f in fc.features {
            match (f.geometry, f.properties) {
                (FeatureGeometryIn::Point { coordinates }, PropsIn::Node { id, recharge_pads, .. }) => {
                    let [x, y, h] = coordinates;
                    nodes.push(SkywayNode {
                        id,
                        position: Point2::new(x, y),
                        height: h,
                        recharge_pads,
                    });
                }
                (FeatureGeometryIn::LineString { .. }, PropsIn::Edge { from, to, .. }) => {
                    edges.push((from, to));
                }
                _ => {
                    return Err(NetworkError::InvalidScene(
                        "feature geometry does not match its properties".into(),
                    ))
                }
            }
        }
        Self::from_parts(nodes, edges)
    }
}

/// Connects every pair of rooftops that has line of sight for a swarm of `swarm_width`.
pub fn build_network(scene: &Scene, swarm_width: f64) -> Result<SkywayNetwork, NetworkError> {
    scene.validate()?;
    if !(swarm_width.is_finite() && swarm_width > 0.0) {
        return Err(NetworkError::InvalidScene(format!(
            "swarm width must be positive, got {swarm_width}"
        )));
    }
    let mut order: Vec<&Building> = scene.buildings.iter().collect();
    order.sort_by(|a, b| a.id.cmp(&b.id));
    let mut edges = Vec::new();
    for (i, a) in order.iter().enumerate() {
        for b in &order[i + 1..] {
            if line_of_sight(a, b, &scene.buildings, &scene.no_fly_zones, swarm_width)? {
                edges.push((a.id.clone(), b.id.clone()));
            }
        }
    }
    let nodes = order
        .iter()
        .map(|b| SkywayNode {
            id: b.id.clone(),
            position: b.center,
            height: b.height,
            recharge_pads: b.recharge_pads,
        })
        .collect();
    SkywayNetwork::from_parts(nodes, edges)
}

#[derive(Serialize)]
struct FeatureCollection {
    #[serde(rename = "type")]
    kind: &'static str,
    features: Vec<Feature>,
}

#[derive(Serialize)]
struct Feature {
    #[serde(rename = "type")]
    kind: &'static str,
    geometry: FeatureGeometry,
    properties: FeatureProps,
}

#[derive(Serialize)]
#[serde(tag = "type")]
enum FeatureGeometry {
    Point { coordinates: [f64; 3] },
    LineString { coordinates: [[f64; 3]; 2] },
}

#[derive(Serialize)]
#[serde(untagged)]
enum FeatureProps {
    Node {
        id: String,
        height: f64,
        recharge_pads: u32,
    },
    Edge {
        from: String,
        to: String,
        length: f64,
    },
}

#[derive(Deserialize)]
struct FeatureCollectionIn {
    features: Vec<FeatureIn>,
}

#[derive(Deserialize)]
struct FeatureIn {
    geometry: FeatureGeometryIn,
    properties: PropsIn,
}

#[derive(Deserialize)]
#[serde(tag = "type")]
enum FeatureGeometryIn {
    Point {
        coordinates: [f64; 3],
    },
    LineString {
        #[allow(dead_code)]
        coordinates: Vec<[f64; 3]>,
    },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PropsIn {
    Node {
        id: String,
        #[allow(dead_code)]
        height: f64,
        recharge_pads: u32,
    },
    Edge {
        from: String,
        to: String,
        #[allow(dead_code)]
        length: f64,
    },
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bld(id: &str, x: f64, y: f64, h: f64) -> Building {
        Building::new(id, Point2::new(x, y), 1.0, h, 1).unwrap()
    }

    #[test]
    fn two_buildings_one_edge() {
        let scene = Scene::new(vec![bld("a", 0.0, 0.0, 10.0), bld("b", 30.0, 40.0, 10.0)], vec![]).unwrap();
        let net = build_network(&scene, 4.0).unwrap();
        assert_eq!(net.edges().len(), 1);
        assert_eq!(net.edges()[0].length, 50.0);
        let gj = net.to_geojson();
        let v: serde_json::Value = serde_json::from_str(&gj).unwrap();
        assert_eq!(v["features"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn edge_length_is_3d() {
        let scene = Scene::new(vec![bld("a", 0.0, 0.0, 10.0), bld("b", 3.0, 0.0, 14.0)], vec![]).unwrap();
        let net = build_network(&scene, 1.0).unwrap();
        assert!((net.edge_length("b", "a").unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn scene_errors() {
        assert!(matches!(Scene::new(vec![], vec![]), Err(NetworkError::InvalidScene(_))));
        let dup = Scene::new(vec![bld("a", 0.0, 0.0, 1.0), bld("a", 5.0, 0.0, 1.0)], vec![]);
        assert!(matches!(dup, Err(NetworkError::InvalidScene(_))));
        let stacked = Scene::new(vec![bld("a", 0.0, 0.0, 1.0), bld("b", 0.0, 0.0, 2.0)], vec![]);
        assert!(matches!(stacked, Err(NetworkError::InvalidScene(_))));
        assert!(matches!(
            Scene::from_json("{\"buildings\": ["),
            Err(NetworkError::Parse(_))
        ));
    }

    #[test]
    fn neighbors_sorted_by_id() {
        let nodes = ["n", "A", "B", "lonely"]
            .iter()
            .enumerate()
            .map(|(i, id)| SkywayNode {
                id: id.to_string(),
                position: Point2::new(i as f64, 0.0),
                height: 1.0,
                recharge_pads: 0,
            })
            .collect();
        let net = SkywayNetwork::from_parts(nodes, vec![("n".into(), "B".into()), ("A".into(), "n".into())]).unwrap();
        let ids: Vec<&str> = net.neighbors("n").unwrap().iter().map(|(id, _)| id.as_str()).collect();
        assert_eq!(ids, ["A", "B"]);
        assert!(net.neighbors("lonely").unwrap().is_empty());
        assert!(matches!(net.neighbors("ghost"), Err(NetworkError::NotFound(_))));
    }

    #[test]
    fn single_node_geojson() {
        let scene = Scene::new(vec![bld("solo", 1.0, 2.0, 3.0)], vec![]).unwrap();
        let net = build_network(&scene, 2.0).unwrap();
        let v: serde_json::Value = serde_json::from_str(&net.to_geojson()).unwrap();
        assert_eq!(v["features"].as_array().unwrap().len(), 1);
        assert_eq!(v["features"][0]["properties"]["id"], "solo");
    }

    #[test]
    fn geojson_round_trip() {
        let scene = Scene::new(
            vec![
                bld("c", 0.0, 0.0, 10.0),
                bld("a", 20.0, 0.0, 12.0),
                bld("b", 10.0, 15.0, 8.0),
                bld("tall", 10.0, 0.2, 40.0),
            ],
            vec![],
        )
        .unwrap();
        let net = build_network(&scene, 2.0).unwrap();
        let back = SkywayNetwork::from_geojson(&net.to_geojson()).unwrap();
        assert_eq!(back, net);
        assert!(net.edge_length("a", "c").is_none());
    }

    #[test]
    fn scene_json_round_trip() {
        let text = r#"{"buildings":[{"id":"a","x":0,"y":0,"radius":2,"height":10,"recharge_pads":2},
            {"id":"b","x":10,"y":0,"radius":2,"height":10}],
            "no_fly_zones":[{"id":"z","vertices":[[0,5],[0,8],[3,8],[3,5]]}]}"#;
        let scene = Scene::from_json(text).unwrap();
        assert_eq!(scene.buildings[1].recharge_pads, 0);
        assert!(scene.no_fly_zones[0].shape.area() > 0.0);
        assert_eq!(Scene::from_json(&scene.to_json()).unwrap(), scene);
    }
}
