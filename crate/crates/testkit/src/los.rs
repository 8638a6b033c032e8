//! Line-of-sight oracle and random scenes with a guaranteed decision margin.

use rand::Rng;
use skyway::geometry::{Building, NoFlyZone, Point2, Polygon2};
use skyway::network::Scene;

/// Samples along the flight line used to bracket the nearest point.
pub const LINE_SAMPLES: usize = 1000;

/// Corridor-aligned frame: `s` runs along the track from `a`, `c` to its left.
struct Frame {
    origin: Point2,
    u: Point2,
    v: Point2,
    len: f64,
    half: f64,
}

impl Frame {
    fn new(a: Point2, b: Point2, width: f64) -> Self {
        let d = b - a;
        let len = d.norm();
        let u = d.scale(1.0 / len);
        Self {
            origin: a,
            u,
            v: Point2::new(-u.y, u.x),
            len,
            half: width / 2.0,
        }
    }

    fn local(&self, p: Point2) -> (f64, f64) {
        let r = p - self.origin;
        (r.dot(self.u), r.dot(self.v))
    }

    /// Distance from a local point to the corridor rectangle (0 inside).
    fn box_distance(&self, s: f64, c: f64) -> f64 {
        let ds = (-s).max(s - self.len).max(0.0);
        let dc = (c.abs() - self.half).max(0.0);
        ds.hypot(dc)
    }

    fn corners(&self) -> [(f64, f64); 4] {
        [
            (0.0, -self.half),
            (self.len, -self.half),
            (self.len, self.half),
            (0.0, self.half),
        ]
    }
}

fn clip(poly: Vec<(f64, f64)>, inside: impl Fn((f64, f64)) -> f64) -> Vec<(f64, f64)> {
    // Sutherland-Hodgman against the half-plane `inside(p) >= 0`.
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 2);
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let fp = inside(p);
        let fq = inside(q);
        if fp >= 0.0 {
            out.push(p);
        }
        if (fp >= 0.0) != (fq >= 0.0) {
            let t = fp / (fp - fq);
            out.push((p.0 + (q.0 - p.0) * t, p.1 + (q.1 - p.1) * t));
        }
    }
    out
}

fn shoelace(poly: &[(f64, f64)]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| poly[i].0 * poly[(i + 1) % n].1 - poly[(i + 1) % n].0 * poly[i].1)
        .sum::<f64>()
        / 2.0
}

/// Overlap area of a no-fly zone with the corridor rectangle.
fn zone_overlap_area(frame: &Frame, zone: &Polygon2) -> f64 {
    let mut poly: Vec<(f64, f64)> = zone.vertices().iter().map(|&p| frame.local(p)).collect();
    let len = frame.len;
    let half = frame.half;
    poly = clip(poly, |(s, _)| s);
    poly = clip(poly, |(s, _)| len - s);
    poly = clip(poly, |(_, c)| c + half);
    poly = clip(poly, |(_, c)| half - c);
    if poly.len() < 3 {
        0.0
    } else {
        shoelace(&poly).abs()
    }
}

/// True iff the zone's prism overlaps the corridor (positive-area overlap).
pub fn zone_blocks_corridor(a: Point2, b: Point2, width: f64, zone: &Polygon2) -> bool {
    zone_overlap_area(&Frame::new(a, b, width), zone) > 0.0
}

/// Flight-line height nearest to `p`, found by sampling the 3D line and
/// refining the best sample by ternary search on planar distance.
pub fn sampled_line_height(p: Point2, a: &Building, b: &Building) -> f64 {
    let at = |t: f64| {
        (
            a.center + (b.center - a.center).scale(t),
            a.height + (b.height - a.height) * t,
        )
    };
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for k in 0..LINE_SAMPLES {
        let t = k as f64 / (LINE_SAMPLES - 1) as f64;
        let d = at(t).0.distance(p);
        if d < best_d {
            best_d = d;
            best = k;
        }
    }
    let step = 1.0 / (LINE_SAMPLES - 1) as f64;
    let mut lo = (best as f64 - 1.0).max(0.0) * step;
    let mut hi = ((best as f64 + 1.0) * step).min(1.0);
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if at(m1).0.distance(p) <= at(m2).0.distance(p) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    at((lo + hi) / 2.0).1
}

/// Brute-force line-of-sight decision between rooftops `a` and `b`.
pub fn los_oracle(a: &Building, b: &Building, scene: &[Building], zones: &[NoFlyZone], width: f64) -> bool {
    let frame = Frame::new(a.center, b.center, width);
    if zones.iter().any(|z| zone_overlap_area(&frame, &z.shape) > 0.0) {
        return false;
    }
    for c in scene.iter().filter(|c| c.id != a.id && c.id != b.id) {
        let (s, cr) = frame.local(c.center);
        if frame.box_distance(s, cr) > c.radius {
            continue;
        }
        if c.height > sampled_line_height(c.center, a, b) {
            return false;
        }
    }
    true
}

fn segment_distance_local(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let t = (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
    (p.0 - a.0 - t * dx).hypot(p.1 - a.1 - t * dy)
}

/// Smallest distance of any decision quantity from its threshold over all
/// building pairs: footprint gap to the corridor versus radius, roof versus
/// flight-line height, and vertex-to-boundary distances between each zone and
/// the corridor.
pub fn scene_margin(scene: &Scene, width: f64) -> f64 {
    let bs = &scene.buildings;
    let mut margin = f64::INFINITY;
    for (i, a) in bs.iter().enumerate() {
        for b in &bs[i + 1..] {
            let frame = Frame::new(a.center, b.center, width);
            let corners = frame.corners();
            for z in &scene.no_fly_zones {
                let local: Vec<(f64, f64)> = z.shape.vertices().iter().map(|&p| frame.local(p)).collect();
                for &(s, c) in &local {
                    let inside = (0.0..=frame.len).contains(&s) && c.abs() <= frame.half;
                    let to_edges = if inside {
                        s.min(frame.len - s).min(frame.half - c).min(frame.half + c)
                    } else {
                        frame.box_distance(s, c)
                    };
                    margin = margin.min(to_edges);
                }
                for &corner in &corners {
                    let n = local.len();
                    for k in 0..n {
                        margin = margin.min(segment_distance_local(corner, local[k], local[(k + 1) % n]));
                    }
                }
            }
            for c in bs.iter().filter(|c| c.id != a.id && c.id != b.id) {
                let (s, cr) = frame.local(c.center);
                let gap = frame.box_distance(s, cr);
                margin = margin.min((gap - c.radius).abs());
                if gap <= c.radius {
                    let t = (s / frame.len).clamp(0.0, 1.0);
                    let h = a.height + (b.height - a.height) * t;
                    margin = margin.min((c.height - h).abs());
                }
            }
        }
    }
    margin
}

fn random_zone<R: Rng>(rng: &mut R, id: String, extent: f64) -> NoFlyZone {
    loop {
        let center = Point2::new(rng.gen_range(0.0..extent), rng.gen_range(0.0..extent));
        let k = rng.gen_range(3..=6);
        let mut angles: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
        angles.sort_by(f64::total_cmp);
        let vertices = angles
            .iter()
            .map(|&t| {
                let r = rng.gen_range(3.0..extent / 8.0);
                center + Point2::new(t.cos(), t.sin()).scale(r)
            })
            .collect();
        if let Ok(shape) = Polygon2::new(vertices) {
            return NoFlyZone { id, shape };
        }
    }
}

/// Random scene with up to `max_buildings` rooftops and `max_zones` no-fly zones.
pub fn random_scene<R: Rng>(rng: &mut R, max_buildings: usize, max_zones: usize) -> Scene {
    let extent = 150.0;
    loop {
        let n = rng.gen_range(2..=max_buildings);
        let buildings: Vec<Building> = (0..n)
            .map(|i| {
                Building::new(
                    format!("b{i:02}"),
                    Point2::new(rng.gen_range(0.0..extent), rng.gen_range(0.0..extent)),
                    rng.gen_range(1.0..8.0),
                    rng.gen_range(5.0..50.0),
                    rng.gen_range(0..3),
                )
                .expect("valid building")
            })
            .collect();
        let zones = (0..rng.gen_range(0..=max_zones))
            .map(|i| random_zone(rng, format!("z{i}"), extent))
            .collect();
        if let Ok(scene) = Scene::new(buildings, zones) {
            return scene;
        }
    }
}

/// Like [`random_scene`] but redrawn until every decision clears `margin`.
pub fn random_scene_with_margin<R: Rng>(
    rng: &mut R,
    max_buildings: usize,
    max_zones: usize,
    width: f64,
    margin: f64,
) -> Scene {
    loop {
        let scene = random_scene(rng, max_buildings, max_zones);
        if scene_margin(&scene, width) > margin {
            return scene;
        }
    }
}
