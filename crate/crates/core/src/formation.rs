//! Formation geometry, swarm and wind descriptions, and the per-drone power model.
//!
//! Power is a product of four terms:
//!
//! ```text
//! P = base_power · (1 + payload_coeff · payload) · position_factor[pattern][slot]
//!     · (1 + wind_factor(pattern, θ) · |wind|)
//! ```
//!
//! where θ ∈ [0°, 180°] is the angle between the heading and the direction
//! the wind blows *from* (0° is a headwind). `wind_factor` interpolates
//! linearly between the configured angle bins.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::FormationError;
use crate::geometry::Point2;

/// Largest swarm the formation geometries are defined for.
pub const MAX_SWARM: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FormationPattern {
    Column,
    Front,
    Echelon,
    Vee,
    Diamond,
}

impl FormationPattern {
    /// All patterns in tie-break order.
    pub const ALL: [FormationPattern; 5] = [
        FormationPattern::Column,
        FormationPattern::Front,
        FormationPattern::Echelon,
        FormationPattern::Vee,
        FormationPattern::Diamond,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FormationPattern::Column => "Column",
            FormationPattern::Front => "Front",
            FormationPattern::Echelon => "Echelon",
            FormationPattern::Vee => "Vee",
            FormationPattern::Diamond => "Diamond",
        }
    }
}

impl fmt::Display for FormationPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FormationPattern {
    type Err = FormationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FormationPattern::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| FormationError::InvalidArgument(format!("unknown formation `{s}`")))
    }
}

/// Slot position relative to the leader: `along` the heading (negative is
/// behind) and `cross` to the left of it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlotOffset {
    pub along: f64,
    pub cross: f64,
}

impl SlotOffset {
    pub const fn new(along: f64, cross: f64) -> Self {
        Self { along, cross }
    }

    /// World-frame displacement for a unit `heading`.
    pub fn rotate(self, heading: Point2) -> Point2 {
        let left = Point2::new(-heading.y, heading.x);
        heading.scale(self.along) + left.scale(self.cross)
    }

    pub fn distance(self, other: SlotOffset) -> f64 {
        (self.along - other.along).hypot(self.cross - other.cross)
    }

    pub fn lerp(self, other: SlotOffset, s: f64) -> SlotOffset {
        SlotOffset::new(
            self.along + (other.along - self.along) * s,
            self.cross + (other.cross - self.cross) * s,
        )
    }
}

fn check_swarm_size(n: usize, spacing: f64) -> Result<(), FormationError> {
    if n == 0 || n > MAX_SWARM {
        return Err(FormationError::InvalidArgument(format!(
            "swarm size must be in 1..={MAX_SWARM}, got {n}"
        )));
    }
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(FormationError::InvalidArgument(format!(
            "spacing must be positive, got {spacing}"
        )));
    }
    Ok(())
}

/// Symmetric lateral rank of slot `i`: 0, +1, −1, +2, −2, …
fn alternating_rank(i: usize) -> f64 {
    let r = i.div_ceil(2) as f64;
    if i % 2 == 1 {
        r
    } else {
        -r
    }
}

/// Leader-centered slot offsets for `n` drones; slot 0 is the leader at the origin.
pub fn slot_offsets(pattern: FormationPattern, n: usize, spacing: f64) -> Result<Vec<SlotOffset>, FormationError> {
    check_swarm_size(n, spacing)?;
    let diag = std::f64::consts::FRAC_1_SQRT_2 * spacing;
    let offsets = (0..n)
        .map(|i| match pattern {
            FormationPattern::Column => SlotOffset::new(-(i as f64) * spacing, 0.0),
            FormationPattern::Front => SlotOffset::new(0.0, alternating_rank(i) * spacing),
            FormationPattern::Echelon => SlotOffset::new(-(i as f64) * spacing, i as f64 * spacing),
            FormationPattern::Vee => {
                // Followers alternate between the left and right trailing arms.
                let rank = alternating_rank(i);
                SlotOffset::new(-rank.abs() * diag, rank * diag)
            }
            FormationPattern::Diamond => {
                const RING: [(f64, f64); 9] = [
                    (0.0, 0.0),
                    (0.0, 1.0),
                    (0.0, -1.0),
                    (-1.0, 0.0),
                    (1.0, 0.0),
                    (-1.0, 1.0),
                    (-1.0, -1.0),
                    (1.0, 1.0),
                    (1.0, -1.0),
                ];
                let (a, c) = RING[i];
                SlotOffset::new(a * spacing, c * spacing)
            }
        })
        .collect();
    Ok(offsets)
}

/// Lateral extent of the formation plus one spacing of margin on each side.
pub fn formation_width(pattern: FormationPattern, n: usize, spacing: f64) -> Result<f64, FormationError> {
    let offsets = slot_offsets(pattern, n, spacing)?;
    let (lo, hi) = offsets.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), o| {
        (lo.min(o.cross), hi.max(o.cross))
    });
    Ok(hi - lo + 2.0 * spacing)
}

/// Widest [`formation_width`] over all five patterns.
pub fn max_formation_width(n: usize, spacing: f64) -> Result<f64, FormationError> {
    FormationPattern::ALL
        .into_iter()
        .map(|p| formation_width(p, n, spacing))
        .try_fold(0.0_f64, |acc, w| Ok(acc.max(w?)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroneSpec {
    pub id: String,
    pub payload: f64,
    pub battery_capacity: f64,
    #[serde(default = "default_reserve")]
    pub reserve_fraction: f64,
}

fn default_reserve() -> f64 {
    0.1
}

impl DroneSpec {
    pub fn reserve(&self) -> f64 {
        self.reserve_fraction * self.battery_capacity
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwarmSpec {
    pub drones: Vec<DroneSpec>,
    pub spacing: f64,
    pub cruise_speed: f64,
}

impl SwarmSpec {
    pub fn validate(&self) -> Result<(), FormationError> {
        check_swarm_size(self.drones.len(), self.spacing)?;
        if !(self.cruise_speed.is_finite() && self.cruise_speed > 0.0) {
            return Err(FormationError::InvalidArgument(format!(
                "cruise speed must be positive, got {}",
                self.cruise_speed
            )));
        }
        let mut ids = std::collections::BTreeSet::new();
        for d in &self.drones {
            if !ids.insert(d.id.as_str()) {
                return Err(FormationError::InvalidArgument(format!(
                    "duplicate drone id `{}`",
                    d.id
                )));
            }
            if !(d.payload.is_finite() && d.payload >= 0.0) {
                return Err(FormationError::InvalidArgument(format!(
                    "drone {}: negative payload",
                    d.id
                )));
            }
            if !(d.battery_capacity.is_finite() && d.battery_capacity > 0.0) {
                return Err(FormationError::InvalidArgument(format!(
                    "drone {}: battery capacity must be positive",
                    d.id
                )));
            }
            if !(0.0..1.0).contains(&d.reserve_fraction) {
                return Err(FormationError::InvalidArgument(format!(
                    "drone {}: reserve fraction must be in [0, 1)",
                    d.id
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.drones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.drones.is_empty()
    }

    pub fn capacities(&self) -> Vec<f64> {
        self.drones.iter().map(|d| d.battery_capacity).collect()
    }
}

/// Piecewise-constant wind, `(start_time, velocity)` with the first entry at t = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct WindSchedule {
    entries: Vec<(f64, Point2)>,
}

impl WindSchedule {
    pub fn new(entries: Vec<(f64, Point2)>) -> Result<Self, FormationError> {
        match entries.first() {
            Some((t, _)) if *t == 0.0 => {}
            _ => {
                return Err(FormationError::InvalidArgument(
                    "wind schedule must start with an entry at t=0".into(),
                ))
            }
        }
        if entries
            .windows(2)
            .any(|w| w[1].0.partial_cmp(&w[0].0) != Some(Ordering::Greater))
        {
            return Err(FormationError::InvalidArgument(
                "wind schedule start times must be strictly increasing".into(),
            ));
        }
        if entries.iter().any(|(t, w)| !t.is_finite() || !w.is_finite()) {
            return Err(FormationError::InvalidArgument("non-finite wind entry".into()));
        }
        Ok(Self { entries })
    }

    pub fn constant(wind: Point2) -> Self {
        Self {
            entries: vec![(0.0, wind)],
        }
    }

    pub fn calm() -> Self {
        Self::constant(Point2::new(0.0, 0.0))
    }

    pub fn entries(&self) -> &[(f64, Point2)] {
        &self.entries
    }

    pub fn wind_at(&self, t: f64) -> Point2 {
        let idx = self.entries.partition_point(|(start, _)| *start <= t);
        self.entries[idx.saturating_sub(1)].1
    }

    /// Splits `[start, end)` at interval boundaries into `(from, to, wind)` pieces.
    pub fn pieces(&self, start: f64, end: f64) -> Vec<(f64, f64, Point2)> {
        let mut out = Vec::new();
        let first = self.entries.partition_point(|(s, _)| *s <= start).saturating_sub(1);
        let mut t = start;
        for i in first..self.entries.len() {
            let next = self.entries.get(i + 1).map_or(f64::INFINITY, |e| e.0);
            let to = next.min(end);
            if to > t {
                out.push((t, to, self.entries[i].1));
                t = to;
            }
            if next >= end {
                break;
            }
        }
        out
    }
}

/// The swarm document: drone roster, formation spacing, speed and wind.
#[derive(Debug, Clone, PartialEq)]
pub struct SwarmFile {
    pub swarm: SwarmSpec,
    pub wind: WindSchedule,
}

#[derive(Serialize, Deserialize)]
struct SwarmDoc {
    drones: Vec<DroneSpec>,
    spacing: f64,
    cruise_speed: f64,
    #[serde(default)]
    wind: Vec<[f64; 3]>,
}

impl SwarmFile {
    pub fn from_json(text: &str) -> Result<Self, FormationError> {
        let doc: SwarmDoc =
            serde_json::from_str(text).map_err(|e| FormationError::InvalidArgument(format!("swarm document: {e}")))?;
        let swarm = SwarmSpec {
            drones: doc.drones,
            spacing: doc.spacing,
            cruise_speed: doc.cruise_speed,
        };
        swarm.validate()?;
        let wind = if doc.wind.is_empty() {
            WindSchedule::calm()
        } else {
            WindSchedule::new(doc.wind.iter().map(|&[t, x, y]| (t, Point2::new(x, y))).collect())?
        };
        Ok(Self { swarm, wind })
    }

    pub fn to_json(&self) -> String {
        let doc = SwarmDoc {
            drones: self.swarm.drones.clone(),
            spacing: self.swarm.spacing,
            cruise_speed: self.swarm.cruise_speed,
            wind: self.wind.entries.iter().map(|(t, w)| [*t, w.x, w.y]).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("swarm serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyModelConfig {
    pub base_power: f64,
    pub payload_coeff: f64,
    pub position_factors: BTreeMap<FormationPattern, BTreeMap<usize, f64>>,
    /// Per pattern, `(relative angle in degrees, factor per m/s)` sorted by angle.
    pub wind_response: BTreeMap<FormationPattern, Vec<(f64, f64)>>,
}

pub const DEFAULT_ENERGY_CONFIG: &str = include_str!("../data/energy_default.json");

impl Default for EnergyModelConfig {
    fn default() -> Self {
        Self::from_json(DEFAULT_ENERGY_CONFIG).expect("shipped energy config is valid")
    }
}

impl EnergyModelConfig {
    pub fn from_json(text: &str) -> Result<Self, FormationError> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| FormationError::Config(format!("energy config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks positivity and full coverage of patterns, slots and angles.
    pub fn validate(&self) -> Result<(), FormationError> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.base_power) {
            return Err(FormationError::Config("base_power must be positive".into()));
        }
        if !(self.payload_coeff.is_finite() && self.payload_coeff >= 0.0) {
            return Err(FormationError::Config("payload_coeff must be non-negative".into()));
        }
        for p in FormationPattern::ALL {
            let slots = self
                .position_factors
                .get(&p)
                .ok_or_else(|| FormationError::Config(format!("no position factors for {p}")))?;
            for s in 0..MAX_SWARM {
                match slots.get(&s) {
                    Some(&f) if positive(f) => {}
                    Some(_) => return Err(FormationError::Config(format!("{p} slot {s}: factor must be positive"))),
                    None => return Err(FormationError::Config(format!("{p}: missing slot {s}"))),
                }
            }
            let bins = self
                .wind_response
                .get(&p)
                .ok_or_else(|| FormationError::Config(format!("no wind response for {p}")))?;
            if bins.first().map(|b| b.0) != Some(0.0) || bins.last().map(|b| b.0) != Some(180.0) {
                return Err(FormationError::Config(format!(
                    "{p}: wind bins must span 0..180 degrees"
                )));
            }
            if bins
                .windows(2)
                .any(|w| w[1].0.partial_cmp(&w[0].0) != Some(Ordering::Greater))
            {
                return Err(FormationError::Config(format!("{p}: wind bin angles must increase")));
            }
            if bins.iter().any(|b| !positive(b.1)) {
                return Err(FormationError::Config(format!("{p}: wind factors must be positive")));
            }
        }
        Ok(())
    }

    pub fn position_factor(&self, pattern: FormationPattern, slot: usize) -> Result<f64, FormationError> {
        self.position_factors
            .get(&pattern)
            .and_then(|m| m.get(&slot))
            .copied()
            .ok_or_else(|| FormationError::Config(format!("no position factor for {pattern} slot {slot}")))
    }

    /// Wind sensitivity per m/s at `angle` degrees off the heading.
    pub fn wind_factor(&self, pattern: FormationPattern, angle: f64) -> Result<f64, FormationError> {
        let bins = self
            .wind_response
            .get(&pattern)
            .filter(|b| !b.is_empty())
            .ok_or_else(|| FormationError::Config(format!("no wind response for {pattern}")))?;
        let angle = angle.clamp(0.0, 180.0);
        let i = bins.partition_point(|b| b.0 <= angle);
        if i == 0 {
            return Ok(bins[0].1);
        }
        if i == bins.len() {
            return Ok(bins[i - 1].1);
        }
        let (a0, f0) = bins[i - 1];
        let (a1, f1) = bins[i];
        Ok(f0 + (f1 - f0) * (angle - a0) / (a1 - a0))
    }

    /// Multiplies every power term by `k`: the base power and all factors.
    pub fn scaled(&self, k: f64) -> Self {
        let mut out = self.clone();
        out.base_power *= k;
        for m in out.position_factors.values_mut() {
            for f in m.values_mut() {
                *f *= k;
            }
        }
        out
    }
}

/// Angle in degrees between `heading` and the direction the wind comes from.
///
/// 0° is a headwind, 180° a tailwind. Calm air reports 0°.
pub fn relative_wind_angle(wind: Point2, heading: Point2) -> f64 {
    let speed = wind.norm();
    let h = heading.norm();
    if speed == 0.0 || h == 0.0 {
        return 0.0;
    }
    let cos = -(wind.dot(heading)) / (speed * h);
    cos.clamp(-1.0, 1.0).acos().to_degrees()
}

pub fn drone_power(
    drone: &DroneSpec,
    slot: usize,
    pattern: FormationPattern,
    wind: Point2,
    heading: Point2,
    cfg: &EnergyModelConfig,
) -> Result<f64, FormationError> {
    let position = cfg.position_factor(pattern, slot)?;
    let wind_term = 1.0 + cfg.wind_factor(pattern, relative_wind_angle(wind, heading))? * wind.norm();
    Ok(cfg.base_power * (1.0 + cfg.payload_coeff * drone.payload) * position * wind_term)
}

/// Power draw of every drone, drone `i` flying slot `i`.
pub fn swarm_power(
    swarm: &SwarmSpec,
    pattern: FormationPattern,
    wind: Point2,
    heading: Point2,
    cfg: &EnergyModelConfig,
) -> Result<Vec<f64>, FormationError> {
    swarm
        .drones
        .iter()
        .enumerate()
        .map(|(slot, d)| drone_power(d, slot, pattern, wind, heading, cfg))
        .collect()
}

/// Pattern minimizing the largest per-drone power; ties go to the earlier pattern.
pub fn best_formation(
    swarm: &SwarmSpec,
    wind: Point2,
    heading: Point2,
    cfg: &EnergyModelConfig,
) -> Result<FormationPattern, FormationError> {
    let mut best: Option<(FormationPattern, f64)> = None;
    for p in FormationPattern::ALL {
        let worst = swarm_power(swarm, p, wind, heading, cfg)?
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        if best.is_none_or(|(_, b)| worst < b) {
            best = Some((p, worst));
        }
    }
    best.map(|(p, _)| p)
        .ok_or_else(|| FormationError::InvalidArgument("empty swarm".into()))
}

/// Per-drone energy to fly `length` meters in a fixed `pattern`, departing at `depart`.
pub fn segment_energy(
    swarm: &SwarmSpec,
    length: f64,
    pattern: FormationPattern,
    wind: &WindSchedule,
    depart: f64,
    heading: Point2,
    cfg: &EnergyModelConfig,
) -> Result<Vec<f64>, FormationError> {
    if !(length.is_finite() && length > 0.0) {
        return Err(FormationError::InvalidArgument(format!(
            "segment length must be positive, got {length}"
        )));
    }
    let end = depart + length / swarm.cruise_speed;
    let mut energy = vec![0.0; swarm.len()];
    for (t0, t1, w) in wind.pieces(depart, end) {
        let power = swarm_power(swarm, pattern, w, heading, cfg)?;
        for (e, p) in energy.iter_mut().zip(power) {
            *e += p * (t1 - t0);
        }
    }
    Ok(energy)
}
