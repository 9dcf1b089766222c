//! Synthetic object detections and the in-cover decision.
//!
//! Detections mirror the record layout of the segmentation front-end
//! (`frame_id`, `detections[]` with class, confidence, pixel box, object id and
//! a camera-frame position). Positions use the optical convention: `x_pos`
//! to the right, `y_pos` down, `z_pos` forward.

use crate::geom::{wrap_angle, Point3};
use crate::world::{ObjectClass, WorldState};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::f64::consts::{PI, TAU};

/// Minimum detection confidence for an object to count as cover.
pub const COVER_CONFIDENCE_MIN: f64 = 0.85;
/// Maximum distance (m) at which the nearest cover object puts the robot in cover.
pub const COVER_DISTANCE_MAX: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub class_id: i64,
    pub class_name: String,
    pub confidence: f64,
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
    pub object_id: i64,
    pub x_pos: f64,
    pub y_pos: f64,
    pub z_pos: f64,
    #[serde(default)]
    pub kpts: Vec<f64>,
}

impl Detection {
    pub fn position(&self) -> Point3 {
        Point3::new(self.x_pos, self.y_pos, self.z_pos)
    }

    /// Bearing in the robot frame, positive to the left.
    pub fn bearing(&self) -> f64 {
        (-self.x_pos).atan2(self.z_pos)
    }

    pub fn class(&self) -> ObjectClass {
        ObjectClass::from_label(&self.class_name)
    }
}

/// One camera frame worth of detections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionFrame {
    pub frame_id: i64,
    pub detections: Vec<Detection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverVerdict {
    pub is_cover: bool,
    /// Distance to the nearest qualifying object; infinite when there is none.
    #[serde(with = "inf_f64")]
    pub cover_distance: f64,
    pub nearest_object_id: Option<i64>,
    /// Robot-frame position of that object.
    pub nearest_position: Option<Point3>,
}

impl CoverVerdict {
    pub fn none() -> Self {
        Self { is_cover: false, cover_distance: f64::INFINITY, nearest_object_id: None, nearest_position: None }
    }

    /// Bearing of the chosen object, positive to the left.
    pub fn nearest_bearing(&self) -> Option<f64> {
        self.nearest_position.map(|p| (-p.x).atan2(p.z))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerceptionConfig {
    /// Full angular field of view centred on the heading.
    pub fov: f64,
    pub max_range: f64,
    pub base_confidence: f64,
    /// Confidence lost at `max_range`, linear in distance.
    pub range_penalty: f64,
    pub occlusion_penalty: f64,
    pub image_width: f64,
    pub image_height: f64,
}

impl Default for PerceptionConfig {
    fn default() -> Self {
        Self {
            fov: TAU,
            max_range: 10.0,
            base_confidence: 1.0,
            range_penalty: 0.3,
            occlusion_penalty: 0.2,
            image_width: 640.0,
            image_height: 480.0,
        }
    }
}

/// Euclidean distance between two points in 3D.
pub fn cover_distance(robot: Point3, obj: Point3) -> f64 {
    let dx = robot.x - obj.x;
    let dy = robot.y - obj.y;
    let dz = robot.z - obj.z;
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Single pass over the detections: keep cover classes with confidence at
/// least [`COVER_CONFIDENCE_MIN`], take the nearest (lowest `object_id` on a
/// tie), and report cover when it lies within [`COVER_DISTANCE_MAX`].
pub fn detect_cover(detections: &[Detection], robot_loc: Point3) -> CoverVerdict {
    let mut best: Option<(f64, i64, Point3)> = None;
    for d in detections {
        if !(d.class().is_cover() && d.confidence >= COVER_CONFIDENCE_MIN) {
            continue;
        }
        let dist = cover_distance(robot_loc, d.position());
        let better = match best {
            None => true,
            Some((bd, bid, _)) => dist < bd || (dist == bd && d.object_id < bid),
        };
        if better {
            best = Some((dist, d.object_id, d.position()));
        }
    }
    match best {
        Some((dist, id, pos)) => CoverVerdict {
            is_cover: dist <= COVER_DISTANCE_MAX,
            cover_distance: dist,
            nearest_object_id: Some(id),
            nearest_position: Some(pos),
        },
        None => CoverVerdict::none(),
    }
}

/// Detections of every object whose centre lies in the field of view, within
/// range and in clear line of sight of the robot's sensor.
pub fn sense(world: &WorldState, cfg: &PerceptionConfig) -> Vec<Detection> {
    let robot = &world.robot;
    let eye = Point3::new(robot.x, robot.y, robot.z + world.config.eye_height);
    let (sin_h, cos_h) = robot.heading.sin_cos();
    let half_fov = 0.5 * cfg.fov;
    let mut out = Vec::new();
    for o in world.objects.iter() {
        let (dx, dy) = (o.position.x - robot.x, o.position.y - robot.y);
        let planar = dx.hypot(dy);
        let bearing = wrap_angle(dy.atan2(dx) - robot.heading);
        if cfg.fov < TAU && bearing.abs() > half_fov {
            continue;
        }
        let forward = dx * cos_h + dy * sin_h;
        let left = -dx * sin_h + dy * cos_h;
        let up = o.position.z - robot.z;
        let dist = (forward * forward + left * left + up * up).sqrt();
        if dist > cfg.max_range {
            continue;
        }
        let target_height = (0.5 * o.obj_height).min(world.config.eye_height);
        let target = Point3::new(o.position.x, o.position.y, o.position.z + target_height);
        if !world.line_of_sight_excluding(eye, target, Some(o.object_id)) {
            continue;
        }
        let partially_occluded = if planar > 1e-9 {
            let (px, py) = (-dy / planar * o.footprint_radius, dx / planar * o.footprint_radius);
            let edges = [
                Point3::new(o.position.x + px, o.position.y + py, target.z),
                Point3::new(o.position.x - px, o.position.y - py, target.z),
            ];
            edges.iter().any(|e| !world.line_of_sight_excluding(eye, *e, Some(o.object_id)))
        } else {
            false
        };
        let mut confidence = cfg.base_confidence - cfg.range_penalty * (dist / cfg.max_range);
        if partially_occluded {
            confidence -= cfg.occlusion_penalty;
        }
        let confidence = confidence.clamp(0.0, 1.0);

        // equirectangular pixel box from the angular extent of the cylinder
        let half_width = if planar > o.footprint_radius { (o.footprint_radius / planar).asin() } else { 0.5 * PI };
        let elev_lo = (up).atan2(planar.max(1e-9));
        let elev_hi = (up + o.obj_height).atan2(planar.max(1e-9));
        let u = |ang: f64| (0.5 - ang / TAU) * cfg.image_width;
        let v = |ang: f64| (0.5 - ang / PI) * cfg.image_height;

        out.push(Detection {
            class_id: o.class.class_id(),
            class_name: o.class.name().to_string(),
            confidence,
            x_min: u(bearing + half_width),
            y_min: v(elev_hi),
            x_max: u(bearing - half_width),
            y_max: v(elev_lo),
            object_id: o.object_id,
            x_pos: -left,
            y_pos: -up,
            z_pos: forward,
            kpts: Vec::new(),
        });
    }
    out
}

/// Serde adapter writing non-finite floats as the strings "inf"/"-inf"/"nan".
pub mod inf_f64 {
    use super::*;

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("bad float {other:?}"))),
            },
        }
    }
}
