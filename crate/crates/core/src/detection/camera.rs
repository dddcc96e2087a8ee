//! Downward-looking pinhole camera.
//!
//! Camera axes relative to the body: image right is body -y, image down is
//! body -x (the top of the frame faces forward), and the optical axis is
//! body -z.

use core::f64::consts::FRAC_PI_3;

use serde::{Deserialize, Serialize};

use super::boxes::BBox;
use crate::dynamics::QuadState;
use crate::error::{Error, Result};
use crate::geom::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraModel {
    pub width_px: u32,
    pub height_px: u32,
    /// Vertical field of view, rad.
    pub vertical_fov: f64,
}

impl Default for CameraModel {
    fn default() -> Self {
        Self {
            width_px: 640,
            height_px: 480,
            vertical_fov: FRAC_PI_3,
        }
    }
}

impl CameraModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.vertical_fov > 0.0 && self.vertical_fov < core::f64::consts::PI) {
            return Err(Error::InvalidConfig(
                "camera.vertical_fov must lie in (0, pi)".into(),
            ));
        }
        if self.width_px == 0 || self.height_px == 0 {
            return Err(Error::InvalidConfig(
                "camera resolution must be non-zero".into(),
            ));
        }
        Ok(())
    }

    /// Focal length in pixels, from the vertical field of view.
    pub fn focal_px(&self) -> f64 {
        (self.height_px as f64 / 2.0) / libm::tan(self.vertical_fov / 2.0)
    }

    /// Half-angle across the image width.
    pub fn horizontal_half_fov(&self) -> f64 {
        libm::atan(
            self.width_px as f64 / self.height_px as f64 * libm::tan(self.vertical_fov / 2.0),
        )
    }

    /// Body-frame vector to camera-frame coordinates.
    pub fn body_to_camera(v: Vec3) -> Vec3 {
        Vec3::new(-v.y, -v.x, -v.z)
    }

    pub fn camera_to_body(v: Vec3) -> Vec3 {
        Vec3::new(-v.y, -v.x, -v.z)
    }

    /// Projects a world point to normalized image coordinates, plus its depth
    /// along the optical axis. `None` when the point is behind the camera.
    pub fn project(&self, point: Vec3, drone: &QuadState) -> Option<(f64, f64, f64)> {
        let body = drone
            .attitude
            .rotation()
            .apply_inverse(point - drone.position);
        let c = Self::body_to_camera(body);
        if c.z <= 0.0 {
            return None;
        }
        let f = self.focal_px();
        let (w, h) = (self.width_px as f64, self.height_px as f64);
        let u = w / 2.0 + f * c.x / c.z;
        let v = h / 2.0 + f * c.y / c.z;
        Some((u / w, v / h, c.z))
    }

    /// World-frame direction of the ray through a normalized image point.
    pub fn pixel_ray(&self, c_x: f64, c_y: f64, drone: &QuadState) -> Vec3 {
        let f = self.focal_px();
        let (w, h) = (self.width_px as f64, self.height_px as f64);
        let cam = Vec3::new((c_x * w - w / 2.0) / f, (c_y * h - h / 2.0) / f, 1.0);
        drone.attitude.rotation().apply(Self::camera_to_body(cam))
    }
}

/// A victim as seen by the camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    /// Centered on the projection of the victim's center; sized by the
    /// projected footprint extents.
    pub bbox: BBox,
    /// Pinhole apparent height, px.
    pub apparent_px: f64,
    /// Camera-to-victim distance, m.
    pub slant: f64,
}

/// Projects a victim lying on the ground (length along world x, width half
/// the length along world y). `None` when the victim center is off-frame.
pub fn project_victim(
    victim_x: f64,
    victim_y: f64,
    victim_height: f64,
    drone: &QuadState,
    cam: &CameraModel,
) -> Option<Projection> {
    let center = Vec3::new(victim_x, victim_y, 0.0);
    let (c_x, c_y, _) = cam.project(center, drone)?;
    if !(0.0..=1.0).contains(&c_x) || !(0.0..=1.0).contains(&c_y) {
        return None;
    }
    let (hl, hw) = (victim_height / 2.0, victim_height / 4.0);
    let mut u = (f64::INFINITY, f64::NEG_INFINITY);
    let mut v = (f64::INFINITY, f64::NEG_INFINITY);
    for (dx, dy) in [(-hl, -hw), (-hl, hw), (hl, -hw), (hl, hw)] {
        let (pu, pv, _) = cam.project(center + Vec3::new(dx, dy, 0.0), drone)?;
        u = (u.0.min(pu), u.1.max(pu));
        v = (v.0.min(pv), v.1.max(pv));
    }
    let slant = (center - drone.position).norm();
    Some(Projection {
        bbox: BBox::new(c_x, c_y, u.1 - u.0, v.1 - v.0),
        apparent_px: cam.focal_px() * victim_height / slant,
        slant,
    })
}
