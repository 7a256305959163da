//! Point, segment and sphere predicates.
//!
//! All lengths are in meters.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vector3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vector3 {
    pub const ZERO: Vector3 = Vector3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn dot(self, other: Vector3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    #[inline]
    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vector3 {
    type Output = Vector3;
    #[inline]
    fn add(self, rhs: Vector3) -> Vector3 {
        Vector3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl AddAssign for Vector3 {
    #[inline]
    fn add_assign(&mut self, rhs: Vector3) {
        *self = *self + rhs;
    }
}

impl Sub for Vector3 {
    type Output = Vector3;
    #[inline]
    fn sub(self, rhs: Vector3) -> Vector3 {
        Vector3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for Vector3 {
    type Output = Vector3;
    #[inline]
    fn mul(self, s: f64) -> Vector3 {
        Vector3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vector3 {
    type Output = Vector3;
    fn neg(self) -> Vector3 {
        Vector3::new(-self.x, -self.y, -self.z)
    }
}

/// A perfectly absorbing sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereReceiver {
    pub id: usize,
    pub center: Vector3,
    pub radius: f64,
}

impl SphereReceiver {
    /// Returns `None` unless the radius is positive and the center finite.
    pub fn new(id: usize, center: Vector3, radius: f64) -> Option<Self> {
        (radius > 0.0 && radius.is_finite() && center.is_finite()).then_some(Self {
            id,
            center,
            radius,
        })
    }

    /// Distance from the receiver center.
    #[inline]
    pub fn center_distance(&self, p: Vector3) -> f64 {
        (p - self.center).norm()
    }
}

/// `|p - center| - radius`: positive outside, zero on the surface, negative inside.
#[inline]
pub fn signed_surface_distance(p: Vector3, rx: &SphereReceiver) -> f64 {
    rx.center_distance(p) - rx.radius
}

/// Strict containment. Surface points are outside.
#[inline]
pub fn is_inside(p: Vector3, rx: &SphereReceiver) -> bool {
    rx.center_distance(p) < rx.radius
}

/// Smallest `t` in `[0, 1]` at which `p0 + t (p1 - p0)` lies in the closed ball,
/// or `None` if the segment misses it.
pub fn segment_entry_parameter(p0: Vector3, p1: Vector3, rx: &SphereReceiver) -> Option<f64> {
    let f = p0 - rx.center;
    let c = f.norm_squared() - rx.radius * rx.radius;
    if c <= 0.0 {
        return Some(0.0);
    }
    let d = p1 - p0;
    let a = d.norm_squared();
    if a == 0.0 {
        return None;
    }
    let b = f.dot(d);
    // Start is outside, so both roots share a sign; moving away means no hit.
    if b >= 0.0 {
        return None;
    }
    let disc = b * b - a * c;
    if disc < 0.0 {
        return None;
    }
    // Near root via the cancellation-free form c / (-b + sqrt(disc)).
    let t = c / (-b + disc.sqrt());
    (t <= 1.0).then_some(t)
}

/// Whether the closed segment `[p0, p1]` touches the closed ball of `rx`.
#[inline]
pub fn segment_intersects_sphere(p0: Vector3, p1: Vector3, rx: &SphereReceiver) -> bool {
    segment_entry_parameter(p0, p1, rx).is_some()
}
