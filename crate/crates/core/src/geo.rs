//! Spherical geometry for head/gaze directions on equirectangular video.
//!
//! Axes: `+z` is the initial forward direction, `+y` is up and `+x` is to the
//! viewer's right. Azimuth `phi` is measured from `+z` toward `+x`, polar
//! angle `theta` from `+y`. On the normalized equirectangular image `x` grows
//! with azimuth and wraps at 1, `y` grows downward from the top row, and the
//! forward direction lands on the image center `(0.5, 0.5)`.

use std::f64::consts::{PI, TAU};

use crate::error::{invalid, Result};
use crate::frame::FrameGray;

const QUAT_NORM_TOL: f64 = 1e-6;
const POLE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion {
    pub qx: f64,
    pub qy: f64,
    pub qz: f64,
    pub qw: f64,
}

impl Quaternion {
    /// Validates the unit-norm invariant.
    pub fn new(qx: f64, qy: f64, qz: f64, qw: f64) -> Result<Self> {
        let q = Self { qx, qy, qz, qw };
        let n2 = qx * qx + qy * qy + qz * qz + qw * qw;
        if !n2.is_finite() || (n2 - 1.0).abs() > QUAT_NORM_TOL {
            return invalid(format!("quaternion norm² {n2} is not 1"));
        }
        Ok(q)
    }

    pub const IDENTITY: Quaternion = Quaternion {
        qx: 0.0,
        qy: 0.0,
        qz: 0.0,
        qw: 1.0,
    };
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVector3 {
    pub rx: f64,
    pub ry: f64,
    pub rz: f64,
}

impl UnitVector3 {
    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized(rx: f64, ry: f64, rz: f64) -> Result<Self> {
        let n = (rx * rx + ry * ry + rz * rz).sqrt();
        if !n.is_finite() || n == 0.0 {
            return invalid("cannot normalize a zero or non-finite vector");
        }
        Ok(Self {
            rx: rx / n,
            ry: ry / n,
            rz: rz / n,
        })
    }

    pub fn norm(&self) -> f64 {
        (self.rx * self.rx + self.ry * self.ry + self.rz * self.rz).sqrt()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        let (dx, dy, dz) = (self.rx - other.rx, self.ry - other.ry, self.rz - other.rz);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalAngles {
    /// Azimuth in (−π, π].
    pub phi: f64,
    /// Polar angle from `+y`, in [0, π].
    pub theta: f64,
}

/// A position on the equirectangular image with width and height scaled to 1.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NormalizedPoint {
    pub x: f64,
    pub y: f64,
}

impl NormalizedPoint {
    pub const CENTER: NormalizedPoint = NormalizedPoint { x: 0.5, y: 0.5 };

    pub fn new(x: f64, y: f64) -> Result<Self> {
        let p = Self { x, y };
        if !p.is_valid() {
            return invalid(format!("point ({x}, {y}) outside [0,1)x[0,1]"));
        }
        Ok(p)
    }

    /// Wraps `x` into [0, 1) and clamps `y` into [0, 1].
    pub fn wrapped(x: f64, y: f64) -> Self {
        Self {
            x: wrap_unit(x),
            y: y.clamp(0.0, 1.0),
        }
    }

    pub fn is_valid(&self) -> bool {
        (0.0..1.0).contains(&self.x) && (0.0..=1.0).contains(&self.y)
    }

    pub fn to_pixels(self, width: usize, height: usize) -> (f64, f64) {
        (self.x * width as f64, self.y * height as f64)
    }
}

/// Reduces `x` into [0, 1).
#[inline]
pub fn wrap_unit(x: f64) -> f64 {
    let w = x.rem_euclid(1.0);
    // rem_euclid can round up to exactly 1.0 for tiny negative inputs
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CubeFaceId {
    PosX,
    NegX,
    PosY,
    NegY,
    PosZ,
    NegZ,
}

impl CubeFaceId {
    pub const ALL: [CubeFaceId; 6] = [
        CubeFaceId::PosX,
        CubeFaceId::NegX,
        CubeFaceId::PosY,
        CubeFaceId::NegY,
        CubeFaceId::PosZ,
        CubeFaceId::NegZ,
    ];

    /// (forward, right, up) basis of the face as seen from the sphere center.
    fn basis(self) -> ([f64; 3], [f64; 3], [f64; 3]) {
        match self {
            CubeFaceId::PosZ => ([0., 0., 1.], [1., 0., 0.], [0., 1., 0.]),
            CubeFaceId::NegZ => ([0., 0., -1.], [-1., 0., 0.], [0., 1., 0.]),
            CubeFaceId::PosX => ([1., 0., 0.], [0., 0., -1.], [0., 1., 0.]),
            CubeFaceId::NegX => ([-1., 0., 0.], [0., 0., 1.], [0., 1., 0.]),
            CubeFaceId::PosY => ([0., 1., 0.], [1., 0., 0.], [0., 0., -1.]),
            CubeFaceId::NegY => ([0., -1., 0.], [1., 0., 0.], [0., 0., 1.]),
        }
    }

    /// Direction through the face at face-plane coordinates `(a, b)` in
    /// [−1, 1]², `a` to the right and `b` upward.
    pub fn direction(self, a: f64, b: f64) -> UnitVector3 {
        let (f, r, u) = self.basis();
        let v = [
            f[0] + a * r[0] + b * u[0],
            f[1] + a * r[1] + b * u[1],
            f[2] + a * r[2] + b * u[2],
        ];
        UnitVector3::normalized(v[0], v[1], v[2]).expect("face direction is never zero")
    }
}

/// Head direction from a headset rotation: the rotated forward axis.
pub fn quat_to_unit_vector(q: &Quaternion) -> Result<UnitVector3> {
    let Quaternion { qx, qy, qz, qw } = Quaternion::new(q.qx, q.qy, q.qz, q.qw)?;
    let rx = 2.0 * qx * qz + 2.0 * qy * qw;
    let ry = 2.0 * qy * qz - 2.0 * qx * qw;
    let rz = 1.0 - 2.0 * qx * qx - 2.0 * qy * qy;
    UnitVector3::normalized(rx, ry, rz)
}

pub fn unit_vector_to_angles(r: &UnitVector3) -> SphericalAngles {
    let theta = r.ry.clamp(-1.0, 1.0).acos();
    let phi = if r.rx.hypot(r.rz) < POLE_EPS {
        0.0
    } else {
        let p = r.rx.atan2(r.rz);
        if p <= -PI {
            PI
        } else {
            p
        }
    };
    SphericalAngles { phi, theta }
}

pub fn angles_to_point(a: &SphericalAngles) -> NormalizedPoint {
    NormalizedPoint {
        x: wrap_unit(a.phi / TAU + 0.5),
        y: (a.theta / PI).clamp(0.0, 1.0),
    }
}

pub fn point_to_angles(p: &NormalizedPoint) -> SphericalAngles {
    let mut phi = (p.x - 0.5) * TAU;
    if phi <= -PI {
        phi += TAU;
    }
    SphericalAngles {
        phi,
        theta: p.y * PI,
    }
}

pub fn point_to_unit_vector(p: &NormalizedPoint) -> UnitVector3 {
    let SphericalAngles { phi, theta } = point_to_angles(p);
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    UnitVector3 {
        rx: st * sp,
        ry: ct,
        rz: st * cp,
    }
}

pub fn unit_vector_to_point(r: &UnitVector3) -> NormalizedPoint {
    angles_to_point(&unit_vector_to_angles(r))
}

pub fn quat_to_point(q: &Quaternion) -> Result<NormalizedPoint> {
    Ok(unit_vector_to_point(&quat_to_unit_vector(q)?))
}

/// Shortest signed step from `x1` to `x2` on the periodic x axis, in
/// (−0.5, 0.5]. An exact half-turn resolves to `+0.5`.
#[inline]
pub fn wraparound_dx(x1: f64, x2: f64) -> f64 {
    let d = (x2 - x1).rem_euclid(1.0);
    if d > 0.5 {
        d - 1.0
    } else {
        d
    }
}

/// Gnomonic projection of one cube face out of an equirectangular frame,
/// bilinearly sampled.
pub fn equirect_to_cubeface(
    frame: &FrameGray,
    face: CubeFaceId,
    face_size: usize,
) -> Result<FrameGray> {
    if !frame.is_equirectangular() {
        return invalid(format!(
            "equirectangular frame must be 2:1, got {}x{}",
            frame.width, frame.height
        ));
    }
    if face_size < 8 {
        return invalid(format!("face size {face_size} below minimum 8"));
    }
    let max = f64::from(frame.max_value());
    let s = face_size as f64;
    let mut values = Vec::with_capacity(face_size * face_size);
    for row in 0..face_size {
        let b = 1.0 - 2.0 * (row as f64 + 0.5) / s;
        for col in 0..face_size {
            let a = 2.0 * (col as f64 + 0.5) / s - 1.0;
            let p = unit_vector_to_point(&face.direction(a, b));
            let (px, py) = p.to_pixels(frame.width, frame.height);
            let v = frame.sample_wrapped(px, py).round().clamp(0.0, max);
            values.push(v as u16);
        }
    }
    FrameGray::new(face_size, face_size, frame.bit_depth, values)
}
