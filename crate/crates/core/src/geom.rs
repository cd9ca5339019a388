//! Shared geometric value types: vectors, point clouds, bounding boxes and
//! the normalization transform that puts every scene on a unit diagonal.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(x: f64, y: f64, z: f64) -> Vec3 {
        Vec3 { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm2().sqrt()
    }

    pub fn normalized(self) -> Result<Vec3> {
        let n = self.norm();
        if n <= 0.0 || !n.is_finite() {
            return Err(Error::Degenerate("cannot normalize zero vector".into()));
        }
        Ok(self / n)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn min_comp(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    pub fn max_comp(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 3]) -> Vec3 {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Unstructured input samples. Point indices 0..n-1 are stable identities
/// used by ID maps, visibility labels and the tetrahedralization.
#[derive(Debug, Clone, Default)]
pub struct PointCloud {
    pub positions: Vec<Vec3>,
    pub colors: Option<Vec<[u8; 3]>>,
}

impl PointCloud {
    pub fn from_positions(positions: Vec<Vec3>) -> PointCloud {
        PointCloud {
            positions,
            colors: None,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Indexed triangle surface. Triangles are oriented; for reconstruction
/// output the normal `(b-a)x(c-a)` points from inner space toward outer.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
}

impl TriangleMesh {
    pub fn triangle_vertices(&self, i: usize) -> (Vec3, Vec3, Vec3) {
        let [a, b, c] = self.triangles[i];
        (
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        )
    }

    pub fn triangle_area(&self, i: usize) -> f64 {
        let (a, b, c) = self.triangle_vertices(i);
        (b - a).cross(c - a).norm() * 0.5
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len())
            .map(|i| self.triangle_area(i))
            .sum()
    }

    /// Sum of area-weighted normals; zero for a closed surface.
    pub fn normal_flux(&self) -> Vec3 {
        let mut flux = Vec3::ZERO;
        for i in 0..self.triangles.len() {
            let (a, b, c) = self.triangle_vertices(i);
            flux = flux + (b - a).cross(c - a) * 0.5;
        }
        flux
    }

    /// Signed volume enclosed by the (oriented, closed) surface via the
    /// divergence theorem.
    pub fn signed_volume(&self) -> f64 {
        let mut vol = 0.0;
        for i in 0..self.triangles.len() {
            let (a, b, c) = self.triangle_vertices(i);
            vol += a.dot(b.cross(c)) / 6.0;
        }
        vol
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }
}

/// Axis-aligned bounding box, min <= max componentwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn diagonal(&self) -> f64 {
        (self.max - self.min).norm()
    }

    pub fn contains(&self, p: Vec3) -> bool {
        p.x >= self.min.x
            && p.y >= self.min.y
            && p.z >= self.min.z
            && p.x <= self.max.x
            && p.y <= self.max.y
            && p.z <= self.max.z
    }
}

/// Maps normalized coordinates (unit AABB diagonal, centered at origin)
/// back to the original scene frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormTransform {
    pub translation: Vec3,
    pub scale: f64,
}

impl NormTransform {
    pub const IDENTITY: NormTransform = NormTransform {
        translation: Vec3::ZERO,
        scale: 1.0,
    };

    /// normalized -> original
    pub fn denormalize(&self, p: Vec3) -> Vec3 {
        p * self.scale + self.translation
    }

    /// original -> normalized
    pub fn normalize(&self, p: Vec3) -> Vec3 {
        (p - self.translation) / self.scale
    }
}

pub fn compute_aabb(cloud: &PointCloud) -> Result<Aabb> {
    let mut iter = cloud.positions.iter();
    let first = *iter
        .next()
        .ok_or_else(|| Error::EmptyInput("empty input".into()))?;
    let mut min = first;
    let mut max = first;
    for &p in iter {
        min = min.min_comp(p);
        max = max.max_comp(p);
    }
    Ok(Aabb { min, max })
}

/// Center the cloud at its AABB center and scale so the AABB diagonal is 1.
/// The returned transform maps normalized coordinates back to the original.
pub fn normalize_cloud(cloud: &PointCloud) -> Result<(PointCloud, NormTransform)> {
    let bbox = compute_aabb(cloud)?;
    let diag = bbox.diagonal();
    if diag <= 0.0 {
        return Err(Error::Degenerate("degenerate extent".into()));
    }
    let center = bbox.center();
    let tf = NormTransform {
        translation: center,
        scale: diag,
    };
    let positions = cloud.positions.iter().map(|&p| tf.normalize(p)).collect();
    Ok((
        PointCloud {
            positions,
            colors: cloud.colors.clone(),
        },
        tf,
    ))
}
