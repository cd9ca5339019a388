//! Analytic ground-truth meshes for tests and synthetic datasets: sphere,
//! box, torus, two offset planes, and a cage of thin bars. All but the
//! two-plane scene are closed surfaces with outward orientation.

use crate::error::{Error, Result};
use crate::geom::{TriangleMesh, Vec3};
use std::collections::HashMap;

/// Icosphere: subdivided icosahedron projected onto the sphere.
pub fn sphere_mesh(center: Vec3, radius: f64, subdivisions: u32) -> Result<TriangleMesh> {
    if radius <= 0.0 {
        return Err(Error::InvalidParameter("radius must be positive".into()));
    }
    if subdivisions > 7 {
        return Err(Error::InvalidParameter("too many subdivisions".into()));
    }
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vec3> = [
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ]
    .iter()
    .map(|&a| Vec3::from_array(a).normalized().unwrap())
    .collect();
    let mut triangles: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut midpoint: HashMap<(u32, u32), u32> = HashMap::new();
        let mut next = Vec::with_capacity(triangles.len() * 4);
        for &[a, b, c] in &triangles {
            let mut mid = |u: u32, v: u32, verts: &mut Vec<Vec3>| -> u32 {
                let key = (u.min(v), u.max(v));
                *midpoint.entry(key).or_insert_with(|| {
                    let m = ((verts[u as usize] + verts[v as usize]) * 0.5)
                        .normalized()
                        .unwrap();
                    verts.push(m);
                    (verts.len() - 1) as u32
                })
            };
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            next.push([a, ab, ca]);
            next.push([b, bc, ab]);
            next.push([c, ca, bc]);
            next.push([ab, bc, ca]);
        }
        triangles = next;
    }
    let vertices = vertices
        .into_iter()
        .map(|v| center + v * radius)
        .collect();
    Ok(TriangleMesh {
        vertices,
        triangles,
    })
}

/// Axis-aligned closed box, outward orientation.
pub fn box_mesh(min: Vec3, max: Vec3) -> Result<TriangleMesh> {
    if !(min.x < max.x && min.y < max.y && min.z < max.z) {
        return Err(Error::InvalidParameter("box min must be < max".into()));
    }
    let mut vertices = Vec::with_capacity(8);
    for i in 0..8u32 {
        vertices.push(Vec3::new(
            if i & 1 != 0 { max.x } else { min.x },
            if i & 2 != 0 { max.y } else { min.y },
            if i & 4 != 0 { max.z } else { min.z },
        ));
    }
    // faces with outward normals
    let triangles = vec![
        [0, 2, 3],
        [0, 3, 1], // z = min (normal -z)
        [4, 5, 7],
        [4, 7, 6], // z = max (+z)
        [0, 1, 5],
        [0, 5, 4], // y = min (-y)
        [2, 6, 7],
        [2, 7, 3], // y = max (+y)
        [0, 4, 6],
        [0, 6, 2], // x = min (-x)
        [1, 3, 7],
        [1, 7, 5], // x = max (+x)
    ];
    Ok(TriangleMesh {
        vertices,
        triangles,
    })
}

/// Closed torus in the xy-plane: major radius `big_r`, tube radius `small_r`.
pub fn torus_mesh(big_r: f64, small_r: f64, n_major: u32, n_minor: u32) -> Result<TriangleMesh> {
    if !(big_r > small_r && small_r > 0.0) {
        return Err(Error::InvalidParameter(
            "torus requires big_r > small_r > 0".into(),
        ));
    }
    if n_major < 3 || n_minor < 3 {
        return Err(Error::InvalidParameter("torus needs >= 3 segments".into()));
    }
    let mut vertices = Vec::with_capacity((n_major * n_minor) as usize);
    for i in 0..n_major {
        let u = 2.0 * std::f64::consts::PI * i as f64 / n_major as f64;
        for j in 0..n_minor {
            let v = 2.0 * std::f64::consts::PI * j as f64 / n_minor as f64;
            let ring = big_r + small_r * v.cos();
            vertices.push(Vec3::new(
                ring * u.cos(),
                ring * u.sin(),
                small_r * v.sin(),
            ));
        }
    }
    let mut triangles = Vec::with_capacity((n_major * n_minor * 2) as usize);
    let idx = |i: u32, j: u32| (i % n_major) * n_minor + (j % n_minor);
    for i in 0..n_major {
        for j in 0..n_minor {
            let a = idx(i, j);
            let b = idx(i + 1, j);
            let c = idx(i + 1, j + 1);
            let d = idx(i, j + 1);
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    Ok(TriangleMesh {
        vertices,
        triangles,
    })
}

/// Two square patches normal to z: a small near plane partially covering a
/// larger far plane. Open surface, used for occlusion tests.
pub fn two_planes_mesh(near_z: f64, near_half: f64, far_z: f64, far_half: f64) -> TriangleMesh {
    let square = |z: f64, half: f64| -> (Vec<Vec3>, Vec<[u32; 3]>) {
        (
            vec![
                Vec3::new(-half, -half, z),
                Vec3::new(half, -half, z),
                Vec3::new(half, half, z),
                Vec3::new(-half, half, z),
            ],
            vec![[0, 1, 2], [0, 2, 3]],
        )
    };
    let (mut vertices, mut triangles) = square(near_z, near_half);
    let (fv, ft) = square(far_z, far_half);
    let off = vertices.len() as u32;
    vertices.extend(fv);
    triangles.extend(ft.iter().map(|t| [t[0] + off, t[1] + off, t[2] + off]));
    TriangleMesh {
        vertices,
        triangles,
    }
}

fn append(dst: &mut TriangleMesh, src: TriangleMesh) {
    let off = dst.vertices.len() as u32;
    dst.vertices.extend(src.vertices);
    dst.triangles
        .extend(src.triangles.iter().map(|t| [t[0] + off, t[1] + off, t[2] + off]));
}

/// Cage of thin bars: the 12 edges of an axis-aligned cube realized as
/// closed thin boxes. Each bar is individually closed, so the whole mesh
/// has zero normal flux.
pub fn cage_mesh(half: f64, bar_radius: f64) -> Result<TriangleMesh> {
    if !(half > bar_radius && bar_radius > 0.0) {
        return Err(Error::InvalidParameter(
            "cage requires half > bar_radius > 0".into(),
        ));
    }
    let h = half;
    let r = bar_radius;
    let mut mesh = TriangleMesh::default();
    // 4 bars along each axis, at the 4 corner lines of the cube
    for &(sa, sb) in &[(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)] {
        // along x at (y,z) = (sa h, sb h)
        append(
            &mut mesh,
            box_mesh(
                Vec3::new(-h - r, sa * h - r, sb * h - r),
                Vec3::new(h + r, sa * h + r, sb * h + r),
            )?,
        );
        // along y at (x,z)
        append(
            &mut mesh,
            box_mesh(
                Vec3::new(sa * h - r, -h - r, sb * h - r),
                Vec3::new(sa * h + r, h + r, sb * h + r),
            )?,
        );
        // along z at (x,y)
        append(
            &mut mesh,
            box_mesh(
                Vec3::new(sa * h - r, sb * h - r, -h - r),
                Vec3::new(sa * h + r, sb * h + r, h + r),
            )?,
        );
    }
    Ok(mesh)
}

/// Add isotropic Gaussian noise (standard deviation `sigma`, scene units)
/// to every point. Deterministic for a given seed.
pub fn perturb_cloud(cloud: &crate::geom::PointCloud, sigma: f64, seed: u64) -> crate::geom::PointCloud {
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = || {
        // Box-Muller
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    };
    crate::geom::PointCloud {
        positions: cloud
            .positions
            .iter()
            .map(|&p| p + Vec3::new(gauss(), gauss(), gauss()) * sigma)
            .collect(),
        colors: cloud.colors.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_closed(mesh: &TriangleMesh) {
        let flux = mesh.normal_flux().norm();
        assert!(flux <= 1e-9 * mesh.total_area(), "flux {flux}");
        // every edge shared by exactly two triangles, opposite orientation
        let mut edges: HashMap<(u32, u32), i64> = HashMap::new();
        for t in &mesh.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_insert(0) += if a < b { 1 } else { -1 };
            }
        }
        assert!(edges.values().all(|&v| v == 0), "non-manifold edges");
    }

    #[test]
    fn sphere_closed_outward_and_accurate() {
        let m = sphere_mesh(Vec3::new(1.0, 2.0, 3.0), 2.0, 3).unwrap();
        assert_closed(&m);
        for v in &m.vertices {
            assert!(((*v - Vec3::new(1.0, 2.0, 3.0)).norm() - 2.0).abs() < 1e-12);
        }
        // outward orientation: volume positive and near 4/3 pi r^3
        let vol = m.signed_volume()
            - 2.0 * 4.0 / 3.0 * std::f64::consts::PI * 0.0; // volume is translation-invariant for closed meshes
        let expected = 4.0 / 3.0 * std::f64::consts::PI * 8.0;
        assert!(vol > 0.95 * expected && vol < expected, "vol {vol}");
    }

    #[test]
    fn box_closed_volume_exact() {
        let m = box_mesh(Vec3::new(-1.0, -2.0, -3.0), Vec3::new(1.0, 0.0, 1.0)).unwrap();
        assert_closed(&m);
        assert!((m.signed_volume() - 2.0 * 2.0 * 4.0).abs() < 1e-12);
        assert!((m.total_area() - 2.0 * (4.0 + 8.0 + 8.0)).abs() < 1e-12);
    }

    #[test]
    fn torus_closed_volume_converges() {
        let m = torus_mesh(2.0, 0.5, 96, 48).unwrap();
        assert_closed(&m);
        // V = 2 pi^2 R r^2
        let expected = 2.0 * std::f64::consts::PI.powi(2) * 2.0 * 0.25;
        let vol = m.signed_volume();
        assert!((vol - expected).abs() / expected < 0.01, "vol {vol}");
    }

    #[test]
    fn cage_closed() {
        let m = cage_mesh(0.5, 0.03).unwrap();
        assert_closed(&m);
        assert_eq!(m.triangles.len(), 12 * 12);
        assert!(m.signed_volume() > 0.0);
    }

    #[test]
    fn two_planes_layout() {
        let m = two_planes_mesh(-1.0, 0.5, 1.0, 1.5);
        assert_eq!(m.triangles.len(), 4);
        assert!((m.total_area() - (1.0 + 9.0)).abs() < 1e-12);
    }

    #[test]
    fn parameter_guards() {
        assert!(sphere_mesh(Vec3::ZERO, 0.0, 2).is_err());
        assert!(box_mesh(Vec3::ZERO, Vec3::ZERO).is_err());
        assert!(torus_mesh(0.5, 1.0, 16, 16).is_err());
        assert!(cage_mesh(0.1, 0.2).is_err());
    }
}
