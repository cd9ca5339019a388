//! Per-view point visibility estimation and assembly of the global set of
//! sight rays that constrains the graph cut.
//!
//! Three interchangeable estimators are provided: a depth-comparison oracle
//! (needs the ground-truth surface), hidden point removal (spherical
//! flipping + convex hull), and a three-stage cascade (coarse occlusion
//! test, sparse depth completion, refined test against the completed depth).

use crate::delaunay;
use crate::error::{Error, Result};
use crate::geom::{PointCloud, Vec3};
use crate::render::{project_point, BitMask, DepthMap, RenderBuffers, EMPTY_ID};
use crate::view::VirtualView;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};
use std::path::Path;

/// Per-view visibility labels over point indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibilityLabels {
    pub view_id: u32,
    pub visible: BTreeSet<u32>,
    pub occluded: BTreeSet<u32>,
}

impl VisibilityLabels {
    /// Labeled points must partition: no index on both sides.
    pub fn is_consistent(&self) -> bool {
        self.visible.is_disjoint(&self.occluded)
    }
}

/// One line of sight per (view, visible point) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SightRay {
    pub camera: Vec3,
    pub point_index: u32,
}

#[derive(Debug, Clone, Default)]
pub struct SightRaySet {
    pub rays: Vec<SightRay>,
}

impl SightRaySet {
    pub fn len(&self) -> usize {
        self.rays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rays.is_empty()
    }
}

/// Tunables for the estimators. `epsilon` is the oracle depth tolerance in
/// normalized (unit scene diagonal) units.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub epsilon: f64,
    pub hpr_exponent: f64,
    pub coarse_window: u32,
    pub coarse_tau: f64,
    pub fine_tau: f64,
    pub completion_iters: u32,
}

impl Default for EstimatorConfig {
    fn default() -> EstimatorConfig {
        EstimatorConfig {
            epsilon: 0.05,
            hpr_exponent: 2.0,
            coarse_window: 15,
            coarse_tau: 0.05,
            fine_tau: 0.05,
            completion_iters: 1,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epsilon <= 0.0 {
            return Err(Error::InvalidParameter("epsilon must be positive".into()));
        }
        if self.coarse_window < 3 || self.coarse_window % 2 == 0 {
            return Err(Error::InvalidParameter(
                "coarse_window must be odd and >= 3".into(),
            ));
        }
        if self.coarse_tau <= 0.0 || self.fine_tau <= 0.0 {
            return Err(Error::InvalidParameter("taus must be positive".into()));
        }
        Ok(())
    }
}

/// All point indices recorded anywhere in the ID map.
fn rendered_points(buffers: &RenderBuffers) -> BTreeSet<u32> {
    buffers
        .id
        .data
        .iter()
        .copied()
        .filter(|&v| v != EMPTY_ID)
        .collect()
}

fn aggregate_labels(
    buffers: &RenderBuffers,
    view_id: u32,
    pixel_visible: impl Fn(usize) -> bool,
) -> VisibilityLabels {
    // a point splatted to several pixels is visible if visible at any
    let mut visible = BTreeSet::new();
    for (i, &id) in buffers.id.data.iter().enumerate() {
        if id != EMPTY_ID && pixel_visible(i) {
            visible.insert(id);
        }
    }
    let occluded = rendered_points(buffers)
        .difference(&visible)
        .copied()
        .collect();
    VisibilityLabels {
        view_id,
        visible,
        occluded,
    }
}

/// Ground-truth labeling: a rendered point is visible at a pixel iff its
/// depth is within `epsilon` of the ground-truth surface depth there.
pub fn oracle_visibility(
    buffers: &RenderBuffers,
    surface_depth: &DepthMap,
    epsilon: f64,
    view_id: u32,
) -> Result<VisibilityLabels> {
    if buffers.width() != surface_depth.width || buffers.height() != surface_depth.height {
        return Err(Error::DimensionMismatch(format!(
            "point buffers {}x{} vs surface depth {}x{}",
            buffers.width(),
            buffers.height(),
            surface_depth.width,
            surface_depth.height
        )));
    }
    let eps = epsilon as f32;
    Ok(aggregate_labels(buffers, view_id, |i| {
        let pd = buffers.depth.data[i];
        let sd = surface_depth.data[i];
        sd.is_finite() && (pd - sd).abs() < eps
    }))
}

/// Hidden point removal: spherical flipping about the camera followed by a
/// convex hull membership test. `R = 10^hpr_exponent * max ||p - c||`.
/// Labels cover the points inside this view's frustum.
pub fn hpr_visibility(
    cloud: &PointCloud,
    view: &VirtualView,
    hpr_exponent: f64,
) -> Result<VisibilityLabels> {
    let camera = view.pose.camera_center();
    let mut idx: Vec<u32> = Vec::new();
    let mut rel: Vec<Vec3> = Vec::new();
    for (i, &p) in cloud.positions.iter().enumerate() {
        if project_point(p, view).is_some() {
            idx.push(i as u32);
            rel.push(p - camera);
        }
    }
    if idx.len() < 4 {
        return Err(Error::Degenerate("insufficient points".into()));
    }
    let max_norm = rel.iter().map(|p| p.norm()).fold(0.0f64, f64::max);
    let radius = 10f64.powf(hpr_exponent) * max_norm;
    let mut flipped: Vec<Vec3> = rel
        .iter()
        .map(|&p| {
            let n = p.norm();
            // p + 2 (R - |p|) p / |p|
            p * (2.0 * radius / n - 1.0)
        })
        .collect();
    flipped.push(Vec3::ZERO); // the camera itself

    let mesh = delaunay::tetrahedralize(&PointCloud::from_positions(flipped))
        .map_err(|e| e.in_stage("hpr convex hull"))?;
    // hull vertices = vertices of infinite tets
    let mut on_hull = vec![false; idx.len() + 1];
    for t in mesh.tets.iter().filter(|t| t.is_infinite()) {
        for &v in &t.verts[..3] {
            on_hull[mesh.canonical(v) as usize] = true;
        }
    }
    let mut visible = BTreeSet::new();
    let mut occluded = BTreeSet::new();
    for (k, &i) in idx.iter().enumerate() {
        if on_hull[mesh.canonical(k as u32) as usize] {
            visible.insert(i);
        } else {
            occluded.insert(i);
        }
    }
    Ok(VisibilityLabels {
        view_id: view.id,
        visible,
        occluded,
    })
}

/// Per-pixel coarse occlusion test: a pixel's point is occluded iff its
/// depth exceeds the local window minimum by more than tau.
fn coarse_pixel_visibility(buffers: &RenderBuffers, window: u32, tau: f64) -> Vec<bool> {
    let w = buffers.width() as i64;
    let h = buffers.height() as i64;
    let half = (window / 2) as i64;
    let tau = tau as f32;
    let mut vis = vec![false; (w * h) as usize];
    for y in 0..h {
        for x in 0..w {
            let i = (y * w + x) as usize;
            let d = buffers.depth.data[i];
            if !d.is_finite() {
                continue;
            }
            let mut local_min = d;
            for dy in -half..=half {
                for dx in -half..=half {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w || ny >= h {
                        continue;
                    }
                    let nd = buffers.depth.data[(ny * w + nx) as usize];
                    if nd < local_min {
                        local_min = nd;
                    }
                }
            }
            vis[i] = d <= local_min + tau;
        }
    }
    vis
}

/// First cascade stage: window-minimum occlusion test on the sparse depth.
pub fn coarse_visibility(
    buffers: &RenderBuffers,
    window: u32,
    tau: f64,
) -> Result<VisibilityLabels> {
    if window < 3 || window % 2 == 0 {
        return Err(Error::InvalidParameter("window must be odd and >= 3".into()));
    }
    let vis = coarse_pixel_visibility(buffers, window, tau);
    Ok(aggregate_labels(buffers, 0, |i| vis[i]))
}

/// Fill invalid pixels by repeated 3x3 averaging over already-filled
/// neighbors, then run `iters` smoothing passes over the originally
/// invalid pixels. Valid input pixels are preserved exactly.
pub fn complete_depth(sparse: &DepthMap, mask: &BitMask, iters: u32) -> Result<DepthMap> {
    if sparse.width != mask.width || sparse.height != mask.height {
        return Err(Error::DimensionMismatch("depth map vs mask".into()));
    }
    if mask.count_valid() == 0 {
        return Err(Error::EmptyInput("empty mask".into()));
    }
    let w = sparse.width as i64;
    let h = sparse.height as i64;
    let n = (w * h) as usize;
    let mut depth = sparse.data.clone();
    let mut filled: Vec<bool> = (0..n)
        .map(|i| mask.get((i as i64 % w) as u32, (i as i64 / w) as u32))
        .collect();
    let originally_valid = filled.clone();

    // wavefront fill, synchronous updates for determinism
    let mut remaining: usize = filled.iter().filter(|&&f| !f).count();
    while remaining > 0 {
        let mut updates: Vec<(usize, f32)> = Vec::new();
        for y in 0..h {
            for x in 0..w {
                let i = (y * w + x) as usize;
                if filled[i] {
                    continue;
                }
                let mut sum = 0.0f64;
                let mut cnt = 0u32;
                for dy in -1..=1i64 {
                    for dx in -1..=1i64 {
                        if dx == 0 && dy == 0 {
                            continue;
                        }
                        let (nx, ny) = (x + dx, y + dy);
                        if nx < 0 || ny < 0 || nx >= w || ny >= h {
                            continue;
                        }
                        let j = (ny * w + nx) as usize;
                        if filled[j] {
                            sum += depth[j] as f64;
                            cnt += 1;
                        }
                    }
                }
                if cnt > 0 {
                    updates.push((i, (sum / cnt as f64) as f32));
                }
            }
        }
        if updates.is_empty() {
            return Err(Error::Degenerate("depth completion stalled".into()));
        }
        remaining -= updates.len();
        for (i, v) in updates {
            depth[i] = v;
            filled[i] = true;
        }
    }

    // smoothing over originally-invalid pixels only
    for _ in 0..iters {
        let snapshot = depth.clone();
        for y in 0..h {
            for x in 0..w {
                let i = (y * w + x) as usize;
                if originally_valid[i] {
                    continue;
                }
                let mut sum = 0.0f64;
                let mut cnt = 0u32;
                for dy in -1..=1i64 {
                    for dx in -1..=1i64 {
                        let (nx, ny) = (x + dx, y + dy);
                        if nx < 0 || ny < 0 || nx >= w || ny >= h {
                            continue;
                        }
                        sum += snapshot[(ny * w + nx) as usize] as f64;
                        cnt += 1;
                    }
                }
                depth[i] = (sum / cnt as f64) as f32;
            }
        }
    }

    Ok(DepthMap {
        width: sparse.width,
        height: sparse.height,
        data: depth,
    })
}

/// Final cascade stage: a point is visible at a pixel iff it is less than
/// tau behind the completed dense depth.
pub fn fine_visibility(
    buffers: &RenderBuffers,
    dense: &DepthMap,
    tau: f64,
) -> Result<VisibilityLabels> {
    if buffers.width() != dense.width || buffers.height() != dense.height {
        return Err(Error::DimensionMismatch("buffers vs dense depth".into()));
    }
    let tau = tau as f32;
    Ok(aggregate_labels(buffers, 0, |i| {
        buffers.depth.data[i] - dense.data[i] < tau
    }))
}

/// Three-stage cascade: coarse labels filter the sparse depth, the filtered
/// depth is completed to a dense map, and the fine test labels points
/// against it.
pub fn cascade_visibility(
    buffers: &RenderBuffers,
    cfg: &EstimatorConfig,
    view_id: u32,
) -> Result<VisibilityLabels> {
    cfg.validate()?;
    if buffers.mask.count_valid() == 0 {
        return Err(Error::EmptyInput("nothing rendered".into()));
    }
    let coarse = coarse_pixel_visibility(buffers, cfg.coarse_window, cfg.coarse_tau);

    // keep only coarse-visible pixels for the completion stage
    let mut filtered = buffers.depth.clone();
    let mut fmask = BitMask::new(buffers.width(), buffers.height());
    for y in 0..buffers.height() {
        for x in 0..buffers.width() {
            let i = (y * buffers.width() + x) as usize;
            if coarse[i] {
                fmask.set(x, y, true);
            } else {
                filtered.data[i] = f32::INFINITY;
            }
        }
    }
    if fmask.count_valid() == 0 {
        return Err(Error::Degenerate(
            "coarse stage rejected every pixel".into(),
        ));
    }
    let dense = complete_depth(&filtered, &fmask, cfg.completion_iters)?;
    let mut labels = fine_visibility(buffers, &dense, cfg.fine_tau)?;
    labels.view_id = view_id;
    Ok(labels)
}

/// Turn per-view visible labels into the global set of sight rays.
pub fn assemble_rays(
    labels: &[VisibilityLabels],
    views: &[VirtualView],
) -> Result<SightRaySet> {
    let centers: HashMap<u32, Vec3> = views
        .iter()
        .map(|v| (v.id, v.pose.camera_center()))
        .collect();
    let mut seen: BTreeSet<(u32, u32)> = BTreeSet::new();
    let mut rays = Vec::new();
    for l in labels {
        let camera = *centers.get(&l.view_id).ok_or_else(|| {
            Error::InvalidParameter(format!("unknown view_id {}", l.view_id))
        })?;
        for &p in &l.visible {
            if seen.insert((l.view_id, p)) {
                rays.push(SightRay {
                    camera,
                    point_index: p,
                });
            }
        }
    }
    Ok(SightRaySet { rays })
}

pub fn write_labels(path: &Path, labels: &VisibilityLabels) -> Result<()> {
    let json = serde_json::to_string_pretty(labels)
        .map_err(|e| Error::Parse(format!("serialize labels: {e}")))?;
    std::fs::write(path, json)?;
    Ok(())
}

pub fn read_labels(path: &Path) -> Result<VisibilityLabels> {
    let data = std::fs::read_to_string(path)?;
    serde_json::from_str(&data).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::TriangleMesh;
    use crate::render::{render_mesh_depth, render_points};
    use crate::view::{look_at, Intrinsics, VirtualView};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn test_view() -> VirtualView {
        let pose = look_at(
            Vec3::new(0.0, 0.0, -3.0),
            Vec3::ZERO,
            Vec3::new(0.0, 1.0, 0.0),
        )
        .unwrap();
        VirtualView {
            id: 0,
            pose,
            intr: Intrinsics::default_256(),
        }
    }

    fn square_mesh(z: f64, half: f64) -> TriangleMesh {
        TriangleMesh {
            vertices: vec![
                Vec3::new(-half, -half, z),
                Vec3::new(half, -half, z),
                Vec3::new(half, half, z),
                Vec3::new(-half, half, z),
            ],
            triangles: vec![[0, 1, 2], [0, 2, 3]],
        }
    }

    fn sample_square(z: f64, half: f64, n: usize, seed: u64) -> Vec<Vec3> {
        let mut rng = StdRng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                Vec3::new(
                    (rng.gen::<f64>() * 2.0 - 1.0) * half,
                    (rng.gen::<f64>() * 2.0 - 1.0) * half,
                    z,
                )
            })
            .collect()
    }

    #[test]
    fn oracle_epsilon_rule() {
        // two points on the optical axis; ground truth surface at depth 3
        let view = test_view();
        // camera is at z=-3, so depth d <=> world z = d - 3
        let gt = square_mesh(0.0, 6.0); // depth 3 everywhere
        let surface = render_mesh_depth(&gt, &view).unwrap();

        // pd = 3.02 vs sd = 3.00 -> visible at eps 0.05
        let cloud = PointCloud::from_positions(vec![Vec3::new(0.0, 0.0, 0.02)]);
        let b = render_points(&cloud, &view, 0);
        let l = oracle_visibility(&b, &surface, 0.05, 0).unwrap();
        assert!(l.visible.contains(&0));

        // pd = 3.10 vs sd = 3.00 -> occluded
        let cloud = PointCloud::from_positions(vec![Vec3::new(0.0, 0.0, 0.10)]);
        let b = render_points(&cloud, &view, 0);
        let l = oracle_visibility(&b, &surface, 0.05, 0).unwrap();
        assert!(l.occluded.contains(&0));
        assert!(l.is_consistent());
    }

    #[test]
    fn oracle_out_of_frustum_not_labeled() {
        let view = test_view();
        let gt = square_mesh(0.0, 6.0);
        let surface = render_mesh_depth(&gt, &view).unwrap();
        let cloud = PointCloud::from_positions(vec![Vec3::new(0.0, 0.0, -4.0)]); // behind camera
        let b = render_points(&cloud, &view, 0);
        let l = oracle_visibility(&b, &surface, 0.05, 0).unwrap();
        assert!(l.visible.is_empty() && l.occluded.is_empty());
    }

    #[test]
    fn oracle_dimension_mismatch() {
        let view = test_view();
        let cloud = PointCloud::from_positions(vec![Vec3::ZERO]);
        let b = render_points(&cloud, &view, 0);
        let small = DepthMap::new_invalid(16, 16);
        assert!(matches!(
            oracle_visibility(&b, &small, 0.05, 0),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn oracle_labels_exactly_rendered_points() {
        let view = test_view();
        let gt = square_mesh(0.0, 6.0);
        let surface = render_mesh_depth(&gt, &view).unwrap();
        let pts = sample_square(0.0, 1.0, 300, 4);
        let b = render_points(&PointCloud::from_positions(pts), &view, 1);
        let l = oracle_visibility(&b, &surface, 0.05, 0).unwrap();
        let rendered = rendered_points(&b);
        let union: BTreeSet<u32> = l.visible.union(&l.occluded).copied().collect();
        assert_eq!(union, rendered);
        assert!(l.is_consistent());
    }

    /// Brute-force segment-vs-mesh occlusion oracle.
    fn ray_blocked(mesh: &TriangleMesh, camera: Vec3, p: Vec3) -> bool {
        let dir = p - camera;
        for t in 0..mesh.triangles.len() {
            let (a, b, c) = mesh.triangle_vertices(t);
            let e1 = b - a;
            let e2 = c - a;
            let h = dir.cross(e2);
            let det = e1.dot(h);
            if det.abs() < 1e-14 {
                continue;
            }
            let s = camera - a;
            let u = s.dot(h) / det;
            if !(0.0..=1.0).contains(&u) {
                continue;
            }
            let q = s.cross(e1);
            let v = dir.dot(q) / det;
            if v < 0.0 || u + v > 1.0 {
                continue;
            }
            let tt = e2.dot(q) / det;
            if tt > 1e-9 && tt < 1.0 - 1e-6 {
                return true;
            }
        }
        false
    }

    #[test]
    fn hpr_planar_patch_all_visible() {
        let view = test_view();
        let pts = sample_square(0.0, 1.0, 200, 7);
        let cloud = PointCloud::from_positions(pts.clone());
        let l = hpr_visibility(&cloud, &view, 2.0).unwrap();
        // ray-cast oracle: nothing blocks a single patch
        let gt = square_mesh(0.0, 1.0);
        let camera = view.pose.camera_center();
        for (i, &p) in pts.iter().enumerate() {
            assert!(!ray_blocked(&gt, camera, p));
            assert!(
                l.visible.contains(&(i as u32)),
                "patch point {i} should be visible"
            );
        }
    }

    #[test]
    fn hpr_occluded_far_patch() {
        let view = test_view();
        // near patch at z=-1 fully covers far patch at z=1 from the camera
        let mut pts = sample_square(-1.0, 2.0, 1500, 1);
        let far = sample_square(1.0, 0.5, 200, 2);
        let n_near = pts.len();
        pts.extend(far.iter().copied());
        let cloud = PointCloud::from_positions(pts);
        let l = hpr_visibility(&cloud, &view, 2.0).unwrap();
        let occluded_far = (n_near..n_near + 200)
            .filter(|i| l.occluded.contains(&(*i as u32)))
            .count();
        assert!(
            occluded_far as f64 >= 0.9 * 200.0,
            "only {occluded_far}/200 far points occluded"
        );
    }

    #[test]
    fn hpr_sphere_agreement_sweep() {
        // convex sphere: some exponent in the sweep reaches >= 90%
        // agreement with the ray-cast oracle (here: facing hemisphere)
        let view = test_view();
        let mut rng = StdRng::seed_from_u64(9);
        let pts: Vec<Vec3> = (0..500)
            .map(|_| {
                let v = Vec3::new(
                    rng.gen::<f64>() - 0.5,
                    rng.gen::<f64>() - 0.5,
                    rng.gen::<f64>() - 0.5,
                );
                v.normalized().unwrap()
            })
            .collect();
        let camera = view.pose.camera_center();
        let truth: Vec<bool> = pts
            .iter()
            .map(|&p| {
                // on a unit sphere around the origin, p faces the camera iff
                // the surface normal (=p) points toward it
                p.dot((camera - p).normalized().unwrap()) > 0.0
            })
            .collect();
        let cloud = PointCloud::from_positions(pts);
        let mut best = 0.0f64;
        for exp in [0.0, 1.0, 2.0, 3.0] {
            let l = hpr_visibility(&cloud, &view, exp).unwrap();
            let total = l.visible.len() + l.occluded.len();
            let agree = (0..cloud.len() as u32)
                .filter(|i| {
                    let vis = l.visible.contains(i);
                    let occ = l.occluded.contains(i);
                    (vis || occ) && vis == truth[*i as usize]
                })
                .count();
            best = best.max(agree as f64 / total as f64);
        }
        assert!(best >= 0.9, "best agreement {best}");
    }

    #[test]
    fn hpr_insufficient_points() {
        let view = test_view();
        let cloud = PointCloud::from_positions(vec![Vec3::ZERO; 3]);
        assert!(matches!(
            hpr_visibility(&cloud, &view, 2.0),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn coarse_isolated_pixel_visible() {
        let view = test_view();
        let cloud = PointCloud::from_positions(vec![Vec3::new(0.0, 0.0, 0.0)]);
        let b = render_points(&cloud, &view, 0);
        let l = coarse_visibility(&b, 3, 0.1).unwrap();
        assert!(l.visible.contains(&0));
    }

    #[test]
    fn coarse_deep_neighbor_occluded() {
        let view = test_view();
        // two points projecting next to each other with very different depth
        let near = Vec3::new(0.0, 0.0, -2.0); // depth 1
        // neighbor pixel, much deeper
        let px_off = 2.0 / view.intr.fx; // ~2px at depth 2
        let far = Vec3::new(px_off * 2.0, 0.0, 2.0); // depth 5
        let cloud = PointCloud::from_positions(vec![near, far]);
        let b = render_points(&cloud, &view, 0);
        let l = coarse_visibility(&b, 9, 0.1).unwrap();
        assert!(l.visible.contains(&0));
        assert!(l.occluded.contains(&1));
    }

    #[test]
    fn complete_depth_dense_input_unchanged() {
        let view = test_view();
        let gt = square_mesh(0.0, 6.0);
        let dense = render_mesh_depth(&gt, &view).unwrap();
        let mut mask = BitMask::new(dense.width, dense.height);
        for y in 0..dense.height {
            for x in 0..dense.width {
                mask.set(x, y, true);
            }
        }
        let out = complete_depth(&dense, &mask, 3).unwrap();
        assert_eq!(out.data, dense.data);
    }

    #[test]
    fn complete_depth_single_pixel_diffuses() {
        let mut sparse = DepthMap::new_invalid(16, 16);
        sparse.set(8, 8, 7.0);
        let mut mask = BitMask::new(16, 16);
        mask.set(8, 8, true);
        let out = complete_depth(&sparse, &mask, 0).unwrap();
        for v in &out.data {
            assert!((v - 7.0).abs() < 1e-5);
        }
    }

    #[test]
    fn complete_depth_half_plane_constant() {
        let (w, h) = (32u32, 32u32);
        let mut sparse = DepthMap::new_invalid(w, h);
        let mut mask = BitMask::new(w, h);
        for y in 0..h {
            for x in 0..w / 2 {
                sparse.set(x, y, 3.0);
                mask.set(x, y, true);
            }
        }
        let out = complete_depth(&sparse, &mask, 2).unwrap();
        for v in &out.data {
            assert!((v - 3.0).abs() < 1e-5);
        }
    }

    #[test]
    fn complete_depth_empty_mask_errors() {
        let sparse = DepthMap::new_invalid(8, 8);
        let mask = BitMask::new(8, 8);
        assert!(matches!(
            complete_depth(&sparse, &mask, 1),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn fine_visibility_rules() {
        let view = test_view();
        let cloud = PointCloud::from_positions(vec![Vec3::new(0.0, 0.0, 0.0)]); // depth 3
        let b = render_points(&cloud, &view, 0);
        // completed depth equals the point depth -> visible
        let mut dense = DepthMap::new_invalid(b.width(), b.height());
        for v in &mut dense.data {
            *v = 3.0;
        }
        let l = fine_visibility(&b, &dense, 0.05).unwrap();
        assert!(l.visible.contains(&0));
        // completed surface 10*tau in front -> occluded
        for v in &mut dense.data {
            *v = 3.0 - 0.5;
        }
        let l = fine_visibility(&b, &dense, 0.05).unwrap();
        assert!(l.occluded.contains(&0));
    }

    fn two_plane_scene(seed: u64) -> (PointCloud, TriangleMesh, usize) {
        // near patch partially covering a far patch
        let near = sample_square(-1.0, 0.6, 400, seed);
        let far = sample_square(1.0, 1.4, 800, seed + 1);
        let n_near = near.len();
        let mut pts = near;
        pts.extend(far);
        let mut gt = square_mesh(-1.0, 0.6);
        let far_mesh = square_mesh(1.0, 1.4);
        let off = gt.vertices.len() as u32;
        gt.vertices.extend(far_mesh.vertices);
        gt.triangles
            .extend(far_mesh.triangles.iter().map(|t| [t[0] + off, t[1] + off, t[2] + off]));
        (PointCloud::from_positions(pts), gt, n_near)
    }

    fn f1(labels: &VisibilityLabels, oracle: &VisibilityLabels) -> f64 {
        let tp = labels.visible.intersection(&oracle.visible).count() as f64;
        let fp = labels.visible.intersection(&oracle.occluded).count() as f64;
        let fn_ = labels.occluded.intersection(&oracle.visible).count() as f64;
        if tp == 0.0 {
            return 0.0;
        }
        2.0 * tp / (2.0 * tp + fp + fn_)
    }

    #[test]
    fn cascade_single_plane_all_visible() {
        let view = test_view();
        let (pts, gt) = (sample_square(0.0, 1.0, 500, 12), square_mesh(0.0, 1.0));
        let b = render_points(&PointCloud::from_positions(pts), &view, 1);
        let surface = render_mesh_depth(&gt, &view).unwrap();
        let oracle = oracle_visibility(&b, &surface, 0.05, 0).unwrap();
        let cascade = cascade_visibility(&b, &EstimatorConfig::default(), 0).unwrap();
        assert_eq!(cascade.occluded.len(), 0, "no occlusion on a single plane");
        assert_eq!(cascade.visible, oracle.visible);
    }

    #[test]
    fn cascade_two_plane_f1_and_stage_ordering() {
        let view = test_view();
        let cfg = EstimatorConfig::default();
        let (cloud, gt, _) = two_plane_scene(40);
        let b = render_points(&cloud, &view, 1);
        let surface = render_mesh_depth(&gt, &view).unwrap();
        let oracle = oracle_visibility(&b, &surface, 0.05, 0).unwrap();
        let coarse = coarse_visibility(&b, cfg.coarse_window, cfg.coarse_tau).unwrap();
        let cascade = cascade_visibility(&b, &cfg, 0).unwrap();
        let f_coarse = f1(&coarse, &oracle);
        let f_fine = f1(&cascade, &oracle);
        assert!(f_fine >= 0.80, "cascade F1 {f_fine}");
        assert!(
            f_fine >= f_coarse - 1e-9,
            "fine ({f_fine}) must not regress below coarse ({f_coarse})"
        );
    }

    #[test]
    fn cascade_empty_errors() {
        let view = test_view();
        let b = render_points(&PointCloud::default(), &view, 0);
        assert!(matches!(
            cascade_visibility(&b, &EstimatorConfig::default(), 0),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn tau_monotonicity() {
        // lowering tau never converts occluded -> visible
        let view = test_view();
        let (cloud, _, _) = two_plane_scene(50);
        let b = render_points(&cloud, &view, 1);
        let hi = coarse_visibility(&b, 9, 0.08).unwrap();
        let lo = coarse_visibility(&b, 9, 0.02).unwrap();
        assert!(lo.visible.is_subset(&hi.visible));
    }

    #[test]
    fn assemble_rays_counts() {
        let views = vec![
            VirtualView {
                id: 0,
                pose: look_at(Vec3::new(0.0, 0.0, -3.0), Vec3::ZERO, Vec3::new(0.0, 1.0, 0.0))
                    .unwrap(),
                intr: Intrinsics::default_256(),
            },
            VirtualView {
                id: 1,
                pose: look_at(Vec3::new(3.0, 0.0, 0.0), Vec3::ZERO, Vec3::new(0.0, 0.0, 1.0))
                    .unwrap(),
                intr: Intrinsics::default_256(),
            },
        ];
        let l0 = VisibilityLabels {
            view_id: 0,
            visible: [0, 1, 2].into(),
            occluded: BTreeSet::new(),
        };
        let l1 = VisibilityLabels {
            view_id: 1,
            visible: [3, 4, 5].into(),
            occluded: BTreeSet::new(),
        };
        let rays = assemble_rays(&[l0, l1], &views).unwrap();
        assert_eq!(rays.len(), 6);

        // a point visible in both views yields two rays with distinct cameras
        let l0 = VisibilityLabels {
            view_id: 0,
            visible: [7].into(),
            occluded: BTreeSet::new(),
        };
        let l1 = VisibilityLabels {
            view_id: 1,
            visible: [7].into(),
            occluded: BTreeSet::new(),
        };
        let rays = assemble_rays(&[l0, l1], &views).unwrap();
        assert_eq!(rays.len(), 2);
        assert!((rays.rays[0].camera - rays.rays[1].camera).norm() > 1.0);

        // all-occluded labels produce no rays
        let l = VisibilityLabels {
            view_id: 0,
            visible: BTreeSet::new(),
            occluded: [1, 2].into(),
        };
        let rays = assemble_rays(&[l], &views).unwrap();
        assert!(rays.is_empty());
    }

    #[test]
    fn assemble_rays_unknown_view() {
        let l = VisibilityLabels {
            view_id: 42,
            visible: [0].into(),
            occluded: BTreeSet::new(),
        };
        assert!(assemble_rays(&[l], &[]).is_err());
    }

    #[test]
    fn assemble_rays_dedup() {
        let views = vec![VirtualView {
            id: 0,
            pose: look_at(Vec3::new(0.0, 0.0, -3.0), Vec3::ZERO, Vec3::new(0.0, 1.0, 0.0))
                .unwrap(),
            intr: Intrinsics::default_256(),
        }];
        let l = VisibilityLabels {
            view_id: 0,
            visible: [5].into(),
            occluded: BTreeSet::new(),
        };
        let rays = assemble_rays(&[l.clone(), l], &views).unwrap();
        assert_eq!(rays.len(), 1);
    }

    #[test]
    fn labels_json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("labels.json");
        let l = VisibilityLabels {
            view_id: 3,
            visible: [1, 5, 9].into(),
            occluded: [2, 4].into(),
        };
        write_labels(&path, &l).unwrap();
        assert_eq!(read_labels(&path).unwrap(), l);
    }
}
