//! Surface-to-surface evaluation on sampled point sets: Chamfer distance,
//! F-score, and the double-sampling calibration that fixes the Chamfer
//! scale K and the F-score threshold T from the ground-truth mesh itself.

use crate::error::{Error, Result};
use crate::geom::{PointCloud, TriangleMesh, Vec3};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Scale factor and distance threshold derived from the GT surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsCalibration {
    pub k: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub chamfer: f64,
    pub precision: f64,
    pub recall: f64,
    pub fscore: f64,
}

/// Exact nearest-neighbor k-d tree. Read-only after build; queries may run
/// in parallel.
pub struct KdTree {
    points: Vec<Vec3>,
    /// node i covers order[range]; internal nodes split on `axis` at the
    /// median point, which is stored at the start of the right half
    nodes: Vec<KdNode>,
    root: u32,
}

struct KdNode {
    point: u32,
    axis: u8,
    left: u32,
    right: u32,
}

const KD_NONE: u32 = u32::MAX;

fn axis_val(p: Vec3, axis: u8) -> f64 {
    match axis {
        0 => p.x,
        1 => p.y,
        _ => p.z,
    }
}

impl KdTree {
    pub fn build(points: &[Vec3]) -> Result<KdTree> {
        if points.is_empty() {
            return Err(Error::EmptyInput("cannot build tree over no points".into()));
        }
        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        let mut nodes = Vec::with_capacity(points.len());
        let n = points.len();
        let root = Self::build_rec(points, &mut order[..], &mut nodes, 0);
        debug_assert_eq!(nodes.len(), n);
        Ok(KdTree {
            points: points.to_vec(),
            nodes,
            root,
        })
    }

    fn build_rec(points: &[Vec3], order: &mut [u32], nodes: &mut Vec<KdNode>, depth: u8) -> u32 {
        if order.is_empty() {
            return KD_NONE;
        }
        let axis = depth % 3;
        let mid = order.len() / 2;
        order.select_nth_unstable_by(mid, |&a, &b| {
            axis_val(points[a as usize], axis)
                .partial_cmp(&axis_val(points[b as usize], axis))
                .unwrap()
        });
        let point = order[mid];
        let slot = nodes.len() as u32;
        nodes.push(KdNode {
            point,
            axis,
            left: KD_NONE,
            right: KD_NONE,
        });
        let (lo, hi) = order.split_at_mut(mid);
        let left = Self::build_rec(points, lo, nodes, depth + 1);
        let right = Self::build_rec(points, &mut hi[1..], nodes, depth + 1);
        nodes[slot as usize].left = left;
        nodes[slot as usize].right = right;
        slot
    }

    /// Exact nearest neighbor: (point index, squared distance).
    pub fn nearest(&self, q: Vec3) -> (u32, f64) {
        let mut best = (KD_NONE, f64::INFINITY);
        self.nearest_rec(self.root, q, &mut best);
        best
    }

    fn nearest_rec(&self, node: u32, q: Vec3, best: &mut (u32, f64)) {
        if node == KD_NONE {
            return;
        }
        let n = &self.nodes[node as usize];
        let p = self.points[n.point as usize];
        let d2 = (p - q).norm2();
        if d2 < best.1 {
            *best = (n.point, d2);
        }
        let delta = axis_val(q, n.axis) - axis_val(p, n.axis);
        let (near, far) = if delta < 0.0 {
            (n.left, n.right)
        } else {
            (n.right, n.left)
        };
        self.nearest_rec(near, q, best);
        if delta * delta < best.1 {
            self.nearest_rec(far, q, best);
        }
    }

    pub fn nearest_distance(&self, q: Vec3) -> f64 {
        self.nearest(q).1.sqrt()
    }
}

/// Mean nearest-neighbor distance from each point of `from` into `tree`.
fn mean_nn_distance(from: &[Vec3], tree: &KdTree) -> f64 {
    let sum: f64 = from.par_iter().map(|&p| tree.nearest_distance(p)).sum();
    sum / from.len() as f64
}

/// Symmetric Chamfer distance, scaled:
/// `K/|P| sum_p min_q |p-q|  +  K/|Q| sum_q min_p |p-q|`.
pub fn chamfer(p: &PointCloud, q: &PointCloud, k: f64) -> Result<f64> {
    if p.is_empty() || q.is_empty() {
        return Err(Error::EmptyInput("chamfer over empty set".into()));
    }
    if !(k > 0.0) {
        return Err(Error::InvalidParameter("chamfer scale K must be > 0".into()));
    }
    let tp = KdTree::build(&p.positions)?;
    let tq = KdTree::build(&q.positions)?;
    Ok(k * mean_nn_distance(&p.positions, &tq) + k * mean_nn_distance(&q.positions, &tp))
}

/// Precision / recall / F-score at distance threshold `t` (strict `<`).
/// `p` is sampled from the generated surface, `q` from the ground truth.
pub fn fscore(p: &PointCloud, q: &PointCloud, t: f64) -> Result<MetricsReport> {
    if p.is_empty() || q.is_empty() {
        return Err(Error::EmptyInput("fscore over empty set".into()));
    }
    if !(t > 0.0) {
        return Err(Error::InvalidParameter("threshold T must be > 0".into()));
    }
    let tp = KdTree::build(&p.positions)?;
    let tq = KdTree::build(&q.positions)?;
    let hit_q = q
        .positions
        .par_iter()
        .filter(|&&x| tp.nearest_distance(x) < t)
        .count();
    let hit_p = p
        .positions
        .par_iter()
        .filter(|&&x| tq.nearest_distance(x) < t)
        .count();
    let precision = hit_q as f64 / q.len() as f64;
    let recall = hit_p as f64 / p.len() as f64;
    let fscore = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(MetricsReport {
        chamfer: 0.0,
        precision,
        recall,
        fscore,
    })
}

/// Area-uniform sampling: triangles chosen proportionally to area,
/// barycentric-uniform within. Deterministic for a given seed.
pub fn sample_mesh(mesh: &TriangleMesh, n: usize, seed: u64) -> Result<PointCloud> {
    if mesh.is_empty() {
        return Err(Error::EmptyInput("cannot sample empty mesh".into()));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("sample count must be >= 1".into()));
    }
    let mut cum = Vec::with_capacity(mesh.triangles.len());
    let mut total = 0.0;
    for i in 0..mesh.triangles.len() {
        total += mesh.triangle_area(i);
        cum.push(total);
    }
    if !(total > 0.0) {
        return Err(Error::Degenerate("zero-area mesh".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut positions = Vec::with_capacity(n);
    for _ in 0..n {
        let r = rng.gen::<f64>() * total;
        let t = cum.partition_point(|&c| c <= r).min(cum.len() - 1);
        let (a, b, c) = mesh.triangle_vertices(t);
        let (mut u, mut v) = (rng.gen::<f64>(), rng.gen::<f64>());
        if u + v > 1.0 {
            u = 1.0 - u;
            v = 1.0 - v;
        }
        positions.push(a + (b - a) * u + (c - a) * v);
    }
    Ok(PointCloud::from_positions(positions))
}

/// Sample the GT mesh twice; K makes the Chamfer distance of the two
/// samplings exactly 1, and T is the max over the first sampling of the
/// nearest distance into the second.
pub fn calibrate(gt_mesh: &TriangleMesh, n: usize, seeds: (u64, u64)) -> Result<MetricsCalibration> {
    if n < 100 {
        return Err(Error::InvalidParameter(
            "calibration needs at least 100 samples".into(),
        ));
    }
    let s1 = sample_mesh(gt_mesh, n, seeds.0)?;
    let s2 = sample_mesh(gt_mesh, n, seeds.1)?;
    let cd_raw = chamfer(&s1, &s2, 1.0)?;
    if !(cd_raw > 0.0) {
        return Err(Error::Degenerate("degenerate calibration: zero CD".into()));
    }
    let t2 = KdTree::build(&s2.positions)?;
    let t = s1
        .positions
        .par_iter()
        .map(|&p| t2.nearest_distance(p))
        .reduce(|| 0.0, f64::max);
    Ok(MetricsCalibration {
        k: 1.0 / cd_raw,
        t,
    })
}
