//! Surface reconstruction by s-t min-cut over the Delaunay tetrahedra.
//!
//! Each sight ray votes: the tetrahedron containing the camera must be
//! outer space (infinite source link), every facet the ray crosses is
//! penalized if the cut passes through it (soft visibility weight growing
//! with distance from the endpoint), and the tetrahedron just behind the
//! endpoint is pulled toward inner space. An adaptive factor gamma scales
//! each ray's votes by how well the local candidate facets face the ray.
//! A triangle-shape smoothness term discourages skinny cut facets.

pub use crate::geom::TriangleMesh;

use crate::delaunay::{walk_ray, TetMesh, INFINITE, NO_TET};
use crate::error::{Error, Result};
use crate::geom::{compute_aabb, normalize_cloud, Aabb, PointCloud, Vec3};
use crate::render::{render_mesh_depth, render_points};
use crate::view::VirtualView;
use crate::visibility::{
    assemble_rays, cascade_visibility, hpr_visibility, oracle_visibility, EstimatorConfig,
    SightRaySet,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::time::Instant;

/// Graph-cut weighting parameters. `sigma` is in normalized scene units
/// (unit bounding-box diagonal).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ReconParams {
    /// Damping of the adaptive visibility weighting; 0 disables it.
    pub lambda_avw: f64,
    /// Weight of the triangle-shape smoothness term.
    pub lambda_ql: f64,
    /// Soft-visibility decay scale.
    pub sigma: f64,
    /// Per-ray base weight (confidence).
    pub alpha_max: f64,
}

impl Default for ReconParams {
    fn default() -> ReconParams {
        ReconParams {
            lambda_avw: 1.0,
            lambda_ql: 1.0,
            sigma: 0.01,
            alpha_max: 1.0,
        }
    }
}

impl ReconParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda_avw) {
            return Err(Error::InvalidParameter("lambda_avw must be in [0,1]".into()));
        }
        if !(self.lambda_ql >= 0.0) {
            return Err(Error::InvalidParameter("lambda_ql must be >= 0".into()));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::InvalidParameter("sigma must be > 0".into()));
        }
        if !(self.alpha_max > 0.0) {
            return Err(Error::InvalidParameter("alpha_max must be > 0".into()));
        }
        Ok(())
    }
}

/// Soft visibility confidence of a cut at distance `d` from the ray
/// endpoint: `alpha_max * (1 - exp(-d^2 / (2 sigma^2)))`. Cuts very close
/// to the endpoint are cheap (noise tolerance); far cuts cost alpha_max.
pub fn soft_vis_weight(d: f64, sigma: f64, alpha_max: f64) -> f64 {
    alpha_max * (1.0 - (-d * d / (2.0 * sigma * sigma)).exp())
}

/// Adaptive visibility weighting: `(1 - lambda) + lambda * max_i(v . n_i)`,
/// clamped below at 0. All inputs must be unit length.
pub fn gamma_avw(ray_dir: Vec3, facet_normals: &[Vec3], lambda_avw: f64) -> Result<f64> {
    let unit = |v: Vec3| (v.norm() - 1.0).abs() <= 1e-7;
    if !unit(ray_dir) || facet_normals.iter().any(|&n| !unit(n)) {
        return Err(Error::InvalidParameter(
            "gamma_avw requires unit-length directions".into(),
        ));
    }
    if facet_normals.is_empty() {
        return Err(Error::InvalidParameter("gamma_avw needs facet normals".into()));
    }
    let best = facet_normals
        .iter()
        .map(|&n| ray_dir.dot(n))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(((1.0 - lambda_avw) + lambda_avw * best).max(0.0))
}

/// Shape penalty of a triangle: `1 - min(1, 2 r_in / r_circ)`.
/// 0 for equilateral, -> 1 for needles, 1 for degenerate triangles.
pub fn quality_weight(a: Vec3, b: Vec3, c: Vec3) -> f64 {
    let la = (b - c).norm();
    let lb = (a - c).norm();
    let lc = (a - b).norm();
    let area = (b - a).cross(c - a).norm() * 0.5;
    let s = (la + lb + lc) * 0.5;
    if !(area > 0.0) || !(s > 0.0) {
        return 1.0;
    }
    // 2 r_in / r_circ = 8 area^2 / (s * la * lb * lc)
    let ratio = 8.0 * area * area / (s * la * lb * lc);
    1.0 - ratio.min(1.0)
}

/// Capacity description of the s-t graph over tetrahedra. Node i is tet i;
/// the source and sink are implicit. The "infinite" source capacity is the
/// finite constant `infinite_cap` (strictly larger than any finite cut).
#[derive(Debug, Clone, PartialEq)]
pub struct FlowGraph {
    pub num_nodes: usize,
    pub infinite_cap: f64,
    /// s -> tet capacities (either 0 or `infinite_cap`).
    pub source_cap: Vec<f64>,
    /// tet -> t capacities.
    pub sink_cap: Vec<f64>,
    /// Directed tet -> tet capacities across shared facets.
    pub edges: BTreeMap<(u32, u32), f64>,
}

impl FlowGraph {
    pub fn empty(num_nodes: usize) -> FlowGraph {
        FlowGraph {
            num_nodes,
            infinite_cap: 0.0,
            source_cap: vec![0.0; num_nodes],
            sink_cap: vec![0.0; num_nodes],
            edges: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutLabel {
    /// Source side (outside the surface).
    Outer,
    /// Sink side (inside the surface).
    Inner,
}

#[derive(Debug, Clone)]
pub struct CutResult {
    pub labels: Vec<CutLabel>,
    pub flow: f64,
}

struct RayContribution {
    first_tet: u32,
    behind: u32,
    behind_weight: f64,
    crossings: Vec<(u32, u32, f64)>,
}

/// Gamma for one ray, from the facets of the behind-tet incident to the
/// endpoint, with normals oriented into the behind-tet (so a facet
/// perpendicular to the ray scores +1). An infinite behind-tet contributes
/// its hull facet's outward normal; degenerate normals fall back to 1.
fn ray_gamma(mesh: &TetMesh, endpoint: u32, ray_dir: Vec3, behind: u32, lambda_avw: f64) -> f64 {
    let tet = &mesh.tets[behind as usize];
    let mut normals: Vec<Vec3> = Vec::with_capacity(3);
    if tet.is_infinite() {
        // hull facet, stored outward-oriented: its outward side is the
        // infinite region, which is where the ray extension continues
        let (a, b, c) = (
            mesh.position(tet.verts[0]),
            mesh.position(tet.verts[1]),
            mesh.position(tet.verts[2]),
        );
        if let Ok(n) = (b - a).cross(c - a).normalized() {
            normals.push(n);
        }
    } else {
        for slot in 0..4 {
            if tet.verts[slot] == endpoint {
                continue; // the facet opposite the endpoint is not incident
            }
            let f = mesh.facet(behind, slot);
            if f.contains(&INFINITE) {
                continue;
            }
            let (a, b, c) = (mesh.position(f[0]), mesh.position(f[1]), mesh.position(f[2]));
            // facet order is outward for the tet; flip to point inward
            if let Ok(n) = (-(b - a).cross(c - a)).normalized() {
                normals.push(n);
            }
        }
    }
    if normals.is_empty() {
        return 1.0;
    }
    gamma_avw(ray_dir, &normals, lambda_avw).unwrap_or(1.0)
}

/// Build the capacity graph from the sight rays.
pub fn build_graph(mesh: &TetMesh, rays: &SightRaySet, params: &ReconParams) -> Result<FlowGraph> {
    build_graph_opts(mesh, rays, params, false)
}

/// As `build_graph`; `force_unit_gamma` hard-codes gamma = 1 for every ray
/// (used to verify that lambda_avw = 0 reproduces the unweighted baseline).
pub fn build_graph_opts(
    mesh: &TetMesh,
    rays: &SightRaySet,
    params: &ReconParams,
    force_unit_gamma: bool,
) -> Result<FlowGraph> {
    params.validate()?;
    if rays.is_empty() {
        return Err(Error::EmptyInput("no visibility information".into()));
    }
    let behind_weight_base = soft_vis_weight(params.sigma, params.sigma, params.alpha_max);

    let contributions: Vec<Result<RayContribution>> = rays
        .rays
        .par_iter()
        .map(|ray| {
            let traversal = walk_ray(mesh, ray.point_index, ray.camera)?;
            let endpoint = mesh.canonical(ray.point_index);
            let ray_dir = (mesh.position(endpoint) - ray.camera).normalized()?;
            let gamma = if force_unit_gamma {
                1.0
            } else {
                ray_gamma(mesh, endpoint, ray_dir, traversal.behind, params.lambda_avw)
            };
            let crossings = traversal
                .crossings
                .iter()
                .map(|c| {
                    (
                        c.from,
                        c.to,
                        gamma * soft_vis_weight(c.dist_to_endpoint, params.sigma, params.alpha_max),
                    )
                })
                .collect();
            Ok(RayContribution {
                first_tet: traversal.tets[0],
                behind: traversal.behind,
                behind_weight: gamma * behind_weight_base,
                crossings,
            })
        })
        .collect();

    let mut graph = FlowGraph::empty(mesh.tets.len());
    graph.infinite_cap = 1e9 * params.alpha_max * rays.len() as f64;
    // accumulate in ray-index order so results are thread-count invariant
    for c in contributions {
        let c = c?;
        graph.source_cap[c.first_tet as usize] = graph.infinite_cap;
        graph.sink_cap[c.behind as usize] += c.behind_weight;
        for (from, to, w) in c.crossings {
            *graph.edges.entry((from, to)).or_insert(0.0) += w;
        }
    }

    // smoothness: shape penalty on every interior facet between finite tets
    if params.lambda_ql > 0.0 {
        for (t, tet) in mesh.tets.iter().enumerate() {
            if tet.is_infinite() {
                continue;
            }
            for slot in 0..4 {
                let n = tet.neighbors[slot];
                if n == NO_TET || (n as usize) < t || mesh.is_infinite(n) {
                    continue;
                }
                let f = mesh.facet(t as u32, slot);
                let w = params.lambda_ql
                    * quality_weight(
                        mesh.position(f[0]),
                        mesh.position(f[1]),
                        mesh.position(f[2]),
                    );
                if w > 0.0 {
                    *graph.edges.entry((t as u32, n)).or_insert(0.0) += w;
                    *graph.edges.entry((n, t as u32)).or_insert(0.0) += w;
                }
            }
        }
    }
    Ok(graph)
}

// --- max flow (Dinic) ---

struct Dinic {
    // edge list: to, capacity; edge i^1 is the reverse of edge i
    to: Vec<u32>,
    cap: Vec<f64>,
    head: Vec<Vec<u32>>,
    level: Vec<i32>,
    iter: Vec<usize>,
}

impl Dinic {
    fn new(n: usize) -> Dinic {
        Dinic {
            to: Vec::new(),
            cap: Vec::new(),
            head: vec![Vec::new(); n],
            level: vec![-1; n],
            iter: vec![0; n],
        }
    }

    fn add_edge(&mut self, u: u32, v: u32, c: f64) {
        let e = self.to.len() as u32;
        self.head[u as usize].push(e);
        self.to.push(v);
        self.cap.push(c);
        self.head[v as usize].push(e + 1);
        self.to.push(u);
        self.cap.push(0.0);
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.head[u] {
                let v = self.to[e as usize] as usize;
                if self.cap[e as usize] > 0.0 && self.level[v] < 0 {
                    self.level[v] = self.level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, u: usize, t: usize, pushed: f64) -> f64 {
        if u == t {
            return pushed;
        }
        while self.iter[u] < self.head[u].len() {
            let e = self.head[u][self.iter[u]] as usize;
            let v = self.to[e] as usize;
            if self.cap[e] > 0.0 && self.level[v] == self.level[u] + 1 {
                let d = self.dfs(v, t, pushed.min(self.cap[e]));
                if d > 0.0 {
                    self.cap[e] -= d;
                    self.cap[e ^ 1] += d;
                    return d;
                }
            }
            self.iter[u] += 1;
        }
        0.0
    }

    fn run(&mut self, s: usize, t: usize) -> f64 {
        let mut flow = 0.0;
        while self.bfs(s, t) {
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let pushed = self.dfs(s, t, f64::INFINITY);
                if pushed <= 0.0 {
                    break;
                }
                flow += pushed;
            }
        }
        flow
    }

    /// Nodes with a positive-residual path to `t` (the minimal sink side
    /// of the min cut; unconstrained nodes default to the source side).
    fn sink_side(&self, t: usize) -> Vec<bool> {
        let mut reach = vec![false; self.head.len()];
        reach[t] = true;
        let mut stack = vec![t];
        while let Some(v) = stack.pop() {
            for &e in &self.head[v] {
                // twin e^1 runs to[e] -> v; positive residual means
                // to[e] can step toward t through v
                let u = self.to[e as usize] as usize;
                if self.cap[(e ^ 1) as usize] > 0.0 && !reach[u] {
                    reach[u] = true;
                    stack.push(u);
                }
            }
        }
        reach
    }
}

/// Exact max-flow / min-cut; labels are the residual source side
/// (`Outer`) and its complement (`Inner`). Deterministic for equal graphs.
pub fn max_flow(graph: &FlowGraph) -> CutResult {
    let n = graph.num_nodes;
    let (s, t) = (n, n + 1);
    let mut dinic = Dinic::new(n + 2);
    for (i, &c) in graph.source_cap.iter().enumerate() {
        if c > 0.0 {
            dinic.add_edge(s as u32, i as u32, c);
        }
    }
    for (i, &c) in graph.sink_cap.iter().enumerate() {
        if c > 0.0 {
            dinic.add_edge(i as u32, t as u32, c);
        }
    }
    for (&(u, v), &c) in &graph.edges {
        if c > 0.0 {
            dinic.add_edge(u, v, c);
        }
    }
    let flow = dinic.run(s, t);
    let sink = dinic.sink_side(t);
    let labels = (0..n)
        .map(|i| if sink[i] { CutLabel::Inner } else { CutLabel::Outer })
        .collect();
    CutResult { labels, flow }
}

/// Emit the closed boundary of the finite Inner region: every facet
/// between an Inner finite tet and an Outer finite tet, plus the hull
/// facet of any Inner finite tet whose neighbor is infinite. Normals point
/// from Inner toward Outer. Vertices are re-indexed compactly.
pub fn extract_surface(mesh: &TetMesh, labels: &[CutLabel]) -> Result<TriangleMesh> {
    if labels.len() != mesh.tets.len() {
        return Err(Error::DimensionMismatch(
            "labels must cover all tetrahedra".into(),
        ));
    }
    let mut vertex_map: BTreeMap<u32, u32> = BTreeMap::new();
    let mut out = TriangleMesh::default();
    for (t, tet) in mesh.tets.iter().enumerate() {
        if labels[t] != CutLabel::Inner || tet.is_infinite() {
            continue;
        }
        for slot in 0..4 {
            let n = tet.neighbors[slot];
            if n == NO_TET
                || (!mesh.is_infinite(n) && labels[n as usize] != CutLabel::Outer)
            {
                continue;
            }
            // outward facet order of the Inner tet: normal points to Outer
            let f = mesh.facet(t as u32, slot);
            let (a, b, c) = (mesh.position(f[0]), mesh.position(f[1]), mesh.position(f[2]));
            if (b - a).cross(c - a).norm() == 0.0 {
                continue; // never emit degenerate triangles
            }
            let tri = f.map(|v| {
                let next = vertex_map.len() as u32;
                *vertex_map.entry(v).or_insert_with(|| {
                    out.vertices.push(mesh.position(v));
                    next
                })
            });
            out.triangles.push(tri);
        }
    }
    Ok(out)
}

/// Visibility estimator selection for the end-to-end pipeline.
pub enum EstimatorChoice<'a> {
    /// Depth comparison against the ground-truth surface.
    Oracle {
        gt_mesh: &'a TriangleMesh,
        epsilon: f64,
    },
    /// Hidden point removal.
    Hpr { exponent: f64 },
    /// Coarse / completion / fine cascade.
    Cascade(EstimatorConfig),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReconReport {
    pub num_views: usize,
    pub num_points: usize,
    pub num_rays: usize,
    pub num_tets: usize,
    pub num_edges: usize,
    pub flow: f64,
    /// Timings of the four pipeline stages, in order.
    pub stage_seconds: Vec<(String, f64)>,
}

/// End-to-end reconstruction. The cloud is normalized to a unit bounding
/// diagonal; `view_gen` receives the normalized bounding box and produces
/// the virtual views; the returned mesh is in the original coordinates.
pub fn reconstruct(
    cloud: &PointCloud,
    view_gen: &dyn Fn(&Aabb) -> Result<Vec<VirtualView>>,
    estimator: &EstimatorChoice,
    params: &ReconParams,
    splat_radius_px: u32,
) -> Result<(TriangleMesh, ReconReport)> {
    params.validate().map_err(|e| e.in_stage("parameters"))?;
    let mut stage_seconds = Vec::with_capacity(4);

    // 1: normalization and virtual view sampling
    let t0 = Instant::now();
    let (norm_cloud, tf) = normalize_cloud(cloud).map_err(|e| e.in_stage("view sampling"))?;
    let bbox = compute_aabb(&norm_cloud).map_err(|e| e.in_stage("view sampling"))?;
    let views = view_gen(&bbox).map_err(|e| e.in_stage("view sampling"))?;
    if views.is_empty() {
        return Err(Error::EmptyInput("no views".into()).in_stage("view sampling"));
    }
    stage_seconds.push(("view_sampling".to_string(), t0.elapsed().as_secs_f64()));

    // 2: rendering
    let t0 = Instant::now();
    let norm_gt = match estimator {
        EstimatorChoice::Oracle { gt_mesh, .. } => Some(TriangleMesh {
            vertices: gt_mesh.vertices.iter().map(|&v| tf.normalize(v)).collect(),
            triangles: gt_mesh.triangles.clone(),
        }),
        _ => None,
    };
    let rendered: Vec<_> = views
        .par_iter()
        .map(|view| {
            let buffers = render_points(&norm_cloud, view, splat_radius_px);
            let gt_depth = norm_gt
                .as_ref()
                .map(|m| render_mesh_depth(m, view))
                .transpose()?;
            Ok((buffers, gt_depth))
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.in_stage("rendering"))?;
    stage_seconds.push(("rendering".to_string(), t0.elapsed().as_secs_f64()));

    // 3: visibility estimation
    let t0 = Instant::now();
    let labels = views
        .par_iter()
        .zip(&rendered)
        .map(|(view, (buffers, gt_depth))| match estimator {
            EstimatorChoice::Oracle { epsilon, .. } => {
                oracle_visibility(buffers, gt_depth.as_ref().unwrap(), *epsilon, view.id)
            }
            EstimatorChoice::Hpr { exponent } => hpr_visibility(&norm_cloud, view, *exponent),
            EstimatorChoice::Cascade(cfg) => cascade_visibility(buffers, cfg, view.id),
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.in_stage("visibility"))?;
    let rays = assemble_rays(&labels, &views).map_err(|e| e.in_stage("visibility"))?;
    stage_seconds.push(("visibility".to_string(), t0.elapsed().as_secs_f64()));

    // 4: Delaunay + graph cut + extraction
    let t0 = Instant::now();
    let mesh = crate::delaunay::tetrahedralize(&norm_cloud)
        .map_err(|e| e.in_stage("reconstruction"))?;
    let graph = build_graph(&mesh, &rays, params).map_err(|e| e.in_stage("reconstruction"))?;
    let cut = max_flow(&graph);
    let surface = extract_surface(&mesh, &cut.labels).map_err(|e| e.in_stage("reconstruction"))?;
    let surface = TriangleMesh {
        vertices: surface.vertices.iter().map(|&v| tf.denormalize(v)).collect(),
        triangles: surface.triangles,
    };
    stage_seconds.push(("reconstruction".to_string(), t0.elapsed().as_secs_f64()));

    let report = ReconReport {
        num_views: views.len(),
        num_points: cloud.len(),
        num_rays: rays.len(),
        num_tets: mesh.tets.len(),
        num_edges: graph.edges.len(),
        flow: cut.flow,
        stage_seconds,
    };
    Ok((surface, report))
}
