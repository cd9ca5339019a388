//! Incremental 3D Delaunay tetrahedralization (Bowyer-Watson with walking
//! point location) and traversal of tetrahedra along a line of sight.
//!
//! The convex hull is closed by a symbolic infinite vertex so every facet
//! has exactly two incident tetrahedra. Finite tetrahedra are stored
//! positively oriented; an infinite tetrahedron stores its finite (hull)
//! facet in vertices 0..3 with the outward orientation, and the infinite
//! vertex in slot 3.

use crate::error::{Error, Result};
use crate::geom::{PointCloud, Vec3};
use crate::predicates::{insphere, orient3d};
use std::collections::HashMap;

/// Symbolic infinite vertex id.
pub const INFINITE: u32 = u32::MAX;
pub const NO_TET: u32 = u32::MAX;

/// Facet opposite vertex i, ordered so the facet normal points out of a
/// positively oriented tetrahedron.
const FACETS: [[usize; 3]; 4] = [[1, 2, 3], [0, 3, 2], [0, 1, 3], [0, 2, 1]];

#[derive(Debug, Clone, Copy)]
pub struct Tet {
    pub verts: [u32; 4],
    /// Adjacent tet opposite each vertex.
    pub neighbors: [u32; 4],
}

impl Tet {
    pub fn is_infinite(&self) -> bool {
        self.verts[3] == INFINITE
    }

    pub fn has_vertex(&self, v: u32) -> bool {
        self.verts.contains(&v)
    }

    fn vertex_slot(&self, v: u32) -> Option<usize> {
        self.verts.iter().position(|&x| x == v)
    }
}

#[derive(Debug, Clone)]
pub struct TetMesh {
    /// All input positions; indices are the cloud's stable identities.
    pub points: Vec<Vec3>,
    /// Canonical vertex per input index (differs only for exact duplicates).
    pub vertex_alias: Vec<u32>,
    pub tets: Vec<Tet>,
    /// One incident tet per canonical vertex.
    vertex_tet: Vec<u32>,
}

impl TetMesh {
    pub fn position(&self, v: u32) -> Vec3 {
        self.points[v as usize]
    }

    pub fn canonical(&self, point_index: u32) -> u32 {
        self.vertex_alias[point_index as usize]
    }

    pub fn is_infinite(&self, t: u32) -> bool {
        self.tets[t as usize].is_infinite()
    }

    pub fn num_finite_tets(&self) -> usize {
        self.tets.iter().filter(|t| !t.is_infinite()).count()
    }

    /// Facet opposite `slot`, outward-oriented for finite tets.
    pub fn facet(&self, t: u32, slot: usize) -> [u32; 3] {
        let tet = &self.tets[t as usize];
        [
            tet.verts[FACETS[slot][0]],
            tet.verts[FACETS[slot][1]],
            tet.verts[FACETS[slot][2]],
        ]
    }

    pub fn tet_volume(&self, t: u32) -> f64 {
        let tet = &self.tets[t as usize];
        if tet.is_infinite() {
            return 0.0;
        }
        let [a, b, c, d] = tet.verts.map(|v| self.position(v));
        (b - a).cross(c - a).dot(d - a) / 6.0
    }

    /// All tets (finite and infinite) incident to vertex `v`.
    pub fn incident_tets(&self, v: u32) -> Vec<u32> {
        let mut out = Vec::new();
        let start = self.vertex_tet[v as usize];
        if start == NO_TET {
            return out;
        }
        let mut seen = vec![start];
        let mut stack = vec![start];
        out.push(start);
        while let Some(t) = stack.pop() {
            let tet = &self.tets[t as usize];
            for (slot, &n) in tet.neighbors.iter().enumerate() {
                if tet.verts[slot] == v || n == NO_TET {
                    continue; // neighbor opposite v does not contain v
                }
                if self.tets[n as usize].has_vertex(v) && !seen.contains(&n) {
                    seen.push(n);
                    out.push(n);
                    stack.push(n);
                }
            }
        }
        out
    }

    fn orient_facet(&self, f: [u32; 3], p: Vec3) -> f64 {
        orient3d(
            self.position(f[0]),
            self.position(f[1]),
            self.position(f[2]),
            p,
        )
    }

    /// Walk to a tet containing `query` (an infinite tet if outside the
    /// hull). Stochastic facet ordering guarantees termination.
    pub fn locate(&self, query: Vec3, hint: u32) -> u32 {
        let mut cur = if hint != NO_TET && (hint as usize) < self.tets.len() {
            hint
        } else {
            0
        };
        let mut rng_state: u64 = 0x9e3779b97f4a7c15;
        let max_steps = 8 * self.tets.len() + 64;
        for _ in 0..max_steps {
            let tet = &self.tets[cur as usize];
            if tet.is_infinite() {
                let f = [tet.verts[0], tet.verts[1], tet.verts[2]];
                if self.orient_facet(f, query) >= 0.0 {
                    return cur; // outside or on the hull facet
                }
                cur = tet.neighbors[3];
                continue;
            }
            // randomized slot order breaks cycles on ties
            rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1);
            let offset = (rng_state >> 33) as usize;
            let mut moved = false;
            for k in 0..4 {
                let slot = (k + offset) % 4;
                if self.orient_facet(self.facet(cur, slot), query) > 0.0 {
                    cur = tet.neighbors[slot];
                    moved = true;
                    break;
                }
            }
            if !moved {
                return cur;
            }
        }
        cur // walk budget exhausted; caller falls back to scanning
    }

    /// True if `p` violates the empty-circumsphere region of tet `t`.
    fn in_conflict(&self, t: u32, p: Vec3) -> bool {
        let tet = &self.tets[t as usize];
        if tet.is_infinite() {
            let f = [tet.verts[0], tet.verts[1], tet.verts[2]];
            let o = self.orient_facet(f, p);
            if o > 0.0 {
                return true;
            }
            if o < 0.0 {
                return false;
            }
            // coplanar with the hull facet: defer to the finite neighbor
            let n = tet.neighbors[3];
            let fin = &self.tets[n as usize];
            if fin.is_infinite() {
                return false;
            }
            let [a, b, c, d] = fin.verts.map(|v| self.position(v));
            insphere(a, b, c, d, p) > 0.0
        } else {
            let [a, b, c, d] = tet.verts.map(|v| self.position(v));
            insphere(a, b, c, d, p) > 0.0
        }
    }
}

fn orient_points(points: &[Vec3], a: u32, b: u32, c: u32, d: u32) -> f64 {
    orient3d(
        points[a as usize],
        points[b as usize],
        points[c as usize],
        points[d as usize],
    )
}

/// Delaunay tetrahedralization by incremental insertion.
pub fn tetrahedralize(cloud: &PointCloud) -> Result<TetMesh> {
    tetrahedralize_opts(cloud, None)
}

/// Like [`tetrahedralize`] but optionally jitters the input by a uniform
/// perturbation of the given magnitude (helps with exactly cospherical
/// gridded data; off by default).
pub fn tetrahedralize_opts(cloud: &PointCloud, jitter: Option<(f64, u64)>) -> Result<TetMesh> {
    if cloud.len() < 4 {
        return Err(Error::Degenerate(
            "degenerate input: need at least 4 points".into(),
        ));
    }
    let mut points: Vec<Vec3> = cloud.positions.clone();
    if let Some((mag, seed)) = jitter {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for p in &mut points {
            *p = *p
                + Vec3::new(
                    rng.gen::<f64>() - 0.5,
                    rng.gen::<f64>() - 0.5,
                    rng.gen::<f64>() - 0.5,
                ) * mag;
        }
    }
    for p in &points {
        if !p.is_finite() {
            return Err(Error::InvalidParameter("non-finite point coordinate".into()));
        }
    }

    // exact duplicates map to the first occurrence
    let mut alias = vec![0u32; points.len()];
    let mut seen: HashMap<[u64; 3], u32> = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        let key = [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()];
        alias[i] = *seen.entry(key).or_insert(i as u32);
    }

    // first simplex: 4 affinely independent points
    let i0 = 0u32;
    let i1 = (1..points.len() as u32)
        .find(|&i| alias[i as usize] == i && (points[i as usize] - points[0]).norm() > 0.0)
        .ok_or_else(|| Error::Degenerate("degenerate input: all points coincide".into()))?;
    let i2 = (1..points.len() as u32)
        .find(|&i| {
            alias[i as usize] == i
                && i != i1
                && (points[i1 as usize] - points[0])
                    .cross(points[i as usize] - points[0])
                    .norm()
                    > 0.0
        })
        .ok_or_else(|| Error::Degenerate("degenerate input: all points collinear".into()))?;
    let i3 = (1..points.len() as u32)
        .find(|&i| {
            alias[i as usize] == i
                && i != i1
                && i != i2
                && orient_points(&points, i0, i1, i2, i) != 0.0
        })
        .ok_or_else(|| Error::Degenerate("degenerate input: all points coplanar".into()))?;

    let mut mesh = TetMesh {
        points,
        vertex_alias: alias,
        tets: Vec::new(),
        vertex_tet: Vec::new(),
    };
    let mut alive: Vec<bool> = Vec::new();
    let mut free: Vec<u32> = Vec::new();

    // seed tet, positively oriented
    let (a, b) = if orient_points(&mesh.points, i0, i1, i2, i3) > 0.0 {
        (i0, i1)
    } else {
        (i1, i0)
    };
    mesh.tets.push(Tet {
        verts: [a, b, i2, i3],
        neighbors: [NO_TET; 4],
    });
    alive.push(true);
    for slot in 0..4 {
        let f = mesh.facet(0, slot);
        mesh.tets.push(Tet {
            verts: [f[0], f[1], f[2], INFINITE],
            neighbors: [NO_TET; 4],
        });
        alive.push(true);
    }
    wire_all(&mut mesh.tets, &[0, 1, 2, 3, 4]);

    let inserted: Vec<u32> = vec![i0, i1, i2, i3];
    let mut hint = 0u32;
    for i in 0..mesh.points.len() as u32 {
        if mesh.vertex_alias[i as usize] != i || inserted.contains(&i) {
            continue;
        }
        hint = insert_point(&mut mesh, &mut alive, &mut free, i, hint)?;
    }

    compact(&mut mesh, &alive);
    build_vertex_tets(&mut mesh);
    Ok(mesh)
}

/// Wire neighbor pointers among the given tets by matching facet vertex
/// sets; facets already wired elsewhere are left alone.
fn wire_all(tets: &mut [Tet], ids: &[u32]) {
    let mut map: HashMap<[u32; 3], (u32, usize)> = HashMap::new();
    for &id in ids {
        for slot in 0..4 {
            let t = &tets[id as usize];
            let mut f = [
                t.verts[FACETS[slot][0]],
                t.verts[FACETS[slot][1]],
                t.verts[FACETS[slot][2]],
            ];
            f.sort_unstable();
            if let Some(&(other, oslot)) = map.get(&f) {
                tets[id as usize].neighbors[slot] = other;
                tets[other as usize].neighbors[oslot] = id;
            } else {
                map.insert(f, (id, slot));
            }
        }
    }
}

fn insert_point(
    mesh: &mut TetMesh,
    alive: &mut Vec<bool>,
    free: &mut Vec<u32>,
    pi: u32,
    hint: u32,
) -> Result<u32> {
    let p = mesh.position(pi);

    // find a conflicting seed tet
    let mut seed = mesh.locate(p, hint);
    if !alive[seed as usize] || !mesh.in_conflict(seed, p) {
        // try the located tet's neighborhood, then scan
        let mut found = None;
        if alive[seed as usize] {
            'outer: for &n in &mesh.tets[seed as usize].neighbors.clone() {
                if n != NO_TET && alive[n as usize] && mesh.in_conflict(n, p) {
                    found = Some(n);
                    break 'outer;
                }
            }
        }
        if found.is_none() {
            found = (0..mesh.tets.len() as u32)
                .find(|&t| alive[t as usize] && mesh.in_conflict(t, p));
        }
        match found {
            Some(t) => seed = t,
            None => {
                // exactly duplicates an existing vertex or lies in no
                // conflict region (cannot happen for a new point); alias it
                // to the nearest vertex of the located tet
                let tet = mesh.tets[seed as usize];
                let mut best = (f64::INFINITY, pi);
                for v in tet.verts {
                    if v == INFINITE {
                        continue;
                    }
                    let d = (mesh.position(v) - p).norm2();
                    if d < best.0 {
                        best = (d, v);
                    }
                }
                mesh.vertex_alias[pi as usize] = best.1;
                return Ok(seed);
            }
        }
    }

    // grow the conflict region
    let mut region = vec![seed];
    let mut in_region = vec![false; mesh.tets.len()];
    in_region[seed as usize] = true;
    let mut stack = vec![seed];
    let mut boundary: Vec<(u32, usize, u32)> = Vec::new(); // (conflict tet, slot, outside tet)
    while let Some(t) = stack.pop() {
        // duplicate guard
        for v in mesh.tets[t as usize].verts {
            if v != INFINITE && mesh.position(v) == p {
                mesh.vertex_alias[pi as usize] = v;
                return Ok(t);
            }
        }
        for slot in 0..4 {
            let n = mesh.tets[t as usize].neighbors[slot];
            debug_assert_ne!(n, NO_TET);
            if in_region[n as usize] {
                continue;
            }
            if mesh.in_conflict(n, p) {
                in_region[n as usize] = true;
                region.push(n);
                stack.push(n);
            } else {
                boundary.push((t, slot, n));
            }
        }
    }

    // carve the cavity and fan the boundary facets to p
    for &t in &region {
        alive[t as usize] = false;
        free.push(t);
    }
    let mut new_ids: Vec<u32> = Vec::with_capacity(boundary.len());
    let mut lateral: HashMap<[u32; 2], (u32, usize)> = HashMap::new();
    for &(t, slot, outside) in &boundary {
        let f = mesh.facet(t, slot);
        let infinite = f.contains(&INFINITE);
        let verts = if infinite {
            // finite facet order is fixed after wiring, from the finite side
            let fin: Vec<u32> = f.iter().copied().filter(|&v| v != INFINITE).collect();
            [fin[0], fin[1], pi, INFINITE]
        } else {
            // facet points out of the cavity; p is inside, so the reversed
            // facet with p appended is positively oriented
            [f[0], f[2], f[1], pi]
        };
        let id = alloc_tet(mesh, alive, free, Tet {
            verts,
            neighbors: [NO_TET; 4],
        });
        if id as usize >= in_region.len() {
            in_region.resize(id as usize + 1, false);
        }
        debug_assert!(
            infinite
                || orient_points(&mesh.points, verts[0], verts[1], verts[2], verts[3]) > 0.0,
            "new tet must be positively oriented"
        );
        new_ids.push(id);

        // wire across the boundary facet (the facet not containing p)
        let pslot = mesh.tets[id as usize].vertex_slot(pi).unwrap();
        let oslot = mesh.tets[outside as usize]
            .neighbors
            .iter()
            .position(|&x| x == t)
            .expect("boundary neighbor slot");
        mesh.tets[id as usize].neighbors[pslot] = outside;
        mesh.tets[outside as usize].neighbors[oslot] = id;

        // wire lateral facets (containing p) among siblings
        for slot in 0..4 {
            if slot == pslot {
                continue;
            }
            let mut key: Vec<u32> = (0..4)
                .filter(|&k| k != slot)
                .map(|k| mesh.tets[id as usize].verts[k])
                .filter(|&v| v != pi)
                .collect();
            key.sort_unstable();
            let key = [key[0], key[1]];
            if let Some(&(other, oslot2)) = lateral.get(&key) {
                mesh.tets[id as usize].neighbors[slot] = other;
                mesh.tets[other as usize].neighbors[oslot2] = id;
            } else {
                lateral.insert(key, (id, slot));
            }
        }
    }

    // restore the infinite-tet orientation convention from the finite side
    for &id in &new_ids {
        if mesh.tets[id as usize].is_infinite() {
            fix_infinite_orientation(mesh, id);
        }
    }

    Ok(*new_ids.last().unwrap())
}

fn alloc_tet(mesh: &mut TetMesh, alive: &mut Vec<bool>, free: &mut Vec<u32>, tet: Tet) -> u32 {
    // reuse of freed slots is deferred to keep ids stable within one cavity
    let _ = free;
    mesh.tets.push(tet);
    alive.push(true);
    mesh.tets.len() as u32 - 1
}

/// Reorder an infinite tet so verts 0..3 hold its hull facet with the
/// outward orientation taken from the finite neighbor.
fn fix_infinite_orientation(mesh: &mut TetMesh, id: u32) {
    let slot3_neighbor = {
        let t = &mesh.tets[id as usize];
        debug_assert_eq!(t.verts[3], INFINITE);
        t.neighbors[3]
    };
    let n = &mesh.tets[slot3_neighbor as usize];
    if n.is_infinite() {
        return; // flat hull; orientation fixed from whichever side exists
    }
    let k = n
        .neighbors
        .iter()
        .position(|&x| x == id)
        .expect("infinite tet must back-reference its finite neighbor");
    let desired = [
        n.verts[FACETS[k][0]],
        n.verts[FACETS[k][1]],
        n.verts[FACETS[k][2]],
    ];
    let t = mesh.tets[id as usize];
    let mut verts = t.verts;
    let mut neighbors = t.neighbors;
    for (new_slot, &v) in desired.iter().enumerate() {
        let old_slot = t.vertex_slot(v).expect("facet vertex present");
        verts[new_slot] = v;
        neighbors[new_slot] = t.neighbors[old_slot];
    }
    mesh.tets[id as usize] = Tet { verts, neighbors };
}

fn compact(mesh: &mut TetMesh, alive: &[bool]) {
    let mut remap = vec![NO_TET; mesh.tets.len()];
    let mut out: Vec<Tet> = Vec::new();
    for (i, t) in mesh.tets.iter().enumerate() {
        if alive[i] {
            remap[i] = out.len() as u32;
            out.push(*t);
        }
    }
    for t in &mut out {
        for n in &mut t.neighbors {
            *n = remap[*n as usize];
        }
    }
    mesh.tets = out;
}

fn build_vertex_tets(mesh: &mut TetMesh) {
    mesh.vertex_tet = vec![NO_TET; mesh.points.len()];
    for (i, t) in mesh.tets.iter().enumerate() {
        for &v in &t.verts {
            if v != INFINITE && mesh.vertex_tet[v as usize] == NO_TET {
                mesh.vertex_tet[v as usize] = i as u32;
            }
        }
    }
}

// --- ray traversal ---

#[derive(Debug, Clone, Copy)]
pub struct FacetCrossing {
    /// Tet on the camera side of the crossed facet.
    pub from: u32,
    /// Tet on the endpoint side.
    pub to: u32,
    /// Crossing parameter along camera->endpoint, in (0, 1).
    pub t: f64,
    /// Euclidean distance from the crossing point to the endpoint.
    pub dist_to_endpoint: f64,
}

/// Ordered tetrahedra along a line of sight from the camera to an endpoint
/// vertex, plus the tet immediately behind the endpoint.
#[derive(Debug, Clone)]
pub struct RayTraversal {
    /// T_1..T_M, camera side first. The endpoint is a vertex of the last.
    pub tets: Vec<u32>,
    /// T_{M+1}: intersected by the ray's extension beyond the endpoint.
    pub behind: u32,
    pub crossings: Vec<FacetCrossing>,
}

/// Find the tet incident to vertex `v` whose cone at `v` contains the
/// direction toward `target`. Exact for finite tets; hull exits fall back
/// to the best-aligned infinite tet. Ties break to the lowest tet id.
fn tet_at_vertex_toward(mesh: &TetMesh, v: u32, target: Vec3) -> u32 {
    let incident = mesh.incident_tets(v);
    debug_assert!(!incident.is_empty());
    let mut candidates: Vec<u32> = Vec::new();
    for &t in &incident {
        let tet = &mesh.tets[t as usize];
        if tet.is_infinite() {
            continue;
        }
        let k = tet.vertex_slot(v).unwrap();
        let inside = (0..4)
            .filter(|&j| j != k)
            .all(|j| mesh.orient_facet(mesh.facet(t, j), target) <= 0.0);
        if inside {
            candidates.push(t);
        }
    }
    if let Some(&best) = candidates.iter().min() {
        return best;
    }
    // direction exits the hull at v: pick the incident infinite tet whose
    // hull facet is most open toward the target
    let mut best = (f64::NEG_INFINITY, NO_TET);
    for &t in &incident {
        let tet = &mesh.tets[t as usize];
        if !tet.is_infinite() {
            continue;
        }
        let f = [tet.verts[0], tet.verts[1], tet.verts[2]];
        let (a, b, c) = (
            mesh.position(f[0]),
            mesh.position(f[1]),
            mesh.position(f[2]),
        );
        let n = (b - a).cross(c - a);
        let nn = n.norm();
        if nn == 0.0 {
            continue;
        }
        let score = n.dot(target - a) / nn;
        if score > best.0 || (score == best.0 && t < best.1) {
            best = (score, t);
        }
    }
    if best.1 != NO_TET {
        return best.1;
    }
    *incident.iter().min().unwrap()
}

/// Walk the open segment from `camera` to the mesh vertex behind
/// `point_index`, listing the tetrahedra it traverses (camera side first)
/// and the facets it crosses.
///
/// Internally the segment is traced from the endpoint toward the camera,
/// which pins the start to the endpoint's vertex star and leaves the hull
/// at most once; the result is then reversed.
pub fn walk_ray(mesh: &TetMesh, point_index: u32, camera: Vec3) -> Result<RayTraversal> {
    let q = mesh.canonical(point_index);
    let qp = mesh.position(q);
    if qp == camera {
        return Err(Error::Degenerate(
            "camera coincides with the ray endpoint".into(),
        ));
    }
    let seg_len = (camera - qp).norm();

    // backward trace: s=0 at the endpoint, s=1 at the camera
    let mut cur = tet_at_vertex_toward(mesh, q, camera);
    let mut tets_rev = vec![cur];
    let mut crossings_rev: Vec<FacetCrossing> = Vec::new();
    let mut entry_slot: Option<usize> = None;
    let mut s_entry = 0.0f64;
    let max_steps = mesh.tets.len() + 8;

    for _ in 0..max_steps {
        let tet = mesh.tets[cur as usize];
        if tet.is_infinite() {
            break; // the camera-side remainder of the segment is outside the hull
        }
        // exit facet: strictly crossed by the remaining open segment
        let mut exit: Option<(usize, f64)> = None;
        for slot in 0..4 {
            if Some(slot) == entry_slot {
                continue;
            }
            let f = mesh.facet(cur, slot);
            let o_q = mesh.orient_facet(f, qp);
            let o_c = mesh.orient_facet(f, camera);
            // exit means leaving through the outward side
            if o_c <= 0.0 {
                continue;
            }
            if o_q > 0.0 {
                continue;
            }
            if o_q == 0.0 && s_entry > 0.0 {
                continue; // plane through the endpoint; only admissible in the first tet
            }
            // the crossing point must lie within the facet triangle
            let (fa, fb, fc) = (
                mesh.position(f[0]),
                mesh.position(f[1]),
                mesh.position(f[2]),
            );
            let s1 = orient3d(qp, camera, fa, fb);
            let s2 = orient3d(qp, camera, fb, fc);
            let s3 = orient3d(qp, camera, fc, fa);
            let all_nonneg = s1 >= 0.0 && s2 >= 0.0 && s3 >= 0.0;
            let all_nonpos = s1 <= 0.0 && s2 <= 0.0 && s3 <= 0.0;
            if !(all_nonneg || all_nonpos) {
                continue;
            }
            let s = o_q / (o_q - o_c); // plane crossing parameter from the endpoint
            if s <= s_entry || s > 1.0 {
                continue;
            }
            // degenerate grazings tie-break to the lexicographically
            // smallest facet slot (first hit wins)
            if exit.is_none() {
                exit = Some((slot, s));
            }
        }
        let Some((slot, s)) = exit else {
            break; // the camera lies inside this tet
        };
        let next = tet.neighbors[slot];
        crossings_rev.push(FacetCrossing {
            from: next,
            to: cur,
            t: 1.0 - s,
            dist_to_endpoint: s * seg_len,
        });
        entry_slot = Some(
            mesh.tets[next as usize]
                .neighbors
                .iter()
                .position(|&x| x == cur)
                .expect("neighbor symmetry"),
        );
        s_entry = s;
        tets_rev.push(next);
        cur = next;
    }

    tets_rev.reverse();
    crossings_rev.reverse();

    // T_{M+1}: continue past the endpoint; 2q - c is an exact reflection
    let behind = tet_at_vertex_toward(mesh, q, qp * 2.0 - camera);
    Ok(RayTraversal {
        tets: tets_rev,
        behind,
        crossings: crossings_rev,
    })
}
