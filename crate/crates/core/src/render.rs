//! Software rasterizer: point splatting into depth/ID buffers and z-buffered
//! triangle rasterization for ground-truth surface depth.
//!
//! Depth convention is camera-space z (distance along the optical axis), not
//! ray length. Invalid pixels hold +inf in depth maps and `EMPTY_ID` in ID
//! maps; the bit mask mirrors both.

use crate::error::{Error, Result};
use crate::geom::{PointCloud, TriangleMesh, Vec3};
use crate::view::VirtualView;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

pub const EMPTY_ID: u32 = u32::MAX;
/// +inf replacement when a depth map is serialized to PFM.
pub const PFM_INF: f32 = f32::MAX;

/// Row-major camera-space depth image; invalid pixels hold +inf.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    pub width: u32,
    pub height: u32,
    pub data: Vec<f32>,
}

impl DepthMap {
    pub fn new_invalid(width: u32, height: u32) -> DepthMap {
        DepthMap {
            width,
            height,
            data: vec![f32::INFINITY; (width * height) as usize],
        }
    }

    #[inline]
    pub fn at(&self, x: u32, y: u32) -> f32 {
        self.data[(y * self.width + x) as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, v: f32) {
        self.data[(y * self.width + x) as usize] = v;
    }
}

/// Row-major map of the point index that won the z-buffer at each pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct IdMap {
    pub width: u32,
    pub height: u32,
    pub data: Vec<u32>,
}

impl IdMap {
    pub fn new_empty(width: u32, height: u32) -> IdMap {
        IdMap {
            width,
            height,
            data: vec![EMPTY_ID; (width * height) as usize],
        }
    }

    #[inline]
    pub fn at(&self, x: u32, y: u32) -> u32 {
        self.data[(y * self.width + x) as usize]
    }
}

/// One bit per pixel: set iff the pixel is valid.
#[derive(Debug, Clone, PartialEq)]
pub struct BitMask {
    pub width: u32,
    pub height: u32,
    bits: Vec<u64>,
}

impl BitMask {
    pub fn new(width: u32, height: u32) -> BitMask {
        let n = (width as usize * height as usize).div_ceil(64);
        BitMask {
            width,
            height,
            bits: vec![0; n],
        }
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        let i = (y * self.width + x) as usize;
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, v: bool) {
        let i = (y * self.width + x) as usize;
        if v {
            self.bits[i / 64] |= 1 << (i % 64);
        } else {
            self.bits[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn count_valid(&self) -> usize {
        self.bits.iter().map(|b| b.count_ones() as usize).sum()
    }
}

/// Output of point rendering; the three buffers are mutually consistent:
/// mask bit set <=> finite depth <=> non-sentinel id.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderBuffers {
    pub depth: DepthMap,
    pub id: IdMap,
    pub mask: BitMask,
}

impl RenderBuffers {
    pub fn width(&self) -> u32 {
        self.depth.width
    }

    pub fn height(&self) -> u32 {
        self.depth.height
    }
}

/// Project one point through the pinhole model; returns (pixel x, pixel y,
/// depth) if in front of the camera and inside the image.
pub fn project_point(p: Vec3, view: &VirtualView) -> Option<(i64, i64, f64)> {
    let pc = view.pose.world_to_camera(p);
    if pc.z <= 0.0 {
        return None;
    }
    let u = view.intr.fx * pc.x / pc.z + view.intr.cx;
    let v = view.intr.fy * pc.y / pc.z + view.intr.cy;
    let px = u.floor() as i64;
    let py = v.floor() as i64;
    if px < 0 || py < 0 || px >= view.intr.width as i64 || py >= view.intr.height as i64 {
        return None;
    }
    Some((px, py, pc.z))
}

/// Splat every cloud point into a z-buffer; each point covers a
/// (2r+1)^2 pixel block. Depth ties go to the lower point index.
pub fn render_points(cloud: &PointCloud, view: &VirtualView, splat_radius_px: u32) -> RenderBuffers {
    let w = view.intr.width;
    let h = view.intr.height;
    let mut depth = DepthMap::new_invalid(w, h);
    let mut id = IdMap::new_empty(w, h);
    let r = splat_radius_px as i64;

    for (pi, &p) in cloud.positions.iter().enumerate() {
        let Some((px, py, z)) = project_point(p, view) else {
            continue;
        };
        let zf = z as f32;
        for dy in -r..=r {
            for dx in -r..=r {
                let (x, y) = (px + dx, py + dy);
                if x < 0 || y < 0 || x >= w as i64 || y >= h as i64 {
                    continue;
                }
                let (x, y) = (x as u32, y as u32);
                let cur = depth.at(x, y);
                let cur_id = id.at(x, y);
                if zf < cur || (zf == cur && (pi as u32) < cur_id) {
                    depth.set(x, y, zf);
                    id.data[(y * w + x) as usize] = pi as u32;
                }
            }
        }
    }

    let mut mask = BitMask::new(w, h);
    for y in 0..h {
        for x in 0..w {
            mask.set(x, y, depth.at(x, y).is_finite());
        }
    }
    RenderBuffers { depth, id, mask }
}

/// Z-buffered triangle rasterization with perspective-correct depth.
/// Back faces are kept: open surfaces must occlude from both sides.
/// Triangles crossing the near plane are skipped.
pub fn render_mesh_depth(mesh: &TriangleMesh, view: &VirtualView) -> Result<DepthMap> {
    if mesh.is_empty() {
        return Err(Error::EmptyInput("empty mesh".into()));
    }
    let w = view.intr.width;
    let h = view.intr.height;
    let mut depth = DepthMap::new_invalid(w, h);

    for t in 0..mesh.triangles.len() {
        let (a, b, c) = mesh.triangle_vertices(t);
        let pa = view.pose.world_to_camera(a);
        let pb = view.pose.world_to_camera(b);
        let pc = view.pose.world_to_camera(c);
        if pa.z <= 1e-12 || pb.z <= 1e-12 || pc.z <= 1e-12 {
            continue;
        }
        let sa = (
            view.intr.fx * pa.x / pa.z + view.intr.cx,
            view.intr.fy * pa.y / pa.z + view.intr.cy,
        );
        let sb = (
            view.intr.fx * pb.x / pb.z + view.intr.cx,
            view.intr.fy * pb.y / pb.z + view.intr.cy,
        );
        let sc = (
            view.intr.fx * pc.x / pc.z + view.intr.cx,
            view.intr.fy * pc.y / pc.z + view.intr.cy,
        );
        rasterize_triangle(&mut depth, sa, sb, sc, 1.0 / pa.z, 1.0 / pb.z, 1.0 / pc.z);
    }
    Ok(depth)
}

fn edge(a: (f64, f64), b: (f64, f64), p: (f64, f64)) -> f64 {
    (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0)
}

fn is_top_left(a: (f64, f64), b: (f64, f64)) -> bool {
    // top edge: horizontal with the interior below (screen y grows down);
    // left edge: goes downward
    (a.1 == b.1 && b.0 < a.0) || b.1 > a.1
}

fn rasterize_triangle(
    depth: &mut DepthMap,
    mut a: (f64, f64),
    mut b: (f64, f64),
    c: (f64, f64),
    mut inv_za: f64,
    mut inv_zb: f64,
    inv_zc: f64,
) {
    let mut area = edge(a, b, c);
    if area == 0.0 {
        return;
    }
    if area < 0.0 {
        // flip winding so edge functions are positive inside
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut inv_za, &mut inv_zb);
        area = -area;
    }
    let min_x = a.0.min(b.0).min(c.0).floor().max(0.0) as u32;
    let max_x = (a.0.max(b.0).max(c.0).ceil() as i64).min(depth.width as i64 - 1);
    let min_y = a.1.min(b.1).min(c.1).floor().max(0.0) as u32;
    let max_y = (a.1.max(b.1).max(c.1).ceil() as i64).min(depth.height as i64 - 1);
    if max_x < 0 || max_y < 0 {
        return;
    }
    let (max_x, max_y) = (max_x as u32, max_y as u32);

    for y in min_y..=max_y {
        for x in min_x..=max_x {
            let p = (x as f64 + 0.5, y as f64 + 0.5);
            let w0 = edge(b, c, p);
            let w1 = edge(c, a, p);
            let w2 = edge(a, b, p);
            let inside = (w0 > 0.0 || (w0 == 0.0 && is_top_left(b, c)))
                && (w1 > 0.0 || (w1 == 0.0 && is_top_left(c, a)))
                && (w2 > 0.0 || (w2 == 0.0 && is_top_left(a, b)));
            if !inside {
                continue;
            }
            let inv_z = (w0 * inv_za + w1 * inv_zb + w2 * inv_zc) / area;
            if inv_z <= 0.0 {
                continue;
            }
            let z = (1.0 / inv_z) as f32;
            if z < depth.at(x, y) {
                depth.set(x, y, z);
            }
        }
    }
}

/// Affinely map valid depths to [0, 1]; a constant-depth image maps to all
/// zeros. Invalid pixels keep the +inf sentinel.
pub fn normalize_depth(buffers: &RenderBuffers) -> Result<DepthMap> {
    if buffers.mask.count_valid() == 0 {
        return Err(Error::EmptyInput("nothing rendered".into()));
    }
    let mut d_min = f32::INFINITY;
    let mut d_max = f32::NEG_INFINITY;
    for &d in &buffers.depth.data {
        if d.is_finite() {
            d_min = d_min.min(d);
            d_max = d_max.max(d);
        }
    }
    let range = d_max - d_min;
    let mut out = buffers.depth.clone();
    for d in &mut out.data {
        if d.is_finite() {
            *d = if range > 0.0 { (*d - d_min) / range } else { 0.0 };
        }
    }
    Ok(out)
}

// --- file formats ---

/// Write a depth map as PFM (grayscale "Pf", little-endian, scale -1.0).
/// PFM stores rows bottom-to-top; +inf is stored as f32::MAX.
pub fn write_pfm(path: &Path, depth: &DepthMap) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "Pf\n{} {}\n-1.0\n", depth.width, depth.height)?;
    for y in (0..depth.height).rev() {
        for x in 0..depth.width {
            let v = depth.at(x, y);
            let v = if v.is_finite() { v } else { PFM_INF };
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_pfm(path: &Path) -> Result<DepthMap> {
    let mut r = BufReader::new(File::open(path)?);
    let mut header = String::new();
    for _ in 0..3 {
        let mut line = String::new();
        r.read_line(&mut line)?;
        header.push_str(&line);
    }
    let mut toks = header.split_whitespace();
    if toks.next() != Some("Pf") {
        return Err(Error::Parse("not a grayscale PFM".into()));
    }
    let width: u32 = toks
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Parse("bad PFM width".into()))?;
    let height: u32 = toks
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Parse("bad PFM height".into()))?;
    let scale: f32 = toks
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Parse("bad PFM scale".into()))?;
    if scale >= 0.0 {
        return Err(Error::Parse("big-endian PFM not supported".into()));
    }
    let mut depth = DepthMap::new_invalid(width, height);
    let mut buf = [0u8; 4];
    for y in (0..height).rev() {
        for x in 0..width {
            r.read_exact(&mut buf)?;
            let v = f32::from_le_bytes(buf);
            depth.set(x, y, if v >= PFM_INF { f32::INFINITY } else { v });
        }
    }
    Ok(depth)
}

/// Write a validity mask as binary PGM (P5), 255 = valid.
pub fn write_pgm_mask(path: &Path, mask: &BitMask) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "P5\n{} {}\n255\n", mask.width, mask.height)?;
    for y in 0..mask.height {
        for x in 0..mask.width {
            w.write_all(&[if mask.get(x, y) { 255 } else { 0 }])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_pgm_mask(path: &Path) -> Result<BitMask> {
    let mut r = BufReader::new(File::open(path)?);
    let mut header = String::new();
    for _ in 0..3 {
        let mut line = String::new();
        r.read_line(&mut line)?;
        header.push_str(&line);
    }
    let mut toks = header.split_whitespace();
    if toks.next() != Some("P5") {
        return Err(Error::Parse("not a binary PGM".into()));
    }
    let width: u32 = toks
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Parse("bad PGM width".into()))?;
    let height: u32 = toks
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Parse("bad PGM height".into()))?;
    let mut mask = BitMask::new(width, height);
    let mut buf = [0u8; 1];
    for y in 0..height {
        for x in 0..width {
            r.read_exact(&mut buf)?;
            mask.set(x, y, buf[0] != 0);
        }
    }
    Ok(mask)
}

const IDM_MAGIC: &[u8; 4] = b"IDM1";

/// Write an ID map: magic "IDM1", u32 LE width, u32 LE height, row-major
/// u32 LE payload.
pub fn write_idm(path: &Path, id: &IdMap) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(IDM_MAGIC)?;
    w.write_all(&id.width.to_le_bytes())?;
    w.write_all(&id.height.to_le_bytes())?;
    for &v in &id.data {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_idm(path: &Path) -> Result<IdMap> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != IDM_MAGIC {
        return Err(Error::Parse("bad IDM magic".into()));
    }
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    let width = u32::from_le_bytes(buf);
    r.read_exact(&mut buf)?;
    let height = u32::from_le_bytes(buf);
    let mut data = Vec::with_capacity((width * height) as usize);
    for _ in 0..width as usize * height as usize {
        r.read_exact(&mut buf)?;
        data.push(u32::from_le_bytes(buf));
    }
    Ok(IdMap {
        width,
        height,
        data,
    })
}
