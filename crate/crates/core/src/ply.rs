//! PLY reader/writer for point clouds and triangle meshes.
//!
//! Supports ASCII and binary little-endian files. On read, vertex positions
//! may be float32 or float64; unknown properties are skipped. Writing emits
//! float64 positions.

use crate::error::{Error, Result};
use crate::geom::{PointCloud, TriangleMesh, Vec3};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Format {
    Ascii,
    BinaryLe,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(s: &str) -> Result<Scalar> {
        Ok(match s {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            other => return Err(Error::Parse(format!("unknown ply type '{other}'"))),
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn read_f64(self, buf: &[u8]) -> f64 {
        match self {
            Scalar::I8 => buf[0] as i8 as f64,
            Scalar::U8 => buf[0] as f64,
            Scalar::I16 => i16::from_le_bytes([buf[0], buf[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([buf[0], buf[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes(buf[..4].try_into().unwrap()) as f64,
            Scalar::U32 => u32::from_le_bytes(buf[..4].try_into().unwrap()) as f64,
            Scalar::F32 => f32::from_le_bytes(buf[..4].try_into().unwrap()) as f64,
            Scalar::F64 => f64::from_le_bytes(buf[..8].try_into().unwrap()),
        }
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar { name: String, ty: Scalar },
    List { name: String, count: Scalar, item: Scalar },
}

#[derive(Debug, Clone)]
struct ElementDecl {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

/// Parsed PLY content: vertex positions, optional colors, optional faces.
#[derive(Debug, Clone, Default)]
pub struct PlyContent {
    pub cloud: PointCloud,
    pub faces: Vec<[u32; 3]>,
}

impl PlyContent {
    pub fn into_mesh(self) -> TriangleMesh {
        TriangleMesh {
            vertices: self.cloud.positions,
            triangles: self.faces,
        }
    }
}

pub fn read_ply(path: &Path) -> Result<PlyContent> {
    let file = File::open(path)?;
    let mut reader = BufReader::new(file);

    let mut line = String::new();
    reader.read_line(&mut line)?;
    if line.trim_end() != "ply" {
        return Err(Error::Parse(format!(
            "{}: missing 'ply' magic",
            path.display()
        )));
    }

    let mut format = None;
    let mut elements: Vec<ElementDecl> = Vec::new();
    loop {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            return Err(Error::Parse("unexpected EOF in ply header".into()));
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            [] | ["comment", ..] | ["obj_info", ..] => {}
            ["end_header"] => break,
            ["format", f, _version] => {
                format = Some(match *f {
                    "ascii" => Format::Ascii,
                    "binary_little_endian" => Format::BinaryLe,
                    other => {
                        return Err(Error::Parse(format!("unsupported ply format '{other}'")))
                    }
                });
            }
            ["element", name, count] => {
                let count: usize = count
                    .parse()
                    .map_err(|_| Error::Parse("bad element count".into()))?;
                elements.push(ElementDecl {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            ["property", "list", count_ty, item_ty, name] => {
                let decl = elements
                    .last_mut()
                    .ok_or_else(|| Error::Parse("property before element".into()))?;
                decl.properties.push(Property::List {
                    name: name.to_string(),
                    count: Scalar::parse(count_ty)?,
                    item: Scalar::parse(item_ty)?,
                });
            }
            ["property", ty, name] => {
                let decl = elements
                    .last_mut()
                    .ok_or_else(|| Error::Parse("property before element".into()))?;
                decl.properties.push(Property::Scalar {
                    name: name.to_string(),
                    ty: Scalar::parse(ty)?,
                });
            }
            _ => return Err(Error::Parse(format!("bad ply header line: {}", line.trim()))),
        }
    }
    let format = format.ok_or_else(|| Error::Parse("ply header missing format".into()))?;

    let mut content = PlyContent::default();
    for decl in &elements {
        match format {
            Format::Ascii => read_element_ascii(&mut reader, decl, &mut content)?,
            Format::BinaryLe => read_element_binary(&mut reader, decl, &mut content)?,
        }
    }
    if content.cloud.is_empty() {
        return Err(Error::Parse(format!(
            "{}: no vertex data",
            path.display()
        )));
    }
    Ok(content)
}

fn vertex_slots(decl: &ElementDecl) -> Result<([usize; 3], Option<[usize; 3]>)> {
    let mut xyz = [usize::MAX; 3];
    let mut rgb = [usize::MAX; 3];
    for (i, p) in decl.properties.iter().enumerate() {
        if let Property::Scalar { name, .. } = p {
            match name.as_str() {
                "x" => xyz[0] = i,
                "y" => xyz[1] = i,
                "z" => xyz[2] = i,
                "red" => rgb[0] = i,
                "green" => rgb[1] = i,
                "blue" => rgb[2] = i,
                _ => {}
            }
        }
    }
    if xyz.contains(&usize::MAX) {
        return Err(Error::Parse("vertex element missing x/y/z".into()));
    }
    let rgb = if rgb.contains(&usize::MAX) {
        None
    } else {
        Some(rgb)
    };
    Ok((xyz, rgb))
}

fn read_element_ascii<R: BufRead>(
    reader: &mut R,
    decl: &ElementDecl,
    content: &mut PlyContent,
) -> Result<()> {
    let is_vertex = decl.name == "vertex";
    let is_face = decl.name == "face";
    let slots = if is_vertex {
        Some(vertex_slots(decl)?)
    } else {
        None
    };
    let mut line = String::new();
    for _ in 0..decl.count {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            return Err(Error::Parse("unexpected EOF in ply body".into()));
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if is_vertex {
            let (xyz, rgb) = slots.as_ref().unwrap();
            let mut values = vec![0.0f64; decl.properties.len()];
            let mut ti = 0;
            for (pi, p) in decl.properties.iter().enumerate() {
                match p {
                    Property::Scalar { .. } => {
                        values[pi] = toks
                            .get(ti)
                            .and_then(|t| t.parse().ok())
                            .ok_or_else(|| Error::Parse("bad vertex line".into()))?;
                        ti += 1;
                    }
                    Property::List { .. } => {
                        let n: usize = toks
                            .get(ti)
                            .and_then(|t| t.parse().ok())
                            .ok_or_else(|| Error::Parse("bad list count".into()))?;
                        ti += 1 + n;
                    }
                }
            }
            push_vertex(content, &values, *xyz, *rgb);
        } else if is_face {
            let n: usize = toks
                .first()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::Parse("bad face line".into()))?;
            let idx: Vec<u32> = toks[1..=n]
                .iter()
                .map(|t| t.parse::<u32>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Parse("bad face index".into()))?;
            push_face(content, &idx)?;
        }
    }
    Ok(())
}

fn read_element_binary<R: Read>(
    reader: &mut R,
    decl: &ElementDecl,
    content: &mut PlyContent,
) -> Result<()> {
    let is_vertex = decl.name == "vertex";
    let is_face = decl.name == "face";
    let slots = if is_vertex {
        Some(vertex_slots(decl)?)
    } else {
        None
    };
    let mut buf = [0u8; 8];
    for _ in 0..decl.count {
        let mut values = vec![0.0f64; decl.properties.len()];
        let mut face_idx: Vec<u32> = Vec::new();
        for (pi, p) in decl.properties.iter().enumerate() {
            match p {
                Property::Scalar { ty, .. } => {
                    reader.read_exact(&mut buf[..ty.size()])?;
                    values[pi] = ty.read_f64(&buf);
                }
                Property::List { name, count, item } => {
                    reader.read_exact(&mut buf[..count.size()])?;
                    let n = count.read_f64(&buf) as usize;
                    let keep = is_face
                        && (name == "vertex_indices" || name == "vertex_index");
                    for _ in 0..n {
                        reader.read_exact(&mut buf[..item.size()])?;
                        if keep {
                            face_idx.push(item.read_f64(&buf) as u32);
                        }
                    }
                }
            }
        }
        if is_vertex {
            let (xyz, rgb) = slots.as_ref().unwrap();
            push_vertex(content, &values, *xyz, *rgb);
        } else if is_face && !face_idx.is_empty() {
            push_face(content, &face_idx)?;
        }
    }
    Ok(())
}

fn push_vertex(content: &mut PlyContent, values: &[f64], xyz: [usize; 3], rgb: Option<[usize; 3]>) {
    content.cloud.positions.push(Vec3::new(
        values[xyz[0]],
        values[xyz[1]],
        values[xyz[2]],
    ));
    if let Some(rgb) = rgb {
        content
            .cloud
            .colors
            .get_or_insert_with(Vec::new)
            .push([values[rgb[0]] as u8, values[rgb[1]] as u8, values[rgb[2]] as u8]);
    }
}

fn push_face(content: &mut PlyContent, idx: &[u32]) -> Result<()> {
    match idx.len() {
        3 => content.faces.push([idx[0], idx[1], idx[2]]),
        // fan-triangulate larger polygons
        n if n > 3 => {
            for i in 1..n - 1 {
                content.faces.push([idx[0], idx[i], idx[i + 1]]);
            }
        }
        _ => return Err(Error::Parse("face with fewer than 3 indices".into())),
    }
    Ok(())
}

pub fn read_point_cloud(path: &Path) -> Result<PointCloud> {
    Ok(read_ply(path)?.cloud)
}

pub fn read_mesh(path: &Path) -> Result<TriangleMesh> {
    let content = read_ply(path)?;
    if content.faces.is_empty() {
        return Err(Error::Parse(format!(
            "{}: mesh file has no faces",
            path.display()
        )));
    }
    Ok(content.into_mesh())
}

pub fn write_point_cloud(path: &Path, cloud: &PointCloud, binary: bool) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_header(&mut w, cloud, 0, binary)?;
    if binary {
        for (i, p) in cloud.positions.iter().enumerate() {
            w.write_all(&p.x.to_le_bytes())?;
            w.write_all(&p.y.to_le_bytes())?;
            w.write_all(&p.z.to_le_bytes())?;
            if let Some(colors) = &cloud.colors {
                w.write_all(&colors[i])?;
            }
        }
    } else {
        for (i, p) in cloud.positions.iter().enumerate() {
            if let Some(colors) = &cloud.colors {
                let c = colors[i];
                writeln!(w, "{} {} {} {} {} {}", p.x, p.y, p.z, c[0], c[1], c[2])?;
            } else {
                writeln!(w, "{} {} {}", p.x, p.y, p.z)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_mesh(path: &Path, mesh: &TriangleMesh, binary: bool) -> Result<()> {
    let cloud = PointCloud::from_positions(mesh.vertices.clone());
    let mut w = BufWriter::new(File::create(path)?);
    write_header(&mut w, &cloud, mesh.triangles.len(), binary)?;
    if binary {
        for p in &mesh.vertices {
            w.write_all(&p.x.to_le_bytes())?;
            w.write_all(&p.y.to_le_bytes())?;
            w.write_all(&p.z.to_le_bytes())?;
        }
        for t in &mesh.triangles {
            w.write_all(&[3u8])?;
            for &v in t {
                w.write_all(&v.to_le_bytes())?;
            }
        }
    } else {
        for p in &mesh.vertices {
            writeln!(w, "{} {} {}", p.x, p.y, p.z)?;
        }
        for t in &mesh.triangles {
            writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_header<W: Write>(w: &mut W, cloud: &PointCloud, n_faces: usize, binary: bool) -> Result<()> {
    writeln!(w, "ply")?;
    writeln!(
        w,
        "format {} 1.0",
        if binary { "binary_little_endian" } else { "ascii" }
    )?;
    writeln!(w, "element vertex {}", cloud.len())?;
    writeln!(w, "property double x")?;
    writeln!(w, "property double y")?;
    writeln!(w, "property double z")?;
    if cloud.colors.is_some() && n_faces == 0 {
        writeln!(w, "property uchar red")?;
        writeln!(w, "property uchar green")?;
        writeln!(w, "property uchar blue")?;
    }
    if n_faces > 0 {
        writeln!(w, "element face {n_faces}")?;
        writeln!(w, "property list uchar uint vertex_indices")?;
    }
    writeln!(w, "end_header")?;
    Ok(())
}
