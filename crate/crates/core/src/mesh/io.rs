//! ASCII OFF reader/writer and a minimal OBJ reader (`v` and `f` lines only).

use super::{MeshError, SurfaceMesh};
use crate::Vec3;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    Obj,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "off" => Some(Self::Off),
            "obj" => Some(Self::Obj),
            _ => None,
        }
    }
}

impl FromStr for MeshFormat {
    type Err = MeshError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "off" => Ok(Self::Off),
            "obj" => Ok(Self::Obj),
            other => Err(MeshError::InvalidParameter(format!(
                "unknown mesh format '{other}'"
            ))),
        }
    }
}

/// Reads a mesh file and enforces the closed oriented manifold invariants.
pub fn load_mesh(path: &Path, format: MeshFormat) -> Result<SurfaceMesh, MeshError> {
    let text = std::fs::read_to_string(path).map_err(|source| MeshError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let (v, t) = match format {
        MeshFormat::Off => parse_off(&text)?,
        MeshFormat::Obj => parse_obj(&text)?,
    };
    SurfaceMesh::new(v, t)
}

fn parse_err(line: usize, msg: impl Into<String>) -> MeshError {
    MeshError::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_num<T: FromStr>(tok: &str, line: usize) -> Result<T, MeshError> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("invalid number '{tok}'")))
}

pub fn parse_off(text: &str) -> Result<(Vec<Vec3>, Vec<[usize; 3]>), MeshError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (n, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let mut header_rest = header.strip_prefix("OFF").ok_or_else(|| {
        parse_err(n, "missing OFF header")
    })?;
    header_rest = header_rest.trim();
    let counts_line = if header_rest.is_empty() {
        lines.next().ok_or_else(|| parse_err(n, "missing counts line"))?
    } else {
        (n, header_rest)
    };
    let counts: Vec<usize> = counts_line
        .1
        .split_whitespace()
        .map(|t| parse_num(t, counts_line.0))
        .collect::<Result<_, _>>()?;
    if counts.len() < 2 {
        return Err(parse_err(counts_line.0, "expected 'V F [E]' counts"));
    }
    let (nv, nf) = (counts[0], counts[1]);

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (n, l) = lines
            .next()
            .ok_or_else(|| parse_err(counts_line.0, "unexpected end of vertex list"))?;
        let xyz: Vec<f64> = l
            .split_whitespace()
            .map(|t| parse_num(t, n))
            .collect::<Result<_, _>>()?;
        if xyz.len() != 3 {
            return Err(parse_err(n, "vertex line must have 3 coordinates"));
        }
        vertices.push(Vec3::new(xyz[0], xyz[1], xyz[2]));
    }
    let mut triangles = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (n, l) = lines
            .next()
            .ok_or_else(|| parse_err(counts_line.0, "unexpected end of face list"))?;
        let idx: Vec<usize> = l
            .split_whitespace()
            .map(|t| parse_num(t, n))
            .collect::<Result<_, _>>()?;
        if idx.first() != Some(&3) || idx.len() != 4 {
            return Err(parse_err(n, "only triangular faces ('3 i j k') are supported"));
        }
        for &i in &idx[1..] {
            if i >= nv {
                return Err(parse_err(n, format!("vertex index {i} out of range")));
            }
        }
        triangles.push([idx[1], idx[2], idx[3]]);
    }
    if let Some((n, _)) = lines.next() {
        return Err(parse_err(n, "trailing data after face list"));
    }
    Ok((vertices, triangles))
}

pub fn parse_obj(text: &str) -> Result<(Vec<Vec3>, Vec<[usize; 3]>), MeshError> {
    let mut vertices = Vec::new();
    let mut faces: Vec<(usize, [usize; 3])> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let l = raw.split('#').next().unwrap_or("").trim();
        let mut toks = l.split_whitespace();
        match toks.next() {
            None => continue,
            Some("v") => {
                let xyz: Vec<f64> = toks.map(|t| parse_num(t, n)).collect::<Result<_, _>>()?;
                if xyz.len() != 3 {
                    return Err(parse_err(n, "'v' line must have exactly 3 coordinates"));
                }
                vertices.push(Vec3::new(xyz[0], xyz[1], xyz[2]));
            }
            Some("f") => {
                let mut idx = [0usize; 3];
                let mut count = 0;
                for t in toks {
                    if t.contains('/') {
                        return Err(parse_err(n, "texture/normal indices are not supported"));
                    }
                    if t.starts_with('-') {
                        return Err(parse_err(n, "negative indices are not supported"));
                    }
                    let k: usize = parse_num(t, n)?;
                    if k == 0 {
                        return Err(parse_err(n, "OBJ indices are 1-based"));
                    }
                    if count < 3 {
                        idx[count] = k - 1;
                    }
                    count += 1;
                }
                if count != 3 {
                    return Err(parse_err(n, "only triangular faces are supported"));
                }
                faces.push((n, idx));
            }
            Some(other) => {
                return Err(parse_err(n, format!("unsupported OBJ statement '{other}'")));
            }
        }
    }
    for (n, f) in &faces {
        for &k in f {
            if k >= vertices.len() {
                return Err(parse_err(*n, format!("vertex index {} out of range", k + 1)));
            }
        }
    }
    Ok((vertices, faces.into_iter().map(|(_, f)| f).collect()))
}

/// OFF text. Coordinates use the shortest round-trip decimal form, so reading back is bit-exact.
pub fn write_off(mesh: &SurfaceMesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "OFF");
    let _ = writeln!(s, "{} {} {}", mesh.num_vertices(), mesh.num_triangles(), mesh.num_edges());
    for x in mesh.vertices() {
        let _ = writeln!(s, "{:?} {:?} {:?}", x.x, x.y, x.z);
    }
    for [a, b, c] in mesh.triangles() {
        let _ = writeln!(s, "3 {a} {b} {c}");
    }
    s
}

pub fn save_off(mesh: &SurfaceMesh, path: &Path) -> Result<(), MeshError> {
    std::fs::write(path, write_off(mesh)).map_err(|source| MeshError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_icosphere;

    #[test]
    fn off_round_trip_is_bit_exact() {
        let m = generate_icosphere(Vec3::new(0.1, 0.2, 0.3), 1.7, 2).unwrap();
        let (v, t) = parse_off(&write_off(&m)).unwrap();
        assert_eq!(t, m.triangles());
        for (a, b) in v.iter().zip(m.vertices()) {
            assert_eq!(a.x.to_bits(), b.x.to_bits());
            assert_eq!(a.y.to_bits(), b.y.to_bits());
            assert_eq!(a.z.to_bits(), b.z.to_bits());
        }
    }

    #[test]
    fn off_header_on_same_line_and_comments() {
        let text = "OFF 4 4 6\n# tetra\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 2 1\n3 0 1 3\n3 1 2 3\n3 0 3 2\n";
        let (v, t) = parse_off(text).unwrap();
        assert_eq!((v.len(), t.len()), (4, 4));
    }

    #[test]
    fn off_rejects_quads() {
        let text = "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n";
        assert!(matches!(parse_off(text), Err(MeshError::Parse { line: 7, .. })));
    }

    #[test]
    fn obj_rejects_slash_and_negative_indices() {
        assert!(parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1/1 2/2 3/3\n").is_err());
        assert!(parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -1 -2 -3\n").is_err());
        assert!(parse_obj("vn 0 0 1\n").is_err());
    }

    #[test]
    fn obj_is_one_based() {
        let (v, t) = parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n").unwrap();
        assert_eq!(v.len(), 3);
        assert_eq!(t, vec![[0, 1, 2]]);
        assert!(parse_obj("v 0 0 0\nf 0 1 2\n").is_err());
    }
}
