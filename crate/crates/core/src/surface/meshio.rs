//! OFF and OBJ readers/writers (triangles only).

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::surface::implicit::Vec3;
use crate::surface::mesh::TriMesh;

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>().map_err(|_| Error::Parse { line, msg: format!("bad number '{tok}'") })
}

fn parse_usize(tok: &str, line: usize) -> Result<usize> {
    tok.parse::<usize>().map_err(|_| Error::Parse { line, msg: format!("bad index '{tok}'") })
}

/// Parses an OFF document.
pub fn parse_off(text: &str) -> Result<TriMesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (ln, head) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty file".into() })?;
    let mut head_toks: Vec<&str> = head.split_whitespace().collect();
    if head_toks.first() != Some(&"OFF") {
        return Err(Error::Parse { line: ln, msg: "missing OFF header".into() });
    }
    head_toks.remove(0);
    let (ln, counts) = if head_toks.is_empty() {
        let (ln, l) = lines.next().ok_or(Error::Parse { line: ln, msg: "missing counts".into() })?;
        (ln, l.split_whitespace().collect::<Vec<_>>())
    } else {
        (ln, head_toks)
    };
    if counts.len() < 2 {
        return Err(Error::Parse { line: ln, msg: "expected vertex and face counts".into() });
    }
    let nv = parse_usize(counts[0], ln)?;
    let nf = parse_usize(counts[1], ln)?;
    let mut verts = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines.next().ok_or(Error::Parse { line: ln, msg: "truncated vertex list".into() })?;
        let t: Vec<&str> = l.split_whitespace().collect();
        if t.len() < 3 {
            return Err(Error::Parse { line: ln, msg: "vertex needs 3 coordinates".into() });
        }
        verts.push(Vec3::new(parse_f64(t[0], ln)?, parse_f64(t[1], ln)?, parse_f64(t[2], ln)?));
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (ln, l) = lines.next().ok_or(Error::Parse { line: ln, msg: "truncated face list".into() })?;
        let t: Vec<&str> = l.split_whitespace().collect();
        if t.first() != Some(&"3") || t.len() < 4 {
            return Err(Error::Parse { line: ln, msg: "only triangular faces are supported".into() });
        }
        let f = [parse_usize(t[1], ln)?, parse_usize(t[2], ln)?, parse_usize(t[3], ln)?];
        if f.iter().any(|&i| i >= nv) {
            return Err(Error::Parse { line: ln, msg: "face index out of range".into() });
        }
        faces.push(f);
    }
    TriMesh::new(verts, faces)
}

/// Parses the `v`/`f` subset of Wavefront OBJ.
pub fn parse_obj(text: &str) -> Result<TriMesh> {
    let mut verts = Vec::new();
    let mut faces = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let l = raw.split('#').next().unwrap_or("").trim();
        let mut t = l.split_whitespace();
        match t.next() {
            Some("v") => {
                let c: Vec<&str> = t.collect();
                if c.len() < 3 {
                    return Err(Error::Parse { line: ln, msg: "vertex needs 3 coordinates".into() });
                }
                verts.push(Vec3::new(parse_f64(c[0], ln)?, parse_f64(c[1], ln)?, parse_f64(c[2], ln)?));
            }
            Some("f") => {
                let c: Vec<&str> = t.collect();
                if c.len() != 3 {
                    return Err(Error::Parse { line: ln, msg: "only triangular faces are supported".into() });
                }
                let mut f = [0usize; 3];
                for (k, tok) in c.iter().enumerate() {
                    let first = tok.split('/').next().unwrap_or("");
                    let idx: i64 = first
                        .parse()
                        .map_err(|_| Error::Parse { line: ln, msg: format!("bad index '{tok}'") })?;
                    let resolved = if idx > 0 { idx - 1 } else { verts.len() as i64 + idx };
                    if resolved < 0 || resolved as usize >= verts.len() {
                        return Err(Error::Parse { line: ln, msg: "face index out of range".into() });
                    }
                    f[k] = resolved as usize;
                }
                faces.push(f);
            }
            _ => {}
        }
    }
    TriMesh::new(verts, faces)
}

/// Loads a mesh, choosing the format from the file extension.
pub fn load_mesh(path: &Path) -> Result<TriMesh> {
    let text = std::fs::read_to_string(path)?;
    match path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()) {
        Some(e) if e == "off" => parse_off(&text),
        Some(e) if e == "obj" => parse_obj(&text),
        _ => Err(Error::InvalidInput(format!("unknown mesh format: {}", path.display()))),
    }
}

pub fn to_off(mesh: &TriMesh) -> String {
    let mut s = format!("OFF\n{} {} 0\n", mesh.vertices.len(), mesh.triangles.len());
    for v in &mesh.vertices {
        let _ = writeln!(s, "{:.17e} {:.17e} {:.17e}", v.x, v.y, v.z);
    }
    for t in &mesh.triangles {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    s
}

pub fn to_obj(mesh: &TriMesh) -> String {
    let mut s = String::new();
    for v in &mesh.vertices {
        let _ = writeln!(s, "v {:.17e} {:.17e} {:.17e}", v.x, v.y, v.z);
    }
    for t in &mesh.triangles {
        let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::mesh::icosphere;

    const TET_OFF: &str = "OFF\n# tetrahedron\n4 4 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 2 1\n3 0 1 3\n3 0 3 2\n3 1 2 3\n";

    #[test]
    fn off_tetrahedron() {
        let m = parse_off(TET_OFF).unwrap();
        assert_eq!(m.triangles.len(), 4);
        assert!((m.signed_volume() - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn obj_round_trip() {
        let m = icosphere(Vec3::zeros(), 1.0, 1).unwrap();
        let back = parse_obj(&to_obj(&m)).unwrap();
        assert_eq!(back.vertices, m.vertices);
        assert_eq!(back.triangles, m.triangles);
        let off = parse_off(&to_off(&m)).unwrap();
        assert_eq!(off.vertices, m.vertices);
    }

    #[test]
    fn obj_slashes_and_negative_indices() {
        let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1/1/1 2//2 -1\n";
        let m = parse_obj(text).unwrap();
        assert_eq!(m.triangles[0], [0, 1, 2]);
    }

    #[test]
    fn quads_rejected_with_line() {
        let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nf 1 2 4 3\n";
        assert_eq!(
            parse_obj(text).unwrap_err(),
            Error::Parse { line: 5, msg: "only triangular faces are supported".into() }
        );
    }
}
