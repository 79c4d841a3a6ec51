//! Plain-text mesh format:
//!
//! ```text
//! v x y
//! t i j k
//! b tag i j sigma_i sigma_j
//! ```
//!
//! Floats are written in shortest round-trip form, so a written mesh reads
//! back bit-for-bit.

use std::io::{BufRead, Write};

use super::mesh::{BoundaryEdge, BoundaryTag, Mesh};
use crate::error::{Error, Result};

pub fn write_mesh<W: Write>(mesh: &Mesh, mut out: W) -> Result<()> {
    for v in mesh.vertices() {
        writeln!(out, "v {} {}", v[0], v[1])?;
    }
    for t in mesh.triangles() {
        writeln!(out, "t {} {} {}", t[0], t[1], t[2])?;
    }
    for e in mesh.boundary_edges() {
        writeln!(out, "b {} {} {} {} {}", e.tag, e.nodes[0], e.nodes[1], e.sigma[0], e.sigma[1])?;
    }
    Ok(())
}

pub fn mesh_to_string(mesh: &Mesh) -> String {
    let mut buf = Vec::new();
    write_mesh(mesh, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("mesh text is ASCII")
}

fn field<T: std::str::FromStr>(parts: &[&str], i: usize, line: usize) -> Result<T> {
    parts
        .get(i)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Parse { line, message: format!("bad or missing field {i}") })
}

pub fn read_mesh<R: BufRead>(input: R) -> Result<Mesh> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let mut edges = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let parts: Vec<&str> = line.split_whitespace().collect();
        match parts.first().copied() {
            None => continue,
            Some(s) if s.starts_with('#') => continue,
            Some("v") => vertices.push([field(&parts, 1, lineno)?, field(&parts, 2, lineno)?]),
            Some("t") => triangles.push([
                field(&parts, 1, lineno)?,
                field(&parts, 2, lineno)?,
                field(&parts, 3, lineno)?,
            ]),
            Some("b") => {
                let tag: BoundaryTag = parts
                    .get(1)
                    .ok_or(Error::Parse { line: lineno, message: "missing tag".into() })?
                    .parse()
                    .map_err(|e: Error| Error::Parse { line: lineno, message: e.to_string() })?;
                edges.push(BoundaryEdge {
                    tag,
                    nodes: [field(&parts, 2, lineno)?, field(&parts, 3, lineno)?],
                    sigma: [field(&parts, 4, lineno)?, field(&parts, 5, lineno)?],
                });
            }
            Some(other) => {
                return Err(Error::Parse { line: lineno, message: format!("unknown record '{other}'") })
            }
        }
    }
    Mesh::from_parts(vertices, triangles, edges)
}
