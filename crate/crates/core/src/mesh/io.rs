//! JSON mesh files.
//!
//! ```text
//! {
//!   "vertices": [[x, y], ...],
//!   "elements": [[v0, v1, ...], ...],      // counter-clockwise loops
//!   "sub_tri": [[[a, b, c], ...], ...]     // optional, per element
//! }
//! ```
//!
//! Coordinates are written with 17 significant digits so that a save/load
//! round trip reproduces them bit for bit.

use super::{Point2, PolyMesh};
use crate::error::{Error, Result};
use serde::Deserialize;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Deserialize)]
struct MeshFile {
    vertices: Vec<[f64; 2]>,
    elements: Vec<Vec<usize>>,
    #[serde(default)]
    sub_tri: Option<Vec<Vec<[usize; 3]>>>,
}

pub fn mesh_to_json(mesh: &PolyMesh) -> String {
    let mut s = String::with_capacity(64 * mesh.vertices().len());
    s.push_str("{\n  \"vertices\": [\n");
    let nv = mesh.vertices().len();
    for (i, p) in mesh.vertices().iter().enumerate() {
        let sep = if i + 1 < nv { "," } else { "" };
        let _ = writeln!(s, "    [{:.16e}, {:.16e}]{sep}", p.x, p.y);
    }
    s.push_str("  ],\n  \"elements\": [\n");
    let ne = mesh.n_elements();
    for (e, el) in mesh.elements().iter().enumerate() {
        let ids: Vec<String> = el.vertex_ids.iter().map(usize::to_string).collect();
        let sep = if e + 1 < ne { "," } else { "" };
        let _ = writeln!(s, "    [{}]{sep}", ids.join(", "));
    }
    s.push_str("  ],\n  \"sub_tri\": [\n");
    for (e, tris) in mesh.sub_tri().iter().enumerate() {
        let t: Vec<String> = tris.iter().map(|t| format!("[{}, {}, {}]", t[0], t[1], t[2])).collect();
        let sep = if e + 1 < ne { "," } else { "" };
        let _ = writeln!(s, "    [{}]{sep}", t.join(", "));
    }
    s.push_str("  ]\n}\n");
    s
}

/// Line (1-based) on which the `k`-th entry of the top-level `elements`
/// array starts.
fn element_line(text: &str, k: usize) -> usize {
    let line_of = |off: usize| text[..off].bytes().filter(|&b| b == b'\n').count() + 1;
    let Some(start) = text.find("\"elements\"") else {
        return 1;
    };
    let mut depth = 0usize;
    let mut seen = 0usize;
    for (off, b) in text[start..].bytes().enumerate() {
        match b {
            b'[' => {
                depth += 1;
                if depth == 2 {
                    if seen == k {
                        return line_of(start + off);
                    }
                    seen += 1;
                }
            }
            b']' => {
                depth = depth.saturating_sub(1);
                if depth == 0 {
                    break;
                }
            }
            _ => {}
        }
    }
    line_of(start)
}

pub fn mesh_from_json(text: &str) -> Result<PolyMesh> {
    let file: MeshFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        msg: e.to_string(),
    })?;
    let nv = file.vertices.len();
    for (e, ids) in file.elements.iter().enumerate() {
        if let Some(&v) = ids.iter().find(|&&v| v >= nv) {
            return Err(Error::Parse {
                line: element_line(text, e),
                msg: format!("element {e} references missing vertex {v} (have {nv})"),
            });
        }
        if ids.len() < 3 {
            return Err(Error::Parse {
                line: element_line(text, e),
                msg: format!("element {e} has fewer than 3 vertices"),
            });
        }
    }
    let vertices = file.vertices.iter().map(|v| Point2::new(v[0], v[1])).collect();
    PolyMesh::from_loops(vertices, file.elements, file.sub_tri)
}

/// Writes atomically: a temporary sibling file is renamed into place.
pub fn save_mesh(mesh: &PolyMesh, path: impl AsRef<Path>) -> Result<()> {
    crate::io_util::write_atomic(path.as_ref(), mesh_to_json(mesh).as_bytes())
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<PolyMesh> {
    let text = std::fs::read_to_string(path)?;
    mesh_from_json(&text)
}
