//! OFF mesh files. Plain `OFF` holds 3-D vertices; `nOFF` carries an explicit
//! vertex dimension on the line after the keyword. Polygons with more than
//! three vertices are fan-triangulated on read.

use std::fmt::Write as _;
use std::path::Path;

use super::TriMesh;
use crate::error::{Error, Result};

pub fn parse_off(text: &str) -> Result<TriMesh> {
    let mut tokens = text.lines().map(|l| l.split('#').next().unwrap_or("")).flat_map(str::split_whitespace);
    let header = tokens.next().ok_or_else(|| Error::Parse("empty OFF file".into()))?;
    let dim = match header {
        "OFF" => 3,
        "nOFF" => next_num::<usize>(&mut tokens, "dimension")?,
        other => return Err(Error::Parse(format!("unsupported OFF header '{other}'"))),
    };
    let nv: usize = next_num(&mut tokens, "vertex count")?;
    let nf: usize = next_num(&mut tokens, "face count")?;
    let _ne: usize = next_num(&mut tokens, "edge count")?;
    let mut coords = Vec::with_capacity(nv * dim);
    for _ in 0..nv * dim {
        coords.push(next_num::<f64>(&mut tokens, "vertex coordinate")?);
    }
    let mut faces = Vec::with_capacity(nf);
    for f in 0..nf {
        let k: usize = next_num(&mut tokens, "face size")?;
        if k < 3 {
            return Err(Error::Parse(format!("face {f} has {k} vertices")));
        }
        let poly: Vec<usize> = (0..k).map(|_| next_num::<usize>(&mut tokens, "face index")).collect::<Result<_>>()?;
        for i in 1..k - 1 {
            faces.push([poly[0], poly[i], poly[i + 1]]);
        }
    }
    TriMesh::new(dim, coords, faces)
}

fn next_num<'a, T: std::str::FromStr>(tokens: &mut impl Iterator<Item = &'a str>, what: &str) -> Result<T> {
    let tok = tokens.next().ok_or_else(|| Error::Parse(format!("unexpected end of file reading {what}")))?;
    tok.parse().map_err(|_| Error::Parse(format!("bad {what}: '{tok}'")))
}

pub fn read_off(path: impl AsRef<Path>) -> Result<TriMesh> {
    parse_off(&std::fs::read_to_string(path)?)
}

pub fn to_off(mesh: &TriMesh) -> String {
    let mut out = String::new();
    if mesh.ambient_dim == 3 {
        out.push_str("OFF\n");
    } else {
        let _ = writeln!(out, "nOFF\n{}", mesh.ambient_dim);
    }
    let _ = writeln!(out, "{} {} 0", mesh.num_vertices(), mesh.faces.len());
    for i in 0..mesh.num_vertices() {
        let row: Vec<String> = mesh.vertex(i).iter().map(|x| format!("{x:.17e}")).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    for f in &mesh.faces {
        let _ = writeln!(out, "3 {} {} {}", f[0], f[1], f[2]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TETRA: &str =
        "OFF\n# tetrahedron\n4 4 6\n1 1 1\n-1 -1 1\n-1 1 -1\n1 -1 -1\n3 0 1 2\n3 0 3 1\n3 0 2 3\n3 1 3 2\n";

    #[test]
    fn reads_tetrahedron() {
        let m = parse_off(TETRA).unwrap();
        assert_eq!(m.num_vertices(), 4);
        assert_eq!(m.faces.len(), 4);
    }

    #[test]
    fn round_trips_high_dimensional() {
        let m = TriMesh::harvey_lawson_torus(6);
        let back = parse_off(&to_off(&m)).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn quads_are_split() {
        let cube = "OFF\n8 6 12\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n0 0 1\n1 0 1\n1 1 1\n0 1 1\n\
                    4 0 3 2 1\n4 4 5 6 7\n4 0 1 5 4\n4 1 2 6 5\n4 2 3 7 6\n4 3 0 4 7\n";
        let m = parse_off(cube).unwrap();
        assert_eq!(m.faces.len(), 12);
    }

    #[test]
    fn bad_header() {
        assert!(matches!(parse_off("PLY\n"), Err(Error::Parse(_))));
        assert!(matches!(parse_off("OFF\n4 4"), Err(Error::Parse(_))));
    }
}
