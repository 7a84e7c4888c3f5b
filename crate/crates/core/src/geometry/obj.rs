//! Wavefront OBJ/MTL ingestion.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use log::warn;

use crate::error::{Error, Result};
use crate::math::{Rgb, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub struct MtlMaterial {
    pub name: String,
    pub ka: Rgb,
    pub kd: Rgb,
    pub ks: Rgb,
    pub ke: Rgb,
    pub ns: f64,
    pub ni: f64,
    pub illum: u32,
    pub map_kd: Option<String>,
}

impl MtlMaterial {
    fn named(name: &str) -> Self {
        Self {
            name: name.to_string(),
            ka: Rgb::zeros(),
            kd: Rgb::repeat(0.8),
            ks: Rgb::zeros(),
            ke: Rgb::zeros(),
            ns: 0.0,
            ni: 1.0,
            illum: 2,
            map_kd: None,
        }
    }
}

/// One triangle. Indices are zero-based into the owning mesh's arrays.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Face {
    pub v: [usize; 3],
    pub vt: Option<[usize; 3]>,
    pub vn: Option<[usize; 3]>,
    pub material: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriangleMesh {
    pub positions: Vec<Vec3>,
    pub uvs: Vec<[f64; 2]>,
    pub normals: Vec<Vec3>,
    pub faces: Vec<Face>,
    pub materials: Vec<MtlMaterial>,
}

impl TriangleMesh {
    pub fn triangle_count(&self) -> usize {
        self.faces.len()
    }

    pub fn corners(&self, face: &Face) -> [Vec3; 3] {
        face.v.map(|i| self.positions[i])
    }

    /// Appends `other`, re-basing its indices. Materials identical to an
    /// existing entry are shared rather than duplicated.
    pub fn append(&mut self, other: &TriangleMesh) {
        let (pv, pt, pn) = (self.positions.len(), self.uvs.len(), self.normals.len());
        let remap: Vec<usize> = other
            .materials
            .iter()
            .map(|m| match self.materials.iter().position(|e| e == m) {
                Some(k) => k,
                None => {
                    self.materials.push(m.clone());
                    self.materials.len() - 1
                }
            })
            .collect();
        self.positions.extend_from_slice(&other.positions);
        self.uvs.extend_from_slice(&other.uvs);
        self.normals.extend_from_slice(&other.normals);
        self.faces.extend(other.faces.iter().map(|f| Face {
            v: f.v.map(|i| i + pv),
            vt: f.vt.map(|t| t.map(|i| i + pt)),
            vn: f.vn.map(|n| n.map(|i| i + pn)),
            material: f.material.map(|m| remap[m]),
        }));
    }

    pub fn validate(&self) -> Result<()> {
        for (k, f) in self.faces.iter().enumerate() {
            let bad = |what: &str| {
                Error::InvalidInput(format!("face {k} references an out-of-range {what}"))
            };
            if f.v.iter().any(|&i| i >= self.positions.len()) {
                return Err(bad("vertex"));
            }
            if f.vt.is_some_and(|t| t.iter().any(|&i| i >= self.uvs.len())) {
                return Err(bad("texture coordinate"));
            }
            if f.vn
                .is_some_and(|n| n.iter().any(|&i| i >= self.normals.len()))
            {
                return Err(bad("normal"));
            }
            if f.material.is_some_and(|m| m >= self.materials.len()) {
                return Err(bad("material"));
            }
        }
        Ok(())
    }

    /// Serializes the mesh to OBJ text. With `mtllib`, faces carry `usemtl`
    /// records naming [`TriangleMesh::to_mtl`]'s entries.
    pub fn to_obj(&self, mtllib: Option<&str>) -> String {
        let mut out = String::new();
        if let Some(lib) = mtllib {
            let _ = writeln!(out, "mtllib {lib}");
        }
        for p in &self.positions {
            let _ = writeln!(out, "v {} {} {}", p.x, p.y, p.z);
        }
        for t in &self.uvs {
            let _ = writeln!(out, "vt {} {}", t[0], t[1]);
        }
        for n in &self.normals {
            let _ = writeln!(out, "vn {} {} {}", n.x, n.y, n.z);
        }
        let mut active = None;
        for f in &self.faces {
            if mtllib.is_some() && f.material != active {
                if let Some(m) = f.material {
                    let _ = writeln!(out, "usemtl {}", self.materials[m].name);
                }
                active = f.material;
            }
            out.push('f');
            for c in 0..3 {
                let _ = write!(out, " {}", f.v[c] + 1);
                match (f.vt, f.vn) {
                    (Some(t), Some(n)) => {
                        let _ = write!(out, "/{}/{}", t[c] + 1, n[c] + 1);
                    }
                    (Some(t), None) => {
                        let _ = write!(out, "/{}", t[c] + 1);
                    }
                    (None, Some(n)) => {
                        let _ = write!(out, "//{}", n[c] + 1);
                    }
                    (None, None) => {}
                }
            }
            out.push('\n');
        }
        out
    }

    /// Serializes the material table as MTL text.
    pub fn to_mtl(&self) -> String {
        let mut out = String::new();
        for m in &self.materials {
            let _ = writeln!(out, "newmtl {}", m.name);
            for (key, c) in [("Ka", m.ka), ("Kd", m.kd), ("Ks", m.ks), ("Ke", m.ke)] {
                let _ = writeln!(out, "{key} {} {} {}", c.x, c.y, c.z);
            }
            let _ = writeln!(out, "Ns {}\nNi {}\nillum {}", m.ns, m.ni, m.illum);
            if let Some(map) = &m.map_kd {
                let _ = writeln!(out, "map_Kd {map}");
            }
            out.push('\n');
        }
        out
    }
}

fn parse_err(source: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: source.to_string(),
        line,
        message: message.into(),
    }
}

fn parse_floats<const N: usize>(
    args: &[&str],
    source: &str,
    line: usize,
    keyword: &str,
) -> Result<[f64; N]> {
    if args.len() < N {
        return Err(parse_err(
            source,
            line,
            format!("'{keyword}' needs {N} numbers, got {}", args.len()),
        ));
    }
    let mut out = [0.0; N];
    for (slot, tok) in out.iter_mut().zip(args) {
        *slot = tok
            .parse()
            .map_err(|_| parse_err(source, line, format!("bad number '{tok}' in '{keyword}'")))?;
    }
    Ok(out)
}

fn resolve_index(raw: &str, count: usize, source: &str, line: usize) -> Result<usize> {
    let idx: i64 = raw
        .parse()
        .map_err(|_| parse_err(source, line, format!("bad index '{raw}'")))?;
    let resolved = match idx {
        0 => None,
        i if i > 0 => Some(i as usize - 1),
        i => count.checked_sub(i.unsigned_abs() as usize),
    };
    match resolved {
        Some(i) if i < count => Ok(i),
        _ => Err(parse_err(
            source,
            line,
            format!("index {idx} out of range (have {count})"),
        )),
    }
}

/// Parses MTL text into materials in declaration order.
pub fn parse_mtl(text: &str, source: &str) -> Result<Vec<MtlMaterial>> {
    let mut out: Vec<MtlMaterial> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        let mut toks = content.split_whitespace();
        let Some(keyword) = toks.next() else { continue };
        let args: Vec<&str> = toks.collect();
        if keyword == "newmtl" {
            let name = args
                .first()
                .ok_or_else(|| parse_err(source, line, "'newmtl' without a name"))?;
            out.push(MtlMaterial::named(name));
            continue;
        }
        let Some(current) = out.last_mut() else {
            return Err(parse_err(
                source,
                line,
                format!("'{keyword}' before any 'newmtl'"),
            ));
        };
        let rgb = |args: &[&str]| -> Result<Rgb> {
            let [r, g, b] = parse_floats::<3>(args, source, line, keyword)?;
            Ok(Rgb::new(r, g, b))
        };
        match keyword {
            "Ka" => current.ka = rgb(&args)?,
            "Kd" => current.kd = rgb(&args)?,
            "Ks" => current.ks = rgb(&args)?,
            "Ke" => current.ke = rgb(&args)?,
            "Ns" => current.ns = parse_floats::<1>(&args, source, line, keyword)?[0],
            "Ni" => current.ni = parse_floats::<1>(&args, source, line, keyword)?[0],
            "illum" => {
                current.illum = args
                    .first()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| parse_err(source, line, "bad 'illum' value"))?
            }
            "map_Kd" => current.map_kd = args.last().map(|s| s.to_string()),
            "d" | "Tr" | "Tf" => {}
            other => warn!("{source}:{line}: skipping unsupported MTL record '{other}'"),
        }
    }
    Ok(out)
}

/// Parses OBJ text. `mtl_loader` maps an `mtllib` name to its contents.
/// Polygons with more than three corners are fan-triangulated.
pub fn parse_obj(
    text: &str,
    source: &str,
    mut mtl_loader: impl FnMut(&str) -> Result<String>,
) -> Result<TriangleMesh> {
    let mut mesh = TriangleMesh::default();
    let mut by_name: HashMap<String, usize> = HashMap::new();
    let mut current: Option<usize> = None;

    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        let mut toks = content.split_whitespace();
        let Some(keyword) = toks.next() else { continue };
        let args: Vec<&str> = toks.collect();
        match keyword {
            "v" => {
                let [x, y, z] = parse_floats::<3>(&args, source, line, keyword)?;
                mesh.positions.push(Vec3::new(x, y, z));
            }
            "vt" => {
                let [u, v] = parse_floats::<2>(&args, source, line, keyword)?;
                mesh.uvs.push([u, v]);
            }
            "vn" => {
                let [x, y, z] = parse_floats::<3>(&args, source, line, keyword)?;
                mesh.normals.push(Vec3::new(x, y, z));
            }
            "f" => {
                if args.len() < 3 {
                    return Err(parse_err(source, line, "face needs at least 3 corners"));
                }
                let mut corners = Vec::with_capacity(args.len());
                for corner in &args {
                    let parts: Vec<&str> = corner.split('/').collect();
                    if parts.len() > 3 || parts[0].is_empty() {
                        return Err(parse_err(
                            source,
                            line,
                            format!("malformed corner '{corner}'"),
                        ));
                    }
                    let v = resolve_index(parts[0], mesh.positions.len(), source, line)?;
                    let vt = match parts.get(1) {
                        Some(s) if !s.is_empty() => {
                            Some(resolve_index(s, mesh.uvs.len(), source, line)?)
                        }
                        _ => None,
                    };
                    let vn = match parts.get(2) {
                        Some(s) if !s.is_empty() => {
                            Some(resolve_index(s, mesh.normals.len(), source, line)?)
                        }
                        _ => None,
                    };
                    corners.push((v, vt, vn));
                }
                let has_vt = corners[0].1.is_some();
                let has_vn = corners[0].2.is_some();
                if corners
                    .iter()
                    .any(|c| c.1.is_some() != has_vt || c.2.is_some() != has_vn)
                {
                    return Err(parse_err(source, line, "face mixes corner formats"));
                }
                for k in 1..corners.len() - 1 {
                    let tri = [corners[0], corners[k], corners[k + 1]];
                    mesh.faces.push(Face {
                        v: tri.map(|c| c.0),
                        vt: has_vt.then(|| tri.map(|c| c.1.unwrap_or(0))),
                        vn: has_vn.then(|| tri.map(|c| c.2.unwrap_or(0))),
                        material: current,
                    });
                }
            }
            "mtllib" => {
                for name in &args {
                    let text = mtl_loader(name)?;
                    for m in parse_mtl(&text, name)? {
                        by_name.insert(m.name.clone(), mesh.materials.len());
                        mesh.materials.push(m);
                    }
                }
            }
            "usemtl" => {
                let name = args
                    .first()
                    .ok_or_else(|| parse_err(source, line, "'usemtl' without a name"))?;
                current = Some(*by_name.get(*name).ok_or_else(|| {
                    parse_err(source, line, format!("unknown material '{name}'"))
                })?);
            }
            "o" | "g" | "s" => {}
            other => warn!("{source}:{line}: skipping unsupported OBJ record '{other}'"),
        }
    }
    mesh.validate()?;
    Ok(mesh)
}

/// Loads an OBJ file, resolving `mtllib` relative to its directory.
pub fn load_obj_file(path: &Path) -> Result<TriangleMesh> {
    let text = std::fs::read_to_string(path).map_err(|_| Error::MissingFile(path.to_path_buf()))?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_obj(&text, &path.display().to_string(), |name| {
        let mtl = dir.join(name);
        std::fs::read_to_string(&mtl).map_err(|_| Error::MissingFile(mtl))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_mtl(name: &str) -> Result<String> {
        Err(Error::MissingFile(name.into()))
    }

    #[test]
    fn minimal_triangle() {
        let mesh = parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3", "t.obj", no_mtl).unwrap();
        assert_eq!(mesh.positions.len(), 3);
        assert_eq!(mesh.faces.len(), 1);
        assert_eq!(mesh.faces[0].v, [0, 1, 2]);
    }

    #[test]
    fn full_corner_format() {
        let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\n\
                    vt 0 0\nvt 1 0\nvt 0 1\n\
                    vn 0 0 1\nvn 0 0 1\nvn 0 0 1\n\
                    f 1/1/1 2/2/2 3/3/3\nf 3//3 2//2 1//1\nf -3/-3 -2/-2 -1/-1\n";
        let mesh = parse_obj(text, "t.obj", no_mtl).unwrap();
        assert_eq!(mesh.faces[0].vt, Some([0, 1, 2]));
        assert_eq!(mesh.faces[0].vn, Some([0, 1, 2]));
        assert_eq!(mesh.faces[1].vt, None);
        assert_eq!(mesh.faces[1].vn, Some([2, 1, 0]));
        assert_eq!(mesh.faces[2].vt, Some([0, 1, 2]));
        assert_eq!(mesh.faces[2].vn, None);
    }

    #[test]
    fn out_of_range_face_reports_line() {
        let err = parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9", "t.obj", no_mtl).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_faces() {
        for bad in ["f 1 2", "f 1/2/3/4 1 1", "f a b c", "f 1/1 2 3"] {
            let text = format!("v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\n{bad}\n");
            assert!(parse_obj(&text, "t.obj", no_mtl).is_err(), "{bad}");
        }
    }

    #[test]
    fn quad_is_fan_triangulated() {
        let mesh = parse_obj(
            "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n",
            "q.obj",
            no_mtl,
        )
        .unwrap();
        assert_eq!(mesh.faces.len(), 2);
        assert_eq!(mesh.faces[1].v, [0, 2, 3]);
    }

    #[test]
    fn materials_resolved() {
        let mtl = "newmtl gold\nKa 0.1 0.1 0.1\nKd 0.8 0.6 0.2\nKs 0.2 0.2 0.2\nKe 0 0 0\nNs 32\nNi 1.5\nmap_Kd gold.png\n";
        let obj = "mtllib m.mtl\nv 0 0 0\nv 1 0 0\nv 0 1 0\nusemtl gold\nf 1 2 3\n";
        let mesh = parse_obj(obj, "t.obj", |name| {
            assert_eq!(name, "m.mtl");
            Ok(mtl.to_string())
        })
        .unwrap();
        assert_eq!(mesh.faces[0].material, Some(0));
        let m = &mesh.materials[0];
        assert_eq!(m.kd, Rgb::new(0.8, 0.6, 0.2));
        assert_eq!(m.ns, 32.0);
        assert_eq!(m.ni, 1.5);
        assert_eq!(m.map_kd.as_deref(), Some("gold.png"));
    }

    #[test]
    fn missing_mtl_and_unknown_material() {
        assert!(matches!(
            parse_obj("mtllib nope.mtl\n", "t.obj", no_mtl),
            Err(Error::MissingFile(_))
        ));
        let err = parse_obj("v 0 0 0\nusemtl ghost\n", "t.obj", no_mtl).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn round_trip_counts() {
        let mesh = super::super::procedural::station();
        let text = mesh.to_obj(None);
        let back = parse_obj(&text, "rt.obj", no_mtl).unwrap();
        assert_eq!(back.positions.len(), mesh.positions.len());
        assert_eq!(back.faces.len(), mesh.faces.len());
        assert_eq!(back.normals.len(), mesh.normals.len());
        assert_eq!(back.uvs.len(), mesh.uvs.len());
    }

    #[test]
    fn round_trip_with_materials() {
        let mesh = super::super::procedural::station();
        let mtl = mesh.to_mtl();
        let back = parse_obj(&mesh.to_obj(Some("station.mtl")), "rt.obj", |_| {
            Ok(mtl.clone())
        })
        .unwrap();
        assert_eq!(back.materials, mesh.materials);
        let names = |m: &TriangleMesh| -> Vec<Option<String>> {
            m.faces
                .iter()
                .map(|f| f.material.map(|i| m.materials[i].name.clone()))
                .collect()
        };
        assert_eq!(names(&back), names(&mesh));
    }

    #[test]
    fn append_shares_identical_materials() {
        let part = |kd: f64| TriangleMesh {
            positions: vec![Vec3::zeros(), Vec3::x(), Vec3::y()],
            faces: vec![Face {
                v: [0, 1, 2],
                vt: None,
                vn: None,
                material: Some(0),
            }],
            materials: vec![MtlMaterial {
                kd: Rgb::repeat(kd),
                ..MtlMaterial::named("m")
            }],
            ..Default::default()
        };
        let mut mesh = part(0.5);
        mesh.append(&part(0.5));
        mesh.append(&part(0.25));
        assert_eq!(mesh.materials.len(), 2);
        let used: Vec<_> = mesh.faces.iter().map(|f| f.material).collect();
        assert_eq!(used, [Some(0), Some(0), Some(1)]);
        assert_eq!(mesh.faces[2].v, [6, 7, 8]);
        mesh.validate().unwrap();
    }
}
