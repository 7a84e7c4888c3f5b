//! Generated meshes used by the bundled scenes and tests.

use super::obj::{Face, MtlMaterial, TriangleMesh};
use crate::math::{Rgb, Vec3};

/// Axis-aligned box with outward winding.
pub fn cuboid(center: Vec3, half: Vec3) -> TriangleMesh {
    let mut mesh = TriangleMesh::default();
    for i in 0..8 {
        let sx = if i & 1 == 0 { -1.0 } else { 1.0 };
        let sy = if i & 2 == 0 { -1.0 } else { 1.0 };
        let sz = if i & 4 == 0 { -1.0 } else { 1.0 };
        mesh.positions
            .push(center + Vec3::new(sx * half.x, sy * half.y, sz * half.z));
    }
    // Quads listed counter-clockwise seen from outside.
    const QUADS: [[usize; 4]; 6] = [
        [0, 2, 3, 1], // -z
        [4, 5, 7, 6], // +z
        [0, 1, 5, 4], // -y
        [2, 6, 7, 3], // +y
        [0, 4, 6, 2], // -x
        [1, 3, 7, 5], // +x
    ];
    for q in QUADS {
        for tri in [[q[0], q[1], q[2]], [q[0], q[2], q[3]]] {
            mesh.faces.push(Face {
                v: tri,
                vt: None,
                vn: None,
                material: None,
            });
        }
    }
    mesh
}

fn with_material(mut mesh: TriangleMesh, material: MtlMaterial) -> TriangleMesh {
    mesh.materials = vec![material];
    for f in &mut mesh.faces {
        f.material = Some(0);
    }
    mesh
}

fn material(name: &str, kd: Rgb, ks: Rgb, ns: f64) -> MtlMaterial {
    MtlMaterial {
        name: name.to_string(),
        ka: Rgb::zeros(),
        kd,
        ks,
        ke: Rgb::zeros(),
        ns,
        ni: 1.0,
        illum: 2,
        map_kd: None,
    }
}

/// Space-station-like assembly: a long truss, a stack of pressurised
/// modules, and four solar arrays. All corners are distinct features and
/// the point set is far from coplanar.
pub fn station() -> TriangleMesh {
    let metal = material("truss", Rgb::new(0.6, 0.6, 0.62), Rgb::repeat(0.2), 40.0);
    let hull = material("module", Rgb::new(0.8, 0.78, 0.72), Rgb::repeat(0.1), 16.0);
    let panel = material("panel", Rgb::new(0.15, 0.12, 0.35), Rgb::repeat(0.3), 80.0);

    let mut mesh = TriangleMesh::default();
    mesh.append(&with_material(
        cuboid(Vec3::zeros(), Vec3::new(12.0, 0.6, 0.6)),
        metal,
    ));
    let modules = [
        (Vec3::new(0.0, 0.0, 2.5), Vec3::new(1.2, 1.2, 1.9)),
        (Vec3::new(0.0, 0.0, 6.0), Vec3::new(1.0, 1.0, 1.6)),
        (Vec3::new(0.0, 0.0, -2.2), Vec3::new(1.1, 1.1, 1.6)),
        (Vec3::new(2.6, 0.0, 6.0), Vec3::new(1.4, 0.8, 0.8)),
        (Vec3::new(-2.4, 0.0, 2.6), Vec3::new(1.2, 0.9, 0.9)),
    ];
    for (c, h) in modules {
        mesh.append(&with_material(cuboid(c, h), hull.clone()));
    }
    for x in [-10.0, -7.0, 7.0, 10.0] {
        for y in [-4.5, 4.5] {
            mesh.append(&with_material(
                cuboid(Vec3::new(x, y, 0.0), Vec3::new(1.2, 3.6, 0.05)),
                panel.clone(),
            ));
        }
    }
    mesh
}

/// Regular grid heightfield over `[-extent, extent]²` with `z = height(x, y)`.
pub fn heightfield(cells: usize, extent: f64, height: impl Fn(f64, f64) -> f64) -> TriangleMesh {
    let n = cells.max(1);
    let mut mesh = TriangleMesh::default();
    for j in 0..=n {
        for i in 0..=n {
            let x = -extent + 2.0 * extent * i as f64 / n as f64;
            let y = -extent + 2.0 * extent * j as f64 / n as f64;
            mesh.positions.push(Vec3::new(x, y, height(x, y)));
            mesh.uvs.push([i as f64 / n as f64, j as f64 / n as f64]);
        }
    }
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            for tri in [[a, b, c], [a, c, d]] {
                mesh.faces.push(Face {
                    v: tri,
                    vt: Some(tri),
                    vn: None,
                    material: None,
                });
            }
        }
    }
    mesh
}

/// Rolling terrain used by the stereo scenes.
pub fn terrain() -> TriangleMesh {
    let mesh = heightfield(64, 200.0, |x, y| {
        12.0 * (x / 37.0).sin() * (y / 29.0).cos()
            + 6.0 * ((x + 2.0 * y) / 17.0).sin()
            + 3.0 * ((x - y) / 7.0).cos()
    });
    with_material(
        mesh,
        material("regolith", Rgb::new(0.55, 0.5, 0.45), Rgb::zeros(), 0.0),
    )
}
