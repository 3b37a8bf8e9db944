//! Triangle meshes and ground-truth point clouds.
//!
//! A shape enters the toolkit as a Wavefront OBJ file (only `v` and `f`
//! records are interpreted; polygons are fan-triangulated). From the mesh we
//! derive the surface area, the number of drones needed to illuminate it, and
//! a point cloud sampled on the surface with a Poisson-disk guarantee.
//! Synthetic rectangular grids cover the small-scale experiments that do not
//! need a mesh at all.

mod sampling;

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write as _};
use std::path::Path;

use glam::DVec3;
use thiserror::Error;

use crate::fmt::sig9;

pub use sampling::poisson_disk_sample;

/// Triangles below this area (in m²) are considered degenerate and dropped
/// at load time.
pub const DEGENERATE_AREA: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("file not found: {0}")]
    FileNotFound(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("mesh has no non-degenerate faces")]
    EmptyMesh,
    #[error("input must be positive: {0}")]
    NonPositiveInput(&'static str),
    #[error("requested {requested} samples but the candidate pool holds {pool}")]
    CountExceedsCapacity { requested: usize, pool: usize },
}

/// An indexed triangle mesh in meters.
#[derive(Debug, Clone)]
pub struct TriangleMesh {
    pub vertices: Vec<DVec3>,
    pub faces: Vec<[usize; 3]>,
    /// Number of zero-area faces dropped at load time.
    pub degenerate_dropped: usize,
}

impl TriangleMesh {
    /// Builds a mesh from raw vertex and face lists, dropping degenerate
    /// faces. Face indices must already be validated against `vertices`.
    pub fn new(vertices: Vec<DVec3>, faces: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        let mut kept = Vec::with_capacity(faces.len());
        let mut dropped = 0;
        for f in faces {
            debug_assert!(f.iter().all(|&i| i < vertices.len()));
            if triangle_area(vertices[f[0]], vertices[f[1]], vertices[f[2]]) > DEGENERATE_AREA {
                kept.push(f);
            } else {
                dropped += 1;
            }
        }
        if kept.is_empty() {
            return Err(MeshError::EmptyMesh);
        }
        Ok(Self {
            vertices,
            faces: kept,
            degenerate_dropped: dropped,
        })
    }

    pub fn face_points(&self, face: usize) -> [DVec3; 3] {
        let [a, b, c] = self.faces[face];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }
}

/// Ordered list of ground-truth coordinates. The index of a point doubles as
/// the provisional id of the drone assigned to illuminate it.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub points: Vec<DVec3>,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Serializes as CSV with header `id,x,y,z` and 9-significant-digit
    /// coordinates.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("id,x,y,z\n");
        for (i, p) in self.points.iter().enumerate() {
            let _ = writeln!(out, "{i},{},{},{}", sig9(p.x), sig9(p.y), sig9(p.z));
        }
        out
    }

    pub fn save_csv(&self, path: &Path) -> Result<(), MeshError> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }

    pub fn load_csv(path: &Path) -> Result<Self, MeshError> {
        let text = std::fs::read_to_string(path).map_err(|e| io_to_mesh_err(e, path))?;
        let mut points = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if lineno == 0 {
                continue; // header
            }
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(MeshError::Parse {
                    line: lineno + 1,
                    msg: format!("expected 4 fields, got {}", fields.len()),
                });
            }
            let coord = |s: &str| -> Result<f64, MeshError> {
                s.trim().parse().map_err(|_| MeshError::Parse {
                    line: lineno + 1,
                    msg: format!("bad number {s:?}"),
                })
            };
            let p = DVec3::new(coord(fields[1])?, coord(fields[2])?, coord(fields[3])?);
            if !p.is_finite() {
                return Err(MeshError::Parse {
                    line: lineno + 1,
                    msg: "non-finite coordinate".into(),
                });
            }
            points.push(p);
        }
        Ok(Self { points })
    }
}

fn io_to_mesh_err(e: std::io::Error, path: &Path) -> MeshError {
    if e.kind() == std::io::ErrorKind::NotFound {
        MeshError::FileNotFound(path.display().to_string())
    } else {
        MeshError::Io(e)
    }
}

/// Loads the OBJ subset: `v x y z` and `f i j k...` records (1-based
/// indices, `i/j/k` vertex-texture-normal tuples accepted, polygons
/// fan-triangulated). `#` comments and unrelated record types are ignored.
pub fn load_mesh(path: &Path) -> Result<TriangleMesh, MeshError> {
    let file = std::fs::File::open(path).map_err(|e| io_to_mesh_err(e, path))?;
    parse_obj(BufReader::new(file))
}

pub fn parse_obj<R: BufRead>(reader: R) -> Result<TriangleMesh, MeshError> {
    let mut vertices: Vec<DVec3> = Vec::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let mut coords = [0.0f64; 3];
                for c in &mut coords {
                    let tok = tokens.next().ok_or_else(|| MeshError::Parse {
                        line: lineno,
                        msg: "vertex needs 3 coordinates".into(),
                    })?;
                    *c = tok.parse().map_err(|_| MeshError::Parse {
                        line: lineno,
                        msg: format!("bad coordinate {tok:?}"),
                    })?;
                }
                let v = DVec3::from_array(coords);
                if !v.is_finite() {
                    return Err(MeshError::Parse {
                        line: lineno,
                        msg: "non-finite vertex".into(),
                    });
                }
                vertices.push(v);
            }
            Some("f") => {
                let mut idx = Vec::new();
                for tok in tokens {
                    // "i", "i/t", "i//n" and "i/t/n" all reference vertex i.
                    let vtok = tok.split('/').next().unwrap_or("");
                    let i: i64 = vtok.parse().map_err(|_| MeshError::Parse {
                        line: lineno,
                        msg: format!("bad face index {tok:?}"),
                    })?;
                    if i < 1 || i as usize > vertices.len() {
                        return Err(MeshError::Parse {
                            line: lineno,
                            msg: format!(
                                "face index {i} out of range (have {} vertices)",
                                vertices.len()
                            ),
                        });
                    }
                    idx.push((i - 1) as usize);
                }
                if idx.len() < 3 {
                    return Err(MeshError::Parse {
                        line: lineno,
                        msg: "face needs at least 3 indices".into(),
                    });
                }
                for k in 1..idx.len() - 1 {
                    faces.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            // vn/vt/o/g/s/usemtl/mtllib and friends.
            _ => {}
        }
    }

    TriangleMesh::new(vertices, faces)
}

pub fn triangle_area(a: DVec3, b: DVec3, c: DVec3) -> f64 {
    0.5 * (b - a).cross(c - a).length()
}

/// Total surface area in m².
pub fn surface_area(mesh: &TriangleMesh) -> f64 {
    mesh.faces
        .iter()
        .map(|&[a, b, c]| triangle_area(mesh.vertices[a], mesh.vertices[b], mesh.vertices[c]))
        .sum()
}

/// Number of drones required to illuminate `area`, at one drone per square
/// cell of its diameter: `ceil(area / (2·radius)²)`.
pub fn required_fls_count(area: f64, fls_radius: f64) -> Result<usize, MeshError> {
    required_fls_count_with_density(area, fls_radius, 1.0)
}

/// [`required_fls_count`] scaled by a density multiplier, for reproducing
/// point counts that imply a different packing.
pub fn required_fls_count_with_density(
    area: f64,
    fls_radius: f64,
    density: f64,
) -> Result<usize, MeshError> {
    if area <= 0.0 {
        return Err(MeshError::NonPositiveInput("area"));
    }
    if fls_radius <= 0.0 {
        return Err(MeshError::NonPositiveInput("fls_radius"));
    }
    if density <= 0.0 {
        return Err(MeshError::NonPositiveInput("density"));
    }
    let cell = (2.0 * fls_radius) * (2.0 * fls_radius);
    Ok((density * area / cell).ceil().max(1.0) as usize)
}

/// `rows × cols` planar grid at z = 0, row-major, `spacing` meters apart.
pub fn grid_point_cloud(rows: usize, cols: usize, spacing: f64) -> PointCloud {
    debug_assert!(spacing > 0.0);
    let mut points = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            points.push(DVec3::new(i as f64 * spacing, j as f64 * spacing, 0.0));
        }
    }
    PointCloud { points }
}

#[cfg(test)]
pub(crate) mod test_meshes {
    use super::*;

    pub const SINGLE_TRIANGLE_OBJ: &str = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n";

    pub const UNIT_CUBE_OBJ: &str = "\
# unit cube
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
v 0 0 1
v 1 0 1
v 1 1 1
v 0 1 1
f 1 2 3
f 1 3 4
f 5 7 6
f 5 8 7
f 1 6 2
f 1 5 6
f 2 7 3
f 2 6 7
f 3 8 4
f 3 7 8
f 4 5 1
f 4 8 5
";

    pub fn unit_cube() -> TriangleMesh {
        parse_obj(UNIT_CUBE_OBJ.as_bytes()).unwrap()
    }

    /// Axis-aligned unit square in the z = 0 plane, two triangles.
    pub fn unit_square() -> TriangleMesh {
        TriangleMesh::new(
            vec![
                DVec3::new(0.0, 0.0, 0.0),
                DVec3::new(1.0, 0.0, 0.0),
                DVec3::new(1.0, 1.0, 0.0),
                DVec3::new(0.0, 1.0, 0.0),
            ],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap()
    }

    /// Icosphere built by repeated edge-midpoint subdivision of an
    /// icosahedron, with every vertex projected to the radius-`r` sphere.
    /// Serves as an analytic-area reference: its surface area approaches
    /// `4πr²` as subdivisions increase.
    pub fn icosphere(r: f64, subdivisions: u32) -> TriangleMesh {
        let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
        let mut vertices: Vec<DVec3> = [
            (-1.0, phi, 0.0),
            (1.0, phi, 0.0),
            (-1.0, -phi, 0.0),
            (1.0, -phi, 0.0),
            (0.0, -1.0, phi),
            (0.0, 1.0, phi),
            (0.0, -1.0, -phi),
            (0.0, 1.0, -phi),
            (phi, 0.0, -1.0),
            (phi, 0.0, 1.0),
            (-phi, 0.0, -1.0),
            (-phi, 0.0, 1.0),
        ]
        .iter()
        .map(|&(x, y, z)| DVec3::new(x, y, z).normalize() * r)
        .collect();
        let mut faces: Vec<[usize; 3]> = vec![
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ];

        for _ in 0..subdivisions {
            let mut midpoints: std::collections::HashMap<(usize, usize), usize> =
                std::collections::HashMap::new();
            let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<DVec3>| -> usize {
                let key = (a.min(b), a.max(b));
                *midpoints.entry(key).or_insert_with(|| {
                    let m = ((vertices[a] + vertices[b]) / 2.0).normalize() * r;
                    vertices.push(m);
                    vertices.len() - 1
                })
            };
            let mut next = Vec::with_capacity(faces.len() * 4);
            for [a, b, c] in faces {
                let ab = midpoint(a, b, &mut vertices);
                let bc = midpoint(b, c, &mut vertices);
                let ca = midpoint(c, a, &mut vertices);
                next.push([a, ab, ca]);
                next.push([b, bc, ab]);
                next.push([c, ca, bc]);
                next.push([ab, bc, ca]);
            }
            faces = next;
        }

        TriangleMesh::new(vertices, faces).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::test_meshes::*;
    use super::*;
    use glam::DQuat;
    use proptest::prelude::*;

    #[test]
    fn loads_single_triangle() {
        let mesh = parse_obj(SINGLE_TRIANGLE_OBJ.as_bytes()).unwrap();
        assert_eq!(mesh.vertices.len(), 3);
        assert_eq!(mesh.faces.len(), 1);
        assert_eq!(mesh.degenerate_dropped, 0);
    }

    #[test]
    fn loads_unit_cube() {
        let mesh = unit_cube();
        assert_eq!(mesh.vertices.len(), 8);
        assert_eq!(mesh.faces.len(), 12);
    }

    #[test]
    fn face_index_out_of_range_is_parse_error() {
        let obj = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 99\n";
        match parse_obj(obj.as_bytes()) {
            Err(MeshError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn missing_file_is_file_not_found() {
        match load_mesh(Path::new("/nonexistent/shape.obj")) {
            Err(MeshError::FileNotFound(_)) => {}
            other => panic!("expected FileNotFound, got {other:?}"),
        }
    }

    #[test]
    fn degenerate_faces_dropped_and_counted() {
        let obj = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\nf 1 1 2\nf 1 2 2\n";
        let mesh = parse_obj(obj.as_bytes()).unwrap();
        assert_eq!(mesh.faces.len(), 1);
        assert_eq!(mesh.degenerate_dropped, 2);
    }

    #[test]
    fn all_degenerate_is_empty_mesh() {
        let obj = "v 0 0 0\nv 1 0 0\nf 1 1 2\n";
        assert!(matches!(
            parse_obj(obj.as_bytes()),
            Err(MeshError::EmptyMesh)
        ));
    }

    #[test]
    fn quad_faces_are_fan_triangulated() {
        let obj = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n";
        let mesh = parse_obj(obj.as_bytes()).unwrap();
        assert_eq!(mesh.faces.len(), 2);
        assert!((surface_area(&mesh) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn slash_face_tokens_use_vertex_index() {
        let obj = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1/1 2/2 3//1\n";
        let mesh = parse_obj(obj.as_bytes()).unwrap();
        assert_eq!(mesh.faces, vec![[0, 1, 2]]);
    }

    #[test]
    fn area_of_single_triangle() {
        let mesh = parse_obj(SINGLE_TRIANGLE_OBJ.as_bytes()).unwrap();
        assert!((surface_area(&mesh) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn area_of_unit_cube() {
        assert!((surface_area(&unit_cube()) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn icosphere_area_approaches_sphere() {
        let mesh = icosphere(1.0, 3);
        let analytic = 4.0 * std::f64::consts::PI;
        let area = surface_area(&mesh);
        assert!(
            (area - analytic).abs() / analytic < 0.02,
            "icosphere area {area} vs 4π {analytic}"
        );
    }

    #[test]
    fn fls_count_examples() {
        assert_eq!(required_fls_count(1.0, 0.05).unwrap(), 100);
        assert_eq!(required_fls_count(6.0, 0.25).unwrap(), 24);
        assert_eq!(required_fls_count(0.0004, 0.01).unwrap(), 1);
    }

    #[test]
    fn fls_count_rejects_non_positive() {
        assert!(required_fls_count(0.0, 0.1).is_err());
        assert!(required_fls_count(1.0, -0.1).is_err());
    }

    #[test]
    fn grid_4x4_bounding_box() {
        let cloud = grid_point_cloud(4, 4, 0.5);
        assert_eq!(cloud.len(), 16);
        let max = cloud
            .points
            .iter()
            .fold(DVec3::splat(f64::NEG_INFINITY), |m, p| m.max(*p));
        let min = cloud
            .points
            .iter()
            .fold(DVec3::splat(f64::INFINITY), |m, p| m.min(*p));
        assert_eq!(max - min, DVec3::new(1.5, 1.5, 0.0));
    }

    #[test]
    fn grid_1x1_is_origin() {
        let cloud = grid_point_cloud(1, 1, 1.0);
        assert_eq!(cloud.points, vec![DVec3::ZERO]);
    }

    #[test]
    fn grid_2x3_nearest_neighbor_spacing() {
        let cloud = grid_point_cloud(2, 3, 0.1);
        assert_eq!(cloud.len(), 6);
        for (i, a) in cloud.points.iter().enumerate() {
            let nn = cloud
                .points
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, b)| a.distance(*b))
                .fold(f64::INFINITY, f64::min);
            assert!((nn - 0.1).abs() < 1e-12);
        }
    }

    #[test]
    fn cloud_csv_round_trip() {
        let cloud = grid_point_cloud(3, 2, 0.25);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cloud.csv");
        cloud.save_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("id,x,y,z\n"));
        let back = PointCloud::load_csv(&path).unwrap();
        assert_eq!(back.len(), cloud.len());
        for (a, b) in cloud.points.iter().zip(&back.points) {
            assert!(a.distance(*b) < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn surface_area_rigid_invariant(
            angle in 0.0..std::f64::consts::TAU,
            ax in -1.0f64..1.0,
            ay in -1.0f64..1.0,
            az in -1.0f64..1.0,
            tx in -50.0f64..50.0,
            ty in -50.0f64..50.0,
            tz in -50.0f64..50.0,
        ) {
            let axis = DVec3::new(ax, ay, az);
            prop_assume!(axis.length() > 1e-3);
            let rot = DQuat::from_axis_angle(axis.normalize(), angle);
            let t = DVec3::new(tx, ty, tz);

            let mesh = unit_cube();
            let moved = TriangleMesh {
                vertices: mesh.vertices.iter().map(|&v| rot * v + t).collect(),
                faces: mesh.faces.clone(),
                degenerate_dropped: 0,
            };
            let a0 = surface_area(&mesh);
            let a1 = surface_area(&moved);
            prop_assert!((a0 - a1).abs() / a0 < 1e-9);
        }

        #[test]
        fn grid_pairwise_distances_at_least_spacing(
            rows in 1usize..6,
            cols in 1usize..6,
            spacing in 0.05f64..2.0,
        ) {
            let cloud = grid_point_cloud(rows, cols, spacing);
            for (i, a) in cloud.points.iter().enumerate() {
                for b in &cloud.points[i + 1..] {
                    prop_assert!(a.distance(*b) >= spacing - 1e-12);
                }
            }
        }
    }
}
