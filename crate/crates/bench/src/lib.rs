//! Shared fixtures for the benchmark targets.

use glam::DVec3;
use swarmloc_core::mesh::TriangleMesh;

/// Axis-aligned cube of the given side, 12 triangles.
pub fn cube_mesh(side: f64) -> TriangleMesh {
    let s = side;
    let vertices = vec![
        DVec3::new(0.0, 0.0, 0.0),
        DVec3::new(s, 0.0, 0.0),
        DVec3::new(s, s, 0.0),
        DVec3::new(0.0, s, 0.0),
        DVec3::new(0.0, 0.0, s),
        DVec3::new(s, 0.0, s),
        DVec3::new(s, s, s),
        DVec3::new(0.0, s, s),
    ];
    let faces = vec![
        [0, 1, 2],
        [0, 2, 3],
        [4, 6, 5],
        [4, 7, 6],
        [0, 5, 1],
        [0, 4, 5],
        [1, 6, 2],
        [1, 5, 6],
        [2, 7, 3],
        [2, 6, 7],
        [3, 4, 0],
        [3, 7, 4],
    ];
    TriangleMesh::new(vertices, faces).unwrap()
}
