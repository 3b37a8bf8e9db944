//! Poisson-disk surface sampling via greedy sample elimination.
//!
//! Dart throwing cannot hit an exact sample count, but the planner must
//! output exactly one assignment per required drone. So instead: draw an
//! area-weighted oversample pool (4× the requested count), then greedily
//! eliminate the most crowded point until exactly `count` remain. The
//! survivor set keeps pairwise distances close to the hex-packing optimum.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use glam::DVec3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{surface_area, MeshError, PointCloud, TriangleMesh};

const POOL_FACTOR: usize = 4;
/// Exponent of the crowding kernel `(1 - d/R)^8`.
const WEIGHT_EXPONENT: i32 = 8;

/// Samples exactly `count` points on the mesh surface, deterministically for
/// a fixed seed, maximizing the minimum pairwise distance by sample
/// elimination.
pub fn poisson_disk_sample(
    mesh: &TriangleMesh,
    count: usize,
    seed: u64,
) -> Result<PointCloud, MeshError> {
    if count == 0 {
        return Err(MeshError::NonPositiveInput("count"));
    }
    let area = surface_area(mesh);
    let pool = sample_pool(mesh, count * POOL_FACTOR, seed);
    if count > pool.len() {
        return Err(MeshError::CountExceedsCapacity {
            requested: count,
            pool: pool.len(),
        });
    }
    let survivors = eliminate(&pool, count, hex_packing_distance(area, count));
    Ok(PointCloud { points: survivors })
}

/// Max achievable minimum pairwise distance for `count` points on `area`
/// (hexagonal packing bound). Used as the crowding-kernel radius.
fn hex_packing_distance(area: f64, count: usize) -> f64 {
    (2.0 * area / (3.0f64.sqrt() * count as f64)).sqrt()
}

/// Area-weighted uniform random points on the mesh surface.
fn sample_pool(mesh: &TriangleMesh, n: usize, seed: u64) -> Vec<DVec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut cumulative = Vec::with_capacity(mesh.faces.len());
    let mut total = 0.0;
    for f in 0..mesh.faces.len() {
        let [a, b, c] = mesh.face_points(f);
        total += super::triangle_area(a, b, c);
        cumulative.push(total);
    }

    (0..n)
        .map(|_| {
            let target = rng.random::<f64>() * total;
            let face = cumulative.partition_point(|&acc| acc < target);
            let face = face.min(mesh.faces.len() - 1);
            let [a, b, c] = mesh.face_points(face);
            // Uniform barycentric draw, folded into the triangle.
            let mut u = rng.random::<f64>();
            let mut v = rng.random::<f64>();
            if u + v > 1.0 {
                u = 1.0 - u;
                v = 1.0 - v;
            }
            a + u * (b - a) + v * (c - a)
        })
        .collect()
}

#[derive(PartialEq)]
struct HeapEntry {
    weight: f64,
    version: u64,
    idx: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight
            .total_cmp(&other.weight)
            .then(self.idx.cmp(&other.idx))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Removes the highest-crowding point until `keep` remain. Survivors are
/// returned in pool order, so the whole pipeline is deterministic.
fn eliminate(pool: &[DVec3], keep: usize, radius: f64) -> Vec<DVec3> {
    let n = pool.len();
    if keep >= n {
        return pool.to_vec();
    }

    let grid = CellGrid::build(pool, radius);
    let mut weights = vec![0.0f64; n];
    for (i, &p) in pool.iter().enumerate() {
        for j in grid.neighbors(p) {
            if j == i {
                continue;
            }
            let d = p.distance(pool[j]);
            if d < radius {
                weights[i] += (1.0 - d / radius).powi(WEIGHT_EXPONENT);
            }
        }
    }

    let mut version = vec![0u64; n];
    let mut alive = vec![true; n];
    let mut heap: BinaryHeap<HeapEntry> = (0..n)
        .map(|i| HeapEntry {
            weight: weights[i],
            version: 0,
            idx: i,
        })
        .collect();

    let mut remaining = n;
    while remaining > keep {
        let entry = heap.pop().expect("heap exhausted before reaching target");
        if !alive[entry.idx] || entry.version != version[entry.idx] {
            continue; // stale
        }
        alive[entry.idx] = false;
        remaining -= 1;
        let removed = pool[entry.idx];
        for j in grid.neighbors(removed) {
            if !alive[j] {
                continue;
            }
            let d = removed.distance(pool[j]);
            if d < radius {
                weights[j] -= (1.0 - d / radius).powi(WEIGHT_EXPONENT);
                version[j] += 1;
                heap.push(HeapEntry {
                    weight: weights[j],
                    version: version[j],
                    idx: j,
                });
            }
        }
    }

    (0..n).filter(|&i| alive[i]).map(|i| pool[i]).collect()
}

/// Uniform grid over the pool's bounding box with cell size = query radius,
/// so a neighbor query only has to visit the 27 surrounding cells. Cells are
/// visited in a fixed order to keep floating-point sums deterministic.
struct CellGrid {
    cells: HashMap<(i64, i64, i64), Vec<usize>>,
    origin: DVec3,
    cell: f64,
}

impl CellGrid {
    fn build(points: &[DVec3], cell: f64) -> Self {
        let origin = points
            .iter()
            .fold(DVec3::splat(f64::INFINITY), |m, p| m.min(*p));
        let mut cells: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
        let grid = Self {
            cells: HashMap::new(),
            origin,
            cell,
        };
        for (i, &p) in points.iter().enumerate() {
            cells.entry(grid.key(p)).or_default().push(i);
        }
        Self { cells, ..grid }
    }

    fn key(&self, p: DVec3) -> (i64, i64, i64) {
        let rel = (p - self.origin) / self.cell;
        (
            rel.x.floor() as i64,
            rel.y.floor() as i64,
            rel.z.floor() as i64,
        )
    }

    fn neighbors(&self, p: DVec3) -> impl Iterator<Item = usize> + '_ {
        let (cx, cy, cz) = self.key(p);
        (-1..=1).flat_map(move |dx| {
            (-1..=1).flat_map(move |dy| {
                (-1..=1).flat_map(move |dz| {
                    self.cells
                        .get(&(cx + dx, cy + dy, cz + dz))
                        .into_iter()
                        .flatten()
                        .copied()
                })
            })
        })
    }
}
