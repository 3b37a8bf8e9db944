//! Offline planning: from a point cloud to per-drone assignments.
//!
//! The planner partitions the cloud into spatially compact groups of roughly
//! `G` points, builds a minimum spanning tree per group restricted to edges
//! the camera can actually measure (length within `[range_min, range_max]`),
//! links the resulting swarms with a swarm-level spanning tree, and repairs
//! every out-of-range swarm bridge by inserting dark relay drones. The output
//! is a [`Plan`]: one [`FlsAssignment`] per bright and dark drone plus the
//! swarm-tree topology, serializable as JSON.
//!
//! Everything here is pure and deterministic: the same cloud, spec, group
//! size and seed produce a byte-identical plan file.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use glam::DVec3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mesh::PointCloud;
use crate::sensor::perpendicular_basis;

/// Tolerance for validating anchor-edge lengths against the camera range.
const EDGE_RANGE_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("plan parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("group size must be at least 1")]
    InvalidGroupSize,
    #[error("invalid drone spec: {0}")]
    InvalidSpec(&'static str),
    #[error("invariant violated: {invariant}{}", fls_display(.fls_id))]
    InvariantViolation {
        invariant: &'static str,
        fls_id: Option<u32>,
    },
    #[error(
        "unbridgeable swarm edge between drone {parent_fls} and drone {child_fls} \
         (distance {distance}): no relay placement satisfies both endpoint ranges"
    )]
    UnbridgeableEdge {
        parent_fls: u32,
        child_fls: u32,
        distance: f64,
    },
}

fn fls_display(id: &Option<u32>) -> String {
    match id {
        Some(id) => format!(" (fls {id})"),
        None => String::new(),
    }
}

/// Physical drone parameters the planner needs: body radius and the camera's
/// measurable distance band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlsSpec {
    pub radius: f64,
    pub range_min: f64,
    pub range_max: f64,
}

impl FlsSpec {
    pub fn validate(&self) -> Result<(), PlanError> {
        if self.radius <= 0.0 {
            return Err(PlanError::InvalidSpec("radius must be positive"));
        }
        if !(0.0 <= self.range_min && self.range_min < self.range_max) {
            return Err(PlanError::InvalidSpec("need 0 <= range_min < range_max"));
        }
        Ok(())
    }

    fn feasible(&self, d: f64) -> bool {
        (self.range_min..=self.range_max).contains(&d)
    }
}

/// Everything one drone needs to know at deployment time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlsAssignment {
    pub fls_id: u32,
    pub swarm_id: u32,
    /// The drone this one localizes against; absent only for the plan's
    /// global root.
    pub anchor_id: Option<u32>,
    pub children_ids: Vec<u32>,
    pub ground_truth_location: DVec3,
    /// Standby relay drone: participates in localization but does not
    /// illuminate a point of the shape.
    pub is_dark: bool,
}

/// One oriented edge of the swarm tree. The bridge pair is the closest pair
/// of bright drones between the two swarms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwarmEdge {
    pub child_swarm_id: u32,
    pub parent_swarm_id: u32,
    pub parent_fls_id: u32,
    pub child_fls_id: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanMeta {
    /// Mesh path or grid spec the cloud came from.
    pub source: String,
    pub seed: u64,
    pub group_size: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub spec: FlsSpec,
    pub assignments: Vec<FlsAssignment>,
    /// Number of groups the cloud was partitioned into (`ceil(n / G)`).
    pub group_count: u32,
    pub swarm_edges: Vec<SwarmEdge>,
    pub meta: PlanMeta,
}

impl Plan {
    pub fn bright_count(&self) -> usize {
        self.assignments.iter().filter(|a| !a.is_dark).count()
    }

    pub fn dark_count(&self) -> usize {
        self.assignments.iter().filter(|a| a.is_dark).count()
    }

    pub fn swarm_count(&self) -> usize {
        let mut ids: Vec<u32> = self.assignments.iter().map(|a| a.swarm_id).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    }

    /// Ground-truth cloud of the bright drones, in id order.
    pub fn bright_cloud(&self) -> PointCloud {
        PointCloud {
            points: self
                .assignments
                .iter()
                .filter(|a| !a.is_dark)
                .map(|a| a.ground_truth_location)
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serialization cannot fail") + "\n"
    }
}

/// Partitions the cloud into groups of at most `group_size` points by greedy
/// region growing: repeatedly take the lowest-index unassigned point and
/// claim its `group_size − 1` nearest unassigned neighbors.
///
/// The `_seed` parameter is recorded in plan metadata and reserved for
/// stochastic grouping strategies; the greedy rule itself is deterministic.
pub fn partition_groups(cloud: &PointCloud, group_size: usize, _seed: u64) -> Vec<Vec<usize>> {
    assert!(group_size >= 1, "group size must be at least 1");
    let n = cloud.len();
    let mut assigned = vec![false; n];
    let mut groups = Vec::with_capacity(n.div_ceil(group_size));

    let mut cursor = 0;
    while cursor < n {
        if assigned[cursor] {
            cursor += 1;
            continue;
        }
        let seed_pt = cloud.points[cursor];
        let mut cands: Vec<(f64, usize)> = (cursor + 1..n)
            .filter(|&i| !assigned[i])
            .map(|i| (seed_pt.distance(cloud.points[i]), i))
            .collect();
        cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let mut group = vec![cursor];
        group.extend(cands.iter().take(group_size - 1).map(|&(_, i)| i));
        group.sort_unstable();
        for &i in &group {
            assigned[i] = true;
        }
        groups.push(group);
    }
    groups
}

/// Minimum spanning forest over `group`, using only candidate edges whose
/// length the camera can measure. Kruskal order with ties broken by
/// `(length, min index, max index)`, so the edge set is deterministic.
/// Disconnection is a legal outcome; the components become separate swarms.
pub fn build_fls_tree(group: &[usize], cloud: &PointCloud, spec: &FlsSpec) -> Vec<(usize, usize)> {
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (i, &a) in group.iter().enumerate() {
        for &b in &group[i + 1..] {
            let (lo, hi) = (a.min(b), a.max(b));
            let d = cloud.points[lo].distance(cloud.points[hi]);
            if spec.feasible(d) {
                candidates.push((d, lo, hi));
            }
        }
    }
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

    let mut uf = UnionFind::over(group);
    let mut edges = Vec::with_capacity(group.len().saturating_sub(1));
    for (_, a, b) in candidates {
        if uf.union(a, b) {
            edges.push((a, b));
        }
    }
    edges
}

/// Unoriented bridge between two components: the closest pair of points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentLink {
    pub comp_a: usize,
    pub comp_b: usize,
    pub point_a: usize,
    pub point_b: usize,
    pub distance: f64,
}

/// Minimum spanning tree over components, where the distance between two
/// components is their minimum pairwise point distance and the bridge pair
/// is that closest pair.
pub fn build_swarm_tree(components: &[Vec<usize>], cloud: &PointCloud) -> Vec<ComponentLink> {
    let m = components.len();
    if m <= 1 {
        return Vec::new();
    }

    let mut links: Vec<ComponentLink> = Vec::with_capacity(m * (m - 1) / 2);
    for i in 0..m {
        for j in i + 1..m {
            let mut best: Option<(f64, usize, usize)> = None;
            for &pa in &components[i] {
                for &pb in &components[j] {
                    let d = cloud.points[pa].distance(cloud.points[pb]);
                    let key = (d, pa.min(pb), pa.max(pb));
                    if best.is_none_or(|(bd, bl, bh)| {
                        key.0.total_cmp(&bd).then(key.1.cmp(&bl)).then(key.2.cmp(&bh))
                            == std::cmp::Ordering::Less
                    }) {
                        best = Some(key);
                    }
                }
            }
            let (d, lo, hi) = best.expect("components are non-empty");
            let (pa, pb) = if components[i].contains(&lo) { (lo, hi) } else { (hi, lo) };
            links.push(ComponentLink {
                comp_a: i,
                comp_b: j,
                point_a: pa,
                point_b: pb,
                distance: d,
            });
        }
    }
    links.sort_by(|x, y| {
        x.distance
            .total_cmp(&y.distance)
            .then(x.comp_a.cmp(&y.comp_a))
            .then(x.comp_b.cmp(&y.comp_b))
    });

    let ids: Vec<usize> = (0..m).collect();
    let mut uf = UnionFind::over(&ids);
    let mut tree = Vec::with_capacity(m - 1);
    for link in links {
        if uf.union(link.comp_a, link.comp_b) {
            tree.push(link);
        }
    }
    tree
}

/// Structural plan draft: swarms with their internal trees plus the
/// swarm-level tree, before relay insertion assigns ids and anchors.
#[derive(Debug, Clone)]
pub struct PlanDraft {
    pub spec: FlsSpec,
    pub points: Vec<DVec3>,
    pub group_count: usize,
    /// Index in this vector is the swarm id. Swarms are ordered by their
    /// lowest member point index, so the swarm containing point 0 is swarm 0.
    pub swarms: Vec<SwarmDraft>,
    /// Oriented swarm-tree edges (child towards parent), rooted at swarm 0.
    pub bridges: Vec<OrientedBridge>,
    pub meta: PlanMeta,
}

#[derive(Debug, Clone)]
pub struct SwarmDraft {
    pub members: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Copy)]
pub struct OrientedBridge {
    pub child_swarm: usize,
    pub parent_swarm: usize,
    pub parent_point: usize,
    pub child_point: usize,
}

/// Runs partitioning, per-group tree construction and swarm-tree assembly.
pub fn draft_plan(
    cloud: &PointCloud,
    spec: FlsSpec,
    group_size: usize,
    seed: u64,
    source: &str,
) -> Result<PlanDraft, PlanError> {
    if cloud.is_empty() {
        return Err(PlanError::EmptyCloud);
    }
    if group_size == 0 {
        return Err(PlanError::InvalidGroupSize);
    }
    spec.validate()?;

    let groups = partition_groups(cloud, group_size, seed);
    let group_count = groups.len();

    // Each connected component of a group's feasible-edge forest is a swarm.
    let mut swarms: Vec<SwarmDraft> = Vec::new();
    for group in &groups {
        let edges = build_fls_tree(group, cloud, &spec);
        let mut uf = UnionFind::over(group);
        for &(a, b) in &edges {
            uf.union(a, b);
        }
        let mut comps: HashMap<usize, Vec<usize>> = HashMap::new();
        for &p in group {
            comps.entry(uf.find(p)).or_default().push(p);
        }
        let mut comp_list: Vec<Vec<usize>> = comps.into_values().collect();
        for c in &mut comp_list {
            c.sort_unstable();
        }
        comp_list.sort_by_key(|c| c[0]);
        for members in comp_list {
            let swarm_edges = edges
                .iter()
                .copied()
                .filter(|&(a, _)| members.binary_search(&a).is_ok())
                .collect();
            swarms.push(SwarmDraft {
                members,
                edges: swarm_edges,
            });
        }
    }
    swarms.sort_by_key(|s| s.members[0]);

    // Swarm tree over the components, rooted at the swarm holding the global
    // lowest point index (always swarm 0 after the sort above).
    let member_lists: Vec<Vec<usize>> = swarms.iter().map(|s| s.members.clone()).collect();
    let tree = build_swarm_tree(&member_lists, cloud);

    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); swarms.len()];
    for (li, link) in tree.iter().enumerate() {
        adjacency[link.comp_a].push(li);
        adjacency[link.comp_b].push(li);
    }
    let mut bridges = Vec::with_capacity(tree.len());
    let mut visited = vec![false; swarms.len()];
    let mut stack = vec![0usize];
    visited[0] = true;
    while let Some(s) = stack.pop() {
        for &li in &adjacency[s] {
            let link = tree[li];
            let (child, parent_point, child_point) = if link.comp_a == s {
                (link.comp_b, link.point_a, link.point_b)
            } else {
                (link.comp_a, link.point_b, link.point_a)
            };
            if visited[child] {
                continue;
            }
            visited[child] = true;
            bridges.push(OrientedBridge {
                child_swarm: child,
                parent_swarm: s,
                parent_point,
                child_point,
            });
            stack.push(child);
        }
    }
    bridges.sort_by_key(|b| b.child_swarm);

    Ok(PlanDraft {
        spec,
        points: cloud.points.clone(),
        group_count,
        swarms,
        bridges,
        meta: PlanMeta {
            source: source.to_string(),
            seed,
            group_size: group_size as u32,
        },
    })
}

/// Repairs every swarm bridge the camera cannot measure directly, then emits
/// the final assignment list.
///
/// * Bridge longer than `range_max`: `ceil(d/range_max) − 1` dark relays
///   evenly spaced on the segment, chained parent → relay → … → child root.
/// * Bridge shorter than `range_min`: one dark relay offset perpendicular to
///   the segment, at distance `(range_min + range_max)/2` from both ends.
///
/// Dark drones receive fresh ids after all bright ids and belong to the
/// child swarm. Each non-root swarm is rooted at its bridge endpoint, whose
/// anchor points across the bridge, so the global anchor graph comes out
/// connected.
pub fn insert_dark_fls(draft: &PlanDraft) -> Result<Plan, PlanError> {
    let n_bright = draft.points.len();
    let spec = draft.spec;

    let mut gt: Vec<DVec3> = draft.points.clone();
    let mut swarm_of: Vec<u32> = vec![0; n_bright];
    let mut is_dark: Vec<bool> = vec![false; n_bright];
    let mut anchor: Vec<Option<usize>> = vec![None; n_bright];

    let mut child_root: HashMap<usize, usize> = HashMap::new(); // swarm -> its bridge endpoint
    for b in &draft.bridges {
        child_root.insert(b.child_swarm, b.child_point);
    }

    for (sid, swarm) in draft.swarms.iter().enumerate() {
        for &p in &swarm.members {
            swarm_of[p] = sid as u32;
        }
        let root = match child_root.get(&sid) {
            Some(&bridge_point) => bridge_point,
            None => swarm.members[0], // root swarm: lowest point index
        };
        orient_tree(&swarm.members, &swarm.edges, root, &mut anchor);
    }

    // Relay insertion, one bridge at a time in child-swarm order.
    for bridge in &draft.bridges {
        let bp = bridge.parent_point;
        let bc = bridge.child_point;
        let d = gt[bp].distance(gt[bc]);
        let unbridgeable = || PlanError::UnbridgeableEdge {
            parent_fls: bp as u32,
            child_fls: bc as u32,
            distance: d,
        };

        if spec.feasible(d) {
            anchor[bc] = Some(bp);
        } else if d > spec.range_max {
            let hops = (d / spec.range_max).ceil() as usize;
            let spacing = d / hops as f64;
            if spacing < spec.range_min {
                return Err(unbridgeable());
            }
            let dir = (gt[bc] - gt[bp]) / d;
            let mut prev = bp;
            for i in 1..hops {
                let pos = gt[bp] + dir * (spacing * i as f64);
                let relay = gt.len();
                gt.push(pos);
                swarm_of.push(bridge.child_swarm as u32);
                is_dark.push(true);
                anchor.push(Some(prev));
                prev = relay;
            }
            anchor[bc] = Some(prev);
        } else {
            // Bridge inside the blind range: offset one relay sideways so
            // both hops land in the measurable band.
            if d == 0.0 {
                return Err(unbridgeable());
            }
            let hop = (spec.range_min + spec.range_max) / 2.0;
            let half = d / 2.0;
            debug_assert!(hop > half);
            let offset = (hop * hop - half * half).sqrt();
            let dir = (gt[bc] - gt[bp]) / d;
            let (perp, _) = perpendicular_basis(dir);
            let pos = gt[bp] + dir * half + perp * offset;
            let relay = gt.len();
            gt.push(pos);
            swarm_of.push(bridge.child_swarm as u32);
            is_dark.push(true);
            anchor.push(Some(bp));
            anchor[bc] = Some(relay);
        }
    }

    // Assignment emission: ids are indices, children derived from anchors.
    let total = gt.len();
    let mut children: Vec<Vec<u32>> = vec![Vec::new(); total];
    for (node, &a) in anchor.iter().enumerate() {
        if let Some(a) = a {
            children[a].push(node as u32);
        }
    }
    let assignments: Vec<FlsAssignment> = (0..total)
        .map(|i| {
            let mut kids = children[i].clone();
            kids.sort_unstable();
            FlsAssignment {
                fls_id: i as u32,
                swarm_id: swarm_of[i],
                anchor_id: anchor[i].map(|a| a as u32),
                children_ids: kids,
                ground_truth_location: gt[i],
                is_dark: is_dark[i],
            }
        })
        .collect();

    let swarm_edges = draft
        .bridges
        .iter()
        .map(|b| SwarmEdge {
            child_swarm_id: b.child_swarm as u32,
            parent_swarm_id: b.parent_swarm as u32,
            parent_fls_id: b.parent_point as u32,
            child_fls_id: b.child_point as u32,
        })
        .collect();

    let plan = Plan {
        spec,
        assignments,
        group_count: draft.group_count as u32,
        swarm_edges,
        meta: draft.meta.clone(),
    };
    validate_plan(&plan)?;
    Ok(plan)
}

/// Full planning pipeline for a cloud.
pub fn plan(
    cloud: &PointCloud,
    spec: FlsSpec,
    group_size: usize,
    seed: u64,
    source: &str,
) -> Result<Plan, PlanError> {
    let draft = draft_plan(cloud, spec, group_size, seed, source)?;
    insert_dark_fls(&draft)
}

fn orient_tree(
    members: &[usize],
    edges: &[(usize, usize)],
    root: usize,
    anchor: &mut [Option<usize>],
) {
    let mut adjacency: HashMap<usize, Vec<usize>> = HashMap::new();
    for &(a, b) in edges {
        adjacency.entry(a).or_default().push(b);
        adjacency.entry(b).or_default().push(a);
    }
    let mut visited: HashMap<usize, bool> = members.iter().map(|&m| (m, false)).collect();
    visited.insert(root, true);
    anchor[root] = None;
    let mut stack = vec![root];
    while let Some(node) = stack.pop() {
        if let Some(neighbors) = adjacency.get(&node) {
            for &next in neighbors {
                if !visited[&next] {
                    visited.insert(next, true);
                    anchor[next] = Some(node);
                    stack.push(next);
                }
            }
        }
    }
}

pub fn save_plan(plan: &Plan, path: &Path) -> Result<(), PlanError> {
    std::fs::write(path, plan.to_json())?;
    Ok(())
}

/// Loads a plan and re-checks every structural invariant, so hand-edited
/// files cannot smuggle an inconsistent topology into a run.
pub fn load_plan(path: &Path) -> Result<Plan, PlanError> {
    let text = std::fs::read_to_string(path)?;
    let plan: Plan = serde_json::from_str(&text)?;
    validate_plan(&plan)?;
    Ok(plan)
}

/// Checks all [`Plan`] invariants, naming the violated invariant and the
/// offending drone id.
pub fn validate_plan(plan: &Plan) -> Result<(), PlanError> {
    plan.spec.validate()?;
    let violation = |invariant: &'static str, fls_id: Option<u32>| PlanError::InvariantViolation {
        invariant,
        fls_id,
    };

    let mut index: HashMap<u32, usize> = HashMap::new();
    for (i, a) in plan.assignments.iter().enumerate() {
        if index.insert(a.fls_id, i).is_some() {
            return Err(violation("unique fls_id", Some(a.fls_id)));
        }
        if !a.ground_truth_location.is_finite() {
            return Err(violation("finite ground truth", Some(a.fls_id)));
        }
    }
    if plan.assignments.is_empty() {
        return Err(violation("non-empty plan", None));
    }

    // anchor/children mutual consistency.
    for a in &plan.assignments {
        if let Some(anchor_id) = a.anchor_id {
            let Some(&ai) = index.get(&anchor_id) else {
                return Err(violation("anchor exists", Some(a.fls_id)));
            };
            if !plan.assignments[ai].children_ids.contains(&a.fls_id) {
                return Err(violation("anchor/children consistency", Some(a.fls_id)));
            }
        }
        for &c in &a.children_ids {
            let Some(&ci) = index.get(&c) else {
                return Err(violation("child exists", Some(a.fls_id)));
            };
            if plan.assignments[ci].anchor_id != Some(a.fls_id) {
                return Err(violation("anchor/children consistency", Some(c)));
            }
        }
    }

    // Exactly one global root; every anchor chain must reach it without
    // repeating a node.
    let roots: Vec<u32> = plan
        .assignments
        .iter()
        .filter(|a| a.anchor_id.is_none())
        .map(|a| a.fls_id)
        .collect();
    if roots.len() != 1 {
        return Err(violation("single root", roots.get(1).copied()));
    }
    let n = plan.assignments.len();
    for a in &plan.assignments {
        let mut cur = a;
        let mut steps = 0;
        while let Some(anchor_id) = cur.anchor_id {
            steps += 1;
            if steps > n {
                return Err(violation("acyclic", Some(a.fls_id)));
            }
            cur = &plan.assignments[index[&anchor_id]];
        }
        if cur.fls_id != roots[0] {
            return Err(violation("connected", Some(a.fls_id)));
        }
    }

    // Every anchor edge must be measurable in ground truth.
    for a in &plan.assignments {
        if let Some(anchor_id) = a.anchor_id {
            let anchor = &plan.assignments[index[&anchor_id]];
            let d = a
                .ground_truth_location
                .distance(anchor.ground_truth_location);
            if d < plan.spec.range_min - EDGE_RANGE_TOL || d > plan.spec.range_max + EDGE_RANGE_TOL
            {
                return Err(violation("edge range", Some(a.fls_id)));
            }
        }
    }

    // Anchor edges restricted to one swarm form a tree over that swarm.
    let mut swarm_nodes: HashMap<u32, usize> = HashMap::new();
    let mut swarm_in_edges: HashMap<u32, usize> = HashMap::new();
    for a in &plan.assignments {
        *swarm_nodes.entry(a.swarm_id).or_insert(0) += 1;
        if let Some(anchor_id) = a.anchor_id {
            let anchor = &plan.assignments[index[&anchor_id]];
            if anchor.swarm_id == a.swarm_id {
                *swarm_in_edges.entry(a.swarm_id).or_insert(0) += 1;
            }
        }
    }
    for (&sid, &nodes) in &swarm_nodes {
        let edges = swarm_in_edges.get(&sid).copied().unwrap_or(0);
        if edges != nodes - 1 {
            return Err(violation("swarm tree", None));
        }
        let _ = sid;
    }

    // The swarm edges form a tree over swarm ids.
    let swarm_count = swarm_nodes.len();
    if plan.swarm_edges.len() != swarm_count.saturating_sub(1) {
        return Err(violation("swarm edge count", None));
    }
    {
        let ids: Vec<usize> = swarm_nodes.keys().map(|&i| i as usize).collect();
        let mut uf = UnionFind::over(&ids);
        for e in &plan.swarm_edges {
            if !swarm_nodes.contains_key(&e.child_swarm_id)
                || !swarm_nodes.contains_key(&e.parent_swarm_id)
            {
                return Err(violation("swarm edge endpoints", None));
            }
            if !uf.union(e.child_swarm_id as usize, e.parent_swarm_id as usize) {
                return Err(violation("swarm edges acyclic", None));
            }
        }
    }

    // Bridge endpoints must live in the swarms they claim to join.
    for e in &plan.swarm_edges {
        let ok = |fls: u32, swarm: u32| {
            index
                .get(&fls)
                .is_some_and(|&i| plan.assignments[i].swarm_id == swarm)
        };
        if !ok(e.parent_fls_id, e.parent_swarm_id) || !ok(e.child_fls_id, e.child_swarm_id) {
            return Err(violation("bridge endpoints", Some(e.child_fls_id)));
        }
    }

    Ok(())
}

/// One-paragraph human summary used by the CLI.
pub fn plan_summary(plan: &Plan) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "plan: {} bright + {} dark drones, {} groups, {} swarms, {} swarm edges",
        plan.bright_count(),
        plan.dark_count(),
        plan.group_count,
        plan.swarm_count(),
        plan.swarm_edges.len()
    );
    let _ = writeln!(
        s,
        "spec: radius {} m, camera range [{}, {}] m",
        plan.spec.radius, plan.spec.range_min, plan.spec.range_max
    );
    s
}

struct UnionFind {
    parent: HashMap<usize, usize>,
}

impl UnionFind {
    fn over(items: &[usize]) -> Self {
        Self {
            parent: items.iter().map(|&i| (i, i)).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let p = self.parent[&x];
        if p == x {
            return x;
        }
        let root = self.find(p);
        self.parent.insert(x, root);
        root
    }

    /// Returns false when both items were already in the same set.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return false;
        }
        self.parent.insert(ra.max(rb), ra.min(rb));
        true
    }
}
