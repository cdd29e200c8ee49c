use crate::error::{Error, Result};
use crate::mesh::geometry::{signed_area, Point2};
use crate::mesh::{Face, PolyMesh, Polygon};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap, VecDeque};

/// A total map from fine elements (or unknowns) to coarse aggregates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Agglomeration {
    pub fine_to_coarse: Vec<usize>,
    pub coarse_count: usize,
}

impl Agglomeration {
    /// Validates totality: every coarse index in `0..coarse_count` is used.
    pub fn new(fine_to_coarse: Vec<usize>) -> Result<Self> {
        let coarse_count = fine_to_coarse.iter().map(|&c| c + 1).max().unwrap_or(0);
        let mut used = vec![false; coarse_count];
        for &c in &fine_to_coarse {
            used[c] = true;
        }
        if let Some(c) = used.iter().position(|u| !u) {
            return Err(Error::Hierarchy(format!("aggregate {c} is empty")));
        }
        Ok(Agglomeration {
            fine_to_coarse,
            coarse_count,
        })
    }

    pub fn identity(n: usize) -> Self {
        Agglomeration {
            fine_to_coarse: (0..n).collect(),
            coarse_count: n,
        }
    }

    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut m = vec![Vec::new(); self.coarse_count];
        for (f, &c) in self.fine_to_coarse.iter().enumerate() {
            m[c].push(f);
        }
        m
    }

    /// True when every aggregate is connected in the given fine adjacency graph.
    pub fn is_connected(&self, adjacency: &[Vec<usize>]) -> bool {
        let members = self.members();
        let mut seen = vec![false; self.fine_to_coarse.len()];
        for (c, mem) in members.iter().enumerate() {
            let mut queue = VecDeque::from([mem[0]]);
            seen[mem[0]] = true;
            let mut count = 1;
            while let Some(u) = queue.pop_front() {
                for &v in &adjacency[u] {
                    if !seen[v] && self.fine_to_coarse[v] == c {
                        seen[v] = true;
                        count += 1;
                        queue.push_back(v);
                    }
                }
            }
            if count != mem.len() {
                return false;
            }
        }
        true
    }
}

fn is_graph_connected(adjacency: &[Vec<usize>]) -> bool {
    if adjacency.is_empty() {
        return true;
    }
    let mut seen = vec![false; adjacency.len()];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = queue.pop_front() {
        for &v in &adjacency[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                queue.push_back(v);
            }
        }
    }
    count == adjacency.len()
}

/// Running geometric summary of an aggregate used for the shape score.
#[derive(Clone)]
struct Shape {
    points: Vec<Point2>,
    area: f64,
    diam2: f64,
}

impl Shape {
    fn of_element(mesh: &PolyMesh, e: usize) -> Self {
        let el = mesh.element(e);
        Shape {
            points: mesh.element_points(e),
            area: el.area,
            diam2: el.diameter * el.diameter,
        }
    }

    fn merged_diam2(&self, other: &Shape) -> f64 {
        let mut d = self.diam2.max(other.diam2);
        for p in &self.points {
            for q in &other.points {
                d = d.max(p.dist2(*q));
            }
        }
        d
    }

    /// diameter^2 / area of the union; lower is more compact.
    fn merged_score(&self, other: &Shape) -> f64 {
        self.merged_diam2(other) / (self.area + other.area)
    }

    fn absorb(&mut self, other: &Shape) {
        self.diam2 = self.merged_diam2(other);
        self.area += other.area;
        for q in &other.points {
            if !self.points.contains(q) {
                self.points.push(*q);
            }
        }
    }
}

/// Greedy shape-aware agglomeration of mesh elements into connected
/// aggregates of about `target_factor` elements each.
pub fn agglomerate(mesh: &PolyMesh, target_factor: f64, rng_seed: u64) -> Result<Agglomeration> {
    let n = mesh.n_elements();
    if n == 1 {
        return Ok(Agglomeration::identity(1));
    }
    if !(2.0..=16.0).contains(&target_factor) {
        return Err(Error::InvalidArgument(format!(
            "target_factor {target_factor} outside [2, 16]"
        )));
    }
    let adj = mesh.adjacency();
    if !is_graph_connected(&adj) {
        return Err(Error::Hierarchy("input mesh is disconnected".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut priority = vec![0usize; n];
    for (rank, &e) in order.iter().enumerate() {
        priority[e] = rank;
    }

    const UNSET: usize = usize::MAX;
    let mut map = vec![UNSET; n];
    let mut free_nbrs: Vec<usize> = adj.iter().map(Vec::len).collect();
    let shapes: Vec<Shape> = (0..n).map(|e| Shape::of_element(mesh, e)).collect();
    let mut agg_shapes: Vec<Shape> = Vec::new();
    let mut agg_members: Vec<Vec<usize>> = Vec::new();

    let assign = |e: usize, a: usize, map: &mut Vec<usize>, free_nbrs: &mut Vec<usize>| {
        map[e] = a;
        for &v in &adj[e] {
            free_nbrs[v] -= 1;
        }
    };

    loop {
        let seed = (0..n)
            .filter(|&e| map[e] == UNSET)
            .min_by_key(|&e| (free_nbrs[e], priority[e]));
        let Some(seed) = seed else { break };
        let a = agg_members.len();
        assign(seed, a, &mut map, &mut free_nbrs);
        let mut shape = shapes[seed].clone();
        let mut members = vec![seed];
        while (members.len() as f64) < target_factor {
            let cands: BTreeSet<usize> = members
                .iter()
                .flat_map(|&m| adj[m].iter().copied())
                .filter(|&v| map[v] == UNSET)
                .collect();
            let best = cands
                .into_iter()
                .map(|c| (shape.merged_score(&shapes[c]), c))
                .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
            let Some((_, c)) = best else { break };
            assign(c, a, &mut map, &mut free_nbrs);
            shape.absorb(&shapes[c]);
            members.push(c);
        }
        agg_shapes.push(shape);
        agg_members.push(members);
    }

    // merge singleton aggregates into their best-shaped neighbour
    let mut alive = vec![true; agg_members.len()];
    for a in 0..agg_members.len() {
        if agg_members[a].len() != 1 {
            continue;
        }
        let e = agg_members[a][0];
        let target = adj[e]
            .iter()
            .map(|&v| map[v])
            .filter(|&b| b != a)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .map(|b| (agg_shapes[b].merged_score(&agg_shapes[a]), b))
            .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        if let Some((_, b)) = target {
            let sa = agg_shapes[a].clone();
            agg_shapes[b].absorb(&sa);
            agg_members[b].push(e);
            agg_members[a].clear();
            map[e] = b;
            alive[a] = false;
        }
    }

    let map = compact(&map, &alive);
    let map = fill_holes(mesh, map)?;
    Agglomeration::new(map)
}

fn compact(map: &[usize], alive: &[bool]) -> Vec<usize> {
    let mut new_id = vec![usize::MAX; alive.len()];
    let mut next = 0;
    for (a, &ok) in alive.iter().enumerate() {
        if ok {
            new_id[a] = next;
            next += 1;
        }
    }
    map.iter().map(|&a| new_id[a]).collect()
}

/// Boundary half-edges of aggregate `a`, oriented counter-clockwise with
/// respect to the aggregate, together with the element on the far side.
fn boundary_half_edges(mesh: &PolyMesh, map: &[usize], members: &[usize], a: usize) -> Vec<(usize, usize, Option<usize>)> {
    let mut out = Vec::new();
    for &e in members {
        for &f in mesh.element_faces(e) {
            let face: &Face = &mesh.faces()[f];
            let other = if face.plus == e { face.minus } else { Some(face.plus) };
            if other.is_some_and(|o| map[o] == a) {
                continue;
            }
            let [u, v] = face.endpoints;
            if face.plus == e {
                out.push((u, v, other));
            } else {
                out.push((v, u, other));
            }
        }
    }
    out
}

/// Decomposes a set of half-edges into closed loops. Each loop is returned as
/// the list of half-edge indices in traversal order.
fn trace_loops(edges: &[(usize, usize, Option<usize>)]) -> Result<Vec<Vec<usize>>> {
    let mut outgoing: HashMap<usize, Vec<usize>> = HashMap::new();
    for (k, &(u, _, _)) in edges.iter().enumerate() {
        outgoing.entry(u).or_default().push(k);
    }
    for list in outgoing.values_mut() {
        list.reverse();
    }
    let mut used = vec![false; edges.len()];
    let mut loops = Vec::new();
    for start in 0..edges.len() {
        if used[start] {
            continue;
        }
        let origin = edges[start].0;
        let mut lp = Vec::new();
        let mut k = start;
        loop {
            used[k] = true;
            lp.push(k);
            let v = edges[k].1;
            if v == origin {
                break;
            }
            let next = outgoing
                .get_mut(&v)
                .and_then(|l| {
                    while let Some(&c) = l.last() {
                        if used[c] {
                            l.pop();
                        } else {
                            return Some(c);
                        }
                    }
                    None
                })
                .ok_or_else(|| Error::Hierarchy("aggregate boundary is not closed".into()))?;
            k = next;
        }
        loops.push(lp);
    }
    Ok(loops)
}

fn loop_area(mesh: &PolyMesh, edges: &[(usize, usize, Option<usize>)], lp: &[usize]) -> f64 {
    let pts: Vec<Point2> = lp.iter().map(|&k| mesh.vertices()[edges[k].0]).collect();
    signed_area(&pts)
}

/// Absorbs aggregates enclosed by another aggregate (boundary loops of
/// negative orientation) so every aggregate is simply connected.
fn fill_holes(mesh: &PolyMesh, mut map: Vec<usize>) -> Result<Vec<usize>> {
    loop {
        let count = map.iter().max().map_or(0, |m| m + 1);
        let mut members = vec![Vec::new(); count];
        for (e, &a) in map.iter().enumerate() {
            members[a].push(e);
        }
        let mut changed = false;
        let mut alive = vec![true; count];
        for a in 0..count {
            if !alive[a] {
                continue;
            }
            let edges = boundary_half_edges(mesh, &map, &members[a], a);
            let loops = trace_loops(&edges)?;
            let mut absorbed = BTreeSet::new();
            for lp in &loops {
                if loop_area(mesh, &edges, lp) < 0.0 {
                    absorbed.extend(lp.iter().filter_map(|&k| edges[k].2).map(|o| map[o]));
                }
            }
            for b in absorbed {
                if b == a || !alive[b] {
                    continue;
                }
                for &e in &members[b] {
                    map[e] = a;
                }
                alive[b] = false;
                changed = true;
            }
            if changed {
                break;
            }
        }
        if !changed {
            return Ok(map);
        }
        map = compact(&map, &alive);
    }
}

/// Builds the coarse mesh whose elements are the unions of the aggregates.
/// Coarse faces are the fine faces separating different aggregates, so the
/// two meshes are exactly nested.
pub fn coarsen(mesh: &PolyMesh, agg: &Agglomeration) -> Result<PolyMesh> {
    if agg.fine_to_coarse.len() != mesh.n_elements() {
        return Err(Error::DimensionMismatch("agglomeration does not match mesh".into()));
    }
    let map = &agg.fine_to_coarse;
    let members = agg.members();
    let verts = mesh.vertices();
    let mut elements = Vec::with_capacity(agg.coarse_count);
    let mut sub_tri = Vec::with_capacity(agg.coarse_count);
    for (a, mem) in members.iter().enumerate() {
        let edges = boundary_half_edges(mesh, map, mem, a);
        let loops = trace_loops(&edges)?;
        let mut walk: Vec<usize> = loops[0].iter().map(|&k| edges[k].0).collect();
        let mut pending: Vec<Vec<usize>> = loops[1..]
            .iter()
            .map(|lp| lp.iter().map(|&k| edges[k].0).collect())
            .collect();
        // splice loops that touch the walk at a shared (pinch) vertex
        while !pending.is_empty() {
            let mut spliced = false;
            for i in 0..pending.len() {
                let lp = &pending[i];
                if let Some((wpos, lpos)) = walk
                    .iter()
                    .enumerate()
                    .find_map(|(wi, v)| lp.iter().position(|u| u == v).map(|li| (wi, li)))
                {
                    let mut rotated: Vec<usize> = lp[lpos..].iter().chain(&lp[..lpos]).copied().collect();
                    rotated.push(walk[wpos]);
                    walk.splice(wpos + 1..wpos + 1, rotated);
                    pending.remove(i);
                    spliced = true;
                    break;
                }
            }
            if !spliced {
                return Err(Error::Hierarchy(format!("aggregate {a} has a disconnected boundary")));
            }
        }
        let pts: Vec<Point2> = walk.iter().map(|&v| verts[v]).collect();
        let area = signed_area(&pts);
        if area <= 0.0 {
            return Err(Error::Hierarchy(format!("aggregate {a} has non-positive boundary area")));
        }
        let children_area: f64 = mem.iter().map(|&e| mesh.element(e).area).sum();
        let centroid = mem.iter().fold(Point2::default(), |acc, &e| {
            let el = mesh.element(e);
            acc + el.centroid * (el.area / children_area)
        });
        elements.push(Polygon {
            diameter: crate::mesh::geometry::diameter(&pts),
            area,
            centroid,
            vertex_ids: walk,
        });
        sub_tri.push(mem.iter().flat_map(|&e| mesh.sub_triangles(e).iter().copied()).collect());
    }
    let faces = mesh
        .faces()
        .iter()
        .filter_map(|f| match f.minus {
            Some(m) if map[m] == map[f.plus] => None,
            minus => Some(Face {
                plus: map[f.plus],
                minus: minus.map(|m| map[m]),
                ..f.clone()
            }),
        })
        .collect();
    PolyMesh::from_parts(verts.to_vec(), elements, faces, sub_tri)
}
