//! Greedy graph-growing agglomeration of simplicial meshes.

use super::{MeshElement, PolytopicMesh};
use crate::geometry::newell_normal;
use crate::{Error, Point, Result};
use std::cmp::Reverse;
use std::collections::{BTreeSet, HashMap, VecDeque};

const NONE: usize = usize::MAX;

/// Merge the simplices of `fine` into about `target` connected agglomerates.
///
/// Parts are grown one after another, each up to an even share of what
/// remains. A part is seeded at the free element with the most blocked
/// sides (boundary or already assigned), ties broken by breadth-first rank
/// from element `seed % n`, and grows by preferring elements that share the
/// most faces with it. In 2D a triangle only joins a part if the part stays
/// a topological disk. Coplanar fine faces shared by the same pair of
/// agglomerates are merged into one polygonal face.
pub fn agglomerate(fine: &PolytopicMesh, target: usize, seed: u64) -> Result<PolytopicMesh> {
    let n = fine.len();
    if n == 0 || target == 0 {
        return Err(Error::Mesh(
            "agglomeration needs a non-empty mesh and target".into(),
        ));
    }
    let simplices: Vec<Vec<usize>> = (0..n)
        .map(|e| {
            let el = &fine.elements()[e];
            match el.fine.as_slice() {
                [s] => Ok(s.clone()),
                _ => Err(Error::Mesh(format!("cell {e} is not a single simplex"))),
            }
        })
        .collect::<Result<_>>()?;
    let adj = fine.adjacency();
    let rank = bfs_rank(&adj, (seed % n as u64) as usize);
    let mut by_rank: Vec<usize> = (0..n).collect();
    by_rank.sort_by_key(|&e| rank[e]);
    // Sides of each element that face the boundary or an assigned element.
    let mut blocked: Vec<usize> = (0..n)
        .map(|e| fine.element_faces(e).len() - adj[e].len())
        .collect();

    let ctx = Ctx {
        fine,
        simplices: &simplices,
        adj: &adj,
        rank: &rank,
    };
    let mut part = vec![NONE; n];
    let mut parts: Vec<Part> = Vec::new();
    let k_target = target.min(n);
    let mut assigned = 0;
    for k in 0..k_target {
        let remaining = n - assigned;
        if remaining == 0 {
            break;
        }
        let share = ((remaining as f64) / ((k_target - k) as f64))
            .round()
            .max(1.0) as usize;
        // Enclosed free elements are left for the attachment pass.
        let free = |e: usize| part[e] == NONE;
        let Some(start) = by_rank
            .iter()
            .copied()
            .filter(|&e| free(e) && adj[e].iter().any(|&x| free(x)))
            .max_by_key(|&e| (blocked[e], Reverse(rank[e])))
            .or_else(|| by_rank.iter().copied().find(|&e| free(e)))
        else {
            break;
        };
        let id = parts.len();
        parts.push(Part::default());
        assigned += ctx.grow(&mut part, &mut parts[id], &mut blocked, id, start, share);
    }
    // Attach leftovers to the smallest admissible neighbouring part.
    loop {
        let mut progress = false;
        let mut left = false;
        for &e in &by_rank {
            if part[e] != NONE {
                continue;
            }
            left = true;
            let mut best: Option<usize> = None;
            for &nb in &adj[e] {
                let p = part[nb];
                if p == NONE || !ctx.admissible(&part, &parts[p], p, e) {
                    continue;
                }
                if best.is_none_or(|b| (parts[p].size, p) < (parts[b].size, b)) {
                    best = Some(p);
                }
            }
            if let Some(p) = best {
                ctx.join(&mut part, &mut parts[p], &mut blocked, p, e);
                progress = true;
            }
        }
        if !left {
            break;
        }
        if !progress {
            // Start a fresh part from the first stranded element.
            let start = *by_rank.iter().find(|&&e| part[e] == NONE).unwrap();
            let id = parts.len();
            parts.push(Part::default());
            ctx.grow(
                &mut part,
                &mut parts[id],
                &mut blocked,
                id,
                start,
                usize::MAX,
            );
        }
    }
    rebalance(&ctx, &mut part, parts.len());
    build_coarse(fine, &simplices, &part, parts.len())
}

/// Move border elements from larger to smaller neighbouring parts until
/// every part is within a quarter of the mean size or no move is left.
fn rebalance(ctx: &Ctx, part: &mut [usize], k: usize) {
    let n = part.len();
    let mean = n as f64 / k as f64;
    let (lo, hi) = (0.75 * mean, 1.25 * mean);
    let mut members: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); k];
    for (e, &p) in part.iter().enumerate() {
        members[p].insert(e);
    }
    loop {
        let balanced = members
            .iter()
            .all(|m| (m.len() as f64) >= lo && (m.len() as f64) <= hi);
        if balanced {
            return;
        }
        let mut moves: Vec<(Reverse<usize>, usize, usize)> = Vec::new();
        for e in 0..n {
            let a = part[e];
            for &x in &ctx.adj[e] {
                let b = part[x];
                if b != a && members[a].len() >= members[b].len() + 2 {
                    moves.push((Reverse(members[a].len() - members[b].len()), e, b));
                }
            }
        }
        moves.sort_unstable();
        moves.dedup();
        let mut moved = false;
        for (_, e, b) in moves {
            let a = part[e];
            let (sa, sb) = (members[a].len(), members[b].len());
            let useful = (sa as f64) > hi || (sb as f64) < lo;
            if a == b || sa < sb + 2 || !useful {
                continue;
            }
            if !ctx.adj[e].iter().any(|&x| part[x] == b) {
                continue;
            }
            members[a].remove(&e);
            members[b].insert(e);
            if ctx.valid_part(&members[a]) && ctx.valid_part(&members[b]) {
                part[e] = b;
                moved = true;
            } else {
                members[b].remove(&e);
                members[a].insert(e);
            }
        }
        if !moved {
            return;
        }
    }
}

struct Ctx<'a> {
    fine: &'a PolytopicMesh,
    simplices: &'a [Vec<usize>],
    adj: &'a [Vec<usize>],
    rank: &'a [usize],
}

impl Ctx<'_> {
    fn grow(
        &self,
        part: &mut [usize],
        p: &mut Part,
        blocked: &mut [usize],
        id: usize,
        start: usize,
        share: usize,
    ) -> usize {
        let mut gain: HashMap<usize, usize> = HashMap::new();
        let mut frontier: BTreeSet<(Reverse<usize>, usize, usize)> = BTreeSet::new();
        let mut deferred: Vec<usize> = Vec::new();
        self.absorb(part, p, blocked, id, start, &mut gain, &mut frontier);
        while p.size < share {
            let Some((_, _, e)) = frontier.pop_first() else {
                break;
            };
            if part[e] != NONE {
                continue;
            }
            if !self.admissible(part, p, id, e) {
                deferred.push(e);
                continue;
            }
            self.absorb(part, p, blocked, id, e, &mut gain, &mut frontier);
            for d in deferred.drain(..) {
                if part[d] == NONE {
                    frontier.insert((Reverse(gain[&d]), self.rank[d], d));
                }
            }
        }
        p.size
    }

    /// Join `e` and raise the gain of its free neighbours.
    #[allow(clippy::too_many_arguments)]
    fn absorb(
        &self,
        part: &mut [usize],
        p: &mut Part,
        blocked: &mut [usize],
        id: usize,
        e: usize,
        gain: &mut HashMap<usize, usize>,
        frontier: &mut BTreeSet<(Reverse<usize>, usize, usize)>,
    ) {
        self.join(part, p, blocked, id, e);
        for &x in &self.adj[e] {
            if part[x] != NONE {
                continue;
            }
            let g = gain.entry(x).or_insert(0);
            frontier.remove(&(Reverse(*g), self.rank[x], x));
            *g += 1;
            frontier.insert((Reverse(*g), self.rank[x], x));
        }
    }

    fn join(&self, part: &mut [usize], p: &mut Part, blocked: &mut [usize], id: usize, e: usize) {
        part[e] = id;
        p.size += 1;
        for &x in &self.adj[e] {
            blocked[x] += 1;
        }
        if self.fine.dim() == 2 {
            for &v in &self.simplices[e] {
                *p.vertex_count.entry(v).or_default() += 1;
            }
        }
    }

    /// Connected, and a topological disk in 2D.
    fn valid_part(&self, m: &BTreeSet<usize>) -> bool {
        let Some(&first) = m.first() else {
            return false;
        };
        let mut seen = BTreeSet::from([first]);
        let mut stack = vec![first];
        while let Some(e) = stack.pop() {
            for &x in &self.adj[e] {
                if m.contains(&x) && seen.insert(x) {
                    stack.push(x);
                }
            }
        }
        if seen.len() != m.len() {
            return false;
        }
        if self.fine.dim() != 2 {
            return true;
        }
        let mut next = HashMap::new();
        for &e in m {
            for &r in self.fine.element_faces(e) {
                if self.fine.across(r).is_some_and(|nb| m.contains(&nb)) {
                    continue;
                }
                let v = &self.fine.faces()[r.face].vertices;
                let (a, b) = if r.owner { (v[0], v[1]) } else { (v[1], v[0]) };
                if next.insert(a, b).is_some() {
                    return false;
                }
            }
        }
        chain(&next).is_some()
    }

    /// In 2D, adding a triangle across a single edge must not touch the
    /// part at its opposite vertex.
    fn admissible(&self, part: &[usize], p: &Part, id: usize, e: usize) -> bool {
        let fine = self.fine;
        if fine.dim() != 2 {
            return true;
        }
        let mut shared = Vec::new();
        for &r in fine.element_faces(e) {
            if fine.across(r).is_some_and(|nb| part[nb] == id) {
                shared.push(r.face);
            }
        }
        if shared.len() != 1 {
            return !shared.is_empty();
        }
        let edge = &fine.faces()[shared[0]].vertices;
        let opposite = self.simplices[e]
            .iter()
            .find(|v| !edge.contains(v))
            .unwrap();
        !p.vertex_count.contains_key(opposite)
    }
}

#[derive(Default)]
struct Part {
    size: usize,
    vertex_count: HashMap<usize, usize>,
}

fn bfs_rank(adj: &[Vec<usize>], start: usize) -> Vec<usize> {
    let n = adj.len();
    let mut rank = vec![NONE; n];
    let mut next = 0;
    let mut queue = VecDeque::new();
    for root in std::iter::once(start).chain(0..n) {
        if rank[root] != NONE {
            continue;
        }
        rank[root] = next;
        next += 1;
        queue.push_back(root);
        while let Some(e) = queue.pop_front() {
            for &nb in &adj[e] {
                if rank[nb] == NONE {
                    rank[nb] = next;
                    next += 1;
                    queue.push_back(nb);
                }
            }
        }
    }
    rank
}

fn build_coarse(
    fine: &PolytopicMesh,
    simplices: &[Vec<usize>],
    part: &[usize],
    n_parts: usize,
) -> Result<PolytopicMesh> {
    let dim = fine.dim();
    let mut members = vec![Vec::new(); n_parts];
    for (e, &p) in part.iter().enumerate() {
        members[p].push(e);
    }
    let mut elements = Vec::with_capacity(n_parts);
    if dim == 2 {
        for m in &members {
            let mut next: HashMap<usize, usize> = HashMap::new();
            for &e in m {
                for &r in fine.element_faces(e) {
                    if fine.across(r).is_some_and(|nb| part[nb] == part[e]) {
                        continue;
                    }
                    let v = &fine.faces()[r.face].vertices;
                    let (a, b) = if r.owner { (v[0], v[1]) } else { (v[1], v[0]) };
                    next.insert(a, b);
                }
            }
            let lp = chain(&next)
                .ok_or_else(|| Error::Mesh("agglomerate boundary is not a single loop".into()))?;
            elements.push(MeshElement {
                loops: vec![lp],
                fine: m.iter().map(|&e| simplices[e].clone()).collect(),
            });
        }
    } else {
        let pts = fine.vertices();
        let diam = {
            let mut lo = Point::repeat(f64::INFINITY);
            let mut hi = Point::repeat(f64::NEG_INFINITY);
            for p in pts {
                lo = lo.inf(p);
                hi = hi.sup(p);
            }
            (hi - lo).norm()
        };
        for m in &members {
            // Outward boundary triangles grouped by the part across them.
            let mut groups: HashMap<usize, Vec<Vec<usize>>> = HashMap::new();
            for &e in m {
                for &r in fine.element_faces(e) {
                    let across = fine.across(r).map(|nb| part[nb]);
                    if across == Some(part[e]) {
                        continue;
                    }
                    let mut tri = fine.faces()[r.face].vertices.clone();
                    if !r.owner {
                        tri.reverse();
                    }
                    groups.entry(across.unwrap_or(NONE)).or_default().push(tri);
                }
            }
            let mut keys: Vec<usize> = groups.keys().copied().collect();
            keys.sort_unstable();
            let mut loops = Vec::new();
            for k in keys {
                let mut tris = groups.remove(&k).unwrap();
                tris.sort_by_key(|t| {
                    let mut s = t.clone();
                    s.sort_unstable();
                    s
                });
                for cluster in coplanar_clusters(pts, &tris, diam) {
                    for comp in components(&cluster) {
                        merge_component(&comp, &mut loops);
                    }
                }
            }
            elements.push(MeshElement {
                loops,
                fine: m.iter().map(|&e| simplices[e].clone()).collect(),
            });
        }
    }
    PolytopicMesh::new(dim, fine.vertices().to_vec(), elements)
}

/// Follow a successor map around a single cycle, starting at its least vertex.
fn chain(next: &HashMap<usize, usize>) -> Option<Vec<usize>> {
    let start = *next.keys().min()?;
    let mut lp = vec![start];
    let mut v = next[&start];
    while v != start {
        if lp.len() > next.len() {
            return None;
        }
        lp.push(v);
        v = *next.get(&v)?;
    }
    (lp.len() == next.len()).then_some(lp)
}

fn coplanar_clusters(pts: &[Point], tris: &[Vec<usize>], diam: f64) -> Vec<Vec<Vec<usize>>> {
    let mut planes: Vec<(Point, Point)> = Vec::new();
    let mut clusters: Vec<Vec<Vec<usize>>> = Vec::new();
    for t in tris {
        let n = newell_normal(pts, t).normalize();
        let x = pts[t[0]];
        // Orientation is shared within a group, so only same-facing planes merge.
        let found = planes.iter().position(|(c, o)| {
            (c.dot(&n) - 1.0).abs() < 1e-10 && (x - o).dot(c).abs() < 1e-10 * diam
        });
        match found {
            Some(i) => clusters[i].push(t.clone()),
            None => {
                planes.push((n, x));
                clusters.push(vec![t.clone()]);
            }
        }
    }
    clusters
}

/// Edge-connected components of a triangle set, in input order.
fn components(tris: &[Vec<usize>]) -> Vec<Vec<Vec<usize>>> {
    let mut by_edge: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (i, t) in tris.iter().enumerate() {
        for j in 0..3 {
            let (a, b) = (t[j], t[(j + 1) % 3]);
            by_edge.entry((a.min(b), a.max(b))).or_default().push(i);
        }
    }
    let mut comp = vec![NONE; tris.len()];
    let mut out = Vec::new();
    for s in 0..tris.len() {
        if comp[s] != NONE {
            continue;
        }
        let id = out.len();
        let mut stack = vec![s];
        comp[s] = id;
        let mut members = Vec::new();
        while let Some(i) = stack.pop() {
            members.push(i);
            let t = &tris[i];
            for j in 0..3 {
                let (a, b) = (t[j], t[(j + 1) % 3]);
                for &o in &by_edge[&(a.min(b), a.max(b))] {
                    if comp[o] == NONE {
                        comp[o] = id;
                        stack.push(o);
                    }
                }
            }
        }
        members.sort_unstable();
        out.push(members.into_iter().map(|i| tris[i].clone()).collect());
    }
    out
}

/// Replace a planar triangle patch by its boundary polygon when that is a
/// single simple loop; otherwise keep the triangles.
fn merge_component(tris: &[Vec<usize>], loops: &mut Vec<Vec<usize>>) {
    if tris.len() == 1 {
        loops.push(tris[0].clone());
        return;
    }
    let mut directed: HashMap<(usize, usize), i32> = HashMap::new();
    for t in tris {
        for j in 0..3 {
            *directed.entry((t[j], t[(j + 1) % 3])).or_default() += 1;
        }
    }
    let mut next = HashMap::new();
    let mut simple = true;
    for (&(a, b), &c) in &directed {
        if directed.contains_key(&(b, a)) {
            continue;
        }
        if c != 1 || next.insert(a, b).is_some() {
            simple = false;
        }
    }
    match chain(&next).filter(|_| simple) {
        Some(lp) => loops.push(lp),
        None => loops.extend(tris.iter().cloned()),
    }
}
