//! k-gons of a line set, incidence-graph girth and diameter, and the
//! structural checks around pentagons.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lineset::LineSet;
use crate::pg::Subspace;

/// A k-gon: vertices in cyclic order and `edges[i]` joining vertex `i` to
/// vertex `i + 1 (mod k)`. Vertices are point ranks, edges line indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct KGon {
    pub vertices: Vec<u32>,
    pub edges: Vec<u32>,
}

impl KGon {
    pub fn k(&self) -> usize {
        self.vertices.len()
    }

    /// Check the defining conditions against a line set.
    pub fn is_valid_in(&self, ls: &LineSet) -> bool {
        let k = self.vertices.len();
        if k < 2 || self.edges.len() != k {
            return false;
        }
        let distinct_vertices: BTreeSet<_> = self.vertices.iter().collect();
        let distinct_edges: BTreeSet<_> = self.edges.iter().collect();
        if distinct_vertices.len() != k || distinct_edges.len() != k {
            return false;
        }
        (0..k).all(|i| {
            let e = self.edges[i] as usize;
            e < ls.len() && {
                let pts = &ls.line(e).points;
                pts.binary_search(&self.vertices[i]).is_ok()
                    && pts.binary_search(&self.vertices[(i + 1) % k]).is_ok()
            }
        })
    }
}

fn check_k(k: usize) -> Result<()> {
    if !(2..=6).contains(&k) {
        return Err(Error::PolygonSize(k));
    }
    Ok(())
}

/// Depth-first search over paths starting at their smallest vertex.
struct Dfs<'a> {
    ls: &'a LineSet,
    k: usize,
    vertices: Vec<u32>,
    edges: Vec<u32>,
    // Restrict to these line indices when set.
    allowed: Option<&'a BTreeSet<u32>>,
}

impl<'a> Dfs<'a> {
    fn usable(&self, line: u32) -> bool {
        self.allowed.is_none_or(|a| a.contains(&line)) && !self.edges.contains(&line)
    }

    /// Visit every k-gon whose first vertex is `start` and every other
    /// vertex is larger. `visit` returns false to stop.
    fn run(&mut self, start: u32, visit: &mut dyn FnMut(&KGon) -> bool) -> bool {
        self.vertices.clear();
        self.edges.clear();
        self.vertices.push(start);
        self.extend(visit)
    }

    fn extend(&mut self, visit: &mut dyn FnMut(&KGon) -> bool) -> bool {
        let ls = self.ls;
        let start = self.vertices[0];
        let last = *self.vertices.last().unwrap();
        if self.vertices.len() == self.k {
            // Close the cycle through a fresh line.
            for &l in ls.lines_through(last) {
                if self.usable(l) && ls.line(l as usize).points.binary_search(&start).is_ok() {
                    let mut edges = self.edges.clone();
                    edges.push(l);
                    let gon = KGon {
                        vertices: self.vertices.clone(),
                        edges,
                    };
                    if !visit(&gon) {
                        return false;
                    }
                }
            }
            return true;
        }
        for &l in ls.lines_through(last) {
            if !self.usable(l) {
                continue;
            }
            for &p in &ls.line(l as usize).points {
                if p <= start || self.vertices.contains(&p) {
                    continue;
                }
                self.vertices.push(p);
                self.edges.push(l);
                let go_on = self.extend(visit);
                self.vertices.pop();
                self.edges.pop();
                if !go_on {
                    return false;
                }
            }
        }
        true
    }
}

fn search(
    ls: &LineSet,
    k: usize,
    allowed: Option<&BTreeSet<u32>>,
    visit: &mut dyn FnMut(&KGon) -> bool,
) {
    let mut dfs = Dfs {
        ls,
        k,
        vertices: Vec::with_capacity(k),
        edges: Vec::with_capacity(k),
        allowed,
    };
    for start in ls.points() {
        if !dfs.run(start, visit) {
            return;
        }
    }
}

/// First k-gon in canonical DFS order, if any.
pub fn find_kgon(ls: &LineSet, k: usize) -> Result<Option<KGon>> {
    check_k(k)?;
    let mut found = None;
    search(ls, k, None, &mut |g| {
        found = Some(g.clone());
        false
    });
    Ok(found)
}

fn all_kgons_in(ls: &LineSet, k: usize, allowed: Option<&BTreeSet<u32>>) -> Vec<KGon> {
    let mut out = Vec::new();
    search(ls, k, allowed, &mut |g| {
        // Each cycle is met twice, once per direction.
        if g.vertices[1] < g.vertices[k - 1] {
            out.push(g.clone());
        }
        true
    });
    out
}

/// Every k-gon once, each rotated to start at its smallest vertex and
/// oriented so the second vertex is smaller than the last.
pub fn all_kgons(ls: &LineSet, k: usize) -> Result<Vec<KGon>> {
    check_k(k)?;
    if k == 2 {
        return Ok(Vec::new());
    }
    Ok(all_kgons_in(ls, k, None))
}

/// Pentagons all of whose lines lie in `u`.
pub fn pentagons_in(ls: &LineSet, u: &Subspace) -> Result<Vec<KGon>> {
    let inside: BTreeSet<u32> = ls.lines_in(u)?.into_iter().collect();
    Ok(all_kgons_in(ls, 5, Some(&inside)))
}

/// Girth and diameter of the point-line incidence graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncidenceStats {
    pub vertices: usize,
    pub edges: usize,
    /// `None` for a forest.
    pub girth: Option<u32>,
    /// Largest finite distance, taken over all components.
    pub diameter: u32,
    pub connected: bool,
}

pub fn girth_and_diameter(ls: &LineSet) -> IncidenceStats {
    let points: Vec<u32> = ls.points().collect();
    let np = points.len();
    let nv = np + ls.len();
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); nv];
    for (pi, &p) in points.iter().enumerate() {
        for &l in ls.lines_through(p) {
            adj[pi].push(np as u32 + l);
            adj[np + l as usize].push(pi as u32);
        }
    }
    let edges = adj[..np].iter().map(Vec::len).sum();

    let mut girth: Option<u32> = None;
    let mut diameter = 0;
    let mut connected = true;
    let mut dist = vec![u32::MAX; nv];
    let mut parent = vec![u32::MAX; nv];
    let mut queue = VecDeque::new();
    for root in 0..nv {
        dist.fill(u32::MAX);
        parent.fill(u32::MAX);
        dist[root] = 0;
        queue.clear();
        queue.push_back(root as u32);
        let mut reached = 1;
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            diameter = diameter.max(du);
            for &w in &adj[u as usize] {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = du + 1;
                    parent[w as usize] = u;
                    reached += 1;
                    queue.push_back(w);
                } else if parent[u as usize] != w {
                    let cycle = du + dist[w as usize] + 1;
                    girth = Some(girth.map_or(cycle, |g| g.min(cycle)));
                }
            }
        }
        if reached != nv {
            connected = false;
        }
    }
    IncidenceStats {
        vertices: nv,
        edges,
        girth,
        diameter,
        connected,
    }
}

/// Number of lines of `inside` through `point`.
fn u_degree(ls: &LineSet, inside: &BTreeSet<u32>, point: u32) -> usize {
    ls.lines_through(point)
        .iter()
        .filter(|l| inside.contains(l))
        .count()
}

/// Points of `u` carrying q + 1 lines of the set inside `u`.
pub fn qp1_points(ls: &LineSet, u: &Subspace) -> Result<Vec<u32>> {
    let q = ls.space().q() as usize;
    let inside: BTreeSet<u32> = ls.lines_in(u)?.into_iter().collect();
    let mut pts: BTreeSet<u32> = BTreeSet::new();
    for &l in &inside {
        pts.extend(ls.line(l as usize).points.iter().copied());
    }
    Ok(pts
        .into_iter()
        .filter(|&p| u_degree(ls, &inside, p) == q + 1)
        .collect())
}

/// Number of points of the line `s` that are (q+1)-U-points.
pub fn qp1_points_on_line(ls: &LineSet, u: &Subspace, s: &Subspace) -> Result<usize> {
    let space = ls.space();
    if s.projdim() != 1 {
        return Err(Error::DimensionOutOfRange {
            dim: s.projdim(),
            reason: "expected a line".into(),
        });
    }
    if !space.is_subspace_of(s, u)? {
        return Err(Error::Precondition("the line is not contained in U".into()));
    }
    let q = space.q() as usize;
    let inside: BTreeSet<u32> = ls.lines_in(u)?.into_iter().collect();
    Ok(space
        .point_ranks_of(s)
        .into_iter()
        .filter(|&p| u_degree(ls, &inside, p) == q + 1)
        .count())
}

/// Span of a pentagon and the line counts around it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PentagonSpanReport {
    pub span_dim: isize,
    pub lines_in_span: usize,
    pub dim_is_4: bool,
    /// `|L_U| >= 5q`.
    pub at_least_5q: bool,
    /// `|L_U| >= q^3 - q^2 + 4q + 1`.
    pub at_least_4d_bound_plus_one: bool,
}

pub fn pentagon_span(ls: &LineSet, gon: &KGon) -> Result<Subspace> {
    let space = ls.space();
    let vs: Vec<_> = gon
        .vertices
        .iter()
        .map(|&p| space.point_from_rank(p))
        .collect();
    Ok(space.subspace_from_vectors(&vs))
}

pub fn pentagon_span_check(ls: &LineSet, gon: &KGon) -> Result<PentagonSpanReport> {
    if gon.k() != 5 || !gon.is_valid_in(ls) {
        return Err(Error::Precondition("not a pentagon of the line set".into()));
    }
    let q = ls.space().q() as usize;
    let u = pentagon_span(ls, gon)?;
    let count = ls.lines_in(&u)?.len();
    Ok(PentagonSpanReport {
        span_dim: u.projdim(),
        lines_in_span: count,
        dim_is_4: u.projdim() == 4,
        at_least_5q: count >= 5 * q,
        at_least_4d_bound_plus_one: count > q * q * q - q * q + 4 * q,
    })
}

/// For a (q+1)-U-point `p`, the number of (q+1)-U-points in the plane
/// spanned by its lines.
pub fn qp1_points_in_pencil_plane(ls: &LineSet, u: &Subspace, p: u32) -> Result<usize> {
    let space = ls.space();
    let qp1: BTreeSet<u32> = qp1_points(ls, u)?.into_iter().collect();
    if !qp1.contains(&p) {
        return Err(Error::Precondition("not a (q+1)-U-point".into()));
    }
    let pi = crate::hexagon::pencil(ls, p).pi;
    Ok(qp1
        .iter()
        .filter(|&&x| space.contains_vector(&pi, &space.point_from_rank(x)))
        .count())
}

/// Violations of the pentagon extension properties inside a 4-space.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ExtensionReport {
    pub pentagons: usize,
    pub qp1_points: usize,
    /// (P, V): adjacent, V a pentagon vertex, no pentagon through both.
    pub shared_pentagon_violations: Vec<(u32, u32)>,
    /// (q+1)-U-points lying on no pentagon of U.
    pub vertex_violations: Vec<u32>,
    /// (P, Q, R) with Q, R in the pencil plane of P and no common pentagon.
    pub triple_violations: Vec<(u32, u32, u32)>,
}

impl ExtensionReport {
    pub fn is_clean(&self) -> bool {
        self.shared_pentagon_violations.is_empty()
            && self.vertex_violations.is_empty()
            && self.triple_violations.is_empty()
    }
}

/// Check the pentagon extension properties in the 4-space `u`.
///
/// Requires a pentagon inside `u` and a line set satisfying (Pt), (Pl) and
/// (Sd); the latter is verified here with the auditor.
pub fn pentagon_extension_check(ls: &LineSet, u: &Subspace) -> Result<ExtensionReport> {
    use crate::audit::{audit, Axiom, AxiomConfig};

    let space = ls.space();
    let pre = audit(ls, &AxiomConfig::of(&[Axiom::Pt, Axiom::Pl, Axiom::Sd]))?;
    if !pre.all_pass {
        return Err(Error::Precondition(
            "the line set must satisfy (Pt), (Pl) and (Sd)".into(),
        ));
    }
    let gons = pentagons_in(ls, u)?;
    if gons.is_empty() {
        return Err(Error::Precondition("U contains no pentagon".into()));
    }
    let vertex_sets: Vec<BTreeSet<u32>> = gons
        .iter()
        .map(|g| g.vertices.iter().copied().collect())
        .collect();
    let pentagon_vertices: BTreeSet<u32> = vertex_sets.iter().flatten().copied().collect();
    let qp1 = qp1_points(ls, u)?;
    let on_common = |pts: &[u32]| vertex_sets.iter().any(|vs| pts.iter().all(|p| vs.contains(p)));

    let mut report = ExtensionReport {
        pentagons: gons.len(),
        qp1_points: qp1.len(),
        ..Default::default()
    };
    for &p in &qp1 {
        if !pentagon_vertices.contains(&p) {
            report.vertex_violations.push(p);
        }
        for &v in &pentagon_vertices {
            if v != p && ls.line_joining(p, v).is_some() && !on_common(&[p, v]) {
                report.shared_pentagon_violations.push((p, v));
            }
        }
        let pi = crate::hexagon::pencil(ls, p).pi;
        let in_plane: Vec<u32> = qp1
            .iter()
            .copied()
            .filter(|&x| x != p && space.contains_vector(&pi, &space.point_from_rank(x)))
            .collect();
        for &a in &in_plane {
            let pa = ls.line_joining(p, a);
            for &b in &in_plane {
                // R = Q, or R off the line PQ.
                let allowed = b == a || pa.is_none_or(|l| ls.line(l as usize).points.binary_search(&b).is_err());
                if allowed && !on_common(&[p, a, b]) {
                    report.triple_violations.push((p, a, b));
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hexagon::build;
    use crate::pg::Space;

    /// Five points of PG(4, q) in general position joined cyclically.
    pub(crate) fn pentagon_set(q: u32) -> LineSet {
        let s = Space::new(4, q).unwrap();
        let pts = [
            s.unit_point(0),
            s.unit_point(1),
            s.unit_point(2),
            s.unit_point(3),
            s.unit_point(4),
        ];
        let lines = (0..5)
            .map(|i| s.line_through(&pts[i], &pts[(i + 1) % 5]).unwrap().into_subspace())
            .collect::<Vec<_>>();
        LineSet::new(s, lines).unwrap()
    }

    #[test]
    fn hexagon_has_no_short_polygons() {
        for q in [2, 3] {
            let h = build(q).unwrap();
            for k in 2..=5 {
                assert_eq!(find_kgon(&h, k).unwrap(), None, "q={q} k={k}");
            }
            let hex = find_kgon(&h, 6).unwrap().expect("a hexagon exists");
            assert!(hex.is_valid_in(&h));
            let stats = girth_and_diameter(&h);
            assert_eq!(stats.girth, Some(12));
            assert_eq!(stats.diameter, 6);
            assert!(stats.connected);
        }
    }

    #[test]
    fn k_out_of_range() {
        let h = pentagon_set(2);
        assert_eq!(find_kgon(&h, 7), Err(Error::PolygonSize(7)));
        assert_eq!(find_kgon(&h, 1), Err(Error::PolygonSize(1)));
    }

    #[test]
    fn hand_built_pentagon() {
        let ls = pentagon_set(2);
        let g = find_kgon(&ls, 5).unwrap().unwrap();
        assert!(g.is_valid_in(&ls));
        assert_eq!(all_kgons(&ls, 5).unwrap().len(), 1);
        assert_eq!(find_kgon(&ls, 3).unwrap(), None);
        let r = pentagon_span_check(&ls, &g).unwrap();
        assert_eq!(r.span_dim, 4);
        assert_eq!(r.lines_in_span, 5);
        // This set violates (Pt), so the 5q bound need not hold.
        assert!(!r.at_least_5q);
    }

    #[test]
    fn star_graph() {
        let s = Space::new(3, 3).unwrap();
        let l = s.enumerate_subspaces(1).unwrap().next().unwrap();
        let ls = LineSet::new(s, vec![l]).unwrap();
        let st = girth_and_diameter(&ls);
        assert_eq!(st.girth, None);
        assert_eq!(st.diameter, 2);
        assert_eq!(st.vertices, 5);
    }

    #[test]
    fn triangle_found() {
        let s = Space::new(2, 2).unwrap();
        let p = [s.unit_point(0), s.unit_point(1), s.unit_point(2)];
        let lines = (0..3)
            .map(|i| s.line_through(&p[i], &p[(i + 1) % 3]).unwrap().into_subspace())
            .collect::<Vec<_>>();
        let ls = LineSet::new(s, lines).unwrap();
        let g = find_kgon(&ls, 3).unwrap().unwrap();
        assert!(g.is_valid_in(&ls));
        assert_eq!(girth_and_diameter(&ls).girth, Some(6));
    }

    #[test]
    fn qp1_counts_on_hexagon_lines() {
        let h = build(2).unwrap();
        let s = h.space();
        let u = s.enumerate_subspaces(4).unwrap().nth(100).unwrap();
        for l in h.lines_in(&u).unwrap() {
            let line = h.line_subspace(l as usize);
            assert!(qp1_points_on_line(&h, &u, &line).unwrap() <= 3);
        }
        let empty = LineSet::new(s.clone(), vec![h.line_subspace(0)]).unwrap();
        let line = s.enumerate_subspaces(1).unwrap().find(|l| s.is_subspace_of(l, &u).unwrap()).unwrap();
        assert_eq!(qp1_points_on_line(&empty, &u, &line).unwrap_or(0), 0);
        let outside = h.line_subspaces().find(|l| !s.is_subspace_of(l, &u).unwrap()).unwrap();
        assert!(qp1_points_on_line(&h, &u, &outside).is_err());
    }

    #[test]
    fn extension_check_refuses_without_pentagon_or_axioms() {
        let h = build(2).unwrap();
        let u = h.space().enumerate_subspaces(4).unwrap().next().unwrap();
        assert!(matches!(
            pentagon_extension_check(&h, &u),
            Err(Error::Precondition(_))
        ));
        let broken = h.without_line(0);
        assert!(pentagon_extension_check(&broken, &u).is_err());
    }

    #[test]
    fn pentagon_span_check_rejects_non_pentagon() {
        let h = build(2).unwrap();
        let hex = find_kgon(&h, 6).unwrap().unwrap();
        assert!(pentagon_span_check(&h, &hex).is_err());
    }
}
