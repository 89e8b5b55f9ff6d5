//! The split Cayley hexagon H(q) in its natural embedding in PG(6, q).
//!
//! Points are the points of Q(6, q). Lines are the totally isotropic lines
//! whose signed Plücker coordinates satisfy
//!
//! ```text
//! p12 = p34, p54 = p32, p20 = p35, p65 = p30, p01 = p36, p46 = p31
//! ```
//!
//! with `p(j, i) = -p(i, j)`.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pg::{ProjLine, ProjPoint, Space, Subspace};
use crate::quadric::{classify_section, is_isotropic_pair, isotropic_lines, QuadricForm, SectionType};

pub use crate::lineset::{LineRecord, LineSet};

const HEXAGON_EQUATIONS: [((usize, usize), (usize, usize)); 6] = [
    ((1, 2), (3, 4)),
    ((5, 4), (3, 2)),
    ((2, 0), (3, 5)),
    ((6, 5), (3, 0)),
    ((0, 1), (3, 6)),
    ((4, 6), (3, 1)),
];

/// Whether an isotropic line of Q(6, q) is a line of H(q).
pub fn hexagon_line_predicate(space: &Space, l: &ProjLine) -> Result<bool> {
    if space.n() != 6 {
        return Err(Error::Precondition("H(q) lives in PG(6, q)".into()));
    }
    let rows = l.subspace().rows();
    if !is_isotropic_pair(space, &rows[0], &rows[1]) {
        return Err(Error::NotIsotropic);
    }
    Ok(HEXAGON_EQUATIONS
        .iter()
        .all(|&((a, b), (c, d))| space.p(l, a, b) == space.p(l, c, d)))
}

/// Number of lines (and points) of H(q): (q^6 - 1)/(q - 1).
pub fn hexagon_size(q: u64) -> u64 {
    (q.pow(6) - 1) / (q - 1)
}

/// Line set of H(q), obtained by filtering the isotropic lines.
pub fn build(q: u32) -> Result<LineSet> {
    let space = Space::new(6, q)?;
    let mut lines = Vec::new();
    for l in isotropic_lines(&space)? {
        if hexagon_line_predicate(&space, &l)? {
            lines.push(l.into_subspace());
        }
    }
    let expected = hexagon_size(q as u64);
    if lines.len() as u64 != expected {
        return Err(Error::Internal(format!(
            "filter accepted {} lines, H({q}) has {expected}",
            lines.len()
        )));
    }
    LineSet::new(space, lines)
}

/// The lines of a set through one point and their span.
#[derive(Debug, Clone)]
pub struct PointPencil {
    pub point: ProjPoint,
    pub lines: Vec<u32>,
    pub pi: Subspace,
}

pub fn pencil(ls: &LineSet, point: u32) -> PointPencil {
    let lines = ls.lines_through(point).to_vec();
    let space = ls.space();
    let subs: Vec<Subspace> = lines.iter().map(|&i| ls.line_subspace(i as usize)).collect();
    let pi = space
        .span_all(subs.iter())
        .expect("lines share the ambient space");
    PointPencil {
        point: ls.point(point),
        lines,
        pi,
    }
}

/// Outcome of [`verify_flat_full`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlatFullReport {
    /// Every pencil spans at most a plane.
    pub flat: bool,
    /// Every line carries q + 1 points of the point set.
    pub full: bool,
    /// `(s, t)` when every line has s + 1 points and every point t + 1 lines.
    pub order: Option<(u32, u32)>,
    pub order_is_qq: bool,
    /// First points whose pencil is not planar, in rank order.
    pub non_flat_points: Vec<u32>,
}

pub fn verify_flat_full(ls: &LineSet) -> FlatFullReport {
    let q = ls.space().q() as u32;
    let mut non_flat = Vec::new();
    for p in ls.points() {
        if pencil(ls, p).pi.projdim() > 2 {
            non_flat.push(p);
        }
    }
    let full = ls
        .lines()
        .iter()
        .all(|r| r.points.len() as u32 == q + 1 && r.points.iter().all(|&p| ls.degree(p) > 0));
    let mut degrees = ls.points().map(|p| ls.degree(p));
    let order = match degrees.next() {
        Some(first) if degrees.all(|d| d == first) && full => Some((q, first as u32 - 1)),
        _ => None,
    };
    FlatFullReport {
        flat: non_flat.is_empty(),
        full,
        order,
        order_is_qq: order == Some((q, q)),
        non_flat_points: non_flat.into_iter().take(8).collect(),
    }
}

/// Projective dimension of the span of all points of the set.
pub fn span_dim(ls: &LineSet) -> isize {
    ls.span().projdim()
}

/// Per-type statistics of [`section_census`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeStats {
    pub four_spaces: u64,
    /// Hexagon lines inside the 4-space -> number of 4-spaces.
    pub line_histogram: BTreeMap<u64, u64>,
    pub max_lines: u64,
    pub bound: u64,
    pub within_bound: bool,
    /// For point-vertex elliptic cones: every section has exactly q^2+1
    /// totally isotropic lines, all through the vertex, and every hexagon
    /// line inside passes through the vertex.
    pub vertex_lines_ok: Option<bool>,
}

/// How the 4-spaces of PG(6, q) meet Q(6, q) and H(q).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionCensus {
    pub q: u32,
    pub four_spaces: u64,
    pub types: BTreeMap<SectionType, TypeStats>,
    pub max_lines: u64,
    pub four_d_bound: u64,
    pub all_within_bounds: bool,
}

struct SectionSample {
    kind: SectionType,
    lines: u64,
    vertex_ok: Option<bool>,
}

fn sample(h: &LineSet, u: &Subspace) -> Result<SectionSample> {
    let space = h.space();
    let section = classify_section(space, u)?;
    let inside = h.lines_in(u)?;
    let vertex_ok = if section.kind == SectionType::ConeOverElliptic {
        let q = space.q() as usize;
        let v = section.vertex.rows()[0];
        let mut lines = BTreeSet::new();
        let mut all_through = true;
        for x in space.points_of(u) {
            if x == v || QuadricForm::eval(space, &x) != 0 {
                continue;
            }
            let l = space.subspace_from_vectors(&[v, x]);
            if space.points_of(&l).iter().all(|p| QuadricForm::eval(space, p) == 0) {
                lines.insert(l);
            }
        }
        for &i in &inside {
            if !space.contains_vector(&h.line_subspace(i as usize), &v) {
                all_through = false;
            }
        }
        Some(lines.len() == q * q + 1 && all_through)
    } else {
        None
    };
    Ok(SectionSample {
        kind: section.kind,
        lines: inside.len() as u64,
        vertex_ok,
    })
}

/// Classify every 4-space of PG(6, q) and count the lines of `h` in it.
pub fn section_census(h: &LineSet) -> Result<SectionCensus> {
    let space = h.space();
    let q = space.q() as u64;
    let fours: Vec<Subspace> = space.enumerate_subspaces(4)?.collect();
    let samples = fours
        .par_iter()
        .map(|u| sample(h, u))
        .collect::<Result<Vec<_>>>()?;
    let mut types: BTreeMap<SectionType, TypeStats> = BTreeMap::new();
    for s in &samples {
        let t = types.entry(s.kind).or_insert_with(|| TypeStats {
            four_spaces: 0,
            line_histogram: BTreeMap::new(),
            max_lines: 0,
            bound: s.kind.hexagon_line_bound(q),
            within_bound: true,
            vertex_lines_ok: None,
        });
        t.four_spaces += 1;
        *t.line_histogram.entry(s.lines).or_default() += 1;
        t.max_lines = t.max_lines.max(s.lines);
        t.within_bound &= s.lines <= t.bound;
        if let Some(ok) = s.vertex_ok {
            t.vertex_lines_ok = Some(t.vertex_lines_ok.unwrap_or(true) && ok);
        }
    }
    let max_lines = samples.iter().map(|s| s.lines).max().unwrap_or(0);
    let four_d_bound = crate::audit::four_d_bound(q);
    Ok(SectionCensus {
        q: space.q() as u32,
        four_spaces: fours.len() as u64,
        all_within_bounds: types
            .values()
            .all(|t| t.within_bound && t.vertex_lines_ok != Some(false))
            && max_lines <= four_d_bound,
        types,
        max_lines,
        four_d_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h2_counts() {
        let h = build(2).unwrap();
        assert_eq!(h.len(), 63);
        assert_eq!(h.point_count(), 63);
        assert!(h.points().all(|p| h.degree(p) == 3));
        let r = verify_flat_full(&h);
        assert!(r.flat && r.full && r.order_is_qq);
        assert_eq!(r.order, Some((2, 2)));
        assert_eq!(span_dim(&h), 6);
    }

    #[test]
    fn h3_counts() {
        let h = build(3).unwrap();
        assert_eq!(h.len(), 364);
        assert_eq!(h.point_count(), 364);
        assert!(h.points().all(|p| h.degree(p) == 4));
        let r = verify_flat_full(&h);
        assert!(r.flat && r.full);
        assert_eq!(r.order, Some((3, 3)));
        assert_eq!(span_dim(&h), 6);
    }

    #[test]
    fn point_set_is_the_quadric() {
        let h = build(2).unwrap();
        let s = h.space();
        let quadric: Vec<u32> = s
            .points()
            .filter(|p| crate::quadric::on_quadric(s, p).unwrap())
            .map(|p| s.point_rank(p.vector()))
            .collect();
        assert_eq!(h.points().collect::<Vec<_>>(), quadric);
    }

    #[test]
    fn some_isotropic_line_is_rejected() {
        for q in [2, 3] {
            let s = Space::new(6, q).unwrap();
            let (mut acc, mut rej) = (0, 0);
            for l in isotropic_lines(&s).unwrap() {
                if hexagon_line_predicate(&s, &l).unwrap() {
                    acc += 1;
                } else {
                    rej += 1;
                }
            }
            assert_eq!(acc as u64, hexagon_size(q as u64));
            assert!(rej > 0);
        }
    }

    #[test]
    fn predicate_rejects_non_isotropic() {
        let s = Space::new(6, 2).unwrap();
        let l = s
            .line(s.subspace(&[&[0, 0, 0, 1, 0, 0, 0], &[1, 0, 0, 0, 0, 0, 0]]).unwrap())
            .unwrap();
        assert_eq!(hexagon_line_predicate(&s, &l), Err(Error::NotIsotropic));
    }

    #[test]
    fn two_disjoint_lines_fail_order() {
        let s = Space::new(6, 2).unwrap();
        let a = s.subspace(&[&[1, 0, 0, 0, 0, 0, 0], &[0, 1, 0, 0, 0, 0, 0]]).unwrap();
        let b = s.subspace(&[&[0, 0, 1, 0, 0, 0, 0], &[0, 0, 0, 1, 0, 0, 0]]).unwrap();
        let ls = LineSet::new(s, vec![a.clone(), b]).unwrap();
        let r = verify_flat_full(&ls);
        assert!(r.flat);
        assert!(!r.order_is_qq);
        assert_eq!(r.order, Some((2, 0)));
        let single = LineSet::new(ls.space().clone(), vec![a]).unwrap();
        assert_eq!(span_dim(&single), 1);
    }

    #[test]
    fn census_q2() {
        let h = build(2).unwrap();
        let c = section_census(&h).unwrap();
        assert_eq!(c.four_spaces, 2667);
        assert_eq!(c.types.len(), 4);
        assert_eq!(c.types.values().map(|t| t.four_spaces).sum::<u64>(), 2667);
        assert!(c.all_within_bounds, "{c:#?}");
        assert_eq!(c.types[&SectionType::ConeOverElliptic].vertex_lines_ok, Some(true));
        assert!(c.max_lines <= 12);
    }

    #[test]
    fn unsupported_q() {
        assert!(build(6).is_err());
    }
}
