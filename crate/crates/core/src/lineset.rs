//! Line sets with point/line incidence indexes.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::pg::{ProjPoint, Space, Subspace};

/// One line of a [`LineSet`]: its canonical basis and its points, both as
/// point ranks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineRecord {
    pub basis: [u32; 2],
    pub points: Vec<u32>,
}

/// A set of lines of PG(n, q), kept in canonical order, with the map from
/// each covered point to the lines through it.
#[derive(Debug, Clone)]
pub struct LineSet {
    space: Space,
    lines: Vec<LineRecord>,
    point_index: BTreeMap<u32, Vec<u32>>,
}

impl PartialEq for LineSet {
    fn eq(&self, other: &Self) -> bool {
        self.space == other.space && self.lines == other.lines
    }
}

impl Eq for LineSet {}

impl LineSet {
    /// Build from lines given as subspaces; duplicates collapse.
    pub fn new(space: Space, lines: impl IntoIterator<Item = Subspace>) -> Result<Self> {
        let mut records = Vec::new();
        for l in lines {
            if l.projdim() != 1 {
                return Err(Error::DimensionOutOfRange {
                    dim: l.projdim(),
                    reason: "line sets hold lines only".into(),
                });
            }
            if l.ambient_n() != space.n() || l.q() != space.q() {
                return Err(Error::AmbientMismatch {
                    left_n: space.n(),
                    left_q: space.q(),
                    right_n: l.ambient_n(),
                    right_q: l.q(),
                });
            }
            records.push(Self::record(&space, &l));
        }
        Ok(Self::from_records(space, records))
    }

    fn record(space: &Space, l: &Subspace) -> LineRecord {
        LineRecord {
            basis: [space.point_rank(&l.rows()[0]), space.point_rank(&l.rows()[1])],
            points: space.point_ranks_of(l),
        }
    }

    fn from_records(space: Space, mut records: Vec<LineRecord>) -> Self {
        records.sort_by_key(|r| r.basis);
        records.dedup_by_key(|r| r.basis);
        let mut point_index: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for (i, r) in records.iter().enumerate() {
            for &p in &r.points {
                point_index.entry(p).or_default().push(i as u32);
            }
        }
        LineSet {
            space,
            lines: records,
            point_index,
        }
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn lines(&self) -> &[LineRecord] {
        &self.lines
    }

    pub fn line(&self, i: usize) -> &LineRecord {
        &self.lines[i]
    }

    pub fn line_subspace(&self, i: usize) -> Subspace {
        let r = &self.lines[i];
        self.space.subspace_unchecked(&[
            self.space.point_from_rank(r.basis[0]),
            self.space.point_from_rank(r.basis[1]),
        ])
    }

    pub fn line_subspaces(&self) -> impl Iterator<Item = Subspace> + '_ {
        (0..self.lines.len()).map(move |i| self.line_subspace(i))
    }

    /// Index of a line given as a subspace.
    pub fn index_of(&self, l: &Subspace) -> Option<usize> {
        if l.projdim() != 1 {
            return None;
        }
        let key = [
            self.space.point_rank(&l.rows()[0]),
            self.space.point_rank(&l.rows()[1]),
        ];
        self.lines.binary_search_by_key(&key, |r| r.basis).ok()
    }

    /// Index of the line of the set through two distinct points, if any.
    pub fn line_joining(&self, a: u32, b: u32) -> Option<u32> {
        let la = self.lines_through(a);
        let lb = self.lines_through(b);
        la.iter().copied().find(|l| lb.contains(l))
    }

    /// Ranks of points on at least one line, ascending.
    pub fn points(&self) -> impl Iterator<Item = u32> + '_ {
        self.point_index.keys().copied()
    }

    pub fn point_count(&self) -> usize {
        self.point_index.len()
    }

    pub fn lines_through(&self, point: u32) -> &[u32] {
        self.point_index.get(&point).map_or(&[], |v| v.as_slice())
    }

    pub fn degree(&self, point: u32) -> usize {
        self.lines_through(point).len()
    }

    pub fn point(&self, rank: u32) -> ProjPoint {
        self.space.point_by_rank(rank)
    }

    /// Lines of the set contained in `u`, ascending by index.
    pub fn lines_in(&self, u: &Subspace) -> Result<Vec<u32>> {
        if u.ambient_n() != self.space.n() || u.q() != self.space.q() {
            return Err(Error::AmbientMismatch {
                left_n: self.space.n(),
                left_q: self.space.q(),
                right_n: u.ambient_n(),
                right_q: u.q(),
            });
        }
        if u.rank() < 2 {
            return Ok(Vec::new());
        }
        // Only points of u can carry lines of u.
        let mut out = Vec::new();
        for (i, r) in self.lines.iter().enumerate() {
            if r.basis
                .iter()
                .all(|&p| self.space.contains_vector(u, &self.space.point_from_rank(p)))
            {
                out.push(i as u32);
            }
        }
        Ok(out)
    }

    /// Span of every line of the set.
    pub fn span(&self) -> Subspace {
        let mut rows = Vec::new();
        let mut acc = self.space.empty();
        for r in &self.lines {
            for &p in &r.basis {
                let v = self.space.point_from_rank(p);
                if !self.space.contains_vector(&acc, &v) {
                    rows.push(v);
                    acc = self.space.subspace_from_vectors(&rows);
                }
            }
        }
        acc
    }

    /// A copy without the line at index `i`.
    pub fn without_line(&self, i: usize) -> LineSet {
        let mut records = self.lines.clone();
        records.remove(i);
        Self::from_records(self.space.clone(), records)
    }

    /// A copy restricted to the given line indices.
    pub fn subset(&self, indices: &[u32]) -> LineSet {
        let records = indices.iter().map(|&i| self.lines[i as usize].clone()).collect();
        Self::from_records(self.space.clone(), records)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn incidence_indexes() {
        let s = Space::new(3, 2).unwrap();
        let a = s.subspace(&[&[1, 0, 0, 0], &[0, 1, 0, 0]]).unwrap();
        let b = s.subspace(&[&[1, 0, 0, 0], &[0, 0, 1, 0]]).unwrap();
        let ls = LineSet::new(s.clone(), vec![b.clone(), a.clone(), a.clone()]).unwrap();
        assert_eq!(ls.len(), 2);
        assert_eq!(ls.point_count(), 5);
        let e0 = s.point_rank(&s.unit_point(0).vector().clone());
        assert_eq!(ls.degree(e0), 2);
        assert_eq!(ls.index_of(&a), Some(ls.index_of(&a).unwrap()));
        assert!(ls.line_subspace(0) < ls.line_subspace(1));
        assert_eq!(ls.span().projdim(), 2);
        let whole = s.whole();
        assert_eq!(ls.lines_in(&whole).unwrap().len(), 2);
        assert!(ls.lines_in(&s.point_subspace(&s.unit_point(0))).unwrap().is_empty());
    }

    #[test]
    fn rejects_non_lines() {
        let s = Space::new(3, 2).unwrap();
        let plane = s.enumerate_subspaces(2).unwrap().next().unwrap();
        assert!(LineSet::new(s, vec![plane]).is_err());
    }
}
