//! Projective space PG(n, q).
//!
//! Vectors are fixed arrays of element codes; only the first `n + 1` entries
//! are meaningful and the rest stay zero. A subspace is the reduced row
//! echelon basis of its vector subspace, which is its unique canonical form.
//! Canonical order everywhere is lexicographic on those matrices read
//! row-major by element code.

use arrayvec::ArrayVec;
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::Field;

/// Largest supported ambient projective dimension.
pub const MAX_N: usize = 10;
/// Coordinates per vector (`MAX_N + 1`).
pub const MAX_COORDS: usize = MAX_N + 1;

pub type Vector = [u8; MAX_COORDS];
pub type Rows = ArrayVec<Vector, MAX_COORDS>;

pub const ZERO_VECTOR: Vector = [0; MAX_COORDS];

/// Number of (k-1)-dimensional subspaces of PG(n_dim-1, q), i.e. the
/// Gaussian binomial coefficient `[n_dim choose k]_q`. Zero when `k > n_dim`.
pub fn gaussian_binomial(n_dim: u32, k: u32, q: u32) -> BigUint {
    if k > n_dim {
        return BigUint::from(0u32);
    }
    let q = BigUint::from(q);
    let one = BigUint::from(1u32);
    let mut num = BigUint::from(1u32);
    let mut den = BigUint::from(1u32);
    for i in 0..k {
        num *= q.pow(n_dim - i) - &one;
        den *= q.pow(i + 1) - &one;
    }
    num / den
}

/// [`gaussian_binomial`] as a `u64`, `None` on overflow.
pub fn gaussian_binomial_u64(n_dim: u32, k: u32, q: u32) -> Option<u64> {
    u64::try_from(gaussian_binomial(n_dim, k, q)).ok()
}

/// A point of PG(n, q), normalized so the leftmost nonzero coordinate is 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjPoint {
    n: u8,
    q: u8,
    coords: Vector,
}

impl ProjPoint {
    pub fn coords(&self) -> &[u8] {
        &self.coords[..=self.n as usize]
    }

    pub fn vector(&self) -> &Vector {
        &self.coords
    }
}

/// A projective subspace given by its reduced row echelon basis.
///
/// `projdim = rows - 1`; zero rows encode the empty subspace.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace {
    n: u8,
    q: u8,
    rows: Rows,
}

impl Subspace {
    pub fn projdim(&self) -> isize {
        self.rows.len() as isize - 1
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vector] {
        &self.rows
    }

    pub fn ambient_n(&self) -> usize {
        self.n as usize
    }

    pub fn q(&self) -> u8 {
        self.q
    }

    /// Basis rows trimmed to `n + 1` coordinates.
    pub fn basis_codes(&self) -> Vec<Vec<u8>> {
        self.rows
            .iter()
            .map(|r| r[..=self.n as usize].to_vec())
            .collect()
    }

    /// Pivot column of each row.
    pub fn pivots(&self) -> ArrayVec<usize, MAX_COORDS> {
        self.rows.iter().map(|r| leading(r).unwrap_or(0)).collect()
    }
}

/// A line with its canonically scaled Plücker vector `(p_ij)_{i<j}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProjLine {
    sub: Subspace,
    plucker: Vec<u8>,
}

impl ProjLine {
    pub fn subspace(&self) -> &Subspace {
        &self.sub
    }

    pub fn plucker(&self) -> &[u8] {
        &self.plucker
    }

    pub fn into_subspace(self) -> Subspace {
        self.sub
    }
}

/// Index of `(i, j)`, `i < j`, in the packed Plücker vector of PG(n, q).
pub fn plucker_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j <= n);
    // Pairs (a, b) with a < i come first: sum_{a<i} (n - a).
    i * n - i * i.saturating_sub(1) / 2 + (j - i - 1)
}

#[inline]
pub(crate) fn leading(v: &Vector) -> Option<usize> {
    v.iter().position(|&c| c != 0)
}

/// Ambient projective space PG(n, q) with its field tables.
#[derive(Debug, Clone)]
pub struct Space {
    n: usize,
    field: Field,
    // powers[k] = q^k
    powers: [u64; MAX_COORDS + 1],
    num_points: u64,
    rank_bits: u32,
}

impl PartialEq for Space {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.field == other.field
    }
}

impl Eq for Space {}

/// Serializable description of an ambient space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ambient {
    pub n: usize,
    pub q: u8,
}

impl Space {
    pub fn new(n: usize, q: u32) -> Result<Self> {
        if n > MAX_N {
            return Err(Error::UnsupportedDimension(n));
        }
        let field = Field::new(q)?;
        Ok(Self::with_field(n, field))
    }

    pub(crate) fn with_field(n: usize, field: Field) -> Self {
        let q = field.q() as u64;
        let mut powers = [1u64; MAX_COORDS + 1];
        for k in 1..=MAX_COORDS {
            powers[k] = powers[k - 1].saturating_mul(q);
        }
        let num_points = (powers[n + 1] - 1) / (q - 1);
        let rank_bits = 64 - num_points.leading_zeros();
        Space {
            n,
            field,
            powers,
            num_points,
            rank_bits,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u8 {
        self.field.q()
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn ambient(&self) -> Ambient {
        Ambient {
            n: self.n,
            q: self.q(),
        }
    }

    pub fn num_points(&self) -> u64 {
        self.num_points
    }

    fn check(&self, s: &Subspace) -> Result<()> {
        if s.n as usize != self.n || s.q != self.q() {
            return Err(Error::AmbientMismatch {
                left_n: self.n,
                left_q: self.q(),
                right_n: s.n as usize,
                right_q: s.q,
            });
        }
        Ok(())
    }

    fn check_pair(&self, a: &Subspace, b: &Subspace) -> Result<()> {
        self.check(a)?;
        if a.n != b.n || a.q != b.q {
            return Err(Error::AmbientMismatch {
                left_n: a.n as usize,
                left_q: a.q,
                right_n: b.n as usize,
                right_q: b.q,
            });
        }
        Ok(())
    }

    fn vector_from(&self, coords: &[u8]) -> Result<Vector> {
        if coords.len() != self.n + 1 {
            return Err(Error::InvalidCoordinates(format!(
                "expected {} coordinates, got {}",
                self.n + 1,
                coords.len()
            )));
        }
        if let Some(&bad) = coords.iter().find(|&&c| c >= self.q()) {
            return Err(Error::InvalidCoordinates(format!(
                "code {bad} is not an element of GF({})",
                self.q()
            )));
        }
        let mut v = ZERO_VECTOR;
        v[..coords.len()].copy_from_slice(coords);
        Ok(v)
    }

    // ---- vector arithmetic -------------------------------------------------

    /// Scale so the leading coordinate is 1. Returns false for the zero vector.
    pub fn normalize(&self, v: &mut Vector) -> bool {
        let Some(lead) = leading(v) else {
            return false;
        };
        let s = self.field.inv_code(v[lead]);
        if s != 1 {
            for c in v[lead..=self.n].iter_mut() {
                *c = self.field.mul_code(*c, s);
            }
        }
        true
    }

    /// `target -= factor * row`.
    #[inline]
    fn axpy(&self, target: &mut Vector, factor: u8, row: &Vector, from: usize) {
        let f = &self.field;
        for j in from..=self.n {
            if row[j] != 0 {
                target[j] = f.sub_code(target[j], f.mul_code(factor, row[j]));
            }
        }
    }

    /// Gauss-Jordan elimination in place. Returns the rank; `rows[..rank]`
    /// is then the reduced row echelon form.
    pub fn rref_in_place(&self, rows: &mut [Vector]) -> usize {
        let f = &self.field;
        let mut r = 0;
        for c in 0..=self.n {
            if r == rows.len() {
                break;
            }
            let Some(p) = (r..rows.len()).find(|&i| rows[i][c] != 0) else {
                continue;
            };
            rows.swap(r, p);
            let s = f.inv_code(rows[r][c]);
            if s != 1 {
                for x in rows[r][c..=self.n].iter_mut() {
                    *x = f.mul_code(*x, s);
                }
            }
            let pivot_row = rows[r];
            for (i, row) in rows.iter_mut().enumerate() {
                if i != r && row[c] != 0 {
                    let factor = row[c];
                    self.axpy(row, factor, &pivot_row, c);
                }
            }
            r += 1;
        }
        r
    }

    /// Reduce `v` modulo the row space of `s`; zero iff `v` lies in `s`.
    pub fn reduce_vector(&self, s: &Subspace, v: &mut Vector) {
        for row in s.rows.iter() {
            let c = leading(row).expect("canonical rows are nonzero");
            if v[c] != 0 {
                let factor = v[c];
                self.axpy(v, factor, row, c);
            }
        }
    }

    pub fn contains_vector(&self, s: &Subspace, v: &Vector) -> bool {
        let mut w = *v;
        self.reduce_vector(s, &mut w);
        w.iter().all(|&c| c == 0)
    }

    pub fn contains_point(&self, s: &Subspace, p: &ProjPoint) -> bool {
        self.contains_vector(s, &p.coords)
    }

    /// Whether `inner` is a subspace of `outer`.
    pub fn is_subspace_of(&self, inner: &Subspace, outer: &Subspace) -> Result<bool> {
        self.check_pair(inner, outer)?;
        Ok(inner.rows.len() <= outer.rows.len()
            && inner.rows.iter().all(|r| self.contains_vector(outer, r)))
    }

    // ---- constructors ------------------------------------------------------

    pub fn point(&self, coords: &[u8]) -> Result<ProjPoint> {
        let mut v = self.vector_from(coords)?;
        if !self.normalize(&mut v) {
            return Err(Error::InvalidCoordinates("the zero vector is not a point".into()));
        }
        Ok(ProjPoint {
            n: self.n as u8,
            q: self.q(),
            coords: v,
        })
    }

    /// Unit point `e_i`.
    pub fn unit_point(&self, i: usize) -> ProjPoint {
        let mut v = ZERO_VECTOR;
        v[i] = 1;
        ProjPoint {
            n: self.n as u8,
            q: self.q(),
            coords: v,
        }
    }

    pub fn point_subspace(&self, p: &ProjPoint) -> Subspace {
        let mut rows = Rows::new();
        rows.push(p.coords);
        Subspace {
            n: self.n as u8,
            q: self.q(),
            rows,
        }
    }

    /// Canonical subspace spanned by arbitrary vectors.
    pub fn subspace_from_vectors(&self, vectors: &[Vector]) -> Subspace {
        let mut buf: Vec<Vector> = vectors.to_vec();
        let rank = self.rref_in_place(&mut buf);
        Subspace {
            n: self.n as u8,
            q: self.q(),
            rows: buf[..rank].iter().copied().collect(),
        }
    }

    /// Canonical subspace spanned by rows of raw coordinates.
    pub fn subspace(&self, rows: &[&[u8]]) -> Result<Subspace> {
        let vs = rows
            .iter()
            .map(|r| self.vector_from(r))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.subspace_from_vectors(&vs))
    }

    pub fn empty(&self) -> Subspace {
        Subspace {
            n: self.n as u8,
            q: self.q(),
            rows: Rows::new(),
        }
    }

    pub fn whole(&self) -> Subspace {
        let rows = (0..=self.n)
            .map(|i| {
                let mut v = ZERO_VECTOR;
                v[i] = 1;
                v
            })
            .collect();
        Subspace {
            n: self.n as u8,
            q: self.q(),
            rows,
        }
    }

    /// Build a subspace from rows already in canonical form.
    pub(crate) fn subspace_unchecked(&self, rows: &[Vector]) -> Subspace {
        Subspace {
            n: self.n as u8,
            q: self.q(),
            rows: rows.iter().copied().collect(),
        }
    }

    // ---- span and meet -----------------------------------------------------

    pub fn span(&self, a: &Subspace, b: &Subspace) -> Result<Subspace> {
        self.check_pair(a, b)?;
        let mut buf: ArrayVec<Vector, { 2 * MAX_COORDS }> = ArrayVec::new();
        buf.extend(a.rows.iter().copied());
        buf.extend(b.rows.iter().copied());
        let rank = self.rref_in_place(&mut buf);
        Ok(self.subspace_unchecked(&buf[..rank]))
    }

    pub fn span_all<'a>(&self, parts: impl IntoIterator<Item = &'a Subspace>) -> Result<Subspace> {
        let mut acc = self.empty();
        for p in parts {
            acc = self.span(&acc, p)?;
        }
        Ok(acc)
    }

    /// Basis of `{y : <row, y> = 0 for every row}` under the standard dot
    /// product, in canonical form.
    pub fn annihilator(&self, s: &Subspace) -> Subspace {
        let pivots = s.pivots();
        let mut out: ArrayVec<Vector, MAX_COORDS> = ArrayVec::new();
        for free in (0..=self.n).filter(|c| !pivots.contains(c)) {
            let mut v = ZERO_VECTOR;
            v[free] = 1;
            for (row, &pc) in s.rows.iter().zip(&pivots) {
                v[pc] = self.field.neg_code(row[free]);
            }
            out.push(v);
        }
        let rank = self.rref_in_place(&mut out);
        self.subspace_unchecked(&out[..rank])
    }

    pub fn meet(&self, a: &Subspace, b: &Subspace) -> Result<Subspace> {
        self.check_pair(a, b)?;
        let dual = self.span(&self.annihilator(a), &self.annihilator(b))?;
        Ok(self.annihilator(&dual))
    }

    // ---- point ranks -------------------------------------------------------

    /// Position of a normalized vector in the canonical point order.
    pub fn point_rank(&self, v: &Vector) -> u32 {
        let lead = leading(v).expect("point vectors are nonzero");
        let q = self.q() as u64;
        let mut rank = (self.powers[self.n - lead] - 1) / (q - 1);
        let mut tail = 0u64;
        for &c in &v[lead + 1..=self.n] {
            tail = tail * q + c as u64;
        }
        rank += tail;
        rank as u32
    }

    /// Inverse of [`Space::point_rank`].
    pub fn point_from_rank(&self, rank: u32) -> Vector {
        let q = self.q() as u64;
        let rank = rank as u64;
        let mut v = ZERO_VECTOR;
        for lead in (0..=self.n).rev() {
            let start = (self.powers[self.n - lead] - 1) / (q - 1);
            let size = self.powers[self.n - lead];
            if rank < start + size {
                v[lead] = 1;
                let mut tail = rank - start;
                for j in (lead + 1..=self.n).rev() {
                    v[j] = (tail % q) as u8;
                    tail /= q;
                }
                return v;
            }
        }
        unreachable!("rank {rank} out of range");
    }

    pub fn point_by_rank(&self, rank: u32) -> ProjPoint {
        ProjPoint {
            n: self.n as u8,
            q: self.q(),
            coords: self.point_from_rank(rank),
        }
    }

    /// All points of PG(n, q) in canonical order.
    pub fn points(&self) -> impl Iterator<Item = ProjPoint> + '_ {
        (0..self.num_points as u32).map(move |r| self.point_by_rank(r))
    }

    /// Normalized vectors of all points of `s` (unordered).
    pub fn points_of(&self, s: &Subspace) -> Vec<Vector> {
        let k = s.rows.len();
        if k == 0 {
            return Vec::new();
        }
        let q = self.q();
        let mut out = Vec::new();
        // Coefficient vectors whose leading entry is 1 give each point once,
        // already normalized because the basis is in echelon form.
        for lead in 0..k {
            let free = k - lead - 1;
            let mut coef = vec![0u8; free];
            loop {
                let mut v = s.rows[lead];
                for (t, &c) in coef.iter().enumerate() {
                    if c != 0 {
                        let row = &s.rows[lead + 1 + t];
                        for j in 0..=self.n {
                            if row[j] != 0 {
                                v[j] = self.field.add_code(v[j], self.field.mul_code(c, row[j]));
                            }
                        }
                    }
                }
                out.push(v);
                // Odometer.
                let mut idx = 0;
                loop {
                    if idx == free {
                        break;
                    }
                    coef[idx] += 1;
                    if coef[idx] < q {
                        break;
                    }
                    coef[idx] = 0;
                    idx += 1;
                }
                if idx == free {
                    break;
                }
            }
        }
        out
    }

    /// Sorted ranks of the points of `s`.
    pub fn point_ranks_of(&self, s: &Subspace) -> Vec<u32> {
        let mut r: Vec<u32> = self.points_of(s).iter().map(|v| self.point_rank(v)).collect();
        r.sort_unstable();
        r
    }

    // ---- subspace keys -----------------------------------------------------

    /// Bits per packed point rank in a [`Space::key`].
    pub fn rank_bits(&self) -> u32 {
        self.rank_bits
    }

    /// Whether subspaces with `rows` basis rows fit in a `u128` key.
    pub fn key_fits(&self, rows: usize) -> bool {
        rows as u32 * self.rank_bits <= 128
    }

    /// Pack the canonical rows as point ranks, first row most significant.
    /// For a fixed dimension the numeric order of keys is the canonical
    /// order of subspaces.
    pub fn key_of_rows(&self, rows: &[Vector]) -> u128 {
        debug_assert!(self.key_fits(rows.len()));
        rows.iter()
            .fold(0u128, |acc, r| (acc << self.rank_bits) | self.point_rank(r) as u128)
    }

    pub fn key(&self, s: &Subspace) -> u128 {
        self.key_of_rows(&s.rows)
    }

    pub fn subspace_from_key(&self, key: u128, rows: usize) -> Subspace {
        let mask = (1u128 << self.rank_bits) - 1;
        let mut out: Rows = (0..rows)
            .map(|i| {
                let shift = (rows - 1 - i) as u32 * self.rank_bits;
                self.point_from_rank(((key >> shift) & mask) as u32)
            })
            .collect();
        out.truncate(rows);
        self.subspace_unchecked(&out)
    }

    // ---- enumeration -------------------------------------------------------

    /// All d-dimensional subspaces in canonical order.
    pub fn enumerate_subspaces(&self, d: isize) -> Result<SubspaceIter<'_>> {
        if d < 0 || d > self.n as isize {
            return Err(Error::DimensionOutOfRange {
                dim: d,
                reason: format!("need 0 <= d <= {}", self.n),
            });
        }
        Ok(SubspaceIter::new(self, d as usize + 1))
    }

    /// All d-dimensional subspaces containing `f`, each once.
    pub fn subspaces_through(&self, f: &Subspace, d: isize) -> Result<SubspacesThrough<'_>> {
        self.check(f)?;
        if d <= f.projdim() || d > self.n as isize {
            return Err(Error::DimensionOutOfRange {
                dim: d,
                reason: format!("need {} < d <= {}", f.projdim(), self.n),
            });
        }
        let quotient = Quotient::new(self, f);
        let rows = d as usize + 1 - f.rank();
        let inner = Space::with_field(quotient.free.len() - 1, self.field.clone());
        let items: Vec<Subspace> = SubspaceIter::new(&inner, rows).collect();
        Ok(SubspacesThrough {
            space: self,
            quotient,
            items: items.into_iter(),
        })
    }

    // ---- lines -------------------------------------------------------------

    /// Plücker vector of the line spanned by `x` and `y`, canonically scaled.
    pub fn plucker_of_vectors(&self, x: &Vector, y: &Vector) -> Result<Vec<u8>> {
        let f = &self.field;
        let n = self.n;
        let mut p = Vec::with_capacity((n + 1) * n / 2);
        for i in 0..=n {
            for j in i + 1..=n {
                p.push(f.sub_code(f.mul_code(x[i], y[j]), f.mul_code(x[j], y[i])));
            }
        }
        let Some(first) = p.iter().copied().find(|&c| c != 0) else {
            return Err(Error::DegenerateLine);
        };
        let s = f.inv_code(first);
        for c in p.iter_mut() {
            *c = f.mul_code(*c, s);
        }
        Ok(p)
    }

    pub fn line(&self, s: Subspace) -> Result<ProjLine> {
        self.check(&s)?;
        if s.rank() != 2 {
            return Err(Error::DimensionOutOfRange {
                dim: s.projdim(),
                reason: "a line has projective dimension 1".into(),
            });
        }
        let plucker = self.plucker_of_vectors(&s.rows[0], &s.rows[1])?;
        Ok(ProjLine { sub: s, plucker })
    }

    pub fn line_through(&self, a: &ProjPoint, b: &ProjPoint) -> Result<ProjLine> {
        let s = self.subspace_from_vectors(&[a.coords, b.coords]);
        if s.rank() != 2 {
            return Err(Error::DegenerateLine);
        }
        self.line(s)
    }

    /// Signed Plücker coordinate `p(i, j)`; `p(j, i) = -p(i, j)` and
    /// `p(i, i) = 0`.
    pub fn p(&self, l: &ProjLine, i: usize, j: usize) -> u8 {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => 0,
            std::cmp::Ordering::Less => l.plucker[plucker_index(self.n, i, j)],
            std::cmp::Ordering::Greater => {
                self.field.neg_code(l.plucker[plucker_index(self.n, j, i)])
            }
        }
    }
}

/// Coordinates of the quotient by a fixed subspace `f`: the non-pivot
/// columns of `f` span a complement.
#[derive(Debug, Clone)]
pub(crate) struct Quotient {
    pub(crate) base: Rows,
    pub(crate) free: ArrayVec<usize, MAX_COORDS>,
}

impl Quotient {
    pub(crate) fn new(space: &Space, f: &Subspace) -> Self {
        let pivots = f.pivots();
        Quotient {
            base: f.rows.clone(),
            free: (0..=space.n).filter(|c| !pivots.contains(c)).collect(),
        }
    }

    /// Canonical rows of `<f, lift(w)>` written into `buf`; returns the rank.
    pub(crate) fn lift_into(&self, space: &Space, w: &[Vector], buf: &mut Rows) -> usize {
        buf.clear();
        buf.extend(self.base.iter().copied());
        for row in w {
            let mut v = ZERO_VECTOR;
            for (t, &c) in self.free.iter().enumerate() {
                v[c] = row[t];
            }
            buf.push(v);
        }
        space.rref_in_place(buf)
    }
}

/// Iterator over d-subspaces containing a fixed subspace.
pub struct SubspacesThrough<'a> {
    space: &'a Space,
    quotient: Quotient,
    items: std::vec::IntoIter<Subspace>,
}

impl Iterator for SubspacesThrough<'_> {
    type Item = Subspace;

    fn next(&mut self) -> Option<Subspace> {
        let w = self.items.next()?;
        let mut buf = Rows::new();
        let rank = self.quotient.lift_into(self.space, &w.rows, &mut buf);
        Some(self.space.subspace_unchecked(&buf[..rank]))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        self.items.size_hint()
    }
}

/// Lexicographic enumeration of k-row reduced echelon matrices.
///
/// Row `i` has a pivot in `allowed[i]` (a column bitmask) and must leave at
/// least `k - i - 1` allowed zero columns to its right for the rows below.
pub struct SubspaceIter<'a> {
    space: &'a Space,
    k: usize,
    rows: Rows,
    pivots: [usize; MAX_COORDS],
    allowed: [u16; MAX_COORDS + 1],
    started: bool,
    done: bool,
}

impl<'a> SubspaceIter<'a> {
    pub(crate) fn new(space: &'a Space, k: usize) -> Self {
        let mut allowed = [0u16; MAX_COORDS + 1];
        allowed[0] = ((1u32 << (space.n + 1)) - 1) as u16;
        SubspaceIter {
            space,
            k,
            rows: Rows::new(),
            pivots: [0; MAX_COORDS],
            allowed,
            started: false,
            done: k > space.n + 1,
        }
    }

    fn remaining_after(&self, i: usize, row: &Vector, pivot: usize) -> u32 {
        let mask = self.allowed[i] as u32 & !((1u32 << (pivot + 1)) - 1);
        (0..=self.space.n)
            .filter(|&j| mask & (1 << j) != 0 && row[j] == 0)
            .count() as u32
    }

    fn next_allowed_mask(&self, i: usize, row: &Vector, pivot: usize) -> u16 {
        let mask = self.allowed[i] as u32 & !((1u32 << (pivot + 1)) - 1);
        let mut out = 0u32;
        for (j, &x) in row.iter().enumerate().take(self.space.n + 1) {
            if mask & (1 << j) != 0 && x == 0 {
                out |= 1 << j;
            }
        }
        out as u16
    }

    /// Smallest valid row `i` given `allowed[i]`.
    fn first_row(&mut self, i: usize) -> bool {
        let need = (self.k - i - 1) as u32;
        let cols: ArrayVec<usize, MAX_COORDS> = (0..=self.space.n)
            .filter(|&j| self.allowed[i] & (1 << j) != 0)
            .collect();
        if (cols.len() as u32) < need + 1 {
            return false;
        }
        // Largest pivot that still leaves `need` allowed columns to its right.
        let pivot = cols[cols.len() - 1 - need as usize];
        let mut row = ZERO_VECTOR;
        row[pivot] = 1;
        self.set_row(i, row, pivot);
        true
    }

    fn set_row(&mut self, i: usize, row: Vector, pivot: usize) {
        if self.rows.len() > i {
            self.rows[i] = row;
            self.rows.truncate(i + 1);
        } else {
            self.rows.push(row);
        }
        self.pivots[i] = pivot;
        self.allowed[i + 1] = self.next_allowed_mask(i, &row, pivot);
    }

    /// Advance row `i` to the next valid value in lexicographic order.
    fn advance_row(&mut self, i: usize) -> bool {
        let q = self.space.q();
        let n = self.space.n;
        let need = (self.k - i - 1) as u32;
        let mut row = self.rows[i];
        let mut pivot = self.pivots[i];
        loop {
            // Increment the entries right of the pivot as a base-q number.
            let mut j = n;
            let mut carried_out = true;
            while j > pivot {
                row[j] += 1;
                if row[j] < q {
                    carried_out = false;
                    break;
                }
                row[j] = 0;
                j -= 1;
            }
            if carried_out {
                // Next pivot to the left (a lexicographically larger row).
                let next = (0..pivot).rev().find(|&c| self.allowed[i] & (1 << c) != 0);
                match next {
                    Some(c) => {
                        row = ZERO_VECTOR;
                        row[c] = 1;
                        pivot = c;
                    }
                    None => return false,
                }
            }
            if self.remaining_after(i, &row, pivot) >= need {
                self.set_row(i, row, pivot);
                return true;
            }
        }
    }

    fn fill_from(&mut self, start: usize) -> bool {
        (start..self.k).all(|i| self.first_row(i))
    }
}

impl Iterator for SubspaceIter<'_> {
    type Item = Subspace;

    fn next(&mut self) -> Option<Subspace> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            if !self.fill_from(0) {
                self.done = true;
                return None;
            }
        } else {
            let mut i = self.k;
            loop {
                if i == 0 {
                    self.done = true;
                    return None;
                }
                i -= 1;
                if self.advance_row(i) {
                    let ok = self.fill_from(i + 1);
                    debug_assert!(ok, "a valid row always admits a completion");
                    break;
                }
            }
        }
        Some(self.space.subspace_unchecked(&self.rows))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn unit(space: &Space, i: usize) -> Subspace {
        space.point_subspace(&space.unit_point(i))
    }

    #[test]
    fn gaussian_binomial_values() {
        assert_eq!(gaussian_binomial_u64(7, 1, 2), Some(127));
        assert_eq!(gaussian_binomial_u64(7, 2, 2), Some(2667));
        assert_eq!(gaussian_binomial_u64(7, 3, 2), Some(11811));
        assert_eq!(gaussian_binomial_u64(3, 5, 2), Some(0));
        assert_eq!(gaussian_binomial_u64(5, 0, 7), Some(1));
    }

    #[test]
    fn gaussian_binomial_matches_independent_count() {
        // Count ordered bases of k independent vectors, divided by |GL(k, q)|.
        fn ordered(n: u64, k: u64, q: u64) -> u128 {
            (0..k).map(|i| (q.pow(n as u32) - q.pow(i as u32)) as u128).product()
        }
        let expected = ordered(7, 3, 3) / ordered(3, 3, 3);
        assert_eq!(
            gaussian_binomial(7, 3, 3),
            BigUint::from(expected)
        );
        for (n, k, q) in [(7u64, 2u64, 2u64), (6, 3, 4), (5, 2, 5), (7, 3, 16)] {
            assert_eq!(
                gaussian_binomial(n as u32, k as u32, q as u32),
                BigUint::from(ordered(n, k, q) / ordered(k, k, q))
            );
        }
    }

    #[test]
    fn frozen_gaussian_binomial_7_3_q3() {
        assert_eq!(gaussian_binomial_u64(7, 3, 3), Some(925_771));
    }

    #[test]
    fn point_rank_round_trip_and_order() {
        for (n, q) in [(3, 2), (4, 3), (2, 4), (6, 2)] {
            let s = Space::new(n, q).unwrap();
            let mut prev: Option<Vector> = None;
            for r in 0..s.num_points() as u32 {
                let v = s.point_from_rank(r);
                assert_eq!(s.point_rank(&v), r);
                if let Some(p) = prev {
                    assert!(p < v, "ranks follow lexicographic order");
                }
                prev = Some(v);
            }
        }
    }

    #[test]
    fn span_and_meet_examples() {
        let s = Space::new(6, 2).unwrap();
        let l = s.span(&unit(&s, 0), &unit(&s, 1)).unwrap();
        assert_eq!(l.projdim(), 1);
        assert_eq!(s.span(&l, &l).unwrap(), l);
        assert_eq!(s.meet(&l, &l).unwrap(), l);

        let m = s.span(&unit(&s, 1), &unit(&s, 2)).unwrap();
        let p = s.meet(&l, &m).unwrap();
        assert_eq!(p, unit(&s, 1));

        let other = Space::new(6, 3).unwrap();
        assert!(matches!(
            s.span(&l, &unit(&other, 0)),
            Err(Error::AmbientMismatch { .. })
        ));
    }

    #[test]
    fn hyperplane_line_meet_exhaustive_pg32() {
        let s = Space::new(3, 2).unwrap();
        let planes: Vec<_> = s.enumerate_subspaces(2).unwrap().collect();
        let lines: Vec<_> = s.enumerate_subspaces(1).unwrap().collect();
        for h in &planes {
            for l in &lines {
                let m = s.meet(h, l).unwrap();
                let inside = s.point_ranks_of(l).iter().all(|&r| {
                    s.contains_vector(h, &s.point_from_rank(r))
                });
                // Brute force: the common points.
                let common: Vec<u32> = s
                    .point_ranks_of(l)
                    .into_iter()
                    .filter(|&r| s.contains_vector(h, &s.point_from_rank(r)))
                    .collect();
                if inside {
                    assert_eq!(m.projdim(), 1);
                } else {
                    assert_eq!(common.len(), 1);
                    assert_eq!(m.projdim(), 0);
                    assert_eq!(s.point_rank(&m.rows()[0]), common[0]);
                }
            }
        }
    }

    #[test]
    fn enumeration_counts_pg62() {
        let s = Space::new(6, 2).unwrap();
        assert_eq!(s.enumerate_subspaces(0).unwrap().count(), 127);
        assert_eq!(s.enumerate_subspaces(1).unwrap().count(), 2667);
        assert_eq!(s.enumerate_subspaces(5).unwrap().count(), 127);
        assert_eq!(s.enumerate_subspaces(6).unwrap().count(), 1);
        assert!(s.enumerate_subspaces(7).is_err());
        assert!(s.enumerate_subspaces(-1).is_err());
    }

    #[test]
    fn enumeration_matches_gaussian_binomial_exhaustive() {
        for n in 1..=6usize {
            for q in [2u32, 3, 4] {
                let s = Space::new(n, q).unwrap();
                for d in 0..=n as isize {
                    let expected =
                        gaussian_binomial_u64(n as u32 + 1, d as u32 + 1, q).unwrap();
                    if expected > 50_000 {
                        // Large cases: count only.
                        assert_eq!(s.enumerate_subspaces(d).unwrap().count() as u64, expected);
                        continue;
                    }
                    let mut seen = HashSet::new();
                    let mut prev: Option<Subspace> = None;
                    for sub in s.enumerate_subspaces(d).unwrap() {
                        if let Some(p) = &prev {
                            assert!(p < &sub, "strictly increasing canonical order");
                        }
                        // Each yielded basis is already canonical.
                        assert_eq!(s.subspace_from_vectors(sub.rows()), sub);
                        seen.insert(s.key(&sub));
                        prev = Some(sub);
                    }
                    assert_eq!(seen.len() as u64, expected, "PG({n},{q}) d={d}");
                }
            }
        }
    }

    #[test]
    fn subspaces_through_counts() {
        let s = Space::new(6, 2).unwrap();
        let l = s.span(&unit(&s, 0), &unit(&s, 3)).unwrap();
        let planes: Vec<_> = s.subspaces_through(&l, 2).unwrap().collect();
        assert_eq!(planes.len(), 31);
        let keys: HashSet<_> = planes.iter().map(|p| s.key(p)).collect();
        assert_eq!(keys.len(), 31);
        for p in &planes {
            assert!(s.is_subspace_of(&l, p).unwrap());
        }
        let plane = &planes[5];
        assert_eq!(s.subspaces_through(plane, 3).unwrap().count(), 15);
        assert!(s.subspaces_through(plane, 2).is_err());
    }

    #[test]
    fn plucker_examples() {
        let s = Space::new(6, 3).unwrap();
        let l = s.line(s.span(&unit(&s, 0), &unit(&s, 1)).unwrap()).unwrap();
        assert_eq!(l.plucker()[plucker_index(6, 0, 1)], 1);
        assert_eq!(l.plucker().iter().filter(|&&c| c != 0).count(), 1);

        let l = s.line(s.span(&unit(&s, 2), &unit(&s, 5)).unwrap()).unwrap();
        assert_eq!(s.p(&l, 2, 5), 1);
        assert_eq!(s.p(&l, 5, 2), 2);
        assert_eq!(l.plucker().iter().filter(|&&c| c != 0).count(), 1);

        assert_eq!(
            s.plucker_of_vectors(&unit(&s, 1).rows()[0], &unit(&s, 1).rows()[0]),
            Err(Error::DegenerateLine)
        );
    }

    #[test]
    fn plucker_index_is_dense() {
        for n in 1..=MAX_N {
            let mut k = 0;
            for i in 0..=n {
                for j in i + 1..=n {
                    assert_eq!(plucker_index(n, i, j), k);
                    k += 1;
                }
            }
        }
    }

    #[test]
    fn points_of_counts() {
        let s = Space::new(4, 3).unwrap();
        for d in 0..=4 {
            let sub = s.enumerate_subspaces(d).unwrap().last().unwrap();
            let pts = s.point_ranks_of(&sub);
            let expected = (3u32.pow(d as u32 + 1) - 1) / 2;
            assert_eq!(pts.len() as u32, expected);
            let mut dedup = pts.clone();
            dedup.dedup();
            assert_eq!(dedup.len(), pts.len());
        }
    }

    #[test]
    fn key_round_trip() {
        let s = Space::new(6, 3).unwrap();
        for sub in s.enumerate_subspaces(2).unwrap().step_by(97) {
            assert_eq!(s.subspace_from_key(s.key(&sub), 3), sub);
        }
    }
}
