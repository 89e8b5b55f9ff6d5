//! The parabolic quadric Q(6, q): x0 x4 + x1 x5 + x2 x6 = x3^2.
//!
//! Sections by 4-spaces are classified through the singular radical of the
//! restricted form. In odd characteristic that is the radical of the polar
//! form. In characteristic 2 the polar form is alternating and forgets x3,
//! so the radical of the polar form is cut down further to its vectors where
//! the quadratic form itself vanishes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pg::{ProjLine, ProjPoint, Space, Subspace, Vector, ZERO_VECTOR};

/// The fixed quadratic form on seven coordinates.
#[derive(Debug, Clone, Copy, Default)]
pub struct QuadricForm;

impl QuadricForm {
    /// `x0 x4 + x1 x5 + x2 x6 - x3^2`.
    pub fn eval(space: &Space, v: &Vector) -> u8 {
        let f = space.field();
        let mut s = f.mul_code(v[0], v[4]);
        s = f.add_code(s, f.mul_code(v[1], v[5]));
        s = f.add_code(s, f.mul_code(v[2], v[6]));
        f.sub_code(s, f.mul_code(v[3], v[3]))
    }

    /// Polar form `b(x, y) = Q(x + y) - Q(x) - Q(y)`.
    pub fn polar(space: &Space, x: &Vector, y: &Vector) -> u8 {
        let f = space.field();
        let m = |a: u8, b: u8| f.mul_code(a, b);
        let mut s = 0;
        for (i, j) in [(0, 4), (1, 5), (2, 6)] {
            s = f.add_code(s, m(x[i], y[j]));
            s = f.add_code(s, m(x[j], y[i]));
        }
        let t = m(x[3], y[3]);
        f.sub_code(s, f.add_code(t, t))
    }
}

fn require_pg6(space: &Space) -> Result<()> {
    if space.n() != 6 {
        return Err(Error::Precondition(format!(
            "the quadric lives in PG(6, q), not PG({}, q)",
            space.n()
        )));
    }
    Ok(())
}

pub fn on_quadric(space: &Space, p: &ProjPoint) -> Result<bool> {
    require_pg6(space)?;
    Ok(QuadricForm::eval(space, p.vector()) == 0)
}

/// Whether every point of the line spanned by `x` and `y` is on the quadric:
/// `Q(x + t y) = Q(x) + t b(x, y) + t^2 Q(y)` vanishes identically.
pub fn is_isotropic_pair(space: &Space, x: &Vector, y: &Vector) -> bool {
    QuadricForm::eval(space, x) == 0
        && QuadricForm::eval(space, y) == 0
        && QuadricForm::polar(space, x, y) == 0
}

pub fn is_isotropic_subspace(space: &Space, s: &Subspace) -> bool {
    let rows = s.rows();
    rows.iter().all(|r| QuadricForm::eval(space, r) == 0)
        && rows.iter().enumerate().all(|(i, x)| {
            rows[i + 1..]
                .iter()
                .all(|y| QuadricForm::polar(space, x, y) == 0)
        })
}

/// Totally isotropic lines of Q(6, q) in canonical order.
pub fn isotropic_lines(space: &Space) -> Result<impl Iterator<Item = ProjLine> + '_> {
    require_pg6(space)?;
    Ok(space
        .enumerate_subspaces(1)?
        .filter(move |l| is_isotropic_pair(space, &l.rows()[0], &l.rows()[1]))
        .map(move |l| space.line(l).expect("enumerated lines are lines")))
}

/// Number of points of Q(6, q) inside `s`.
pub fn quadric_points_in(space: &Space, s: &Subspace) -> u64 {
    space
        .points_of(s)
        .iter()
        .filter(|v| QuadricForm::eval(space, v) == 0)
        .count() as u64
}

/// How a 4-space meets Q(6, q).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SectionType {
    /// Nondegenerate parabolic quadric Q(4, q).
    ParabolicQ4,
    /// Point vertex over an elliptic quadric Q-(3, q).
    ConeOverElliptic,
    /// Point vertex over a hyperbolic quadric Q+(3, q).
    ConeOverHyperbolic,
    /// Line vertex over a conic Q(2, q).
    LineConeOverConic,
}

impl SectionType {
    pub const ALL: [SectionType; 4] = [
        SectionType::ParabolicQ4,
        SectionType::ConeOverElliptic,
        SectionType::ConeOverHyperbolic,
        SectionType::LineConeOverConic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SectionType::ParabolicQ4 => "Q(4,q)",
            SectionType::ConeOverElliptic => "PQ-(3,q)",
            SectionType::ConeOverHyperbolic => "PQ+(3,q)",
            SectionType::LineConeOverConic => "lQ(2,q)",
        }
    }

    /// Number of quadric points in a section of this type.
    pub fn point_count(self, q: u64) -> u64 {
        match self {
            SectionType::ParabolicQ4 | SectionType::LineConeOverConic => q * q * q + q * q + q + 1,
            SectionType::ConeOverElliptic => q * q * q + q + 1,
            SectionType::ConeOverHyperbolic => q * q * q + 2 * q * q + q + 1,
        }
    }

    /// Upper bound on hexagon lines inside a 4-space of this type.
    pub fn hexagon_line_bound(self, q: u64) -> u64 {
        match self {
            SectionType::ParabolicQ4 | SectionType::ConeOverElliptic => q * q + 1,
            SectionType::ConeOverHyperbolic | SectionType::LineConeOverConic => (q + 1) * (q + 1),
        }
    }
}

/// Result of [`classify_section`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    pub kind: SectionType,
    pub quadric_points: u64,
    /// Vertex of the cone (the singular radical); empty for Q(4, q).
    pub vertex: Subspace,
}

/// Classify `u ∩ Q(6, q)` for a 4-space `u`.
pub fn classify_section(space: &Space, u: &Subspace) -> Result<Section> {
    require_pg6(space)?;
    if u.projdim() != 4 {
        return Err(Error::DimensionOutOfRange {
            dim: u.projdim(),
            reason: "section classification needs a 4-space".into(),
        });
    }
    let vertex = singular_radical(space, u);
    let q = space.q() as u64;
    let points = quadric_points_in(space, u);
    let kind = match vertex.rank() {
        0 => SectionType::ParabolicQ4,
        1 => {
            if points == SectionType::ConeOverElliptic.point_count(q) {
                SectionType::ConeOverElliptic
            } else if points == SectionType::ConeOverHyperbolic.point_count(q) {
                SectionType::ConeOverHyperbolic
            } else {
                return Err(Error::Internal(format!(
                    "point-vertex cone with {points} points matches neither elliptic nor hyperbolic base"
                )));
            }
        }
        2 => SectionType::LineConeOverConic,
        r => {
            return Err(Error::Internal(format!(
                "4-space section with a singular radical of vector dimension {r}"
            )))
        }
    };
    if points != kind.point_count(q) {
        return Err(Error::Internal(format!(
            "{} section with {points} points, expected {}",
            kind.name(),
            kind.point_count(q)
        )));
    }
    Ok(Section {
        kind,
        quadric_points: points,
        vertex,
    })
}

/// Singular radical of Q restricted to `u`, as a subspace of PG(6, q).
pub fn singular_radical(space: &Space, u: &Subspace) -> Subspace {
    let basis = u.rows();
    let k = basis.len();
    let field = space.field();
    // Linear algebra on coefficient vectors of length k.
    let coeff = Space::with_field(k - 1, field.clone());

    let mut gram: Vec<Vector> = vec![ZERO_VECTOR; k];
    for i in 0..k {
        for j in 0..k {
            gram[i][j] = QuadricForm::polar(space, &basis[i], &basis[j]);
        }
    }
    let gram_rows = coeff.subspace_from_vectors(&gram);
    let polar_radical = coeff.annihilator(&gram_rows);

    let radical_coeffs: Vec<Vector> = if field.characteristic() != 2 {
        polar_radical.rows().to_vec()
    } else {
        // On the polar radical Q is additive and Q(c r) = c^2 Q(r), so its
        // zero set is the image under coordinatewise square roots of the
        // kernel of d -> sum d_i Q(r_i).
        let rad: Vec<Vector> = polar_radical
            .rows()
            .iter()
            .map(|c| combine(space, basis, c, k))
            .collect();
        let m = rad.len();
        if m == 0 {
            Vec::new()
        } else {
            let values: Vector = {
                let mut v = ZERO_VECTOR;
                for (i, r) in rad.iter().enumerate() {
                    v[i] = QuadricForm::eval(space, r);
                }
                v
            };
            let dspace = Space::with_field(m - 1, field.clone());
            let kernel = dspace.annihilator(&dspace.subspace_from_vectors(&[values]));
            kernel
                .rows()
                .iter()
                .map(|d| {
                    // Back to coefficients over the Gram basis.
                    let mut c = ZERO_VECTOR;
                    for (i, &di) in d[..m].iter().enumerate() {
                        let root = field.sqrt_code(di).expect("every element is a square in characteristic 2");
                        if root == 0 {
                            continue;
                        }
                        let row = &polar_radical.rows()[i];
                        for j in 0..k {
                            c[j] = field.add_code(c[j], field.mul_code(root, row[j]));
                        }
                    }
                    c
                })
                .collect()
        }
    };

    let vectors: Vec<Vector> = radical_coeffs
        .iter()
        .map(|c| combine(space, basis, c, k))
        .collect();
    space.subspace_from_vectors(&vectors)
}

fn combine(space: &Space, basis: &[Vector], c: &Vector, k: usize) -> Vector {
    let f = space.field();
    let mut v = ZERO_VECTOR;
    for i in 0..k {
        if c[i] != 0 {
            for j in 0..=space.n() {
                v[j] = f.add_code(v[j], f.mul_code(c[i], basis[i][j]));
            }
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    #[test]
    fn point_examples() {
        let s = Space::new(6, 3).unwrap();
        assert!(on_quadric(&s, &s.point(&[1, 0, 0, 0, 0, 0, 0]).unwrap()).unwrap());
        assert!(!on_quadric(&s, &s.point(&[0, 0, 0, 1, 0, 0, 0]).unwrap()).unwrap());
        let wrong = Space::new(5, 3).unwrap();
        assert!(on_quadric(&wrong, &wrong.unit_point(0)).is_err());
    }

    #[test]
    fn quadric_point_counts() {
        for q in [2u32, 3, 4] {
            let s = Space::new(6, q).unwrap();
            let n = s.points().filter(|p| on_quadric(&s, p).unwrap()).count() as u64;
            let q = q as u64;
            assert_eq!(n, (q.pow(6) - 1) / (q - 1));
        }
    }

    #[test]
    fn isotropic_lines_double_count() {
        for q in [2u32, 3] {
            let s = Space::new(6, q).unwrap();
            let lines: Vec<_> = isotropic_lines(&s).unwrap().collect();
            // Every point of the line is on the quadric.
            for l in &lines {
                for v in s.points_of(l.subspace()) {
                    assert_eq!(QuadricForm::eval(&s, &v), 0);
                }
            }
            // Independent count: lines through each quadric point, summed,
            // divided by the q + 1 points per line.
            let mut through = 0u64;
            for p in s.points().filter(|p| on_quadric(&s, p).unwrap()) {
                for other in s.points().filter(|r| r != &p && on_quadric(&s, r).unwrap()) {
                    if QuadricForm::polar(&s, p.vector(), other.vector()) == 0 {
                        through += 1;
                    }
                }
            }
            // Each line through p is counted once per other point on it.
            let q64 = q as u64;
            let pairs_per_line = (q64 + 1) * q64;
            assert_eq!(through % pairs_per_line, 0);
            assert_eq!(lines.len() as u64, through / pairs_per_line);
            let e0e1 = s.subspace(&[&[1, 0, 0, 0, 0, 0, 0], &[0, 1, 0, 0, 0, 0, 0]]).unwrap();
            assert!(lines.iter().any(|l| l.subspace() == &e0e1));
        }
    }

    /// Classify by brute force: quadric point count and isotropic line count.
    fn oracle_type(s: &Space, u: &Subspace) -> SectionType {
        let q = s.q() as u64;
        let points = quadric_points_in(s, u);
        let lines = s
            .enumerate_subspaces(1)
            .unwrap()
            .filter(|l| s.is_subspace_of(l, u).unwrap() && is_isotropic_subspace(s, l))
            .count() as u64;
        let table = [
            (SectionType::ParabolicQ4, (q + 1) * (q * q + 1)),
            (SectionType::ConeOverElliptic, q * q + 1),
            (SectionType::ConeOverHyperbolic, (q + 1) * (q + 1) + 2 * (q + 1) * q * q),
            (SectionType::LineConeOverConic, 1 + (q + 1) * (q * q + q)),
        ];
        table
            .iter()
            .find(|(t, l)| t.point_count(q) == points && *l == lines)
            .map(|(t, _)| *t)
            .unwrap_or_else(|| panic!("unrecognised section: {points} points, {lines} lines"))
    }

    #[test]
    fn classification_matches_brute_force_q2_sample() {
        let s = Space::new(6, 2).unwrap();
        let mut seen = BTreeMap::new();
        for u in s.enumerate_subspaces(4).unwrap().step_by(7) {
            let c = classify_section(&s, &u).unwrap();
            assert_eq!(c.kind, oracle_type(&s, &u));
            *seen.entry(c.kind).or_insert(0) += 1;
        }
        assert_eq!(seen.len(), 4, "all four types occur: {seen:?}");
    }

    #[test]
    fn classification_matches_brute_force_q3_sample() {
        let s = Space::new(6, 3).unwrap();
        for u in s.enumerate_subspaces(4).unwrap().step_by(997) {
            let c = classify_section(&s, &u).unwrap();
            assert_eq!(c.kind, oracle_type(&s, &u));
        }
    }

    #[test]
    fn elliptic_cone_lines_pass_through_vertex() {
        for q in [2u32, 3] {
            let s = Space::new(6, q).unwrap();
            let u = s
                .enumerate_subspaces(4)
                .unwrap()
                .find(|u| classify_section(&s, u).unwrap().kind == SectionType::ConeOverElliptic)
                .unwrap();
            let c = classify_section(&s, &u).unwrap();
            let lines: Vec<_> = s
                .enumerate_subspaces(1)
                .unwrap()
                .filter(|l| s.is_subspace_of(l, &u).unwrap() && is_isotropic_subspace(&s, l))
                .collect();
            assert_eq!(lines.len() as u64, (q * q + 1) as u64);
            for l in &lines {
                assert!(s.is_subspace_of(&c.vertex, l).unwrap());
            }
        }
    }

    #[test]
    fn rejects_wrong_dimension() {
        let s = Space::new(6, 2).unwrap();
        let plane = s.enumerate_subspaces(2).unwrap().next().unwrap();
        assert!(classify_section(&s, &plane).is_err());
    }
}
