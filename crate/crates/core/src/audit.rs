//! Intersection-number auditor.
//!
//! For a line set L of PG(n, q) and a subspace U, `L_U` is the set of lines
//! of L contained in U. The auditor computes `|L_U|` for every subspace of
//! the dimensions the enabled axioms talk about and checks the axioms:
//!
//! | axiom | condition                                              |
//! |-------|--------------------------------------------------------|
//! | Pt    | every point lies on 0 or q+1 lines                     |
//! | Pl    | every plane contains 0, 1 or q+1 lines                 |
//! | Sd    | every solid contains 0, 1, q+1 or 2q+1 lines           |
//! | Sd'   | every solid contains at most 2q+1 lines                |
//! | 4d    | every 4-space contains at most q^3-q^2+4q lines        |
//! | Hp    | every 5-space contains at most q^3+3q^2+3q lines       |
//! | Hp'   | every 5-space contains at most q^4-q^3+3q^2+2q lines   |
//! | To    | \|L\| <= q^5+q^4+q^3+q^2+q+1                           |
//! | 6d    | q > 3 or the span of L has dimension at least 6        |
//!
//! Every condition admits a count of 0, so only subspaces containing at least
//! one line need to be visited. The closure strategy walks, for each line,
//! all d-subspaces through it; a subspace U is then visited exactly `|L_U|`
//! times, so the visit multiplicity is the count and no deduplication pass
//! is needed. Per-worker tallies are merged by summing.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lineset::LineSet;
use crate::pg::{gaussian_binomial_u64, Ambient, Quotient, Rows, Space, SubspaceIter, Subspace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axiom {
    #[serde(rename = "Pt")]
    Pt,
    #[serde(rename = "Pl")]
    Pl,
    #[serde(rename = "Sd")]
    Sd,
    #[serde(rename = "Sd'")]
    SdPrime,
    #[serde(rename = "4d")]
    FourD,
    #[serde(rename = "Hp")]
    Hp,
    #[serde(rename = "Hp'")]
    HpPrime,
    #[serde(rename = "To")]
    To,
    #[serde(rename = "6d")]
    SixD,
}

impl Axiom {
    pub const ALL: [Axiom; 9] = [
        Axiom::Pt,
        Axiom::Pl,
        Axiom::Sd,
        Axiom::SdPrime,
        Axiom::FourD,
        Axiom::Hp,
        Axiom::HpPrime,
        Axiom::To,
        Axiom::SixD,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axiom::Pt => "Pt",
            Axiom::Pl => "Pl",
            Axiom::Sd => "Sd",
            Axiom::SdPrime => "Sd'",
            Axiom::FourD => "4d",
            Axiom::Hp => "Hp",
            Axiom::HpPrime => "Hp'",
            Axiom::To => "To",
            Axiom::SixD => "6d",
        }
    }

    /// Dimension of the subspaces the axiom constrains.
    pub fn dimension(self) -> Option<usize> {
        match self {
            Axiom::Pt => Some(0),
            Axiom::Pl => Some(2),
            Axiom::Sd | Axiom::SdPrime => Some(3),
            Axiom::FourD => Some(4),
            Axiom::Hp | Axiom::HpPrime => Some(5),
            Axiom::To | Axiom::SixD => None,
        }
    }

    /// Allowed counts for membership-type axioms.
    pub fn allowed_set(self, q: u64) -> Option<Vec<u64>> {
        match self {
            Axiom::Pt => Some(vec![0, q + 1]),
            Axiom::Pl => Some(vec![0, 1, q + 1]),
            Axiom::Sd => Some(vec![0, 1, q + 1, 2 * q + 1]),
            _ => None,
        }
    }

    /// Upper bound for maximum-type axioms (and To).
    pub fn upper_bound(self, q: u64) -> Option<u64> {
        match self {
            Axiom::SdPrime => Some(2 * q + 1),
            Axiom::FourD => Some(four_d_bound(q)),
            Axiom::Hp => Some(q * q * q + 3 * q * q + 3 * q),
            Axiom::HpPrime => Some(hp_prime_bound(q)),
            Axiom::To => Some(total_bound(q)),
            _ => None,
        }
    }

    pub fn admits(self, q: u64, count: u64) -> bool {
        if let Some(set) = self.allowed_set(q) {
            return set.contains(&count);
        }
        match self.upper_bound(q) {
            Some(b) => count <= b,
            None => true,
        }
    }

    pub fn condition(self, q: u64) -> String {
        match self {
            Axiom::SixD => "q > 3 or dim <L> >= 6".to_string(),
            _ => {
                if let Some(set) = self.allowed_set(q) {
                    let s: Vec<String> = set.iter().map(u64::to_string).collect();
                    format!("count in {{{}}}", s.join(","))
                } else {
                    format!("count <= {}", self.upper_bound(q).unwrap())
                }
            }
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axiom {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        Ok(match t.as_str() {
            "pt" => Axiom::Pt,
            "pl" => Axiom::Pl,
            "sd" => Axiom::Sd,
            "sd'" | "sdprime" | "sd-prime" => Axiom::SdPrime,
            "4d" | "fourd" => Axiom::FourD,
            "hp" => Axiom::Hp,
            "hp'" | "hpprime" | "hp-prime" => Axiom::HpPrime,
            "to" => Axiom::To,
            "6d" | "sixd" => Axiom::SixD,
            _ => {
                return Err(Error::Parse {
                    line: 0,
                    msg: format!("unknown axiom {s:?}"),
                })
            }
        })
    }
}

/// q^3 - q^2 + 4q.
pub fn four_d_bound(q: u64) -> u64 {
    q * q * q - q * q + 4 * q
}

/// q^4 - q^3 + 3q^2 + 2q.
pub fn hp_prime_bound(q: u64) -> u64 {
    q.pow(4) - q.pow(3) + 3 * q * q + 2 * q
}

/// q^5 + q^4 + q^3 + q^2 + q + 1.
pub fn total_bound(q: u64) -> u64 {
    (0..=5).map(|k| q.pow(k)).sum()
}

/// A nonempty selection of axioms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Axiom>", into = "Vec<Axiom>")]
pub struct AxiomConfig {
    flags: BTreeSet<Axiom>,
}

impl TryFrom<Vec<Axiom>> for AxiomConfig {
    type Error = Error;

    fn try_from(v: Vec<Axiom>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<AxiomConfig> for Vec<Axiom> {
    fn from(c: AxiomConfig) -> Self {
        c.flags.into_iter().collect()
    }
}

impl AxiomConfig {
    pub fn new(axioms: impl IntoIterator<Item = Axiom>) -> Result<Self> {
        let flags: BTreeSet<Axiom> = axioms.into_iter().collect();
        if flags.is_empty() {
            return Err(Error::Precondition("at least one axiom must be enabled".into()));
        }
        Ok(AxiomConfig { flags })
    }

    /// Panics on an empty slice.
    pub fn of(axioms: &[Axiom]) -> Self {
        Self::new(axioms.iter().copied()).expect("nonempty axiom list")
    }

    pub fn all() -> Self {
        Self::of(&Axiom::ALL)
    }

    /// Parse a comma separated list; `all` selects every axiom.
    pub fn parse(list: &str) -> Result<Self> {
        if list.trim().eq_ignore_ascii_case("all") {
            return Ok(Self::all());
        }
        let axioms = list
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(Axiom::from_str)
            .collect::<Result<Vec<_>>>()?;
        Self::new(axioms)
    }

    pub fn contains(&self, a: Axiom) -> bool {
        self.flags.contains(&a)
    }

    pub fn axioms(&self) -> impl Iterator<Item = Axiom> + '_ {
        self.flags.iter().copied()
    }

    fn dimensions(&self) -> BTreeSet<usize> {
        self.flags.iter().filter_map(|a| a.dimension()).collect()
    }
}

/// How subspace counts are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Visit only subspaces through lines of the set.
    Closure,
    /// Enumerate every subspace and test each line for containment.
    Naive,
}

impl Strategy {
    fn description(self) -> &'static str {
        match self {
            Strategy::Closure => {
                "closure: each line visits every d-subspace through it; |L_U| is the visit multiplicity of U; worker tallies merged by summation"
            }
            Strategy::Naive => "naive: every d-subspace enumerated and each line tested for containment",
        }
    }
}

/// A subspace violating an axiom.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub dim: isize,
    pub basis: Vec<Vec<u8>>,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub axiom: Axiom,
    pub condition: String,
    pub pass: bool,
    /// Largest count for subspace axioms, |L| for To, span dimension for 6d.
    pub observed: i64,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub ambient: Ambient,
    pub lines: usize,
    pub points: usize,
    pub span_dim: isize,
    pub counting: String,
    pub verdicts: Vec<Verdict>,
    /// dimension -> (count -> number of subspaces of that dimension).
    pub histograms: BTreeMap<usize, BTreeMap<u64, u64>>,
    pub all_pass: bool,
}

impl AuditReport {
    pub fn verdict(&self, a: Axiom) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.axiom == a)
    }

    pub fn max_count(&self, dim: usize) -> Option<u64> {
        self.histograms
            .get(&dim)
            .and_then(|h| h.iter().filter(|(_, &m)| m > 0).map(|(&c, _)| c).max())
    }
}

/// Nonzero counts of one dimension, sorted by canonical key.
struct DimCounts {
    total: u64,
    nonzero: Vec<(u128, u64)>,
}

pub fn audit(ls: &LineSet, cfg: &AxiomConfig) -> Result<AuditReport> {
    audit_with(ls, cfg, Strategy::Closure)
}

pub fn audit_with(ls: &LineSet, cfg: &AxiomConfig, strategy: Strategy) -> Result<AuditReport> {
    if ls.is_empty() {
        return Err(Error::Precondition("cannot audit an empty line set".into()));
    }
    let space = ls.space();
    let q = space.q() as u64;
    let n = space.n();

    let mut counts: BTreeMap<usize, DimCounts> = BTreeMap::new();
    for d in cfg.dimensions() {
        if d > n {
            continue;
        }
        if !space.key_fits(d + 1) {
            return Err(Error::Precondition(format!(
                "PG({n},{q}) is too large to key {d}-subspaces"
            )));
        }
        let total = gaussian_binomial_u64(n as u32 + 1, d as u32 + 1, q as u32).ok_or_else(|| {
            Error::Precondition(format!("too many {d}-subspaces in PG({n},{q})"))
        })?;
        let map = match (d, strategy) {
            (0, Strategy::Closure) => ls
                .points()
                .map(|p| (p as u128, ls.degree(p) as u64))
                .collect(),
            (_, Strategy::Closure) => closure_counts(ls, d),
            (_, Strategy::Naive) => naive_counts(ls, d)?,
        };
        let mut nonzero: Vec<(u128, u64)> = map.into_iter().filter(|&(_, c)| c > 0).collect();
        nonzero.sort_unstable();
        counts.insert(d, DimCounts { total, nonzero });
    }

    let mut histograms = BTreeMap::new();
    for (&d, dc) in &counts {
        let mut h: BTreeMap<u64, u64> = BTreeMap::new();
        for &(_, c) in &dc.nonzero {
            *h.entry(c).or_default() += 1;
        }
        let zeros = dc.total - dc.nonzero.len() as u64;
        if zeros > 0 {
            h.insert(0, zeros);
        }
        histograms.insert(d, h);
    }

    let span_dim = ls.span().projdim();
    let mut verdicts = Vec::new();
    for axiom in cfg.axioms() {
        let verdict = match axiom.dimension() {
            Some(d) => {
                let (observed, witness) = match counts.get(&d) {
                    None => (0, None),
                    Some(dc) => {
                        let observed = dc.nonzero.iter().map(|&(_, c)| c).max().unwrap_or(0);
                        let witness = dc
                            .nonzero
                            .iter()
                            .find(|&&(_, c)| !axiom.admits(q, c))
                            .map(|&(key, c)| {
                                let sub = space.subspace_from_key(key, d + 1);
                                Witness {
                                    dim: d as isize,
                                    basis: sub.basis_codes(),
                                    count: c,
                                }
                            });
                        (observed, witness)
                    }
                };
                Verdict {
                    axiom,
                    condition: axiom.condition(q),
                    pass: witness.is_none(),
                    observed: observed as i64,
                    witness,
                }
            }
            None => {
                let (pass, observed) = match axiom {
                    Axiom::To => (axiom.admits(q, ls.len() as u64), ls.len() as i64),
                    _ => (q > 3 || span_dim >= 6, span_dim as i64),
                };
                Verdict {
                    axiom,
                    condition: axiom.condition(q),
                    pass,
                    observed,
                    witness: None,
                }
            }
        };
        verdicts.push(verdict);
    }

    Ok(AuditReport {
        ambient: space.ambient(),
        lines: ls.len(),
        points: ls.point_count(),
        span_dim,
        counting: strategy.description().to_string(),
        all_pass: verdicts.iter().all(|v| v.pass),
        verdicts,
        histograms,
    })
}

/// `|L_U|` for every d-subspace U through a line of the set (d >= 2).
fn closure_counts(ls: &LineSet, d: usize) -> HashMap<u128, u64> {
    let space = ls.space();
    // d-subspaces through a line correspond to (d-2)-subspaces of the
    // quotient PG(n-2, q).
    let inner = Space::with_field(space.n() - 2, space.field().clone());
    let quotient_items: Vec<Subspace> = SubspaceIter::new(&inner, d - 1).collect();
    let lines: Vec<Subspace> = ls.line_subspaces().collect();
    lines
        .par_chunks(16)
        .map(|chunk| {
            let mut local: HashMap<u128, u64> = HashMap::new();
            let mut buf = Rows::new();
            for line in chunk {
                let quotient = Quotient::new(space, line);
                for w in &quotient_items {
                    let rank = quotient.lift_into(space, w.rows(), &mut buf);
                    *local.entry(space.key_of_rows(&buf[..rank])).or_default() += 1;
                }
            }
            local
        })
        .reduce(HashMap::new, |mut a, mut b| {
            if a.len() < b.len() {
                std::mem::swap(&mut a, &mut b);
            }
            for (k, v) in b {
                *a.entry(k).or_default() += v;
            }
            a
        })
}

/// Counts for every d-subspace by direct enumeration.
fn naive_counts(ls: &LineSet, d: usize) -> Result<HashMap<u128, u64>> {
    let space = ls.space();
    let mut out = HashMap::new();
    let lines: Vec<Subspace> = ls.line_subspaces().collect();
    for u in space.enumerate_subspaces(d as isize)? {
        let c = if d == 0 {
            lines
                .iter()
                .filter(|l| space.contains_vector(l, &u.rows()[0]))
                .count()
        } else {
            lines
                .iter()
                .filter(|l| l.rows().iter().all(|r| space.contains_vector(&u, r)))
                .count()
        };
        let key = if d == 0 {
            space.point_rank(&u.rows()[0]) as u128
        } else {
            space.key(&u)
        };
        out.insert(key, c as u64);
    }
    Ok(out)
}

/// `|L_U|`.
pub fn count_in(ls: &LineSet, u: &Subspace) -> Result<usize> {
    Ok(ls.lines_in(u)?.len())
}

/// Outcome of [`expansion_bound`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub lines_in_m: usize,
    /// Lines of L_M meeting the extra line (at most one).
    pub meeting_lines: Vec<u32>,
    /// (q+1)-M-points on the meeting line, when there is one.
    pub alpha: Option<usize>,
    /// q|L_M| + 1, or q|L_M| - alpha q^2 + alpha q + 1.
    pub bound: i64,
    /// Lines of L inside the spans of the extra line with each line of L_M.
    pub expansion_count: usize,
    pub total: usize,
    pub unique_meeting_line: bool,
    pub alpha_at_most_q: bool,
    pub holds: bool,
}

/// Check the lower bound on |L| obtained by expanding a subspace `m` with a
/// line of L that meets it in exactly one point.
pub fn expansion_bound(ls: &LineSet, m: &Subspace, line: usize) -> Result<ExpansionReport> {
    let space = ls.space();
    if line >= ls.len() {
        return Err(Error::Precondition("line index out of range".into()));
    }
    let l = ls.line_subspace(line);
    if space.meet(m, &l)?.projdim() != 0 {
        return Err(Error::Precondition(
            "the line must meet M in exactly one point".into(),
        ));
    }
    let q = space.q() as i64;
    let in_m = ls.lines_in(m)?;
    let l_points = &ls.line(line).points;
    let meeting: Vec<u32> = in_m
        .iter()
        .copied()
        .filter(|&s| {
            ls.line(s as usize)
                .points
                .iter()
                .any(|p| l_points.binary_search(p).is_ok())
        })
        .collect();
    let alpha = match meeting.first() {
        Some(&s) => Some(crate::polygon::qp1_points_on_line(
            ls,
            m,
            &ls.line_subspace(s as usize),
        )?),
        None => None,
    };
    let lm = in_m.len() as i64;
    let bound = match alpha {
        None => q * lm + 1,
        Some(a) => q * lm - a as i64 * q * q + a as i64 * q + 1,
    };
    let mut expanded: BTreeSet<u32> = BTreeSet::new();
    for &lm_line in &in_m {
        let span = space.span(&l, &ls.line_subspace(lm_line as usize))?;
        expanded.extend(ls.lines_in(&span)?);
    }
    let expansion_count = expanded.len();
    Ok(ExpansionReport {
        lines_in_m: in_m.len(),
        unique_meeting_line: meeting.len() <= 1,
        alpha_at_most_q: alpha.is_none_or(|a| a as i64 <= q),
        holds: expansion_count as i64 >= bound && ls.len() as i64 >= bound,
        meeting_lines: meeting,
        alpha,
        bound,
        expansion_count,
        total: ls.len(),
    })
}

/// q^4 - q^3 + 3q^2 + 2q + 1.
pub fn hyperplane_pentagon_bound(q: u64) -> u64 {
    hp_prime_bound(q) + 1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum HyperplaneOutcome {
    /// (Pt), (Pl), (Sd) or (To) fails, so nothing is claimed.
    NotApplicable,
    /// No pentagon.
    Vacuous,
    /// A 5-space through the pentagon's span reaching the bound.
    Found { basis: Vec<Vec<u8>>, count: u64 },
    /// Pentagon present but no 5-space reaches the bound.
    NotFound { best: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperplaneReport {
    pub outcome: HyperplaneOutcome,
    pub bound: u64,
    pub pentagon: Option<crate::polygon::KGon>,
    pub span_dim: isize,
    /// Span dimension at most 6 (checked when the axioms hold).
    pub span_at_most_6: bool,
}

/// Look for a 5-space with many lines around a pentagon.
pub fn hyperplane_consequence_check(ls: &LineSet) -> Result<HyperplaneReport> {
    let space = ls.space();
    let q = space.q() as u64;
    let bound = hyperplane_pentagon_bound(q);
    let span_dim = ls.span().projdim();
    let pre = audit(ls, &AxiomConfig::of(&[Axiom::Pt, Axiom::Pl, Axiom::Sd, Axiom::To]))?;
    if !pre.all_pass {
        return Ok(HyperplaneReport {
            outcome: HyperplaneOutcome::NotApplicable,
            bound,
            pentagon: None,
            span_dim,
            span_at_most_6: span_dim <= 6,
        });
    }
    let Some(gon) = crate::polygon::find_kgon(ls, 5)? else {
        return Ok(HyperplaneReport {
            outcome: HyperplaneOutcome::Vacuous,
            bound,
            pentagon: None,
            span_dim,
            span_at_most_6: span_dim <= 6,
        });
    };
    let u = crate::polygon::pentagon_span(ls, &gon)?;
    let mut best = 0u64;
    let mut found = None;
    if space.n() >= 5 && u.projdim() <= 5 {
        let candidates: Vec<Subspace> = if u.projdim() == 5 {
            vec![u.clone()]
        } else {
            space.subspaces_through(&u, 5)?.collect()
        };
        for h in candidates {
            let c = ls.lines_in(&h)?.len() as u64;
            if c > best {
                best = c;
            }
            if c >= bound && found.is_none() {
                found = Some((h.basis_codes(), c));
            }
        }
    }
    let outcome = match found {
        Some((basis, count)) => HyperplaneOutcome::Found { basis, count },
        None => HyperplaneOutcome::NotFound { best },
    };
    Ok(HyperplaneReport {
        outcome,
        bound,
        pentagon: Some(gon),
        span_dim,
        span_at_most_6: span_dim <= 6,
    })
}
