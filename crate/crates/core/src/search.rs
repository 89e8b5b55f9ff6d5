//! Randomized search for line sets satisfying a chosen subset of axioms.
//!
//! The search works over the dense universe of all lines of PG(n, q). For
//! each universe line the incident points and the incident subspaces of
//! every constrained dimension are precomputed, so adding or removing a
//! line updates all counts in time proportional to its incidences.
//!
//! Each restart draws from its own ChaCha8 stream of the spec seed, which
//! makes a run reproducible whatever the number of worker threads. Restarts
//! run in parallel batches; the lowest successful restart index wins.
//! Every emitted candidate is re-checked with [`crate::audit::audit`] and
//! [`crate::polygon::find_kgon`] rather than trusted from the bookkeeping.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audit::{audit, Axiom, AxiomConfig};
use crate::error::{Error, Result};
use crate::format::write_lineset;
use crate::lineset::LineSet;
use crate::pg::{Space, Subspace, Vector};
use crate::polygon::find_kgon;

pub const RNG_NAME: &str = "ChaCha8Rng";

/// Largest number of (line, incident subspace) pairs the search will index.
pub const MAX_INCIDENCES: usize = 40_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    /// Grow by random feasible additions at deficient points; reset when
    /// stuck.
    Greedy,
    /// Annealed pencil additions and removals.
    LocalSwap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum Target {
    /// The set contains a pentagon (five lines are locked in at the start).
    PentagonPresent,
    /// The span of the set has dimension below the given value.
    SpanBelow(isize),
    Any,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSpec {
    pub n: usize,
    pub q: u32,
    pub axioms: AxiomConfig,
    pub mode: SearchMode,
    pub seed: u64,
    /// Iterations per restart.
    pub budget: u64,
    #[serde(default = "one")]
    pub restarts: u32,
    pub target: Target,
}

impl SearchSpec {
    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::Precondition("budget must be positive".into()));
        }
        if self.restarts == 0 {
            return Err(Error::Precondition("restarts must be positive".into()));
        }
        if self.target == Target::PentagonPresent && self.n < 4 {
            return Err(Error::Precondition(
                "a pentagon in general position needs n >= 4".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RestartLog {
    pub restart: u32,
    pub iterations: u64,
    pub resets: u64,
    pub best_energy: u64,
    pub found: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchLog {
    pub rng: String,
    pub seed: u64,
    pub spec: SearchSpec,
    pub universe_lines: usize,
    /// Restarts 0..=winner, or all of them when nothing was found.
    pub restarts: Vec<RestartLog>,
    pub winner: Option<u32>,
    pub lines: Option<usize>,
    pub span_dim: Option<isize>,
    pub outcome: String,
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub log: SearchLog,
    pub lineset: Option<LineSet>,
}

impl SearchResult {
    /// Line-set file with a comment header naming the generator and seed.
    pub fn render(&self) -> Option<String> {
        let ls = self.lineset.as_ref()?;
        let spec = &self.log.spec;
        let mut out = format!(
            "# search rng={} seed={} restart={} mode={:?} target={:?}\n",
            self.log.rng,
            self.log.seed,
            self.log.winner.unwrap_or(0),
            spec.mode,
            spec.target
        );
        out.push_str(&write_lineset(ls));
        Some(out)
    }
}

/// Per-dimension constraint derived from the enabled axioms.
#[derive(Debug, Clone)]
struct DimRule {
    allowed: Vec<Vec<u64>>,
    bounds: Vec<u64>,
    cap: u64,
}

impl DimRule {
    fn penalty(&self, c: u64) -> u64 {
        let mut p = 0;
        for set in &self.allowed {
            p += set.iter().map(|&a| a.abs_diff(c)).min().unwrap_or(0);
        }
        for &b in &self.bounds {
            p += c.saturating_sub(b);
        }
        p
    }
}

/// Universe of all lines with their incidences.
struct Universe {
    space: Space,
    lines: Vec<Subspace>,
    /// Per line: incident points, then incident subspaces per rule.
    incid: Vec<Vec<Vec<u32>>>,
    /// Lines through each point.
    through: Vec<Vec<u32>>,
    rules: Vec<DimRule>,
    /// Number of counters per rule (rule 0 is always the points).
    sizes: Vec<usize>,
    total_bound: Option<u64>,
}

impl Universe {
    fn new(space: Space, axioms: &AxiomConfig) -> Result<Self> {
        let q = space.q() as u64;
        let mut dims: Vec<usize> = vec![0];
        for a in axioms.axioms() {
            if let Some(d) = a.dimension() {
                if d > 0 && d <= space.n() && !dims.contains(&d) {
                    dims.push(d);
                }
            }
        }
        dims.sort_unstable();
        let rules: Vec<DimRule> = dims
            .iter()
            .map(|&d| {
                let mut r = DimRule {
                    allowed: Vec::new(),
                    bounds: Vec::new(),
                    cap: u64::MAX,
                };
                for a in axioms.axioms().filter(|a| a.dimension() == Some(d)) {
                    if let Some(set) = a.allowed_set(q) {
                        r.cap = r.cap.min(*set.iter().max().unwrap());
                        r.allowed.push(set);
                    } else if let Some(b) = a.upper_bound(q) {
                        r.cap = r.cap.min(b);
                        r.bounds.push(b);
                    }
                }
                r
            })
            .collect();

        let lines: Vec<Subspace> = space.enumerate_subspaces(1)?.collect();
        let mut per_line = 1usize;
        for &d in &dims[1..] {
            per_line += crate::pg::gaussian_binomial_u64(space.n() as u32 - 1, d as u32 - 1, q as u32)
                .unwrap_or(u64::MAX) as usize;
        }
        if lines.len().saturating_mul(per_line) > MAX_INCIDENCES {
            return Err(Error::Precondition(format!(
                "PG({},{q}) with these axioms needs more than {MAX_INCIDENCES} incidences",
                space.n()
            )));
        }

        let mut keymaps: Vec<HashMap<u128, u32>> = vec![HashMap::new(); dims.len()];
        let mut incid = Vec::with_capacity(lines.len());
        let mut through = vec![Vec::new(); space.num_points() as usize];
        for (li, l) in lines.iter().enumerate() {
            let mut row = Vec::with_capacity(dims.len());
            let pts = space.point_ranks_of(l);
            for &p in &pts {
                through[p as usize].push(li as u32);
            }
            row.push(pts);
            for (ri, &d) in dims.iter().enumerate().skip(1) {
                let map = &mut keymaps[ri];
                let ids = space
                    .subspaces_through(l, d as isize)?
                    .map(|u| {
                        let next = map.len() as u32;
                        *map.entry(space.key(&u)).or_insert(next)
                    })
                    .collect();
                row.push(ids);
            }
            incid.push(row);
        }
        let mut sizes = vec![space.num_points() as usize];
        sizes.extend(keymaps.iter().skip(1).map(HashMap::len));
        let total_bound = axioms
            .contains(Axiom::To)
            .then(|| Axiom::To.upper_bound(q).unwrap());
        Ok(Universe {
            space,
            lines,
            incid,
            through,
            rules,
            sizes,
            total_bound,
        })
    }
}

/// Mutable search state over a universe.
struct State<'u> {
    u: &'u Universe,
    present: Vec<bool>,
    locked: Vec<bool>,
    members: Vec<u32>,
    pos: Vec<usize>,
    counts: Vec<Vec<u64>>,
    energy: u64,
}

impl<'u> State<'u> {
    fn new(u: &'u Universe) -> Self {
        let nl = u.lines.len();
        State {
            u,
            present: vec![false; nl],
            locked: vec![false; nl],
            members: Vec::new(),
            pos: vec![usize::MAX; nl],
            counts: u.sizes.iter().map(|&s| vec![0; s]).collect(),
            energy: 0,
        }
    }

    fn total_penalty(&self, len: usize) -> u64 {
        self.u
            .total_bound
            .map_or(0, |b| (len as u64).saturating_sub(b))
    }

    fn delta_add(&self, line: u32) -> i64 {
        let mut d = 0i64;
        for (ri, ids) in self.u.incid[line as usize].iter().enumerate() {
            let rule = &self.u.rules[ri];
            for &id in ids {
                let c = self.counts[ri][id as usize];
                d += rule.penalty(c + 1) as i64 - rule.penalty(c) as i64;
            }
        }
        let n = self.members.len();
        d + self.total_penalty(n + 1) as i64 - self.total_penalty(n) as i64
    }

    fn fits_caps(&self, line: u32) -> bool {
        if let Some(b) = self.u.total_bound {
            if self.members.len() as u64 >= b {
                return false;
            }
        }
        self.u.incid[line as usize].iter().enumerate().all(|(ri, ids)| {
            let cap = self.u.rules[ri].cap;
            ids.iter().all(|&id| self.counts[ri][id as usize] < cap)
        })
    }

    fn toggle(&mut self, line: u32) {
        let l = line as usize;
        let adding = !self.present[l];
        let before = self.total_penalty(self.members.len());
        for (ri, ids) in self.u.incid[l].iter().enumerate() {
            let rule = &self.u.rules[ri];
            for &id in ids {
                let c = &mut self.counts[ri][id as usize];
                let old = rule.penalty(*c);
                if adding {
                    *c += 1;
                } else {
                    *c -= 1;
                }
                self.energy = self.energy + rule.penalty(*c) - old;
            }
        }
        if adding {
            self.pos[l] = self.members.len();
            self.members.push(line);
        } else {
            let i = self.pos[l];
            self.members.swap_remove(i);
            if i < self.members.len() {
                self.pos[self.members[i] as usize] = i;
            }
            self.pos[l] = usize::MAX;
        }
        self.present[l] = adding;
        self.energy = self.energy + self.total_penalty(self.members.len()) - before;
    }

    fn note_best(&self, log: &mut RestartLog) {
        if !self.members.is_empty() {
            log.best_energy = log.best_energy.min(self.energy);
        }
    }

    fn degree(&self, p: u32) -> u64 {
        self.counts[0][p as usize]
    }

    /// Points lying on some but fewer than q+1 lines, ascending.
    fn deficient_points(&self) -> Vec<u32> {
        let full = self.u.space.q() as u64 + 1;
        (0..self.counts[0].len() as u32)
            .filter(|&p| {
                let d = self.degree(p);
                d > 0 && d < full
            })
            .collect()
    }

    /// Points whose degree is penalized, ascending.
    fn bad_points(&self) -> Vec<u32> {
        let rule = &self.u.rules[0];
        (0..self.counts[0].len() as u32)
            .filter(|&p| rule.penalty(self.degree(p)) > 0)
            .collect()
    }

    fn lineset(&self) -> LineSet {
        let mut idx = self.members.clone();
        idx.sort_unstable();
        LineSet::new(
            self.u.space.clone(),
            idx.iter().map(|&i| self.u.lines[i as usize].clone()),
        )
        .expect("universe lines share the ambient space")
    }
}

fn random_pentagon(u: &Universe, rng: &mut ChaCha8Rng) -> Vec<u32> {
    let space = &u.space;
    let np = space.num_points() as u32;
    loop {
        let pts: Vec<Vector> = (0..5).map(|_| space.point_from_rank(rng.gen_range(0..np))).collect();
        if space.subspace_from_vectors(&pts).rank() != 5 {
            continue;
        }
        return (0..5)
            .map(|i| {
                let l = space.subspace_from_vectors(&[pts[i], pts[(i + 1) % 5]]);
                u.lines.binary_search(&l).expect("every line is in the universe") as u32
            })
            .collect();
    }
}

fn meets_target(ls: &LineSet, target: Target) -> Result<bool> {
    Ok(match target {
        Target::PentagonPresent => find_kgon(ls, 5)?.is_some(),
        Target::SpanBelow(k) => ls.span().projdim() < k,
        Target::Any => true,
    })
}

/// Independent verification of a candidate.
fn verify(ls: &LineSet, spec: &SearchSpec) -> Result<bool> {
    if ls.is_empty() {
        return Ok(false);
    }
    Ok(audit(ls, &spec.axioms)?.all_pass && meets_target(ls, spec.target)?)
}

fn reset(state: &mut State, u: &Universe, spec: &SearchSpec, rng: &mut ChaCha8Rng) {
    for l in state.members.clone() {
        state.toggle(l);
    }
    state.locked.iter_mut().for_each(|x| *x = false);
    if spec.target == Target::PentagonPresent {
        for l in random_pentagon(u, rng) {
            state.toggle(l);
            state.locked[l as usize] = true;
        }
    }
}

fn try_candidate(state: &State, spec: &SearchSpec) -> Result<Option<LineSet>> {
    if state.energy != 0 || state.members.is_empty() {
        return Ok(None);
    }
    let ls = state.lineset();
    Ok(verify(&ls, spec)?.then_some(ls))
}

fn greedy(
    u: &Universe,
    spec: &SearchSpec,
    rng: &mut ChaCha8Rng,
    log: &mut RestartLog,
) -> Result<Option<LineSet>> {
    let mut state = State::new(u);
    reset(&mut state, u, spec, rng);
    while log.iterations < spec.budget {
        log.iterations += 1;
        state.note_best(log);
        let deficient = state.deficient_points();
        if deficient.is_empty() {
            if let Some(ls) = try_candidate(&state, spec)? {
                return Ok(Some(ls));
            }
            if state.members.is_empty() {
                let l = rng.gen_range(0..u.lines.len() as u32);
                state.toggle(l);
                continue;
            }
            log.resets += 1;
            reset(&mut state, u, spec, rng);
            continue;
        }
        let p = *deficient.choose(rng).unwrap();
        let options: Vec<(i64, u32)> = u.through[p as usize]
            .iter()
            .copied()
            .filter(|&l| !state.present[l as usize] && state.fits_caps(l))
            .map(|l| (state.delta_add(l), l))
            .collect();
        let best = options.iter().map(|o| o.0).min();
        let options: Vec<u32> = options
            .iter()
            .filter(|o| Some(o.0) == best)
            .map(|o| o.1)
            .collect();
        match options.choose(rng) {
            Some(&l) => state.toggle(l),
            None => {
                log.resets += 1;
                reset(&mut state, u, spec, rng);
            }
        }
    }
    state.note_best(log);
    try_candidate(&state, spec)
}

/// Complete deficient pencils with the cheapest lines allowed by the caps,
/// recording toggles. Points that cannot be completed are left deficient.
fn greedy_fill(state: &mut State, rng: &mut ChaCha8Rng, undo: &mut Vec<u32>) {
    let u = state.u;
    loop {
        let mut deficient = state.deficient_points();
        deficient.shuffle(rng);
        let mut progress = false;
        for p in deficient {
            let options: Vec<(i64, u32)> = u.through[p as usize]
                .iter()
                .copied()
                .filter(|&l| !state.present[l as usize] && state.fits_caps(l))
                .map(|l| (state.delta_add(l), l))
                .collect();
            let Some(best) = options.iter().map(|o| o.0).min() else {
                continue;
            };
            let ties: Vec<u32> = options.iter().filter(|o| o.0 == best).map(|o| o.1).collect();
            let l = *ties.choose(rng).unwrap();
            state.toggle(l);
            undo.push(l);
            progress = true;
        }
        if !progress {
            return;
        }
    }
}

fn local_swap(
    u: &Universe,
    spec: &SearchSpec,
    rng: &mut ChaCha8Rng,
    log: &mut RestartLog,
) -> Result<Option<LineSet>> {
    let mut state = State::new(u);
    reset(&mut state, u, spec, rng);
    let mut undo: Vec<u32> = Vec::new();
    if state.members.is_empty() {
        let l = rng.gen_range(0..u.lines.len() as u32);
        state.toggle(l);
    }
    greedy_fill(&mut state, rng, &mut undo);
    let t0 = 1.5f64;
    while log.iterations < spec.budget {
        log.iterations += 1;
        state.note_best(log);
        if let Some(ls) = try_candidate(&state, spec)? {
            return Ok(Some(ls));
        }
        let temp = t0 * (1.0 - log.iterations as f64 / spec.budget as f64) + 0.05;
        let before = state.energy as i64;
        undo.clear();
        // Drop the pencils of one or two points, then re-complete greedily.
        let bad = state.bad_points();
        for _ in 0..rng.gen_range(1..=2) {
            let p = match bad.choose(rng) {
                Some(&p) if rng.gen_bool(0.5) => p,
                _ => match state.members.choose(rng) {
                    Some(&l) => *u.incid[l as usize][0].choose(rng).unwrap(),
                    None => break,
                },
            };
            let lines: Vec<u32> = u.through[p as usize]
                .iter()
                .copied()
                .filter(|&l| state.present[l as usize] && !state.locked[l as usize])
                .collect();
            for l in lines {
                state.toggle(l);
                undo.push(l);
            }
        }
        if state.members.is_empty() {
            let l = rng.gen_range(0..u.lines.len() as u32);
            state.toggle(l);
            undo.push(l);
        }
        greedy_fill(&mut state, rng, &mut undo);
        let delta = state.energy as i64 - before;
        let accept = delta <= 0 || rng.gen_bool((-(delta as f64) / temp).exp().clamp(0.0, 1.0));
        if !accept {
            for &l in undo.iter().rev() {
                state.toggle(l);
            }
        }
    }
    state.note_best(log);
    try_candidate(&state, spec)
}

fn run_restart(u: &Universe, spec: &SearchSpec, restart: u32) -> Result<(RestartLog, Option<LineSet>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(restart as u64);
    let mut log = RestartLog {
        restart,
        iterations: 0,
        resets: 0,
        best_energy: u64::MAX,
        found: false,
    };
    let found = match spec.mode {
        SearchMode::Greedy => greedy(u, spec, &mut rng, &mut log)?,
        SearchMode::LocalSwap => local_swap(u, spec, &mut rng, &mut log)?,
    };
    log.found = found.is_some();
    Ok((log, found))
}

/// Run a search. Exhausting the budget is not an error.
pub fn run(spec: &SearchSpec) -> Result<SearchResult> {
    spec.validate()?;
    let space = Space::new(spec.n, spec.q)?;
    let universe = Universe::new(space, &spec.axioms)?;
    let batch = rayon::current_num_threads().max(1) as u32;
    let mut logs = Vec::new();
    let mut winner = None;
    let mut start = 0;
    while start < spec.restarts && winner.is_none() {
        let end = (start + batch).min(spec.restarts);
        let results: Vec<Result<(RestartLog, Option<LineSet>)>> = (start..end)
            .into_par_iter()
            .map(|r| run_restart(&universe, spec, r))
            .collect();
        for res in results {
            let (log, found) = res?;
            logs.push(log);
            if let Some(ls) = found {
                winner = Some((logs.len() as u32 - 1, ls));
                break;
            }
        }
        start = end;
    }
    let (winner_idx, lineset) = match winner {
        Some((i, ls)) => (Some(i), Some(ls)),
        None => (None, None),
    };
    let outcome = match (&lineset, winner_idx) {
        (Some(ls), Some(i)) => format!("found {} lines in restart {i}", ls.len()),
        _ => "budget exhausted without a candidate".to_string(),
    };
    Ok(SearchResult {
        log: SearchLog {
            rng: RNG_NAME.to_string(),
            seed: spec.seed,
            spec: spec.clone(),
            universe_lines: universe.lines.len(),
            restarts: logs,
            winner: winner_idx,
            lines: lineset.as_ref().map(LineSet::len),
            span_dim: lineset.as_ref().map(|l| l.span().projdim()),
            outcome,
        },
        lineset,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(mode: SearchMode, target: Target, axioms: &[Axiom]) -> SearchSpec {
        SearchSpec {
            n: 4,
            q: 2,
            axioms: AxiomConfig::of(axioms),
            mode,
            seed: 7,
            budget: 3000,
            restarts: 4,
            target,
        }
    }

    #[test]
    fn penalties() {
        let r = DimRule {
            allowed: vec![vec![0, 1, 3]],
            bounds: vec![],
            cap: 3,
        };
        assert_eq!(
            (0..6).map(|c| r.penalty(c)).collect::<Vec<_>>(),
            vec![0, 0, 1, 0, 1, 2]
        );
    }

    #[test]
    fn incremental_energy_matches_recount() {
        let space = Space::new(4, 2).unwrap();
        let u = Universe::new(space, &AxiomConfig::of(&[Axiom::Pt, Axiom::Pl, Axiom::Sd])).unwrap();
        assert_eq!(u.lines.len(), 155);
        let mut st = State::new(&u);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..400 {
            let l = rng.gen_range(0..155u32);
            let predicted = st.delta_add(l);
            let before = st.energy as i64;
            let was = st.present[l as usize];
            st.toggle(l);
            if !was {
                assert_eq!(st.energy as i64 - before, predicted);
            }
            let fresh: u64 = st
                .counts
                .iter()
                .zip(&u.rules)
                .map(|(c, r)| c.iter().map(|&x| r.penalty(x)).sum::<u64>())
                .sum();
            assert_eq!(st.energy, fresh);
        }
    }

    #[test]
    fn pentagon_seed_is_a_pentagon() {
        let space = Space::new(4, 2).unwrap();
        let u = Universe::new(space, &AxiomConfig::of(&[Axiom::Pt])).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let lines = random_pentagon(&u, &mut rng);
        let ls = LineSet::new(
            u.space.clone(),
            lines.iter().map(|&l| u.lines[l as usize].clone()),
        )
        .unwrap();
        assert_eq!(ls.len(), 5);
        assert!(find_kgon(&ls, 5).unwrap().is_some());
        assert_eq!(ls.span().projdim(), 4);
    }

    #[test]
    fn greedy_finds_pt_sets_and_they_audit() {
        let s = spec(SearchMode::Greedy, Target::Any, &[Axiom::Pt, Axiom::Pl]);
        let r = run(&s).unwrap();
        let ls = r.lineset.expect("greedy finds a set with Pt and Pl");
        assert!(audit(&ls, &s.axioms).unwrap().all_pass);
        assert_eq!(r.log.rng, RNG_NAME);
        assert_eq!(r.log.seed, 7);
    }

    #[test]
    fn replay_is_identical() {
        for mode in [SearchMode::Greedy, SearchMode::LocalSwap] {
            let s = spec(mode, Target::PentagonPresent, &[Axiom::Pt, Axiom::Pl, Axiom::Sd]);
            let a = run(&s).unwrap();
            let b = run(&s).unwrap();
            assert_eq!(a.log, b.log);
            assert_eq!(a.render(), b.render());
            if let Some(ls) = &a.lineset {
                assert!(verify(ls, &s).unwrap());
            }
        }
    }

    #[test]
    fn spec_json_round_trip() {
        let s = spec(SearchMode::LocalSwap, Target::SpanBelow(6), &[Axiom::Pt, Axiom::SdPrime]);
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.contains("\"local-swap\"") && json.contains("\"Sd'\""));
        let back: SearchSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<SearchSpec>(&json.replace("[\"Pt\",\"Sd'\"]", "[]")).is_err());
    }

    #[test]
    fn invalid_specs() {
        let mut s = spec(SearchMode::Greedy, Target::Any, &[Axiom::Pt]);
        s.budget = 0;
        assert!(run(&s).is_err());
        let mut s = spec(SearchMode::Greedy, Target::PentagonPresent, &[Axiom::Pt]);
        s.n = 3;
        assert!(run(&s).is_err());
    }
}
