//! The general k-pair solver: guess a crossing set, cut each path into segments at the
//! guessed vertices, and route the segments with the disjoint-paths DP on layered DAGs.
//!
//! A guess fixes, for every unit (an unordered pair, or a permutation of length at least 3),
//! the crossing vertices of two (sub)paths in one 2D projection. Guesses are enumerated
//! depth-first, unit by unit, with the all-empty guess first. Partial guesses are pruned when
//! the vertices placed on one path stop forming a chain of a shortest path.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rayon::prelude::*;

use crate::error::SolveError;
use crate::geometry::{
    crossing_vertices, pair_colored_in, project, rect_contains_2d, CrossingRecord, Point2,
};
use crate::graph::{
    compute_positions, verify_solution, DistanceMatrix, Instance, Path, PositionTable, Solution,
};
use crate::layered_dag::{build_layered_dag, disjoint_paths_dag, Dag, DagDisjointInstance};

/// An ordered sequence of distinct pair indices.
pub type PermKey = Vec<usize>;

pub const ALPHA: usize = 0;
pub const OMEGA: usize = 1;
pub const PARTIAL: usize = 2;
pub const VARPI: usize = 3;
pub const DELTA: usize = 4;

/// Crossing vertices guessed for one unit: `p` lies on the path of the last index, `q` on the
/// path of the second to last. Slots are indexed by `ALPHA`, `OMEGA`, `PARTIAL`, `VARPI`, `DELTA`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct UnitChoice {
    pub p: [Option<usize>; 5],
    pub q: [Option<usize>; 5],
}

impl UnitChoice {
    pub fn from_record(rec: &CrossingRecord) -> Self {
        UnitChoice {
            p: [
                rec.alpha_p,
                rec.omega_p,
                rec.partial_p,
                rec.varpi_p,
                rec.delta_p,
            ],
            q: [
                rec.alpha_q,
                rec.omega_q,
                rec.partial_q,
                rec.varpi_q,
                rec.delta_q,
            ],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.p.iter().chain(&self.q).all(Option::is_none)
    }
}

/// A complete guess. `ends` maps every permutation of length at least 2 to its endpoint pair
/// (ordered along the host path) or `None`; `marbles[i]` lists the guessed vertices of path `i`
/// by increasing distance from `s_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossingGuess {
    pub choices: BTreeMap<PermKey, UnitChoice>,
    pub ends: BTreeMap<PermKey, Option<(usize, usize)>>,
    pub marbles: Vec<Vec<usize>>,
}

impl fmt::Display for CrossingGuess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (sigma, e) in &self.ends {
            let key: Vec<String> = sigma.iter().map(|x| x.to_string()).collect();
            match e {
                Some((x, y)) => writeln!(f, "E({}) = {{{x}, {y}}}", key.join(","))?,
                None => writeln!(f, "E({}) = none", key.join(","))?,
            }
        }
        for (i, m) in self.marbles.iter().enumerate() {
            let body: Vec<String> = m.iter().map(|v| v.to_string()).collect();
            writeln!(f, "T{i} = [{}]", body.join(" "))?;
        }
        Ok(())
    }
}

/// A minimal segment between consecutive marbles of path `host`; `marks` is sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub host: usize,
    pub start: usize,
    pub end: usize,
    pub gap: u32,
    pub marks: Vec<usize>,
}

impl Segment {
    /// Segments with gap 1 are single edges and need no routing.
    pub fn is_trivial(&self) -> bool {
        self.gap < 2
    }

    pub fn color(&self) -> usize {
        self.marks[0]
    }
}

/// The DP instance for one color: `pairs[i]` routes `segments[i]`, oriented along the color.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorInstance {
    pub color: usize,
    pub segments: Vec<usize>,
    pub reversed: Vec<bool>,
    pub dp: DagDisjointInstance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KdspConfig {
    /// Maximum number of complete guesses evaluated.
    pub guess_budget: u64,
    /// Worker threads; 1 evaluates guesses inline.
    pub threads: usize,
    /// Guesses per parallel batch.
    pub batch: usize,
}

impl Default for KdspConfig {
    fn default() -> Self {
        KdspConfig {
            guess_budget: 20_000_000,
            threads: 1,
            batch: 512,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KdspAnswer {
    Yes(Solution),
    No,
    /// The budget ran out before the guess space was exhausted.
    Unknown,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct KdspStats {
    pub nodes: u64,
    pub guesses: u64,
    pub evaluated: u64,
    /// Wall time spent evaluating guesses (segments, DP, verification).
    pub eval_nanos: u64,
    pub complete: bool,
}

#[derive(Debug, Clone)]
pub struct KdspOutcome {
    pub answer: KdspAnswer,
    pub stats: KdspStats,
    /// The guess that produced the solution.
    pub guess: Option<CrossingGuess>,
}

/// Units in enumeration order: pairs `(i, j)` with `i < j`, then longer permutations by length
/// and lexicographically.
pub fn units(k: usize) -> Vec<PermKey> {
    let mut out = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            out.push(vec![i, j]);
        }
    }
    for h in 3..=k {
        let mut cur = Vec::new();
        perms(k, h, &mut cur, &mut out);
    }
    out
}

fn perms(k: usize, h: usize, cur: &mut Vec<usize>, out: &mut Vec<PermKey>) {
    if cur.len() == h {
        out.push(cur.clone());
        return;
    }
    for x in 0..k {
        if !cur.contains(&x) {
            cur.push(x);
            perms(k, h, cur, out);
            cur.pop();
        }
    }
}

/// A subpath of path `host` between two of its marbles.
#[derive(Debug, Clone, Copy)]
struct Range {
    host: usize,
    lo: usize,
    hi: usize,
}

#[derive(Debug, Clone)]
struct Partial {
    marbles: Vec<Vec<usize>>,
    owner: Vec<Option<usize>>,
    ends: BTreeMap<PermKey, Option<(usize, usize)>>,
    choices: BTreeMap<PermKey, UnitChoice>,
}

/// Shared read-only data of one solver run.
pub struct Context<'a> {
    inst: &'a Instance,
    pos: PositionTable,
    dist: DistanceMatrix,
    units: Vec<PermKey>,
    dags: Vec<Dag>,
}

enum Flow {
    Continue,
    Stop,
}

impl<'a> Context<'a> {
    pub fn new(inst: &'a Instance) -> Self {
        let pos = compute_positions(inst);
        let dist = DistanceMatrix::new(&inst.graph);
        let dags = (0..inst.k())
            .map(|c| build_layered_dag(&inst.graph, &pos, c))
            .collect();
        Context {
            inst,
            pos,
            dist,
            units: units(inst.k()),
            dags,
        }
    }

    pub fn positions(&self) -> &PositionTable {
        &self.pos
    }

    fn p(&self, v: usize, c: usize) -> i64 {
        self.pos.get(v, c) as i64
    }

    fn initial(&self) -> Option<Partial> {
        let n = self.inst.graph.n();
        let mut st = Partial {
            marbles: vec![Vec::new(); self.inst.k()],
            owner: vec![None; n],
            ends: BTreeMap::new(),
            choices: BTreeMap::new(),
        };
        for (i, &(s, t)) in self.inst.terminals.iter().enumerate() {
            if !self.add_marble(&mut st, i, s) || !self.add_marble(&mut st, i, t) {
                return None;
            }
        }
        Some(st)
    }

    /// `v` can join the marbles of path `r`: free or already there, and within a shortest-path chain.
    fn compatible(&self, st: &Partial, r: usize, v: usize) -> bool {
        match st.owner[v] {
            Some(o) if o == r => return true,
            Some(_) => return false,
            None => {}
        }
        let pv = self.p(v, r);
        st.marbles[r].iter().all(|&m| {
            let pm = self.p(m, r);
            pm != pv && self.dist.dist(v, m) as i64 == (pv - pm).abs()
        })
    }

    fn add_marble(&self, st: &mut Partial, r: usize, v: usize) -> bool {
        if st.owner[v] == Some(r) {
            return true;
        }
        if !self.compatible(st, r, v) {
            return false;
        }
        st.owner[v] = Some(r);
        let pv = self.p(v, r);
        let at = st.marbles[r].partition_point(|&m| self.p(m, r) < pv);
        st.marbles[r].insert(at, v);
        true
    }

    fn candidates(&self, st: &Partial, range: Range) -> Vec<usize> {
        let r = range.host;
        let (lo, hi) = (self.p(range.lo, r), self.p(range.hi, r));
        (0..self.inst.graph.n())
            .filter(|&v| {
                let pv = self.pos.get(v, r);
                (pv as i64) >= lo && (pv as i64) <= hi && self.compatible(st, r, v)
            })
            .collect()
    }

    /// P- and Q-ranges of a unit, or `None` when its endpoint set is forced empty.
    fn ranges(&self, st: &Partial, sigma: &[usize]) -> Option<(Range, Range)> {
        let h = sigma.len();
        let (lp, lq) = (sigma[h - 1], sigma[h - 2]);
        if h == 2 {
            let (sp, tp) = self.inst.terminals[lp];
            let (sq, tq) = self.inst.terminals[lq];
            return Some((
                Range {
                    host: lp,
                    lo: sp,
                    hi: tp,
                },
                Range {
                    host: lq,
                    lo: sq,
                    hi: tq,
                },
            ));
        }
        let e_end = st.ends[&sigma[1..].to_vec()]?;
        let e_start = st.ends[&sigma[..h - 1].to_vec()]?;
        let e_back = st.ends[&vec![lp, lq]]?;
        let lo = if self.p(e_start.0, lq) >= self.p(e_back.0, lq) {
            e_start.0
        } else {
            e_back.0
        };
        let hi = if self.p(e_start.1, lq) <= self.p(e_back.1, lq) {
            e_start.1
        } else {
            e_back.1
        };
        if self.p(lo, lq) > self.p(hi, lq) {
            return None;
        }
        Some((
            Range {
                host: lp,
                lo: e_end.0,
                hi: e_end.1,
            },
            Range { host: lq, lo, hi },
        ))
    }

    /// Every choice for a unit that satisfies the local necessary conditions, trivial one first.
    fn options(&self, st: &Partial, sigma: &[usize], rp: Range, rq: Range) -> Vec<UnitChoice> {
        let (a, b) = (sigma[sigma.len() - 1], sigma[0]);
        let cand_p = self.candidates(st, rp);
        let cand_q = self.candidates(st, rq);
        let proj = |v: usize| project(&self.pos, v, a, b);
        let mut by_proj_q: HashMap<Point2, Vec<usize>> = HashMap::new();
        for &v in &cand_q {
            by_proj_q.entry(proj(v)).or_default().push(v);
        }
        let in_p: Vec<bool> = mask(self.inst.graph.n(), &cand_p);
        let in_q: Vec<bool> = mask(self.inst.graph.n(), &cand_q);
        let mut out = Vec::new();

        let deltas_p = self.delta_candidates(&cand_p, (rq.lo, rq.hi), a, b);
        let deltas_q = self.delta_candidates(&cand_q, (rp.lo, rp.hi), b, a);
        for dp in std::iter::once(None).chain(deltas_p.iter().copied().map(Some)) {
            for dq in std::iter::once(None).chain(deltas_q.iter().copied().map(Some)) {
                let mut c = UnitChoice::default();
                c.p[DELTA] = dp;
                c.q[DELTA] = dq;
                out.push(c);
            }
        }

        // Crossing in a single edge midpoint.
        for &u in &cand_p {
            for w in self.step(u, rp.host, 1, &in_p) {
                let (pu, pw) = (proj(u), proj(w));
                if (pu.1 - pw.1).abs() != 1 {
                    continue;
                }
                let corners = [(pu.0, pw.1), (pw.0, pu.1)];
                for (c1, c2) in [(corners[0], corners[1]), (corners[1], corners[0])] {
                    for &x in by_proj_q.get(&c1).into_iter().flatten() {
                        for y in self.step(x, rq.host, 1, &in_q) {
                            if proj(y) == c2 {
                                let mut c = UnitChoice::default();
                                c.p[PARTIAL] = Some(u);
                                c.p[VARPI] = Some(w);
                                c.q[PARTIAL] = Some(x);
                                c.q[VARPI] = Some(y);
                                out.push(c);
                            }
                        }
                    }
                }
            }
        }

        // Crossing along a lattice segment.
        for &ap in &cand_p {
            for &wp in &cand_p {
                let d = self.p(wp, rp.host) - self.p(ap, rp.host);
                if d < 0 || self.dist.dist(ap, wp) as i64 != d {
                    continue;
                }
                let (pa, pw) = (proj(ap), proj(wp));
                if (pa.0 - pw.0).abs() != d || (pa.1 - pw.1).abs() != d {
                    continue;
                }
                let mut q_ends = Vec::new();
                let orders: &[(Point2, Point2)] = if d == 0 {
                    &[(pa, pa)]
                } else {
                    &[(pa, pw), (pw, pa)]
                };
                for &(fa, fw) in orders {
                    for &aq in by_proj_q.get(&fa).into_iter().flatten() {
                        for &wq in by_proj_q.get(&fw).into_iter().flatten() {
                            let dq = self.p(wq, rq.host) - self.p(aq, rq.host);
                            if dq == d && self.dist.dist(aq, wq) as i64 == d {
                                q_ends.push((aq, wq));
                            }
                        }
                    }
                }
                if q_ends.is_empty() {
                    continue;
                }
                let outside = |v: usize| !rect_contains_2d(pa, pw, proj(v));
                let before_p = self.flank(ap, rp.lo, rp.host, -1, &in_p, &outside);
                let after_p = self.flank(wp, rp.hi, rp.host, 1, &in_p, &outside);
                for &(aq, wq) in &q_ends {
                    let before_q = self.flank(aq, rq.lo, rq.host, -1, &in_q, &outside);
                    let after_q = self.flank(wq, rq.hi, rq.host, 1, &in_q, &outside);
                    for &bp in &before_p {
                        for &fp in &after_p {
                            for &bq in &before_q {
                                for &fq in &after_q {
                                    let mut c = UnitChoice::default();
                                    c.p[..4].copy_from_slice(&[Some(ap), Some(wp), bp, fp]);
                                    c.q[..4].copy_from_slice(&[Some(aq), Some(wq), bq, fq]);
                                    out.push(c);
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn delta_candidates(
        &self,
        cand: &[usize],
        ends: (usize, usize),
        a: usize,
        b: usize,
    ) -> Vec<usize> {
        let (mut s, mut t) = ends;
        if self.p(s, b) > self.p(t, b) {
            std::mem::swap(&mut s, &mut t);
        }
        cand.iter()
            .copied()
            .filter(|&v| {
                (self.p(v, a) == self.p(s, a) && self.p(v, b) < self.p(s, b))
                    || (self.p(v, a) == self.p(t, a) && self.p(v, b) > self.p(t, b))
            })
            .collect()
    }

    /// Neighbours of `v` one step further along path coordinate `r`, restricted to `allowed`.
    fn step<'b>(
        &'b self,
        v: usize,
        r: usize,
        dir: i64,
        allowed: &'b [bool],
    ) -> impl Iterator<Item = usize> + 'b {
        let target = self.p(v, r) + dir;
        self.inst
            .graph
            .neighbors(v)
            .iter()
            .copied()
            .filter(move |&w| allowed[w] && self.p(w, r) == target)
    }

    /// Choices for the vertex just outside a crossing segment: none at the range end.
    fn flank(
        &self,
        v: usize,
        end: usize,
        r: usize,
        dir: i64,
        allowed: &[bool],
        outside: &dyn Fn(usize) -> bool,
    ) -> Vec<Option<usize>> {
        if v == end {
            return vec![None];
        }
        self.step(v, r, dir, allowed)
            .filter(|&w| outside(w))
            .map(Some)
            .collect()
    }

    fn apply(
        &self,
        st: &Partial,
        sigma: &[usize],
        rp: Range,
        rq: Range,
        c: &UnitChoice,
    ) -> Option<Partial> {
        let mut next = st.clone();
        for v in c.p.iter().flatten() {
            if !self.add_marble(&mut next, rp.host, *v) {
                return None;
            }
        }
        for v in c.q.iter().flatten() {
            if !self.add_marble(&mut next, rq.host, *v) {
                return None;
            }
        }
        let e_p = c.p[ALPHA].zip(c.p[OMEGA]);
        if let Some((x, y)) = e_p {
            if !pair_colored_in(&self.pos, &self.dist, x, y, sigma) {
                return None;
            }
        }
        next.ends.insert(sigma.to_vec(), e_p);
        if sigma.len() == 2 {
            next.ends
                .insert(vec![sigma[1], sigma[0]], c.q[ALPHA].zip(c.q[OMEGA]));
        }
        next.choices.insert(sigma.to_vec(), *c);
        Some(next)
    }

    fn forced_empty(&self, st: &Partial, sigma: &[usize]) -> Partial {
        let mut next = st.clone();
        next.ends.insert(sigma.to_vec(), None);
        next.choices.insert(sigma.to_vec(), UnitChoice::default());
        next
    }

    fn dfs(
        &self,
        depth: usize,
        st: &Partial,
        target: Option<&CrossingGuess>,
        stats: &mut KdspStats,
        budget: u64,
        leaf: &mut dyn FnMut(CrossingGuess) -> Flow,
    ) -> Flow {
        stats.nodes += 1;
        if depth == self.units.len() {
            if stats.guesses >= budget {
                stats.complete = false;
                return Flow::Stop;
            }
            stats.guesses += 1;
            let guess = CrossingGuess {
                choices: st.choices.clone(),
                ends: st.ends.clone(),
                marbles: st.marbles.clone(),
            };
            return leaf(guess);
        }
        let sigma = &self.units[depth];
        let Some((rp, rq)) = self.ranges(st, sigma) else {
            if target.is_some_and(|t| t.choices.get(sigma).is_some_and(|c| !c.is_empty())) {
                return Flow::Continue;
            }
            return self.dfs(
                depth + 1,
                &self.forced_empty(st, sigma),
                target,
                stats,
                budget,
                leaf,
            );
        };
        for c in self.options(st, sigma, rp, rq) {
            if target.is_some_and(|t| t.choices.get(sigma) != Some(&c)) {
                continue;
            }
            if let Some(next) = self.apply(st, sigma, rp, rq, &c) {
                if let Flow::Stop = self.dfs(depth + 1, &next, target, stats, budget, leaf) {
                    return Flow::Stop;
                }
            }
        }
        Flow::Continue
    }

    /// Runs the enumeration, handing every complete guess to `leaf`.
    fn enumerate(
        &self,
        target: Option<&CrossingGuess>,
        budget: u64,
        leaf: &mut dyn FnMut(CrossingGuess) -> Flow,
    ) -> KdspStats {
        let mut stats = KdspStats {
            complete: true,
            ..Default::default()
        };
        if let Some(st) = self.initial() {
            self.dfs(0, &st, target, &mut stats, budget, leaf);
        }
        stats
    }

    /// Minimal segments of every path with their marks, trivial ones included.
    pub fn all_segments(&self, guess: &CrossingGuess) -> Vec<Segment> {
        let mut out = Vec::new();
        for (r, m) in guess.marbles.iter().enumerate() {
            for w in m.windows(2) {
                let (u, v) = (w[0], w[1]);
                let (pu, pv) = (self.p(u, r), self.p(v, r));
                let mut marks = vec![r];
                for (sigma, e) in &guess.ends {
                    let Some((x, y)) = *e else { continue };
                    if sigma[sigma.len() - 1] == r && self.p(x, r) <= pu && pv <= self.p(y, r) {
                        marks.extend_from_slice(sigma);
                    }
                }
                marks.sort_unstable();
                marks.dedup();
                out.push(Segment {
                    host: r,
                    start: u,
                    end: v,
                    gap: (pv - pu) as u32,
                    marks,
                });
            }
        }
        out
    }

    /// Segment-level checks: edges for gap 1, coloring in every mark otherwise.
    fn segments_consistent(&self, segs: &[Segment]) -> bool {
        segs.iter().all(|s| {
            if s.is_trivial() {
                self.inst.graph.has_edge(s.start, s.end)
            } else {
                pair_colored_in(&self.pos, &self.dist, s.start, s.end, &s.marks)
            }
        })
    }

    /// Nontrivial minimal segments; errors if one is not colored in all of its marks.
    pub fn derive_segments_and_marks(
        &self,
        guess: &CrossingGuess,
    ) -> Result<Vec<Segment>, SolveError> {
        let segs: Vec<Segment> = self
            .all_segments(guess)
            .into_iter()
            .filter(|s| !s.is_trivial())
            .collect();
        if let Some(s) = segs
            .iter()
            .find(|s| !pair_colored_in(&self.pos, &self.dist, s.start, s.end, &s.marks))
        {
            return Err(SolveError::Precondition(format!(
                "segment {}-{} of path {} is not colored in {:?}",
                s.start, s.end, s.host, s.marks
            )));
        }
        Ok(segs)
    }

    /// One DP instance per color that owns a nontrivial segment, pairs sorted along the color.
    pub fn assemble_color_instances(
        &self,
        guess: &CrossingGuess,
        segs: &[Segment],
    ) -> Vec<ColorInstance> {
        let mut out = self.color_instances(guess, segs);
        for ci in out.iter_mut() {
            let j = ci.color;
            let mut idx: Vec<usize> = (0..ci.dp.pairs.len()).collect();
            idx.sort_by_key(|&i| (self.p(ci.dp.pairs[i].0, j), ci.dp.pairs[i].0));
            ci.segments = idx.iter().map(|&i| ci.segments[i]).collect();
            ci.reversed = idx.iter().map(|&i| ci.reversed[i]).collect();
            ci.dp.pairs = idx.iter().map(|&i| ci.dp.pairs[i]).collect();
        }
        out
    }

    fn color_instances(&self, guess: &CrossingGuess, segs: &[Segment]) -> Vec<ColorInstance> {
        let blocked: Vec<usize> = guess.marbles.iter().flatten().copied().collect();
        let mut groups: BTreeMap<usize, ColorInstance> = BTreeMap::new();
        for (i, s) in segs.iter().enumerate() {
            if s.is_trivial() {
                continue;
            }
            let j = s.color();
            let g = groups.entry(j).or_insert_with(|| ColorInstance {
                color: j,
                segments: Vec::new(),
                reversed: Vec::new(),
                dp: DagDisjointInstance {
                    pairs: Vec::new(),
                    blocked: blocked.clone(),
                },
            });
            let rev = self.p(s.start, j) > self.p(s.end, j);
            g.segments.push(i);
            g.reversed.push(rev);
            g.dp.pairs.push(if rev {
                (s.end, s.start)
            } else {
                (s.start, s.end)
            });
        }
        groups.into_values().collect()
    }

    /// Routes one guess. Colors are solved in increasing order, each also avoiding the vertices
    /// taken by earlier colors.
    pub fn evaluate(&self, guess: &CrossingGuess) -> Option<Solution> {
        let segs = self.all_segments(guess);
        if !self.segments_consistent(&segs) {
            return None;
        }
        let mut routed: Vec<Option<Vec<usize>>> = vec![None; segs.len()];
        let mut used: Vec<usize> = Vec::new();
        for mut ci in self.assemble_color_instances(guess, &segs) {
            ci.dp.blocked.extend_from_slice(&used);
            let paths = disjoint_paths_dag(&self.dags[ci.color], &ci.dp)?;
            for ((&si, &rev), mut p) in ci.segments.iter().zip(&ci.reversed).zip(paths) {
                used.extend_from_slice(&p[1..p.len() - 1]);
                if rev {
                    p.reverse();
                }
                routed[si] = Some(p);
            }
        }
        let mut paths: Vec<Vec<usize>> = guess.marbles.iter().map(|m| vec![m[0]]).collect();
        for (s, r) in segs.iter().zip(routed) {
            match r {
                Some(p) => paths[s.host].extend_from_slice(&p[1..]),
                None => paths[s.host].push(s.end),
            }
        }
        let sol = Solution {
            paths: paths.into_iter().map(Path).collect(),
        };
        verify_solution(self.inst, &self.pos, &sol)
            .ok()
            .map(|_| sol)
    }

    /// Calls `f` on every guess in stream order until it returns false or the budget runs out.
    /// Returns whether the stream was exhausted.
    pub fn enumerate_crossing_guesses(
        &self,
        budget: u64,
        f: &mut dyn FnMut(&CrossingGuess) -> bool,
    ) -> bool {
        let mut stopped = false;
        let stats = self.enumerate(None, budget, &mut |g| {
            if f(&g) {
                Flow::Continue
            } else {
                stopped = true;
                Flow::Stop
            }
        });
        stats.complete && !stopped
    }

    /// Whether `target` occurs in the complete guess stream.
    pub fn admits(&self, target: &CrossingGuess) -> bool {
        let mut found = false;
        self.enumerate(Some(target), u64::MAX, &mut |g| {
            if g == *target {
                found = true;
                Flow::Stop
            } else {
                Flow::Continue
            }
        });
        found
    }
}

fn mask(n: usize, vs: &[usize]) -> Vec<bool> {
    let mut m = vec![false; n];
    for &v in vs {
        m[v] = true;
    }
    m
}

/// Runs the guessing solver. `No` is only reported once every guess has been tried.
pub fn solve_kdsp(instance: &Instance, config: &KdspConfig) -> Result<KdspOutcome, SolveError> {
    let ctx = Context::new(instance);
    if ctx.pos.any_pair_unreachable(instance) {
        let stats = KdspStats {
            complete: true,
            ..Default::default()
        };
        return Ok(KdspOutcome {
            answer: KdspAnswer::No,
            stats,
            guess: None,
        });
    }
    let pool = if config.threads > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(config.threads)
                .build()
                .map_err(|e| SolveError::Precondition(format!("thread pool: {e}")))?,
        )
    } else {
        None
    };
    let batch_size = if pool.is_some() {
        config.batch.max(1)
    } else {
        1
    };
    let mut batch: Vec<CrossingGuess> = Vec::with_capacity(batch_size);
    let mut found: Option<(CrossingGuess, Solution)> = None;
    let mut evaluated = 0u64;
    let mut eval_nanos = 0u64;
    let mut flush = |batch: &mut Vec<CrossingGuess>,
                     found: &mut Option<(CrossingGuess, Solution)>| {
        evaluated += batch.len() as u64;
        let started = std::time::Instant::now();
        let results: Vec<Option<Solution>> = match &pool {
            Some(p) => p.install(|| batch.par_iter().map(|g| ctx.evaluate(g)).collect()),
            None => batch.iter().map(|g| ctx.evaluate(g)).collect(),
        };
        eval_nanos += started.elapsed().as_nanos() as u64;
        if let Some(i) = results.iter().position(Option::is_some) {
            let sol = results
                .into_iter()
                .nth(i)
                .flatten()
                .expect("position found a solution");
            *found = Some((batch.swap_remove(i), sol));
        }
        batch.clear();
    };
    let mut stats = ctx.enumerate(None, config.guess_budget, &mut |g| {
        batch.push(g);
        if batch.len() >= batch_size {
            flush(&mut batch, &mut found);
            if found.is_some() {
                return Flow::Stop;
            }
        }
        Flow::Continue
    });
    if found.is_none() && !batch.is_empty() {
        flush(&mut batch, &mut found);
    }
    stats.evaluated = evaluated;
    stats.eval_nanos = eval_nanos;
    let outcome = match found {
        Some((guess, sol)) => KdspOutcome {
            answer: KdspAnswer::Yes(sol),
            stats,
            guess: Some(guess),
        },
        None if stats.complete => KdspOutcome {
            answer: KdspAnswer::No,
            stats,
            guess: None,
        },
        None => KdspOutcome {
            answer: KdspAnswer::Unknown,
            stats,
            guess: None,
        },
    };
    Ok(outcome)
}

/// The crossing set a concrete solution induces, unit by unit.
pub fn induced_guess(
    instance: &Instance,
    pos: &PositionTable,
    solution: &Solution,
) -> Result<CrossingGuess, SolveError> {
    let k = instance.k();
    let paths: Vec<&[usize]> = solution.paths.iter().map(|p| p.vertices()).collect();
    let index = |r: usize, v: usize| {
        paths[r]
            .iter()
            .position(|&x| x == v)
            .expect("endpoint on its path")
    };
    let mut ends: BTreeMap<PermKey, Option<(usize, usize)>> = BTreeMap::new();
    let mut choices = BTreeMap::new();
    let mut on_path: Vec<Vec<usize>> = paths.iter().map(|p| vec![p[0], p[p.len() - 1]]).collect();
    for sigma in units(k) {
        let h = sigma.len();
        let (lp, lq) = (sigma[h - 1], sigma[h - 2]);
        let sub = if h == 2 {
            Some((paths[lp], paths[lq]))
        } else {
            let e_end = ends[&sigma[1..].to_vec()];
            let e_start = ends[&sigma[..h - 1].to_vec()];
            let e_back = ends[&vec![lp, lq]];
            match (e_end, e_start, e_back) {
                (Some(pe), Some(se), Some(be)) => {
                    let lo = index(lq, se.0).max(index(lq, be.0));
                    let hi = index(lq, se.1).min(index(lq, be.1));
                    (lo <= hi).then(|| {
                        (
                            &paths[lp][index(lp, pe.0)..=index(lp, pe.1)],
                            &paths[lq][lo..=hi],
                        )
                    })
                }
                _ => None,
            }
        };
        let Some((p, q)) = sub else {
            ends.insert(sigma.clone(), None);
            choices.insert(sigma, UnitChoice::default());
            continue;
        };
        let rec = crossing_vertices(p, q, lp, sigma[0], pos)?;
        let c = UnitChoice::from_record(&rec);
        on_path[lp].extend(c.p.iter().flatten());
        on_path[lq].extend(c.q.iter().flatten());
        ends.insert(sigma.clone(), c.p[ALPHA].zip(c.p[OMEGA]));
        if h == 2 {
            ends.insert(vec![lp, lq], c.q[ALPHA].zip(c.q[OMEGA]));
        }
        choices.insert(sigma, c);
    }
    let marbles = on_path
        .into_iter()
        .enumerate()
        .map(|(r, mut m)| {
            m.sort_by_key(|&v| index(r, v));
            m.dedup();
            m
        })
        .collect();
    Ok(CrossingGuess {
        choices,
        ends,
        marbles,
    })
}

/// For each minimal segment of the induced guess: the first index of every permutation ending
/// at the host whose endpoint range contains the segment.
pub fn labels(instance: &Instance, solution: &Solution, guess: &CrossingGuess) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for (r, m) in guess.marbles.iter().enumerate() {
        let path = solution.paths[r].vertices();
        let idx = |v: usize| path.iter().position(|&x| x == v).expect("marble on path");
        for w in m.windows(2) {
            let (u, v) = (idx(w[0]), idx(w[1]));
            let mut lab = vec![r];
            for (sigma, e) in &guess.ends {
                if let Some((x, y)) = *e {
                    if sigma[sigma.len() - 1] == r && idx(x) <= u && v <= idx(y) {
                        lab.push(sigma[0]);
                    }
                }
            }
            lab.sort_unstable();
            lab.dedup();
            out.push(lab);
        }
    }
    let _ = instance;
    out
}
