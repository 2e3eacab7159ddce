//! Two disjoint shortest paths in `O(n^2 m)`.
//!
//! Every branch fixes, for each pair `i`, a list of zones (2D rectangle areas in the
//! `(pos^1, pos^2)` plane). Pair `i` may use the arc `v -> w` when `{v, w}` is an edge,
//! `pos w^i = pos v^i + 1` and both endpoints lie in the union of its zones. Branches are:
//!
//! * `Avoiding`: the pairs avoid each other, one zone each.
//! * `Noncrossing`: a vertex `delta` on one path splits that path's zone in two.
//! * `Fractional`: the drawings cross in the middle of a unit square; both paths take a diagonal.
//! * `Integer`: both paths pass the lattice point `p`; the two anti-diagonal rays through `p`
//!   are handed to one pair each. With `opposite`, the paths share an anti-diagonal segment
//!   starting at `p` in opposite directions, and pair 2 is routed backwards from `t_2`.
//!
//! All of them are also tried with `s_2` and `t_2` exchanged. Every candidate is verified.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use crate::error::SolveError;
use crate::geometry::{avoiding_2d, project, rect_contains_2d, Point2};
use crate::graph::{
    compute_positions, verify_solution, Instance, Path, PositionTable, Solution, UNREACHABLE,
};
use crate::layered_dag::{build_layered_dag, dag_path, two_disjoint_paths_dag_fast, LabelledDag};

/// A branch of the solver together with its guessed witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Dsp2Case {
    Avoiding,
    /// `delta` lies on the path of pair `host`.
    Noncrossing {
        delta: usize,
        host: usize,
    },
    /// `[p_s1, p_t1, p_s2, p_t2]`: the unit square entered and left by both paths.
    Fractional {
        corners: [Point2; 4],
    },
    /// `orientation[0]` receives the edges on `A_1 ∩ B_2`, `orientation[1]` those on `A_2 ∩ B_1`;
    /// `None` leaves them to both pairs.
    Integer {
        p: Point2,
        orientation: [Option<usize>; 2],
        opposite: bool,
    },
}

/// Case labels used for coverage counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseTag {
    Avoiding,
    Noncrossing,
    Fractional,
    Integer,
}

impl CaseTag {
    pub const ALL: [CaseTag; 4] = [
        CaseTag::Avoiding,
        CaseTag::Noncrossing,
        CaseTag::Fractional,
        CaseTag::Integer,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CaseTag::Avoiding => "AVOIDING",
            CaseTag::Noncrossing => "NONCROSSING",
            CaseTag::Fractional => "FRACTIONAL",
            CaseTag::Integer => "INTEGER",
        }
    }
}

impl Dsp2Case {
    pub fn tag(&self) -> CaseTag {
        match self {
            Dsp2Case::Avoiding => CaseTag::Avoiding,
            Dsp2Case::Noncrossing { .. } => CaseTag::Noncrossing,
            Dsp2Case::Fractional { .. } => CaseTag::Fractional,
            Dsp2Case::Integer { .. } => CaseTag::Integer,
        }
    }
}

impl fmt::Display for Dsp2Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tag().name())?;
        match self {
            Dsp2Case::Avoiding => Ok(()),
            Dsp2Case::Noncrossing { delta, host } => {
                write!(f, " delta={delta} on_path={}", host + 1)
            }
            Dsp2Case::Fractional { corners } => write!(
                f,
                " p_s1={:?} p_t1={:?} p_s2={:?} p_t2={:?}",
                corners[0], corners[1], corners[2], corners[3]
            ),
            Dsp2Case::Integer {
                p,
                orientation,
                opposite,
            } => {
                let o =
                    |x: Option<usize>| x.map_or("both".to_string(), |i| format!("path{}", i + 1));
                write!(
                    f,
                    " p={p:?} A1B2->{} A2B1->{} opposite={opposite}",
                    o(orientation[0]),
                    o(orientation[1])
                )
            }
        }
    }
}

/// Branch counters of one `solve_dsp2` run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dsp2Stats {
    pub branches: [usize; 4],
    /// `Integer` branches whose arc union had a cycle and were skipped.
    pub cyclic: usize,
}

/// Full result: the solution, the branch that produced it, and counters.
#[derive(Debug, Clone, Default)]
pub struct Dsp2Outcome {
    pub solution: Option<Solution>,
    pub case: Option<Dsp2Case>,
    /// The winning branch ran on the instance with `s_2` and `t_2` exchanged.
    pub swapped: bool,
    pub stats: Dsp2Stats,
}

/// Per-pair arc lists of a branch.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OrientedArcs {
    pub arcs: [Vec<(usize, usize)>; 2],
}

impl OrientedArcs {
    pub fn is_empty(&self) -> bool {
        self.arcs.iter().all(Vec::is_empty)
    }

    /// The arcs as a labelled DAG, `None` if their union has a cycle.
    pub fn to_dag(&self, n: usize) -> Option<LabelledDag> {
        LabelledDag::new(n, &self.arcs)
    }

    fn adjacency(&self, n: usize, pair: usize) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &self.arcs[pair] {
            adj[u].push(v);
        }
        for l in adj.iter_mut() {
            l.sort_unstable();
        }
        adj
    }
}

/// A region given as the intersection of two areas, owned by one pair.
type Exclusive = ((Point2, Point2), (Point2, Point2), usize);

struct Plane<'a> {
    inst: &'a Instance,
    pt: Vec<Option<Point2>>,
}

impl<'a> Plane<'a> {
    fn new(inst: &'a Instance, pos: &'a PositionTable) -> Self {
        let pt = (0..inst.graph.n())
            .map(|v| pos.reachable(v).then(|| project(pos, v, 0, 1)))
            .collect();
        Plane { inst, pt }
    }

    fn s(&self, i: usize) -> Point2 {
        self.pt[self.inst.terminals[i].0].expect("terminals are reachable")
    }

    fn t(&self, i: usize) -> Point2 {
        self.pt[self.inst.terminals[i].1].expect("terminals are reachable")
    }

    fn coord(p: Point2, i: usize) -> i64 {
        if i == 0 {
            p.0
        } else {
            p.1
        }
    }

    fn in_zones(zones: &[(Point2, Point2)], z: Point2) -> bool {
        zones.iter().any(|&(x, y)| rect_contains_2d(x, y, z))
    }

    /// Arcs allowed by `zones[i]` for pair `i`; `exclusive` lists areas whose edges go to one pair only.
    fn arcs(
        &self,
        zones: &[Vec<(Point2, Point2)>; 2],
        exclusive: &[Exclusive],
        dir: [i64; 2],
    ) -> OrientedArcs {
        let mut out = OrientedArcs::default();
        for (u, w) in self.inst.graph.edges() {
            let (Some(pu), Some(pw)) = (self.pt[u], self.pt[w]) else {
                continue;
            };
            let owner = exclusive.iter().find_map(|&(r1, r2, who)| {
                let inside =
                    |z: Point2| rect_contains_2d(r1.0, r1.1, z) && rect_contains_2d(r2.0, r2.1, z);
                (inside(pu) && inside(pw)).then_some(who)
            });
            for i in 0..2 {
                if owner.is_some_and(|o| o != i) {
                    continue;
                }
                if !(Self::in_zones(&zones[i], pu) && Self::in_zones(&zones[i], pw)) {
                    continue;
                }
                let (cu, cw) = (Self::coord(pu, i), Self::coord(pw, i));
                if cw == cu + dir[i] {
                    out.arcs[i].push((u, w));
                } else if cu == cw + dir[i] {
                    out.arcs[i].push((w, u));
                }
            }
        }
        out
    }

    fn full_zones(&self) -> [Vec<(Point2, Point2)>; 2] {
        [vec![(self.s(0), self.t(0))], vec![(self.s(1), self.t(1))]]
    }
}

/// The per-pair arc sets prescribed by `case` on positions `pos`.
///
/// Returns empty arc sets when the witness is inconsistent with the terminals' rectangles.
pub fn oriented_crossing_dag(
    instance: &Instance,
    pos: &PositionTable,
    case: &Dsp2Case,
) -> OrientedArcs {
    let plane = Plane::new(instance, pos);
    if instance
        .terminals
        .iter()
        .any(|&(s, t)| plane.pt[s].is_none() || plane.pt[t].is_none())
    {
        return OrientedArcs::default();
    }
    oriented_arcs(&plane, case).unwrap_or_default()
}

fn oriented_arcs(plane: &Plane<'_>, case: &Dsp2Case) -> Option<OrientedArcs> {
    let (s, t) = ([plane.s(0), plane.s(1)], [plane.t(0), plane.t(1)]);
    let within = |i: usize, z: Point2| rect_contains_2d(s[i], t[i], z);
    match *case {
        Dsp2Case::Avoiding => Some(plane.arcs(&plane.full_zones(), &[], [1, 1])),
        Dsp2Case::Noncrossing { delta, host } => {
            let d = plane.pt.get(delta).copied().flatten()?;
            if !within(host, d) {
                return None;
            }
            let mut zones = plane.full_zones();
            zones[host] = vec![(s[host], d), (d, t[host])];
            Some(plane.arcs(&zones, &[], [1, 1]))
        }
        Dsp2Case::Fractional { corners } => {
            let [ps1, pt1, ps2, pt2] = corners;
            if !(within(0, ps1) && within(0, pt1) && within(1, ps2) && within(1, pt2)) {
                return None;
            }
            let zones = [
                vec![(s[0], ps1), (pt1, t[0])],
                vec![(s[1], ps2), (pt2, t[1])],
            ];
            Some(plane.arcs(&zones, &[], [1, 1]))
        }
        Dsp2Case::Integer {
            p,
            orientation,
            opposite,
        } => {
            if !(within(0, p) && within(1, p)) {
                return None;
            }
            let zones = [vec![(s[0], p), (p, t[0])], vec![(s[1], p), (p, t[1])]];
            let a = |i: usize| (s[i], p);
            let b = |i: usize| (p, t[i]);
            let mut exclusive: Vec<Exclusive> = [(a(0), b(1)), (a(1), b(0))]
                .into_iter()
                .zip(orientation)
                .filter_map(|((r1, r2), who)| who.map(|w| (r1, r2, w)))
                .collect();
            if opposite {
                // Pair 2 never meets the diagonal below `p`, pair 1 never the one above.
                exclusive.push((a(0), a(1), 0));
                exclusive.push((b(0), b(1), 1));
            }
            let dir = [1, if opposite { -1 } else { 1 }];
            Some(plane.arcs(&zones, &exclusive, dir))
        }
    }
}

fn bfs_route(adj: &[Vec<usize>], s: usize, t: usize, forbidden: &[bool]) -> Option<Vec<usize>> {
    let mut prev = vec![usize::MAX; adj.len()];
    prev[s] = s;
    let mut queue = VecDeque::from([s]);
    while let Some(v) = queue.pop_front() {
        if v == t {
            let mut path = vec![t];
            let mut x = t;
            while x != s {
                x = prev[x];
                path.push(x);
            }
            path.reverse();
            return Some(path);
        }
        for &w in &adj[v] {
            if prev[w] == usize::MAX && (w == t || !forbidden[w]) {
                prev[w] = v;
                queue.push_back(w);
            }
        }
    }
    None
}

/// One BFS per pair, the second avoiding the first; both orders are tried.
fn solve_by_bfs(inst: &Instance, arcs: &OrientedArcs) -> Option<[Vec<usize>; 2]> {
    let n = inst.graph.n();
    let adj = [arcs.adjacency(n, 0), arcs.adjacency(n, 1)];
    for first in [0, 1] {
        let second = 1 - first;
        let mut forbidden = vec![false; n];
        let (s2, t2) = inst.terminals[second];
        forbidden[s2] = true;
        forbidden[t2] = true;
        let (sa, ta) = inst.terminals[first];
        let Some(pa) = bfs_route(&adj[first], sa, ta, &forbidden) else {
            continue;
        };
        let mut forbidden = vec![false; n];
        for &v in &pa {
            forbidden[v] = true;
        }
        let Some(pb) = bfs_route(&adj[second], s2, t2, &forbidden) else {
            continue;
        };
        let mut out = [Vec::new(), Vec::new()];
        out[first] = pa;
        out[second] = pb;
        return Some(out);
    }
    None
}

fn solve_branch(
    plane: &Plane<'_>,
    case: &Dsp2Case,
    stats: &mut Dsp2Stats,
) -> Option<[Vec<usize>; 2]> {
    let tag = case.tag();
    stats.branches[CaseTag::ALL.iter().position(|&t| t == tag).unwrap()] += 1;
    let arcs = oriented_arcs(plane, case)?;
    if tag != CaseTag::Integer {
        return solve_by_bfs(plane.inst, &arcs);
    }
    let Some(dag) = arcs.to_dag(plane.inst.graph.n()) else {
        stats.cyclic += 1;
        return None;
    };
    let [p1, (s2, t2)] = [plane.inst.terminals[0], plane.inst.terminals[1]];
    if matches!(case, Dsp2Case::Integer { opposite: true, .. }) {
        let (a, mut b) = two_disjoint_paths_dag_fast(&dag, p1, (t2, s2), &[])?;
        b.reverse();
        return Some([a, b]);
    }
    two_disjoint_paths_dag_fast(&dag, p1, (s2, t2), &[]).map(|(a, b)| [a, b])
}

/// Candidate branches in evaluation order.
fn branches(plane: &Plane<'_>) -> Vec<Dsp2Case> {
    let inst = plane.inst;
    let n = inst.graph.n();
    let (s, t) = ([plane.s(0), plane.s(1)], [plane.t(0), plane.t(1)]);
    let within = |i: usize, z: Point2| rect_contains_2d(s[i], t[i], z);
    let mut out = Vec::new();
    if avoiding_2d((s[0], t[0]), (s[1], t[1])) {
        out.push(Dsp2Case::Avoiding);
    }

    // delta on the path of `host`: aligned with the far end of the other pair in the host coordinate.
    let mut seen = HashSet::new();
    for v in 0..n {
        let Some(pv) = plane.pt[v] else { continue };
        for host in 0..2 {
            let other = 1 - host;
            let aligned = Plane::coord(pv, host) == Plane::coord(t[other], host);
            let beyond = Plane::coord(pv, other) > Plane::coord(t[other], other);
            if aligned && beyond && within(host, pv) && seen.insert((host, pv)) {
                out.push(Dsp2Case::Noncrossing { delta: v, host });
            }
        }
    }

    let mut seen = HashSet::new();
    for v in 0..n {
        let Some(ps1) = plane.pt[v] else { continue };
        if !within(0, ps1) {
            continue;
        }
        for dy in [1, -1] {
            let pt1 = (ps1.0 + 1, ps1.1 + dy);
            let (ps2, pt2) = if dy == 1 {
                ((ps1.0 + 1, ps1.1), (ps1.0, ps1.1 + 1))
            } else {
                ((ps1.0, ps1.1 - 1), (ps1.0 + 1, ps1.1))
            };
            if within(0, pt1) && within(1, ps2) && within(1, pt2) && seen.insert((ps1, dy)) {
                out.push(Dsp2Case::Fractional {
                    corners: [ps1, pt1, ps2, pt2],
                });
            }
        }
    }

    let mut count = std::collections::HashMap::new();
    for v in 0..n {
        if let Some(p) = plane.pt[v] {
            *count.entry(p).or_insert(0usize) += 1;
        }
    }
    let mut seen = HashSet::new();
    for v in 0..n {
        let Some(p) = plane.pt[v] else { continue };
        if count[&p] >= 2 && within(0, p) && within(1, p) && seen.insert(p) {
            for orientation in [[0, 1], [0, 0], [1, 1], [1, 0]] {
                let orientation = orientation.map(Some);
                out.push(Dsp2Case::Integer {
                    p,
                    orientation,
                    opposite: false,
                });
            }
            for o in [0, 1] {
                out.push(Dsp2Case::Integer {
                    p,
                    orientation: [Some(o), None],
                    opposite: true,
                });
            }
        }
    }
    out
}

/// Solves 2-DSP. Errors only when `k != 2`.
pub fn solve_dsp2(instance: &Instance) -> Result<Option<Solution>, SolveError> {
    Ok(solve_dsp2_traced(instance)?.solution)
}

/// `solve_dsp2` with the winning branch and branch counters.
pub fn solve_dsp2_traced(instance: &Instance) -> Result<Dsp2Outcome, SolveError> {
    if instance.k() != 2 {
        return Err(SolveError::WrongK {
            expected: 2,
            found: instance.k(),
        });
    }
    let pos = compute_positions(instance);
    let mut outcome = Dsp2Outcome::default();
    if pos.any_pair_unreachable(instance) {
        return Ok(outcome);
    }
    for i in 0..2 {
        let (s, t) = instance.terminals[i];
        assert_eq!(
            pos.get(t, i),
            pos.pair_distance(instance, i),
            "terminal pair {i} must be colored"
        );
        debug_assert_eq!(pos.get(s, i), 0);
    }
    if pos.get(instance.terminals[0].0, 1) == UNREACHABLE {
        // Different components: each pair is routed on its own.
        outcome.stats.branches[0] += 1;
        let mut paths = Vec::new();
        for i in 0..2 {
            let (s, t) = instance.terminals[i];
            let dag = build_layered_dag(&instance.graph, &pos, i);
            let path = dag_path(&dag, 0, s, t, &vec![false; instance.graph.n()])
                .expect("pair is connected");
            paths.push(Path(path));
        }
        let sol = Solution { paths };
        assert_eq!(verify_solution(instance, &pos, &sol), Ok(()));
        outcome.solution = Some(sol);
        outcome.case = Some(Dsp2Case::Avoiding);
        return Ok(outcome);
    }
    let plane = Plane::new(instance, &pos);
    let accept = |paths: [Vec<usize>; 2], reverse_second: bool| -> Option<Solution> {
        let [a, b] = paths;
        let b = if reverse_second {
            b.into_iter().rev().collect()
        } else {
            b
        };
        let sol = Solution {
            paths: vec![Path(a), Path(b)],
        };
        verify_solution(instance, &pos, &sol).is_ok().then_some(sol)
    };

    let (s2, t2) = instance.terminals[1];
    let swapped = Instance::new(
        instance.graph.clone(),
        vec![instance.terminals[0], (t2, s2)],
    )
    .expect("exchanging a pair keeps terminals distinct");
    let swapped_pos = compute_positions(&swapped);
    let swapped_plane = Plane::new(&swapped, &swapped_pos);
    for (variant, flip) in [(&plane, false), (&swapped_plane, true)] {
        for case in branches(variant) {
            if let Some(sol) =
                solve_branch(variant, &case, &mut outcome.stats).and_then(|p| accept(p, flip))
            {
                outcome.solution = Some(sol);
                outcome.case = Some(case);
                outcome.swapped = flip;
                return Ok(outcome);
            }
        }
    }
    Ok(outcome)
}
