//! Geometry of positions: colors, 45-degree rectangles, crossings of projected paths.
//!
//! Projected polylines use doubled coordinates so that edge midpoints are integers.

use std::collections::HashMap;
use std::fmt;

use crate::error::SolveError;
use crate::graph::{DistanceMatrix, PositionTable, UNREACHABLE};

/// A 2D point in doubled coordinates.
pub type Point2 = (i64, i64);

/// Chebyshev distance of `x` and `y` restricted to `coords`.
pub fn linf(x: &[i64], y: &[i64], coords: &[usize]) -> i64 {
    coords
        .iter()
        .map(|&c| (x[c] - y[c]).abs())
        .max()
        .unwrap_or(0)
}

/// `z` lies in the rectangle area spanned by `x` and `y`, projected to `coords`.
pub fn rect_membership(x: &[i64], y: &[i64], z: &[i64], coords: &[usize]) -> bool {
    linf(x, z, coords) + linf(z, y, coords) == linf(x, y, coords)
}

/// Position of `v` as an `i64` vector; `None` if any coordinate is unreachable.
pub fn point(pos: &PositionTable, v: usize) -> Option<Vec<i64>> {
    let row = pos.row(v);
    if row.iter().any(|&d| d == UNREACHABLE) {
        None
    } else {
        Some(row.iter().map(|&d| d as i64).collect())
    }
}

/// `(pos v^a, pos v^b)`.
pub fn project(pos: &PositionTable, v: usize, a: usize, b: usize) -> Point2 {
    (pos.get(v, a) as i64, pos.get(v, b) as i64)
}

/// The colors of a vertex pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorSet {
    pub colors: Vec<usize>,
    pub is_colored: bool,
    /// Coordinates skipped because one endpoint is unreachable from that source.
    pub excluded: Vec<usize>,
}

/// Colors of `(u, w)`: coordinates attaining `||pos u - pos w||` when that norm equals `dist(u, w)`.
pub fn color_set(pos: &PositionTable, dist_uw: u32, u: usize, w: usize) -> ColorSet {
    let mut excluded = Vec::new();
    let mut diffs = Vec::new();
    for c in 0..pos.k() {
        let (pu, pw) = (pos.get(u, c), pos.get(w, c));
        if pu == UNREACHABLE || pw == UNREACHABLE {
            excluded.push(c);
        } else {
            diffs.push((c, (pu as i64 - pw as i64).abs()));
        }
    }
    let norm = diffs.iter().map(|&(_, d)| d).max();
    let is_colored = dist_uw != UNREACHABLE && norm == Some(dist_uw as i64);
    let colors = if is_colored {
        diffs
            .iter()
            .filter(|&&(_, d)| Some(d) == norm)
            .map(|&(c, _)| c)
            .collect()
    } else {
        Vec::new()
    };
    ColorSet {
        colors,
        is_colored,
        excluded,
    }
}

/// `(u, w)` is `c`-colored for every `c` in `colors`.
pub fn pair_colored_in(
    pos: &PositionTable,
    dist: &DistanceMatrix,
    u: usize,
    w: usize,
    colors: &[usize],
) -> bool {
    let d = dist.dist(u, w);
    d != UNREACHABLE
        && colors.iter().all(|&c| {
            let (pu, pw) = (pos.get(u, c), pos.get(w, c));
            pu != UNREACHABLE
                && pw != UNREACHABLE
                && (pu as i64 - pw as i64).unsigned_abs() == d as u64
        })
}

/// Nonempty intersection of two 2D rectangle areas, by the four sum/difference inequalities.
pub fn rect_intersect_2d(x: Point2, y: Point2, xh: Point2, yh: Point2) -> bool {
    let diff = |p: Point2| p.0 - p.1;
    let sum = |p: Point2| p.0 + p.1;
    let c1 = diff(x).min(diff(y)) <= diff(xh).max(diff(yh));
    let c2 = diff(xh).min(diff(yh)) <= diff(x).max(diff(y));
    let c3 = sum(x).min(sum(y)) <= sum(xh).max(sum(yh));
    let c4 = sum(xh).min(sum(yh)) <= sum(x).max(sum(y));
    c1 && c2 && c3 && c4
}

/// Membership of `z` in the 2D rectangle area of `x` and `y`. All points may be doubled as long as consistently.
pub fn rect_contains_2d(x: Point2, y: Point2, z: Point2) -> bool {
    let n = |p: Point2, q: Point2| (p.0 - q.0).abs().max((p.1 - q.1).abs());
    n(x, z) + n(z, y) == n(x, y)
}

/// Rotated-coordinate box `[dlo, dhi] x [slo, shi]` of a 2D rectangle area.
fn rotated_box(x: Point2, y: Point2) -> (i64, i64, i64, i64) {
    let (dx, dy) = (x.0 - x.1, y.0 - y.1);
    let (sx, sy) = (x.0 + x.1, y.0 + y.1);
    (dx.min(dy), dx.max(dy), sx.min(sy), sx.max(sy))
}

/// Exact 2D pair avoidance: the two areas meet at most in a point that is an endpoint of both pairs.
pub fn avoiding_2d(p1: (Point2, Point2), p2: (Point2, Point2)) -> bool {
    let b1 = rotated_box(p1.0, p1.1);
    let b2 = rotated_box(p2.0, p2.1);
    let (dlo, dhi) = (b1.0.max(b2.0), b1.1.min(b2.1));
    let (slo, shi) = (b1.2.max(b2.2), b1.3.min(b2.3));
    if dlo > dhi || slo > shi {
        return true;
    }
    if dlo != dhi || slo != shi {
        return false;
    }
    let rot = |p: Point2| (p.0 - p.1, p.0 + p.1);
    let meet = (dlo, slo);
    (rot(p1.0) == meet || rot(p1.1) == meet) && (rot(p2.0) == meet || rot(p2.1) == meet)
}

fn avoiding_1d(p1: (i64, i64), p2: (i64, i64)) -> bool {
    let (lo1, hi1) = (p1.0.min(p1.1), p1.0.max(p1.1));
    let (lo2, hi2) = (p2.0.min(p2.1), p2.0.max(p2.1));
    let (lo, hi) = (lo1.max(lo2), hi1.min(hi2));
    if lo > hi {
        return true;
    }
    lo == hi && (p1.0 == lo || p1.1 == lo) && (p2.0 == lo || p2.1 == lo)
}

/// Colors of a pair read off positions alone (coordinates attaining the Chebyshev norm).
fn norm_colors(pos: &PositionTable, u: usize, w: usize) -> Vec<usize> {
    let d: Vec<i64> = (0..pos.k())
        .map(|c| (pos.get(u, c) as i64 - pos.get(w, c) as i64).abs())
        .collect();
    let m = d.iter().copied().max().unwrap_or(0);
    (0..pos.k()).filter(|&c| d[c] == m).collect()
}

/// Pair avoidance in the projection `coords`: exact for one or two coordinates, otherwise
/// witnessed by a projection onto a color of each pair.
pub fn pairs_avoiding(
    pair1: (usize, usize),
    pair2: (usize, usize),
    coords: &[usize],
    pos: &PositionTable,
) -> Result<bool, SolveError> {
    for &v in [pair1.0, pair1.1, pair2.0, pair2.1].iter() {
        if coords.iter().any(|&c| pos.get(v, c) == UNREACHABLE) {
            return Err(SolveError::Precondition(format!(
                "vertex {v} unreachable in projection"
            )));
        }
    }
    let p = |v: usize, c: usize| pos.get(v, c) as i64;
    let test = |a: usize, b: usize| {
        if a == b {
            avoiding_1d(
                (p(pair1.0, a), p(pair1.1, a)),
                (p(pair2.0, a), p(pair2.1, a)),
            )
        } else {
            avoiding_2d(
                (
                    (p(pair1.0, a), p(pair1.0, b)),
                    (p(pair1.1, a), p(pair1.1, b)),
                ),
                (
                    (p(pair2.0, a), p(pair2.0, b)),
                    (p(pair2.1, a), p(pair2.1, b)),
                ),
            )
        }
    };
    match coords.len() {
        0 => Err(SolveError::Precondition("empty projection".into())),
        1 => Ok(test(coords[0], coords[0])),
        2 => Ok(test(coords[0], coords[1])),
        _ => {
            let c1 = norm_colors(pos, pair1.0, pair1.1);
            let c2 = norm_colors(pos, pair2.0, pair2.1);
            for &a in c1.iter().filter(|c| coords.contains(c)) {
                for &b in c2.iter().filter(|c| coords.contains(c)) {
                    if test(a, b) {
                        return Ok(true);
                    }
                }
            }
            Ok(false)
        }
    }
}

/// Path-form avoidance: no internal vertex of one path sits, projected, on a vertex of the other.
pub fn paths_avoiding(p: &[usize], q: &[usize], coords: &[usize], pos: &PositionTable) -> bool {
    let key = |v: usize| coords.iter().map(|&c| pos.get(v, c)).collect::<Vec<_>>();
    let qs: std::collections::HashSet<_> = q.iter().map(|&v| key(v)).collect();
    let ps: std::collections::HashSet<_> = p.iter().map(|&v| key(v)).collect();
    let inner = |x: &[usize]| x.len().saturating_sub(2);
    p.iter()
        .skip(1)
        .take(inner(p))
        .all(|&v| !qs.contains(&key(v)))
        && q.iter()
            .skip(1)
            .take(inner(q))
            .all(|&v| !ps.contains(&key(v)))
}

/// Doubled projected polyline: vertex points at even indices, edge midpoints at odd ones.
pub fn doubled_polyline(path: &[usize], a: usize, b: usize, pos: &PositionTable) -> Vec<Point2> {
    let mut out = Vec::with_capacity(path.len() * 2);
    for (i, &v) in path.iter().enumerate() {
        let p = project(pos, v, a, b);
        if i > 0 {
            let q = project(pos, path[i - 1], a, b);
            out.push((p.0 + q.0, p.1 + q.1));
        }
        out.push((2 * p.0, 2 * p.1));
    }
    out
}

/// The projection of `path` onto `coords` moves by the same vector on every edge.
pub fn is_straight_projection(path: &[usize], coords: &[usize], pos: &PositionTable) -> bool {
    let step = |i: usize| -> Vec<i64> {
        coords
            .iter()
            .map(|&c| pos.get(path[i + 1], c) as i64 - pos.get(path[i], c) as i64)
            .collect()
    };
    path.len() < 3 || (1..path.len() - 1).all(|i| step(i) == step(0))
}

/// Crossing vertices of `P` (a-colored) and `Q` (b-colored) in the (a,b)-plane.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CrossingRecord {
    pub crossing: bool,
    pub alpha_p: Option<usize>,
    pub omega_p: Option<usize>,
    pub partial_p: Option<usize>,
    pub varpi_p: Option<usize>,
    pub alpha_q: Option<usize>,
    pub omega_q: Option<usize>,
    pub partial_q: Option<usize>,
    pub varpi_q: Option<usize>,
    pub delta_p: Option<usize>,
    pub delta_q: Option<usize>,
    /// Endpoints of the intersection segment in doubled coordinates, in P's order.
    pub segment: Option<(Point2, Point2)>,
}

impl fmt::Display for CrossingRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let o = |v: Option<usize>| v.map_or("null".to_string(), |x| x.to_string());
        write!(
            f,
            "{{\"crossing\": {}, \"alpha_P\": {}, \"omega_P\": {}, \"partial_P\": {}, \"varpi_P\": {}, \
             \"alpha_Q\": {}, \"omega_Q\": {}, \"partial_Q\": {}, \"varpi_Q\": {}, \"delta_P\": {}, \"delta_Q\": {}}}",
            self.crossing,
            o(self.alpha_p),
            o(self.omega_p),
            o(self.partial_p),
            o(self.varpi_p),
            o(self.alpha_q),
            o(self.omega_q),
            o(self.partial_q),
            o(self.varpi_q),
            o(self.delta_p),
            o(self.delta_q)
        )
    }
}

fn check_colored(
    path: &[usize],
    c: usize,
    pos: &PositionTable,
    name: &str,
) -> Result<(), SolveError> {
    if path.is_empty() {
        return Err(SolveError::Precondition(format!("{name} is empty")));
    }
    let ok = path.windows(2).all(|w| {
        let (x, y) = (pos.get(w[0], c), pos.get(w[1], c));
        x != UNREACHABLE && y != UNREACHABLE && (x as i64 - y as i64).abs() == 1
    });
    let first = pos.get(path[0], c) as i64;
    let last = pos.get(path[path.len() - 1], c) as i64;
    if !ok || (last - first).unsigned_abs() as usize != path.len() - 1 {
        return Err(SolveError::Precondition(format!(
            "{name} is not {c}-colored"
        )));
    }
    Ok(())
}

/// Per-path crossing data: `(alpha, omega, partial, varpi)` and the run of doubled indices.
fn side(
    path: &[usize],
    dp: &[Point2],
    other: &HashMap<Point2, ()>,
) -> Result<Option<(usize, usize)>, SolveError> {
    let hits: Vec<usize> = (0..dp.len())
        .filter(|i| other.contains_key(&dp[*i]))
        .collect();
    let Some(&lo) = hits.first() else {
        return Ok(None);
    };
    let hi = *hits.last().unwrap();
    if hits.len() != hi - lo + 1 {
        return Err(SolveError::Precondition(format!(
            "projected intersection of path starting at {} is not a single segment",
            path[0]
        )));
    }
    if hi > lo {
        let step = (dp[lo + 1].0 - dp[lo].0, dp[lo + 1].1 - dp[lo].1);
        if (lo..hi).any(|i| (dp[i + 1].0 - dp[i].0, dp[i + 1].1 - dp[i].1) != step) {
            return Err(SolveError::Precondition(
                "projected intersection is not straight".into(),
            ));
        }
    }
    Ok(Some((lo, hi)))
}

fn side_vertices(
    path: &[usize],
    run: (usize, usize),
) -> (Option<usize>, Option<usize>, Option<usize>, Option<usize>) {
    let (lo, hi) = run;
    let first_vertex = lo.div_ceil(2);
    let last_vertex = hi / 2;
    let (alpha, omega) = if 2 * first_vertex <= hi {
        (Some(path[first_vertex]), Some(path[last_vertex]))
    } else {
        (None, None)
    };
    let partial = if lo == 0 {
        None
    } else {
        Some(path[(lo - 1) / 2])
    };
    let varpi = if hi / 2 + 1 < path.len() {
        Some(path[hi / 2 + 1])
    } else {
        None
    };
    (alpha, omega, partial, varpi)
}

/// Crossing vertices of `p` and `q` as defined in the (a,b)-projection.
pub fn crossing_vertices(
    p: &[usize],
    q: &[usize],
    a: usize,
    b: usize,
    pos: &PositionTable,
) -> Result<CrossingRecord, SolveError> {
    check_colored(p, a, pos, "P")?;
    check_colored(q, b, pos, "Q")?;
    let dp = doubled_polyline(p, a, b, pos);
    let dq = doubled_polyline(q, a, b, pos);
    let sp: HashMap<Point2, ()> = dp.iter().map(|&x| (x, ())).collect();
    let sq: HashMap<Point2, ()> = dq.iter().map(|&x| (x, ())).collect();
    let run_p = side(p, &dp, &sq)?;
    let run_q = side(q, &dq, &sp)?;
    let mut rec = CrossingRecord {
        delta_p: delta_vertex(p, (q[0], q[q.len() - 1]), a, b, pos)?,
        delta_q: delta_vertex(q, (p[0], p[p.len() - 1]), b, a, pos)?,
        ..Default::default()
    };
    match (run_p, run_q) {
        (None, None) => {}
        (Some(rp), Some(rq)) => {
            let ends_p = [dp[rp.0], dp[rp.1]];
            let ends_q = [dq[rq.0], dq[rq.1]];
            if !(ends_p == ends_q || ends_p == [ends_q[1], ends_q[0]]) {
                return Err(SolveError::Precondition(
                    "intersection segments disagree".into(),
                ));
            }
            rec.crossing = true;
            rec.segment = Some((dp[rp.0], dp[rp.1]));
            (rec.alpha_p, rec.omega_p, rec.partial_p, rec.varpi_p) = side_vertices(p, rp);
            (rec.alpha_q, rec.omega_q, rec.partial_q, rec.varpi_q) = side_vertices(q, rq);
        }
        _ => return Err(SolveError::Precondition("asymmetric intersection".into())),
    }
    Ok(rec)
}

/// The unique vertex of `p` aligned in `a` with an endpoint of `q_ends` but outside it in `b`.
pub fn delta_vertex(
    p: &[usize],
    q_ends: (usize, usize),
    a: usize,
    b: usize,
    pos: &PositionTable,
) -> Result<Option<usize>, SolveError> {
    let (mut sq, mut tq) = q_ends;
    if pos.get(sq, b) > pos.get(tq, b) {
        std::mem::swap(&mut sq, &mut tq);
    }
    let (sa, sb) = (pos.get(sq, a), pos.get(sq, b));
    let (ta, tb) = (pos.get(tq, a), pos.get(tq, b));
    let hits: Vec<usize> = p
        .iter()
        .copied()
        .filter(|&v| {
            let (va, vb) = (pos.get(v, a), pos.get(v, b));
            (va == sa && vb < sb) || (va == ta && vb > tb && vb != UNREACHABLE)
        })
        .collect();
    match hits.len() {
        0 => Ok(None),
        1 => Ok(Some(hits[0])),
        _ => Err(SolveError::Precondition(format!(
            "delta is not unique: {hits:?}"
        ))),
    }
}

/// `{s_P, t_P}` together with the defined crossing vertices of `P` relative to `Q`.
pub fn crossing_set_2d(
    p: &[usize],
    q: &[usize],
    a: usize,
    b: usize,
    pos: &PositionTable,
) -> Result<Vec<usize>, SolveError> {
    let rec = crossing_vertices(p, q, a, b, pos)?;
    let mut out = vec![p[0], p[p.len() - 1]];
    for v in [
        rec.alpha_p,
        rec.omega_p,
        rec.partial_p,
        rec.varpi_p,
        rec.delta_p,
    ]
    .into_iter()
    .flatten()
    {
        if !out.contains(&v) {
            out.push(v);
        }
    }
    Ok(out)
}
