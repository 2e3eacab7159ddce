//! Checks shared by the integration tests and the acceptance run. Each returns the list of
//! offending cases; empty means the property held everywhere.
#![allow(dead_code)]

use kdsp_core::dsp2::solve_dsp2;
use kdsp_core::geometry::{
    color_set, crossing_vertices, pairs_avoiding, paths_avoiding, project, rect_contains_2d,
    rect_intersect_2d, rect_membership, Point2,
};
use kdsp_core::graph::UNREACHABLE;
use kdsp_core::instances::{
    gen_mcc_reduction, gen_random, gen_random_dag, gen_random_mcc, mcc_bruteforce,
};
use kdsp_core::kdsp::{
    induced_guess, labels, solve_kdsp, Context, KdspAnswer, KdspConfig, Segment,
};
use kdsp_core::layered_dag::{
    disjoint_paths_dag, two_disjoint_paths_dag_fast, ArcView, Dag, DagDisjointInstance,
};
use kdsp_core::oracle::{oracle_solve, EnumLimits, OracleResult};
use kdsp_core::{
    compute_positions, verify_solution, DistanceMatrix, Graph, Instance, PositionTable, Solution,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------- DAG instances ----------

pub fn random_dag_instance(seed: u64, n_max: usize, p_max: usize) -> (Dag, DagDisjointInstance) {
    let mut r = rng(seed);
    let p = r.gen_range(1..=p_max);
    let n = r.gen_range(2 * p..=n_max.max(2 * p));
    let prob = r.gen_range(0.2..0.7);
    let dag = gen_random_dag(n, prob, seed);
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(&mut r);
    let mut pairs: Vec<(usize, usize)> = (0..p).map(|i| (ids[2 * i], ids[2 * i + 1])).collect();
    for pr in pairs.iter_mut() {
        if r.gen_bool(0.8) && pr.0 > pr.1 {
            *pr = (pr.1, pr.0);
        }
    }
    let blocked = ids[2 * p..]
        .iter()
        .copied()
        .filter(|_| r.gen_bool(0.1))
        .collect();
    (dag, DagDisjointInstance { pairs, blocked })
}

fn dag_paths(
    dag: &Dag,
    s: usize,
    t: usize,
    forbidden: &[bool],
    cur: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    let v = *cur.last().unwrap();
    if v == t {
        out.push(cur.clone());
        return;
    }
    for &w in dag.out(v) {
        if w == t || !forbidden[w] {
            cur.push(w);
            dag_paths(dag, s, t, forbidden, cur, out);
            cur.pop();
        }
    }
}

/// Exhaustive product over all path tuples.
pub fn brute_force_dag(dag: &Dag, inst: &DagDisjointInstance) -> bool {
    let mut forbidden = vec![false; dag.n()];
    for &(s, t) in &inst.pairs {
        forbidden[s] = true;
        forbidden[t] = true;
    }
    for &b in &inst.blocked {
        forbidden[b] = true;
    }
    let lists: Vec<Vec<Vec<usize>>> = inst
        .pairs
        .iter()
        .map(|&(s, t)| {
            let mut out = Vec::new();
            dag_paths(dag, s, t, &forbidden, &mut vec![s], &mut out);
            out
        })
        .collect();
    fn pick(lists: &[Vec<Vec<usize>>], used: &mut Vec<bool>, i: usize) -> bool {
        if i == lists.len() {
            return true;
        }
        for p in &lists[i] {
            if p.iter().any(|&v| used[v]) {
                continue;
            }
            p.iter().for_each(|&v| used[v] = true);
            let ok = pick(lists, used, i + 1);
            p.iter().for_each(|&v| used[v] = false);
            if ok {
                return true;
            }
        }
        false
    }
    pick(&lists, &mut vec![false; dag.n()], 0)
}

pub fn check_dp_vs_brute(count: u64) -> Vec<String> {
    let mut bad = Vec::new();
    for seed in 0..count {
        let (dag, inst) = random_dag_instance(seed, 10, 3);
        let dp = disjoint_paths_dag(&dag, &inst);
        let expected = brute_force_dag(&dag, &inst);
        if dp.is_some() != expected {
            bad.push(format!("seed {seed}: dp {} brute {expected}", dp.is_some()));
        } else if let Some(paths) = &dp {
            if !kdsp_core::layered_dag::check_dag_paths(&dag, &inst, paths) {
                bad.push(format!("seed {seed}: dp paths invalid"));
            }
        }
    }
    bad
}

pub fn check_fast_vs_dp(count: u64) -> Vec<String> {
    let mut bad = Vec::new();
    for seed in 0..count {
        let (dag, mut inst) = random_dag_instance(seed.wrapping_mul(7919) + 1, 12, 2);
        if inst.pairs.len() < 2 {
            let mut r = rng(seed);
            let free: Vec<usize> = (0..dag.n())
                .filter(|v| !inst.pairs.iter().any(|p| p.0 == *v || p.1 == *v))
                .collect();
            if free.len() < 2 {
                continue;
            }
            let a = *free.choose(&mut r).unwrap();
            let b = *free
                .iter()
                .filter(|&&x| x != a)
                .collect::<Vec<_>>()
                .choose(&mut r)
                .copied()
                .unwrap();
            inst.pairs.push((a.min(b), a.max(b)));
            inst.blocked.retain(|&x| x != a && x != b);
        }
        let dp = disjoint_paths_dag(&dag, &inst).is_some();
        let fast = two_disjoint_paths_dag_fast(&dag, inst.pairs[0], inst.pairs[1], &inst.blocked);
        if fast.is_some() != dp {
            bad.push(format!("seed {seed}: fast {} dp {dp}", fast.is_some()));
        } else if let Some((a, b)) = fast {
            if !kdsp_core::layered_dag::check_dag_paths(&dag, &inst, &[a, b]) {
                bad.push(format!("seed {seed}: fast paths invalid"));
            }
        }
    }
    bad
}

// ---------- graph instances ----------

/// A grid with random deletions and diagonals; crossings are common here.
pub fn grid_like(n: usize, k: usize, seed: u64) -> Instance {
    let mut r = rng(seed);
    let cols = ((n as f64).sqrt().ceil() as usize).max(2);
    let rows = n.div_ceil(cols).max(2);
    loop {
        let mut edges = Vec::new();
        for y in 0..rows {
            for x in 0..cols {
                let v = y * cols + x;
                if x + 1 < cols && r.gen_bool(0.85) {
                    edges.push((v, v + 1));
                }
                if y + 1 < rows && r.gen_bool(0.85) {
                    edges.push((v, v + cols));
                }
                if x + 1 < cols && y + 1 < rows && r.gen_bool(0.15) {
                    edges.push((v, v + cols + 1));
                }
            }
        }
        let g = Graph::new(rows * cols, &edges).unwrap();
        let mut ids: Vec<usize> = (0..rows * cols).collect();
        ids.shuffle(&mut r);
        let inst =
            Instance::new(g, (0..k).map(|i| (ids[2 * i], ids[2 * i + 1])).collect()).unwrap();
        if !compute_positions(&inst).any_pair_unreachable(&inst) {
            return inst;
        }
    }
}

/// Alternates plain random graphs and grid-like graphs, `n <= n_max`.
pub fn mixed_instance(seed: u64, k: usize, n_max: usize) -> Instance {
    let n = 2 * k + (seed as usize % (n_max - 2 * k + 1));
    if seed % 2 == 0 {
        let p = [0.2, 0.35, 0.5][(seed / 2) as usize % 3];
        gen_random(n, p, k, seed).unwrap()
    } else {
        grid_like(n.max(4), k, seed)
    }
}

#[derive(Debug, Default)]
pub struct KdspReport {
    pub instances: usize,
    pub yes: usize,
    pub mismatches: Vec<String>,
    pub membership: Vec<String>,
    pub labels: Vec<String>,
    pub avoidance: Vec<String>,
    /// Pairs of single-edge segments whose areas meet off the lattice; their paths still avoid.
    pub edge_pair_overlaps: usize,
}

impl KdspReport {
    pub fn clean(&self) -> bool {
        self.mismatches.is_empty()
            && self.membership.is_empty()
            && self.labels.is_empty()
            && self.avoidance.is_empty()
    }
}

fn complete() -> KdspConfig {
    KdspConfig {
        guess_budget: u64::MAX,
        ..KdspConfig::default()
    }
}

fn kdsp_yes(inst: &Instance) -> Result<Option<Solution>, String> {
    let out = solve_kdsp(inst, &complete()).map_err(|e| e.to_string())?;
    match out.answer {
        KdspAnswer::Yes(s) => {
            verify_solution(inst, &compute_positions(inst), &s).map_err(|v| v.to_string())?;
            Ok(Some(s))
        }
        KdspAnswer::No => Ok(None),
        KdspAnswer::Unknown => Err("unknown".into()),
    }
}

/// Induced-guess membership, replay, marks = labels and the avoidance consequence for one
/// oracle solution.
fn check_structure(inst: &Instance, sol: &Solution, tag: &str, rep: &mut KdspReport) {
    let ctx = Context::new(inst);
    let pos = ctx.positions();
    let guess = match induced_guess(inst, pos, sol) {
        Ok(g) => g,
        Err(e) => {
            rep.membership
                .push(format!("{tag}: induced guess failed: {e}"));
            return;
        }
    };
    if !ctx.admits(&guess) {
        rep.membership
            .push(format!("{tag}: induced guess not in the stream"));
    }
    if ctx.evaluate(&guess).is_none() {
        rep.membership
            .push(format!("{tag}: induced guess does not replay"));
    }
    let segs = ctx.all_segments(&guess);
    let lab = labels(inst, sol, &guess);
    let marks: Vec<Vec<usize>> = segs.iter().map(|s| s.marks.clone()).collect();
    if lab != marks {
        rep.labels
            .push(format!("{tag}: labels {lab:?} marks {marks:?}"));
    }
    let sub = |s: &Segment| {
        let p = &sol.paths[s.host].0;
        let a = p.iter().position(|&v| v == s.start).unwrap();
        let b = p.iter().position(|&v| v == s.end).unwrap();
        p[a.min(b)..=a.max(b)].to_vec()
    };
    for (x, s) in segs.iter().enumerate() {
        for t in &segs[x + 1..] {
            if s.marks == t.marks {
                continue;
            }
            let ends = [s.start, s.end, t.start, t.end];
            let coords: Vec<usize> = (0..inst.k())
                .filter(|&c| ends.iter().all(|&v| pos.get(v, c) != UNREACHABLE))
                .collect();
            if coords.is_empty() {
                continue;
            }
            let tag = format!(
                "{tag}: segments {:?} {:?}",
                (s.start, s.end),
                (t.start, t.end)
            );
            if !paths_avoiding(&sub(s), &sub(t), &coords, pos) {
                rep.avoidance.push(format!("{tag} (paths)"));
            }
            if !pairs_avoiding((s.start, s.end), (t.start, t.end), &coords, pos).unwrap_or(false) {
                if s.gap >= 2 || t.gap >= 2 {
                    rep.avoidance.push(format!("{tag} (pairs)"));
                } else {
                    rep.edge_pair_overlaps += 1;
                }
            }
        }
    }
}

pub fn check_kdsp_vs_oracle(count: u64, n_max: usize) -> KdspReport {
    let mut rep = KdspReport::default();
    for seed in 0..count {
        let inst = mixed_instance(seed, 3, n_max);
        let tag = format!("seed {seed}");
        rep.instances += 1;
        let truth = match oracle_solve(&inst, EnumLimits::default()) {
            OracleResult::Yes(s) => Some(s),
            OracleResult::No => None,
            OracleResult::Limit(m) => {
                rep.mismatches.push(format!("{tag}: oracle limit {m}"));
                continue;
            }
        };
        match kdsp_yes(&inst) {
            Err(e) => rep.mismatches.push(format!("{tag}: kdsp {e}")),
            Ok(got) if got.is_some() != truth.is_some() => rep.mismatches.push(format!(
                "{tag}: kdsp {} oracle {}",
                got.is_some(),
                truth.is_some()
            )),
            Ok(_) => {}
        }
        if let Some(sol) = truth {
            rep.yes += 1;
            check_structure(&inst, &sol, &tag, &mut rep);
        }
    }
    rep
}

/// `solve_dsp2` against the oracle on plain random graphs, `n <= 12`. Returns (yes, problems).
pub fn check_dsp2_vs_oracle(count: u64) -> (usize, Vec<String>) {
    let mut bad = Vec::new();
    let mut yes = 0;
    for seed in 0..count {
        let n = 4 + (seed as usize % 9);
        let p = if seed % 2 == 0 { 0.2 } else { 0.4 };
        let inst = gen_random(n, p, 2, seed + 20_000).unwrap();
        let truth = match oracle_solve(&inst, EnumLimits::default()) {
            OracleResult::Limit(m) => {
                bad.push(format!("seed {seed}: oracle limit {m}"));
                continue;
            }
            r => r.is_yes(),
        };
        match solve_dsp2(&inst) {
            Err(e) => bad.push(format!("seed {seed}: dsp2 {e}")),
            Ok(got) => {
                if got.is_some() != truth {
                    bad.push(format!(
                        "seed {seed}: dsp2 {} oracle {truth}",
                        got.is_some()
                    ));
                }
                if let Some(sol) = got {
                    yes += 1;
                    if let Err(v) = verify_solution(&inst, &compute_positions(&inst), &sol) {
                        bad.push(format!("seed {seed}: witness {v}"));
                    }
                }
            }
        }
    }
    (yes, bad)
}

pub fn check_kdsp_vs_dsp2(count: u64, n_max: usize) -> KdspReport {
    let mut rep = KdspReport::default();
    for seed in 0..count {
        let inst = mixed_instance(seed + 100_000, 2, n_max);
        rep.instances += 1;
        let truth = solve_dsp2(&inst).unwrap().is_some();
        match kdsp_yes(&inst) {
            Err(e) => rep.mismatches.push(format!("seed {seed}: kdsp {e}")),
            Ok(got) => {
                rep.yes += got.is_some() as usize;
                if got.is_some() != truth {
                    rep.mismatches
                        .push(format!("seed {seed}: kdsp {} dsp2 {truth}", got.is_some()));
                }
            }
        }
    }
    rep
}

// ---------- reduction ----------

pub fn check_mcc(count: u64) -> (usize, Vec<String>) {
    let mut bad = Vec::new();
    let mut yes = 0;
    for seed in 0..count {
        let k = 2 + (seed % 2) as usize;
        let p = [0.4, 0.6, 0.8][(seed / 2) as usize % 3];
        let mcc = gen_random_mcc(k, 3, p, seed);
        let expected = mcc_bruteforce(&mcc, 1 << 20).unwrap();
        yes += expected as usize;
        let inst = gen_mcc_reduction(&mcc);
        match oracle_solve(&inst, EnumLimits::default()) {
            OracleResult::Limit(m) => bad.push(format!("seed {seed}: oracle limit {m}")),
            r if r.is_yes() != expected => bad.push(format!(
                "seed {seed}: clique {expected} paths {}",
                r.is_yes()
            )),
            _ => {}
        }
    }
    (yes, bad)
}

// ---------- geometry ----------

pub fn check_basic_inequality(graphs: u64) -> Vec<String> {
    let mut bad = Vec::new();
    for seed in 0..graphs {
        let n = 6 + (seed as usize % 25);
        let inst = gen_random(n, 0.15 + 0.05 * (seed % 5) as f64, 3, seed).unwrap();
        let pos = compute_positions(&inst);
        let dist = DistanceMatrix::new(&inst.graph);
        for v in 0..n {
            for w in 0..n {
                let d = dist.dist(v, w);
                if d == kdsp_core::UNREACHABLE {
                    continue;
                }
                for c in 0..3 {
                    let (a, b) = (pos.get(v, c), pos.get(w, c));
                    if a != kdsp_core::UNREACHABLE && (a as i64 - b as i64).abs() > d as i64 {
                        bad.push(format!("seed {seed}: {v},{w} coordinate {c}"));
                    }
                }
            }
        }
    }
    bad
}

fn point_of(pos: &PositionTable, v: usize) -> Vec<i64> {
    pos.row(v).iter().map(|&x| x as i64).collect()
}

/// Every vertex on a shortest path between a colored pair sits in the pair's rectangle area
/// and satisfies the diamond inequalities for each color of the pair. Returns (pairs, violations).
pub fn check_diamond_inclusion(graphs: u64) -> (usize, Vec<String>) {
    let mut bad = Vec::new();
    let mut checked = 0;
    for seed in 0..graphs {
        let n = 6 + (seed as usize % 25);
        let inst = gen_random(n, 0.2, 3, seed + 500).unwrap();
        let pos = compute_positions(&inst);
        let dist = DistanceMatrix::new(&inst.graph);
        let all = [0, 1, 2];
        for u in (0..n).filter(|&u| pos.reachable(u)) {
            for w in (0..n).filter(|&w| w != u && pos.reachable(w)) {
                let cs = color_set(&pos, dist.dist(u, w), u, w);
                if !cs.is_colored {
                    continue;
                }
                checked += 1;
                let (x, y) = (point_of(&pos, u), point_of(&pos, w));
                for z in (0..n).filter(|&z| dist.between(u, z, w)) {
                    let pz = point_of(&pos, z);
                    if !rect_membership(&x, &y, &pz, &all) {
                        bad.push(format!("seed {seed}: {z} outside area of ({u},{w})"));
                    }
                    for &a in &cs.colors {
                        let (lo, hi) = if x[a] <= y[a] { (&x, &y) } else { (&y, &x) };
                        for b in all {
                            if pz[a] - lo[a] < (pz[b] - lo[b]).abs()
                                || hi[a] - pz[a] < (hi[b] - pz[b]).abs()
                            {
                                bad.push(format!(
                                    "seed {seed}: diamond ({u},{w}) z={z} a={a} b={b}"
                                ));
                            }
                        }
                    }
                }
            }
        }
    }
    (checked, bad)
}

/// `rect_intersect_2d` against enumeration of the half-integer lattice, for all corner
/// tuples with coordinates in `0..=side`.
pub fn check_rect_intersect_exhaustive(side: i64) -> Vec<String> {
    let mut bad = Vec::new();
    let pts: Vec<Point2> = (0..=side)
        .flat_map(|a| (0..=side).map(move |b| (a, b)))
        .collect();
    let grid: Vec<Point2> = (0..=2 * side)
        .flat_map(|a| (0..=2 * side).map(move |b| (a, b)))
        .collect();
    let dbl = |p: Point2| (2 * p.0, 2 * p.1);
    // Membership masks of each rectangle over the doubled grid.
    let mut masks = std::collections::HashMap::new();
    for &x in &pts {
        for &y in &pts {
            let mut m = vec![0u64; grid.len().div_ceil(64)];
            for (i, &z) in grid.iter().enumerate() {
                if rect_contains_2d(dbl(x), dbl(y), z) {
                    m[i / 64] |= 1 << (i % 64);
                }
            }
            masks.insert((x, y), m);
        }
    }
    let entries: Vec<_> = masks.iter().collect();
    for &(&(x, y), m1) in &entries {
        for &(&(xh, yh), m2) in &entries {
            let lattice = m1.iter().zip(m2).any(|(a, b)| a & b != 0);
            if lattice != rect_intersect_2d(x, y, xh, yh) {
                bad.push(format!("{x:?}{y:?} vs {xh:?}{yh:?}"));
            }
        }
    }
    bad
}

/// Disjointness disjoint on all path pairs of oracle solutions: the four flank areas of a
/// crossing, and the two halves split at δ against the other path's area.
pub fn check_crossing_disjointness(count: u64) -> (usize, usize, Vec<String>) {
    let mut bad = Vec::new();
    let (mut crossing, mut noncrossing) = (0, 0);
    for seed in 0..count {
        let k = 2 + (seed % 2) as usize;
        let inst = mixed_instance(seed + 7_000, k, 10);
        let OracleResult::Yes(sol) = oracle_solve(&inst, EnumLimits::default()) else {
            continue;
        };
        let pos = compute_positions(&inst);
        for i in 0..k {
            for j in 0..k {
                if i == j {
                    continue;
                }
                let (p, q) = (sol.paths[i].vertices(), sol.paths[j].vertices());
                let rec = match crossing_vertices(p, q, i, j, &pos) {
                    Ok(r) => r,
                    Err(e) => {
                        bad.push(format!("seed {seed} ({i},{j}): {e}"));
                        continue;
                    }
                };
                let pr = |v: usize| project(&pos, v, i, j);
                let (sp, tp, sq, tq) = (p[0], p[p.len() - 1], q[0], q[q.len() - 1]);
                if rec.crossing {
                    crossing += 1;
                    let areas: Vec<(Point2, Point2)> = [
                        rec.partial_p.map(|d| (pr(sp), pr(d))),
                        rec.varpi_p.map(|w| (pr(w), pr(tp))),
                        rec.partial_q.map(|d| (pr(sq), pr(d))),
                        rec.varpi_q.map(|w| (pr(w), pr(tq))),
                    ]
                    .into_iter()
                    .flatten()
                    .collect();
                    for (x, a) in areas.iter().enumerate() {
                        for b in &areas[x + 1..] {
                            if rect_intersect_2d(a.0, a.1, b.0, b.1) {
                                bad.push(format!(
                                    "seed {seed} ({i},{j}): flank areas {a:?} {b:?} meet"
                                ));
                            }
                        }
                    }
                } else {
                    noncrossing += 1;
                    for (path, other, d) in [(p, q, rec.delta_p), (q, p, rec.delta_q)] {
                        let Some(d) = d else { continue };
                        let (s0, t0) = (pr(path[0]), pr(path[path.len() - 1]));
                        let (os, ot) = (pr(other[0]), pr(other[other.len() - 1]));
                        for half in [(s0, pr(d)), (pr(d), t0)] {
                            if rect_intersect_2d(half.0, half.1, os, ot) {
                                bad.push(format!(
                                    "seed {seed} ({i},{j}): delta half {half:?} meets {:?}",
                                    (os, ot)
                                ));
                            }
                        }
                    }
                }
            }
        }
    }
    (crossing, noncrossing, bad)
}
