//! Layered DAGs and disjoint paths on DAGs.
//!
//! `disjoint_paths_dag` is the frontier dynamic program over p-tuples; it is stored sparsely
//! and explored forward from `(s_1, ..., s_p)`. `two_disjoint_paths_dag_fast` is the pair-state
//! search that always advances the earlier frontier.

use std::collections::{HashMap, VecDeque};
use std::hash::Hash;

use crate::graph::{Graph, PositionTable, UNREACHABLE};

/// Read access to a DAG whose arcs may depend on which terminal pair is being routed.
pub trait ArcView {
    fn n(&self) -> usize;
    /// Position of `v` in a topological order shared by all pairs.
    fn rank(&self, v: usize) -> usize;
    fn succ(&self, pair: usize, v: usize) -> &[usize];
}

/// A DAG with sorted out-arcs and a fixed topological order.
#[derive(Debug, Clone)]
pub struct Dag {
    out: Vec<Vec<usize>>,
    order: Vec<usize>,
    rank: Vec<usize>,
    /// Layer coordinate for DAGs built by `build_layered_dag`.
    pub color: Option<usize>,
}

impl Dag {
    /// Builds a DAG from arcs; `None` if they contain a cycle. Ties in the order go by vertex id.
    pub fn from_arcs(n: usize, arcs: &[(usize, usize)]) -> Option<Dag> {
        let mut out = vec![Vec::new(); n];
        for &(u, v) in arcs {
            out[u].push(v);
        }
        for list in out.iter_mut() {
            list.sort_unstable();
            list.dedup();
        }
        let order = topo_order(n, |v| out[v].as_slice())?;
        let mut rank = vec![0; n];
        for (i, &v) in order.iter().enumerate() {
            rank[v] = i;
        }
        Some(Dag {
            out,
            order,
            rank,
            color: None,
        })
    }

    pub fn out(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn arc_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn has_arc(&self, u: usize, v: usize) -> bool {
        self.out[u].binary_search(&v).is_ok()
    }
}

impl ArcView for Dag {
    fn n(&self) -> usize {
        self.out.len()
    }
    fn rank(&self, v: usize) -> usize {
        self.rank[v]
    }
    fn succ(&self, _pair: usize, v: usize) -> &[usize] {
        &self.out[v]
    }
}

fn topo_order<'a>(n: usize, out: impl Fn(usize) -> &'a [usize]) -> Option<Vec<usize>> {
    let mut indeg = vec![0usize; n];
    for v in 0..n {
        for &w in out(v) {
            indeg[w] += 1;
        }
    }
    let mut ready: std::collections::BinaryHeap<std::cmp::Reverse<usize>> = (0..n)
        .filter(|&v| indeg[v] == 0)
        .map(std::cmp::Reverse)
        .collect();
    let mut order = Vec::with_capacity(n);
    while let Some(std::cmp::Reverse(v)) = ready.pop() {
        order.push(v);
        for &w in out(v) {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                ready.push(std::cmp::Reverse(w));
            }
        }
    }
    (order.len() == n).then_some(order)
}

/// Arc sets indexed by terminal pair, sharing one topological order.
#[derive(Debug, Clone)]
pub struct LabelledDag {
    out: Vec<Vec<Vec<usize>>>,
    rank: Vec<usize>,
}

impl LabelledDag {
    /// `arcs[i]` are the arcs usable by pair `i`. `None` if the union has a cycle.
    pub fn new(n: usize, arcs: &[Vec<(usize, usize)>]) -> Option<Self> {
        let union: Vec<(usize, usize)> = arcs.iter().flatten().copied().collect();
        let dag = Dag::from_arcs(n, &union)?;
        let out = arcs
            .iter()
            .map(|list| {
                let mut per = vec![Vec::new(); n];
                for &(u, v) in list {
                    per[u].push(v);
                }
                for l in per.iter_mut() {
                    l.sort_unstable();
                    l.dedup();
                }
                per
            })
            .collect();
        Some(LabelledDag {
            out,
            rank: dag.rank,
        })
    }
}

impl ArcView for LabelledDag {
    fn n(&self) -> usize {
        self.rank.len()
    }
    fn rank(&self, v: usize) -> usize {
        self.rank[v]
    }
    fn succ(&self, pair: usize, v: usize) -> &[usize] {
        &self.out[pair][v]
    }
}

/// The `c`-layered DAG: arc `(u, v)` for every edge with `pos[v][c] = pos[u][c] + 1`.
/// Topological order sorts by `pos[.][c]`, then by id; unreachable vertices go last.
pub fn build_layered_dag(graph: &Graph, pos: &PositionTable, c: usize) -> Dag {
    let n = graph.n();
    let mut out = vec![Vec::new(); n];
    for (u, list) in out.iter_mut().enumerate() {
        let pu = pos.get(u, c);
        if pu == UNREACHABLE {
            continue;
        }
        list.extend(
            graph
                .neighbors(u)
                .iter()
                .copied()
                .filter(|&w| pos.get(w, c) == pu + 1),
        );
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (pos.get(v, c), v));
    let mut rank = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        rank[v] = i;
    }
    debug_assert!(out
        .iter()
        .enumerate()
        .all(|(u, l)| l.iter().all(|&w| rank[w] > rank[u])));
    Dag {
        out,
        order,
        rank,
        color: Some(c),
    }
}

/// Work counters of one disjoint-paths call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DpStats {
    pub states: usize,
    pub transitions: usize,
}

/// Terminal pairs routed in one DAG plus vertices that no path may use internally.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DagDisjointInstance {
    pub pairs: Vec<(usize, usize)>,
    pub blocked: Vec<usize>,
}

trait StateKey: Hash + Eq + Clone {
    fn encode(state: &[u32], bits: u32) -> Self;
}

impl StateKey for u128 {
    fn encode(state: &[u32], bits: u32) -> Self {
        state
            .iter()
            .fold(0u128, |acc, &x| (acc << bits) | x as u128)
    }
}

impl StateKey for Box<[u32]> {
    fn encode(state: &[u32], _bits: u32) -> Self {
        state.into()
    }
}

/// Preprocessed pair list: trivial pairs solved up front, the rest handed to the search.
struct Prepared {
    paths: Vec<Option<Vec<usize>>>,
    open: Vec<usize>,
    forbidden: Vec<bool>,
}

fn prepare(dag: &impl ArcView, pairs: &[(usize, usize)], blocked: &[usize]) -> Option<Prepared> {
    let n = dag.n();
    let mut forbidden = vec![false; n];
    for &(s, t) in pairs {
        forbidden[s] = true;
        forbidden[t] = true;
    }
    for &b in blocked {
        forbidden[b] = true;
    }
    let mut paths = vec![None; pairs.len()];
    let mut open = Vec::new();
    for (i, &(s, t)) in pairs.iter().enumerate() {
        if s == t {
            paths[i] = Some(vec![s]);
        } else if dag.rank(s) > dag.rank(t) {
            return None;
        } else if dag.succ(i, s).binary_search(&t).is_ok() {
            paths[i] = Some(vec![s, t]);
        } else {
            open.push(i);
        }
    }
    if !open.is_empty() && open.len() >= n {
        return None;
    }
    Some(Prepared {
        paths,
        open,
        forbidden,
    })
}

/// Solves p-disjoint-paths on a DAG: internally vertex-disjoint `s_i -> t_i` paths whose
/// interior avoids every terminal and every blocked vertex. Returns the paths in pair order.
pub fn disjoint_paths_dag(
    dag: &impl ArcView,
    inst: &DagDisjointInstance,
) -> Option<Vec<Vec<usize>>> {
    disjoint_paths_dag_stats(dag, inst).0
}

/// `disjoint_paths_dag` plus work counters.
pub fn disjoint_paths_dag_stats(
    dag: &impl ArcView,
    inst: &DagDisjointInstance,
) -> (Option<Vec<Vec<usize>>>, DpStats) {
    let Some(mut prep) = prepare(dag, &inst.pairs, &inst.blocked) else {
        return (None, DpStats::default());
    };
    if prep.open.is_empty() {
        return (prep.paths.into_iter().collect(), DpStats::default());
    }
    let bits = usize::BITS - dag.n().leading_zeros();
    let found = if prep.open.len() as u32 * bits <= 128 {
        frontier_search::<u128>(dag, &inst.pairs, &prep, bits)
    } else {
        frontier_search::<Box<[u32]>>(dag, &inst.pairs, &prep, bits)
    };
    let (sub, stats) = found;
    match sub {
        None => (None, stats),
        Some(sub) => {
            for (j, p) in prep.open.iter().zip(sub) {
                prep.paths[*j] = Some(p);
            }
            (prep.paths.into_iter().collect(), stats)
        }
    }
}

fn frontier_search<K: StateKey>(
    dag: &impl ArcView,
    pairs: &[(usize, usize)],
    prep: &Prepared,
    bits: u32,
) -> (Option<Vec<Vec<usize>>>, DpStats) {
    let open = &prep.open;
    let p = open.len();
    let src: Vec<u32> = open.iter().map(|&i| pairs[i].0 as u32).collect();
    let dst: Vec<u32> = open.iter().map(|&i| pairs[i].1 as u32).collect();
    // Arena of states, each `p` entries, with (parent, moved slot).
    let mut arena: Vec<u32> = src.clone();
    let mut parent: Vec<(u32, u32)> = vec![(u32::MAX, u32::MAX)];
    let mut index: HashMap<K, u32> = HashMap::new();
    index.insert(K::encode(&src, bits), 0);
    let mut queue = VecDeque::from([0u32]);
    let mut stats = DpStats {
        states: 1,
        transitions: 0,
    };
    let mut next = vec![0u32; p];
    let mut goal = None;
    if src == dst {
        goal = Some(0);
    }
    'search: while let Some(id) = queue.pop_front() {
        let base = id as usize * p;
        let cur: Vec<u32> = arena[base..base + p].to_vec();
        // Latest frontier among slots that have left their source.
        let latest = (0..p)
            .filter(|&i| cur[i] != src[i])
            .map(|i| dag.rank(cur[i] as usize))
            .max();
        for l in 0..p {
            let y = cur[l] as usize;
            if cur[l] == dst[l] {
                continue;
            }
            for &w in dag.succ(open[l], y) {
                let is_target = w as u32 == dst[l];
                if !is_target && prep.forbidden[w] {
                    continue;
                }
                let rw = dag.rank(w);
                if latest.is_some_and(|r| rw < r) {
                    continue;
                }
                if !is_target && (0..p).any(|i| i != l && cur[i] == w as u32) {
                    continue;
                }
                stats.transitions += 1;
                next.copy_from_slice(&cur);
                next[l] = w as u32;
                let key = K::encode(&next, bits);
                if index.contains_key(&key) {
                    continue;
                }
                let nid = parent.len() as u32;
                index.insert(key, nid);
                arena.extend_from_slice(&next);
                parent.push((id, l as u32));
                stats.states += 1;
                if next == dst {
                    goal = Some(nid);
                    break 'search;
                }
                queue.push_back(nid);
            }
        }
    }
    let Some(mut id) = goal else {
        return (None, stats);
    };
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); p];
    while parent[id as usize].0 != u32::MAX {
        let (par, slot) = parent[id as usize];
        rev[slot as usize].push(arena[id as usize * p + slot as usize] as usize);
        id = par;
    }
    let paths = rev
        .into_iter()
        .enumerate()
        .map(|(i, mut r)| {
            r.push(src[i] as usize);
            r.reverse();
            r
        })
        .collect();
    (Some(paths), stats)
}

/// Two internally disjoint paths on a DAG by the pair-state search, `O(n m)` states and moves.
pub fn two_disjoint_paths_dag_fast(
    dag: &impl ArcView,
    pair1: (usize, usize),
    pair2: (usize, usize),
    blocked: &[usize],
) -> Option<(Vec<usize>, Vec<usize>)> {
    let pairs = [pair1, pair2];
    let mut prep = prepare(dag, &pairs, blocked)?;
    match prep.open.len() {
        0 => {
            let a = prep.paths[0].take()?;
            let b = prep.paths[1].take()?;
            return Some((a, b));
        }
        1 => {
            // A single remaining pair only needs a path avoiding forbidden interiors.
            let i = prep.open[0];
            let p = single_path(dag, i, pairs[i], &prep.forbidden)?;
            prep.paths[i] = Some(p);
            let a = prep.paths[0].take()?;
            let b = prep.paths[1].take()?;
            return Some((a, b));
        }
        _ => {}
    }
    let (s1, t1) = pair1;
    let (s2, t2) = pair2;
    let mut parent: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
    parent.insert((s1, s2), (usize::MAX, usize::MAX));
    let mut queue = VecDeque::from([(s1, s2)]);
    let mut found = false;
    while let Some((u, v)) = queue.pop_front() {
        if (u, v) == (t1, t2) {
            found = true;
            break;
        }
        let move_first = u != t1 && (v == t2 || dag.rank(u) <= dag.rank(v));
        let (slot, from, goal, other) = if move_first {
            (0, u, t1, v)
        } else {
            (1, v, t2, u)
        };
        for &w in dag.succ(slot, from) {
            if w != goal && (prep.forbidden[w] || w == other) {
                continue;
            }
            let next = if slot == 0 { (w, v) } else { (u, w) };
            if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(next) {
                e.insert((u, v));
                queue.push_back(next);
            }
        }
    }
    if !found {
        return None;
    }
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut cur = (t1, t2);
    loop {
        if a.last() != Some(&cur.0) {
            a.push(cur.0);
        }
        if b.last() != Some(&cur.1) {
            b.push(cur.1);
        }
        let prev = parent[&cur];
        if prev.0 == usize::MAX {
            break;
        }
        cur = prev;
    }
    a.reverse();
    b.reverse();
    Some((a, b))
}

fn single_path(
    dag: &impl ArcView,
    pair: usize,
    (s, t): (usize, usize),
    forbidden: &[bool],
) -> Option<Vec<usize>> {
    let mut prev = vec![usize::MAX; dag.n()];
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
        for &w in dag.succ(pair, v) {
            if prev[w] == usize::MAX && (w == t || !forbidden[w]) {
                prev[w] = v;
                queue.push_back(w);
            }
        }
    }
    None
}

/// Shortest `s`-`t` path inside one arc set of a view, interior avoiding `forbidden`.
pub fn dag_path(
    dag: &impl ArcView,
    pair: usize,
    s: usize,
    t: usize,
    forbidden: &[bool],
) -> Option<Vec<usize>> {
    single_path(dag, pair, (s, t), forbidden)
}

/// Checks a disjoint-paths answer: endpoints, arcs, interiors distinct and off terminals/blocked.
pub fn check_dag_paths(
    dag: &impl ArcView,
    inst: &DagDisjointInstance,
    paths: &[Vec<usize>],
) -> bool {
    if paths.len() != inst.pairs.len() {
        return false;
    }
    let mut forbidden = vec![false; dag.n()];
    for &(s, t) in &inst.pairs {
        forbidden[s] = true;
        forbidden[t] = true;
    }
    for &b in &inst.blocked {
        forbidden[b] = true;
    }
    let mut used = vec![false; dag.n()];
    for (i, (p, &(s, t))) in paths.iter().zip(&inst.pairs).enumerate() {
        if p.first() != Some(&s) || p.last() != Some(&t) {
            return false;
        }
        if p.windows(2)
            .any(|w| dag.succ(i, w[0]).binary_search(&w[1]).is_err())
        {
            return false;
        }
        for &v in &p[1..p.len().saturating_sub(1)] {
            if forbidden[v] || used[v] {
                return false;
            }
            used[v] = true;
        }
    }
    true
}
