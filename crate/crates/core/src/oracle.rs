//! Exhaustive reference solver and shortest-path enumeration for small instances.

use std::time::{Duration, Instant};

use crate::graph::{
    bfs_distances, compute_positions, verify_solution, Graph, Instance, Path, Solution, UNREACHABLE,
};

/// Bounds on the exhaustive search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumLimits {
    pub max_paths_per_pair: usize,
    pub max_nodes: u64,
    pub time_budget: Option<Duration>,
}

impl Default for EnumLimits {
    fn default() -> Self {
        EnumLimits {
            max_paths_per_pair: 200_000,
            max_nodes: 50_000_000,
            time_budget: None,
        }
    }
}

/// Result of `oracle_solve`. `No` is only returned after the search space was exhausted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleResult {
    Yes(Solution),
    No,
    Limit(String),
}

impl OracleResult {
    pub fn is_yes(&self) -> bool {
        matches!(self, OracleResult::Yes(_))
    }
}

/// Shortest `s`-`t` paths in id order, at most `limit` of them. The flag is false when truncated.
pub fn enumerate_shortest_paths(
    graph: &Graph,
    s: usize,
    t: usize,
    limit: usize,
) -> (Vec<Path>, bool) {
    let ds = bfs_distances(graph, s);
    if ds[t] == UNREACHABLE {
        return (Vec::new(), true);
    }
    let dt = bfs_distances(graph, t);
    let mut out = Vec::new();
    let mut stack = vec![s];
    let complete = extend(graph, &ds, &dt, t, &mut stack, &mut out, limit);
    (out, complete)
}

fn extend(
    graph: &Graph,
    ds: &[u32],
    dt: &[u32],
    t: usize,
    stack: &mut Vec<usize>,
    out: &mut Vec<Path>,
    limit: usize,
) -> bool {
    let v = *stack.last().unwrap();
    if v == t {
        if out.len() == limit {
            return false;
        }
        out.push(Path(stack.clone()));
        return true;
    }
    for &w in graph.neighbors(v) {
        if ds[w] == ds[v] + 1 && dt[w] != UNREACHABLE && dt[w] + 1 == dt[v] {
            stack.push(w);
            let ok = extend(graph, ds, dt, t, stack, out, limit);
            stack.pop();
            if !ok {
                return false;
            }
        }
    }
    true
}

/// Number of shortest `s`-`t` paths, saturating.
pub fn count_shortest_paths(graph: &Graph, s: usize, t: usize) -> u64 {
    let ds = bfs_distances(graph, s);
    if ds[t] == UNREACHABLE {
        return 0;
    }
    let mut order: Vec<usize> = (0..graph.n()).filter(|&v| ds[v] <= ds[t]).collect();
    order.sort_by_key(|&v| ds[v]);
    let mut count = vec![0u64; graph.n()];
    count[s] = 1;
    for &v in &order {
        for &w in graph.neighbors(v) {
            if ds[w] == ds[v] + 1 {
                count[w] = count[w].saturating_add(count[v]);
            }
        }
    }
    count[t]
}

struct Search<'a> {
    used: Vec<bool>,
    chosen: Vec<Option<&'a Path>>,
    nodes: u64,
    limits: EnumLimits,
    start: Instant,
}

/// Backtracking over per-pair shortest paths, fewest alternatives first, pruning on shared vertices.
pub fn oracle_solve(instance: &Instance, limits: EnumLimits) -> OracleResult {
    let pos = compute_positions(instance);
    if pos.any_pair_unreachable(instance) {
        return OracleResult::No;
    }
    let mut lists = Vec::with_capacity(instance.k());
    for (i, &(s, t)) in instance.terminals.iter().enumerate() {
        let (paths, complete) =
            enumerate_shortest_paths(&instance.graph, s, t, limits.max_paths_per_pair);
        if !complete {
            return OracleResult::Limit(format!(
                "pair {i} has more than {} shortest paths",
                limits.max_paths_per_pair
            ));
        }
        lists.push((i, paths));
    }
    lists.sort_by_key(|(i, p)| (p.len(), *i));
    let mut search = Search {
        chosen: vec![None; instance.k()],
        used: vec![false; instance.graph.n()],
        nodes: 0,
        limits,
        start: Instant::now(),
    };
    let outcome = backtrack(&mut search, &lists, 0);
    match outcome {
        Err(msg) => OracleResult::Limit(msg),
        Ok(false) => OracleResult::No,
        Ok(true) => {
            let paths = search
                .chosen
                .iter()
                .map(|p| p.expect("all pairs chosen").clone())
                .collect();
            let solution = Solution { paths };
            assert_eq!(
                verify_solution(instance, &pos, &solution),
                Ok(()),
                "oracle produced an invalid solution"
            );
            OracleResult::Yes(solution)
        }
    }
}

fn backtrack<'a>(
    search: &mut Search<'a>,
    lists: &'a [(usize, Vec<Path>)],
    depth: usize,
) -> Result<bool, String> {
    if depth == lists.len() {
        return Ok(true);
    }
    let (pair, ref paths) = lists[depth];
    for path in paths {
        search.nodes += 1;
        if search.nodes > search.limits.max_nodes {
            return Err(format!("node limit {} reached", search.limits.max_nodes));
        }
        if let Some(budget) = search.limits.time_budget {
            if search.nodes % 4096 == 0 && search.start.elapsed() > budget {
                return Err("time budget exhausted".into());
            }
        }
        if path.vertices().iter().any(|&v| search.used[v]) {
            continue;
        }
        for &v in path.vertices() {
            search.used[v] = true;
        }
        search.chosen[pair] = Some(path);
        if backtrack(search, lists, depth + 1)? {
            return Ok(true);
        }
        search.chosen[pair] = None;
        for &v in path.vertices() {
            search.used[v] = false;
        }
    }
    Ok(false)
}
