//! Graphs, instances, BFS distances, the position embedding and solution checking.

use std::collections::VecDeque;
use std::fmt;
use std::io::Read;

use crate::error::InputError;

/// Distance value used for vertices that a BFS never reaches.
pub const UNREACHABLE: u32 = u32::MAX;

/// Immutable simple undirected graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    m: usize,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicate edges and out-of-range ids.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self, InputError> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(InputError::invalid(format!(
                    "edge {u}-{v} out of range for n = {n}"
                )));
            }
            if u == v {
                return Err(InputError::invalid(format!("self-loop at vertex {u}")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for (v, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(InputError::invalid(format!("duplicate edge {v}-{}", w[0])));
            }
        }
        Ok(Graph {
            adj,
            m: edges.len(),
        })
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n() && self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }
}

/// A k-DSP instance: a graph together with k ordered terminal pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub graph: Graph,
    pub terminals: Vec<(usize, usize)>,
}

impl Instance {
    /// Validates the terminal list: `k >= 1`, ids in range, all `2k` terminals distinct.
    pub fn new(graph: Graph, terminals: Vec<(usize, usize)>) -> Result<Self, InputError> {
        if terminals.is_empty() {
            return Err(InputError::invalid("k must be at least 1"));
        }
        let n = graph.n();
        let mut seen = vec![false; n];
        for (i, &(s, t)) in terminals.iter().enumerate() {
            if s >= n || t >= n {
                return Err(InputError::invalid(format!(
                    "terminal pair {i} out of range"
                )));
            }
            if s == t {
                return Err(InputError::invalid(format!(
                    "terminals within a pair must be distinct (pair {i}: {s} {t})"
                )));
            }
            for v in [s, t] {
                if seen[v] {
                    return Err(InputError::invalid(format!(
                        "terminal vertex {v} is used more than once"
                    )));
                }
                seen[v] = true;
            }
        }
        Ok(Instance { graph, terminals })
    }

    pub fn k(&self) -> usize {
        self.terminals.len()
    }

    pub fn is_terminal(&self, v: usize) -> bool {
        self.terminals.iter().any(|&(s, t)| s == v || t == v)
    }

    /// Renders the instance in the line-oriented DSP format.
    pub fn to_dsp_string(&self) -> String {
        let mut out = format!("p dsp {} {} {}\n", self.graph.n(), self.graph.m(), self.k());
        for (u, v) in self.graph.edges() {
            out.push_str(&format!("e {u} {v}\n"));
        }
        for &(s, t) in &self.terminals {
            out.push_str(&format!("t {s} {t}\n"));
        }
        out
    }
}

fn parse_fields<const N: usize>(
    line: usize,
    rest: &mut std::str::SplitWhitespace<'_>,
    what: &str,
) -> Result<[usize; N], InputError> {
    let mut out = [0usize; N];
    for slot in out.iter_mut() {
        let tok = rest
            .next()
            .ok_or_else(|| InputError::syntax(line, format!("{what}: expected {N} integers")))?;
        *slot = tok.parse().map_err(|_| {
            InputError::syntax(
                line,
                format!("{what}: '{tok}' is not a non-negative integer"),
            )
        })?;
    }
    if rest.next().is_some() {
        return Err(InputError::syntax(line, format!("{what}: trailing tokens")));
    }
    Ok(out)
}

/// Parses the DSP text format (`c`, `p dsp n m k`, `e u v`, `t s t`).
pub fn parse_instance(text: &str) -> Result<Instance, InputError> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut edges = Vec::new();
    let mut terminals = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let mut toks = raw.split_whitespace();
        let Some(tag) = toks.next() else { continue };
        match tag {
            "c" => continue,
            "p" => {
                if header.is_some() {
                    return Err(InputError::syntax(line, "duplicate header"));
                }
                if toks.next() != Some("dsp") {
                    return Err(InputError::syntax(
                        line,
                        "header must be 'p dsp <n> <m> <k>'",
                    ));
                }
                let [n, m, k] = parse_fields::<3>(line, &mut toks, "header")?;
                header = Some((n, m, k));
            }
            "e" | "t" => {
                let Some((n, _, _)) = header else {
                    return Err(InputError::syntax(line, "data line before header"));
                };
                let [u, v] = parse_fields::<2>(
                    line,
                    &mut toks,
                    if tag == "e" { "edge" } else { "terminal" },
                )?;
                if u >= n || v >= n {
                    return Err(InputError::syntax(
                        line,
                        format!("vertex id out of range [0, {n})"),
                    ));
                }
                if tag == "e" {
                    if u == v {
                        return Err(InputError::syntax(line, format!("self-loop at vertex {u}")));
                    }
                    edges.push((u, v, line));
                } else {
                    if u == v {
                        return Err(InputError::syntax(
                            line,
                            "terminals within a pair must be distinct",
                        ));
                    }
                    terminals.push((u, v, line));
                }
            }
            other => {
                return Err(InputError::syntax(
                    line,
                    format!("unknown line type '{other}'"),
                ))
            }
        }
    }
    let (n, m, k) = header.ok_or_else(|| InputError::syntax(0, "missing 'p dsp' header"))?;
    if edges.len() != m {
        return Err(InputError::invalid(format!(
            "header declares {m} edges, found {}",
            edges.len()
        )));
    }
    if k == 0 {
        return Err(InputError::invalid("k must be at least 1"));
    }
    if terminals.len() != k {
        return Err(InputError::invalid(format!(
            "header declares {k} terminal pairs, found {}",
            terminals.len()
        )));
    }
    let mut seen = std::collections::HashSet::new();
    for &(u, v, line) in &edges {
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(InputError::syntax(line, format!("duplicate edge {u}-{v}")));
        }
    }
    let mut used = vec![false; n];
    for &(s, t, line) in &terminals {
        for v in [s, t] {
            if used[v] {
                return Err(InputError::syntax(
                    line,
                    format!("terminal vertex {v} is repeated"),
                ));
            }
            used[v] = true;
        }
    }
    let plain: Vec<_> = edges.iter().map(|&(u, v, _)| (u, v)).collect();
    let graph = Graph::new(n, &plain)?;
    Instance::new(graph, terminals.iter().map(|&(s, t, _)| (s, t)).collect())
}

/// Reads and parses an instance from any byte source.
pub fn read_instance<R: Read>(mut reader: R) -> Result<Instance, InputError> {
    let mut buf = String::new();
    reader
        .read_to_string(&mut buf)
        .map_err(|e| InputError::invalid(format!("read failed: {e}")))?;
    parse_instance(&buf)
}

/// Unweighted single-source distances; `UNREACHABLE` for other components.
pub fn bfs_distances(graph: &Graph, source: usize) -> Vec<u32> {
    let mut dist = vec![UNREACHABLE; graph.n()];
    let mut queue = VecDeque::new();
    dist[source] = 0;
    queue.push_back(source);
    while let Some(v) = queue.pop_front() {
        let d = dist[v] + 1;
        for &w in graph.neighbors(v) {
            if dist[w] == UNREACHABLE {
                dist[w] = d;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// `pos[v][i] = dist(s_i, v)`, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionTable {
    k: usize,
    data: Vec<u32>,
}

impl PositionTable {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        if self.k == 0 {
            0
        } else {
            self.data.len() / self.k
        }
    }

    pub fn get(&self, v: usize, i: usize) -> u32 {
        self.data[v * self.k + i]
    }

    pub fn row(&self, v: usize) -> &[u32] {
        &self.data[v * self.k..(v + 1) * self.k]
    }

    /// Whether every coordinate of `v` is finite.
    pub fn reachable(&self, v: usize) -> bool {
        self.row(v).iter().all(|&d| d != UNREACHABLE)
    }

    /// `dist(s_i, t_i)` as read off the table.
    pub fn pair_distance(&self, instance: &Instance, i: usize) -> u32 {
        self.get(instance.terminals[i].1, i)
    }

    /// True iff some terminal pair lies in different components.
    pub fn any_pair_unreachable(&self, instance: &Instance) -> bool {
        (0..instance.k()).any(|i| self.pair_distance(instance, i) == UNREACHABLE)
    }
}

/// Runs one BFS per source vertex.
pub fn compute_positions(instance: &Instance) -> PositionTable {
    let n = instance.graph.n();
    let k = instance.k();
    let mut data = vec![0u32; n * k];
    for (i, &(s, _)) in instance.terminals.iter().enumerate() {
        let d = bfs_distances(&instance.graph, s);
        for v in 0..n {
            data[v * k + i] = d[v];
        }
    }
    PositionTable { k, data }
}

/// All-pairs BFS distances, for the small graphs the guessing solver and tests work on.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<u32>,
}

impl DistanceMatrix {
    pub fn new(graph: &Graph) -> Self {
        let n = graph.n();
        let mut data = Vec::with_capacity(n * n);
        for v in 0..n {
            data.extend(bfs_distances(graph, v));
        }
        DistanceMatrix { n, data }
    }

    pub fn dist(&self, u: usize, v: usize) -> u32 {
        self.data[u * self.n + v]
    }

    /// `v` lies on some shortest `u`-`w` path.
    pub fn between(&self, u: usize, v: usize, w: usize) -> bool {
        between_values(self.dist(u, v), self.dist(v, w), self.dist(u, w))
    }
}

fn between_values(uv: u32, vw: u32, uw: u32) -> bool {
    uv != UNREACHABLE
        && vw != UNREACHABLE
        && uw != UNREACHABLE
        && uv as u64 + vw as u64 == uw as u64
}

/// `dist(u,v) + dist(v,w) = dist(u,w)`, computed with two BFS runs.
pub fn between(graph: &Graph, u: usize, v: usize, w: usize) -> bool {
    let du = bfs_distances(graph, u);
    let dw = bfs_distances(graph, w);
    between_values(du[v], dw[v], du[w])
}

/// A walk given by its vertex sequence; `verify_solution` checks it is a shortest path.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path(pub Vec<usize>);

impl Path {
    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> usize {
        self.0[0]
    }

    pub fn last(&self) -> usize {
        self.0[self.0.len() - 1]
    }

    pub fn reversed(&self) -> Path {
        Path(self.0.iter().rev().copied().collect())
    }
}

impl From<Vec<usize>> for Path {
    fn from(v: Vec<usize>) -> Self {
        Path(v)
    }
}

/// One path per terminal pair, in pair order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub paths: Vec<Path>,
}

/// First violated condition found by `verify_solution`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    PathCount {
        expected: usize,
        found: usize,
    },
    Empty {
        path: usize,
    },
    Endpoints {
        path: usize,
    },
    NotAdjacent {
        path: usize,
        u: usize,
        v: usize,
    },
    NotShortest {
        path: usize,
        length: usize,
        distance: u32,
    },
    Disjointness {
        vertex: usize,
        first: usize,
        second: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::PathCount { expected, found } => {
                write!(f, "expected {expected} paths, found {found}")
            }
            Violation::Empty { path } => write!(f, "path {path} is empty"),
            Violation::Endpoints { path } => write!(f, "path {path} does not join its terminals"),
            Violation::NotAdjacent { path, u, v } => {
                write!(f, "path {path}: {u} and {v} are not adjacent")
            }
            Violation::NotShortest {
                path,
                length,
                distance,
            } => write!(
                f,
                "path {path} not shortest: length {length}, distance {}",
                if distance == UNREACHABLE {
                    "unreachable".to_string()
                } else {
                    distance.to_string()
                }
            ),
            Violation::Disjointness {
                vertex,
                first,
                second,
            } => {
                write!(
                    f,
                    "disjointness: vertex {vertex} used by paths {first} and {second}"
                )
            }
        }
    }
}

/// Checks endpoints, adjacency, shortestness and pairwise vertex-disjointness.
pub fn verify_solution(
    instance: &Instance,
    positions: &PositionTable,
    candidate: &Solution,
) -> Result<(), Violation> {
    let k = instance.k();
    if candidate.paths.len() != k {
        return Err(Violation::PathCount {
            expected: k,
            found: candidate.paths.len(),
        });
    }
    let mut owner = vec![usize::MAX; instance.graph.n()];
    for (i, path) in candidate.paths.iter().enumerate() {
        let vs = path.vertices();
        if vs.is_empty() {
            return Err(Violation::Empty { path: i });
        }
        let (s, t) = instance.terminals[i];
        if vs[0] != s || vs[vs.len() - 1] != t {
            return Err(Violation::Endpoints { path: i });
        }
        for w in vs.windows(2) {
            if !instance.graph.has_edge(w[0], w[1]) {
                return Err(Violation::NotAdjacent {
                    path: i,
                    u: w[0],
                    v: w[1],
                });
            }
        }
        let distance = positions.pair_distance(instance, i);
        if distance == UNREACHABLE || path.len() != distance as usize {
            return Err(Violation::NotShortest {
                path: i,
                length: path.len(),
                distance,
            });
        }
        for &v in vs {
            if v >= owner.len() {
                return Err(Violation::NotAdjacent { path: i, u: v, v });
            }
            if owner[v] != usize::MAX {
                return Err(Violation::Disjointness {
                    vertex: v,
                    first: owner[v],
                    second: i,
                });
            }
            owner[v] = i;
        }
    }
    Ok(())
}

/// Renders a solver answer: `yes` plus one `path <i>:` line per pair, or `no`.
pub fn format_solution(solution: Option<&Solution>) -> String {
    match solution {
        None => "no\n".to_string(),
        Some(sol) => {
            let mut out = String::from("yes\n");
            for (i, p) in sol.paths.iter().enumerate() {
                let body: Vec<String> = p.vertices().iter().map(|v| v.to_string()).collect();
                out.push_str(&format!("path {i}: {}\n", body.join(" ")));
            }
            out
        }
    }
}

/// Parses the output of `format_solution`. Returns `None` for a `no` answer.
pub fn parse_solution(text: &str) -> Result<Option<Solution>, InputError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('c'));
    let Some((line, verdict)) = lines.next() else {
        return Err(InputError::syntax(0, "empty solution"));
    };
    match verdict {
        "no" => return Ok(None),
        "yes" => {}
        _ => return Err(InputError::syntax(line, "expected 'yes' or 'no'")),
    }
    let mut paths = Vec::new();
    for (line, l) in lines {
        let rest = l
            .strip_prefix("path")
            .ok_or_else(|| InputError::syntax(line, "expected 'path <i>: ...'"))?;
        let (idx, body) = rest
            .split_once(':')
            .ok_or_else(|| InputError::syntax(line, "missing ':'"))?;
        let idx: usize = idx
            .trim()
            .parse()
            .map_err(|_| InputError::syntax(line, "bad path index"))?;
        if idx != paths.len() {
            return Err(InputError::syntax(
                line,
                format!("expected path {}, found {idx}", paths.len()),
            ));
        }
        let verts = body
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| InputError::syntax(line, format!("bad vertex '{t}'")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        paths.push(Path(verts));
    }
    Ok(Some(Solution { paths }))
}
