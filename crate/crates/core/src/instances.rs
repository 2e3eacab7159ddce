//! Instance corpus: the two-pair example graph, seeded random generators, and the
//! Multicolored Clique reduction together with a brute-force clique checker.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{InputError, SolveError};
use crate::graph::{bfs_distances, Graph, Instance, UNREACHABLE};
use crate::layered_dag::{Dag, DagDisjointInstance};

/// Vertex ids of the labelled example graph, in id order.
pub const FIG1_LABELS: [&str; 14] = [
    "s1", "a1", "a2", "a3", "s2", "t1", "b0", "b1", "b2", "b3", "b4", "t2", "c1", "c2",
];

/// The 14-vertex example with pairs (s1, t1) and (s2, t2).
pub fn builtin_fig1() -> Instance {
    let edges = [
        (0, 1),
        (1, 2),
        (2, 3),
        (3, 4),
        (1, 8),
        (2, 7),
        (1, 3),
        (2, 9),
        (8, 3),
        (5, 6),
        (6, 7),
        (7, 8),
        (8, 9),
        (9, 10),
        (10, 11),
        (6, 12),
        (12, 13),
        (13, 4),
    ];
    let graph = Graph::new(14, &edges).expect("example graph is simple");
    Instance::new(graph, vec![(0, 5), (4, 11)]).expect("example terminals are distinct")
}

const RANDOM_RETRIES: usize = 1000;

/// Erdos-Renyi graph with `k` distinct terminal pairs, each connected.
///
/// Resamples the whole instance until every pair is connected.
pub fn gen_random(n: usize, edge_prob: f64, k: usize, seed: u64) -> Result<Instance, InputError> {
    if k == 0 {
        return Err(InputError::invalid("k must be at least 1"));
    }
    if n < 2 * k {
        return Err(InputError::invalid(format!(
            "need n >= 2k, got n = {n}, k = {k}"
        )));
    }
    if !(edge_prob > 0.0 && edge_prob <= 1.0) {
        return Err(InputError::invalid(format!(
            "edge probability {edge_prob} not in (0, 1]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RANDOM_RETRIES {
        let graph = random_graph(n, edge_prob, &mut rng);
        let mut ids: Vec<usize> = (0..n).collect();
        ids.shuffle(&mut rng);
        let terminals: Vec<_> = (0..k).map(|i| (ids[2 * i], ids[2 * i + 1])).collect();
        if terminals
            .iter()
            .all(|&(s, t)| bfs_distances(&graph, s)[t] != UNREACHABLE)
        {
            return Instance::new(graph, terminals);
        }
    }
    Err(InputError::invalid(format!(
        "no connected terminal choice after {RANDOM_RETRIES} attempts"
    )))
}

/// G(n, p) with a caller-supplied generator.
pub fn random_graph<R: Rng>(n: usize, edge_prob: f64, rng: &mut R) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(edge_prob) {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, &edges).expect("generated edges are simple")
}

/// `rows x cols` grid; vertex `(r, c)` has id `r * cols + c`.
pub fn grid_graph(rows: usize, cols: usize) -> Graph {
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                edges.push((v, v + 1));
            }
            if r + 1 < rows {
                edges.push((v, v + cols));
            }
        }
    }
    Graph::new(rows * cols, &edges).expect("grid is simple")
}

/// Grid with the two diagonals as terminal pairs, which must cross.
pub fn grid_crossing_instance(side: usize) -> Instance {
    assert!(side >= 2, "grid side must be at least 2");
    let id = |r: usize, c: usize| r * side + c;
    let last = side - 1;
    Instance::new(
        grid_graph(side, side),
        vec![(id(0, 0), id(last, last)), (id(0, last), id(last, 0))],
    )
    .expect("grid corners are distinct")
}

/// DAG on `0..n` with each forward arc `u -> v` (`u < v`) present with probability `arc_prob`.
pub fn gen_random_dag(n: usize, arc_prob: f64, seed: u64) -> Dag {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut arcs = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(arc_prob) {
                arcs.push((u, v));
            }
        }
    }
    Dag::from_arcs(n, &arcs).expect("forward arcs are acyclic")
}

/// `layers` layers of `width` vertices; arcs join consecutive layers with probability `arc_prob`.
/// Vertex `(l, x)` has id `l * width + x`.
pub fn gen_layered_dag(layers: usize, width: usize, arc_prob: f64, seed: u64) -> Dag {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut arcs = Vec::new();
    for l in 0..layers.saturating_sub(1) {
        for x in 0..width {
            for y in 0..width {
                if rng.gen_bool(arc_prob) {
                    arcs.push((l * width + x, (l + 1) * width + y));
                }
            }
        }
    }
    Dag::from_arcs(layers * width, &arcs).expect("layered arcs are acyclic")
}

/// Fixed-depth layered DAG with a 2-pair no-instance that forces a full DP sweep: the second
/// target is an extra vertex without in-arcs, ordered last.
pub fn gen_dp_no_instance(
    layers: usize,
    width: usize,
    arc_prob: f64,
    seed: u64,
) -> (Dag, DagDisjointInstance) {
    assert!(layers >= 2 && width >= 2, "need two layers of width two");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut arcs = Vec::new();
    for l in 0..layers - 1 {
        for x in 0..width {
            for y in 0..width {
                if rng.gen_bool(arc_prob) {
                    arcs.push((l * width + x, (l + 1) * width + y));
                }
            }
        }
    }
    let sink = layers * width;
    let dag = Dag::from_arcs(sink + 1, &arcs).expect("layered arcs are acyclic");
    let last = (layers - 1) * width;
    (
        dag,
        DagDisjointInstance {
            pairs: vec![(0, last), (1, sink)],
            blocked: Vec::new(),
        },
    )
}

/// A graph with a proper-or-not vertex coloring into `k` classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MccInstance {
    pub graph: Graph,
    pub k: usize,
    /// Color of each vertex, in `0..k`.
    pub coloring: Vec<usize>,
}

impl MccInstance {
    pub fn new(graph: Graph, k: usize, coloring: Vec<usize>) -> Result<Self, InputError> {
        if k == 0 {
            return Err(InputError::invalid("k must be at least 1"));
        }
        if coloring.len() != graph.n() {
            return Err(InputError::invalid(format!(
                "coloring covers {} vertices, graph has {}",
                coloring.len(),
                graph.n()
            )));
        }
        if let Some(v) = coloring.iter().position(|&c| c >= k) {
            return Err(InputError::invalid(format!(
                "vertex {v} has color {} outside [0, {k})",
                coloring[v]
            )));
        }
        for c in 0..k {
            if !coloring.contains(&c) {
                return Err(InputError::invalid(format!("color class {c} is empty")));
            }
        }
        Ok(MccInstance { graph, k, coloring })
    }

    pub fn class(&self, c: usize) -> Vec<usize> {
        (0..self.graph.n())
            .filter(|&v| self.coloring[v] == c)
            .collect()
    }

    /// Renders the `p mcc n m k` text format.
    pub fn to_mcc_string(&self) -> String {
        let mut out = format!("p mcc {} {} {}\n", self.graph.n(), self.graph.m(), self.k);
        for (u, v) in self.graph.edges() {
            out.push_str(&format!("e {u} {v}\n"));
        }
        for (v, c) in self.coloring.iter().enumerate() {
            out.push_str(&format!("v {v} {c}\n"));
        }
        out
    }
}

/// Parses `p mcc <n> <m> <k>`, `e u v` and `v <vertex> <color>` lines; `c` lines are comments.
pub fn parse_mcc(text: &str) -> Result<MccInstance, InputError> {
    let mut header = None;
    let mut edges = Vec::new();
    let mut coloring: Vec<Option<usize>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let toks: Vec<&str> = raw.split_whitespace().collect();
        let Some(&tag) = toks.first() else { continue };
        let nums = |from: usize| -> Result<Vec<usize>, InputError> {
            toks[from..]
                .iter()
                .map(|t| {
                    t.parse().map_err(|_| {
                        InputError::syntax(line, format!("'{t}' is not a non-negative integer"))
                    })
                })
                .collect()
        };
        match tag {
            "c" => {}
            "p" => {
                if header.is_some() {
                    return Err(InputError::syntax(line, "duplicate header"));
                }
                if toks.get(1) != Some(&"mcc") || toks.len() != 5 {
                    return Err(InputError::syntax(
                        line,
                        "header must be 'p mcc <n> <m> <k>'",
                    ));
                }
                let f = nums(2)?;
                coloring = vec![None; f[0]];
                header = Some((f[0], f[1], f[2]));
            }
            "e" | "v" => {
                let Some((n, _, _)) = header else {
                    return Err(InputError::syntax(line, "data line before header"));
                };
                if toks.len() != 3 {
                    return Err(InputError::syntax(line, "expected 2 integers"));
                }
                let f = nums(1)?;
                if f[0] >= n || (tag == "e" && f[1] >= n) {
                    return Err(InputError::syntax(
                        line,
                        format!("vertex id out of range [0, {n})"),
                    ));
                }
                if tag == "e" {
                    edges.push((f[0], f[1]));
                } else if coloring[f[0]].replace(f[1]).is_some() {
                    return Err(InputError::syntax(
                        line,
                        format!("vertex {} colored twice", f[0]),
                    ));
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
    let (n, m, k) = header.ok_or_else(|| InputError::syntax(0, "missing 'p mcc' header"))?;
    if edges.len() != m {
        return Err(InputError::invalid(format!(
            "header declares {m} edges, found {}",
            edges.len()
        )));
    }
    let coloring = coloring
        .into_iter()
        .enumerate()
        .map(|(v, c)| c.ok_or_else(|| InputError::invalid(format!("vertex {v} has no color"))))
        .collect::<Result<Vec<_>, _>>()?;
    MccInstance::new(Graph::new(n, &edges)?, k, coloring)
}

/// Random MCC instance with `k` classes of 1 to `max_per_color` vertices.
pub fn gen_random_mcc(k: usize, max_per_color: usize, edge_prob: f64, seed: u64) -> MccInstance {
    assert!(k >= 1 && max_per_color >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coloring = Vec::new();
    for c in 0..k {
        let size = rng.gen_range(1..=max_per_color);
        coloring.extend(std::iter::repeat(c).take(size));
    }
    coloring.shuffle(&mut rng);
    let graph = random_graph(coloring.len(), edge_prob, &mut rng);
    MccInstance::new(graph, k, coloring).expect("every class is nonempty")
}

/// Exhaustive search for a clique with one vertex of each color.
///
/// Fails when the product of class sizes exceeds `budget`.
pub fn mcc_bruteforce(mcc: &MccInstance, budget: u64) -> Result<bool, SolveError> {
    let classes: Vec<Vec<usize>> = (0..mcc.k).map(|c| mcc.class(c)).collect();
    let space = classes
        .iter()
        .try_fold(1u64, |acc, c| acc.checked_mul(c.len() as u64));
    match space {
        Some(s) if s <= budget => {}
        _ => {
            return Err(SolveError::Budget(format!(
                "candidate space exceeds {budget}"
            )))
        }
    }
    fn pick(mcc: &MccInstance, classes: &[Vec<usize>], chosen: &mut Vec<usize>) -> bool {
        let Some(class) = classes.get(chosen.len()) else {
            return true;
        };
        for &v in class {
            if chosen.iter().all(|&u| mcc.graph.has_edge(u, v)) {
                chosen.push(v);
                if pick(mcc, classes, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    Ok(pick(mcc, &classes, &mut Vec::new()))
}

/// Output of the reduction with naming and merge provenance.
#[derive(Debug, Clone)]
pub struct MccReduction {
    pub instance: Instance,
    /// Human-readable name of every vertex of the generated graph.
    pub names: Vec<String>,
    /// `(kept, absorbed)` name pairs, one per merge.
    pub merges: Vec<(String, String)>,
    /// Vertex count of the construction before any merge.
    pub unmerged_vertex_count: usize,
}

impl MccReduction {
    /// Provenance lines for `--trace`.
    pub fn trace_lines(&self) -> Vec<String> {
        self.merges
            .iter()
            .map(|(p, q)| format!("merge {p} <- {q}"))
            .collect()
    }
}

/// Builds the 2k-pair instance whose answer is yes iff `mcc` has a multicolored clique.
pub fn gen_mcc_reduction(mcc: &MccInstance) -> Instance {
    gen_mcc_reduction_traced(mcc).instance
}

pub fn gen_mcc_reduction_traced(mcc: &MccInstance) -> MccReduction {
    let n = mcc.graph.n();
    let k = mcc.k;
    let mut names = Vec::new();
    let mut edges = Vec::new();
    let fresh = |name: String, names: &mut Vec<String>| {
        names.push(name);
        names.len() - 1
    };
    // s_a, t_a for a in 1..=2k, stored as ids 2(a-1), 2(a-1)+1.
    for a in 1..=2 * k {
        fresh(format!("s{a}"), &mut names);
        fresh(format!("t{a}"), &mut names);
    }
    let source = |a: usize| 2 * a;
    let sink = |a: usize| 2 * a + 1;
    let chain = |ids: &[usize], edges: &mut Vec<(usize, usize)>| {
        for w in ids.windows(2) {
            edges.push((w[0], w[1]));
        }
    };

    // p[v][j-1] = id of p_v^j; same for q.
    let mut p = vec![vec![0usize; n]; n];
    let mut q = vec![vec![0usize; n]; n];
    let mut merges = Vec::new();
    let mut unmerged = 4 * k;
    for horizontal in [true, false] {
        for v in 0..n {
            let c = mcc.coloring[v] + if horizontal { 0 } else { k };
            let letter = if horizontal { "p" } else { "q" };
            let mut ids = vec![source(c)];
            for x in 1..=n {
                ids.push(fresh(format!("{letter}{v}_s{x}"), &mut names));
            }
            for j in 1..=n {
                let id = if horizontal {
                    fresh(format!("p{v}^{j}"), &mut names)
                } else {
                    let vi = j - 1;
                    let conflict =
                        mcc.coloring[vi] == mcc.coloring[v] || !mcc.graph.has_edge(vi, v);
                    if vi != v && conflict {
                        let kept = p[vi][v];
                        merges.push((names[kept].clone(), format!("q{v}^{j}")));
                        kept
                    } else {
                        fresh(format!("q{v}^{j}"), &mut names)
                    }
                };
                ids.push(id);
                if horizontal {
                    p[v][j - 1] = id;
                } else {
                    q[v][j - 1] = id;
                }
            }
            for x in 1..=n {
                ids.push(fresh(format!("{letter}{v}_t{x}"), &mut names));
            }
            ids.push(sink(c));
            unmerged += 3 * n;
            chain(&ids, &mut edges);
        }
    }
    let graph = Graph::new(names.len(), &edges).expect("reduction graph is simple");
    let terminals = (0..2 * k).map(|a| (source(a), sink(a))).collect();
    let instance = Instance::new(graph, terminals).expect("reduction terminals are distinct");
    check_distance_invariants(mcc, &instance, &p, &q);
    MccReduction {
        instance,
        names,
        merges,
        unmerged_vertex_count: unmerged,
    }
}

/// Lower bounds on source distances that make the long paths the only shortest ones.
fn check_distance_invariants(
    mcc: &MccInstance,
    inst: &Instance,
    p: &[Vec<usize>],
    q: &[Vec<usize>],
) {
    let n = mcc.graph.n();
    let k = mcc.k;
    for a in 0..2 * k {
        let dist = bfs_distances(&inst.graph, inst.terminals[a].0);
        let horizontal = a < k;
        for vi in 0..n {
            for j in 1..=n {
                let i = vi + 1;
                let (bound_p, bound_q) = if horizontal {
                    (n + j, n + i)
                } else {
                    (n + i, n + j)
                };
                let (dp, dq) = (dist[p[vi][j - 1]], dist[q[vi][j - 1]]);
                assert!(
                    dp == UNREACHABLE || dp as usize >= bound_p,
                    "distance bound violated at p{vi}^{j}"
                );
                assert!(
                    dq == UNREACHABLE || dq as usize >= bound_q,
                    "distance bound violated at q{vi}^{j}"
                );
            }
        }
    }
}
