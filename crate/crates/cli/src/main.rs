use std::fs;
use std::io::{self, Read};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use kdsp_core::dsp2::solve_dsp2_traced;
use kdsp_core::geometry::project;
use kdsp_core::instances::{
    builtin_fig1, gen_mcc_reduction_traced, gen_random, grid_crossing_instance, parse_mcc,
};
use kdsp_core::kdsp::{solve_kdsp, KdspAnswer, KdspConfig};
use kdsp_core::oracle::{oracle_solve, EnumLimits, OracleResult};
use kdsp_core::{
    compute_positions, format_solution, parse_instance, parse_solution, verify_solution, Instance,
    Solution,
};

const YES: u8 = 0;
const NO: u8 = 1;
const ERROR: u8 = 2;
const UNKNOWN: u8 = 3;

#[derive(Parser)]
#[command(name = "dsp", version, about = "Disjoint shortest paths solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance; exit 0 yes, 1 no, 3 unknown.
    Solve(SolveArgs),
    /// Exhaustive reference solver.
    Oracle {
        #[arg(long, default_value_t = 200_000)]
        max_paths: usize,
        file: PathBuf,
    },
    /// Write an instance to stdout.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Check a solution file against an instance; exit 0 valid, 1 invalid.
    Verify {
        instance: PathBuf,
        solution: PathBuf,
    },
    /// Solve once and print phase timings as one line.
    Bench(SolveArgs),
    /// Graphviz scatter of the (a,b)-projection with pair rectangles and optional paths.
    ExportDot {
        #[arg(long, default_value_t = 0)]
        a: usize,
        #[arg(long, default_value_t = 1)]
        b: usize,
        #[arg(long)]
        solution: Option<PathBuf>,
        file: PathBuf,
    },
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_enum, default_value_t = Algo::Auto)]
    algo: Algo,
    /// Guess budget for kdsp.
    #[arg(long, conflicts_with = "require_complete")]
    budget: Option<u64>,
    /// Run kdsp without a guess budget, so the answer is never unknown.
    #[arg(long)]
    require_complete: bool,
    /// Print the case or the winning guess on stderr.
    #[arg(long)]
    trace: bool,
    /// Worker threads for kdsp guess evaluation.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Instance file, or `-` for stdin.
    file: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Auto,
    Dsp2,
    Kdsp,
}

#[derive(Subcommand)]
enum GenKind {
    /// Seeded random graph with connected terminal pairs.
    Random {
        #[arg(long, default_value_t = 12)]
        n: usize,
        #[arg(long, default_value_t = 0.3)]
        p: f64,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// The 14-vertex two-pair example.
    Fig1,
    /// Two crossing diagonal pairs on a square grid.
    Grid {
        #[arg(long, default_value_t = 40)]
        side: usize,
    },
    /// Reduction of a multicolored clique instance; `--trace` lists merges on stderr.
    Mcc {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        trace: bool,
    },
}

fn read_input(path: &PathBuf) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .context("reading stdin")?;
        Ok(s)
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

fn load(path: &PathBuf) -> Result<Instance> {
    Ok(parse_instance(&read_input(path)?)?)
}

struct Answer {
    solution: Option<Solution>,
    unknown: bool,
    trace: Vec<String>,
    guesses: Option<u64>,
    eval_ms: Option<f64>,
}

fn solve(inst: &Instance, args: &SolveArgs) -> Result<Answer> {
    let use_dsp2 = match args.algo {
        Algo::Auto => inst.k() == 2,
        Algo::Dsp2 => true,
        Algo::Kdsp => false,
    };
    if use_dsp2 {
        let out = solve_dsp2_traced(inst)?;
        let mut trace = Vec::new();
        if let Some(case) = &out.case {
            trace.push(format!(
                "case {case}{}",
                if out.swapped { " (s2/t2 swapped)" } else { "" }
            ));
        }
        trace.push(format!(
            "branches {:?} cyclic {}",
            out.stats.branches, out.stats.cyclic
        ));
        return Ok(Answer {
            solution: out.solution,
            unknown: false,
            trace,
            guesses: None,
            eval_ms: None,
        });
    }
    let mut cfg = KdspConfig {
        threads: args.threads.max(1),
        ..KdspConfig::default()
    };
    if let Some(b) = args.budget {
        cfg.guess_budget = b;
    }
    if args.require_complete {
        cfg.guess_budget = u64::MAX;
    }
    let out = solve_kdsp(inst, &cfg)?;
    let mut trace = vec![format!(
        "guesses {} evaluated {} complete {}",
        out.stats.guesses, out.stats.evaluated, out.stats.complete
    )];
    if let Some(g) = &out.guess {
        trace.extend(g.to_string().lines().map(str::to_string));
    }
    let (solution, unknown) = match out.answer {
        KdspAnswer::Yes(s) => (Some(s), false),
        KdspAnswer::No => (None, false),
        KdspAnswer::Unknown => (None, true),
    };
    Ok(Answer {
        solution,
        unknown,
        trace,
        guesses: Some(out.stats.guesses),
        eval_ms: Some(out.stats.eval_nanos as f64 / 1e6),
    })
}

fn cmd_solve(args: &SolveArgs) -> Result<u8> {
    let inst = load(&args.file)?;
    let ans = solve(&inst, args)?;
    if args.trace {
        for l in &ans.trace {
            eprintln!("c {l}");
        }
    }
    if ans.unknown {
        println!("unknown");
        return Ok(UNKNOWN);
    }
    if let Some(sol) = &ans.solution {
        if let Err(v) = verify_solution(&inst, &compute_positions(&inst), sol) {
            bail!("internal error: solver produced an invalid solution ({v})");
        }
    }
    print!("{}", format_solution(ans.solution.as_ref()));
    Ok(if ans.solution.is_some() { YES } else { NO })
}

fn cmd_oracle(max_paths: usize, file: &PathBuf) -> Result<u8> {
    let inst = load(file)?;
    let limits = EnumLimits {
        max_paths_per_pair: max_paths,
        ..EnumLimits::default()
    };
    match oracle_solve(&inst, limits) {
        OracleResult::Yes(sol) => {
            print!("{}", format_solution(Some(&sol)));
            Ok(YES)
        }
        OracleResult::No => {
            print!("{}", format_solution(None));
            Ok(NO)
        }
        OracleResult::Limit(msg) => {
            println!("unknown");
            eprintln!("limit: {msg}");
            Ok(UNKNOWN)
        }
    }
}

fn cmd_gen(kind: &GenKind) -> Result<u8> {
    let inst = match kind {
        GenKind::Random { n, p, k, seed } => gen_random(*n, *p, *k, *seed)?,
        GenKind::Fig1 => builtin_fig1(),
        GenKind::Grid { side } => {
            if *side < 2 {
                bail!("grid side must be at least 2");
            }
            grid_crossing_instance(*side)
        }
        GenKind::Mcc { file, trace } => {
            let mcc = parse_mcc(&read_input(file)?)?;
            let red = gen_mcc_reduction_traced(&mcc);
            if *trace {
                for l in red.trace_lines() {
                    eprintln!("c {l}");
                }
            }
            red.instance
        }
    };
    print!("{}", inst.to_dsp_string());
    Ok(YES)
}

fn cmd_verify(instance: &PathBuf, solution: &PathBuf) -> Result<u8> {
    let inst = load(instance)?;
    let Some(sol) = parse_solution(&read_input(solution)?)? else {
        bail!("solution file says 'no'; there are no paths to verify");
    };
    match verify_solution(&inst, &compute_positions(&inst), &sol) {
        Ok(()) => {
            println!("valid");
            Ok(YES)
        }
        Err(v) => {
            println!("invalid: {v}");
            Ok(NO)
        }
    }
}

fn cmd_bench(args: &SolveArgs) -> Result<u8> {
    let inst = load(&args.file)?;
    let t = Instant::now();
    let _ = compute_positions(&inst);
    let positions_ms = t.elapsed().as_secs_f64() * 1e3;
    let t = Instant::now();
    let ans = solve(&inst, args)?;
    let solve_ms = t.elapsed().as_secs_f64() * 1e3;
    let verdict = if ans.unknown {
        "unknown"
    } else if ans.solution.is_some() {
        "yes"
    } else {
        "no"
    };
    let mut line = format!(
        "{{\"n\": {}, \"m\": {}, \"k\": {}, \"answer\": \"{verdict}\", \"positions_ms\": {positions_ms:.3}, \"solve_ms\": {solve_ms:.3}",
        inst.graph.n(),
        inst.graph.m(),
        inst.k()
    );
    if let (Some(g), Some(e)) = (ans.guesses, ans.eval_ms) {
        line.push_str(&format!(
            ", \"guesses\": {g}, \"eval_ms\": {e:.3}, \"enumerate_ms\": {:.3}",
            (solve_ms - e).max(0.0)
        ));
    }
    line.push('}');
    println!("{line}");
    Ok(YES)
}

fn cmd_export_dot(a: usize, b: usize, solution: Option<&PathBuf>, file: &PathBuf) -> Result<u8> {
    let inst = load(file)?;
    let k = inst.k();
    if a >= k || b >= k || a == b {
        bail!("projection coordinates must be two distinct values below k = {k}");
    }
    let pos = compute_positions(&inst);
    let sol = match solution {
        Some(p) => parse_solution(&read_input(p)?)?,
        None => None,
    };
    const COLORS: [&str; 6] = ["red", "blue", "darkgreen", "orange", "purple", "brown"];
    let scale = 40.0;
    let mut out = String::from(
        "graph projection {\n  node [shape=point width=0.08];\n  edge [color=gray80];\n",
    );
    let mut owner = vec![None; inst.graph.n()];
    if let Some(s) = &sol {
        for (i, p) in s.paths.iter().enumerate() {
            for &v in p.vertices() {
                if v < owner.len() {
                    owner[v] = Some(i);
                }
            }
        }
    }
    for v in 0..inst.graph.n() {
        if !pos.reachable(v) {
            continue;
        }
        let (x, y) = project(&pos, v, a, b);
        let color = owner[v].map_or("black", |i| COLORS[i % COLORS.len()]);
        out.push_str(&format!(
            "  v{v} [pos=\"{},{}!\" color={color} xlabel=\"{v}\"];\n",
            x as f64 * scale,
            y as f64 * scale
        ));
    }
    for (u, w) in inst.graph.edges() {
        if pos.reachable(u) && pos.reachable(w) {
            out.push_str(&format!("  v{u} -- v{w};\n"));
        }
    }
    if let Some(s) = &sol {
        for (i, p) in s.paths.iter().enumerate() {
            for e in p.vertices().windows(2) {
                out.push_str(&format!(
                    "  v{} -- v{} [color={} penwidth=2.5];\n",
                    e[0],
                    e[1],
                    COLORS[i % COLORS.len()]
                ));
            }
        }
    }
    // Each pair's rectangle area: a 45-degree box drawn through four invisible corners.
    for (i, &(s, t)) in inst.terminals.iter().enumerate() {
        if !pos.reachable(s) || !pos.reachable(t) {
            continue;
        }
        let (p, q) = (project(&pos, s, a, b), project(&pos, t, a, b));
        let (d1, d2) = ((p.0 - p.1) as f64, (q.0 - q.1) as f64);
        let (s1, s2) = ((p.0 + p.1) as f64, (q.0 + q.1) as f64);
        let corners = [
            (d1.min(d2), s1.min(s2)),
            (d1.max(d2), s1.min(s2)),
            (d1.max(d2), s1.max(s2)),
            (d1.min(d2), s1.max(s2)),
        ];
        for (c, &(d, sum)) in corners.iter().enumerate() {
            let (x, y) = ((sum + d) / 2.0, (sum - d) / 2.0);
            out.push_str(&format!(
                "  r{i}_{c} [pos=\"{},{}!\" style=invis];\n",
                x * scale,
                y * scale
            ));
        }
        for c in 0..4 {
            out.push_str(&format!(
                "  r{i}_{c} -- r{i}_{} [style=dashed color={}];\n",
                (c + 1) % 4,
                COLORS[i % COLORS.len()]
            ));
        }
    }
    out.push_str("}\n");
    print!("{out}");
    Ok(YES)
}

fn run(cli: Cli) -> Result<u8> {
    match &cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Oracle { max_paths, file } => cmd_oracle(*max_paths, file),
        Command::Gen { kind } => cmd_gen(kind),
        Command::Verify { instance, solution } => cmd_verify(instance, solution),
        Command::Bench(args) => cmd_bench(args),
        Command::ExportDot {
            a,
            b,
            solution,
            file,
        } => cmd_export_dot(*a, *b, solution.as_ref(), file),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { ERROR } else { YES };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(ERROR)
        }
    }
}
