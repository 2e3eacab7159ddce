mod common;

use std::time::{Duration, Instant};

use kdsp_core::instances::{builtin_fig1, gen_dp_no_instance, grid_crossing_instance};
use kdsp_core::layered_dag::disjoint_paths_dag;
use kdsp_core::{
    compute_positions, solve_dsp2, solve_kdsp, verify_solution, KdspAnswer, KdspConfig, Solution,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn first(bad: &[String]) -> String {
    bad.first()
        .map(|b| format!("; first: {b}"))
        .unwrap_or_default()
}

fn oracle_2dsp() -> Outcome {
    let (yes, bad) = common::check_dsp2_vs_oracle(1000);
    outcome(
        bad.is_empty(),
        format!(
            "1000 instances, {yes} yes, {} problems{}",
            bad.len(),
            first(&bad)
        ),
    )
}

fn fig1() -> Outcome {
    let inst = builtin_fig1();
    let pos = compute_positions(&inst);
    let coords = pos.row(5) == [5, 4] && pos.row(11) == [5, 5];
    let lengths = |s: &Solution| {
        s.paths
            .iter()
            .map(|p| p.vertices().len() - 1)
            .collect::<Vec<_>>()
    };
    let d2 = solve_dsp2(&inst).ok().flatten();
    let cfg = KdspConfig {
        guess_budget: u64::MAX,
        ..KdspConfig::default()
    };
    let dk = match solve_kdsp(&inst, &cfg).map(|o| o.answer) {
        Ok(KdspAnswer::Yes(s)) => Some(s),
        _ => None,
    };
    let ok = |s: &Option<Solution>| {
        s.as_ref()
            .is_some_and(|s| verify_solution(&inst, &pos, s).is_ok() && lengths(s) == [5, 5])
    };
    let pass = coords && ok(&d2) && ok(&dk);
    outcome(
        pass,
        format!(
            "pos t1 {:?} t2 {:?}, dsp2 lengths {:?}, kdsp lengths {:?}",
            pos.row(5),
            pos.row(11),
            d2.as_ref().map(lengths),
            dk.as_ref().map(lengths)
        ),
    )
}

fn dag_dp() -> Outcome {
    let brute = common::check_dp_vs_brute(500);
    let fast = common::check_fast_vs_dp(1000);
    outcome(
        brute.is_empty() && fast.is_empty(),
        format!(
            "dp vs brute 500: {} problems{}, fast vs dp 1000: {} problems{}",
            brute.len(),
            first(&brute),
            fast.len(),
            first(&fast)
        ),
    )
}

fn kdsp_equivalence() -> Outcome {
    let oracle = common::check_kdsp_vs_oracle(240, 8);
    let dsp2 = common::check_kdsp_vs_dsp2(320, 30);
    let structure = oracle.membership.len() + oracle.labels.len() + oracle.avoidance.len();
    outcome(
        oracle.clean() && dsp2.clean(),
        format!(
            "vs oracle {} ({} yes): {} mismatches, {} structure problems, {} edge pairs meeting off-lattice; \
             vs dsp2 {} ({} yes): {} mismatches{}",
            oracle.instances,
            oracle.yes,
            oracle.mismatches.len(),
            structure,
            oracle.edge_pair_overlaps,
            dsp2.instances,
            dsp2.yes,
            dsp2.mismatches.len(),
            first(&[oracle.mismatches, oracle.membership, oracle.labels, oracle.avoidance, dsp2.mismatches].concat())
        ),
    )
}

fn mcc() -> Outcome {
    let (yes, bad) = common::check_mcc(120);
    outcome(
        bad.is_empty(),
        format!(
            "120 instances, {yes} cliques, {} problems{}",
            bad.len(),
            first(&bad)
        ),
    )
}

fn geometry() -> Outcome {
    let basic = common::check_basic_inequality(100);
    let (pairs, diamond) = common::check_diamond_inclusion(100);
    let rect = common::check_rect_intersect_exhaustive(8);
    let (crossing, noncrossing, disjoint) = common::check_crossing_disjointness(300);
    let all = [
        basic.clone(),
        diamond.clone(),
        rect.clone(),
        disjoint.clone(),
    ]
    .concat();
    outcome(
        all.is_empty() && pairs > 0 && crossing > 0 && noncrossing > 0,
        format!(
            "basic inequality {} bad, diamond {pairs} pairs {} bad, rect side 8 {} bad, \
             flank/delta {crossing} crossing {noncrossing} noncrossing {} bad{}",
            basic.len(),
            diamond.len(),
            rect.len(),
            disjoint.len(),
            first(&all)
        ),
    )
}

/// Mean time per run, repeating until at least `floor` has elapsed.
fn time_dp(width: usize) -> Duration {
    let (dag, inst) = gen_dp_no_instance(5, width, 0.5, width as u64);
    let floor = Duration::from_millis(300);
    let start = Instant::now();
    let mut runs = 0u32;
    while start.elapsed() < floor || runs < 3 {
        assert!(disjoint_paths_dag(&dag, &inst).is_none());
        runs += 1;
    }
    start.elapsed() / runs
}

fn performance() -> Outcome {
    let t = Instant::now();
    let grid = solve_dsp2(&grid_crossing_instance(40));
    let grid_time = t.elapsed();
    let grid_ok = grid.is_ok() && grid_time < Duration::from_secs(60);
    let times: Vec<Duration> = [20, 40, 80].into_iter().map(time_dp).collect();
    let ratios: Vec<f64> = times
        .windows(2)
        .map(|w| w[1].as_secs_f64() / w[0].as_secs_f64())
        .collect();
    let scaling_ok = ratios.iter().all(|r| (6.0..=10.0).contains(r));
    outcome(
        grid_ok && scaling_ok,
        format!(
            "40x40 grid {} in {:.2}s; dp p=2 n=100/200/400 {:?}, doubling ratios {:.2?}",
            match &grid {
                Ok(Some(_)) => "yes",
                Ok(None) => "no",
                Err(_) => "error",
            },
            grid_time.as_secs_f64(),
            times,
            ratios
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("1 2-DSP oracle equivalence", oracle_2dsp),
        ("2 example reproduction", fig1),
        ("3 DAG DP correctness", dag_dp),
        ("4 k-DSP equivalence", kdsp_equivalence),
        ("5 clique reduction equivalence", mcc),
        ("6 geometry invariants", geometry),
        ("7 desk-scale performance", performance),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let t = Instant::now();
        let o = run();
        failed += !o.pass as usize;
        println!(
            "{} {name} ({:.1}s): {}",
            if o.pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            o.detail
        );
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
