//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Criteria that have a CLI surface are driven through
//! the subcommand parser so the whole path is exercised.

use std::time::{Duration, Instant};

use clap::Parser;
use influence_cli::output::{Table, Value};
use influence_cli::{execute, Cli};
use influence_core::exact::{
    count_influential_edges, edge_sum_walk_probability, exact_influence, exact_walk_success_probability, kkl_check,
    symmetric_exact_walk_probability,
};
use influence_core::lowerbound::build_monotone_family_member;
use influence_core::zoo::{closed_form_influence, make_counting_oracle};
use influence_core::{derive_params, FunctionSpec, RngStream};
use num_rational::BigRational;
use rand::RngCore;

type Outcome = Result<String, String>;

fn cli(args: &str) -> Result<Table, String> {
    let argv = std::iter::once("influence").chain(args.split_whitespace());
    let parsed = Cli::try_parse_from(argv).map_err(|e| e.to_string())?;
    execute(&parsed.command).map_err(|e| format!("{e:#}"))
}

fn int(t: &Table, row: usize, col: &str) -> i128 {
    match t.get(row, col) {
        Some(Value::Int(v)) => *v,
        v => panic!("{col}: expected integer, got {v:?}"),
    }
}

fn float(t: &Table, row: usize, col: &str) -> Option<f64> {
    match t.get(row, col) {
        Some(Value::Float(v)) => Some(*v),
        Some(Value::Int(v)) => Some(*v as f64),
        _ => None,
    }
}

fn text(t: &Table, row: usize, col: &str) -> String {
    match t.get(row, col) {
        Some(Value::Str(s)) => s.clone(),
        v => format!("{v:?}"),
    }
}

fn check(cond: bool, msg: String) -> Outcome {
    if cond {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn monotone_zoo(n: usize) -> Vec<FunctionSpec> {
    let mut v = vec![
        FunctionSpec::constant(n, false),
        FunctionSpec::constant(n, true),
        FunctionSpec::dictator(n, 1).unwrap(),
        FunctionSpec::dictator(n, n).unwrap(),
        FunctionSpec::majority(n),
        FunctionSpec::threshold(n, 5, 3).unwrap(),
    ];
    for t in [1, n / 3, n - 1, n] {
        v.push(FunctionSpec::threshold(n, n, t).unwrap());
    }
    v
}

fn a1() -> Outcome {
    let mut checked = 0;
    for n in 8..=14 {
        let mut specs = monotone_zoo(n);
        let mut rng = RngStream::new(101, n as u64);
        specs.push(build_monotone_family_member(n, 0.1, &mut rng, Some(5)).map_err(|e| e.to_string())?.spec);
        for spec in specs {
            let edges = count_influential_edges(&mut make_counting_oracle(&spec)).unwrap();
            // I[f] = numerator / 2^n, so 2^{n-1} I[f] = numerator / 2.
            let num = exact_influence(&mut make_counting_oracle(&spec), None).unwrap().total_numerator();
            if 2 * edges != num {
                return Err(format!("{} n={n}: edges {edges} vs 2^(n-1) I = {num}/2", spec.label()));
            }
            checked += 1;
        }
    }
    Ok(format!("edges = 2^(n-1) I[f] exactly for {checked} monotone functions, n = 8..14"))
}

fn a2() -> Outcome {
    let specs = [FunctionSpec::majority(13), FunctionSpec::threshold(13, 9, 5).unwrap(), FunctionSpec::dictator(13, 1).unwrap()];
    let mut worst: f64 = 0.0;
    let mut cells = 0;
    for spec in &specs {
        for w in [1, 2, 3, 5] {
            for s in [None, Some(1), Some(3)] {
                let dp: f64 = exact_walk_success_probability(&mut make_counting_oracle(spec), w, s).unwrap();
                let es: f64 = edge_sum_walk_probability(&mut make_counting_oracle(spec), w, s).unwrap();
                worst = worst.max((dp - es).abs());
                if spec.full_threshold().is_some() {
                    let sym = symmetric_exact_walk_probability(spec, w, s).unwrap();
                    worst = worst.max((dp - sym).abs());
                }
                cells += 1;
            }
        }
    }
    check(worst < 1e-12, format!("{cells} cells, max |DP - edge sum|, |DP - closed form| = {worst:.3e} (< 1e-12)"))
}

fn a3() -> Outcome {
    let q = |a: i64, b: i64| BigRational::new(a.into(), b.into());
    let d = FunctionSpec::dictator(2, 1).unwrap();
    let maj = FunctionSpec::majority(3);
    let vals: [(BigRational, BigRational); 2] = [
        (
            exact_walk_success_probability(&mut make_counting_oracle(&d), 1, None).unwrap(),
            edge_sum_walk_probability(&mut make_counting_oracle(&d), 1, None).unwrap(),
        ),
        (
            exact_walk_success_probability(&mut make_counting_oracle(&maj), 3, None).unwrap(),
            edge_sum_walk_probability(&mut make_counting_oracle(&maj), 3, None).unwrap(),
        ),
    ];
    check(
        vals[0] == (q(3, 8), q(3, 8)) && vals[1] == (q(1, 2), q(1, 2)),
        format!(
            "dictator n=2 w=1: DP {} / edge sum {}; majority n=3 w=3: DP {} / edge sum {}",
            vals[0].0, vals[0].1, vals[1].0, vals[1].1
        ),
    )
}

fn a4() -> Outcome {
    let t = cli("lemma-check --n 1000001 --epsilon 0.5 --delta 0.1")?;
    let (w, s) = (int(&t, 0, "w"), int(&t, 0, "s_star"));
    let p = float(&t, 0, "p").unwrap_or(f64::NAN);
    let (lo, hi) = (float(&t, 0, "lower").unwrap_or(f64::NAN), float(&t, 0, "upper").unwrap_or(f64::NAN));
    check(
        w == 1 && s == 2880 && lo <= p && p <= hi && text(&t, 0, "status") == "holds",
        format!("n=10^6+1 w={w} s*={s}: {lo:.6e} <= p = {p:.6e} <= {hi:.6e}"),
    )
}

fn a5() -> Outcome {
    // Reference influence by brute force over all 2^13 points.
    let truth = exact_influence(&mut make_counting_oracle(&FunctionSpec::majority(13)), None).unwrap().total();
    let t = cli("estimate --function majority --n 13 --epsilon 0.25 --delta 0.1 --runs 100 --seed 5005")?;
    let good = (0..t.rows.len())
        .filter(|&r| float(&t, r, "I_hat").is_some_and(|x| ((x - truth) / truth).abs() <= 0.25))
        .count();
    let direct = (0..t.rows.len()).all(|r| text(&t, r, "regime") == "direct");
    check(direct && good >= 85, format!("{good}/100 runs within 25% of I = {truth} (need >= 85), regime direct = {direct}"))
}

struct ScaleRuns {
    table: Table,
    influence: f64,
    p: f64,
    w: u64,
    t: u64,
}

fn scale_runs() -> Result<ScaleRuns, String> {
    let n = 100_000_001u64;
    let spec = FunctionSpec::majority(n as usize);
    let influence = closed_form_influence(&spec).unwrap();
    // 40-digit reference value.
    if ((influence - 7978.845667869995) / influence).abs() > 1e-10 {
        return Err(format!("closed-form influence {influence} disagrees with reference"));
    }
    let params = derive_params(n, 0.5, 0.1, 0.0).map_err(|e| e.to_string())?;
    let p = symmetric_exact_walk_probability(&spec, params.w, Some(params.s_star)).unwrap();
    let table = cli("estimate --function majority --n 100000001 --epsilon 0.5 --delta 0.1 --runs 50 --seed 6006")?;
    Ok(ScaleRuns { table, influence, p, w: params.w, t: params.t })
}

fn a6(s: &ScaleRuns) -> Outcome {
    let t = &s.table;
    let rows = t.rows.len();
    let good = (0..rows)
        .filter(|&r| float(t, r, "I_hat").is_some_and(|x| (x - s.influence).abs() <= 0.5 * s.influence))
        .count();
    let walk = (0..rows).all(|r| text(t, r, "regime") == "walk");
    let mean_m = (0..rows).map(|r| int(t, r, "m") as f64).sum::<f64>() / rows as f64;
    let expect = s.t as f64 / s.p;
    let ratio = mean_m / expect;
    check(
        walk && good >= 42 && (0.5..=2.0).contains(&ratio),
        format!("{good}/{rows} runs within (1 +- 0.5) I (need >= 42); mean m = {mean_m:.0} = {ratio:.4} x t/p"),
    )
}

fn a7(s: &ScaleRuns, small: &Table) -> Outcome {
    let t = &s.table;
    let mut reports = 0;
    for tab in [t, small] {
        for r in 0..tab.rows.len() {
            if int(tab, r, "queries") != 2 * int(tab, r, "m") {
                return Err(format!("row {r}: queries != 2m"));
            }
            reports += 1;
        }
    }
    let n = 100_000_001f64;
    let mean_q = (0..t.rows.len()).map(|r| int(t, r, "queries") as f64).sum::<f64>() / t.rows.len() as f64;
    let expect = 2.0 * s.t as f64 * n / (s.w as f64 * s.influence);
    let ratio = mean_q / expect;
    check(
        (0.3..=3.0).contains(&ratio),
        format!("queries = 2m in all {reports} reports; mean queries {mean_q:.0} = {ratio:.4} x 2tn/(wI)"),
    )
}

fn a8() -> Outcome {
    let t = cli("lowerbound --family monotone --n 4096 --i-star 2 --k 24 --q 3,100 --trials 500 --seed 8008")?;
    let h3 = float(&t, 0, "hit_rate").unwrap_or(f64::NAN);
    let h100 = float(&t, 1, "hit_rate").unwrap_or(f64::NAN);
    let beta = float(&t, 0, "beta").unwrap_or(f64::NAN);
    let mut rng = RngStream::new(8008, 1);
    let desk = build_monotone_family_member(20, 0.25, &mut rng, Some(10)).map_err(|e| e.to_string())?;
    let i_desk = exact_influence(&mut make_counting_oracle(&desk.spec), None).unwrap().total();
    check(
        h3 <= 0.2 && h100 >= 0.9 && i_desk >= 0.25,
        format!(
            "beta = {beta:.6}; hit rate q=3: {h3:.3} (<= 0.2), q=100: {h100:.3} (>= 0.9); desk n=20 |R|={} I[f_R] = {i_desk:.4} >= 0.25",
            desk.r_size
        ),
    )
}

fn a9() -> Outcome {
    let mut rng = RngStream::new(9009, 0);
    for i in 0..1000 {
        let words: Vec<u64> = (0..16).map(|_| rng.next_u64()).collect();
        let spec = FunctionSpec::truth_table_from_fn(10, |x| words[(x / 64) as usize] >> (x % 64) & 1 == 1).unwrap();
        let k = kkl_check(&mut make_counting_oracle(&spec)).unwrap();
        if !k.holds {
            return Err(format!("random table {i}: I = {} < {}", k.lhs, k.rhs));
        }
    }
    let mut worst: f64 = 0.0;
    for n in 2..=20usize {
        for t in 0..=n {
            let i = closed_form_influence(&FunctionSpec::threshold(n, n, t).unwrap()).unwrap();
            worst = worst.max(i / (n as f64).sqrt());
        }
    }
    for n in [16, 18, 20] {
        let mut specs = monotone_zoo(n);
        let mut rng = RngStream::new(9010, n as u64);
        specs.push(build_monotone_family_member(n, 0.2, &mut rng, Some(8)).map_err(|e| e.to_string())?.spec);
        for spec in specs {
            let i = exact_influence(&mut make_counting_oracle(&spec), None).unwrap().total();
            worst = worst.max(i / (n as f64).sqrt());
        }
    }
    check(worst <= 1.0, format!("KKL holds on 1000 random tables at n=10; max I[f]/sqrt(n) over monotone zoo = {worst:.4}"))
}

fn sweep() -> Outcome {
    let t = cli("sweep --function majority --n 10000,1000000,100000000 --epsilon 0.9 --delta 0.1 --runs 3 --seed 1001")?;
    let ratios: Vec<f64> = (0..t.rows.len()).map(|r| float(&t, r, "query_ratio").unwrap_or(f64::NAN)).collect();
    let regimes: Vec<String> = (0..t.rows.len()).map(|r| text(&t, r, "walk_regime")).collect();
    check(
        ratios.windows(2).all(|w| w[1] < w[0]),
        format!("walk/direct query ratio at n = 1e4, 1e6, 1e8: {ratios:.4?} (walk arm regimes {regimes:?})"),
    )
}

fn report(name: &str, budget: Duration, f: impl FnOnce() -> Outcome, failures: &mut Vec<String>) {
    let start = Instant::now();
    let outcome = f();
    let took = start.elapsed();
    let (ok, msg) = match outcome {
        Ok(m) if took <= budget => (true, m),
        Ok(m) => (false, format!("{m}; over time budget {budget:?}")),
        Err(m) => (false, m),
    };
    println!("{name} {} [{:.2}s] {msg}", if ok { "PASS" } else { "FAIL" }, took.as_secs_f64());
    if !ok {
        failures.push(name.to_string());
    }
}

fn main() {
    let mut failures = Vec::new();
    let min = Duration::from_secs(60);
    report("A1", min, a1, &mut failures);
    report("A2", min, a2, &mut failures);
    report("A3", Duration::from_secs(1), a3, &mut failures);
    report("A4", Duration::from_secs(10), a4, &mut failures);

    let mut small = None;
    report(
        "A5",
        2 * min,
        || {
            small = Some(cli("estimate --function majority --n 13 --epsilon 0.25 --delta 0.1 --runs 100 --seed 5005")?);
            a5()
        },
        &mut failures,
    );

    let start = Instant::now();
    let runs = scale_runs();
    let shared = start.elapsed();
    match &runs {
        Ok(s) => {
            let note = |o: Outcome| o.map(|m| format!("{m}; 50 runs at n=10^8+1 took {:.2}s", shared.as_secs_f64()));
            report("A6", 3 * min - shared, || note(a6(s)), &mut failures);
            let small = small.unwrap_or_else(|| Table::new(&[]));
            report("A7", 3 * min - shared, || note(a7(s, &small)), &mut failures);
        }
        Err(e) => {
            for name in ["A6", "A7"] {
                println!("{name} FAIL {e}");
                failures.push(name.into());
            }
        }
    }
    report("A8", 2 * min, a8, &mut failures);
    report("A9", min, a9, &mut failures);
    report("SWEEP", 5 * min, sweep, &mut failures);

    if failures.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: FAILED {failures:?}");
        std::process::exit(1);
    }
}
