//! Subcommands. Each one turns its arguments into a [`Table`]; `run`
//! writes the table out.

use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use influence_core::estimator::{derive_params, estimate_influence, walk_regime_threshold, walk_trial};
use influence_core::exact::{
    edge_sum_from_table, kkl_from_table, monotone_violation, profile_from_table, symmetric_exact_walk_probability,
    tabulate, walk_transition_from_table, MAX_EXACT_N,
};
use influence_core::lattice::cutoff_level;
use influence_core::lowerbound::{
    aggregate_game, build_general_family_member, build_monotone_family_member, build_single_point_member,
    run_game_trial,
};
use influence_core::zoo::{closed_form_influence, make_counting_oracle};
use influence_core::{EstimateReport, FamilyInstance, FunctionSpec, GameStrategy, Regime, RngStream, RunStatus};
use num_rational::BigRational;
use rayon::prelude::*;

use crate::output::{Format, Table, Value};
use crate::spec_json::parse_function_arg;

#[derive(Parser, Debug)]
#[command(name = "influence", version, about = "Estimate and verify total influence of Boolean functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the sequential estimator `--runs` times.
    Estimate(EstimateArgs),
    /// Exact per-variable and total influence by enumeration (n <= 24).
    Exact(ExactArgs),
    /// Walk success probability: DP vs edge sum vs closed form vs Monte Carlo.
    OracleCompare(OracleCompareArgs),
    /// Exact walk success probability against the (w/n) I[f] bounds.
    LemmaCheck(LemmaCheckArgs),
    /// Hard-instance distinguishing game.
    Lowerbound(LowerboundArgs),
    /// Walk vs direct query counts over an (n, epsilon) grid.
    Sweep(SweepArgs),
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    Auto,
    Walk,
    Direct,
}

#[derive(Args, Debug, Clone)]
pub struct EstimateArgs {
    /// Named function, inline JSON, or @file.json.
    #[arg(long)]
    pub function: String,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0.5)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Influence floor exponent: I[f] >= n^-c is assumed.
    #[arg(long, default_value_t = 0.0)]
    pub c: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub runs: u64,
    #[arg(long)]
    pub m_cap: Option<u64>,
    #[arg(long, value_enum, default_value = "auto")]
    pub regime: RegimeArg,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct ExactArgs {
    #[arg(long)]
    pub function: String,
    #[arg(long)]
    pub n: Option<usize>,
    /// Band half-width for the in-band edge count.
    #[arg(long)]
    pub s_star: Option<u64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// A band half-width, or `none` for no cut-off.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SStar(pub Option<u64>);

impl FromStr for SStar {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("none") {
            Ok(SStar(None))
        } else {
            s.parse().map(|v| SStar(Some(v))).map_err(|e| format!("{s:?}: {e}"))
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct OracleCompareArgs {
    #[arg(long)]
    pub function: String,
    #[arg(long)]
    pub n: Option<usize>,
    /// Walk lengths (comma-separated).
    #[arg(long, value_delimiter = ',', default_values_t = [1u64, 2, 3, 5])]
    pub w: Vec<u64>,
    /// Band half-widths, `none` disables the cut-off. Defaults to
    /// `none,1,floor(sqrt n)`.
    #[arg(long, value_delimiter = ',')]
    pub s_star: Vec<SStar>,
    #[arg(long)]
    pub seed: u64,
    /// Monte Carlo walks per row.
    #[arg(long, default_value_t = 100_000)]
    pub mc_trials: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct LemmaCheckArgs {
    /// A threshold over all n coordinates (named form).
    #[arg(long, default_value = "majority")]
    pub function: String,
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.5])]
    pub epsilon: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.0)]
    pub c: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Monotone,
    SinglePoint,
    General,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Uniform,
    Estimator,
}

#[derive(Args, Debug, Clone)]
pub struct LowerboundArgs {
    #[arg(long, value_enum, default_value = "monotone")]
    pub family: FamilyArg,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub i_star: f64,
    /// Prefix length override (monotone family).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_enum, default_value = "uniform")]
    pub strategy: StrategyArg,
    /// Queries per trial for the uniform strategy (comma-separated).
    #[arg(long, value_delimiter = ',', default_values_t = [3u64, 100])]
    pub q: Vec<u64>,
    #[arg(long, default_value_t = 500)]
    pub trials: u64,
    #[arg(long, default_value_t = 0.5)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct SweepArgs {
    #[arg(long, default_value = "majority")]
    pub function: String,
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.5])]
    pub epsilon: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.0)]
    pub c: f64,
    #[arg(long)]
    pub seed: u64,
    /// Runs per arm and cell.
    #[arg(long, default_value_t = 3)]
    pub runs: u64,
    #[arg(long)]
    pub m_cap: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

impl Command {
    pub fn output(&self) -> &OutputArgs {
        match self {
            Command::Estimate(a) => &a.output,
            Command::Exact(a) => &a.output,
            Command::OracleCompare(a) => &a.output,
            Command::LemmaCheck(a) => &a.output,
            Command::Lowerbound(a) => &a.output,
            Command::Sweep(a) => &a.output,
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let table = execute(&cli.command)?;
    let out = cli.command.output();
    table.emit(out.format, out.out.as_deref())
}

pub fn execute(cmd: &Command) -> Result<Table> {
    match cmd {
        Command::Estimate(a) => cmd_estimate(a),
        Command::Exact(a) => cmd_exact(a),
        Command::OracleCompare(a) => cmd_oracle_compare(a),
        Command::LemmaCheck(a) => cmd_lemma_check(a),
        Command::Lowerbound(a) => cmd_lowerbound(a),
        Command::Sweep(a) => cmd_sweep(a),
    }
}

/// `f(0), ..., f(count-1)` in index order, on `workers` threads.
fn par_map<T, F>(count: u64, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    if workers <= 1 {
        return (0..count).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().context("starting worker pool")?;
    pool.install(|| (0..count).into_par_iter().map(&f).collect())
}

pub const ESTIMATE_HEADERS: [&str; 15] = [
    "seed", "n", "function", "regime", "epsilon", "delta", "w", "s_star", "cutoff", "t", "m", "successes", "queries",
    "I_hat", "status",
];

fn estimate_row(spec: &FunctionSpec, r: &EstimateReport) -> Vec<Value> {
    let p = &r.params;
    vec![
        r.seed.into(),
        p.n.into(),
        spec.label().into(),
        r.regime.as_str().into(),
        p.epsilon.into(),
        p.delta.into(),
        p.w.into(),
        p.s_star.into(),
        p.cutoff.into(),
        p.t.into(),
        r.m.into(),
        r.successes.into(),
        r.queries.into(),
        r.estimate.into(),
        r.status.as_str().into(),
    ]
}

pub fn estimate_reports(a: &EstimateArgs) -> Result<(FunctionSpec, Vec<EstimateReport>)> {
    let spec = parse_function_arg(&a.function, a.n)?;
    let mut params = derive_params(spec.dim() as u64, a.epsilon, a.delta, a.c)?;
    match a.regime {
        RegimeArg::Auto => {}
        RegimeArg::Walk => {
            if params.w == 0 {
                bail!("walk regime needs w >= 1, but the derived walk length is 0");
            }
            params.regime = Regime::Walk;
            params.m_cap = params.default_m_cap();
        }
        RegimeArg::Direct => params = params.forced_direct(),
    }
    if let Some(cap) = a.m_cap {
        params.m_cap = cap;
    }
    let reports = par_map(a.runs, a.workers, |i| {
        let mut o = make_counting_oracle(&spec);
        Ok(estimate_influence(&mut o, &params, &mut RngStream::new(a.seed, i))?)
    })?;
    Ok((spec, reports))
}

pub fn cmd_estimate(a: &EstimateArgs) -> Result<Table> {
    let (spec, reports) = estimate_reports(a)?;
    let mut t = Table::new(&ESTIMATE_HEADERS);
    for r in &reports {
        t.push(estimate_row(&spec, r));
    }
    Ok(t)
}

pub fn cmd_exact(a: &ExactArgs) -> Result<Table> {
    let spec = parse_function_arg(&a.function, a.n)?;
    let n = spec.dim();
    if n > MAX_EXACT_N {
        bail!("exact enumeration needs n <= {MAX_EXACT_N}, got {n}");
    }
    let table = tabulate(&mut make_counting_oracle(&spec), MAX_EXACT_N)?;
    let profile = profile_from_table(&table, a.s_star);
    let kkl = kkl_from_table(&table);
    let monotone = monotone_violation(&table).is_none();
    let den = 1u64 << n;
    let mut t = Table::new(&[
        "function", "n", "item", "influence", "numerator", "denominator", "edge_count", "band_edge_count", "s_star",
        "monotone", "kkl_lhs", "kkl_rhs", "kkl_holds",
    ]);
    for (i, flips) in profile.per_variable_flips.iter().enumerate() {
        t.push(vec![
            spec.label().into(),
            n.into(),
            format!("x{}", i + 1).into(),
            profile.per_variable(i).into(),
            (*flips).into(),
            den.into(),
            Value::Null,
            Value::Null,
            Value::Null,
            Value::Null,
            Value::Null,
            Value::Null,
            Value::Null,
        ]);
    }
    t.push(vec![
        spec.label().into(),
        n.into(),
        "total".into(),
        profile.total().into(),
        profile.total_numerator().into(),
        den.into(),
        profile.edge_count.into(),
        profile.band_edge_count().into(),
        a.s_star.into(),
        monotone.into(),
        kkl.lhs.into(),
        kkl.rhs.into(),
        kkl.holds.into(),
    ]);
    Ok(t)
}

pub const MAX_COMPARE_N: usize = 20;
const MAX_RATIONAL_N: usize = 12;

pub fn cmd_oracle_compare(a: &OracleCompareArgs) -> Result<Table> {
    let spec = parse_function_arg(&a.function, a.n)?;
    let n = spec.dim();
    if n > MAX_COMPARE_N {
        bail!("oracle-compare needs n <= {MAX_COMPARE_N}, got {n}");
    }
    let table = tabulate(&mut make_counting_oracle(&spec), MAX_COMPARE_N)?;
    let monotone = monotone_violation(&table).is_none();
    let s_values: Vec<Option<u64>> = if a.s_star.is_empty() {
        vec![None, Some(1), Some((n as f64).sqrt() as u64)]
    } else {
        a.s_star.iter().map(|s| s.0).collect()
    };
    let cells: Vec<(u64, Option<u64>)> = a.w.iter().flat_map(|&w| s_values.iter().map(move |&s| (w, s))).collect();

    let rows = par_map(cells.len() as u64, a.workers, |ci| {
        let (w, s) = cells[ci as usize];
        let cutoff = s.and_then(|s| cutoff_level(n as u64, s));
        let dp: f64 = walk_transition_from_table(&table, w, s, true, false);
        let back: f64 = walk_transition_from_table(&table, w, s, false, true);
        let disagreement = dp + back;
        let (num, den) = if n <= MAX_RATIONAL_N {
            let q: BigRational = walk_transition_from_table(&table, w, s, true, false);
            (Value::from(q.numer().to_string()), Value::from(q.denom().to_string()))
        } else {
            (Value::Null, Value::Null)
        };
        let edge_sum = monotone.then(|| edge_sum_from_table::<f64>(&table, w, s));
        let symmetric = match spec.full_threshold() {
            Some(_) => Some(symmetric_exact_walk_probability(&spec, w, s)?),
            None => None,
        };
        let mut o = make_counting_oracle(&spec);
        o.disable_weight_path();
        let mut rng = RngStream::new(a.seed, ci);
        let mut hits = 0u64;
        for _ in 0..a.mc_trials {
            hits += walk_trial(&mut o, w, cutoff, None, &mut rng)? as u64;
        }
        let mc = (a.mc_trials > 0).then(|| hits as f64 / a.mc_trials as f64);
        Ok(vec![
            spec.label().into(),
            n.into(),
            w.into(),
            s.into(),
            cutoff.into(),
            dp.into(),
            num,
            den,
            edge_sum.into(),
            symmetric.into(),
            disagreement.into(),
            mc.into(),
            a.mc_trials.into(),
            edge_sum.map(|e| (e - dp).abs()).into(),
            symmetric.map(|e| (e - dp).abs()).into(),
            mc.map(|m| (m - disagreement).abs()).into(),
            if monotone { "ok" } else { "non_monotone" }.into(),
        ])
    })?;
    let mut t = Table::new(&[
        "function", "n", "w", "s_star", "cutoff", "dp", "dp_numerator", "dp_denominator", "edge_sum", "symmetric",
        "disagreement", "monte_carlo", "mc_trials", "abs_diff_edge_sum", "abs_diff_symmetric", "abs_diff_monte_carlo",
        "edge_sum_status",
    ]);
    for r in rows {
        t.push(r);
    }
    Ok(t)
}

pub fn cmd_lemma_check(a: &LemmaCheckArgs) -> Result<Table> {
    let mut t = Table::new(&[
        "function", "n", "epsilon", "delta", "w", "s_star", "cutoff", "p", "influence", "lower", "upper", "holds",
        "status",
    ]);
    for &n in &a.n {
        let spec = parse_function_arg(&a.function, Some(n))?;
        if spec.full_threshold().is_none() {
            bail!("lemma-check needs a threshold over all n coordinates, got {}", spec.label());
        }
        let influence = closed_form_influence(&spec).expect("thresholds have a closed form");
        for &eps in &a.epsilon {
            let params = derive_params(n as u64, eps, a.delta, a.c)?;
            let premise = eps > walk_regime_threshold(n as u64, eps);
            let mut row = vec![
                spec.label().into(),
                n.into(),
                eps.into(),
                a.delta.into(),
                params.w.into(),
                params.s_star.into(),
                params.cutoff.into(),
            ];
            if !premise {
                row.extend([Value::Null, influence.into(), Value::Null, Value::Null, Value::Null, "premise_violated".into()]);
            } else if params.w == 0 {
                // No walk regime at these parameters.
                continue;
            } else {
                let p = symmetric_exact_walk_probability(&spec, params.w, Some(params.s_star))?;
                let scale = params.w as f64 / n as f64 * influence;
                let (lower, upper) = ((1.0 - eps / 2.0) * scale, (1.0 + eps / 2.0) * scale);
                let holds = lower <= p && p <= upper;
                row.extend([
                    p.into(),
                    influence.into(),
                    lower.into(),
                    upper.into(),
                    holds.into(),
                    if holds { "holds" } else { "fails" }.into(),
                ]);
            }
            t.push(row);
        }
    }
    Ok(t)
}

pub fn build_instance(a: &LowerboundArgs) -> Result<FamilyInstance> {
    let mut rng = RngStream::new(a.seed, u64::MAX);
    Ok(match a.family {
        FamilyArg::Monotone => build_monotone_family_member(a.n, a.i_star, &mut rng, a.k)?,
        FamilyArg::SinglePoint => build_single_point_member(a.n, a.i_star, &mut rng)?,
        FamilyArg::General => build_general_family_member(a.n, a.i_star, &mut rng)?,
    })
}

pub fn cmd_lowerbound(a: &LowerboundArgs) -> Result<Table> {
    let inst = build_instance(a)?;
    let strategies: Vec<GameStrategy> = match a.strategy {
        StrategyArg::Uniform => a.q.iter().map(|&q| GameStrategy::UniformQueries(q)).collect(),
        StrategyArg::Estimator => vec![GameStrategy::Estimator { epsilon: a.epsilon, delta: a.delta }],
    };
    let mut t = Table::new(&[
        "family", "n", "k", "t", "r_size", "i_star", "beta", "strategy", "q", "trials", "hit_trials", "hit_rate",
        "expected_hit_rate", "answer_diff_trials", "advantage", "queries_per_trial",
    ]);
    for strategy in strategies {
        let outcomes = par_map(a.trials, a.workers, |i| Ok(run_game_trial(&inst, strategy, a.seed, i)?))?;
        let rep = aggregate_game(&inst, strategy, &outcomes);
        let (name, q) = match strategy {
            GameStrategy::UniformQueries(q) => ("uniform", Some(q)),
            GameStrategy::Estimator { .. } => ("estimator", None),
        };
        t.push(vec![
            inst.kind.as_str().into(),
            inst.n.into(),
            inst.k.into(),
            inst.t.into(),
            inst.r_size.into(),
            inst.i_star.into(),
            inst.beta.into(),
            name.into(),
            q.into(),
            rep.trials.into(),
            rep.hit_trials.into(),
            rep.hit_rate.into(),
            rep.expected_hit_rate.into(),
            rep.answer_diff_trials.into(),
            rep.advantage.into(),
            rep.queries_per_trial.into(),
        ]);
    }
    Ok(t)
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = xs.fold((0.0, 0u64), |(s, c), x| (s + x, c + 1));
    (count > 0).then(|| sum / count as f64)
}

pub fn cmd_sweep(a: &SweepArgs) -> Result<Table> {
    let mut t = Table::new(&[
        "function", "n", "epsilon", "delta", "walk_regime", "w", "s_star", "t", "runs", "walk_mean_queries",
        "direct_mean_queries", "query_ratio", "walk_mean_I_hat", "direct_mean_I_hat", "walk_floor_exceeded",
        "direct_floor_exceeded",
    ]);
    let mut cell = 0u64;
    for &n in &a.n {
        let spec = parse_function_arg(&a.function, Some(n))?;
        for &eps in &a.epsilon {
            let mut walk = derive_params(n as u64, eps, a.delta, a.c)?;
            let mut direct = walk.forced_direct();
            if let Some(cap) = a.m_cap {
                walk.m_cap = cap;
                direct.m_cap = cap;
            }
            let base = cell * a.runs * 2;
            let reports = par_map(2 * a.runs, a.workers, |j| {
                let params = if j % 2 == 0 { &walk } else { &direct };
                let mut o = make_counting_oracle(&spec);
                Ok(estimate_influence(&mut o, params, &mut RngStream::new(a.seed, base + j))?)
            })?;
            let (wr, dr): (Vec<_>, Vec<_>) = reports.iter().enumerate().partition(|(j, _)| j % 2 == 0);
            let arm = |rs: &[(usize, &EstimateReport)]| {
                (
                    mean(rs.iter().map(|(_, r)| r.queries as f64)),
                    mean(rs.iter().filter_map(|(_, r)| r.estimate)),
                    rs.iter().filter(|(_, r)| r.status == RunStatus::FloorExceeded).count() as u64,
                )
            };
            let (wq, wi, wf) = arm(&wr);
            let (dq, di, df) = arm(&dr);
            let ratio = match (wq, dq) {
                (Some(w), Some(d)) if d > 0.0 => Some(w / d),
                _ => None,
            };
            t.push(vec![
                spec.label().into(),
                n.into(),
                eps.into(),
                a.delta.into(),
                walk.regime.as_str().into(),
                walk.w.into(),
                walk.s_star.into(),
                walk.t.into(),
                a.runs.into(),
                wq.into(),
                dq.into(),
                ratio.into(),
                wi.into(),
                di.into(),
                wf.into(),
                df.into(),
            ]);
            cell += 1;
        }
    }
    Ok(t)
}
