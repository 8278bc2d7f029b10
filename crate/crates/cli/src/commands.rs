use std::fmt::Write as _;
use std::time::Instant;

use kron_defect::bounds::{
    closed_form_lower_bound, compare_strategies, expanded_lower_bound, supermultiplicative_floor,
    BoundBreakdown, StrategyComparison,
};
use kron_defect::engine::{compute, generalized_defect, verify_direct_sum};
use kron_defect::feasible::{feasible_space_dim, phasing_basis};
use kron_defect::haar::haar_factors;
use kron_defect::mset::{spanning_set, vectorize};
use kron_defect::rank::numerical_rank;
use kron_defect::{DefectReport, EngineOptions, FactorList, Method, SizeSequence};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{
    BenchArgs, BoundArgs, DefectArgs, Format, MethodArg, SampleArgs, SizeList, VerifyArgs,
};
use crate::error::{CliError, Result};
use crate::input::{load_factors, parse_factor_file, tolerance};

/// Largest `N` for which `verify` builds the dense feasibility system.
pub const FEASIBLE_GUARD: usize = 16;
const COLUMN_SUM_TOL: f64 = 1e-12;

/// Rendered output plus an optional failure that sets the exit code after
/// the output has been written.
#[derive(Debug)]
pub struct Outcome {
    pub output: String,
    pub failure: Option<CliError>,
}

impl Outcome {
    fn ok(output: String) -> Self {
        Self {
            output,
            failure: None,
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn no_csv(command: &str, format: Format) -> Result<()> {
    if format == Format::Csv {
        return Err(CliError::Input(format!(
            "csv output is not available for {command}"
        )));
    }
    Ok(())
}

fn shape(sizes: &[usize]) -> String {
    sizes
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join("x")
}

fn fmt_gap(g: f64) -> String {
    if g.is_finite() {
        format!("{g:.3e}")
    } else {
        "inf".into()
    }
}

fn engine_options(tol: Option<f64>) -> Result<EngineOptions> {
    Ok(EngineOptions {
        policy: tolerance(tol)?,
        ..EngineOptions::default()
    })
}

#[derive(Serialize)]
struct BothReports<'a> {
    agree: bool,
    direct: &'a DefectReport,
    decomposed: &'a DefectReport,
}

fn report_text(r: &DefectReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "sizes               {}", shape(&r.sizes));
    let _ = writeln!(s, "N                   {}", r.n_total);
    let _ = writeln!(
        s,
        "method              {}",
        if r.method == Method::Direct {
            "direct"
        } else {
            "decomposed"
        }
    );
    let _ = writeln!(s, "dim M(U)            {}", r.dim_mspace);
    let _ = writeln!(s, "defect              {}", r.defect);
    let _ = writeln!(s, "generalized defect  {}", r.generalized_defect);
    let _ = writeln!(s, "lower bound         {}", r.lower_bound);
    let _ = writeln!(s, "min gap ratio       {}", fmt_gap(r.min_gap_ratio));
    for t in &r.per_subset_dims {
        let _ = writeln!(
            s,
            "  removed {:?}: d = {}, multiplicity {}",
            t.removed, t.dim, t.multiplicity
        );
    }
    for (phase, secs) in &r.wall_times {
        let _ = writeln!(s, "  time {phase}: {secs:.6} s");
    }
    s
}

pub fn run_defect(args: &DefectArgs) -> Result<Outcome> {
    no_csv("defect", args.output.format)?;
    let factors = load_factors(&args.input)?;
    let opts = engine_options(args.tol)?;
    let finish = |mut r: DefectReport| {
        if !args.timings {
            r.wall_times.clear();
        }
        r
    };
    let text = args.output.format == Format::Text;
    match args.method {
        MethodArg::Direct | MethodArg::Decomposed => {
            let method = if args.method == MethodArg::Direct {
                Method::Direct
            } else {
                Method::Decomposed
            };
            let report = finish(compute(&factors, method, &opts)?);
            let out = if text {
                report_text(&report)
            } else {
                to_json(&report)?
            };
            Ok(Outcome::ok(out))
        }
        MethodArg::Both => {
            let direct = finish(compute(&factors, Method::Direct, &opts)?);
            let decomposed = finish(compute(&factors, Method::Decomposed, &opts)?);
            let agree = direct.dim_mspace == decomposed.dim_mspace;
            let out = if text {
                format!(
                    "{}\n{}agree               {agree}\n",
                    report_text(&direct),
                    report_text(&decomposed)
                )
            } else {
                to_json(&BothReports {
                    agree,
                    direct: &direct,
                    decomposed: &decomposed,
                })?
            };
            let failure = (!agree).then(|| {
                CliError::Disagreement(format!(
                    "direct dim {} (min gap {}) vs decomposed dim {} (min gap {})",
                    direct.dim_mspace,
                    fmt_gap(direct.min_gap_ratio),
                    decomposed.dim_mspace,
                    fmt_gap(decomposed.min_gap_ratio)
                ))
            });
            Ok(Outcome {
                output: out,
                failure,
            })
        }
    }
}

#[derive(Serialize)]
struct BoundOutput {
    #[serde(flatten)]
    breakdown: BoundBreakdown,
    strategies: StrategyComparison,
}

pub fn run_bound(args: &BoundArgs) -> Result<Outcome> {
    no_csv("bound", args.output.format)?;
    let sizes = match (&args.sizes, &args.factors) {
        (Some(s), _) => SizeSequence::new(s.0.clone())?,
        (None, Some(path)) => parse_factor_file(path)?.sizes().clone(),
        (None, None) => {
            return Err(CliError::Input(
                "give --sizes LIST or --factors PATH".into(),
            ))
        }
    };
    let breakdown = expanded_lower_bound(&sizes)?;
    let strategies = compare_strategies(&sizes)?;
    let out = if args.output.format == Format::Text {
        let mut s = String::new();
        let _ = writeln!(s, "sizes           {}", shape(sizes.as_slice()));
        let _ = writeln!(s, "twos            {}", breakdown.twos_count);
        for b in &breakdown.per_subset_bounds {
            let _ = writeln!(
                s,
                "  removed {:?}: multiplicity {}, bound {}",
                b.removed, b.multiplicity, b.bound
            );
        }
        let _ = writeln!(s, "expanded        {}", breakdown.expanded_total);
        let _ = writeln!(s, "closed form     {}", breakdown.closed_form_total);
        let _ = writeln!(s, "naive product   {}", strategies.naive_product);
        let _ = writeln!(s, "gain            {}", strategies.delta);
        s
    } else {
        to_json(&BoundOutput {
            breakdown,
            strategies,
        })?
    };
    Ok(Outcome::ok(out))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub status: CheckStatus,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    let status = if passed {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    };
    Check {
        name,
        status,
        detail,
    }
}

fn skipped(name: &'static str, detail: String) -> Check {
    Check {
        name,
        status: CheckStatus::Skipped,
        detail,
    }
}

#[derive(Serialize)]
struct VerifyOutput {
    sizes: Vec<usize>,
    all_passed: bool,
    checks: Vec<Check>,
}

/// Direct-sum and invariant checks on one factor list.
pub fn verify_checks(factors: &FactorList, opts: &EngineOptions) -> Result<Vec<Check>> {
    let n = factors.total();
    let small = n <= opts.direct_guard;
    let too_big = |what: &str, limit: usize| format!("{what} limited to N <= {limit}, got N = {n}");
    let mut checks = Vec::new();

    let decomposed = compute(factors, Method::Decomposed, opts)?;

    if small {
        let ds = verify_direct_sum(factors, opts)?;
        checks.push(check(
            "direct_sum",
            ds.holds,
            format!(
                "total rank {}, sum of per-key ranks {}",
                ds.total_rank, ds.sum_of_ranks
            ),
        ));
        let direct = compute(factors, Method::Direct, opts)?;
        checks.push(check(
            "method_agreement",
            direct.dim_mspace == decomposed.dim_mspace,
            format!(
                "direct {}, decomposed {}",
                direct.dim_mspace, decomposed.dim_mspace
            ),
        ));
        let set = spanning_set(&factors.product())?;
        let worst = set
            .vectors
            .iter()
            .flat_map(|v| (0..n).map(move |c| (0..n).map(|row| v[row * n + c]).sum::<f64>().abs()))
            .fold(0.0, f64::max);
        checks.push(check(
            "generator_column_sums",
            worst <= COLUMN_SUM_TOL,
            format!("max |column sum| {worst:.3e}"),
        ));
    } else {
        let why = too_big("direct method", opts.direct_guard);
        checks.push(skipped("direct_sum", why.clone()));
        checks.push(skipped("method_agreement", why.clone()));
        checks.push(skipped("generator_column_sums", why));
    }

    if n <= FEASIBLE_GUARD {
        let phasing: Vec<Vec<f64>> = phasing_basis(n).iter().map(vectorize).collect();
        let rank = numerical_rank(&phasing, opts.policy)?.rank;
        checks.push(check(
            "phasing_rank",
            rank == 2 * n - 1,
            format!("rank {rank}, expected {}", 2 * n - 1),
        ));
        let fdim = feasible_space_dim(&factors.product())?;
        checks.push(check(
            "feasible_dimension",
            fdim as i64 == decomposed.generalized_defect,
            format!(
                "feasible space {fdim}, generalized defect {}",
                decomposed.generalized_defect
            ),
        ));
    } else {
        let why = too_big("dense feasibility system", FEASIBLE_GUARD);
        checks.push(skipped("phasing_rank", why.clone()));
        checks.push(skipped("feasible_dimension", why));
    }

    let bound = closed_form_lower_bound(factors.sizes())? as i64;
    checks.push(check(
        "lower_bound",
        decomposed.generalized_defect >= bound,
        format!(
            "generalized defect {}, bound {bound}",
            decomposed.generalized_defect
        ),
    ));

    if factors.len() >= 2 {
        let per_factor = factors
            .factors()
            .iter()
            .map(|f| generalized_defect(f).map(|g| g as u128))
            .collect::<kron_defect::Result<Vec<_>>>()?;
        let floor = supermultiplicative_floor(&per_factor)?;
        checks.push(check(
            "supermultiplicativity",
            decomposed.generalized_defect as u128 >= floor,
            format!(
                "generalized defect {}, product of factors' {floor}",
                decomposed.generalized_defect
            ),
        ));
    } else {
        checks.push(skipped("supermultiplicativity", "single factor".into()));
    }
    Ok(checks)
}

pub fn run_verify(args: &VerifyArgs) -> Result<Outcome> {
    no_csv("verify", args.output.format)?;
    let factors = load_factors(&args.input)?;
    let opts = engine_options(args.tol)?;
    let checks = verify_checks(&factors, &opts)?;
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| c.status == CheckStatus::Fail)
        .map(|c| c.name)
        .collect();
    let out = if args.output.format == Format::Text {
        let mut s = String::new();
        for c in &checks {
            let tag = match c.status {
                CheckStatus::Pass => "PASS",
                CheckStatus::Fail => "FAIL",
                CheckStatus::Skipped => "SKIP",
            };
            let _ = writeln!(s, "{tag} {:<24} {}", c.name, c.detail);
        }
        s
    } else {
        to_json(&VerifyOutput {
            sizes: factors.sizes().as_slice().to_vec(),
            all_passed: failed.is_empty(),
            checks,
        })?
    };
    let failure = (!failed.is_empty()).then(|| CliError::VerifyFailed(failed.join(", ")));
    Ok(Outcome {
        output: out,
        failure,
    })
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Input(format!("cannot start {jobs} workers: {e}")))
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleRow {
    pub seed: u64,
    pub dim_mspace: usize,
    pub generalized_defect: i64,
    pub lower_bound: i64,
    pub attained: bool,
    #[serde(serialize_with = "gap_field")]
    pub min_gap_ratio: f64,
}

fn gap_field<S: serde::Serializer>(g: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if g.is_finite() {
        s.serialize_f64(*g)
    } else {
        s.serialize_str("inf")
    }
}

#[derive(Serialize)]
struct SampleOutput {
    sizes: Vec<usize>,
    trials: u64,
    attained: usize,
    at_least_bound: usize,
    rows: Vec<SampleRow>,
}

pub fn run_sample(args: &SampleArgs) -> Result<Outcome> {
    let opts = engine_options(args.tol)?;
    let sizes = &args.sizes.0;
    SizeSequence::new(sizes.clone())?;
    let seeds: Vec<u64> = (0..args.trials)
        .map(|t| args.seed.wrapping_add(t))
        .collect();
    let rows: Vec<SampleRow> = pool(args.jobs)?.install(|| {
        seeds
            .par_iter()
            .map(|&seed| -> Result<SampleRow> {
                let factors = haar_factors(sizes, seed)?;
                let r = compute(&factors, Method::Decomposed, &opts)?;
                Ok(SampleRow {
                    seed,
                    dim_mspace: r.dim_mspace,
                    generalized_defect: r.generalized_defect,
                    lower_bound: r.lower_bound,
                    attained: r.generalized_defect == r.lower_bound,
                    min_gap_ratio: r.min_gap_ratio,
                })
            })
            .collect::<Result<_>>()
    })?;
    let attained = rows.iter().filter(|r| r.attained).count();
    let at_least_bound = rows
        .iter()
        .filter(|r| r.generalized_defect >= r.lower_bound)
        .count();
    let out = match args.output.format {
        Format::Json => to_json(&SampleOutput {
            sizes: sizes.clone(),
            trials: args.trials,
            attained,
            at_least_bound,
            rows,
        })?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in &rows {
                w.serialize(r)?;
            }
            String::from_utf8(w.into_inner().map_err(|e| CliError::Input(e.to_string()))?)
                .expect("csv output is utf-8")
        }
        Format::Text => {
            let mut s = String::new();
            for r in &rows {
                let _ = writeln!(
                    s,
                    "seed {:>6}  gendefect {:>6}  bound {:>6}  {}",
                    r.seed,
                    r.generalized_defect,
                    r.lower_bound,
                    if r.attained { "attained" } else { "above" }
                );
            }
            let _ = writeln!(
                s,
                "attained {attained}/{}, at least bound {at_least_bound}/{}",
                rows.len(),
                rows.len()
            );
            s
        }
    };
    Ok(Outcome::ok(out))
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub sizes: String,
    pub seed: u64,
    pub dim_direct: usize,
    pub dim_decomposed: usize,
    pub t_direct: f64,
    pub t_decomposed: f64,
    #[serde(serialize_with = "gap_field")]
    pub min_gap_ratio: f64,
    pub agree: bool,
}

/// One bench trial: both methods on the same Haar factors.
pub fn bench_trial(sizes: &[usize], seed: u64, opts: &EngineOptions) -> Result<BenchRow> {
    let factors = haar_factors(sizes, seed)?;
    let start = Instant::now();
    let direct = compute(&factors, Method::Direct, opts)?;
    let t_direct = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let decomposed = compute(&factors, Method::Decomposed, opts)?;
    let t_decomposed = start.elapsed().as_secs_f64();
    Ok(BenchRow {
        sizes: shape(sizes),
        seed,
        dim_direct: direct.dim_mspace,
        dim_decomposed: decomposed.dim_mspace,
        t_direct,
        t_decomposed,
        min_gap_ratio: direct.min_gap_ratio.min(decomposed.min_gap_ratio),
        agree: direct.dim_mspace == decomposed.dim_mspace,
    })
}

pub fn run_bench(args: &BenchArgs) -> Result<Outcome> {
    if args.sizes.is_empty() || args.trials == 0 {
        return Err(CliError::Input(
            "bench grid is empty: give --sizes at least once and --trials >= 1".into(),
        ));
    }
    let opts = engine_options(args.tol)?;
    let trials: Vec<(&SizeList, u64)> = args
        .sizes
        .iter()
        .flat_map(|s| (0..args.trials).map(move |t| (s, args.seed.wrapping_add(t))))
        .collect();
    let rows: Vec<BenchRow> = pool(args.jobs)?.install(|| {
        trials
            .par_iter()
            .map(|(s, seed)| bench_trial(&s.0, *seed, &opts))
            .collect::<Result<_>>()
    })?;

    let out = match args.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in &rows {
                w.serialize(r)?;
            }
            String::from_utf8(w.into_inner().map_err(|e| CliError::Input(e.to_string()))?)
                .expect("csv output is utf-8")
        }
        Format::Json => to_json(&rows)?,
        Format::Text => {
            let mut s = String::new();
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{:<10} seed {:>4}  dim {:>6} / {:>6}  direct {:.4} s  decomposed {:.4} s{}",
                    r.sizes,
                    r.seed,
                    r.dim_direct,
                    r.dim_decomposed,
                    r.t_direct,
                    r.t_decomposed,
                    if r.agree { "" } else { "  DISAGREE" }
                );
            }
            s
        }
    };
    let bad: Vec<String> = rows
        .iter()
        .filter(|r| !r.agree)
        .map(|r| format!("{} seed {}", r.sizes, r.seed))
        .collect();
    let failure = (!bad.is_empty()).then(|| CliError::Disagreement(bad.join(", ")));
    Ok(Outcome {
        output: out,
        failure,
    })
}
