//! `fpa`: solve, verify and inspect symmetric first-price auction equilibria.
//!
//! Exit codes: 0 success, 1 validation failure, 2 usage error.

mod input;

use std::io::Write;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fpa_core::ccfpa_blackbox::{self, PlanOptions};
use fpa_core::ccfpa_explicit::{canonical_bid_function, RationalBidFunction};
use fpa_core::cdfpa::{solve, BidGrid, DeltaChoice, JumpPointStrategy, SolveParams};
use fpa_core::dist::{Cdf, CdfOracle, MonotonicityMode, PiecewisePolyCdf};
use fpa_core::numeric::default_precision;
use fpa_core::verify::{epsilon_bne_check_ccfpa, epsilon_bne_check_cdfpa, monte_carlo_regret, RegretReport};
use rug::{Float, Rational};
use serde::Deserialize;
use serde_json::{json, Value};

use input::{load_cdf, parse_json, rational, rational_list, read_json_arg, CliError, CliResult};

#[derive(Parser)]
#[command(name = "fpa", version, about = "Equilibrium bidding in symmetric first-price auctions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute an equilibrium strategy.
    Solve(SolveArgs),
    /// Measure the regret of a strategy.
    Verify(VerifyArgs),
    /// Evaluate a cdf, or a strategy, at a point.
    Eval(EvalArgs),
    /// Count oracle queries of the black-box solver.
    QueryStats(QueryStatsArgs),
    /// Check a cdf description.
    ValidateCdf(ValidateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Model {
    CcfpaBlackbox,
    CcfpaExplicit,
    Cdfpa,
}

/// Auction description accepted by `solve --spec`; flags override its fields.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct AuctionSpec {
    model: Option<Model>,
    n: Option<usize>,
    cdf: Option<Value>,
    bids: Option<Vec<String>>,
    eps: Option<String>,
    #[serde(rename = "L")]
    lipschitz: Option<String>,
}

#[derive(Args)]
struct SolveArgs {
    /// Auction spec JSON (inline or file).
    #[arg(long)]
    spec: Option<String>,
    #[arg(long, value_enum)]
    model: Option<Model>,
    /// Cdf JSON (inline or file).
    #[arg(long)]
    cdf: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    eps: Option<String>,
    /// JSON array of bids, first bid 0 (cdfpa only).
    #[arg(long)]
    bids: Option<String>,
    /// Lipschitz constant of the cdf; defaults to the bound computed from its pieces.
    #[arg(long = "lipschitz", visible_alias = "L")]
    lipschitz: Option<String>,
    /// Exact bid at this value (ccfpa-explicit).
    #[arg(long)]
    at: Option<String>,
    /// Number of equally spaced sample points in [0,1] for CSV output.
    #[arg(long)]
    samples: Option<usize>,
    /// Reject values below the support infimum instead of bidding the value.
    #[arg(long)]
    no_extend: bool,
    /// Starting search tolerance δ (cdfpa).
    #[arg(long)]
    delta: Option<String>,
    /// Use the worst-case δ instead of the certified practical schedule (cdfpa).
    #[arg(long, conflicts_with = "delta")]
    theoretical_delta: bool,
    /// Also report the measured regret under the given cdf (cdfpa).
    #[arg(long)]
    certify: bool,
    /// Query F(0) too when precomputing (ccfpa-blackbox).
    #[arg(long)]
    strict_count: bool,
    /// Minimum binary precision for floating arithmetic.
    #[arg(long)]
    precision: Option<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Grid,
    Mc,
}

#[derive(Args)]
struct VerifyArgs {
    /// Strategy JSON from `solve`: jump points `{"s":[..]}` or a bid function.
    #[arg(long)]
    strategy: String,
    #[arg(long)]
    cdf: String,
    #[arg(long)]
    n: usize,
    /// Bid grid for a jump-point strategy.
    #[arg(long)]
    bids: Option<String>,
    #[arg(long, value_enum, default_value = "exact")]
    mode: Mode,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Values checked: this many equal steps over [0,1].
    #[arg(long, default_value_t = 256)]
    values: usize,
    /// Deviation bids for continuous strategies: this many equal steps over [0,1].
    #[arg(long, default_value_t = 1024)]
    deviations: usize,
    /// Exit 1 when the in-support regret exceeds this.
    #[arg(long)]
    eps: Option<String>,
    /// Keep the per-value samples in the report.
    #[arg(long)]
    samples: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    cdf: Option<String>,
    /// Strategy JSON; with `--bids` a jump-point strategy, otherwise a bid function.
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    bids: Option<String>,
    #[arg(long)]
    x: String,
}

#[derive(Args)]
struct QueryStatsArgs {
    #[arg(long)]
    cdf: String,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    eps: String,
    /// Bid evaluations sharing one precompute; defaults to K = ⌈1/ε⌉.
    #[arg(long)]
    calls: Option<u64>,
    #[arg(long)]
    strict_count: bool,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    cdf: String,
    /// Also prove monotonicity exactly, piece by piece.
    #[arg(long)]
    exact: bool,
}

fn main() {
    let cli = Cli::parse();
    let mut out = Vec::new();
    let res = match cli.command {
        Command::Solve(a) => cmd_solve(a, &mut out),
        Command::Verify(a) => cmd_verify(a, &mut out),
        Command::Eval(a) => cmd_eval(a, &mut out),
        Command::QueryStats(a) => cmd_query_stats(a, &mut out),
        Command::ValidateCdf(a) => cmd_validate(a, &mut out),
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    let _ = lock.write_all(&out);
    let _ = lock.flush();
    if let Err(e) = res {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn print_json(out: &mut Vec<u8>, v: &Value) {
    serde_json::to_writer_pretty(&mut *out, v).expect("JSON to memory");
    out.push(b'\n');
}

fn require<T>(v: Option<T>, flag: &str, model: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::Usage(format!("--{flag} is required for model {model}")))
}

fn check_n(n: usize) -> CliResult<usize> {
    if n < 2 {
        return Err(CliError::Usage(format!("--n: need at least 2 bidders, got {n}")));
    }
    Ok(n)
}

fn check_eps(eps: Rational) -> CliResult<Rational> {
    if eps <= 0 || eps > 1 {
        return Err(CliError::Usage(format!("--eps: {eps} not in (0,1]")));
    }
    Ok(eps)
}

/// Equally spaced points `i/(k−1)`, or `{1}` for `k = 1`.
fn sample_points(k: usize) -> Vec<Rational> {
    if k <= 1 {
        return vec![Rational::from(1)];
    }
    (0..k).map(|i| Rational::from((i as u64, k as u64 - 1))).collect()
}

struct Resolved {
    model: Model,
    n: usize,
    cdf: PiecewisePolyCdf,
    eps: Option<Rational>,
    bids: Option<Vec<Rational>>,
    lipschitz: Option<Rational>,
}

fn resolve(a: &SolveArgs) -> CliResult<Resolved> {
    let spec: AuctionSpec = match &a.spec {
        Some(s) => parse_json(&read_json_arg(s, "spec")?, "spec")?,
        None => AuctionSpec::default(),
    };
    let model = a.model.or(spec.model).ok_or_else(|| CliError::Usage("--model is required".into()))?;
    let n = check_n(a.n.or(spec.n).ok_or_else(|| CliError::Usage("--n is required".into()))?)?;
    let cdf = match (&a.cdf, &spec.cdf) {
        (Some(c), _) => load_cdf(c)?,
        (None, Some(v)) => load_cdf(&v.to_string())?,
        (None, None) => return Err(CliError::Usage("--cdf is required".into())),
    };
    let eps = match a.eps.as_deref().or(spec.eps.as_deref()) {
        Some(e) => Some(check_eps(rational(e, "eps")?)?),
        None => None,
    };
    let bids = match (&a.bids, &spec.bids) {
        (Some(b), _) => Some(rational_list(b, "bids")?),
        (None, Some(list)) => Some(
            list.iter().enumerate().map(|(i, s)| rational(s, &format!("bids[{i}]"))).collect::<CliResult<Vec<_>>>()?,
        ),
        (None, None) => None,
    };
    let lipschitz = match a.lipschitz.as_deref().or(spec.lipschitz.as_deref()) {
        Some(l) => {
            let l = rational(l, "lipschitz")?;
            if l <= 0 {
                return Err(CliError::Usage(format!("--lipschitz: {l} must be positive")));
            }
            Some(l)
        }
        None => None,
    };
    Ok(Resolved { model, n, cdf, eps, bids, lipschitz })
}

fn cmd_solve(a: SolveArgs, out: &mut Vec<u8>) -> CliResult<()> {
    let r = resolve(&a)?;
    if r.model != Model::Cdfpa && r.bids.is_some() {
        return Err(CliError::Usage("--bids only applies to model cdfpa".into()));
    }
    match r.model {
        Model::CcfpaExplicit => solve_explicit(&a, &r, out),
        Model::CcfpaBlackbox => solve_blackbox(&a, &r, out),
        Model::Cdfpa => solve_cdfpa(&a, &r, out),
    }
}

fn solve_explicit(a: &SolveArgs, r: &Resolved, out: &mut Vec<u8>) -> CliResult<()> {
    let rbf = canonical_bid_function(&r.cdf, r.n)?;
    let eval = |x: &Rational| if a.no_extend { rbf.eval_unextended(x) } else { rbf.eval(x) };
    if let Some(at) = &a.at {
        let x = rational(at, "at")?;
        writeln!(out, "{}", eval(&x)?).unwrap();
    } else if let Some(k) = a.samples {
        writeln!(out, "x,bid").unwrap();
        for x in sample_points(k) {
            match eval(&x) {
                Ok(b) => writeln!(out, "{x},{b}").unwrap(),
                // Below the support infimum with --no-extend: no bid.
                Err(fpa_core::Error::Domain(_)) if a.no_extend => writeln!(out, "{x},").unwrap(),
                Err(e) => return Err(e.into()),
            }
        }
    } else {
        print_json(out, &serde_json::to_value(&rbf).expect("serializable"));
    }
    Ok(())
}

fn solve_blackbox(a: &SolveArgs, r: &Resolved, out: &mut Vec<u8>) -> CliResult<()> {
    let eps = require(r.eps.clone(), "eps", "ccfpa-blackbox")?;
    let lip = r.lipschitz.clone().unwrap_or_else(|| r.cdf.lipschitz_bound());
    let oracle = CdfOracle::from_cdf(Arc::new(r.cdf.clone()), lip.to_f64());
    let opts = PlanOptions { strict_count: a.strict_count, precision: a.precision.unwrap_or_else(default_precision) };
    let plan = ccfpa_blackbox::precompute_with::<Rational>(&oracle, r.n, &eps, opts)?;
    if plan.was_clamped() {
        eprintln!("warning: eps above 1 clamped to 1");
    }
    let points = match &a.at {
        Some(at) => vec![rational(at, "at")?],
        None => sample_points(a.samples.unwrap_or(11)),
    };
    writeln!(out, "x,bid,L,U,queries").unwrap();
    for x in points {
        let ev = ccfpa_blackbox::bid(&plan, &oracle, &x)?;
        writeln!(out, "{},{},{},{},{}", x, ev.bid, ev.lower, ev.upper, oracle.query_count()).unwrap();
    }
    Ok(())
}

fn solve_cdfpa(a: &SolveArgs, r: &Resolved, out: &mut Vec<u8>) -> CliResult<()> {
    let bids = require(r.bids.clone(), "bids", "cdfpa")?;
    let eps = require(r.eps.clone(), "eps", "cdfpa")?;
    let grid = BidGrid::new(bids)?;
    let lip = r.lipschitz.clone().unwrap_or_else(|| r.cdf.lipschitz_bound());
    let delta = if a.theoretical_delta {
        DeltaChoice::Theoretical
    } else {
        DeltaChoice::Practical(a.delta.as_deref().map(|d| rational(d, "delta")).transpose()?)
    };
    let params = SolveParams { delta, precision_bits: a.precision.or(Some(default_precision())) };
    let cdf: Arc<dyn Cdf> = Arc::new(r.cdf.clone());
    let res = solve(cdf, lip.to_f64(), r.n, &grid, &eps, &params)?;
    let strs = |v: &[Rational]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    let mut doc = json!({
        "s": strs(&res.strategy.s),
        "U": strs(&res.strategy.u),
        "certificate": {
            "gamma": res.certificate.gamma.to_string(),
            "pass": res.certificate.pass,
            "max_residual": res.certificate.max_residual,
        },
        "delta": res.delta.to_string(),
        "transform_weight": res.transform_weight.to_string(),
        "precision_bits": res.precision_bits,
    });
    let mut ok = res.certificate.pass;
    if a.certify {
        let rep = epsilon_bne_check_cdfpa(&r.cdf, r.n, &grid, &res.strategy, 1024)?;
        let within = rep.max_regret_exact.as_deref().and_then(|s| s.parse::<Rational>().ok()).map(|x| x <= eps);
        ok &= within.unwrap_or(rep.max_regret <= eps.to_f64());
        doc["regret"] = json!({
            "max_regret": rep.max_regret_exact.clone().unwrap_or_else(|| rep.max_regret.to_string()),
            "argmax_value": rep.argmax_value,
            "within_eps": within,
        });
    }
    print_json(out, &doc);
    if !ok {
        return Err(CliError::Failed("strategy not certified at the requested eps".into()));
    }
    Ok(())
}

enum Strategy {
    Jumps(JumpPointStrategy, BidGrid),
    Continuous(RationalBidFunction),
}

fn load_strategy(arg: &str, bids: Option<&str>) -> CliResult<Strategy> {
    let text = read_json_arg(arg, "strategy")?;
    match bids {
        Some(b) => {
            let st: JumpPointStrategy = parse_json(&text, "strategy")?;
            let st = JumpPointStrategy::new(st.s, st.u)?;
            let grid = BidGrid::new(rational_list(b, "bids")?)?;
            st.validate_for(&grid)?;
            Ok(Strategy::Jumps(st, grid))
        }
        None => {
            let rbf: RationalBidFunction = parse_json(&text, "strategy")?;
            rbf.check_shape()?;
            Ok(Strategy::Continuous(rbf))
        }
    }
}

/// A cdf seen only through floating evaluation, so that verifiers take their grid path.
struct FloatOnly<'a>(&'a PiecewisePolyCdf);

impl Cdf for FloatOnly<'_> {
    fn eval_float(&self, x: &Float) -> Float {
        self.0.eval_float(x)
    }

    fn lipschitz(&self) -> f64 {
        self.0.lipschitz()
    }
}

fn cmd_verify(a: VerifyArgs, out: &mut Vec<u8>) -> CliResult<()> {
    let n = check_n(a.n)?;
    let cdf = load_cdf(&a.cdf)?;
    let strategy = load_strategy(&a.strategy, a.bids.as_deref())?;
    let values: Vec<f64> = (0..=a.values.max(1)).map(|k| k as f64 / a.values.max(1) as f64).collect();
    let mut report: RegretReport = match (&strategy, a.mode) {
        (Strategy::Jumps(st, grid), Mode::Exact) => epsilon_bne_check_cdfpa(&cdf, n, grid, st, a.values)?,
        (Strategy::Jumps(st, grid), Mode::Grid) => epsilon_bne_check_cdfpa(&FloatOnly(&cdf), n, grid, st, a.values)?,
        (Strategy::Jumps(st, grid), Mode::Mc) => {
            let devs: Vec<f64> = grid.bids().iter().map(|b| b.to_f64()).collect();
            monte_carlo_regret(&cdf, n, &|v| st.bid_f64(grid, v), &values, &devs, a.trials, a.seed)?
        }
        (Strategy::Continuous(_), Mode::Exact) => {
            return Err(CliError::Usage("--mode exact needs a jump-point strategy with --bids".into()))
        }
        (Strategy::Continuous(rbf), Mode::Grid) => {
            if rbf.n != n {
                return Err(CliError::Usage(format!("strategy is for n = {}, --n is {n}", rbf.n)));
            }
            epsilon_bne_check_ccfpa(&cdf, n, &|v| rbf.eval_f64(v), a.deviations, a.values)?
        }
        (Strategy::Continuous(rbf), Mode::Mc) => {
            let devs: Vec<f64> = (0..=a.deviations.max(1)).map(|k| k as f64 / a.deviations.max(1) as f64).collect();
            monte_carlo_regret(&cdf, n, &|v| rbf.eval_f64(v), &values, &devs, a.trials, a.seed)?
        }
    };
    if !a.samples {
        report.samples.clear();
    }
    let mut doc = serde_json::to_value(&report).expect("serializable");
    doc["precision_bits"] = json!(match report.max_regret_exact {
        Some(_) => Value::Null,
        None if a.mode == Mode::Grid && matches!(strategy, Strategy::Jumps(..)) => json!(default_precision()),
        None => json!(53),
    });
    print_json(out, &doc);
    if let Some(e) = &a.eps {
        let eps = rational(e, "eps")?;
        let exceeded = match report.max_regret_exact.as_deref().and_then(|s| s.parse::<Rational>().ok()) {
            Some(exact) => exact > eps,
            None => report.max_regret > eps.to_f64(),
        };
        if exceeded {
            return Err(CliError::Failed(format!("regret {} exceeds eps {eps}", report.max_regret)));
        }
    }
    Ok(())
}

fn cmd_eval(a: EvalArgs, out: &mut Vec<u8>) -> CliResult<()> {
    let x = rational(&a.x, "x")?;
    match (&a.strategy, &a.cdf) {
        (Some(s), _) => {
            let bid = match load_strategy(s, a.bids.as_deref())? {
                Strategy::Jumps(st, grid) => {
                    if !(0..=1).contains(&x) {
                        return Err(CliError::Failed(format!("value {x} outside [0,1]")));
                    }
                    grid.bid(st.bid_index(&x)).clone()
                }
                Strategy::Continuous(rbf) => rbf.eval(&x)?,
            };
            writeln!(out, "{bid}").unwrap();
        }
        (None, Some(c)) => {
            let cdf = load_cdf(c)?;
            writeln!(out, "{}", cdf.eval(&x)?).unwrap();
        }
        (None, None) => return Err(CliError::Usage("eval needs --cdf or --strategy".into())),
    }
    Ok(())
}

fn cmd_query_stats(a: QueryStatsArgs, out: &mut Vec<u8>) -> CliResult<()> {
    let n = check_n(a.n)?;
    let eps = check_eps(rational(&a.eps, "eps")?)?;
    let cdf = load_cdf(&a.cdf)?;
    let oracle = CdfOracle::from_cdf(Arc::new(cdf.clone()), cdf.lipschitz());
    let opts = PlanOptions { strict_count: a.strict_count, ..PlanOptions::default() };
    let plan = ccfpa_blackbox::precompute_with::<Rational>(&oracle, n, &eps, opts)?;
    let k = plan.k();
    let calls = a.calls.unwrap_or(k).max(1);
    for x in sample_points(calls as usize) {
        ccfpa_blackbox::bid(&plan, &oracle, &x)?;
    }
    let total = oracle.query_count();
    let amortized = Rational::from((total, calls));
    let budget = k + 1;
    print_json(
        out,
        &json!({
            "K": k,
            "eps_hat": plan.eps_hat().to_string(),
            "precompute_queries": plan.precompute_queries(),
            "per_bid_queries": 1,
            "calls": calls,
            "total_queries": total,
            "amortized_per_bid": amortized.to_string(),
            "budget_per_bid": budget,
            "within_budget": amortized <= budget,
        }),
    );
    Ok(())
}

fn cmd_validate(a: ValidateArgs, out: &mut Vec<u8>) -> CliResult<()> {
    let spec = input::cdf_spec(&a.cdf)?;
    let cdf = spec.build_unchecked()?;
    let mode = if a.exact { MonotonicityMode::Exact } else { MonotonicityMode::Grid };
    let report = cdf.validate_with(mode);
    print_json(
        out,
        &json!({
            "valid": report.is_ok(),
            "pieces": cdf.pieces(),
            "degree": cdf.degree(),
            "support_infimum": cdf.support_infimum().to_string(),
            "lipschitz_bound": cdf.lipschitz_bound().to_string(),
            "violations": serde_json::to_value(&report.violations).expect("serializable"),
        }),
    );
    if !report.is_ok() {
        return Err(CliError::Failed("cdf failed validation".into()));
    }
    Ok(())
}
