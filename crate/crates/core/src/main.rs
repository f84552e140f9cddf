use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use serde::Serialize;

use avar_mdp::augmented::{
    solve_avar, write_policy_csv, write_value_tables_csv, AvarSolution, Convergence, Horizon,
    InfiniteConfig, SolveOptions,
};
use avar_mdp::lq::{
    estimate_from_totals, estimate_global_s, riccati_recursion, sample_totals, simulate_lq,
    LqParams, LqRule, McEstimate,
};
use avar_mdp::mdp::{load_model, ModelFile};
use avar_mdp::oracle::oracle_min_avar;
use avar_mdp::risk::sample_risk;
use avar_mdp::rng::Phase;
use avar_mdp::{FiniteMdp, RiskLevel};

/// Largest acceptable gap between the DP and brute-force optimal values.
const ORACLE_TOLERANCE: f64 = 1e-9;

#[derive(Parser)]
#[command(
    name = "avar-mdp",
    version,
    about = "AVaR-optimal control of finite Markov decision processes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model file and list every violation found.
    Validate {
        #[arg(long)]
        model: PathBuf,
    },
    /// Solve min AVaR from one initial state and write tables, policy and summary.
    Solve(SolveArgs),
    /// VaR and AVaR of a sample file with one number per line.
    Risk {
        #[arg(long)]
        samples: PathBuf,
        /// One or more levels, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        alpha: Vec<f64>,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the DP solver with brute-force policy enumeration.
    OracleCheck {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 0)]
        x0: usize,
        #[arg(long)]
        horizon: usize,
        #[arg(long, value_delimiter = ',', default_value = "0.3,0.7,0.9")]
        alpha: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        s_step: f64,
        #[arg(long, default_value_t = 1.0)]
        margin: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo comparison of the risk-neutral and budget-switching LQ policies.
    LqDemo(LqArgs),
}

#[derive(Args)]
#[command(group(ArgGroup::new("horizon_kind").required(true).args(["horizon", "infinite"])))]
struct SolveArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 0)]
    x0: usize,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    infinite: bool,
    #[arg(long, default_value_t = 1.0)]
    s_step: f64,
    #[arg(long, default_value_t = 1.0)]
    margin: f64,
    /// Upper end of the budget grid (infinite horizon only).
    #[arg(long)]
    s_max: Option<f64>,
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iterations: usize,
    #[arg(long)]
    out: PathBuf,
    /// Also solve by policy enumeration and fail if the values differ.
    #[arg(long)]
    check_oracle: bool,
}

#[derive(Args)]
struct LqArgs {
    #[arg(long = "N", alias = "horizon")]
    horizon: usize,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    noise_std: f64,
    #[arg(long, default_value_t = 0.0)]
    x0: f64,
    /// Also write the first K trajectories of each policy.
    #[arg(long, default_value_t = 0)]
    trajectories: usize,
}

/// Outcome of a subcommand that ran to completion.
enum Outcome {
    Passed,
    ChecksFailed,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { model } => run_validate(&model),
        Command::Solve(args) => run_solve(&args),
        Command::Risk {
            samples,
            alpha,
            out,
        } => run_risk(&samples, &alpha, out.as_deref()),
        Command::OracleCheck {
            model,
            x0,
            horizon,
            alpha,
            s_step,
            margin,
            out,
        } => run_oracle_check(&model, x0, horizon, &alpha, s_step, margin, out.as_deref()),
        Command::LqDemo(args) => run_lq_demo(&args),
    };
    match result {
        Ok(Outcome::Passed) => ExitCode::SUCCESS,
        Ok(Outcome::ChecksFailed) => ExitCode::from(1),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

type CliResult = Result<Outcome, String>;

fn level(alpha: f64) -> Result<RiskLevel, String> {
    RiskLevel::new(alpha).map_err(|e| e.to_string())
}

fn read_model(path: &Path) -> Result<FiniteMdp, String> {
    load_model(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_file(dir: &Path, name: &str, contents: &[u8]) -> Result<(), String> {
    fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| format!("{}: {e}", path.display()))
}

fn run_validate(path: &Path) -> CliResult {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let doc = ModelFile::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let report = avar_mdp::mdp::validate_model(&doc);
    if report.is_valid() {
        println!(
            "{}: valid ({} states, {} actions)",
            path.display(),
            doc.states,
            doc.actions
        );
        Ok(Outcome::Passed)
    } else {
        for v in &report.violations {
            println!("{}: {v}", path.display());
        }
        Ok(Outcome::ChecksFailed)
    }
}

#[derive(Serialize)]
struct SolveParams<'a> {
    model: &'a str,
    x0: usize,
    alpha: f64,
    horizon: Option<usize>,
    infinite: bool,
    s_step: f64,
    margin: f64,
    s_max: Option<f64>,
    tolerance: f64,
    max_iterations: usize,
}

#[derive(Serialize)]
struct GridSummary {
    s_min: f64,
    s_max: f64,
    step: f64,
    points: usize,
}

#[derive(Serialize)]
struct OracleSummary {
    avar: f64,
    s_star: f64,
    gap: f64,
    s_star_gap: f64,
    passed: bool,
}

#[derive(Serialize)]
struct SolveSummary<'a> {
    command: &'static str,
    params: SolveParams<'a>,
    avar: f64,
    s_star: f64,
    grid: GridSummary,
    convergence: Option<Convergence>,
    oracle: Option<OracleSummary>,
}

fn params_comment<T: Serialize>(params: &T) -> String {
    format!(
        "# params {}\n",
        serde_json::to_string(params).expect("serialisable")
    )
}

fn run_solve(args: &SolveArgs) -> CliResult {
    let mdp = read_model(&args.model)?;
    let level = level(args.alpha)?;
    let horizon = match args.horizon {
        Some(n) => Horizon::Finite(n),
        None => Horizon::Infinite,
    };
    let options = SolveOptions {
        step: args.s_step,
        margin: args.margin,
        s_max: args.s_max,
        infinite: InfiniteConfig {
            tolerance: args.tolerance,
            max_iterations: args.max_iterations,
        },
        ..SolveOptions::default()
    };
    let solution = solve_avar(&mdp, args.x0, horizon, level, &options)
        .map_err(|e| format!("solve failed: {e}"))?;

    let oracle = if args.check_oracle {
        let Horizon::Finite(n) = horizon else {
            return Err("--check-oracle requires --horizon".into());
        };
        let candidates: Vec<f64> = solution.grid.points().collect();
        let o = oracle_min_avar(&mdp, args.x0, n, level, &candidates)
            .map_err(|e| format!("oracle failed: {e}"))?;
        let gap = (o.avar - solution.avar).abs();
        let s_star_gap = (o.s_star - solution.s_star).abs();
        Some(OracleSummary {
            avar: o.avar,
            s_star: o.s_star,
            gap,
            s_star_gap,
            passed: gap <= ORACLE_TOLERANCE
                && s_star_gap <= solution.grid.step() + ORACLE_TOLERANCE,
        })
    } else {
        None
    };

    let model = args.model.display().to_string();
    let params = SolveParams {
        model: &model,
        x0: args.x0,
        alpha: args.alpha,
        horizon: args.horizon,
        infinite: args.infinite,
        s_step: args.s_step,
        margin: args.margin,
        s_max: args.s_max,
        tolerance: args.tolerance,
        max_iterations: args.max_iterations,
    };
    let header = params_comment(&params);
    write_csv(
        &args.out,
        "value.csv",
        &header,
        &solution,
        write_value_tables_csv,
    )?;
    write_csv(
        &args.out,
        "policy.csv",
        &header,
        &solution,
        write_policy_csv,
    )?;

    let passed = oracle.as_ref().is_none_or(|o| o.passed);
    let summary = SolveSummary {
        command: "solve",
        params,
        avar: solution.avar,
        s_star: solution.s_star,
        grid: GridSummary {
            s_min: solution.grid.s_min(),
            s_max: solution.grid.s_max(),
            step: solution.grid.step(),
            points: solution.grid.len(),
        },
        convergence: solution.convergence(),
        oracle,
    };
    let mut json = serde_json::to_string_pretty(&summary).expect("serialisable");
    json.push('\n');
    write_file(&args.out, "summary.json", json.as_bytes())?;
    println!("avar = {}, s_star = {}", solution.avar, solution.s_star);
    if !passed {
        eprintln!("oracle check failed, see summary.json");
        return Ok(Outcome::ChecksFailed);
    }
    Ok(Outcome::Passed)
}

fn write_csv(
    dir: &Path,
    name: &str,
    header: &str,
    solution: &AvarSolution,
    body: fn(&mut Vec<u8>, &AvarSolution) -> std::io::Result<()>,
) -> Result<(), String> {
    let mut buf = header.as_bytes().to_vec();
    body(&mut buf, solution).map_err(|e| e.to_string())?;
    write_file(dir, name, &buf)
}

fn read_samples(path: &Path) -> Result<Vec<f64>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut samples = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|_| format!("{}:{}: not a number: {line:?}", path.display(), i + 1))?;
        if !v.is_finite() {
            return Err(format!(
                "{}:{}: value must be finite",
                path.display(),
                i + 1
            ));
        }
        samples.push(v);
    }
    Ok(samples)
}

fn run_risk(path: &Path, alphas: &[f64], out: Option<&Path>) -> CliResult {
    let samples = read_samples(path)?;
    let mut csv = String::from("alpha,count,mean,var,avar\n");
    for &alpha in alphas {
        let r =
            sample_risk(&samples, level(alpha)?).map_err(|e| format!("{}: {e}", path.display()))?;
        writeln!(
            csv,
            "{},{},{},{},{}",
            r.alpha, r.count, r.mean, r.var, r.avar
        )
        .unwrap();
    }
    match out {
        Some(file) => {
            let contents = format!(
                "# params {{\"samples\":{:?},\"alpha\":{alphas:?}}}\n{csv}",
                path.display().to_string()
            );
            fs::write(file, contents).map_err(|e| format!("{}: {e}", file.display()))?;
        }
        None => print!("{csv}"),
    }
    Ok(Outcome::Passed)
}

#[derive(Serialize)]
struct OracleParams<'a> {
    model: &'a str,
    x0: usize,
    horizon: usize,
    alpha: &'a [f64],
    s_step: f64,
    margin: f64,
}

fn run_oracle_check(
    path: &Path,
    x0: usize,
    horizon: usize,
    alphas: &[f64],
    s_step: f64,
    margin: f64,
    out: Option<&Path>,
) -> CliResult {
    let mdp = read_model(path)?;
    let options = SolveOptions {
        step: s_step,
        margin,
        ..SolveOptions::default()
    };
    let model = path.display().to_string();
    let mut csv = params_comment(&OracleParams {
        model: &model,
        x0,
        horizon,
        alpha: alphas,
        s_step,
        margin,
    });
    csv.push_str("alpha,dp_avar,oracle_avar,gap,dp_s_star,oracle_s_star,passed\n");
    let mut all_passed = true;
    for &alpha in alphas {
        let level = level(alpha)?;
        let dp = solve_avar(&mdp, x0, Horizon::Finite(horizon), level, &options)
            .map_err(|e| format!("solve failed at alpha {alpha}: {e}"))?;
        let candidates: Vec<f64> = dp.grid.points().collect();
        let oracle = oracle_min_avar(&mdp, x0, horizon, level, &candidates)
            .map_err(|e| format!("oracle failed at alpha {alpha}: {e}"))?;
        let gap = (dp.avar - oracle.avar).abs();
        let passed = gap <= ORACLE_TOLERANCE
            && (dp.s_star - oracle.s_star).abs() <= dp.grid.step() + ORACLE_TOLERANCE;
        all_passed &= passed;
        writeln!(
            csv,
            "{alpha},{},{},{gap},{},{},{passed}",
            dp.avar, oracle.avar, dp.s_star, oracle.s_star
        )
        .unwrap();
    }
    match out {
        Some(dir) => write_file(dir, "oracle.csv", csv.as_bytes())?,
        None => print!("{csv}"),
    }
    Ok(if all_passed {
        Outcome::Passed
    } else {
        Outcome::ChecksFailed
    })
}

#[derive(Serialize)]
struct LqDemoParams {
    #[serde(rename = "N")]
    horizon: usize,
    alpha: f64,
    samples: usize,
    seed: u64,
    noise_std: f64,
    x0: f64,
    trajectories: usize,
    s_global: f64,
}

fn run_lq_demo(args: &LqArgs) -> CliResult {
    let params = LqParams {
        horizon: args.horizon,
        alpha: level(args.alpha)?,
        noise_std: args.noise_std,
        x0: args.x0,
        samples: args.samples,
        seed: args.seed,
    };
    params.validate().map_err(|e| e.to_string())?;
    let s_global = estimate_global_s(&params).map_err(|e| e.to_string())?;
    let table = riccati_recursion(params.horizon).map_err(|e| e.to_string())?;
    let rules = [LqRule::Neutral, LqRule::Heuristic { budget: s_global }];

    let header = params_comment(&LqDemoParams {
        horizon: args.horizon,
        alpha: args.alpha,
        samples: args.samples,
        seed: args.seed,
        noise_std: args.noise_std,
        x0: args.x0,
        trajectories: args.trajectories,
        s_global,
    });
    let mut csv = header.clone();
    csv.push_str(
        "policy,alpha,N,M,seed,mean,var,avar,stderr,s_global,noise_std,x0,stderr_mean,stderr_var\n",
    );
    for rule in rules {
        let totals = sample_totals(&params, &table, rule, Phase::Evaluation);
        let e: McEstimate =
            estimate_from_totals(&totals, params.alpha).map_err(|e| e.to_string())?;
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            rule.name(),
            args.alpha,
            args.horizon,
            args.samples,
            args.seed,
            e.mean,
            e.var,
            e.avar,
            e.stderr_avar,
            s_global,
            args.noise_std,
            args.x0,
            e.stderr_mean,
            e.stderr_var
        )
        .unwrap();
    }
    write_file(&args.out, "lq.csv", csv.as_bytes())?;

    if args.trajectories > 0 {
        let mut traj = header;
        traj.push_str("policy,trajectory,time,x,a,cost,switch_stage\n");
        for rule in rules {
            for i in 0..args.trajectories.min(args.samples) {
                let t = simulate_lq(&params, &table, rule, Phase::Evaluation, i as u64);
                let switch = t.switch_stage.map(|n| n.to_string()).unwrap_or_default();
                for n in 0..=params.horizon {
                    let (a, c) = match (t.actions.get(n), t.costs.get(n)) {
                        (Some(a), Some(c)) => (a.to_string(), c.to_string()),
                        _ => (String::new(), String::new()),
                    };
                    writeln!(
                        traj,
                        "{},{i},{n},{},{a},{c},{switch}",
                        rule.name(),
                        t.states[n]
                    )
                    .unwrap();
                }
            }
        }
        write_file(&args.out, "trajectories.csv", traj.as_bytes())?;
    }
    print!(
        "{}",
        csv.lines()
            .skip(1)
            .map(|l| format!("{l}\n"))
            .collect::<String>()
    );
    Ok(Outcome::Passed)
}
