use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cantordiff::classify::{
    classify_correlated, classify_general, classify_spectral, SpectralPolicy, Verdict,
};
use cantordiff::dgc::{
    establish_dgc, growth_probability_bound, DgcReport, LetterOutcome, SearchOptions,
};
use cantordiff::distribution::DistributionKind;
use cantordiff::experiment::{
    emit_report, parse_distribution_spec, run_monte_carlo, DistributionSpec, ExperimentConfig,
    RunOptions,
};
use cantordiff::literal::DistributionLiteral;
use cantordiff::par::with_threads;
use cantordiff::rational::format_rational;
use cantordiff::simulate::{
    critical_processes, diagonal_counts_with, occupancy_profile, render, sample_pair, CountBackend,
    ImageFormat, RenderView,
};
use cantordiff::spectra::{
    expectation_matrix, gamma_cyclic, lower_spectral_radius, word_matrix, MatrixNorm,
    SpectralOptions,
};
use cantordiff::{
    sampling::SubsetSampler, Error, Execution, JointSurvivalDistribution, Limits, Result, Word,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "cantordiff",
    version,
    about = "Interval tests for differences of random Cantor sets"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Run everything on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    /// Override the witness search budget.
    #[arg(long, global = true)]
    search_budget: Option<u64>,
    /// Override the cap on survivors per realization.
    #[arg(long, global = true)]
    max_survivors: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Laws {
    /// Law of the first set: correlated:m,M,p | independent:p0,p1,.. |
    /// independent-uniform:M,p | deterministic:bits | file:path | inline JSON.
    #[arg(short = 'd', long = "dist")]
    first: String,
    /// Law of the second set (default: same as the first).
    #[arg(short = 's', long = "second")]
    second: Option<String>,
}

impl Laws {
    fn resolve(&self) -> Result<(JointSurvivalDistribution, JointSurvivalDistribution)> {
        let a = parse_distribution_spec(&self.first, None)?;
        let b = match &self.second {
            Some(s) => parse_distribution_spec(s, None)?,
            None => a.clone(),
        };
        Ok((a, b))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Auto,
    Correlated,
    General,
    Spectral,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether the difference set contains an interval.
    Classify {
        #[command(flatten)]
        laws: Laws,
        #[arg(long, value_enum, default_value = "auto")]
        method: Method,
        /// Word length for the spectral method.
        #[arg(long, default_value_t = 6)]
        n_max: usize,
        #[arg(long, default_value_t = 0.05)]
        margin: f64,
    },
    /// Cyclic cross-correlation coefficients.
    Gamma {
        #[command(flatten)]
        laws: Laws,
    },
    /// Expectation matrix of a letter or a word.
    Matrix {
        #[command(flatten)]
        laws: Laws,
        /// Word such as 012 or 10,11 (letters above 9 need commas).
        #[arg(short, long)]
        word: String,
    },
    /// Growth witnesses for every letter.
    Dgc {
        #[command(flatten)]
        laws: Laws,
        /// Also write the JSON report here.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Print a growth probability bound for this level.
        #[arg(long)]
        bound_level: Option<u32>,
    },
    /// Lower spectral radius estimates for word lengths 1..=n-max.
    Spectral {
        #[command(flatten)]
        laws: Laws,
        #[arg(long, default_value_t = 8)]
        n_max: usize,
        #[arg(long, default_value = "max-column-sum")]
        norm: MatrixNorm,
        /// Enumerate every word instead of branch and bound.
        #[arg(long)]
        no_prune: bool,
    },
    /// Sample one pair of sets and report occupancy per level.
    Simulate {
        #[command(flatten)]
        laws: Laws,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Replica index (substream).
        #[arg(long, default_value_t = 0)]
        stream: u64,
        #[arg(long, default_value = "auto")]
        backend: CountBackend,
    },
    /// Monte Carlo experiment over many replicas.
    Mc(McArgs),
    /// Write the order-n distribution as a literal.
    Expand {
        #[arg(short = 'd', long = "dist")]
        dist: String,
        #[arg(short = 'n', long, default_value_t = 2)]
        order: u32,
    },
    /// Draw one sampled pair at a level.
    Render {
        #[command(flatten)]
        laws: Laws,
        #[arg(long, default_value_t = 3)]
        level: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        stream: u64,
        #[arg(long, default_value = "svg")]
        format: ImageFormat,
        #[arg(long, default_value = "product")]
        view: RenderView,
        #[arg(short, long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct McArgs {
    /// Experiment file (TOML or JSON); flags below override it.
    #[arg(short, long)]
    config: Option<PathBuf>,
    #[arg(short = 'd', long = "dist")]
    first: Option<String>,
    #[arg(short = 's', long = "second")]
    second: Option<String>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    replicas: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    backend: Option<CountBackend>,
    #[arg(long)]
    margin: Option<f64>,
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Directory for a rendered picture of replica 0.
    #[arg(long)]
    images: Option<PathBuf>,
}

struct Context {
    exec: Execution,
    limits: Limits,
    threads: Option<usize>,
}

impl Context {
    fn search(&self) -> SearchOptions {
        SearchOptions {
            exec: self.exec,
            ..SearchOptions::from(self.limits)
        }
    }
}

/// Writes to stdout; a closed pipe ends the process quietly.
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let mut lock = std::io::stdout().lock();
        if let Err(e) = writeln!(lock, $($arg)*) {
            if e.kind() == std::io::ErrorKind::BrokenPipe {
                std::process::exit(0);
            }
            return Err(e.into());
        }
    }};
}

fn print_json(v: &serde_json::Value) -> Result<()> {
    out!(
        "{}",
        serde_json::to_string_pretty(v).expect("json value serializes")
    );
    Ok(())
}

/// Both laws are the same `m`-subset family: the exact rule applies.
fn correlated_params(
    a: &JointSurvivalDistribution,
    b: &JointSurvivalDistribution,
) -> Option<usize> {
    match (a.kind(), b.kind()) {
        (DistributionKind::UniformSubsets { m, .. }, DistributionKind::UniformSubsets { .. })
            if a == b =>
        {
            Some(*m)
        }
        _ => None,
    }
}

fn classify(
    mu: &JointSurvivalDistribution,
    lambda: &JointSurvivalDistribution,
    method: Method,
    n_max: usize,
    margin: f64,
    ctx: &Context,
) -> Result<Verdict> {
    let correlated = correlated_params(mu, lambda);
    match (method, correlated) {
        (Method::Auto | Method::Correlated, Some(m)) => {
            classify_correlated(m, mu.alphabet_size(), mu.marginals().get(0))
        }
        (Method::Correlated, None) => Err(Error::HypothesisNotMet(
            "both laws must be the same correlated:m,M,p family".into(),
        )),
        (Method::Auto | Method::General, _) => classify_general(mu, lambda, &ctx.search()),
        (Method::Spectral, _) => {
            let policy = SpectralPolicy {
                margin,
                spectral: SpectralOptions {
                    exec: ctx.exec,
                    limits: ctx.limits,
                    ..SpectralOptions::default()
                },
                search: ctx.search(),
                ..SpectralPolicy::default()
            };
            classify_spectral(mu, lambda, n_max, &policy)
        }
    }
}

fn print_dgc(report: &DgcReport) -> Result<()> {
    out!(
        "method: {}  alphabet: {}  overall: {}",
        report.method,
        report.alphabet_size,
        report.overall
    );
    for outcome in &report.letters {
        match outcome {
            LetterOutcome::Witness { witness } => {
                let gamma = cantordiff::letters::gamma_profile(&witness.x, &witness.y)
                    .map(|g| g.iter().map(u32::to_string).collect::<Vec<_>>().join(" "))
                    .unwrap_or_default();
                out!(
                    "k={:<3} X={}  Y={}  gamma: {}",
                    witness.k,
                    witness.x,
                    witness.y,
                    gamma
                );
            }
            LetterOutcome::Failure { k, reason, .. } => out!("k={k:<3} no witness: {reason}"),
        }
    }
    Ok(())
}

fn mc_config(args: &McArgs) -> Result<(ExperimentConfig, Option<PathBuf>)> {
    let base = args
        .config
        .as_ref()
        .and_then(|p| p.parent().map(Path::to_path_buf));
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::read(p)?,
        None => {
            let first = args
                .first
                .clone()
                .ok_or_else(|| Error::ParameterOutOfRange("mc needs --config or --dist".into()))?;
            ExperimentConfig::new(DistributionSpec::Spec(first), None, 4, 100, 0)
        }
    };
    if let Some(f) = &args.first {
        cfg.first = DistributionSpec::Spec(f.clone());
    }
    if let Some(s) = &args.second {
        cfg.second = Some(DistributionSpec::Spec(s.clone()));
    }
    macro_rules! set {
        ($($field:ident),*) => {$(if let Some(v) = args.$field.clone() { cfg.$field = v; })*};
    }
    set!(depth, replicas, seed, backend, margin);
    if args.json.is_some() {
        cfg.outputs.json = args.json.clone();
    }
    if args.csv.is_some() {
        cfg.outputs.csv = args.csv.clone();
    }
    if args.images.is_some() {
        cfg.outputs.images = args.images.clone();
    }
    cfg.validate()?;
    Ok((cfg, base))
}

fn run_mc(args: &McArgs, ctx: &Context) -> Result<()> {
    let (mut cfg, base) = mc_config(args)?;
    if cfg.threads.is_none() {
        cfg.threads = ctx.threads;
    }
    let base = base.as_deref();
    let opts = RunOptions {
        exec: ctx.exec,
        limits: ctx.limits,
    };
    let record = run_monte_carlo(&cfg, base, &opts)?;
    let (mu, lambda) = cfg.distributions(base)?;
    let verdict = match classify(&mu, &lambda, Method::Auto, 0, cfg.margin, ctx) {
        Ok(v) => vec![v],
        Err(Error::ResourceLimitExceeded(_)) => Vec::new(),
        Err(e) => return Err(e),
    };
    emit_report(
        &record,
        &verdict,
        cfg.outputs.json.as_deref(),
        cfg.outputs.csv.as_deref(),
    )?;
    if let Some(dir) = &cfg.outputs.images {
        std::fs::create_dir_all(dir)?;
        let m = record.alphabet_size as u64;
        // deepest level that fits the pixel budget
        let level = (0..=cfg.depth)
            .rev()
            .find(|&n| 2 * m.pow(n as u32) <= ctx.limits.max_pixels)
            .unwrap_or(0);
        let (a, b) = sample_pair(
            &SubsetSampler::new(&mu, &ctx.limits)?,
            &SubsetSampler::new(&lambda, &ctx.limits)?,
            cfg.depth,
            cfg.seed,
            0,
            &ctx.limits,
        )?;
        let svg = render(
            &a,
            &b,
            level,
            ImageFormat::Svg,
            RenderView::Product,
            &ctx.limits,
        )?;
        std::fs::write(dir.join(format!("replica0_level{level}.svg")), svg)?;
    }
    if cfg.outputs.json.is_none() {
        let report = cantordiff::experiment::Report {
            record: record.clone(),
            verdicts: verdict,
        };
        out!("{}", report.to_json().trim_end());
    }
    eprintln!(
        "{} replicas in {:.2}s",
        record.replicas.len(),
        record.wall_time_secs
    );
    if record.partial {
        return Err(Error::ResourceLimitExceeded(format!(
            "run stopped after {} replicas: {}",
            record.replicas.len(),
            record.partial_reason.unwrap_or_default()
        )));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let mut limits = Limits::from_env();
    if let Some(b) = cli.search_budget {
        limits.search_budget = b;
    }
    if let Some(s) = cli.max_survivors {
        limits.max_survivors = s;
    }
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let ctx = Context {
        exec,
        limits,
        threads: cli.threads,
    };
    with_threads(cli.threads, || dispatch(cli.command, &ctx))
}

fn dispatch(command: Command, ctx: &Context) -> Result<()> {
    match command {
        Command::Classify {
            laws,
            method,
            n_max,
            margin,
        } => {
            let (mu, lambda) = laws.resolve()?;
            out!(
                "{}",
                classify(&mu, &lambda, method, n_max, margin, ctx)?.to_json()
            );
        }
        Command::Gamma { laws } => {
            let (mu, lambda) = laws.resolve()?;
            let g = gamma_cyclic(&mu, &lambda)?;
            print_json(&json!({
                "gamma": g.values.iter().map(format_rational).collect::<Vec<_>>(),
                "gamma_min": format_rational(&g.gamma_min),
            }))?;
        }
        Command::Matrix { laws, word } => {
            let (mu, lambda) = laws.resolve()?;
            let word = Word::parse(&word)?;
            let mat = if word.len() == 1 {
                expectation_matrix(&mu, &lambda, word.letters()[0])?
            } else {
                word_matrix(&mu, &lambda, &word)?
            };
            let cell = |r: &cantordiff::Rational| format_rational(r);
            let e = mat.entries();
            print_json(&json!({
                "word": word.to_string(),
                "rows": ["L", "R"],
                "entries": [[cell(&e[0][0]), cell(&e[0][1])], [cell(&e[1][0]), cell(&e[1][1])]],
                "column_sums": mat.column_sums().iter().map(cell).collect::<Vec<_>>(),
            }))?;
        }
        Command::Dgc {
            laws,
            json,
            bound_level,
        } => {
            let (mu, lambda) = laws.resolve()?;
            let report = establish_dgc(&mu, &lambda, &ctx.search())?;
            print_dgc(&report)?;
            if let Some(n) = bound_level {
                if report.overall {
                    let b = growth_probability_bound(&report, &mu, &lambda, n)?;
                    match b.exact {
                        Some(r) => out!("growth bound at level {n}: {}", format_rational(&r)),
                        None => out!("growth bound at level {n}: exp({:.6})", b.ln_value),
                    }
                }
            }
            if let Some(p) = json {
                std::fs::write(p, report.to_json())?;
            }
        }
        Command::Spectral {
            laws,
            n_max,
            norm,
            no_prune,
        } => {
            let (mu, lambda) = laws.resolve()?;
            let opts = SpectralOptions {
                norm,
                prune: !no_prune,
                exec: ctx.exec,
                limits: ctx.limits,
            };
            let est = lower_spectral_radius(&mu, &lambda, n_max, &opts)?;
            print_json(&serde_json::to_value(&est).expect("estimates serialize"))?;
        }
        Command::Simulate {
            laws,
            depth,
            seed,
            stream,
            backend,
        } => {
            let (mu, lambda) = laws.resolve()?;
            let (a, b) = sample_pair(
                &SubsetSampler::new(&mu, &ctx.limits)?,
                &SubsetSampler::new(&lambda, &ctx.limits)?,
                depth,
                seed,
                stream,
                &ctx.limits,
            )?;
            let mut levels = Vec::new();
            for n in 0..=depth {
                let occ = occupancy_profile(&diagonal_counts_with(&a, &b, n, backend)?);
                levels.push(json!({
                    "depth": n,
                    "survivors_first": a.levels[n].len(),
                    "survivors_second": b.levels[n].len(),
                    "occupied_columns": occ.occupied_columns,
                    "columns": occ.column_count(),
                    "longest_run": occ.longest_run,
                    "full": occ.full,
                }));
            }
            let crit = critical_processes(&a, &b, depth)?;
            print_json(
                &json!({ "seed": seed, "stream": stream, "levels": levels, "critical": crit }),
            )?;
        }
        Command::Mc(args) => run_mc(&args, ctx)?,
        Command::Expand { dist, order } => {
            let d = parse_distribution_spec(&dist, None)?;
            let lit = DistributionLiteral::from_distribution(
                &d.expand_order(order, &ctx.limits)?,
                &ctx.limits,
            )?;
            out!("{}", lit.to_json());
        }
        Command::Render {
            laws,
            level,
            seed,
            stream,
            format,
            view,
            out,
        } => {
            let (mu, lambda) = laws.resolve()?;
            let (a, b) = sample_pair(
                &SubsetSampler::new(&mu, &ctx.limits)?,
                &SubsetSampler::new(&lambda, &ctx.limits)?,
                level,
                seed,
                stream,
                &ctx.limits,
            )?;
            std::fs::write(out, render(&a, &b, level, format, view, &ctx.limits)?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
