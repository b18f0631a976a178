//! Seeded Monte Carlo experiments over replica pairs and their reports.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::classify::Verdict;
use crate::distribution::{JointSurvivalDistribution, MarginalVector};
use crate::error::{Error, Result};
use crate::letters::LetterSet;
use crate::limits::Limits;
use crate::literal::DistributionLiteral;
use crate::par::{self, Execution};
use crate::rational::{format_rational, int, one, parse_rational, rat, to_f64, Rational};
use crate::sampling::SubsetSampler;
use crate::simulate::{diagonal_counts_with, occupancy_profile, sample_pair, CountBackend};

/// A distribution given inline as a short spec string or as a literal table.
///
/// Spec strings: `correlated:m,M,p`, `independent:p_0,..,p_{M-1}`,
/// `independent-uniform:M,p`, `deterministic:<bit string>`, `file:<path>`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DistributionSpec {
    Spec(String),
    Literal(DistributionLiteral),
}

impl DistributionSpec {
    pub fn resolve(&self, base_dir: Option<&Path>) -> Result<JointSurvivalDistribution> {
        match self {
            DistributionSpec::Spec(s) => parse_distribution_spec(s, base_dir),
            DistributionSpec::Literal(l) => l.to_distribution(),
        }
    }
}

fn split_list(s: &str) -> Vec<&str> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .collect()
}

fn parse_usize(s: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::Parse(format!("expected a nonnegative integer, got {s:?}")))
}

pub fn parse_distribution_spec(
    spec: &str,
    base_dir: Option<&Path>,
) -> Result<JointSurvivalDistribution> {
    let spec = spec.trim();
    if spec.starts_with('{') {
        return DistributionLiteral::parse(spec)?.to_distribution();
    }
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    match kind {
        "correlated" => match split_list(rest).as_slice() {
            [m, big, p] => JointSurvivalDistribution::make_correlated(
                parse_usize(m)?,
                parse_usize(big)?,
                parse_rational(p)?,
            ),
            _ => Err(Error::Parse(format!(
                "expected correlated:m,M,p, got {spec:?}"
            ))),
        },
        "independent" => {
            let p = split_list(rest)
                .iter()
                .map(|t| parse_rational(t))
                .collect::<Result<Vec<_>>>()?;
            Ok(JointSurvivalDistribution::make_independent(
                MarginalVector::new(p)?,
            ))
        }
        "independent-uniform" => match split_list(rest).as_slice() {
            [big, p] => Ok(JointSurvivalDistribution::make_independent(
                MarginalVector::uniform(parse_usize(big)?, parse_rational(p)?)?,
            )),
            _ => Err(Error::Parse(format!(
                "expected independent-uniform:M,p, got {spec:?}"
            ))),
        },
        "deterministic" => {
            JointSurvivalDistribution::deterministic(LetterSet::from_bit_string(rest)?)
        }
        "file" => {
            let path = PathBuf::from(rest);
            let path = match base_dir {
                Some(b) if path.is_relative() => b.join(path),
                _ => path,
            };
            DistributionLiteral::read(&path)?.to_distribution()
        }
        _ => Err(Error::Parse(format!("unknown distribution spec {spec:?}"))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    /// Directory for pictures of replica 0 at the final depth.
    pub images: Option<PathBuf>,
}

fn default_run_fractions() -> Vec<Rational> {
    vec![rat(1, 3), one()]
}

fn default_margin() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub first: DistributionSpec,
    /// Defaults to the first law.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second: Option<DistributionSpec>,
    pub depth: usize,
    pub replicas: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default)]
    pub outputs: OutputConfig,
    /// Run-length thresholds as fractions of `M^n` columns.
    #[serde(
        default = "default_run_fractions",
        with = "crate::rational::serde_rational_vec"
    )]
    pub run_fractions: Vec<Rational>,
    /// Spectral margin used when verdicts are attached.
    #[serde(default = "default_margin")]
    pub margin: f64,
    #[serde(default)]
    pub backend: CountBackend,
}

impl ExperimentConfig {
    pub fn new(
        first: DistributionSpec,
        second: Option<DistributionSpec>,
        depth: usize,
        replicas: u64,
        seed: u64,
    ) -> Self {
        ExperimentConfig {
            first,
            second,
            depth,
            replicas,
            seed,
            threads: None,
            outputs: OutputConfig::default(),
            run_fractions: default_run_fractions(),
            margin: default_margin(),
            backend: CountBackend::Auto,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::ParameterOutOfRange(m));
        if self.replicas == 0 {
            return bad("replicas must be at least 1".into());
        }
        if self.depth == 0 {
            return bad("depth must be at least 1".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1".into());
        }
        if let Some(f) = self
            .run_fractions
            .iter()
            .find(|f| **f <= Rational::from_integer(0.into()) || **f > one())
        {
            return bad(format!(
                "run fraction {} is outside (0, 1]",
                format_rational(f)
            ));
        }
        if !(0.0..1.0).contains(&self.margin) {
            return bad(format!("margin {} is outside [0, 1)", self.margin));
        }
        Ok(())
    }

    /// Parses JSON when the text starts with `{`, TOML otherwise.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?
        };
        Ok(cfg)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn distributions(
        &self,
        base_dir: Option<&Path>,
    ) -> Result<(JointSurvivalDistribution, JointSurvivalDistribution)> {
        let first = self.first.resolve(base_dir)?;
        let second = match &self.second {
            Some(s) => s.resolve(base_dir)?,
            None => first.clone(),
        };
        if first.alphabet_size() != second.alphabet_size() {
            return Err(Error::AlphabetMismatch {
                left: first.alphabet_size(),
                right: second.alphabet_size(),
            });
        }
        Ok((first, second))
    }
}

/// Per-replica, per-depth statistics; entry `i` of each list is depth `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplicaSummary {
    pub replica: u64,
    pub stream: u64,
    pub survivors_first: Vec<u64>,
    pub survivors_second: Vec<u64>,
    pub occupied_columns: Vec<u64>,
    pub longest_run: Vec<u64>,
    pub full: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fraction {
    pub count: u64,
    pub total: u64,
    pub value: f64,
    /// Binomial standard error `sqrt(v (1 - v) / total)`.
    pub std_error: f64,
}

impl Fraction {
    fn new(count: u64, total: u64) -> Self {
        let value = if total == 0 {
            0.0
        } else {
            count as f64 / total as f64
        };
        let std_error = if total == 0 {
            0.0
        } else {
            (value * (1.0 - value) / total as f64).sqrt()
        };
        Fraction {
            count,
            total,
            value,
            std_error,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunThreshold {
    #[serde(with = "crate::rational::serde_rational")]
    pub fraction: Rational,
    /// `ceil(fraction · M^n)` columns.
    pub min_run: u64,
    pub reached: Fraction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthAggregate {
    pub depth: usize,
    pub columns: u64,
    pub any_occupied: Fraction,
    pub runs: Vec<RunThreshold>,
    pub full: Fraction,
    pub mean_survivors_first: f64,
    pub mean_survivors_second: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub config: ExperimentConfig,
    pub alphabet_size: usize,
    /// How replica `r` is reproduced.
    pub generator: String,
    pub partial: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partial_reason: Option<String>,
    pub replicas: Vec<ReplicaSummary>,
    pub aggregates: Vec<DepthAggregate>,
    /// Excluded from serialized output so reports are byte-stable.
    #[serde(skip)]
    pub wall_time_secs: f64,
}

pub const GENERATOR: &str =
    "ChaCha8 seeded with `seed`, stream = replica index; first set drawn before second";

fn min_run(fraction: &Rational, width: u64) -> u64 {
    (fraction * int(width as i64))
        .ceil()
        .to_integer()
        .to_u64()
        .unwrap_or(u64::MAX)
}

/// Aggregates in replica order; a pure function of the rows.
pub fn aggregate(
    alphabet_size: usize,
    depth: usize,
    run_fractions: &[Rational],
    rows: &[ReplicaSummary],
) -> Vec<DepthAggregate> {
    let total = rows.len() as u64;
    (1..=depth)
        .map(|n| {
            let i = n - 1;
            let width = (alphabet_size as u64).pow(n as u32);
            let count = |pred: &dyn Fn(&ReplicaSummary) -> bool| {
                rows.iter().filter(|r| pred(r)).count() as u64
            };
            let mean = |f: &dyn Fn(&ReplicaSummary) -> u64| {
                if rows.is_empty() {
                    0.0
                } else {
                    rows.iter().map(|r| f(r) as f64).sum::<f64>() / rows.len() as f64
                }
            };
            let runs = run_fractions
                .iter()
                .map(|f| {
                    let need = min_run(f, width);
                    RunThreshold {
                        fraction: f.clone(),
                        min_run: need,
                        reached: Fraction::new(count(&|r| r.longest_run[i] >= need), total),
                    }
                })
                .collect();
            DepthAggregate {
                depth: n,
                columns: 2 * width,
                any_occupied: Fraction::new(count(&|r| r.occupied_columns[i] > 0), total),
                runs,
                full: Fraction::new(count(&|r| r.full[i]), total),
                mean_survivors_first: mean(&|r| r.survivors_first[i]),
                mean_survivors_second: mean(&|r| r.survivors_second[i]),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub exec: Execution,
    pub limits: Limits,
}

fn run_replica(
    first: &SubsetSampler,
    second: &SubsetSampler,
    cfg: &ExperimentConfig,
    r: u64,
    limits: &Limits,
) -> Result<ReplicaSummary> {
    let (a, b) = sample_pair(first, second, cfg.depth, cfg.seed, r, limits)?;
    let mut s = ReplicaSummary {
        replica: r,
        stream: r,
        survivors_first: Vec::with_capacity(cfg.depth),
        survivors_second: Vec::with_capacity(cfg.depth),
        occupied_columns: Vec::with_capacity(cfg.depth),
        longest_run: Vec::with_capacity(cfg.depth),
        full: Vec::with_capacity(cfg.depth),
    };
    for n in 1..=cfg.depth {
        let dc = diagonal_counts_with(&a, &b, n, cfg.backend)?;
        let occ = occupancy_profile(&dc);
        s.survivors_first.push(a.levels[n].len() as u64);
        s.survivors_second.push(b.levels[n].len() as u64);
        s.occupied_columns.push(occ.occupied_columns);
        s.longest_run.push(occ.longest_run);
        s.full.push(occ.full);
    }
    Ok(s)
}

/// Runs every replica. A resource cap hit by some replica ends the run with
/// the replicas before it and `partial` set.
pub fn run_monte_carlo(
    cfg: &ExperimentConfig,
    base_dir: Option<&Path>,
    opts: &RunOptions,
) -> Result<ResultRecord> {
    cfg.validate()?;
    let started = Instant::now();
    let (mu, lambda) = cfg.distributions(base_dir)?;
    let m = mu.alphabet_size();
    (m as u64)
        .checked_pow(cfg.depth as u32)
        .filter(|w| *w <= opts.limits.max_level_width)
        .ok_or_else(|| {
            Error::ResourceLimitExceeded(format!("alphabet {m}^{} is too large", cfg.depth))
        })?;
    for d in [&mu, &lambda] {
        let mean: f64 = d.marginals().values().iter().map(to_f64).sum();
        if mean.powi(cfg.depth as i32) > opts.limits.max_survivors as f64 {
            return Err(Error::ResourceLimitExceeded(format!(
                "expected {:.3e} survivors at depth {}",
                mean.powi(cfg.depth as i32),
                cfg.depth
            )));
        }
    }
    let first = SubsetSampler::new(&mu, &opts.limits)?;
    let second = SubsetSampler::new(&lambda, &opts.limits)?;
    let results = par::with_threads(cfg.threads, || {
        par::map_range(opts.exec, cfg.replicas as usize, |r| {
            run_replica(&first, &second, cfg, r as u64, &opts.limits)
        })
    });
    let mut rows = Vec::with_capacity(results.len());
    let mut partial_reason = None;
    for r in results {
        match r {
            Ok(s) => rows.push(s),
            Err(Error::ResourceLimitExceeded(msg)) => {
                partial_reason = Some(msg);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let aggregates = aggregate(m, cfg.depth, &cfg.run_fractions, &rows);
    Ok(ResultRecord {
        config: cfg.clone(),
        alphabet_size: m,
        generator: GENERATOR.to_string(),
        partial: partial_reason.is_some(),
        partial_reason,
        replicas: rows,
        aggregates,
        wall_time_secs: started.elapsed().as_secs_f64(),
    })
}

/// Everything written to the JSON report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub record: ResultRecord,
    pub verdicts: Vec<Verdict>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Loads a report and checks that its aggregates follow from its rows.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let report: Report =
            serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
        let rec = &report.record;
        for r in &rec.replicas {
            let lens = [
                r.survivors_first.len(),
                r.survivors_second.len(),
                r.occupied_columns.len(),
                r.full.len(),
            ];
            if r.longest_run.len() != rec.config.depth
                || lens.iter().any(|&l| l != rec.config.depth)
            {
                return Err(Error::InvariantViolation(format!(
                    "replica {} has the wrong number of levels",
                    r.replica
                )));
            }
            for i in 0..rec.config.depth {
                let columns = 2 * (rec.alphabet_size as u64).pow(i as u32 + 1);
                let occ = r.occupied_columns[i];
                if r.longest_run[i] > occ || occ > columns || r.full[i] != (occ == columns) {
                    return Err(Error::InvariantViolation(format!(
                        "replica {} is inconsistent at depth {}",
                        r.replica,
                        i + 1
                    )));
                }
            }
        }
        let expected = aggregate(
            rec.alphabet_size,
            rec.config.depth,
            &rec.config.run_fractions,
            &rec.replicas,
        );
        if expected != rec.aggregates {
            return Err(Error::InvariantViolation(
                "report aggregates do not match its replica rows".into(),
            ));
        }
        Ok(report)
    }
}

pub const CSV_HEADER: &str =
    "replica,stream,depth,survivors_first,survivors_second,occupied_columns,longest_run,full";

/// One row per replica and depth, columns as in [`CSV_HEADER`].
pub fn replica_csv(record: &ResultRecord) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &record.replicas {
        for i in 0..r.longest_run.len() {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.replica,
                r.stream,
                i + 1,
                r.survivors_first[i],
                r.survivors_second[i],
                r.occupied_columns[i],
                r.longest_run[i],
                u8::from(r.full[i])
            )
            .unwrap();
        }
    }
    out
}

/// Writes the JSON report and the per-replica CSV where paths are given.
pub fn emit_report(
    record: &ResultRecord,
    verdicts: &[Verdict],
    json: Option<&Path>,
    csv: Option<&Path>,
) -> Result<()> {
    let report = Report {
        record: record.clone(),
        verdicts: verdicts.to_vec(),
    };
    if let Some(p) = json {
        std::fs::write(p, report.to_json())?;
    }
    if let Some(p) = csv {
        std::fs::write(p, replica_csv(record))?;
    }
    Ok(())
}
