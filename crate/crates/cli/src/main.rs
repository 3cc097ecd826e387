use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use quscore::io::{
    curve_file_name, discover_cohort, load_case, read_results, write_curve, write_ranking,
    write_results, ConfigFile, Naming, ResultFormat, ResultRow,
};
use quscore::parallel::{map_slice, with_threads};
use quscore::ranking::{
    rank_submissions, PermutationMode, ScoreMatrix, DEFAULT_ALPHA, DEFAULT_PERMUTATIONS,
};
use quscore::synth::{write_cohort, GeneratorKind, PhantomParams};
use quscore::{Entity, ErrorClass, GridShape, ScoreVariant, ThresholdGrid};

const EXIT_INGESTION: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
const EXIT_CONSISTENCY: u8 = 4;

/// Scores voxel-wise segmentation uncertainty and ranks competing submissions.
#[derive(Debug, Parser)]
#[command(name = "quscore", version)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// TOML file with defaults for grid, variant, perms, alpha, seed, jobs and naming.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score one submission against the ground truth.
    Evaluate(EvaluateArgs),
    /// Rank teams from their result tables.
    Rank(RankArgs),
    /// Write a synthetic cohort with one submission per uncertainty generator.
    Synth(SynthArgs),
    /// Write per-case filtering curves, including precision and recall.
    Curves(CohortArgs),
}

#[derive(Debug, Args)]
struct CohortArgs {
    /// Ground-truth directory.
    #[arg(long)]
    gt: PathBuf,
    /// Submission directory with predictions and uncertainty maps.
    #[arg(long)]
    pred: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Thresholds as start:stop:step or a comma-separated list.
    #[arg(long)]
    grid: Option<String>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[command(flatten)]
    cohort: CohortArgs,
    /// full, dsc, dsc-ftp or dsc-ftn.
    #[arg(long)]
    variant: Option<String>,
    /// Team name written to the result rows (default: submission directory name).
    #[arg(long)]
    team: Option<String>,
}

#[derive(Debug, Args)]
struct RankArgs {
    /// Result tables (CSV or JSON) from `evaluate`, one or more teams each.
    #[arg(required = true)]
    results: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Monte Carlo permutations per team pair.
    #[arg(long)]
    perms: Option<u64>,
    /// Significance level for grouping.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, env = "QUSCORE_SEED")]
    seed: Option<u64>,
    /// auto, monte-carlo or exhaustive.
    #[arg(long, default_value = "auto")]
    mode: String,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    /// Volume extent as N or XxYxZ.
    #[arg(long, default_value = "64")]
    shape: String,
    #[arg(long, default_value_t = 8)]
    cases: usize,
    /// Whole-tumor share of the volume.
    #[arg(long, default_value_t = 0.001)]
    fraction: f64,
    /// Probability of flipping a boundary voxel in the prediction.
    #[arg(long, default_value_t = 0.1)]
    error_rate: f64,
    /// Box-blur radius for the probability maps.
    #[arg(long, default_value_t = 1)]
    blur: usize,
    /// Binary samples per entity (needed by sample-variance).
    #[arg(long, default_value_t = 0)]
    samples: usize,
    /// `all` or a comma-separated list of generator names.
    #[arg(long, default_value = "all")]
    kinds: String,
    #[arg(long, env = "QUSCORE_SEED")]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let class = err
        .chain()
        .find_map(|e| e.downcast_ref::<quscore::Error>())
        .map(quscore::Error::class);
    match class {
        Some(ErrorClass::Ingestion) => EXIT_INGESTION,
        Some(ErrorClass::Consistency) => EXIT_CONSISTENCY,
        Some(ErrorClass::Validation) | None => EXIT_VALIDATION,
    }
}

fn run(cli: Cli) -> Result<()> {
    let config = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let jobs = cli.jobs.or(config.jobs).unwrap_or(0);
    let work = || match cli.command {
        Command::Evaluate(args) => evaluate(args, &config),
        Command::Curves(args) => curves(args, &config),
        Command::Rank(args) => rank(args, &config),
        Command::Synth(args) => synth(args, &config),
    };
    if jobs > 0 {
        with_threads(jobs, work)
    } else {
        work()
    }
}

fn grid(flag: &Option<String>, config: &ConfigFile) -> Result<ThresholdGrid> {
    match flag.as_ref().or(config.grid.as_ref()) {
        Some(spec) => Ok(spec.parse()?),
        None => Ok(ThresholdGrid::default()),
    }
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| quscore::Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(())
}

/// Loads and scores every case of a cohort in parallel, keeping case order.
fn score_cohort(
    args: &CohortArgs,
    naming: &Naming,
    grid: &ThresholdGrid,
    variant: ScoreVariant,
    with_pr: bool,
) -> Result<Vec<(quscore::CaseResult, [quscore::EntityCurve; 3])>> {
    let layout = discover_cohort(&args.gt, &args.pred, naming)?;
    if layout.cases.is_empty() {
        return Err(quscore::Error::EmptyCohort(args.pred.clone()).into());
    }
    map_slice(&layout.cases, |files| {
        load_case(files)
            .and_then(|case| case.evaluate(grid, variant, with_pr))
            .with_context(|| format!("case {}", files.case_id))
    })
    .into_iter()
    .collect()
}

fn write_curves(
    dir: &Path,
    scored: &[(quscore::CaseResult, [quscore::EntityCurve; 3])],
) -> Result<()> {
    create_dir(dir)?;
    for (result, curves) in scored {
        for (e, curve) in Entity::ALL.into_iter().zip(curves) {
            write_curve(&dir.join(curve_file_name(&result.case_id, e)), curve)?;
        }
    }
    Ok(())
}

fn evaluate(args: EvaluateArgs, config: &ConfigFile) -> Result<()> {
    let grid = grid(&args.cohort.grid, config)?;
    let variant: ScoreVariant = match args.variant.as_ref().or(config.variant.as_ref()) {
        Some(v) => v.parse()?,
        None => ScoreVariant::default(),
    };
    let team = match args.team {
        Some(t) => t,
        None => args
            .cohort
            .pred
            .canonicalize()
            .ok()
            .and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .ok_or_else(|| {
                anyhow!(
                    "cannot derive a team name from {}; pass --team",
                    args.cohort.pred.display()
                )
            })?,
    };
    let scored = score_cohort(&args.cohort, &config.naming, &grid, variant, false)?;
    let out = &args.cohort.out;
    create_dir(out)?;
    let rows: Vec<ResultRow> = scored
        .iter()
        .map(|(r, _)| ResultRow::from_case(&team, r))
        .collect();
    write_results(&out.join("results.csv"), &rows, ResultFormat::Csv)?;
    write_results(&out.join("results.json"), &rows, ResultFormat::Json)?;
    write_curves(&out.join("curves"), &scored)?;
    let mean = rows.iter().map(|r| r.score_overall).sum::<f64>() / rows.len() as f64;
    println!(
        "{team}: {} cases, variant {}, mean overall score {mean:.4}",
        rows.len(),
        variant.name()
    );
    Ok(())
}

fn curves(args: CohortArgs, config: &ConfigFile) -> Result<()> {
    let grid = grid(&args.grid, config)?;
    let scored = score_cohort(&args, &config.naming, &grid, ScoreVariant::Full, true)?;
    write_curves(&args.out, &scored)?;
    println!(
        "wrote {} curves to {}",
        scored.len() * 3,
        args.out.display()
    );
    Ok(())
}

fn rank(args: RankArgs, config: &ConfigFile) -> Result<()> {
    let mut teams: BTreeMap<String, BTreeMap<String, quscore::CaseResult>> = BTreeMap::new();
    for path in &args.results {
        for row in read_results(path)? {
            let cases = teams.entry(row.team.clone()).or_default();
            if cases
                .insert(row.case_id.clone(), row.to_case_result())
                .is_some()
            {
                bail!(
                    "{}: duplicate result for team {:?} case {:?}",
                    path.display(),
                    row.team,
                    row.case_id
                );
            }
        }
    }
    let teams: Vec<(String, Vec<quscore::CaseResult>)> = teams
        .into_iter()
        .map(|(t, cases)| (t, cases.into_values().collect()))
        .collect();
    let matrix = ScoreMatrix::from_results(&teams)?;
    let mode = match args.mode.as_str() {
        "auto" => PermutationMode::Auto,
        "monte-carlo" => PermutationMode::MonteCarlo,
        "exhaustive" => PermutationMode::Exhaustive,
        other => bail!("unknown permutation mode {other:?}"),
    };
    let perms = args.perms.or(config.perms).unwrap_or(DEFAULT_PERMUTATIONS);
    let alpha = args.alpha.or(config.alpha).unwrap_or(DEFAULT_ALPHA);
    if !(alpha > 0.0 && alpha < 1.0) {
        bail!("alpha must lie in (0, 1), got {alpha}");
    }
    let seed = args.seed.or(config.seed).unwrap_or(0);
    let report = rank_submissions(&matrix, mode, perms, seed, alpha)?;
    write_ranking(&args.out, &report)?;
    for e in &report.leaderboard.entries {
        println!(
            "{:>3}  {:<24} FRS {:.4}  p {:.4}",
            e.rank, e.team, e.frs, e.p_vs_anchor
        );
    }
    Ok(())
}

fn parse_shape(spec: &str) -> Result<GridShape> {
    let parts: Vec<usize> = spec
        .split('x')
        .map(|s| s.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| anyhow!("invalid shape {spec:?}; expected N or XxYxZ"))?;
    let shape = match parts[..] {
        [n] => GridShape::cube(n)?,
        [x, y, z] => GridShape::new([x, y, z])?,
        _ => bail!("invalid shape {spec:?}; expected N or XxYxZ"),
    };
    Ok(shape)
}

fn synth(args: SynthArgs, config: &ConfigFile) -> Result<()> {
    let kinds: Vec<GeneratorKind> = if args.kinds == "all" {
        GeneratorKind::ALL.to_vec()
    } else {
        args.kinds
            .split(',')
            .map(|k| k.trim().parse())
            .collect::<quscore::Result<_>>()?
    };
    let seed = args.seed.or(config.seed).unwrap_or(0);
    let mut params = PhantomParams::new(parse_shape(&args.shape)?, seed);
    params.tumor_fraction = args.fraction;
    params.error_rate = args.error_rate;
    params.blur = args.blur;
    params.samples = args.samples;
    let cohort = write_cohort(&args.out, &params, args.cases, &kinds, &config.naming)?;
    println!(
        "wrote {} cases x {} submissions to {}",
        cohort.case_ids.len(),
        cohort.submissions.len(),
        cohort.root.display()
    );
    Ok(())
}
