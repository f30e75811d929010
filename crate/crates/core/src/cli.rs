//! Command-line front end: `verify`, `build` and `gen`.
//!
//! Exit codes: 0 pass, 1 verification failed, 2 unreadable or invalid input,
//! 3 builder or precondition error. Every build re-verifies its artifact
//! before it is written.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use crate::doubling::{check_hpc_witness, DoublingParams, HpcReading, RGrid};
use crate::error::Error;
use crate::family::{verify_cover_of, verify_cover_witness, CoverWitness, PointSet};
use crate::gen;
use crate::io::{
    read_json, read_value, to_json_string, ChainFile, PointFile, ReportFile, RestrictedInstance, RestrictedScheduleFile, Space,
    SpaceFile, TreeFile, WitnessFile, CHAIN_KIND, DEFAULT_POINT_BUDGET, WITNESS_KIND,
};
use crate::metric::Metric;
use crate::product::{combine_product_covers, BoundedProvider, ExtendedSchedule, Reindex, RestrictedProduct, StoredProvider, TreeProvider, WitnessProvider};
use crate::rational::{parse_rational, Rational};
use crate::report::VerificationReport;
use crate::restricted::restricted_tree_cover;
use crate::sfdc::{asdim_from_cover, asdim_to_sfdc_chain, hpc_to_sfdc_chain, verify_sfdc_chain, AsdimProvider, RestrictingProvider};
use crate::tree::{annulus_points, refine_annuli, Annulus};

pub const THREADS_ENV: &str = "COARSE_COVERS_THREADS";

#[derive(Parser, Debug)]
#[command(name = "coarse-covers", version, about = "Build and verify covers of finite metric spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Verify a cover witness or decomposition chain.
    Verify(VerifyArgs),
    /// Run a builder and write its self-verified artifact.
    Build(BuildArgs),
    /// Generate a random instance.
    Gen(GenArgs),
}

#[derive(clap::Args, Debug, Clone)]
pub struct DoublingArgs {
    /// Ball count N for the doubling check; enables the check on cover witnesses.
    #[arg(long)]
    pub budget_n: Option<usize>,
    /// Scale R of the doubling check.
    #[arg(long, default_value = "1")]
    pub scale: String,
    /// Test every critical radius instead of R, 2R, 4R, ...
    #[arg(long)]
    pub exhaustive_grid: bool,
    /// Largest number of members per union in the uniform check.
    #[arg(long, default_value_t = 2)]
    pub union_budget: usize,
    #[arg(long, value_enum, default_value_t = Reading::Union)]
    pub reading: Reading,
    /// Check only that each member is doubling.
    #[arg(long)]
    pub weak: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reading {
    Union,
    PerFamily,
}

#[derive(clap::Args, Debug)]
pub struct VerifyArgs {
    /// Witness or chain file.
    pub artifact: PathBuf,
    /// Space file; defaults to the space embedded in the artifact.
    #[arg(long)]
    pub space: Option<PathBuf>,
    /// Report path; the report goes to stdout otherwise.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub doubling: DoublingArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuildKind {
    TreeAsdim1,
    ProductCombine,
    RestrictedTreeCover,
    SfdcFromAsdim,
    SfdcFromHpc,
    RefineAnnuli,
}

#[derive(clap::Args, Debug)]
pub struct BuildArgs {
    #[arg(value_enum)]
    pub kind: BuildKind,
    /// Comma-separated radii, or a JSON file (an array, or an object for restricted-tree-cover).
    #[arg(long)]
    pub schedule: String,
    /// Input space (tree for tree-asdim1 and refine-annuli).
    #[arg(long)]
    pub space: Option<PathBuf>,
    /// First factor for product-combine.
    #[arg(long)]
    pub x: Option<PathBuf>,
    /// Second factor for product-combine.
    #[arg(long)]
    pub y: Option<PathBuf>,
    /// Stored witness for the first factor.
    #[arg(long)]
    pub x_witness: Option<PathBuf>,
    /// Stored witness for the second factor.
    #[arg(long)]
    pub y_witness: Option<PathBuf>,
    /// Restricted instance (trees and points) for restricted-tree-cover.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    /// Input cover witness for sfdc-from-asdim and sfdc-from-hpc.
    #[arg(long)]
    pub witness: Option<PathBuf>,
    /// Annulus `a,b` for refine-annuli; repeatable.
    #[arg(long = "annulus")]
    pub annuli: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub doubling: DoublingArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenKind {
    RandomTree,
    RandomPath,
    RandomRestrictedPoints,
}

#[derive(clap::Args, Debug)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub kind: GenKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Vertices, path points, or restricted points.
    #[arg(long)]
    pub size: usize,
    /// Factor trees for random-restricted-points.
    #[arg(long, default_value_t = 3)]
    pub factors: usize,
    /// Vertices per factor tree for random-restricted-points.
    #[arg(long, default_value_t = 5)]
    pub tree_size: usize,
    /// Largest support of a restricted point.
    #[arg(long, default_value_t = 2)]
    pub max_support: usize,
    /// Largest edge weight for random-path.
    #[arg(long, default_value_t = 1)]
    pub max_weight: i64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Error with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

fn input(e: impl std::fmt::Display) -> Failure {
    Failure {
        code: 2,
        message: e.to_string(),
    }
}

fn builder(e: impl std::fmt::Display) -> Failure {
    Failure {
        code: 3,
        message: e.to_string(),
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Outcome of a command: exit code and what to print on stdout.
#[derive(Debug)]
pub struct Outcome {
    pub code: u8,
    pub stdout: String,
    pub summary: String,
}

pub fn main() -> ExitCode {
    configure_threads();
    match Cli::try_parse() {
        Ok(cli) => {
            let code = finish(execute(&cli));
            ExitCode::from(code)
        }
        Err(e) => {
            let _ = e.print();
            ExitCode::from(if e.use_stderr() { 2 } else { 0 })
        }
    }
}

/// Parses `args` (program name first) and runs the command in-process.
pub fn run<I, T>(args: I) -> CliResult<Outcome>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(input)?;
    execute(&cli)
}

fn finish(result: CliResult<Outcome>) -> u8 {
    match result {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            if !outcome.summary.is_empty() {
                eprintln!("{}", outcome.summary);
            }
            outcome.code
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

pub fn execute(cli: &Cli) -> CliResult<Outcome> {
    match &cli.command {
        Command::Verify(args) => cmd_verify(args),
        Command::Build(args) => cmd_build(args),
        Command::Gen(args) => cmd_gen(args),
    }
}

fn emit(out: Option<&Path>, text: String) -> CliResult<String> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| input(format!("{}: {e}", path.display())))?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn load_space_value(value: Value) -> CliResult<(Space, Value)> {
    let file = SpaceFile::from_value(value.clone()).map_err(input)?;
    let space = file.load(DEFAULT_POINT_BUDGET).map_err(input)?;
    Ok((space, value))
}

fn load_space(path: &Path) -> CliResult<(Space, Value)> {
    load_space_value(read_value(path).map_err(input)?)
}

fn require<'a>(path: &'a Option<PathBuf>, flag: &str) -> CliResult<&'a Path> {
    path.as_deref().ok_or_else(|| input(format!("--{flag} is required for this command")))
}

/// `--space`, or else the space embedded in the `--witness` file.
fn space_or_embedded(args: &BuildArgs) -> CliResult<(Space, Value)> {
    if let Some(path) = &args.space {
        return load_space(path);
    }
    let path = require(&args.witness, "space")?;
    match read_value(path).map_err(input)?.get("space").cloned() {
        Some(v) => load_space_value(v),
        None => Err(input("no --space given and the witness embeds no space")),
    }
}

fn doubling_setup(args: &DoublingArgs) -> CliResult<Option<(DoublingParams, RGrid)>> {
    let Some(n) = args.budget_n else { return Ok(None) };
    if n > crate::doubling::DEFAULT_MAX_BALLS {
        return Err(builder(Error::Budget(format!(
            "N = {n} exceeds the exact-search limit of {}",
            crate::doubling::DEFAULT_MAX_BALLS
        ))));
    }
    let scale = parse_rational(&args.scale).map_err(input)?;
    let params = DoublingParams::new(n, scale).map_err(input)?;
    let grid = if args.exhaustive_grid { RGrid::Exhaustive } else { RGrid::Geometric };
    Ok(Some((params, grid)))
}

fn cmd_verify(args: &VerifyArgs) -> CliResult<Outcome> {
    let artifact = read_value(&args.artifact).map_err(input)?;
    let kind = artifact.get("kind").and_then(Value::as_str).unwrap_or_default().to_string();
    let inline = artifact.get("space").cloned();
    let (space, _) = match (&args.space, inline) {
        (Some(path), _) => load_space(path)?,
        (None, Some(v)) => load_space_value(v)?,
        (None, None) => return Err(input("no --space given and the artifact embeds no space")),
    };
    let doubling = doubling_setup(&args.doubling)?;
    let (report, lsd) = match kind.as_str() {
        WITNESS_KIND => {
            let file: WitnessFile = serde_json::from_value(artifact).map_err(input)?;
            let (witness, points) = file.to_witness(&space).map_err(input)?;
            let mut report = match &points {
                Some(p) => verify_cover_of(&space, &witness, p),
                None => verify_cover_witness(&space, &witness),
            };
            let mut lsd = None;
            if let Some((params, grid)) = &doubling {
                let target = match &points {
                    Some(p) => crate::metric::MetricSpace::materialize(&space)
                        .and_then(|m| m.subspace(p))
                        .map_err(input)?,
                    None => crate::metric::MetricSpace::materialize(&space).map_err(input)?,
                };
                let local = match &points {
                    Some(p) => reindex_witness(&witness, p),
                    None => witness.clone(),
                };
                let reading = match args.doubling.reading {
                    Reading::Union => HpcReading::UnionFamily,
                    Reading::PerFamily => HpcReading::PerFamily,
                };
                let out = check_hpc_witness(&target, &local, params, args.doubling.union_budget, grid, reading, args.doubling.weak)
                    .map_err(builder)?;
                report.merge(out.report.clone());
                lsd = Some(out);
            }
            (report, lsd)
        }
        CHAIN_KIND => {
            let file: ChainFile = serde_json::from_value(artifact).map_err(input)?;
            let chain = file.to_chain(&space).map_err(input)?;
            (verify_sfdc_chain(&space, &chain), None)
        }
        other => return Err(input(format!("unknown artifact kind `{other}`"))),
    };
    let mut file = ReportFile::new(&kind, &report);
    file.unions = lsd.as_ref().map(|l| l.unions.as_slice());
    let text = to_json_string(&file).map_err(input)?;
    let stdout = emit(args.out.as_deref(), text)?;
    Ok(Outcome {
        code: if report.passed() { 0 } else { 1 },
        stdout,
        summary: format!("{kind}: {} ({} violations)", if report.passed() { "pass" } else { "fail" }, report.violations().len()),
    })
}

/// The witness restricted to `points`, with indices renumbered to positions in `points`.
fn reindex_witness(witness: &CoverWitness, points: &[usize]) -> CoverWitness {
    let position: std::collections::HashMap<usize, usize> = points.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let mut out = witness.restrict_to(points);
    for family in &mut out.families {
        let sets = family
            .sets()
            .iter()
            .map(|s| s.iter().map(|p| position[p]).collect())
            .collect();
        *family = crate::family::SubsetFamily::dropping_empty(sets, family.separation, family.mesh_bound);
    }
    out
}

enum ScheduleArg {
    Radii(Vec<Rational>),
    Restricted(RestrictedScheduleFile),
}

fn parse_schedule(text: &str) -> CliResult<ScheduleArg> {
    let path = Path::new(text);
    if path.is_file() {
        let value = read_value(path).map_err(input)?;
        if value.is_object() {
            return serde_json::from_value(value).map(ScheduleArg::Restricted).map_err(input);
        }
        #[derive(serde::Deserialize)]
        struct Radii(#[serde(with = "crate::rational::vec")] Vec<Rational>);
        return serde_json::from_value::<Radii>(value).map(|r| ScheduleArg::Radii(r.0)).map_err(input);
    }
    text.split(',')
        .map(parse_rational)
        .collect::<crate::Result<Vec<_>>>()
        .map(ScheduleArg::Radii)
        .map_err(input)
}

fn radii(text: &str) -> CliResult<Vec<Rational>> {
    match parse_schedule(text)? {
        ScheduleArg::Radii(r) if !r.is_empty() => Ok(r),
        ScheduleArg::Radii(_) => Err(input("empty schedule")),
        ScheduleArg::Restricted(_) => Err(input("expected a list of radii")),
    }
}

fn provider<'a>(space: &'a Space, stored: &Option<PathBuf>) -> CliResult<Box<dyn WitnessProvider + 'a>> {
    Ok(match (stored, space.as_tree()) {
        (Some(path), _) => Box::new(StoredProvider(load_witness(path, space)?)),
        (None, Some(tree)) => Box::new(TreeProvider(tree)),
        (None, None) => Box::new(BoundedProvider(space)),
    })
}

fn load_witness(path: &Path, space: &Space) -> CliResult<CoverWitness> {
    let file: WitnessFile = read_json(path).map_err(input)?;
    Ok(file.to_witness(space).map_err(input)?.0)
}

enum Artifact {
    Witness {
        witness: CoverWitness,
        points: Option<PointSet>,
    },
    Chain(crate::sfdc::DecompositionChain),
}

fn cmd_build(args: &BuildArgs) -> CliResult<Outcome> {
    let (space, space_value, artifact) = match args.kind {
        BuildKind::TreeAsdim1 => {
            let (space, value) = load_space(require(&args.space, "space")?)?;
            let tree = space.as_tree().ok_or_else(|| input("tree-asdim1 needs a tree file"))?;
            let r = radii(&args.schedule)?;
            let witness = TreeProvider(tree)
                .witness(&ExtendedSchedule::new(r).map_err(builder)?)
                .map_err(builder)?;
            (space, value, Artifact::Witness { witness, points: None })
        }
        BuildKind::RefineAnnuli => {
            let (space, value) = load_space(require(&args.space, "space")?)?;
            let tree = space.as_tree().ok_or_else(|| input("refine-annuli needs a tree file"))?;
            let r = radii(&args.schedule)?;
            let annuli = args
                .annuli
                .iter()
                .map(|a| {
                    let (lo, hi) = a.split_once(',').ok_or_else(|| input(format!("annulus `{a}` is not `a,b`")))?;
                    let lo = parse_rational(lo).map_err(input)?;
                    let hi = parse_rational(hi).map_err(input)?;
                    Annulus::new(lo, hi).map_err(input)
                })
                .collect::<CliResult<Vec<_>>>()?;
            if annuli.is_empty() {
                return Err(input("at least one --annulus is required"));
            }
            let family = refine_annuli(tree, &annuli, r[0]).map_err(builder)?;
            let points = crate::family::union_of(annuli.iter().map(|a| annulus_points(tree, a)).collect::<Vec<_>>().iter());
            let witness = CoverWitness::new(vec![family]);
            (space, value, Artifact::Witness { witness, points: Some(points) })
        }
        BuildKind::ProductCombine => {
            let (x, xv) = load_space(require(&args.x, "x")?)?;
            let (y, yv) = load_space(require(&args.y, "y")?)?;
            let schedule = ExtendedSchedule::new(radii(&args.schedule)?).map_err(builder)?;
            let (px, py) = (provider(&x, &args.x_witness)?, provider(&y, &args.y_witness)?);
            let combined = combine_product_covers(&x, &y, &schedule, &Reindex::Cantor, px.as_ref(), py.as_ref()).map_err(builder)?;
            let value = serde_json::json!({ "sup_product": [xv, yv] });
            let (space, value) = load_space_value(value)?;
            (space, value, Artifact::Witness { witness: combined.witness, points: None })
        }
        BuildKind::RestrictedTreeCover => {
            let instance: RestrictedInstance = read_json(require(&args.instance, "instance")?).map_err(input)?;
            let schedule = match parse_schedule(&args.schedule)? {
                ScheduleArg::Restricted(s) => s.to_schedule().map_err(builder)?,
                ScheduleArg::Radii(_) => return Err(input("restricted-tree-cover needs a schedule object {R, k, m, psi, phi}")),
            };
            let (trees, points) = instance.load().map_err(input)?;
            let cover = restricted_tree_cover(&trees, &schedule, &points).map_err(builder)?;
            let value = serde_json::json!({ "restricted": instance });
            let (space, value) = load_space_value(value)?;
            (space, value, Artifact::Witness { witness: cover.witness, points: None })
        }
        BuildKind::SfdcFromAsdim => {
            let (space, value) = space_or_embedded(args)?;
            let r = radii(&args.schedule)?;
            let all: PointSet = (0..space.len()).collect();
            let members = vec![all];
            let asdim = match (&args.witness, space.as_tree()) {
                (Some(path), _) => {
                    let cover = load_witness(path, &space)?;
                    let d = cover
                        .mesh_bound()
                        .value()
                        .ok_or_else(|| builder("the asdim witness must claim a finite mesh"))?;
                    asdim_from_cover(&cover, d).map_err(builder)?
                }
                (None, Some(tree)) => RestrictingProvider::tree(tree)
                    .provide(&space, &members, *r.last().expect("nonempty"))
                    .map_err(builder)?,
                (None, None) => crate::sfdc::BoundedMembers
                    .provide(&space, &members, *r.last().expect("nonempty"))
                    .map_err(builder)?,
            };
            let chain = asdim_to_sfdc_chain(&space, &members, &asdim, &r).map_err(builder)?;
            (space, value, Artifact::Chain(chain))
        }
        BuildKind::SfdcFromHpc => {
            let (space, value) = space_or_embedded(args)?;
            let witness = load_witness(require(&args.witness, "witness")?, &space)?;
            let extension = radii(&args.schedule)?;
            let doubling = doubling_setup(&args.doubling)?;
            let chain = {
                let tree_provider = space.as_tree().map(RestrictingProvider::tree);
                let provider = tree_provider.as_ref().map(|p| p as &dyn AsdimProvider);
                hpc_to_sfdc_chain(&space, &witness, doubling.as_ref().map(|(p, g)| (p, g)), &extension, provider).map_err(builder)?
            };
            (space, value, Artifact::Chain(chain))
        }
    };

    let (report, text) = match &artifact {
        Artifact::Witness { witness, points } => {
            let report = match points {
                Some(p) => verify_cover_of(&space, witness, p),
                None => verify_cover_witness(&space, witness),
            };
            let file = WitnessFile::from_witness(&space, witness, points.as_deref(), Some(space_value));
            (report, to_json_string(&file).map_err(builder)?)
        }
        Artifact::Chain(chain) => {
            let file = ChainFile::from_chain(&space, chain, Some(space_value));
            (verify_sfdc_chain(&space, chain), to_json_string(&file).map_err(builder)?)
        }
    };
    if !report.passed() {
        return Err(builder(format!(
            "built artifact failed self-verification: {}",
            describe(&report)
        )));
    }
    let stdout = emit(args.out.as_deref(), text)?;
    Ok(Outcome {
        code: 0,
        stdout,
        summary: format!("built and verified ({} points)", space.len()),
    })
}

fn describe(report: &VerificationReport) -> String {
    report
        .violations()
        .iter()
        .take(3)
        .map(|v| format!("{:?}: {}", v.kind, v.detail))
        .collect::<Vec<_>>()
        .join("; ")
}

fn cmd_gen(args: &GenArgs) -> CliResult<Outcome> {
    let text = match args.kind {
        GenKind::RandomTree => {
            let tree = gen::random_tree(args.seed, args.size).map_err(builder)?;
            to_json_string(&TreeFile::from_tree(&tree))
        }
        GenKind::RandomPath => {
            let path = gen::random_path(args.seed, args.size, args.max_weight).map_err(builder)?;
            let labels = path.labels().to_vec();
            let edges: Vec<Value> = labels
                .windows(2)
                .enumerate()
                .map(|(i, w)| serde_json::json!([w[0], w[1], crate::io::Q(path.dist(i, i + 1))]))
                .collect();
            to_json_string(&serde_json::json!({ "labels": labels, "edges": edges }))
        }
        GenKind::RandomRestrictedPoints => {
            let (trees, points) =
                gen::random_restricted_points(args.seed, args.factors, args.tree_size, args.size, args.max_support).map_err(builder)?;
            let product = RestrictedProduct::of_trees(&trees);
            let instance = RestrictedInstance {
                trees: trees.iter().map(TreeFile::from_tree).collect(),
                points: points.iter().map(|p| PointFile::from_point(&product, p)).collect(),
            };
            to_json_string(&instance)
        }
    }
    .map_err(builder)?;
    let stdout = emit(args.out.as_deref(), text)?;
    Ok(Outcome {
        code: 0,
        stdout,
        summary: String::new(),
    })
}

