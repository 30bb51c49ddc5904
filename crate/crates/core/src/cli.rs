//! Command-line front end.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::cluster::{average_dcorr, dcc_trace};
use crate::config::{RunConfig, Structure};
use crate::dataset::{AttributeKind, Dataset, Schema};
use crate::dcorr::DCorrMatrix;
use crate::error::Error;
use crate::eval::{crossval, ksweep, ksweep_csv};
use crate::lah::Hierarchy;
use crate::model::{build_hierarchy, fit_partitions, Model};

#[derive(Parser, Debug)]
#[command(name = "solah", version, about = "Self-organised linguistic attribute hierarchies")]
pub struct Cli {
    /// Log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Summarise a dataset and its fuzzy partitions.
    Inspect(DataArgs),
    /// Attribute-attribute and attribute-goal distance correlations as CSV.
    Dcorr(DataArgs),
    /// Distance-correlation clusters, sorted by mean goal correlation.
    Cluster(DataArgs),
    /// Self-organise a hierarchy and write it as text.
    Build(DataArgs),
    /// Fit a model on the whole dataset and save it as JSON.
    Train(TrainArgs),
    /// Stratified k-fold cross-validation report.
    Crossval(DataArgs),
    /// Cross-validate over a range of preset cluster counts.
    Ksweep(KsweepArgs),
    /// Classify rows with a saved model.
    Predict(PredictArgs),
    /// Rule document of a saved model.
    ExportRules(ModelArgs),
    /// Out-of-fold ROC curve as two-column CSV.
    Roc(RocArgs),
}

#[derive(Args, Debug, Clone)]
struct DataArgs {
    /// CSV dataset; the goal is the last column unless --goal-column is set.
    data: PathBuf,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args, Debug, Clone, Default)]
struct RunArgs {
    /// Plain-text `key = value` config merged under the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Labels per continuous attribute.
    #[arg(long)]
    labels: Option<usize>,
    /// Preset cluster count.
    #[arg(long)]
    k: Option<usize>,
    /// Same-level threshold.
    #[arg(long)]
    theta: Option<f64>,
    /// LID3 purity threshold in (0, 1].
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Train one flat LDT instead of a hierarchy.
    #[arg(long)]
    flat: bool,
    /// Goal encoding for distance correlation: class-code or one-hot.
    #[arg(long)]
    encoding: Option<String>,
    /// Prediction of unsupported branches: parent or uniform.
    #[arg(long)]
    empty_branch: Option<String>,
    /// Intermediate attribute form: mass-vector or refuzzified.
    #[arg(long)]
    intermediate: Option<String>,
    /// Fold worker threads (0 = all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Zero-based CSV column of the goal.
    #[arg(long)]
    goal_column: Option<usize>,
    /// Treat the listed attribute indices as discrete (comma separated).
    #[arg(long, value_delimiter = ',')]
    discrete: Vec<usize>,
    /// Treat the listed attribute indices as continuous (comma separated).
    #[arg(long, value_delimiter = ',')]
    continuous: Vec<usize>,
    /// Output file; stdout when absent.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Train this hierarchy file instead of self-organising one.
    #[arg(long)]
    hierarchy: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct KsweepArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Inclusive range `lo..hi`.
    #[arg(long, default_value = "2..10")]
    range: String,
}

#[derive(Args, Debug)]
struct ModelArgs {
    model: PathBuf,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PredictArgs {
    model: PathBuf,
    /// CSV of attribute values, one row per line, no goal column.
    rows: PathBuf,
    /// Skip the first line of the rows file.
    #[arg(long)]
    header: bool,
    /// Also print the fired branches of every slot.
    #[arg(long)]
    explain: bool,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RocArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Positive class name; defaults to the second class.
    #[arg(long)]
    positive: Option<String>,
}

/// Usage errors exit with 2, runtime failures with 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Runtime(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Runtime(e) => write!(f, "error: {e}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(e: Error) -> CliError {
    CliError::Usage(e.to_string())
}

fn read_input(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| {
        usage(Error::Io {
            path: path.to_path_buf(),
            source,
        })
    })
}

impl RunArgs {
    fn config(&self, data: &Path) -> CliResult<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.merge_text(&read_input(path)?).map_err(usage)?;
        }
        let set = |cfg: &mut RunConfig, key: &str, v: Option<String>| -> CliResult<()> {
            match v {
                Some(v) => cfg.set(key, &v).map_err(usage),
                None => Ok(()),
            }
        };
        cfg.dataset = Some(data.to_path_buf());
        set(&mut cfg, "labels", self.labels.map(|v| v.to_string()))?;
        set(&mut cfg, "k", self.k.map(|v| v.to_string()))?;
        set(&mut cfg, "theta", self.theta.map(|v| v.to_string()))?;
        set(&mut cfg, "threshold", self.threshold.map(|v| v.to_string()))?;
        set(&mut cfg, "folds", self.folds.map(|v| v.to_string()))?;
        set(&mut cfg, "seed", self.seed.map(|v| v.to_string()))?;
        set(&mut cfg, "encoding", self.encoding.clone())?;
        set(&mut cfg, "empty-branch", self.empty_branch.clone())?;
        set(&mut cfg, "intermediate", self.intermediate.clone())?;
        set(&mut cfg, "jobs", self.jobs.map(|v| v.to_string()))?;
        if self.flat {
            cfg.structure = Structure::Flat;
        }
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        cfg.validate().map_err(usage)?;
        Ok(cfg)
    }

    fn schema(&self) -> Schema {
        let mut schema = Schema {
            goal_column: self.goal_column,
            ..Schema::default()
        };
        for &a in &self.discrete {
            schema.kinds.insert(a, AttributeKind::Discrete);
        }
        for &a in &self.continuous {
            schema.kinds.insert(a, AttributeKind::Continuous);
        }
        schema
    }
}

impl DataArgs {
    fn load(&self) -> CliResult<(Dataset, RunConfig)> {
        let cfg = self.run.config(&self.data)?;
        let text = read_input(&self.data)?;
        let name = self
            .data
            .file_stem()
            .map_or("data".to_string(), |s| s.to_string_lossy().into_owned());
        let d = Dataset::parse_csv(&name, &text, &self.run.schema())?;
        Ok((d, cfg))
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| {
            CliError::Runtime(Error::Io {
                path: path.to_path_buf(),
                source,
            })
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| {
                    CliError::Runtime(Error::Io {
                        path: PathBuf::from("<stdout>"),
                        source,
                    })
                })
        }
    }
}

fn parse_range(s: &str) -> CliResult<std::ops::RangeInclusive<usize>> {
    let bad = || CliError::Usage(format!("bad k range {s:?}, expected lo..hi"));
    let (lo, hi) = s.split_once("..").ok_or_else(bad)?;
    let lo: usize = lo.trim().parse().map_err(|_| bad())?;
    let hi: usize = hi.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
    if lo == 0 || lo > hi {
        return Err(bad());
    }
    Ok(lo..=hi)
}

fn all_rows(d: &Dataset) -> Vec<usize> {
    (0..d.len()).collect()
}

fn inspect(args: &DataArgs) -> CliResult<String> {
    let (d, cfg) = args.load()?;
    let mut out = cfg.header("#");
    let _ = writeln!(out, "dataset: {}", d.name);
    let _ = writeln!(out, "samples: {}", d.len());
    let _ = writeln!(out, "attributes: {}", d.n_attributes());
    let _ = writeln!(out, "missing: {}", d.missing_count());
    let counts = d.class_counts();
    let classes: Vec<String> = d.classes.iter().zip(&counts).map(|(c, n)| format!("{c}={n}")).collect();
    let _ = writeln!(out, "goal: {} [{}]", d.goal_name, classes.join(", "));
    let imputed = d.impute_missing()?;
    for p in fit_partitions(&imputed, &all_rows(&imputed), cfg.labels)? {
        let _ = write!(out, "{p}");
    }
    Ok(out)
}

fn dcorr_cmd(args: &DataArgs) -> CliResult<String> {
    let (d, cfg) = args.load()?;
    let d = d.impute_missing()?;
    let m = DCorrMatrix::compute(&d, &all_rows(&d), cfg.encoding)?;
    let names: Vec<String> = d.attributes.iter().map(|a| a.name.clone()).collect();
    Ok(cfg.header("#") + &m.to_csv(&names))
}

fn cluster_cmd(args: &DataArgs) -> CliResult<String> {
    let (d, cfg) = args.load()?;
    let d = d.impute_missing()?;
    let m = DCorrMatrix::compute(&d, &all_rows(&d), cfg.encoding)?;
    let (set, rounds) = dcc_trace(&m.clustering_input(), cfg.k)?;
    let mut out = cfg.header("#");
    let _ = writeln!(out, "preset k: {}, realised K: {}", set.preset_k, set.len());
    for r in &rounds {
        let _ = writeln!(
            out,
            "# round: seed x{}, max {:.6}, alpha {:.6}, members {:?}",
            r.seed, r.d_max, r.alpha, r.members
        );
    }
    let mut rows: Vec<(f64, &Vec<usize>)> = set
        .clusters
        .iter()
        .map(|c| average_dcorr(c, &m.goal).map(|a| (a, c)))
        .collect::<Result<_, _>>()?;
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (avg, c) in rows {
        let names: Vec<&str> = c.iter().map(|&a| d.attributes[a].name.as_str()).collect();
        let _ = writeln!(out, "{avg:.6}  {{{}}}", names.join(", "));
    }
    Ok(out)
}

fn build_cmd(args: &DataArgs) -> CliResult<String> {
    let (d, cfg) = args.load()?;
    let d = d.impute_missing()?;
    let h = match cfg.structure {
        Structure::Flat => Hierarchy::flat(d.n_attributes()),
        Structure::Solah => build_hierarchy(&d, &all_rows(&d), &cfg)?.0,
    };
    let mut out = cfg.header("#");
    let _ = writeln!(out, "# levels = {}", h.levels());
    out.push_str(&h.to_text());
    Ok(out)
}

fn train_cmd(args: &TrainArgs) -> CliResult<String> {
    let (d, cfg) = args.data.load()?;
    let d = d.impute_missing()?;
    let rows = all_rows(&d);
    let model = match &args.hierarchy {
        Some(path) => {
            let h = Hierarchy::from_text(&read_input(path)?).map_err(usage)?;
            Model::fit_hierarchy(&d, &rows, &cfg, h)?
        }
        None => Model::fit(&d, &rows, &cfg)?,
    };
    let mut json = model.to_json()?;
    json.push('\n');
    Ok(json)
}

fn predict_cmd(args: &PredictArgs) -> CliResult<String> {
    read_input(&args.model)?;
    let model = Model::load(&args.model)?;
    let text = read_input(&args.rows)?;
    let mut out = String::new();
    for (i, line) in text.lines().enumerate().skip(usize::from(args.header)) {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        let values = model.encode_row(&cells).map_err(|e| {
            CliError::Runtime(Error::Parse {
                row: i + 1,
                msg: e.to_string(),
            })
        })?;
        let masses = model.predict_masses(&values)?;
        let class = crate::model::argmax(&masses);
        let masses: Vec<String> = masses.iter().map(|m| format!("{m:.6}")).collect();
        let _ = writeln!(out, "{},{}", model.classes[class], masses.join(","));
        if args.explain {
            for l in model.explain(&values)?.lines() {
                let _ = writeln!(out, "# {l}");
            }
        }
    }
    Ok(out)
}

fn export_rules(args: &ModelArgs) -> CliResult<String> {
    read_input(&args.model)?;
    let model = Model::load(&args.model)?;
    Ok(model.config.header("#") + &model.semantics())
}

fn roc_cmd(args: &RocArgs) -> CliResult<String> {
    let (d, cfg) = args.data.load()?;
    let class = match &args.positive {
        Some(name) => d
            .classes
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| CliError::Usage(format!("unknown class {name:?}")))?,
        None => 1,
    };
    let report = crossval(&d, &cfg)?;
    let roc = report
        .roc(class)
        .ok_or_else(|| CliError::Runtime(Error::invalid("ROC needs both classes present")))?;
    Ok(cfg.header("#") + &roc.to_csv())
}

/// Parses arguments and runs one command; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

fn execute(command: &Command) -> CliResult<()> {
    let (text, out) = match command {
        Command::Inspect(a) => (inspect(a)?, a.run.out.clone()),
        Command::Dcorr(a) => (dcorr_cmd(a)?, a.run.out.clone()),
        Command::Cluster(a) => (cluster_cmd(a)?, a.run.out.clone()),
        Command::Build(a) => (build_cmd(a)?, a.run.out.clone()),
        Command::Train(a) => (train_cmd(a)?, a.data.run.out.clone()),
        Command::Crossval(a) => {
            let (d, cfg) = a.load()?;
            (crossval(&d, &cfg)?.to_text(), a.run.out.clone())
        }
        Command::Ksweep(a) => {
            let (d, cfg) = a.data.load()?;
            let range = parse_range(&a.range)?;
            (ksweep_csv(&ksweep(&d, &cfg, range)?), a.data.run.out.clone())
        }
        Command::Predict(a) => (predict_cmd(a)?, a.out.clone()),
        Command::ExportRules(a) => (export_rules(a)?, a.out.clone()),
        Command::Roc(a) => (roc_cmd(a)?, a.data.run.out.clone()),
    };
    emit(out.as_deref(), &text)
}
