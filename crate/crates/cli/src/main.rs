//! `credtree` command-line front end.
//!
//! Exit codes: 0 success, 2 I/O failure, 3 malformed data or schema
//! mismatch, 4 invalid usage.

mod render;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use credtree::dataset::{german_credit_schema, parse_arff, parse_csv, Dataset, Schema};
use credtree::evaluation::{self, ClassifierSpec, Model, TestMode};
use credtree::ladtree::DEFAULT_ITERATIONS;
use credtree::reptree::GrowParams;
use credtree::Error;

#[derive(Parser)]
#[command(
    name = "credtree",
    version,
    about = "REP Tree and LAD Tree classifiers for tabular credit data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model on a dataset and save it
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        classifier: ClassifierArgs,
        /// Where to write the model
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a classifier on the training set or by cross-validation
    Evaluate {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        classifier: ClassifierArgs,
        #[arg(long, value_enum, default_value_t = Mode::Cv)]
        mode: Mode,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Evaluate both classifiers under several test modes and rank them
    Compare {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        classifier: ClassifierArgs,
        /// Comma-separated modes: `training` or a fold count
        #[arg(long, value_delimiter = ',', default_value = "training,5,10,15,20")]
        modes: Vec<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Predict class probabilities with a saved model
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
struct DataArgs {
    /// ARFF file, or CSV laid out as the German credit attributes then the class
    #[arg(long)]
    data: PathBuf,
}

#[derive(Args)]
struct ClassifierArgs {
    #[arg(long, value_enum, default_value_t = Kind::Reptree)]
    classifier: Kind,
    /// Boosting iterations (ladtree)
    #[arg(long, default_value_t = DEFAULT_ITERATIONS)]
    iterations: usize,
    /// Minimum total weight per leaf (reptree)
    #[arg(long, default_value_t = 2.0)]
    min_leaf: f64,
    /// Folds used to carve out the pruning set (reptree)
    #[arg(long, default_value_t = 3)]
    prune_folds: usize,
    /// Grow without reduced-error pruning (reptree)
    #[arg(long)]
    no_prune: bool,
    /// Maximum tree depth (reptree)
    #[arg(long)]
    max_depth: Option<usize>,
    /// Seed for the grow/prune split (reptree); defaults to --seed
    #[arg(long)]
    prune_seed: Option<u64>,
    /// Run seed: cross-validation folds and the reptree grow/prune split
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write output to this file instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Reptree,
    Ladtree,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Training,
    Cv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub(crate) enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug)]
enum CliError {
    Io { path: PathBuf, source: std::io::Error },
    Data(String),
    Usage(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 2,
            CliError::Data(_) => 3,
            CliError::Usage(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Usage(m) => write!(f, "usage error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(m) => CliError::Usage(m),
            other => CliError::Data(other.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(4)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("credtree: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Train { data, classifier, out } => {
            let spec = classifier.spec()?;
            let dataset = load_dataset(&data.data, None)?;
            let (model, secs) = evaluation::train_timed(&spec, &dataset)?;
            write_file(&out, &model.to_text())?;
            println!("built {spec} in {secs:.2} s; model written to {}", out.display());
            Ok(())
        }
        Command::Evaluate {
            data,
            classifier,
            mode,
            folds,
            output,
        } => {
            let spec = classifier.spec()?;
            let mode = match mode {
                Mode::Training => TestMode::TrainingSet,
                Mode::Cv => TestMode::CrossValidation {
                    k: folds,
                    seed: classifier.seed,
                },
            };
            mode.validate()?;
            let dataset = load_dataset(&data.data, None)?;
            let summary = evaluation::evaluate(&spec, &dataset, mode)?;
            let header = render::RunHeader {
                data: &data.data,
                seed: classifier.seed,
            };
            emit(
                &output,
                &render::evaluation(output.format, &header, &spec, mode, &summary),
            )
        }
        Command::Compare {
            data,
            classifier,
            modes,
            output,
        } => {
            let modes = parse_modes(&modes, classifier.seed)?;
            let specs = [classifier.spec_of(Kind::Reptree)?, classifier.spec_of(Kind::Ladtree)?];
            let dataset = load_dataset(&data.data, None)?;
            let comparison = evaluation::compare(&specs, &dataset, &modes)?;
            let header = render::RunHeader {
                data: &data.data,
                seed: classifier.seed,
            };
            match (output.format, &output.out) {
                (Format::Csv, Some(path)) => {
                    for report in &comparison.reports {
                        let path = per_classifier_path(path, report.classifier.name());
                        write_file(&path, &render::comparison_csv_block(&comparison, report))?;
                    }
                    println!("{}", render::ranking_line(&comparison));
                    Ok(())
                }
                _ => emit(&output, &render::comparison(output.format, &header, &comparison)),
            }
        }
        Command::Predict { model, data, output } => {
            let text = read_file(&model)?;
            let model = Model::from_text(&text).map_err(|e| CliError::Data(format!("{}: {e}", display(&model))))?;
            let dataset = load_dataset(&data.data, Some(model.schema()))?;
            if let Some(attr) = model.schema().first_incompatibility(dataset.schema()) {
                return Err(CliError::Data(format!(
                    "{} does not match the model schema at attribute '{attr}'",
                    display(&data.data)
                )));
            }
            emit(&output, &render::predictions(output.format, &model, &dataset))
        }
    }
}

impl ClassifierArgs {
    fn spec(&self) -> CliResult<ClassifierSpec> {
        self.spec_of(self.classifier)
    }

    fn spec_of(&self, kind: Kind) -> CliResult<ClassifierSpec> {
        let spec = match kind {
            Kind::Reptree => ClassifierSpec::RepTree(GrowParams {
                min_instances_per_leaf: self.min_leaf,
                max_depth: self.max_depth,
                prune_folds: self.prune_folds,
                do_prune: !self.no_prune,
                seed: self.prune_seed.unwrap_or(self.seed),
            }),
            Kind::Ladtree => ClassifierSpec::LadTree {
                iterations: self.iterations,
                seed: self.seed,
            },
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn parse_modes(raw: &[String], seed: u64) -> CliResult<Vec<TestMode>> {
    let modes = raw
        .iter()
        .map(|m| {
            let m = m.trim();
            if m.eq_ignore_ascii_case("training") {
                Ok(TestMode::TrainingSet)
            } else {
                let k = m
                    .parse::<usize>()
                    .map_err(|_| CliError::Usage(format!("unknown mode '{m}'")))?;
                let mode = TestMode::CrossValidation { k, seed };
                mode.validate()?;
                Ok(mode)
            }
        })
        .collect::<CliResult<Vec<_>>>()?;
    if modes.is_empty() {
        return Err(CliError::Usage("no modes given".into()));
    }
    Ok(modes)
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn emit(output: &OutputArgs, contents: &str) -> CliResult<()> {
    match &output.out {
        Some(path) => write_file(path, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

/// `results.csv` becomes `results-reptree.csv`.
fn per_classifier_path(path: &Path, name: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let file = match path.extension() {
        Some(ext) => format!("{stem}-{name}.{}", ext.to_string_lossy()),
        None => format!("{stem}-{name}"),
    };
    path.with_file_name(file)
}

/// Loads ARFF, or CSV against `schema` (the German credit layout when none
/// is given). A CSV header row is recognised by its first field naming the
/// first attribute.
fn load_dataset(path: &Path, schema: Option<&Schema>) -> CliResult<Dataset> {
    let text = read_file(path)?;
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let parsed = if is_csv {
        let german;
        let schema = match schema {
            Some(s) => s,
            None => {
                german = german_credit_schema();
                &german
            }
        };
        let first_field = text
            .lines()
            .next()
            .and_then(|l| l.split(',').next())
            .map(|f| f.trim().trim_matches('"'))
            .unwrap_or("");
        let has_header = first_field.eq_ignore_ascii_case(&schema.attribute(0).name);
        parse_csv(&text, schema, has_header)
    } else {
        parse_arff(&text)
    };
    parsed.map_err(|e| CliError::Data(format!("{}: {e}", display(path))))
}
