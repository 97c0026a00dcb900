//! Command-line front end. `run` parses arguments, does the work and returns
//! the process exit code; every failure is reported as one JSON line on
//! stderr.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::dataset::{parse_csv, Dataset, Feature, Output, N_FEATURES, N_OUTPUTS};
use crate::error::{Error, Result};
use crate::eval::{compare_models, default_structures, sweep_csv, sweep_nn_structures, ModelSpec, Protocol};
use crate::gbt::feature_importance;
use crate::generator::{
    grid_candidates, sample_gan, table_ranges, train_gan, CandidateSet, GanConfig, GanModel, Source,
};
use crate::inverse::{design, design_csv, DesignOptions, DesignTarget, DEFAULT_TOP_K};
use crate::mlp::MlpConfig;
use crate::model::{fit_model, Family, Fitted, Target, TrainedModel};
use crate::synthetic;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "lasml", version, about = "Surrogate models and inverse design for laser-machined channels")]
pub struct Cli {
    /// Worker threads for parallel work (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Row counts and per-column statistics of a dataset.
    Summary(SummaryArgs),
    /// Fit one surrogate and write it as a model file.
    Train(TrainArgs),
    /// Cross-validated and bootstrapped comparison of the six model families.
    Compare(CompareArgs),
    /// Gain-based feature importance of boosted trees, per output.
    Importance(ImportanceArgs),
    /// Bootstrap comparison of hidden-layer structures.
    SweepNn(SweepArgs),
    /// Write a candidate parameter set (grid or GAN).
    Generate(GenerateArgs),
    /// Rank candidate parameters for a target channel geometry.
    Design(DesignArgs),
    /// Start the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Dataset CSV (default: the bundled synthetic dataset).
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = "LASML_OUT", default_value = "out")]
    pub out: PathBuf,
    /// Seed for every random choice.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SummaryArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Common,
    /// linear | poly2 | poly3 | poly4 | gbt | mlp
    #[arg(long, default_value = "mlp")]
    pub family: String,
    /// Hidden-layer widths for mlp, e.g. 64,32.
    #[arg(long, value_delimiter = ',', default_value = "64,32")]
    pub hidden: Vec<usize>,
    /// Output(s) to model: all | depth | top_width | bottom_width.
    #[arg(long, default_value = "all")]
    pub output: String,
    /// Independently initialised networks averaged for mlp.
    #[arg(long, default_value_t = 1)]
    pub n_init: usize,
    /// Model file to write (default: <out>/model.json).
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Resampling {
    /// Number of cross-validation folds.
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Bootstrap repeats.
    #[arg(long, default_value_t = 100)]
    pub repeats: usize,
    /// Held-out fraction per split.
    #[arg(long, default_value_t = 0.2)]
    pub test_fraction: f64,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub resampling: Resampling,
    /// Output to model: depth | top_width | bottom_width | all.
    #[arg(long, default_value = "depth")]
    pub output: String,
    /// Add wall-clock columns (makes files run-dependent).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct ImportanceArgs {
    #[command(flatten)]
    pub common: Common,
    /// Use the trees of this gbt model file instead of fitting new ones.
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub resampling: Resampling,
    /// Structures to compare, separated by ';', e.g. "64;64,32" (default: ten built-in shapes).
    #[arg(long)]
    pub structures: Option<String>,
    /// Output to model: depth | top_width | bottom_width | all.
    #[arg(long, default_value = "depth")]
    pub output: String,
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct CandidateArgs {
    /// grid | gan
    #[arg(long, default_value = "gan")]
    pub candidates: String,
    /// Number of GAN samples.
    #[arg(long, default_value_t = 5000)]
    pub n: usize,
    /// Grid points per parameter: frequency, amplitude, passes, distance.
    #[arg(long, value_delimiter = ',', default_value = "15,15,16,15")]
    pub grid_counts: Vec<usize>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub candidates: CandidateArgs,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub candidates: CandidateArgs,
    /// Trained model file covering all three outputs.
    #[arg(long)]
    pub model: PathBuf,
    /// Target depth, top width, bottom width in µm.
    #[arg(long, value_delimiter = ',', required = true)]
    pub target: Vec<f64>,
    /// Tolerance in µm, one value or one per output.
    #[arg(long, value_delimiter = ',', default_value = "50")]
    pub tol: Vec<f64>,
    /// Maximum number of ranked candidates.
    #[arg(long, default_value_t = DEFAULT_TOP_K)]
    pub top_k: usize,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    /// Directory for persisted models (default: <out>/models).
    #[arg(long)]
    pub model_dir: Option<PathBuf>,
    /// Built web UI served under / (default: webui/dist).
    #[arg(long, default_value = "webui/dist")]
    pub static_dir: PathBuf,
}

/// Loads `path`, or the bundled dataset when no path is given.
pub fn load_dataset(path: Option<&Path>) -> Result<Dataset> {
    match path {
        None => Ok(synthetic::bundled()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::from(e).context(p.display()))?;
            parse_csv(&text).map_err(|e| e.context(p.display()))
        }
    }
}

pub fn parse_target(name: &str) -> Result<Target> {
    if name == "all" {
        Ok(Target::All)
    } else {
        Ok(Target::Single(Output::from_name(name)?))
    }
}

fn family_from_args(name: &str, hidden: &[usize], n_init: usize, seed: u64) -> Result<Family> {
    let family = Family::parse(name)?.with_seed(seed);
    Ok(match family {
        Family::Mlp { .. } => {
            if n_init == 0 {
                return Err(Error::Config("--n-init must be >= 1".into()));
            }
            Family::Mlp {
                config: MlpConfig {
                    seed,
                    ..MlpConfig::with_hidden(N_FEATURES, hidden, N_OUTPUTS)
                },
                n_init,
            }
        }
        other => other,
    })
}

fn grid_counts(counts: &[usize]) -> Result<[usize; N_FEATURES]> {
    counts
        .try_into()
        .map_err(|_| Error::Config(format!("--grid-counts needs 4 values, got {}", counts.len())))
}

fn tolerances(tol: &[f64]) -> Result<[f64; N_OUTPUTS]> {
    match tol {
        [t] => Ok([*t; N_OUTPUTS]),
        [a, b, c] => Ok([*a, *b, *c]),
        _ => Err(Error::Config(format!("--tol needs 1 or 3 values, got {}", tol.len()))),
    }
}

/// Candidate rows for `generate` and `design`. The GAN is trained on `data`.
pub fn make_candidates(args: &CandidateArgs, data: &Dataset, seed: u64) -> Result<(CandidateSet, Option<GanModel>)> {
    match Source::parse(&args.candidates)? {
        Source::Grid => Ok((grid_candidates(table_ranges(), grid_counts(&args.grid_counts)?)?, None)),
        Source::Gan => {
            let gan = train_gan(data, &GanConfig {
                seed,
                ..GanConfig::default()
            })?;
            Ok((sample_gan(&gan, args.n, seed)?, Some(gan)))
        }
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    write_path(&path, contents)?;
    Ok(path)
}

fn write_path(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::from(e).context(parent.display()))?;
    }
    fs::write(path, contents).map_err(|e| Error::from(e).context(path.display()))
}

fn report(paths: &[PathBuf]) {
    for p in paths {
        println!("{}", p.display());
    }
}

fn summary(args: &SummaryArgs) -> Result<Vec<PathBuf>> {
    let data = load_dataset(args.common.data.as_deref())?;
    let json = serde_json::to_string_pretty(&data.summary())?;
    Ok(vec![write(&args.common.out, "summary.json", &(json + "\n"))?])
}

fn train(args: &TrainArgs) -> Result<Vec<PathBuf>> {
    let c = &args.common;
    let data = load_dataset(c.data.as_deref())?;
    let family = family_from_args(&args.family, &args.hidden, args.n_init, c.seed)?;
    let model = fit_model(&family, parse_target(&args.output)?, &data)?;
    let path = args.model.clone().unwrap_or_else(|| c.out.join("model.json"));
    write_path(&path, &model.to_json()?)?;
    let mut paths = vec![path];
    if let Fitted::Mlp(ensemble) = &model.fitted {
        paths.push(write(&c.out, "loss_history.csv", &ensemble.members[0].loss_history_csv())?);
    }
    Ok(paths)
}

fn protocol(c: &Common, r: &Resampling) -> Protocol {
    Protocol {
        k: r.k,
        repeats: r.repeats,
        test_fraction: r.test_fraction,
        seed: c.seed,
    }
}

fn compare(args: &CompareArgs) -> Result<Vec<PathBuf>> {
    let c = &args.common;
    let data = load_dataset(c.data.as_deref())?;
    let specs = ModelSpec::default_set(parse_target(&args.output)?, c.seed);
    let table = compare_models(&data, &specs, &protocol(c, &args.resampling))?;
    Ok(vec![
        write(&c.out, "comparison.csv", &table.to_csv(args.timings))?,
        write(&c.out, "comparison.json", &(table.to_json(args.timings)? + "\n"))?,
        write(&c.out, "scatter.csv", &table.scatter_csv())?,
    ])
}

/// `output,rank,feature,importance` for every output.
pub fn importance_csv(models: &[(Output, TrainedModel)]) -> Result<String> {
    let mut out = String::from("output,rank,feature,importance\n");
    for (output, model) in models {
        let Fitted::Gbt(trees) = &model.fitted else {
            return Err(Error::State(format!(
                "feature importance needs a gbt model, got {}",
                model.family.name()
            )));
        };
        let j = model
            .targets
            .iter()
            .position(|o| o == output)
            .ok_or_else(|| Error::State(format!("model does not predict {output}")))?;
        for (rank, (feature, share)) in feature_importance(&trees[j]).into_iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                output,
                rank + 1,
                Feature::ALL[feature],
                share
            ));
        }
    }
    Ok(out)
}

fn importance(args: &ImportanceArgs) -> Result<Vec<PathBuf>> {
    let c = &args.common;
    let models: Vec<(Output, TrainedModel)> = match &args.model {
        Some(path) => {
            let m = TrainedModel::load(path).map_err(|e| e.context(path.display()))?;
            m.targets.clone().into_iter().map(|o| (o, m.clone())).collect()
        }
        None => {
            let data = load_dataset(c.data.as_deref())?;
            let family = Family::gbt().with_seed(c.seed);
            Output::ALL
                .into_iter()
                .map(|o| Ok((o, fit_model(&family, Target::Single(o), &data)?)))
                .collect::<Result<_>>()?
        }
    };
    Ok(vec![write(&c.out, "importance.csv", &importance_csv(&models)?)?])
}

fn parse_structures(text: &str) -> Result<Vec<Vec<usize>>> {
    text.split(';')
        .map(|s| {
            s.split(',')
                .map(|w| {
                    w.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::Config(format!("bad layer width '{w}' in --structures")))
                })
                .collect()
        })
        .collect()
}

fn sweep(args: &SweepArgs) -> Result<Vec<PathBuf>> {
    let c = &args.common;
    let data = load_dataset(c.data.as_deref())?;
    let structures = match &args.structures {
        Some(s) => parse_structures(s)?,
        None => default_structures(),
    };
    let base = MlpConfig {
        seed: c.seed,
        ..MlpConfig::default()
    };
    let rows = sweep_nn_structures(
        &data,
        &structures,
        parse_target(&args.output)?,
        args.resampling.repeats,
        args.resampling.test_fraction,
        &base,
    )?;
    Ok(vec![write(&c.out, "sweep_nn.csv", &sweep_csv(&rows, args.timings))?])
}

fn generate(args: &GenerateArgs) -> Result<Vec<PathBuf>> {
    let c = &args.common;
    let data = load_dataset(c.data.as_deref())?;
    let (set, gan) = make_candidates(&args.candidates, &data, c.seed)?;
    let mut paths = vec![write(&c.out, "candidates.csv", &set.to_csv())?];
    if let Some(gan) = gan {
        paths.push(write(&c.out, "gan.json", &serde_json::to_string_pretty(&gan.to_file()?)?)?);
    }
    Ok(paths)
}

fn design_cmd(args: &DesignArgs) -> Result<Vec<PathBuf>> {
    let c = &args.common;
    let model = TrainedModel::load(&args.model).map_err(|e| e.context(args.model.display()))?;
    let [d, t, b]: [f64; 3] = args
        .target
        .as_slice()
        .try_into()
        .map_err(|_| Error::Config(format!("--target needs 3 values, got {}", args.target.len())))?;
    let target = DesignTarget::new(d, t, b, tolerances(&args.tol)?)?;
    let data = load_dataset(c.data.as_deref())?;
    let (set, _) = make_candidates(&args.candidates, &data, c.seed)?;
    let options = DesignOptions {
        top_k: args.top_k,
        ..DesignOptions::default()
    };
    let ranked = design(&model, &set, &target, &options)?;
    Ok(vec![write(&c.out, "design.csv", &design_csv(&ranked))?])
}

fn serve(args: &ServeArgs, threads: Option<usize>) -> Result<Vec<PathBuf>> {
    let c = &args.common;
    let config = crate::service::ServiceConfig {
        port: args.port,
        data_path: c.data.clone(),
        model_dir: args.model_dir.clone().unwrap_or_else(|| c.out.join("models")),
        static_dir: args.static_dir.clone(),
        workers: threads.unwrap_or(2).max(1),
        seed: c.seed,
    };
    crate::service::serve_blocking(config)?;
    Ok(vec![])
}

/// Single-line, machine-parsable error report.
pub fn error_line(code: &str, message: &str) -> String {
    serde_json::json!({ "error": message, "code": code }).to_string()
}

fn execute(cli: &Cli) -> Result<Vec<PathBuf>> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be >= 1".into()));
        }
        // A pool may already exist when `run` is called twice in one process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match &cli.command {
        Command::Summary(a) => summary(a),
        Command::Train(a) => train(a),
        Command::Compare(a) => compare(a),
        Command::Importance(a) => importance(a),
        Command::SweepNn(a) => sweep(a),
        Command::Generate(a) => generate(a),
        Command::Design(a) => design_cmd(a),
        Command::Serve(a) => serve(a, cli.threads),
    }
}

/// Runs the command line `args` (including the program name) and returns the
/// exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("usage error").trim_start_matches("error: ");
            eprintln!("{}", error_line("usage_error", first));
            return EXIT_USAGE;
        }
    };
    let start = Instant::now();
    let code = match execute(&cli) {
        Ok(paths) => {
            report(&paths);
            EXIT_OK
        }
        Err(e) => {
            eprintln!("{}", error_line(e.code(), &e.to_string()));
            if e.is_input_error() {
                EXIT_USAGE
            } else {
                EXIT_FAILURE
            }
        }
    };
    if std::env::var_os("LASML_TIMINGS").is_some() {
        eprintln!("elapsed_s={:.3}", start.elapsed().as_secs_f64());
    }
    code
}
