//! `gaitlab` subcommands. [`run`] returns the process exit code: 0 on
//! success, 1 for usage errors, 2 for data errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use gaitlab_core::classifiers::{train, ClassifierKind};
use gaitlab_core::domain::{Task, TruncationSpec, DEFAULT_SAMPLE_RATE};
use gaitlab_core::eval::{FoldMode, Preprocessor};
use gaitlab_core::synth::CohortSpec;
use gaitlab_core::windowing::{default_fft_len, window_spectrum, window_weights};

use crate::pipeline::Cohort;
use crate::report::{self, EvaluationReport, SavedModel, SpectrumSummary, MODEL_FORMAT_VERSION};
use crate::sweep::{self, CvSettings, SweepGrid, WindowFamily};
use crate::{ingest, Error, Result};

#[derive(Debug, Parser)]
#[command(name = "gaitlab", version, about = "BMI and age-group classification from gait signals")]
struct Cli {
    /// Worker threads for extraction and sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic cohort: manifest.json plus one CSV per subject.
    Synth(SynthArgs),
    /// Write the 84-column feature matrix for one window.
    Extract(ExtractArgs),
    /// Cross-validate every classifier across a grid of window parameters.
    SweepWindow(SweepWindowArgs),
    /// Accuracy against the number of retained principal components.
    SweepPca(SweepPcaArgs),
    /// Cross-validate one classifier and save a model trained on all rows.
    Evaluate(EvaluateArgs),
    /// Frequency response of a window.
    Spectra(SpectraArgs),
}

#[derive(Debug, Args)]
struct Output {
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Seeds the synthetic cohort, fold assignment and training.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write JSON outputs (both formats when neither flag is given).
    #[arg(long)]
    json: bool,
    /// Write CSV outputs.
    #[arg(long)]
    csv: bool,
}

impl Output {
    fn formats(&self) -> (bool, bool) {
        if self.json || self.csv {
            (self.json, self.csv)
        } else {
            (true, true)
        }
    }
}

#[derive(Debug, Args)]
struct Data {
    /// Cohort manifest; without it the default synthetic cohort for --seed is used.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Seconds dropped from the start of every recording.
    #[arg(long, default_value_t = 2.0)]
    truncate_head: f64,
    /// Seconds dropped from the end of every recording.
    #[arg(long, default_value_t = 2.0)]
    truncate_tail: f64,
}

impl Data {
    fn cohort(&self, seed: u64) -> Result<Cohort> {
        match &self.manifest {
            Some(path) => Cohort::load(path),
            None => Cohort::from_synthetic(&CohortSpec { seed, ..CohortSpec::default() }),
        }
    }

    fn truncation(&self) -> TruncationSpec {
        TruncationSpec { head_s: self.truncate_head, tail_s: self.truncate_tail }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FoldModeArg {
    Segment,
    Subject,
}

#[derive(Debug, Args)]
struct Cv {
    #[arg(long, default_value_t = 10)]
    folds: usize,
    /// `subject` keeps all segments of a subject in one fold.
    #[arg(long, value_enum, default_value = "segment")]
    fold_mode: FoldModeArg,
}

impl Cv {
    fn settings(&self, seed: u64, truncation: TruncationSpec) -> CvSettings {
        let fold_mode = match self.fold_mode {
            FoldModeArg::Segment => FoldMode::Segment,
            FoldModeArg::Subject => FoldMode::SubjectGrouped,
        };
        CvSettings { folds: self.folds, fold_mode, seed, truncation }
    }
}

#[derive(Debug, Args)]
struct WindowArgs {
    #[arg(long, value_parser = parse_task)]
    task: Task,
    #[arg(long, value_enum)]
    window: WindowFamily,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[command(flatten)]
    output: Output,
    #[arg(long, default_value_t = 20)]
    subjects_per_group: usize,
    /// Walk length in seconds.
    #[arg(long, default_value_t = 10.0)]
    duration: f64,
}

#[derive(Debug, Args)]
struct ExtractArgs {
    #[command(flatten)]
    output: Output,
    #[command(flatten)]
    data: Data,
    #[command(flatten)]
    window: WindowArgs,
    /// Box width or Gaussian σ in seconds.
    #[arg(long, visible_aliases = ["width", "sigma"])]
    param: f64,
}

#[derive(Debug, Args)]
struct SweepWindowArgs {
    #[command(flatten)]
    output: Output,
    #[command(flatten)]
    data: Data,
    #[command(flatten)]
    cv: Cv,
    #[command(flatten)]
    window: WindowArgs,
    /// Comma-separated window parameters (default: the standard grid for the task and window).
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<f64>>,
    /// Comma-separated subset of j48,mlp,svm,rf,knn,lr.
    #[arg(long, value_delimiter = ',', value_parser = parse_classifier)]
    classifiers: Option<Vec<ClassifierKind>>,
}

#[derive(Debug, Args)]
struct SweepPcaArgs {
    #[command(flatten)]
    output: Output,
    #[command(flatten)]
    data: Data,
    #[command(flatten)]
    cv: Cv,
    #[command(flatten)]
    window: WindowArgs,
    /// Window parameter (default: the reference setting for the task and window).
    #[arg(long, visible_aliases = ["width", "sigma"])]
    param: Option<f64>,
    /// Component counts as `a-b` or a comma-separated list.
    #[arg(long, default_value = "1-30", value_parser = parse_components)]
    components: ComponentList,
    #[arg(long, value_delimiter = ',', value_parser = parse_classifier)]
    classifiers: Option<Vec<ClassifierKind>>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[command(flatten)]
    output: Output,
    #[command(flatten)]
    data: Data,
    #[command(flatten)]
    cv: Cv,
    #[command(flatten)]
    window: WindowArgs,
    #[arg(long, visible_aliases = ["width", "sigma"])]
    param: Option<f64>,
    #[arg(long, value_parser = parse_classifier, default_value = "knn")]
    classifier: ClassifierKind,
    /// Retain this many principal components.
    #[arg(long)]
    pca: Option<usize>,
}

#[derive(Debug, Args)]
struct SpectraArgs {
    #[command(flatten)]
    output: Output,
    #[arg(long, value_enum)]
    window: WindowFamily,
    #[arg(long, visible_aliases = ["width", "sigma"])]
    param: f64,
    #[arg(long, default_value_t = DEFAULT_SAMPLE_RATE)]
    rate: f64,
    /// FFT length (default: next power of two ≥ 8× the window length).
    #[arg(long)]
    n_fft: Option<usize>,
}

#[derive(Debug, Clone)]
struct ComponentList(Vec<usize>);

fn parse_task(s: &str) -> std::result::Result<Task, String> {
    s.parse().map_err(|e: gaitlab_core::Error| e.to_string())
}

fn parse_classifier(s: &str) -> std::result::Result<ClassifierKind, String> {
    s.parse().map_err(|e: gaitlab_core::Error| e.to_string())
}

fn parse_components(s: &str) -> std::result::Result<ComponentList, String> {
    let bad = || format!("expected `a-b` or a comma-separated list of positive integers, got {s:?}");
    let list: Vec<usize> = if let Some((a, b)) = s.split_once('-') {
        let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        (a..=b).collect()
    } else {
        s.split(',').map(|v| v.trim().parse().map_err(|_| bad())).collect::<std::result::Result<_, _>>()?
    };
    if list.is_empty() || list.contains(&0) {
        return Err(bad());
    }
    Ok(ComponentList(list))
}

/// Reference window parameter per task and window family.
fn figure_param(task: Task, family: WindowFamily) -> f64 {
    match (task, family) {
        (Task::Bmi, WindowFamily::Gaussian) => 0.36,
        (Task::Bmi, WindowFamily::Box) => 0.83,
        (Task::Age, WindowFamily::Gaussian) => 0.50,
        (Task::Age, WindowFamily::Box) => 1.11,
    }
}

/// Runs the command line and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match pool.install(|| dispatch(cli.command)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Synth(a) => synth(a),
        Command::Extract(a) => extract(a),
        Command::SweepWindow(a) => sweep_window(a),
        Command::SweepPca(a) => sweep_pca(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Spectra(a) => spectra(a),
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(Error::io(&path))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn prepare(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(Error::io(out))
}

fn synth(a: SynthArgs) -> Result<()> {
    prepare(&a.output.out)?;
    let spec = CohortSpec {
        subjects_per_age_group: a.subjects_per_group,
        walk_duration_s: a.duration,
        seed: a.output.seed,
        ..CohortSpec::default()
    };
    let m = Cohort::from_synthetic(&spec)?.write(&a.output.out)?;
    println!("wrote {} recordings and manifest.json to {}", m.entries.len(), a.output.out.display());
    Ok(())
}

fn extract(a: ExtractArgs) -> Result<()> {
    prepare(&a.output.out)?;
    let cohort = a.data.cohort(a.output.seed)?;
    let m = cohort.features(a.window.task, &a.window.window.spec(a.param), &a.data.truncation())?;
    let (json, csv) = a.output.formats();
    if csv {
        write(&a.output.out, "features.csv", &ingest::save_feature_matrix(&m)?)?;
    }
    if json {
        write(&a.output.out, "features.json", &report::to_json(&m))?;
    }
    Ok(())
}

fn sweep_window(a: SweepWindowArgs) -> Result<()> {
    prepare(&a.output.out)?;
    let mut grid = SweepGrid::default_for(a.window.task, a.window.window);
    if let Some(v) = a.values {
        grid.values = v;
    }
    if let Some(c) = a.classifiers {
        grid.classifiers = c;
    }
    grid.validate()?;
    let cohort = a.data.cohort(a.output.seed)?;
    let settings = a.cv.settings(a.output.seed, a.data.truncation());
    let r = sweep::run_window_sweep(&cohort, &grid, &settings)?;
    let stem = format!("sweep_{}_{}", grid.task, grid.family.name());
    let (json, csv) = a.output.formats();
    if csv {
        write(&a.output.out, &format!("{stem}.csv"), &r.to_long_csv())?;
        write(&a.output.out, &format!("{stem}_table.csv"), &r.to_table_csv())?;
    }
    if json {
        write(&a.output.out, &format!("{stem}.json"), &report::to_json(&r))?;
    }
    Ok(())
}

fn sweep_pca(a: SweepPcaArgs) -> Result<()> {
    prepare(&a.output.out)?;
    let (task, family) = (a.window.task, a.window.window);
    let window = family.spec(a.param.unwrap_or_else(|| figure_param(task, family)));
    let classifiers = a.classifiers.unwrap_or_else(|| ClassifierKind::ALL.to_vec());
    let cohort = a.data.cohort(a.output.seed)?;
    let settings = a.cv.settings(a.output.seed, a.data.truncation());
    let r = sweep::run_pca_sweep(&cohort, task, &window, &a.components.0, &classifiers, &settings)?;
    let stem = format!("pca_{task}_{}", family.name());
    let (json, csv) = a.output.formats();
    if csv {
        write(&a.output.out, &format!("{stem}.csv"), &r.to_curve_csv())?;
    }
    if json {
        write(&a.output.out, &format!("{stem}.json"), &report::to_json(&r))?;
    }
    Ok(())
}

fn evaluate(a: EvaluateArgs) -> Result<()> {
    prepare(&a.output.out)?;
    let (task, family) = (a.window.task, a.window.window);
    let window = family.spec(a.param.unwrap_or_else(|| figure_param(task, family)));
    let cohort = a.data.cohort(a.output.seed)?;
    let settings = a.cv.settings(a.output.seed, a.data.truncation());
    let m = cohort.features(task, &window, &settings.truncation)?;
    let spec = a.classifier.default_spec();
    let cv = sweep::evaluate_matrix(&m, &spec, a.pca, &settings)?;
    println!("{} {task} accuracy {:.2}% (macro TPR {:.2}%)", a.classifier, cv.accuracy * 100.0, cv.macro_tpr * 100.0);

    let x = m.features();
    let pre = Preprocessor::fit(&x, spec.wants_standardized(), a.pca)?;
    let model = train(&spec, &pre.transform(&x)?, &m.labels(), task.n_classes(), a.output.seed)?;
    let saved = SavedModel { format_version: MODEL_FORMAT_VERSION, task, window, preprocessor: pre, model };

    let class_names = task.class_names();
    let (json, csv) = a.output.formats();
    if csv {
        write(&a.output.out, "confusion.csv", &report::confusion_csv(&cv.confusion, &class_names))?;
    }
    if json {
        let r = EvaluationReport {
            task,
            window,
            settings,
            class_names: class_names.iter().map(|s| s.to_string()).collect(),
            rows: m.len(),
            cv,
        };
        write(&a.output.out, "cv_report.json", &report::to_json(&r))?;
    }
    write(&a.output.out, "model.json", &report::to_json(&saved))
}

fn spectra(a: SpectraArgs) -> Result<()> {
    prepare(&a.output.out)?;
    let window = a.window.spec(a.param);
    let w = window_weights(&window, a.rate)?;
    let n_fft = a.n_fft.unwrap_or_else(|| default_fft_len(w.len()));
    let s = window_spectrum(&w, n_fft)?;
    let (json, csv) = a.output.formats();
    if csv {
        write(&a.output.out, "spectrum.csv", &report::spectrum_csv(&s))?;
    }
    if json {
        let summary = SpectrumSummary {
            window,
            sample_rate_hz: a.rate,
            window_len: w.len(),
            n_fft,
            main_lobe_width: s.main_lobe_width,
            main_lobe_width_hz: s.main_lobe_width * a.rate,
            first_sidelobe_db: s.first_sidelobe_db,
        };
        write(&a.output.out, "spectrum.json", &report::to_json(&summary))?;
    }
    Ok(())
}
