//! `voxid` — command-line front end for text-dependent, closed-set speaker
//! identification.
//!
//! Five subcommands cover the full workflow: `synth` writes a deterministic
//! synthetic corpus, `enroll` trains a model over a directory of per-speaker
//! WAVs, `identify` names the speaker of one utterance, `evaluate` scores a
//! model against a labeled test corpus, and `sweep` re-trains across a grid
//! of one training parameter.
//!
//! Settings merge in three layers: built-in defaults, then the sections of a
//! `--config` JSON file, then individual flag overrides. The merged settings
//! are validated before any work starts.
//!
//! Exit codes: 0 success, 2 usage/configuration/corpus problems, 3 training
//! failure, 4 no speech detected in the input utterance.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use voxid_core::audio_io::{read_wav, synthesize_corpus, write_corpus, AudioError};
use voxid_core::features::{FeatureConfig, FeatureMethod, Pooling};
use voxid_core::identify::{enroll, evaluate, identify, parameter_sweep, SweepParameter};
use voxid_core::neurogenetic::{GaConfig, MlpConfig, NetworkError};
use voxid_core::preprocess::{PreprocessConfig, PreprocessError};
use voxid_core::{IdentifyError, SpeakerModel};

const EXIT_CONFIG: u8 = 2;
const EXIT_TRAINING: u8 = 3;
const EXIT_NO_SPEECH: u8 = 4;

#[derive(Parser)]
#[command(
    name = "voxid",
    version,
    about = "Text-dependent, closed-set speaker identification",
    propagate_version = true
)]
struct Cli {
    /// Bound the worker threads used for parallel sections
    /// (default: machine parallelism)
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a deterministic synthetic corpus of WAV files
    Synth(SynthArgs),
    /// Train a speaker model from a directory of per-speaker WAVs
    Enroll(EnrollArgs),
    /// Name the speaker of a single utterance
    Identify(IdentifyArgs),
    /// Score a model against a labeled test corpus
    Evaluate(EvaluateArgs),
    /// Re-train across a grid of one training parameter
    Sweep(SweepArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Directory the corpus is written under, one subdirectory per speaker
    out_dir: PathBuf,

    /// Number of distinct synthetic voices (a closed set needs at least 2)
    #[arg(long, default_value_t = 5)]
    speakers: usize,

    /// Utterances written per speaker
    #[arg(long, default_value_t = 10)]
    utterances: usize,

    /// Mix in noise at this signal-to-noise ratio (clean when omitted)
    #[arg(long, value_name = "DB")]
    noise_snr_db: Option<f64>,

    /// Index of the first utterance; a later start extends an existing
    /// corpus with held-out phrases spoken by the same voices
    #[arg(long, default_value_t = 0, value_name = "I")]
    start_index: usize,

    /// Base seed for voices and phrases
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct EnrollArgs {
    /// Training corpus root: <DIR>/<speaker>/<utterance>.wav
    train_dir: PathBuf,

    /// Where the model JSON is written
    model_out: PathBuf,

    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct IdentifyArgs {
    /// Trained model JSON
    model: PathBuf,

    /// Utterance to identify
    wav: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Trained model JSON
    model: PathBuf,

    /// Labeled test corpus root: <DIR>/<speaker>/<utterance>.wav
    test_dir: PathBuf,

    /// Where the per-speaker report CSV is written; the confusion matrix
    /// goes to `<stem>_confusion.csv` next to it
    report_out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Training corpus root
    train_dir: PathBuf,

    /// Labeled test corpus root
    test_dir: PathBuf,

    /// Where the sweep rows are written as CSV
    out_csv: PathBuf,

    /// Training parameter to vary: gain, speed, hidden_nodes,
    /// crossover_points or generations
    #[arg(long, value_name = "NAME")]
    param: SweepParameter,

    /// Comma-separated values the parameter takes
    #[arg(long, value_delimiter = ',', required = true, value_name = "V,V,...")]
    values: Vec<f64>,

    /// Training repetitions per value, each with a shifted seed
    #[arg(long, default_value_t = 3)]
    trials: usize,

    #[command(flatten)]
    config: ConfigArgs,
}

/// Settings shared by the training commands: a config file plus one override
/// flag per field, applied on top of built-in defaults.
#[derive(Args)]
struct ConfigArgs {
    /// JSON file with any of the sections `preprocess_config`,
    /// `feature_config`, `mlp_config`, `ga_config` — the same shapes a model
    /// file embeds; omitted fields keep their defaults
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Seed for the genetic search
    #[arg(long)]
    seed: Option<u64>,

    // Front end -------------------------------------------------------------
    /// Pre-emphasis coefficient in [0, 1]
    #[arg(long, value_name = "ALPHA")]
    pre_emphasis_alpha: Option<f64>,

    /// Analysis frame length in milliseconds
    #[arg(long, value_name = "MS")]
    frame_len_ms: Option<f64>,

    /// Overlap between consecutive frames as a percentage
    #[arg(long, value_name = "PCT")]
    overlap_pct: Option<f64>,

    /// Lower bound for short-term log energy
    #[arg(long, value_name = "DB")]
    energy_floor_db: Option<f64>,

    /// Endpoint threshold position between noise and peak energy, in (0, 1)
    #[arg(long, value_name = "FRAC")]
    endpoint_margin_fraction: Option<f64>,

    /// Frames the detected speech region is padded by on each side
    #[arg(long, value_name = "N")]
    hangover_frames: Option<usize>,

    /// Leading noise-only span in milliseconds
    #[arg(long, value_name = "MS")]
    noise_lead_ms: Option<f64>,

    /// Wiener spectral gain floor in (0, 1]; 1 bypasses the filter
    #[arg(long, value_name = "G")]
    wiener_gain_floor: Option<f64>,

    // Features ---------------------------------------------------------------
    /// Feature method: rcc, mfcc, dmfcc, ddmfcc, lpc or lpcc
    #[arg(long, value_name = "METHOD")]
    feature: Option<FeatureMethod>,

    /// Cepstral coefficients kept per frame
    #[arg(long, value_name = "Q")]
    num_coefficients: Option<usize>,

    /// Triangular filters in the mel filterbank
    #[arg(long, value_name = "K")]
    num_mel_filters: Option<usize>,

    /// Transform size, a power of two no smaller than the frame
    #[arg(long, value_name = "N")]
    fft_size: Option<usize>,

    /// Predictor order for lpc and lpcc
    #[arg(long, value_name = "P")]
    lpc_order: Option<usize>,

    /// Half-width of the delta regression window
    #[arg(long, value_name = "M")]
    delta_window: Option<usize>,

    /// Lower bound applied inside logarithms
    #[arg(long, value_name = "F")]
    log_floor: Option<f64>,

    /// Frame pooling: mean or mean_std
    #[arg(long, value_name = "POOL")]
    pooling: Option<Pooling>,

    // Network ----------------------------------------------------------------
    /// Hidden-layer size
    #[arg(long, value_name = "N")]
    hidden_nodes: Option<usize>,

    /// Learning rate applied to both layers
    #[arg(long, value_name = "ETA")]
    gain: Option<f64>,

    /// Sigmoid slope applied to both layers
    #[arg(long, value_name = "K")]
    speed: Option<f64>,

    /// Backpropagation epoch cap
    #[arg(long, value_name = "N")]
    max_epochs: Option<usize>,

    /// RMS error at which training stops early
    #[arg(long, value_name = "RMS")]
    tolerable_rms: Option<f64>,

    // Genetic search ----------------------------------------------------------
    /// Chromosomes per generation
    #[arg(long, value_name = "P")]
    population_size: Option<usize>,

    /// Generations the search runs for
    #[arg(long, value_name = "G")]
    generations: Option<usize>,

    /// Crossover points per recombination
    #[arg(long, value_name = "K")]
    crossover_points: Option<usize>,

    /// Per-gene mutation probability
    #[arg(long, value_name = "RATE")]
    mutation_rate: Option<f64>,

    /// Standard deviation of mutation noise
    #[arg(long, value_name = "SIGMA")]
    mutation_sigma: Option<f64>,

    /// Chromosomes drawn per tournament
    #[arg(long, value_name = "T")]
    tournament_size: Option<usize>,

    /// Best chromosomes copied unchanged into the next generation
    #[arg(long, value_name = "E")]
    elite_count: Option<usize>,

    /// Half-width of the uniform weight initialization
    #[arg(long, value_name = "R")]
    init_range: Option<f64>,
}

/// Optional sections of a `--config` file. Unknown keys are rejected so a
/// typo cannot silently fall back to defaults.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    preprocess_config: Option<PreprocessConfig>,
    #[serde(default)]
    feature_config: Option<FeatureConfig>,
    #[serde(default)]
    mlp_config: Option<MlpConfig>,
    #[serde(default)]
    ga_config: Option<GaConfig>,
}

/// The fully merged and validated settings a training command runs with.
struct Resolved {
    preprocess: PreprocessConfig,
    feature: FeatureConfig,
    mlp: MlpConfig,
    ga: GaConfig,
}

/// A failure to report: its message and the process exit code.
struct CliError {
    code: u8,
    message: String,
}

fn config_error(message: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_CONFIG,
        message: message.into(),
    }
}

impl From<IdentifyError> for CliError {
    fn from(err: IdentifyError) -> Self {
        let code = match &err {
            IdentifyError::Preprocess(PreprocessError::NoSpeechDetected) => EXIT_NO_SPEECH,
            // A configuration complaint surfacing from the trainer is still a
            // configuration problem; everything else under Network is a
            // genuine training failure.
            IdentifyError::Network(NetworkError::ConfigError(_)) => EXIT_CONFIG,
            IdentifyError::Network(_) => EXIT_TRAINING,
            _ => EXIT_CONFIG,
        };
        CliError {
            code,
            message: err.to_string(),
        }
    }
}

impl From<AudioError> for CliError {
    fn from(err: AudioError) -> Self {
        config_error(err.to_string())
    }
}

impl ConfigArgs {
    /// Merges defaults, the config file, and flag overrides, then validates
    /// every section before any corpus work starts.
    fn resolve(&self) -> Result<Resolved, CliError> {
        let mut preprocess = PreprocessConfig::default();
        let mut feature = FeatureConfig::default();
        let mut mlp = MlpConfig::default();
        let mut ga = GaConfig::default();

        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|e| {
                config_error(format!("cannot read config file {}: {e}", path.display()))
            })?;
            let file: FileConfig = serde_json::from_str(&text).map_err(|e| {
                config_error(format!("malformed config file {}: {e}", path.display()))
            })?;
            if let Some(section) = file.preprocess_config {
                preprocess = section;
            }
            if let Some(section) = file.feature_config {
                feature = section;
            }
            if let Some(section) = file.mlp_config {
                mlp = section;
            }
            if let Some(section) = file.ga_config {
                ga = section;
            }
        }

        macro_rules! apply {
            ($target:expr, $($flag:ident => $field:expr),+ $(,)?) => {
                $(if let Some(v) = self.$flag { $field = v; })+
            };
        }
        apply!(preprocess,
            pre_emphasis_alpha => preprocess.pre_emphasis_alpha,
            frame_len_ms => preprocess.frame_len_ms,
            overlap_pct => preprocess.overlap_pct,
            energy_floor_db => preprocess.energy_floor_db,
            endpoint_margin_fraction => preprocess.endpoint_margin_fraction,
            hangover_frames => preprocess.hangover_frames,
            noise_lead_ms => preprocess.noise_lead_ms,
            wiener_gain_floor => preprocess.wiener_gain_floor,
        );
        apply!(feature,
            feature => feature.method,
            num_coefficients => feature.num_coefficients,
            num_mel_filters => feature.num_mel_filters,
            fft_size => feature.fft_size,
            lpc_order => feature.lpc_order,
            delta_window => feature.delta_window,
            log_floor => feature.log_floor,
            pooling => feature.pooling,
        );
        apply!(mlp,
            hidden_nodes => mlp.hidden_dim,
            max_epochs => mlp.max_epochs,
            tolerable_rms => mlp.tolerable_rms,
        );
        if let Some(gain) = self.gain {
            mlp.gain_hidden = gain;
            mlp.gain_output = gain;
        }
        if let Some(speed) = self.speed {
            mlp.speed_hidden = speed;
            mlp.speed_output = speed;
        }
        apply!(ga,
            population_size => ga.population_size,
            generations => ga.generations,
            crossover_points => ga.crossover_points,
            mutation_rate => ga.mutation_rate,
            mutation_sigma => ga.mutation_sigma,
            tournament_size => ga.tournament_size,
            elite_count => ga.elite_count,
            init_range => ga.init_range,
        );
        if let Some(seed) = self.seed {
            ga.rng_seed = seed;
        }

        preprocess
            .validate()
            .map_err(|e| config_error(e.to_string()))?;
        feature
            .validate()
            .map_err(|e| config_error(e.to_string()))?;
        mlp.validate().map_err(|e| config_error(e.to_string()))?;
        ga.validate().map_err(|e| config_error(e.to_string()))?;
        Ok(Resolved {
            preprocess,
            feature,
            mlp,
            ga,
        })
    }
}

fn cmd_synth(args: &SynthArgs) -> Result<(), CliError> {
    if args.speakers < 2 {
        return Err(config_error(format!(
            "--speakers must be at least 2 for a closed set, got {}",
            args.speakers
        )));
    }
    let corpus = synthesize_corpus(
        args.speakers,
        args.utterances,
        args.start_index,
        args.seed,
        args.noise_snr_db,
    )?;
    let files = write_corpus(&args.out_dir, &corpus, args.start_index)?;
    for path in &files {
        println!("{}", path.display());
    }
    Ok(())
}

fn cmd_enroll(args: &EnrollArgs) -> Result<(), CliError> {
    let resolved = args.config.resolve()?;
    let (model, report) = enroll(
        &args.train_dir,
        &resolved.preprocess,
        &resolved.feature,
        &resolved.mlp,
        &resolved.ga,
    )?;
    model.save(&args.model_out)?;
    let training = evaluate(&model, &args.train_dir)?;
    println!("model={}", args.model_out.display());
    println!("stop_reason={}", report.stop_reason);
    println!("final_rms={}", report.final_rms);
    println!(
        "training_identification_rate={:.2}",
        training.identification_rate
    );
    Ok(())
}

fn cmd_identify(args: &IdentifyArgs) -> Result<(), CliError> {
    let model = SpeakerModel::load(&args.model)?;
    let utterance = read_wav(&args.wav)?;
    let (winner, scores) = identify(&model, &utterance)?;
    println!("{winner}");
    println!("speaker,score");
    for (label, score) in model.speaker_labels.iter().zip(&scores) {
        println!("{label},{score:.6}");
    }
    Ok(())
}

/// `report.csv` → `report_confusion.csv`, kept in the same directory.
fn confusion_path(report_out: &Path) -> PathBuf {
    let stem = report_out.file_stem().unwrap_or_default().to_string_lossy();
    report_out.with_file_name(format!("{stem}_confusion.csv"))
}

fn cmd_evaluate(args: &EvaluateArgs) -> Result<(), CliError> {
    let model = SpeakerModel::load(&args.model)?;
    let report = evaluate(&model, &args.test_dir)?;

    let write = |path: &Path, f: &dyn Fn(&mut BufWriter<File>) -> std::io::Result<()>| {
        let file = File::create(path)
            .map_err(|e| config_error(format!("cannot write {}: {e}", path.display())))?;
        let mut writer = BufWriter::new(file);
        f(&mut writer)
            .and_then(|_| writer.flush())
            .map_err(|e| config_error(format!("cannot write {}: {e}", path.display())))
    };
    write(&args.report_out, &|w| report.write_csv(w))?;
    write(&confusion_path(&args.report_out), &|w| {
        report.write_confusion_csv(w)
    })?;

    println!("identification_rate={:.2}", report.identification_rate);
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let resolved = args.config.resolve()?;
    let result = parameter_sweep(
        &args.train_dir,
        &args.test_dir,
        &resolved.preprocess,
        &resolved.feature,
        &resolved.mlp,
        &resolved.ga,
        args.param,
        &args.values,
        args.trials,
        &args.out_csv,
    )?;
    println!("best_value={}", result.best_value);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if let Some(threads) = cli.threads {
        let build = |n| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
        };
        if threads == 0 || build(threads).is_err() {
            eprintln!("error: --threads must be a positive worker count");
            return ExitCode::from(EXIT_CONFIG);
        }
    }

    let result = match &cli.command {
        Command::Synth(args) => cmd_synth(args),
        Command::Enroll(args) => cmd_enroll(args),
        Command::Identify(args) => cmd_identify(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}
