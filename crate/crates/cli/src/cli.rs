use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use sseval_core::embed::{embed_clips, write_embeddings_file};
use sseval_core::protocol::{read_manifest_file, validate_manifest, ManifestTargets};

use crate::budget::check_generation_budget;
use crate::config::{BackendKind, FileConfig, Settings};
use crate::correlate::{attach_subjective, run_correlation};
use crate::error::CliError;
use crate::objective::{decode_dir, list_wavs, run_objective, system_id, REFERENCE_EMBEDDINGS};
use crate::report::{
    read_json, to_json, write_bias_csv, write_json, write_objective_csvs, write_subjective_csvs, ObjectiveReport,
    SubjectiveReport,
};
use crate::subjective::run_subjective;

#[derive(Debug, Parser)]
#[command(name = "sseval", version, about = "Sound scene synthesis evaluation: FAD, ratings, correlation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand; each overrides the same key in `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// TOML config file; relative paths inside it resolve against its directory.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Reference audio directory or `.aemb` embedding file.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Comma-separated system audio directories.
    #[arg(long, value_delimiter = ',')]
    pub systems: Vec<PathBuf>,
    #[arg(long, value_enum)]
    pub backend: Option<BackendKind>,
    /// Directory of cached `<system_id>.aemb` files (and `reference.aemb`).
    #[arg(long)]
    pub embeddings_dir: Option<PathBuf>,
    #[arg(long)]
    pub ratings: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Output directory for JSON and CSV reports; without it the JSON goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated evaluation subsample sizes for bias curves.
    #[arg(long, value_delimiter = ',')]
    pub subsample_sizes: Vec<usize>,
    /// Repeats per bias-curve subsample size.
    #[arg(long)]
    pub repeats: Option<usize>,
}

impl Common {
    pub fn settings(&self) -> Result<Settings, CliError> {
        let file = match &self.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let mut s = Settings::from_file(file)?;
        let set = |dst: &mut Option<PathBuf>, src: &Option<PathBuf>| {
            if src.is_some() {
                dst.clone_from(src);
            }
        };
        set(&mut s.reference, &self.reference);
        set(&mut s.embeddings_dir, &self.embeddings_dir);
        set(&mut s.ratings, &self.ratings);
        set(&mut s.manifest, &self.manifest);
        set(&mut s.out, &self.out);
        if !self.systems.is_empty() {
            s.systems.clone_from(&self.systems);
        }
        if let Some(kind) = self.backend {
            s.backend.kind = kind;
        }
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        if !self.subsample_sizes.is_empty() {
            s.subsample_sizes.clone_from(&self.subsample_sizes);
        }
        if let Some(r) = self.repeats {
            s.repeats = r;
        }
        Ok(s)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// FAD of every system against the reference, with contract checks and ranks.
    Objective(#[command(flatten)] Common),
    /// Final Rating and per-category scores from a ratings CSV.
    Subjective(#[command(flatten)] Common),
    /// Agreement between an objective report and subjective scores.
    Correlate {
        #[command(flatten)]
        common: Common,
        /// Objective report JSON.
        #[arg(long)]
        objective: PathBuf,
        /// Subjective report JSON; otherwise computed from `--ratings` and `--manifest`.
        #[arg(long)]
        subjective: Option<PathBuf>,
    },
    /// Check a dataset manifest against the split and category rules.
    ValidateManifest {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dev_target: Option<usize>,
        #[arg(long)]
        eval_target: Option<usize>,
    },
    /// FAD of random evaluation subsamples against the full reference.
    BiasCurve(#[command(flatten)] Common),
    /// Check the file-count and wall-clock generation budget.
    BudgetCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, requires = "wall_seconds")]
        file_count: Option<usize>,
        #[arg(long)]
        wall_seconds: Option<f64>,
    },
    /// Embed reference and system audio into `--embeddings-dir`.
    Embed(#[command(flatten)] Common),
}

/// Text for stdout and the process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub exit_code: u8,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self { stdout, exit_code: 0 }
    }
}

fn out_dir(settings: &Settings) -> Result<Option<&Path>, CliError> {
    match settings.out.as_deref() {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
            Ok(Some(dir))
        }
        None => Ok(None),
    }
}

fn written(paths: &[PathBuf]) -> String {
    paths.iter().map(|p| format!("wrote {}\n", p.display())).collect()
}

fn subjective_from(settings: &Settings) -> Result<Option<SubjectiveReport>, CliError> {
    match (&settings.ratings, &settings.manifest) {
        (Some(r), Some(m)) => Ok(Some(run_subjective(r, m)?)),
        _ => Ok(None),
    }
}

pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Objective(common) => {
            let settings = common.settings()?;
            let mut report = run_objective(&settings)?;
            if let Some(sub) = subjective_from(&settings)? {
                attach_subjective(&mut report, &sub);
            }
            match out_dir(&settings)? {
                Some(dir) => {
                    let path = dir.join("objective.json");
                    write_json(&report, &path)?;
                    write_objective_csvs(&report, dir)?;
                    Ok(Outcome::ok(written(&[path])))
                }
                None => Ok(Outcome::ok(to_json(&report))),
            }
        }
        Command::Subjective(common) => {
            let settings = common.settings()?;
            let ratings = Settings::require(&settings.ratings, "ratings")?;
            let manifest = Settings::require(&settings.manifest, "manifest")?;
            let report = run_subjective(ratings, manifest)?;
            match out_dir(&settings)? {
                Some(dir) => {
                    let path = dir.join("subjective.json");
                    write_json(&report, &path)?;
                    write_subjective_csvs(&report, dir)?;
                    Ok(Outcome::ok(written(&[path])))
                }
                None => Ok(Outcome::ok(to_json(&report))),
            }
        }
        Command::Correlate {
            common,
            objective,
            subjective,
        } => {
            let settings = common.settings()?;
            let obj: ObjectiveReport = read_json(&objective)?;
            let sub = match subjective {
                Some(p) => read_json(&p)?,
                None => subjective_from(&settings)?
                    .ok_or_else(|| CliError::Usage("correlate needs --subjective or --ratings with --manifest".into()))?,
            };
            let report = run_correlation(&obj, &sub);
            match out_dir(&settings)? {
                Some(dir) => {
                    let path = dir.join("correlation.json");
                    write_json(&report, &path)?;
                    Ok(Outcome::ok(written(&[path])))
                }
                None => Ok(Outcome::ok(to_json(&report))),
            }
        }
        Command::ValidateManifest {
            common,
            dev_target,
            eval_target,
        } => {
            let settings = common.settings()?;
            let manifest = read_manifest_file(Settings::require(&settings.manifest, "manifest")?)?;
            let mut targets = ManifestTargets::default();
            targets.dev = dev_target.unwrap_or(targets.dev);
            targets.eval = eval_target.unwrap_or(targets.eval);
            let report = validate_manifest(&manifest, &targets);
            let mut text = to_json(&report);
            for f in &report.failures {
                text.push_str(&format!("FAIL {f}\n"));
            }
            for w in &report.warnings {
                text.push_str(&format!("WARN {w}\n"));
            }
            Ok(Outcome {
                stdout: text,
                exit_code: if report.passed() { 0 } else { 2 },
            })
        }
        Command::BiasCurve(common) => {
            let settings = common.settings()?;
            if settings.subsample_sizes.is_empty() {
                return Err(CliError::Usage("bias-curve needs --subsample-sizes".into()));
            }
            let report = run_objective(&settings)?;
            match out_dir(&settings)? {
                Some(dir) => {
                    let path = dir.join("bias_curves.csv");
                    write_bias_csv(&report, &path)?;
                    Ok(Outcome::ok(written(&[path])))
                }
                None => {
                    let curves: Vec<_> = report
                        .systems
                        .iter()
                        .map(|s| serde_json::json!({"system_id": s.system_id, "bias_curve": s.bias_curve, "error": s.error}))
                        .collect();
                    Ok(Outcome::ok(to_json(&curves)))
                }
            }
        }
        Command::BudgetCheck {
            common,
            file_count,
            wall_seconds,
        } => {
            let settings = common.settings()?;
            let checks = match (file_count, wall_seconds) {
                (Some(n), Some(secs)) => vec![("cli".to_owned(), check_generation_budget(n, secs, &settings.budget))],
                _ => {
                    let secs_for = |id: &str| -> Result<f64, CliError> {
                        match wall_seconds {
                            Some(s) => Ok(s),
                            None => settings.generation_seconds.get(id).copied().ok_or_else(|| {
                                CliError::Usage(format!("no generation_seconds for {id}; pass --wall-seconds"))
                            }),
                        }
                    };
                    if settings.systems.is_empty() {
                        return Err(CliError::Usage("budget-check needs --file-count/--wall-seconds or --systems".into()));
                    }
                    settings
                        .systems
                        .iter()
                        .map(|dir| {
                            let id = system_id(dir);
                            let n = list_wavs(dir)?.len();
                            Ok((id.clone(), check_generation_budget(n, secs_for(&id)?, &settings.budget)))
                        })
                        .collect::<Result<Vec<_>, CliError>>()?
                }
            };
            let passed = checks.iter().all(|(_, c)| c.passed);
            let doc: Vec<_> = checks
                .iter()
                .map(|(id, c)| serde_json::json!({"system_id": id, "check": c}))
                .collect();
            Ok(Outcome {
                stdout: to_json(&doc),
                exit_code: if passed { 0 } else { 2 },
            })
        }
        Command::Embed(common) => {
            let settings = common.settings()?;
            let dir = Settings::require(&settings.embeddings_dir, "embeddings-dir")?;
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
            let backend = settings.backend.build()?;
            let mut jobs: Vec<(PathBuf, String)> = Vec::new();
            if let Some(r) = settings.reference.as_ref().filter(|r| r.is_dir()) {
                jobs.push((r.clone(), REFERENCE_EMBEDDINGS.to_owned()));
            }
            for s in &settings.systems {
                jobs.push((s.clone(), format!("{}.aemb", system_id(s))));
            }
            if jobs.is_empty() {
                return Err(CliError::Usage("embed needs --reference or --systems".into()));
            }
            let mut paths = Vec::new();
            for (src, name) in jobs {
                let set = embed_clips(&decode_dir(&src)?, backend.as_ref())?;
                let path = dir.join(name);
                write_embeddings_file(&set, &path)?;
                paths.push(path);
            }
            Ok(Outcome::ok(written(&paths)))
        }
    }
}
