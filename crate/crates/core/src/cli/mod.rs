//! Command-line front end. Exit codes: 0 success, 2 input or config error,
//! 3 runtime or endpoint error.

pub mod config;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::GenerateOptions;
use crate::gateway::{run_probe_batch, BatchOptions, BatchOutcome, Gateway, ProbeItem, ProbeSet, PromptRegistry};
use crate::metrics::{AggregateOptions, Grouping, MonoRule};
use crate::mock::{gen_corpus, CorpusSpec, MockProfile, MockServer};
use crate::model::{serialize_record, EvalRecord, ManifestEntry};
use crate::pipeline::{
    counterfactuals, gold_map, manifest_pairs, parse_note, parse_notes, read_jsonl, report, revalidate, template_notes,
    to_jsonl, CounterfactOptions, NoteFailure, NoteInput, ParsedNote, PipelineError,
};

pub use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Io(e) => CliError::Runtime(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "clinprobe", version, about = "Counterfactual behavioral testing on clinical admission notes")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Section notes and extract variables.
    Parse {
        input: PathBuf,
        /// Emit the notes that parse and log the rest instead of failing.
        #[arg(long)]
        skip_errors: bool,
    },
    /// Generate and validate counterfactuals.
    Counterfact {
        /// Sectioned notes from `parse`, or raw notes.
        input: PathBuf,
        /// Comma-separated variable names.
        #[arg(long, value_delimiter = ',')]
        variables: Option<Vec<String>>,
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated subset of raw,template.
        #[arg(long)]
        settings: Option<String>,
    },
    /// Render template versions of sectioned notes.
    Template { input: PathBuf },
    /// Re-validate a manifest.
    Validate {
        manifest: PathBuf,
        /// Exit 2 when any entry is flagged or has stale digests.
        #[arg(long)]
        strict: bool,
    },
    /// Probe an endpoint with every manifest pair.
    Eval(EvalArgs),
    /// Aggregate eval records into report tables.
    Report {
        records: PathBuf,
        /// Comma-separated subset of model,setting.
        #[arg(long)]
        group_by: Option<String>,
        #[arg(long, value_enum)]
        mono_rule: Option<MonoRuleArg>,
        /// Four comma-separated reference days for LOS classes 1-4.
        #[arg(long)]
        reference_days: Option<String>,
    },
    /// Write a synthetic notes file.
    GenCorpus {
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// All vitals present at fixed normal values.
        #[arg(long)]
        baseline: bool,
        /// JSON corpus spec; `--n` and `--seed` still apply.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Output file (default: <out_dir>/notes.jsonl).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Serve a mock profile over HTTP until interrupted.
    MockServe {
        /// `constant`, `oracle[:beta]` or a JSON profile.
        #[arg(long, default_value = "constant")]
        profile: String,
        #[arg(long, default_value_t = 8765)]
        port: u16,
    },
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    pub manifest: PathBuf,
    /// Endpoint base URL; beats the environment and the config.
    #[arg(long)]
    pub endpoint: Option<String>,
    /// Comma-separated subset of score,classify.
    #[arg(long)]
    pub probes: Option<String>,
    /// Notes file providing gold LOS classes.
    #[arg(long)]
    pub notes: Option<PathBuf>,
    #[arg(long)]
    pub concurrency: Option<usize>,
    #[arg(long)]
    pub model_tag: Option<String>,
    #[arg(long)]
    pub template_id: Option<String>,
    #[arg(long)]
    pub timeout_ms: Option<u64>,
    #[arg(long)]
    pub max_retries: Option<u32>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum MonoRuleArg {
    Strict,
    TrendOnly,
}

impl From<MonoRuleArg> for MonoRule {
    fn from(m: MonoRuleArg) -> Self {
        match m {
            MonoRuleArg::Strict => MonoRule::Strict,
            MonoRuleArg::TrendOnly => MonoRule::TrendOnly,
        }
    }
}

/// Run log written next to eval records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub endpoint: String,
    pub model_tag: String,
    pub concurrency: usize,
    pub pairs: usize,
    pub records: usize,
    pub errors: usize,
    pub requests: u64,
    pub retries: u64,
    pub failures: u64,
    pub elapsed_ms: u64,
    pub aborted: bool,
}

fn input_path(path: &Path) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Input(format!("{}: no such file", path.display())))
    }
}

fn read_lines<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    input_path(path)?;
    let file = File::open(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    read_jsonl(BufReader::new(file)).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    Ok(path)
}

/// A line of a counterfactual input file: already sectioned, or raw.
#[derive(Deserialize)]
#[serde(untagged)]
enum NotesLine {
    Parsed(Box<ParsedNote>),
    Raw(NoteInput),
}

fn load_parsed(path: &Path) -> Result<Vec<ParsedNote>, CliError> {
    read_lines::<NotesLine>(path)?
        .into_iter()
        .map(|line| match line {
            NotesLine::Parsed(p) => Ok(*p),
            NotesLine::Raw(n) => parse_note(&n).map_err(|e| CliError::Input(format!("{}: {e}", n.note_id))),
        })
        .collect()
}

/// Runs one parsed command line.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = RunConfig::load_or_default(cli.config.as_deref())?;
    if let Some(dir) = cli.out_dir {
        cfg.out_dir = dir;
    }
    let out = cfg.out_dir.clone();
    match cli.command {
        Command::Parse { input, skip_errors } => {
            let notes: Vec<NoteInput> = read_lines(&input)?;
            if notes.is_empty() {
                return Err(CliError::Input("no notes".into()));
            }
            let (ok, failed) = parse_notes(&notes);
            write_file(&out, "parse_errors.jsonl", &to_jsonl(&failed)?)?;
            if !failed.is_empty() && !skip_errors {
                let first: &NoteFailure = &failed[0];
                return Err(CliError::Input(format!(
                    "{} of {} notes failed to parse (first: {}: {})",
                    failed.len(),
                    notes.len(),
                    first.note_id,
                    first.error
                )));
            }
            write_file(&out, "parsed.jsonl", &to_jsonl(&ok)?)?;
            eprintln!("parsed {} notes, {} errors", ok.len(), failed.len());
        }
        Command::Counterfact { input, variables, seed, settings } => {
            let variables = match variables {
                Some(v) => config::parse_variables(&v)?,
                None => cfg.variables()?,
            };
            let seed = seed.or(cfg.seed).ok_or_else(|| CliError::Input("a seed is required".into()))?;
            let settings = match settings {
                Some(s) => config::parse_settings(&s)?,
                None => cfg.settings.clone(),
            };
            let notes = load_parsed(&input)?;
            let options =
                CounterfactOptions { variables, seed, settings, generate: GenerateOptions { gender_mode: cfg.gender_mode } };
            let result = counterfactuals(&notes, &options).map_err(|e| CliError::Runtime(e.to_string()))?;
            write_file(&out, "manifest.jsonl", &to_jsonl(&result.manifest)?)?;
            write_file(&out, "quarantine.jsonl", &to_jsonl(&result.quarantine)?)?;
            let summary = serde_json::to_string_pretty(&result.counts).expect("counts serialize");
            write_file(&out, "counterfact_summary.json", &format!("{summary}\n"))?;
            for line in result.summary_lines() {
                println!("{line}");
            }
        }
        Command::Template { input } => {
            let notes = load_parsed(&input)?;
            write_file(&out, "templates.jsonl", &to_jsonl(&template_notes(&notes))?)?;
        }
        Command::Validate { manifest, strict } => {
            let entries: Vec<ManifestEntry> = read_lines(&manifest)?;
            let lines = revalidate(&entries);
            write_file(&out, "validation.jsonl", &to_jsonl(&lines)?)?;
            let bad = lines.iter().filter(|l| !l.digests_ok || l.status != crate::engine::ValidationStatus::Pass).count();
            println!("{} entries, {} pass, {bad} flagged or stale", lines.len(), lines.len() - bad);
            if strict && bad > 0 {
                return Err(CliError::Input(format!("{bad} entries failed validation")));
            }
        }
        Command::Eval(args) => eval(&cfg, args)?,
        Command::Report { records, group_by, mono_rule, reference_days } => {
            if let Some(days) = reference_days {
                cfg.reference_days = Some(config::parse_reference_days(&days)?);
            }
            let grouping = Grouping::parse(group_by.as_deref().unwrap_or(&cfg.group_by))
                .map_err(|e| CliError::Input(e.to_string()))?;
            let options = AggregateOptions { mono_rule: mono_rule.map_or(cfg.mono_rule, Into::into), grouping };
            let records: Vec<EvalRecord> = read_lines(&records)?;
            if records.is_empty() {
                return Err(CliError::Input("no records".into()));
            }
            let (_, files) = report(&records, &cfg.reference()?, &options)?;
            for (name, contents) in files.named() {
                write_file(&out, name, contents)?;
            }
            print!("{}", files.summary_csv);
        }
        Command::GenCorpus { n, seed, baseline, spec, output } => {
            let seed = seed.or(cfg.seed).ok_or_else(|| CliError::Input("a seed is required".into()))?;
            let mut corpus_spec = match spec {
                Some(path) => {
                    input_path(&path)?;
                    let text = std::fs::read_to_string(&path).map_err(|e| CliError::Input(e.to_string()))?;
                    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
                }
                None if baseline => CorpusSpec::normal_baseline(n, seed),
                None => CorpusSpec::default(),
            };
            corpus_spec.n_notes = n;
            corpus_spec.seed = seed;
            let notes = gen_corpus(&corpus_spec).map_err(|e| CliError::Input(e.to_string()))?;
            let body = to_jsonl(&notes)?;
            match output {
                Some(path) => {
                    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
                    write_file(dir, &path.file_name().expect("file path").to_string_lossy(), &body)?;
                }
                None => {
                    write_file(&out, "notes.jsonl", &body)?;
                }
            }
        }
        Command::MockServe { profile, port } => {
            let profile = MockProfile::parse(&profile).map_err(|e| CliError::Input(e.to_string()))?;
            let server = MockServer::start(profile, port).map_err(|e| CliError::Runtime(e.to_string()))?;
            println!("{}", server.url());
            std::io::stdout().flush().ok();
            server.join();
        }
    }
    Ok(())
}

fn eval(cfg: &RunConfig, args: EvalArgs) -> Result<(), CliError> {
    let mut endpoint = cfg.endpoint.clone().with_env_override();
    if let Some(url) = args.endpoint {
        endpoint.base_url = url;
    }
    if let Some(n) = args.concurrency {
        endpoint.max_in_flight = n;
    }
    if let Some(tag) = args.model_tag {
        endpoint.model_tag = tag;
    }
    if let Some(t) = args.timeout_ms {
        endpoint.timeout_ms = t;
    }
    if let Some(r) = args.max_retries {
        endpoint.max_retries = r;
    }
    let probes = ProbeSet::parse(args.probes.as_deref().unwrap_or(&cfg.probes)).map_err(|e| CliError::Input(e.to_string()))?;
    let options = BatchOptions {
        probes,
        template_id: args.template_id.unwrap_or_else(|| cfg.template_id.clone()),
        score_with_prompt: cfg.score_with_prompt,
    };
    let entries: Vec<ManifestEntry> = read_lines(&args.manifest)?;
    let gold = match args.notes.as_ref().or(cfg.corpus.as_ref()) {
        Some(path) => Some(gold_map(&read_lines::<NoteInput>(path)?)),
        None => None,
    };
    let gateway = Gateway::new(endpoint.clone(), PromptRegistry::default()).map_err(|e| CliError::Input(e.to_string()))?;
    if !gateway.prompts().ids().any(|id| id == options.template_id) {
        return Err(CliError::Input(format!("unknown prompt template {:?}", options.template_id)));
    }
    let pairs = manifest_pairs(&entries);
    let result = run_probe_batch(&gateway, &pairs, &options, gold.as_ref(), &mut |_| {});
    let (outcome, aborted) = match result {
        Ok(o) => (o, None),
        Err(e) => (*e.partial.clone(), Some(e)),
    };
    write_outcome(&cfg.out_dir, &endpoint, &outcome, pairs.len(), aborted.is_some())?;
    match aborted {
        Some(e) => Err(CliError::Runtime(format!("{e}; partial results kept"))),
        None => Ok(()),
    }
}

fn write_outcome(
    out: &Path,
    endpoint: &crate::gateway::EndpointConfig,
    outcome: &BatchOutcome,
    pairs: usize,
    aborted: bool,
) -> Result<(), CliError> {
    let mut records = String::new();
    let mut errors = Vec::new();
    for item in &outcome.items {
        match item {
            ProbeItem::Record(r) => {
                records.push_str(&serialize_record(r).map_err(|e| CliError::Runtime(e.to_string()))?);
                records.push('\n');
            }
            ProbeItem::Failed(m) => errors.push(m.clone()),
        }
    }
    write_file(out, "records.jsonl", &records)?;
    write_file(out, "errors.jsonl", &to_jsonl(&errors)?)?;
    let log = RunLog {
        endpoint: endpoint.base_url.clone(),
        model_tag: endpoint.model_tag.clone(),
        concurrency: endpoint.max_in_flight,
        pairs,
        records: outcome.items.len() - errors.len(),
        errors: errors.len(),
        requests: outcome.stats.requests,
        retries: outcome.stats.retries,
        failures: outcome.stats.failures,
        elapsed_ms: outcome.elapsed_ms,
        aborted,
    };
    write_file(out, "run_log.json", &format!("{}\n", serde_json::to_string_pretty(&log).expect("log serializes")))?;
    eprintln!("{} records, {} errors, {} retries", log.records, log.errors, log.retries);
    Ok(())
}

/// Parses `args` and runs the command, reporting errors on stderr.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
