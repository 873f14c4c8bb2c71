mod config;
mod manifest;
mod report;

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use tgforge_analysis::{pipeline, read_dump, Pooling};
use tgforge_core::datasetgen::{assign_splits, write_corpus, Generator, RuleSeq};
use tgforge_core::evalharness::score_file;
use tgforge_core::lexicon::Number;
use tgforge_core::rng::derive_seed;
use tgforge_core::syntax::{build_clause, render, Binding, Clause, TemplateSet};
use tgforge_core::transforms::{apply_rule, compose, CompositionStatus};
use tgforge_core::{Lexicon, TransformId};

use config::{load_file_config, resolve_gen_spec, resolve_seed, AnalyzeConfig, ConfigError, FileConfig};
use manifest::write_manifest;

#[derive(Parser)]
#[command(name = "tgforge", version, about = "Transformational grammar datasets, scoring and representation analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args, Clone)]
struct Global {
    /// Master seed (falls back to the config file, then TGFORGE_SEED).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Lexicon TSV replacing the shipped one.
    #[arg(long, global = true)]
    lexicon: Option<PathBuf>,
    /// Template TSV replacing the shipped set.
    #[arg(long, global = true)]
    templates: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// error, warn, info, debug or trace.
    #[arg(long, global = true)]
    log_level: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the single-rule and nested corpora, splits and prompts.
    Generate {
        /// Generation spec (TOML); overrides the config's [generate] table.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply one rule to a template instance and print the result.
    Transform {
        #[arg(long)]
        rule: TransformId,
        #[command(flatten)]
        instance: Instance,
    },
    /// Apply a rule sequence (e.g. C+H) and print every step.
    Compose {
        #[arg(long)]
        rules: RuleSeq,
        #[command(flatten)]
        instance: Instance,
    },
    /// Score a prediction file against gold records.
    Evaluate {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Representation analyses over activation dumps.
    Analyze {
        #[arg(value_enum)]
        kind: AnalysisKind,
        /// Dump file(s); `trend` takes one per checkpoint.
        #[arg(long = "in", required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        layer: Option<usize>,
        #[arg(long)]
        ridge: Option<f64>,
        #[arg(long, value_enum)]
        pooling: Option<PoolingArg>,
        #[arg(long)]
        top: Option<usize>,
    },
    /// Merge evaluation and analysis outputs into a markdown summary.
    Report {
        #[arg(long = "in", required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Instance {
    /// Template id from the template set.
    #[arg(long = "text-template", alias = "template")]
    template: String,
    /// Slot binding `slot=lemma`, or `slot=lemma:sg` / `slot=lemma:pl`.
    /// Unbound slots are filled from the seed.
    #[arg(long = "bind", value_name = "SLOT=LEMMA")]
    bindings: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum AnalysisKind {
    Diff,
    Cluster,
    Probe,
    Ablation,
    Trend,
}

#[derive(Clone, Copy, ValueEnum)]
enum PoolingArg {
    Mean,
    LastToken,
}

impl From<PoolingArg> for Pooling {
    fn from(p: PoolingArg) -> Self {
        match p {
            PoolingArg::Mean => Pooling::Mean,
            PoolingArg::LastToken => Pooling::LastToken,
        }
    }
}

struct Resources {
    lexicon: Lexicon,
    templates: TemplateSet,
    lexicon_path: Option<PathBuf>,
    templates_path: Option<PathBuf>,
}

impl Resources {
    fn load(global: &Global, file: &FileConfig) -> Result<Self> {
        let lexicon_path = global.lexicon.clone().or_else(|| file.lexicon.clone());
        let templates_path = global.templates.clone().or_else(|| file.templates.clone());
        let lexicon = match &lexicon_path {
            Some(p) => Lexicon::load(p).with_context(|| format!("loading lexicon {}", p.display()))?,
            None => Lexicon::shipped(),
        };
        let templates = match &templates_path {
            Some(p) => TemplateSet::load(p).with_context(|| format!("loading templates {}", p.display()))?,
            None => TemplateSet::shipped(),
        };
        Ok(Resources { lexicon, templates, lexicon_path, templates_path })
    }

    fn input_files(&self) -> Vec<PathBuf> {
        self.lexicon_path.iter().chain(&self.templates_path).cloned().collect()
    }
}

fn parse_binding(s: &str) -> Result<(String, Binding)> {
    let Some((slot, value)) = s.split_once('=') else {
        return Err(ConfigError(format!("--bind `{s}`: expected SLOT=LEMMA")).into());
    };
    let (lemma, number) = match value.rsplit_once(':') {
        Some((l, "sg")) => (l, Some(Number::Sg)),
        Some((l, "pl")) => (l, Some(Number::Pl)),
        _ => (value, None),
    };
    Ok((slot.to_string(), Binding { lemma: lemma.to_string(), number }))
}

fn instantiate(res: &Resources, inst: &Instance, seed: u64) -> Result<Clause> {
    let template = res.templates.get(&inst.template)?;
    let mut bindings: HashMap<String, Binding> =
        inst.bindings.iter().map(|b| parse_binding(b)).collect::<Result<_>>()?;
    for slot in &template.slots {
        if !bindings.contains_key(&slot.name) {
            let pick = res.lexicon.sample_words(&slot.filter, 1, derive_seed(seed, &slot.name))?;
            bindings.insert(slot.name.clone(), Binding { lemma: pick[0].lemma.clone(), number: None });
        }
    }
    Ok(build_clause(&res.lexicon, template, &bindings)?)
}

fn init_threads(jobs: Option<usize>) -> Result<()> {
    if let Some(n) = jobs {
        if n == 0 {
            return Err(ConfigError("jobs must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

#[derive(Serialize)]
struct AnalyzeRun<'a> {
    kind: AnalysisKind,
    seed: u64,
    #[serde(flatten)]
    params: &'a AnalyzeConfig,
}

fn run(cli: Cli) -> Result<()> {
    let file = load_file_config(cli.global.config.as_deref())?;
    let level = cli.global.log_level.clone().or_else(|| file.log_level.clone()).unwrap_or_else(|| "warn".into());
    let level: tracing::Level =
        level.parse().map_err(|_| ConfigError(format!("log_level: unknown level `{level}`")))?;
    tracing_subscriber::fmt().with_max_level(level).with_writer(std::io::stderr).init();
    init_threads(cli.global.jobs.or(file.jobs))?;
    let global = &cli.global;
    match cli.command {
        Command::Generate { spec, out } => {
            let gen_spec = resolve_gen_spec(&file, spec.as_deref(), global.seed)?;
            let res = Resources::load(global, &file)?;
            let generator = Generator::new(&res.lexicon, &res.templates).with_dedup(gen_spec.dedup);
            tracing::info!(seed = gen_spec.seed, "generating");
            let mut corpus = generator.generate_corpus(&gen_spec)?;
            assign_splits(corpus.records_mut(), &gen_spec.split)?;
            fs::create_dir_all(&out)?;
            let files = write_corpus(&out, &corpus, &gen_spec.split, generator.compatibility())?;
            let mut inputs = res.input_files();
            inputs.extend(spec);
            write_manifest(&out, "generate", &gen_spec, &inputs)?;
            println!("wrote {} records in {} files to {}", corpus.records().count(), files.len(), out.display());
        }
        Command::Transform { rule, instance } => {
            let seed = resolve_seed(global.seed, file.seed)?;
            let res = Resources::load(global, &file)?;
            let clause = instantiate(&res, &instance, seed)?;
            let output = apply_rule(rule, &clause)?;
            println!("{}", render(&res.lexicon, &clause)?.text);
            println!("{}", render(&res.lexicon, &output)?.text);
        }
        Command::Compose { rules, instance } => {
            let seed = resolve_seed(global.seed, file.seed)?;
            let res = Resources::load(global, &file)?;
            let clause = instantiate(&res, &instance, seed)?;
            let result = compose(&rules.0, &clause);
            println!("{}", render(&res.lexicon, &clause)?.text);
            for mid in &result.intermediates {
                println!("{}", render(&res.lexicon, mid)?.text);
            }
            println!("{}", render(&res.lexicon, &result.final_clause)?.text);
            if let CompositionStatus::Absorbed(step) = result.status {
                bail!("{} does not apply at step {step}", rules.0[step]);
            }
        }
        Command::Evaluate { gold, pred, out } => {
            let report = score_file(&pred, &gold)?;
            fs::create_dir_all(&out)?;
            fs::write(out.join("report.md"), report.to_markdown())?;
            write_json(&out.join("report.json"), &report.to_json())?;
            write_manifest(&out, "evaluate", &serde_json::json!({}), &[gold, pred])?;
            print!("{}", report.to_markdown());
        }
        Command::Analyze { kind, inputs, out, k, layer, ridge, pooling, top } => {
            let mut params = file.analyze.clone();
            params.k = k.unwrap_or(params.k);
            params.layer = layer.or(params.layer);
            params.ridge = ridge.unwrap_or(params.ridge);
            params.pooling = pooling.map(Pooling::from).unwrap_or(params.pooling);
            params.top = top.unwrap_or(params.top);
            if params.k == 0 {
                return Err(ConfigError("k must be at least 1".into()).into());
            }
            if params.ridge.is_nan() || params.ridge < 0.0 {
                return Err(ConfigError("ridge must be non-negative".into()).into());
            }
            let seed = resolve_seed(global.seed, file.seed)?;
            let dumps = inputs
                .iter()
                .map(|p| read_dump(p).with_context(|| format!("reading {}", p.display())))
                .collect::<Result<Vec<_>>>()?;
            if !matches!(kind, AnalysisKind::Trend) && dumps.len() != 1 {
                bail!("this analysis takes exactly one --in dump");
            }
            let artifacts = match kind {
                AnalysisKind::Diff => pipeline::analyze_diff(&dumps[0], params.layer, params.pooling)?,
                AnalysisKind::Cluster => {
                    pipeline::analyze_cluster(&dumps[0], params.layer, params.pooling, params.k, seed)?
                }
                AnalysisKind::Probe => pipeline::analyze_probe(&dumps[0], params.pooling, params.ridge)?,
                AnalysisKind::Ablation => pipeline::analyze_ablation(&dumps[0], params.top)?,
                AnalysisKind::Trend => pipeline::analyze_trend(&dumps, params.pooling)?,
            };
            fs::create_dir_all(&out)?;
            let name = serde_json::to_value(kind)?.as_str().unwrap_or("analysis").to_string();
            write_json(&out.join(format!("{name}.json")), &artifacts.summary)?;
            for (file_name, contents) in &artifacts.files {
                fs::write(out.join(file_name), contents)?;
            }
            write_manifest(&out, "analyze", &AnalyzeRun { kind, seed, params: &params }, &inputs)?;
            println!("{}", serde_json::to_string_pretty(&artifacts.summary)?);
        }
        Command::Report { inputs, out } => {
            let md = report::build_report(&inputs)?;
            fs::create_dir_all(&out)?;
            fs::write(out.join("summary.md"), &md)?;
            write_manifest(&out, "report", &serde_json::json!({}), &[])?;
            print!("{md}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<ConfigError>().is_some() => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
