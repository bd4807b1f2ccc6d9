use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use proctext_core::metrics::load_pairs;
use proctext_core::pipeline::{
    load_corpus, map_titles, run_pipeline, write_atomic, PipelineConfig, RunOptions, Stage,
};
use proctext_core::Error;

#[derive(Parser)]
#[command(name = "proctext", version, about = "Recipe corpus mining and counterfactual rewrite evaluation")]
struct Cli {
    /// Log more (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse the corpus into proto-actions and split off evaluation recipes.
    Parse(Common),
    /// Mine pivot actions per dish pair and export the annotation queue.
    Mine(Common),
    /// Estimate order constraints for insertion pivots.
    Constraints(Common),
    /// Score generated recipes.
    Evaluate(Common),
    /// Render the evaluation report as text tables.
    Report(Common),
    /// Run the stages listed in the config (all five by default).
    Run(Common),
    /// Assign dishes to unlabeled recipes by title (experimental).
    MapTitles(Common),
}

#[derive(Args)]
struct Common {
    /// Pipeline config JSON; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    glossary: Option<PathBuf>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long)]
    pairs: Option<PathBuf>,
    /// Evaluation instances (JSONL) holding the generated recipes.
    #[arg(long)]
    generated: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Abort on the first malformed corpus line.
    #[arg(long)]
    strict: bool,
    /// Skip stages whose artifacts already exist.
    #[arg(long)]
    resume: bool,
}

impl Common {
    fn config(&self) -> Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(path) => PipelineConfig::load(path)
                .with_context(|| format!("loading config {}", path.display()))?,
            None => PipelineConfig::default(),
        };
        let from_cli = |p: &Path| -> Result<PathBuf> {
            if cfg.base_dir.as_os_str().is_empty() || p.is_absolute() {
                Ok(p.to_path_buf())
            } else {
                Ok(std::env::current_dir()?.join(p))
            }
        };
        for (slot, flag) in [
            (&mut cfg.corpus, &self.corpus),
            (&mut cfg.glossary, &self.glossary),
            (&mut cfg.embeddings, &self.embeddings),
            (&mut cfg.pairs, &self.pairs),
            (&mut cfg.generated, &self.generated),
        ] {
            if let Some(p) = flag {
                *slot = Some(from_cli(p)?);
            }
        }
        if let Some(p) = &self.out_dir {
            cfg.out_dir = from_cli(p)?;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        cfg.strict |= self.strict;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn stages(cmd: &Command, cfg: &PipelineConfig) -> Vec<Stage> {
    match cmd {
        Command::Parse(_) => vec![Stage::Parse],
        Command::Mine(_) => vec![Stage::Mine],
        Command::Constraints(_) => vec![Stage::Constraints],
        Command::Evaluate(_) => vec![Stage::Evaluate],
        Command::Report(_) => vec![Stage::Report],
        Command::Run(_) => cfg.stages.clone(),
        Command::MapTitles(_) => vec![],
    }
}

fn map_titles_cmd(cfg: &PipelineConfig) -> Result<()> {
    let corpus_path = cfg.input("corpus", &cfg.corpus)?;
    let (mut corpus, issues) = load_corpus(&corpus_path, cfg.strict)?;
    if !issues.is_empty() {
        log::warn!("{} corpus lines skipped", issues.len());
    }
    let mut dishes: Vec<String> = corpus.by_dish.keys().cloned().collect();
    if let Some(pairs) = &cfg.pairs {
        for p in load_pairs(cfg.resolve(pairs))? {
            dishes.push(p.base_dish);
            dishes.push(p.target_dish);
        }
    }
    dishes.sort();
    dishes.dedup();
    let matches = map_titles(corpus.recipes.values(), &dishes);
    let mut lines = String::new();
    for m in &matches {
        lines.push_str(&serde_json::to_string(m)?);
        lines.push('\n');
        if let Some(r) = corpus.recipes.get_mut(&m.recipe_id) {
            r.dish = Some(m.dish.clone());
        }
    }
    let out = cfg.resolve(&cfg.out_dir);
    write_atomic(&out.join("title_map.jsonl"), lines.as_bytes())?;
    let corpus = proctext_core::pipeline::Corpus::from_recipes(corpus.recipes.into_values())?;
    corpus.write_jsonl(out.join("mapped_corpus.jsonl"))?;
    println!(
        "mapped {} of {} unlabeled recipes; wrote {}",
        matches.len(),
        corpus.stats().unlabeled + matches.len(),
        out.display()
    );
    Ok(())
}

fn run(cli: &Cli) -> Result<(), (ExitCode, anyhow::Error)> {
    let common = match &cli.command {
        Command::Parse(c)
        | Command::Mine(c)
        | Command::Constraints(c)
        | Command::Evaluate(c)
        | Command::Report(c)
        | Command::Run(c)
        | Command::MapTitles(c) => c,
    };
    let cfg = common.config().map_err(|e| (ExitCode::from(1), e))?;
    if let Command::MapTitles(_) = cli.command {
        return map_titles_cmd(&cfg).map_err(|e| (ExitCode::from(2), e));
    }
    let opts = RunOptions {
        resume: common.resume,
    };
    match run_pipeline(&cfg, &stages(&cli.command, &cfg), opts) {
        Ok(summary) => {
            for s in &summary.executed {
                println!("{s}: done");
            }
            for s in &summary.skipped {
                println!("{s}: skipped (artifacts present)");
            }
            Ok(())
        }
        Err(e @ Error::Stage { .. }) => Err((ExitCode::from(2), e.into())),
        Err(e) => Err((ExitCode::from(1), e.into())),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, e)) => {
            eprintln!("error: {e:#}");
            code
        }
    }
}
