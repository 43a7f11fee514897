use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{error, info};

use propmine::fixture::{Fixture, FixtureOptions};
use propmine::pipeline::{self, Layout, PipelineConfig};
use propmine::Error;

#[derive(Parser)]
#[command(name = "propmine", version, about = "Mine and rank adjectival properties of named entities")]
struct Cli {
    /// More log output (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    #[arg(short, long, default_value = "propmine.toml")]
    config: PathBuf,

    /// Override any config key, e.g. `--set w2v.dim=50`.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,

    /// Same as `--set run.seed=N`.
    #[arg(long)]
    seed: Option<u64>,

    /// Same as `--set paths.output=DIR`.
    #[arg(long)]
    output: Option<String>,

    /// Training threads for both embedding models.
    #[arg(long)]
    threads: Option<usize>,

    /// Same as `--set rank.top_k=N`.
    #[arg(long)]
    top_k: Option<usize>,

    /// Same as `--set rank.metric=...` (dot or cosine).
    #[arg(long)]
    metric: Option<String>,

    /// Same as `--set expand.k=N`.
    #[arg(long)]
    expand_k: Option<usize>,

    /// Comma-separated models (tfidf, relatedness, w2v, subword); same as
    /// setting `rank.models`.
    #[arg(long, value_delimiter = ',')]
    models: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> propmine::Result<PipelineConfig> {
        let mut overrides = Vec::new();
        if let Some(s) = self.seed {
            overrides.push(format!("run.seed={}", s));
        }
        if let Some(o) = &self.output {
            overrides.push(format!("paths.output={:?}", o));
        }
        if let Some(t) = self.threads {
            overrides.push(format!("w2v.threads={}", t));
            overrides.push(format!("subword.threads={}", t));
        }
        if let Some(k) = self.top_k {
            overrides.push(format!("rank.top_k={}", k));
        }
        if let Some(m) = &self.metric {
            overrides.push(format!("rank.metric={:?}", m));
        }
        if let Some(k) = self.expand_k {
            overrides.push(format!("expand.k={}", k));
        }
        if !self.models.is_empty() {
            let list: Vec<String> = self.models.iter().map(|m| format!("{:?}", m)).collect();
            overrides.push(format!("rank.models=[{}]", list.join(",")));
        }
        overrides.extend(self.set.iter().cloned());
        PipelineConfig::load(&self.config, &overrides)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Tokenize the story corpus into the on-disk cache.
    Prepare(ConfigArgs),
    /// Train models (all configured models unless --models is given).
    Train(ConfigArgs),
    /// Rank candidate adjectives for every described entity.
    Rank(ConfigArgs),
    /// Expand ranked properties through the association resource.
    Expand(ConfigArgs),
    /// Run prepare, train, rank and expand in sequence.
    Run(ConfigArgs),
    /// Convert an embedding model file to word2vec text.
    Export {
        model: PathBuf,
        /// Defaults to the model path with a `.vec` extension.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write the synthetic fixture corpus and a matching config.
    FixtureGen {
        dir: PathBuf,
        #[arg(long, default_value_t = FixtureOptions::default().seed)]
        seed: u64,
        #[arg(long, default_value_t = FixtureOptions::default().stories)]
        stories: usize,
        #[arg(long, default_value_t = FixtureOptions::default().sentences_per_story)]
        sentences: usize,
    },
}

fn run(cmd: Command) -> propmine::Result<()> {
    match cmd {
        Command::Prepare(a) => {
            let cfg = a.load()?;
            let r = pipeline::prepare(&cfg)?;
            println!("{} documents, {} sentences, {} tokens -> {}", r.documents, r.sentences, r.tokens, Layout::new(&cfg).corpus().display());
        }
        Command::Train(a) => {
            let cfg = a.load()?;
            for tag in cfg.models()? {
                println!("{}", pipeline::train_model(&cfg, tag)?.display());
            }
        }
        Command::Rank(a) => {
            let cfg = a.load()?;
            for p in pipeline::rank(&cfg)? {
                println!("{}", p.display());
            }
        }
        Command::Expand(a) => {
            let cfg = a.load()?;
            for p in pipeline::expand(&cfg)? {
                println!("{}", p.display());
            }
        }
        Command::Run(a) => {
            let cfg = a.load()?;
            for paths in pipeline::run_all(&cfg)?.values() {
                for p in paths {
                    println!("{}", p.display());
                }
            }
        }
        Command::Export { model, output } => {
            let out = output.unwrap_or_else(|| model.with_extension("vec"));
            pipeline::export(&model, &out)?;
            println!("{}", out.display());
        }
        Command::FixtureGen { dir, seed, stories, sentences } => {
            let f = Fixture::generate(&FixtureOptions { seed, stories, sentences_per_story: sentences });
            f.write(&dir)?;
            info!("fixture is {} bytes", f.size());
            println!("{}", dir.join(propmine::fixture::FILE_CONFIG).display());
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    if e.is_validation() {
        1
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "info",
        1 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{}", e);
            ExitCode::from(exit_code(&e))
        }
    }
}
