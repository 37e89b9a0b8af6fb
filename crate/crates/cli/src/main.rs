use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use circos_core::analysis::{distributions, stacked_matrix, synthesized_matrix};
use circos_core::recommend::DEFAULT_MAX_ATTEMPTS;
use circos_core::{parse, render_hash, render_svg, Corpus, PlotSession};
use circos_server::ServerConfig;
use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

#[derive(Parser)]
#[command(name = "circos", version, about = "Author circos plots from a corpus of labeled examples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP API.
    Serve(ServeArgs),
    /// Add JSONL or CSV files to a corpus snapshot.
    Import {
        /// Corpus snapshot to update; created if missing.
        #[arg(long, value_name = "FILE", env = "CIRCOS_CORPUS")]
        corpus: PathBuf,
        /// Files ending in `.csv` are read as CSV, anything else as JSONL.
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Print track distributions and both conditional matrices.
    Stats {
        #[arg(long, value_name = "FILE", env = "CIRCOS_CORPUS")]
        corpus: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Render a saved session to SVG without starting the server.
    Render {
        /// A session snapshot as written by `serve`, or a bare session.
        #[arg(long, value_name = "FILE")]
        session_file: PathBuf,
        /// Replace the session's configuration before rendering.
        #[arg(long, value_name = "TOKENS")]
        config: Option<String>,
        /// Defaults to stdout.
        #[arg(short, long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(clap::Args)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1", env = "CIRCOS_HOST")]
    host: String,
    #[arg(long, default_value_t = 8080, env = "CIRCOS_PORT")]
    port: u16,
    #[arg(long, value_name = "FILE", env = "CIRCOS_CORPUS")]
    corpus: Option<PathBuf>,
    /// Directory of per-session JSON snapshots.
    #[arg(long, value_name = "DIR", env = "CIRCOS_SESSIONS")]
    sessions: Option<PathBuf>,
    /// Embedding endpoint. Without it the offline hashing embedder is used.
    #[arg(long, value_name = "URL", env = "CIRCOS_EMBED_URL")]
    embed_url: Option<String>,
    /// Chat-completion endpoint. Without it a template mock answers.
    #[arg(long, value_name = "URL", env = "CIRCOS_GEN_URL")]
    generate_url: Option<String>,
    #[arg(long, env = "CIRCOS_API_KEY", hide_env_values = true)]
    api_key: Option<String>,
    #[arg(long, default_value_t = DEFAULT_MAX_ATTEMPTS)]
    max_attempts: usize,
    /// Provider request timeout in seconds.
    #[arg(long, default_value_t = 60)]
    timeout: u64,
}

/// Snapshot files wrap the session together with its history.
#[derive(Deserialize)]
#[serde(untagged)]
enum SessionFile {
    Snapshot { session: PlotSession },
    Bare(PlotSession),
}

fn load_corpus(path: &Path) -> Result<Corpus> {
    if path.exists() {
        Corpus::load(path).with_context(|| format!("loading {}", path.display()))
    } else {
        Ok(Corpus::new())
    }
}

fn import(corpus_path: &Path, files: &[PathBuf]) -> Result<()> {
    let mut corpus = load_corpus(corpus_path)?;
    let mut rejected = 0;
    for file in files {
        let bytes = std::fs::read(file).with_context(|| format!("reading {}", file.display()))?;
        let report = if file.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
            corpus.import_csv(&bytes)
        } else {
            corpus.import_jsonl(&bytes)
        }
        .with_context(|| format!("importing {}", file.display()))?;
        for r in &report.rejected {
            eprintln!("{}:{}: {}", file.display(), r.line, r.error);
        }
        rejected += report.rejected.len();
        println!("{}: {} accepted, {} rejected", file.display(), report.accepted, report.rejected.len());
    }
    corpus.snapshot(corpus_path)?;
    println!("{} records in {}", corpus.len(), corpus_path.display());
    if rejected > 0 {
        bail!("{rejected} rows rejected");
    }
    Ok(())
}

fn stats(corpus_path: &Path, format: Format) -> Result<()> {
    let corpus = Corpus::load(corpus_path).with_context(|| format!("loading {}", corpus_path.display()))?;
    let dist = distributions(&corpus)?;
    let stacked = stacked_matrix(&corpus)?;
    let synth = synthesized_matrix(&corpus)?;
    match format {
        Format::Json => {
            let out = serde_json::json!({
                "records": corpus.len(),
                "distributions": dist,
                "stacked": stacked,
                "synthesized": synth,
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
        Format::Text => {
            println!("{} records\n", corpus.len());
            println!("{}", dist.to_text());
            println!("stacked\n{}", stacked.to_text_table());
            println!("synthesized\n{}", synth.to_text_table());
        }
    }
    Ok(())
}

fn render(session_file: &Path, config: Option<&str>, out: Option<&Path>) -> Result<()> {
    let text = std::fs::read_to_string(session_file).with_context(|| format!("reading {}", session_file.display()))?;
    let mut session = match serde_json::from_str::<SessionFile>(&text)
        .with_context(|| format!("{} is not a session file", session_file.display()))?
    {
        SessionFile::Snapshot { session } | SessionFile::Bare(session) => session,
    };
    if let Some(c) = config {
        for w in session.set_config(parse(c)?) {
            eprintln!("warning: {w}");
        }
    }
    let svg = render_svg(&session)?;
    match out {
        Some(path) => {
            std::fs::write(path, &svg).with_context(|| format!("writing {}", path.display()))?;
            eprintln!("{} ({})", path.display(), render_hash(&svg));
        }
        None => std::io::stdout().write_all(svg.as_bytes())?,
    }
    Ok(())
}

fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    match Cli::parse().command {
        Command::Serve(a) => {
            let config = ServerConfig {
                host: a.host,
                port: a.port,
                corpus_path: a.corpus,
                session_dir: a.sessions,
                embed_url: a.embed_url,
                generate_url: a.generate_url,
                api_key: a.api_key,
                max_attempts: a.max_attempts,
                provider_timeout: Duration::from_secs(a.timeout),
            };
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(circos_server::serve(config))?;
            Ok(())
        }
        Command::Import { corpus, files } => import(&corpus, &files),
        Command::Stats { corpus, format } => stats(&corpus, format),
        Command::Render { session_file, config, out } => render(&session_file, config.as_deref(), out.as_deref()),
    }
}
