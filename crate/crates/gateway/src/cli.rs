use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use veilgate_core::chat::{ChatClient, EchoClient, HttpChatClient, DEFAULT_TIMEOUT};
use veilgate_core::detection::{
    drop_placeholder_overlaps, DetectorMode, DetectorSettings, LlmDetectorSettings,
};
use veilgate_core::eval::{
    render_table1, render_table2, run_evaluation, write_reports, DatasetRef, EmbeddingProvider, EvalOptions,
    HttpEmbeddings, LiveDetector, MatchMode, RecordDetector, ScriptedDetector,
};
use veilgate_core::masking::{mask, unmask, Vault};
use veilgate_core::synthgen::{build_dataset, read_jsonl, FakeTextSource, Manifest, MANIFEST_FILE};

use crate::config::{GatewayConfig, ECHO_UPSTREAM};
use crate::service::Gateway;

#[derive(Debug, Parser)]
#[command(name = "veilgate", version, about = "Mask PII in legal prompts before they reach a hosted model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenerateMode {
    Offline,
    Llm,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the HTTP gateway.
    Serve {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Mask a text file against a vault file (created if missing).
    Mask {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        vault: PathBuf,
        /// Gateway config whose detector settings to use; pattern rules otherwise.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Restore placeholders in a text file from a vault file.
    Unmask {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        vault: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a synthetic prompt dataset with gold annotations.
    Generate {
        #[arg(long, default_value_t = 50)]
        n: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = GenerateMode::Offline)]
        mode: GenerateMode,
        #[arg(long)]
        out: PathBuf,
        /// Chat-completions base URL for `--mode llm`.
        #[arg(long)]
        upstream: Option<String>,
        #[arg(long, default_value = "default")]
        model: String,
    },
    /// Score detectors on a dataset and render the report tables.
    Evaluate {
        #[arg(long)]
        dataset: PathBuf,
        /// `[NAME=]SPEC` where SPEC is gold, script:FILE, pattern, rules:FILE,
        /// ner-service:URL, llm:MODEL@URL or config:FILE. Repeatable.
        #[arg(long = "detector", required = true)]
        detectors: Vec<String>,
        /// Chat-completions base URL or `echo`; similarity is skipped without it.
        #[arg(long)]
        upstream: Option<String>,
        #[arg(long, default_value = "default")]
        model: String,
        /// Embeddings base URL; token-frequency vectors otherwise.
        #[arg(long)]
        embeddings: Option<String>,
        #[arg(long, default_value = "default")]
        embedding_model: String,
        /// Match mentions by span instead of by distinct surface.
        #[arg(long)]
        span_strict: bool,
        #[arg(long, default_value_t = DEFAULT_TIMEOUT.as_secs())]
        timeout_secs: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

pub fn run(cli: Cli, out: &mut dyn Write) -> anyhow::Result<()> {
    match cli.command {
        Command::Serve { config } => serve(config.as_deref()),
        Command::Mask {
            input,
            vault,
            config,
            out: target,
        } => mask_file(&input, &vault, config.as_deref(), target.as_deref(), out),
        Command::Unmask {
            input,
            vault,
            out: target,
        } => unmask_file(&input, &vault, target.as_deref(), out),
        Command::Generate {
            n,
            seed,
            mode,
            out: dir,
            upstream,
            model,
        } => generate(n, seed, mode, &dir, upstream.as_deref(), &model, out),
        Command::Evaluate {
            dataset,
            detectors,
            upstream,
            model,
            embeddings,
            embedding_model,
            span_strict,
            timeout_secs,
            out: dir,
        } => {
            if timeout_secs == 0 {
                bail!("--timeout-secs must be greater than 0");
            }
            let timeout = Duration::from_secs(timeout_secs);
            let detectors = detectors
                .iter()
                .map(|spec| parse_detector(spec, timeout))
                .collect::<anyhow::Result<Vec<_>>>()?;
            let upstream = upstream.map(|u| chat_client(&u, &model, timeout)).transpose()?;
            let embeddings = embeddings
                .map(|url| HttpEmbeddings::new(&url, embedding_model, timeout))
                .transpose()?;
            let matching = if span_strict { MatchMode::Span } else { MatchMode::Surface };
            evaluate(
                &dataset,
                &detectors,
                upstream.as_deref(),
                embeddings.as_ref().map(|e| e as &dyn EmbeddingProvider),
                matching,
                &dir,
                out,
            )
        }
    }
}

fn serve(config: Option<&Path>) -> anyhow::Result<()> {
    let config = GatewayConfig::load(config)?;
    let listen = config.listen.clone();
    let gateway = Arc::new(Gateway::new(config)?);
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(&listen)
            .await
            .with_context(|| format!("binding {listen}"))?;
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
            tracing::info!("shutting down");
        };
        crate::server::serve(listener, gateway.clone(), shutdown).await?;
        anyhow::Ok(())
    })?;
    drop(runtime);
    drop(gateway);
    Ok(())
}

fn read_text(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(text: &str, target: Option<&Path>, out: &mut dyn Write) -> anyhow::Result<()> {
    match target {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => Ok(out.write_all(text.as_bytes())?),
    }
}

fn mask_file(
    input: &Path,
    vault_path: &Path,
    config: Option<&Path>,
    target: Option<&Path>,
    out: &mut dyn Write,
) -> anyhow::Result<()> {
    let text = read_text(input)?;
    let settings = match config {
        Some(path) => GatewayConfig::load(Some(path))?.detector,
        None => DetectorSettings::default(),
    };
    let detector = settings.build(DEFAULT_TIMEOUT)?;
    let mut vault = if vault_path.exists() {
        Vault::load(vault_path)?
    } else {
        Vault::new(uuid::Uuid::new_v4().to_string())
    };
    let detection = detector.detect(&text)?;
    let mentions = drop_placeholder_overlaps(&text, detection.mentions);
    let result = mask(&text, &mentions, &mut vault)?;
    for warning in detection.warnings.iter().chain(&result.warnings) {
        tracing::warn!("{warning}");
    }
    vault.save(vault_path)?;
    emit(&result.masked_text, target, out)
}

fn unmask_file(input: &Path, vault_path: &Path, target: Option<&Path>, out: &mut dyn Write) -> anyhow::Result<()> {
    let text = read_text(input)?;
    let vault = Vault::load(vault_path)?;
    let result = unmask(&text, &vault);
    if !result.unresolved.is_empty() {
        tracing::warn!(unresolved = ?result.unresolved, "placeholders without a vault entry");
    }
    emit(&result.text, target, out)
}

fn chat_client(upstream: &str, model: &str, timeout: Duration) -> anyhow::Result<Arc<dyn ChatClient>> {
    if upstream == ECHO_UPSTREAM {
        return Ok(Arc::new(EchoClient));
    }
    Ok(Arc::new(HttpChatClient::new(upstream, model, timeout)?))
}

fn generate(
    n: usize,
    seed: u64,
    mode: GenerateMode,
    dir: &Path,
    upstream: Option<&str>,
    model: &str,
    out: &mut dyn Write,
) -> anyhow::Result<()> {
    let (source, client) = match mode {
        GenerateMode::Offline => (FakeTextSource::Offline, None),
        GenerateMode::Llm => {
            let url = upstream.ok_or_else(|| anyhow!("--mode llm needs --upstream"))?;
            (FakeTextSource::Llm, Some(chat_client(url, model, DEFAULT_TIMEOUT)?))
        }
    };
    let dataset = build_dataset(n, seed, source, client.as_deref())?;
    dataset.write(dir)?;
    writeln!(
        out,
        "wrote {} records with {} gold entities to {}",
        dataset.manifest.records,
        dataset.manifest.entities,
        dir.display()
    )?;
    Ok(())
}

/// Parses `[NAME=]SPEC` into a named detector.
pub fn parse_detector(arg: &str, timeout: Duration) -> anyhow::Result<Box<dyn RecordDetector>> {
    let (name, spec) = match arg.split_once('=') {
        Some((name, spec)) if !name.is_empty() => (name.to_string(), spec),
        _ => (arg.to_string(), arg),
    };
    let (kind, value) = spec.split_once(':').unwrap_or((spec, ""));
    let live = |settings: DetectorSettings| -> anyhow::Result<Box<dyn RecordDetector>> {
        Ok(Box::new(LiveDetector::new(name.clone(), settings.build(timeout)?)))
    };
    match kind {
        "gold" => Ok(Box::new(ScriptedDetector::gold(name))),
        "script" => {
            let raw = read_text(Path::new(value))?;
            Ok(Box::new(ScriptedDetector::from_jsonl(name, &raw)?))
        }
        "pattern" => live(DetectorSettings::default()),
        "rules" => live(DetectorSettings {
            rules_file: Some(PathBuf::from(value)),
            ..Default::default()
        }),
        "ner-service" => live(DetectorSettings {
            mode: DetectorMode::NerService,
            ner_service_url: Some(value.to_string()),
            ..Default::default()
        }),
        "llm" => {
            let (model, url) = value
                .split_once('@')
                .ok_or_else(|| anyhow!("llm detector spec is llm:MODEL@URL, got {spec:?}"))?;
            live(DetectorSettings {
                mode: DetectorMode::Llm,
                llm: Some(LlmDetectorSettings {
                    url: url.to_string(),
                    model: model.to_string(),
                    temperature: None,
                    system_prompt: None,
                }),
                ..Default::default()
            })
        }
        "config" => live(GatewayConfig::load(Some(Path::new(value)))?.detector),
        other => bail!("unknown detector kind {other:?} in {arg:?}"),
    }
}

fn evaluate(
    dataset: &Path,
    detectors: &[Box<dyn RecordDetector>],
    upstream: Option<&dyn ChatClient>,
    embeddings: Option<&dyn EmbeddingProvider>,
    matching: MatchMode,
    dir: &Path,
    out: &mut dyn Write,
) -> anyhow::Result<()> {
    let records = read_jsonl(dataset)?;
    let manifest_path = dataset.with_file_name(MANIFEST_FILE);
    let manifest: Option<Manifest> = match std::fs::read_to_string(&manifest_path) {
        Ok(raw) => Some(serde_json::from_str(&raw).with_context(|| format!("parsing {}", manifest_path.display()))?),
        Err(_) => None,
    };
    let options = EvalOptions {
        matching,
        dataset: DatasetRef {
            source: Some(dataset.display().to_string()),
            manifest,
        },
        embeddings,
    };
    let reports: Vec<_> = detectors
        .iter()
        .map(|d| run_evaluation(&records, d.as_ref(), upstream, &options))
        .collect();
    write_reports(dir, &reports)?;

    let grid: Vec<_> = reports.iter().map(|r| (r.detector.as_str(), &r.per_label)).collect();
    out.write_all(render_table1(&grid).as_bytes())?;
    writeln!(out)?;
    let sims: Vec<_> = reports.iter().map(|r| (r.detector.as_str(), r.similarity.as_ref())).collect();
    out.write_all(render_table2(&sims).as_bytes())?;
    for report in &reports {
        writeln!(
            out,
            "{}: overall P={:.4} R={:.4} F1={:.4} ({} records, {} skipped)",
            report.detector,
            report.overall.precision,
            report.overall.recall,
            report.overall.f1,
            report.records.len(),
            report.skipped.len()
        )?;
    }
    Ok(())
}
