//! Operator commands. Every command delegates to the library; [`run`] is
//! what the `pagedex` binary calls.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use crate::collation::{builtin_rules, Collator, TailoringRuleSet};
use crate::error::{Error, Result};
use crate::prefix::{parse_wordlist, prefix_stats, stats_tsv, PrefixTree};
use crate::service::{Engine, ServiceConfig};
use crate::store::{read_language_file, IndexKind, IndexState, Store};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_IO: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "pagedex", version, about = "Index and serve scanned dictionaries")]
pub struct Cli {
    /// Data directory (overrides the config file and PAGEDEX_DATA_DIR).
    #[arg(long, global = true)]
    pub data_dir: Option<PathBuf>,
    /// Service configuration file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Sparse,
    Full,
}

impl From<KindArg> for IndexKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Sparse => IndexKind::Sparse,
            KindArg::Full => IndexKind::Full,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StateArg {
    SparseIndexed,
    FullyIndexed,
    LocationIndexed,
    Annotated,
    Digitized,
}

impl From<StateArg> for IndexState {
    fn from(s: StateArg) -> Self {
        match s {
            StateArg::SparseIndexed => IndexState::SparseIndexed,
            StateArg::FullyIndexed => IndexState::FullyIndexed,
            StateArg::LocationIndexed => IndexState::LocationIndexed,
            StateArg::Annotated => IndexState::Annotated,
            StateArg::Digitized => IndexState::Digitized,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Register a dictionary from its manifest and load the index files it names.
    Ingest { manifest: PathBuf },
    /// Register a language from a TOML description.
    AddLanguage { file: PathBuf },
    /// Load a sparse or full index file into a registered dictionary.
    Index {
        dictionary: String,
        file: PathBuf,
        #[arg(long, value_enum)]
        kind: KindArg,
    },
    /// Move a dictionary to the next index state.
    Advance {
        dictionary: String,
        #[arg(value_enum)]
        state: StateArg,
    },
    /// Check a dictionary's stored indexes.
    Validate {
        dictionary: String,
        /// Fail on warnings too.
        #[arg(long)]
        strict: bool,
    },
    /// Prefix bucket statistics of a wordlist, as TSV.
    PrefixStats {
        wordlist: PathBuf,
        /// Prefix length in collation units; repeat for several rows.
        #[arg(long, required = true)]
        size: Vec<usize>,
        #[command(flatten)]
        collation: CollationArgs,
    },
    /// Prefix tree buckets after splitting those above the tolerance, as TSV.
    Split {
        wordlist: PathBuf,
        #[arg(long)]
        tolerance: usize,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[command(flatten)]
        collation: CollationArgs,
    },
    /// Promote confirmed feedback into full indexes.
    Sweep { dictionary: Option<String> },
    /// Serve the HTTP API.
    Serve {
        #[arg(long)]
        port: Option<u16>,
    },
}

#[derive(Debug, clap::Args)]
pub struct CollationArgs {
    /// Use the shipped tailoring for this language code.
    #[arg(long, conflicts_with = "tailoring")]
    pub lang: Option<String>,
    /// Tailoring rule file.
    #[arg(long)]
    pub tailoring: Option<PathBuf>,
}

impl CollationArgs {
    fn collator(&self) -> Result<Arc<Collator>> {
        let rules = match (&self.lang, &self.tailoring) {
            (_, Some(path)) => TailoringRuleSet::parse(&read(path)?)?,
            (Some(code), None) => builtin_rules(code).ok_or_else(|| Error::UnknownLanguage(code.clone()))?,
            (None, None) => TailoringRuleSet::untailored(""),
        };
        Ok(Arc::new(Collator::new(rules)?))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CommandOutcome {
    pub exit_code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CommandOutcome {
    fn ok(stdout: String) -> Self {
        CommandOutcome {
            exit_code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn from_error(e: &Error) -> Self {
        CommandOutcome {
            exit_code: if e.is_validation() { EXIT_VALIDATION } else { EXIT_IO },
            stdout: String::new(),
            stderr: format!("error [{}]: {e}\n", e.code()),
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> CommandOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_IO } else { EXIT_OK };
            let text = e.render().to_string();
            return if e.use_stderr() {
                CommandOutcome {
                    exit_code: code,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                CommandOutcome::ok(text)
            };
        }
    };
    execute(cli)
}

pub fn execute(cli: Cli) -> CommandOutcome {
    match dispatch(cli) {
        Ok(outcome) => outcome,
        Err(e) => CommandOutcome::from_error(&e),
    }
}

fn config_for(cli: &Cli) -> Result<ServiceConfig> {
    let mut config = ServiceConfig::load(cli.config.as_deref())?;
    config.apply_env(|k| std::env::var(k).ok())?;
    if let Some(dir) = &cli.data_dir {
        config.data_dir = dir.clone();
    }
    Ok(config)
}

fn dispatch(cli: Cli) -> Result<CommandOutcome> {
    let config = config_for(&cli)?;
    let open = || Store::open(&config.data_dir);
    match cli.command {
        Command::Ingest { manifest } => {
            let mut store = open()?;
            let reports = store.ingest_manifest_file(&manifest)?;
            let mut out = String::from("kind\tentries\tviolations\tactivated\n");
            let mut failed = false;
            for r in &reports {
                failed |= !r.violations.is_empty();
                let _ = writeln!(out, "{}", report_row(r));
            }
            Ok(outcome(out, failed))
        }
        Command::AddLanguage { file } => {
            let mut store = open()?;
            let (language, rules, words) = read_language_file(&file)?;
            let entry = store.register_language(language, rules, words)?;
            let words = entry.prefix_tree.as_ref().map_or(0, |t| t.word_count());
            Ok(CommandOutcome::ok(format!("{}\t{}\n", entry.language.code, words)))
        }
        Command::Index { dictionary, file, kind } => {
            let mut store = open()?;
            let report = store.ingest_index(&dictionary, &read(&file)?, kind.into())?;
            let failed = !report.violations.is_empty();
            Ok(outcome(
                format!("kind\tentries\tviolations\tactivated\n{}\n", report_row(&report)),
                failed,
            ))
        }
        Command::Advance { dictionary, state } => {
            let mut store = open()?;
            let manifest = store.advance_state(&dictionary, state.into())?;
            Ok(CommandOutcome::ok(format!(
                "{}\t{:?}\n",
                manifest.id, manifest.index_state
            )))
        }
        Command::Validate { dictionary, strict } => {
            let store = open()?;
            let report = store.validate(&dictionary)?;
            let pending: Vec<String> = store
                .canonical_files(&dictionary)?
                .get("sparse.pending.tsv")
                .map(|t| {
                    t.lines()
                        .map(|l| l.split('\t').next().unwrap_or("").to_string())
                        .collect()
                })
                .unwrap_or_default();
            let mut out = String::from("kind\tposition\tdetail\n");
            for &i in &report.violations {
                let detail = match (pending.get(i), pending.get(i + 1)) {
                    (Some(a), Some(b)) => format!("{a} sorts after {b}"),
                    _ => String::new(),
                };
                let _ = writeln!(out, "violation\t{i}\t{detail}");
            }
            for w in &report.warnings {
                let _ = writeln!(out, "warning\t\t{w}");
            }
            let failed = !report.violations.is_empty() || (strict && !report.warnings.is_empty());
            Ok(outcome(out, failed))
        }
        Command::PrefixStats {
            wordlist,
            size,
            collation,
        } => {
            let collator = collation.collator()?;
            let words = parse_wordlist(&read(&wordlist)?);
            let rows: Vec<_> = size.iter().map(|&s| prefix_stats(&words, s, &collator)).collect();
            Ok(CommandOutcome::ok(stats_tsv(&rows)))
        }
        Command::Split {
            wordlist,
            tolerance,
            depth,
            collation,
        } => {
            let collator = collation.collator()?;
            let words = parse_wordlist(&read(&wordlist)?);
            let tree = PrefixTree::build(&words, depth, collator)?.split_oversized(tolerance);
            let mut out = String::from("prefix\tcount\n");
            for b in tree.buckets() {
                let _ = writeln!(out, "{}\t{}", b.prefix, b.count);
            }
            Ok(CommandOutcome::ok(out))
        }
        Command::Sweep { dictionary } => {
            let mut store = open()?;
            let ids: Vec<String> = match dictionary {
                Some(id) => vec![id],
                None => store.dictionaries().map(|d| d.id().to_string()).collect(),
            };
            let mut out = String::from("dictionary\tword\tpage\n");
            for id in ids {
                for p in store.sweep(&id)? {
                    let _ = writeln!(out, "{id}\t{}\t{}", p.word, p.page);
                }
            }
            Ok(CommandOutcome::ok(out))
        }
        Command::Serve { port } => {
            if !config.data_dir.is_dir() {
                return Err(Error::io(
                    &config.data_dir,
                    std::io::Error::new(std::io::ErrorKind::NotFound, "data directory does not exist"),
                ));
            }
            let store = open()?;
            let port = port.unwrap_or(config.port);
            let engine = Arc::new(Engine::new(store, &config));
            let runtime = tokio::runtime::Builder::new_multi_thread()
                .enable_all()
                .build()
                .map_err(|e| Error::io("runtime", e))?;
            runtime
                .block_on(crate::http::serve(engine, &config.bind, port))
                .map_err(|e| Error::io(format!("{}:{port}", config.bind), e))?;
            Ok(CommandOutcome::ok(String::new()))
        }
    }
}

fn report_row(r: &crate::store::LoadReport) -> String {
    let kind = match r.kind {
        IndexKind::Sparse => "sparse",
        IndexKind::Full => "full",
    };
    let violations: Vec<String> = r.violations.iter().map(usize::to_string).collect();
    format!("{kind}\t{}\t{}\t{}", r.entries, violations.join(","), r.activated)
}

fn outcome(stdout: String, failed: bool) -> CommandOutcome {
    CommandOutcome {
        exit_code: if failed { EXIT_VALIDATION } else { EXIT_OK },
        stdout,
        stderr: String::new(),
    }
}
