//! Command-line front end for `opensos`.
//!
//! Every command produces a [`Report`] (printed as JSON with `--json`, as
//! text otherwise) and an exit code: 0 holds/ok, 1 fails or criteria not
//! met, 2 input error, 3 inconclusive.

mod commands;
pub mod corpus;
mod render;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use opensos::{Bounds, Notion};
use serde::Serialize;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILS: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

/// Environment variable holding default bounds as `k=v,k=v`.
pub const BOUNDS_ENV: &str = "OPENSOS_BOUNDS";

#[derive(Debug, Parser)]
#[command(name = "opensos", version, about = "Analyses for positive GSOS specifications and open-term bisimilarity")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Specification file (repeatable). Defaults to every `corpus/*.sos` in the working directory.
    #[arg(long = "spec", global = true, value_name = "FILE")]
    pub specs: Vec<PathBuf>,
    /// Emit a JSON report instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Bounds as `k=v,k=v` (term_size, depth, state_cap, pair_cap).
    #[arg(long, global = true, value_name = "K=V,...")]
    pub bounds: Option<String>,
    #[arg(long, global = true)]
    pub term_size: Option<usize>,
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    #[arg(long, global = true)]
    pub state_cap: Option<usize>,
    #[arg(long, global = true)]
    pub pair_cap: Option<usize>,
    /// Search initial fertility even when the label set exceeds the guard.
    #[arg(long, global = true)]
    pub override_label_guard: bool,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Parse specification files and report their declarations.
    ParseCheck { files: Vec<PathBuf> },
    /// Validate the positive GSOS format of one or all TSSs.
    GsosCheck {
        files: Vec<PathBuf>,
        #[arg(long)]
        tss: Option<String>,
    },
    /// Check that `--ext` is a disjoint extension of `--tss` and evaluate the robust-extension criteria.
    ExtensionCheck {
        #[arg(long)]
        tss: String,
        #[arg(long)]
        ext: String,
        #[arg(long)]
        eqs: Option<PathBuf>,
        /// Exit 1 unless the robust-extension criteria hold.
        #[arg(long)]
        require_robust: bool,
    },
    /// Print the most-general provable ruloids of a term.
    Ruloids {
        term: String,
        #[arg(long)]
        tss: String,
    },
    /// Print the outgoing transitions of a closed term.
    Transitions {
        term: String,
        #[arg(long)]
        tss: String,
    },
    /// Explore the reachable LTS of a closed term up to the state cap.
    Explore {
        term: String,
        #[arg(long)]
        tss: String,
    },
    /// Check two terms for bisimilarity.
    Check {
        #[arg(value_parser = parse_notion)]
        notion: Notion,
        lhs: String,
        rhs: String,
        #[arg(long)]
        tss: String,
    },
    /// Search for processes realizing every set of initial actions.
    Fertility {
        #[arg(long)]
        tss: String,
        /// Largest closed term searched.
        #[arg(long, default_value_t = 6)]
        max_size: usize,
    },
    /// Print the non-evolving argument indices, and evaluate equations against them.
    NonEvolving {
        #[arg(long)]
        tss: String,
        #[arg(long)]
        eqs: Option<PathBuf>,
        #[arg(long, default_value_t = 6)]
        max_size: usize,
    },
    /// Check every axiom of an equational theory.
    Sweep {
        #[arg(long)]
        tss: String,
        #[arg(long, value_parser = parse_notion)]
        notion: Notion,
        #[arg(long)]
        eqs: Option<PathBuf>,
    },
    /// Search for an equational derivation of `lhs = rhs`.
    Prove {
        lhs: String,
        rhs: String,
        #[arg(long)]
        tss: String,
        #[arg(long)]
        eqs: Option<PathBuf>,
        #[arg(long, default_value_t = 6)]
        max_steps: usize,
        #[arg(long, default_value_t = 3)]
        inst_size: usize,
    },
    /// Decide whether axioms sound on `--tss` remain sound on its extension `--ext`.
    Advise {
        #[arg(long)]
        tss: String,
        #[arg(long)]
        ext: String,
        #[arg(long, value_parser = parse_notion)]
        notion: Notion,
        #[arg(long)]
        eqs: Option<PathBuf>,
    },
    /// Run every fixture manifest in a corpus directory.
    Corpus { dir: PathBuf },
}

fn parse_notion(s: &str) -> Result<Notion, String> {
    s.parse()
}

/// Uniform report: `{analysis, tss, verdict, details[]}`.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub analysis: String,
    pub tss: String,
    pub verdict: String,
    pub details: Vec<serde_json::Value>,
}

/// Input problems: unreadable files, parse errors, unknown names.
#[derive(Debug)]
pub struct InputError(pub String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

pub(crate) struct Outcome {
    pub report: Report,
    pub text: String,
    pub code: i32,
}

impl GlobalOpts {
    /// Defaults, then `OPENSOS_BOUNDS`, then `--bounds`, then the single-bound flags.
    pub fn resolve_bounds(&self, env: Option<&str>) -> Result<Bounds, String> {
        let mut b = Bounds::default();
        if let Some(e) = env {
            b.apply_overrides(e).map_err(|m| format!("{BOUNDS_ENV}: {m}"))?;
        }
        if let Some(s) = &self.bounds {
            b.apply_overrides(s)?;
        }
        b.term_size = self.term_size.unwrap_or(b.term_size);
        b.depth = self.depth.unwrap_or(b.depth);
        b.state_cap = self.state_cap.unwrap_or(b.state_cap);
        b.pair_cap = self.pair_cap.unwrap_or(b.pair_cap);
        if b.term_size == 0 || b.depth == 0 || b.state_cap == 0 || b.pair_cap == 0 {
            return Err(format!("bounds must be positive ({b})"));
        }
        Ok(b)
    }
}

/// Runs the command line `argv` (including the program name), writing
/// results to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let env = std::env::var(BOUNDS_ENV).ok();
    let bounds = match cli.global.resolve_bounds(env.as_deref()) {
        Ok(b) => b,
        Err(m) => {
            let _ = writeln!(err, "error: {m}");
            return EXIT_INPUT;
        }
    };
    match commands::dispatch(&cli, &bounds) {
        Ok(o) => {
            if cli.global.json {
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&o.report).expect("reports serialize"));
            } else {
                let _ = write!(out, "{}", o.text);
            }
            o.code
        }
        Err(InputError(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_INPUT
        }
    }
}
