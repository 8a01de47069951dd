use clap::{Parser, Subcommand};
use flowcheck::codec::{self, parse_domain, to_text, Doc};
use flowcheck::commands::{self as cmd, Outcome, MALFORMED};
use flowcore::FlowDomain;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Flow-graph invariants on files.
/// Exit status: 0 pass, 1 violation, 2 malformed input or usage.
#[derive(Parser)]
#[command(name = "flowcheck", version)]
struct Cli {
    /// Flow domain, when the file does not name one (e.g. `path_count`,
    /// `keyset*path_count`).
    #[arg(long, global = true)]
    domain: Option<String>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a graph or snapshot against a good condition.
    Check {
        file: PathBuf,
        /// e.g. `tree(r)`, `list(r, t)`, `harris(mh, fh, ft)`, `dictionary(r, btree:2)`.
        #[arg(long)]
        condition: String,
    },
    /// Print the flow at every node.
    Flow {
        file: PathBuf,
        #[arg(long, num_args = 2, value_names = ["SRC", "DST"])]
        capacity: Option<Vec<String>>,
    },
    /// Compose two graphs (or two snapshots).
    Compose { a: PathBuf, b: PathBuf },
    /// Split a graph into a region and its context.
    Split {
        file: PathBuf,
        /// Comma-separated node ids.
        #[arg(long)]
        region: String,
    },
    /// Does the region's new interface contextually extend the old one?
    Extend {
        before: PathBuf,
        after: PathBuf,
        #[arg(long)]
        region: String,
    },
    /// Run a workload file.
    Simulate {
        file: PathBuf,
        #[arg(long, conflicts_with = "exhaustive")]
        seed: Option<u64>,
        #[arg(long)]
        exhaustive: bool,
    },
    /// Check a history file for linearizability.
    Lin { file: PathBuf },
    /// Re-print a graph or snapshot file in canonical form.
    Fmt { file: PathBuf },
}

fn read(p: &Path) -> Result<String, Outcome> {
    std::fs::read_to_string(p).map_err(|e| Outcome::malformed(format!("{}: {e}", p.display())))
}

fn load(p: &Path, d: Option<&FlowDomain>) -> Result<Doc, Outcome> {
    cmd::load(&read(p)?, d).map_err(|e| Outcome::malformed(format!("{}: {e}", p.display())))
}

fn load_json(p: &Path) -> Result<serde_json::Value, Outcome> {
    codec::parse_text(&read(p)?).map_err(|e| Outcome::malformed(format!("{}: {e}", p.display())))
}

fn dispatch(cli: Cli) -> Result<Outcome, Outcome> {
    let dom = match &cli.domain {
        Some(s) => Some(parse_domain(s).map_err(Outcome::malformed)?),
        None => None,
    };
    let d = dom.as_ref();
    Ok(match cli.cmd {
        Cmd::Check { file, condition } => {
            let kind = cmd::parse_condition(&condition).map_err(Outcome::malformed)?;
            cmd::cmd_check(&load(&file, d)?, &kind)
        }
        Cmd::Flow { file, capacity } => {
            let doc = load(&file, d)?;
            let cap = capacity.as_ref().map(|c| (c[0].as_str(), c[1].as_str()));
            cmd::cmd_flow(&doc, cap)
        }
        Cmd::Compose { a, b } => cmd::cmd_compose(&load(&a, d)?, &load(&b, d)?),
        Cmd::Split { file, region } => cmd::cmd_split(&load(&file, d)?, &cmd::parse_region(&region)),
        Cmd::Extend { before, after, region } => {
            cmd::cmd_extend(&load(&before, d)?, &load(&after, d)?, &cmd::parse_region(&region))
        }
        Cmd::Simulate { file, seed, exhaustive } => cmd::cmd_simulate(&load_json(&file)?, seed, exhaustive),
        Cmd::Lin { file } => cmd::cmd_lin(&load_json(&file)?),
        Cmd::Fmt { file } => cmd::cmd_fmt(&load(&file, d)?),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { MALFORMED } else { 0 };
            return ExitCode::from(code as u8);
        }
    };
    let out = dispatch(cli).unwrap_or_else(|e| e);
    print!("{}", to_text(&out.report));
    ExitCode::from(out.code as u8)
}
