//! `ppr-akg` command-line front end.
//!
//! Exit codes: 0 success, 1 violations or engine errors in the data, 2 usage
//! error, 3 I/O or parse failure. With `--json` stdout carries exactly the
//! `data` payload the service returns for the same operation.

use std::io::Write;
use std::path::{Path, PathBuf};

use akg_core::matchmaker::CapabilityAction;
use akg_core::scheduler::SchedulePolicy;
use akg_core::ttl::{load_turtle_with, ParseOptions};
use akg_core::{serialize_turtle, AkgGraph, CauseScope, Iri};
use akg_service::ops::{self, CapabilityRequest, DiagnoseRequest, ScheduleRequest};
use akg_service::{ApiError, Config};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    DataErrors = 1,
    Usage = 2,
    Io = 3,
}

#[derive(Debug, Parser)]
#[command(name = "ppr-akg", version, about = "Product-process-resource asset knowledge graph tool")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a graph against the modelling rules
    Validate {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// List the resources able to execute a process step
    Match {
        file: PathBuf,
        #[arg(long)]
        step: String,
        #[arg(long)]
        json: bool,
    },
    /// Schedule n runs of a product
    Schedule {
        file: PathBuf,
        #[arg(long)]
        product: String,
        #[arg(short = 'n', default_value_t = 1)]
        n: usize,
        #[arg(long)]
        improve: bool,
        #[arg(long)]
        json: bool,
    },
    /// Rank plausible causes of an undesired condition
    Diagnose {
        file: PathBuf,
        #[arg(long)]
        condition: String,
        #[arg(long)]
        resource: Option<String>,
        #[arg(long)]
        step: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Show the eligibility impact of adding or removing a capability
    Whatif {
        file: PathBuf,
        #[arg(long)]
        resource: String,
        #[arg(long)]
        capability: String,
        #[arg(long, value_enum)]
        action: Action,
        #[arg(long)]
        json: bool,
    },
    /// Run the HTTP service
    Serve {
        /// Bind address; defaults to PPR_ADDR, then 127.0.0.1:8080
        #[arg(long)]
        addr: Option<String>,
        /// Turtle file loaded at boot; defaults to PPR_GRAPH
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Rewrite a Turtle file in canonical form
    Export {
        file: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Action {
    Add,
    Remove,
}

impl From<Action> for CapabilityAction {
    fn from(a: Action) -> Self {
        match a {
            Action::Add => CapabilityAction::Add,
            Action::Remove => CapabilityAction::Remove,
        }
    }
}

struct Failure {
    status: ExitStatus,
    message: String,
}

impl From<ApiError> for Failure {
    fn from(e: ApiError) -> Self {
        Failure {
            status: ExitStatus::DataErrors,
            message: format!("{}: {}", e.code, e.message),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            status: ExitStatus::Io,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<ExitStatus, Failure>;

/// Parses `args` and runs the command, writing to `out` and `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return ExitStatus::Usage;
            }
            let _ = write!(out, "{e}");
            return ExitStatus::Success;
        }
    };
    match execute(cli.command, out) {
        Ok(status) => status,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.status
        }
    }
}

fn load(path: &Path, options: ParseOptions) -> Result<AkgGraph, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure {
        status: ExitStatus::Io,
        message: format!("{}: {e}", path.display()),
    })?;
    load_turtle_with(&text, options).map_err(|errors| Failure {
        status: ExitStatus::Io,
        message: errors
            .iter()
            .map(|e| format!("{}:{e}", path.display()))
            .collect::<Vec<_>>()
            .join("\n"),
    })
}

fn strict(path: &Path) -> Result<AkgGraph, Failure> {
    load(path, ParseOptions::default())
}

fn emit_json<T: Serialize>(out: &mut dyn Write, data: &T) -> Result<(), Failure> {
    let text = serde_json::to_string(data).map_err(|e| Failure {
        status: ExitStatus::Io,
        message: e.to_string(),
    })?;
    writeln!(out, "{text}")?;
    Ok(())
}

fn short(graph: &AkgGraph, iri: &Iri) -> String {
    graph.prefixes().compact(iri.as_str()).unwrap_or_else(|| format!("<{iri}>"))
}

fn list(graph: &AkgGraph, iris: &[Iri]) -> String {
    if iris.is_empty() {
        "(none)".to_string()
    } else {
        iris.iter().map(|i| short(graph, i)).collect::<Vec<_>>().join(", ")
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Outcome {
    match command {
        Command::Validate { file, json } => {
            let graph = load(&file, ParseOptions { allow_successor_cycles: true })?;
            let violations = ops::validate(&graph);
            if json {
                emit_json(out, &violations)?;
            } else {
                for v in &violations {
                    writeln!(out, "{v}")?;
                }
                writeln!(out, "{} violations", violations.len())?;
            }
            Ok(if violations.is_empty() { ExitStatus::Success } else { ExitStatus::DataErrors })
        }
        Command::Match { file, step, json } => {
            let graph = strict(&file)?;
            let report = ops::eligible(&graph, &step)?;
            if json {
                emit_json(out, &report)?;
            } else {
                writeln!(out, "{} can run on: {}", short(&graph, &report.step), list(&graph, &report.eligible))?;
                for r in &report.explanations {
                    let mark = if r.eligible { "ok" } else { "no" };
                    writeln!(out, "  [{mark}] {}", short(&graph, &r.resource))?;
                    for req in r.requirements.iter().filter(|q| !q.satisfied) {
                        writeln!(out, "       unmet {}", short(&graph, &req.requirement))?;
                    }
                }
            }
            Ok(ExitStatus::Success)
        }
        Command::Schedule {
            file,
            product,
            n,
            improve,
            json,
        } => {
            let graph = strict(&file)?;
            let req = ScheduleRequest {
                product: Some(product),
                n: Some(n),
                policy: SchedulePolicy {
                    improve,
                    ..SchedulePolicy::default()
                },
                ..ScheduleRequest::default()
            };
            let schedule = ops::schedule_runs(&graph, &req)?;
            if json {
                emit_json(out, &schedule)?;
            } else {
                for a in &schedule.assignments {
                    writeln!(
                        out,
                        "{:>6} {:>6}  {:<24} {}",
                        a.start_s,
                        a.start_s + a.duration_s,
                        short(&graph, &a.resource),
                        short(&graph, &a.step)
                    )?;
                }
                writeln!(out, "makespan {} s, {} steps", schedule.makespan_s, schedule.assignments.len())?;
            }
            Ok(ExitStatus::Success)
        }
        Command::Diagnose {
            file,
            condition,
            resource,
            step,
            json,
        } => {
            let graph = strict(&file)?;
            let req = DiagnoseRequest {
                condition,
                affected_step: step,
                observed_on_resource: resource,
            };
            let report = ops::diagnose(&graph, &req)?;
            if json {
                emit_json(out, &report)?;
            } else {
                writeln!(out, "causes of {}:", short(&graph, &report.context.condition))?;
                for (i, c) in report.causes.iter().enumerate() {
                    let scope = match c.scope {
                        CauseScope::Global => "global".to_string(),
                        CauseScope::ResourceSpecific => {
                            let rs: Vec<Iri> = c.evidence[1..].iter().map(|e| e.subject.clone()).collect();
                            format!("on {}", list(&graph, &rs))
                        }
                    };
                    writeln!(out, "{:>3}. {:<28} {:<6} {}", i + 1, short(&graph, &c.cause), c.weight, scope)?;
                }
                if report.causes.is_empty() {
                    writeln!(out, "  (none)")?;
                }
            }
            Ok(ExitStatus::Success)
        }
        Command::Whatif {
            file,
            resource,
            capability,
            action,
            json,
        } => {
            let mut graph = strict(&file)?;
            let req = CapabilityRequest {
                capability,
                action: action.into(),
            };
            let report = ops::capability_change(&mut graph, &resource, &req)?;
            if json {
                emit_json(out, &report)?;
            } else {
                if report.changes.is_empty() {
                    writeln!(out, "no eligibility changes")?;
                }
                for c in &report.changes {
                    let flag = if c.starved { "  STARVED" } else { "" };
                    writeln!(
                        out,
                        "{}: {} -> {}{flag}",
                        short(&graph, &c.process),
                        list(&graph, &c.before),
                        list(&graph, &c.after)
                    )?;
                }
            }
            Ok(ExitStatus::Success)
        }
        Command::Serve { addr, graph } => {
            let mut config = Config::from_env();
            if let Some(addr) = addr {
                config.addr = addr;
            }
            if graph.is_some() {
                config.graph = graph;
            }
            let _ = tracing_subscriber::fmt()
                .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
                .with_writer(std::io::stderr)
                .try_init();
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(akg_service::serve(config)).map_err(|e| Failure {
                status: ExitStatus::Io,
                message: e.to_string(),
            })?;
            Ok(ExitStatus::Success)
        }
        Command::Export { file, output } => {
            let graph = load(&file, ParseOptions { allow_successor_cycles: true })?;
            std::fs::write(&output, serialize_turtle(&graph)).map_err(|e| Failure {
                status: ExitStatus::Io,
                message: format!("{}: {e}", output.display()),
            })?;
            writeln!(out, "wrote {} nodes, {} edges to {}", graph.node_count(), graph.edge_count(), output.display())?;
            Ok(ExitStatus::Success)
        }
    }
}
