//! Command-line front end. [`run`] is the whole program minus process I/O.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bayes::BayesNet;
use crate::context::{ComplexContext, Signature};
use crate::error::Error;
use crate::io::{
    parse_bn, parse_concept, parse_context, parse_ontology, serialize_context, Diagnostic,
};
use crate::ontology::{Concept, Kb};
use crate::reasoner::{Mode, PMode, QueryResult, Reasoner};
use crate::tableau::{Strategy, TableauConfig};

#[derive(Debug, Parser)]
#[command(
    name = "balc",
    version,
    about = "Reasoner for context-labelled ALC knowledge bases"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide whether the KB is consistent.
    Consistency {
        #[command(flatten)]
        kb: KbArgs,
        #[command(flatten)]
        opts: Opts,
    },
    /// Print the context of the worlds whose restriction is inconsistent.
    InconsistencyContext {
        #[command(flatten)]
        kb: KbArgs,
        #[command(flatten)]
        opts: Opts,
    },
    /// Print the context of the zero-probability worlds of a network.
    ZeroContext { bn: PathBuf },
    /// Probability of `sub ⊑ sup` in a context, optionally conditioned.
    ProbSubsumption {
        #[command(flatten)]
        kb: KbArgs,
        #[arg(long)]
        sub: String,
        #[arg(long)]
        sup: String,
        #[command(flatten)]
        ctx: Conditioned,
        #[command(flatten)]
        opts: Opts,
    },
    /// Probability that an individual belongs to a concept.
    ProbInstance {
        #[command(flatten)]
        kb: KbArgs,
        #[arg(long)]
        concept: String,
        #[arg(long)]
        individual: String,
        #[command(flatten)]
        ctx: Conditioned,
        #[command(flatten)]
        opts: Opts,
    },
    /// Decide a subsumption.
    DecideSubsumption {
        #[command(flatten)]
        kb: KbArgs,
        #[arg(long)]
        sub: String,
        #[arg(long)]
        sup: String,
        #[arg(long, value_enum, default_value_t = Kind::Contextual)]
        kind: Kind,
        /// Required by `p` and `exact`.
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long, default_value = "{}")]
        context: String,
        #[command(flatten)]
        opts: Opts,
    },
    /// Decide whether an individual belongs to a concept in a context.
    DecideInstance {
        #[command(flatten)]
        kb: KbArgs,
        #[arg(long)]
        concept: String,
        #[arg(long)]
        individual: String,
        #[arg(long, default_value = "{}")]
        context: String,
        #[command(flatten)]
        opts: Opts,
    },
    /// Concept satisfiability; with --probability, the probability that the
    /// concept is empty.
    Satisfiability {
        #[command(flatten)]
        kb: KbArgs,
        #[arg(long)]
        concept: String,
        #[arg(long)]
        context: Option<String>,
        #[arg(long)]
        given: Option<String>,
        #[arg(long)]
        probability: bool,
        #[command(flatten)]
        opts: Opts,
    },
}

#[derive(Debug, Args)]
struct KbArgs {
    /// Labelled ontology (.balc).
    ontology: PathBuf,
    /// Bayesian network (.bn).
    bn: PathBuf,
}

#[derive(Debug, Args)]
struct Conditioned {
    #[arg(long, default_value = "{}")]
    context: String,
    #[arg(long)]
    given: Option<String>,
}

#[derive(Debug, Args)]
struct Opts {
    #[arg(long, value_enum, default_value_t = ModeArg::Tableau)]
    mode: ModeArg,
    /// Tableau strategy; `full` disables region pruning.
    #[arg(long, value_enum, default_value_t = StrategyArg::Relativized)]
    strategy: StrategyArg,
    /// Log rule applications to stderr.
    #[arg(long)]
    trace: bool,
    #[arg(long, default_value_t = TableauConfig::default().max_aboxes)]
    max_aboxes: usize,
    /// Per ABox, counting the applications inherited from its ancestors.
    #[arg(long, default_value_t = TableauConfig::default().max_rule_applications)]
    max_rule_applications: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Tableau,
    Oracle,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StrategyArg {
    Relativized,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Contextual,
    Positive,
    P,
    Exact,
    AlmostCertain,
}

/// Exit code, standard output and standard error of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Failure {
    Usage(String),
    Parse(PathBuf, Vec<Diagnostic>),
    Error(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

type Out = std::result::Result<(bool, String, Vec<String>), Failure>;

pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: 2,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    match execute(cli.command) {
        Ok((ok, line, trace)) => Outcome {
            code: if ok { 0 } else { 1 },
            stdout: format!("result={line}\n"),
            stderr: trace.iter().map(|l| format!("{l}\n")).collect(),
        },
        Err(Failure::Usage(msg)) => Outcome {
            code: 2,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        },
        Err(Failure::Parse(path, ds)) => Outcome {
            code: 2,
            stdout: String::new(),
            stderr: ds
                .iter()
                .map(|d| format!("{}:{d}\n", path.display()))
                .collect(),
        },
        Err(Failure::Error(e)) => {
            let code = if matches!(e, Error::ResourceLimit(_)) {
                3
            } else {
                2
            };
            let stderr = match e {
                Error::Parse(ds) => ds.iter().map(|d| format!("{d}\n")).collect(),
                other => format!("error: {other}\n"),
            };
            Outcome {
                code,
                stdout: String::new(),
                stderr,
            }
        }
    }
}

fn read(path: &Path) -> std::result::Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn with_path(path: &Path, e: Error) -> Failure {
    match e {
        Error::Parse(ds) => Failure::Parse(path.to_path_buf(), ds),
        other => Failure::Error(other),
    }
}

fn load_bn(path: &Path) -> std::result::Result<BayesNet, Failure> {
    parse_bn(&read(path)?).map_err(|e| with_path(path, e))
}

fn load_kb(args: &KbArgs) -> std::result::Result<Kb, Failure> {
    let bn = load_bn(&args.bn)?;
    let onto = parse_ontology(&read(&args.ontology)?, bn.signature())
        .map_err(|e| with_path(&args.ontology, e))?;
    Ok(Kb::new(onto, bn)?)
}

fn concept(text: &str) -> std::result::Result<Concept, Failure> {
    parse_concept(text).map_err(|e| arg_error("concept", text, e))
}

fn context(text: &str, sig: &Signature) -> std::result::Result<ComplexContext, Failure> {
    parse_context(text, sig).map_err(|e| arg_error("context", text, e))
}

fn arg_error(what: &str, text: &str, e: Error) -> Failure {
    match e {
        Error::Parse(ds) => Failure::Usage(format!(
            "invalid {what} `{text}`: {}",
            ds.iter()
                .map(|d| d.message.clone())
                .collect::<Vec<_>>()
                .join("; ")
        )),
        other => Failure::Error(other),
    }
}

/// Display form of a context: its prime implicants when they are cheap to
/// compute, the canonical form otherwise.
pub fn show_context(phi: &ComplexContext, sig: &Signature) -> String {
    let simple = phi
        .prime_implicants(sig, 1 << 16)
        .unwrap_or_else(|| phi.clone());
    serialize_context(&simple, sig)
}

fn probability(r: QueryResult) -> (bool, String, Vec<String>) {
    let p = r.probability().expect("probability query");
    (true, format!("{p:.6}"), r.diagnostics.trace)
}

fn decision(r: QueryResult, yes: &str, no: &str) -> (bool, String, Vec<String>) {
    let d = r.decision().expect("decision query");
    (d, if d { yes } else { no }.to_string(), r.diagnostics.trace)
}

fn reasoner<'a>(kb: &'a Kb, opts: &Opts) -> Reasoner<'a> {
    let mode = match opts.mode {
        ModeArg::Tableau => Mode::Tableau,
        ModeArg::Oracle => Mode::Oracle,
    };
    let strategy = match opts.strategy {
        StrategyArg::Relativized => Strategy::Relativized,
        StrategyArg::Full => Strategy::Full,
    };
    Reasoner::new(kb)
        .with_mode(mode)
        .with_config(TableauConfig {
            strategy,
            trace: opts.trace,
            max_aboxes: opts.max_aboxes,
            max_rule_applications: opts.max_rule_applications,
        })
}

fn execute(command: Command) -> Out {
    match command {
        Command::ZeroContext { bn } => {
            let bn = load_bn(&bn)?;
            Ok((
                true,
                show_context(&bn.zero_context(), bn.signature()),
                vec![],
            ))
        }
        Command::Consistency { kb, opts } => {
            let kb = load_kb(&kb)?;
            let r = reasoner(&kb, &opts).is_consistent()?;
            Ok(decision(r, "consistent", "inconsistent"))
        }
        Command::InconsistencyContext { kb, opts } => {
            let kb = load_kb(&kb)?;
            let r = reasoner(&kb, &opts).inconsistency_context()?;
            let phi = r.witness.as_ref().expect("context query");
            Ok((
                true,
                show_context(phi, kb.bn.signature()),
                r.diagnostics.trace,
            ))
        }
        Command::ProbSubsumption {
            kb,
            sub,
            sup,
            ctx,
            opts,
        } => {
            let kb = load_kb(&kb)?;
            let sig = kb.bn.signature();
            let (c, d) = (concept(&sub)?, concept(&sup)?);
            let kappa = context(&ctx.context, sig)?;
            let r = reasoner(&kb, &opts);
            let r = match ctx.given {
                Some(g) => {
                    r.conditional_subsumption_probability(&c, &d, &kappa, &context(&g, sig)?)?
                }
                None => r.subsumption_probability(&c, &d, &kappa)?,
            };
            Ok(probability(r))
        }
        Command::ProbInstance {
            kb,
            concept: c,
            individual,
            ctx,
            opts,
        } => {
            let kb = load_kb(&kb)?;
            let sig = kb.bn.signature();
            let c = concept(&c)?;
            let kappa = context(&ctx.context, sig)?;
            let r = reasoner(&kb, &opts);
            let r = match ctx.given {
                Some(g) => {
                    r.conditional_instance_probability(&c, &individual, &kappa, &context(&g, sig)?)?
                }
                None => r.instance_probability(&c, &individual, &kappa)?,
            };
            Ok(probability(r))
        }
        Command::DecideSubsumption {
            kb,
            sub,
            sup,
            kind,
            threshold,
            context: ctx,
            opts,
        } => {
            let kb = load_kb(&kb)?;
            let (c, d) = (concept(&sub)?, concept(&sup)?);
            let kappa = context(&ctx, kb.bn.signature())?;
            let r = reasoner(&kb, &opts);
            let need = |t: Option<f64>| {
                t.ok_or_else(|| {
                    Failure::Usage(format!("--kind {kind:?} needs --threshold").to_lowercase())
                })
            };
            let r = match kind {
                Kind::Contextual => r.decide_contextual_subsumption(&c, &d, &kappa)?,
                Kind::Positive => r.decide_positive_subsumption(&c, &d, &kappa)?,
                Kind::AlmostCertain => {
                    r.decide_p_subsumption(&c, &d, &kappa, 1.0, PMode::AlmostCertain)?
                }
                Kind::P => {
                    r.decide_p_subsumption(&c, &d, &kappa, need(threshold)?, PMode::AtLeast)?
                }
                Kind::Exact => {
                    r.decide_p_subsumption(&c, &d, &kappa, need(threshold)?, PMode::Exactly)?
                }
            };
            Ok(decision(r, "true", "false"))
        }
        Command::DecideInstance {
            kb,
            concept: c,
            individual,
            context: ctx,
            opts,
        } => {
            let kb = load_kb(&kb)?;
            let c = concept(&c)?;
            let kappa = context(&ctx, kb.bn.signature())?;
            let r = reasoner(&kb, &opts).decide_instance(&c, &individual, &kappa)?;
            Ok(decision(r, "true", "false"))
        }
        Command::Satisfiability {
            kb,
            concept: c,
            context: ctx,
            given,
            probability: prob,
            opts,
        } => {
            let kb = load_kb(&kb)?;
            let sig = kb.bn.signature();
            let c = concept(&c)?;
            let kappa = ctx.as_deref().map(|t| context(t, sig)).transpose()?;
            let r = reasoner(&kb, &opts);
            if prob {
                let kappa = kappa.unwrap_or_else(ComplexContext::top);
                let r = match given {
                    Some(g) => {
                        r.conditional_unsatisfiability_probability(&c, &kappa, &context(&g, sig)?)?
                    }
                    None => r.unsatisfiability_probability(&c, &kappa)?,
                };
                return Ok(probability(r));
            }
            if given.is_some() {
                return Err(Failure::Usage("--given requires --probability".into()));
            }
            let r = r.concept_satisfiability(&c, kappa.as_ref())?;
            Ok(decision(r, "satisfiable", "unsatisfiable"))
        }
    }
}
