//! Command-line front end. Exit codes: 0 affirmative, 1 negative finding,
//! 2 usage or input error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value as Json};

use crate::degrees::{Degree, OperatorFamily};
use crate::fmp::{self, CanonicalModel, FmpError, Node};
use crate::kbio::{parse_concept, parse_interpretation, parse_kb, serialize_interpretation, serialize_kb};
use crate::modelsearch::{refute_candidate, sat_search, SearchBounds, SearchStatus};
use crate::semantics::{check_kb, check_kb_strict};
use crate::syntax::{classify_tbox, KnowledgeBase};
use crate::transform::{eliminate_tbox, synthesize_gadget, verify_gadget, Encoding, TransformError};

#[derive(Debug, Parser)]
#[command(name = "fuzzy-alc", version, about = "Exact-arithmetic toolkit for fuzzy ALC")]
pub struct Cli {
    /// Emit one JSON document instead of the human report.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a finite interpretation against a knowledge base.
    CheckModel {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        family: OperatorFamily,
        /// Fail on names the model leaves uninterpreted.
        #[arg(long)]
        strict: bool,
    },
    /// Bounded search for a finite model.
    SatSearch(SatSearchArgs),
    /// Acyclic / unfoldable classification of the TBox.
    Analyze {
        #[arg(long)]
        kb: PathBuf,
    },
    /// Eliminate the TBox into an equisatisfiable ABox.
    Unfold {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        family: OperatorFamily,
        #[arg(long, default_value = "tnorm")]
        encoding: Encoding,
        /// Where to write the resulting knowledge base (stdout if absent).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write the step log.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Print and verify the threshold gadget for alpha.
    Gadget {
        #[arg(long)]
        alpha: Degree,
        /// Sweep denominator; defaults to the denominator of alpha.
        #[arg(long)]
        sweep: Option<u64>,
    },
    /// The infinite canonical models of K2.
    #[command(subcommand)]
    Fmp(FmpCommand),
}

#[derive(Debug, Args)]
pub struct SatSearchArgs {
    #[arg(long)]
    kb: PathBuf,
    #[arg(long)]
    family: OperatorFamily,
    #[arg(long)]
    max_size: usize,
    /// Comma-separated grid denominators, e.g. 1,2,4.
    #[arg(long, value_delimiter = ',', required = true)]
    denominators: Vec<u64>,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    crisp_roles: bool,
    /// Disable propagation and constraint pruning.
    #[arg(long)]
    no_prune: bool,
    #[arg(long)]
    threads: Option<usize>,
    /// Write a found model here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum FmpCommand {
    /// Verify K2 on a prefix of the canonical model.
    Demo {
        #[arg(long)]
        family: OperatorFamily,
        #[arg(long, default_value_t = 100)]
        depth: u64,
        /// Print every row instead of a summary.
        #[arg(long)]
        table: bool,
    },
    /// The sequence of values forced on A.
    ForcedSeq {
        #[arg(long)]
        family: OperatorFamily,
        #[arg(short = 'n', default_value_t = 8)]
        n: usize,
    },
    /// Tail class of a concept, checked against a prefix.
    Classify {
        #[arg(long)]
        family: OperatorFamily,
        #[arg(long)]
        concept: String,
        #[arg(long, default_value_t = 64)]
        depth: u64,
        #[arg(long, default_value_t = 16)]
        tolerance: u64,
    },
    /// Evaluate a concept at one node.
    Eval {
        #[arg(long)]
        family: OperatorFamily,
        #[arg(long)]
        concept: String,
        /// A positive integer, or `inf`.
        #[arg(long)]
        node: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandResult {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Report {
    code: i32,
    human: String,
    json: Json,
}

struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

type Outcome = Result<Report, InputError>;

pub fn run<I, T>(args: I) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                CommandResult { code, stdout: text, stderr: String::new() }
            } else {
                CommandResult { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let json_mode = cli.json;
    match dispatch(cli.command) {
        Ok(r) => {
            let stdout = if json_mode {
                let mut doc = r.json;
                doc["exit_code"] = json!(r.code);
                format!("{}\n", serde_json::to_string_pretty(&doc).expect("serializable"))
            } else {
                r.human
            };
            CommandResult { code: r.code, stdout, stderr: String::new() }
        }
        Err(InputError(msg)) => {
            let stdout = if json_mode {
                format!("{}\n", json!({ "error": msg, "exit_code": 2 }))
            } else {
                String::new()
            };
            CommandResult { code: 2, stdout, stderr: format!("error: {msg}\n") }
        }
    }
}

fn read(path: &Path) -> Result<String, InputError> {
    fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn load_kb(path: &Path) -> Result<KnowledgeBase, InputError> {
    parse_kb(&read(path)?).map_err(|e| InputError(format!("{}:{e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), InputError> {
    fs::write(path, text).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn dispatch(cmd: Command) -> Outcome {
    match cmd {
        Command::CheckModel { kb, model, family, strict } => check_model(&kb, &model, family, strict),
        Command::SatSearch(args) => sat_search_cmd(args),
        Command::Analyze { kb } => analyze(&kb),
        Command::Unfold { kb, family, encoding, out, trace } => unfold(&kb, family, encoding, out, trace),
        Command::Gadget { alpha, sweep } => gadget(&alpha, sweep),
        Command::Fmp(FmpCommand::Demo { family, depth, table }) => fmp_demo(family, depth, table),
        Command::Fmp(FmpCommand::ForcedSeq { family, n }) => forced_seq(family, n),
        Command::Fmp(FmpCommand::Classify { family, concept, depth, tolerance }) => {
            classify(family, &concept, depth, tolerance)
        }
        Command::Fmp(FmpCommand::Eval { family, concept, node }) => eval(family, &concept, &node),
    }
}

fn check_model(kb_path: &Path, model_path: &Path, family: OperatorFamily, strict: bool) -> Outcome {
    let kb = load_kb(kb_path)?;
    let model = parse_interpretation(&read(model_path)?)
        .map_err(|e| InputError(format!("{}:{e}", model_path.display())))?;
    let report = if strict { check_kb_strict(&model, family, &kb)? } else { check_kb(&model, family, &kb)? };
    let mut human = String::new();
    for c in &report.axioms {
        human.push_str(&format!(
            "{:<4} {}  achieved {} required {}\n",
            if c.satisfied { "ok" } else { "FAIL" },
            c.axiom,
            c.achieved,
            c.required
        ));
    }
    for w in &report.warnings {
        human.push_str(&format!("warning: {w} is not interpreted; read as 0\n"));
    }
    if report.overall {
        human.push_str(&format!("satisfied under {family}\n"));
    } else {
        let r = refute_candidate(&kb, family, &model)?;
        human.push_str(&format!("violated under {family}: {}\n", r.message));
    }
    Ok(Report { code: if report.overall { 0 } else { 1 }, human, json: json!(report) })
}

fn grid_text(bounds: &SearchBounds) -> String {
    let g: Vec<String> = bounds.grid().iter().map(ToString::to_string).collect();
    format!("{{{}}}", g.join(", "))
}

fn sat_search_cmd(a: SatSearchArgs) -> Outcome {
    let kb = load_kb(&a.kb)?;
    let mut bounds = SearchBounds::new(a.max_size, &a.denominators);
    bounds.budget = a.budget;
    bounds.crisp_roles = a.crisp_roles;
    bounds.prune = !a.no_prune;
    bounds.threads = a.threads;
    let out = sat_search(&kb, a.family, &bounds)?;
    let mut human: String = out.log.iter().map(|l| format!("{l}\n")).collect();
    for n in &out.notes {
        human.push_str(&format!("note: {n}\n"));
    }
    let mut doc = json!({
        "family": a.family,
        "bounds": bounds,
        "stats": out.stats,
        "notes": out.notes,
        "log": out.log,
    });
    let code = match &out.status {
        SearchStatus::Sat(m) => {
            let text = serialize_interpretation(m);
            match &a.out {
                Some(p) => {
                    write(p, &text)?;
                    human.push_str(&format!("sat: model with {} written to {}\n", elements(m.size()), p.display()));
                }
                None => human.push_str(&format!("sat: model with {}\n{text}", elements(m.size()))),
            }
            doc["status"] = json!("sat");
            doc["model"] = json!(text);
            0
        }
        SearchStatus::UnsatWithinBounds => {
            human.push_str(&format!(
                "unsat within bounds: no model with at most {} over the grid {} \
                 (a bounded claim, not a proof of unsatisfiability)\n",
                elements(a.max_size),
                grid_text(&bounds)
            ));
            doc["status"] = json!("unsat-within-bounds");
            1
        }
        SearchStatus::BudgetExhausted => {
            human.push_str(&format!("budget exhausted after {} nodes; no conclusion\n", out.stats.nodes));
            doc["status"] = json!("budget-exhausted");
            1
        }
    };
    Ok(Report { code, human, json: doc })
}

fn analyze(kb_path: &Path) -> Outcome {
    let kb = load_kb(kb_path)?;
    let c = classify_tbox(&kb.tbox);
    let mut human = format!("acyclic: {}\nunfoldable: {}\n", c.acyclic, c.unfoldable);
    for v in &c.violations {
        human.push_str(&format!("violation {v}\n"));
    }
    Ok(Report { code: if c.unfoldable { 0 } else { 1 }, human, json: json!(c) })
}

fn unfold(
    kb_path: &Path,
    family: OperatorFamily,
    encoding: Encoding,
    out: Option<PathBuf>,
    trace_path: Option<PathBuf>,
) -> Outcome {
    let kb = load_kb(kb_path)?;
    let (abox, trace) = match eliminate_tbox(&kb, encoding, family) {
        Ok(r) => r,
        Err(e) => {
            let violations = match &e {
                TransformError::NotAcyclic(v) | TransformError::NotUnfoldable(v) => v.clone(),
                _ => vec![],
            };
            let mut human = format!("cannot unfold: {e}\n");
            for v in &violations {
                human.push_str(&format!("violation {v}\n"));
            }
            return Ok(Report { code: 1, human, json: json!({ "error": e.to_string(), "violations": violations }) });
        }
    };
    let text = serialize_kb(&abox);
    let log = trace.step_log();
    let mut human = String::new();
    match &out {
        Some(p) => {
            write(p, &text)?;
            human.push_str(&format!("wrote {} ABox axioms to {}\n", abox.abox.len(), p.display()));
        }
        None => human.push_str(&text),
    }
    match &trace_path {
        Some(p) => write(p, &log)?,
        None => human.push_str(&log),
    }
    Ok(Report { code: 0, human, json: json!({ "kb": text, "trace": trace }) })
}

fn gadget(alpha: &Degree, sweep: Option<u64>) -> Outcome {
    let g = synthesize_gadget(alpha)?;
    let q: u64 = alpha.denom().try_into().map_err(|_| InputError("denominator too large".into()))?;
    let report = verify_gadget(&g, sweep.unwrap_or(q))?;
    let mut human = format!("{}\n", g.concept.to_unicode());
    human.push_str(&format!("ascii: {}\n", g.concept.to_ascii()));
    human.push_str(&format!(
        "bound 1 - alpha = {}; attained at {} = {} (value {})\n",
        g.bound, g.atom, g.witness_input, report.witness_value
    ));
    human.push_str(&format!(
        "sweep over {} points: max {} at {}; {}\n",
        report.points,
        report.max_value,
        report.argmax,
        if report.passed { "pass" } else { "FAIL" }
    ));
    let doc = json!({
        "gadget": g.concept.to_unicode(),
        "ascii": g.concept.to_ascii(),
        "definition": g,
        "report": report,
    });
    Ok(Report { code: if report.passed { 0 } else { 1 }, human, json: doc })
}

fn canonical(family: OperatorFamily) -> Result<CanonicalModel, InputError> {
    Ok(CanonicalModel::new(family)?)
}

fn fmp_demo(family: OperatorFamily, depth: u64, table: bool) -> Outcome {
    let m = canonical(family)?;
    if depth == 0 {
        return Err(InputError("depth must be positive".into()));
    }
    let report = fmp::verify_k2_prefix(&m, depth)?;
    let mut human = format!("K2 on the {family} canonical model, nodes 1..={depth}");
    human.push_str(if m.has_infinity() { " and ∞\n" } else { "\n" });
    if table {
        human.push_str(&report.table());
    } else {
        let shown: Vec<_> = report
            .checks
            .iter()
            .filter(|c| !c.ok || c.node <= Node::Finite(3) || c.node == Node::Infinity)
            .cloned()
            .collect();
        let partial = fmp::PrefixReport { checks: shown, ..report.clone() };
        human.push_str(&partial.table());
    }
    for axiom in 1..=4u8 {
        let rows: Vec<_> = report.checks.iter().filter(|c| c.axiom == axiom).collect();
        let ok = rows.iter().filter(|c| c.ok).count();
        human.push_str(&format!("axiom ({axiom}): {ok}/{} identities hold\n", rows.len()));
    }
    human.push_str(if report.passed { "all identities hold\n" } else { "identity failures found\n" });

    let bounds = SearchBounds::new(2, &[1, 2]);
    let search = sat_search(&fmp::k2(), family, &bounds)?;
    let verdict = match search.status {
        SearchStatus::UnsatWithinBounds => "no model",
        SearchStatus::Sat(_) => "MODEL FOUND",
        SearchStatus::BudgetExhausted => "budget exhausted",
    };
    human.push_str(&format!(
        "bounded search: {verdict} with at most 2 elements over the grid {} \
         (corroborates the absence of finite models; not a proof)\n",
        grid_text(&bounds)
    ));
    let code = if report.passed && search.is_unsat() { 0 } else { 1 };
    let doc = json!({ "report": report, "search": { "status": verdict, "stats": search.stats } });
    Ok(Report { code, human, json: doc })
}

fn forced_seq(family: OperatorFamily, n: usize) -> Outcome {
    let seq = fmp::forced_sequence(family, n)?;
    let items: Vec<String> = seq.iter().map(ToString::to_string).collect();
    Ok(Report { code: 0, human: format!("{}\n", items.join(" ")), json: json!({ "family": family, "sequence": seq }) })
}

fn classify(family: OperatorFamily, concept: &str, depth: u64, tolerance: u64) -> Outcome {
    let m = canonical(family)?;
    let c = parse_concept(concept)?;
    let class = fmp::tail_classify(&m, &c);
    let mut human = format!("{class}\n");
    let mut doc = json!({ "concept": c, "class": class });
    match fmp::classify_vs_prefix(&m, &c, depth, tolerance) {
        Ok(r) => {
            human.push_str(&format!(
                "prefix 1..={depth}: {} (crossover {}, value at {depth}: {})\n",
                if r.consistent { "consistent" } else { "INCONSISTENT" },
                r.crossover.map_or("none".to_string(), |n| n.to_string()),
                r.last_value
            ));
            if let Some(v) = &r.infinity_value {
                human.push_str(&format!("value at ∞: {v}\n"));
            }
            let code = if r.consistent { 0 } else { 1 };
            doc["prefix"] = json!(r);
            Ok(Report { code, human, json: doc })
        }
        Err(FmpError::DisjunctionUnderProduct) => {
            human.push_str(&format!("prefix check skipped: {}\n", FmpError::DisjunctionUnderProduct));
            Ok(Report { code: 0, human, json: doc })
        }
        Err(e) => Err(e.into()),
    }
}

fn eval(family: OperatorFamily, concept: &str, node: &str) -> Outcome {
    let m = canonical(family)?;
    let c = parse_concept(concept)?;
    let node = match node {
        "inf" | "∞" => Node::Infinity,
        n => Node::Finite(n.parse().map_err(|_| InputError(format!("bad node `{n}`")))?),
    };
    let v = fmp::eval_on_canonical(&m, &c, node)?;
    Ok(Report { code: 0, human: format!("{v}\n"), json: json!({ "node": node, "value": v }) })
}

fn elements(n: usize) -> String {
    if n == 1 { "1 element".to_string() } else { format!("{n} elements") }
}
