//! The `ixcomplex` command line.
//!
//! Exit codes: 0 success, 1 domain or validation error, 2 usage error.
//! Setting `IXCOMPLEX_NO_COLOR` turns off styled output.

use std::ffi::OsString;
use std::fs;
use std::io::{self, IsTerminal, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::bigi::{analyze, instantiate, simplify, NormalizedComplexity};
use crate::concept::{parse_concept, InteractionConcept};
use crate::klm::{klm_from_concept, klm_parse, klm_speed, klm_time, ActionMapping, KlmExpression, KlmModel};
use crate::logs::{load_log, step_table, task_table, GroupBy, SpeedTable};
use crate::speed::{estimate_time, SpeedModel};
use crate::symexpr::{is_valid_name, parse_expr, Binding};
use crate::synth::{count_actions, generate_log, SynthConfig};
use crate::util::fmt2;

#[derive(Parser, Debug)]
#[command(name = "ixcomplex", version, about = "Interaction complexity, KLM timing and interaction-speed analytics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Big-I analysis of a concept file
    Analyze(AnalyzeArgs),
    /// Keystroke-level-model execution time
    Klm(KlmArgs),
    /// Time estimate from an IS count and a speed model
    Estimate(EstimateArgs),
    /// Task and step speed tables from an event log
    Logs(LogsArgs),
    /// Seeded synthetic event log
    Synth(SynthArgs),
    /// Brute-force action counts
    Oracle(OracleArgs),
}

#[derive(Args, Debug, Default)]
struct BindingArgs {
    /// Variable assignment, repeatable
    #[arg(long = "set", value_name = "NAME=VALUE", value_parser = parse_assignment)]
    set: Vec<(String, u64)>,
    /// JSON object of assignments; `--set` takes precedence
    #[arg(long, value_name = "FILE")]
    bindings: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    concept: PathBuf,
    #[command(flatten)]
    binding: BindingArgs,
    /// Published normalized IS formula, reported next to the concept's own
    #[arg(long, value_name = "EXPR")]
    formula: Option<String>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("source").required(true).multiple(true).args(["concept", "formula"]))]
struct KlmArgs {
    #[arg(long, value_name = "FILE")]
    concept: Option<PathBuf>,
    /// Operator formula, e.g. "(m + 2)*Q + 9*T"
    #[arg(long, value_name = "EXPR", allow_hyphen_values = true)]
    formula: Option<String>,
    /// Action-to-operator mapping (JSON)
    #[arg(long = "map", value_name = "FILE")]
    mapping: Option<PathBuf>,
    /// Operator unit-time overrides (JSON)
    #[arg(long, value_name = "FILE")]
    model: Option<PathBuf>,
    #[command(flatten)]
    binding: BindingArgs,
    /// IS count for the speed line
    #[arg(long = "is", value_name = "N")]
    is_count: Option<u64>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("count").required(true).args(["is_count", "concept", "formula"]))]
#[command(group = clap::ArgGroup::new("model").required(true).args(["speed", "speed_mean", "speed_file"]))]
struct EstimateArgs {
    #[arg(long = "is", value_name = "N")]
    is_count: Option<u64>,
    #[arg(long, value_name = "FILE")]
    concept: Option<PathBuf>,
    /// Normalized IS formula
    #[arg(long, value_name = "EXPR", allow_hyphen_values = true)]
    formula: Option<String>,
    #[command(flatten)]
    binding: BindingArgs,
    /// Built-in speed model: overall, v1 or v2
    #[arg(long, value_name = "NAME")]
    speed: Option<String>,
    #[arg(long, value_name = "IS_PER_S")]
    speed_mean: Option<f64>,
    #[arg(long, value_name = "IS_PER_S", requires = "speed_mean")]
    speed_min: Option<f64>,
    #[arg(long, value_name = "IS_PER_S", requires = "speed_mean")]
    speed_max: Option<f64>,
    /// Speed model as JSON
    #[arg(long, value_name = "FILE")]
    speed_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Grouping {
    Task,
    Concept,
    ConceptIs,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Tables {
    Tasks,
    Steps,
    All,
}

#[derive(Args, Debug)]
struct LogsArgs {
    /// Log file, or `-` for stdin
    log: String,
    /// Concept to check recorded IS counts against
    #[arg(long, value_name = "FILE")]
    concept: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "task")]
    group_by: Grouping,
    #[arg(long, value_enum, default_value = "all")]
    table: Tables,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, value_name = "FILE")]
    concept: PathBuf,
    #[command(flatten)]
    binding: BindingArgs,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    sessions: u64,
    #[arg(long, value_name = "IS_PER_S")]
    speed_mean: f64,
    #[arg(long, value_name = "IS_PER_S", default_value_t = 0.0)]
    speed_sd: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent
    #[arg(long, short, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    concept: PathBuf,
    #[command(flatten)]
    binding: BindingArgs,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

fn parse_assignment(s: &str) -> Result<(String, u64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
    let name = name.trim();
    if !is_valid_name(name) {
        return Err(format!("`{name}` is not a valid variable name"));
    }
    let value = value.trim().parse::<u64>().map_err(|_| format!("`{value}` is not a non-negative integer"))?;
    Ok((name.to_string(), value))
}

enum Failure {
    Usage(String),
    Domain(String),
}

type Outcome = Result<(), Failure>;

fn domain<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Domain(e.to_string())
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn io_fail(e: io::Error) -> Failure {
    Failure::Domain(format!("write failed: {e}"))
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))
}

fn load_concept(path: &Path) -> Result<InteractionConcept, Failure> {
    let text = read_file(path)?;
    let parsed = if path.extension().is_some_and(|x| x == "json") {
        InteractionConcept::from_json(&text)
    } else {
        parse_concept(&text)
    };
    parsed.map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))
}

impl BindingArgs {
    fn resolve(&self) -> Result<Binding, Failure> {
        let mut b = match &self.bindings {
            Some(path) => serde_json::from_str::<Binding>(&read_file(path)?)
                .map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))?,
            None => Binding::new(),
        };
        for (name, value) in &self.set {
            b.set(name, *value).map_err(domain)?;
        }
        Ok(b)
    }
}

/// Whether styled output is appropriate for the current stderr.
pub fn color_enabled() -> bool {
    std::env::var_os("IXCOMPLEX_NO_COLOR").is_none() && io::stderr().is_terminal()
}

struct Ui<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    color: bool,
}

impl Ui<'_> {
    fn label(&self, text: &str, code: &str) -> String {
        if self.color {
            format!("\x1b[{code}m{text}\x1b[0m")
        } else {
            text.to_string()
        }
    }

    fn warn(&mut self, msg: &str) {
        let label = self.label("warning:", "1;33");
        let _ = writeln!(self.err, "{label} {msg}");
    }

    fn error(&mut self, msg: &str) {
        let label = self.label("error:", "1;31");
        let _ = writeln!(self.err, "{label} {msg}");
    }
}

/// Runs the command line with `args` (program name first) and returns the
/// exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write, color: bool) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = if color { e.render().ansi().to_string() } else { e.render().to_string() };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{rendered}");
            return e.exit_code();
        }
    };
    let mut ui = Ui { out, err, color };
    let result = match &cli.command {
        Command::Analyze(a) => cmd_analyze(a, &mut ui),
        Command::Klm(a) => cmd_klm(a, &mut ui),
        Command::Estimate(a) => cmd_estimate(a, &mut ui),
        Command::Logs(a) => cmd_logs(a, &mut ui),
        Command::Synth(a) => cmd_synth(a, &mut ui),
        Command::Oracle(a) => cmd_oracle(a, &mut ui),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Domain(msg)) => {
            ui.error(&msg);
            1
        }
        Err(Failure::Usage(msg)) => {
            ui.error(&msg);
            2
        }
    }
}

fn reject_csv(format: Format) -> Outcome {
    if format == Format::Csv {
        return Err(usage("--format csv is only available for `logs`"));
    }
    Ok(())
}

fn cmd_analyze(a: &AnalyzeArgs, ui: &mut Ui) -> Outcome {
    reject_csv(a.format)?;
    let concept = load_concept(&a.concept)?;
    let b = a.binding.resolve()?;
    let used: Vec<&str> = concept.steps.iter().flat_map(|s| s.variables()).collect();
    let missing = b.missing(used.iter().copied());
    let binding = if b.is_empty() {
        None
    } else if !missing.is_empty() {
        let mut names: Vec<&str> = missing;
        names.sort_unstable();
        names.dedup();
        ui.warn(&format!("not instantiated, unbound: {}", names.join(", ")));
        None
    } else {
        Some(&b)
    };
    let report = analyze(&concept, binding).map_err(domain)?;

    let published = match &a.formula {
        Some(text) => {
            let n = NormalizedComplexity::new(parse_expr(text).map_err(|e| usage(format!("--formula: {e}")))?);
            let s = simplify(&n);
            let missing = b.missing(n.is_function.variables());
            let is_count =
                if b.is_empty() || !missing.is_empty() { None } else { Some(instantiate(&n, &b).map_err(domain)?) };
            Some((n, s, is_count))
        }
        None => None,
    };

    match a.format {
        Format::Json => {
            let value = match &published {
                None => serde_json::to_value(&report).map_err(domain)?,
                Some((n, s, is_count)) => json!({
                    "as_defined": report,
                    "as_published": {
                        "normalized": n.is_function,
                        "simplified": s,
                        "is_count": is_count,
                    },
                }),
            };
            writeln!(ui.out, "{}", serde_json::to_string_pretty(&value).map_err(domain)?).map_err(io_fail)?;
        }
        _ => {
            let mut text = String::new();
            if let Some((n, s, is_count)) = &published {
                text.push_str("as-published:\n");
                text.push_str(&format!("normalized:  {} IS\n", n.is_function.factored()));
                text.push_str(&format!(
                    "complexity:  I({})  {} interaction complexity\n",
                    s.retained.factored(),
                    s.class_label
                ));
                if let Some(is) = is_count {
                    text.push_str(&format!("IS = {is}\n"));
                }
                text.push_str("\nas-defined:\n");
            }
            text.push_str(&report.render_text());
            write!(ui.out, "{text}").map_err(io_fail)?;
        }
    }
    Ok(())
}

fn klm_model(path: Option<&PathBuf>) -> Result<KlmModel, Failure> {
    match path {
        Some(p) => KlmModel::from_json(&read_file(p)?).map_err(|e| Failure::Domain(format!("{}: {e}", p.display()))),
        None => Ok(KlmModel::default()),
    }
}

fn cmd_klm(a: &KlmArgs, ui: &mut Ui) -> Outcome {
    reject_csv(a.format)?;
    let model = klm_model(a.model.as_ref())?;
    let b = a.binding.resolve()?;
    let mut rows: Vec<(&str, KlmExpression)> = Vec::new();
    if let Some(path) = &a.concept {
        let mapping = match &a.mapping {
            Some(p) => ActionMapping::from_json(&read_file(p)?)
                .map_err(|e| Failure::Domain(format!("{}: {e}", p.display())))?,
            None => ActionMapping::default(),
        };
        rows.push(("as-defined", klm_from_concept(&load_concept(path)?, &mapping).map_err(domain)?));
    }
    if let Some(text) = &a.formula {
        rows.push(("as-published", klm_parse(text).map_err(|e| usage(format!("--formula: {e}")))?));
    }
    let labelled = rows.len() > 1;
    let mut results = Vec::new();
    for (label, k) in &rows {
        let seconds = klm_time(k, &model, &b).map_err(domain)?;
        let speed = match a.is_count {
            Some(is) => Some(klm_speed(is, seconds).map_err(domain)?),
            None => None,
        };
        results.push((label, k, seconds, speed));
    }
    match a.format {
        Format::Json => {
            let items: Vec<_> = results
                .iter()
                .map(|(label, k, seconds, speed)| {
                    json!({"label": label, "formula": k.formula(), "seconds": seconds, "is_per_s": speed})
                })
                .collect();
            writeln!(ui.out, "{}", serde_json::to_string_pretty(&items).map_err(domain)?).map_err(io_fail)?;
        }
        _ => {
            for (label, k, seconds, speed) in &results {
                let prefix = if labelled { format!("{label}: ") } else { String::new() };
                if a.concept.is_some() && **label == "as-defined" {
                    writeln!(ui.out, "{prefix}{}", k.formula()).map_err(io_fail)?;
                }
                let mut line = format!("{prefix}{} sec", fmt2(*seconds));
                if let Some(s) = speed {
                    line.push_str(&format!("  {} IS/sec", fmt2(*s)));
                }
                writeln!(ui.out, "{line}").map_err(io_fail)?;
            }
        }
    }
    Ok(())
}

fn cmd_estimate(a: &EstimateArgs, ui: &mut Ui) -> Outcome {
    reject_csv(a.format)?;
    let b = a.binding.resolve()?;
    let is_count = if let Some(n) = a.is_count {
        n
    } else if let Some(path) = &a.concept {
        let report = analyze(&load_concept(path)?, Some(&b)).map_err(domain)?;
        report.instantiated.map(|i| i.is_count).unwrap_or(0)
    } else {
        let text = a.formula.as_deref().unwrap_or_default();
        let n = NormalizedComplexity::new(parse_expr(text).map_err(|e| usage(format!("--formula: {e}")))?);
        instantiate(&n, &b).map_err(domain)?
    };
    let model = if let Some(name) = &a.speed {
        SpeedModel::builtin(name).map_err(domain)?
    } else if let Some(mean) = a.speed_mean {
        SpeedModel::new("custom", mean, a.speed_min, a.speed_max, "command line").map_err(domain)?
    } else {
        let path = a.speed_file.as_ref().expect("clap enforces one speed source");
        SpeedModel::from_json(&read_file(path)?).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))?
    };
    let e = estimate_time(is_count, &model);
    match a.format {
        Format::Json => {
            let v = json!({"is_count": is_count, "model": model, "estimate": e});
            writeln!(ui.out, "{}", serde_json::to_string_pretty(&v).map_err(domain)?).map_err(io_fail)?;
        }
        _ => {
            let mut text = format!("IS:        {is_count}\nmodel:     {} ({} IS/sec)\n", model.name, fmt2(model.mean));
            text.push_str(&format!("expected:  {} s\n", fmt2(e.expected)));
            if let Some(t) = e.fastest {
                text.push_str(&format!("fastest:   {} s\n", fmt2(t)));
            }
            if let Some(t) = e.slowest {
                text.push_str(&format!("slowest:   {} s\n", fmt2(t)));
            }
            write!(ui.out, "{text}").map_err(io_fail)?;
        }
    }
    Ok(())
}

fn cmd_logs(a: &LogsArgs, ui: &mut Ui) -> Outcome {
    if a.format == Format::Csv && a.table == Tables::All {
        return Err(usage("--format csv needs --table tasks or --table steps"));
    }
    let bytes = if a.log == "-" {
        let mut buf = Vec::new();
        io::stdin().read_to_end(&mut buf).map_err(|e| Failure::Domain(format!("stdin: {e}")))?;
        buf
    } else {
        fs::read(&a.log).map_err(|e| Failure::Domain(format!("{}: {e}", a.log)))?
    };
    let log = load_log(&bytes).map_err(domain)?;
    if let Some(path) = &a.concept {
        let concept = load_concept(path)?;
        for task in log.sessions.iter().flat_map(|s| &s.tasks).filter(|t| t.concept_name == concept.name) {
            match count_actions(&concept, &task.binding) {
                Ok(c) if c.total == task.is_count => {}
                Ok(c) => ui.warn(&format!(
                    "task `{}` records {} IS, concept gives {} at {}",
                    task.task_id, task.is_count, c.total, task.binding
                )),
                Err(e) => ui.warn(&format!("task `{}`: {e}", task.task_id)),
            }
        }
    }
    let group_by = match a.group_by {
        Grouping::Task => GroupBy::Task,
        Grouping::Concept => GroupBy::Concept,
        Grouping::ConceptIs => GroupBy::ConceptIs,
    };
    let mut tables: Vec<(&str, SpeedTable)> = Vec::new();
    if a.table != Tables::Steps {
        tables.push(("tasks", task_table(&log, group_by).map_err(domain)?));
    }
    if a.table != Tables::Tasks {
        tables.push(("steps", step_table(&log).map_err(domain)?));
    }
    for (_, t) in &tables {
        for w in &t.warnings {
            ui.warn(w);
        }
    }
    let text = match a.format {
        Format::Csv => tables[0].1.render_csv(),
        Format::Json => {
            let map: serde_json::Map<String, serde_json::Value> =
                tables.iter().map(|(name, t)| (name.to_string(), json!(t.rows))).collect();
            serde_json::to_string_pretty(&map).map_err(domain)? + "\n"
        }
        Format::Text => {
            let parts: Vec<String> = tables.iter().map(|(name, t)| format!("{name}:\n{}", t.render_text())).collect();
            parts.join("\n")
        }
    };
    write!(ui.out, "{text}").map_err(io_fail)
}

fn cmd_synth(a: &SynthArgs, ui: &mut Ui) -> Outcome {
    let cfg = SynthConfig {
        concept: load_concept(&a.concept)?,
        binding: a.binding.resolve()?,
        sessions: a.sessions as usize,
        speed_mean: a.speed_mean,
        speed_sd: a.speed_sd,
        seed: a.seed,
    };
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let json = generate_log(&cfg).map_err(domain)?.to_json() + "\n";
    match &a.output {
        Some(path) => fs::write(path, json).map_err(|e| Failure::Domain(format!("{}: {e}", path.display()))),
        None => ui.out.write_all(json.as_bytes()).map_err(io_fail),
    }
}

fn cmd_oracle(a: &OracleArgs, ui: &mut Ui) -> Outcome {
    reject_csv(a.format)?;
    let concept = load_concept(&a.concept)?;
    let counts = count_actions(&concept, &a.binding.resolve()?).map_err(domain)?;
    let text = match a.format {
        Format::Json => serde_json::to_string_pretty(&counts).map_err(domain)?,
        _ => counts.to_string(),
    };
    writeln!(ui.out, "{text}").map_err(io_fail)
}
