use std::collections::BTreeMap;
use std::fs;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tmkit::carving::{carving_kind, classify_event, coverage, finest_carving};
use tmkit::corpus::{corpus_entry, CORPUS};
use tmkit::dsl::{
    parse_dynamics, parse_scenario, parse_static_named, serialize_dynamics, DynamicModel,
    Scenario,
};
use tmkit::dynamics::{check_trace, simulate};
use tmkit::metamodel::StaticModel;
use tmkit::render::{to_dot_chronology, to_dot_dynamic, to_dot_static, RenderOptions};
use tmkit::report::{RuleDiagnostic, Severity, SourceDiagnostic};
use tmkit::validator::{validate_dynamic, validate_static};

#[derive(Parser)]
#[command(name = "tmkit", version, about = "Thimac model toolkit", disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check structural rules of a model, optionally with its dynamics.
    Validate {
        /// Model file (.tm) or corpus:NAME.
        file: String,
        /// Dynamic model file (.tmd); defaults to the corpus dynamics.
        #[arg(long)]
        dynamic: Option<String>,
        /// Treat warnings as failures.
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        json: bool,
    },
    /// Generate a carving of a model's actions into events.
    Carve {
        file: String,
        /// One singleton event per generic action.
        #[arg(long)]
        finest: bool,
        #[arg(short, long)]
        output: Option<String>,
    },
    /// Report uncovered and overlapping actions of a carving.
    Coverage {
        file: String,
        dynfile: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Classify each event region as a process category.
    Classify {
        file: String,
        dynfile: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Execute a chronology under a scenario and print the trace.
    Simulate {
        file: String,
        dynfile: Option<String>,
        /// Scenario file (.scn) or corpus scenario name.
        #[arg(long)]
        scenario: String,
        /// Also write the plain trace to a file.
        #[arg(long)]
        trace: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Emit a Graphviz DOT drawing of a model.
    Render {
        file: String,
        #[arg(long)]
        dynamic: Option<String>,
        /// Draw the chronology graph instead of the model diagram.
        #[arg(long)]
        chronology: bool,
        /// Show step annotations on nodes and arcs.
        #[arg(long)]
        labels: bool,
        #[arg(short, long)]
        output: String,
    },
    /// Access the embedded example models.
    Corpus {
        #[command(subcommand)]
        command: CorpusCommand,
    },
}

#[derive(Subcommand)]
enum CorpusCommand {
    /// List the embedded model names.
    List,
    /// Print the documents of one embedded model.
    Show { name: String },
}

/// Failures that abort a subcommand, carrying the process exit code:
/// 1 for findings in the input, 2 for usage/IO problems.
enum Failure {
    Findings(Vec<SourceDiagnostic>, bool),
    Message(String, u8),
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Failure {
        Failure::Message(msg.into(), 2)
    }

    fn finding(msg: impl Into<String>) -> Failure {
        Failure::Message(msg.into(), 1)
    }
}

fn report_failure(f: &Failure) -> u8 {
    match f {
        Failure::Findings(diags, json) => {
            if *json {
                let payload = serde_json::json!({ "parse_errors": diags });
                println!("{}", serde_json::to_string_pretty(&payload).unwrap());
            } else {
                for d in diags {
                    eprintln!("{}", d.to_line());
                }
            }
            1
        }
        Failure::Message(msg, code) => {
            eprintln!("error: {msg}");
            *code
        }
    }
}

/// A loaded static model plus, when it came from the corpus, its name
/// for resolving companion documents.
struct Source {
    model: StaticModel,
    corpus: Option<&'static str>,
}

fn read_file(path: &str) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read `{path}`: {e}")))
}

fn load_static(file: &str, json: bool) -> Result<Source, Failure> {
    if let Some(name) = file.strip_prefix("corpus:") {
        let entry = corpus_entry(name).ok_or_else(|| {
            Failure::usage(format!(
                "unknown corpus model `{name}` (available: {})",
                CORPUS.iter().map(|e| e.name).collect::<Vec<_>>().join(", ")
            ))
        })?;
        let model = parse_static_named(entry.statics, entry.name)
            .map_err(|d| Failure::Findings(d, json))?;
        Ok(Source { model, corpus: Some(entry.name) })
    } else {
        let text = read_file(file)?;
        let model =
            parse_static_named(&text, file).map_err(|d| Failure::Findings(d, json))?;
        Ok(Source { model, corpus: None })
    }
}

/// Resolve the dynamics document: an explicit file or corpus:NAME, or
/// the corpus companion of the static model.
fn load_dynamics(
    src: &Source,
    dynfile: Option<&str>,
    json: bool,
) -> Result<DynamicModel, Failure> {
    let text = match dynfile {
        Some(f) => match f.strip_prefix("corpus:") {
            Some(name) => corpus_dynamics_text(name)?,
            None => read_file(f)?,
        },
        None => match src.corpus {
            Some(name) => corpus_dynamics_text(name)?,
            None => {
                return Err(Failure::usage(
                    "a dynamic model file is required (or use a corpus: model)",
                ))
            }
        },
    };
    parse_dynamics(&text, &src.model).map_err(|d| Failure::Findings(d, json))
}

fn corpus_dynamics_text(name: &str) -> Result<String, Failure> {
    let entry = corpus_entry(name)
        .ok_or_else(|| Failure::usage(format!("unknown corpus model `{name}`")))?;
    entry
        .dynamics
        .map(str::to_string)
        .ok_or_else(|| Failure::usage(format!("corpus model `{name}` has no dynamic model")))
}

fn load_scenario(src: &Source, spec: &str, json: bool) -> Result<Scenario, Failure> {
    // A readable file wins; otherwise the name may refer to a corpus
    // scenario of the loaded model.
    if let Ok(text) = fs::read_to_string(spec) {
        return parse_scenario(&text, spec).map_err(|d| Failure::Findings(d, json));
    }
    if let Some(name) = src.corpus {
        let entry = corpus_entry(name).unwrap();
        if let Some((sname, text)) = entry.scenarios.iter().find(|(s, _)| *s == spec) {
            return parse_scenario(text, sname).map_err(|d| Failure::Findings(d, json));
        }
    }
    Err(Failure::usage(format!("cannot read scenario `{spec}`")))
}

fn write_output(path: &str, content: &str) -> Result<(), Failure> {
    fs::write(path, content)
        .map_err(|e| Failure::usage(format!("cannot write `{path}`: {e}")))
}

fn print_diagnostics(diags: &[RuleDiagnostic], json: bool) {
    if json {
        let payload = serde_json::json!({ "diagnostics": diags });
        println!("{}", serde_json::to_string_pretty(&payload).unwrap());
    } else {
        for d in diags {
            println!("{}", d.to_line());
        }
    }
}

fn cmd_validate(
    file: &str,
    dynamic: Option<&str>,
    strict: bool,
    json: bool,
) -> Result<u8, Failure> {
    let src = load_static(file, json)?;
    let mut diags = validate_static(&src.model);
    let check_dynamics = dynamic.is_some() || (src.corpus.is_some() && has_corpus_dynamics(&src));
    if check_dynamics {
        let dynm = load_dynamics(&src, dynamic, json)?;
        diags.extend(validate_dynamic(&dynm, &src.model));
    }
    print_diagnostics(&diags, json);
    let errors = diags.iter().any(|d| d.severity == Severity::Error);
    let warnings = diags.iter().any(|d| d.severity == Severity::Warning);
    Ok(if errors || (strict && warnings) { 1 } else { 0 })
}

fn has_corpus_dynamics(src: &Source) -> bool {
    src.corpus
        .and_then(corpus_entry)
        .is_some_and(|e| e.dynamics.is_some())
}

fn cmd_carve(file: &str, finest: bool, output: Option<&str>) -> Result<u8, Failure> {
    if !finest {
        return Err(Failure::usage("carve requires --finest (the only carving mode)"));
    }
    let src = load_static(file, false)?;
    let dynm = finest_carving(&src.model);
    let text = serialize_dynamics(&dynm, &src.model);
    match output {
        Some(path) => write_output(path, &text)?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn cmd_coverage(file: &str, dynfile: Option<&str>, json: bool) -> Result<u8, Failure> {
    let src = load_static(file, json)?;
    let dynm = load_dynamics(&src, dynfile, json)?;
    let report = coverage(&src.model, &dynm).map_err(|e| Failure::finding(e.to_string()))?;
    if json {
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
    } else {
        println!("events: {}", report.event_count);
        println!("actions: {}", report.action_count);
        println!("uncovered: {}", report.uncovered.len());
        for a in &report.uncovered {
            println!("  {a}");
        }
        println!("overlapping: {}", report.overlaps.len());
        for (a, events) in &report.overlaps {
            println!("  {a}: {}", events.join(", "));
        }
    }
    Ok(0)
}

fn cmd_classify(file: &str, dynfile: Option<&str>, json: bool) -> Result<u8, Failure> {
    let src = load_static(file, json)?;
    let dynm = load_dynamics(&src, dynfile, json)?;
    let classes: BTreeMap<&str, &str> = dynm
        .events
        .iter()
        .map(|e| (e.id.as_str(), classify_event(e, &src.model).name()))
        .collect();
    let kind = carving_kind(&src.model, &dynm);
    if json {
        let payload = serde_json::json!({
            "events": classes,
            "structural": kind.structural,
            "processual": kind.processual,
        });
        println!("{}", serde_json::to_string_pretty(&payload).unwrap());
    } else {
        for e in &dynm.events {
            println!("{} {}", e.id, classes[e.id.as_str()]);
        }
        println!("structural: {}, processual: {}", kind.structural, kind.processual);
    }
    Ok(0)
}

fn cmd_simulate(
    file: &str,
    dynfile: Option<&str>,
    scenario: &str,
    trace_out: Option<&str>,
    json: bool,
) -> Result<u8, Failure> {
    let src = load_static(file, json)?;
    let dynm = load_dynamics(&src, dynfile, json)?;
    let scn = load_scenario(&src, scenario, json)?;
    let trace = simulate(&dynm, &scn).map_err(|e| Failure::finding(e.to_string()))?;
    let violations = check_trace(&trace, &dynm.chronology, &scn);
    if json {
        let payload = serde_json::json!({
            "trace": trace,
            "violations": violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        });
        println!("{}", serde_json::to_string_pretty(&payload).unwrap());
    } else {
        print!("{}", trace.to_lines());
        for v in &violations {
            println!("violation: {v}");
        }
    }
    if let Some(path) = trace_out {
        write_output(path, &trace.to_lines())?;
    }
    Ok(if violations.is_empty() { 0 } else { 1 })
}

fn cmd_render(
    file: &str,
    dynamic: Option<&str>,
    chronology: bool,
    labels: bool,
    output: &str,
) -> Result<u8, Failure> {
    let src = load_static(file, false)?;
    let opts = RenderOptions { show_step_labels: labels, ..Default::default() };
    let wants_dynamics =
        dynamic.is_some() || chronology || (src.corpus.is_some() && has_corpus_dynamics(&src));
    let dot = if wants_dynamics {
        let dynm = load_dynamics(&src, dynamic, false)?;
        if chronology {
            to_dot_chronology(&dynm)
        } else {
            to_dot_dynamic(&src.model, &dynm, &opts)
                .map_err(|e| Failure::finding(e.to_string()))?
        }
    } else {
        to_dot_static(&src.model, &opts)
    };
    write_output(output, &dot)?;
    Ok(0)
}

fn cmd_corpus(command: &CorpusCommand) -> Result<u8, Failure> {
    match command {
        CorpusCommand::List => {
            for e in CORPUS {
                println!("{} - {}", e.name, e.description);
            }
            Ok(0)
        }
        CorpusCommand::Show { name } => {
            let entry = corpus_entry(name)
                .ok_or_else(|| Failure::usage(format!("unknown corpus model `{name}`")))?;
            print!("{}", entry.statics);
            if let Some(d) = entry.dynamics {
                println!();
                print!("{d}");
            }
            for (sname, text) in entry.scenarios {
                println!();
                println!("# scenario file: {sname}.scn");
                print!("{text}");
            }
            Ok(0)
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match &cli.command {
        Command::Validate { file, dynamic, strict, json } => {
            cmd_validate(file, dynamic.as_deref(), *strict, *json)
        }
        Command::Carve { file, finest, output } => {
            cmd_carve(file, *finest, output.as_deref())
        }
        Command::Coverage { file, dynfile, json } => {
            cmd_coverage(file, dynfile.as_deref(), *json)
        }
        Command::Classify { file, dynfile, json } => {
            cmd_classify(file, dynfile.as_deref(), *json)
        }
        Command::Simulate { file, dynfile, scenario, trace, json } => {
            cmd_simulate(file, dynfile.as_deref(), scenario, trace.as_deref(), *json)
        }
        Command::Render { file, dynamic, chronology, labels, output } => {
            cmd_render(file, dynamic.as_deref(), *chronology, *labels, output)
        }
        Command::Corpus { command } => cmd_corpus(command),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => ExitCode::from(report_failure(&f)),
    }
}
