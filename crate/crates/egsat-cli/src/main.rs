//! Command-line front end for the goal-model toolkit.
//!
//! Exit status: 0 on success, 1 when the model carries error diagnostics
//! or a statistical test rejects its input, 2 on usage/IO/format errors.
//! Reports go to standard output, diagnostics and usage to the error
//! stream.

use std::fs;
use std::io::{BufRead, IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use egsat::analysis::{self, TraceDirection};
use egsat::consolidate::{self, DEFAULT_SIMILARITY_THRESHOLD};
use egsat::diag::{has_errors, Diagnostic, Severity};
use egsat::model::{AttachmentDriver, GoalId, GoalModel};
use egsat::render::{self, Direction, RenderOptions};
use egsat::stats::{self, WilcoxonMethod};
use egsat::{parse_named, printer};

#[derive(Parser)]
#[command(name = "egsat", version, about = "Goal-model compiler and analysis toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a model and run the well-formedness rules.
    Check { path: PathBuf },
    /// Pretty-print a model in canonical form.
    Fmt {
        path: PathBuf,
        /// Rewrite the file in place (only when the content changes).
        #[arg(long)]
        write: bool,
    },
    /// Answer How/Why traceability queries.
    Trace {
        path: PathBuf,
        #[command(flatten)]
        query: TraceQuery,
    },
    /// Report functional/quality support per emotional goal.
    Coverage { path: PathBuf },
    /// Merge similar functional or quality goals.
    Consolidate {
        path: PathBuf,
        /// Merge directive file: `merge <id>[,<id>]+ -> <new_id> "<name>"`.
        #[arg(long, conflicts_with = "suggest")]
        directives: Option<PathBuf>,
        /// Write the merged model here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print duplicate-name candidates instead of merging.
        #[arg(long)]
        suggest: bool,
        /// Token-overlap ratio for --suggest.
        #[arg(long, default_value_t = DEFAULT_SIMILARITY_THRESHOLD)]
        threshold: f64,
    },
    /// Evaluation statistics over CSV input.
    Stats {
        #[arg(value_enum)]
        which: StatsKind,
        #[arg(long)]
        csv: PathBuf,
        /// Wilcoxon method.
        #[arg(long, value_enum, default_value_t = MethodArg::Normal)]
        method: MethodArg,
        /// Tie-corrected variance for the normal method.
        #[arg(long)]
        tie_correction: bool,
    },
    /// Export a model as DOT, JSON or a Markdown report.
    Render {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::Dot)]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Left-to-right diagram layout instead of top-down.
        #[arg(long)]
        left_right: bool,
    },
    /// Scripted prompt sequence producing a model skeleton.
    Elicit {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct TraceQuery {
    /// Trace downward from this goal to functional/quality goals.
    #[arg(long, value_name = "ID")]
    how: Option<String>,
    /// Trace upward from this goal to emotional goals.
    #[arg(long, value_name = "ID")]
    why: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum StatsKind {
    Wilcoxon,
    Kappa,
    Freq,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum MethodArg {
    Normal,
    Exact,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Dot,
    Json,
    Md,
}

const EXIT_OK: u8 = 0;
const EXIT_MODEL: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    ExitCode::from(run(cli))
}

fn run(cli: Cli) -> u8 {
    match cli.command {
        Command::Check { path } => cmd_check(&path),
        Command::Fmt { path, write } => cmd_fmt(&path, write),
        Command::Trace { path, query } => cmd_trace(&path, &query),
        Command::Coverage { path } => cmd_coverage(&path),
        Command::Consolidate { path, directives, out, suggest, threshold } => {
            cmd_consolidate(&path, directives.as_deref(), out.as_deref(), suggest, threshold)
        }
        Command::Stats { which, csv, method, tie_correction } => {
            cmd_stats(which, &csv, method, tie_correction)
        }
        Command::Render { path, format, out, left_right } => {
            cmd_render(&path, format, out.as_deref(), left_right)
        }
        Command::Elicit { out } => cmd_elicit(&out),
    }
}

fn read_file(path: &Path) -> Result<String, u8> {
    fs::read_to_string(path).map_err(|e| {
        eprintln!("egsat: cannot read {}: {e}", path.display());
        EXIT_USAGE
    })
}

fn load_model(path: &Path) -> Result<GoalModel, u8> {
    let source = read_file(path)?;
    let result = parse_named(&path.to_string_lossy(), &source);
    if !result.diagnostics.is_empty() {
        print_diagnostics(&result.diagnostics);
    }
    result.model.ok_or(EXIT_MODEL)
}

fn print_diagnostics(diags: &[Diagnostic]) {
    let color = use_color();
    let mut stderr = std::io::stderr().lock();
    for d in diags {
        let line = d.render_line();
        if color {
            let tint = match d.severity {
                Severity::Error => "\x1b[31m",
                Severity::Warning => "\x1b[33m",
            };
            let _ = writeln!(stderr, "{tint}{line}\x1b[0m");
        } else {
            let _ = writeln!(stderr, "{line}");
        }
    }
}

fn use_color() -> bool {
    match std::env::var("EGSAT_COLOR").as_deref() {
        Ok("always") => true,
        Ok("never") => false,
        _ => std::io::stderr().is_terminal(),
    }
}

fn write_output(out: Option<&Path>, content: &str) -> u8 {
    match out {
        None => {
            print!("{content}");
            EXIT_OK
        }
        Some(path) => match fs::write(path, content) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                eprintln!("egsat: cannot write {}: {e}", path.display());
                EXIT_USAGE
            }
        },
    }
}

fn cmd_check(path: &Path) -> u8 {
    let model = match load_model(path) {
        Ok(m) => m,
        Err(code) => return code,
    };
    let diags = analysis::check(&model);
    if diags.is_empty() {
        println!("No issues found.");
        return EXIT_OK;
    }
    print_diagnostics(&diags);
    if has_errors(&diags) {
        EXIT_MODEL
    } else {
        EXIT_OK
    }
}

fn cmd_fmt(path: &Path, write: bool) -> u8 {
    let source = match read_file(path) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let result = parse_named(&path.to_string_lossy(), &source);
    let model = match result.model {
        Some(m) => m,
        None => {
            print_diagnostics(&result.diagnostics);
            return EXIT_MODEL;
        }
    };
    let formatted = printer::format(&model);
    if write {
        if formatted != source {
            if let Err(e) = fs::write(path, &formatted) {
                eprintln!("egsat: cannot write {}: {e}", path.display());
                return EXIT_USAGE;
            }
        }
        EXIT_OK
    } else {
        print!("{formatted}");
        EXIT_OK
    }
}

fn cmd_trace(path: &Path, query: &TraceQuery) -> u8 {
    let model = match load_model(path) {
        Ok(m) => m,
        Err(code) => return code,
    };
    let (text, direction) = match (&query.how, &query.why) {
        (Some(id), None) => (id, TraceDirection::How),
        (None, Some(id)) => (id, TraceDirection::Why),
        _ => unreachable!("clap enforces exactly one"),
    };
    let Some(subject) = GoalId::new(text.clone()) else {
        eprintln!("egsat: `{text}` is not a valid goal id");
        return EXIT_USAGE;
    };
    let report = match analysis::trace(&model, &subject, direction, analysis::DEFAULT_PATH_CAP) {
        Ok(r) => r,
        Err(diags) => {
            print_diagnostics(&diags);
            return EXIT_MODEL;
        }
    };
    print!("{}", render::report_trace(&report, &model));
    EXIT_OK
}

fn cmd_coverage(path: &Path) -> u8 {
    let model = match load_model(path) {
        Ok(m) => m,
        Err(code) => return code,
    };
    print!("{}", render::report_coverage(&analysis::coverage(&model), &model));
    EXIT_OK
}

fn cmd_consolidate(
    path: &Path,
    directives: Option<&Path>,
    out: Option<&Path>,
    suggest: bool,
    threshold: f64,
) -> u8 {
    let model = match load_model(path) {
        Ok(m) => m,
        Err(code) => return code,
    };
    if suggest {
        for c in consolidate::suggest_duplicates(&model, threshold) {
            println!("{} <-> {} (ratio {:.2})", c.a, c.b, c.ratio);
        }
        return EXIT_OK;
    }
    let Some(directive_path) = directives else {
        eprintln!("egsat: consolidate requires --directives FILE or --suggest");
        return EXIT_USAGE;
    };
    let text = match read_file(directive_path) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let directives = match consolidate::parse_directives(&text) {
        Ok(d) => d,
        Err(diags) => {
            print_diagnostics(&diags);
            return EXIT_USAGE;
        }
    };
    match consolidate::consolidate(&model, &directives) {
        Ok((merged, log)) => {
            for entry in &log {
                eprintln!(
                    "merged {} -> {} ({} attachments inherited)",
                    entry
                        .replaced
                        .iter()
                        .map(|id| id.to_string())
                        .collect::<Vec<_>>()
                        .join(", "),
                    entry.directive.new_id,
                    entry.inherited_attachments
                );
            }
            write_output(out, &printer::format(&merged))
        }
        Err(diags) => {
            print_diagnostics(&diags);
            EXIT_MODEL
        }
    }
}

fn cmd_stats(which: StatsKind, csv: &Path, method: MethodArg, tie_correction: bool) -> u8 {
    let data = match read_file(csv) {
        Ok(d) => d,
        Err(code) => return code,
    };
    let outcome: Result<String, Diagnostic> = match which {
        StatsKind::Wilcoxon => stats::read_paired_samples_csv(&data).and_then(|pairs| {
            let method = match method {
                MethodArg::Normal => WilcoxonMethod::NormalApprox,
                MethodArg::Exact => WilcoxonMethod::Exact,
            };
            stats::wilcoxon_signed_rank(&pairs, method, tie_correction)
                .map(|r| render::report_wilcoxon(&r))
        }),
        StatsKind::Kappa => stats::read_ratings_csv(&data)
            .and_then(|(a, b)| stats::cohens_kappa(&a, &b).map(|r| render::report_kappa(&r))),
        StatsKind::Freq => stats::read_frequency_records_csv(&data).and_then(|records| {
            stats::group_frequencies(&records).map(|t| render::report_frequency(&t))
        }),
    };
    match outcome {
        Ok(report) => {
            print!("{report}");
            EXIT_OK
        }
        Err(diag) => {
            print_diagnostics(&[diag.clone()]);
            // Malformed input is a usage problem; a well-formed but
            // untestable sample is a rejection.
            if diag.code == "S005" {
                EXIT_USAGE
            } else {
                EXIT_MODEL
            }
        }
    }
}

fn cmd_render(path: &Path, format: FormatArg, out: Option<&Path>, left_right: bool) -> u8 {
    let model = match load_model(path) {
        Ok(m) => m,
        Err(code) => return code,
    };
    let content = match format {
        FormatArg::Dot => {
            let options = RenderOptions {
                direction: if left_right { Direction::LeftRight } else { Direction::TopDown },
                ..RenderOptions::default()
            };
            render::to_dot(&model, &options)
        }
        FormatArg::Json => render::to_json(&model),
        FormatArg::Md => {
            let mut md = format!("# Model `{}`\n\n", model.name());
            md.push_str(&format!("{} goals.\n\n", model.len()));
            md.push_str("## Coverage\n\n");
            md.push_str(&render::report_coverage(&analysis::coverage(&model), &model));
            md.push_str("\n## Diagnostics\n\n");
            md.push_str(&render::report_diagnostics(&analysis::check(&model)));
            md
        }
    };
    write_output(out, &content)
}

/// Linear prompt walk over the three analysis steps: list emotional
/// goals, answer How per goal, confirm Why per proposed goal, then write
/// an `.egsat` skeleton.
fn cmd_elicit(out: &Path) -> u8 {
    let stdin = std::io::stdin();
    let mut lines = stdin.lock().lines();
    let mut next_line = move || -> String {
        lines
            .next()
            .and_then(|l| l.ok())
            .unwrap_or_default()
            .trim()
            .to_string()
    };

    println!("Model name?");
    let mut name = next_line();
    if name.is_empty() {
        name = "Untitled".to_string();
    }

    struct Elicited {
        emotional: String,
        driver: Option<AttachmentDriver>,
        functional: Vec<String>,
        quality: Vec<String>,
    }

    let mut entries: Vec<Elicited> = Vec::new();
    loop {
        println!("Emotional goal (empty line to finish)?");
        let emotional = next_line();
        if emotional.is_empty() {
            break;
        }
        println!("Attachment driver for \"{emotional}\" (IdealSelf, PublicSelf, Affiliation, PhysicalPleasure, SocialPleasure, IdeologicalPleasure, Memories; empty to skip)?");
        let driver = loop {
            let text = next_line();
            if text.is_empty() {
                break None;
            }
            match AttachmentDriver::from_surface_name(&text) {
                Some(d) => break Some(d),
                None => println!("Unknown driver `{text}`; try again or leave empty."),
            }
        };
        println!("How can \"{emotional}\" be addressed? Functional goals, comma-separated:");
        let functional: Vec<String> = split_list(&next_line());
        println!("Quality goals the system should maintain for it, comma-separated (may be empty):");
        let quality: Vec<String> = split_list(&next_line());

        // Appraisal pass: keep only the goals that survive the Why question.
        let keep = |kind: &str, items: Vec<String>, next_line: &mut dyn FnMut() -> String| -> Vec<String> {
            items
                .into_iter()
                .filter(|item| {
                    println!("Why is \"{item}\" necessary for \"{emotional}\"? Keep this {kind} goal? [Y/n]");
                    let answer = next_line();
                    !answer.eq_ignore_ascii_case("n")
                })
                .collect()
        };
        let functional = keep("functional", functional, &mut next_line);
        let quality = keep("quality", quality, &mut next_line);
        entries.push(Elicited { emotional, driver, functional, quality });
    }

    let mut src = format!("model {:?} {{\n", name);
    for e in &entries {
        src.push_str(&format!("  emotional {:?}", e.emotional));
        if let Some(d) = e.driver {
            src.push_str(&format!(" driver:{d}"));
        }
        if e.functional.is_empty() && e.quality.is_empty() {
            src.push('\n');
            continue;
        }
        src.push_str(" {\n    how and {\n");
        for f in &e.functional {
            src.push_str(&format!("      functional {f:?}\n"));
        }
        for q in &e.quality {
            src.push_str(&format!("      quality {q:?}\n"));
        }
        src.push_str("    }\n  }\n");
    }
    src.push_str("}\n");

    if let Err(e) = fs::write(out, &src) {
        eprintln!("egsat: cannot write {}: {e}", out.display());
        return EXIT_USAGE;
    }
    println!("Wrote {}. Run `egsat check` on it next.", out.display());
    EXIT_OK
}

fn split_list(line: &str) -> Vec<String> {
    line.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}
