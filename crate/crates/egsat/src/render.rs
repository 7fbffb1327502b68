//! Serialization to DOT and JSON, plus Markdown report rendering.

use serde_json::{json, Map, Value};

use crate::analysis::{CoverageReport, TraceDirection, TraceReport};
use crate::diag::Diagnostic;
use crate::model::{
    build_model, AttachmentDriver, Combinator, Decomposition, Goal, GoalId, GoalKind, GoalModel,
    QualityAttachment,
};
use crate::stats::{FrequencyTable, KappaResult, PreferenceSummary, Verdict, WilcoxonMethod, WilcoxonResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    TopDown,
    LeftRight,
}

#[derive(Debug, Clone, Copy)]
pub struct RenderOptions {
    pub direction: Direction,
    pub show_drivers: bool,
    pub show_frequencies: bool,
    /// Heart glyph prefix on emotional goal labels.
    pub glyphs: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            direction: Direction::TopDown,
            show_drivers: true,
            show_frequencies: true,
            glyphs: true,
        }
    }
}

/// DOT rendering. Functional goals are parallelograms, quality goals
/// dashed ellipses, emotional goals ellipses with a heart prefix (DOT has
/// no heart or cloud shape). Each decomposition runs through a small
/// junction node labeled AND/OR so the combinator stays visible on wide
/// fans. Emission order follows declaration order, so equal models render
/// byte-identically.
pub fn to_dot(model: &GoalModel, options: &RenderOptions) -> String {
    let mut out = String::new();
    out.push_str("digraph egsat {\n");
    let rankdir = match options.direction {
        Direction::TopDown => "TB",
        Direction::LeftRight => "LR",
    };
    out.push_str(&format!("  rankdir={rankdir};\n"));
    out.push_str(&format!("  label={};\n", dot_quote(model.name())));
    out.push_str("  node [fontname=\"Helvetica\"];\n");

    for goal in model.goals() {
        let mut label = String::new();
        if goal.kind == GoalKind::Emotional && options.glyphs {
            label.push_str("\u{2665} ");
        }
        label.push_str(&goal.name);
        if goal.kind == GoalKind::Emotional {
            if options.show_frequencies {
                if let Some(f) = goal.frequency {
                    label.push_str(&format!("\\nfreq {f}"));
                }
            }
            if options.show_drivers {
                if let Some(d) = goal.driver {
                    label.push_str(&format!("\\n[{d}]"));
                }
            }
        }
        let attrs = match goal.kind {
            GoalKind::Emotional => "shape=ellipse",
            GoalKind::Functional => "shape=parallelogram",
            GoalKind::Quality => "shape=ellipse, style=dashed",
        };
        out.push_str(&format!(
            "  {} [label={}, {attrs}];\n",
            dot_id(&goal.id),
            dot_quote_label(&label)
        ));
    }

    for d in model.decompositions() {
        let junction = format!("\"{}_dec\"", d.parent.as_str());
        let comb = match d.combinator {
            Combinator::And => "AND",
            Combinator::Or => "OR",
        };
        out.push_str(&format!(
            "  {junction} [label=\"{comb}\", shape=circle, width=0.35, fixedsize=true, fontsize=9];\n"
        ));
        out.push_str(&format!("  {} -> {junction};\n", dot_id(&d.parent)));
        for child in &d.children {
            out.push_str(&format!("  {junction} -> {};\n", dot_id(child)));
        }
    }
    for a in model.attachments() {
        out.push_str(&format!(
            "  {} -> {} [style=dashed];\n",
            dot_id(&a.functional),
            dot_id(&a.quality)
        ));
    }
    out.push_str("}\n");
    out
}

fn dot_id(id: &GoalId) -> String {
    // Goal ids may contain `-`, which DOT bare ids do not allow.
    format!("\"{}\"", id.as_str())
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn dot_quote_label(s: &str) -> String {
    // Label text already uses \n escapes for line breaks; only quotes need
    // protecting.
    format!("\"{}\"", s.replace('"', "\\\""))
}

/// Lossless interchange JSON. Spans are source-only and not serialized.
pub fn to_json(model: &GoalModel) -> String {
    let goals: Vec<Value> = model
        .goals()
        .map(|g| {
            let mut obj = Map::new();
            obj.insert("id".into(), json!(g.id.as_str()));
            obj.insert("kind".into(), json!(g.kind.to_string()));
            obj.insert("name".into(), json!(g.name));
            if let Some(d) = g.driver {
                obj.insert("driver".into(), json!(d.surface_name()));
            }
            if let Some(f) = g.frequency {
                obj.insert("frequency".into(), json!(f));
            }
            if let Some(n) = &g.note {
                obj.insert("note".into(), json!(n));
            }
            Value::Object(obj)
        })
        .collect();
    let decompositions: Vec<Value> = model
        .decompositions()
        .iter()
        .map(|d| {
            json!({
                "parent": d.parent.as_str(),
                "combinator": d.combinator.to_string(),
                "children": d.children.iter().map(GoalId::as_str).collect::<Vec<_>>(),
            })
        })
        .collect();
    let attachments: Vec<Value> = model
        .attachments()
        .iter()
        .map(|a| json!({"functional": a.functional.as_str(), "quality": a.quality.as_str()}))
        .collect();
    let doc = json!({
        "name": model.name(),
        "goals": goals,
        "decompositions": decompositions,
        "attachments": attachments,
    });
    serde_json::to_string(&doc).expect("JSON value serializes")
}

/// Parses interchange JSON back into a model. Schema violations produce
/// X001 diagnostics carrying a JSON-pointer-style path.
pub fn from_json(text: &str) -> Result<GoalModel, Vec<Diagnostic>> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| vec![Diagnostic::error("X001", format!("invalid JSON: {e}"))])?;
    let mut diags = Vec::new();
    let root = require_object(&value, "", &mut diags);

    let mut name = String::new();
    let mut goals = Vec::new();
    let mut decompositions = Vec::new();
    let mut attachments = Vec::new();

    if let Some(root) = root {
        name = require_string(root, "/name", "name", &mut diags).unwrap_or_default();
        for (i, item) in require_array(root, "/goals", "goals", &mut diags).iter().enumerate() {
            let path = format!("/goals/{i}");
            if let Some(goal) = parse_goal(item, &path, &mut diags) {
                goals.push(goal);
            }
        }
        for (i, item) in require_array(root, "/decompositions", "decompositions", &mut diags).iter().enumerate() {
            let path = format!("/decompositions/{i}");
            if let Some(d) = parse_decomposition(item, &path, &mut diags) {
                decompositions.push(d);
            }
        }
        for (i, item) in require_array(root, "/attachments", "attachments", &mut diags).iter().enumerate() {
            let path = format!("/attachments/{i}");
            if let Some(a) = parse_attachment(item, &path, &mut diags) {
                attachments.push(a);
            }
        }
    }
    if !diags.is_empty() {
        return Err(diags);
    }
    build_model(name, goals, decompositions, attachments)
}

fn x001(path: &str, message: &str) -> Diagnostic {
    Diagnostic::error("X001", format!("{path}: {message}"))
}

fn require_object<'v>(value: &'v Value, path: &str, diags: &mut Vec<Diagnostic>) -> Option<&'v Map<String, Value>> {
    match value.as_object() {
        Some(o) => Some(o),
        None => {
            diags.push(x001(if path.is_empty() { "/" } else { path }, "expected an object"));
            None
        }
    }
}

fn require_string(obj: &Map<String, Value>, path: &str, key: &str, diags: &mut Vec<Diagnostic>) -> Option<String> {
    match obj.get(key) {
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => {
            diags.push(x001(path, "expected a string"));
            None
        }
        None => {
            diags.push(x001(path, "missing required field"));
            None
        }
    }
}

fn require_array<'v>(obj: &'v Map<String, Value>, path: &str, key: &str, diags: &mut Vec<Diagnostic>) -> &'v [Value] {
    match obj.get(key) {
        Some(Value::Array(a)) => a,
        Some(_) => {
            diags.push(x001(path, "expected an array"));
            &[]
        }
        None => {
            diags.push(x001(path, "missing required field"));
            &[]
        }
    }
}

fn parse_id(obj: &Map<String, Value>, path: &str, key: &str, diags: &mut Vec<Diagnostic>) -> Option<GoalId> {
    let text = require_string(obj, &format!("{path}/{key}"), key, diags)?;
    match GoalId::new(&text) {
        Some(id) => Some(id),
        None => {
            diags.push(x001(&format!("{path}/{key}"), &format!("`{text}` is not a valid goal id")));
            None
        }
    }
}

fn parse_goal(value: &Value, path: &str, diags: &mut Vec<Diagnostic>) -> Option<Goal> {
    let obj = require_object(value, path, diags)?;
    let id = parse_id(obj, path, "id", diags);
    let kind = match require_string(obj, &format!("{path}/kind"), "kind", diags)?.as_str() {
        "emotional" => Some(GoalKind::Emotional),
        "functional" => Some(GoalKind::Functional),
        "quality" => Some(GoalKind::Quality),
        other => {
            diags.push(x001(&format!("{path}/kind"), &format!("unknown goal kind `{other}`")));
            None
        }
    };
    let name = require_string(obj, &format!("{path}/name"), "name", diags);
    let mut goal = Goal::new(id?, kind?, name?);
    if let Some(v) = obj.get("driver") {
        match v.as_str().and_then(AttachmentDriver::from_surface_name) {
            Some(d) => goal.driver = Some(d),
            None => {
                diags.push(x001(&format!("{path}/driver"), "unknown driver name"));
                return None;
            }
        }
    }
    if let Some(v) = obj.get("frequency") {
        match v.as_u64() {
            Some(f) if f <= u32::MAX as u64 => goal.frequency = Some(f as u32),
            _ => {
                diags.push(x001(&format!("{path}/frequency"), "expected a non-negative integer"));
                return None;
            }
        }
    }
    if let Some(v) = obj.get("note") {
        match v.as_str() {
            Some(n) => goal.note = Some(n.to_string()),
            None => {
                diags.push(x001(&format!("{path}/note"), "expected a string"));
                return None;
            }
        }
    }
    Some(goal)
}

fn parse_decomposition(value: &Value, path: &str, diags: &mut Vec<Diagnostic>) -> Option<Decomposition> {
    let obj = require_object(value, path, diags)?;
    let parent = parse_id(obj, path, "parent", diags);
    let combinator = match require_string(obj, &format!("{path}/combinator"), "combinator", diags)?.as_str() {
        "and" => Some(Combinator::And),
        "or" => Some(Combinator::Or),
        other => {
            diags.push(x001(&format!("{path}/combinator"), &format!("unknown combinator `{other}`")));
            None
        }
    };
    let mut children = Vec::new();
    match obj.get("children") {
        Some(Value::Array(items)) => {
            for (i, item) in items.iter().enumerate() {
                let child_path = format!("{path}/children/{i}");
                match item.as_str().and_then(GoalId::new) {
                    Some(id) => children.push(id),
                    None => diags.push(x001(&child_path, "expected a goal id")),
                }
            }
        }
        _ => diags.push(x001(&format!("{path}/children"), "expected an array of goal ids")),
    }
    Some(Decomposition {
        parent: parent?,
        combinator: combinator?,
        children,
    })
}

fn parse_attachment(value: &Value, path: &str, diags: &mut Vec<Diagnostic>) -> Option<QualityAttachment> {
    let obj = require_object(value, path, diags)?;
    let functional = parse_id(obj, path, "functional", diags);
    let quality = parse_id(obj, path, "quality", diags);
    Some(QualityAttachment {
        functional: functional?,
        quality: quality?,
    })
}

// ---------------------------------------------------------------------------
// Markdown reports

pub fn report_diagnostics(diags: &[Diagnostic]) -> String {
    if diags.is_empty() {
        return "No issues found.\n".to_string();
    }
    let mut out = String::new();
    for d in diags {
        out.push_str(&d.render_line());
        out.push('\n');
    }
    out
}

pub fn report_coverage(report: &CoverageReport, model: &GoalModel) -> String {
    let mut out = String::from("| Emotional Goal | Name | Functional | Quality | Supported |\n");
    out.push_str("|---|---|---:|---:|---|\n");
    for row in &report.rows {
        let name = model.goal(&row.goal).map(|g| g.name.as_str()).unwrap_or("");
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} |\n",
            row.goal,
            name,
            row.functional_count,
            row.quality_count,
            if row.unsupported { "no" } else { "yes" }
        ));
    }
    out.push_str(&format!(
        "\n{} of {} emotional goals unsupported.\n",
        report.unsupported_count(),
        report.rows.len()
    ));
    out
}

pub fn report_trace(report: &TraceReport, model: &GoalModel) -> String {
    let direction = match report.direction {
        TraceDirection::How => "How",
        TraceDirection::Why => "Why",
    };
    let mut out = format!("# {direction} trace for `{}`\n\n", report.subject);
    let mut reached: Vec<&GoalId> = report.reached.iter().collect();
    reached.sort();
    out.push_str("Reached:\n");
    if reached.is_empty() {
        out.push_str("- (none)\n");
    }
    for id in reached {
        let name = model.goal(id).map(|g| g.name.as_str()).unwrap_or("");
        out.push_str(&format!("- {id} ({name})\n"));
    }
    out.push_str("\nPaths:\n");
    for path in &report.paths {
        let ids: Vec<&str> = path.iter().map(GoalId::as_str).collect();
        out.push_str(&format!("- {}\n", ids.join(" -> ")));
    }
    if report.truncated {
        out.push_str("\n(path list truncated)\n");
    }
    out
}

/// Frequency table in the case-study column order: emotional goal,
/// sub-goal, frequency, driver.
pub fn report_frequency(table: &FrequencyTable) -> String {
    let mut out = String::from("| Emotional Goal | Sub-emotional Goal | Frequency | Driver |\n");
    out.push_str("|---|---|---:|---|\n");
    for row in &table.rows {
        out.push_str(&format!(
            "| {} | {} | {} | {} |\n",
            row.group,
            row.sub_group.as_deref().unwrap_or("-"),
            row.frequency,
            row.driver
        ));
    }
    out.push_str(&format!("\nTotal records: {}\n", table.total()));
    out
}

pub fn report_wilcoxon(result: &WilcoxonResult) -> String {
    let method = match result.method {
        WilcoxonMethod::NormalApprox => "normal approximation",
        WilcoxonMethod::Exact => "exact enumeration",
    };
    let mut out = format!(
        "Wilcoxon signed-rank ({method}): n = {} ({} effective), W+ = {}, W- = {}, T = {}\n",
        result.n_input, result.n_effective, result.w_plus, result.w_minus, result.statistic_t
    );
    if let Some(z) = result.z {
        out.push_str(&format!("z = {z:.4}\n"));
    }
    out.push_str(&format!("p = {}\n", format_p(result.p_two_sided)));
    out
}

/// p-values render with 5 decimal places, truncated toward zero.
fn format_p(p: f64) -> String {
    format!("{:.5}", (p * 1e5).floor() / 1e5)
}

pub fn report_kappa(result: &KappaResult) -> String {
    let verdict = match result.verdict {
        Verdict::Consistent => "Consistent",
        Verdict::Inconsistent => "Inconsistent",
    };
    let mut out = format!(
        "Cohen's kappa: p_o = {:.5}, p_e = {:.5}, kappa = {:.5} -> {verdict}\n",
        result.p_o, result.p_e, result.kappa
    );
    if result.degenerate {
        out.push_str("(degenerate: both raters constant and equal)\n");
    }
    out.push_str(&format!("Categories: {}\n", result.categories.join(", ")));
    out
}

pub fn report_preference(summary: &PreferenceSummary) -> String {
    let mut out = String::from("| Item | Mean | SD | n |\n|---|---:|---:|---:|\n");
    for row in &summary.rows {
        let sd = row.sd.map(|s| format!("{s:.4}")).unwrap_or_else(|| "-".to_string());
        out.push_str(&format!("| {} | {:.4} | {} | {} |\n", row.item, row.mean, sd, row.n));
    }
    out
}
