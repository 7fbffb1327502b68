//! Canonical pretty-printer for goal models.
//!
//! Output is deterministic: goals appear in declaration order (roots at
//! top level, children inline at first mention, `ref` afterwards),
//! 2-space indentation, attributes ordered `id`, `driver`, `freq`, `note`.
//! Combinators are always written out, LF line endings.

use std::collections::HashSet;

use crate::model::{Goal, GoalId, GoalKind, GoalModel};

pub fn format(model: &GoalModel) -> String {
    let mut out = String::new();
    out.push_str(&format!("model {} {{\n", quote(model.name())));
    let mut emitted: HashSet<GoalId> = HashSet::new();
    for root in model.roots() {
        emit_goal(model, &root, 1, &mut emitted, &mut out);
    }
    out.push_str("}\n");
    out
}

fn emit_goal(model: &GoalModel, id: &GoalId, depth: usize, emitted: &mut HashSet<GoalId>, out: &mut String) {
    let indent = "  ".repeat(depth);
    if !emitted.insert(id.clone()) {
        out.push_str(&format!("{indent}ref {id}\n"));
        return;
    }
    let goal = model.goal(id).expect("id exists in model");
    out.push_str(&format!("{indent}{}", header(goal)));

    let decomposition = model.decomposition_of(id);
    let attachments: Vec<&GoalId> = model.attachments_of(id).map(|a| &a.quality).collect();
    if decomposition.is_none() && attachments.is_empty() {
        out.push('\n');
        return;
    }
    out.push_str(" {\n");
    if let Some(d) = decomposition {
        let inner = "  ".repeat(depth + 1);
        out.push_str(&format!("{inner}how {} {{\n", d.combinator));
        for child in &d.children {
            emit_goal(model, child, depth + 2, emitted, out);
        }
        out.push_str(&format!("{inner}}}\n"));
    }
    for quality in attachments {
        emit_goal(model, quality, depth + 1, emitted, out);
    }
    out.push_str(&format!("{indent}}}\n"));
}

fn header(goal: &Goal) -> String {
    let mut s = format!("{} {} id:{}", kind_keyword(goal.kind), quote(&goal.name), goal.id);
    if let Some(driver) = goal.driver {
        s.push_str(&format!(" driver:{driver}"));
    }
    if let Some(freq) = goal.frequency {
        s.push_str(&format!(" freq:{freq}"));
    }
    if let Some(note) = &goal.note {
        s.push_str(&format!(" note:{}", quote(note)));
    }
    s
}

fn kind_keyword(kind: GoalKind) -> &'static str {
    match kind {
        GoalKind::Emotional => "emotional",
        GoalKind::Functional => "functional",
        GoalKind::Quality => "quality",
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_model, Combinator, Decomposition, Goal, GoalKind, QualityAttachment};
    use crate::parser::parse;

    fn id(s: &str) -> GoalId {
        GoalId::new(s).unwrap()
    }

    #[test]
    fn empty_model_formats_to_header_only() {
        let m = build_model("M", vec![], vec![], vec![]).unwrap();
        assert_eq!(format(&m), "model \"M\" {\n}\n");
    }

    #[test]
    fn minimal_round_trip() {
        let m = build_model(
            "M",
            vec![
                Goal::new(id("E1"), GoalKind::Emotional, "Calm"),
                Goal::new(id("F1"), GoalKind::Functional, "Show status"),
            ],
            vec![Decomposition { parent: id("E1"), combinator: Combinator::And, children: vec![id("F1")] }],
            vec![],
        )
        .unwrap();
        let text = format(&m);
        let reparsed = parse(&text).model.expect("formatted output parses");
        assert!(m.structurally_equal(&reparsed));
    }

    #[test]
    fn shared_child_uses_ref_on_second_mention() {
        let src = r#"model "M" {
          emotional "A" id:E1 { how and { functional "F" id:F1 } }
          emotional "B" id:E2 { how and { ref F1 } }
        }"#;
        let m = parse(src).model.unwrap();
        let text = format(&m);
        assert_eq!(text.matches("functional \"F\" id:F1").count(), 1);
        assert_eq!(text.matches("ref F1").count(), 1);
        let reparsed = parse(&text).model.unwrap();
        assert!(m.structurally_equal(&reparsed));
    }

    #[test]
    fn fixpoint_after_one_pass() {
        let src = r#"model "Mix" {
          emotional "Top" id:E1 driver:Memories freq:2 {
            how or {
              emotional "Sub" id:E2 { how { functional "F" id:F1 { quality "Fast" id:Q1 } } }
              functional "G" id:F2 { ref Q1 }
            }
          }
        }"#;
        let m = parse(src).model.unwrap();
        let once = format(&m);
        let twice = format(&parse(&once).model.unwrap());
        assert_eq!(once, twice);
    }

    #[test]
    fn strings_with_quotes_survive() {
        let m = build_model(
            "M \"q\"",
            vec![Goal::new(id("E1"), GoalKind::Emotional, "say \"hi\" \\ done")],
            vec![],
            vec![],
        )
        .unwrap();
        let reparsed = parse(&format(&m)).model.unwrap();
        assert!(m.structurally_equal(&reparsed));
    }

    #[test]
    fn attachments_printed_inside_functional_body() {
        let m = build_model(
            "M",
            vec![
                Goal::new(id("E1"), GoalKind::Emotional, "E"),
                Goal::new(id("F1"), GoalKind::Functional, "F"),
                Goal::new(id("Q1"), GoalKind::Quality, "Q"),
            ],
            vec![Decomposition { parent: id("E1"), combinator: Combinator::And, children: vec![id("F1")] }],
            vec![QualityAttachment { functional: id("F1"), quality: id("Q1") }],
        )
        .unwrap();
        let text = format(&m);
        let reparsed = parse(&text).model.unwrap();
        assert!(m.structurally_equal(&reparsed));
        assert!(text.contains("quality \"Q\" id:Q1"));
    }
}
