//! Immutable goal-graph representation.
//!
//! A model is a directed acyclic graph over three kinds of goals.
//! Emotional goals decompose (AND/OR) into sub-goals; functional goals may
//! carry quality attachments; quality goals are leaves. Construction
//! validates structure once; after that the model is a shared immutable
//! value.

use std::collections::{HashMap, HashSet};
use std::fmt;

use indexmap::IndexMap;

use crate::diag::Diagnostic;

/// Identifier token: non-empty, letters/digits/`-`/`_` only.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GoalId(String);

impl GoalId {
    /// Returns `None` if the text is empty or contains a character outside
    /// the identifier alphabet.
    pub fn new(s: impl Into<String>) -> Option<GoalId> {
        let s = s.into();
        if s.is_empty() {
            return None;
        }
        if s.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            Some(GoalId(s))
        } else {
            None
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for GoalId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GoalKind {
    Emotional,
    Functional,
    Quality,
}

impl fmt::Display for GoalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GoalKind::Emotional => f.write_str("emotional"),
            GoalKind::Functional => f.write_str("functional"),
            GoalKind::Quality => f.write_str("quality"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DriverCategory {
    SelfExpression,
    Affiliation,
    Pleasure,
    Memories,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SubDriver {
    // under SelfExpression
    IdealSelf,
    PublicSelf,
    // under Pleasure
    Physical,
    Social,
    Ideological,
}

/// Why an emotional goal matters: one of four attachment categories, two of
/// which refine into sub-drivers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AttachmentDriver {
    pub category: DriverCategory,
    pub sub: Option<SubDriver>,
}

impl AttachmentDriver {
    pub fn new(category: DriverCategory, sub: Option<SubDriver>) -> Option<AttachmentDriver> {
        let ok = match (category, sub) {
            (_, None) => true,
            (DriverCategory::SelfExpression, Some(SubDriver::IdealSelf | SubDriver::PublicSelf)) => true,
            (
                DriverCategory::Pleasure,
                Some(SubDriver::Physical | SubDriver::Social | SubDriver::Ideological),
            ) => true,
            _ => false,
        };
        ok.then_some(AttachmentDriver { category, sub })
    }

    /// Flat surface name, matching the table vocabulary of the source
    /// material: `IdealSelf`, `PublicSelf`, `Affiliation`,
    /// `PhysicalPleasure`, `SocialPleasure`, `IdeologicalPleasure`,
    /// `Memories`.
    pub fn surface_name(&self) -> &'static str {
        match (self.category, self.sub) {
            (DriverCategory::SelfExpression, Some(SubDriver::IdealSelf)) => "IdealSelf",
            (DriverCategory::SelfExpression, Some(SubDriver::PublicSelf)) => "PublicSelf",
            (DriverCategory::SelfExpression, _) => "SelfExpression",
            (DriverCategory::Affiliation, _) => "Affiliation",
            (DriverCategory::Pleasure, Some(SubDriver::Physical)) => "PhysicalPleasure",
            (DriverCategory::Pleasure, Some(SubDriver::Social)) => "SocialPleasure",
            (DriverCategory::Pleasure, Some(SubDriver::Ideological)) => "IdeologicalPleasure",
            (DriverCategory::Pleasure, _) => "Pleasure",
            (DriverCategory::Memories, _) => "Memories",
        }
    }

    /// Inverse of [`surface_name`](Self::surface_name). Also accepts the
    /// spaced spellings used in prose tables ("Ideological Pleasure",
    /// "Ideal Self").
    pub fn from_surface_name(name: &str) -> Option<AttachmentDriver> {
        let folded: String = name.chars().filter(|c| !c.is_whitespace()).collect();
        let (category, sub) = match folded.as_str() {
            "IdealSelf" => (DriverCategory::SelfExpression, Some(SubDriver::IdealSelf)),
            "PublicSelf" => (DriverCategory::SelfExpression, Some(SubDriver::PublicSelf)),
            "SelfExpression" | "Self-expression" => (DriverCategory::SelfExpression, None),
            "Affiliation" => (DriverCategory::Affiliation, None),
            "PhysicalPleasure" => (DriverCategory::Pleasure, Some(SubDriver::Physical)),
            "SocialPleasure" => (DriverCategory::Pleasure, Some(SubDriver::Social)),
            "IdeologicalPleasure" => (DriverCategory::Pleasure, Some(SubDriver::Ideological)),
            "Pleasure" => (DriverCategory::Pleasure, None),
            "Memories" => (DriverCategory::Memories, None),
            _ => return None,
        };
        AttachmentDriver::new(category, sub)
    }
}

impl fmt::Display for AttachmentDriver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.surface_name())
    }
}

/// Half-open position range in a source file, 1-based, inclusive ends.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SourceSpan {
    pub file: String,
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl SourceSpan {
    pub fn new(file: impl Into<String>, start_line: u32, start_col: u32, end_line: u32, end_col: u32) -> Self {
        debug_assert!((start_line, start_col) <= (end_line, end_col));
        SourceSpan {
            file: file.into(),
            start_line,
            start_col,
            end_line,
            end_col,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Goal {
    pub id: GoalId,
    pub kind: GoalKind,
    pub name: String,
    /// Only meaningful for emotional goals.
    pub driver: Option<AttachmentDriver>,
    /// Count of raw elicited goals consolidated into this one. Absent
    /// means "not recorded", which is distinct from 0.
    pub frequency: Option<u32>,
    pub note: Option<String>,
    pub span: Option<SourceSpan>,
}

impl Goal {
    pub fn new(id: GoalId, kind: GoalKind, name: impl Into<String>) -> Goal {
        Goal {
            id,
            kind,
            name: name.into(),
            driver: None,
            frequency: None,
            note: None,
            span: None,
        }
    }

    pub fn with_driver(mut self, driver: AttachmentDriver) -> Goal {
        self.driver = Some(driver);
        self
    }

    pub fn with_frequency(mut self, frequency: u32) -> Goal {
        self.frequency = Some(frequency);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Combinator {
    And,
    Or,
}

impl fmt::Display for Combinator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Combinator::And => f.write_str("and"),
            Combinator::Or => f.write_str("or"),
        }
    }
}

/// One AND/OR fan under an emotional goal. At most one per parent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub parent: GoalId,
    pub combinator: Combinator,
    pub children: Vec<GoalId>,
}

/// A quality goal supporting a functional goal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QualityAttachment {
    pub functional: GoalId,
    pub quality: GoalId,
}

/// Structurally valid goal graph. Construct via [`build_model`]; the graph
/// is acyclic, all edge endpoints exist, and ids are unique.
#[derive(Debug, Clone)]
pub struct GoalModel {
    name: String,
    goals: IndexMap<GoalId, Goal>,
    decompositions: Vec<Decomposition>,
    attachments: Vec<QualityAttachment>,
}

impl GoalModel {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn goals(&self) -> impl Iterator<Item = &Goal> {
        self.goals.values()
    }

    pub fn goal(&self, id: &GoalId) -> Option<&Goal> {
        self.goals.get(id)
    }

    pub fn contains(&self, id: &GoalId) -> bool {
        self.goals.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.goals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.goals.is_empty()
    }

    pub fn decompositions(&self) -> &[Decomposition] {
        &self.decompositions
    }

    pub fn decomposition_of(&self, parent: &GoalId) -> Option<&Decomposition> {
        self.decompositions.iter().find(|d| &d.parent == parent)
    }

    pub fn attachments(&self) -> &[QualityAttachment] {
        &self.attachments
    }

    pub fn attachments_of<'a>(&'a self, functional: &'a GoalId) -> impl Iterator<Item = &'a QualityAttachment> + 'a {
        self.attachments.iter().filter(move |a| &a.functional == functional)
    }

    /// Forward edges (decomposition parent→child plus attachment
    /// functional→quality) leaving `id`, in declaration order.
    pub fn successors(&self, id: &GoalId) -> Vec<GoalId> {
        let mut out = Vec::new();
        if let Some(d) = self.decomposition_of(id) {
            out.extend(d.children.iter().cloned());
        }
        out.extend(self.attachments_of(id).map(|a| a.quality.clone()));
        out
    }

    pub fn predecessors(&self, id: &GoalId) -> Vec<GoalId> {
        let mut out = Vec::new();
        for d in &self.decompositions {
            if d.children.contains(id) {
                out.push(d.parent.clone());
            }
        }
        for a in &self.attachments {
            if &a.quality == id {
                out.push(a.functional.clone());
            }
        }
        out
    }

    /// Goals with no incoming edge.
    pub fn roots(&self) -> Vec<GoalId> {
        let mut has_incoming: HashSet<&GoalId> = HashSet::new();
        for d in &self.decompositions {
            has_incoming.extend(d.children.iter());
        }
        for a in &self.attachments {
            has_incoming.insert(&a.quality);
        }
        self.goals
            .keys()
            .filter(|id| !has_incoming.contains(id))
            .cloned()
            .collect()
    }

    /// Goals with no outgoing edge.
    pub fn leaves(&self) -> Vec<GoalId> {
        let mut has_outgoing: HashSet<&GoalId> = HashSet::new();
        for d in &self.decompositions {
            has_outgoing.insert(&d.parent);
        }
        for a in &self.attachments {
            has_outgoing.insert(&a.functional);
        }
        self.goals
            .keys()
            .filter(|id| !has_outgoing.contains(id))
            .cloned()
            .collect()
    }

    /// Goal ids in a topological order of the forward edge relation.
    pub fn topological_order(&self) -> Vec<GoalId> {
        // Construction guarantees acyclicity, so this cannot fail.
        topological_sort(&self.goals, &self.decompositions, &self.attachments)
            .expect("valid model is acyclic")
    }

    /// Graph equality on ids, kinds, names, drivers, frequencies, notes,
    /// edges and combinators; declaration order and spans are ignored.
    pub fn structurally_equal(&self, other: &GoalModel) -> bool {
        if self.name != other.name || self.goals.len() != other.goals.len() {
            return false;
        }
        for g in self.goals.values() {
            match other.goals.get(&g.id) {
                Some(h) => {
                    if (g.kind, &g.name, g.driver, g.frequency, &g.note)
                        != (h.kind, &h.name, h.driver, h.frequency, &h.note)
                    {
                        return false;
                    }
                }
                None => return false,
            }
        }
        let decomp_key = |m: &GoalModel| -> HashMap<GoalId, (Combinator, Vec<GoalId>)> {
            m.decompositions
                .iter()
                .map(|d| (d.parent.clone(), (d.combinator, d.children.clone())))
                .collect()
        };
        if decomp_key(self) != decomp_key(other) {
            return false;
        }
        fn attach_key(m: &GoalModel) -> HashSet<&QualityAttachment> {
            m.attachments.iter().collect()
        }
        attach_key(self) == attach_key(other)
    }
}

/// Validates and assembles a model. All structural validation happens here:
/// duplicate ids (E008), dangling references (E009), malformed
/// decompositions and attachments (E012, E013), kind-specific attribute
/// misuse (E011) and cycles (E001, reported with the offending id
/// sequence).
pub fn build_model(
    name: impl Into<String>,
    goals: Vec<Goal>,
    decompositions: Vec<Decomposition>,
    attachments: Vec<QualityAttachment>,
) -> Result<GoalModel, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let mut map: IndexMap<GoalId, Goal> = IndexMap::with_capacity(goals.len());

    for goal in goals {
        if goal.kind != GoalKind::Emotional {
            if goal.driver.is_some() {
                diags.push(
                    Diagnostic::error(
                        "E011",
                        format!("driver on {} goal `{}`; drivers apply to emotional goals only", goal.kind, goal.id),
                    )
                    .with_span(goal.span.clone())
                    .with_related(vec![goal.id.clone()]),
                );
            }
            if goal.frequency.is_some() {
                diags.push(
                    Diagnostic::error(
                        "E011",
                        format!(
                            "frequency on {} goal `{}`; frequencies apply to emotional goals only",
                            goal.kind, goal.id
                        ),
                    )
                    .with_span(goal.span.clone())
                    .with_related(vec![goal.id.clone()]),
                );
            }
        }
        if goal.name.is_empty() {
            diags.push(
                Diagnostic::error("E011", format!("goal `{}` has an empty name", goal.id))
                    .with_span(goal.span.clone())
                    .with_related(vec![goal.id.clone()]),
            );
        }
        if let Some(prev) = map.get(&goal.id) {
            diags.push(
                Diagnostic::error("E008", format!("duplicate goal id `{}`", goal.id))
                    .with_span(goal.span.clone().or_else(|| prev.span.clone()))
                    .with_related(vec![goal.id.clone()]),
            );
        } else {
            map.insert(goal.id.clone(), goal);
        }
    }

    let mut seen_parents: HashSet<&GoalId> = HashSet::new();
    for d in &decompositions {
        if !map.contains_key(&d.parent) {
            diags.push(
                Diagnostic::error("E009", format!("decomposition parent `{}` is not declared", d.parent))
                    .with_related(vec![d.parent.clone()]),
            );
        }
        if !seen_parents.insert(&d.parent) {
            diags.push(
                Diagnostic::error("E012", format!("goal `{}` has more than one decomposition", d.parent))
                    .with_related(vec![d.parent.clone()]),
            );
        }
        if d.children.is_empty() {
            diags.push(
                Diagnostic::error("E012", format!("decomposition of `{}` has no children", d.parent))
                    .with_related(vec![d.parent.clone()]),
            );
        }
        let mut seen_children: HashSet<&GoalId> = HashSet::new();
        for c in &d.children {
            if !map.contains_key(c) {
                diags.push(
                    Diagnostic::error("E009", format!("decomposition child `{c}` is not declared"))
                        .with_related(vec![c.clone()]),
                );
            }
            if !seen_children.insert(c) {
                diags.push(
                    Diagnostic::error(
                        "E012",
                        format!("decomposition of `{}` lists child `{c}` twice", d.parent),
                    )
                    .with_related(vec![d.parent.clone(), c.clone()]),
                );
            }
        }
    }

    let mut seen_pairs: HashSet<(&GoalId, &GoalId)> = HashSet::new();
    for a in &attachments {
        for id in [&a.functional, &a.quality] {
            if !map.contains_key(id) {
                diags.push(
                    Diagnostic::error("E009", format!("attachment endpoint `{id}` is not declared"))
                        .with_related(vec![id.clone()]),
                );
            }
        }
        if !seen_pairs.insert((&a.functional, &a.quality)) {
            diags.push(
                Diagnostic::error(
                    "E013",
                    format!("duplicate attachment `{}` -> `{}`", a.functional, a.quality),
                )
                .with_related(vec![a.functional.clone(), a.quality.clone()]),
            );
        }
    }

    if diags.is_empty() {
        if let Err(cycle) = topological_sort(&map, &decompositions, &attachments) {
            let ids = cycle.iter().map(GoalId::to_string).collect::<Vec<_>>().join(", ");
            diags.push(
                Diagnostic::error("E001", format!("goal graph contains a cycle: [{ids}]"))
                    .with_related(cycle),
            );
        }
    }

    if diags.is_empty() {
        Ok(GoalModel {
            name: name.into(),
            goals: map,
            decompositions,
            attachments,
        })
    } else {
        crate::diag::sort_diagnostics(&mut diags);
        Err(diags)
    }
}

/// Kahn topological sort; on a cycle returns one offending id sequence in
/// declaration order.
fn topological_sort(
    goals: &IndexMap<GoalId, Goal>,
    decompositions: &[Decomposition],
    attachments: &[QualityAttachment],
) -> Result<Vec<GoalId>, Vec<GoalId>> {
    let index: HashMap<&GoalId, usize> = goals.keys().enumerate().map(|(i, k)| (k, i)).collect();
    let n = goals.len();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut indegree = vec![0usize; n];
    let mut add_edge = |from: &GoalId, to: &GoalId| {
        let (f, t) = (index[from], index[to]);
        succ[f].push(t);
        indegree[t] += 1;
    };
    for d in decompositions {
        for c in &d.children {
            add_edge(&d.parent, c);
        }
    }
    for a in attachments {
        add_edge(&a.functional, &a.quality);
    }

    let mut queue: std::collections::VecDeque<usize> =
        (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = queue.pop_front() {
        order.push(i);
        for &t in &succ[i] {
            indegree[t] -= 1;
            if indegree[t] == 0 {
                queue.push_back(t);
            }
        }
    }
    let ids: Vec<&GoalId> = goals.keys().collect();
    if order.len() == n {
        Ok(order.into_iter().map(|i| ids[i].clone()).collect())
    } else {
        let cyclic: Vec<GoalId> = {
            let in_order: HashSet<usize> = order.iter().copied().collect();
            (0..n).filter(|i| !in_order.contains(i)).map(|i| ids[i].clone()).collect()
        };
        Err(cyclic)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> GoalId {
        GoalId::new(s).unwrap()
    }

    fn minimal() -> GoalModel {
        build_model(
            "M",
            vec![
                Goal::new(id("E1"), GoalKind::Emotional, "Calm"),
                Goal::new(id("F1"), GoalKind::Functional, "Show status"),
            ],
            vec![Decomposition {
                parent: id("E1"),
                combinator: Combinator::And,
                children: vec![id("F1")],
            }],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn minimal_model_builds() {
        let m = minimal();
        assert_eq!(m.len(), 2);
        assert_eq!(m.decompositions().len(), 1);
        assert_eq!(m.roots(), vec![id("E1")]);
        assert_eq!(m.leaves(), vec![id("F1")]);
    }

    #[test]
    fn two_cycle_is_rejected() {
        let err = build_model(
            "M",
            vec![
                Goal::new(id("E1"), GoalKind::Emotional, "a"),
                Goal::new(id("E2"), GoalKind::Emotional, "b"),
            ],
            vec![
                Decomposition { parent: id("E1"), combinator: Combinator::And, children: vec![id("E2")] },
                Decomposition { parent: id("E2"), combinator: Combinator::And, children: vec![id("E1")] },
            ],
            vec![],
        )
        .unwrap_err();
        assert_eq!(err.len(), 1);
        assert_eq!(err[0].code, "E001");
        assert_eq!(err[0].related, vec![id("E1"), id("E2")]);
    }

    #[test]
    fn duplicate_id_and_dangling_ref() {
        let err = build_model(
            "M",
            vec![
                Goal::new(id("E1"), GoalKind::Emotional, "a"),
                Goal::new(id("E1"), GoalKind::Emotional, "b"),
            ],
            vec![Decomposition {
                parent: id("E1"),
                combinator: Combinator::Or,
                children: vec![id("F9")],
            }],
            vec![],
        )
        .unwrap_err();
        let codes: Vec<&str> = err.iter().map(|d| d.code).collect();
        assert!(codes.contains(&"E008"));
        assert!(codes.contains(&"E009"));
    }

    #[test]
    fn driver_on_functional_rejected() {
        let driver = AttachmentDriver::from_surface_name("Affiliation").unwrap();
        let err = build_model(
            "M",
            vec![Goal::new(id("F1"), GoalKind::Functional, "x").with_driver(driver)],
            vec![],
            vec![],
        )
        .unwrap_err();
        assert_eq!(err[0].code, "E011");
    }

    #[test]
    fn empty_model_roots_and_leaves() {
        let m = build_model("M", vec![], vec![], vec![]).unwrap();
        assert!(m.roots().is_empty());
        assert!(m.leaves().is_empty());
    }

    #[test]
    fn isolated_goal_is_root_and_leaf() {
        let m = build_model("M", vec![Goal::new(id("E1"), GoalKind::Emotional, "x")], vec![], vec![]).unwrap();
        assert_eq!(m.roots(), vec![id("E1")]);
        assert_eq!(m.leaves(), vec![id("E1")]);
    }

    #[test]
    fn chain_leaves() {
        let m = build_model(
            "M",
            vec![
                Goal::new(id("E1"), GoalKind::Emotional, "a"),
                Goal::new(id("E2"), GoalKind::Emotional, "b"),
                Goal::new(id("F1"), GoalKind::Functional, "c"),
            ],
            vec![
                Decomposition { parent: id("E1"), combinator: Combinator::And, children: vec![id("E2")] },
                Decomposition { parent: id("E2"), combinator: Combinator::And, children: vec![id("F1")] },
            ],
            vec![],
        )
        .unwrap();
        assert_eq!(m.leaves(), vec![id("F1")]);
        assert_eq!(m.roots(), vec![id("E1")]);
    }

    #[test]
    fn driver_sub_categories_enforced() {
        assert!(AttachmentDriver::new(DriverCategory::Affiliation, Some(SubDriver::IdealSelf)).is_none());
        assert!(AttachmentDriver::new(DriverCategory::Memories, Some(SubDriver::Physical)).is_none());
        assert!(AttachmentDriver::new(DriverCategory::Pleasure, Some(SubDriver::Ideological)).is_some());
        assert!(AttachmentDriver::new(DriverCategory::SelfExpression, Some(SubDriver::Physical)).is_none());
    }

    #[test]
    fn driver_surface_names_round_trip() {
        for name in [
            "IdealSelf",
            "PublicSelf",
            "Affiliation",
            "PhysicalPleasure",
            "SocialPleasure",
            "IdeologicalPleasure",
            "Memories",
        ] {
            let d = AttachmentDriver::from_surface_name(name).unwrap();
            assert_eq!(d.surface_name(), name);
        }
        assert_eq!(
            AttachmentDriver::from_surface_name("Ideological Pleasure").unwrap().surface_name(),
            "IdeologicalPleasure"
        );
        assert!(AttachmentDriver::from_surface_name("Nostalgia").is_none());
    }

    #[test]
    fn goal_id_alphabet() {
        assert!(GoalId::new("IS6-1").is_some());
        assert!(GoalId::new("a_b-2").is_some());
        assert!(GoalId::new("").is_none());
        assert!(GoalId::new("a b").is_none());
        assert!(GoalId::new("ä").is_none());
    }

    #[test]
    fn determinism_and_structural_equality() {
        let a = minimal();
        let b = minimal();
        assert!(a.structurally_equal(&b));
        assert_eq!(a.topological_order(), b.topological_order());
    }
}
