//! Well-formedness rules, AND/OR satisfaction propagation and How/Why
//! traceability.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::diag::{sort_diagnostics, Diagnostic};
use crate::model::{Combinator, GoalId, GoalKind, GoalModel};

/// Default cap on enumerated trace paths; worst-case DAGs have
/// exponentially many.
pub const DEFAULT_PATH_CAP: usize = 1000;

/// Truth values for the satisfaction base: every functional and quality
/// goal gets exactly one entry.
pub type SatisfactionAssignment = HashMap<GoalId, bool>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceDirection {
    How,
    Why,
}

#[derive(Debug, Clone)]
pub struct TraceReport {
    pub subject: GoalId,
    pub direction: TraceDirection,
    pub reached: HashSet<GoalId>,
    /// Walks from the subject to each reached goal (reverse walks for Why).
    pub paths: Vec<Vec<GoalId>>,
    /// Set when path enumeration hit the cap; `reached` is still complete.
    pub truncated: bool,
}

#[derive(Debug, Clone)]
pub struct CoverageRow {
    pub goal: GoalId,
    pub functional_count: usize,
    pub quality_count: usize,
    pub unsupported: bool,
}

/// Per-emotional-goal support summary, in declaration order.
#[derive(Debug, Clone)]
pub struct CoverageReport {
    pub rows: Vec<CoverageRow>,
}

impl CoverageReport {
    pub fn unsupported_count(&self) -> usize {
        self.rows.iter().filter(|r| r.unsupported).count()
    }
}

/// Rule check over a structurally valid model. Output order is
/// deterministic: rule code, then source position.
///
/// Errors: E002 emotional leaf; E003 functional goal with a
/// decomposition; E004 quality goal with an outgoing edge; E005
/// attachment with wrong endpoint kinds; E006 decomposition under a
/// non-emotional parent; E007 functional/quality goal with no emotional
/// ancestor. Warnings: W001 emotional goal without a driver; W002
/// emotional goal with frequency 0.
pub fn check(model: &GoalModel) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let decomposed: HashSet<&GoalId> = model.decompositions().iter().map(|d| &d.parent).collect();

    for goal in model.goals() {
        let outgoing = !model.successors(&goal.id).is_empty();
        match goal.kind {
            GoalKind::Emotional => {
                if !decomposed.contains(&goal.id) {
                    diags.push(
                        Diagnostic::error(
                            "E002",
                            format!("emotional goal `{}` is a leaf; decompose it down to functional or quality goals", goal.id),
                        )
                        .with_span(goal.span.clone())
                        .with_related(vec![goal.id.clone()]),
                    );
                }
                if goal.driver.is_none() {
                    diags.push(
                        Diagnostic::warning("W001", format!("emotional goal `{}` has no attachment driver", goal.id))
                            .with_span(goal.span.clone())
                            .with_related(vec![goal.id.clone()]),
                    );
                }
                if goal.frequency == Some(0) {
                    diags.push(
                        Diagnostic::warning("W002", format!("emotional goal `{}` has frequency 0", goal.id))
                            .with_span(goal.span.clone())
                            .with_related(vec![goal.id.clone()]),
                    );
                }
            }
            GoalKind::Functional => {
                if decomposed.contains(&goal.id) {
                    diags.push(
                        Diagnostic::error(
                            "E003",
                            format!("functional goal `{}` owns a `how` decomposition", goal.id),
                        )
                        .with_span(goal.span.clone())
                        .with_related(vec![goal.id.clone()]),
                    );
                }
            }
            GoalKind::Quality => {
                if outgoing {
                    diags.push(
                        Diagnostic::error("E004", format!("quality goal `{}` has outgoing edges", goal.id))
                            .with_span(goal.span.clone())
                            .with_related(vec![goal.id.clone()]),
                    );
                }
            }
        }
    }

    for d in model.decompositions() {
        if let Some(parent) = model.goal(&d.parent) {
            if parent.kind != GoalKind::Emotional {
                diags.push(
                    Diagnostic::error(
                        "E006",
                        format!("decomposition parent `{}` is a {} goal, not emotional", d.parent, parent.kind),
                    )
                    .with_span(parent.span.clone())
                    .with_related(vec![d.parent.clone()]),
                );
            }
        }
    }

    for a in model.attachments() {
        let source_kind = model.goal(&a.functional).map(|g| g.kind);
        let target_kind = model.goal(&a.quality).map(|g| g.kind);
        if source_kind != Some(GoalKind::Functional) || target_kind != Some(GoalKind::Quality) {
            diags.push(
                Diagnostic::error(
                    "E005",
                    format!(
                        "attachment `{}` -> `{}` must run from a functional goal to a quality goal",
                        a.functional, a.quality
                    ),
                )
                .with_related(vec![a.functional.clone(), a.quality.clone()]),
            );
        }
    }

    // Orphans: functional/quality goals not reachable from any emotional
    // goal. One forward sweep from all emotional goals.
    let mut reachable: HashSet<GoalId> = HashSet::new();
    let mut queue: VecDeque<GoalId> = model
        .goals()
        .filter(|g| g.kind == GoalKind::Emotional)
        .map(|g| g.id.clone())
        .collect();
    while let Some(id) = queue.pop_front() {
        for next in model.successors(&id) {
            if reachable.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    for goal in model.goals() {
        if goal.kind != GoalKind::Emotional && !reachable.contains(&goal.id) {
            diags.push(
                Diagnostic::error(
                    "E007",
                    format!("{} goal `{}` has no emotional ancestor", goal.kind, goal.id),
                )
                .with_span(goal.span.clone())
                .with_related(vec![goal.id.clone()]),
            );
        }
    }

    sort_diagnostics(&mut diags);
    diags
}

/// Propagates leaf truth values bottom-up. The assignment domain is the
/// satisfaction base: every functional and every quality goal. A
/// functional goal with quality attachments evaluates to its own assigned
/// value AND all attached quality values; emotional goals combine their
/// children per the decomposition combinator.
pub fn satisfies(
    model: &GoalModel,
    assignment: &SatisfactionAssignment,
) -> Result<HashMap<GoalId, bool>, Vec<Diagnostic>> {
    let base: HashSet<&GoalId> = model
        .goals()
        .filter(|g| g.kind != GoalKind::Emotional)
        .map(|g| &g.id)
        .collect();
    let mut problems = Vec::new();
    for id in &base {
        if !assignment.contains_key(*id) {
            problems.push(
                Diagnostic::error("E010", format!("assignment is missing a value for `{id}`"))
                    .with_related(vec![(*id).clone()]),
            );
        }
    }
    for id in assignment.keys() {
        if !base.contains(id) {
            problems.push(
                Diagnostic::error(
                    "E010",
                    format!("assignment covers `{id}`, which is not a functional or quality goal of the model"),
                )
                .with_related(vec![id.clone()]),
            );
        }
    }
    if !problems.is_empty() {
        sort_diagnostics(&mut problems);
        return Err(problems);
    }

    let mut values: HashMap<GoalId, bool> = HashMap::with_capacity(model.len());
    let mut order = model.topological_order();
    order.reverse(); // children before parents
    for id in order {
        let goal = model.goal(&id).expect("topological order covers the model");
        let value = match goal.kind {
            GoalKind::Quality => assignment[&id],
            GoalKind::Functional => {
                assignment[&id] && model.attachments_of(&id).all(|a| values[&a.quality])
            }
            GoalKind::Emotional => {
                let d = model
                    .decomposition_of(&id)
                    .expect("checked models decompose every emotional goal");
                match d.combinator {
                    Combinator::And => d.children.iter().all(|c| values[c]),
                    Combinator::Or => d.children.iter().any(|c| values[c]),
                }
            }
        };
        values.insert(id, value);
    }
    Ok(values)
}

/// Forward trace: all functional and quality goals below the subject.
pub fn trace_how(model: &GoalModel, subject: &GoalId) -> Result<TraceReport, Vec<Diagnostic>> {
    trace(model, subject, TraceDirection::How, DEFAULT_PATH_CAP)
}

/// Backward trace: all emotional goals above the subject (the subject
/// itself included when emotional).
pub fn trace_why(model: &GoalModel, subject: &GoalId) -> Result<TraceReport, Vec<Diagnostic>> {
    trace(model, subject, TraceDirection::Why, DEFAULT_PATH_CAP)
}

pub fn trace(
    model: &GoalModel,
    subject: &GoalId,
    direction: TraceDirection,
    path_cap: usize,
) -> Result<TraceReport, Vec<Diagnostic>> {
    if !model.contains(subject) {
        return Err(vec![Diagnostic::error(
            "E009",
            format!("unknown goal id `{subject}`"),
        )
        .with_related(vec![subject.clone()])]);
    }
    let is_target = |id: &GoalId| -> bool {
        let kind = model.goal(id).expect("walk stays in the model").kind;
        match direction {
            TraceDirection::How => kind != GoalKind::Emotional && id != subject,
            TraceDirection::Why => kind == GoalKind::Emotional,
        }
    };
    let step = |id: &GoalId| -> Vec<GoalId> {
        match direction {
            TraceDirection::How => model.successors(id),
            TraceDirection::Why => model.predecessors(id),
        }
    };

    // Reached set first, by plain reachability; the model is acyclic.
    let mut reached = HashSet::new();
    let mut seen: HashSet<GoalId> = HashSet::new();
    let mut queue: VecDeque<GoalId> = VecDeque::from([subject.clone()]);
    while let Some(id) = queue.pop_front() {
        if is_target(&id) {
            reached.insert(id.clone());
        }
        for n in step(&id) {
            if seen.insert(n.clone()) {
                queue.push_back(n);
            }
        }
    }

    // Walk enumeration second, abandoned at the cap so pathological DAGs
    // stay tractable.
    let mut paths = Vec::new();
    let mut truncated = false;
    let mut stack: Vec<Vec<GoalId>> = vec![vec![subject.clone()]];
    while let Some(path) = stack.pop() {
        if paths.len() == path_cap {
            truncated = true;
            break;
        }
        let last = path.last().expect("paths are non-empty");
        if is_target(last) {
            paths.push(path.clone());
        }
        let next = step(last);
        for n in next.into_iter().rev() {
            let mut extended = path.clone();
            extended.push(n);
            stack.push(extended);
        }
    }
    Ok(TraceReport {
        subject: subject.clone(),
        direction,
        reached,
        paths,
        truncated,
    })
}

/// Per-emotional-goal counts of supporting functional and quality goals,
/// derived from [`trace_how`].
pub fn coverage(model: &GoalModel) -> CoverageReport {
    let rows = model
        .goals()
        .filter(|g| g.kind == GoalKind::Emotional)
        .map(|g| {
            let report = trace_how(model, &g.id).expect("goal exists");
            let functional_count = report
                .reached
                .iter()
                .filter(|id| model.goal(id).map(|x| x.kind) == Some(GoalKind::Functional))
                .count();
            let quality_count = report.reached.len() - functional_count;
            CoverageRow {
                goal: g.id.clone(),
                functional_count,
                quality_count,
                unsupported: functional_count == 0 && quality_count == 0,
            }
        })
        .collect();
    CoverageReport { rows }
}
