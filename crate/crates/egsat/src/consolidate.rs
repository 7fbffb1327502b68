//! Goal consolidation: merging analyst-designated similar functional or
//! quality goals into one, inheriting attachments and preserving
//! traceability. Similarity detection is advisory only; the merge itself
//! always requires explicit directives.

use std::collections::{HashMap, HashSet};

use crate::diag::{sort_diagnostics, Diagnostic};
use crate::model::{build_model, Decomposition, Goal, GoalId, GoalKind, GoalModel, QualityAttachment};

/// One merge instruction: replace `members` (two or more same-kind
/// functional or quality goals) with a single goal `new_id`/`new_name`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeDirective {
    pub members: Vec<GoalId>,
    pub new_id: GoalId,
    pub new_name: String,
}

#[derive(Debug, Clone)]
pub struct MergeLogEntry {
    pub directive: MergeDirective,
    pub replaced: Vec<GoalId>,
    pub inherited_attachments: usize,
}

pub type MergeLog = Vec<MergeLogEntry>;

#[derive(Debug, Clone, PartialEq)]
pub struct DuplicateCandidate {
    pub a: GoalId,
    pub b: GoalId,
    pub ratio: f64,
}

pub const DEFAULT_SIMILARITY_THRESHOLD: f64 = 0.8;

/// Applies merge directives to a model, producing the merged model and a
/// log. Directives must have pairwise disjoint member sets; overlap is
/// rejected (C003), not resolved.
pub fn consolidate(
    model: &GoalModel,
    directives: &[MergeDirective],
) -> Result<(GoalModel, MergeLog), Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let mut claimed: HashSet<&GoalId> = HashSet::new();

    for directive in directives {
        if directive.members.len() < 2 {
            diags.push(
                Diagnostic::error(
                    "C002",
                    format!("merge into `{}` needs at least two members", directive.new_id),
                )
                .with_related(vec![directive.new_id.clone()]),
            );
            continue;
        }
        let mut kinds = HashSet::new();
        for member in &directive.members {
            match model.goal(member) {
                None => diags.push(
                    Diagnostic::error("E009", format!("unknown merge member `{member}`"))
                        .with_related(vec![member.clone()]),
                ),
                Some(goal) => {
                    if goal.kind == GoalKind::Emotional {
                        diags.push(
                            Diagnostic::error(
                                "C002",
                                format!("emotional goal `{member}` cannot be merged; consolidation covers functional and quality goals"),
                            )
                            .with_related(vec![member.clone()]),
                        );
                    }
                    kinds.insert(goal.kind);
                }
            }
            if !claimed.insert(member) {
                diags.push(
                    Diagnostic::error(
                        "C003",
                        format!("goal `{member}` appears in more than one merge directive"),
                    )
                    .with_related(vec![member.clone()]),
                );
            }
        }
        if kinds.len() > 1 {
            diags.push(
                Diagnostic::error(
                    "C001",
                    format!("merge into `{}` mixes goal kinds", directive.new_id),
                )
                .with_related(directive.members.clone()),
            );
        }
        if model.contains(&directive.new_id) && !directive.members.contains(&directive.new_id) {
            diags.push(
                Diagnostic::error(
                    "E008",
                    format!("merge target id `{}` is already taken by an unrelated goal", directive.new_id),
                )
                .with_related(vec![directive.new_id.clone()]),
            );
        }
    }
    if !diags.is_empty() {
        sort_diagnostics(&mut diags);
        return Err(diags);
    }

    // Substitution map member -> new id.
    let mut subst: HashMap<&GoalId, &GoalId> = HashMap::new();
    for directive in directives {
        for member in &directive.members {
            subst.insert(member, &directive.new_id);
        }
    }
    let apply = |id: &GoalId| -> GoalId { (*subst.get(id).unwrap_or(&id)).clone() };

    let mut goals: Vec<Goal> = Vec::new();
    let mut inserted_new: HashSet<&GoalId> = HashSet::new();
    for goal in model.goals() {
        match subst.get(&goal.id) {
            None => goals.push(goal.clone()),
            Some(new_id) => {
                // Merged goal takes the declaration slot of its first member.
                if inserted_new.insert(*new_id) {
                    let directive = directives
                        .iter()
                        .find(|d| &d.new_id == *new_id)
                        .expect("substitution comes from a directive");
                    goals.push(Goal::new((*new_id).clone(), goal.kind, directive.new_name.clone()));
                }
            }
        }
    }

    let decompositions: Vec<Decomposition> = model
        .decompositions()
        .iter()
        .map(|d| {
            let mut seen = HashSet::new();
            let children: Vec<GoalId> = d
                .children
                .iter()
                .map(|c| apply(c))
                .filter(|c| seen.insert(c.clone()))
                .collect();
            Decomposition {
                parent: apply(&d.parent),
                combinator: d.combinator,
                children,
            }
        })
        .collect();

    let mut seen_pairs = HashSet::new();
    let attachments: Vec<QualityAttachment> = model
        .attachments()
        .iter()
        .map(|a| QualityAttachment {
            functional: apply(&a.functional),
            quality: apply(&a.quality),
        })
        .filter(|a| seen_pairs.insert(a.clone()))
        .collect();

    let log: MergeLog = directives
        .iter()
        .map(|directive| MergeLogEntry {
            directive: directive.clone(),
            replaced: directive.members.clone(),
            inherited_attachments: attachments
                .iter()
                .filter(|a| a.functional == directive.new_id || a.quality == directive.new_id)
                .count(),
        })
        .collect();

    let merged = build_model(model.name(), goals, decompositions, attachments)?;
    Ok((merged, log))
}

/// Advisory duplicate detection: same-kind functional/quality pairs whose
/// normalized names overlap at or above `threshold` (token-set Jaccard
/// ratio; lowercase, punctuation stripped, no stemming). Never applied
/// automatically.
pub fn suggest_duplicates(model: &GoalModel, threshold: f64) -> Vec<DuplicateCandidate> {
    let candidates: Vec<(&Goal, HashSet<String>)> = model
        .goals()
        .filter(|g| g.kind != GoalKind::Emotional)
        .map(|g| (g, tokenize(&g.name)))
        .collect();
    let mut out = Vec::new();
    for (i, (a, ta)) in candidates.iter().enumerate() {
        for (b, tb) in candidates.iter().skip(i + 1) {
            if a.kind != b.kind {
                continue;
            }
            let ratio = jaccard(ta, tb);
            if ratio >= threshold {
                out.push(DuplicateCandidate {
                    a: a.id.clone(),
                    b: b.id.clone(),
                    ratio,
                });
            }
        }
    }
    out
}

fn tokenize(name: &str) -> HashSet<String> {
    name.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

fn jaccard(a: &HashSet<String>, b: &HashSet<String>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    inter as f64 / union as f64
}

/// Parses a directive file. One directive per line:
/// `merge <id>[,<id>]+ -> <new_id> "<new name>"`; `#` starts a comment.
pub fn parse_directives(text: &str) -> Result<Vec<MergeDirective>, Vec<Diagnostic>> {
    let mut directives = Vec::new();
    let mut diags = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match parse_directive_line(line) {
            Some(d) => directives.push(d),
            None => diags.push(Diagnostic::error(
                "C004",
                format!("line {}: malformed directive `{line}`; expected `merge <id>[,<id>]+ -> <new_id> \"<new name>\"`", lineno + 1),
            )),
        }
    }
    if diags.is_empty() {
        Ok(directives)
    } else {
        Err(diags)
    }
}

fn parse_directive_line(line: &str) -> Option<MergeDirective> {
    let rest = line.strip_prefix("merge")?.trim_start();
    let (members_part, target_part) = rest.split_once("->")?;
    let members: Option<Vec<GoalId>> = members_part
        .split(',')
        .map(|m| GoalId::new(m.trim()))
        .collect();
    let members = members?;
    if members.len() < 2 {
        return None;
    }
    let target_part = target_part.trim_start();
    let (id_text, name_part) = target_part.split_once(char::is_whitespace)?;
    let new_id = GoalId::new(id_text.trim())?;
    let name_part = name_part.trim();
    let new_name = name_part.strip_prefix('"')?.strip_suffix('"')?.to_string();
    if new_name.is_empty() {
        return None;
    }
    Some(MergeDirective { members, new_id, new_name })
}
