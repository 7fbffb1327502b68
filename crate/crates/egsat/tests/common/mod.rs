//! Helpers shared by the integration test targets.

#![allow(dead_code)]

use std::path::{Path, PathBuf};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use egsat::analysis::SatisfactionAssignment;
use egsat::model::{
    build_model, AttachmentDriver, Combinator, Decomposition, Goal, GoalId, GoalKind, GoalModel,
    QualityAttachment,
};
use egsat::parser::parse_named;
use egsat::stats::PairedSample;

pub fn gid(s: &str) -> GoalId {
    GoalId::new(s).unwrap()
}

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn load_fixture(name: &str) -> GoalModel {
    let path = fixtures_dir().join(name);
    let source = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("read {name}: {e}"));
    let result = parse_named(name, &source);
    assert!(
        result.diagnostics.is_empty(),
        "{name} parses with diagnostics: {:?}",
        result.diagnostics
    );
    result.model.expect("fixture parses")
}

pub const DRIVERS: [&str; 7] = [
    "IdealSelf",
    "PublicSelf",
    "Affiliation",
    "PhysicalPleasure",
    "SocialPleasure",
    "IdeologicalPleasure",
    "Memories",
];

/// Builds a valid random model: every emotional goal decomposes, every
/// functional and quality goal hangs under at least one parent, and
/// emotional-to-emotional edges only point forward so the graph stays
/// acyclic.
pub fn random_model(
    n_emotional: usize,
    n_functional: usize,
    n_quality: usize,
    names: &[String],
    seed: u64,
    with_attachments: bool,
) -> GoalModel {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut goals = Vec::new();
    let name_at = |i: usize| names[i % names.len()].clone();

    let e_ids: Vec<GoalId> = (0..n_emotional).map(|i| gid(&format!("E{i}"))).collect();
    let f_ids: Vec<GoalId> = (0..n_functional).map(|i| gid(&format!("F{i}"))).collect();
    let q_ids: Vec<GoalId> = (0..n_quality).map(|i| gid(&format!("Q{i}"))).collect();

    for (i, id) in e_ids.iter().enumerate() {
        let mut g = Goal::new(id.clone(), GoalKind::Emotional, name_at(i));
        if rng.gen_bool(0.6) {
            g = g.with_driver(
                AttachmentDriver::from_surface_name(DRIVERS[rng.gen_range(0..DRIVERS.len())])
                    .unwrap(),
            );
        }
        if rng.gen_bool(0.5) {
            g = g.with_frequency(rng.gen_range(0..9));
        }
        goals.push(g);
    }
    for (i, id) in f_ids.iter().enumerate() {
        goals.push(Goal::new(id.clone(), GoalKind::Functional, name_at(i + n_emotional)));
    }
    for (i, id) in q_ids.iter().enumerate() {
        goals.push(Goal::new(
            id.clone(),
            GoalKind::Quality,
            name_at(i + n_emotional + n_functional),
        ));
    }

    let mut decompositions = Vec::new();
    for (i, parent) in e_ids.iter().enumerate() {
        let mut children = Vec::new();
        for later in &e_ids[i + 1..] {
            if rng.gen_bool(0.3) {
                children.push(later.clone());
            }
        }
        for f in &f_ids {
            if rng.gen_bool(0.4) {
                children.push(f.clone());
            }
        }
        for q in &q_ids {
            if rng.gen_bool(0.2) {
                children.push(q.clone());
            }
        }
        if children.is_empty() {
            children.push(f_ids[rng.gen_range(0..f_ids.len())].clone());
        }
        let combinator = if rng.gen_bool(0.5) { Combinator::And } else { Combinator::Or };
        decompositions.push(Decomposition { parent: parent.clone(), combinator, children });
    }
    let claimed: std::collections::HashSet<GoalId> =
        decompositions.iter().flat_map(|d| d.children.iter().cloned()).collect();
    let mut attachments = Vec::new();
    if with_attachments {
        for f in &f_ids {
            for q in &q_ids {
                if rng.gen_bool(0.25) {
                    attachments
                        .push(QualityAttachment { functional: f.clone(), quality: q.clone() });
                }
            }
        }
    }
    let attached: std::collections::HashSet<GoalId> =
        attachments.iter().map(|a| a.quality.clone()).collect();
    // Hang unparented functional and quality goals under the last
    // emotional goal so nothing is orphaned.
    let last = decompositions.last_mut().unwrap();
    for f in &f_ids {
        if !claimed.contains(f) {
            last.children.push(f.clone());
        }
    }
    for q in &q_ids {
        if !claimed.contains(q) && !attached.contains(q) {
            last.children.push(q.clone());
        }
    }

    build_model("Random", goals, decompositions, attachments).expect("generator emits valid models")
}

pub fn random_assignment(model: &GoalModel, seed: u64) -> SatisfactionAssignment {
    let mut rng = StdRng::seed_from_u64(seed);
    model
        .goals()
        .filter(|g| g.kind != GoalKind::Emotional)
        .map(|g| (g.id.clone(), rng.gen_bool(0.5)))
        .collect()
}

/// Straightforward recursive evaluator used as an oracle for the
/// iterative implementation.
pub fn eval_oracle(model: &GoalModel, assignment: &SatisfactionAssignment, id: &GoalId) -> bool {
    let goal = model.goal(id).unwrap();
    match goal.kind {
        GoalKind::Quality => assignment[id],
        GoalKind::Functional => {
            assignment[id]
                && model
                    .attachments_of(id)
                    .all(|a| eval_oracle(model, assignment, &a.quality))
        }
        GoalKind::Emotional => {
            let d = model.decomposition_of(id).unwrap();
            match d.combinator {
                Combinator::And => d.children.iter().all(|c| eval_oracle(model, assignment, c)),
                Combinator::Or => d.children.iter().any(|c| eval_oracle(model, assignment, c)),
            }
        }
    }
}

/// Independent exact-tail oracle: rank the nonzero differences with
/// mid-ranks, then enumerate every sign assignment.
pub fn wilcoxon_oracle(pairs: &[PairedSample]) -> (f64, f64) {
    let mut diffs: Vec<f64> = pairs
        .iter()
        .map(|p| p.treatment - p.baseline)
        .filter(|d| *d != 0.0)
        .collect();
    diffs.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap());
    let n = diffs.len();
    let mut ranks = vec![0.0f64; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j < n && diffs[j].abs() == diffs[i].abs() {
            j += 1;
        }
        let mid = (i + 1 + j) as f64 / 2.0;
        for r in ranks.iter_mut().take(j).skip(i) {
            *r = mid;
        }
        i = j;
    }
    let w_plus: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| *r)
        .sum();
    let total: f64 = ranks.iter().sum();
    let t = w_plus.min(total - w_plus);

    let mut at_most_t = 0u64;
    for mask in 0u64..(1u64 << n) {
        let w: f64 = ranks
            .iter()
            .enumerate()
            .filter(|(k, _)| mask & (1 << k) != 0)
            .map(|(_, r)| *r)
            .sum();
        if w <= t + 1e-9 {
            at_most_t += 1;
        }
    }
    let p = (2.0 * at_most_t as f64 / (1u64 << n) as f64).min(1.0);
    (t, p)
}
