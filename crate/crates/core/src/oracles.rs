//! Computable witnesses for backups, profiles, alternating paths, the
//! insertion/backup/monotonicity claims, equivalence classes and the
//! two-partitioning. Every checker returns structured reports that carry the
//! failing instance.

use std::collections::VecDeque;
use std::fmt;

use serde::Serialize;

use crate::engine::{Engine, VertexOrder};
use crate::error::{Error, Result};
use crate::graph::{Graph, Matching, Vertex};
use crate::rank::{BucketedRankVector, EdgeProbeTime, Permutation, Rank};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimId {
    ViewsAgree,
    AltPathShape,
    AltPathMembership,
    AltPathRankMonotone,
    AltPathAvailability,
    InsertionUstarFirst,
    InsertionUFirst,
    InsertionWorseOff,
    BackupRankDominance,
    BackupMatchBound,
    NoMatchFact,
    MatchBeforeV,
    MonotonicityNoBackup,
    MonotonicityBackup,
    EquivalenceClassInterval,
    ColoringProper,
    ColoringMarginal,
    HBound,
    GainSum,
    GainMonotonicity,
}

impl ClaimId {
    pub fn name(self) -> &'static str {
        match self {
            ClaimId::ViewsAgree => "views-agree",
            ClaimId::AltPathShape => "alternating-path-shape",
            ClaimId::AltPathMembership => "alternating-path-membership",
            ClaimId::AltPathRankMonotone => "alternating-path-rank-monotone",
            ClaimId::AltPathAvailability => "alternating-path-availability",
            ClaimId::InsertionUstarFirst => "insertion-ustar-before-match",
            ClaimId::InsertionUFirst => "insertion-u-before-ustar",
            ClaimId::InsertionWorseOff => "insertion-u-worse-off",
            ClaimId::BackupRankDominance => "backup-rank-dominance",
            ClaimId::BackupMatchBound => "backup-match-bound",
            ClaimId::NoMatchFact => "no-match-fact",
            ClaimId::MatchBeforeV => "match-before-v",
            ClaimId::MonotonicityNoBackup => "monotonicity-no-backup",
            ClaimId::MonotonicityBackup => "monotonicity-backup",
            ClaimId::EquivalenceClassInterval => "equivalence-class-interval",
            ClaimId::ColoringProper => "coloring-proper",
            ClaimId::ColoringMarginal => "coloring-marginal",
            ClaimId::HBound => "h-bound",
            ClaimId::GainSum => "gain-sum",
            ClaimId::GainMonotonicity => "gain-monotonicity",
        }
    }
}

impl fmt::Display for ClaimId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A failed claim together with the instance that broke it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub claim: ClaimId,
    pub detail: String,
    pub vertex_count: usize,
    pub edges: Vec<(Vertex, Vertex)>,
    pub order: Vec<Vertex>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub ranks: Vec<(Vertex, Rank)>,
}

impl Violation {
    pub fn new(claim: ClaimId, g: &Graph, order: &Permutation, detail: impl Into<String>) -> Self {
        Violation {
            claim,
            detail: detail.into(),
            vertex_count: g.vertex_count(),
            edges: g.edges().to_vec(),
            order: order.order().to_vec(),
            ranks: Vec::new(),
        }
    }

    pub fn with_ranks(mut self, rv: &BucketedRankVector) -> Self {
        self.ranks = rv
            .domain()
            .into_iter()
            .map(|v| (v, rv.rank(v).unwrap()))
            .collect();
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("violation serializes")
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {} (n={}, edges={:?}, order={:?})",
            self.claim, self.detail, self.vertex_count, self.edges, self.order
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Skipped { reason: String },
    Fail { violation: Box<Violation> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClaimResult {
    pub claim: ClaimId,
    pub outcome: Outcome,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ClaimReport {
    pub results: Vec<ClaimResult>,
    /// Facts that are recorded but not asserted.
    pub observations: Vec<String>,
}

impl ClaimReport {
    fn record(&mut self, claim: ClaimId, outcome: Outcome) {
        self.results.push(ClaimResult { claim, outcome });
    }

    fn skip(&mut self, claim: ClaimId, reason: &str) {
        self.record(
            claim,
            Outcome::Skipped {
                reason: reason.to_string(),
            },
        );
    }

    fn check(&mut self, claim: ClaimId, ok: bool, fail: impl FnOnce() -> Violation) {
        let outcome = if ok {
            Outcome::Pass
        } else {
            Outcome::Fail {
                violation: Box::new(fail()),
            }
        };
        self.record(claim, outcome);
    }

    pub fn outcome(&self, claim: ClaimId) -> Option<&Outcome> {
        self.results
            .iter()
            .find(|r| r.claim == claim)
            .map(|r| &r.outcome)
    }

    pub fn passed(&self) -> bool {
        self.violations().next().is_none()
    }

    pub fn checked(&self) -> usize {
        self.results
            .iter()
            .filter(|r| !matches!(r.outcome, Outcome::Skipped { .. }))
            .count()
    }

    pub fn violations(&self) -> impl Iterator<Item = &Violation> {
        self.results.iter().filter_map(|r| match &r.outcome {
            Outcome::Fail { violation } => Some(violation.as_ref()),
            _ => None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ClassLabel {
    /// u unmatched (C⊥)
    Unmatched,
    /// u matched, removing its match leaves it unmatched (C_s)
    NoBackup,
    /// u matched and has a backup (C_b)
    WithBackup,
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassLabel::Unmatched => "C⊥",
            ClassLabel::NoBackup => "C_s",
            ClassLabel::WithBackup => "C_b",
        })
    }
}

/// Buckets of u, its match and its backup.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Profile {
    pub x_u: u32,
    pub x_v: Option<u32>,
    pub x_b: Option<u32>,
}

impl Profile {
    pub fn label(&self) -> ClassLabel {
        match (self.x_v, self.x_b) {
            (None, _) => ClassLabel::Unmatched,
            (Some(_), None) => ClassLabel::NoBackup,
            (Some(_), Some(_)) => ClassLabel::WithBackup,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AlternatingPath {
    /// u_0 = u*, u_1, ..., u_k
    pub vertices: Vec<Vertex>,
    /// `true` when edge (u_i, u_{i+1}) belongs to the run with u*.
    pub in_full_run: Vec<bool>,
}

impl AlternatingPath {
    pub fn end(&self) -> Vertex {
        *self.vertices.last().unwrap()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Color {
    Buyer,
    Item,
}

impl Color {
    pub fn flipped(self) -> Color {
        match self {
            Color::Buyer => Color::Item,
            Color::Item => Color::Buyer,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Coloring {
    colors: Vec<Color>,
}

impl Coloring {
    pub fn color(&self, v: Vertex) -> Color {
        self.colors[v]
    }

    pub fn complement(&self) -> Coloring {
        Coloring {
            colors: self.colors.iter().map(|c| c.flipped()).collect(),
        }
    }

    pub fn is_proper_on(&self, m: &Matching) -> bool {
        m.edges()
            .into_iter()
            .all(|(u, v)| self.colors[u] != self.colors[v])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceClass {
    pub label: ClassLabel,
    pub match_vertex: Option<Vertex>,
    pub backup: Option<Vertex>,
    /// Targets of the match inside the reduced vector, increasing.
    pub member_targets: Vec<Rank>,
    pub members: Vec<BucketedRankVector>,
    pub generating: BucketedRankVector,
}

/// Claim checkers parameterised by the engine under test.
#[derive(Clone, Copy, Debug, Default)]
pub struct Oracles {
    pub engine: Engine,
}

impl Oracles {
    pub fn new(engine: Engine) -> Self {
        Oracles { engine }
    }

    fn matching(&self, g: &Graph, order: &Permutation, frozen: &[Vertex]) -> Result<Matching> {
        self.engine.matching(g, order, frozen)
    }

    pub fn compute_backup(
        &self,
        g: &Graph,
        order_minus_ustar: &impl VertexOrder,
        u: Vertex,
    ) -> Result<Option<Vertex>> {
        let p = order_minus_ustar.permutation();
        let v = self.matching(g, &p, &[])?.mate(u).ok_or_else(|| {
            Error::Precondition(format!("vertex {u} is unmatched, backup undefined"))
        })?;
        Ok(self.matching(g, &p, &[v])?.mate(u))
    }

    pub fn compute_profile(
        &self,
        g: &Graph,
        rv_minus_ustar: &BucketedRankVector,
        u: Vertex,
    ) -> Result<(Profile, ClassLabel)> {
        let x_u = rv_minus_ustar.bucket(u).ok_or(Error::NotInDomain(u))?;
        let p = rv_minus_ustar.induced_permutation();
        let m = self.matching(g, &p, &[])?;
        let profile = match m.mate(u) {
            None => Profile {
                x_u,
                x_v: None,
                x_b: None,
            },
            Some(v) => {
                let b = self.matching(g, &p, &[v])?.mate(u);
                Profile {
                    x_u,
                    x_v: rv_minus_ustar.bucket(v),
                    x_b: b.and_then(|b| rv_minus_ustar.bucket(b)),
                }
            }
        };
        Ok((profile, profile.label()))
    }

    pub fn extract_alternating_path(
        &self,
        g: &Graph,
        order: &impl VertexOrder,
        u_star: Vertex,
        t: EdgeProbeTime,
    ) -> Result<AlternatingPath> {
        let p = order.permutation();
        if !p.contains(u_star) {
            return Err(Error::NotInDomain(u_star));
        }
        let full = self.engine.partial_state(g, p.as_ref(), t, &[])?;
        let minus = self.engine.partial_state(g, p.as_ref(), t, &[u_star])?;
        let fail = |claim, detail: String| {
            Error::Violation(Box::new(Violation::new(
                claim,
                g,
                &p,
                format!("u*={u_star}, t=({},{}): {detail}", t.first, t.second),
            )))
        };

        let mut diff: Vec<(Vertex, Vertex, bool)> = Vec::new();
        for (a, b) in full.partial_matching.edges() {
            if !minus.partial_matching.contains(a, b) {
                diff.push((a, b, true));
            }
        }
        for (a, b) in minus.partial_matching.edges() {
            if !full.partial_matching.contains(a, b) {
                diff.push((a, b, false));
            }
        }

        let mut used = vec![false; diff.len()];
        let mut vertices = vec![u_star];
        let mut in_full_run = Vec::new();
        let mut cur = u_star;
        loop {
            let incident: Vec<usize> = (0..diff.len())
                .filter(|&i| !used[i] && (diff[i].0 == cur || diff[i].1 == cur))
                .collect();
            match incident.as_slice() {
                [] => break,
                [i] => {
                    used[*i] = true;
                    let (a, b, tag) = diff[*i];
                    cur = if a == cur { b } else { a };
                    if vertices.contains(&cur) {
                        return Err(fail(ClaimId::AltPathShape, format!("cycle through {cur}")));
                    }
                    vertices.push(cur);
                    in_full_run.push(tag);
                }
                _ => {
                    return Err(fail(
                        ClaimId::AltPathShape,
                        format!("vertex {cur} has several difference edges"),
                    ))
                }
            }
        }
        if used.iter().any(|&x| !x) {
            return Err(fail(
                ClaimId::AltPathShape,
                "difference edges outside the path from u*".into(),
            ));
        }
        if let Some(i) = (0..in_full_run.len()).find(|&i| in_full_run[i] != (i % 2 == 0)) {
            return Err(fail(
                ClaimId::AltPathMembership,
                format!("edge {i} of path {vertices:?} sits in the wrong matching"),
            ));
        }
        let rank = |v: Vertex| p.rank(v).unwrap();
        if let Some(i) = (0..vertices.len().saturating_sub(2))
            .find(|&i| rank(vertices[i]) >= rank(vertices[i + 2]))
        {
            return Err(fail(
                ClaimId::AltPathRankMonotone,
                format!("σ(u_{i}) ≥ σ(u_{}) on path {vertices:?}", i + 2),
            ));
        }
        let avail_diff: Vec<Vertex> = (0..g.vertex_count())
            .filter(|&v| full.is_available(v) != minus.is_available(v))
            .collect();
        let end = *vertices.last().unwrap();
        if avail_diff != [end] {
            return Err(fail(
                ClaimId::AltPathAvailability,
                format!("available sets differ at {avail_diff:?}, path ends at {end}"),
            ));
        }
        Ok(AlternatingPath {
            vertices,
            in_full_run,
        })
    }

    /// Alternating-path lemma at the start, at every probe time and at the end.
    pub fn check_alternating_paths(
        &self,
        g: &Graph,
        order: &Permutation,
        u_star: Vertex,
    ) -> Result<Vec<Violation>> {
        let mut times = vec![EdgeProbeTime::START];
        times.extend(
            g.edges()
                .iter()
                .filter_map(|&(a, b)| EdgeProbeTime::of_edge(order, a, b)),
        );
        times.push(EdgeProbeTime::END);
        times.sort_unstable();
        times.dedup();
        let mut out = Vec::new();
        for t in times {
            match self.extract_alternating_path(g, order, u_star, t) {
                Ok(_) => {}
                Err(Error::Violation(v)) => out.push(*v),
                Err(e) => return Err(e),
            }
        }
        Ok(out)
    }

    pub fn check_insertion_claims(
        &self,
        g: &Graph,
        rv_minus_ustar: &BucketedRankVector,
        u: Vertex,
        u_star: Vertex,
        target: Rank,
    ) -> Result<ClaimReport> {
        if rv_minus_ustar.contains(u_star) {
            return Err(Error::Precondition(format!(
                "u* = {u_star} must be absent from the vector"
            )));
        }
        if !rv_minus_ustar.contains(u) {
            return Err(Error::NotInDomain(u));
        }
        let sigma = rv_minus_ustar.move_vertex(u_star, target)?;
        let p = sigma.induced_permutation();
        let full = self.matching(g, &p, &[])?;
        let minus = self.matching(g, &p, &[u_star])?;
        let rank = |v: Vertex| p.rank(v).unwrap();
        let at_most = |w: Option<Vertex>, bound: Vertex| w.is_some_and(|w| rank(w) <= rank(bound));
        let witness = |claim, detail: String| {
            Violation::new(claim, g, &p, format!("u={u}, u*={u_star}: {detail}")).with_ranks(&sigma)
        };
        let mut report = ClaimReport::default();
        let adjacent = g.has_edge(u, u_star);

        match minus.mate(u) {
            Some(v) => {
                report.skip(ClaimId::NoMatchFact, "u matched without u*");
                if rank(u_star) < rank(v) {
                    if adjacent {
                        let w = full.mate(u_star);
                        report.check(ClaimId::InsertionUstarFirst, at_most(w, u), || {
                            witness(ClaimId::InsertionUstarFirst, format!("u* matched to {w:?}"))
                        });
                    } else {
                        report.skip(ClaimId::InsertionUstarFirst, "(u, u*) is not an edge");
                    }
                } else {
                    report.skip(ClaimId::InsertionUstarFirst, "u* ranked after the match");
                }
                if rank(u_star) > rank(u) {
                    let w = full.mate(u);
                    report.check(ClaimId::InsertionUFirst, at_most(w, v), || {
                        witness(ClaimId::InsertionUFirst, format!("u matched to {w:?}, was {v}"))
                    });
                } else {
                    report.skip(ClaimId::InsertionUFirst, "u* ranked before u");
                }
                let worse = full.mate(u).is_none_or(|w| rank(w) > rank(v));
                if worse {
                    let w = full.mate(u_star);
                    report.check(ClaimId::InsertionWorseOff, at_most(w, v), || {
                        witness(ClaimId::InsertionWorseOff, format!("u* matched to {w:?}"))
                    });
                } else {
                    report.skip(ClaimId::InsertionWorseOff, "u not worse off");
                }
                match self.matching(g, &p, &[u_star, v])?.mate(u) {
                    Some(b) => {
                        report.check(ClaimId::BackupRankDominance, rank(v) < rank(b), || {
                            witness(ClaimId::BackupRankDominance, format!("match {v}, backup {b}"))
                        });
                        let w = full.mate(u);
                        report.check(ClaimId::BackupMatchBound, at_most(w, b), || {
                            witness(ClaimId::BackupMatchBound, format!("u matched to {w:?}, backup {b}"))
                        });
                    }
                    None => {
                        report.skip(ClaimId::BackupRankDominance, "no backup");
                        report.skip(ClaimId::BackupMatchBound, "no backup");
                    }
                }
            }
            None => {
                for claim in [
                    ClaimId::InsertionUstarFirst,
                    ClaimId::InsertionUFirst,
                    ClaimId::InsertionWorseOff,
                    ClaimId::BackupRankDominance,
                    ClaimId::BackupMatchBound,
                ] {
                    report.skip(claim, "u unmatched without u*");
                }
                if adjacent {
                    let w = full.mate(u_star);
                    report.check(ClaimId::NoMatchFact, at_most(w, u), || {
                        witness(ClaimId::NoMatchFact, format!("u* matched to {w:?}"))
                    });
                } else {
                    report.skip(ClaimId::NoMatchFact, "(u, u*) is not an edge");
                }
            }
        }
        Ok(report)
    }

    pub fn check_monotonicity(
        &self,
        g: &Graph,
        rv: &BucketedRankVector,
        u: Vertex,
    ) -> Result<ClaimReport> {
        let p = rv.induced_permutation();
        let v = self.matching(g, &p, &[])?.mate(u).ok_or_else(|| {
            Error::Precondition(format!("vertex {u} is unmatched"))
        })?;
        let backup = self.matching(g, &p, &[v])?.mate(u);
        let home = p.rank(v).unwrap();
        let mut report = ClaimReport::default();
        for t in rv.targets(v)? {
            let moved = rv.move_vertex(v, t)?;
            let q = moved.induced_permutation();
            let to = q.rank(v).unwrap();
            if to < home {
                continue;
            }
            let mate = self.matching(g, &q, &[])?.mate(u);
            let new_backup = self.matching(g, &q, &[v])?.mate(u);
            let witness = |claim| {
                Violation::new(
                    claim,
                    g,
                    &q,
                    format!(
                        "u={u}, match {v} moved to ({},{}): mate {mate:?}, backup {new_backup:?}, expected backup {backup:?}",
                        t.bucket, t.position
                    ),
                )
                .with_ranks(&moved)
            };
            match backup {
                None => {
                    let ok = mate == Some(v) && new_backup.is_none();
                    report.check(ClaimId::MonotonicityNoBackup, ok, || {
                        witness(ClaimId::MonotonicityNoBackup)
                    });
                }
                Some(b) => {
                    if to < q.rank(b).unwrap() {
                        let ok = mate == Some(v) && new_backup == Some(b);
                        report.check(ClaimId::MonotonicityBackup, ok, || {
                            witness(ClaimId::MonotonicityBackup)
                        });
                    } else if mate != Some(v) {
                        report.observations.push(format!(
                            "moving {v} to ({},{}) past backup {b} rematches u={u} to {mate:?}",
                            t.bucket, t.position
                        ));
                    }
                }
            }
        }
        Ok(report)
    }

    pub fn enumerate_equivalence_class(
        &self,
        g: &Graph,
        generator: &BucketedRankVector,
        u: Vertex,
    ) -> Result<EquivalenceClass> {
        let p = generator.induced_permutation();
        let Some(v) = self.matching(g, &p, &[])?.mate(u) else {
            return Ok(EquivalenceClass {
                label: ClassLabel::Unmatched,
                match_vertex: None,
                backup: None,
                member_targets: Vec::new(),
                members: vec![generator.clone()],
                generating: generator.clone(),
            });
        };
        let base = generator.remove_vertex(v)?;
        let backup = self.matching(g, &base.induced_permutation(), &[])?.mate(u);
        let label = if backup.is_some() {
            ClassLabel::WithBackup
        } else {
            ClassLabel::NoBackup
        };
        let targets = base.targets(v)?;
        let mut member_targets = Vec::new();
        let mut members = Vec::new();
        for &t in &targets {
            let candidate = base.move_vertex(v, t)?;
            if self.matching(g, &candidate.induced_permutation(), &[])?.mate(u) == Some(v) {
                member_targets.push(t);
                members.push(candidate);
            }
        }
        let first = *member_targets.first().ok_or_else(|| {
            Error::Precondition("generator is not a member of its own class".into())
        })?;
        let expected: Vec<Rank> = match backup {
            None => targets.iter().copied().filter(|&t| t >= first).collect(),
            Some(b) => {
                let limit = base.rank(b).unwrap();
                targets
                    .iter()
                    .copied()
                    .filter(|&t| t >= first && t <= limit)
                    .collect()
            }
        };
        if expected != member_targets {
            return Err(Error::Violation(Box::new(
                Violation::new(
                    ClaimId::EquivalenceClassInterval,
                    g,
                    &p,
                    format!(
                        "u={u}, match {v}, backup {backup:?}: members at {member_targets:?}, interval predicts {expected:?}"
                    ),
                )
                .with_ranks(generator),
            )));
        }
        let generating = members[0].clone();
        Ok(EquivalenceClass {
            label,
            match_vertex: Some(v),
            backup,
            member_targets,
            members,
            generating,
        })
    }

    /// While v is available at vertex-iterative time t ≤ σ(v), the partial
    /// states of σ, σ with v swapped forward, and σ with v frozen agree away
    /// from v.
    pub fn check_match_before_v(
        &self,
        g: &Graph,
        order: &Permutation,
        v: Vertex,
    ) -> Result<Vec<Violation>> {
        let plus = order.swapped_with_next(v)?;
        let home = order.rank(v).ok_or(Error::NotInDomain(v))?;
        let mut out = Vec::new();
        for step in 1..=home {
            let t = EdgeProbeTime::new(step, 1);
            let base = self.engine.partial_state(g, order, t, &[])?;
            if !base.is_available(v) {
                break;
            }
            let swapped = self.engine.partial_state(g, &plus, t, &[])?;
            let frozen = self.engine.partial_state(g, order, t, &[v])?;
            let strip = |s: &[Vertex]| s.iter().copied().filter(|&w| w != v).collect::<Vec<_>>();
            let ok = base.partial_matching == swapped.partial_matching
                && base.partial_matching == frozen.partial_matching
                && base.available == swapped.available
                && strip(&base.available) == frozen.available;
            if !ok {
                out.push(Violation::new(
                    ClaimId::MatchBeforeV,
                    g,
                    order,
                    format!("v={v}, t=({step},1): partial states diverge"),
                ));
            }
        }
        Ok(out)
    }
}

pub fn compute_backup(g: &Graph, order_minus_ustar: &impl VertexOrder, u: Vertex) -> Result<Option<Vertex>> {
    Oracles::default().compute_backup(g, order_minus_ustar, u)
}

pub fn compute_profile(
    g: &Graph,
    rv_minus_ustar: &BucketedRankVector,
    u: Vertex,
) -> Result<(Profile, ClassLabel)> {
    Oracles::default().compute_profile(g, rv_minus_ustar, u)
}

pub fn extract_alternating_path(
    g: &Graph,
    order: &impl VertexOrder,
    u_star: Vertex,
    t: EdgeProbeTime,
) -> Result<AlternatingPath> {
    Oracles::default().extract_alternating_path(g, order, u_star, t)
}

pub fn check_insertion_claims(
    g: &Graph,
    rv_minus_ustar: &BucketedRankVector,
    u: Vertex,
    u_star: Vertex,
    target: Rank,
) -> Result<ClaimReport> {
    Oracles::default().check_insertion_claims(g, rv_minus_ustar, u, u_star, target)
}

pub fn check_monotonicity(g: &Graph, rv: &BucketedRankVector, u: Vertex) -> Result<ClaimReport> {
    Oracles::default().check_monotonicity(g, rv, u)
}

pub fn enumerate_equivalence_class(
    g: &Graph,
    generator: &BucketedRankVector,
    u: Vertex,
) -> Result<EquivalenceClass> {
    Oracles::default().enumerate_equivalence_class(g, generator, u)
}

/// Proper 2-coloring of R ∪ M*: components in vertex-id order, lowest vertex
/// of each component is a buyer; `coin` flips everything.
pub fn two_coloring(g: &Graph, ranking: &Matching, m_star: &Matching, coin: bool) -> Result<Coloring> {
    ranking.check_on(g)?;
    m_star.check_on(g)?;
    let n = g.vertex_count();
    let mut colors: Vec<Option<Color>> = vec![None; n];
    let mut queue = VecDeque::new();
    for root in 0..n {
        if colors[root].is_some() {
            continue;
        }
        colors[root] = Some(Color::Buyer);
        queue.push_back(root);
        while let Some(x) = queue.pop_front() {
            let cx = colors[x].unwrap();
            for y in [ranking.mate(x), m_star.mate(x)].into_iter().flatten() {
                match colors[y] {
                    None => {
                        colors[y] = Some(cx.flipped());
                        queue.push_back(y);
                    }
                    Some(cy) if cy == cx => {
                        return Err(Error::Coloring(format!(
                            "odd cycle through edge ({x}, {y}) in the matching union"
                        )))
                    }
                    Some(_) => {}
                }
            }
        }
    }
    let coloring = Coloring {
        colors: colors.into_iter().map(Option::unwrap).collect(),
    };
    Ok(if coin { coloring.complement() } else { coloring })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{appendix::*, appendix_counterexample, generate_family, permutations, Family};

    fn perm(n: usize, order: &[Vertex]) -> Permutation {
        Permutation::from_order(n, order).unwrap()
    }

    fn rv(k: u32, n: usize, entries: &[(Vertex, u32, u32)]) -> BucketedRankVector {
        BucketedRankVector::from_ranks(k, n, entries.iter().map(|&(v, x, y)| (v, Rank::new(x, y))))
            .unwrap()
    }

    #[test]
    fn backup_examples() {
        let a = appendix_counterexample().unwrap();
        assert_eq!(
            compute_backup(&a, &perm(5, &[U, U1, V, V1, W]), U).unwrap(),
            Some(V1)
        );
        let k2 = Graph::new(2, &[(0, 1)]).unwrap();
        assert_eq!(compute_backup(&k2, &perm(2, &[0, 1]), 0).unwrap(), None);
        // P4 a-b-c-d, order (b, a, c, d)
        let p4 = generate_family(&Family::Path { n: 4 }).unwrap();
        assert_eq!(compute_backup(&p4, &perm(4, &[1, 0, 2, 3]), 1).unwrap(), Some(2));
        let iso = Graph::new(2, &[]).unwrap();
        assert!(matches!(
            compute_backup(&iso, &perm(2, &[0, 1]), 0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn profile_examples() {
        let k2 = Graph::new(2, &[(0, 1)]).unwrap();
        let (p, l) = compute_profile(&k2, &rv(3, 2, &[(0, 1, 1), (1, 2, 1)]), 0).unwrap();
        assert_eq!(p, Profile { x_u: 1, x_v: Some(2), x_b: None });
        assert_eq!(l, ClassLabel::NoBackup);
        let iso = Graph::new(2, &[]).unwrap();
        let (p, l) = compute_profile(&iso, &rv(3, 2, &[(0, 2, 1), (1, 1, 1)]), 0).unwrap();
        assert_eq!(p, Profile { x_u: 2, x_v: None, x_b: None });
        assert_eq!(l, ClassLabel::Unmatched);
        let a = appendix_counterexample().unwrap();
        let spread = rv(5, 5, &[(U, 1, 1), (U1, 2, 1), (V, 3, 1), (V1, 4, 1), (W, 5, 1)]);
        let (p, l) = compute_profile(&a, &spread, U).unwrap();
        assert_eq!(p, Profile { x_u: 1, x_v: Some(3), x_b: Some(4) });
        assert_eq!(l, ClassLabel::WithBackup);
    }

    #[test]
    fn alternating_path_examples() {
        // u*=0 - a=1 - b=2
        let g = Graph::new(3, &[(0, 1), (1, 2)]).unwrap();
        let order = perm(3, &[0, 1, 2]);
        let start = extract_alternating_path(&g, &order, 0, EdgeProbeTime::START).unwrap();
        assert_eq!(start.vertices, vec![0]);
        let end = extract_alternating_path(&g, &order, 0, EdgeProbeTime::END).unwrap();
        assert_eq!(end.vertices, vec![0, 1, 2]);
        assert_eq!(end.in_full_run, vec![true, false]);
        // u* isolated next to a K2
        let g = Graph::new(3, &[(1, 2)]).unwrap();
        for t in [EdgeProbeTime::START, EdgeProbeTime::new(1, 3), EdgeProbeTime::END] {
            let path = extract_alternating_path(&g, &perm(3, &[1, 0, 2]), 0, t).unwrap();
            assert_eq!(path.vertices, vec![0]);
        }
    }

    #[test]
    fn alternating_paths_hold_exhaustively() {
        for n in 1..=5 {
            for g in crate::graph::connected_graphs(n) {
                for p in permutations(n) {
                    let order = perm(n, &p);
                    for u_star in 0..n {
                        let v = Oracles::default().check_alternating_paths(&g, &order, u_star).unwrap();
                        assert!(v.is_empty(), "{}", v[0]);
                    }
                }
            }
        }
    }

    #[test]
    fn mutated_engine_breaks_alternating_paths() {
        let g = Graph::new(3, &[(0, 1), (1, 2)]).unwrap();
        let v = Oracles::new(Engine::MUTATED)
            .check_alternating_paths(&g, &perm(3, &[0, 1, 2]), 0)
            .unwrap();
        assert!(!v.is_empty());
    }

    #[test]
    fn insertion_examples() {
        // u=0, v=1, u*=2; edges u-v, u-u*
        let g = Graph::new(3, &[(0, 1), (0, 2)]).unwrap();
        let minus = rv(1, 3, &[(0, 1, 1), (1, 1, 2)]);
        let r = check_insertion_claims(&g, &minus, 0, 2, Rank::new(1, 1)).unwrap();
        assert_eq!(r.outcome(ClaimId::InsertionUstarFirst), Some(&Outcome::Pass));
        assert!(r.passed());
        // only u-u*, u unmatched without u*
        let g = Graph::new(2, &[(0, 1)]).unwrap();
        let minus = rv(2, 2, &[(0, 1, 1)]);
        for t in minus.targets(1).unwrap() {
            let r = check_insertion_claims(&g, &minus, 0, 1, t).unwrap();
            assert_eq!(r.outcome(ClaimId::NoMatchFact), Some(&Outcome::Pass));
        }
        // appendix graph plus u* = 5 hanging off v1
        let a = appendix_counterexample().unwrap().extended(1, &[(V1, 5)]).unwrap();
        let minus = rv(1, 6, &[(U, 1, 1), (U1, 1, 2), (V, 1, 3), (V1, 1, 4), (W, 1, 5)]);
        for t in minus.targets(5).unwrap() {
            let r = check_insertion_claims(&a, &minus, U, 5, t).unwrap();
            assert_eq!(r.outcome(ClaimId::BackupMatchBound), Some(&Outcome::Pass));
            assert!(r.passed());
        }
    }

    #[test]
    fn monotonicity_examples() {
        let k2 = Graph::new(2, &[(0, 1)]).unwrap();
        let r = check_monotonicity(&k2, &rv(2, 2, &[(0, 1, 1), (1, 1, 2)]), 0).unwrap();
        assert!(r.passed() && r.checked() > 0);
        let a = appendix_counterexample().unwrap();
        let order = rv(1, 5, &[(U, 1, 1), (U1, 1, 2), (V, 1, 3), (V1, 1, 4), (W, 1, 5)]);
        let r = check_monotonicity(&a, &order, U).unwrap();
        assert!(r.passed());
        assert!(r.observations.iter().any(|o| o.contains("Some(3)")), "{:?}", r.observations);
    }

    #[test]
    fn equivalence_class_examples() {
        let iso = Graph::new(2, &[]).unwrap();
        let gen = rv(2, 2, &[(0, 1, 1), (1, 1, 2)]);
        let c = enumerate_equivalence_class(&iso, &gen, 0).unwrap();
        assert_eq!(c.label, ClassLabel::Unmatched);
        assert_eq!(c.members, vec![gen]);

        let k2 = Graph::new(2, &[(0, 1)]).unwrap();
        let c = enumerate_equivalence_class(&k2, &rv(2, 2, &[(0, 1, 1), (1, 2, 1)]), 0).unwrap();
        assert_eq!(c.label, ClassLabel::NoBackup);
        assert_eq!(
            c.member_targets,
            vec![Rank::new(1, 1), Rank::new(1, 2), Rank::new(2, 1)]
        );

        let a = appendix_counterexample().unwrap();
        let gen = rv(1, 5, &[(U, 1, 1), (U1, 1, 2), (V, 1, 3), (V1, 1, 4), (W, 1, 5)]);
        let c = enumerate_equivalence_class(&a, &gen, U).unwrap();
        assert_eq!(c.label, ClassLabel::WithBackup);
        assert_eq!(c.backup, Some(V1));
        let b_rank = c.generating.induced_permutation().rank(V1).unwrap();
        for m in &c.members {
            let q = m.induced_permutation();
            assert!(q.rank(V).unwrap() < q.rank(V1).unwrap());
            assert_eq!(q.rank(V1).unwrap(), b_rank);
        }
    }

    #[test]
    fn coloring_examples() {
        let k2 = Graph::new(2, &[(0, 1)]).unwrap();
        let m = Matching::from_edges(2, &[(0, 1)]).unwrap();
        let c = two_coloring(&k2, &m, &m, false).unwrap();
        assert_ne!(c.color(0), c.color(1));
        assert_eq!(two_coloring(&k2, &m, &m, true).unwrap(), c.complement());
        // 0-1 in R, 1-2 and 3-0 in M*: path 3-0-1-2
        let p = Graph::new(4, &[(0, 1), (1, 2), (0, 3)]).unwrap();
        let r = Matching::from_edges(4, &[(0, 1)]).unwrap();
        let s = Matching::from_edges(4, &[(1, 2), (0, 3)]).unwrap();
        let c = two_coloring(&p, &r, &s, false).unwrap();
        assert_eq!(c.color(0), Color::Buyer);
        for (x, y) in [(3, 0), (0, 1), (1, 2)] {
            assert_ne!(c.color(x), c.color(y));
        }
        let iso = Graph::new(1, &[]).unwrap();
        let e = Matching::empty(1);
        assert_eq!(two_coloring(&iso, &e, &e, false).unwrap().color(0), Color::Buyer);
    }

    #[test]
    fn match_before_v_holds_on_small_graphs() {
        for n in 1..=5 {
            for g in crate::graph::connected_graphs(n) {
                for p in permutations(n) {
                    let order = perm(n, &p);
                    for v in 0..n {
                        let out = Oracles::default().check_match_before_v(&g, &order, v).unwrap();
                        assert!(out.is_empty(), "{}", out[0]);
                    }
                }
            }
        }
    }

    #[test]
    fn violation_json_names_the_claim() {
        let g = Graph::new(2, &[(0, 1)]).unwrap();
        let v = Violation::new(ClaimId::NoMatchFact, &g, &perm(2, &[1, 0]), "x");
        let json = v.to_json();
        assert!(json.contains("\"no_match_fact\""));
        assert!(json.contains("\"order\":[1,0]"));
    }
}
