//! Lemma sweep: every structural oracle and the h-bound audit over a graph
//! corpus, exhaustively where the corpus is small enough.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use ranking_core::gain::{audit_h_bounds, AuditBudget, PriceTable};
use ranking_core::graph::{
    appendix_counterexample, connected_graphs, generate_family, maximum_matching, permutations, Family,
};
use ranking_core::oracles::{two_coloring, ClaimId, ClaimReport, Oracles, Violation};
use ranking_core::rank::{for_each_rank_vector, rank_vector_count};
use ranking_core::engine::views_agree_with;
use ranking_core::{BucketedRankVector, Engine, Error, Graph, Permutation, Vertex};

use crate::error::{ForgeError, Result};

/// Violations kept per instance; the count is always exact.
const KEPT_VIOLATIONS: usize = 100;
const KEPT_OBSERVATIONS: usize = 20;

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: String,
    pub graph: Graph,
}

impl CorpusEntry {
    /// Attaches a maximum matching as M* when the graph has none.
    pub fn new(name: impl Into<String>, graph: Graph) -> Result<Self> {
        let graph = if graph.designated_matching().is_some() {
            graph
        } else {
            let m = maximum_matching(&graph)?;
            graph.with_perfect_matching(m)?
        };
        Ok(CorpusEntry {
            name: name.into(),
            graph,
        })
    }
}

#[derive(Clone, Debug)]
pub enum CorpusSelector {
    /// Connected graphs up to `max_n` vertices, P4, C6, K4, the backup
    /// counterexample and 20 random planted-matching graphs on 8 vertices.
    Default,
    /// Connected graphs up to `max_n` vertices plus the backup counterexample.
    Small,
    /// The backup counterexample alone.
    Appendix,
    Custom(Vec<CorpusEntry>),
}

pub const RANDOM_CORPUS_GRAPHS: u64 = 20;
pub const RANDOM_CORPUS_VERTICES: usize = 8;
pub const RANDOM_CORPUS_DENSITY: f64 = 0.3;

/// The 8-vertex planted-matching graphs of the default corpus.
pub fn random_corpus(seed: u64) -> Result<Vec<CorpusEntry>> {
    (0..RANDOM_CORPUS_GRAPHS)
        .map(|i| {
            let g = generate_family(&Family::RandomWithPerfectMatching {
                n: RANDOM_CORPUS_VERTICES,
                density: RANDOM_CORPUS_DENSITY,
                seed: seed.wrapping_add(i),
            })?;
            CorpusEntry::new(format!("random-pm-{RANDOM_CORPUS_VERTICES}-{i}"), g)
        })
        .collect()
}

fn connected_corpus(max_n: usize) -> Result<Vec<CorpusEntry>> {
    let mut out = Vec::new();
    for n in 1..=max_n {
        for (i, g) in connected_graphs(n).into_iter().enumerate() {
            out.push(CorpusEntry::new(format!("connected-{n}-{i}"), g)?);
        }
    }
    Ok(out)
}

pub fn build_corpus(selector: &CorpusSelector, max_n: usize, seed: u64) -> Result<Vec<CorpusEntry>> {
    if !(1..=7).contains(&max_n) {
        return Err(ForgeError::InvalidParameter(format!(
            "max n must be in 1..=7, got {max_n}"
        )));
    }
    let appendix = || CorpusEntry::new("appendix", appendix_counterexample()?);
    Ok(match selector {
        CorpusSelector::Default => {
            let mut out = connected_corpus(max_n)?;
            out.push(CorpusEntry::new("path-4", generate_family(&Family::Path { n: 4 })?)?);
            out.push(CorpusEntry::new("cycle-6", generate_family(&Family::Cycle { n: 6 })?)?);
            out.push(CorpusEntry::new("complete-4", generate_family(&Family::Complete { n: 4 })?)?);
            out.push(appendix()?);
            out.extend(random_corpus(seed)?);
            out
        }
        CorpusSelector::Small => {
            let mut out = connected_corpus(max_n)?;
            out.push(appendix()?);
            out
        }
        CorpusSelector::Appendix => vec![appendix()?],
        CorpusSelector::Custom(list) => list.clone(),
    })
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub max_n: usize,
    /// Buckets for the rank-vector claims.
    pub k: u32,
    pub corpus: CorpusSelector,
    pub exhaustive: bool,
    /// Largest graph whose orders are enumerated in exhaustive mode.
    pub exhaustive_limit: usize,
    /// Orders and rank vectors drawn per instance when sampling.
    pub samples: usize,
    /// Rank vectors enumerated per (u, u*) before falling back to sampling.
    pub vector_budget: u128,
    pub seed: u64,
    pub engine: Engine,
    /// Tables for the h-bound audit; empty means one random monotone table.
    pub price_tables: Vec<PriceTable>,
    pub h_audits: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            max_n: 5,
            k: 2,
            corpus: CorpusSelector::Default,
            exhaustive: false,
            exhaustive_limit: 6,
            samples: 200,
            vector_budget: 20_000,
            seed: 0,
            engine: Engine::FAITHFUL,
            price_tables: Vec::new(),
            h_audits: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstanceSummary {
    pub name: String,
    pub vertices: usize,
    pub edges: usize,
    pub orders: usize,
    pub exhaustive: bool,
    pub violations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepReport {
    pub corpus: String,
    pub k: u32,
    pub seed: u64,
    pub exhaustive: bool,
    pub engine_mutated: bool,
    pub instances: Vec<InstanceSummary>,
    /// Checks performed per claim name.
    pub claims_checked: BTreeMap<String, usize>,
    pub violation_count: usize,
    pub violations: Vec<Violation>,
    /// How often u's backup was itself matched by RANKING.
    pub backup_matched_observed: usize,
    pub observations: Vec<String>,
    pub wall_secs: f64,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }

    pub fn checks_total(&self) -> usize {
        self.claims_checked.values().sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn summary_line(&self) -> String {
        format!(
            "{} instances, {} checks, {} violations",
            self.instances.len(),
            self.checks_total(),
            self.violation_count
        )
    }
}

#[derive(Default)]
struct Tally {
    claims: BTreeMap<ClaimId, usize>,
    violation_count: usize,
    violations: Vec<Violation>,
    backup_matched: usize,
    observations: Vec<String>,
}

impl Tally {
    fn checked(&mut self, claim: ClaimId, n: usize) {
        *self.claims.entry(claim).or_default() += n;
    }

    fn fail(&mut self, v: Violation) {
        self.violation_count += 1;
        if self.violations.len() < KEPT_VIOLATIONS {
            self.violations.push(v);
        }
    }

    fn observe(&mut self, text: String) {
        if self.observations.len() < KEPT_OBSERVATIONS {
            self.observations.push(text);
        }
    }

    fn merge_report(&mut self, r: ClaimReport) {
        for res in &r.results {
            if !matches!(res.outcome, ranking_core::oracles::Outcome::Skipped { .. }) {
                self.checked(res.claim, 1);
            }
        }
        for v in r.violations() {
            self.fail(v.clone());
        }
    }

    /// An oracle error where a witness was expected counts against `claim`.
    fn oracle_error(&mut self, claim: ClaimId, g: &Graph, order: &Permutation, e: Error) {
        match e {
            Error::Violation(v) => self.fail(*v),
            other => self.fail(Violation::new(claim, g, order, format!("oracle error: {other}"))),
        }
    }
}

fn instance_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn orders_for(g: &Graph, cfg: &SweepConfig, rng: &mut ChaCha8Rng) -> Result<(Vec<Permutation>, bool)> {
    let n = g.vertex_count();
    if cfg.exhaustive && n <= cfg.exhaustive_limit {
        let all = permutations(n)
            .iter()
            .map(|o| Permutation::from_order(n, o))
            .collect::<ranking_core::Result<_>>()?;
        return Ok((all, true));
    }
    let mut out = Vec::with_capacity(cfg.samples);
    let mut order: Vec<Vertex> = g.vertices().collect();
    for _ in 0..cfg.samples {
        order.shuffle(rng);
        out.push(Permutation::from_order(n, &order)?);
    }
    Ok((out, false))
}

fn order_checks(g: &Graph, p: &Permutation, oracles: &Oracles, t: &mut Tally) -> Result<()> {
    let engine = oracles.engine;
    match views_agree_with(engine, g, p) {
        Ok(None) => t.checked(ClaimId::ViewsAgree, 1),
        Ok(Some(d)) => {
            t.checked(ClaimId::ViewsAgree, 1);
            t.fail(Violation::new(ClaimId::ViewsAgree, g, p, format!("views diverge: {:?}", d.matchings)));
        }
        Err(e) => t.oracle_error(ClaimId::ViewsAgree, g, p, e),
    }
    for u_star in g.vertices() {
        match oracles.check_alternating_paths(g, p, u_star) {
            Ok(vs) => {
                for c in [
                    ClaimId::AltPathShape,
                    ClaimId::AltPathMembership,
                    ClaimId::AltPathRankMonotone,
                    ClaimId::AltPathAvailability,
                ] {
                    t.checked(c, 1);
                }
                vs.into_iter().for_each(|v| t.fail(v));
            }
            Err(e) => t.oracle_error(ClaimId::AltPathShape, g, p, e),
        }
        match oracles.check_match_before_v(g, p, u_star) {
            Ok(vs) => {
                t.checked(ClaimId::MatchBeforeV, 1);
                vs.into_iter().for_each(|v| t.fail(v));
            }
            Err(e) => t.oracle_error(ClaimId::MatchBeforeV, g, p, e),
        }
    }

    let m_star = g.designated_matching().expect("corpus entries carry M*");
    let ranking = engine.matching(g, p, &[])?;
    let c0 = two_coloring(g, &ranking, m_star, false)?;
    let c1 = two_coloring(g, &ranking, m_star, true)?;
    t.checked(ClaimId::ColoringProper, 1);
    let proper = [&c0, &c1]
        .iter()
        .all(|c| c.is_proper_on(&ranking) && c.is_proper_on(m_star));
    if !proper {
        t.fail(Violation::new(ClaimId::ColoringProper, g, p, "coloring is not proper on R ∪ M*"));
    }
    // the coin picks between a coloring and its complement, so every vertex
    // is a buyer with probability exactly 1/2
    t.checked(ClaimId::ColoringMarginal, 1);
    if c1 != c0.complement() {
        t.fail(Violation::new(ClaimId::ColoringMarginal, g, p, "coin outcomes are not complementary"));
    }

    for u in g.vertices() {
        let Some(v) = ranking.mate(u) else { continue };
        if let Some(b) = engine.matching(g, p, &[v])?.mate(u) {
            if let Some(w) = ranking.mate(b) {
                t.backup_matched += 1;
                t.observe(format!(
                    "order {:?}: backup {b} of u={u} (match {v}) is matched to {w}",
                    p.order()
                ));
            }
        }
    }
    Ok(())
}

fn vectors_for(
    vertices: &[Vertex],
    universe: usize,
    cfg: &SweepConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<BucketedRankVector>> {
    let count = rank_vector_count(vertices.len(), cfg.k);
    let mut out = Vec::new();
    if cfg.exhaustive && count <= cfg.vector_budget {
        for_each_rank_vector(vertices, universe, cfg.k, cfg.vector_budget, |rv, _| out.push(rv.clone()))?;
    } else {
        for _ in 0..cfg.samples {
            out.push(BucketedRankVector::sample_with(vertices, universe, cfg.k, rng)?);
        }
    }
    Ok(out)
}

fn pair_checks(
    g: &Graph,
    u: Vertex,
    u_star: Vertex,
    cfg: &SweepConfig,
    oracles: &Oracles,
    rng: &mut ChaCha8Rng,
    t: &mut Tally,
) -> Result<()> {
    let n = g.vertex_count();
    let rest: Vec<Vertex> = g.vertices().filter(|&w| w != u_star).collect();
    for rv in vectors_for(&rest, n, cfg, rng)? {
        let p = rv.induced_permutation();
        for target in rv.targets(u_star)? {
            match oracles.check_insertion_claims(g, &rv, u, u_star, target) {
                Ok(r) => t.merge_report(r),
                Err(e) => t.oracle_error(ClaimId::InsertionWorseOff, g, &p, e),
            }
        }
        if oracles.engine.matching(g, &rv, &[])?.mate(u).is_none() {
            continue;
        }
        match oracles.check_monotonicity(g, &rv, u) {
            Ok(r) => {
                for o in &r.observations {
                    t.observe(o.clone());
                }
                t.merge_report(r);
            }
            Err(e) => t.oracle_error(ClaimId::MonotonicityNoBackup, g, &p, e),
        }
        t.checked(ClaimId::EquivalenceClassInterval, 1);
        if let Err(e) = oracles.enumerate_equivalence_class(g, &rv, u) {
            t.oracle_error(ClaimId::EquivalenceClassInterval, g, &p, e);
        }
    }
    Ok(())
}

fn audit_checks(g: &Graph, u: Vertex, u_star: Vertex, cfg: &SweepConfig, tables: &[PriceTable], t: &mut Tally) -> Result<()> {
    let exhaustive = cfg.exhaustive && g.vertex_count() <= cfg.exhaustive_limit;
    let budget = AuditBudget {
        max_vectors: if exhaustive { cfg.vector_budget } else { cfg.samples as u128 },
        seed: cfg.seed,
    };
    for f in tables {
        let report = audit_h_bounds(g, u, u_star, f, f.k(), budget)?;
        for c in [ClaimId::HBound, ClaimId::GainSum, ClaimId::GainMonotonicity] {
            t.checked(c, report.runs);
        }
        report.violations.into_iter().for_each(|v| t.fail(v));
    }
    Ok(())
}

fn run_instance(
    index: usize,
    entry: &CorpusEntry,
    cfg: &SweepConfig,
    tables: &[PriceTable],
) -> Result<(InstanceSummary, Tally)> {
    let g = &entry.graph;
    let oracles = Oracles::new(cfg.engine);
    let mut rng = instance_rng(cfg.seed, index);
    let mut t = Tally::default();
    let (orders, exhaustive) = orders_for(g, cfg, &mut rng)?;
    for p in &orders {
        order_checks(g, p, &oracles, &mut t)?;
    }
    let m_star = g.designated_matching().expect("corpus entries carry M*").clone();
    for (a, b) in m_star.edges() {
        for (u, u_star) in [(a, b), (b, a)] {
            pair_checks(g, u, u_star, cfg, &oracles, &mut rng, &mut t)?;
            if cfg.h_audits {
                audit_checks(g, u, u_star, cfg, tables, &mut t)?;
            }
        }
    }
    let summary = InstanceSummary {
        name: entry.name.clone(),
        vertices: g.vertex_count(),
        edges: g.edge_count(),
        orders: orders.len(),
        exhaustive,
        violations: t.violation_count,
    };
    Ok((summary, t))
}

fn describe(selector: &CorpusSelector, max_n: usize) -> String {
    match selector {
        CorpusSelector::Default => format!(
            "connected graphs n<={max_n}, P4, C6, K4, appendix, {RANDOM_CORPUS_GRAPHS} random planted-matching graphs on {RANDOM_CORPUS_VERTICES} vertices"
        ),
        CorpusSelector::Small => format!("connected graphs n<={max_n}, appendix"),
        CorpusSelector::Appendix => "appendix".into(),
        CorpusSelector::Custom(list) => format!("{} custom graphs", list.len()),
    }
}

/// Runs the sweep; violations are the payload, errors are operational.
pub fn lemma_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    if cfg.k == 0 {
        return Err(ForgeError::InvalidParameter("k must be ≥ 1".into()));
    }
    let start = Instant::now();
    let corpus = build_corpus(&cfg.corpus, cfg.max_n, cfg.seed)?;
    let tables = if cfg.price_tables.is_empty() {
        vec![PriceTable::random_monotone(cfg.k, cfg.seed)?]
    } else {
        cfg.price_tables.clone()
    };
    let results = corpus
        .par_iter()
        .enumerate()
        .map(|(i, e)| run_instance(i, e, cfg, &tables))
        .collect::<Result<Vec<_>>>()?;

    let mut claims = BTreeMap::new();
    let mut instances = Vec::new();
    let mut violations = Vec::new();
    let mut observations = Vec::new();
    let (mut violation_count, mut backup_matched) = (0, 0);
    for (summary, t) in results {
        for (c, n) in t.claims {
            *claims.entry(c.name().to_string()).or_default() += n;
        }
        violation_count += t.violation_count;
        backup_matched += t.backup_matched;
        for v in t.violations {
            if violations.len() < KEPT_VIOLATIONS {
                violations.push(v);
            }
        }
        for o in t.observations {
            if observations.len() < KEPT_OBSERVATIONS {
                observations.push(format!("{}: {o}", summary.name));
            }
        }
        instances.push(summary);
    }
    Ok(SweepReport {
        corpus: describe(&cfg.corpus, cfg.max_n),
        k: cfg.k,
        seed: cfg.seed,
        exhaustive: cfg.exhaustive,
        engine_mutated: cfg.engine.is_mutated(),
        instances,
        claims_checked: claims,
        violation_count,
        violations,
        backup_matched_observed: backup_matched,
        observations,
        wall_secs: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(max_n: usize) -> SweepConfig {
        SweepConfig {
            max_n,
            corpus: CorpusSelector::Small,
            exhaustive: true,
            ..SweepConfig::default()
        }
    }

    #[test]
    fn corpus_sizes() {
        // connected graphs up to isomorphism: 1, 1, 2, 6, 21
        let c = build_corpus(&CorpusSelector::Default, 5, 0).unwrap();
        assert_eq!(c.len(), 31 + 4 + 20);
        assert!(c.iter().all(|e| e.graph.designated_matching().is_some()));
        let pm = random_corpus(3).unwrap();
        assert!(pm.iter().all(|e| e.graph.designated_matching().unwrap().size() == 4));
        assert!(build_corpus(&CorpusSelector::Small, 0, 0).is_err());
    }

    #[test]
    fn exhaustive_small_sweep_is_clean() {
        let r = lemma_sweep(&small(4)).unwrap();
        assert!(r.passed(), "{:?}", r.violations.first());
        for claim in ["views-agree", "alternating-path-shape", "insertion-u-worse-off", "equivalence-class-interval", "coloring-marginal", "h-bound", "gain-sum"] {
            assert!(r.claims_checked.get(claim).copied().unwrap_or(0) > 0, "{claim} never checked");
        }
        assert!(r.instances.iter().all(|i| i.exhaustive));
    }

    #[test]
    fn appendix_shows_a_matched_backup() {
        let cfg = SweepConfig {
            corpus: CorpusSelector::Appendix,
            exhaustive: true,
            ..SweepConfig::default()
        };
        let r = lemma_sweep(&cfg).unwrap();
        assert!(r.passed());
        assert!(r.backup_matched_observed > 0);
    }

    #[test]
    fn mutated_engine_is_caught() {
        let cfg = SweepConfig {
            engine: Engine::MUTATED,
            ..small(4)
        };
        let r = lemma_sweep(&cfg).unwrap();
        assert!(r.violation_count > 0);
        assert!(r.engine_mutated);
    }

    #[test]
    fn sweep_is_deterministic() {
        let cfg = SweepConfig {
            corpus: CorpusSelector::Custom(random_corpus(5).unwrap().into_iter().take(2).collect()),
            samples: 20,
            seed: 5,
            ..SweepConfig::default()
        };
        let a = lemma_sweep(&cfg).unwrap();
        let b = lemma_sweep(&cfg).unwrap();
        assert_eq!(a.claims_checked, b.claims_checked);
        assert_eq!(a.violation_count, 0);
        assert_eq!(a.instances, b.instances);
    }
}
