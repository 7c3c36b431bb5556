//! Price tables, gain sharing along a two-partitioning, and the pointwise
//! lower-bound functions h⊥, h_s, h_b together with their u*-averages.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::graph::{Graph, Matching, Vertex};
use crate::oracles::{two_coloring, ClaimId, ClassLabel, Color, Coloring, Oracles, Profile, Violation};
use crate::rank::{for_each_rank_vector, rank_vector_count, BucketedRankVector};

/// Slack allowed between an h bound and the realized gain (floating sums).
pub const H_BOUND_SLACK: f64 = 1e-12;

/// Monotone price function f on {1..k+1}², stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PriceTable {
    k: u32,
    values: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MonotonicityKind {
    /// f(i, j) < f(i+1, j)
    BuyerIncrease,
    /// f(i, j) > f(i, j+1)
    ItemDecrease,
    OutOfRange,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MonotonicityViolation {
    pub kind: MonotonicityKind,
    pub buyer: u32,
    pub item: u32,
}

#[derive(Serialize, Deserialize)]
struct PriceTableJson {
    k: u32,
    values: Vec<Vec<f64>>,
}

impl PriceTable {
    /// Accepts a (k+1)×(k+1) or k×k table; the latter is padded with column
    /// k+1 = 1 and row k+1 = 0. Monotonicity is checked.
    pub fn from_rows(k: u32, rows: &[Vec<f64>]) -> Result<Self> {
        let t = PriceTable::from_rows_unchecked(k, rows)?;
        t.validate()?;
        Ok(t)
    }

    /// As `from_rows` but without the monotonicity check.
    pub fn from_rows_unchecked(k: u32, rows: &[Vec<f64>]) -> Result<Self> {
        if k == 0 {
            return Err(Error::PriceTable("k must be ≥ 1".into()));
        }
        let side = k as usize + 1;
        let square = |n: usize| rows.len() == n && rows.iter().all(|r| r.len() == n);
        let mut values = vec![0.0; side * side];
        if square(side) {
            for (i, row) in rows.iter().enumerate() {
                values[i * side..(i + 1) * side].copy_from_slice(row);
            }
        } else if square(side - 1) {
            for (i, row) in rows.iter().enumerate() {
                values[i * side..i * side + side - 1].copy_from_slice(row);
                values[i * side + side - 1] = 1.0;
            }
        } else {
            return Err(Error::PriceTable(format!(
                "expected a {k}×{k} or {side}×{side} table"
            )));
        }
        Ok(PriceTable { k, values })
    }

    /// f ≡ c on {1..k}², padded.
    pub fn constant(k: u32, c: f64) -> Result<Self> {
        let rows = vec![vec![c; k as usize]; k as usize];
        PriceTable::from_rows(k, &rows)
    }

    /// A uniformly drawn monotone k×k table, padded.
    pub fn random_monotone(k: u32, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = k as usize;
        let mut rows = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let lo = if j > 0 { rows[i][j - 1] } else { 0.0 };
                let hi = if i > 0 { rows[i - 1][j] } else { 1.0 };
                rows[i][j] = lo + (hi - lo) * rng.random::<f64>();
            }
        }
        PriceTable::from_rows(k, &rows)
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    fn side(&self) -> usize {
        self.k as usize + 1
    }

    /// f(buyer bucket, item bucket), both in 1..=k+1.
    pub fn get(&self, buyer: u32, item: u32) -> f64 {
        let s = self.side();
        self.values[(buyer as usize - 1) * s + item as usize - 1]
    }

    pub fn try_get(&self, buyer: u32, item: u32) -> Result<f64> {
        for b in [buyer, item] {
            if b == 0 || b > self.k + 1 {
                return Err(Error::BucketRange {
                    bucket: b,
                    max: self.k + 1,
                });
            }
        }
        Ok(self.get(buyer, item))
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.side()).map(<[f64]>::to_vec).collect()
    }

    pub fn monotonicity_violations(&self) -> Vec<MonotonicityViolation> {
        let top = self.k + 1;
        let mut out = Vec::new();
        for i in 1..=top {
            for j in 1..=top {
                let here = self.get(i, j);
                if !(0.0..=1.0).contains(&here) {
                    out.push(MonotonicityViolation {
                        kind: MonotonicityKind::OutOfRange,
                        buyer: i,
                        item: j,
                    });
                }
                if i < top && here < self.get(i + 1, j) {
                    out.push(MonotonicityViolation {
                        kind: MonotonicityKind::BuyerIncrease,
                        buyer: i,
                        item: j,
                    });
                }
                if j < top && here > self.get(i, j + 1) {
                    out.push(MonotonicityViolation {
                        kind: MonotonicityKind::ItemDecrease,
                        buyer: i,
                        item: j,
                    });
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let bad = self.monotonicity_violations();
        if bad.is_empty() {
            return Ok(());
        }
        let listed: Vec<String> = bad
            .iter()
            .map(|v| format!("{:?} at f({}, {})", v.kind, v.buyer, v.item))
            .collect();
        Err(Error::PriceTable(listed.join("; ")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&PriceTableJson {
            k: self.k,
            values: self.rows(),
        })
        .expect("price table serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: PriceTableJson =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        PriceTable::from_rows(doc.k, &doc.values)
    }

    pub fn from_json_unchecked(text: &str) -> Result<Self> {
        let doc: PriceTableJson =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        PriceTable::from_rows_unchecked(doc.k, &doc.values)
    }
}

/// Per-vertex gains; unmatched vertices get 0.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GainAssignment {
    pub gains: Vec<f64>,
}

impl GainAssignment {
    pub fn total(&self) -> f64 {
        self.gains.iter().sum()
    }

    pub fn gain(&self, v: Vertex) -> f64 {
        self.gains[v]
    }
}

/// Splits every matched edge: the item gets f(x_buyer, x_item), the buyer the rest.
pub fn share_gains(
    g: &Graph,
    order: &BucketedRankVector,
    coloring: &Coloring,
    f: &PriceTable,
) -> Result<GainAssignment> {
    let r = Engine::FAITHFUL.matching(g, order, &[])?;
    gains_for_matching(&r, order, coloring, f)
}

pub fn gains_for_matching(
    r: &Matching,
    order: &BucketedRankVector,
    coloring: &Coloring,
    f: &PriceTable,
) -> Result<GainAssignment> {
    let mut gains = vec![0.0; r.vertex_count()];
    for (a, b) in r.edges() {
        let (buyer, item) = match (coloring.color(a), coloring.color(b)) {
            (Color::Buyer, Color::Item) => (a, b),
            (Color::Item, Color::Buyer) => (b, a),
            _ => {
                return Err(Error::Coloring(format!(
                    "matched edge ({a}, {b}) is monochromatic"
                )))
            }
        };
        let bucket = |v: Vertex| order.bucket(v).ok_or(Error::NotInDomain(v));
        let price = f.try_get(bucket(buyer)?, bucket(item)?)?;
        gains[item] = price;
        gains[buyer] = 1.0 - price;
    }
    Ok(GainAssignment { gains })
}

/// One ±f(buyer, item) term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Term {
    pub sign: i32,
    pub buyer: u32,
    pub item: u32,
}

/// constant + Σ sign·f(buyer, item) with at most two terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Affine {
    pub constant: i32,
    terms: [Term; 2],
    len: u8,
}

impl Affine {
    fn f(buyer: u32, item: u32) -> Self {
        Affine {
            constant: 0,
            terms: [Term { sign: 1, buyer, item }; 2],
            len: 1,
        }
    }

    /// 1 − f(buyer, item)
    fn one_minus(buyer: u32, item: u32) -> Self {
        Affine {
            constant: 1,
            terms: [Term { sign: -1, buyer, item }; 2],
            len: 1,
        }
    }

    fn plus(mut self, buyer: u32, item: u32) -> Self {
        self.terms[self.len as usize] = Term { sign: 1, buyer, item };
        self.len += 1;
        self
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms[..self.len as usize]
    }

    pub fn eval(&self, f: &PriceTable) -> f64 {
        self.terms()
            .iter()
            .fold(self.constant as f64, |acc, t| acc + t.sign as f64 * f.get(t.buyer, t.item))
    }
}

/// A case-table value: either affine in f or the minimum of two affine forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HExpr {
    Affine(Affine),
    Min(Affine, Affine),
}

impl HExpr {
    pub fn eval(&self, f: &PriceTable) -> f64 {
        match self {
            HExpr::Affine(a) => a.eval(f),
            HExpr::Min(a, b) => a.eval(f).min(b.eval(f)),
        }
    }

    pub fn is_min(&self) -> bool {
        matches!(self, HExpr::Min(..))
    }
}

/// Unmatched u: h⊥(x_u, x_u*) = f(x_u, x_u*).
pub fn h_unmatched_expr(x_u: u32, x_ustar: u32) -> HExpr {
    HExpr::Affine(Affine::f(x_u, x_ustar))
}

/// Matched u without backup.
pub fn h_no_backup_expr(x_u: u32, x_v: u32, x_ustar: u32) -> HExpr {
    if x_u < x_v {
        if x_ustar <= x_u {
            HExpr::Affine(Affine::f(x_u, x_ustar))
        } else if x_ustar < x_v {
            HExpr::Affine(Affine::one_minus(x_u, x_v).plus(x_u, x_ustar))
        } else {
            HExpr::Affine(Affine::one_minus(x_u, x_v))
        }
    } else if x_ustar < x_v {
        HExpr::Min(
            Affine::f(x_v, x_ustar),
            Affine::one_minus(x_u, x_v).plus(x_u, x_ustar),
        )
    } else if x_ustar <= x_u {
        HExpr::Min(Affine::f(x_v, x_ustar), Affine::one_minus(x_u, x_v))
    } else {
        HExpr::Affine(Affine::one_minus(x_u, x_v))
    }
}

/// Matched u with backup in bucket `x_b` (which may be k+1).
pub fn h_with_backup_expr(x_u: u32, x_v: u32, x_b: u32, x_ustar: u32) -> HExpr {
    if x_u < x_v {
        if x_ustar <= x_u {
            HExpr::Affine(Affine::one_minus(x_u, x_b).plus(x_u, x_ustar))
        } else if x_ustar < x_v {
            HExpr::Affine(Affine::one_minus(x_u, x_v).plus(x_u, x_ustar))
        } else {
            HExpr::Affine(Affine::one_minus(x_u, x_v))
        }
    } else if x_ustar < x_v {
        HExpr::Min(
            Affine::one_minus(x_u, x_b).plus(x_v, x_ustar),
            Affine::one_minus(x_u, x_v).plus(x_u, x_ustar),
        )
    } else if x_ustar <= x_u {
        HExpr::Min(
            Affine::one_minus(x_u, x_b).plus(x_v, x_ustar),
            Affine::one_minus(x_u, x_v),
        )
    } else {
        HExpr::Affine(Affine::one_minus(x_u, x_v))
    }
}

fn check_bucket(bucket: u32, max: u32) -> Result<()> {
    if bucket == 0 || bucket > max {
        return Err(Error::BucketRange { bucket, max });
    }
    Ok(())
}

/// Case-table expression for a profile, validating the ⊥ pattern.
pub fn h_expr(
    label: ClassLabel,
    k: u32,
    x_u: u32,
    x_v: Option<u32>,
    x_b: Option<u32>,
    x_ustar: u32,
) -> Result<HExpr> {
    check_bucket(x_u, k)?;
    check_bucket(x_ustar, k)?;
    match (label, x_v, x_b) {
        (ClassLabel::Unmatched, None, None) => Ok(h_unmatched_expr(x_u, x_ustar)),
        (ClassLabel::NoBackup, Some(x_v), None) => {
            check_bucket(x_v, k)?;
            Ok(h_no_backup_expr(x_u, x_v, x_ustar))
        }
        (ClassLabel::WithBackup, Some(x_v), Some(x_b)) => {
            check_bucket(x_v, k)?;
            check_bucket(x_b, k + 1)?;
            Ok(h_with_backup_expr(x_u, x_v, x_b, x_ustar))
        }
        _ => Err(Error::Precondition(format!(
            "profile pattern ({x_u}, {x_v:?}, {x_b:?}) does not fit label {label}"
        ))),
    }
}

pub fn h_value(
    label: ClassLabel,
    f: &PriceTable,
    x_u: u32,
    x_v: Option<u32>,
    x_b: Option<u32>,
    x_ustar: u32,
) -> Result<f64> {
    Ok(h_expr(label, f.k(), x_u, x_v, x_b, x_ustar)?.eval(f))
}

/// (1/k) Σ over x_u* of h.
pub fn big_h_value(
    label: ClassLabel,
    f: &PriceTable,
    x_u: u32,
    x_v: Option<u32>,
    x_b: Option<u32>,
) -> Result<f64> {
    let k = f.k();
    let mut sum = 0.0;
    for x_ustar in 1..=k {
        sum += h_value(label, f, x_u, x_v, x_b, x_ustar)?;
    }
    Ok(sum / k as f64)
}

pub fn h_for_profile(f: &PriceTable, profile: &Profile, x_ustar: u32) -> Result<f64> {
    h_value(profile.label(), f, profile.x_u, profile.x_v, profile.x_b, x_ustar)
}

/// How many vectors an audit may enumerate before it falls back to sampling.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AuditBudget {
    pub max_vectors: u128,
    pub seed: u64,
}

impl Default for AuditBudget {
    fn default() -> Self {
        AuditBudget {
            max_vectors: 200_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct AuditReport {
    pub vectors: usize,
    pub runs: usize,
    pub exhaustive: bool,
    pub violations: Vec<Violation>,
}

/// Checks h(profile, x_u*) ≤ g(u) + g(u*) for every vector over V − u* and
/// every insertion point of u*, with u forced to be the buyer.
pub fn audit_h_bounds(
    g: &Graph,
    u: Vertex,
    u_star: Vertex,
    f: &PriceTable,
    k: u32,
    budget: AuditBudget,
) -> Result<AuditReport> {
    let m_star = g
        .designated_matching()
        .ok_or_else(|| Error::Precondition("graph has no designated matching M*".into()))?;
    if !m_star.contains(u, u_star) {
        return Err(Error::Precondition(format!(
            "({u}, {u_star}) is not an M* pair"
        )));
    }
    if f.k() != k {
        return Err(Error::PriceTable(format!(
            "table has k = {}, audit uses k = {k}",
            f.k()
        )));
    }
    let others: Vec<Vertex> = g.vertices().filter(|&v| v != u_star).collect();
    let n = g.vertex_count();
    let exhaustive = rank_vector_count(others.len(), k) <= budget.max_vectors;
    let mut report = AuditReport {
        exhaustive,
        ..AuditReport::default()
    };
    let mut first_error = None;
    let mut visit = |rv: &BucketedRankVector| {
        if first_error.is_some() {
            return;
        }
        if let Err(e) = audit_vector(g, m_star, u, u_star, f, rv, &mut report) {
            first_error = Some(e);
        }
    };
    if exhaustive {
        for_each_rank_vector(&others, n, k, u128::MAX, |rv, _| visit(rv))?;
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
        for _ in 0..budget.max_vectors {
            let rv = BucketedRankVector::sample_with(&others, n, k, &mut rng)?;
            visit(&rv);
        }
    }
    match first_error {
        Some(e) => Err(e),
        None => Ok(report),
    }
}

fn audit_vector(
    g: &Graph,
    m_star: &Matching,
    u: Vertex,
    u_star: Vertex,
    f: &PriceTable,
    rv_minus: &BucketedRankVector,
    report: &mut AuditReport,
) -> Result<()> {
    let (profile, _) = Oracles::default().compute_profile(g, rv_minus, u)?;
    report.vectors += 1;
    for target in rv_minus.targets(u_star)? {
        let sigma = rv_minus.move_vertex(u_star, target)?;
        let p = sigma.induced_permutation();
        let r = Engine::FAITHFUL.matching(g, &p, &[])?;
        let mut coloring = two_coloring(g, &r, m_star, false)?;
        if coloring.color(u) != Color::Buyer {
            coloring = coloring.complement();
        }
        let gains = gains_for_matching(&r, &sigma, &coloring, f)?;
        report.runs += 1;
        let witness = |claim, detail: String| {
            Violation::new(claim, g, &p, format!("u={u}, u*={u_star}: {detail}")).with_ranks(&sigma)
        };

        let bound = h_for_profile(f, &profile, target.bucket)?;
        let realized = gains.gain(u) + gains.gain(u_star);
        if bound > realized + H_BOUND_SLACK {
            report.violations.push(witness(
                ClaimId::HBound,
                format!(
                    "profile {:?}, x_u*={}: h = {bound:.6} > g(u)+g(u*) = {realized:.6}",
                    profile, target.bucket
                ),
            ));
        }
        let total = gains.total();
        if (total - r.size() as f64).abs() > 1e-9 {
            report.violations.push(witness(
                ClaimId::GainSum,
                format!("Σ gains = {total}, |R| = {}", r.size()),
            ));
        }
        for (a, b) in r.edges() {
            let (buyer, item) = if coloring.color(a) == Color::Buyer {
                (a, b)
            } else {
                (b, a)
            };
            let (xb, xi) = (sigma.bucket(buyer).unwrap(), sigma.bucket(item).unwrap());
            let top = f.k() + 1;
            let buyer_ok = (xi..=top).all(|i| gains.gain(buyer) >= 1.0 - f.get(xb, i));
            let item_ok = (xb..=top).all(|i| gains.gain(item) >= f.get(i, xi));
            if !(buyer_ok && item_ok) {
                report.violations.push(witness(
                    ClaimId::GainMonotonicity,
                    format!("edge buyer {buyer} / item {item} breaks gain monotonicity"),
                ));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{appendix::*, appendix_counterexample};
    use crate::rank::Rank;

    fn k3() -> PriceTable {
        PriceTable::from_rows(
            3,
            &[
                vec![0.469, 0.563, 0.563],
                vec![0.469, 0.5, 0.5],
                vec![0.469, 0.5, 0.5],
            ],
        )
        .unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn padding() {
        let f = k3();
        assert_eq!(f.rows().len(), 4);
        assert!(close(f.get(1, 4), 1.0));
        assert!(close(f.get(4, 1), 0.0));
        assert!(close(f.get(4, 4), 0.0));
        assert!(f.monotonicity_violations().is_empty());
        assert!(PriceTable::from_rows(3, &[vec![0.5; 2], vec![0.5; 2]]).is_err());
    }

    #[test]
    fn corrupted_tables_are_reported() {
        let bad = PriceTable::from_rows_unchecked(2, &[vec![0.7, 0.8], vec![0.8, 0.9]]).unwrap();
        let v = bad.monotonicity_violations();
        assert!(v.iter().any(|m| m.kind == MonotonicityKind::BuyerIncrease && (m.buyer, m.item) == (1, 1)));
        assert!(PriceTable::from_rows(2, &[vec![0.7, 0.8], vec![0.8, 0.9]]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let f = k3();
        assert_eq!(PriceTable::from_json(&f.to_json()).unwrap(), f);
        let small = PriceTable::from_json(r#"{"k":1,"values":[[0.5]]}"#).unwrap();
        assert!(close(small.get(1, 1), 0.5));
    }

    #[test]
    fn random_tables_are_monotone() {
        for seed in 0..50 {
            for k in 1..6 {
                PriceTable::random_monotone(k, seed).unwrap().validate().unwrap();
            }
        }
    }

    #[test]
    fn h_examples() {
        let f = k3();
        assert!(close(h_value(ClassLabel::Unmatched, &f, 1, None, None, 1).unwrap(), 0.469));
        assert!(close(h_value(ClassLabel::NoBackup, &f, 1, Some(2), None, 3).unwrap(), 0.437));
        assert!(close(
            h_value(ClassLabel::WithBackup, &f, 2, Some(1), Some(3), 2).unwrap(),
            0.531
        ));
        let hb = big_h_value(ClassLabel::Unmatched, &f, 1, None, None).unwrap();
        assert!((hb - 0.531_666_666).abs() < 1e-6);
        assert!(h_value(ClassLabel::NoBackup, &f, 1, None, None, 1).is_err());
        assert!(h_value(ClassLabel::Unmatched, &f, 4, None, None, 1).is_err());
        assert!(h_value(ClassLabel::WithBackup, &f, 1, Some(1), Some(4), 1).is_ok());
    }

    #[test]
    fn constant_table_h_unmatched_is_constant() {
        let f = PriceTable::constant(4, 0.37).unwrap();
        for x_u in 1..=4 {
            let h = big_h_value(ClassLabel::Unmatched, &f, x_u, None, None).unwrap();
            assert!(close(h, 0.37));
        }
    }

    #[test]
    fn gain_examples() {
        let g = Graph::new(2, &[(0, 1)]).unwrap();
        let order = BucketedRankVector::from_ranks(3, 2, [(0, Rank::new(1, 1)), (1, Rank::new(2, 1))]).unwrap();
        let r = Engine::FAITHFUL.matching(&g, &order, &[]).unwrap();
        let c = two_coloring(&g, &r, &r, false).unwrap();
        let gains = share_gains(&g, &order, &c, &k3()).unwrap();
        assert!(close(gains.gain(1), 0.563));
        assert!(close(gains.gain(0), 0.437));
        assert!(close(gains.total(), 1.0));

        let iso = Graph::new(2, &[]).unwrap();
        let e = Matching::empty(2);
        let c = two_coloring(&iso, &e, &e, false).unwrap();
        let gains = share_gains(&iso, &order, &c, &k3()).unwrap();
        assert_eq!(gains.gains, vec![0.0, 0.0]);
    }

    #[test]
    fn audit_k2_plus_pendant() {
        // u=0, u*=1, pendant w=2 on u
        let g = Graph::new(3, &[(0, 1), (0, 2)])
            .unwrap()
            .with_perfect_matching(Matching::from_edges(3, &[(0, 1)]).unwrap())
            .unwrap();
        let f = PriceTable::random_monotone(2, 5).unwrap();
        let r = audit_h_bounds(&g, 0, 1, &f, 2, AuditBudget::default()).unwrap();
        assert!(r.exhaustive && r.runs > 0);
        assert!(r.violations.is_empty(), "{}", r.violations[0]);
    }

    #[test]
    fn audit_appendix_graph_k5() {
        let u_star = 5;
        let g = appendix_counterexample()
            .unwrap()
            .extended(1, &[(U, u_star)])
            .unwrap()
            .with_perfect_matching(Matching::from_edges(6, &[(U, u_star), (U1, V1)]).unwrap())
            .unwrap();
        for seed in 0..3 {
            let f = PriceTable::random_monotone(5, seed).unwrap();
            let r = audit_h_bounds(&g, U, u_star, &f, 5, AuditBudget::default()).unwrap();
            assert!(r.exhaustive);
            assert!(r.violations.is_empty(), "{}", r.violations[0]);
        }
    }

    #[test]
    fn audit_detects_corrupted_table() {
        let g = Graph::new(3, &[(0, 1), (0, 2)])
            .unwrap()
            .with_perfect_matching(Matching::from_edges(3, &[(0, 1)]).unwrap())
            .unwrap();
        let bad = PriceTable::from_rows_unchecked(2, &[vec![0.9, 0.1], vec![0.0, 0.95]]).unwrap();
        let r = audit_h_bounds(&g, 0, 1, &bad, 2, AuditBudget::default()).unwrap();
        assert!(!r.violations.is_empty());
    }

    #[test]
    fn audit_requires_mstar_pair() {
        let g = Graph::new(3, &[(0, 1), (0, 2)])
            .unwrap()
            .with_perfect_matching(Matching::from_edges(3, &[(0, 2)]).unwrap())
            .unwrap();
        let f = PriceTable::constant(2, 0.5).unwrap();
        assert!(matches!(
            audit_h_bounds(&g, 0, 1, &f, 2, AuditBudget::default()),
            Err(Error::Precondition(_))
        ));
    }
}
