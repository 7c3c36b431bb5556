//! Row generation for the three formulations and in-memory assembly.

use num_traits::{One, Zero};
use rayon::prelude::*;

use ranking_core::gain::{h_no_backup_expr, h_unmatched_expr, h_with_backup_expr, Affine, HExpr};

use crate::error::{LpError, Result};
use crate::model::{Branch, ColKey, Coef, Formulation, LpModel, Row, RowKey, Sense};

/// Reusable accumulator for one row: entries may repeat until `finish`.
#[derive(Default)]
pub(crate) struct RowAcc {
    entries: Vec<(ColKey, Coef)>,
    rhs: Coef,
}

impl RowAcc {
    fn reset(&mut self) {
        self.entries.clear();
        self.rhs = Coef::zero();
    }

    fn add(&mut self, key: ColKey, c: Coef) {
        self.entries.push((key, c));
    }

    /// Adds −weight·h to the left side. `var` is the column standing for h
    /// when h is a variable in this formulation.
    fn subtract_h(&mut self, expr: &HExpr, weight: Coef, var: Option<ColKey>) {
        match (var, expr) {
            (Some(key), _) => self.add(key, -weight),
            (None, HExpr::Affine(a)) => self.subtract_affine(a, weight),
            (None, HExpr::Min(..)) => unreachable!("min-terms are always variables"),
        }
    }

    fn subtract_affine(&mut self, a: &Affine, weight: Coef) {
        self.rhs += weight * Coef::from(a.constant as i64);
        for t in a.terms() {
            self.add(
                ColKey::F {
                    buyer: t.buyer,
                    item: t.item,
                },
                -weight * Coef::from(t.sign as i64),
            );
        }
    }

    /// Sorts by key, merges duplicates and drops zeros.
    fn finish(&mut self) {
        self.entries.sort_unstable_by_key(|e| e.0);
        let mut out = 0;
        for idx in 0..self.entries.len() {
            let (key, c) = self.entries[idx];
            if out > 0 && self.entries[out - 1].0 == key {
                self.entries[out - 1].1 += c;
            } else {
                self.entries[out] = (key, c);
                out += 1;
            }
        }
        self.entries.truncate(out);
        self.entries.retain(|e| !e.1.is_zero());
    }
}

/// Receives rows in canonical order.
pub(crate) trait RowSink {
    fn row(&mut self, key: RowKey, sense: Sense, rhs: &Coef, entries: &[(ColKey, Coef)]);
}

impl<F: FnMut(RowKey, Sense, &Coef, &[(ColKey, Coef)])> RowSink for F {
    fn row(&mut self, key: RowKey, sense: Sense, rhs: &Coef, entries: &[(ColKey, Coef)]) {
        self(key, sense, rhs, entries)
    }
}

fn emit(sink: &mut impl RowSink, acc: &mut RowAcc, key: RowKey, sense: Sense) {
    acc.finish();
    sink.row(key, sense, &acc.rhs, &acc.entries);
}

fn f(buyer: u32, item: u32) -> ColKey {
    ColKey::F { buyer, item }
}

fn ratio(n: i64, d: i64) -> Coef {
    Coef::new(n, d)
}

pub(crate) fn mono_rows(k: u32, sink: &mut impl RowSink) {
    let mut acc = RowAcc::default();
    for i in 1..=k {
        for j in 1..=k + 1 {
            acc.reset();
            acc.add(f(i + 1, j), Coef::one());
            acc.add(f(i, j), -Coef::one());
            emit(sink, &mut acc, RowKey::MonoBuyer { i, j }, Sense::Le);
        }
    }
    for i in 1..=k + 1 {
        for j in 1..=k {
            acc.reset();
            acc.add(f(i, j), Coef::one());
            acc.add(f(i, j + 1), -Coef::one());
            emit(sink, &mut acc, RowKey::MonoItem { i, j }, Sense::Le);
        }
    }
}

/// h ≤ branch rows for one h variable.
fn branch_rows(
    sink: &mut impl RowSink,
    acc: &mut RowAcc,
    var: ColKey,
    expr: &HExpr,
    key: impl Fn(Branch) -> RowKey,
) {
    let branches: Vec<(Branch, &Affine)> = match expr {
        HExpr::Affine(a) => vec![(Branch::Only, a)],
        HExpr::Min(a, b) => vec![(Branch::First, a), (Branch::Second, b)],
    };
    for (branch, a) in branches {
        acc.reset();
        acc.add(var, Coef::one());
        acc.subtract_affine(a, Coef::one());
        emit(sink, acc, key(branch), Sense::Le);
    }
}

fn needs_var(form: Formulation, expr: &HExpr) -> bool {
    form == Formulation::Naive || expr.is_min()
}

/// All rows whose α-bucket is `x_u`, in canonical order.
pub(crate) fn block_rows(k: u32, form: Formulation, x_u: u32, sink: &mut impl RowSink) {
    let mut acc = RowAcc::default();
    let inv_k = ratio(1, k as i64);
    let alpha_i = ColKey::AlphaBucket(x_u);
    let naive = form == Formulation::Naive;
    let aggregated = form == Formulation::Aggregated;

    if naive {
        for x_ustar in 1..=k {
            let var = ColKey::HUnmatched { x_u, x_ustar };
            let expr = h_unmatched_expr(x_u, x_ustar);
            branch_rows(sink, &mut acc, var, &expr, |_| RowKey::HUnmatched { x_u, x_ustar });
        }
    }
    acc.reset();
    acc.add(alpha_i, Coef::one());
    for x_ustar in 1..=k {
        let var = naive.then_some(ColKey::HUnmatched { x_u, x_ustar });
        acc.subtract_h(&h_unmatched_expr(x_u, x_ustar), inv_k, var);
    }
    emit(sink, &mut acc, RowKey::BoundUnmatched { x_u }, Sense::Le);

    let s_var = |x_v: u32, x_ustar: u32| {
        let e = h_no_backup_expr(x_u, x_v, x_ustar);
        let var = needs_var(form, &e).then_some(ColKey::HNoBackup { x_u, x_v, x_ustar });
        (e, var)
    };
    let b_var = |x_v: u32, x_b: u32, x_ustar: u32| {
        let e = h_with_backup_expr(x_u, x_v, x_b, x_ustar);
        let var = needs_var(form, &e).then_some(ColKey::HWithBackup {
            x_u,
            x_v,
            x_b,
            x_ustar,
        });
        (e, var)
    };

    for x_v in 1..=k {
        for x_ustar in 1..=k {
            if let (e, Some(var)) = s_var(x_v, x_ustar) {
                branch_rows(sink, &mut acc, var, &e, |branch| RowKey::HNoBackup {
                    x_u,
                    x_v,
                    x_ustar,
                    branch,
                });
            }
        }
        if aggregated {
            acc.reset();
            acc.add(ColKey::AvgNoBackup { x_u, x_v }, Coef::one());
            for x_ustar in 1..=k {
                let (e, var) = s_var(x_v, x_ustar);
                acc.subtract_h(&e, inv_k, var);
            }
            emit(sink, &mut acc, RowKey::DefNoBackup { x_u, x_v }, Sense::Eq);
        }
    }
    for x_v in 1..=k {
        for x_b in x_v + 1..=k + 1 {
            for x_ustar in 1..=k {
                if let (e, Some(var)) = b_var(x_v, x_b, x_ustar) {
                    branch_rows(sink, &mut acc, var, &e, |branch| RowKey::HWithBackup {
                        x_u,
                        x_v,
                        x_b,
                        x_ustar,
                        branch,
                    });
                }
            }
            if aggregated {
                acc.reset();
                acc.add(ColKey::AvgWithBackup { x_u, x_v, x_b }, Coef::one());
                for x_ustar in 1..=k {
                    let (e, var) = b_var(x_v, x_b, x_ustar);
                    acc.subtract_h(&e, inv_k, var);
                }
                emit(sink, &mut acc, RowKey::DefWithBackup { x_u, x_v, x_b }, Sense::Eq);
            }
        }
    }

    for c in 1..=k {
        acc.reset();
        acc.add(alpha_i, Coef::one());
        let w = ratio(1, (k - c + 1) as i64);
        for x_v in c..=k {
            if aggregated {
                acc.add(ColKey::AvgNoBackup { x_u, x_v }, -w);
            } else {
                for x_ustar in 1..=k {
                    let (e, var) = s_var(x_v, x_ustar);
                    acc.subtract_h(&e, w * inv_k, var);
                }
            }
        }
        emit(sink, &mut acc, RowKey::BoundNoBackup { x_u, c }, Sense::Le);
    }
    for c in 1..=k {
        for d in c..=k {
            acc.reset();
            acc.add(alpha_i, Coef::one());
            let w = ratio(1, (d - c + 1) as i64);
            let x_b = d + 1;
            for x_v in c..=d {
                if aggregated {
                    acc.add(ColKey::AvgWithBackup { x_u, x_v, x_b }, -w);
                } else {
                    for x_ustar in 1..=k {
                        let (e, var) = b_var(x_v, x_b, x_ustar);
                        acc.subtract_h(&e, w * inv_k, var);
                    }
                }
            }
            emit(sink, &mut acc, RowKey::BoundWithBackup { x_u, c, d }, Sense::Le);
        }
    }
}

pub(crate) fn average_row(k: u32, sink: &mut impl RowSink) {
    let mut acc = RowAcc::default();
    acc.add(ColKey::Alpha, Coef::one());
    for i in 1..=k {
        acc.add(ColKey::AlphaBucket(i), -ratio(1, k as i64));
    }
    emit(sink, &mut acc, RowKey::Average, Sense::Eq);
}

/// Streams every row of the formulation in canonical order.
pub(crate) fn for_each_row(k: u32, form: Formulation, sink: &mut impl RowSink) {
    mono_rows(k, sink);
    for x_u in 1..=k {
        block_rows(k, form, x_u, sink);
    }
    average_row(k, sink);
}

/// Bounds of a column: f on [0,1] with the padding fixed, everything else free.
pub(crate) fn column_bounds(k: u32, key: &ColKey) -> (Option<Coef>, Option<Coef>) {
    match *key {
        ColKey::F { buyer, .. } if buyer == k + 1 => (Some(Coef::zero()), Some(Coef::zero())),
        ColKey::F { item, .. } if item == k + 1 => (Some(Coef::one()), Some(Coef::one())),
        ColKey::F { .. } => (Some(Coef::zero()), Some(Coef::one())),
        _ => (None, None),
    }
}

struct Owned {
    key: RowKey,
    sense: Sense,
    rhs: Coef,
    entries: Vec<(ColKey, Coef)>,
}

fn collect(rows: &mut Vec<Owned>) -> impl FnMut(RowKey, Sense, &Coef, &[(ColKey, Coef)]) + '_ {
    move |key, sense, rhs, entries| {
        rows.push(Owned {
            key,
            sense,
            rhs: *rhs,
            entries: entries.to_vec(),
        })
    }
}

/// The factor-revealing LP with affine h substituted and min-terms expanded.
pub fn build_lp(k: u32) -> Result<LpModel> {
    build_lp_with(k, Formulation::Substituted)
}

pub fn build_lp_with(k: u32, form: Formulation) -> Result<LpModel> {
    if k == 0 {
        return Err(LpError::InvalidParameter("k must be ≥ 1".into()));
    }
    if k > 1000 {
        return Err(LpError::InvalidParameter(format!(
            "k = {k} is too large for an in-memory model"
        )));
    }
    let mut model = LpModel::new(k, form);
    for buyer in 1..=k + 1 {
        for item in 1..=k + 1 {
            let key = ColKey::F { buyer, item };
            let (lo, hi) = column_bounds(k, &key);
            model.column(key, lo, hi);
        }
    }
    model.column(ColKey::Alpha, None, None);

    let mut head = Vec::new();
    mono_rows(k, &mut collect(&mut head));
    let blocks: Vec<Vec<Owned>> = (1..=k)
        .into_par_iter()
        .map(|x_u| {
            let mut rows = Vec::new();
            block_rows(k, form, x_u, &mut collect(&mut rows));
            rows
        })
        .collect();
    let mut tail = Vec::new();
    average_row(k, &mut collect(&mut tail));

    for row in head.into_iter().chain(blocks.into_iter().flatten()).chain(tail) {
        let mut entries: Vec<(usize, Coef)> = row
            .entries
            .iter()
            .map(|(key, c)| {
                let (lo, hi) = column_bounds(k, key);
                (model.column(*key, lo, hi), *c)
            })
            .collect();
        entries.sort_unstable_by_key(|e| e.0);
        model.rows.push(Row {
            key: row.key,
            sense: row.sense,
            rhs: row.rhs,
            entries,
        });
    }
    let alpha = model.alpha_index();
    model.objective = vec![(alpha, Coef::one())];
    Ok(model)
}
