//! Model → solver bridge, solutions, exact verification and solution import.

use std::collections::HashMap;
use std::time::Instant;

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use ranking_core::gain::PriceTable;

use crate::error::{LpError, Result};
use crate::model::{coef_to_big, to_f64, LpModel, Sense};
use crate::simplex::{solve_sparse, LpStatus, SolverOptions, SparseLp};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LpSolution {
    pub k: u32,
    pub status: LpStatus,
    pub alpha: f64,
    pub alpha_i: Vec<f64>,
    #[serde(serialize_with = "table_rows")]
    pub f_table: PriceTable,
    pub iterations: usize,
    pub elapsed_secs: f64,
    /// One value per model column.
    #[serde(skip)]
    pub values: Vec<f64>,
}

fn table_rows<S: serde::Serializer>(t: &PriceTable, s: S) -> std::result::Result<S::Ok, S::Error> {
    serde::Serialize::serialize(&t.rows(), s)
}

impl LpSolution {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution serializes")
    }

    /// name=value lines for every column.
    pub fn to_assignment_text(&self, m: &LpModel) -> String {
        let mut out = String::new();
        for (c, v) in m.columns.iter().zip(&self.values) {
            out.push_str(&format!("{}={v}\n", c.key));
        }
        out
    }

    /// Assembles a solution from a full assignment of the model's columns.
    pub fn from_values(m: &LpModel, values: Vec<f64>, status: LpStatus, iterations: usize, elapsed_secs: f64) -> Result<Self> {
        if values.len() != m.columns.len() {
            return Err(LpError::InvalidParameter(format!(
                "{} values for {} columns",
                values.len(),
                m.columns.len()
            )));
        }
        let k = m.k;
        let alpha_i = (1..=k).map(|i| values[m.alpha_bucket_index(i)]).collect();
        let raw: Vec<Vec<f64>> = (1..=k)
            .map(|a| (1..=k).map(|b| values[m.f_index(a, b)]).collect())
            .collect();
        Ok(LpSolution {
            k,
            status,
            alpha: values[m.alpha_index()],
            alpha_i,
            f_table: repaired_table(k, &raw)?,
            iterations,
            elapsed_secs,
            values,
        })
    }
}

/// Nearest monotone table: clamp to [0,1], then enforce both monotonicity
/// directions in one sweep. Moves entries by at most the solver's tolerance
/// when the input is feasible.
pub fn repaired_table(k: u32, raw: &[Vec<f64>]) -> Result<PriceTable> {
    let n = k as usize;
    let mut rows: Vec<Vec<f64>> = raw
        .iter()
        .map(|r| r.iter().map(|v| v.clamp(0.0, 1.0)).collect())
        .collect();
    for i in 0..n {
        for j in 0..n {
            if i > 0 {
                rows[i][j] = rows[i][j].min(rows[i - 1][j]);
            }
            if j > 0 {
                rows[i][j] = rows[i][j].max(rows[i][j - 1]);
            }
        }
    }
    Ok(PriceTable::from_rows(k, &rows)?)
}

/// Floating-point form of the model with fixed columns and empty rows
/// removed, plus the maps needed to undo that.
pub struct Presolved {
    pub lp: SparseLp,
    /// Model column of each kept column.
    pub kept: Vec<usize>,
    /// Value of every model column that was fixed.
    pub fixed: Vec<Option<f64>>,
}

pub fn presolve(m: &LpModel) -> Result<Presolved> {
    let ncols = m.columns.len();
    let mut fixed = vec![None; ncols];
    for (j, c) in m.columns.iter().enumerate() {
        if let (Some(l), Some(u)) = (&c.lower, &c.upper) {
            if l == u {
                fixed[j] = Some(to_f64(l));
            }
        }
    }
    let mut new_index = vec![usize::MAX; ncols];
    let kept: Vec<usize> = (0..ncols).filter(|&j| fixed[j].is_none()).collect();
    for (nj, &j) in kept.iter().enumerate() {
        new_index[j] = nj;
    }
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); kept.len()];
    let mut row_lower = Vec::new();
    let mut row_upper = Vec::new();
    for row in &m.rows {
        let mut shift = 0.0;
        let mut live = Vec::new();
        for &(j, ref c) in &row.entries {
            match fixed[j] {
                Some(v) => shift += to_f64(c) * v,
                None => live.push((new_index[j], to_f64(c))),
            }
        }
        let rhs = to_f64(&row.rhs) - shift;
        let (lo, hi) = match row.sense {
            Sense::Le => (f64::NEG_INFINITY, rhs),
            Sense::Ge => (rhs, f64::INFINITY),
            Sense::Eq => (rhs, rhs),
        };
        if live.is_empty() {
            if lo > 1e-9 || hi < -1e-9 {
                return Err(LpError::InvalidParameter(format!(
                    "row {} is infeasible after fixing columns",
                    row.key
                )));
            }
            continue;
        }
        let r = row_lower.len();
        row_lower.push(lo);
        row_upper.push(hi);
        for (nj, v) in live {
            cols[nj].push((r, v));
        }
    }
    let mut lp = SparseLp {
        col_start: vec![0],
        row_lower,
        row_upper,
        ..SparseLp::default()
    };
    let mut cost = vec![0.0; kept.len()];
    for &(j, ref c) in &m.objective {
        if new_index[j] != usize::MAX {
            cost[new_index[j]] = to_f64(c);
        }
    }
    for (nj, &j) in kept.iter().enumerate() {
        let c = &m.columns[j];
        lp.col_lower.push(c.lower.as_ref().map_or(f64::NEG_INFINITY, to_f64));
        lp.col_upper.push(c.upper.as_ref().map_or(f64::INFINITY, to_f64));
        for &(r, v) in &cols[nj] {
            lp.row_idx.push(r);
            lp.values.push(v);
        }
        lp.col_start.push(lp.row_idx.len());
    }
    lp.cost = cost;
    Ok(Presolved { lp, kept, fixed })
}

pub fn solve(m: &LpModel, opts: &SolverOptions) -> Result<LpSolution> {
    let start = Instant::now();
    let pre = presolve(m)?;
    let raw = solve_sparse(&pre.lp, opts)?;
    let mut values: Vec<f64> = pre.fixed.iter().map(|v| v.unwrap_or(0.0)).collect();
    for (nj, &j) in pre.kept.iter().enumerate() {
        values[j] = raw.x[nj];
    }
    LpSolution::from_values(m, values, raw.status, raw.iterations, start.elapsed().as_secs_f64())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    pub max_row_violation: f64,
    pub worst_row: Option<String>,
    /// Every row violated by more than the tolerance.
    pub violated_rows: Vec<(String, f64)>,
    pub max_bound_violation: f64,
    pub worst_column: Option<String>,
    pub objective: f64,
    pub objective_gap: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn exact(v: f64) -> Result<BigRational> {
    BigRational::from_float(v).ok_or_else(|| LpError::InvalidParameter(format!("non-finite value {v}")))
}

fn to_f64_big(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::INFINITY)
}

/// Residuals of a full assignment, computed exactly from the model's
/// rational coefficients; `claimed_alpha` is compared against the objective.
pub fn verify_values(m: &LpModel, values: &[f64], claimed_alpha: f64, tol: f64) -> Result<ResidualReport> {
    if values.len() != m.columns.len() {
        return Err(LpError::IncompleteSolution(
            m.columns[values.len().min(m.columns.len())..]
                .iter()
                .map(|c| c.key.to_string())
                .collect(),
        ));
    }
    let xs: Vec<BigRational> = values.iter().map(|&v| exact(v)).collect::<Result<_>>()?;
    let zero = BigRational::zero();
    let tol_q = exact(tol)?;
    let mut worst_row = (zero.clone(), None);
    let mut violated_rows = Vec::new();
    for row in &m.rows {
        let mut act = BigRational::zero();
        for (j, c) in &row.entries {
            act += coef_to_big(c) * &xs[*j];
        }
        let rhs = coef_to_big(&row.rhs);
        let viol = match row.sense {
            Sense::Le => &act - &rhs,
            Sense::Ge => &rhs - &act,
            Sense::Eq => (&act - &rhs).abs(),
        };
        if viol > tol_q {
            violated_rows.push((row.key.to_string(), to_f64_big(&viol)));
        }
        if viol > worst_row.0 {
            worst_row = (viol, Some(row.key.to_string()));
        }
    }
    let mut worst_col = (zero.clone(), None);
    for (c, x) in m.columns.iter().zip(&xs) {
        let mut viol = zero.clone();
        if let Some(l) = &c.lower {
            viol = viol.max(coef_to_big(l) - x);
        }
        if let Some(u) = &c.upper {
            viol = viol.max(x - coef_to_big(u));
        }
        if viol > worst_col.0 {
            worst_col = (viol, Some(c.key.to_string()));
        }
    }
    let mut obj = BigRational::zero();
    for (j, c) in &m.objective {
        obj += coef_to_big(c) * &xs[*j];
    }
    let gap = (&obj - exact(claimed_alpha)?).abs();
    let pass = worst_row.0 <= tol_q && worst_col.0 <= tol_q && gap <= tol_q;
    Ok(ResidualReport {
        max_row_violation: to_f64_big(&worst_row.0),
        worst_row: worst_row.1,
        violated_rows,
        max_bound_violation: to_f64_big(&worst_col.0),
        worst_column: worst_col.1,
        objective: to_f64_big(&obj),
        objective_gap: to_f64_big(&gap),
        tolerance: tol,
        pass,
    })
}

pub fn verify_solution(m: &LpModel, s: &LpSolution, tol: f64) -> Result<ResidualReport> {
    verify_values(m, &s.values, s.alpha, tol)
}

/// Parses `name=value` lines; blank lines and `#` comments are skipped.
pub fn parse_assignment(text: &str) -> Result<HashMap<String, f64>> {
    let mut out = HashMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (name, value) = line
            .split_once('=')
            .ok_or_else(|| LpError::parse(n + 1, "expected name=value"))?;
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| LpError::parse(n + 1, format!("bad value `{}`", value.trim())))?;
        out.insert(name.trim().to_string(), v);
    }
    Ok(out)
}

/// Orders an imported assignment by model column; every column must be present.
pub fn assignment_values(m: &LpModel, assignment: &HashMap<String, f64>) -> Result<Vec<f64>> {
    let names = m.column_names();
    let missing: Vec<String> = names.iter().filter(|n| !assignment.contains_key(*n)).cloned().collect();
    if !missing.is_empty() {
        return Err(LpError::IncompleteSolution(missing));
    }
    if assignment.len() > names.len() {
        let known: std::collections::HashSet<&String> = names.iter().collect();
        let extra = assignment.keys().find(|k| !known.contains(k)).unwrap();
        return Err(LpError::UnknownVariable(extra.clone()));
    }
    Ok(names.iter().map(|n| assignment[n]).collect())
}

/// Imports an external solution and wraps it like an in-process one.
pub fn import_solution(m: &LpModel, text: &str) -> Result<LpSolution> {
    let values = assignment_values(m, &parse_assignment(text)?)?;
    LpSolution::from_values(m, values, LpStatus::Optimal, 0, 0.0)
}
