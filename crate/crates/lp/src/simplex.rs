//! Bounded primal revised simplex on `lo ≤ A x ≤ hi`, `l ≤ x ≤ u`.
//!
//! Every row r gets a logical variable s_r with column −e_r, so the working
//! system is `A x − s = 0` and row bounds become bounds on s. Phase 1
//! minimizes the sum of basic infeasibilities (composite costs), phase 2
//! maximizes the objective. Ratio tests are Harris two-pass; Dantzig pricing
//! falls back to Bland after a run of degenerate pivots.

use std::time::Instant;

use serde::Serialize;

use crate::error::{LpError, Result};
use crate::lu::Lu;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PivotRule {
    Bland,
    DantzigWithBlandFallback,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolverOptions {
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    pub max_iterations: usize,
    pub pivot_rule: PivotRule,
    /// Consecutive degenerate pivots before switching to Bland.
    pub stall_limit: usize,
    pub refactor_interval: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            feasibility_tol: 1e-9,
            optimality_tol: 1e-9,
            max_iterations: 2_000_000,
            pivot_rule: PivotRule::DantzigWithBlandFallback,
            stall_limit: 1000,
            refactor_interval: 100,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.feasibility_tol > 0.0 && self.optimality_tol > 0.0) {
            return Err(LpError::InvalidParameter("tolerances must be positive".into()));
        }
        if self.refactor_interval == 0 {
            return Err(LpError::InvalidParameter("refactor interval must be ≥ 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Iteration limit reached; the point is the last iterate.
    Limit,
}

/// Column-compressed LP in floating point: maximize cost·x.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseLp {
    pub col_start: Vec<usize>,
    pub row_idx: Vec<usize>,
    pub values: Vec<f64>,
    pub cost: Vec<f64>,
    pub col_lower: Vec<f64>,
    pub col_upper: Vec<f64>,
    pub row_lower: Vec<f64>,
    pub row_upper: Vec<f64>,
}

impl SparseLp {
    pub fn columns(&self) -> usize {
        self.cost.len()
    }

    pub fn rows(&self) -> usize {
        self.row_lower.len()
    }

    pub fn column(&self, j: usize) -> (&[usize], &[f64]) {
        let r = self.col_start[j]..self.col_start[j + 1];
        (&self.row_idx[r.clone()], &self.values[r])
    }

    /// Builds from dense rows; used by tests and small examples.
    pub fn from_dense(
        cost: Vec<f64>,
        a: &[Vec<f64>],
        row_bounds: &[(f64, f64)],
        col_bounds: &[(f64, f64)],
    ) -> Self {
        let n = cost.len();
        let mut lp = SparseLp {
            cost,
            col_lower: col_bounds.iter().map(|b| b.0).collect(),
            col_upper: col_bounds.iter().map(|b| b.1).collect(),
            row_lower: row_bounds.iter().map(|b| b.0).collect(),
            row_upper: row_bounds.iter().map(|b| b.1).collect(),
            col_start: vec![0],
            ..SparseLp::default()
        };
        for j in 0..n {
            for (i, row) in a.iter().enumerate() {
                if row[j] != 0.0 {
                    lp.row_idx.push(i);
                    lp.values.push(row[j]);
                }
            }
            lp.col_start.push(lp.row_idx.len());
        }
        lp
    }

    pub fn row_activity(&self, x: &[f64]) -> Vec<f64> {
        let mut act = vec![0.0; self.rows()];
        for (j, &xj) in x.iter().enumerate() {
            let (idx, val) = self.column(j);
            for (&i, &v) in idx.iter().zip(val) {
                act[i] += v * xj;
            }
        }
        act
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RawSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub elapsed_secs: f64,
}

const PIVOT_TOL: f64 = 1e-9;
const MAX_SINGULAR_REPAIRS: usize = 20;

struct Simplex<'a> {
    lp: &'a SparseLp,
    opts: SolverOptions,
    n: usize,
    m: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    x: Vec<f64>,
    head: Vec<usize>,
    /// Basis position of a variable, or NONBASIC.
    pos: Vec<usize>,
    lu: Option<Lu>,
    identity_rows: Vec<usize>,
    iterations: usize,
    repairs: usize,
    // scratch
    work_m: Vec<f64>,
    alpha: Vec<f64>,
    y: Vec<f64>,
    cb: Vec<f64>,
}

const NONBASIC: usize = usize::MAX;
const LOGICAL_VAL: [f64; 1] = [-1.0];

enum Entering {
    Var { q: usize, dir: f64 },
    None,
}

enum Step {
    Flip { t: f64 },
    Pivot { t: f64, leave_pos: usize, to_upper: bool },
    Unbounded,
}

impl<'a> Simplex<'a> {
    fn new(lp: &'a SparseLp, opts: SolverOptions) -> Self {
        let n = lp.columns();
        let m = lp.rows();
        let mut lo = lp.col_lower.clone();
        lo.extend_from_slice(&lp.row_lower);
        let mut hi = lp.col_upper.clone();
        hi.extend_from_slice(&lp.row_upper);
        let mut x = vec![0.0; n + m];
        for j in 0..n {
            x[j] = initial_value(lo[j], hi[j]);
        }
        let head: Vec<usize> = (n..n + m).collect();
        let mut pos = vec![NONBASIC; n + m];
        for (p, &v) in head.iter().enumerate() {
            pos[v] = p;
        }
        Simplex {
            lp,
            opts,
            n,
            m,
            lo,
            hi,
            x,
            head,
            pos,
            lu: None,
            identity_rows: (0..m).collect(),
            iterations: 0,
            repairs: 0,
            work_m: vec![0.0; m],
            alpha: vec![0.0; m],
            y: vec![0.0; m],
            cb: vec![0.0; m],
        }
    }

    fn refactor(&mut self) -> Result<()> {
        loop {
            let n = self.n;
            let lp = self.lp;
            let head = &self.head;
            let rows = &self.identity_rows;
            let result = Lu::factor(self.m, |p| {
                let v = head[p];
                if v < n {
                    lp.column(v)
                } else {
                    (&rows[v - n..v - n + 1], &LOGICAL_VAL[..])
                }
            });
            match result {
                Ok(lu) => {
                    self.lu = Some(lu);
                    self.recompute_basics();
                    return Ok(());
                }
                Err(s) => {
                    self.repairs += 1;
                    if self.repairs > MAX_SINGULAR_REPAIRS {
                        return Err(LpError::Stall(format!(
                            "basis repeatedly singular after {} iterations",
                            self.iterations
                        )));
                    }
                    for (&p, &r) in s.positions.iter().zip(&s.rows) {
                        let out = self.head[p];
                        self.pos[out] = NONBASIC;
                        self.x[out] = initial_value(self.lo[out], self.hi[out]);
                        let logical = self.n + r;
                        self.head[p] = logical;
                        self.pos[logical] = p;
                    }
                }
            }
        }
    }

    /// x_B = B⁻¹(−N x_N).
    fn recompute_basics(&mut self) {
        let mut rhs = vec![0.0; self.m];
        for j in 0..self.n + self.m {
            if self.pos[j] != NONBASIC || self.x[j] == 0.0 {
                continue;
            }
            if j < self.n {
                let (idx, val) = self.lp.column(j);
                for (&i, &v) in idx.iter().zip(val) {
                    rhs[i] -= v * self.x[j];
                }
            } else {
                rhs[j - self.n] += self.x[j];
            }
        }
        let mut out = vec![0.0; self.m];
        self.lu.as_ref().unwrap().ftran(&mut rhs, &mut out);
        for p in 0..self.m {
            self.x[self.head[p]] = out[p];
        }
    }

    fn infeasibility(&self, v: usize) -> f64 {
        let tol = self.opts.feasibility_tol;
        if self.x[v] < self.lo[v] - tol {
            self.lo[v] - self.x[v]
        } else if self.x[v] > self.hi[v] + tol {
            self.x[v] - self.hi[v]
        } else {
            0.0
        }
    }

    /// Basic costs for the current phase; returns whether phase 1 is active.
    fn phase_costs(&mut self) -> bool {
        let tol = self.opts.feasibility_tol;
        let mut phase1 = false;
        for p in 0..self.m {
            let v = self.head[p];
            self.cb[p] = if self.x[v] < self.lo[v] - tol {
                phase1 = true;
                1.0
            } else if self.x[v] > self.hi[v] + tol {
                phase1 = true;
                -1.0
            } else {
                0.0
            };
        }
        if !phase1 {
            for p in 0..self.m {
                let v = self.head[p];
                self.cb[p] = if v < self.n { self.lp.cost[v] } else { 0.0 };
            }
        }
        phase1
    }

    fn reduced_cost(&self, j: usize, phase1: bool) -> f64 {
        if j < self.n {
            let (idx, val) = self.lp.column(j);
            let mut d = if phase1 { 0.0 } else { self.lp.cost[j] };
            for (&i, &v) in idx.iter().zip(val) {
                d -= v * self.y[i];
            }
            d
        } else {
            self.y[j - self.n]
        }
    }

    fn price(&self, phase1: bool, bland: bool) -> Entering {
        let tol = self.opts.optimality_tol;
        let mut best = Entering::None;
        let mut best_score = 0.0;
        for j in 0..self.n + self.m {
            if self.pos[j] != NONBASIC || self.lo[j] == self.hi[j] {
                continue;
            }
            let d = self.reduced_cost(j, phase1);
            let dir = if d > tol && self.x[j] < self.hi[j] {
                1.0
            } else if d < -tol && self.x[j] > self.lo[j] {
                -1.0
            } else {
                continue;
            };
            if bland {
                return Entering::Var { q: j, dir };
            }
            if d.abs() > best_score {
                best_score = d.abs();
                best = Entering::Var { q: j, dir };
            }
        }
        best
    }

    fn ratio_test(&self, q: usize, dir: f64, phase1: bool, bland: bool) -> Step {
        let tol = self.opts.feasibility_tol;
        let range = self.hi[q] - self.lo[q];
        // (exact limit, relaxed limit, position, leaves at upper)
        let mut cands: Vec<(f64, f64, usize, bool)> = Vec::new();
        for p in 0..self.m {
            let a = self.alpha[p];
            if a.abs() <= PIVOT_TOL {
                continue;
            }
            let delta = -dir * a;
            let v = self.head[p];
            let (xv, l, u) = (self.x[v], self.lo[v], self.hi[v]);
            let below = xv < l - tol;
            let above = xv > u + tol;
            if delta > 0.0 {
                if below {
                    if phase1 {
                        let t = (l - xv) / delta;
                        cands.push((t, t, p, false));
                    }
                } else if !above && u.is_finite() {
                    cands.push(((u - xv) / delta, (u - xv + tol) / delta, p, true));
                }
            } else if above {
                if phase1 {
                    let t = (xv - u) / -delta;
                    cands.push((t, t, p, true));
                }
            } else if !below && l.is_finite() {
                cands.push(((xv - l) / -delta, (xv - l + tol) / -delta, p, false));
            }
        }
        if bland {
            let mut best: Option<(f64, usize, bool)> = None;
            for &(t, _, p, up) in &cands {
                let t = t.max(0.0);
                let better = match best {
                    None => true,
                    Some((bt, bp, _)) => t < bt - 1e-12 || (t <= bt + 1e-12 && self.head[p] < self.head[bp]),
                };
                if better {
                    best = Some((t, p, up));
                }
            }
            return match best {
                Some((t, _, _)) if range <= t => Step::Flip { t: range },
                Some((t, p, up)) => Step::Pivot {
                    t,
                    leave_pos: p,
                    to_upper: up,
                },
                None if range.is_finite() => Step::Flip { t: range },
                None => Step::Unbounded,
            };
        }
        let t_max = cands.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
        if range.is_finite() && range <= t_max {
            return Step::Flip { t: range };
        }
        if t_max == f64::INFINITY {
            return Step::Unbounded;
        }
        let mut best: Option<(f64, usize, bool)> = None;
        let mut best_abs = 0.0;
        for &(t, _, p, up) in &cands {
            if t <= t_max && self.alpha[p].abs() > best_abs {
                best_abs = self.alpha[p].abs();
                best = Some((t.max(0.0), p, up));
            }
        }
        let (t, p, up) = best.expect("a candidate attains the relaxed minimum");
        Step::Pivot {
            t,
            leave_pos: p,
            to_upper: up,
        }
    }

    fn ftran_column(&mut self, q: usize) {
        self.work_m.fill(0.0);
        if q < self.n {
            let (idx, val) = self.lp.column(q);
            for (&i, &v) in idx.iter().zip(val) {
                self.work_m[i] = v;
            }
        } else {
            self.work_m[q - self.n] = -1.0;
        }
        self.lu.as_ref().unwrap().ftran(&mut self.work_m, &mut self.alpha);
    }

    fn run(&mut self) -> Result<LpStatus> {
        self.refactor()?;
        let mut fresh = true;
        let mut degenerate_run = 0usize;
        let mut bland = self.opts.pivot_rule == PivotRule::Bland;
        loop {
            if self.iterations >= self.opts.max_iterations {
                return Ok(LpStatus::Limit);
            }
            let phase1 = self.phase_costs();
            let mut cb = std::mem::take(&mut self.cb);
            let mut y = std::mem::take(&mut self.y);
            self.lu.as_ref().unwrap().btran(&mut cb, &mut y);
            self.cb = cb;
            self.y = y;
            let (q, dir) = match self.price(phase1, bland) {
                Entering::Var { q, dir } => (q, dir),
                Entering::None => {
                    if !fresh {
                        self.refactor()?;
                        fresh = true;
                        continue;
                    }
                    return Ok(if phase1 { LpStatus::Infeasible } else { LpStatus::Optimal });
                }
            };
            self.ftran_column(q);
            let step = self.ratio_test(q, dir, phase1, bland);
            self.iterations += 1;
            let t = match step {
                Step::Unbounded => {
                    if !fresh {
                        self.refactor()?;
                        fresh = true;
                        continue;
                    }
                    return Ok(LpStatus::Unbounded);
                }
                Step::Flip { t } | Step::Pivot { t, .. } => t,
            };
            if t > 0.0 {
                self.x[q] += dir * t;
                for p in 0..self.m {
                    let a = self.alpha[p];
                    if a != 0.0 {
                        self.x[self.head[p]] -= dir * t * a;
                    }
                }
            }
            match step {
                Step::Flip { .. } => {
                    self.x[q] = if dir > 0.0 { self.hi[q] } else { self.lo[q] };
                }
                Step::Pivot {
                    leave_pos, to_upper, ..
                } => {
                    let out = self.head[leave_pos];
                    self.x[out] = if to_upper { self.hi[out] } else { self.lo[out] };
                    self.pos[out] = NONBASIC;
                    self.head[leave_pos] = q;
                    self.pos[q] = leave_pos;
                    let alpha = std::mem::take(&mut self.alpha);
                    let lu = self.lu.as_mut().unwrap();
                    lu.update(leave_pos, &alpha);
                    self.alpha = alpha;
                    fresh = false;
                    let lu = self.lu.as_ref().unwrap();
                    if lu.updates() >= self.opts.refactor_interval || lu.eta_nonzeros() > 8 * self.m {
                        self.refactor()?;
                        fresh = true;
                    }
                }
                Step::Unbounded => unreachable!(),
            }
            if t <= 1e-12 {
                degenerate_run += 1;
                if degenerate_run > self.opts.stall_limit {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
                bland = self.opts.pivot_rule == PivotRule::Bland;
            }
        }
    }

    fn max_infeasibility(&self) -> f64 {
        (0..self.n + self.m).map(|v| self.infeasibility(v)).fold(0.0, f64::max)
    }
}

fn initial_value(lo: f64, hi: f64) -> f64 {
    if lo.is_finite() {
        lo
    } else if hi.is_finite() {
        hi
    } else {
        0.0
    }
}

/// Solves `lp`; deterministic for fixed inputs.
pub fn solve_sparse(lp: &SparseLp, opts: &SolverOptions) -> Result<RawSolution> {
    opts.validate()?;
    let start = Instant::now();
    let mut s = Simplex::new(lp, *opts);
    let status = s.run()?;
    let status = if status == LpStatus::Optimal && s.max_infeasibility() > 10.0 * opts.feasibility_tol {
        LpStatus::Infeasible
    } else {
        status
    };
    let x = s.x[..s.n].to_vec();
    let objective = x.iter().zip(&lp.cost).map(|(a, b)| a * b).sum();
    Ok(RawSolution {
        status,
        x,
        objective,
        iterations: s.iterations,
        elapsed_secs: start.elapsed().as_secs_f64(),
    })
}
