//! Sparse LU of a simplex basis (left-looking, threshold pivoting) with a
//! product-form eta file for the updates between refactorizations.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

const NONE: usize = usize::MAX;
const PIVOT_THRESHOLD: f64 = 0.1;
const SINGULAR_TOL: f64 = 1e-10;
const DROP_TOL: f64 = 1e-14;

struct Eta {
    pos: usize,
    pivot: f64,
    entries: Vec<(usize, f64)>,
}

pub(crate) struct Lu {
    m: usize,
    /// Per elimination step: pivot row and basis position.
    prow: Vec<usize>,
    ppos: Vec<usize>,
    l_start: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<f64>,
    /// U columns hold (earlier step, value).
    u_start: Vec<usize>,
    u_idx: Vec<usize>,
    u_val: Vec<f64>,
    diag: Vec<f64>,
    etas: Vec<Eta>,
    eta_nnz: usize,
}

pub(crate) struct Singular {
    /// Basis positions whose columns could not be pivoted.
    pub positions: Vec<usize>,
    /// Rows left without a pivot.
    pub rows: Vec<usize>,
}

impl Lu {
    /// Factorizes the m×m basis whose column at position p is `column(p)`.
    pub fn factor<'a>(
        m: usize,
        column: impl Fn(usize) -> (&'a [usize], &'a [f64]),
    ) -> Result<Lu, Singular> {
        let mut row_count = vec![0usize; m];
        let mut order: Vec<(usize, usize)> = (0..m)
            .map(|p| {
                let (idx, _) = column(p);
                for &i in idx {
                    row_count[i] += 1;
                }
                (idx.len(), p)
            })
            .collect();
        order.sort_unstable();

        let mut lu = Lu {
            m,
            prow: Vec::with_capacity(m),
            ppos: Vec::with_capacity(m),
            l_start: vec![0],
            l_idx: Vec::new(),
            l_val: Vec::new(),
            u_start: vec![0],
            u_idx: Vec::new(),
            u_val: Vec::new(),
            diag: Vec::with_capacity(m),
            etas: Vec::new(),
            eta_nnz: 0,
        };
        let mut row_step = vec![NONE; m];
        let mut w = vec![0.0f64; m];
        let mut touched = vec![false; m];
        let mut nz: Vec<usize> = Vec::new();
        let mut heap: BinaryHeap<Reverse<usize>> = BinaryHeap::new();
        let mut queued = vec![false; m];
        let mut singular = Vec::new();

        for &(_, p) in &order {
            let (idx, val) = column(p);
            for (&i, &v) in idx.iter().zip(val) {
                w[i] = v;
                touched[i] = true;
                nz.push(i);
                let s = row_step[i];
                if s != NONE && !queued[s] {
                    queued[s] = true;
                    heap.push(Reverse(s));
                }
            }
            while let Some(Reverse(s)) = heap.pop() {
                queued[s] = false;
                let v = w[lu.prow[s]];
                if v == 0.0 {
                    continue;
                }
                for t in lu.l_start[s]..lu.l_start[s + 1] {
                    let i = lu.l_idx[t];
                    if !touched[i] {
                        touched[i] = true;
                        nz.push(i);
                    }
                    w[i] -= lu.l_val[t] * v;
                    let si = row_step[i];
                    if si != NONE && !queued[si] {
                        queued[si] = true;
                        heap.push(Reverse(si));
                    }
                }
            }
            let mut max_abs = 0.0f64;
            for &i in &nz {
                if row_step[i] == NONE {
                    max_abs = max_abs.max(w[i].abs());
                }
            }
            if max_abs < SINGULAR_TOL {
                singular.push(p);
            } else {
                let mut best = NONE;
                for &i in &nz {
                    if row_step[i] != NONE || w[i].abs() < PIVOT_THRESHOLD * max_abs {
                        continue;
                    }
                    if best == NONE
                        || row_count[i] < row_count[best]
                        || (row_count[i] == row_count[best] && w[i].abs() > w[best].abs())
                    {
                        best = i;
                    }
                }
                let step = lu.prow.len();
                let piv = w[best];
                for &i in &nz {
                    let s = row_step[i];
                    if s != NONE {
                        if w[i] != 0.0 {
                            lu.u_idx.push(s);
                            lu.u_val.push(w[i]);
                        }
                    } else if i != best && w[i].abs() > DROP_TOL {
                        lu.l_idx.push(i);
                        lu.l_val.push(w[i] / piv);
                    }
                }
                lu.u_start.push(lu.u_idx.len());
                lu.l_start.push(lu.l_idx.len());
                lu.diag.push(piv);
                lu.prow.push(best);
                lu.ppos.push(p);
                row_step[best] = step;
            }
            for &i in &nz {
                w[i] = 0.0;
                touched[i] = false;
            }
            nz.clear();
        }
        if singular.is_empty() {
            Ok(lu)
        } else {
            let rows = (0..m).filter(|&i| row_step[i] == NONE).collect();
            Err(Singular {
                positions: singular,
                rows,
            })
        }
    }

    pub fn updates(&self) -> usize {
        self.etas.len()
    }

    pub fn eta_nonzeros(&self) -> usize {
        self.eta_nnz
    }

    /// Solves B x = b. `b` is indexed by row and is overwritten; the result is
    /// indexed by basis position.
    pub fn ftran(&self, b: &mut [f64], out: &mut [f64]) {
        let steps = self.prow.len();
        for s in 0..steps {
            let v = b[self.prow[s]];
            if v != 0.0 {
                for t in self.l_start[s]..self.l_start[s + 1] {
                    b[self.l_idx[t]] -= self.l_val[t] * v;
                }
            }
        }
        for s in (0..steps).rev() {
            let z = b[self.prow[s]] / self.diag[s];
            out[self.ppos[s]] = z;
            if z != 0.0 {
                for t in self.u_start[s]..self.u_start[s + 1] {
                    b[self.prow[self.u_idx[t]]] -= self.u_val[t] * z;
                }
            }
        }
        for eta in &self.etas {
            let zr = out[eta.pos] / eta.pivot;
            out[eta.pos] = zr;
            if zr != 0.0 {
                for &(i, a) in &eta.entries {
                    out[i] -= a * zr;
                }
            }
        }
    }

    /// Solves Bᵀ y = c. `c` is indexed by basis position and is overwritten;
    /// the result is indexed by row.
    pub fn btran(&self, c: &mut [f64], y: &mut [f64]) {
        for eta in self.etas.iter().rev() {
            let mut v = c[eta.pos];
            for &(i, a) in &eta.entries {
                v -= a * c[i];
            }
            c[eta.pos] = v / eta.pivot;
        }
        let steps = self.prow.len();
        let mut w = vec![0.0; steps];
        for s in 0..steps {
            let mut v = c[self.ppos[s]];
            for t in self.u_start[s]..self.u_start[s + 1] {
                v -= self.u_val[t] * w[self.u_idx[t]];
            }
            w[s] = v / self.diag[s];
        }
        y[..self.m].fill(0.0);
        for s in 0..steps {
            y[self.prow[s]] = w[s];
        }
        for s in (0..steps).rev() {
            let mut v = y[self.prow[s]];
            for t in self.l_start[s]..self.l_start[s + 1] {
                v -= self.l_val[t] * y[self.l_idx[t]];
            }
            y[self.prow[s]] = v;
        }
    }

    /// Records the replacement of the column at `pos` by one whose
    /// representation in the current basis is `alpha`.
    pub fn update(&mut self, pos: usize, alpha: &[f64]) {
        let entries: Vec<(usize, f64)> = alpha
            .iter()
            .enumerate()
            .filter(|&(i, &a)| i != pos && a.abs() > DROP_TOL)
            .map(|(i, &a)| (i, a))
            .collect();
        self.eta_nnz += entries.len();
        self.etas.push(Eta {
            pos,
            pivot: alpha[pos],
            entries,
        });
    }
}
