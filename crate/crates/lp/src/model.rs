//! In-memory LP: structured column/row keys, exact coefficients.

use std::collections::HashMap;
use std::fmt;

use num_rational::Rational64;
use serde::Serialize;

/// Exact coefficient type used while building.
pub type Coef = Rational64;

pub(crate) fn to_f64(q: &Coef) -> f64 {
    // both parts are small integers, so the quotient is correctly rounded
    *q.numer() as f64 / *q.denom() as f64
}

pub(crate) fn coef_to_big(q: &Coef) -> num_rational::BigRational {
    num_rational::BigRational::new((*q.numer()).into(), (*q.denom()).into())
}

/// Which way the min-terms and averages are represented.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Formulation {
    /// Affine h substituted into the α rows; min-terms become variables.
    Substituted,
    /// Every h occurrence is a variable, h⊥ included.
    Naive,
    /// As `Substituted`, plus one column per u*-average with a defining
    /// equality; keeps the α rows short for large k.
    Aggregated,
}

/// Structured identity of a column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ColKey {
    F { buyer: u32, item: u32 },
    Alpha,
    AlphaBucket(u32),
    HUnmatched { x_u: u32, x_ustar: u32 },
    HNoBackup { x_u: u32, x_v: u32, x_ustar: u32 },
    HWithBackup { x_u: u32, x_v: u32, x_b: u32, x_ustar: u32 },
    AvgNoBackup { x_u: u32, x_v: u32 },
    AvgWithBackup { x_u: u32, x_v: u32, x_b: u32 },
}

impl fmt::Display for ColKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ColKey::F { buyer, item } => write!(f, "f_{buyer}_{item}"),
            ColKey::Alpha => write!(f, "alpha"),
            ColKey::AlphaBucket(i) => write!(f, "alpha_{i}"),
            ColKey::HUnmatched { x_u, x_ustar } => write!(f, "hbot_{x_u}_{x_ustar}"),
            ColKey::HNoBackup { x_u, x_v, x_ustar } => write!(f, "hs_{x_u}_{x_v}_{x_ustar}"),
            ColKey::HWithBackup {
                x_u,
                x_v,
                x_b,
                x_ustar,
            } => write!(f, "hb_{x_u}_{x_v}_{x_b}_{x_ustar}"),
            ColKey::AvgNoBackup { x_u, x_v } => write!(f, "Hs_{x_u}_{x_v}"),
            ColKey::AvgWithBackup { x_u, x_v, x_b } => write!(f, "Hb_{x_u}_{x_v}_{x_b}"),
        }
    }
}

/// Which branch of an h definition a row bounds. `Only` is the single row of
/// an affine h in the naive form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    Only,
    First,
    Second,
}

impl Branch {
    fn tag(self) -> u8 {
        match self {
            Branch::Only => 0,
            Branch::First => 1,
            Branch::Second => 2,
        }
    }
}

/// Structured identity of a constraint row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RowKey {
    /// f(i+1, j) ≤ f(i, j)
    MonoBuyer { i: u32, j: u32 },
    /// f(i, j) ≤ f(i, j+1)
    MonoItem { i: u32, j: u32 },
    HUnmatched { x_u: u32, x_ustar: u32 },
    HNoBackup { x_u: u32, x_v: u32, x_ustar: u32, branch: Branch },
    HWithBackup { x_u: u32, x_v: u32, x_b: u32, x_ustar: u32, branch: Branch },
    DefNoBackup { x_u: u32, x_v: u32 },
    DefWithBackup { x_u: u32, x_v: u32, x_b: u32 },
    BoundUnmatched { x_u: u32 },
    BoundNoBackup { x_u: u32, c: u32 },
    BoundWithBackup { x_u: u32, c: u32, d: u32 },
    Average,
}

impl fmt::Display for RowKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            RowKey::MonoBuyer { i, j } => write!(f, "mono_r_{i}_{j}"),
            RowKey::MonoItem { i, j } => write!(f, "mono_c_{i}_{j}"),
            RowKey::HUnmatched { x_u, x_ustar } => write!(f, "hbot_{x_u}_{x_ustar}"),
            RowKey::HNoBackup {
                x_u,
                x_v,
                x_ustar,
                branch,
            } => write!(f, "hs{}_{x_u}_{x_v}_{x_ustar}", branch.tag()),
            RowKey::HWithBackup {
                x_u,
                x_v,
                x_b,
                x_ustar,
                branch,
            } => write!(f, "hb{}_{x_u}_{x_v}_{x_b}_{x_ustar}", branch.tag()),
            RowKey::DefNoBackup { x_u, x_v } => write!(f, "defHs_{x_u}_{x_v}"),
            RowKey::DefWithBackup { x_u, x_v, x_b } => write!(f, "defHb_{x_u}_{x_v}_{x_b}"),
            RowKey::BoundUnmatched { x_u } => write!(f, "abot_{x_u}"),
            RowKey::BoundNoBackup { x_u, c } => write!(f, "as_{x_u}_{c}"),
            RowKey::BoundWithBackup { x_u, c, d } => write!(f, "ab_{x_u}_{c}_{d}"),
            RowKey::Average => write!(f, "avg"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Column {
    pub key: ColKey,
    /// `None` means unbounded in that direction.
    pub lower: Option<Coef>,
    pub upper: Option<Coef>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub key: RowKey,
    pub sense: Sense,
    pub rhs: Coef,
    /// (column index, coefficient), sorted by column index, no zeros.
    pub entries: Vec<(usize, Coef)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Dimensions {
    pub k: u32,
    pub columns: usize,
    pub rows: usize,
    pub nonzeros: usize,
    pub min_variables: usize,
}

/// maximize Σ objective·x subject to the rows and column bounds.
#[derive(Clone, Debug)]
pub struct LpModel {
    pub k: u32,
    pub formulation: Formulation,
    pub columns: Vec<Column>,
    pub rows: Vec<Row>,
    pub objective: Vec<(usize, Coef)>,
    index: HashMap<ColKey, usize>,
}

impl LpModel {
    pub(crate) fn new(k: u32, formulation: Formulation) -> Self {
        LpModel {
            k,
            formulation,
            columns: Vec::new(),
            rows: Vec::new(),
            objective: Vec::new(),
            index: HashMap::new(),
        }
    }

    /// Index of `key`, registering it with the given bounds if new.
    pub(crate) fn column(&mut self, key: ColKey, lower: Option<Coef>, upper: Option<Coef>) -> usize {
        if let Some(&i) = self.index.get(&key) {
            return i;
        }
        let i = self.columns.len();
        self.columns.push(Column { key, lower, upper });
        self.index.insert(key, i);
        i
    }

    pub fn column_index(&self, key: &ColKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn column_names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.key.to_string()).collect()
    }

    pub fn alpha_index(&self) -> usize {
        self.index[&ColKey::Alpha]
    }

    pub fn f_index(&self, buyer: u32, item: u32) -> usize {
        self.index[&ColKey::F { buyer, item }]
    }

    pub fn alpha_bucket_index(&self, i: u32) -> usize {
        self.index[&ColKey::AlphaBucket(i)]
    }

    pub fn dimensions(&self) -> Dimensions {
        Dimensions {
            k: self.k,
            columns: self.columns.len(),
            rows: self.rows.len(),
            nonzeros: self.rows.iter().map(|r| r.entries.len()).sum(),
            min_variables: self
                .columns
                .iter()
                .filter(|c| matches!(c.key, ColKey::HNoBackup { .. } | ColKey::HWithBackup { .. }))
                .count(),
        }
    }

    pub fn row_by_key(&self, key: &RowKey) -> Option<&Row> {
        self.rows.iter().find(|r| r.key == *key)
    }
}
