//! Free-format MPS: writer, reader, a streaming validator for very large
//! files, and a streaming exporter for the aggregated formulation.

use std::collections::{HashMap, HashSet};
use std::hash::{BuildHasherDefault, DefaultHasher, Hash, Hasher};
use std::io::{BufRead, Write};

use num_traits::Zero;
use serde::Serialize;

use crate::build::{column_bounds, for_each_row};
use crate::error::{LpError, Result};
use crate::model::{to_f64, Branch, ColKey, Coef, Formulation, LpModel, RowKey, Sense};

pub const OBJECTIVE_ROW: &str = "obj";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RowType {
    N,
    L,
    G,
    E,
}

impl RowType {
    fn code(self) -> &'static str {
        match self {
            RowType::N => "N",
            RowType::L => "L",
            RowType::G => "G",
            RowType::E => "E",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "N" => RowType::N,
            "L" => RowType::L,
            "G" => RowType::G,
            "E" => RowType::E,
            _ => return None,
        })
    }
}

impl From<Sense> for RowType {
    fn from(s: Sense) -> Self {
        match s {
            Sense::Le => RowType::L,
            Sense::Ge => RowType::G,
            Sense::Eq => RowType::E,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BoundKind {
    Up,
    Lo,
    Fx,
    Fr,
    Mi,
}

impl BoundKind {
    fn code(self) -> &'static str {
        match self {
            BoundKind::Up => "UP",
            BoundKind::Lo => "LO",
            BoundKind::Fx => "FX",
            BoundKind::Fr => "FR",
            BoundKind::Mi => "MI",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "UP" => BoundKind::Up,
            "LO" => BoundKind::Lo,
            "FX" => BoundKind::Fx,
            "FR" => BoundKind::Fr,
            "MI" => BoundKind::Mi,
            _ => return None,
        })
    }

    fn takes_value(self) -> bool {
        matches!(self, BoundKind::Up | BoundKind::Lo | BoundKind::Fx)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MpsColumn {
    pub name: String,
    pub entries: Vec<(String, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MpsBound {
    pub kind: BoundKind,
    pub column: String,
    pub value: Option<f64>,
}

/// Sparse data of an MPS file, in file order.
#[derive(Clone, Debug, PartialEq)]
pub struct MpsDocument {
    pub name: String,
    pub maximize: bool,
    pub rows: Vec<(RowType, String)>,
    pub columns: Vec<MpsColumn>,
    pub rhs: Vec<(String, f64)>,
    pub bounds: Vec<MpsBound>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MpsSummary {
    pub rows: usize,
    pub columns: usize,
    pub nonzeros: usize,
    pub rhs: usize,
    pub bounds: usize,
}

pub fn model_name(k: u32, form: Formulation) -> String {
    let tag = match form {
        Formulation::Substituted => "substituted",
        Formulation::Naive => "naive",
        Formulation::Aggregated => "aggregated",
    };
    format!("ranking_lp_k{k}_{tag}")
}

fn bounds_of(lower: Option<f64>, upper: Option<f64>) -> Vec<(BoundKind, Option<f64>)> {
    match (lower, upper) {
        (None, None) => vec![(BoundKind::Fr, None)],
        (Some(l), Some(u)) if l == u => vec![(BoundKind::Fx, Some(l))],
        (lower, upper) => {
            let mut out = Vec::new();
            match lower {
                None => out.push((BoundKind::Mi, None)),
                Some(l) if l != 0.0 => out.push((BoundKind::Lo, Some(l))),
                Some(_) => {}
            }
            if let Some(u) = upper {
                out.push((BoundKind::Up, Some(u)));
            }
            out
        }
    }
}

impl MpsDocument {
    pub fn from_model(m: &LpModel) -> Self {
        let rows: Vec<(RowType, String)> = std::iter::once((RowType::N, OBJECTIVE_ROW.to_string()))
            .chain(m.rows.iter().map(|r| (r.sense.into(), r.key.to_string())))
            .collect();
        let mut columns: Vec<MpsColumn> = m
            .columns
            .iter()
            .map(|c| MpsColumn {
                name: c.key.to_string(),
                entries: Vec::new(),
            })
            .collect();
        for &(j, c) in &m.objective {
            columns[j].entries.push((OBJECTIVE_ROW.to_string(), to_f64(&c)));
        }
        for (r, row) in m.rows.iter().enumerate() {
            for &(j, c) in &row.entries {
                columns[j].entries.push((rows[r + 1].1.clone(), to_f64(&c)));
            }
        }
        for col in &mut columns {
            if col.entries.is_empty() {
                col.entries.push((OBJECTIVE_ROW.to_string(), 0.0));
            }
        }
        let rhs = m
            .rows
            .iter()
            .filter(|r| !r.rhs.is_zero())
            .map(|r| (r.key.to_string(), to_f64(&r.rhs)))
            .collect();
        let mut bounds = Vec::new();
        for c in &m.columns {
            for (kind, value) in bounds_of(c.lower.as_ref().map(to_f64), c.upper.as_ref().map(to_f64)) {
                bounds.push(MpsBound {
                    kind,
                    column: c.key.to_string(),
                    value,
                });
            }
        }
        MpsDocument {
            name: model_name(m.k, m.formulation),
            maximize: true,
            rows,
            columns,
            rhs,
            bounds,
        }
    }

    pub fn write(&self, w: &mut impl Write) -> std::io::Result<()> {
        write_header(w, &self.name, self.maximize)?;
        for (t, name) in &self.rows {
            write_row(w, *t, name)?;
        }
        writeln!(w, "COLUMNS")?;
        for c in &self.columns {
            for (row, v) in &c.entries {
                write_entry(w, &c.name, row, *v)?;
            }
        }
        writeln!(w, "RHS")?;
        for (row, v) in &self.rhs {
            write_rhs(w, row, *v)?;
        }
        writeln!(w, "BOUNDS")?;
        for b in &self.bounds {
            write_bound(w, b.kind, &b.column, b.value)?;
        }
        writeln!(w, "ENDATA")
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("MPS text is UTF-8")
    }

    pub fn summary(&self) -> MpsSummary {
        MpsSummary {
            rows: self.rows.len(),
            columns: self.columns.len(),
            nonzeros: self.columns.iter().map(|c| c.entries.len()).sum(),
            rhs: self.rhs.len(),
            bounds: self.bounds.len(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        parse_document(text.as_bytes())
    }
}

fn write_header(w: &mut impl Write, name: &str, maximize: bool) -> std::io::Result<()> {
    writeln!(w, "NAME {name}")?;
    writeln!(w, "OBJSENSE")?;
    writeln!(w, "    {}", if maximize { "MAX" } else { "MIN" })?;
    writeln!(w, "ROWS")
}

fn write_row(w: &mut impl Write, t: RowType, name: &str) -> std::io::Result<()> {
    writeln!(w, " {}  {name}", t.code())
}

fn write_entry(w: &mut impl Write, col: &str, row: &str, v: f64) -> std::io::Result<()> {
    writeln!(w, "    {col}  {row}  {v}")
}

fn write_rhs(w: &mut impl Write, row: &str, v: f64) -> std::io::Result<()> {
    writeln!(w, "    RHS  {row}  {v}")
}

fn write_bound(w: &mut impl Write, kind: BoundKind, col: &str, value: Option<f64>) -> std::io::Result<()> {
    match value {
        Some(v) => writeln!(w, " {} BND  {col}  {v}", kind.code()),
        None => writeln!(w, " {} BND  {col}", kind.code()),
    }
}

pub fn export_mps(m: &LpModel, w: &mut impl Write) -> Result<MpsSummary> {
    let doc = MpsDocument::from_model(m);
    doc.write(w)?;
    Ok(doc.summary())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    Start,
    Name,
    ObjSense,
    Rows,
    Columns,
    Rhs,
    Bounds,
    End,
}

fn parse_number(line: usize, s: &str) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| LpError::parse(line, format!("bad number `{s}`")))?;
    if !v.is_finite() {
        return Err(LpError::parse(line, format!("non-finite number `{s}`")));
    }
    Ok(v)
}

/// Line-level MPS grammar shared by the reader and the validator.
enum Record<'a> {
    Name(&'a str),
    Sense(bool),
    Row(RowType, &'a str),
    Entry(&'a str, &'a str, f64),
    Rhs(&'a str, f64),
    Bound(BoundKind, &'a str, Option<f64>),
}

struct Lexer {
    section: Section,
    line: usize,
}

impl Lexer {
    fn new() -> Self {
        Lexer {
            section: Section::Start,
            line: 0,
        }
    }

    fn enter(&mut self, next: Section) -> Result<()> {
        if next <= self.section && !(next == Section::Name && self.section == Section::Start) {
            return Err(LpError::parse(self.line, format!("section {next:?} out of order")));
        }
        self.section = next;
        Ok(())
    }

    /// Parses one line; pairs on a data line are emitted through `out`.
    fn line<'a>(&mut self, raw: &'a str, out: &mut impl FnMut(Record<'a>) -> Result<()>) -> Result<()> {
        self.line += 1;
        let line = raw.trim_end();
        if line.is_empty() || line.starts_with('*') {
            return Ok(());
        }
        let mut fields = line.split_whitespace();
        if !line.starts_with(' ') && !line.starts_with('\t') {
            let head = fields.next().unwrap_or_default();
            match head {
                "NAME" => {
                    self.enter(Section::Name)?;
                    out(Record::Name(fields.next().unwrap_or("")))?;
                }
                "OBJSENSE" => {
                    self.enter(Section::ObjSense)?;
                    if let Some(s) = fields.next() {
                        out(Record::Sense(self.sense(s)?))?;
                    }
                }
                "ROWS" => self.enter(Section::Rows)?,
                "COLUMNS" => self.enter(Section::Columns)?,
                "RHS" => self.enter(Section::Rhs)?,
                "BOUNDS" => self.enter(Section::Bounds)?,
                "ENDATA" => self.enter(Section::End)?,
                other => return Err(LpError::parse(self.line, format!("unsupported section `{other}`"))),
            }
            return Ok(());
        }
        let f: Vec<&str> = fields.collect();
        match self.section {
            Section::ObjSense if f.len() == 1 => out(Record::Sense(self.sense(f[0])?)),
            Section::Rows if f.len() == 2 => {
                let t = RowType::parse(f[0])
                    .ok_or_else(|| LpError::parse(self.line, format!("bad row type `{}`", f[0])))?;
                out(Record::Row(t, f[1]))
            }
            Section::Columns if f.len() == 3 || f.len() == 5 => {
                for pair in f[1..].chunks(2) {
                    out(Record::Entry(f[0], pair[0], parse_number(self.line, pair[1])?))?;
                }
                Ok(())
            }
            Section::Rhs if f.len() == 3 || f.len() == 5 => {
                for pair in f[1..].chunks(2) {
                    out(Record::Rhs(pair[0], parse_number(self.line, pair[1])?))?;
                }
                Ok(())
            }
            Section::Bounds if f.len() == 3 || f.len() == 4 => {
                let kind = BoundKind::parse(f[0])
                    .ok_or_else(|| LpError::parse(self.line, format!("bad bound type `{}`", f[0])))?;
                let value = match (kind.takes_value(), f.get(3)) {
                    (true, Some(v)) => Some(parse_number(self.line, v)?),
                    (false, None) => None,
                    _ => return Err(LpError::parse(self.line, "bound value arity")),
                };
                out(Record::Bound(kind, f[2], value))
            }
            s => Err(LpError::parse(self.line, format!("unexpected data line in {s:?}"))),
        }
    }

    fn sense(&self, s: &str) -> Result<bool> {
        match s {
            "MAX" | "MAXIMIZE" => Ok(true),
            "MIN" | "MINIMIZE" => Ok(false),
            _ => Err(LpError::parse(self.line, format!("bad objective sense `{s}`"))),
        }
    }

    fn finish(&self) -> Result<()> {
        if self.section != Section::End {
            return Err(LpError::parse(self.line, "missing ENDATA"));
        }
        Ok(())
    }
}

fn parse_document(input: impl BufRead) -> Result<MpsDocument> {
    let mut doc = MpsDocument {
        name: String::new(),
        maximize: false,
        rows: Vec::new(),
        columns: Vec::new(),
        rhs: Vec::new(),
        bounds: Vec::new(),
    };
    let mut row_names: HashSet<String> = HashSet::new();
    let mut lexer = Lexer::new();
    for raw in input.lines() {
        let raw = raw?;
        let line_no = lexer.line + 1;
        lexer.line(&raw, &mut |rec| {
            match rec {
                Record::Name(n) => doc.name = n.to_string(),
                Record::Sense(max) => doc.maximize = max,
                Record::Row(t, name) => {
                    if !row_names.insert(name.to_string()) {
                        return Err(LpError::parse(line_no, format!("duplicate row `{name}`")));
                    }
                    doc.rows.push((t, name.to_string()));
                }
                Record::Entry(col, row, v) => {
                    if !row_names.contains(row) {
                        return Err(LpError::parse(line_no, format!("unknown row `{row}`")));
                    }
                    if doc.columns.last().map(|c| c.name.as_str()) != Some(col) {
                        doc.columns.push(MpsColumn {
                            name: col.to_string(),
                            entries: Vec::new(),
                        });
                    }
                    doc.columns.last_mut().unwrap().entries.push((row.to_string(), v));
                }
                Record::Rhs(row, v) => {
                    if !row_names.contains(row) {
                        return Err(LpError::parse(line_no, format!("unknown row `{row}`")));
                    }
                    doc.rhs.push((row.to_string(), v));
                }
                Record::Bound(kind, col, value) => doc.bounds.push(MpsBound {
                    kind,
                    column: col.to_string(),
                    value,
                }),
            }
            Ok(())
        })?;
    }
    lexer.finish()?;
    let mut seen = HashSet::new();
    for c in &doc.columns {
        if !seen.insert(c.name.as_str()) {
            return Err(LpError::parse(0, format!("column `{}` is not contiguous", c.name)));
        }
    }
    for b in &doc.bounds {
        if !seen.contains(b.column.as_str()) {
            return Err(LpError::parse(0, format!("bound on unknown column `{}`", b.column)));
        }
    }
    Ok(doc)
}

pub fn read_mps(input: impl BufRead) -> Result<MpsDocument> {
    parse_document(input)
}

/// Hashes are already uniform; no need to rehash them.
#[derive(Default)]
struct PassThrough(u64);

impl Hasher for PassThrough {
    fn finish(&self) -> u64 {
        self.0
    }
    fn write(&mut self, _: &[u8]) {
        unreachable!("only u64 keys")
    }
    fn write_u64(&mut self, v: u64) {
        self.0 = v;
    }
}

type HashedNames = HashSet<u64, BuildHasherDefault<PassThrough>>;

fn name_hash(s: &str) -> u64 {
    let mut h = DefaultHasher::new();
    s.hash(&mut h);
    h.finish()
}

/// Structural check of an MPS stream without holding it in memory. Names are
/// tracked by 64-bit hash.
pub fn validate_mps(input: impl BufRead) -> Result<MpsSummary> {
    let mut summary = MpsSummary::default();
    let mut rows = HashedNames::default();
    let mut columns = HashedNames::default();
    let mut current: Option<String> = None;
    let mut objective_rows = 0;
    let mut lexer = Lexer::new();
    let mut raw = String::new();
    let mut input = input;
    loop {
        raw.clear();
        if input.read_line(&mut raw)? == 0 {
            break;
        }
        let line_no = lexer.line + 1;
        lexer.line(&raw, &mut |rec| {
            match rec {
                Record::Name(_) | Record::Sense(_) => {}
                Record::Row(t, name) => {
                    if t == RowType::N {
                        objective_rows += 1;
                    }
                    if !rows.insert(name_hash(name)) {
                        return Err(LpError::parse(line_no, format!("duplicate row `{name}`")));
                    }
                    summary.rows += 1;
                }
                Record::Entry(col, row, _) => {
                    if !rows.contains(&name_hash(row)) {
                        return Err(LpError::parse(line_no, format!("unknown row `{row}`")));
                    }
                    if current.as_deref() != Some(col) {
                        if !columns.insert(name_hash(col)) {
                            return Err(LpError::parse(line_no, format!("column `{col}` is not contiguous")));
                        }
                        current = Some(col.to_string());
                        summary.columns += 1;
                    }
                    summary.nonzeros += 1;
                }
                Record::Rhs(row, _) => {
                    if !rows.contains(&name_hash(row)) {
                        return Err(LpError::parse(line_no, format!("unknown row `{row}`")));
                    }
                    summary.rhs += 1;
                }
                Record::Bound(_, col, _) => {
                    if !columns.contains(&name_hash(col)) {
                        return Err(LpError::parse(line_no, format!("bound on unknown column `{col}`")));
                    }
                    summary.bounds += 1;
                }
            }
            Ok(())
        })?;
    }
    lexer.finish()?;
    if objective_rows != 1 {
        return Err(LpError::parse(0, format!("{objective_rows} objective rows")));
    }
    Ok(summary)
}

/// Largest k the streaming exporter's packed indices support.
pub const STREAMING_MAX_K: u32 = 126;

fn pack_row(key: &RowKey) -> u64 {
    let (tag, a, b, c, d, e): (u64, u32, u32, u32, u32, u32) = match *key {
        RowKey::MonoBuyer { i, j } => (0, i, j, 0, 0, 0),
        RowKey::MonoItem { i, j } => (1, i, j, 0, 0, 0),
        RowKey::HUnmatched { x_u, x_ustar } => (2, x_u, x_ustar, 0, 0, 0),
        RowKey::HNoBackup {
            x_u,
            x_v,
            x_ustar,
            branch,
        } => (3, x_u, x_v, x_ustar, 0, branch_code(branch)),
        RowKey::HWithBackup {
            x_u,
            x_v,
            x_b,
            x_ustar,
            branch,
        } => (4, x_u, x_v, x_b, x_ustar, branch_code(branch)),
        RowKey::DefNoBackup { x_u, x_v } => (5, x_u, x_v, 0, 0, 0),
        RowKey::DefWithBackup { x_u, x_v, x_b } => (6, x_u, x_v, x_b, 0, 0),
        RowKey::BoundUnmatched { x_u } => (7, x_u, 0, 0, 0, 0),
        RowKey::BoundNoBackup { x_u, c } => (8, x_u, c, 0, 0, 0),
        RowKey::BoundWithBackup { x_u, c, d } => (9, x_u, c, d, 0, 0),
        RowKey::Average => (10, 0, 0, 0, 0, 0),
    };
    tag << 60
        | (a as u64) << 48
        | (b as u64) << 36
        | (c as u64) << 24
        | (d as u64) << 12
        | e as u64
}

fn branch_code(b: Branch) -> u32 {
    match b {
        Branch::Only => 0,
        Branch::First => 1,
        Branch::Second => 2,
    }
}

fn unpack_row(p: u64) -> RowKey {
    let field = |shift: u32| ((p >> shift) & 0xfff) as u32;
    let (a, b, c, d, e) = (field(48), field(36), field(24), field(12), field(0));
    let branch = match e {
        0 => Branch::Only,
        1 => Branch::First,
        _ => Branch::Second,
    };
    match p >> 60 {
        0 => RowKey::MonoBuyer { i: a, j: b },
        1 => RowKey::MonoItem { i: a, j: b },
        2 => RowKey::HUnmatched { x_u: a, x_ustar: b },
        3 => RowKey::HNoBackup {
            x_u: a,
            x_v: b,
            x_ustar: c,
            branch,
        },
        4 => RowKey::HWithBackup {
            x_u: a,
            x_v: b,
            x_b: c,
            x_ustar: d,
            branch,
        },
        5 => RowKey::DefNoBackup { x_u: a, x_v: b },
        6 => RowKey::DefWithBackup { x_u: a, x_v: b, x_b: c },
        7 => RowKey::BoundUnmatched { x_u: a },
        8 => RowKey::BoundNoBackup { x_u: a, c: b },
        9 => RowKey::BoundWithBackup { x_u: a, c: b, d: c },
        _ => RowKey::Average,
    }
}

const F_BITS: u32 = 14;
const ROW_BITS: u32 = 28;
const CODE_BITS: u32 = 64 - F_BITS - ROW_BITS;

/// Interned coefficient values.
#[derive(Default)]
struct Coefs {
    codes: HashMap<Coef, u64>,
    values: Vec<f64>,
}

impl Coefs {
    fn code(&mut self, c: &Coef) -> u64 {
        if let Some(&code) = self.codes.get(c) {
            return code;
        }
        let code = self.values.len() as u64;
        assert!(code < 1 << CODE_BITS, "too many distinct coefficients");
        self.values.push(to_f64(c));
        self.codes.insert(*c, code);
        code
    }
}

/// Non-f columns of one α block, in registration order, with their entries.
fn block_columns(k: u32, x_u: u32, mut out: impl FnMut(ColKey, &[(RowKey, Coef)]) -> std::io::Result<()>) -> std::io::Result<()> {
    use ranking_core::gain::{h_no_backup_expr, h_with_backup_expr};
    let one = Coef::from(1);
    let inv_k = Coef::new(1, k as i64);
    let mut entries = Vec::new();

    entries.push((RowKey::BoundUnmatched { x_u }, one));
    for c in 1..=k {
        entries.push((RowKey::BoundNoBackup { x_u, c }, one));
    }
    for c in 1..=k {
        for d in c..=k {
            entries.push((RowKey::BoundWithBackup { x_u, c, d }, one));
        }
    }
    entries.push((RowKey::Average, -inv_k));
    out(ColKey::AlphaBucket(x_u), &entries)?;

    for x_v in 1..=k {
        for x_ustar in 1..=k {
            if h_no_backup_expr(x_u, x_v, x_ustar).is_min() {
                let row = |branch| RowKey::HNoBackup {
                    x_u,
                    x_v,
                    x_ustar,
                    branch,
                };
                let e = [
                    (row(Branch::First), one),
                    (row(Branch::Second), one),
                    (RowKey::DefNoBackup { x_u, x_v }, -inv_k),
                ];
                out(ColKey::HNoBackup { x_u, x_v, x_ustar }, &e)?;
            }
        }
        entries.clear();
        entries.push((RowKey::DefNoBackup { x_u, x_v }, one));
        for c in 1..=x_v {
            entries.push((RowKey::BoundNoBackup { x_u, c }, -Coef::new(1, (k - c + 1) as i64)));
        }
        out(ColKey::AvgNoBackup { x_u, x_v }, &entries)?;
    }
    for x_v in 1..=k {
        for x_b in x_v + 1..=k + 1 {
            for x_ustar in 1..=k {
                if h_with_backup_expr(x_u, x_v, x_b, x_ustar).is_min() {
                    let row = |branch| RowKey::HWithBackup {
                        x_u,
                        x_v,
                        x_b,
                        x_ustar,
                        branch,
                    };
                    let e = [
                        (row(Branch::First), one),
                        (row(Branch::Second), one),
                        (RowKey::DefWithBackup { x_u, x_v, x_b }, -inv_k),
                    ];
                    out(
                        ColKey::HWithBackup {
                            x_u,
                            x_v,
                            x_b,
                            x_ustar,
                        },
                        &e,
                    )?;
                }
            }
            entries.clear();
            entries.push((RowKey::DefWithBackup { x_u, x_v, x_b }, one));
            let d = x_b - 1;
            for c in 1..=x_v {
                entries.push((RowKey::BoundWithBackup { x_u, c, d }, -Coef::new(1, (d - c + 1) as i64)));
            }
            out(ColKey::AvgWithBackup { x_u, x_v, x_b }, &entries)?;
        }
    }
    Ok(())
}

/// Writes the aggregated formulation for `k` without materializing the model.
/// Output is byte-identical to `export_mps(&build_lp_with(k, Aggregated))`.
pub fn export_mps_streaming(k: u32, w: &mut impl Write) -> Result<MpsSummary> {
    if k == 0 || k > STREAMING_MAX_K {
        return Err(LpError::InvalidParameter(format!(
            "streaming export supports 1 ≤ k ≤ {STREAMING_MAX_K}"
        )));
    }
    let form = Formulation::Aggregated;
    let side = k + 1;
    let mut summary = MpsSummary::default();
    write_header(w, &model_name(k, form), true)?;
    write_row(w, RowType::N, OBJECTIVE_ROW)?;
    summary.rows = 1;

    let mut row_keys: Vec<u64> = Vec::new();
    let mut f_entries: Vec<u64> = Vec::new();
    let mut coefs = Coefs::default();
    let mut io_error = None;
    for_each_row(k, form, &mut |key: RowKey, sense: Sense, _rhs: &Coef, entries: &[(ColKey, Coef)]| {
        if io_error.is_some() {
            return;
        }
        if let Err(e) = write_row(w, sense.into(), &key.to_string()) {
            io_error = Some(e);
            return;
        }
        let seq = row_keys.len() as u64;
        row_keys.push(pack_row(&key));
        for (col, c) in entries {
            if let ColKey::F { buyer, item } = *col {
                let fcol = ((buyer - 1) * side + item - 1) as u64;
                f_entries.push(fcol << (ROW_BITS + CODE_BITS) | seq << CODE_BITS | coefs.code(c));
            }
        }
    });
    if let Some(e) = io_error {
        return Err(e.into());
    }
    assert!((row_keys.len() as u64) < 1 << ROW_BITS, "row count exceeds packing");
    summary.rows += row_keys.len();

    writeln!(w, "COLUMNS")?;
    f_entries.sort_unstable();
    let mut name = String::new();
    let mut last_fcol = u64::MAX;
    for &p in &f_entries {
        let fcol = p >> (ROW_BITS + CODE_BITS);
        if fcol != last_fcol {
            last_fcol = fcol;
            name = ColKey::F {
                buyer: (fcol / side as u64) as u32 + 1,
                item: (fcol % side as u64) as u32 + 1,
            }
            .to_string();
            summary.columns += 1;
        }
        let seq = (p >> CODE_BITS) & ((1 << ROW_BITS) - 1);
        let v = coefs.values[(p & ((1 << CODE_BITS) - 1)) as usize];
        write_entry(w, &name, &unpack_row(row_keys[seq as usize]).to_string(), v)?;
    }
    summary.nonzeros += f_entries.len();
    drop(f_entries);
    drop(row_keys);

    let alpha = ColKey::Alpha.to_string();
    write_entry(w, &alpha, OBJECTIVE_ROW, 1.0)?;
    write_entry(w, &alpha, &RowKey::Average.to_string(), 1.0)?;
    summary.columns += 1;
    summary.nonzeros += 2;
    let mut block_cols = 0usize;
    let mut block_nnz = 0usize;
    for x_u in 1..=k {
        block_columns(k, x_u, |col, entries| {
            let name = col.to_string();
            for (row, c) in entries {
                write_entry(w, &name, &row.to_string(), to_f64(c))?;
            }
            block_cols += 1;
            block_nnz += entries.len();
            Ok(())
        })?;
    }
    summary.columns += block_cols;
    summary.nonzeros += block_nnz;

    writeln!(w, "RHS")?;
    let mut io_error = None;
    for_each_row(k, form, &mut |key: RowKey, _: Sense, rhs: &Coef, _: &[(ColKey, Coef)]| {
        if io_error.is_none() && !rhs.is_zero() {
            summary.rhs += 1;
            if let Err(e) = write_rhs(w, &key.to_string(), to_f64(rhs)) {
                io_error = Some(e);
            }
        }
    });
    if let Some(e) = io_error {
        return Err(e.into());
    }

    writeln!(w, "BOUNDS")?;
    for buyer in 1..=side {
        for item in 1..=side {
            let key = ColKey::F { buyer, item };
            let (lo, hi) = column_bounds(k, &key);
            for (kind, value) in bounds_of(lo.as_ref().map(to_f64), hi.as_ref().map(to_f64)) {
                write_bound(w, kind, &key.to_string(), value)?;
                summary.bounds += 1;
            }
        }
    }
    write_bound(w, BoundKind::Fr, &alpha, None)?;
    summary.bounds += 1;
    for x_u in 1..=k {
        block_columns(k, x_u, |col, _| {
            summary.bounds += 1;
            write_bound(w, BoundKind::Fr, &col.to_string(), None)
        })?;
    }
    writeln!(w, "ENDATA")?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::build::{build_lp, build_lp_with};

    #[test]
    fn k1_round_trip() {
        let m = build_lp(1).unwrap();
        let doc = MpsDocument::from_model(&m);
        let text = doc.to_text();
        assert!(text.contains(" N  obj"));
        assert!(text.contains("alpha_1"));
        assert!(text.contains("f_1_1"));
        let back = MpsDocument::parse(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_text(), text);
        assert_eq!(back.columns.len(), m.columns.len());
        assert_eq!(back.rows.len(), m.rows.len() + 1);
    }

    #[test]
    fn round_trip_recovers_sparse_data() {
        for form in [Formulation::Substituted, Formulation::Naive, Formulation::Aggregated] {
            let m = build_lp_with(3, form).unwrap();
            let text = MpsDocument::from_model(&m).to_text();
            let back = MpsDocument::parse(&text).unwrap();
            for (col, parsed) in m.columns.iter().zip(&back.columns) {
                assert_eq!(col.key.to_string(), parsed.name);
            }
            let mut nnz = 0;
            for (j, parsed) in back.columns.iter().enumerate() {
                for (row, v) in &parsed.entries {
                    if row == OBJECTIVE_ROW {
                        continue;
                    }
                    let r = m.rows.iter().find(|r| &r.key.to_string() == row).unwrap();
                    let c = r.entries.iter().find(|e| e.0 == j).unwrap().1;
                    assert_eq!(to_f64(&c).to_bits(), v.to_bits());
                    nnz += 1;
                }
            }
            assert_eq!(nnz, m.dimensions().nonzeros);
            assert_eq!(validate_mps(text.as_bytes()).unwrap(), back.summary());
        }
    }

    #[test]
    fn streaming_matches_generic() {
        for k in 1..=5 {
            let generic = MpsDocument::from_model(&build_lp_with(k, Formulation::Aggregated).unwrap());
            let mut buf = Vec::new();
            let summary = export_mps_streaming(k, &mut buf).unwrap();
            let text = String::from_utf8(buf).unwrap();
            assert_eq!(text, generic.to_text(), "k = {k}");
            assert_eq!(summary, generic.summary());
        }
    }

    #[test]
    fn row_packing_round_trips() {
        let k = 4;
        for_each_row(k, Formulation::Naive, &mut |key: RowKey, _: Sense, _: &Coef, _: &[(ColKey, Coef)]| {
            assert_eq!(unpack_row(pack_row(&key)), key);
        });
    }

    #[test]
    fn validator_rejects_broken_files() {
        let text = MpsDocument::from_model(&build_lp(2).unwrap()).to_text();
        assert!(validate_mps(text.replace("ENDATA", "").as_bytes()).is_err());
        assert!(validate_mps(text.replacen("mono_r_1_1", "nope", 2).as_bytes()).is_err());
        let moved = text.replacen("COLUMNS\n", "COLUMNS\n    alpha  obj  1\n", 1);
        assert!(validate_mps(moved.as_bytes()).is_err());
        assert!(MpsDocument::parse("NAME x\nROWS\n N obj\n").is_err());
    }
}
