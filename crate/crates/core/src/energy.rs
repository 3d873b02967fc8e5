//! Pairwise energy functions over finite domains, belief tables, and the
//! line-oriented model file format.
//!
//! An [`EnergyModel`] describes
//!
//! ```text
//! E(x_1, ..., x_n) = sum_i e_i(x_i) + sum_{i<j} e_ij(x_i, x_j)
//! ```
//!
//! with every pairwise table stored once per unordered pair. Reading the
//! pair in the opposite orientation is a transposed view, so the symmetry
//! `e_ij(a, b) = e_ji(b, a)` holds by construction.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Dense `rows x cols` table of pairwise energies, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PairTable {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl PairTable {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidArgument(format!(
                "pair table has {} entries, expected {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let data = (0..rows)
            .flat_map(|a| (0..cols).map(move |b| (a, b)))
            .map(|(a, b)| f(a, b))
            .collect();
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.data[a * self.cols + b]
    }

    pub fn transposed(&self) -> PairTable {
        PairTable::from_fn(self.cols, self.rows, |b, a| self.get(a, b))
    }

    fn entries(&self) -> &[f64] {
        &self.data
    }
}

/// One neighbour of a variable: `other` plus the orientation of the stored
/// table relative to the owning variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neighbor {
    pub other: usize,
    key: (usize, usize),
}

/// A pairwise energy function over `n` finite-domain variables.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyModel {
    domains: Vec<usize>,
    unary: Vec<Vec<f64>>,
    pairwise: BTreeMap<(usize, usize), PairTable>,
    neighbors: Vec<Vec<Neighbor>>,
    hbar: f64,
}

/// A broken [`EnergyModel`] invariant, as reported by [`EnergyModel::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    EmptyDomain { var: usize },
    NonPositiveHbar(f64),
    NonFiniteUnary { var: usize, value: usize },
    NonFinitePair { i: usize, j: usize, a: usize, b: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyDomain { var } => write!(f, "variable {var} has an empty domain"),
            Violation::NonPositiveHbar(h) => write!(f, "hbar must be positive, got {h}"),
            Violation::NonFiniteUnary { var, value } => {
                write!(f, "unary energy e_{var}({value}) is not finite")
            }
            Violation::NonFinitePair { i, j, a, b } => {
                write!(f, "pairwise energy e_{i}{j}({a}, {b}) is not finite")
            }
        }
    }
}

impl EnergyModel {
    /// Creates a model with the given unary tables and no pairwise terms.
    ///
    /// Only shapes are checked here; value invariants are reported by
    /// [`validate`](Self::validate) and enforced by the solvers.
    pub fn new(unary: Vec<Vec<f64>>, hbar: f64) -> Self {
        let domains = unary.iter().map(Vec::len).collect();
        let n = unary.len();
        Self {
            domains,
            unary,
            pairwise: BTreeMap::new(),
            neighbors: vec![Vec::new(); n],
            hbar,
        }
    }

    /// Adds `e_ij`, given in `(i, j)` orientation (`|D_i|` rows, `|D_j|` columns).
    /// Replaces any table previously stored for the unordered pair.
    pub fn set_pair(&mut self, i: usize, j: usize, table: PairTable) -> Result<()> {
        let n = self.n();
        if i >= n || j >= n {
            return Err(Error::InvalidArgument(format!(
                "pair ({i}, {j}) out of range for {n} variables"
            )));
        }
        if i == j {
            return Err(Error::InvalidArgument(format!("self pair ({i}, {i})")));
        }
        if table.rows() != self.domains[i] || table.cols() != self.domains[j] {
            return Err(Error::InvalidArgument(format!(
                "pair ({i}, {j}) table is {}x{}, domains are {}x{}",
                table.rows(),
                table.cols(),
                self.domains[i],
                self.domains[j]
            )));
        }
        let (key, table) = if i < j {
            ((i, j), table)
        } else {
            ((j, i), table.transposed())
        };
        if self.pairwise.insert(key, table).is_none() {
            self.neighbors[key.0].push(Neighbor { other: key.1, key });
            self.neighbors[key.1].push(Neighbor { other: key.0, key });
            self.neighbors[key.0].sort_by_key(|nb| nb.other);
            self.neighbors[key.1].sort_by_key(|nb| nb.other);
        }
        Ok(())
    }

    pub fn with_pair(mut self, i: usize, j: usize, table: PairTable) -> Result<Self> {
        self.set_pair(i, j, table)?;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.domains.len()
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn set_hbar(&mut self, hbar: f64) {
        self.hbar = hbar;
    }

    pub fn domains(&self) -> &[usize] {
        &self.domains
    }

    pub fn domain(&self, i: usize) -> usize {
        self.domains[i]
    }

    pub fn unary(&self, i: usize) -> &[f64] {
        &self.unary[i]
    }

    pub fn unary_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.unary[i]
    }

    /// Neighbours of `i`, sorted by index.
    pub fn neighbors(&self, i: usize) -> &[Neighbor] {
        &self.neighbors[i]
    }

    /// Stored pairs in `(i < j)` orientation.
    pub fn pairs(&self) -> impl Iterator<Item = ((usize, usize), &PairTable)> {
        self.pairwise.iter().map(|(k, t)| (*k, t))
    }

    pub fn pair_count(&self) -> usize {
        self.pairwise.len()
    }

    /// `e_ij(a, b)` with `a` indexing the domain of `i`. Missing pairs are zero.
    pub fn pair_energy(&self, i: usize, j: usize, a: usize, b: usize) -> f64 {
        if i < j {
            self.pairwise.get(&(i, j)).map_or(0.0, |t| t.get(a, b))
        } else {
            self.pairwise.get(&(j, i)).map_or(0.0, |t| t.get(b, a))
        }
    }

    /// `e_{owner, nb.other}(a, b)` through a neighbour handle.
    #[inline]
    pub(crate) fn neighbor_energy(&self, owner: usize, nb: &Neighbor, a: usize, b: usize) -> f64 {
        let t = &self.pairwise[&nb.key];
        if owner == nb.key.0 {
            t.get(a, b)
        } else {
            t.get(b, a)
        }
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (var, &d) in self.domains.iter().enumerate() {
            if d == 0 {
                out.push(Violation::EmptyDomain { var });
            }
        }
        if !(self.hbar > 0.0) || !self.hbar.is_finite() {
            out.push(Violation::NonPositiveHbar(self.hbar));
        }
        for (var, table) in self.unary.iter().enumerate() {
            for (value, e) in table.iter().enumerate() {
                if !e.is_finite() {
                    out.push(Violation::NonFiniteUnary { var, value });
                }
            }
        }
        for (&(i, j), t) in &self.pairwise {
            for a in 0..t.rows() {
                for b in 0..t.cols() {
                    if !t.get(a, b).is_finite() {
                        out.push(Violation::NonFinitePair { i, j, a, b });
                    }
                }
            }
        }
        out
    }

    pub(crate) fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidModel(v))
        }
    }

    pub(crate) fn check_assignment(&self, a: &Assignment) -> Result<()> {
        if a.len() != self.n() {
            return Err(Error::InvalidArgument(format!(
                "assignment has {} values, model has {} variables",
                a.len(),
                self.n()
            )));
        }
        for (i, (&v, &d)) in a.values().iter().zip(&self.domains).enumerate() {
            if v >= d {
                return Err(Error::InvalidArgument(format!(
                    "value {v} of variable {i} outside domain of size {d}"
                )));
            }
        }
        Ok(())
    }
}

/// One domain index per variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment(Vec<usize>);

impl Assignment {
    pub fn new(values: Vec<usize>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<usize>> for Assignment {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

/// Per-variable belief tables `psi_i`, each non-negative and summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftAssignmentSet {
    beliefs: Vec<Vec<f64>>,
}

impl SoftAssignmentSet {
    pub fn uniform(domains: &[usize]) -> Self {
        let beliefs = domains.iter().map(|&d| vec![1.0 / d as f64; d]).collect();
        Self { beliefs }
    }

    pub fn delta(domains: &[usize], a: &Assignment) -> Result<Self> {
        if a.len() != domains.len() {
            return Err(Error::InvalidArgument(format!(
                "assignment has {} values, expected {}",
                a.len(),
                domains.len()
            )));
        }
        let mut beliefs = Vec::with_capacity(domains.len());
        for (i, (&d, &v)) in domains.iter().zip(a.values()).enumerate() {
            if v >= d {
                return Err(Error::InvalidArgument(format!(
                    "value {v} of variable {i} outside domain of size {d}"
                )));
            }
            let mut t = vec![0.0; d];
            t[v] = 1.0;
            beliefs.push(t);
        }
        Ok(Self { beliefs })
    }

    /// Normalizes each table by its sum `Z_i`. Rejects negative, non-finite,
    /// or all-zero tables.
    pub fn from_tables(tables: Vec<Vec<f64>>) -> Result<Self> {
        let mut beliefs = tables;
        for (i, t) in beliefs.iter_mut().enumerate() {
            if t.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "belief table {i} has a negative or non-finite entry"
                )));
            }
            let z: f64 = t.iter().sum();
            if !(z > 0.0) {
                return Err(Error::Underflow { var: i });
            }
            t.iter_mut().for_each(|v| *v /= z);
        }
        Ok(Self { beliefs })
    }

    /// Wraps tables that are already normalized.
    pub(crate) fn from_normalized(beliefs: Vec<Vec<f64>>) -> Self {
        Self { beliefs }
    }

    pub fn n(&self) -> usize {
        self.beliefs.len()
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.beliefs[i]
    }

    pub fn tables(&self) -> &[Vec<f64>] {
        &self.beliefs
    }

    pub fn matches(&self, domains: &[usize]) -> bool {
        self.beliefs.len() == domains.len() && self.beliefs.iter().zip(domains).all(|(t, &d)| t.len() == d)
    }

    /// Largest deviation of any table sum from one, and whether every
    /// entry is finite and non-negative.
    pub fn normalization_error(&self) -> (f64, bool) {
        let mut worst = 0.0f64;
        let mut ok = true;
        for t in &self.beliefs {
            ok &= t.iter().all(|v| v.is_finite() && *v >= 0.0);
            worst = worst.max((t.iter().sum::<f64>() - 1.0).abs());
        }
        (worst, ok)
    }

    /// `max_i sum_x |self_i(x) - other_i(x)|`.
    pub fn max_l1_distance(&self, other: &SoftAssignmentSet) -> f64 {
        self.beliefs
            .iter()
            .zip(&other.beliefs)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// `sum_i e_i(a_i) + sum_{i<j} e_ij(a_i, a_j)`.
pub fn total_energy(model: &EnergyModel, a: &Assignment) -> Result<f64> {
    model.check_assignment(a)?;
    let v = a.values();
    let unary: f64 = (0..model.n()).map(|i| model.unary(i)[v[i]]).sum();
    let pair: f64 = model.pairs().map(|((i, j), t)| t.get(v[i], v[j])).sum();
    Ok(unary + pair)
}

/// Serializes a model in the `pem 1` text format.
pub fn write_model_file(model: &EnergyModel) -> String {
    use std::fmt::Write;
    let mut s = String::new();
    let _ = writeln!(s, "pem 1 {} {:?}", model.n(), model.hbar());
    for (i, d) in model.domains().iter().enumerate() {
        let _ = writeln!(s, "dom {i} {d}");
    }
    for i in 0..model.n() {
        let _ = write!(s, "un {i}");
        for v in model.unary(i) {
            let _ = write!(s, " {v:?}");
        }
        s.push('\n');
    }
    for ((i, j), t) in model.pairs() {
        let _ = writeln!(s, "pw {i} {j}");
        for row in t.entries().chunks(t.cols()) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            let _ = writeln!(s, "{}", line.join(" "));
        }
    }
    s
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_real(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| parse_err(line, format!("invalid real `{tok}`")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite entry `{tok}`")));
    }
    Ok(v)
}

fn parse_index(tok: Option<&str>, line: usize, what: &str) -> Result<usize> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(line, format!("invalid {what} `{tok}`")))
}

/// Parses the `pem 1` text format. Both orientations of a pair may appear;
/// they must agree exactly.
pub fn parse_model_file(text: &str) -> Result<EnergyModel> {
    // (line number, tokens) with comments and blank lines removed
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.split('#').next().unwrap_or("")))
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| (k, l.split_whitespace().collect::<Vec<_>>()));

    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "empty model file"))?;
    if header.len() != 4 || header[0] != "pem" || header[1] != "1" {
        return Err(parse_err(hline, "malformed header, expected `pem 1 <n> <hbar>`"));
    }
    let n: usize = header[2]
        .parse()
        .map_err(|_| parse_err(hline, format!("invalid variable count `{}`", header[2])))?;
    let hbar = parse_real(header[3], hline)?;

    let mut domains: Vec<Option<usize>> = vec![None; n];
    let mut unary: Vec<Option<Vec<f64>>> = vec![None; n];
    let mut pairs: BTreeMap<(usize, usize), (usize, PairTable)> = BTreeMap::new();

    let domain_of = |domains: &[Option<usize>], i: usize, line: usize| -> Result<usize> {
        domains
            .get(i)
            .copied()
            .flatten()
            .ok_or_else(|| parse_err(line, format!("variable {i} used before its `dom` line")))
    };
    let check_var = |i: usize, line: usize| -> Result<()> {
        if i >= n {
            Err(parse_err(line, format!("variable {i} out of range for {n} variables")))
        } else {
            Ok(())
        }
    };

    while let Some((line, toks)) = lines.next() {
        match toks[0] {
            "dom" => {
                if toks.len() != 3 {
                    return Err(parse_err(line, "expected `dom i |D_i|`"));
                }
                let i = parse_index(toks.get(1).copied(), line, "variable index")?;
                check_var(i, line)?;
                let d = parse_index(toks.get(2).copied(), line, "domain size")?;
                if d == 0 {
                    return Err(parse_err(line, format!("variable {i} has an empty domain")));
                }
                if domains[i].replace(d).is_some() {
                    return Err(parse_err(line, format!("duplicate `dom` for variable {i}")));
                }
            }
            "un" => {
                let i = parse_index(toks.get(1).copied(), line, "variable index")?;
                check_var(i, line)?;
                let d = domain_of(&domains, i, line)?;
                let vals = toks[2..]
                    .iter()
                    .map(|t| parse_real(t, line))
                    .collect::<Result<Vec<_>>>()?;
                if vals.len() != d {
                    return Err(parse_err(
                        line,
                        format!("unary table of variable {i} has {} entries, domain is {d}", vals.len()),
                    ));
                }
                if unary[i].replace(vals).is_some() {
                    return Err(parse_err(line, format!("duplicate `un` for variable {i}")));
                }
            }
            "pw" => {
                if toks.len() != 3 {
                    return Err(parse_err(line, "expected `pw i j`"));
                }
                let i = parse_index(toks.get(1).copied(), line, "variable index")?;
                let j = parse_index(toks.get(2).copied(), line, "variable index")?;
                check_var(i, line)?;
                check_var(j, line)?;
                if i == j {
                    return Err(parse_err(line, format!("self pair ({i}, {i})")));
                }
                let di = domain_of(&domains, i, line)?;
                let dj = domain_of(&domains, j, line)?;
                let mut data = Vec::with_capacity(di * dj);
                for _ in 0..di {
                    let (rline, row) = lines
                        .next()
                        .ok_or_else(|| parse_err(line, format!("pair ({i}, {j}) truncated")))?;
                    if row.len() != dj {
                        return Err(parse_err(
                            rline,
                            format!("pair ({i}, {j}) row has {} entries, expected {dj}", row.len()),
                        ));
                    }
                    for t in row {
                        data.push(parse_real(t, rline)?);
                    }
                }
                let table = PairTable::new(di, dj, data)?;
                let (key, table) = if i < j {
                    ((i, j), table)
                } else {
                    ((j, i), table.transposed())
                };
                if let Some((first, existing)) = pairs.get(&key) {
                    if *existing != table {
                        return Err(Error::Symmetry {
                            line,
                            i,
                            j,
                            message: format!("disagrees with the table given on line {first}"),
                        });
                    }
                } else {
                    pairs.insert(key, (line, table));
                }
            }
            other => return Err(parse_err(line, format!("unknown record `{other}`"))),
        }
    }

    let mut tables = Vec::with_capacity(n);
    for i in 0..n {
        let d = domains[i].ok_or_else(|| parse_err(hline, format!("missing `dom` for variable {i}")))?;
        tables.push(unary[i].take().unwrap_or_else(|| vec![0.0; d]));
    }
    let mut model = EnergyModel::new(tables, hbar);
    for ((i, j), (_, t)) in pairs {
        model.set_pair(i, j, t)?;
    }
    Ok(model)
}
