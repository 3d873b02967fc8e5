//! Binary LDPC codes and their decoders.
//!
//! Codes are stored as Tanner-graph adjacency in both directions. Messages
//! live on edges, numbered check by check, so every decoder can walk a
//! check's edges contiguously and a variable's edges through an index list.

mod bp;
mod channel;
mod gapp;
mod sim;

pub use bp::bp_decode;
pub use channel::{transmit, transmit_with, trial_rng, Channel, Received, LLR_CLAMP};
pub use gapp::{gapp_decode, GappDecoder, Posterior};
pub use sim::{monte_carlo, sweep, sweep_csv, BerStats, ChannelKind, DecoderConfig, SweepRow};

use std::fmt::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Check-to-variable messages are capped at this magnitude.
pub const MSG_CAP: f64 = 500.0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeResult {
    pub bits: Vec<u8>,
    pub iterations: usize,
    pub syndrome_ok: bool,
    /// The decoder stopped early on a satisfied syndrome.
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LdpcCode {
    n: usize,
    check_vars: Vec<Vec<usize>>,
    var_checks: Vec<Vec<usize>>,
    /// Edge ids of each variable, in the order of `var_checks`.
    var_edges: Vec<Vec<usize>>,
    /// First edge id of each check; check `c` owns `offsets[c]..offsets[c+1]`.
    offsets: Vec<usize>,
}

impl LdpcCode {
    /// Builds a code from the variable lists of each check (0-indexed).
    pub fn from_checks(n: usize, check_vars: Vec<Vec<usize>>) -> Result<Self> {
        let mut var_checks = vec![Vec::new(); n];
        let mut var_edges = vec![Vec::new(); n];
        let mut offsets = Vec::with_capacity(check_vars.len() + 1);
        let mut edge = 0;
        for (c, vars) in check_vars.iter().enumerate() {
            offsets.push(edge);
            let mut seen = vars.clone();
            seen.sort_unstable();
            if seen.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidArgument(format!("check {c} lists a variable twice")));
            }
            for &v in vars {
                if v >= n {
                    return Err(Error::InvalidArgument(format!(
                        "check {c} references variable {v}, block length is {n}"
                    )));
                }
                var_checks[v].push(c);
                var_edges[v].push(edge);
                edge += 1;
            }
        }
        offsets.push(edge);
        if let Some(v) = var_checks.iter().position(Vec::is_empty) {
            return Err(Error::InvalidArgument(format!("variable {v} is in no check")));
        }
        Ok(Self {
            n,
            check_vars,
            var_checks,
            var_edges,
            offsets,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.check_vars.len()
    }

    pub fn edges(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    pub fn check_vars(&self, c: usize) -> &[usize] {
        &self.check_vars[c]
    }

    pub fn var_checks(&self, v: usize) -> &[usize] {
        &self.var_checks[v]
    }

    pub fn var_degree(&self, v: usize) -> usize {
        self.var_checks[v].len()
    }

    pub fn check_degree(&self, c: usize) -> usize {
        self.check_vars[c].len()
    }

    pub fn min_var_degree(&self) -> usize {
        (0..self.n).map(|v| self.var_degree(v)).min().unwrap_or(0)
    }

    /// `m / n` subtracted from one; the true rate is higher if `H` is rank
    /// deficient.
    pub fn design_rate(&self) -> f64 {
        1.0 - self.m() as f64 / self.n as f64
    }

    pub(crate) fn check_edges(&self, c: usize) -> std::ops::Range<usize> {
        self.offsets[c]..self.offsets[c + 1]
    }

    pub(crate) fn var_edges(&self, v: usize) -> &[usize] {
        &self.var_edges[v]
    }

    /// True iff every check has even parity over `bits`.
    pub fn syndrome_ok(&self, bits: &[u8]) -> bool {
        self.check_vars
            .iter()
            .all(|vars| vars.iter().fold(0u8, |acc, &v| acc ^ (bits[v] & 1)) == 0)
    }

    /// A regular `(dv, dc)` code from Gallager's construction: `dv` stacked
    /// bands, each a column permutation of the identity-band matrix. Every
    /// band after the first is shuffled and then repaired by random column
    /// swaps until it closes no 4-cycle with the bands before it.
    pub fn gallager_regular(n: usize, dv: usize, dc: usize, seed: u64) -> Result<Self> {
        if dv == 0 || dc < 2 || !n.is_multiple_of(dc) {
            return Err(Error::InvalidArgument(format!(
                "need dv >= 1, dc >= 2 and dc | n, got n = {n}, dv = {dv}, dc = {dc}"
            )));
        }
        let band = n / dc;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut checks: Vec<Vec<usize>> = Vec::with_capacity(band * dv);
        let mut earlier: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut perm: Vec<usize> = (0..n).collect();
        for layer in 0..dv {
            if layer > 0 {
                perm.shuffle(&mut rng);
                let mut cost = band_conflicts(&perm, dc, &earlier, checks.len());
                let mut steps = 0;
                while cost > 0 {
                    steps += 1;
                    if steps > 200_000 {
                        return Err(Error::InvalidArgument(format!(
                            "no 4-cycle-free ({dv}, {dc}) code of length {n} found"
                        )));
                    }
                    let a = rng.random_range(0..n);
                    let b = rng.random_range(0..n);
                    if a / dc == b / dc {
                        continue;
                    }
                    perm.swap(a, b);
                    let next = band_conflicts(&perm, dc, &earlier, checks.len());
                    if next <= cost {
                        cost = next;
                    } else {
                        perm.swap(a, b);
                    }
                }
            }
            for r in 0..band {
                let mut vars = perm[r * dc..(r + 1) * dc].to_vec();
                vars.sort_unstable();
                for &v in &vars {
                    earlier[v].push(checks.len());
                }
                checks.push(vars);
            }
        }
        Self::from_checks(n, checks)
    }

    /// True if two checks share more than one variable.
    pub fn has_four_cycle(&self) -> bool {
        let mut shared = vec![0u32; self.m()];
        for (c, vars) in self.check_vars.iter().enumerate() {
            shared.iter_mut().for_each(|s| *s = 0);
            for &v in vars {
                for &other in &self.var_checks[v] {
                    if other > c {
                        shared[other] += 1;
                        if shared[other] >= 2 {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }

    pub fn parse_alist(text: &str) -> Result<Self> {
        alist::parse(text)
    }

    pub fn to_alist(&self) -> String {
        alist::write(self)
    }
}

/// Number of extra shared variables between the rows of a candidate band
/// and the `existing` checks already placed; zero means no new 4-cycle.
fn band_conflicts(perm: &[usize], dc: usize, earlier: &[Vec<usize>], existing: usize) -> usize {
    let mut tally = vec![0usize; existing];
    let mut cost = 0;
    for row in perm.chunks(dc) {
        tally.iter_mut().for_each(|t| *t = 0);
        for &v in row {
            for &c in &earlier[v] {
                tally[c] += 1;
                if tally[c] > 1 {
                    cost += 1;
                }
            }
        }
    }
    cost
}

mod alist {
    use super::*;

    fn err(line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    struct Lines<'a> {
        inner: std::iter::Enumerate<std::str::Lines<'a>>,
        last: usize,
    }

    impl<'a> Lines<'a> {
        fn next_numbers(&mut self, what: &str) -> Result<(usize, Vec<usize>)> {
            for (k, line) in self.inner.by_ref() {
                self.last = k + 1;
                if line.trim().is_empty() {
                    continue;
                }
                let nums = line
                    .split_whitespace()
                    .map(|t| {
                        t.parse::<usize>()
                            .map_err(|_| err(k + 1, format!("invalid integer `{t}`")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                return Ok((k + 1, nums));
            }
            Err(err(self.last + 1, format!("unexpected end of file, expected {what}")))
        }
    }

    pub(super) fn parse(text: &str) -> Result<LdpcCode> {
        let mut lines = Lines {
            inner: text.lines().enumerate(),
            last: 0,
        };
        let (l, dims) = lines.next_numbers("dimensions")?;
        let [n, m] = dims[..] else {
            return Err(err(l, "expected `n m`"));
        };
        let (l, maxes) = lines.next_numbers("maximum degrees")?;
        let [max_dv, max_dc] = maxes[..] else {
            return Err(err(l, "expected `max_dv max_dc`"));
        };
        let (l, dvs) = lines.next_numbers("variable degrees")?;
        if dvs.len() != n {
            return Err(err(l, format!("{} variable degrees, expected {n}", dvs.len())));
        }
        let (l, dcs) = lines.next_numbers("check degrees")?;
        if dcs.len() != m {
            return Err(err(l, format!("{} check degrees, expected {m}", dcs.len())));
        }

        let read_lists = |lines: &mut Lines, count: usize, degrees: &[usize], max: usize, bound: usize, what: &str| {
            let mut out = Vec::with_capacity(count);
            for (idx, &deg) in degrees.iter().enumerate() {
                let (l, nums) = lines.next_numbers(what)?;
                if deg > max {
                    return Err(err(
                        l,
                        format!("{what} {} has degree {deg} above maximum {max}", idx + 1),
                    ));
                }
                let (list, pad) = nums.split_at(nums.len().min(deg));
                if list.len() != deg || pad.iter().any(|&p| p != 0) || list.contains(&0) {
                    return Err(err(
                        l,
                        format!("{what} {} should list {deg} indices then zero padding", idx + 1),
                    ));
                }
                if let Some(&bad) = list.iter().find(|&&x| x > bound) {
                    return Err(err(l, format!("index {bad} out of range 1..={bound}")));
                }
                out.push((l, list.iter().map(|x| x - 1).collect::<Vec<_>>()));
            }
            Ok(out)
        };
        let var_lists = read_lists(&mut lines, n, &dvs, max_dv, m, "variable")?;
        let check_lists = read_lists(&mut lines, m, &dcs, max_dc, n, "check")?;

        for (v, (l, checks)) in var_lists.iter().enumerate() {
            for &c in checks {
                if !check_lists[c].1.contains(&v) {
                    return Err(err(
                        *l,
                        format!(
                            "variable {} lists check {} but check {} does not list it",
                            v + 1,
                            c + 1,
                            c + 1
                        ),
                    ));
                }
            }
        }
        for (c, (l, vars)) in check_lists.iter().enumerate() {
            for &v in vars {
                if !var_lists[v].1.contains(&c) {
                    return Err(err(
                        *l,
                        format!(
                            "check {} lists variable {} but variable {} does not list it",
                            c + 1,
                            v + 1,
                            v + 1
                        ),
                    ));
                }
            }
        }
        LdpcCode::from_checks(n, check_lists.into_iter().map(|(_, v)| v).collect())
    }

    pub(super) fn write(code: &LdpcCode) -> String {
        let dvs: Vec<usize> = (0..code.n()).map(|v| code.var_degree(v)).collect();
        let dcs: Vec<usize> = (0..code.m()).map(|c| code.check_degree(c)).collect();
        let max_dv = dvs.iter().copied().max().unwrap_or(0);
        let max_dc = dcs.iter().copied().max().unwrap_or(0);
        let join = |xs: &mut dyn Iterator<Item = usize>| xs.map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        let padded = |list: &[usize], max: usize| {
            let mut xs: Vec<usize> = list.iter().map(|x| x + 1).collect();
            xs.resize(max, 0);
            join(&mut xs.into_iter())
        };
        let mut s = String::new();
        let _ = writeln!(s, "{} {}", code.n(), code.m());
        let _ = writeln!(s, "{max_dv} {max_dc}");
        let _ = writeln!(s, "{}", join(&mut dvs.iter().copied()));
        let _ = writeln!(s, "{}", join(&mut dcs.iter().copied()));
        for v in 0..code.n() {
            let _ = writeln!(s, "{}", padded(code.var_checks(v), max_dv));
        }
        for c in 0..code.m() {
            let _ = writeln!(s, "{}", padded(code.check_vars(c), max_dc));
        }
        s
    }
}

/// `phi(x) = -ln tanh(x / 2)` for `x >= 0`, an involution; `phi(0) = inf`,
/// `phi(inf) = 0`.
#[inline]
pub(crate) fn phi(x: f64) -> f64 {
    (2.0 / x.exp_m1()).ln_1p()
}

/// Leave-one-out check rule: for edge values `a` (LLRs) fills `out[k]` with
/// `2 atanh(prod_{l != k} tanh(a_l / 2))`, capped at [`MSG_CAP`].
pub(crate) fn check_rule(a: &[f64], out: &mut [f64]) {
    let d = a.len();
    let mags: Vec<f64> = a.iter().map(|x| phi(x.abs())).collect();
    let negative = a.iter().filter(|x| **x < 0.0).count() % 2 == 1;
    // prefix[k] = sum of mags[..k]; suffix handled on the way back
    let mut prefix = vec![0.0; d + 1];
    for k in 0..d {
        prefix[k + 1] = prefix[k] + mags[k];
    }
    let mut suffix = 0.0;
    for k in (0..d).rev() {
        let flip = negative ^ (a[k] < 0.0);
        let mag = phi(prefix[k] + suffix).min(MSG_CAP);
        out[k] = if flip { -mag } else { mag };
        suffix += mags[k];
    }
}
